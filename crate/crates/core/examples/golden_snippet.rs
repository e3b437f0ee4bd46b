//! Quantizes a 1024-point ramp from -4.9 to 31 as a single group and prints
//! the distinct values each format produces. The long positive tail sets a
//! shared scale that wipes out the small negative values under MXFP4; giving
//! the negative side its own scale recovers them.

use mx_emu::fixtures::snippet;
use mx_emu::{quantize_dequantize, GroupSize, QuantConfig, ScaleMode};

fn main() -> mx_emu::Result<()> {
    let x = snippet();
    let configs = [
        ("MXFP4", QuantConfig::mxfp4(GroupSize::Row)),
        ("AMXFP4, power-of-two scales", QuantConfig::amxfp4(GroupSize::Row, ScaleMode::PotFloor)),
        ("AMXFP4, FP8 E5M2 scales", QuantConfig::amxfp4(GroupSize::Row, ScaleMode::Fp8E5M2)),
    ];
    for (name, cfg) in configs {
        let u = quantize_dequantize(&x, &cfg)?.unique();
        println!("{name} ({} values): {u:?}", u.len());
    }
    Ok(())
}
