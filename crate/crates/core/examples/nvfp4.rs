//! Two-level scaling: an FP32 tensor scale times FP8 E4M3 group scales over
//! groups of 16 FP4 values, and its sign-split variant.

use mx_emu::analysis::error_decomposition;
use mx_emu::fixtures::shifted_gaussian;
use mx_emu::scaling::nvfp4_scales;
use mx_emu::{quantize, QuantConfig, Tensor};

fn main() -> mx_emu::Result<()> {
    let (tensor, groups) = nvfp4_scales(6.0, &[6.0, 3.0, 0.7])?;
    println!("tensor amax 6: tensor scale {tensor}, group scales {groups:?}");

    let x = Tensor::from_vec((0..32).map(|i| (i as f64 * 0.77).sin() * 12.0).collect());
    let q = quantize(&x, &QuantConfig::anvfp4())?;
    let ts = q.tensor_scale.expect("double scaling");
    println!("\nencode factor {} (bits {:#010x})", ts.encode, ts.bits());
    for g in 0..q.num_groups() {
        let s = q.effective_scales(g);
        println!("group {g}: positive scale {:.6} negative scale {:.6}", s.pos_scale, s.neg_scale);
    }

    let x = shifted_gaussian(64, 512, 16, 1.0, 10);
    for (name, cfg) in [("NVFP4", QuantConfig::nvfp4()), ("ANVFP4", QuantConfig::anvfp4())] {
        let r = error_decomposition(&x, &cfg)?;
        println!("{name:<7} mse {:.5e} clamped {}", r.mse, r.clamped_count);
    }
    Ok(())
}
