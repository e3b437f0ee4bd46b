//! A randomized Hadamard rotation spreads outliers across the row: kurtosis
//! drops, but group means become more dispersed, which is the skew that
//! sign-split scales exploit.

use mx_emu::analysis::{group_stats, stats_summary};
use mx_emu::fixtures::spike_plus_noise;
use mx_emu::rotation::{make_rotation, rotate, rotate_transpose};
use mx_emu::{quantize_dequantize, GroupSize, QuantConfig, ScaleMode, Tensor};

fn describe(label: &str, x: &Tensor) -> mx_emu::Result<()> {
    let row = stats_summary(&group_stats(x, GroupSize::Row, -1)?)?;
    let g32 = stats_summary(&group_stats(x, GroupSize::Fixed(32), -1)?)?;
    println!(
        "{label:<8} row kurtosis median {:>8.2}   GS=32 mean IQR {:.4}",
        row.kurtosis.median,
        g32.mean.iqr()
    );
    for (name, cfg) in [
        ("MXFP4", QuantConfig::mxfp4(GroupSize::Fixed(32))),
        ("AMXFP4", QuantConfig::amxfp4(GroupSize::Fixed(32), ScaleMode::Fp8E5M2)),
    ] {
        let y = quantize_dequantize(x, &cfg)?;
        println!("         {name:<7} mse {:.4e}", mx_emu::analysis::mse(x, &y)?);
    }
    Ok(())
}

fn main() -> mx_emu::Result<()> {
    let x = spike_plus_noise(32, 1024, 4, 50.0, 7);
    let r = make_rotation(1024, 7)?;
    let y = rotate(&x, &r, -1)?;
    describe("before", &x)?;
    describe("rotated", &y)?;
    let back = rotate_transpose(&y, &r, -1)?;
    println!("inverse rotation max error {:.2e}", back.max_abs_diff(&x)?);
    Ok(())
}
