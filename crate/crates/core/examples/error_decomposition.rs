//! Splits quantization error into clamping (values beyond the largest grid
//! point) and rounding. Rounding the shared exponent instead of flooring it
//! trades clamping error for coarser rounding.

use mx_emu::analysis::error_decomposition;
use mx_emu::fixtures::spike_plus_noise;
use mx_emu::{GroupSize, QuantConfig, ScaleMode, Tensor};

fn main() -> mx_emu::Result<()> {
    let x = Tensor::from_vec(vec![0.0, 7.9]);
    for mode in [ScaleMode::PotFloor, ScaleMode::PotRound] {
        let cfg = QuantConfig { scale_mode: mode, ..QuantConfig::mxfp4(GroupSize::Row) };
        let r = error_decomposition(&x, &cfg)?;
        println!("[0, 7.9] {:<9} clamp {:.4} round {:.4}", mode.name(), r.clamp_sq_error, r.round_sq_error);
    }

    let x = spike_plus_noise(64, 256, 2, 20.0, 5);
    println!();
    for mode in [ScaleMode::PotFloor, ScaleMode::PotRound, ScaleMode::Fp8E5M2] {
        for gs in [16, 32, 128] {
            let cfg = QuantConfig { scale_mode: mode, ..QuantConfig::mxfp4(GroupSize::Fixed(gs)) };
            let r = error_decomposition(&x, &cfg)?;
            let worst = r.per_group.iter().map(|g| g.clamp_sq_error).fold(0.0, f64::max);
            println!(
                "{:<9} gs {gs:>3}: mse {:.4e} clamp {:>9.3} round {:>9.3} clamped {:>4} worst group clamp {:.3}",
                mode.name(),
                r.mse,
                r.clamp_sq_error,
                r.round_sq_error,
                r.clamped_count,
                worst
            );
        }
    }
    Ok(())
}
