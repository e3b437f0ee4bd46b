//! The same tensor under every shared-scale mode, with the scale chosen for
//! one group and the resulting error.

use mx_emu::analysis::error_decomposition;
use mx_emu::fixtures::shifted_gaussian;
use mx_emu::scaling::{asym_scales, symmetric_scale};
use mx_emu::{ElementFormat, GroupSize, QuantConfig, ScaleMode, Symmetry};

fn main() -> mx_emu::Result<()> {
    let fp4 = ElementFormat::fp4_e2m1();
    let group = [-0.9, 0.1, 2.7, 7.9, -3.3, 0.0, 1.2, -0.4];
    println!("group {group:?}");
    for mode in ScaleMode::ALL {
        if mode == ScaleMode::NvDouble {
            continue;
        }
        let sym = symmetric_scale(&group, mode, &fp4)?;
        let asym = asym_scales(&group, mode, &fp4)?;
        println!(
            "{:<10} shared {:<12} positive {:<12} negative {}",
            mode.name(),
            sym.pos_scale,
            asym.pos_scale,
            asym.neg_scale
        );
    }

    let x = shifted_gaussian(32, 256, 32, 1.0, 1);
    println!("\nMSE on a shifted Gaussian tensor, group size 32");
    for mode in ScaleMode::ALL {
        let gs = GroupSize::Fixed(if mode == ScaleMode::NvDouble { 16 } else { 32 });
        let sym = QuantConfig::new(fp4.clone(), gs, mode, Symmetry::Symmetric);
        let asym = sym.clone().with_symmetry(Symmetry::SignSplit);
        println!(
            "{:<13} symmetric {:.4e}  sign-split {:.4e}",
            mode.name(),
            error_decomposition(&x, &sym)?.mse,
            error_decomposition(&x, &asym)?.mse
        );
    }
    Ok(())
}
