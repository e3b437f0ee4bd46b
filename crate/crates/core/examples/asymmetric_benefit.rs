//! Groups whose values lean to one side waste half of a symmetric grid.
//! Sign-split scales (AMX) and zero-point integers both adapt to the skew;
//! this sweeps the shift and shows the error of each format.

use mx_emu::analysis::error_decomposition;
use mx_emu::fixtures::offset_gaussian;
use mx_emu::QuantConfig;

fn main() -> mx_emu::Result<()> {
    let formats = [
        ("MXFP4", "fp4_e2m1", "pot_floor"),
        ("AMXFP4", "fp4_e2m1_asym", "fp8e5m2"),
        ("MXINT4", "int4", "pot_floor"),
        ("AMXINT4", "int4_asym", "fp8e5m2"),
        ("INT4 zero-point", "int4_zp", "fp32"),
    ];
    for gs in [16, 32] {
        println!("group size {gs}");
        print!("{:<8}", "shift");
        for (label, _, _) in formats {
            print!("{label:>17}");
        }
        println!();
        for shift in [0.0, 0.5, 1.0, 2.0] {
            let x = offset_gaussian(64, 512, gs, 1.0, shift, 42);
            print!("{shift:<8}");
            for (_, fmt, scale) in formats {
                let cfg = QuantConfig::from_names(fmt, scale, &gs.to_string())?;
                print!("{:>17.4e}", error_decomposition(&x, &cfg)?.mse);
            }
            println!();
        }
    }
    Ok(())
}
