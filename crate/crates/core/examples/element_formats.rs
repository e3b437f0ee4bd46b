//! Element grids, rounding and bit codes of the supported formats.

use mx_emu::formats::{ElementFormat, ELEMENT_FORMAT_NAMES};

fn main() -> mx_emu::Result<()> {
    for name in ELEMENT_FORMAT_NAMES {
        let f = ElementFormat::from_name(name)?;
        let mags = f.magnitudes()?;
        println!(
            "{name:<9} bits {} max {:<6} emax {:>2} min>0 {:<10} magnitudes {}",
            f.total_bits(),
            f.max_normal(),
            f.emax_elem(),
            f.min_positive(),
            mags.len()
        );
    }

    let fp4 = ElementFormat::fp4_e2m1();
    println!("\nFP4 E2M1 grid: {:?}", fp4.grid()?);
    for v in [0.25, 0.75, 2.5, 5.0, 7.0, -1.25] {
        let c = fp4.encode(v)?;
        println!(
            "round({v:>5}) = {:>4}  code sign={} magnitude={:03b}",
            fp4.round_to_grid(v)?,
            c.sign as u8,
            c.code
        );
    }
    Ok(())
}
