//! Per-group mean and kurtosis, summarized as five-number summaries.

use mx_emu::analysis::{group_stats, moments, stats_summary};
use mx_emu::fixtures::{shifted_gaussian, snippet, spike_plus_noise};
use mx_emu::GroupSize;

fn main() -> mx_emu::Result<()> {
    println!("alternating +-1: kurtosis {:?}", moments(&[1.0, -1.0, 1.0, -1.0]).1);
    println!("constant group:  kurtosis {:?}", moments(&[0.3; 8]).1);

    let inputs = [
        ("ramp", snippet()),
        ("shifted gaussian", shifted_gaussian(32, 256, 32, 1.0, 0)),
        ("spike + noise", spike_plus_noise(32, 256, 2, 30.0, 0)),
    ];
    for (name, x) in inputs {
        let s = stats_summary(&group_stats(&x, GroupSize::Fixed(32), -1)?)?;
        println!(
            "\n{name}: {} groups\n  mean     {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}\n  kurtosis {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}",
            s.groups,
            s.mean.min, s.mean.q1, s.mean.median, s.mean.q3, s.mean.max,
            s.kurtosis.min, s.kurtosis.q1, s.kurtosis.median, s.kurtosis.q3, s.kurtosis.max
        );
    }
    Ok(())
}
