//! A cluster-wise Lloyd-Max codebook is a near-optimal reference for any
//! 4-bit-like format. Groups are clustered on normalized mean and kurtosis
//! and one codebook is fitted per cluster.

use mx_emu::analysis::error_decomposition;
use mx_emu::fixtures::shifted_gaussian;
use mx_emu::lloydmax::{lloyd_fit, reference_quantize, Codebook, LloydConfig, LloydInit};
use mx_emu::{GroupSize, QuantConfig, ScaleMode};

fn main() -> mx_emu::Result<()> {
    let x = shifted_gaussian(64, 256, 32, 1.0, 8);
    let gs = GroupSize::Fixed(32);
    let amx = QuantConfig::amxfp4(gs, ScaleMode::Fp8E5M2);
    println!("MXFP4   mse {:.4e}", error_decomposition(&x, &QuantConfig::mxfp4(gs))?.mse);
    println!("AMXFP4  mse {:.4e}", error_decomposition(&x, &amx)?.mse);

    for clusters in [1, 4, 16, 32] {
        let cfg = LloydConfig { n_clusters: clusters, ..LloydConfig::default() };
        let q = reference_quantize(&x, gs, -1, &cfg, &LloydInit::Quantile)?;
        println!("Lloyd-Max, {clusters:>2} clusters, 16 levels: mse {:.4e}", q.report.mse);
    }
    let cfg = LloydConfig::default();
    let q = reference_quantize(&x, gs, -1, &cfg, &LloydInit::FormatGrid(amx))?;
    println!("Lloyd-Max from the AMXFP4 grid:        mse {:.4e}", q.report.mse);

    let (cb, trace) = lloyd_fit(x.data(), &cfg, &Codebook::quantile_init(x.data(), 16)?)?;
    println!("\nsingle codebook, MSE by iteration: {:.5} -> {:.5} -> {:.5}", trace[0], trace[1], trace[100]);
    println!("levels {:?}", cb.levels.iter().map(|l| (l * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    Ok(())
}
