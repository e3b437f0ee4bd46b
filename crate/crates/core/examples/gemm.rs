//! Emulated matrix product on quantized codes. Each element product uses the
//! scale pair of its operands' signs, so AMX operands need four scale
//! products per group pair. The result is checked against a
//! dequantize-then-multiply reference.

use mx_emu::fixtures::random_tensor;
use mx_emu::gemm::{matmul_quantized, oracle_matmul, AccumSpec};
use mx_emu::{quantize, GroupSize, QuantConfig, ScaleMode, Tensor};

fn main() -> mx_emu::Result<()> {
    let a = random_tensor(&[48, 128], 1);
    let b = random_tensor(&[128, 40], 2);
    let exact: Vec<f64> = (0..48)
        .flat_map(|i| {
            let (a, b) = (&a, &b);
            (0..40).map(move |j| (0..128).map(|k| a.data()[i * 128 + k] * b.data()[k * 40 + j]).sum())
        })
        .collect();
    let exact = Tensor::new(vec![48, 40], exact)?;

    let configs = [
        ("MXFP4", QuantConfig::mxfp4(GroupSize::Fixed(32))),
        ("AMXFP4", QuantConfig::amxfp4(GroupSize::Fixed(32), ScaleMode::Fp8E5M2)),
        ("NVFP4", QuantConfig::nvfp4()),
    ];
    for (name, cfg) in configs {
        let qa = quantize(&a, &cfg.clone().with_axis(1))?;
        let qb = quantize(&b, &cfg.clone().with_axis(0))?;
        let c64 = matmul_quantized(&qa, &qb, AccumSpec::f64())?;
        let c32 = matmul_quantized(&qa, &qb, AccumSpec::f32())?;
        let oracle = oracle_matmul(&qa, &qb)?;
        println!(
            "{name:<7} |c - oracle| {:.1e}  f32 accumulation {:.1e}  |c - unquantized| {:.3e}",
            c64.max_abs_diff(&oracle)?,
            c32.max_abs_diff(&oracle)?,
            c64.max_abs_diff(&exact)?
        );
    }
    Ok(())
}
