//! Emulated reduced-precision dot products.
//!
//! Operands stay in code form. For every pair of aligned groups the four
//! products of the operands' positive/negative scales are formed once; each
//! element product is then `code_a * code_b * scale_product[sign_a][sign_b]`.
//! Within a group products are accumulated in index order, and group partial
//! sums are added in ascending group order.
//!
//! With 64-bit accumulation the result is bit-identical to dequantizing both
//! operands and summing their products in the same order, provided each
//! element product is exact in binary64. That holds for 4/6/8-bit elements
//! with power-of-two, FP8 or FP16 scales, and for FP4 with FP32 scales.

use crate::error::{MxError, Result};
use crate::formats::ElementFormat;
use crate::quantizer::{quantize, QuantConfig, QuantizedTensor, Symmetry};
use crate::tensor::{GroupLayout, Tensor};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Accumulator {
    #[default]
    Float64Reference,
    Float32,
}

/// Accumulation width; the summation order is always sequential within a
/// group, then ascending across groups.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AccumSpec {
    pub accumulator: Accumulator,
}

impl AccumSpec {
    pub fn f64() -> Self {
        AccumSpec {
            accumulator: Accumulator::Float64Reference,
        }
    }

    pub fn f32() -> Self {
        AccumSpec {
            accumulator: Accumulator::Float32,
        }
    }
}

/// An operand decoded to signed grid values, with the lane layout used to
/// walk it along the reduction axis.
struct Operand<'a> {
    q: &'a QuantizedTensor,
    layout: GroupLayout,
    values: Vec<f64>,
}

impl<'a> Operand<'a> {
    fn new(q: &'a QuantizedTensor) -> Result<Self> {
        if q.config.symmetry == Symmetry::ZeroPoint {
            return Err(MxError::UnsupportedPath(format!(
                "{} operands have no reduced-precision GEMM path; dequantize and use a reference matmul",
                q.config.format_name()
            )));
        }
        let fmt: &ElementFormat = &q.config.format;
        let table = fmt.magnitudes()?;
        let values = q
            .codes
            .iter()
            .map(|c| {
                let m = table[c.code as usize];
                if c.sign {
                    -m
                } else {
                    m
                }
            })
            .collect();
        Ok(Operand {
            q,
            layout: q.layout(),
            values,
        })
    }

    fn groups_per_lane(&self) -> usize {
        self.layout.extent() / self.layout.group_len()
    }
}

fn check_compatible(a: &Operand, b: &Operand) -> Result<()> {
    if a.layout.extent() != b.layout.extent() {
        return Err(MxError::Shape(format!(
            "reduction lengths differ: {} vs {}",
            a.layout.extent(),
            b.layout.extent()
        )));
    }
    if a.layout.group_len() != b.layout.group_len() {
        return Err(MxError::Shape(format!(
            "group sizes differ: {} vs {}",
            a.layout.group_len(),
            b.layout.group_len()
        )));
    }
    Ok(())
}

fn lane_dot(a: &Operand, lane_a: usize, b: &Operand, lane_b: usize, spec: AccumSpec) -> f64 {
    let gl = a.layout.group_len();
    let gpl = a.groups_per_lane();
    let mut total64 = 0.0f64;
    let mut total32 = 0.0f32;
    for c in 0..gpl {
        let sa = a.q.effective_scales(lane_a * gpl + c);
        let sb = b.q.effective_scales(lane_b * gpl + c);
        let products = [
            [sa.pos_scale * sb.pos_scale, sa.pos_scale * sb.neg_scale],
            [sa.neg_scale * sb.pos_scale, sa.neg_scale * sb.neg_scale],
        ];
        let mut partial64 = 0.0f64;
        let mut partial32 = 0.0f32;
        for k in c * gl..(c + 1) * gl {
            let ia = a.layout.lane_index(lane_a, k);
            let ib = b.layout.lane_index(lane_b, k);
            let class = products[a.q.codes[ia].sign as usize][b.q.codes[ib].sign as usize];
            let p = (a.values[ia] * b.values[ib]) * class;
            match spec.accumulator {
                Accumulator::Float64Reference => partial64 += p,
                Accumulator::Float32 => partial32 += p as f32,
            }
        }
        total64 += partial64;
        total32 += partial32;
    }
    match spec.accumulator {
        Accumulator::Float64Reference => total64,
        Accumulator::Float32 => total32 as f64,
    }
}

/// Dot product of two 1-D quantized vectors.
pub fn dot(a: &QuantizedTensor, b: &QuantizedTensor, spec: AccumSpec) -> Result<f64> {
    if a.shape.len() != 1 || b.shape.len() != 1 {
        return Err(MxError::Shape(format!(
            "dot needs 1-D operands, got {:?} and {:?}",
            a.shape, b.shape
        )));
    }
    let (oa, ob) = (Operand::new(a)?, Operand::new(b)?);
    check_compatible(&oa, &ob)?;
    Ok(lane_dot(&oa, 0, &ob, 0, spec))
}

/// `a @ b` for already-quantized operands: `a` is `[m, k]` grouped along
/// axis 1 and `b` is `[k, n]` grouped along axis 0.
pub fn matmul_quantized(a: &QuantizedTensor, b: &QuantizedTensor, spec: AccumSpec) -> Result<Tensor> {
    if a.shape.len() != 2 || b.shape.len() != 2 {
        return Err(MxError::Shape("matmul needs 2-D operands".into()));
    }
    if a.shape[1] != b.shape[0] {
        return Err(MxError::Shape(format!(
            "inner dimensions differ: {:?} @ {:?}",
            a.shape, b.shape
        )));
    }
    if a.layout().extent() != a.shape[1] || b.layout().extent() != b.shape[0] {
        return Err(MxError::Shape(
            "operands must be grouped along the inner dimension".into(),
        ));
    }
    let (oa, ob) = (Operand::new(a)?, Operand::new(b)?);
    check_compatible(&oa, &ob)?;
    let (m, n) = (a.shape[0], b.shape[1]);
    let mut out = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            out.push(lane_dot(&oa, i, &ob, j, spec));
        }
    }
    Tensor::new(vec![m, n], out)
}

/// Quantizes `a` row-wise and `b` column-wise (the configs' axes are
/// overridden) and multiplies them in code form.
pub fn matmul(
    a: &Tensor,
    b: &Tensor,
    cfg_a: &QuantConfig,
    cfg_b: &QuantConfig,
    spec: AccumSpec,
) -> Result<Tensor> {
    if a.ndim() != 2 || b.ndim() != 2 || a.shape()[1] != b.shape()[0] {
        return Err(MxError::Shape(format!(
            "cannot multiply {:?} by {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let qa = quantize(a, &cfg_a.clone().with_axis(1))?;
    let qb = quantize(b, &cfg_b.clone().with_axis(0))?;
    matmul_quantized(&qa, &qb, spec)
}

/// Dequantize-then-multiply reference in binary64, summing each group's
/// products in order and then the group partials in ascending order.
pub fn oracle_matmul(a: &QuantizedTensor, b: &QuantizedTensor) -> Result<Tensor> {
    let (da, db) = (a.dequantize(), b.dequantize());
    let (m, k, n) = (a.shape[0], a.shape[1], b.shape[1]);
    if b.shape[0] != k {
        return Err(MxError::Shape("inner dimensions differ".into()));
    }
    let gl = a.layout().group_len();
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let mut total = 0.0;
            for start in (0..k).step_by(gl) {
                let mut partial = 0.0;
                for kk in start..start + gl {
                    partial += da.data()[i * k + kk] * db.data()[kk * n + j];
                }
                total += partial;
            }
            out[i * n + j] = total;
        }
    }
    Tensor::new(vec![m, n], out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal_vec, seeded};
    use crate::scaling::ScaleMode;
    use crate::tensor::GroupSize;

    fn q1(values: Vec<f64>, cfg: &QuantConfig) -> QuantizedTensor {
        quantize(&Tensor::from_vec(values), cfg).unwrap()
    }

    #[test]
    fn simple_dot() {
        let cfg = QuantConfig::mxfp4(GroupSize::Row);
        let a = q1(vec![2.0, -1.0, 6.0, 0.0], &cfg);
        let b = q1(vec![1.0, 1.0, 0.0, 4.0], &cfg);
        assert_eq!(dot(&a, &b, AccumSpec::f64()).unwrap(), 1.0);
    }

    #[test]
    fn zero_operand() {
        let cfg = QuantConfig::amxfp4(GroupSize::Fixed(16), ScaleMode::Fp8E5M2);
        let a = q1(normal_vec(&mut seeded(1), 32), &cfg);
        let b = q1(vec![0.0; 32], &cfg);
        assert_eq!(dot(&a, &b, AccumSpec::f64()).unwrap(), 0.0);
    }

    #[test]
    fn dot_matches_dequantized_products() {
        let cfg = QuantConfig::amxfp4(GroupSize::Fixed(32), ScaleMode::Fp8E5M2);
        let mut rng = seeded(7);
        let a = q1(normal_vec(&mut rng, 64).iter().map(|v| v + 0.7).collect(), &cfg);
        let b = q1(normal_vec(&mut rng, 64).iter().map(|v| v - 0.4).collect(), &cfg);
        let (da, db) = (a.dequantize(), b.dequantize());
        let mut want = 0.0;
        for c in 0..2 {
            let mut partial = 0.0;
            for k in c * 32..(c + 1) * 32 {
                partial += da.data()[k] * db.data()[k];
            }
            want += partial;
        }
        assert_eq!(dot(&a, &b, AccumSpec::f64()).unwrap(), want);
        let f32_result = dot(&a, &b, AccumSpec::f32()).unwrap();
        assert!((f32_result - want).abs() < 1e-4 * want.abs().max(1.0));
    }

    #[test]
    fn mismatched_operands() {
        let a = q1(vec![1.0; 32], &QuantConfig::mxfp4(GroupSize::Fixed(16)));
        let b = q1(vec![1.0; 32], &QuantConfig::mxfp4(GroupSize::Fixed(32)));
        assert!(matches!(dot(&a, &b, AccumSpec::f64()), Err(MxError::Shape(_))));
        let c = q1(vec![1.0; 16], &QuantConfig::mxfp4(GroupSize::Fixed(16)));
        assert!(matches!(dot(&a, &c, AccumSpec::f64()), Err(MxError::Shape(_))));
    }

    #[test]
    fn zero_point_operand_is_rejected() {
        let zp = QuantConfig::from_names("int4_zp", "fp32", "16").unwrap();
        let a = q1(vec![1.0; 16], &zp);
        let b = q1(vec![1.0; 16], &QuantConfig::mxfp4(GroupSize::Fixed(16)));
        assert!(matches!(dot(&a, &b, AccumSpec::f64()), Err(MxError::UnsupportedPath(_))));
    }

    #[test]
    fn identity_reproduces_on_grid_matrix() {
        let a = Tensor::new(vec![2, 4], vec![6.0, -3.0, 1.5, 0.0, 4.0, 2.0, -1.0, 0.5]).unwrap();
        let mut eye = vec![0.0; 16];
        for i in 0..4 {
            eye[i * 4 + i] = 1.0;
        }
        let b = Tensor::new(vec![4, 4], eye).unwrap();
        let cfg = QuantConfig::mxfp4(GroupSize::Row);
        let y = matmul(&a, &b, &cfg, &cfg, AccumSpec::f64()).unwrap();
        assert_eq!(y.data(), a.data());
    }

    #[test]
    fn inner_dim_smaller_than_group() {
        let a = Tensor::zeros(vec![8, 8]).unwrap();
        let cfg = QuantConfig::mxfp4(GroupSize::Fixed(32));
        let err = matmul(&a, &a, &cfg, &cfg, AccumSpec::f64()).unwrap_err();
        assert!(matches!(err, MxError::Divisibility { .. }));
    }

    #[test]
    fn negating_one_element_switches_its_scale() {
        let cfg = QuantConfig::amxfp4(GroupSize::Fixed(16), ScaleMode::PotFloor);
        let mut rng = seeded(3);
        let base: Vec<f64> = normal_vec(&mut rng, 16).iter().map(|v| v.abs() + 0.1).collect();
        let b = q1(vec![1.0; 16], &cfg);
        let a1 = q1(base.clone(), &cfg);
        // flip the smallest element so the positive-side amax is unchanged
        let k = (0..16).min_by(|&i, &j| base[i].total_cmp(&base[j])).unwrap();
        let mut flipped = base.clone();
        flipped[k] = -flipped[k];
        let a2 = q1(flipped, &cfg);
        let d1 = dot(&a1, &b, AccumSpec::f64()).unwrap();
        let d2 = dot(&a2, &b, AccumSpec::f64()).unwrap();
        let want_delta = a2.dequantize().data()[k] - a1.dequantize().data()[k];
        assert!((d2 - d1 - want_delta).abs() < 1e-12);
        assert_eq!(a1.scales[0].pos_scale, a2.scales[0].pos_scale);
    }
}
