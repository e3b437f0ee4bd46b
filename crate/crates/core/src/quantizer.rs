//! Group-wise quantization and dequantization.
//!
//! Each group gets its scale(s) from [`crate::scaling`]; every element is
//! divided by the scale of its sign side, rounded onto the element grid with
//! saturation, and stored as a sign bit plus magnitude code. Dequantization
//! multiplies the decoded grid value by the same sign-selected scale.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{MxError, Result};
use crate::formats::{round_real_to_fp, ElementCode, ElementFormat, FormatKind};
use crate::scaling::{double_group_scale, side_amaxes, AsymScalePair, ScaleMode, TensorScale};
use crate::tensor::{GroupLayout, GroupSize, Tensor};

/// How a group's scale treats the two signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symmetry {
    /// One scale from the group's absolute maximum (MX).
    Symmetric,
    /// Separate scales for positive and negative values (AMX).
    SignSplit,
    /// Min/max affine integer quantization with a zero-point.
    ZeroPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantConfig {
    pub format: ElementFormat,
    pub group_size: GroupSize,
    pub scale_mode: ScaleMode,
    pub symmetry: Symmetry,
    /// Quantization axis; negative values count from the end.
    pub axis: isize,
}

/// Splits a format name such as `fp4_e2m1_asym` or `int4_zp` into the element
/// format and the scale symmetry.
pub fn parse_format_spec(name: &str) -> Result<(ElementFormat, Symmetry)> {
    if let Some(base) = name.strip_suffix("_asym") {
        return Ok((ElementFormat::from_name(base)?, Symmetry::SignSplit));
    }
    if let Some(base) = name.strip_suffix("_zp") {
        let fmt = ElementFormat::from_name(base)?;
        if !matches!(fmt.kind(), FormatKind::Int { .. }) {
            return Err(MxError::UnsupportedFormat(format!(
                "{name}: zero-point quantization needs an integer format"
            )));
        }
        return Ok((fmt, Symmetry::ZeroPoint));
    }
    Ok((ElementFormat::from_name(name)?, Symmetry::Symmetric))
}

impl QuantConfig {
    pub fn new(
        format: ElementFormat,
        group_size: GroupSize,
        scale_mode: ScaleMode,
        symmetry: Symmetry,
    ) -> Self {
        QuantConfig {
            format,
            group_size,
            scale_mode,
            symmetry,
            axis: -1,
        }
    }

    /// Builds a config from the stable string names used on the command line.
    pub fn from_names(format: &str, scale_mode: &str, group_size: &str) -> Result<Self> {
        let (fmt, symmetry) = parse_format_spec(format)?;
        let cfg = QuantConfig::new(fmt, group_size.parse()?, scale_mode.parse()?, symmetry);
        cfg.validate()?;
        Ok(cfg)
    }

    /// MXFP4: FP4 E2M1 elements, power-of-two floor scale.
    pub fn mxfp4(group_size: GroupSize) -> Self {
        Self::new(
            ElementFormat::fp4_e2m1(),
            group_size,
            ScaleMode::PotFloor,
            Symmetry::Symmetric,
        )
    }

    /// AMXFP4: FP4 E2M1 elements with sign-split scales.
    pub fn amxfp4(group_size: GroupSize, scale_mode: ScaleMode) -> Self {
        Self::new(
            ElementFormat::fp4_e2m1(),
            group_size,
            scale_mode,
            Symmetry::SignSplit,
        )
    }

    pub fn nvfp4() -> Self {
        Self::new(
            ElementFormat::fp4_e2m1(),
            GroupSize::Fixed(16),
            ScaleMode::NvDouble,
            Symmetry::Symmetric,
        )
    }

    pub fn anvfp4() -> Self {
        Self::new(
            ElementFormat::fp4_e2m1(),
            GroupSize::Fixed(16),
            ScaleMode::NvDouble,
            Symmetry::SignSplit,
        )
    }

    pub fn with_axis(mut self, axis: isize) -> Self {
        self.axis = axis;
        self
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    /// Stable format name including the symmetry suffix.
    pub fn format_name(&self) -> String {
        match self.symmetry {
            Symmetry::Symmetric => self.format.name().to_string(),
            Symmetry::SignSplit => format!("{}_asym", self.format.name()),
            Symmetry::ZeroPoint => format!("{}_zp", self.format.name()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let GroupSize::Fixed(n) = self.group_size {
            GroupSize::fixed(n)?;
        }
        if self.scale_mode == ScaleMode::NvDouble
            && !matches!(self.group_size, GroupSize::Fixed(16) | GroupSize::Fixed(32))
        {
            return Err(MxError::Config(format!(
                "nvfp4_double needs group size 16 or 32, got {}",
                self.group_size
            )));
        }
        if self.symmetry == Symmetry::ZeroPoint {
            if !matches!(self.format.kind(), FormatKind::Int { .. }) {
                return Err(MxError::Config(
                    "zero-point quantization needs an integer format".into(),
                ));
            }
            if self.scale_mode != ScaleMode::Fp32 {
                return Err(MxError::Config(format!(
                    "zero-point quantization uses fp32 scales, got {}",
                    self.scale_mode
                )));
            }
        }
        Ok(())
    }

    pub fn layout(&self, shape: &[usize]) -> Result<GroupLayout> {
        GroupLayout::new(shape, self.axis, self.group_size)
    }
}

impl fmt::Display for QuantConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} scale={} gs={} axis={}",
            self.format_name(),
            self.scale_mode,
            self.group_size,
            self.axis
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedTensor {
    pub shape: Vec<usize>,
    pub config: QuantConfig,
    /// One code per element, in the tensor's row-major order.
    pub codes: Vec<ElementCode>,
    /// One scale pair per group, in [`GroupLayout`] order. For double scaling
    /// these are the group-level E4M3 scales.
    pub scales: Vec<AsymScalePair>,
    /// Per-group zero-points, only for [`Symmetry::ZeroPoint`].
    pub zero_points: Vec<u32>,
    pub tensor_scale: Option<TensorScale>,
}

impl QuantizedTensor {
    pub fn layout(&self) -> GroupLayout {
        self.config
            .layout(&self.shape)
            .expect("layout validated at quantization")
    }

    pub fn num_groups(&self) -> usize {
        self.scales.len()
    }

    /// Scales that multiply decoded grid values of group `g`, including the
    /// tensor-level factor.
    pub fn effective_scales(&self, g: usize) -> AsymScalePair {
        let s = self.scales[g];
        match &self.tensor_scale {
            Some(t) => AsymScalePair {
                pos_scale: t.effective(s.pos_scale),
                neg_scale: t.effective(s.neg_scale),
            },
            None => s,
        }
    }

    pub fn dequantize(&self) -> Tensor {
        let layout = self.layout();
        let mut out = vec![0.0; self.codes.len()];
        for g in 0..layout.num_groups() {
            let eff = self.effective_scales(g);
            match self.config.symmetry {
                Symmetry::ZeroPoint => {
                    let zp = self.zero_points[g] as f64;
                    for idx in layout.group_indices(g) {
                        out[idx] = (self.codes[idx].code as f64 - zp) * eff.pos_scale;
                    }
                }
                _ => {
                    for idx in layout.group_indices(g) {
                        let c = self.codes[idx];
                        let v = self.config.format.decode(c);
                        out[idx] = if v == 0.0 { 0.0 } else { v * eff.for_sign(c.sign) };
                    }
                }
            }
        }
        Tensor::new(self.shape.clone(), out).expect("shape preserved")
    }
}

/// Quantization result with a per-element saturation flag.
pub(crate) struct Quantized {
    pub tensor: QuantizedTensor,
    /// `true` where the scaled element exceeded the grid and was clamped.
    pub clamped: Vec<bool>,
}

fn check_finite(x: &Tensor) -> Result<()> {
    match x.data().iter().position(|v| !v.is_finite()) {
        Some(index) => Err(MxError::NanInput { index }),
        None => Ok(()),
    }
}

pub(crate) fn quantize_tracked(x: &Tensor, cfg: &QuantConfig) -> Result<Quantized> {
    cfg.validate()?;
    let layout = cfg.layout(x.shape())?;
    check_finite(x)?;
    let data = x.data();
    let fmt = &cfg.format;
    let n = data.len();
    let mut codes = vec![ElementCode::default(); n];
    let mut clamped = vec![false; n];
    let mut scales = Vec::with_capacity(layout.num_groups());
    let mut zero_points = Vec::new();

    let tensor_scale = (cfg.scale_mode == ScaleMode::NvDouble).then(|| {
        let amax = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        TensorScale::from_amax(amax, fmt)
    });
    let side_scale = |amax: f64| -> Result<f64> {
        match &tensor_scale {
            Some(t) => Ok(double_group_scale(amax, fmt, t)),
            None => cfg.scale_mode.scale_for_amax(amax, fmt),
        }
    };

    let max_normal = fmt.max_normal();
    for g in 0..layout.num_groups() {
        let group = layout.gather(data, g);
        if cfg.symmetry == Symmetry::ZeroPoint {
            let (scale, zp) = zero_point_params(&group, fmt);
            let top = zero_point_levels(fmt);
            for idx in layout.group_indices(g) {
                let q = (data[idx] / scale).round_ties_even() + zp as f64;
                clamped[idx] = q < 0.0 || q > top as f64;
                codes[idx] = ElementCode {
                    sign: false,
                    code: q.clamp(0.0, top as f64) as u32,
                };
            }
            scales.push(AsymScalePair::symmetric(scale));
            zero_points.push(zp);
            continue;
        }

        let (pos_amax, neg_amax) = side_amaxes(&group);
        let pair = match cfg.symmetry {
            Symmetry::SignSplit => AsymScalePair {
                pos_scale: side_scale(pos_amax)?,
                neg_scale: side_scale(neg_amax)?,
            },
            _ => AsymScalePair::symmetric(side_scale(pos_amax.max(neg_amax))?),
        };
        let eff = match &tensor_scale {
            Some(t) => AsymScalePair {
                pos_scale: t.effective(pair.pos_scale),
                neg_scale: t.effective(pair.neg_scale),
            },
            None => pair,
        };
        for idx in layout.group_indices(g) {
            let v = data[idx];
            let negative = v < 0.0;
            let ratio = v.abs() / eff.for_sign(negative);
            clamped[idx] = ratio > max_normal;
            let code = fmt.code_of_magnitude(fmt.round_magnitude(ratio));
            codes[idx] = ElementCode {
                sign: negative && code != 0,
                code,
            };
        }
        scales.push(pair);
    }

    Ok(Quantized {
        tensor: QuantizedTensor {
            shape: x.shape().to_vec(),
            config: cfg.clone(),
            codes,
            scales,
            zero_points,
            tensor_scale,
        },
        clamped,
    })
}

fn zero_point_levels(fmt: &ElementFormat) -> u32 {
    match fmt.kind() {
        FormatKind::Int { bits } => (1u32 << bits) - 1,
        _ => unreachable!("validated: zero-point needs an integer format"),
    }
}

/// `scale = (max - min) / (2^k - 1)` over the group extended to include 0,
/// rounded to FP32; `zero_point = round(-min / scale)`.
fn zero_point_params(group: &[f64], fmt: &ElementFormat) -> (f64, u32) {
    let top = zero_point_levels(fmt);
    let lo = group.iter().fold(0.0f64, |m, &v| m.min(v));
    let hi = group.iter().fold(0.0f64, |m, &v| m.max(v));
    let range = hi - lo;
    let fp32 = ElementFormat::fp32();
    if range == 0.0 {
        return (fp32.min_positive(), 0);
    }
    let scale = round_real_to_fp(range / top as f64, &fp32).expect("positive scale");
    let zp = (-lo / scale).round_ties_even().clamp(0.0, top as f64) as u32;
    (scale, zp)
}

pub fn quantize(x: &Tensor, cfg: &QuantConfig) -> Result<QuantizedTensor> {
    Ok(quantize_tracked(x, cfg)?.tensor)
}

pub fn dequantize(q: &QuantizedTensor) -> Tensor {
    q.dequantize()
}

pub fn quantize_dequantize(x: &Tensor, cfg: &QuantConfig) -> Result<Tensor> {
    Ok(quantize(x, cfg)?.dequantize())
}
