//! Shared-scale computation.
//!
//! A group's scale maps its largest magnitude onto the element grid. The
//! power-of-two modes keep only an exponent (`floor` as in the OCP MX recipe,
//! or `round` to avoid clamping the group max); the floating-point modes round
//! the ideal max-to-max ratio onto an FP8/FP16/FP32 grid. Asymmetric
//! quantization computes one scale for the positive side of a group and one
//! for the negative side.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MxError, Result};
use crate::formats::{exp2i, floor_log2, round_real_to_fp, ElementFormat};

/// Largest value of the group-level E4M3 scale in double scaling.
const DOUBLE_SCALE_GROUP_MAX: f64 = 448.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScaleMode {
    /// `2^(floor(log2 amax) - emax_elem)`.
    PotFloor,
    /// `2^(round(log2 amax) - emax_elem)`, ties up.
    PotRound,
    Fp8E4M3,
    Fp8E5M2,
    Fp16,
    Fp32,
    /// Tensor-wise FP32 scale times group-wise FP8 E4M3 scale.
    NvDouble,
}

pub const SCALE_MODE_NAMES: &[&str] = &[
    "pot_floor",
    "pot_round",
    "fp8e4m3",
    "fp8e5m2",
    "fp16",
    "fp32",
    "nvfp4_double",
];

impl ScaleMode {
    pub const ALL: [ScaleMode; 7] = [
        ScaleMode::PotFloor,
        ScaleMode::PotRound,
        ScaleMode::Fp8E4M3,
        ScaleMode::Fp8E5M2,
        ScaleMode::Fp16,
        ScaleMode::Fp32,
        ScaleMode::NvDouble,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScaleMode::PotFloor => "pot_floor",
            ScaleMode::PotRound => "pot_round",
            ScaleMode::Fp8E4M3 => "fp8e4m3",
            ScaleMode::Fp8E5M2 => "fp8e5m2",
            ScaleMode::Fp16 => "fp16",
            ScaleMode::Fp32 => "fp32",
            ScaleMode::NvDouble => "nvfp4_double",
        }
    }

    pub fn is_pot(self) -> bool {
        matches!(self, ScaleMode::PotFloor | ScaleMode::PotRound)
    }

    /// Encoding of the (group-level) scale, `None` for power-of-two modes.
    pub fn scale_format(self) -> Option<ElementFormat> {
        match self {
            ScaleMode::PotFloor | ScaleMode::PotRound => None,
            ScaleMode::Fp8E4M3 | ScaleMode::NvDouble => Some(ElementFormat::fp8_e4m3()),
            ScaleMode::Fp8E5M2 => Some(ElementFormat::fp8_e5m2()),
            ScaleMode::Fp16 => Some(ElementFormat::fp16()),
            ScaleMode::Fp32 => Some(ElementFormat::fp32()),
        }
    }

    /// Scale used for an all-zero side of a group.
    pub fn degenerate_scale(self, fmt: &ElementFormat) -> f64 {
        match self.scale_format() {
            None => exp2i(-fmt.emax_elem() - 126),
            Some(sf) => sf.min_positive(),
        }
    }

    /// Single-level scale for a group (or group side) with the given amax.
    ///
    /// For [`ScaleMode::NvDouble`] this needs the tensor-level scale; use
    /// [`double_group_scale`] instead.
    pub fn scale_for_amax(self, amax: f64, fmt: &ElementFormat) -> Result<f64> {
        match self {
            ScaleMode::PotFloor => Ok(pot_floor_scale(amax, fmt)),
            ScaleMode::PotRound => Ok(pot_round_scale(amax, fmt)),
            ScaleMode::Fp8E4M3 | ScaleMode::Fp8E5M2 | ScaleMode::Fp16 | ScaleMode::Fp32 => {
                let sf = self.scale_format().expect("fp mode");
                Ok(fp_scale(amax, fmt, &sf))
            }
            ScaleMode::NvDouble => Err(MxError::Config(
                "nvfp4_double scales need a tensor-level scale".into(),
            )),
        }
    }

    /// Bit pattern of a scale in this mode's encoding, for audit output.
    ///
    /// Power-of-two scales store the biased exponent (`exp + 127`) in the low
    /// bits, FP8/FP16 their magnitude code, FP32 its IEEE bits.
    pub fn encode_scale_bits(self, scale: f64) -> u32 {
        match self {
            ScaleMode::PotFloor | ScaleMode::PotRound => (floor_log2(scale) + 127) as u32,
            ScaleMode::Fp32 => (scale as f32).to_bits(),
            _ => {
                let sf = self.scale_format().expect("fp mode");
                sf.encode(scale).map(|c| c.code).unwrap_or(0)
            }
        }
    }
}

impl fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScaleMode {
    type Err = MxError;

    fn from_str(s: &str) -> Result<Self> {
        ScaleMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                MxError::Config(format!(
                    "unknown scale mode {s:?} (valid: {})",
                    SCALE_MODE_NAMES.join(", ")
                ))
            })
    }
}

/// Positive- and negative-side scales of one group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymScalePair {
    pub pos_scale: f64,
    pub neg_scale: f64,
}

impl AsymScalePair {
    pub fn symmetric(scale: f64) -> Self {
        AsymScalePair {
            pos_scale: scale,
            neg_scale: scale,
        }
    }

    /// Scale applied to an element with the given sign bit.
    #[inline]
    pub fn for_sign(&self, negative: bool) -> f64 {
        if negative {
            self.neg_scale
        } else {
            self.pos_scale
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.pos_scale == self.neg_scale
    }
}

pub fn pot_floor_scale(amax: f64, fmt: &ElementFormat) -> f64 {
    if amax == 0.0 {
        return ScaleMode::PotFloor.degenerate_scale(fmt);
    }
    exp2i(floor_log2(amax) - fmt.emax_elem())
}

pub fn pot_round_scale(amax: f64, fmt: &ElementFormat) -> f64 {
    if amax == 0.0 {
        return ScaleMode::PotRound.degenerate_scale(fmt);
    }
    let fl = floor_log2(amax);
    // round(log2 a) = fl + 1 iff the significand is >= sqrt(2); no binary64
    // significand lies strictly between sqrt(2) and its nearest double.
    let significand = amax / exp2i(fl);
    let rounded = if significand >= std::f64::consts::SQRT_2 {
        fl + 1
    } else {
        fl
    };
    exp2i(rounded - fmt.emax_elem())
}

/// `amax / max_normal(fmt)` rounded onto `scale_fmt`.
pub fn fp_scale(amax: f64, fmt: &ElementFormat, scale_fmt: &ElementFormat) -> f64 {
    let ideal = amax / fmt.max_normal();
    if ideal > 0.0 {
        round_real_to_fp(ideal, scale_fmt).expect("positive finite scale")
    } else {
        scale_fmt.min_positive()
    }
}

/// Tensor-level scale of the double-scaling modes.
///
/// Stored as the FP32 *encode* factor `448 * max_normal / tensor_amax`, so the
/// effective decode scale of a group is `group_scale / encode`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorScale {
    pub encode: f64,
}

impl TensorScale {
    pub fn from_amax(tensor_amax: f64, fmt: &ElementFormat) -> Self {
        let target = DOUBLE_SCALE_GROUP_MAX * fmt.max_normal();
        let encode = if tensor_amax > 0.0 {
            round_real_to_fp(target / tensor_amax, &ElementFormat::fp32())
                .expect("positive scale")
        } else {
            f32::MAX as f64
        };
        TensorScale { encode }
    }

    /// The multiplicative tensor scale, `tensor_amax / (448 * max_normal)`.
    pub fn decode(&self) -> f64 {
        1.0 / self.encode
    }

    /// Effective scale of a group with the given E4M3 group scale.
    #[inline]
    pub fn effective(&self, group_scale: f64) -> f64 {
        group_scale / self.encode
    }

    pub fn bits(&self) -> u32 {
        (self.encode as f32).to_bits()
    }
}

/// Group-level E4M3 scale under double scaling.
pub fn double_group_scale(group_amax: f64, fmt: &ElementFormat, tensor: &TensorScale) -> f64 {
    let e4m3 = ElementFormat::fp8_e4m3();
    let ideal = group_amax * tensor.encode / fmt.max_normal();
    if ideal > 0.0 {
        round_real_to_fp(ideal, &e4m3).expect("positive scale")
    } else {
        e4m3.min_positive()
    }
}

/// NVFP4 double scaling for FP4 E2M1 elements.
///
/// Returns the decoded tensor scale and the E4M3 group scales.
pub fn nvfp4_scales(tensor_amax: f64, group_amaxes: &[f64]) -> Result<(f64, Vec<f64>)> {
    let fmt = ElementFormat::fp4_e2m1();
    if let Some(g) = group_amaxes.iter().find(|&&g| g > tensor_amax) {
        return Err(MxError::InvalidInput(format!(
            "group amax {g} exceeds tensor amax {tensor_amax}"
        )));
    }
    let tensor = TensorScale::from_amax(tensor_amax, &fmt);
    let groups = group_amaxes
        .iter()
        .map(|&g| double_group_scale(g, &fmt, &tensor))
        .collect();
    Ok((tensor.decode(), groups))
}

/// Largest positive value and largest negative magnitude of a group (0 when a
/// side is empty).
pub(crate) fn side_amaxes(group: &[f64]) -> (f64, f64) {
    group.iter().fold((0.0f64, 0.0f64), |(p, n), &v| {
        if v > 0.0 {
            (p.max(v), n)
        } else {
            (p, n.max(-v))
        }
    })
}

/// Separate positive/negative scales of a group.
pub fn asym_scales(group: &[f64], mode: ScaleMode, fmt: &ElementFormat) -> Result<AsymScalePair> {
    if group.is_empty() {
        return Err(MxError::InvalidInput("empty group".into()));
    }
    let (pos, neg) = side_amaxes(group);
    Ok(AsymScalePair {
        pos_scale: mode.scale_for_amax(pos, fmt)?,
        neg_scale: mode.scale_for_amax(neg, fmt)?,
    })
}

/// One shared scale from the group's absolute maximum.
pub fn symmetric_scale(group: &[f64], mode: ScaleMode, fmt: &ElementFormat) -> Result<AsymScalePair> {
    if group.is_empty() {
        return Err(MxError::InvalidInput("empty group".into()));
    }
    let amax = group.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(AsymScalePair::symmetric(mode.scale_for_amax(amax, fmt)?))
}
