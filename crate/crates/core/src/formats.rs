//! Element-level number formats.
//!
//! Every format is a finite, sign-symmetric grid of representable values.
//! Floating-point formats are described by their exponent/mantissa split and
//! bias; integer formats by their width; custom codebooks by an explicit list
//! of non-negative magnitudes. Rounding is round-to-nearest with ties to the
//! even code (even mantissa for floats, even integer for INT), and values
//! beyond the largest magnitude saturate to it.

use std::fmt;

use crate::error::{MxError, Result};

/// Reserved code points of a floating-point layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialCodes {
    /// Every code is a finite number (FP4, FP6).
    None,
    /// Only the all-ones magnitude code is NaN (OCP FP8 E4M3).
    NanOnly,
    /// The top exponent is reserved for Inf/NaN (IEEE style: E5M2, FP16, FP32).
    TopExponent,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FormatKind {
    Float {
        exponent_bits: u32,
        mantissa_bits: u32,
        bias: i32,
        special: SpecialCodes,
    },
    /// Symmetric two's-complement integer, excluding the most negative code.
    Int { bits: u32 },
    /// User-supplied magnitudes, sorted ascending, starting at 0.
    Codebook { magnitudes: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementFormat {
    name: String,
    kind: FormatKind,
    has_subnormals: bool,
}

/// A sign bit plus the magnitude code (exponent and mantissa fields for
/// floats, the absolute value for integers, the level index for codebooks).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct ElementCode {
    pub sign: bool,
    pub code: u32,
}

/// Names accepted by [`ElementFormat::from_name`].
pub const ELEMENT_FORMAT_NAMES: &[&str] = &[
    "fp4_e2m1", "fp6_e3m2", "fp6_e2m3", "fp8_e4m3", "fp8_e5m2", "int4", "int8",
];

impl ElementFormat {
    fn float(name: &str, exponent_bits: u32, mantissa_bits: u32, special: SpecialCodes) -> Self {
        ElementFormat {
            name: name.to_string(),
            kind: FormatKind::Float {
                exponent_bits,
                mantissa_bits,
                bias: (1 << (exponent_bits - 1)) - 1,
                special,
            },
            has_subnormals: true,
        }
    }

    pub fn fp4_e2m1() -> Self {
        Self::float("fp4_e2m1", 2, 1, SpecialCodes::None)
    }

    pub fn fp6_e3m2() -> Self {
        Self::float("fp6_e3m2", 3, 2, SpecialCodes::None)
    }

    pub fn fp6_e2m3() -> Self {
        Self::float("fp6_e2m3", 2, 3, SpecialCodes::None)
    }

    pub fn fp8_e4m3() -> Self {
        Self::float("fp8_e4m3", 4, 3, SpecialCodes::NanOnly)
    }

    pub fn fp8_e5m2() -> Self {
        Self::float("fp8_e5m2", 5, 2, SpecialCodes::TopExponent)
    }

    /// IEEE binary16. Used as a shared-scale encoding.
    pub fn fp16() -> Self {
        Self::float("fp16", 5, 10, SpecialCodes::TopExponent)
    }

    /// IEEE binary32. Used as a shared-scale encoding.
    pub fn fp32() -> Self {
        Self::float("fp32", 8, 23, SpecialCodes::TopExponent)
    }

    pub fn int4() -> Self {
        Self::int(4).expect("int4 is valid")
    }

    pub fn int8() -> Self {
        Self::int(8).expect("int8 is valid")
    }

    pub fn int(bits: u32) -> Result<Self> {
        if !(2..=16).contains(&bits) {
            return Err(MxError::UnsupportedFormat(format!("int{bits}")));
        }
        Ok(ElementFormat {
            name: format!("int{bits}"),
            kind: FormatKind::Int { bits },
            has_subnormals: false,
        })
    }

    /// Looks up one of the supported floating-point layouts by its (E, M) split.
    pub fn from_exponent_mantissa(exponent_bits: u32, mantissa_bits: u32) -> Result<Self> {
        match (exponent_bits, mantissa_bits) {
            (2, 1) => Ok(Self::fp4_e2m1()),
            (3, 2) => Ok(Self::fp6_e3m2()),
            (2, 3) => Ok(Self::fp6_e2m3()),
            (4, 3) => Ok(Self::fp8_e4m3()),
            (5, 2) => Ok(Self::fp8_e5m2()),
            (5, 10) => Ok(Self::fp16()),
            (8, 23) => Ok(Self::fp32()),
            (e, m) => Err(MxError::UnsupportedFormat(format!("E{e}M{m}"))),
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "fp4_e2m1" => Ok(Self::fp4_e2m1()),
            "fp6_e3m2" => Ok(Self::fp6_e3m2()),
            "fp6_e2m3" => Ok(Self::fp6_e2m3()),
            "fp8_e4m3" => Ok(Self::fp8_e4m3()),
            "fp8_e5m2" => Ok(Self::fp8_e5m2()),
            "int4" => Ok(Self::int4()),
            "int8" => Ok(Self::int8()),
            other => Err(MxError::UnsupportedFormat(format!(
                "{other} (valid: {})",
                ELEMENT_FORMAT_NAMES.join(", ")
            ))),
        }
    }

    /// A custom grid given by its non-negative magnitudes (0 is added if
    /// missing). The grid is mirrored to negative values.
    pub fn codebook(name: &str, magnitudes: &[f64]) -> Result<Self> {
        let mut mags: Vec<f64> = magnitudes.iter().map(|m| m.abs()).collect();
        if mags.iter().any(|m| !m.is_finite()) {
            return Err(MxError::UnsupportedFormat(format!(
                "{name}: codebook magnitudes must be finite"
            )));
        }
        mags.push(0.0);
        mags.sort_by(f64::total_cmp);
        mags.dedup();
        if mags.len() < 2 {
            return Err(MxError::UnsupportedFormat(format!(
                "{name}: codebook needs a nonzero magnitude"
            )));
        }
        Ok(ElementFormat {
            name: name.to_string(),
            kind: FormatKind::Codebook { magnitudes: mags },
            has_subnormals: false,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &FormatKind {
        &self.kind
    }

    pub fn has_subnormals(&self) -> bool {
        self.has_subnormals
    }

    pub fn is_float(&self) -> bool {
        matches!(self.kind, FormatKind::Float { .. })
    }

    pub fn exponent_bits(&self) -> u32 {
        match self.kind {
            FormatKind::Float { exponent_bits, .. } => exponent_bits,
            _ => 0,
        }
    }

    pub fn mantissa_bits(&self) -> u32 {
        match self.kind {
            FormatKind::Float { mantissa_bits, .. } => mantissa_bits,
            _ => 0,
        }
    }

    pub fn total_bits(&self) -> u32 {
        match &self.kind {
            FormatKind::Float {
                exponent_bits,
                mantissa_bits,
                ..
            } => 1 + exponent_bits + mantissa_bits,
            FormatKind::Int { bits } => *bits,
            FormatKind::Codebook { magnitudes } => {
                1 + (usize::BITS - (magnitudes.len() - 1).leading_zeros())
            }
        }
    }

    /// Number of valid magnitude codes; codes are `0..count`.
    pub fn magnitude_code_count(&self) -> u32 {
        match &self.kind {
            FormatKind::Float {
                exponent_bits,
                mantissa_bits,
                special,
                ..
            } => {
                let all = 1u32 << (exponent_bits + mantissa_bits);
                match special {
                    SpecialCodes::None => all,
                    SpecialCodes::NanOnly => all - 1,
                    SpecialCodes::TopExponent => all - (1 << mantissa_bits),
                }
            }
            FormatKind::Int { bits } => 1 << (bits - 1),
            FormatKind::Codebook { magnitudes } => magnitudes.len() as u32,
        }
    }

    /// Largest representable magnitude.
    pub fn max_normal(&self) -> f64 {
        self.magnitude(self.magnitude_code_count() - 1)
            .expect("top code is valid")
    }

    /// `floor(log2(max_normal))`.
    pub fn emax_elem(&self) -> i32 {
        floor_log2(self.max_normal())
    }

    /// Smallest positive representable magnitude.
    pub fn min_positive(&self) -> f64 {
        match &self.kind {
            FormatKind::Float {
                mantissa_bits,
                bias,
                ..
            } => {
                let emin = 1 - bias;
                if self.has_subnormals {
                    exp2i(emin - *mantissa_bits as i32)
                } else {
                    exp2i(emin)
                }
            }
            FormatKind::Int { .. } => 1.0,
            FormatKind::Codebook { magnitudes } => magnitudes[1],
        }
    }

    /// Decodes a magnitude code. Returns `None` for reserved or out-of-range codes.
    pub fn magnitude(&self, code: u32) -> Option<f64> {
        if code >= self.magnitude_code_count() {
            return None;
        }
        Some(match &self.kind {
            FormatKind::Float {
                mantissa_bits,
                bias,
                ..
            } => {
                let m = *mantissa_bits;
                let field = (code >> m) as i32;
                let mant = (code & ((1 << m) - 1)) as f64;
                if field == 0 {
                    mant * exp2i(1 - bias - m as i32)
                } else {
                    (exp2i(m as i32) + mant) * exp2i(field - bias - m as i32)
                }
            }
            FormatKind::Int { .. } => code as f64,
            FormatKind::Codebook { magnitudes } => magnitudes[code as usize],
        })
    }

    /// Non-negative grid values in ascending order (index = magnitude code).
    pub fn magnitudes(&self) -> Result<Vec<f64>> {
        if self.total_bits() > 16 {
            return Err(MxError::UnsupportedFormat(format!(
                "{}: grid too large to enumerate",
                self.name
            )));
        }
        Ok((0..self.magnitude_code_count())
            .map(|c| self.magnitude(c).expect("valid code"))
            .collect())
    }

    /// The full signed grid, sorted ascending, with a single zero.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let mags = self.magnitudes()?;
        let mut out: Vec<f64> = mags.iter().rev().filter(|&&m| m > 0.0).map(|m| -m).collect();
        out.extend(mags);
        Ok(out)
    }

    /// Rounds a non-negative magnitude onto the grid, saturating at `max_normal`.
    pub(crate) fn round_magnitude(&self, a: f64) -> f64 {
        debug_assert!(a >= 0.0 && !a.is_nan());
        let max = self.max_normal();
        if a >= max {
            return max;
        }
        match &self.kind {
            FormatKind::Float {
                mantissa_bits,
                bias,
                ..
            } => {
                let emin = 1 - bias;
                if a == 0.0 {
                    return 0.0;
                }
                if !self.has_subnormals && a < exp2i(emin) {
                    let min_normal = exp2i(emin);
                    return if a > min_normal / 2.0 { min_normal } else { 0.0 };
                }
                let e = floor_log2(a).max(emin);
                let quantum = exp2i(e - *mantissa_bits as i32);
                ((a / quantum).round_ties_even() * quantum).min(max)
            }
            FormatKind::Int { .. } => a.round_ties_even().min(max),
            FormatKind::Codebook { magnitudes } => {
                let hi = magnitudes.partition_point(|&m| m < a);
                if hi == 0 {
                    return magnitudes[0];
                }
                let (lo_v, hi_v) = (magnitudes[hi - 1], magnitudes[hi]);
                let (dl, dh) = (a - lo_v, hi_v - a);
                if dl < dh || (dl == dh && (hi - 1) % 2 == 0) {
                    lo_v
                } else {
                    hi_v
                }
            }
        }
    }

    /// Nearest grid value, ties to even, saturating beyond `±max_normal`.
    pub fn round_to_grid(&self, v: f64) -> Result<f64> {
        if v.is_nan() {
            return Err(MxError::InvalidInput("NaN cannot be rounded".into()));
        }
        let r = self.round_magnitude(v.abs());
        Ok(if v < 0.0 && r != 0.0 { -r } else { r })
    }

    /// Magnitude code of a value already on the non-negative grid.
    pub(crate) fn code_of_magnitude(&self, r: f64) -> u32 {
        match &self.kind {
            FormatKind::Float {
                mantissa_bits,
                bias,
                ..
            } => {
                if r == 0.0 {
                    return 0;
                }
                let m = *mantissa_bits as i32;
                let emin = 1 - bias;
                let e = floor_log2(r);
                if e < emin {
                    (r / exp2i(emin - m)) as u32
                } else {
                    let field = (e + bias) as u32;
                    let mant = (r / exp2i(e - m)) as u32 - (1 << m);
                    (field << m) | mant
                }
            }
            FormatKind::Int { .. } => r as u32,
            FormatKind::Codebook { magnitudes } => {
                magnitudes.partition_point(|&x| x < r) as u32
            }
        }
    }

    /// Rounds `v` and returns its code. Zero always encodes with a positive sign.
    pub fn encode(&self, v: f64) -> Result<ElementCode> {
        if v.is_nan() {
            return Err(MxError::InvalidInput("NaN cannot be encoded".into()));
        }
        let code = self.code_of_magnitude(self.round_magnitude(v.abs()));
        Ok(ElementCode {
            sign: v < 0.0 && code != 0,
            code,
        })
    }

    pub fn decode(&self, c: ElementCode) -> f64 {
        let m = self.magnitude(c.code).unwrap_or(0.0);
        if c.sign {
            -m
        } else {
            m
        }
    }
}

impl fmt::Display for ElementFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Rounds a positive real (a scale) onto a floating-point grid.
///
/// Nearest-even; values above `max_normal` clamp to it and values that would
/// round to zero flush to the smallest positive magnitude.
pub fn round_real_to_fp(v: f64, fmt: &ElementFormat) -> Result<f64> {
    if v.is_nan() || v <= 0.0 || v.is_infinite() {
        return Err(MxError::InvalidInput(format!(
            "scale must be positive and finite, got {v}"
        )));
    }
    let r = fmt.round_magnitude(v);
    Ok(if r == 0.0 { fmt.min_positive() } else { r })
}

/// Exact `2^n` for any `n` in the binary64 range (subnormals included).
pub(crate) fn exp2i(n: i32) -> f64 {
    if n > 1023 {
        f64::INFINITY
    } else if n >= -1022 {
        f64::from_bits(((n + 1023) as u64) << 52)
    } else if n >= -1074 {
        f64::from_bits(1u64 << (n + 1074))
    } else {
        0.0
    }
}

/// Exact `floor(log2(a))` for finite `a > 0`.
pub(crate) fn floor_log2(a: f64) -> i32 {
    debug_assert!(a > 0.0 && a.is_finite());
    let bits = a.to_bits();
    let field = ((bits >> 52) & 0x7ff) as i32;
    if field == 0 {
        let mant = bits & ((1u64 << 52) - 1);
        -1011 - mant.leading_zeros() as i32
    } else {
        field - 1023
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_formats() -> Vec<ElementFormat> {
        ELEMENT_FORMAT_NAMES
            .iter()
            .map(|n| ElementFormat::from_name(n).unwrap())
            .collect()
    }

    #[test]
    fn fp4_grid_is_exact() {
        let g = ElementFormat::fp4_e2m1().grid().unwrap();
        assert_eq!(
            g,
            vec![-6.0, -4.0, -3.0, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0]
        );
        assert_eq!(ElementFormat::fp4_e2m1().emax_elem(), 2);
    }

    #[test]
    fn int4_grid_is_symmetric() {
        let g = ElementFormat::int4().grid().unwrap();
        let want: Vec<f64> = (-7..=7).map(f64::from).collect();
        assert_eq!(g, want);
        assert_eq!(ElementFormat::int4().emax_elem(), 2);
        assert_eq!(ElementFormat::int8().max_normal(), 127.0);
    }

    #[test]
    fn standard_max_normals() {
        assert_eq!(ElementFormat::fp8_e4m3().max_normal(), 448.0);
        assert_eq!(ElementFormat::fp8_e5m2().max_normal(), 57344.0);
        assert_eq!(ElementFormat::fp6_e3m2().max_normal(), 28.0);
        assert_eq!(ElementFormat::fp6_e2m3().max_normal(), 7.5);
        assert_eq!(ElementFormat::fp16().max_normal(), 65504.0);
        assert_eq!(ElementFormat::fp32().max_normal(), f32::MAX as f64);
        assert_eq!(ElementFormat::fp8_e5m2().min_positive(), 2f64.powi(-16));
        assert_eq!(ElementFormat::fp8_e4m3().min_positive(), 2f64.powi(-9));
    }

    #[test]
    fn grid_sizes_and_shape() {
        for f in all_formats() {
            let g = f.grid().unwrap();
            assert!(g.len() <= 1 << f.total_bits());
            assert!(g.windows(2).all(|w| w[0] < w[1]), "{f} not sorted");
            assert!(g.contains(&0.0));
            assert_eq!(*g.last().unwrap(), f.max_normal());
            assert_eq!(g[0], -f.max_normal());
            assert_eq!(f.emax_elem(), f.max_normal().log2().floor() as i32);
        }
        assert_eq!(ElementFormat::fp8_e4m3().grid().unwrap().len(), 253);
        assert_eq!(ElementFormat::fp8_e5m2().grid().unwrap().len(), 247);
    }

    #[test]
    fn e5m2_neighbourhood() {
        let g = ElementFormat::fp8_e5m2().grid().unwrap();
        let hi = g.partition_point(|&x| x < 0.8167);
        assert_eq!((g[hi - 1], g[hi]), (0.75, 0.875));
    }

    #[test]
    fn fp4_rounding_examples() {
        let f = ElementFormat::fp4_e2m1();
        assert_eq!(f.round_to_grid(1.225).unwrap(), 1.0);
        assert_eq!(f.round_to_grid(7.0).unwrap(), 6.0);
        assert_eq!(f.round_to_grid(-7.0).unwrap(), -6.0);
        assert_eq!(f.round_to_grid(3.5).unwrap(), 4.0);
        assert_eq!(f.round_to_grid(2.5).unwrap(), 2.0);
        assert_eq!(f.round_to_grid(0.75).unwrap(), 1.0);
        assert_eq!(f.round_to_grid(0.25).unwrap(), 0.0);
        assert_eq!(f.round_to_grid(-0.2).unwrap().to_bits(), 0.0f64.to_bits());
        assert!(f.round_to_grid(f64::NAN).is_err());
    }

    #[test]
    fn int_rounding_ties_even() {
        let f = ElementFormat::int4();
        assert_eq!(f.round_to_grid(2.5).unwrap(), 2.0);
        assert_eq!(f.round_to_grid(3.5).unwrap(), 4.0);
        assert_eq!(f.round_to_grid(-9.0).unwrap(), -7.0);
    }

    #[test]
    fn scale_rounding_examples() {
        let e5m2 = ElementFormat::fp8_e5m2();
        let e4m3 = ElementFormat::fp8_e4m3();
        assert_eq!(round_real_to_fp(31.0 / 6.0, &e5m2).unwrap(), 5.0);
        assert_eq!(round_real_to_fp(4.9 / 6.0, &e5m2).unwrap(), 0.875);
        assert_eq!(round_real_to_fp(1.0, &e4m3).unwrap(), 1.0);
        assert_eq!(round_real_to_fp(1e9, &e4m3).unwrap(), 448.0);
        assert_eq!(round_real_to_fp(1e-30, &e4m3).unwrap(), 2f64.powi(-9));
        assert!(round_real_to_fp(0.0, &e4m3).is_err());
        assert!(round_real_to_fp(-1.0, &e4m3).is_err());
        let x = 0.1f64;
        assert_eq!(round_real_to_fp(x, &ElementFormat::fp32()).unwrap(), x as f32 as f64);
    }

    #[test]
    fn encode_decode_covers_every_code() {
        for f in all_formats() {
            for code in 0..f.magnitude_code_count() {
                let m = f.magnitude(code).unwrap();
                let c = f.encode(m).unwrap();
                assert_eq!(c, ElementCode { sign: false, code }, "{f} code {code}");
                if m > 0.0 {
                    let n = f.encode(-m).unwrap();
                    assert_eq!(f.decode(n), -m);
                }
            }
        }
    }

    #[test]
    fn fp4_bit_patterns() {
        let f = ElementFormat::fp4_e2m1();
        assert_eq!(f.encode(6.0).unwrap().code, 0b111);
        assert_eq!(f.encode(0.5).unwrap().code, 0b001);
        assert_eq!(f.encode(1.0).unwrap().code, 0b010);
        assert_eq!(f.encode(-3.0).unwrap(), ElementCode { sign: true, code: 0b101 });
    }

    #[test]
    fn codebook_rounding() {
        let f = ElementFormat::codebook("cb", &[1.0, 0.25, 3.0]).unwrap();
        assert_eq!(f.grid().unwrap(), vec![-3.0, -1.0, -0.25, 0.0, 0.25, 1.0, 3.0]);
        assert_eq!(f.round_to_grid(2.5).unwrap(), 3.0);
        assert_eq!(f.round_to_grid(-0.6).unwrap(), -0.25);
        assert_eq!(f.round_to_grid(10.0).unwrap(), 3.0);
        // midpoint of codes 1 and 2 goes to the even index
        assert_eq!(f.round_to_grid(0.625).unwrap(), 1.0);
    }

    #[test]
    fn unsupported_formats_are_rejected() {
        assert!(ElementFormat::from_exponent_mantissa(3, 3).is_err());
        assert!(ElementFormat::from_name("nf4").is_err());
        assert!(ElementFormat::fp32().grid().is_err());
    }

    #[test]
    fn floor_log2_is_exact() {
        assert_eq!(floor_log2(1.0), 0);
        assert_eq!(floor_log2(0.999_999_999_999_999_9), -1);
        assert_eq!(floor_log2(31.0), 4);
        assert_eq!(floor_log2(f64::MIN_POSITIVE), -1022);
        assert_eq!(floor_log2(5e-324), -1074);
        assert_eq!(exp2i(-1074), 5e-324);
        assert_eq!(exp2i(3), 8.0);
    }
}
