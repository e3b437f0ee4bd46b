//! Group statistics and quantization error.
//!
//! Kurtosis is the Pearson (non-excess) fourth standardized moment with the
//! population variance. Error decomposition splits the squared quantization
//! error into the part contributed by saturated elements (clamp) and the rest
//! (rounding).

use serde::{Deserialize, Serialize};

use crate::error::{MxError, Result};
use crate::quantizer::{quantize_tracked, QuantConfig};
use crate::tensor::{GroupLayout, GroupSize, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub group_index: usize,
    pub mean: f64,
    /// `None` for zero-variance groups.
    pub kurtosis: Option<f64>,
}

/// Mean and Pearson kurtosis of one group of values.
pub fn moments(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let constant = values.iter().all(|&v| v == values[0]);
    if constant {
        return (mean, None);
    }
    let (m2, m4) = values.iter().fold((0.0, 0.0), |(m2, m4), &v| {
        let d2 = (v - mean) * (v - mean);
        (m2 + d2, m4 + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    (mean, Some(m4 / (m2 * m2)))
}

pub fn group_stats(x: &Tensor, group_size: GroupSize, axis: isize) -> Result<Vec<GroupStats>> {
    let layout = GroupLayout::new(x.shape(), axis, group_size)?;
    Ok((0..layout.num_groups())
        .map(|g| {
            let (mean, kurtosis) = moments(&layout.gather(x.data(), g));
            GroupStats {
                group_index: g,
                mean,
                kurtosis,
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    /// Quantiles by linear interpolation between order statistics.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(FiveNumber {
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub groups: usize,
    pub mean: FiveNumber,
    pub kurtosis: FiveNumber,
    /// Groups left out of the kurtosis summary because their variance is 0.
    pub undefined_kurtosis: usize,
}

pub fn stats_summary(stats: &[GroupStats]) -> Result<StatsSummary> {
    let kurt: Vec<f64> = stats.iter().filter_map(|s| s.kurtosis).collect();
    let undefined = stats.len() - kurt.len();
    let kurtosis = FiveNumber::from_values(&kurt).ok_or(MxError::EmptySummary { undefined })?;
    let means: Vec<f64> = stats.iter().map(|s| s.mean).collect();
    Ok(StatsSummary {
        groups: stats.len(),
        mean: FiveNumber::from_values(&means).expect("nonempty"),
        kurtosis,
        undefined_kurtosis: undefined,
    })
}

/// Mean squared difference.
pub fn mse(x: &Tensor, y: &Tensor) -> Result<f64> {
    if x.shape() != y.shape() {
        return Err(MxError::Shape(format!("{:?} vs {:?}", x.shape(), y.shape())));
    }
    let sse = x
        .data()
        .iter()
        .zip(y.data())
        .fold(0.0, |acc, (a, b)| acc + (a - b) * (a - b));
    Ok(sse / x.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupError {
    pub group: usize,
    pub clamp_sq_error: f64,
    pub round_sq_error: f64,
    pub clamped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub format: String,
    pub scale_mode: String,
    pub group_size: String,
    pub element_count: usize,
    pub mse: f64,
    pub clamp_sq_error: f64,
    pub round_sq_error: f64,
    pub clamped_count: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub per_group: Vec<GroupError>,
}

impl ErrorReport {
    /// Total squared error, `clamp_sq_error + round_sq_error`.
    pub fn total_sq_error(&self) -> f64 {
        self.clamp_sq_error + self.round_sq_error
    }
}

/// Quantizes `x` and splits the squared error into clamp and rounding parts.
///
/// Each group's parts are summed in element order along the group; totals sum
/// the groups in index order, and `mse = (clamp + round) / element_count`.
pub fn error_decomposition(x: &Tensor, cfg: &QuantConfig) -> Result<ErrorReport> {
    let q = quantize_tracked(x, cfg)?;
    let y = q.tensor.dequantize();
    let layout = q.tensor.layout();
    let mut per_group = Vec::with_capacity(layout.num_groups());
    let (mut clamp_total, mut round_total, mut clamped_total) = (0.0, 0.0, 0);
    for g in 0..layout.num_groups() {
        let mut e = GroupError {
            group: g,
            clamp_sq_error: 0.0,
            round_sq_error: 0.0,
            clamped: 0,
        };
        for idx in layout.group_indices(g) {
            let d = x.data()[idx] - y.data()[idx];
            if q.clamped[idx] {
                e.clamp_sq_error += d * d;
                e.clamped += 1;
            } else {
                e.round_sq_error += d * d;
            }
        }
        clamp_total += e.clamp_sq_error;
        round_total += e.round_sq_error;
        clamped_total += e.clamped;
        per_group.push(e);
    }
    Ok(ErrorReport {
        format: cfg.format_name(),
        scale_mode: cfg.scale_mode.name().to_string(),
        group_size: cfg.group_size.to_string(),
        element_count: x.len(),
        mse: (clamp_total + round_total) / x.len() as f64,
        clamp_sq_error: clamp_total,
        round_sq_error: round_total,
        clamped_count: clamped_total,
        per_group,
    })
}

/// Min-max normalization onto `[0, 1]`; a constant input maps to all zeros.
pub fn normalize_min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    values
        .iter()
        .map(|&v| if span > 0.0 { (v - lo) / span } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal_vec, seeded};
    use crate::scaling::ScaleMode;

    #[test]
    fn alternating_signs_have_unit_kurtosis() {
        let (mean, k) = moments(&[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(mean, 0.0);
        assert_eq!(k, Some(1.0));
    }

    #[test]
    fn constant_group_is_undefined() {
        assert_eq!(moments(&[0.1; 8]).1, None);
    }

    #[test]
    fn gaussian_kurtosis_near_three() {
        let mut rng = seeded(2024);
        let v = normal_vec(&mut rng, 1_000_000);
        let (_, k) = moments(&v);
        assert!((k.unwrap() - 3.0).abs() < 0.05, "{k:?}");
    }

    #[test]
    fn summary_of_means() {
        let stats: Vec<GroupStats> = (1..=5)
            .map(|i| GroupStats {
                group_index: i,
                mean: i as f64,
                kurtosis: Some(2.0),
            })
            .collect();
        let s = stats_summary(&stats).unwrap();
        assert_eq!(
            s.mean,
            FiveNumber { min: 1.0, q1: 2.0, median: 3.0, q3: 4.0, max: 5.0 }
        );
    }

    #[test]
    fn summary_single_and_undefined() {
        let one = [GroupStats { group_index: 0, mean: 0.5, kurtosis: Some(1.5) }];
        let s = stats_summary(&one).unwrap();
        assert_eq!(s.kurtosis.min, s.kurtosis.max);
        assert_eq!(s.mean.q1, 0.5);

        let undefined = [GroupStats { group_index: 0, mean: 1.0, kurtosis: None }];
        assert!(matches!(
            stats_summary(&undefined),
            Err(MxError::EmptySummary { undefined: 1 })
        ));

        let mixed = [one[0], undefined[0]];
        assert_eq!(stats_summary(&mixed).unwrap().undefined_kurtosis, 1);
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile_sorted(&[0.0, 10.0], 0.25), 2.5);
    }

    #[test]
    fn mse_examples() {
        let x = Tensor::from_vec(vec![0.0, 2.0]);
        let y = Tensor::from_vec(vec![0.0, 0.0]);
        assert_eq!(mse(&x, &x).unwrap(), 0.0);
        assert_eq!(mse(&x, &y).unwrap(), 2.0);
        assert!(mse(&x, &Tensor::from_vec(vec![1.0])).is_err());
    }

    #[test]
    fn clamp_error_of_seven() {
        let x = Tensor::from_vec(vec![0.0, 7.0]);
        let r = error_decomposition(&x, &QuantConfig::mxfp4(GroupSize::Row)).unwrap();
        assert_eq!(r.clamp_sq_error, 1.0);
        assert_eq!(r.round_sq_error, 0.0);
        assert_eq!(r.clamped_count, 1);
    }

    #[test]
    fn pot_round_removes_clamping() {
        let x = Tensor::from_vec(vec![0.0, 7.9]);
        let floor = error_decomposition(&x, &QuantConfig::mxfp4(GroupSize::Row)).unwrap();
        let cfg = QuantConfig { scale_mode: ScaleMode::PotRound, ..QuantConfig::mxfp4(GroupSize::Row) };
        let round = error_decomposition(&x, &cfg).unwrap();
        assert!((floor.clamp_sq_error - 3.61).abs() < 1e-12);
        assert_eq!(round.clamp_sq_error, 0.0);
    }

    #[test]
    fn on_grid_has_no_error() {
        let x = Tensor::from_vec(vec![-6.0, -0.5, 0.0, 1.5, 3.0, 4.0]);
        let r = error_decomposition(&x, &QuantConfig::mxfp4(GroupSize::Row)).unwrap();
        assert_eq!((r.clamp_sq_error, r.round_sq_error), (0.0, 0.0));
    }

    #[test]
    fn normalization_range() {
        assert_eq!(normalize_min_max(&[2.0, 4.0, 3.0]), vec![0.0, 1.0, 0.5]);
        assert_eq!(normalize_min_max(&[1.0, 1.0]), vec![0.0, 0.0]);
    }
}
