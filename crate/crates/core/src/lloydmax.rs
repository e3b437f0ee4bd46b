//! Cluster-wise Lloyd-Max reference quantizer.
//!
//! Groups are clustered by their (min-max normalized) mean and kurtosis; one
//! scalar codebook is then fitted per cluster on the pooled raw values of its
//! groups with Lloyd's alternation of nearest-level assignment and centroid
//! update. The result is a near-optimal MSE baseline for the grid formats.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{group_stats, normalize_min_max, quantile_sorted, ErrorReport, GroupError, GroupStats};
use crate::error::{MxError, Result};
use crate::quantizer::{quantize_dequantize, QuantConfig};
use crate::rng::seeded;
use crate::tensor::{GroupLayout, GroupSize, Tensor};

const KMEANS_ITERS: usize = 50;
const KMEANS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LloydConfig {
    pub n_clusters: usize,
    pub n_iters: usize,
    pub n_levels: usize,
    pub seed: u64,
}

impl Default for LloydConfig {
    fn default() -> Self {
        LloydConfig {
            n_clusters: 16,
            n_iters: 100,
            n_levels: 16,
            seed: 0,
        }
    }
}

impl LloydConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_levels < 2 {
            return Err(MxError::Config("n_levels must be at least 2".into()));
        }
        if self.n_clusters < 1 {
            return Err(MxError::Config("n_clusters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    /// Strictly increasing reconstruction levels.
    pub levels: Vec<f64>,
    /// Midpoints between consecutive levels.
    pub boundaries: Vec<f64>,
}

impl Codebook {
    /// Sorts and deduplicates `levels`.
    pub fn new(levels: &[f64]) -> Result<Self> {
        let mut levels: Vec<f64> = levels.to_vec();
        if levels.is_empty() || levels.iter().any(|v| !v.is_finite()) {
            return Err(MxError::InvalidInput(
                "codebook levels must be finite and nonempty".into(),
            ));
        }
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let boundaries = levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Codebook { levels, boundaries })
    }

    /// Levels at the `(i + 0.5) / n` quantiles of `values`, or every distinct
    /// value when there are at most `n_levels` of them.
    pub fn quantile_init(values: &[f64], n_levels: usize) -> Result<Self> {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut distinct = sorted.clone();
        distinct.dedup();
        if distinct.len() <= n_levels {
            return Codebook::new(&distinct);
        }
        let levels: Vec<f64> = (0..n_levels)
            .map(|i| quantile_sorted(&sorted, (i as f64 + 0.5) / n_levels as f64))
            .collect();
        Codebook::new(&levels)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Index of the nearest level; a value on a boundary goes to the upper level.
    pub fn index_of(&self, v: f64) -> usize {
        self.boundaries.partition_point(|&b| b <= v)
    }

    pub fn quantize(&self, v: f64) -> f64 {
        self.levels[self.index_of(v)]
    }
}

fn sse_sorted(sorted: &[f64], cb: &Codebook) -> f64 {
    sorted.iter().fold(0.0, |acc, &v| {
        let d = v - cb.quantize(v);
        acc + d * d
    })
}

/// Runs Lloyd iterations from `init`.
///
/// `mse_trace[0]` is the MSE of `init` (after clamping it into the value
/// range) and `mse_trace[t]` the MSE after iteration `t`. Empty cells keep
/// their level; an update that would raise the MSE is rejected, which ends
/// the run at a fixed point.
pub fn lloyd_fit(values: &[f64], cfg: &LloydConfig, init: &Codebook) -> Result<(Codebook, Vec<f64>)> {
    if values.is_empty() {
        return Err(MxError::InvalidInput("lloyd_fit needs values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let n = sorted.len() as f64;

    let clamped: Vec<f64> = init.levels.iter().map(|l| l.clamp(lo, hi)).collect();
    let mut cb = Codebook::new(&clamped)?;
    let mut sse = sse_sorted(&sorted, &cb);
    let mut trace = Vec::with_capacity(cfg.n_iters + 1);
    trace.push(sse / n);

    for _ in 0..cfg.n_iters {
        let mut levels = cb.levels.clone();
        let mut start = 0;
        for (i, level) in levels.iter_mut().enumerate() {
            let end = match cb.boundaries.get(i) {
                Some(&b) => sorted.partition_point(|&v| v < b),
                None => sorted.len(),
            };
            if end > start {
                let cell = &sorted[start..end];
                *level = cell.iter().sum::<f64>() / cell.len() as f64;
            }
            start = end;
        }
        let next = Codebook::new(&levels)?;
        let next_sse = sse_sorted(&sorted, &next);
        if next_sse <= sse {
            cb = next;
            sse = next_sse;
        }
        trace.push(sse / n);
    }
    Ok((cb, trace))
}

/// k-means over normalized `(mean, kurtosis)` features.
///
/// Returns one cluster id per group. Groups with undefined kurtosis share the
/// extra cluster id `cfg.n_clusters`.
pub fn cluster_groups(stats: &[GroupStats], cfg: &LloydConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    let defined: Vec<usize> = (0..stats.len())
        .filter(|&i| stats[i].kurtosis.is_some())
        .collect();
    let mut labels = vec![cfg.n_clusters; stats.len()];
    if defined.is_empty() {
        return Ok(labels);
    }
    let means = normalize_min_max(&defined.iter().map(|&i| stats[i].mean).collect::<Vec<_>>());
    let kurts = normalize_min_max(
        &defined
            .iter()
            .map(|&i| stats[i].kurtosis.expect("defined"))
            .collect::<Vec<_>>(),
    );
    let points: Vec<[f64; 2]> = means.into_iter().zip(kurts).map(|(m, k)| [m, k]).collect();
    let assignment = kmeans(&points, cfg.n_clusters, cfg.seed);
    for (&g, c) in defined.iter().zip(assignment) {
        labels[g] = c;
    }
    Ok(labels)
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn nearest(p: &[f64; 2], centroids: &[[f64; 2]]) -> usize {
    let mut best = 0;
    for (c, centroid) in centroids.iter().enumerate().skip(1) {
        if dist2(p, centroid) < dist2(p, &centroids[best]) {
            best = c;
        }
    }
    best
}

/// Seeded k-means++ followed by Lloyd iterations; ties go to the lower index.
fn kmeans(points: &[[f64; 2]], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeded(seed);
    let mut centroids = vec![points[rng.gen_range(0..points.len())]];
    while centroids.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| dist2(p, &centroids[nearest(p, &centroids)]))
            .collect();
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut idx = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if r < w {
                    idx = i;
                    break;
                }
                r -= w;
            }
            idx
        } else {
            rng.gen_range(0..points.len())
        };
        centroids.push(points[pick]);
    }

    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    for _ in 0..KMEANS_ITERS {
        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            sums[l][0] += p[0];
            sums[l][1] += p[1];
            counts[l] += 1;
        }
        let mut moved = 0.0f64;
        for c in 0..k {
            if counts[c] > 0 {
                let next = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
                moved = moved.max(dist2(&next, &centroids[c]).sqrt());
                centroids[c] = next;
            }
        }
        labels = points.iter().map(|p| nearest(p, &centroids)).collect();
        if moved < KMEANS_TOL {
            break;
        }
    }
    labels
}

/// How each cluster's codebook is initialized.
#[derive(Clone, Debug, PartialEq)]
pub enum LloydInit {
    /// `n_levels` quantiles of the cluster's values.
    Quantile,
    /// Every distinct value the given format produces on the cluster's
    /// elements; the fit can then only improve on that format's MSE.
    FormatGrid(QuantConfig),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceResult {
    pub tensor: Tensor,
    pub report: ErrorReport,
    /// Cluster id of every group.
    pub assignment: Vec<usize>,
    /// Fitted codebook per cluster id (`None` for empty clusters).
    pub codebooks: Vec<Option<Codebook>>,
}

/// Cluster groups, fit a codebook per cluster and map every value to it.
pub fn reference_quantize(
    x: &Tensor,
    group_size: GroupSize,
    axis: isize,
    cfg: &LloydConfig,
    init: &LloydInit,
) -> Result<ReferenceResult> {
    cfg.validate()?;
    let layout = GroupLayout::new(x.shape(), axis, group_size)?;
    if let Some(index) = x.data().iter().position(|v| !v.is_finite()) {
        return Err(MxError::NanInput { index });
    }
    let stats = group_stats(x, group_size, axis)?;
    let assignment = cluster_groups(&stats, cfg)?;
    let grid_values = match init {
        LloydInit::Quantile => None,
        LloydInit::FormatGrid(qcfg) => Some(quantize_dequantize(x, qcfg)?),
    };

    let n_ids = cfg.n_clusters + 1;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_ids];
    for (g, &c) in assignment.iter().enumerate() {
        members[c].extend(layout.group_indices(g));
    }

    let mut out = vec![0.0; x.len()];
    let mut codebooks = vec![None; n_ids];
    for (c, idxs) in members.iter().enumerate() {
        if idxs.is_empty() {
            continue;
        }
        let values: Vec<f64> = idxs.iter().map(|&i| x.data()[i]).collect();
        let start = match &grid_values {
            None => Codebook::quantile_init(&values, cfg.n_levels)?,
            Some(y) => Codebook::new(&idxs.iter().map(|&i| y.data()[i]).collect::<Vec<_>>())?,
        };
        let (cb, _) = lloyd_fit(&values, cfg, &start)?;
        for &i in idxs {
            out[i] = cb.quantize(x.data()[i]);
        }
        codebooks[c] = Some(cb);
    }

    let tensor = Tensor::new(x.shape().to_vec(), out)?;
    let mut per_group = Vec::with_capacity(layout.num_groups());
    let mut total = 0.0;
    for g in 0..layout.num_groups() {
        let sq = layout.group_indices(g).fold(0.0, |acc, i| {
            let d = x.data()[i] - tensor.data()[i];
            acc + d * d
        });
        total += sq;
        per_group.push(GroupError {
            group: g,
            clamp_sq_error: 0.0,
            round_sq_error: sq,
            clamped: 0,
        });
    }
    let report = ErrorReport {
        format: "lloyd_max".into(),
        scale_mode: "none".into(),
        group_size: group_size.to_string(),
        element_count: x.len(),
        mse: total / x.len() as f64,
        clamp_sq_error: 0.0,
        round_sq_error: total,
        clamped_count: 0,
        per_group,
    };
    Ok(ReferenceResult {
        tensor,
        report,
        assignment,
        codebooks,
    })
}
