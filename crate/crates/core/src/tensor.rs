//! Dense row-major tensors and the group layout used by every group-wise
//! operation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MxError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(MxError::Shape(format!("invalid shape {shape:?}")));
        }
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(MxError::Shape(format!(
                "shape {shape:?} needs {n} elements, got {}",
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        let n = data.len().max(1);
        let mut data = data;
        data.resize(n, 0.0);
        Tensor {
            shape: vec![n],
            data,
        }
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let n = shape.iter().product();
        Tensor::new(shape, vec![0.0; n])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Resolves a possibly negative axis index.
    pub fn normalize_axis(&self, axis: isize) -> Result<usize> {
        normalize_axis(self.ndim(), axis)
    }

    /// Distinct values in ascending order; `-0.0` counts as `0.0`.
    pub fn unique(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.data.iter().map(|&x| x + 0.0).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> Result<f64> {
        if self.shape != other.shape {
            return Err(MxError::Shape(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

pub(crate) fn normalize_axis(ndim: usize, axis: isize) -> Result<usize> {
    let a = if axis < 0 { axis + ndim as isize } else { axis };
    if a < 0 || a >= ndim as isize {
        return Err(MxError::Config(format!(
            "axis {axis} out of range for {ndim}-d tensor"
        )));
    }
    Ok(a as usize)
}

/// Number of consecutive elements along the quantization axis that share a
/// scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupSize {
    /// The whole extent of the axis.
    Row,
    Fixed(usize),
}

impl GroupSize {
    /// Accepts `row` or a positive power of two.
    pub fn fixed(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(MxError::Config(format!(
                "group size {n} is not a positive power of two"
            )));
        }
        Ok(GroupSize::Fixed(n))
    }

    pub fn resolve(self, extent: usize) -> usize {
        match self {
            GroupSize::Row => extent,
            GroupSize::Fixed(n) => n,
        }
    }
}

impl fmt::Display for GroupSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSize::Row => f.write_str("row"),
            GroupSize::Fixed(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for GroupSize {
    type Err = MxError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row" | "-1" => Ok(GroupSize::Row),
            _ => {
                let n: usize = s
                    .parse()
                    .map_err(|_| MxError::Config(format!("invalid group size {s:?}")))?;
                GroupSize::fixed(n)
            }
        }
    }
}

/// Partition of a tensor into quantization groups.
///
/// Lanes run along `axis` and are enumerated in row-major order of the
/// remaining dimensions; each lane is cut into consecutive groups. Group `g`
/// is chunk `g % groups_per_lane` of lane `g / groups_per_lane`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupLayout {
    outer: usize,
    extent: usize,
    inner: usize,
    group_len: usize,
    groups_per_lane: usize,
}

impl GroupLayout {
    pub fn new(shape: &[usize], axis: isize, group: GroupSize) -> Result<Self> {
        let a = normalize_axis(shape.len(), axis)?;
        let extent = shape[a];
        let group_len = group.resolve(extent);
        if group_len == 0 || !extent.is_multiple_of(group_len) {
            return Err(MxError::Divisibility {
                axis,
                extent,
                group_size: group_len,
            });
        }
        Ok(GroupLayout {
            outer: shape[..a].iter().product(),
            extent,
            inner: shape[a + 1..].iter().product(),
            group_len,
            groups_per_lane: extent / group_len,
        })
    }

    pub fn num_groups(&self) -> usize {
        self.outer * self.inner * self.groups_per_lane
    }

    pub fn group_len(&self) -> usize {
        self.group_len
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn num_lanes(&self) -> usize {
        self.outer * self.inner
    }

    /// Flat index of position `k` along the axis in lane `lane`.
    #[inline]
    pub fn lane_index(&self, lane: usize, k: usize) -> usize {
        let (o, i) = (lane / self.inner, lane % self.inner);
        o * self.extent * self.inner + k * self.inner + i
    }

    /// Flat element indices of group `g`, in order along the axis.
    pub fn group_indices(&self, g: usize) -> impl Iterator<Item = usize> + '_ {
        let lane = g / self.groups_per_lane;
        let start = (g % self.groups_per_lane) * self.group_len;
        (start..start + self.group_len).map(move |k| self.lane_index(lane, k))
    }

    /// Group index of every flat element.
    pub fn group_of_elements(&self) -> Vec<usize> {
        let mut out = vec![0; self.num_groups() * self.group_len];
        for g in 0..self.num_groups() {
            for idx in self.group_indices(g) {
                out[idx] = g;
            }
        }
        out
    }

    pub fn gather(&self, data: &[f64], g: usize) -> Vec<f64> {
        self.group_indices(g).map(|i| data[i]).collect()
    }
}
