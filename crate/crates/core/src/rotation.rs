//! Randomized Hadamard rotation `R = H·D / sqrt(n)`.
//!
//! `H` is the Sylvester-ordered Hadamard matrix and `D` a seeded ±1 diagonal.
//! Rotations are applied with an in-place fast Walsh–Hadamard transform.

use crate::error::{MxError, Result};
use crate::rng::{random_sign, seeded};
use crate::tensor::{GroupLayout, GroupSize, Tensor};

#[derive(Clone, Debug, PartialEq)]
pub struct RotationSpec {
    pub dim: usize,
    pub seed: u64,
    /// Diagonal of `D`, each entry `+1.0` or `-1.0`.
    pub signs: Vec<f64>,
}

pub fn make_rotation(dim: usize, seed: u64) -> Result<RotationSpec> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(MxError::UnsupportedDimension(dim));
    }
    let mut rng = seeded(seed);
    let signs = (0..dim).map(|_| random_sign(&mut rng)).collect();
    Ok(RotationSpec { dim, seed, signs })
}

/// Sylvester construction `H_2n = [[H, H], [H, -H]]`, unnormalized.
pub fn hadamard(dim: usize) -> Result<Vec<Vec<f64>>> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(MxError::UnsupportedDimension(dim));
    }
    let mut h = vec![vec![1.0]];
    while h.len() < dim {
        let n = h.len();
        let mut next = vec![vec![0.0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = h[i][j];
                next[i][j + n] = h[i][j];
                next[i + n][j] = h[i][j];
                next[i + n][j + n] = -h[i][j];
            }
        }
        h = next;
    }
    Ok(h)
}

impl RotationSpec {
    /// Dense `R`, row-major.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let h = hadamard(self.dim).expect("validated dim");
        let norm = (self.dim as f64).sqrt();
        h.iter()
            .map(|row| {
                row.iter()
                    .zip(&self.signs)
                    .map(|(hij, dj)| hij * dj / norm)
                    .collect()
            })
            .collect()
    }

    /// `y = R x` for a single vector.
    pub fn apply(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (v, d) in x.iter_mut().zip(&self.signs) {
            *v *= d;
        }
        fwht(x);
        let norm = (self.dim as f64).sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    }

    /// `y = Rᵀ x` for a single vector.
    pub fn apply_transpose(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        fwht(x);
        let norm = (self.dim as f64).sqrt();
        for (v, d) in x.iter_mut().zip(&self.signs) {
            *v = *v / norm * d;
        }
    }
}

/// In-place unnormalized Walsh–Hadamard transform (Sylvester order).
pub fn fwht(x: &mut [f64]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (x[i], x[i + h]);
                x[i] = a + b;
                x[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn rotate_lanes(x: &Tensor, spec: &RotationSpec, axis: isize, transpose: bool) -> Result<Tensor> {
    let a = x.normalize_axis(axis)?;
    if x.shape()[a] != spec.dim {
        return Err(MxError::Shape(format!(
            "axis {axis} has extent {}, rotation dim is {}",
            x.shape()[a],
            spec.dim
        )));
    }
    let layout = GroupLayout::new(x.shape(), axis, GroupSize::Row)?;
    let mut out = x.clone();
    let data = out.data_mut();
    let mut lane = vec![0.0; spec.dim];
    for l in 0..layout.num_lanes() {
        for (k, v) in lane.iter_mut().enumerate() {
            *v = data[layout.lane_index(l, k)];
        }
        if transpose {
            spec.apply_transpose(&mut lane);
        } else {
            spec.apply(&mut lane);
        }
        for (k, v) in lane.iter().enumerate() {
            data[layout.lane_index(l, k)] = *v;
        }
    }
    Ok(out)
}

/// Applies `R` to every lane along `axis`.
pub fn rotate(x: &Tensor, spec: &RotationSpec, axis: isize) -> Result<Tensor> {
    rotate_lanes(x, spec, axis, false)
}

/// Applies `Rᵀ`, undoing [`rotate`].
pub fn rotate_transpose(x: &Tensor, spec: &RotationSpec, axis: isize) -> Result<Tensor> {
    rotate_lanes(x, spec, axis, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_dev_from_identity(r: &[Vec<f64>]) -> f64 {
        let n = r.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| r[i][k] * r[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(make_rotation(12, 0), Err(MxError::UnsupportedDimension(12))));
        assert!(make_rotation(0, 0).is_err());
    }

    #[test]
    fn dim_one_is_a_sign() {
        let r = make_rotation(1, 3).unwrap();
        let mut x = [2.5];
        r.apply(&mut x);
        assert_eq!(x[0].abs(), 2.5);
    }

    #[test]
    fn dim_two_base_case() {
        let seed = (0..1000u64)
            .find(|&s| make_rotation(2, s).unwrap().signs == vec![1.0, 1.0])
            .expect("some seed gives +1,+1");
        let r = make_rotation(2, seed).unwrap();
        let m = r.matrix();
        let c = 1.0 / 2f64.sqrt();
        assert_eq!(m, vec![vec![c, c], vec![c, -c]]);
        let mut x = [1.0, 0.0];
        r.apply(&mut x);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((x[0] - h).abs() < 1e-12 && (x[1] - h).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_dim_64() {
        let r = make_rotation(64, 42).unwrap();
        assert!(max_dev_from_identity(&r.matrix()) < 1e-10);
    }

    #[test]
    fn fast_transform_matches_dense_matrix() {
        let r = make_rotation(16, 9).unwrap();
        let m = r.matrix();
        let x: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut y = x.clone();
        r.apply(&mut y);
        for i in 0..16 {
            let want: f64 = (0..16).map(|k| m[i][k] * x[k]).sum();
            assert!((y[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(make_rotation(32, 5).unwrap(), make_rotation(32, 5).unwrap());
        assert_ne!(make_rotation(32, 5).unwrap().signs, make_rotation(32, 6).unwrap().signs);
    }

    #[test]
    fn spike_becomes_flat() {
        let mut data = vec![0.0; 64];
        data[17] = 8.0;
        let x = Tensor::from_vec(data);
        let r = make_rotation(64, 1).unwrap();
        let y = rotate(&x, &r, -1).unwrap();
        assert!(y.data().iter().all(|v| v.abs() == 1.0));
    }

    #[test]
    fn rotation_along_first_axis_round_trips() {
        let x = Tensor::new(vec![8, 3], (0..24).map(|i| i as f64 - 7.5).collect()).unwrap();
        let r = make_rotation(8, 11).unwrap();
        let y = rotate(&x, &r, 0).unwrap();
        let back = rotate_transpose(&y, &r, 0).unwrap();
        assert!(back.max_abs_diff(&x).unwrap() < 1e-12);
        assert!(rotate(&x, &r, 1).is_err());
    }
}
