//! Seeded synthetic tensors used by the examples, tests and CLI demos.

use rand::Rng;

use crate::rng::{normal_vec, random_sign, seeded};
use crate::tensor::Tensor;

/// 1024 evenly spaced points from -4.9 to 31, a single row with a long
/// positive tail.
pub fn snippet() -> Tensor {
    linspace(-4.9, 31.0, 1024)
}

pub fn linspace(start: f64, end: f64, n: usize) -> Tensor {
    let step = if n > 1 { (end - start) / (n - 1) as f64 } else { 0.0 };
    Tensor::from_vec((0..n).map(|i| start + step * i as f64).collect())
}

/// `rows x cols` Gaussian data whose groups of `group_len` consecutive
/// elements along the last axis each get an offset of `+sigma` or `-sigma`.
pub fn shifted_gaussian(rows: usize, cols: usize, group_len: usize, sigma: f64, seed: u64) -> Tensor {
    offset_gaussian(rows, cols, group_len, sigma, sigma, seed)
}

/// Like [`shifted_gaussian`] with the offset magnitude `shift` chosen
/// independently of the spread. The random draws depend only on `seed`.
pub fn offset_gaussian(rows: usize, cols: usize, group_len: usize, sigma: f64, shift: f64, seed: u64) -> Tensor {
    assert!(group_len > 0 && cols.is_multiple_of(group_len), "cols must be a multiple of group_len");
    let mut rng = seeded(seed);
    let mut data = normal_vec(&mut rng, rows * cols);
    for chunk in data.chunks_mut(group_len) {
        let offset = random_sign(&mut rng) * shift;
        chunk.iter_mut().for_each(|v| *v = *v * sigma + offset);
    }
    Tensor::new(vec![rows, cols], data).expect("shape matches")
}

/// Unit Gaussian noise with `spikes_per_row` entries per row replaced by
/// `±magnitude` at random positions, mimicking activation outlier channels.
pub fn spike_plus_noise(rows: usize, cols: usize, spikes_per_row: usize, magnitude: f64, seed: u64) -> Tensor {
    let mut rng = seeded(seed);
    let mut data = normal_vec(&mut rng, rows * cols);
    for row in data.chunks_mut(cols) {
        for _ in 0..spikes_per_row {
            let j = rng.gen_range(0..cols);
            row[j] = random_sign(&mut rng) * magnitude;
        }
    }
    Tensor::new(vec![rows, cols], data).expect("shape matches")
}

/// Gaussian data with a random overall magnitude in `[2^-10, 2^10]` and a
/// sprinkling of exact zeros and heavy outliers.
pub fn random_tensor(shape: &[usize], seed: u64) -> Tensor {
    let mut rng = seeded(seed);
    let n: usize = shape.iter().product();
    let scale = 2f64.powf(rng.gen_range(-10.0..10.0));
    let mut data = normal_vec(&mut rng, n);
    for v in data.iter_mut() {
        let u: f64 = rng.gen();
        *v *= scale;
        if u < 0.05 {
            *v = 0.0;
        } else if u < 0.08 {
            *v *= 20.0;
        }
    }
    Tensor::new(shape.to_vec(), data).expect("shape matches")
}
