//! Unnormalized multi-dimensional FFTs over row-major arrays.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// In-place transform of every axis of a row-major array of the given shape.
///
/// `Forward` computes `Σ_j a_j e^{-2πi jk/n}` per axis, `Inverse` the same
/// with `+i`; neither applies a `1/n` factor.
pub fn transform(data: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    debug_assert_eq!(data.len(), shape.iter().product::<usize>());
    for axis in 0..shape.len() {
        transform_axis(data, shape, axis, direction);
    }
}

/// In-place transform along a single axis.
pub fn transform_axis(data: &mut [Complex64], shape: &[usize], axis: usize, direction: FftDirection) {
    let len = shape[axis];
    if len <= 1 {
        return;
    }
    let fft = plan(len, direction);
    let inner: usize = shape[axis + 1..].iter().product();
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    if inner == 1 {
        fft.process_with_scratch(data, &mut scratch);
        return;
    }

    // Each outer block is a len x inner matrix; transpose so the axis is contiguous.
    let block = len * inner;
    let mut buf = vec![Complex64::default(); block];
    for chunk in data.chunks_exact_mut(block) {
        for j in 0..len {
            let row = &chunk[j * inner..(j + 1) * inner];
            for (i, &v) in row.iter().enumerate() {
                buf[i * len + j] = v;
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for j in 0..len {
            let row = &mut chunk[j * inner..(j + 1) * inner];
            for (i, v) in row.iter_mut().enumerate() {
                *v = buf[i * len + j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft_2d(data: &[Complex64], n0: usize, n1: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); n0 * n1];
        for k0 in 0..n0 {
            for k1 in 0..n1 {
                let mut acc = Complex64::default();
                for j0 in 0..n0 {
                    for j1 in 0..n1 {
                        let phase = -2.0 * PI * ((j0 * k0) as f64 / n0 as f64 + (j1 * k1) as f64 / n1 as f64);
                        acc += data[j0 * n1 + j1] * Complex64::from_polar(1.0, phase);
                    }
                }
                out[k0 * n1 + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft_on_rectangular_shape() {
        let (n0, n1) = (6, 8);
        let data: Vec<Complex64> = (0..n0 * n1)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        transform(&mut fast, &[n0, n1], FftDirection::Forward);
        let slow = naive_dft_2d(&data, n0, n1);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
