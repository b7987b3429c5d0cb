//! Multidimensional complex transforms of odd length on the periodic lattice.
//!
//! Transforms act on arrays stored in storage order with each axis of length
//! `2N+1`. No padding is ever applied: the transform group is exactly
//! `Z_{2N+1}^d`. Both directions are unnormalized:
//!
//! * `forward`: `X_q = Σ_p x_p exp(-2πi q·p / n)`
//! * `inverse`: `x_p = Σ_q X_q exp(+2πi q·p / n)`

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Per-axis 1D plans for a padded three-axis shape (singleton axes are skipped).
#[derive(Clone)]
pub struct FftPlan {
    shape: [usize; 3],
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FftPlan").field("shape", &self.shape).finish()
    }
}

/// Reusable buffers so that hot loops do not allocate.
#[derive(Debug, Default)]
pub struct FftWork {
    lines: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

impl FftPlan {
    /// `shape` uses leading singleton axes for lower dimensions, e.g. `[1, n, n]` in 2D.
    pub fn new(shape: [usize; 3]) -> Self {
        let n = shape.iter().copied().max().unwrap_or(1);
        debug_assert!(shape.iter().all(|&s| s == 1 || s == n));
        let mut planner = FftPlanner::<f64>::new();
        FftPlan {
            shape,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn work(&self) -> FftWork {
        let scratch_len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        FftWork {
            lines: vec![Complex64::default(); self.len()],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn forward(&self, data: &mut [Complex64], work: &mut FftWork) {
        self.process(data, work, Direction::Forward);
    }

    pub fn inverse(&self, data: &mut [Complex64], work: &mut FftWork) {
        self.process(data, work, Direction::Inverse);
    }

    fn process(&self, data: &mut [Complex64], work: &mut FftWork, dir: Direction) {
        assert_eq!(data.len(), self.len(), "transform length mismatch");
        let fft = match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        if work.lines.len() < data.len() {
            work.lines.resize(data.len(), Complex64::default());
        }
        let need = fft.get_inplace_scratch_len();
        if work.scratch.len() < need {
            work.scratch.resize(need, Complex64::default());
        }
        let [s0, s1, s2] = self.shape;
        // contiguous last axis
        if s2 > 1 {
            fft.process_with_scratch(data, &mut work.scratch[..need]);
        }
        if s1 > 1 {
            self.strided_axis(data, work, fft.as_ref(), s1, s2);
        }
        if s0 > 1 {
            self.strided_axis(data, work, fft.as_ref(), s0, s1 * s2);
        }
    }

    /// Transforms along an axis of length `len` whose elements are `stride` apart.
    fn strided_axis(
        &self,
        data: &mut [Complex64],
        work: &mut FftWork,
        fft: &dyn Fft<f64>,
        len: usize,
        stride: usize,
    ) {
        let block = len * stride;
        let need = fft.get_inplace_scratch_len();
        let lines = &mut work.lines[..block];
        for chunk in data.chunks_exact_mut(block) {
            for m in 0..len {
                let row = &chunk[m * stride..(m + 1) * stride];
                for (j, &z) in row.iter().enumerate() {
                    lines[j * len + m] = z;
                }
            }
            fft.process_with_scratch(lines, &mut work.scratch[..need]);
            for m in 0..len {
                let row = &mut chunk[m * stride..(m + 1) * stride];
                for (j, z) in row.iter_mut().enumerate() {
                    *z = lines[j * len + m];
                }
            }
        }
    }
}
