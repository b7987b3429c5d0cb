use rustfft::num_complex::Complex64;

use super::{collision_pairs, KernelModel};
use crate::error::{DvmError, Result};
use crate::lattice::GridSpec;

/// Dense kernel modes `β(K, L)` for all `K, L ∈ [-N, N]^d`.
///
/// Entries are kept in raw transform order (each component reduced modulo
/// `2N+1`), row `K`, column `L`. Memory is `(2N+1)^{2d}` complex numbers, so
/// this is meant for small grids.
#[derive(Clone, Debug)]
pub struct KernelModeTable {
    pub grid: GridSpec,
    pub(crate) values: Vec<Complex64>,
}

impl KernelModeTable {
    pub fn zeros(grid: &GridSpec) -> Self {
        let len = grid.len();
        KernelModeTable {
            grid: grid.clone(),
            values: vec![Complex64::default(); len * len],
        }
    }

    /// Row by row: `c_K(l) = Σ_k Γ̃_{k,l} e_K(k)` followed by one inverse
    /// transform over `l`.
    pub fn build(model: &KernelModel, grid: &GridSpec) -> Result<Self> {
        model.check_grid(grid)?;
        let len = grid.len();
        let side = grid.side();
        let shape = grid.shape3();
        let pairs = collision_pairs(model, grid, None);
        let unit: Vec<Complex64> = (0..side)
            .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / side as f64))
            .collect();
        let raw_pos = |v: &[i64; 3]| -> usize {
            let s = side as i64;
            let mut flat = 0usize;
            for ax in 0..3 {
                flat = flat * shape[ax] + if shape[ax] > 1 { v[ax].rem_euclid(s) as usize } else { 0 };
            }
            flat
        };
        let pair_l: Vec<usize> = pairs.iter().map(|p| raw_pos(&p.l)).collect();

        let plan = grid.plan();
        let mut work = plan.work();
        let mut values = vec![Complex64::default(); len * len];
        let mut row = vec![Complex64::default(); len];
        for q in 0..len {
            let freq = [
                (q / (shape[1] * shape[2])) as i64,
                ((q / shape[2]) % shape[1]) as i64,
                (q % shape[2]) as i64,
            ];
            row.iter_mut().for_each(|z| *z = Complex64::default());
            for (p, &lpos) in pairs.iter().zip(&pair_l) {
                let phase = (freq[0] * p.k[0] + freq[1] * p.k[1] + freq[2] * p.k[2])
                    .rem_euclid(side as i64) as usize;
                row[lpos] += p.weight * unit[phase];
            }
            plan.inverse(&mut row, &mut work);
            values[q * len..(q + 1) * len].copy_from_slice(&row);
        }
        Ok(KernelModeTable {
            grid: grid.clone(),
            values,
        })
    }

    /// `β(K, L)` for centered (or any integer) mode vectors.
    pub fn get(&self, big_k: &[i64], big_l: &[i64]) -> Complex64 {
        let len = self.grid.len();
        self.values[self.grid.raw_flat(big_k) * len + self.grid.raw_flat(big_l)]
    }

    pub(crate) fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if self.grid != *grid {
            return Err(DvmError::TablesGridMismatch);
        }
        Ok(())
    }
}
