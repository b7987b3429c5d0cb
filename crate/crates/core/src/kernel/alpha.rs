use std::io::{Read, Write};

use rustfft::num_complex::Complex64;

use super::{box_points, coeff_a, coeff_b, dot, KernelModel};
use crate::error::{DvmError, Result};
use crate::farey::DirectionSet;
use crate::lattice::GridSpec;

/// Per-direction factors of the kernel-mode decomposition
/// `β^{N̄}(K, L) = Σ_p α_p(K) α'_p(L)`.
///
/// `α_p` is the transform of `a` restricted to the line `e_p Z`, `α'_p` the
/// transform of `b` restricted to the orthogonal complement `e_p^⊥`, both
/// clipped to `[-Ñ, Ñ]^d`. With even coefficients every row is real, so rows
/// are stored as real arrays in raw transform order.
#[derive(Clone, Debug)]
pub struct AlphaTables {
    pub grid: GridSpec,
    pub model_id: u64,
    pub directions: DirectionSet,
    pub(crate) alpha: Vec<Vec<f64>>,
    pub(crate) alpha_prime: Vec<Vec<f64>>,
    /// `λ(L) = Σ_p α_p(L) α'_p(L)`, the loss-term modes.
    pub(crate) loss_modes: Vec<f64>,
}

impl AlphaTables {
    pub fn build(model: &KernelModel, grid: &GridSpec, directions: &DirectionSet) -> Result<Self> {
        model.check_grid(grid)?;
        if directions.dim != grid.dim {
            return Err(DvmError::InvalidDimension(directions.dim));
        }
        if directions.order > grid.kernel_radius {
            return Err(DvmError::DirectionOrderExceedsRadius {
                direction_order: directions.order,
                kernel_radius: grid.kernel_radius,
            });
        }
        let len = grid.len();
        let r = grid.kernel_radius as i64;
        let plan = grid.plan();
        let mut work = plan.work();
        let mut buf = vec![Complex64::default(); len];
        let pts = box_points(grid.dim, grid.kernel_radius);

        let mut to_real = |buf: &mut Vec<Complex64>| -> Vec<f64> {
            plan.inverse(buf, &mut work);
            let scale = buf.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
            debug_assert!(buf.iter().all(|z| z.im.abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE)));
            buf.iter().map(|z| z.re).collect()
        };

        let mut alpha = Vec::with_capacity(directions.len());
        let mut alpha_prime = Vec::with_capacity(directions.len());
        for e in directions.iter() {
            let c = e.components();
            buf.iter_mut().for_each(|z| *z = Complex64::default());
            let steps = r / e.max_norm();
            for m in -steps..=steps {
                let k: Vec<i64> = c.iter().map(|x| m * x).collect();
                buf[grid.raw_flat(&k)] += coeff_a(model, &k, grid.step);
            }
            alpha.push(to_real(&mut buf));

            buf.iter_mut().for_each(|z| *z = Complex64::default());
            for l in pts.iter().filter(|l| dot(c, l) == 0) {
                buf[grid.raw_flat(l)] += coeff_b(model, l, grid.step);
            }
            alpha_prime.push(to_real(&mut buf));
        }
        let mut loss_modes = vec![0.0; len];
        for (a, b) in alpha.iter().zip(&alpha_prime) {
            for ((lm, x), y) in loss_modes.iter_mut().zip(a).zip(b) {
                *lm += x * y;
            }
        }
        Ok(AlphaTables {
            grid: grid.clone(),
            model_id: model.id(),
            directions: directions.clone(),
            alpha,
            alpha_prime,
            loss_modes,
        })
    }

    pub fn direction_count(&self) -> usize {
        self.directions.len()
    }

    pub fn alpha(&self, p: usize, big_k: &[i64]) -> Complex64 {
        Complex64::new(self.alpha[p][self.grid.raw_flat(big_k)], 0.0)
    }

    pub fn alpha_prime(&self, p: usize, big_l: &[i64]) -> Complex64 {
        Complex64::new(self.alpha_prime[p][self.grid.raw_flat(big_l)], 0.0)
    }

    pub fn loss_mode(&self, big_l: &[i64]) -> Complex64 {
        Complex64::new(self.loss_modes[self.grid.raw_flat(big_l)], 0.0)
    }

    /// `β^{N̄}(K, L) = Σ_p α_p(K) α'_p(L)`.
    pub fn reconstruct_beta(&self, big_k: &[i64], big_l: &[i64]) -> Complex64 {
        let qk = self.grid.raw_flat(big_k);
        let ql = self.grid.raw_flat(big_l);
        let s: f64 = self
            .alpha
            .iter()
            .zip(&self.alpha_prime)
            .map(|(a, b)| a[qk] * b[ql])
            .sum();
        Complex64::new(s, 0.0)
    }

    /// Approximate memory held by the rows, in bytes.
    pub fn memory_bytes(&self) -> usize {
        (2 * self.alpha.len() + 1) * self.grid.len() * std::mem::size_of::<f64>()
    }

    /// Binary dump, all integers and floats little-endian:
    /// `u64` header `d, N, Ñ, N̄, model id, direction count`, then the grid
    /// step as `f64`, then every `α_p` row, every `α'_p` row and `λ`, each as
    /// `(re, im)` `f64` pairs in storage order (centered `K + N` per axis).
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        for v in [
            g.dim as u64,
            g.half_nodes as u64,
            g.kernel_radius as u64,
            self.directions.order as u64,
            self.model_id,
            self.directions.len() as u64,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&g.step.to_le_bytes())?;
        let rows = self.alpha.iter().chain(&self.alpha_prime).chain(std::iter::once(&self.loss_modes));
        let mut bytes = Vec::with_capacity(16 * g.len());
        for row in rows {
            bytes.clear();
            for flat in 0..g.len() {
                let q = g.raw_flat(&g.node_index(flat));
                bytes.extend_from_slice(&row[q].to_le_bytes());
                bytes.extend_from_slice(&0f64.to_le_bytes());
            }
            w.write_all(&bytes)?;
        }
        Ok(())
    }

    /// Reads a dump written by [`AlphaTables::write_to`], checking that it
    /// matches `grid`, `model` and `directions`.
    pub fn read_from<R: Read>(
        mut r: R,
        model: &KernelModel,
        grid: &GridSpec,
        directions: &DirectionSet,
    ) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut header = [0u64; 6];
        for h in header.iter_mut() {
            r.read_exact(&mut word)?;
            *h = u64::from_le_bytes(word);
        }
        r.read_exact(&mut word)?;
        let step = f64::from_le_bytes(word);
        let expect = [
            grid.dim as u64,
            grid.half_nodes as u64,
            grid.kernel_radius as u64,
            directions.order as u64,
            model.id(),
            directions.len() as u64,
        ];
        if header != expect || step != grid.step {
            return Err(DvmError::MalformedDump(format!(
                "header {header:?} (step {step}) does not match {expect:?} (step {})",
                grid.step
            )));
        }
        let len = grid.len();
        let raw_index: Vec<usize> = (0..len).map(|f| grid.raw_flat(&grid.node_index(f))).collect();
        let mut bytes = vec![0u8; 16 * len];
        let mut read_row = |r: &mut R| -> Result<Vec<f64>> {
            r.read_exact(&mut bytes)?;
            let mut row = vec![0.0; len];
            for (flat, chunk) in bytes.chunks_exact(16).enumerate() {
                let re = f64::from_le_bytes(chunk[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(chunk[8..].try_into().expect("8 bytes"));
                if !re.is_finite() || im != 0.0 {
                    return Err(DvmError::MalformedDump("unexpected row entry".into()));
                }
                row[raw_index[flat]] = re;
            }
            Ok(row)
        };
        let n = directions.len();
        let alpha = (0..n).map(|_| read_row(&mut r)).collect::<Result<Vec<_>>>()?;
        let alpha_prime = (0..n).map(|_| read_row(&mut r)).collect::<Result<Vec<_>>>()?;
        let loss_modes = read_row(&mut r)?;
        Ok(AlphaTables {
            grid: grid.clone(),
            model_id: model.id(),
            directions: directions.clone(),
            alpha,
            alpha_prime,
            loss_modes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farey::{enumerate_directions, Direction};
    use crate::kernel::{beta_direct, CoefficientTable};
    use crate::lattice::make_grid;

    fn unit_grid(n: usize, radius: usize) -> GridSpec {
        let g = make_grid(2, n, 1.0, Some(radius), None).unwrap();
        GridSpec { step: 1.0, ..g }
    }

    #[test]
    fn reconstructs_beta_when_all_directions_kept() {
        let cases = [
            (KernelModel::Maxwell2D, make_grid(2, 8, 5.0, Some(3), None).unwrap()),
            (KernelModel::HardSphere3D, make_grid(3, 3, 2.0, Some(1), None).unwrap()),
            (KernelModel::HardSphere3D, make_grid(3, 3, 2.0, Some(2), None).unwrap()),
        ];
        for (model, grid) in cases {
            let dirs = enumerate_directions(grid.dim, grid.kernel_radius).unwrap();
            let t = AlphaTables::build(&model, &grid, &dirs).unwrap();
            let zero = vec![0; grid.dim];
            let scale = beta_direct(&model, &grid, &zero, &zero).norm();
            let stride = if grid.dim == 2 { 3 } else { 29 };
            for fk in (0..grid.len()).step_by(stride) {
                for fl in (0..grid.len()).step_by(stride + 1) {
                    let k = grid.node_index(fk);
                    let l = grid.node_index(fl);
                    let diff = (t.reconstruct_beta(&k, &l) - beta_direct(&model, &grid, &k, &l)).norm();
                    assert!(diff <= 1e-10 * scale, "{k:?} {l:?} {diff}");
                }
            }
        }
    }

    #[test]
    fn axis_direction_values() {
        let grid = unit_grid(8, 3);
        let set = DirectionSet {
            dim: 2,
            order: 1,
            dirs: vec![Direction::of_vector(&[1, 0]).unwrap()],
        };
        let t = AlphaTables::build(&KernelModel::Maxwell2D, &grid, &set).unwrap();
        assert!((t.alpha(0, &[0, 0]).re - 6.0).abs() < 1e-12);
        assert!((t.alpha_prime(0, &[0, 0]).re - 7.0).abs() < 1e-12);
        assert!((t.loss_mode(&[0, 0]).re - 42.0).abs() < 1e-12);
    }

    #[test]
    fn origin_values_are_line_sums() {
        let grid = make_grid(2, 10, 4.0, Some(4), Some(4)).unwrap();
        let dirs = enumerate_directions(2, 4).unwrap();
        let t = AlphaTables::build(&KernelModel::Maxwell2D, &grid, &dirs).unwrap();
        for (p, e) in dirs.iter().enumerate() {
            let c = e.components();
            let mut sum = 0.0;
            for m in -4i64..=4 {
                let k = [m * c[0], m * c[1]];
                if k.iter().all(|x| x.abs() <= 4) {
                    sum += coeff_a(&KernelModel::Maxwell2D, &k, grid.step);
                }
            }
            assert!((t.alpha(p, &[0, 0]).re - sum).abs() < 1e-12);
        }
        let lambda0: f64 = (0..dirs.len())
            .map(|p| t.alpha(p, &[0, 0]).re * t.alpha_prime(p, &[0, 0]).re)
            .sum();
        assert!((t.loss_mode(&[0, 0]).re - lambda0).abs() < 1e-10);
        assert!(lambda0 > 0.0);
    }

    #[test]
    fn monotone_content_in_direction_order() {
        let grid = make_grid(2, 9, 4.0, Some(5), None).unwrap();
        let model = KernelModel::Maxwell2D;
        let full = beta_direct(&model, &grid, &[0, 0], &[0, 0]).re;
        let mut prev = 0.0;
        for order in 1..=5 {
            let dirs = enumerate_directions(2, order).unwrap();
            let t = AlphaTables::build(&model, &grid, &dirs).unwrap();
            let b = t.reconstruct_beta(&[0, 0], &[0, 0]).re;
            assert!(b >= prev - 1e-12 && b <= full + 1e-9 * full);
            prev = b;
        }
        assert!((prev - full).abs() < 1e-10 * full);
    }

    #[test]
    fn rows_are_even() {
        let grid = make_grid(3, 3, 2.0, Some(2), None).unwrap();
        let dirs = enumerate_directions(3, 2).unwrap();
        let t = AlphaTables::build(&KernelModel::HardSphere3D, &grid, &dirs).unwrap();
        for flat in (0..grid.len()).step_by(11) {
            let k = grid.node_index(flat);
            let nk: Vec<i64> = k.iter().map(|x| -x).collect();
            for p in 0..dirs.len() {
                assert!((t.alpha(p, &k) - t.alpha(p, &nk).conj()).norm() < 1e-12);
                assert!((t.alpha_prime(p, &k) - t.alpha_prime(p, &nk).conj()).norm() < 1e-12);
            }
            assert!((t.loss_mode(&k) - t.loss_mode(&nk).conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn order_above_radius_rejected() {
        let grid = make_grid(2, 8, 5.0, Some(2), Some(2)).unwrap();
        let dirs = enumerate_directions(2, 3).unwrap();
        assert!(matches!(
            AlphaTables::build(&KernelModel::Maxwell2D, &grid, &dirs),
            Err(DvmError::DirectionOrderExceedsRadius { .. })
        ));
    }

    #[test]
    fn table_based_model_matches_builtin() {
        let grid = make_grid(2, 6, 3.0, Some(2), None).unwrap();
        let pts = box_points(2, 2);
        let a = pts.iter().map(|k| coeff_a(&KernelModel::Maxwell2D, k, grid.step)).collect();
        let table = KernelModel::TableBased(CoefficientTable::new(2, 2, a, vec![1.0; 25]).unwrap());
        let dirs = enumerate_directions(2, 2).unwrap();
        let t1 = AlphaTables::build(&KernelModel::Maxwell2D, &grid, &dirs).unwrap();
        let t2 = AlphaTables::build(&table, &grid, &dirs).unwrap();
        for (x, y) in t1.loss_modes.iter().zip(&t2.loss_modes) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn dump_round_trip() {
        let grid = make_grid(2, 5, 3.0, Some(2), None).unwrap();
        let model = KernelModel::Maxwell2D;
        let dirs = enumerate_directions(2, 2).unwrap();
        let t = AlphaTables::build(&model, &grid, &dirs).unwrap();
        let mut bytes = Vec::new();
        t.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 56 + (2 * dirs.len() + 1) * grid.len() * 16);
        assert_eq!(&bytes[..8], &2u64.to_le_bytes());
        let back = AlphaTables::read_from(&bytes[..], &model, &grid, &dirs).unwrap();
        assert_eq!(back.alpha, t.alpha);
        assert_eq!(back.alpha_prime, t.alpha_prime);
        assert_eq!(back.loss_modes, t.loss_modes);

        let other = make_grid(2, 5, 3.5, Some(2), None).unwrap();
        assert!(AlphaTables::read_from(&bytes[..], &model, &other, &dirs).is_err());
        assert!(AlphaTables::read_from(&bytes[..100], &model, &grid, &dirs).is_err());
    }
}
