//! Collision-kernel coefficients and their Fourier representations.
//!
//! Every supported kernel decouples on the lattice as
//! `Γ̃_{k,l} = 1(k·l) a(k) b(l)`. The built-in models use
//! `a(k) = h^3 |k| / gcd(k)` (Maxwell molecules, 2D) and
//! `a(k) = h^5 |k| / gcd(k)` (hard spheres, 3D), with `b ≡ 1`.

mod alpha;
mod modes;

use rustfft::num_complex::Complex64;

pub use alpha::AlphaTables;
pub use modes::KernelModeTable;

use crate::error::{DvmError, Result};
use crate::farey::{gcd_abs, DirectionSet};
use crate::lattice::GridSpec;

/// Explicit coefficient arrays over `[-radius, radius]^d` (storage order).
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    dim: usize,
    radius: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl CoefficientTable {
    /// Requires finite, nonnegative, even arrays with `a(0) = 0`.
    pub fn new(dim: usize, radius: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(DvmError::InvalidDimension(dim));
        }
        let side = 2 * radius + 1;
        let len = side.pow(dim as u32);
        for arr in [&a, &b] {
            if arr.len() != len {
                return Err(DvmError::ShapeMismatch {
                    expected: len,
                    got: arr.len(),
                });
            }
            if arr.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(DvmError::InvalidParameter(
                    "kernel coefficients must be finite and nonnegative".into(),
                ));
            }
            // storage order reversed is the point reflection k -> -k
            if arr.iter().zip(arr.iter().rev()).any(|(x, y)| x != y) {
                return Err(DvmError::InvalidParameter(
                    "kernel coefficients must be even, a(-k) = a(k)".into(),
                ));
            }
        }
        if a[len / 2] != 0.0 {
            return Err(DvmError::InvalidParameter("a(0) must be 0".into()));
        }
        Ok(CoefficientTable { dim, radius, a, b })
    }

    fn flat(&self, k: &[i64]) -> Option<usize> {
        let r = self.radius as i64;
        let side = 2 * self.radius + 1;
        let mut flat = 0usize;
        for &x in k {
            if x.abs() > r {
                return None;
            }
            flat = flat * side + (x + r) as usize;
        }
        Some(flat)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelModel {
    /// Maxwell molecules in 2D.
    Maxwell2D,
    /// Hard spheres in 3D.
    HardSphere3D,
    /// User-supplied decoupled coefficients.
    TableBased(CoefficientTable),
}

impl KernelModel {
    pub fn dim(&self) -> usize {
        match self {
            KernelModel::Maxwell2D => 2,
            KernelModel::HardSphere3D => 3,
            KernelModel::TableBased(t) => t.dim,
        }
    }

    /// Numeric id used in binary table dumps.
    pub fn id(&self) -> u64 {
        match self {
            KernelModel::Maxwell2D => 1,
            KernelModel::HardSphere3D => 2,
            KernelModel::TableBased(_) => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelModel::Maxwell2D => "maxwell2d",
            KernelModel::HardSphere3D => "hardsphere3d",
            KernelModel::TableBased(_) => "table",
        }
    }

    pub(crate) fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if self.dim() != grid.dim {
            return Err(DvmError::InvalidDimension(grid.dim));
        }
        Ok(())
    }
}

/// Carleman-form kernel `B̃(x, y) = 2^{d-1} B(|x|/r, r) r^{-(d-2)}`, `r = √(|x|²+|y|²)`.
///
/// `cross_section(cos θ, relative speed)` is the physical kernel `B`.
pub fn carleman_kernel(
    cross_section: impl Fn(f64, f64) -> f64,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let d = x.len();
    if d != y.len() {
        return Err(DvmError::ShapeMismatch {
            expected: d,
            got: y.len(),
        });
    }
    if d != 2 && d != 3 {
        return Err(DvmError::InvalidDimension(d));
    }
    let x2: f64 = x.iter().map(|v| v * v).sum();
    let y2: f64 = y.iter().map(|v| v * v).sum();
    let r2 = x2 + y2;
    if r2 == 0.0 {
        return Err(DvmError::UndefinedAtOrigin);
    }
    let r = r2.sqrt();
    let pow = 2f64.powi(d as i32 - 1);
    Ok(pow * cross_section(x2.sqrt() / r, r) * r2.powf(-(d as f64 - 2.0) / 2.0))
}

/// Gain-side coefficient `a(k)`; zero at `k = 0`.
pub fn coeff_a(model: &KernelModel, k: &[i64], h: f64) -> f64 {
    let g = gcd_abs(k);
    match model {
        _ if g == 0 => 0.0,
        KernelModel::Maxwell2D => h.powi(3) * norm(k) / g as f64,
        KernelModel::HardSphere3D => h.powi(5) * norm(k) / g as f64,
        KernelModel::TableBased(t) => t.flat(k).map_or(0.0, |f| t.a[f]),
    }
}

/// Coefficient `b(l)`; identically 1 for the built-in models (including `l = 0`).
pub fn coeff_b(model: &KernelModel, l: &[i64], _h: f64) -> f64 {
    match model {
        KernelModel::Maxwell2D | KernelModel::HardSphere3D => 1.0,
        KernelModel::TableBased(t) => t.flat(l).map_or(0.0, |f| t.b[f]),
    }
}

fn norm(k: &[i64]) -> f64 {
    (k.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt()
}

fn dot(k: &[i64], l: &[i64]) -> i64 {
    k.iter().zip(l).map(|(a, b)| a * b).sum()
}

/// Discrete weight `Γ̃_{k,l} = 1(k·l) a(k) b(l)`.
pub fn gamma_tilde(model: &KernelModel, k: &[i64], l: &[i64], h: f64) -> f64 {
    if dot(k, l) != 0 {
        0.0
    } else {
        coeff_a(model, k, h) * coeff_b(model, l, h)
    }
}

/// All lattice vectors of `[-r, r]^d` in storage order.
pub(crate) fn box_points(dim: usize, r: usize) -> Vec<Vec<i64>> {
    let r = r as i64;
    let mut pts = vec![vec![]];
    for _ in 0..dim {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (-r..=r).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    pts
}

/// `β(K, L) = Σ_{k·l = 0} a(k) b(l) e_K(k) e_L(l)` by exhaustive summation over
/// `k, l ∈ [-Ñ, Ñ]^d`. Oracle only: cost `(2Ñ+1)^{2d}` per entry.
pub fn beta_direct(model: &KernelModel, grid: &GridSpec, big_k: &[i64], big_l: &[i64]) -> Complex64 {
    let side = grid.side() as f64;
    let pts = box_points(grid.dim, grid.kernel_radius);
    let mut acc = Complex64::default();
    for k in &pts {
        let a = coeff_a(model, k, grid.step);
        if a == 0.0 {
            continue;
        }
        for l in &pts {
            if dot(k, l) != 0 {
                continue;
            }
            let w = a * coeff_b(model, l, grid.step);
            let phase = (dot(big_k, k) + dot(big_l, l)) as f64;
            acc += w * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase / side);
        }
    }
    acc
}

/// One collision pair `(k, l)` with its weight; vectors leading-padded to three axes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Pair {
    pub k: [i64; 3],
    pub l: [i64; 3],
    pub weight: f64,
}

/// Nonzero-weight orthogonal pairs in `[-Ñ, Ñ]^d`, optionally keeping only `k`
/// on the lines of `directions`. Sorted by `(k, l)` in storage order.
pub(crate) fn collision_pairs(
    model: &KernelModel,
    grid: &GridSpec,
    directions: Option<&DirectionSet>,
) -> Vec<Pair> {
    let pts = box_points(grid.dim, grid.kernel_radius);
    let mut pairs = Vec::new();
    for k in &pts {
        let a = coeff_a(model, k, grid.step);
        if a == 0.0 {
            continue;
        }
        if let Some(set) = directions {
            if set.locate(k).is_none() {
                continue;
            }
        }
        for l in &pts {
            if dot(k, l) != 0 {
                continue;
            }
            let w = a * coeff_b(model, l, grid.step);
            if w != 0.0 {
                pairs.push(Pair {
                    k: grid.pad3(k),
                    l: grid.pad3(l),
                    weight: w,
                });
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farey::enumerate_directions;
    use crate::lattice::make_grid;

    #[test]
    fn carleman_examples() {
        let b = carleman_kernel(|_, _| 1.0, &[0.3, -1.0], &[2.0, 0.6]).unwrap();
        assert_eq!(b, 2.0);
        let b = carleman_kernel(|_, r| r, &[3.0, 4.0], &[0.0, 0.0]).unwrap();
        assert!((b - 10.0).abs() < 1e-14);
        // hard spheres: B proportional to relative speed gives a constant B̃
        let hs = |x: &[f64], y: &[f64]| carleman_kernel(|_, r| r, x, y).unwrap();
        let c = hs(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]);
        for (x, y) in [([0.2, 3.0, 1.0], [1.0, 0.0, 0.0]), ([5.0, 0.0, 0.1], [0.0, 0.0, 0.0])] {
            assert!((hs(&x, &y) - c).abs() < 1e-14);
        }
        assert_eq!(
            carleman_kernel(|_, _| 1.0, &[0.0, 0.0], &[0.0, 0.0]),
            Err(DvmError::UndefinedAtOrigin)
        );
    }

    #[test]
    fn coefficient_examples() {
        let m = KernelModel::Maxwell2D;
        assert!((coeff_a(&m, &[2, 4], 1.0) - 5f64.sqrt()).abs() < 1e-15);
        assert!((coeff_a(&m, &[2, 4], 1.0) - 2.236_068_0).abs() < 1e-7);
        assert_eq!(coeff_a(&m, &[0, 0], 1.0), 0.0);
        let hs = KernelModel::HardSphere3D;
        let v = coeff_a(&hs, &[1, 1, 1], 0.5);
        assert!((v - 0.5f64.powi(5) * 3f64.sqrt()).abs() < 1e-17);
        assert!((v - 0.054_126_59).abs() < 1e-8);
        assert_eq!(coeff_b(&m, &[0, 0], 0.3), 1.0);
    }

    #[test]
    fn coefficient_is_constant_along_a_line() {
        // a(m e) = h^3 |e| for every nonzero multiple of a primitive e
        let m = KernelModel::Maxwell2D;
        let h: f64 = 0.37;
        for e in enumerate_directions(2, 5).unwrap().iter() {
            let c = e.components();
            for mult in [-4i64, -1, 1, 2, 7] {
                let k: Vec<i64> = c.iter().map(|x| x * mult).collect();
                let expect = h.powi(3) * norm(c);
                assert!((coeff_a(&m, &k, h) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gamma_examples() {
        let m = KernelModel::Maxwell2D;
        assert_eq!(gamma_tilde(&m, &[1, 0], &[0, 2], 1.0), 1.0);
        assert_eq!(gamma_tilde(&m, &[1, 1], &[1, 0], 1.0), 0.0);
        assert!((gamma_tilde(&m, &[1, 1], &[1, -1], 1.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn beta_direct_examples() {
        let grid = make_grid(2, 8, 5.0, Some(1), None).unwrap();
        let grid = GridSpec { step: 1.0, ..grid };
        let b = beta_direct(&KernelModel::Maxwell2D, &grid, &[0, 0], &[0, 0]);
        assert!((b.re - (12.0 + 12.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((b.re - 28.970_562_7).abs() < 1e-7);
        assert!(b.im.abs() < 1e-12);

        let grid = make_grid(2, 5, 3.0, Some(3), None).unwrap();
        for (kk, ll) in [([1, -2], [3, 0]), ([4, 4], [-5, 2]), ([0, 1], [2, -3])] {
            let b = beta_direct(&KernelModel::Maxwell2D, &grid, &kk, &ll);
            let nk = [-kk[0], -kk[1]];
            let nl = [-ll[0], -ll[1]];
            let bm = beta_direct(&KernelModel::Maxwell2D, &grid, &nk, &nl);
            assert!((b - bm.conj()).norm() < 1e-12);
        }

        let zero = CoefficientTable::new(2, 3, vec![0.0; 49], vec![1.0; 49]).unwrap();
        let b = beta_direct(&KernelModel::TableBased(zero), &grid, &[1, 2], &[0, 3]);
        assert_eq!(b, Complex64::default());
    }

    #[test]
    fn coefficient_table_validation() {
        let mut a = vec![1.0; 9];
        a[4] = 0.0;
        assert!(CoefficientTable::new(2, 1, a.clone(), vec![1.0; 9]).is_ok());
        let mut bad = a.clone();
        bad[0] = 2.0;
        assert!(CoefficientTable::new(2, 1, bad, vec![1.0; 9]).is_err());
        let mut bad = a.clone();
        bad[4] = 1.0;
        assert!(CoefficientTable::new(2, 1, bad, vec![1.0; 9]).is_err());
        assert!(CoefficientTable::new(2, 1, a, vec![-1.0; 9]).is_err());
    }

    #[test]
    fn pair_list_matches_gamma() {
        let grid = make_grid(2, 6, 3.0, Some(3), None).unwrap();
        let m = KernelModel::Maxwell2D;
        let pairs = collision_pairs(&m, &grid, None);
        let mut count = 0;
        for k in box_points(2, 3) {
            for l in box_points(2, 3) {
                if gamma_tilde(&m, &k, &l, grid.step) != 0.0 {
                    count += 1;
                }
            }
        }
        assert_eq!(pairs.len(), count);
        assert_eq!(pairs.len(), 240);
        for p in &pairs {
            let w = gamma_tilde(&m, &p.k[1..], &p.l[1..], grid.step);
            assert_eq!(w, p.weight);
        }
    }
}
