//! Velocity-grid geometry, periodic index arithmetic and field containers.
//!
//! The grid holds the nodes `i ∈ [-N, N]^d` with velocities `v_i = i h`,
//! `h = 2T / (2N+1)`, so the box `[-T, T]^d` is exactly one period of the
//! periodization used by the transforms. Fields are stored dimension-major
//! with axis index `i ↦ i + N`.

mod fft;

use std::io::Write;

use rustfft::num_complex::Complex64;

pub use fft::{FftPlan, FftWork};

use crate::error::{DvmError, Result};

/// Geometry of the velocity grid and the two truncation orders.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    /// Velocity-space dimension, 2 or 3.
    pub dim: usize,
    /// Half-width `N` in index units; each axis has `2N+1` nodes.
    pub half_nodes: usize,
    /// Domain half-width `T` in velocity units.
    pub box_half_width: f64,
    /// Grid step `h = 2T/(2N+1)`.
    pub step: f64,
    /// Kernel truncation radius `Ñ` (index units, max-norm).
    pub kernel_radius: usize,
    /// Direction truncation order `N̄` (index units, max-norm).
    pub direction_order: usize,
}

/// Default kernel radius `floor(2N / (3 + √2))`, clamped to at least 1.
pub fn default_kernel_radius(half_nodes: usize) -> usize {
    let r = (2.0 * half_nodes as f64 / (3.0 + std::f64::consts::SQRT_2)).floor() as usize;
    r.max(1)
}

/// Builds a validated grid. `kernel_radius` defaults to
/// [`default_kernel_radius`], `direction_order` defaults to the kernel radius.
pub fn make_grid(
    dim: usize,
    half_nodes: usize,
    box_half_width: f64,
    kernel_radius: Option<usize>,
    direction_order: Option<usize>,
) -> Result<GridSpec> {
    if dim != 2 && dim != 3 {
        return Err(DvmError::InvalidDimension(dim));
    }
    if half_nodes < 2 {
        return Err(DvmError::InvalidParameter(format!(
            "half_nodes must be >= 2, got {half_nodes}"
        )));
    }
    if !(box_half_width.is_finite() && box_half_width > 0.0) {
        return Err(DvmError::InvalidParameter(format!(
            "box half-width must be positive, got {box_half_width}"
        )));
    }
    let kernel_radius = kernel_radius.unwrap_or_else(|| default_kernel_radius(half_nodes));
    let direction_order = direction_order.unwrap_or(kernel_radius);
    if direction_order < 1 || direction_order > kernel_radius || kernel_radius > half_nodes {
        return Err(DvmError::TruncationOrder {
            half_nodes,
            kernel_radius,
            direction_order,
        });
    }
    Ok(GridSpec {
        dim,
        half_nodes,
        box_half_width,
        step: 2.0 * box_half_width / (2 * half_nodes + 1) as f64,
        kernel_radius,
        direction_order,
    })
}

impl GridSpec {
    /// Nodes per axis, `2N+1`.
    pub fn side(&self) -> usize {
        2 * self.half_nodes + 1
    }

    /// Total node count `(2N+1)^d`.
    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same grid with different truncation orders.
    pub fn with_truncation(&self, kernel_radius: usize, direction_order: usize) -> Result<Self> {
        make_grid(
            self.dim,
            self.half_nodes,
            self.box_half_width,
            Some(kernel_radius),
            Some(direction_order),
        )
    }

    /// Same geometry (dimension, nodes, box) regardless of truncation orders.
    pub fn same_lattice(&self, other: &GridSpec) -> bool {
        self.dim == other.dim
            && self.half_nodes == other.half_nodes
            && self.box_half_width == other.box_half_width
    }

    /// Three-axis shape with leading singleton axes, `[1, n, n]` in 2D.
    pub fn shape3(&self) -> [usize; 3] {
        let n = self.side();
        if self.dim == 2 {
            [1, n, n]
        } else {
            [n, n, n]
        }
    }

    pub fn plan(&self) -> FftPlan {
        FftPlan::new(self.shape3())
    }

    /// Centered node index of a storage position (length `dim`).
    pub fn node_index(&self, flat: usize) -> Vec<i64> {
        let c = self.coords3(flat);
        c[3 - self.dim..].to_vec()
    }

    /// Node velocity `i h` of a storage position (length `dim`).
    pub fn node_velocity(&self, flat: usize) -> Vec<f64> {
        self.node_index(flat)
            .into_iter()
            .map(|i| i as f64 * self.step)
            .collect()
    }

    /// Storage position of a centered index, or `None` outside the box.
    pub fn flat_of(&self, index: &[i64]) -> Option<usize> {
        assert_eq!(index.len(), self.dim);
        let n = self.half_nodes as i64;
        let side = self.side();
        let mut flat = 0usize;
        for &i in index {
            if i < -n || i > n {
                return None;
            }
            flat = flat * side + (i + n) as usize;
        }
        Some(flat)
    }

    /// Storage position of a centered index reduced modulo `2N+1` on every axis.
    pub fn flat_periodic(&self, index: &[i64]) -> usize {
        assert_eq!(index.len(), self.dim);
        let n = self.half_nodes as i64;
        let side = self.side() as i64;
        index.iter().fold(0usize, |acc, &i| {
            acc * side as usize + (i + n).rem_euclid(side) as usize
        })
    }

    /// Position of a frequency (or lattice displacement) in raw transform order,
    /// i.e. each component reduced modulo `2N+1` into `[0, 2N]`.
    pub fn raw_flat(&self, index: &[i64]) -> usize {
        assert_eq!(index.len(), self.dim);
        let side = self.side() as i64;
        index
            .iter()
            .fold(0usize, |acc, &i| acc * side as usize + i.rem_euclid(side) as usize)
    }

    /// Raw transform position of every storage position.
    pub(crate) fn raw_permutation(&self) -> Vec<usize> {
        (0..self.len())
            .map(|flat| {
                let c = self.coords3(flat);
                self.raw_flat(&c[3 - self.dim..])
            })
            .collect()
    }

    /// Centered index of a storage position padded to three axes (leading zeros).
    pub(crate) fn coords3(&self, flat: usize) -> [i64; 3] {
        let [_, s1, s2] = self.shape3();
        let n = self.half_nodes as i64;
        let p = [flat / (s1 * s2), (flat / s2) % s1, flat % s2];
        let mut c = [0i64; 3];
        for ax in 0..3 {
            if self.shape3()[ax] > 1 {
                c[ax] = p[ax] as i64 - n;
            }
        }
        c
    }

    /// Pads a length-`dim` vector to three components with leading zeros.
    pub(crate) fn pad3(&self, v: &[i64]) -> [i64; 3] {
        assert_eq!(v.len(), self.dim);
        let mut out = [0i64; 3];
        out[3 - self.dim..].copy_from_slice(v);
        out
    }
}

/// Nodal values `f_i` on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl DistributionField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(DvmError::ShapeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(DvmError::NonFiniteField(pos));
        }
        Ok(DistributionField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let len = grid.len();
        DistributionField {
            grid,
            values: vec![0.0; len],
        }
    }

    /// Samples `f(v)` at every node velocity.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut v = [0.0f64; 3];
        let d = grid.dim;
        let values = (0..grid.len())
            .map(|flat| {
                let c = grid.coords3(flat);
                for (slot, &i) in v[..d].iter_mut().zip(&c[3 - d..]) {
                    *slot = i as f64 * grid.step;
                }
                f(&v[..d])
            })
            .collect();
        DistributionField::new(grid, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// CSV dump: header `i1,i2[,i3],v1,v2[,v3],f`, rows in storage order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.grid.dim;
        let mut header: Vec<String> = (1..=d).map(|a| format!("i{a}")).collect();
        header.extend((1..=d).map(|a| format!("v{a}")));
        header.push("f".into());
        writeln!(w, "{}", header.join(","))?;
        for (flat, &f) in self.values.iter().enumerate() {
            let idx = self.grid.node_index(flat);
            let mut row: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            row.extend(idx.iter().map(|&i| format_sig17(i as f64 * self.grid.step)));
            row.push(format_sig17(f));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// 17 significant digits in scientific notation.
pub fn format_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Complex coefficients `f̃_I`, `I ∈ [-N, N]^d`, stored like a field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn coeff(&self, mode: &[i64]) -> Complex64 {
        self.coeffs[self.grid.flat_periodic(mode)]
    }
}

/// Per-storage-position phase `exp(2πi I·N/(2N+1))` linking centered and raw orders.
fn centering_phases(grid: &GridSpec) -> Vec<Complex64> {
    let n = grid.half_nodes as i64;
    let side = grid.side() as f64;
    let axis: Vec<Complex64> = (-n..=n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k * n) as f64 / side))
        .collect();
    (0..grid.len())
        .map(|flat| {
            let c = grid.coords3(flat);
            let mut z = Complex64::new(1.0, 0.0);
            for (ax, &k) in c.iter().enumerate() {
                if grid.shape3()[ax] > 1 {
                    z *= axis[(k + n) as usize];
                }
            }
            z
        })
        .collect()
}

/// Raw-order position of the frequency stored at centered position `flat`.
fn raw_of_centered(grid: &GridSpec, flat: usize) -> usize {
    let c = grid.coords3(flat);
    grid.raw_flat(&c[3 - grid.dim..])
}

/// `f̃_I = (2N+1)^{-d} Σ_i f_i exp(-2πi I·i/(2N+1))`.
pub fn forward_dft(f: &DistributionField) -> SpectralField {
    let grid = &f.grid;
    let plan = grid.plan();
    let mut work = plan.work();
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan.forward(&mut data, &mut work);
    let scale = 1.0 / grid.len() as f64;
    let phases = centering_phases(grid);
    let coeffs = (0..grid.len())
        .map(|flat| data[raw_of_centered(grid, flat)] * phases[flat] * scale)
        .collect();
    SpectralField {
        grid: grid.clone(),
        coeffs,
    }
}

/// Result of [`inverse_dft`]: the real part plus the largest discarded imaginary part.
#[derive(Clone, Debug)]
pub struct InverseOutput {
    pub field: DistributionField,
    pub imag_residue: f64,
}

/// Relative imaginary residue accepted by [`inverse_dft`].
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

/// `f_i = Σ_I g_I exp(2πi I·i/(2N+1))`, keeping the real part.
pub fn inverse_dft(g: &SpectralField) -> Result<InverseOutput> {
    let grid = &g.grid;
    if g.coeffs.len() != grid.len() {
        return Err(DvmError::ShapeMismatch {
            expected: grid.len(),
            got: g.coeffs.len(),
        });
    }
    let plan = grid.plan();
    let mut work = plan.work();
    let phases = centering_phases(grid);
    let mut data = vec![Complex64::default(); grid.len()];
    for (flat, &c) in g.coeffs.iter().enumerate() {
        data[raw_of_centered(grid, flat)] = c * phases[flat].conj();
    }
    plan.inverse(&mut data, &mut work);
    let max_re = data.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let max_im = data.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    let tolerance = IMAG_RESIDUE_TOL * max_re;
    if max_im > tolerance {
        return Err(DvmError::ImaginaryResidue {
            residue: max_im,
            tolerance,
        });
    }
    let field = DistributionField::new(grid.clone(), data.iter().map(|z| z.re).collect())?;
    Ok(InverseOutput {
        field,
        imag_residue: max_im,
    })
}

/// Conserved quantities, entropy and sign diagnostics of a field.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub mass: f64,
    pub momentum: Vec<f64>,
    pub energy: f64,
    /// `h^d Σ_{f_i > 0} f_i ln f_i`.
    pub entropy: f64,
    pub min_value: f64,
    /// `Σ_{f_i < 0} |f_i| / Σ |f_i|` (zero for the zero field).
    pub negative_mass_fraction: f64,
    /// Number of entries `f_i <= 0` left out of the entropy sum.
    pub entropy_skipped: usize,
}

/// Rectangle-rule moments on the grid.
pub fn moments(f: &DistributionField) -> MomentReport {
    let grid = &f.grid;
    let d = grid.dim;
    let cell = grid.step.powi(d as i32);
    let mut mass = 0.0;
    let mut momentum = [0.0f64; 3];
    let mut energy = 0.0;
    let mut entropy = 0.0;
    let mut skipped = 0;
    let mut min_value = f64::INFINITY;
    let mut neg = 0.0;
    let mut abs_total = 0.0;
    for (flat, &fi) in f.values.iter().enumerate() {
        let c = grid.coords3(flat);
        let mut v2 = 0.0;
        for ax in 0..3 {
            let v = c[ax] as f64 * grid.step;
            momentum[ax] += v * fi;
            v2 += v * v;
        }
        mass += fi;
        energy += v2 * fi;
        if fi > 0.0 {
            entropy += fi * fi.ln();
        } else {
            skipped += 1;
            neg -= fi;
        }
        abs_total += fi.abs();
        min_value = min_value.min(fi);
    }
    MomentReport {
        mass: cell * mass,
        momentum: momentum[3 - d..].iter().map(|m| cell * m).collect(),
        energy: cell * energy,
        entropy: cell * entropy,
        min_value,
        negative_mass_fraction: if abs_total > 0.0 { neg / abs_total } else { 0.0 },
        entropy_skipped: skipped,
    }
}
