//! Evaluators of the discrete collision operator `D_i(f, f)`.
//!
//! * [`TruncatedDvm`]: collisions whose four velocities all stay in the box,
//!   non-periodic indexing. Conserves mass, momentum and energy exactly.
//! * [`ClassicalDvm`]: the periodized sum
//!   `Σ_{k,l} Γ̃_{k,l} [f_{i+k} f_{i+l} - f_i f_{i+k+l}]` with indices modulo
//!   `2N+1`, by direct summation.
//! * [`PseudoSpectralDvm`]: the same operator through dense kernel modes,
//!   `g̃_I = Σ_{K+L=I} (β(K,L) - β(L,L)) f̃_K f̃_L`.
//! * [`FastDvm`]: the direction-decomposed form, one packed transform per
//!   direction plus one forward transform and one loss transform.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rustfft::num_complex::Complex64;

use crate::error::{DvmError, Result};
use crate::farey::{enumerate_directions, DirectionSet};
use crate::kernel::{collision_pairs, AlphaTables, KernelModeTable, KernelModel, Pair};
use crate::lattice::{DistributionField, FftPlan, GridSpec};

/// Relative tolerance on the imaginary part left by the inverse transforms.
pub const SPECTRAL_RESIDUE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    /// Largest imaginary part discarded by an inverse transform (0 for direct sums).
    pub imag_residue: f64,
    pub elapsed_ns: u64,
    /// Number of summed terms: pair-node products for the direct sums, mode
    /// products for the pseudo-spectral form, directions for the fast form.
    pub terms: u64,
    /// Real-valued transforms in the `2A + 2` accounting of the fast form.
    pub transforms: usize,
    /// Complex FFT invocations actually executed.
    pub fft_calls: usize,
}

/// `D_i` in storage order plus diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionOutput {
    pub values: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl CollisionOutput {
    pub fn into_field(self, grid: &GridSpec) -> Result<DistributionField> {
        DistributionField::new(grid.clone(), self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Truncated,
    Classical,
    PseudoSpectral,
    Fast,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Truncated => "truncated",
            OperatorKind::Classical => "classical",
            OperatorKind::PseudoSpectral => "pseudospectral",
            OperatorKind::Fast => "fast",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = DvmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truncated" => Ok(OperatorKind::Truncated),
            "classical" => Ok(OperatorKind::Classical),
            "pseudospectral" => Ok(OperatorKind::PseudoSpectral),
            "fast" => Ok(OperatorKind::Fast),
            other => Err(DvmError::InvalidParameter(format!("unknown operator '{other}'"))),
        }
    }
}

pub trait CollisionOperator: Send + Sync {
    fn kind(&self) -> OperatorKind;
    fn grid(&self) -> &GridSpec;
    fn evaluate(&self, f: &DistributionField) -> Result<CollisionOutput>;
}

fn check_field(grid: &GridSpec, f: &DistributionField) -> Result<()> {
    if !f.grid.same_lattice(grid) {
        return Err(DvmError::FieldGridMismatch);
    }
    Ok(())
}

fn finish(values: Vec<f64>, start: Instant, mut diagnostics: Diagnostics) -> Result<CollisionOutput> {
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(DvmError::NonFiniteField(pos));
    }
    diagnostics.elapsed_ns = start.elapsed().as_nanos() as u64;
    Ok(CollisionOutput { values, diagnostics })
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Non-periodic direct sum over collisions that stay inside `[-N, N]^d`.
#[derive(Clone, Debug)]
pub struct TruncatedDvm {
    grid: GridSpec,
    pairs: Vec<Pair>,
}

impl TruncatedDvm {
    pub fn new(model: &KernelModel, grid: &GridSpec) -> Result<Self> {
        model.check_grid(grid)?;
        Ok(TruncatedDvm {
            grid: grid.clone(),
            pairs: collision_pairs(model, grid, None),
        })
    }
}

impl CollisionOperator for TruncatedDvm {
    fn kind(&self) -> OperatorKind {
        OperatorKind::Truncated
    }

    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn evaluate(&self, f: &DistributionField) -> Result<CollisionOutput> {
        check_field(&self.grid, f)?;
        let start = Instant::now();
        let shape = self.grid.shape3();
        let n = self.grid.half_nodes as i64;
        let fv = &f.values;
        let mut out = vec![0.0; fv.len()];
        let mut terms = 0u64;
        for p in &self.pairs {
            // storage-coordinate range of i on each axis keeping all four points inside
            let mut lo = [0i64; 3];
            let mut hi = [0i64; 3];
            for ax in 0..3 {
                if shape[ax] == 1 {
                    continue;
                }
                let s = [0, p.k[ax], p.l[ax], p.k[ax] + p.l[ax]];
                lo[ax] = -s.iter().min().unwrap();
                hi[ax] = 2 * n - s.iter().max().unwrap();
            }
            if (0..3).any(|ax| lo[ax] > hi[ax]) {
                continue;
            }
            let off = |s: [i64; 3]| -> i64 { (s[0] * shape[1] as i64 + s[1]) * shape[2] as i64 + s[2] };
            let ok = off(p.k);
            let ol = off(p.l);
            let okl = off([p.k[0] + p.l[0], p.k[1] + p.l[1], p.k[2] + p.l[2]]);
            for i0 in lo[0]..=hi[0] {
                for i1 in lo[1]..=hi[1] {
                    let row = (i0 * shape[1] as i64 + i1) * shape[2] as i64;
                    for i2 in lo[2]..=hi[2] {
                        let i = row + i2;
                        let gain = fv[(i + ok) as usize] * fv[(i + ol) as usize];
                        let loss = fv[i as usize] * fv[(i + okl) as usize];
                        out[i as usize] += p.weight * (gain - loss);
                    }
                }
                terms += ((hi[1] - lo[1] + 1) * (hi[2] - lo[2] + 1)) as u64;
            }
        }
        finish(
            out,
            start,
            Diagnostics {
                terms,
                ..Default::default()
            },
        )
    }
}

/// Periodized direct sum; the oracle for the spectral evaluators.
#[derive(Clone, Debug)]
pub struct ClassicalDvm {
    grid: GridSpec,
    pairs: Vec<Pair>,
    compensated: bool,
}

impl ClassicalDvm {
    pub fn new(model: &KernelModel, grid: &GridSpec) -> Result<Self> {
        model.check_grid(grid)?;
        Ok(ClassicalDvm {
            grid: grid.clone(),
            pairs: collision_pairs(model, grid, None),
            compensated: false,
        })
    }

    /// Keeps only the pairs whose `k` lies on one of `directions`; equals the
    /// direction-truncated operator evaluated by [`FastDvm`].
    pub fn with_directions(model: &KernelModel, grid: &GridSpec, directions: &DirectionSet) -> Result<Self> {
        model.check_grid(grid)?;
        Ok(ClassicalDvm {
            grid: grid.clone(),
            pairs: collision_pairs(model, grid, Some(directions)),
            compensated: false,
        })
    }

    /// Per-node compensated summation over the pairs.
    pub fn compensated(mut self, on: bool) -> Self {
        self.compensated = on;
        self
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }
}

impl CollisionOperator for ClassicalDvm {
    fn kind(&self) -> OperatorKind {
        OperatorKind::Classical
    }

    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn evaluate(&self, f: &DistributionField) -> Result<CollisionOutput> {
        check_field(&self.grid, f)?;
        let start = Instant::now();
        let shape = self.grid.shape3();
        let fv = &f.values;
        let len = fv.len();
        // wrap[ax][j + size] = j mod size for j in [-size, 2 size)
        let wrap: Vec<Vec<usize>> = shape
            .iter()
            .map(|&s| (0..3 * s).map(|j| j % s).collect())
            .collect();
        let pos = |ax: usize, i: usize, s: i64| wrap[ax][(i as i64 + s + shape[ax] as i64) as usize];
        let mut plain = vec![0.0; if self.compensated { 0 } else { len }];
        let mut comp = vec![Compensated::default(); if self.compensated { len } else { 0 }];
        let mut contrib = vec![0.0; shape[2]];
        for p in &self.pairs {
            let kl = [p.k[0] + p.l[0], p.k[1] + p.l[1], p.k[2] + p.l[2]];
            for i0 in 0..shape[0] {
                for i1 in 0..shape[1] {
                    let base = |s: &[i64; 3]| (pos(0, i0, s[0]) * shape[1] + pos(1, i1, s[1])) * shape[2];
                    let bk = base(&p.k);
                    let bl = base(&p.l);
                    let bkl = base(&kl);
                    let row = (i0 * shape[1] + i1) * shape[2];
                    for (i2, c) in contrib.iter_mut().enumerate() {
                        let gain = fv[bk + pos(2, i2, p.k[2])] * fv[bl + pos(2, i2, p.l[2])];
                        let loss = fv[row + i2] * fv[bkl + pos(2, i2, kl[2])];
                        *c = p.weight * (gain - loss);
                    }
                    if self.compensated {
                        for (acc, &c) in comp[row..row + shape[2]].iter_mut().zip(&contrib) {
                            acc.add(c);
                        }
                    } else {
                        for (acc, &c) in plain[row..row + shape[2]].iter_mut().zip(&contrib) {
                            *acc += c;
                        }
                    }
                }
            }
        }
        let values = if self.compensated {
            comp.into_iter().map(Compensated::value).collect()
        } else {
            plain
        };
        finish(
            values,
            start,
            Diagnostics {
                terms: (self.pairs.len() * len) as u64,
                ..Default::default()
            },
        )
    }
}

/// Forward transform of a field in raw order, normalized by `(2N+1)^{-d}`.
fn raw_spectrum(plan: &FftPlan, perm: &[usize], f: &[f64]) -> Vec<Complex64> {
    let mut data = vec![Complex64::default(); f.len()];
    for (&q, &v) in perm.iter().zip(f) {
        data[q] = Complex64::new(v, 0.0);
    }
    let mut work = plan.work();
    plan.forward(&mut data, &mut work);
    let scale = 1.0 / f.len() as f64;
    data.iter_mut().for_each(|z| *z *= scale);
    data
}

/// Dense Fourier-space evaluation through [`KernelModeTable`].
#[derive(Clone, Debug)]
pub struct PseudoSpectralDvm {
    modes: Arc<KernelModeTable>,
    plan: FftPlan,
    perm: Vec<usize>,
}

impl PseudoSpectralDvm {
    pub fn new(modes: Arc<KernelModeTable>) -> Self {
        let plan = modes.grid.plan();
        let perm = modes.grid.raw_permutation();
        PseudoSpectralDvm { modes, plan, perm }
    }

    pub fn build(model: &KernelModel, grid: &GridSpec) -> Result<Self> {
        Ok(Self::new(Arc::new(KernelModeTable::build(model, grid)?)))
    }
}

impl CollisionOperator for PseudoSpectralDvm {
    fn kind(&self) -> OperatorKind {
        OperatorKind::PseudoSpectral
    }

    fn grid(&self) -> &GridSpec {
        &self.modes.grid
    }

    fn evaluate(&self, f: &DistributionField) -> Result<CollisionOutput> {
        let grid = &self.modes.grid;
        check_field(grid, f)?;
        let start = Instant::now();
        let len = grid.len();
        let side = grid.side();
        let shape = grid.shape3();
        let spec = raw_spectrum(&self.plan, &self.perm, &f.values);
        let beta = &self.modes.values;
        let diag: Vec<Complex64> = (0..len).map(|q| beta[q * len + q]).collect();
        let coords: Vec<[usize; 3]> = (0..len)
            .map(|q| [q / (shape[1] * shape[2]), (q / shape[2]) % shape[1], q % shape[2]])
            .collect();
        let sub = |a: usize, b: usize, size: usize| if a >= b { a - b } else { a + size - b };
        let mut g = vec![Complex64::default(); len];
        let mut bound = 0.0;
        for (q, gq) in g.iter_mut().enumerate() {
            let cq = coords[q];
            for (qk, ck) in coords.iter().enumerate() {
                let ql = (sub(cq[0], ck[0], shape[0]) * shape[1] + sub(cq[1], ck[1], shape[1])) * shape[2]
                    + sub(cq[2], ck[2], shape[2]);
                let term = (beta[qk * len + ql] - diag[ql]) * spec[qk] * spec[ql];
                *gq += term;
                bound += term.norm();
            }
        }
        debug_assert_eq!(side.pow(grid.dim as u32), len);
        let mut work = self.plan.work();
        self.plan.inverse(&mut g, &mut work);
        let residue = g.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        let tolerance = SPECTRAL_RESIDUE_TOL * bound;
        if residue > tolerance {
            return Err(DvmError::ImaginaryResidue { residue, tolerance });
        }
        let values = self.perm.iter().map(|&q| g[q].re).collect();
        finish(
            values,
            start,
            Diagnostics {
                imag_residue: residue,
                terms: (len * len) as u64,
                transforms: 2,
                fft_calls: 2,
                ..Default::default()
            },
        )
    }
}

/// Direction-decomposed evaluation through [`AlphaTables`].
///
/// Per direction `p` the two real inverse transforms `u_p = F⁻¹(α_p f̃)` and
/// `w_p = F⁻¹(α'_p f̃)` are packed into one complex transform of
/// `(α_p + i α'_p) f̃`; both factors are real because the rows are even.
#[derive(Clone, Debug)]
pub struct FastDvm {
    tables: Arc<AlphaTables>,
    plan: FftPlan,
    perm: Vec<usize>,
    threads: usize,
}

/// Gain `G_i` and loss `L_i` of [`FastDvm`], storage order; `D_i = G_i - L_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GainLoss {
    pub gain: Vec<f64>,
    pub loss: Vec<f64>,
    pub imag_residue: f64,
}

impl FastDvm {
    pub fn new(model: &KernelModel, grid: &GridSpec, tables: Arc<AlphaTables>) -> Result<Self> {
        model.check_grid(grid)?;
        if tables.grid != *grid || tables.model_id != model.id() {
            return Err(DvmError::TablesGridMismatch);
        }
        Ok(FastDvm {
            plan: grid.plan(),
            perm: grid.raw_permutation(),
            tables,
            threads: 1,
        })
    }

    /// Builds the direction set of order `grid.direction_order` and its tables.
    pub fn build(model: &KernelModel, grid: &GridSpec) -> Result<Self> {
        let dirs = enumerate_directions(grid.dim, grid.direction_order)?;
        let tables = AlphaTables::build(model, grid, &dirs)?;
        Self::new(model, grid, Arc::new(tables))
    }

    /// Worker threads for the direction loop. Partial sums over contiguous
    /// blocks of directions are reduced in ascending block order.
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn tables(&self) -> &AlphaTables {
        &self.tables
    }

    pub fn gain_loss(&self, f: &DistributionField) -> Result<GainLoss> {
        check_field(&self.tables.grid, f)?;
        let (gain_raw, loss_raw, residue) = self.raw_parts(&f.values)?;
        Ok(GainLoss {
            gain: self.perm.iter().map(|&q| gain_raw[q]).collect(),
            loss: self
                .perm
                .iter()
                .zip(&f.values)
                .map(|(&q, &fi)| fi * loss_raw[q])
                .collect(),
            imag_residue: residue,
        })
    }

    /// Raw-order gain, raw-order loss frequency `F⁻¹(λ f̃)`, loss residue.
    fn raw_parts(&self, f: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let t = &*self.tables;
        let len = f.len();
        let spec = raw_spectrum(&self.plan, &self.perm, f);

        let mut work = self.plan.work();
        let mut buf: Vec<Complex64> = spec.iter().zip(&t.loss_modes).map(|(z, &l)| z * l).collect();
        self.plan.inverse(&mut buf, &mut work);
        let residue = buf.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        let lmax = t.loss_modes.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tolerance = SPECTRAL_RESIDUE_TOL * lmax * spec.iter().map(|z| z.norm()).sum::<f64>();
        if residue > tolerance {
            return Err(DvmError::ImaginaryResidue { residue, tolerance });
        }
        let loss: Vec<f64> = buf.iter().map(|z| z.re).collect();

        let count = t.alpha.len();
        let block = |range: std::ops::Range<usize>| -> Vec<f64> {
            let mut work = self.plan.work();
            let mut buf = vec![Complex64::default(); len];
            let mut acc = vec![0.0; len];
            for p in range {
                for ((b, z), (&a, &ap)) in buf.iter_mut().zip(&spec).zip(t.alpha[p].iter().zip(&t.alpha_prime[p])) {
                    *b = z * Complex64::new(a, ap);
                }
                self.plan.inverse(&mut buf, &mut work);
                for (g, z) in acc.iter_mut().zip(&buf) {
                    *g += z.re * z.im;
                }
            }
            acc
        };
        let threads = self.threads.min(count.max(1));
        let gain = if threads <= 1 {
            block(0..count)
        } else {
            let chunk = count.div_ceil(threads);
            let partials: Vec<Vec<f64>> = std::thread::scope(|s| {
                let handles: Vec<_> = (0..threads)
                    .map(|b| {
                        let range = (b * chunk).min(count)..((b + 1) * chunk).min(count);
                        let block = &block;
                        s.spawn(move || block(range))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("direction worker panicked")).collect()
            });
            let mut gain = vec![0.0; len];
            for part in &partials {
                for (g, x) in gain.iter_mut().zip(part) {
                    *g += x;
                }
            }
            gain
        };
        Ok((gain, loss, residue))
    }
}

impl CollisionOperator for FastDvm {
    fn kind(&self) -> OperatorKind {
        OperatorKind::Fast
    }

    fn grid(&self) -> &GridSpec {
        &self.tables.grid
    }

    fn evaluate(&self, f: &DistributionField) -> Result<CollisionOutput> {
        check_field(&self.tables.grid, f)?;
        let start = Instant::now();
        let (gain, loss, residue) = self.raw_parts(&f.values)?;
        let values = self
            .perm
            .iter()
            .zip(&f.values)
            .map(|(&q, &fi)| gain[q] - fi * loss[q])
            .collect();
        let a = self.tables.direction_count();
        finish(
            values,
            start,
            Diagnostics {
                imag_residue: residue,
                terms: a as u64,
                transforms: 2 * a + 2,
                fft_calls: a + 2,
                ..Default::default()
            },
        )
    }
}

pub fn dvm_truncated(model: &KernelModel, grid: &GridSpec, f: &DistributionField) -> Result<CollisionOutput> {
    TruncatedDvm::new(model, grid)?.evaluate(f)
}

pub fn dvm_classical(model: &KernelModel, grid: &GridSpec, f: &DistributionField) -> Result<CollisionOutput> {
    ClassicalDvm::new(model, grid)?.evaluate(f)
}

pub fn dvm_pseudospectral(
    model: &KernelModel,
    grid: &GridSpec,
    f: &DistributionField,
    modes: &KernelModeTable,
) -> Result<CollisionOutput> {
    model.check_grid(grid)?;
    modes.check_grid(grid)?;
    PseudoSpectralDvm::new(Arc::new(modes.clone())).evaluate(f)
}

pub fn dvm_fast(
    model: &KernelModel,
    grid: &GridSpec,
    f: &DistributionField,
    tables: Arc<AlphaTables>,
) -> Result<CollisionOutput> {
    FastDvm::new(model, grid, tables)?.evaluate(f)
}

/// Builds any evaluator, precomputing its tables. `threads` only affects the
/// fast operator.
pub fn build_operator(
    kind: OperatorKind,
    model: &KernelModel,
    grid: &GridSpec,
    threads: usize,
) -> Result<Box<dyn CollisionOperator>> {
    Ok(match kind {
        OperatorKind::Truncated => Box::new(TruncatedDvm::new(model, grid)?),
        OperatorKind::Classical => Box::new(ClassicalDvm::new(model, grid)?),
        OperatorKind::PseudoSpectral => Box::new(PseudoSpectralDvm::build(model, grid)?),
        OperatorKind::Fast => Box::new(FastDvm::build(model, grid)?.with_threads(threads)),
    })
}
