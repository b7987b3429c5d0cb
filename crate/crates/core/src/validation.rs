//! Exact BKW solution for 2D Maxwell molecules, error norms and Maxwellians.

use std::f64::consts::PI;

use crate::error::{DvmError, Result};
use crate::lattice::{DistributionField, GridSpec};

/// `S(t) = 1 - exp(-t/8)/2`.
pub fn bkw_s(t: f64) -> f64 {
    1.0 - (-t / 8.0).exp() / 2.0
}

/// `f(t, v) = exp(-|v|²/2S) / (2π S²) · [2S - 1 + (1 - S)|v|²/(2S)]`.
pub fn bkw(t: f64, v: &[f64]) -> f64 {
    let s = bkw_s(t);
    let v2: f64 = v.iter().map(|x| x * x).sum();
    (-v2 / (2.0 * s)).exp() / (2.0 * PI * s * s) * (2.0 * s - 1.0 + (1.0 - s) * v2 / (2.0 * s))
}

/// Nodal samples of the BKW solution at time `t` on a 2D grid.
pub fn sample_bkw(grid: &GridSpec, t: f64) -> Result<DistributionField> {
    if grid.dim != 2 {
        return Err(DvmError::InvalidDimension(grid.dim));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(DvmError::InvalidParameter(format!("BKW time must be >= 0, got {t}")));
    }
    DistributionField::from_fn(grid.clone(), |v| bkw(t, v))
}

/// `ρ (2πθ)^{-d/2} exp(-|v - u|²/2θ)` sampled on the grid.
pub fn maxwellian(grid: &GridSpec, density: f64, mean: &[f64], temperature: f64) -> Result<DistributionField> {
    if mean.len() != grid.dim {
        return Err(DvmError::ShapeMismatch {
            expected: grid.dim,
            got: mean.len(),
        });
    }
    if !(temperature > 0.0 && density >= 0.0) {
        return Err(DvmError::InvalidParameter(
            "Maxwellian needs temperature > 0 and density >= 0".into(),
        ));
    }
    let norm = density * (2.0 * PI * temperature).powf(-(grid.dim as f64) / 2.0);
    DistributionField::from_fn(grid.clone(), |v| {
        let d2: f64 = v.iter().zip(mean).map(|(x, m)| (x - m) * (x - m)).sum();
        norm * (-d2 / (2.0 * temperature)).exp()
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    /// `Σ|f_i - g_i| / Σ|f_i|`.
    pub rel_l1: f64,
    /// `max |f_i - g_i|`.
    pub linf: f64,
    pub time: f64,
}

/// Relative L¹ error of the computed field `f` against the reference `g`,
/// normalized by the computed field. `time` is left at 0.
pub fn rel_l1_error(f: &DistributionField, g: &DistributionField) -> Result<ErrorReport> {
    if !f.grid.same_lattice(&g.grid) {
        return Err(DvmError::FieldGridMismatch);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut linf = 0.0f64;
    for (a, b) in f.values.iter().zip(&g.values) {
        let d = (a - b).abs();
        num += d;
        den += a.abs();
        linf = linf.max(d);
    }
    if den == 0.0 {
        return Err(DvmError::ZeroDenominator);
    }
    Ok(ErrorReport {
        rel_l1: num / den,
        linf,
        time: 0.0,
    })
}

/// Error of `f` against BKW sampled at time `t`.
pub fn bkw_error(f: &DistributionField, t: f64) -> Result<ErrorReport> {
    let exact = sample_bkw(&f.grid, t)?;
    Ok(ErrorReport {
        time: t,
        ..rel_l1_error(f, &exact)?
    })
}
