//! SSP-RK2 (Heun) time stepping of `∂_t f = D(f, f)` with recorded diagnostics.

use std::io::Write;
use std::time::{Duration, Instant};

use crate::collision::{CollisionOperator, OperatorKind};
use crate::error::{DvmError, Result};
use crate::lattice::{format_sig17, moments, DistributionField, MomentReport};

#[derive(Clone, Debug, PartialEq)]
pub struct TimeLoopConfig {
    pub dt: f64,
    pub t_end: f64,
    pub operator: OperatorKind,
    /// Record every this many steps; the final state is always recorded.
    pub record_every: usize,
    pub clamp_negatives: bool,
}

impl Default for TimeLoopConfig {
    fn default() -> Self {
        TimeLoopConfig {
            dt: 0.01,
            t_end: 1.0,
            operator: OperatorKind::Fast,
            record_every: 1,
            clamp_negatives: false,
        }
    }
}

impl TimeLoopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(DvmError::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(DvmError::InvalidParameter(format!(
                "t_end must be >= 0, got {}",
                self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(DvmError::InvalidParameter("record_every must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of steps; a final partial step absorbs a `t_end` that is not a
    /// multiple of `dt` (up to a relative slack of 1e-9).
    pub fn step_count(&self) -> usize {
        let r = self.t_end / self.dt;
        let n = r.round();
        if (r - n).abs() <= 1e-9 * r.max(1.0) {
            n as usize
        } else {
            r.ceil() as usize
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub moments: Vec<MomentReport>,
    /// Relative L¹ errors against the reference, when one was supplied.
    pub l1_errors: Option<Vec<f64>>,
    pub final_field: DistributionField,
    /// Total `h^d Σ |f_i|` removed by clamping negative values.
    pub clamped_mass: f64,
}

/// One SSP-RK2 step on a plain state vector:
/// `y¹ = y + dt F(y)`, `y_next = ½ y + ½ (y¹ + dt F(y¹))`.
pub fn heun_step<F>(y: &[f64], dt: f64, mut rhs: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let d0 = rhs(y)?;
    let y1: Vec<f64> = y.iter().zip(&d0).map(|(a, b)| a + dt * b).collect();
    let d1 = rhs(&y1)?;
    let next: Vec<f64> = y
        .iter()
        .zip(y1.iter().zip(&d1))
        .map(|(a, (b, c))| 0.5 * a + 0.5 * (b + dt * c))
        .collect();
    if let Some(pos) = next.iter().position(|v| !v.is_finite()) {
        return Err(DvmError::NonFiniteField(pos));
    }
    Ok(next)
}

/// One SSP-RK2 step of `∂_t f = D(f, f)`.
pub fn rk2_step(f: &DistributionField, dt: f64, op: &dyn CollisionOperator) -> Result<DistributionField> {
    if !(dt > 0.0) {
        return Err(DvmError::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let grid = &f.grid;
    let next = heun_step(&f.values, dt, |y| {
        let field = DistributionField::new(grid.clone(), y.to_vec())?;
        Ok(op.evaluate(&field)?.values)
    })?;
    DistributionField::new(grid.clone(), next)
}

/// Reference solution `t ↦ g(t)` used for error recording.
pub type Reference<'a> = &'a dyn Fn(f64) -> Result<DistributionField>;

/// Advances `initial` from `t0` to `t0 + t_end`. An optional wall-clock
/// budget aborts with [`DvmError::BudgetExceeded`].
pub fn run(
    op: &dyn CollisionOperator,
    initial: DistributionField,
    t0: f64,
    cfg: &TimeLoopConfig,
    reference: Option<Reference<'_>>,
    budget: Option<Duration>,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    if !initial.grid.same_lattice(op.grid()) {
        return Err(DvmError::FieldGridMismatch);
    }
    let start = Instant::now();
    let steps = cfg.step_count();
    let cell = initial.grid.step.powi(initial.grid.dim as i32);
    let mut rec = TrajectoryRecord {
        times: Vec::new(),
        moments: Vec::new(),
        l1_errors: reference.map(|_| Vec::new()),
        final_field: initial,
        clamped_mass: 0.0,
    };
    let record = |rec: &mut TrajectoryRecord, t: f64| -> Result<()> {
        rec.times.push(t);
        rec.moments.push(moments(&rec.final_field));
        if let (Some(errs), Some(g)) = (rec.l1_errors.as_mut(), reference) {
            errs.push(crate::validation::rel_l1_error(&rec.final_field, &g(t)?)?.rel_l1);
        }
        Ok(())
    };
    record(&mut rec, t0)?;
    for step in 1..=steps {
        let t_prev = t0 + (step - 1) as f64 * cfg.dt;
        let t = (t0 + step as f64 * cfg.dt).min(t0 + cfg.t_end);
        let mut next = rk2_step(&rec.final_field, t - t_prev, op)?;
        if cfg.clamp_negatives {
            for v in next.values.iter_mut().filter(|v| **v < 0.0) {
                rec.clamped_mass += -*v * cell;
                *v = 0.0;
            }
        }
        rec.final_field = next;
        if step % cfg.record_every == 0 || step == steps {
            record(&mut rec, t)?;
        }
        if let Some(b) = budget {
            if step < steps && start.elapsed() > b {
                return Err(DvmError::BudgetExceeded {
                    budget_s: b.as_secs_f64(),
                });
            }
        }
    }
    Ok(rec)
}

/// Trajectory CSV: `t,mass,px,py[,pz],energy,entropy,min_f,neg_mass_frac[,l1_error]`.
pub fn write_trajectory_csv<W: Write>(rec: &TrajectoryRecord, mut w: W) -> Result<()> {
    let dim = rec.final_field.grid.dim;
    let mut header = vec!["t", "mass", "px", "py"];
    if dim == 3 {
        header.push("pz");
    }
    header.extend(["energy", "entropy", "min_f", "neg_mass_frac"]);
    if rec.l1_errors.is_some() {
        header.push("l1_error");
    }
    writeln!(w, "{}", header.join(","))?;
    for (row, (t, m)) in rec.times.iter().zip(&rec.moments).enumerate() {
        let mut cells = vec![format_sig17(*t), format_sig17(m.mass)];
        cells.extend(m.momentum.iter().map(|p| format_sig17(*p)));
        cells.extend([m.energy, m.entropy, m.min_value, m.negative_mass_fraction].map(format_sig17));
        if let Some(errs) = &rec.l1_errors {
            cells.push(format_sig17(errs[row]));
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::{build_operator, CollisionOutput, Diagnostics};
    use crate::kernel::KernelModel;
    use crate::lattice::{make_grid, GridSpec};
    use crate::validation::sample_bkw;

    struct Zero(GridSpec);

    impl CollisionOperator for Zero {
        fn kind(&self) -> OperatorKind {
            OperatorKind::Classical
        }
        fn grid(&self) -> &GridSpec {
            &self.0
        }
        fn evaluate(&self, f: &DistributionField) -> Result<CollisionOutput> {
            Ok(CollisionOutput {
                values: vec![0.0; f.values.len()],
                diagnostics: Diagnostics::default(),
            })
        }
    }

    #[test]
    fn scalar_decay_step() {
        let y = heun_step(&[1.0], 0.1, |y| Ok(vec![-y[0]])).unwrap();
        assert!((y[0] - 0.905).abs() < 1e-15);
    }

    #[test]
    fn zero_operator_leaves_field_unchanged() {
        let grid = make_grid(2, 8, 5.0, None, None).unwrap();
        let f = sample_bkw(&grid, 0.0).unwrap();
        let next = rk2_step(&f, 0.01, &Zero(grid)).unwrap();
        assert_eq!(next.values, f.values);
    }

    #[test]
    fn overflow_is_reported() {
        let err = heun_step(&[1.0], 1e300, |y| Ok(vec![y[0] * 1e300])).unwrap_err();
        assert_eq!(err, DvmError::NonFiniteField(0));
    }

    #[test]
    fn one_step_conserves_mass() {
        let grid = make_grid(2, 16, 5.5, None, None).unwrap();
        let f = sample_bkw(&grid, 0.0).unwrap();
        let op = build_operator(OperatorKind::Fast, &KernelModel::Maxwell2D, &grid, 1).unwrap();
        let next = rk2_step(&f, 0.01, op.as_ref()).unwrap();
        assert!((moments(&next).mass - moments(&f).mass).abs() < 1e-14);
    }

    #[test]
    fn run_records_and_writes_csv() {
        let grid = make_grid(2, 8, 5.0, None, None).unwrap();
        let op = build_operator(OperatorKind::Classical, &KernelModel::Maxwell2D, &grid, 1).unwrap();
        let cfg = TimeLoopConfig {
            dt: 0.01,
            t_end: 0.05,
            operator: OperatorKind::Classical,
            record_every: 2,
            clamp_negatives: false,
        };
        let g = grid.clone();
        let exact = move |t: f64| sample_bkw(&g, t);
        let rec = run(op.as_ref(), sample_bkw(&grid, 0.0).unwrap(), 0.0, &cfg, Some(&exact), None).unwrap();
        assert_eq!(rec.times.len(), 4);
        assert!((rec.times[3] - 0.05).abs() < 1e-15);
        assert_eq!(rec.l1_errors.as_ref().unwrap()[0], 0.0);
        let mut out = Vec::new();
        write_trajectory_csv(&rec, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,mass,px,py,energy,entropy,min_f,neg_mass_frac,l1_error"
        );
        assert_eq!(lines.count(), 4);
    }

    #[test]
    fn zero_horizon_records_initial_state() {
        let grid = make_grid(2, 8, 5.0, None, None).unwrap();
        let cfg = TimeLoopConfig {
            t_end: 0.0,
            ..Default::default()
        };
        let f = sample_bkw(&grid, 0.0).unwrap();
        let rec = run(&Zero(grid), f.clone(), 0.0, &cfg, None, None).unwrap();
        assert_eq!(rec.times, vec![0.0]);
        assert_eq!(rec.final_field, f);
    }

    #[test]
    fn clamping_reports_removed_mass() {
        let grid = make_grid(2, 4, 2.0, None, None).unwrap();
        let mut f = DistributionField::zeros(grid.clone());
        f.values[0] = -0.5;
        let cfg = TimeLoopConfig {
            dt: 0.1,
            t_end: 0.1,
            clamp_negatives: true,
            ..Default::default()
        };
        let rec = run(&Zero(grid.clone()), f, 0.0, &cfg, None, None).unwrap();
        assert!((rec.clamped_mass - 0.5 * grid.step * grid.step).abs() < 1e-15);
        assert!(rec.final_field.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn config_validation_and_step_count() {
        let bad = TimeLoopConfig {
            dt: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let cfg = TimeLoopConfig {
            dt: 0.01,
            t_end: 1.0,
            ..Default::default()
        };
        assert_eq!(cfg.step_count(), 100);
        let partial = TimeLoopConfig {
            dt: 0.3,
            t_end: 1.0,
            ..Default::default()
        };
        assert_eq!(partial.step_count(), 4);
    }
}
