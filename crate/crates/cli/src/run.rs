use std::io::Write;
use std::path::{Path, PathBuf};

use fastdvm::collision::{build_operator, CollisionOperator};
use fastdvm::integrator::write_trajectory_csv;
use fastdvm::validation::maxwellian;
use fastdvm::{run, sample_bkw, DistributionField, GridSpec, TrajectoryRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{load, InitialKind, SimulationConfig, ValidatedRun};
use crate::{create_output, CliError, Deadline, GlobalOptions};

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub record: TrajectoryRecord,
    /// `(m_end - m_0) / m_0`.
    pub mass_drift: f64,
    pub final_error: Option<f64>,
    pub trajectory_path: PathBuf,
    pub final_field_path: PathBuf,
}

impl RunSummary {
    pub fn line(&self) -> String {
        let t = self.record.times.last().copied().unwrap_or(0.0);
        let mut s = format!(
            "t={t:.6} records={} mass_drift={:.3e}",
            self.record.times.len(),
            self.mass_drift
        );
        if let Some(e) = self.final_error {
            s.push_str(&format!(" l1_error={e:.6e}"));
        }
        if self.record.clamped_mass > 0.0 {
            s.push_str(&format!(" clamped_mass={:.3e}", self.record.clamped_mass));
        }
        s
    }
}

pub fn initial_field(cfg: &SimulationConfig, grid: &GridSpec) -> Result<DistributionField, CliError> {
    Ok(match cfg.initial {
        InitialKind::Bkw => sample_bkw(grid, cfg.t0)?,
        InitialKind::Maxwellian => maxwellian(grid, 1.0, &vec![0.0; grid.dim], 1.0)?,
        InitialKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let values = (0..grid.len()).map(|_| rng.gen_range(0.1..1.0)).collect();
            DistributionField::new(grid.clone(), values)?
        }
    })
}

/// Builds the operator and advances the configured initial field.
pub fn execute(v: &ValidatedRun, opts: &GlobalOptions) -> Result<TrajectoryRecord, CliError> {
    let deadline = Deadline::new(opts.budget);
    let threads = opts.threads(v.config.threads, v.config.deterministic);
    let op: Box<dyn CollisionOperator> = build_operator(v.time.operator, &v.model, &v.grid, threads)?;
    deadline.check("operator setup")?;
    let f0 = initial_field(&v.config, &v.grid)?;
    let grid = v.grid.clone();
    let exact = move |t: f64| sample_bkw(&grid, t);
    let reference: Option<&dyn Fn(f64) -> fastdvm::Result<DistributionField>> =
        if v.config.compare_bkw { Some(&exact) } else { None };
    Ok(run(op.as_ref(), f0, v.config.t0, &v.time, reference, deadline.remaining())?)
}

pub fn cmd_run(path: &Path, opts: &GlobalOptions) -> Result<RunSummary, CliError> {
    let cfg: SimulationConfig = load(path)?;
    let v = cfg.validate()?;
    let record = execute(&v, opts)?;
    let prefix = opts.prefix(cfg.output.as_deref(), "fastdvm_run");

    let (trajectory_path, mut w) = create_output(&prefix, "trajectory")?;
    write_trajectory_csv(&record, &mut w)?;
    w.flush()?;
    let (final_field_path, mut w) = create_output(&prefix, "final")?;
    record.final_field.write_csv(&mut w)?;
    w.flush()?;

    let m0 = record.moments.first().map_or(0.0, |m| m.mass);
    let m1 = record.moments.last().map_or(0.0, |m| m.mass);
    let mass_drift = if m0 != 0.0 { (m1 - m0) / m0 } else { m1 - m0 };
    let final_error = record.l1_errors.as_ref().and_then(|e| e.last().copied());
    Ok(RunSummary {
        record,
        mass_drift,
        final_error,
        trajectory_path,
        final_field_path,
    })
}
