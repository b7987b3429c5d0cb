//! Relative L¹ error against BKW after a few SSP-RK2 steps, for the
//! classical operator and the fast operator at several direction orders.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fastdvm::collision::{build_operator, CollisionOperator, OperatorKind};
use fastdvm::lattice::format_sig17;
use fastdvm::validation::bkw_error;
use fastdvm::{make_grid, rk2_step, sample_bkw, GridSpec, KernelModel};

use crate::config::{load, Table1Config};
use crate::error::config_err;
use crate::{create_output, CliError, Deadline, GlobalOptions};

/// Error of `steps` RK2 steps of size `dt` started from BKW(`t0`), measured
/// against BKW at the final time.
pub fn bkw_step_error(op: &dyn CollisionOperator, dt: f64, steps: usize, t0: f64) -> Result<f64, CliError> {
    let mut f = sample_bkw(op.grid(), t0)?;
    for _ in 0..steps {
        f = rk2_step(&f, dt, op)?;
    }
    Ok(bkw_error(&f, t0 + steps as f64 * dt)?.rel_l1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table1Line {
    pub half_nodes: usize,
    pub box_half_width: f64,
    pub kernel_radius: usize,
    pub classical: Option<f64>,
    /// One entry per configured direction order; `None` prints as `x`.
    pub fast: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table1 {
    pub direction_orders: Vec<usize>,
    pub lines: Vec<Table1Line>,
}

impl Table1 {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["N".to_string(), "T".into(), "Ntilde".into(), "classical".into()];
        header.extend(self.direction_orders.iter().map(|o| format!("fast_{o}")));
        writeln!(w, "{}", header.join(","))?;
        let cell = |v: Option<f64>| v.map_or_else(|| "x".to_string(), format_sig17);
        for line in &self.lines {
            let mut row = vec![
                line.half_nodes.to_string(),
                line.box_half_width.to_string(),
                line.kernel_radius.to_string(),
                cell(line.classical),
            ];
            row.extend(line.fast.iter().map(|&v| cell(v)));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Runs one cell unless its projected cost exceeds `cap_s`: the first
/// operator evaluation is timed and scaled to the `2 * steps` evaluations.
fn run_cell(
    kind: OperatorKind,
    model: &KernelModel,
    grid: &GridSpec,
    cfg: &Table1Config,
    threads: usize,
) -> Result<Option<f64>, CliError> {
    let op = build_operator(kind, model, grid, threads)?;
    if let Some(cap) = cfg.cell_cap_seconds {
        let probe = Instant::now();
        op.evaluate(&sample_bkw(grid, cfg.t0)?)?;
        let projected = probe.elapsed().as_secs_f64() * 2.0 * cfg.steps as f64;
        if projected > cap {
            eprintln!(
                "skipping {kind} N={} (projected {projected:.1} s > cap {cap} s)",
                grid.half_nodes
            );
            return Ok(None);
        }
    }
    bkw_step_error(op.as_ref(), cfg.dt, cfg.steps, cfg.t0).map(Some)
}

pub fn compute(cfg: &Table1Config, opts: &GlobalOptions) -> Result<Table1, CliError> {
    cfg.validate()?;
    let deadline = Deadline::new(opts.budget);
    let model = cfg.model.model();
    let threads = opts.threads(1, false);
    let mut table = Table1 {
        direction_orders: cfg.direction_orders.clone(),
        lines: Vec::new(),
    };
    for row in &cfg.rows {
        let base = make_grid(2, row.half_nodes, row.box_half_width, row.kernel_radius, None).map_err(config_err)?;
        let radius = base.kernel_radius;
        let classical = if row.classical {
            deadline.check("table1")?;
            run_cell(OperatorKind::Classical, &model, &base, cfg, threads)?
        } else {
            None
        };
        let mut fast = Vec::new();
        for &order in &cfg.direction_orders {
            if order > radius {
                fast.push(None);
                continue;
            }
            deadline.check("table1")?;
            let grid = base.with_truncation(radius, order).map_err(config_err)?;
            fast.push(run_cell(OperatorKind::Fast, &model, &grid, cfg, threads)?);
        }
        table.lines.push(Table1Line {
            half_nodes: row.half_nodes,
            box_half_width: row.box_half_width,
            kernel_radius: radius,
            classical,
            fast,
        });
    }
    Ok(table)
}

pub fn cmd_table1(path: &Path, opts: &GlobalOptions) -> Result<(Table1, PathBuf), CliError> {
    let cfg: Table1Config = load(path)?;
    let table = compute(&cfg, opts)?;
    let prefix = opts.prefix(None, "fastdvm");
    let (out, mut w) = create_output(&prefix, "table1")?;
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok((table, out))
}
