//! Wall-clock timing of one SSP-RK2 step and complexity fits.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fastdvm::collision::{build_operator, CollisionOperator, OperatorKind};
use fastdvm::validation::maxwellian;
use fastdvm::{enumerate_directions, rk2_step, sample_bkw, DistributionField, GridSpec, KernelModel};

use crate::config::{load, BenchConfig};
use crate::{create_output, CliError, Deadline, GlobalOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct Timing {
    pub samples: Vec<f64>,
    pub median_s: f64,
    pub min_s: f64,
    pub max_s: f64,
}

impl Timing {
    pub fn from_samples(mut samples: Vec<f64>) -> Timing {
        assert!(!samples.is_empty());
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        let median_s = if n % 2 == 1 {
            samples[n / 2]
        } else {
            0.5 * (samples[n / 2 - 1] + samples[n / 2])
        };
        Timing {
            median_s,
            min_s: samples[0],
            max_s: samples[n - 1],
            samples,
        }
    }
}

/// Median over `repeats` timed RK2 steps after `warmup` untimed ones.
pub fn time_rk2(
    op: &dyn CollisionOperator,
    f: &DistributionField,
    dt: f64,
    warmup: usize,
    repeats: usize,
) -> Result<Timing, CliError> {
    for _ in 0..warmup {
        rk2_step(f, dt, op)?;
    }
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        let next = rk2_step(f, dt, op)?;
        samples.push(t.elapsed().as_secs_f64());
        std::hint::black_box(next);
    }
    Ok(Timing::from_samples(samples))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `(N₂² ln N₂) / (N₁² ln N₁)`.
pub fn n2logn_ratio(n1: usize, n2: usize) -> f64 {
    let g = |n: usize| (n * n) as f64 * (n as f64).ln();
    g(n2) / g(n1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchCell {
    pub operator: OperatorKind,
    pub grid: GridSpec,
    /// Direction count for the fast operator, 0 for the classical one.
    pub directions: usize,
    pub timing: Timing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub name: String,
    pub value: f64,
    pub low: f64,
    pub high: f64,
}

impl Fit {
    pub fn holds(&self) -> bool {
        self.value >= self.low && self.value <= self.high
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub cells: Vec<BenchCell>,
    pub fits: Vec<Fit>,
}

impl BenchReport {
    pub fn write_cells_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "operator,N,Ntilde,Nbar,directions,median_s,min_s,max_s,repeats")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{},{:.6e},{:.6e},{:.6e},{}",
                c.operator,
                c.grid.half_nodes,
                c.grid.kernel_radius,
                c.grid.direction_order,
                c.directions,
                c.timing.median_s,
                c.timing.min_s,
                c.timing.max_s,
                c.timing.samples.len()
            )?;
        }
        Ok(())
    }

    pub fn write_fits_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "fit,value,low,high,holds")?;
        for f in &self.fits {
            writeln!(w, "{},{:.6e},{:.6e},{:.6e},{}", f.name, f.value, f.low, f.high, f.holds())?;
        }
        Ok(())
    }

    fn median(&self, operator: OperatorKind, half_nodes: usize, order: Option<usize>) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| {
                c.operator == operator
                    && c.grid.half_nodes == half_nodes
                    && order.is_none_or(|o| c.grid.direction_order == o)
            })
            .map(|c| c.timing.median_s)
    }
}

fn start_field(model: &KernelModel, grid: &GridSpec) -> Result<DistributionField, CliError> {
    Ok(match model {
        KernelModel::Maxwell2D => sample_bkw(grid, 0.0)?,
        _ => maxwellian(grid, 1.0, &vec![0.0; grid.dim], 1.0)?,
    })
}

/// Times one cell.
pub fn time_cell(
    kind: OperatorKind,
    model: &KernelModel,
    grid: &GridSpec,
    dt: f64,
    warmup: usize,
    repeats: usize,
    threads: usize,
) -> Result<BenchCell, CliError> {
    let op = build_operator(kind, model, grid, threads)?;
    let f = start_field(model, grid)?;
    let timing = time_rk2(op.as_ref(), &f, dt, warmup, repeats)?;
    let directions = if kind == OperatorKind::Fast {
        enumerate_directions(grid.dim, grid.direction_order)?.len()
    } else {
        0
    };
    Ok(BenchCell {
        operator: kind,
        grid: grid.clone(),
        directions,
        timing,
    })
}

pub fn compute(cfg: &BenchConfig, opts: &GlobalOptions) -> Result<BenchReport, CliError> {
    cfg.validate()?;
    let deadline = Deadline::new(opts.budget);
    let model = cfg.model.model();
    let threads = opts.threads(1, false);

    let mut wanted: BTreeSet<(usize, usize, bool)> = BTreeSet::new();
    if let Some(s) = &cfg.node_sweep {
        for &n in &s.half_nodes {
            wanted.insert((n, s.direction_order, false));
        }
    }
    if let Some(s) = &cfg.order_sweep {
        for &o in &s.direction_orders {
            wanted.insert((s.half_nodes, o, false));
        }
    }
    if let Some(s) = &cfg.speedup {
        wanted.insert((s.half_nodes, s.direction_order, false));
        wanted.insert((s.half_nodes, 0, true));
    }

    let mut report = BenchReport {
        cells: Vec::new(),
        fits: Vec::new(),
    };
    for &(n, order, classical) in &wanted {
        deadline.check("bench")?;
        let (kind, grid) = if classical {
            (OperatorKind::Classical, cfg.grid(n, 1)?)
        } else {
            (OperatorKind::Fast, cfg.grid(n, order)?)
        };
        report
            .cells
            .push(time_cell(kind, &model, &grid, cfg.dt, cfg.warmup, cfg.repeats, threads)?);
    }

    if let Some(s) = &cfg.node_sweep {
        let times: Vec<f64> = s
            .half_nodes
            .iter()
            .map(|&n| report.median(OperatorKind::Fast, n, Some(s.direction_order)).expect("timed"))
            .collect();
        for (w, t) in s.half_nodes.windows(2).zip(times.windows(2)) {
            let predicted = n2logn_ratio(w[0], w[1]);
            report.fits.push(Fit {
                name: format!("time_ratio_N{}_N{}", w[1], w[0]),
                value: t[1] / t[0],
                low: predicted / 2.0,
                high: predicted * 2.0,
            });
        }
    }
    if let Some(s) = &cfg.order_sweep {
        let xs: Vec<f64> = s.direction_orders.iter().map(|&o| o as f64).collect();
        let ys: Vec<f64> = s
            .direction_orders
            .iter()
            .map(|&o| report.median(OperatorKind::Fast, s.half_nodes, Some(o)).expect("timed"))
            .collect();
        report.fits.push(Fit {
            name: format!("direction_order_exponent_N{}", s.half_nodes),
            value: loglog_slope(&xs, &ys),
            low: 1.5,
            high: 2.3,
        });
    }
    if let Some(s) = &cfg.speedup {
        let classical = report.median(OperatorKind::Classical, s.half_nodes, None).expect("timed");
        let fast = report
            .median(OperatorKind::Fast, s.half_nodes, Some(s.direction_order))
            .expect("timed");
        report.fits.push(Fit {
            name: format!("speedup_N{}_Nbar{}", s.half_nodes, s.direction_order),
            value: classical / fast,
            low: 10.0,
            high: f64::INFINITY,
        });
    }
    Ok(report)
}

pub fn cmd_bench(path: &Path, opts: &GlobalOptions) -> Result<(BenchReport, PathBuf, PathBuf), CliError> {
    let cfg: BenchConfig = load(path)?;
    let report = compute(&cfg, opts)?;
    let prefix = opts.prefix(None, "fastdvm");
    let (cells_path, mut w) = create_output(&prefix, "bench")?;
    report.write_cells_csv(&mut w)?;
    w.flush()?;
    let (fits_path, mut w) = create_output(&prefix, "fits")?;
    report.write_fits_csv(&mut w)?;
    w.flush()?;
    Ok((report, cells_path, fits_path))
}
