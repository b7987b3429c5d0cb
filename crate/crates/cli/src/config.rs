//! TOML configuration files for the `run`, `table1` and `bench` commands.
//!
//! ```toml
//! model = "maxwell2d"        # or "hardsphere3d"
//! operator = "fast"          # truncated | classical | pseudospectral | fast
//! dt = 0.01
//! t_end = 1.0
//!
//! [grid]
//! dim = 2
//! half_nodes = 32
//! box_half_width = 7.0
//! kernel_radius = 7          # optional
//! direction_order = 3        # optional, defaults to kernel_radius
//! ```
//!
//! Unknown keys are rejected.

use std::path::Path;

use fastdvm::{make_grid, GridSpec, KernelModel, OperatorKind, TimeLoopConfig};
use serde::Deserialize;

use crate::error::{config_err, CliError};

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    #[default]
    Maxwell2d,
    Hardsphere3d,
}

impl ModelId {
    pub fn model(self) -> KernelModel {
        match self {
            ModelId::Maxwell2d => KernelModel::Maxwell2D,
            ModelId::Hardsphere3d => KernelModel::HardSphere3D,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum OperatorId {
    Truncated,
    Classical,
    Pseudospectral,
    #[default]
    Fast,
}

impl From<OperatorId> for OperatorKind {
    fn from(id: OperatorId) -> Self {
        match id {
            OperatorId::Truncated => OperatorKind::Truncated,
            OperatorId::Classical => OperatorKind::Classical,
            OperatorId::Pseudospectral => OperatorKind::PseudoSpectral,
            OperatorId::Fast => OperatorKind::Fast,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    /// BKW solution at `t0` (2D Maxwell only).
    #[default]
    Bkw,
    /// Unit-temperature Maxwellian with unit density.
    Maxwellian,
    /// Independent uniform values in `[0.1, 1)` from `seed`.
    Random,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub half_nodes: usize,
    pub box_half_width: f64,
    pub kernel_radius: Option<usize>,
    pub direction_order: Option<usize>,
}

fn default_dim() -> usize {
    2
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec, CliError> {
        make_grid(
            self.dim,
            self.half_nodes,
            self.box_half_width,
            self.kernel_radius,
            self.direction_order,
        )
        .map_err(config_err)
    }
}

fn default_dt() -> f64 {
    0.01
}

fn default_record_every() -> usize {
    1
}

fn default_threads() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub model: ModelId,
    #[serde(default)]
    pub operator: OperatorId,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub clamp_negatives: bool,
    #[serde(default)]
    pub initial: InitialKind,
    /// Record the relative L¹ error against BKW (needs a BKW start).
    #[serde(default)]
    pub compare_bkw: bool,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

/// A config that passed every consistency check.
#[derive(Clone, Debug)]
pub struct ValidatedRun {
    pub grid: GridSpec,
    pub model: KernelModel,
    pub time: TimeLoopConfig,
    pub config: SimulationConfig,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<ValidatedRun, CliError> {
        let grid = self.grid.build()?;
        let model = self.model.model();
        if model.dim() != grid.dim {
            return Err(CliError::Config(format!(
                "model {} needs dim = {}, grid has {}",
                model.name(),
                model.dim(),
                grid.dim
            )));
        }
        let time = TimeLoopConfig {
            dt: self.dt,
            t_end: self.t_end,
            operator: self.operator.into(),
            record_every: self.record_every,
            clamp_negatives: self.clamp_negatives,
        };
        time.validate().map_err(config_err)?;
        if !(self.t0 >= 0.0 && self.t0.is_finite()) {
            return Err(CliError::Config(format!("t0 must be >= 0, got {}", self.t0)));
        }
        let bkw_ok = self.model == ModelId::Maxwell2d;
        if self.initial == InitialKind::Bkw && !bkw_ok {
            return Err(CliError::Config("BKW initial data needs model = maxwell2d".into()));
        }
        if self.compare_bkw && (self.initial != InitialKind::Bkw || !bkw_ok) {
            return Err(CliError::Config("compare_bkw needs initial = \"bkw\"".into()));
        }
        if self.threads == 0 {
            return Err(CliError::Config("threads must be >= 1".into()));
        }
        Ok(ValidatedRun {
            grid,
            model,
            time,
            config: self.clone(),
        })
    }
}

/// One row of the accuracy table.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Table1Row {
    pub half_nodes: usize,
    pub box_half_width: f64,
    pub kernel_radius: Option<usize>,
    /// Evaluate the classical operator for this row.
    #[serde(default = "yes")]
    pub classical: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Table1Config {
    #[serde(default)]
    pub model: ModelId,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Number of steps from BKW(t0).
    #[serde(default = "one")]
    pub steps: usize,
    #[serde(default)]
    pub t0: f64,
    pub direction_orders: Vec<usize>,
    /// Cells whose projected cost exceeds this many seconds are skipped.
    pub cell_cap_seconds: Option<f64>,
    pub rows: Vec<Table1Row>,
}

fn one() -> usize {
    1
}

impl Table1Config {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.model != ModelId::Maxwell2d {
            return Err(CliError::Config("table1 compares against BKW; use maxwell2d".into()));
        }
        if !(self.dt > 0.0) || self.steps == 0 {
            return Err(CliError::Config("table1 needs dt > 0 and steps >= 1".into()));
        }
        if self.rows.is_empty() || self.direction_orders.is_empty() {
            return Err(CliError::Config("table1 needs rows and direction_orders".into()));
        }
        if self.direction_orders.contains(&0) {
            return Err(CliError::Config("direction orders must be >= 1".into()));
        }
        for row in &self.rows {
            make_grid(2, row.half_nodes, row.box_half_width, row.kernel_radius, Some(1)).map_err(config_err)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BenchGrid {
    pub half_nodes: usize,
    pub box_half_width: f64,
    pub kernel_radius: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NodeSweep {
    pub direction_order: usize,
    pub half_nodes: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OrderSweep {
    pub half_nodes: usize,
    pub direction_orders: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpeedupCell {
    pub half_nodes: usize,
    pub direction_order: usize,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub model: ModelId,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "one")]
    pub warmup: usize,
    #[serde(default = "five")]
    pub repeats: usize,
    pub grids: Vec<BenchGrid>,
    pub node_sweep: Option<NodeSweep>,
    pub order_sweep: Option<OrderSweep>,
    pub speedup: Option<SpeedupCell>,
}

fn five() -> usize {
    5
}

impl BenchConfig {
    pub fn grid(&self, half_nodes: usize, direction_order: usize) -> Result<GridSpec, CliError> {
        let g = self
            .grids
            .iter()
            .find(|g| g.half_nodes == half_nodes)
            .ok_or_else(|| CliError::Config(format!("no [[grids]] entry with half_nodes = {half_nodes}")))?;
        let dim = self.model.model().dim();
        make_grid(dim, g.half_nodes, g.box_half_width, g.kernel_radius, Some(direction_order)).map_err(config_err)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.repeats == 0 || !(self.dt > 0.0) {
            return Err(CliError::Config("bench needs repeats >= 1 and dt > 0".into()));
        }
        if let Some(s) = &self.node_sweep {
            for &n in &s.half_nodes {
                self.grid(n, s.direction_order)?;
            }
        }
        if let Some(s) = &self.order_sweep {
            for &o in &s.direction_orders {
                self.grid(s.half_nodes, o)?;
            }
        }
        if let Some(s) = &self.speedup {
            self.grid(s.half_nodes, s.direction_order)?;
        }
        Ok(())
    }
}
