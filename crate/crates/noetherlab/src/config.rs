//! Run configuration for simulations: JSON in, a fully wired run out.
//!
//! ```json
//! {
//!   "model": {"entry": "powG-H0-lam4"},
//!   "params": {"alpha": -1.0},
//!   "grid": {"n": 400, "length": 6.2832, "boundary": "periodic"},
//!   "ic": {"kind": "gaussian_velocity", "slope": 1.0, "amplitude": 0.08,
//!          "center": 0.5, "width": 0.09},
//!   "monitors": [{"name": "energy"}, {"name": "proj", "generator": "X7"}],
//!   "dt": null,
//!   "t_end": 1.0,
//!   "snapshots": 3,
//!   "seed": 42
//! }
//! ```
//!
//! `model` is either `{"entry": NAME}` (a catalog case) or an inline
//! `{"g": ..., "h": ..., "domain": ...}` document.  Monitors name a
//! builtin current (`energy`, `momentum`, `mass-flux`, `center-of-mass`),
//! reference a generator of the catalog entry, or carry inline generator
//! coefficients; each is derived through the Noether machinery at setup,
//! so a non-variational choice is a configuration error.

use crate::expr::parse_expr;
use crate::model::{ModelSpec, RawModel};
use crate::noether::{noether_current, ConservedCurrent};
use crate::rng::Srng;
use crate::solver::{
    cfl_dt, step, Boundary, EulerianFields, Grid, InitialCondition, Monitor, MonitorSeries,
    NumericModel, SolverState,
};
use crate::symmetry::{entry, Generator};
use std::collections::BTreeMap;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    Entry { entry: String },
    Inline(RawModel),
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MonitorConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_s: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<String>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    pub model: ModelSource,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub grid: GridConfig,
    pub ic: InitialCondition,
    #[serde(default)]
    pub monitors: Vec<MonitorConfig>,
    /// Fixed time step; `null` steps at 0.75 of the running stability
    /// bound.
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Number of evenly spaced field snapshots to keep (ends included).
    #[serde(default)]
    pub snapshots: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Invalid(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("unknown generator `{0}` (entry {1})")]
    UnknownGenerator(String, String),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error(transparent)]
    Noether(#[from] crate::noether::NoetherError),
    #[error(transparent)]
    Symmetry(#[from] crate::symmetry::SymmetryError),
    #[error(transparent)]
    Expr(#[from] crate::expr::ExprError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl SimConfig {
    pub fn from_json(src: &str) -> Result<SimConfig, ConfigError> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn model_spec(&self) -> Result<ModelSpec, ConfigError> {
        match &self.model {
            ModelSource::Entry { entry: name } => entry(name)
                .map(|e| e.model.clone())
                .ok_or_else(|| ConfigError::UnknownEntry(name.clone())),
            ModelSource::Inline(raw) => Ok(ModelSpec::from_raw(raw)?),
        }
    }

    fn resolve_generator(
        &self,
        mc: &MonitorConfig,
        m: &ModelSpec,
    ) -> Result<Generator, ConfigError> {
        if let Some(gname) = &mc.generator {
            let ModelSource::Entry { entry: ename } = &self.model else {
                return Err(ConfigError::Invalid(
                    "generator-by-name monitors need a catalog-entry model".into(),
                ));
            };
            let e = entry(ename).ok_or_else(|| ConfigError::UnknownEntry(ename.clone()))?;
            return e
                .generator(gname)
                .cloned()
                .ok_or_else(|| ConfigError::UnknownGenerator(gname.clone(), ename.clone()));
        }
        if let (Some(xt), Some(xs), Some(eta)) = (&mc.xi_t, &mc.xi_s, &mc.eta) {
            let table = m.domain.symbol_table();
            return Ok(Generator::new(
                &mc.name,
                parse_expr(xt, &table)?,
                parse_expr(xs, &table)?,
                parse_expr(eta, &table)?,
            )?);
        }
        // builtin names
        let t = Default::default();
        let (xt, xs, eta) = match mc.name.as_str() {
            "energy" => ("1", "0", "0"),
            "mass-flux" => ("0", "1", "0"),
            "momentum" => ("0", "0", "1"),
            "center-of-mass" => ("0", "0", "t"),
            other => {
                return Err(ConfigError::Invalid(format!(
                    "monitor `{other}` is neither builtin nor fully specified"
                )))
            }
        };
        Ok(Generator::new(
            &mc.name,
            parse_expr(xt, &t)?,
            parse_expr(xs, &t)?,
            parse_expr(eta, &t)?,
        )?)
    }
}

/// Everything a finished run hands back.
pub struct SimOutput {
    pub config: SimConfig,
    pub model_description: String,
    pub series: MonitorSeries,
    pub snapshots: Vec<Snapshot>,
    pub final_state: SolverState,
}

pub struct Snapshot {
    pub t: f64,
    pub state: SolverState,
    pub fields: EulerianFields,
}

/// Builds and runs the configured simulation.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimOutput, ConfigError> {
    let m = cfg.model_spec()?;
    let nm = NumericModel::compile(&m, &cfg.params)?;
    let grid = Grid::new(cfg.grid.n, cfg.grid.length, cfg.grid.boundary)?;
    let mut st = SolverState::new(grid, &cfg.ic)?;

    let mut rng = Srng::new(cfg.seed);
    let mut monitors = Vec::new();
    for mc in &cfg.monitors {
        let gen = cfg.resolve_generator(mc, &m)?;
        let current: ConservedCurrent = noether_current(&gen, &m, &mut rng)?;
        monitors.push(Monitor::new(&mc.name, &current, &nm)?);
    }
    let mut series = MonitorSeries::new(monitors);
    series.record(&st, &nm, 0.0)?;

    let mut snapshots = Vec::new();
    let snap_times: Vec<f64> = if cfg.snapshots > 1 {
        (0..cfg.snapshots)
            .map(|k| cfg.t_end * k as f64 / (cfg.snapshots - 1) as f64)
            .collect()
    } else if cfg.snapshots == 1 {
        vec![cfg.t_end]
    } else {
        vec![]
    };
    let mut next_snap = 0usize;
    fn take_snaps(
        st: &SolverState,
        snap_times: &[f64],
        next_snap: &mut usize,
        snaps: &mut Vec<Snapshot>,
    ) -> Result<(), ConfigError> {
        while *next_snap < snap_times.len() && st.time >= snap_times[*next_snap] - 1e-12 {
            snaps.push(Snapshot {
                t: st.time,
                state: st.clone(),
                fields: crate::solver::to_eulerian_fields(st)?,
            });
            *next_snap += 1;
        }
        Ok(())
    }
    take_snaps(&st, &snap_times, &mut next_snap, &mut snapshots)?;

    if !(cfg.t_end > 0.0) {
        return Err(ConfigError::Invalid("t_end must be positive".into()));
    }
    while st.time < cfg.t_end - 1e-12 {
        let bound = cfl_dt(&st, &nm)?;
        let dt = match cfg.dt {
            Some(fixed) => fixed.min(bound),
            None => 0.75 * bound,
        }
        .min(cfg.t_end - st.time);
        st = step(&st, &nm, dt)?;
        series.record(&st, &nm, dt)?;
        take_snaps(&st, &snap_times, &mut next_snap, &mut snapshots)?;
    }

    Ok(SimOutput {
        config: cfg.clone(),
        model_description: nm.description.clone(),
        series,
        snapshots,
        final_state: st,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHALLOW_WATER: &str = r#"{
        "model": {"entry": "powG-H0-lam4"},
        "grid": {"n": 64, "length": 6.283185307179586, "boundary": "periodic"},
        "ic": {"kind": "gaussian_velocity", "slope": 1.0, "amplitude": 0.05,
               "center": 0.5, "width": 0.1},
        "monitors": [{"name": "energy"}, {"name": "momentum"},
                     {"name": "dilation", "generator": "X6"}],
        "t_end": 0.25,
        "snapshots": 2,
        "seed": 7
    }"#;

    #[test]
    fn config_roundtrip_and_run() {
        let cfg = SimConfig::from_json(SHALLOW_WATER).unwrap();
        let out = run_simulation(&cfg).unwrap();
        assert_eq!(out.series.records.len() as u64, out.final_state.steps + 1);
        assert_eq!(out.snapshots.len(), 2);
        assert!(out.series.drift_of("momentum").unwrap() < 1e-12);
        // determinism: the same config gives the same records
        let out2 = run_simulation(&cfg).unwrap();
        assert_eq!(out.series.records.len(), out2.series.records.len());
        for (a, b) in out.series.records.iter().zip(out2.series.records.iter()) {
            assert_eq!(a.t, b.t);
            assert_eq!(a.values, b.values);
        }
    }

    #[test]
    fn inline_model_and_custom_monitor() {
        let src = r#"{
            "model": {
                "g": {"family": "power", "lambda": "-3", "c": "0"},
                "h": {"family": "zero"},
                "domain": {}
            },
            "grid": {"n": 32, "length": 1.0, "boundary": "periodic"},
            "ic": {"kind": "equilibrium", "slope": 1.0},
            "monitors": [{"name": "shift", "xi_t": "0", "xi_s": "0", "eta": "1"}],
            "t_end": 0.05,
            "seed": 3
        }"#;
        let cfg = SimConfig::from_json(src).unwrap();
        let out = run_simulation(&cfg).unwrap();
        assert!(out.series.drift_of("shift").unwrap() < 1e-14);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let cfg = SimConfig::from_json(
            r#"{"model": {"entry": "no-such-entry"},
                "grid": {"n": 32, "length": 1.0, "boundary": "periodic"},
                "ic": {"kind": "equilibrium", "slope": 1.0},
                "t_end": 0.1}"#,
        )
        .unwrap();
        assert!(matches!(run_simulation(&cfg), Err(ConfigError::UnknownEntry(_))));
        // non-variational monitor: the mass rescaling s d_s leaves a
        // phi_t^2 defect
        let cfg = SimConfig::from_json(
            r#"{"model": {"entry": "powG-H0-lam2"},
                "grid": {"n": 32, "length": 1.0, "boundary": "periodic"},
                "ic": {"kind": "equilibrium", "slope": 1.0},
                "monitors": [{"name": "rescale", "generator": "X6"}],
                "t_end": 0.1}"#,
        )
        .unwrap();
        assert!(matches!(run_simulation(&cfg), Err(ConfigError::Noether(_))));
        // opaque-G models cannot be simulated at all
        let cfg = SimConfig::from_json(
            r#"{"model": {"entry": "arbG-invH"},
                "grid": {"n": 32, "length": 1.0, "boundary": "periodic"},
                "ic": {"kind": "equilibrium", "slope": 1.0},
                "t_end": 0.1}"#,
        )
        .unwrap();
        assert!(matches!(run_simulation(&cfg), Err(ConfigError::Solver(_))));
    }
}
