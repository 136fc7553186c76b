use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::asympt::{FitOptions, TailOptions};
use crate::coords::CutoffSpec;
use crate::geometry::ModelSpec;
use crate::solver::{GridSpec, NullChart, RhoSchedule, SourceSpec};
use crate::{Error, Result};

/// Everything a command needs. Every field has a default, so a config file
/// only has to list what it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Root for run directories (overridden by `SCRI_OUTPUT_ROOT`).
    pub output_dir: PathBuf,
    /// Seed for randomized property checks.
    pub seed: u64,
    pub geometry: GeometryConfig,
    pub flow: FlowConfig,
    pub solve: SolveConfig,
    pub extraction: ExtractionConfig,
    pub fit: FitConfig,
    pub tail: TailConfig,
    pub indexset: IndexsetConfig,
    pub mellin: MellinLoopConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub models: Vec<ModelSpec>,
    /// Tolerance for the Kerr constants `m = 4M`, `(omega, alpha, beta) = (1, 2, 4)`.
    pub kerr_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub models: Vec<ModelSpec>,
    pub seeds: usize,
    pub horizon: f64,
    pub tol: f64,
    /// Number of seeds whose full trajectory is written out.
    pub trajectories: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Black hole mass; 0 is Minkowski.
    pub mass: f64,
    pub source: SourceSpec,
    pub grid: GridSpec,
    /// Approximate number of snapshots stored in the checkpoint.
    pub checkpoint_frames: usize,
    pub convergence: ConvergenceConfig,
}

/// Minkowski grid-refinement study against the exact solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub drs: Vec<f64>,
    pub t_eval: f64,
    pub r_step: f64,
    pub r_max: f64,
    pub min_order: f64,
    pub max_rel_error: f64,
}

/// Null slices handed to the expansion fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    pub chart: NullChart,
    pub s_min: f64,
    pub s_max: f64,
    pub ds: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub per_octave: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub options: FitOptions,
    /// Points with `|d_s w0|` below this fraction of its maximum are not
    /// compared.
    pub threshold: f64,
    /// Largest allowed relative residual of the log coefficient.
    pub tolerance: f64,
    /// Repeat everything at half the grid spacing.
    pub refine: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailConfig {
    pub mass: f64,
    pub dr: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub ds: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub per_octave: usize,
    pub options: TailOptions,
    /// Below this `max |w0|` the window is reported as tail-free.
    pub floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexsetConfig {
    /// Resonances as `re,im,k` strings.
    pub e0: Vec<String>,
    pub m_nonzero: bool,
    pub depth: f64,
    /// Number of random sets in the property suite.
    pub random_sets: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MellinLoopConfig {
    pub cases: usize,
    pub location_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: PathBuf::from("runs"),
            seed: 20240917,
            geometry: GeometryConfig::default(),
            flow: FlowConfig::default(),
            solve: SolveConfig::default(),
            extraction: ExtractionConfig::default(),
            fit: FitConfig::default(),
            tail: TailConfig::default(),
            indexset: IndexsetConfig::default(),
            mellin: MellinLoopConfig::default(),
        }
    }
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            models: vec![
                ModelSpec::Minkowski { n: 4 },
                ModelSpec::Kerr { mass: 1.0, spin: 0.0 },
                ModelSpec::Kerr { mass: 1.0, spin: 0.5 },
                ModelSpec::Kerr { mass: 0.25, spin: 0.1 },
            ],
            kerr_tol: 1e-10,
        }
    }
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            models: vec![ModelSpec::Minkowski { n: 4 }, ModelSpec::Kerr { mass: 1.0, spin: 0.0 }],
            seeds: 64,
            horizon: 200.0,
            tol: 1e-3,
            trajectories: 4,
        }
    }
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mass: 0.05,
            source: SourceSpec::default(),
            grid: GridSpec { t_end: 0.0, ..GridSpec::default() },
            checkpoint_frames: 16,
            convergence: ConvergenceConfig::default(),
        }
    }
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            drs: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0],
            t_eval: 30.0,
            r_step: 0.25,
            r_max: 45.0,
            min_order: 1.9,
            max_rel_error: 1e-4,
        }
    }
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            chart: NullChart::Logified { t_origin: -5.0, cutoff: CutoffSpec::default() },
            s_min: -12.0,
            s_max: 12.0,
            ds: 0.25,
            rho_min: 3e-6,
            rho_max: 3e-4,
            per_octave: 4,
        }
    }
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            options: FitOptions { rho_min: 3e-6, rho_max: 3e-4, ..FitOptions::default() },
            threshold: 0.1,
            tolerance: 0.15,
            refine: true,
        }
    }
}

impl Default for TailConfig {
    fn default() -> Self {
        TailConfig {
            mass: 0.5,
            dr: 1.0 / 16.0,
            s_min: 300.0,
            s_max: 1200.0,
            ds: 12.0,
            rho_min: 1e-4,
            rho_max: 1e-3,
            per_octave: 4,
            options: TailOptions::default(),
            floor: 1e-10,
        }
    }
}

impl Default for IndexsetConfig {
    fn default() -> Self {
        IndexsetConfig { e0: vec!["0,-1,0".into()], m_nonzero: true, depth: 3.5, random_sets: 200 }
    }
}

impl Default for MellinLoopConfig {
    fn default() -> Self {
        MellinLoopConfig { cases: 20, location_tol: 1e-6 }
    }
}

fn uniform(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

impl ExtractionConfig {
    pub fn s_values(&self) -> Vec<f64> {
        uniform(self.s_min, self.s_max, self.ds)
    }

    pub fn schedule(&self) -> RhoSchedule {
        RhoSchedule::spanning(self.rho_min, self.rho_max, self.per_octave)
    }
}

impl TailConfig {
    pub fn s_values(&self) -> Vec<f64> {
        uniform(self.s_min, self.s_max, self.ds)
    }

    pub fn extraction(&self) -> ExtractionConfig {
        ExtractionConfig {
            chart: NullChart::Tortoise,
            s_min: self.s_min,
            s_max: self.s_max,
            ds: self.ds,
            rho_min: self.rho_min,
            rho_max: self.rho_max,
            per_octave: self.per_octave,
        }
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions { rho_min: self.rho_min, rho_max: self.rho_max, ..FitOptions::default() }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Cheap consistency checks; numerical preconditions are left to the
    /// individual modules.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.solve.mass >= 0.0) || !(self.tail.mass >= 0.0) {
            return bad("masses must be non-negative");
        }
        self.solve.grid.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.solve.source.validate().map_err(|e| Error::Config(e.to_string()))?;
        for (name, e) in [("extraction", &self.extraction), ("tail", &self.tail.extraction())] {
            if !(e.ds > 0.0 && e.s_max >= e.s_min) {
                return bad(&format!("{name}: need ds > 0 and s_max >= s_min"));
            }
            if !(e.rho_min > 0.0 && e.rho_max > e.rho_min && e.per_octave > 0) {
                return bad(&format!("{name}: need 0 < rho_min < rho_max and per_octave > 0"));
            }
        }
        if self.solve.convergence.drs.iter().any(|d| !(*d > 0.0)) {
            return bad("convergence: dr values must be positive");
        }
        if !(self.flow.horizon >= 0.0 && self.flow.tol > 0.0) {
            return bad("flow: need horizon >= 0 and tol > 0");
        }
        if !(self.indexset.depth > 0.0) {
            return bad("indexset: depth must be positive");
        }
        Ok(())
    }
}

/// The default configuration as commented TOML.
pub fn default_config_toml() -> String {
    let body = RunConfig::default().to_toml().expect("default config serializes");
    format!(
        "# scri run configuration. Every key is optional; omitted keys take the\n\
         # values shown here. Unknown keys are rejected.\n\
         #\n\
         # [solve]       mass (0 = Minkowski), source, grid and the Minkowski\n\
         #               convergence study.\n\
         # [extraction]  null slices: chart, s window, rho window, samples per octave.\n\
         # [fit]         front-face fit options and the log-coefficient check.\n\
         # [tail]        late-time tail fit on tortoise slices.\n\
         # [indexset]    resonances as \"re,im,k\" strings.\n\
         \n{body}"
    )
}
