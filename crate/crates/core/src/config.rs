//! Declarative run configuration, read from TOML.
//!
//! Every section is optional and falls back to the defaults below.
//!
//! ```toml
//! scenario = "sweep_beta"
//!
//! [problem]
//! s = 0.5
//! k = 2
//! p = 1.0
//! q = 1.0
//!
//! [grid]
//! nx = 129
//! ny = 65
//!
//! [boundary]
//! preset = "mirror_crossing"
//!
//! [ladder]
//! beta_0 = 1.0
//! ratio = 10.0
//! steps = 7
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::barriers::{DecayCase, DecaySetup};
use crate::continuation::BetaLadder;
use crate::error::{Error, Result};
use crate::grid::{default_grading, Grid};
use crate::io::load_field;
use crate::params::{unit_interaction, ProblemParams, ReactionSpec};
use crate::solver::{BoundaryData, SolverConfig};
use crate::spherical::OptimizerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Solve,
    SweepBeta,
    Diagnose,
    Exponents,
    BarrierCheck,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Solve => "solve",
            Scenario::SweepBeta => "sweep_beta",
            Scenario::Diagnose => "diagnose",
            Scenario::Exponents => "exponents",
            Scenario::BarrierCheck => "barrier_check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub s: f64,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    /// Row-major; all off-diagonal entries 1 when omitted.
    pub interaction: Option<Vec<f64>>,
    /// One per density; all zero when omitted.
    pub reactions: Option<Vec<ReactionSpec>>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            s: 0.5,
            k: 2,
            p: 1.0,
            q: 1.0,
            beta: 0.0,
            interaction: None,
            reactions: None,
        }
    }
}

impl ProblemSection {
    pub fn params(&self) -> Result<ProblemParams> {
        ProblemParams::new(
            self.s,
            self.k,
            self.p,
            self.q,
            self.beta,
            self.interaction.clone().unwrap_or_else(|| unit_interaction(self.k)),
            self.reactions
                .clone()
                .unwrap_or_else(|| vec![ReactionSpec::zero(); self.k]),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub x_lo: f64,
    pub x_hi: f64,
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
    /// `max(1, 2 / (1 + a))` when omitted.
    pub grading: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            x_lo: -1.0,
            x_hi: 1.0,
            height: 1.0,
            nx: 129,
            ny: 65,
            grading: None,
        }
    }
}

impl GridSection {
    pub fn build(&self, a: f64) -> Result<Grid> {
        Grid::build(
            self.x_lo,
            self.x_hi,
            self.height,
            self.nx,
            self.ny,
            self.grading.unwrap_or_else(|| default_grading(a)),
            a,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Constant,
    MirrorCrossing,
    CustomSamples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundarySection {
    pub preset: Preset,
    /// One value per density for `constant`.
    pub values: Vec<f64>,
    /// Field file whose Dirichlet nodes are reused, for `custom_samples`.
    pub path: Option<PathBuf>,
}

impl Default for BoundarySection {
    fn default() -> Self {
        Self {
            preset: Preset::MirrorCrossing,
            values: Vec::new(),
            path: None,
        }
    }
}

impl BoundarySection {
    /// Resolves the preset. Relative paths are taken from `base`.
    pub fn data(&self, grid: &Grid, k: usize, base: &Path) -> Result<BoundaryData> {
        match self.preset {
            Preset::Constant => {
                if self.values.len() != k {
                    return Err(Error::Config(format!(
                        "boundary.values needs {k} entries for the constant preset, found {}",
                        self.values.len()
                    )));
                }
                BoundaryData::constant(grid, &self.values)
            }
            Preset::MirrorCrossing => {
                if k != 2 {
                    return Err(Error::Config(format!("mirror_crossing needs k = 2, found k = {k}")));
                }
                BoundaryData::mirror_crossing(grid)
            }
            Preset::CustomSamples => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("boundary.path is required for custom_samples".into()))?;
                let stored = load_field(&base.join(path))?;
                if stored.header.k != k || stored.grid.x_nodes != grid.x_nodes || stored.grid.y_nodes != grid.y_nodes {
                    return Err(Error::Config(format!(
                        "custom samples in {} do not match the configured grid and k",
                        path.display()
                    )));
                }
                let bd = BoundaryData {
                    samples: stored.values,
                    tag: "custom_samples".into(),
                };
                bd.validate(grid, k)?;
                Ok(bd)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Input field for the `diagnose` scenario.
    pub field: Option<PathBuf>,
    pub holder_alpha: f64,
    pub morrey_eps: f64,
    /// Exponent of the two-phase quotient; the partition value `mu(s)` when omitted.
    pub acf_mu: Option<f64>,
    /// Smallest radius in units of the horizontal spacing.
    pub first_radius_cells: f64,
    pub radius_ratio: f64,
    pub radii: usize,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            field: None,
            holder_alpha: 0.5,
            morrey_eps: 0.1,
            acf_mu: None,
            first_radius_cells: 4.0,
            radius_ratio: 1.35,
            radii: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentsSection {
    pub s_values: Vec<f64>,
    pub resolution: usize,
    pub optimizer: OptimizerConfig,
}

impl Default for ExponentsSection {
    fn default() -> Self {
        Self {
            s_values: vec![0.25, 0.5, 0.75],
            resolution: 512,
            optimizer: OptimizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierSection {
    pub m_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub s_values: Vec<f64>,
    pub setup: DecaySetup,
}

impl Default for BarrierSection {
    fn default() -> Self {
        Self {
            m_values: vec![10.0, 100.0, 1000.0],
            p_values: vec![0.5, 1.0, 2.0],
            s_values: vec![0.25, 0.5, 0.75],
            setup: DecaySetup::default(),
        }
    }
}

impl BarrierSection {
    pub fn cases(&self) -> Vec<DecayCase> {
        let mut out = Vec::new();
        for &m in &self.m_values {
            for &p in &self.p_values {
                for &s in &self.s_values {
                    out.push(DecayCase { m, p, s });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<Scenario>,
    pub problem: ProblemSection,
    pub grid: GridSection,
    pub boundary: BoundarySection,
    pub ladder: BetaLadder,
    pub solver: SolverConfig,
    pub diagnostics: DiagnosticsSection,
    pub exponents: ExponentsSection,
    pub barrier: BarrierSection,
    pub output: OutputSection,
    /// Directory that relative paths are resolved against; set by [`RunConfig::load`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Range checks that do not need any file access.
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.to_string());
        let params = self.problem.params().map_err(wrap)?;
        self.grid.build(params.a()).map_err(wrap)?;
        self.ladder.validate().map_err(wrap)?;
        self.solver.validate().map_err(wrap)?;
        let d = &self.diagnostics;
        if !(d.holder_alpha > 0.0 && d.holder_alpha <= 1.0)
            || !(d.morrey_eps > 0.0 && d.morrey_eps < 0.5)
            || !(d.first_radius_cells > 0.0)
            || !(d.radius_ratio > 1.0)
            || d.radii < 3
        {
            return Err(Error::Config(format!("diagnostics section out of range: {d:?}")));
        }
        if self.exponents.s_values.iter().any(|s| !(*s > 0.0 && *s < 1.0)) || self.exponents.resolution < 64 {
            return Err(Error::Config("exponents: s in (0,1) and resolution >= 64 required".into()));
        }
        if self.barrier.setup.source.abs() > self.barrier.setup.delta {
            return Err(Error::Config("barrier.setup: |source| must not exceed delta".into()));
        }
        Ok(())
    }

    /// The scenario selected on the command line must agree with the file.
    pub fn resolve_scenario(&self, requested: Scenario) -> Result<Scenario> {
        match self.scenario {
            Some(s) if s != requested => Err(Error::Config(format!(
                "config declares scenario `{}` but `{}` was requested",
                s.name(),
                requested.name()
            ))),
            _ => Ok(requested),
        }
    }

    pub fn params(&self) -> Result<Arc<ProblemParams>> {
        Ok(Arc::new(self.problem.params()?))
    }
}
