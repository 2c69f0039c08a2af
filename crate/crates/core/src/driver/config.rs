//! Experiment configuration: TOML with `[problem]`, `[discretization]`,
//! `[adaptive]`, `[output]`, `[verify]` and `[conjecture]` sections. Unknown
//! keys are rejected.

use super::stock::{custom_problem, stock_problem, StepSpec};
use crate::problem::{DiscretizationConfig, TransportProblem};
use crate::{Error, Result};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// Name of a built-in problem; other keys then override nothing but `resolution`.
    pub stock: Option<String>,
    pub domain: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub c: Option<f64>,
    pub f: Option<f64>,
    pub f_step: Option<StepSpec>,
    pub resolution: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    pub m_u: Option<usize>,
    pub m_w: Option<usize>,
    pub m_v: Option<usize>,
    pub m_b: Option<usize>,
    pub m_c: Option<usize>,
    pub m_f: Option<usize>,
    pub subgrid_depth: Option<u32>,
    pub cg_tol: Option<f64>,
    pub cg_maxit: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveSection {
    pub mode: Option<String>,
    pub solver: Option<String>,
    pub marking: Option<String>,
    pub theta: Option<f64>,
    pub beta: Option<f64>,
    pub r: Option<u32>,
    pub downwind_depth: Option<u32>,
    pub max_iterations: Option<usize>,
    pub max_dofs: Option<usize>,
    pub eta_reduction: Option<f64>,
    pub infsup: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub mesh_dumps: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjectureSection {
    pub scenarios: Option<Vec<String>>,
    pub max_depth: Option<u32>,
    pub warmup: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub discretization: DiscretizationSection,
    #[serde(default)]
    pub adaptive: AdaptiveSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub conjecture: ConjectureSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Adaptive,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    PetrovGalerkin,
    LeastSquares,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkingQuantity {
    Eta,
    Rdelta,
}

#[derive(Clone, Debug)]
pub struct LoopSettings {
    pub mode: Mode,
    pub solver: SolverKind,
    pub marking: MarkingQuantity,
    pub max_iterations: usize,
    pub max_dofs: usize,
    pub eta_reduction: f64,
    pub infsup: bool,
}

impl Default for LoopSettings {
    fn default() -> Self {
        LoopSettings {
            mode: Mode::Adaptive,
            solver: SolverKind::PetrovGalerkin,
            marking: MarkingQuantity::Rdelta,
            max_iterations: 25,
            max_dofs: 200_000,
            eta_reduction: 1e-8,
            infsup: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConjectureSettings {
    pub scenarios: Vec<String>,
    pub max_depth: u32,
    pub warmup: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: TransportProblem,
    pub resolution: usize,
    pub disc: DiscretizationConfig,
    pub settings: LoopSettings,
    pub output: Option<PathBuf>,
    pub mesh_dumps: bool,
    pub seed: u64,
    pub samples: usize,
    pub conjecture: ConjectureSettings,
}

fn choice<T: Copy>(key: &str, value: Option<&str>, default: T, options: &[(&str, T)]) -> Result<T> {
    let Some(v) = value else { return Ok(default) };
    options
        .iter()
        .find(|(name, _)| *name == v)
        .map(|o| o.1)
        .ok_or_else(|| Error::Config(format!("{key} = {v:?}; expected one of {:?}", options.iter().map(|o| o.0).collect::<Vec<_>>())))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_file(file: ConfigFile) -> Result<Self> {
        let p = &file.problem;
        let (problem, stock_res) = match &p.stock {
            Some(name) => {
                if p.domain.is_some() || p.b.is_some() || p.c.is_some() || p.f.is_some() || p.f_step.is_some() {
                    return Err(Error::Config("stock problems take no data overrides".into()));
                }
                stock_problem(name)?
            }
            None => (custom_problem(p)?, 4),
        };
        let resolution = p.resolution.unwrap_or(stock_res);
        if resolution == 0 {
            return Err(Error::Config("resolution must be positive".into()));
        }
        let d = &file.discretization;
        let mut disc = DiscretizationConfig::default();
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = d.$f { disc.$f = v; } )* };
        }
        set!(m_u, m_w, m_b, m_c, m_f, subgrid_depth, cg_tol, cg_maxit);
        disc.m_v = d.m_v.unwrap_or_else(|| disc.min_test_degree());
        let a = &file.adaptive;
        if let Some(t) = a.theta {
            disc.theta = t;
        }
        if let Some(b) = a.beta {
            disc.beta = b;
        }
        if let Some(r) = a.r {
            disc.r = r;
        }
        disc.downwind_depth = a.downwind_depth.unwrap_or(disc.r);
        disc.validate()?;
        let settings = LoopSettings {
            mode: choice("mode", a.mode.as_deref(), Mode::Adaptive, &[("adaptive", Mode::Adaptive), ("uniform", Mode::Uniform)])?,
            solver: choice(
                "solver",
                a.solver.as_deref(),
                SolverKind::PetrovGalerkin,
                &[("pg", SolverKind::PetrovGalerkin), ("ls", SolverKind::LeastSquares)],
            )?,
            marking: choice("marking", a.marking.as_deref(), MarkingQuantity::Rdelta, &[("eta", MarkingQuantity::Eta), ("rdelta", MarkingQuantity::Rdelta)])?,
            max_iterations: a.max_iterations.unwrap_or(25),
            max_dofs: a.max_dofs.unwrap_or(200_000),
            eta_reduction: a.eta_reduction.unwrap_or(1e-8),
            infsup: a.infsup.unwrap_or(false),
        };
        if settings.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if settings.mode == Mode::Adaptive {
            disc.validate_effectiveness_regime()?;
        }
        let c = &file.conjecture;
        let conjecture = ConjectureSettings {
            scenarios: c.scenarios.clone().unwrap_or_default(),
            max_depth: c.max_depth.unwrap_or(3),
            warmup: c.warmup.unwrap_or(3),
        };
        if conjecture.max_depth == 0 {
            return Err(Error::Config("conjecture max_depth must be positive".into()));
        }
        Ok(ExperimentConfig {
            problem,
            resolution,
            disc,
            settings,
            output: file.output.dir.clone(),
            mesh_dumps: file.output.mesh_dumps.unwrap_or(true),
            seed: file.verify.seed.unwrap_or(20240601),
            samples: file.verify.samples.unwrap_or(20),
            conjecture,
        })
    }
}
