//! Downwind-enrichment experiments: after a short adaptive warm-up, fit
//! `∂_b w + c w ≈ F` with `w` supported on the refined region, for growing
//! refinement depth.

use super::adaptive::{run_adaptive, solve_step};
use super::config::{ExperimentConfig, MarkingQuantity, Mode, SolverKind};
use super::stock::stock_problem;
use crate::estimator::{ancestor_cells, classify_and_mark, conjecture_probe, CellType, ForcingField};
use crate::mesh::{classify_faces, downwind_closure, forward_sweep};
use crate::spaces::build_trial_space;
use crate::{Error, Result};
use std::fmt::Write as _;

pub const DEFAULT_SCENARIOS: &[&str] = &["jump1d", "smooth1d", "jump2d"];
pub const CONJECTURE_HEADER: &str = "scenario,r,xi,w_ratio,free_dofs";

#[derive(Clone, Debug, PartialEq)]
pub struct ConjectureRow {
    pub scenario: String,
    pub r: u32,
    pub xi: f64,
    pub w_ratio: f64,
    pub free_dofs: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConjectureTable {
    pub rows: Vec<ConjectureRow>,
    /// Scenarios dropped because no Type-II cell was marked (F = 0).
    pub skipped: Vec<String>,
}

impl ConjectureTable {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{CONJECTURE_HEADER}\n");
        for r in &self.rows {
            writeln!(s, "{},{},{:.12e},{:.12e},{}", r.scenario, r.r, r.xi, r.w_ratio, r.free_dofs).unwrap();
        }
        s
    }

    pub fn scenario(&self, name: &str) -> Vec<&ConjectureRow> {
        self.rows.iter().filter(|r| r.scenario == name).collect()
    }

    /// Whether ξ never increases with depth, up to an absolute slack `tol`
    /// (ξ is itself relative to ‖F‖).
    pub fn monotone(&self, tol: f64) -> bool {
        let mut names: Vec<&str> = self.rows.iter().map(|r| r.scenario.as_str()).collect();
        names.dedup();
        names.iter().all(|n| self.scenario(n).windows(2).all(|w| w[1].xi <= w[0].xi + tol))
    }
}

fn scenario_config(base: &ExperimentConfig, name: &str) -> Result<ExperimentConfig> {
    let (problem, resolution) = stock_problem(name)?;
    let mut cfg = base.clone();
    cfg.problem = problem;
    cfg.resolution = resolution;
    // equal degrees leave room for Type-II cells
    cfg.disc.m_u = cfg.disc.m_w;
    cfg.disc.m_v = cfg.disc.m_v.max(cfg.disc.min_test_degree());
    cfg.settings.mode = Mode::Adaptive;
    cfg.settings.solver = SolverKind::LeastSquares;
    cfg.settings.marking = MarkingQuantity::Eta;
    cfg.settings.max_iterations = cfg.conjecture.warmup.max(1);
    cfg.settings.infsup = false;
    cfg.output = None;
    Ok(cfg)
}

fn run_scenario(base: &ExperimentConfig, name: &str, table: &mut ConjectureTable) -> Result<()> {
    let cfg = scenario_config(base, name)?;
    let problem = &cfg.problem;
    let b = problem.constant_b().ok_or_else(|| Error::Config(format!("scenario {name}: convection must be constant")))?;
    let mesh = run_adaptive(&cfg, None)?.mesh;
    let mut step = solve_step(problem, &mesh, &cfg.disc, SolverKind::LeastSquares)?;
    let marking = classify_and_mark(&mut step.report, cfg.disc.theta, false);
    let type2: Vec<usize> = marking.all.iter().copied().filter(|&k| step.report.cells[k].kind == CellType::II).collect();
    let forcing = ForcingField::masked(&step.report, &type2);
    if !(forcing.norm2() > 0.0) {
        table.skipped.push(name.to_string());
        return Ok(());
    }
    let closure = if mesh.dim() == 1 { forward_sweep(&mesh, &marking.all, b) } else { downwind_closure(&mesh, &marking.all, b) };
    let mut refined = vec![false; mesh.num_cells()];
    for &k in &closure {
        refined[k] = true;
    }
    for r in 1..=cfg.conjecture.max_depth {
        let depths: Vec<(usize, u32)> = closure.iter().map(|&k| (k, r)).collect();
        let fine = mesh.refine_depths(&depths, false);
        let region: Vec<bool> = ancestor_cells(&mesh, &fine).into_iter().map(|c| refined[c]).collect();
        let trial = build_trial_space(&fine, cfg.disc.m_u, cfg.disc.m_w, &classify_faces(&fine, &problem.b_fn()));
        let p = conjecture_probe(problem, &mesh, &trial, &region, &forcing, cfg.disc.cg_tol, cfg.disc.cg_maxit)?;
        table.rows.push(ConjectureRow { scenario: name.to_string(), r, xi: p.xi, w_ratio: p.w_ratio, free_dofs: p.free_dofs });
    }
    Ok(())
}

pub fn run_conjecture(cfg: &ExperimentConfig) -> Result<ConjectureTable> {
    let names: Vec<String> = if cfg.conjecture.scenarios.is_empty() {
        DEFAULT_SCENARIOS.iter().map(|s| s.to_string()).collect()
    } else {
        cfg.conjecture.scenarios.clone()
    };
    let mut table = ConjectureTable::default();
    for name in &names {
        run_scenario(cfg, name, &mut table)?;
    }
    Ok(table)
}
