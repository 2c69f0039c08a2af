//! The solve → estimate → mark → close → refine loop and its records.

use super::config::{ExperimentConfig, MarkingQuantity, Mode, SolverKind};
use crate::dpg::{assemble, estimate_discrete_infsup, exact_errors, project_residual, solve_pg, trial_norm_gram, DpgSystem};
use crate::estimator::{build_report, classify_and_mark, solve_least_squares, IndicatorReport, Marking};
use crate::linalg::DENSE_LIMIT;
use crate::mesh::{build_root_mesh, classify_faces, downwind_closure, make_subgrid, write_dump, SimplicialMesh};
use crate::problem::{data_oscillation, project_data, DiscretizationConfig, TransportProblem};
use crate::spaces::{build_test_space, build_trial_space};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub const CONVERGENCE_HEADER: &str = "iter,ndof,eta,rdelta,osc,err_u,err_w,marked,nu_obs,gamma_infsup";

/// Extra quadrature degree for errors against non-polynomial exact solutions.
const ERROR_QUAD_EXTRA: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub ndof: usize,
    pub eta: f64,
    pub rdelta: f64,
    pub osc: f64,
    pub err_u: f64,
    pub err_w: f64,
    pub marked: usize,
    /// `η_k / η_{k−1}` (NaN on the first iteration).
    pub nu_obs: f64,
    pub gamma_infsup: f64,
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.12e}")
    }
}

impl IterationRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.iter,
            self.ndof,
            num(self.eta),
            num(self.rdelta),
            num(self.osc),
            num(self.err_u),
            num(self.err_w),
            self.marked,
            num(self.nu_obs),
            num(self.gamma_infsup)
        )
    }
}

pub fn convergence_csv(records: &[IterationRecord]) -> String {
    let mut s = String::from(CONVERGENCE_HEADER);
    s.push('\n');
    for r in records {
        writeln!(s, "{}", r.csv_line()).unwrap();
    }
    s
}

/// Everything built on one trial mesh.
pub struct Discretization {
    pub sys: DpgSystem,
    pub osc: f64,
}

pub fn discretize(problem: &TransportProblem, mesh: &SimplicialMesh, disc: &DiscretizationConfig) -> Result<Discretization> {
    let pair = make_subgrid(mesh, disc.subgrid_depth);
    let faces = classify_faces(mesh, &problem.b_fn());
    let trial = build_trial_space(mesh, disc.m_u, disc.m_w, &faces);
    let test = build_test_space(&pair.fine, disc.m_v);
    let data = project_data(problem, &pair, disc);
    let osc = data_oscillation(problem, &data, mesh);
    let sys = assemble(&data, &trial, &test, &pair, disc)?;
    Ok(Discretization { sys, osc })
}

/// Solution and indicators on one mesh.
pub struct Step {
    pub disc: Discretization,
    pub x: Vec<f64>,
    pub report: IndicatorReport,
}

pub fn solve_step(problem: &TransportProblem, mesh: &SimplicialMesh, disc: &DiscretizationConfig, solver: SolverKind) -> Result<Step> {
    let d = discretize(problem, mesh, disc)?;
    let x = match solver {
        SolverKind::PetrovGalerkin => solve_pg(&d.sys)?,
        SolverKind::LeastSquares => solve_least_squares(problem, &d.sys.trial, disc.cg_tol, disc.cg_maxit)?,
    };
    let r = project_residual(&d.sys, &x).coarse_norm2(&d.sys.pair);
    let report = build_report(problem, &d.sys.trial, &d.sys.data, &x, Some(&r), disc.beta, d.osc)?;
    Ok(Step { disc: d, x, report })
}

/// Cells to refine with their depths: marked cells `r` deep, cells added by
/// the downwind closure `downwind_depth` deep.
pub fn refinement_depths(mesh: &SimplicialMesh, problem: &TransportProblem, marked: &[usize], disc: &DiscretizationConfig) -> Vec<(usize, u32)> {
    let mut depths: BTreeMap<usize, u32> = BTreeMap::new();
    if let (2, Some(b)) = (mesh.dim(), problem.constant_b()) {
        for k in downwind_closure(mesh, marked, b) {
            depths.insert(k, disc.downwind_depth);
        }
    }
    for &k in marked {
        depths.insert(k, disc.r);
    }
    depths.into_iter().filter(|(_, d)| *d > 0).collect()
}

pub struct RunOutput {
    pub records: Vec<IterationRecord>,
    pub mesh: SimplicialMesh,
    pub last: Option<(IndicatorReport, Marking)>,
}

/// The adaptive (or uniform) loop. With `out` set, writes `convergence.csv`,
/// `indicators_<iter>.csv` and (optionally) `mesh_<iter>.txt` there.
pub fn run_adaptive(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutput> {
    let problem = &cfg.problem;
    let disc = &cfg.disc;
    let st = &cfg.settings;
    let mut mesh = build_root_mesh(problem.domain, cfg.resolution)?;
    problem.validate(&mesh)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut last = None;
    let mut eta0 = f64::NAN;
    for iter in 0..st.max_iterations {
        let at = |e: Error| Error::AtIteration { iteration: iter, source: Box::new(e) };
        let mut step = solve_step(problem, &mesh, disc, st.solver).map_err(at)?;
        let sys = &step.disc.sys;
        let eta = step.report.eta2_total().sqrt();
        let rdelta = step.report.rdelta2_total().sqrt();
        let (err_u, err_w) = exact_errors(problem, &sys.trial, &step.x, ERROR_QUAD_EXTRA).unwrap_or((f64::NAN, f64::NAN));
        let gamma = if st.infsup && sys.trial.dim() <= DENSE_LIMIT {
            estimate_discrete_infsup(&sys.s, &trial_norm_gram(&sys.trial, &sys.data, disc)).map_err(at)?
        } else {
            f64::NAN
        };
        if iter == 0 {
            eta0 = eta;
        }
        let done = eta <= st.eta_reduction * eta0 || iter + 1 == st.max_iterations || sys.trial.dim() >= st.max_dofs;
        let marking = if done {
            Marking::default()
        } else {
            classify_and_mark(&mut step.report, disc.theta, st.marking == MarkingQuantity::Rdelta)
        };
        let refined = match st.mode {
            Mode::Uniform if !done => mesh.num_cells(),
            _ => marking.all.len(),
        };
        let nu = records.last().map_or(f64::NAN, |r| eta / r.eta);
        records.push(IterationRecord {
            iter,
            ndof: sys.trial.dim(),
            eta,
            rdelta,
            osc: step.disc.osc,
            err_u,
            err_w,
            marked: refined,
            nu_obs: nu,
            gamma_infsup: gamma,
        });
        if let Some(dir) = out {
            std::fs::write(dir.join(format!("indicators_{iter}.csv")), step.report.to_csv())?;
            if cfg.mesh_dumps {
                let eta2: Vec<f64> = step.report.cells.iter().map(|c| c.eta2).collect();
                std::fs::write(dir.join(format!("mesh_{iter}.txt")), write_dump(&mesh, &[("eta2", &eta2)]))?;
            }
        }
        let stop = done || (st.mode == Mode::Adaptive && marking.all.is_empty());
        let next = if stop {
            None
        } else {
            Some(match st.mode {
                Mode::Uniform => {
                    let all: Vec<usize> = (0..mesh.num_cells()).collect();
                    mesh.refine(&all, mesh.dim() as u32)
                }
                Mode::Adaptive => mesh.refine_depths(&refinement_depths(&mesh, problem, &marking.all, disc), true),
            })
        };
        last = Some((step.report, marking));
        match next {
            Some(m) => mesh = m,
            None => break,
        }
    }
    if let Some(dir) = out {
        std::fs::write(dir.join("convergence.csv"), convergence_csv(&records))?;
    }
    Ok(RunOutput { records, mesh, last })
}
