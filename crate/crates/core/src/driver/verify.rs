//! Seeded invariant suite over one configured problem. The rendered report
//! is deterministic (no timings) so repeated runs compare byte-for-byte.

use super::adaptive::{discretize, Discretization};
use super::config::ExperimentConfig;
use crate::dpg::{estimate_discrete_infsup, project_residual, solve_pg, trial_norm_gram, trial_to_test, DpgSystem};
use crate::estimator::{build_report, eta_indicator, least_squares_system, solve_least_squares, umin_correction, CellType};
use crate::lifts::{build_frame, exact_modified_lift, lift_norms, local_problem, modified_form, special_inner_product};
use crate::linalg::DENSE_LIMIT;
use crate::mesh::build_root_mesh;
use crate::poly::{exponents, CellPoly, Chart, Poly};
use crate::problem::{ScalarField, TransportProblem};
use crate::quadrature::cell_rule;
use crate::Result;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub header: String,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.name).collect()
    }

    pub fn render(&self) -> String {
        let mut s = format!("{}\n", self.header);
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            writeln!(s, "{tag} {}: {}", c.name, c.detail).unwrap();
        }
        let count = |st: Status| self.checks.iter().filter(|c| c.status == st).count();
        writeln!(s, "summary: {} passed, {} failed, {} skipped", count(Status::Pass), count(Status::Fail), count(Status::Skipped)).unwrap();
        s
    }
}

fn check(name: &'static str, ok: bool, detail: String) -> CheckResult {
    CheckResult { name, status: if ok { Status::Pass } else { Status::Fail }, detail }
}

fn skipped(name: &'static str, why: &str) -> CheckResult {
    CheckResult { name, status: Status::Skipped, detail: why.to_string() }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_cell_poly(rng: &mut ChaCha8Rng, chart: Chart, dim: usize, deg: usize) -> CellPoly {
    let mut p = Poly::with_shape(deg, if dim == 1 { 0 } else { deg });
    for (i, j) in exponents(dim, deg) {
        p.set(i, j, rng.gen_range(-1.0..1.0));
    }
    CellPoly::new(chart, p)
}

/// Gram blocks must be symmetric and positive definite.
pub fn check_gram<'a>(blocks: impl Iterator<Item = &'a DMatrix<f64>>) -> CheckResult {
    let mut worst_asym = 0.0f64;
    let mut n = 0;
    for (k, g) in blocks.enumerate() {
        n += 1;
        let scale = g.amax().max(f64::MIN_POSITIVE);
        worst_asym = worst_asym.max((g - g.transpose()).amax() / scale);
        if worst_asym > 1e-12 {
            return check("gram_spd", false, format!("block {k} not symmetric (relative asymmetry {worst_asym:.3e})"));
        }
        if Cholesky::new(g.clone()).is_none() {
            return check("gram_spd", false, format!("block {k} not positive definite"));
        }
    }
    check("gram_spd", true, format!("{n} blocks"))
}

fn rnorm2(sys: &DpgSystem, x: &[f64]) -> f64 {
    project_residual(sys, x).norm2()
}

fn pg_checks(sys: &DpgSystem, rng: &mut ChaCha8Rng, samples: usize, out: &mut Vec<CheckResult>) -> Result<Vec<f64>> {
    out.push(check_gram((0..sys.g.num_blocks()).map(|k| sys.g.block(k))));
    let s = sys.s.to_dense();
    let asym = (&s - s.transpose()).amax() / s.amax().max(f64::MIN_POSITIVE);
    out.push(check("normal_matrix_symmetric", asym <= 1e-12, format!("relative asymmetry {asym:.3e}")));
    let x = solve_pg(sys)?;
    let r0 = rnorm2(sys, &x);
    let n = sys.trial.dim();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let y: Vec<f64> = x.iter().zip(random_vec(rng, n)).map(|(a, d)| a + d).collect();
        let d: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let ry = rnorm2(sys, &y);
        let t2: f64 = trial_to_test(sys, &d).1.iter().sum();
        worst = worst.max((ry - r0 - t2).abs() / ry);
    }
    out.push(check("pg_orthogonality", worst <= 1e-9, format!("max relative defect {worst:.3e} over {samples} perturbations")));
    // relative excess (‖R(y)‖² − ‖R(x)‖²)/‖R(y)‖² must be non-negative
    let mut min_excess = f64::INFINITY;
    for _ in 0..samples {
        let d = random_vec(rng, n);
        let y: Vec<f64> = x.iter().zip(&d).map(|(a, d)| a + 1e-3 * d).collect();
        let ry = rnorm2(sys, &y);
        min_excess = min_excess.min((ry - r0) / ry);
    }
    out.push(check("pg_minimality", min_excess >= -1e-10, format!("min relative excess {min_excess:.3e}")));
    let z = random_vec(rng, n);
    let r = project_residual(sys, &z);
    let gr = sys.g.apply(&r.coeffs);
    let bz = sys.b.matvec(&z);
    let scale = bz.iter().zip(&sys.f).map(|(a, f)| (a - f).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let defect = gr.iter().zip(bz.iter().zip(&sys.f)).map(|(g, (b, f))| (g - (b - f)).abs()).fold(0.0, f64::max) / scale;
    out.push(check("residual_identity", defect <= 1e-12, format!("relative defect {defect:.3e}")));
    let z2 = random_vec(rng, n);
    let r2 = project_residual(sys, &z2);
    let dz: Vec<f64> = z.iter().zip(&z2).map(|(a, b)| a - b).collect();
    let (t, _) = trial_to_test(sys, &dz);
    let tscale = t.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let rel = (0..t.len()).map(|i| (r.coeffs[i] - r2.coeffs[i] - t[i]).abs()).fold(0.0, f64::max) / tscale;
    out.push(check("trial_to_test_relation", rel <= 1e-12, format!("relative defect {rel:.3e}")));
    Ok(x)
}

fn homogeneous(problem: &TransportProblem) -> TransportProblem {
    TransportProblem { f: ScalarField::Constant(0.0), exact: None, ..problem.clone() }
}

fn ls_checks(problem: &TransportProblem, d: &Discretization, cfg: &ExperimentConfig, rng: &mut ChaCha8Rng, out: &mut Vec<CheckResult>) -> Result<Vec<f64>> {
    let trial = &d.sys.trial;
    let disc = &cfg.disc;
    let xbar = solve_least_squares(problem, trial, disc.cg_tol, disc.cg_maxit)?;
    let (a, rhs) = least_squares_system(problem, trial);
    let ax = a.matvec(&xbar);
    let scale = rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        out.push(skipped("ls_first_order", "zero source"));
    } else {
        let defect = ax.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
        out.push(check("ls_first_order", defect <= 1e-10, format!("relative defect {defect:.3e}")));
    }
    let zero = homogeneous(problem);
    let eta2 = |p: &TransportProblem, x: &[f64]| eta_indicator(p, trial, x).iter().sum::<f64>();
    let e0 = eta2(problem, &xbar);
    let mut worst = 0.0f64;
    for _ in 0..cfg.samples.min(10) {
        let y: Vec<f64> = xbar.iter().zip(random_vec(rng, trial.dim())).map(|(a, d)| a + d).collect();
        let dy: Vec<f64> = y.iter().zip(&xbar).map(|(a, b)| a - b).collect();
        let ey = eta2(problem, &y);
        worst = worst.max((ey - e0 - eta2(&zero, &dy)).abs() / ey);
    }
    out.push(check("ls_orthogonality", worst <= 1e-10, format!("max relative defect {worst:.3e}")));
    let report = build_report(problem, trial, &d.sys.data, &xbar, None, disc.beta, d.osc)?;
    let averages: Vec<_> = report.averages.iter().flatten().filter(|l| l.g_norm2 > 0.0).collect();
    if problem.constant_b().is_none() {
        out.push(skipped("line_average_orthogonality", "variable convection"));
    } else if averages.is_empty() {
        out.push(skipped("line_average_orthogonality", "vanishing residual"));
    } else {
        let mut worst = 0.0f64;
        for l in &averages {
            let diff = crate::lifts::PiecewisePoly { polys: l.avg.polys.iter().map(|a| { let d = &l.g - a; &d * &d }).collect() };
            let rest = l.frame.integrate(&diff);
            worst = worst.max((l.avg_norm2 - (l.g_norm2 - rest)).abs() / l.g_norm2);
        }
        out.push(check("line_average_orthogonality", worst <= 1e-9, format!("max relative defect {worst:.3e} over {} cells", averages.len())));
    }
    let type2: Vec<_> = report.cells.iter().filter(|c| c.kind == CellType::II && c.g_norm > 0.0).collect();
    if type2.is_empty() {
        out.push(skipped("type_ii_omega_bound", "no Type-II cells"));
    } else {
        let bad = type2.iter().filter(|c| !(c.omega < 2.0 * c.c_sup + 1.0)).count();
        out.push(check("type_ii_omega_bound", bad == 0, format!("{bad} violations over {} Type-II cells", type2.len())));
    }
    Ok(xbar)
}

fn lift_checks(sys: &DpgSystem, rng: &mut ChaCha8Rng, samples: usize, out: &mut Vec<CheckResult>) -> Result<()> {
    let fine = &sys.pair.fine;
    let dim = fine.dim();
    let x = random_vec(rng, sys.trial.dim());
    let mut worst = 0.0f64;
    let mut cells = 0;
    for _ in 0..samples {
        let kf = rng.gen_range(0..fine.num_cells());
        let c = sys.pair.parent[kf];
        let (frame, data) = local_problem(sys, &x, kf)?;
        let r = exact_modified_lift(&frame, &data);
        let rn = lift_norms(&frame, &r).1.sqrt();
        let verts = fine.cell_points(kf);
        let u = sys.trial.u_poly(&x, c);
        let w = sys.trial.w_poly(&x, c);
        for _ in 0..10 {
            let v = random_cell_poly(rng, fine.cell_chart(kf), dim, sys.cfg.m_v);
            let vf = frame.uniform(frame.poly(&v));
            let lhs = special_inner_product(&frame, &r, &vf);
            let deg = 2 * sys.cfg.m_v + sys.cfg.m_u.max(sys.cfg.m_w) + sys.cfg.m_f + 2;
            let fv: f64 = cell_rule(&verts, deg).iter().map(|(p, wt)| wt * sys.data.f[c].eval(*p) * v.eval(*p)).sum();
            let rhs = modified_form(&verts, sys.data.b_avg[kf], sys.data.div_avg[kf], &sys.data.b[c], &sys.data.c[c], &u, &w, &v) - fv;
            let scale = (rn * lift_norms(&frame, &vf).1.sqrt()).max(f64::MIN_POSITIVE);
            worst = worst.max((lhs - rhs).abs() / scale);
        }
        cells += 1;
    }
    out.push(check("modified_lift_identity", worst <= 1e-9, format!("max relative defect {worst:.3e} on {cells} cells")));
    let mut bad = 0;
    for _ in 0..samples {
        let kf = rng.gen_range(0..fine.num_cells());
        let frame = build_frame(&fine.cell_points(kf), sys.data.b_avg[kf])?;
        let v = frame.uniform(frame.poly(&random_cell_poly(rng, fine.cell_chart(kf), dim, sys.cfg.m_v)));
        let (n, tn) = lift_norms(&frame, &v);
        if (n - tn).abs() > frame.diam / frame.bnorm * n * (1.0 + 1e-10) {
            bad += 1;
        }
    }
    out.push(check("norm_closeness", bad == 0, format!("{bad} violations over {samples} samples")));
    Ok(())
}

/// Minimiser of `‖e − v‖² + ‖g − c v‖²` over `span(basis)` by a weighted
/// least-squares solve on quadrature samples.
pub fn umin_oracle(verts: &[Point2], basis: &[CellPoly], e: &CellPoly, g: &CellPoly, c: f64) -> (Vec<f64>, f64) {
    let deg = 2 * basis.iter().chain([e, g]).map(|p| p.p.total_degree()).max().unwrap_or(0);
    let rule = cell_rule(verts, deg);
    let m = 2 * rule.len();
    let mut a = DMatrix::zeros(m, basis.len());
    let mut b = DVector::zeros(m);
    for (q, (p, w)) in rule.iter().enumerate() {
        let s = w.sqrt();
        for (j, phi) in basis.iter().enumerate() {
            a[(2 * q, j)] = s * phi.eval(*p);
            a[(2 * q + 1, j)] = s * c * phi.eval(*p);
        }
        b[2 * q] = s * e.eval(*p);
        b[2 * q + 1] = s * g.eval(*p);
    }
    let coef = a.clone().svd(true, true).solve(&b, 1e-14).expect("least-squares solve");
    let q = (&a * &coef - &b).norm_squared();
    let q0 = b.norm_squared();
    (coef.as_slice().to_vec(), if q0 == 0.0 { 1.0 } else { q / q0 })
}

type Point2 = crate::geometry::Point;

fn umin_check(rng: &mut ChaCha8Rng, instances: usize) -> CheckResult {
    let mut worst = 0.0f64;
    for i in 0..instances {
        let verts: Vec<Point2> = if i % 2 == 0 {
            vec![[0.0, 0.0], [rng.gen_range(0.1..1.0), 0.0]]
        } else {
            vec![[0.0, 0.0], [rng.gen_range(0.3..1.0), rng.gen_range(-0.2..0.2)], [rng.gen_range(-0.2..0.2), rng.gen_range(0.3..1.0)]]
        };
        let dim = verts.len() - 1;
        let chart = Chart { center: crate::geometry::centroid(&verts), h: crate::geometry::diameter(&verts) };
        let deg = rng.gen_range(0..3);
        let e = random_cell_poly(rng, chart, dim, deg);
        let g = random_cell_poly(rng, chart, dim, deg);
        let c = rng.gen_range(-3.0..3.0);
        let basis = crate::basis::orthonormal_basis(&verts, deg, chart);
        let (coef, factor_oracle) = umin_oracle(&verts, &basis, &e, &g, c);
        let (u, factor) = umin_correction(&verts, &e, &g, c);
        let rule = cell_rule(&verts, 2 * deg);
        for (j, phi) in basis.iter().enumerate() {
            let cj: f64 = rule.iter().map(|(p, w)| w * u.eval(*p) * phi.eval(*p)).sum();
            worst = worst.max((cj - coef[j]).abs());
        }
        worst = worst.max((factor - factor_oracle).abs());
    }
    check("umin_oracle", worst <= 1e-10, format!("max deviation {worst:.3e} over {instances} instances"))
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let problem = &cfg.problem;
    let mesh = build_root_mesh(problem.domain, cfg.resolution)?;
    problem.validate(&mesh)?;
    let d = discretize(problem, &mesh, &cfg.disc)?;
    let mut checks = Vec::new();
    pg_checks(&d.sys, &mut rng, cfg.samples, &mut checks)?;
    ls_checks(problem, &d, cfg, &mut rng, &mut checks)?;
    lift_checks(&d.sys, &mut rng, cfg.samples, &mut checks)?;
    checks.push(umin_check(&mut rng, 50));
    if d.sys.trial.dim() <= DENSE_LIMIT {
        let m = trial_norm_gram(&d.sys.trial, &d.sys.data, &cfg.disc);
        let g = estimate_discrete_infsup(&d.sys.s, &m)?;
        checks.push(check("discrete_infsup_positive", g > 0.0, format!("gamma = {g:.6e}")));
    } else {
        checks.push(skipped("discrete_infsup_positive", "system too large for the dense estimate"));
    }
    let header = format!(
        "verify report: problem={} dim={} cells={} ndof={} seed={} samples={}",
        problem.name,
        problem.dim(),
        mesh.num_cells(),
        d.sys.trial.dim(),
        cfg.seed,
        cfg.samples
    );
    Ok(VerifyReport { header, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_control_flags_the_gram_check() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.4, 2.0]);
        let r = check_gram([g].iter());
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.name, "gram_spd");
        let ok = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 2.0]);
        assert_eq!(check_gram([ok].iter()).status, Status::Pass);
    }
}
