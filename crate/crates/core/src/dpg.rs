//! Broken bilinear form in (u, w) form, test-space Gram operator, the
//! minimal-residual Petrov-Galerkin solve, projected lifted residuals, and
//! the discrete inf-sup diagnostic.

use crate::geometry::{dot, Point};
use crate::linalg::{normal_matrix, solve_spd, BlockDiagonal, SparseMatrix, SparseSymmetric, TripletBuilder, DENSE_LIMIT};
use crate::mesh::SubgridPair;
use crate::poly::CellPoly;
use crate::problem::{DiscretizationConfig, PerturbedData, TransportProblem};
use crate::quadrature::{cell_rule, cell_rule_split, segment_rule, Rule};
use crate::spaces::{TestSearchSpace, TrialSpace};
use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix};

/// Values and gradients of a family of cell polynomials at quadrature points.
pub(crate) struct Tabulated {
    pub val: Vec<Vec<f64>>,
    pub grad: Vec<Vec<Point>>,
}

pub(crate) fn tabulate(basis: &[CellPoly], pts: &[Point]) -> Tabulated {
    let d: Vec<(CellPoly, CellPoly)> = basis.iter().map(|p| (p.dx(), p.dy())).collect();
    Tabulated {
        val: pts.iter().map(|x| basis.iter().map(|p| p.eval(*x)).collect()).collect(),
        grad: pts.iter().map(|x| d.iter().map(|(a, b)| [a.eval(*x), b.eval(*x)]).collect()).collect(),
    }
}

/// Quadrature rule on face `i` of a simplex (a single unit-weight point in 1D).
pub(crate) fn face_rule(verts: &[Point], i: usize, deg: usize) -> Rule {
    if verts.len() == 2 {
        vec![(verts[1 - i], 1.0)]
    } else {
        segment_rule(verts[(i + 1) % 3], verts[(i + 2) % 3], deg)
    }
}

pub(crate) fn quad_degree(cfg_like: (usize, usize, usize, usize)) -> usize {
    let (m_v, m_trial, m_data, extra) = cfg_like;
    2 * m_v + m_trial + 2 * m_data + extra
}

#[derive(Clone, Debug)]
pub struct DpgSystem {
    pub pair: SubgridPair,
    pub trial: TrialSpace,
    pub test: TestSearchSpace,
    pub data: PerturbedData,
    pub b: SparseMatrix,
    pub g: BlockDiagonal,
    pub f: Vec<f64>,
    pub s: SparseSymmetric,
    pub rhs: Vec<f64>,
    pub cfg: DiscretizationConfig,
}

pub fn assemble(
    data: &PerturbedData,
    trial: &TrialSpace,
    test: &TestSearchSpace,
    pair: &SubgridPair,
    cfg: &DiscretizationConfig,
) -> Result<DpgSystem> {
    if trial.mesh.num_cells() != pair.coarse.num_cells() || test.basis.len() != pair.fine.num_cells() {
        return Err(Error::Dimension("trial/test spaces do not match the subgrid pair".into()));
    }
    let fine = &pair.fine;
    let nv = test.n_local;
    let m_data = cfg.m_b.max(cfg.m_c).max(cfg.m_f);
    let qdeg = quad_degree((cfg.m_v, cfg.m_u.max(cfg.m_w), m_data, 0));
    let mut bt = TripletBuilder::new(test.dim(), trial.dim());
    let mut blocks = Vec::with_capacity(fine.num_cells());
    let mut f = vec![0.0; test.dim()];
    for kf in 0..fine.num_cells() {
        let c = pair.parent[kf];
        let verts = fine.cell_points(kf);
        let bt_c = &data.b[c];
        let div = data.div_b(c);
        let (udofs, wdofs) = trial.cell_dofs(c);
        let wbasis: Vec<CellPoly> = wdofs.iter().map(|(i, _)| trial.w_basis[c][*i].clone()).collect();
        let off = test.offset(kf);
        let rule = cell_rule(&verts, qdeg);
        let pts: Vec<Point> = rule.iter().map(|r| r.0).collect();
        let tv = tabulate(&test.basis[kf], &pts);
        let tu = tabulate(&trial.u_basis[c], &pts);
        let mut bk = DMatrix::zeros(nv, udofs.len() + wdofs.len());
        let mut gk = DMatrix::zeros(nv, nv);
        for (q, (x, w)) in rule.iter().enumerate() {
            let bx = [bt_c[0].eval(*x), bt_c[1].eval(*x)];
            let cx = data.c[c].eval(*x);
            let dx = div.eval(*x);
            let fx = data.f[c].eval(*x);
            for i in 0..nv {
                let psi = tv.val[q][i];
                let bgrad_i = dot(bx, tv.grad[q][i]);
                let a = cx * psi - bgrad_i - psi * dx;
                for (j, uval) in tu.val[q].iter().enumerate() {
                    bk[(i, j)] += w * a * uval;
                }
                f[off + i] += w * fx * psi;
                for j in 0..=i {
                    let v = w * (psi * tv.val[q][j] + bgrad_i * dot(bx, tv.grad[q][j]));
                    gk[(i, j)] += v;
                }
            }
        }
        for i in 0..nv {
            for j in 0..i {
                gk[(j, i)] = gk[(i, j)];
            }
        }
        for face in 0..verts.len() {
            let n = crate::mesh::face_normal_of(&verts, face);
            let fr = face_rule(&verts, face, qdeg);
            for (x, w) in &fr {
                let bn = bt_c[0].eval(*x) * n[0] + bt_c[1].eval(*x) * n[1];
                if bn == 0.0 {
                    continue;
                }
                let wv: Vec<f64> = wbasis.iter().map(|p| p.eval(*x)).collect();
                for (i, psi) in test.basis[kf].iter().enumerate() {
                    let pv = w * bn * psi.eval(*x);
                    for (j, wj) in wv.iter().enumerate() {
                        bk[(i, udofs.len() + j)] += pv * wj;
                    }
                }
            }
        }
        for i in 0..nv {
            for (j, &g) in udofs.iter().enumerate() {
                bt.push(off + i, g, bk[(i, j)]);
            }
            for (j, &(_, g)) in wdofs.iter().enumerate() {
                bt.push(off + i, g, bk[(i, udofs.len() + j)]);
            }
        }
        blocks.push(gk);
    }
    let b = bt.build();
    let g = BlockDiagonal::new(blocks)?;
    let s = normal_matrix(&b, &g)?;
    let rhs = b.transpose_matvec(&g.solve(&f));
    Ok(DpgSystem {
        pair: pair.clone(),
        trial: trial.clone(),
        test: test.clone(),
        data: data.clone(),
        b,
        g,
        f,
        s,
        rhs,
        cfg: cfg.clone(),
    })
}

pub fn solve_pg(sys: &DpgSystem) -> Result<Vec<f64>> {
    solve_spd(&sys.s, &sys.rhs, sys.cfg.cg_tol, sys.cfg.cg_maxit)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftKind {
    Projected,
    ExactModified,
    Approximate,
}

/// Residual lift in the broken test space.
#[derive(Clone, Debug)]
pub struct LiftedResidual {
    pub kind: LiftKind,
    /// Coefficients in the test basis (all fine cells, concatenated).
    pub coeffs: Vec<f64>,
    /// Per fine cell squared broken norm.
    pub cell_norm2: Vec<f64>,
    /// Per fine cell `|||·|||²` (modified lifts only).
    pub cell_triple_norm2: Vec<f64>,
}

impl LiftedResidual {
    pub fn norm2(&self) -> f64 {
        self.cell_norm2.iter().sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    /// Squared norm summed over the fine cells of each coarse cell.
    pub fn coarse_norm2(&self, pair: &SubgridPair) -> Vec<f64> {
        pair.children.iter().map(|kids| kids.iter().map(|&k| self.cell_norm2[k]).sum()).collect()
    }
}

fn gram_norms(sys: &DpgSystem, r: &[f64]) -> Vec<f64> {
    let gr = sys.g.apply(r);
    (0..sys.g.num_blocks()).map(|k| sys.g.range(k).map(|i| r[i] * gr[i]).sum()).collect()
}

/// Test-space representative of `B x - F`.
pub fn project_residual(sys: &DpgSystem, x: &[f64]) -> LiftedResidual {
    let mut bx = sys.b.matvec(x);
    for (a, f) in bx.iter_mut().zip(&sys.f) {
        *a -= f;
    }
    let coeffs = sys.g.solve(&bx);
    let cell_norm2 = gram_norms(sys, &coeffs);
    LiftedResidual { kind: LiftKind::Projected, coeffs, cell_norm2, cell_triple_norm2: vec![] }
}

/// Trial-to-test map `G⁻¹ B x` and its per-cell squared norms.
pub fn trial_to_test(sys: &DpgSystem, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let t = sys.g.solve(&sys.b.matvec(x));
    let n = gram_norms(sys, &t);
    (t, n)
}

/// Gram matrix of the trial norm `‖u‖² + ‖w‖² + ‖b̃·∇w‖²`.
pub fn trial_norm_gram(trial: &TrialSpace, data: &PerturbedData, cfg: &DiscretizationConfig) -> SparseSymmetric {
    let mut t = TripletBuilder::new(trial.dim(), trial.dim());
    for i in 0..trial.n_u {
        t.push(i, i, 1.0);
    }
    let qdeg = 2 * cfg.m_w + 2 * cfg.m_b;
    for k in 0..trial.mesh.num_cells() {
        let (_, wd) = trial.cell_dofs(k);
        let basis: Vec<CellPoly> = wd.iter().map(|(i, _)| trial.w_basis[k][*i].clone()).collect();
        let rule = cell_rule(&trial.mesh.cell_points(k), qdeg);
        let pts: Vec<Point> = rule.iter().map(|r| r.0).collect();
        let tab = tabulate(&basis, &pts);
        for (q, (x, w)) in rule.iter().enumerate() {
            let b = [data.b[k][0].eval(*x), data.b[k][1].eval(*x)];
            for (i, &(_, gi)) in wd.iter().enumerate() {
                let di = dot(b, tab.grad[q][i]);
                for (j, &(_, gj)) in wd.iter().enumerate() {
                    t.push(gi, gj, w * (tab.val[q][i] * tab.val[q][j] + di * dot(b, tab.grad[q][j])));
                }
            }
        }
    }
    t.build()
}

pub fn quadratic_form(m: &SparseMatrix, x: &[f64]) -> f64 {
    m.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
}

/// `sqrt(λ_min)` of `S x = λ M x`, by a dense symmetric eigensolve of
/// `L⁻¹ S L⁻ᵀ` with `M = L Lᵀ`.
pub fn estimate_discrete_infsup(s: &SparseSymmetric, m: &SparseSymmetric) -> Result<f64> {
    let n = s.nrows;
    if n > DENSE_LIMIT {
        return Err(Error::Eigen(format!("inf-sup estimate limited to {DENSE_LIMIT} unknowns (got {n})")));
    }
    let l = Cholesky::new(m.to_dense()).ok_or(Error::NotSpd { block: 0 })?.l();
    let linv = l.solve_lower_triangular(&DMatrix::identity(n, n)).ok_or_else(|| Error::Eigen("singular trial-norm factor".into()))?;
    let c = &linv * s.to_dense() * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let lambda = c.symmetric_eigenvalues().min();
    Ok(lambda.max(0.0).sqrt())
}

/// `(‖u^ex − u‖_{L2}, ‖u^ex − w‖_{H(b)})` using `∂_b u^ex = f − c u^ex`.
pub fn exact_errors(problem: &TransportProblem, trial: &TrialSpace, x: &[f64], extra_degree: usize) -> Option<(f64, f64)> {
    let exact = problem.exact.as_ref()?;
    let cuts = problem.cuts();
    let mut eu = 0.0;
    let mut ew = 0.0;
    let mesh = &trial.mesh;
    for k in 0..mesh.num_cells() {
        let root = mesh.element(k).root;
        let u = trial.u_poly(x, k);
        let w = trial.w_poly(x, k);
        let (wx, wy) = (w.dx(), w.dy());
        let deg = 2 * trial.m_u.max(trial.m_w) + extra_degree;
        for (p, wt) in cell_rule_split(&mesh.cell_points(k), deg, &cuts) {
            let ue = exact(p);
            let b = problem.b_at(root, p);
            let dbue = problem.f.eval(root, p) - problem.c.eval(root, p) * ue;
            let dbw = b[0] * wx.eval(p) + b[1] * wy.eval(p);
            eu += wt * (ue - u.eval(p)).powi(2);
            ew += wt * ((ue - w.eval(p)).powi(2) + (dbue - dbw).powi(2));
        }
    }
    Some((eu.sqrt(), ew.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_root_mesh, classify_faces, make_subgrid, Domain};
    use crate::problem::{project_data, ScalarField, VectorField};
    use crate::spaces::{build_test_space, build_trial_space};

    fn setup(n: usize, depth: u32, cfg: &DiscretizationConfig, c: f64, f: f64) -> (TransportProblem, DpgSystem) {
        let problem = TransportProblem {
            name: "t".into(),
            domain: Domain::Interval(0.0, 1.0),
            b: VectorField::constant([1.0, 0.0]),
            c: ScalarField::Constant(c),
            f: ScalarField::Constant(f),
            exact: None,
            exact_cuts: vec![],
        };
        let m = build_root_mesh(problem.domain, n).unwrap();
        let pair = make_subgrid(&m, depth);
        let fc = classify_faces(&m, &problem.b_fn());
        let trial = build_trial_space(&m, cfg.m_u, cfg.m_w, &fc);
        let test = build_test_space(&pair.fine, cfg.m_v);
        let data = project_data(&problem, &pair, cfg);
        let sys = assemble(&data, &trial, &test, &pair, cfg).unwrap();
        (problem, sys)
    }

    fn w_equals_x(sys: &DpgSystem) -> Vec<f64> {
        let mut x = vec![0.0; sys.trial.dim()];
        for (i, p) in sys.trial.w_nodes.iter().enumerate() {
            x[sys.trial.n_u + i] = p[0];
        }
        x
    }

    #[test]
    fn hand_computed_form_value() {
        let cfg = DiscretizationConfig::with_degrees(0, 1, 0);
        let (_, sys) = setup(1, 0, &cfg, 0.0, 1.0);
        // constant test function 1 = sqrt(|K|) * first orthonormal function
        let x = w_equals_x(&sys);
        let bx = sys.b.matvec(&x);
        assert!((bx[0] - 1.0).abs() < 1e-14);
        let mut u1 = vec![0.0; sys.trial.dim()];
        u1[0] = 1.0;
        assert!(sys.b.matvec(&u1)[0].abs() < 1e-14);
    }

    #[test]
    fn exact_pair_has_zero_residual_and_is_recovered() {
        let cfg = DiscretizationConfig::with_degrees(1, 1, 0);
        let (_, sys) = setup(3, 1, &cfg, 0.0, 1.0);
        let mut x = w_equals_x(&sys);
        // u = x on each cell: project onto the orthonormal P1 basis
        for k in 0..3 {
            let rule = cell_rule(&sys.trial.mesh.cell_points(k), 2);
            for (i, phi) in sys.trial.u_basis[k].iter().enumerate() {
                x[2 * k + i] = rule.iter().map(|(p, w)| w * p[0] * phi.eval(*p)).sum();
            }
        }
        assert!(project_residual(&sys, &x).norm() < 1e-13);
        let sol = solve_pg(&sys).unwrap();
        let err = sol.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn zero_source_gives_zero_solution() {
        let cfg = DiscretizationConfig::with_degrees(0, 1, 0);
        let (_, sys) = setup(4, 1, &cfg, 1.0, 0.0);
        assert!(solve_pg(&sys).unwrap().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn residual_identity_and_trial_to_test() {
        let cfg = DiscretizationConfig::with_degrees(1, 2, 0);
        let (_, sys) = setup(3, 2, &cfg, 1.0, 1.0);
        let x: Vec<f64> = (0..sys.trial.dim()).map(|i| (i as f64).cos()).collect();
        let y: Vec<f64> = (0..sys.trial.dim()).map(|i| (i as f64 * 0.3).sin()).collect();
        let r = project_residual(&sys, &x);
        let gr = sys.g.apply(&r.coeffs);
        let bx = sys.b.matvec(&x);
        for i in 0..gr.len() {
            assert!((gr[i] - (bx[i] - sys.f[i])).abs() < 1e-12);
        }
        let ry = project_residual(&sys, &y);
        let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let (t, tn) = trial_to_test(&sys, &d);
        for i in 0..t.len() {
            assert!((r.coeffs[i] - ry.coeffs[i] - t[i]).abs() < 1e-12);
        }
        assert!(tn.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn infsup_is_positive_and_monotone_in_depth() {
        let cfg = DiscretizationConfig::with_degrees(0, 1, 0);
        let mut last = 0.0;
        for depth in 1..4 {
            let (_, sys) = setup(4, depth, &cfg, 1.0, 1.0);
            let m = trial_norm_gram(&sys.trial, &sys.data, &cfg);
            let g = estimate_discrete_infsup(&sys.s, &m).unwrap();
            assert!(g > 0.0);
            assert!(g >= last - 1e-10, "{g} < {last}");
            last = g;
        }
        let id = SparseMatrix::identity(3);
        assert!((estimate_discrete_infsup(&id, &id).unwrap() - 1.0).abs() < 1e-12);
    }
}
