//! Mesh-independent least-squares indicator η, the least-squares companion
//! solver, line averages along characteristics, Type-I/II classification,
//! bulk marking, and the diagnostics built on them.

use crate::dpg::tabulate;
use crate::geometry::Point;
use crate::lifts::{build_frame, CharacteristicFrame, PiecewisePoly};
use crate::linalg::{solve_spd, SparseSymmetric, TripletBuilder};
use crate::mesh::SimplicialMesh;
use crate::poly::{CellPoly, Poly};
use crate::problem::{sample_points, PerturbedData, TransportProblem};
use crate::quadrature::{cell_rule, cell_rule_split, gauss_legendre, points_for_degree, Cut};
use crate::spaces::TrialSpace;
use crate::{Error, Result};
use std::collections::HashMap;

/// Extra quadrature degree for raw data that are not cellwise polynomial.
const NONPOLY_DATA_DEGREE: usize = 8;

fn raw_data_degree(problem: &TransportProblem) -> usize {
    let d = [problem.b.cell_degree(), problem.c.cell_degree(), problem.f.cell_degree()];
    d.iter().map(|x| x.unwrap_or(NONPOLY_DATA_DEGREE)).max().unwrap_or(0)
}

fn trial_rule(problem: &TransportProblem, trial: &TrialSpace, k: usize, extra: usize) -> Vec<(Point, f64)> {
    let deg = 2 * trial.m_u.max(trial.m_w) + 2 * raw_data_degree(problem) + extra;
    cell_rule_split(&trial.mesh.cell_points(k), deg, &problem.cuts())
}

/// Per cell `(‖u−w‖², ‖∂_b w + c u − f‖², ‖(u−w) + c(∂_b w + c u − f)‖²)` with raw data.
pub fn residual_norms(problem: &TransportProblem, trial: &TrialSpace, x: &[f64]) -> Vec<[f64; 3]> {
    let mesh = &trial.mesh;
    (0..mesh.num_cells())
        .map(|k| {
            let root = mesh.element(k).root;
            let u = trial.u_poly(x, k);
            let w = trial.w_poly(x, k);
            let (wx, wy) = (w.dx(), w.dy());
            let mut acc = [0.0; 3];
            for (p, wt) in trial_rule(problem, trial, k, 0) {
                let b = problem.b_at(root, p);
                let c = problem.c.eval(root, p);
                let uv = u.eval(p);
                let e = uv - w.eval(p);
                let g = b[0] * wx.eval(p) + b[1] * wy.eval(p) + c * uv - problem.f.eval(root, p);
                acc[0] += wt * e * e;
                acc[1] += wt * g * g;
                acc[2] += wt * (e + c * g).powi(2);
            }
            acc
        })
        .collect()
}

/// Per-cell `η²_K = ‖u−w‖²_K + ‖∂_b w + c u − f‖²_K`.
pub fn eta_indicator(problem: &TransportProblem, trial: &TrialSpace, x: &[f64]) -> Vec<f64> {
    residual_norms(problem, trial, x).iter().map(|r| r[0] + r[1]).collect()
}

/// Normal equations of `min η²_Ω` over the trial space.
pub fn least_squares_system(problem: &TransportProblem, trial: &TrialSpace) -> (SparseSymmetric, Vec<f64>) {
    let mesh = &trial.mesh;
    let mut t = TripletBuilder::new(trial.dim(), trial.dim());
    let mut rhs = vec![0.0; trial.dim()];
    for k in 0..mesh.num_cells() {
        let root = mesh.element(k).root;
        let (ud, wd) = trial.cell_dofs(k);
        let wb: Vec<CellPoly> = wd.iter().map(|(i, _)| trial.w_basis[k][*i].clone()).collect();
        let rule = trial_rule(problem, trial, k, 0);
        let pts: Vec<Point> = rule.iter().map(|r| r.0).collect();
        let tu = tabulate(&trial.u_basis[k], &pts);
        let tw = tabulate(&wb, &pts);
        let dofs: Vec<usize> = ud.iter().copied().chain(wd.iter().map(|d| d.1)).collect();
        let nu = ud.len();
        let mut local = vec![0.0; dofs.len() * dofs.len()];
        for (q, (p, wt)) in rule.iter().enumerate() {
            let b = problem.b_at(root, *p);
            let c = problem.c.eval(root, *p);
            let f = problem.f.eval(root, *p);
            // (u−w component, operator component) of each local basis function
            let comp: Vec<(f64, f64)> = (0..dofs.len())
                .map(|j| {
                    if j < nu {
                        (tu.val[q][j], c * tu.val[q][j])
                    } else {
                        let g = tw.grad[q][j - nu];
                        (-tw.val[q][j - nu], b[0] * g[0] + b[1] * g[1])
                    }
                })
                .collect();
            for i in 0..dofs.len() {
                rhs[dofs[i]] += wt * f * comp[i].1;
                for j in 0..dofs.len() {
                    local[i * dofs.len() + j] += wt * (comp[i].0 * comp[j].0 + comp[i].1 * comp[j].1);
                }
            }
        }
        for i in 0..dofs.len() {
            for j in 0..dofs.len() {
                t.push(dofs[i], dofs[j], local[i * dofs.len() + j]);
            }
        }
    }
    (t.build(), rhs)
}

pub fn solve_least_squares(problem: &TransportProblem, trial: &TrialSpace, tol: f64, maxit: usize) -> Result<Vec<f64>> {
    let (a, rhs) = least_squares_system(problem, trial);
    solve_spd(&a, &rhs, tol, maxit)
}

/// Line averages `A(g)` of a cell polynomial along the characteristics of a
/// constant field, as a piecewise polynomial (in y only) on the frame pieces.
#[derive(Clone, Debug)]
pub struct LineAverage {
    pub frame: CharacteristicFrame,
    pub g: Poly,
    pub avg: PiecewisePoly,
    pub g_norm2: f64,
    pub avg_norm2: f64,
}

impl LineAverage {
    pub fn eval(&self, x: Point) -> f64 {
        self.frame.eval(&self.avg, x)
    }

    /// `‖G‖ / ‖g‖` (1 when g vanishes).
    pub fn alpha(&self) -> f64 {
        if self.g_norm2 > 0.0 {
            (self.avg_norm2 / self.g_norm2).sqrt()
        } else {
            1.0
        }
    }

    /// Cut separating the frame pieces (2D cells with a middle-vertex break).
    pub fn cuts(&self) -> Vec<Cut> {
        if self.frame.dim == 1 || self.frame.pieces.len() < 2 {
            return vec![];
        }
        let y = self.frame.pieces[0].y1;
        let e2 = self.frame.e2;
        vec![Cut { normal: e2, offset: e2[0] * self.frame.origin[0] + e2[1] * self.frame.origin[1] + y }]
    }
}

pub fn line_average_field(verts: &[Point], b: Point, g: &CellPoly) -> Result<LineAverage> {
    let frame = build_frame(verts, b)?;
    let gp = frame.poly(g);
    let (t, w) = gauss_legendre(points_for_degree(gp.total_degree()));
    let polys = frame
        .pieces
        .iter()
        .map(|pc| {
            let mut a = Poly::zero();
            for (t, w) in t.iter().zip(w) {
                let x0 = pc.xm[0] + t * (pc.xp[0] - pc.xm[0]);
                let x1 = pc.xm[1] + t * (pc.xp[1] - pc.xm[1]);
                a = &a + &gp.compose_affine([x0, 0.0, x1], [0.0, 0.0, 1.0]).scaled(*w);
            }
            a.trimmed()
        })
        .collect();
    let avg = PiecewisePoly { polys };
    let sq = |v: &PiecewisePoly| PiecewisePoly { polys: v.polys.iter().map(|p| p * p).collect() };
    let g_norm2 = frame.integrate(&sq(&frame.uniform(gp.clone())));
    let avg_norm2 = frame.integrate(&sq(&avg));
    Ok(LineAverage { frame, g: gp, avg, g_norm2, avg_norm2 })
}

/// `z_g = |b|⁻¹ ∫_{x₋}^{x} (g − A(g))`: vanishes on inflow and outflow, `∂_b z_g = g − G`.
pub fn zg_lift(la: &LineAverage) -> PiecewisePoly {
    let gi = la.g.antideriv_x();
    let inv = 1.0 / la.frame.bnorm;
    let polys = la
        .frame
        .pieces
        .iter()
        .zip(&la.avg.polys)
        .map(|(pc, a)| {
            let shift = Poly::affine([-pc.xm[0], 1.0, -pc.xm[1]]);
            let at_m = gi.compose_affine([pc.xm[0], 0.0, pc.xm[1]], [0.0, 0.0, 1.0]);
            (&(&gi - &at_m) - &(a * &shift)).scaled(inv).trimmed()
        })
        .collect();
    PiecewisePoly { polys }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellType {
    I,
    II,
}

impl CellType {
    pub fn label(self) -> &'static str {
        match self {
            CellType::I => "I",
            CellType::II => "II",
        }
    }
}

/// Type I iff `‖e+cg‖² ≥ β (‖g‖² + ‖e‖²)`.
pub fn classify(e2: f64, g2: f64, ecg2: f64, beta: f64) -> CellType {
    let d = e2 + g2;
    if d == 0.0 || ecg2 >= beta * d {
        CellType::I
    } else {
        CellType::II
    }
}

#[derive(Clone, Debug)]
pub struct CellIndicator {
    pub eta2: f64,
    pub rdelta2: f64,
    pub e_norm: f64,
    pub g_norm: f64,
    pub ecg_norm: f64,
    pub alpha: f64,
    pub omega: f64,
    /// `sup |c|` on the cell.
    pub c_sup: f64,
    pub kind: CellType,
    pub marked: bool,
}

#[derive(Clone, Debug)]
pub struct IndicatorReport {
    pub cells: Vec<CellIndicator>,
    /// Line averages of the surrogate `g` (constant convection only).
    pub averages: Vec<Option<LineAverage>>,
    pub osc: f64,
}

impl IndicatorReport {
    pub fn eta2_total(&self) -> f64 {
        self.cells.iter().map(|c| c.eta2).sum()
    }

    pub fn rdelta2_total(&self) -> f64 {
        self.cells.iter().map(|c| c.rdelta2).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("cell_id,eta2,Rdelta2,alpha,omega,type,marked\n");
        for (k, c) in self.cells.iter().enumerate() {
            s.push_str(&format!(
                "{k},{:.12e},{:.12e},{:.12e},{:.12e},{},{}\n",
                c.eta2,
                c.rdelta2,
                c.alpha,
                c.omega,
                c.kind.label(),
                u8::from(c.marked)
            ));
        }
        s
    }
}

/// Surrogate `g = ∂_b̃ w + c̃ u − f̃` on each trial cell.
pub fn surrogate_g(trial: &TrialSpace, data: &PerturbedData, x: &[f64]) -> Vec<CellPoly> {
    (0..trial.mesh.num_cells())
        .map(|k| {
            let u = trial.u_poly(x, k);
            let w = trial.w_poly(x, k);
            &(&w.directional(&data.b[k]) + &(&data.c[k] * &u)) - &data.f[k]
        })
        .collect()
}

/// Indicators of trial vector `x`. `rdelta2` are per trial cell squared
/// projected residual norms, if available; line averages need constant `b`.
pub fn build_report(
    problem: &TransportProblem,
    trial: &TrialSpace,
    data: &PerturbedData,
    x: &[f64],
    rdelta2: Option<&[f64]>,
    beta: f64,
    osc: f64,
) -> Result<IndicatorReport> {
    let mesh = &trial.mesh;
    let norms = residual_norms(problem, trial, x);
    let gs = surrogate_g(trial, data, x);
    let bconst = problem.constant_b();
    let mut cells = Vec::with_capacity(mesh.num_cells());
    let mut averages = Vec::with_capacity(mesh.num_cells());
    for k in 0..mesh.num_cells() {
        let [e2, g2, ecg2] = norms[k];
        let la = match bconst {
            Some(b) => Some(line_average_field(&mesh.cell_points(k), b, &gs[k])?),
            None => None,
        };
        let root = mesh.element(k).root;
        let c_sup = sample_points(&mesh.cell_points(k), 4).iter().map(|p| problem.c.eval(root, *p).abs()).fold(0.0, f64::max);
        cells.push(CellIndicator {
            eta2: e2 + g2,
            rdelta2: rdelta2.map_or(f64::NAN, |r| r[k]),
            e_norm: e2.sqrt(),
            g_norm: g2.sqrt(),
            ecg_norm: ecg2.sqrt(),
            alpha: la.as_ref().map_or(f64::NAN, |l| l.alpha()),
            omega: if g2 > 0.0 { (e2 / g2).sqrt() } else { f64::INFINITY },
            c_sup,
            kind: classify(e2, g2, ecg2, beta),
            marked: false,
        });
        averages.push(la);
    }
    Ok(IndicatorReport { cells, averages, osc })
}

/// Greedy minimal-cardinality bulk marking: `Σ_M v ≥ θ² Σ v` over squared indicators `v`.
pub fn dorfler_mark(values: &[f64], theta: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).filter(|&k| values[k] > 0.0).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    if theta >= 1.0 {
        order.sort_unstable();
        return order;
    }
    let target = theta * theta * values.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for k in order {
        if acc >= target {
            break;
        }
        acc += values[k];
        marked.push(k);
    }
    marked.sort_unstable();
    marked
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Marking {
    pub all: Vec<usize>,
    pub type_i: Vec<usize>,
    pub type_ii: Vec<usize>,
}

/// Bulk marking on η (or on `‖R^δ‖` when `use_rdelta`), split by type.
pub fn classify_and_mark(report: &mut IndicatorReport, theta: f64, use_rdelta: bool) -> Marking {
    let vals: Vec<f64> = report.cells.iter().map(|c| if use_rdelta { c.rdelta2 } else { c.eta2 }).collect();
    let all = dorfler_mark(&vals, theta);
    let mut m = Marking { all: all.clone(), ..Default::default() };
    for k in all {
        report.cells[k].marked = true;
        match report.cells[k].kind {
            CellType::I => m.type_i.push(k),
            CellType::II => m.type_ii.push(k),
        }
    }
    m
}

/// Local u-correction `u_min = (e + c g)/(1 + c²)` minimising
/// `Q(v) = ‖e − v‖² + ‖g − c v‖²`, with the reduction `Q(u_min)/Q(0)`.
pub fn umin_correction(verts: &[Point], e: &CellPoly, g: &CellPoly, c: f64) -> (CellPoly, f64) {
    let s = 1.0 / (1.0 + c * c);
    let num = &(e + &g.scaled(c)) * &CellPoly::constant(e.chart, s);
    let n2 = |p: &CellPoly| {
        let deg = 2 * p.p.total_degree();
        cell_rule(verts, deg).iter().map(|(x, w)| w * p.eval(*x).powi(2)).sum::<f64>()
    };
    let q0 = n2(e) + n2(g);
    let factor = if q0 == 0.0 { 1.0 } else { 1.0 - n2(&(e + &g.scaled(c))) / ((1.0 + c * c) * q0) };
    (num, factor)
}

/// Closed-form solution of `z' = −c z + F`, `z(0) = 0`, with cellwise constant data.
#[derive(Clone, Debug)]
pub struct Oracle1dZ {
    pub breaks: Vec<f64>,
    pub forcing: Vec<f64>,
    pub reaction: Vec<f64>,
    /// `z` at the left end of each cell.
    pub start: Vec<f64>,
}

impl Oracle1dZ {
    fn local(&self, i: usize, x: f64) -> (f64, f64) {
        let (a, z0, f, c) = (self.breaks[i], self.start[i], self.forcing[i], self.reaction[i]);
        let t = x - a;
        if c == 0.0 {
            (z0 + f * t, f)
        } else {
            let e = (-c * t).exp();
            let z = z0 * e + f / c * (1.0 - e);
            (z, -c * z + f)
        }
    }

    fn cell_of(&self, x: f64) -> usize {
        self.breaks[1..].iter().position(|&b| x <= b).unwrap_or(self.forcing.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.local(self.cell_of(x), x).0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.local(self.cell_of(x), x).1
    }

    /// `(‖z‖, ‖z′‖, ‖F‖)` in L2.
    pub fn norms(&self) -> (f64, f64, f64) {
        let (t, w) = gauss_legendre(20);
        let mut acc = (0.0, 0.0, 0.0);
        for i in 0..self.forcing.len() {
            let h = self.breaks[i + 1] - self.breaks[i];
            for (t, w) in t.iter().zip(w) {
                let (z, dz) = self.local(i, self.breaks[i] + t * h);
                acc.0 += w * h * z * z;
                acc.1 += w * h * dz * dz;
            }
            acc.2 += h * self.forcing[i].powi(2);
        }
        (acc.0.sqrt(), acc.1.sqrt(), acc.2.sqrt())
    }
}

pub fn oracle_1d_z(breaks: &[f64], forcing: &[f64], reaction: &[f64]) -> Result<Oracle1dZ> {
    if breaks.len() != forcing.len() + 1 || reaction.len() != forcing.len() || breaks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Dimension("oracle needs increasing breaks and one value per cell".into()));
    }
    let mut z = Oracle1dZ { breaks: breaks.to_vec(), forcing: forcing.to_vec(), reaction: reaction.to_vec(), start: vec![0.0; forcing.len()] };
    for i in 1..forcing.len() {
        z.start[i] = z.local(i - 1, breaks[i]).0;
    }
    Ok(z)
}

/// Index of the cell of `coarse` containing each cell of a refinement `fine`.
pub fn ancestor_cells(coarse: &SimplicialMesh, fine: &SimplicialMesh) -> Vec<usize> {
    let leaf: HashMap<usize, usize> = coarse.leaf_index();
    (0..fine.num_cells())
        .map(|k| {
            let mut e = fine.element_of(k);
            loop {
                if let Some(&c) = leaf.get(&e) {
                    return c;
                }
                e = fine.elements()[e].parent.expect("fine mesh refines the coarse mesh");
            }
        })
        .collect()
}

/// Forcing field: line averages on the selected coarse cells, zero elsewhere.
#[derive(Clone, Debug)]
pub struct ForcingField {
    pub cells: Vec<Option<LineAverage>>,
}

impl ForcingField {
    pub fn masked(report: &IndicatorReport, keep: &[usize]) -> Self {
        let mut cells = vec![None; report.averages.len()];
        for &k in keep {
            cells[k] = report.averages[k].clone();
        }
        ForcingField { cells }
    }

    pub fn norm2(&self) -> f64 {
        self.cells.iter().flatten().map(|l| l.avg_norm2).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeResult {
    /// `min ‖∂_b w + c w − F‖ / ‖F‖`.
    pub xi: f64,
    /// `‖w‖ / ‖F‖` of the minimiser.
    pub w_ratio: f64,
    pub free_dofs: usize,
}

/// Least-squares fit of `∂_b w + c w ≈ F` by continuous P_{m_w} functions on
/// `fine` (a refinement of `coarse`) that vanish outside the cells flagged in
/// `region` and on the inflow boundary.
pub fn conjecture_probe(
    problem: &TransportProblem,
    coarse: &SimplicialMesh,
    fine_trial: &TrialSpace,
    region: &[bool],
    forcing: &ForcingField,
    tol: f64,
    maxit: usize,
) -> Result<ProbeResult> {
    let f2 = forcing.norm2();
    if !(f2 > 0.0) {
        return Err(Error::Config("conjecture probe needs a nonzero forcing".into()));
    }
    let fine = &fine_trial.mesh;
    let anc = ancestor_cells(coarse, fine);
    // a w-node is free iff every cell touching it lies in the region
    let mut free: HashMap<usize, bool> = HashMap::new();
    for k in 0..fine.num_cells() {
        for g in fine_trial.w_dofs[k].iter().flatten() {
            let e = free.entry(*g).or_insert(true);
            *e &= region[k];
        }
    }
    let mut ids: Vec<usize> = free.iter().filter(|(_, &f)| f).map(|(g, _)| *g).collect();
    ids.sort_unstable();
    let index: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let n = ids.len();
    let fdeg = forcing.cells.iter().flatten().map(|l| l.avg.polys.iter().map(|p| p.total_degree()).max().unwrap_or(0)).max().unwrap_or(0);
    let deg = 2 * fine_trial.m_w + 2 * raw_data_degree(problem) + fdeg + 1;
    let mut t = TripletBuilder::new(n, n);
    let mut rhs = vec![0.0; n];
    let mut rules = Vec::with_capacity(fine.num_cells());
    for k in 0..fine.num_cells() {
        let mut cuts = problem.cuts();
        if let Some(l) = &forcing.cells[anc[k]] {
            cuts.extend(l.cuts());
        }
        let rule = cell_rule_split(&fine.cell_points(k), deg, &cuts);
        let root = fine.element(k).root;
        let loc: Vec<(usize, usize)> = fine_trial.w_dofs[k].iter().enumerate().filter_map(|(i, g)| g.and_then(|g| index.get(&g).map(|&j| (i, j)))).collect();
        let basis: Vec<CellPoly> = loc.iter().map(|(i, _)| fine_trial.w_basis[k][*i].clone()).collect();
        let pts: Vec<Point> = rule.iter().map(|r| r.0).collect();
        let tab = tabulate(&basis, &pts);
        let mut lw_at = Vec::with_capacity(rule.len());
        for (q, (p, wt)) in rule.iter().enumerate() {
            let b = problem.b_at(root, *p);
            let c = problem.c.eval(root, *p);
            let fv = forcing.cells[anc[k]].as_ref().map_or(0.0, |l| l.eval(*p));
            let lw: Vec<f64> = (0..loc.len()).map(|i| b[0] * tab.grad[q][i][0] + b[1] * tab.grad[q][i][1] + c * tab.val[q][i]).collect();
            for i in 0..loc.len() {
                rhs[loc[i].1] += wt * lw[i] * fv;
                for j in 0..loc.len() {
                    t.push(loc[i].1, loc[j].1, wt * lw[i] * lw[j]);
                }
            }
            lw_at.push((fv, lw, tab.val[q].clone()));
        }
        rules.push((rule, loc, lw_at));
    }
    let y = if n == 0 { vec![] } else { solve_spd(&t.build(), &rhs, tol, maxit)? };
    let (mut res2, mut w2) = (0.0, 0.0);
    for (rule, loc, lw_at) in &rules {
        for ((_, wt), (fv, lw, val)) in rule.iter().zip(lw_at) {
            let lwv: f64 = loc.iter().enumerate().map(|(i, (_, j))| y[*j] * lw[i]).sum();
            let wv: f64 = loc.iter().enumerate().map(|(i, (_, j))| y[*j] * val[i]).sum();
            res2 += wt * (lwv - fv).powi(2);
            w2 += wt * wv * wv;
        }
    }
    Ok(ProbeResult { xi: (res2 / f2).sqrt(), w_ratio: (w2 / f2).sqrt(), free_dofs: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_root_mesh, classify_faces, Domain};
    use crate::poly::Chart;
    use crate::problem::{ScalarField, VectorField};
    use crate::spaces::build_trial_space;

    fn problem_1d(c: f64, f: f64) -> TransportProblem {
        TransportProblem {
            name: "t".into(),
            domain: Domain::Interval(0.0, 1.0),
            b: VectorField::constant([1.0, 0.0]),
            c: ScalarField::Constant(c),
            f: ScalarField::Constant(f),
            exact: None,
            exact_cuts: vec![],
        }
    }

    #[test]
    fn eta_of_constant_pair() {
        let p = problem_1d(0.0, 1.0);
        let m = build_root_mesh(p.domain, 4).unwrap();
        let trial = build_trial_space(&m, 0, 1, &classify_faces(&m, &p.b_fn()));
        let eta: f64 = eta_indicator(&p, &trial, &vec![0.0; trial.dim()]).iter().sum();
        assert!((eta - 1.0).abs() < 1e-14);
    }

    #[test]
    fn marking_examples() {
        assert_eq!(dorfler_mark(&[9.0, 16.0, 0.0, 0.0], 0.6), vec![1]);
        assert_eq!(dorfler_mark(&[1.0, 0.0, 2.0], 1.0), vec![0, 2]);
        assert_eq!(dorfler_mark(&[1.0; 8], 0.5).len(), 2);
    }

    #[test]
    fn line_averages_by_hand() {
        let h = 0.3;
        let ch = Chart { center: [0.0, 0.0], h: 1.0 };
        let g = CellPoly::new(ch, Poly::monomial(1, 0, 1.0));
        let la = line_average_field(&[[0.0, 0.0], [h, 0.0]], [1.0, 0.0], &g).unwrap();
        assert!((la.eval([0.1, 0.0]) - h / 2.0).abs() < 1e-14);
        assert!((la.alpha() - 3f64.sqrt() / 2.0).abs() < 1e-13);
        let z = zg_lift(&la);
        for x in [0.0, 0.1, h] {
            assert!((la.frame.eval(&z, [x, 0.0]) - (x * x / 2.0 - h * x / 2.0)).abs() < 1e-14);
        }
        let la = line_average_field(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [1.0, 0.0], &g).unwrap();
        for y in [0.1, 0.4, 0.8] {
            assert!((la.eval([0.05, y]) - (1.0 - y) / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn umin_examples() {
        let ch = Chart { center: [0.0, 0.0], h: 1.0 };
        let v = [[0.0, 0.0], [1.0, 0.0]];
        let (u, f) = umin_correction(&v, &CellPoly::constant(ch, 1.0), &CellPoly::constant(ch, 0.0), 0.0);
        assert!((u.eval([0.3, 0.0]) - 1.0).abs() < 1e-15 && f.abs() < 1e-15);
        let (u, f) = umin_correction(&v, &CellPoly::constant(ch, 0.0), &CellPoly::constant(ch, 1.0), 1.0);
        assert!((u.eval([0.3, 0.0]) - 0.5).abs() < 1e-15 && (f - 0.5).abs() < 1e-15);
    }

    #[test]
    fn oracle_closed_forms() {
        let b = [0.0, 0.25, 0.5, 1.0];
        let z = oracle_1d_z(&b, &[1.0; 3], &[0.0; 3]).unwrap();
        assert!((z.eval(0.7) - 0.7).abs() < 1e-15);
        let z = oracle_1d_z(&b, &[1.0; 3], &[1.0; 3]).unwrap();
        for x in [0.1, 0.3, 0.9] {
            assert!((z.eval(x) - (1.0 - (-x).exp())).abs() < 1e-14);
        }
        let z = oracle_1d_z(&b, &[0.0; 3], &[2.0; 3]).unwrap();
        assert_eq!(z.norms().0, 0.0);
    }
}
