//! Transport data b, c, f, their cellwise polynomial surrogates, frozen
//! per-cell convection averages, and the data-oscillation functional.

use crate::basis::orthonormal_basis;
use crate::geometry::{dot, norm, Point};
use crate::mesh::{Domain, SimplicialMesh, SubgridPair};
use crate::poly::{CellPoly, Poly};
use crate::quadrature::{cell_rule, cell_rule_split, Cut};
use crate::{Error, Result};
use std::fmt;
use std::sync::Arc;

pub type PointFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// A scalar coefficient. Evaluation takes the root cell of the point so that
/// per-root-cell data are unambiguous on cell boundaries.
#[derive(Clone)]
pub enum ScalarField {
    Constant(f64),
    /// Global monomials `sum c x^i y^j`.
    Polynomial(Poly),
    /// One constant per root cell.
    PerRoot(Vec<f64>),
    /// `below` where `normal·x < offset`, `above` otherwise.
    Step { normal: Point, offset: f64, below: f64, above: f64 },
    Function(PointFn),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(v) => write!(f, "Constant({v})"),
            ScalarField::Polynomial(p) => write!(f, "Polynomial({p:?})"),
            ScalarField::PerRoot(v) => write!(f, "PerRoot({v:?})"),
            ScalarField::Step { normal, offset, below, above } => {
                write!(f, "Step({normal:?}·x<{offset}: {below} | {above})")
            }
            ScalarField::Function(_) => write!(f, "Function"),
        }
    }
}

impl ScalarField {
    pub fn eval(&self, root: usize, x: Point) -> f64 {
        match self {
            ScalarField::Constant(v) => *v,
            ScalarField::Polynomial(p) => p.eval(x[0], x[1]),
            ScalarField::PerRoot(v) => v[root],
            ScalarField::Step { normal, offset, below, above } => {
                if dot(*normal, x) < *offset {
                    *below
                } else {
                    *above
                }
            }
            ScalarField::Function(f) => f(x),
        }
    }

    /// Degree if the field is a polynomial on every cell of any mesh refining the roots.
    pub fn cell_degree(&self) -> Option<usize> {
        match self {
            ScalarField::Constant(_) | ScalarField::PerRoot(_) => Some(0),
            ScalarField::Polynomial(p) => Some(p.total_degree()),
            _ => None,
        }
    }

    pub fn cuts(&self) -> Vec<Cut> {
        match self {
            ScalarField::Step { normal, offset, .. } => vec![Cut { normal: *normal, offset: *offset }],
            _ => vec![],
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ScalarField::Constant(v) => *v == 0.0,
            ScalarField::PerRoot(v) => v.iter().all(|x| *x == 0.0),
            ScalarField::Step { below, above, .. } => *below == 0.0 && *above == 0.0,
            ScalarField::Polynomial(p) => p.trimmed() == Poly::zero(),
            ScalarField::Function(_) => false,
        }
    }

    /// Exact restriction to a cell when the field is cellwise polynomial.
    fn restrict(&self, root: usize, chart: crate::poly::Chart) -> Option<CellPoly> {
        match self {
            ScalarField::Constant(v) => Some(CellPoly::constant(chart, *v)),
            ScalarField::PerRoot(v) => Some(CellPoly::constant(chart, v[root])),
            ScalarField::Polynomial(p) => Some(CellPoly::from_global(chart, p)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VectorField {
    pub comps: [ScalarField; 2],
}

impl VectorField {
    pub fn constant(b: Point) -> Self {
        VectorField { comps: [ScalarField::Constant(b[0]), ScalarField::Constant(b[1])] }
    }

    pub fn eval(&self, root: usize, x: Point) -> Point {
        [self.comps[0].eval(root, x), self.comps[1].eval(root, x)]
    }

    pub fn as_constant(&self) -> Option<Point> {
        match (&self.comps[0], &self.comps[1]) {
            (ScalarField::Constant(a), ScalarField::Constant(b)) => Some([*a, *b]),
            _ => None,
        }
    }

    pub fn cell_degree(&self) -> Option<usize> {
        Some(self.comps[0].cell_degree()?.max(self.comps[1].cell_degree()?))
    }
}

#[derive(Clone)]
pub struct TransportProblem {
    pub name: String,
    pub domain: Domain,
    pub b: VectorField,
    pub c: ScalarField,
    pub f: ScalarField,
    pub exact: Option<PointFn>,
    /// Lines across which the exact solution has a kink or jump.
    pub exact_cuts: Vec<Cut>,
}

impl fmt::Debug for TransportProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransportProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("b", &self.b)
            .field("c", &self.c)
            .field("f", &self.f)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl TransportProblem {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Lines across which some datum or the exact solution is non-smooth.
    pub fn cuts(&self) -> Vec<Cut> {
        let mut c = self.f.cuts();
        c.extend(self.c.cuts());
        c.extend(self.exact_cuts.iter().copied());
        c
    }

    pub fn b_at(&self, root: usize, x: Point) -> Point {
        self.b.eval(root, x)
    }

    /// `b` as a root-independent function (for face classification).
    pub fn b_fn(&self) -> impl Fn(Point) -> Point + '_ {
        move |x| self.b.eval(0, x)
    }

    pub fn constant_b(&self) -> Option<Point> {
        self.b.as_constant()
    }

    /// Checks `|b|` bounded away from zero on a sample of the mesh.
    pub fn validate(&self, mesh: &SimplicialMesh) -> Result<()> {
        for k in 0..mesh.num_cells() {
            let root = mesh.element(k).root;
            for x in sample_points(&mesh.cell_points(k), 4) {
                if !(norm(self.b_at(root, x)) > 0.0) {
                    return Err(Error::Config(format!("convection vanishes at {x:?}")));
                }
            }
        }
        if let ScalarField::PerRoot(v) = &self.c {
            if v.len() != mesh.elements().iter().filter(|e| e.parent.is_none()).count() {
                return Err(Error::Config("reaction needs one value per root cell".into()));
            }
        }
        Ok(())
    }

    /// The effectiveness regime: constant `b`, cellwise-constant `c`.
    pub fn in_effectiveness_regime(&self) -> bool {
        self.constant_b().is_some() && self.c.cell_degree() == Some(0)
    }
}

/// Barycentric lattice of `(n+1)` points per edge.
pub fn sample_points(verts: &[Point], n: usize) -> Vec<Point> {
    let mut out = Vec::new();
    if verts.len() == 2 {
        for i in 0..=n {
            let t = i as f64 / n as f64;
            out.push([verts[0][0] + t * (verts[1][0] - verts[0][0]), 0.0]);
        }
        return out;
    }
    for i in 0..=n {
        for j in 0..=n - i {
            let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
            out.push([
                verts[0][0] + s * (verts[1][0] - verts[0][0]) + t * (verts[2][0] - verts[0][0]),
                verts[0][1] + s * (verts[1][1] - verts[0][1]) + t * (verts[2][1] - verts[0][1]),
            ]);
        }
    }
    out
}

/// Polynomial degrees, subgrid depth, and adaptivity parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizationConfig {
    pub m_u: usize,
    pub m_w: usize,
    pub m_v: usize,
    pub m_b: usize,
    pub m_c: usize,
    pub m_f: usize,
    pub subgrid_depth: u32,
    pub theta: f64,
    pub beta: f64,
    pub r: u32,
    pub downwind_depth: u32,
    pub cg_tol: f64,
    pub cg_maxit: usize,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        let mut c = DiscretizationConfig {
            m_u: 0,
            m_w: 1,
            m_v: 0,
            m_b: 0,
            m_c: 0,
            m_f: 0,
            subgrid_depth: 2,
            theta: 0.5,
            beta: 0.2,
            r: 1,
            downwind_depth: 1,
            cg_tol: 1e-11,
            cg_maxit: 20_000,
        };
        c.m_v = c.min_test_degree();
        c
    }
}

impl DiscretizationConfig {
    /// Degrees with the smallest admissible test degree.
    pub fn with_degrees(m_u: usize, m_w: usize, m_f: usize) -> Self {
        let mut c = DiscretizationConfig { m_u, m_w, m_f, ..Default::default() };
        c.m_v = c.min_test_degree();
        c
    }

    pub fn min_test_degree(&self) -> usize {
        let a = self.m_w + self.m_c.max(1).max(self.m_b.saturating_sub(1));
        let b = self.m_u + self.m_c.max(1);
        a.max(b).max(self.m_f).max(self.m_u.max(self.m_w) + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_w < 1 {
            return Err(Error::Config("m_w must be at least 1".into()));
        }
        if self.m_v < self.min_test_degree() {
            return Err(Error::Config(format!("m_v = {} is below the admissible minimum {}", self.m_v, self.min_test_degree())));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config(format!("theta = {} outside (0, 1]", self.theta)));
        }
        if !(self.beta > 0.0 && self.beta < 0.25) {
            return Err(Error::Config(format!("beta = {} outside (0, 1/4)", self.beta)));
        }
        if self.r < 1 {
            return Err(Error::Config("refinement depth r must be at least 1".into()));
        }
        if !(self.cg_tol > 0.0) || self.cg_maxit == 0 {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Extra condition under which bulk marking provably reduces the error.
    pub fn validate_effectiveness_regime(&self) -> Result<()> {
        if self.m_w > self.m_u + 1 {
            return Err(Error::Config(format!("adaptive mode needs m_w <= m_u + 1 (got m_u = {}, m_w = {})", self.m_u, self.m_w)));
        }
        Ok(())
    }
}

/// Cellwise polynomial surrogates of the data on the trial mesh plus the
/// frozen convection averages on the test mesh.
#[derive(Clone, Debug)]
pub struct PerturbedData {
    pub b: Vec<[CellPoly; 2]>,
    pub c: Vec<CellPoly>,
    pub f: Vec<CellPoly>,
    /// Per fine cell: average of the surrogate convection.
    pub b_avg: Vec<Point>,
    /// Per fine cell: average of the surrogate divergence.
    pub div_avg: Vec<f64>,
}

impl PerturbedData {
    pub fn div_b(&self, k: usize) -> CellPoly {
        &self.b[k][0].dx() + &self.b[k][1].dy()
    }
}

/// L2 projection of a field onto P_deg on one cell.
pub fn project_field(field: &ScalarField, mesh: &SimplicialMesh, k: usize, deg: usize) -> CellPoly {
    let chart = mesh.cell_chart(k);
    let root = mesh.element(k).root;
    if let (Some(d), Some(exact)) = (field.cell_degree(), field.restrict(root, chart)) {
        if d <= deg {
            return exact;
        }
    }
    let verts = mesh.cell_points(k);
    let basis = orthonormal_basis(&verts, deg, chart);
    let qdeg = deg + field.cell_degree().unwrap_or(deg + 10);
    let rule = cell_rule_split(&verts, qdeg, &field.cuts());
    let mut p = CellPoly::constant(chart, 0.0);
    for phi in &basis {
        let coef: f64 = rule.iter().map(|(x, w)| w * field.eval(root, *x) * phi.eval(*x)).sum();
        p = &p + &phi.scaled(coef);
    }
    p
}

pub fn project_data(problem: &TransportProblem, pair: &SubgridPair, cfg: &DiscretizationConfig) -> PerturbedData {
    let coarse = &pair.coarse;
    let n = coarse.num_cells();
    let mut b = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    for k in 0..n {
        b.push([
            project_field(&problem.b.comps[0], coarse, k, cfg.m_b),
            project_field(&problem.b.comps[1], coarse, k, cfg.m_b),
        ]);
        c.push(project_field(&problem.c, coarse, k, cfg.m_c));
        f.push(project_field(&problem.f, coarse, k, cfg.m_f));
    }
    let mut b_avg = Vec::with_capacity(pair.fine.num_cells());
    let mut div_avg = Vec::with_capacity(pair.fine.num_cells());
    let constant = problem.constant_b();
    for kf in 0..pair.fine.num_cells() {
        if let Some(bc) = constant {
            b_avg.push(bc);
            div_avg.push(0.0);
            continue;
        }
        let kc = pair.parent[kf];
        let verts = pair.fine.cell_points(kf);
        let rule = cell_rule(&verts, cfg.m_b + 1);
        let meas: f64 = rule.iter().map(|r| r.1).sum();
        let div = &b[kc][0].dx() + &b[kc][1].dy();
        let mut avg = [0.0; 2];
        let mut d = 0.0;
        for (x, w) in &rule {
            avg[0] += w * b[kc][0].eval(*x);
            avg[1] += w * b[kc][1].eval(*x);
            d += w * div.eval(*x);
        }
        b_avg.push([avg[0] / meas, avg[1] / meas]);
        div_avg.push(d / meas);
    }
    PerturbedData { b, c, f, b_avg, div_avg }
}

/// Sampling density used for sup-norm estimates.
pub const SUP_SAMPLES: usize = 10;

pub fn data_oscillation(problem: &TransportProblem, data: &PerturbedData, mesh: &SimplicialMesh) -> f64 {
    let cuts = problem.f.cuts();
    let mut f_err2 = 0.0;
    let mut f_norm2 = 0.0;
    let mut c_sup: f64 = 0.0;
    let mut b_sup: f64 = 0.0;
    for k in 0..mesh.num_cells() {
        let root = mesh.element(k).root;
        let verts = mesh.cell_points(k);
        let qdeg = 2 * problem.f.cell_degree().unwrap_or(12).max(data.f[k].p.total_degree());
        for (x, w) in cell_rule_split(&verts, qdeg, &cuts) {
            let fv = problem.f.eval(root, x);
            f_err2 += w * (fv - data.f[k].eval(x)).powi(2);
            f_norm2 += w * fv * fv;
        }
        let diam = mesh.cell_diameter(k);
        for x in sample_points(&verts, SUP_SAMPLES) {
            c_sup = c_sup.max((problem.c.eval(root, x) - data.c[k].eval(x)).abs());
            let bx = problem.b_at(root, x);
            let db = [bx[0] - data.b[k][0].eval(x), bx[1] - data.b[k][1].eval(x)];
            b_sup = b_sup.max(norm(db) / diam);
        }
    }
    f_err2.sqrt().max(c_sup.max(b_sup) * f_norm2.sqrt())
}
