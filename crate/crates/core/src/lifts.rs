//! Local lifts on a single test cell with frozen convection `b̆_K`: the
//! characteristic frame, the shadow polytope, the inner product `⟨⟨·,·⟩⟩`,
//! the exact Riesz lift of the modified residual and its polynomial
//! approximation.
//!
//! Everything is computed in rotated frame coordinates `(x, y)` with the
//! x-axis along `b̆_K`, where all characteristic antiderivatives are exact.

use crate::dpg::{DpgSystem, LiftKind, LiftedResidual};
use crate::geometry::{centroid, diameter, dot, norm, sub, Point};
use crate::mesh::face_normal_of;
use crate::poly::{CellPoly, Poly};
use crate::quadrature::{cell_rule, gauss_legendre, points_for_degree};
use crate::{Error, Result};

/// A strip of the cell between `y0` and `y1` bounded by `x₋(y) = xm[0] + xm[1] y`
/// and `x₊(y) = xp[0] + xp[1] y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub y0: f64,
    pub y1: f64,
    pub xm: [f64; 2],
    pub xp: [f64; 2],
}

impl Piece {
    pub fn x_minus(&self, y: f64) -> f64 {
        self.xm[0] + self.xm[1] * y
    }

    pub fn x_plus(&self, y: f64) -> f64 {
        self.xp[0] + self.xp[1] * y
    }

    /// Chord length `r` along the characteristic at height `y`.
    pub fn len(&self, y: f64) -> f64 {
        self.x_plus(y) - self.x_minus(y)
    }
}

#[derive(Clone, Debug)]
pub struct CharacteristicFrame {
    pub dim: usize,
    pub verts: Vec<Point>,
    pub b: Point,
    pub bnorm: f64,
    pub origin: Point,
    pub e1: Point,
    pub e2: Point,
    pub pieces: Vec<Piece>,
    pub inflow_faces: Vec<usize>,
    /// The inflow face most aligned with `b̆`.
    pub face: usize,
    /// `x̄₋(y) = xbar[0] + xbar[1] y`, agreeing with `x₋` on the chosen face.
    pub xbar: [f64; 2],
    /// Shadow polytope in physical coordinates.
    pub kbar: Vec<Point>,
    pub single_inflow: bool,
    pub diam: f64,
}

fn line_through(p: [f64; 2], q: [f64; 2]) -> [f64; 2] {
    let s = (q[0] - p[0]) / (q[1] - p[1]);
    [p[0] - s * p[1], s]
}

pub fn build_frame(verts: &[Point], b: Point) -> Result<CharacteristicFrame> {
    let bnorm = norm(b);
    if !(bnorm > 0.0) || !bnorm.is_finite() {
        return Err(Error::Geometry("frozen convection vanishes on cell".into()));
    }
    let diam = diameter(verts);
    let e1 = [b[0] / bnorm, b[1] / bnorm];
    let e2 = [-e1[1], e1[0]];
    let origin = centroid(verts);
    let fc: Vec<[f64; 2]> = verts.iter().map(|p| [dot(sub(*p, origin), e1), dot(sub(*p, origin), e2)]).collect();
    let tol = 1e-12 * diam;
    let mut inflow_faces = Vec::new();
    let mut face = usize::MAX;
    let mut best = 0.0;
    for i in 0..verts.len() {
        let bn = dot(e1, face_normal_of(verts, i));
        if bn < -1e-12 {
            inflow_faces.push(i);
            if -bn > best {
                best = -bn;
                face = i;
            }
        }
    }
    if face == usize::MAX {
        return Err(Error::Geometry("cell without inflow face".into()));
    }
    if verts.len() == 2 {
        if b[1] != 0.0 {
            return Err(Error::Dimension("1D cell with transverse convection".into()));
        }
        let (lo, hi) = (fc[0][0].min(fc[1][0]), fc[0][0].max(fc[1][0]));
        return Ok(CharacteristicFrame {
            dim: 1,
            verts: verts.to_vec(),
            b,
            bnorm,
            origin,
            e1,
            e2,
            pieces: vec![Piece { y0: 0.0, y1: 0.0, xm: [lo, 0.0], xp: [hi, 0.0] }],
            inflow_faces,
            face,
            xbar: [lo, 0.0],
            kbar: verts.to_vec(),
            single_inflow: true,
            diam,
        });
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| fc[i][1].total_cmp(&fc[j][1]));
    let [a, m, c] = order.map(|i| [fc[i][0], fc[i][1]]);
    if c[1] - a[1] <= tol {
        return Err(Error::Geometry("cell degenerates along the convection".into()));
    }
    let long = line_through(a, c);
    let mut pieces = Vec::new();
    for (p, q) in [(a, m), (m, c)] {
        if q[1] - p[1] <= tol {
            continue;
        }
        let short = line_through(p, q);
        let ymid = 0.5 * (p[1] + q[1]);
        let (xm, xp) = if short[0] + short[1] * ymid < long[0] + long[1] * ymid { (short, long) } else { (long, short) };
        pieces.push(Piece { y0: p[1], y1: q[1], xm, xp });
    }
    let fv: Vec<[f64; 2]> = (1..3).map(|s| fc[(face + s) % 3]).collect();
    let xbar = line_through(fv[0], fv[1]);
    let to_phys = |x: f64, y: f64| [origin[0] + x * e1[0] + y * e2[0], origin[1] + x * e1[1] + y * e2[1]];
    let kbar = vec![
        verts[face],
        to_phys(xbar[0] + xbar[1] * a[1], a[1]),
        to_phys(xbar[0] + xbar[1] * c[1], c[1]),
    ];
    Ok(CharacteristicFrame {
        dim: 2,
        verts: verts.to_vec(),
        b,
        bnorm,
        origin,
        e1,
        e2,
        pieces,
        single_inflow: inflow_faces.len() == 1,
        inflow_faces,
        face,
        xbar,
        kbar,
        diam,
    })
}

/// Piecewise polynomial on the frame's pieces, in frame coordinates.
#[derive(Clone, Debug)]
pub struct PiecewisePoly {
    pub polys: Vec<Poly>,
}

/// Substitute `x -> a0 + a1 y`, leaving a polynomial in y.
fn at_line(p: &Poly, a: [f64; 2]) -> Poly {
    p.compose_affine([a[0], 0.0, a[1]], [0.0, 0.0, 1.0])
}

impl CharacteristicFrame {
    pub fn to_frame(&self, p: Point) -> [f64; 2] {
        let d = sub(p, self.origin);
        [dot(d, self.e1), dot(d, self.e2)]
    }

    pub fn poly(&self, p: &CellPoly) -> Poly {
        p.in_frame(self.origin, self.e1, self.e2)
    }

    pub fn uniform(&self, p: Poly) -> PiecewisePoly {
        PiecewisePoly { polys: vec![p; self.pieces.len()] }
    }

    pub fn piece_of(&self, y: f64) -> usize {
        self.pieces.iter().position(|p| y <= p.y1).unwrap_or(self.pieces.len() - 1)
    }

    pub fn eval(&self, v: &PiecewisePoly, x: Point) -> f64 {
        let [fx, fy] = self.to_frame(x);
        v.polys[self.piece_of(fy)].eval(fx, fy)
    }

    /// Distance `r(s)` from an inflow point to the outflow boundary along `b̆`.
    pub fn r_at(&self, s: Point) -> f64 {
        let y = self.to_frame(s)[1];
        self.pieces[self.piece_of(y)].len(y)
    }

    pub fn xbar_slope(&self) -> f64 {
        self.xbar[1].abs()
    }

    /// `diam(K) ≤ |b̆_K|`, the regime where `⟨⟨·,·⟩⟩` is uniformly equivalent.
    pub fn well_resolved(&self) -> bool {
        self.diam <= self.bnorm
    }

    fn y_rule(&self, piece: &Piece, deg: usize) -> Vec<(f64, f64)> {
        if self.dim == 1 {
            return vec![(0.0, 1.0)];
        }
        let (x, w) = gauss_legendre(points_for_degree(deg));
        let h = piece.y1 - piece.y0;
        x.iter().zip(w).map(|(t, w)| (piece.y0 + t * h, w * h)).collect()
    }

    /// Exact integral of a piecewise polynomial over the cell.
    pub fn integrate(&self, v: &PiecewisePoly) -> f64 {
        self.pieces
            .iter()
            .zip(&v.polys)
            .map(|(pc, p)| {
                let a = p.antideriv_x();
                self.y_rule(pc, p.total_degree() + 1).iter().map(|&(y, w)| w * (a.eval(pc.x_plus(y), y) - a.eval(pc.x_minus(y), y))).sum::<f64>()
            })
            .sum()
    }

    /// `∫_{∂K₋} p |b̆°·n| r ds`, i.e. `∫ p(x₋(y), y) r(y) dy`.
    pub fn integrate_inflow(&self, v: &PiecewisePoly) -> f64 {
        self.pieces
            .iter()
            .zip(&v.polys)
            .map(|(pc, p)| self.y_rule(pc, p.total_degree() + 1).iter().map(|&(y, w)| w * p.eval(pc.x_minus(y), y) * pc.len(y)).sum::<f64>())
            .sum()
    }

    fn map2(&self, v: &PiecewisePoly, z: &PiecewisePoly, f: impl Fn(&Poly, &Poly) -> Poly) -> PiecewisePoly {
        PiecewisePoly { polys: v.polys.iter().zip(&z.polys).map(|(a, b)| f(a, b)).collect() }
    }
}

pub fn special_inner_product(frame: &CharacteristicFrame, v: &PiecewisePoly, z: &PiecewisePoly) -> f64 {
    let b2 = frame.bnorm * frame.bnorm;
    let vol = frame.integrate(&frame.map2(v, z, |a, b| (&a.dx() * &b.dx()).scaled(b2)));
    let inflow = frame.integrate_inflow(&frame.map2(v, z, |a, b| a * b));
    vol + inflow
}

/// `(‖v‖²_{H(b̆;K)}, |||v|||²)`.
pub fn lift_norms(frame: &CharacteristicFrame, v: &PiecewisePoly) -> (f64, f64) {
    let b2 = frame.bnorm * frame.bnorm;
    let full = frame.integrate(&frame.map2(v, v, |a, b| &(a * b) + &(&a.dx() * &b.dx()).scaled(b2)));
    (full, special_inner_product(frame, v, v))
}

/// Residual polynomials on one cell: `μ = w − u`, `λ = ∂_b̃ w + c̃ w − f̃`,
/// and the strong source `γ = λ − (∂_b̃ μ + c̃ μ − d̆ μ)` of the local lift.
#[derive(Clone, Debug)]
pub struct LocalResidualData {
    pub mu: CellPoly,
    pub lambda: CellPoly,
    pub gamma: CellPoly,
    pub c: CellPoly,
    pub d: f64,
}

impl LocalResidualData {
    /// All inputs must share one chart.
    pub fn new(u: &CellPoly, w: &CellPoly, b: &[CellPoly; 2], c: &CellPoly, f: &CellPoly, d: f64) -> Self {
        let mu = w - u;
        let lambda = &(&w.directional(b) + &(c * w)) - f;
        let gamma = &lambda - &(&(&mu.directional(b) + &(c * &mu)) - &mu.scaled(d));
        LocalResidualData { mu, lambda, gamma, c: c.clone(), d }
    }
}

/// Exact Riesz lift of `v ↦ b̆_K(u,w;v) − ∫ f̃ v` for `⟨⟨·,·⟩⟩`.
pub fn exact_modified_lift(frame: &CharacteristicFrame, data: &LocalResidualData) -> PiecewisePoly {
    let bn = frame.bnorm;
    let mu = frame.poly(&data.mu);
    let gamma = frame.poly(&data.gamma);
    let h = &mu.dx().scaled(bn) + &gamma;
    let g1 = gamma.antideriv_x();
    let g2 = g1.antideriv_x();
    let (tq, wq) = gauss_legendre(points_for_degree(h.total_degree()));
    let polys = frame
        .pieces
        .iter()
        .map(|pc| {
            let shift = Poly::affine([-pc.xm[0], 1.0, -pc.xm[1]]);
            let g1m = at_line(&g1, pc.xm);
            let nested = &(&g2 - &at_line(&g2, pc.xm)) - &(&g1m * &shift);
            let slope = &at_line(&mu, pc.xp).scaled(1.0 / bn) + &(&at_line(&g1, pc.xp) - &g1m).scaled(1.0 / (bn * bn));
            let mut avg = Poly::zero();
            for (t, w) in tq.iter().zip(wq) {
                let line = [pc.xm[0] + t * (pc.xp[0] - pc.xm[0]), pc.xm[1] + t * (pc.xp[1] - pc.xm[1])];
                avg = &avg + &at_line(&h, line).scaled(*w);
            }
            (&(&nested.scaled(-1.0 / (bn * bn)) + &(&slope * &shift)) + &avg).trimmed()
        })
        .collect();
    PiecewisePoly { polys }
}

/// Polynomial approximation of the exact lift obtained by evaluating the
/// inflow data on the plane of the dominant inflow face.
pub fn approximate_lift(frame: &CharacteristicFrame, data: &LocalResidualData) -> Poly {
    let mu = frame.poly(&data.mu);
    let lam = frame.poly(&data.lambda);
    let cmu = frame.poly(&(&data.c * &data.mu));
    let val = &(&lam - &cmu) + &mu.scaled(data.d);
    let shift = Poly::affine([-frame.xbar[0], 1.0, -frame.xbar[1]]);
    (&(&at_line(&mu, frame.xbar).scaled(1.0 / frame.bnorm) * &shift) + &at_line(&val, frame.xbar)).trimmed()
}

/// `b̆_K(u,w;v)`: convection frozen to `b̆` on the boundary, surrogate data inside.
#[allow(clippy::too_many_arguments)]
pub fn modified_form(
    verts: &[Point],
    b_frozen: Point,
    d: f64,
    b: &[CellPoly; 2],
    c: &CellPoly,
    u: &CellPoly,
    w: &CellPoly,
    v: &CellPoly,
) -> f64 {
    let deg = u.p.total_degree().max(w.p.total_degree()) + v.p.total_degree() + b[0].p.total_degree().max(b[1].p.total_degree()).max(c.p.total_degree()) + 1;
    let (ux, uy) = (u.dx(), u.dy());
    let vol: f64 = cell_rule(verts, deg)
        .iter()
        .map(|(x, wt)| {
            let bu = b[0].eval(*x) * ux.eval(*x) + b[1].eval(*x) * uy.eval(*x);
            wt * (bu + c.eval(*x) * u.eval(*x) + d * (w.eval(*x) - u.eval(*x))) * v.eval(*x)
        })
        .sum();
    let mut bdry = 0.0;
    for i in 0..verts.len() {
        let n = face_normal_of(verts, i);
        let bn = dot(b_frozen, n);
        for (x, wt) in crate::dpg::face_rule(verts, i, deg) {
            bdry += wt * bn * (w.eval(x) - u.eval(x)) * v.eval(x);
        }
    }
    vol + bdry
}

/// Exact and approximate modified lifts of the residual of trial vector `x`
/// on every test cell; per-cell norms only (no test-basis coefficients).
pub fn modified_lifts(sys: &DpgSystem, x: &[f64]) -> Result<(LiftedResidual, LiftedResidual)> {
    let fine = &sys.pair.fine;
    let n = fine.num_cells();
    let mut exact = LiftedResidual { kind: LiftKind::ExactModified, coeffs: vec![], cell_norm2: vec![0.0; n], cell_triple_norm2: vec![0.0; n] };
    let mut approx = LiftedResidual { kind: LiftKind::Approximate, coeffs: vec![], cell_norm2: vec![0.0; n], cell_triple_norm2: vec![0.0; n] };
    for kf in 0..n {
        let (frame, data) = local_problem(sys, x, kf)?;
        let r = exact_modified_lift(&frame, &data);
        let (a, b) = lift_norms(&frame, &r);
        exact.cell_norm2[kf] = a;
        exact.cell_triple_norm2[kf] = b;
        let rr = frame.uniform(approximate_lift(&frame, &data));
        let (a, b) = lift_norms(&frame, &rr);
        approx.cell_norm2[kf] = a;
        approx.cell_triple_norm2[kf] = b;
    }
    Ok((exact, approx))
}

/// Frame and residual data of trial vector `x` on test cell `kf`.
pub fn local_problem(sys: &DpgSystem, x: &[f64], kf: usize) -> Result<(CharacteristicFrame, LocalResidualData)> {
    let c = sys.pair.parent[kf];
    let frame = build_frame(&sys.pair.fine.cell_points(kf), sys.data.b_avg[kf])?;
    let u = sys.trial.u_poly(x, c);
    let w = sys.trial.w_poly(x, c).rechart(u.chart);
    let ch = u.chart;
    let b = [sys.data.b[c][0].rechart(ch), sys.data.b[c][1].rechart(ch)];
    let data = LocalResidualData::new(&u, &w, &b, &sys.data.c[c].rechart(ch), &sys.data.f[c].rechart(ch), sys.data.div_avg[kf]);
    Ok((frame, data))
}
