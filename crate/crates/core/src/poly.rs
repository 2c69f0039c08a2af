//! Dense bivariate polynomials in monomial form, plus a cell-local chart so
//! that polynomials living on small cells stay well conditioned.

use crate::geometry::Point;
use std::ops::{Add, Mul, Neg, Sub};

/// `sum c[i][j] x^i y^j` with `i <= nx`, `j <= ny`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    nx: usize,
    ny: usize,
    c: Vec<f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(v: f64) -> Self {
        Poly { nx: 0, ny: 0, c: vec![v] }
    }

    pub fn with_shape(nx: usize, ny: usize) -> Self {
        Poly { nx, ny, c: vec![0.0; (nx + 1) * (ny + 1)] }
    }

    pub fn monomial(i: usize, j: usize, coef: f64) -> Self {
        let mut p = Self::with_shape(i, j);
        p.set(i, j, coef);
        p
    }

    /// `a0 + a1 x + a2 y`
    pub fn affine(a: [f64; 3]) -> Self {
        let mut p = Self::with_shape(1, 1);
        p.set(0, 0, a[0]);
        p.set(1, 0, a[1]);
        p.set(0, 1, a[2]);
        p
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i > self.nx || j > self.ny {
            0.0
        } else {
            self.c[i * (self.ny + 1) + j]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let ny = self.ny;
        self.c[i * (ny + 1) + j] = v;
    }

    #[inline]
    fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let ny = self.ny;
        self.c[i * (ny + 1) + j] += v;
    }

    /// Largest `i + j` with a nonzero coefficient.
    pub fn total_degree(&self) -> usize {
        let mut d = 0;
        for i in 0..=self.nx {
            for j in 0..=self.ny {
                if self.get(i, j) != 0.0 {
                    d = d.max(i + j);
                }
            }
        }
        d
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for i in (0..=self.nx).rev() {
            let mut row = 0.0;
            for j in (0..=self.ny).rev() {
                row = row * y + self.get(i, j);
            }
            acc = acc * x + row;
        }
        acc
    }

    pub fn scaled(&self, s: f64) -> Self {
        Poly { nx: self.nx, ny: self.ny, c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn dx(&self) -> Self {
        if self.nx == 0 {
            return Self::zero();
        }
        let mut p = Self::with_shape(self.nx - 1, self.ny);
        for i in 1..=self.nx {
            for j in 0..=self.ny {
                p.set(i - 1, j, i as f64 * self.get(i, j));
            }
        }
        p
    }

    pub fn dy(&self) -> Self {
        if self.ny == 0 {
            return Self::zero();
        }
        let mut p = Self::with_shape(self.nx, self.ny - 1);
        for i in 0..=self.nx {
            for j in 1..=self.ny {
                p.set(i, j - 1, j as f64 * self.get(i, j));
            }
        }
        p
    }

    /// Antiderivative in x vanishing at x = 0.
    pub fn antideriv_x(&self) -> Self {
        let mut p = Self::with_shape(self.nx + 1, self.ny);
        for i in 0..=self.nx {
            for j in 0..=self.ny {
                p.set(i + 1, j, self.get(i, j) / (i + 1) as f64);
            }
        }
        p
    }

    /// Substitute `x -> X(x,y)`, `y -> Y(x,y)` for affine `X = a0 + a1 x + a2 y`
    /// and `Y = b0 + b1 x + b2 y`.
    pub fn compose_affine(&self, a: [f64; 3], b: [f64; 3]) -> Self {
        let xa = Poly::affine(a);
        let yb = Poly::affine(b);
        let mut ypow = vec![Poly::constant(1.0)];
        for j in 1..=self.ny {
            let next = &ypow[j - 1] * &yb;
            ypow.push(next);
        }
        // Horner in X over rows that are polynomials in Y.
        let mut acc = Poly::zero();
        for i in (0..=self.nx).rev() {
            let mut row = Poly::zero();
            for (j, yp) in ypow.iter().enumerate() {
                let cij = self.get(i, j);
                if cij != 0.0 {
                    row = &row + &yp.scaled(cij);
                }
            }
            acc = &(&acc * &xa) + &row;
        }
        acc.trimmed()
    }

    /// Drop trailing all-zero rows/columns.
    pub fn trimmed(&self) -> Self {
        let mut nx = 0;
        let mut ny = 0;
        for i in 0..=self.nx {
            for j in 0..=self.ny {
                if self.get(i, j) != 0.0 {
                    nx = nx.max(i);
                    ny = ny.max(j);
                }
            }
        }
        let mut p = Self::with_shape(nx, ny);
        for i in 0..=nx {
            for j in 0..=ny {
                p.set(i, j, self.get(i, j));
            }
        }
        p
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut p = Poly::with_shape(self.nx.max(o.nx), self.ny.max(o.ny));
        for i in 0..=p.nx {
            for j in 0..=p.ny {
                p.set(i, j, self.get(i, j) + o.get(i, j));
            }
        }
        p
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &o.scaled(-1.0)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scaled(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut p = Poly::with_shape(self.nx + o.nx, self.ny + o.ny);
        for i in 0..=self.nx {
            for j in 0..=self.ny {
                let a = self.get(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..=o.nx {
                    for l in 0..=o.ny {
                        p.add_to(i + k, j + l, a * o.get(k, l));
                    }
                }
            }
        }
        p
    }
}

/// Monomial exponents of total degree <= p, graded order.
pub fn exponents(dim: usize, p: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for d in 0..=p {
        if dim == 1 {
            e.push((d, 0));
        } else {
            for j in 0..=d {
                e.push((d - j, j));
            }
        }
    }
    e
}

pub fn dim_p(dim: usize, p: usize) -> usize {
    if dim == 1 {
        p + 1
    } else {
        (p + 1) * (p + 2) / 2
    }
}

/// Local coordinates `xi = (X - center) / h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chart {
    pub center: Point,
    pub h: f64,
}

impl Chart {
    #[inline]
    pub fn local(&self, x: Point) -> Point {
        [(x[0] - self.center[0]) / self.h, (x[1] - self.center[1]) / self.h]
    }
}

/// A polynomial on a cell expressed in that cell's chart.
#[derive(Clone, Debug)]
pub struct CellPoly {
    pub chart: Chart,
    pub p: Poly,
}

impl CellPoly {
    pub fn new(chart: Chart, p: Poly) -> Self {
        CellPoly { chart, p }
    }

    pub fn constant(chart: Chart, v: f64) -> Self {
        CellPoly { chart, p: Poly::constant(v) }
    }

    /// Polynomial given in global monomials `sum c x^i y^j`, re-expressed in `chart`.
    pub fn from_global(chart: Chart, global: &Poly) -> Self {
        let c = chart.center;
        let h = chart.h;
        let p = global.compose_affine([c[0], h, 0.0], [c[1], 0.0, h]);
        CellPoly { chart, p }
    }

    #[inline]
    pub fn eval(&self, x: Point) -> f64 {
        let l = self.chart.local(x);
        self.p.eval(l[0], l[1])
    }

    pub fn grad(&self, x: Point) -> Point {
        [self.dx().eval(x), self.dy().eval(x)]
    }

    /// Global x-derivative.
    pub fn dx(&self) -> CellPoly {
        CellPoly { chart: self.chart, p: self.p.dx().scaled(1.0 / self.chart.h) }
    }

    pub fn dy(&self) -> CellPoly {
        CellPoly { chart: self.chart, p: self.p.dy().scaled(1.0 / self.chart.h) }
    }

    /// Directional derivative `b · grad` for a polynomial vector field on the same chart.
    pub fn directional(&self, b: &[CellPoly; 2]) -> CellPoly {
        &(&b[0] * &self.dx()) + &(&b[1] * &self.dy())
    }

    pub fn scaled(&self, s: f64) -> CellPoly {
        CellPoly { chart: self.chart, p: self.p.scaled(s) }
    }

    pub fn rechart(&self, chart: Chart) -> CellPoly {
        if chart == self.chart {
            return self.clone();
        }
        // xi_old = (X - c_old)/h_old with X = c_new + h_new xi_new.
        let s = chart.h / self.chart.h;
        let a0 = (chart.center[0] - self.chart.center[0]) / self.chart.h;
        let b0 = (chart.center[1] - self.chart.center[1]) / self.chart.h;
        CellPoly { chart, p: self.p.compose_affine([a0, s, 0.0], [b0, 0.0, s]) }
    }

    /// Express in frame coordinates where `X = origin + x e1 + y e2`.
    pub fn in_frame(&self, origin: Point, e1: Point, e2: Point) -> Poly {
        let c = self.chart.center;
        let h = self.chart.h;
        self.p.compose_affine(
            [(origin[0] - c[0]) / h, e1[0] / h, e2[0] / h],
            [(origin[1] - c[1]) / h, e1[1] / h, e2[1] / h],
        )
    }
}

fn same_chart(a: &CellPoly, b: &CellPoly) -> Chart {
    debug_assert!(a.chart == b.chart, "polynomials on different charts");
    a.chart
}

impl Add for &CellPoly {
    type Output = CellPoly;
    fn add(self, o: &CellPoly) -> CellPoly {
        CellPoly { chart: same_chart(self, o), p: &self.p + &o.p }
    }
}

impl Sub for &CellPoly {
    type Output = CellPoly;
    fn sub(self, o: &CellPoly) -> CellPoly {
        CellPoly { chart: same_chart(self, o), p: &self.p - &o.p }
    }
}

impl Mul for &CellPoly {
    type Output = CellPoly;
    fn mul(self, o: &CellPoly) -> CellPoly {
        CellPoly { chart: same_chart(self, o), p: &self.p * &o.p }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_eval() {
        let p = Poly::affine([1.0, 2.0, 0.0]); // 1 + 2x
        let q = Poly::affine([0.0, 0.0, 3.0]); // 3y
        let r = &p * &q;
        assert!((r.eval(0.5, 2.0) - 12.0).abs() < 1e-14);
        assert!((r.dx().eval(0.1, 2.0) - 12.0).abs() < 1e-14);
        assert!((r.dy().eval(0.5, 7.0) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn compose_affine_matches_pointwise() {
        let mut p = Poly::with_shape(2, 2);
        for i in 0..3 {
            for j in 0..3 {
                p.set(i, j, (1 + i + 3 * j) as f64 * 0.1);
            }
        }
        let a = [0.3, -1.2, 0.5];
        let b = [-0.7, 0.4, 2.0];
        let q = p.compose_affine(a, b);
        for &(x, y) in &[(0.1, 0.2), (-1.0, 0.7), (2.0, -0.3)] {
            let xx = a[0] + a[1] * x + a[2] * y;
            let yy = b[0] + b[1] * x + b[2] * y;
            assert!((q.eval(x, y) - p.eval(xx, yy)).abs() < 1e-12);
        }
    }

    #[test]
    fn antiderivative_roundtrip() {
        let p = &Poly::affine([1.0, 2.0, 3.0]) * &Poly::affine([0.5, -1.0, 1.0]);
        let back = p.antideriv_x().dx();
        for &(x, y) in &[(0.3, 0.1), (-0.4, 2.0)] {
            assert!((back.eval(x, y) - p.eval(x, y)).abs() < 1e-14);
        }
    }

    #[test]
    fn cell_poly_global_derivative() {
        let chart = Chart { center: [0.5, 0.25], h: 0.1 };
        let g = &Poly::monomial(2, 0, 1.0) + &Poly::monomial(0, 1, 3.0); // x^2 + 3y
        let cp = CellPoly::from_global(chart, &g);
        let x = [0.3, 0.7];
        assert!((cp.eval(x) - (0.09 + 2.1)).abs() < 1e-13);
        let gr = cp.grad(x);
        assert!((gr[0] - 0.6).abs() < 1e-12 && (gr[1] - 3.0).abs() < 1e-12);
        let moved = cp.rechart(Chart { center: [0.0, 0.0], h: 1.0 });
        assert!((moved.eval(x) - cp.eval(x)).abs() < 1e-12);
    }
}
