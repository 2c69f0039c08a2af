//! Per-cell polynomial bases: L2-orthonormal modal bases and Lagrange bases.

use crate::geometry::Point;
use crate::poly::{dim_p, exponents, CellPoly, Chart, Poly};
use crate::quadrature::cell_rule;
use nalgebra::DMatrix;

/// L2(K)-orthonormal basis of P_deg(K), built from chart monomials by
/// twice-iterated modified Gram-Schmidt with exact quadrature.
pub fn orthonormal_basis(verts: &[Point], deg: usize, chart: Chart) -> Vec<CellPoly> {
    let dim = verts.len() - 1;
    let rule = cell_rule(verts, 2 * deg);
    let mono: Vec<CellPoly> = exponents(dim, deg).into_iter().map(|(i, j)| CellPoly::new(chart, Poly::monomial(i, j, 1.0))).collect();
    let vals: Vec<Vec<f64>> = mono.iter().map(|p| rule.iter().map(|(x, _)| p.eval(*x)).collect()).collect();
    let w: Vec<f64> = rule.iter().map(|r| r.1).collect();
    let n = mono.len();
    let ip = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&w).map(|((x, y), wt)| x * y * wt).sum::<f64>();
    // coefficients of each basis function in terms of the monomials
    let mut coef = DMatrix::<f64>::identity(n, n);
    let mut v = vals.clone();
    for k in 0..n {
        for _pass in 0..2 {
            for j in 0..k {
                let proj = ip(&v[k], &v[j]);
                for q in 0..v[k].len() {
                    v[k][q] -= proj * v[j][q];
                }
                for m in 0..n {
                    coef[(k, m)] -= proj * coef[(j, m)];
                }
            }
        }
        let nrm = ip(&v[k], &v[k]).sqrt();
        for q in 0..v[k].len() {
            v[k][q] /= nrm;
        }
        for m in 0..n {
            coef[(k, m)] /= nrm;
        }
    }
    (0..n)
        .map(|k| {
            let mut p = Poly::zero();
            for (m, mp) in mono.iter().enumerate() {
                p = &p + &mp.p.scaled(coef[(k, m)]);
            }
            CellPoly::new(chart, p)
        })
        .collect()
}

/// Lagrange nodes of P_deg on a simplex, in a fixed order: vertices, then
/// edge-interior nodes (edge by edge), then cell-interior nodes.
pub fn lagrange_nodes(verts: &[Point], deg: usize) -> Vec<Point> {
    let lerp = |a: Point, b: Point, t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let mut nodes: Vec<Point> = verts.to_vec();
    let p = deg as f64;
    if verts.len() == 2 {
        for i in 1..deg {
            nodes.push(lerp(verts[0], verts[1], i as f64 / p));
        }
        return nodes;
    }
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        for i in 1..deg {
            nodes.push(lerp(verts[a], verts[b], i as f64 / p));
        }
    }
    for j in 1..deg {
        for i in 1..deg - j {
            let (s, t) = (i as f64 / p, j as f64 / p);
            nodes.push([
                verts[0][0] + s * (verts[1][0] - verts[0][0]) + t * (verts[2][0] - verts[0][0]),
                verts[0][1] + s * (verts[1][1] - verts[0][1]) + t * (verts[2][1] - verts[0][1]),
            ]);
        }
    }
    nodes
}

/// Lagrange basis dual to `nodes` (which must be unisolvent for P_deg).
pub fn lagrange_basis(dim: usize, nodes: &[Point], deg: usize, chart: Chart) -> Vec<CellPoly> {
    let ex = exponents(dim, deg);
    let n = dim_p(dim, deg);
    assert_eq!(nodes.len(), n);
    let vand = DMatrix::from_fn(n, n, |r, c| {
        let l = chart.local(nodes[r]);
        l[0].powi(ex[c].0 as i32) * l[1].powi(ex[c].1 as i32)
    });
    let inv = vand.try_inverse().expect("unisolvent Lagrange nodes");
    (0..n)
        .map(|k| {
            let mut p = Poly::with_shape(deg, if dim == 1 { 0 } else { deg });
            for (c, &(i, j)) in ex.iter().enumerate() {
                p.set(i, j, inv[(c, k)]);
            }
            CellPoly::new(chart, p)
        })
        .collect()
}
