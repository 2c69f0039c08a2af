//! Gauss-Legendre rules and collapsed (Duffy) Gauss rules on triangles.
//! Every rule is requested by the polynomial degree it must integrate exactly.

use crate::geometry::{add, clip_halfplane, fan_triangles, norm, scale, signed_area, sub, Point};
use std::sync::OnceLock;

const MAX_POINTS: usize = 64;

/// Gauss-Legendre nodes and weights on [0, 1] with `n` points.
pub fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let table = CACHE.get_or_init(|| (0..=MAX_POINTS).map(compute_gauss_legendre).collect());
    assert!((1..=MAX_POINTS).contains(&n), "unsupported Gauss rule size {n}");
    &table[n]
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 0 {
        return (vec![], vec![]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Number of Gauss points integrating degree `deg` exactly in 1D.
pub fn points_for_degree(deg: usize) -> usize {
    (deg / 2 + 1).min(MAX_POINTS)
}

/// Quadrature points with weights (already scaled by measure).
pub type Rule = Vec<(Point, f64)>;

pub fn segment_rule(a: Point, b: Point, deg: usize) -> Rule {
    let (x, w) = gauss_legendre(points_for_degree(deg));
    let len = norm(sub(b, a));
    x.iter()
        .zip(w)
        .map(|(&t, &wt)| (add(a, scale(t, sub(b, a))), wt * len))
        .collect()
}

pub fn triangle_rule(p: [Point; 3], deg: usize) -> Rule {
    let n = points_for_degree(deg + 1);
    let (x, w) = gauss_legendre(n);
    let area2 = 2.0 * signed_area(p[0], p[1], p[2]).abs();
    let e1 = sub(p[1], p[0]);
    let e2 = sub(p[2], p[0]);
    let mut rule = Vec::with_capacity(n * n);
    for i in 0..n {
        let u = x[i];
        for j in 0..n {
            let v = x[j] * (1.0 - u);
            let wt = w[i] * w[j] * (1.0 - u) * area2;
            rule.push((add(p[0], add(scale(u, e1), scale(v, e2))), wt));
        }
    }
    rule
}

/// Rule on a simplex given by its vertices (2 points in 1D, 3 in 2D).
pub fn cell_rule(verts: &[Point], deg: usize) -> Rule {
    match verts.len() {
        2 => segment_rule(verts[0], verts[1], deg),
        3 => triangle_rule([verts[0], verts[1], verts[2]], deg),
        n => panic!("unsupported simplex with {n} vertices"),
    }
}

/// A straight line `normal · x = offset` across which integrands may jump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cut {
    pub normal: Point,
    pub offset: f64,
}

/// Like [`cell_rule`] but subdivides the cell along the given cuts so that
/// integrands that are polynomial on each side are integrated exactly.
pub fn cell_rule_split(verts: &[Point], deg: usize, cuts: &[Cut]) -> Rule {
    if cuts.is_empty() {
        return cell_rule(verts, deg);
    }
    if verts.len() == 2 {
        let (a, b) = (verts[0][0].min(verts[1][0]), verts[0][0].max(verts[1][0]));
        let mut nodes = vec![a, b];
        for c in cuts {
            if c.normal[0] != 0.0 {
                let t = c.offset / c.normal[0];
                if t > a && t < b {
                    nodes.push(t);
                }
            }
        }
        nodes.sort_by(f64::total_cmp);
        let mut rule = Vec::new();
        for s in nodes.windows(2) {
            rule.extend(segment_rule([s[0], 0.0], [s[1], 0.0], deg));
        }
        return rule;
    }
    let mut pieces: Vec<Vec<Point>> = vec![verts.to_vec()];
    for c in cuts {
        let mut next = Vec::new();
        for poly in &pieces {
            let lo = clip_halfplane(poly, c.normal, c.offset);
            let hi = clip_halfplane(poly, scale(-1.0, c.normal), -c.offset);
            for q in [lo, hi] {
                if q.len() >= 3 && crate::geometry::polygon_area(&q).abs() > 0.0 {
                    next.push(q);
                }
            }
        }
        pieces = next;
    }
    let mut rule = Vec::new();
    for poly in &pieces {
        for t in fan_triangles(poly) {
            rule.extend(triangle_rule(t, deg));
        }
    }
    rule
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_monomials() {
        for deg in 0..20 {
            let (x, w) = gauss_legendre(points_for_degree(deg));
            let s: f64 = x.iter().zip(w).map(|(t, wt)| wt * t.powi(deg as i32)).sum();
            assert!((s - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn triangle_rule_exactness() {
        // int_T x^a y^b over the reference triangle = a! b! / (a+b+2)!
        let fact = |n: usize| (1..=n).product::<usize>() as f64;
        for a in 0..6 {
            for b in 0..6 {
                let rule = triangle_rule([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], a + b);
                let s: f64 = rule.iter().map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((s - exact).abs() < 1e-15, "{a} {b}");
            }
        }
    }

    #[test]
    fn split_rule_integrates_step_exactly() {
        let cut = Cut { normal: [1.0, 0.0], offset: 0.3 };
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let rule = cell_rule_split(&tri, 2, &[cut]);
        let s: f64 = rule.iter().map(|(p, w)| if p[0] < 0.3 { *w } else { 0.0 }).sum();
        // area of {x < 0.3} within the triangle = 0.5 - 0.5 * 0.7^2
        assert!((s - (0.5 - 0.5 * 0.49)).abs() < 1e-15);
        let seg = cell_rule_split(&[[0.0, 0.0], [1.0, 0.0]], 1, &[cut]);
        let s1: f64 = seg.iter().map(|(p, w)| if p[0] < 0.3 { *w } else { 0.0 }).sum();
        assert!((s1 - 0.3).abs() < 1e-15);
    }
}
