use super::SimplicialMesh;
use crate::geometry::{add, clip_halfplane, convex_hull, convex_overlap, diameter, norm, scale, Point};

/// Convex hull of `cell ∪ (cell + t b)` for `t` up to the bounding-box size,
/// clipped to the bounding box.
pub fn swept_region(cell: &[Point], b: Point, bbox: [Point; 2]) -> Vec<Point> {
    let reach = 2.0 * diameter(&[bbox[0], bbox[1]]) / norm(b);
    let mut pts: Vec<Point> = cell.to_vec();
    pts.extend(cell.iter().map(|p| add(*p, scale(reach, b))));
    let mut poly = convex_hull(&pts);
    let [lo, hi] = bbox;
    poly = clip_halfplane(&poly, [1.0, 0.0], hi[0]);
    poly = clip_halfplane(&poly, [-1.0, 0.0], -lo[0]);
    poly = clip_halfplane(&poly, [0.0, 1.0], hi[1]);
    clip_halfplane(&poly, [0.0, -1.0], -lo[1])
}

/// Marked cells plus every cell whose interior meets the forward sweep of a
/// cell already in the set, iterated to a fixed point. In 1D the marks are
/// returned unchanged.
pub fn downwind_closure(mesh: &SimplicialMesh, marks: &[usize], b: Point) -> Vec<usize> {
    if mesh.dim() == 1 {
        let mut m = marks.to_vec();
        m.sort_unstable();
        m.dedup();
        return m;
    }
    forward_sweep(mesh, marks, b)
}

/// The sweep closure in any dimension (in 1D: everything downstream).
pub fn forward_sweep(mesh: &SimplicialMesh, marks: &[usize], b: Point) -> Vec<usize> {
    let n = mesh.num_cells();
    let mut inside = vec![false; n];
    let mut queue: Vec<usize> = Vec::new();
    for &k in marks {
        if !inside[k] {
            inside[k] = true;
            queue.push(k);
        }
    }
    if mesh.dim() == 1 {
        let s = b[0].signum();
        let start = marks.iter().map(|&k| {
            let p = mesh.cell_points(k);
            (s * p[0][0]).min(s * p[1][0])
        });
        if let Some(x0) = start.fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.min(v)))) {
            for k in 0..n {
                let p = mesh.cell_points(k);
                let hi = (s * p[0][0]).max(s * p[1][0]);
                if hi > x0 + 1e-14 {
                    inside[k] = true;
                }
            }
        }
        return (0..n).filter(|&k| inside[k]).collect();
    }
    let polys: Vec<Vec<Point>> = (0..n).map(|k| mesh.cell_points(k)).collect();
    let boxes: Vec<[Point; 2]> = polys.iter().map(|p| bounds(p)).collect();
    while let Some(k) = queue.pop() {
        let swept = swept_region(&polys[k], b, mesh.bbox());
        let sb = bounds(&swept);
        let tol = 1e-12 * diameter(&polys[k]);
        for j in 0..n {
            if inside[j] || !boxes_meet(&boxes[j], &sb) {
                continue;
            }
            if convex_overlap(&polys[j], &swept, tol) {
                inside[j] = true;
                queue.push(j);
            }
        }
    }
    (0..n).filter(|&k| inside[k]).collect()
}

/// Number of (cell, downstream cell) pairs where the downstream cell has
/// seen fewer enrichment steps; zero means the mesh never coarsens
/// downstream.
pub fn downstream_violations(mesh: &SimplicialMesh, b: Point) -> usize {
    let n = mesh.num_cells();
    let polys: Vec<Vec<Point>> = (0..n).map(|k| mesh.cell_points(k)).collect();
    let boxes: Vec<[Point; 2]> = polys.iter().map(|p| bounds(p)).collect();
    let depth: Vec<u32> = (0..n).map(|k| mesh.element(k).enrich_depth).collect();
    let mut bad = 0;
    for k in 0..n {
        let swept = swept_region(&polys[k], b, mesh.bbox());
        let sb = bounds(&swept);
        let tol = 1e-12 * diameter(&polys[k]);
        for j in 0..n {
            if j != k && depth[j] < depth[k] && boxes_meet(&boxes[j], &sb) && convex_overlap(&polys[j], &swept, tol) {
                bad += 1;
            }
        }
    }
    bad
}

fn bounds(p: &[Point]) -> [Point; 2] {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for q in p {
        for d in 0..2 {
            lo[d] = lo[d].min(q[d]);
            hi[d] = hi[d].max(q[d]);
        }
    }
    [lo, hi]
}

fn boxes_meet(a: &[Point; 2], b: &[Point; 2]) -> bool {
    (0..2).all(|d| a[0][d] < b[1][d] && b[0][d] < a[1][d])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_root_mesh, Domain};

    fn find(m: &SimplicialMesh, c: Point) -> usize {
        (0..m.num_cells())
            .min_by(|&a, &b| {
                let da = norm(crate::geometry::sub(m.cell_centroid(a), c));
                let db = norm(crate::geometry::sub(m.cell_centroid(b), c));
                da.total_cmp(&db)
            })
            .unwrap()
    }

    #[test]
    fn one_dimensional_marks_unchanged() {
        let m = build_root_mesh(Domain::Interval(0.0, 1.0), 4).unwrap();
        assert_eq!(downwind_closure(&m, &[2, 1], [1.0, 0.0]), vec![1, 2]);
        assert_eq!(forward_sweep(&m, &[1], [1.0, 0.0]), vec![1, 2, 3]);
        assert_eq!(forward_sweep(&m, &[1], [-1.0, 0.0]), vec![0, 1]);
    }

    #[test]
    fn band_sweep_in_2d() {
        let m = build_root_mesh(Domain::Box([0.0, 0.0], [1.0, 1.0]), 2).unwrap();
        // lower-left square, lower triangle (centroid (1/3, 1/6) scaled)
        let k = find(&m, [0.5 * 2.0 / 3.0, 0.5 / 3.0]);
        let set = downwind_closure(&m, &[k], [1.0, 0.0]);
        assert!(set.contains(&k));
        // triangle in x ∈ [0.5, 1] of the same band
        let right = find(&m, [0.5 + 0.5 / 3.0, 0.5 * 2.0 / 3.0]);
        assert!(set.contains(&right));
        // upstream / other band cells excluded
        let up = find(&m, [0.5 / 3.0, 0.5 + 0.5 * 2.0 / 3.0]);
        assert!(!set.contains(&up));
        // idempotent and a superset
        let again = downwind_closure(&m, &set, [1.0, 0.0]);
        assert_eq!(again, set);
    }
}
