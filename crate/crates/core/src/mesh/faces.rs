use super::SimplicialMesh;
use crate::geometry::{dot, norm, Point};
use crate::quadrature::segment_rule;

/// Relative cutoff below which `b·n` counts as zero.
pub const CHARACTERISTIC_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceKind {
    Inflow,
    Outflow,
    Characteristic,
}

#[derive(Clone, Debug)]
pub struct FaceClassification {
    /// `kinds[k][i]` for face `i` of cell `k`.
    pub kinds: Vec<Vec<FaceKind>>,
    pub inflow_boundary: Vec<(usize, usize)>,
    pub outflow_boundary: Vec<(usize, usize)>,
    pub characteristic_boundary: Vec<(usize, usize)>,
}

impl FaceClassification {
    pub fn kind(&self, k: usize, i: usize) -> FaceKind {
        self.kinds[k][i]
    }
}

/// Classify from the face average of `b·n` against the cutoff relative to `|b|`.
pub fn classify_face(points: &[Point], normal: Point, b: &dyn Fn(Point) -> Point) -> FaceKind {
    let (bn, bnorm) = if points.len() == 1 {
        let v = b(points[0]);
        (dot(v, normal), norm(v))
    } else {
        let rule = segment_rule(points[0], points[1], 6);
        let len: f64 = rule.iter().map(|r| r.1).sum();
        let mut bn = 0.0;
        let mut bb = 0.0;
        for (p, w) in &rule {
            let v = b(*p);
            bn += w * dot(v, normal);
            bb += w * norm(v);
        }
        (bn / len, bb / len)
    };
    if bn.abs() <= CHARACTERISTIC_TOL * bnorm {
        FaceKind::Characteristic
    } else if bn < 0.0 {
        FaceKind::Inflow
    } else {
        FaceKind::Outflow
    }
}

pub fn classify_faces(mesh: &SimplicialMesh, b: &dyn Fn(Point) -> Point) -> FaceClassification {
    let nf = mesh.nverts();
    let mut out = FaceClassification {
        kinds: Vec::with_capacity(mesh.num_cells()),
        inflow_boundary: vec![],
        outflow_boundary: vec![],
        characteristic_boundary: vec![],
    };
    for k in 0..mesh.num_cells() {
        let mut row = Vec::with_capacity(nf);
        for i in 0..nf {
            let kind = classify_face(&mesh.face_points(k, i), mesh.face_normal(k, i), b);
            if mesh.is_boundary_face(k, i) {
                match kind {
                    FaceKind::Inflow => out.inflow_boundary.push((k, i)),
                    FaceKind::Outflow => out.outflow_boundary.push((k, i)),
                    FaceKind::Characteristic => out.characteristic_boundary.push((k, i)),
                }
            }
            row.push(kind);
        }
        out.kinds.push(row);
    }
    out
}

/// A non-characteristic face of a (possibly non-conforming) partition with
/// its adjacent cells. `normal` is the outward normal of `cells[0]`.
#[derive(Clone, Debug)]
pub struct SkeletonFace {
    pub points: Vec<Point>,
    pub normal: Point,
    pub cells: Vec<(usize, usize)>,
}

pub(crate) fn skeleton_of(mesh: &SimplicialMesh, b: &dyn Fn(Point) -> Point) -> Vec<SkeletonFace> {
    let mut faces = Vec::new();
    for k in 0..mesh.num_cells() {
        for i in 0..mesh.nverts() {
            let nb = mesh.neighbor(k, i);
            if let Some(n) = nb {
                if n < k {
                    continue;
                }
            }
            let points = mesh.face_points(k, i);
            let normal = mesh.face_normal(k, i);
            if classify_face(&points, normal, b) == FaceKind::Characteristic {
                continue;
            }
            let mut cells = vec![(k, i)];
            if let Some(n) = nb {
                let j = (0..mesh.nverts()).find(|&j| mesh.neighbor(n, j) == Some(k)).expect("symmetric adjacency");
                cells.push((n, j));
            }
            faces.push(SkeletonFace { points, normal, cells });
        }
    }
    faces
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_root_mesh, Domain};

    #[test]
    fn interval_classification() {
        let m = build_root_mesh(Domain::Interval(0.0, 1.0), 1).unwrap();
        let fc = classify_faces(&m, &|_| [1.0, 0.0]);
        // face 0 is the point opposite vertex 0, i.e. x = 1
        assert_eq!(fc.kind(0, 0), FaceKind::Outflow);
        assert_eq!(fc.kind(0, 1), FaceKind::Inflow);
    }

    #[test]
    fn triangle_classification() {
        let p = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let kind = |i: usize, b: Point| {
            let pts: Vec<Point> = (1..3).map(|s| p[(i + s) % 3]).collect();
            classify_face(&pts, crate::mesh::face_normal_of(&p, i), &move |_| b)
        };
        let b = [1.0, 0.0];
        assert_eq!(kind(1, b), FaceKind::Inflow); // x = 0
        assert_eq!(kind(0, b), FaceKind::Outflow); // hypotenuse
        assert_eq!(kind(2, b), FaceKind::Characteristic); // y = 0
        let d = [std::f64::consts::FRAC_1_SQRT_2; 2];
        assert_eq!(kind(1, d), FaceKind::Inflow);
        assert_eq!(kind(2, d), FaceKind::Inflow);
        assert_eq!(kind(0, d), FaceKind::Outflow);
    }

    #[test]
    fn neighbors_see_opposite_kinds() {
        let m = build_root_mesh(Domain::Box([0.0, 0.0], [1.0, 1.0]), 3).unwrap().refine(&[4, 7], 2);
        let b = |_: Point| [0.8, 0.3];
        let fc = classify_faces(&m, &b);
        for k in 0..m.num_cells() {
            for i in 0..3 {
                if let Some(n) = m.neighbor(k, i) {
                    let j = (0..3).find(|&j| m.neighbor(n, j) == Some(k)).unwrap();
                    let pair = (fc.kind(k, i), fc.kind(n, j));
                    assert!(matches!(
                        pair,
                        (FaceKind::Inflow, FaceKind::Outflow)
                            | (FaceKind::Outflow, FaceKind::Inflow)
                            | (FaceKind::Characteristic, FaceKind::Characteristic)
                    ));
                }
            }
        }
    }

    #[test]
    fn skeleton_of_square() {
        let m = build_root_mesh(Domain::Box([0.0, 0.0], [1.0, 1.0]), 1).unwrap();
        let sk = skeleton_of(&m, &|_| [1.0, 0.0]);
        // x = 0, x = 1 and the diagonal; y = 0 and y = 1 are characteristic
        assert_eq!(sk.len(), 3);
        assert!(sk.iter().any(|f| f.cells.len() == 2));
    }
}
