use super::faces::{skeleton_of, SkeletonFace};
use super::SimplicialMesh;
use crate::geometry::Point;

/// Trial mesh `T` together with the test mesh `T_s` obtained by bisecting
/// every cell of `T` uniformly `depth` times.
#[derive(Clone, Debug)]
pub struct SubgridPair {
    pub coarse: SimplicialMesh,
    pub fine: SimplicialMesh,
    pub depth: u32,
    pub sigma: f64,
    /// Coarse cell owning each fine cell.
    pub parent: Vec<usize>,
    /// Fine cells of each coarse cell.
    pub children: Vec<Vec<usize>>,
}

pub fn make_subgrid(coarse: &SimplicialMesh, depth: u32) -> SubgridPair {
    let fine = coarse.bisect_uniform_unclosed(depth);
    let coarse_of = coarse.leaf_index();
    let mut parent = Vec::with_capacity(fine.num_cells());
    let mut children = vec![Vec::new(); coarse.num_cells()];
    for k in 0..fine.num_cells() {
        let mut e = fine.element_of(k);
        let owner = loop {
            if let Some(&c) = coarse_of.get(&e) {
                break c;
            }
            e = fine.elements()[e].parent.expect("fine cell descends from a coarse cell");
        };
        parent.push(owner);
        children[owner].push(k);
    }
    let mut sigma: f64 = 0.0;
    for (c, kids) in children.iter().enumerate() {
        let dc = coarse.cell_diameter(c);
        let ratio = kids.iter().map(|&k| fine.cell_diameter(k) / dc).fold(0.0, f64::max);
        sigma = sigma.max(ratio.max(dc));
    }
    SubgridPair { coarse: coarse.clone(), fine, depth, sigma, parent, children }
}

impl SubgridPair {
    /// Non-characteristic faces of the fine partition.
    pub fn skeleton_faces(&self, b: &dyn Fn(Point) -> Point) -> Vec<SkeletonFace> {
        skeleton_of(&self.fine, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_root_mesh, Domain};

    #[test]
    fn interval_subgrid() {
        let m = build_root_mesh(Domain::Interval(0.0, 1.0), 2).unwrap();
        let p = make_subgrid(&m, 1);
        assert_eq!(p.fine.num_cells(), 4);
        assert!((p.fine.cell_diameter(0) - 0.25).abs() < 1e-15);
        assert_eq!(p.parent, vec![0, 0, 1, 1]);
        let same = make_subgrid(&m, 0);
        assert_eq!(same.fine.num_cells(), 2);
        let sk = p.skeleton_faces(&|_| [1.0, 0.0]);
        let mut xs: Vec<f64> = sk.iter().map(|f| f.points[0][0]).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn triangle_subgrid_counts() {
        let m = build_root_mesh(Domain::Box([0.0, 0.0], [1.0, 1.0]), 2).unwrap().refine(&[0], 1);
        let p = make_subgrid(&m, 2);
        assert_eq!(p.fine.num_cells(), 4 * m.num_cells());
        assert!(p.children.iter().all(|c| c.len() == 4));
        let area: f64 = (0..p.fine.num_cells()).map(|k| p.fine.cell_measure(k)).sum();
        assert!((area - 1.0).abs() < 1e-14);
    }
}
