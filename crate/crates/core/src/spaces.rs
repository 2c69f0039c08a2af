//! Discrete trial space (broken P_{m_u} × continuous P_{m_w} with zero
//! inflow trace) and the broken test-search space on the subgrid.

use crate::basis::{lagrange_basis, lagrange_nodes, orthonormal_basis};
use crate::geometry::Point;
use crate::mesh::{FaceClassification, SimplicialMesh};
use crate::poly::{dim_p, CellPoly};
use crate::quadrature::cell_rule;
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum NodeKey {
    Vertex(usize),
    Edge(usize, usize, usize),
    Interior(usize, usize),
}

/// Global numbering: the u-block occupies `0..n_u`, the w-block `n_u..n_u + n_w`.
#[derive(Clone, Debug)]
pub struct TrialSpace {
    pub mesh: SimplicialMesh,
    pub m_u: usize,
    pub m_w: usize,
    pub u_basis: Vec<Vec<CellPoly>>,
    pub w_basis: Vec<Vec<CellPoly>>,
    /// Global index of each local w-basis function; `None` on inflow nodes.
    pub w_dofs: Vec<Vec<Option<usize>>>,
    /// Coordinates of the free w-nodes, indexed by global w index minus `n_u`.
    pub w_nodes: Vec<Point>,
    pub n_u: usize,
    pub n_w: usize,
}

pub fn build_trial_space(mesh: &SimplicialMesh, m_u: usize, m_w: usize, faces: &FaceClassification) -> TrialSpace {
    build_trial_space_with(mesh, m_u, m_w, Some(faces))
}

/// With `faces = None` no inflow constraint is applied.
pub fn build_trial_space_with(mesh: &SimplicialMesh, m_u: usize, m_w: usize, faces: Option<&FaceClassification>) -> TrialSpace {
    assert!(m_w >= 1, "w-block needs degree at least 1");
    let dim = mesh.dim();
    let n_cells = mesh.num_cells();
    let nloc_u = dim_p(dim, m_u);
    let mut u_basis = Vec::with_capacity(n_cells);
    let mut w_basis = Vec::with_capacity(n_cells);
    let mut keys: Vec<Vec<NodeKey>> = Vec::with_capacity(n_cells);
    let mut key_pos: HashMap<NodeKey, Point> = HashMap::new();
    for k in 0..n_cells {
        let verts = mesh.cell_points(k);
        let chart = mesh.cell_chart(k);
        u_basis.push(orthonormal_basis(&verts, m_u, chart));
        let nodes = lagrange_nodes(&verts, m_w);
        w_basis.push(lagrange_basis(dim, &nodes, m_w, chart));
        let ids = mesh.cell_vertex_ids(k);
        let mut kk: Vec<NodeKey> = ids.iter().map(|&v| NodeKey::Vertex(v)).collect();
        if dim == 1 {
            for i in 1..m_w {
                kk.push(NodeKey::Interior(k, i));
            }
        } else {
            for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                for i in 1..m_w {
                    let (ga, gb) = (ids[a], ids[b]);
                    kk.push(if ga < gb { NodeKey::Edge(ga, gb, i) } else { NodeKey::Edge(gb, ga, m_w - i) });
                }
            }
            let mut c = 0;
            for j in 1..m_w {
                for _ in 1..m_w - j {
                    kk.push(NodeKey::Interior(k, c));
                    c += 1;
                }
            }
        }
        for (key, x) in kk.iter().zip(&nodes) {
            key_pos.entry(*key).or_insert(*x);
        }
        keys.push(kk);
    }
    // inflow nodes
    let mut constrained: HashMap<NodeKey, bool> = HashMap::new();
    if let Some(fc) = faces {
        for &(k, i) in &fc.inflow_boundary {
            let fv = mesh.face_vertex_ids(k, i);
            for &v in &fv {
                constrained.insert(NodeKey::Vertex(v), true);
            }
            if fv.len() == 2 {
                let (a, b) = (fv[0].min(fv[1]), fv[0].max(fv[1]));
                for i in 1..m_w {
                    constrained.insert(NodeKey::Edge(a, b, i), true);
                }
            }
        }
    }
    let n_u = n_cells * nloc_u;
    let mut numbering: HashMap<NodeKey, usize> = HashMap::new();
    let mut w_nodes = Vec::new();
    let mut w_dofs = Vec::with_capacity(n_cells);
    for kk in &keys {
        let mut row = Vec::with_capacity(kk.len());
        for key in kk {
            if constrained.contains_key(key) {
                row.push(None);
                continue;
            }
            let next = n_u + numbering.len();
            let id = *numbering.entry(*key).or_insert_with(|| {
                w_nodes.push(key_pos[key]);
                next
            });
            row.push(Some(id));
        }
        w_dofs.push(row);
    }
    let n_w = numbering.len();
    TrialSpace { mesh: mesh.clone(), m_u, m_w, u_basis, w_basis, w_dofs, w_nodes, n_u, n_w }
}

impl TrialSpace {
    pub fn dim(&self) -> usize {
        self.n_u + self.n_w
    }

    pub fn n_u_local(&self) -> usize {
        self.u_basis[0].len()
    }

    /// Local (basis function, global index) list of cell `k`: u-block then free w-block.
    pub fn cell_dofs(&self, k: usize) -> (Vec<usize>, Vec<(usize, usize)>) {
        let nl = self.n_u_local();
        let u: Vec<usize> = (k * nl..(k + 1) * nl).collect();
        let w: Vec<(usize, usize)> = self.w_dofs[k].iter().enumerate().filter_map(|(i, g)| g.map(|g| (i, g))).collect();
        (u, w)
    }

    pub fn u_poly(&self, x: &[f64], k: usize) -> CellPoly {
        let nl = self.n_u_local();
        let mut p = CellPoly::constant(self.mesh.cell_chart(k), 0.0);
        for (i, phi) in self.u_basis[k].iter().enumerate() {
            let c = x[k * nl + i];
            if c != 0.0 {
                p = &p + &phi.scaled(c);
            }
        }
        p
    }

    pub fn w_poly(&self, x: &[f64], k: usize) -> CellPoly {
        let mut p = CellPoly::constant(self.mesh.cell_chart(k), 0.0);
        for (i, g) in self.w_dofs[k].iter().enumerate() {
            if let Some(g) = g {
                if x[*g] != 0.0 {
                    p = &p + &self.w_basis[k][i].scaled(x[*g]);
                }
            }
        }
        p
    }

    /// Re-express a function on this space in a space on a refinement of its mesh.
    pub fn prolongate(&self, x: &[f64], fine: &TrialSpace) -> Vec<f64> {
        let coarse_of = self.mesh.leaf_index();
        let fm = &fine.mesh;
        let mut y = vec![0.0; fine.dim()];
        let nl = fine.n_u_local();
        for k in 0..fm.num_cells() {
            let mut e = fm.element_of(k);
            let c = loop {
                if let Some(&c) = coarse_of.get(&e) {
                    break c;
                }
                e = fm.elements()[e].parent.expect("fine mesh refines the coarse mesh");
            };
            let u = self.u_poly(x, c);
            let w = self.w_poly(x, c);
            let rule = cell_rule(&fm.cell_points(k), 2 * self.m_u.max(fine.m_u));
            for (i, phi) in fine.u_basis[k].iter().enumerate() {
                y[k * nl + i] = rule.iter().map(|(p, wt)| wt * u.eval(*p) * phi.eval(*p)).sum();
            }
            let nodes = lagrange_nodes(&fm.cell_points(k), fine.m_w);
            for (i, g) in fine.w_dofs[k].iter().enumerate() {
                if let Some(g) = g {
                    y[*g] = w.eval(nodes[i]);
                }
            }
        }
        y
    }
}

/// Evaluate `(u, w, grad w)` of a coefficient vector on cell `k` at given points.
pub fn evaluate_trial(space: &TrialSpace, x: &[f64], k: usize, points: &[Point]) -> Vec<(f64, f64, Point)> {
    let u = space.u_poly(x, k);
    let w = space.w_poly(x, k);
    points.iter().map(|p| (u.eval(*p), w.eval(*p), w.grad(*p))).collect()
}

#[derive(Clone, Debug)]
pub struct TestSearchSpace {
    pub m_v: usize,
    pub basis: Vec<Vec<CellPoly>>,
    pub n_local: usize,
}

pub fn build_test_space(fine: &SimplicialMesh, m_v: usize) -> TestSearchSpace {
    let basis: Vec<Vec<CellPoly>> =
        (0..fine.num_cells()).map(|k| orthonormal_basis(&fine.cell_points(k), m_v, fine.cell_chart(k))).collect();
    TestSearchSpace { m_v, n_local: dim_p(fine.dim(), m_v), basis }
}

impl TestSearchSpace {
    pub fn dim(&self) -> usize {
        self.basis.len() * self.n_local
    }

    pub fn offset(&self, k: usize) -> usize {
        k * self.n_local
    }
}
