//! Conforming simplicial meshes (intervals / triangles) with newest-vertex
//! bisection, a subgrid companion partition, face classification relative to
//! a convection field, and forward-sweep queries.

mod downwind;
mod faces;
mod io;
mod subgrid;

pub use downwind::{downstream_violations, downwind_closure, forward_sweep, swept_region};
pub use faces::{classify_faces, FaceClassification, FaceKind, SkeletonFace};
pub use io::write_dump;
pub use subgrid::{make_subgrid, SubgridPair};

use crate::geometry::{self, Point};
use crate::poly::Chart;
use crate::{Error, Result};
use std::collections::HashMap;

/// Node of the refinement forest. For triangles `(a, b, c)` the refinement
/// edge is `(a, b)` and `c` is the newest vertex. Intervals use `(a, b)`.
#[derive(Clone, Debug)]
pub struct Element {
    pub verts: [usize; 3],
    pub parent: Option<usize>,
    pub children: Option<[usize; 2]>,
    pub generation: u32,
    pub root: usize,
    /// Number of adaptive steps in which this element (or an ancestor) was
    /// refined because it was marked or swept, as opposed to closure.
    pub enrich_depth: u32,
}

#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    dim: usize,
    vertices: Vec<Point>,
    elements: Vec<Element>,
    leaves: Vec<usize>,
    midpoints: HashMap<(usize, usize), usize>,
    bbox: [Point; 2],
    measure: f64,
    neighbors: Vec<[Option<usize>; 3]>,
}

/// Axis-aligned computational domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Interval(f64, f64),
    Box([f64; 2], [f64; 2]),
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval(..) => 1,
            Domain::Box(..) => 2,
        }
    }
}

#[inline]
fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn build_root_mesh(domain: Domain, resolution: usize) -> Result<SimplicialMesh> {
    if resolution == 0 {
        return Err(Error::Config("mesh resolution must be at least 1".into()));
    }
    let n = resolution;
    match domain {
        Domain::Interval(a, b) => {
            if !(b > a) {
                return Err(Error::Geometry(format!("interval ({a}, {b}) has no length")));
            }
            let vertices: Vec<Point> = (0..=n).map(|i| [a + (b - a) * i as f64 / n as f64, 0.0]).collect();
            let cells: Vec<[usize; 3]> = (0..n).map(|i| [i, i + 1, usize::MAX]).collect();
            Ok(SimplicialMesh::from_roots(1, vertices, cells, [[a, 0.0], [b, 0.0]], b - a))
        }
        Domain::Box(lo, hi) => {
            if !(hi[0] > lo[0] && hi[1] > lo[1]) {
                return Err(Error::Geometry("box domain has zero area".into()));
            }
            let idx = |i: usize, j: usize| j * (n + 1) + i;
            let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
            for j in 0..=n {
                for i in 0..=n {
                    vertices.push([
                        lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64,
                        lo[1] + (hi[1] - lo[1]) * j as f64 / n as f64,
                    ]);
                }
            }
            let mut cells = Vec::with_capacity(2 * n * n);
            for j in 0..n {
                for i in 0..n {
                    let (p00, p10, p01, p11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
                    // Both halves bisect the shared diagonal first.
                    cells.push([p00, p11, p10]);
                    cells.push([p11, p00, p01]);
                }
            }
            let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
            Ok(SimplicialMesh::from_roots(2, vertices, cells, [lo, hi], area))
        }
    }
}

impl SimplicialMesh {
    fn from_roots(dim: usize, vertices: Vec<Point>, cells: Vec<[usize; 3]>, bbox: [Point; 2], measure: f64) -> Self {
        let elements: Vec<Element> = cells
            .iter()
            .enumerate()
            .map(|(k, v)| Element { verts: *v, parent: None, children: None, generation: 0, root: k, enrich_depth: 0 })
            .collect();
        let leaves = (0..elements.len()).collect();
        let mut m = SimplicialMesh { dim, vertices, elements, leaves, midpoints: HashMap::new(), bbox, measure, neighbors: vec![] };
        m.rebuild_neighbors();
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_cells(&self) -> usize {
        self.leaves.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn bbox(&self) -> [Point; 2] {
        self.bbox
    }

    pub fn domain_measure(&self) -> f64 {
        self.measure
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Forest element backing leaf cell `k`.
    pub fn element_of(&self, k: usize) -> usize {
        self.leaves[k]
    }

    pub fn element(&self, k: usize) -> &Element {
        &self.elements[self.leaves[k]]
    }

    pub fn check_cell(&self, k: usize) -> Result<()> {
        if k < self.leaves.len() {
            Ok(())
        } else {
            Err(Error::UnknownCell(k))
        }
    }

    pub fn nverts(&self) -> usize {
        self.dim + 1
    }

    pub fn cell_vertex_ids(&self, k: usize) -> &[usize] {
        &self.elements[self.leaves[k]].verts[..self.dim + 1]
    }

    pub fn element_points(&self, e: usize) -> Vec<Point> {
        self.elements[e].verts[..self.dim + 1].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_points(&self, k: usize) -> Vec<Point> {
        self.element_points(self.leaves[k])
    }

    pub fn cell_measure(&self, k: usize) -> f64 {
        let p = self.cell_points(k);
        if self.dim == 1 {
            (p[1][0] - p[0][0]).abs()
        } else {
            geometry::signed_area(p[0], p[1], p[2]).abs()
        }
    }

    pub fn cell_diameter(&self, k: usize) -> f64 {
        geometry::diameter(&self.cell_points(k))
    }

    pub fn cell_centroid(&self, k: usize) -> Point {
        geometry::centroid(&self.cell_points(k))
    }

    /// Chart centered at the centroid scaled by the diameter.
    pub fn cell_chart(&self, k: usize) -> Chart {
        Chart { center: self.cell_centroid(k), h: self.cell_diameter(k) }
    }

    pub fn generation(&self, k: usize) -> u32 {
        self.element(k).generation
    }

    /// Vertex ids of face `i` of cell `k` (face `i` is opposite vertex `i`).
    pub fn face_vertex_ids(&self, k: usize, i: usize) -> Vec<usize> {
        let v = self.cell_vertex_ids(k);
        if self.dim == 1 {
            vec![v[1 - i]]
        } else {
            vec![v[(i + 1) % 3], v[(i + 2) % 3]]
        }
    }

    pub fn face_points(&self, k: usize, i: usize) -> Vec<Point> {
        self.face_vertex_ids(k, i).iter().map(|&v| self.vertices[v]).collect()
    }

    /// Outward unit normal of face `i` of cell `k`.
    pub fn face_normal(&self, k: usize, i: usize) -> Point {
        let p = self.cell_points(k);
        face_normal_of(&p, i)
    }

    /// Neighbor cell across face `i`, if any.
    pub fn neighbor(&self, k: usize, i: usize) -> Option<usize> {
        self.neighbors[k][i]
    }

    pub fn is_boundary_face(&self, k: usize, i: usize) -> bool {
        self.neighbors[k][i].is_none()
    }

    fn rebuild_neighbors(&mut self) {
        let nf = self.dim + 1;
        let mut map: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for k in 0..self.leaves.len() {
            for i in 0..nf {
                let f = self.face_vertex_ids(k, i);
                let key = if f.len() == 1 { (f[0], f[0]) } else { edge_key(f[0], f[1]) };
                map.entry(key).or_default().push((k, i));
            }
        }
        let mut nb = vec![[None; 3]; self.leaves.len()];
        for list in map.values() {
            if list.len() == 2 {
                nb[list[0].0][list[0].1] = Some(list[1].0);
                nb[list[1].0][list[1].1] = Some(list[0].0);
            }
        }
        self.neighbors = nb;
    }

    /// Leaf index lookup from forest element id.
    pub fn leaf_index(&self) -> HashMap<usize, usize> {
        self.leaves.iter().enumerate().map(|(k, &e)| (e, k)).collect()
    }

    /// Whether element `e` equals or descends from element `anc`.
    pub fn descends_from(&self, mut e: usize, anc: usize) -> bool {
        loop {
            if e == anc {
                return true;
            }
            match self.elements[e].parent {
                Some(p) => e = p,
                None => return false,
            }
        }
    }

    /// Refine every marked cell `times` bisections deep, then restore conformity.
    pub fn refine(&self, marks: &[usize], times: u32) -> SimplicialMesh {
        let depths: Vec<(usize, u32)> = marks.iter().map(|&k| (k, times)).collect();
        self.refine_depths(&depths, false)
    }

    /// Refine each `(cell, depth)`; with `enrich` the cells' enrichment counter
    /// is bumped (used by the adaptive loop to track marked/swept refinement).
    pub fn refine_depths(&self, depths: &[(usize, u32)], enrich: bool) -> SimplicialMesh {
        let mut w = Refiner::new(self);
        let mut target: HashMap<usize, u32> = HashMap::new();
        for &(k, d) in depths {
            let e = self.leaves[k];
            if enrich {
                w.mesh.elements[e].enrich_depth += 1;
            }
            let t = self.elements[e].generation + d;
            let slot = target.entry(e).or_insert(t);
            *slot = (*slot).max(t);
        }
        // Propagate targets to descendants as they are created.
        let mut pending: Vec<(usize, u32)> = target.into_iter().collect();
        pending.sort_unstable();
        while let Some((e, t)) = pending.pop() {
            if w.mesh.elements[e].generation >= t {
                continue;
            }
            if w.mesh.elements[e].children.is_none() {
                w.bisect(e);
            }
            let ch = w.mesh.elements[e].children.expect("bisected element has children");
            pending.push((ch[1], t));
            pending.push((ch[0], t));
        }
        w.finish()
    }

    /// Uniformly bisect every leaf `depth` times without conformity closure.
    /// The result is a (possibly non-conforming) partition in the NVB family.
    pub fn bisect_uniform_unclosed(&self, depth: u32) -> SimplicialMesh {
        let mut w = Refiner::new(self);
        let mut stack: Vec<(usize, u32)> = self.leaves.iter().rev().map(|&e| (e, depth)).collect();
        while let Some((e, d)) = stack.pop() {
            if d == 0 {
                continue;
            }
            w.split(e);
            let ch = w.mesh.elements[e].children.unwrap();
            stack.push((ch[1], d - 1));
            stack.push((ch[0], d - 1));
        }
        w.finish()
    }
}

pub(crate) fn face_normal_of(p: &[Point], i: usize) -> Point {
    if p.len() == 2 {
        let s = (p[1 - i][0] - p[i][0]).signum();
        return [s, 0.0];
    }
    let a = p[(i + 1) % 3];
    let b = p[(i + 2) % 3];
    let e = geometry::sub(b, a);
    let len = geometry::norm(e);
    let mut n = [e[1] / len, -e[0] / len];
    if geometry::dot(n, geometry::sub(p[i], a)) > 0.0 {
        n = [-n[0], -n[1]];
    }
    n
}

/// Mutable refinement workspace.
struct Refiner {
    mesh: SimplicialMesh,
    old_leaves: Vec<usize>,
    edge_cells: HashMap<(usize, usize), Vec<usize>>,
}

impl Refiner {
    fn new(m: &SimplicialMesh) -> Self {
        let mut edge_cells: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        if m.dim == 2 {
            for &e in &m.leaves {
                let v = m.elements[e].verts;
                for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                    edge_cells.entry(edge_key(a, b)).or_default().push(e);
                }
            }
        }
        Refiner { mesh: m.clone(), old_leaves: m.leaves.clone(), edge_cells }
    }

    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let key = edge_key(a, b);
        if let Some(&m) = self.mesh.midpoints.get(&key) {
            return m;
        }
        let p = geometry::midpoint(self.mesh.vertices[a], self.mesh.vertices[b]);
        self.mesh.vertices.push(p);
        let id = self.mesh.vertices.len() - 1;
        self.mesh.midpoints.insert(key, id);
        id
    }

    /// Bisect a leaf without any closure.
    fn split(&mut self, e: usize) {
        let parent = self.mesh.elements[e].clone();
        let [a, b, c] = parent.verts;
        let m = self.midpoint(a, b);
        let kids = if self.mesh.dim == 1 {
            [[a, m, usize::MAX], [m, b, usize::MAX]]
        } else {
            [[c, a, m], [b, c, m]]
        };
        let base = self.mesh.elements.len();
        for v in kids {
            self.mesh.elements.push(Element {
                verts: v,
                parent: Some(e),
                children: None,
                generation: parent.generation + 1,
                root: parent.root,
                enrich_depth: parent.enrich_depth,
            });
        }
        self.mesh.elements[e].children = Some([base, base + 1]);
        if self.mesh.dim == 2 {
            for (x, y) in [(a, b), (b, c), (c, a)] {
                if let Some(list) = self.edge_cells.get_mut(&edge_key(x, y)) {
                    list.retain(|&t| t != e);
                }
            }
            for (i, v) in kids.iter().enumerate() {
                for (x, y) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                    self.edge_cells.entry(edge_key(x, y)).or_default().push(base + i);
                }
            }
        }
    }

    /// Newest-vertex bisection of a leaf with recursive conformity closure.
    fn bisect(&mut self, e: usize) {
        if self.mesh.dim == 1 {
            self.split(e);
            return;
        }
        loop {
            let [a, b, _] = self.mesh.elements[e].verts;
            let key = edge_key(a, b);
            let nb = self.edge_cells.get(&key).and_then(|l| l.iter().copied().find(|&t| t != e));
            match nb {
                None => {
                    self.split(e);
                    return;
                }
                Some(n) => {
                    let nv = self.mesh.elements[n].verts;
                    if edge_key(nv[0], nv[1]) == key {
                        self.split(e);
                        self.split(n);
                        return;
                    }
                    self.bisect(n);
                }
            }
        }
    }

    fn finish(mut self) -> SimplicialMesh {
        let mut leaves = Vec::new();
        for &e in &self.old_leaves {
            collect_leaves(&self.mesh.elements, e, &mut leaves);
        }
        self.mesh.leaves = leaves;
        self.mesh.rebuild_neighbors();
        self.mesh
    }
}

fn collect_leaves(elements: &[Element], e: usize, out: &mut Vec<usize>) {
    match elements[e].children {
        None => out.push(e),
        Some([c0, c1]) => {
            collect_leaves(elements, c0, out);
            collect_leaves(elements, c1, out);
        }
    }
}
