//! Block-diagonal SPD operators, compressed sparse rows, conjugate gradients.

use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Systems up to this size are solved by dense Cholesky.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Debug)]
pub struct BlockDiagonal {
    blocks: Vec<DMatrix<f64>>,
    factors: Vec<Cholesky<f64, Dyn>>,
    offsets: Vec<usize>,
}

impl BlockDiagonal {
    pub fn new(blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        let mut factors = Vec::with_capacity(blocks.len());
        let mut offsets = vec![0];
        for (i, b) in blocks.iter().enumerate() {
            let asym = (b - b.transpose()).amax();
            if asym > 1e-13 * b.amax().max(1.0) {
                return Err(Error::NotSpd { block: i });
            }
            factors.push(Cholesky::new(b.clone()).ok_or(Error::NotSpd { block: i })?);
            offsets.push(offsets[i] + b.nrows());
        }
        Ok(BlockDiagonal { blocks, factors, offsets })
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn block(&self, k: usize) -> &DMatrix<f64> {
        &self.blocks[k]
    }

    pub fn range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn solve_block(&self, k: usize, rhs: &DVector<f64>) -> DVector<f64> {
        self.factors[k].solve(rhs)
    }

    pub fn solve_block_mat(&self, k: usize, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.factors[k].solve(rhs)
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; rhs.len()];
        for k in 0..self.blocks.len() {
            let r = self.range(k);
            let v = DVector::from_column_slice(&rhs[r.clone()]);
            out[r].copy_from_slice(self.solve_block(k, &v).as_slice());
        }
        out
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for k in 0..self.blocks.len() {
            let r = self.range(k);
            let v = DVector::from_column_slice(&x[r.clone()]);
            out[r].copy_from_slice((&self.blocks[k] * v).as_slice());
        }
        out
    }
}

pub fn block_solve(g: &BlockDiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != g.dim() {
        return Err(Error::Dimension(format!("rhs length {} vs operator {}", rhs.len(), g.dim())));
    }
    Ok(g.solve(rhs))
}

/// Compressed sparse rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

/// A symmetric matrix in CSR form (both triangles stored).
pub type SparseSymmetric = SparseMatrix;

/// Accumulates `(row, col, value)` contributions; duplicates are summed in a
/// fixed order so that assembly is deterministic.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.nrows && c < self.ncols);
        self.entries.push((r, c, v));
    }

    pub fn build(mut self) -> SparseMatrix {
        self.entries.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0; self.nrows + 1];
        let mut indices = Vec::new();
        let mut data: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.nrows {
            indptr[r + 1] += indptr[r];
        }
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, indptr, indices, data }
    }
}

impl SparseMatrix {
    pub fn identity(n: usize) -> Self {
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            t.push(i, i, 1.0);
        }
        t.build()
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut t = TripletBuilder::new(m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    t.push(r, c, m[(r, c)]);
                }
            }
        }
        t.build()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |i| (self.indices[i], self.data[i]))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn transpose_matvec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                out[c] += v * y[r];
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|r| self.row(r).filter(|(c, _)| *c == r).map(|(_, v)| v).sum()).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `S = Bᵀ G⁻¹ B` for a block-diagonal SPD `G` whose blocks align with row ranges of `B`.
pub fn normal_matrix(b: &SparseMatrix, g: &BlockDiagonal) -> Result<SparseSymmetric> {
    if b.nrows != g.dim() {
        return Err(Error::Dimension(format!("B has {} rows, G has dimension {}", b.nrows, g.dim())));
    }
    let mut t = TripletBuilder::new(b.ncols, b.ncols);
    for k in 0..g.num_blocks() {
        let rows = g.range(k);
        let mut cols: Vec<usize> = rows.clone().flat_map(|r| b.row(r).map(|(c, _)| c)).collect();
        cols.sort_unstable();
        cols.dedup();
        if cols.is_empty() {
            continue;
        }
        let mut local = DMatrix::zeros(rows.len(), cols.len());
        for (i, r) in rows.clone().enumerate() {
            for (c, v) in b.row(r) {
                let j = cols.binary_search(&c).unwrap();
                local[(i, j)] += v;
            }
        }
        let ginv_b = g.solve_block_mat(k, &local);
        let s = local.transpose() * ginv_b;
        for (i, &ci) in cols.iter().enumerate() {
            for (j, &cj) in cols.iter().enumerate() {
                // symmetrize the local product to keep S exactly symmetric
                t.push(ci, cj, 0.5 * (s[(i, j)] + s[(j, i)]));
            }
        }
    }
    Ok(t.build())
}

#[derive(Clone, Copy, Debug)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients; stops at relative residual `tol`.
pub fn cg_solve(s: &SparseSymmetric, rhs: &[f64], tol: f64, maxit: usize) -> Result<(Vec<f64>, SolveStats)> {
    let n = rhs.len();
    let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, SolveStats { iterations: 0, residual: 0.0 }));
    }
    let dinv: Vec<f64> = s.diagonal().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for it in 1..=maxit {
        let sp = s.matvec(&p);
        let alpha = rz / p.iter().zip(&sp).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * sp[i];
        }
        let res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        if res <= tol {
            return Ok((x, SolveStats { iterations: it, residual: res }));
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
    Err(Error::NoConvergence { iterations: maxit, residual: res })
}

/// Dense Cholesky for small systems, conjugate gradients otherwise.
pub fn solve_spd(s: &SparseSymmetric, rhs: &[f64], tol: f64, maxit: usize) -> Result<Vec<f64>> {
    if s.nrows <= DENSE_LIMIT {
        let chol = Cholesky::new(s.to_dense()).ok_or(Error::NotSpd { block: 0 })?;
        return Ok(chol.solve(&DVector::from_column_slice(rhs)).as_slice().to_vec());
    }
    cg_solve(s, rhs, tol, maxit).map(|r| r.0)
}
