//! Thin wrappers over faer for the sparse and dense systems used here.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Mat, Side};

use crate::error::{Error, Result};

/// Sparse matrix in triplet form, compressed on demand.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<Triplet<usize, usize, f64>>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            self.entries.push(Triplet::new(i, j, v));
        }
    }

    pub fn build(self) -> Result<SparseMatrix> {
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(
            self.nrows,
            self.ncols,
            &self.entries,
        )
        .map_err(|e| Error::InvalidArgument(format!("sparse assembly failed: {e:?}")))?;
        Ok(SparseMatrix::from_faer(m))
    }
}

/// Compressed sparse column matrix.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    inner: SparseColMat<usize, f64>,
}

impl SparseMatrix {
    fn from_faer(inner: SparseColMat<usize, f64>) -> Self {
        Self { inner }
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn faer(&self) -> &SparseColMat<usize, f64> {
        &self.inner
    }

    /// Iterates `(row, col, value)` over stored entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let s = self.inner.symbolic();
        let cp = s.col_ptr();
        let ri = s.row_idx();
        let v = self.inner.val();
        (0..self.ncols()).flat_map(move |j| (cp[j]..cp[j + 1]).map(move |k| (ri[k], j, v[k])))
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        let s = self.inner.symbolic();
        let cp = s.col_ptr();
        let ri = s.row_idx();
        let v = self.inner.val();
        for j in 0..self.ncols() {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for k in cp[j]..cp[j + 1] {
                y[ri[k]] += v[k] * xj;
            }
        }
        y
    }

    /// `y = A^T x`.
    pub fn mul_vec_t(&self, x: &[f64]) -> Vec<f64> {
        let s = self.inner.symbolic();
        let cp = s.col_ptr();
        let ri = s.row_idx();
        let v = self.inner.val();
        (0..self.ncols())
            .map(|j| (cp[j]..cp[j + 1]).map(|k| v[k] * x[ri[k]]).sum())
            .collect()
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows(), self.ncols());
        for (i, j, v) in self.entries() {
            m[(i, j)] += v;
        }
        m
    }

    /// Largest entry of `|A - A^T|`.
    pub fn asymmetry(&self) -> f64 {
        let d = self.to_dense();
        let mut m: f64 = 0.0;
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                m = m.max((d[(i, j)] - d[(j, i)]).abs());
            }
        }
        m
    }

    pub fn cholesky(&self) -> Result<SparseCholesky> {
        SparseCholesky::new(self)
    }

    pub fn lu(&self) -> Result<SparseLu> {
        SparseLu::new(self)
    }
}

fn to_col(b: &[f64]) -> Col<f64> {
    Col::from_fn(b.len(), |i| b[i])
}

fn from_col(c: &Col<f64>) -> Vec<f64> {
    (0..c.nrows()).map(|i| c[i]).collect()
}

pub struct SparseCholesky {
    n: usize,
    llt: Option<faer::sparse::linalg::solvers::Llt<usize, f64>>,
}

impl SparseCholesky {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Ok(Self { n, llt: None });
        }
        let llt = a
            .faer()
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Singular(format!("sparse Cholesky failed: {e:?}")))?;
        Ok(Self { n, llt: Some(llt) })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.llt {
            None => Vec::new(),
            Some(l) => from_col(&l.solve(to_col(b))),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

pub struct SparseLu {
    n: usize,
    lu: Option<faer::sparse::linalg::solvers::Lu<usize, f64>>,
}

impl SparseLu {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Ok(Self { n, lu: None });
        }
        let lu = a
            .faer()
            .sp_lu()
            .map_err(|e| Error::Singular(format!("sparse LU failed: {e:?}")))?;
        Ok(Self { n, lu: Some(lu) })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.lu {
            None => Vec::new(),
            Some(l) => from_col(&l.solve(to_col(b))),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// Dense LU with partial pivoting.
pub struct DenseLu {
    lu: faer::linalg::solvers::PartialPivLu<f64>,
    n: usize,
}

impl DenseLu {
    pub fn new(a: &Mat<f64>) -> Result<Self> {
        let n = a.nrows();
        let lu = a.partial_piv_lu();
        // Partial pivoting never fails; detect singularity from the pivots.
        let u = lu.U();
        let mut min: f64 = f64::INFINITY;
        let mut max: f64 = 0.0;
        for i in 0..n {
            min = min.min(u[(i, i)].abs());
            max = max.max(u[(i, i)].abs());
        }
        if n > 0 && !(min > 1e-14 * max) {
            return Err(Error::Singular(format!(
                "dense LU pivot ratio {:.2e}",
                min / max
            )));
        }
        Ok(Self { lu, n })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        if self.n == 0 {
            return Vec::new();
        }
        from_col(&self.lu.solve(to_col(b)))
    }

    pub fn solve_many(&self, b: &Mat<f64>) -> Mat<f64> {
        self.lu.solve(b)
    }
}

/// Dense Cholesky.
pub struct DenseCholesky {
    llt: Option<faer::linalg::solvers::Llt<f64>>,
}

impl DenseCholesky {
    pub fn new(a: &Mat<f64>) -> Result<Self> {
        if a.nrows() == 0 {
            return Ok(Self { llt: None });
        }
        let llt = a
            .llt(Side::Lower)
            .map_err(|e| Error::Singular(format!("dense Cholesky failed: {e:?}")))?;
        Ok(Self { llt: Some(llt) })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.llt {
            None => Vec::new(),
            Some(l) => from_col(&l.solve(to_col(b))),
        }
    }

    pub fn solve_many(&self, b: &Mat<f64>) -> Mat<f64> {
        match &self.llt {
            None => b.clone(),
            Some(l) => l.solve(b),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_max(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `y += s x`.
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

/// Dense `A x`.
pub fn mat_vec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

/// Dense `A^T x`.
pub fn mat_t_vec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)] * x[i]).sum())
        .collect()
}
