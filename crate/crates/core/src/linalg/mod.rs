//! Dense and sparse matrix kernels, the seeded random source, spectral
//! radius estimation, and the closed-form regularized least-squares solver.
//! Everything downstream (layer construction, state evolution, readout
//! training) is built from these pieces.

mod dense;
mod rng;
mod solve;
mod sparse;
mod spectral;

pub use dense::DenseMatrix;
pub use rng::Rng;
pub use solve::{solve_regularized_ls, solve_regularized_ls_qr, solver_invocations};
pub use sparse::{sparse_uniform, SparseMatrix};
pub use spectral::{default_max_iter, spectral_radius, MatVec, DEFAULT_TOL};

use crate::error::{Error, Result};

/// Square weight matrix in whichever representation its constructor chose.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl Matrix {
    pub fn rows(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.rows(),
            Matrix::Sparse(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.cols(),
            Matrix::Sparse(m) => m.cols(),
        }
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        match self {
            Matrix::Dense(m) => Matrix::Dense(m.scale(factor)),
            Matrix::Sparse(m) => Matrix::Sparse(m.scale(factor)),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(m) => m.clone(),
            Matrix::Sparse(m) => m.to_dense(),
        }
    }
}

impl From<DenseMatrix> for Matrix {
    fn from(m: DenseMatrix) -> Self {
        Matrix::Dense(m)
    }
}

impl From<SparseMatrix> for Matrix {
    fn from(m: SparseMatrix) -> Self {
        Matrix::Sparse(m)
    }
}

impl MatVec for DenseMatrix {
    fn rows(&self) -> usize {
        self.rows()
    }
    fn cols(&self) -> usize {
        self.cols()
    }
    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        DenseMatrix::matvec(self, x, y)
    }
}

impl MatVec for SparseMatrix {
    fn rows(&self) -> usize {
        self.rows()
    }
    fn cols(&self) -> usize {
        self.cols()
    }
    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        SparseMatrix::matvec(self, x, y)
    }
}

impl MatVec for Matrix {
    fn rows(&self) -> usize {
        Matrix::rows(self)
    }
    fn cols(&self) -> usize {
        Matrix::cols(self)
    }
    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Matrix::Dense(m) => m.matvec(x, y),
            Matrix::Sparse(m) => m.matvec(x, y),
        }
    }
}

/// Multiplies `m` by `target / spectral_radius(m)` so the result's spectral
/// radius lands on `target` (within the estimator's accuracy). A matrix with
/// zero spectral radius cannot be rescaled.
pub fn rescale_spectral_radius(m: Matrix, target: f64) -> Result<Matrix> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "target spectral radius must be positive and finite, got {target}"
        )));
    }
    let rho = spectral_radius(&m, DEFAULT_TOL, default_max_iter(m.rows()))?;
    if rho <= 1e-300 {
        return Err(Error::CannotRescale);
    }
    Ok(m.scale(target / rho))
}
