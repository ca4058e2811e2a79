use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

/// Linear generator of the dynamics `i hbar d/dt psi = h psi`.
///
/// `apply_left` acts on the components of a row vector: it returns the
/// components of `phibar h`, i.e. `h^T phibar`.
pub trait Generator {
    fn dim(&self) -> usize;
    fn apply(&self, psi: &DVector<C64>) -> DVector<C64>;
    fn apply_left(&self, phibar: &DVector<C64>) -> DVector<C64>;
    /// Upper bound on the spectral norm, used by the step-size guard.
    fn norm_bound(&self) -> f64;
}

/// Dense square complex matrix standing in for a non-Hermitian generator.
#[derive(Debug, Clone, PartialEq)]
pub struct NhMatrix(DMatrix<C64>);

impl NhMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(Error::InvalidMatrix("dimension must be at least 1".into()));
        }
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("entries must be finite".into()));
        }
        Ok(NhMatrix(m))
    }

    /// Builds a matrix from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if im.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: im.len(),
            });
        }
        for row in re.iter().chain(im) {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| C64::new(re[i][j], im[i][j])))
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> NhMatrix {
        NhMatrix(self.0.adjoint())
    }

    /// `sqrt(|h|_1 |h|_inf)`, an upper bound on the spectral norm.
    pub fn norm(&self) -> f64 {
        let n = self.dim();
        let col = (0..n)
            .map(|j| self.0.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let row = (0..n)
            .map(|i| self.0.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        (col * row).sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| (self.0[(i, j)] - self.0[(j, i)].conj()).norm() <= tol))
    }

    /// Row-major real parts.
    pub fn re_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)].re).collect())
            .collect()
    }

    /// Row-major imaginary parts.
    pub fn im_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)].im).collect())
            .collect()
    }
}

impl Generator for NhMatrix {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, psi: &DVector<C64>) -> DVector<C64> {
        &self.0 * psi
    }

    fn apply_left(&self, phibar: &DVector<C64>) -> DVector<C64> {
        self.0.tr_mul(phibar)
    }

    fn norm_bound(&self) -> f64 {
        self.norm()
    }
}

impl std::ops::Index<(usize, usize)> for NhMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}
