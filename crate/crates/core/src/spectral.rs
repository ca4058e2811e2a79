//! Biorthogonal eigensystems of diagonalizable non-Hermitian matrices.
//!
//! Right eigenvectors come from a complex Schur factorization followed by
//! back substitution on the triangular factor. Left eigenvectors are not
//! computed separately: the rows of `A^{-1}` are taken as `b_j^dagger`, so
//! `<b_i|a_j> = delta_ij` holds by construction. The eigen-relation
//! `h^dagger b_j = conj(E_j) b_j` is then checked on its own.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, Schur};

use crate::{Error, NhMatrix, Result, C64};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Eigenvalues with matching right (`A`) and left (`B`) eigenvector columns.
///
/// Systems produced by [`biorthogonal_decompose`] are square and sorted by
/// `(Re E, Im E)`. Systems assembled with [`BiorthogonalSystem::from_parts`]
/// may hold fewer pairs than the ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BiorthogonalSystem {
    eigenvalues: DVector<C64>,
    right: DMatrix<C64>,
    left: DMatrix<C64>,
    cond: f64,
}

impl BiorthogonalSystem {
    pub fn from_parts(eigenvalues: DVector<C64>, right: DMatrix<C64>, left: DMatrix<C64>) -> Result<Self> {
        let m = eigenvalues.len();
        if right.ncols() != m || left.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: right.ncols().min(left.ncols()),
            });
        }
        if right.nrows() != left.nrows() {
            return Err(Error::DimensionMismatch {
                expected: right.nrows(),
                found: left.nrows(),
            });
        }
        let cond = condition_number(&right);
        Ok(Self {
            eigenvalues,
            right,
            left,
            cond,
        })
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.right.nrows()
    }

    /// Number of eigenpairs held.
    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<C64> {
        &self.eigenvalues
    }

    pub fn right(&self) -> &DMatrix<C64> {
        &self.right
    }

    pub fn left(&self) -> &DMatrix<C64> {
        &self.left
    }

    pub fn right_vector(&self, j: usize) -> DVector<C64> {
        self.right.column(j).into_owned()
    }

    pub fn left_vector(&self, j: usize) -> DVector<C64> {
        self.left.column(j).into_owned()
    }

    /// Condition number of the right eigenvector matrix.
    pub fn cond(&self) -> f64 {
        self.cond
    }

    /// Reorders the modes; `order[k]` is the old index placed at `k`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let m = self.modes();
        assert_eq!(order.len(), m, "permutation length");
        let n = self.dim();
        Self {
            eigenvalues: DVector::from_fn(m, |k, _| self.eigenvalues[order[k]]),
            right: DMatrix::from_fn(n, m, |i, k| self.right[(i, order[k])]),
            left: DMatrix::from_fn(n, m, |i, k| self.left[(i, order[k])]),
            cond: self.cond,
        }
    }
}

/// Computes the biorthogonal eigensystem of `h`.
///
/// Fails with [`Error::NotDiagonalizable`] when the smallest-to-largest
/// singular value ratio of the right eigenvector matrix drops below `tol`.
pub fn biorthogonal_decompose(h: &NhMatrix, tol: f64) -> Result<BiorthogonalSystem> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let n = h.dim();
    let (q, t) = Schur::try_new(h.as_matrix().clone(), f64::EPSILON, 0)
        .ok_or(Error::NoConvergence)?
        .unpack();

    let y = triangular_eigenvectors(&t);
    let mut right = q * y;
    for mut col in right.column_iter_mut() {
        gauge_fix(&mut col);
    }
    let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| compare_eigenvalues(values[a], values[b]));
    let eigenvalues = DVector::from_fn(n, |k, _| values[order[k]]);
    let right = DMatrix::from_fn(n, n, |i, k| right[(i, order[k])]);

    let sv = right.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if ratio.is_nan() || ratio < tol {
        return Err(Error::NotDiagonalizable { ratio });
    }
    let inv = right
        .clone()
        .try_inverse()
        .ok_or(Error::NotDiagonalizable { ratio })?;
    let left = inv.adjoint();

    Ok(BiorthogonalSystem {
        eigenvalues,
        right,
        left,
        cond: smax / smin,
    })
}

/// Max-entry magnitude of `B^dagger A - I`.
pub fn biorthonormality_residual(sys: &BiorthogonalSystem) -> f64 {
    let g = sys.left.adjoint() * &sys.right;
    max_identity_defect(&g)
}

/// Max-entry magnitude of `sum_j a_j b_j^dagger - I`.
pub fn completeness_residual(sys: &BiorthogonalSystem) -> f64 {
    let p = &sys.right * sys.left.adjoint();
    max_identity_defect(&p)
}

/// Largest `|h a_j - E_j a_j| / (|h| |a_j|)` over the modes.
pub fn right_eigen_residual(h: &NhMatrix, sys: &BiorthogonalSystem) -> f64 {
    let scale = h.norm().max(f64::MIN_POSITIVE);
    (0..sys.modes())
        .map(|j| {
            let a = sys.right.column(j);
            let r = h.as_matrix() * a - a * sys.eigenvalues[j];
            r.norm() / (scale * a.norm())
        })
        .fold(0.0, f64::max)
}

/// Largest `|h^dagger b_j - conj(E_j) b_j| / (|h| |b_j|)`: the left vectors
/// read as right eigenvectors of the adjoint.
pub fn left_eigen_residual(h: &NhMatrix, sys: &BiorthogonalSystem) -> f64 {
    let scale = h.norm().max(f64::MIN_POSITIVE);
    let hd = h.as_matrix().adjoint();
    (0..sys.modes())
        .map(|j| {
            let b = sys.left.column(j);
            let r = &hd * b - b * sys.eigenvalues[j].conj();
            r.norm() / (scale * b.norm())
        })
        .fold(0.0, f64::max)
}

/// True iff `max |Im E_j| <= tol * max |E_j|`, or `<= tol` for a zero spectrum.
pub fn spectrum_is_real(sys: &BiorthogonalSystem, tol: f64) -> bool {
    let max_im = sys.eigenvalues.iter().map(|e| e.im.abs()).fold(0.0, f64::max);
    let max_abs = sys.eigenvalues.iter().map(|e| e.norm()).fold(0.0, f64::max);
    if max_abs == 0.0 {
        max_im <= tol
    } else {
        max_im <= tol * max_abs
    }
}

fn compare_eigenvalues(a: C64, b: C64) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

fn max_identity_defect(g: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

fn condition_number(m: &DMatrix<C64>) -> f64 {
    if m.ncols() == 0 {
        return 1.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / smin
    }
}

/// Eigenvectors of an upper-triangular matrix, column `k` belonging to `t[k,k]`.
///
/// Near-equal diagonal entries are separated by a floor `smin` in the
/// denominators, as in LAPACK's `trevc`; a Jordan block therefore yields
/// nearly parallel columns, which the singular-value test then rejects.
fn triangular_eigenvectors(t: &DMatrix<C64>) -> DMatrix<C64> {
    let n = t.nrows();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    // The floor stays well above the range where |denom|^2 underflows.
    let smin = (f64::EPSILON * scale).max(1e-150);
    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[(l, k)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < smin {
                denom = C64::new(smin, 0.0);
            }
            y[(j, k)] = -acc / denom;
        }
        let norm = y.column(k).norm();
        if norm > 1e100 {
            let mut col = y.column_mut(k);
            col /= C64::new(norm, 0.0);
        }
    }
    y
}

/// Unit Euclidean norm, first component above 1e-10 made real-positive.
fn gauge_fix<S>(col: &mut nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>)
where
    S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>,
{
    let norm = col.norm();
    if norm == 0.0 {
        return;
    }
    *col /= C64::new(norm, 0.0);
    if let Some(lead) = col.iter().copied().find(|z| z.norm() > 1e-10) {
        let phase = lead.conj() / lead.norm();
        *col *= phase;
    }
}
