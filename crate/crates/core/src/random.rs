//! Seeded generators for test and scenario inputs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::{NhMatrix, C64};

/// A generator built as `S diag(E) S^{-1}`, with its construction data.
#[derive(Debug, Clone)]
pub struct ConstructedMatrix {
    pub h: NhMatrix,
    /// Eigenvalues sorted by `(Re, Im)`.
    pub eigenvalues: Vec<C64>,
    pub basis: DMatrix<C64>,
    pub basis_cond: f64,
}

pub fn complex_uniform<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> C64 {
    C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// Random diagonalizable matrix with pairwise eigenvalue gaps of at least
/// `min_gap` and eigenvector condition number at most `max_cond`.
/// Eigenvalues are drawn from the square `[-scale, scale]^2`.
pub fn diagonalizable<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    scale: f64,
    min_gap: f64,
    max_cond: f64,
) -> ConstructedMatrix {
    let eigenvalues = loop {
        let mut e: Vec<C64> = (0..n).map(|_| complex_uniform(rng, scale)).collect();
        if min_pairwise_gap(&e) >= min_gap {
            e.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            break e;
        }
    };
    let (basis, basis_cond) = loop {
        let s = DMatrix::from_fn(n, n, |_, _| complex_uniform(rng, 1.0));
        let sv = s.clone().svd(false, false).singular_values;
        let cond = sv.max() / sv.min();
        if cond.is_finite() && cond <= max_cond {
            break (s, cond);
        }
    };
    let inv = basis.clone().try_inverse().expect("conditioned basis is invertible");
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(&eigenvalues));
    let h = NhMatrix::new(&basis * d * inv).expect("finite construction");
    ConstructedMatrix {
        h,
        eigenvalues,
        basis,
        basis_cond,
    }
}

/// Same as [`diagonalizable`], rescaled so that `h.norm() <= max_norm`.
pub fn diagonalizable_bounded<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_norm: f64,
    min_gap: f64,
    max_cond: f64,
) -> ConstructedMatrix {
    let mut m = diagonalizable(rng, n, 1.0, min_gap, max_cond);
    let norm = m.h.norm();
    if norm > max_norm {
        let f = max_norm / norm;
        m.h = NhMatrix::new(m.h.as_matrix() * C64::new(f, 0.0)).expect("finite");
        for e in &mut m.eigenvalues {
            *e *= f;
        }
    }
    m
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> NhMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| complex_uniform(rng, scale));
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    NhMatrix::new(h).expect("finite")
}

/// Unit-norm random state.
pub fn state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<C64> {
    let v = DVector::from_fn(n, |_, _| complex_uniform(rng, 1.0));
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

fn min_pairwise_gap(e: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..e.len() {
        for j in (i + 1)..e.len() {
            gap = gap.min((e[i] - e[j]).norm());
        }
    }
    gap
}
