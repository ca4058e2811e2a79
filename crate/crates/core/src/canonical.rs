//! The bilinear Hamiltonian `<phibar|h|psi>` and its canonical equations.
//!
//! With `q_k = i hbar psi_k` and `p_k = phibar_k` treated as independent
//! coordinates, Hamilton's equations `dq_k/dt = dH/dp_k` and
//! `dp_k/dt = -dH/dq_k` must reproduce the right-state and conjugate-row
//! dynamics exactly.

use nalgebra::DVector;

use crate::dynamics::{schrodinger_rhs, ModalCoordinates, StatePair};
use crate::spectral::BiorthogonalSystem;
use crate::{NhMatrix, C64};

/// Default finite-difference step for gradient checks.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalReport {
    pub hamiltonian_value: C64,
    pub modal_value: C64,
    /// Max componentwise gap between the canonical and Schrodinger right-hand sides.
    pub rhs_mismatch: f64,
    /// Max relative gap between analytic and finite-difference partials.
    pub grad_mismatch: f64,
}

/// `sum_jk phibar_j h_jk psi_k`.
pub fn hamiltonian_value(h: &NhMatrix, state: &StatePair) -> C64 {
    let n = h.dim();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            acc += state.phibar[j] * h[(j, k)] * state.psi[k];
        }
    }
    acc
}

/// `sum_j E_j cbar_j c_j`.
pub fn modal_hamiltonian(sys: &BiorthogonalSystem, modal: &ModalCoordinates) -> C64 {
    sys.eigenvalues()
        .iter()
        .zip(modal.cbar.iter().zip(modal.c.iter()))
        .map(|(e, (cb, c))| e * cb * c)
        .sum()
}

/// Analytic partials `(dH/dphibar_k, dH/dq_k)` with `q_k = i hbar psi_k`.
pub fn hamiltonian_gradient(h: &NhMatrix, state: &StatePair) -> (DVector<C64>, DVector<C64>) {
    let n = h.dim();
    let ihbar = C64::new(0.0, state.hbar);
    let d_phibar = DVector::from_fn(n, |k, _| (0..n).map(|j| h[(k, j)] * state.psi[j]).sum::<C64>());
    let d_q = DVector::from_fn(n, |k, _| (0..n).map(|j| state.phibar[j] * h[(j, k)]).sum::<C64>() / ihbar);
    (d_phibar, d_q)
}

/// `(dpsi/dt, dphibar/dt)` read off Hamilton's equations.
pub fn canonical_rhs(h: &NhMatrix, state: &StatePair) -> (DVector<C64>, DVector<C64>) {
    let (d_phibar, d_q) = hamiltonian_gradient(h, state);
    let ihbar = C64::new(0.0, state.hbar);
    (d_phibar / ihbar, -d_q)
}

/// Max componentwise gap between [`canonical_rhs`] and the direct
/// right-hand sides `(-i/hbar) h psi`, `(i/hbar) phibar h`.
pub fn rhs_mismatch(h: &NhMatrix, state: &StatePair) -> f64 {
    let (cp, cf) = canonical_rhs(h, state);
    let (sp, sf) = schrodinger_rhs(h, &state.psi, &state.phibar, state.hbar);
    (cp - sp).camax().max((cf - sf).camax())
}

/// Compares the analytic partials with central differences of `H`, stepping
/// the real and imaginary parts of each coordinate separately.
///
/// Returns the largest `|fd - analytic|` divided by the largest analytic
/// partial magnitude.
pub fn gradient_fd_mismatch(h: &NhMatrix, state: &StatePair, step: f64) -> f64 {
    let (d_phibar, d_q) = hamiltonian_gradient(h, state);
    let n = h.dim();
    let scale = d_phibar.camax().max(d_q.camax()).max(f64::MIN_POSITIVE);
    let ihbar = C64::new(0.0, state.hbar);
    let mut worst = 0.0_f64;
    for dir in [C64::new(step, 0.0), C64::new(0.0, step)] {
        for k in 0..n {
            let mut plus = state.clone();
            let mut minus = state.clone();
            plus.phibar[k] += dir;
            minus.phibar[k] -= dir;
            let fd = (hamiltonian_value(h, &plus) - hamiltonian_value(h, &minus)) / (dir * 2.0);
            worst = worst.max((fd - d_phibar[k]).norm());

            // Step q_k = i hbar psi_k, i.e. psi_k by dir / (i hbar).
            let dpsi = dir / ihbar;
            let mut plus = state.clone();
            let mut minus = state.clone();
            plus.psi[k] += dpsi;
            minus.psi[k] -= dpsi;
            let fd = (hamiltonian_value(h, &plus) - hamiltonian_value(h, &minus)) / (dir * 2.0);
            worst = worst.max((fd - d_q[k]).norm());
        }
    }
    worst / scale
}

/// `i hbar <phibar|psidot> - <phibar|h|psi>`.
pub fn lagrangian_value(h: &NhMatrix, state: &StatePair, psidot: &DVector<C64>) -> C64 {
    let kinetic: C64 = state.phibar.iter().zip(psidot.iter()).map(|(p, v)| p * v).sum();
    C64::new(0.0, state.hbar) * kinetic - hamiltonian_value(h, state)
}

pub fn canonical_report(h: &NhMatrix, sys: &BiorthogonalSystem, state: &StatePair, fd_step: f64) -> CanonicalReport {
    CanonicalReport {
        hamiltonian_value: hamiltonian_value(h, state),
        modal_value: modal_hamiltonian(sys, &ModalCoordinates::from_state(sys, state)),
        rhs_mismatch: rhs_mismatch(h, state),
        grad_mismatch: gradient_fd_mismatch(h, state, fd_step),
    }
}
