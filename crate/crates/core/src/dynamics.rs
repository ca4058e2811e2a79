//! Coupled evolution of the right state and its conjugate row.
//!
//! The right state obeys `i hbar d/dt psi = h psi` and the conjugate row
//! obeys `-i hbar d/dt phibar = phibar h`. Along any such pair the overlap
//! `<phibar|psi>` is constant, even when `h` depends on time.

use nalgebra::DVector;

use crate::matrix::Generator;
use crate::spectral::BiorthogonalSystem;
use crate::{Error, NhMatrix, Result, C64};

/// Modal coefficients below this magnitude count as absent.
pub const ZERO_COEFFICIENT: f64 = 1e-12;

/// Largest allowed `dt * |h| / hbar` for the fixed-step integrator.
pub const MAX_STEP_RATIO: f64 = 0.5;

/// Right state `psi` and conjugate row `phibar` at time `t`.
///
/// In canonical terms `q_k = i hbar psi_k` and `p_k = phibar_k`, so the
/// phase space has dimension `2n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub psi: DVector<C64>,
    pub phibar: DVector<C64>,
    pub t: f64,
    pub hbar: f64,
}

impl StatePair {
    pub fn new(psi: DVector<C64>, phibar: DVector<C64>, hbar: f64) -> Result<Self> {
        if psi.len() != phibar.len() {
            return Err(Error::DimensionMismatch {
                expected: psi.len(),
                found: phibar.len(),
            });
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { psi, phibar, t: 0.0, hbar })
    }

    /// Pair whose conjugate row is the complex conjugate of `psi`.
    pub fn hermitian(psi: DVector<C64>, hbar: f64) -> Result<Self> {
        let phibar = psi.map(|z| z.conj());
        Self::new(psi, phibar, hbar)
    }

    pub fn dim(&self) -> usize {
        self.psi.len()
    }

    /// Canonical coordinates `q_k = i hbar psi_k`.
    pub fn coordinates(&self) -> DVector<C64> {
        &self.psi * C64::new(0.0, self.hbar)
    }

    /// Canonical momenta `p_k = phibar_k`.
    pub fn momenta(&self) -> &DVector<C64> {
        &self.phibar
    }

    fn is_finite(&self) -> bool {
        self.psi
            .iter()
            .chain(self.phibar.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Modal coefficients `c_j = <b_j|psi>` and `cbar_j = <phibar|a_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalCoordinates {
    pub c: DVector<C64>,
    pub cbar: DVector<C64>,
}

impl ModalCoordinates {
    pub fn from_state(sys: &BiorthogonalSystem, state: &StatePair) -> Self {
        Self {
            c: expand_state(sys, &state.psi),
            cbar: expand_conjugate(sys, &state.phibar),
        }
    }

    /// Builds `cbar_j = csq_j / c_j`; modes with `csq_j = 0` get `cbar_j = 0`.
    pub fn from_constants(c: DVector<C64>, csq: &[f64]) -> Result<Self> {
        if csq.len() != c.len() {
            return Err(Error::DimensionMismatch {
                expected: c.len(),
                found: csq.len(),
            });
        }
        let mut cbar = DVector::zeros(c.len());
        for (j, (&cj, &q)) in c.iter().zip(csq).enumerate() {
            check_constant(q)?;
            if q > 0.0 {
                if cj.norm() <= ZERO_COEFFICIENT {
                    return Err(Error::ZeroModalCoefficient {
                        mode: j,
                        magnitude: cj.norm(),
                    });
                }
                cbar[j] = C64::new(q, 0.0) / cj;
            }
        }
        Ok(Self { c, cbar })
    }

    /// The products `cbar_j c_j`, i.e. `|C_j|^2` along exact evolution.
    pub fn constants(&self) -> DVector<C64> {
        self.c.component_mul(&self.cbar)
    }
}

/// `c_j = <b_j|psi>`.
pub fn expand_state(sys: &BiorthogonalSystem, psi: &DVector<C64>) -> DVector<C64> {
    sys.left().ad_mul(psi)
}

/// `cbar_j = sum_k phibar_k (a_j)_k`.
pub fn expand_conjugate(sys: &BiorthogonalSystem, phibar: &DVector<C64>) -> DVector<C64> {
    sys.right().tr_mul(phibar)
}

/// `sum_j c_j a_j`.
pub fn reconstruct_state(sys: &BiorthogonalSystem, c: &DVector<C64>) -> DVector<C64> {
    sys.right() * c
}

/// Components of the row `sum_j cbar_j b_j^dagger`.
pub fn reconstruct_conjugate(sys: &BiorthogonalSystem, cbar: &DVector<C64>) -> DVector<C64> {
    sys.left().map(|z| z.conj()) * cbar
}

/// Default modal constants `|c_j|^2`, with absent modes set to zero.
pub fn default_constants(c: &DVector<C64>) -> Vec<f64> {
    c.iter()
        .map(|z| if z.norm() > ZERO_COEFFICIENT { z.norm_sqr() } else { 0.0 })
        .collect()
}

/// Conjugate row `sum_j (csq_j / <b_j|psi>) b_j^dagger`.
pub fn conjugate_field(sys: &BiorthogonalSystem, psi: &DVector<C64>, csq: &[f64]) -> Result<DVector<C64>> {
    if psi.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: psi.len(),
        });
    }
    let modal = ModalCoordinates::from_constants(expand_state(sys, psi), csq)?;
    Ok(reconstruct_conjugate(sys, &modal.cbar))
}

/// Pair `(psi, phibar)` with `phibar` from [`conjugate_field`]; `csq`
/// defaults to [`default_constants`].
pub fn initial_pair(
    sys: &BiorthogonalSystem,
    psi: DVector<C64>,
    csq: Option<&[f64]>,
    hbar: f64,
) -> Result<StatePair> {
    let phibar = match csq {
        Some(q) => conjugate_field(sys, &psi, q)?,
        None => {
            let q = default_constants(&expand_state(sys, &psi));
            conjugate_field(sys, &psi, &q)?
        }
    };
    StatePair::new(psi, phibar, hbar)
}

/// Propagates in the eigenbasis: `c_j -> c_j e^{-i E_j t/hbar}` and
/// `cbar_j -> cbar_j e^{+i E_j t/hbar}`.
pub fn evolve_exact(sys: &BiorthogonalSystem, state0: &StatePair, t: f64) -> StatePair {
    let modal = ModalCoordinates::from_state(sys, state0);
    let hbar = state0.hbar;
    let forward = sys.eigenvalues().map(|e| (C64::new(0.0, -t / hbar) * e).exp());
    let c = modal.c.component_mul(&forward);
    let backward = sys.eigenvalues().map(|e| (C64::new(0.0, t / hbar) * e).exp());
    let cbar = modal.cbar.component_mul(&backward);
    StatePair {
        psi: reconstruct_state(sys, &c),
        phibar: reconstruct_conjugate(sys, &cbar),
        t: state0.t + t,
        hbar,
    }
}

/// Time derivatives `(-i/hbar) h psi` and `(i/hbar) phibar h`.
pub fn schrodinger_rhs<G: Generator + ?Sized>(h: &G, psi: &DVector<C64>, phibar: &DVector<C64>, hbar: f64) -> (DVector<C64>, DVector<C64>) {
    let minus_i = C64::new(0.0, -1.0 / hbar);
    let plus_i = C64::new(0.0, 1.0 / hbar);
    (h.apply(psi) * minus_i, h.apply_left(phibar) * plus_i)
}

fn check_step<G: Generator + ?Sized>(h: &G, dt: f64, hbar: f64) -> Result<()> {
    let ratio = dt * h.norm_bound() / hbar;
    if ratio > MAX_STEP_RATIO {
        return Err(Error::StepTooLarge { ratio });
    }
    Ok(())
}

/// One classical RK4 step with `h` sampled at the start, midpoint and end.
fn rk4_step<G: Generator + ?Sized>(h0: &G, hmid: &G, h1: &G, state: &mut StatePair, dt: f64) {
    let hbar = state.hbar;
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let (k1p, k1f) = schrodinger_rhs(h0, &state.psi, &state.phibar, hbar);
    let (k2p, k2f) = schrodinger_rhs(hmid, &(&state.psi + &k1p * half), &(&state.phibar + &k1f * half), hbar);
    let (k3p, k3f) = schrodinger_rhs(hmid, &(&state.psi + &k2p * half), &(&state.phibar + &k2f * half), hbar);
    let (k4p, k4f) = schrodinger_rhs(h1, &(&state.psi + &k3p * full), &(&state.phibar + &k3f * full), hbar);
    let w = C64::new(dt / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    state.psi += (k1p + (k2p + k3p) * two + k4p) * w;
    state.phibar += (k1f + (k2f + k3f) * two + k4f) * w;
    state.t += dt;
}

/// Fixed-step RK4 integration of the coupled pair under a constant generator.
pub fn evolve_rk4<G: Generator + ?Sized>(h: &G, state0: &StatePair, dt: f64, steps: usize) -> Result<StatePair> {
    let mut out = Vec::new();
    evolve_rk4_recorded(h, state0, dt, steps, 0, &mut out)
}

/// As [`evolve_rk4`], pushing a copy of the state every `record_every`
/// steps (including the initial state) when `record_every > 0`.
pub fn evolve_rk4_recorded<G: Generator + ?Sized>(
    h: &G,
    state0: &StatePair,
    dt: f64,
    steps: usize,
    record_every: usize,
    out: &mut Vec<StatePair>,
) -> Result<StatePair> {
    validate_step(dt, steps)?;
    check_dim(h.dim(), state0)?;
    check_step(h, dt, state0.hbar)?;
    let mut state = state0.clone();
    if record_every > 0 {
        out.push(state.clone());
    }
    for step in 1..=steps {
        rk4_step(h, h, h, &mut state, dt);
        // Keep t exact on the grid rather than accumulating dt.
        state.t = state0.t + step as f64 * dt;
        if !state.is_finite() {
            return Err(Error::NonFinite { t: state.t });
        }
        if record_every > 0 && step % record_every == 0 {
            out.push(state.clone());
        }
    }
    Ok(state)
}

/// Fixed-step RK4 under a time-dependent generator `h(t)`; `observe` is
/// called with the initial state and after every step.
pub fn evolve_rk4_driven<F, O>(hamiltonian: F, state0: &StatePair, dt: f64, steps: usize, mut observe: O) -> Result<StatePair>
where
    F: Fn(f64) -> Result<NhMatrix>,
    O: FnMut(&StatePair) -> Result<()>,
{
    validate_step(dt, steps)?;
    let mut state = state0.clone();
    observe(&state)?;
    let mut h0 = hamiltonian(state.t)?;
    check_dim(h0.dim(), state0)?;
    for step in 1..=steps {
        let t = state0.t + (step - 1) as f64 * dt;
        let hmid = hamiltonian(t + 0.5 * dt)?;
        let h1 = hamiltonian(t + dt)?;
        for g in [&h0, &hmid, &h1] {
            check_step(g, dt, state.hbar)?;
        }
        rk4_step(&h0, &hmid, &h1, &mut state, dt);
        state.t = state0.t + step as f64 * dt;
        if !state.is_finite() {
            return Err(Error::NonFinite { t: state.t });
        }
        observe(&state)?;
        h0 = h1;
    }
    Ok(state)
}

/// `<phibar|psi> = sum_k phibar_k psi_k`.
pub fn overlap(state: &StatePair) -> C64 {
    state.phibar.iter().zip(state.psi.iter()).map(|(p, q)| p * q).sum()
}

/// `<psi|psi>`.
pub fn right_norm(state: &StatePair) -> f64 {
    state.psi.norm_squared()
}

fn validate_step(dt: f64, steps: usize) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be positive".into()));
    }
    Ok(())
}

fn check_dim(n: usize, state: &StatePair) -> Result<()> {
    if state.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: state.dim(),
        });
    }
    Ok(())
}

fn check_constant(q: f64) -> Result<()> {
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("modal constants must be nonnegative, got {q}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{biorthogonal_decompose, DEFAULT_TOL};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn vec2(a: C64, b: C64) -> DVector<C64> {
        DVector::from_vec(vec![a, b])
    }

    fn triangular() -> (NhMatrix, BiorthogonalSystem) {
        let h = NhMatrix::from_parts(&[vec![1.0, 1.0], vec![0.0, 2.0]], &[vec![0.0; 2], vec![0.0; 2]]).unwrap();
        let sys = biorthogonal_decompose(&h, DEFAULT_TOL).unwrap();
        (h, sys)
    }

    #[test]
    fn expansion_of_eigenvectors() {
        let (_, sys) = triangular();
        let c1 = expand_state(&sys, &sys.right_vector(0));
        assert!((c1[0] - c(1.0, 0.0)).norm() < 1e-14 && c1[1].norm() < 1e-14);
        let psi = sys.right_vector(0) + sys.right_vector(1) * c(2.0, 0.0);
        let c2 = expand_state(&sys, &psi);
        assert!((c2[0] - c(1.0, 0.0)).norm() < 1e-14 && (c2[1] - c(2.0, 0.0)).norm() < 1e-14);
        assert!((reconstruct_state(&sys, &c2) - psi).norm() < 1e-14);
    }

    #[test]
    fn conjugate_of_single_mode() {
        let (_, sys) = triangular();
        let phibar = conjugate_field(&sys, &sys.right_vector(0), &[1.0, 0.0]).unwrap();
        let b1 = sys.left_vector(0).map(|z| z.conj());
        assert!((phibar - &b1).norm() < 1e-14);

        let psi = sys.right_vector(0) * c(2.0, 0.0);
        let phibar = conjugate_field(&sys, &psi, &[1.0, 0.0]).unwrap();
        assert!((phibar - b1 * c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn conjugate_pairs_with_modes() {
        let (_, sys) = triangular();
        let psi = vec2(c(0.3, -0.2), c(1.1, 0.4));
        let csq = [0.7, 1.3];
        let phibar = conjugate_field(&sys, &psi, &csq).unwrap();
        let cj = expand_state(&sys, &psi);
        for j in 0..2 {
            let prod: C64 = phibar.dot(&sys.right_vector(j)) * cj[j];
            assert!((prod - c(csq[j], 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn conjugate_rejects_missing_mode() {
        let (_, sys) = triangular();
        let err = conjugate_field(&sys, &sys.right_vector(1), &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::ZeroModalCoefficient { mode: 0, .. }), "{err:?}");
    }

    #[test]
    fn conjugate_rejects_negative_constant() {
        let (_, sys) = triangular();
        assert!(conjugate_field(&sys, &sys.right_vector(0), &[-1.0, 0.0]).is_err());
    }

    #[test]
    fn exact_evolution_at_zero_is_identity() {
        let (_, sys) = triangular();
        let s0 = initial_pair(&sys, vec2(c(0.5, 0.1), c(-0.2, 0.7)), None, 1.0).unwrap();
        let s = evolve_exact(&sys, &s0, 0.0);
        assert!((s.psi - &s0.psi).norm() < 1e-14);
        assert!((s.phibar - &s0.phibar).norm() < 1e-14);
    }

    #[test]
    fn phase_flip_for_diagonal_generator() {
        let h = NhMatrix::from_diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let sys = biorthogonal_decompose(&h, DEFAULT_TOL).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s0 = StatePair::hermitian(vec2(c(r, 0.0), c(r, 0.0)), 1.0).unwrap();
        let s = evolve_exact(&sys, &s0, PI);
        assert!((&s.psi + &s0.psi).norm() < 1e-14);
        assert!((overlap(&s) - c(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(s.t, PI);
    }

    #[test]
    fn overlap_examples() {
        let (_, sys) = triangular();
        let s = StatePair::new(sys.right_vector(0), sys.left_vector(1).map(|z| z.conj()), 1.0).unwrap();
        assert!(overlap(&s).norm() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s = StatePair::hermitian(vec2(c(r, 0.0), c(0.0, r)), 1.0).unwrap();
        assert!((overlap(&s) - c(1.0, 0.0)).norm() < 1e-15);
        let s = StatePair::hermitian(vec2(c(1.0, 0.0), c(0.0, 0.0)), 1.0).unwrap();
        assert_eq!(right_norm(&s), 1.0);
    }

    #[test]
    fn rk4_guard_and_validation() {
        let h = NhMatrix::from_diagonal(&[c(10.0, 0.0), c(-10.0, 0.0)]).unwrap();
        let s0 = StatePair::hermitian(vec2(c(1.0, 0.0), c(0.0, 0.0)), 1.0).unwrap();
        assert!(matches!(evolve_rk4(&h, &s0, 0.1, 1), Err(Error::StepTooLarge { .. })));
        assert!(evolve_rk4(&h, &s0, 0.05, 1).is_ok());
        assert!(evolve_rk4(&h, &s0, -0.01, 1).is_err());
        assert!(evolve_rk4(&h, &s0, 0.01, 0).is_err());
    }

    #[test]
    fn rk4_reports_overflow() {
        // Im E = 1 grows psi like e^t; 800 time units overflow f64.
        let h = NhMatrix::from_diagonal(&[c(0.0, 1.0), c(0.0, -1.0)]).unwrap();
        let s0 = StatePair::hermitian(vec2(c(1.0, 0.0), c(1.0, 0.0)), 1.0).unwrap();
        let err = evolve_rk4(&h, &s0, 0.5, 2000).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }), "{err:?}");
    }

    #[test]
    fn rk4_scalar_decay_matches_exponential() {
        let h = NhMatrix::from_diagonal(&[c(0.0, -0.5)]).unwrap();
        let s0 = StatePair::hermitian(DVector::from_vec(vec![c(1.0, 0.0)]), 1.0).unwrap();
        let s = evolve_rk4(&h, &s0, 1e-2, 100).unwrap();
        assert!((s.psi[0].re - (-0.5f64).exp()).abs() < 1e-10);
        assert!((s.phibar[0].re - 0.5f64.exp()).abs() < 1e-10);
        assert!((overlap(&s) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn recorded_samples() {
        let h = NhMatrix::from_diagonal(&[c(1.0, 0.0)]).unwrap();
        let s0 = StatePair::hermitian(DVector::from_vec(vec![c(1.0, 0.0)]), 1.0).unwrap();
        let mut out = Vec::new();
        evolve_rk4_recorded(&h, &s0, 0.1, 10, 5, &mut out).unwrap();
        let times: Vec<f64> = out.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn canonical_coordinates() {
        let s = StatePair::new(vec2(c(1.0, 0.0), c(0.0, 2.0)), vec2(c(3.0, 0.0), c(0.0, 0.0)), 2.0).unwrap();
        assert_eq!(s.coordinates(), vec2(c(0.0, 2.0), c(-4.0, 0.0)));
        assert_eq!(s.momenta()[0], c(3.0, 0.0));
        assert!(StatePair::new(vec2(c(1.0, 0.0), c(0.0, 0.0)), DVector::zeros(3), 1.0).is_err());
        assert!(StatePair::new(DVector::zeros(2), DVector::zeros(2), 0.0).is_err());
    }
}
