//! Two-level Bogoliubov-de Gennes model
//!
//! ```text
//! h = [[ z,       x + i y ],
//!      [ -x + i y, -z     ]]
//! ```
//!
//! with closed-form biorthonormal eigenvectors `a1 = (u, v)`, `a2 = (v*, u*)`,
//! `b1 = (u, -v)`, `b2 = (-v*, u*)`, and adiabatic sweeps of `(x, y, z)`
//! that track the actions `I_j = hbar cbar_j c_j`.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{evolve_rk4_driven, expand_conjugate, expand_state, overlap, StatePair, ZERO_COEFFICIENT};
use crate::spectral::{biorthogonal_decompose, BiorthogonalSystem, DEFAULT_TOL};
use crate::{Error, NhMatrix, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianParams {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl LorentzianParams {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// `z^2 - x^2 - y^2`; the spectrum is `+-sqrt` of this.
    pub fn discriminant(&self) -> f64 {
        self.z * self.z - self.x * self.x - self.y * self.y
    }

    /// Two distinct real eigenvalues: `z^2 > x^2 + y^2`. The boundary is an
    /// exceptional point and counts as outside.
    pub fn is_real_regime(&self) -> bool {
        self.discriminant() > 0.0
    }

    fn outside(&self) -> Error {
        Error::OutsideRealRegime {
            x: self.x,
            y: self.y,
            z: self.z,
        }
    }
}

/// Closed-form `(u, v)` and the eigenvalue `energy` of `a1 = (u, v)`.
///
/// `energy = sgn(z) sqrt(z^2 - x^2 - y^2)`; `a2` carries `-energy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianEigenpair {
    pub u: C64,
    pub v: C64,
    pub energy: f64,
}

impl LorentzianEigenpair {
    pub fn a1(&self) -> DVector<C64> {
        DVector::from_vec(vec![self.u, self.v])
    }

    pub fn a2(&self) -> DVector<C64> {
        DVector::from_vec(vec![self.v.conj(), self.u.conj()])
    }

    pub fn b1(&self) -> DVector<C64> {
        DVector::from_vec(vec![self.u, -self.v])
    }

    pub fn b2(&self) -> DVector<C64> {
        DVector::from_vec(vec![-self.v.conj(), self.u.conj()])
    }

    /// The pair as a two-mode system, mode 1 first.
    pub fn system(&self) -> BiorthogonalSystem {
        let right = DMatrix::from_columns(&[self.a1(), self.a2()]);
        let left = DMatrix::from_columns(&[self.b1(), self.b2()]);
        let e = DVector::from_vec(vec![C64::new(self.energy, 0.0), C64::new(-self.energy, 0.0)]);
        BiorthogonalSystem::from_parts(e, right, left).expect("2x2 parts")
    }
}

pub fn lorentzian_matrix(p: LorentzianParams) -> NhMatrix {
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(p.z, 0.0),
            C64::new(p.x, p.y),
            C64::new(-p.x, p.y),
            C64::new(-p.z, 0.0),
        ],
    );
    NhMatrix::new(m).expect("finite parameters give a finite matrix")
}

/// Evaluates the closed forms for `u` and `v`; needs `z^2 > x^2 + y^2`.
pub fn lorentzian_uv(p: LorentzianParams) -> Result<LorentzianEigenpair> {
    let disc = p.discriminant();
    if disc.is_nan() || disc <= 0.0 || p.z == 0.0 {
        return Err(p.outside());
    }
    let root = disc.sqrt();
    let az = p.z.abs();
    let rho2 = p.x * p.x + p.y * p.y;
    let denom = ((az + root).powi(2) - rho2).sqrt();
    let sign = p.z.signum();
    Ok(LorentzianEigenpair {
        u: C64::new(-sign * (root + az) / denom, 0.0),
        v: C64::new(p.x, -p.y) / denom,
        energy: sign * root,
    })
}

/// Closed-form conjugate row
/// `phibar = |C1|^2 b1^dagger / <b1|psi> + |C2|^2 b2^dagger / <b2|psi>`.
pub fn lorentzian_conjugate(p: LorentzianParams, psi: &DVector<C64>, csq: [f64; 2]) -> Result<DVector<C64>> {
    if psi.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: psi.len(),
        });
    }
    let LorentzianEigenpair { u, v, .. } = lorentzian_uv(p)?;
    let d1 = u.conj() * psi[0] - v.conj() * psi[1];
    let d2 = -v * psi[0] + u * psi[1];
    let mut w = [C64::new(0.0, 0.0); 2];
    for (j, (&q, d)) in csq.iter().zip([d1, d2]).enumerate() {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("modal constants must be nonnegative, got {q}")));
        }
        if q > 0.0 {
            if d.norm() <= ZERO_COEFFICIENT {
                return Err(Error::ZeroModalCoefficient {
                    mode: j,
                    magnitude: d.norm(),
                });
            }
            w[j] = C64::new(q, 0.0) / d;
        }
    }
    Ok(DVector::from_vec(vec![
        w[0] * u.conj() - w[1] * v,
        -w[0] * v.conj() + w[1] * u,
    ]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
}

/// Parameter path `R(t/T)` from `start` to `end` over duration `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPath {
    pub start: LorentzianParams,
    pub end: LorentzianParams,
    pub duration: f64,
    pub interpolation: Interpolation,
    /// Record the actions every this many integration steps.
    pub record_every: usize,
}

impl SweepPath {
    pub fn linear(start: LorentzianParams, end: LorentzianParams, duration: f64) -> Self {
        Self {
            start,
            end,
            duration,
            interpolation: Interpolation::Linear,
            record_every: 1,
        }
    }

    pub fn params_at(&self, t: f64) -> LorentzianParams {
        let s = if self.duration > 0.0 { (t / self.duration).clamp(0.0, 1.0) } else { 1.0 };
        match self.interpolation {
            Interpolation::Linear => LorentzianParams {
                x: self.start.x + s * (self.end.x - self.start.x),
                y: self.start.y + s * (self.end.y - self.start.y),
                z: self.start.z + s * (self.end.z - self.start.z),
            },
        }
    }

    /// Whether the straight segment stays in the real regime. The
    /// discriminant is quadratic in `s`, so endpoints plus the vertex suffice.
    pub fn stays_real(&self) -> bool {
        let d = |s: f64| self.params_at(s * self.duration).discriminant();
        let (d0, d1, dm) = (d(0.0), d(1.0), d(0.5));
        if d0 <= 0.0 || d1 <= 0.0 {
            return false;
        }
        // Quadratic through three points; check its vertex when interior.
        let a = 2.0 * (d0 + d1 - 2.0 * dm);
        let b = d1 - d0 - a;
        if a > 0.0 {
            let s = -b / (2.0 * a);
            if s > 0.0 && s < 1.0 {
                return d(s) > 0.0;
            }
        }
        true
    }
}

/// Actions `I_j(t) = hbar cbar_j c_j` in the instantaneous eigenbasis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActionRecord {
    pub times: Vec<f64>,
    /// `actions[k][j]` is mode `j` at `times[k]`.
    pub actions: Vec<Vec<C64>>,
    /// `|I_j(t) - I_j(0)| / |I_j(0)|`, or `|I_j(t)|` for modes starting empty.
    pub deviations: Vec<Vec<f64>>,
    pub overlaps: Vec<C64>,
}

impl ActionRecord {
    pub fn max_deviation(&self) -> f64 {
        self.deviations
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(0.0, f64::max)
    }

    pub fn max_overlap_drift(&self) -> f64 {
        let Some(first) = self.overlaps.first() else {
            return 0.0;
        };
        self.overlaps.iter().map(|o| (o - first).norm()).fold(0.0, f64::max)
    }
}

/// Starting pair for a sweep: `psi = sum_j sqrt(csq_j) a_j` in the closed-form
/// basis at `p`, with `phibar` built from the same constants.
pub fn sweep_initial_state(p: LorentzianParams, csq: [f64; 2], hbar: f64) -> Result<StatePair> {
    let pair = lorentzian_uv(p)?;
    let psi = pair.a1() * C64::new(csq[0].max(0.0).sqrt(), 0.0) + pair.a2() * C64::new(csq[1].max(0.0).sqrt(), 0.0);
    let phibar = lorentzian_conjugate(p, &psi, csq)?;
    StatePair::new(psi, phibar, hbar)
}

/// Integrates the coupled pair under `h(R(t/T))` and records the actions.
///
/// Mode labels start from the closed-form `(a1, a2)` at `t = 0` and are then
/// carried by continuity: each new decomposition is matched to the previous
/// one by maximal eigenvector overlap. With `enforce_regime`, leaving the
/// real regime is an error.
pub fn sweep_adiabatic(path: &SweepPath, state0: &StatePair, dt: f64, enforce_regime: bool) -> Result<ActionRecord> {
    if !(path.duration > 0.0 && path.duration.is_finite()) {
        return Err(Error::InvalidParameter(format!("duration must be positive, got {}", path.duration)));
    }
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let steps = (path.duration / dt).round().max(1.0) as usize;
    let dt = path.duration / steps as f64;
    let record_every = path.record_every.max(1);

    let start = path.params_at(0.0);
    if enforce_regime && !start.is_real_regime() {
        return Err(start.outside());
    }
    let mut basis = initial_basis(start)?;
    let hbar = state0.hbar;
    let mut record = ActionRecord::default();
    let mut initial: Option<Vec<C64>> = None;
    let mut step = 0usize;

    let hamiltonian = |t: f64| {
        let p = path.params_at(t);
        if enforce_regime && !p.is_real_regime() {
            return Err(p.outside());
        }
        Ok(lorentzian_matrix(p))
    };

    evolve_rk4_driven(hamiltonian, state0, dt, steps, |state| {
        let is_record = step.is_multiple_of(record_every) || step == steps;
        step += 1;
        if !is_record {
            return Ok(());
        }
        let p = path.params_at(state.t);
        let fresh = biorthogonal_decompose(&lorentzian_matrix(p), DEFAULT_TOL)?;
        basis = match_modes(&basis, &fresh);
        let c = expand_state(&basis, &state.psi);
        let cbar = expand_conjugate(&basis, &state.phibar);
        let actions: Vec<C64> = c.iter().zip(cbar.iter()).map(|(a, b)| a * b * hbar).collect();
        let reference = initial.get_or_insert_with(|| actions.clone());
        let deviations = actions
            .iter()
            .zip(reference.iter())
            .map(|(a, r)| {
                if r.norm() > ZERO_COEFFICIENT {
                    (a - r).norm() / r.norm()
                } else {
                    a.norm()
                }
            })
            .collect();
        record.times.push(state.t);
        record.actions.push(actions);
        record.deviations.push(deviations);
        record.overlaps.push(overlap(state));
        Ok(())
    })?;
    Ok(record)
}

fn initial_basis(p: LorentzianParams) -> Result<BiorthogonalSystem> {
    let sys = biorthogonal_decompose(&lorentzian_matrix(p), DEFAULT_TOL)?;
    match lorentzian_uv(p) {
        Ok(pair) => Ok(match_modes(&pair.system(), &sys)),
        // On the boundary or outside: larger real part first.
        Err(_) => Ok(sys.permuted(&[1, 0])),
    }
}

/// Reorders `fresh` so that column `k` best overlaps column `k` of `previous`.
fn match_modes(previous: &BiorthogonalSystem, fresh: &BiorthogonalSystem) -> BiorthogonalSystem {
    let m = fresh.modes();
    let mut taken = vec![false; m];
    let mut order = Vec::with_capacity(m);
    for k in 0..m {
        let a = previous.right().column(k);
        let mut best = (usize::MAX, -1.0);
        for (j, used) in taken.iter().enumerate() {
            if *used {
                continue;
            }
            let b = fresh.right().column(j);
            let score = a.dotc(&b).norm() / (a.norm() * b.norm());
            if score > best.1 {
                best = (j, score);
            }
        }
        taken[best.0] = true;
        order.push(best.0);
    }
    fresh.permuted(&order)
}
