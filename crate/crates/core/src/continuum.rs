//! One-dimensional periodic lattice for the complex-potential Schrodinger
//! equation `i hbar dpsi/dt = -(hbar^2/2m) psi'' + V psi`.
//!
//! The conjugate field evolves under the transposed operator, and the
//! charge `Q = sum_i phibar_i psi_i dx` is conserved for any complex `V`.
//! Derivatives use second-order central differences throughout.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{evolve_rk4_recorded, initial_pair, StatePair};
use crate::matrix::Generator;
use crate::spectral::{biorthogonal_decompose, DEFAULT_TOL};
use crate::{Error, NhMatrix, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumConfig {
    pub length: f64,
    pub points: usize,
    pub mass: f64,
    pub hbar: f64,
}

impl ContinuumConfig {
    pub fn new(length: f64, points: usize, mass: f64, hbar: f64) -> Result<Self> {
        let cfg = Self {
            length,
            points,
            mass,
            hbar,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 8 {
            return Err(Error::InvalidParameter(format!("need at least 8 grid points, got {}", self.points)));
        }
        for (name, v) in [("length", self.length), ("mass", self.mass), ("hbar", self.hbar)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.points).map(|i| i as f64 * self.dx()).collect()
    }

    /// `hbar^2 / (2 m dx^2)`, the off-diagonal magnitude of the kinetic stencil.
    pub fn hopping(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass * self.dx() * self.dx())
    }

    /// Signed distance from `x0` to `x` on the ring, in `[-L/2, L/2)`.
    fn ring_distance(&self, x: f64, x0: f64) -> f64 {
        let l = self.length;
        (x - x0 + 0.5 * l).rem_euclid(l) - 0.5 * l
    }
}

/// Samples of the right field, the conjugate field and the potential at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    pub psi: DVector<C64>,
    pub phibar: DVector<C64>,
    pub potential: DVector<C64>,
    pub t: f64,
}

impl LatticeField {
    pub fn state(&self, hbar: f64) -> Result<StatePair> {
        let mut s = StatePair::new(self.psi.clone(), self.phibar.clone(), hbar)?;
        s.t = self.t;
        Ok(s)
    }

    /// `(psi, phibar) -> (e^{i alpha} psi, e^{-i alpha} phibar)`.
    pub fn phase_rotated(&self, alpha: f64) -> Self {
        let up = C64::from_polar(1.0, alpha);
        let down = C64::from_polar(1.0, -alpha);
        Self {
            psi: &self.psi * up,
            phibar: &self.phibar * down,
            potential: self.potential.clone(),
            t: self.t,
        }
    }
}

/// Matrix-free form of [`discretize`].
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOperator {
    config: ContinuumConfig,
    potential: DVector<C64>,
}

impl LatticeOperator {
    pub fn new(config: ContinuumConfig, potential: DVector<C64>) -> Result<Self> {
        config.validate()?;
        if potential.len() != config.points {
            return Err(Error::DimensionMismatch {
                expected: config.points,
                found: potential.len(),
            });
        }
        if potential.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter("potential must be finite".into()));
        }
        Ok(Self { config, potential })
    }

    pub fn config(&self) -> &ContinuumConfig {
        &self.config
    }

    pub fn potential(&self) -> &DVector<C64> {
        &self.potential
    }

    fn stencil(&self, f: &DVector<C64>) -> DVector<C64> {
        let n = self.config.points;
        let hop = self.config.hopping();
        DVector::from_fn(n, |i, _| {
            let left = f[(i + n - 1) % n];
            let right = f[(i + 1) % n];
            (f[i] * 2.0 - left - right) * hop + self.potential[i] * f[i]
        })
    }
}

impl Generator for LatticeOperator {
    fn dim(&self) -> usize {
        self.config.points
    }

    fn apply(&self, psi: &DVector<C64>) -> DVector<C64> {
        self.stencil(psi)
    }

    // The operator is symmetric (not Hermitian), so h^T acts like h.
    fn apply_left(&self, phibar: &DVector<C64>) -> DVector<C64> {
        self.stencil(phibar)
    }

    fn norm_bound(&self) -> f64 {
        let hop = self.config.hopping();
        self.potential
            .iter()
            .map(|v| (v + 2.0 * hop).norm() + 2.0 * hop)
            .fold(0.0, f64::max)
    }
}

/// Dense lattice generator: periodic second difference times
/// `-hbar^2/(2m)`, plus `diag(V)`.
pub fn discretize(config: &ContinuumConfig, potential: &DVector<C64>) -> Result<NhMatrix> {
    let op = LatticeOperator::new(*config, potential.clone())?;
    let n = config.points;
    let hop = config.hopping();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(2.0 * hop, 0.0) + op.potential[i];
        m[(i, (i + 1) % n)] -= C64::new(hop, 0.0);
        m[(i, (i + n - 1) % n)] -= C64::new(hop, 0.0);
    }
    NhMatrix::new(m)
}

/// `sum_i phibar_i psi_i dx`.
pub fn lattice_charge(field: &LatticeField, dx: f64) -> C64 {
    field.phibar.iter().zip(field.psi.iter()).map(|(p, q)| p * q).sum::<C64>() * dx
}

/// `j_i = (i hbar / 2m) (phibar grad psi - psi grad phibar)` with central
/// differences.
///
/// Along the dynamics the density obeys `d(phibar psi)/dt = div j`; the
/// textbook probability current is `-j`.
pub fn lattice_current(field: &LatticeField, config: &ContinuumConfig) -> DVector<C64> {
    let n = config.points;
    let inv2dx = 1.0 / (2.0 * config.dx());
    let pref = C64::new(0.0, config.hbar / (2.0 * config.mass));
    DVector::from_fn(n, |i, _| {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        let dpsi = (field.psi[ip] - field.psi[im]) * inv2dx;
        let dphi = (field.phibar[ip] - field.phibar[im]) * inv2dx;
        pref * (field.phibar[i] * dpsi - field.psi[i] * dphi)
    })
}

/// `sum_i phibar_i (h psi)_i dx`.
pub fn hamiltonian_density_sum(field: &LatticeField, config: &ContinuumConfig) -> Result<C64> {
    let op = LatticeOperator::new(*config, field.potential.clone())?;
    let hpsi = op.apply(&field.psi);
    Ok(field.phibar.iter().zip(hpsi.iter()).map(|(p, q)| p * q).sum::<C64>() * config.dx())
}

/// Largest `|d(phibar psi)/dt - div j|` over interior snapshots and all
/// sites, with central differences in both time and space.
pub fn continuity_residual(snapshots: &[LatticeField], config: &ContinuumConfig) -> Result<f64> {
    if snapshots.len() < 3 {
        return Err(Error::InsufficientSnapshots { found: snapshots.len() });
    }
    let tau = snapshots[1].t - snapshots[0].t;
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidParameter("snapshots must be increasing in time".into()));
    }
    for w in snapshots.windows(2) {
        if ((w[1].t - w[0].t) - tau).abs() > 1e-9 * tau.max(w[1].t.abs()) {
            return Err(Error::InvalidParameter("snapshots must be equally spaced".into()));
        }
    }
    let mut worst = 0.0_f64;
    for k in 1..snapshots.len() - 1 {
        worst = worst.max(residual_at(&snapshots[k - 1], &snapshots[k], &snapshots[k + 1], config, tau));
    }
    Ok(worst)
}

/// Continuity defect at the middle snapshot of three spaced `tau` apart.
pub fn residual_at(prev: &LatticeField, cur: &LatticeField, next: &LatticeField, config: &ContinuumConfig, tau: f64) -> f64 {
    let n = config.points;
    let j = lattice_current(cur, config);
    let inv2dx = 1.0 / (2.0 * config.dx());
    (0..n)
        .map(|i| {
            let rho_next = next.phibar[i] * next.psi[i];
            let rho_prev = prev.phibar[i] * prev.psi[i];
            let drho = (rho_next - rho_prev) / (2.0 * tau);
            let div = (j[(i + 1) % n] - j[(i + n - 1) % n]) * inv2dx;
            (drho - div).norm()
        })
        .fold(0.0, f64::max)
}

/// `V(x) = (re + i im) exp(-d^2 / (2 w^2))`, `d` the ring distance to `center`.
pub fn complex_gaussian_potential(config: &ContinuumConfig, amplitude: C64, center: f64, width: f64) -> DVector<C64> {
    DVector::from_iterator(
        config.points,
        config.grid().into_iter().map(|x| {
            let d = config.ring_distance(x, center);
            amplitude * (-d * d / (2.0 * width * width)).exp()
        }),
    )
}

/// Gaussian packet `exp(-d^2/(4 sigma^2) + i k0 x)`, normalized so that
/// `sum |psi|^2 dx = 1`.
pub fn gaussian_packet(config: &ContinuumConfig, center: f64, width: f64, k0: f64) -> DVector<C64> {
    let v = DVector::from_iterator(
        config.points,
        config.grid().into_iter().map(|x| {
            let d = config.ring_distance(x, center);
            C64::from_polar((-d * d / (4.0 * width * width)).exp(), k0 * x)
        }),
    );
    normalized(v, config.dx())
}

/// `e^{i k x}` with `k = 2 pi mode / L`, normalized like [`gaussian_packet`].
pub fn plane_wave(config: &ContinuumConfig, mode: i64) -> DVector<C64> {
    let k = 2.0 * PI * mode as f64 / config.length;
    let v = DVector::from_iterator(config.points, config.grid().into_iter().map(|x| C64::from_polar(1.0, k * x)));
    normalized(v, config.dx())
}

fn normalized(v: DVector<C64>, dx: f64) -> DVector<C64> {
    let norm = (v.norm_squared() * dx).sqrt();
    if norm > 0.0 {
        v / C64::new(norm, 0.0)
    } else {
        v
    }
}

/// Initial lattice field with `phibar` built from the spectral decomposition
/// of the discretized generator, using `|C_j|^2 = |c_j(0)|^2`.
pub fn initial_field(config: &ContinuumConfig, potential: &DVector<C64>, psi: DVector<C64>) -> Result<LatticeField> {
    let h = discretize(config, potential)?;
    let sys = biorthogonal_decompose(&h, DEFAULT_TOL)?;
    let pair = initial_pair(&sys, psi, None, config.hbar)?;
    Ok(LatticeField {
        psi: pair.psi,
        phibar: pair.phibar,
        potential: potential.clone(),
        t: 0.0,
    })
}

/// Integrates the lattice pair with RK4, keeping every `snapshot_every`-th
/// step (the initial field included).
pub fn evolve_lattice(
    config: &ContinuumConfig,
    field0: &LatticeField,
    dt: f64,
    steps: usize,
    snapshot_every: usize,
) -> Result<Vec<LatticeField>> {
    if snapshot_every == 0 {
        return Err(Error::InvalidParameter("snapshot_every must be positive".into()));
    }
    let op = LatticeOperator::new(*config, field0.potential.clone())?;
    let state0 = field0.state(config.hbar)?;
    let mut states = Vec::new();
    evolve_rk4_recorded(&op, &state0, dt, steps, snapshot_every, &mut states)?;
    Ok(states
        .into_iter()
        .map(|s| LatticeField {
            psi: s.psi,
            phibar: s.phibar,
            potential: field0.potential.clone(),
            t: s.t,
        })
        .collect())
}
