//! Schema and physics-precondition checks that run without executing.

use std::path::Path;

use biham::continuum::{ContinuumConfig, LatticeOperator};
use biham::dynamics::MAX_STEP_RATIO;
use biham::lorentzian::{lorentzian_matrix, LorentzianParams, SweepPath};
use biham::matrix::Generator;
use biham::NhMatrix;

use crate::config::{
    Command, ContinuumScenario, DecomposeConfig, EvolveConfig, MatrixSource, Method, Params, ScenarioConfig, SweepConfig, VectorSpec,
    VerifyConfig,
};
use crate::error::{CliError, Diagnostic};
use crate::inputs;

/// Points sampled along a sweep path for the step-size check.
const PATH_SAMPLES: usize = 64;

/// Parses `text` and validates it. Parse failures come back as a single
/// schema diagnostic.
pub fn validate_text(command: Command, text: &str, base_dir: &Path, seed: u64) -> Vec<Diagnostic> {
    match Params::parse(command, text) {
        Ok(params) => validate(&ScenarioConfig {
            command,
            params,
            out_dir: base_dir.to_path_buf(),
            base_dir: base_dir.to_path_buf(),
            seed,
        }),
        Err(e) => vec![Diagnostic::schema("config", e.to_string())],
    }
}

/// Every violation found in `config`; empty when it is runnable.
pub fn validate(config: &ScenarioConfig) -> Vec<Diagnostic> {
    let mut c = Checker::default();
    match &config.params {
        Params::Decompose(p) => decompose(&mut c, p, config),
        Params::Evolve(p) => evolve(&mut c, p, config),
        Params::Verify(p) => verify(&mut c, p, config),
        Params::Sweep(p) => sweep(&mut c, p),
        Params::Continuum(p) => continuum(&mut c, p),
    }
    if let Some(name) = config.params.output() {
        let path = Path::new(name);
        if name.is_empty() || path.is_absolute() || path.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
            c.push(Diagnostic::schema("output", "must be a relative file name inside the output directory"));
        }
    }
    c.diags
}

#[derive(Default)]
struct Checker {
    diags: Vec<Diagnostic>,
}

impl Checker {
    fn push(&mut self, d: Diagnostic) {
        self.diags.push(d);
    }

    fn positive(&mut self, field: &str, v: f64) -> bool {
        let ok = v > 0.0 && v.is_finite();
        if !ok {
            self.push(Diagnostic::schema(field, format!("must be positive and finite, got {v}")));
        }
        ok
    }

    fn at_least_one(&mut self, field: &str, v: usize) {
        if v == 0 {
            self.push(Diagnostic::schema(field, "must be at least 1"));
        }
    }

    fn constants(&mut self, csq: &[f64], n: Option<usize>) {
        if let Some(n) = n {
            if csq.len() != n {
                self.push(Diagnostic::schema("csq", format!("expected {n} values, got {}", csq.len())));
            }
        }
        if csq.iter().any(|q| !(*q >= 0.0 && q.is_finite())) {
            self.push(Diagnostic::schema("csq", "values must be nonnegative and finite"));
        }
    }

    fn matrix(&mut self, source: &MatrixSource, config: &ScenarioConfig) -> Option<NhMatrix> {
        match inputs::load_matrix(source, &config.base_dir, &mut inputs::rng(config.seed)) {
            Ok(h) => Some(h),
            Err(CliError::Config(ds)) => {
                self.diags.extend(ds);
                None
            }
            Err(e) => {
                self.push(Diagnostic {
                    code: "io",
                    field: "matrix_file".into(),
                    message: e.to_string(),
                });
                None
            }
        }
    }

    fn state(&mut self, psi0: Option<&VectorSpec>, n: Option<usize>) {
        if let (Some(v), Some(n)) = (psi0, n) {
            if let Err(d) = inputs::initial_state(Some(v), n, &mut inputs::rng(0)) {
                self.push(d);
            }
        }
    }

    fn step_ratio(&mut self, field: &str, dt: f64, norm: f64, hbar: f64) {
        let ratio = dt * norm / hbar;
        if ratio > MAX_STEP_RATIO {
            self.push(Diagnostic::precondition(
                field,
                format!("dt * |h| / hbar = {ratio:.3e} exceeds the RK4 stability limit {MAX_STEP_RATIO}"),
            ));
        }
    }
}

/// Step count and adjusted step for integrating up to `t_final`.
pub fn step_grid(t_final: f64, dt: f64) -> (usize, f64) {
    let steps = (t_final / dt).round().max(1.0) as usize;
    (steps, t_final / steps as f64)
}

fn tolerance(c: &mut Checker, tol: f64) {
    if !(tol > 0.0 && tol < 1.0) {
        c.push(Diagnostic::schema("tol", format!("must lie in (0, 1), got {tol}")));
    }
}

fn decompose(c: &mut Checker, p: &DecomposeConfig, config: &ScenarioConfig) {
    tolerance(c, p.tol);
    c.matrix(&p.source, config);
}

fn evolve(c: &mut Checker, p: &EvolveConfig, config: &ScenarioConfig) {
    tolerance(c, p.tol);
    let hbar_ok = c.positive("hbar", p.hbar);
    let dt_ok = c.positive("dt", p.dt);
    let t_ok = c.positive("t_final", p.t_final);
    c.at_least_one("record_every", p.record_every);
    let h = c.matrix(&p.source, config);
    let n = h.as_ref().map(NhMatrix::dim);
    c.state(p.psi0.as_ref(), n);
    if let Some(csq) = &p.csq {
        c.constants(csq, n);
    }
    if let (Some(h), Method::Rk4, true, true, true) = (&h, p.method, hbar_ok, dt_ok, t_ok) {
        let (_, dt) = step_grid(p.t_final, p.dt);
        c.step_ratio("dt", dt, h.norm(), p.hbar);
    }
}

fn verify(c: &mut Checker, p: &VerifyConfig, config: &ScenarioConfig) {
    tolerance(c, p.tol);
    c.positive("hbar", p.hbar);
    c.positive("fd_step", p.fd_step);
    let h = c.matrix(&p.source, config);
    let n = h.as_ref().map(NhMatrix::dim);
    c.state(p.psi0.as_ref(), n);
    if let Some(csq) = &p.csq {
        c.constants(csq, n);
    }
}

pub fn sweep_path(p: &SweepConfig) -> SweepPath {
    let start = LorentzianParams::new(p.path.x0, p.path.y0, p.path.z0);
    let end = LorentzianParams::new(p.path.x1, p.path.y1, p.path.z1);
    let mut path = SweepPath::linear(start, end, p.duration);
    path.record_every = p.record_every;
    path
}

fn sweep(c: &mut Checker, p: &SweepConfig) {
    let t_ok = c.positive("T", p.duration);
    let dt_ok = c.positive("dt", p.dt);
    let hbar_ok = c.positive("hbar", p.hbar);
    c.at_least_one("record_every", p.record_every);
    c.constants(&p.csq, None);
    let coords = [p.path.x0, p.path.y0, p.path.z0, p.path.x1, p.path.y1, p.path.z1];
    if coords.iter().any(|v| !v.is_finite()) {
        c.push(Diagnostic::schema("path", "coordinates must be finite"));
        return;
    }
    let path = sweep_path(p);
    let start = path.start;
    if !(start.discriminant() > 0.0 && start.z != 0.0) {
        c.push(Diagnostic::regime(
            "path.start",
            format!(
                "(x, y, z) = ({}, {}, {}) needs z^2 > x^2 + y^2 and z != 0 to build the initial modes",
                start.x, start.y, start.z
            ),
        ));
    }
    if p.enforce_regime {
        let end = path.end;
        if !end.is_real_regime() {
            c.push(Diagnostic::regime(
                "path.end",
                format!("(x, y, z) = ({}, {}, {}) has z^2 <= x^2 + y^2", end.x, end.y, end.z),
            ));
        } else if start.is_real_regime() && t_ok && !path.stays_real() {
            c.push(Diagnostic::regime("path", "segment leaves the real-spectrum regime between its endpoints"));
        }
    }
    if t_ok && dt_ok && hbar_ok {
        let (_, dt) = step_grid(p.duration, p.dt);
        let norm = (0..=PATH_SAMPLES)
            .map(|k| lorentzian_matrix(path.params_at(p.duration * k as f64 / PATH_SAMPLES as f64)).norm())
            .fold(0.0, f64::max);
        c.step_ratio("dt", dt, norm, p.hbar);
    }
}

fn continuum(c: &mut Checker, p: &ContinuumScenario) {
    let dt_ok = c.positive("dt", p.dt);
    let t_ok = c.positive("t_final", p.t_final);
    c.at_least_one("snapshot_every", p.snapshot_every);
    let lattice = match ContinuumConfig::new(p.length, p.points, p.m, p.hbar) {
        Ok(l) => l,
        Err(e) => {
            c.push(Diagnostic::schema("L/N/m/hbar", e.to_string()));
            return;
        }
    };
    let potential = inputs::potential(&p.potential, &lattice).map_err(|d| c.push(d)).ok();
    if let Err(d) = inputs::lattice_state(&p.psi0, &lattice) {
        c.push(d);
    }
    if dt_ok && t_ok && p.snapshot_every > 0 {
        let (steps, dt) = step_grid(p.t_final, p.dt);
        if steps / p.snapshot_every < 2 {
            c.push(Diagnostic::precondition(
                "snapshot_every",
                format!("{steps} steps give fewer than 3 snapshots for the continuity check"),
            ));
        }
        if let Some(v) = potential {
            if let Ok(op) = LatticeOperator::new(lattice, v) {
                c.step_ratio("dt", dt, op.norm_bound(), p.hbar);
            }
        }
    }
}
