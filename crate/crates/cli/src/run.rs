//! Command execution.

use std::path::PathBuf;

use biham::canonical::canonical_report;
use biham::continuum::{continuity_residual, evolve_lattice, initial_field, lattice_charge, residual_at, ContinuumConfig, LatticeField};
use biham::dynamics::{evolve_exact, evolve_rk4_recorded, initial_pair, overlap, right_norm, StatePair};
use biham::lorentzian::{sweep_adiabatic, sweep_initial_state};
use biham::spectral::{
    biorthogonal_decompose, biorthonormality_residual, completeness_residual, left_eigen_residual, right_eigen_residual,
    spectrum_is_real, BiorthogonalSystem,
};
use biham::NhMatrix;
use log::{debug, info};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{ContinuumScenario, DecomposeConfig, EvolveConfig, Method, Params, ScenarioConfig, SweepConfig, VerifyConfig};
use crate::error::{CliError, Diagnostic};
use crate::inputs;
use crate::output::{write_json, Csv};
use crate::validate::{step_grid, sweep_path, validate};

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub command: &'static str,
    pub output: PathBuf,
    /// CSV data rows, or 1 for JSON reports.
    pub records: usize,
}

/// Validates, executes and writes the artifact for one scenario.
pub fn run(config: &ScenarioConfig) -> Result<RunSummary, CliError> {
    let diags = validate(config);
    if !diags.is_empty() {
        return Err(CliError::Config(diags));
    }
    let output = config.output_path();
    info!("{} -> {}", config.command.name(), output.display());
    let records = match &config.params {
        Params::Decompose(p) => {
            let report = decompose(p, config)?;
            write_json(&output, &report)?;
            1
        }
        Params::Evolve(p) => {
            let csv = evolve(p, config)?;
            csv.write(&output)?;
            csv.rows()
        }
        Params::Verify(p) => {
            let report = verify(p, config)?;
            write_json(&output, &report)?;
            1
        }
        Params::Sweep(p) => {
            let csv = sweep(p)?;
            csv.write(&output)?;
            csv.rows()
        }
        Params::Continuum(p) => {
            let csv = continuum(p)?;
            csv.write(&output)?;
            csv.rows()
        }
    };
    Ok(RunSummary {
        command: config.command.name(),
        output,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecomposeReport {
    pub n: usize,
    pub eigenvalues_re: Vec<f64>,
    pub eigenvalues_im: Vec<f64>,
    /// Matrix rows; eigenvectors are the columns.
    pub right_re: Vec<Vec<f64>>,
    pub right_im: Vec<Vec<f64>>,
    pub left_re: Vec<Vec<f64>>,
    pub left_im: Vec<Vec<f64>>,
    pub biorthonormality_residual: f64,
    pub completeness_residual: f64,
    pub right_eigen_residual: f64,
    pub left_eigen_residual: f64,
    pub condition_number: f64,
    pub real_spectrum: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub hbar: f64,
    pub hamiltonian_value_re: f64,
    pub hamiltonian_value_im: f64,
    pub modal_value_re: f64,
    pub modal_value_im: f64,
    pub rhs_mismatch: f64,
    pub grad_mismatch: f64,
}

fn rows(m: &DMatrix<biham::C64>, part: fn(&biham::C64) -> f64) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| part(&m[(i, j)])).collect()).collect()
}

fn decompose_matrix(h: &NhMatrix, tol: f64) -> Result<BiorthogonalSystem, CliError> {
    let sys = biorthogonal_decompose(h, tol)?;
    debug!("decomposed n = {} with cond = {:.3e}", h.dim(), sys.cond());
    Ok(sys)
}

fn decompose(p: &DecomposeConfig, config: &ScenarioConfig) -> Result<DecomposeReport, CliError> {
    let h = inputs::load_matrix(&p.source, &config.base_dir, &mut inputs::rng(config.seed))?;
    let sys = decompose_matrix(&h, p.tol)?;
    Ok(DecomposeReport {
        n: h.dim(),
        eigenvalues_re: sys.eigenvalues().iter().map(|e| e.re).collect(),
        eigenvalues_im: sys.eigenvalues().iter().map(|e| e.im).collect(),
        right_re: rows(sys.right(), |z| z.re),
        right_im: rows(sys.right(), |z| z.im),
        left_re: rows(sys.left(), |z| z.re),
        left_im: rows(sys.left(), |z| z.im),
        biorthonormality_residual: biorthonormality_residual(&sys),
        completeness_residual: completeness_residual(&sys),
        right_eigen_residual: right_eigen_residual(&h, &sys),
        left_eigen_residual: left_eigen_residual(&h, &sys),
        condition_number: sys.cond(),
        real_spectrum: spectrum_is_real(&sys, p.tol),
    })
}

/// Matrix, decomposition and initial pair shared by `evolve` and `verify`.
fn prepare(
    source: &crate::config::MatrixSource,
    psi0: Option<&crate::config::VectorSpec>,
    csq: Option<&[f64]>,
    hbar: f64,
    tol: f64,
    config: &ScenarioConfig,
) -> Result<(NhMatrix, BiorthogonalSystem, StatePair), CliError> {
    let mut rng = inputs::rng(config.seed);
    let h = inputs::load_matrix(source, &config.base_dir, &mut rng)?;
    let psi = inputs::initial_state(psi0, h.dim(), &mut rng).map_err(|d| CliError::Config(vec![d]))?;
    let sys = decompose_matrix(&h, tol)?;
    let state = initial_pair(&sys, psi, csq, hbar)?;
    Ok((h, sys, state))
}

fn evolve(p: &EvolveConfig, config: &ScenarioConfig) -> Result<Csv, CliError> {
    let (h, sys, state0) = prepare(&p.source, p.psi0.as_ref(), p.csq.as_deref(), p.hbar, p.tol, config)?;
    let n = h.dim();
    let mut header = vec!["t".to_string()];
    for name in ["psi", "phibar"] {
        for k in 1..=n {
            header.push(format!("{name}{k}_re"));
            header.push(format!("{name}{k}_im"));
        }
    }
    header.extend(["overlap_re", "overlap_im", "right_norm"].map(String::from));
    let mut csv = Csv::new(&header);

    let (steps, dt) = step_grid(p.t_final, p.dt);
    let every = p.record_every;
    let mut states = match p.method {
        Method::Exact => (0..=steps)
            .filter(|s| s % every == 0)
            .map(|s| evolve_exact(&sys, &state0, s as f64 * dt))
            .collect(),
        Method::Rk4 => {
            let mut out = Vec::new();
            evolve_rk4_recorded(&h, &state0, dt, steps, every, &mut out)?;
            out
        }
    };
    if steps % every != 0 {
        let last = match p.method {
            Method::Exact => evolve_exact(&sys, &state0, p.t_final),
            Method::Rk4 => biham::dynamics::evolve_rk4(&h, &state0, dt, steps)?,
        };
        states.push(last);
    }
    for s in &states {
        let mut row = vec![Some(s.t)];
        for v in [&s.psi, &s.phibar] {
            for z in v.iter() {
                row.push(Some(z.re));
                row.push(Some(z.im));
            }
        }
        let o = overlap(s);
        row.extend([Some(o.re), Some(o.im), Some(right_norm(s))]);
        csv.row(&row);
    }
    Ok(csv)
}

fn verify(p: &VerifyConfig, config: &ScenarioConfig) -> Result<VerifyReport, CliError> {
    let (h, sys, state) = prepare(&p.source, p.psi0.as_ref(), p.csq.as_deref(), p.hbar, p.tol, config)?;
    let r = canonical_report(&h, &sys, &state, p.fd_step);
    Ok(VerifyReport {
        n: h.dim(),
        hbar: p.hbar,
        hamiltonian_value_re: r.hamiltonian_value.re,
        hamiltonian_value_im: r.hamiltonian_value.im,
        modal_value_re: r.modal_value.re,
        modal_value_im: r.modal_value.im,
        rhs_mismatch: r.rhs_mismatch,
        grad_mismatch: r.grad_mismatch,
    })
}

fn sweep(p: &SweepConfig) -> Result<Csv, CliError> {
    let path = sweep_path(p);
    let state0 = sweep_initial_state(path.start, p.csq, p.hbar)?;
    let record = sweep_adiabatic(&path, &state0, p.dt, p.enforce_regime)?;
    info!("sweep max deviation {:.6e}", record.max_deviation());
    let mut csv = Csv::new(&["t", "I_1", "I_2", "deviation_1", "deviation_2", "overlap_re", "overlap_im"]);
    for k in 0..record.times.len() {
        let a = &record.actions[k];
        let d = &record.deviations[k];
        let o = record.overlaps[k];
        csv.row(&[Some(record.times[k]), Some(a[0].re), Some(a[1].re), Some(d[0]), Some(d[1]), Some(o.re), Some(o.im)]);
    }
    Ok(csv)
}

fn continuum(p: &ContinuumScenario) -> Result<Csv, CliError> {
    let config = ContinuumConfig::new(p.length, p.points, p.m, p.hbar)?;
    let to_config = |d: Diagnostic| CliError::Config(vec![d]);
    let v = inputs::potential(&p.potential, &config).map_err(to_config)?;
    let psi = inputs::lattice_state(&p.psi0, &config).map_err(to_config)?;
    let field = initial_field(&config, &v, psi)?;
    let (steps, dt) = step_grid(p.t_final, p.dt);
    let snapshots = evolve_lattice(&config, &field, dt, steps, p.snapshot_every)?;
    info!(
        "continuum: {} snapshots, max continuity residual {:.3e}",
        snapshots.len(),
        continuity_residual(&snapshots, &config)?
    );
    let tau = dt * p.snapshot_every as f64;
    let dx = config.dx();
    let mut csv = Csv::new(&["t", "Q_re", "Q_im", "continuity_residual", "right_norm"]);
    for (k, s) in snapshots.iter().enumerate() {
        let q = lattice_charge(s, dx);
        let residual = (k > 0 && k + 1 < snapshots.len()).then(|| residual_at(&snapshots[k - 1], s, &snapshots[k + 1], &config, tau));
        csv.row(&[Some(s.t), Some(q.re), Some(q.im), residual, Some(lattice_norm(s, dx))]);
    }
    Ok(csv)
}

fn lattice_norm(field: &LatticeField, dx: f64) -> f64 {
    field.psi.norm_squared() * dx
}
