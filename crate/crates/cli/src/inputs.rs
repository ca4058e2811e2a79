//! Conversion of config specs into numerical inputs.

use std::path::Path;

use biham::continuum::{complex_gaussian_potential, gaussian_packet, plane_wave, ContinuumConfig};
use biham::{random, NhMatrix, C64};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{InitialStateSpec, MatrixSource, MatrixSpec, PotentialSpec, VectorSpec};
use crate::error::{CliError, Diagnostic};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matrix_from_spec(spec: &MatrixSpec, field: &str) -> Result<NhMatrix, Diagnostic> {
    let n = spec.n;
    if n == 0 {
        return Err(Diagnostic::schema(format!("{field}.n"), "must be at least 1"));
    }
    let zeros = vec![vec![0.0; n]; n];
    let im = spec.im.as_ref().unwrap_or(&zeros);
    for (name, rows) in [("re", &spec.re), ("im", im)] {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Diagnostic::schema(format!("{field}.{name}"), format!("must be {n} rows of {n} values")));
        }
    }
    NhMatrix::from_parts(&spec.re, im).map_err(|e| Diagnostic::schema(field, e.to_string()))
}

/// Resolves the single matrix source. The random generator is advanced
/// only for `random_matrix`.
pub fn load_matrix(source: &MatrixSource, base_dir: &Path, rng: &mut ChaCha8Rng) -> Result<NhMatrix, CliError> {
    let given = [source.matrix.is_some(), source.matrix_file.is_some(), source.random_matrix.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(CliError::Config(vec![Diagnostic::schema(
            "matrix",
            "exactly one of matrix, matrix_file, random_matrix is required",
        )]));
    }
    if let Some(spec) = &source.matrix {
        return matrix_from_spec(spec, "matrix").map_err(|d| CliError::Config(vec![d]));
    }
    if let Some(file) = &source.matrix_file {
        let path = base_dir.join(file);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let spec: MatrixSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(vec![Diagnostic::schema("matrix_file", format!("{}: {e}", path.display()))]))?;
        return matrix_from_spec(&spec, "matrix_file").map_err(|d| CliError::Config(vec![d]));
    }
    let spec = source.random_matrix.as_ref().expect("one source present");
    let mut diags = Vec::new();
    if spec.n == 0 {
        diags.push(Diagnostic::schema("random_matrix.n", "must be at least 1"));
    }
    for (name, v) in [("max_norm", spec.max_norm), ("min_gap", spec.min_gap)] {
        if !(v > 0.0 && v.is_finite()) {
            diags.push(Diagnostic::schema(format!("random_matrix.{name}"), "must be positive"));
        }
    }
    if !(spec.max_cond >= 1.0 && spec.max_cond.is_finite()) {
        diags.push(Diagnostic::schema("random_matrix.max_cond", "must be at least 1"));
    }
    if !diags.is_empty() {
        return Err(CliError::Config(diags));
    }
    Ok(random::diagonalizable_bounded(rng, spec.n, spec.max_norm, spec.min_gap, spec.max_cond).h)
}

pub fn vector_from_spec(spec: &VectorSpec, n: usize, field: &str) -> Result<DVector<C64>, Diagnostic> {
    complex_samples(&spec.re, spec.im.as_deref(), n, field)
}

fn complex_samples(re: &[f64], im: Option<&[f64]>, n: usize, field: &str) -> Result<DVector<C64>, Diagnostic> {
    if re.len() != n {
        return Err(Diagnostic::schema(format!("{field}.re"), format!("expected {n} values, got {}", re.len())));
    }
    if let Some(im) = im {
        if im.len() != n {
            return Err(Diagnostic::schema(format!("{field}.im"), format!("expected {n} values, got {}", im.len())));
        }
    }
    let v = DVector::from_fn(n, |k, _| C64::new(re[k], im.map_or(0.0, |i| i[k])));
    if v.iter().any(|z| !z.is_finite()) {
        return Err(Diagnostic::schema(field, "values must be finite"));
    }
    Ok(v)
}

/// Initial right state: the given vector or a seeded random unit state.
pub fn initial_state(spec: Option<&VectorSpec>, n: usize, rng: &mut ChaCha8Rng) -> Result<DVector<C64>, Diagnostic> {
    match spec {
        Some(v) => {
            let psi = vector_from_spec(v, n, "psi0")?;
            if psi.norm() == 0.0 {
                return Err(Diagnostic::precondition("psi0", "state must be nonzero"));
            }
            Ok(psi)
        }
        None => Ok(random::state(rng, n)),
    }
}

pub fn potential(spec: &PotentialSpec, config: &ContinuumConfig) -> Result<DVector<C64>, Diagnostic> {
    match spec {
        PotentialSpec::ComplexGaussian {
            amplitude_re,
            amplitude_im,
            center,
            width,
        } => {
            if width.is_nan() || *width <= 0.0 {
                return Err(Diagnostic::schema("potential.width", "must be positive"));
            }
            Ok(complex_gaussian_potential(config, C64::new(*amplitude_re, *amplitude_im), *center, *width))
        }
        PotentialSpec::Table { re, im } => complex_samples(re, im.as_deref(), config.points, "potential"),
    }
}

pub fn lattice_state(spec: &InitialStateSpec, config: &ContinuumConfig) -> Result<DVector<C64>, Diagnostic> {
    let psi = match spec {
        InitialStateSpec::Gaussian { center, width, k0 } => {
            if width.is_nan() || *width <= 0.0 {
                return Err(Diagnostic::schema("psi0.width", "must be positive"));
            }
            gaussian_packet(config, *center, *width, *k0)
        }
        InitialStateSpec::PlaneWave { mode } => plane_wave(config, *mode),
        InitialStateSpec::Table { re, im } => complex_samples(re, im.as_deref(), config.points, "psi0")?,
    };
    if psi.norm() == 0.0 {
        return Err(Diagnostic::precondition("psi0", "state must be nonzero"));
    }
    Ok(psi)
}
