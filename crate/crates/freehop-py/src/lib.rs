//! Python bindings for the `freehop` library.
//!
//! The module mirrors the Rust API at the granularity a notebook wants:
//! spectra with their multiplicative transforms, correlated chain models,
//! precoder constructors, the asymptotic fixed point, seeded Monte Carlo
//! sweeps, the config-file experiment layer, and the self-validation suite.
//!
//! Error mapping: configuration and domain errors raise `ValueError`,
//! i/o and serialization raise `IOError`, solver non-convergence raises
//! `RuntimeError`.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use freehop::asymptotic::{self, AsymptoticInput};
use freehop::channel::{CorrelationSpec, NetworkModel};
use freehop::config::ExperimentConfig;
use freehop::experiment::{self, RunMode};
use freehop::montecarlo::{self, McConfig};
use freehop::precoding::{self, PowerAllocation, PrecoderSet};
use freehop::rng::StreamFactory;
use freehop::spectra::SpectralDistribution;
use freehop::validation::{self, ValidationLevel};

fn to_py(e: freehop::Error) -> PyErr {
    use freehop::Error as E;
    match &e {
        E::Io(_) | E::Json(_) => PyIOError::new_err(e.to_string()),
        E::NoConvergence { .. } | E::NoBracket { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Atomic spectral measure with its multiplicative free-probability
/// transforms.
#[pyclass(frozen)]
struct Spectrum {
    inner: SpectralDistribution,
}

#[pymethods]
impl Spectrum {
    /// Builds a spectrum from `(eigenvalue, weight)` pairs; weights must sum
    /// to one.
    #[new]
    fn new(pairs: Vec<(f64, f64)>) -> PyResult<Self> {
        SpectralDistribution::from_atoms(&pairs)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Point mass at `value`.
    #[staticmethod]
    fn point(value: f64) -> PyResult<Self> {
        SpectralDistribution::point(value)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Empirical spectrum of an eigenvalue list (uniform weights).
    #[staticmethod]
    fn from_eigenvalues(values: Vec<f64>) -> PyResult<Self> {
        SpectralDistribution::from_eigenvalues(&values)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// The `(eigenvalue, weight)` atoms, ascending by eigenvalue.
    fn atoms(&self) -> Vec<(f64, f64)> {
        self.inner
            .atoms()
            .iter()
            .map(|a| (a.eigenvalue, a.weight))
            .collect()
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    /// Total weight on strictly positive eigenvalues.
    fn positive_mass(&self) -> f64 {
        self.inner.positive_mass()
    }

    /// Moment series `ψ(s) = E{sλ/(1−sλ)}` for `s < 0`.
    fn psi(&self, s: f64) -> PyResult<f64> {
        self.inner.psi(s).map_err(to_py)
    }

    /// Inverse of `ψ` on `(−positive_mass, 0)`.
    fn psi_inverse(&self, z: f64) -> PyResult<f64> {
        self.inner.psi_inverse(z).map_err(to_py)
    }

    /// S-transform `S(z) = ((z+1)/z)·ψ⁻¹(z)`.
    fn s_transform(&self, z: f64) -> PyResult<f64> {
        self.inner.s_transform(z).map_err(to_py)
    }

    /// Pushforward under `λ ↦ c·λ`.
    fn scale(&self, c: f64) -> PyResult<Self> {
        self.inner.scale(c).map(|inner| Self { inner }).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Spectrum(atoms={}, mean={:.6})",
            self.inner.atoms().len(),
            self.inner.mean()
        )
    }
}

/// An `N`-hop Kronecker-correlated relay chain at a fixed noise level.
#[pyclass(frozen)]
struct Model {
    inner: NetworkModel,
}

#[pymethods]
impl Model {
    /// Uncorrelated chain: `dims` lists the `N+1` antenna counts
    /// source→destination, `eta` is the per-hop SNR (linear scale).
    #[staticmethod]
    fn iid(dims: Vec<usize>, eta: f64) -> PyResult<Self> {
        NetworkModel::iid(&dims, eta)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Correlated chain. `correlations` gives one `(tx, rx)` pair per hop,
    /// where each side is `None` for uncorrelated antennas or a coefficient
    /// `0 ≤ r < 1` for the exponential profile `r^|k−l|`. Optional `budgets`
    /// override the default per-level transmit power `k_i`.
    #[staticmethod]
    #[pyo3(signature = (dims, correlations, eta, budgets=None))]
    fn correlated(
        dims: Vec<usize>,
        correlations: Vec<(Option<f64>, Option<f64>)>,
        eta: f64,
        budgets: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let spec = |side: Option<f64>| match side {
            None => CorrelationSpec::Identity,
            Some(r) => CorrelationSpec::Exponential { r },
        };
        let specs: Vec<(CorrelationSpec, CorrelationSpec)> = correlations
            .into_iter()
            .map(|(tx, rx)| (spec(tx), spec(rx)))
            .collect();
        NetworkModel::from_correlations(&dims, &specs, eta, budgets)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn hops(&self) -> usize {
        self.inner.hops()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta()
    }

    #[getter]
    fn budgets(&self) -> Vec<f64> {
        self.inner.budgets().to_vec()
    }

    /// Same chain at a different noise level.
    fn with_eta(&self, eta: f64) -> PyResult<Self> {
        self.inner
            .with_eta(eta)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(dims={:?}, eta={:.6})",
            self.inner.dims(),
            self.inner.eta()
        )
    }
}

/// One linear precoder per transmitting level of a chain.
#[pyclass(frozen)]
struct Precoders {
    inner: PrecoderSet,
}

#[pymethods]
impl Precoders {
    /// Scaled identities meeting every budget with equality.
    #[staticmethod]
    fn equal_power(model: &Model) -> PyResult<Self> {
        precoding::equal_power_precoders(&model.inner)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Eigenbasis-aligned precoders. `allocation` optionally gives per-level
    /// stream powers (one list per level, entries summing to that level's
    /// budget); the default splits each budget uniformly.
    #[staticmethod]
    #[pyo3(signature = (model, allocation=None))]
    fn optimal_directions(model: &Model, allocation: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        let alloc = match allocation {
            Some(levels) => PowerAllocation::new(levels).map_err(to_py)?,
            None => PowerAllocation::uniform(&model.inner),
        };
        precoding::optimal_direction_precoders(&model.inner, &alloc)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Budget-respecting Haar-random rotations (a fairness baseline), drawn
    /// from the seeded stream `draw`.
    #[staticmethod]
    #[pyo3(signature = (model, seed, draw=0))]
    fn random_unitary(model: &Model, seed: u64, draw: u64) -> PyResult<Self> {
        let factory = StreamFactory::new(seed);
        precoding::random_unitary_precoders(&model.inner, &mut factory.precoder(draw))
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Per-level `(level, trace, budget, slack)` of the transmitted
    /// covariance against the power constraints.
    fn power_report(&self, model: &Model) -> PyResult<Vec<(usize, f64, f64, f64)>> {
        let report = precoding::verify_power(&model.inner, &self.inner).map_err(to_py)?;
        Ok(report
            .levels
            .iter()
            .map(|l| (l.level, l.trace, l.budget, l.slack))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Precoders(levels={})", self.inner.levels().len())
    }
}

/// Solution of the asymptotic gain system.
#[pyclass(frozen, get_all)]
struct FixedPoint {
    /// Per-factor gains `h_0..h_N`.
    gains: Vec<f64>,
    /// `∏_j h_j`.
    product: f64,
    /// Largest per-equation defect.
    max_residual: f64,
    /// Whether every equation holds within the solver's certificate.
    converged: bool,
    /// Outer bisection steps taken.
    iterations: usize,
}

#[pymethods]
impl FixedPoint {
    fn __repr__(&self) -> String {
        format!(
            "FixedPoint(product={:.6}, max_residual={:.3e}, converged={})",
            self.product, self.max_residual, self.converged
        )
    }
}

fn input_for(model: &Model, precoders: &Precoders) -> PyResult<AsymptoticInput> {
    AsymptoticInput::from_model(&model.inner, &precoders.inner).map_err(to_py)
}

/// Asymptotic end-to-end mutual information in bits per source antenna.
#[pyfunction]
fn asymptotic_mi(model: &Model, precoders: &Precoders) -> PyResult<f64> {
    asymptotic::asymptotic_mi(&input_for(model, precoders)?).map_err(to_py)
}

/// Derivative of the asymptotic mutual information with respect to the
/// noise-level parameter `eta`.
#[pyfunction]
fn mi_derivative(model: &Model, precoders: &Precoders) -> PyResult<f64> {
    asymptotic::mi_derivative(&input_for(model, precoders)?).map_err(to_py)
}

/// Solves the coupled gain system and returns its certificate.
#[pyfunction]
fn fixed_point(model: &Model, precoders: &Precoders) -> PyResult<FixedPoint> {
    let sol = asymptotic::solve_fixed_point(&input_for(model, precoders)?).map_err(to_py)?;
    Ok(FixedPoint {
        max_residual: sol.max_residual(),
        gains: sol.gains,
        product: sol.product,
        converged: sol.converged,
        iterations: sol.outer_iterations,
    })
}

/// S-transform of the end-to-end deterministic-factor product, composed
/// hop by hop.
#[pyfunction]
fn chain_s_transform(model: &Model, precoders: &Precoders, z: f64) -> PyResult<f64> {
    asymptotic::chain_s_transform(&input_for(model, precoders)?, z).map_err(to_py)
}

/// Mutual information of one seeded fading draw of the finite chain, in
/// bits per source antenna.
#[pyfunction]
#[pyo3(signature = (model, precoders, seed, trial=0))]
fn instantaneous_mi(model: &Model, precoders: &Precoders, seed: u64, trial: u64) -> PyResult<f64> {
    let factory = StreamFactory::new(seed);
    montecarlo::instantaneous_mi(&model.inner, &precoders.inner, &factory, trial).map_err(to_py)
}

/// Seeded sweep over an SNR grid (dB). Returns one
/// `(snr_db, eta, mi_asymptotic, mi_mc_mean, mi_mc_std)` tuple per grid
/// point; `mi_asymptotic` is `None` where the solver failed.
#[pyfunction]
fn sweep(
    model: &Model,
    precoders: &Precoders,
    snr_db: Vec<f64>,
    trials: usize,
    seed: u64,
) -> PyResult<Vec<(f64, f64, Option<f64>, f64, f64)>> {
    let eta_grid: Vec<f64> = snr_db.iter().map(|db| 10f64.powf(db / 10.0)).collect();
    let config = McConfig::new(trials, seed, eta_grid).map_err(to_py)?;
    let result = montecarlo::run_sweep(&model.inner, &precoders.inner, &config).map_err(to_py)?;
    Ok(result
        .records
        .iter()
        .map(|r| (r.snr_db, r.eta, r.mi_asymptotic, r.mi_mc_mean, r.mi_mc_std))
        .collect())
}

/// Runs a JSON experiment configuration (the same format the `freehop`
/// binary reads) and returns the JSON report. `mode` is `"sweep"` or
/// `"asymptotic"`; `seed` overrides the config's master seed.
#[pyfunction]
#[pyo3(signature = (config_json, mode="sweep", seed=None))]
fn run_config(config_json: &str, mode: &str, seed: Option<u64>) -> PyResult<String> {
    let config = ExperimentConfig::from_json(config_json).map_err(to_py)?;
    let mode = match mode {
        "sweep" => RunMode::Sweep,
        "asymptotic" => RunMode::AsymptoticOnly,
        other => {
            return Err(PyValueError::new_err(format!(
                "mode must be \"sweep\" or \"asymptotic\", got {other:?}"
            )))
        }
    };
    let seed = seed.unwrap_or(config.master_seed);
    let output = experiment::run_experiment(&config, seed, mode).map_err(to_py)?;
    experiment::render_json(&output).map_err(to_py)
}

/// Precoder construction report (JSON) for a configuration using the
/// eigenbasis-aligned scheme.
#[pyfunction]
#[pyo3(signature = (config_json, seed=None))]
fn precoder_report(config_json: &str, seed: Option<u64>) -> PyResult<String> {
    let config = ExperimentConfig::from_json(config_json).map_err(to_py)?;
    let seed = seed.unwrap_or(config.master_seed);
    experiment::emit_precoders(&config, seed).map_err(to_py)
}

/// Runs the internal validation suite. Returns `(all_passed, report_text)`.
#[pyfunction]
#[pyo3(signature = (level="quick", seed=0))]
fn validate(level: &str, seed: u64) -> PyResult<(bool, String)> {
    let level: ValidationLevel = level.parse().map_err(PyValueError::new_err)?;
    let report = validation::run_validation_suite(level, seed);
    Ok((report.all_passed(), report.render()))
}

#[pymodule]
fn freehop_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Spectrum>()?;
    m.add_class::<Model>()?;
    m.add_class::<Precoders>()?;
    m.add_class::<FixedPoint>()?;
    m.add_function(wrap_pyfunction!(asymptotic_mi, m)?)?;
    m.add_function(wrap_pyfunction!(mi_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(chain_s_transform, m)?)?;
    m.add_function(wrap_pyfunction!(instantaneous_mi, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(precoder_report, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
