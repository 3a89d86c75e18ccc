//! Kronecker-correlated multi-hop channel model.
//!
//! Each hop `i` of the chain is a flat Rayleigh channel
//! `H_i = C_r^{1/2} · Θ_i · C_t^{1/2}`: an iid circularly-symmetric complex
//! Gaussian core `Θ_i` (entry variance `1/k_out`) wrapped in deterministic
//! transmit/receive correlation roots. The module covers generation of the
//! correlation matrices, seeded sampling of `Θ_i` and `H_i`, and the exact
//! (non-sampled) propagation of signal covariances down the chain, which is
//! what the per-level power constraints are checked against.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::precoding::PrecoderSet;

/// Recipe for one side's antenna correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationSpec {
    /// Uncorrelated antennas.
    Identity,
    /// Exponential profile: entry `(k, l)` equals `r^{|k-l|}`, `0 ≤ r < 1`.
    /// One-parameter, Hermitian, and strictly positive definite.
    Exponential { r: f64 },
    /// Caller-supplied matrix; validated Hermitian PSD. Any positive scale is
    /// allowed (a uniform gain like `4·I` is a legitimate correlation input).
    Explicit(CMatrix),
}

/// Materializes a correlation matrix of size `dim`.
pub fn make_correlation(spec: &CorrelationSpec, dim: usize) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::InvalidInput(
            "correlation dimension must be at least 1".to_string(),
        ));
    }
    match spec {
        CorrelationSpec::Identity => Ok(CMatrix::identity(dim, dim)),
        CorrelationSpec::Exponential { r } => {
            if !r.is_finite() || *r < 0.0 || *r >= 1.0 {
                return Err(Error::InvalidInput(format!(
                    "exponential correlation parameter must lie in [0, 1), got {r}"
                )));
            }
            Ok(CMatrix::from_fn(dim, dim, |i, j| {
                let d = i.abs_diff(j) as i32;
                Complex64::new(r.powi(d), 0.0)
            }))
        }
        CorrelationSpec::Explicit(m) => {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "explicit correlation matrix".to_string(),
                    expected: format!("{dim}x{dim}"),
                    got: format!("{}x{}", m.nrows(), m.ncols()),
                });
            }
            linalg::require_hermitian(m, "explicit correlation matrix")?;
            let eigs = linalg::hermitian_eigenvalues(m, "explicit correlation matrix")?;
            if let Some(&min) = eigs.first() {
                if min < linalg::PSD_FLOOR {
                    return Err(Error::NotPsd {
                        context: "explicit correlation matrix".to_string(),
                        value: min,
                    });
                }
            }
            Ok(linalg::hermitize(m))
        }
    }
}

/// One hop of the chain: correlation matrices with their cached
/// eigendecompositions and principal square roots.
///
/// Eigenvalues are stored in decreasing order and eigenvectors follow the
/// deterministic phase convention of [`linalg::hermitian_eigen`]; aligned
/// precoder construction relies on both.
#[derive(Debug, Clone)]
pub struct ChannelStage {
    k_in: usize,
    k_out: usize,
    c_t: CMatrix,
    c_r: CMatrix,
    u_t: CMatrix,
    lambda_t: Vec<f64>,
    u_r: CMatrix,
    lambda_r: Vec<f64>,
    c_t_sqrt: CMatrix,
    c_r_sqrt: CMatrix,
}

impl ChannelStage {
    /// Builds a stage from its transmit (`k_in×k_in`) and receive
    /// (`k_out×k_out`) correlation matrices.
    pub fn new(c_t: CMatrix, c_r: CMatrix) -> Result<Self> {
        let (u_t, lambda_t, c_t_sqrt) = Self::decompose(&c_t, "transmit correlation")?;
        let (u_r, lambda_r, c_r_sqrt) = Self::decompose(&c_r, "receive correlation")?;
        Ok(ChannelStage {
            k_in: c_t.nrows(),
            k_out: c_r.nrows(),
            c_t,
            c_r,
            u_t,
            lambda_t,
            u_r,
            lambda_r,
            c_t_sqrt,
            c_r_sqrt,
        })
    }

    /// Builds a stage from correlation recipes.
    pub fn from_specs(
        tx: &CorrelationSpec,
        rx: &CorrelationSpec,
        k_in: usize,
        k_out: usize,
    ) -> Result<Self> {
        Self::new(make_correlation(tx, k_in)?, make_correlation(rx, k_out)?)
    }

    fn decompose(c: &CMatrix, context: &str) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
        let eig = linalg::hermitian_eigen(c, context)?;
        let mut values = Vec::with_capacity(eig.values.len());
        for &v in eig.values.iter() {
            if v < linalg::PSD_FLOOR {
                return Err(Error::NotPsd {
                    context: context.to_string(),
                    value: v,
                });
            }
            values.push(v.max(0.0));
        }
        let root_cols = {
            let mut m = eig.vectors.clone();
            for (k, mut col) in m.column_iter_mut().enumerate() {
                col *= Complex64::new(values[k].sqrt(), 0.0);
            }
            m
        };
        let sqrt = &root_cols * eig.vectors.adjoint();
        Ok((eig.vectors, values, sqrt))
    }

    pub fn k_in(&self) -> usize {
        self.k_in
    }

    pub fn k_out(&self) -> usize {
        self.k_out
    }

    pub fn c_t(&self) -> &CMatrix {
        &self.c_t
    }

    pub fn c_r(&self) -> &CMatrix {
        &self.c_r
    }

    /// Transmit-side eigenbasis, eigenvalues decreasing.
    pub fn u_t(&self) -> &CMatrix {
        &self.u_t
    }

    /// Receive-side eigenbasis, eigenvalues decreasing.
    pub fn u_r(&self) -> &CMatrix {
        &self.u_r
    }

    pub fn lambda_t(&self) -> &[f64] {
        &self.lambda_t
    }

    pub fn lambda_r(&self) -> &[f64] {
        &self.lambda_r
    }

    /// Principal square root of the transmit correlation.
    pub fn c_t_sqrt(&self) -> &CMatrix {
        &self.c_t_sqrt
    }

    /// Principal square root of the receive correlation.
    pub fn c_r_sqrt(&self) -> &CMatrix {
        &self.c_r_sqrt
    }
}

/// Full chain description: dimensions, per-hop correlation stages, noise
/// level, and per-level transmit power budgets.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    dims: Vec<usize>,
    stages: Vec<ChannelStage>,
    eta: f64,
    budgets: Vec<f64>,
}

impl NetworkModel {
    /// Builds a model from hop stages. `budgets` are the per-level transmit
    /// power caps for levels `0..N-1`; when omitted they default to the
    /// transmitting level's antenna count (unit average power per antenna).
    pub fn new(stages: Vec<ChannelStage>, eta: f64, budgets: Option<Vec<f64>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidInput(
                "a relay chain needs at least one hop".to_string(),
            ));
        }
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "signal-to-noise level eta must be positive and finite, got {eta}"
            )));
        }
        let mut dims = Vec::with_capacity(stages.len() + 1);
        dims.push(stages[0].k_in());
        for (i, stage) in stages.iter().enumerate() {
            if i > 0 && stage.k_in() != dims[i] {
                return Err(Error::DimensionMismatch {
                    context: format!("stage {} input", i + 1),
                    expected: format!("{}", dims[i]),
                    got: format!("{}", stage.k_in()),
                });
            }
            dims.push(stage.k_out());
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidInput(
                "antenna counts must be positive".to_string(),
            ));
        }
        let budgets = match budgets {
            Some(b) => {
                if b.len() != stages.len() {
                    return Err(Error::DimensionMismatch {
                        context: "power budgets".to_string(),
                        expected: format!("{} levels", stages.len()),
                        got: format!("{}", b.len()),
                    });
                }
                if b.iter().any(|&p| !p.is_finite() || p <= 0.0) {
                    return Err(Error::InvalidInput(
                        "power budgets must be positive and finite".to_string(),
                    ));
                }
                b
            }
            None => dims[..stages.len()].iter().map(|&k| k as f64).collect(),
        };
        Ok(NetworkModel {
            dims,
            stages,
            eta,
            budgets,
        })
    }

    /// Uncorrelated chain with the given antenna counts `k_0..k_N`.
    pub fn iid(dims: &[usize], eta: f64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidInput(
                "need at least source and destination antenna counts".to_string(),
            ));
        }
        let stages = dims
            .windows(2)
            .map(|w| {
                ChannelStage::from_specs(
                    &CorrelationSpec::Identity,
                    &CorrelationSpec::Identity,
                    w[0],
                    w[1],
                )
            })
            .collect::<Result<Vec<_>>>()?;
        NetworkModel::new(stages, eta, None)
    }

    /// Chain with per-hop `(transmit, receive)` correlation recipes.
    pub fn from_correlations(
        dims: &[usize],
        correlations: &[(CorrelationSpec, CorrelationSpec)],
        eta: f64,
        budgets: Option<Vec<f64>>,
    ) -> Result<Self> {
        if dims.len() < 2 || correlations.len() != dims.len() - 1 {
            return Err(Error::DimensionMismatch {
                context: "correlation list".to_string(),
                expected: format!("{} hops", dims.len().saturating_sub(1)),
                got: format!("{}", correlations.len()),
            });
        }
        let stages = dims
            .windows(2)
            .zip(correlations)
            .map(|(w, (tx, rx))| ChannelStage::from_specs(tx, rx, w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        NetworkModel::new(stages, eta, budgets)
    }

    /// Number of hops `N` (= number of stages; levels run `0..N-1`).
    pub fn hops(&self) -> usize {
        self.stages.len()
    }

    /// Antenna counts `k_0..k_N`.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, i: usize) -> usize {
        self.dims[i]
    }

    /// Hop stage `i` for `i = 1..=N`.
    pub fn stage(&self, i: usize) -> &ChannelStage {
        &self.stages[i - 1]
    }

    pub fn stages(&self) -> &[ChannelStage] {
        &self.stages
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Dimension ratios: `rho(i) = k_i / k_N` for `i ≤ N`, and `rho(N+1) = 1`
    /// by convention.
    pub fn rho(&self, i: usize) -> f64 {
        let n = self.hops();
        if i == n + 1 {
            1.0
        } else {
            self.dims[i] as f64 / self.dims[n] as f64
        }
    }

    /// Power budget of transmitting level `i`, `i = 0..N-1`.
    pub fn budget(&self, i: usize) -> f64 {
        self.budgets[i]
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    /// Same chain at a different noise level.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        let mut m = self.clone();
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "signal-to-noise level eta must be positive and finite, got {eta}"
            )));
        }
        m.eta = eta;
        Ok(m)
    }
}

/// Draws the iid fading core of a hop: `k_out×k_in`, entries
/// circularly-symmetric complex Gaussian with `E|entry|² = 1/k_out`.
pub fn sample_fading<R: Rng + ?Sized>(stage: &ChannelStage, rng: &mut R) -> CMatrix {
    sample_fading_dims(stage.k_out(), stage.k_in(), rng)
}

/// Fading core for explicit dimensions (entry variance `1/rows`).
pub fn sample_fading_dims<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    linalg::gaussian_matrix(rows, cols, 1.0 / rows as f64, rng)
}

/// Draws one correlated channel matrix `C_r^{1/2} · Θ · C_t^{1/2}`.
pub fn sample_channel<R: Rng + ?Sized>(stage: &ChannelStage, rng: &mut R) -> CMatrix {
    let theta = sample_fading(stage, rng);
    stage.c_r_sqrt() * theta * stage.c_t_sqrt()
}

/// Covariance of the signal received over `stage` when the transmitted
/// signal has covariance `q_prev`: averaging the fading gives
/// `R = (tr(C_t · Q) / k_out) · C_r`.
pub fn received_covariance(stage: &ChannelStage, q_prev: &CMatrix) -> Result<CMatrix> {
    if q_prev.nrows() != stage.k_in() || q_prev.ncols() != stage.k_in() {
        return Err(Error::DimensionMismatch {
            context: "received covariance".to_string(),
            expected: format!("{0}x{0}", stage.k_in()),
            got: format!("{}x{}", q_prev.nrows(), q_prev.ncols()),
        });
    }
    let t = (stage.c_t() * q_prev).trace().re;
    Ok(stage.c_r().map(|v| v * (t / stage.k_out() as f64)))
}

/// Exact transmit covariances `Q_i = E{x_i x_iᴴ}` for levels `i = 0..N-1`.
///
/// `Q_0 = P_0 P_0ᴴ` (unit-covariance source), and each relay level applies
/// its precoder to the averaged received covariance of the previous hop:
/// `Q_i = P_i R_i P_iᴴ`. The expectation is over both the source signal and
/// the fading, so the result is deterministic.
pub fn propagate_covariance(model: &NetworkModel, precoders: &PrecoderSet) -> Result<Vec<CMatrix>> {
    precoders.check_dims(model)?;
    let n = model.hops();
    let mut qs = Vec::with_capacity(n);
    let p0 = precoders.level(0);
    let mut q = p0 * p0.adjoint();
    qs.push(q.clone());
    for i in 1..n {
        let r = received_covariance(model.stage(i), &q)?;
        let p = precoders.level(i);
        q = p * r * p.adjoint();
        qs.push(q.clone());
    }
    Ok(qs)
}
