//! Precoder constructions and the deterministic per-hop factor chain.
//!
//! Every transmitting level `i = 0..N-1` applies a linear precoder `P_i`
//! under an average power budget `tr(E{x_i x_iᴴ}) ≤ 𝒫_i`. Three
//! constructions are provided:
//!
//! * [`equal_power_precoders`] — scaled identities, the uninformed baseline;
//! * [`optimal_direction_precoders`] — precoders aligned with the
//!   correlation eigenbases (transmit eigenvectors on the output side,
//!   receive eigenvectors on the input side), which maximizes the average
//!   mutual information over the fading for any fixed diagonal allocation;
//! * [`random_unitary_precoders`] — Haar-random isotropic directions, the
//!   baseline the alignment claim is tested against.
//!
//! All three rescale each level by a single scalar so its power constraint
//! holds with equality; direction structure is never altered by the rescale.
//!
//! Once precoders are fixed, the chain collapses to deterministic factors
//! `F_0 = C_{t,1}^{1/2} P_0`, `F_i = C_{t,i+1}^{1/2} P_i C_{r,i}^{1/2}`,
//! `F_N = C_{r,N}^{1/2}` interleaved with the iid fading cores; the spectra
//! of `F_iᴴF_i` are exactly what the asymptotic machinery consumes.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{propagate_covariance, received_covariance, NetworkModel};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::spectra::SpectralDistribution;

/// Per-level diagonal magnitudes for [`optimal_direction_precoders`].
///
/// Entries are nonnegative amplitudes (squares are the per-direction powers).
/// By convention the entries are paired with the correlation eigenvalues in
/// matching decreasing order, so the largest allocation always rides the
/// strongest eigenmode; the ordering of the input vector itself is
/// irrelevant.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    levels: Vec<Vec<f64>>,
}

impl PowerAllocation {
    pub fn new(levels: Vec<Vec<f64>>) -> Result<Self> {
        for (i, level) in levels.iter().enumerate() {
            if level.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "allocation for level {i} is empty"
                )));
            }
            if level.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::InvalidInput(format!(
                    "allocation for level {i} must be nonnegative and finite"
                )));
            }
        }
        Ok(PowerAllocation { levels })
    }

    /// All-ones allocation for every level of `model` (equal share per
    /// direction before rescaling).
    pub fn uniform(model: &NetworkModel) -> Self {
        let levels = (0..model.hops())
            .map(|i| vec![1.0; model.dim(i)])
            .collect();
        PowerAllocation { levels }
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    fn check_dims(&self, model: &NetworkModel) -> Result<()> {
        if self.levels.len() != model.hops() {
            return Err(Error::DimensionMismatch {
                context: "power allocation levels".to_string(),
                expected: format!("{}", model.hops()),
                got: format!("{}", self.levels.len()),
            });
        }
        for (i, level) in self.levels.iter().enumerate() {
            if level.len() != model.dim(i) {
                return Err(Error::DimensionMismatch {
                    context: format!("allocation at level {i}"),
                    expected: format!("{}", model.dim(i)),
                    got: format!("{}", level.len()),
                });
            }
        }
        Ok(())
    }
}

/// One precoder matrix per transmitting level, `P_i` of size `k_i×k_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    matrices: Vec<CMatrix>,
}

impl PrecoderSet {
    /// Wraps explicit matrices, validating dimensions against the model.
    /// Power feasibility is *not* enforced here — see [`verify_power`].
    pub fn from_matrices(matrices: Vec<CMatrix>, model: &NetworkModel) -> Result<Self> {
        let set = PrecoderSet { matrices };
        set.check_dims(model)?;
        for (i, m) in set.matrices.iter().enumerate() {
            linalg::require_finite(m, &format!("precoder at level {i}"))?;
        }
        Ok(set)
    }

    pub fn check_dims(&self, model: &NetworkModel) -> Result<()> {
        if self.matrices.len() != model.hops() {
            return Err(Error::DimensionMismatch {
                context: "precoder count".to_string(),
                expected: format!("{}", model.hops()),
                got: format!("{}", self.matrices.len()),
            });
        }
        for (i, m) in self.matrices.iter().enumerate() {
            let k = model.dim(i);
            if m.nrows() != k || m.ncols() != k {
                return Err(Error::DimensionMismatch {
                    context: format!("precoder at level {i}"),
                    expected: format!("{k}x{k}"),
                    got: format!("{}x{}", m.nrows(), m.ncols()),
                });
            }
        }
        Ok(())
    }

    pub fn level(&self, i: usize) -> &CMatrix {
        &self.matrices[i]
    }

    pub fn levels(&self) -> &[CMatrix] {
        &self.matrices
    }
}

/// Scaled-identity precoders `P_i = √a_i · I`, each level's scalar chosen so
/// its power constraint holds with equality.
pub fn equal_power_precoders(model: &NetworkModel) -> Result<PrecoderSet> {
    let n = model.hops();
    let mut matrices = Vec::with_capacity(n);

    let k0 = model.dim(0);
    let a0 = model.budget(0) / k0 as f64;
    matrices.push(CMatrix::identity(k0, k0) * Complex64::new(a0.sqrt(), 0.0));
    let mut q = CMatrix::identity(k0, k0) * Complex64::new(a0, 0.0);

    for i in 1..n {
        let r = received_covariance(model.stage(i), &q)?;
        let tr = r.trace().re;
        if !(tr > 1e-300) {
            return Err(Error::InvalidInput(format!(
                "received covariance at level {i} has zero trace; upstream power is degenerate"
            )));
        }
        let a = model.budget(i) / tr;
        let k = model.dim(i);
        matrices.push(CMatrix::identity(k, k) * Complex64::new(a.sqrt(), 0.0));
        q = r * Complex64::new(a, 0.0);
    }

    Ok(PrecoderSet { matrices })
}

/// Eigenbasis-aligned precoders: `P_0 = U_{t,1}·D_0` and
/// `P_i = U_{t,i+1}·D_i·U_{r,i}ᴴ`, with diagonal magnitudes from `alloc`
/// (sorted decreasing to pair with the decreasing correlation eigenvalues)
/// and one scalar per level rescaling the diagonal so the power constraint
/// holds with equality.
pub fn optimal_direction_precoders(
    model: &NetworkModel,
    alloc: &PowerAllocation,
) -> Result<PrecoderSet> {
    alloc.check_dims(model)?;
    let n = model.hops();
    let mut matrices = Vec::with_capacity(n);

    // Decreasing-order pairing convention for the diagonal entries.
    let sorted_alloc = |i: usize| -> Vec<f64> {
        let mut d = alloc.levels()[i].clone();
        d.sort_by(|a, b| b.partial_cmp(a).expect("validated finite"));
        d
    };

    // Level 0: output side aligns with the first hop's transmit eigenbasis.
    let d0 = sorted_alloc(0);
    let sum0: f64 = d0.iter().map(|v| v * v).sum();
    if sum0 <= 0.0 {
        return Err(Error::InvalidInput(
            "allocation at level 0 is identically zero".to_string(),
        ));
    }
    let c0 = (model.budget(0) / sum0).sqrt();
    let scaled0: Vec<f64> = d0.iter().map(|v| c0 * v).collect();
    let p0 = model.stage(1).u_t() * linalg::diag_real(&scaled0);
    let mut q = &p0 * p0.adjoint();
    matrices.push(p0);

    for i in 1..n {
        let r = received_covariance(model.stage(i), &q)?;
        let u_r = model.stage(i).u_r();
        let u_t_next = model.stage(i + 1).u_t();
        let d = sorted_alloc(i);
        // Per-direction received power in the receive eigenbasis.
        let r_in_basis = u_r.adjoint() * &r * u_r;
        let denom: f64 = d
            .iter()
            .enumerate()
            .map(|(j, &v)| v * v * r_in_basis[(j, j)].re)
            .sum();
        if denom <= 1e-300 {
            return Err(Error::InvalidInput(format!(
                "allocation at level {i} puts no power on directions carrying signal"
            )));
        }
        let c = (model.budget(i) / denom).sqrt();
        let scaled: Vec<f64> = d.iter().map(|v| c * v).collect();
        let p = u_t_next * linalg::diag_real(&scaled) * u_r.adjoint();
        q = &p * &r * p.adjoint();
        matrices.push(p);
    }

    Ok(PrecoderSet { matrices })
}

/// Haar-random unitary precoders `P_i = √a_i · V_i`, power met with
/// equality. Serves as the isotropic baseline for the alignment property.
pub fn random_unitary_precoders<R: Rng + ?Sized>(
    model: &NetworkModel,
    rng: &mut R,
) -> Result<PrecoderSet> {
    let n = model.hops();
    let mut matrices = Vec::with_capacity(n);

    let k0 = model.dim(0);
    let v0 = linalg::haar_unitary(k0, rng);
    let a0 = model.budget(0) / k0 as f64;
    let p0 = &v0 * Complex64::new(a0.sqrt(), 0.0);
    let mut q = &p0 * p0.adjoint();
    matrices.push(p0);

    for i in 1..n {
        let r = received_covariance(model.stage(i), &q)?;
        let tr = r.trace().re;
        if !(tr > 1e-300) {
            return Err(Error::InvalidInput(format!(
                "received covariance at level {i} has zero trace; upstream power is degenerate"
            )));
        }
        let k = model.dim(i);
        let v = linalg::haar_unitary(k, rng);
        let a = model.budget(i) / tr;
        let p = &v * Complex64::new(a.sqrt(), 0.0);
        q = &p * &r * p.adjoint();
        matrices.push(p);
    }

    Ok(PrecoderSet { matrices })
}

/// The deterministic factors interleaving the fading cores: the end-to-end
/// matrix is `F_N Θ_N F_{N-1} ⋯ F_1 Θ_1 F_0`.
#[derive(Debug, Clone)]
pub struct FactorChain {
    factors: Vec<CMatrix>,
}

impl FactorChain {
    /// Factor `F_i`, `i = 0..=N`.
    pub fn factor(&self, i: usize) -> &CMatrix {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[CMatrix] {
        &self.factors
    }

    /// Number of hops `N` (the chain holds `N+1` factors).
    pub fn hops(&self) -> usize {
        self.factors.len() - 1
    }

    /// Empirical spectra of `F_iᴴF_i` for `i = 0..=N` — the measures the
    /// fixed-point system integrates against.
    pub fn spectra(&self) -> Result<Vec<SpectralDistribution>> {
        self.factors
            .iter()
            .map(SpectralDistribution::from_gram)
            .collect()
    }
}

/// Builds the deterministic factor chain for a model and precoder set:
/// `F_0 = C_{t,1}^{1/2} P_0`, `F_i = C_{t,i+1}^{1/2} P_i C_{r,i}^{1/2}` for
/// interior levels, `F_N = C_{r,N}^{1/2}`.
pub fn assemble_chain(model: &NetworkModel, precoders: &PrecoderSet) -> Result<FactorChain> {
    precoders.check_dims(model)?;
    let n = model.hops();
    let mut factors = Vec::with_capacity(n + 1);
    factors.push(model.stage(1).c_t_sqrt() * precoders.level(0));
    for i in 1..n {
        factors.push(
            model.stage(i + 1).c_t_sqrt() * precoders.level(i) * model.stage(i).c_r_sqrt(),
        );
    }
    factors.push(model.stage(n).c_r_sqrt().clone());
    Ok(FactorChain { factors })
}

/// Power slack of one transmitting level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSlack {
    pub level: usize,
    /// Achieved transmit power `tr(Q_i)`.
    pub trace: f64,
    /// Budget `𝒫_i`.
    pub budget: f64,
    /// `trace − budget`; positive means the budget is exceeded.
    pub slack: f64,
    /// Whether the excess is beyond round-off (`slack > 1e-9`).
    pub violated: bool,
}

/// Per-level power report for a precoder set.
#[derive(Debug, Clone)]
pub struct PowerReport {
    pub levels: Vec<LevelSlack>,
}

impl PowerReport {
    pub fn any_violation(&self) -> bool {
        self.levels.iter().any(|l| l.violated)
    }

    pub fn max_abs_slack(&self) -> f64 {
        self.levels.iter().map(|l| l.slack.abs()).fold(0.0, f64::max)
    }
}

/// Violation threshold distinguishing budget breaches from round-off.
pub const POWER_SLACK_TOL: f64 = 1e-9;

/// Compares achieved per-level transmit power against the budgets.
pub fn verify_power(model: &NetworkModel, precoders: &PrecoderSet) -> Result<PowerReport> {
    let qs = propagate_covariance(model, precoders)?;
    let levels = qs
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let trace = q.trace().re;
            let budget = model.budget(i);
            let slack = trace - budget;
            LevelSlack {
                level: i,
                trace,
                budget,
                slack,
                violated: slack > POWER_SLACK_TOL,
            }
        })
        .collect();
    Ok(PowerReport { levels })
}
