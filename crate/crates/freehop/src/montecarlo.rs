//! Finite-size simulation of the relay chain.
//!
//! The asymptotic results live at infinite dimension; this module builds
//! actual `k_N×k_0` end-to-end matrices from seeded fading draws, computes
//! their instantaneous mutual information, and extracts empirical gram
//! spectra. Sweeping a noise grid against [`crate::asymptotic`] is how every
//! limit formula in this crate is cross-checked at finite sizes.
//!
//! Determinism: each trial's fading comes from streams derived from
//! `(master_seed, trial, stage)`, so any trial of any sweep can be
//! reproduced in isolation, trials may run in any order, and a sweep's
//! output is a pure function of its configuration. The fading draws do not
//! depend on the noise grid, so one trial's gram eigenvalues serve every
//! grid point.

use serde::Serialize;

use crate::asymptotic::{self, AsymptoticInput};
use crate::channel::{sample_fading, NetworkModel};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::precoding::{assemble_chain, PrecoderSet};
use crate::rng::StreamFactory;
use crate::spectra::SpectralDistribution;

/// Monte Carlo sweep parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    trials: usize,
    master_seed: u64,
    eta_grid: Vec<f64>,
}

impl McConfig {
    pub fn new(trials: usize, master_seed: u64, eta_grid: Vec<f64>) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidInput(
                "a sweep needs at least one trial".to_string(),
            ));
        }
        if eta_grid.is_empty() {
            return Err(Error::InvalidInput(
                "the noise grid must not be empty".to_string(),
            ));
        }
        if eta_grid.iter().any(|&e| !e.is_finite() || e <= 0.0) {
            return Err(Error::InvalidInput(
                "noise grid entries must be positive and finite".to_string(),
            ));
        }
        if eta_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "the noise grid must be strictly increasing".to_string(),
            ));
        }
        Ok(McConfig {
            trials,
            master_seed,
            eta_grid,
        })
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn eta_grid(&self) -> &[f64] {
        &self.eta_grid
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub eta: f64,
    /// Asymptotic mutual information in bits per source antenna; absent when
    /// the gain solver failed at this grid point.
    pub mi_asymptotic: Option<f64>,
    /// Human-readable solver failure, when `mi_asymptotic` is absent.
    pub solver_error: Option<String>,
    pub mi_mc_mean: f64,
    pub mi_mc_std: f64,
    pub trials: usize,
}

/// Full sweep output, records ordered by increasing noise level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
}

/// Draws the fading cores `Θ_1..Θ_N` of one trial from its derived streams.
pub fn sample_thetas(model: &NetworkModel, factory: &StreamFactory, trial: u64) -> Vec<CMatrix> {
    (1..=model.hops())
        .map(|i| sample_fading(model.stage(i), &mut factory.channel(trial, i)))
        .collect()
}

/// Assembles the end-to-end matrix `F_N Θ_N F_{N−1} ⋯ Θ_1 F_0` (`k_N×k_0`)
/// from the deterministic factor chain and the supplied fading cores.
pub fn end_to_end_matrix(
    model: &NetworkModel,
    precoders: &PrecoderSet,
    thetas: &[CMatrix],
) -> Result<CMatrix> {
    let n = model.hops();
    if thetas.len() != n {
        return Err(Error::DimensionMismatch {
            context: "fading core count".to_string(),
            expected: format!("{n}"),
            got: format!("{}", thetas.len()),
        });
    }
    for (idx, th) in thetas.iter().enumerate() {
        let i = idx + 1;
        if th.nrows() != model.dim(i) || th.ncols() != model.dim(i - 1) {
            return Err(Error::DimensionMismatch {
                context: format!("fading core for hop {i}"),
                expected: format!("{}x{}", model.dim(i), model.dim(i - 1)),
                got: format!("{}x{}", th.nrows(), th.ncols()),
            });
        }
    }
    let chain = assemble_chain(model, precoders)?;
    let mut acc = chain.factor(0).clone();
    for (idx, th) in thetas.iter().enumerate() {
        acc = chain.factor(idx + 1) * (th * acc);
    }
    Ok(acc)
}

/// Eigenvalues of `GGᴴ`, negative round-off clamped to zero, ascending.
pub fn gram_eigenvalues(g: &CMatrix) -> Result<Vec<f64>> {
    linalg::require_finite(g, "end-to-end matrix")?;
    let gram = g * g.adjoint();
    let eigs = linalg::hermitian_eigenvalues(&gram, "end-to-end gram")?;
    Ok(eigs.into_iter().map(|v| v.max(0.0)).collect())
}

/// `(1/k_0)·log₂det(I + η·GGᴴ)` from precomputed gram eigenvalues.
pub fn mi_from_eigenvalues(eigs: &[f64], eta: f64, k0: usize) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    eigs.iter().map(|&l| (eta * l).ln_1p()).sum::<f64>() / (k0 as f64 * ln2)
}

/// Instantaneous mutual information of one explicit end-to-end matrix, in
/// bits per source antenna.
pub fn mi_from_matrix(g: &CMatrix, eta: f64, k0: usize) -> Result<f64> {
    Ok(mi_from_eigenvalues(&gram_eigenvalues(g)?, eta, k0))
}

/// Samples one trial's fading and returns its instantaneous mutual
/// information in bits per source antenna.
pub fn instantaneous_mi(
    model: &NetworkModel,
    precoders: &PrecoderSet,
    factory: &StreamFactory,
    trial: u64,
) -> Result<f64> {
    let thetas = sample_thetas(model, factory, trial);
    let g = end_to_end_matrix(model, precoders, &thetas)?;
    mi_from_matrix(&g, model.eta(), model.dim(0))
}

/// Empirical spectrum of `GGᴴ` (uniform weight `1/k_N` per eigenvalue).
pub fn empirical_gram_spectrum(g: &CMatrix) -> Result<SpectralDistribution> {
    SpectralDistribution::from_gram(&g.adjoint())
}

/// Deterministic pairwise sum (fixed reduction order, improved roundoff).
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = pairwise_sum(xs) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, var.max(0.0).sqrt())
}

/// Runs the full sweep: for every grid point, the asymptotic limit (solver
/// failures are recorded on the affected record, not fatal) and the Monte
/// Carlo mean/std over `trials` seeded draws.
///
/// The fading of trial `t` is independent of the grid, so each trial's gram
/// eigenvalues are computed once and reused across all noise levels.
pub fn run_sweep(
    model: &NetworkModel,
    precoders: &PrecoderSet,
    config: &McConfig,
) -> Result<SweepResult> {
    let factory = StreamFactory::new(config.master_seed);
    let base_input = AsymptoticInput::from_model(model, precoders)?;
    let k0 = model.dim(0);

    let mut eig_cache = Vec::with_capacity(config.trials);
    for t in 0..config.trials {
        let thetas = sample_thetas(model, &factory, t as u64);
        let g = end_to_end_matrix(model, precoders, &thetas)?;
        eig_cache.push(gram_eigenvalues(&g)?);
    }

    let mut records = Vec::with_capacity(config.eta_grid.len());
    for &eta in &config.eta_grid {
        let (mi_asymptotic, solver_error) = match base_input
            .with_eta(eta)
            .and_then(|input| asymptotic::asymptotic_mi(&input))
        {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let mis: Vec<f64> = eig_cache
            .iter()
            .map(|eigs| mi_from_eigenvalues(eigs, eta, k0))
            .collect();
        let (mean, std) = mean_std(&mis);
        records.push(SweepRecord {
            snr_db: 10.0 * eta.log10(),
            eta,
            mi_asymptotic,
            solver_error,
            mi_mc_mean: mean,
            mi_mc_std: std,
            trials: config.trials,
        });
    }
    Ok(SweepResult { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotic::chain_s_transform;
    use crate::linalg::{frobenius_distance, haar_unitary};
    use crate::precoding::equal_power_precoders;
    use crate::channel::{sample_channel, CorrelationSpec};
    use num_complex::Complex64;

    fn identity_chain(dims: &[usize], eta: f64) -> (NetworkModel, PrecoderSet) {
        let model = NetworkModel::iid(dims, eta).unwrap();
        let p = equal_power_precoders(&model).unwrap();
        (model, p)
    }

    #[test]
    fn identity_chain_passes_fading_through() {
        let (model, p) = identity_chain(&[3, 3], 1.0);
        let f = StreamFactory::new(11);
        let thetas = sample_thetas(&model, &f, 0);
        let g = end_to_end_matrix(&model, &p, &thetas).unwrap();
        assert!(frobenius_distance(&g, &thetas[0]) < 1e-12);
    }

    #[test]
    fn zero_fading_annihilates() {
        let (model, p) = identity_chain(&[3, 4, 3], 1.0);
        let thetas = vec![CMatrix::zeros(4, 3), CMatrix::zeros(3, 4)];
        let g = end_to_end_matrix(&model, &p, &thetas).unwrap();
        assert!(g.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn factored_and_direct_products_agree() {
        // The chain can be read two ways: factors F_i interleaved with the
        // fading cores, or correlated channels H_i interleaved with the
        // precoders. Both must give the same matrix.
        let spec = |r| CorrelationSpec::Exponential { r };
        let model = NetworkModel::from_correlations(
            &[8, 8, 8, 8],
            &[
                (spec(0.5), spec(0.3)),
                (spec(0.2), spec(0.6)),
                (spec(0.4), spec(0.1)),
            ],
            2.0,
            None,
        )
        .unwrap();
        let f = StreamFactory::new(12);
        let p = crate::precoding::random_unitary_precoders(&model, &mut f.precoder(0)).unwrap();

        for trial in 0..3u64 {
            let thetas = sample_thetas(&model, &f, trial);
            let g = end_to_end_matrix(&model, &p, &thetas).unwrap();

            let mut direct = p.level(0).clone();
            for i in 1..=3usize {
                let h = model.stage(i).c_r_sqrt()
                    * &thetas[i - 1]
                    * model.stage(i).c_t_sqrt();
                direct = &h * direct;
                if i < 3 {
                    direct = p.level(i) * direct;
                }
            }
            assert!(
                frobenius_distance(&g, &direct) < 1e-10,
                "trial {trial}: factored and direct forms disagree"
            );
        }
    }

    #[test]
    fn scalar_chain_mi_is_a_log_determinant() {
        let g = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let mi = mi_from_matrix(&g, 3.0, 1).unwrap();
        assert!((mi - 2.0).abs() < 1e-12, "log₂(1+3·1) = 2, got {mi}");
    }

    #[test]
    fn mi_vanishes_with_snr() {
        let (model, p) = identity_chain(&[6, 6], 1e-12);
        let f = StreamFactory::new(13);
        let mi = instantaneous_mi(&model, &p, &f, 0).unwrap();
        assert!(mi.abs() < 1e-9, "mi at vanishing snr: {mi}");
        assert!(mi >= 0.0);
    }

    #[test]
    fn single_draw_tracks_the_limit_at_moderate_dimension() {
        let (model, p) = identity_chain(&[100, 100], 10.0);
        let f = StreamFactory::new(14);
        let mi = instantaneous_mi(&model, &p, &f, 0).unwrap();
        let h = (41.0f64.sqrt() - 1.0) / 20.0;
        let limit = -2.0 * h.log2() - (1.0 - h) * std::f64::consts::LOG2_E;
        assert!(
            (mi - limit).abs() / limit < 0.02,
            "single draw {mi} vs limit {limit}"
        );
    }

    #[test]
    fn unitary_rotations_leave_mi_unchanged() {
        let (model, p) = identity_chain(&[8, 8], 5.0);
        let f = StreamFactory::new(15);
        let thetas = sample_thetas(&model, &f, 0);
        let g = end_to_end_matrix(&model, &p, &thetas).unwrap();
        let u = haar_unitary(8, &mut f.aux(1));
        let v = haar_unitary(8, &mut f.aux(2));
        let rotated = &u * &g * &v;
        let a = mi_from_matrix(&g, 5.0, 8).unwrap();
        let b = mi_from_matrix(&rotated, 5.0, 8).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn gram_spectrum_of_simple_matrices() {
        let id = CMatrix::identity(3, 3);
        let s = empirical_gram_spectrum(&id).unwrap();
        assert_eq!(s.atoms().len(), 1);
        assert!((s.atoms()[0].eigenvalue - 1.0).abs() < 1e-14);
        assert!((s.atoms()[0].weight - 1.0).abs() < 1e-14);

        let mut d = CMatrix::zeros(2, 2);
        d[(0, 0)] = Complex64::new(1.0, 0.0);
        d[(1, 1)] = Complex64::new(2.0, 0.0);
        let s = empirical_gram_spectrum(&d).unwrap();
        let atoms = s.atoms();
        assert_eq!(atoms.len(), 2);
        assert!((atoms[0].eigenvalue - 1.0).abs() < 1e-14 && (atoms[0].weight - 0.5).abs() < 1e-14);
        assert!((atoms[1].eigenvalue - 4.0).abs() < 1e-14 && (atoms[1].weight - 0.5).abs() < 1e-14);
    }

    #[test]
    fn empirical_s_transform_matches_the_composition() {
        let (model, p) = identity_chain(&[400, 400, 400], 1.0);
        let f = StreamFactory::new(16);
        let thetas = sample_thetas(&model, &f, 0);
        let g = end_to_end_matrix(&model, &p, &thetas).unwrap();
        let spectrum = empirical_gram_spectrum(&g).unwrap();
        let input = AsymptoticInput::from_model(&model, &p).unwrap();
        let z = -0.5;
        let predicted = chain_s_transform(&input, z).unwrap();
        let empirical = spectrum.s_transform(z).unwrap();
        assert!(
            (empirical - predicted).abs() / predicted.abs() < 0.05,
            "empirical {empirical} vs composition {predicted}"
        );
    }

    #[test]
    fn sweep_is_deterministic() {
        let (model, p) = identity_chain(&[10, 10], 1.0);
        let config = McConfig::new(1, 77, vec![1.0, 10.0]).unwrap();
        let a = run_sweep(&model, &p, &config).unwrap();
        let b = run_sweep(&model, &p, &config).unwrap();
        assert_eq!(a, b, "sweep must be a pure function of its config");
        assert_eq!(a.records.len(), 2);
        assert!(a.records[0].eta < a.records[1].eta);
        assert!(a.records.iter().all(|r| r.mi_mc_std == 0.0));
    }

    #[test]
    fn sweep_tracks_the_limit_at_moderate_dimension() {
        let (model, p) = identity_chain(&[100, 100], 1.0);
        let config = McConfig::new(5, 78, vec![1.0, 10.0]).unwrap();
        let result = run_sweep(&model, &p, &config).unwrap();
        for rec in &result.records {
            let asym = rec.mi_asymptotic.expect("solver should converge");
            assert!(rec.solver_error.is_none());
            let rel = (rec.mi_mc_mean - asym).abs() / asym;
            assert!(
                rel < 0.02,
                "eta {}: mc {} vs asymptotic {asym} (rel {rel})",
                rec.eta,
                rec.mi_mc_mean
            );
            assert!(rec.mi_mc_std >= 0.0);
        }
    }

    #[test]
    fn concentration_improves_with_dimension() {
        let trials = 50;
        let spread = |k: usize| -> f64 {
            let (model, p) = identity_chain(&[k, k], 10.0);
            let f = StreamFactory::new(79);
            let mis: Vec<f64> = (0..trials)
                .map(|t| instantaneous_mi(&model, &p, &f, t).unwrap())
                .collect();
            let (mean, std) = mean_std(&mis);
            std / mean
        };
        let big = spread(100);
        let small = spread(10);
        assert!(
            big < small,
            "relative spread should shrink with dimension: K=100 {big} vs K=10 {small}"
        );
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::new(0, 1, vec![1.0]).is_err());
        assert!(McConfig::new(1, 1, vec![]).is_err());
        assert!(McConfig::new(1, 1, vec![1.0, 1.0]).is_err());
        assert!(McConfig::new(1, 1, vec![2.0, 1.0]).is_err());
        assert!(McConfig::new(1, 1, vec![-1.0, 1.0]).is_err());
        assert!(McConfig::new(1, 1, vec![0.5, 1.5]).is_ok());
    }

    #[test]
    fn sample_channel_and_cores_share_streams_consistently() {
        // sample_thetas(stage i) must use the (trial, stage) stream so a
        // trial is reproducible piecewise.
        let (model, _) = identity_chain(&[4, 4, 4], 1.0);
        let f = StreamFactory::new(80);
        let thetas = sample_thetas(&model, &f, 5);
        let direct1 = sample_channel(model.stage(1), &mut f.channel(5, 1));
        let direct2 = sample_channel(model.stage(2), &mut f.channel(5, 2));
        assert_eq!(thetas[0], direct1);
        assert_eq!(thetas[1], direct2);
    }
}
