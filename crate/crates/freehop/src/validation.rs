//! Numerical self-checks tying the transform machinery, the fixed-point
//! solver, and the Monte Carlo simulator together.
//!
//! Each check exercises one identity the implementation relies on, computed
//! along two independent routes, and reports the observed residual. The
//! empirical-side S-transform is injectable so the suite itself can be
//! tested: corrupting the transform must make the gram-flip check fail.

use crate::asymptotic::{
    asymptotic_mi, chain_s_transform, transform_identity_residual, AsymptoticInput,
};
use crate::channel::NetworkModel;
use crate::error::Result;
use crate::linalg::gaussian_matrix;
use crate::montecarlo::{empirical_gram_spectrum, end_to_end_matrix, instantaneous_mi, sample_thetas};
use crate::precoding::{assemble_chain, equal_power_precoders};
use crate::rng::StreamFactory;
use crate::spectra::SpectralDistribution;

/// Suite size: `Quick` keeps matrices small for fast feedback, `Full` runs
/// the dimensions the documented tolerances are stated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationLevel {
    Quick,
    Full,
}

impl ValidationLevel {
    pub fn label(self) -> &'static str {
        match self {
            ValidationLevel::Quick => "quick",
            ValidationLevel::Full => "full",
        }
    }
}

impl std::str::FromStr for ValidationLevel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "quick" => Ok(ValidationLevel::Quick),
            "full" => Ok(ValidationLevel::Full),
            other => Err(format!("unknown level {other:?}; expected quick or full")),
        }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Residuals and the quantities behind them, for the report.
    pub detail: String,
}

/// All check outcomes of one suite run.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub level: ValidationLevel,
    pub master_seed: u64,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One line per check plus a summary line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        out.push_str(&format!(
            "{passed}/{} checks passed (level {}, seed {})\n",
            self.checks.len(),
            self.level.label(),
            self.master_seed
        ));
        out
    }
}

/// The S-transform evaluation the empirical side of each check goes through.
pub type TransformFn<'a> = dyn Fn(&SpectralDistribution, f64) -> Result<f64> + 'a;

/// Runs the suite with the library's own transforms.
pub fn run_validation_suite(level: ValidationLevel, master_seed: u64) -> ValidationReport {
    run_validation_suite_with(level, master_seed, &|d: &SpectralDistribution, z: f64| {
        d.s_transform(z)
    })
}

/// Runs the suite with an injected empirical-side S-transform. The seam
/// exists so tests can prove the suite detects a broken transform.
pub fn run_validation_suite_with(
    level: ValidationLevel,
    master_seed: u64,
    st: &TransformFn,
) -> ValidationReport {
    let factory = StreamFactory::new(master_seed);
    let checks = vec![
        check("gram_flip_identity", || flip_check(&factory, st)),
        check("wishart_s_transform_limit", || {
            wishart_check(level, &factory, st)
        }),
        check("gaussian_product_freeness", || {
            freeness_check(level, &factory, st)
        }),
        check("chain_composition", || chain_check(level, &factory, st)),
        check("psi_chain_identity", || psi_chain_check(level, &factory)),
        check("mc_vs_asymptotic", || mc_check(&factory)),
    ];
    ValidationReport {
        level,
        master_seed,
        checks,
    }
}

fn check(name: &str, run: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match run() {
        Ok((passed, detail)) => CheckResult {
            name: name.to_string(),
            passed,
            detail,
        },
        Err(e) => CheckResult {
            name: name.to_string(),
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

const PROBE_POINTS: [f64; 3] = [-0.2, -0.5, -0.8];

/// For any finite m×n matrix A, the S-transforms of the spectra of AAᴴ and
/// AᴴA are tied exactly: S_{AAᴴ}(z) = (z+1)/(z+ξ) · S_{AᴴA}(z/ξ), ξ = n/m.
/// This holds per draw, so the residual is pure numerics.
fn flip_check(factory: &StreamFactory, st: &TransformFn) -> Result<(bool, String)> {
    let (m, n) = (16usize, 24usize);
    let mut rng = factory.aux(10);
    let a = gaussian_matrix(m, n, 1.0, &mut rng);
    let esd_left = SpectralDistribution::from_gram(&a.adjoint())?; // AAᴴ
    let esd_right = SpectralDistribution::from_gram(&a)?; // AᴴA
    let xi = n as f64 / m as f64;
    let mut worst = 0.0f64;
    for &z in &PROBE_POINTS {
        let lhs = st(&esd_left, z)?;
        let rhs = (z + 1.0) / (z + xi) * esd_right.s_transform(z / xi)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok((
        worst < 1e-8,
        format!("max |S_left − flipped S_right| = {worst:.3e} over z ∈ {PROBE_POINTS:?} ({m}×{n} draw)"),
    ))
}

/// Empirical S-transform of a Gaussian gram BBᴴ (B m×n, entry variance 1/n)
/// against the limit 1/(1 + (m/n)·z), at two sizes: the mean absolute
/// residual must shrink as the matrix grows. (The mean-absolute form tracks
/// the 1/m fluctuation scale the convergence claim is about; the residual of
/// the averaged transform would stall at the far smaller ensemble bias and
/// make the size comparison a coin flip.)
fn wishart_check(
    level: ValidationLevel,
    factory: &StreamFactory,
    st: &TransformFn,
) -> Result<(bool, String)> {
    let sizes: [(usize, usize); 2] = match level {
        ValidationLevel::Quick => [(100, 200), (200, 400)],
        ValidationLevel::Full => [(200, 400), (400, 800)],
    };
    let draws = 8u64;
    let z = -0.5;
    let mut residuals = [0.0f64; 2];
    for (which, &(m, n)) in sizes.iter().enumerate() {
        let zeta = m as f64 / n as f64;
        let closed = 1.0 / (1.0 + zeta * z);
        let mut mean_abs = 0.0;
        for draw in 0..draws {
            let mut rng = factory.aux(20 + 10 * which as u64 + draw);
            let b = gaussian_matrix(m, n, 1.0 / n as f64, &mut rng);
            let esd = SpectralDistribution::from_gram(&b.adjoint())?; // BBᴴ
            mean_abs += (st(&esd, z)? - closed).abs();
        }
        residuals[which] = mean_abs / draws as f64;
    }
    let [small, big] = residuals;
    let passed = big < small && big < 0.01 && small < 0.02;
    Ok((
        passed,
        format!(
            "mean |S_emp − S_limit| at z = {z}: {small:.3e} (m={}) → {big:.3e} (m={}), {draws} draws each",
            sizes[0].0, sizes[1].0
        ),
    ))
}

/// Independent square Gaussians are asymptotically free: the S-transform of
/// the product's gram factors into the individual gram S-transforms.
fn freeness_check(
    level: ValidationLevel,
    factory: &StreamFactory,
    st: &TransformFn,
) -> Result<(bool, String)> {
    let (k, tol) = match level {
        ValidationLevel::Quick => (200usize, 0.08),
        ValidationLevel::Full => (400usize, 0.05),
    };
    let draws = 3u64;
    let z = -0.5;
    let mut mean_rel = 0.0;
    for draw in 0..draws {
        let mut rng = factory.aux(40 + draw);
        let theta1 = gaussian_matrix(k, k, 1.0 / k as f64, &mut rng);
        let theta2 = gaussian_matrix(k, k, 1.0 / k as f64, &mut rng);
        let product = &theta2 * &theta1;
        let s_product = st(&empirical_gram_spectrum(&product)?, z)?;
        let s1 = empirical_gram_spectrum(&theta1)?.s_transform(z)?;
        let s2 = empirical_gram_spectrum(&theta2)?.s_transform(z)?;
        mean_rel += (s_product - s1 * s2).abs() / (s1 * s2).abs();
    }
    mean_rel /= draws as f64;
    Ok((
        mean_rel < tol,
        format!(
            "mean |S_prod/(S₁S₂) − 1| = {mean_rel:.3e} at z = {z} (dim {k}, {draws} draws, tol {tol})"
        ),
    ))
}

/// Empirical end-to-end gram S-transform of a sampled two-hop chain against
/// the per-factor composition formula.
fn chain_check(
    level: ValidationLevel,
    factory: &StreamFactory,
    st: &TransformFn,
) -> Result<(bool, String)> {
    let (k, tol) = match level {
        ValidationLevel::Quick => (100usize, 0.10),
        ValidationLevel::Full => (400usize, 0.05),
    };
    let model = NetworkModel::iid(&[k, k, k], 1.0)?;
    let precoders = equal_power_precoders(&model)?;
    let chain = assemble_chain(&model, &precoders)?;
    let input = AsymptoticInput::from_chain(&model, &chain)?;
    let thetas = sample_thetas(&model, factory, 7);
    let g = end_to_end_matrix(&model, &precoders, &thetas)?;
    let esd = empirical_gram_spectrum(&g)?;
    let mut worst = 0.0f64;
    for &z in &PROBE_POINTS {
        let emp = st(&esd, z)?;
        let composed = chain_s_transform(&input, z)?;
        worst = worst.max((emp - composed).abs() / composed.abs());
    }
    Ok((
        worst < tol,
        format!(
            "max relative gap {worst:.3e} over z ∈ {PROBE_POINTS:?} (two hops, dim {k}, tol {tol})"
        ),
    ))
}

/// The chained ψ identity evaluated on a sampled end-to-end spectrum: the
/// fixed-point system and the raw spectrum must tell the same story.
fn psi_chain_check(level: ValidationLevel, factory: &StreamFactory) -> Result<(bool, String)> {
    let (k, tol) = match level {
        ValidationLevel::Quick => (100usize, 0.06),
        ValidationLevel::Full => (400usize, 0.02),
    };
    let model = NetworkModel::iid(&[k, k], 1.0)?;
    let precoders = equal_power_precoders(&model)?;
    let input = AsymptoticInput::from_model(&model, &precoders)?;
    let thetas = sample_thetas(&model, factory, 8);
    let g = end_to_end_matrix(&model, &precoders, &thetas)?;
    let esd = empirical_gram_spectrum(&g)?;
    let s = -1.0;
    let residual = transform_identity_residual(&input, &esd, s)?;
    Ok((
        residual < tol,
        format!("chained ψ residual {residual:.3e} at s = {s} (one hop, dim {k}, tol {tol})"),
    ))
}

/// One finite sample of the mutual information against the asymptotic
/// formula at matched settings.
fn mc_check(factory: &StreamFactory) -> Result<(bool, String)> {
    let k = 100usize;
    let eta = 10.0;
    let model = NetworkModel::iid(&[k, k], eta)?;
    let precoders = equal_power_precoders(&model)?;
    let input = AsymptoticInput::from_model(&model, &precoders)?;
    let asymptotic = asymptotic_mi(&input)?;
    let sampled = instantaneous_mi(&model, &precoders, factory, 3)?;
    let rel = (sampled - asymptotic).abs() / asymptotic;
    Ok((
        rel < 0.025,
        format!(
            "sampled {sampled:.6} vs asymptotic {asymptotic:.6} bits (relative gap {rel:.3e}, dim {k}, η = {eta})"
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_is_green() {
        let report = run_validation_suite(ValidationLevel::Quick, 0);
        assert!(report.all_passed(), "\n{}", report.render());
    }

    #[test]
    fn corrupted_transform_trips_the_flip_check() {
        let flipped = |d: &SpectralDistribution, z: f64| d.s_transform(z).map(|s| -s);
        let report = run_validation_suite_with(ValidationLevel::Quick, 0, &flipped);
        assert!(!report.all_passed());
        let flip = report
            .checks
            .iter()
            .find(|c| c.name == "gram_flip_identity")
            .expect("flip check present");
        assert!(!flip.passed, "\n{}", report.render());
    }

    #[test]
    fn report_lists_every_check_once() {
        let report = run_validation_suite(ValidationLevel::Quick, 1);
        let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "gram_flip_identity",
                "wishart_s_transform_limit",
                "gaussian_product_freeness",
                "chain_composition",
                "psi_chain_identity",
                "mc_vs_asymptotic"
            ]
        );
        let rendered = report.render();
        assert_eq!(rendered.lines().count(), 7);
        for name in names {
            assert!(rendered.contains(name));
        }
    }

    #[test]
    fn level_parses_from_str() {
        assert_eq!("quick".parse(), Ok(ValidationLevel::Quick));
        assert_eq!("full".parse(), Ok(ValidationLevel::Full));
        assert!("medium".parse::<ValidationLevel>().is_err());
    }
}
