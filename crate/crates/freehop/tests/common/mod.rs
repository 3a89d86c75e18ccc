//! Oracles shared across integration tests. Everything here is computed
//! with scalar arithmetic only — no calls into the transform machinery the
//! tests are judging.
//!
//! Each test binary compiles this module independently and uses a subset.
#![allow(dead_code)]

/// SNR grid −5..20 dB in 5 dB steps.
pub fn snr_grid_db() -> Vec<f64> {
    (0..6).map(|i| -5.0 + 5.0 * i as f64).collect()
}

pub fn eta_of_db(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Unique root in (0,1) of h + η·h^(N+1) = 1, by bisection. The left side
/// grows from 0 to 1 + η, so the root exists and is unique.
pub fn symmetric_gain(n_hops: usize, eta: f64) -> f64 {
    let f = |h: f64| h + eta * h.powi(n_hops as i32 + 1) - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Mutual information of the symmetric all-identity chain with N hops:
/// −(N+1)·log₂h − N·(1−h)·log₂e at the gain root above.
pub fn symmetric_mi(n_hops: usize, eta: f64) -> f64 {
    let h = symmetric_gain(n_hops, eta);
    let n = n_hops as f64;
    -(n + 1.0) * h.log2() - n * (1.0 - h) * std::f64::consts::LOG2_E
}

/// ∫ log₂(1 + ηλ) dμ(λ) against the square-ratio Marchenko–Pastur density
/// √(λ(4−λ))/(2πλ) on [0,4], via the substitution λ = 4sin²(θ/2) which
/// turns it into the smooth integral (1/π)∫₀^π (1+cosθ)·log₂(1+4η sin²(θ/2)) dθ,
/// evaluated with Simpson's rule.
pub fn mp_log_moment(eta: f64) -> f64 {
    let n = 4000usize; // even
    let h = std::f64::consts::PI / n as f64;
    let f = |theta: f64| {
        let s = (theta / 2.0).sin();
        (1.0 + theta.cos()) * (1.0 + 4.0 * eta * s * s).log2()
    };
    let mut acc = f(0.0) + f(std::f64::consts::PI);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0 / std::f64::consts::PI
}

#[allow(dead_code)]
pub fn rel_gap(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}
