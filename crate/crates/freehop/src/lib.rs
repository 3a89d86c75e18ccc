//! Asymptotic spectral analysis of multi-hop precode-and-forward MIMO relay
//! chains.
//!
//! A source with `k_0` antennas talks to a destination with `k_N` antennas
//! through `N − 1` relay levels. Each hop is a Kronecker-correlated Rayleigh
//! channel, each transmitting level applies a linear precoder, and relays
//! forward without decoding. As all antenna counts grow large at fixed
//! ratios, the end-to-end mutual information per source antenna converges to
//! a deterministic limit governed by a small coupled fixed-point system over
//! the spectra of the per-hop deterministic factors.
//!
//! This crate computes that limit, constructs the precoders that maximize
//! it, and cross-validates everything against a seeded Monte Carlo simulator
//! of the finite chain:
//!
//! * [`spectra`] — atomic spectral measures and their multiplicative
//!   free-probability transforms (ψ, ψ⁻¹, S);
//! * [`channel`] — correlation models, fading draws, exact covariance
//!   propagation through the chain;
//! * [`precoding`] — equal-power, eigenbasis-aligned, and random-unitary
//!   precoder constructions under per-level power budgets;
//! * [`asymptotic`] — the fixed-point system, the mutual-information
//!   functional, its noise derivative, and the chained transform identities
//!   used for validation;
//! * [`montecarlo`] — finite-dimension simulation: end-to-end matrices,
//!   instantaneous mutual information, seeded SNR sweeps;
//! * [`config`] / [`experiment`] / [`validation`] — the file-driven
//!   experiment layer behind the `freehop` command-line tool.

pub mod asymptotic;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod montecarlo;
pub mod precoding;
pub mod rng;
pub mod spectra;
pub mod validation;

pub use asymptotic::{AsymptoticInput, FixedPointSolution};
pub use channel::{CorrelationSpec, NetworkModel};
pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use precoding::{PowerAllocation, PrecoderSet};
pub use spectra::SpectralDistribution;
