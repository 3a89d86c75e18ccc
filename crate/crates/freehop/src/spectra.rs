//! Discrete spectral measures and their multiplicative free-probability
//! transforms.
//!
//! A [`SpectralDistribution`] is a finite atomic probability measure on the
//! nonnegative reals — in practice the empirical eigenvalue distribution of a
//! Hermitian PSD matrix. Three transforms drive everything downstream:
//!
//! * the moment generating series `ψ(s) = Σ_k w_k · s·λ_k / (1 − s·λ_k)`,
//!   evaluated on the negative real axis where it is strictly increasing from
//!   `−positive_mass` up to 0;
//! * its functional inverse `ψ⁻¹(z)`, recovered by bracketed bisection; and
//! * the S-transform `S(z) = ((z+1)/z)·ψ⁻¹(z)`, the multiplicative analogue
//!   of the log-characteristic function: S-transforms of free factors
//!   multiply.
//!
//! Working with atomic measures keeps every expectation an exact finite sum,
//! and large-matrix limits are represented simply by empirical spectra at the
//! dimension under study.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Eigenvalues below this are considered corrupt input rather than round-off;
/// values in `[EIGENVALUE_FLOOR, 0)` are clamped to zero.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// Weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Residual target for the ψ⁻¹ bisection.
const PSI_INVERSE_RESIDUAL: f64 = 1e-12;

/// Iteration cap for the ψ⁻¹ bisection.
const PSI_INVERSE_MAX_ITER: usize = 200;

/// One atom of a spectral measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub eigenvalue: f64,
    pub weight: f64,
}

/// Finite atomic probability measure on the nonnegative reals.
///
/// Invariants (enforced on construction): weights in (0, 1] summing to one
/// within 1e-12, eigenvalues nonnegative after round-off clamping, atoms
/// sorted ascending with (near-)duplicate eigenvalues merged.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDistribution {
    atoms: Vec<Atom>,
    positive_mass: f64,
}

impl SpectralDistribution {
    /// Builds a measure from `(eigenvalue, weight)` pairs.
    pub fn from_atoms(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        let mut atoms = Vec::with_capacity(pairs.len());
        for &(eigenvalue, weight) in pairs {
            if !eigenvalue.is_finite() || !weight.is_finite() {
                return Err(Error::NonFinite("spectral atom".to_string()));
            }
            if weight <= 0.0 || weight > 1.0 + WEIGHT_SUM_TOL {
                return Err(Error::AtomWeight { weight });
            }
            if eigenvalue < EIGENVALUE_FLOOR {
                return Err(Error::AtomEigenvalue {
                    value: eigenvalue,
                    floor: EIGENVALUE_FLOOR,
                });
            }
            atoms.push(Atom {
                eigenvalue: eigenvalue.max(0.0),
                weight,
            });
        }

        atoms.sort_by(|a, b| {
            a.eigenvalue
                .partial_cmp(&b.eigenvalue)
                .expect("finiteness checked above")
        });

        // Merge eigenvalues equal up to relative round-off, pooling weight at
        // the weighted mean.
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last)
                    if atom.eigenvalue - last.eigenvalue
                        <= 1e-12 * last.eigenvalue.abs().max(1.0) =>
                {
                    let w = last.weight + atom.weight;
                    last.eigenvalue = (last.eigenvalue * last.weight
                        + atom.eigenvalue * atom.weight)
                        / w;
                    last.weight = w;
                }
                _ => merged.push(atom),
            }
        }

        let sum: f64 = merged.iter().map(|a| a.weight).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum {
                sum,
                tol: WEIGHT_SUM_TOL,
            });
        }

        let positive_mass = merged
            .iter()
            .filter(|a| a.eigenvalue > 0.0)
            .map(|a| a.weight)
            .sum();

        Ok(SpectralDistribution {
            atoms: merged,
            positive_mass,
        })
    }

    /// Point mass at `eigenvalue`.
    pub fn point(eigenvalue: f64) -> Result<Self> {
        Self::from_atoms(&[(eigenvalue, 1.0)])
    }

    /// Uniform measure on a list of eigenvalues.
    pub fn from_eigenvalues(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        let w = 1.0 / values.len() as f64;
        let pairs: Vec<(f64, f64)> = values.iter().map(|&v| (v, w)).collect();
        Self::from_atoms(&pairs)
    }

    /// Empirical spectrum of `AᴴA` for an `m×n` matrix `A`: the uniform
    /// measure on its `n` eigenvalues (squared singular values of `A`, padded
    /// with zeros when `A` has fewer than `n` nonzero singular values).
    pub fn from_gram(a: &CMatrix) -> Result<Self> {
        linalg::require_finite(a, "gram spectrum input")?;
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::EmptySpectrum);
        }
        let gram: DMatrix<Complex64> = a.adjoint() * a;
        let values = linalg::hermitian_eigenvalues(&gram, "gram spectrum")?;
        for &v in &values {
            if v < EIGENVALUE_FLOOR {
                return Err(Error::AtomEigenvalue {
                    value: v,
                    floor: EIGENVALUE_FLOOR,
                });
            }
        }
        Self::from_eigenvalues(&values)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Total weight on strictly positive eigenvalues. The transforms below
    /// are defined on targets in `(-positive_mass, 0)`.
    pub fn positive_mass(&self) -> f64 {
        self.positive_mass
    }

    /// Expectation `Σ_k w_k f(λ_k)` of a scalar function under the measure.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let mut acc = 0.0;
        for atom in &self.atoms {
            let v = f(atom.eigenvalue);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "expectation integrand at eigenvalue {}",
                    atom.eigenvalue
                )));
            }
            acc += atom.weight * v;
        }
        Ok(acc)
    }

    /// Mean eigenvalue.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.eigenvalue).sum()
    }

    /// Measure with every eigenvalue scaled by `c > 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "spectral scaling factor must be positive and finite, got {c}"
            )));
        }
        let pairs: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .map(|a| (c * a.eigenvalue, a.weight))
            .collect();
        Self::from_atoms(&pairs)
    }

    /// Moment generating series `ψ(s) = Σ_k w_k · sλ_k/(1 − sλ_k)`, defined
    /// here for `s < 0` where every denominator is ≥ 1. Strictly increasing
    /// in `s`, with range `(-positive_mass, 0]`.
    pub fn psi(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s >= 0.0 {
            return Err(Error::PsiDomain { s });
        }
        let mut acc = 0.0;
        for atom in &self.atoms {
            if atom.eigenvalue == 0.0 {
                continue;
            }
            let t = s * atom.eigenvalue;
            // t/(1−t) → −1 as t → −∞; guard the overflow case explicitly.
            let term = if t.is_infinite() { -1.0 } else { t / (1.0 - t) };
            acc += atom.weight * term;
        }
        Ok(acc)
    }

    /// Functional inverse of [`psi`](Self::psi): the unique `s < 0` with
    /// `ψ(s) = z`, for targets `z` strictly inside `(-positive_mass, 0)`.
    ///
    /// Found by bisection: ψ is strictly increasing on the negative axis, so
    /// after geometric expansion of the left endpoint the root is bracketed
    /// and bisection converges unconditionally. The result satisfies
    /// `|ψ(s) − z| ≤ 1e-12`.
    pub fn psi_inverse(&self, z: f64) -> Result<f64> {
        if !z.is_finite() || z >= 0.0 || z <= -self.positive_mass {
            return Err(Error::PsiInverseDomain {
                z,
                mass: self.positive_mass,
            });
        }

        // Expand the left endpoint until ψ(lo) ≤ z. The range of ψ reaches
        // down to −positive_mass < z, so this terminates.
        let mut lo = -1.0f64;
        let mut expansions = 0usize;
        while self.psi(lo)? > z {
            lo *= 2.0;
            expansions += 1;
            if expansions > 1100 || !lo.is_finite() {
                return Err(Error::NoConvergence {
                    context: "psi_inverse bracket expansion".to_string(),
                    iterations: expansions,
                    residual: self.psi(lo)? - z,
                });
            }
        }
        let mut hi = -1e-300f64;
        if self.psi(hi)? < z {
            // Target so close to zero that the root sits right of the guard
            // endpoint; the residual there is already far below tolerance.
            return Ok(hi);
        }

        // Plain bisection, run to bracket exhaustion so the root is pinned to
        // machine precision (important where ψ is nearly flat).
        let mut s = 0.5 * (lo + hi);
        for _ in 0..PSI_INVERSE_MAX_ITER {
            s = 0.5 * (lo + hi);
            if s == lo || s == hi {
                break;
            }
            if self.psi(s)? > z {
                hi = s;
            } else {
                lo = s;
            }
        }

        let residual = (self.psi(s)? - z).abs();
        if residual > PSI_INVERSE_RESIDUAL {
            return Err(Error::NoConvergence {
                context: "psi_inverse bisection".to_string(),
                iterations: PSI_INVERSE_MAX_ITER,
                residual,
            });
        }
        Ok(s)
    }

    /// S-transform `S(z) = ((z+1)/z) · ψ⁻¹(z)` on `z ∈ (-positive_mass, 0)`.
    ///
    /// This is the multiplicative transform: for asymptotically free factors
    /// the S-transform of the product is the product of the S-transforms.
    pub fn s_transform(&self, z: f64) -> Result<f64> {
        let s = self.psi_inverse(z)?;
        Ok((z + 1.0) / z * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_atom() -> SpectralDistribution {
        SpectralDistribution::point(1.0).unwrap()
    }

    #[test]
    fn scalar_gram_spectrum() {
        let a = CMatrix::from_element(1, 1, Complex64::new(2.0, 0.0));
        let d = SpectralDistribution::from_gram(&a).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert!((d.atoms()[0].eigenvalue - 4.0).abs() < 1e-12);
        assert!((d.atoms()[0].weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_gram_merges_to_single_atom() {
        let d = SpectralDistribution::from_gram(&CMatrix::identity(2, 2)).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert!((d.atoms()[0].eigenvalue - 1.0).abs() < 1e-12);
        assert!((d.atoms()[0].weight - 1.0).abs() < 1e-12);
        assert!((d.positive_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn atoms_sorted_and_clamped() {
        let d = SpectralDistribution::from_atoms(&[(3.0, 0.25), (-5e-11, 0.5), (1.0, 0.25)])
            .unwrap();
        let eigs: Vec<f64> = d.atoms().iter().map(|a| a.eigenvalue).collect();
        assert_eq!(eigs, vec![0.0, 1.0, 3.0]);
        assert!((d.positive_mass() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_atoms_rejected() {
        assert!(matches!(
            SpectralDistribution::from_atoms(&[(1.0, 0.5), (2.0, 0.6)]),
            Err(Error::WeightSum { .. })
        ));
        assert!(matches!(
            SpectralDistribution::from_atoms(&[(-1.0, 1.0)]),
            Err(Error::AtomEigenvalue { .. })
        ));
        assert!(matches!(
            SpectralDistribution::from_atoms(&[(1.0, 0.0), (2.0, 1.0)]),
            Err(Error::AtomWeight { .. })
        ));
        assert!(matches!(
            SpectralDistribution::from_atoms(&[]),
            Err(Error::EmptySpectrum)
        ));
    }

    #[test]
    fn psi_single_atom_closed_form() {
        let d = unit_atom();
        assert!((d.psi(-1.0).unwrap() - (-0.5)).abs() < 1e-15);
    }

    #[test]
    fn psi_vanishes_at_the_origin() {
        let d = SpectralDistribution::from_atoms(&[(0.5, 0.5), (4.0, 0.5)]).unwrap();
        assert!(d.psi(-1e-12).unwrap().abs() < 1e-10);
    }

    #[test]
    fn psi_rejects_nonnegative_arguments() {
        let d = unit_atom();
        assert!(matches!(d.psi(0.0), Err(Error::PsiDomain { .. })));
        assert!(matches!(d.psi(2.0), Err(Error::PsiDomain { .. })));
    }

    #[test]
    fn psi_inverse_single_atom_closed_form() {
        // For a point mass at a: ψ⁻¹(z) = z / (a (1 + z)).
        let d = SpectralDistribution::point(2.0).unwrap();
        let s = d.psi_inverse(-0.5).unwrap();
        assert!((s - (-0.5)).abs() < 1e-10);

        let d1 = unit_atom();
        assert!((d1.psi_inverse(-0.5).unwrap() - (-1.0)).abs() < 1e-10);
    }

    #[test]
    fn psi_inverse_domain_errors() {
        let d = unit_atom();
        assert!(matches!(
            d.psi_inverse(0.0),
            Err(Error::PsiInverseDomain { .. })
        ));
        assert!(matches!(
            d.psi_inverse(-1.0),
            Err(Error::PsiInverseDomain { .. })
        ));
        assert!(matches!(
            d.psi_inverse(-1.5),
            Err(Error::PsiInverseDomain { .. })
        ));
        // A measure with no positive mass has an empty inverse domain.
        let zero = SpectralDistribution::point(0.0).unwrap();
        assert!(matches!(
            zero.psi_inverse(-0.1),
            Err(Error::PsiInverseDomain { .. })
        ));
    }

    #[test]
    fn s_transform_of_point_masses() {
        let d = unit_atom();
        for z in [-0.9, -0.5, -0.1, -0.01] {
            assert!((d.s_transform(z).unwrap() - 1.0).abs() < 1e-9);
        }
        let d4 = SpectralDistribution::point(4.0).unwrap();
        assert!((d4.s_transform(-0.3).unwrap() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn expectation_hand_cases() {
        let d3 = SpectralDistribution::point(3.0).unwrap();
        assert!((d3.expect(|x| x).unwrap() - 3.0).abs() < 1e-15);

        let d = SpectralDistribution::from_atoms(&[(0.0, 0.5), (2.0, 0.5)]).unwrap();
        assert!((d.expect(|x| x * x).unwrap() - 2.0).abs() < 1e-15);
        assert!((d.mean() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_non_finite_integrand() {
        let d = SpectralDistribution::from_atoms(&[(0.0, 0.5), (2.0, 0.5)]).unwrap();
        assert!(matches!(
            d.expect(|x| 1.0 / x),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn scaling_scales_the_s_transform() {
        let d = SpectralDistribution::from_atoms(&[(0.5, 0.25), (1.0, 0.5), (3.0, 0.25)])
            .unwrap();
        let c = 2.5;
        let scaled = d.scale(c).unwrap();
        for z in [-0.8, -0.5, -0.2] {
            let lhs = scaled.s_transform(z).unwrap();
            let rhs = d.s_transform(z).unwrap() / c;
            assert!((lhs - rhs).abs() < 1e-9, "z={z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn psi_round_trip_on_a_mixed_spectrum() {
        let d = SpectralDistribution::from_atoms(&[(0.0, 0.2), (0.7, 0.3), (2.0, 0.5)])
            .unwrap();
        for s in [-1e-3, -0.5, -3.0, -80.0] {
            let z = d.psi(s).unwrap();
            let back = d.psi_inverse(z).unwrap();
            assert!((back - s).abs() < 1e-9, "s={s}, back={back}");
        }
    }
}
