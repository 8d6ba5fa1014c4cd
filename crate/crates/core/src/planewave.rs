//! Finite complex combinations of phase functions e_xi(v) = e^{i<xi,v>},
//! the exact (closed-form) backend for the star product.

use num_complex::Complex64;

use crate::error::{MoyalError, Result};

/// Default absolute tolerance for merging nearby frequencies.
pub const FREQ_TOL: f64 = 1e-9;

/// One term c * e_xi.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveTerm {
    pub coeff: Complex64,
    pub freq: Vec<f64>,
}

/// A finite sum of plane waves with deduplicated frequencies.
///
/// Terms are kept sorted lexicographically by frequency so that equality
/// and involution round trips are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveSum {
    n: usize,
    terms: Vec<PlaneWaveTerm>,
    tol: f64,
}

impl PlaneWaveSum {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: Vec::new(),
            tol: FREQ_TOL,
        }
    }

    /// The constant function 1 = e_0.
    pub fn one(n: usize) -> Self {
        Self::single(Complex64::new(1.0, 0.0), vec![0.0; n])
    }

    /// A single wave c * e_xi.
    pub fn single(coeff: Complex64, freq: Vec<f64>) -> Self {
        let n = freq.len();
        Self::from_terms(n, vec![PlaneWaveTerm { coeff, freq }], FREQ_TOL)
    }

    /// Builds a sum, merging terms whose frequencies coincide within `tol`
    /// (max-norm) and dropping terms with zero coefficient.
    pub fn from_terms(n: usize, terms: Vec<PlaneWaveTerm>, tol: f64) -> Self {
        let mut terms: Vec<PlaneWaveTerm> = terms
            .into_iter()
            .filter(|t| t.coeff != Complex64::new(0.0, 0.0))
            .collect();
        for t in &terms {
            assert_eq!(t.freq.len(), n, "frequency dimension mismatch");
        }
        terms.sort_by(|a, b| {
            a.freq
                .iter()
                .zip(&b.freq)
                .map(|(x, y)| x.partial_cmp(y).expect("finite frequency"))
                .find(|o| *o != std::cmp::Ordering::Equal)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut merged: Vec<PlaneWaveTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last)
                    if last
                        .freq
                        .iter()
                        .zip(&t.freq)
                        .all(|(x, y)| (x - y).abs() <= tol) =>
                {
                    last.coeff += t.coeff;
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff.norm() > 0.0);
        Self {
            n,
            terms: merged,
            tol,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PlaneWaveTerm] {
        &self.terms
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Pointwise evaluation at x.
    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.n {
            return Err(MoyalError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let phase: f64 = t.freq.iter().zip(x).map(|(f, xi)| f * xi).sum();
            acc += t.coeff * Complex64::from_polar(1.0, phase);
        }
        Ok(acc)
    }

    /// Involution f*(v) = conj(f(v)): conjugate coefficients, negate frequencies.
    pub fn involution(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| PlaneWaveTerm {
                coeff: t.coeff.conj(),
                freq: t.freq.iter().map(|f| -f).collect(),
            })
            .collect();
        Self::from_terms(self.n, terms, self.tol)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::from_terms(self.n, terms, self.tol.max(other.tol))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(
            self.n,
            self.terms
                .iter()
                .map(|t| PlaneWaveTerm {
                    coeff: c * t.coeff,
                    freq: t.freq.clone(),
                })
                .collect(),
            self.tol,
        )
    }

    /// d/dx^j: multiplies each term by i * xi_j.
    pub fn partial_deriv(&self, j: usize) -> Result<Self> {
        if j >= self.n {
            return Err(MoyalError::DimensionMismatch {
                expected: self.n,
                got: j,
            });
        }
        Ok(Self::from_terms(
            self.n,
            self.terms
                .iter()
                .map(|t| PlaneWaveTerm {
                    coeff: t.coeff * Complex64::new(0.0, t.freq[j]),
                    freq: t.freq.clone(),
                })
                .collect(),
            self.tol,
        ))
    }

    /// Tensor product over a product space: frequencies concatenate.
    pub fn tensor(&self, other: &Self) -> Self {
        let n = self.n + other.n;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut freq = a.freq.clone();
                freq.extend_from_slice(&b.freq);
                terms.push(PlaneWaveTerm {
                    coeff: a.coeff * b.coeff,
                    freq,
                });
            }
        }
        Self::from_terms(n, terms, self.tol.max(other.tol))
    }

    /// Max coefficient distance between two sums, pairing terms by position
    /// after canonical sorting; returns None when the term structures differ.
    pub fn coeff_distance(&self, other: &Self) -> Option<f64> {
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let mut d = 0.0f64;
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let tol = self.tol.max(other.tol).max(1e-7);
            if a.freq.iter().zip(&b.freq).any(|(x, y)| (x - y).abs() > tol) {
                return None;
            }
            d = d.max((a.coeff - b.coeff).norm());
        }
        Some(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eval_basic_phases() {
        let pw = PlaneWaveSum::single(Complex64::new(1.0, 0.0), vec![1.0, 0.0]);
        let v = pw.eval(&[PI, 0.0]).unwrap();
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-15);

        let one = PlaneWaveSum::one(2);
        let v = one.eval(&[0.3, -12.0]).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn involution_is_exact_involution() {
        let pw = PlaneWaveSum::from_terms(
            2,
            vec![
                PlaneWaveTerm {
                    coeff: Complex64::new(1.0, 2.0),
                    freq: vec![0.5, -0.25],
                },
                PlaneWaveTerm {
                    coeff: Complex64::new(-0.5, 0.125),
                    freq: vec![-1.5, 3.0],
                },
            ],
            FREQ_TOL,
        );
        let twice = pw.involution().involution();
        assert_eq!(pw, twice);
    }

    #[test]
    fn merge_within_tolerance() {
        let pw = PlaneWaveSum::from_terms(
            1,
            vec![
                PlaneWaveTerm {
                    coeff: Complex64::new(1.0, 0.0),
                    freq: vec![1.0],
                },
                PlaneWaveTerm {
                    coeff: Complex64::new(2.0, 0.0),
                    freq: vec![1.0 + 1e-12],
                },
            ],
            FREQ_TOL,
        );
        assert_eq!(pw.terms().len(), 1);
        assert!((pw.terms()[0].coeff - Complex64::new(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cancelling_terms_vanish() {
        let pw = PlaneWaveSum::from_terms(
            1,
            vec![
                PlaneWaveTerm {
                    coeff: Complex64::new(1.0, 0.0),
                    freq: vec![2.0],
                },
                PlaneWaveTerm {
                    coeff: Complex64::new(-1.0, 0.0),
                    freq: vec![2.0],
                },
            ],
            FREQ_TOL,
        );
        assert!(pw.is_zero());
    }

    #[test]
    fn partial_deriv_multiplies_by_i_xi() {
        let pw = PlaneWaveSum::single(Complex64::new(1.0, 0.0), vec![1.0, 0.0]);
        let d = pw.partial_deriv(0).unwrap();
        assert_eq!(d.terms().len(), 1);
        assert!((d.terms()[0].coeff - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let d2 = pw.partial_deriv(1).unwrap();
        assert!(d2.is_zero());
    }
}
