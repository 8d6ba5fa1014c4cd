//! The standard function corpus used by the experiment subcommands and the
//! acceptance suite: a fixed, deterministic family of Gaussians, modulated
//! Gaussians, two-bump superpositions, and lattice plane waves.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{make_gaussian, sample_planewave, GridFunction, GridSpec};
use crate::planewave::{PlaneWaveSum, PlaneWaveTerm, FREQ_TOL};

/// A named corpus entry.
pub struct CorpusFunction {
    pub id: String,
    pub f: GridFunction,
}

/// Grid corpus on a given spec: Gaussians of several widths and centers,
/// a modulated Gaussian, and a two-bump superposition. All modulation
/// frequencies lie on the dual lattice of `spec`.
pub fn grid_corpus(spec: GridSpec) -> Result<Vec<CorpusFunction>> {
    let n = spec.n;
    let dxi = spec.dxi();
    let mut out = Vec::new();

    let gaussian = |id: &str, center: &[f64], widths: &[f64]| -> Result<CorpusFunction> {
        Ok(CorpusFunction {
            id: id.to_string(),
            f: make_gaussian(spec, center, widths)?,
        })
    };

    match n {
        1 => {
            out.push(gaussian("gauss-unit", &[0.0], &[1.0])?);
            out.push(gaussian("gauss-narrow", &[0.0], &[0.6])?);
            out.push(gaussian("gauss-wide", &[0.5], &[1.4])?);
            out.push(gaussian("gauss-offset", &[-1.0], &[0.8])?);
        }
        2 => {
            out.push(gaussian("gauss-unit", &[0.0, 0.0], &[1.0, 1.0])?);
            out.push(gaussian("gauss-narrow", &[0.0, 0.0], &[0.6, 0.7])?);
            out.push(gaussian("gauss-wide", &[0.4, -0.3], &[1.3, 1.1])?);
            out.push(gaussian("gauss-anisotropic", &[-0.5, 0.2], &[0.6, 1.2])?);
        }
        _ => {
            out.push(gaussian("gauss-unit", &vec![0.0; n], &vec![1.0; n])?);
        }
    }

    // Modulated Gaussian: base Gaussian times an on-lattice wave.
    let base = make_gaussian(spec, &vec![0.0; n], &vec![0.9; n])?;
    let mut freq = vec![0.0; n];
    freq[0] = 2.0 * dxi;
    let wave = sample_planewave(
        &PlaneWaveSum::single(Complex64::new(1.0, 0.0), freq),
        spec,
    )?;
    out.push(CorpusFunction {
        id: "gauss-modulated".into(),
        f: base.pointwise_mul(&wave)?,
    });

    // Two-bump superposition with complex weights.
    let mut c1 = vec![0.0; n];
    let mut c2 = vec![0.0; n];
    c1[0] = 1.2;
    c2[0] = -1.2;
    let bump1 = make_gaussian(spec, &c1, &vec![0.7; n])?;
    let bump2 = make_gaussian(spec, &c2, &vec![0.9; n])?;
    out.push(CorpusFunction {
        id: "two-bumps".into(),
        f: bump1.add(&bump2.scale(Complex64::new(0.5, 0.5)))?,
    });

    Ok(out)
}

/// Plane-wave corpus on the dual lattice of `spec`: single waves, a
/// three-term sum, and the unit.
pub fn planewave_corpus(spec: GridSpec) -> Vec<(String, PlaneWaveSum)> {
    let n = spec.n;
    let dxi = spec.dxi();
    let lattice = |ks: &[i64]| -> Vec<f64> { ks.iter().map(|&k| k as f64 * dxi).collect() };
    let mut out: Vec<(String, PlaneWaveSum)> = Vec::new();
    out.push(("unit".into(), PlaneWaveSum::one(n)));
    let mut k1 = vec![0i64; n];
    k1[0] = 1;
    out.push((
        "wave-e1".into(),
        PlaneWaveSum::single(Complex64::new(1.0, 0.0), lattice(&k1)),
    ));
    if n >= 2 {
        let mut k2 = vec![0i64; n];
        k2[1] = -2;
        out.push((
            "wave-e2".into(),
            PlaneWaveSum::single(Complex64::new(0.0, 1.0), lattice(&k2)),
        ));
        let mut k3 = vec![0i64; n];
        k3[0] = 1;
        k3[1] = 1;
        out.push((
            "wave-sum".into(),
            PlaneWaveSum::from_terms(
                n,
                vec![
                    PlaneWaveTerm {
                        coeff: Complex64::new(0.5, 0.0),
                        freq: lattice(&k1),
                    },
                    PlaneWaveTerm {
                        coeff: Complex64::new(0.0, -0.5),
                        freq: lattice(&k2),
                    },
                    PlaneWaveTerm {
                        coeff: Complex64::new(0.25, 0.25),
                        freq: lattice(&k3),
                    },
                ],
                FREQ_TOL,
            ),
        ));
    }
    out
}
