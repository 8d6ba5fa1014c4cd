//! Serialization formats: Poisson matrices and plane-wave sums as JSON,
//! grid functions as a JSON header line followed by the raw little-endian
//! complex sample array (f64 pairs, row-major, axis 0 slowest).

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MoyalError, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::planewave::{PlaneWaveSum, PlaneWaveTerm, FREQ_TOL};
use crate::poisson::PoissonVectorSpace;

#[derive(Serialize, Deserialize)]
struct PoissonJson {
    n: usize,
    sigma: Vec<Vec<f64>>,
}

pub fn poisson_to_json(pvs: &PoissonVectorSpace) -> String {
    serde_json::to_string(&PoissonJson {
        n: pvs.dim(),
        sigma: pvs.sigma().to_vec(),
    })
    .expect("plain struct serializes")
}

/// Antisymmetry is validated on load; defects above 1e-12 are rejected.
pub fn poisson_from_json(text: &str) -> Result<PoissonVectorSpace> {
    let raw: PoissonJson =
        serde_json::from_str(text).map_err(|e| MoyalError::Parse(e.to_string()))?;
    PoissonVectorSpace::new(raw.n, raw.sigma)
}

#[derive(Serialize, Deserialize)]
struct PlaneWaveTermJson {
    re: f64,
    im: f64,
    freq: Vec<f64>,
}

pub fn planewave_to_json(pw: &PlaneWaveSum) -> String {
    let terms: Vec<PlaneWaveTermJson> = pw
        .terms()
        .iter()
        .map(|t| PlaneWaveTermJson {
            re: t.coeff.re,
            im: t.coeff.im,
            freq: t.freq.clone(),
        })
        .collect();
    serde_json::to_string(&terms).expect("plain struct serializes")
}

pub fn planewave_from_json(text: &str, n: usize) -> Result<PlaneWaveSum> {
    let raw: Vec<PlaneWaveTermJson> =
        serde_json::from_str(text).map_err(|e| MoyalError::Parse(e.to_string()))?;
    for t in &raw {
        if t.freq.len() != n {
            return Err(MoyalError::DimensionMismatch {
                expected: n,
                got: t.freq.len(),
            });
        }
    }
    Ok(PlaneWaveSum::from_terms(
        n,
        raw.into_iter()
            .map(|t| PlaneWaveTerm {
                coeff: Complex64::new(t.re, t.im),
                freq: t.freq,
            })
            .collect(),
        FREQ_TOL,
    ))
}

#[derive(Serialize, Deserialize)]
struct GridHeader {
    n: usize,
    l: f64,
    points: usize,
}

/// Header line then raw interleaved little-endian f64 (re, im) samples.
pub fn write_grid_function(w: &mut impl Write, f: &GridFunction) -> Result<()> {
    let header = serde_json::to_string(&GridHeader {
        n: f.spec.n,
        l: f.spec.l,
        points: f.spec.points,
    })
    .expect("plain struct serializes");
    writeln!(w, "{header}")?;
    let mut buf = Vec::with_capacity(f.values.len() * 16);
    for v in &f.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_grid_function(r: &mut impl Read) -> Result<GridFunction> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| MoyalError::Parse("missing header line".into()))?;
    let header: GridHeader = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| MoyalError::Parse(e.to_string()))?;
    let spec = GridSpec::new(header.n, header.l, header.points)?;
    let payload = &bytes[newline + 1..];
    let expected = spec.total_samples() * 16;
    if payload.len() != expected {
        return Err(MoyalError::Parse(format!(
            "sample payload has {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(16)
        .map(|chunk| {
            let re = f64::from_le_bytes(chunk[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(chunk[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok(GridFunction { spec, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_gaussian;

    #[test]
    fn poisson_round_trip_and_validation() {
        let pvs = PoissonVectorSpace::standard_2d(1.5);
        let text = poisson_to_json(&pvs);
        let back = poisson_from_json(&text).unwrap();
        assert_eq!(back.sigma(), pvs.sigma());

        let bad = r#"{"n":2,"sigma":[[0.0,1.0],[-0.9,0.0]]}"#;
        assert!(matches!(
            poisson_from_json(bad),
            Err(MoyalError::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn planewave_round_trip() {
        let pw = PlaneWaveSum::from_terms(
            2,
            vec![
                PlaneWaveTerm {
                    coeff: Complex64::new(1.0, -0.5),
                    freq: vec![0.25, -1.0],
                },
                PlaneWaveTerm {
                    coeff: Complex64::new(0.0, 2.0),
                    freq: vec![1.5, 0.5],
                },
            ],
            FREQ_TOL,
        );
        let text = planewave_to_json(&pw);
        let back = planewave_from_json(&text, 2).unwrap();
        assert_eq!(back, pw);

        assert!(planewave_from_json(&text, 3).is_err());
    }

    #[test]
    fn grid_function_binary_round_trip() {
        let spec = GridSpec::new(2, 6.0, 16).unwrap();
        let f = make_gaussian(spec, &[0.25, -0.5], &[1.0, 0.8]).unwrap();
        let mut buf = Vec::new();
        write_grid_function(&mut buf, &f).unwrap();
        let back = read_grid_function(&mut buf.as_slice()).unwrap();
        assert_eq!(back.spec, f.spec);
        assert_eq!(back.values, f.values);
    }

    #[test]
    fn grid_function_truncated_payload_rejected() {
        let spec = GridSpec::new(1, 4.0, 8).unwrap();
        let f = make_gaussian(spec, &[0.0], &[1.0]).unwrap();
        let mut buf = Vec::new();
        write_grid_function(&mut buf, &f).unwrap();
        buf.truncate(buf.len() - 7);
        assert!(read_grid_function(&mut buf.as_slice()).is_err());
    }
}
