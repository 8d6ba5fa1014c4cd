//! `approx-id` subcommand: convergence tables for the approximate-identity
//! sequence chi_k, with strict-decrease and final-error assertions.

use std::fs;

use moyal::grid::{make_gaussian, GridSpec};
use moyal::poisson::PoissonVectorSpace;
use moyal::star::{approx_identity, StarContext};
use moyal::Result;

use crate::{fmt_f, write_csv, Common, Report};

/// The ten convergence-study Gaussians: widths wide enough that the
/// k-dependent tail stays above the band-limit floor through k = 5.
pub fn convergence_corpus(spec: GridSpec) -> Result<Vec<(String, moyal::grid::GridFunction)>> {
    let params: [([f64; 2], [f64; 2]); 10] = [
        ([0.0, 0.0], [1.5, 1.5]),
        ([0.3, -0.2], [1.6, 1.6]),
        ([-0.4, 0.1], [1.8, 1.5]),
        ([0.2, 0.4], [1.5, 1.8]),
        ([-0.3, -0.3], [1.7, 1.6]),
        ([0.4, 0.0], [1.6, 1.8]),
        ([0.0, 0.3], [1.5, 1.7]),
        ([-0.2, 0.2], [1.7, 1.7]),
        ([0.1, -0.4], [1.8, 1.6]),
        ([-0.1, 0.0], [1.6, 1.5]),
    ];
    params
        .iter()
        .enumerate()
        .map(|(i, (c, w))| Ok((format!("gauss{i:02}"), make_gaussian(spec, c, w)?)))
        .collect()
}

pub fn run(common: &Common) -> Result<i32> {
    fs::create_dir_all(&common.out_dir)?;
    let mut report = Report::new("approx-id", common.seed);
    let spec = GridSpec::new(2, 12.0, 128)?;
    let ctx = StarContext::grid(PoissonVectorSpace::standard_2d(1.0), spec)?;
    let tol_final = common.tolerances.get("approx.final");

    let chis: Vec<_> = (1..=5)
        .map(|k| approx_identity(spec, k))
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (id, f) in convergence_corpus(spec)? {
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        let mut last = f64::INFINITY;
        for (k, chi) in chis.iter().enumerate() {
            let err = ctx.star_grid(chi, &f)?.sub(&f)?.seminorm(0, 0);
            rows.push(vec![id.clone(), (k + 1).to_string(), fmt_f(err)]);
            if err >= prev {
                monotone = false;
            }
            prev = err;
            last = err;
        }
        report.check("strictly_decreasing", monotone, || {
            format!("{id}: sequence not strictly decreasing")
        });
        report.check("final_error", last < tol_final, || {
            format!("{id}: final error {}", fmt_f(last))
        });
    }

    let name = write_csv(&common.out_dir, "results.csv", &["id", "k", "error"], &rows)?;
    report.artifacts.push(name);
    report.finish(&common.out_dir)
}
