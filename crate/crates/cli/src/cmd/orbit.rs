//! `orbit` subcommand: samples the Lorentz orbit of a reference Poisson
//! tensor, writes per-point invariants, and checks rank constancy,
//! equivariance, and the stabilizer dimension count.

use std::fs;
use std::path::PathBuf;

use moyal::io;
use moyal::orbit::{
    invariant_scalars, orbit_point, sample_lorentz, stabilizer_algebra_dim,
};
use moyal::poisson::PoissonVectorSpace;
use moyal::Result;

use crate::{fmt_f, write_csv, Common, Report};

#[derive(Debug, Clone)]
pub struct OrbitArgs {
    pub sigma0_path: Option<PathBuf>,
    pub samples: usize,
}

pub fn run(args: &OrbitArgs, common: &Common) -> Result<i32> {
    fs::create_dir_all(&common.out_dir)?;
    let sigma0 = match &args.sigma0_path {
        Some(path) => io::poisson_from_json(&fs::read_to_string(path)?)?,
        None => PoissonVectorSpace::standard_4d(),
    };
    let n = sigma0.dim();
    let mut report = Report::new("orbit", common.seed);

    let tol_equiv = common.tolerances.get("orbit.equivariance");
    let tol_drift = common.tolerances.get("orbit.invariant_drift");

    let rank0 = sigma0.rank();
    let (c0, p0) = invariant_scalars(&sigma0);
    let elements = sample_lorentz(n, args.samples, 1.0, common.seed);

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (i, el) in elements.iter().enumerate() {
        let sigma = orbit_point(el, &sigma0)?;
        let rank = sigma.rank();
        let (c, p) = invariant_scalars(&sigma);

        // Equivariance against the previous sample: transporting by the
        // product must match transporting twice.
        let equiv_residual = if i > 0 {
            let prev = &elements[i - 1];
            let prod = prev.compose(el)?;
            let direct = orbit_point(&prod, &sigma0)?;
            let staged = orbit_point(prev, &orbit_point(el, &sigma0)?)?;
            let mut d = 0.0f64;
            for a in 0..n {
                for b in 0..n {
                    d = d.max((direct.entry(a, b) - staged.entry(a, b)).abs());
                }
            }
            d
        } else {
            0.0
        };

        rows.push(vec![
            i.to_string(),
            rank.to_string(),
            fmt_f(c),
            fmt_f(p),
            fmt_f(equiv_residual),
        ]);
        report.check("rank_constancy", rank == rank0, || {
            format!("sample {i}: rank {rank} != {rank0}")
        });
        report.check("invariant_contraction", (c - c0).abs() <= tol_drift, || {
            format!("sample {i}: contraction drift {}", fmt_f((c - c0).abs()))
        });
        report.check("invariant_pfaffian", (p - p0).abs() <= tol_drift, || {
            format!("sample {i}: pfaffian drift {}", fmt_f((p - p0).abs()))
        });
        report.check("equivariance", equiv_residual <= tol_equiv, || {
            format!("sample {i}: equivariance residual {}", fmt_f(equiv_residual))
        });
    }

    // Dimension count: dim O(1, n-1) = dim H + dim Sigma.
    let stab = stabilizer_algebra_dim(&sigma0);
    let lorentz_dim = n * (n - 1) / 2;
    rows.push(vec![
        "stabilizer".into(),
        stab.to_string(),
        fmt_f(0.0),
        fmt_f(0.0),
        fmt_f(0.0),
    ]);
    if n == 4 && rank0 == 4 {
        report.check("stabilizer_dim", stab == 2, || {
            format!("stabilizer algebra dimension {stab}, expected 2")
        });
        report.check("dimension_count", stab + 4 == lorentz_dim, || {
            format!("dim H + dim Sigma = {} != {lorentz_dim}", stab + 4)
        });
    }

    let name = write_csv(
        &common.out_dir,
        "invariants.csv",
        &["sample", "rank", "contraction", "pfaffian_abs", "equivariance_residual"],
        &rows,
    )?;
    report.artifacts.push(name);
    report.finish(&common.out_dir)
}
