//! `bundle` subcommand: loads a finite bundle description and runs the
//! sectional-representation round trips plus fiberwise star-product
//! sanity checks, emitting a pass/fail table.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use moyal::bundle::{fiber_star, BaseSpace, FiberValue, PoissonBundle, SectionOverBase};
use moyal::grid::{make_gaussian, GridSpec};
use moyal::poisson::PoissonVectorSpace;
use moyal::sectional::FiniteCStarModuleAlgebra;
use moyal::star::StarContext;
use moyal::{MoyalError, Result};

use crate::{fmt_f, write_csv, Common, Report};

#[derive(Debug, Clone)]
pub struct BundleArgs {
    pub bundle_path: PathBuf,
}

#[derive(serde::Deserialize)]
struct BundleJson {
    base: Vec<String>,
    n: usize,
    sigma_at: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default)]
    fiber_dims: BTreeMap<String, usize>,
}

pub fn run(args: &BundleArgs, common: &Common) -> Result<i32> {
    fs::create_dir_all(&common.out_dir)?;
    let text = fs::read_to_string(&args.bundle_path)?;
    let desc: BundleJson =
        serde_json::from_str(&text).map_err(|e| MoyalError::Parse(e.to_string()))?;

    let ids: Vec<&str> = desc.base.iter().map(|s| s.as_str()).collect();
    let base = BaseSpace::finite_from_ids(&ids)?;
    let mut sigmas = Vec::with_capacity(ids.len());
    for id in &desc.base {
        let raw = desc
            .sigma_at
            .get(id)
            .ok_or_else(|| MoyalError::UnknownPoint(id.clone()))?;
        sigmas.push(PoissonVectorSpace::new(desc.n, raw.clone())?);
    }
    let bundle = PoissonBundle::new(base, desc.n, sigmas)?;

    let mut report = Report::new("bundle", common.seed);
    let mut rows: Vec<Vec<String>> = Vec::new();
    let tol = common.tolerances.get("bundle.fiber_star");

    // Fiberwise star product vs the per-fiber single-space product.
    if desc.n == 2 {
        let spec = GridSpec::new(2, 8.0, 32)?;
        let f = make_gaussian(spec, &[0.1, 0.0], &[0.8, 0.9])?;
        let g = make_gaussian(spec, &[-0.2, 0.2], &[0.9, 0.8])?;
        let phi = SectionOverBase::new(vec![FiberValue::Grid(f.clone()); ids.len()])?;
        let psi = SectionOverBase::new(vec![FiberValue::Grid(g.clone()); ids.len()])?;
        let prod = fiber_star(&bundle, &phi, &psi)?;
        for (i, id) in desc.base.iter().enumerate() {
            let ctx = StarContext::grid(bundle.sigma_at[i].as_ref().clone(), spec)?;
            let oracle = ctx.star_grid(&f, &g)?;
            let delta = match &prod.values[i] {
                FiberValue::Grid(h) => h
                    .values
                    .iter()
                    .zip(&oracle.values)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).norm())),
                _ => f64::INFINITY,
            };
            let ok = delta <= tol;
            rows.push(vec![
                format!("fiber_star:{id}"),
                fmt_f(delta),
                pass_str(ok),
            ]);
            report.check("fiber_star", ok, || format!("{id}: residual {}", fmt_f(delta)));
        }
    }

    // Sectional round trip of the pointwise matrix algebra over this base.
    let dims: Vec<usize> = desc
        .base
        .iter()
        .map(|id| *desc.fiber_dims.get(id).unwrap_or(&2))
        .collect();
    let alg = FiniteCStarModuleAlgebra::pointwise(&ids, &dims)?;
    let rt = alg.sectional_roundtrip()?;
    rows.push(vec![
        "sectional_roundtrip:dims".into(),
        format!("{}={}", rt.total_dim, rt.algebra_dim),
        pass_str(rt.dims_match),
    ]);
    rows.push(vec![
        "sectional_roundtrip:multiplication".into(),
        String::new(),
        pass_str(rt.multiplication_match),
    ]);
    rows.push(vec![
        "sectional_roundtrip:isometric".into(),
        String::new(),
        pass_str(rt.isometric),
    ]);
    rows.push(vec![
        "sectional_roundtrip:declared_bundle".into(),
        rt.mismatched_points.join(";"),
        pass_str(rt.is_declared_bundle()),
    ]);
    report.check("roundtrip", rt.is_isomorphism() && rt.is_declared_bundle(), || {
        "sectional round trip failed".into()
    });

    // Collapse-to-a-point change of base ring: fiber formula.
    let collapse: Vec<usize> = vec![0; ids.len()];
    let formula = alg.fiber_formula_check(&["collapsed"], &collapse)?;
    for (id, lhs, rhs, ok) in formula {
        rows.push(vec![
            format!("fiber_formula:{id}"),
            format!("{lhs:?}={rhs:?}"),
            pass_str(ok),
        ]);
        report.check("fiber_formula", ok, || format!("fiber formula failed at {id}"));
    }

    let name = write_csv(&common.out_dir, "results.csv", &["check", "detail", "pass"], &rows)?;
    report.artifacts.push(name);
    report.finish(&common.out_dir)
}

fn pass_str(ok: bool) -> String {
    if ok { "pass".into() } else { "FAIL".into() }
}
