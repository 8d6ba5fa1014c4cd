//! `estimates` subcommand: the appendix inequality sweep. For every corpus
//! pair (plane wave f, Schwartz surrogate g) and every seminorm order
//! (p, q), one CSV row records
//!
//!   s_{p,q}(f * g)  <=  C(sigma,p,q) s_{0,p+q}(f) s_{p+2n,q+2n}(g)
//!   ||gcheck||_1    <=  (2 pi)^n s_{2n,2n}(g) + eps
//!
//! with the constants C measured once on this corpus and frozen below as
//! regression fixtures; only the shape of the bound is canonical, the
//! constants are an empirical property of the corpus.

use std::f64::consts::PI;
use std::fs;

use moyal::bundle::{fiber_seminorm, FiberValue};
use moyal::corpus::{grid_corpus, planewave_corpus};
use moyal::grid::GridSpec;
use moyal::poisson::PoissonVectorSpace;
use moyal::star::StarContext;
use moyal::Result;

use crate::{fmt_f, write_csv, Common, Report};

/// Frozen product-bound constants: measured maxima over this corpus with a
/// 1.5x margin. Rows: (n, p, q, C).
const FROZEN_C: &[(usize, usize, usize, f64)] = &[
    (1, 0, 0, 0.181),
    (1, 0, 1, 0.184),
    (1, 0, 2, 0.171),
    (1, 1, 0, 0.157),
    (1, 1, 1, 0.170),
    (1, 1, 2, 0.159),
    (1, 2, 0, 0.139),
    (1, 2, 1, 0.131),
    (1, 2, 2, 0.118),
    (2, 0, 0, 2.8e-3),
    (2, 0, 1, 3.0e-3),
    (2, 1, 0, 2.4e-3),
    (2, 1, 1, 2.8e-3),
];

fn frozen_c(n: usize, p: usize, q: usize) -> f64 {
    FROZEN_C
        .iter()
        .find(|(fn_, fp, fq, _)| *fn_ == n && *fp == p && *fq == q)
        .map(|(_, _, _, c)| *c)
        .unwrap_or_else(|| panic!("no frozen constant for n={n} p={p} q={q}"))
}

pub fn run(common: &Common) -> Result<i32> {
    fs::create_dir_all(&common.out_dir)?;
    let mut report = Report::new("estimates", common.seed);
    let mut rows: Vec<Vec<String>> = Vec::new();
    let tol_l1_rel = common.tolerances.get("norms.l1_rel_slack");

    for (n, points, sigmas, max_pq) in [
        (1usize, 256usize, vec![0.0], 2usize),
        (2, 64, vec![0.5, 1.0, 2.0], 1),
    ] {
        let spec = GridSpec::new(n, 12.0, points)?;
        let waves = planewave_corpus(spec);
        let grid_fns = grid_corpus(spec)?;
        for sigma in &sigmas {
            let pvs = match n {
                1 => PoissonVectorSpace::zero(1),
                _ => PoissonVectorSpace::standard_2d(*sigma),
            };
            let ctx = StarContext::mixed(pvs, spec)?;
            for (wave_id, pw) in &waves {
                for cf in &grid_fns {
                    // L1 estimate of the Schwartz factor, once per pair.
                    let l1 = cf.f.fourier_inverse().l1_norm();
                    let s2n = cf.f.seminorm(2 * n, 2 * n);
                    let l1_bound = (2.0 * PI).powi(n as i32) * s2n;
                    let eps_disc = tol_l1_rel * (1.0 + l1_bound);
                    let prod = ctx.star_mixed_left(pw, &cf.f)?;
                    for p in 0..=max_pq {
                        for q in 0..=max_pq {
                            let lhs = prod.seminorm(p, q);
                            let sf = fiber_seminorm(&FiberValue::PlaneWave(pw.clone()), 0, p + q);
                            let sg = cf.f.seminorm(p + 2 * n, q + 2 * n);
                            let c = frozen_c(n, p, q);
                            let rhs = c * sf * sg;
                            let slack_prod = rhs - lhs;
                            let slack_l1 = l1_bound + eps_disc - l1;
                            rows.push(vec![
                                n.to_string(),
                                fmt_f(*sigma),
                                wave_id.clone(),
                                cf.id.clone(),
                                p.to_string(),
                                q.to_string(),
                                fmt_f(lhs),
                                fmt_f(c),
                                fmt_f(sf),
                                fmt_f(sg),
                                fmt_f(rhs),
                                fmt_f(slack_prod),
                                fmt_f(l1),
                                fmt_f(l1_bound),
                                fmt_f(slack_l1),
                            ]);
                            report.check("product_bound", slack_prod >= 0.0, || {
                                format!(
                                    "n={n} sigma={sigma} f={wave_id} g={} p={p} q={q}: lhs {} > rhs {}",
                                    cf.id,
                                    fmt_f(lhs),
                                    fmt_f(rhs)
                                )
                            });
                            report.check("l1_bound", slack_l1 >= 0.0, || {
                                format!("n={n} g={}: l1 {} > bound {}", cf.id, fmt_f(l1), fmt_f(l1_bound))
                            });
                        }
                    }
                }
            }
        }
    }

    let name = write_csv(
        &common.out_dir,
        "results.csv",
        &[
            "n", "sigma", "f_id", "g_id", "p", "q", "s_pq_star", "c_frozen", "s_f", "s_g",
            "product_bound", "slack_product", "l1_g", "l1_bound", "slack_l1",
        ],
        &rows,
    )?;
    report.artifacts.push(name);

    // The frozen constants double as a machine-readable fixture.
    let fixtures_dir = common.out_dir.join("fixtures");
    fs::create_dir_all(&fixtures_dir)?;
    let table: Vec<serde_json::Value> = FROZEN_C
        .iter()
        .map(|(n, p, q, c)| serde_json::json!({"n": n, "p": p, "q": q, "c": c}))
        .collect();
    fs::write(
        fixtures_dir.join("product_bound_constants.json"),
        serde_json::to_string_pretty(&table).expect("serializes"),
    )?;
    report.artifacts.push("fixtures/product_bound_constants.json".into());
    report.finish(&common.out_dir)
}
