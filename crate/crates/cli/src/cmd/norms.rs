//! `norms` subcommand: operator norms of left translations against the
//! L1 and Schwartz-seminorm bounds, one CSV row per corpus function.

use std::f64::consts::PI;
use std::fs;

use moyal::bundle::{fiber_seminorm, FiberValue};
use moyal::corpus::{grid_corpus, planewave_corpus};
use moyal::grid::GridSpec;
use moyal::poisson::PoissonVectorSpace;
use moyal::star::StarContext;
use moyal::weyl::GridRep;
use moyal::Result;

use crate::{fmt_f, write_csv, Common, Report};

#[derive(Debug, Clone)]
pub struct NormsArgs {
    /// Poisson entry sigma^{12} for the 2-d runs.
    pub sigma: f64,
}

impl Default for NormsArgs {
    fn default() -> Self {
        Self { sigma: 1.0 }
    }
}

pub fn run(args: &NormsArgs, common: &Common) -> Result<i32> {
    fs::create_dir_all(&common.out_dir)?;
    let mut report = Report::new("norms", common.seed);
    let mut rows: Vec<Vec<String>> = Vec::new();

    let tol_op = common.tolerances.get("norms.opnorm_slack");
    let tol_l1_rel = common.tolerances.get("norms.l1_rel_slack");

    // 1-d corpus: sigma = 0 on the line, so left translation is plain
    // multiplication and the operator norm must match the sup norm.
    {
        let spec = GridSpec::new(1, 12.0, 64)?;
        let pvs = PoissonVectorSpace::zero(1);
        let rep = GridRep::new(pvs.clone(), spec)?;
        let ctx = StarContext::grid(pvs, spec)?;
        for cf in grid_corpus(spec)? {
            let lf = rep.left_translation(&ctx, &cf.f)?;
            let opnorm = lf.operator_norm()?.value;
            let l1 = rep.norm_bound_l1(&cf.f);
            let s_bound = (2.0 * PI) * cf.f.seminorm(2, 2);
            let eps_disc = tol_l1_rel * (1.0 + s_bound);
            push_row(&mut rows, "1", "grid", &cf.id, opnorm, l1, s_bound);
            report.check("opnorm_le_l1", opnorm <= l1 + tol_op, || {
                format!("1d {}: {} > {}", cf.id, fmt_f(opnorm), fmt_f(l1))
            });
            report.check("l1_le_seminorm", l1 <= s_bound + eps_disc, || {
                format!("1d {}: {} > {}", cf.id, fmt_f(l1), fmt_f(s_bound))
            });
            report.check("mult_operator_norm", (opnorm - cf.f.max_abs()).abs() < 1e-6, || {
                format!(
                    "1d {}: multiplication norm {} vs sup {}",
                    cf.id,
                    fmt_f(opnorm),
                    fmt_f(cf.f.max_abs())
                )
            });
        }
    }

    // 2-d corpus on a sigma-commensurate box.
    {
        let spec = GridSpec::commensurate(2, 16, args.sigma.max(0.5))?;
        let pvs = PoissonVectorSpace::standard_2d(args.sigma);
        let rep = GridRep::new(pvs.clone(), spec)?;
        let ctx = StarContext::grid(pvs, spec)?;
        for cf in grid_corpus(spec)? {
            let lf = rep.left_translation(&ctx, &cf.f)?;
            let opnorm = lf.operator_norm()?.value;
            let l1 = rep.norm_bound_l1(&cf.f);
            let s_bound = (2.0 * PI).powi(2) * cf.f.seminorm(4, 4);
            let eps_disc = tol_l1_rel * (1.0 + s_bound);
            push_row(&mut rows, "2", "grid", &cf.id, opnorm, l1, s_bound);
            report.check("opnorm_le_l1", opnorm <= l1 + tol_op, || {
                format!("2d {}: {} > {}", cf.id, fmt_f(opnorm), fmt_f(l1))
            });
            report.check("l1_le_seminorm", l1 <= s_bound + eps_disc, || {
                format!("2d {}: {} > {}", cf.id, fmt_f(l1), fmt_f(s_bound))
            });
        }
        for (id, pw) in planewave_corpus(spec) {
            let w = rep.weyl_quantize_planewave(&pw)?;
            let opnorm = if pw.is_zero() { 0.0 } else { w.operator_norm()?.value };
            let l1: f64 = pw.terms().iter().map(|t| t.coeff.norm()).sum();
            // s_{2n,2n} of a nonzero plane wave is infinite; record the
            // bounded-derivative surrogate s_{0,2n} instead.
            let s_bound = fiber_seminorm(&FiberValue::PlaneWave(pw.clone()), 0, 4);
            push_row(&mut rows, "2", "planewave", &id, opnorm, l1, s_bound);
            report.check("opnorm_le_l1", opnorm <= l1 + tol_op, || {
                format!("pw {id}: {} > {}", fmt_f(opnorm), fmt_f(l1))
            });
            // Unit waves quantize to unitaries.
            if pw.terms().len() == 1 && (pw.terms()[0].coeff.norm() - 1.0).abs() < 1e-14 {
                report.check("unit_wave_norm_one", (opnorm - 1.0).abs() < 1e-9, || {
                    format!("pw {id}: unitary norm {}", fmt_f(opnorm))
                });
            }
        }
    }

    let name = write_csv(
        &common.out_dir,
        "results.csv",
        &["n", "kind", "id", "operator_norm", "l1_bound", "seminorm_bound", "slack_op_vs_l1", "slack_l1_vs_seminorm"],
        &rows,
    )?;
    report.artifacts.push(name);
    report.finish(&common.out_dir)
}

fn push_row(
    rows: &mut Vec<Vec<String>>,
    n: &str,
    kind: &str,
    id: &str,
    opnorm: f64,
    l1: f64,
    s_bound: f64,
) {
    rows.push(vec![
        n.to_string(),
        kind.to_string(),
        id.to_string(),
        fmt_f(opnorm),
        fmt_f(l1),
        fmt_f(s_bound),
        fmt_f(l1 - opnorm),
        fmt_f(s_bound - l1),
    ]);
}
