//! `star` subcommand: computes one star product from serialized inputs and
//! reports cross-backend residuals.

use std::fs;
use std::path::{Path, PathBuf};

use moyal::grid::GridFunction;
use moyal::io;
use moyal::star::StarContext;
use moyal::{MoyalError, Result};

use crate::{fmt_f, Common, Report};

#[derive(Debug, Clone)]
pub struct StarArgs {
    /// "grid" or "planewave".
    pub kind: String,
    pub f_path: PathBuf,
    pub g_path: PathBuf,
    pub poisson_path: PathBuf,
}

pub fn run(args: &StarArgs, common: &Common) -> Result<i32> {
    fs::create_dir_all(&common.out_dir)?;
    let pvs = io::poisson_from_json(&fs::read_to_string(&args.poisson_path)?)?;
    let mut report = Report::new("star", common.seed);

    match args.kind.as_str() {
        "grid" => {
            let f = read_grid(&args.f_path)?;
            let g = read_grid(&args.g_path)?;
            if f.spec != g.spec {
                return Err(MoyalError::SpecMismatch(
                    "inputs live on different grids".into(),
                ));
            }
            let ctx = StarContext::grid(pvs, f.spec)?;
            let prod = ctx.star_grid(&f, &g)?;
            let reference = ctx.star_grid_shift_reference(&f, &g)?;
            let backend_agreement = max_diff(&prod, &reference);

            // Flip identity: g *_sigma f = f *_{-sigma} g.
            let gf = ctx.star_grid(&g, &f)?;
            let flipped = ctx.flip()?.star_grid(&f, &g)?;
            let flip_residual = max_diff(&gf, &flipped);

            let mut out = fs::File::create(common.out_dir.join("product.gridfn"))?;
            io::write_grid_function(&mut out, &prod)?;
            report.artifacts.push("product.gridfn".into());

            let tol_backend = common.tolerances.get("star.backend_agreement");
            let tol_flip = common.tolerances.get("star.flip");
            report.check("backend_agreement", backend_agreement <= tol_backend, || {
                format!("spectral vs shift-reference differ by {}", fmt_f(backend_agreement))
            });
            report.check("flip_identity", flip_residual <= tol_flip, || {
                format!("flip residual {}", fmt_f(flip_residual))
            });
            let residuals = serde_json::json!({
                "backend_agreement": backend_agreement,
                "flip_identity": flip_residual,
            });
            fs::write(
                common.out_dir.join("residuals.json"),
                serde_json::to_string_pretty(&residuals).expect("serializes"),
            )?;
            report.artifacts.push("residuals.json".into());
        }
        "planewave" => {
            let n = pvs.dim();
            let f = io::planewave_from_json(&fs::read_to_string(&args.f_path)?, n)?;
            let g = io::planewave_from_json(&fs::read_to_string(&args.g_path)?, n)?;
            let ctx = StarContext::exact(pvs);
            let prod = ctx.star_exact(&f, &g)?;
            let gf = ctx.star_exact(&g, &f)?;
            let flipped = ctx.flip()?.star_exact(&f, &g)?;
            let flip_residual = gf.coeff_distance(&flipped).unwrap_or(f64::INFINITY);
            fs::write(common.out_dir.join("product.json"), io::planewave_to_json(&prod))?;
            report.artifacts.push("product.json".into());
            let tol_flip = common.tolerances.get("star.flip");
            report.check("flip_identity", flip_residual <= tol_flip, || {
                format!("flip residual {}", fmt_f(flip_residual))
            });
            let residuals = serde_json::json!({ "flip_identity": flip_residual });
            fs::write(
                common.out_dir.join("residuals.json"),
                serde_json::to_string_pretty(&residuals).expect("serializes"),
            )?;
            report.artifacts.push("residuals.json".into());
        }
        other => {
            return Err(MoyalError::Parse(format!(
                "unknown function kind {other}; expected grid or planewave"
            )))
        }
    }
    report.finish(&common.out_dir)
}

fn read_grid(path: &Path) -> Result<GridFunction> {
    let mut file = fs::File::open(path)?;
    io::read_grid_function(&mut file)
}

fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}
