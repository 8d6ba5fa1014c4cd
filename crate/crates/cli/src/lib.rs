//! Batch experiment runner binding the deformation-quantization engine:
//! each subcommand loads a configuration, runs one experiment family, and
//! writes machine-readable CSV/JSON artifacts with a deterministic layout.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use moyal::MoyalError;
use serde::{Deserialize, Serialize};

pub mod cmd;

/// Exit status conventions: 0 all assertions pass, 1 assertion failures
/// (JSON failure report written), 2 configuration errors, 3 numeric
/// non-convergence.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Formats a float with 17 significant digits for reproducible output.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Options shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Common {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub tolerances: Tolerances,
}

/// Tolerance table with config-file and command-line overrides.
#[derive(Debug, Clone)]
pub struct Tolerances {
    values: BTreeMap<String, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        let mut values = BTreeMap::new();
        for (k, v) in [
            ("star.backend_agreement", 1e-10),
            ("star.flip", 1e-10),
            ("norms.opnorm_slack", 1e-9),
            ("norms.l1_rel_slack", 1e-8),
            ("approx.final", 1e-3),
            ("bundle.fiber_star", 1e-10),
            ("orbit.equivariance", 1e-10),
            ("orbit.invariant_drift", 1e-9),
        ] {
            values.insert(k.to_string(), v);
        }
        Self { values }
    }
}

impl Tolerances {
    pub fn get(&self, key: &str) -> f64 {
        *self
            .values
            .get(key)
            .unwrap_or_else(|| panic!("unknown tolerance key {key}"))
    }

    pub fn override_value(&mut self, key: &str, value: f64) -> Result<(), String> {
        if value <= 0.0 {
            return Err(format!("tolerance {key} must be positive, got {value}"));
        }
        if !self.values.contains_key(key) {
            return Err(format!(
                "unknown tolerance key {key}; known: {:?}",
                self.values.keys().collect::<Vec<_>>()
            ));
        }
        self.values.insert(key.to_string(), value);
        Ok(())
    }
}

/// Optional configuration file: {"tolerances": {...}, "seed": ...}.
#[derive(Debug, Default, Deserialize)]
pub struct ConfigFile {
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

pub fn load_config(path: &Path) -> Result<ConfigFile, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path:?}: {e}"))?;
    serde_json::from_str(&text).map_err(|e| format!("malformed config {path:?}: {e}"))
}

/// One failed assertion inside an experiment run.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub check: String,
    pub detail: String,
}

/// Collects pass/fail state and writes the JSON report.
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub failures: Vec<Failure>,
    pub artifacts: Vec<String>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    command: &'a str,
    seed: u64,
    pass: bool,
    failures: &'a [Failure],
    artifacts: &'a [String],
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            seed,
            failures: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(Failure {
                check: name.to_string(),
                detail: detail(),
            });
        }
    }

    pub fn finish(mut self, out_dir: &Path) -> Result<i32, MoyalError> {
        let path = out_dir.join("report.json");
        let body = serde_json::to_string_pretty(&ReportJson {
            command: &self.command,
            seed: self.seed,
            pass: self.failures.is_empty(),
            failures: &self.failures,
            artifacts: &self.artifacts,
        })
        .expect("report serializes");
        fs::write(&path, body)?;
        self.artifacts.push("report.json".into());
        Ok(if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_ASSERTION
        })
    }
}

/// Writes a CSV file with a fixed header; all rows already formatted.
pub fn write_csv(
    out_dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<String, MoyalError> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    let mut file = fs::File::create(&path)?;
    writeln!(file, "{}", header.join(","))?;
    for row in rows {
        writeln!(file, "{}", row.join(","))?;
    }
    Ok(name.to_string())
}

/// Maps engine errors onto process exit codes.
pub fn exit_code_for(err: &MoyalError) -> i32 {
    match err {
        MoyalError::NoConvergence { .. } => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}
