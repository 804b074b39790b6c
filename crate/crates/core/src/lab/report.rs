use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::run::ScenarioReport;
use crate::error::Result;

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.12e}"))
}

impl ScenarioReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per `(k, eps)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "scenario,config_hash,seed,k,eps,lambda,mu,rel_error,backward_error,profile_error,census_pass,nodal_domains,morse_pass\n",
        );
        for run in &self.runs {
            for r in &run.records {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{:.12e},{},{},{:.3e},{},{},{},{}",
                    self.scenario.name,
                    r.config_hash,
                    r.seed,
                    r.k,
                    r.eps,
                    r.lambda,
                    opt(r.mu),
                    opt(r.rel_error),
                    r.backward_error,
                    opt(r.profile.map(|p| p.rel_l2_error)),
                    r.census
                        .as_ref()
                        .map_or(String::new(), |c| c.pass.to_string()),
                    r.nodal_domain_count,
                    r.morse
                        .as_ref()
                        .map_or(String::new(), |m| m.pass.to_string()),
                );
            }
        }
        out
    }

    /// Writes `<name>.json` and `<name>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let stem = self.scenario.name.as_str();
        let json = dir.join(format!("{stem}.json"));
        let csv = dir.join(format!("{stem}.csv"));
        std::fs::write(&json, self.to_json()?)?;
        std::fs::write(&csv, self.to_csv())?;
        Ok(vec![json, csv])
    }

    /// Human-readable verdict lines.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} ({} vertices, {} cells, config {})\n",
            self.scenario.name,
            self.vertices,
            self.cells,
            &self.config_hash[..12]
        );
        if let Some(r) = &self.retry {
            let _ = writeln!(out, "  retry: {r}");
        }
        for v in &self.verdicts {
            let _ = writeln!(
                out,
                "  {} {}: {}",
                if v.pass { "PASS" } else { "FAIL" },
                v.name,
                v.detail
            );
        }
        out
    }
}
