//! Experiment reports: CSV tables plus a JSON summary that embeds the config.

use std::path::Path;

use fqapprox::Measure;
use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }
    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    /// Exact results.
    pub summary: Value,
    /// Floating-point fits and other values that never enter a verdict.
    pub diagnostics: Value,
    pub verdicts: Vec<Verdict>,
    pub tables: Vec<Table>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: &ExperimentConfig) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            config: config.clone(),
            summary: Value::Object(Default::default()),
            diagnostics: Value::Object(Default::default()),
            verdicts: vec![],
            tables: vec![],
        }
    }

    pub fn verdict(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict { name: name.into(), pass, detail: detail.into() });
    }

    pub fn summarize(&mut self, key: &str, v: impl Serialize) {
        self.summary[key] = serde_json::to_value(v).expect("serializable summary");
    }

    pub fn diagnose(&mut self, key: &str, v: impl Serialize) {
        self.diagnostics[key] = serde_json::to_value(v).expect("serializable diagnostic");
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// `<experiment>.json` plus one `<experiment>_<table>.csv` per table.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        for t in &self.tables {
            let mut w = csv::Writer::from_path(dir.join(format!("{}_{}.csv", self.experiment, t.name)))?;
            w.write_record(&t.header)?;
            for r in &t.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        let mut summary = serde_json::to_value(self)?;
        summary["tables"] = self.tables.iter().map(|t| format!("{}_{}.csv", self.experiment, t.name)).collect();
        std::fs::write(dir.join(format!("{}.json", self.experiment)), serde_json::to_string_pretty(&summary)? + "\n")?;
        Ok(())
    }
}

/// A measure as the exact pair `count · q^{-exp}` and its rational value.
pub fn measure_json(m: &Measure) -> Value {
    let m = m.reduced();
    serde_json::json!({ "count": m.count.to_string(), "exp": m.exp, "value": m.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_csv_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = ExperimentReport::new("demo", &ExperimentConfig::default());
        let mut t = Table::new("rows", &["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        r.tables.push(t);
        r.summarize("m", measure_json(&Measure { q: 3, count: 9, exp: 4 }));
        r.verdict("ok", true, "");
        r.write_to(dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("demo_rows.csv")).unwrap();
        assert_eq!(csv, "a,b\n1,\"x,y\"\n");
        let js: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("demo.json")).unwrap()).unwrap();
        assert_eq!(js["summary"]["m"]["value"], "1/9");
        assert_eq!(js["tables"][0], "demo_rows.csv");
        assert_eq!(js["config"]["field"], 3);
    }
}
