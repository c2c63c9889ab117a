use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use hcap_core::capacity::CapacityReport;
use hcap_core::verify::{CheckResult, Verdict};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "capacity-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// One result line; `claim` for checks, `quantity` for measured values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Row {
    fn quantity(name: impl Into<String>, value: f64) -> Row {
        Row {
            claim: None,
            quantity: Some(name.into()),
            case: None,
            value,
            std_error: None,
            bounds: None,
            verdict: None,
            values: BTreeMap::new(),
            note: None,
        }
    }
}

impl From<CheckResult> for Row {
    fn from(r: CheckResult) -> Row {
        Row {
            claim: Some(r.claim),
            quantity: None,
            case: Some(r.case),
            value: r.value,
            std_error: r.std_error,
            bounds: r.bounds,
            verdict: r.verdict,
            values: r.values,
            note: r.note,
        }
    }
}

pub fn capacity_rows(rep: &CapacityReport) -> Vec<Row> {
    let mut rows = Vec::new();
    for (name, q) in [("hcap", &rep.hcap), ("dcap", &rep.dcap)] {
        if let Some(q) = q {
            let mut r = Row::quantity(name, q.value());
            r.std_error = q.std_error();
            rows.push(r);
        }
    }
    if let Some(c) = rep.crad {
        let mut r = Row::quantity("crad", c);
        if let Some(p) = rep.crad_at {
            r.values.insert("x".into(), p.x);
            r.values.insert("y".into(), p.y);
        }
        rows.push(r);
    }
    for (name, a) in &rep.areas {
        let mut r = Row::quantity(format!("area.{name}"), a.mid());
        r.bounds = Some([a.lower, a.upper]);
        if !a.tolerance_met {
            r.note = Some("area tolerance not met".into());
        }
        rows.push(r);
    }
    for (name, v) in &rep.ratios {
        rows.push(Row::quantity(format!("ratio.{name}"), *v));
    }
    rows
}

/// Hex sha256 of the serialized results.
pub fn digest(rows: &[Row]) -> String {
    let bytes = serde_json::to_vec(rows).expect("rows serialize");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub wall_time: f64,
    pub threads: usize,
}

#[derive(Debug, Serialize)]
pub struct Report<M: Serialize> {
    pub schema: &'static str,
    pub manifest: M,
    pub results: Vec<Row>,
    pub envelope: Envelope,
    pub digest: String,
}

impl<M: Serialize> Report<M> {
    pub fn new(manifest: M, results: Vec<Row>, envelope: Envelope) -> Self {
        let digest = digest(&results);
        Report {
            schema: SCHEMA,
            manifest,
            results,
            envelope,
            digest,
        }
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut v = serde_json::to_vec_pretty(self)?;
                v.push(b'\n');
                Ok(v)
            }
            Format::Csv => csv_bytes(&self.results),
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_bytes(rows: &[Row]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "claim", "quantity", "case", "value", "std_error", "lower", "upper", "verdict", "values", "note",
    ])?;
    for r in rows {
        let verdict = r.verdict.map(|v| {
            serde_json::to_value(v)
                .ok()
                .and_then(|j| j.as_str().map(str::to_string))
                .unwrap_or_default()
        });
        let values: Vec<String> = r.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        w.write_record([
            r.claim.clone().unwrap_or_default(),
            r.quantity.clone().unwrap_or_default(),
            r.case.clone().unwrap_or_default(),
            r.value.to_string(),
            fmt_opt(r.std_error),
            fmt_opt(r.bounds.map(|b| b[0])),
            fmt_opt(r.bounds.map(|b| b[1])),
            verdict.unwrap_or_default(),
            values.join(";"),
            r.note.clone().unwrap_or_default(),
        ])?;
    }
    Ok(w.into_inner()?)
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(bytes)?;
            o.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_the_envelope() {
        let rows = vec![Row::quantity("hcap", 1.0)];
        let a = Report::new("m", rows.clone(), Envelope { wall_time: 1.0, threads: 1 });
        let b = Report::new("m", rows, Envelope { wall_time: 9.0, threads: 8 });
        assert_eq!(a.digest, b.digest);
        assert_eq!(a.digest.len(), 64);
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let mut r = Row::quantity("area.neighborhood", 2.0);
        r.bounds = Some([1.5, 2.5]);
        let text = String::from_utf8(csv_bytes(&[r.clone(), r]).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], ",area.neighborhood,,2,,1.5,2.5,,,");
    }
}
