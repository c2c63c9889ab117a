//! Checks of the comparability statements over canonical hulls and seeded
//! corpora. Every check yields rows of [`CheckResult`].

pub mod checks;
pub mod corpus;
pub mod fixtures;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wos::{derive_seed, WalkParams, DEFAULT_EPS_STOP};

pub use checks::*;
pub use corpus::{corpus_generate, disk_corpus, halfplane_corpus, CorpusKind, CorpusSpec, ScaleDist};
pub use fixtures::{Bracket, Fixtures};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// `Pass` inside the bracket, `Fail` outside.
    pub fn of(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// One row of a check. `value` is the quantity compared with `bounds`;
/// rows without a verdict are table entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub claim: String,
    pub case: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    pub fn new(claim: &str, case: impl Into<String>, value: f64) -> Self {
        CheckResult {
            claim: claim.to_string(),
            case: case.into(),
            value,
            std_error: None,
            bounds: None,
            verdict: None,
            values: BTreeMap::new(),
            note: None,
        }
    }

    /// A failed row for a case whose computation raised `e`.
    pub fn failed(claim: &str, case: impl Into<String>, e: &Error) -> Self {
        CheckResult::new(claim, case, 0.0).verdict(Verdict::Fail).note(e.to_string())
    }

    pub fn se(mut self, s: f64) -> Self {
        self.std_error = Some(s);
        self
    }

    pub fn bounds(mut self, lo: f64, hi: f64) -> Self {
        self.bounds = Some([lo, hi]);
        self
    }

    pub fn verdict(mut self, v: Verdict) -> Self {
        self.verdict = Some(v);
        self
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.values.insert(name.to_string(), v);
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.note = Some(n.into());
        self
    }

    /// Sets bounds from `b` and the verdict from membership of `value`.
    pub fn within(self, b: Bracket) -> Self {
        let v = Verdict::of(b.contains(self.value));
        self.bounds(b.lo, b.hi).verdict(v)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub table: usize,
}

impl Summary {
    pub fn of(rows: &[CheckResult]) -> Self {
        let mut s = Summary::default();
        for r in rows {
            match r.verdict {
                Some(Verdict::Pass) => s.pass += 1,
                Some(Verdict::Fail) => s.fail += 1,
                Some(Verdict::Inconclusive) => s.inconclusive += 1,
                None => s.table += 1,
            }
        }
        s
    }

    pub fn ok(&self, strict: bool) -> bool {
        self.fail == 0 && (!strict || self.inconclusive == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    T1,
    T2,
    Prop1,
    Prop1Induction,
    Fattening,
    Omega,
    HcapCrad,
    Corollary,
    Remark,
    Invariance,
}

impl Claim {
    pub const ALL: [Claim; 10] = [
        Claim::T1,
        Claim::T2,
        Claim::Prop1,
        Claim::Prop1Induction,
        Claim::Fattening,
        Claim::Omega,
        Claim::HcapCrad,
        Claim::Corollary,
        Claim::Remark,
        Claim::Invariance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Claim::T1 => "t1",
            Claim::T2 => "t2",
            Claim::Prop1 => "prop1",
            Claim::Prop1Induction => "prop1-induction",
            Claim::Fattening => "fattening",
            Claim::Omega => "omega",
            Claim::HcapCrad => "hcap-crad",
            Claim::Corollary => "corollary",
            Claim::Remark => "remark",
            Claim::Invariance => "invariance",
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Claim::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown claim {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub n_walks: usize,
    pub eps_stop: f64,
    /// Relative tolerance of certified areas.
    pub tol_area: f64,
    /// Heights for hcap fits; `None` uses the hull-based default.
    pub y_grid: Option<Vec<f64>>,
    /// Heights of the transport tables.
    pub y_list: Vec<f64>,
    pub corpus_size: usize,
    /// Hull radii of the canonical families.
    pub eps_list: Vec<f64>,
    /// Half-width of the bracket around 2 for the transport limits.
    pub delta: f64,
    /// Neighborhood radius of the smoothed layer measures.
    pub omega_eps: f64,
    pub fixtures: Fixtures,
}

impl VerifyConfig {
    pub fn new(seed: u64) -> Self {
        VerifyConfig {
            seed,
            n_walks: 200_000,
            eps_stop: DEFAULT_EPS_STOP,
            tol_area: 1e-3,
            y_grid: None,
            y_list: vec![8.0, 16.0, 32.0],
            corpus_size: 10,
            eps_list: vec![0.3, 0.1, 0.03],
            delta: 0.1,
            omega_eps: 0.125,
            fixtures: Fixtures::shipped(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Argument(format!("invalid verify setting: {what}")));
        if self.n_walks < 2 {
            return bad("walks");
        }
        if !(self.eps_stop > 0.0 && self.eps_stop < 0.1) {
            return bad("eps_stop");
        }
        if !(self.tol_area > 0.0 && self.tol_area < 1.0) {
            return bad("tol_area");
        }
        if self.y_list.is_empty() || self.y_list.iter().any(|y| !(*y > 0.0 && y.is_finite())) {
            return bad("y");
        }
        if self.eps_list.is_empty() || self.eps_list.iter().any(|e| !(*e > 0.0 && *e <= 0.3)) {
            return bad("eps list");
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad("delta");
        }
        Ok(())
    }

    /// Walk parameters for the `index`-th estimate of the job `tag`.
    pub fn params(&self, tag: &str, index: u64) -> WalkParams {
        WalkParams::new(self.n_walks, self.eps_stop, derive_seed(self.seed, tag, index))
    }

    pub(crate) fn corpus_seed(&self, tag: &str) -> u64 {
        derive_seed(self.seed, tag, u64::MAX)
    }
}

/// Runs one claim over its canonical cases and a corpus of
/// `cfg.corpus_size` elements.
pub fn run_claim(claim: Claim, cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    cfg.validate()?;
    let n = cfg.corpus_size;
    Ok(match claim {
        Claim::T1 => {
            let mut rows = vec![checks::thm1_canonical(cfg)?];
            rows.extend(checks::thm1_report(&halfplane_corpus(n, cfg.corpus_seed("halfplane"))?, cfg));
            rows
        }
        Claim::T2 => {
            let mut rows = vec![checks::thm2_canonical(cfg)?];
            rows.extend(checks::thm2_report(&disk_corpus(n, cfg.corpus_seed("disk"))?, cfg));
            rows
        }
        Claim::Prop1 => checks::prop1_suite(cfg, n)?,
        Claim::Prop1Induction => checks::prop1_induction_suite(cfg, n)?,
        Claim::Fattening => checks::fattening_suite(&disk_corpus(n, cfg.corpus_seed("disk"))?, cfg)?,
        Claim::Omega => checks::smoothed_omega_suite(&disk_corpus(n, cfg.corpus_seed("disk"))?, cfg)?,
        Claim::HcapCrad => {
            let mut rows = checks::hcap_crad_residual(checks::Family::HalfDisk, &cfg.eps_list, cfg);
            rows.extend(checks::hcap_crad_residual(checks::Family::VSlit, &cfg.eps_list, cfg));
            rows
        }
        Claim::Corollary => checks::transport_suite(cfg, false)?,
        Claim::Remark => checks::transport_suite(cfg, true)?,
        Claim::Invariance => checks::invariance_suite(
            &halfplane_corpus(n, cfg.corpus_seed("halfplane"))?,
            &disk_corpus(n, cfg.corpus_seed("disk"))?,
            cfg,
        ),
    })
}

pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut rows = Vec::new();
    for c in Claim::ALL {
        rows.extend(run_claim(c, cfg)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claims_round_trip_through_names() {
        for c in Claim::ALL {
            assert_eq!(c.name().parse::<Claim>().unwrap(), c);
        }
        assert!("t3".parse::<Claim>().is_err());
    }

    #[test]
    fn summaries_count_verdicts() {
        let rows = vec![
            CheckResult::new("a", "x", 1.0).verdict(Verdict::Pass),
            CheckResult::new("a", "y", 1.0).verdict(Verdict::Inconclusive),
            CheckResult::new("a", "z", 1.0),
        ];
        let s = Summary::of(&rows);
        assert_eq!((s.pass, s.fail, s.inconclusive, s.table), (1, 0, 1, 1));
        assert!(s.ok(false) && !s.ok(true));
    }

    #[test]
    fn rows_serialize_without_empty_fields() {
        let r = CheckResult::new("t1.ratio", "c", 0.5).within(Bracket { lo: 0.1, hi: 1.0 });
        let j = serde_json::to_value(&r).unwrap();
        assert_eq!(j["verdict"], "pass");
        assert!(j.get("std_error").is_none() && j.get("values").is_none());
        let back: CheckResult = serde_json::from_value(j).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn config_validation_names_the_setting() {
        let mut c = VerifyConfig::new(1);
        c.eps_list = vec![0.5];
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("eps list"), "{e}");
    }
}
