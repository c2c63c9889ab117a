//! Empirical constants taken from a pilot run, widened by a fixed margin.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CheckResult, Verdict};
use crate::error::{Error, Result};

/// Widening applied to pilot extremes.
pub const PILOT_MARGIN: f64 = 1.5;

/// Claims whose values are bracketed on both sides.
pub const TWO_SIDED: [&str; 5] = ["t1.ratio", "t2.ratio", "prop1.c1", "prop1.c2", "prop1-induction.step"];

/// Claims bounded above only.
pub const UPPER: [&str; 7] = [
    "t1.spread",
    "fattening.ratio",
    "fattening.step",
    "omega.layer",
    "hcap-crad.exact-ratio",
    "hcap-crad.map-c1",
    "hcap-crad.map-c2",
];

const SHIPPED: &str = include_str!("../../fixtures/pilot.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub const OPEN: Bracket = Bracket {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixtures {
    pub margin: f64,
    pub pilot_seed: u64,
    pub pilot_walks: usize,
    pub pilot_corpus_size: usize,
    pub brackets: BTreeMap<String, Bracket>,
    /// Every bracket is open; used while producing fixtures.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub open: bool,
}

impl Fixtures {
    pub fn shipped() -> Self {
        serde_json::from_str(SHIPPED).expect("committed fixtures parse")
    }

    pub fn open() -> Self {
        Fixtures {
            margin: PILOT_MARGIN,
            pilot_seed: 0,
            pilot_walks: 0,
            pilot_corpus_size: 0,
            brackets: BTreeMap::new(),
            open: true,
        }
    }

    pub fn bracket(&self, claim: &str) -> Bracket {
        if self.open {
            return Bracket::OPEN;
        }
        *self
            .brackets
            .get(claim)
            .unwrap_or_else(|| panic!("no fixture for {claim}"))
    }

    /// Brackets from the extremes of `rows`: `[min/m, max·m]` for two-sided
    /// claims and `[0, max·m]` for upper bounds. Failed rows are ignored.
    pub fn from_pilot(rows: &[CheckResult], seed: u64, walks: usize, corpus_size: usize) -> Result<Self> {
        let m = PILOT_MARGIN;
        let mut brackets = BTreeMap::new();
        for (claim, two_sided) in TWO_SIDED.iter().map(|c| (c, true)).chain(UPPER.iter().map(|c| (c, false))) {
            let vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.claim == *claim && r.verdict.is_some_and(|v| v != Verdict::Fail) && r.value.is_finite())
                .map(|r| r.value)
                .collect();
            if vals.is_empty() {
                return Err(Error::Argument(format!("pilot produced no values for {claim}")));
            }
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let b = if two_sided {
                Bracket { lo: lo / m, hi: hi * m }
            } else {
                Bracket { lo: 0.0, hi: hi * m }
            };
            brackets.insert(claim.to_string(), b);
        }
        Ok(Fixtures {
            margin: m,
            pilot_seed: seed,
            pilot_walks: walks,
            pilot_corpus_size: corpus_size,
            brackets,
            open: false,
        })
    }
}
