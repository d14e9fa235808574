//! Comparison of computed ranges against printed tables.
//!
//! Printed data is kept verbatim in `data/fixtures.json`; entries known to
//! disagree with the enumeration are listed in `data/allowlist.json`. Every
//! disagreement is reported together with a decomposition that exhibits the
//! computed side, re-checked for Picard number and dimension.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::albert::CharContext;
use crate::decomp::Decomposition;
use crate::range::{lower_catalog, upper_catalog, Enumerator};

pub const DEFAULT_FIXTURES: &str = include_str!("../data/fixtures.json");
pub const DEFAULT_ALLOWLIST: &str = include_str!("../data/allowlist.json");
pub const FIXTURES_ENV: &str = "PICARD_FIXTURES";

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed fixture data: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("fixture {label}: {reason}")]
    Invalid { label: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub label: String,
    pub g: u32,
    pub citation: String,
    pub values: Vec<u64>,
    /// Values printed as reachable only with a supersingular factor; absent
    /// when the source gives no star split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bold: Option<Vec<u64>>,
}

impl Fixture {
    pub fn star(&self) -> Option<BTreeSet<u64>> {
        let bold: BTreeSet<u64> = self.bold.as_ref()?.iter().copied().collect();
        Some(self.values.iter().copied().filter(|v| !bold.contains(v)).collect())
    }

    fn validate(&self) -> Result<(), VerifyError> {
        let invalid = |reason: &str| VerifyError::Invalid {
            label: self.label.clone(),
            reason: reason.to_string(),
        };
        if self.g == 0 {
            return Err(invalid("g must be positive"));
        }
        if !self.values.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid("values must be strictly increasing"));
        }
        if let Some(bold) = &self.bold {
            if bold.iter().any(|b| !self.values.contains(b)) {
                return Err(invalid("bold entries must be values"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FixtureFile {
    fixtures: Vec<Fixture>,
}

pub fn parse_fixtures(text: &str) -> Result<Vec<Fixture>, VerifyError> {
    let file: FixtureFile = serde_json::from_str(text)?;
    for f in &file.fixtures {
        f.validate()?;
    }
    Ok(file.fixtures)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffKind {
    Value,
    Star,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllowEntry {
    pub g: u32,
    pub kind: DiffKind,
    pub rho: u64,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allowlist {
    pub entries: Vec<AllowEntry>,
}

impl Allowlist {
    pub fn parse(text: &str) -> Result<Self, VerifyError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn find(&self, g: u32, kind: DiffKind, rho: u64) -> Option<&AllowEntry> {
        self.entries.iter().find(|e| e.g == g && e.kind == kind && e.rho == rho)
    }
}

pub fn read_file(path: impl AsRef<Path>) -> Result<String, VerifyError> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|source| VerifyError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Fixtures from `path`, else from `$PICARD_FIXTURES`, else the bundled file.
pub fn load_fixtures(path: Option<&Path>) -> Result<Vec<Fixture>, VerifyError> {
    match path {
        Some(p) => parse_fixtures(&read_file(p)?),
        None => match std::env::var_os(FIXTURES_ENV) {
            Some(p) => parse_fixtures(&read_file(p)?),
            None => parse_fixtures(DEFAULT_FIXTURES),
        },
    }
}

pub fn load_allowlist(path: Option<&Path>) -> Result<Allowlist, VerifyError> {
    match path {
        Some(p) => Allowlist::parse(&read_file(p)?),
        None => Allowlist::parse(DEFAULT_ALLOWLIST),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diff {
    pub kind: DiffKind,
    pub rho: u64,
    /// `present`/`absent` for values, `star`/`non-star` for the split.
    pub computed: &'static str,
    pub printed: &'static str,
    pub witness: Option<Decomposition>,
    /// Whether the witness has the claimed Picard number and dimension.
    pub witness_checked: bool,
    pub allowlisted: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixtureReport {
    pub label: String,
    pub g: u32,
    pub citation: String,
    pub values_pass: bool,
    pub star_pass: Option<bool>,
    pub diffs: Vec<Diff>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub fixtures: Vec<FixtureReport>,
}

impl VerifyReport {
    pub fn diffs(&self) -> impl Iterator<Item = &Diff> {
        self.fixtures.iter().flat_map(|f| &f.diffs)
    }

    /// Disagreements that are not documented on the allowlist.
    pub fn unexpected(&self) -> usize {
        self.diffs().filter(|d| !d.allowlisted).count()
    }

    pub fn total(&self) -> usize {
        self.diffs().count()
    }
}

/// Compares each fixture with the lower (constructed) set.
pub fn verify(fixtures: &[Fixture], allow: &Allowlist, ctx: &CharContext) -> VerifyReport {
    let reports = fixtures.iter().map(|f| verify_one(f, allow, ctx)).collect();
    VerifyReport { fixtures: reports }
}

fn verify_one(f: &Fixture, allow: &Allowlist, ctx: &CharContext) -> FixtureReport {
    let g = f.g;
    let lower = Enumerator::new(g, &lower_catalog(g, ctx), ctx);
    let computed = lower.values(true);
    let computed_star = lower.values(false);
    let printed: BTreeSet<u64> = f.values.iter().copied().collect();

    let make = |kind, rho, computed, printed, witness: Option<Decomposition>| {
        let witness_checked = witness.as_ref().is_some_and(|w| {
            let w2 = Decomposition::parse(&w.to_string()).expect("formatted witnesses parse");
            w2.rho() == rho && w2.dim() == g
        });
        let entry = allow.find(g, kind, rho);
        Diff {
            kind,
            rho,
            computed,
            printed,
            witness,
            witness_checked,
            allowlisted: entry.is_some(),
            note: entry.map(|e| e.note.clone()),
        }
    };

    let mut diffs = Vec::new();

    for &rho in computed.symmetric_difference(&printed) {
        if computed.contains(&rho) {
            diffs.push(make(
                DiffKind::Value,
                rho,
                "present",
                "absent",
                lower.witness(rho, true),
            ));
        } else {
            // printed but not constructed: show a formal decomposition if the
            // restrictions allow one
            let upper = Enumerator::new(g, &upper_catalog(g, ctx), ctx);
            diffs.push(make(
                DiffKind::Value,
                rho,
                "absent",
                "present",
                upper.witness(rho, true),
            ));
        }
    }
    let values_pass = diffs.is_empty();

    let star_pass = f.star().map(|star| {
        let before = diffs.len();
        for &rho in computed.intersection(&printed) {
            let (c, p) = (computed_star.contains(&rho), star.contains(&rho));
            if c && !p {
                diffs.push(make(DiffKind::Star, rho, "star", "non-star", lower.witness(rho, false)));
            } else if !c && p {
                diffs.push(make(DiffKind::Star, rho, "non-star", "star", lower.witness(rho, true)));
            }
        }
        diffs.len() == before
    });

    FixtureReport {
        label: f.label.clone(),
        g,
        citation: f.citation.clone(),
        values_pass,
        star_pass,
        diffs,
    }
}
