//! Which simple blocks are assumed to exist, and in how many isogeny classes.
//!
//! Three built-in catalogs are provided:
//!
//! * `upper`: every type allowed by the divisibility restrictions. Used to
//!   refute membership; it says nothing about existence.
//! * `paper`: the constructions that are known to exist. These are very
//!   general varieties (`ρ = 1`) in every dimension, ordinary and CM elliptic
//!   curves, the supersingular elliptic curve, and, when `p` splits, simple
//!   varieties of Type `IV(1,n)` for `n ≥ 3`.
//! * `conservative`: `paper` without the entries that depend on how `p`
//!   splits.
//!
//! User catalogs are JSON arrays of
//! `{"dim": int, "type": "IV(1,3)", "classes": "one"|"unbounded", "condition": "always"|"p_split"|"unknown"}`.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::albert::{admissible_types, AlbertType, CharContext, SplitPolicy};
use crate::decomp::Block;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog mode `{0}` (expected upper, paper or conservative)")]
    UnknownMode(String),
    #[error("catalog parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot read catalog: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid catalog entry #{index} ({dim}, {albert}): {reason}")]
    InvalidEntry {
        index: usize,
        dim: u32,
        albert: AlbertType,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassCount {
    One,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Always,
    PSplit,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CatalogEntry {
    #[serde(rename = "dim")]
    pub simple_dim: u32,
    #[serde(rename = "type")]
    pub albert: AlbertType,
    pub classes: ClassCount,
    pub condition: Condition,
}

impl CatalogEntry {
    fn new(simple_dim: u32, albert: AlbertType, classes: ClassCount, condition: Condition) -> Self {
        CatalogEntry {
            simple_dim,
            albert,
            classes,
            condition,
        }
    }

    pub fn is_supersingular(&self) -> bool {
        self.simple_dim == 1 && self.albert == AlbertType::QUATERNION
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CatalogMode {
    Upper,
    Paper,
    Conservative,
    File,
}

impl CatalogMode {
    /// Catalogs other than `upper` only list blocks that exist, so their
    /// enumerations certify membership.
    pub fn is_certifying(self) -> bool {
        self != CatalogMode::Upper
    }
}

impl FromStr for CatalogMode {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "upper" => Ok(CatalogMode::Upper),
            "paper" => Ok(CatalogMode::Paper),
            "conservative" => Ok(CatalogMode::Conservative),
            other => Err(CatalogError::UnknownMode(other.to_string())),
        }
    }
}

impl fmt::Display for CatalogMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CatalogMode::Upper => "upper",
            CatalogMode::Paper => "paper",
            CatalogMode::Conservative => "conservative",
            CatalogMode::File => "file",
        })
    }
}

/// A block `A^k` offered by a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockTemplate {
    pub block: Block,
    pub classes: ClassCount,
    /// Index of the originating entry in [`Catalog::entries`].
    pub entry: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    mode: CatalogMode,
    entries: Vec<CatalogEntry>,
}

/// Type `IV(1,n)` simple varieties exist in positive characteristic only when
/// `n = 1`, or when `p` splits and `n = a + b` with `0 < a < b` coprime,
/// which is possible exactly for `n ≥ 3`.
fn iv_one_n(albert: AlbertType) -> Option<u32> {
    match albert {
        AlbertType::IV { e0: 1, d } if d > 1 => Some(d),
        _ => None,
    }
}

impl Catalog {
    pub fn builtin(mode: CatalogMode, g_max: u32, ctx: &CharContext) -> Result<Self, CatalogError> {
        let entries = match mode {
            CatalogMode::Upper => upper_entries(g_max, ctx),
            CatalogMode::Paper => paper_entries(g_max, ctx),
            CatalogMode::Conservative => paper_entries(g_max, ctx)
                .into_iter()
                .filter(|e| e.condition == Condition::Always)
                .collect(),
            CatalogMode::File => {
                return Err(CatalogError::UnknownMode("file".to_string()));
            }
        };
        Ok(Catalog { mode, entries })
    }

    pub fn from_entries(entries: Vec<CatalogEntry>, ctx: &CharContext) -> Result<Self, CatalogError> {
        let mut seen = HashSet::new();
        for (index, e) in entries.iter().enumerate() {
            let invalid = |reason: &str| CatalogError::InvalidEntry {
                index,
                dim: e.simple_dim,
                albert: e.albert,
                reason: reason.to_string(),
            };
            if e.simple_dim == 0 {
                return Err(invalid("dimension must be positive"));
            }
            if !e.albert.restrictions_ok(e.simple_dim, ctx) {
                return Err(invalid("violates the divisibility restrictions"));
            }
            if e.is_supersingular() && e.classes != ClassCount::One {
                return Err(invalid("the supersingular elliptic curve has a single isogeny class"));
            }
            if !seen.insert((e.simple_dim, e.albert)) {
                return Err(invalid("duplicate entry"));
            }
        }
        Ok(Catalog {
            mode: CatalogMode::File,
            entries,
        })
    }

    pub fn from_json(text: &str, ctx: &CharContext) -> Result<Self, CatalogError> {
        let entries: Vec<CatalogEntry> = serde_json::from_str(text)?;
        Catalog::from_entries(entries, ctx)
    }

    pub fn load(path: impl AsRef<Path>, ctx: &CharContext) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)?;
        Catalog::from_json(&text, ctx)
    }

    pub fn mode(&self) -> CatalogMode {
        self.mode
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    fn admits(&self, entry: &CatalogEntry, ctx: &CharContext) -> bool {
        let optimistic = !self.mode.is_certifying();
        match entry.condition {
            Condition::Always => true,
            Condition::Unknown => optimistic,
            Condition::PSplit => match ctx.split_policy() {
                Some(SplitPolicy::Split) => true,
                Some(SplitPolicy::NonSplit) => false,
                Some(SplitPolicy::Unknown) | None => optimistic,
            },
        }
    }

    /// Every block of total dimension `m` that the catalog offers under `ctx`.
    pub fn blocks_for_dim(&self, m: u32, ctx: &CharContext) -> Vec<BlockTemplate> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| m.is_multiple_of(e.simple_dim) && self.admits(e, ctx))
            .map(|(entry, e)| BlockTemplate {
                block: Block {
                    simple_dim: e.simple_dim,
                    albert: e.albert,
                    power: m / e.simple_dim,
                },
                classes: e.classes,
                entry,
            })
            .collect()
    }
}

fn paper_entries(g_max: u32, ctx: &CharContext) -> Vec<CatalogEntry> {
    use ClassCount::*;
    let mut out = Vec::new();
    for n in 1..=g_max {
        out.push(CatalogEntry::new(n, AlbertType::ORDINARY, Unbounded, Condition::Always));
    }
    out.push(CatalogEntry::new(
        1,
        AlbertType::IMAGINARY_QUADRATIC,
        Unbounded,
        Condition::Always,
    ));
    if ctx.is_positive() {
        out.push(CatalogEntry::new(1, AlbertType::QUATERNION, One, Condition::Always));
        for n in 3..=g_max {
            out.push(CatalogEntry::new(n, AlbertType::iv(1, n), Unbounded, Condition::PSplit));
        }
    }
    out
}

fn upper_entries(g_max: u32, ctx: &CharContext) -> Vec<CatalogEntry> {
    let known = paper_entries(g_max, ctx);
    let g = u64::from(g_max);
    let cap = 2 * g * g - g;
    let mut out = Vec::new();
    for n in 1..=g_max {
        for albert in admissible_types(n, ctx, cap) {
            let condition = if let Some(k) = known.iter().find(|e| e.simple_dim == n && e.albert == albert) {
                k.condition
            } else if ctx.is_positive() && iv_one_n(albert) == Some(n) {
                if n < 3 {
                    continue;
                }
                Condition::PSplit
            } else {
                Condition::Unknown
            };
            let classes = if n == 1 && albert == AlbertType::QUATERNION {
                ClassCount::One
            } else {
                ClassCount::Unbounded
            };
            out.push(CatalogEntry::new(n, albert, classes, condition));
        }
    }
    out
}
