//! Isogeny decompositions `X ∼ X_1^{n_1} × ⋯ × X_r^{n_r} × E^s` and the
//! invariants read off from them.
//!
//! Decompositions are formal: a block records the dimension and endomorphism
//! type of a simple factor together with its multiplicity. Distinct
//! non-supersingular blocks always stand for pairwise non-isogenous factors,
//! even when they carry identical data. The supersingular elliptic curve is
//! unique up to isogeny, so at most one supersingular block survives
//! normalization.
//!
//! Textual grammar:
//!
//! ```text
//! decomp  := block (" * " block)*
//! block   := "ss" ["^" INT] | alias ["^" INT] | "[" type "; dim=" INT "]" ["^" INT]
//! alias   := "ord" | "cm"
//! type    := "I(" INT ")" | "II(" INT ")" | "III(" INT ")" | "IV(" INT "," INT ")"
//! ```

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::albert::AlbertType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid block: {0}")]
    Invalid(String),
    #[error("a decomposition needs at least one block")]
    Empty,
}

fn parse_err(pos: usize, msg: impl Into<String>) -> DecompError {
    DecompError::Parse { pos, msg: msg.into() }
}

/// A power `A^k` of a simple abelian variety `A`.
///
/// A one-dimensional block of Type `III(1)` is the supersingular elliptic
/// curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub simple_dim: u32,
    pub albert: AlbertType,
    pub power: u32,
}

impl Block {
    pub fn new(simple_dim: u32, albert: AlbertType, power: u32) -> Result<Self, DecompError> {
        if simple_dim == 0 {
            return Err(DecompError::Invalid("simple dimension must be positive".into()));
        }
        if power == 0 {
            return Err(DecompError::Invalid("power must be positive".into()));
        }
        let albert = albert.validate().map_err(|e| DecompError::Invalid(e.to_string()))?;
        Ok(Block {
            simple_dim,
            albert,
            power,
        })
    }

    pub fn supersingular(power: u32) -> Self {
        Block {
            simple_dim: 1,
            albert: AlbertType::QUATERNION,
            power,
        }
    }

    pub fn ordinary(power: u32) -> Self {
        Block {
            simple_dim: 1,
            albert: AlbertType::ORDINARY,
            power,
        }
    }

    pub fn cm(power: u32) -> Self {
        Block {
            simple_dim: 1,
            albert: AlbertType::IMAGINARY_QUADRATIC,
            power,
        }
    }

    pub fn is_supersingular(&self) -> bool {
        self.simple_dim == 1 && self.albert == AlbertType::QUATERNION
    }

    pub fn dim(&self) -> u32 {
        self.simple_dim * self.power
    }

    pub fn rho(&self) -> u64 {
        self.albert.rho_power(self.power)
    }

    pub fn endo_dim(&self) -> u64 {
        self.albert.endo_dim(self.power)
    }

    /// Bounds on the p-rank contributed by this block.
    pub fn p_rank_interval(&self) -> (u32, u32) {
        let k = self.power;
        match self.simple_dim {
            _ if self.is_supersingular() => (0, 0),
            // a non-supersingular elliptic curve is ordinary
            1 => (k, k),
            // zero p-rank forces supersingularity in dimension two
            2 => (k, 2 * k),
            n => (0, n * k),
        }
    }

    /// Canonical order: the supersingular block first, then the remaining
    /// blocks by decreasing `(simple_dim, albert, power)`.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        other.is_supersingular().cmp(&self.is_supersingular()).then_with(|| {
            (other.simple_dim, other.albert, other.power).cmp(&(self.simple_dim, self.albert, self.power))
        })
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_supersingular() {
            f.write_str("ss")?;
        } else if self.simple_dim == 1 && self.albert == AlbertType::ORDINARY {
            f.write_str("ord")?;
        } else if self.simple_dim == 1 && self.albert == AlbertType::IMAGINARY_QUADRATIC {
            f.write_str("cm")?;
        } else {
            write!(f, "[{}; dim={}]", self.albert, self.simple_dim)?;
        }
        if self.power > 1 {
            write!(f, "^{}", self.power)?;
        }
        Ok(())
    }
}

/// A normalized isogeny decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decomposition {
    blocks: Vec<Block>,
}

impl Decomposition {
    /// Merges supersingular blocks and sorts canonically.
    pub fn normalize(blocks: impl IntoIterator<Item = Block>) -> Result<Self, DecompError> {
        let mut ss_power = 0u32;
        let mut rest = Vec::new();
        for b in blocks {
            if b.is_supersingular() {
                ss_power += b.power;
            } else {
                rest.push(b);
            }
        }
        if ss_power > 0 {
            rest.push(Block::supersingular(ss_power));
        }
        if rest.is_empty() {
            return Err(DecompError::Empty);
        }
        rest.sort_by(Block::canonical_cmp);
        Ok(Decomposition { blocks: rest })
    }

    pub fn parse(text: &str) -> Result<Self, DecompError> {
        Parser::new(text).decomposition()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn rho(&self) -> u64 {
        self.blocks.iter().map(Block::rho).sum()
    }

    pub fn dim(&self) -> u32 {
        self.blocks.iter().map(Block::dim).sum()
    }

    pub fn length(&self) -> usize {
        self.blocks.len()
    }

    /// Supersingularity index: the power of the supersingular block.
    pub fn ss_index(&self) -> u32 {
        self.supersingular_block().map_or(0, |b| b.power)
    }

    pub fn supersingular_block(&self) -> Option<&Block> {
        self.blocks.iter().find(|b| b.is_supersingular())
    }

    pub fn p_rank_interval(&self) -> (u32, u32) {
        self.blocks.iter().fold((0, 0), |(lo, hi), b| {
            let (l, h) = b.p_rank_interval();
            (lo + l, hi + h)
        })
    }

    /// Number of slope-1/2 segments of the Newton polygon coming from the
    /// supersingular part.
    pub fn slope_half_multiplicity(&self) -> u32 {
        2 * self.ss_index()
    }

    /// `dim End(X) ⊗ Q`; homomorphisms between distinct blocks vanish.
    pub fn endo_dim(&self) -> u64 {
        self.blocks.iter().map(Block::endo_dim).sum()
    }

    /// True when this representative violates `2g ≤ dim End(X) ⊗ Q`, so it
    /// cannot be defined over a finite field. Other members of the isogeny
    /// class are not covered by this test.
    pub fn tate_obstruction(&self) -> bool {
        self.endo_dim() < 2 * u64::from(self.dim())
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Decomposition {
    type Err = DecompError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Decomposition::parse(s)
    }
}

impl Serialize for Decomposition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), DecompError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(parse_err(self.pos, format!("expected `{token}`")))
        }
    }

    fn int(&mut self) -> Result<u32, DecompError> {
        let start = self.pos;
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return Err(parse_err(start, "expected an integer"));
        }
        self.pos += digits;
        self.src[start..self.pos]
            .parse()
            .map_err(|_| parse_err(start, "integer out of range"))
    }

    fn positive_int(&mut self) -> Result<u32, DecompError> {
        let start = self.pos;
        match self.int()? {
            0 => Err(parse_err(start, "expected a positive integer")),
            n => Ok(n),
        }
    }

    fn albert(&mut self) -> Result<AlbertType, DecompError> {
        let start = self.pos;
        // longest numeral first
        let t = if self.eat("III(") {
            AlbertType::III(self.int()?)
        } else if self.eat("IV(") {
            let e0 = self.int()?;
            self.skip_ws();
            self.expect(",")?;
            self.skip_ws();
            AlbertType::IV { e0, d: self.int()? }
        } else if self.eat("II(") {
            AlbertType::II(self.int()?)
        } else if self.eat("I(") {
            AlbertType::I(self.int()?)
        } else {
            return Err(parse_err(start, "expected an Albert type"));
        };
        self.expect(")")?;
        t.validate()
            .map_err(|e| DecompError::Invalid(format!("{e} (at byte {start})")))
    }

    fn block(&mut self) -> Result<Block, DecompError> {
        let start = self.pos;
        let (simple_dim, albert) = if self.eat("ss") {
            (1, AlbertType::QUATERNION)
        } else if self.eat("ord") {
            (1, AlbertType::ORDINARY)
        } else if self.eat("cm") {
            (1, AlbertType::IMAGINARY_QUADRATIC)
        } else if self.eat("[") {
            self.skip_ws();
            let t = self.albert()?;
            self.skip_ws();
            self.expect(";")?;
            self.skip_ws();
            self.expect("dim")?;
            self.skip_ws();
            self.expect("=")?;
            self.skip_ws();
            let n = self.positive_int()?;
            self.skip_ws();
            self.expect("]")?;
            (n, t)
        } else {
            return Err(parse_err(start, "expected `ss`, `ord`, `cm` or `[`"));
        };
        let power = if self.eat("^") { self.positive_int()? } else { 1 };
        Block::new(simple_dim, albert, power)
    }

    fn decomposition(mut self) -> Result<Decomposition, DecompError> {
        let mut blocks = Vec::new();
        self.skip_ws();
        loop {
            blocks.push(self.block()?);
            self.skip_ws();
            if self.pos == self.src.len() {
                break;
            }
            self.expect("*")?;
            self.skip_ws();
        }
        Decomposition::normalize(blocks)
    }
}
