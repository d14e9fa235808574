//! Attainable Picard numbers in a fixed dimension.
//!
//! A decomposition of dimension `g` is a multiset of catalog blocks. Listing
//! its blocks in canonical order turns it into a non-decreasing sequence of
//! item indices, so the attainable set is a knapsack over items in that order:
//! unbounded entries may repeat, while the blocks of a single-class entry
//! (the supersingular curve in particular) form a group of which at most one
//! member is used. The supersingular items come first, so the table suffix that
//! starts after them yields the supersingularity-free set for free.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::albert::CharContext;
use crate::catalog::{Catalog, CatalogMode, ClassCount};
use crate::decomp::{Block, Decomposition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RangeError {
    #[error("rho = {rho} is outside 1..={max} for g = {g}")]
    RhoOutOfRange { rho: u64, g: u32, max: u64 },
    #[error("length r = {r} must satisfy 1 <= r <= g = {g}")]
    LengthOutOfRange { r: u32, g: u32 },
    #[error("n = {n} must satisfy 1 <= n <= g = {g}")]
    PartOutOfRange { n: u32, g: u32 },
}

/// `2g² − g`, the Picard number of a supersingular variety of dimension `g`.
pub fn rho_max(g: u32) -> u64 {
    let g = u64::from(g);
    2 * g * g - g
}

/// Closed-form maximum over decompositions of dimension `g` and length `r`.
pub fn max_by_length_closed(r: u32, g: u32) -> u64 {
    rho_max(g - r + 1) + u64::from(r - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Certified,
    UpperOnly,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Certified => "certified",
            Status::UpperOnly => "upper-only",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeValue {
    pub rho: u64,
    pub status: Status,
    pub star: bool,
    pub witness: Option<Decomposition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeResult {
    pub g: u32,
    pub ctx: CharContext,
    pub mode: CatalogMode,
    pub values: Vec<RangeValue>,
}

impl RangeResult {
    pub fn rho_set(&self) -> BTreeSet<u64> {
        self.values.iter().map(|v| v.rho).collect()
    }

    pub fn star_set(&self) -> BTreeSet<u64> {
        self.values.iter().filter(|v| v.star).map(|v| v.rho).collect()
    }

    pub fn get(&self, rho: u64) -> Option<&RangeValue> {
        self.values
            .binary_search_by_key(&rho, |v| v.rho)
            .ok()
            .map(|i| &self.values[i])
    }

    pub fn contains(&self, rho: u64) -> bool {
        self.get(rho).is_some()
    }
}

#[derive(Clone)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(bits: usize) -> Self {
        BitSet {
            words: vec![0; bits.div_ceil(64)],
        }
    }

    fn insert(&mut self, i: u64) {
        self.words[(i / 64) as usize] |= 1 << (i % 64);
    }

    fn contains(&self, i: u64) -> bool {
        let w = (i / 64) as usize;
        w < self.words.len() && self.words[w] >> (i % 64) & 1 == 1
    }

    /// `self |= other << shift`, dropping bits past the last word.
    fn union_shifted(&mut self, other: &BitSet, shift: u64) {
        let ws = (shift / 64) as usize;
        let bs = (shift % 64) as u32;
        let n = self.words.len();
        for i in (ws..n).rev() {
            let src = i - ws;
            let mut v = other.words[src] << bs;
            if bs > 0 && src > 0 {
                v |= other.words[src - 1] >> (64 - bs);
            }
            self.words[i] |= v;
        }
    }

    fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64u64)
                .filter(move |b| w >> b & 1 == 1)
                .map(move |b| wi as u64 * 64 + b)
        })
    }
}

#[derive(Debug, Clone)]
struct Item {
    block: Block,
    dim: u32,
    rho: u64,
    /// Where the enumeration continues after taking this item.
    after: usize,
    /// Position of the formatted block among all items, by string order.
    rank: usize,
}

/// Suffix reachability tables for one dimension and catalog.
///
/// `reach(i, d)` holds every Picard number realised by decompositions of
/// dimension `d` built from items `i..`.
pub struct Enumerator {
    g: u32,
    items: Vec<Item>,
    first_star: usize,
    reach: Vec<BitSet>,
}

impl Enumerator {
    pub fn new(g: u32, cat: &Catalog, ctx: &CharContext) -> Self {
        assert!(g >= 1, "dimension must be positive");
        let mut raw: Vec<(Block, usize, ClassCount)> = (1..=g)
            .flat_map(|m| cat.blocks_for_dim(m, ctx))
            .map(|t| (t.block, t.entry, t.classes))
            .collect();
        raw.sort_by(|a, b| a.0.canonical_cmp(&b.0));

        let n = raw.len();
        let mut after = vec![0; n];
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            if raw[i].2 == ClassCount::One {
                while j < n && raw[j].1 == raw[i].1 {
                    j += 1;
                }
                after[i..j].fill(j);
            } else {
                after[i] = i;
            }
            i = j;
        }

        let mut by_text: Vec<(String, usize)> = raw.iter().enumerate().map(|(i, r)| (r.0.to_string(), i)).collect();
        by_text.sort();
        let mut rank = vec![0; n];
        for (pos, (_, i)) in by_text.into_iter().enumerate() {
            rank[i] = pos;
        }

        let items: Vec<Item> = raw
            .iter()
            .enumerate()
            .map(|(i, (block, _, _))| Item {
                block: *block,
                dim: block.dim(),
                rho: block.rho(),
                after: after[i],
                rank: rank[i],
            })
            .collect();
        let first_star = items.iter().position(|it| !it.block.is_supersingular()).unwrap_or(n);

        let width = rho_max(g) as usize + 1;
        let rows = g as usize + 1;
        let mut reach = vec![BitSet::new(width); (n + 1) * rows];
        reach[n * rows].insert(0);
        for i in (0..n).rev() {
            let it = &items[i];
            for d in 0..rows {
                let mut cell = reach[(i + 1) * rows + d].clone();
                if d >= it.dim as usize {
                    let src = &reach[it.after * rows + d - it.dim as usize];
                    if it.after == i {
                        let src = src.clone();
                        cell.union_shifted(&src, it.rho);
                    } else {
                        cell.union_shifted(src, it.rho);
                    }
                }
                reach[i * rows + d] = cell;
            }
        }

        Enumerator {
            g,
            items,
            first_star,
            reach,
        }
    }

    fn cell(&self, i: usize, d: u32) -> &BitSet {
        &self.reach[i * (self.g as usize + 1) + d as usize]
    }

    fn start(&self, allow_ss: bool) -> usize {
        if allow_ss {
            0
        } else {
            self.first_star
        }
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn values(&self, allow_ss: bool) -> BTreeSet<u64> {
        self.cell(self.start(allow_ss), self.g).iter().collect()
    }

    pub fn contains(&self, rho: u64, allow_ss: bool) -> bool {
        self.cell(self.start(allow_ss), self.g).contains(rho)
    }

    /// Star values of dimension `d < g`, i.e. sums over non-supersingular
    /// blocks of dimension `d` only.
    pub fn star_values_in_dim(&self, d: u32) -> BTreeSet<u64> {
        if d == 0 {
            return BTreeSet::new();
        }
        self.cell(self.first_star, d).iter().collect()
    }

    /// The lexicographically smallest formatted decomposition with the given
    /// Picard number.
    pub fn witness(&self, rho: u64, allow_ss: bool) -> Option<Decomposition> {
        self.witness_in(self.g, rho, allow_ss)
    }

    /// As [`Enumerator::witness`], for a dimension `1 ≤ dim ≤ g`.
    pub fn witness_in(&self, dim: u32, rho: u64, allow_ss: bool) -> Option<Decomposition> {
        let mut pos = self.start(allow_ss);
        if dim == 0 || dim > self.g || !self.cell(pos, dim).contains(rho) {
            return None;
        }
        let (mut d, mut r) = (dim, rho);
        let mut blocks = Vec::new();
        while d > 0 {
            let pick = (pos..self.items.len())
                .filter(|&x| self.feasible(x, d, r))
                .min_by_key(|&x| self.items[x].rank)
                .expect("reachability table promised a completion");
            let it = &self.items[pick];
            blocks.push(it.block);
            d -= it.dim;
            r -= it.rho;
            pos = it.after;
        }
        Some(Decomposition::normalize(blocks).expect("witness has positive dimension"))
    }

    fn feasible(&self, x: usize, d: u32, r: u64) -> bool {
        let it = &self.items[x];
        it.dim <= d && it.rho <= r && self.cell(it.after, d - it.dim).contains(r - it.rho)
    }

    /// Every decomposition with the given Picard number, sorted by formatted
    /// string.
    pub fn all_witnesses(&self, rho: u64, allow_ss: bool) -> Vec<Decomposition> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.collect(self.start(allow_ss), self.g, rho, &mut stack, &mut out);
        let mut out: Vec<Decomposition> = out
            .into_iter()
            .map(|b| Decomposition::normalize(b).expect("positive dimension"))
            .collect();
        out.sort_by_cached_key(|d| d.to_string());
        out
    }

    fn collect(&self, pos: usize, d: u32, r: u64, stack: &mut Vec<Block>, out: &mut Vec<Vec<Block>>) {
        if d == 0 {
            if r == 0 {
                out.push(stack.clone());
            }
            return;
        }
        for x in pos..self.items.len() {
            if self.feasible(x, d, r) {
                let it = &self.items[x];
                stack.push(it.block);
                self.collect(it.after, d - it.dim, r - it.rho, stack, out);
                stack.pop();
            }
        }
    }

    /// Largest Picard number for each length `1..=g` (`None` when no
    /// decomposition of that length exists).
    pub fn max_by_length(&self) -> Vec<Option<u64>> {
        let g = self.g as usize;
        let n = self.items.len();
        let stride = (g + 1) * (g + 1);
        // best[i][len][d]
        let mut best: Vec<Option<u64>> = vec![None; (n + 1) * stride];
        best[n * stride] = Some(0);
        for i in (0..n).rev() {
            let it = &self.items[i];
            let dim = it.dim as usize;
            for len in 0..=g {
                for d in 0..=g {
                    let mut v = best[(i + 1) * stride + len * (g + 1) + d];
                    if len >= 1 && d >= dim {
                        if let Some(prev) = best[it.after * stride + (len - 1) * (g + 1) + d - dim] {
                            v = v.max(Some(prev + it.rho));
                        }
                    }
                    best[i * stride + len * (g + 1) + d] = v;
                }
            }
        }
        (1..=g).map(|len| best[len * (g + 1) + g]).collect()
    }
}

/// Attainable Picard numbers of `g`-dimensional varieties assembled from `cat`.
pub fn attainable(g: u32, cat: &Catalog, ctx: &CharContext, allow_ss: bool) -> RangeResult {
    let en = Enumerator::new(g, cat, ctx);
    result_from(&en, cat.mode(), ctx, allow_ss)
}

fn result_from(en: &Enumerator, mode: CatalogMode, ctx: &CharContext, allow_ss: bool) -> RangeResult {
    let status = if mode.is_certifying() {
        Status::Certified
    } else {
        Status::UpperOnly
    };
    let rhos: Vec<u64> = en.values(allow_ss).into_iter().collect();
    let values = rhos
        .par_iter()
        .map(|&rho| RangeValue {
            rho,
            status,
            star: en.contains(rho, false),
            witness: en.witness(rho, allow_ss),
        })
        .collect();
    RangeResult {
        g: en.g,
        ctx: *ctx,
        mode,
        values,
    }
}

pub fn lower_catalog(g: u32, ctx: &CharContext) -> Catalog {
    Catalog::builtin(CatalogMode::Paper, g, ctx).expect("built-in mode")
}

pub fn upper_catalog(g: u32, ctx: &CharContext) -> Catalog {
    Catalog::builtin(CatalogMode::Upper, g, ctx).expect("built-in mode")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Certified(Decomposition),
    Refuted,
    /// Allowed by the divisibility restrictions but not constructed; carries
    /// a formal decomposition that would realise it.
    Undetermined(Decomposition),
}

impl Membership {
    pub fn label(&self) -> &'static str {
        match self {
            Membership::Certified(_) => "certified",
            Membership::Refuted => "refuted",
            Membership::Undetermined(_) => "undetermined",
        }
    }

    pub fn witness(&self) -> Option<&Decomposition> {
        match self {
            Membership::Certified(w) | Membership::Undetermined(w) => Some(w),
            Membership::Refuted => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeSets {
    pub lower: RangeResult,
    pub upper: RangeResult,
}

impl RangeSets {
    pub fn star_lower(&self) -> BTreeSet<u64> {
        self.lower.star_set()
    }

    pub fn star_upper(&self) -> BTreeSet<u64> {
        self.upper.star_set()
    }

    pub fn status(&self, rho: u64) -> Membership {
        if let Some(v) = self.lower.get(rho) {
            Membership::Certified(v.witness.clone().expect("certified values carry witnesses"))
        } else if let Some(v) = self.upper.get(rho) {
            Membership::Undetermined(v.witness.clone().expect("upper values carry witnesses"))
        } else {
            Membership::Refuted
        }
    }
}

/// The constructed (lower) and restriction-only (upper) sets for dimension `g`.
pub fn range_sets(g: u32, ctx: &CharContext) -> RangeSets {
    let lower = attainable(g, &lower_catalog(g, ctx), ctx, true);
    let upper = attainable(g, &upper_catalog(g, ctx), ctx, true);
    RangeSets { lower, upper }
}

pub fn membership(rho: u64, g: u32, ctx: &CharContext) -> Result<Membership, RangeError> {
    let max = rho_max(g);
    if g == 0 || rho == 0 || rho > max {
        return Err(RangeError::RhoOutOfRange { rho, g, max });
    }
    let lower = Enumerator::new(g, &lower_catalog(g, ctx), ctx);
    if let Some(w) = lower.witness(rho, true) {
        return Ok(Membership::Certified(w));
    }
    let upper = Enumerator::new(g, &upper_catalog(g, ctx), ctx);
    Ok(match upper.witness(rho, true) {
        Some(w) => Membership::Undetermined(w),
        None => Membership::Refuted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LengthMax {
    pub r: u32,
    pub enumerated: u64,
    pub closed_form: u64,
}

impl LengthMax {
    pub fn matches(&self) -> bool {
        self.enumerated == self.closed_form
    }
}

/// Maximum Picard number of upper-mode decompositions of dimension `g` with
/// exactly `r` blocks, alongside the closed form.
pub fn max_by_length(r: u32, g: u32, ctx: &CharContext) -> Result<LengthMax, RangeError> {
    if r == 0 || r > g {
        return Err(RangeError::LengthOutOfRange { r, g });
    }
    Ok(max_by_length_all(g, ctx)[r as usize - 1])
}

pub fn max_by_length_all(g: u32, ctx: &CharContext) -> Vec<LengthMax> {
    let en = Enumerator::new(g, &upper_catalog(g, ctx), ctx);
    en.max_by_length()
        .into_iter()
        .zip(1..)
        .map(|(m, r)| LengthMax {
            r,
            enumerated: m.expect("every length up to g is realised by elliptic factors"),
            closed_form: max_by_length_closed(r, g),
        })
        .collect()
}

/// Maximal runs `lo..=hi` of `1..=2g²−g` that no upper-mode decomposition
/// reaches.
pub fn gaps(g: u32, ctx: &CharContext) -> Vec<(u64, u64)> {
    let values = Enumerator::new(g, &upper_catalog(g, ctx), ctx).values(true);
    intervals_missing(&values, 1, rho_max(g))
}

pub fn intervals_missing(values: &BTreeSet<u64>, lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut start = None;
    for x in lo..=hi {
        match (values.contains(&x), start) {
            (false, None) => start = Some(x),
            (true, Some(s)) => {
                out.push((s, x - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, hi));
    }
    out
}

/// All upper-mode decompositions of dimension `g` with Picard number `rho`.
pub fn structure_witnesses(g: u32, rho: u64, ctx: &CharContext) -> Vec<Decomposition> {
    Enumerator::new(g, &upper_catalog(g, ctx), ctx).all_witnesses(rho, true)
}

/// Supersingularity-free values of the lower set in dimension `n`.
pub fn star_set(n: u32, ctx: &CharContext) -> BTreeSet<u64> {
    Enumerator::new(n, &lower_catalog(n, ctx), ctx).values(false)
}

/// Values of `E^{g−n} × Y` with `E` supersingular and `Y` of dimension `n`
/// without supersingular part.
pub fn translated_range(g: u32, n: u32, ctx: &CharContext) -> Result<BTreeSet<u64>, RangeError> {
    if n == 0 || n > g {
        return Err(RangeError::PartOutOfRange { n, g });
    }
    Ok(translate(g, n, &star_set(n, ctx)))
}

pub fn translate(g: u32, n: u32, star: &BTreeSet<u64>) -> BTreeSet<u64> {
    let base = rho_max(g - n);
    star.iter().map(|x| base + x).collect()
}

/// Values whose parity matches `b₂ = 2g² − g`.
pub fn parity_filter(result: &RangeResult) -> Vec<u64> {
    let b2 = rho_max(result.g);
    result
        .values
        .iter()
        .map(|v| v.rho)
        .filter(|r| r % 2 == b2 % 2)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> CharContext {
        CharContext::default()
    }

    fn set(v: impl IntoIterator<Item = u64>) -> BTreeSet<u64> {
        v.into_iter().collect()
    }

    #[test]
    fn bitset_shift_crosses_words() {
        let mut a = BitSet::new(200);
        a.insert(3);
        a.insert(63);
        let mut b = BitSet::new(200);
        b.union_shifted(&a, 70);
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![73, 133]);
        let mut c = BitSet::new(128);
        c.union_shifted(&a, 70);
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![73]);
        assert!(!c.contains(133));
    }

    #[test]
    fn printed_small_ranges() {
        let cat = |g| lower_catalog(g, &p());
        assert_eq!(attainable(2, &cat(2), &p(), true).rho_set(), set([1, 2, 3, 4, 6]));
        assert_eq!(
            attainable(3, &cat(3), &p(), true).rho_set(),
            set((1..=7).chain([9, 15]))
        );
        assert_eq!(
            attainable(4, &cat(4), &p(), true).rho_set(),
            set((1..=10).chain([16, 28]))
        );
        assert_eq!(attainable(3, &cat(3), &p(), false).rho_set(), set((1..=6).chain([9])));
    }

    #[test]
    fn star_flags_agree_with_star_enumeration() {
        for g in 1..=6 {
            let cat = lower_catalog(g, &p());
            let full = attainable(g, &cat, &p(), true);
            let star = attainable(g, &cat, &p(), false);
            assert_eq!(full.star_set(), star.rho_set());
            assert!(star.rho_set().is_subset(&full.rho_set()));
        }
    }

    #[test]
    fn witnesses_realise_their_values() {
        for g in 1..=7 {
            let sets = range_sets(g, &p());
            for v in sets.lower.values.iter().chain(&sets.upper.values) {
                let w = v.witness.as_ref().unwrap();
                assert_eq!((w.rho(), w.dim()), (v.rho, g), "{w}");
                if !v.star {
                    assert!(w.ss_index() > 0);
                }
            }
        }
    }

    #[test]
    fn membership_examples() {
        assert_eq!(
            membership(6, 2, &p()).unwrap(),
            Membership::Certified("ss^2".parse().unwrap())
        );
        assert_eq!(membership(5, 2, &p()).unwrap(), Membership::Refuted);
        assert_eq!(membership(8, 3, &p()).unwrap(), Membership::Refuted);
        assert_eq!(
            membership(13, 5, &p()).unwrap(),
            Membership::Certified("cm^3 * cm^2".parse().unwrap())
        );
        for rho in [11, 13, 14, 15] {
            assert_eq!(membership(rho, 4, &p()).unwrap(), Membership::Refuted, "{rho}");
        }
        assert_eq!(
            membership(12, 4, &p()).unwrap(),
            Membership::Undetermined("[III(2); dim=2]^2".parse().unwrap())
        );
        assert!(matches!(
            membership(7, 2, &p()),
            Err(RangeError::RhoOutOfRange { max: 6, .. })
        ));
        assert!(membership(0, 2, &p()).is_err());
    }

    #[test]
    fn max_by_length_examples() {
        assert_eq!(max_by_length(1, 5, &p()).unwrap().enumerated, 45);
        assert_eq!(max_by_length(5, 5, &p()).unwrap().enumerated, 5);
        let m = max_by_length(2, 6, &p()).unwrap();
        assert_eq!((m.enumerated, m.closed_form), (46, 46));
        assert!(max_by_length(7, 6, &p()).is_err());
    }

    #[test]
    fn gap_examples() {
        assert_eq!(gaps(2, &p()), vec![(5, 5)]);
        assert_eq!(gaps(4, &p()), vec![(11, 11), (13, 15), (17, 27)]);
        assert!(gaps(5, &p()).contains(&(30, 44)));
    }

    #[test]
    fn structure_examples() {
        assert_eq!(
            structure_witnesses(2, 6, &p()),
            vec!["ss^2".parse::<Decomposition>().unwrap()]
        );
        let top: Vec<String> = structure_witnesses(8, 92, &p()).iter().map(|d| d.to_string()).collect();
        assert_eq!(top, ["ss^7 * cm", "ss^7 * ord"]);
        let next: Vec<String> = structure_witnesses(8, 70, &p()).iter().map(|d| d.to_string()).collect();
        assert_eq!(next, ["ss^6 * cm^2"]);
    }

    #[test]
    fn translated_examples() {
        assert_eq!(translated_range(6, 2, &p()).unwrap(), set([29, 30, 31, 32]));
        assert!(!translated_range(5, 2, &p()).unwrap().contains(&31));
        for g in 1..=6 {
            assert_eq!(translated_range(g, 1, &p()).unwrap(), set([rho_max(g - 1) + 1]));
        }
        assert!(translated_range(3, 4, &p()).is_err());
    }

    #[test]
    fn parity_examples() {
        let r2 = attainable(2, &lower_catalog(2, &p()), &p(), true);
        assert_eq!(parity_filter(&r2), vec![2, 4, 6]);
        let r3 = attainable(3, &lower_catalog(3, &p()), &p(), true);
        assert_eq!(parity_filter(&r3), vec![1, 3, 5, 7, 9, 15]);
    }

    #[test]
    fn characteristic_zero_has_no_supersingular_values() {
        let ctx = CharContext::Zero;
        let r2 = attainable(2, &lower_catalog(2, &ctx), &ctx, true);
        assert_eq!(r2.rho_set(), set([1, 2, 3, 4]));
        assert!(r2.values.iter().all(|v| v.star));
    }
}
