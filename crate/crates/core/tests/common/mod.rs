#![allow(dead_code)]

use std::collections::BTreeMap;

use picard::catalog::{BlockTemplate, Catalog, ClassCount};
use picard::{Block, CharContext, Decomposition};

/// What a naive enumeration knows about one Picard number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seen {
    pub min_witness: String,
    pub star: bool,
    pub count: usize,
}

/// Every decomposition of dimension `g` from `cat`, visited once each.
///
/// Blocks are drawn in template order; unbounded templates may repeat, and a
/// single-class entry contributes at most one block over all its powers.
pub fn for_each_decomposition(g: u32, cat: &Catalog, ctx: &CharContext, mut f: impl FnMut(&[Block])) {
    let templates: Vec<BlockTemplate> = (1..=g).flat_map(|m| cat.blocks_for_dim(m, ctx)).collect();
    let mut stack = Vec::new();
    let mut used = Vec::new();
    walk(&templates, 0, g, &mut stack, &mut used, &mut f);
}

fn walk(
    ts: &[BlockTemplate],
    from: usize,
    left: u32,
    stack: &mut Vec<Block>,
    used: &mut Vec<usize>,
    f: &mut impl FnMut(&[Block]),
) {
    if left == 0 {
        f(stack);
        return;
    }
    for i in from..ts.len() {
        let t = &ts[i];
        if t.block.dim() > left {
            continue;
        }
        let one = t.classes == ClassCount::One;
        if one && used.contains(&t.entry) {
            continue;
        }
        stack.push(t.block);
        if one {
            used.push(t.entry);
        }
        let next = if one { i + 1 } else { i };
        walk(ts, next, left - t.block.dim(), stack, used, f);
        if one {
            used.pop();
        }
        stack.pop();
    }
}

pub fn brute_force(g: u32, cat: &Catalog, ctx: &CharContext) -> BTreeMap<u64, Seen> {
    let mut out: BTreeMap<u64, Seen> = BTreeMap::new();
    for_each_decomposition(g, cat, ctx, |blocks| {
        let d = Decomposition::normalize(blocks.iter().copied()).unwrap();
        let rho: u64 = blocks.iter().map(|b| b.rho()).sum();
        let text = d.to_string();
        let star = d.ss_index() == 0;
        out.entry(rho)
            .and_modify(|s| {
                if text < s.min_witness {
                    s.min_witness = text.clone();
                }
                s.star |= star;
                s.count += 1;
            })
            .or_insert(Seen {
                min_witness: text,
                star,
                count: 1,
            });
    });
    out
}

/// Largest Picard number for each length `1..=g`.
pub fn brute_max_by_length(g: u32, cat: &Catalog, ctx: &CharContext) -> Vec<Option<u64>> {
    let mut best = vec![None; g as usize];
    for_each_decomposition(g, cat, ctx, |blocks| {
        let rho: u64 = blocks.iter().map(|b| b.rho()).sum();
        let len = Decomposition::normalize(blocks.iter().copied()).unwrap().length();
        let slot = &mut best[len - 1];
        *slot = Some(slot.map_or(rho, |m: u64| m.max(rho)));
    });
    best
}
