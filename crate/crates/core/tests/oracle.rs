mod common;

use std::time::Instant;

use picard::range::{self, attainable, Enumerator};
use picard::{Catalog, CatalogMode, CharContext, SplitPolicy};

fn contexts() -> Vec<CharContext> {
    vec![
        CharContext::default(),
        CharContext::positive(SplitPolicy::Split),
        CharContext::Zero,
    ]
}

fn compare(g: u32, mode: CatalogMode, ctx: &CharContext) {
    let cat = Catalog::builtin(mode, g, ctx).unwrap();
    let oracle = common::brute_force(g, &cat, ctx);
    let full = attainable(g, &cat, ctx, true);
    assert_eq!(
        full.rho_set(),
        oracle.keys().copied().collect(),
        "values g={g} {mode} {ctx:?}"
    );
    for v in &full.values {
        let seen = &oracle[&v.rho];
        assert_eq!(v.star, seen.star, "star flag of {} at g={g} {mode}", v.rho);
        assert_eq!(
            v.witness.as_ref().unwrap().to_string(),
            seen.min_witness,
            "witness of {} at g={g} {mode}",
            v.rho
        );
    }
    let star = attainable(g, &cat, ctx, false);
    assert_eq!(star.rho_set(), full.star_set());
}

#[test]
fn dp_matches_naive_enumeration() {
    let start = Instant::now();
    for ctx in contexts() {
        for g in 1..=8 {
            for mode in [CatalogMode::Upper, CatalogMode::Paper, CatalogMode::Conservative] {
                compare(g, mode, &ctx);
            }
        }
    }
    eprintln!("oracle comparison took {:?}", start.elapsed());
}

#[test]
fn max_by_length_matches_naive_enumeration() {
    let ctx = CharContext::default();
    for g in 1..=8 {
        let cat = range::upper_catalog(g, &ctx);
        let dp = Enumerator::new(g, &cat, &ctx).max_by_length();
        assert_eq!(dp, common::brute_max_by_length(g, &cat, &ctx), "g={g}");
        for (r, m) in (1..=g).zip(&dp) {
            assert_eq!(m.unwrap(), range::max_by_length_closed(r, g), "r={r} g={g}");
        }
    }
}

#[test]
fn structure_witnesses_match_naive_enumeration() {
    let ctx = CharContext::default();
    for g in 1..=6 {
        let cat = range::upper_catalog(g, &ctx);
        let oracle = common::brute_force(g, &cat, &ctx);
        for (&rho, seen) in &oracle {
            let all = range::structure_witnesses(g, rho, &ctx);
            assert_eq!(all.len(), seen.count, "g={g} rho={rho}");
            assert_eq!(all[0].to_string(), seen.min_witness);
            assert!(all.iter().all(|w| w.rho() == rho && w.dim() == g));
        }
    }
}

#[test]
fn user_catalog_with_single_class_entry() {
    let ctx = CharContext::default();
    let text = r#"[
        {"dim": 1, "type": "I(1)", "classes": "unbounded", "condition": "always"},
        {"dim": 1, "type": "III(1)", "classes": "one", "condition": "always"},
        {"dim": 2, "type": "II(1)", "classes": "one", "condition": "always"},
        {"dim": 3, "type": "IV(1,3)", "classes": "one", "condition": "p_split"}
    ]"#;
    let cat = Catalog::from_json(text, &ctx).unwrap();
    for g in 1..=7 {
        let oracle = common::brute_force(g, &cat, &ctx);
        let r = attainable(g, &cat, &ctx, true);
        assert_eq!(r.rho_set(), oracle.keys().copied().collect(), "g={g}");
        for v in &r.values {
            assert_eq!(v.witness.as_ref().unwrap().to_string(), oracle[&v.rho].min_witness);
        }
    }
}
