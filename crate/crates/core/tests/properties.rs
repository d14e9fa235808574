mod common;

use proptest::prelude::*;

use picard::albert::{admissible_types, restrictions_ok};
use picard::asymptotics::four_square;
use picard::catalog::Catalog;
use picard::range::{self, rho_max};
use picard::{AlbertType, Block, CatalogMode, CharContext, Decomposition, SplitPolicy};

fn albert() -> impl Strategy<Value = AlbertType> {
    prop_oneof![
        (1u32..=4).prop_map(AlbertType::I),
        (1u32..=3).prop_map(AlbertType::II),
        (1u32..=3).prop_map(AlbertType::III),
        (1u32..=3, 1u32..=3).prop_map(|(e0, d)| AlbertType::iv(e0, d)),
    ]
}

fn block() -> impl Strategy<Value = Block> {
    prop_oneof![
        (1u32..=6).prop_map(Block::supersingular),
        (1u32..=6).prop_map(Block::ordinary),
        (1u32..=6).prop_map(Block::cm),
        (albert(), 1u32..=6, 1u32..=4).prop_map(|(albert, n, k)| Block {
            simple_dim: n,
            albert,
            power: k,
        }),
    ]
}

fn decomposition() -> impl Strategy<Value = Decomposition> {
    prop::collection::vec(block(), 1..6).prop_map(|b| Decomposition::normalize(b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn format_parse_round_trip(d in decomposition()) {
        let text = d.to_string();
        let back = Decomposition::parse(&text).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn normalize_is_idempotent(blocks in prop::collection::vec(block(), 1..6)) {
        let once = Decomposition::normalize(blocks.clone()).unwrap();
        let twice = Decomposition::normalize(once.blocks().iter().copied()).unwrap();
        prop_assert_eq!(&once, &twice);
        let dim: u32 = blocks.iter().map(|b| b.dim()).sum();
        prop_assert_eq!(once.dim(), dim);
        prop_assert!(once.blocks().iter().filter(|b| b.is_supersingular()).count() <= 1);
    }

    #[test]
    fn p_rank_within_dimension(d in decomposition()) {
        let (lo, hi) = d.p_rank_interval();
        prop_assert!(lo <= hi && hi <= d.dim());
        prop_assert_eq!(d.slope_half_multiplicity(), 2 * d.ss_index());
    }

    #[test]
    fn spacing_around_star_is_optional(d in decomposition()) {
        let tight = d.to_string().replace(" * ", "*");
        prop_assert_eq!(Decomposition::parse(&tight).unwrap(), d);
    }
}

#[test]
fn four_square_up_to_a_million() {
    for m in 0..=1_000_000u64 {
        let [a, b, c, d] = four_square(m);
        assert_eq!(a * a + b * b + c * c + d * d, m, "m = {m}");
        assert!(a >= b && b >= c && c >= d, "m = {m}");
    }
}

#[test]
fn four_square_is_lexicographically_largest() {
    for m in 0..=2_000u64 {
        let mut best = None;
        for a in 0..=m.isqrt() {
            for b in 0..=a {
                for c in 0..=b {
                    for d in 0..=c {
                        if a * a + b * b + c * c + d * d == m {
                            best = best.max(Some([a, b, c, d]));
                        }
                    }
                }
            }
        }
        assert_eq!(Some(four_square(m)), best, "m = {m}");
    }
}

#[test]
fn rho_power_base_values_and_growth() {
    let mut types = Vec::new();
    for e in 1..=10 {
        types.extend([AlbertType::I(e), AlbertType::II(e), AlbertType::III(e)]);
        for d in 1..=10 {
            types.push(AlbertType::iv(e, d));
        }
    }
    for t in types {
        assert_eq!(t.rho_power(1), t.base_rho(), "{t}");
        for k in 1..50 {
            assert!(t.rho_power(k) < t.rho_power(k + 1), "{t} k={k}");
        }
    }
}

#[test]
fn restriction_rules_against_direct_divisibility() {
    // independent restatement of the divisibility rules
    let rule = |t: AlbertType, n: u32, zero: bool| match t {
        AlbertType::I(e) => n.is_multiple_of(e),
        AlbertType::II(e) => n.is_multiple_of(2 * e),
        AlbertType::III(e) => n.is_multiple_of(if zero { 2 * e } else { e }),
        AlbertType::IV { e0, d } => n.is_multiple_of(if zero { e0 * d * d } else { e0 * d }),
    };
    let p = CharContext::default();
    for n in 1..=12 {
        let cap = 2 * u64::from(n) * u64::from(n);
        let mut brute = Vec::new();
        for e in 1..=cap as u32 {
            for t in [AlbertType::I(e), AlbertType::II(e), AlbertType::III(e)] {
                if t.base_rho() <= cap && rule(t, n, false) {
                    brute.push(t);
                }
            }
            for d in 1..=cap as u32 {
                let t = AlbertType::iv(e, d);
                if t.base_rho() <= cap && rule(t, n, false) {
                    brute.push(t);
                }
            }
        }
        brute.sort();
        let got = admissible_types(n, &p, cap);
        assert_eq!(got, brute, "n = {n}");
        assert!(got.windows(2).all(|w| w[0] < w[1]));

        let zero = admissible_types(n, &CharContext::Zero, cap);
        for t in &zero {
            assert!(rule(*t, n, true));
            assert!(got.contains(t), "char 0 type {t} missing in char p, n = {n}");
            assert!(restrictions_ok(*t, n, &p));
        }
    }
}

#[test]
fn recomputed_char_zero_example() {
    let got = admissible_types(2, &CharContext::Zero, 4);
    let want = [
        AlbertType::I(1),
        AlbertType::I(2),
        AlbertType::II(1),
        AlbertType::III(1),
        AlbertType::iv(1, 1),
        AlbertType::iv(2, 1),
    ];
    assert_eq!(got, want);
}

#[test]
fn catalog_modes_are_nested() {
    for split in [SplitPolicy::Split, SplitPolicy::NonSplit, SplitPolicy::Unknown] {
        let ctx = CharContext::positive(split);
        for g in 1..=12 {
            let get = |m| Catalog::builtin(m, g, &ctx).unwrap();
            let (c, p, u) = (
                get(CatalogMode::Conservative),
                get(CatalogMode::Paper),
                get(CatalogMode::Upper),
            );
            let key = |cat: &Catalog| -> Vec<(u32, AlbertType)> {
                cat.entries().iter().map(|e| (e.simple_dim, e.albert)).collect()
            };
            let (kc, kp, ku) = (key(&c), key(&p), key(&u));
            assert!(kc.iter().all(|e| kp.contains(e)));
            assert!(kp.iter().all(|e| ku.contains(e)), "g = {g}");
            for e in u.entries() {
                assert!(restrictions_ok(e.albert, e.simple_dim, &ctx));
            }
        }
    }
}

#[test]
fn declaring_p_split_only_adds_blocks() {
    let unknown = CharContext::positive(SplitPolicy::Unknown);
    let split = CharContext::positive(SplitPolicy::Split);
    for mode in [CatalogMode::Paper, CatalogMode::Upper] {
        let cat = Catalog::builtin(mode, 8, &unknown).unwrap();
        for m in 1..=8 {
            let a = cat.blocks_for_dim(m, &unknown);
            let b = cat.blocks_for_dim(m, &split);
            assert!(a.iter().all(|t| b.contains(t)));
        }
    }
}

#[test]
fn rho_bounds_and_supersingular_maximum() {
    let ctx = CharContext::default();
    for g in 1..=8 {
        let cat = range::upper_catalog(g, &ctx);
        let mut at_max = Vec::new();
        common::for_each_decomposition(g, &cat, &ctx, |blocks| {
            let d = Decomposition::normalize(blocks.iter().copied()).unwrap();
            let rho = d.rho();
            assert!((1..=rho_max(g)).contains(&rho), "{d}");
            if rho == rho_max(g) {
                at_max.push(d.to_string());
            }
            if d.ss_index() == 0 && d.length() == 1 {
                assert!(rho <= u64::from(g * g), "{d}");
            }
            let (lo, hi) = d.p_rank_interval();
            if lo == 0 && hi == 0 && d.blocks().iter().all(|b| b.simple_dim <= 2) {
                assert_eq!(d.ss_index(), g, "{d}");
            }
        });
        if g == 1 {
            // every elliptic curve has rho = 1
            assert_eq!(at_max.len(), 3);
        } else {
            assert_eq!(at_max, vec![format!("ss^{g}")]);
        }
    }
}

#[test]
fn max_by_length_chain_is_strict() {
    for g in 1..=30u32 {
        let m: Vec<u64> = (1..=g).map(|r| range::max_by_length_closed(r, g)).collect();
        assert!(m.windows(2).all(|w| w[0] > w[1]), "g = {g}");
        assert_eq!(m[0], rho_max(g));
        assert_eq!(*m.last().unwrap(), u64::from(g));
    }
}

#[test]
fn gap_theorem_intervals() {
    let ctx = CharContext::default();
    for g in 5..=12 {
        let upper = picard::range::Enumerator::new(g, &range::upper_catalog(g, &ctx), &ctx).values(true);
        let first = rho_max(g - 1) + 1;
        assert!(upper.range(first + 1..rho_max(g)).next().is_none(), "g = {g}");
        if g >= 7 {
            let second = rho_max(g - 2) + 4;
            assert!(upper.range(second + 1..first).next().is_none(), "g = {g}");
        }
    }
}
