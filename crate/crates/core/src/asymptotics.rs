//! Constructive completeness, densities, large Picard numbers, and the
//! conjecture and non-additivity checks built on top of [`crate::range`].
//!
//! Inequalities involving square roots are decided by squaring in integer
//! arithmetic.

use std::collections::BTreeSet;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::albert::CharContext;
use crate::decomp::{Block, Decomposition};
use crate::range::{self, rho_max, upper_catalog, Enumerator};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsymptoticsError {
    #[error("n = {n} is outside 1..={max} for g = {g}")]
    RhoOutOfRange { n: u64, g: u32, max: u64 },
    #[error("construction for n = {n}, g = {g} needs n1 + ... + n5 = {used} <= g - 1")]
    TooManyFactors { n: u64, g: u32, used: u64 },
    #[error("requires g >= {min}, got g = {g}")]
    GenusTooSmall { g: u32, min: u32 },
    #[error("{name} = {value} must satisfy 0 <= {name} <= g = {g}")]
    ParameterOutOfRange { name: &'static str, value: u32, g: u32 },
}

/// Lexicographically largest `(a, b, c, d)`, `a ≥ b ≥ c ≥ d ≥ 0`, with
/// `a² + b² + c² + d² = m`.
pub fn four_square(m: u64) -> [u64; 4] {
    for a in (0..=m.isqrt()).rev() {
        let r = m - a * a;
        if !is_three_squares(r) {
            continue;
        }
        for b in (0..=r.isqrt().min(a)).rev() {
            let r2 = r - b * b;
            if 3 * b * b < r {
                break;
            }
            for c in (0..=r2.isqrt().min(b)).rev() {
                let r3 = r2 - c * c;
                if 2 * c * c < r2 {
                    break;
                }
                let d = r3.isqrt();
                if d * d == r3 && d <= c {
                    return [a, b, c, d];
                }
            }
        }
    }
    unreachable!("every non-negative integer is a sum of four squares")
}

/// Legendre: `m` is a sum of three squares unless `m = 4^a (8b + 7)`.
fn is_three_squares(mut m: u64) -> bool {
    if m == 0 {
        return true;
    }
    while m.is_multiple_of(4) {
        m /= 4;
    }
    m % 8 != 7
}

/// Whether `n < 2g² − 16g√(g+1) + 32(g+1)`.
pub fn completeness_bound_holds(n: u64, g: u32) -> bool {
    let g = i128::from(g);
    let rhs = 2 * g * g + 32 * (g + 1) - i128::from(n);
    rhs > 0 && (16 * g) * (16 * g) * (g + 1) < rhs * rhs
}

/// Picard number `n` in dimension `g` as `E^{n1} × E_2^{n2} × ⋯ × E_5^{n5} × B`,
/// with `E` supersingular, `E_i` pairwise non-isogenous CM curves and `B`
/// simple with `ρ = 1`.
pub fn completeness_witness(n: u64, g: u32) -> Result<Decomposition, AsymptoticsError> {
    let max = rho_max(g);
    if g == 0 || n == 0 || n > max {
        return Err(AsymptoticsError::RhoOutOfRange { n, g, max });
    }
    let mut n1 = 0u64;
    while 2 * (n1 + 1) * (n1 + 1) - (n1 + 1) < n {
        n1 += 1;
    }
    let rest = four_square(n - 1 - (2 * n1 * n1 - n1));
    let used = n1 + rest.iter().sum::<u64>();
    if used > u64::from(g) - 1 {
        return Err(AsymptoticsError::TooManyFactors { n, g, used });
    }
    let mut blocks = Vec::new();
    if n1 > 0 {
        blocks.push(Block::supersingular(n1 as u32));
    }
    for &k in rest.iter().filter(|&&k| k > 0) {
        blocks.push(Block::cm(k as u32));
    }
    let pad = g - used as u32;
    blocks.push(Block {
        simple_dim: pad,
        albert: crate::albert::AlbertType::ORDINARY,
        power: 1,
    });
    Ok(Decomposition::normalize(blocks).expect("positive dimension"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityRecord {
    pub g: u32,
    pub count: u64,
    pub bound: u64,
    #[serde(serialize_with = "ratio_string")]
    pub delta: Ratio<u64>,
}

fn ratio_string<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

/// `#R_g / (2g² − g)` for the lower set.
pub fn density(g: u32, ctx: &CharContext) -> DensityRecord {
    let count = Enumerator::new(g, &range::lower_catalog(g, ctx), ctx)
        .values(true)
        .len() as u64;
    let bound = rho_max(g);
    DensityRecord {
        g,
        count,
        bound,
        delta: Ratio::new(count, bound),
    }
}

pub fn density_table(g_max: u32, ctx: &CharContext) -> Vec<DensityRecord> {
    (1..=g_max).into_par_iter().map(|g| density(g, ctx)).collect()
}

/// Condition (1): `g² < [2(g−n)² − (g−n)] + 1`.
pub fn cond_above_square(g: u32, n: u32) -> bool {
    n < g && u64::from(g) * u64::from(g) < rho_max(g - n) + 1
}

/// Condition (2): `R_{g,n+1}` ends below the start of `R_{g,n}`.
pub fn cond_separated(g: u32, n: u32) -> bool {
    n < g && rho_max(g - n - 1) + u64::from(n) + 1 < rho_max(g - n) + 1
}

/// Greatest `n` with `n ≤ (4g − 1 − √(8g² − 7)) / 4` and `n ≤ −3 + √(4g + 6)`.
pub fn large_threshold(g: u32) -> Result<u32, AsymptoticsError> {
    if g < 5 {
        return Err(AsymptoticsError::GenusTooSmall { g, min: 5 });
    }
    let g = i128::from(g);
    let ok = |n: i128| {
        let t = 4 * g - 1 - 4 * n;
        t >= 0 && 8 * g * g - 7 <= t * t && (n + 3) * (n + 3) <= 4 * g + 6
    };
    let mut n = 0;
    while ok(n + 1) {
        n += 1;
    }
    Ok(n as u32)
}

/// Least `g` for which conditions (1) and (2) hold for every `1 ≤ n ≤ ell`.
pub fn min_genus(ell: u32) -> u32 {
    (1..)
        .find(|&g| (1..=ell).all(|n| cond_above_square(g, n) && cond_separated(g, n)))
        .expect("conditions hold for large g")
}

fn require_min_genus(g: u32, ell: u32) -> Result<(), AsymptoticsError> {
    let min = min_genus(ell);
    if g < min {
        Err(AsymptoticsError::GenusTooSmall { g, min })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistributionReport {
    pub g: u32,
    pub ell: u32,
    pub window_start: u64,
    /// Lower-set values in the window missing from the union of translates.
    pub unexplained: Vec<u64>,
    /// Translate values that are not in the lower set.
    pub unattained: Vec<u64>,
    /// `(a, b, common values)` for overlapping pieces; `b = 0` is `{2g² − g}`.
    pub overlaps: Vec<(u32, u32, Vec<u64>)>,
}

impl DistributionReport {
    pub fn passed(&self) -> bool {
        self.unexplained.is_empty() && self.unattained.is_empty() && self.overlaps.is_empty()
    }
}

/// Checks that the top of `R_g` splits into the translates `R_{g,n}`,
/// `n ≤ ell`, plus the supersingular maximum.
pub fn check_distribution(g: u32, ell: u32, ctx: &CharContext) -> Result<DistributionReport, AsymptoticsError> {
    require_min_genus(g, ell)?;
    let lower = Enumerator::new(g, &range::lower_catalog(g, ctx), ctx);
    let window_start = rho_max(g - ell) + 1;
    let lhs: BTreeSet<u64> = lower.values(true).range(window_start..).copied().collect();

    let mut pieces: Vec<(u32, BTreeSet<u64>)> = (1..=ell)
        .rev()
        .map(|n| (n, range::translate(g, n, &lower.star_values_in_dim(n))))
        .collect();
    pieces.push((0, BTreeSet::from([rho_max(g)])));

    let mut overlaps = Vec::new();
    for (i, (a, sa)) in pieces.iter().enumerate() {
        for (b, sb) in &pieces[i + 1..] {
            let common: Vec<u64> = sa.intersection(sb).copied().collect();
            if !common.is_empty() {
                overlaps.push((*a, *b, common));
            }
        }
    }
    let rhs: BTreeSet<u64> = pieces.into_iter().flat_map(|(_, s)| s).collect();
    Ok(DistributionReport {
        g,
        ell,
        window_start,
        unexplained: lhs.difference(&rhs).copied().collect(),
        unattained: rhs.difference(&lhs).copied().collect(),
        overlaps,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SsViolation {
    pub n: u32,
    pub rho: u64,
    pub ss_index: u32,
    pub witness: Decomposition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrespondenceReport {
    pub g: u32,
    pub ell: u32,
    pub violations: Vec<SsViolation>,
}

impl CorrespondenceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks, over all upper-mode decompositions of dimension `g`, that
/// `ρ ∈ R_{g,n}` exactly when the supersingularity index is `g − n`.
///
/// A decomposition with index `s` has `ρ = 2s² − s + x` where `x` is a star
/// value in dimension `g − s`, so it suffices to range over `(s, x)`.
pub fn check_ss_correspondence(g: u32, ell: u32, ctx: &CharContext) -> Result<CorrespondenceReport, AsymptoticsError> {
    require_min_genus(g, ell)?;
    let upper = Enumerator::new(g, &upper_catalog(g, ctx), ctx);
    let by_index: Vec<(u32, BTreeSet<u64>)> = (0..=g)
        .map(|s| {
            let base = rho_max(s);
            let xs = if s == g {
                BTreeSet::from([0])
            } else {
                upper.star_values_in_dim(g - s)
            };
            (s, xs.into_iter().map(|x| base + x).collect())
        })
        .collect();

    let mut violations = Vec::new();
    for n in 1..=ell {
        let target = range::translate(g, n, &upper.star_values_in_dim(n));
        for (s, values) in &by_index {
            let expected = *s == g - n;
            for &rho in values {
                if target.contains(&rho) != expected {
                    violations.push(SsViolation {
                        n,
                        rho,
                        ss_index: *s,
                        witness: index_witness(&upper, g, *s, rho),
                    });
                }
            }
        }
    }
    Ok(CorrespondenceReport { g, ell, violations })
}

fn index_witness(en: &Enumerator, g: u32, s: u32, rho: u64) -> Decomposition {
    let mut blocks = Vec::new();
    if s > 0 {
        blocks.push(Block::supersingular(s));
    }
    if s < g {
        let rest = en
            .witness_in(g - s, rho - rho_max(s), false)
            .expect("value came from the star table");
        blocks.extend_from_slice(rest.blocks());
    }
    Decomposition::normalize(blocks).expect("positive dimension")
}

/// The three unions of the recursive description of `R_g`: powers of simple
/// varieties (upper catalog), sums of two star sets, and a supersingular part
/// plus a star set.
pub fn conjecture_rhs(g: u32, ctx: &CharContext) -> BTreeSet<u64> {
    let mut out: BTreeSet<u64> = upper_catalog(g, ctx)
        .blocks_for_dim(g, ctx)
        .iter()
        .map(|t| t.block.rho())
        .collect();
    let lower = Enumerator::new(g, &range::lower_catalog(g, ctx), ctx);
    let stars: Vec<BTreeSet<u64>> = (0..g).map(|n| lower.star_values_in_dim(n)).collect();
    for n in 1..g {
        let other = &stars[(g - n) as usize];
        for a in &stars[n as usize] {
            out.extend(other.iter().map(|b| a + b));
        }
        if ctx.is_positive() {
            out.extend(other.iter().map(|b| rho_max(n) + b));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjectureReport {
    pub g: u32,
    pub rhs: Vec<u64>,
    /// In the lower set but not on the right-hand side.
    pub lower_only: Vec<u64>,
    /// On the right-hand side but not in the lower set.
    pub rhs_only: Vec<u64>,
}

impl ConjectureReport {
    pub fn matches(&self) -> bool {
        self.lower_only.is_empty() && self.rhs_only.is_empty()
    }
}

pub fn conjecture_check(g: u32, ctx: &CharContext) -> Result<ConjectureReport, AsymptoticsError> {
    if g < 2 {
        return Err(AsymptoticsError::GenusTooSmall { g, min: 2 });
    }
    let rhs = conjecture_rhs(g, ctx);
    let lower = Enumerator::new(g, &range::lower_catalog(g, ctx), ctx).values(true);
    Ok(ConjectureReport {
        g,
        lower_only: lower.difference(&rhs).copied().collect(),
        rhs_only: rhs.difference(&lower).copied().collect(),
        rhs: rhs.into_iter().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NonAdditive {
    pub a: u32,
    pub ra: u64,
    pub b: u32,
    pub rb: u64,
}

/// Pairs `ra ∈ R_a`, `rb ∈ R_b` with `a + b = g`, `a ≥ b`, and
/// `ra + rb ∉ R_g`.
pub fn nonadditivity_counterexamples(g: u32, ctx: &CharContext) -> Result<Vec<NonAdditive>, AsymptoticsError> {
    if g < 2 {
        return Err(AsymptoticsError::GenusTooSmall { g, min: 2 });
    }
    let lower = |d: u32| Enumerator::new(d, &range::lower_catalog(d, ctx), ctx).values(true);
    let rg = lower(g);
    let mut out = Vec::new();
    for a in (g.div_ceil(2)..g).rev() {
        let b = g - a;
        let (sa, sb) = (lower(a), lower(b));
        for &ra in &sa {
            for &rb in &sb {
                if !rg.contains(&(ra + rb)) {
                    out.push(NonAdditive { a, ra, b, rb });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModuliDims {
    pub dim_ag: u64,
    pub dim_ss: u64,
    pub dim_vf: u64,
    pub dim_l: u64,
}

/// Dimensions of `A_g`, the supersingular locus, the p-rank `f` stratum and
/// the locus of varieties of length-`r` type.
pub fn moduli_dims(g: u32, f: u32, r: u32) -> Result<ModuliDims, AsymptoticsError> {
    if f > g {
        return Err(AsymptoticsError::ParameterOutOfRange { name: "f", value: f, g });
    }
    if r > g {
        return Err(AsymptoticsError::ParameterOutOfRange { name: "r", value: r, g });
    }
    let (g, f, r) = (u64::from(g), u64::from(f), u64::from(r));
    let dim_ag = g * (g + 1) / 2;
    Ok(ModuliDims {
        dim_ag,
        dim_ss: g * g / 4,
        dim_vf: dim_ag - g + f,
        dim_l: (g - r) * (g - r) / 4 + r * (r + 1) / 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> CharContext {
        CharContext::default()
    }

    #[test]
    fn four_square_examples() {
        assert_eq!(four_square(0), [0, 0, 0, 0]);
        assert_eq!(four_square(7), [2, 1, 1, 1]);
        assert_eq!(four_square(4), [2, 0, 0, 0]);
        assert_eq!(four_square(15), [3, 2, 1, 1]);
        assert_eq!(four_square(28), [5, 1, 1, 1]);
    }

    #[test]
    fn witness_examples() {
        assert_eq!(completeness_witness(20, 6).unwrap().to_string(), "ss^3 * cm^2 * ord");
        assert_eq!(completeness_witness(1, 1).unwrap().to_string(), "ord");
        let w = completeness_witness(50, 8).unwrap();
        assert_eq!((w.rho(), w.dim()), (50, 8));
        assert!(!completeness_bound_holds(50, 8));
        assert!(matches!(
            completeness_witness(45, 5),
            Err(AsymptoticsError::TooManyFactors { .. })
        ));
        assert!(completeness_witness(0, 3).is_err());
    }

    #[test]
    fn completeness_bound_at_twenty() {
        let ok: Vec<u64> = (1..=rho_max(20)).filter(|&n| completeness_bound_holds(n, 20)).collect();
        assert_eq!(ok, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(2, &p()).delta, Ratio::new(5, 6));
        assert_eq!(density(3, &p()).delta, Ratio::new(9, 15));
        let d4 = density(4, &p());
        assert_eq!((d4.count, d4.bound), (12, 28));
        let table = density_table(6, &p());
        assert_eq!(table.iter().map(|d| d.g).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(large_threshold(30).unwrap(), 8);
        assert_eq!(large_threshold(5).unwrap(), 1);
        assert!(large_threshold(4).is_err());
    }

    #[test]
    fn min_genus_values() {
        assert_eq!(min_genus(1), 5);
        // condition (1) at g = 7, n = 2 reads 49 < 46
        assert!(!cond_above_square(7, 2));
        assert_eq!(min_genus(2), 8);
    }

    #[test]
    fn distribution_examples() {
        assert!(check_distribution(12, 2, &p()).unwrap().passed());
        assert!(check_distribution(5, 1, &p()).unwrap().passed());
        assert!(matches!(
            check_distribution(4, 1, &p()),
            Err(AsymptoticsError::GenusTooSmall { min: 5, .. })
        ));
    }

    #[test]
    fn correspondence_examples() {
        assert!(check_ss_correspondence(12, 2, &p()).unwrap().passed());
        assert!(matches!(
            check_ss_correspondence(7, 2, &p()),
            Err(AsymptoticsError::GenusTooSmall { min: 8, .. })
        ));
    }

    #[test]
    fn conjecture_small_genera() {
        assert!(conjecture_check(2, &p()).unwrap().matches());
        assert!(conjecture_check(3, &p()).unwrap().matches());
        let r4 = conjecture_check(4, &p()).unwrap();
        assert_eq!((r4.lower_only.clone(), r4.rhs_only.clone()), (vec![], vec![12]));
    }

    #[test]
    fn nonadditivity_examples() {
        let has = |g, x: NonAdditive| nonadditivity_counterexamples(g, &p()).unwrap().contains(&x);
        assert!(has(
            4,
            NonAdditive {
                a: 2,
                ra: 6,
                b: 2,
                rb: 6
            }
        ));
        assert!(has(
            5,
            NonAdditive {
                a: 3,
                ra: 15,
                b: 2,
                rb: 6
            }
        ));
        assert!(has(
            6,
            NonAdditive {
                a: 4,
                ra: 28,
                b: 2,
                rb: 6
            }
        ));
    }

    #[test]
    fn moduli_examples() {
        let m = moduli_dims(4, 2, 0).unwrap();
        assert_eq!((m.dim_ag, m.dim_ss, m.dim_vf), (10, 4, 8));
        assert_eq!(moduli_dims(10, 0, 2).unwrap().dim_l, 19);
        assert!(moduli_dims(3, 4, 0).is_err());
        assert!(moduli_dims(3, 0, 4).is_err());
    }
}
