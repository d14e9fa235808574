//! Albert types of endomorphism algebras of simple abelian varieties, the
//! divisibility restrictions they impose on the dimension, and the Picard
//! numbers of self-products.
//!
//! A simple abelian variety `A` of dimension `n` has `End(A) ⊗ Q` a division
//! algebra `D` with centre `K`. Writing `e = [K:Q]`, `d² = [D:K]` and
//! `e0 = [K0:Q]` for the maximal totally real subfield `K0`, the algebra is of
//! one of four kinds:
//!
//! | kind        | data                 | `ρ(A)`    | `ρ(A^k)`          |
//! |-------------|----------------------|-----------|-------------------|
//! | `I(e)`      | totally real field   | `e`       | `e·k(k+1)/2`      |
//! | `II(e)`     | indefinite quaternion| `3e`      | `e·k(2k+1)`       |
//! | `III(e)`    | definite quaternion  | `e`       | `e·k(2k−1)`       |
//! | `IV(e0,d)`  | over a CM field      | `e0·d²`   | `e0·d²·k²`        |
//!
//! The characteristic-zero restriction list used for comparison
//! (`I: e|n, II: 2e|n, III: 2e|n, IV: e0·d²|n`) is the classical one for
//! complex abelian varieties and is not derived here.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlbertError {
    #[error("Albert type parameters must be positive, got {0}")]
    NonPositive(String),
    #[error("cannot parse Albert type `{0}`")]
    Syntax(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
}

/// Endomorphism-algebra type of a simple abelian variety.
///
/// The derived ordering (kind first, then parameters) is the canonical order
/// used by [`admissible_types`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlbertType {
    I(u32),
    II(u32),
    III(u32),
    IV { e0: u32, d: u32 },
}

impl AlbertType {
    pub const ORDINARY: AlbertType = AlbertType::I(1);
    pub const QUATERNION: AlbertType = AlbertType::III(1);
    pub const IMAGINARY_QUADRATIC: AlbertType = AlbertType::IV { e0: 1, d: 1 };

    pub fn iv(e0: u32, d: u32) -> Self {
        AlbertType::IV { e0, d }
    }

    pub fn validate(self) -> Result<Self, AlbertError> {
        let ok = match self {
            AlbertType::I(e) | AlbertType::II(e) | AlbertType::III(e) => e >= 1,
            AlbertType::IV { e0, d } => e0 >= 1 && d >= 1,
        };
        if ok {
            Ok(self)
        } else {
            Err(AlbertError::NonPositive(self.to_string()))
        }
    }

    /// Picard number of a simple variety with this endomorphism type.
    pub fn base_rho(self) -> u64 {
        self.rho_power(1)
    }

    /// `ρ(A^k)` for a simple `A` of this type.
    pub fn rho_power(self, k: u32) -> u64 {
        let k = u64::from(k);
        match self {
            AlbertType::I(e) => u64::from(e) * k * (k + 1) / 2,
            AlbertType::II(e) => u64::from(e) * k * (2 * k + 1),
            AlbertType::III(e) => u64::from(e) * k * (2 * k - 1),
            AlbertType::IV { e0, d } => u64::from(e0) * u64::from(d).pow(2) * k * k,
        }
    }

    /// Rational dimension of `End(A^k) ⊗ Q = M_k(D)`.
    pub fn endo_dim(self, k: u32) -> u64 {
        let k2 = u64::from(k).pow(2);
        match self {
            AlbertType::I(e) => k2 * u64::from(e),
            AlbertType::II(e) | AlbertType::III(e) => k2 * u64::from(e) * 4,
            AlbertType::IV { e0, d } => k2 * 2 * u64::from(e0) * u64::from(d).pow(2),
        }
    }

    /// Whether a simple variety of dimension `n` may carry this type.
    pub fn restrictions_ok(self, n: u32, ctx: &CharContext) -> bool {
        let divides = |a: u64| a != 0 && u64::from(n) % a == 0;
        match (ctx.mode(), self) {
            (_, AlbertType::I(e)) => divides(u64::from(e)),
            (_, AlbertType::II(e)) => divides(2 * u64::from(e)),
            (CharMode::Positive, AlbertType::III(e)) => divides(u64::from(e)),
            (CharMode::Zero, AlbertType::III(e)) => divides(2 * u64::from(e)),
            (CharMode::Positive, AlbertType::IV { e0, d }) => divides(u64::from(e0) * u64::from(d)),
            (CharMode::Zero, AlbertType::IV { e0, d }) => divides(u64::from(e0) * u64::from(d).pow(2)),
        }
    }
}

impl fmt::Display for AlbertType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlbertType::I(e) => write!(f, "I({e})"),
            AlbertType::II(e) => write!(f, "II({e})"),
            AlbertType::III(e) => write!(f, "III({e})"),
            AlbertType::IV { e0, d } => write!(f, "IV({e0},{d})"),
        }
    }
}

impl FromStr for AlbertType {
    type Err = AlbertError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || AlbertError::Syntax(s.to_string());
        let s = s.trim();
        let open = s.find('(').ok_or_else(syntax)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(syntax)?;
        let nums: Vec<u32> = inner
            .split(',')
            .map(|part| part.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| syntax())?;
        let t = match (&s[..open], nums.as_slice()) {
            ("I", [e]) => AlbertType::I(*e),
            ("II", [e]) => AlbertType::II(*e),
            ("III", [e]) => AlbertType::III(*e),
            ("IV", [e0, d]) => AlbertType::IV { e0: *e0, d: *d },
            _ => return Err(syntax()),
        };
        t.validate()
    }
}

impl Serialize for AlbertType {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AlbertType {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharMode {
    Zero,
    Positive,
}

/// How a prime `p` behaves in the centre of a Type `IV(1,n)` algebra. Only
/// consulted in positive characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitPolicy {
    Split,
    #[serde(rename = "nonsplit")]
    NonSplit,
    #[default]
    Unknown,
}

impl FromStr for SplitPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "split" => Ok(SplitPolicy::Split),
            "nonsplit" => Ok(SplitPolicy::NonSplit),
            "unknown" => Ok(SplitPolicy::Unknown),
            other => Err(format!("unknown split policy `{other}`")),
        }
    }
}

impl fmt::Display for SplitPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitPolicy::Split => "split",
            SplitPolicy::NonSplit => "nonsplit",
            SplitPolicy::Unknown => "unknown",
        })
    }
}

/// Characteristic of the (algebraically closed) base field.
///
/// In positive characteristic the prime itself is optional: nothing computed
/// here depends on its value, only on how it splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CharContext {
    Zero,
    Positive { p: Option<u64>, split: SplitPolicy },
}

impl Default for CharContext {
    fn default() -> Self {
        CharContext::Positive {
            p: None,
            split: SplitPolicy::Unknown,
        }
    }
}

impl CharContext {
    pub fn positive(split: SplitPolicy) -> Self {
        CharContext::Positive { p: None, split }
    }

    pub fn with_prime(p: u64, split: SplitPolicy) -> Result<Self, AlbertError> {
        if !is_prime(p) {
            return Err(AlbertError::NotPrime(p));
        }
        Ok(CharContext::Positive { p: Some(p), split })
    }

    pub fn mode(&self) -> CharMode {
        match self {
            CharContext::Zero => CharMode::Zero,
            CharContext::Positive { .. } => CharMode::Positive,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.mode() == CharMode::Positive
    }

    /// Split policy, `None` in characteristic zero where it has no meaning.
    pub fn split_policy(&self) -> Option<SplitPolicy> {
        match self {
            CharContext::Zero => None,
            CharContext::Positive { split, .. } => Some(*split),
        }
    }

    /// Short label: `0`, `p`, or the prime itself.
    pub fn label(&self) -> String {
        match self {
            CharContext::Zero => "0".to_string(),
            CharContext::Positive { p: None, .. } => "p".to_string(),
            CharContext::Positive { p: Some(p), .. } => p.to_string(),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2u64;
    while q * q <= p {
        if p.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

pub fn restrictions_ok(t: AlbertType, n: u32, ctx: &CharContext) -> bool {
    t.restrictions_ok(n, ctx)
}

/// All types a simple variety of dimension `n` may carry, restricted to base
/// Picard number at most `rho_cap`, in canonical order.
///
/// The cap is harmless for enumeration since `ρ(A^k) ≥ ρ(A)`.
pub fn admissible_types(n: u32, ctx: &CharContext, rho_cap: u64) -> Vec<AlbertType> {
    let mut out = Vec::new();
    let divisors: Vec<u32> = (1..=n).filter(|a| n.is_multiple_of(*a)).collect();
    let mut push = |t: AlbertType| {
        if t.base_rho() <= rho_cap && t.restrictions_ok(n, ctx) {
            out.push(t);
        }
    };
    // Every restriction forces e (resp. e0 and d) to divide n.
    for &e in &divisors {
        push(AlbertType::I(e));
    }
    for &e in &divisors {
        push(AlbertType::II(e));
    }
    for &e in &divisors {
        push(AlbertType::III(e));
    }
    for &e0 in &divisors {
        for &d in &divisors {
            push(AlbertType::IV { e0, d });
        }
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn char_p() -> CharContext {
        CharContext::default()
    }

    #[test]
    fn restriction_examples() {
        assert!(!restrictions_ok(AlbertType::iv(2, 2), 3, &char_p()));
        assert!(restrictions_ok(AlbertType::I(1), 5, &char_p()));
        assert!(restrictions_ok(AlbertType::I(1), 5, &CharContext::Zero));
        assert!(restrictions_ok(AlbertType::III(1), 1, &char_p()));
        assert!(!restrictions_ok(AlbertType::III(1), 1, &CharContext::Zero));
    }

    #[test]
    fn rho_power_examples() {
        assert_eq!(AlbertType::III(1).rho_power(6), 66);
        assert_eq!(AlbertType::I(1).rho_power(1), 1);
        assert_eq!(AlbertType::iv(1, 1).rho_power(4), 16);
        assert_eq!(AlbertType::II(2).rho_power(2), 20);
    }

    #[test]
    fn endo_dim_examples() {
        assert_eq!(AlbertType::III(1).endo_dim(1), 4);
        assert_eq!(AlbertType::iv(1, 1).endo_dim(1), 2);
        assert_eq!(AlbertType::I(1).endo_dim(3), 9);
    }

    #[test]
    fn display_and_parse() {
        for t in [
            AlbertType::I(3),
            AlbertType::II(1),
            AlbertType::III(2),
            AlbertType::iv(2, 5),
        ] {
            assert_eq!(t.to_string().parse::<AlbertType>().unwrap(), t);
        }
        assert_eq!("IV( 1 , 3 )".parse::<AlbertType>().unwrap(), AlbertType::iv(1, 3));
        assert!("I(0)".parse::<AlbertType>().is_err());
        assert!("V(1)".parse::<AlbertType>().is_err());
        assert!("IV(1)".parse::<AlbertType>().is_err());
        assert!("I(1".parse::<AlbertType>().is_err());
    }

    #[test]
    fn prime_context() {
        assert!(CharContext::with_prime(7, SplitPolicy::Split).is_ok());
        assert_eq!(
            CharContext::with_prime(9, SplitPolicy::Split),
            Err(AlbertError::NotPrime(9))
        );
        assert_eq!(CharContext::with_prime(5, SplitPolicy::Unknown).unwrap().label(), "5");
    }
}
