//! Exact word algebra: composing generator words into affine maps,
//! derivatives, the bounded-orbit derivative inequality and exact-rational
//! coincidence search.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::Error;
use crate::word::Word;
use crate::Result;

/// The generator pair `T0(x) = a*x`, `T1(x) = b*x + 1` with `0 < a < 1 < b`.
///
/// When both slopes are rational the exact representations enable
/// exact-rational composition (coincidence search runs in exact mode only).
#[derive(Clone, Debug)]
pub struct SystemParams {
    pub a: f64,
    pub b: f64,
    exact: Option<(BigRational, BigRational)>,
}

impl SystemParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0 && b > 1.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParams { a, b });
        }
        Ok(SystemParams { a, b, exact: None })
    }

    /// Construct with exact rational slopes `a = an/ad`, `b = bn/bd`.
    pub fn new_exact(an: i64, ad: i64, bn: i64, bd: i64) -> Result<Self> {
        let ra = BigRational::new(BigInt::from(an), BigInt::from(ad));
        let rb = BigRational::new(BigInt::from(bn), BigInt::from(bd));
        let a = ratio_to_f64(&ra);
        let b = ratio_to_f64(&rb);
        if !(ra > BigRational::zero() && ra < BigRational::one() && rb > BigRational::one()) {
            return Err(Error::InvalidParams { a, b });
        }
        Ok(SystemParams {
            a,
            b,
            exact: Some((ra, rb)),
        })
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact_slopes(&self) -> Result<(&BigRational, &BigRational)> {
        match &self.exact {
            Some((a, b)) => Ok((a, b)),
            None => Err(Error::ExactModeUnavailable),
        }
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    // Good enough for the magnitudes used here; exact arithmetic never
    // round-trips through this.
    let n = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    n / d
}

/// An affine map `x -> slope*x + intercept` in floating point. Every
/// composite of the generators has positive slope and nonnegative intercept.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub slope: f64,
    pub intercept: f64,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap {
            slope: 1.0,
            intercept: 0.0,
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// Post-compose with generator `symbol`: `T_symbol ∘ self`.
    pub fn then_generator(&self, symbol: u8, params: &SystemParams) -> AffineMap {
        match symbol {
            0 => AffineMap {
                slope: params.a * self.slope,
                intercept: params.a * self.intercept,
            },
            _ => AffineMap {
                slope: params.b * self.slope,
                intercept: params.b * self.intercept + 1.0,
            },
        }
    }
}

/// Exact-rational counterpart of [`AffineMap`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactAffineMap {
    pub slope: BigRational,
    pub intercept: BigRational,
}

impl ExactAffineMap {
    pub fn identity() -> Self {
        ExactAffineMap {
            slope: BigRational::one(),
            intercept: BigRational::zero(),
        }
    }

    pub fn apply(&self, x: &BigRational) -> BigRational {
        &self.slope * x + &self.intercept
    }

    pub fn then_generator(&self, symbol: u8, a: &BigRational, b: &BigRational) -> ExactAffineMap {
        match symbol {
            0 => ExactAffineMap {
                slope: a * &self.slope,
                intercept: a * &self.intercept,
            },
            _ => ExactAffineMap {
                slope: b * &self.slope,
                intercept: b * &self.intercept + BigRational::one(),
            },
        }
    }

    pub fn to_float(&self) -> AffineMap {
        AffineMap {
            slope: ratio_to_f64(&self.slope),
            intercept: ratio_to_f64(&self.intercept),
        }
    }
}

/// Composite `T_w = T_{w_{n-1}} ∘ ... ∘ T_{w_0}` (first symbol applied
/// first), accumulated left to right over the symbols.
pub fn compose(word: &Word, params: &SystemParams) -> AffineMap {
    let mut m = AffineMap::identity();
    for s in word.symbols() {
        m = m.then_generator(s, params);
    }
    m
}

/// Exact-rational composition; requires exact parameters.
pub fn compose_exact(word: &Word, params: &SystemParams) -> Result<ExactAffineMap> {
    let (a, b) = params.exact_slopes()?;
    let mut m = ExactAffineMap::identity();
    for s in word.symbols() {
        m = m.then_generator(s, a, b);
    }
    Ok(m)
}

/// Derivative of the composite: `a^{n-m} b^m` where `m` counts 1-symbols.
/// Equals the composed slope exactly up to the order of multiplication.
pub fn word_derivative(word: &Word, params: &SystemParams) -> f64 {
    let mut d = 1.0;
    for s in word.symbols() {
        d *= if s == 0 { params.a } else { params.b };
    }
    d
}

/// Outcome of checking `1/(a^{n-m} b^m) >= (m-1) x / (b M^2)` along an orbit
/// that is supposed to stay below `M`.
#[derive(Clone, Debug)]
pub struct Mr33Report {
    /// `1 / (a^{n-m} b^m)`, the reciprocal derivative.
    pub lhs: f64,
    /// `(m - 1) * x / (b * M^2)`.
    pub rhs: f64,
    /// Whether the inequality holds. Meaningful only when the orbit
    /// precondition is satisfied.
    pub holds: bool,
    /// First prefix length whose image exceeds `M`, if any; such a
    /// violation voids the inequality claim rather than refuting it.
    pub violated_prefix: Option<usize>,
}

/// Check the derivative lower bound for a bounded intermediate orbit.
pub fn mr33_check(word: &Word, x: f64, bound_m: f64, params: &SystemParams) -> Mr33Report {
    let mut violated_prefix = None;
    if x > bound_m {
        violated_prefix = Some(0);
    } else {
        let mut cur = x;
        for (k, s) in word.symbols().enumerate() {
            cur = if s == 0 {
                params.a * cur
            } else {
                params.b * cur + 1.0
            };
            if cur > bound_m {
                violated_prefix = Some(k + 1);
                break;
            }
        }
    }
    let m = word.count_ones() as f64;
    let lhs = 1.0 / word_derivative(word, params);
    let rhs = (m - 1.0) * x / (params.b * bound_m * bound_m);
    Mr33Report {
        lhs,
        rhs,
        holds: lhs >= rhs,
        violated_prefix,
    }
}

/// A set of distinct words of equal composite map, found by exact search.
#[derive(Clone, Debug)]
pub struct CoincidenceClass {
    pub map: ExactAffineMap,
    /// Length-lexicographic order.
    pub words: Vec<Word>,
}

/// Group all words of length `<= max_len` by their exact composite map and
/// return the classes with at least two members, ordered by their first
/// word. Exact mode only: floating equality is never trusted here.
pub fn coincidence_search(max_len: u32, params: &SystemParams) -> Result<Vec<CoincidenceClass>> {
    let (a, b) = params.exact_slopes()?;
    assert!(max_len <= 32, "coincidence search is exponential in max_len");

    // Enumerate in length-lex order so class membership lists come out
    // sorted; parallelize over fixed-length blocks (deterministic merge by
    // block index).
    let mut all: Vec<(ExactAffineMap, Word)> = Vec::new();
    for len in 1..=max_len {
        let block: Vec<(ExactAffineMap, Word)> = (0u64..1u64 << len)
            .into_par_iter()
            .map(|lex| {
                // Lex order within a length: w_0 is the most significant digit.
                let mut word = Word::empty();
                for i in (0..len).rev() {
                    word.push(((lex >> i) & 1) as u8);
                }
                let mut m = ExactAffineMap::identity();
                for s in word.symbols() {
                    m = m.then_generator(s, a, b);
                }
                (m, word)
            })
            .collect();
        all.extend(block);
    }

    let mut by_map: std::collections::BTreeMap<ExactAffineMap, Vec<Word>> =
        std::collections::BTreeMap::new();
    for (map, word) in all {
        by_map.entry(map).or_default().push(word);
    }

    let mut classes: Vec<CoincidenceClass> = by_map
        .into_iter()
        .filter(|(_, words)| words.len() >= 2)
        .map(|(map, mut words)| {
            words.sort_by_key(|w| (w.len(), w.to_string()));
            CoincidenceClass { map, words }
        })
        .collect();
    classes.sort_by_key(|c| (c.words[0].len(), c.words[0].to_string()));
    Ok(classes)
}

pub fn big_ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams::new(0.5, 1.5).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SystemParams::new(1.2, 1.5).is_err());
        assert!(SystemParams::new(0.5, 0.9).is_err());
        assert!(SystemParams::new(0.0, 2.0).is_err());
    }

    #[test]
    fn compose_identity_and_generators() {
        let p = params();
        let id = compose(&Word::empty(), &p);
        assert_eq!(id, AffineMap::identity());
        let t1 = compose(&"1".parse().unwrap(), &p);
        assert_eq!(t1.slope, 1.5);
        assert_eq!(t1.intercept, 1.0);
    }

    #[test]
    fn compose_exact_five_letter_words() {
        let p = SystemParams::new_exact(1, 2, 4, 3).unwrap();
        let m1 = compose_exact(&"10001".parse().unwrap(), &p).unwrap();
        let m2 = compose_exact(&"00110".parse().unwrap(), &p).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(m1.slope, big_ratio(2, 9));
        assert_eq!(m1.intercept, big_ratio(7, 6));
        // Under the reversed-convention reading the remark's pair differs:
        let m3 = compose_exact(&"01100".parse().unwrap(), &p).unwrap();
        assert_eq!(m3.slope, big_ratio(2, 9));
        assert_eq!(m3.intercept, big_ratio(7, 12));
        assert_ne!(m1, m3);
    }

    #[test]
    fn apply_examples() {
        assert_eq!(AffineMap::identity().apply(5.0), 5.0);
        let t1 = AffineMap {
            slope: 1.5,
            intercept: 1.0,
        };
        assert_eq!(t1.apply(0.0), 1.0);
        let m = AffineMap {
            slope: 2.0 / 9.0,
            intercept: 7.0 / 6.0,
        };
        assert!((m.apply(3.0) - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_slope_law() {
        let p = params();
        assert_eq!(word_derivative(&Word::empty(), &p), 1.0);
        assert_eq!(word_derivative(&"01".parse().unwrap(), &p), 0.75);
        let p43 = SystemParams::new_exact(1, 2, 4, 3).unwrap();
        let w: Word = "10001".parse().unwrap();
        assert!((word_derivative(&w, &p43) - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(word_derivative(&w, &p43), compose(&w, &p43).slope);
    }

    #[test]
    fn mr33_trivial_cases() {
        let p = params();
        let zeros = Word::from_symbols(&[0; 12]);
        let r = mr33_check(&zeros, 1.0, 10.0, &p);
        assert!(r.violated_prefix.is_none());
        assert!(r.holds); // m - 1 < 0 makes the right side negative

        let r0 = mr33_check(&"0110".parse().unwrap(), 0.0, 5.0, &p);
        assert!(r0.holds);
        assert_eq!(r0.rhs, 0.0);
    }

    #[test]
    fn mr33_reports_orbit_violation() {
        let p = params();
        let ones = Word::from_symbols(&[1; 20]);
        let r = mr33_check(&ones, 1.0, 10.0, &p);
        assert!(r.violated_prefix.is_some());
    }

    #[test]
    fn coincidence_finds_the_length_five_class() {
        let p = SystemParams::new_exact(1, 2, 4, 3).unwrap();
        let classes = coincidence_search(5, &p).unwrap();
        assert_eq!(classes.len(), 1);
        let words: Vec<String> = classes[0].words.iter().map(|w| w.to_string()).collect();
        assert_eq!(words, vec!["00110", "10001"]);
        assert_eq!(classes[0].map.slope, big_ratio(2, 9));
        assert_eq!(classes[0].map.intercept, big_ratio(7, 6));
    }

    #[test]
    fn coincidence_effective_at_three_halves() {
        let p = SystemParams::new_exact(1, 2, 3, 2).unwrap();
        let classes = coincidence_search(8, &p).unwrap();
        assert!(classes.is_empty());
    }

    #[test]
    fn coincidence_length_one_never() {
        let p = SystemParams::new_exact(1, 2, 4, 3).unwrap();
        assert!(coincidence_search(1, &p).unwrap().is_empty());
    }

    #[test]
    fn coincidence_requires_exact_mode() {
        let p = params();
        assert!(coincidence_search(3, &p).is_err());
    }
}
