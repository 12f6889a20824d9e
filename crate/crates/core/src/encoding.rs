//! Good and bad pairs `(W, S)_w`, the `(W ∪ S, W ∩ S)` encoding of bad pairs,
//! and exhaustive audits of the counting bound it yields.
//!
//! A pair is good when some member `S'` has `S' \ W ⊆ S \ W` and `|S' \ W| ≤ w`.
//! For a `d`-intersecting family a bad `(W, S)_d` is recovered from its key: `S`
//! is the only member inside `W ∪ S`.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::family::{is_d_intersecting, SetFamily};
use crate::rational::{binomial, format_rational, int, rational_pow};
use crate::set::ElementSet;
use crate::spread::ser_rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodingError {
    #[error("{0} is not a member of the family")]
    NotMember(ElementSet),
    #[error("family is not uniform")]
    NotUniform,
    #[error("family is not {0}-intersecting")]
    NotDIntersecting(usize),
    #[error("|W| = {px} must lie in 1..={x}")]
    BadPx { px: usize, x: usize },
    #[error("delta must be positive")]
    BadDelta,
    #[error("{count} sets W of size {px} exceed the audit budget of {budget}")]
    Budget {
        count: String,
        px: usize,
        budget: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("no member lies inside {0}")]
    NoMember(ElementSet),
    #[error("members {0} and {1} both lie inside the union part")]
    Ambiguous(ElementSet, ElementSet),
    #[error("decoded pair has |S \\ W| = {0}, so it is not bad")]
    NotBad(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Good { witness: ElementSet },
    Bad,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairClassification {
    pub w_set: ElementSet,
    pub s: ElementSet,
    pub w: usize,
    pub verdict: Verdict,
}

impl PairClassification {
    pub fn is_bad(&self) -> bool {
        self.verdict == Verdict::Bad
    }
}

/// `S' \ W ⊆ S \ W` is the same as `S' ⊆ W ∪ S`.
fn first_witness<'a>(
    family: &'a SetFamily,
    w_set: &ElementSet,
    s: &ElementSet,
    w: usize,
) -> Option<&'a ElementSet> {
    let cover = w_set.union(s);
    family
        .iter()
        .find(|sp| sp.is_subset(&cover) && sp.difference_len(w_set) <= w)
}

pub fn classify_pair(
    family: &SetFamily,
    w_set: &ElementSet,
    s: &ElementSet,
    w: usize,
) -> Result<PairClassification, EncodingError> {
    if !family.contains(s) {
        return Err(EncodingError::NotMember(s.clone()));
    }
    let verdict = match first_witness(family, w_set, s, w) {
        Some(witness) => Verdict::Good {
            witness: witness.clone(),
        },
        None => Verdict::Bad,
    };
    Ok(PairClassification {
        w_set: w_set.clone(),
        s: s.clone(),
        w,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct EncodingKey {
    pub union_part: ElementSet,
    pub meet_part: ElementSet,
}

pub fn encode_bad_pair(w_set: &ElementSet, s: &ElementSet) -> EncodingKey {
    EncodingKey {
        union_part: w_set.union(s),
        meet_part: w_set.intersection(s),
    }
}

/// Inverts [`encode_bad_pair`] on bad pairs `(W, S)_d` of a `d`-intersecting family.
pub fn decode_bad_pair(
    family: &SetFamily,
    key: &EncodingKey,
    d: usize,
) -> Result<(ElementSet, ElementSet), DecodeError> {
    let mut inside = family.iter().filter(|f| f.is_subset(&key.union_part));
    let s = inside
        .next()
        .ok_or_else(|| DecodeError::NoMember(key.union_part.clone()))?;
    if let Some(other) = inside.next() {
        return Err(DecodeError::Ambiguous(s.clone(), other.clone()));
    }
    let w_set = key.union_part.difference(s).union(&key.meet_part);
    let outside = s.difference_len(&w_set);
    if outside <= d {
        return Err(DecodeError::NotBad(outside));
    }
    Ok((w_set, s.clone()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BadPairs {
    pub count: usize,
    pub members: Vec<ElementSet>,
}

/// `𝒮(W)`: members `S` with `(W, S)_d` bad.
pub fn count_bad_pairs(family: &SetFamily, w_set: &ElementSet, d: usize) -> BadPairs {
    let members: Vec<ElementSet> = family
        .iter()
        .filter(|s| first_witness(family, w_set, s, d).is_none())
        .cloned()
        .collect();
    BadPairs {
        count: members.len(),
        members,
    }
}

/// Most sets `W` an audit will enumerate.
pub const AUDIT_BUDGET: u64 = 1 << 22;

struct Setup {
    x: usize,
    n: usize,
    p: BigRational,
    w_count: BigUint,
}

fn setup(family: &SetFamily, px: usize, d: usize) -> Result<Setup, EncodingError> {
    let x = family.ground_size();
    if px == 0 || px > x {
        return Err(EncodingError::BadPx { px, x });
    }
    let n = if family.is_empty() {
        0
    } else {
        family.uniformity().ok_or(EncodingError::NotUniform)?
    };
    if !is_d_intersecting(family, d) {
        return Err(EncodingError::NotDIntersecting(d));
    }
    let w_count = binomial(x as u64, px as u64);
    if w_count > AUDIT_BUDGET.into() {
        return Err(EncodingError::Budget {
            count: w_count.to_string(),
            px,
            budget: AUDIT_BUDGET,
        });
    }
    Ok(Setup {
        x,
        n,
        p: BigRational::new(BigInt::from(px), BigInt::from(x)),
        w_count,
    })
}

fn big(v: impl Into<BigUint>) -> BigRational {
    BigRational::from_integer(BigInt::from(v.into()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Held,
    Violated,
    /// The inequality is not claimed for these parameters; raw numbers are still reported.
    NotApplicable,
}

impl Check {
    fn of(ok: bool) -> Check {
        if ok {
            Check::Held
        } else {
            Check::Violated
        }
    }

    pub fn passed(&self) -> bool {
        *self != Check::Violated
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorstW {
    pub w_set: ElementSet,
    pub bad: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EncodingAudit {
    pub x: usize,
    pub n: usize,
    pub d: usize,
    pub px: usize,
    #[serde(serialize_with = "ser_rational")]
    pub p: BigRational,
    #[serde(serialize_with = "crate::finders::ser_display_big")]
    pub w_count: BigUint,
    pub total_bad: u64,
    /// `(2/p)^n · C(x, px)`.
    #[serde(serialize_with = "ser_rational")]
    pub bound: BigRational,
    pub bound_check: Check,
    pub injective: Check,
    pub round_trip: Check,
    /// `px ≤ |W ∪ S| ≤ px + n` on every bad pair.
    pub union_range: Check,
    /// `Σ_{i≤n} C(x, px+i)`.
    #[serde(serialize_with = "crate::finders::ser_display_big")]
    pub union_choices: BigUint,
    /// `p^{-n} · C(x, px)`.
    #[serde(serialize_with = "ser_rational")]
    pub union_bound: BigRational,
    /// Only claimed for `p ≤ 1/2`.
    pub union_chain: Check,
    pub worst: Option<WorstW>,
    pub passed: bool,
}

/// Every `W ⊆ X` with `|W| = px` in canonical order, with `𝒮(W)`.
fn each_w(
    x: usize,
    px: usize,
    family: &SetFamily,
    d: usize,
    mut visit: impl FnMut(&ElementSet, &BadPairs),
) {
    for w_set in ElementSet::full(x).subsets_of_size(px) {
        let bad = count_bad_pairs(family, &w_set, d);
        visit(&w_set, &bad);
    }
}

/// Enumerates all `W` of size `px` (so `p = px/x`) and checks the encoding
/// argument against the actual bad pairs of `F`.
pub fn audit_encoding_bound(
    family: &SetFamily,
    px: usize,
    d: usize,
) -> Result<EncodingAudit, EncodingError> {
    let Setup { x, n, p, w_count } = setup(family, px, d)?;
    let mut keys = HashSet::new();
    let mut total = 0u64;
    let mut injective = true;
    let mut round_trip = true;
    let mut union_range = true;
    let mut worst: Option<WorstW> = None;
    each_w(x, px, family, d, |w_set, bad| {
        total += bad.count as u64;
        if bad.count > 0 && worst.as_ref().is_none_or(|w| bad.count > w.bad) {
            worst = Some(WorstW {
                w_set: w_set.clone(),
                bad: bad.count,
            });
        }
        for s in &bad.members {
            let key = encode_bad_pair(w_set, s);
            let u = key.union_part.len();
            union_range &= px <= u && u <= px + n;
            round_trip &=
                decode_bad_pair(family, &key, d).as_ref() == Ok(&(w_set.clone(), s.clone()));
            injective &= keys.insert(key);
        }
    });
    let two_over_p = int(2) / &p;
    let bound = rational_pow(&two_over_p, n as u64) * big(w_count.clone());
    let union_choices: BigUint = (0..=n as u64)
        .map(|i| binomial(x as u64, px as u64 + i))
        .sum();
    let union_bound = rational_pow(&(BigRational::one() / &p), n as u64) * big(w_count.clone());
    let union_chain = if p <= BigRational::new(1.into(), 2.into()) {
        Check::of(big(union_choices.clone()) <= union_bound)
    } else {
        Check::NotApplicable
    };
    let bound_check = Check::of(big(total) <= bound);
    let (injective, round_trip, union_range) = (
        Check::of(injective),
        Check::of(round_trip),
        Check::of(union_range),
    );
    let passed = [
        &bound_check,
        &injective,
        &round_trip,
        &union_range,
        &union_chain,
    ]
    .iter()
    .all(|c| c.passed());
    Ok(EncodingAudit {
        x,
        n,
        d,
        px,
        p,
        w_count,
        total_bad: total,
        bound,
        bound_check,
        injective,
        round_trip,
        union_range,
        union_choices,
        union_bound,
        union_chain,
        worst,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkovAudit {
    pub px: usize,
    pub d: usize,
    #[serde(serialize_with = "ser_rational")]
    pub delta: BigRational,
    /// `W` with `|𝒮(W)| ≥ δ|F|`.
    pub heavy: u64,
    #[serde(serialize_with = "crate::finders::ser_display_big")]
    pub w_count: BigUint,
    #[serde(serialize_with = "ser_rational")]
    pub fraction: BigRational,
    /// `(2/p)^n / (δ|F|)`; absent for the empty family.
    pub bound: Option<String>,
    /// The bound is at least 1 and says nothing.
    pub vacuous: bool,
    pub check: Check,
}

pub fn audit_markov_step(
    family: &SetFamily,
    px: usize,
    delta: &BigRational,
    d: usize,
) -> Result<MarkovAudit, EncodingError> {
    if !delta.is_positive() {
        return Err(EncodingError::BadDelta);
    }
    let Setup { x, n, p, w_count } = setup(family, px, d)?;
    let cut = delta * int(family.len() as u64);
    let mut heavy = 0u64;
    each_w(x, px, family, d, |_, bad| {
        if int(bad.count as u64) >= cut {
            heavy += 1;
        }
    });
    let fraction = big(heavy) / big(w_count.clone());
    let bound = (!family.is_empty()).then(|| rational_pow(&(int(2) / &p), n as u64) / &cut);
    let vacuous = bound.as_ref().is_none_or(|b| b >= &BigRational::one());
    let check = Check::of(bound.as_ref().is_none_or(|b| &fraction <= b));
    Ok(MarkovAudit {
        px,
        d,
        delta: delta.clone(),
        heavy,
        w_count,
        fraction,
        bound: bound.as_ref().map(format_rational),
        vacuous,
        check,
    })
}
