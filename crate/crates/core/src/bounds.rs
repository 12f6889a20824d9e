//! Exact and certified evaluation of the sunflower bounds.
//!
//! Integer-valued bounds are computed exactly with big integers. Real-valued bounds
//! are enclosed in outward-rounded intervals (see [`crate::interval`]) and widened in
//! precision until the enclosure is narrower than 10^-50 relative.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::Serialize;

use crate::interval::{to_scientific, Certified, Interval};
use crate::rational::{factorial, falling_factorial, format_rational, int};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundError {
    #[error("parameter {name} = {value} is out of range: {why}")]
    OutOfRange {
        name: &'static str,
        value: String,
        why: &'static str,
    },
    #[error("comparison at d = {d} still undecided at {bits} bits")]
    Undecided { d: u64, bits: u64 },
}

fn out_of_range(name: &'static str, value: impl ToString, why: &'static str) -> BoundError {
    BoundError::OutOfRange {
        name,
        value: value.to_string(),
        why,
    }
}

/// Significant decimal digits every real-valued report carries.
pub const REPORT_DIGITS: usize = 50;
/// Default working precision in bits.
pub const DEFAULT_PRECISION: u64 = 256;
const MAX_PRECISION: u64 = 1 << 14;

/// Base of the logarithm in the `log`-based bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogBase {
    Natural,
    Rational(BigRational),
}

impl LogBase {
    pub fn parse(s: &str) -> Result<LogBase, BoundError> {
        if s == "e" || s == "natural" {
            return Ok(LogBase::Natural);
        }
        let q = crate::rational::parse_rational(s)
            .map_err(|_| out_of_range("log_base", s, "expected `e` or a rational > 1"))?;
        if q <= BigRational::one() {
            return Err(out_of_range("log_base", s, "logarithm base must exceed 1"));
        }
        Ok(LogBase::Rational(q))
    }

    pub fn label(&self) -> String {
        match self {
            LogBase::Natural => "e".into(),
            LogBase::Rational(q) => format_rational(q),
        }
    }

    /// Enclosure of `log_base(v)` for a rational `v ≥ 1`.
    fn log(&self, v: &BigRational, prec: u64) -> Interval {
        let ln_v = Interval::ln(v, prec);
        match self {
            LogBase::Natural => ln_v,
            LogBase::Rational(b) => ln_v.div(&Interval::ln(b, prec)),
        }
    }
}

/// Rendering of a certified real enclosure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealValue {
    /// Midpoint, `REPORT_DIGITS` significant digits.
    pub value: String,
    pub lower: String,
    pub upper: String,
    pub precision_bits: u64,
    pub significant_digits: usize,
    /// `(upper - lower) / lower` of the enclosure, three digits, rounded up.
    pub relative_error_bound: String,
    #[serde(skip)]
    pub interval: Interval,
}

impl RealValue {
    fn from_interval(iv: Interval) -> Self {
        let digits = REPORT_DIGITS + 2;
        RealValue {
            value: to_scientific(&iv.midpoint(), REPORT_DIGITS, false),
            lower: to_scientific(&iv.lower(), digits, false),
            upper: to_scientific(&iv.upper(), digits, true),
            precision_bits: iv.precision(),
            significant_digits: REPORT_DIGITS,
            relative_error_bound: iv
                .relative_width()
                .map_or("inf".into(), |w| to_scientific(&w, 3, true)),
            interval: iv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundValue {
    /// Exact integer, serialized as a decimal string.
    Integer {
        #[serde(serialize_with = "ser_display")]
        value: BigUint,
    },
    Real(RealValue),
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl BoundValue {
    pub fn as_integer(&self) -> Option<&BigUint> {
        match self {
            BoundValue::Integer { value } => Some(value),
            BoundValue::Real(_) => None,
        }
    }

    pub fn as_real(&self) -> Option<&RealValue> {
        match self {
            BoundValue::Real(r) => Some(r),
            BoundValue::Integer { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub name: &'static str,
    /// Parameter name → value, in a fixed order.
    #[serde(serialize_with = "ser_params")]
    pub params: Vec<(&'static str, String)>,
    pub exact: bool,
    pub value: BoundValue,
}

fn ser_params<S: serde::Serializer>(
    params: &[(&'static str, String)],
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_map(params.iter().map(|(k, v)| (k, v)))
}

impl BoundReport {
    fn integer(name: &'static str, params: Vec<(&'static str, String)>, value: BigUint) -> Self {
        BoundReport {
            name,
            params,
            exact: true,
            value: BoundValue::Integer { value },
        }
    }

    fn real(name: &'static str, params: Vec<(&'static str, String)>, iv: Interval) -> Self {
        BoundReport {
            name,
            params,
            exact: iv.is_point(),
            value: BoundValue::Real(RealValue::from_interval(iv)),
        }
    }
}

fn check_n_r(n: u64, r: u64) -> Result<(), BoundError> {
    if n < 1 {
        return Err(out_of_range("n", n, "need n >= 1"));
    }
    if r < 2 {
        return Err(out_of_range("r", r, "need r >= 2"));
    }
    Ok(())
}

/// Erdős–Rado: `n! (r-1)^n`.
pub fn er_bound(n: u64, r: u64) -> Result<BigUint, BoundError> {
    check_n_r(n, r)?;
    Ok(factorial(n) * Pow::pow(BigUint::from(r - 1), n))
}

/// `m = max(r - 1, n² - n + 1)`.
pub fn m_value(n: u64, r: u64) -> BigUint {
    let n = BigUint::from(n);
    let quad = &n * &n - &n + 1u32;
    quad.max(BigUint::from(r.saturating_sub(1)))
}

/// `(s+1)^n · m^s`, the exact value of `2^{n log2(s+1) + s log2 m}`.
pub fn theorem1_bound(n: u64, s: u64, r: u64) -> Result<BigUint, BoundError> {
    check_n_r(n, r)?;
    if s < 1 {
        return Err(out_of_range("s", s, "need s >= 1"));
    }
    Ok(Pow::pow(BigUint::from(s + 1), n) * Pow::pow(m_value(n, r), s))
}

/// `n! m^s / ((ℓ1+1)! (ℓ2-ℓ1)! ⋯ (ℓs-ℓ(s-1))! (n-ℓs-1)!)` for `L = {ℓ1 < … < ℓs}`.
pub fn claim1_bound(n: u64, l: &BTreeSet<u64>, r: u64) -> Result<BigUint, BoundError> {
    check_n_r(n, r)?;
    let (Some(&first), Some(&last)) = (l.first(), l.last()) else {
        return Err(out_of_range("L", "{}", "L must be nonempty"));
    };
    if last >= n {
        return Err(out_of_range("L", last, "every element of L must be < n"));
    }
    let mut denom = factorial(first + 1) * factorial(n - last - 1);
    let ls: Vec<u64> = l.iter().copied().collect();
    for w in ls.windows(2) {
        denom *= factorial(w[1] - w[0]);
    }
    let numer = factorial(n) * Pow::pow(m_value(n, r), l.len() as u64);
    let (q, rem) = num_integer::Integer::div_rem(&numer, &denom);
    debug_assert!(rem.is_zero(), "multinomial is integral");
    Ok(q)
}

/// `(r-1)^{d+1} · n!/(n-d)!`, Erdős–Rado applied to a `d`-intersecting family.
pub fn trivial_d_bound(n: u64, d: u64, r: u64) -> Result<BigUint, BoundError> {
    if r < 2 {
        return Err(out_of_range("r", r, "need r >= 2"));
    }
    if d > n {
        return Err(out_of_range("d", d, "need d <= n"));
    }
    Ok(Pow::pow(BigUint::from(r - 1), d + 1) * falling_factorial(n, d))
}

/// Repeats `eval` at doubling precision until the enclosure is tight enough to carry
/// `REPORT_DIGITS` significant digits.
fn certified(mut eval: impl FnMut(u64) -> Interval, start: u64) -> Interval {
    let target = BigRational::new(
        1.into(),
        Pow::pow(num_bigint::BigInt::from(10u32), REPORT_DIGITS as u32 + 2),
    );
    let mut prec = start.max(192);
    loop {
        let iv = eval(prec);
        match iv.relative_width() {
            Some(w) if w <= target => return iv,
            _ if prec >= MAX_PRECISION => return iv,
            _ => prec *= 2,
        }
    }
}

/// Enclosure of `(n²-n+1) 8^{s-1} 2^{(1+√5/5) n (s-1)}` at working precision `prec`.
pub fn gh_interval(n: u64, s: u64, prec: u64) -> Interval {
    let base = BigUint::from(n * n - n + 1) * Pow::pow(BigUint::from(8u32), s - 1);
    let base = Interval::exact_uint(&base, prec);
    if s == 1 {
        return base;
    }
    let sqrt5 = Interval::sqrt(&int(5), prec);
    let coeff = Interval::from_u64(1, prec).add(&sqrt5.div(&Interval::from_u64(5, prec)));
    let exponent = coeff.mul(&Interval::exact_uint(&BigUint::from(n * (s - 1)), prec));
    base.mul(&Interval::exp2_of(&exponent))
}

/// Guo–Horváth-style 3-sunflower bound for `L`-intersecting families with `|L| = s`.
pub fn gh_bound(n: u64, s: u64) -> Result<BoundReport, BoundError> {
    if n < 1 {
        return Err(out_of_range("n", n, "need n >= 1"));
    }
    if s < 1 {
        return Err(out_of_range("s", s, "need s >= 1"));
    }
    let iv = certified(|p| gh_interval(n, s, p), DEFAULT_PRECISION);
    Ok(BoundReport::real(
        "gh",
        vec![("n", n.to_string()), ("s", s.to_string())],
        iv,
    ))
}

fn check_c(c: &BigRational) -> Result<(), BoundError> {
    if !c.is_positive() {
        return Err(out_of_range("C", format_rational(c), "need C > 0"));
    }
    Ok(())
}

/// Enclosure of `(C r log n)^n`.
pub fn alwz_interval(n: u64, r: u64, c: &BigRational, base: &LogBase, prec: u64) -> Interval {
    let factor = Interval::from_rational(&(c * int(r)), prec).mul(&base.log(&int(n), prec));
    factor.powi(n)
}

/// The `(C r log n)^n` form of the spread-lemma sunflower bound.
pub fn alwz_form(
    n: u64,
    r: u64,
    c: &BigRational,
    base: &LogBase,
) -> Result<BoundReport, BoundError> {
    if n < 2 {
        return Err(out_of_range("n", n, "need n >= 2 so that log n > 0"));
    }
    if r < 2 {
        return Err(out_of_range("r", r, "need r >= 2"));
    }
    check_c(c)?;
    let iv = certified(|p| alwz_interval(n, r, c, base, p), DEFAULT_PRECISION);
    Ok(BoundReport::real(
        "alwz",
        vec![
            ("n", n.to_string()),
            ("r", r.to_string()),
            ("C", format_rational(c)),
            ("log_base", base.label()),
        ],
        iv,
    ))
}

/// The two factors of `(4r)^n [C r log(rd)]^d`: the exact integer `(4r)^n` and an
/// enclosure of `[C r log(rd)]^d`.
#[derive(Debug, Clone)]
pub struct Theorem2Parts {
    pub exact_factor: BigUint,
    pub real_factor: Interval,
}

impl Theorem2Parts {
    pub fn value(&self) -> Interval {
        let p = self.real_factor.precision();
        Interval::exact_uint(&self.exact_factor, p).mul(&self.real_factor)
    }
}

fn check_theorem2(n: u64, d: u64, r: u64, c: &BigRational) -> Result<(), BoundError> {
    check_n_r(n, r)?;
    if d < 1 {
        return Err(out_of_range("d", d, "need d >= 1"));
    }
    if r * d < 2 {
        return Err(out_of_range("d", d, "need r*d >= 2 so that log(rd) > 0"));
    }
    check_c(c)
}

pub fn theorem2_parts(
    n: u64,
    d: u64,
    r: u64,
    c: &BigRational,
    base: &LogBase,
    prec: u64,
) -> Theorem2Parts {
    let exact_factor = Pow::pow(BigUint::from(4 * r), n);
    let log_rd = base.log(&int(r * d), prec);
    let real_factor = Interval::from_rational(&(c * int(r)), prec)
        .mul(&log_rd)
        .powi(d);
    Theorem2Parts {
        exact_factor,
        real_factor,
    }
}

/// `(4r)^n [C r log(rd)]^d` for `d`-intersecting families.
pub fn theorem2_bound(
    n: u64,
    d: u64,
    r: u64,
    c: &BigRational,
    base: &LogBase,
) -> Result<BoundReport, BoundError> {
    check_theorem2(n, d, r, c)?;
    let iv = certified(
        |p| theorem2_parts(n, d, r, c, base, p).value(),
        DEFAULT_PRECISION,
    );
    Ok(BoundReport::real(
        "theorem2",
        theorem2_params(n, d, r, c, base),
        iv,
    ))
}

fn theorem2_params(
    n: u64,
    d: u64,
    r: u64,
    c: &BigRational,
    base: &LogBase,
) -> Vec<(&'static str, String)> {
    vec![
        ("n", n.to_string()),
        ("d", d.to_string()),
        ("r", r.to_string()),
        ("C", format_rational(c)),
        ("log_base", base.label()),
    ]
}

pub fn er_report(n: u64, r: u64) -> Result<BoundReport, BoundError> {
    Ok(BoundReport::integer(
        "er",
        vec![("n", n.to_string()), ("r", r.to_string())],
        er_bound(n, r)?,
    ))
}

pub fn m_report(n: u64, r: u64) -> Result<BoundReport, BoundError> {
    check_n_r(n, r)?;
    Ok(BoundReport::integer(
        "m",
        vec![("n", n.to_string()), ("r", r.to_string())],
        m_value(n, r),
    ))
}

pub fn theorem1_report(n: u64, s: u64, r: u64) -> Result<BoundReport, BoundError> {
    Ok(BoundReport::integer(
        "theorem1",
        vec![
            ("n", n.to_string()),
            ("s", s.to_string()),
            ("r", r.to_string()),
        ],
        theorem1_bound(n, s, r)?,
    ))
}

pub fn claim1_report(n: u64, l: &BTreeSet<u64>, r: u64) -> Result<BoundReport, BoundError> {
    let ls: Vec<String> = l.iter().map(|v| v.to_string()).collect();
    Ok(BoundReport::integer(
        "claim1",
        vec![
            ("n", n.to_string()),
            ("L", ls.join(",")),
            ("r", r.to_string()),
        ],
        claim1_bound(n, l, r)?,
    ))
}

pub fn trivial_d_report(n: u64, d: u64, r: u64) -> Result<BoundReport, BoundError> {
    Ok(BoundReport::integer(
        "trivial_d",
        vec![
            ("n", n.to_string()),
            ("d", d.to_string()),
            ("r", r.to_string()),
        ],
        trivial_d_bound(n, d, r)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Smaller {
    Theorem2,
    Trivial,
    /// Enclosure contains the trivial value and is narrower than 10^-30 relative.
    EqualWithinTolerance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossoverRow {
    pub d: u64,
    pub theorem2: RealValue,
    #[serde(serialize_with = "ser_display")]
    pub trivial: BigUint,
    pub smaller: Smaller,
    /// Working precision at which the comparison was decided.
    pub decided_at_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossoverReport {
    pub n: u64,
    pub r: u64,
    #[serde(rename = "C")]
    pub c: String,
    pub log_base: String,
    pub rows: Vec<CrossoverRow>,
    /// Smallest `d` at which the `d`-intersecting bound is certified below the trivial one.
    pub first_improvement: Option<u64>,
}

/// Compares `(4r)^n [C r log(rd)]^d` with `(r-1)^{d+1} n!/(n-d)!` for `d = 1..=n`.
pub fn crossover_report(
    n: u64,
    r: u64,
    c: &BigRational,
    base: &LogBase,
) -> Result<CrossoverReport, BoundError> {
    if n < 2 {
        return Err(out_of_range("n", n, "need n >= 2"));
    }
    check_theorem2(n, 1, r, c)?;
    let tie_tolerance =
        BigRational::new(1.into(), Pow::pow(num_bigint::BigInt::from(10u32), 30u32));
    let mut rows = Vec::with_capacity(n as usize);
    for d in 1..=n {
        let trivial = trivial_d_bound(n, d, r)?;
        let trivial_q = BigRational::from_integer(trivial.clone().into());
        let mut prec = DEFAULT_PRECISION;
        let (iv, smaller) = loop {
            let iv = theorem2_parts(n, d, r, c, base, prec).value();
            match iv.compare_exact(&trivial_q) {
                Certified::Below => break (iv, Smaller::Theorem2),
                Certified::Above => break (iv, Smaller::Trivial),
                Certified::Undecided if prec < MAX_PRECISION => prec *= 2,
                Certified::Undecided => {
                    if iv.relative_width().is_some_and(|w| w <= tie_tolerance) {
                        break (iv, Smaller::EqualWithinTolerance);
                    }
                    return Err(BoundError::Undecided { d, bits: prec });
                }
            }
        };
        let decided_at_bits = prec;
        // Re-render at report precision so every row carries the full digit count.
        let shown = certified(|p| theorem2_parts(n, d, r, c, base, p).value(), prec);
        debug_assert!(shown.overlaps(&iv));
        rows.push(CrossoverRow {
            d,
            theorem2: RealValue::from_interval(shown),
            trivial,
            smaller,
            decided_at_bits,
        });
    }
    let first_improvement = rows
        .iter()
        .find(|row| row.smaller == Smaller::Theorem2)
        .map(|row| row.d);
    Ok(CrossoverReport {
        n,
        r,
        c: format_rational(c),
        log_base: base.label(),
        rows,
        first_improvement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn big(s: &str) -> BigUint {
        s.parse().unwrap()
    }

    #[test]
    fn er_values() {
        assert_eq!(er_bound(1, 7).unwrap(), BigUint::from(6u32));
        assert_eq!(er_bound(3, 3).unwrap(), BigUint::from(48u32));
        assert_eq!(er_bound(10, 3).unwrap(), big("3715891200"));
        assert!(er_bound(0, 3).is_err());
        assert!(er_bound(3, 1).is_err());
    }

    #[test]
    fn m_values() {
        assert_eq!(m_value(3, 3), BigUint::from(7u32));
        assert_eq!(m_value(1, 100), BigUint::from(99u32));
        assert_eq!(m_value(2, 3), BigUint::from(3u32));
    }

    #[test]
    fn theorem1_values() {
        for n in 1..6 {
            assert_eq!(
                theorem1_bound(n, 1, 3).unwrap(),
                Pow::pow(BigUint::from(2u32), n) * m_value(n, 3)
            );
        }
        assert_eq!(theorem1_bound(3, 1, 3).unwrap(), BigUint::from(56u32));
        assert_eq!(theorem1_bound(4, 2, 3).unwrap(), BigUint::from(13689u32));
        assert!(theorem1_bound(3, 0, 3).is_err());
    }

    #[test]
    fn theorem1_matches_power_of_two_form() {
        // 2^{n log2(s+1) + s log2 m} evaluated through logarithms must enclose the
        // exact (s+1)^n m^s.
        for (n, s, r) in [(3u64, 1u64, 3u64), (4, 2, 3), (6, 3, 5), (2, 2, 9)] {
            let p = 256;
            let m = m_value(n, r);
            let ln2 = Interval::ln(&int(2), p);
            let a = Interval::ln(&int(s + 1), p)
                .div(&ln2)
                .mul(&Interval::from_u64(n, p));
            let b = Interval::ln(&BigRational::from_integer(m.clone().into()), p)
                .div(&ln2)
                .mul(&Interval::from_u64(s, p));
            let via_logs = Interval::exp2_of(&a.add(&b));
            let exact = theorem1_bound(n, s, r).unwrap();
            assert!(via_logs.contains(&BigRational::from_integer(exact.into())));
        }
    }

    #[test]
    fn claim1_values() {
        let l = |v: &[u64]| v.iter().copied().collect::<BTreeSet<_>>();
        assert_eq!(claim1_bound(2, &l(&[0]), 3).unwrap(), BigUint::from(6u32));
        assert_eq!(claim1_bound(3, &l(&[0]), 3).unwrap(), BigUint::from(21u32));
        assert_eq!(
            claim1_bound(3, &l(&[0, 1]), 3).unwrap(),
            BigUint::from(294u32)
        );
        assert!(claim1_bound(3, &l(&[3]), 3).is_err());
        assert!(claim1_bound(3, &l(&[]), 3).is_err());
    }

    #[test]
    fn trivial_values() {
        assert_eq!(trivial_d_bound(9, 0, 4).unwrap(), BigUint::from(3u32));
        assert_eq!(trivial_d_bound(3, 1, 3).unwrap(), BigUint::from(12u32));
        let want = BigUint::from(64u32) * 100u32 * 99u32 * 98u32 * 97u32 * 96u32;
        assert_eq!(trivial_d_bound(100, 5, 3).unwrap(), want);
        assert!(trivial_d_bound(3, 4, 3).is_err());
    }

    #[test]
    fn trivial_at_full_d_dominates_er() {
        for n in 1..=12u64 {
            for r in 2..=12u64 {
                let t = trivial_d_bound(n, n, r).unwrap();
                assert_eq!(t, Pow::pow(BigUint::from(r - 1), n + 1) * factorial(n));
                assert!(t >= er_bound(n, r).unwrap() * (r - 1));
            }
        }
    }

    #[test]
    fn gh_collapses_at_s1() {
        for n in 1..10 {
            let rep = gh_bound(n, 1).unwrap();
            assert!(rep.exact);
            let iv = &rep.value.as_real().unwrap().interval;
            assert!(iv.contains(&int(n * n - n + 1)));
        }
        assert_eq!(
            gh_bound(2, 1).unwrap().value.as_real().unwrap().value,
            "3.0000000000000000000000000000000000000000000000000e0"
        );
    }

    #[test]
    fn gh_two_precisions_agree() {
        // 7 · 8 · 2^{3(1 + √5/5)}, 2^{4.34164…} ≈ 20.2777
        let lo = gh_interval(3, 2, 256);
        let hi = gh_interval(3, 2, 512);
        assert!(lo.overlaps(&hi));
        let v = crate::rational::rational_to_f64(&hi.midpoint());
        let want = 56.0 * 2f64.powf(3.0 * (1.0 + 5f64.sqrt() / 5.0));
        assert!((v - want).abs() < 1e-9 * want);
        let rep = gh_bound(3, 2).unwrap();
        assert!(!rep.exact);
    }

    #[test]
    fn alwz_values() {
        let one = int(1);
        let rep = alwz_form(2, 3, &one, &LogBase::Natural).unwrap();
        let v = crate::rational::rational_to_f64(&rep.value.as_real().unwrap().interval.midpoint());
        assert!((v - (3.0 * 2f64.ln()).powi(2)).abs() < 1e-12);
        assert!((v - 4.324).abs() < 1e-3);
        // doubling C multiplies by 2^n
        for n in [2u64, 5, 10] {
            let a = alwz_interval(n, 3, &one, &LogBase::Natural, 256);
            let b = alwz_interval(n, 3, &int(2), &LogBase::Natural, 256);
            let scaled = a.mul(&Interval::from_u64(1 << n, 256));
            assert!(scaled.overlaps(&b));
        }
        assert!(
            alwz_interval(10, 3, &one, &LogBase::Natural, 256).overlaps(&alwz_interval(
                10,
                3,
                &one,
                &LogBase::Natural,
                512
            ))
        );
        assert!(alwz_form(1, 3, &one, &LogBase::Natural).is_err());
        assert!(alwz_form(3, 3, &int(0), &LogBase::Natural).is_err());
    }

    #[test]
    fn log_base_changes_value() {
        // log_2 4 = 2, so (1 · 2 · 2)^2 = 16 exactly up to enclosure width
        let iv = alwz_interval(4, 2, &ratio(1, 2), &LogBase::parse("2").unwrap(), 256);
        // (1/2 · 2 · log2 4)^4 = 2^4
        assert!(iv.contains(&int(16)));
        assert!(LogBase::parse("1").is_err());
        assert!(LogBase::parse("x").is_err());
    }

    #[test]
    fn theorem2_values() {
        let one = int(1);
        let rep = theorem2_bound(3, 1, 3, &one, &LogBase::Natural).unwrap();
        let v = crate::rational::rational_to_f64(&rep.value.as_real().unwrap().interval.midpoint());
        assert!((v - 1728.0 * 3.0 * 3f64.ln()).abs() < 1e-9);
        assert!((v - 5695.2).abs() < 0.1);
        let big = theorem2_bound(100, 5, 3, &one, &LogBase::Natural).unwrap();
        let a = theorem2_parts(100, 5, 3, &one, &LogBase::Natural, 256).value();
        let b = theorem2_parts(100, 5, 3, &one, &LogBase::Natural, 512).value();
        assert!(a.overlaps(&b));
        assert!(big.value.as_real().unwrap().interval.overlaps(&b));
        assert!(theorem2_bound(3, 0, 3, &one, &LogBase::Natural).is_err());
    }

    #[test]
    fn theorem2_homogeneous_in_n() {
        let c = ratio(3, 2);
        for (n, d, r) in [(3u64, 1u64, 3u64), (10, 4, 5), (50, 7, 3)] {
            let a = theorem2_parts(n, d, r, &c, &LogBase::Natural, 256);
            let b = theorem2_parts(n + 1, d, r, &c, &LogBase::Natural, 256);
            assert_eq!(b.exact_factor, &a.exact_factor * (4 * r));
            assert_eq!(a.real_factor, b.real_factor);
        }
    }

    #[test]
    fn reports_carry_fifty_digits() {
        let rep = theorem2_bound(100, 5, 3, &int(1), &LogBase::Natural).unwrap();
        let real = rep.value.as_real().unwrap();
        let mantissa = real.value.split('e').next().unwrap().replace('.', "");
        assert_eq!(mantissa.len(), REPORT_DIGITS);
        let w = real.interval.relative_width().unwrap();
        assert!(w < BigRational::new(1.into(), Pow::pow(num_bigint::BigInt::from(10u32), 50u32)));
    }

    #[test]
    fn small_crossover_rows_are_consistent() {
        let c = int(1);
        let rep = crossover_report(8, 3, &c, &LogBase::Natural).unwrap();
        assert_eq!(rep.rows.len(), 8);
        for row in &rep.rows {
            let t = trivial_d_bound(8, row.d, 3).unwrap();
            assert_eq!(row.trivial, t);
            let direct = theorem2_bound(8, row.d, 3, &c, &LogBase::Natural).unwrap();
            assert!(direct
                .value
                .as_real()
                .unwrap()
                .interval
                .overlaps(&row.theorem2.interval));
        }
    }
}
