//! Outward-rounded interval arithmetic over nonnegative dyadic numbers.
//!
//! Every endpoint is `mantissa · 2^exponent` with the mantissa truncated to the
//! working precision, lower endpoints rounded toward zero and upper endpoints away
//! from it, so the true value is always enclosed. Transcendental functions (`ln`
//! of a rational, `2^x`, square roots) are computed from series with explicit tail
//! bounds in fixed point.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    Down,
    Up,
}

/// A nonnegative dyadic rational `mant · 2^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    mant: BigUint,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mant: BigUint::zero(),
            exp: 0,
        }
    }

    pub fn from_uint(v: BigUint) -> Self {
        Dyadic { mant: v, exp: 0 }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
        self
    }

    fn rounded(mant: BigUint, exp: i64, prec: u64, dir: Dir) -> Self {
        let bits = mant.bits();
        if bits <= prec {
            return Dyadic { mant, exp }.normalized();
        }
        let shift = bits - prec;
        let exact = mant.trailing_zeros().unwrap_or(0) >= shift;
        let mut q = mant >> shift;
        if dir == Dir::Up && !exact {
            q += 1u32;
        }
        Dyadic {
            mant: q,
            exp: exp + shift as i64,
        }
        .normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn to_rational(&self) -> BigRational {
        let m = BigInt::from(self.mant.clone());
        if self.exp >= 0 {
            BigRational::from_integer(m << self.exp as usize)
        } else {
            BigRational::new(m, BigInt::one() << (-self.exp) as usize)
        }
    }

    /// `floor(log2(self))` for nonzero values.
    fn log2_floor(&self) -> i64 {
        self.mant.bits() as i64 - 1 + self.exp
    }

    fn mul(&self, other: &Self, prec: u64, dir: Dir) -> Self {
        Self::rounded(&self.mant * &other.mant, self.exp + other.exp, prec, dir)
    }

    fn add(&self, other: &Self, prec: u64, dir: Dir) -> Self {
        if self.is_zero() {
            return Self::rounded(other.mant.clone(), other.exp, prec, dir);
        }
        if other.is_zero() {
            return Self::rounded(self.mant.clone(), self.exp, prec, dir);
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        Self::rounded(a + b, e, prec, dir)
    }

    fn div(&self, other: &Self, prec: u64, dir: Dir) -> Self {
        assert!(!other.is_zero(), "interval division by zero");
        if self.is_zero() {
            return Self::zero();
        }
        let k = (prec as i64 + other.mant.bits() as i64 - self.mant.bits() as i64 + 2).max(0);
        let (q, r) = (&self.mant << k as usize).div_rem(&other.mant);
        let q = if dir == Dir::Up && !r.is_zero() {
            q + 1u32
        } else {
            q
        };
        Self::rounded(q, self.exp - other.exp - k, prec, dir)
    }

    fn from_rational(q: &BigRational, prec: u64, dir: Dir) -> Self {
        assert!(!q.is_negative(), "negative value in nonnegative interval");
        let num = Dyadic::from_uint(q.numer().magnitude().clone());
        let den = Dyadic::from_uint(q.denom().magnitude().clone());
        num.div(&den, prec, dir)
    }

    /// Fixed-point value `floor/ceil(self · 2^w)`.
    fn to_fixed(&self, w: u64, dir: Dir) -> BigUint {
        let shift = self.exp + w as i64;
        if shift >= 0 {
            &self.mant << shift as usize
        } else {
            let s = (-shift) as u64;
            let exact = self.mant.trailing_zeros().unwrap_or(u64::MAX) >= s;
            let q = &self.mant >> s as usize;
            if dir == Dir::Up && !exact && !self.mant.is_zero() {
                q + 1u32
            } else {
                q
            }
        }
    }

    fn from_fixed(v: BigUint, w: u64, prec: u64, dir: Dir) -> Self {
        Self::rounded(v, -(w as i64), prec, dir)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (la, lb) = (self.log2_floor(), other.log2_floor());
        if la != lb {
            return la.cmp(&lb);
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        a.cmp(&b)
    }
}

/// Closed interval `[lo, hi]` of nonnegative reals at a working precision in bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
    prec: u64,
}

/// Where an interval sits relative to an exact number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certified {
    Below,
    Above,
    Undecided,
}

impl Interval {
    pub fn exact_uint(v: &BigUint, prec: u64) -> Self {
        let d = Dyadic::from_uint(v.clone());
        Interval {
            lo: Dyadic::rounded(d.mant.clone(), d.exp, prec, Dir::Down),
            hi: Dyadic::rounded(d.mant, d.exp, prec, Dir::Up),
            prec,
        }
    }

    pub fn from_u64(v: u64, prec: u64) -> Self {
        Self::exact_uint(&BigUint::from(v), prec)
    }

    pub fn from_rational(q: &BigRational, prec: u64) -> Self {
        Interval {
            lo: Dyadic::from_rational(q, prec, Dir::Down),
            hi: Dyadic::from_rational(q, prec, Dir::Up),
            prec,
        }
    }

    pub fn precision(&self) -> u64 {
        self.prec
    }

    pub fn lower(&self) -> BigRational {
        self.lo.to_rational()
    }

    pub fn upper(&self) -> BigRational {
        self.hi.to_rational()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lower() <= q && q <= &self.upper()
    }

    /// Intervals that share at least one point.
    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn add(&self, other: &Interval) -> Interval {
        let p = self.prec.min(other.prec);
        Interval {
            lo: self.lo.add(&other.lo, p, Dir::Down),
            hi: self.hi.add(&other.hi, p, Dir::Up),
            prec: p,
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let p = self.prec.min(other.prec);
        Interval {
            lo: self.lo.mul(&other.lo, p, Dir::Down),
            hi: self.hi.mul(&other.hi, p, Dir::Up),
            prec: p,
        }
    }

    /// Division by an interval bounded away from zero.
    pub fn div(&self, other: &Interval) -> Interval {
        let p = self.prec.min(other.prec);
        Interval {
            lo: self.lo.div(&other.hi, p, Dir::Down),
            hi: self.hi.div(&other.lo, p, Dir::Up),
            prec: p,
        }
    }

    pub fn powi(&self, mut e: u64) -> Interval {
        let mut base = self.clone();
        let mut acc = Interval::from_u64(1, self.prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Enclosure of `ln q` for a rational `q ≥ 1`.
    pub fn ln(q: &BigRational, prec: u64) -> Interval {
        assert!(q >= &BigRational::one(), "ln is only provided on [1, ∞)");
        let w = prec + 64;
        // q = 2^k · y with y in [1, 2).
        let num = q.numer().magnitude().clone();
        let den = q.denom().magnitude().clone();
        let mut k = num.bits() as i64 - den.bits() as i64;
        let scaled_den = |k: i64| &den << k.max(0) as usize;
        let scaled_num = |k: i64| &num << (-k).max(0) as usize;
        if scaled_num(k) < scaled_den(k) {
            k -= 1;
        }
        let (yn, yd) = (scaled_num(k), scaled_den(k));
        debug_assert!(yd <= yn && yn < &yd << 1);
        // ln y = 2 atanh((y - 1) / (y + 1))
        let zn = &yn - &yd;
        let zd = &yn + &yd;
        let (ly_lo, ly_hi) = atanh_fixed(&zn, &zd, w);
        let (l2_lo, l2_hi) = atanh_fixed(&BigUint::one(), &BigUint::from(3u32), w);
        let k = k as u64;
        let lo = (ly_lo + &l2_lo * k) << 1;
        let hi = (ly_hi + &l2_hi * k) << 1;
        Interval {
            lo: Dyadic::from_fixed(lo, w, prec, Dir::Down),
            hi: Dyadic::from_fixed(hi, w, prec, Dir::Up),
            prec,
        }
    }

    /// Enclosure of `√q` for a rational `q ≥ 0`.
    pub fn sqrt(q: &BigRational, prec: u64) -> Interval {
        assert!(!q.is_negative());
        let w = prec + 64;
        let num = q.numer().magnitude() << (2 * w) as usize;
        let den = q.denom().magnitude();
        let (fl, rem) = num.div_rem(den);
        let lo = fl.sqrt();
        let hi_in = if rem.is_zero() { fl } else { fl + 1u32 };
        let s = hi_in.sqrt();
        let hi = if &s * &s == hi_in { s } else { s + 1u32 };
        Interval {
            lo: Dyadic::from_fixed(lo, w, prec, Dir::Down),
            hi: Dyadic::from_fixed(hi, w, prec, Dir::Up),
            prec,
        }
    }

    /// Enclosure of `2^x` for the nonnegative interval `x`.
    pub fn exp2_of(x: &Interval) -> Interval {
        let prec = x.prec;
        let w = prec + 64;
        let (l2_lo, l2_hi) = atanh_fixed(&BigUint::one(), &BigUint::from(3u32), w);
        let (l2_lo, l2_hi) = (l2_lo << 1, l2_hi << 1);
        let endpoint = |e: &Dyadic, dir: Dir| -> Dyadic {
            let r = e.to_rational();
            let k = r.floor().to_integer();
            let frac = Dyadic::from_rational(&(r - BigRational::from_integer(k.clone())), w, dir);
            let f = frac.to_fixed(w, dir);
            let ln2 = if dir == Dir::Down { &l2_lo } else { &l2_hi };
            // y = frac · ln 2 in [0, ln 2)
            let prod = &f * ln2;
            let y = if dir == Dir::Down {
                prod >> w as usize
            } else {
                let q = &prod >> w as usize;
                if (&q << w as usize) == prod {
                    q
                } else {
                    q + 1u32
                }
            };
            let ex = exp_fixed(&y, w, dir);
            let k = k.to_i64().expect("exponent of 2 fits in i64");
            Dyadic::rounded(ex, k - w as i64, prec, dir)
        };
        Interval {
            lo: endpoint(&x.lo, Dir::Down),
            hi: endpoint(&x.hi, Dir::Up),
            prec,
        }
    }

    /// Position relative to an exact nonnegative rational.
    pub fn compare_exact(&self, v: &BigRational) -> Certified {
        if &self.upper() < v {
            Certified::Below
        } else if &self.lower() > v {
            Certified::Above
        } else {
            Certified::Undecided
        }
    }

    /// `(hi - lo) / lo`, or zero for a point; `None` when `lo` is zero and `hi` is not.
    pub fn relative_width(&self) -> Option<BigRational> {
        if self.is_point() {
            return Some(BigRational::zero());
        }
        let lo = self.lower();
        if lo.is_zero() {
            return None;
        }
        Some((self.upper() - &lo) / lo)
    }

    pub fn midpoint(&self) -> BigRational {
        (self.lower() + self.upper()) / BigRational::from_integer(2.into())
    }
}

/// Fixed-point enclosure of `atanh(num/den)` at scale `2^w`, for `num/den ≤ 1/3`.
fn atanh_fixed(num: &BigUint, den: &BigUint, w: u64) -> (BigUint, BigUint) {
    debug_assert!(num * 3u32 <= *den);
    let one = BigUint::one() << w as usize;
    let wsz = w as usize;
    // Lower: truncated positive series, everything rounded down.
    let z_lo = (num << wsz) / den;
    let z2_lo = (&z_lo * &z_lo) >> wsz;
    let mut lo = BigUint::zero();
    let mut p = z_lo;
    let mut k = 1u64;
    while !p.is_zero() {
        lo += &p / k;
        p = (&p * &z2_lo) >> wsz;
        k += 2;
    }
    // Upper: everything rounded up; stop once the running power is at most one ulp
    // and add the tail, which is below 2·p for z ≤ 1/3.
    let ceil_div = |a: BigUint, b: &BigUint| {
        let (q, r) = a.div_rem(b);
        if r.is_zero() {
            q
        } else {
            q + 1u32
        }
    };
    let z_hi = ceil_div(num << wsz, den);
    let z2_hi = ceil_div(&z_hi * &z_hi, &one);
    let mut hi = BigUint::zero();
    let mut p = z_hi;
    let mut k = 1u64;
    loop {
        if p <= BigUint::one() {
            hi += &p * 2u32;
            break;
        }
        hi += ceil_div(p.clone(), &BigUint::from(k));
        p = ceil_div(&p * &z2_hi, &one);
        k += 2;
    }
    (lo, hi)
}

/// Fixed-point bound on `exp(y)` for `0 ≤ y < 1` at scale `2^w`, rounded in `dir`.
fn exp_fixed(y: &BigUint, w: u64, dir: Dir) -> BigUint {
    let wsz = w as usize;
    let one = BigUint::one() << wsz;
    debug_assert!(*y < one);
    let mut sum = one.clone();
    let mut term = one.clone();
    let mut i = 1u64;
    match dir {
        Dir::Down => {
            while !term.is_zero() {
                term = (&term * y) >> wsz;
                term /= i;
                sum += &term;
                i += 1;
            }
        }
        Dir::Up => loop {
            let prod = &term * y;
            let q = &prod >> wsz;
            let t = if (&q << wsz) == prod { q } else { q + 1u32 };
            let (q, r) = t.div_rem(&BigUint::from(i));
            term = if r.is_zero() { q } else { q + 1u32 };
            sum += &term;
            i += 1;
            // remaining terms shrink by a factor y/(i+1) ≤ 1/2 each, so the tail is below term
            if term <= BigUint::one() {
                sum += 2u32;
                break;
            }
        },
    }
    sum
}

/// A decimal rendering of an exact nonnegative rational in scientific notation with
/// `digits` significant digits, rounded down or up.
pub fn to_scientific(q: &BigRational, digits: usize, round_up: bool) -> String {
    assert!(digits >= 1);
    if q.is_zero() {
        return "0".to_string();
    }
    assert!(q.is_positive());
    let ten = BigInt::from(10u32);
    let pow10 = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(Pow::pow(&ten, e as u64))
        } else {
            BigRational::new(BigInt::one(), Pow::pow(&ten, (-e) as u64))
        }
    };
    // Estimate the decimal exponent from bit lengths, then correct it exactly.
    let bits = q.numer().bits() as i64 - q.denom().bits() as i64;
    let mut e10 = (bits as f64 * std::f64::consts::LOG10_2).floor() as i64;
    while &pow10(e10) > q {
        e10 -= 1;
    }
    while &pow10(e10 + 1) <= q {
        e10 += 1;
    }
    let scaled = q * pow10(digits as i64 - 1 - e10);
    let mut m = if round_up {
        scaled.ceil()
    } else {
        scaled.floor()
    }
    .to_integer();
    if m == Pow::pow(&ten, digits as u64) {
        m /= &ten;
        e10 += 1;
    }
    let s = m.to_string();
    let (head, tail) = s.split_at(1);
    if tail.is_empty() {
        format!("{head}e{e10}")
    } else {
        format!("{head}.{tail}e{e10}")
    }
}
