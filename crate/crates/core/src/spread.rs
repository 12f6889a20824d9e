//! Spread families, the maximal-link step, and the satisfying probability
//! `P(∃S ∈ F : S ⊆ R)` for `R ~ U(X, α)`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::family::{find_r_disjoint, link, SetFamily, WeightedFamily};
use crate::rational::{format_rational, int, rational_from_f64, rational_pow, rational_to_f64};
use crate::set::ElementSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpreadError {
    #[error("family is not uniform")]
    NotUniform,
    #[error("family is empty")]
    Empty,
    #[error("uniformity 0: every κ is admissible")]
    ZeroUniformity,
    #[error("kappa must be positive")]
    BadKappa,
    #[error("alpha must lie strictly between 0 and 1")]
    BadAlpha,
    #[error("trials must be at least 1")]
    BadTrials,
    #[error("ground size {x} exceeds the exhaustive budget of {max}")]
    OverBudget { x: usize, max: usize },
    #[error("the family contains the empty set")]
    EmptyMember,
    #[error("profile has {len} tail entries, fewer than n = {n}")]
    ProfileTooShort { len: usize, n: usize },
    #[error("profile entries must satisfy s0 ≥ s1 ≥ … ≥ 0")]
    BadProfile,
    #[error("d = {d} exceeds the uniformity {n}")]
    DTooLarge { d: usize, n: usize },
}

/// Largest ground size [`exact_satisfying`] enumerates.
pub const EXACT_BUDGET: usize = 24;

fn uniformity(family: &SetFamily) -> Result<usize, SpreadError> {
    if family.is_empty() {
        return Err(SpreadError::Empty);
    }
    family.uniformity().ok_or(SpreadError::NotUniform)
}

fn check_kappa(kappa: &BigRational) -> Result<(), SpreadError> {
    if kappa.is_positive() {
        Ok(())
    } else {
        Err(SpreadError::BadKappa)
    }
}

/// `T -> |F_T|` for every nonempty `T` inside some member. Sets outside every
/// member have empty links and never constrain anything.
fn link_counts(family: &SetFamily) -> BTreeMap<ElementSet, usize> {
    let mut counts = BTreeMap::new();
    for f in family.iter() {
        for k in 1..=f.len() {
            for t in f.subsets_of_size(k) {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// `κ^k · a ≤ b` exactly, with `κ = num/den`.
fn scaled_le(kappa: &BigRational, k: usize, a: usize, b: usize) -> bool {
    let p = rational_pow(kappa, k as u64);
    p * int(a as u64) <= int(b as u64)
}

/// Exact check of `|F| ≥ κ^n` and `κ^{|T|}·|F_T| ≤ |F|` for nonempty `T`.
pub fn is_kappa_spread(family: &SetFamily, kappa: &BigRational) -> Result<bool, SpreadError> {
    check_kappa(kappa)?;
    let n = uniformity(family)?;
    let size = family.len();
    if rational_pow(kappa, n as u64) > int(size as u64) {
        return Ok(false);
    }
    Ok(link_counts(family)
        .iter()
        .all(|(t, &c)| scaled_le(kappa, t.len(), c, size)))
}

/// `κ* = base^{1/root}`, the spread supremum of a family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaSupremum {
    #[serde(serialize_with = "ser_rational")]
    pub base: BigRational,
    pub root: usize,
    pub approx: f64,
    /// The binding link, or `None` when `|F| ≥ κ^n` binds.
    pub binding: Option<ElementSet>,
}

pub(crate) fn ser_rational<S: serde::Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

impl KappaSupremum {
    /// Whether `κ ≤ κ*`, exactly.
    pub fn admits(&self, kappa: &BigRational) -> bool {
        rational_pow(kappa, self.root as u64) <= self.base
    }

    /// A rational within about one part in 10^15 of `κ*·factor`.
    pub fn scaled(&self, factor: f64) -> BigRational {
        rational_from_f64(self.approx * factor)
    }

    /// `Some(q)` when `κ*` is the integer `q`.
    pub fn as_integer(&self) -> Option<BigUint> {
        let guess = self.approx.round();
        if guess < 0.0 || !guess.is_finite() {
            return None;
        }
        let q = BigInt::from(guess as u64);
        let qr = BigRational::from_integer(q.clone());
        (rational_pow(&qr, self.root as u64) == self.base).then(|| q.to_biguint().expect("nonneg"))
    }
}

fn root_f64(base: &BigRational, root: usize) -> f64 {
    // ln keeps huge |F| in range
    let ln = |v: &BigInt| {
        let bits = v.bits();
        if bits < 1000 {
            v.to_f64().unwrap().ln()
        } else {
            let shift = bits - 900;
            (v >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
        }
    };
    let approx = ((ln(base.numer()) - ln(base.denom())) / root as f64).exp();
    // exact integer roots come out as integers
    let guess = approx.round();
    if guess >= 1.0 && guess < 2f64.powi(53) {
        let g = int(guess as u64);
        if rational_pow(&g, root as u64) == *base {
            return guess;
        }
    }
    approx
}

/// `min(|F|^{1/n}, min_T (|F|/|F_T|)^{1/|T|})`.
pub fn spread_kappa(family: &SetFamily) -> Result<KappaSupremum, SpreadError> {
    let n = uniformity(family)?;
    if n == 0 {
        return Err(SpreadError::ZeroUniformity);
    }
    let size = family.len() as u64;
    let mut best: (BigRational, usize, Option<ElementSet>) = (int(size), n, None);
    for (t, c) in link_counts(family) {
        let cand = BigRational::new(BigInt::from(size), BigInt::from(c));
        let k = t.len();
        // cand^{1/k} < best^{1/j}  ⇔  cand^j < best^k
        if rational_pow(&cand, best.1 as u64) < rational_pow(&best.0, k as u64) {
            best = (cand, k, Some(t));
        }
    }
    let approx = root_f64(&best.0, best.1);
    Ok(KappaSupremum {
        base: best.0,
        root: best.1,
        approx,
        binding: best.2,
    })
}

/// `(s0; s1, …, sn)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpreadProfile {
    #[serde(serialize_with = "ser_rational")]
    s0: BigRational,
    #[serde(serialize_with = "ser_rationals")]
    tail: Vec<BigRational>,
}

fn ser_rationals<S: serde::Serializer>(qs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(qs.iter().map(format_rational))
}

impl SpreadProfile {
    pub fn new(s0: BigRational, tail: Vec<BigRational>) -> Result<Self, SpreadError> {
        let chain_ok = std::iter::once(&s0)
            .chain(&tail)
            .zip(&tail)
            .all(|(a, b)| a >= b)
            && tail.last().unwrap_or(&s0) >= &BigRational::zero();
        if !chain_ok {
            return Err(SpreadError::BadProfile);
        }
        Ok(Self { s0, tail })
    }

    pub fn s0(&self) -> &BigRational {
        &self.s0
    }

    /// `s_k` for `k ≥ 1`.
    pub fn s(&self, k: usize) -> &BigRational {
        &self.tail[k - 1]
    }

    pub fn tail(&self) -> &[BigRational] {
        &self.tail
    }
}

/// `σ(F) ≥ s0` and `σ({F : T ⊆ F}) ≤ s_{|T|}` for every nonempty `T`.
pub fn is_s_spread(wf: &WeightedFamily, profile: &SpreadProfile) -> Result<bool, SpreadError> {
    let family = wf.family();
    let n = family.iter().map(|f| f.len()).max().unwrap_or(0);
    if profile.tail.len() < n {
        return Err(SpreadError::ProfileTooShort {
            len: profile.tail.len(),
            n,
        });
    }
    if wf.total() < profile.s0 {
        return Ok(false);
    }
    let mut mass: HashMap<ElementSet, BigRational> = HashMap::new();
    for (f, w) in family.iter().zip(wf.weights()) {
        for k in 1..=f.len() {
            for t in f.subsets_of_size(k) {
                *mass.entry(t).or_insert_with(BigRational::zero) += w;
            }
        }
    }
    Ok(mass.iter().all(|(t, m)| m <= profile.s(t.len())))
}

/// `(size; size/κ, …, size/κ^d, 1, …, 1)` with `n` tail entries.
pub fn theorem2_profile(
    size: usize,
    kappa: &BigRational,
    d: usize,
    n: usize,
) -> Result<SpreadProfile, SpreadError> {
    check_kappa(kappa)?;
    if d > n {
        return Err(SpreadError::DTooLarge { d, n });
    }
    let s = int(size as u64);
    let tail = (1..=n)
        .map(|i| {
            if i <= d {
                &s / rational_pow(kappa, i as u64)
            } else {
                BigRational::one()
            }
        })
        .collect();
    SpreadProfile::new(s, tail)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpreadLink {
    pub t: ElementSet,
    pub link: SetFamily,
    /// No nonempty `T'` with `|T'| ≤ d - |T|` has `|(F_T)_{T'}|·κ^{|T'|} ≥ |F_T|`.
    /// Maximality of `T` forces this.
    pub residual_spread: bool,
    /// `|F_T| ≥ κ^{n-|T|}`, which maximality does not give.
    pub size_clause: bool,
}

/// The largest `T` with `|T| ≤ d` and `|F_T|·κ^{|T|} ≥ |F|`, first in canonical
/// order among those of that size. `T = ∅` always qualifies.
pub fn find_spread_link(
    family: &SetFamily,
    kappa: &BigRational,
    d: usize,
) -> Result<SpreadLink, SpreadError> {
    check_kappa(kappa)?;
    let n = uniformity(family)?;
    if d > n {
        return Err(SpreadError::DTooLarge { d, n });
    }
    let size = family.len();
    let qualifies =
        |k: usize, c: usize| rational_pow(kappa, k as u64) * int(c as u64) >= int(size as u64);
    let counts = link_counts(family);
    let t = (1..=d)
        .rev()
        .find_map(|k| {
            counts
                .iter()
                .find(|(t, &c)| t.len() == k && qualifies(k, c))
                .map(|(t, _)| t.clone())
        })
        .unwrap_or_else(|| ElementSet::empty(family.ground_size()));
    let linked = link(family, &t);
    let room = d - t.len();
    let inner = linked.len();
    let residual_spread = link_counts(&linked)
        .iter()
        .filter(|(tp, _)| tp.len() <= room)
        .all(|(tp, &c)| {
            let p = rational_pow(kappa, tp.len() as u64) * int(c as u64);
            p < int(inner as u64)
        });
    let size_clause = int(inner as u64) >= rational_pow(kappa, (n - t.len()) as u64);
    Ok(SpreadLink {
        t,
        link: linked,
        residual_spread,
        size_clause,
    })
}

fn check_alpha(alpha: &BigRational) -> Result<(), SpreadError> {
    if alpha.is_positive() && alpha < &BigRational::one() {
        Ok(())
    } else {
        Err(SpreadError::BadAlpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatisfyingEstimate {
    #[serde(serialize_with = "ser_rational")]
    pub alpha: BigRational,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub seed: u64,
}

impl SatisfyingEstimate {
    fn new(alpha: BigRational, trials: u64, successes: u64, seed: u64) -> Self {
        let estimate = successes as f64 / trials as f64;
        let stderr = (estimate * (1.0 - estimate) / trials as f64).sqrt();
        Self {
            alpha,
            trials,
            successes,
            estimate,
            stderr,
            seed,
        }
    }
}

/// `floor(α·2^32)`: each element joins `R` when a fresh `u32` is below this.
fn threshold_u32(alpha: &BigRational) -> u32 {
    let scaled = alpha * int(1u64 << 32);
    scaled.floor().to_integer().to_u32().unwrap_or(u32::MAX)
}

enum Members {
    Small(Vec<u64>),
    Wide(Vec<ElementSet>),
}

impl Members {
    fn of(family: &SetFamily) -> Self {
        if family.ground_size() <= 64 {
            Members::Small(
                family
                    .iter()
                    .map(|f| f.words().first().copied().unwrap_or(0))
                    .collect(),
            )
        } else {
            Members::Wide(family.members().to_vec())
        }
    }
}

const CHUNK: u64 = 4096;

/// Monte Carlo estimate with trial `i` drawn from ChaCha8 stream `i` of `seed`,
/// so the result does not depend on thread count or scheduling.
pub fn sample_satisfying(
    family: &SetFamily,
    alpha: &BigRational,
    trials: u64,
    seed: u64,
) -> Result<SatisfyingEstimate, SpreadError> {
    check_alpha(alpha)?;
    if trials == 0 {
        return Err(SpreadError::BadTrials);
    }
    let x = family.ground_size();
    let threshold = threshold_u32(alpha);
    let members = Members::of(family);
    let base = ChaCha8Rng::seed_from_u64(seed);
    let chunks = trials.div_ceil(CHUNK);
    let successes: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut hits = 0u64;
            let mut rng = base.clone();
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                rng.set_stream(trial);
                rng.set_word_pos(0);
                let hit = match &members {
                    Members::Small(masks) => {
                        let mut r = 0u64;
                        for e in 0..x {
                            if rng.next_u32() < threshold {
                                r |= 1 << e;
                            }
                        }
                        masks.iter().any(|m| m & r == *m)
                    }
                    Members::Wide(sets) => {
                        let mut r = ElementSet::empty(x);
                        for e in 0..x {
                            if rng.next_u32() < threshold {
                                r.insert(e);
                            }
                        }
                        sets.iter().any(|s| s.is_subset(&r))
                    }
                };
                hits += u64::from(hit);
            }
            hits
        })
        .sum();
    Ok(SatisfyingEstimate::new(
        alpha.clone(),
        trials,
        successes,
        seed,
    ))
}

/// `N_k`: the number of `R ⊆ X` with `|R| = k` containing some member.
pub fn satisfying_counts(family: &SetFamily) -> Result<Vec<BigUint>, SpreadError> {
    let x = family.ground_size();
    if x > EXACT_BUDGET {
        return Err(SpreadError::OverBudget {
            x,
            max: EXACT_BUDGET,
        });
    }
    let len = 1usize << x;
    let mut up = vec![false; len];
    for f in family.iter() {
        up[f.to_mask() as usize] = true;
    }
    // superset closure, one coordinate at a time
    for b in 0..x {
        let bit = 1usize << b;
        for mask in 0..len {
            if mask & bit == 0 && up[mask] {
                up[mask | bit] = true;
            }
        }
    }
    let mut counts = vec![0u64; x + 1];
    for (mask, &hit) in up.iter().enumerate() {
        if hit {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    Ok(counts.into_iter().map(BigUint::from).collect())
}

/// `Σ_R α^{|R|}(1-α)^{x-|R|}·[∃S ∈ F : S ⊆ R]`, exactly.
pub fn exact_satisfying(
    family: &SetFamily,
    alpha: &BigRational,
) -> Result<BigRational, SpreadError> {
    let counts = satisfying_counts(family)?;
    let x = family.ground_size() as u64;
    let beta = BigRational::one() - alpha;
    Ok(counts
        .into_iter()
        .enumerate()
        .filter(|(_, n)| !n.is_zero())
        .map(|(k, n)| {
            let k = k as u64;
            BigRational::from_integer(BigInt::from(n))
                * rational_pow(alpha, k)
                * rational_pow(&beta, x - k)
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Probability {
    Exact {
        #[serde(serialize_with = "ser_rational")]
        value: BigRational,
        approx: f64,
    },
    Sampled(SatisfyingEstimate),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisjointReport {
    pub r: usize,
    #[serde(serialize_with = "ser_rational")]
    pub alpha: BigRational,
    pub probability: Probability,
    /// `P > 1 - 1/r`; for sampled runs this uses the point estimate.
    pub satisfying: bool,
    pub disjoint: Option<Vec<ElementSet>>,
    /// `satisfying ⇒ disjoint.is_some()`.
    pub consistent: bool,
}

/// Evaluates `P(∃S ⊆ R)` at `α = 1/r` and searches for `r` pairwise disjoint
/// members. Exact whenever the ground set is small enough, sampled otherwise.
pub fn check_satisfying_disjoint(
    family: &SetFamily,
    r: usize,
    sampling: Option<SampleConfig>,
) -> Result<DisjointReport, SpreadError> {
    if family.iter().any(|f| f.is_empty()) {
        return Err(SpreadError::EmptyMember);
    }
    if r < 2 {
        return Err(SpreadError::BadAlpha);
    }
    let alpha = BigRational::new(1.into(), BigInt::from(r));
    let cut = BigRational::one() - &alpha;
    let (probability, satisfying) = if family.ground_size() <= EXACT_BUDGET {
        let value = exact_satisfying(family, &alpha)?;
        let sat = value > cut;
        (
            Probability::Exact {
                approx: rational_to_f64(&value),
                value,
            },
            sat,
        )
    } else {
        let cfg = sampling.ok_or(SpreadError::OverBudget {
            x: family.ground_size(),
            max: EXACT_BUDGET,
        })?;
        let est = sample_satisfying(family, &alpha, cfg.trials, cfg.seed)?;
        let sat = est.estimate > rational_to_f64(&cut);
        (Probability::Sampled(est), sat)
    };
    let disjoint = find_r_disjoint(family, r);
    let consistent = !satisfying || disjoint.is_some();
    Ok(DisjointReport {
        r,
        alpha,
        probability,
        satisfying,
        disjoint,
        consistent,
    })
}
