//! Sunflower finders.
//!
//! * [`brute_force_sunflower`] is the exhaustive oracle.
//! * [`deza_extract`] handles single-intersection families, which above
//!   `n² - n + 2` members are sunflowers outright.
//! * [`l_intersecting_find`] is the constructive recursion for `L`-intersecting
//!   families: take a maximal `ℓ1`-pairwise subfamily, pigeonhole down to one of its
//!   sets and then to an `(ℓ1+1)`-subset, and recurse on the link.
//! * [`find_any`] dispatches between them under a search budget.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::m_value;
use crate::family::{
    intersection_profile, is_l_intersecting, is_sunflower, link, FamilyError, SetFamily, Sunflower,
};
use crate::rational::binomial;
use crate::set::ElementSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FinderError {
    #[error("r must be at least 2, got {0}")]
    BadR(usize),
    #[error("family is not uniform")]
    NotUniform,
    #[error("intersection profile {profile:?} is not a single size")]
    ProfileNotSingleton { profile: Vec<usize> },
    #[error("family has {size} members, below the threshold {threshold}")]
    BelowThreshold { size: usize, threshold: usize },
    #[error("intersection size set L must be nonempty")]
    EmptyL,
    #[error("L contains {max} which is not below the uniformity {n}")]
    LTooLarge { max: usize, n: usize },
    #[error("family is not L-intersecting for L = {l:?}")]
    NotLIntersecting { l: Vec<usize> },
    /// A single-intersection family above the threshold that is not a sunflower.
    /// This would contradict Deza's lemma; it is never expected to occur.
    #[error("single-intersection family above the threshold failed the sunflower certificate")]
    DezaCertificateFailed,
    #[error("lifted sets failed the sunflower certificate")]
    LiftFailed,
    #[error(transparent)]
    Family(#[from] FamilyError),
}

fn check_r(r: usize) -> Result<(), FinderError> {
    if r < 2 {
        Err(FinderError::BadR(r))
    } else {
        Ok(())
    }
}

/// Exhaustive search over `r`-subsets of members in lexicographic index order.
///
/// Partial selections are pruned as soon as two chosen sets meet in something
/// other than the common core of the first two.
pub fn brute_force_sunflower(
    family: &SetFamily,
    r: usize,
) -> Result<Option<Sunflower>, FinderError> {
    match budgeted_brute_force(family, r, u64::MAX)? {
        BruteOutcome::Found(s) => Ok(Some(s)),
        BruteOutcome::Absent => Ok(None),
        BruteOutcome::BudgetExceeded => unreachable!("unbounded budget"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteOutcome {
    Found(Sunflower),
    Absent,
    BudgetExceeded,
}

struct Search<'a> {
    members: &'a [ElementSet],
    r: usize,
    chosen: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    /// `core_size` is the size every pairwise intersection must have, once known.
    fn extend(&mut self, start: usize, core: Option<&ElementSet>) -> Option<bool> {
        if self.chosen.len() == self.r {
            return Some(true);
        }
        let need = self.r - self.chosen.len();
        for i in start..self.members.len() {
            if self.members.len() - i < need {
                break;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return None;
            }
            let cand = &self.members[i];
            let fits = match core {
                Some(k) => self.chosen.iter().all(|&j| {
                    cand.intersection_len(&self.members[j]) == k.len() && k.is_subset(cand)
                }),
                None => true,
            };
            if !fits {
                continue;
            }
            self.chosen.push(i);
            let found = match (core, self.chosen.len()) {
                (None, 2) => {
                    let k = self.members[self.chosen[0]].intersection(cand);
                    self.extend(i + 1, Some(&k))
                }
                (c, _) => self.extend(i + 1, c),
            };
            match found {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {
                    self.chosen.pop();
                }
            }
        }
        Some(false)
    }
}

/// Brute force with a cap on visited search nodes. The first sunflower in
/// canonical order is returned whether or not the top level runs in parallel.
pub fn budgeted_brute_force(
    family: &SetFamily,
    r: usize,
    budget: u64,
) -> Result<BruteOutcome, FinderError> {
    check_r(r)?;
    let members = family.members();
    if members.len() < r {
        return Ok(BruteOutcome::Absent);
    }
    // Split on the first chosen index; each branch gets the whole budget, so the
    // verdict only depends on the family and the budget.
    let results: Vec<Option<Option<Vec<usize>>>> = (0..=members.len() - r)
        .into_par_iter()
        .map(|first| {
            let mut s = Search {
                members,
                r,
                chosen: vec![first],
                nodes: 0,
                budget,
            };
            match s.extend(first + 1, None) {
                Some(true) => Some(Some(s.chosen)),
                Some(false) => Some(None),
                None => None,
            }
        })
        .collect();
    for res in results {
        match res {
            None => return Ok(BruteOutcome::BudgetExceeded),
            Some(Some(idx)) => {
                let sets = idx.into_iter().map(|i| members[i].clone()).collect();
                let sf = Sunflower::certify(sets)?.expect("search only accepts sunflowers");
                return Ok(BruteOutcome::Found(sf));
            }
            Some(None) => {}
        }
    }
    Ok(BruteOutcome::Absent)
}

/// `n² - n + 2`, the size at which a single-intersection `n`-uniform family is
/// forced to be a sunflower.
pub fn deza_threshold(n: usize) -> usize {
    n * n - n + 2
}

/// The first `r` members of a `{t}`-intersecting `n`-uniform family with at least
/// `max(r, n²-n+2)` members, as a sunflower with core `∩F`.
///
/// The whole family is certified before returning.
pub fn deza_extract(family: &SetFamily, r: usize) -> Result<Sunflower, FinderError> {
    check_r(r)?;
    let n = family.uniformity().ok_or(FinderError::NotUniform)?;
    let threshold = deza_threshold(n).max(r);
    if family.len() < threshold {
        return Err(FinderError::BelowThreshold {
            size: family.len(),
            threshold,
        });
    }
    let profile = intersection_profile(family);
    if profile.sizes.len() != 1 {
        return Err(FinderError::ProfileNotSingleton {
            profile: profile.sizes.into_iter().collect(),
        });
    }
    let t = *profile.sizes.first().expect("singleton");
    let core = is_sunflower(family.members())?.ok_or(FinderError::DezaCertificateFailed)?;
    if core.len() != t {
        return Err(FinderError::DezaCertificateFailed);
    }
    let sets = family.members()[..r].to_vec();
    let sf = Sunflower::certify(sets)?.ok_or(FinderError::DezaCertificateFailed)?;
    if sf.core() != &core {
        return Err(FinderError::DezaCertificateFailed);
    }
    Ok(sf)
}

/// One level of the constructive recursion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceLevel {
    pub depth: usize,
    /// Uniformity of the family handled at this level.
    pub n: usize,
    pub l: Vec<usize>,
    pub family_size: usize,
    /// Greedy maximal subfamily with all pairwise intersections of size `ℓ1`.
    pub maximal_subfamily: Vec<ElementSet>,
    pub chosen_s: Option<ElementSet>,
    pub chosen_s_prime: Option<ElementSet>,
    /// `|F'|`: members meeting `S` in at least `ℓ1 + 1` elements.
    pub reduced_size: Option<usize>,
    /// `|F'_{S'}|`.
    pub link_size: Option<usize>,
    /// `C(n, ℓ1 + 1)`.
    #[serde(serialize_with = "ser_display_opt")]
    pub subset_count: Option<BigUint>,
}

fn ser_display_opt<S: serde::Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceOutcome {
    /// Found by Deza's lemma at the given depth.
    Found { depth: usize },
    /// The recursion stopped below the size the argument needs; nothing is claimed
    /// about the absence of sunflowers.
    HypothesisNotMet { depth: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FinderTrace {
    #[serde(serialize_with = "crate::finders::ser_display_big")]
    pub m: BigUint,
    pub levels: Vec<TraceLevel>,
    pub outcome: TraceOutcome,
}

pub(crate) fn ser_display_big<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl FinderTrace {
    /// Both pigeonhole inequalities hold on every level that got that far, and the
    /// depth stays within `|L|`.
    pub fn pigeonhole_holds(&self) -> bool {
        let s = self.levels.first().map_or(0, |l| l.l.len());
        self.levels.len() <= s.max(1)
            && self.levels.iter().all(|lvl| {
                let reduced_ok = lvl.reduced_size.is_none_or(|red| {
                    BigUint::from(red) * &self.m >= BigUint::from(lvl.family_size)
                });
                let link_ok = match (lvl.reduced_size, lvl.link_size, &lvl.subset_count) {
                    (Some(red), Some(lk), Some(c)) => BigUint::from(lk) * c >= BigUint::from(red),
                    _ => true,
                };
                reduced_ok && link_ok
            })
    }
}

fn check_l_input(family: &SetFamily, l: &BTreeSet<usize>, r: usize) -> Result<usize, FinderError> {
    check_r(r)?;
    let n = family.uniformity().ok_or(FinderError::NotUniform)?;
    let max = *l.last().ok_or(FinderError::EmptyL)?;
    if max >= n {
        return Err(FinderError::LTooLarge { max, n });
    }
    if !is_l_intersecting(family, l) {
        return Err(FinderError::NotLIntersecting {
            l: l.iter().copied().collect(),
        });
    }
    Ok(n)
}

/// Constructive sunflower search for an `n`-uniform `L`-intersecting family.
///
/// `m = max(r-1, n²-n+1)` is fixed from the top-level `n`. Whenever `|F|` exceeds
/// [`crate::bounds::claim1_bound`] a sunflower is returned; below that the search
/// may still succeed, otherwise the trace says where it stopped.
pub fn l_intersecting_find(
    family: &SetFamily,
    l: &BTreeSet<usize>,
    r: usize,
) -> Result<(Option<Sunflower>, FinderTrace), FinderError> {
    if family.is_empty() {
        // an empty family is vacuously uniform for any n
        check_r(r)?;
        if l.is_empty() {
            return Err(FinderError::EmptyL);
        }
    } else {
        check_l_input(family, l, r)?;
    }
    let n = family.uniformity().unwrap_or(0);
    let m = m_value(n as u64, r as u64);
    let mut levels = Vec::new();
    let found = recurse(
        family,
        n,
        l.iter().copied().collect(),
        r,
        &m,
        0,
        &mut levels,
    )?;
    let (sunflower, outcome) = match found {
        Ok((sf, depth)) => {
            if Sunflower::certify(sf.sets().to_vec())?.is_none() || !sf.verify_in(family) {
                return Err(FinderError::LiftFailed);
            }
            (Some(sf), TraceOutcome::Found { depth })
        }
        Err((depth, reason)) => (None, TraceOutcome::HypothesisNotMet { depth, reason }),
    };
    Ok((sunflower, FinderTrace { m, levels, outcome }))
}

type LevelResult = Result<(Sunflower, usize), (usize, String)>;

fn recurse(
    family: &SetFamily,
    n: usize,
    l: Vec<usize>,
    r: usize,
    m: &BigUint,
    depth: usize,
    levels: &mut Vec<TraceLevel>,
) -> Result<LevelResult, FinderError> {
    let mut level = TraceLevel {
        depth,
        n,
        l: l.clone(),
        family_size: family.len(),
        maximal_subfamily: Vec::new(),
        chosen_s: None,
        chosen_s_prime: None,
        reduced_size: None,
        link_size: None,
        subset_count: None,
    };
    if family.len() < r {
        levels.push(level);
        return Ok(Err((
            depth,
            format!("only {} sets, fewer than r = {r}", family.len()),
        )));
    }
    let l1 = l[0];
    if l.len() == 1 {
        levels.push(level);
        let threshold = deza_threshold(n).max(r);
        if family.len() < threshold {
            return Ok(Err((
                depth,
                format!(
                    "single intersection size with {} sets, below max(r, n²-n+2) = {threshold}",
                    family.len()
                ),
            )));
        }
        return Ok(Ok((deza_extract(family, r)?, depth)));
    }

    // Greedy maximal subfamily whose pairwise intersections all have size ℓ1.
    let mut greedy: Vec<&ElementSet> = Vec::new();
    for f in family.iter() {
        if greedy.iter().all(|g| g.intersection_len(f) == l1) {
            greedy.push(f);
        }
    }
    level.maximal_subfamily = greedy.iter().map(|s| (*s).clone()).collect();
    if BigUint::from(greedy.len()) > *m {
        levels.push(level);
        let sub = SetFamily::from_sets(
            family.ground_size(),
            greedy.iter().map(|s| (*s).clone()).collect(),
        )?;
        return Ok(Ok((deza_extract(&sub, r)?, depth)));
    }

    // S ∈ greedy meeting the most members in ≥ ℓ1 + 1 elements; first on ties.
    let meets = |s: &ElementSet| family.iter().filter(|f| f.intersection_len(s) > l1).count();
    let mut best = (greedy[0], meets(greedy[0]));
    for &s in &greedy[1..] {
        let c = meets(s);
        if c > best.1 {
            best = (s, c);
        }
    }
    let s = best.0.clone();
    let reduced = family.filter(|f| f.intersection_len(&s) > l1);
    level.chosen_s = Some(s.clone());
    level.reduced_size = Some(reduced.len());

    // S' ⊆ S of size ℓ1 + 1 with the largest link in F'; first on ties. The scan
    // is a max-reduction with a positional tie-break, so it parallelizes exactly.
    let candidates: Vec<ElementSet> = s.subsets_of_size(l1 + 1).collect();
    let (best_idx, best_count) = candidates
        .par_iter()
        .enumerate()
        .map(|(i, sp)| (i, reduced.iter().filter(|f| sp.is_subset(f)).count()))
        .reduce(
            || (usize::MAX, 0),
            |a, b| match (a.0, b.0) {
                (usize::MAX, _) => b,
                (_, usize::MAX) => a,
                _ if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) => b,
                _ => a,
            },
        );
    let s_prime = candidates[best_idx].clone();
    let linked = link(&reduced, &s_prime);
    debug_assert_eq!(linked.len(), best_count);
    level.chosen_s_prime = Some(s_prime.clone());
    level.link_size = Some(linked.len());
    level.subset_count = Some(binomial(n as u64, (l1 + 1) as u64));
    levels.push(level);

    let next_l: Vec<usize> = l[1..].iter().map(|&v| v - l1 - 1).collect();
    let next_n = n - l1 - 1;
    match recurse(&linked, next_n, next_l, r, m, depth + 1, levels)? {
        Ok((sf, d)) => {
            let lifted: Vec<ElementSet> = sf.sets().iter().map(|g| g.union(&s_prime)).collect();
            let lifted = Sunflower::certify(lifted)?.ok_or(FinderError::LiftFailed)?;
            Ok(Ok((lifted, d)))
        }
        Err(e) => Ok(Err(e)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Constructive search first, then budgeted brute force.
    Auto,
    Constructive,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FindOutcome {
    Found {
        sunflower: Sunflower,
        method: &'static str,
    },
    /// Definitively no `r`-sunflower.
    Absent,
    /// Not decided within the budget or by the chosen strategy.
    Unknown { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FindReport {
    pub outcome: FindOutcome,
    pub trace: Option<FinderTrace>,
}

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Tries the constructive search with `L` = the family's own intersection profile,
/// then falls back to brute force capped at `budget` search nodes per branch.
pub fn find_any(
    family: &SetFamily,
    r: usize,
    strategy: Strategy,
    budget: u64,
) -> Result<FindReport, FinderError> {
    check_r(r)?;
    if family.len() < r {
        return Ok(FindReport {
            outcome: FindOutcome::Absent,
            trace: None,
        });
    }
    let mut trace = None;
    if strategy != Strategy::BruteForce {
        let profile = intersection_profile(family);
        let applicable = family
            .uniformity()
            .is_some_and(|n| profile.max().is_some_and(|t| t < n));
        if applicable {
            let (found, tr) = l_intersecting_find(family, &profile.sizes, r)?;
            trace = Some(tr);
            if let Some(sunflower) = found {
                return Ok(FindReport {
                    outcome: FindOutcome::Found {
                        sunflower,
                        method: "constructive",
                    },
                    trace,
                });
            }
        }
        if strategy == Strategy::Constructive {
            let reason = if applicable {
                "constructive search stopped below its guarantee".to_string()
            } else {
                "family is not uniform; constructive search does not apply".to_string()
            };
            return Ok(FindReport {
                outcome: FindOutcome::Unknown { reason },
                trace,
            });
        }
    }
    let outcome = match budgeted_brute_force(family, r, budget)? {
        BruteOutcome::Found(sunflower) => FindOutcome::Found {
            sunflower,
            method: "brute_force",
        },
        BruteOutcome::Absent => FindOutcome::Absent,
        BruteOutcome::BudgetExceeded => FindOutcome::Unknown {
            reason: format!("brute force exceeded its budget of {budget} nodes"),
        },
    };
    Ok(FindReport { outcome, trace })
}
