//! Families with known structure. Every generator re-checks the property it
//! advertises before returning.

use std::collections::{BTreeSet, HashSet};

use itertools::Itertools;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::family::{intersection_profile, is_l_intersecting, is_sunflower, SetFamily};
use crate::rational::binomial;
use crate::set::ElementSet;

/// Most sets any exhaustive generator will build.
pub const ENUMERATION_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("{what} would produce {count} sets, over the budget of {budget}")]
    Budget {
        what: &'static str,
        count: String,
        budget: u64,
    },
    #[error("requested {count} sets but only {total} distinct ones exist")]
    Infeasible { count: u64, total: String },
    #[error("generated family failed its own check: {0}")]
    Verification(String),
}

fn params(msg: impl Into<String>) -> GenError {
    GenError::Params(msg.into())
}

fn verify(ok: bool, what: &str) -> Result<(), GenError> {
    if ok {
        Ok(())
    } else {
        Err(GenError::Verification(what.to_string()))
    }
}

fn sets_of(x: usize, lists: impl IntoIterator<Item = Vec<usize>>) -> SetFamily {
    SetFamily::from_lists(x, lists).expect("constructed lists are valid and distinct")
}

/// Core `{0..core}`, then `r` petals of `petal` fresh elements each.
pub fn gen_sunflower(core: usize, petal: usize, r: usize) -> Result<SetFamily, GenError> {
    if r < 2 {
        return Err(params("a sunflower needs r ≥ 2"));
    }
    if petal == 0 {
        return Err(params("petal size 0 gives r copies of the core"));
    }
    let x = core + r * petal;
    let family = sets_of(
        x,
        (0..r).map(|i| {
            (0..core)
                .chain(core + i * petal..core + (i + 1) * petal)
                .collect()
        }),
    );
    let want = ElementSet::from_elements(x, 0..core).expect("in range");
    verify(
        is_sunflower(family.members()).ok().flatten() == Some(want),
        "sunflower core",
    )?;
    Ok(family)
}

/// All `q^b` sets picking one element from each block `{jq, …, jq+q-1}`.
pub fn gen_transversal(blocks: usize, block_size: usize) -> Result<SetFamily, GenError> {
    if blocks == 0 || block_size == 0 {
        return Err(params("blocks and block size must be at least 1"));
    }
    let count = (block_size as u64)
        .checked_pow(u32::try_from(blocks).unwrap_or(u32::MAX))
        .filter(|&c| c <= ENUMERATION_BUDGET)
        .ok_or_else(|| GenError::Budget {
            what: "transversal family",
            count: format!("{block_size}^{blocks}"),
            budget: ENUMERATION_BUDGET,
        })?;
    let x = blocks * block_size;
    let family = sets_of(
        x,
        (0..blocks)
            .map(|j| (j * block_size..(j + 1) * block_size).collect::<Vec<_>>())
            .multi_cartesian_product(),
    );
    verify(
        family.len() as u64 == count && family.uniformity() == Some(blocks),
        "transversal count",
    )?;
    Ok(family)
}

pub fn gen_all_k_subsets(x: usize, k: usize) -> Result<SetFamily, GenError> {
    if k > x {
        return Err(params(format!("k = {k} exceeds x = {x}")));
    }
    let total = binomial(x as u64, k as u64);
    if total > ENUMERATION_BUDGET.into() {
        return Err(GenError::Budget {
            what: "all k-subsets",
            count: total.to_string(),
            budget: ENUMERATION_BUDGET,
        });
    }
    let family = SetFamily::from_sets(x, ElementSet::full(x).subsets_of_size(k).collect())
        .expect("combinations are distinct");
    verify(total == family.len().into(), "subset count")?;
    Ok(family)
}

fn random_subset(rng: &mut ChaCha8Rng, x: usize, n: usize) -> ElementSet {
    ElementSet::from_elements(x, index::sample(rng, x, n)).expect("distinct indices")
}

/// `count` distinct `n`-subsets, uniformly at random for a fixed seed.
pub fn gen_random_uniform(
    x: usize,
    n: usize,
    count: u64,
    seed: u64,
) -> Result<SetFamily, GenError> {
    if n > x {
        return Err(params(format!("n = {n} exceeds x = {x}")));
    }
    let total = binomial(x as u64, n as u64);
    if total < count.into() {
        return Err(GenError::Infeasible {
            count,
            total: total.to_string(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = if total == count.into() {
        gen_all_k_subsets(x, n)?
    } else if total <= ENUMERATION_BUDGET.into()
        && 2 * u128::from(count) > u128::try_from(&total).unwrap()
    {
        // dense request: pick indices into the full list instead of rejecting
        let all = gen_all_k_subsets(x, n)?;
        let picked = index::sample(&mut rng, all.len(), count as usize);
        SetFamily::from_sets(
            x,
            picked
                .into_iter()
                .map(|i| all.members()[i].clone())
                .collect(),
        )
        .expect("distinct indices")
    } else {
        // at most half of all subsets are taken, so each draw succeeds w.p. ≥ 1/2
        let mut seen = HashSet::new();
        let mut sets = Vec::with_capacity(count as usize);
        while (sets.len() as u64) < count {
            let s = random_subset(&mut rng, x, n);
            if seen.insert(s.clone()) {
                sets.push(s);
            }
        }
        SetFamily::from_sets(x, sets).expect("deduplicated")
    };
    verify(
        family.len() as u64 == count && family.iter().all(|f| f.len() == n),
        "uniform sample",
    )?;
    Ok(family)
}

/// A `{t}`-intersecting `n`-uniform family of `count` sets: a sunflower with a
/// `t`-element core.
pub fn gen_single_intersection(n: usize, t: usize, count: usize) -> Result<SetFamily, GenError> {
    if t >= n {
        return Err(params(format!("need t < n, got t = {t}, n = {n}")));
    }
    let petal = n - t;
    let x = t + count * petal;
    let family = sets_of(
        x,
        (0..count).map(|i| (0..t).chain(t + i * petal..t + (i + 1) * petal).collect()),
    );
    let profile = intersection_profile(&family);
    verify(
        count < 2 || profile.sizes == BTreeSet::from([t]),
        "single intersection size",
    )?;
    Ok(family)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GreedyRun {
    pub requested: u64,
    pub produced: u64,
    pub attempts: u64,
    pub reached_target: bool,
}

/// Keeps random `n`-subsets whose intersections with every kept set lie in `L`,
/// for at most `budget` draws. The result is not uniform over `L`-intersecting
/// families.
pub fn gen_random_l_intersecting(
    x: usize,
    n: usize,
    l: &BTreeSet<usize>,
    target: u64,
    seed: u64,
    budget: u64,
) -> Result<(SetFamily, GreedyRun), GenError> {
    if n > x {
        return Err(params(format!("n = {n} exceeds x = {x}")));
    }
    if let Some(&bad) = l.iter().find(|&&v| v >= n) {
        return Err(params(format!(
            "L contains {bad}, which is not below n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept: Vec<ElementSet> = Vec::new();
    let mut attempts = 0;
    while (kept.len() as u64) < target && attempts < budget {
        attempts += 1;
        let s = random_subset(&mut rng, x, n);
        if kept
            .iter()
            .all(|k| k != &s && l.contains(&k.intersection_len(&s)))
        {
            kept.push(s);
        }
    }
    let family = SetFamily::from_sets(x, kept).expect("distinct by construction");
    verify(is_l_intersecting(&family, l), "L-intersecting")?;
    let produced = family.len() as u64;
    Ok((
        family,
        GreedyRun {
            requested: target,
            produced,
            attempts,
            reached_target: produced == target,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Sunflower {
        core: usize,
        petal: usize,
        r: usize,
    },
    Transversal {
        blocks: usize,
        block_size: usize,
    },
    AllKSubsets {
        x: usize,
        k: usize,
    },
    RandomUniform {
        x: usize,
        n: usize,
        count: u64,
        seed: u64,
    },
    RandomLIntersecting {
        x: usize,
        n: usize,
        l: BTreeSet<usize>,
        target: u64,
        seed: u64,
        budget: u64,
    },
    SingleIntersection {
        n: usize,
        t: usize,
        count: usize,
    },
}

impl GeneratorSpec {
    pub fn seed(&self) -> Option<u64> {
        match self {
            GeneratorSpec::RandomUniform { seed, .. }
            | GeneratorSpec::RandomLIntersecting { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    /// The family, plus the greedy run summary for the `L`-intersecting sampler.
    pub fn generate(&self) -> Result<(SetFamily, Option<GreedyRun>), GenError> {
        Ok(match self {
            GeneratorSpec::Sunflower { core, petal, r } => {
                (gen_sunflower(*core, *petal, *r)?, None)
            }
            GeneratorSpec::Transversal { blocks, block_size } => {
                (gen_transversal(*blocks, *block_size)?, None)
            }
            GeneratorSpec::AllKSubsets { x, k } => (gen_all_k_subsets(*x, *k)?, None),
            GeneratorSpec::RandomUniform { x, n, count, seed } => {
                (gen_random_uniform(*x, *n, *count, *seed)?, None)
            }
            GeneratorSpec::RandomLIntersecting {
                x,
                n,
                l,
                target,
                seed,
                budget,
            } => {
                let (f, run) = gen_random_l_intersecting(*x, *n, l, *target, *seed, *budget)?;
                (f, Some(run))
            }
            GeneratorSpec::SingleIntersection { n, t, count } => {
                (gen_single_intersection(*n, *t, *count)?, None)
            }
        })
    }
}
