//! Set families over a shared ground set, intersection profiles, links and
//! sunflower certificates.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::set::{ElementError, ElementSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("set {index}: {source}")]
    Element {
        index: usize,
        #[source]
        source: ElementError,
    },
    #[error("set {index} duplicates set {first} ({set})")]
    DuplicateSet {
        index: usize,
        first: usize,
        set: String,
    },
    #[error("set {index} has {found} elements but the family is declared {expected}-uniform")]
    NotUniform {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("set over ground size {found} added to a family over ground size {expected}")]
    GroundMismatch { expected: usize, found: usize },
    #[error("{weights} weights supplied for {members} members")]
    WeightCount { weights: usize, members: usize },
    #[error("weight {index} is negative")]
    NegativeWeight { index: usize },
    #[error("all weights are zero")]
    AllWeightsZero,
    #[error("a sunflower needs at least 2 sets, got {0}")]
    TooFewSets(usize),
    #[error("sets {0} and {1} are equal")]
    RepeatedSet(usize, usize),
}

/// Distinct subsets of `{0, …, ground_size-1}` kept in canonical (lexicographic) order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetFamily {
    ground_size: usize,
    members: Vec<ElementSet>,
    uniformity: Option<usize>,
}

impl SetFamily {
    pub fn empty(ground_size: usize) -> Self {
        SetFamily {
            ground_size,
            members: Vec::new(),
            uniformity: None,
        }
    }

    /// Builds a family from element lists. Duplicate sets are an error; the
    /// reported index is the later of the two copies in input order.
    pub fn from_lists<I, S>(ground_size: usize, lists: I) -> Result<Self, FamilyError>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = usize>,
    {
        let sets = lists
            .into_iter()
            .enumerate()
            .map(|(index, l)| {
                ElementSet::from_elements(ground_size, l)
                    .map_err(|source| FamilyError::Element { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_sets(ground_size, sets)
    }

    pub fn from_sets(ground_size: usize, sets: Vec<ElementSet>) -> Result<Self, FamilyError> {
        Ok(Self::from_sets_with_order(ground_size, sets)?.0)
    }

    /// Like [`from_sets`](Self::from_sets) but also returns, for each canonical
    /// position, the index of the input set it came from.
    pub(crate) fn from_sets_with_order(
        ground_size: usize,
        sets: Vec<ElementSet>,
    ) -> Result<(Self, Vec<usize>), FamilyError> {
        for s in &sets {
            if s.universe() != ground_size {
                return Err(FamilyError::GroundMismatch {
                    expected: ground_size,
                    found: s.universe(),
                });
            }
        }
        let mut order: Vec<usize> = (0..sets.len()).collect();
        order.sort_by(|&a, &b| sets[a].cmp(&sets[b]).then(a.cmp(&b)));
        for w in order.windows(2) {
            if sets[w[0]] == sets[w[1]] {
                return Err(FamilyError::DuplicateSet {
                    index: w[1],
                    first: w[0],
                    set: sets[w[0]].to_string(),
                });
            }
        }
        let mut slots: Vec<Option<ElementSet>> = sets.into_iter().map(Some).collect();
        let members = order
            .iter()
            .map(|&i| slots[i].take().expect("each index used once"))
            .collect();
        Ok((
            SetFamily {
                ground_size,
                members,
                uniformity: None,
            },
            order,
        ))
    }

    /// Declares the family `n`-uniform, checking every member.
    pub fn with_uniformity(mut self, n: usize) -> Result<Self, FamilyError> {
        for (index, m) in self.members.iter().enumerate() {
            if m.len() != n {
                return Err(FamilyError::NotUniform {
                    index,
                    expected: n,
                    found: m.len(),
                });
            }
        }
        self.uniformity = Some(n);
        Ok(self)
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn members(&self) -> &[ElementSet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ElementSet> {
        self.members.iter()
    }

    pub fn declared_uniformity(&self) -> Option<usize> {
        self.uniformity
    }

    /// The common member size, if the family is nonempty and uniform.
    pub fn uniformity(&self) -> Option<usize> {
        if let Some(n) = self.uniformity {
            return Some(n);
        }
        let n = self.members.first()?.len();
        self.members.iter().all(|m| m.len() == n).then_some(n)
    }

    pub fn contains(&self, s: &ElementSet) -> bool {
        self.position(s).is_some()
    }

    pub fn position(&self, s: &ElementSet) -> Option<usize> {
        if s.universe() != self.ground_size {
            return None;
        }
        self.members.binary_search(s).ok()
    }

    /// Subfamily of the members for which `keep` holds, order preserved.
    pub fn filter(&self, keep: impl Fn(&ElementSet) -> bool) -> SetFamily {
        SetFamily {
            ground_size: self.ground_size,
            members: self.members.iter().filter(|m| keep(m)).cloned().collect(),
            uniformity: self.uniformity,
        }
    }

    /// Family with an extra member; `None` if it is already present.
    pub fn with_member(&self, s: ElementSet) -> Option<SetFamily> {
        assert_eq!(s.universe(), self.ground_size);
        let pos = self.members.binary_search(&s).err()?;
        let mut members = self.members.clone();
        members.insert(pos, s);
        Some(SetFamily {
            ground_size: self.ground_size,
            members,
            uniformity: None,
        })
    }

    pub fn to_lists(&self) -> Vec<Vec<usize>> {
        self.members.iter().map(|m| m.to_vec()).collect()
    }
}

/// The distinct sizes `|A ∩ B|` over unordered pairs of distinct members.
/// Same shape as the JSON family file.
impl Serialize for SetFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SetFamily", 2)?;
        st.serialize_field("ground_size", &self.ground_size)?;
        st.serialize_field("sets", &self.members)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct IntersectionProfile {
    pub sizes: BTreeSet<usize>,
}

impl IntersectionProfile {
    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn max(&self) -> Option<usize> {
        self.sizes.iter().next_back().copied()
    }

    pub fn is_subset_of(&self, l: &BTreeSet<usize>) -> bool {
        self.sizes.is_subset(l)
    }
}

pub fn intersection_profile(family: &SetFamily) -> IntersectionProfile {
    let mut sizes = BTreeSet::new();
    let m = family.members();
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            sizes.insert(m[i].intersection_len(&m[j]));
        }
    }
    IntersectionProfile { sizes }
}

/// Every pairwise intersection size lies in `l`.
pub fn is_l_intersecting(family: &SetFamily, l: &BTreeSet<usize>) -> bool {
    let m = family.members();
    (0..m.len()).all(|i| (i + 1..m.len()).all(|j| l.contains(&m[i].intersection_len(&m[j]))))
}

/// Every pairwise intersection has at most `d` elements.
pub fn is_d_intersecting(family: &SetFamily, d: usize) -> bool {
    let m = family.members();
    (0..m.len()).all(|i| (i + 1..m.len()).all(|j| m[i].intersection_len(&m[j]) <= d))
}

/// `{F \ T : F ∈ family, T ⊆ F}`.
///
/// Removing a common `T` keeps members distinct, and the canonical order of the
/// survivors is preserved only up to re-sorting, which is done here.
pub fn link(family: &SetFamily, t: &ElementSet) -> SetFamily {
    let mut members: Vec<ElementSet> = family
        .iter()
        .filter(|f| t.is_subset(f))
        .map(|f| f.difference(t))
        .collect();
    members.sort();
    SetFamily {
        ground_size: family.ground_size,
        members,
        uniformity: family.uniformity.map(|n| n - t.len()),
    }
}

/// Number of members containing `t`, i.e. `|link(family, t)|`.
pub fn link_size(family: &SetFamily, t: &ElementSet) -> usize {
    family.iter().filter(|f| t.is_subset(f)).count()
}

fn check_distinct(sets: &[ElementSet]) -> Result<(), FamilyError> {
    if sets.len() < 2 {
        return Err(FamilyError::TooFewSets(sets.len()));
    }
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if sets[i] == sets[j] {
                return Err(FamilyError::RepeatedSet(i, j));
            }
        }
    }
    Ok(())
}

fn common_intersection(sets: &[ElementSet]) -> ElementSet {
    let mut core = sets[0].clone();
    for s in &sets[1..] {
        core = core.intersection(s);
    }
    core
}

/// Returns the core if `sets` form a sunflower: every pairwise intersection equals
/// the intersection of all of them.
pub fn is_sunflower(sets: &[ElementSet]) -> Result<Option<ElementSet>, FamilyError> {
    check_distinct(sets)?;
    let core = common_intersection(sets);
    let k = core.len();
    // core ⊆ Si ∩ Sj always, so equality reduces to a size check.
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if sets[i].intersection_len(&sets[j]) != k {
                return Ok(None);
            }
        }
    }
    Ok(Some(core))
}

/// Second formulation: the petals `S \ K` are pairwise disjoint, `K` the common
/// intersection.
pub fn petals_pairwise_disjoint(sets: &[ElementSet]) -> Result<bool, FamilyError> {
    check_distinct(sets)?;
    let core = common_intersection(sets);
    let petals: Vec<ElementSet> = sets.iter().map(|s| s.difference(&core)).collect();
    Ok((0..petals.len()).all(|i| (i + 1..petals.len()).all(|j| petals[i].is_disjoint(&petals[j]))))
}

/// `r` distinct sets whose pairwise intersections all equal `core`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sunflower {
    core: ElementSet,
    #[serde(rename = "sets")]
    petal_sets: Vec<ElementSet>,
}

impl Sunflower {
    /// Certifies `sets` as a sunflower; `None` when the certificate fails.
    pub fn certify(sets: Vec<ElementSet>) -> Result<Option<Sunflower>, FamilyError> {
        let core = is_sunflower(&sets)?;
        Ok(core.map(|core| {
            debug_assert!(petals_pairwise_disjoint(&sets).unwrap());
            Sunflower {
                core,
                petal_sets: sets,
            }
        }))
    }

    pub fn core(&self) -> &ElementSet {
        &self.core
    }

    pub fn sets(&self) -> &[ElementSet] {
        &self.petal_sets
    }

    pub fn r(&self) -> usize {
        self.petal_sets.len()
    }

    pub fn petals(&self) -> Vec<ElementSet> {
        self.petal_sets
            .iter()
            .map(|s| s.difference(&self.core))
            .collect()
    }

    /// Re-checks both formulations of the certificate and membership in `family`.
    pub fn verify_in(&self, family: &SetFamily) -> bool {
        self.petal_sets.iter().all(|s| family.contains(s))
            && is_sunflower(&self.petal_sets).ok().flatten().as_ref() == Some(&self.core)
            && petals_pairwise_disjoint(&self.petal_sets).unwrap_or(false)
    }
}

/// First `r` pairwise disjoint members in canonical (lexicographic index) order.
pub fn find_r_disjoint(family: &SetFamily, r: usize) -> Option<Vec<ElementSet>> {
    fn extend(
        members: &[ElementSet],
        start: usize,
        r: usize,
        used: &ElementSet,
        chosen: &mut Vec<usize>,
    ) -> bool {
        if chosen.len() == r {
            return true;
        }
        let need = r - chosen.len();
        for i in start..members.len() {
            if members.len() - i < need {
                break;
            }
            if members[i].is_disjoint(used) {
                chosen.push(i);
                if extend(members, i + 1, r, &used.union(&members[i]), chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    let mut chosen = Vec::with_capacity(r);
    let used = ElementSet::empty(family.ground_size());
    if extend(family.members(), 0, r, &used, &mut chosen) {
        Some(
            chosen
                .into_iter()
                .map(|i| family.members()[i].clone())
                .collect(),
        )
    } else {
        None
    }
}

/// A family with a nonnegative rational weight per member.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedFamily {
    family: SetFamily,
    weights: Vec<BigRational>,
}

impl WeightedFamily {
    /// `weights[i]` belongs to `family.members()[i]`.
    pub fn new(family: SetFamily, weights: Vec<BigRational>) -> Result<Self, FamilyError> {
        if weights.len() != family.len() {
            return Err(FamilyError::WeightCount {
                weights: weights.len(),
                members: family.len(),
            });
        }
        if let Some(index) = weights.iter().position(|w| w.is_negative()) {
            return Err(FamilyError::NegativeWeight { index });
        }
        if weights.iter().all(|w| w.is_zero()) {
            return Err(FamilyError::AllWeightsZero);
        }
        Ok(WeightedFamily { family, weights })
    }

    pub fn unit(family: SetFamily) -> Result<Self, FamilyError> {
        let weights = vec![BigRational::from_integer(1.into()); family.len()];
        Self::new(family, weights)
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn total(&self) -> BigRational {
        self.weights.iter().sum()
    }

    /// `σ({F : T ⊆ F})`.
    pub fn mass_containing(&self, t: &ElementSet) -> BigRational {
        self.family
            .iter()
            .zip(&self.weights)
            .filter(|(f, _)| t.is_subset(f))
            .map(|(_, w)| w)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fam(x: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::from_lists(x, sets.iter().map(|s| s.iter().copied())).unwrap()
    }

    fn es(x: usize, e: &[usize]) -> ElementSet {
        ElementSet::from_elements(x, e.iter().copied()).unwrap()
    }

    fn triangle() -> SetFamily {
        fam(3, &[&[0, 1], &[1, 2], &[0, 2]])
    }

    #[test]
    fn profiles() {
        let disjoint = fam(6, &[&[0, 1], &[2, 3], &[4, 5]]);
        assert_eq!(intersection_profile(&disjoint).sizes, BTreeSet::from([0]));
        assert_eq!(intersection_profile(&triangle()).sizes, BTreeSet::from([1]));
        assert!(intersection_profile(&fam(3, &[&[0]])).is_empty());
    }

    #[test]
    fn l_and_d_intersecting() {
        assert!(is_l_intersecting(&triangle(), &BTreeSet::from([1])));
        assert!(!is_l_intersecting(&triangle(), &BTreeSet::from([0])));
        assert!(is_d_intersecting(&fam(6, &[&[0, 1], &[2, 3], &[4, 5]]), 0));
        assert!(!is_d_intersecting(&triangle(), 0));
        let core2 = fam(5, &[&[0, 1, 2], &[0, 1, 3], &[0, 1, 4]]);
        assert!(!is_d_intersecting(&core2, 1));
        assert!(is_d_intersecting(&core2, 2));
    }

    #[test]
    fn link_examples() {
        let f = fam(5, &[&[0, 1, 2], &[0, 1, 3], &[2, 3, 4]]);
        assert_eq!(link(&f, &es(5, &[0, 1])).to_lists(), vec![vec![2], vec![3]]);
        assert_eq!(link(&f, &ElementSet::empty(5)), f);

        let all3 =
            SetFamily::from_sets(6, ElementSet::full(6).subsets_of_size(3).collect()).unwrap();
        let l = link(&all3, &es(6, &[0]));
        assert_eq!(l.len(), 10);
        let expected: Vec<Vec<usize>> = (1..6)
            .flat_map(|a| (a + 1..6).map(move |b| vec![a, b]))
            .collect();
        assert_eq!(l.to_lists(), expected);
    }

    #[test]
    fn sunflower_examples() {
        let s = |x, v: &[&[usize]]| v.iter().map(|e| es(x, e)).collect::<Vec<_>>();
        assert_eq!(
            is_sunflower(&s(6, &[&[0, 1], &[2, 3], &[4, 5]])).unwrap(),
            Some(ElementSet::empty(6))
        );
        assert_eq!(
            is_sunflower(&s(5, &[&[0, 1, 2], &[0, 1, 3], &[0, 1, 4]])).unwrap(),
            Some(es(5, &[0, 1]))
        );
        assert_eq!(
            is_sunflower(&s(3, &[&[0, 1], &[1, 2], &[0, 2]])).unwrap(),
            None
        );
        assert_eq!(
            is_sunflower(&s(3, &[&[0, 1]])),
            Err(FamilyError::TooFewSets(1))
        );
        assert_eq!(
            is_sunflower(&s(3, &[&[0, 1], &[0, 1]])),
            Err(FamilyError::RepeatedSet(0, 1))
        );
    }

    #[test]
    fn disjoint_finder() {
        let d = fam(6, &[&[0, 1], &[2, 3], &[4, 5]]);
        assert_eq!(find_r_disjoint(&d, 3).unwrap().len(), 3);
        assert!(find_r_disjoint(&triangle(), 2).is_none());
        let pairs =
            SetFamily::from_sets(6, ElementSet::full(6).subsets_of_size(2).collect()).unwrap();
        let m = find_r_disjoint(&pairs, 3).unwrap();
        assert_eq!(
            m.iter().map(|s| s.to_vec()).collect::<Vec<_>>(),
            vec![vec![0, 1], vec![2, 3], vec![4, 5]]
        );
        assert!(find_r_disjoint(&pairs, 4).is_none());
    }

    #[test]
    fn duplicates_rejected() {
        let err = SetFamily::from_lists(4, [vec![0, 1], vec![2], vec![1, 0]]).unwrap_err();
        assert_eq!(
            err,
            FamilyError::DuplicateSet {
                index: 2,
                first: 0,
                set: "{0,1}".into()
            }
        );
    }

    #[test]
    fn weights_validated() {
        let f = triangle();
        let q = |n: i64| BigRational::from_integer(n.into());
        assert!(WeightedFamily::new(f.clone(), vec![q(1), q(0)]).is_err());
        assert_eq!(
            WeightedFamily::new(f.clone(), vec![q(0), q(-1), q(1)]),
            Err(FamilyError::NegativeWeight { index: 1 })
        );
        assert_eq!(
            WeightedFamily::new(f.clone(), vec![q(0); 3]),
            Err(FamilyError::AllWeightsZero)
        );
        let w = WeightedFamily::new(f, vec![q(1), q(2), q(3)]).unwrap();
        assert_eq!(w.total(), q(6));
        assert_eq!(
            w.mass_containing(&es(3, &[1])),
            w.weights()[0].clone() + &w.weights()[2]
        );
    }

    fn arb_sets(x: usize, max: usize) -> impl Strategy<Value = Vec<ElementSet>> {
        proptest::collection::btree_set(proptest::collection::btree_set(0..x, 0..=x), 2..=max)
            .prop_map(move |s| {
                s.into_iter()
                    .map(|e| ElementSet::from_elements(x, e).unwrap())
                    .collect()
            })
    }

    proptest! {
        #[test]
        fn sunflower_formulations_agree(sets in arb_sets(7, 5)) {
            let a = is_sunflower(&sets).unwrap().is_some();
            let b = petals_pairwise_disjoint(&sets).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn disjoint_sets_are_sunflowers(sets in arb_sets(9, 4)) {
            let fam = SetFamily::from_sets(9, sets).unwrap();
            if let Some(w) = find_r_disjoint(&fam, 2) {
                // two disjoint sets may include the empty set only once
                prop_assert_eq!(is_sunflower(&w).unwrap(), Some(ElementSet::empty(9)));
            }
        }

        #[test]
        fn link_composes(sets in arb_sets(7, 12), t in proptest::collection::btree_set(0usize..7, 0..3), u in proptest::collection::btree_set(0usize..7, 0..3)) {
            let fam = SetFamily::from_sets(7, sets).unwrap();
            let t = ElementSet::from_elements(7, t).unwrap();
            let u = ElementSet::from_elements(7, u).unwrap().difference(&t);
            prop_assert_eq!(link(&link(&fam, &t), &u), link(&fam, &t.union(&u)));
        }

        #[test]
        fn profile_matches_pairwise_recount(sets in arb_sets(8, 10)) {
            let fam = SetFamily::from_sets(8, sets).unwrap();
            let m = fam.members();
            let mut want = BTreeSet::new();
            for a in m { for b in m { if a != b { want.insert(a.to_vec().iter().filter(|e| b.contains(**e)).count()); } } }
            prop_assert_eq!(intersection_profile(&fam).sizes, want);
        }
    }
}
