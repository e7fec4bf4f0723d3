//! Factoradic gait encoding.
//!
//! A gait is a permutation of the functional legs: the i-th leg of the
//! permutation is driven with duty rank i. Permutations of an n-element
//! ground set are put in 1-1 correspondence with the integers `1..=n!`
//! through their lexicographic rank, computed from the Lehmer code
//! (the mixed-radix digits of the factorial number system).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of legs on the hexapod.
pub const LEG_COUNT: usize = 6;

/// Leg label, `1..=6`.
pub type Leg = u8;

const ALL_LEGS: [Leg; LEG_COUNT] = [1, 2, 3, 4, 5, 6];

/// `n!` for `n <= 20`.
pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn check_leg(leg: Leg) -> Result<Leg> {
    if (1..=LEG_COUNT as Leg).contains(&leg) {
        Ok(leg)
    } else {
        Err(Error::InvalidLeg(leg))
    }
}

/// Which leg (if any) has failed.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct FailureScenario {
    failed_leg: Option<Leg>,
}

impl FailureScenario {
    pub const INTACT: FailureScenario = FailureScenario { failed_leg: None };

    pub fn failed(leg: Leg) -> Result<Self> {
        Ok(FailureScenario {
            failed_leg: Some(check_leg(leg)?),
        })
    }

    pub fn failed_leg(&self) -> Option<Leg> {
        self.failed_leg
    }

    /// The six single-leg failure scenarios, leg 1 first.
    pub fn single_failures() -> impl Iterator<Item = FailureScenario> {
        ALL_LEGS.into_iter().map(|leg| FailureScenario {
            failed_leg: Some(leg),
        })
    }

    /// Functional legs in ascending order.
    pub fn functional_legs(&self) -> Vec<Leg> {
        ALL_LEGS
            .into_iter()
            .filter(|&leg| Some(leg) != self.failed_leg)
            .collect()
    }

    /// Short label used in file names: `leg3` or `none`.
    pub fn label(&self) -> String {
        match self.failed_leg {
            Some(leg) => format!("leg{leg}"),
            None => "none".to_string(),
        }
    }
}

impl fmt::Display for FailureScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.failed_leg {
            Some(leg) => write!(f, "{leg}"),
            None => f.write_str("none"),
        }
    }
}

impl FromStr for FailureScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(FailureScenario::INTACT);
        }
        let leg: u32 = s.strip_prefix("leg").unwrap_or(s).parse().map_err(|_| {
            Error::config(format!(
                "invalid failure scenario {s:?}: expected 1..=6 or none"
            ))
        })?;
        let leg = Leg::try_from(leg)
            .map_err(|_| Error::config(format!("invalid leg {leg}: legs are numbered 1..=6")))?;
        FailureScenario::failed(leg)
    }
}

/// Functional legs (ascending) and the size of the gait space over them.
pub fn reduced_space(scenario: FailureScenario) -> (Vec<Leg>, usize) {
    let legs = scenario.functional_legs();
    let size = factorial(legs.len());
    (legs, size)
}

/// 1-based position of a permutation in the lexicographic order of its
/// ground set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GaitIndex {
    value: usize,
    space_size: usize,
}

impl GaitIndex {
    pub fn new(value: usize, space_size: usize) -> Result<Self> {
        if value == 0 || value > space_size {
            return Err(Error::OutOfRange { value, space_size });
        }
        Ok(GaitIndex { value, space_size })
    }

    pub fn value(&self) -> usize {
        self.value
    }

    pub fn space_size(&self) -> usize {
        self.space_size
    }
}

impl fmt::Display for GaitIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// An ordering of distinct legs drawn from a declared ground set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    elements: Vec<Leg>,
    ground_set: Vec<Leg>,
}

impl Permutation {
    /// Validates `elements` as an arrangement of exactly `ground_set`.
    pub fn new(elements: Vec<Leg>, ground_set: &[Leg]) -> Result<Self> {
        let mut ground: Vec<Leg> = ground_set.to_vec();
        ground.sort_unstable();
        if ground.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPermutation(format!(
                "ground set {ground:?} has duplicates"
            )));
        }
        if ground.is_empty() || ground.len() > LEG_COUNT {
            return Err(Error::InvalidPermutation(format!(
                "ground set must have 1..={LEG_COUNT} elements, got {}",
                ground.len()
            )));
        }
        if elements.len() != ground.len() {
            return Err(Error::InvalidPermutation(format!(
                "expected {} elements, got {}",
                ground.len(),
                elements.len()
            )));
        }
        let mut seen = vec![false; ground.len()];
        for &e in &elements {
            let Ok(slot) = ground.binary_search(&e) else {
                return Err(Error::InvalidPermutation(format!(
                    "{e} is not in the ground set {ground:?}"
                )));
            };
            if std::mem::replace(&mut seen[slot], true) {
                return Err(Error::InvalidPermutation(format!(
                    "{e} appears more than once"
                )));
            }
        }
        Ok(Permutation {
            elements,
            ground_set: ground,
        })
    }

    /// A permutation over the set of its own elements.
    pub fn from_elements(elements: Vec<Leg>) -> Result<Self> {
        let ground = elements.clone();
        Permutation::new(elements, &ground)
    }

    pub fn elements(&self) -> &[Leg] {
        &self.elements
    }

    /// Ground set, ascending.
    pub fn ground_set(&self) -> &[Leg] {
        &self.ground_set
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Lehmer code: digit i counts the later elements smaller than element i.
fn lehmer_code(perm: &Permutation) -> Vec<usize> {
    let e = perm.elements();
    (0..e.len())
        .map(|i| e[i + 1..].iter().filter(|&&later| later < e[i]).count())
        .collect()
}

pub fn rank(perm: &Permutation) -> GaitIndex {
    let n = perm.len();
    let zero_based: usize = lehmer_code(perm)
        .into_iter()
        .enumerate()
        .map(|(i, digit)| digit * factorial(n - 1 - i))
        .sum();
    GaitIndex {
        value: zero_based + 1,
        space_size: factorial(n),
    }
}

pub fn unrank(index: usize, ground_set: &[Leg]) -> Result<Permutation> {
    let mut remaining = ground_set.to_vec();
    remaining.sort_unstable();
    let n = remaining.len();
    let space_size = factorial(n);
    let index = GaitIndex::new(index, space_size)?;

    let mut rest = index.value - 1;
    let mut elements = Vec::with_capacity(n);
    for i in 0..n {
        let radix = factorial(n - 1 - i);
        let digit = rest / radix;
        rest %= radix;
        elements.push(remaining.remove(digit));
    }
    Permutation::new(elements, ground_set)
}

/// Duty rank of every leg; the failed leg carries none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaitAssignment {
    ranks: [Option<u8>; LEG_COUNT],
}

impl GaitAssignment {
    /// Leg `perm[i]` receives duty rank `i + 1`.
    pub fn from_permutation(perm: &Permutation) -> Self {
        let mut ranks = [None; LEG_COUNT];
        for (i, &leg) in perm.elements().iter().enumerate() {
            ranks[leg as usize - 1] = Some(i as u8 + 1);
        }
        GaitAssignment { ranks }
    }

    /// Builds an assignment from explicit `(leg, rank)` pairs. The ranks
    /// must be exactly `1..=m` for m pairs.
    pub fn from_ranks(pairs: &[(Leg, u8)]) -> Result<Self> {
        let mut order = vec![0 as Leg; pairs.len()];
        for &(leg, r) in pairs {
            check_leg(leg)?;
            let slot = (r as usize)
                .checked_sub(1)
                .filter(|&s| s < pairs.len())
                .ok_or_else(|| {
                    Error::InvalidPermutation(format!("rank {r} outside 1..={}", pairs.len()))
                })?;
            if order[slot] != 0 {
                return Err(Error::InvalidPermutation(format!(
                    "rank {r} assigned twice"
                )));
            }
            order[slot] = leg;
        }
        Ok(GaitAssignment::from_permutation(
            &Permutation::from_elements(order)?,
        ))
    }

    pub fn rank_of(&self, leg: Leg) -> Option<u8> {
        self.ranks.get(leg as usize - 1).copied().flatten()
    }

    /// `(leg, rank)` for each ranked leg, ascending by leg.
    pub fn ranked_legs(&self) -> impl Iterator<Item = (Leg, u8)> + '_ {
        self.ranks
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|r| (i as Leg + 1, r)))
    }

    /// Legs ordered by duty rank.
    pub fn to_permutation(&self) -> Permutation {
        let mut pairs: Vec<(Leg, u8)> = self.ranked_legs().collect();
        pairs.sort_by_key(|&(_, r)| r);
        let elements: Vec<Leg> = pairs.into_iter().map(|(leg, _)| leg).collect();
        Permutation::from_elements(elements).expect("assignment ranks are a permutation")
    }

    pub fn index(&self) -> GaitIndex {
        rank(&self.to_permutation())
    }

    /// True when exactly the scenario's functional legs are ranked.
    pub fn is_consistent_with(&self, scenario: FailureScenario) -> bool {
        let ranked: Vec<Leg> = self.ranked_legs().map(|(leg, _)| leg).collect();
        ranked == scenario.functional_legs()
    }
}

pub fn to_assignment(index: usize, scenario: FailureScenario) -> Result<GaitAssignment> {
    let (legs, _) = reduced_space(scenario);
    let perm = unrank(index, &legs)?;
    Ok(GaitAssignment::from_permutation(&perm))
}

/// Every gait index of the scenario's space, ascending.
pub fn enumerate_indices(scenario: FailureScenario) -> impl Iterator<Item = GaitIndex> {
    let (_, size) = reduced_space(scenario);
    (1..=size).map(move |value| GaitIndex {
        value,
        space_size: size,
    })
}

/// Parses a comma-separated leg list such as `5,1,2,4,3,6`.
pub fn parse_legs(s: &str) -> Result<Vec<Leg>> {
    s.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<Leg>()
                .map_err(|_| Error::InvalidPermutation(format!("{part:?} is not a leg label")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Lexicographic successor; independent of the factoradic route.
    fn next_permutation(v: &mut [Leg]) -> bool {
        let Some(i) = (0..v.len().saturating_sub(1))
            .rev()
            .find(|&i| v[i] < v[i + 1])
        else {
            return false;
        };
        let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).unwrap();
        v.swap(i, j);
        v[i + 1..].reverse();
        true
    }

    fn brute_force_order(ground: &[Leg]) -> Vec<Vec<Leg>> {
        let mut cur = ground.to_vec();
        cur.sort_unstable();
        let mut all = vec![cur.clone()];
        while next_permutation(&mut cur) {
            all.push(cur.clone());
        }
        all
    }

    fn perm(e: &[Leg]) -> Permutation {
        Permutation::from_elements(e.to_vec()).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&perm(&[1, 2, 3, 4, 5, 6])).value(), 1);
        assert_eq!(rank(&perm(&[6, 5, 4, 3, 2, 1])).value(), 720);
        assert_eq!(rank(&perm(&[1, 2, 3, 4, 6, 5])).value(), 2);
    }

    #[test]
    fn derived_examples_match_brute_force_order() {
        let full = brute_force_order(&[1, 2, 3, 4, 5, 6]);
        assert_eq!(full.len(), 720);
        assert_eq!(full[1], vec![1, 2, 3, 4, 6, 5]);
        let reduced = brute_force_order(&[2, 3, 4, 5, 6]);
        assert_eq!(reduced.len(), 120);
        assert_eq!(reduced[1], vec![2, 3, 4, 6, 5]);
    }

    #[test]
    fn unrank_examples() {
        assert_eq!(
            unrank(1, &[1, 2, 3, 4, 5, 6]).unwrap().elements(),
            &[1, 2, 3, 4, 5, 6]
        );
        assert_eq!(
            unrank(120, &[2, 3, 4, 5, 6]).unwrap().elements(),
            &[6, 5, 4, 3, 2]
        );
        assert_eq!(
            unrank(2, &[2, 3, 4, 5, 6]).unwrap().elements(),
            &[2, 3, 4, 6, 5]
        );
    }

    #[test]
    fn unrank_sorts_ground_set() {
        assert_eq!(
            unrank(1, &[6, 2, 4, 3, 5]).unwrap().elements(),
            &[2, 3, 4, 5, 6]
        );
    }

    #[test]
    fn unrank_out_of_range() {
        assert!(matches!(
            unrank(0, &[2, 3, 4, 5, 6]),
            Err(Error::OutOfRange {
                value: 0,
                space_size: 120
            })
        ));
        assert!(matches!(
            unrank(121, &[2, 3, 4, 5, 6]),
            Err(Error::OutOfRange { .. })
        ));
        assert!(unrank(720, &[1, 2, 3, 4, 5, 6]).is_ok());
    }

    #[test]
    fn invalid_permutations_rejected() {
        let ground = [1, 2, 3, 4, 5, 6];
        assert!(matches!(
            Permutation::new(vec![1, 1, 3, 4, 5, 6], &ground),
            Err(Error::InvalidPermutation(_))
        ));
        assert!(matches!(
            Permutation::new(vec![1, 2, 3, 4, 5, 7], &ground),
            Err(Error::InvalidPermutation(_))
        ));
        assert!(Permutation::new(vec![1, 2, 3], &ground).is_err());
        assert!(Permutation::new(vec![1, 2, 3, 4, 5], &[2, 3, 4, 5, 6]).is_err());
    }

    #[test]
    fn reduced_space_examples() {
        let f1 = FailureScenario::failed(1).unwrap();
        assert_eq!(reduced_space(f1), (vec![2, 3, 4, 5, 6], 120));
        assert_eq!(
            reduced_space(FailureScenario::INTACT),
            (vec![1, 2, 3, 4, 5, 6], 720)
        );
        let f6 = FailureScenario::failed(6).unwrap();
        assert_eq!(reduced_space(f6), (vec![1, 2, 3, 4, 5], 120));
    }

    #[test]
    fn assignment_examples() {
        let f1 = FailureScenario::failed(1).unwrap();
        let a = to_assignment(1, f1).unwrap();
        assert_eq!(
            a.ranked_legs().collect::<Vec<_>>(),
            vec![(2, 1), (3, 2), (4, 3), (5, 4), (6, 5)]
        );
        assert_eq!(a.rank_of(1), None);

        let a = to_assignment(120, f1).unwrap();
        assert_eq!(
            a.ranked_legs().collect::<Vec<_>>(),
            vec![(2, 5), (3, 4), (4, 3), (5, 2), (6, 1)]
        );

        let a = to_assignment(1, FailureScenario::INTACT).unwrap();
        assert!((1..=6).all(|leg| a.rank_of(leg) == Some(leg)));
        assert!(to_assignment(121, f1).is_err());
    }

    #[test]
    fn assignment_round_trips_through_index() {
        for scenario in FailureScenario::single_failures() {
            for idx in enumerate_indices(scenario) {
                let a = to_assignment(idx.value(), scenario).unwrap();
                assert!(a.is_consistent_with(scenario));
                assert_eq!(a.index(), idx);
            }
        }
    }

    #[test]
    fn from_ranks_validates() {
        assert!(GaitAssignment::from_ranks(&[(2, 1), (3, 1)]).is_err());
        assert!(GaitAssignment::from_ranks(&[(2, 1), (3, 3)]).is_err());
        let a = GaitAssignment::from_ranks(&[(5, 2), (3, 1)]).unwrap();
        assert_eq!(a.to_permutation().elements(), &[3, 5]);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(
            enumerate_indices(FailureScenario::failed(2).unwrap()).count(),
            120
        );
        let all: Vec<_> = enumerate_indices(FailureScenario::INTACT)
            .map(|i| i.value())
            .collect();
        assert_eq!(all, (1..=720).collect::<Vec<_>>());
    }

    #[test]
    fn exhaustive_against_brute_force() {
        for ground in [
            vec![1, 2, 3, 4, 5, 6],
            vec![1, 3, 4, 5, 6],
            vec![2, 5],
            vec![4],
        ] {
            for (k, expected) in brute_force_order(&ground).into_iter().enumerate() {
                let p = unrank(k + 1, &ground).unwrap();
                assert_eq!(p.elements(), &expected[..]);
                assert_eq!(rank(&p).value(), k + 1);
            }
        }
    }

    #[test]
    fn scenario_parsing() {
        assert_eq!(
            "none".parse::<FailureScenario>().unwrap(),
            FailureScenario::INTACT
        );
        assert_eq!(
            "3".parse::<FailureScenario>().unwrap().failed_leg(),
            Some(3)
        );
        assert_eq!(
            "leg5".parse::<FailureScenario>().unwrap().failed_leg(),
            Some(5)
        );
        assert!("7".parse::<FailureScenario>().is_err());
        assert!("0".parse::<FailureScenario>().is_err());
        assert!("x".parse::<FailureScenario>().is_err());
    }

    #[test]
    fn parse_leg_lists() {
        assert_eq!(parse_legs("5,1,2,4,3,6").unwrap(), vec![5, 1, 2, 4, 3, 6]);
        assert!(parse_legs("1,,2").is_err());
        assert!(parse_legs("a").is_err());
    }
}
