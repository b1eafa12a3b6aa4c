//! Signaling-game layer: per-agent language maps, alignment, and the
//! correct-one-letter protocol used by joint builds.
//!
//! A [`LanguageMap`] names each material (in `Material` order) with one of
//! four letters. Two agents can build a house together only if they name both
//! of its recipe materials identically. When they do not, the lowest-index
//! position where their maps differ is corrected: the partner copies the
//! initiator's letter (a teacher never changes; the student copies).

use crate::error::ConfigError;
use crate::types::{AgentId, HouseType};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Letter {
    A,
    B,
    C,
    D,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
            Letter::C => 'c',
            Letter::D => 'd',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            'b' => Some(Letter::B),
            'c' => Some(Letter::C),
            'd' => Some(Letter::D),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LanguageMap(pub [Letter; 4]);

impl LanguageMap {
    /// Parses a four-letter word such as `"dabc"`.
    pub fn parse(s: &str) -> Option<LanguageMap> {
        let letters: Vec<Letter> = s.chars().map(Letter::from_char).collect::<Option<_>>()?;
        letters.try_into().ok().map(LanguageMap)
    }
}

impl fmt::Display for LanguageMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|l| write!(f, "{}", l.as_char()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Plain,
    Teacher,
    Student,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Communication,
    Teaching,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Communication => "communication",
            Variant::Teaching => "teaching",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRecord {
    pub step: u64,
    pub population_alignment: f64,
}

const COMMUNICATION_INIT: [&str; 6] = ["abcd", "dabc", "cdab", "bcda", "dcba", "badc"];
const TEACHER_INIT: &str = "abcd";
const STUDENT_INIT: [&str; 3] = ["dabc", "cdab", "bcda"];

/// Initial languages and roles, in agent-id order. In the teaching variant
/// agents 0–2 are teachers and 3–5 are students.
pub fn init_languages(variant: Variant, n_agents: usize) -> Result<Vec<(LanguageMap, Role)>, ConfigError> {
    if n_agents != 6 {
        return Err(ConfigError::new(format!(
            "the {} variant is defined for 6 agents, got {n_agents}",
            variant.name()
        )));
    }
    let parse = |s: &str| LanguageMap::parse(s).expect("static language table");
    Ok(match variant {
        Variant::Communication => COMMUNICATION_INIT.iter().map(|s| (parse(s), Role::Plain)).collect(),
        Variant::Teaching => std::iter::repeat_n((parse(TEACHER_INIT), Role::Teacher), 3)
            .chain(STUDENT_INIT.iter().map(|s| (parse(s), Role::Student)))
            .collect(),
    })
}

pub fn pair_alignment(a: &LanguageMap, b: &LanguageMap) -> u8 {
    a.0.iter().zip(&b.0).filter(|(x, y)| x == y).count() as u8
}

/// Mean pair alignment over all unordered pairs.
pub fn population_alignment(langs: &[LanguageMap]) -> f64 {
    let n = langs.len();
    assert!(n >= 2, "population alignment needs at least two agents");
    let mut total = 0u32;
    for i in 0..n {
        for j in i + 1..n {
            total += u32::from(pair_alignment(&langs[i], &langs[j]));
        }
    }
    f64::from(total) / (n * (n - 1) / 2) as f64
}

/// Symmetric matrix of pair alignments.
pub fn alignment_matrix(langs: &[LanguageMap]) -> Vec<Vec<u8>> {
    langs.iter().map(|a| langs.iter().map(|b| pair_alignment(a, b)).collect()).collect()
}

/// May `initiator` start a joint build with `partner` under these roles?
pub fn may_pair(variant: Variant, initiator: Role, partner: Role) -> bool {
    match variant {
        Variant::Communication => initiator == Role::Plain && partner == Role::Plain,
        Variant::Teaching => initiator == Role::Teacher && partner == Role::Student,
    }
}

/// Partner for a joint build started by `initiator`: the eligible agent whose
/// language agrees least with the initiator's, ties to the lowest id.
pub fn select_partner(variant: Variant, initiator: AgentId, langs: &[LanguageMap], roles: &[Role]) -> Option<AgentId> {
    (0..langs.len())
        .filter(|&j| j != initiator && may_pair(variant, roles[initiator], roles[j]))
        .min_by_key(|&j| (pair_alignment(&langs[initiator], &langs[j]), j))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalOutcome {
    /// Both agents name the house's recipe materials identically.
    Success,
    /// The maps disagreed on the recipe; the partner's letter at `position`
    /// was overwritten with the initiator's.
    Corrected { position: usize },
}

/// Signaling step of a joint build. On disagreement over either recipe
/// material, corrects the lowest misaligned index over all four letters.
/// Only `partner` is ever modified.
pub fn attempt_joint_build(initiator: &LanguageMap, partner: &mut LanguageMap, house: HouseType) -> SignalOutcome {
    let aligned_on_recipe = house.recipe().iter().all(|m| initiator.0[m.index()] == partner.0[m.index()]);
    if aligned_on_recipe {
        return SignalOutcome::Success;
    }
    let position = (0..4)
        .find(|&k| initiator.0[k] != partner.0[k])
        .expect("recipe misalignment implies some misaligned index");
    partner.0[position] = initiator.0[position];
    SignalOutcome::Corrected { position }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lm(s: &str) -> LanguageMap {
        LanguageMap::parse(s).unwrap()
    }

    /// Brute-force oracle: average positionwise matches over all 15 pairs.
    fn brute_population(words: &[&str]) -> f64 {
        let mut sum = 0usize;
        let mut pairs = 0usize;
        for (i, a) in words.iter().enumerate() {
            for b in &words[i + 1..] {
                sum += a.chars().zip(b.chars()).filter(|(x, y)| x == y).count();
                pairs += 1;
            }
        }
        sum as f64 / pairs as f64
    }

    #[test]
    fn communication_init_is_the_listed_permutations() {
        let got: Vec<String> = init_languages(Variant::Communication, 6)
            .unwrap()
            .iter()
            .map(|(l, r)| {
                assert_eq!(*r, Role::Plain);
                l.to_string()
            })
            .collect();
        assert_eq!(got, COMMUNICATION_INIT);
    }

    #[test]
    fn teaching_init_roles_and_fixed_teachers() {
        let init = init_languages(Variant::Teaching, 6).unwrap();
        let roles: Vec<Role> = init.iter().map(|x| x.1).collect();
        assert_eq!(roles, [Role::Teacher, Role::Teacher, Role::Teacher, Role::Student, Role::Student, Role::Student]);
        assert!(init[..3].iter().all(|(l, _)| *l == lm("abcd")));
    }

    #[test]
    fn wrong_agent_count_is_rejected() {
        assert!(init_languages(Variant::Teaching, 4).is_err());
        assert!(init_languages(Variant::Communication, 7).is_err());
    }

    #[test]
    fn pair_alignment_examples() {
        assert_eq!(pair_alignment(&lm("abcd"), &lm("abcd")), 4);
        assert_eq!(pair_alignment(&lm("abcd"), &lm("dabc")), 0);
        assert_eq!(pair_alignment(&lm("dabc"), &lm("dcba")), 2);
    }

    #[test]
    fn initial_population_alignment_matches_brute_force() {
        let comm: Vec<LanguageMap> = COMMUNICATION_INIT.iter().map(|s| lm(s)).collect();
        assert_eq!(brute_population(&COMMUNICATION_INIT), 8.0 / 15.0);
        assert_eq!(population_alignment(&comm), 8.0 / 15.0);

        let words = ["abcd", "abcd", "abcd", "dabc", "cdab", "bcda"];
        let teach: Vec<LanguageMap> = words.iter().map(|s| lm(s)).collect();
        assert_eq!(brute_population(&words), 12.0 / 15.0);
        assert_eq!(population_alignment(&teach), 0.8);
        assert_eq!(population_alignment(&[lm("cbad"); 6]), 4.0);
    }

    #[test]
    fn teaching_correction_example() {
        let teacher = lm("abcd");
        let mut student = lm("dabc");
        assert_eq!(attempt_joint_build(&teacher, &mut student, HouseType::Red), SignalOutcome::Corrected { position: 0 });
        assert_eq!(student, lm("aabc"));
        let mut same = lm("abcd");
        assert_eq!(attempt_joint_build(&teacher, &mut same, HouseType::Blue), SignalOutcome::Success);
    }

    #[test]
    fn success_needs_only_the_recipe_letters() {
        let mut partner = lm("abdc");
        assert_eq!(attempt_joint_build(&lm("abcd"), &mut partner, HouseType::Red), SignalOutcome::Success);
        assert_eq!(partner, lm("abdc"));
    }

    #[test]
    fn teacher_student_converges_within_four_corrections() {
        // Exhaustive over all 24 permutations and both house-type choices.
        let teacher = lm("abcd");
        let perms = all_permutations();
        for start in &perms {
            for house_first in HouseType::ALL {
                let mut student = *start;
                let mut corrections = 0;
                let mut house = house_first;
                while student != teacher {
                    let before = pair_alignment(&teacher, &student);
                    match attempt_joint_build(&teacher, &mut student, house) {
                        SignalOutcome::Corrected { .. } => {
                            corrections += 1;
                            assert_eq!(pair_alignment(&teacher, &student), before + 1);
                        }
                        SignalOutcome::Success => {
                            house = if house == HouseType::Red { HouseType::Blue } else { HouseType::Red };
                        }
                    }
                }
                assert!(corrections <= 4);
                assert_eq!(corrections, 4 - pair_alignment(&teacher, start));
            }
        }
    }

    fn all_permutations() -> Vec<LanguageMap> {
        let letters = [Letter::A, Letter::B, Letter::C, Letter::D];
        let mut out = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let idx = [a, b, c, d];
                        let mut seen = [false; 4];
                        if idx.iter().all(|&i| !std::mem::replace(&mut seen[i], true)) {
                            out.push(LanguageMap(idx.map(|i| letters[i])));
                        }
                    }
                }
            }
        }
        assert_eq!(out.len(), 24);
        out
    }

    #[test]
    fn partner_selection_prefers_least_aligned() {
        let init = init_languages(Variant::Teaching, 6).unwrap();
        let (mut langs, roles): (Vec<_>, Vec<_>) = init.into_iter().unzip();
        assert_eq!(select_partner(Variant::Teaching, 0, &langs, &roles), Some(3));
        assert_eq!(select_partner(Variant::Teaching, 3, &langs, &roles), None);
        langs[3] = lm("abcc");
        assert_eq!(select_partner(Variant::Teaching, 1, &langs, &roles), Some(4));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_map() -> impl Strategy<Value = LanguageMap> {
            prop::array::uniform4(0usize..4).prop_map(|a| LanguageMap(a.map(|i| [Letter::A, Letter::B, Letter::C, Letter::D][i])))
        }

        proptest! {
            #[test]
            fn pair_alignment_symmetric_and_bounded(a in any_map(), b in any_map()) {
                prop_assert_eq!(pair_alignment(&a, &b), pair_alignment(&b, &a));
                prop_assert!(pair_alignment(&a, &b) <= 4);
                prop_assert_eq!(pair_alignment(&a, &a), 4);
            }

            #[test]
            fn correction_raises_pair_alignment_by_one(a in any_map(), b in any_map(), blue in any::<bool>()) {
                let house = if blue { HouseType::Blue } else { HouseType::Red };
                let mut partner = b;
                let before = pair_alignment(&a, &b);
                match attempt_joint_build(&a, &mut partner, house) {
                    SignalOutcome::Corrected { position } => {
                        prop_assert_eq!(pair_alignment(&a, &partner), before + 1);
                        prop_assert!((0..position).all(|k| a.0[k] == b.0[k]));
                    }
                    SignalOutcome::Success => prop_assert_eq!(partner, b),
                }
            }
        }
    }
}
