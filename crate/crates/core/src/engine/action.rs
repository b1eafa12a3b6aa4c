//! The agent action space and its flat index layout.
//!
//! | indices  | action                                               |
//! |----------|------------------------------------------------------|
//! | 0        | no-op                                                |
//! | 1–4      | move up, down, left, right                           |
//! | 5–92     | trade: `5 + 22·material + 11·side + price`           |
//! | 93–94    | build alone (red, blue)                              |
//! | 95–96    | build together (red, blue)                           |
//! | 97–120   | vote for ranking `Ballot::from_index(i − 97)`        |

use crate::fiscal::Ballot;
use crate::market::Side;
use crate::types::{HouseType, Material};
use crate::world::Direction;
use serde::{Deserialize, Serialize};

pub const N_ACTIONS: usize = 121;

const MOVE_BASE: usize = 1;
const TRADE_BASE: usize = 5;
const PRICE_LEVELS: usize = 11;
const BUILD_ALONE_BASE: usize = TRADE_BASE + 4 * 2 * PRICE_LEVELS;
const BUILD_TOGETHER_BASE: usize = BUILD_ALONE_BASE + 2;
const VOTE_BASE: usize = BUILD_TOGETHER_BASE + 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    NoOp,
    Move(Direction),
    Trade { side: Side, material: Material, price: u8 },
    BuildAlone(HouseType),
    BuildTogether(HouseType),
    Vote(Ballot),
}

impl Action {
    pub fn index(&self) -> usize {
        match *self {
            Action::NoOp => 0,
            Action::Move(d) => MOVE_BASE + Direction::ALL.iter().position(|x| *x == d).expect("direction"),
            Action::Trade { side, material, price } => {
                TRADE_BASE + material.index() * 2 * PRICE_LEVELS + side.index() * PRICE_LEVELS + usize::from(price)
            }
            Action::BuildAlone(h) => BUILD_ALONE_BASE + h.index(),
            Action::BuildTogether(h) => BUILD_TOGETHER_BASE + h.index(),
            Action::Vote(b) => VOTE_BASE + b.index(),
        }
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Some(match i {
            0 => Action::NoOp,
            _ if i < TRADE_BASE => Action::Move(Direction::ALL[i - MOVE_BASE]),
            _ if i < BUILD_ALONE_BASE => {
                let k = i - TRADE_BASE;
                let material = Material::ALL[k / (2 * PRICE_LEVELS)];
                let side = if (k / PRICE_LEVELS).is_multiple_of(2) { Side::Bid } else { Side::Ask };
                Action::Trade { side, material, price: (k % PRICE_LEVELS) as u8 }
            }
            _ if i < BUILD_TOGETHER_BASE => Action::BuildAlone(HouseType::ALL[i - BUILD_ALONE_BASE]),
            _ if i < VOTE_BASE => Action::BuildTogether(HouseType::ALL[i - BUILD_TOGETHER_BASE]),
            _ if i < N_ACTIONS => Action::Vote(Ballot::from_index(i - VOTE_BASE)?),
            _ => return None,
        })
    }
}

/// Which actions an agent may take this step. No-op is always allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionMask(pub Vec<bool>);

impl ActionMask {
    pub fn all() -> Self {
        ActionMask(vec![true; N_ACTIONS])
    }

    pub fn allows(&self, a: &Action) -> bool {
        self.0[a.index()]
    }

    pub fn set(&mut self, a: &Action, allowed: bool) {
        self.0[a.index()] = allowed;
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn allowed(&self) -> impl Iterator<Item = Action> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).filter_map(|(i, _)| Action::from_index(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_layout_is_a_bijection() {
        assert_eq!(VOTE_BASE + Ballot::COUNT, N_ACTIONS);
        for i in 0..N_ACTIONS {
            let a = Action::from_index(i).unwrap();
            assert_eq!(a.index(), i);
        }
        assert_eq!(Action::from_index(N_ACTIONS), None);
    }

    #[test]
    fn action_class_counts() {
        let all: Vec<Action> = (0..N_ACTIONS).filter_map(Action::from_index).collect();
        let count = |f: fn(&Action) -> bool| all.iter().filter(|a| f(a)).count();
        assert_eq!(count(|a| matches!(a, Action::NoOp)), 1);
        assert_eq!(count(|a| matches!(a, Action::Move(_))), 4);
        assert_eq!(count(|a| matches!(a, Action::Trade { .. })), 88);
        assert_eq!(count(|a| matches!(a, Action::BuildAlone(_))), 2);
        assert_eq!(count(|a| matches!(a, Action::BuildTogether(_))), 2);
        assert_eq!(count(|a| matches!(a, Action::Vote(_))), 24);
    }
}
