//! Shared domain vocabulary: materials, house recipes, fixed-point coins and
//! per-agent inventories.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

/// Agent identifier; agents are numbered `0..n_agents`.
pub type AgentId = usize;

/// The four building materials, in their fixed canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Material {
    Wood,
    Stone,
    Iron,
    Soil,
}

impl Material {
    pub const ALL: [Material; 4] = [Material::Wood, Material::Stone, Material::Iron, Material::Soil];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Material> {
        Material::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Material::Wood => "wood",
            Material::Stone => "stone",
            Material::Iron => "iron",
            Material::Soil => "soil",
        }
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// House types. Red houses take wood and stone, blue houses iron and soil.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HouseType {
    Red,
    Blue,
}

impl HouseType {
    pub const ALL: [HouseType; 2] = [HouseType::Red, HouseType::Blue];

    pub fn recipe(self) -> [Material; 2] {
        match self {
            HouseType::Red => [Material::Wood, Material::Stone],
            HouseType::Blue => [Material::Iron, Material::Soil],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Coin amount in fixed point: one coin is [`Coins::SCALE`] units.
///
/// Integer storage keeps total coin exactly conserved through taxation and
/// redistribution, where fractional tax amounts are common.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coins(pub i64);

impl Coins {
    pub const SCALE: i64 = 1000;
    pub const ZERO: Coins = Coins(0);

    pub fn whole(c: i64) -> Coins {
        Coins(c * Self::SCALE)
    }

    /// Nearest fixed-point value to a real coin amount (ties away from zero).
    pub fn from_f64(c: f64) -> Coins {
        Coins((c * Self::SCALE as f64).round() as i64)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / Self::SCALE as f64
    }

    pub fn units(self) -> i64 {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl Add for Coins {
    type Output = Coins;
    fn add(self, rhs: Coins) -> Coins {
        Coins(self.0 + rhs.0)
    }
}

impl AddAssign for Coins {
    fn add_assign(&mut self, rhs: Coins) {
        self.0 += rhs.0;
    }
}

impl Sub for Coins {
    type Output = Coins;
    fn sub(self, rhs: Coins) -> Coins {
        Coins(self.0 - rhs.0)
    }
}

impl SubAssign for Coins {
    fn sub_assign(&mut self, rhs: Coins) {
        self.0 -= rhs.0;
    }
}

impl Neg for Coins {
    type Output = Coins;
    fn neg(self) -> Coins {
        Coins(-self.0)
    }
}

impl std::iter::Sum for Coins {
    fn sum<I: Iterator<Item = Coins>>(iter: I) -> Coins {
        Coins(iter.map(|c| c.0).sum())
    }
}

impl fmt::Display for Coins {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// Holdings of one agent. Escrowed amounts belong to the agent but are
/// locked behind open market orders.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inventory {
    pub coin: Coins,
    pub escrow_coin: Coins,
    pub units: [u32; 4],
    pub escrow_units: [u32; 4],
}

impl Inventory {
    pub fn with_coin(coin: Coins) -> Self {
        Inventory { coin, ..Default::default() }
    }

    /// Free plus escrowed coin: the endowment used for income, utility and metrics.
    pub fn total_coin(&self) -> Coins {
        self.coin + self.escrow_coin
    }

    pub fn units_of(&self, m: Material) -> u32 {
        self.units[m.index()]
    }

    pub fn total_units(&self, m: Material) -> u32 {
        self.units[m.index()] + self.escrow_units[m.index()]
    }
}
