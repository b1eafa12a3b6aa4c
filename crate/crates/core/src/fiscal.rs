//! Taxation, redistribution, voting and investment of tax revenue into
//! regeneration rates.

use crate::error::ConfigError;
use crate::types::{Coins, Material};
use serde::{Deserialize, Serialize};

/// Bracketed marginal tax schedule.
///
/// `cutoffs` holds `b_1 = 0 < b_2 < … < b_B`; the last bracket is open
/// (`b_{B+1} = +∞`). `rates[j]` applies to income inside bracket `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaxSchedule {
    pub cutoffs: Vec<f64>,
    pub rates: Vec<f64>,
}

pub const DEFAULT_CUTOFFS: [f64; 7] = [0.0, 10.0, 25.0, 50.0, 100.0, 200.0, 400.0];

impl TaxSchedule {
    pub fn new(cutoffs: Vec<f64>, rates: Vec<f64>) -> Result<Self, ConfigError> {
        let s = TaxSchedule { cutoffs, rates };
        s.validate()?;
        Ok(s)
    }

    pub fn flat(cutoffs: &[f64], rate: f64) -> Result<Self, ConfigError> {
        Self::new(cutoffs.to_vec(), vec![rate; cutoffs.len()])
    }

    pub fn brackets(&self) -> usize {
        self.rates.len()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.cutoffs.is_empty() || self.cutoffs[0] != 0.0 {
            return Err(ConfigError::new("tax cutoffs must start at 0"));
        }
        if self.cutoffs.windows(2).any(|w| !(w[0] < w[1])) || self.cutoffs.iter().any(|c| !c.is_finite()) {
            return Err(ConfigError::new("tax cutoffs must be finite and strictly ascending"));
        }
        if self.rates.len() != self.cutoffs.len() {
            return Err(ConfigError::new(format!(
                "{} cutoffs need {} rates, got {}",
                self.cutoffs.len(),
                self.cutoffs.len(),
                self.rates.len()
            )));
        }
        if self.rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(ConfigError::new("tax rates must lie in [0, 1]"));
        }
        Ok(())
    }

    fn upper(&self, j: usize) -> f64 {
        self.cutoffs.get(j + 1).copied().unwrap_or(f64::INFINITY)
    }

    /// Marginal rate at income `z`: the rate of the bracket with `b_j < z ≤ b_{j+1}`.
    pub fn marginal_rate(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return self.rates[0];
        }
        (0..self.brackets()).find(|&j| z <= self.upper(j)).map_or(0.0, |j| self.rates[j])
    }

    /// Payable tax `T(z)`: each rate applied to the part of `z` inside its bracket.
    pub fn tax(&self, z: f64) -> f64 {
        let mut t = 0.0;
        for (j, &rate) in self.rates.iter().enumerate() {
            let (lo, hi) = (self.cutoffs[j], self.upper(j));
            if z > hi {
                t += rate * (hi - lo);
            } else if z > lo {
                t += rate * (z - lo);
            }
        }
        t
    }
}

/// Tax owed on income `z`; non-positive income owes nothing.
pub fn compute_tax(z: f64, schedule: &TaxSchedule) -> f64 {
    schedule.tax(z)
}

/// The discrete rate grid `{0, 1/(n-1), …, 1}`; `n = 21` gives steps of 0.05.
pub fn rate_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

/// What happens to collected tax.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevenueMode {
    /// Revenue is returned in equal shares; investment is a rate signal only.
    #[default]
    Redistribute,
    /// Revenue is spent on investment and leaves the economy.
    Sink,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaxPeriodOutcome {
    pub incomes: Vec<Coins>,
    pub taxes: Vec<Coins>,
    pub shares: Vec<Coins>,
    pub deltas: Vec<Coins>,
    pub revenue: Coins,
}

/// Taxes each pretax income and, in redistribution mode, returns the revenue
/// in equal shares. Shares are exact in fixed point: the remainder of
/// `revenue / N` goes one unit each to the lowest agent ids, so the deltas
/// sum to exactly zero.
pub fn settle_period(incomes: &[Coins], schedule: &TaxSchedule, mode: RevenueMode) -> TaxPeriodOutcome {
    let n = incomes.len() as i64;
    let taxes: Vec<Coins> = incomes
        .iter()
        .map(|&z| {
            if z.0 <= 0 {
                Coins::ZERO
            } else {
                Coins::from_f64(schedule.tax(z.to_f64())).clamp(Coins::ZERO, z)
            }
        })
        .collect();
    let revenue: Coins = taxes.iter().copied().sum();
    let shares: Vec<Coins> = match mode {
        RevenueMode::Redistribute if n > 0 => {
            let (base, rem) = (revenue.0 / n, revenue.0 % n);
            (0..n).map(|i| Coins(base + i64::from(i < rem))).collect()
        }
        _ => vec![Coins::ZERO; incomes.len()],
    };
    let deltas = taxes.iter().zip(&shares).map(|(&t, &s)| s - t).collect();
    TaxPeriodOutcome { incomes: incomes.to_vec(), taxes, shares, deltas, revenue }
}

/// A ranking of the four materials, most preferred first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ballot(pub [Material; 4]);

impl Ballot {
    pub const COUNT: usize = 24;

    /// All 24 rankings in lexicographic order of material indices.
    pub fn all() -> Vec<Ballot> {
        let mut out = Vec::with_capacity(24);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let idx = [a, b, c, d];
                        if (0..4).all(|k| idx.contains(&k)) {
                            out.push(Ballot(idx.map(|i| Material::ALL[i])));
                        }
                    }
                }
            }
        }
        out
    }

    /// Inverse of [`Ballot::index`], decoding the factorial-base digits.
    pub fn from_index(i: usize) -> Option<Ballot> {
        if i >= Self::COUNT {
            return None;
        }
        let mut pool: Vec<Material> = Material::ALL.to_vec();
        let mut rest = i;
        let mut out = [Material::Wood; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            let f = FACTORIAL[3 - k];
            *slot = pool.remove(rest / f);
            rest %= f;
        }
        Some(Ballot(out))
    }

    /// Lexicographic rank (Lehmer code) of the permutation.
    pub fn index(&self) -> usize {
        let idx = self.0.map(Material::index);
        (0..4).map(|k| idx[k + 1..].iter().filter(|&&x| x < idx[k]).count() * FACTORIAL[3 - k]).sum()
    }

    /// Rank position (0 = first) of each material.
    pub fn positions(&self) -> [usize; 4] {
        let mut pos = [0; 4];
        for (r, m) in self.0.iter().enumerate() {
            pos[m.index()] = r;
        }
        pos
    }

    /// Investment weights: Borda points `(3, 2, 1, 0)` normalised by 6.
    pub fn weights(&self) -> [f64; 4] {
        self.positions().map(|r| (3 - r) as f64 / 6.0)
    }

    pub fn is_permutation(&self) -> bool {
        Material::ALL.iter().all(|m| self.0.contains(m))
    }
}

const FACTORIAL: [usize; 4] = [1, 1, 2, 6];

pub const UNIFORM_WEIGHTS: [f64; 4] = [0.25; 4];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BordaResult {
    pub scores: [u32; 4],
    pub ranking: Ballot,
}

/// Borda count: each ballot gives 3, 2, 1, 0 points to its 1st–4th choices.
/// Equal scores are ordered wood < stone < iron < soil.
pub fn borda_count(ballots: &[Ballot]) -> BordaResult {
    let mut scores = [0u32; 4];
    for b in ballots {
        for (r, m) in b.0.iter().enumerate() {
            scores[m.index()] += 3 - r as u32;
        }
    }
    let mut order = Material::ALL;
    order.sort_by_key(|m| (std::cmp::Reverse(scores[m.index()]), m.index()));
    BordaResult { scores, ranking: Ballot(order) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoverningSystem {
    FullLibertarian,
    SemiLibertarianUtilitarian,
    FullUtilitarian,
}

impl GoverningSystem {
    pub const ALL: [GoverningSystem; 3] = [
        GoverningSystem::FullLibertarian,
        GoverningSystem::SemiLibertarianUtilitarian,
        GoverningSystem::FullUtilitarian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GoverningSystem::FullLibertarian => "full_libertarian",
            GoverningSystem::SemiLibertarianUtilitarian => "semi_libertarian_utilitarian",
            GoverningSystem::FullUtilitarian => "full_utilitarian",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvestParams {
    /// Regeneration-probability increase per invested coin.
    pub kappa: f64,
    /// Ceiling on any material's regeneration probability.
    pub regen_max: f64,
}

impl Default for InvestParams {
    fn default() -> Self {
        InvestParams { kappa: 0.005, regen_max: 0.2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Investment {
    /// Coins directed at each material.
    pub coins: [f64; 4],
    /// `kappa · coins`, before clipping.
    pub raw_deltas: [f64; 4],
    /// Increases actually applied, keeping every rate within `[0, regen_max]`.
    pub deltas: [f64; 4],
}

/// Splits tax revenue over materials according to the governing system.
///
/// * Full-libertarian: each agent's own paid tax follows its own ballot.
/// * Semi-libertarian/utilitarian: total revenue follows the Borda ranking.
/// * Full-utilitarian: total revenue follows the planner's ranking.
///
/// A missing ballot or ranking splits evenly.
pub fn invest(
    paid: &[Coins],
    system: GoverningSystem,
    ballots: &[Option<Ballot>],
    planner_ranking: Option<Ballot>,
    rates: [f64; 4],
    params: InvestParams,
) -> Investment {
    let revenue: f64 = paid.iter().map(|c| c.to_f64()).sum();
    let weights_of = |b: Option<Ballot>| b.map_or(UNIFORM_WEIGHTS, |b| b.weights());
    let mut coins = [0.0; 4];
    match system {
        GoverningSystem::FullLibertarian => {
            for (i, p) in paid.iter().enumerate() {
                let w = weights_of(ballots.get(i).copied().flatten());
                for m in 0..4 {
                    coins[m] += w[m] * p.to_f64();
                }
            }
        }
        GoverningSystem::SemiLibertarianUtilitarian => {
            let cast: Vec<Ballot> = ballots.iter().flatten().copied().collect();
            let ranking = (!cast.is_empty()).then(|| borda_count(&cast).ranking);
            let w = weights_of(ranking);
            for m in 0..4 {
                coins[m] = w[m] * revenue;
            }
        }
        GoverningSystem::FullUtilitarian => {
            let w = weights_of(planner_ranking);
            for m in 0..4 {
                coins[m] = w[m] * revenue;
            }
        }
    }
    let raw_deltas = coins.map(|c| params.kappa * c);
    let mut deltas = [0.0; 4];
    for m in 0..4 {
        deltas[m] = raw_deltas[m].min(params.regen_max - rates[m]).max(0.0);
    }
    Investment { coins, raw_deltas, deltas }
}
