//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use econsim::fiscal::Ballot;
use econsim::market::{CapMode, MarketConfig, Rejection, Side, Trade};
use econsim::types::{AgentId, Coins, Inventory, Material};
use rand::Rng;

/// Tax by integrating the marginal-rate step function over `[0, z]`,
/// splitting the interval at every cutoff and sampling the rate at each
/// piece's midpoint.
pub fn tax_oracle(cutoffs: &[f64], rates: &[f64], z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let mut points: Vec<f64> = cutoffs.iter().copied().filter(|&c| c > 0.0 && c < z).collect();
    points.insert(0, 0.0);
    points.push(z);
    let rate_at = |x: f64| {
        let j = cutoffs.iter().rposition(|&c| c < x).unwrap_or(0);
        rates[j]
    };
    points.windows(2).map(|w| rate_at((w[0] + w[1]) / 2.0) * (w[1] - w[0])).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefOrder {
    pub id: u64,
    pub agent: AgentId,
    pub side: Side,
    pub material: Material,
    pub price: u8,
    pub placed_at: u64,
}

/// Brute-force continuous double auction: a flat list of open orders
/// scanned in full on every event.
pub struct RefBook {
    pub config: MarketConfig,
    pub open: Vec<RefOrder>,
    pub next_id: u64,
    pub trades: Vec<Trade>,
}

impl RefBook {
    pub fn new(config: MarketConfig) -> Self {
        RefBook { config, open: Vec::new(), next_id: 0, trades: Vec::new() }
    }

    fn count(&self, agent: AgentId, material: Material, side: Side) -> usize {
        self.open
            .iter()
            .filter(|o| o.agent == agent && o.material == material)
            .filter(|o| self.config.cap_mode == CapMode::PerResource || o.side == side)
            .count()
    }

    pub fn place<R: Rng>(
        &mut self,
        agent: AgentId,
        side: Side,
        material: Material,
        price: u8,
        now: u64,
        invs: &mut [Inventory],
        rng: &mut R,
    ) -> Result<Option<Trade>, Rejection> {
        let m = material.index();
        let cost = Coins::whole(price as i64);
        if price > self.config.max_price {
            return Err(Rejection::InvalidPrice);
        }
        if side == Side::Bid && invs[agent].coin < cost {
            return Err(Rejection::InsufficientFunds);
        }
        if side == Side::Ask && invs[agent].units[m] == 0 {
            return Err(Rejection::InsufficientResource);
        }
        if self.count(agent, material, side) >= self.config.max_open {
            return Err(Rejection::OrderCap);
        }
        match side {
            Side::Bid => {
                invs[agent].coin -= cost;
                invs[agent].escrow_coin += cost;
            }
            Side::Ask => {
                invs[agent].units[m] -= 1;
                invs[agent].escrow_units[m] += 1;
            }
        }
        let incoming = RefOrder { id: self.next_id, agent, side, material, price, placed_at: now };
        self.next_id += 1;

        let crossing: Vec<usize> = (0..self.open.len())
            .filter(|&k| {
                let o = &self.open[k];
                o.material == material
                    && o.side != side
                    && o.agent != agent
                    && match side {
                        Side::Bid => o.price <= price,
                        Side::Ask => o.price >= price,
                    }
            })
            .collect();
        if crossing.is_empty() {
            self.open.push(incoming);
            return Ok(None);
        }
        let best_price = match side {
            Side::Bid => crossing.iter().map(|&k| self.open[k].price).min().unwrap(),
            Side::Ask => crossing.iter().map(|&k| self.open[k].price).max().unwrap(),
        };
        let at_best: Vec<usize> = crossing.into_iter().filter(|&k| self.open[k].price == best_price).collect();
        let earliest = at_best.iter().map(|&k| self.open[k].placed_at).min().unwrap();
        let mut tied: Vec<usize> = at_best.into_iter().filter(|&k| self.open[k].placed_at == earliest).collect();
        tied.sort_by_key(|&k| self.open[k].id);
        let pick = if tied.len() > 1 { tied[rng.random_range(0..tied.len())] } else { tied[0] };
        let resting = self.open.remove(pick);

        let (bid, ask) = if side == Side::Bid { (&incoming, &resting) } else { (&resting, &incoming) };
        let paid = Coins::whole(resting.price as i64);
        let bid_escrow = Coins::whole(bid.price as i64);
        let buyer = &mut invs[bid.agent];
        buyer.escrow_coin -= bid_escrow;
        buyer.coin = buyer.coin + bid_escrow - paid;
        buyer.units[m] += 1;
        let seller = &mut invs[ask.agent];
        seller.escrow_units[m] -= 1;
        seller.coin += paid;
        let trade = Trade {
            step: now,
            material,
            price: resting.price,
            buyer: bid.agent,
            seller: ask.agent,
            bid_id: bid.id,
            ask_id: ask.id,
        };
        self.trades.push(trade.clone());
        Ok(Some(trade))
    }

    pub fn expire(&mut self, now: u64, invs: &mut [Inventory]) -> usize {
        let expiry = self.config.expiry;
        let (stale, keep): (Vec<RefOrder>, Vec<RefOrder>) = self.open.drain(..).partition(|o| now >= o.placed_at + expiry);
        self.open = keep;
        for o in &stale {
            let inv = &mut invs[o.agent];
            match o.side {
                Side::Bid => {
                    let c = Coins::whole(o.price as i64);
                    inv.escrow_coin -= c;
                    inv.coin += c;
                }
                Side::Ask => {
                    inv.escrow_units[o.material.index()] -= 1;
                    inv.units[o.material.index()] += 1;
                }
            }
        }
        stale.len()
    }
}

/// Positional tally: 3, 2, 1, 0 points by rank; the ranking orders
/// materials by score with ties going to the earlier material.
pub fn borda_oracle(ballots: &[Ballot]) -> ([u32; 4], [Material; 4]) {
    let mut scores = [0u32; 4];
    for b in ballots {
        for (rank, m) in b.0.iter().enumerate() {
            scores[m.index()] += 3 - rank as u32;
        }
    }
    let mut order = Material::ALL;
    order.sort_by(|a, b| scores[b.index()].cmp(&scores[a.index()]).then(a.index().cmp(&b.index())));
    (scores, order)
}
