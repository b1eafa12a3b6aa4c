//! Continuous double auction over the four materials.
//!
//! Orders are single-unit bids or asks at an integer price in `0..=10`
//! coins. Placing an order locks its escrow (the bid price in coins, or one
//! unit of the material) until the order trades or expires.
//!
//! An incoming order is matched against the resting complementary orders of
//! its material. The best price wins (lowest ask for a bid, highest bid for
//! an ask); equal prices go to the earliest `placed_at`; a remaining tie is
//! broken uniformly at random, drawing `rng.random_range(0..k)` over the `k`
//! tied orders sorted by id. The trade executes at the resting order's price,
//! since the resting order was always placed first.

use crate::types::{AgentId, Coins, Inventory, Material};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub type OrderId = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub id: OrderId,
    pub agent: AgentId,
    pub side: Side,
    pub material: Material,
    pub price: u8,
    pub placed_at: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trade {
    pub step: u64,
    pub material: Material,
    pub price: u8,
    pub buyer: AgentId,
    pub seller: AgentId,
    pub bid_id: OrderId,
    pub ask_id: OrderId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("insufficient funds")]
    InsufficientFunds,
    #[error("insufficient resource")]
    InsufficientResource,
    #[error("open-order cap reached")]
    OrderCap,
    #[error("price outside the allowed levels")]
    InvalidPrice,
}

/// How the open-order cap is counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapMode {
    /// At most `max_open` bids and, separately, `max_open` asks per material.
    #[default]
    PerSide,
    /// At most `max_open` orders per material, bids and asks together.
    PerResource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub max_open: usize,
    pub expiry: u64,
    pub max_price: u8,
    pub cap_mode: CapMode,
}

impl Default for MarketConfig {
    fn default() -> Self {
        MarketConfig { max_open: 5, expiry: 50, max_price: 10, cap_mode: CapMode::PerSide }
    }
}

/// Sort key: better price first, then earlier placement, then id.
type Key = (u8, u64, OrderId);

#[derive(Clone, Debug, Default)]
pub struct OrderBook {
    pub config: MarketConfig,
    next_id: OrderId,
    // [material][side]
    queues: [[BTreeMap<Key, Order>; 2]; 4],
    pub trades: Vec<Trade>,
}

impl OrderBook {
    pub fn new(config: MarketConfig) -> Self {
        OrderBook { config, ..Default::default() }
    }

    fn key(&self, o: &Order) -> Key {
        let rank = match o.side {
            Side::Ask => o.price,
            Side::Bid => self.config.max_price - o.price,
        };
        (rank, o.placed_at, o.id)
    }

    pub fn open_orders(&self) -> impl Iterator<Item = &Order> {
        self.queues.iter().flatten().flat_map(|q| q.values())
    }

    pub fn orders(&self, material: Material, side: Side) -> impl Iterator<Item = &Order> {
        self.queues[material.index()][side.index()].values()
    }

    pub fn open_count(&self, agent: AgentId, material: Material, side: Side) -> usize {
        let per_side = |s: Side| self.orders(material, s).filter(|o| o.agent == agent).count();
        match self.config.cap_mode {
            CapMode::PerSide => per_side(side),
            CapMode::PerResource => per_side(Side::Bid) + per_side(Side::Ask),
        }
    }

    /// Why an order would be rejected, or `None` if it would be accepted.
    pub fn check(&self, agent: AgentId, side: Side, material: Material, price: u8, inv: &Inventory) -> Option<Rejection> {
        if price > self.config.max_price {
            return Some(Rejection::InvalidPrice);
        }
        match side {
            Side::Bid if inv.coin < Coins::whole(i64::from(price)) => return Some(Rejection::InsufficientFunds),
            Side::Ask if inv.units_of(material) == 0 => return Some(Rejection::InsufficientResource),
            _ => {}
        }
        if self.open_count(agent, material, side) >= self.config.max_open {
            return Some(Rejection::OrderCap);
        }
        None
    }

    /// Validates an order and, if accepted, locks its escrow and rests it in the book.
    pub fn submit(
        &mut self,
        agent: AgentId,
        side: Side,
        material: Material,
        price: u8,
        now: u64,
        inv: &mut Inventory,
    ) -> Result<OrderId, Rejection> {
        if let Some(r) = self.check(agent, side, material, price, inv) {
            return Err(r);
        }
        match side {
            Side::Bid => {
                let c = Coins::whole(i64::from(price));
                inv.coin -= c;
                inv.escrow_coin += c;
            }
            Side::Ask => {
                inv.units[material.index()] -= 1;
                inv.escrow_units[material.index()] += 1;
            }
        }
        let id = self.next_id;
        self.next_id += 1;
        let order = Order { id, agent, side, material, price, placed_at: now };
        let key = self.key(&order);
        self.queues[material.index()][side.index()].insert(key, order);
        Ok(id)
    }

    fn find(&self, id: OrderId) -> Option<&Order> {
        self.open_orders().find(|o| o.id == id)
    }

    fn remove(&mut self, o: &Order) -> Order {
        let key = self.key(o);
        self.queues[o.material.index()][o.side.index()].remove(&key).expect("order is in the book")
    }

    /// Matches a resting order (normally the one just submitted) against the
    /// opposite side. On a match both orders leave the book and escrow settles.
    pub fn match_order<R: Rng + ?Sized>(
        &mut self,
        id: OrderId,
        invs: &mut [Inventory],
        now: u64,
        rng: &mut R,
    ) -> Option<Trade> {
        let incoming = self.find(id)?.clone();
        let crosses = |resting: &Order| match incoming.side {
            Side::Bid => resting.price <= incoming.price,
            Side::Ask => resting.price >= incoming.price,
        };
        let queue = &self.queues[incoming.material.index()][incoming.side.opposite().index()];
        let mut candidates = queue.values().filter(|o| o.agent != incoming.agent && o.id != incoming.id);
        let best = candidates.next().filter(|o| crosses(o))?;
        let mut tied: Vec<&Order> = std::iter::once(best)
            .chain(candidates.take_while(|o| o.price == best.price && o.placed_at == best.placed_at))
            .collect();
        let resting = if tied.len() == 1 {
            tied[0].clone()
        } else {
            tied.sort_by_key(|o| o.id);
            tied[rng.random_range(0..tied.len())].clone()
        };

        self.remove(&incoming);
        self.remove(&resting);
        let (bid, ask) = match incoming.side {
            Side::Bid => (incoming, resting.clone()),
            Side::Ask => (resting.clone(), incoming),
        };
        let price = resting.price;
        settle(&bid, &ask, price, invs);
        let trade = Trade {
            step: now,
            material: bid.material,
            price,
            buyer: bid.agent,
            seller: ask.agent,
            bid_id: bid.id,
            ask_id: ask.id,
        };
        self.trades.push(trade.clone());
        Some(trade)
    }

    /// Submit followed by an immediate match attempt.
    #[allow(clippy::too_many_arguments)]
    pub fn place<R: Rng + ?Sized>(
        &mut self,
        agent: AgentId,
        side: Side,
        material: Material,
        price: u8,
        now: u64,
        invs: &mut [Inventory],
        rng: &mut R,
    ) -> Result<Option<Trade>, Rejection> {
        let id = self.submit(agent, side, material, price, now, &mut invs[agent])?;
        Ok(self.match_order(id, invs, now, rng))
    }

    /// Removes every order aged `expiry` steps or more and refunds its escrow.
    pub fn expire(&mut self, now: u64, invs: &mut [Inventory]) -> Vec<Order> {
        let expiry = self.config.expiry;
        let stale: Vec<Order> = self
            .open_orders()
            .filter(|o| now.saturating_sub(o.placed_at) >= expiry)
            .cloned()
            .collect();
        for o in &stale {
            self.remove(o);
            refund(o, &mut invs[o.agent]);
        }
        stale
    }

    /// Cancels an open order and refunds its escrow.
    pub fn cancel(&mut self, id: OrderId, invs: &mut [Inventory]) -> Option<Order> {
        let o = self.find(id)?.clone();
        self.remove(&o);
        refund(&o, &mut invs[o.agent]);
        Some(o)
    }

    /// Cancels the agent's bids, oldest first, until its free coin reaches `needed`.
    pub fn release_bids(&mut self, agent: AgentId, needed: Coins, invs: &mut [Inventory]) -> Vec<Order> {
        let mut bids: Vec<Order> = self
            .open_orders()
            .filter(|o| o.agent == agent && o.side == Side::Bid)
            .cloned()
            .collect();
        bids.sort_by_key(|o| (o.placed_at, o.id));
        let mut released = Vec::new();
        for b in bids {
            if invs[agent].coin >= needed {
                break;
            }
            released.push(self.cancel(b.id, invs).expect("bid is open"));
        }
        released
    }

    /// Outstanding order counts per `[material][side][price]`, optionally
    /// restricted to (`Some(true)`) or excluding (`Some(false)`) one agent.
    pub fn depth(&self, agent: Option<(AgentId, bool)>) -> Vec<Vec<Vec<u32>>> {
        let levels = usize::from(self.config.max_price) + 1;
        let mut out = vec![vec![vec![0u32; levels]; 2]; 4];
        for o in self.open_orders() {
            let keep = match agent {
                None => true,
                Some((a, own)) => (o.agent == a) == own,
            };
            if keep {
                out[o.material.index()][o.side.index()][usize::from(o.price)] += 1;
            }
        }
        out
    }

    /// Mean traded price per material (`None` before any trade) and trade
    /// counts per `[material][price]`.
    pub fn history(&self) -> ([Option<f64>; 4], Vec<Vec<u32>>) {
        let levels = usize::from(self.config.max_price) + 1;
        let mut counts = vec![vec![0u32; levels]; 4];
        let mut sums = [0u64; 4];
        for t in &self.trades {
            counts[t.material.index()][usize::from(t.price)] += 1;
            sums[t.material.index()] += u64::from(t.price);
        }
        let mut means = [None; 4];
        for m in 0..4 {
            let n: u32 = counts[m].iter().sum();
            if n > 0 {
                means[m] = Some(sums[m] as f64 / f64::from(n));
            }
        }
        (means, counts)
    }

    /// Total coin and per-material units locked in open orders.
    pub fn escrow_totals(&self) -> (Coins, [u32; 4]) {
        let mut coin = Coins::ZERO;
        let mut units = [0u32; 4];
        for o in self.open_orders() {
            match o.side {
                Side::Bid => coin += Coins::whole(i64::from(o.price)),
                Side::Ask => units[o.material.index()] += 1,
            }
        }
        (coin, units)
    }
}

fn settle(bid: &Order, ask: &Order, price: u8, invs: &mut [Inventory]) {
    let m = bid.material.index();
    let bid_escrow = Coins::whole(i64::from(bid.price));
    let paid = Coins::whole(i64::from(price));
    let buyer = &mut invs[bid.agent];
    buyer.escrow_coin -= bid_escrow;
    buyer.coin += bid_escrow - paid;
    buyer.units[m] += 1;
    let seller = &mut invs[ask.agent];
    seller.escrow_units[m] -= 1;
    seller.coin += paid;
}

fn refund(o: &Order, inv: &mut Inventory) {
    match o.side {
        Side::Bid => {
            let c = Coins::whole(i64::from(o.price));
            inv.escrow_coin -= c;
            inv.coin += c;
        }
        Side::Ask => {
            inv.escrow_units[o.material.index()] -= 1;
            inv.units[o.material.index()] += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn invs(n: usize) -> Vec<Inventory> {
        (0..n)
            .map(|_| Inventory { coin: Coins::whole(100), units: [10; 4], ..Default::default() })
            .collect()
    }

    #[test]
    fn rejections_are_distinguishable() {
        let mut book = OrderBook::new(MarketConfig::default());
        let mut inv = Inventory { coin: Coins::whole(2), ..Default::default() };
        assert_eq!(book.submit(0, Side::Bid, Material::Wood, 3, 0, &mut inv), Err(Rejection::InsufficientFunds));
        assert_eq!(book.submit(0, Side::Ask, Material::Wood, 3, 0, &mut inv), Err(Rejection::InsufficientResource));
        assert_eq!(book.submit(0, Side::Bid, Material::Wood, 11, 0, &mut inv), Err(Rejection::InvalidPrice));
        assert_eq!(inv, Inventory { coin: Coins::whole(2), ..Default::default() });
    }

    #[test]
    fn sixth_ask_hits_the_cap() {
        let mut book = OrderBook::new(MarketConfig::default());
        let mut inv = Inventory { units: [10, 0, 0, 0], ..Default::default() };
        for t in 0..5 {
            book.submit(0, Side::Ask, Material::Wood, 9, t, &mut inv).unwrap();
        }
        assert_eq!(book.submit(0, Side::Ask, Material::Wood, 9, 5, &mut inv), Err(Rejection::OrderCap));
        assert_eq!(inv.units[0], 5);
        assert_eq!(inv.escrow_units[0], 5);
    }

    #[test]
    fn per_resource_cap_counts_both_sides() {
        let mut book = OrderBook::new(MarketConfig { cap_mode: CapMode::PerResource, ..Default::default() });
        let mut inv = Inventory { coin: Coins::whole(50), units: [10, 0, 0, 0], ..Default::default() };
        for t in 0..3 {
            book.submit(0, Side::Ask, Material::Wood, 9, t, &mut inv).unwrap();
        }
        for t in 0..2 {
            book.submit(0, Side::Bid, Material::Wood, 1, t, &mut inv).unwrap();
        }
        assert_eq!(book.submit(0, Side::Bid, Material::Wood, 1, 9, &mut inv), Err(Rejection::OrderCap));
    }

    #[test]
    fn accepted_ask_moves_one_unit_into_escrow() {
        let mut book = OrderBook::new(MarketConfig::default());
        let mut inv = Inventory { units: [0, 2, 0, 0], ..Default::default() };
        book.submit(0, Side::Ask, Material::Stone, 4, 0, &mut inv).unwrap();
        assert_eq!((inv.units[1], inv.escrow_units[1]), (1, 1));
    }

    #[test]
    fn worked_example_trades_at_first_ask() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut book = OrderBook::new(MarketConfig::default());
        let mut invs = invs(3);
        assert_eq!(book.place(0, Side::Ask, Material::Stone, 3, 0, &mut invs, &mut rng), Ok(None));
        assert_eq!(book.place(1, Side::Ask, Material::Stone, 7, 1, &mut invs, &mut rng), Ok(None));
        let t = book.place(2, Side::Bid, Material::Stone, 8, 2, &mut invs, &mut rng).unwrap().unwrap();
        assert_eq!((t.price, t.buyer, t.seller), (3, 2, 0));
        // Buyer paid 3 net, seller received 3.
        assert_eq!(invs[2].coin, Coins::whole(97));
        assert_eq!(invs[2].units[1], 11);
        assert_eq!(invs[0].coin, Coins::whole(103));
        assert_eq!(invs[0].units[1] + invs[0].escrow_units[1], 9);
        assert_eq!(book.orders(Material::Stone, Side::Ask).count(), 1);
    }

    #[test]
    fn resting_bid_sets_the_price() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut book = OrderBook::new(MarketConfig::default());
        let mut invs = invs(2);
        book.place(0, Side::Bid, Material::Iron, 6, 0, &mut invs, &mut rng).unwrap();
        let t = book.place(1, Side::Ask, Material::Iron, 2, 1, &mut invs, &mut rng).unwrap().unwrap();
        assert_eq!(t.price, 6);
    }

    #[test]
    fn no_trade_when_bid_below_ask() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut book = OrderBook::new(MarketConfig::default());
        let mut invs = invs(2);
        book.place(0, Side::Ask, Material::Soil, 5, 0, &mut invs, &mut rng).unwrap();
        assert_eq!(book.place(1, Side::Bid, Material::Soil, 2, 0, &mut invs, &mut rng), Ok(None));
        assert_eq!(book.open_orders().count(), 2);
    }

    #[test]
    fn bid_overpayment_is_refunded_and_priority_prefers_earlier() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut book = OrderBook::new(MarketConfig::default());
        let mut invs = invs(4);
        book.place(0, Side::Ask, Material::Wood, 4, 3, &mut invs, &mut rng).unwrap();
        book.place(1, Side::Ask, Material::Wood, 4, 1, &mut invs, &mut rng).unwrap();
        book.place(2, Side::Ask, Material::Wood, 5, 0, &mut invs, &mut rng).unwrap();
        let t = book.place(3, Side::Bid, Material::Wood, 9, 4, &mut invs, &mut rng).unwrap().unwrap();
        assert_eq!((t.seller, t.price), (1, 4));
        assert_eq!(invs[3].coin, Coins::whole(96));
        assert_eq!(invs[3].escrow_coin, Coins::ZERO);
    }

    #[test]
    fn expiry_boundary() {
        let mut book = OrderBook::new(MarketConfig::default());
        let mut invs = invs(1);
        book.submit(0, Side::Bid, Material::Wood, 4, 10, &mut invs[0]).unwrap();
        assert!(book.expire(10, &mut invs).is_empty());
        assert!(book.expire(59, &mut invs).is_empty());
        assert_eq!(book.expire(60, &mut invs).len(), 1);
        assert_eq!(invs[0].coin, Coins::whole(100));
        assert_eq!(invs[0].escrow_coin, Coins::ZERO);
    }

    #[test]
    fn release_bids_frees_oldest_first() {
        let mut book = OrderBook::new(MarketConfig::default());
        let mut invs = vec![Inventory::with_coin(Coins::whole(10))];
        book.submit(0, Side::Bid, Material::Wood, 4, 0, &mut invs[0]).unwrap();
        book.submit(0, Side::Bid, Material::Iron, 5, 1, &mut invs[0]).unwrap();
        let released = book.release_bids(0, Coins::whole(4), &mut invs);
        assert_eq!(released.len(), 1);
        assert_eq!(released[0].material, Material::Wood);
        assert_eq!(invs[0].coin, Coins::whole(5));
    }
}
