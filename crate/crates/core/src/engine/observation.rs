//! What agents and the planner see. Build skills appear only in an agent's
//! own observation; the planner sees none.

use super::action::ActionMask;
use crate::fiscal::Ballot;
use crate::language::{LanguageMap, Role};
use crate::market::OrderBook;
use crate::types::{AgentId, Coins, HouseType, Inventory, Material};
use crate::world::{GridWorld, Pos, WorldSnapshot};
use serde::{Deserialize, Serialize};

pub const VIEW_SIZE: usize = 11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViewCell {
    /// Outside the grid.
    Padding,
    Empty,
    Obstacle,
    Deposit { material: Material, units: u32 },
    House { kind: HouseType, own: bool },
    Agent(AgentId),
}

/// Egocentric `VIEW_SIZE × VIEW_SIZE` window centred on the agent, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialView {
    pub cells: Vec<ViewCell>,
}

impl SpatialView {
    pub fn at(&self, dx: isize, dy: isize) -> ViewCell {
        let r = (VIEW_SIZE / 2) as isize;
        self.cells[((dy + r) as usize) * VIEW_SIZE + (dx + r) as usize]
    }
}

pub fn spatial_view(world: &GridWorld, agent: AgentId) -> SpatialView {
    let r = (VIEW_SIZE / 2) as isize;
    let c = world.position(agent);
    let mut cells = Vec::with_capacity(VIEW_SIZE * VIEW_SIZE);
    for dy in -r..=r {
        for dx in -r..=r {
            let (x, y) = (c.x as isize + dx, c.y as isize + dy);
            if x < 0 || y < 0 || x >= world.width as isize || y >= world.height as isize {
                cells.push(ViewCell::Padding);
                continue;
            }
            let cell = world.cell(Pos { x: x as usize, y: y as usize });
            cells.push(if let Some(a) = cell.occupant {
                ViewCell::Agent(a)
            } else if cell.obstacle {
                ViewCell::Obstacle
            } else if let Some(h) = &cell.house {
                ViewCell::House { kind: h.kind, own: h.owners.contains(&agent) }
            } else if let Some(d) = &cell.deposit {
                ViewCell::Deposit { material: d.material, units: d.units }
            } else {
                ViewCell::Empty
            });
        }
    }
    SpatialView { cells }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketView {
    /// Open order counts `[material][side][price]` placed by the observer.
    pub own: Vec<Vec<Vec<u32>>>,
    /// Open order counts placed by everyone else (the planner: by everyone).
    pub others: Vec<Vec<Vec<u32>>>,
    pub mean_price: [Option<f64>; 4],
    /// Executed trades `[material][price]` so far.
    pub trade_counts: Vec<Vec<u32>>,
}

impl MarketView {
    pub fn for_agent(book: &OrderBook, agent: AgentId) -> Self {
        let (mean_price, trade_counts) = book.history();
        MarketView { own: book.depth(Some((agent, true))), others: book.depth(Some((agent, false))), mean_price, trade_counts }
    }

    pub fn public(book: &OrderBook) -> Self {
        let (mean_price, trade_counts) = book.history();
        let levels = usize::from(book.config.max_price) + 1;
        MarketView { own: vec![vec![vec![0; levels]; 2]; 4], others: book.depth(None), mean_price, trade_counts }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaxInfo {
    pub cutoffs: Vec<f64>,
    pub rates: Vec<f64>,
    /// Fraction of the current tax period elapsed, in `[0, 1)`.
    pub period_progress: f64,
    /// Previous period's pretax incomes, sorted ascending (anonymised).
    pub prev_incomes_sorted: Vec<f64>,
    /// Marginal rate at the observer's income so far this period.
    pub own_marginal_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentObservation {
    pub agent: AgentId,
    pub step: u64,
    pub spatial: SpatialView,
    pub inventory: Inventory,
    pub labor: f64,
    pub build_skill_alone: Coins,
    pub build_skill_together: Coins,
    pub gather_skill: f64,
    pub role: Role,
    /// Every agent's language map; symbols are public.
    pub languages: Vec<LanguageMap>,
    /// Who a joint build started now would pair with.
    pub joint_partner: Option<AgentId>,
    pub own_vote: Option<Ballot>,
    pub market: MarketView,
    pub tax: TaxInfo,
    pub mask: ActionMask,
}

impl AgentObservation {
    pub fn language(&self) -> &LanguageMap {
        &self.languages[self.agent]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerObservation {
    pub step: u64,
    pub period: u64,
    pub world: WorldSnapshot,
    pub inventories: Vec<Inventory>,
    pub market: MarketView,
    pub tax: TaxInfo,
    /// Previous period's pretax incomes by agent.
    pub prev_incomes: Vec<f64>,
    pub prev_marginal_rates: Vec<f64>,
    pub votes: Vec<Option<Ballot>>,
    pub languages: Vec<LanguageMap>,
    pub brackets: usize,
    pub rate_grid_size: usize,
}
