//! The 2-D grid: material deposits, regeneration, houses, agent placement,
//! movement and gathering.
//!
//! Every deposit cell holds at most one unit. A harvested cell stays empty
//! until [`GridWorld::step_regen`] respawns it with its material's current
//! regeneration probability.

use crate::error::ConfigError;
use crate::types::{AgentId, HouseType, Material};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub x: usize,
    pub y: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deposit {
    pub material: Material,
    pub units: u32,
    pub regen_prob: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct House {
    pub kind: HouseType,
    pub owners: Vec<AgentId>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub deposit: Option<Deposit>,
    pub house: Option<House>,
    pub occupant: Option<AgentId>,
    pub obstacle: bool,
}

impl Cell {
    /// True when the cell can receive a house: no deposit, house or obstacle.
    pub fn buildable(&self) -> bool {
        self.deposit.is_none() && self.house.is_none() && !self.obstacle
    }

    fn enterable_by(&self, agent: AgentId) -> bool {
        if self.obstacle || self.occupant.is_some() {
            return false;
        }
        match &self.house {
            Some(h) => h.owners.contains(&agent),
            None => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub width: usize,
    pub height: usize,
    pub n_agents: usize,
    /// Expected fraction of cells holding a deposit of each material.
    pub deposit_density: [f64; 4],
    /// Initial per-material regeneration probability.
    pub regen_init: [f64; 4],
    /// Expected fraction of impassable cells. Zero gives the open map.
    pub obstacle_density: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            width: 25,
            height: 25,
            n_agents: 6,
            deposit_density: [0.05; 4],
            regen_init: [0.02; 4],
            obstacle_density: 0.0,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.width == 0 || self.height == 0 {
            return Err(ConfigError::new("world width and height must be positive"));
        }
        let probs = self.deposit_density.iter().chain(&self.regen_init).chain([&self.obstacle_density]);
        for &p in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::new(format!("probability {p} outside [0, 1]")));
            }
        }
        let expected: f64 = self.deposit_density.iter().sum::<f64>() + self.obstacle_density;
        if expected > 1.0 {
            return Err(ConfigError::new(format!(
                "deposit and obstacle densities sum to {expected}, more than the whole grid"
            )));
        }
        if self.n_agents > self.width * self.height {
            return Err(ConfigError::new("more agents than grid cells"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridWorld {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Cell>,
    pub rng_seed: u64,
    /// Agent positions indexed by agent id.
    pub positions: Vec<Pos>,
    /// Current per-material regeneration probability.
    pub regen_rates: [f64; 4],
}

/// Result of one gather: units taken from the deposit plus any bonus unit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gathered {
    pub material: Option<Material>,
    pub from_deposit: u32,
    pub bonus: u32,
}

impl Gathered {
    pub fn units(&self) -> u32 {
        self.from_deposit + self.bonus
    }
}

impl GridWorld {
    /// Builds a world with deposits and agents placed uniformly at random.
    ///
    /// Each material's deposit count is Binomial(width·height, density); the
    /// cells are then drawn without replacement from those still free.
    /// Obstacles are placed first, deposits in material order, agents last.
    pub fn init(config: &WorldConfig, seed: u64) -> Result<GridWorld, ConfigError> {
        config.validate()?;
        let n = config.width * config.height;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cells = vec![Cell::default(); n];
        let mut free: Vec<usize> = (0..n).collect();

        let take = |count: usize, free: &mut Vec<usize>, rng: &mut ChaCha8Rng, what: &str| {
            if count > free.len() {
                return Err(ConfigError::new(format!(
                    "cannot place {count} {what} cells: only {} free cells remain",
                    free.len()
                )));
            }
            let mut picked: Vec<usize> = sample(rng, free.len(), count).into_vec();
            picked.sort_unstable();
            let chosen: Vec<usize> = picked.iter().map(|&i| free[i]).collect();
            for &i in picked.iter().rev() {
                free.remove(i);
            }
            Ok(chosen)
        };

        let binomial = |p: f64, rng: &mut ChaCha8Rng| -> usize {
            Binomial::new(n as u64, p).expect("validated probability").sample(rng) as usize
        };

        let count = binomial(config.obstacle_density, &mut rng);
        for i in take(count, &mut free, &mut rng, "obstacle")? {
            cells[i].obstacle = true;
        }
        for m in Material::ALL {
            let count = binomial(config.deposit_density[m.index()], &mut rng);
            for i in take(count, &mut free, &mut rng, m.name())? {
                cells[i].deposit = Some(Deposit { material: m, units: 1, regen_prob: config.regen_init[m.index()] });
            }
        }
        let placed = take(config.n_agents, &mut free, &mut rng, "agent")?;
        // `take` returns cells in grid order; shuffle so agent ids are not spatially sorted.
        let order = sample(&mut rng, placed.len(), placed.len()).into_vec();
        let mut positions = Vec::with_capacity(config.n_agents);
        for (agent, &k) in order.iter().enumerate() {
            let i = placed[k];
            cells[i].occupant = Some(agent);
            positions.push(Pos { x: i % config.width, y: i / config.width });
        }

        Ok(GridWorld {
            width: config.width,
            height: config.height,
            cells,
            rng_seed: seed,
            positions,
            regen_rates: config.regen_init,
        })
    }

    fn idx(&self, p: Pos) -> usize {
        p.y * self.width + p.x
    }

    pub fn cell(&self, p: Pos) -> &Cell {
        &self.cells[self.idx(p)]
    }

    pub fn cell_mut(&mut self, p: Pos) -> &mut Cell {
        let i = self.idx(p);
        &mut self.cells[i]
    }

    pub fn position(&self, agent: AgentId) -> Pos {
        self.positions[agent]
    }

    pub fn n_agents(&self) -> usize {
        self.positions.len()
    }

    /// Neighbouring position in `dir`, or `None` at the grid edge.
    pub fn neighbor(&self, p: Pos, dir: Direction) -> Option<Pos> {
        match dir {
            Direction::Up if p.y > 0 => Some(Pos { x: p.x, y: p.y - 1 }),
            Direction::Down if p.y + 1 < self.height => Some(Pos { x: p.x, y: p.y + 1 }),
            Direction::Left if p.x > 0 => Some(Pos { x: p.x - 1, y: p.y }),
            Direction::Right if p.x + 1 < self.width => Some(Pos { x: p.x + 1, y: p.y }),
            _ => None,
        }
    }

    /// Moves an agent one cell. Returns false (leaving the world untouched)
    /// when the target is off-grid, an obstacle, occupied, or another agent's house.
    pub fn move_agent(&mut self, agent: AgentId, dir: Direction) -> bool {
        let from = self.positions[agent];
        let Some(to) = self.neighbor(from, dir) else {
            return false;
        };
        if !self.cell(to).enterable_by(agent) {
            return false;
        }
        self.cell_mut(from).occupant = None;
        self.cell_mut(to).occupant = Some(agent);
        self.positions[agent] = to;
        true
    }

    /// Harvests the deposit under the agent, if it has a unit available.
    /// A bonus unit is added with probability `gather_skill`.
    pub fn gather<R: Rng + ?Sized>(&mut self, agent: AgentId, gather_skill: f64, rng: &mut R) -> Gathered {
        let p = self.positions[agent];
        let Some(dep) = self.cell_mut(p).deposit.as_mut() else {
            return Gathered::default();
        };
        if dep.units == 0 {
            return Gathered::default();
        }
        dep.units -= 1;
        let material = dep.material;
        let bonus = u32::from(rng.random::<f64>() < gather_skill);
        Gathered { material: Some(material), from_deposit: 1, bonus }
    }

    /// Respawns one unit on each empty deposit cell with its material's rate.
    /// Cells are visited in row-major order, one draw per empty deposit.
    pub fn step_regen<R: Rng + ?Sized>(&mut self, rates: [f64; 4], rng: &mut R) -> [u32; 4] {
        self.regen_rates = rates;
        let mut spawned = [0u32; 4];
        for cell in &mut self.cells {
            if let Some(dep) = cell.deposit.as_mut() {
                let rate = rates[dep.material.index()];
                dep.regen_prob = rate;
                if dep.units == 0 && rng.random::<f64>() < rate {
                    dep.units = 1;
                    spawned[dep.material.index()] += 1;
                }
            }
        }
        spawned
    }

    /// True if a house may be placed under the agent.
    pub fn can_build_at(&self, agent: AgentId) -> bool {
        self.cell(self.positions[agent]).buildable()
    }

    pub fn place_house(&mut self, at: Pos, kind: HouseType, owners: Vec<AgentId>) {
        debug_assert!(self.cell(at).buildable());
        self.cell_mut(at).house = Some(House { kind, owners });
    }

    /// Units currently sitting in deposits, per material.
    pub fn deposit_units(&self) -> [u64; 4] {
        let mut out = [0u64; 4];
        for d in self.cells.iter().filter_map(|c| c.deposit.as_ref()) {
            out[d.material.index()] += u64::from(d.units);
        }
        out
    }

    pub fn deposit_counts(&self) -> [usize; 4] {
        let mut out = [0usize; 4];
        for d in self.cells.iter().filter_map(|c| c.deposit.as_ref()) {
            out[d.material.index()] += 1;
        }
        out
    }

    pub fn snapshot(&self) -> WorldSnapshot {
        let cells = self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.deposit.is_some() || c.house.is_some() || c.occupant.is_some() || c.obstacle)
            .map(|(i, c)| CellRecord {
                x: i % self.width,
                y: i / self.width,
                material: c.deposit.as_ref().map(|d| d.material),
                units: c.deposit.as_ref().map(|d| d.units),
                regen_prob: c.deposit.as_ref().map(|d| d.regen_prob),
                house: c.house.clone(),
                occupant: c.occupant,
                obstacle: c.obstacle,
            })
            .collect();
        WorldSnapshot { width: self.width, height: self.height, cells }
    }
}

/// Flat serialisable view of a world: only non-empty cells are listed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldSnapshot {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<CellRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub x: usize,
    pub y: usize,
    pub material: Option<Material>,
    pub units: Option<u32>,
    pub regen_prob: Option<f64>,
    pub house: Option<House>,
    pub occupant: Option<AgentId>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub obstacle: bool,
}

impl WorldSnapshot {
    /// Rebuilds the grid described by the snapshot.
    pub fn restore(&self, rng_seed: u64) -> GridWorld {
        let mut cells = vec![Cell::default(); self.width * self.height];
        let mut positions = Vec::new();
        let mut rates = [0.0; 4];
        for r in &self.cells {
            let c = &mut cells[r.y * self.width + r.x];
            if let Some(m) = r.material {
                let regen_prob = r.regen_prob.unwrap_or(0.0);
                rates[m.index()] = regen_prob;
                c.deposit = Some(Deposit { material: m, units: r.units.unwrap_or(0), regen_prob });
            }
            c.house = r.house.clone();
            c.occupant = r.occupant;
            c.obstacle = r.obstacle;
            if let Some(a) = r.occupant {
                if positions.len() <= a {
                    positions.resize(a + 1, Pos { x: 0, y: 0 });
                }
                positions[a] = Pos { x: r.x, y: r.y };
            }
        }
        GridWorld { width: self.width, height: self.height, cells, rng_seed, positions, regen_rates: rates }
    }
}
