//! Smoke and fire spread as a synchronous probabilistic cellular automaton,
//! plus the derived heat zone and the traversal-cost predicate that every
//! path computation goes through.
//!
//! A smoke-free walkable cell with `k` smoke-bearing Moore neighbors gains
//! smoke with probability `beta_smoke * k / 8`; fire is analogous but only
//! ignites combustible, unoccupied cells. Levels saturate at `max_level`.

use rand::Rng;

use crate::error::{EvacError, Result};
use crate::grid::{Cell, Grid, Pos};

#[derive(Debug, Clone, PartialEq)]
pub struct HazardParams {
    pub beta_smoke: f64,
    pub beta_fire: f64,
    pub max_level: u8,
    /// Chebyshev radius of the heat zone around fire cells.
    pub heat_radius: usize,
    /// Path-cost multiplier for entering a smoke cell.
    pub smoke_weight: u32,
}

impl Default for HazardParams {
    fn default() -> Self {
        Self {
            beta_smoke: 1.0,
            beta_fire: 0.4,
            max_level: 5,
            heat_radius: 1,
            smoke_weight: 10,
        }
    }
}

impl HazardParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(EvacError::InvalidParameter(msg));
        if !(0.0..=1.0).contains(&self.beta_smoke) {
            return bad(format!("beta_smoke {} outside [0, 1]", self.beta_smoke));
        }
        if !(0.0..=1.0).contains(&self.beta_fire) {
            return bad(format!("beta_fire {} outside [0, 1]", self.beta_fire));
        }
        if self.max_level < 1 {
            return bad("max_level must be at least 1".into());
        }
        if self.smoke_weight < 1 {
            return bad("smoke_weight must be at least 1".into());
        }
        Ok(())
    }
}

/// Spread probability for `k` burning/smoky neighbors out of eight.
pub fn spread_probability(beta: f64, k: usize) -> f64 {
    beta * k as f64 / 8.0
}

#[derive(Clone, Copy)]
enum Element {
    Smoke,
    Fire,
}

impl Element {
    fn level(self, c: &Cell) -> u8 {
        match self {
            Element::Smoke => c.smoke_level,
            Element::Fire => c.fire_level,
        }
    }
}

/// One synchronous smoke update from `t` to `t + 1`.
pub fn step_smoke<R: Rng + ?Sized>(grid: &mut Grid, params: &HazardParams, rng: &mut R) {
    step_element(grid, params, rng, Element::Smoke);
}

/// One synchronous fire update. Ignition is gated on combustibility and an
/// empty cell; a newly burning cell also gains smoke.
pub fn step_fire<R: Rng + ?Sized>(grid: &mut Grid, params: &HazardParams, rng: &mut R) {
    step_element(grid, params, rng, Element::Fire);
}

fn step_element<R: Rng + ?Sized>(
    grid: &mut Grid,
    params: &HazardParams,
    rng: &mut R,
    element: Element,
) {
    let before: Vec<u8> = grid.cells().iter().map(|c| element.level(c)).collect();
    let beta = match element {
        Element::Smoke => params.beta_smoke,
        Element::Fire => params.beta_fire,
    };
    let max = params.max_level;
    let w = grid.width();

    for i in 0..grid.len() {
        let pos = grid.pos_of(i);
        let cell = &grid.cells()[i];
        if cell.structure.is_solid() {
            continue;
        }
        if before[i] > 0 {
            let next = before[i].saturating_add(1).min(max);
            let c = &mut grid.cells_mut()[i];
            match element {
                Element::Smoke => c.smoke_level = next,
                Element::Fire => c.fire_level = next,
            }
            continue;
        }
        if let Element::Fire = element {
            if !cell.combustible || cell.occupant.is_some() {
                continue;
            }
        }
        let k = grid
            .neighbors(pos)
            .filter(|n| before[n.y * w + n.x] > 0)
            .count();
        if k == 0 {
            continue;
        }
        if rng.gen::<f64>() < spread_probability(beta, k) {
            let c = &mut grid.cells_mut()[i];
            match element {
                Element::Smoke => c.smoke_level = 1,
                Element::Fire => {
                    c.fire_level = 1;
                    c.smoke_level = c.smoke_level.max(1);
                }
            }
        }
    }
}

/// Positions within `heat_radius` (Chebyshev) of any fire cell, excluding
/// walls and obstacles, as a row-major mask.
pub fn heat_mask(grid: &Grid, params: &HazardParams) -> Vec<bool> {
    let mut mask = vec![false; grid.len()];
    let r = params.heat_radius;
    for (i, c) in grid.cells().iter().enumerate() {
        if !c.has_fire() {
            continue;
        }
        let p = grid.pos_of(i);
        let (x0, x1) = (p.x.saturating_sub(r), (p.x + r).min(grid.width() - 1));
        let (y0, y1) = (p.y.saturating_sub(r), (p.y + r).min(grid.height() - 1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                let q = Pos::new(x, y);
                if !grid.cell(q).structure.is_solid() {
                    mask[grid.index(q)] = true;
                }
            }
        }
    }
    mask
}

/// Heat zone as a sorted position list.
pub fn heat_zone(grid: &Grid, params: &HazardParams) -> Vec<Pos> {
    heat_mask(grid, params)
        .iter()
        .enumerate()
        .filter(|&(_i, &h)| h)
        .map(|(i, &_h)| grid.pos_of(i))
        .collect()
}

/// Cost of entering `cell`; `None` means blocked. Only presence of smoke or
/// fire matters, never the level.
pub fn traversal_cost(cell: &Cell, in_heat: bool, params: &HazardParams) -> Option<u32> {
    if cell.structure.is_solid() || cell.has_fire() || in_heat {
        None
    } else if cell.has_smoke() {
        Some(params.smoke_weight)
    } else {
        Some(1)
    }
}

/// Per-tick hazard snapshot: heat zone and entry cost of every cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HazardField {
    width: usize,
    heat: Vec<bool>,
    cost: Vec<Option<u32>>,
}

impl HazardField {
    pub fn observe(grid: &Grid, params: &HazardParams) -> Self {
        let heat = heat_mask(grid, params);
        let cost = grid
            .cells()
            .iter()
            .zip(&heat)
            .map(|(c, &h)| traversal_cost(c, h, params))
            .collect();
        Self {
            width: grid.width(),
            heat,
            cost,
        }
    }

    #[inline]
    fn idx(&self, pos: Pos) -> usize {
        pos.y * self.width + pos.x
    }

    pub fn in_heat(&self, pos: Pos) -> bool {
        self.heat[self.idx(pos)]
    }

    #[inline]
    pub fn cost(&self, pos: Pos) -> Option<u32> {
        self.cost[self.idx(pos)]
    }

    #[inline]
    pub fn cost_at(&self, index: usize) -> Option<u32> {
        self.cost[index]
    }

    pub fn passable(&self, pos: Pos) -> bool {
        self.cost(pos).is_some()
    }

    /// Same blocked set and smoke weights as `other`.
    pub fn same_costs(&self, other: &HazardField) -> bool {
        self.cost == other.cost
    }

    pub fn heat_count(&self) -> usize {
        self.heat.iter().filter(|&&h| h).count()
    }
}
