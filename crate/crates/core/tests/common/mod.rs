#![allow(dead_code)]

use std::collections::VecDeque;

use evac_core::grid::{ExitId, ExitSpec, Grid, Pos, StructureKind, MOORE_OFFSETS};
use evac_core::hazard::{step_fire, step_smoke, HazardParams};
use evac_core::pathfield::UNREACHABLE;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Breadth-first search over the unit-cost 8-connected graph of walkable
/// cells, seeded from every exit cell.
pub fn bfs_oracle(grid: &Grid, exit: &ExitSpec) -> Vec<u32> {
    let (w, h) = (grid.width() as isize, grid.height() as isize);
    let mut dist = vec![UNREACHABLE; grid.len()];
    let mut queue = VecDeque::new();
    for &p in &exit.cells {
        dist[p.y * grid.width() + p.x] = 0;
        queue.push_back(p);
    }
    while let Some(p) = queue.pop_front() {
        let d = dist[p.y * grid.width() + p.x];
        for (dx, dy) in MOORE_OFFSETS {
            let (x, y) = (p.x as isize + dx, p.y as isize + dy);
            if x < 0 || y < 0 || x >= w || y >= h {
                continue;
            }
            let q = Pos::new(x as usize, y as usize);
            let i = q.y * grid.width() + q.x;
            if grid.cell(q).structure.is_solid() || dist[i] != UNREACHABLE {
                continue;
            }
            dist[i] = d + 1;
            queue.push_back(q);
        }
    }
    dist
}

/// Random closed room up to `max` cells per side with scattered obstacles
/// and one exit of random width on a random wall.
pub fn random_room(rng: &mut ChaCha8Rng, max: usize) -> (Grid, ExitSpec) {
    let w = rng.gen_range(4..=max);
    let h = rng.gen_range(4..=max);
    let mut g = Grid::room(w, h);
    let density = rng.gen_range(0.0..0.35);
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            if rng.gen_bool(density) {
                g.cell_mut(Pos::new(x, y)).structure = StructureKind::Obstacle;
            }
        }
    }
    let horizontal = rng.gen_bool(0.5);
    let along = if horizontal { w } else { h };
    let width = rng.gen_range(1..=(along - 2).min(4));
    let offset = rng.gen_range(1..=along - 1 - width);
    let far = rng.gen_bool(0.5);
    let cells = (offset..offset + width)
        .map(|t| match (horizontal, far) {
            (true, false) => Pos::new(t, 0),
            (true, true) => Pos::new(t, h - 1),
            (false, false) => Pos::new(0, t),
            (false, true) => Pos::new(w - 1, t),
        })
        .collect();
    let exit = ExitSpec::new(ExitId(1), cells);
    g.carve_exit(&exit).unwrap();
    (g, exit)
}

#[derive(Clone, Copy, Debug)]
pub enum Spread {
    Smoke,
    Fire,
}

/// Number of trials, out of `trials`, in which the center of a 3x3 interior
/// with `k` burning/smoky neighbors ignites after one tick.
pub fn ignition_count(kind: Spread, beta: f64, k: usize, trials: u32, seed: u64) -> u32 {
    let mut base = Grid::room(5, 5);
    let center = Pos::new(2, 2);
    for p in base.positions().collect::<Vec<_>>() {
        base.cell_mut(p).combustible = true;
    }
    for &(dx, dy) in MOORE_OFFSETS.iter().take(k) {
        let p = Pos::new((2 + dx) as usize, (2 + dy) as usize);
        let c = base.cell_mut(p);
        match kind {
            Spread::Smoke => c.smoke_level = 1,
            Spread::Fire => {
                c.fire_level = 1;
                c.smoke_level = 1;
            }
        }
    }
    let params = HazardParams {
        beta_smoke: beta,
        beta_fire: beta,
        ..HazardParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..trials {
        let mut g = base.clone();
        match kind {
            Spread::Smoke => {
                step_smoke(&mut g, &params, &mut rng);
                hits += u32::from(g.cell(center).has_smoke());
            }
            Spread::Fire => {
                step_fire(&mut g, &params, &mut rng);
                hits += u32::from(g.cell(center).has_fire());
            }
        }
    }
    hits
}

/// |observed - n p| within three binomial standard deviations.
pub fn within_three_sigma(hits: u32, trials: u32, p: f64) -> bool {
    let n = trials as f64;
    let sd = (n * p * (1.0 - p)).sqrt();
    (hits as f64 - n * p).abs() <= 3.0 * sd + 1e-9
}

use evac_core::behavior::BehaviorKind;
use evac_core::scenario::{
    AgentGroup, Combustible, ExitDecl, Placement, Region, ScenarioSpec, Side,
};

/// 20x20-cell room with a two-cell exit at the middle of the north wall.
pub fn small_room(population: usize, behavior: BehaviorKind) -> ScenarioSpec {
    let mut s = ScenarioSpec::new("small", 8.0, 8.0);
    s.population = population;
    s.exits = vec![ExitDecl {
        id: 1,
        side: Side::North,
        offset: 9,
        width: 2,
    }];
    if population > 0 {
        s.groups = vec![AgentGroup::uniform(population, behavior)];
    }
    s
}

/// Two exits on opposite walls, a fire seed in the middle and a mixed crowd.
pub fn small_fire_room(population: usize) -> ScenarioSpec {
    let mut s = ScenarioSpec::new("small-fire", 10.0, 12.0);
    s.population = population;
    s.exits = vec![
        ExitDecl {
            id: 1,
            side: Side::North,
            offset: 3,
            width: 3,
        },
        ExitDecl {
            id: 2,
            side: Side::South,
            offset: 18,
            width: 3,
        },
    ];
    s.obstacles = vec![Region::Rect {
        x0: 5,
        y0: 10,
        x1: 12,
        y1: 11,
    }];
    s.combustible = Combustible::AllFloor;
    s.fire_seeds = vec![Region::Cells(vec![Pos::new(12, 15)])];
    s.hazard.beta_smoke = 0.3;
    s.groups = vec![
        AgentGroup::uniform(population / 2, BehaviorKind::NearestExit),
        AgentGroup::uniform(population - population / 2, BehaviorKind::BestPredictedExit),
    ];
    s
}

/// One agent at an explicit cell.
pub fn lone_agent(spec: &mut ScenarioSpec, at: Pos) {
    spec.population = 1;
    let mut g = AgentGroup::uniform(1, BehaviorKind::NearestExit);
    g.placement = Placement::Cells(vec![at]);
    g.speed = evac_core::scenario::IntRange::fixed(1);
    spec.groups = vec![g];
}
