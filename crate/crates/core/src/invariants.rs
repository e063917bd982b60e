//! Structural invariants checked after every tick of a run.

use std::collections::BTreeMap;

use crate::grid::{ExitId, StructureKind};
use crate::movement::ResolutionOutcome;
use crate::sim::{TickObserver, World};

/// Records every violated invariant with the tick it occurred on.
#[derive(Debug, Default, Clone)]
pub struct InvariantChecker {
    population: usize,
    structure: Vec<StructureKind>,
    smoke: Vec<u8>,
    fire: Vec<u8>,
    positions: Vec<Option<crate::grid::Pos>>,
    on_grid: usize,
    exit_widths: BTreeMap<ExitId, usize>,
    pub ticks_checked: u64,
    pub violations: Vec<String>,
}

impl InvariantChecker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn fail(&mut self, tick: u64, msg: String) {
        self.violations.push(format!("tick {tick}: {msg}"));
    }

    fn snapshot(&mut self, world: &World) {
        let cells = world.grid.cells();
        self.structure = cells.iter().map(|c| c.structure).collect();
        self.smoke = cells.iter().map(|c| c.smoke_level).collect();
        self.fire = cells.iter().map(|c| c.fire_level).collect();
        self.positions = world
            .agents
            .iter()
            .map(|a| a.state.is_active().then_some(a.position()))
            .collect();
        self.on_grid = world.active_count();
    }

    fn check_state(&mut self, world: &World) {
        let tick = world.tick;
        let max = world.hazard.max_level;
        // occupancy uniqueness: each active agent is the occupant of its cell,
        // and no other cell claims an occupant
        let mut occupied = 0;
        for (i, c) in world.grid.cells().iter().enumerate() {
            let p = world.grid.pos_of(i);
            if let Some(id) = c.occupant {
                occupied += 1;
                let a = &world.agents[id.index()];
                if !a.state.is_active() || a.position() != p {
                    self.fail(
                        tick,
                        format!("cell {p} claims agent {id} which is elsewhere"),
                    );
                }
                if c.structure.is_solid() || c.is_exit() {
                    self.fail(
                        tick,
                        format!("agent {id} stands on a wall, obstacle or exit at {p}"),
                    );
                }
                if c.has_fire() {
                    self.fail(tick, format!("agent {id} stands in fire at {p}"));
                }
            }
            if c.smoke_level > max || c.fire_level > max {
                self.fail(tick, format!("hazard level above {max} at {p}"));
            }
            if c.structure.is_solid() && (c.has_smoke() || c.has_fire()) {
                self.fail(tick, format!("hazard on solid cell {p}"));
            }
        }
        let active = world.active_count();
        if occupied != active {
            self.fail(
                tick,
                format!("{occupied} occupied cells for {active} active agents"),
            );
        }
        if active + world.evacuated_count() != self.population {
            self.fail(tick, "agent count not conserved".into());
        }
    }
}

impl TickObserver for InvariantChecker {
    fn on_start(&mut self, world: &World) {
        self.population = world.agents.len();
        self.exit_widths = world
            .exits
            .iter()
            .map(|e| (e.id, e.width_cells()))
            .collect();
        self.check_state(world);
        self.snapshot(world);
    }

    fn on_tick(&mut self, world: &World, outcome: &ResolutionOutcome) {
        let tick = world.tick;
        self.ticks_checked += 1;
        self.check_state(world);

        let cells = world.grid.cells();
        for (i, c) in cells.iter().enumerate() {
            let p = world.grid.pos_of(i);
            if c.structure != self.structure[i] {
                self.fail(tick, format!("structure changed at {p}"));
            }
            if c.smoke_level < self.smoke[i] || c.fire_level < self.fire[i] {
                self.fail(tick, format!("hazard receded at {p}"));
            }
        }
        for a in &world.agents {
            let before = self.positions[a.id().index()];
            match (before, a.state.is_active()) {
                (Some(from), _) => {
                    if from.chebyshev(a.position()) > 1 {
                        self.fail(
                            tick,
                            format!("agent {} jumped from {from} to {}", a.id(), a.position()),
                        );
                    }
                }
                (None, true) => self.fail(tick, format!("agent {} re-entered the grid", a.id())),
                (None, false) => {}
            }
        }
        let mut through: BTreeMap<ExitId, usize> = BTreeMap::new();
        for &(_, e, _) in &outcome.evacuated {
            *through.entry(e).or_default() += 1;
        }
        for (e, n) in through {
            let w = self.exit_widths.get(&e).copied().unwrap_or(0);
            if n > w {
                self.fail(tick, format!("{n} agents left through {e} of width {w}"));
            }
        }
        let on_grid = world.active_count();
        if on_grid > self.on_grid {
            self.fail(tick, "agents on grid increased".into());
        }
        self.snapshot(world);
    }
}
