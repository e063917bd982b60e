//! Tick loop, termination and per-run metrics.
//!
//! Each tick runs in a fixed phase order: snapshot, control step for every
//! active agent in id order, conflict resolution and application, smoke
//! spread, fire spread, field refresh, observation.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::agent::Agent;
use crate::behavior::{control_step, BehaviorKind, BehaviorParams, DeliberationClock};
use crate::error::{EvacError, Result};
use crate::grid::{AgentId, ExitId, ExitSpec, Grid, CELL_SIDE_M};
use crate::hazard::{step_fire, step_smoke, HazardParams};
use crate::movement::{apply, resolve, MoveIntent, ResolutionOutcome};
use crate::pathfield::FieldSet;
use crate::perception::WorldView;
use crate::rng::{replication_seed, sim_rng, SimRng};
use crate::scenario::{populate, Scenario};
use crate::stats::ReplicationStats;
use crate::TICK_SECONDS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub max_ticks: u64,
    pub replications: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            max_ticks: 3000,
            replications: 50,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_ticks < 1 {
            return Err(EvacError::InvalidParameter(
                "max_ticks must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Hook called by the tick loop. Used for invariant checking and frames.
pub trait TickObserver {
    fn on_start(&mut self, _world: &World) {}
    fn on_tick(&mut self, _world: &World, _outcome: &ResolutionOutcome) {}
}

impl TickObserver for () {}

/// Full mutable state of one run.
pub struct World {
    pub grid: Grid,
    pub exits: Vec<ExitSpec>,
    pub agents: Vec<Agent>,
    pub fields: FieldSet,
    pub tick: u64,
    pub hazard: HazardParams,
    pub behavior: BehaviorParams,
    clock: DeliberationClock,
    rng: SimRng,
    static_trapped: bool,
}

impl World {
    /// Builds the initial state: agents are placed using the run seed.
    pub fn new(scenario: &Scenario, seed: u64) -> Result<Self> {
        let mut rng = sim_rng(seed);
        let mut grid = scenario.grid.clone();
        let hazard = scenario.spec.hazard.clone();
        let agents = populate(scenario, &mut grid, &mut rng)?;
        let fields = FieldSet::compute(&grid, &scenario.exits, &hazard, 0);
        let behavior = scenario.spec.behavior.clone();
        let clock = behavior.clock(&grid);
        Ok(Self {
            grid,
            exits: scenario.exits.clone(),
            agents,
            fields,
            tick: 0,
            hazard,
            behavior,
            clock,
            rng,
            static_trapped: false,
        })
    }

    pub fn active_count(&self) -> usize {
        self.agents.iter().filter(|a| a.state.is_active()).count()
    }

    pub fn evacuated_count(&self) -> usize {
        self.agents.len() - self.active_count()
    }

    /// All agents are out, or every remaining agent is trapped and nobody
    /// moved during the last tick.
    pub fn is_finished(&self) -> bool {
        self.active_count() == 0 || self.static_trapped
    }

    /// Advances one tick.
    pub fn step(&mut self) -> Result<ResolutionOutcome> {
        self.tick += 1;
        let tick = self.tick;

        let view = WorldView::new(&self.grid, &self.exits, &self.fields, &self.agents);
        let mut intents: Vec<MoveIntent> = Vec::new();
        let mut idle: Vec<AgentId> = Vec::new();
        for agent in self.agents.iter_mut().filter(|a| a.state.is_active()) {
            match control_step(
                agent,
                &view,
                &self.behavior,
                &self.clock,
                tick,
                TICK_SECONDS,
                &mut self.rng,
            ) {
                Some(intent) => intents.push(intent),
                None => idle.push(agent.id()),
            }
        }
        drop(view);

        let outcome = resolve(
            &intents,
            &self.grid,
            self.fields.hazards(),
            &self.agents,
            &mut self.rng,
        )?;
        apply(&outcome, &mut self.grid, &mut self.agents, tick);
        for id in idle {
            self.agents[id.index()].state.blocked_steps += 1;
        }

        step_smoke(&mut self.grid, &self.hazard, &mut self.rng);
        step_fire(&mut self.grid, &self.hazard, &mut self.rng);
        self.fields
            .refresh(&self.grid, &self.exits, &self.hazard, tick);

        let moved = outcome.moved.len() + outcome.evacuated.len();
        self.static_trapped = moved == 0
            && self
                .agents
                .iter()
                .filter(|a| a.state.is_active())
                .all(|a| a.state.trapped);
        Ok(outcome)
    }

    pub fn result(&self, seed: u64) -> RunResult {
        RunResult::from_world(self, seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentOutcome {
    pub agent: AgentId,
    /// Behavior the agent was configured with.
    pub behavior: BehaviorKind,
    pub final_behavior: BehaviorKind,
    pub evac_tick: Option<u64>,
    pub distance_m: f64,
    pub exit: Option<ExitId>,
}

impl AgentOutcome {
    pub fn evac_seconds(&self) -> Option<f64> {
        self.evac_tick.map(|t| t as f64 * TICK_SECONDS)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub ticks: u64,
    pub tet_seconds: f64,
    /// Mean evacuation time over evacuated agents; 0 when nobody left.
    pub met_seconds: f64,
    /// Mean travelled distance over evacuated agents; 0 when nobody left.
    pub md_meters: f64,
    pub per_agent: Vec<AgentOutcome>,
    pub exit_counts: BTreeMap<ExitId, usize>,
    /// Agents still in the building when the run ended.
    pub trapped_count: usize,
}

impl RunResult {
    fn from_world(world: &World, seed: u64) -> Self {
        let per_agent: Vec<AgentOutcome> = world
            .agents
            .iter()
            .map(|a| AgentOutcome {
                agent: a.id(),
                behavior: a.profile.behavior.initial,
                final_behavior: a.profile.behavior.current,
                evac_tick: a.state.evacuated_at,
                distance_m: a.state.distance_moves as f64 * CELL_SIDE_M,
                exit: a.state.exit_used,
            })
            .collect();
        let mut exit_counts: BTreeMap<ExitId, usize> =
            world.exits.iter().map(|e| (e.id, 0)).collect();
        let mut last_tick = 0;
        let mut time_sum = 0.0;
        let mut dist_sum = 0.0;
        let mut evacuated = 0usize;
        for o in &per_agent {
            if let (Some(t), Some(e)) = (o.evac_tick, o.exit) {
                *exit_counts.entry(e).or_default() += 1;
                last_tick = last_tick.max(t);
                time_sum += t as f64 * TICK_SECONDS;
                dist_sum += o.distance_m;
                evacuated += 1;
            }
        }
        let mean = |s: f64| {
            if evacuated == 0 {
                0.0
            } else {
                s / evacuated as f64
            }
        };
        Self {
            seed,
            ticks: world.tick,
            tet_seconds: last_tick as f64 * TICK_SECONDS,
            met_seconds: mean(time_sum),
            md_meters: mean(dist_sum),
            trapped_count: per_agent.len() - evacuated,
            per_agent,
            exit_counts,
        }
    }

    pub fn exit_count(&self, exit: ExitId) -> usize {
        self.exit_counts.get(&exit).copied().unwrap_or(0)
    }

    pub fn behavior_exit_count(&self, behavior: BehaviorKind, exit: ExitId) -> usize {
        self.per_agent
            .iter()
            .filter(|o| o.behavior == behavior && o.exit == Some(exit))
            .count()
    }
}

/// One seeded run.
pub fn run(scenario: &Scenario, seed: u64) -> Result<RunResult> {
    run_observed(scenario, seed, &mut ())
}

pub fn run_observed<O: TickObserver + ?Sized>(
    scenario: &Scenario,
    seed: u64,
    observer: &mut O,
) -> Result<RunResult> {
    let mut world = World::new(scenario, seed)?;
    observer.on_start(&world);
    while !world.is_finished() && world.tick < scenario.spec.sim.max_ticks {
        let outcome = world.step()?;
        observer.on_tick(&world, &outcome);
    }
    Ok(world.result(seed))
}

/// Runs `n` replications in parallel, each with its own observer. Results
/// keep replication order.
pub fn replicate_observed<O, F>(
    scenario: &Scenario,
    master_seed: u64,
    n: usize,
    make: F,
) -> Result<Vec<(RunResult, O)>>
where
    O: TickObserver + Send,
    F: Fn(usize) -> O + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut obs = make(i);
            let r = run_observed(scenario, replication_seed(master_seed, i as u64), &mut obs)?;
            Ok((r, obs))
        })
        .collect()
}

pub fn replicate_runs(scenario: &Scenario, master_seed: u64, n: usize) -> Result<Vec<RunResult>> {
    Ok(replicate_observed(scenario, master_seed, n, |_| ())?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}

/// Replicates and aggregates. Needs at least two replications.
pub fn replicate(scenario: &Scenario, master_seed: u64, n: usize) -> Result<ReplicationStats> {
    if n < 2 {
        return Err(EvacError::TooFewSamples(n));
    }
    let runs = replicate_runs(scenario, master_seed, n)?;
    ReplicationStats::from_runs(&scenario.spec.name, &scenario.exit_ids(), &runs)
}
