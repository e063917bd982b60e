//! Cell-centric conflict resolution.
//!
//! Agents first nominate a target cell; each nominated cell then hosts a
//! contest among its nominees. A request for a cell that is currently
//! occupied is only granted if the occupant itself moves away this tick,
//! which is resolved by walking the "wants the cell of" chain down to its
//! sink. Cycles stall every member. All grants are applied at once.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;

use crate::agent::{Agent, AgentProfile};
use crate::error::{EvacError, Result};
use crate::grid::{AgentId, ExitId, Grid, Pos, StructureKind};
use crate::hazard::HazardField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MoveIntent {
    pub agent: AgentId,
    pub from: Pos,
    pub to: Pos,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResolutionOutcome {
    /// Movers that stay on the grid, with their new position.
    pub moved: Vec<(AgentId, Pos)>,
    pub stalled: Vec<AgentId>,
    /// Movers that stepped onto an exit cell.
    pub evacuated: Vec<(AgentId, ExitId, Pos)>,
}

impl ResolutionOutcome {
    pub fn len(&self) -> usize {
        self.moved.len() + self.stalled.len() + self.evacuated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Anything that carries the conflict priority of an agent.
pub trait Contender {
    fn agent_id(&self) -> AgentId;
    fn speed(&self) -> u8;
    fn damage_points(&self) -> u32;
}

impl Contender for AgentProfile {
    fn agent_id(&self) -> AgentId {
        self.id
    }
    fn speed(&self) -> u8 {
        self.speed
    }
    fn damage_points(&self) -> u32 {
        self.damage_points
    }
}

impl Contender for Agent {
    fn agent_id(&self) -> AgentId {
        self.profile.id
    }
    fn speed(&self) -> u8 {
        self.profile.speed
    }
    fn damage_points(&self) -> u32 {
        self.profile.damage_points
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Unvisited,
    Visiting,
    Granted,
    Stalled,
}

fn validate<P: Contender>(
    intents: &[MoveIntent],
    grid: &Grid,
    hazards: &HazardField,
    profiles: &[P],
) -> Result<()> {
    let bad = |m: String| Err(EvacError::MalformedIntent(m));
    let mut seen = HashSet::new();
    for it in intents {
        if !seen.insert(it.agent) {
            return bad(format!("agent {} has more than one intent", it.agent));
        }
        if profiles.get(it.agent.index()).map(|p| p.agent_id()) != Some(it.agent) {
            return bad(format!("no profile for agent {}", it.agent));
        }
        if !grid.in_bounds(it.from) || !grid.in_bounds(it.to) {
            return bad(format!("intent of {} leaves the grid", it.agent));
        }
        if grid.cell(it.from).occupant != Some(it.agent) {
            return bad(format!("agent {} is not at {}", it.agent, it.from));
        }
        if it.from.chebyshev(it.to) != 1 {
            return bad(format!(
                "target {} is not a Moore neighbor of {}",
                it.to, it.from
            ));
        }
        if !hazards.passable(it.to) {
            return bad(format!("target {} of {} is blocked", it.to, it.agent));
        }
    }
    Ok(())
}

/// Resolves one tick of move intents. Intents are processed in agent-id
/// order and contested cells in row-major order so the random draws are
/// reproducible regardless of how the intents were produced.
pub fn resolve<P: Contender, R: Rng + ?Sized>(
    intents: &[MoveIntent],
    grid: &Grid,
    hazards: &HazardField,
    profiles: &[P],
    rng: &mut R,
) -> Result<ResolutionOutcome> {
    validate(intents, grid, hazards, profiles)?;

    let mut intents = intents.to_vec();
    intents.sort_by_key(|i| i.agent);
    let by_agent: HashMap<AgentId, usize> = intents
        .iter()
        .enumerate()
        .map(|(k, it)| (it.agent, k))
        .collect();

    let mut contests: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, it) in intents.iter().enumerate() {
        contests.entry(grid.index(it.to)).or_default().push(k);
    }

    // one winner per nominated cell: faster, then less damaged, then random
    let mut is_winner = vec![false; intents.len()];
    for nominees in contests.values() {
        let key = |k: usize| {
            let p = &profiles[intents[k].agent.index()];
            (std::cmp::Reverse(p.speed()), p.damage_points())
        };
        let best = nominees
            .iter()
            .map(|&k| key(k))
            .min()
            .expect("non-empty contest");
        let tied: Vec<usize> = nominees
            .iter()
            .copied()
            .filter(|&k| key(k) == best)
            .collect();
        let w = if tied.len() == 1 {
            tied[0]
        } else {
            tied[rng.gen_range(0..tied.len())]
        };
        is_winner[w] = true;
    }

    let mut marks = vec![Mark::Unvisited; intents.len()];
    for start in 0..intents.len() {
        if marks[start] != Mark::Unvisited {
            continue;
        }
        // follow the dependency chain to its sink, then unwind
        let mut path = Vec::new();
        let mut k = start;
        let verdict = loop {
            match marks[k] {
                Mark::Granted => break true,
                Mark::Stalled | Mark::Visiting => break false,
                Mark::Unvisited => {}
            }
            if !is_winner[k] {
                marks[k] = Mark::Stalled;
                break false;
            }
            match grid.cell(intents[k].to).occupant {
                None => {
                    marks[k] = Mark::Granted;
                    break true;
                }
                Some(occ) => match by_agent.get(&occ) {
                    None => {
                        marks[k] = Mark::Stalled;
                        break false;
                    }
                    Some(&next) => {
                        marks[k] = Mark::Visiting;
                        path.push(k);
                        k = next;
                    }
                },
            }
        };
        let fin = if verdict {
            Mark::Granted
        } else {
            Mark::Stalled
        };
        for p in path {
            marks[p] = fin;
        }
    }

    let mut out = ResolutionOutcome::default();
    for (k, it) in intents.iter().enumerate() {
        match (marks[k], grid.cell(it.to).structure) {
            (Mark::Granted, StructureKind::ExitFloor(exit)) => {
                out.evacuated.push((it.agent, exit, it.to))
            }
            (Mark::Granted, _) => out.moved.push((it.agent, it.to)),
            _ => out.stalled.push(it.agent),
        }
    }
    Ok(out)
}

/// Applies a resolution: occupancy updated atomically, evacuees removed,
/// counters advanced.
pub fn apply(outcome: &ResolutionOutcome, grid: &mut Grid, agents: &mut [Agent], tick: u64) {
    let movers = outcome
        .moved
        .iter()
        .map(|&(id, to)| (id, to))
        .chain(outcome.evacuated.iter().map(|&(id, _, to)| (id, to)));
    for (id, _) in movers.clone() {
        let from = agents[id.index()].state.position;
        grid.cell_mut(from).occupant = None;
    }
    for (id, to) in movers {
        let st = &mut agents[id.index()].state;
        st.last_step = Some((st.position, to));
        st.position = to;
        st.distance_moves += 1;
        st.blocked_steps = 0;
    }
    for &(id, to) in &outcome.moved {
        grid.cell_mut(to).occupant = Some(id);
    }
    for &(id, exit, _) in &outcome.evacuated {
        let st = &mut agents[id.index()].state;
        st.evacuated_at = Some(tick);
        st.exit_used = Some(exit);
    }
    for &id in &outcome.stalled {
        agents[id.index()].state.blocked_steps += 1;
    }
}
