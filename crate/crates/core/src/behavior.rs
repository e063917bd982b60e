//! The per-agent control loop and the engine of behaviors.
//!
//! Each tick an agent perceives, updates what it knows, deliberates when it
//! has to (or is allowed to), commits to an objective exit and nominates a
//! neighbor cell on the way there. Two behaviors are implemented:
//!
//! * **Nearest Exit** commits to the exit with the smallest predicted
//!   distance.
//! * **Best Predicted Exit** commits to the exit minimizing
//!   `min_t * dist * I` when `min_t >= evac_t`, else
//!   `evac_t * min_t * dist * I`, where `I` is the estimated number of agents
//!   heading for that exit.
//!
//! Behaviors are nodes of a small automaton; configured transitions move an
//! agent between them when an event fires.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::agent::Agent;
use crate::grid::{ExitId, ExitSpec, Grid, Pos};
use crate::movement::MoveIntent;
use crate::pathfield::FieldSet;
use crate::perception::{perceive, Percept, SightParams, WorldView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BehaviorKind {
    NearestExit,
    BestPredictedExit,
}

impl BehaviorKind {
    pub const ALL: [BehaviorKind; 2] = [BehaviorKind::NearestExit, BehaviorKind::BestPredictedExit];

    pub fn label(self) -> &'static str {
        match self {
            BehaviorKind::NearestExit => "NE",
            BehaviorKind::BestPredictedExit => "BPE",
        }
    }
}

impl fmt::Display for BehaviorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BehaviorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "NE" => Ok(BehaviorKind::NearestExit),
            "BPE" => Ok(BehaviorKind::BestPredictedExit),
            other => Err(format!("unknown behavior '{other}' (expected NE or BPE)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BehaviorEvent {
    ObjectiveInfeasible,
    StressExceedsTolerance,
}

impl BehaviorEvent {
    pub fn label(self) -> &'static str {
        match self {
            BehaviorEvent::ObjectiveInfeasible => "objective_infeasible",
            BehaviorEvent::StressExceedsTolerance => "stress_exceeds_tolerance",
        }
    }
}

impl FromStr for BehaviorEvent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "objective_infeasible" => Ok(BehaviorEvent::ObjectiveInfeasible),
            "stress_exceeds_tolerance" => Ok(BehaviorEvent::StressExceedsTolerance),
            other => Err(format!("unknown event '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionTable {
    edges: BTreeMap<(BehaviorKind, BehaviorEvent), BehaviorKind>,
}

impl TransitionTable {
    pub fn insert(&mut self, from: BehaviorKind, event: BehaviorEvent, to: BehaviorKind) {
        self.edges.insert((from, event), to);
    }

    pub fn next(&self, from: BehaviorKind, event: BehaviorEvent) -> Option<BehaviorKind> {
        self.edges.get(&(from, event)).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (BehaviorKind, BehaviorEvent, BehaviorKind)> + '_ {
        self.edges.iter().map(|(&(f, e), &t)| (f, e, t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BehaviorState {
    pub current: BehaviorKind,
    /// Behavior the agent was configured with; used for per-behavior tallies.
    pub initial: BehaviorKind,
}

impl BehaviorState {
    pub fn new(kind: BehaviorKind) -> Self {
        Self {
            current: kind,
            initial: kind,
        }
    }

    /// Applies a declared transition, if any. Returns whether the state changed.
    pub fn fire(&mut self, event: BehaviorEvent, table: &TransitionTable) -> bool {
        match table.next(self.current, event) {
            Some(to) if to != self.current => {
                self.current = to;
                true
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorParams {
    /// Base re-deliberation period in ticks; `None` derives it from the grid
    /// diagonal.
    pub base_period: Option<u64>,
    pub growth_divisor: u64,
    /// Consecutive blocked ticks before a lateral escape is attempted.
    pub prudential_limit: u32,
    pub sight: SightParams,
    pub transitions: TransitionTable,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        Self {
            base_period: None,
            growth_divisor: 100,
            prudential_limit: 3,
            sight: SightParams::default(),
            transitions: TransitionTable::default(),
        }
    }
}

impl BehaviorParams {
    pub fn clock(&self, grid: &Grid) -> DeliberationClock {
        DeliberationClock {
            base_period: self
                .base_period
                .unwrap_or_else(|| default_base_period(grid.width(), grid.height())),
            growth_divisor: self.growth_divisor.max(1),
        }
    }
}

/// `ceil(diagonal / 5)` in cells.
pub fn default_base_period(width: usize, height: usize) -> u64 {
    let diag = ((width * width + height * height) as f64).sqrt();
    (diag / 5.0).ceil() as u64
}

/// Indecision damping: the re-deliberation period grows with elapsed time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeliberationClock {
    pub base_period: u64,
    pub growth_divisor: u64,
}

impl DeliberationClock {
    pub fn period(&self, tick: u64) -> u64 {
        self.base_period + tick / self.growth_divisor
    }

    pub fn reconsider_allowed(&self, last_deliberation: Option<u64>, tick: u64) -> bool {
        match last_deliberation {
            None => true,
            Some(last) => tick.saturating_sub(last) >= self.period(tick),
        }
    }
}

pub fn reconsider_allowed(agent: &Agent, tick: u64, clock: &DeliberationClock) -> bool {
    clock.reconsider_allowed(agent.state.last_deliberation_tick, tick)
}

/// Unobstructed travel time: one move per tick.
pub fn min_pred_time_to(pred_dist: Option<u32>, tick_seconds: f64) -> f64 {
    match pred_dist {
        Some(d) => d as f64 * tick_seconds,
        None => f64::INFINITY,
    }
}

/// Queue drain time at one agent per exit cell per tick.
pub fn estimate_evac_time(intending: u32, width_cells: usize, tick_seconds: f64) -> f64 {
    assert!(width_cells >= 1, "exit width must be at least one cell");
    (intending as u64).div_ceil(width_cells as u64) as f64 * tick_seconds
}

/// Agents heading for `exit` as seen by the perceiver, plus itself. Exits out
/// of sight count as 1.
pub fn estimate_i(percept: &Percept, exit: ExitId) -> u32 {
    if percept.visible_exits.contains(&exit) {
        percept.oriented_counts.get(&exit).copied().unwrap_or(0) + 1
    } else {
        1
    }
}

/// Two-branch exit cost. `intending` is floored at 1.
pub fn cost(min_t: f64, evac_t: f64, pred_dist: f64, intending: u32) -> f64 {
    if !pred_dist.is_finite() || !min_t.is_finite() {
        return f64::INFINITY;
    }
    let i = intending.max(1) as f64;
    if min_t >= evac_t {
        min_t * pred_dist * i
    } else {
        evac_t * min_t * pred_dist * i
    }
}

/// Exit with the smallest predicted distance; ties go to the lowest id.
pub fn nearest_exit(fields: &FieldSet, pos: Pos) -> Option<ExitId> {
    nearest_among(fields, pos, |_| true)
}

fn nearest_among(fields: &FieldSet, pos: Pos, allowed: impl Fn(ExitId) -> bool) -> Option<ExitId> {
    fields
        .fields()
        .iter()
        .filter(|f| allowed(f.exit))
        .filter_map(|f| f.pred_dist(pos).map(|d| (d, f.exit)))
        .min()
        .map(|(_, id)| id)
}

/// Cost of every reachable exit from `pos`, ordered by exit id.
pub fn exit_costs(
    fields: &FieldSet,
    exits: &[ExitSpec],
    percept: &Percept,
    pos: Pos,
    tick_seconds: f64,
) -> Vec<(ExitId, f64)> {
    let mut out: Vec<(ExitId, f64)> = exits
        .iter()
        .filter_map(|e| {
            let d = fields.pred_dist(e.id, pos)?;
            let i = estimate_i(percept, e.id);
            let evac_t = estimate_evac_time(i, e.width_cells(), tick_seconds);
            let min_t = min_pred_time_to(Some(d), tick_seconds);
            Some((e.id, cost(min_t, evac_t, d as f64, i)))
        })
        .collect();
    out.sort_by_key(|(id, _)| *id);
    out
}

/// Argmin of `costs`, ties to the lowest exit id.
pub fn argmin_cost(costs: &[(ExitId, f64)]) -> Option<ExitId> {
    costs
        .iter()
        .filter(|(_, c)| c.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(id, _)| *id)
}

pub fn best_predicted_exit(
    fields: &FieldSet,
    exits: &[ExitSpec],
    percept: &Percept,
    pos: Pos,
    tick_seconds: f64,
) -> Option<ExitId> {
    argmin_cost(&exit_costs(fields, exits, percept, pos, tick_seconds))
}

/// Chooses and commits to an objective exit. `None` means trapped.
pub fn deliberate(
    agent: &mut Agent,
    percept: &Percept,
    fields: &FieldSet,
    exits: &[ExitSpec],
    tick: u64,
    tick_seconds: f64,
) -> Option<ExitId> {
    let pos = agent.position();
    let profile = &agent.profile;
    let choice = match profile.behavior.current {
        BehaviorKind::NearestExit => nearest_among(fields, pos, |e| profile.knows(e)),
        BehaviorKind::BestPredictedExit => {
            let known: Vec<ExitSpec> = exits
                .iter()
                .filter(|e| profile.knows(e.id))
                .cloned()
                .collect();
            best_predicted_exit(fields, &known, percept, pos, tick_seconds)
        }
    };
    agent.state.objective = choice;
    agent.state.last_deliberation_tick = Some(tick);
    choice
}

/// One iteration of the agent control loop. Returns the nominated move, or
/// `None` when the agent is trapped or has nowhere to go.
pub fn control_step<R: Rng + ?Sized>(
    agent: &mut Agent,
    view: &WorldView<'_>,
    params: &BehaviorParams,
    clock: &DeliberationClock,
    tick: u64,
    tick_seconds: f64,
    rng: &mut R,
) -> Option<MoveIntent> {
    let grid = view.grid;
    let fields = view.fields;
    let pos = agent.position();

    let infeasible = agent
        .state
        .objective
        .is_some_and(|o| fields.pred_dist(o, pos).is_none());
    let must = agent.state.objective.is_none() || infeasible;
    let allowed = reconsider_allowed(agent, tick, clock);
    let wants_crowd = |a: &Agent| a.profile.behavior.current == BehaviorKind::BestPredictedExit;

    // perceive and update knowledge
    let mut percept = perceive(
        agent,
        view,
        &params.sight,
        wants_crowd(agent) && (must || allowed),
    );
    for p in &percept.hazard_deltas {
        agent.state.learn_hazard(grid.index(*p));
    }

    let hz = fields.hazards();
    let near_hazard = hz.in_heat(pos)
        || grid
            .neighbors(pos)
            .any(|n| grid.cell(n).has_fire() || hz.in_heat(n));
    let stressed = agent.state.blocked_steps > 0 || near_hazard;

    // behavior automaton events
    let mut switched = false;
    if stressed {
        agent.state.stress += 1.0;
    }
    if !agent.state.stress_event_fired && agent.state.stress > agent.profile.stress_tolerance {
        agent.state.stress_event_fired = true;
        switched |= agent
            .profile
            .behavior
            .fire(BehaviorEvent::StressExceedsTolerance, &params.transitions);
    }
    if infeasible {
        switched |= agent
            .profile
            .behavior
            .fire(BehaviorEvent::ObjectiveInfeasible, &params.transitions);
    }
    if switched && wants_crowd(agent) && percept.oriented_counts.is_empty() {
        percept = perceive(agent, view, &params.sight, true);
    }

    let reconsider =
        allowed && (wants_crowd(agent) || switched || !percept.hazard_deltas.is_empty());
    if must || reconsider {
        deliberate(agent, &percept, fields, view.exits, tick, tick_seconds);
    }

    let Some(objective) = agent.state.objective else {
        agent.state.trapped = true;
        if !stressed {
            agent.state.stress += 1.0;
        }
        return None;
    };
    agent.state.trapped = false;

    let to = choose_move(agent, view, objective, params, rng)?;
    Some(MoveIntent {
        agent: agent.id(),
        from: pos,
        to,
    })
}

/// Movement policy toward the objective: best free descent cell (random
/// among equals), else a lateral escape once blocked long enough, else the
/// best occupied descent cell.
fn choose_move<R: Rng + ?Sized>(
    agent: &Agent,
    view: &WorldView<'_>,
    objective: ExitId,
    params: &BehaviorParams,
    rng: &mut R,
) -> Option<Pos> {
    let grid = view.grid;
    let pos = agent.position();
    let field = view.fields.field(objective)?;
    let hz = view.fields.hazards();

    let ranked: Vec<(Pos, u32)> = grid
        .neighbors(pos)
        .filter_map(|n| {
            let d = field.raw(n);
            let c = hz.cost(n)?;
            (d < field.raw(pos)).then_some((n, d.saturating_add(c)))
        })
        .collect();

    let free: Vec<(Pos, u32)> = ranked
        .iter()
        .copied()
        .filter(|(p, _)| grid.cell(*p).occupant.is_none())
        .collect();
    if !free.is_empty() {
        return Some(pick_best(&free, rng));
    }

    if agent.state.blocked_steps >= params.prudential_limit || ranked.is_empty() {
        let lateral: Vec<(Pos, u32)> = grid
            .neighbors(pos)
            .filter(|&n| hz.passable(n) && grid.cell(n).occupant.is_none())
            .filter_map(|n| field.pred_dist(n).map(|d| (n, d)))
            .collect();
        if !lateral.is_empty() {
            return Some(pick_best(&lateral, rng));
        }
    }

    if ranked.is_empty() {
        None
    } else {
        Some(pick_best(&ranked, rng))
    }
}

/// Lowest key wins; uniform choice among equal keys, in neighborhood order.
fn pick_best<R: Rng + ?Sized>(options: &[(Pos, u32)], rng: &mut R) -> Pos {
    let best = options
        .iter()
        .map(|o| o.1)
        .min()
        .expect("non-empty options");
    let tied: Vec<Pos> = options
        .iter()
        .filter(|o| o.1 == best)
        .map(|o| o.0)
        .collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.gen_range(0..tied.len())]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{AgentProfile, AgentState, Sex};
    use crate::grid::AgentId;
    use crate::hazard::HazardParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TS: f64 = 0.3;

    #[test]
    fn cost_first_branch() {
        assert_eq!(cost(10.0, 5.0, 20.0, 5), 1000.0);
    }

    #[test]
    fn cost_second_branch() {
        assert_eq!(cost(3.0, 8.0, 10.0, 4), 960.0);
    }

    #[test]
    fn cost_boundary_uses_first_branch() {
        assert_eq!(cost(3.0, 3.0, 10.0, 4), 120.0);
    }

    #[test]
    fn cost_infinite_distance() {
        assert_eq!(cost(f64::INFINITY, 1.0, f64::INFINITY, 3), f64::INFINITY);
    }

    #[test]
    fn cost_floors_intending_at_one() {
        assert_eq!(cost(2.0, 0.0, 5.0, 0), 10.0);
    }

    #[test]
    fn evac_time_examples() {
        assert!((estimate_evac_time(8, 4, TS) - 0.6).abs() < 1e-12);
        assert!((estimate_evac_time(1, 4, TS) - 0.3).abs() < 1e-12);
        assert_eq!(estimate_evac_time(0, 4, TS), 0.0);
    }

    #[test]
    fn min_pred_time_examples() {
        assert!((min_pred_time_to(Some(100), TS) - 30.0).abs() < 1e-9);
        assert_eq!(min_pred_time_to(Some(0), TS), 0.0);
        assert!((min_pred_time_to(Some(33), TS) - 9.9).abs() < 1e-9);
        assert_eq!(min_pred_time_to(None, TS), f64::INFINITY);
    }

    #[test]
    fn estimate_i_examples() {
        let mut p = Percept::default();
        assert_eq!(estimate_i(&p, ExitId(1)), 1);
        p.visible_exits.insert(ExitId(1));
        assert_eq!(estimate_i(&p, ExitId(1)), 1);
        p.oriented_counts.insert(ExitId(1), 24);
        assert_eq!(estimate_i(&p, ExitId(1)), 25);
    }

    #[test]
    fn reconsider_examples() {
        let clock = DeliberationClock {
            base_period: 15,
            growth_divisor: 100,
        };
        assert!(clock.reconsider_allowed(None, 0));
        assert!(!clock.reconsider_allowed(Some(40), 40));
        assert_eq!(clock.period(250), 17);
        assert!(!clock.reconsider_allowed(Some(234), 250));
        assert!(clock.reconsider_allowed(Some(233), 250));
    }

    #[test]
    fn default_period_from_diagonal() {
        // 50x75: diagonal ~90.1 cells
        assert_eq!(default_base_period(50, 75), 19);
    }

    #[test]
    fn transitions_fire_only_on_declared_events() {
        let mut table = TransitionTable::default();
        let mut s = BehaviorState::new(BehaviorKind::NearestExit);
        assert!(!s.fire(BehaviorEvent::StressExceedsTolerance, &table));
        assert_eq!(s.current, BehaviorKind::NearestExit);

        table.insert(
            BehaviorKind::NearestExit,
            BehaviorEvent::StressExceedsTolerance,
            BehaviorKind::BestPredictedExit,
        );
        assert!(!s.fire(BehaviorEvent::ObjectiveInfeasible, &table));
        assert!(s.fire(BehaviorEvent::StressExceedsTolerance, &table));
        assert_eq!(s.current, BehaviorKind::BestPredictedExit);
        assert_eq!(s.initial, BehaviorKind::NearestExit);
    }

    fn hall() -> (Grid, Vec<ExitSpec>) {
        let mut g = Grid::room(12, 40);
        let e1 = ExitSpec::new(ExitId(1), vec![Pos::new(5, 39), Pos::new(6, 39)]);
        let e2 = ExitSpec::new(ExitId(2), vec![Pos::new(5, 0), Pos::new(6, 0)]);
        g.carve_exit(&e1).unwrap();
        g.carve_exit(&e2).unwrap();
        (g, vec![e1, e2])
    }

    fn agent(id: u32, pos: Pos, kind: BehaviorKind, g: &Grid) -> Agent {
        Agent {
            profile: AgentProfile {
                id: AgentId(id),
                sex: Sex::Unspecified,
                age: None,
                speed: 1,
                damage_points: 0,
                stress_tolerance: 5.0,
                behavior: BehaviorState::new(kind),
                known_exits: None,
            },
            state: AgentState::new(pos, g.len()),
        }
    }

    #[test]
    fn nearest_exit_argmin_and_tie() {
        let (g, exits) = hall();
        let fs = FieldSet::compute(&g, &exits, &HazardParams::default(), 0);
        assert_eq!(nearest_exit(&fs, Pos::new(5, 30)), Some(ExitId(1)));
        assert_eq!(nearest_exit(&fs, Pos::new(5, 5)), Some(ExitId(2)));
        // equidistant row: 39 - y == y  has no integer solution, use y = 19/20
        let d1 = fs.pred_dist(ExitId(1), Pos::new(5, 19)).unwrap();
        let d2 = fs.pred_dist(ExitId(2), Pos::new(5, 19)).unwrap();
        assert_eq!((d1, d2), (20, 19));
        let mut g2 = Grid::room(12, 41);
        let a = ExitSpec::new(ExitId(1), vec![Pos::new(5, 40)]);
        let b = ExitSpec::new(ExitId(2), vec![Pos::new(5, 0)]);
        g2.carve_exit(&a).unwrap();
        g2.carve_exit(&b).unwrap();
        let fs2 = FieldSet::compute(&g2, &[a, b], &HazardParams::default(), 0);
        assert_eq!(nearest_exit(&fs2, Pos::new(5, 20)), Some(ExitId(1)));
    }

    #[test]
    fn nearest_exit_avoids_blocked_exit() {
        let (mut g, exits) = hall();
        for x in 1..11 {
            g.cell_mut(Pos::new(x, 3)).fire_level = 1;
        }
        let fs = FieldSet::compute(&g, &exits, &HazardParams::default(), 0);
        assert_eq!(nearest_exit(&fs, Pos::new(5, 8)), Some(ExitId(1)));
    }

    #[test]
    fn nearest_exit_none_when_trapped() {
        let (mut g, exits) = hall();
        for x in 1..11 {
            g.cell_mut(Pos::new(x, 3)).fire_level = 1;
            g.cell_mut(Pos::new(x, 36)).fire_level = 1;
        }
        let fs = FieldSet::compute(&g, &exits, &HazardParams::default(), 0);
        let mut a = agent(0, Pos::new(5, 20), BehaviorKind::NearestExit, &g);
        assert_eq!(nearest_exit(&fs, a.position()), None);
        assert_eq!(
            deliberate(&mut a, &Percept::default(), &fs, &exits, 7, TS),
            None
        );
        assert_eq!(a.state.last_deliberation_tick, Some(7));
    }

    #[test]
    fn bpe_picks_exhaustive_minimum() {
        let (g, exits) = hall();
        let fs = FieldSet::compute(&g, &exits, &HazardParams::default(), 0);
        let pos = Pos::new(5, 17);
        let mut percept = Percept {
            origin: pos,
            sight_range: usize::MAX,
            ..Percept::default()
        };
        percept.visible_exits.extend([ExitId(1), ExitId(2)]);
        percept.oriented_counts.insert(ExitId(1), 3);
        percept.oriented_counts.insert(ExitId(2), 40);

        // brute force over all exits by hand
        let mut best = None;
        for e in &exits {
            let d = fs.pred_dist(e.id, pos).unwrap() as f64;
            let i = percept.oriented_counts[&e.id] + 1;
            let evac = ((i as f64) / e.width_cells() as f64).ceil() * TS;
            let min_t = d * TS;
            let c = if min_t >= evac {
                min_t * d * i as f64
            } else {
                evac * min_t * d * i as f64
            };
            if best.is_none_or(|(bc, _)| c < bc) {
                best = Some((c, e.id));
            }
        }
        let mut a = agent(0, pos, BehaviorKind::BestPredictedExit, &g);
        let chosen = deliberate(&mut a, &percept, &fs, &exits, 0, TS);
        assert_eq!(chosen, best.map(|b| b.1));
        // the crowded exit is closer but loses
        assert_eq!(nearest_exit(&fs, pos), Some(ExitId(2)));
        assert_eq!(chosen, Some(ExitId(1)));
    }

    #[test]
    fn argmin_is_scale_invariant_example() {
        let costs = vec![(ExitId(1), 12.0), (ExitId(2), 7.5), (ExitId(3), 7.5)];
        let scaled: Vec<_> = costs.iter().map(|&(id, c)| (id, c * 3.7)).collect();
        assert_eq!(argmin_cost(&costs), Some(ExitId(2)));
        assert_eq!(argmin_cost(&scaled), Some(ExitId(2)));
    }

    fn step(
        a: &mut Agent,
        g: &Grid,
        exits: &[ExitSpec],
        fs: &FieldSet,
        others: &[Agent],
        tick: u64,
    ) -> Option<MoveIntent> {
        let mut all = others.to_vec();
        all.push(a.clone());
        let view = WorldView::new(g, exits, fs, &all);
        let params = BehaviorParams::default();
        let clock = params.clock(g);
        let mut rng = ChaCha8Rng::seed_from_u64(tick);
        control_step(a, &view, &params, &clock, tick, TS, &mut rng)
    }

    #[test]
    fn free_corridor_moves_forward() {
        let mut g = Grid::room(20, 3);
        let e = ExitSpec::new(ExitId(1), vec![Pos::new(19, 1)]);
        g.carve_exit(&e).unwrap();
        let exits = vec![e];
        let fs = FieldSet::compute(&g, &exits, &HazardParams::default(), 0);
        let mut a = agent(0, Pos::new(4, 1), BehaviorKind::NearestExit, &g);
        g.cell_mut(a.position()).occupant = Some(a.id());
        let intent = step(&mut a, &g, &exits, &fs, &[], 1).unwrap();
        assert_eq!(intent.to, Pos::new(5, 1));
        assert_eq!(a.state.objective, Some(ExitId(1)));
    }

    #[test]
    fn occupied_descent_is_nominated() {
        let mut g = Grid::room(20, 3);
        let e = ExitSpec::new(ExitId(1), vec![Pos::new(19, 1)]);
        g.carve_exit(&e).unwrap();
        let exits = vec![e];
        let fs = FieldSet::compute(&g, &exits, &HazardParams::default(), 0);
        let mut a = agent(0, Pos::new(4, 1), BehaviorKind::NearestExit, &g);
        let b = agent(1, Pos::new(5, 1), BehaviorKind::NearestExit, &g);
        g.cell_mut(a.position()).occupant = Some(a.id());
        g.cell_mut(b.position()).occupant = Some(b.id());
        let intent = step(&mut a, &g, &exits, &fs, &[b], 1).unwrap();
        assert_eq!(intent.to, Pos::new(5, 1));
    }

    #[test]
    fn blocked_agent_escapes_laterally() {
        let mut g = Grid::room(20, 5);
        let e = ExitSpec::new(ExitId(1), vec![Pos::new(19, 2)]);
        g.carve_exit(&e).unwrap();
        let exits = vec![e];
        let fs = FieldSet::compute(&g, &exits, &HazardParams::default(), 0);
        let mut a = agent(0, Pos::new(4, 2), BehaviorKind::NearestExit, &g);
        g.cell_mut(a.position()).occupant = Some(a.id());
        let mut others = Vec::new();
        for (i, y) in (1..=3).enumerate() {
            let b = agent(1 + i as u32, Pos::new(5, y), BehaviorKind::NearestExit, &g);
            g.cell_mut(b.position()).occupant = Some(b.id());
            others.push(b);
        }
        let first = step(&mut a, &g, &exits, &fs, &others, 1).unwrap();
        assert_eq!(first.to.x, 5, "not yet blocked: nominate occupied descent");

        a.state.blocked_steps = BehaviorParams::default().prudential_limit;
        let lateral = step(&mut a, &g, &exits, &fs, &others, 2).unwrap();
        assert_eq!(lateral.to.x, 4);
        assert_ne!(lateral.to.y, 2);
    }

    #[test]
    fn trapped_agent_has_no_intent_and_gains_stress() {
        let (mut g, exits) = hall();
        for x in 1..11 {
            g.cell_mut(Pos::new(x, 3)).fire_level = 1;
            g.cell_mut(Pos::new(x, 36)).fire_level = 1;
        }
        let fs = FieldSet::compute(&g, &exits, &HazardParams::default(), 0);
        let mut a = agent(0, Pos::new(5, 20), BehaviorKind::NearestExit, &g);
        g.cell_mut(a.position()).occupant = Some(a.id());
        assert!(step(&mut a, &g, &exits, &fs, &[], 1).is_none());
        assert!(a.state.trapped);
        assert_eq!(a.state.stress, 1.0);
    }
}
