//! What an agent can see: discrete line of sight, visible exits, crowd
//! orientation toward each exit and newly noticed hazard cells.

use std::collections::{BTreeMap, BTreeSet};

use crate::agent::Agent;
use crate::grid::{AgentId, ExitId, ExitSpec, Grid, Pos};
use crate::pathfield::FieldSet;

/// Frozen per-tick view shared by every agent's control step.
pub struct WorldView<'a> {
    pub grid: &'a Grid,
    pub exits: &'a [ExitSpec],
    pub fields: &'a FieldSet,
    /// Active agents with their position and orientation bitmask
    /// (bit `j` set when the last move decreased distance in `exits[j]`).
    crowd: Vec<(AgentId, Pos, u64)>,
    /// Fire, heat and smoke cells as grid indices.
    hazard_cells: Vec<usize>,
}

impl<'a> WorldView<'a> {
    pub fn new(
        grid: &'a Grid,
        exits: &'a [ExitSpec],
        fields: &'a FieldSet,
        agents: &[Agent],
    ) -> Self {
        assert!(exits.len() <= 64, "at most 64 exits supported");
        let crowd = agents
            .iter()
            .filter(|a| a.state.is_active())
            .map(|a| {
                let mut mask = 0u64;
                if let Some((from, to)) = a.state.last_step {
                    for (j, f) in fields.fields().iter().enumerate() {
                        if f.raw(to) < f.raw(from) {
                            mask |= 1 << j;
                        }
                    }
                }
                (a.id(), a.position(), mask)
            })
            .collect();
        let hz = fields.hazards();
        let hazard_cells = grid
            .cells()
            .iter()
            .enumerate()
            .filter(|(i, c)| c.has_smoke() || c.has_fire() || hz.in_heat(grid.pos_of(*i)))
            .map(|(i, _)| i)
            .collect();
        Self {
            grid,
            exits,
            fields,
            crowd,
            hazard_cells,
        }
    }

    pub fn exit_index(&self, id: ExitId) -> Option<usize> {
        self.exits.iter().position(|e| e.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Percept {
    pub origin: Pos,
    /// Chebyshev sight radius in effect this tick.
    pub sight_range: usize,
    pub visible_exits: BTreeSet<ExitId>,
    /// Visible agents (other than self) oriented toward each visible exit.
    pub oriented_counts: BTreeMap<ExitId, u32>,
    /// Hazard cells seen for the first time.
    pub hazard_deltas: Vec<Pos>,
}

impl Percept {
    pub fn sees(&self, grid: &Grid, pos: Pos) -> bool {
        visible(grid, self.origin, pos, self.sight_range)
    }

    /// Every visible cell, enumerated on demand.
    pub fn visible_positions(&self, grid: &Grid) -> Vec<Pos> {
        grid.positions().filter(|&p| self.sees(grid, p)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SightParams {
    /// `None` sees the whole grid.
    pub sight_range: Option<usize>,
    pub sight_range_smoke: usize,
}

impl Default for SightParams {
    fn default() -> Self {
        Self {
            sight_range: None,
            sight_range_smoke: 2,
        }
    }
}

/// True when no wall, obstacle or fire cell lies strictly between `a` and
/// `b` on the Bresenham line.
pub fn line_of_sight(grid: &Grid, a: Pos, b: Pos) -> bool {
    let (mut x, mut y) = (a.x as isize, a.y as isize);
    let (x1, y1) = (b.x as isize, b.y as isize);
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        if x == x1 && y == y1 {
            return true;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
        if x == x1 && y == y1 {
            return true;
        }
        let c = grid.cell(Pos::new(x as usize, y as usize));
        if c.structure.is_solid() || c.has_fire() {
            return false;
        }
    }
}

pub fn visible(grid: &Grid, from: Pos, to: Pos, range: usize) -> bool {
    from.chebyshev(to) <= range && line_of_sight(grid, from, to)
}

fn sight_range_for(grid: &Grid, pos: Pos, sight: &SightParams) -> usize {
    if grid.cell(pos).has_smoke() {
        sight.sight_range_smoke
    } else {
        sight.sight_range.unwrap_or(usize::MAX)
    }
}

/// Gathers the agent's view of the world. Crowd orientation is only counted
/// when `count_crowd` is set since only exit-cost deliberation consumes it.
pub fn perceive(
    agent: &Agent,
    view: &WorldView<'_>,
    sight: &SightParams,
    count_crowd: bool,
) -> Percept {
    let grid = view.grid;
    let origin = agent.position();
    let range = sight_range_for(grid, origin, sight);

    let visible_exits: BTreeSet<ExitId> = view
        .exits
        .iter()
        .filter(|e| e.cells.iter().any(|&c| visible(grid, origin, c, range)))
        .map(|e| e.id)
        .collect();

    let mut oriented_counts = BTreeMap::new();
    if count_crowd && !visible_exits.is_empty() {
        let tracked: Vec<(usize, ExitId)> = view
            .exits
            .iter()
            .enumerate()
            .filter(|(_, e)| visible_exits.contains(&e.id))
            .map(|(j, e)| (j, e.id))
            .collect();
        let mask = tracked.iter().fold(0u64, |m, (j, _)| m | 1 << j);
        for &(_, id) in &tracked {
            oriented_counts.insert(id, 0);
        }
        for &(other, pos, orient) in &view.crowd {
            if other == agent.id() || orient & mask == 0 {
                continue;
            }
            if !visible(grid, origin, pos, range) {
                continue;
            }
            for &(j, id) in &tracked {
                if orient & (1 << j) != 0 {
                    *oriented_counts.get_mut(&id).expect("tracked exit") += 1;
                }
            }
        }
    }

    let hazard_deltas = view
        .hazard_cells
        .iter()
        .filter(|&&i| !agent.state.knows_hazard(i))
        .map(|&i| grid.pos_of(i))
        .filter(|&p| visible(grid, origin, p, range))
        .collect();

    Percept {
        origin,
        sight_range: range,
        visible_exits,
        oriented_counts,
        hazard_deltas,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{AgentProfile, AgentState, Sex};
    use crate::behavior::{BehaviorKind, BehaviorState};
    use crate::grid::StructureKind;
    use crate::hazard::HazardParams;

    fn agent(id: u32, pos: Pos, grid: &Grid) -> Agent {
        Agent {
            profile: AgentProfile {
                id: AgentId(id),
                sex: Sex::Unspecified,
                age: None,
                speed: 1,
                damage_points: 0,
                stress_tolerance: 10.0,
                behavior: BehaviorState::new(BehaviorKind::BestPredictedExit),
                known_exits: None,
            },
            state: AgentState::new(pos, grid.len()),
        }
    }

    fn setup() -> (Grid, Vec<ExitSpec>) {
        let mut g = Grid::room(20, 20);
        let e1 = ExitSpec::new(ExitId(1), vec![Pos::new(10, 0), Pos::new(11, 0)]);
        let e2 = ExitSpec::new(ExitId(2), vec![Pos::new(10, 19), Pos::new(11, 19)]);
        g.carve_exit(&e1).unwrap();
        g.carve_exit(&e2).unwrap();
        (g, vec![e1, e2])
    }

    #[test]
    fn open_room_sees_exits_and_oriented_crowd() {
        let (mut g, exits) = setup();
        let fields = FieldSet::compute(&g, &exits, &HazardParams::default(), 0);
        let me = agent(0, Pos::new(5, 10), &g);
        let mut walker = agent(1, Pos::new(12, 7), &g);
        walker.state.last_step = Some((Pos::new(12, 8), Pos::new(12, 7)));
        g.cell_mut(walker.position()).occupant = Some(walker.id());
        let view = WorldView::new(&g, &exits, &fields, &[me.clone(), walker]);
        let p = perceive(&me, &view, &SightParams::default(), true);
        assert_eq!(p.visible_exits.len(), 2);
        assert_eq!(p.oriented_counts[&ExitId(1)], 1);
        assert_eq!(p.oriented_counts[&ExitId(2)], 0);
    }

    #[test]
    fn wall_occludes_exit() {
        let (mut g, exits) = setup();
        for x in 1..19 {
            g.cell_mut(Pos::new(x, 5)).structure = StructureKind::Obstacle;
        }
        g.cell_mut(Pos::new(1, 5)).structure = StructureKind::Floor;
        let fields = FieldSet::compute(&g, &exits, &HazardParams::default(), 0);
        let me = agent(0, Pos::new(10, 10), &g);
        let view = WorldView::new(&g, &exits, &fields, std::slice::from_ref(&me));
        let p = perceive(&me, &view, &SightParams::default(), false);
        assert!(!p.visible_exits.contains(&ExitId(1)));
        assert!(p.visible_exits.contains(&ExitId(2)));
    }

    #[test]
    fn smoke_shrinks_sight() {
        let (mut g, exits) = setup();
        let pos = Pos::new(10, 10);
        g.cell_mut(pos).smoke_level = 1;
        let fields = FieldSet::compute(&g, &exits, &HazardParams::default(), 0);
        let me = agent(0, pos, &g);
        let view = WorldView::new(&g, &exits, &fields, std::slice::from_ref(&me));
        let p = perceive(&me, &view, &SightParams::default(), true);
        assert_eq!(p.sight_range, 2);
        assert!(p.visible_exits.is_empty());
        let seen = p.visible_positions(&g);
        assert!(!seen.is_empty());
        assert!(seen.iter().all(|q| q.chebyshev(pos) <= 2));
        // the smoky cell itself is a newly noticed hazard
        assert_eq!(p.hazard_deltas, vec![pos]);
    }

    #[test]
    fn line_of_sight_symmetric_in_open_room() {
        let g = Grid::room(15, 15);
        for a in [Pos::new(1, 1), Pos::new(7, 3), Pos::new(13, 13)] {
            for b in [Pos::new(2, 9), Pos::new(13, 1), Pos::new(6, 6)] {
                assert!(line_of_sight(&g, a, b));
                assert!(line_of_sight(&g, b, a));
            }
        }
    }

    #[test]
    fn fire_blocks_sight() {
        let mut g = Grid::room(10, 10);
        g.cell_mut(Pos::new(5, 5)).fire_level = 1;
        assert!(!line_of_sight(&g, Pos::new(3, 5), Pos::new(7, 5)));
        // endpoints themselves never occlude
        assert!(line_of_sight(&g, Pos::new(4, 5), Pos::new(5, 5)));
    }
}
