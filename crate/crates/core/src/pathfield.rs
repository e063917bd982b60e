//! Per-exit distance fields.
//!
//! Each field holds the cost-to-go from every cell to one exit, computed by a
//! multi-source Dijkstra over the 8-connected grid. Moving into a cell costs
//! that cell's [`traversal_cost`](crate::hazard::traversal_cost); blocked
//! cells may carry a finite value (the cost of stepping out of them) but never
//! relay paths. Walls and obstacles are always unreachable.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::grid::{ExitId, ExitSpec, Grid, Pos};
use crate::hazard::{HazardField, HazardParams};

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceField {
    pub exit: ExitId,
    width: usize,
    height: usize,
    dist: Vec<u32>,
    /// Tick at which the field was computed.
    pub stamp: u64,
}

impl DistanceField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn raw(&self, pos: Pos) -> u32 {
        self.dist[pos.y * self.width + pos.x]
    }

    pub fn values(&self) -> &[u32] {
        &self.dist
    }

    /// `None` when no feasible plan to this exit exists from `pos`.
    #[inline]
    pub fn pred_dist(&self, pos: Pos) -> Option<u32> {
        match self.raw(pos) {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    pub fn is_all_unreachable(&self) -> bool {
        self.dist.iter().all(|&d| d == UNREACHABLE)
    }

    /// Matrix dump: one grid row per line, `inf` for unreachable.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if x > 0 {
                    out.push(' ');
                }
                match self.raw(Pos::new(x, y)) {
                    UNREACHABLE => out.push_str("inf"),
                    d => {
                        let _ = write!(out, "{d}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn pred_dist(field: &DistanceField, pos: Pos) -> Option<u32> {
    field.pred_dist(pos)
}

/// Multi-source Dijkstra from the exit's passable cells.
pub fn compute_field(
    grid: &Grid,
    exit: &ExitSpec,
    hazards: &HazardField,
    stamp: u64,
) -> DistanceField {
    let mut dist = vec![UNREACHABLE; grid.len()];
    let mut heap = BinaryHeap::new();
    for &p in &exit.cells {
        if hazards.passable(p) {
            let i = grid.index(p);
            dist[i] = 0;
            heap.push(Reverse((0u32, i)));
        }
    }

    while let Some(Reverse((d, i))) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        // A blocked cell may hold a label but never relays.
        let Some(enter) = hazards.cost_at(i) else {
            continue;
        };
        let nd = d + enter;
        for n in grid.neighbors(grid.pos_of(i)) {
            if grid.cell(n).structure.is_solid() {
                continue;
            }
            let j = grid.index(n);
            if nd < dist[j] {
                dist[j] = nd;
                heap.push(Reverse((nd, j)));
            }
        }
    }

    DistanceField {
        exit: exit.id,
        width: grid.width(),
        height: grid.height(),
        dist,
        stamp,
    }
}

/// Passable Moore neighbors of `pos` with strictly smaller distance, ordered
/// by the total cost of going through them (then by their distance). Ties
/// keep neighborhood order. Empty when `pos` is unreachable or a local
/// minimum.
pub fn descent_candidates(
    grid: &Grid,
    field: &DistanceField,
    hazards: &HazardField,
    pos: Pos,
) -> Vec<Pos> {
    let here = field.raw(pos);
    if here == UNREACHABLE {
        return Vec::new();
    }
    let mut out: Vec<(u32, u32, Pos)> = grid
        .neighbors(pos)
        .filter_map(|n| {
            let d = field.raw(n);
            let c = hazards.cost(n)?;
            (d < here).then_some((d.saturating_add(c), d, n))
        })
        .collect();
    out.sort_by_key(|&(total, d, _)| (total, d));
    out.into_iter().map(|(_, _, p)| p).collect()
}

/// Shared per-exit fields and the hazard snapshot they were computed from.
#[derive(Debug, Clone)]
pub struct FieldSet {
    hazards: HazardField,
    fields: Vec<DistanceField>,
}

impl FieldSet {
    pub fn compute(grid: &Grid, exits: &[ExitSpec], params: &HazardParams, tick: u64) -> Self {
        let hazards = HazardField::observe(grid, params);
        let fields = exits
            .iter()
            .map(|e| compute_field(grid, e, &hazards, tick))
            .collect();
        Self { hazards, fields }
    }

    /// Recomputes every field if the blocked set or smoke costs changed since
    /// the last computation. Returns whether anything was recomputed.
    pub fn refresh(
        &mut self,
        grid: &Grid,
        exits: &[ExitSpec],
        params: &HazardParams,
        tick: u64,
    ) -> bool {
        let hazards = HazardField::observe(grid, params);
        if hazards.same_costs(&self.hazards) {
            self.hazards = hazards;
            return false;
        }
        *self = Self {
            fields: exits
                .iter()
                .map(|e| compute_field(grid, e, &hazards, tick))
                .collect(),
            hazards,
        };
        true
    }

    pub fn hazards(&self) -> &HazardField {
        &self.hazards
    }

    pub fn fields(&self) -> &[DistanceField] {
        &self.fields
    }

    pub fn field(&self, exit: ExitId) -> Option<&DistanceField> {
        self.fields.iter().find(|f| f.exit == exit)
    }

    pub fn pred_dist(&self, exit: ExitId, pos: Pos) -> Option<u32> {
        self.field(exit).and_then(|f| f.pred_dist(pos))
    }

    pub fn descent_candidates(&self, grid: &Grid, exit: ExitId, pos: Pos) -> Vec<Pos> {
        match self.field(exit) {
            Some(f) => descent_candidates(grid, f, &self.hazards, pos),
            None => Vec::new(),
        }
    }
}
