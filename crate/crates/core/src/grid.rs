//! Bounded cellular space: cells, the seven-state projection, Moore
//! neighborhoods and exits.
//!
//! The grid is row-major with `y` growing downwards. The outermost ring is
//! wall except where exit cells are cut into it.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::error::{EvacError, Result};

/// Side length of one cell in meters.
pub const CELL_SIDE_M: f64 = 0.4;

/// Moore offsets in row-major order. Every neighborhood enumeration in the
/// crate walks this table so that seeded runs are bit-reproducible.
pub const MOORE_OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Pos {
    pub x: usize,
    pub y: usize,
}

impl Pos {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    pub fn chebyshev(self, other: Pos) -> usize {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// Exit identifier. Displayed as `E<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExitId(pub u16);

impl fmt::Display for ExitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    Wall,
    Obstacle,
    Floor,
    ExitFloor(ExitId),
}

impl StructureKind {
    /// Walls and obstacles: never change, never host anything.
    pub fn is_solid(self) -> bool {
        matches!(self, StructureKind::Wall | StructureKind::Obstacle)
    }
}

/// Projection of a cell onto the seven model states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellState {
    Wall,
    Empty,
    Person,
    Obstacle,
    Smoke,
    SmokeFire,
    PersonSmoke,
}

impl CellState {
    pub const ALL: [CellState; 7] = [
        CellState::Wall,
        CellState::Empty,
        CellState::Person,
        CellState::Obstacle,
        CellState::Smoke,
        CellState::SmokeFire,
        CellState::PersonSmoke,
    ];

    /// Short label: W, E, P, O, S, SF, PS.
    pub fn label(self) -> &'static str {
        match self {
            CellState::Wall => "W",
            CellState::Empty => "E",
            CellState::Person => "P",
            CellState::Obstacle => "O",
            CellState::Smoke => "S",
            CellState::SmokeFire => "SF",
            CellState::PersonSmoke => "PS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub structure: StructureKind,
    pub smoke_level: u8,
    pub fire_level: u8,
    pub occupant: Option<AgentId>,
    pub combustible: bool,
}

impl Cell {
    pub const fn new(structure: StructureKind) -> Self {
        Self {
            structure,
            smoke_level: 0,
            fire_level: 0,
            occupant: None,
            combustible: false,
        }
    }

    pub fn has_smoke(&self) -> bool {
        self.smoke_level > 0
    }

    pub fn has_fire(&self) -> bool {
        self.fire_level > 0
    }

    pub fn is_exit(&self) -> bool {
        matches!(self.structure, StructureKind::ExitFloor(_))
    }

    /// Walkable structure (floor or exit), ignoring hazards and occupancy.
    pub fn is_walkable(&self) -> bool {
        !self.structure.is_solid()
    }

    pub fn state(&self) -> CellState {
        match self.structure {
            StructureKind::Wall => CellState::Wall,
            StructureKind::Obstacle => CellState::Obstacle,
            _ if self.has_fire() => CellState::SmokeFire,
            _ => match (self.occupant.is_some(), self.has_smoke()) {
                (true, true) => CellState::PersonSmoke,
                (true, false) => CellState::Person,
                (false, true) => CellState::Smoke,
                (false, false) => CellState::Empty,
            },
        }
    }
}

pub fn state_of(cell: &Cell) -> CellState {
    cell.state()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExitSpec {
    pub id: ExitId,
    pub cells: Vec<Pos>,
}

impl ExitSpec {
    pub fn new(id: ExitId, cells: Vec<Pos>) -> Self {
        Self { id, cells }
    }

    pub fn width_cells(&self) -> usize {
        self.cells.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl Grid {
    /// A closed rectangular room: wall ring around floor.
    pub fn room(width: usize, height: usize) -> Self {
        let mut cells = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let ring = x == 0 || y == 0 || x + 1 == width || y + 1 == height;
                cells.push(Cell::new(if ring {
                    StructureKind::Wall
                } else {
                    StructureKind::Floor
                }));
            }
        }
        Self {
            width,
            height,
            cells,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_side_m(&self) -> f64 {
        CELL_SIDE_M
    }

    pub fn in_bounds(&self, pos: Pos) -> bool {
        pos.x < self.width && pos.y < self.height
    }

    pub fn check(&self, pos: Pos) -> Result<()> {
        if self.in_bounds(pos) {
            Ok(())
        } else {
            Err(EvacError::OutOfBounds {
                pos,
                width: self.width,
                height: self.height,
            })
        }
    }

    #[inline]
    pub fn index(&self, pos: Pos) -> usize {
        debug_assert!(self.in_bounds(pos));
        pos.y * self.width + pos.x
    }

    #[inline]
    pub fn pos_of(&self, index: usize) -> Pos {
        Pos::new(index % self.width, index / self.width)
    }

    #[inline]
    pub fn cell(&self, pos: Pos) -> &Cell {
        &self.cells[self.index(pos)]
    }

    #[inline]
    pub fn cell_mut(&mut self, pos: Pos) -> &mut Cell {
        let i = self.index(pos);
        &mut self.cells[i]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [Cell] {
        &mut self.cells
    }

    pub fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Pos::new(x, y)))
    }

    pub fn is_boundary(&self, pos: Pos) -> bool {
        pos.x == 0 || pos.y == 0 || pos.x + 1 == self.width || pos.y + 1 == self.height
    }

    /// In-bounds Moore neighbors of `pos` in [`MOORE_OFFSETS`] order.
    /// Callers guarantee `pos` is in bounds.
    #[inline]
    pub fn neighbors(&self, pos: Pos) -> impl Iterator<Item = Pos> + '_ {
        let (w, h) = (self.width as isize, self.height as isize);
        MOORE_OFFSETS.iter().filter_map(move |&(dx, dy)| {
            let x = pos.x as isize + dx;
            let y = pos.y as isize + dy;
            (x >= 0 && y >= 0 && x < w && y < h).then(|| Pos::new(x as usize, y as usize))
        })
    }

    /// Checked Moore neighborhood.
    pub fn moore_neighborhood(&self, pos: Pos) -> Result<Vec<Pos>> {
        self.check(pos)?;
        Ok(self.neighbors(pos).collect())
    }

    /// Marks the exit's cells as exit floor. Cells must be in bounds.
    pub fn carve_exit(&mut self, exit: &ExitSpec) -> Result<()> {
        for &p in &exit.cells {
            self.check(p)?;
            *self.cell_mut(p) = Cell::new(StructureKind::ExitFloor(exit.id));
        }
        Ok(())
    }

    pub fn count_structure(&self, kind: StructureKind) -> usize {
        self.cells.iter().filter(|c| c.structure == kind).count()
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| c.occupant.is_some()).count()
    }
}

/// Free function form of [`Grid::moore_neighborhood`].
pub fn moore_neighborhood(grid: &Grid, pos: Pos) -> Result<Vec<Pos>> {
    grid.moore_neighborhood(pos)
}

/// Number of cells along a metric length, requiring exact division by the
/// cell side.
pub fn cells_for_length(meters: f64) -> Result<usize> {
    if !meters.is_finite() || meters <= 0.0 {
        return Err(EvacError::InvalidScenario(format!(
            "dimension {meters} m must be positive"
        )));
    }
    let n = meters / CELL_SIDE_M;
    let rounded = n.round();
    if (n - rounded).abs() > 1e-6 {
        return Err(EvacError::InvalidScenario(format!(
            "dimension {meters} m is not divisible by cell size {CELL_SIDE_M} m"
        )));
    }
    Ok(rounded as usize)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeometryViolation {
    GridTooSmall { width: usize, height: usize },
    OpenBoundary(Pos),
    EmptyExit(ExitId),
    DuplicateExit(ExitId),
    ExitOutOfBounds(ExitId, Pos),
    ExitOffBoundary(ExitId, Pos),
    ExitCellMismatch(ExitId, Pos),
    NonContiguousExit(ExitId),
    UndeclaredExitCell(Pos),
    SolidCellNotInert(Pos),
    OccupantInFire(Pos),
    UnreachableExit(ExitId),
}

impl fmt::Display for GeometryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GeometryViolation::*;
        match self {
            GridTooSmall { width, height } => {
                write!(f, "grid {width}x{height} too small for a closed room")
            }
            OpenBoundary(p) => write!(f, "open boundary at {p}"),
            EmptyExit(id) => write!(f, "exit {id} has no cells"),
            DuplicateExit(id) => write!(f, "exit {id} declared twice"),
            ExitOutOfBounds(id, p) => write!(f, "exit {id} cell {p} out of bounds"),
            ExitOffBoundary(id, p) => {
                write!(f, "exit {id} cell {p} is not on the boundary ring")
            }
            ExitCellMismatch(id, p) => {
                write!(f, "exit {id} cell {p} is not marked as that exit")
            }
            NonContiguousExit(id) => write!(f, "non-contiguous exit {id}"),
            UndeclaredExitCell(p) => write!(f, "exit cell {p} belongs to no declared exit"),
            SolidCellNotInert(p) => {
                write!(f, "wall/obstacle cell {p} holds smoke, fire or an occupant")
            }
            OccupantInFire(p) => write!(f, "occupied cell {p} is on fire"),
            UnreachableExit(id) => write!(f, "exit {id} is unreachable from every floor cell"),
        }
    }
}

/// Checks closed boundary, exit shape, inert solid cells and exit
/// reachability. Never mutates.
pub fn validate_geometry(
    grid: &Grid,
    exits: &[ExitSpec],
) -> std::result::Result<(), Vec<GeometryViolation>> {
    let mut out = Vec::new();
    if grid.width() < 3 || grid.height() < 3 {
        out.push(GeometryViolation::GridTooSmall {
            width: grid.width(),
            height: grid.height(),
        });
        return Err(out);
    }

    for p in grid.positions() {
        let c = grid.cell(p);
        if grid.is_boundary(p)
            && !matches!(
                c.structure,
                StructureKind::Wall | StructureKind::ExitFloor(_)
            )
        {
            out.push(GeometryViolation::OpenBoundary(p));
        }
        if c.structure.is_solid() && (c.has_smoke() || c.has_fire() || c.occupant.is_some()) {
            out.push(GeometryViolation::SolidCellNotInert(p));
        }
        if c.has_fire() && c.occupant.is_some() {
            out.push(GeometryViolation::OccupantInFire(p));
        }
    }

    let mut declared = BTreeSet::new();
    let mut seen_ids = BTreeSet::new();
    for exit in exits {
        if !seen_ids.insert(exit.id) {
            out.push(GeometryViolation::DuplicateExit(exit.id));
        }
        if exit.cells.is_empty() {
            out.push(GeometryViolation::EmptyExit(exit.id));
            continue;
        }
        let mut shape_ok = true;
        for &p in &exit.cells {
            if !grid.in_bounds(p) {
                out.push(GeometryViolation::ExitOutOfBounds(exit.id, p));
                shape_ok = false;
                continue;
            }
            declared.insert(p);
            if !grid.is_boundary(p) {
                out.push(GeometryViolation::ExitOffBoundary(exit.id, p));
                shape_ok = false;
            }
            if grid.cell(p).structure != StructureKind::ExitFloor(exit.id) {
                out.push(GeometryViolation::ExitCellMismatch(exit.id, p));
            }
        }
        if shape_ok && !is_contiguous_line(&exit.cells) {
            out.push(GeometryViolation::NonContiguousExit(exit.id));
        }
        if shape_ok && !exit_reachable(grid, exit) {
            out.push(GeometryViolation::UnreachableExit(exit.id));
        }
    }

    for p in grid.positions() {
        if grid.cell(p).is_exit() && !declared.contains(&p) {
            out.push(GeometryViolation::UndeclaredExitCell(p));
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Collinear along one axis with consecutive coordinates.
fn is_contiguous_line(cells: &[Pos]) -> bool {
    let same_row = cells.iter().all(|p| p.y == cells[0].y);
    let same_col = cells.iter().all(|p| p.x == cells[0].x);
    let mut coords: Vec<usize> = if same_row {
        cells.iter().map(|p| p.x).collect()
    } else if same_col {
        cells.iter().map(|p| p.y).collect()
    } else {
        return false;
    };
    coords.sort_unstable();
    coords.windows(2).all(|w| w[1] == w[0] + 1)
}

/// Breadth-first flood from the exit through walkable cells until a floor
/// cell is found.
fn exit_reachable(grid: &Grid, exit: &ExitSpec) -> bool {
    let mut seen = vec![false; grid.len()];
    let mut queue: VecDeque<Pos> = exit.cells.iter().copied().collect();
    for &p in &exit.cells {
        seen[grid.index(p)] = true;
    }
    while let Some(p) = queue.pop_front() {
        for n in grid.neighbors(p) {
            let i = grid.index(n);
            if seen[i] {
                continue;
            }
            seen[i] = true;
            let cell = grid.cell(n);
            match cell.structure {
                StructureKind::Floor => return true,
                StructureKind::ExitFloor(_) => queue.push_back(n),
                _ => {}
            }
        }
    }
    false
}
