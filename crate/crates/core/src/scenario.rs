//! Scenario description, its text format, and the bundled presets.
//!
//! The format is line oriented. The first non-blank line must be the header
//! `evac-scenario 1`. Top-level `key = value` lines come first, followed by
//! `[section]` blocks. `#` starts a comment. See `docs/scenario-format.md`.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use rand::seq::index::sample;
use rand::Rng;

use crate::agent::{Agent, AgentProfile, AgentState, Sex};
use crate::behavior::{BehaviorEvent, BehaviorKind, BehaviorParams, BehaviorState};
use crate::error::{EvacError, Result};
use crate::grid::{
    cells_for_length, validate_geometry, AgentId, ExitId, ExitSpec, Grid, Pos, StructureKind,
};
use crate::hazard::{HazardField, HazardParams};
use crate::sim::SimConfig;

pub const FORMAT_HEADER: &str = "evac-scenario 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    North,
    South,
    East,
    West,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::North => "north",
            Side::South => "south",
            Side::East => "east",
            Side::West => "west",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "north" => Ok(Side::North),
            "south" => Ok(Side::South),
            "east" => Ok(Side::East),
            "west" => Ok(Side::West),
            other => Err(format!("unknown side '{other}'")),
        }
    }
}

/// An exit as an opening in one of the outer walls. `offset` is the first
/// cell along the wall, counted from the north-west corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitDecl {
    pub id: u16,
    pub side: Side,
    pub offset: usize,
    pub width: usize,
}

impl ExitDecl {
    pub fn cells(&self, width: usize, height: usize) -> Vec<Pos> {
        let span = self.offset..self.offset + self.width;
        match self.side {
            Side::North => span.map(|x| Pos::new(x, 0)).collect(),
            Side::South => span.map(|x| Pos::new(x, height - 1)).collect(),
            Side::West => span.map(|y| Pos::new(0, y)).collect(),
            Side::East => span.map(|y| Pos::new(width - 1, y)).collect(),
        }
    }
}

/// A set of cells: an inclusive rectangle or an explicit list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Region {
    Rect {
        x0: usize,
        y0: usize,
        x1: usize,
        y1: usize,
    },
    Cells(Vec<Pos>),
}

impl Region {
    pub fn positions(&self) -> Vec<Pos> {
        match self {
            Region::Rect { x0, y0, x1, y1 } => (*y0..=*y1)
                .flat_map(|y| (*x0..=*x1).map(move |x| Pos::new(x, y)))
                .collect(),
            Region::Cells(cells) => cells.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Combustible {
    AllFloor,
    /// Empty means nothing burns.
    Regions(Vec<Region>),
}

/// Inclusive integer range; `lo == hi` is a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntRange {
    pub lo: u32,
    pub hi: u32,
}

impl IntRange {
    pub const fn fixed(v: u32) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo..=self.hi)
        }
    }
}

/// Half-open real range `[lo, hi)`; `lo == hi` is a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRange {
    pub lo: f64,
    pub hi: f64,
}

impl RealRange {
    pub const fn fixed(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo..self.hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Placement {
    Uniform,
    Cells(Vec<Pos>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentGroup {
    pub count: usize,
    pub behavior: BehaviorKind,
    pub placement: Placement,
    pub speed: IntRange,
    pub damage: IntRange,
    pub stress_tolerance: RealRange,
    pub sex: Sex,
    pub age: Option<u32>,
    pub known_exits: Option<Vec<u16>>,
}

impl AgentGroup {
    pub fn uniform(count: usize, behavior: BehaviorKind) -> Self {
        Self {
            count,
            behavior,
            placement: Placement::Uniform,
            speed: IntRange { lo: 1, hi: 3 },
            damage: IntRange::fixed(0),
            stress_tolerance: RealRange::fixed(50.0),
            sex: Sex::Unspecified,
            age: None,
            known_exits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub width_m: f64,
    pub height_m: f64,
    pub population: usize,
    pub sim: SimConfig,
    pub hazard: HazardParams,
    pub behavior: BehaviorParams,
    pub exits: Vec<ExitDecl>,
    pub walls: Vec<Region>,
    pub obstacles: Vec<Region>,
    pub combustible: Combustible,
    pub fire_seeds: Vec<Region>,
    pub groups: Vec<AgentGroup>,
}

impl ScenarioSpec {
    /// Empty room with default parameters and no exits or agents.
    pub fn new(name: &str, width_m: f64, height_m: f64) -> Self {
        Self {
            name: name.to_string(),
            width_m,
            height_m,
            population: 0,
            sim: SimConfig::default(),
            hazard: HazardParams::default(),
            behavior: BehaviorParams::default(),
            exits: Vec::new(),
            walls: Vec::new(),
            obstacles: Vec::new(),
            combustible: Combustible::Regions(Vec::new()),
            fire_seeds: Vec::new(),
            groups: Vec::new(),
        }
    }

    /// Validates the description and lays out the static grid.
    pub fn build(&self) -> Result<Scenario> {
        let invalid = |m: String| EvacError::InvalidScenario(m);
        self.sim.validate()?;
        self.hazard.validate()?;
        let w = cells_for_length(self.width_m)?;
        let h = cells_for_length(self.height_m)?;
        let mut grid = Grid::room(w, h);

        let in_bounds = |what: &str, region: &Region| -> Result<Vec<Pos>> {
            let cells = region.positions();
            if let Some(p) = cells.iter().find(|p| p.x >= w || p.y >= h) {
                return Err(invalid(format!("{what} cell {p} outside the {w}x{h} grid")));
            }
            Ok(cells)
        };

        let mut exits = Vec::new();
        for d in &self.exits {
            let along = match d.side {
                Side::North | Side::South => w,
                Side::East | Side::West => h,
            };
            if d.width == 0 || d.offset == 0 || d.offset + d.width > along - 1 {
                return Err(invalid(format!(
                    "exit {} (offset {}, width {}) does not fit inside the {} wall",
                    d.id,
                    d.offset,
                    d.width,
                    d.side.label()
                )));
            }
            let spec = ExitSpec::new(ExitId(d.id), d.cells(w, h));
            grid.carve_exit(&spec)?;
            exits.push(spec);
        }
        for (kind, regions) in [
            (StructureKind::Wall, &self.walls),
            (StructureKind::Obstacle, &self.obstacles),
        ] {
            for r in regions {
                for p in in_bounds("wall/obstacle", r)? {
                    if grid.cell(p).is_exit() {
                        return Err(invalid(format!("wall/obstacle cell {p} overlaps an exit")));
                    }
                    grid.cell_mut(p).structure = kind;
                }
            }
        }
        match &self.combustible {
            Combustible::AllFloor => {
                for p in grid.positions().collect::<Vec<_>>() {
                    if grid.cell(p).structure == StructureKind::Floor {
                        grid.cell_mut(p).combustible = true;
                    }
                }
            }
            Combustible::Regions(regions) => {
                for r in regions {
                    for p in in_bounds("combustible", r)? {
                        if grid.cell(p).structure == StructureKind::Floor {
                            grid.cell_mut(p).combustible = true;
                        }
                    }
                }
            }
        }
        for r in &self.fire_seeds {
            for p in in_bounds("fire seed", r)? {
                let c = grid.cell_mut(p);
                if c.structure != StructureKind::Floor {
                    return Err(invalid(format!("fire seed {p} is not a floor cell")));
                }
                c.fire_level = 1;
                c.smoke_level = 1;
            }
        }
        validate_geometry(&grid, &exits).map_err(EvacError::InvalidGeometry)?;

        let total: usize = self.groups.iter().map(|g| g.count).sum();
        if total != self.population {
            return Err(invalid(format!(
                "group counts sum to {total} but population is {}",
                self.population
            )));
        }
        let exit_ids: BTreeSet<u16> = self.exits.iter().map(|e| e.id).collect();
        for (i, g) in self.groups.iter().enumerate() {
            let n = i + 1;
            if g.speed.lo < 1 || g.speed.lo > g.speed.hi || g.speed.hi > u8::MAX as u32 {
                return Err(invalid(format!(
                    "group {n}: speed range must lie in 1..=255"
                )));
            }
            if g.damage.lo > g.damage.hi {
                return Err(invalid(format!("group {n}: empty damage range")));
            }
            let st = g.stress_tolerance;
            if !(st.lo.is_finite() && st.hi.is_finite() && st.lo >= 0.0 && st.lo <= st.hi) {
                return Err(invalid(format!(
                    "group {n}: invalid stress_tolerance range"
                )));
            }
            if let Placement::Cells(cells) = &g.placement {
                if cells.len() != g.count {
                    return Err(invalid(format!(
                        "group {n}: {} cells listed for count {}",
                        cells.len(),
                        g.count
                    )));
                }
            }
            if let Some(known) = &g.known_exits {
                if let Some(k) = known.iter().find(|k| !exit_ids.contains(k)) {
                    return Err(invalid(format!("group {n}: unknown exit {k}")));
                }
            }
        }
        Ok(Scenario {
            spec: self.clone(),
            grid,
            exits,
        })
    }
}

/// A validated scenario with its static grid (structure, combustibles and
/// fire seeds; no agents).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub grid: Grid,
    pub exits: Vec<ExitSpec>,
}

impl Scenario {
    pub fn exit_ids(&self) -> Vec<ExitId> {
        self.exits.iter().map(|e| e.id).collect()
    }
}

/// Places every group on `grid` and draws agent profiles. Explicit cells are
/// reserved first; uniform groups then share one draw without replacement
/// over floor cells free of hazards.
pub fn populate<R: Rng + ?Sized>(
    scenario: &Scenario,
    grid: &mut Grid,
    rng: &mut R,
) -> Result<Vec<Agent>> {
    let hz = HazardField::observe(grid, &scenario.spec.hazard);
    let eligible = |grid: &Grid, p: Pos| {
        let c = grid.cell(p);
        c.structure == StructureKind::Floor
            && !c.has_fire()
            && !c.has_smoke()
            && !hz.in_heat(p)
            && c.occupant.is_none()
    };

    let groups = &scenario.spec.groups;
    let mut placed: Vec<Vec<Pos>> = vec![Vec::new(); groups.len()];
    let mut reserved = BTreeSet::new();
    for (g, slot) in groups.iter().zip(placed.iter_mut()) {
        if let Placement::Cells(cells) = &g.placement {
            for &p in cells {
                if !grid.in_bounds(p) || !eligible(grid, p) || !reserved.insert(p) {
                    return Err(EvacError::InvalidScenario(format!(
                        "agent cell {p} is not a free, hazard-free floor cell"
                    )));
                }
            }
            slot.clone_from(cells);
        }
    }
    let pool: Vec<Pos> = grid
        .positions()
        .filter(|&p| eligible(grid, p) && !reserved.contains(&p))
        .collect();
    let uniform_total: usize = groups
        .iter()
        .filter(|g| g.placement == Placement::Uniform)
        .map(|g| g.count)
        .sum();
    if uniform_total > pool.len() {
        return Err(EvacError::InvalidScenario(format!(
            "{uniform_total} agents do not fit on {} free floor cells",
            pool.len()
        )));
    }
    let mut drawn = sample(rng, pool.len(), uniform_total)
        .into_iter()
        .map(|i| pool[i]);
    for (g, slot) in groups.iter().zip(placed.iter_mut()) {
        if g.placement == Placement::Uniform {
            slot.extend(drawn.by_ref().take(g.count));
        }
    }

    let mut agents = Vec::with_capacity(scenario.spec.population);
    let cells = grid.len();
    for (g, slot) in groups.iter().zip(placed) {
        for pos in slot {
            let id = AgentId(agents.len() as u32);
            let profile = AgentProfile {
                id,
                sex: g.sex,
                age: g.age,
                speed: g.speed.sample(rng) as u8,
                damage_points: g.damage.sample(rng),
                stress_tolerance: g.stress_tolerance.sample(rng),
                behavior: BehaviorState::new(g.behavior),
                known_exits: g
                    .known_exits
                    .as_ref()
                    .map(|k| k.iter().map(|&e| ExitId(e)).collect()),
            };
            grid.cell_mut(pos).occupant = Some(id);
            agents.push(Agent {
                profile,
                state: AgentState::new(pos, cells),
            });
        }
    }
    Ok(agents)
}

/// Parse or validation failure.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    Syntax { line: usize, message: String },
    Invalid(EvacError),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Syntax { line, message } => write!(f, "line {line}: {message}"),
            ScenarioError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

impl From<EvacError> for ScenarioError {
    fn from(e: EvacError) -> Self {
        ScenarioError::Invalid(e)
    }
}

fn syntax<T>(line: usize, message: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError::Syntax {
        line,
        message: message.into(),
    })
}

struct Entry {
    line: usize,
    key: String,
    value: String,
    used: bool,
}

struct Block {
    name: Option<String>,
    line: usize,
    entries: Vec<Entry>,
}

impl Block {
    fn one(&mut self, key: &str) -> Result<Option<(usize, String)>, ScenarioError> {
        let mut found = None;
        for e in self.entries.iter_mut().filter(|e| e.key == key) {
            if found.is_some() {
                return syntax(e.line, format!("duplicate key '{key}'"));
            }
            e.used = true;
            found = Some((e.line, e.value.clone()));
        }
        Ok(found)
    }

    fn required(&mut self, key: &str) -> Result<(usize, String), ScenarioError> {
        match self.one(key)? {
            Some(v) => Ok(v),
            None => syntax(self.line, format!("missing key '{key}'")),
        }
    }

    fn all(&mut self, key: &str) -> Vec<(usize, String)> {
        self.entries
            .iter_mut()
            .filter(|e| e.key == key)
            .map(|e| {
                e.used = true;
                (e.line, e.value.clone())
            })
            .collect()
    }

    fn finish(&self) -> Result<(), ScenarioError> {
        match self.entries.iter().find(|e| !e.used) {
            Some(e) => syntax(e.line, format!("unknown key '{}'", e.key)),
            None => Ok(()),
        }
    }
}

fn value<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ScenarioError>
where
    T::Err: fmt::Display,
{
    raw.parse()
        .or_else(|e| syntax(line, format!("bad value '{raw}' for '{key}': {e}")))
}

fn opt<T: std::str::FromStr>(b: &mut Block, key: &str, default: T) -> Result<T, ScenarioError>
where
    T::Err: fmt::Display,
{
    match b.one(key)? {
        Some((line, raw)) => value(line, key, &raw),
        None => Ok(default),
    }
}

fn req<T: std::str::FromStr>(b: &mut Block, key: &str) -> Result<T, ScenarioError>
where
    T::Err: fmt::Display,
{
    let (line, raw) = b.required(key)?;
    value(line, key, &raw)
}

fn parse_cells(line: usize, raw: &str) -> Result<Vec<Pos>, ScenarioError> {
    raw.split_whitespace()
        .map(|tok| {
            let (x, y) = match tok.split_once(',') {
                Some(xy) => xy,
                None => return syntax(line, format!("cell '{tok}' is not of the form x,y")),
            };
            Ok(Pos::new(value(line, "cell", x)?, value(line, "cell", y)?))
        })
        .collect()
}

fn parse_rect(line: usize, raw: &str) -> Result<Region, ScenarioError> {
    let v: Vec<usize> = raw
        .split_whitespace()
        .map(|t| value(line, "rect", t))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x0, y0, x1, y1] if x0 <= x1 && y0 <= y1 => Ok(Region::Rect { x0, y0, x1, y1 }),
        _ => syntax(
            line,
            format!("rect '{raw}' must be 'x0 y0 x1 y1' with x0 <= x1, y0 <= y1"),
        ),
    }
}

fn regions(b: &mut Block, rect_key: &str, cells_key: &str) -> Result<Vec<Region>, ScenarioError> {
    let mut out = Vec::new();
    for (line, raw) in b.all(rect_key) {
        out.push(parse_rect(line, &raw)?);
    }
    for (line, raw) in b.all(cells_key) {
        out.push(Region::Cells(parse_cells(line, &raw)?));
    }
    Ok(out)
}

fn parse_int_range(line: usize, key: &str, raw: &str) -> Result<IntRange, ScenarioError> {
    match raw.split_once("..") {
        Some((lo, hi)) => Ok(IntRange {
            lo: value(line, key, lo)?,
            hi: value(line, key, hi)?,
        }),
        None => Ok(IntRange::fixed(value(line, key, raw)?)),
    }
}

fn parse_real_range(line: usize, key: &str, raw: &str) -> Result<RealRange, ScenarioError> {
    match raw.split_once("..") {
        Some((lo, hi)) => Ok(RealRange {
            lo: value(line, key, lo)?,
            hi: value(line, key, hi)?,
        }),
        None => Ok(RealRange::fixed(value(line, key, raw)?)),
    }
}

fn tokenize(text: &str) -> Result<Vec<Block>, ScenarioError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, l)) if l == FORMAT_HEADER => {}
        Some((n, l)) => {
            return syntax(n, format!("expected header '{FORMAT_HEADER}', found '{l}'"))
        }
        None => return syntax(1, "empty scenario"),
    }
    let mut blocks = vec![Block {
        name: None,
        line: 1,
        entries: Vec::new(),
    }];
    for (n, l) in lines {
        if let Some(rest) = l.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return syntax(n, format!("malformed section header '{l}'"));
            };
            blocks.push(Block {
                name: Some(name.trim().to_string()),
                line: n,
                entries: Vec::new(),
            });
            continue;
        }
        let Some((k, v)) = l.split_once('=') else {
            return syntax(n, format!("expected 'key = value', found '{l}'"));
        };
        let key = k.trim();
        if key.is_empty() {
            return syntax(n, "empty key");
        }
        blocks.last_mut().expect("top block").entries.push(Entry {
            line: n,
            key: key.to_string(),
            value: v.trim().to_string(),
            used: false,
        });
    }
    Ok(blocks)
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let spec = parse_unchecked(text)?;
    spec.build()?;
    Ok(spec)
}

/// Parses without the semantic validation done by [`ScenarioSpec::build`].
pub fn parse_unchecked(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let mut blocks = tokenize(text)?.into_iter();
    let mut top = blocks.next().expect("top block");
    let mut spec = ScenarioSpec::new(
        &top.required("name")?.1,
        req(&mut top, "width_m")?,
        req(&mut top, "height_m")?,
    );
    spec.population = req(&mut top, "population")?;
    spec.sim.seed = opt(&mut top, "seed", spec.sim.seed)?;
    spec.sim.max_ticks = opt(&mut top, "max_ticks", spec.sim.max_ticks)?;
    spec.sim.replications = opt(&mut top, "replications", spec.sim.replications)?;
    top.finish()?;

    let mut seen_single = BTreeSet::new();
    for mut b in blocks {
        let name = b.name.clone().expect("section name");
        if matches!(name.as_str(), "hazard" | "behavior" | "fire")
            && !seen_single.insert(name.clone())
        {
            return syntax(b.line, format!("section [{name}] repeated"));
        }
        match name.as_str() {
            "hazard" => {
                let h = &mut spec.hazard;
                h.beta_smoke = opt(&mut b, "beta_smoke", h.beta_smoke)?;
                h.beta_fire = opt(&mut b, "beta_fire", h.beta_fire)?;
                h.max_level = opt(&mut b, "max_level", h.max_level)?;
                h.heat_radius = opt(&mut b, "heat_radius", h.heat_radius)?;
                h.smoke_weight = opt(&mut b, "smoke_weight", h.smoke_weight)?;
            }
            "behavior" => {
                let p = &mut spec.behavior;
                if let Some((line, raw)) = b.one("base_period")? {
                    p.base_period = if raw == "auto" {
                        None
                    } else {
                        Some(value(line, "base_period", &raw)?)
                    };
                }
                p.growth_divisor = opt(&mut b, "growth_divisor", p.growth_divisor)?;
                p.prudential_limit = opt(&mut b, "prudential_limit", p.prudential_limit)?;
                if let Some((line, raw)) = b.one("sight_range")? {
                    p.sight.sight_range = if raw == "full" {
                        None
                    } else {
                        Some(value(line, "sight_range", &raw)?)
                    };
                }
                p.sight.sight_range_smoke =
                    opt(&mut b, "sight_range_smoke", p.sight.sight_range_smoke)?;
            }
            "transition" => {
                let from: BehaviorKind = req(&mut b, "from")?;
                let event: BehaviorEvent = req(&mut b, "event")?;
                let to: BehaviorKind = req(&mut b, "to")?;
                spec.behavior.transitions.insert(from, event, to);
            }
            "exit" => spec.exits.push(ExitDecl {
                id: req(&mut b, "id")?,
                side: req(&mut b, "side")?,
                offset: req(&mut b, "offset")?,
                width: req(&mut b, "width")?,
            }),
            "wall" => spec.walls.extend(regions(&mut b, "rect", "cells")?),
            "obstacle" => spec.obstacles.extend(regions(&mut b, "rect", "cells")?),
            "fire" => {
                let listed = regions(&mut b, "combustible_rect", "combustible_cells")?;
                spec.combustible = match b.one("combustible")? {
                    Some((line, raw)) => match raw.as_str() {
                        "all-floor" if listed.is_empty() => Combustible::AllFloor,
                        "all-floor" => {
                            return syntax(
                                line,
                                "combustible = all-floor excludes combustible_rect/cells",
                            )
                        }
                        "none" if listed.is_empty() => Combustible::Regions(Vec::new()),
                        "none" => {
                            return syntax(
                                line,
                                "combustible = none excludes combustible_rect/cells",
                            )
                        }
                        other => {
                            return syntax(
                                line,
                                format!("combustible must be all-floor or none, found '{other}'"),
                            )
                        }
                    },
                    None => Combustible::Regions(listed),
                };
                spec.fire_seeds = regions(&mut b, "seed_rect", "seed_cells")?;
            }
            "group" => {
                let count = req(&mut b, "count")?;
                let behavior = req(&mut b, "behavior")?;
                let mut g = AgentGroup::uniform(count, behavior);
                let cells = b.one("cells")?;
                g.placement = match (
                    opt(&mut b, "placement", "uniform".to_string())?.as_str(),
                    cells,
                ) {
                    ("uniform", None) => Placement::Uniform,
                    ("cells", Some((line, raw))) => Placement::Cells(parse_cells(line, &raw)?),
                    ("cells", None) => {
                        return syntax(b.line, "placement = cells needs a 'cells' key")
                    }
                    ("uniform", Some((line, _))) => {
                        return syntax(line, "'cells' requires placement = cells")
                    }
                    (other, _) => return syntax(b.line, format!("unknown placement '{other}'")),
                };
                if let Some((line, raw)) = b.one("speed")? {
                    g.speed = parse_int_range(line, "speed", &raw)?;
                }
                if let Some((line, raw)) = b.one("damage")? {
                    g.damage = parse_int_range(line, "damage", &raw)?;
                }
                if let Some((line, raw)) = b.one("stress_tolerance")? {
                    g.stress_tolerance = parse_real_range(line, "stress_tolerance", &raw)?;
                }
                g.sex = opt(&mut b, "sex", g.sex)?;
                if let Some((line, raw)) = b.one("age")? {
                    g.age = Some(value(line, "age", &raw)?);
                }
                if let Some((line, raw)) = b.one("known_exits")? {
                    g.known_exits = Some(
                        raw.split_whitespace()
                            .map(|t| value(line, "known_exits", t))
                            .collect::<Result<_, _>>()?,
                    );
                }
                spec.groups.push(g);
            }
            other => return syntax(b.line, format!("unknown section [{other}]")),
        }
        b.finish()?;
    }
    Ok(spec)
}

fn fmt_cells(cells: &[Pos]) -> String {
    cells
        .iter()
        .map(|p| format!("{},{}", p.x, p.y))
        .collect::<Vec<_>>()
        .join(" ")
}

fn emit_regions(out: &mut String, rect_key: &str, cells_key: &str, regions: &[Region]) {
    for r in regions {
        match r {
            Region::Rect { x0, y0, x1, y1 } => writeln!(out, "{rect_key} = {x0} {y0} {x1} {y1}"),
            Region::Cells(c) => writeln!(out, "{cells_key} = {}", fmt_cells(c)),
        }
        .expect("write to string");
    }
}

fn fmt_int_range(r: IntRange) -> String {
    if r.lo == r.hi {
        r.lo.to_string()
    } else {
        format!("{}..{}", r.lo, r.hi)
    }
}

fn fmt_real_range(r: RealRange) -> String {
    if r.lo == r.hi {
        r.lo.to_string()
    } else {
        format!("{}..{}", r.lo, r.hi)
    }
}

/// Writes a scenario in the text format. [`parse_scenario`] reads it back to
/// an equal spec.
pub fn emit_scenario(spec: &ScenarioSpec) -> String {
    let mut s = String::new();
    let o = &mut s;
    let w = |o: &mut String, args: fmt::Arguments<'_>| {
        o.write_fmt(args).expect("write to string");
        o.push('\n');
    };
    w(o, format_args!("{FORMAT_HEADER}"));
    w(o, format_args!("name = {}", spec.name));
    w(o, format_args!("width_m = {}", spec.width_m));
    w(o, format_args!("height_m = {}", spec.height_m));
    w(o, format_args!("population = {}", spec.population));
    w(o, format_args!("seed = {}", spec.sim.seed));
    w(o, format_args!("max_ticks = {}", spec.sim.max_ticks));
    w(o, format_args!("replications = {}", spec.sim.replications));

    let h = &spec.hazard;
    w(o, format_args!("\n[hazard]"));
    w(o, format_args!("beta_smoke = {}", h.beta_smoke));
    w(o, format_args!("beta_fire = {}", h.beta_fire));
    w(o, format_args!("max_level = {}", h.max_level));
    w(o, format_args!("heat_radius = {}", h.heat_radius));
    w(o, format_args!("smoke_weight = {}", h.smoke_weight));

    let b = &spec.behavior;
    w(o, format_args!("\n[behavior]"));
    match b.base_period {
        Some(p) => w(o, format_args!("base_period = {p}")),
        None => w(o, format_args!("base_period = auto")),
    }
    w(o, format_args!("growth_divisor = {}", b.growth_divisor));
    w(o, format_args!("prudential_limit = {}", b.prudential_limit));
    match b.sight.sight_range {
        Some(r) => w(o, format_args!("sight_range = {r}")),
        None => w(o, format_args!("sight_range = full")),
    }
    w(
        o,
        format_args!("sight_range_smoke = {}", b.sight.sight_range_smoke),
    );
    for (from, event, to) in b.transitions.iter() {
        w(o, format_args!("\n[transition]"));
        w(o, format_args!("from = {}", from.label()));
        w(o, format_args!("event = {}", event.label()));
        w(o, format_args!("to = {}", to.label()));
    }

    for e in &spec.exits {
        w(o, format_args!("\n[exit]"));
        w(o, format_args!("id = {}", e.id));
        w(o, format_args!("side = {}", e.side.label()));
        w(o, format_args!("offset = {}", e.offset));
        w(o, format_args!("width = {}", e.width));
    }
    if !spec.walls.is_empty() {
        w(o, format_args!("\n[wall]"));
        emit_regions(o, "rect", "cells", &spec.walls);
    }
    if !spec.obstacles.is_empty() {
        w(o, format_args!("\n[obstacle]"));
        emit_regions(o, "rect", "cells", &spec.obstacles);
    }

    w(o, format_args!("\n[fire]"));
    match &spec.combustible {
        Combustible::AllFloor => w(o, format_args!("combustible = all-floor")),
        Combustible::Regions(r) if r.is_empty() => w(o, format_args!("combustible = none")),
        Combustible::Regions(r) => emit_regions(o, "combustible_rect", "combustible_cells", r),
    }
    emit_regions(o, "seed_rect", "seed_cells", &spec.fire_seeds);

    for g in &spec.groups {
        w(o, format_args!("\n[group]"));
        w(o, format_args!("count = {}", g.count));
        w(o, format_args!("behavior = {}", g.behavior.label()));
        match &g.placement {
            Placement::Uniform => w(o, format_args!("placement = uniform")),
            Placement::Cells(c) => {
                w(o, format_args!("placement = cells"));
                w(o, format_args!("cells = {}", fmt_cells(c)));
            }
        }
        w(o, format_args!("speed = {}", fmt_int_range(g.speed)));
        w(o, format_args!("damage = {}", fmt_int_range(g.damage)));
        w(
            o,
            format_args!("stress_tolerance = {}", fmt_real_range(g.stress_tolerance)),
        );
        w(o, format_args!("sex = {}", g.sex));
        if let Some(a) = g.age {
            w(o, format_args!("age = {a}"));
        }
        if let Some(k) = &g.known_exits {
            let ids: Vec<String> = k.iter().map(ToString::to_string).collect();
            w(o, format_args!("known_exits = {}", ids.join(" ")));
        }
    }
    s
}

pub const PRESET_NAMES: [&str; 7] = [
    "caseA", "caseB", "caseC", "caseD", "caseE", "caseF", "caseG",
];

/// Fire block near E2: 2x2 cells, three cells in from the east wall.
pub const FIRE_BLOCK: Region = Region::Rect {
    x0: 45,
    y0: 13,
    x1: 46,
    y1: 14,
};

/// Combustible zone around the fire block. Floor outside it does not burn.
pub const FIRE_ZONE: Region = Region::Rect {
    x0: 40,
    y0: 8,
    x1: 46,
    y1: 19,
};

/// Smoke spread coefficient used by the fire cases.
pub const FIRE_CASE_BETA_SMOKE: f64 = 0.07;

fn base_case(name: &str) -> ScenarioSpec {
    let mut s = ScenarioSpec::new(name, 20.0, 30.0);
    s.population = 625;
    s.exits = vec![
        ExitDecl {
            id: 1,
            side: Side::South,
            offset: 1,
            width: 4,
        },
        ExitDecl {
            id: 2,
            side: Side::East,
            offset: 12,
            width: 4,
        },
    ];
    s
}

fn with_fire(mut s: ScenarioSpec, beta_fire: f64) -> ScenarioSpec {
    s.combustible = Combustible::Regions(vec![FIRE_ZONE]);
    s.fire_seeds = vec![FIRE_BLOCK];
    s.hazard.beta_smoke = FIRE_CASE_BETA_SMOKE;
    s.hazard.beta_fire = beta_fire;
    s
}

/// The seven bundled experiment cases.
pub fn preset(name: &str) -> Option<ScenarioSpec> {
    use BehaviorKind::{BestPredictedExit as Bpe, NearestExit as Ne};
    let default_fire = HazardParams::default().beta_fire;
    let single = |name: &str, b: BehaviorKind| {
        let mut s = base_case(name);
        s.groups = vec![AgentGroup::uniform(625, b)];
        s
    };
    let mixed = |name: &str| {
        let mut s = base_case(name);
        s.groups = vec![AgentGroup::uniform(313, Ne), AgentGroup::uniform(312, Bpe)];
        s
    };
    Some(match name {
        "caseA" => single(name, Ne),
        "caseB" => with_fire(single(name, Ne), default_fire),
        "caseC" => single(name, Bpe),
        "caseD" => with_fire(single(name, Bpe), default_fire),
        "caseE" => mixed(name),
        "caseF" => with_fire(mixed(name), 0.25),
        "caseG" => with_fire(mixed(name), 0.5),
        _ => return None,
    })
}
