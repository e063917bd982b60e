use std::fmt;
use std::str::FromStr;

use crate::behavior::BehaviorState;
use crate::grid::{AgentId, ExitId, Pos};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sex {
    #[default]
    Unspecified,
    Female,
    Male,
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::Unspecified => "unspecified",
            Sex::Female => "female",
            Sex::Male => "male",
        })
    }
}

impl FromStr for Sex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unspecified" => Ok(Sex::Unspecified),
            "female" => Ok(Sex::Female),
            "male" => Ok(Sex::Male),
            other => Err(format!("unknown sex '{other}'")),
        }
    }
}

/// Static traits of a pedestrian. `sex` and `age` are carried for reporting
/// only; no implemented rule reads them.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentProfile {
    pub id: AgentId,
    pub sex: Sex,
    pub age: Option<u32>,
    /// Conflict priority rank, at least 1.
    pub speed: u8,
    pub damage_points: u32,
    pub stress_tolerance: f64,
    pub behavior: BehaviorState,
    /// Exits this agent may consider. `None` means every exit.
    pub known_exits: Option<Vec<ExitId>>,
}

impl AgentProfile {
    pub fn knows(&self, exit: ExitId) -> bool {
        self.known_exits
            .as_ref()
            .is_none_or(|known| known.contains(&exit))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub position: Pos,
    pub objective: Option<ExitId>,
    pub stress: f64,
    pub distance_moves: u32,
    pub blocked_steps: u32,
    pub last_deliberation_tick: Option<u64>,
    pub evacuated_at: Option<u64>,
    pub exit_used: Option<ExitId>,
    /// Most recent displacement; kept through stalls so queued agents still
    /// read as heading somewhere.
    pub last_step: Option<(Pos, Pos)>,
    pub stress_event_fired: bool,
    pub trapped: bool,
    known_hazards: Vec<u64>,
}

impl AgentState {
    pub fn new(position: Pos, grid_cells: usize) -> Self {
        Self {
            position,
            objective: None,
            stress: 0.0,
            distance_moves: 0,
            blocked_steps: 0,
            last_deliberation_tick: None,
            evacuated_at: None,
            exit_used: None,
            last_step: None,
            stress_event_fired: false,
            trapped: false,
            known_hazards: vec![0; grid_cells.div_ceil(64)],
        }
    }

    pub fn knows_hazard(&self, index: usize) -> bool {
        self.known_hazards[index / 64] & (1 << (index % 64)) != 0
    }

    pub fn learn_hazard(&mut self, index: usize) {
        self.known_hazards[index / 64] |= 1 << (index % 64);
    }

    pub fn is_active(&self) -> bool {
        self.evacuated_at.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub profile: AgentProfile,
    pub state: AgentState,
}

impl Agent {
    pub fn id(&self) -> AgentId {
        self.profile.id
    }

    pub fn position(&self) -> Pos {
        self.state.position
    }
}
