//! Frame dumps of the grid: one character per cell, or a binary graymap.
//!
//! | state | char | gray |
//! |-------|------|------|
//! | W     | `W`  | 0    |
//! | O     | `O`  | 64   |
//! | SF    | `F`  | 96   |
//! | PS    | `X`  | 128  |
//! | P     | `P`  | 160  |
//! | S     | `S`  | 208  |
//! | E     | `E`  | 255  |

use crate::grid::{CellState, Grid};
use crate::movement::ResolutionOutcome;
use crate::sim::{TickObserver, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFormat {
    Text,
    Graymap,
}

impl FrameFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FrameFormat::Text => "txt",
            FrameFormat::Graymap => "pgm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameDump {
    pub tick: u64,
    pub format: FrameFormat,
    pub bytes: Vec<u8>,
}

pub fn frame_char(state: CellState) -> u8 {
    match state {
        CellState::Wall => b'W',
        CellState::Empty => b'E',
        CellState::Person => b'P',
        CellState::Obstacle => b'O',
        CellState::Smoke => b'S',
        CellState::SmokeFire => b'F',
        CellState::PersonSmoke => b'X',
    }
}

pub fn gray_level(state: CellState) -> u8 {
    match state {
        CellState::Wall => 0,
        CellState::Obstacle => 64,
        CellState::SmokeFire => 96,
        CellState::PersonSmoke => 128,
        CellState::Person => 160,
        CellState::Smoke => 208,
        CellState::Empty => 255,
    }
}

/// Text frames have one line per grid row, each ending in `\n`. Graymaps
/// are binary PGM (P5) with maxval 255. Exit cells render as empty floor.
pub fn render_frame(grid: &Grid, tick: u64, format: FrameFormat) -> FrameDump {
    let (w, h) = (grid.width(), grid.height());
    let bytes = match format {
        FrameFormat::Text => {
            let mut out = Vec::with_capacity((w + 1) * h);
            for row in grid.cells().chunks(w) {
                out.extend(row.iter().map(|c| frame_char(c.state())));
                out.push(b'\n');
            }
            out
        }
        FrameFormat::Graymap => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend(grid.cells().iter().map(|c| gray_level(c.state())));
            out
        }
    };
    FrameDump {
        tick,
        format,
        bytes,
    }
}

/// Collects a frame at tick 0 and every `every` ticks after.
#[derive(Debug, Clone)]
pub struct FrameRecorder {
    pub every: u64,
    pub format: FrameFormat,
    pub frames: Vec<FrameDump>,
}

impl FrameRecorder {
    pub fn new(every: u64, format: FrameFormat) -> Self {
        Self {
            every: every.max(1),
            format,
            frames: Vec::new(),
        }
    }
}

impl TickObserver for FrameRecorder {
    fn on_start(&mut self, world: &World) {
        self.frames.push(render_frame(&world.grid, 0, self.format));
    }

    fn on_tick(&mut self, world: &World, _outcome: &ResolutionOutcome) {
        if world.tick.is_multiple_of(self.every) {
            self.frames
                .push(render_frame(&world.grid, world.tick, self.format));
        }
    }
}
