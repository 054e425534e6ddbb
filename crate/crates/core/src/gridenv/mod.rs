//! Single-room gridworld whose task is a dependency-closed set of subtasks.
//!
//! The global workflow: opening the door needs the key picked up first;
//! dropping the ball needs the ball in hand and the box opened; the goal
//! only counts once every selected subtask is complete. A design selects a
//! subset of subtasks (goal is always implied) and the room is seeded with
//! exactly the objects those subtasks need.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::rng::RandomStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subtask {
    PickupKey,
    OpenDoor,
    PickupBall,
    OpenBox,
    DropBall,
}

pub const ALL_SUBTASKS: [Subtask; 5] = [
    Subtask::PickupKey,
    Subtask::OpenDoor,
    Subtask::PickupBall,
    Subtask::OpenBox,
    Subtask::DropBall,
];

impl Subtask {
    pub fn dependencies(self) -> &'static [Subtask] {
        match self {
            Subtask::PickupKey | Subtask::PickupBall | Subtask::OpenBox => &[],
            Subtask::OpenDoor => &[Subtask::PickupKey],
            Subtask::DropBall => &[Subtask::PickupBall, Subtask::OpenBox],
        }
    }
}

/// A set of subtasks; the goal is always part of the task and not listed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GridDesign {
    pub subtasks: BTreeSet<Subtask>,
}

impl GridDesign {
    /// Accepts only dependency-closed sets.
    pub fn new<I: IntoIterator<Item = Subtask>>(subtasks: I) -> Result<Self> {
        let subtasks: BTreeSet<_> = subtasks.into_iter().collect();
        for s in &subtasks {
            for dep in s.dependencies() {
                if !subtasks.contains(dep) {
                    return Err(Error::Design(format!("{s:?} requires {dep:?}")));
                }
            }
        }
        Ok(Self { subtasks })
    }

    /// Closes an arbitrary selection under the workflow dependencies.
    pub fn closed<I: IntoIterator<Item = Subtask>>(selection: I) -> Self {
        let mut subtasks: BTreeSet<_> = selection.into_iter().collect();
        loop {
            let missing: Vec<_> = subtasks
                .iter()
                .flat_map(|s| s.dependencies())
                .filter(|d| !subtasks.contains(d))
                .copied()
                .collect();
            if missing.is_empty() {
                break;
            }
            subtasks.extend(missing);
        }
        Self { subtasks }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("design serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: GridDesign =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        Self::new(raw.subtasks)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Empty,
    Wall,
    Key,
    Door { open: bool },
    Ball,
    Box { open: bool },
    Goal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carried {
    Key,
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    Left,
    Right,
    Forward,
    Pickup,
    Drop,
    Toggle,
}

pub const GRID_ACTIONS: [GridAction; 6] = [
    GridAction::Left,
    GridAction::Right,
    GridAction::Forward,
    GridAction::Pickup,
    GridAction::Drop,
    GridAction::Toggle,
];

pub const DEFAULT_GRID_SIZE: usize = 8;
pub const DEFAULT_GRID_HORIZON: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridStepOutcome {
    pub reward: f64,
    pub done: bool,
    pub succeeded: bool,
}

#[derive(Debug, Clone)]
pub struct GridWorld {
    pub width: usize,
    pub height: usize,
    cells: Vec<Cell>,
    pub agent: (usize, usize),
    /// 0=east, 1=south, 2=west, 3=north.
    pub dir: usize,
    pub carrying: Option<Carried>,
    pub design: GridDesign,
    completed: BTreeSet<Subtask>,
    paid: f64,
    steps: usize,
    horizon: usize,
    step_penalty: f64,
    done: bool,
    succeeded: bool,
}

/// Place required objects and the agent on distinct random empty cells of a
/// walled single room.
pub fn build_grid(
    design: &GridDesign,
    stream: &mut RandomStream,
    size: usize,
    horizon: usize,
    step_penalty: f64,
) -> Result<GridWorld> {
    if size < 3 {
        return Err(Error::Capacity(format!("grid size {size} leaves no interior")));
    }
    let mut cells = vec![Cell::Empty; size * size];
    for x in 0..size {
        for y in 0..size {
            if x == 0 || y == 0 || x + 1 == size || y + 1 == size {
                cells[y * size + x] = Cell::Wall;
            }
        }
    }

    let mut wanted = vec![Cell::Goal];
    if design.subtasks.contains(&Subtask::PickupKey) {
        wanted.push(Cell::Key);
    }
    if design.subtasks.contains(&Subtask::OpenDoor) {
        wanted.push(Cell::Door { open: false });
    }
    if design.subtasks.contains(&Subtask::PickupBall) {
        wanted.push(Cell::Ball);
    }
    if design.subtasks.contains(&Subtask::OpenBox) {
        wanted.push(Cell::Box { open: false });
    }

    let mut empty: Vec<usize> = (0..cells.len()).filter(|&i| cells[i] == Cell::Empty).collect();
    if empty.len() < wanted.len() + 1 {
        return Err(Error::Capacity(format!(
            "{} objects plus the agent exceed {} empty cells",
            wanted.len(),
            empty.len()
        )));
    }
    for obj in wanted {
        let slot = stream.below(empty.len());
        cells[empty.swap_remove(slot)] = obj;
    }
    let agent_idx = empty[stream.below(empty.len())];
    let agent = (agent_idx % size, agent_idx / size);

    Ok(GridWorld {
        width: size,
        height: size,
        cells,
        agent,
        dir: stream.below(4),
        carrying: None,
        design: design.clone(),
        completed: BTreeSet::new(),
        steps: 0,
        horizon,
        step_penalty,
        done: false,
        succeeded: false,
    })
}

impl GridWorld {
    pub fn cell(&self, x: usize, y: usize) -> Cell {
        self.cells[y * self.width + x]
    }

    fn set_cell(&mut self, x: usize, y: usize, c: Cell) {
        self.cells[y * self.width + x] = c;
    }

    pub fn completed(&self) -> &BTreeSet<Subtask> {
        &self.completed
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn succeeded(&self) -> bool {
        self.succeeded
    }

    fn ahead(&self) -> (usize, usize) {
        let (x, y) = self.agent;
        match self.dir {
            0 => (x + 1, y),
            1 => (x, y + 1),
            2 => (x - 1, y),
            _ => (x, y - 1),
        }
    }

    fn deps_met(&self, s: Subtask) -> bool {
        s.dependencies().iter().all(|d| self.completed.contains(d))
    }

    /// Marks `s` complete if it is part of the design, still pending, and its
    /// dependencies are done. Returns the potential reward earned.
    fn complete(&mut self, s: Subtask) -> f64 {
        if self.design.subtasks.contains(&s) && !self.completed.contains(&s) && self.deps_met(s) {
            self.completed.insert(s);
            1.0 / self.design.subtasks.len() as f64
        } else {
            0.0
        }
    }

    pub fn step(&mut self, action: GridAction) -> Result<GridStepOutcome> {
        if self.done {
            return Err(Error::Contract("episode is already terminal".into()));
        }
        self.steps += 1;
        let mut reward = -self.step_penalty;
        let (ax, ay) = self.ahead();
        let ahead = self.cell(ax, ay);

        match action {
            GridAction::Left => self.dir = (self.dir + 3) % 4,
            GridAction::Right => self.dir = (self.dir + 1) % 4,
            GridAction::Forward => {
                let walkable = matches!(ahead, Cell::Empty | Cell::Goal | Cell::Door { open: true });
                if walkable {
                    self.agent = (ax, ay);
                }
            }
            GridAction::Pickup => {
                if self.carrying.is_none() {
                    match ahead {
                        Cell::Key => {
                            self.carrying = Some(Carried::Key);
                            self.set_cell(ax, ay, Cell::Empty);
                            reward += self.complete(Subtask::PickupKey);
                        }
                        Cell::Ball => {
                            self.carrying = Some(Carried::Ball);
                            self.set_cell(ax, ay, Cell::Empty);
                            reward += self.complete(Subtask::PickupBall);
                        }
                        _ => {}
                    }
                }
            }
            GridAction::Drop => match (self.carrying, ahead) {
                (Some(Carried::Ball), Cell::Box { open: true }) => {
                    // ball deposited into the box; the box stays in place
                    self.carrying = None;
                    reward += self.complete(Subtask::DropBall);
                }
                (Some(c), Cell::Empty) => {
                    self.carrying = None;
                    self.set_cell(ax, ay, if c == Carried::Key { Cell::Key } else { Cell::Ball });
                }
                _ => {}
            },
            GridAction::Toggle => match ahead {
                Cell::Door { open: false } if self.carrying == Some(Carried::Key) => {
                    if self.deps_met(Subtask::OpenDoor) {
                        self.set_cell(ax, ay, Cell::Door { open: true });
                        reward += self.complete(Subtask::OpenDoor);
                    }
                }
                Cell::Box { open: false } => {
                    self.set_cell(ax, ay, Cell::Box { open: true });
                    reward += self.complete(Subtask::OpenBox);
                }
                _ => {}
            },
        }

        debug_assert!(
            self.completed.iter().all(|s| self.deps_met(*s)),
            "completion order broke the workflow"
        );

        if self.cell(self.agent.0, self.agent.1) == Cell::Goal
            && self.completed == self.design.subtasks
        {
            self.done = true;
            self.succeeded = true;
            reward += 1.0;
        } else if self.steps >= self.horizon {
            self.done = true;
            reward += -1.0;
        }
        Ok(GridStepOutcome { reward, done: self.done, succeeded: self.succeeded })
    }
}

/// Cell channels for the observation encoding, one per distinguishable kind.
pub const GRID_CHANNELS: usize = 9;

fn channel(c: Cell) -> usize {
    match c {
        Cell::Empty => 0,
        Cell::Wall => 1,
        Cell::Key => 2,
        Cell::Door { open: false } => 3,
        Cell::Door { open: true } => 4,
        Cell::Ball => 5,
        Cell::Box { open: false } => 6,
        Cell::Box { open: true } => 7,
        Cell::Goal => 8,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridObservation {
    /// width × height × GRID_CHANNELS one-hot volume, row-major.
    pub grid: Vec<f64>,
    /// Agent pose, carried object, and completion flags.
    pub agent: Vec<f64>,
}

pub fn grid_observation(world: &GridWorld) -> GridObservation {
    let mut grid = vec![0.0; world.width * world.height * GRID_CHANNELS];
    for y in 0..world.height {
        for x in 0..world.width {
            let base = (y * world.width + x) * GRID_CHANNELS;
            grid[base + channel(world.cell(x, y))] = 1.0;
        }
    }
    let mut agent = vec![
        world.agent.0 as f64 / world.width as f64,
        world.agent.1 as f64 / world.height as f64,
    ];
    for d in 0..4 {
        agent.push(if world.dir == d { 1.0 } else { 0.0 });
    }
    for c in [None, Some(Carried::Key), Some(Carried::Ball)] {
        agent.push(if world.carrying == c { 1.0 } else { 0.0 });
    }
    for s in ALL_SUBTASKS {
        agent.push(if world.completed().contains(&s) { 1.0 } else { 0.0 });
    }
    GridObservation { grid, agent }
}

/// Length of `GridObservation::agent`.
pub const GRID_AGENT_FEATURES: usize = 2 + 4 + 3 + 5;

#[cfg(test)]
mod tests {
    use super::*;

    fn world(design: &GridDesign, seed: u64) -> GridWorld {
        build_grid(design, &mut RandomStream::from_seed(seed), 8, 100, 0.0).unwrap()
    }

    #[test]
    fn closure_validates_and_closes() {
        assert!(GridDesign::new([Subtask::DropBall]).is_err());
        assert!(GridDesign::new([Subtask::OpenDoor]).is_err());
        let closed = GridDesign::closed([Subtask::DropBall]);
        assert_eq!(
            closed.subtasks.into_iter().collect::<Vec<_>>(),
            vec![Subtask::PickupBall, Subtask::OpenBox, Subtask::DropBall]
        );
        let sample =
            GridDesign::new([Subtask::PickupKey, Subtask::PickupBall, Subtask::OpenBox]);
        assert!(sample.is_ok());
    }

    #[test]
    fn json_roundtrip_uses_snake_case_names() {
        let d = GridDesign::closed([Subtask::OpenDoor]);
        let json = d.to_json();
        assert!(json.contains("pickup_key") && json.contains("open_door"));
        assert_eq!(GridDesign::from_json(&json).unwrap(), d);
        assert!(GridDesign::from_json(r#"{"subtasks":["drop_ball"]}"#).is_err());
    }

    #[test]
    fn build_places_exactly_the_needed_objects() {
        let d = GridDesign::new([Subtask::PickupKey]).unwrap();
        let w = world(&d, 5);
        let mut keys = 0;
        let mut goals = 0;
        let mut others = 0;
        for y in 0..w.height {
            for x in 0..w.width {
                match w.cell(x, y) {
                    Cell::Key => keys += 1,
                    Cell::Goal => goals += 1,
                    Cell::Empty | Cell::Wall => {}
                    _ => others += 1,
                }
            }
        }
        assert_eq!((keys, goals, others), (1, 1, 0));
    }

    #[test]
    fn goal_only_design_has_no_objects() {
        let w = world(&GridDesign::default(), 3);
        let object_count = (0..w.height)
            .flat_map(|y| (0..w.width).map(move |x| (x, y)))
            .filter(|&(x, y)| !matches!(w.cell(x, y), Cell::Empty | Cell::Wall | Cell::Goal))
            .count();
        assert_eq!(object_count, 0);
    }

    #[test]
    fn build_is_reproducible() {
        let d = GridDesign::closed([Subtask::DropBall, Subtask::OpenDoor]);
        let a = world(&d, 11);
        let b = world(&d, 11);
        assert_eq!(a.agent, b.agent);
        assert_eq!(a.dir, b.dir);
        assert_eq!(grid_observation(&a), grid_observation(&b));
    }

    #[test]
    fn forward_into_wall_is_a_no_op() {
        let d = GridDesign::new([Subtask::PickupKey]).unwrap();
        let mut w = world(&d, 3);
        w.agent = (1, 1);
        w.dir = 2; // facing the west wall
        w.step(GridAction::Forward).unwrap();
        assert_eq!(w.agent, (1, 1));
        w.dir = 3; // north wall
        w.step(GridAction::Forward).unwrap();
        assert_eq!(w.agent, (1, 1));
    }

    #[test]
    fn observation_shape_and_one_hot() {
        let w = world(&GridDesign::closed([Subtask::OpenDoor]), 9);
        let obs = grid_observation(&w);
        assert_eq!(obs.grid.len(), 8 * 8 * GRID_CHANNELS);
        assert_eq!(obs.agent.len(), GRID_AGENT_FEATURES);
        for cell in obs.grid.chunks(GRID_CHANNELS) {
            assert_eq!(cell.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn capacity_error_when_room_is_too_small() {
        let d = GridDesign::closed([Subtask::DropBall, Subtask::OpenDoor]);
        assert!(build_grid(&d, &mut RandomStream::from_seed(0), 3, 10, 0.0).is_err());
    }
}
