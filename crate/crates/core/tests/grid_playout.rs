//! Scripted full-task playouts for the gridworld: navigate with BFS, do the
//! subtasks in dependency order, and check the reward accounting.

use std::collections::{HashMap, VecDeque};

use codelab_core::gridenv::{
    build_grid, grid_observation, Cell, GridAction, GridDesign, GridWorld, Subtask,
};
use codelab_core::rng::RandomStream;

/// Shortest action sequence that leaves the agent adjacent to `target`,
/// facing it. Cells are walkable if empty, goal, or an open door.
fn route_to(world: &GridWorld, target: (usize, usize)) -> Vec<GridAction> {
    type Pose = ((usize, usize), usize);
    let start: Pose = (world.agent, world.dir);
    let mut prev: HashMap<Pose, (Pose, GridAction)> = HashMap::new();
    let mut queue = VecDeque::new();
    queue.push_back(start);
    let goal_pose = |p: Pose| -> bool {
        let ((x, y), d) = p;
        let ahead = match d {
            0 => (x + 1, y),
            1 => (x, y + 1),
            2 => (x - 1, y),
            _ => (x, y - 1),
        };
        ahead == target
    };
    let walkable = |x: usize, y: usize| {
        matches!(world.cell(x, y), Cell::Empty | Cell::Goal | Cell::Door { open: true })
    };
    let mut found = None;
    'search: while let Some(p) = queue.pop_front() {
        if goal_pose(p) {
            found = Some(p);
            break 'search;
        }
        let ((x, y), d) = p;
        let push = |next: Pose, a: GridAction, prev: &mut HashMap<Pose, (Pose, GridAction)>, queue: &mut VecDeque<Pose>| {
            if next != start && !prev.contains_key(&next) {
                prev.insert(next, (p, a));
                queue.push_back(next);
            }
        };
        push(((x, y), (d + 3) % 4), GridAction::Left, &mut prev, &mut queue);
        push(((x, y), (d + 1) % 4), GridAction::Right, &mut prev, &mut queue);
        let ahead = match d {
            0 => (x + 1, y),
            1 => (x, y + 1),
            2 => (x - 1, y),
            _ => (x, y - 1),
        };
        if walkable(ahead.0, ahead.1) {
            push((ahead, d), GridAction::Forward, &mut prev, &mut queue);
        }
    }
    let mut plan = Vec::new();
    let mut cur = found.expect("target reachable in a single open room");
    while cur != start {
        let (p, a) = prev[&cur];
        plan.push(a);
        cur = p;
    }
    plan.reverse();
    plan
}

fn find(world: &GridWorld, what: impl Fn(Cell) -> bool) -> (usize, usize) {
    for y in 0..world.height {
        for x in 0..world.width {
            if what(world.cell(x, y)) {
                return (x, y);
            }
        }
    }
    panic!("cell not found");
}

fn drive(world: &mut GridWorld, plan: &[GridAction]) -> f64 {
    let mut total = 0.0;
    for &a in plan {
        total += world.step(a).unwrap().reward;
    }
    total
}

fn do_at(world: &mut GridWorld, target: (usize, usize), action: GridAction) -> f64 {
    let plan = route_to(world, target);
    let mut total = drive(world, &plan);
    total += world.step(action).unwrap().reward;
    total
}

/// Complete every subtask in dependency order, then walk to the goal.
fn solve(world: &mut GridWorld) -> f64 {
    let mut total = 0.0;
    let tasks = world.design.subtasks.clone();
    if tasks.contains(&Subtask::PickupKey) {
        let key = find(world, |c| c == Cell::Key);
        total += do_at(world, key, GridAction::Pickup);
    }
    if tasks.contains(&Subtask::OpenDoor) {
        let door = find(world, |c| matches!(c, Cell::Door { .. }));
        total += do_at(world, door, GridAction::Toggle);
    }
    if tasks.contains(&Subtask::PickupKey) && world.carrying.is_some() {
        // free the hands for the ball
        let (x, y) = world.agent;
        for spot in [(x + 1, y), (x, y + 1), (x - 1, y), (x, y - 1)] {
            if world.cell(spot.0, spot.1) == Cell::Empty {
                total += do_at(world, spot, GridAction::Drop);
                break;
            }
        }
    }
    if tasks.contains(&Subtask::OpenBox) {
        let b = find(world, |c| matches!(c, Cell::Box { .. }));
        total += do_at(world, b, GridAction::Toggle);
    }
    if tasks.contains(&Subtask::PickupBall) {
        let ball = find(world, |c| c == Cell::Ball);
        total += do_at(world, ball, GridAction::Pickup);
    }
    if tasks.contains(&Subtask::DropBall) {
        let b = find(world, |c| matches!(c, Cell::Box { open: true }));
        total += do_at(world, b, GridAction::Drop);
    }
    let goal = find(world, |c| c == Cell::Goal);
    let plan = route_to(world, goal);
    total += drive(world, &plan);
    total += world.step(GridAction::Forward).unwrap().reward;
    total
}

fn playout(subtasks: &[Subtask], seed: u64) {
    let design = GridDesign::new(subtasks.iter().copied()).unwrap();
    let mut world =
        build_grid(&design, &mut RandomStream::from_seed(seed), 8, 200, 0.0).unwrap();
    let total = solve(&mut world);
    assert!(world.succeeded(), "scripted solve failed for {subtasks:?} seed {seed}");
    let expected = if subtasks.is_empty() { 1.0 } else { 2.0 };
    assert!(
        (total - expected).abs() < 1e-12,
        "return {total}, expected {expected} for {subtasks:?} seed {seed}"
    );
}

#[test]
fn goal_only_world_pays_terminal_bonus_only() {
    for seed in 0..20 {
        playout(&[], seed);
    }
}

#[test]
fn single_subtask_worlds_pay_unit_potential() {
    for seed in 0..10 {
        playout(&[Subtask::PickupKey], seed);
        playout(&[Subtask::PickupBall], seed);
        playout(&[Subtask::OpenBox], seed);
    }
}

#[test]
fn full_workflow_pays_unit_potential() {
    for seed in 0..10 {
        playout(
            &[
                Subtask::PickupKey,
                Subtask::OpenDoor,
                Subtask::PickupBall,
                Subtask::OpenBox,
                Subtask::DropBall,
            ],
            seed,
        );
    }
}

#[test]
fn sample_design_from_three_subtasks() {
    for seed in 0..10 {
        playout(&[Subtask::PickupKey, Subtask::PickupBall, Subtask::OpenBox], seed);
    }
}

#[test]
fn out_of_order_completion_is_blocked() {
    let design = GridDesign::closed([Subtask::OpenDoor]);
    let mut world = build_grid(&design, &mut RandomStream::from_seed(4), 8, 200, 0.0).unwrap();
    // toggling the door without the key does nothing
    let door = find(&world, |c| matches!(c, Cell::Door { .. }));
    let r = do_at(&mut world, door, GridAction::Toggle);
    assert_eq!(r, 0.0);
    assert!(world.completed().is_empty());
    assert_eq!(world.cell(door.0, door.1), Cell::Door { open: false });

    // with the key in hand the toggle both opens and credits
    let key = find(&world, |c| c == Cell::Key);
    do_at(&mut world, key, GridAction::Pickup);
    let r = do_at(&mut world, door, GridAction::Toggle);
    assert!((r - 0.5).abs() < 1e-12);
    assert_eq!(world.cell(door.0, door.1), Cell::Door { open: true });
}

#[test]
fn goal_without_completion_does_not_terminate() {
    let design = GridDesign::new([Subtask::PickupKey]).unwrap();
    let mut world = build_grid(&design, &mut RandomStream::from_seed(6), 8, 200, 0.0).unwrap();
    let goal = find(&world, |c| c == Cell::Goal);
    let plan = route_to(&mut world, goal);
    drive(&mut world, &plan);
    world.step(GridAction::Forward).unwrap();
    assert_eq!(world.agent, goal);
    assert!(!world.is_done());
}

#[test]
fn observations_change_with_world_state() {
    let design = GridDesign::new([Subtask::PickupKey]).unwrap();
    let mut world = build_grid(&design, &mut RandomStream::from_seed(8), 8, 200, 0.0).unwrap();
    let before = grid_observation(&world);
    let key = find(&world, |c| c == Cell::Key);
    do_at(&mut world, key, GridAction::Pickup);
    let after = grid_observation(&world);
    assert_ne!(before.grid, after.grid);
    assert_ne!(before.agent, after.agent);
}
