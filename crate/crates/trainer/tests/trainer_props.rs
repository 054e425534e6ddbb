//! Distributional checks for the procedural baselines, objective identities
//! for the fabricated-stat strategies, and the reproducibility guarantees
//! the metrics pipeline is built around.

use codelab_core::generator::{generator_reward, pop_regret};
use codelab_core::rng::RandomStream;
use codelab_core::webenv::Placement;
use codelab_trainer::algos::alp::{alp_reward, AlpStrategy};
use codelab_trainer::algos::cl::{
    cl_design, cl_design_with_probability, cl_grid_design, cl_inclusion_probability,
};
use codelab_trainer::algos::dr::{dr_design, dr_grid_design};
use codelab_trainer::algos::minimax::MinimaxStrategy;
use codelab_trainer::algos::paired::{PairedStrategy, ANTAGONIST};
use codelab_trainer::strategy::CurriculumStrategy;
use codelab_trainer::{Algo, Domain, IterationStats, Trainer, TrainerState, TrainingConfig};

const CATALOG_SIZE: usize = 40;

fn web_cfg(algo: Algo) -> TrainingConfig {
    let mut cfg = TrainingConfig::default();
    cfg.algo = algo;
    cfg.domain = Domain::Web;
    cfg.seed = Some(11);
    cfg.population = 2;
    cfg.episodes_per_agent = 1;
    cfg.design_budget = 3;
    cfg.max_pages = 2;
    cfg.iterations = 4;
    cfg.generator_hidden = 8;
    cfg.learner_hidden = 8;
    cfg.learner_embed = 4;
    cfg.catalog = vec!["username".into(), "password".into()];
    cfg
}

fn stats(episode_returns: Vec<Vec<f64>>) -> IterationStats {
    let mean_returns: Vec<f64> = episode_returns
        .iter()
        .map(|rs| rs.iter().sum::<f64>() / rs.len() as f64)
        .collect();
    let (best_agent, best_return) = mean_returns
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc });
    IterationStats { episode_returns, mean_returns, best_agent, best_return, n_hat: 0.0 }
}

// ---------------------------------------------------------------- DR stats

/// With the full catalog each sampled slot is uniform over 40 primitives
/// plus SKIP plus NULL, so P(non-SKIP) = 41/42 whenever k >= 1.
#[test]
fn dr_non_skip_fraction_matches_analytic() {
    let mut cfg = TrainingConfig::default();
    cfg.max_pages = 10;
    cfg.design_budget = 10;
    let mut rng = RandomStream::from_seed(2024);

    let mut slots = 0usize;
    let mut non_skip = 0usize;
    let mut designs = 0usize;
    let mut empty_designs = 0usize;
    let total_designs = 22_000usize;
    for _ in 0..total_designs {
        let design = dr_design(&mut rng, &cfg);
        assert_eq!(design.placements.len(), cfg.design_budget);
        if design.pages == 0 {
            empty_designs += 1;
            assert!(
                design.placements.iter().all(|p| matches!(p, Placement::Skip)),
                "k = 0 must force every slot to SKIP"
            );
            continue;
        }
        designs += 1;
        if designs > 10_000 {
            continue;
        }
        slots += design.placements.len();
        non_skip += design.placements.iter().filter(|p| !matches!(p, Placement::Skip)).count();
    }

    // k ~ U{0..10}: empty designs arrive at rate 1/11.
    let empty_frac = empty_designs as f64 / total_designs as f64;
    let empty_p = 1.0 / 11.0;
    let empty_sigma = (empty_p * (1.0 - empty_p) / total_designs as f64).sqrt();
    assert!(
        (empty_frac - empty_p).abs() <= 3.0 * empty_sigma,
        "empty-design rate {empty_frac} vs {empty_p} (3s = {})",
        3.0 * empty_sigma
    );

    assert_eq!(slots, 100_000);
    let frac = non_skip as f64 / slots as f64;
    let p = 41.0 / 42.0;
    let sigma = (p * (1.0 - p) / slots as f64).sqrt();
    assert!(
        (frac - p).abs() <= 3.0 * sigma,
        "non-SKIP fraction {frac} vs analytic {p} (3s = {})",
        3.0 * sigma
    );
}

/// Conditioned on rendering a primitive, the choice is uniform over the
/// catalog: Pearson chi-square against the flat distribution stays within
/// three standard deviations of its df = 39 mean.
#[test]
fn dr_primitive_choice_is_uniform() {
    let mut cfg = TrainingConfig::default();
    cfg.max_pages = 10;
    cfg.design_budget = 10;
    let names = cfg.effective_catalog();
    assert_eq!(names.len(), CATALOG_SIZE);

    let mut rng = RandomStream::from_seed(7);
    let mut counts = std::collections::BTreeMap::<String, usize>::new();
    let mut puts = 0usize;
    while puts < 100_000 {
        let design = dr_design(&mut rng, &cfg);
        for p in &design.placements {
            if let Placement::Put { primitive, page } = p {
                assert!(*page < design.pages);
                *counts.entry(primitive.clone()).or_default() += 1;
                puts += 1;
            }
        }
    }

    assert_eq!(counts.len(), CATALOG_SIZE, "every primitive should appear");
    let expected = puts as f64 / CATALOG_SIZE as f64;
    let chi2: f64 =
        counts.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let df = (CATALOG_SIZE - 1) as f64;
    let sigma = (2.0 * df).sqrt();
    assert!(
        (chi2 - df).abs() <= 3.0 * sigma,
        "chi-square {chi2} outside {df} +- {}",
        3.0 * sigma
    );
}

/// Grid DR draws each budget slot uniformly over 5 subtasks + SKIP and then
/// closes the set under dependencies, so a subtask is present iff any draw
/// hit its dependents-or-self label group. Mean and variance of the closed
/// count follow exactly from inclusion-exclusion over those groups.
#[test]
fn dr_grid_subtask_count_matches_closure_statistics() {
    let mut cfg = TrainingConfig::default();
    cfg.domain = Domain::Grid;
    cfg.design_budget = 10;

    // Bits A=PickupKey, B=OpenDoor, C=PickupBall, D=OpenBox, E=DropBall.
    // A survives closure iff A or B was drawn; C iff C or E; D iff D or E.
    let groups: [u32; 5] = [0b00011, 0b00010, 0b10100, 0b11000, 0b10000];
    let absent = |labels: u32| -> f64 {
        ((6.0 - labels.count_ones() as f64) / 6.0).powi(cfg.design_budget as i32)
    };
    let present: Vec<f64> = groups.iter().map(|&g| 1.0 - absent(g)).collect();
    let mean_exact: f64 = present.iter().sum();
    let mut var = 0.0;
    for i in 0..groups.len() {
        var += present[i] * (1.0 - present[i]);
        for j in i + 1..groups.len() {
            let joint = 1.0 - absent(groups[i]) - absent(groups[j])
                + absent(groups[i] | groups[j]);
            var += 2.0 * (joint - present[i] * present[j]);
        }
    }

    let mut rng = RandomStream::from_seed(91);
    let n = 10_000usize;
    let mut total = 0usize;
    for _ in 0..n {
        let design = dr_grid_design(&mut rng, &cfg);
        assert!(design.subtasks.len() <= 5);
        total += design.subtasks.len();
    }
    let mean = total as f64 / n as f64;
    let sigma = (var / n as f64).sqrt();
    assert!(
        (mean - mean_exact).abs() <= 3.0 * sigma,
        "mean closed subtask count {mean} vs exact {mean_exact} (3s = {})",
        3.0 * sigma
    );
}

// ---------------------------------------------------------------- CL stats

#[test]
fn cl_schedule_endpoints_and_monotonicity() {
    assert_eq!(cl_inclusion_probability(0, 1000), 0.1);
    assert_eq!(cl_inclusion_probability(999, 1000), 1.0);
    // Past the end the schedule clamps.
    assert_eq!(cl_inclusion_probability(5000, 1000), 1.0);
    // Degenerate schedules have nowhere to climb.
    assert_eq!(cl_inclusion_probability(0, 1), 1.0);
    assert_eq!(cl_inclusion_probability(0, 0), 1.0);
    // Midpoint of a 10-iteration run: frac 4/9 puts p exactly at 1/2.
    assert_eq!(cl_inclusion_probability(4, 10), 0.5);

    let total = 137;
    let mut prev = 0.0;
    for i in 0..total {
        let p = cl_inclusion_probability(i, total);
        assert!(p >= prev, "schedule decreased at iteration {i}");
        assert!((0.1..=1.0).contains(&p));
        prev = p;
    }
}

#[test]
fn cl_probability_boundaries_pin_design_size() {
    let mut cfg = TrainingConfig::default();
    cfg.max_pages = 4;
    let mut rng = RandomStream::from_seed(5);

    let empty = cl_design_with_probability(&mut rng, 0.0, &cfg);
    assert!(empty.placements.is_empty(), "p = 0 must produce an empty design");
    assert!(empty.pages >= 1 && empty.pages <= cfg.max_pages);

    let full = cl_design_with_probability(&mut rng, 1.0, &cfg);
    assert_eq!(full.placements.len(), CATALOG_SIZE, "p = 1 includes every primitive");
    let placed: Vec<&str> = full
        .placements
        .iter()
        .map(|p| match p {
            Placement::Put { primitive, page } => {
                assert!(*page < full.pages);
                primitive.as_str()
            }
            other => panic!("CL never emits {other:?}"),
        })
        .collect();
    let catalog = cfg.effective_catalog();
    assert_eq!(placed, catalog.iter().map(|s| s.as_str()).collect::<Vec<_>>());

    // The schedule ignores the design budget: it can place the whole catalog.
    cfg.design_budget = 3;
    let mut rng = RandomStream::from_seed(6);
    let unbounded = cl_design_with_probability(&mut rng, 1.0, &cfg);
    assert_eq!(unbounded.placements.len(), CATALOG_SIZE);
}

/// At p = 1/2 the included-primitive count is Binomial(40, 1/2): the Monte
/// Carlo mean lands within three standard errors of 20.
#[test]
fn cl_inclusion_count_matches_binomial_mean() {
    let cfg = TrainingConfig::default();
    let mut rng = RandomStream::from_seed(17);
    let n = 10_000usize;
    let mut total = 0usize;
    for _ in 0..n {
        total += cl_design_with_probability(&mut rng, 0.5, &cfg).placements.len();
    }
    let mean = total as f64 / n as f64;
    let sigma = (CATALOG_SIZE as f64 * 0.25).sqrt() / (n as f64).sqrt();
    assert!(
        (mean - 20.0).abs() <= 3.0 * sigma,
        "mean inclusion count {mean} vs 20 (3s = {})",
        3.0 * sigma
    );
}

#[test]
fn cl_design_tracks_iteration_schedule() {
    let mut cfg = TrainingConfig::default();
    cfg.iterations = 100;
    // First iteration samples at p = 0.1, last at p = 1.0; the last is the
    // whole catalog deterministically.
    let mut rng = RandomStream::from_seed(3);
    let last = cl_design(&mut rng, cfg.iterations - 1, &cfg);
    assert_eq!(last.placements.len(), CATALOG_SIZE);

    let mut count_first = 0usize;
    let trials = 4_000usize;
    for _ in 0..trials {
        count_first += cl_design(&mut rng, 0, &cfg).placements.len();
    }
    let mean = count_first as f64 / trials as f64;
    let expect = CATALOG_SIZE as f64 * 0.1;
    let sigma = (CATALOG_SIZE as f64 * 0.1 * 0.9).sqrt() / (trials as f64).sqrt();
    assert!(
        (mean - expect).abs() <= 3.0 * sigma,
        "first-iteration mean {mean} vs {expect}"
    );

    let mut grid_rng = RandomStream::from_seed(4);
    let grid_last = cl_grid_design(&mut grid_rng, cfg.iterations - 1, &cfg);
    assert_eq!(grid_last.subtasks.len(), 5, "p = 1 includes every subtask");
}

// ------------------------------------------------- fabricated-stat algebra

#[test]
fn alp_reward_examples() {
    assert_eq!(alp_reward(0.3, 0.3), 0.0);
    assert_eq!(alp_reward(-1.0, 1.0), 2.0);
    assert_eq!(alp_reward(1.0, -1.0), 2.0);
    assert_eq!(alp_reward(0.25, 0.75), 0.5);
}

#[test]
fn alp_strategy_pays_progress_since_previous_iteration() {
    let mut cfg = web_cfg(Algo::Alp);
    cfg.population = 1;
    let mut st = TrainerState::new(cfg, true).unwrap();
    let strat = AlpStrategy;

    let first = strat.objective(&mut st, &stats(vec![vec![0.4]])).unwrap();
    assert_eq!(first.reward, Some(0.0), "first iteration has no predecessor");

    let second = strat.objective(&mut st, &stats(vec![vec![1.0]])).unwrap();
    assert_eq!(second.reward, Some(alp_reward(0.4, 1.0)));

    let third = strat.objective(&mut st, &stats(vec![vec![0.2]])).unwrap();
    assert_eq!(third.reward, Some(alp_reward(1.0, 0.2)));
}

#[test]
fn minimax_pays_negated_population_mean() {
    let mut st = TrainerState::new(web_cfg(Algo::Minimax), true).unwrap();
    let strat = MinimaxStrategy;
    let obj = strat.objective(&mut st, &stats(vec![vec![-1.0], vec![-0.5]])).unwrap();
    assert_eq!(obj.reward, Some(0.75));
    assert_eq!(obj.regret, pop_regret(&[-1.0, -0.5]).unwrap());
    assert_eq!(obj.regret, 0.25);

    // A protagonist collapse flips the sign of the payment.
    let good = strat.objective(&mut st, &stats(vec![vec![0.9], vec![0.7]])).unwrap();
    assert_eq!(good.reward, Some(-0.8));
}

#[test]
fn paired_uses_fixed_antagonist_and_flattened_protagonists() {
    assert_eq!(ANTAGONIST, 0, "the antagonist role never rotates");
    let mut st = TrainerState::new(web_cfg(Algo::Paired), true).unwrap();
    let strat = PairedStrategy;

    // max(antagonist episodes) - mean(all protagonist episodes).
    let obj = strat
        .objective(&mut st, &stats(vec![vec![0.5, 1.0], vec![0.25, 0.75]]))
        .unwrap();
    assert_eq!(obj.regret, 1.0 - 0.5);
    assert_eq!(obj.reward, Some(obj.regret));
    assert_eq!(obj.difficulty, 0.0);

    let three = strat
        .objective(
            &mut st,
            &stats(vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![-1.0, 3.0]]),
        )
        .unwrap();
    assert_eq!(three.regret, 2.0 - 1.0);
}

#[test]
fn alpha_one_pays_difficulty_only() {
    // At full mixing weight the regret term vanishes from the payment.
    assert_eq!(generator_reward(5.0, 0.7, 1.0), generator_reward(-5.0, 0.7, 1.0));
    assert_eq!(generator_reward(5.0, 0.7, 1.0), 0.7);
    // At zero weight the payment is pure regret.
    assert_eq!(generator_reward(5.0, 0.7, 0.0), 5.0);
}

// ----------------------------------------------------------- reproducibility

fn run_to_csv(cfg: &TrainingConfig) -> String {
    let mut trainer = Trainer::new(cfg.clone()).unwrap();
    trainer.run().unwrap();
    trainer.log.to_csv()
}

#[test]
fn same_config_and_seed_reproduce_metrics_bytes() {
    for algo in [Algo::Code, Algo::Dr, Algo::Alp] {
        let cfg = web_cfg(algo);
        let a = run_to_csv(&cfg);
        let b = run_to_csv(&cfg);
        assert_eq!(a, b, "{} run is not reproducible", algo.name());
        assert!(a.lines().count() == cfg.iterations + 1);
    }
}

#[test]
fn different_seeds_diverge() {
    let mut cfg = web_cfg(Algo::Code);
    let a = run_to_csv(&cfg);
    cfg.seed = Some(12);
    let b = run_to_csv(&cfg);
    assert_ne!(a, b, "distinct seeds should produce distinct trajectories");
}

#[test]
fn parallel_episode_collection_matches_serial_bytes() {
    let mut cfg = web_cfg(Algo::Code);
    cfg.population = 3;
    cfg.episodes_per_agent = 2;
    cfg.iterations = 3;
    let serial = run_to_csv(&cfg);
    for workers in [2, 3, 8] {
        let mut par = cfg.clone();
        par.workers = workers;
        assert_eq!(
            serial,
            run_to_csv(&par),
            "workers = {workers} changed the web metrics stream"
        );
    }

    let mut grid = web_cfg(Algo::Code);
    grid.domain = Domain::Grid;
    grid.population = 3;
    grid.episodes_per_agent = 2;
    grid.iterations = 2;
    grid.grid_size = 5;
    grid.grid_horizon = 12;
    grid.catalog.clear();
    let grid_serial = run_to_csv(&grid);
    let mut grid_par = grid.clone();
    grid_par.workers = 4;
    assert_eq!(grid_serial, run_to_csv(&grid_par), "grid parallel run diverged");
}

#[test]
fn logged_returns_satisfy_two_agent_regret_identity() {
    let cfg = web_cfg(Algo::Code);
    let mut trainer = Trainer::new(cfg.clone()).unwrap();
    trainer.run().unwrap();
    for rec in &trainer.log.records {
        assert_eq!(rec.returns.len(), 2);
        assert_eq!(rec.regret, pop_regret(&rec.returns).unwrap());
        let identity = (rec.returns[0] - rec.returns[1]).abs() / 2.0;
        assert!(
            (rec.regret - identity).abs() < 1e-12,
            "two-agent regret {} != |r0 - r1|/2 = {identity}",
            rec.regret
        );
        assert!(rec.regret >= 0.0);
        assert!(rec.best_agent < cfg.population);
        assert_eq!(rec.returns[rec.best_agent], rec.best_return);
    }
}
