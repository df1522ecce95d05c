use super::*;
use crate::baselines::AllOnController;
use crate::network::{Cell, LayerCode, Network, Pixel};
use crate::sim::{run, ScriptedController, SimConfig};
use crate::traffic::DemandTrace;

fn pixels(n: usize) -> Vec<Pixel> {
    (0..n)
        .map(|id| Pixel {
            id,
            grid_x: id as i64,
            grid_y: 0,
        })
        .collect()
}

/// (layer, base_power, cost_per_mb, contributions)
fn build_net(cells: Vec<(LayerCode, f64, f64, Vec<(usize, f64)>)>, nr_pixels: usize) -> Network {
    let cells = cells
        .into_iter()
        .enumerate()
        .map(|(id, (layer, base_power, cost_per_mb, contributions))| Cell {
            id,
            station_id: id,
            layer,
            base_power,
            cost_per_mb,
            contributions,
        })
        .collect();
    Network::new(cells, pixels(nr_pixels)).unwrap()
}

fn deterministic_model(net: &Network, per_cell: Vec<Vec<f64>>) -> DemandModel {
    DemandModel::deterministic(DemandTrace::from_samples(60, per_cell, net).unwrap())
}

fn params() -> RewardParams {
    RewardParams::new(1000.0, 60)
}

fn cfg(optimizer: OptimizerKind, horizon: u32, budget: u32, seed: u64) -> SynthesisConfig {
    SynthesisConfig {
        short_horizon_minutes: horizon,
        control_period_minutes: 60,
        rollouts_per_candidate: 1,
        candidate_budget: budget,
        optimizer,
        seed,
    }
}

#[test]
fn no_controllable_cells_yields_all_on() {
    let net = build_net(
        vec![
            (LayerCode::E, 10.0, 0.0, vec![(0, 5.0)]),
            (LayerCode::E, 10.0, 0.0, vec![(0, 5.0)]),
        ],
        1,
    );
    let model = deterministic_model(&net, vec![vec![1.0; 3]; 2]);
    let (strategy, stats) = synthesize_short_with_stats(
        &net,
        &model,
        &params(),
        0,
        &cfg(OptimizerKind::Exhaustive, 120, 8, 0),
    )
    .unwrap();
    assert_eq!(stats.decision_bits, 0);
    assert_eq!(stats.evaluations, 1);
    assert_eq!(strategy.actions.len(), 2);
    for a in &strategy.actions {
        assert_eq!(a.bitstring(), "11");
    }
}

/// One redundant capacity cell, one period. By hand: keeping it ON costs
/// 100 + 80 = 180 with no penalty; switching it OFF costs 100 and the E cell
/// still clears the demand (10 > 8), so OFF wins at reward 100.
#[test]
fn redundant_capacity_cell_is_switched_off() {
    let net = build_net(
        vec![
            (LayerCode::E, 100.0, 0.0, vec![(0, 10.0)]),
            (LayerCode::T, 80.0, 0.0, vec![(0, 5.0)]),
        ],
        1,
    );
    let model = deterministic_model(&net, vec![vec![4.0], vec![4.0]]);
    let (strategy, stats) = synthesize_short_with_stats(
        &net,
        &model,
        &params(),
        0,
        &cfg(OptimizerKind::Exhaustive, 60, 8, 0),
    )
    .unwrap();
    assert_eq!(strategy.actions[0].bitstring(), "10");
    assert_eq!(stats.estimated_reward, 100.0);

    let (oracle_strategy, oracle_reward) = brute_force_optimal(
        &net,
        &model,
        &params(),
        0,
        &OracleConfig {
            horizon_minutes: 60,
            ..OracleConfig::default()
        },
    )
    .unwrap();
    assert_eq!(oracle_reward, 100.0);
    assert_eq!(oracle_strategy.actions, strategy.actions);
}

/// Every capacity cell is needed every period: the E layer alone never
/// clears the demand, so ALLON is the unique optimum.
#[test]
fn allon_is_unique_optimum_when_demand_needs_capacity() {
    let net = build_net(
        vec![
            (LayerCode::E, 100.0, 0.0, vec![(0, 2.0)]),
            (LayerCode::T, 80.0, 0.0, vec![(0, 3.0)]),
        ],
        1,
    );
    // Pixel demand 4.0: E alone gives 2.0 (penalty), both give 5.0 > 4.0.
    let model = deterministic_model(&net, vec![vec![2.0; 2], vec![2.0; 2]]);
    let (strategy, reward) = brute_force_optimal(
        &net,
        &model,
        &params(),
        0,
        &OracleConfig {
            horizon_minutes: 120,
            ..OracleConfig::default()
        },
    )
    .unwrap();
    for a in &strategy.actions {
        assert_eq!(a.bitstring(), "11");
    }
    assert_eq!(reward, 2.0 * 180.0);
    // The alternative (capacity OFF in any period) pays the pixel penalty.
    let off_candidate = run(
        &net,
        &model,
        &mut ScriptedController::new(vec![
            ActionVector::new(&net, vec![true, false]).unwrap(),
            ActionVector::all_on(&net),
        ]),
        &SimConfig {
            horizon_minutes: 120,
            ..SimConfig::default()
        },
    )
    .unwrap();
    assert!(off_candidate.breakdown.reward() >= reward + 1000.0 - 80.0);
}

#[test]
fn zero_decision_bits_oracle_returns_allon_reward() {
    let net = build_net(vec![(LayerCode::E, 50.0, 0.2, vec![(0, 9.0)])], 1);
    let model = deterministic_model(&net, vec![vec![3.0, 1.0, 2.0]]);
    let (strategy, reward) = brute_force_optimal(
        &net,
        &model,
        &params(),
        0,
        &OracleConfig {
            horizon_minutes: 180,
            ..OracleConfig::default()
        },
    )
    .unwrap();
    assert_eq!(strategy.actions.len(), 3);
    let allon = run(
        &net,
        &model,
        &mut AllOnController,
        &SimConfig {
            horizon_minutes: 180,
            ..SimConfig::default()
        },
    )
    .unwrap();
    assert_eq!(reward, allon.breakdown.reward());
}

fn three_capacity_instance() -> (Network, DemandModel) {
    let net = build_net(
        vec![
            (LayerCode::E, 100.0, 0.1, vec![(0, 4.0), (1, 4.0)]),
            (LayerCode::T, 70.0, 0.1, vec![(0, 5.0)]),
            (LayerCode::A, 60.0, 0.1, vec![(1, 5.0)]),
            (LayerCode::L, 50.0, 0.1, vec![(0, 2.0), (1, 2.0)]),
        ],
        2,
    );
    let samples = vec![
        vec![2.0, 6.0, 3.0],
        vec![1.0, 5.0, 2.0],
        vec![1.5, 4.0, 1.0],
        vec![0.5, 3.0, 2.5],
    ];
    let model = deterministic_model(&net, samples);
    (net, model)
}

/// 3 controllable cells x 3 periods: 512 sequences. The budgeted optimizers
/// get twice the space and must land on the exhaustive reward exactly.
#[test]
fn optimizers_match_exhaustive_on_512_space() {
    let (net, model) = three_capacity_instance();
    let p = params();
    let exhaustive = synthesize_short_with_stats(
        &net,
        &model,
        &p,
        0,
        &cfg(OptimizerKind::Exhaustive, 180, 1, 0),
    )
    .unwrap();
    assert_eq!(exhaustive.1.evaluations, 512);
    for kind in [OptimizerKind::HillClimb, OptimizerKind::CrossEntropy] {
        let got =
            synthesize_short_with_stats(&net, &model, &p, 0, &cfg(kind, 180, 1024, 7)).unwrap();
        assert_eq!(
            got.1.estimated_reward, exhaustive.1.estimated_reward,
            "{kind:?} missed the exhaustive optimum"
        );
        assert_eq!(got.0.actions, exhaustive.0.actions);
    }
}

#[test]
fn exhaustive_evaluates_exactly_two_to_the_bits() {
    let (net, model) = three_capacity_instance();
    let stats = synthesize_short_with_stats(
        &net,
        &model,
        &params(),
        0,
        &cfg(OptimizerKind::Exhaustive, 120, 1, 0),
    )
    .unwrap()
    .1;
    assert_eq!(stats.decision_bits, 6);
    assert_eq!(stats.evaluations, 64);
}

fn twelve_bit_instance() -> (Network, DemandModel) {
    // 4 capacity cells x 3 periods = 4096 candidates, larger than the
    // budgets below, so the stochastic paths genuinely search.
    let net = build_net(
        vec![
            (LayerCode::E, 100.0, 0.1, vec![(0, 4.0), (1, 4.0), (2, 4.0)]),
            (LayerCode::T, 70.0, 0.1, vec![(0, 5.0), (2, 1.0)]),
            (LayerCode::A, 60.0, 0.1, vec![(1, 5.0)]),
            (LayerCode::L, 50.0, 0.1, vec![(0, 2.0), (1, 2.0), (2, 3.0)]),
            (LayerCode::V, 40.0, 0.1, vec![(2, 4.0)]),
        ],
        3,
    );
    let samples = vec![
        vec![2.0, 6.0, 3.0],
        vec![1.0, 5.0, 2.0],
        vec![1.5, 4.0, 1.0],
        vec![0.5, 3.0, 2.5],
        vec![1.2, 2.0, 0.7],
    ];
    let model = deterministic_model(&net, samples);
    (net, model)
}

#[test]
fn stochastic_rewards_bounded_by_oracle_and_allon() {
    let (net, model) = twelve_bit_instance();
    let p = params();
    let (_, oracle_reward) = brute_force_optimal(
        &net,
        &model,
        &p,
        0,
        &OracleConfig {
            horizon_minutes: 180,
            ..OracleConfig::default()
        },
    )
    .unwrap();
    let allon = run(
        &net,
        &model,
        &mut AllOnController,
        &SimConfig {
            horizon_minutes: 180,
            ..SimConfig::default()
        },
    )
    .unwrap()
    .breakdown
    .reward();
    for kind in [OptimizerKind::HillClimb, OptimizerKind::CrossEntropy] {
        for seed in 0..4 {
            let stats = synthesize_short_with_stats(&net, &model, &p, 0, &cfg(kind, 180, 300, seed))
                .unwrap()
                .1;
            assert!(stats.evaluations <= 300);
            assert!(
                stats.estimated_reward >= oracle_reward,
                "{kind:?} seed {seed}: {} below oracle {}",
                stats.estimated_reward,
                oracle_reward
            );
            assert!(
                stats.estimated_reward <= allon,
                "{kind:?} seed {seed}: {} above ALLON {}",
                stats.estimated_reward,
                allon
            );
        }
    }
}

#[test]
fn best_so_far_is_monotone_nonincreasing() {
    let (net, model) = twelve_bit_instance();
    for kind in [OptimizerKind::HillClimb, OptimizerKind::CrossEntropy] {
        let stats = synthesize_short_with_stats(
            &net,
            &model,
            &params(),
            0,
            &cfg(kind, 180, 300, 3),
        )
        .unwrap()
        .1;
        assert_eq!(stats.best_so_far.len(), stats.evaluations);
        for w in stats.best_so_far.windows(2) {
            assert!(w[1] <= w[0], "{kind:?}: best-so-far increased");
        }
    }
}

#[test]
fn same_seed_same_strategy() {
    let (net, model) = twelve_bit_instance();
    let p = params();
    for kind in [OptimizerKind::HillClimb, OptimizerKind::CrossEntropy] {
        let a = synthesize_short(&net, &model, &p, 0, &cfg(kind, 180, 200, 11)).unwrap();
        let b = synthesize_short(&net, &model, &p, 0, &cfg(kind, 180, 200, 11)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn oracle_not_beaten_by_random_valid_strategies() {
    let (net, model) = twelve_bit_instance();
    let p = params();
    let oracle = brute_force_optimal(
        &net,
        &model,
        &p,
        0,
        &OracleConfig {
            horizon_minutes: 180,
            ..OracleConfig::default()
        },
    )
    .unwrap()
    .1;
    let sim_cfg = SimConfig {
        horizon_minutes: 180,
        ..SimConfig::default()
    };
    let mut rng = rng_from_seed(99);
    for _ in 0..50 {
        let actions: Vec<ActionVector> = (0..3)
            .map(|_| {
                let on: Vec<bool> = (0..net.nr_cells())
                    .map(|c| net.cell(c).is_coverage_layer() || rng.random())
                    .collect();
                ActionVector::new(&net, on).unwrap()
            })
            .collect();
        let reward = run(&net, &model, &mut ScriptedController::new(actions), &sim_cfg)
            .unwrap()
            .breakdown
            .reward();
        assert!(reward >= oracle, "random strategy beat the oracle: {reward} < {oracle}");
    }
}

/// Full-day composition on a 1-controllable-cell instance, checked against
/// the 24-bit full-horizon enumeration: the composed receding-horizon
/// schedule may not beat the global optimum and may not lose to ALLON.
#[test]
fn receding_horizon_sits_between_global_optimum_and_allon() {
    let net = build_net(
        vec![
            (LayerCode::E, 100.0, 0.1, vec![(0, 6.0)]),
            (LayerCode::T, 80.0, 0.1, vec![(0, 6.0)]),
        ],
        1,
    );
    let day: Vec<f64> = [
        1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.5, 2.5, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0,
        4.0, 4.0, 2.5, 2.5, 1.0, 1.0,
    ]
    .to_vec();
    let model = deterministic_model(&net, vec![day.clone(), day]);
    let p = params();
    let sim_cfg = SimConfig::default(); // one day, hourly

    let mut rh = RecedingHorizonController::new(SynthesisConfig {
        optimizer: OptimizerKind::Exhaustive,
        seed: 9,
        ..SynthesisConfig::default()
    })
    .unwrap();
    let rh_run = run(&net, &model, &mut rh, &sim_cfg).unwrap();
    let allon_run = run(&net, &model, &mut AllOnController, &sim_cfg).unwrap();

    let (_, optimum) = brute_force_optimal(
        &net,
        &model,
        &p,
        0,
        &OracleConfig {
            horizon_minutes: 1440,
            max_decision_bits: 24,
            seed: 9,
            ..OracleConfig::default()
        },
    )
    .unwrap();

    let composed = rh_run.breakdown.reward();
    assert!(composed >= optimum, "composed {composed} beat the optimum {optimum}");
    assert!(
        composed <= allon_run.breakdown.reward(),
        "composed {composed} lost to ALLON"
    );
    assert_eq!(rh_run.breakdown.penalty, 0.0);
}

/// With h equal to the control period the controller is per-period greedy:
/// each executed action is the single-period optimum.
#[test]
fn one_period_lookahead_is_greedy() {
    let net = build_net(
        vec![
            (LayerCode::E, 100.0, 0.1, vec![(0, 6.0)]),
            (LayerCode::T, 80.0, 0.1, vec![(0, 6.0)]),
        ],
        1,
    );
    let day: Vec<f64> = (0..24).map(|t| if t % 3 == 0 { 4.0 } else { 1.0 }).collect();
    let model = deterministic_model(&net, vec![day.clone(), day]);
    let p = params();

    let mut rh = RecedingHorizonController::new(SynthesisConfig {
        short_horizon_minutes: 60,
        optimizer: OptimizerKind::Exhaustive,
        ..SynthesisConfig::default()
    })
    .unwrap();
    let out = run(&net, &model, &mut rh, &SimConfig::default()).unwrap();
    for (t0, record) in out.schedule.iter().enumerate() {
        let (greedy, _) = brute_force_optimal(
            &net,
            &model,
            &p,
            t0,
            &OracleConfig {
                horizon_minutes: 60,
                ..OracleConfig::default()
            },
        )
        .unwrap();
        assert_eq!(record.action, greedy.actions[0], "period {t0}");
    }
}

#[test]
fn same_seed_reproduces_composed_schedule() {
    let (net, model) = twelve_bit_instance();
    let sim_cfg = SimConfig {
        horizon_minutes: 180,
        ..SimConfig::default()
    };
    let make = || {
        RecedingHorizonController::new(SynthesisConfig {
            candidate_budget: 120,
            seed: 4,
            ..SynthesisConfig::default()
        })
        .unwrap()
    };
    let a = run(&net, &model, &mut make(), &sim_cfg).unwrap();
    let b = run(&net, &model, &mut make(), &sim_cfg).unwrap();
    assert_eq!(a.schedule, b.schedule);
    assert_eq!(a.breakdown, b.breakdown);
}

#[test]
fn planning_past_the_trace_is_rejected() {
    let (net, model) = three_capacity_instance(); // 3 hourly steps
    let err = synthesize_short(
        &net,
        &model,
        &params(),
        1,
        &cfg(OptimizerKind::Exhaustive, 180, 1, 0),
    )
    .unwrap_err();
    assert!(matches!(err, SynthesisError::OutOfTrace { .. }), "{err}");
}

#[test]
fn misconfigurations_are_rejected() {
    let (net, model) = three_capacity_instance();
    let p = params();
    let base = cfg(OptimizerKind::HillClimb, 180, 10, 0);

    let err = synthesize_short(&net, &model, &p, 0, &SynthesisConfig {
        short_horizon_minutes: 90,
        ..base
    })
    .unwrap_err();
    assert!(matches!(err, SynthesisError::HorizonPeriodMismatch { .. }));

    let err = synthesize_short(&net, &model, &p, 0, &SynthesisConfig {
        candidate_budget: 0,
        ..base
    })
    .unwrap_err();
    assert!(matches!(err, SynthesisError::NoBudget));

    let err = synthesize_short(&net, &model, &p, 0, &SynthesisConfig {
        rollouts_per_candidate: 0,
        ..base
    })
    .unwrap_err();
    assert!(matches!(err, SynthesisError::NoRollouts));

    let err = synthesize_short(
        &net,
        &model,
        &RewardParams::new(1000.0, 45),
        0,
        &base,
    )
    .unwrap_err();
    assert!(matches!(err, SynthesisError::PeriodStepMismatch { .. }));
}

#[test]
fn exhaustive_over_the_cap_is_rejected() {
    // 7 capacity cells x 3 periods = 21 bits > 20.
    let mut cells = vec![(LayerCode::E, 10.0, 0.0, vec![(0, 50.0)])];
    for _ in 0..7 {
        cells.push((LayerCode::T, 10.0, 0.0, vec![(0, 1.0)]));
    }
    let net = build_net(cells, 1);
    let model = deterministic_model(&net, vec![vec![1.0; 3]; 8]);
    let err = synthesize_short(
        &net,
        &model,
        &params(),
        0,
        &cfg(OptimizerKind::Exhaustive, 180, 1, 0),
    )
    .unwrap_err();
    assert!(matches!(
        err,
        SynthesisError::DecisionSpaceTooLarge { bits: 21, cap: 20 }
    ));
}

#[test]
fn synthesized_strategies_never_turn_coverage_off() {
    let (net, model) = twelve_bit_instance();
    let p = params();
    for seed in 0..100 {
        let kind = match seed % 3 {
            0 => OptimizerKind::Exhaustive,
            1 => OptimizerKind::HillClimb,
            _ => OptimizerKind::CrossEntropy,
        };
        let strategy =
            synthesize_short(&net, &model, &p, 0, &cfg(kind, 120, 24, seed)).unwrap();
        for action in &strategy.actions {
            assert!(action.validate_for(&net).is_ok());
        }
    }
}
