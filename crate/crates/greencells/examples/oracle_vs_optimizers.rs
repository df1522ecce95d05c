//! Compare the exact brute-force oracle with the three short-horizon
//! optimizers on an instance small enough to enumerate: 4 capacity cells
//! over 3 periods (4096 sequences).
//!
//! ```bash
//! cargo run --example oracle_vs_optimizers
//! ```

use std::error::Error;

use greencells::network::{Cell, LayerCode, Network, Pixel};
use greencells::reward::RewardParams;
use greencells::synthesis::{
    brute_force_optimal, synthesize_short_with_stats, OptimizerKind, OracleConfig,
    SynthesisConfig,
};
use greencells::traffic::{DemandModel, DemandTrace};

fn main() -> Result<(), Box<dyn Error>> {
    let cell = |id, layer, base: f64, contribs: Vec<(usize, f64)>| Cell {
        id,
        station_id: id,
        layer,
        base_power: base,
        cost_per_mb: 0.1,
        contributions: contribs,
    };
    let net = Network::new(
        vec![
            cell(0, LayerCode::E, 100.0, vec![(0, 4.0), (1, 4.0), (2, 4.0)]),
            cell(1, LayerCode::T, 70.0, vec![(0, 5.0), (2, 1.0)]),
            cell(2, LayerCode::A, 60.0, vec![(1, 5.0)]),
            cell(3, LayerCode::L, 50.0, vec![(0, 2.0), (1, 2.0), (2, 3.0)]),
            cell(4, LayerCode::V, 40.0, vec![(2, 4.0)]),
        ],
        (0..3)
            .map(|id| Pixel {
                id,
                grid_x: id as i64,
                grid_y: 0,
            })
            .collect(),
    )?;
    let samples = vec![
        vec![2.0, 6.0, 3.0],
        vec![1.0, 5.0, 2.0],
        vec![1.5, 4.0, 1.0],
        vec![0.5, 3.0, 2.5],
        vec![1.2, 2.0, 0.7],
    ];
    let model = DemandModel::deterministic(DemandTrace::from_samples(60, samples, &net)?);
    let params = RewardParams::new(1000.0, 60);

    let (strategy, oracle) = brute_force_optimal(
        &net,
        &model,
        &params,
        0,
        &OracleConfig {
            horizon_minutes: 180,
            seed: 42,
            ..OracleConfig::default()
        },
    )?;
    println!("oracle (full enumeration of 2^12 sequences): reward {oracle}");
    for (i, action) in strategy.actions.iter().enumerate() {
        println!("  period {i}: {}", action.bitstring());
    }

    println!(
        "\n{:<14} {:>12} {:>8} {:>10}",
        "optimizer", "reward", "evals", "wall[ms]"
    );
    for (kind, budget) in [
        (OptimizerKind::Exhaustive, 1),
        (OptimizerKind::HillClimb, 400),
        (OptimizerKind::CrossEntropy, 400),
    ] {
        let cfg = SynthesisConfig {
            short_horizon_minutes: 180,
            candidate_budget: budget,
            optimizer: kind,
            seed: 42,
            ..SynthesisConfig::default()
        };
        let (_, stats) = synthesize_short_with_stats(&net, &model, &params, 0, &cfg)?;
        println!(
            "{:<14} {:>12} {:>8} {:>10.2}   (gap to oracle: {})",
            kind.as_str(),
            stats.estimated_reward,
            stats.evaluations,
            stats.wall_time.as_secs_f64() * 1e3,
            stats.estimated_reward - oracle
        );
    }
    Ok(())
}
