//! Online strategy synthesis over a full day at the 39-cell scale: every
//! hour a 180-minute strategy is computed from rollouts and only its first
//! action is executed. Prints the savings against ALLON and when cells slept.
//!
//! ```bash
//! cargo run --release --example receding_horizon
//! ```

use std::error::Error;
use std::time::Instant;

use greencells::baselines::AllOnController;
use greencells::harness::{generate_scenario, GeneratorConfig};
use greencells::network::Network;
use greencells::rng::rng_from_seed;
use greencells::sim::{run, SimConfig};
use greencells::synthesis::{OptimizerKind, RecedingHorizonController, SynthesisConfig};
use greencells::traffic::{generate_diurnal_trace, DemandModel};

fn main() -> Result<(), Box<dyn Error>> {
    let doc = generate_scenario(&GeneratorConfig::default())?; // 39 cells
    let net = Network::from_document(&doc)?;
    let mut rng = rng_from_seed(2024);
    let trace = generate_diurnal_trace(&net, 1, 200.0, 0.1, 60, 0.0, &mut rng)?;
    let model = DemandModel::deterministic(trace);
    let sim_cfg = SimConfig::default();

    let allon = run(&net, &model, &mut AllOnController, &sim_cfg)?;

    let mut rh = RecedingHorizonController::new(SynthesisConfig {
        short_horizon_minutes: 180,
        control_period_minutes: 60,
        rollouts_per_candidate: 1,
        candidate_budget: 2000,
        optimizer: OptimizerKind::HillClimb,
        seed: 7,
    })?;
    let started = Instant::now();
    let rh_run = run(&net, &model, &mut rh, &sim_cfg)?;
    let elapsed = started.elapsed();

    println!(
        "{:<8} energy {:>10.1}  penalty {:>7.1}  reward {:>10.1}",
        "allon",
        allon.breakdown.energy,
        allon.breakdown.penalty,
        allon.breakdown.reward()
    );
    println!(
        "{:<8} energy {:>10.1}  penalty {:>7.1}  reward {:>10.1}   ({:.1}s wall)",
        "rh",
        rh_run.breakdown.energy,
        rh_run.breakdown.penalty,
        rh_run.breakdown.reward(),
        elapsed.as_secs_f64()
    );
    println!(
        "savings vs allon: {:.1}%",
        (1.0 - rh_run.breakdown.energy / allon.breakdown.energy) * 100.0
    );

    println!("\ncells asleep per hour (of {} capacity cells):", net.capacity_cells().len());
    for record in &rh_run.schedule {
        let off = record.action.count_off();
        println!("  {:02}:00  {:>2} off  {}", record.period_index, off, "#".repeat(off));
    }
    Ok(())
}
