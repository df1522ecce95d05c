//! Replay one day of traffic under the two reference controllers (always-ON
//! and the fixed 01:00-06:00 night window) and compare their reward
//! breakdowns, stepping the simulator by hand for the first few hours.
//!
//! ```bash
//! cargo run --example simulate_baselines
//! ```

use std::error::Error;

use greencells::action::ActionVector;
use greencells::baselines::{AllOnController, NightScheduleConfig, NightScheduleController};
use greencells::harness::{generate_scenario, GeneratorConfig};
use greencells::network::Network;
use greencells::rng::rng_from_seed;
use greencells::sim::{run, SimConfig, SimState};
use greencells::traffic::{generate_diurnal_trace, DemandModel};

fn main() -> Result<(), Box<dyn Error>> {
    let doc = generate_scenario(&GeneratorConfig {
        n_stations: 4,
        cells_per_station: 2,
        grid_w: 20,
        grid_h: 20,
        coverage_radius: 14.0,
        seed: 11,
        ..GeneratorConfig::default()
    })?;
    let net = Network::from_document(&doc)?;
    let mut rng = rng_from_seed(1);
    let trace = generate_diurnal_trace(&net, 1, 160.0, 0.1, 60, 0.0, &mut rng)?;
    let model = DemandModel::deterministic(trace);
    let cfg = SimConfig::default(); // 1 day, hourly control and steps

    // Manual stepping: the do_sim_step contract.
    let mut state = SimState::new(&net, &model, &cfg)?;
    let all_on = ActionVector::all_on(&net);
    println!("manual ALLON steps:");
    for hour in 0..4 {
        let delta = state.do_sim_step(&all_on)?;
        println!(
            "  {:02}:00  energy {:>8.2}  penalty {:>6.1}",
            hour, delta.energy, delta.penalty
        );
    }

    // Full-horizon runs under both baselines.
    let allon = run(&net, &model, &mut AllOnController, &cfg)?;
    let mut night = NightScheduleController::new(NightScheduleConfig::default());
    let night_run = run(&net, &model, &mut night, &cfg)?;

    println!("\nfull day:");
    for (name, out) in [("allon", &allon), ("night", &night_run)] {
        println!(
            "  {name:<6} energy {:>10.2}  penalty {:>8.1}  reward {:>10.2}",
            out.breakdown.energy,
            out.breakdown.penalty,
            out.breakdown.reward()
        );
    }
    println!(
        "  night window saves {:.1}% energy",
        (1.0 - night_run.breakdown.energy / allon.breakdown.energy) * 100.0
    );

    println!("\nnight schedule, hour by hour (capacity cells OFF inside the window):");
    for record in &night_run.schedule {
        println!(
            "  {:02}:00  {}  energy {:>8.2}",
            record.period_index,
            record.action.bitstring(),
            record.energy
        );
    }
    Ok(())
}
