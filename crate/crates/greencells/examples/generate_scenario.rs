//! Generate a synthetic scenario and a matching diurnal demand trace, then
//! inspect what came out.
//!
//! ```bash
//! cargo run --example generate_scenario
//! ```

use std::error::Error;

use greencells::harness::{generate_scenario, GeneratorConfig};
use greencells::network::Network;
use greencells::rng::rng_from_seed;
use greencells::traffic::generate_diurnal_trace;

fn main() -> Result<(), Box<dyn Error>> {
    // Defaults are sized like the smaller evaluation area: 13 stations of
    // 3 cells each (one 800 MHz coverage cell plus two capacity cells) on a
    // 52x52 pixel grid.
    let cfg = GeneratorConfig {
        seed: 7,
        ..GeneratorConfig::default()
    };
    let doc = generate_scenario(&cfg)?;
    let net = Network::from_document(&doc)?;

    println!(
        "scenario: {} cells ({} coverage / {} capacity) over {} pixels",
        net.nr_cells(),
        net.coverage_cells().len(),
        net.capacity_cells().len(),
        net.nr_pixels()
    );
    for layer in greencells::network::LayerCode::all() {
        let count = net.cells().iter().filter(|c| c.layer == layer).count();
        if count > 0 {
            println!("  layer {layer} ({} MHz): {count} cells", layer.frequency_mhz());
        }
    }
    let covering: Vec<usize> = (0..net.nr_pixels()).map(|p| net.covering(p).len()).collect();
    println!(
        "  cells covering a pixel: min {}, max {}",
        covering.iter().min().unwrap(),
        covering.iter().max().unwrap()
    );

    let mut rng = rng_from_seed(cfg.seed);
    let trace = generate_diurnal_trace(&net, 1, 200.0, 0.1, 60, 0.05, &mut rng)?;
    println!(
        "trace: {} hourly steps, cell 0 profile (megabits/hour):",
        trace.horizon_steps()
    );
    for t in 0..trace.horizon_steps() {
        println!("  {:02}:00  {:>8.2}", t, trace.sample(0, t));
    }

    let dir = std::env::temp_dir().join("greencells-example");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("scenario.json"), net.to_json_string())?;
    std::fs::write(dir.join("trace.json"), trace.to_json_string())?;
    println!("wrote scenario.json and trace.json under {}", dir.display());
    Ok(())
}
