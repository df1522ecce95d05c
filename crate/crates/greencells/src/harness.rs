//! Experiment driving: synthetic scenario generation, controller comparison
//! runs, and machine-readable outputs. The `greencells` binary is a thin
//! wrapper over this module.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use thiserror::Error;

use crate::baselines::{AllOnController, NightScheduleConfig, NightScheduleController};
use crate::network::{CellDoc, Contribution, LayerCode, Network, Pixel, ScenarioDoc, ScenarioError};
use crate::partition::{partition_network, DistributedController, PartitionError};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sim::{run, Controller, SimConfig, SimError};
use crate::synthesis::{RecedingHorizonController, SynthesisConfig, SynthesisError};
use crate::traffic::{DemandModel, TrafficError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("failed to write outputs: {0}")]
    Io(#[from] io::Error),
    #[error("generator could not cover every pixel with an 800 MHz cell after {attempts} radius enlargements")]
    GeneratorCoverage { attempts: u32 },
    #[error("generator sizes must all be >= 1")]
    GeneratorEmpty,
}

// ---------------------------------------------------------------------------
// Scenario generation
// ---------------------------------------------------------------------------

/// Synthetic scenario layout. Defaults are sized like the smaller of the two
/// evaluation areas: 13 stations of 3 cells on a 52x52 grid (39 cells, 2704
/// pixels).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n_stations: usize,
    pub cells_per_station: usize,
    pub grid_w: usize,
    pub grid_h: usize,
    /// Reach of the 800 MHz coverage cells, in grid units. Enlarged
    /// automatically (bounded retries) when random placement leaves gaps.
    pub coverage_radius: f64,
    pub seed: u64,
    pub e_base_power: f64,
    pub capacity_base_power: f64,
    pub cost_per_mb: f64,
    /// Contribution at zero distance for coverage cells (megabits/hour).
    pub e_peak_capacity: f64,
    /// Contribution at zero distance for capacity cells.
    pub capacity_peak_capacity: f64,
    /// Capacity-cell radius as a fraction of `coverage_radius`.
    pub capacity_radius_factor: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_stations: 13,
            cells_per_station: 3,
            grid_w: 52,
            grid_h: 52,
            coverage_radius: 18.0,
            seed: 0,
            e_base_power: 120.0,
            capacity_base_power: 100.0,
            cost_per_mb: 0.01,
            e_peak_capacity: 4.0,
            capacity_peak_capacity: 8.0,
            capacity_radius_factor: 0.6,
        }
    }
}

/// Contribution never decays below this fraction of the peak inside the
/// radius, so a cell always out-supplies its own uniformly spread demand
/// share at every pixel it covers.
const CONTRIBUTION_FLOOR: f64 = 0.25;
const MAX_COVERAGE_RETRIES: u32 = 8;
const CAPACITY_LAYER_CYCLE: [LayerCode; 4] = [LayerCode::T, LayerCode::A, LayerCode::L, LayerCode::V];

fn contributions_within(
    grid_w: usize,
    grid_h: usize,
    sx: f64,
    sy: f64,
    radius: f64,
    peak: f64,
) -> Vec<Contribution> {
    let mut out = Vec::new();
    let x_lo = (sx - radius).floor().max(0.0) as usize;
    let x_hi = ((sx + radius).ceil() as usize).min(grid_w.saturating_sub(1));
    let y_lo = (sy - radius).floor().max(0.0) as usize;
    let y_hi = ((sy + radius).ceil() as usize).min(grid_h.saturating_sub(1));
    for y in y_lo..=y_hi {
        for x in x_lo..=x_hi {
            let d = ((x as f64 - sx).powi(2) + (y as f64 - sy).powi(2)).sqrt();
            if d < radius {
                let scale = CONTRIBUTION_FLOOR + (1.0 - CONTRIBUTION_FLOOR) * (1.0 - d / radius);
                out.push(Contribution {
                    pixel: y * grid_w + x,
                    capacity: peak * scale,
                });
            }
        }
    }
    out
}

/// Generate a synthetic scenario: stations at random grid positions, one
/// coverage cell each plus capacity cells on higher layers, contributions
/// decaying with distance. The result always passes network validation.
pub fn generate_scenario(cfg: &GeneratorConfig) -> Result<ScenarioDoc, HarnessError> {
    if cfg.n_stations == 0 || cfg.cells_per_station == 0 || cfg.grid_w == 0 || cfg.grid_h == 0 {
        return Err(HarnessError::GeneratorEmpty);
    }
    let mut rng = rng_from_seed(cfg.seed);
    let stations: Vec<(f64, f64)> = (0..cfg.n_stations)
        .map(|_| {
            (
                rng.random_range(0.0..cfg.grid_w as f64),
                rng.random_range(0.0..cfg.grid_h as f64),
            )
        })
        .collect();

    let pixels: Vec<Pixel> = (0..cfg.grid_w * cfg.grid_h)
        .map(|id| Pixel {
            id,
            grid_x: (id % cfg.grid_w) as i64,
            grid_y: (id / cfg.grid_w) as i64,
        })
        .collect();

    for attempt in 0..=MAX_COVERAGE_RETRIES {
        let e_radius = cfg.coverage_radius * 1.4f64.powi(attempt as i32);
        let capacity_radius = cfg.coverage_radius * cfg.capacity_radius_factor;

        let mut cells = Vec::with_capacity(cfg.n_stations * cfg.cells_per_station);
        for (station_id, &(sx, sy)) in stations.iter().enumerate() {
            let id = cells.len();
            cells.push(CellDoc {
                id,
                station_id,
                layer: LayerCode::E,
                base_power: cfg.e_base_power,
                cost_per_mb: cfg.cost_per_mb,
                contributions: contributions_within(
                    cfg.grid_w,
                    cfg.grid_h,
                    sx,
                    sy,
                    e_radius,
                    cfg.e_peak_capacity,
                ),
            });
            for extra in 1..cfg.cells_per_station {
                let id = cells.len();
                cells.push(CellDoc {
                    id,
                    station_id,
                    layer: CAPACITY_LAYER_CYCLE[(extra - 1) % CAPACITY_LAYER_CYCLE.len()],
                    base_power: cfg.capacity_base_power,
                    cost_per_mb: cfg.cost_per_mb,
                    contributions: contributions_within(
                        cfg.grid_w,
                        cfg.grid_h,
                        sx,
                        sy,
                        capacity_radius,
                        cfg.capacity_peak_capacity,
                    ),
                });
            }
        }

        let mut e_covered = vec![false; pixels.len()];
        for cell in cells.iter().filter(|c| c.layer.is_coverage()) {
            for contribution in &cell.contributions {
                e_covered[contribution.pixel] = true;
            }
        }
        if e_covered.iter().all(|&c| c) {
            let doc = ScenarioDoc {
                cells,
                pixels: pixels.clone(),
            };
            // Invariant: anything we hand out loads cleanly.
            Network::from_document(&doc)?;
            return Ok(doc);
        }
    }
    Err(HarnessError::GeneratorCoverage {
        attempts: MAX_COVERAGE_RETRIES,
    })
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// Which controller to run, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ControllerSpec {
    AllOn,
    Night(NightScheduleConfig),
    RecedingHorizon(SynthesisConfig),
    Distributed {
        synthesis: SynthesisConfig,
        max_cells: usize,
    },
}

impl ControllerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerSpec::AllOn => "allon",
            ControllerSpec::Night(_) => "night",
            ControllerSpec::RecedingHorizon(_) => "rh",
            ControllerSpec::Distributed { .. } => "rh-distributed",
        }
    }
}

/// One comparison experiment: a scenario, a set of controllers, and the
/// replication seeds. The ALLON baseline is always run (it is the savings
/// denominator) even when not listed.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub scenario_name: String,
    pub sim: SimConfig,
    pub seeds: Vec<u64>,
    pub controllers: Vec<ControllerSpec>,
}

/// One (controller, seed) run of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub scenario_name: String,
    pub controller_name: String,
    pub seed: u64,
    pub energy: f64,
    pub penalty: f64,
    pub reward: f64,
    /// `1 - energy / energy(ALLON)` against the same-seed ALLON run.
    pub savings_vs_allon: f64,
    pub wall_time_seconds: f64,
    pub schedule_log: Option<PathBuf>,
}

fn build_controller(
    net: &Network,
    spec: &ControllerSpec,
    run_seed: u64,
) -> Result<Box<dyn Controller>, HarnessError> {
    Ok(match spec {
        ControllerSpec::AllOn => Box::new(AllOnController),
        ControllerSpec::Night(cfg) => Box::new(NightScheduleController::new(*cfg)),
        ControllerSpec::RecedingHorizon(cfg) => {
            // Planner randomness is derived from both the configured base
            // seed and the replication seed.
            let cfg = SynthesisConfig {
                seed: derive_seed(cfg.seed, run_seed),
                ..*cfg
            };
            Box::new(RecedingHorizonController::new(cfg)?)
        }
        ControllerSpec::Distributed {
            synthesis,
            max_cells,
        } => {
            let partitions = partition_network(net, *max_cells)?;
            let cfg = SynthesisConfig {
                seed: derive_seed(synthesis.seed, run_seed),
                ..*synthesis
            };
            Box::new(DistributedController::new(net, cfg, &partitions)?)
        }
    })
}

/// Run every requested controller once per seed and collect the comparison
/// rows. When `out_dir` is given, per-run schedule logs and `results.csv`
/// are written there.
pub fn run_experiment(
    net: &Network,
    model: &DemandModel,
    plan: &ExperimentPlan,
    out_dir: Option<&Path>,
) -> Result<Vec<ExperimentResult>, HarnessError> {
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
    }

    let mut specs: Vec<ControllerSpec> = Vec::new();
    if !plan.controllers.contains(&ControllerSpec::AllOn) {
        specs.push(ControllerSpec::AllOn);
    }
    specs.extend(plan.controllers.iter().cloned());

    let mut results: Vec<ExperimentResult> = Vec::new();
    let mut allon_energy: Vec<(u64, f64)> = Vec::new();

    for spec in &specs {
        for &seed in &plan.seeds {
            let mut controller = build_controller(net, spec, seed)?;
            let cfg = SimConfig { seed, ..plan.sim };
            let started = Instant::now();
            let out = run(net, model, controller.as_mut(), &cfg)?;
            let wall_time_seconds = started.elapsed().as_secs_f64();

            if matches!(spec, ControllerSpec::AllOn) {
                allon_energy.push((seed, out.breakdown.energy));
            }
            let baseline = allon_energy
                .iter()
                .find(|&&(s, _)| s == seed)
                .map(|&(_, e)| e)
                .expect("ALLON runs first for every seed");
            let savings_vs_allon = if baseline > 0.0 {
                1.0 - out.breakdown.energy / baseline
            } else {
                0.0
            };

            let schedule_log = match out_dir {
                Some(dir) => {
                    let path = dir.join(format!("schedule_{}_{}.csv", spec.name(), seed));
                    let mut file = io::BufWriter::new(fs::File::create(&path)?);
                    crate::sim::write_schedule_csv(&mut file, &out.schedule)?;
                    Some(path)
                }
                None => None,
            };

            results.push(ExperimentResult {
                scenario_name: plan.scenario_name.clone(),
                controller_name: spec.name().to_string(),
                seed,
                energy: out.breakdown.energy,
                penalty: out.breakdown.penalty,
                reward: out.breakdown.reward(),
                savings_vs_allon,
                wall_time_seconds,
                schedule_log,
            });
        }
    }

    if let Some(dir) = out_dir {
        let mut file = io::BufWriter::new(fs::File::create(dir.join("results.csv"))?);
        write_results_csv(&mut file, &results)?;
    }
    Ok(results)
}

/// Comma-separated result rows (plot-ready).
pub fn write_results_csv<W: io::Write>(w: &mut W, results: &[ExperimentResult]) -> io::Result<()> {
    writeln!(
        w,
        "scenario,controller,seed,energy,penalty,reward,savings_vs_allon,wall_time_seconds"
    )?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.scenario_name,
            r.controller_name,
            r.seed,
            r.energy,
            r.penalty,
            r.reward,
            r.savings_vs_allon,
            r.wall_time_seconds
        )?;
    }
    Ok(())
}

/// Human-readable comparison table, one row per (controller, seed).
pub fn format_results_table(results: &[ExperimentResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:>6} {:>14} {:>12} {:>14} {:>9} {:>9}",
        "controller", "seed", "energy", "penalty", "reward", "savings", "time[s]"
    );
    for r in results {
        let _ = writeln!(
            out,
            "{:<14} {:>6} {:>14.3} {:>12.3} {:>14.3} {:>8.2}% {:>9.2}",
            r.controller_name,
            r.seed,
            r.energy,
            r.penalty,
            r.reward,
            r.savings_vs_allon * 100.0,
            r.wall_time_seconds
        );
    }
    out
}
