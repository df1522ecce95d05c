//! Command-line driver over the `greencells` library: scenario generation,
//! controller comparison runs, the brute-force oracle, and partition
//! inspection. Set `RAYON_NUM_THREADS` to override the parallelism level.

use std::error::Error;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use greencells::baselines::NightScheduleConfig;
use greencells::harness::{
    format_results_table, generate_scenario, run_experiment, ControllerSpec, ExperimentPlan,
    GeneratorConfig,
};
use greencells::network::Network;
use greencells::partition::{partition_network, write_cell_assignments, write_pixel_assignments};
use greencells::reward::RewardParams;
use greencells::rng::rng_from_seed;
use greencells::sim::SimConfig;
use greencells::synthesis::{brute_force_optimal, OptimizerKind, OracleConfig, SynthesisConfig};
use greencells::traffic::{generate_diurnal_trace, DemandModel, DemandTrace};

#[derive(Parser)]
#[command(
    name = "greencells",
    version,
    about = "Energy-aware ON/OFF scheduling for mobile-network cells"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario (and optionally a diurnal demand trace)
    Generate(GenerateArgs),
    /// Run controllers over a scenario and compare energy/penalty/reward
    Run(RunArgs),
    /// Exact brute-force optimum of a small instance
    Oracle(OracleArgs),
    /// Split a scenario into bounded geographic partitions
    Partition(PartitionArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario output path (JSON)
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 13)]
    stations: usize,
    #[arg(long, default_value_t = 3)]
    cells_per_station: usize,
    #[arg(long, default_value_t = 52)]
    grid_w: usize,
    #[arg(long, default_value_t = 52)]
    grid_h: usize,
    /// Coverage-cell radius in grid units
    #[arg(long, default_value_t = 18.0)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write a diurnal demand trace to this path
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    days: u32,
    /// Peak per-cell demand in megabits/hour
    #[arg(long, default_value_t = 200.0)]
    peak: f64,
    /// Night trough as a fraction of the peak
    #[arg(long, default_value_t = 0.1)]
    trough: f64,
    #[arg(long, default_value_t = 60)]
    step_minutes: u32,
    /// Multiplicative jitter halfwidth on trace samples
    #[arg(long, default_value_t = 0.0)]
    trace_noise: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ControllerKind {
    Allon,
    Night,
    Rh,
    RhDistributed,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OptimizerArg {
    Exhaustive,
    HillClimb,
    CrossEntropy,
}

impl From<OptimizerArg> for OptimizerKind {
    fn from(value: OptimizerArg) -> Self {
        match value {
            OptimizerArg::Exhaustive => OptimizerKind::Exhaustive,
            OptimizerArg::HillClimb => OptimizerKind::HillClimb,
            OptimizerArg::CrossEntropy => OptimizerKind::CrossEntropy,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    trace: PathBuf,
    /// Controller to run; repeat the flag to compare several
    #[arg(long = "controller", value_enum)]
    controllers: Vec<ControllerKind>,
    #[arg(long, default_value_t = 1440)]
    horizon: u64,
    #[arg(long, default_value_t = 60)]
    period: u32,
    #[arg(long, default_value_t = 60)]
    step_minutes: u32,
    /// Penalty per uncovered pixel per step
    #[arg(long, default_value_t = 1000.0)]
    penalty: f64,
    /// Replication seeds, comma separated
    #[arg(long, value_delimiter = ',', default_value = "42")]
    seeds: Vec<u64>,
    /// Demand-noise halfwidth (0 = deterministic replay)
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 180)]
    short_horizon: u32,
    #[arg(long, value_enum, default_value_t = OptimizerArg::HillClimb)]
    optimizer: OptimizerArg,
    #[arg(long, default_value_t = 1)]
    rollouts: u32,
    #[arg(long, default_value_t = 2000)]
    budget: u32,
    /// Base seed for strategy synthesis
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 60)]
    night_start: u32,
    #[arg(long, default_value_t = 360)]
    night_end: u32,
    #[arg(long, default_value_t = 8)]
    max_cells: usize,
    /// Shorthand for adding the rh-distributed controller
    #[arg(long)]
    distributed: bool,
    /// Write results.csv and per-run schedule logs here
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    trace: PathBuf,
    /// Start control period
    #[arg(long, default_value_t = 0)]
    t0: usize,
    #[arg(long, default_value_t = 180)]
    horizon: u32,
    #[arg(long, default_value_t = 60)]
    period: u32,
    #[arg(long, default_value_t = 60)]
    step_minutes: u32,
    #[arg(long, default_value_t = 1000.0)]
    penalty: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    rollouts: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse decision spaces above this many bits
    #[arg(long, default_value_t = 20)]
    max_bits: u32,
    /// Write the optimal schedule in the simulator's schedule-log format
    #[arg(long)]
    schedule_out: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 8)]
    max_cells: usize,
    /// Write partition_id,cell_id rows here
    #[arg(long)]
    cells_out: Option<PathBuf>,
    /// Write partition_id,pixel_id rows here
    #[arg(long)]
    pixels_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Box<dyn Error>> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Run(args) => run_cmd(args),
        Command::Oracle(args) => oracle(args),
        Command::Partition(args) => partition(args),
    }
}

fn load_model(
    scenario: &PathBuf,
    trace: &PathBuf,
    noise: f64,
) -> Result<(Network, DemandModel), Box<dyn Error>> {
    let net = Network::load_json(scenario)?;
    let trace = DemandTrace::load_json(trace, &net)?;
    let model = if noise > 0.0 {
        DemandModel::with_uniform_noise(trace, noise)?
    } else {
        DemandModel::deterministic(trace)
    };
    Ok((net, model))
}

fn generate(args: GenerateArgs) -> Result<(), Box<dyn Error>> {
    let cfg = GeneratorConfig {
        n_stations: args.stations,
        cells_per_station: args.cells_per_station,
        grid_w: args.grid_w,
        grid_h: args.grid_h,
        coverage_radius: args.radius,
        seed: args.seed,
        ..GeneratorConfig::default()
    };
    let doc = generate_scenario(&cfg)?;
    let net = Network::from_document(&doc)?;
    fs::write(&args.out, net.to_json_string())?;
    println!(
        "wrote scenario with {} cells / {} pixels to {}",
        net.nr_cells(),
        net.nr_pixels(),
        args.out.display()
    );

    if let Some(trace_out) = &args.trace_out {
        // Trace jitter gets its own stream so it is independent of the
        // station placement draws.
        let mut rng = rng_from_seed(greencells::rng::derive_seed(args.seed, 1));
        let trace = generate_diurnal_trace(
            &net,
            args.days,
            args.peak,
            args.trough,
            args.step_minutes,
            args.trace_noise,
            &mut rng,
        )?;
        fs::write(trace_out, trace.to_json_string())?;
        println!(
            "wrote {}-step trace ({} day(s)) to {}",
            trace.horizon_steps(),
            args.days,
            trace_out.display()
        );
    }
    Ok(())
}

fn run_cmd(args: RunArgs) -> Result<(), Box<dyn Error>> {
    let (net, model) = load_model(&args.scenario, &args.trace, args.noise)?;
    let synthesis = SynthesisConfig {
        short_horizon_minutes: args.short_horizon,
        control_period_minutes: args.period,
        rollouts_per_candidate: args.rollouts,
        candidate_budget: args.budget,
        optimizer: args.optimizer.into(),
        seed: args.seed,
    };

    let mut controllers = Vec::new();
    for kind in &args.controllers {
        controllers.push(match kind {
            ControllerKind::Allon => ControllerSpec::AllOn,
            ControllerKind::Night => {
                ControllerSpec::Night(NightScheduleConfig::new(args.night_start, args.night_end)?)
            }
            ControllerKind::Rh => ControllerSpec::RecedingHorizon(synthesis),
            ControllerKind::RhDistributed => ControllerSpec::Distributed {
                synthesis,
                max_cells: args.max_cells,
            },
        });
    }
    if args.distributed
        && !args
            .controllers
            .contains(&ControllerKind::RhDistributed)
    {
        controllers.push(ControllerSpec::Distributed {
            synthesis,
            max_cells: args.max_cells,
        });
    }

    let plan = ExperimentPlan {
        scenario_name: args
            .scenario
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into()),
        sim: SimConfig {
            horizon_minutes: args.horizon,
            control_period_minutes: args.period,
            step_minutes: args.step_minutes,
            penalty_per_pixel: args.penalty,
            seed: 0,
        },
        seeds: args.seeds,
        controllers,
    };
    let results = run_experiment(&net, &model, &plan, args.out_dir.as_deref())?;
    print!("{}", format_results_table(&results));
    if let Some(dir) = &args.out_dir {
        println!("results and schedule logs written to {}", dir.display());
    }
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<(), Box<dyn Error>> {
    let (net, model) = load_model(&args.scenario, &args.trace, args.noise)?;
    let params = RewardParams::new(args.penalty, args.step_minutes);
    let cfg = OracleConfig {
        horizon_minutes: args.horizon,
        control_period_minutes: args.period,
        rollouts_per_candidate: args.rollouts,
        seed: args.seed,
        max_decision_bits: args.max_bits,
    };
    let bits = net.capacity_cells().len() * (args.horizon / args.period) as usize;
    let (strategy, reward) = brute_force_optimal(&net, &model, &params, args.t0, &cfg)?;
    println!(
        "enumerated 2^{bits} = {} candidate sequences",
        1u64 << bits
    );
    println!("optimal expected reward: {reward}");
    for (i, action) in strategy.actions.iter().enumerate() {
        println!(
            "period {:>3} (t = {:>5} min): {}",
            strategy.start_period + i,
            (strategy.start_period + i) as u64 * args.period as u64,
            action.bitstring()
        );
    }

    if let Some(path) = &args.schedule_out {
        // Replay the strategy (padding the periods before t0 with all-ON)
        // and export its slice of the executed schedule. Period rewards are
        // stage-separable, so the padding does not disturb them.
        let mut actions = vec![greencells::action::ActionVector::all_on(&net); args.t0];
        actions.extend(strategy.actions.iter().cloned());
        let replay_cfg = SimConfig {
            horizon_minutes: actions.len() as u64 * args.period as u64,
            control_period_minutes: args.period,
            step_minutes: args.step_minutes,
            penalty_per_pixel: args.penalty,
            seed: args.seed,
        };
        let mut scripted = greencells::sim::ScriptedController::new(actions);
        let out = greencells::sim::run(&net, &model, &mut scripted, &replay_cfg)?;
        let mut file = std::io::BufWriter::new(fs::File::create(path)?);
        greencells::sim::write_schedule_csv(&mut file, &out.schedule[args.t0..])?;
        file.flush()?;
        println!("schedule written to {}", path.display());
    }
    Ok(())
}

fn partition(args: PartitionArgs) -> Result<(), Box<dyn Error>> {
    let net = Network::load_json(&args.scenario)?;
    let parts = partition_network(&net, args.max_cells)?;
    println!(
        "{} cells / {} pixels into {} partitions (max {} cells each)",
        net.nr_cells(),
        net.nr_pixels(),
        parts.len(),
        args.max_cells
    );
    for p in &parts {
        println!(
            "partition {:>3}: {:>3} cells {:?}, {:>5} owned pixels",
            p.id,
            p.cell_ids.len(),
            p.cell_ids,
            p.owned_pixel_ids.len()
        );
    }
    if let Some(path) = &args.cells_out {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        write_cell_assignments(&mut f, &parts)?;
        f.flush()?;
    }
    if let Some(path) = &args.pixels_out {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        write_pixel_assignments(&mut f, &parts)?;
        f.flush()?;
    }
    Ok(())
}
