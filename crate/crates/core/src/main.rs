use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qlbm::circuits::resources::{reports_to_csv, streaming_sweep};
use qlbm::circuits::{reference_reports, resource_report};
use qlbm::lbm::{
    check_stochastic_consistency, compute_k_field, make_model, Grid, ModelName,
};
use qlbm::pipeline::{emit_outputs, run, run_noise_companion, ExperimentConfig};
use qlbm::QlbmError;

#[derive(Parser)]
#[command(
    name = "qlbm",
    about = "Quantum lattice Boltzmann workbench for the advection-diffusion equation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run(RunArgs),
    /// Print streaming-operator resource tables.
    Resources(ResourceArgs),
    /// Run the noise-estimation companion and print the channel estimate.
    NoiseEstimate(RunArgs),
    /// Compare the quantum pipeline against the classical solver step by step.
    Compare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file of key=value lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// Grid sides, e.g. 16x16 or 8x8x8.
    #[arg(long)]
    grid: Option<String>,
    /// uniform:ux,uy[,uz] | swirl2d | swirl3d
    #[arg(long)]
    field: Option<String>,
    /// gaussian:mx,my[,mz],sigma | sin2d | sin3d
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    /// per-step | single-circuit
    #[arg(long)]
    mode: Option<String>,
    /// dense | one-hot
    #[arg(long)]
    encoding: Option<String>,
    /// exact | mps:chi,layers
    #[arg(long)]
    loader: Option<String>,
    /// 0 runs on exact distributions.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    noise_lambda: Option<f64>,
    #[arg(long)]
    noise_background: Option<f64>,
    #[arg(long)]
    flag_checks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for run artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResourceArgs {
    /// Single model to report (with --grid); default prints the reference table.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated side lengths for a sweep of one model.
    #[arg(long)]
    sweep: Option<String>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig, QlbmError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            cfg.apply_file(&text)?;
        }
        let overrides: [(&str, Option<String>); 12] = [
            ("model", self.model),
            ("grid", self.grid),
            ("field", self.field),
            ("init", self.init),
            ("steps", self.steps.map(|v| v.to_string())),
            ("mode", self.mode),
            ("encoding", self.encoding),
            ("loader", self.loader),
            ("shots", self.shots.map(|v| v.to_string())),
            ("noise-lambda", self.noise_lambda.map(|v| v.to_string())),
            (
                "noise-background",
                self.noise_background.map(|v| v.to_string()),
            ),
            ("flag-checks", self.flag_checks.map(|v| v.to_string())),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = self.out {
            cfg.out_dir = Some(out);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn cmd_run(args: RunArgs) -> Result<(), QlbmError> {
    let cfg = args.into_config()?;
    let artifacts = run(&cfg)?;
    println!(
        "ran {} steps on {} ({:?} mode), success product {:.6e}",
        cfg.steps,
        Grid::new(&cfg.grid_dims)?.label(),
        cfg.mode,
        artifacts.success_product
    );
    for s in &artifacts.steps {
        println!(
            "  t={:3}  p={:.6}  fidelity={:.6}",
            s.t, s.success_probability, s.fidelity_to_oracle
        );
    }
    if let Some(dir) = &cfg.out_dir {
        let files = emit_outputs(&artifacts, dir)?;
        println!("wrote {} files under {}", files.len(), dir.display());
    }
    Ok(())
}

fn cmd_resources(args: ResourceArgs) -> Result<(), QlbmError> {
    let reports = match (&args.model, &args.sweep) {
        (Some(model), Some(sweep)) => {
            let name = ModelName::parse(model)?;
            let sides: Result<Vec<usize>, _> =
                sweep.split(',').map(|t| t.trim().parse::<usize>()).collect();
            let sides =
                sides.map_err(|_| QlbmError::InvalidConfig(format!("bad sweep '{sweep}'")))?;
            streaming_sweep(name, &sides)?
        }
        (Some(model), None) => {
            let name = ModelName::parse(model)?;
            let dims = qlbm::pipeline::config::parse_grid_dims(
                args.grid
                    .as_deref()
                    .ok_or_else(|| QlbmError::InvalidConfig("--grid required".into()))?,
            )?;
            vec![resource_report(name, &Grid::new(&dims)?)?]
        }
        (None, _) => reference_reports()?,
    };
    match &args.out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            reports_to_csv(&reports, &mut f)?;
            println!("wrote {}", path.display());
        }
        None => {
            let mut buf = Vec::new();
            reports_to_csv(&reports, &mut buf)?;
            print!("{}", String::from_utf8_lossy(&buf));
        }
    }
    Ok(())
}

fn cmd_noise_estimate(args: RunArgs) -> Result<(), QlbmError> {
    let cfg = args.into_config()?;
    let estimate = run_noise_companion(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&estimate)?);
    Ok(())
}

fn cmd_compare(args: RunArgs) -> Result<(), QlbmError> {
    let mut cfg = args.into_config()?;
    cfg.mode = qlbm::pipeline::RunMode::SingleCircuit;
    cfg.flag_checks = 0;
    cfg.validate()?;
    let model = make_model(cfg.model);
    let grid = Grid::new(&cfg.grid_dims)?;
    let kfield = compute_k_field(&model, &cfg.velocity, &grid)?;
    let consistency = check_stochastic_consistency(&kfield, &model);
    println!(
        "stochastic consistency: max deviation {:.3e} ({})",
        consistency.max_deviation,
        if consistency.pass { "pass" } else { "FAIL" }
    );
    let artifacts = run(&cfg)?;
    println!("t,fidelity_to_classical,step_success,cumulative");
    for s in &artifacts.steps {
        println!(
            "{},{:.12},{:.12},{:.12}",
            s.t, s.fidelity_to_oracle, s.success_probability, s.cumulative_success
        );
    }
    println!(
        "norm ratio ||phi_T||^2/||phi_0||^2 = {:.12e}, success product = {:.12e}",
        artifacts.norm_ratio_sq, artifacts.success_product
    );
    Ok(())
}

fn exit_for(err: &QlbmError) -> u8 {
    match err {
        QlbmError::InvalidConfig(_)
        | QlbmError::UnsupportedModel(_)
        | QlbmError::BadGridSide(_)
        | QlbmError::BadNoiseParameter(_) => 2,
        QlbmError::PostSelectionImpossible(_) => 3,
        QlbmError::Io(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Resources(args) => cmd_resources(args),
        Command::NoiseEstimate(args) => cmd_noise_estimate(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for(&err))
        }
    }
}
