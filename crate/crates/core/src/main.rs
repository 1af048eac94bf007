use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lmg_correlations::cli::{self, FigurePreset, RunConfig, Settings};
use lmg_correlations::correlations::{discord_xstate, evaluate};
use lmg_correlations::model::{initial_xstate, ModelParams};
use lmg_correlations::oracle::{discord_bruteforce, xstate_matrix_in_product_basis, DenseEvolver};
use lmg_correlations::reduced_dynamics::EvolutionContext;
use lmg_correlations::{Error, Result};

/// Correlation dynamics of two qubits coupled to an LMG spin bath.
#[derive(Parser)]
#[command(name = "lmg-correlations", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time series at one (lambda, lambda') point.
    Simulate(SimulateArgs),
    /// Time series over a grid of lambda values.
    Sweep(SweepArgs),
    /// Regenerate a published figure preset (fig1, fig2a..fig5d).
    Figure(FigureArgs),
    /// Compare block dynamics against dense diagonalization at one time.
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// key=value file; keys are the long flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    spins: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    kx: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ky: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    kz: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda_prime: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, allow_hyphen_values = true)]
    lambda_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda_max: Option<f64>,
    #[arg(long)]
    lambda_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "lambda_prime_equal_lambda")]
    lambda_prime: Option<f64>,
    #[arg(long)]
    lambda_prime_equal_lambda: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct FigureArgs {
    /// Preset name, or "all".
    name: String,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = cli::DEFAULT_T_MAX)]
    t_max: f64,
    #[arg(long, default_value_t = cli::DEFAULT_STEPS)]
    steps: usize,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    lambda_prime: f64,
    #[arg(long, default_value_t = 8)]
    spins: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    kx: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    ky: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    kz: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
}

fn settings(common: &CommonArgs) -> Result<Settings> {
    let mut s = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            Settings::from_file_text(&text)?
        }
        None => Settings::default(),
    };
    s.overlay("spins", common.spins);
    s.overlay("kx", common.kx);
    s.overlay("ky", common.ky);
    s.overlay("kz", common.kz);
    s.overlay("t-max", common.t_max);
    s.overlay("steps", common.steps);
    s.overlay("out", common.out.as_ref().map(|p| p.display()));
    if common.plot {
        s.overlay("plot", Some(true));
    }
    Ok(s)
}

fn warn_if_critical(config: &RunConfig) {
    if cli::touches_critical_point(config) {
        eprintln!(
            "warning: lambda = 1 is the critical point; the bath ground state is taken as the fully aligned Dicke state"
        );
    }
}

fn execute(config: &RunConfig) -> Result<()> {
    warn_if_critical(config);
    let rows = cli::run(config)?;
    let files = cli::emit_outputs(&rows, config)?;
    eprintln!("wrote {} rows to {}", rows.len(), files.csv.display());
    if let Some(plot) = files.plot {
        eprintln!("wrote {}", plot.display());
    }
    Ok(())
}

fn oracle(args: &OracleArgs) -> Result<()> {
    let params = ModelParams::new(args.lambda, args.lambda_prime, args.spins, args.kx, args.ky, args.kz)?;
    let ctx = EvolutionContext::new(params)?;
    let block = ctx.state_at(args.t)?;
    let initial = initial_xstate(args.kx, args.ky, args.kz)?;
    let dense = DenseEvolver::new(&params)?.reduced_matrix(&initial, args.t);
    let err = (xstate_matrix_in_product_basis(&block) - dense)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let closed = discord_xstate(&block)?.discord;
    let brute = discord_bruteforce(&block, 256, 8)?;
    let record = evaluate(&block, args.t)?;
    println!("phase            {}", ctx.phase());
    println!("ground index     {}", ctx.ground_index());
    println!("A B C            {:.12} {:.12} {:.12}", block.a, block.b, block.c);
    println!("Y Z              {:.12} {:.12}{:+.12}i", block.y, block.z.re, block.z.im);
    println!("max |block-dense| {err:.3e}");
    println!("discord closed   {closed:.12}");
    println!("discord brute    {brute:.12}");
    println!("concurrence      {:.12}", record.concurrence);
    println!("eof              {:.12}", record.eof);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let mut s = settings(&args.common)?;
            s.overlay("lambda", args.lambda);
            s.overlay("lambda-prime", args.lambda_prime);
            execute(&s.timeseries_config()?)
        }
        Command::Sweep(args) => {
            let mut s = settings(&args.common)?;
            s.overlay("lambda-min", args.lambda_min);
            s.overlay("lambda-max", args.lambda_max);
            s.overlay("lambda-steps", args.lambda_steps);
            s.overlay("lambda-prime", args.lambda_prime);
            if args.lambda_prime_equal_lambda {
                s.overlay("lambda-prime-equal-lambda", Some(true));
            }
            execute(&s.sweep_config()?)
        }
        Command::Figure(args) => {
            let presets = if args.name == "all" {
                FigurePreset::all()
            } else {
                vec![FigurePreset::parse(&args.name)?]
            };
            for preset in presets {
                let config = preset.config(&args.out_dir, args.t_max, args.steps);
                config.validate()?;
                execute(&config)?;
            }
            Ok(())
        }
        Command::Oracle(args) => oracle(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
