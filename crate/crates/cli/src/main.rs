use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mpfgmres_cli::{output, parse_settings, run_grid, run_recommend, run_single, CliError, ExperimentConfig};

/// Mixed-precision FGMRES experiments.
#[derive(Parser)]
#[command(name = "mpfgmres", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and report every diagnostic.
    Solve(SolveArgs),
    /// Sweep u_L and u_R, writing BE/FE/zeta/IC/rho matrices.
    Grid(GridArgs),
    /// Pilot solve in double, recommend precisions, verify them.
    Recommend(SolveArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// synthetic:c=5,n=200,seed=1 | file:PATH[,seed=N] | identity:n=N
    #[arg(long)]
    problem: Option<String>,
    /// none | left | right | split
    #[arg(long)]
    precond: Option<String>,
    /// Format of the LU factors (default: mp4 for synthetic c < 6, else single).
    #[arg(long = "factor-format")]
    factor_format: Option<String>,
    #[arg(long = "u")]
    u: Option<String>,
    #[arg(long = "uA")]
    u_a: Option<String>,
    #[arg(long = "uL")]
    u_l: Option<String>,
    #[arg(long = "uR")]
    u_r: Option<String>,
    /// `4u` (a multiple of the working unit roundoff) or a number.
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    maxit: Option<String>,
    /// Directory for CSV, report and metadata files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    base: SolveArgs,
    /// Comma-separated u_L formats (default half,single,double,quad).
    #[arg(long = "uL-list")]
    u_l_list: Option<String>,
    #[arg(long = "uR-list")]
    u_r_list: Option<String>,
}

impl SolveArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let pairs = [
            ("problem", &self.problem),
            ("precond", &self.precond),
            ("factor-format", &self.factor_format),
            ("u", &self.u),
            ("uA", &self.u_a),
            ("uL", &self.u_l),
            ("uR", &self.u_r),
            ("tol", &self.tol),
            ("maxit", &self.maxit),
        ];
        let mut out: Vec<(&'static str, String)> = pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))).collect();
        if let Some(dir) = &self.out {
            out.push(("out", dir.display().to_string()));
        }
        out
    }

    fn config(&self, extra: Vec<(&'static str, String)>) -> Result<ExperimentConfig, CliError> {
        let mut settings = match &self.config {
            Some(path) => parse_settings(&std::fs::read_to_string(path)?)?,
            None => Default::default(),
        };
        for (k, v) in self.overrides().into_iter().chain(extra) {
            settings.insert(k.to_string(), v);
        }
        ExperimentConfig::from_settings(settings)
    }
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    let stdout = std::io::stdout().lock();
    match cli.command {
        Command::Solve(args) => {
            let cfg = args.config(vec![])?;
            let (prep, cell) = run_single(&cfg)?;
            output::emit_single(&cfg, &prep, &cell, stdout)?;
            Ok(if cell.solve.converged { 0 } else { 2 })
        }
        Command::Grid(args) => {
            let lists = [("uL-list", &args.u_l_list), ("uR-list", &args.u_r_list)];
            let extra = lists.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))).collect();
            let cfg = args.base.config(extra)?;
            let (prep, cells) = run_grid(&cfg)?;
            output::emit_grid(&cfg, &prep, &cells, stdout)?;
            Ok(0)
        }
        Command::Recommend(args) => {
            let cfg = args.config(vec![])?;
            let (prep, rec) = run_recommend(&cfg)?;
            output::emit_recommend(&cfg, &prep, &rec, stdout)?;
            Ok(if rec.verification.solve.converged { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
