use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use silevy_cli::commands::{self, Overrides};
use silevy_cli::config::ExperimentConfig;
use silevy_cli::verify::{verify, VerifySettings};
use silevy_cli::{to_json, CliError};

#[derive(Parser)]
#[command(
    name = "silevy",
    version,
    about = "Set-indexed Lévy process experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of paths, overrides the config.
    #[arg(long)]
    reps: Option<usize>,
    /// Output directory, overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate and export X paths (and Y paths with an integrand).
    Simulate(Common),
    /// Simulate Y = ∫ f dX, export it and check its jump structure.
    Integrate(Common),
    /// Estimate regularity exponents and compare them with theory.
    Exponent(Common),
    /// Run the verification experiments.
    Verify(Common),
    /// Print version and run statistics for a config.
    Info(Common),
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            reps: self.reps,
            out: self.out.clone(),
        }
    }

    fn experiment(&self) -> Result<silevy_cli::config::Experiment, CliError> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Usage("--config is required".into()))?;
        self.overrides()
            .apply(ExperimentConfig::load(path)?)
            .validate()
    }

    fn threads(&self) -> Result<(), CliError> {
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(CliError::Usage("--threads must be positive".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Simulate(c) => {
            c.threads()?;
            let index = commands::simulate(&c.experiment()?)?;
            println!("wrote {} paths", index.paths.len());
            Ok(true)
        }
        Command::Integrate(c) => {
            c.threads()?;
            let report = commands::integrate(&c.experiment()?)?;
            println!(
                "wrote {} paths, max jump error {:e}, support exact {}",
                report.paths.len(),
                report.max_jump_error,
                report.support_exact
            );
            Ok(report.max_jump_error == 0.0 && report.support_exact)
        }
        Command::Exponent(c) => {
            c.threads()?;
            let exp = c.experiment()?;
            let report = commands::exponent(&exp)?;
            if exp.config.out.is_none() {
                print!("{}", to_json(&report)?);
            }
            for v in &report.verdicts {
                eprintln!("{} {}", if v.pass { "PASS" } else { "FAIL" }, v.name);
            }
            Ok(report.all_pass())
        }
        Command::Verify(c) => {
            c.threads()?;
            let mut settings = match &c.config {
                Some(p) => VerifySettings::load(p)?,
                None => VerifySettings::default(),
            };
            if let Some(s) = c.seed {
                settings.seed = s;
            }
            if let Some(r) = c.reps {
                settings.reps = r;
            }
            if let Some(o) = c.out {
                settings.out = Some(o);
            }
            let report = verify(&settings)?;
            for check in &report.checks {
                println!("{}", check.line());
            }
            Ok(report.all_pass)
        }
        Command::Info(c) => {
            let exp = match &c.config {
                Some(_) => Some(c.experiment()?),
                None => None,
            };
            print!("{}", to_json(&commands::info(exp.as_ref()))?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
