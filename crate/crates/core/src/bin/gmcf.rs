use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gmcf::experiment::config::{parse_config, RunConfig};
use gmcf::experiment::run::{run_case, verdict_lines, EXIT_CHECK_FAILED, EXIT_CONFIG};
use gmcf::experiment::sweep::resolution_sweep;
use gmcf::monitor::identities::fuzz_identities;

#[derive(Parser)]
#[command(name = "gmcf", version, about = "Graphical mean curvature flow on flat tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration and check the monitored bounds.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.dir`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Repeat a configuration over several square resolutions.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
        resolutions: Vec<usize>,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Fuzz the pointwise algebraic identities with random frames.
    CheckIdentities {
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(path: &PathBuf) -> Result<RunConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG as u8)
    })?;
    parse_config(&text).map_err(|errs| {
        for e in &errs.0 {
            eprintln!("error: {e}");
        }
        ExitCode::from(EXIT_CONFIG as u8)
    })
}

fn run(config: PathBuf, output: Option<PathBuf>) -> ExitCode {
    let mut cfg = match load(&config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(dir) = output {
        cfg.output.dir = dir;
    }
    match run_case(&cfg) {
        Ok(out) => {
            for line in verdict_lines(&out.report) {
                println!("{line}");
            }
            if let Some(e) = &out.summary.blow_up {
                eprintln!("blow-up: {e}");
            }
            if let Some(e) = &out.summary.monitor_error {
                eprintln!("monitor error: {e}");
            }
            println!(
                "t = {} after {} steps; outputs in {}",
                out.summary.t_final,
                out.summary.steps,
                cfg.output.dir.display()
            );
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}

fn sweep(config: PathBuf, resolutions: Vec<usize>, json: bool) -> ExitCode {
    let cfg = match load(&config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match resolution_sweep(&cfg, &resolutions) {
        Ok(rep) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&rep).expect("sweep report serializes"));
            } else {
                print!("{}", rep.table());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}

fn check_identities(samples: u64, seed: u64) -> ExitCode {
    let rep = fuzz_identities(samples, seed);
    let lines = [
        (rep.relation_ok(1e-10), format!("relation max relative residual {:.3e}", rep.relation_max_relative)),
        (rep.pythagoras_ok(1e-13), format!("S^2 + T^2 = 1 max residual {:.3e}", rep.pythagoras_max)),
        (
            rep.li_li_ok(),
            format!("Li-Li max ratio {:.6} with {} violations", rep.li_li_max_ratio, rep.li_li_violations),
        ),
    ];
    let mut ok = true;
    for (pass, text) in &lines {
        ok &= *pass;
        println!("{} {text}", if *pass { "PASS" } else { "FAIL" });
    }
    println!("{} samples, seed {}", rep.samples, rep.seed);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED as u8)
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, output } => run(config, output),
        Command::Sweep { config, resolutions, json } => sweep(config, resolutions, json),
        Command::CheckIdentities { samples, seed } => check_identities(samples, seed),
    }
}
