//! Thin command-line front end; all logic lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use k29::cli::{self, DiagnoseOpts, SimulateOpts};

const USAGE: &str = "\
k29 — defensive forecasting in linear protocols

USAGE:
    k29 simulate --config RUN.toml [--config MORE.toml ...]
                 [--seed N] [--tolerance X] [--output-dir DIR]
    k29 diagnose --input TRANSCRIPT.jsonl [--config DIAG.toml]
                 [--tolerance X] [--output-dir DIR]
    k29 exploit-demo --config RUN.toml [--seed N]
    k29 verify --input TRANSCRIPT.jsonl
    k29 bench

FLAGS:
    --config PATH      run config (simulate, exploit-demo) or diagnostics
                       config (diagnose); repeatable for simulate
    --input PATH       transcript to audit
    --seed N           override the config's Reality seed
    --tolerance X      simulate: override solver field_tol;
                       diagnose: extra absolute allowance on bound checks
    --output-dir DIR   where transcripts, summaries and reports go

EXIT CODES:
    0 success, 1 validation error, 2 solver failure, 3 bound violation
";

struct Flags {
    configs: Vec<PathBuf>,
    input: Option<PathBuf>,
    seed: Option<u64>,
    tolerance: Option<f64>,
    output_dir: Option<PathBuf>,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags {
        configs: Vec::new(),
        input: None,
        seed: None,
        tolerance: None,
        output_dir: None,
    };
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let mut take = |name: &str| {
            iter.next()
                .map(String::as_str)
                .ok_or_else(|| format!("{name} needs a value"))
        };
        match arg.as_str() {
            "--config" => flags.configs.push(PathBuf::from(take("--config")?)),
            "--input" => flags.input = Some(PathBuf::from(take("--input")?)),
            "--seed" => {
                flags.seed = Some(
                    take("--seed")?
                        .parse()
                        .map_err(|e| format!("--seed: {e}"))?,
                )
            }
            "--tolerance" => {
                flags.tolerance = Some(
                    take("--tolerance")?
                        .parse()
                        .map_err(|e| format!("--tolerance: {e}"))?,
                )
            }
            "--output-dir" => flags.output_dir = Some(PathBuf::from(take("--output-dir")?)),
            other => return Err(format!("unknown flag {other}")),
        }
    }
    Ok(flags)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first().map(String::as_str) else {
        eprint!("{USAGE}");
        return ExitCode::from(cli::EXIT_VALIDATION as u8);
    };
    if matches!(command, "--help" | "-h" | "help") {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let flags = match parse_flags(&args[1..]) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprint!("{USAGE}");
            return ExitCode::from(cli::EXIT_VALIDATION as u8);
        }
    };
    let code = match command {
        "simulate" => cli::cmd_simulate(&SimulateOpts {
            configs: flags.configs,
            seed: flags.seed,
            tolerance: flags.tolerance,
            output_dir: flags.output_dir,
        }),
        "diagnose" => match flags.input {
            Some(input) => cli::cmd_diagnose(&DiagnoseOpts {
                input,
                config: flags.configs.into_iter().next(),
                tolerance: flags.tolerance,
                output_dir: flags.output_dir,
            }),
            None => {
                eprintln!("error: diagnose needs --input");
                cli::EXIT_VALIDATION
            }
        },
        "exploit-demo" => match flags.configs.first() {
            Some(config) => cli::cmd_exploit_demo(config, flags.seed),
            None => {
                eprintln!("error: exploit-demo needs --config");
                cli::EXIT_VALIDATION
            }
        },
        "verify" => match flags.input {
            Some(input) => cli::cmd_verify(&input),
            None => {
                eprintln!("error: verify needs --input");
                cli::EXIT_VALIDATION
            }
        },
        "bench" => cli::cmd_bench(),
        other => {
            eprintln!("error: unknown command {other}");
            eprint!("{USAGE}");
            cli::EXIT_VALIDATION
        }
    };
    ExitCode::from(code as u8)
}
