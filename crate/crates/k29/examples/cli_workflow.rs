//! The file-based workflow end to end: write a TOML run config, simulate,
//! then diagnose the transcript — the same steps the `k29` binary performs,
//! driven through the library.
//!
//! Run with: cargo run --example cli_workflow

use std::fs;

use k29::cli::{cmd_diagnose, cmd_simulate, cmd_verify, DiagnoseOpts, SimulateOpts};

const RUN_CONFIG: &str = r#"
horizon = 500

[protocol]
variant = "binary"

[kernel]
family = "sobolev_exp"
forecast_dim = 1
datum_dim = 1

[reality]
source = "iid"
seed = 2718

[reality.datum]
kind = "uniform_box"
bounds = [[-2.0, 2.0]]

[reality.observations]
kind = "bernoulli"

[reality.observations.link]
kind = "logistic"
weights = [1.0]
bias = 0.0
"#;

const DIAG_CONFIG: &str = r#"
activity_factor = 10.0

[[neighborhoods]]
center = [0.5, 0.0]
half_width = [0.25, 1.0]

[[neighborhoods]]
center = [0.269, -1.0]
half_width = [0.25, 1.0]

[[rkhs_tests]]
center = [0.5, 0.0]
half_width = [0.3, 1.2]
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("k29-cli-workflow");
    fs::create_dir_all(&dir)?;
    let run_path = dir.join("run.toml");
    let diag_path = dir.join("diagnostics.toml");
    fs::write(&run_path, RUN_CONFIG)?;
    fs::write(&diag_path, DIAG_CONFIG)?;

    println!("== simulate ==");
    let code = cmd_simulate(&SimulateOpts {
        configs: vec![run_path.clone()],
        seed: None,
        tolerance: None,
        output_dir: Some(dir.clone()),
    });
    assert_eq!(code, 0, "simulate failed");

    let transcript = dir.join("run.transcript.jsonl");
    println!("\n== verify ==");
    assert_eq!(cmd_verify(&transcript), 0);

    println!("\n== diagnose ==");
    let code = cmd_diagnose(&DiagnoseOpts {
        input: transcript,
        config: Some(diag_path),
        tolerance: None,
        output_dir: Some(dir.clone()),
    });
    assert_eq!(code, 0, "diagnose reported a violation");

    println!("\nreports written to {}:", dir.display());
    for name in ["run.transcript.jsonl", "run.summary.csv", "bound_series.csv", "calibration.csv", "rkhs_0.csv"] {
        let path = dir.join(name);
        println!("  {name:<24} {:>8} bytes", fs::metadata(&path)?.len());
    }
    Ok(())
}
