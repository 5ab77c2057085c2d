//! The simplest end-to-end game: binary forecasting with the 1-D
//! exponential-Sobolev kernel against i.i.d. coin flips.
//!
//! Run with: cargo run --example binary_game

use k29::engine::{
    run_game, DatumSampler, ForecasterKind, IidObservationModel, LinkFunction, RealitySource,
    RunSetup, SkepticDescriptor,
};
use k29::forecaster::SolverConfig;
use k29::kernels::Kernel;
use k29::protocols::{ProtocolSpec, ProtocolVariant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let horizon = 400;
    let p_true = 0.3;
    let record = run_game(RunSetup {
        protocol: ProtocolSpec::new(ProtocolVariant::Binary)?,
        kernel: Kernel::sobolev_exp(1, 0)?,
        forecaster: ForecasterKind::K29,
        skeptic: SkepticDescriptor::Wlln,
        reality: RealitySource::iid(
            DatumSampler::None,
            IidObservationModel::Bernoulli { link: LinkFunction::Constant { p: p_true } },
            7,
        ),
        solver: SolverConfig::default(),
        horizon,
        initial_capital: 1.0,
        seed: 7,
        config_hash: "binary_game_example".into(),
    })?;

    println!("binary forecasting, {horizon} rounds, true p = {p_true}");
    println!(
        "{:>6} {:>10} {:>10} {:>12} {:>12} {:>14}",
        "round", "forecast", "outcome", "capital", "tensor_norm", "sqrt(n) bound"
    );
    for r in &record.rounds {
        if r.n % 50 == 0 || r.n <= 3 {
            println!(
                "{:>6} {:>10.4} {:>10} {:>12.6} {:>12.4} {:>14.4}",
                r.n,
                r.f[0],
                r.y[0] as u8,
                r.capital,
                r.tensor_norm,
                r.bound.unwrap_or(f64::NAN)
            );
        }
    }

    // The forecasts should settle near the true frequency, and the
    // Skeptic's capital should never grow (up to solver tolerance).
    let tail: Vec<f64> = record.rounds.iter().skip(horizon / 2).map(|r| r.f[0]).collect();
    let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    println!("\nmean forecast over the second half: {tail_mean:.4} (true p = {p_true})");
    println!(
        "final capital {:.9} (started at {}); max per-round gain {:.3e}",
        record.rounds.last().unwrap().capital,
        record.header.initial_capital,
        record
            .rounds
            .windows(2)
            .map(|w| w[1].capital - w[0].capital)
            .fold(f64::NEG_INFINITY, f64::max)
    );
    Ok(())
}
