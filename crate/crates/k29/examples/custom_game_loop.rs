//! Driving the forecaster directly, without the engine: your own round
//! loop, your own data, full access to fields and certificates. This is
//! the core API the engine itself is built on.
//!
//! Run with: cargo run --example custom_game_loop

use k29::forecaster::{K29Forecaster, SolverConfig};
use k29::geometry::Vector;
use k29::kernels::Kernel;
use k29::protocols::{ProtocolSpec, ProtocolVariant, RawObservation};
use k29::skeptic::{CapitalLedger, WllnSkeptic};
use k29::tensor_gram::TensorAccumulator;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let protocol = ProtocolSpec::new(ProtocolVariant::Binary)?;
    let kernel = Kernel::sobolev_exp(1, 0)?;
    let mut forecaster = K29Forecaster::new(
        kernel.clone(),
        protocol.domain().clone(),
        protocol.observations().clone(),
        SolverConfig::default(),
    )?;
    let mut skeptic = WllnSkeptic::new(kernel.clone());
    let mut ledger = CapitalLedger::new(1.0);
    let mut accumulator = TensorAccumulator::new(kernel);

    // A hand-written outcome stream: a regime switch after round 12.
    let outcomes = [1, 1, 0, 1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0];

    println!("{:>6} {:>10} {:>4} {:>14} {:>12}", "round", "forecast", "y", "certificate", "capital");
    for (i, &bit) in outcomes.iter().enumerate() {
        let x = Vector::zeros(0);
        // Forecaster moves, with a proof of defensiveness.
        let (f, certificate) = forecaster.next_forecast(&x)?;
        // Skeptic's move is a function of the forecast.
        let s = skeptic.wlln_move(&x, &f)?;
        // Reality moves.
        let y = protocol.encode_observation(&RawObservation::Bit(bit == 1))?;
        // Settlement.
        ledger.update(&s, &f, &y)?;
        accumulator.push(y.sub(&f), k29::kernels::Point::without_datum(f.clone()))?;
        skeptic.note_round(x.clone(), f.clone(), y.clone());
        forecaster.observe(x, f.clone(), y)?;
        println!(
            "{:>6} {:>10.4} {:>4} {:>14} {:>12.6}",
            i + 1,
            f.get(0),
            bit,
            format!("{:?}", certificate.kind),
            ledger.current()
        );
    }

    println!(
        "\ncapital identity: ledger gains = {:.9}, accumulator capital = {:.9}",
        ledger.current() - ledger.initial(),
        accumulator.capital()
    );
    println!(
        "tensor norm {:.4} <= diam·C_phi·sqrt(n) = {:.4}",
        accumulator.tensor_norm(),
        1.0 * (0.5f64).sqrt() * (outcomes.len() as f64).sqrt()
    );
    Ok(())
}
