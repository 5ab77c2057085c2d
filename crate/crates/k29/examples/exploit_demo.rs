//! Why forecasts must stay in the convex hull of the observations: against
//! any rule that leaves the hull, the separating Skeptic earns at least
//! scale·distance² per round, every round, whatever Reality does. Against
//! an in-hull rule it can do nothing.
//!
//! Run with: cargo run --example exploit_demo

use k29::engine::{
    run_game, DatumSampler, ForecasterKind, IidObservationModel, LinkFunction, RealitySource,
    RunSetup, SkepticDescriptor,
};
use k29::forecaster::SolverConfig;
use k29::kernels::Kernel;
use k29::protocols::{ProtocolSpec, ProtocolVariant};

fn run_with_rule(value: f64, label: &str) -> Result<(), Box<dyn std::error::Error>> {
    let record = run_game(RunSetup {
        protocol: ProtocolSpec::new(ProtocolVariant::Binary)?,
        kernel: Kernel::constant(1.0, 1, 0)?,
        forecaster: ForecasterKind::Fixed { value: vec![value] },
        skeptic: SkepticDescriptor::Exploit { scale: 10.0 },
        reality: RealitySource::iid(
            DatumSampler::None,
            IidObservationModel::Bernoulli { link: LinkFunction::Constant { p: 0.5 } },
            3,
        ),
        solver: SolverConfig::default(),
        horizon: 50,
        initial_capital: 1.0,
        seed: 3,
        config_hash: "exploit_example".into(),
    })?;

    println!("rule: f = {value} ({label}), separation Skeptic with scale 10");
    let exploited = record.rounds.iter().filter(|r| r.skeptic_gain > 0.0).count();
    if exploited == 0 {
        println!("  no exploitation possible: the rule stays in [0, 1]; capital constant at 1\n");
        return Ok(());
    }
    println!("  {:>6} {:>6} {:>10} {:>12}", "round", "y", "gain", "capital");
    for r in record.rounds.iter().take(5) {
        println!(
            "  {:>6} {:>6} {:>10.4} {:>12.4}",
            r.n, r.y[0] as u8, r.skeptic_gain, r.capital
        );
    }
    let min_gain = record
        .rounds
        .iter()
        .map(|r| r.skeptic_gain)
        .fold(f64::INFINITY, f64::min);
    println!(
        "  ... min gain per round {min_gain:.4} (guarantee: 10·dist² = {:.4}); final capital {:.2}\n",
        10.0 * (value - 1.0f64).powi(2),
        record.rounds.last().unwrap().capital
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_with_rule(1.2, "outside the hull")?;
    run_with_rule(0.5, "inside the hull")?;
    Ok(())
}
