//! Mean–variance forecasting: Reality plays numbers in [0, 1], Forecaster
//! commits to a mean and a variance each round. Internally the game runs on
//! the parabola hull co{(t, t²)}; forecasts decode back to (mean, variance).
//!
//! Run with: cargo run --example mean_variance_game

use k29::engine::{
    run_game, DatumSampler, ForecasterKind, IidObservationModel, RealitySource, RunSetup,
    SkepticDescriptor,
};
use k29::forecaster::SolverConfig;
use k29::geometry::Vector;
use k29::kernels::Kernel;
use k29::protocols::{DecodedForecast, ProtocolSpec, ProtocolVariant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let protocol = ProtocolSpec::new(ProtocolVariant::MeanVariance { lo: 0.0, hi: 1.0 })?;
    let horizon = 300;
    let record = run_game(RunSetup {
        protocol: protocol.clone(),
        kernel: Kernel::sobolev_exp(2, 0)?,
        forecaster: ForecasterKind::K29,
        skeptic: SkepticDescriptor::Wlln,
        reality: RealitySource::iid(
            DatumSampler::None,
            IidObservationModel::UniformRange,
            23,
        ),
        solver: SolverConfig::default(),
        horizon,
        initial_capital: 1.0,
        seed: 23,
        config_hash: "mean_variance_example".into(),
    })?;

    println!("mean-variance forecasting of t ~ Uniform[0,1], {horizon} rounds");
    println!("(true mean 0.5, true variance 1/12 = {:.4})\n", 1.0 / 12.0);
    println!("{:>6} {:>10} {:>10} {:>10}", "round", "mean", "variance", "t");
    for r in &record.rounds {
        if r.n % 50 == 0 || r.n <= 3 {
            let decoded = protocol.decode_forecast(&Vector::new(r.f.clone())?)?;
            let DecodedForecast::MeanVariance { mean, variance } = decoded else {
                unreachable!()
            };
            println!("{:>6} {:>10.4} {:>10.4} {:>10.4}", r.n, mean, variance, r.y[0]);
        }
    }

    let (mut mean_sum, mut var_sum) = (0.0, 0.0);
    let half = horizon / 2;
    for r in record.rounds.iter().skip(half) {
        let DecodedForecast::MeanVariance { mean, variance } =
            protocol.decode_forecast(&Vector::new(r.f.clone())?)?
        else {
            unreachable!()
        };
        mean_sum += mean;
        var_sum += variance;
    }
    let count = (horizon - half) as f64;
    println!(
        "\nsecond-half averages: mean {:.4}, variance {:.4}",
        mean_sum / count,
        var_sum / count
    );
    let last = record.rounds.last().unwrap();
    println!(
        "final capital {:.9}; tensor norm {:.4} vs bound {:.4}",
        last.capital,
        last.tensor_norm,
        last.bound.unwrap()
    );
    Ok(())
}
