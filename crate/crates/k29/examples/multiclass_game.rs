//! Multi-class forecasting on the probability simplex against an
//! adversarial Reality that always plays the class farthest from the
//! forecast. The defensive guarantee is worst-case, so the √n bound holds
//! anyway.
//!
//! Run with: cargo run --example multiclass_game

use k29::engine::{
    run_game, AdversarialPolicy, DatumSampler, ForecasterKind, RealitySource, RunSetup,
    SkepticDescriptor,
};
use k29::forecaster::{CertificateKind, SolverConfig};
use k29::kernels::Kernel;
use k29::protocols::{ProtocolSpec, ProtocolVariant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let horizon = 300;
    let record = run_game(RunSetup {
        protocol: ProtocolSpec::new(ProtocolVariant::MultiClass { classes: 3 })?,
        kernel: Kernel::gaussian_rbf(1.0, 3, 0)?,
        forecaster: ForecasterKind::K29,
        skeptic: SkepticDescriptor::Wlln,
        reality: RealitySource::adversarial(
            AdversarialPolicy::MaxResidual,
            DatumSampler::None,
            11,
        ),
        solver: SolverConfig::default(),
        horizon,
        initial_capital: 1.0,
        seed: 11,
        config_hash: "multiclass_game_example".into(),
    })?;

    println!("3-class forecasting, adversarial Reality (max-residual), {horizon} rounds\n");
    println!("{:>6} {:>26} {:>8} {:>12} {:>12}", "round", "forecast", "class", "tensor", "bound");
    for r in &record.rounds {
        if r.n % 50 == 0 || r.n <= 3 {
            let class = r.y.iter().position(|v| *v == 1.0).unwrap() + 1;
            println!(
                "{:>6} ({:>6.3}, {:>6.3}, {:>6.3}) {:>8} {:>12.4} {:>12.4}",
                r.n,
                r.f[0],
                r.f[1],
                r.f[2],
                class,
                r.tensor_norm,
                r.bound.unwrap_or(f64::NAN)
            );
        }
    }

    let mut kinds = [0usize; 3];
    for r in &record.rounds {
        match r.certificate.kind {
            CertificateKind::Zero => kinds[0] += 1,
            CertificateKind::BoundaryNormal => kinds[1] += 1,
            CertificateKind::Default => kinds[2] += 1,
            CertificateKind::Unverified => unreachable!("K29 always certifies"),
        }
    }
    println!(
        "\ncertificates: {} zero-field, {} boundary-normal, {} default",
        kinds[0], kinds[1], kinds[2]
    );
    let worst = record
        .rounds
        .iter()
        .map(|r| r.certificate.boundary_slack)
        .fold(0.0f64, f64::max);
    println!("worst per-round slack: {worst:.3e}");
    let last = record.rounds.last().unwrap();
    println!(
        "final tensor norm {:.4} vs bound {:.4} (margin {:.4})",
        last.tensor_norm,
        last.bound.unwrap(),
        last.bound.unwrap() - last.tensor_norm
    );
    Ok(())
}
