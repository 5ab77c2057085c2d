//! Acceptance suite: every guarantee the library claims, run end to end at
//! desk scale with pinned tolerances. One test per criterion; each prints a
//! `ACCEPTANCE <name>: PASS` line (visible with `--nocapture`).

use std::sync::OnceLock;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

use k29::diagnostics::{calibration_report, TentFunction};
use k29::engine::{
    run_batch, run_game, AdversarialPolicy, DatumSampler, ForecasterKind, GameRecord,
    IidObservationModel, LinkFunction, RealitySource, RunSetup, SkepticDescriptor,
};
use k29::forecaster::{CertificateKind, K29Forecaster, SolverConfig};
use k29::geometry::{ConvexDomain, ObservationSet, Vector};
use k29::kernels::{Kernel, Point};
use k29::protocols::{ProtocolSpec, ProtocolVariant};
use k29::skeptic::{bernoulli_bound, CapitalLedger, WllnSkeptic};
use k29::tensor_gram::{outer_product_norm, FiniteTensor, TensorAccumulator};

const BATTERY_HORIZON: usize = 500;
const BATTERY_SEEDS: u64 = 20;
/// Solver tolerance for the battery: with the scale normalization this
/// keeps every certificate slack at 500 rounds well below 1e-6.
const BATTERY_FIELD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum KernelChoice {
    Constant,
    SobolevExp,
    GaussianRbf,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum RealityChoice {
    Iid,
    Adversarial,
}

struct BatteryRun {
    protocol: ProtocolVariant,
    kernel: KernelChoice,
    reality: RealityChoice,
    seed: u64,
    record: GameRecord,
}

fn battery_protocols() -> Vec<ProtocolVariant> {
    vec![
        ProtocolVariant::Binary,
        ProtocolVariant::MultiClass { classes: 3 },
        ProtocolVariant::BoundedRegression { lo: 0.0, hi: 1.0 },
        ProtocolVariant::MeanVariance { lo: 0.0, hi: 1.0 },
    ]
}

fn battery_kernel(choice: KernelChoice, obs_dim: usize) -> Kernel {
    match choice {
        KernelChoice::Constant => Kernel::constant(1.0, obs_dim, 0).unwrap(),
        KernelChoice::SobolevExp => Kernel::sobolev_exp(obs_dim, 0).unwrap(),
        KernelChoice::GaussianRbf => Kernel::gaussian_rbf(1.0, obs_dim, 0).unwrap(),
    }
}

fn battery_reality(
    choice: RealityChoice,
    variant: &ProtocolVariant,
    seed: u64,
) -> RealitySource {
    match choice {
        RealityChoice::Iid => {
            let model = match variant {
                ProtocolVariant::Binary => IidObservationModel::Bernoulli {
                    link: LinkFunction::Constant { p: 0.5 },
                },
                ProtocolVariant::MultiClass { .. } => IidObservationModel::Categorical {
                    probs: vec![0.5, 0.3, 0.2],
                },
                ProtocolVariant::BoundedRegression { .. }
                | ProtocolVariant::MeanVariance { .. } => IidObservationModel::UniformRange,
            };
            RealitySource::iid(DatumSampler::None, model, seed)
        }
        RealityChoice::Adversarial => {
            RealitySource::adversarial(AdversarialPolicy::MaxResidual, DatumSampler::None, seed)
        }
    }
}

fn battery() -> &'static Vec<BatteryRun> {
    static CELL: OnceLock<Vec<BatteryRun>> = OnceLock::new();
    CELL.get_or_init(|| {
        let solver = SolverConfig { field_tol: BATTERY_FIELD_TOL, ..SolverConfig::default() };
        let mut labels = Vec::new();
        let mut setups = Vec::new();
        for seed in 0..BATTERY_SEEDS {
            for variant in battery_protocols() {
                for kernel_choice in
                    [KernelChoice::Constant, KernelChoice::SobolevExp, KernelChoice::GaussianRbf]
                {
                    for reality_choice in [RealityChoice::Iid, RealityChoice::Adversarial] {
                        let protocol = ProtocolSpec::new(variant.clone()).unwrap();
                        let kernel = battery_kernel(kernel_choice, protocol.obs_dim());
                        let reality = battery_reality(reality_choice, &variant, seed);
                        labels.push((variant.clone(), kernel_choice, reality_choice, seed));
                        setups.push(RunSetup {
                            protocol,
                            kernel,
                            forecaster: ForecasterKind::K29,
                            skeptic: SkepticDescriptor::Wlln,
                            reality,
                            solver,
                            horizon: BATTERY_HORIZON,
                            initial_capital: 0.0,
                            seed,
                            config_hash: String::new(),
                        });
                    }
                }
            }
        }
        let records = run_batch(setups);
        labels
            .into_iter()
            .zip(records)
            .map(|((protocol, kernel, reality, seed), outcome)| BatteryRun {
                record: outcome.unwrap_or_else(|e| {
                    panic!("run failed for {protocol:?}/{kernel:?}/{reality:?}/seed {seed}: {e}")
                }),
                protocol,
                kernel,
                reality,
                seed,
            })
            .collect()
    })
}

/// Criterion: on every battery run, every round's certificate keeps
/// `sup_y ⟨S_n(f_n), y − f_n⟩ ≤ 1e-6` and the WLLN capital never gains more
/// than `2e-6` per round.
#[test]
fn defensive_guarantee_per_round() {
    let runs = battery();
    assert_eq!(runs.len(), 20 * 4 * 3 * 2);
    for run in runs {
        let label = format!(
            "{:?}/{:?}/{:?}/seed {}",
            run.protocol, run.kernel, run.reality, run.seed
        );
        assert_eq!(run.record.rounds.len(), BATTERY_HORIZON, "{label} truncated");
        let mut prev_capital = run.record.header.initial_capital;
        for round in &run.record.rounds {
            assert!(
                round.certificate.kind != CertificateKind::Unverified,
                "{label} round {} lacks a certificate",
                round.n
            );
            assert!(
                round.certificate.boundary_slack <= 1e-6,
                "{label} round {}: slack {:.3e}",
                round.n,
                round.certificate.boundary_slack
            );
            assert!(
                round.capital <= prev_capital + 2e-6,
                "{label} round {}: capital grew by {:.3e}",
                round.n,
                round.capital - prev_capital
            );
            prev_capital = round.capital;
        }
    }
    println!("ACCEPTANCE defensive_guarantee_per_round: PASS ({} runs)", runs.len());
}

/// Criterion: on every battery run, `tensor_norm(n) ≤ diam·C_Φ·√n + 1e-3`
/// for all n, and with the constant kernel on the binary protocol the bound
/// holds to 1e-6.
#[test]
fn sqrt_n_tensor_bound() {
    let runs = battery();
    for run in runs {
        let strict = run.kernel == KernelChoice::Constant
            && matches!(run.protocol, ProtocolVariant::Binary);
        let slack = if strict { 1e-6 } else { 1e-3 };
        for round in &run.record.rounds {
            let bound = round.bound.expect("battery kernels all have C_Phi");
            assert!(
                round.tensor_norm <= bound + slack,
                "{:?}/{:?}/{:?}/seed {} round {}: {} > {} + {slack}",
                run.protocol,
                run.kernel,
                run.reality,
                run.seed,
                round.n,
                round.tensor_norm,
                bound
            );
        }
    }
    println!("ACCEPTANCE sqrt_n_tensor_bound: PASS ({} runs)", runs.len());
}

fn random_hull_point(rng: &mut ChaCha12Rng, domain: &ConvexDomain) -> Vector {
    match domain {
        ConvexDomain::Interval { lo, hi } => {
            Vector::new(vec![rng.random_range(*lo..*hi)]).unwrap()
        }
        ConvexDomain::Simplex { m } => {
            let mut raw: Vec<f64> = (0..*m).map(|_| rng.random_range(1e-6..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.iter_mut().for_each(|v| *v /= total);
            Vector::new(raw).unwrap()
        }
        ConvexDomain::ParabolaHull { lo, hi } => {
            let a = rng.random_range(*lo..*hi);
            let chord = (lo + hi) * a - lo * hi;
            let b = rng.random_range(a * a..chord.max(a * a + 1e-12));
            Vector::new(vec![a, b]).unwrap()
        }
        other => {
            let verts = other.vertices();
            let mut weights: Vec<f64> =
                (0..verts.len()).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            let mut point = Vector::zeros(other.dim());
            for (v, w) in verts.iter().zip(weights) {
                point = point.axpy(w, v);
            }
            other.project(&point).unwrap()
        }
    }
}

fn random_observation(rng: &mut ChaCha12Rng, observations: &ObservationSet) -> Vector {
    match observations {
        ObservationSet::Finite { points } => {
            points[rng.random_range(0..points.len())].clone()
        }
        ObservationSet::Interval { lo, hi } => {
            Vector::new(vec![rng.random_range(*lo..*hi)]).unwrap()
        }
        ObservationSet::Arc { lo, hi } => {
            let t = rng.random_range(*lo..*hi);
            Vector::new(vec![t, t * t]).unwrap()
        }
        ObservationSet::Box { bounds } => Vector::new(
            bounds
                .iter()
                .map(|(lo, hi)| rng.random_range(*lo..*hi))
                .collect(),
        )
        .unwrap(),
    }
}

/// Criterion: on random transcripts, initial capital plus the accumulated
/// WLLN gains equals the Gram accumulator's capital to 1e-9 relative.
#[test]
fn capital_identity_random_transcripts() {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    let protocols = battery_protocols();
    for case in 0..50 {
        let variant = protocols[case % protocols.len()].clone();
        let protocol = ProtocolSpec::new(variant).unwrap();
        let kernel = battery_kernel(
            [KernelChoice::Constant, KernelChoice::SobolevExp, KernelChoice::GaussianRbf]
                [case % 3],
            protocol.obs_dim(),
        );
        let mut skeptic = WllnSkeptic::new(kernel.clone());
        let mut acc = TensorAccumulator::new(kernel);
        let mut ledger = CapitalLedger::new(0.0);
        for _ in 0..100 {
            let f = random_hull_point(&mut rng, protocol.domain());
            let y = random_observation(&mut rng, protocol.observations());
            let s = skeptic.wlln_move(&Vector::zeros(0), &f).unwrap();
            ledger.update(&s, &f, &y).unwrap();
            skeptic.note_round(Vector::zeros(0), f.clone(), y.clone());
            acc.push(y.sub(&f), Point::without_datum(f)).unwrap();
        }
        let gains = ledger.current() - 0.0;
        let capital = acc.capital();
        assert!(
            (gains - capital).abs() <= 1e-9 * (1.0 + gains.abs() + capital.abs()),
            "case {case}: {gains} vs {capital}"
        );
    }
    println!("ACCEPTANCE capital_identity_random_transcripts: PASS (50 transcripts)");
}

/// Criterion: the Gram path matches explicit outer-product tensors for
/// feature maps into R^d, and the rank-one product identity and the
/// contraction inequality hold at their stated tolerances.
#[test]
fn gram_matches_explicit_tensors() {
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    let rand_vec = |rng: &mut ChaCha12Rng, d: usize| {
        Vector::new((0..d).map(|_| rng.random_range(-1.5..1.5)).collect::<Vec<_>>()).unwrap()
    };
    for case in 0..100 {
        let dim_l = rng.random_range(1..=4);
        let dim_h = rng.random_range(1..=5);
        let n = rng.random_range(1..=50);
        let kernel = Kernel::linear(1, dim_h).unwrap();
        let mut acc = TensorAccumulator::new(kernel);
        let mut residuals = Vec::new();
        let mut features = Vec::new();
        for _ in 0..n {
            let r = rand_vec(&mut rng, dim_l);
            let h = rand_vec(&mut rng, dim_h);
            acc.push(r.clone(), Point::new(Vector::zeros(1), h.clone())).unwrap();
            residuals.push(r);
            features.push(h);
        }
        let oracle_sq = outer_product_norm(&residuals, &features).unwrap().powi(2);
        let got_sq = acc.tensor_norm().powi(2);
        assert!(
            (got_sq - oracle_sq).abs() <= 1e-9 * (1.0 + oracle_sq),
            "case {case}: {got_sq} vs {oracle_sq}"
        );

        // Rank-one identity (l ⊗ h₁)h₂ = ⟨h₁,h₂⟩l to 1e-12.
        let l = rand_vec(&mut rng, dim_l);
        let h1 = rand_vec(&mut rng, dim_h);
        let h2 = rand_vec(&mut rng, dim_h);
        let got = FiniteTensor::outer(&l, &h1).apply(&h2).unwrap();
        assert!(got.dist(&l.scale(h1.dot(&h2))) <= 1e-12);

        // Contraction inequality ‖vh‖ ≤ ‖v‖·‖h‖ for general tensors.
        let mut tensor = FiniteTensor::zeros(dim_l, dim_h);
        for (r, h) in residuals.iter().zip(&features) {
            tensor.add_assign(&FiniteTensor::outer(r, h)).unwrap();
        }
        let h = rand_vec(&mut rng, dim_h);
        assert!(
            tensor.apply(&h).unwrap().norm() <= tensor.frobenius_norm() * h.norm() + 1e-12
        );
    }
    println!("ACCEPTANCE gram_matches_explicit_tensors: PASS (100 cases)");
}

/// Criterion: projection laws on 1000 random (domain, point) pairs per
/// domain variant: idempotence 1e-12, non-expansiveness 1e-12, variational
/// inequality 1e-10, membership 1e-12.
#[test]
fn projection_laws() {
    let domains = vec![
        ConvexDomain::interval(-0.5, 1.5).unwrap(),
        ConvexDomain::boxed(vec![(-1.0, 1.0), (0.0, 2.0)]).unwrap(),
        ConvexDomain::simplex(4).unwrap(),
        ConvexDomain::parabola_hull(-1.0, 1.5).unwrap(),
        ConvexDomain::finite_hull(vec![
            Vector::new(vec![0.0, 0.0, 0.0]).unwrap(),
            Vector::new(vec![1.0, 0.2, -0.3]).unwrap(),
            Vector::new(vec![0.1, 1.1, 0.4]).unwrap(),
            Vector::new(vec![-0.8, 0.5, 0.9]).unwrap(),
            Vector::new(vec![0.3, -0.6, 0.7]).unwrap(),
        ])
        .unwrap(),
    ];
    let mut rng = ChaCha12Rng::seed_from_u64(4096);
    for domain in &domains {
        for case in 0..1000 {
            let p = Vector::new(
                (0..domain.dim())
                    .map(|_| rng.random_range(-3.0..3.0))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let proj = domain.project(&p).unwrap();
            assert!(
                domain.project(&proj).unwrap().dist(&proj) <= 1e-12,
                "idempotence failed for {domain:?} case {case}"
            );
            assert!(
                domain.distance(&proj).unwrap() <= 1e-12,
                "membership failed for {domain:?} case {case}"
            );
            for _ in 0..4 {
                let y = random_hull_point(&mut rng, domain);
                assert!(
                    p.sub(&proj).dot(&y.sub(&proj)) <= 1e-10,
                    "variational inequality failed for {domain:?} case {case}"
                );
            }
            let q = Vector::new(
                (0..domain.dim())
                    .map(|_| rng.random_range(-3.0..3.0))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let pq = domain.project(&q).unwrap();
            assert!(
                proj.dist(&pq) <= p.dist(&q) + 1e-12,
                "non-expansiveness failed for {domain:?} case {case}"
            );
        }
    }
    println!("ACCEPTANCE projection_laws: PASS (1000 cases x {} variants)", domains.len());
}

enum OracleOutcome {
    Endpoint(f64),
    Zeros(Vec<f64>),
}

/// Independent 1-D oracle: endpoint certificates first (in the same
/// priority order as the solver), otherwise every sign change bracketed on
/// a 1e-4-step grid and polished by bisection.
fn oracle_1d(fc: &K29Forecaster, x: &Vector) -> OracleOutcome {
    let field1 = |t: f64| fc.field(&Vector::new(vec![t]).unwrap(), x).unwrap().get(0);
    let (lo, hi) = (0.0, 1.0);
    let s_lo = field1(lo);
    if s_lo <= 0.0 {
        return OracleOutcome::Endpoint(lo);
    }
    let s_hi = field1(hi);
    if s_hi >= 0.0 {
        return OracleOutcome::Endpoint(hi);
    }
    let cells = 10_000usize;
    let step = (hi - lo) / cells as f64;
    let mut zeros = Vec::new();
    let mut prev_t = lo;
    let mut prev_s = s_lo;
    for i in 1..=cells {
        let t = if i == cells { hi } else { lo + i as f64 * step };
        let s = field1(t);
        if prev_s == 0.0 {
            zeros.push(prev_t);
        } else if prev_s * s < 0.0 {
            // Plain bisection, written independently of the solver.
            let (mut a, mut b, mut sa) = (prev_t, t, prev_s);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let sm = field1(mid);
                if sm == 0.0 || (b - a) < 1e-13 {
                    break;
                }
                if sa * sm < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    sa = sm;
                }
            }
            zeros.push(0.5 * (a + b));
        }
        prev_t = t;
        prev_s = s;
    }
    OracleOutcome::Zeros(zeros)
}

/// Criterion: on 200 random 1-D instances the solver agrees with the
/// grid+bisection oracle to 1e-3 (or both certify the same endpoint), and
/// on 100 simplex instances the returned certificate re-verifies against
/// vertex enumeration.
#[test]
fn solver_matches_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(555);
    let solver = SolverConfig { field_tol: 1e-10, ..SolverConfig::default() };
    for case in 0..200 {
        let kernel = battery_kernel(
            [KernelChoice::Constant, KernelChoice::SobolevExp, KernelChoice::GaussianRbf]
                [case % 3],
            1,
        );
        let mut fc = K29Forecaster::new(
            kernel,
            ConvexDomain::interval(0.0, 1.0).unwrap(),
            ObservationSet::Interval { lo: 0.0, hi: 1.0 },
            solver,
        )
        .unwrap();
        let n = rng.random_range(1..=50);
        for _ in 0..n {
            let f = Vector::new(vec![rng.random_range(0.0..1.0)]).unwrap();
            let y = Vector::new(vec![rng.random_range(0.0..1.0)]).unwrap();
            fc.observe(Vector::zeros(0), f, y).unwrap();
        }
        let x = Vector::zeros(0);
        let (f, cert) = fc.next_forecast(&x).unwrap();
        match oracle_1d(&fc, &x) {
            OracleOutcome::Endpoint(t) => {
                assert!(
                    (f.get(0) - t).abs() <= 1e-3,
                    "case {case}: solver {} vs oracle endpoint {t} ({cert:?})",
                    f.get(0)
                );
            }
            OracleOutcome::Zeros(zeros) => {
                assert!(!zeros.is_empty(), "case {case}: oracle lost the bracket");
                let nearest = zeros
                    .iter()
                    .map(|z| (f.get(0) - z).abs())
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    nearest <= 1e-3,
                    "case {case}: solver {} not within 1e-3 of any oracle zero {zeros:?}",
                    f.get(0)
                );
                assert_eq!(cert.kind, CertificateKind::Zero, "case {case}");
            }
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(556);
    let domain = ConvexDomain::simplex(3).unwrap();
    let observations = domain.observation_set();
    for case in 0..100 {
        let kernel = battery_kernel(
            [KernelChoice::Constant, KernelChoice::SobolevExp, KernelChoice::GaussianRbf]
                [case % 3],
            3,
        );
        let mut fc =
            K29Forecaster::new(kernel, domain.clone(), observations.clone(), solver).unwrap();
        let n = rng.random_range(1..=50);
        for _ in 0..n {
            let f = random_hull_point(&mut rng, &domain);
            let y = random_observation(&mut rng, &observations);
            fc.observe(Vector::zeros(0), f, y).unwrap();
        }
        let x = Vector::zeros(0);
        let (f, cert) = fc.next_forecast(&x).unwrap();
        let s = fc.field(&f, &x).unwrap();
        let eps = fc.epsilon();
        match cert.kind {
            CertificateKind::Zero | CertificateKind::Default => {
                assert!(s.norm() <= eps, "case {case}: ‖S‖ = {:.3e} > {eps:.3e}", s.norm());
            }
            CertificateKind::BoundaryNormal => {
                let mut max_slack = f64::NEG_INFINITY;
                for vertex in domain.vertices() {
                    max_slack = max_slack.max(s.dot(&vertex.sub(&f)));
                }
                assert!(
                    (max_slack.max(0.0) - cert.boundary_slack).abs()
                        <= 1e-12 * (1.0 + cert.boundary_slack),
                    "case {case}: recomputed slack {max_slack:.3e} vs {:.3e}",
                    cert.boundary_slack
                );
                assert!(max_slack <= eps, "case {case}: slack {max_slack:.3e}");
            }
            CertificateKind::Unverified => panic!("case {case}: unverified certificate"),
        }
    }
    println!("ACCEPTANCE solver_matches_oracle: PASS (200 interval + 100 simplex instances)");
}

/// Criterion: binary K29 with the Sobolev kernel on (f, x) under a logistic
/// link, N = 5000, five seeds: every active soft neighborhood has weighted
/// residual ratio at most 0.05 and the kernel-weighted bound holds.
#[test]
fn calibration_at_desk_scale() {
    let logistic = |z: f64| 1.0 / (1.0 + (-z).exp());
    let tents: Vec<TentFunction> = [-1.0f64, -0.5, 0.0, 0.5, 1.0]
        .iter()
        .map(|&x_star| {
            TentFunction::new(vec![logistic(x_star), x_star], vec![0.25, 1.0]).unwrap()
        })
        .collect();

    let mut total_active = 0usize;
    for seed in 101..=105 {
        let protocol = ProtocolSpec::new(ProtocolVariant::Binary).unwrap();
        let record = run_game(RunSetup {
            protocol,
            kernel: Kernel::sobolev_exp(1, 1).unwrap(),
            forecaster: ForecasterKind::K29,
            skeptic: SkepticDescriptor::Wlln,
            reality: RealitySource::iid(
                DatumSampler::UniformBox { bounds: vec![(-2.0, 2.0)] },
                IidObservationModel::Bernoulli {
                    link: LinkFunction::Logistic { weights: vec![1.0], bias: 0.0 },
                },
                seed,
            ),
            solver: SolverConfig { field_tol: 1e-9, ..SolverConfig::default() },
            horizon: 5000,
            initial_capital: 0.0,
            seed,
            config_hash: String::new(),
        })
        .unwrap();

        let report = calibration_report(&record, &tents, 10.0).unwrap();
        assert!(report.pass(), "seed {seed}: bound violated: {:?}", report.rows);
        for row in report.active_rows() {
            total_active += 1;
            let ratio = row.weighted_residual_ratio.unwrap();
            assert!(
                ratio <= 0.05,
                "seed {seed} neighborhood {}: ratio {ratio:.4} (mass {:.1})",
                row.index,
                row.weight_sum
            );
        }
    }
    assert!(total_active >= 5, "only {total_active} active neighborhoods across seeds");
    println!(
        "ACCEPTANCE calibration_at_desk_scale: PASS ({total_active} active neighborhoods)"
    );
}

/// Criterion: the constant out-of-hull rule f ≡ 1.2 against the separation
/// Skeptic with scale 10 gains at least 0.4 every round for 100 rounds.
#[test]
fn exploit_grows_capital() {
    let record = run_game(RunSetup {
        protocol: ProtocolSpec::new(ProtocolVariant::Binary).unwrap(),
        kernel: Kernel::constant(1.0, 1, 0).unwrap(),
        forecaster: ForecasterKind::Fixed { value: vec![1.2] },
        skeptic: SkepticDescriptor::Exploit { scale: 10.0 },
        reality: RealitySource::iid(
            DatumSampler::None,
            IidObservationModel::Bernoulli { link: LinkFunction::Constant { p: 0.5 } },
            9,
        ),
        solver: SolverConfig::default(),
        horizon: 100,
        initial_capital: 1.0,
        seed: 9,
        config_hash: String::new(),
    })
    .unwrap();
    assert_eq!(record.rounds.len(), 100);
    let mut prev = record.header.initial_capital;
    for round in &record.rounds {
        assert!(
            round.skeptic_gain >= 0.4 - 1e-9,
            "round {}: gain {:.6}",
            round.n,
            round.skeptic_gain
        );
        assert!(round.capital > prev, "round {}: capital not increasing", round.n);
        prev = round.capital;
    }
    println!("ACCEPTANCE exploit_grows_capital: PASS (100 rounds, min gain >= 0.4)");
}

/// Criterion: the weak-law tail bound arithmetic, and its δ = 1 case
/// coinciding with the √n bound averaged over N rounds.
#[test]
fn bernoulli_bound_arithmetic() {
    assert_eq!(bernoulli_bound(100, 1.0, 1.0, 1.0).unwrap(), 0.1);
    for n in [1u64, 4, 25, 100, 10_000] {
        for (diam, c_phi) in [(1.0, 1.0), (2.0, 0.5), (2.0f64.sqrt(), 0.25)] {
            let tail = bernoulli_bound(n, 1.0, diam, c_phi).unwrap();
            let sqrt_n_bound_avg = diam * c_phi * (n as f64).sqrt() / n as f64;
            assert!(
                (tail - sqrt_n_bound_avg).abs() <= 1e-15 * (1.0 + tail),
                "n={n}: {tail} vs {sqrt_n_bound_avg}"
            );
        }
    }
    println!("ACCEPTANCE bernoulli_bound_arithmetic: PASS");
}

/// Criterion: identical config and seed produce byte-identical transcripts.
#[test]
fn deterministic_transcripts() {
    let make = |variant: ProtocolVariant, kernel_choice: KernelChoice, seed: u64| {
        let protocol = ProtocolSpec::new(variant.clone()).unwrap();
        let kernel = battery_kernel(kernel_choice, protocol.obs_dim());
        let reality = battery_reality(RealityChoice::Iid, &variant, seed);
        RunSetup {
            protocol,
            kernel,
            forecaster: ForecasterKind::K29,
            skeptic: SkepticDescriptor::Wlln,
            reality,
            solver: SolverConfig::default(),
            horizon: 200,
            initial_capital: 1.0,
            seed,
            config_hash: "determinism".into(),
        }
    };
    for (variant, kernel_choice) in [
        (ProtocolVariant::Binary, KernelChoice::SobolevExp),
        (ProtocolVariant::MultiClass { classes: 3 }, KernelChoice::GaussianRbf),
        (ProtocolVariant::MeanVariance { lo: 0.0, hi: 1.0 }, KernelChoice::SobolevExp),
    ] {
        let a = run_game(make(variant.clone(), kernel_choice, 33)).unwrap();
        let b = run_game(make(variant, kernel_choice, 33)).unwrap();
        assert_eq!(
            a.to_transcript_string().unwrap(),
            b.to_transcript_string().unwrap(),
            "transcripts differ for {kernel_choice:?}"
        );
    }
    println!("ACCEPTANCE deterministic_transcripts: PASS");
}
