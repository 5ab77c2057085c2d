//! Game orchestration: Reality sources, the round loop, transcripts and
//! replay verification.
//!
//! A round runs in the protocol order: Reality announces the datum, the
//! Skeptic's strategy for the round is a fixed function of the history,
//! Forecaster announces the forecast (with its certificate), Reality
//! announces the observation, and the ledgers update. Reality can replay a
//! file, sample i.i.d. observations from a known link function, or play
//! adversarially against the announced forecast.
//!
//! Transcripts are line-delimited JSON: one header line carrying the full
//! run description, then one line per round with a fixed field order. The
//! same config and seed always produce byte-identical transcripts, and
//! [`replay_verify`] recomputes every derived column from the raw moves.

use std::io::{BufRead, Write};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::forecaster::{CertificateKind, ForecastCertificate, K29Forecaster, SolverConfig};
use crate::geometry::Vector;
use crate::kernels::{Kernel, KernelSpec, Point};
use crate::protocols::{ProtocolSpec, ProtocolVariant, RawObservation};
use crate::skeptic::{CapitalLedger, SkepticStrategy, WllnSkeptic};
use crate::tensor_gram::TensorAccumulator;
use crate::{Error, Result};

pub const TRANSCRIPT_SCHEMA_VERSION: u32 = 1;

/// Step size of the grid used when an adversary maximizes over the
/// mean-variance arc.
const ARC_GRID_STEP: f64 = 1e-3;

/// Link function `p(x)` for i.i.d. Reality; evaluated on the first datum
/// coordinates and clamped to `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinkFunction {
    Constant { p: f64 },
    Logistic { weights: Vec<f64>, bias: f64 },
    /// Step function of the first datum coordinate: `values[k]` on the
    /// interval between `breakpoints[k-1]` and `breakpoints[k]`.
    Piecewise { breakpoints: Vec<f64>, values: Vec<f64> },
}

impl LinkFunction {
    pub fn eval(&self, x: &Vector) -> f64 {
        let p = match self {
            LinkFunction::Constant { p } => *p,
            LinkFunction::Logistic { weights, bias } => {
                let z: f64 = weights
                    .iter()
                    .zip(x.coords().iter())
                    .map(|(w, xi)| w * xi)
                    .sum::<f64>()
                    + bias;
                1.0 / (1.0 + (-z).exp())
            }
            LinkFunction::Piecewise { breakpoints, values } => {
                let x1 = x.coords().first().copied().unwrap_or(0.0);
                let k = breakpoints.iter().filter(|b| **b < x1).count();
                values[k.min(values.len() - 1)]
            }
        };
        p.clamp(0.0, 1.0)
    }

    pub(crate) fn validate(&self, datum_dim: usize) -> Result<()> {
        match self {
            LinkFunction::Constant { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Config(format!("link p must lie in [0,1], got {p}")));
                }
            }
            LinkFunction::Logistic { weights, .. } => {
                if weights.len() != datum_dim {
                    return Err(Error::Config(format!(
                        "logistic link has {} weights for datum_dim {datum_dim}",
                        weights.len()
                    )));
                }
            }
            LinkFunction::Piecewise { breakpoints, values } => {
                if values.len() != breakpoints.len() + 1 {
                    return Err(Error::Config(
                        "piecewise link needs exactly one more value than breakpoints".into(),
                    ));
                }
                if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::Config("piecewise link values must lie in [0,1]".into()));
                }
            }
        }
        Ok(())
    }
}

/// Datum generator for synthetic Reality sources.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatumSampler {
    #[default]
    None,
    UniformBox { bounds: Vec<(f64, f64)> },
}

impl DatumSampler {
    pub fn dim(&self) -> usize {
        match self {
            DatumSampler::None => 0,
            DatumSampler::UniformBox { bounds } => bounds.len(),
        }
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> Vector {
        match self {
            DatumSampler::None => Vector::zeros(0),
            DatumSampler::UniformBox { bounds } => Vector::from_raw(
                bounds
                    .iter()
                    .map(|(lo, hi)| rng.random_range(*lo..*hi))
                    .collect(),
            ),
        }
    }
}

/// Observation model for i.i.d. Reality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IidObservationModel {
    /// Binary label with success probability `p(x)`.
    Bernoulli { link: LinkFunction },
    /// Fixed class distribution for multi-class protocols.
    Categorical { probs: Vec<f64> },
    /// `t` uniform over the protocol's range (regression/mean-variance).
    UniformRange,
    /// `t = hi` with probability `p(x)`, else `lo`.
    TwoPoint { link: LinkFunction },
}

/// Adversarial observation policy; both instances exercise the worst-case
/// guarantees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversarialPolicy {
    /// Pick `y ∈ Y` maximizing `‖y − f‖`.
    MaxResidual,
    /// Pick `y ∈ Y` minimizing `⟨y, f⟩`.
    AntiForecast,
}

/// Where observations come from.
#[derive(Debug)]
pub enum RealitySource {
    Iid {
        datum: DatumSampler,
        model: IidObservationModel,
        rng: ChaCha12Rng,
    },
    Adversarial {
        policy: AdversarialPolicy,
        datum: DatumSampler,
        rng: ChaCha12Rng,
    },
    Replay {
        rows: Vec<(Vector, RawObservation)>,
        cursor: usize,
    },
}

impl RealitySource {
    pub fn iid(datum: DatumSampler, model: IidObservationModel, seed: u64) -> Self {
        RealitySource::Iid { datum, model, rng: ChaCha12Rng::seed_from_u64(seed) }
    }

    pub fn adversarial(policy: AdversarialPolicy, datum: DatumSampler, seed: u64) -> Self {
        RealitySource::Adversarial { policy, datum, rng: ChaCha12Rng::seed_from_u64(seed) }
    }

    pub fn replay(rows: Vec<(Vector, RawObservation)>) -> Self {
        RealitySource::Replay { rows, cursor: 0 }
    }

    pub fn datum_dim(&self) -> usize {
        match self {
            RealitySource::Iid { datum, .. } => datum.dim(),
            RealitySource::Adversarial { datum, .. } => datum.dim(),
            RealitySource::Replay { rows, .. } => {
                rows.first().map_or(0, |(x, _)| x.dim())
            }
        }
    }

    /// The round's datum; `None` once a replay stream is exhausted.
    fn next_datum(&mut self) -> Option<Vector> {
        match self {
            RealitySource::Iid { datum, rng, .. } => Some(datum.sample(rng)),
            RealitySource::Adversarial { datum, rng, .. } => Some(datum.sample(rng)),
            RealitySource::Replay { rows, cursor } => {
                rows.get(*cursor).map(|(x, _)| x.clone())
            }
        }
    }

    /// The round's observation, chosen after seeing the forecast.
    fn observe(&mut self, protocol: &ProtocolSpec, x: &Vector, f: &Vector) -> Result<Vector> {
        match self {
            RealitySource::Iid { model, rng, .. } => {
                let raw = match model {
                    IidObservationModel::Bernoulli { link } => {
                        RawObservation::Bit(rng.random_bool(link.eval(x)))
                    }
                    IidObservationModel::Categorical { probs } => {
                        let u: f64 = rng.random_range(0.0..1.0);
                        let mut cum = 0.0;
                        let mut label = probs.len();
                        for (i, p) in probs.iter().enumerate() {
                            cum += p;
                            if u < cum {
                                label = i + 1;
                                break;
                            }
                        }
                        RawObservation::Label(label.clamp(1, probs.len()))
                    }
                    IidObservationModel::UniformRange => {
                        let (lo, hi) = protocol_range(protocol)?;
                        RawObservation::Real(rng.random_range(lo..hi))
                    }
                    IidObservationModel::TwoPoint { link } => {
                        let (lo, hi) = protocol_range(protocol)?;
                        let t = if rng.random_bool(link.eval(x)) { hi } else { lo };
                        RawObservation::Real(t)
                    }
                };
                protocol.encode_observation(&raw)
            }
            RealitySource::Adversarial { policy, .. } => {
                let candidates = protocol.observations().candidates(ARC_GRID_STEP);
                let mut best: Option<(&Vector, f64)> = None;
                for y in &candidates {
                    let score = match policy {
                        AdversarialPolicy::MaxResidual => y.dist(f),
                        AdversarialPolicy::AntiForecast => -y.dot(f),
                    };
                    let better = match &best {
                        None => true,
                        Some((by, bs)) => score > *bs || (score == *bs && y.lex_lt(by)),
                    };
                    if better {
                        best = Some((y, score));
                    }
                }
                Ok(best.expect("observation sets are non-empty").0.clone())
            }
            RealitySource::Replay { rows, cursor } => {
                let (_, raw) = &rows[*cursor];
                *cursor += 1;
                protocol.encode_observation(raw)
            }
        }
    }
}

fn protocol_range(protocol: &ProtocolSpec) -> Result<(f64, f64)> {
    match protocol.variant() {
        ProtocolVariant::BoundedRegression { lo, hi }
        | ProtocolVariant::MeanVariance { lo, hi } => Ok((*lo, *hi)),
        other => Err(Error::Config(format!(
            "range observation model does not apply to {other:?}"
        ))),
    }
}

/// Which forecaster plays the game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForecasterKind {
    /// The K29 defensive forecaster.
    K29,
    /// A constant forecasting rule (possibly outside the hull); used to
    /// demonstrate exploits and bound violations.
    Fixed { value: Vec<f64> },
}

/// Which Skeptic plays the game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SkepticDescriptor {
    Wlln,
    Exploit { scale: f64 },
    Null,
}

impl SkepticDescriptor {
    fn build(&self, kernel: &Kernel) -> SkepticStrategy {
        match self {
            SkepticDescriptor::Wlln => SkepticStrategy::Wlln(WllnSkeptic::new(kernel.clone())),
            SkepticDescriptor::Exploit { scale } => SkepticStrategy::Exploit { scale: *scale },
            SkepticDescriptor::Null => SkepticStrategy::Null,
        }
    }
}

/// Everything a run needs, already validated.
#[derive(Debug)]
pub struct RunSetup {
    pub protocol: ProtocolSpec,
    pub kernel: Kernel,
    pub forecaster: ForecasterKind,
    pub skeptic: SkepticDescriptor,
    pub reality: RealitySource,
    pub solver: SolverConfig,
    pub horizon: usize,
    pub initial_capital: f64,
    pub seed: u64,
    pub config_hash: String,
}

/// First line of a transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptHeader {
    pub schema_version: u32,
    pub protocol: ProtocolVariant,
    pub kernel: KernelSpec,
    pub solver: SolverConfig,
    pub forecaster: ForecasterKind,
    pub skeptic: SkepticDescriptor,
    pub seed: u64,
    pub config_hash: String,
    pub horizon: usize,
    pub initial_capital: f64,
    pub diameter: f64,
    pub c_phi: Option<f64>,
    pub c_phi_exact: bool,
}

/// One game round; fields appear in the serialized line in this order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub n: usize,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub certificate: ForecastCertificate,
    pub y: Vec<f64>,
    pub residual: Vec<f64>,
    pub skeptic_gain: f64,
    pub capital: f64,
    pub tensor_norm: f64,
    pub bound: Option<f64>,
}

/// A complete game transcript.
#[derive(Clone, Debug, PartialEq)]
pub struct GameRecord {
    pub header: TranscriptHeader,
    pub rounds: Vec<RoundRecord>,
}

impl GameRecord {
    /// Whether a replay stream ran dry before the configured horizon.
    pub fn truncated(&self) -> bool {
        self.rounds.len() < self.horizon()
    }

    pub fn horizon(&self) -> usize {
        self.header.horizon
    }

    pub fn write_transcript<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_string(&self.header)
            .map_err(|e| Error::Invalid(format!("header serialization: {e}")))?;
        writeln!(w, "{header}")?;
        for round in &self.rounds {
            let line = serde_json::to_string(round)
                .map_err(|e| Error::Invalid(format!("round serialization: {e}")))?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_transcript_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_transcript(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }

    pub fn read_transcript<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::Parse { line: 1, msg: "empty transcript".into() })?;
        let first = first?;
        let header: TranscriptHeader = serde_json::from_str(&first)
            .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
        if header.schema_version != TRANSCRIPT_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: header.schema_version,
                expected: TRANSCRIPT_SCHEMA_VERSION,
            });
        }
        let mut rounds = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let round: RoundRecord = serde_json::from_str(&line)
                .map_err(|e| Error::Parse { line: idx + 1, msg: e.to_string() })?;
            if round.n != rounds.len() + 1 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("round index {} out of order", round.n),
                });
            }
            rounds.push(round);
        }
        Ok(GameRecord { header, rounds })
    }

    /// Plot-ready per-round summary.
    pub fn write_summary_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,capital,tensor_norm,bound,margin,certificate,slack")?;
        for r in &self.rounds {
            let (bound, margin) = match r.bound {
                Some(b) => (format!("{b}"), format!("{}", b - r.tensor_norm)),
                None => (String::new(), String::new()),
            };
            writeln!(
                w,
                "{},{},{},{},{},{:?},{}",
                r.n, r.capital, r.tensor_norm, bound, margin, r.certificate.kind,
                r.certificate.boundary_slack
            )?;
        }
        Ok(())
    }
}

/// Run one game to completion.
pub fn run_game(setup: RunSetup) -> Result<GameRecord> {
    let RunSetup {
        protocol,
        kernel,
        forecaster,
        skeptic,
        mut reality,
        solver,
        horizon,
        initial_capital,
        seed,
        config_hash,
    } = setup;
    if horizon == 0 {
        return Err(Error::Validation("horizon must be at least 1".into()));
    }
    if reality.datum_dim() != kernel.datum_dim() {
        return Err(Error::Config(format!(
            "reality datum_dim {} does not match kernel datum_dim {}",
            reality.datum_dim(),
            kernel.datum_dim()
        )));
    }
    let domain = protocol.domain().clone();
    let diameter = protocol.observations().diameter();
    let c_phi = kernel.c_phi(&domain, None).ok();

    let mut fc = K29Forecaster::new(
        kernel.clone(),
        domain.clone(),
        protocol.observations().clone(),
        solver,
    )?;
    let mut strategy = skeptic.build(&kernel);
    let mut acc = TensorAccumulator::new(kernel.clone());
    let mut ledger = CapitalLedger::new(initial_capital);

    let header = TranscriptHeader {
        schema_version: TRANSCRIPT_SCHEMA_VERSION,
        protocol: protocol.variant().clone(),
        kernel: kernel.spec(),
        solver,
        forecaster: forecaster.clone(),
        skeptic: skeptic.clone(),
        seed,
        config_hash,
        horizon,
        initial_capital,
        diameter,
        c_phi: c_phi.as_ref().map(|b| b.value),
        c_phi_exact: c_phi.as_ref().map(|b| b.exact).unwrap_or(false),
    };

    let mut rounds = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        let Some(x) = reality.next_datum() else {
            break; // replay exhausted: flagged via GameRecord::truncated
        };
        let (f, certificate) = match &forecaster {
            ForecasterKind::K29 => fc.next_forecast(&x).map_err(|e| Error::SolverFailureAt {
                round: n,
                source: Box::new(e),
            })?,
            ForecasterKind::Fixed { value } => {
                let f = Vector::new(value.clone())?;
                if f.dim() != domain.dim() {
                    return Err(Error::Config(format!(
                        "fixed forecast has dim {}, protocol needs {}",
                        f.dim(),
                        domain.dim()
                    )));
                }
                let s = fc.field_raw(f.coords(), x.coords());
                let field_norm = s.norm();
                let slack = domain.support_max(&s)?.1 - s.dot(&f);
                let eps = fc.epsilon();
                let kind = if field_norm <= eps {
                    CertificateKind::Zero
                } else if slack <= eps {
                    CertificateKind::BoundaryNormal
                } else {
                    CertificateKind::Unverified
                };
                (f, ForecastCertificate { kind, field_norm, boundary_slack: slack })
            }
        };
        let y = reality.observe(&protocol, &x, &f)?;
        let s_move = strategy.move_at(&domain, &x, &f)?;
        let gain = ledger.update(&s_move, &f, &y)?;
        let residual = y.sub(&f);
        acc.push(residual.clone(), Point::new(f.clone(), x.clone()))?;
        strategy.note_round(x.clone(), f.clone(), y.clone());
        match forecaster {
            ForecasterKind::K29 => fc.observe(x.clone(), f.clone(), y.clone())?,
            ForecasterKind::Fixed { .. } => fc.observe_unchecked(x.clone(), f.clone(), y.clone())?,
        }
        rounds.push(RoundRecord {
            n,
            x: x.coords().to_vec(),
            f: f.coords().to_vec(),
            certificate,
            y: y.coords().to_vec(),
            residual: residual.coords().to_vec(),
            skeptic_gain: gain,
            capital: ledger.current(),
            tensor_norm: acc.tensor_norm(),
            bound: header.c_phi.map(|c| diameter * c * (n as f64).sqrt()),
        });
    }
    Ok(GameRecord { header, rounds })
}

/// Run independent games in parallel, preserving input order.
pub fn run_batch(setups: Vec<RunSetup>) -> Vec<Result<GameRecord>> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    if threads <= 1 || setups.len() <= 1 {
        return setups.into_iter().map(run_game).collect();
    }
    let mut slots: Vec<Option<Result<GameRecord>>> = Vec::new();
    slots.resize_with(setups.len(), || None);
    let jobs: Vec<(usize, RunSetup)> = setups.into_iter().enumerate().collect();
    let queue = std::sync::Mutex::new(jobs);
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let job = queue.lock().expect("queue lock").pop();
                let Some((idx, setup)) = job else { break };
                let outcome = run_game(setup);
                results.lock().expect("results lock")[idx] = Some(outcome);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.expect("every job ran"))
        .collect()
}

/// One discrepancy found by [`replay_verify`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mismatch {
    pub round: usize,
    pub what: String,
    pub expected: f64,
    pub found: f64,
}

/// Outcome of a transcript audit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checked_rounds: usize,
    pub truncated: bool,
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Recompute every derived quantity in a transcript from the raw moves:
/// residuals, field norms and slacks, certificate thresholds, Skeptic
/// gains, the capital chain, tensor norms and bound columns.
pub fn replay_verify(record: &GameRecord) -> Result<VerifyReport> {
    let header = &record.header;
    let protocol = ProtocolSpec::new(header.protocol.clone())?;
    let kernel = Kernel::from_spec(&header.kernel)?;
    let domain = protocol.domain().clone();
    let mut fc = K29Forecaster::new(
        kernel.clone(),
        domain.clone(),
        protocol.observations().clone(),
        header.solver,
    )?;
    let mut strategy = header.skeptic.build(&kernel);
    let mut acc = TensorAccumulator::new(kernel.clone());
    let mut capital = header.initial_capital;
    let mut mismatches = Vec::new();

    let mut push = |round: usize, what: &str, expected: f64, found: f64, tol: f64| {
        if (expected - found).abs() > tol {
            mismatches.push(Mismatch { round, what: what.into(), expected, found });
        }
    };

    for r in &record.rounds {
        let x = Vector::new(r.x.clone())?;
        let f = Vector::new(r.f.clone())?;
        let y = Vector::new(r.y.clone())?;

        for (want, got) in y.sub(&f).coords().iter().zip(r.residual.iter()) {
            push(r.n, "residual", *want, *got, 1e-12);
        }

        let s = fc.field_raw(f.coords(), x.coords());
        let field_norm = s.norm();
        let slack = domain.support_max(&s)?.1 - s.dot(&f);
        let scale = fc.field_scale();
        push(r.n, "field_norm", field_norm, r.certificate.field_norm, 1e-9 * scale);
        push(
            r.n,
            "boundary_slack",
            slack.max(0.0),
            r.certificate.boundary_slack.max(0.0),
            1e-9 * scale,
        );
        let eps = fc.epsilon() + 1e-9 * scale;
        match r.certificate.kind {
            CertificateKind::Zero | CertificateKind::Default => {
                push(r.n, "certificate_zero_threshold", 0.0, (field_norm - eps).max(0.0), 0.0);
            }
            CertificateKind::BoundaryNormal => {
                push(
                    r.n,
                    "certificate_slack_threshold",
                    0.0,
                    (slack - eps).max(0.0),
                    0.0,
                );
            }
            CertificateKind::Unverified => {}
        }

        let s_move = strategy.move_at(&domain, &x, &f)?;
        let gain = s_move.dot(&y.sub(&f));
        push(r.n, "skeptic_gain", gain, r.skeptic_gain, 1e-9 * (1.0 + gain.abs()));

        capital += r.skeptic_gain;
        if capital != r.capital {
            push(r.n, "capital_chain", capital, r.capital, 0.0);
            capital = r.capital;
        }

        acc.push(y.sub(&f), Point::new(f.clone(), x.clone()))?;
        push(
            r.n,
            "tensor_norm",
            acc.tensor_norm(),
            r.tensor_norm,
            1e-9 * (1.0 + acc.tensor_norm()),
        );
        if let (Some(c), Some(recorded)) = (header.c_phi, r.bound) {
            let want = header.diameter * c * (r.n as f64).sqrt();
            push(r.n, "bound", want, recorded, 1e-12 * (1.0 + want));
        }

        strategy.note_round(x.clone(), f.clone(), y.clone());
        fc.observe_unchecked(x, f, y)?;
    }

    Ok(VerifyReport {
        checked_rounds: record.rounds.len(),
        truncated: record.truncated(),
        mismatches,
    })
}

/// Parse replay input: CSV with a header row, datum columns first, then the
/// raw observation column. Rows outside the protocol's legal range are
/// rejected with their line number.
pub fn parse_replay_csv(
    text: &str,
    protocol: &ProtocolSpec,
    datum_dim: usize,
) -> Result<Vec<(Vector, RawObservation)>> {
    let mut rows = Vec::new();
    let mut lines = text.lines().enumerate();
    let Some((_, _header)) = lines.next() else {
        return Err(Error::Parse { line: 1, msg: "replay input is empty".into() });
    };
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != datum_dim + 1 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {} columns, found {}", datum_dim + 1, fields.len()),
            });
        }
        let mut datum = Vec::with_capacity(datum_dim);
        for field in &fields[..datum_dim] {
            let v: f64 = field.parse().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad datum value {field:?}: {e}"),
            })?;
            datum.push(v);
        }
        let raw_text = fields[datum_dim];
        let raw = match protocol.variant() {
            ProtocolVariant::Binary => match raw_text {
                "0" => RawObservation::Bit(false),
                "1" => RawObservation::Bit(true),
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("binary observation must be 0 or 1, found {other:?}"),
                    })
                }
            },
            ProtocolVariant::BoundedRegression { .. } | ProtocolVariant::MeanVariance { .. } => {
                RawObservation::Real(raw_text.parse().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("bad observation value {raw_text:?}: {e}"),
                })?)
            }
            ProtocolVariant::MultiClass { .. } => {
                RawObservation::Label(raw_text.parse().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("bad class label {raw_text:?}: {e}"),
                })?)
            }
        };
        // Reject out-of-range rows eagerly, naming the line.
        protocol
            .encode_observation(&raw)
            .map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
        rows.push((Vector::new(datum)?, raw));
    }
    Ok(rows)
}
