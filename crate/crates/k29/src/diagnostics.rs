//! Post-hoc verification of the quantitative guarantees on transcripts.
//!
//! Three checks, all pure functions of a [`GameRecord`]:
//!
//! - the √n tensor bound: `‖Σ (y_i−f_i) ⊗ Φ_i‖ ≤ diam(Y)·C_Φ·√n`, within
//!   the accumulated solver slack;
//! - the RKHS test-function bound:
//!   `‖Σ F(f_i,x_i)(y_i−f_i)‖ ≤ diam(Y)·C_F·‖F‖·√n` for any `F` with a
//!   declared norm;
//! - calibration/resolution: over a soft neighborhood `I` of a point
//!   `(f*, x*)`, the weighted residual `‖Σ I·(y_i−f_i)‖ / Σ I` is small
//!   once the neighborhood mass dominates `√n`.
//!
//! Soft neighborhoods are tent functions (products of one-dimensional
//! piecewise-linear bumps), whose norms in the exponential-Sobolev tensor
//! space have the closed form `Π √(2wᵢ/3 + 2/wᵢ)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::engine::GameRecord;
use crate::geometry::Vector;
use crate::kernels::Kernel;
use crate::tensor_gram::TensorAccumulator;
use crate::{Error, Result};

/// Default operationalization of "neighborhood mass ≫ √n".
pub const DEFAULT_ACTIVITY_FACTOR: f64 = 10.0;

/// One row of the √n bound series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: usize,
    /// `‖Σ r_i ⊗ Φ_i‖`, recomputed from the transcript.
    pub lhs: f64,
    /// `diam(Y) · C_Φ · √n`.
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    /// Extra headroom in norm units granted by the recorded certificate
    /// slacks: `√(rhs² + 2·Σ slack_i) − rhs`.
    pub slack_budget: f64,
}

/// The per-round bound series with any violating rounds flagged.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSeries {
    pub rows: Vec<BoundRow>,
    pub violations: Vec<usize>,
}

impl BoundSeries {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,lhs,rhs,margin,slack_budget")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", r.n, r.lhs, r.rhs, r.margin, r.slack_budget)?;
        }
        Ok(())
    }
}

/// Check the √n tensor bound on every prefix of the transcript. Requires
/// the run's kernel to have a computable `C_Φ`; otherwise the diagnostic
/// does not apply and an error says so.
pub fn tensor_bound_series(record: &GameRecord) -> Result<BoundSeries> {
    let header = &record.header;
    let c_phi = header.c_phi.ok_or_else(|| {
        Error::CphiUnavailable("the run's kernel has no recorded feature bound".into())
    })?;
    let kernel = Kernel::from_spec(&header.kernel)?;
    let mut acc = TensorAccumulator::new(kernel);
    let mut slack_sq_budget = 0.0;
    let mut rows = Vec::with_capacity(record.rounds.len());
    let mut violations = Vec::new();
    for r in &record.rounds {
        let residual = Vector::new(r.residual.clone())?;
        let point = crate::kernels::Point::new(
            Vector::new(r.f.clone())?,
            Vector::new(r.x.clone())?,
        );
        acc.push(residual, point)?;
        slack_sq_budget += 2.0 * r.certificate.boundary_slack.max(0.0);
        let lhs = acc.tensor_norm();
        let rhs = header.diameter * c_phi * (r.n as f64).sqrt();
        let slack_budget = ((rhs * rhs + slack_sq_budget).sqrt() - rhs).max(0.0);
        if lhs > rhs + slack_budget + 1e-9 * (1.0 + rhs) {
            violations.push(r.n);
        }
        rows.push(BoundRow { n: r.n, lhs, rhs, margin: rhs - lhs, slack_budget });
    }
    Ok(BoundSeries { rows, violations })
}

/// One row of an RKHS test-function check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RkhsRow {
    pub n: usize,
    /// `‖Σ_{i≤n} F(f_i, x_i)·(y_i − f_i)‖`.
    pub lhs: f64,
    /// `diam(Y) · C_F · ‖F‖ · √n`.
    pub rhs: f64,
    /// `‖F‖ ·` (tensor-norm slack budget), the headroom the solver
    /// tolerance propagates into this bound.
    pub slack_allowance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RkhsReport {
    pub rows: Vec<RkhsRow>,
    pub violations: Vec<usize>,
}

impl RkhsReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,lhs,rhs,slack_allowance")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.n, r.lhs, r.rhs, r.slack_allowance)?;
        }
        Ok(())
    }
}

/// Check `‖Σ F(f_i,x_i)(y_i−f_i)‖ ≤ diam(Y)·c_f·norm_bound·√n` for a test
/// function evaluated on (forecast, datum) pairs. `norm_bound` and `c_f`
/// are the caller's declared constants for the space `F` lives in.
pub fn rkhs_bound_check(
    record: &GameRecord,
    test_fn: impl Fn(&Vector, &Vector) -> f64,
    norm_bound: f64,
    c_f: f64,
) -> Result<RkhsReport> {
    let header = &record.header;
    let mut weighted = None::<Vector>;
    let mut slack_sq_budget = 0.0;
    let mut rows = Vec::with_capacity(record.rounds.len());
    let mut violations = Vec::new();
    for r in &record.rounds {
        let f = Vector::new(r.f.clone())?;
        let x = Vector::new(r.x.clone())?;
        let residual = Vector::new(r.residual.clone())?;
        let value = test_fn(&f, &x);
        let acc = match weighted.take() {
            None => residual.scale(value),
            Some(prev) => prev.axpy(value, &residual),
        };
        slack_sq_budget += 2.0 * r.certificate.boundary_slack.max(0.0);
        let lhs = acc.norm();
        let rhs = header.diameter * c_f * norm_bound * (r.n as f64).sqrt();
        // The derivation factors through the tensor norm, so the slack
        // headroom is the tensor budget scaled by ‖F‖.
        let tensor_rhs = header.diameter * header.c_phi.unwrap_or(0.0) * (r.n as f64).sqrt();
        let slack_allowance =
            norm_bound * ((tensor_rhs * tensor_rhs + slack_sq_budget).sqrt() - tensor_rhs).max(0.0);
        if lhs > rhs + slack_allowance + 1e-9 * (1.0 + rhs) {
            violations.push(r.n);
        }
        rows.push(RkhsRow { n: r.n, lhs, rhs, slack_allowance });
        weighted = Some(acc);
    }
    Ok(RkhsReport { rows, violations })
}

/// A soft neighborhood: the product of one-dimensional tents over the
/// concatenated (forecast, datum) coordinates. Equals 1 at the center,
/// vanishes outside the box of half-widths, and is continuous.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TentFunction {
    pub center: Vec<f64>,
    pub half_width: Vec<f64>,
}

impl TentFunction {
    pub fn new(center: Vec<f64>, half_width: Vec<f64>) -> Result<Self> {
        if center.len() != half_width.len() {
            return Err(Error::Invalid(
                "tent center and half_width must have equal lengths".into(),
            ));
        }
        if half_width.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Invalid("tent half-widths must be positive".into()));
        }
        Ok(Self { center, half_width })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn eval_coords(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim());
        let mut out = 1.0;
        for ((zi, ci), wi) in z.iter().zip(&self.center).zip(&self.half_width) {
            let bump = 1.0 - (zi - ci).abs() / wi;
            if bump <= 0.0 {
                return 0.0;
            }
            out *= bump;
        }
        out
    }

    /// Evaluate on a (forecast, datum) pair by concatenation.
    pub fn eval(&self, f: &Vector, x: &Vector) -> f64 {
        debug_assert_eq!(f.dim() + x.dim(), self.dim());
        let mut out = 1.0;
        let coords = f.coords().iter().chain(x.coords().iter());
        for ((zi, ci), wi) in coords.zip(&self.center).zip(&self.half_width) {
            let bump = 1.0 - (zi - ci).abs() / wi;
            if bump <= 0.0 {
                return 0.0;
            }
            out *= bump;
        }
        out
    }

    /// Norm in the tensor product of exponential Sobolev spaces: the
    /// product over coordinates of `√(∫F² + ∫(F')²) = √(2w/3 + 2/w)` for a
    /// unit tent of half-width `w`.
    pub fn sobolev_norm(&self) -> f64 {
        self.half_width
            .iter()
            .map(|w| (2.0 * w / 3.0 + 2.0 / w).sqrt())
            .product()
    }
}

/// Per-neighborhood calibration summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborhoodReport {
    pub index: usize,
    /// `Σ I(f_i, x_i)`.
    pub weight_sum: f64,
    /// `‖Σ I·(y_i−f_i)‖ / Σ I`; absent when the weight sum is zero.
    pub weighted_residual_ratio: Option<f64>,
    /// The kernel-weighted bound `2^{−(m+l)/2}·diam·‖I‖·√n / Σ I` for the
    /// exponential-Sobolev tensor space, using the tent's declared norm.
    pub bound: Option<f64>,
    /// Bound plus the solver-slack allowance; the quantity the ratio is
    /// checked against.
    pub bound_with_slack: Option<f64>,
    /// Whether `Σ I ≥ activity_factor · √n`.
    pub active: bool,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub n: usize,
    pub activity_factor: f64,
    pub rows: Vec<NeighborhoodReport>,
}

impl CalibrationReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| !r.violated)
    }

    pub fn active_rows(&self) -> impl Iterator<Item = &NeighborhoodReport> {
        self.rows.iter().filter(|r| r.active)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "neighborhood,weight_sum,ratio,bound,bound_with_slack,active,violated")?;
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.index,
                r.weight_sum,
                opt(r.weighted_residual_ratio),
                opt(r.bound),
                opt(r.bound_with_slack),
                r.active,
                r.violated
            )?;
        }
        Ok(())
    }
}

/// Evaluate calibration/resolution over a family of soft neighborhoods.
pub fn calibration_report(
    record: &GameRecord,
    neighborhoods: &[TentFunction],
    activity_factor: f64,
) -> Result<CalibrationReport> {
    let header = &record.header;
    let n = record.rounds.len();
    let sqrt_n = (n as f64).sqrt();
    let obs_dim = record.rounds.first().map_or(0, |r| r.f.len());
    let datum_dim = record.rounds.first().map_or(0, |r| r.x.len());

    // Slack budget in tensor-norm units at the final round.
    let slack_sq: f64 = record
        .rounds
        .iter()
        .map(|r| 2.0 * r.certificate.boundary_slack.max(0.0))
        .sum();
    let tensor_rhs = header.diameter * header.c_phi.unwrap_or(0.0) * sqrt_n;
    let tensor_slack = ((tensor_rhs * tensor_rhs + slack_sq).sqrt() - tensor_rhs).max(0.0);

    let mut rows = Vec::with_capacity(neighborhoods.len());
    for (index, tent) in neighborhoods.iter().enumerate() {
        if tent.dim() != obs_dim + datum_dim {
            return Err(Error::DimensionMismatch {
                expected: obs_dim + datum_dim,
                got: tent.dim(),
            });
        }
        let mut weight_sum = 0.0;
        let mut weighted = Vector::zeros(obs_dim);
        for r in &record.rounds {
            let f = Vector::new(r.f.clone())?;
            let x = Vector::new(r.x.clone())?;
            let w = tent.eval(&f, &x);
            if w > 0.0 {
                weight_sum += w;
                weighted = weighted.axpy(w, &Vector::new(r.residual.clone())?);
            }
        }
        let c_f = 0.5f64.powf(0.5 * (obs_dim + datum_dim) as f64);
        let (ratio, bound, bound_with_slack) = if weight_sum > 0.0 {
            let ratio = weighted.norm() / weight_sum;
            let bound = c_f * header.diameter * tent.sobolev_norm() * sqrt_n / weight_sum;
            let with_slack = bound + tent.sobolev_norm() * tensor_slack / weight_sum;
            (Some(ratio), Some(bound), Some(with_slack))
        } else {
            (None, None, None)
        };
        let active = weight_sum >= activity_factor * sqrt_n;
        let violated = match (ratio, bound_with_slack) {
            (Some(r), Some(b)) => r > b + 1e-9 * (1.0 + b),
            _ => false,
        };
        rows.push(NeighborhoodReport {
            index,
            weight_sum,
            weighted_residual_ratio: ratio,
            bound,
            bound_with_slack,
            active,
            violated,
        });
    }
    Ok(CalibrationReport { n, activity_factor, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{
        run_game, DatumSampler, ForecasterKind, IidObservationModel, LinkFunction,
        RealitySource, RunSetup, SkepticDescriptor,
    };
    use crate::forecaster::SolverConfig;
    use crate::protocols::{ProtocolSpec, ProtocolVariant};

    fn binary_run(kernel: Kernel, seed: u64, horizon: usize) -> GameRecord {
        run_game(RunSetup {
            protocol: ProtocolSpec::new(ProtocolVariant::Binary).unwrap(),
            kernel,
            forecaster: ForecasterKind::K29,
            skeptic: SkepticDescriptor::Wlln,
            reality: RealitySource::iid(
                DatumSampler::None,
                IidObservationModel::Bernoulli { link: LinkFunction::Constant { p: 0.5 } },
                seed,
            ),
            solver: SolverConfig::default(),
            horizon,
            initial_capital: 0.0,
            seed,
            config_hash: "test".into(),
        })
        .unwrap()
    }

    #[test]
    fn sqrt_n_bound_row_values() {
        let record = binary_run(Kernel::constant(1.0, 1, 0).unwrap(), 5, 100);
        let series = tensor_bound_series(&record).unwrap();
        assert!(series.pass(), "violations at {:?}", series.violations);
        let last = series.rows.last().unwrap();
        assert_eq!(last.n, 100);
        // diam = 1, C_Φ = 1: rhs at n = 100 is 10.
        assert!((last.rhs - 10.0).abs() < 1e-12);
        // rhs grows exactly like √n.
        let r25 = &series.rows[24];
        assert!((last.rhs / r25.rhs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_record_gives_empty_series() {
        let mut record = binary_run(Kernel::constant(1.0, 1, 0).unwrap(), 5, 1);
        record.rounds.clear();
        let series = tensor_bound_series(&record).unwrap();
        assert!(series.rows.is_empty());
        assert!(series.pass());
    }

    #[test]
    fn constant_function_reduces_to_tensor_bound() {
        let record = binary_run(Kernel::constant(1.0, 1, 0).unwrap(), 11, 60);
        let series = tensor_bound_series(&record).unwrap();
        let rkhs = rkhs_bound_check(&record, |_, _| 1.0, 1.0, 1.0).unwrap();
        assert!(rkhs.pass());
        for (a, b) in series.rows.iter().zip(rkhs.rows.iter()) {
            assert!((a.lhs - b.lhs).abs() < 1e-9, "n={}: {} vs {}", a.n, a.lhs, b.lhs);
            assert!((a.rhs - b.rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_function_is_trivially_bounded() {
        let record = binary_run(Kernel::sobolev_exp(1, 0).unwrap(), 3, 40);
        let rkhs = rkhs_bound_check(&record, |_, _| 0.0, 0.0, 1.0 / 2.0f64.sqrt()).unwrap();
        assert!(rkhs.pass());
        assert!(rkhs.rows.iter().all(|r| r.lhs == 0.0));
    }

    #[test]
    fn tent_norm_matches_quadrature() {
        for w in [0.1, 0.25, 1.0, 3.0] {
            let tent = TentFunction::new(vec![0.3], vec![w]).unwrap();
            // Quadrature oracle for ∫F² + ∫(F')² over the support.
            let steps = 200_000;
            let h = 2.0 * w / steps as f64;
            let mut f_sq = 0.0;
            let mut df_sq = 0.0;
            for i in 0..steps {
                let z = 0.3 - w + (i as f64 + 0.5) * h;
                let f = tent.eval_coords(&[z]);
                f_sq += f * f * h;
                df_sq += (1.0 / w) * (1.0 / w) * h;
            }
            let oracle = (f_sq + df_sq).sqrt();
            assert!(
                (tent.sobolev_norm() - oracle).abs() < 1e-4 * oracle,
                "w={w}: {} vs {oracle}",
                tent.sobolev_norm()
            );
        }
    }

    #[test]
    fn tent_shape() {
        let tent = TentFunction::new(vec![0.5, 0.0], vec![0.2, 1.0]).unwrap();
        assert_eq!(tent.eval_coords(&[0.5, 0.0]), 1.0);
        assert_eq!(tent.eval_coords(&[0.71, 0.0]), 0.0);
        assert_eq!(tent.eval_coords(&[0.5, 1.0]), 0.0);
        assert!(tent.eval_coords(&[0.6, 0.5]) > 0.0);
    }

    #[test]
    fn vacuous_neighborhoods_report_absent_ratios() {
        let record = binary_run(Kernel::sobolev_exp(1, 0).unwrap(), 7, 30);
        // A tent supported away from [0, 1] never activates.
        let tents = vec![TentFunction::new(vec![5.0], vec![0.1]).unwrap()];
        let report = calibration_report(&record, &tents, DEFAULT_ACTIVITY_FACTOR).unwrap();
        assert_eq!(report.rows[0].weight_sum, 0.0);
        assert!(report.rows[0].weighted_residual_ratio.is_none());
        assert!(!report.rows[0].active);
        assert!(report.pass());
    }

    #[test]
    fn single_round_has_no_active_neighborhood() {
        let record = binary_run(Kernel::sobolev_exp(1, 0).unwrap(), 7, 1);
        let tents = vec![TentFunction::new(vec![0.5], vec![0.5]).unwrap()];
        let report = calibration_report(&record, &tents, DEFAULT_ACTIVITY_FACTOR).unwrap();
        // Σ I ≤ 1 < 10·√1.
        assert!(!report.rows[0].active);
    }

    #[test]
    fn calibration_is_invariant_under_round_reordering() {
        let record = binary_run(Kernel::sobolev_exp(1, 0).unwrap(), 19, 120);
        let tents = vec![
            TentFunction::new(vec![0.4], vec![0.3]).unwrap(),
            TentFunction::new(vec![0.7], vec![0.2]).unwrap(),
        ];
        let report = calibration_report(&record, &tents, 1.0).unwrap();
        let mut shuffled = record.clone();
        shuffled.rounds.reverse();
        for (i, r) in shuffled.rounds.iter_mut().enumerate() {
            r.n = i + 1;
        }
        let report_rev = calibration_report(&shuffled, &tents, 1.0).unwrap();
        for (a, b) in report.rows.iter().zip(report_rev.rows.iter()) {
            assert!((a.weight_sum - b.weight_sum).abs() < 1e-12);
            let (ra, rb) = (
                a.weighted_residual_ratio.unwrap(),
                b.weighted_residual_ratio.unwrap(),
            );
            assert!((ra - rb).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_link_calibrates_at_the_true_rate() {
        // p = 0.7, no datum: once the neighborhood at f* = 0.7 is active,
        // its weighted residual ratio settles below 0.05. Oracle: direct
        // empirical average over the bucketed rounds.
        let record = run_game(RunSetup {
            protocol: ProtocolSpec::new(ProtocolVariant::Binary).unwrap(),
            kernel: Kernel::sobolev_exp(1, 0).unwrap(),
            forecaster: ForecasterKind::K29,
            skeptic: SkepticDescriptor::Wlln,
            reality: RealitySource::iid(
                DatumSampler::None,
                IidObservationModel::Bernoulli { link: LinkFunction::Constant { p: 0.7 } },
                71,
            ),
            solver: SolverConfig::default(),
            horizon: 1500,
            initial_capital: 0.0,
            seed: 71,
            config_hash: "test".into(),
        })
        .unwrap();
        let tent = TentFunction::new(vec![0.7], vec![0.3]).unwrap();
        let report =
            calibration_report(&record, std::slice::from_ref(&tent), 10.0).unwrap();
        let row = &report.rows[0];
        assert!(row.active, "mass {} below threshold", row.weight_sum);
        let ratio = row.weighted_residual_ratio.unwrap();
        assert!(ratio <= 0.05, "ratio {ratio}");

        let mut wsum = 0.0;
        let mut rsum = 0.0;
        for r in &record.rounds {
            let w = tent.eval_coords(&r.f);
            wsum += w;
            rsum += w * r.residual[0];
        }
        assert!((ratio - rsum.abs() / wsum).abs() < 1e-12);
        assert!(report.pass());
    }

    #[test]
    fn calibration_ratio_matches_direct_average() {
        let record = binary_run(Kernel::sobolev_exp(1, 0).unwrap(), 13, 200);
        let tent = TentFunction::new(vec![0.5], vec![0.3]).unwrap();
        let report =
            calibration_report(&record, std::slice::from_ref(&tent), 1.0).unwrap();
        // Direct empirical recomputation.
        let mut wsum = 0.0;
        let mut rsum = 0.0;
        for r in &record.rounds {
            let w = tent.eval_coords(&r.f);
            wsum += w;
            rsum += w * r.residual[0];
        }
        let want = rsum.abs() / wsum;
        let got = report.rows[0].weighted_residual_ratio.unwrap();
        assert!((got - want).abs() < 1e-12);
    }
}
