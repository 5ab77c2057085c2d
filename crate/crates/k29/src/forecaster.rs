//! The K29 defensive forecaster.
//!
//! On round `n` the forecaster evaluates the Skeptic field
//! `S(f) = Σ_{i<n} K((f_i,x_i), (f,x_n)) · (y_i − f_i)` and outputs either a
//! zero of the field or a boundary point where the field is an exterior
//! normal. Either way `⟨S(f_n), y − f_n⟩ ≤ 0` (up to solver tolerance) for
//! every possible observation, so the kernel Skeptic's capital cannot grow.
//!
//! Zero-finding over a convex set has no general guaranteed-time algorithm,
//! so the solver is staged: certificate probes at the barycenter and the
//! extreme points; an exact bracketed bisection on intervals; elsewhere a
//! damped projected fixed-point iteration `f ← σ(f + ηS(f))` (restarted
//! from each vertex on stagnation), a least-squares polish of the
//! fixed-point residual, derivative-free compass/zoom refinement for the
//! kink cases, and a projected grid scan as the last resort. A round that
//! exhausts all stages reports `SolverFailure` with the best point found —
//! never a silent bad forecast.

use serde::{Deserialize, Serialize};

use crate::geometry::{ConvexDomain, ObservationSet, Vector, MEMBERSHIP_TOL};
use crate::kernels::{Kernel, Point};
use crate::{Error, Result};

/// Solver knobs. `field_tol` is relative: the absolute tolerance on
/// `‖S(f)‖` (and on the boundary slack) is `field_tol · (1 + Σ‖r_i‖·C)`
/// with `C = sup √K(z,z)`, which keeps it meaningful across kernels and
/// horizons.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(default = "default_field_tol")]
    pub field_tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Fixed step size for the projected iteration; adaptive when absent.
    #[serde(default)]
    pub step: Option<f64>,
    /// Per-axis density budget for the fallback grid scan.
    #[serde(default = "default_grid_resolution")]
    pub grid_resolution: usize,
}

fn default_field_tol() -> f64 {
    1e-8
}
fn default_max_iters() -> usize {
    10_000
}
fn default_grid_resolution() -> usize {
    200
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            field_tol: default_field_tol(),
            max_iters: default_max_iters(),
            step: None,
            grid_resolution: default_grid_resolution(),
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.field_tol.is_finite() && self.field_tol > 0.0) {
            return Err(Error::Invalid(format!(
                "solver field_tol must be > 0, got {}",
                self.field_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Invalid("solver max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// What the returned forecast certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// `‖S(f)‖` is below tolerance.
    Zero,
    /// `sup_y ⟨S(f), y − f⟩` is below tolerance: the field is an exterior
    /// normal at `f`.
    BoundaryNormal,
    /// Empty history or a field that vanishes at every probe; the
    /// barycenter is returned.
    Default,
    /// Recorded for forecasts the K29 solver did not produce and that meet
    /// neither threshold (foreign forecasting rules in the game engine).
    Unverified,
}

/// Proof object accompanying each forecast.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastCertificate {
    pub kind: CertificateKind,
    /// `‖S(f)‖` at the returned point.
    pub field_norm: f64,
    /// `sup_{y ∈ F} ⟨S(f), y − f⟩` at the returned point (never negative
    /// for in-domain forecasts).
    pub boundary_slack: f64,
}

/// Outcome of one fixed-point descent.
enum Descent {
    Certified((Vector, ForecastCertificate)),
    Stagnated(Vector),
}

/// What a full grid scan found.
struct GridScan {
    /// Lowest-slack nodes, best first.
    top_slack: Vec<Vector>,
    /// Centers of 2-D cells where every field component changes sign.
    crossings: Vec<Vector>,
    /// Worst-axis node spacing.
    spacing: f64,
}

/// A 1-D piece of a domain boundary, parameterized over `[0, 1]`.
enum BoundaryCurve {
    Segment { a: Vector, b: Vector },
    /// `{(t, t²)}` between the given abscissas.
    Arc { lo: f64, hi: f64 },
}

impl BoundaryCurve {
    fn point(&self, u: f64) -> Vector {
        match self {
            BoundaryCurve::Segment { a, b } => a.add(&b.sub(a).scale(u)),
            BoundaryCurve::Arc { lo, hi } => {
                let t = lo + u * (hi - lo);
                Vector::from_raw(vec![t, t * t])
            }
        }
    }

    fn tangent(&self, u: f64) -> Vector {
        match self {
            BoundaryCurve::Segment { a, b } => b.sub(a),
            BoundaryCurve::Arc { lo, hi } => {
                let t = lo + u * (hi - lo);
                Vector::from_raw(vec![1.0, 2.0 * t])
            }
        }
    }
}

/// The K29 forecaster: kernel parameter, forecast domain, observation set
/// and the played history.
#[derive(Clone, Debug)]
pub struct K29Forecaster {
    kernel: Kernel,
    domain: ConvexDomain,
    observations: ObservationSet,
    solver: SolverConfig,
    history: Vec<(Point, Vector)>,
    residual_norm_sum: f64,
    diag_sup: Option<f64>,
    seen_diag_max: f64,
}

impl K29Forecaster {
    pub fn new(
        kernel: Kernel,
        domain: ConvexDomain,
        observations: ObservationSet,
        solver: SolverConfig,
    ) -> Result<Self> {
        solver.validate()?;
        if kernel.forecast_dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: kernel.forecast_dim(),
            });
        }
        if observations.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: observations.dim(),
            });
        }
        let diag_sup = kernel.diag_sup();
        Ok(Self {
            kernel,
            domain,
            observations,
            solver,
            history: Vec::new(),
            residual_norm_sum: 0.0,
            diag_sup,
            seen_diag_max: 0.0,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn observations(&self) -> &ObservationSet {
        &self.observations
    }

    pub fn solver(&self) -> &SolverConfig {
        &self.solver
    }

    pub fn rounds(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> impl Iterator<Item = (&Point, &Vector)> {
        self.history.iter().map(|(p, r)| (p, r))
    }

    /// Scale factor normalizing the solver tolerance.
    pub fn field_scale(&self) -> f64 {
        let diag = self.diag_sup.unwrap_or_else(|| self.seen_diag_max.max(1.0));
        1.0 + self.residual_norm_sum * diag
    }

    /// Absolute tolerance on `‖S(f)‖` and on the boundary slack.
    pub fn epsilon(&self) -> f64 {
        self.solver.field_tol * self.field_scale()
    }

    /// The Skeptic field `S(f) = Σ K((f_i,x_i), (f,x)) (y_i − f_i)`.
    /// Requires `f` to lie in the domain (loose tolerance: the field is what
    /// the certificates are about, and those only concern domain points).
    pub fn field(&self, f: &Vector, x: &Vector) -> Result<Vector> {
        self.check_datum(x)?;
        let dist = self.domain.distance(f)?;
        if dist > 1e-6 {
            return Err(Error::Contract(format!(
                "field evaluated {dist:.3e} outside the forecast domain"
            )));
        }
        Ok(self.field_raw(f.coords(), x.coords()))
    }

    /// Field evaluation without the membership check; used by the engine
    /// to audit foreign (possibly out-of-hull) forecasts.
    pub(crate) fn field_raw(&self, f: &[f64], x: &[f64]) -> Vector {
        let mut out = Vector::zeros(self.domain.dim());
        for (p, r) in &self.history {
            let w = self.kernel.eval_unchecked(
                p.forecast.coords(),
                p.datum.coords(),
                f,
                x,
            );
            out = out.axpy(w, r);
        }
        out
    }

    /// Record a completed round: history gains `((f, x), y − f)`.
    pub fn observe(&mut self, x: Vector, f: Vector, y: Vector) -> Result<()> {
        self.check_datum(&x)?;
        let dist = self.domain.distance(&f)?;
        if dist > MEMBERSHIP_TOL {
            return Err(Error::Validation(format!(
                "forecast lies {dist:.3e} outside the forecast domain"
            )));
        }
        if !self.observations.contains(&y, MEMBERSHIP_TOL) {
            return Err(Error::Validation(format!(
                "observation {y:?} is not in the observation set"
            )));
        }
        self.observe_unchecked(x, f, y)
    }

    /// History extension without the membership checks. The engine records
    /// foreign (possibly out-of-hull) forecasting rules through this so
    /// that fields and certificates stay auditable.
    pub(crate) fn observe_unchecked(&mut self, x: Vector, f: Vector, y: Vector) -> Result<()> {
        self.check_datum(&x)?;
        if f.dim() != self.domain.dim() || y.dim() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                got: f.dim().max(y.dim()),
            });
        }
        let residual = y.sub(&f);
        let point = Point::new(f, x);
        if self.diag_sup.is_none() {
            let d = self.kernel.eval(&point, &point)?;
            self.seen_diag_max = self.seen_diag_max.max(d.max(0.0).sqrt());
        }
        self.residual_norm_sum += residual.norm();
        self.history.push((point, residual));
        Ok(())
    }

    /// `sup_{y ∈ F} ⟨s, y − f⟩`; equals the sup over the observation set
    /// since the functional is linear.
    fn slack(&self, f: &Vector, s: &Vector) -> f64 {
        let (_, sup) = self
            .domain
            .support_max(s)
            .expect("field dims match the domain");
        sup - s.dot(f)
    }

    fn check_datum(&self, x: &Vector) -> Result<()> {
        if x.dim() != self.kernel.datum_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kernel.datum_dim(),
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// Produce the round's forecast together with its certificate.
    pub fn next_forecast(&self, x: &Vector) -> Result<(Vector, ForecastCertificate)> {
        self.check_datum(x)?;
        let barycenter = self.domain.barycenter();
        if self.history.is_empty() {
            return Ok((
                barycenter,
                ForecastCertificate {
                    kind: CertificateKind::Default,
                    field_norm: 0.0,
                    boundary_slack: 0.0,
                },
            ));
        }
        let eps = self.epsilon();
        let xc = x.coords();

        // Certificate probes: barycenter first, then the extreme points.
        let mut probes = vec![barycenter.clone()];
        probes.extend(self.domain.vertices());
        let evals: Vec<(Vector, f64, f64)> = probes
            .iter()
            .map(|p| {
                let s = self.field_raw(p.coords(), xc);
                let ns = s.norm();
                let slack = self.slack(p, &s);
                (s, ns, slack)
            })
            .collect();

        if evals.iter().all(|(_, ns, _)| *ns <= eps) {
            let (_, ns, slack) = &evals[0];
            return Ok((
                barycenter,
                ForecastCertificate {
                    kind: CertificateKind::Default,
                    field_norm: *ns,
                    boundary_slack: slack.max(0.0),
                },
            ));
        }
        for (p, (_, ns, slack)) in probes.iter().zip(evals.iter()) {
            if *ns <= eps {
                return Ok((
                    p.clone(),
                    ForecastCertificate {
                        kind: CertificateKind::Zero,
                        field_norm: *ns,
                        boundary_slack: slack.max(0.0),
                    },
                ));
            }
        }
        for (p, (_, ns, slack)) in probes.iter().zip(evals.iter()) {
            if *slack <= eps {
                return Ok((
                    p.clone(),
                    ForecastCertificate {
                        kind: CertificateKind::BoundaryNormal,
                        field_norm: *ns,
                        boundary_slack: slack.max(0.0),
                    },
                ));
            }
        }

        if let ConvexDomain::Interval { lo, hi } = self.domain {
            // Probes failed, so S(lo) > 0 > S(hi): a bracketed sign change.
            let s_lo = evals[1].0.get(0);
            let s_hi = evals[2].0.get(0);
            debug_assert!(s_lo > 0.0 && s_hi < 0.0);
            return self.bisect_interval(lo, hi, xc, eps);
        }
        self.solve_multidim(&probes, &evals, xc, eps)
    }

    /// Bracketed bisection on `[lo, hi]` with `S(lo) > 0 > S(hi)`.
    fn bisect_interval(
        &self,
        mut lo: f64,
        mut hi: f64,
        xc: &[f64],
        eps: f64,
    ) -> Result<(Vector, ForecastCertificate)> {
        let field1 = |t: f64| self.field_raw(&[t], xc).get(0);
        for _ in 0..self.solver.max_iters {
            let mid = 0.5 * (lo + hi);
            let s_mid = field1(mid);
            if s_mid.abs() <= eps {
                let f = Vector::from_raw(vec![mid]);
                let s = Vector::from_raw(vec![s_mid]);
                let slack = self.slack(&f, &s);
                return Ok((
                    f,
                    ForecastCertificate {
                        kind: CertificateKind::Zero,
                        field_norm: s_mid.abs(),
                        boundary_slack: slack.max(0.0),
                    },
                ));
            }
            if s_mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * (1.0 + lo.abs() + hi.abs()) {
                break;
            }
        }
        let mid = 0.5 * (lo + hi);
        let s = Vector::from_raw(vec![field1(mid)]);
        let f = Vector::from_raw(vec![mid]);
        Err(Error::SolverFailure { slack: self.slack(&f, &s).max(0.0), best: f })
    }

    /// Staged search on multi-dimensional domains:
    ///
    /// 1. damped projected fixed-point iteration `f ← σ(f + ηS(f))` from the
    ///    barycenter, restarted from each vertex, accepting steps that
    ///    strictly decrease the boundary slack;
    /// 2. least-squares polish of the fixed-point residual from every
    ///    stagnation point, which handles zeros the forward map repels from;
    /// 3. derivative-free compass/zoom refinement around the incumbent,
    ///    which handles kernel kinks;
    /// 4. a projected grid scan over the bounding box, polished the same
    ///    way.
    ///
    /// Failing all stages, the best point found is reported in the error —
    /// never silently played.
    fn solve_multidim(
        &self,
        probes: &[Vector],
        evals: &[(Vector, f64, f64)],
        xc: &[f64],
        eps: f64,
    ) -> Result<(Vector, ForecastCertificate)> {
        let mut best: Option<(Vector, f64, f64)> = None;
        let mut budget = self.solver.max_iters;

        let mut fixed_point_budget = budget / 2;
        let mut terminals = Vec::with_capacity(probes.len());
        for (start, start_eval) in probes.iter().zip(evals.iter()) {
            match self.descend_slack(
                start,
                start_eval,
                xc,
                eps,
                &mut fixed_point_budget,
                &mut best,
            ) {
                Descent::Certified(found) => return Ok(found),
                Descent::Stagnated(terminal) => terminals.push(terminal),
            }
            if fixed_point_budget == 0 {
                break;
            }
        }
        budget -= budget / 2 - fixed_point_budget;

        // Least-squares starts: descent terminals, the probes, and a spread
        // of history forecasts — for sharply localized kernels the zeros
        // live where the history bumps interact, far from any probe.
        let mut lm_starts: Vec<Vector> = Vec::new();
        let add_start = |v: &Vector, list: &mut Vec<Vector>| {
            if !list.contains(v) {
                list.push(v.clone());
            }
        };
        for terminal in &terminals {
            add_start(terminal, &mut lm_starts);
        }
        for probe in probes {
            add_start(probe, &mut lm_starts);
        }
        let n = self.history.len();
        let stride = (n / 8).max(1);
        for (i, (p, _)) in self.history.iter().enumerate() {
            if i >= n.saturating_sub(4) || i % stride == 0 {
                let projected = self.domain.project(&p.forecast)?;
                add_start(&projected, &mut lm_starts);
            }
        }
        // Midpoints of recent consecutive forecasts: sharply localized
        // kernels put their zeros between interacting history bumps.
        for window in self.history.windows(2).rev().take(6) {
            let mid = window[0].0.forecast.add(&window[1].0.forecast).scale(0.5);
            add_start(&self.domain.project(&mid)?, &mut lm_starts);
        }
        for start in &lm_starts {
            if let Some(found) = self.lm_polish(start, xc, eps, &mut budget, &mut best) {
                return Ok(found);
            }
            if budget == 0 {
                break;
            }
        }

        // Boundary-normal points on a smooth boundary piece are zeros of
        // the tangential field component along that piece: a 1-D problem
        // the curve scan solves to machine precision. This is how narrow
        // slack valleys along the boundary are found at all.
        if let Some(found) = self.boundary_curve_scan(xc, eps, &mut best) {
            return Ok(found);
        }

        // On a simplex, an exterior normal in the relative interior of a
        // face means the field components over the face's support equalize
        // (and dominate the rest); solve that reduced system on each face.
        if let Some(found) = self.simplex_face_scan(xc, eps, &mut best) {
            return Ok(found);
        }

        // The smooth stages stall where the kernel has kinks (e.g. the
        // exponential-Sobolev family along history coordinates); the
        // derivative-free stages do not care about smoothness.
        let diam = self.domain.diameter().max(1e-12);
        if let Some(found) = self.local_polish(xc, eps, 1e-2 * diam, &mut best) {
            return Ok(found);
        }

        let scan = self.grid_scan(xc, &mut best)?;
        // Sign-change cells are where actual zeros live; magnitude-ranked
        // nodes can sit on deceptive flat plateaus where the field is tiny
        // but never crosses zero.
        for node in scan.crossings.iter().chain(scan.top_slack.iter()) {
            if let Some(found) = self.certify(node, xc, eps) {
                return Ok(found);
            }
            let mut polish_budget = self.solver.max_iters / 4;
            if let Some(found) = self.lm_polish(node, xc, eps, &mut polish_budget, &mut best) {
                return Ok(found);
            }
            let mut zoom_budget = self.solver.max_iters / 4;
            if let Some(found) =
                self.zoom_polish(node, xc, eps, scan.spacing, &mut zoom_budget, &mut best)
            {
                return Ok(found);
            }
        }
        let grid_spacing = scan.spacing;
        if let Some(found) =
            self.local_polish(xc, eps, grid_spacing.max(1e-2 * diam), &mut best)
        {
            return Ok(found);
        }
        let (point, _, slack) = best.expect("at least the probes were evaluated");
        Err(Error::SolverFailure { best: point, slack })
    }

    /// One-dimensional pieces of the domain boundary (plus, for finite
    /// hulls, chords between vertices — harmless extras, since every root
    /// is certified against the full support function before use).
    fn boundary_curves(&self) -> Vec<BoundaryCurve> {
        match &self.domain {
            ConvexDomain::Interval { .. } => Vec::new(),
            ConvexDomain::ParabolaHull { lo, hi } => vec![
                BoundaryCurve::Arc { lo: *lo, hi: *hi },
                BoundaryCurve::Segment {
                    a: Vector::from_raw(vec![*lo, lo * lo]),
                    b: Vector::from_raw(vec![*hi, hi * hi]),
                },
            ],
            ConvexDomain::Box { bounds } if bounds.len() <= 5 => {
                let verts = self.domain.vertices();
                let mut out = Vec::new();
                for (i, a) in verts.iter().enumerate() {
                    for b in verts.iter().skip(i + 1) {
                        // Box edges differ in exactly one coordinate.
                        let differing = a
                            .coords()
                            .iter()
                            .zip(b.coords())
                            .filter(|(x, y)| x != y)
                            .count();
                        if differing == 1 {
                            out.push(BoundaryCurve::Segment { a: a.clone(), b: b.clone() });
                        }
                    }
                }
                out
            }
            ConvexDomain::Simplex { m } if *m <= 8 => {
                let verts = self.domain.vertices();
                let mut out = Vec::new();
                for (i, a) in verts.iter().enumerate() {
                    for b in verts.iter().skip(i + 1) {
                        out.push(BoundaryCurve::Segment { a: a.clone(), b: b.clone() });
                    }
                }
                out
            }
            ConvexDomain::FiniteHull { vertices } if vertices.len() <= 16 => {
                let mut out = Vec::new();
                for (i, a) in vertices.iter().enumerate() {
                    for b in vertices.iter().skip(i + 1) {
                        out.push(BoundaryCurve::Segment { a: a.clone(), b: b.clone() });
                    }
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Find zeros of the tangential field component along each boundary
    /// curve (scan + bisection) and certify each root against the full
    /// support function. Every scanned node is also certified directly,
    /// since the field evaluation is already paid for.
    fn boundary_curve_scan(
        &self,
        xc: &[f64],
        eps: f64,
        best: &mut Option<(Vector, f64, f64)>,
    ) -> Option<(Vector, ForecastCertificate)> {
        // Fine enough that a sharp kernel bump cannot flip the tangential
        // sign twice inside one cell.
        let cells = self.solver.grid_resolution.max(2048);
        for curve in self.boundary_curves() {
            let point_at = |u: f64| curve.point(u);
            let eval_at = |u: f64| {
                let p = point_at(u);
                let s = self.field_raw(p.coords(), xc);
                let g = s.dot(&curve.tangent(u));
                (p, s, g)
            };
            let tangential = |u: f64| {
                let p = point_at(u);
                self.field_raw(p.coords(), xc).dot(&curve.tangent(u))
            };
            let mut prev_u = 0.0;
            let mut prev_g = {
                let (p, s, g) = eval_at(0.0);
                if let Some(found) = self.check_candidate(&p, &s, eps, best) {
                    return Some(found);
                }
                g
            };
            for i in 1..=cells {
                let u = i as f64 / cells as f64;
                let (p, s, g) = eval_at(u);
                if let Some(found) = self.check_candidate(&p, &s, eps, best) {
                    return Some(found);
                }
                if prev_g == 0.0 || prev_g * g < 0.0 {
                    // Bisect the bracket to machine precision.
                    let (mut a, mut b, mut ga) = (prev_u, u, prev_g);
                    for _ in 0..100 {
                        let mid = 0.5 * (a + b);
                        let gm = tangential(mid);
                        if gm == 0.0 || (b - a) < 1e-15 {
                            break;
                        }
                        if ga * gm < 0.0 {
                            b = mid;
                        } else {
                            a = mid;
                            ga = gm;
                        }
                    }
                    let root = point_at(0.5 * (a + b));
                    let s = self.field_raw(root.coords(), xc);
                    if let Some(found) = self.check_candidate(&root, &s, eps, best) {
                        return Some(found);
                    }
                }
                prev_u = u;
                prev_g = g;
            }
        }
        None
    }

    /// Enumerate simplex faces (support sets of size ≥ 3; edges and
    /// vertices are handled by the curve scan and the probes) and try to
    /// equalize the field over each.
    fn simplex_face_scan(
        &self,
        xc: &[f64],
        eps: f64,
        best: &mut Option<(Vector, f64, f64)>,
    ) -> Option<(Vector, ForecastCertificate)> {
        let ConvexDomain::Simplex { m } = self.domain else {
            return None;
        };
        if !(3..=8).contains(&m) {
            return None;
        }
        let mut budget = self.solver.max_iters / 2;
        for mask in 1u32..(1 << m) {
            let support: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
            if support.len() < 3 {
                continue;
            }
            if let Some(found) = self.face_equalize(&support, xc, eps, &mut budget, best) {
                return Some(found);
            }
            if budget == 0 {
                break;
            }
        }
        None
    }

    /// Levenberg–Marquardt on the equalization residual
    /// `g_j = S_j(f) − mean_{j' ∈ support} S_{j'}(f)` over a simplex face.
    /// A root whose remaining components stay below the common value is an
    /// exterior-normal point; the full slack check decides.
    fn face_equalize(
        &self,
        support: &[usize],
        xc: &[f64],
        eps: f64,
        budget: &mut usize,
        best: &mut Option<(Vector, f64, f64)>,
    ) -> Option<(Vector, ForecastCertificate)> {
        let m = self.domain.dim();
        let k = support.len();
        let face = ConvexDomain::Simplex { m: k };
        let embed = |w: &Vector| {
            let mut full = vec![0.0; m];
            for (slot, &j) in support.iter().enumerate() {
                full[j] = w.get(slot);
            }
            Vector::from_raw(full)
        };
        let eval = |w: &Vector| {
            let f = embed(w);
            let s = self.field_raw(f.coords(), xc);
            let mean: f64 = support.iter().map(|&j| s.get(j)).sum::<f64>() / k as f64;
            let g = Vector::from_raw(support.iter().map(|&j| s.get(j) - mean).collect());
            (f, s, g)
        };

        let mut w = face.barycenter();
        let (f, s, mut g) = eval(&w);
        if let Some(found) = self.check_candidate(&f, &s, eps, best) {
            return Some(found);
        }
        let mut gn = g.norm();
        let mut lambda = 1e-3;
        for _ in 0..60 {
            if *budget < k + 1 {
                return None;
            }
            let h = 1e-7;
            let mut jac = vec![vec![0.0; k]; k];
            for col in 0..k {
                let mut shifted = w.coords().to_vec();
                shifted[col] += h;
                let (_, _, g_shift) = eval(&Vector::from_raw(shifted));
                *budget -= 1;
                for (row, jac_row) in jac.iter_mut().enumerate() {
                    jac_row[col] = (g_shift.get(row) - g.get(row)) / h;
                }
            }
            let mut jtj = vec![vec![0.0; k]; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                for j in 0..k {
                    jtj[i][j] = (0..k).map(|row| jac[row][i] * jac[row][j]).sum();
                }
                rhs[i] = -(0..k).map(|row| jac[row][i] * g.get(row)).sum::<f64>();
            }
            let trace: f64 = (0..k).map(|i| jtj[i][i]).sum();
            let damping = lambda * (trace / k as f64 + 1e-30);
            let mut system = jtj;
            for (i, row) in system.iter_mut().enumerate() {
                row[i] += damping;
            }
            let Some(step) = crate::geometry::solve_linear(&mut system, &mut rhs) else {
                lambda *= 10.0;
                if lambda > 1e12 {
                    return None;
                }
                continue;
            };
            let w2 = face
                .project(&w.add(&Vector::from_raw(step)))
                .expect("face projection");
            let (f2, s2, g2) = eval(&w2);
            *budget -= 1;
            if let Some(found) = self.check_candidate(&f2, &s2, eps, best) {
                return Some(found);
            }
            let gn2 = g2.norm();
            if gn2 < gn {
                w = w2;
                g = g2;
                gn = gn2;
                lambda = (lambda / 3.0).max(1e-12);
            } else {
                lambda *= 4.0;
                if lambda > 1e12 {
                    return None;
                }
            }
        }
        None
    }

    /// Certify a candidate point if either threshold holds; always records
    /// it in the incumbent.
    fn check_candidate(
        &self,
        f: &Vector,
        s: &Vector,
        eps: f64,
        best: &mut Option<(Vector, f64, f64)>,
    ) -> Option<(Vector, ForecastCertificate)> {
        let ns = s.norm();
        let slack = self.slack(f, s);
        Self::update_best(best, f, ns, slack);
        if ns <= eps {
            return Some((f.clone(), Self::certificate(CertificateKind::Zero, ns, slack)));
        }
        if slack <= eps {
            return Some((
                f.clone(),
                Self::certificate(CertificateKind::BoundaryNormal, ns, slack),
            ));
        }
        None
    }

    /// Derivative-free refinement around the best point found so far:
    /// compass search, then a zooming grid scan.
    fn local_polish(
        &self,
        xc: &[f64],
        eps: f64,
        window: f64,
        best: &mut Option<(Vector, f64, f64)>,
    ) -> Option<(Vector, ForecastCertificate)> {
        let start = best.as_ref().map(|(p, _, _)| p.clone())?;
        let mut budget = self.solver.max_iters / 4;
        if let Some(found) = self.compass_polish(&start, xc, eps, &mut budget, best) {
            return Some(found);
        }
        let start = best.as_ref().map(|(p, _, _)| p.clone())?;
        let mut budget = self.solver.max_iters / 2;
        self.zoom_polish(&start, xc, eps, window, &mut budget, best)
    }

    /// Shrinking-window grid scan: evaluate a small grid around the center,
    /// recenter on the slack argmin, shrink the window geometrically. The
    /// shrink factor keeps the next window inside a few resolution steps of
    /// the argmin, so a minimum inside the initial window cannot escape.
    fn zoom_polish(
        &self,
        start: &Vector,
        xc: &[f64],
        eps: f64,
        window: f64,
        budget: &mut usize,
        best: &mut Option<(Vector, f64, f64)>,
    ) -> Option<(Vector, ForecastCertificate)> {
        let m = self.domain.dim();
        let diam = self.domain.diameter().max(1e-12);
        let per_axis: usize = match m {
            0..=2 => 21,
            3 => 9,
            _ => 5,
        };
        let mut center = start.clone();
        let mut halfwidth = window.max(1e-12 * diam);
        while *budget > 0 && halfwidth > 1e-13 * diam {
            let mut local_best: Option<(Vector, f64)> = None;
            let mut idx = vec![0usize; m];
            'grid: loop {
                let raw = Vector::from_raw(
                    idx.iter()
                        .enumerate()
                        .map(|(axis, &i)| {
                            center.get(axis) - halfwidth
                                + 2.0 * halfwidth * i as f64 / (per_axis - 1) as f64
                        })
                        .collect(),
                );
                let point = self
                    .domain
                    .project(&raw)
                    .expect("projection within the domain dims");
                let s = self.field_raw(point.coords(), xc);
                *budget = budget.saturating_sub(1);
                let ns = s.norm();
                let slack = self.slack(&point, &s);
                Self::update_best(best, &point, ns, slack);
                if ns <= eps {
                    return Some((point, Self::certificate(CertificateKind::Zero, ns, slack)));
                }
                if slack <= eps {
                    return Some((
                        point,
                        Self::certificate(CertificateKind::BoundaryNormal, ns, slack),
                    ));
                }
                let better = match &local_best {
                    None => true,
                    Some((bp, bs)) => slack < *bs || (slack == *bs && point.lex_lt(bp)),
                };
                if better {
                    local_best = Some((point, slack));
                }
                let mut axis = 0;
                loop {
                    if axis == m {
                        break 'grid;
                    }
                    idx[axis] += 1;
                    if idx[axis] < per_axis {
                        break;
                    }
                    idx[axis] = 0;
                    axis += 1;
                }
            }
            center = local_best.expect("grid visited at least one point").0;
            halfwidth *= 0.25;
        }
        None
    }

    /// Deterministic compass search on the boundary slack: first-improvement
    /// over the axis and diagonal directions, step doubling on success and
    /// halving on failure. Derivative-free, so kernel kinks are harmless.
    fn compass_polish(
        &self,
        start: &Vector,
        xc: &[f64],
        eps: f64,
        budget: &mut usize,
        best: &mut Option<(Vector, f64, f64)>,
    ) -> Option<(Vector, ForecastCertificate)> {
        let m = self.domain.dim();
        let diam = self.domain.diameter().max(1e-12);
        let mut dirs: Vec<Vector> = Vec::new();
        for i in 0..m {
            for sign in [1.0, -1.0] {
                let mut d = vec![0.0; m];
                d[i] = sign;
                dirs.push(Vector::from_raw(d));
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut d = vec![0.0; m];
                    d[i] = si;
                    d[j] = sj;
                    dirs.push(Vector::from_raw(d));
                }
            }
        }

        let mut f = start.clone();
        let s = self.field_raw(f.coords(), xc);
        let mut slack = self.slack(&f, &s);
        let mut step = 1e-2 * diam;
        while *budget > 0 && step > 1e-14 * diam {
            let mut improved = false;
            for d in &dirs {
                if *budget == 0 {
                    break;
                }
                let candidate = self
                    .domain
                    .project(&f.axpy(step, d))
                    .expect("projection within the domain dims");
                if candidate == f {
                    continue;
                }
                let s2 = self.field_raw(candidate.coords(), xc);
                *budget -= 1;
                let ns2 = s2.norm();
                let slack2 = self.slack(&candidate, &s2);
                Self::update_best(best, &candidate, ns2, slack2);
                if ns2 <= eps {
                    return Some((
                        candidate,
                        Self::certificate(CertificateKind::Zero, ns2, slack2),
                    ));
                }
                if slack2 <= eps {
                    return Some((
                        candidate,
                        Self::certificate(CertificateKind::BoundaryNormal, ns2, slack2),
                    ));
                }
                if slack2 < slack {
                    f = candidate;
                    slack = slack2;
                    improved = true;
                    break;
                }
            }
            step *= if improved { 2.0 } else { 0.5 };
        }
        None
    }

    fn certificate(kind: CertificateKind, ns: f64, slack: f64) -> ForecastCertificate {
        ForecastCertificate { kind, field_norm: ns, boundary_slack: slack.max(0.0) }
    }

    fn certify(&self, f: &Vector, xc: &[f64], eps: f64) -> Option<(Vector, ForecastCertificate)> {
        let s = self.field_raw(f.coords(), xc);
        let ns = s.norm();
        let slack = self.slack(f, &s);
        if ns <= eps {
            Some((f.clone(), Self::certificate(CertificateKind::Zero, ns, slack)))
        } else if slack <= eps {
            Some((f.clone(), Self::certificate(CertificateKind::BoundaryNormal, ns, slack)))
        } else {
            None
        }
    }

    fn update_best(best: &mut Option<(Vector, f64, f64)>, f: &Vector, ns: f64, slack: f64) {
        let better = match best {
            None => true,
            Some((_, _, best_slack)) => slack < *best_slack,
        };
        if better {
            *best = Some((f.clone(), ns, slack));
        }
    }

    /// Damped projected fixed-point iteration accepting strict decreases of
    /// the boundary slack; `η` halves on failure and grows on success.
    fn descend_slack(
        &self,
        start: &Vector,
        start_eval: &(Vector, f64, f64),
        xc: &[f64],
        eps: f64,
        budget: &mut usize,
        best: &mut Option<(Vector, f64, f64)>,
    ) -> Descent {
        let diam = self.domain.diameter().max(1e-12);
        let mut f = start.clone();
        let (mut s, mut ns, mut slack) = start_eval.clone();
        Self::update_best(best, &f, ns, slack);
        let mut eta = self.solver.step.unwrap_or(diam / (1.0 + ns));
        while *budget > 0 {
            *budget -= 1;
            let candidate = self
                .domain
                .project(&f.axpy(eta, &s))
                .expect("projection within the domain dims");
            let s2 = self.field_raw(candidate.coords(), xc);
            let ns2 = s2.norm();
            let slack2 = self.slack(&candidate, &s2);
            Self::update_best(best, &candidate, ns2, slack2);
            if ns2 <= eps {
                return Descent::Certified((
                    candidate,
                    Self::certificate(CertificateKind::Zero, ns2, slack2),
                ));
            }
            if slack2 <= eps {
                return Descent::Certified((
                    candidate,
                    Self::certificate(CertificateKind::BoundaryNormal, ns2, slack2),
                ));
            }
            if slack2 < slack * (1.0 - 1e-12) {
                f = candidate;
                s = s2;
                ns = ns2;
                slack = slack2;
                if self.solver.step.is_none() {
                    eta *= 1.5;
                }
            } else {
                eta *= 0.5;
                if eta * ns <= 1e-15 * diam {
                    break; // stagnated
                }
            }
        }
        Descent::Stagnated(f)
    }

    /// Levenberg–Marquardt descent of the fixed-point residual
    /// `R(f) = f − σ(f + ηS(f))` with a forward-difference Jacobian. The
    /// zeros of `R` are exactly the admissible forecasts: interior zeros of
    /// the field (where `R = −ηS`) and boundary points with the field an
    /// exterior normal (where the projection undoes the step). Quadratic
    /// near regular solutions and indifferent to whether the forward map
    /// attracts to them.
    #[allow(clippy::needless_range_loop)] // dense Jacobian assembly
    fn lm_polish(
        &self,
        start: &Vector,
        xc: &[f64],
        eps: f64,
        budget: &mut usize,
        best: &mut Option<(Vector, f64, f64)>,
    ) -> Option<(Vector, ForecastCertificate)> {
        let m = self.domain.dim();
        let mut f = start.clone();
        let s_start = self.field_raw(f.coords(), xc);
        // Any fixed η > 0 has the same residual zero set; this one keeps
        // the first step within the domain's scale.
        let eta = self.solver.step.unwrap_or(1.0 / (1.0 + s_start.norm()));
        let residual_at = |f: &Vector, s: &Vector| -> Vector {
            let stepped = self
                .domain
                .project(&f.axpy(eta, s))
                .expect("projection within the domain dims");
            f.sub(&stepped)
        };
        let mut s = s_start;
        let mut r = residual_at(&f, &s);
        let mut rn = r.norm();
        let mut lambda = 1e-3;
        for _ in 0..200 {
            if *budget < m + 1 {
                return None;
            }
            let ns = s.norm();
            let slack = self.slack(&f, &s);
            Self::update_best(best, &f, ns, slack);
            if ns <= eps {
                return Some((f, Self::certificate(CertificateKind::Zero, ns, slack)));
            }
            if slack <= eps {
                return Some((f, Self::certificate(CertificateKind::BoundaryNormal, ns, slack)));
            }

            // Forward-difference Jacobian of R.
            let h = 1e-7;
            let mut jac = vec![vec![0.0; m]; m]; // jac[row][col]
            for col in 0..m {
                let mut shifted = f.coords().to_vec();
                shifted[col] += h;
                let f_shift = Vector::from_raw(shifted);
                let s_shift = self.field_raw(f_shift.coords(), xc);
                *budget -= 1;
                let r_shift = residual_at(&f_shift, &s_shift);
                for row in 0..m {
                    jac[row][col] = (r_shift.get(row) - r.get(row)) / h;
                }
            }

            // (JᵀJ + λ·scale·I) Δ = −Jᵀ R
            let mut jtj = vec![vec![0.0; m]; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                for j in 0..m {
                    let mut acc = 0.0;
                    for row in 0..m {
                        acc += jac[row][i] * jac[row][j];
                    }
                    jtj[i][j] = acc;
                }
                let mut acc = 0.0;
                for row in 0..m {
                    acc -= jac[row][i] * r.get(row);
                }
                rhs[i] = acc;
            }
            let trace: f64 = (0..m).map(|i| jtj[i][i]).sum();
            let damping = lambda * (trace / m as f64 + 1e-30);
            let mut system = jtj.clone();
            for (i, row) in system.iter_mut().enumerate() {
                row[i] += damping;
            }
            let step = match crate::geometry::solve_linear(&mut system, &mut rhs) {
                Some(step) => step,
                None => {
                    lambda *= 10.0;
                    if lambda > 1e12 {
                        return None;
                    }
                    continue;
                }
            };
            let candidate = self
                .domain
                .project(&f.add(&Vector::from_raw(step)))
                .expect("projection within the domain dims");
            let s2 = self.field_raw(candidate.coords(), xc);
            *budget -= 1;
            let r2 = residual_at(&candidate, &s2);
            let rn2 = r2.norm();
            if rn2 < rn {
                f = candidate;
                s = s2;
                r = r2;
                rn = rn2;
                lambda = (lambda / 3.0).max(1e-12);
            } else {
                lambda *= 4.0;
                if lambda > 1e12 {
                    return None;
                }
            }
        }
        None
    }

    /// Projected grid scan over the domain's bounding box. Returns the few
    /// lowest-slack nodes, the grid spacing (how far an optimum can hide
    /// from a node), and — on two-dimensional domains — the centers of
    /// cells where every field component changes sign.
    fn grid_scan(&self, xc: &[f64], best: &mut Option<(Vector, f64, f64)>) -> Result<GridScan> {
        const TOP_K: usize = 4;
        const MAX_CROSSINGS: usize = 8;
        let bounds = self.domain.bounding_box();
        let d = bounds.len();
        let per_axis = if d <= 1 {
            self.solver.grid_resolution.max(2)
        } else {
            let budget = (self.solver.grid_resolution as f64).powi(2);
            (budget.powf(1.0 / d as f64).floor() as usize).clamp(2, self.solver.grid_resolution)
        };
        let spacing = bounds
            .iter()
            .map(|(lo, hi)| (hi - lo) / (per_axis - 1) as f64)
            .fold(0.0f64, f64::max);
        let node = |i: usize, axis: usize| {
            let (lo, hi) = bounds[axis];
            lo + (hi - lo) * i as f64 / (per_axis - 1) as f64
        };

        let mut top: Vec<(Vector, f64)> = Vec::with_capacity(TOP_K + 1);
        let mut crossings: Vec<Vector> = Vec::new();
        let mut record = |point: Vector, s: &Vector, top: &mut Vec<(Vector, f64)>| {
            let ns = s.norm();
            let slack = self.slack(&point, s);
            Self::update_best(best, &point, ns, slack);
            let pos = top
                .iter()
                .position(|(p, sl)| slack < *sl || (slack == *sl && point.lex_lt(p)));
            match pos {
                Some(i) => top.insert(i, (point, slack)),
                None if top.len() < TOP_K => top.push((point, slack)),
                None => {}
            }
            top.truncate(TOP_K);
        };

        if d == 2 {
            // Row-by-row scan, retaining the previous row so cells can be
            // tested for a sign change in both components.
            let mut prev_row: Vec<(Vector, Vector)> = Vec::with_capacity(per_axis);
            for j in 0..per_axis {
                let mut row: Vec<(Vector, Vector)> = Vec::with_capacity(per_axis);
                for i in 0..per_axis {
                    let raw = Vector::from_raw(vec![node(i, 0), node(j, 1)]);
                    let point = self.domain.project(&raw)?;
                    let s = self.field_raw(point.coords(), xc);
                    record(point.clone(), &s, &mut top);
                    row.push((point, s));
                }
                if j > 0 && crossings.len() < MAX_CROSSINGS {
                    for i in 1..per_axis {
                        let cell = [
                            &prev_row[i - 1],
                            &prev_row[i],
                            &row[i - 1],
                            &row[i],
                        ];
                        let spans = |coord: usize| {
                            let mut lo = f64::INFINITY;
                            let mut hi = f64::NEG_INFINITY;
                            for (_, s) in cell {
                                lo = lo.min(s.get(coord));
                                hi = hi.max(s.get(coord));
                            }
                            lo < 0.0 && hi > 0.0
                        };
                        if spans(0) && spans(1) {
                            let mut center = Vector::zeros(2);
                            for (p, _) in cell {
                                center = center.axpy(0.25, p);
                            }
                            crossings.push(self.domain.project(&center)?);
                            if crossings.len() >= MAX_CROSSINGS {
                                break;
                            }
                        }
                    }
                }
                prev_row = row;
            }
        } else {
            let mut idx = vec![0usize; d];
            'odometer: loop {
                let raw = Vector::from_raw(
                    idx.iter()
                        .enumerate()
                        .map(|(axis, &i)| node(i, axis))
                        .collect(),
                );
                let point = self.domain.project(&raw)?;
                let s = self.field_raw(point.coords(), xc);
                record(point, &s, &mut top);
                let mut axis = 0;
                loop {
                    if axis == d {
                        break 'odometer;
                    }
                    idx[axis] += 1;
                    if idx[axis] < per_axis {
                        break;
                    }
                    idx[axis] = 0;
                    axis += 1;
                }
            }
        }
        Ok(GridScan {
            top_slack: top.into_iter().map(|(p, _)| p).collect(),
            crossings,
            spacing,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{ProtocolSpec, ProtocolVariant};

    fn v(coords: &[f64]) -> Vector {
        Vector::new(coords.to_vec()).unwrap()
    }

    fn binary_forecaster(kernel: Kernel) -> K29Forecaster {
        let protocol = ProtocolSpec::new(ProtocolVariant::Binary).unwrap();
        K29Forecaster::new(
            kernel,
            protocol.domain().clone(),
            protocol.observations().clone(),
            SolverConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn empty_history_field_is_zero() {
        let fc = binary_forecaster(Kernel::constant(1.0, 1, 0).unwrap());
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(fc.field(&v(&[t]), &Vector::zeros(0)).unwrap(), v(&[0.0]));
        }
    }

    #[test]
    fn constant_kernel_field_is_residual_sum() {
        let mut fc = binary_forecaster(Kernel::constant(1.0, 1, 0).unwrap());
        fc.observe(Vector::zeros(0), v(&[0.5]), v(&[1.0])).unwrap();
        for t in [0.0, 0.4, 1.0] {
            let s = fc.field(&v(&[t]), &Vector::zeros(0)).unwrap();
            assert!((s.get(0) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn sobolev_field_formula() {
        let mut fc = binary_forecaster(Kernel::sobolev_exp(1, 0).unwrap());
        fc.observe(Vector::zeros(0), v(&[0.5]), v(&[1.0])).unwrap();
        for t in [0.0, 0.25, 0.5, 0.9] {
            let s = fc.field(&v(&[t]), &Vector::zeros(0)).unwrap();
            let want = 0.25 * (-(t - 0.5f64).abs()).exp();
            assert!((s.get(0) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_history_defaults_to_barycenter() {
        let fc = binary_forecaster(Kernel::constant(1.0, 1, 0).unwrap());
        let (f, cert) = fc.next_forecast(&Vector::zeros(0)).unwrap();
        assert_eq!(f, v(&[0.5]));
        assert_eq!(cert.kind, CertificateKind::Default);
    }

    #[test]
    fn constant_field_pushes_to_boundary() {
        let mut fc = binary_forecaster(Kernel::constant(1.0, 1, 0).unwrap());
        fc.observe(Vector::zeros(0), v(&[0.5]), v(&[1.0])).unwrap();
        let (f, cert) = fc.next_forecast(&Vector::zeros(0)).unwrap();
        assert_eq!(f, v(&[1.0]));
        assert_eq!(cert.kind, CertificateKind::BoundaryNormal);
        assert!(cert.boundary_slack <= fc.epsilon());

        // Grid oracle: minimize max_y ⟨S(f), y − f⟩ over f ∈ [0,1].
        let mut best_f = 0.0f64;
        let mut best_slack = f64::INFINITY;
        let mut t = 0.0;
        while t <= 1.0 {
            let s = 0.5f64; // constant field
            let slack = (s * (0.0 - t)).max(s * (1.0 - t));
            if slack < best_slack {
                best_slack = slack;
                best_f = t;
            }
            t += 1e-4;
        }
        assert!((best_f - 1.0).abs() < 1e-3);
    }

    #[test]
    fn strictly_negative_field_certifies_left_endpoint() {
        // History (0.5, +0.5), (1.0, −0.9) under the 1-D Sobolev kernel:
        // S(f) = 0.25·e^{−|f−0.5|} − 0.45·e^{−|f−1|} is negative on all of
        // [0, 1], so there is no zero and the left endpoint is the answer.
        // The residual −0.9 needs y = 0.1, so use the regression protocol
        // over the same interval.
        let mut fc = K29Forecaster::new(
            Kernel::sobolev_exp(1, 0).unwrap(),
            ConvexDomain::interval(0.0, 1.0).unwrap(),
            ObservationSet::Interval { lo: 0.0, hi: 1.0 },
            SolverConfig::default(),
        )
        .unwrap();
        fc.observe(Vector::zeros(0), v(&[0.5]), v(&[1.0])).unwrap();
        fc.observe(Vector::zeros(0), v(&[1.0]), v(&[0.1])).unwrap();
        let s0 = fc.field(&v(&[0.0]), &Vector::zeros(0)).unwrap().get(0);
        assert!((s0 - (0.25 * (-0.5f64).exp() - 0.45 * (-1.0f64).exp())).abs() < 1e-12);
        let mut t = 0.0;
        while t <= 1.0 {
            assert!(fc.field(&v(&[t]), &Vector::zeros(0)).unwrap().get(0) < 0.0);
            t += 1e-3;
        }
        let (f, cert) = fc.next_forecast(&Vector::zeros(0)).unwrap();
        assert_eq!(f, v(&[0.0]));
        assert_eq!(cert.kind, CertificateKind::BoundaryNormal);
        assert!(cert.boundary_slack <= 1e-12);
    }

    #[test]
    fn bisection_finds_the_bracketed_zero() {
        // History (0.5, +0.5), (1.0, −0.4): S crosses zero at
        // f* = (ln(0.25/0.2) + 1.5) / 2 inside (0.5, 1).
        let mut fc = K29Forecaster::new(
            Kernel::sobolev_exp(1, 0).unwrap(),
            ConvexDomain::interval(0.0, 1.0).unwrap(),
            ObservationSet::Interval { lo: 0.0, hi: 1.0 },
            SolverConfig::default(),
        )
        .unwrap();
        fc.observe(Vector::zeros(0), v(&[0.5]), v(&[1.0])).unwrap();
        fc.observe(Vector::zeros(0), v(&[1.0]), v(&[0.6])).unwrap();
        let (f, cert) = fc.next_forecast(&Vector::zeros(0)).unwrap();
        assert_eq!(cert.kind, CertificateKind::Zero);
        let f_star = (0.25f64 / 0.2).ln() / 2.0 + 0.75;
        assert!((f.get(0) - f_star).abs() < 1e-6, "{} vs {f_star}", f.get(0));
        assert!(cert.field_norm <= fc.epsilon());
    }

    #[test]
    fn observe_appends_residuals() {
        let mut fc = binary_forecaster(Kernel::constant(1.0, 1, 0).unwrap());
        fc.observe(Vector::zeros(0), v(&[0.5]), v(&[1.0])).unwrap();
        let (_, r) = fc.history().next().map(|(p, r)| (p.clone(), r.clone())).unwrap();
        assert_eq!(r, v(&[0.5]));

        let protocol = ProtocolSpec::new(ProtocolVariant::MultiClass { classes: 3 }).unwrap();
        let mut fc = K29Forecaster::new(
            Kernel::constant(1.0, 3, 0).unwrap(),
            protocol.domain().clone(),
            protocol.observations().clone(),
            SolverConfig::default(),
        )
        .unwrap();
        let third = 1.0 / 3.0;
        fc.observe(Vector::zeros(0), v(&[third, third, third]), v(&[1.0, 0.0, 0.0]))
            .unwrap();
        let (_, r) = fc.history().next().map(|(p, r)| (p.clone(), r.clone())).unwrap();
        assert!(r.dist(&v(&[2.0 * third, -third, -third])) < 1e-15);
    }

    #[test]
    fn observe_rejects_foreign_observations() {
        let mut fc = binary_forecaster(Kernel::constant(1.0, 1, 0).unwrap());
        assert!(matches!(
            fc.observe(Vector::zeros(0), v(&[0.5]), v(&[0.4])),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn simplex_solver_certificate_reverifies() {
        let protocol = ProtocolSpec::new(ProtocolVariant::MultiClass { classes: 3 }).unwrap();
        let mut fc = K29Forecaster::new(
            Kernel::gaussian_rbf(1.0, 3, 0).unwrap(),
            protocol.domain().clone(),
            protocol.observations().clone(),
            SolverConfig::default(),
        )
        .unwrap();
        let third = 1.0 / 3.0;
        fc.observe(Vector::zeros(0), v(&[third, third, third]), v(&[1.0, 0.0, 0.0]))
            .unwrap();
        fc.observe(Vector::zeros(0), v(&[0.5, 0.25, 0.25]), v(&[0.0, 1.0, 0.0]))
            .unwrap();
        let (f, cert) = fc.next_forecast(&Vector::zeros(0)).unwrap();
        assert!(fc.domain().contains(&f, 1e-9));
        let s = fc.field(&f, &Vector::zeros(0)).unwrap();
        match cert.kind {
            CertificateKind::Zero => assert!(s.norm() <= fc.epsilon()),
            CertificateKind::BoundaryNormal => {
                for vert in fc.domain().vertices() {
                    assert!(s.dot(&vert.sub(&f)) <= fc.epsilon());
                }
            }
            other => panic!("unexpected certificate {other:?}"),
        }
    }

    #[test]
    fn forecasts_are_deterministic() {
        let build = || {
            let mut fc = binary_forecaster(Kernel::sobolev_exp(1, 0).unwrap());
            fc.observe(Vector::zeros(0), v(&[0.5]), v(&[1.0])).unwrap();
            fc.observe(Vector::zeros(0), v(&[0.8]), v(&[0.0])).unwrap();
            fc.next_forecast(&Vector::zeros(0)).unwrap()
        };
        let (f1, c1) = build();
        let (f2, c2) = build();
        assert_eq!(f1, f2);
        assert_eq!(c1.field_norm.to_bits(), c2.field_norm.to_bits());
        assert_eq!(c1.boundary_slack.to_bits(), c2.boundary_slack.to_bits());
    }
}
