//! Finite-dimensional Hilbert-space primitives.
//!
//! The ambient space is `R^m` with the standard dot product. A
//! [`ConvexDomain`] is the Forecaster's move space `F = co(Y)`; the module
//! provides the nearest-point projection onto it, its support function, a
//! canonical interior point, and the diameter of the underlying observation
//! set `Y`. The projection satisfies the variational inequality
//! `⟨p − σ(p), y − σ(p)⟩ ≤ 0` for every `y` in the domain, which is what the
//! exterior-normal certificates and the separation exploit rest on.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point of `R^m`. Coordinates are finite by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector {
    coords: Vec<f64>,
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("vector coordinates must be finite".into()));
        }
        Ok(Self { coords })
    }

    /// Construct without the finiteness check; used internally where the
    /// inputs are already validated arithmetic on finite values.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(vec![value])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector::from_raw(
            self.coords
                .iter()
                .zip(other.coords.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector::from_raw(
            self.coords
                .iter()
                .zip(other.coords.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector::from_raw(self.coords.iter().map(|c| c * factor).collect())
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector::from_raw(
            self.coords
                .iter()
                .zip(other.coords.iter())
                .map(|(a, b)| a + factor * b)
                .collect(),
        )
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.sub(other).norm()
    }

    /// Strict lexicographic order, used for deterministic tie-breaking.
    pub fn lex_lt(&self, other: &Vector) -> bool {
        for (a, b) in self.coords.iter().zip(other.coords.iter()) {
            if a < b {
                return true;
            }
            if a > b {
                return false;
            }
        }
        false
    }

    fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch { expected, got: self.dim() });
        }
        Ok(())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(coords: Vec<f64>) -> Self {
        Vector::new(coords).expect("finite coordinates")
    }
}

/// The observation space `Y` underlying a protocol. The forecast domain is
/// always its convex hull, but Reality's moves and the diameter in the √n
/// bounds refer to `Y` itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservationSet {
    /// A finite list of points (binary labels, class vertices, hull vertices).
    Finite { points: Vec<Vector> },
    /// The full interval `[lo, hi]`, embedded as 1-vectors.
    Interval { lo: f64, hi: f64 },
    /// A full box, one interval per coordinate.
    Box { bounds: Vec<(f64, f64)> },
    /// The parabola arc `{(t, t²) : t ∈ [lo, hi]}`.
    Arc { lo: f64, hi: f64 },
}

impl ObservationSet {
    pub fn dim(&self) -> usize {
        match self {
            ObservationSet::Finite { points } => points.first().map_or(0, Vector::dim),
            ObservationSet::Interval { .. } => 1,
            ObservationSet::Box { bounds } => bounds.len(),
            ObservationSet::Arc { .. } => 2,
        }
    }

    pub fn contains(&self, y: &Vector, tol: f64) -> bool {
        if y.dim() != self.dim() {
            return false;
        }
        match self {
            ObservationSet::Finite { points } => {
                points.iter().any(|p| p.dist(y) <= tol)
            }
            ObservationSet::Interval { lo, hi } => {
                y.get(0) >= lo - tol && y.get(0) <= hi + tol
            }
            ObservationSet::Box { bounds } => bounds
                .iter()
                .enumerate()
                .all(|(i, (lo, hi))| y.get(i) >= lo - tol && y.get(i) <= hi + tol),
            ObservationSet::Arc { lo, hi } => {
                let t = y.get(0);
                t >= lo - tol && t <= hi + tol && (y.get(1) - t * t).abs() <= tol
            }
        }
    }

    /// `diam(Y) = sup ‖y − y'‖` over the observation set, computed exactly.
    pub fn diameter(&self) -> f64 {
        match self {
            ObservationSet::Finite { points } => {
                let mut best = 0.0f64;
                for (i, a) in points.iter().enumerate() {
                    for b in points.iter().skip(i + 1) {
                        best = best.max(a.dist(b));
                    }
                }
                best
            }
            ObservationSet::Interval { lo, hi } => hi - lo,
            ObservationSet::Box { bounds } => bounds
                .iter()
                .map(|(lo, hi)| (hi - lo) * (hi - lo))
                .sum::<f64>()
                .sqrt(),
            ObservationSet::Arc { lo, hi } => arc_diameter(*lo, *hi),
        }
    }

    /// Candidate observations for adversarial maximization. Finite sets are
    /// enumerated, intervals and boxes contribute their extreme points
    /// (sufficient for the linear/convex objectives the adversaries use),
    /// and the arc is sampled at `arc_step`.
    pub fn candidates(&self, arc_step: f64) -> Vec<Vector> {
        match self {
            ObservationSet::Finite { points } => points.clone(),
            ObservationSet::Interval { lo, hi } => {
                vec![Vector::from_raw(vec![*lo]), Vector::from_raw(vec![*hi])]
            }
            ObservationSet::Box { bounds } => box_corners(bounds),
            ObservationSet::Arc { lo, hi } => {
                let mut out = Vec::new();
                let mut t = *lo;
                while t < *hi {
                    out.push(Vector::from_raw(vec![t, t * t]));
                    t += arc_step;
                }
                out.push(Vector::from_raw(vec![*hi, hi * hi]));
                out
            }
        }
    }
}

/// Diameter of the arc `{(t, t²) : t ∈ [lo, hi]}`.
///
/// The squared distance `D(s,t) = (t−s)² + (t²−s²)²` has no stationary pair
/// with both coordinates interior (the stationarity conditions force
/// `t + s = 0` and then contradict each other), so one endpoint of a
/// diameter is an arc endpoint. For fixed endpoint `e` the inner critical
/// points solve `2t² + 2et + 1 = 0`.
fn arc_diameter(lo: f64, hi: f64) -> f64 {
    let dist_sq = |s: f64, t: f64| {
        let da = t - s;
        let db = t * t - s * s;
        da * da + db * db
    };
    let mut best = dist_sq(lo, hi);
    for e in [lo, hi] {
        let disc = e * e - 2.0;
        if disc >= 0.0 {
            let r = disc.sqrt();
            for t in [(-e + r) / 2.0, (-e - r) / 2.0] {
                if t >= lo && t <= hi {
                    best = best.max(dist_sq(e, t));
                }
            }
        }
    }
    best.sqrt()
}

fn box_corners(bounds: &[(f64, f64)]) -> Vec<Vector> {
    let d = bounds.len();
    if d == 0 {
        return vec![Vector::zeros(0)];
    }
    // Full enumeration only for small boxes; beyond that the two extreme
    // corners are enough for the callers (probe points, adversary seeds).
    if d > 12 {
        let lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
        let hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
        return vec![Vector::from_raw(lo), Vector::from_raw(hi)];
    }
    (0..(1usize << d))
        .map(|mask| {
            Vector::from_raw(
                bounds
                    .iter()
                    .enumerate()
                    .map(|(i, (lo, hi))| if mask >> i & 1 == 0 { *lo } else { *hi })
                    .collect(),
            )
        })
        .collect()
}

/// A convex forecast domain `F = co(Y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexDomain {
    /// `[lo, hi] ⊂ R`.
    Interval { lo: f64, hi: f64 },
    /// A product of intervals.
    Box { bounds: Vec<(f64, f64)> },
    /// The standard probability simplex `{p ∈ R^m : p_i ≥ 0, Σ p_i = 1}`.
    Simplex { m: usize },
    /// `co{(t, t²) : t ∈ [lo, hi]}`: bounded below by the arc and above by
    /// the chord through its endpoints.
    ParabolaHull { lo: f64, hi: f64 },
    /// Convex hull of an explicit vertex list.
    FiniteHull { vertices: Vec<Vector> },
}

/// Tolerance under which a point counts as a member of a domain: its
/// projection distance must not exceed this.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

impl ConvexDomain {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Invalid(format!(
                "interval requires finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(ConvexDomain::Interval { lo, hi })
    }

    pub fn boxed(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Invalid("box requires at least one interval".into()));
        }
        for (lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Invalid(format!(
                    "box interval requires finite lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(ConvexDomain::Box { bounds })
    }

    pub fn simplex(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Invalid("simplex dimension must be positive".into()));
        }
        Ok(ConvexDomain::Simplex { m })
    }

    pub fn parabola_hull(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Invalid(format!(
                "parabola hull requires finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(ConvexDomain::ParabolaHull { lo, hi })
    }

    pub fn finite_hull(vertices: Vec<Vector>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::Invalid("finite hull requires at least one vertex".into()));
        };
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::Invalid("finite hull vertices must have positive dim".into()));
        }
        if vertices.iter().any(|v| v.dim() != dim) {
            return Err(Error::Invalid("finite hull vertices must share one dim".into()));
        }
        Ok(ConvexDomain::FiniteHull { vertices })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexDomain::Interval { .. } => 1,
            ConvexDomain::Box { bounds } => bounds.len(),
            ConvexDomain::Simplex { m } => *m,
            ConvexDomain::ParabolaHull { .. } => 2,
            ConvexDomain::FiniteHull { vertices } => vertices[0].dim(),
        }
    }

    /// Nearest-point projection `σ(p)` onto the domain.
    pub fn project(&self, p: &Vector) -> Result<Vector> {
        p.check_dim(self.dim())?;
        Ok(match self {
            ConvexDomain::Interval { lo, hi } => {
                Vector::from_raw(vec![p.get(0).clamp(*lo, *hi)])
            }
            ConvexDomain::Box { bounds } => Vector::from_raw(
                bounds
                    .iter()
                    .enumerate()
                    .map(|(i, (lo, hi))| p.get(i).clamp(*lo, *hi))
                    .collect(),
            ),
            ConvexDomain::Simplex { .. } => project_simplex(p.coords()),
            ConvexDomain::ParabolaHull { lo, hi } => project_parabola_hull(*lo, *hi, p),
            ConvexDomain::FiniteHull { vertices } => project_finite_hull(vertices, p),
        })
    }

    /// Distance from `p` to the domain.
    pub fn distance(&self, p: &Vector) -> Result<f64> {
        Ok(self.project(p)?.dist(p))
    }

    /// Membership within [`MEMBERSHIP_TOL`].
    pub fn contains(&self, p: &Vector, tol: f64) -> bool {
        p.dim() == self.dim() && self.distance(p).map(|d| d <= tol).unwrap_or(false)
    }

    /// Maximizer of `⟨direction, ·⟩` over the domain together with the
    /// attained value. Ties return the lexicographically smallest maximizer.
    pub fn support_max(&self, direction: &Vector) -> Result<(Vector, f64)> {
        direction.check_dim(self.dim())?;
        Ok(match self {
            ConvexDomain::Interval { lo, hi } => {
                let d = direction.get(0);
                let t = if d > 0.0 { *hi } else { *lo };
                (Vector::from_raw(vec![t]), d * t)
            }
            ConvexDomain::Box { bounds } => {
                let point: Vec<f64> = bounds
                    .iter()
                    .enumerate()
                    .map(|(i, (lo, hi))| if direction.get(i) > 0.0 { *hi } else { *lo })
                    .collect();
                let v = point
                    .iter()
                    .zip(direction.coords())
                    .map(|(p, d)| p * d)
                    .sum();
                (Vector::from_raw(point), v)
            }
            ConvexDomain::Simplex { m } => {
                // Later basis vectors are lexicographically smaller, so keep
                // the last maximizer.
                let mut best_j = 0;
                let mut best_v = direction.get(0);
                for j in 1..*m {
                    if direction.get(j) >= best_v {
                        best_v = direction.get(j);
                        best_j = j;
                    }
                }
                let mut point = vec![0.0; *m];
                point[best_j] = 1.0;
                (Vector::from_raw(point), best_v)
            }
            ConvexDomain::ParabolaHull { lo, hi } => {
                let (d1, d2) = (direction.get(0), direction.get(1));
                let value_at = |t: f64| d1 * t + d2 * t * t;
                let mut cands = vec![*lo, *hi];
                if d2 < 0.0 {
                    let t = -d1 / (2.0 * d2);
                    if t > *lo && t < *hi {
                        cands.push(t);
                    }
                }
                let mut best_t = cands[0];
                let mut best_v = value_at(best_t);
                for &t in &cands[1..] {
                    let v = value_at(t);
                    if v > best_v || (v == best_v && t < best_t) {
                        best_v = v;
                        best_t = t;
                    }
                }
                (Vector::from_raw(vec![best_t, best_t * best_t]), best_v)
            }
            ConvexDomain::FiniteHull { vertices } => {
                let mut best = &vertices[0];
                let mut best_v = direction.dot(best);
                for v in &vertices[1..] {
                    let val = direction.dot(v);
                    if val > best_v || (val == best_v && v.lex_lt(best)) {
                        best_v = val;
                        best = v;
                    }
                }
                (best.clone(), best_v)
            }
        })
    }

    /// True iff `sup_{y ∈ F} ⟨s, y − f⟩ ≤ tol`, i.e. `s` is an exterior
    /// normal at `f` up to `tol`. Requires `f` to lie in the domain (within
    /// `tol` plus the membership tolerance).
    pub fn is_normal_exterior(&self, f: &Vector, s: &Vector, tol: f64) -> Result<bool> {
        let dist = self.distance(f)?;
        if dist > tol + MEMBERSHIP_TOL {
            return Err(Error::Contract(format!(
                "point is {dist:.3e} away from the domain, beyond tolerance {tol:.3e}"
            )));
        }
        s.check_dim(self.dim())?;
        let (_, sup) = self.support_max(s)?;
        Ok(sup - s.dot(f) <= tol)
    }

    /// A canonical point of the domain, used as the default forecast when
    /// the Skeptic field vanishes identically.
    pub fn barycenter(&self) -> Vector {
        match self {
            ConvexDomain::Interval { lo, hi } => Vector::from_raw(vec![0.5 * (lo + hi)]),
            ConvexDomain::Box { bounds } => Vector::from_raw(
                bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect(),
            ),
            ConvexDomain::Simplex { m } => {
                Vector::from_raw(vec![1.0 / *m as f64; *m])
            }
            ConvexDomain::ParabolaHull { lo, hi } => {
                // Midway between the arc and the chord at the mid-abscissa;
                // interior whenever lo < hi.
                let mid = 0.5 * (lo + hi);
                let chord = (lo + hi) * mid - lo * hi;
                Vector::from_raw(vec![mid, 0.5 * (mid * mid + chord)])
            }
            ConvexDomain::FiniteHull { vertices } => {
                let mut sum = Vector::zeros(vertices[0].dim());
                for v in vertices {
                    sum = sum.add(v);
                }
                sum.scale(1.0 / vertices.len() as f64)
            }
        }
    }

    /// The observation set `Y` canonically underlying this domain
    /// (`F = co(Y)`). Protocols may substitute a finer `Y` with the same
    /// hull, e.g. `{0, 1}` instead of `[0, 1]` for binary forecasting.
    pub fn observation_set(&self) -> ObservationSet {
        match self {
            ConvexDomain::Interval { lo, hi } => ObservationSet::Interval { lo: *lo, hi: *hi },
            ConvexDomain::Box { bounds } => ObservationSet::Box { bounds: bounds.clone() },
            ConvexDomain::Simplex { m } => ObservationSet::Finite {
                points: (0..*m)
                    .map(|j| {
                        let mut v = vec![0.0; *m];
                        v[j] = 1.0;
                        Vector::from_raw(v)
                    })
                    .collect(),
            },
            ConvexDomain::ParabolaHull { lo, hi } => ObservationSet::Arc { lo: *lo, hi: *hi },
            ConvexDomain::FiniteHull { vertices } => {
                ObservationSet::Finite { points: vertices.clone() }
            }
        }
    }

    /// `diam(Y)` for the observation set underlying the domain.
    pub fn diameter(&self) -> f64 {
        self.observation_set().diameter()
    }

    /// Extreme points used as solver probes and restart seeds.
    pub fn vertices(&self) -> Vec<Vector> {
        match self {
            ConvexDomain::Interval { lo, hi } => {
                vec![Vector::from_raw(vec![*lo]), Vector::from_raw(vec![*hi])]
            }
            ConvexDomain::Box { bounds } => box_corners(bounds),
            ConvexDomain::Simplex { m } => (0..*m)
                .map(|j| {
                    let mut v = vec![0.0; *m];
                    v[j] = 1.0;
                    Vector::from_raw(v)
                })
                .collect(),
            ConvexDomain::ParabolaHull { lo, hi } => vec![
                Vector::from_raw(vec![*lo, lo * lo]),
                Vector::from_raw(vec![*hi, hi * hi]),
            ],
            ConvexDomain::FiniteHull { vertices } => vertices.clone(),
        }
    }

    /// Axis-aligned bounding box of the domain.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        match self {
            ConvexDomain::Interval { lo, hi } => vec![(*lo, *hi)],
            ConvexDomain::Box { bounds } => bounds.clone(),
            ConvexDomain::Simplex { m } => vec![(0.0, 1.0); *m],
            ConvexDomain::ParabolaHull { lo, hi } => {
                let b_lo = if lo * hi < 0.0 { 0.0 } else { (lo * lo).min(hi * hi) };
                vec![(*lo, *hi), (b_lo, (lo * lo).max(hi * hi))]
            }
            ConvexDomain::FiniteHull { vertices } => {
                let d = vertices[0].dim();
                (0..d)
                    .map(|i| {
                        let mut lo = f64::INFINITY;
                        let mut hi = f64::NEG_INFINITY;
                        for v in vertices {
                            lo = lo.min(v.get(i));
                            hi = hi.max(v.get(i));
                        }
                        (lo, hi)
                    })
                    .collect()
            }
        }
    }

    /// `sup ‖z‖²` over the domain, attained at an extreme point.
    pub fn max_norm_sq(&self) -> f64 {
        match self {
            ConvexDomain::Interval { lo, hi } => (lo * lo).max(hi * hi),
            ConvexDomain::Box { bounds } => bounds
                .iter()
                .map(|(lo, hi)| (lo * lo).max(hi * hi))
                .sum(),
            ConvexDomain::Simplex { .. } => 1.0,
            ConvexDomain::ParabolaHull { lo, hi } => {
                let f = |t: f64| t * t + t * t * t * t;
                f(*lo).max(f(*hi))
            }
            ConvexDomain::FiniteHull { vertices } => vertices
                .iter()
                .map(Vector::norm_sq)
                .fold(0.0, f64::max),
        }
    }
}

/// Exact Euclidean projection onto the standard simplex via the sort-based
/// threshold rule: with `u` sorted in decreasing order, the threshold is
/// `θ = (Σ_{i≤ρ} u_i − 1)/ρ` for the largest feasible `ρ`.
fn project_simplex(p: &[f64]) -> Vector {
    let mut sorted = p.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite coordinates"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    Vector::from_raw(p.iter().map(|&x| (x - theta).max(0.0)).collect())
}

/// Projection onto `co{(t, t²) : t ∈ [lo, hi]}`. Interior points are fixed;
/// outside points project onto the boundary, which splits into the arc and
/// the chord segment, each handled by an exact 1-D minimization.
fn project_parabola_hull(lo: f64, hi: f64, p: &Vector) -> Vector {
    let (pa, pb) = (p.get(0), p.get(1));
    let chord_at = |a: f64| (lo + hi) * a - lo * hi;
    if pa >= lo && pa <= hi && pb >= pa * pa && pb <= chord_at(pa) {
        return p.clone();
    }

    let arc_t = nearest_arc_parameter(lo, hi, pa, pb);
    let arc_point = Vector::from_raw(vec![arc_t, arc_t * arc_t]);

    let p0 = [lo, lo * lo];
    let p1 = [hi, hi * hi];
    let seg = [p1[0] - p0[0], p1[1] - p0[1]];
    let seg_len_sq = seg[0] * seg[0] + seg[1] * seg[1];
    let theta = (((pa - p0[0]) * seg[0] + (pb - p0[1]) * seg[1]) / seg_len_sq).clamp(0.0, 1.0);
    let chord_point = Vector::from_raw(vec![p0[0] + theta * seg[0], p0[1] + theta * seg[1]]);

    if p.dist(&arc_point) <= p.dist(&chord_point) {
        arc_point
    } else {
        chord_point
    }
}

/// Parameter of the point of the arc `{(t, t²)}` nearest to `(pa, pb)`,
/// found by bracketing the critical cubic `g'(t) = 4t³ + (2−4pb)t − 2pa` on
/// a coarse grid and polishing each bracket with safeguarded Newton.
fn nearest_arc_parameter(lo: f64, hi: f64, pa: f64, pb: f64) -> f64 {
    let dist_sq = |t: f64| {
        let da = t - pa;
        let db = t * t - pb;
        da * da + db * db
    };
    let deriv = |t: f64| 4.0 * t * t * t + (2.0 - 4.0 * pb) * t - 2.0 * pa;
    let deriv2 = |t: f64| 12.0 * t * t + 2.0 - 4.0 * pb;

    let mut candidates = vec![lo, hi];
    const CELLS: usize = 64;
    let step = (hi - lo) / CELLS as f64;
    let mut a = lo;
    let mut fa = deriv(a);
    for i in 1..=CELLS {
        let b = if i == CELLS { hi } else { lo + i as f64 * step };
        let fb = deriv(b);
        if fa == 0.0 {
            candidates.push(a);
        } else if fa * fb < 0.0 {
            candidates.push(refine_root(&deriv, &deriv2, a, b, 1e-13));
        }
        a = b;
        fa = fb;
    }

    let mut best = candidates[0];
    let mut best_d = dist_sq(best);
    for &t in &candidates[1..] {
        let d = dist_sq(t);
        if d < best_d || (d == best_d && t < best) {
            best_d = d;
            best = t;
        }
    }
    best
}

/// Safeguarded Newton: keeps the bisection bracket `[a, b]` and falls back
/// to its midpoint whenever the Newton step leaves the bracket.
fn refine_root(
    f: &impl Fn(f64) -> f64,
    df: &impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> f64 {
    let mut fa = f(a);
    let mut t = 0.5 * (a + b);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let ft = f(t);
        if ft == 0.0 {
            return t;
        }
        if fa * ft < 0.0 {
            b = t;
        } else {
            a = t;
            fa = ft;
        }
        let d = df(t);
        let newton = if d != 0.0 { t - ft / d } else { f64::NAN };
        t = if newton.is_finite() && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
    }
    t
}

/// Projection onto the convex hull of an explicit vertex list via the
/// min-norm-point method: translate so the query is the origin, walk
/// corrals of affinely independent vertices, and stop when the current
/// point satisfies the optimality inequality against every vertex.
fn project_finite_hull(vertices: &[Vector], p: &Vector) -> Vector {
    if vertices.len() == 1 {
        return vertices[0].clone();
    }
    let shifted: Vec<Vector> = vertices.iter().map(|v| v.sub(p)).collect();
    let scale = shifted.iter().map(Vector::norm_sq).fold(0.0, f64::max).max(1.0);
    let tol = 1e-14 * scale;

    // Start from the minimum-norm vertex (lex tie-break).
    let mut start = 0;
    for (i, w) in shifted.iter().enumerate().skip(1) {
        let (cur, best) = (w.norm_sq(), shifted[start].norm_sq());
        if cur < best || (cur == best && w.lex_lt(&shifted[start])) {
            start = i;
        }
    }
    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = shifted[start].clone();

    let max_major = 4 * vertices.len() + 64;
    for _ in 0..max_major {
        // Optimality: ⟨x, w_j⟩ ≥ ‖x‖² − tol for every vertex.
        let x_norm_sq = x.norm_sq();
        let mut entering = None;
        let mut entering_val = x_norm_sq - tol;
        for (j, w) in shifted.iter().enumerate() {
            let v = x.dot(w);
            if v < entering_val {
                entering_val = v;
                entering = Some(j);
            }
        }
        let Some(j) = entering else { break };
        if corral.contains(&j) {
            break;
        }
        corral.push(j);
        weights.push(0.0);

        // Minor cycles: move toward the affine minimizer, dropping vertices
        // whose weight would turn negative.
        for _ in 0..corral.len() + vertices.len() + 8 {
            let Some(alpha) = affine_minimizer(&shifted, &corral) else {
                break;
            };
            if alpha.iter().all(|&a| a > 1e-12) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (&w_old, &w_new) in weights.iter().zip(alpha.iter()) {
                if w_new <= 1e-12 && w_old > w_new {
                    theta = theta.min(w_old / (w_old - w_new));
                }
            }
            weights = weights
                .iter()
                .zip(alpha.iter())
                .map(|(&o, &n)| (1.0 - theta) * o + theta * n)
                .collect();
            let keep: Vec<usize> = (0..corral.len())
                .filter(|&i| weights[i] > 1e-12)
                .collect();
            if keep.len() == corral.len() {
                // No coordinate hit zero; accept to avoid cycling.
                break;
            }
            corral = keep.iter().map(|&i| corral[i]).collect();
            weights = keep.iter().map(|&i| weights[i]).collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
        }
        let mut next = Vector::zeros(p.dim());
        for (&i, &w) in corral.iter().zip(weights.iter()) {
            next = next.axpy(w, &shifted[i]);
        }
        x = next;
    }
    x.add(p)
}

/// Minimizer of `‖Σ α_i w_i‖` subject to `Σ α_i = 1` over the given corral,
/// via the KKT system on the Gram matrix.
fn affine_minimizer(shifted: &[Vector], corral: &[usize]) -> Option<Vec<f64>> {
    let k = corral.len();
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    let mut b = vec![0.0; k + 1];
    for (r, &i) in corral.iter().enumerate() {
        for (c, &j) in corral.iter().enumerate() {
            a[r][c] = shifted[i].dot(&shifted[j]);
        }
        a[r][k] = 1.0;
        a[k][r] = 1.0;
    }
    b[k] = 1.0;
    let sol = solve_linear(&mut a, &mut b)?;
    Some(sol[..k].to_vec())
}

/// Gaussian elimination with partial pivoting. Returns `None` on a
/// (numerically) singular system.
#[allow(clippy::needless_range_loop)]
pub(crate) fn solve_linear(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[row][c] -= factor * a[col][c];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in row + 1..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}
