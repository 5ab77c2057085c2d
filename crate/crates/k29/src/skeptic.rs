//! Skeptic strategies and capital accounting.
//!
//! A strategy announces, each round, a continuous function of the upcoming
//! forecast; its capital evolves by `K_n = K_{n−1} + ⟨s_n, y_n − f_n⟩`. The
//! kernel law-of-large-numbers Skeptic plays twice the K29 field, so its
//! capital reproduces the Gram accumulator's `N_n − D_n` exactly. The
//! separation Skeptic profits from any forecast outside the convex hull of
//! the observations, which is what makes such forecasts inadmissible.

use serde::{Deserialize, Serialize};

use crate::geometry::{ConvexDomain, Vector};
use crate::kernels::{Kernel, Point};
use crate::{Error, Result};

/// Running capital record. Gains are recorded raw; the nonnegativity
/// restriction from the budgeted games is an audit flag, not an
/// enforcement, since the defensive game drops all restrictions on Skeptic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapitalLedger {
    initial: f64,
    series: Vec<f64>,
    restriction_violated_at: Option<usize>,
}

impl CapitalLedger {
    pub fn new(initial: f64) -> Self {
        Self { initial, series: Vec::new(), restriction_violated_at: None }
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    /// Capital after the last completed round.
    pub fn current(&self) -> f64 {
        *self.series.last().unwrap_or(&self.initial)
    }

    pub fn series(&self) -> &[f64] {
        &self.series
    }

    /// Round index (1-based) of the first dip below zero, if any.
    pub fn restriction_violated_at(&self) -> Option<usize> {
        self.restriction_violated_at
    }

    /// Append `K_n = K_{n−1} + ⟨s, y − f⟩` and return the gain.
    pub fn update(&mut self, s: &Vector, f: &Vector, y: &Vector) -> Result<f64> {
        if s.dim() != f.dim() || f.dim() != y.dim() {
            return Err(Error::DimensionMismatch { expected: f.dim(), got: s.dim() });
        }
        let gain = s.dot(&y.sub(f));
        let next = self.current() + gain;
        self.series.push(next);
        if next < 0.0 && self.restriction_violated_at.is_none() {
            self.restriction_violated_at = Some(self.series.len());
        }
        Ok(gain)
    }
}

/// The kernel WLLN Skeptic: mirrors the game history and plays twice the
/// K29 field at the announced forecast.
#[derive(Clone, Debug)]
pub struct WllnSkeptic {
    kernel: Kernel,
    history: Vec<(Point, Vector)>,
}

impl WllnSkeptic {
    pub fn new(kernel: Kernel) -> Self {
        Self { kernel, history: Vec::new() }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// `s_n = 2 Σ_{i<n} K((f_i,x_i), (f_n,x_n)) (y_i − f_i)`.
    pub fn wlln_move(&self, x: &Vector, f: &Vector) -> Result<Vector> {
        if f.dim() != self.kernel.forecast_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kernel.forecast_dim(),
                got: f.dim(),
            });
        }
        if x.dim() != self.kernel.datum_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kernel.datum_dim(),
                got: x.dim(),
            });
        }
        let mut out = Vector::zeros(f.dim());
        for (p, r) in &self.history {
            let w = self.kernel.eval_unchecked(
                p.forecast.coords(),
                p.datum.coords(),
                f.coords(),
                x.coords(),
            );
            out = out.axpy(w, r);
        }
        Ok(out.scale(2.0))
    }

    /// Record a completed round in the mirror.
    pub fn note_round(&mut self, x: Vector, f: Vector, y: Vector) {
        let residual = y.sub(&f);
        self.history.push((Point::new(f, x), residual));
    }

    pub fn rounds(&self) -> usize {
        self.history.len()
    }
}

/// Separating move against a forecast outside the domain: with `σ` the
/// nearest point of the hull, `s = C·(σ(f) − f)` guarantees
/// `⟨s, y − f⟩ ≥ C·d²` for every `y` in the domain, `d` the distance of the
/// forecast from the hull. Errors when the forecast is inside.
pub fn exploit_move(domain: &ConvexDomain, f_outside: &Vector, scale: f64) -> Result<Vector> {
    let projection = domain.project(f_outside)?;
    let gap = projection.sub(f_outside);
    if gap.norm() <= 1e-12 {
        return Err(Error::NoSeparation);
    }
    Ok(gap.scale(scale))
}

/// The weak-law tail bound `diam(Y) · C_Φ · (N·δ)^{−1/2}`: with lower
/// probability at least `1 − δ`, the averaged residual tensor stays below
/// it after `N` rounds.
pub fn bernoulli_bound(n: u64, delta: f64, diam: f64, c_phi: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Validation("bound requires N >= 1".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Validation(format!("delta must lie in (0, 1], got {delta}")));
    }
    Ok(diam * c_phi / (n as f64 * delta).sqrt())
}

/// Strategy selector used by the game engine.
#[derive(Clone, Debug)]
pub enum SkepticStrategy {
    /// Kernel WLLN Skeptic (the one K29 defends against).
    Wlln(WllnSkeptic),
    /// Separation exploit with the given capital multiplier; plays zero
    /// against in-hull forecasts.
    Exploit { scale: f64 },
    /// Never bets.
    Null,
}

impl SkepticStrategy {
    /// The move `s_n` for the current round, as a function of the
    /// forecast (evaluated after Forecaster announces it).
    pub fn move_at(
        &self,
        domain: &ConvexDomain,
        x: &Vector,
        f: &Vector,
    ) -> Result<Vector> {
        match self {
            SkepticStrategy::Wlln(w) => w.wlln_move(x, f),
            SkepticStrategy::Exploit { scale } => match exploit_move(domain, f, *scale) {
                Ok(s) => Ok(s),
                Err(Error::NoSeparation) => Ok(Vector::zeros(f.dim())),
                Err(e) => Err(e),
            },
            SkepticStrategy::Null => Ok(Vector::zeros(f.dim())),
        }
    }

    pub fn note_round(&mut self, x: Vector, f: Vector, y: Vector) {
        if let SkepticStrategy::Wlln(w) = self {
            w.note_round(x, f, y);
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SkepticStrategy::Wlln(_) => "wlln".into(),
            SkepticStrategy::Exploit { scale } => format!("exploit(scale={scale})"),
            SkepticStrategy::Null => "null".into(),
        }
    }
}
