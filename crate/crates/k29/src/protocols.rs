//! The concrete linear protocols and their encodings.
//!
//! Every protocol embeds observations into `R^m` so that Skeptic's gain is
//! the inner product `⟨s, y − f⟩`: binary labels become `{(0), (1)}`,
//! bounded regression keeps `[lo, hi]` as 1-vectors, multi-class labels
//! become vertices of the standard simplex, and mean–variance forecasting
//! uses the arc `{(t, t²)}`. The forecast domain is always the convex hull
//! of the observation set: anything outside the hull is exploitable, so
//! nothing is lost.

use serde::{Deserialize, Serialize};

use crate::geometry::{ConvexDomain, ObservationSet, Vector, MEMBERSHIP_TOL};
use crate::{Error, Result};

/// Protocol selector with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ProtocolVariant {
    /// `Y = {0, 1}`, forecasts are probabilities in `[0, 1]`.
    Binary,
    /// `Y = [lo, hi]`, forecasts are point estimates in the same interval.
    BoundedRegression { lo: f64, hi: f64 },
    /// `Y` = the `classes` vertices of the standard simplex; forecasts are
    /// probability vectors.
    MultiClass { classes: usize },
    /// `Y = {(t, t²) : t ∈ [lo, hi]}`; forecasts encode mean and second
    /// moment, reported as (mean, variance).
    MeanVariance { lo: f64, hi: f64 },
}

/// A raw observation before embedding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", content = "value")]
pub enum RawObservation {
    Bit(bool),
    Real(f64),
    /// 1-based class label.
    Label(usize),
}

/// A decoded forecast, reported in the protocol's native terms.
#[derive(Clone, Debug, PartialEq)]
pub enum DecodedForecast {
    Probability(f64),
    Distribution(Vec<f64>),
    PointEstimate(f64),
    MeanVariance { mean: f64, variance: f64 },
}

/// A protocol together with its forecast domain `co(Y)` and observation
/// set `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolSpec {
    variant: ProtocolVariant,
    domain: ConvexDomain,
    observations: ObservationSet,
}

impl ProtocolSpec {
    pub fn new(variant: ProtocolVariant) -> Result<Self> {
        let (domain, observations) = match &variant {
            ProtocolVariant::Binary => (
                ConvexDomain::interval(0.0, 1.0)?,
                ObservationSet::Finite {
                    points: vec![Vector::from_raw(vec![0.0]), Vector::from_raw(vec![1.0])],
                },
            ),
            ProtocolVariant::BoundedRegression { lo, hi } => {
                let domain = ConvexDomain::interval(*lo, *hi)?;
                let observations = domain.observation_set();
                (domain, observations)
            }
            ProtocolVariant::MultiClass { classes } => {
                if *classes < 2 {
                    return Err(Error::Validation(format!(
                        "MultiClass requires classes >= 2, got {classes}"
                    )));
                }
                let domain = ConvexDomain::simplex(*classes)?;
                let observations = domain.observation_set();
                (domain, observations)
            }
            ProtocolVariant::MeanVariance { lo, hi } => {
                let domain = ConvexDomain::parabola_hull(*lo, *hi)?;
                let observations = domain.observation_set();
                (domain, observations)
            }
        };
        Ok(Self { variant, domain, observations })
    }

    pub fn variant(&self) -> &ProtocolVariant {
        &self.variant
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn observations(&self) -> &ObservationSet {
        &self.observations
    }

    pub fn obs_dim(&self) -> usize {
        self.domain.dim()
    }

    /// Embed a raw observation into `Y ⊂ R^m`.
    pub fn encode_observation(&self, raw: &RawObservation) -> Result<Vector> {
        match (&self.variant, raw) {
            (ProtocolVariant::Binary, RawObservation::Bit(b)) => {
                Ok(Vector::from_raw(vec![if *b { 1.0 } else { 0.0 }]))
            }
            (ProtocolVariant::BoundedRegression { lo, hi }, RawObservation::Real(t)) => {
                if !t.is_finite() || *t < *lo || *t > *hi {
                    return Err(Error::Validation(format!(
                        "observation {t} outside [{lo}, {hi}]"
                    )));
                }
                Ok(Vector::from_raw(vec![*t]))
            }
            (ProtocolVariant::MultiClass { classes }, RawObservation::Label(k)) => {
                if *k < 1 || *k > *classes {
                    return Err(Error::Validation(format!(
                        "label {k} outside 1..={classes}"
                    )));
                }
                let mut coords = vec![0.0; *classes];
                coords[*k - 1] = 1.0;
                Ok(Vector::from_raw(coords))
            }
            (ProtocolVariant::MeanVariance { lo, hi }, RawObservation::Real(t)) => {
                if !t.is_finite() || *t < *lo || *t > *hi {
                    return Err(Error::Validation(format!(
                        "observation {t} outside [{lo}, {hi}]"
                    )));
                }
                Ok(Vector::from_raw(vec![*t, t * t]))
            }
            (variant, raw) => Err(Error::Validation(format!(
                "observation {raw:?} does not fit protocol {variant:?}"
            ))),
        }
    }

    /// Report an embedded forecast in the protocol's native terms. For
    /// mean–variance the second coordinate is the second moment, so the
    /// variance is `f₂ − f₁²`; hull membership makes it nonnegative up to
    /// rounding, and drift within `−1e-9` is clamped to zero.
    pub fn decode_forecast(&self, f: &Vector) -> Result<DecodedForecast> {
        let dist = self.domain.distance(f)?;
        if dist > MEMBERSHIP_TOL {
            return Err(Error::Validation(format!(
                "forecast lies {dist:.3e} outside the domain"
            )));
        }
        Ok(match &self.variant {
            ProtocolVariant::Binary => DecodedForecast::Probability(f.get(0)),
            ProtocolVariant::BoundedRegression { .. } => DecodedForecast::PointEstimate(f.get(0)),
            ProtocolVariant::MultiClass { .. } => {
                DecodedForecast::Distribution(f.coords().to_vec())
            }
            ProtocolVariant::MeanVariance { .. } => {
                let mean = f.get(0);
                let variance = f.get(1) - mean * mean;
                if variance < -1e-9 {
                    return Err(Error::Validation(format!(
                        "decoded variance {variance:.3e} is negative beyond tolerance"
                    )));
                }
                DecodedForecast::MeanVariance { mean, variance: variance.max(0.0) }
            }
        })
    }

    /// Re-embed a decoded mean–variance forecast: `(m, v) ↦ (m, v + m²)`.
    pub fn encode_mean_variance(&self, mean: f64, variance: f64) -> Result<Vector> {
        match &self.variant {
            ProtocolVariant::MeanVariance { .. } => {
                Ok(Vector::from_raw(vec![mean, variance + mean * mean]))
            }
            other => Err(Error::Validation(format!(
                "encode_mean_variance does not apply to {other:?}"
            ))),
        }
    }
}

/// Map a Skeptic move between the two mean–variance representations:
/// `(s', s'') ↦ (M, V) = (s' + 2m·s'', s'')` at forecast mean `m`. Gains
/// agree: `M(t−m) + V((t−m)² − v) = s'(t − f') + s''(t² − f'')`.
pub fn mv_skeptic_map(s: (f64, f64), m: f64) -> (f64, f64) {
    (s.0 + 2.0 * m * s.1, s.1)
}

/// The binary ↔ two-class embedding: forecast `f` becomes the distribution
/// `(1−f, f)` and a scalar Skeptic move `s` the canonical representative
/// `(0, s)`, keeping the gain identity `s'(y) − ⟨s', f'⟩ = s(y − f)`.
pub fn binary_multiclass_iso(f: f64, s: f64) -> Result<((f64, f64), (f64, f64))> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Validation(format!("forecast {f} outside [0, 1]")));
    }
    Ok(((1.0 - f, f), (0.0, s)))
}
