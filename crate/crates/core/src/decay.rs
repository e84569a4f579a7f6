//! Exponential envelopes `m(x) <= K exp(-nu x)` and their certification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values at or below this are treated as numerically zero by the fits.
pub const FIT_FLOOR: f64 = 1e-14;

/// Rate reported for data that vanishes beyond the smallest distance.
pub const SUPEREXPONENTIAL: f64 = f64::INFINITY;

/// Certified exponential envelope. For a matrix this is `[K, nu]` decay over
/// Manhattan distance; for a local decomposition it is `(J, mu)` decay over
/// cube size.
///
/// With a superexponential rate the `amplitude` bounds the smallest populated
/// distance and everything beyond it is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    #[serde(rename = "K")]
    pub amplitude: f64,
    #[serde(rename = "nu", with = "rate_json")]
    pub rate: f64,
    pub residual: f64,
    /// Distance at which the envelope is anchored for the superexponential case.
    #[serde(skip)]
    pub origin: f64,
}

impl DecayProfile {
    pub fn is_superexponential(&self) -> bool {
        self.rate.is_infinite()
    }

    /// Envelope value at distance `x`.
    pub fn bound(&self, x: f64) -> f64 {
        if self.is_superexponential() {
            if x <= self.origin {
                self.amplitude
            } else {
                0.0
            }
        } else {
            self.amplitude * (-self.rate * x).exp()
        }
    }
}

mod rate_json {
    use serde::{Deserialize, Deserializer, Serializer};

    const TAG: &str = "superexponential";

    pub fn serialize<S: Serializer>(rate: &f64, s: S) -> Result<S::Ok, S::Error> {
        if rate.is_infinite() {
            s.serialize_str(TAG)
        } else {
            s.serialize_f64(*rate)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Tag(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(x),
            Raw::Tag(t) if t == TAG => Ok(f64::INFINITY),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("unknown rate `{t}`"))),
        }
    }
}

/// Fit `log m(x) = log K - nu x` by least squares over points with
/// `m(x) > FIT_FLOOR`, then inflate `K` so the envelope holds at every point.
///
/// `points` must be sorted by `x`. If only the smallest `x` carries weight the
/// profile is superexponential; otherwise fewer than three usable points is a
/// fit error.
pub fn fit_envelope(points: &[(f64, f64)]) -> Result<DecayProfile> {
    let Some(&(origin, first)) = points.first() else {
        return Err(Error::Fit { usable: 0 });
    };
    if points[1..].iter().all(|&(_, m)| m <= FIT_FLOOR) && first > FIT_FLOOR {
        return Ok(DecayProfile { amplitude: first, rate: SUPEREXPONENTIAL, residual: 0.0, origin });
    }
    let usable: Vec<(f64, f64)> = points.iter().filter(|&&(_, m)| m > FIT_FLOOR).map(|&(x, m)| (x, m.ln())).collect();
    if usable.len() < 3 {
        return Err(Error::Fit { usable: usable.len() });
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (usable.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let rate = -slope;
    Ok(DecayProfile { amplitude: inflate(points, rate), rate, residual, origin })
}

/// Smallest `K` such that `m(x) <= K exp(-rate x)` at every point.
pub fn inflate(points: &[(f64, f64)], rate: f64) -> f64 {
    points.iter().filter(|p| p.1 > 0.0).map(|&(x, m)| m * (rate * x).exp()).fold(0.0, f64::max)
}

/// Envelope at a prescribed rate, with `K` inflated to hold pointwise.
pub fn envelope_with_rate(points: &[(f64, f64)], rate: f64) -> DecayProfile {
    DecayProfile { amplitude: inflate(points, rate), rate, residual: 0.0, origin: points.first().map_or(0.0, |p| p.0) }
}
