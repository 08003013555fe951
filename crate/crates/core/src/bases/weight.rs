//! Logarithmic weight for the gravity-Helmholtz Green's function on the
//! semicircle `gamma(s) = (cos 2 pi s, sin 2 pi s)`, `s in [0, 1/2]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub fn semicircle(s: f64) -> [f64; 2] {
    [(2.0 * PI * s).cos(), (2.0 * PI * s).sin()]
}

pub fn chord(s_x: f64, s_y: f64) -> f64 {
    let a = semicircle(s_x);
    let b = semicircle(s_y);
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// `1 / log(d / scale)`; errors where the logarithm vanishes or diverges.
pub fn weight_from_distance(d: f64, scale: f64) -> Result<f64> {
    let l = (d / scale).ln();
    if d == 0.0 || !l.is_finite() {
        return Err(Error::SingularPoint {
            point: vec![d],
            reason: "logarithmic singularity at zero distance".into(),
        });
    }
    if l.abs() <= 4.0 * f64::EPSILON {
        return Err(Error::SingularPoint {
            point: vec![d],
            reason: "log of unit distance is zero, weight divides by zero".into(),
        });
    }
    Ok(1.0 / l)
}

/// `w(s_x, s_y) = 1 / log |gamma(s_x) - gamma(s_y)|`.
pub fn greens_weight(s_x: f64, s_y: f64) -> Result<f64> {
    scaled_greens_weight(s_x, s_y, 1.0)
}

/// `1 / log(|gamma(s_x) - gamma(s_y)| / scale)`.
///
/// With `scale > 2` the logarithm stays negative on the whole parameter
/// square, so the weight is bounded away from the diagonal.
pub fn scaled_greens_weight(s_x: f64, s_y: f64, scale: f64) -> Result<f64> {
    if s_x == s_y {
        return Err(Error::SingularPoint {
            point: vec![s_x, s_y],
            reason: "diagonal s_x = s_y".into(),
        });
    }
    weight_from_distance(chord(s_x, s_y), scale).map_err(|e| match e {
        Error::SingularPoint { reason, .. } => Error::SingularPoint {
            point: vec![s_x, s_y],
            reason,
        },
        other => other,
    })
}

/// Weight functions available for weighted enrichment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// [`greens_weight`].
    Greens,
    /// [`scaled_greens_weight`] with the given length scale.
    ScaledGreens { scale: f64 },
}

impl Weight {
    pub fn eval(&self, s_x: f64, s_y: f64) -> Result<f64> {
        match *self {
            Weight::Greens => greens_weight(s_x, s_y),
            Weight::ScaledGreens { scale } => scaled_greens_weight(s_x, s_y, scale),
        }
    }
}
