//! Corner singular functions for the Dirichlet Laplacian at `(-1, -1)`.
//!
//! In corner coordinates `X = x + 1`, `Y = y + 1`, `r = |(X, Y)|`,
//! `sin 2 theta = 2XY / r^2`, each term is
//!
//! ```text
//! psi = R(r) sin(2 theta) h(x, y),   h = (1 - x)(1 - y) / 4
//! ```
//!
//! `sin 2 theta` vanishes on the edges through the corner and `h` on the
//! other two, so `psi` satisfies homogeneous Dirichlet conditions. `h` is
//! harmonic, hence `lap psi = h lap g + 2 grad g . grad h` with
//! `g = R sin 2 theta` and `lap g = (R'' + R'/r - 4R/r^2) sin 2 theta`.

use serde::{Deserialize, Serialize};

/// Radial profile of a corner term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SingularTerm {
    /// `R = r^alpha`.
    CornerPower { alpha: f64 },
    /// `R = r^2 log r`.
    CornerLog,
}

/// Value, gradient and Laplacian at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub laplacian: f64,
}

impl SingularTerm {
    /// `(R, R', R'')` at `r > 0`.
    fn radial(&self, r: f64) -> (f64, f64, f64) {
        match *self {
            SingularTerm::CornerPower { alpha } => {
                let ra = r.powf(alpha);
                (ra, alpha * ra / r, alpha * (alpha - 1.0) * ra / (r * r))
            }
            SingularTerm::CornerLog => {
                let l = r.ln();
                (r * r * l, 2.0 * r * l + r, 2.0 * l + 3.0)
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            SingularTerm::CornerPower { alpha } => format!("r^{alpha} sin 2t"),
            SingularTerm::CornerLog => "r^2 log r sin 2t".into(),
        }
    }

    /// Evaluate away from the corner; at the corner itself every quantity
    /// is reported as zero except where it is infinite, which is the
    /// caller's responsibility to avoid.
    pub fn jet(&self, x: f64, y: f64) -> Jet {
        let (cx, cy) = (x + 1.0, y + 1.0);
        let r = cx.hypot(cy);
        if r == 0.0 {
            return Jet { value: 0.0, dx: 0.0, dy: 0.0, laplacian: f64::NAN };
        }
        let (rr, r1, r2) = self.radial(r);
        let s2 = 2.0 * cx * cy / (r * r);
        // g = 2 X Y Q(r), Q = R / r^2
        let q = rr / (r * r);
        let q1 = r1 / (r * r) - 2.0 * rr / (r * r * r);
        let g = rr * s2;
        let gx = 2.0 * cy * q + 2.0 * cx * cy * q1 * cx / r;
        let gy = 2.0 * cx * q + 2.0 * cx * cy * q1 * cy / r;
        let lap_g = (r2 + r1 / r - 4.0 * rr / (r * r)) * s2;
        let h = 0.25 * (1.0 - x) * (1.0 - y);
        let (hx, hy) = (-0.25 * (1.0 - y), -0.25 * (1.0 - x));
        Jet {
            value: g * h,
            dx: gx * h + g * hx,
            dy: gy * h + g * hy,
            laplacian: h * lap_g + 2.0 * (gx * hx + gy * hy),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TERMS: [SingularTerm; 3] = [
        SingularTerm::CornerPower { alpha: 0.5 },
        SingularTerm::CornerPower { alpha: 1.5 },
        SingularTerm::CornerLog,
    ];

    #[test]
    fn vanishes_on_boundary() {
        for t in TERMS {
            for i in 0..=20 {
                let s = -1.0 + i as f64 / 10.0;
                for (x, y) in [(s, -1.0), (s, 1.0), (-1.0, s), (1.0, s)] {
                    if x == -1.0 && y == -1.0 {
                        continue;
                    }
                    assert!(t.jet(x, y).value.abs() < 1e-15, "{t:?} at ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-4;
        for t in TERMS {
            for &(x, y) in &[(-0.9, -0.7), (0.2, -0.95), (0.5, 0.3)] {
                let j = t.jet(x, y);
                let f = |a: f64, b: f64| t.jet(a, b).value;
                let dx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
                let dy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
                let lap = (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h);
                assert!((dx - j.dx).abs() < 1e-6, "{t:?} dx");
                assert!((dy - j.dy).abs() < 1e-6, "{t:?} dy");
                assert!((lap - j.laplacian).abs() < 1e-5 * (1.0 + j.laplacian.abs()), "{t:?} lap {lap} {}", j.laplacian);
            }
        }
    }
}
