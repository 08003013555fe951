//! Poisson problems `-lap u = f` on `[-1, 1]^2` with zero boundary values.

use std::sync::Arc;

use super::singular::SingularTerm;

type Field = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct EllipticProblem {
    pub rhs: Field,
    pub exact: Option<Field>,
    /// Enrichment functions, one per singular term.
    pub singular_terms: Vec<SingularTerm>,
}

impl std::fmt::Debug for EllipticProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EllipticProblem")
            .field("singular_terms", &self.singular_terms)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

/// `p(z) = (1 - z^2) e^z` and `p''`.
fn p(z: f64) -> f64 {
    (1.0 - z * z) * z.exp()
}

fn p2(z: f64) -> f64 {
    (-1.0 - 4.0 * z - z * z) * z.exp()
}

/// Smooth part `(1 - x^2)(1 - y^2) e^{x + y}`.
pub fn smooth_part(x: f64, y: f64) -> f64 {
    p(x) * p(y)
}

fn smooth_laplacian(x: f64, y: f64) -> f64 {
    p2(x) * p(y) + p(x) * p2(y)
}

impl EllipticProblem {
    pub fn new(
        rhs: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        exact: Option<Field>,
        singular_terms: Vec<SingularTerm>,
    ) -> Self {
        EllipticProblem { rhs: Arc::new(rhs), exact, singular_terms }
    }

    /// `u = psi + (1 - x^2)(1 - y^2) e^{x + y}` with unit amplitude on the
    /// singular term, enriched by that same term.
    pub fn manufactured(term: SingularTerm) -> Self {
        EllipticProblem {
            rhs: Arc::new(move |x, y| -term.jet(x, y).laplacian - smooth_laplacian(x, y)),
            exact: Some(Arc::new(move |x, y| term.jet(x, y).value + smooth_part(x, y))),
            singular_terms: vec![term],
        }
    }

    /// `u = (1 - x^2)(1 - y^2)(1 + x/2 - y^2/3)`, a polynomial in the span
    /// of the conventional basis once `sqrt_n >= 3`. Enrichment terms are
    /// kept but the exact solution does not use them.
    pub fn polynomial(singular_terms: Vec<SingularTerm>) -> Self {
        // u = b(x) b(y) q(x, y), b = 1 - z^2, q = 1 + x/2 - y^2/3
        let u = |x: f64, y: f64| (1.0 - x * x) * (1.0 - y * y) * (1.0 + 0.5 * x - y * y / 3.0);
        let lap = |x: f64, y: f64| {
            let (bx, by) = (1.0 - x * x, 1.0 - y * y);
            let q = 1.0 + 0.5 * x - y * y / 3.0;
            // d2/dx2 (bx q) = -2 q + 2 (-2x)(1/2) + 0
            let uxx = by * (-2.0 * q - 2.0 * x);
            // d2/dy2 (by q) = -2 q + 2 (-2y)(-2y/3) + by (-2/3)
            let uyy = bx * (-2.0 * q + 8.0 * y * y / 3.0 - 2.0 * by / 3.0);
            uxx + uyy
        };
        EllipticProblem {
            rhs: Arc::new(move |x, y| -lap(x, y)),
            exact: Some(Arc::new(u)),
            singular_terms,
        }
    }

    pub fn k(&self) -> usize {
        self.singular_terms.len()
    }

    /// The same problem without enrichment.
    pub fn plain(&self) -> Self {
        EllipticProblem { singular_terms: Vec::new(), ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_laplacian(u: &dyn Fn(f64, f64) -> f64, x: f64, y: f64) -> f64 {
        let h = 1e-4;
        (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4.0 * u(x, y)) / (h * h)
    }

    #[test]
    fn manufactured_rhs_is_minus_laplacian() {
        for prob in [
            EllipticProblem::manufactured(SingularTerm::CornerPower { alpha: 0.5 }),
            EllipticProblem::manufactured(SingularTerm::CornerLog),
            EllipticProblem::polynomial(vec![]),
        ] {
            let u = prob.exact.clone().unwrap();
            for &(x, y) in &[(0.1, 0.2), (-0.5, 0.7), (0.8, -0.6)] {
                let fd = -fd_laplacian(&|a, b| u(a, b), x, y);
                assert!((fd - (prob.rhs)(x, y)).abs() < 1e-5 * (1.0 + fd.abs()));
            }
            assert!(u(1.0, 0.3).abs() < 1e-14 && u(0.2, -1.0).abs() < 1e-14);
        }
    }
}
