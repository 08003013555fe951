use super::{gaussian_vector, seeded_rng, LinearOperator};

/// Power-iteration estimate of the spectral norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Estimates `||A||_2` by power iteration on `A* A`.
///
/// Stops after `max_iter` iterations or once the estimate changes by less
/// than `tol` relative. Never densifies the operator.
pub fn operator_norm<A: LinearOperator + ?Sized>(
    op: &A,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> NormEstimate {
    if op.nrows() == 0 || op.ncols() == 0 {
        return NormEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut rng = seeded_rng(seed);
    let mut x = gaussian_vector(op.ncols(), &mut rng);
    x.unscale_mut(x.norm());
    let mut estimate = 0.0;
    for it in 1..=max_iter.max(1) {
        let y = op.apply(&x);
        let sigma = y.norm();
        if sigma == 0.0 {
            return NormEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        let z = op.apply_adjoint(&y);
        let zn = z.norm();
        let change = (sigma - estimate).abs();
        estimate = sigma;
        if zn == 0.0 {
            break;
        }
        x = z.unscale(zn);
        if it > 1 && change <= tol * sigma {
            return NormEstimate {
                value: estimate,
                iterations: it,
                converged: true,
            };
        }
    }
    NormEstimate {
        value: estimate,
        iterations: max_iter,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{svd, CMatrix, C64, ZeroOperator};

    #[test]
    fn matches_svd_on_diagonal() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(5.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.5, 0.0),
        ]));
        let est = operator_norm(&a, 100, 1e-12, 1);
        assert!((est.value - svd(&a).unwrap().sigma_max()).abs() < 1e-9);
        assert!(est.converged);
    }

    #[test]
    fn zero_operator_has_zero_norm() {
        let z = ZeroOperator { rows: 4, cols: 3 };
        assert_eq!(operator_norm(&z, 20, 1e-6, 0).value, 0.0);
    }
}
