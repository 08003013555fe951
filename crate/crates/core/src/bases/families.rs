//! Point evaluation of the basis families.

use std::f64::consts::PI;

use super::Points;
use crate::linalg::{CMatrix, C64};
use crate::{Error, Result};

/// Fourier mode numbers `-(N-1)/2 ..= (N-1)/2` in column order.
pub fn fourier_modes(n: usize) -> Result<Vec<i64>> {
    if n == 0 || n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "Fourier basis size must be odd, got {n}"
        )));
    }
    let half = ((n - 1) / 2) as i64;
    Ok((-half..=half).collect())
}

/// Entry `(m, k) = exp(2 pi i n_k t_m)` on `[0, 1]`.
pub fn fourier_eval(n: usize, t: &[f64]) -> Result<CMatrix> {
    let modes = fourier_modes(n)?;
    Ok(CMatrix::from_fn(t.len(), n, |m, k| {
        C64::from_polar(1.0, 2.0 * PI * modes[k] as f64 * t[m])
    }))
}

/// Legendre polynomials `P_0..=P_degree` at `x in [-1, 1]`, normalized `P_k(1) = 1`.
pub fn legendre_values(degree: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(degree + 1);
    p.push(1.0);
    if degree >= 1 {
        p.push(x);
    }
    for k in 1..degree {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0);
        p.push(next);
    }
    p
}

/// Legendre polynomials of degree `1..=k` mapped affinely to `[0, 1]`.
///
/// The constant is left out: it already lives in the Fourier basis.
pub fn legendre_eval(k: usize, t: &[f64]) -> Result<CMatrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one Legendre polynomial".into()));
    }
    let mut out = CMatrix::zeros(t.len(), k);
    for (m, &tm) in t.iter().enumerate() {
        let p = legendre_values(k, 2.0 * tm - 1.0);
        for j in 0..k {
            out[(m, j)] = C64::new(p[j + 1], 0.0);
        }
    }
    Ok(out)
}

/// Affine map of a parameter interval onto `[-1, 1]`.
pub fn to_reference(s: f64, range: (f64, f64)) -> f64 {
    (2.0 * s - range.0 - range.1) / (range.1 - range.0)
}

pub fn from_reference(x: f64, range: (f64, f64)) -> f64 {
    range.0 + 0.5 * (range.1 - range.0) * (x + 1.0)
}

/// Chebyshev polynomials `T_0..T_{count-1}` at `x in [-1, 1]`.
pub fn chebyshev_values(count: usize, x: f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(count);
    if count == 0 {
        return t;
    }
    t.push(1.0);
    if count > 1 {
        t.push(x);
    }
    for k in 2..count {
        let next = 2.0 * x * t[k - 1] - t[k - 2];
        t.push(next);
    }
    t
}

/// Lexicographic tensor index `(i, j) -> i * sqrt_n + j`.
pub fn lexicographic_pairs(sqrt_n: usize) -> Vec<(usize, usize)> {
    (0..sqrt_n)
        .flat_map(|i| (0..sqrt_n).map(move |j| (i, j)))
        .collect()
}

/// Tensor pairs with `0 <= i, j < q`, ordered by total degree, then lexicographically.
pub fn total_degree_pairs(q: usize) -> Vec<(usize, usize)> {
    let mut pairs = lexicographic_pairs(q);
    pairs.sort_by_key(|&(i, j)| (i + j, i, j));
    pairs
}

/// Columns `T_i(s_x) T_j(s_y)` in lexicographic `(i, j)` order, both
/// coordinates mapped from `range` onto `[-1, 1]`.
pub fn chebyshev_tensor_eval(sqrt_n: usize, pts: &[[f64; 2]], range: (f64, f64)) -> CMatrix {
    let pairs = lexicographic_pairs(sqrt_n);
    chebyshev_pairs_eval(&pairs, pts, range)
}

pub fn chebyshev_pairs_eval(pairs: &[(usize, usize)], pts: &[[f64; 2]], range: (f64, f64)) -> CMatrix {
    let count = pairs.iter().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(0);
    let mut out = CMatrix::zeros(pts.len(), pairs.len());
    for (m, p) in pts.iter().enumerate() {
        let tx = chebyshev_values(count, to_reference(p[0], range));
        let ty = chebyshev_values(count, to_reference(p[1], range));
        for (c, &(i, j)) in pairs.iter().enumerate() {
            out[(m, c)] = C64::new(tx[i] * ty[j], 0.0);
        }
    }
    out
}

/// Jacobi polynomials `J_0^{(a,b)} ..= J_degree^{(a,b)}` at `z`.
pub fn jacobi_values(degree: usize, a: f64, b: f64, z: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(degree + 1);
    p.push(1.0);
    if degree == 0 {
        return p;
    }
    p.push(0.5 * (a - b) + 0.5 * (a + b + 2.0) * z);
    for n in 1..degree {
        let nf = n as f64;
        let s = 2.0 * nf + a + b;
        let c1 = 2.0 * (nf + 1.0) * (nf + a + b + 1.0) * s;
        let c2 = (s + 1.0) * (a * a - b * b);
        let c3 = s * (s + 1.0) * (s + 2.0);
        let c4 = 2.0 * (nf + a) * (nf + b) * (s + 2.0);
        p.push(((c2 + c3 * z) * p[n] - c4 * p[n - 1]) / c1);
    }
    p
}

/// `J_deg^{(1,1)}` at each point.
pub fn jacobi11_eval(deg: usize, z: &[f64]) -> Vec<f64> {
    z.iter().map(|&zi| jacobi_values(deg, 1.0, 1.0, zi)[deg]).collect()
}

/// Values and first two derivatives of `phi_i(z) = (1 - z^2) J_{i-1}^{(1,1)}(z)`
/// for `i = 1..=count`.
#[derive(Debug, Clone)]
pub struct HomogenizedJacobi {
    pub value: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

pub fn homogenized_jacobi(count: usize, z: f64) -> HomogenizedJacobi {
    // d/dz J_n^{(a,b)} = (n + a + b + 1) / 2 * J_{n-1}^{(a+1,b+1)}
    let j11 = jacobi_values(count.max(1), 1.0, 1.0, z);
    let j22 = jacobi_values(count.max(1), 2.0, 2.0, z);
    let j33 = jacobi_values(count.max(1), 3.0, 3.0, z);
    let w = 1.0 - z * z;
    let mut value = Vec::with_capacity(count);
    let mut d1 = Vec::with_capacity(count);
    let mut d2 = Vec::with_capacity(count);
    for i in 1..=count {
        let n = i - 1;
        let nf = n as f64;
        let j = j11[n];
        let jp = if n >= 1 { 0.5 * (nf + 3.0) * j22[n - 1] } else { 0.0 };
        let jpp = if n >= 2 {
            0.25 * (nf + 3.0) * (nf + 4.0) * j33[n - 2]
        } else {
            0.0
        };
        value.push(w * j);
        d1.push(-2.0 * z * j + w * jp);
        d2.push(-2.0 * j - 4.0 * z * jp + w * jpp);
    }
    HomogenizedJacobi { value, d1, d2 }
}

/// Columns `phi_i(x) phi_j(y)` for the given `(i, j)` pairs (1-based degrees).
pub fn homogenized_pairs_eval(pairs: &[(usize, usize)], pts: &[[f64; 2]]) -> CMatrix {
    let count = pairs.iter().map(|&(i, j)| i.max(j)).max().unwrap_or(0);
    let mut out = CMatrix::zeros(pts.len(), pairs.len());
    for (m, p) in pts.iter().enumerate() {
        let hx = homogenized_jacobi(count, p[0]);
        let hy = homogenized_jacobi(count, p[1]);
        for (c, &(i, j)) in pairs.iter().enumerate() {
            out[(m, c)] = C64::new(hx.value[i - 1] * hy.value[j - 1], 0.0);
        }
    }
    out
}

/// Homogenized Jacobi tensor basis, `1 <= i, j <= sqrt_n`, in total-degree order.
pub fn homogenized_jacobi_pairs(sqrt_n: usize) -> Vec<(usize, usize)> {
    total_degree_pairs(sqrt_n)
        .into_iter()
        .map(|(i, j)| (i + 1, j + 1))
        .collect()
}

pub fn homogenized_jacobi_tensor_eval(sqrt_n: usize, pts: &[[f64; 2]]) -> CMatrix {
    homogenized_pairs_eval(&homogenized_jacobi_pairs(sqrt_n), pts)
}

pub(crate) fn expect_line(points: &Points) -> Result<&[f64]> {
    match points {
        Points::Line(t) => Ok(t),
        Points::Plane(_) => Err(Error::InvalidArgument("expected 1D points".into())),
    }
}

pub(crate) fn expect_plane(points: &Points) -> Result<&[[f64; 2]]> {
    match points {
        Points::Plane(p) => Ok(p),
        Points::Line(_) => Err(Error::InvalidArgument("expected 2D points".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourier_examples() {
        let a = fourier_eval(1, &[0.1, 0.7]).unwrap();
        assert!(a.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
        let a = fourier_eval(3, &[0.0]).unwrap();
        assert!(a.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
        let a = fourier_eval(5, &[0.5]).unwrap();
        let expect = [1.0, -1.0, 1.0, -1.0, 1.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((a[(0, k)] - C64::new(*e, 0.0)).norm() < 1e-14);
        }
        assert!(fourier_eval(4, &[0.0]).is_err());
    }

    #[test]
    fn legendre_examples() {
        let a = legendre_eval(4, &[0.5, 1.0, 0.75]).unwrap();
        assert!(a[(0, 0)].norm() < 1e-15);
        assert!((a[(1, 1)].re - 1.0).abs() < 1e-15);
        assert!((a[(2, 3)].re - (-0.2890625)).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_examples() {
        let pts = [[0.25, 0.25], [0.5, 0.375], [0.0, 0.0]];
        let a = chebyshev_tensor_eval(4, &pts, (0.0, 0.5));
        // (0,0) column is constant one
        for m in 0..3 {
            assert!((a[(m, 0)].re - 1.0).abs() < 1e-15);
        }
        // T_1 at mapped value 0: s_x = 0.25 -> 0
        assert!(a[(0, 4)].re.abs() < 1e-15);
        // T_3(0.5) = -1 with s_y = 0.375 -> 0.5, i = 0, j = 3
        assert!((a[(1, 3)].re + 1.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_examples() {
        for &z in &[-1.0, 1.0] {
            let h = homogenized_jacobi(6, z);
            assert!(h.value.iter().all(|v| v.abs() < 1e-15));
        }
        assert_eq!(jacobi11_eval(0, &[0.3])[0], 1.0);
        assert!((homogenized_jacobi(1, 0.0).value[0] - 1.0).abs() < 1e-15);
        assert!((jacobi11_eval(1, &[0.5])[0] - 1.0).abs() < 1e-15);
        assert!((homogenized_jacobi(2, 0.5).value[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn jacobi_derivatives_match_finite_differences() {
        let h = 1e-5;
        for &z in &[-0.7, 0.1, 0.55] {
            let c = homogenized_jacobi(7, z);
            let p = homogenized_jacobi(7, z + h);
            let m = homogenized_jacobi(7, z - h);
            for i in 0..7 {
                let fd1 = (p.value[i] - m.value[i]) / (2.0 * h);
                let fd2 = (p.value[i] - 2.0 * c.value[i] + m.value[i]) / (h * h);
                assert!((fd1 - c.d1[i]).abs() < 1e-7, "d1 i={i}");
                assert!((fd2 - c.d2[i]).abs() < 1e-3 * (1.0 + c.d2[i].abs()), "d2 i={i}");
            }
        }
    }

    #[test]
    fn total_degree_order() {
        let p = total_degree_pairs(3);
        assert_eq!(p[0], (0, 0));
        assert_eq!(&p[1..3], &[(0, 1), (1, 0)]);
        assert_eq!(p[8], (2, 2));
    }
}
