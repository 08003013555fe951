//! FFT and DCT backed operators for the conventional blocks.

use std::sync::Arc;

use rustdct::{Dct1, Dct2, Dct3, DctPlanner};
use rustfft::{Fft, FftPlanner};

use crate::linalg::{CVector, LinearOperator, C64};
use crate::{Error, Result};

use super::families::fourier_modes;

/// Fourier synthesis `c -> (sum_n c_n exp(2 pi i n t_m))_m` on `t_m = m / M`.
pub struct FourierOperator {
    n: usize,
    m: usize,
    bins: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FourierOperator {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("empty Fourier grid".into()));
        }
        let bins = fourier_modes(n)?
            .into_iter()
            .map(|k| k.rem_euclid(m as i64) as usize)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(FourierOperator {
            n,
            m,
            bins,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        })
    }
}

impl LinearOperator for FourierOperator {
    fn nrows(&self) -> usize {
        self.m
    }

    fn ncols(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &CVector) -> CVector {
        let mut buf = vec![C64::new(0.0, 0.0); self.m];
        for (&bin, &c) in self.bins.iter().zip(x.iter()) {
            buf[bin] += c;
        }
        self.inverse.process(&mut buf);
        CVector::from_vec(buf)
    }

    fn apply_adjoint(&self, y: &CVector) -> CVector {
        let mut buf: Vec<C64> = y.iter().copied().collect();
        self.forward.process(&mut buf);
        CVector::from_iterator(self.n, self.bins.iter().map(|&b| buf[b]))
    }

    fn cost_hint(&self) -> f64 {
        5.0 * self.m as f64 * (self.m.max(2) as f64).log2()
    }
}

/// `scale * T^*` for an operator `T`.
pub struct ScaledAdjoint<T> {
    inner: T,
    scale: f64,
}

impl<T: LinearOperator> ScaledAdjoint<T> {
    pub fn new(inner: T, scale: f64) -> Self {
        ScaledAdjoint { inner, scale }
    }
}

impl<T: LinearOperator> LinearOperator for ScaledAdjoint<T> {
    fn nrows(&self) -> usize {
        self.inner.ncols()
    }

    fn ncols(&self) -> usize {
        self.inner.nrows()
    }

    fn apply(&self, x: &CVector) -> CVector {
        self.inner.apply_adjoint(x) * C64::new(self.scale, 0.0)
    }

    fn apply_adjoint(&self, y: &CVector) -> CVector {
        self.inner.apply(y) * C64::new(self.scale, 0.0)
    }

    fn cost_hint(&self) -> f64 {
        self.inner.cost_hint()
    }
}

/// One axis of a Chebyshev tensor: `d` polynomials sampled at `n` nodes or
/// extremae of `[-1, 1]`. All maps act on real data.
#[derive(Clone)]
pub enum ChebAxis {
    Nodes {
        d: usize,
        n: usize,
        dct2: Arc<dyn Dct2<f64>>,
        dct3: Arc<dyn Dct3<f64>>,
    },
    Extremae {
        d: usize,
        n: usize,
        dct1: Arc<dyn Dct1<f64>>,
    },
}

#[derive(Clone, Copy)]
enum AxisMap {
    Synthesis,
    Adjoint,
    LeftInverse,
    LeftInverseAdjoint,
}

impl ChebAxis {
    pub fn nodes(d: usize, n: usize) -> Result<Self> {
        if d == 0 || d > n {
            return Err(Error::InvalidArgument(format!(
                "Chebyshev axis needs 1 <= degree count <= points, got {d} and {n}"
            )));
        }
        let mut planner = DctPlanner::new();
        Ok(ChebAxis::Nodes {
            d,
            n,
            dct2: planner.plan_dct2(n),
            dct3: planner.plan_dct3(n),
        })
    }

    pub fn extremae(d: usize, n: usize) -> Result<Self> {
        if d == 0 || d > n || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "Chebyshev extremae axis needs 1 <= degree count <= points, points >= 2; got {d} and {n}"
            )));
        }
        Ok(ChebAxis::Extremae {
            d,
            n,
            dct1: DctPlanner::new().plan_dct1(n),
        })
    }

    pub fn degrees(&self) -> usize {
        match self {
            ChebAxis::Nodes { d, .. } | ChebAxis::Extremae { d, .. } => *d,
        }
    }

    pub fn points(&self) -> usize {
        match self {
            ChebAxis::Nodes { n, .. } | ChebAxis::Extremae { n, .. } => *n,
        }
    }

    fn input_len(&self, map: AxisMap) -> usize {
        match map {
            AxisMap::Synthesis | AxisMap::LeftInverseAdjoint => self.degrees(),
            AxisMap::Adjoint | AxisMap::LeftInverse => self.points(),
        }
    }

    fn output_len(&self, map: AxisMap) -> usize {
        match map {
            AxisMap::Synthesis | AxisMap::LeftInverseAdjoint => self.points(),
            AxisMap::Adjoint | AxisMap::LeftInverse => self.degrees(),
        }
    }

    /// Diagonal weight of the discrete orthogonality relation for degree `i`.
    fn coefficient_scale(&self, i: usize) -> f64 {
        match *self {
            ChebAxis::Nodes { n, .. } => {
                if i == 0 {
                    1.0 / n as f64
                } else {
                    2.0 / n as f64
                }
            }
            ChebAxis::Extremae { n, .. } => {
                if i == 0 || i == n - 1 {
                    1.0 / (n - 1) as f64
                } else {
                    2.0 / (n - 1) as f64
                }
            }
        }
    }

    fn map(&self, which: AxisMap, input: &[f64]) -> Vec<f64> {
        match (self, which) {
            (ChebAxis::Nodes { n, dct3, .. }, AxisMap::Synthesis) => {
                let mut buf = vec![0.0; *n];
                buf[..input.len()].copy_from_slice(input);
                buf[0] *= 2.0;
                dct3.process_dct3(&mut buf);
                buf
            }
            (ChebAxis::Nodes { d, dct2, .. }, AxisMap::Adjoint) => {
                let mut buf = input.to_vec();
                dct2.process_dct2(&mut buf);
                buf.truncate(*d);
                buf
            }
            (ChebAxis::Extremae { n, dct1, .. }, AxisMap::Synthesis) => {
                let mut buf = vec![0.0; *n];
                buf[..input.len()].copy_from_slice(input);
                buf[0] *= 2.0;
                buf[n - 1] *= 2.0;
                dct1.process_dct1(&mut buf);
                buf
            }
            (ChebAxis::Extremae { n, d, dct1 }, AxisMap::Adjoint) => {
                let mut buf = input.to_vec();
                buf[0] *= 2.0;
                buf[n - 1] *= 2.0;
                dct1.process_dct1(&mut buf);
                buf.truncate(*d);
                buf
            }
            (ChebAxis::Extremae { d, dct1, .. }, AxisMap::LeftInverse) => {
                // sum'' y_b T_i(x_b): DCT-I already halves the end samples
                let mut buf = input.to_vec();
                dct1.process_dct1(&mut buf);
                buf.truncate(*d);
                for (i, v) in buf.iter_mut().enumerate() {
                    *v *= self.coefficient_scale(i);
                }
                buf
            }
            (ChebAxis::Extremae { n, dct1, .. }, AxisMap::LeftInverseAdjoint) => {
                let mut buf = vec![0.0; *n];
                for (i, &c) in input.iter().enumerate() {
                    buf[i] = c * self.coefficient_scale(i);
                }
                buf[0] *= 2.0;
                buf[n - 1] *= 2.0;
                dct1.process_dct1(&mut buf);
                buf[0] *= 0.5;
                buf[n - 1] *= 0.5;
                buf
            }
            (ChebAxis::Nodes { .. }, AxisMap::LeftInverse) => {
                let mut buf = self.map(AxisMap::Adjoint, input);
                for (i, v) in buf.iter_mut().enumerate() {
                    *v *= self.coefficient_scale(i);
                }
                buf
            }
            (ChebAxis::Nodes { .. }, AxisMap::LeftInverseAdjoint) => {
                let scaled: Vec<f64> = input
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| c * self.coefficient_scale(i))
                    .collect();
                self.map(AxisMap::Synthesis, &scaled)
            }
        }
    }

    fn cost(&self) -> f64 {
        let n = self.points().max(2) as f64;
        5.0 * n * n.log2()
    }
}

/// Chebyshev synthesis or its left inverse on a 1D axis or a 2D tensor grid.
///
/// Coefficients are ordered lexicographically, `(i, j) -> i * d_y + j`, and
/// samples as `(a, b) -> a * n_y + b`.
pub struct ChebyshevOperator {
    x: ChebAxis,
    y: Option<ChebAxis>,
    left_inverse: bool,
}

impl ChebyshevOperator {
    pub fn synthesis(x: ChebAxis, y: Option<ChebAxis>) -> Self {
        ChebyshevOperator { x, y, left_inverse: false }
    }

    pub fn left_inverse(x: ChebAxis, y: Option<ChebAxis>) -> Self {
        ChebyshevOperator { x, y, left_inverse: true }
    }

    fn coeff_len(&self) -> usize {
        self.x.degrees() * self.y.as_ref().map_or(1, |a| a.degrees())
    }

    fn sample_len(&self) -> usize {
        self.x.points() * self.y.as_ref().map_or(1, |a| a.points())
    }

    fn tensor_real(&self, map: AxisMap, input: &[f64]) -> Vec<f64> {
        let Some(y) = &self.y else {
            return self.x.map(map, input);
        };
        let (p, q) = (self.x.input_len(map), y.input_len(map));
        let (r, s) = (self.x.output_len(map), y.output_len(map));
        // along the first index, column by column
        let mut mid = vec![0.0; r * q];
        let mut col = vec![0.0; p];
        for b in 0..q {
            for a in 0..p {
                col[a] = input[a * q + b];
            }
            let out = self.x.map(map, &col);
            for a in 0..r {
                mid[a * q + b] = out[a];
            }
        }
        let mut result = Vec::with_capacity(r * s);
        for a in 0..r {
            result.extend(y.map(map, &mid[a * q..(a + 1) * q]));
        }
        result
    }

    fn tensor(&self, map: AxisMap, v: &CVector) -> CVector {
        let re: Vec<f64> = v.iter().map(|z| z.re).collect();
        let im: Vec<f64> = v.iter().map(|z| z.im).collect();
        let re = self.tensor_real(map, &re);
        let out = if im.iter().all(|&t| t == 0.0) {
            re.into_iter().map(|r| C64::new(r, 0.0)).collect::<Vec<_>>()
        } else {
            let im = self.tensor_real(map, &im);
            re.into_iter().zip(im).map(|(r, i)| C64::new(r, i)).collect()
        };
        CVector::from_vec(out)
    }
}

impl LinearOperator for ChebyshevOperator {
    fn nrows(&self) -> usize {
        if self.left_inverse {
            self.coeff_len()
        } else {
            self.sample_len()
        }
    }

    fn ncols(&self) -> usize {
        if self.left_inverse {
            self.sample_len()
        } else {
            self.coeff_len()
        }
    }

    fn apply(&self, x: &CVector) -> CVector {
        let map = if self.left_inverse { AxisMap::LeftInverse } else { AxisMap::Synthesis };
        self.tensor(map, x)
    }

    fn apply_adjoint(&self, y: &CVector) -> CVector {
        let map = if self.left_inverse { AxisMap::LeftInverseAdjoint } else { AxisMap::Adjoint };
        self.tensor(map, y)
    }

    fn cost_hint(&self) -> f64 {
        let nx = self.x.points() as f64;
        match &self.y {
            None => self.x.cost(),
            Some(y) => y.points() as f64 * self.x.cost() + nx * y.cost(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::families::{chebyshev_values, fourier_eval};
    use crate::bases::grid::{chebyshev_extremae, chebyshev_nodes, equispaced_points};
    use crate::linalg::{check_adjoint, densify, operator_norm, CMatrix};

    fn dense_axis(d: usize, pts: &[f64]) -> CMatrix {
        CMatrix::from_fn(pts.len(), d, |a, i| C64::new(chebyshev_values(d, pts[a])[i], 0.0))
    }

    fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a.kronecker(b)
    }

    #[test]
    fn fourier_matches_dense() {
        for &(n, m) in &[(17, 34), (17, 17), (5, 3), (9, 40)] {
            let op = FourierOperator::new(n, m).unwrap();
            let dense = fourier_eval(n, &equispaced_points(m)).unwrap();
            assert!((densify(&op) - &dense).camax() < 1e-11);
            let norm = operator_norm(&op, 50, 1e-10, 1).value;
            assert!(check_adjoint(&op, norm, 50, 3) < 1e-12);
        }
    }

    #[test]
    fn chebyshev_axes_match_dense() {
        for &(d, n) in &[(4, 8), (5, 5), (3, 7), (1, 1)] {
            let ax = ChebAxis::nodes(d, n).unwrap();
            let op = ChebyshevOperator::synthesis(ax, None);
            let dense = dense_axis(d, &chebyshev_nodes(n));
            assert!((densify(&op) - &dense).camax() < 1e-13, "nodes {d} {n}");
            let adj = densify(&ScaledAdjoint::new(&op, 1.0));
            assert!((adj - dense.adjoint()).camax() < 1e-13);
        }
        for &(d, n) in &[(4, 8), (5, 5), (3, 7), (2, 2)] {
            let ax = ChebAxis::extremae(d, n).unwrap();
            let op = ChebyshevOperator::synthesis(ax, None);
            let dense = dense_axis(d, &chebyshev_extremae(n));
            assert!((densify(&op) - &dense).camax() < 1e-13, "extremae {d} {n}");
            let adj = densify(&ScaledAdjoint::new(&op, 1.0));
            assert!((adj - dense.adjoint()).camax() < 1e-13);
        }
    }

    #[test]
    fn chebyshev_left_inverse_and_adjoint() {
        let axes = [
            (ChebAxis::nodes(4, 8).unwrap(), chebyshev_nodes(8)),
            (ChebAxis::extremae(4, 8).unwrap(), chebyshev_extremae(8)),
            (ChebAxis::extremae(6, 6).unwrap(), chebyshev_extremae(6)),
        ];
        for (ax, pts) in axes {
            let d = ax.degrees();
            let z = ChebyshevOperator::left_inverse(ax, None);
            let za = densify(&z) * dense_axis(d, &pts);
            assert!((za - CMatrix::identity(d, d)).camax() < 1e-13);
            assert!(check_adjoint(&z, 1.0, 30, 5) < 1e-12);
        }
    }

    #[test]
    fn tensor_matches_kronecker() {
        let (d, nx, ny) = (5, 10, 10);
        let op = ChebyshevOperator::synthesis(
            ChebAxis::nodes(d, nx).unwrap(),
            Some(ChebAxis::extremae(d, ny).unwrap()),
        );
        let dense = kron(&dense_axis(d, &chebyshev_nodes(nx)), &dense_axis(d, &chebyshev_extremae(ny)));
        assert!((densify(&op) - &dense).camax() < 1e-12);
        let norm = operator_norm(&op, 50, 1e-10, 2).value;
        assert!(check_adjoint(&op, norm, 50, 9) < 1e-12);
        let z = ChebyshevOperator::left_inverse(
            ChebAxis::nodes(d, nx).unwrap(),
            Some(ChebAxis::extremae(d, ny).unwrap()),
        );
        let err = (densify(&z) * &dense - CMatrix::identity(d * d, d * d)).camax();
        assert!(err < 1e-12);
    }
}
