//! Random enriched systems with a partial inverse of each kind.
#![allow(dead_code)]

use az_core::bases::{BlockSystem, InverseKind, PartialInverse};
use az_core::linalg::{gaussian_matrix, gaussian_vector, svd, CMatrix, CVector, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `U diag(s) V*` with singular values in `[1, 2]`.
pub fn well_conditioned(m: usize, n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let r = m.min(n);
    let u = gaussian_matrix(m, r, rng).qr().q();
    let v = gaussian_matrix(n, r, rng).qr().q();
    let s = CMatrix::from_fn(r, r, |i, j| {
        if i == j {
            C64::new(1.0 + i as f64 / r.max(2) as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    u * s * v.adjoint()
}

/// Pseudo-inverse keeping the `keep` largest singular directions.
pub fn partial_pinv(a: &CMatrix, keep: usize) -> CMatrix {
    let f = svd(a).unwrap();
    let mut z = CMatrix::zeros(a.ncols(), a.nrows());
    for i in 0..keep {
        z += f.v.column(i) * f.u.column(i).adjoint() * C64::new(1.0 / f.singular_values[i], 0.0);
    }
    z
}

pub struct RandomEnriched {
    pub sys: BlockSystem,
    pub dense: CMatrix,
    pub z11: PartialInverse,
    pub z11_dense: CMatrix,
}

/// Random system whose A11 admits a partial inverse of `kind`; every
/// dimension stays below 60.
pub fn random_enriched(kind: InverseKind, rng: &mut ChaCha8Rng) -> RandomEnriched {
    let n = rng.random_range(2..=30);
    let k = rng.random_range(1..=6);
    let m_k = rng.random_range(0..=8);
    let m_n = match kind {
        InverseKind::TwoSided => n,
        InverseKind::Left => rng.random_range(n + 1..=n + 20),
        InverseKind::Right => rng.random_range(1..n),
        InverseKind::Generalized { .. } => rng.random_range(n / 2 + 1..=n + 10),
    };
    let a11 = well_conditioned(m_n, n, rng);
    let r = m_n.min(n);
    let (kind, keep) = match kind {
        InverseKind::Generalized { .. } => {
            let l = rng.random_range(1..=r.div_ceil(2));
            (InverseKind::Generalized { rank_deficit: l }, r - l)
        }
        other => (other, r),
    };
    let z = partial_pinv(&a11, keep);
    let a12 = gaussian_matrix(m_n, k, rng);
    let a21 = gaussian_matrix(m_k, n, rng);
    let a22 = gaussian_matrix(m_k, k, rng);
    let sys = BlockSystem::from_dense(a11.clone(), a12, a21, a22).unwrap();
    let dense = sys.to_dense();
    let z11 = PartialInverse::from_dense(kind, z.clone(), &a11).unwrap();
    RandomEnriched { sys, dense, z11, z11_dense: z }
}

/// `Z*` embedded as `[[Z11*, 0], [0, 0]]`.
pub fn embedded_zstar(r: &RandomEnriched) -> CMatrix {
    let d = r.sys.dims();
    let mut z = CMatrix::zeros(d.cols(), d.rows());
    z.view_mut((0, 0), (d.n, d.m_n)).copy_from(&r.z11_dense);
    z
}

pub fn brute_force_first(r: &RandomEnriched) -> CMatrix {
    let zs = embedded_zstar(r);
    &r.dense - &r.dense * &zs * &r.dense
}

pub fn random_rhs(rows: usize, rng: &mut ChaCha8Rng) -> CVector {
    gaussian_vector(rows, rng)
}

pub const KINDS: [InverseKind; 4] = [
    InverseKind::TwoSided,
    InverseKind::Left,
    InverseKind::Right,
    InverseKind::Generalized { rank_deficit: 0 },
];
