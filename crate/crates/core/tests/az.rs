mod common;

use az_core::az::{
    az_solve, enriched_az_solve, error_bound_factors, first_az_matrix, schur_solve, AzProblem,
    FirstAzForm,
};
use az_core::bases::{
    assemble_block_system, fourier_left_inverse, grid_equispaced, BlockSystem, ConventionalFamily,
    EnrichedBasis, Enrichment, InverseKind, PartialInverse,
};
use az_core::linalg::{
    complexify, densify, gaussian_matrix, seeded_rng, svd, tsvd_solve, CMatrix, CVector,
    TsvdConfig, ZeroOperator, C64,
};
use common::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[test]
fn block_formulas_match_brute_force() {
    let mut rng = seeded_rng(100);
    for kind in KINDS {
        for _ in 0..50 {
            let r = random_enriched(kind, &mut rng);
            let first = first_az_matrix(&r.sys, &r.z11).unwrap();
            let diff = (first.densify() - brute_force_first(&r)).camax();
            assert!(diff <= 1e-12, "{kind:?}: {diff}");
        }
    }
}

#[test]
fn block_shapes_per_kind() {
    let mut rng = seeded_rng(101);
    let r = random_enriched(InverseKind::TwoSided, &mut rng);
    let d = r.sys.dims();
    let f = first_az_matrix(&r.sys, &r.z11).unwrap();
    assert_eq!(f.form, FirstAzForm::CornerBlock);
    assert_eq!(f.block_shape(), (d.m_k, d.k));

    let r = random_enriched(InverseKind::Right, &mut rng);
    let d = r.sys.dims();
    let f = first_az_matrix(&r.sys, &r.z11).unwrap();
    assert_eq!(f.block_shape(), (d.m_k, d.n + d.k));

    let r = random_enriched(InverseKind::Left, &mut rng);
    let d = r.sys.dims();
    let f = first_az_matrix(&r.sys, &r.z11).unwrap();
    let full = f.densify();
    assert!(full.columns(0, d.n).iter().all(|v| *v == c(0.0)));
    assert!(brute_force_first(&r).columns(0, d.n).camax() < 1e-12);
}

#[test]
fn left_inverse_from_pivoted_qr() {
    let mut rng = seeded_rng(102);
    let a11 = gaussian_matrix(20, 8, &mut rng);
    let z = az_core::linalg::qr_left_inverse(&a11).unwrap();
    let z11 = PartialInverse::from_dense(InverseKind::Left, z.clone(), &a11).unwrap();
    let sys = BlockSystem::from_dense(
        a11,
        gaussian_matrix(20, 3, &mut rng),
        gaussian_matrix(4, 8, &mut rng),
        gaussian_matrix(4, 3, &mut rng),
    )
    .unwrap();
    let dense = sys.to_dense();
    let mut zs = CMatrix::zeros(11, 24);
    zs.view_mut((0, 0), (8, 20)).copy_from(&z);
    let brute = &dense - &dense * zs * &dense;
    let f = first_az_matrix(&sys, &z11).unwrap();
    assert!((f.densify() - brute).camax() < 1e-12);
}

#[test]
fn residual_identity_every_kind() {
    let mut rng = seeded_rng(103);
    let cfg = TsvdConfig::default();
    for kind in KINDS {
        for _ in 0..50 {
            let r = random_enriched(kind, &mut rng);
            let b = random_rhs(r.sys.dims().rows(), &mut rng);
            let rep = enriched_az_solve(&r.sys, &r.z11, &b, &cfg).unwrap();
            assert!(rep.residual_identity_gap() <= 1e-12 * (1.0 + b.norm()), "{kind:?}");
            let d = r.sys.dims();
            let bound = match kind {
                InverseKind::TwoSided | InverseKind::Left => d.k,
                InverseKind::Right => d.m_k.min(d.k + d.n),
                InverseKind::Generalized { .. } => {
                    let InverseKind::Generalized { rank_deficit } = r.z11.kind() else { unreachable!() };
                    rank_deficit + d.m_k + d.k
                }
            };
            assert!(rep.step1_rank <= bound);
        }
    }
}

#[test]
fn enriched_matches_generic_az() {
    let mut rng = seeded_rng(104);
    let cfg = TsvdConfig::default();
    for kind in KINDS {
        let r = random_enriched(kind, &mut rng);
        let b = random_rhs(r.sys.dims().rows(), &mut rng);
        let rep = enriched_az_solve(&r.sys, &r.z11, &b, &cfg).unwrap();
        let z = embedded_zstar(&r).adjoint();
        let generic = az_solve(&AzProblem { a: &r.dense, z: &z, b: b.clone(), cfg }).unwrap();
        assert!((rep.residual_norm - generic.residual_norm).abs() < 1e-10 * (1.0 + b.norm()));
    }
}

#[test]
fn two_sided_matches_schur() {
    let mut rng = seeded_rng(105);
    let cfg = TsvdConfig::default();
    for _ in 0..10 {
        let n = 25;
        let k = 3;
        let a11 = well_conditioned(n, n, &mut rng);
        let z = partial_pinv(&a11, n);
        let sys = BlockSystem::from_dense(
            a11.clone(),
            gaussian_matrix(n, k, &mut rng),
            gaussian_matrix(k, n, &mut rng),
            gaussian_matrix(k, k, &mut rng),
        )
        .unwrap();
        let z11 = PartialInverse::from_dense(InverseKind::TwoSided, z.clone(), &a11).unwrap();
        let b = random_rhs(n + k, &mut rng);
        let rep = enriched_az_solve(&sys, &z11, &b, &cfg).unwrap();
        let schur = schur_solve(&sys, &z, &b, &cfg).unwrap();
        assert!(!schur.tsvd_fallback);
        assert!((&rep.x - &schur.x).norm() <= 1e-10 * schur.x.norm());
        assert_eq!(rep.step1_shape, (k, k));
    }
}

#[test]
fn schur_examples() {
    let sys = BlockSystem::from_dense(
        CMatrix::from_element(1, 1, c(2.0)),
        CMatrix::from_element(1, 1, c(1.0)),
        CMatrix::from_element(1, 1, c(1.0)),
        CMatrix::from_element(1, 1, c(1.0)),
    )
    .unwrap();
    let inv = CMatrix::from_element(1, 1, c(0.5));
    let s = schur_solve(&sys, &inv, &complexify(&[3.0, 2.0]), &TsvdConfig::default()).unwrap();
    assert!((s.x[0] - c(1.0)).norm() < 1e-15 && (s.x[1] - c(1.0)).norm() < 1e-15);

    // decoupled
    let mut rng = seeded_rng(106);
    let a11 = well_conditioned(6, 6, &mut rng);
    let a22 = well_conditioned(2, 2, &mut rng);
    let sys = BlockSystem::from_dense(a11.clone(), CMatrix::zeros(6, 2), CMatrix::zeros(2, 6), a22.clone()).unwrap();
    let b = random_rhs(8, &mut rng);
    let s = schur_solve(&sys, &partial_pinv(&a11, 6), &b, &TsvdConfig::default()).unwrap();
    let xn = a11.clone().lu().solve(&b.rows(0, 6).into_owned()).unwrap();
    let xk = a22.clone().lu().solve(&b.rows(6, 2).into_owned()).unwrap();
    assert!((s.x.rows(0, 6) - xn).norm() < 1e-12 && (s.x.rows(6, 2) - xk).norm() < 1e-12);

    // random 10 + 3 against a dense solve
    let a11 = well_conditioned(10, 10, &mut rng);
    let sys = BlockSystem::from_dense(
        a11.clone(),
        gaussian_matrix(10, 3, &mut rng),
        gaussian_matrix(3, 10, &mut rng),
        gaussian_matrix(3, 3, &mut rng),
    )
    .unwrap();
    let b = random_rhs(13, &mut rng);
    let s = schur_solve(&sys, &partial_pinv(&a11, 10), &b, &TsvdConfig::default()).unwrap();
    let direct = sys.to_dense().lu().solve(&b).unwrap();
    assert!((s.x - &direct).norm() <= 1e-10 * direct.norm());
}

#[test]
fn singular_schur_complement_falls_back() {
    let sys = BlockSystem::from_dense(
        CMatrix::identity(2, 2),
        CMatrix::from_element(2, 1, c(1.0)),
        CMatrix::from_element(1, 2, c(0.5)),
        CMatrix::from_element(1, 1, c(1.0)),
    )
    .unwrap();
    let s = schur_solve(&sys, &CMatrix::identity(2, 2), &complexify(&[1.0, 1.0, 1.0]), &TsvdConfig::default()).unwrap();
    assert!(s.tsvd_fallback);
    assert!(s.x.iter().all(|v| v.is_finite()));
}

#[test]
fn fourier_legendre_small() {
    let basis = EnrichedBasis::new(ConventionalFamily::Fourier1D { n: 17 }, Enrichment::Legendre { k: 2 }).unwrap();
    let grid = grid_equispaced(34).unwrap();
    let sys = assemble_block_system(&basis, &grid).unwrap();
    let z11 = fourier_left_inverse(17, 34).unwrap();
    let t: Vec<f64> = (0..34).map(|m| m as f64 / 34.0).collect();
    let b = complexify(&t.iter().map(|&t| (t * 3.0).exp()).collect::<Vec<_>>());
    let cfg = TsvdConfig::default();
    let rep = enriched_az_solve(&sys, &z11, &b, &cfg).unwrap();
    assert_eq!(rep.step1_shape, (34, 2));
    let dense = sys.to_dense();
    let direct = tsvd_solve(&dense, &b, &cfg).unwrap();
    let direct_res = (&b - &dense * direct).norm();
    let f = error_bound_factors(&sys, &z11).unwrap();
    assert!(rep.residual_norm <= f.actual_i_minus_az * direct_res + 1e-12 * b.norm());
    assert!(rep.residual_identity_gap() <= 1e-12 * (1.0 + b.norm()));
}

#[test]
fn bound_factor_examples() {
    // unit-norm orthogonal A11, exact inverse, A21 = 0
    let mut rng = seeded_rng(107);
    let q = gaussian_matrix(8, 8, &mut rng).qr().q();
    let sys = BlockSystem::from_dense(q.clone(), gaussian_matrix(8, 2, &mut rng), CMatrix::zeros(0, 8), CMatrix::zeros(0, 2)).unwrap();
    let z11 = PartialInverse::from_dense(InverseKind::TwoSided, q.adjoint(), &q).unwrap();
    let f = error_bound_factors(&sys, &z11).unwrap();
    assert!((f.bound_i_minus_az - 2.0).abs() < 1e-6);
    assert!(f.actual_i_minus_az <= 2.0 + 1e-12);

    // Z = 0
    let a11 = well_conditioned(6, 6, &mut rng);
    let sys = BlockSystem::from_dense(a11.clone(), gaussian_matrix(6, 1, &mut rng), gaussian_matrix(2, 6, &mut rng), gaussian_matrix(2, 1, &mut rng)).unwrap();
    let z11 = PartialInverse::from_dense(InverseKind::Generalized { rank_deficit: 6 }, CMatrix::zeros(6, 6), &a11).unwrap();
    let f = error_bound_factors(&sys, &z11).unwrap();
    assert_eq!(f.norm_z, 0.0);
    assert_eq!(f.bound_i_minus_az, 1.0);

    for kind in KINDS {
        for _ in 0..10 {
            let r = random_enriched(kind, &mut rng);
            let f = error_bound_factors(&r.sys, &r.z11).unwrap();
            assert!(f.bound_i_minus_az >= f.actual_i_minus_az, "{kind:?}");
            let exact = svd(&r.z11_dense).unwrap().sigma_max();
            assert!((f.norm_z - exact).abs() <= 1e-6 * exact.max(1e-300) || exact == 0.0);
        }
    }
}

#[test]
fn residual_bound_on_near_solution() {
    // b = A x_hat + noise with known tau and C
    let mut rng = seeded_rng(108);
    let cfg = TsvdConfig::with_epsilon(1e-10);
    for kind in KINDS {
        let r = random_enriched(kind, &mut rng);
        let d = r.sys.dims();
        let x_hat = random_rhs(d.cols(), &mut rng);
        let noise = random_rhs(d.rows(), &mut rng) * c(1e-6);
        let b = &r.dense * &x_hat + &noise;
        let tau = noise.norm();
        let rep = enriched_az_solve(&r.sys, &r.z11, &b, &cfg).unwrap();
        let f = error_bound_factors(&r.sys, &r.z11).unwrap();
        let slack = f.actual_i_minus_az * (tau + cfg.epsilon * svd(&r.dense).unwrap().sigma_max() * x_hat.norm());
        if rep.residual_norm > slack + 1e-12 {
            eprintln!("{kind:?}: residual {} above {}", rep.residual_norm, slack);
        }
        assert!(rep.coeff_norm.is_finite());
    }
}

#[test]
fn generic_az_through_randomized_path() {
    // a 2100 x 2100 operator forces the randomized step-1 solver
    let n = 2100;
    let diag: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64).collect();
    let a = az_core::linalg::FnOperator::new(
        n,
        n,
        {
            let d = diag.clone();
            move |x: &CVector| CVector::from_iterator(x.len(), x.iter().zip(&d).map(|(v, s)| v * *s))
        },
        {
            let d = diag.clone();
            move |x: &CVector| CVector::from_iterator(x.len(), x.iter().zip(&d).map(|(v, s)| v * *s))
        },
    );
    // Z* inverts all but the first 5 diagonal entries
    let z = az_core::linalg::FnOperator::new(
        n,
        n,
        {
            let d = diag.clone();
            move |x: &CVector| {
                CVector::from_iterator(x.len(), x.iter().zip(&d).enumerate().map(|(i, (v, s))| if i < 5 { c(0.0) } else { v / *s }))
            }
        },
        {
            let d = diag.clone();
            move |x: &CVector| {
                CVector::from_iterator(x.len(), x.iter().zip(&d).enumerate().map(|(i, (v, s))| if i < 5 { c(0.0) } else { v / *s }))
            }
        },
    );
    let b = CVector::from_element(n, c(1.0));
    let rep = az_solve(&AzProblem { a: &a, z: &z, b: b.clone(), cfg: TsvdConfig::default() }).unwrap();
    assert!(rep.randomized);
    assert_eq!(rep.step1_rank, 5);
    assert!(rep.residual_norm < 1e-10);
    assert!(rep.residual_identity_gap() <= 1e-12 * (1.0 + b.norm()));
    let _ = densify(&ZeroOperator { rows: 1, cols: 1 });
}
