mod common;

use common::*;
use proptest::prelude::*;
use stpt_core::decomp::*;
use stpt_core::linalg::kron;
use stpt_core::nkp::nearest_kron;
use stpt_core::stp::mode_stp;
use stpt_core::tensor::{mode_product, refold, unfold};
use stpt_core::{svd, DenseTensor, Matrix};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(32)
}

fn divisor(n: usize, pick: usize) -> usize {
    let ds: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
    ds[pick % ds.len()]
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn full_error_matches_rearrangement_tail(
        rows in 1usize..17, cols in 1usize..17, picks in (any::<usize>(), any::<usize>()),
        seed in any::<u64>(),
    ) {
        let mut g = rng(seed);
        let a = matrix(&mut g, rows, cols);
        let (s1, s2) = (divisor(rows, picks.0), divisor(cols, picks.1));
        let f = svd_stp(&a, s1, s2).unwrap();
        let measured = matrix_diff(&a, &reconstruct_svd_stp(&f).unwrap());
        let sv = oracle_singular_values(&oracle_rearrange(&a, s1, s2));
        let expected = sv[1..].iter().map(|s| s * s).sum::<f64>().sqrt();
        prop_assert!((measured - expected).abs() <= 1e-8 * expected + 1e-12 * a.frobenius_norm(),
            "{measured} vs {expected}");
    }

    #[test]
    fn truncated_error_is_bounded_and_monotone(
        rows in 1usize..5, cols in 1usize..5, s in (1usize..4, 1usize..4), seed in any::<u64>(),
    ) {
        let mut g = rng(seed);
        let (s1, s2) = s;
        let a = matrix(&mut g, rows * s1, cols * s2);
        let p = rows.min(cols);
        let mut last = f64::INFINITY;
        for r in 1..=p {
            let f = truncated_svd_stp(&a, s1, s2, r).unwrap();
            let err = matrix_diff(&a, &reconstruct_svd_stp(&f).unwrap());
            prop_assert!(err <= svd_stp_error_bound(&f) + 1e-10);
            prop_assert!(err <= last + 1e-12);
            last = err;
        }
    }

    #[test]
    fn factors_are_orthonormal_and_blocks_ordered(
        rows in 1usize..6, cols in 1usize..6, s in (1usize..4, 1usize..4), seed in any::<u64>(),
    ) {
        let mut g = rng(seed);
        let a = matrix(&mut g, rows * s.0, cols * s.1);
        let f = svd_stp(&a, s.0, s.1).unwrap();
        for q in [&f.u, &f.v] {
            let gram = q.t_matmul(q).unwrap();
            prop_assert!(matrix_diff(&gram, &Matrix::identity(q.cols())) <= 1e-10);
        }
        let norms = f.block_norms();
        prop_assert!(norms.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn nkp_is_first_order_stationary(seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = matrix(&mut g, 4, 4);
        let r = nearest_kron(&a, 2, 2).unwrap();
        let base = matrix_diff(&a, &kron(&r.b, &r.c).unwrap());
        for _ in 0..8 {
            let db = matrix(&mut g, 2, 2);
            let dc = matrix(&mut g, 2, 2);
            let b = r.b.add(&db.scaled(1e-3 / db.frobenius_norm())).unwrap();
            let c = r.c.add(&dc.scaled(1e-3 / dc.frobenius_norm())).unwrap();
            let perturbed = matrix_diff(&a, &kron(&b, &c).unwrap());
            prop_assert!(perturbed >= base - 1e-9);
        }
        let alpha = 1.7;
        let scaled = kron(&r.b.scaled(alpha), &r.c.scaled(1.0 / alpha)).unwrap();
        prop_assert!(matrix_diff(&scaled, &kron(&r.b, &r.c).unwrap()) <= 1e-14 * a.frobenius_norm());
    }

    #[test]
    fn hosvd_error_is_bounded(ranks in prop::collection::vec(1usize..=4, 3), seed in any::<u64>()) {
        let mut g = rng(seed);
        let t = tensor(&mut g, &[8, 8, 8]);
        let f = truncated_hosvd_stp(&t, &[2, 2, 2], &ranks).unwrap();
        let dims: Vec<usize> = ranks.iter().map(|r| 2 * r).collect();
        prop_assert_eq!(f.core.dims(), &dims[..]);
        let err = tensor_diff(&t, &reconstruct_hosvd(&f).unwrap());
        prop_assert!(err <= hosvd_error_bound(&f) + 1e-10);

        // Reconstruction equals the projection t ⋉₁ (U₁U₁ᵀ) ⋉₂ ⋯.
        let mut proj = t.clone();
        for (k, u) in f.factors.iter().enumerate() {
            proj = mode_stp(&proj, k + 1, &u.matmul_t(u).unwrap()).unwrap();
        }
        let rec = reconstruct_hosvd(&f).unwrap();
        prop_assert!(tensor_diff(&rec, &proj) <= 1e-11 * t.frobenius_norm());
    }
}

#[test]
fn unit_factors_reduce_to_svd() {
    let mut g = rng(11);
    for _ in 0..5 {
        let a = matrix(&mut g, 9, 6);
        let f = svd_stp(&a, 1, 1).unwrap();
        let oracle = oracle_singular_values(&a);
        for (x, y) in f.block_norms().iter().zip(&oracle) {
            assert!((x - y).abs() <= 1e-10);
        }
        for r in 1..=6 {
            let t = truncated_svd_stp(&a, 1, 1, r).unwrap();
            let conventional = svd(&a).unwrap().truncate(r).unwrap().reconstruct();
            let rec = reconstruct_svd_stp(&t).unwrap();
            assert!(matrix_diff(&rec, &conventional) <= 1e-10 * a.frobenius_norm());
        }
    }
}

#[test]
fn unit_factors_reduce_to_conventional_hosvd() {
    let mut g = rng(12);
    let t = tensor(&mut g, &[6, 6, 6]);
    let f = hosvd_stp(&t, &[1, 1, 1]).unwrap();
    let mut core = t.clone();
    for k in 1..=3 {
        let u = svd(&unfold(&t, k).unwrap()).unwrap().u;
        assert!(matrix_diff(&u, &f.factors[k - 1]) <= 1e-10);
        core = mode_product(&core, k, &u.transpose()).unwrap();
    }
    assert!(tensor_diff(&core, &f.core) <= 1e-10 * t.frobenius_norm());
    // All-orthogonality: every modal Gram matrix of the core is diagonal.
    for k in 1..=3 {
        let bk = unfold(&f.core, k).unwrap();
        let gram = bk.matmul_t(&bk).unwrap();
        let off: f64 = (0..6)
            .flat_map(|i| (0..6).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| gram[(i, j)].powi(2))
            .sum();
        assert!(off.sqrt() <= 1e-10 * gram.frobenius_norm());
    }
}

#[test]
fn full_hosvd_reconstructs_exactly() {
    let mut g = rng(13);
    let t = tensor(&mut g, &[8, 8, 8]);
    let f = hosvd_stp(&t, &[2, 2, 2]).unwrap();
    assert!(tensor_diff(&t, &reconstruct_hosvd(&f).unwrap()) <= 1e-10 * t.frobenius_norm());
    for u in &f.factors {
        assert!(matrix_diff(&u.t_matmul(u).unwrap(), &Matrix::identity(u.cols())) <= 1e-10);
    }
}

#[test]
fn core_is_block_diagonal_for_exact_kronecker_unfolding() {
    // Mode-1 unfolding of an 8×4×6 tensor is 8×24 = B (4×6) ⊗ C (2×4).
    let mut g = rng(14);
    let dims = [8, 4, 6];
    let s = [2usize, 2, 2];
    let a1 = kron(&matrix(&mut g, 4, 6), &matrix(&mut g, 2, 4)).unwrap();
    let t = refold(&a1, 1, &dims).unwrap();
    let f = hosvd_stp(&t, &s).unwrap();
    assert!(f.modes[0].tail_energy <= 1e-24 * t.frobenius_norm().powi(2));

    let mode1 = svd_stp(&a1, 2, 4).unwrap();
    let b1 = unfold(&f.core, 1).unwrap();
    let gram = b1.matmul_t(&b1).unwrap();
    let scale = b1.frobenius_norm().powi(2);
    let cct = mode1.c.matmul_t(&mode1.c).unwrap();
    let mut off = 0.0;
    for bi in 0..4 {
        for bj in 0..4 {
            let block = gram.submatrix(2 * bi, 2 * bj, 2, 2);
            if bi == bj {
                let sigma = mode1.sigma_b[bi];
                let expected = cct.scaled(sigma * sigma);
                assert!(matrix_diff(&block, &expected) <= 1e-9 * scale);
            } else {
                off += block.frobenius_norm().powi(2);
            }
        }
    }
    assert!(off.sqrt() <= 1e-9 * scale);
}

#[test]
fn d2_hosvd_matches_matrix_example() {
    let t = DenseTensor::from_matrix(Matrix::from_diag(&[2.0, 2.0, 1.0, 1.0]));
    let f = truncated_hosvd_stp(&t, &[2, 2], &[1, 1]).unwrap();
    let rec = reconstruct_hosvd(&f).unwrap().into_matrix().unwrap();
    assert!(matrix_diff(&rec, &Matrix::from_diag(&[2.0, 2.0, 0.0, 0.0])) < 1e-14);
    assert!((hosvd_error_bound(&f) - 2.0).abs() < 1e-12);
    // Per-mode components equal the matrix bound for A and Aᵀ.
    let m = truncated_svd_stp(&Matrix::from_diag(&[2.0, 2.0, 1.0, 1.0]), 2, 2, 1).unwrap();
    let per_mode = svd_stp_error_bound(&m);
    assert!((hosvd_error_bound(&f) - (2.0 * per_mode * per_mode).sqrt()).abs() < 1e-12);
}
