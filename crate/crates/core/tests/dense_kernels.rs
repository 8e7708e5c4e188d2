mod common;

use common::*;
use proptest::prelude::*;
use rksvd::dense::dmat::{read_dmat_from, write_dmat_to};
use rksvd::dense::{
    dense_singular_values, dense_svd, frobenius_norm, gaussian_matrix, gemm, householder_qr, matmul, read_dmat,
    write_dmat, GEMM_BLOCK,
};
use rksvd::synth::{random_orthogonal, synth_matrix, SpectrumKind, SynthSpec};
use rksvd::{DenseMatrix, Error, GaussianSampler};
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn gemm_examples() {
    let b = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
    let id = DenseMatrix::identity(2);
    assert_eq!(gemm(1.0, &id, false, &b, false, 0.0, DenseMatrix::zeros(2, 2)).unwrap(), b);
    assert_eq!(
        gemm(1.0, &b, true, &id, false, 0.0, DenseMatrix::zeros(2, 2)).unwrap(),
        DenseMatrix::from_rows(&[[1.0, 3.0], [2.0, 4.0]])
    );
    let got = gemm(
        2.0,
        &DenseMatrix::from_rows(&[[1.0, 1.0]]),
        false,
        &DenseMatrix::from_rows(&[[1.0], [1.0]]),
        false,
        1.0,
        DenseMatrix::from_rows(&[[3.0]]),
    )
    .unwrap();
    assert_eq!(got.get(0, 0), 7.0);
}

#[test]
fn gemm_mismatch_error_names_both_shapes() {
    let err = matmul(&DenseMatrix::zeros(3, 4), &DenseMatrix::zeros(5, 2)).unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, Error::DimensionMismatch { .. }));
    assert!(msg.contains("3x4") && msg.contains("5x2"), "{msg}");
    assert!(gemm(1.0, &DenseMatrix::zeros(2, 2), false, &DenseMatrix::zeros(2, 2), false, 1.0, DenseMatrix::zeros(3, 2)).is_err());
}

#[test]
fn gemm_across_several_blocks() {
    let n = 2 * GEMM_BLOCK + 7;
    let a = random_matrix(1, n, n + 300);
    let b = random_matrix(2, n + 300, n - 5);
    let got = matmul(&a, &b).unwrap();
    assert!(rel_fro_diff(&got, &naive_matmul(&a, &b)) < 1e-13);
}

#[test]
fn gemm_bilinearity() {
    let (a, b, c) = (random_matrix(3, 20, 20), random_matrix(4, 20, 20), random_matrix(5, 20, 20));
    let (alpha, beta) = (0.7, -1.3);
    let ab = gemm(alpha, &a, false, &b, false, 0.0, DenseMatrix::zeros(20, 20)).unwrap();
    let lhs = gemm(beta, &a, false, &c, false, 1.0, ab).unwrap();
    let mut comb = b.clone();
    for (x, y) in comb.as_mut_slice().iter_mut().zip(c.as_slice()) {
        *x = alpha * *x + beta * y;
    }
    let rhs = matmul(&a, &comb).unwrap();
    assert!(rel_fro_diff(&lhs, &rhs) < 1e-12);
}

#[test]
fn frobenius_examples() {
    assert_eq!(frobenius_norm(&DenseMatrix::from_rows(&[[3.0, 4.0]])), 5.0);
    assert_eq!(frobenius_norm(&DenseMatrix::identity(4)), 2.0);
    let v = frobenius_norm(&DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]));
    assert!((v - 5.477225575051661).abs() < 1e-15);
}

#[test]
fn qr_examples() {
    let f = householder_qr(&DenseMatrix::identity(3)).unwrap();
    assert_eq!((f.q, f.r), (DenseMatrix::identity(3), DenseMatrix::identity(3)));

    let f = householder_qr(&DenseMatrix::from_rows(&[[3.0], [4.0]])).unwrap();
    assert!((f.r.get(0, 0) - 5.0).abs() < 1e-15);
    assert!((f.q.get(0, 0) - 0.6).abs() < 1e-15 && (f.q.get(1, 0) - 0.8).abs() < 1e-15);

    let a = random_matrix(50, 50, 10);
    let f = householder_qr(&a).unwrap();
    assert!(rel_fro_diff(&naive_matmul(&f.q, &f.r), &a) < 1e-13);
    assert!(matches!(householder_qr(&DenseMatrix::zeros(3, 4)), Err(Error::Shape(_))));
}

#[test]
fn qr_is_deterministic() {
    let a = random_matrix(9, 40, 17);
    let (x, y) = (householder_qr(&a).unwrap(), householder_qr(&a).unwrap());
    assert_eq!(x.q, y.q);
    assert_eq!(x.r, y.r);
}

#[test]
fn svd_examples() {
    assert_eq!(dense_svd(&DenseMatrix::from_diag(&[3.0, 2.0, 1.0])).unwrap().sigma, vec![3.0, 2.0, 1.0]);
    assert_eq!(
        dense_svd(&DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])).unwrap().sigma,
        vec![1.0, 1.0]
    );
}

#[test]
fn svd_recovers_planted_spectrum() {
    // U (40x12) and V (12x12) orthonormal, planted [10, 5, 1, 0.5, ...].
    let mut s = GaussianSampler::new(31);
    let u = gram_schmidt(&gaussian_matrix(&mut s, 40, 12));
    let v = random_orthogonal(12, &mut s);
    let planted: Vec<f64> = [10.0, 5.0, 1.0].into_iter().chain((1..=9).map(|i| 0.5 / i as f64)).collect();
    let mut us = u.clone();
    us.scale_columns(&planted);
    let a = naive_gemm(1.0, &us, false, &v, true, 0.0, &DenseMatrix::zeros(40, 12));
    let got = dense_svd(&a).unwrap().sigma;
    assert!(max_rel_err(&got, &planted) < 1e-10);
}

#[test]
fn svd_values_match_gram_eigen_oracle() {
    for (seed, m, n) in [(1, 30, 30), (2, 45, 12), (3, 12, 45), (4, 80, 64)] {
        let a = random_matrix(seed, m, n);
        let got = dense_svd(&a).unwrap().sigma;
        let want = gram_singular_values(&a);
        assert!(max_rel_err(&got, &want) < 1e-10, "seed {seed}");
    }
}

#[test]
fn synth_round_trip_through_full_svd_small() {
    let a = synth_matrix(&SynthSpec::new(3, 3, SpectrumKind::FastDecay, 0).unwrap()).unwrap();
    let s = dense_svd(&a).unwrap().sigma;
    assert!(max_rel_err(&s, &[1.0, 0.25, 1.0 / 9.0]) < 1e-12);
}

#[test]
fn values_only_equals_full_svd_sigma() {
    for (m, n) in [(60, 30), (30, 60), (25, 25)] {
        let a = random_matrix(m as u64, m, n);
        assert_eq!(dense_singular_values(&a).unwrap(), dense_svd(&a).unwrap().sigma);
    }
}

#[test]
fn svd_rejects_non_finite_input() {
    let mut a = DenseMatrix::zeros(3, 3);
    a.set(1, 1, f64::INFINITY);
    assert!(dense_svd(&a).is_err());
    assert!(dense_singular_values(&a).is_err());
}

#[test]
fn sampler_examples() {
    let a = gaussian_matrix(&mut GaussianSampler::new(7), 3, 3);
    let b = gaussian_matrix(&mut GaussianSampler::new(7), 3, 3);
    let c = gaussian_matrix(&mut GaussianSampler::new(8), 3, 3);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn sampler_moments_seed_7() {
    let g = gaussian_matrix(&mut GaussianSampler::new(7), 1000, 1000);
    let x = g.as_slice();
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() <= 0.01, "mean {mean}");
    assert!((0.99..=1.01).contains(&var), "var {var}");
}

#[test]
fn sampler_passes_kolmogorov_smirnov() {
    let mut s = GaussianSampler::new(12345);
    let mut x: Vec<f64> = (0..1_000_000).map(|_| s.next_normal()).collect();
    x.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = normal.cdf(v);
            (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max);
    assert!(d <= 0.005, "KS statistic {d}");
}

#[test]
fn dmat_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.dmat");
    let a = random_matrix(3, 7, 5);
    write_dmat(&path, &a).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 6 + 16 + 8 * 35);
    assert_eq!(read_dmat(&path).unwrap(), a);
}

#[test]
fn dmat_errors_name_file_and_offset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.dmat");
    let mut bytes = Vec::new();
    write_dmat_to(&mut bytes, &DenseMatrix::identity(2)).unwrap();

    let mut magic = bytes.clone();
    magic[3] = b'X';
    std::fs::write(&path, &magic).unwrap();
    let msg = read_dmat(&path).unwrap_err().to_string();
    assert!(msg.contains("bad.dmat") && msg.contains("offset 3"), "{msg}");

    std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
    let err = read_dmat(&path).unwrap_err();
    assert!(err.is_io());
    assert!(err.to_string().contains("offset"), "{err}");

    let mut extra = bytes.clone();
    extra.push(0);
    assert!(read_dmat_from(extra.as_slice(), std::path::Path::new("mem")).is_err());

    let missing = read_dmat(dir.path().join("none.dmat")).unwrap_err();
    assert!(missing.is_io() && missing.to_string().contains("none.dmat"));
}

fn matrix_strategy(max_rows: usize, max_cols: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_rows, 1..=max_cols, any::<u64>()).prop_map(|(m, n, seed)| random_matrix(seed, m, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gemm_matches_triple_loop(
        (m, k, n) in (1usize..=64, 1usize..=64, 1usize..=64),
        ta in any::<bool>(),
        tb in any::<bool>(),
        seed in any::<u64>(),
        alpha in -2.0f64..2.0,
        beta in prop_oneof![Just(0.0), -2.0f64..2.0],
    ) {
        let a = if ta { random_matrix(seed, k, m) } else { random_matrix(seed, m, k) };
        let b = if tb { random_matrix(seed ^ 1, n, k) } else { random_matrix(seed ^ 1, k, n) };
        let c = random_matrix(seed ^ 2, m, n);
        let got = gemm(alpha, &a, ta, &b, tb, beta, c.clone()).unwrap();
        let want = naive_gemm(alpha, &a, ta, &b, tb, beta, &c);
        prop_assert!(rel_fro_diff(&got, &want) <= 1e-12);
    }

    #[test]
    fn qr_factor_invariants((n, extra, seed) in (1usize..=40, 0usize..=40, any::<u64>())) {
        let a = random_matrix(seed, n + extra, n);
        let f = householder_qr(&a).unwrap();
        prop_assert!(orthonormality_defect(&f.q) <= 1e-12);
        prop_assert!(rel_fro_diff(&naive_matmul(&f.q, &f.r), &a) <= 1e-13);
        for i in 0..n {
            prop_assert!(f.r.get(i, i) >= 0.0);
            for j in 0..i {
                prop_assert_eq!(f.r.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn svd_factor_invariants(a in matrix_strategy(40, 40)) {
        let f = dense_svd(&a).unwrap();
        prop_assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(f.sigma.iter().all(|&s| s >= 0.0));
        prop_assert!(orthonormality_defect(&f.u) <= 1e-12);
        prop_assert!(orthonormality_defect(&f.v) <= 1e-12);
        prop_assert!(rel_fro_diff(&f.reconstruct(), &a) <= 1e-12);
        for j in 0..f.len() {
            let col = f.u.column(j);
            let big = col.iter().fold(0.0f64, |m, &x| if x.abs() > m.abs() { x } else { m });
            prop_assert!(big > 0.0);
        }
    }

    #[test]
    fn svd_spectrum_invariant_under_rotation(a in matrix_strategy(30, 20), seed in any::<u64>()) {
        let p = random_orthogonal(a.rows(), &mut GaussianSampler::new(seed));
        let pa = naive_matmul(&p, &a);
        let (x, y) = (dense_svd(&pa).unwrap().sigma, dense_svd(&a).unwrap().sigma);
        for (s, t) in x.iter().zip(&y) {
            prop_assert!((s - t).abs() <= 1e-10 * t);
        }
    }

    #[test]
    fn frobenius_equals_root_sum_of_squared_sigma(a in matrix_strategy(30, 30)) {
        let s = dense_svd(&a).unwrap().sigma;
        let from_sigma = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((frobenius_norm(&a) - from_sigma).abs() <= 1e-10 * from_sigma);
    }

    #[test]
    fn dmat_stream_round_trip(a in matrix_strategy(12, 12)) {
        let mut buf = Vec::new();
        write_dmat_to(&mut buf, &a).unwrap();
        prop_assert_eq!(read_dmat_from(buf.as_slice(), std::path::Path::new("mem")).unwrap(), a);
    }

    #[test]
    fn sampler_is_reproducible(seed in any::<u64>(), rows in 1usize..20, cols in 1usize..20) {
        let a = gaussian_matrix(&mut GaussianSampler::new(seed), rows, cols);
        let b = gaussian_matrix(&mut GaussianSampler::new(seed), rows, cols);
        prop_assert_eq!(a, b);
    }
}
