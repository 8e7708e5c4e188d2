mod common;

use common::*;
use proptest::prelude::*;
use rksvd::dense::dense_singular_values;
use rksvd::synth::{random_orthogonal, spectrum_value, synth_matrix, SpectrumKind, SynthSpec};
use rksvd::{DenseMatrix, GaussianSampler};

/// |det| by Gaussian elimination with partial pivoting.
fn abs_det(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, p);
        let d = m[c][c];
        det *= d;
        for r in c + 1..n {
            let f = m[r][c] / d;
            for j in c..n {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    det.abs()
}

#[test]
fn random_orthogonal_dim_30() {
    let q = random_orthogonal(30, &mut GaussianSampler::new(5));
    assert!(orthonormality_defect(&q) < 1e-12);
    assert!((abs_det(&q) - 1.0).abs() < 1e-10);
}

#[test]
fn random_orthogonal_dim_1_is_a_sign() {
    for seed in 0..8 {
        let q = random_orthogonal(1, &mut GaussianSampler::new(seed));
        assert_eq!(q.get(0, 0).abs(), 1.0);
    }
}

#[test]
fn distinct_seeds_give_distinct_rotations() {
    for seed in 0..20u64 {
        let a = random_orthogonal(10, &mut GaussianSampler::new(seed));
        let b = random_orthogonal(10, &mut GaussianSampler::new(seed + 1));
        assert!(rel_fro_diff(&a, &b) * naive_fro(&b) > 0.1);
    }
}

#[test]
fn law_examples() {
    assert_eq!(spectrum_value(SpectrumKind::FastDecay, 2), 0.25);
    assert_eq!(spectrum_value(SpectrumKind::sharp(10.0).unwrap(), 9), 0.5001);
    assert_eq!(spectrum_value(SpectrumKind::SlowDecay, 1), 1.0);
    assert!(SpectrumKind::sharp(0.0).is_err());
    assert!(SpectrumKind::sharp(-1.0).is_err());
}

#[test]
fn shape_contract() {
    for kind in [SpectrumKind::FastDecay, SpectrumKind::sharp(2.0).unwrap(), SpectrumKind::SlowDecay] {
        let a = synth_matrix(&SynthSpec::new(5, 3, kind, 1).unwrap()).unwrap();
        assert_eq!(a.shape(), (5, 3));
    }
    assert!(SynthSpec::new(3, 5, SpectrumKind::FastDecay, 0).is_err());
    assert!(SynthSpec::new(3, 0, SpectrumKind::FastDecay, 0).is_err());
}

#[test]
fn sharp_breakout_bounds() {
    // The upper bound first holds five places past k; see the ledger for k+2.
    for k in [1usize, 3, 10, 40, 90] {
        let spec = SynthSpec::new(100, 100, SpectrumKind::sharp(k as f64 + 1.0).unwrap(), 2).unwrap();
        let sigma = dense_singular_values(&synth_matrix(&spec).unwrap()).unwrap();
        for (i, s) in sigma.iter().enumerate().map(|(i, s)| (i + 1, *s)) {
            if i < k {
                assert!(s >= 0.5, "k={k} i={i} {s}");
            }
            if i >= k + 5 {
                assert!(s <= 0.0101, "k={k} i={i} {s}");
            }
        }
    }
}

fn kind_strategy() -> impl Strategy<Value = SpectrumKind> {
    prop_oneof![
        Just(SpectrumKind::FastDecay),
        (0.01f64..250.0).prop_map(|b| SpectrumKind::SharpDecay { beta: b }),
        Just(SpectrumKind::SlowDecay),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn planted_spectrum_round_trip(
        kind in kind_strategy(),
        (n, extra) in (1usize..=200, 0usize..=200),
        seed in any::<u64>(),
    ) {
        let m = (n + extra).min(200);
        let spec = SynthSpec::new(m, n, kind, seed).unwrap();
        let sigma = dense_singular_values(&synth_matrix(&spec).unwrap()).unwrap();
        prop_assert!(max_rel_err(&sigma, &spec.spectrum()) <= 1e-11);
    }
}

proptest! {
    #[test]
    fn spectra_positive_and_non_increasing(kind in kind_strategy(), n in 1usize..500) {
        let v = kind.values(n);
        prop_assert!(v.iter().all(|&s| s > 0.0));
        prop_assert!(v.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn generation_is_deterministic(
        kind in kind_strategy(),
        (n, extra) in (1usize..=30, 0usize..=30),
        seed in any::<u64>(),
    ) {
        let spec = SynthSpec::new(n + extra, n, kind, seed).unwrap();
        prop_assert_eq!(synth_matrix(&spec).unwrap(), synth_matrix(&spec).unwrap());
        let q = random_orthogonal(n, &mut GaussianSampler::new(seed));
        prop_assert_eq!(q, random_orthogonal(n, &mut GaussianSampler::new(seed)));
    }
}
