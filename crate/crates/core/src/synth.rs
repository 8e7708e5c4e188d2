//! Test matrices `A = U Σ Vᵀ` with Haar-random orthogonal factors and a
//! prescribed singular value law.

use std::fmt;

use crate::dense::gemm::matmul_nt;
use crate::dense::qr::householder_qr;
use crate::dense::rng::{gaussian_matrix, GaussianSampler};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Singular value law, indexed from `i = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectrumKind {
    /// `1 / i²`
    FastDecay,
    /// `0.0001 + 1 / (1 + exp(i + 1 - beta))`, a sigmoid drop around `beta`.
    SharpDecay { beta: f64 },
    /// `1 / i^0.1`
    SlowDecay,
}

impl SpectrumKind {
    pub fn sharp(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sharp decay needs a positive breakout point, got beta={beta}"
            )));
        }
        Ok(SpectrumKind::SharpDecay { beta })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpectrumKind::FastDecay => "fast",
            SpectrumKind::SharpDecay { .. } => "sharp",
            SpectrumKind::SlowDecay => "slow",
        }
    }

    /// The first `n` values of the law.
    pub fn values(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| spectrum_value(*self, i)).collect()
    }
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumKind::SharpDecay { beta } => write!(f, "sharp(beta={beta})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Evaluates the law at the 1-based index `i`.
pub fn spectrum_value(kind: SpectrumKind, i: usize) -> f64 {
    assert!(i >= 1, "spectrum index is 1-based");
    let x = i as f64;
    match kind {
        SpectrumKind::FastDecay => 1.0 / (x * x),
        SpectrumKind::SharpDecay { beta } => 0.0001 + 1.0 / (1.0 + (x + 1.0 - beta).exp()),
        SpectrumKind::SlowDecay => 1.0 / x.powf(0.1),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthSpec {
    pub rows: usize,
    pub cols: usize,
    pub kind: SpectrumKind,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(rows: usize, cols: usize, kind: SpectrumKind, seed: u64) -> Result<Self> {
        if cols == 0 || rows < cols {
            return Err(Error::Shape(format!(
                "synthetic matrices need rows >= cols >= 1, got {rows}x{cols}"
            )));
        }
        if let SpectrumKind::SharpDecay { beta } = kind {
            SpectrumKind::sharp(beta)?;
        }
        Ok(Self {
            rows,
            cols,
            kind,
            seed,
        })
    }

    pub fn spectrum(&self) -> Vec<f64> {
        self.kind.values(self.cols)
    }
}

/// Haar-distributed orthogonal matrix: the Q factor of a Gaussian matrix
/// with the signs fixed so that `R` has a non-negative diagonal.
pub fn random_orthogonal(dim: usize, sampler: &mut GaussianSampler) -> DenseMatrix {
    random_orthonormal_columns(dim, dim, sampler)
}

/// The leading `cols` columns of a Haar orthogonal `rows x rows` matrix.
/// They depend only on the leading columns of the underlying Gaussian draw,
/// so a thin QR of a `rows x cols` draw has the same distribution.
fn random_orthonormal_columns(rows: usize, cols: usize, sampler: &mut GaussianSampler) -> DenseMatrix {
    let g = gaussian_matrix(sampler, rows, cols);
    householder_qr(&g).expect("rows >= cols").q
}

/// `U Σ Vᵀ` with `U` the leading `n` columns of a random `m x m` orthogonal
/// matrix, `V` a random `n x n` orthogonal matrix and `Σ` the planted law.
pub fn synth_matrix(spec: &SynthSpec) -> Result<DenseMatrix> {
    let spec = SynthSpec::new(spec.rows, spec.cols, spec.kind, spec.seed)?;
    let mut sampler = GaussianSampler::new(spec.seed);
    let mut u = random_orthonormal_columns(spec.rows, spec.cols, &mut sampler);
    let v = random_orthogonal(spec.cols, &mut sampler);
    u.scale_columns(&spec.spectrum());
    matmul_nt(&u, &v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_values() {
        assert_eq!(spectrum_value(SpectrumKind::FastDecay, 2), 0.25);
        assert_eq!(spectrum_value(SpectrumKind::SharpDecay { beta: 10.0 }, 9), 0.5001);
        assert_eq!(spectrum_value(SpectrumKind::SlowDecay, 1), 1.0);
    }

    #[test]
    fn sharp_needs_positive_beta() {
        assert!(SpectrumKind::sharp(0.0).is_err());
        assert!(SpectrumKind::sharp(-1.0).is_err());
        assert!(SynthSpec::new(4, 3, SpectrumKind::SharpDecay { beta: -2.0 }, 0).is_err());
    }

    #[test]
    fn sharp_tail_does_not_overflow() {
        let v = spectrum_value(SpectrumKind::SharpDecay { beta: 3.0 }, 5000);
        assert_eq!(v, 0.0001);
    }

    #[test]
    fn wide_shapes_are_rejected() {
        assert!(SynthSpec::new(3, 5, SpectrumKind::FastDecay, 0).is_err());
        assert!(SynthSpec::new(3, 0, SpectrumKind::FastDecay, 0).is_err());
    }

    #[test]
    fn shape_contract() {
        for kind in [SpectrumKind::FastDecay, SpectrumKind::SharpDecay { beta: 2.0 }, SpectrumKind::SlowDecay] {
            let a = synth_matrix(&SynthSpec::new(5, 3, kind, 9).unwrap()).unwrap();
            assert_eq!(a.shape(), (5, 3));
        }
    }

    #[test]
    fn one_by_one_orthogonal_is_sign() {
        let q = random_orthogonal(1, &mut GaussianSampler::new(4));
        assert_eq!(q.get(0, 0).abs(), 1.0);
    }
}
