//! Counter-based standard-normal sampler.
//!
//! The stream is frozen so other implementations can reproduce it bit for bit:
//!
//! * word `i` (0-based) is `splitmix64(seed + (i + 1) * 0x9E3779B97F4A7C15)`,
//!   where `splitmix64` is the SplitMix64 finalizer
//!   (`z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31`),
//!   all arithmetic wrapping mod 2^64;
//! * a uniform is `((word >> 11) + 1) * 2^-53`, which lies in `(0, 1]`;
//! * normals come in Box–Muller pairs from words `2j` and `2j + 1`:
//!   `r = sqrt(-2 ln u1)`, `t = 2π u2`, emitting `r cos t` then `r sin t`.
//!
//! Matrices are filled row-major in draw order. The transcendental functions
//! come from the platform libm, so bit equality across platforms additionally
//! requires correctly rounded `ln`, `sin` and `cos`.

use crate::dense::matrix::DenseMatrix;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct GaussianSampler {
    seed: u64,
    counter: u64,
    spare: Option<f64>,
}

impl GaussianSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            counter: 0,
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    fn next_word(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        splitmix64(self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform draw in `(0, 1]`.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_word() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = self.next_normal());
    }
}

/// `rows x cols` matrix of independent standard-normal draws.
pub fn gaussian_matrix(sampler: &mut GaussianSampler, rows: usize, cols: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols);
    sampler.fill_normal(m.as_mut_slice());
    m
}
