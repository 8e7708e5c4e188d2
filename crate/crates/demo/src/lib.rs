//! Browser wrappers around `rksvd` for the page in `www/`.
//!
//! Everything returns flat `f64` vectors so JavaScript can read the results
//! as `Float64Array`s. The plain Rust functions are what the wasm exports call
//! and what the native tests exercise.

use rksvd::dense::gaussian_matrix;
use rksvd::pca::fit_pca;
use rksvd::rsvd::{singular_values_only, RsvdConfig};
use rksvd::synth::{synth_matrix, SpectrumKind, SynthSpec};
use rksvd::{DenseMatrix, GaussianSampler};

/// `"fast"`, `"sharp"` (uses `beta`) or `"slow"`.
pub fn spectrum_kind(name: &str, beta: f64) -> Result<SpectrumKind, String> {
    match name {
        "fast" => Ok(SpectrumKind::FastDecay),
        "sharp" => SpectrumKind::sharp(beta).map_err(|e| e.to_string()),
        "slow" => Ok(SpectrumKind::SlowDecay),
        other => Err(format!("unknown spectrum '{other}'")),
    }
}

fn planted(kind: SpectrumKind, m: usize, n: usize, seed: u64) -> Result<(DenseMatrix, Vec<f64>), String> {
    let spec = SynthSpec::new(m, n, kind, seed).map_err(|e| e.to_string())?;
    let a = synth_matrix(&spec).map_err(|e| e.to_string())?;
    Ok((a, spec.spectrum()))
}

/// `[planted_1..=k, recovered_1..=k]` for one synthetic matrix.
pub fn recover_spectrum(kind: SpectrumKind, m: usize, n: usize, k: usize, q: usize, seed: u64) -> Result<Vec<f64>, String> {
    let (a, mut sigma) = planted(kind, m, n, seed)?;
    let cfg = RsvdConfig::new(k).with_power_q(q).with_seed(seed);
    let got = singular_values_only(&a, &cfg).map_err(|e| e.to_string())?;
    sigma.truncate(k);
    sigma.extend(got);
    Ok(sigma)
}

/// Worst relative error of the top `k` values against the planted ones, for
/// `q = 0..=max_q`.
pub fn error_by_power_rounds(
    kind: SpectrumKind,
    m: usize,
    n: usize,
    k: usize,
    max_q: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let (a, sigma) = planted(kind, m, n, seed)?;
    (0..=max_q)
        .map(|q| {
            let cfg = RsvdConfig::new(k).with_power_q(q).with_seed(seed);
            let got = singular_values_only(&a, &cfg).map_err(|e| e.to_string())?;
            Ok(got
                .iter()
                .zip(&sigma)
                .map(|(g, s)| (g - s).abs() / s)
                .fold(0.0, f64::max))
        })
        .collect()
}

/// Gaussian cloud with standard deviations `1` and `ratio`, rotated by
/// `angle` radians and shifted to `(1, -0.5)`, followed by its two principal
/// axes.
///
/// Layout: `[mean_x, mean_y, c1_x, c1_y, c2_x, c2_y, var_1, var_2, x_1, y_1, ...]`.
pub fn pca_axes(points: usize, angle: f64, ratio: f64, seed: u64) -> Result<Vec<f64>, String> {
    if points < 3 {
        return Err(format!("need at least 3 points, got {points}"));
    }
    let mut x = gaussian_matrix(&mut GaussianSampler::new(seed), points, 2);
    x.scale_columns(&[1.0, ratio]);
    let (c, s) = (angle.cos(), angle.sin());
    for i in 0..points {
        let row = x.row_mut(i);
        let (u, v) = (row[0], row[1]);
        row[0] = c * u - s * v + 1.0;
        row[1] = s * u + c * v - 0.5;
    }
    let cfg = RsvdConfig::new(2).with_seed(seed);
    let model = fit_pca(&x, 2, &cfg).map_err(|e| e.to_string())?;
    let mut out = model.mean.clone();
    for j in 0..2 {
        out.extend(model.components.column(j));
    }
    out.extend(&model.explained_variance);
    out.extend(x.as_slice());
    Ok(out)
}

#[cfg(target_arch = "wasm32")]
mod web {
    use wasm_bindgen::prelude::*;

    fn js(e: String) -> JsError {
        JsError::new(&e)
    }

    #[wasm_bindgen(js_name = recoverSpectrum)]
    pub fn recover_spectrum(
        kind: &str,
        beta: f64,
        m: usize,
        n: usize,
        k: usize,
        q: usize,
        seed: u64,
    ) -> Result<Vec<f64>, JsError> {
        let kind = super::spectrum_kind(kind, beta).map_err(js)?;
        super::recover_spectrum(kind, m, n, k, q, seed).map_err(js)
    }

    #[wasm_bindgen(js_name = errorByPowerRounds)]
    pub fn error_by_power_rounds(
        kind: &str,
        beta: f64,
        m: usize,
        n: usize,
        k: usize,
        max_q: usize,
        seed: u64,
    ) -> Result<Vec<f64>, JsError> {
        let kind = super::spectrum_kind(kind, beta).map_err(js)?;
        super::error_by_power_rounds(kind, m, n, k, max_q, seed).map_err(js)
    }

    #[wasm_bindgen(js_name = pcaAxes)]
    pub fn pca_axes(points: usize, angle: f64, ratio: f64, seed: u64) -> Result<Vec<f64>, JsError> {
        super::pca_axes(points, angle, ratio, seed).map_err(js)
    }
}
