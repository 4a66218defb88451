//! Monte Carlo simulation of balanced homodyne detection.
//!
//! With an intense local oscillator in mode `ṽ`, the balanced detector
//! measures `D̂ = x̂_φ √N_LO` where `x̂_φ` is the φ-rotated quadrature of the
//! signal projected on `ṽ`. Outcomes are Gaussian with mean
//! `√N_LO · 2Re(e^{−iφ}⟨ṽ, ā_θ⟩)` and variance `N_LO · Γ̃[1,1](φ)`. The
//! calibrated estimator `θ̃ = (D̄ − D₀)/√(N_LO I₀)` is unbiased to first
//! order; its per-sample standard deviation is compared against the
//! Cramér-Rao bound of the underlying state.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fisher;
use crate::gaussian::GaussianState;
use crate::models::{DerivKind, ParametricFamily};
use crate::modes::{inner_product, ComplexField, Grid};
use crate::pipeline::{analyze, mode_frame};
use crate::stats::Moments;

/// Local-oscillator configuration for a homodyne run.
#[derive(Debug, Clone)]
pub struct HomodyneConfig {
    lo_mode: ComplexField,
    pub lo_photons: f64,
    /// Radians; 0 measures the x quadrature of the LO mode.
    pub lo_phase: f64,
    /// Samples averaged into one estimate.
    pub samples: u64,
    pub seed: u64,
}

impl HomodyneConfig {
    pub fn new(
        lo_mode: ComplexField,
        lo_photons: f64,
        lo_phase: f64,
        samples: u64,
        seed: u64,
    ) -> Result<Self> {
        if (lo_mode.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::Config(format!(
                "LO mode must have unit norm, got {}",
                lo_mode.norm()
            )));
        }
        if !(lo_photons > 0.0) {
            return Err(Error::InvalidPhotonNumber(lo_photons));
        }
        if samples == 0 {
            return Err(Error::Config("samples must be ≥ 1".into()));
        }
        Ok(HomodyneConfig { lo_mode, lo_photons, lo_phase, samples, seed })
    }

    pub fn lo_mode(&self) -> &ComplexField {
        &self.lo_mode
    }
}

/// Mean homodyne signal `2√N_LO · Re(e^{−iφ} ⟨ṽ, ā_θ⟩)`.
pub fn homodyne_mean(a_bar_theta: &ComplexField, cfg: &HomodyneConfig) -> Result<f64> {
    let c = inner_product(&cfg.lo_mode, a_bar_theta)?;
    let rotated = Complex64::from_polar(1.0, -cfg.lo_phase) * c;
    Ok(2.0 * cfg.lo_photons.sqrt() * rotated.re)
}

/// Mean and variance of `D̂` for a state expressed in a basis whose first
/// mode is the LO mode.
fn homodyne_law(state: &GaussianState, cfg: &HomodyneConfig) -> (f64, f64) {
    let m = state.mode_count();
    let (s, c) = cfg.lo_phase.sin_cos();
    let mean_q = c * state.mean()[0] + s * state.mean()[m];
    let var_q = c * c * state.cov()[(0, 0)]
        + 2.0 * s * c * state.cov()[(0, m)]
        + s * s * state.cov()[(m, m)];
    (cfg.lo_photons.sqrt() * mean_q, cfg.lo_photons * var_q)
}

/// Draw homodyne outcomes from the Gaussian quadrature law. `stream` selects
/// an independent deterministic substream of the seed, so partitioned
/// sampling reproduces bit-for-bit.
pub fn sample_homodyne(
    state: &GaussianState,
    cfg: &HomodyneConfig,
    count: usize,
    stream: u64,
) -> Result<Vec<f64>> {
    let (mean, var) = homodyne_law(state, cfg);
    let normal = Normal::new(mean, var.sqrt())
        .map_err(|e| Error::Config(format!("bad sampling law: {e}")))?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    Ok((0..count).map(|_| normal.sample(&mut rng)).collect())
}

/// One repetition: the averaged signal and the estimate it yields.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RepetitionRecord {
    pub index: u64,
    pub mean_d: f64,
    pub theta_hat: f64,
}

/// Summary of a simulated estimation experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub model: String,
    pub theta_true: f64,
    pub repetitions: u64,
    pub samples_per_repetition: u64,
    pub lo_photons: f64,
    pub lo_phase: f64,
    pub seed: u64,
    /// Calibration offset: mean signal at θ = 0.
    pub d_zero: f64,
    /// Analytic slope `∂⟨D̂⟩/∂θ` at 0.
    pub slope: f64,
    /// Coherent-state information `I₀ = 4‖ā′‖²`.
    pub i_zero: f64,
    /// Mean of θ̃ over repetitions.
    pub estimate_mean: f64,
    /// Standard deviation of θ̃ over repetitions.
    pub estimate_std: f64,
    /// Standard error of the mean estimate.
    pub estimate_se: f64,
    pub bias: f64,
    /// Sensitivity per single sample, `std(D̂)/|slope|`; infinite when the
    /// LO is blind to θ.
    pub empirical_delta_theta: f64,
    /// Sensitivity for all `repetitions × samples` draws.
    pub empirical_delta_theta_full: f64,
    /// Single-shot Cramér-Rao bound of the state (full information).
    pub qcr_delta_theta: f64,
    /// Bound scaled to all draws.
    pub qcr_delta_theta_full: f64,
    /// empirical/qcr, per sample.
    pub ratio: f64,
    /// Relative standard error of the std estimate, `≈ 1/√(2·draws)`.
    pub ratio_se: f64,
    /// True when the LO mode/phase carries no first-order signal.
    pub no_signal: bool,
}

/// Full experiment output: summary plus per-repetition records.
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub repetitions: Vec<RepetitionRecord>,
}

/// Run a calibrated homodyne estimation experiment at `theta_true`.
///
/// The calibration `D₀` and the slope are computed analytically from the
/// model; draws are simulated from the exact state at `theta_true`.
pub fn run_experiment(
    family: &dyn ParametricFamily,
    theta_true: f64,
    cfg: &HomodyneConfig,
    repetitions: u64,
    grid: &Arc<Grid>,
    kind: DerivKind,
) -> Result<ExperimentRun> {
    if repetitions == 0 {
        return Err(Error::Config("repetitions must be ≥ 1".into()));
    }
    let analysis = analyze(family, grid, kind)?;
    let bundle = &analysis.bundle;
    if bundle.a_bar_prime.norm() <= 1e-12 {
        return Err(Error::ZeroDetectionMode);
    }
    let i_zero = 4.0 * bundle.a_bar_prime_norm_sq();
    let report_bound = fisher::qcr_bound(&analysis.inputs, 1)?;
    let qcr_delta_theta = report_bound.delta_theta_single;

    let d_zero = homodyne_mean(&bundle.a_bar, cfg)?;
    let slope = homodyne_mean(&bundle.a_bar_prime, cfg)?;
    let no_signal = slope.abs() <= 1e-9 * 2.0 * cfg.lo_photons.sqrt() * bundle.a_bar_prime.norm();

    // state at the true parameter, expressed in the LO frame
    let state_theta = family.evaluate(theta_true, grid)?;
    let frame = mode_frame(&cfg.lo_mode, &state_theta.basis)?;
    let mean = frame.mean_quadratures(&state_theta.mean_field)?;
    let cov = frame.cov_to_frame(&state_theta.cov);
    let state = GaussianState::new(mean, cov, frame.basis().len())?;
    state.assert_pure()?;

    let scale = (cfg.lo_photons * i_zero).sqrt();
    let per_rep: Vec<(Moments, RepetitionRecord)> = (0..repetitions)
        .into_par_iter()
        .map(|r| {
            let draws = sample_homodyne(&state, cfg, cfg.samples as usize, r)
                .expect("sampling law already validated");
            let m = Moments::from_slice(&draws);
            let theta_hat = (m.mean - d_zero) / scale;
            (m, RepetitionRecord { index: r, mean_d: m.mean, theta_hat })
        })
        .collect();

    let draw_moments = Moments::merge_all(&per_rep.iter().map(|(m, _)| *m).collect::<Vec<_>>());
    let theta_hats: Vec<f64> = per_rep.iter().map(|(_, rec)| rec.theta_hat).collect();
    let est = Moments::from_slice(&theta_hats);

    let total_draws = draw_moments.count;
    let empirical_delta_theta = if no_signal {
        f64::INFINITY
    } else {
        draw_moments.std() / slope.abs()
    };
    let qcr_full = qcr_delta_theta / (total_draws as f64).sqrt();
    let report = ExperimentReport {
        model: family.id().to_string(),
        theta_true,
        repetitions,
        samples_per_repetition: cfg.samples,
        lo_photons: cfg.lo_photons,
        lo_phase: cfg.lo_phase,
        seed: cfg.seed,
        d_zero,
        slope,
        i_zero,
        estimate_mean: est.mean,
        estimate_std: est.std(),
        estimate_se: est.se_mean(),
        bias: est.mean - theta_true,
        empirical_delta_theta,
        empirical_delta_theta_full: empirical_delta_theta / (total_draws as f64).sqrt(),
        qcr_delta_theta,
        qcr_delta_theta_full: qcr_full,
        ratio: empirical_delta_theta / qcr_delta_theta,
        ratio_se: 1.0 / (2.0 * total_draws as f64).sqrt(),
        no_signal,
    };
    Ok(ExperimentRun { report, repetitions: per_rep.into_iter().map(|(_, r)| r).collect() })
}
