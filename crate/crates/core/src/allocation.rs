//! Squeezing allocation across modes.
//!
//! Passive mixing of a squeezer bank cannot push any diagonal entry of
//! `Γ⁻¹` above the spectral radius `1/σ_min²`, and the bound is attained
//! exactly when the detection quadrature is an eigenvector of the
//! covariance at the minimal eigenvalue: the most squeezed quadrature goes
//! into the detection mode, uncorrelated with everything else. This module
//! certifies allocations, constructs the optimal routing, and audits the
//! bound over Haar-random passive networks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fisher::gamma_inv_diagonal_entry;
use crate::gaussian::{
    make_squeezed_bank, symplectic_from_unitary, transform_state, SqueezerBank,
    SymplecticTransform,
};

/// Tolerance below which the optimality gap counts as closed.
const OPTIMAL_GAP_TOL: f64 = 1e-8;

/// A bank routed through a passive network, with a designated detection mode.
pub struct AllocationProblem {
    pub bank: SqueezerBank,
    pub network: SymplecticTransform,
    /// 0-based index of the detection mode in the output basis.
    pub detection_index: usize,
}

/// Certificate data for one allocation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AllocationReport {
    /// `(Γ⁻¹)` diagonal entry at the detection x quadrature.
    pub gamma_inv_11: f64,
    /// Spectral radius of `Γ⁻¹`: `1/σ_min²` over every quadrature the bank
    /// offers.
    pub spectral_radius: f64,
    /// `spectral_radius − gamma_inv_11 ≥ 0`.
    pub gap: f64,
    pub optimal: bool,
    /// Squared projection of the detection quadrature direction onto the
    /// minimal-eigenvalue eigenspace of Γ.
    pub eigenmode_alignment: f64,
}

/// Evaluate an allocation: `Γ = O diag(bank) Oᵀ`, detection-entry of `Γ⁻¹`
/// by solve, alignment against the minimal eigenspace.
pub fn evaluate_allocation(problem: &AllocationProblem) -> Result<AllocationReport> {
    let m = problem.bank.len();
    if problem.network.mode_count() != m {
        return Err(Error::Dimension(format!(
            "network acts on {} modes, bank has {}",
            problem.network.mode_count(),
            m
        )));
    }
    if problem.detection_index >= m {
        return Err(Error::Dimension(format!(
            "detection index {} out of range for {m} modes",
            problem.detection_index
        )));
    }
    if !problem.network.is_passive() {
        return Err(Error::PassiveRequired);
    }
    let state = transform_state(&make_squeezed_bank(&problem.bank), &problem.network)?;
    let gamma_inv_11 = gamma_inv_diagonal_entry(state.cov(), problem.detection_index)?;

    let sigma_min_sq = problem.bank.effective_sigma_min_sq();
    let spectral_radius = 1.0 / sigma_min_sq;

    // diag(bank) eigenvalues in (x…,p…) order; eigenvectors are the columns
    // of the network matrix
    let mut diag = Vec::with_capacity(2 * m);
    diag.extend_from_slice(problem.bank.variances());
    diag.extend(problem.bank.variances().iter().map(|v| 1.0 / v));
    let o = problem.network.matrix();
    let d = problem.detection_index;
    let mut alignment = 0.0;
    for (k, &lambda) in diag.iter().enumerate() {
        if (lambda - sigma_min_sq).abs() <= 1e-12 * sigma_min_sq {
            alignment += o[(d, k)] * o[(d, k)];
        }
    }
    let gap = spectral_radius - gamma_inv_11;
    Ok(AllocationReport {
        gamma_inv_11,
        spectral_radius,
        gap,
        optimal: gap <= OPTIMAL_GAP_TOL * spectral_radius.max(1.0),
        eigenmode_alignment: alignment,
    })
}

/// Route the most squeezed quadrature of the bank into `detection_index`,
/// x-aligned. Ties break on the lowest squeezer index; a squeezer whose
/// squeezed quadrature is p gets the quarter-wave rotation folded in.
pub fn optimize_allocation(
    bank: &SqueezerBank,
    detection_index: usize,
) -> Result<(SymplecticTransform, AllocationReport)> {
    let m = bank.len();
    if detection_index >= m {
        return Err(Error::Dimension(format!(
            "detection index {detection_index} out of range for {m} modes"
        )));
    }
    let mut best = 0usize;
    let mut best_var = f64::INFINITY;
    for (i, &v) in bank.variances().iter().enumerate() {
        let eff = v.min(1.0 / v);
        if eff < best_var {
            best_var = eff;
            best = i;
        }
    }
    // permutation swapping `best` into the detection slot
    let mut u = DMatrix::<Complex64>::zeros(m, m);
    for out in 0..m {
        let src = if out == detection_index {
            best
        } else if out == best {
            detection_index
        } else {
            out
        };
        // phase i rotates the squeezed p quadrature onto x
        let entry = if src == best && bank.variances()[best] > 1.0 {
            Complex64::new(0.0, 1.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        u[(out, src)] = entry;
    }
    let network = symplectic_from_unitary(&u)?;
    let report = evaluate_allocation(&AllocationProblem {
        bank: bank.clone(),
        network: network.clone(),
        detection_index,
    })?;
    Ok((network, report))
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the phase
/// fix of the R diagonal.
pub fn haar_unitary(m: usize, rng: &mut ChaCha12Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(m, m, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases = DVector::from_fn(m, |i, _| {
        let d = r[(i, i)];
        if d.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            d / d.norm()
        }
    });
    let mut out = q;
    for j in 0..m {
        for i in 0..m {
            out[(i, j)] *= phases[j];
        }
    }
    out
}

/// One audited random network.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub gamma_inv_11: f64,
    pub eigenmode_alignment: f64,
    /// Largest diagonal entry of `Γ⁻¹` over all 2M quadratures.
    pub max_diag_gamma_inv: f64,
}

/// Result of a random-network audit.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub trials: u64,
    pub seed: u64,
    /// `1/σ_min²`.
    pub spectral_radius: f64,
    /// What the optimizer attains on the same bank.
    pub optimizer_gamma_inv_11: f64,
    pub max_gamma_inv_11: f64,
    pub max_diag_gamma_inv: f64,
    /// Every trial satisfied `diag(Γ⁻¹) ≤ spectral radius + 1e-10` and never
    /// beat the optimizer.
    pub passed: bool,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Sample Haar-random passive networks and check the spectral-radius bound
/// on every diagonal entry of `Γ⁻¹`, plus that no trial beats the optimal
/// allocation.
pub fn random_network_audit(bank: &SqueezerBank, trials: u64, seed: u64) -> Result<AuditReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be ≥ 1".into()));
    }
    let m = bank.len();
    let (_, opt_report) = optimize_allocation(bank, 0)?;
    let spectral_radius = 1.0 / bank.effective_sigma_min_sq();

    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let u = haar_unitary(m, &mut rng);
            let network = symplectic_from_unitary(&u).expect("QR output is unitary");
            let problem = AllocationProblem { bank: bank.clone(), network, detection_index: 0 };
            let report = evaluate_allocation(&problem).expect("valid problem");
            let state = transform_state(&make_squeezed_bank(bank), &problem.network)
                .expect("dimensions match");
            let max_diag = (0..2 * m)
                .map(|k| gamma_inv_diagonal_entry(state.cov(), k).expect("pd covariance"))
                .fold(f64::NEG_INFINITY, f64::max);
            TrialRecord {
                trial: t,
                gamma_inv_11: report.gamma_inv_11,
                eigenmode_alignment: report.eigenmode_alignment,
                max_diag_gamma_inv: max_diag,
            }
        })
        .collect();

    let max_gamma_inv_11 = records.iter().map(|r| r.gamma_inv_11).fold(f64::NEG_INFINITY, f64::max);
    let max_diag = records.iter().map(|r| r.max_diag_gamma_inv).fold(f64::NEG_INFINITY, f64::max);
    let passed = max_diag <= spectral_radius + 1e-10
        && max_gamma_inv_11 <= opt_report.gamma_inv_11 + 1e-10;
    Ok(AuditReport {
        trials,
        seed,
        spectral_radius,
        optimizer_gamma_inv_11: opt_report.gamma_inv_11,
        max_gamma_inv_11,
        max_diag_gamma_inv: max_diag,
        passed,
        records,
    })
}
