//! Quantum Fisher information and Cramér-Rao bounds for pure Gaussian states.
//!
//! The full information splits into a mean-field term `X̄′ᵀΓ⁻¹X̄′` and a
//! noise term `tr((Γ′Γ⁻¹)²)/4`. In the detection-mode basis the mean term
//! collapses to `4 (Γ⁻¹)[1,1] ‖ā′‖²`, and for a coherent state it reduces to
//! `I₀ = 4‖ā′‖² = N(4‖u′‖² + (N′/N)²)`.
//!
//! Every quantity, including `(Γ⁻¹)[1,1]`, is evaluated at the estimation
//! point θ = 0.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::error::{Error, Result};

fn cholesky_of(cov: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if cov.nrows() != cov.ncols() {
        return Err(Error::Covariance(format!("matrix is {}×{}", cov.nrows(), cov.ncols())));
    }
    let asym = (cov - cov.transpose()).amax();
    if asym > 1e-12 {
        return Err(Error::Covariance(format!("asymmetry {asym:.3e} exceeds 1e-12")));
    }
    cov.clone()
        .cholesky()
        .ok_or_else(|| Error::Covariance("matrix is not positive definite".into()))
}

/// Full Gaussian Fisher information, split into
/// `(mean term, covariance term)`. Entries of `Γ⁻¹` are obtained through
/// Cholesky solves, never an explicit inverse.
pub fn qfi_full(
    mean_prime: &DVector<f64>,
    cov: &DMatrix<f64>,
    cov_prime: &DMatrix<f64>,
) -> Result<(f64, f64)> {
    if mean_prime.len() != cov.nrows() || cov_prime.nrows() != cov.nrows() || cov_prime.ncols() != cov.ncols() {
        return Err(Error::Dimension(format!(
            "mean′ has length {}, Γ is {}×{}, Γ′ is {}×{}",
            mean_prime.len(),
            cov.nrows(),
            cov.ncols(),
            cov_prime.nrows(),
            cov_prime.ncols()
        )));
    }
    let chol = cholesky_of(cov)?;
    let i_mean = (mean_prime.transpose() * chol.solve(mean_prime))[(0, 0)];
    // tr((Γ′Γ⁻¹)²) = tr((Γ⁻¹Γ′)²)
    let k = chol.solve(cov_prime);
    let n = k.nrows();
    let mut trace = 0.0;
    for i in 0..n {
        for j in 0..n {
            trace += k[(i, j)] * k[(j, i)];
        }
    }
    Ok((i_mean.max(0.0), (trace / 4.0).max(0.0)))
}

/// One diagonal entry of `Γ⁻¹`, by solve.
pub fn gamma_inv_diagonal_entry(cov: &DMatrix<f64>, index: usize) -> Result<f64> {
    if index >= cov.nrows() {
        return Err(Error::Dimension(format!(
            "index {index} out of range for {}×{} matrix",
            cov.nrows(),
            cov.ncols()
        )));
    }
    let chol = cholesky_of(cov)?;
    let mut e = DVector::zeros(cov.nrows());
    e[index] = 1.0;
    Ok(chol.solve(&e)[index])
}

/// Detection-basis form of the mean-field information:
/// `4 (Γ⁻¹)[1,1] ‖ā′‖²`, where index 1 is the x quadrature of the detection
/// mode under the real-positive phase convention.
pub fn qfi_reduced(a_bar_prime_norm_sq: f64, cov_in_detection_basis: &DMatrix<f64>) -> Result<f64> {
    if a_bar_prime_norm_sq < 0.0 {
        return Err(Error::Dimension("‖ā′‖² must be non-negative".into()));
    }
    Ok(4.0 * gamma_inv_diagonal_entry(cov_in_detection_basis, 0)? * a_bar_prime_norm_sq)
}

/// Coherent-state information `I₀ = N (4‖u′‖² + (N′/N)²)`.
pub fn coherent_info(n: f64, u_prime_norm_sq: f64, n_prime: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::InvalidPhotonNumber(n));
    }
    let ratio = n_prime / n;
    Ok(n * (4.0 * u_prime_norm_sq + ratio * ratio))
}

/// Optimal-resource bound `σ_min / √(QN) · (4‖u′‖² + (N′/N)²)^{−1/2}`:
/// the Cramér-Rao limit when the most squeezed quadrature available
/// (standard deviation `σ_min`) sits in the detection mode, uncorrelated
/// with every other mode.
pub fn optimal_bound(
    sigma_min: f64,
    n: f64,
    u_prime_norm_sq: f64,
    n_prime: f64,
    q: u64,
) -> Result<f64> {
    if !(sigma_min > 0.0) {
        return Err(Error::InvalidVariance(sigma_min));
    }
    if q == 0 {
        return Err(Error::Config("repetition count q must be ≥ 1".into()));
    }
    let i_zero = coherent_info(n, u_prime_norm_sq, n_prime)?;
    if i_zero <= 0.0 {
        return Err(Error::NoInformation);
    }
    Ok(sigma_min / (q as f64 * i_zero).sqrt())
}

/// Inputs for the linearized (detection-basis) route of the bound.
#[derive(Debug, Clone)]
pub struct ReducedInputs {
    pub a_bar_prime_norm_sq: f64,
    pub cov_in_detection_basis: DMatrix<f64>,
    pub n: f64,
    pub u_prime_norm_sq: f64,
    pub n_prime: f64,
}

/// Inputs for [`qcr_bound`]: the full-formula pieces plus, when a detection
/// mode exists, the linearized-route pieces.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    pub mean_prime: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub cov_prime: DMatrix<f64>,
    pub reduced: Option<ReducedInputs>,
}

/// All sensitivity quantities for one model at one estimation point.
#[derive(Debug, Clone, Serialize)]
pub struct FisherReport {
    /// `X̄′ᵀΓ⁻¹X̄′`
    pub i_mean_term: f64,
    /// `tr((Γ′Γ⁻¹)²)/4`
    pub i_cov_term: f64,
    /// Sum of the two terms: the quantum Fisher information.
    pub i_full: f64,
    /// Fraction of the information carried by the covariance term; the
    /// linearized bound is only as good as this is small.
    pub cov_term_ratio: f64,
    /// Detection-basis mean-field information `4 (Γ⁻¹)[1,1] ‖ā′‖²`.
    pub i_reduced: Option<f64>,
    /// Coherent-state information `I₀ = 4‖ā′‖²`.
    pub i_zero: Option<f64>,
    /// `(Γ⁻¹)[1,1]` in the detection basis.
    pub gamma_inv_11: Option<f64>,
    /// Photon number `N` at the estimation point.
    pub n: Option<f64>,
    /// Mode-shape factor `‖u′‖²`.
    pub u_prime_norm_sq: Option<f64>,
    /// Photon-rate factor `N′`.
    pub n_prime: Option<f64>,
    /// Repetition count the bounds below are scaled for.
    pub q: u64,
    /// Full bound `1/√(Q·i_full)`.
    pub delta_theta_min: f64,
    /// Same, for a single repetition.
    pub delta_theta_single: f64,
    /// Linearized bound `1/√(Q·i_reduced)` (mean-field information only).
    pub bound_linearized: Option<f64>,
}

/// Assemble a [`FisherReport`] for `q` repetitions.
pub fn qcr_bound(inputs: &BoundInputs, q: u64) -> Result<FisherReport> {
    if q == 0 {
        return Err(Error::Config("repetition count q must be ≥ 1".into()));
    }
    let (i_mean_term, i_cov_term) = qfi_full(&inputs.mean_prime, &inputs.cov, &inputs.cov_prime)?;
    let i_full = i_mean_term + i_cov_term;
    if i_full <= 0.0 {
        return Err(Error::NoInformation);
    }
    let mut i_reduced = None;
    let mut i_zero = None;
    let mut gamma_inv_11 = None;
    let mut bound_linearized = None;
    let mut n = None;
    let mut u_prime_norm_sq = None;
    let mut n_prime = None;
    if let Some(red) = &inputs.reduced {
        let g11 = gamma_inv_diagonal_entry(&red.cov_in_detection_basis, 0)?;
        let ir = 4.0 * g11 * red.a_bar_prime_norm_sq;
        gamma_inv_11 = Some(g11);
        i_reduced = Some(ir);
        i_zero = Some(coherent_info(red.n, red.u_prime_norm_sq, red.n_prime)?);
        n = Some(red.n);
        u_prime_norm_sq = Some(red.u_prime_norm_sq);
        n_prime = Some(red.n_prime);
        if ir > 0.0 {
            bound_linearized = Some(1.0 / (q as f64 * ir).sqrt());
        }
    }
    Ok(FisherReport {
        i_mean_term,
        i_cov_term,
        i_full,
        cov_term_ratio: i_cov_term / i_full,
        i_reduced,
        i_zero,
        gamma_inv_11,
        n,
        u_prime_norm_sq,
        n_prime,
        q,
        delta_theta_min: 1.0 / (q as f64 * i_full).sqrt(),
        delta_theta_single: 1.0 / i_full.sqrt(),
        bound_linearized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{make_squeezed_bank, symplectic_from_unitary, transform_state, SqueezerBank};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn zero_derivatives_give_zero_information() {
        let (m, c) = qfi_full(&DVector::zeros(4), &DMatrix::identity(4, 4), &DMatrix::zeros(4, 4)).unwrap();
        assert_eq!((m, c), (0.0, 0.0));
    }

    #[test]
    fn coherent_phase_mean_term_is_4n() {
        let n: f64 = 100.0;
        let mean_prime = DVector::from_vec(vec![0.0, 2.0 * n.sqrt()]);
        let (m, c) = qfi_full(&mean_prime, &DMatrix::identity(2, 2), &DMatrix::zeros(2, 2)).unwrap();
        assert_relative_eq!(m, 400.0, max_relative = 1e-12);
        assert_eq!(c, 0.0);
    }

    #[test]
    fn squeeze_param_cov_term_is_two() {
        let cov_prime = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -2.0]));
        let (m, c) = qfi_full(&DVector::zeros(2), &DMatrix::identity(2, 2), &cov_prime).unwrap();
        assert_eq!(m, 0.0);
        assert_relative_eq!(c, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn reduced_form_coherent_case() {
        let i = qfi_reduced(100.0, &DMatrix::identity(2, 2)).unwrap();
        assert_relative_eq!(i, 400.0, max_relative = 1e-12);
    }

    #[test]
    fn reduced_form_with_squeezed_detection_mode() {
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 1.0, 4.0, 1.0]));
        let i = qfi_reduced(100.0, &cov).unwrap();
        assert_relative_eq!(i, 1600.0, max_relative = 1e-12);
    }

    #[test]
    fn entangling_the_detection_mode_loses_information() {
        // 50:50 mix of squeezers (0.25, 1); (Γ⁻¹)[1,1] drops from 4 to 2.5
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let u = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(inv_sqrt2, 0.0), Complex64::new(inv_sqrt2, 0.0),
            Complex64::new(inv_sqrt2, 0.0), Complex64::new(-inv_sqrt2, 0.0),
        ]);
        let t = symplectic_from_unitary(&u).unwrap();
        let s = make_squeezed_bank(&SqueezerBank::new(vec![0.25, 1.0]).unwrap());
        let mixed = transform_state(&s, &t).unwrap();

        let g11 = gamma_inv_diagonal_entry(mixed.cov(), 0).unwrap();
        // brute-force oracle: explicit inverse
        let inv = mixed.cov().clone().try_inverse().unwrap();
        assert_relative_eq!(g11, inv[(0, 0)], max_relative = 1e-12);
        assert_relative_eq!(g11, 2.5, max_relative = 1e-12);
        assert!(g11 < 4.0);

        let i = qfi_reduced(1.0, mixed.cov()).unwrap();
        assert_relative_eq!(i, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn coherent_info_examples() {
        assert_relative_eq!(coherent_info(100.0, 1.0, 0.0).unwrap(), 400.0);
        assert_relative_eq!(coherent_info(100.0, 0.25, 0.0).unwrap(), 100.0);
        assert_relative_eq!(coherent_info(100.0, 0.0, 20.0).unwrap(), 4.0);
        assert!(matches!(coherent_info(0.0, 1.0, 0.0), Err(Error::InvalidPhotonNumber(_))));
    }

    fn phase_inputs(n: f64, q_detection_sigma_sq: f64) -> BoundInputs {
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![
            q_detection_sigma_sq,
            1.0 / q_detection_sigma_sq,
        ]));
        BoundInputs {
            mean_prime: DVector::from_vec(vec![2.0 * n.sqrt(), 0.0]),
            cov: cov.clone(),
            cov_prime: DMatrix::zeros(2, 2),
            reduced: Some(ReducedInputs {
                a_bar_prime_norm_sq: n,
                cov_in_detection_basis: cov,
                n,
                u_prime_norm_sq: 1.0,
                n_prime: 0.0,
            }),
        }
    }

    #[test]
    fn shot_noise_phase_bound() {
        let report = qcr_bound(&phase_inputs(100.0, 1.0), 1).unwrap();
        assert_relative_eq!(report.delta_theta_min, 0.05, max_relative = 1e-12);
        assert_relative_eq!(report.bound_linearized.unwrap(), 0.05, max_relative = 1e-12);
        let report = qcr_bound(&phase_inputs(100.0, 1.0), 10_000).unwrap();
        assert_relative_eq!(report.delta_theta_min, 0.0005, max_relative = 1e-12);
    }

    #[test]
    fn displacement_bound_is_w_over_2_sqrt_n() {
        let n: f64 = 1e6;
        let inputs = BoundInputs {
            mean_prime: DVector::from_vec(vec![2.0 * n.sqrt(), 0.0, 0.0, 0.0]),
            cov: DMatrix::identity(4, 4),
            cov_prime: DMatrix::zeros(4, 4),
            reduced: Some(ReducedInputs {
                a_bar_prime_norm_sq: n,
                cov_in_detection_basis: DMatrix::identity(4, 4),
                n,
                u_prime_norm_sq: 1.0,
                n_prime: 0.0,
            }),
        };
        let report = qcr_bound(&inputs, 1).unwrap();
        assert_relative_eq!(report.delta_theta_min, 5e-4, max_relative = 1e-12);
    }

    #[test]
    fn no_information_is_reported() {
        let inputs = BoundInputs {
            mean_prime: DVector::zeros(2),
            cov: DMatrix::identity(2, 2),
            cov_prime: DMatrix::zeros(2, 2),
            reduced: None,
        };
        assert!(matches!(qcr_bound(&inputs, 1), Err(Error::NoInformation)));
    }

    #[test]
    fn optimal_bound_examples() {
        // σ_min = 1 reduces to the coherent bound
        assert_relative_eq!(optimal_bound(1.0, 100.0, 1.0, 0.0, 1).unwrap(), 0.05);
        // 6 dB: σ_min² = 0.25
        assert_relative_eq!(optimal_bound(0.5, 100.0, 1.0, 0.0, 1).unwrap(), 0.025);
        // σ_min² = 0.1, displacement w = 1, N = 10⁶
        assert_relative_eq!(
            optimal_bound(0.1f64.sqrt(), 1e6, 1.0, 0.0, 1).unwrap(),
            0.1f64.sqrt() * 5e-4,
            max_relative = 1e-12
        );
    }

    #[test]
    fn mean_term_is_invariant_under_passive_basis_change() {
        let n: f64 = 100.0;
        let s = make_squeezed_bank(&SqueezerBank::new(vec![0.25, 1.0]).unwrap());
        let mean_prime = DVector::from_vec(vec![2.0 * n.sqrt(), 0.0, 0.0, 0.0]);
        let (i0, _) = qfi_full(&mean_prime, s.cov(), &DMatrix::zeros(4, 4)).unwrap();
        let u = DMatrix::from_row_slice(2, 2, &[
            Complex64::from_polar(0.6, 0.2), Complex64::from_polar(0.8, 1.1),
            Complex64::from_polar(0.8, -0.4), Complex64::from_polar(0.6, 0.5),
        ]);
        let q = u.qr().q();
        let t = symplectic_from_unitary(&q).unwrap();
        let moved = transform_state(&s, &t).unwrap();
        let mp = t.matrix() * &mean_prime;
        let (i1, _) = qfi_full(&mp, moved.cov(), &DMatrix::zeros(4, 4)).unwrap();
        assert_relative_eq!(i0, i1, max_relative = 1e-8);
    }

    #[test]
    fn squeezing_the_detection_mode_monotonically_helps() {
        let mut last = 0.0;
        for sigma_sq in [1.0, 0.5, 0.25, 0.1] {
            let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![sigma_sq, 1.0 / sigma_sq]));
            let i = qfi_reduced(100.0, &cov).unwrap();
            assert!(i > last);
            last = i;
        }
    }

    #[test]
    fn q_and_n_scaling_of_the_bound() {
        let r1 = qcr_bound(&phase_inputs(100.0, 1.0), 1).unwrap();
        let r2 = qcr_bound(&phase_inputs(100.0, 1.0), 100).unwrap();
        assert_relative_eq!(r1.delta_theta_min / r2.delta_theta_min, 10.0, max_relative = 1e-12);
        let r3 = qcr_bound(&phase_inputs(1000.0, 1.0), 1).unwrap();
        assert_relative_eq!(
            r1.delta_theta_min / r3.delta_theta_min,
            10f64.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn indefinite_covariance_is_rejected() {
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert!(matches!(
            qfi_full(&DVector::zeros(2), &cov, &DMatrix::zeros(2, 2)),
            Err(Error::Covariance(_))
        ));
    }
}
