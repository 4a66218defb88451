//! Assembly of model families into phase-space states and bound inputs.
//!
//! A model declares its covariance in its own fixed mode basis; the
//! quantities of interest live in a *working* basis (the detection basis, a
//! local-oscillator basis, or a common span for overlap integrals). A
//! [`Frame`] holds the working basis together with the isometry from the
//! model basis, and transforms covariances by
//! `Γ_W = O(T) Γ_B O(T)ᵀ + (I − O(T)O(T)ᵀ)` — the trailing term is the
//! vacuum carried by working modes outside the model span.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fisher::{self, BoundInputs, FisherReport, ReducedInputs};
use crate::gaussian::{embed_complex, GaussianState};
use crate::models::{derivative_bundle, DerivKind, DerivativeBundle, ParametricFamily};
use crate::modes::{
    complete_up_to, hg_ladder, inner_product, mean_field_mode, orthonormal_span, ComplexField,
    Grid, ModeBasis,
};

/// Isometry tolerance: `max|T†T − I|` for a frame covering the model span.
const FRAME_TOL: f64 = 1e-8;

/// Working mode basis plus the embedding of the model basis into it.
pub struct Frame {
    basis: ModeBasis,
    /// `T[i,j] = ⟨w_i, b_j⟩`, size M_W × M_B with orthonormal columns.
    isometry: DMatrix<Complex64>,
    /// Real embedding `O(T)`, size 2M_W × 2M_B.
    embed: DMatrix<f64>,
}

impl Frame {
    /// Build a frame from a working basis that must span the model basis.
    pub fn new(basis: ModeBasis, model_basis: &ModeBasis) -> Result<Frame> {
        let mw = basis.len();
        let mb = model_basis.len();
        let mut isometry = DMatrix::zeros(mw, mb);
        for i in 0..mw {
            for j in 0..mb {
                isometry[(i, j)] = inner_product(basis.mode(i), model_basis.mode(j))?;
            }
        }
        let gram = isometry.adjoint() * &isometry;
        let dev = (gram - DMatrix::<Complex64>::identity(mb, mb))
            .iter()
            .fold(0.0_f64, |a, z| a.max(z.norm()));
        if dev > FRAME_TOL {
            return Err(Error::BasisDeficient { got: mw, need: mb });
        }
        let embed = embed_complex(&isometry);
        Ok(Frame { basis, isometry, embed })
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn isometry(&self) -> &DMatrix<Complex64> {
        &self.isometry
    }

    /// Transform a model-basis covariance into the working basis, padding
    /// the complement with vacuum.
    pub fn cov_to_frame(&self, cov_b: &DMatrix<f64>) -> DMatrix<f64> {
        let dim = 2 * self.basis.len();
        let o = &self.embed;
        let mut cov = o * cov_b * o.transpose();
        cov += DMatrix::<f64>::identity(dim, dim) - o * o.transpose();
        (&cov + cov.transpose()) * 0.5
    }

    /// Transform a covariance derivative (vacuum padding is constant).
    pub fn cov_prime_to_frame(&self, cov_prime_b: &DMatrix<f64>) -> DMatrix<f64> {
        let o = &self.embed;
        let cov = o * cov_prime_b * o.transpose();
        (&cov + cov.transpose()) * 0.5
    }

    /// Quadrature means `(2 Re c_i …, 2 Im c_i …)` of a mean field, with
    /// `c_i = ⟨w_i, ā⟩`.
    pub fn mean_quadratures(&self, field: &ComplexField) -> Result<DVector<f64>> {
        let c = self.basis.coefficients(field)?;
        let m = c.len();
        let mut x = DVector::zeros(2 * m);
        for (i, ci) in c.iter().enumerate() {
            x[i] = 2.0 * ci.re;
            x[m + i] = 2.0 * ci.im;
        }
        Ok(x)
    }

    /// Norm of the part of `field` outside the frame span, relative to the
    /// field norm.
    pub fn relative_residual(&self, field: &ComplexField) -> Result<f64> {
        let norm = field.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        Ok(self.basis.residual_norm(field)? / norm)
    }
}

/// Detection frame: mode 1 is `ā′/‖ā′‖`, completed over the model basis.
pub fn detection_frame(a_bar_prime: &ComplexField, model_basis: &ModeBasis) -> Result<Frame> {
    if a_bar_prime.norm() <= 1e-12 {
        return Err(Error::ZeroDetectionMode);
    }
    let basis = complete_up_to(a_bar_prime.clone(), model_basis.modes(), model_basis.len() + 1)?;
    Frame::new(basis, model_basis)
}

/// Frame whose first mode is an arbitrary unit-norm mode (e.g. a local
/// oscillator), completed over the model basis.
pub fn mode_frame(first: &ComplexField, model_basis: &ModeBasis) -> Result<Frame> {
    let basis = complete_up_to(first.clone(), model_basis.modes(), model_basis.len() + 1)?;
    Frame::new(basis, model_basis)
}

/// Frame spanning the model basis plus the given extra fields plus a
/// Hermite-Gauss ladder, for materializing states at several θ in one basis.
pub fn span_frame(
    model_basis: &ModeBasis,
    extras: &[&ComplexField],
    seed_waist: f64,
    grid: &Arc<Grid>,
) -> Result<Frame> {
    let mut seeds: Vec<ComplexField> = model_basis.modes().to_vec();
    for f in extras {
        if f.norm() > 1e-12 {
            seeds.push((*f).clone());
        }
    }
    seeds.extend(hg_ladder(grid, seed_waist, model_basis.len() + 5)?);
    let basis = orthonormal_span(&seeds)?;
    Frame::new(basis, model_basis)
}

/// Everything the downstream consumers need about a family at θ = 0.
pub struct Analysis {
    pub bundle: DerivativeBundle,
    /// Detection frame; `None` when the mean-field derivative vanishes.
    pub frame: Option<Frame>,
    pub inputs: BoundInputs,
}

/// Differentiate the family, build the detection frame and the bound inputs.
/// The state is gated on purity at entry.
pub fn analyze(family: &dyn ParametricFamily, grid: &Arc<Grid>, kind: DerivKind) -> Result<Analysis> {
    let state0 = family.evaluate(0.0, grid)?;
    let bundle = derivative_bundle(family, grid, kind)?;

    // purity gate: every downstream formula assumes a pure state
    let model_mean = mean_in_basis(&state0.basis, &bundle.a_bar)?;
    GaussianState::new(model_mean, state0.cov.clone(), state0.basis.len())?.assert_pure()?;

    if bundle.a_bar_prime.norm() <= 1e-12 {
        // covariance-only information; inputs live in the model basis
        let mean_prime = mean_in_basis(&state0.basis, &bundle.a_bar_prime)?;
        let inputs = BoundInputs {
            mean_prime,
            cov: bundle.cov0.clone(),
            cov_prime: bundle.cov_prime.clone(),
            reduced: None,
        };
        return Ok(Analysis { bundle, frame: None, inputs });
    }

    let frame = detection_frame(&bundle.a_bar_prime, &state0.basis)?;
    let cov = frame.cov_to_frame(&bundle.cov0);
    let cov_prime = frame.cov_prime_to_frame(&bundle.cov_prime);
    let mean_prime = frame.mean_quadratures(&bundle.a_bar_prime)?;
    let reduced = ReducedInputs {
        a_bar_prime_norm_sq: bundle.a_bar_prime_norm_sq(),
        cov_in_detection_basis: cov.clone(),
        n: bundle.n,
        u_prime_norm_sq: bundle.u_prime_norm_sq()?,
        n_prime: bundle.n_prime,
    };
    let inputs = BoundInputs { mean_prime, cov, cov_prime, reduced: Some(reduced) };
    Ok(Analysis { bundle, frame: Some(frame), inputs })
}

/// [`analyze`] and assemble the Fisher report for `q` repetitions.
pub fn bound_report(
    family: &dyn ParametricFamily,
    grid: &Arc<Grid>,
    kind: DerivKind,
    q: u64,
) -> Result<FisherReport> {
    let analysis = analyze(family, grid, kind)?;
    fisher::qcr_bound(&analysis.inputs, q)
}

fn mean_in_basis(basis: &ModeBasis, field: &ComplexField) -> Result<DVector<f64>> {
    let c = basis.coefficients(field)?;
    let m = c.len();
    let mut x = DVector::zeros(2 * m);
    for (i, ci) in c.iter().enumerate() {
        x[i] = 2.0 * ci.re;
        x[m + i] = 2.0 * ci.im;
    }
    Ok(x)
}

/// A family materialized as phase-space states in one fixed working basis,
/// valid for the θ values declared at construction.
pub struct StatePath<'a> {
    family: &'a dyn ParametricFamily,
    grid: Arc<Grid>,
    frame: Frame,
}

impl<'a> StatePath<'a> {
    /// Prepare a path able to represent the family at each θ in `thetas`.
    pub fn new(family: &'a dyn ParametricFamily, grid: &Arc<Grid>, thetas: &[f64]) -> Result<Self> {
        let state0 = family.evaluate(0.0, grid)?;
        let mut extras: Vec<ComplexField> = Vec::new();
        for &theta in thetas {
            let s = family.evaluate(theta, grid)?;
            if s.mean_field.norm() > 1e-12 {
                extras.push(mean_field_mode(&s.mean_field)?);
            }
        }
        let refs: Vec<&ComplexField> = extras.iter().collect();
        let frame = span_frame(&state0.basis, &refs, family.seed_waist(), grid)?;
        Ok(StatePath { family, grid: grid.clone(), frame })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Materialize the state at `theta` in the working basis.
    pub fn state_at(&self, theta: f64) -> Result<GaussianState> {
        let s = self.family.evaluate(theta, &self.grid)?;
        let residual = self.frame.relative_residual(&s.mean_field)?;
        if residual > FRAME_TOL {
            return Err(Error::BasisDeficient {
                got: self.frame.basis().len(),
                need: self.frame.basis().len() + 1,
            });
        }
        let mean = self.frame.mean_quadratures(&s.mean_field)?;
        let cov = self.frame.cov_to_frame(&s.cov);
        GaussianState::new(mean, cov, self.frame.basis().len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::qcr_bound;
    use crate::gaussian::check_purity;
    use crate::models::{
        AmplitudeFamily, DisplacementFamily, PhaseFamily, RotatedSqueezedFamily,
        SqueezeParamFamily,
    };
    use approx::assert_relative_eq;

    fn grid() -> Arc<Grid> {
        Grid::uniform(-8.0, 8.0, 1024).unwrap()
    }

    #[test]
    fn phase_detection_frame_squeezes_gamma_inv_entry() {
        let family = PhaseFamily::new(100.0, 0.25).unwrap();
        let g = grid();
        let a = analyze(&family, &g, DerivKind::Analytic).unwrap();
        let report = qcr_bound(&a.inputs, 1).unwrap();
        assert_relative_eq!(report.gamma_inv_11.unwrap(), 4.0, max_relative = 1e-9);
        assert_relative_eq!(report.i_reduced.unwrap(), 1600.0, max_relative = 1e-9);
        assert_relative_eq!(report.i_mean_term, 1600.0, max_relative = 1e-9);
        assert_relative_eq!(report.i_zero.unwrap(), 400.0, max_relative = 1e-9);
    }

    #[test]
    fn displacement_detection_mode_is_hg1() {
        let family = DisplacementFamily::new(1e6, 1.0, 1.0).unwrap();
        let g = grid();
        let a = analyze(&family, &g, DerivKind::Analytic).unwrap();
        let frame = a.frame.unwrap();
        let h1 = crate::modes::hermite_gauss(1, 1.0, 0.0, &g).unwrap();
        let overlap = inner_product(frame.basis().mode(0), &h1).unwrap();
        assert!(overlap.norm_sqr() >= 1.0 - 1e-8);
        let report = qcr_bound(&a.inputs, 1).unwrap();
        assert_relative_eq!(report.delta_theta_min, 5e-4, max_relative = 1e-9);
    }

    #[test]
    fn reduced_and_full_mean_terms_agree_across_builtins() {
        let g = grid();
        let families: Vec<Box<dyn ParametricFamily>> = vec![
            Box::new(PhaseFamily::new(100.0, 0.25).unwrap()),
            Box::new(DisplacementFamily::new(1e4, 2.0, 0.5).unwrap()),
            Box::new(AmplitudeFamily::new(50.0, 1.0, 0.25).unwrap()),
            Box::new(RotatedSqueezedFamily::new(100.0, 0.25).unwrap()),
        ];
        for f in &families {
            let a = analyze(f.as_ref(), &g, DerivKind::Analytic).unwrap();
            let report = qcr_bound(&a.inputs, 1).unwrap();
            assert_relative_eq!(
                report.i_reduced.unwrap(),
                report.i_mean_term,
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn squeeze_param_family_has_no_detection_mode_but_full_information() {
        let g = grid();
        let a = analyze(&SqueezeParamFamily, &g, DerivKind::Analytic).unwrap();
        assert!(a.frame.is_none());
        let report = qcr_bound(&a.inputs, 1).unwrap();
        assert_eq!(report.i_mean_term, 0.0);
        assert_relative_eq!(report.i_cov_term, 2.0, max_relative = 1e-12);
        assert!(report.i_reduced.is_none());
    }

    #[test]
    fn rotated_squeezed_has_both_terms() {
        let g = grid();
        let a = analyze(&RotatedSqueezedFamily::new(100.0, 0.25).unwrap(), &g, DerivKind::Analytic).unwrap();
        let report = qcr_bound(&a.inputs, 1).unwrap();
        assert!(report.i_mean_term > 0.0);
        assert!(report.i_cov_term > 0.0);
        assert!(report.i_full > report.i_mean_term);
        // i_cov = (σ² − 1/σ²)²/2 = (0.25 − 4)²/2
        assert_relative_eq!(report.i_cov_term, 7.03125, max_relative = 1e-9);
    }

    #[test]
    fn state_path_materializes_pure_states_across_theta() {
        let g = grid();
        let family = DisplacementFamily::new(100.0, 1.0, 0.25).unwrap();
        let path = StatePath::new(&family, &g, &[0.0, 0.01, -0.01]).unwrap();
        for theta in [0.0, 0.01, -0.01] {
            let s = path.state_at(theta).unwrap();
            assert!(check_purity(&s).pure, "impure at {theta}");
        }
        let s = path.state_at(0.01).unwrap();
        assert_relative_eq!(s.mean().norm_squared(), 4.0 * 100.0, max_relative = 1e-4);
    }

    #[test]
    fn numeric_route_matches_analytic_to_fd_tolerance() {
        let g = grid();
        let family = PhaseFamily::new(100.0, 1.0).unwrap();
        let ana = bound_report(&family, &g, DerivKind::Analytic, 1).unwrap();
        let num = bound_report(
            &family,
            &g,
            DerivKind::Numeric { h: 1e-4, richardson: true },
            1,
        )
        .unwrap();
        assert_relative_eq!(ana.delta_theta_min, 0.05, max_relative = 1e-9);
        assert_relative_eq!(num.delta_theta_min, 0.05, max_relative = 1e-6);
    }
}
