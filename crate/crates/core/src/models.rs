//! θ-parametrized pure Gaussian state families.
//!
//! A family maps θ to a mean field on a grid, a fixed mode basis, and a
//! covariance matrix declared in that basis. Derivatives at θ = 0 are taken
//! by central differences (optionally Richardson-extrapolated); the built-in
//! families also carry analytic derivatives used as ground truth.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{hermite_gauss, inner_product, ComplexField, Grid, ModeBasis};

/// Default finite-difference step in θ units.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Default model domain.
pub const DEFAULT_DOMAIN: (f64, f64) = (-0.3, 0.3);

/// Snapshot of a family at one θ: mean field, fixed mode basis, covariance
/// in that basis.
#[derive(Debug, Clone)]
pub struct FamilyState {
    pub mean_field: ComplexField,
    pub basis: ModeBasis,
    pub cov: DMatrix<f64>,
}

/// How to obtain θ-derivatives of a family.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DerivKind {
    /// Use the family's analytic derivative, falling back to numeric when
    /// none is available.
    #[default]
    Analytic,
    Numeric { h: f64, richardson: bool },
}

/// A θ-parametrized family of pure Gaussian states.
pub trait ParametricFamily: Send + Sync {
    fn id(&self) -> &str;

    fn mode_count(&self) -> usize;

    fn domain(&self) -> (f64, f64) {
        DEFAULT_DOMAIN
    }

    /// Waist used for Hermite-Gauss completion seeds.
    fn seed_waist(&self) -> f64 {
        1.0
    }

    /// Produce the state description at `theta`.
    fn evaluate(&self, theta: f64, grid: &Arc<Grid>) -> Result<FamilyState>;

    /// Analytic derivative bundle, when the family has one.
    fn analytic_bundle(&self, _grid: &Arc<Grid>) -> Option<Result<DerivativeBundle>> {
        None
    }
}

fn check_domain(family: &dyn ParametricFamily, theta: f64) -> Result<()> {
    let (lo, hi) = family.domain();
    if theta < lo || theta > hi {
        return Err(Error::Domain { theta, lo, hi });
    }
    Ok(())
}

/// Mean field, covariance and photon number derivatives at θ = 0.
#[derive(Debug, Clone)]
pub struct DerivativeBundle {
    pub a_bar: ComplexField,
    pub a_bar_prime: ComplexField,
    pub n: f64,
    pub n_prime: f64,
    pub cov0: DMatrix<f64>,
    pub cov_prime: DMatrix<f64>,
    /// Finite-difference step used; 0 for analytic bundles.
    pub step: f64,
}

impl DerivativeBundle {
    /// `‖ā′‖²`, the squared norm of the mean-field derivative.
    pub fn a_bar_prime_norm_sq(&self) -> f64 {
        self.a_bar_prime.norm_sq()
    }

    /// Derivative of the normalized mode, `u′ = ā′/√N − ā N′/(2N^{3/2})`.
    pub fn u_prime(&self) -> Result<ComplexField> {
        if self.n <= 0.0 {
            return Err(Error::InvalidPhotonNumber(self.n));
        }
        let s = self.n.sqrt();
        self.a_bar_prime
            .scaled(Complex64::new(1.0 / s, 0.0))
            .axpy(Complex64::new(-self.n_prime / (2.0 * self.n * s), 0.0), &self.a_bar)
    }

    pub fn u_prime_norm_sq(&self) -> Result<f64> {
        Ok(self.u_prime()?.norm_sq())
    }

    /// `2 Re⟨ā, ā′⟩`, the chain-rule value of N′; should agree with the
    /// stored finite-difference `n_prime`.
    pub fn n_prime_chain_rule(&self) -> Result<f64> {
        Ok(2.0 * inner_product(&self.a_bar, &self.a_bar_prime)?.re)
    }
}

fn central_bundle(
    family: &dyn ParametricFamily,
    grid: &Arc<Grid>,
    h: f64,
) -> Result<DerivativeBundle> {
    check_domain(family, h)?;
    check_domain(family, -h)?;
    let at0 = family.evaluate(0.0, grid)?;
    let plus = family.evaluate(h, grid)?;
    let minus = family.evaluate(-h, grid)?;
    let scale = Complex64::new(1.0 / (2.0 * h), 0.0);
    let a_bar_prime = plus
        .mean_field
        .axpy(Complex64::new(-1.0, 0.0), &minus.mean_field)?
        .scaled(scale);
    let n_prime = (plus.mean_field.norm_sq() - minus.mean_field.norm_sq()) / (2.0 * h);
    let cov_prime = (&plus.cov - &minus.cov) / (2.0 * h);
    Ok(DerivativeBundle {
        n: at0.mean_field.norm_sq(),
        a_bar: at0.mean_field,
        a_bar_prime,
        n_prime,
        cov0: at0.cov,
        cov_prime,
        step: h,
    })
}

/// Central-difference derivatives at θ = 0 with step `h`; with `richardson`
/// the steps `h` and `h/2` are combined to cancel the O(h²) bias.
pub fn differentiate(
    family: &dyn ParametricFamily,
    grid: &Arc<Grid>,
    h: f64,
    richardson: bool,
) -> Result<DerivativeBundle> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("finite-difference step {h} must be positive")));
    }
    let coarse = central_bundle(family, grid, h)?;
    if !richardson {
        return Ok(coarse);
    }
    let fine = central_bundle(family, grid, h / 2.0)?;
    let four_thirds = Complex64::new(4.0 / 3.0, 0.0);
    let a_bar_prime = fine
        .a_bar_prime
        .scaled(four_thirds)
        .axpy(Complex64::new(-1.0 / 3.0, 0.0), &coarse.a_bar_prime)?;
    Ok(DerivativeBundle {
        a_bar: fine.a_bar,
        a_bar_prime,
        n: fine.n,
        n_prime: (4.0 * fine.n_prime - coarse.n_prime) / 3.0,
        cov0: fine.cov0,
        cov_prime: (fine.cov_prime * 4.0 - coarse.cov_prime) / 3.0,
        step: h,
    })
}

/// Derivative bundle per the requested [`DerivKind`].
pub fn derivative_bundle(
    family: &dyn ParametricFamily,
    grid: &Arc<Grid>,
    kind: DerivKind,
) -> Result<DerivativeBundle> {
    match kind {
        DerivKind::Analytic => match family.analytic_bundle(grid) {
            Some(b) => b,
            None => differentiate(family, grid, DEFAULT_FD_STEP, true),
        },
        DerivKind::Numeric { h, richardson } => differentiate(family, grid, h, richardson),
    }
}

fn positive_variance(sigma_sq: f64) -> Result<f64> {
    if !(sigma_sq > 0.0) || !sigma_sq.is_finite() {
        return Err(Error::InvalidVariance(sigma_sq));
    }
    Ok(sigma_sq)
}

fn positive_photons(n: f64) -> Result<f64> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidPhotonNumber(n));
    }
    Ok(n)
}

/// Phase family: `ā_θ = √N e^{iθ} u₀` with `u₀ = HG₀`, covariance constant.
/// The detection mode is `i·u₀`; `sigma_sq` squeezes its measured quadrature
/// (the p quadrature of `u₀`).
pub struct PhaseFamily {
    n: f64,
    sigma_sq: f64,
}

impl PhaseFamily {
    pub fn new(n: f64, sigma_sq: f64) -> Result<Self> {
        Ok(PhaseFamily { n: positive_photons(n)?, sigma_sq: positive_variance(sigma_sq)? })
    }
}

impl ParametricFamily for PhaseFamily {
    fn id(&self) -> &str {
        "phase"
    }

    fn mode_count(&self) -> usize {
        1
    }

    fn evaluate(&self, theta: f64, grid: &Arc<Grid>) -> Result<FamilyState> {
        check_domain(self, theta)?;
        let u0 = hermite_gauss(0, 1.0, 0.0, grid)?;
        let amp = Complex64::from_polar(self.n.sqrt(), theta);
        let cov = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0 / self.sigma_sq,
            self.sigma_sq,
        ]));
        Ok(FamilyState { mean_field: u0.scaled(amp), basis: ModeBasis::new(vec![u0])?, cov })
    }

    fn analytic_bundle(&self, grid: &Arc<Grid>) -> Option<Result<DerivativeBundle>> {
        Some((|| {
            let at0 = self.evaluate(0.0, grid)?;
            let a_bar_prime = at0.mean_field.scaled(Complex64::new(0.0, 1.0));
            Ok(DerivativeBundle {
                n: at0.mean_field.norm_sq(),
                a_bar: at0.mean_field,
                a_bar_prime,
                n_prime: 0.0,
                cov_prime: DMatrix::zeros(2, 2),
                cov0: at0.cov,
                step: 0.0,
            })
        })())
    }
}

/// Displacement family: `ā_θ = √N HG₀(x − θ)` with waist `w`; the detection
/// mode is `HG₁` and `‖u′‖ = 1/w`. `sigma_sq` squeezes the measured
/// x quadrature of `HG₁`.
pub struct DisplacementFamily {
    n: f64,
    waist: f64,
    sigma_sq: f64,
}

impl DisplacementFamily {
    pub fn new(n: f64, waist: f64, sigma_sq: f64) -> Result<Self> {
        if !(waist > 0.0) || !waist.is_finite() {
            return Err(Error::Config(format!("waist {waist} must be positive")));
        }
        Ok(DisplacementFamily {
            n: positive_photons(n)?,
            waist,
            sigma_sq: positive_variance(sigma_sq)?,
        })
    }
}

impl ParametricFamily for DisplacementFamily {
    fn id(&self) -> &str {
        "displacement"
    }

    fn mode_count(&self) -> usize {
        2
    }

    fn seed_waist(&self) -> f64 {
        self.waist
    }

    fn evaluate(&self, theta: f64, grid: &Arc<Grid>) -> Result<FamilyState> {
        check_domain(self, theta)?;
        let h0 = hermite_gauss(0, self.waist, 0.0, grid)?;
        let h1 = hermite_gauss(1, self.waist, 0.0, grid)?;
        let shifted = hermite_gauss(0, self.waist, theta, grid)?;
        let mean_field = shifted.scaled(Complex64::new(self.n.sqrt(), 0.0));
        let cov = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0,
            self.sigma_sq,
            1.0,
            1.0 / self.sigma_sq,
        ]));
        Ok(FamilyState { mean_field, basis: ModeBasis::new(vec![h0, h1])?, cov })
    }

    fn analytic_bundle(&self, grid: &Arc<Grid>) -> Option<Result<DerivativeBundle>> {
        Some((|| {
            let at0 = self.evaluate(0.0, grid)?;
            let h1 = hermite_gauss(1, self.waist, 0.0, grid)?;
            // d/dθ HG₀(x−θ)|₀ = HG₁/w
            let a_bar_prime = h1.scaled(Complex64::new(self.n.sqrt() / self.waist, 0.0));
            Ok(DerivativeBundle {
                n: at0.mean_field.norm_sq(),
                a_bar: at0.mean_field,
                a_bar_prime,
                n_prime: 0.0,
                cov_prime: DMatrix::zeros(4, 4),
                cov0: at0.cov,
                step: 0.0,
            })
        })())
    }
}

/// Amplitude family: `ā_θ = √N (1 + mθ) u₀`; only the photon number varies,
/// so the detection mode coincides with the mean-field mode and
/// `N′ = 2Nm`. `sigma_sq` squeezes the measured x quadrature of `u₀`.
pub struct AmplitudeFamily {
    n: f64,
    modulation: f64,
    sigma_sq: f64,
}

impl AmplitudeFamily {
    pub fn new(n: f64, modulation: f64, sigma_sq: f64) -> Result<Self> {
        if modulation == 0.0 || !modulation.is_finite() {
            return Err(Error::Config(format!("modulation depth {modulation} must be nonzero")));
        }
        Ok(AmplitudeFamily {
            n: positive_photons(n)?,
            modulation,
            sigma_sq: positive_variance(sigma_sq)?,
        })
    }
}

impl ParametricFamily for AmplitudeFamily {
    fn id(&self) -> &str {
        "amplitude"
    }

    fn mode_count(&self) -> usize {
        1
    }

    fn evaluate(&self, theta: f64, grid: &Arc<Grid>) -> Result<FamilyState> {
        check_domain(self, theta)?;
        let u0 = hermite_gauss(0, 1.0, 0.0, grid)?;
        let amp = Complex64::new(self.n.sqrt() * (1.0 + self.modulation * theta), 0.0);
        let cov = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            self.sigma_sq,
            1.0 / self.sigma_sq,
        ]));
        Ok(FamilyState { mean_field: u0.scaled(amp), basis: ModeBasis::new(vec![u0])?, cov })
    }

    fn analytic_bundle(&self, grid: &Arc<Grid>) -> Option<Result<DerivativeBundle>> {
        Some((|| {
            let at0 = self.evaluate(0.0, grid)?;
            let n = at0.mean_field.norm_sq();
            let a_bar_prime = at0.mean_field.scaled(Complex64::new(self.modulation, 0.0));
            Ok(DerivativeBundle {
                a_bar: at0.mean_field,
                a_bar_prime,
                n,
                n_prime: 2.0 * n * self.modulation,
                cov_prime: DMatrix::zeros(2, 2),
                cov0: at0.cov,
                step: 0.0,
            })
        })())
    }
}

/// Squeeze-parameter family: zero mean, `Γ_θ = diag(e^{2θ}, e^{−2θ})`. All
/// information sits in the covariance term; there is no detection mode.
pub struct SqueezeParamFamily;

impl ParametricFamily for SqueezeParamFamily {
    fn id(&self) -> &str {
        "squeeze-param"
    }

    fn mode_count(&self) -> usize {
        1
    }

    fn evaluate(&self, theta: f64, grid: &Arc<Grid>) -> Result<FamilyState> {
        check_domain(self, theta)?;
        let u0 = hermite_gauss(0, 1.0, 0.0, grid)?;
        let cov = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            (2.0 * theta).exp(),
            (-2.0 * theta).exp(),
        ]));
        Ok(FamilyState {
            mean_field: ComplexField::zeros(grid.clone()),
            basis: ModeBasis::new(vec![u0])?,
            cov,
        })
    }

    fn analytic_bundle(&self, grid: &Arc<Grid>) -> Option<Result<DerivativeBundle>> {
        Some((|| {
            let at0 = self.evaluate(0.0, grid)?;
            Ok(DerivativeBundle {
                a_bar: at0.mean_field.clone(),
                a_bar_prime: ComplexField::zeros(grid.clone()),
                n: 0.0,
                n_prime: 0.0,
                cov_prime: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, -2.0])),
                cov0: at0.cov,
                step: 0.0,
            })
        })())
    }
}

/// Rotated-squeezed family: a squeezed coherent state whose whole phase
/// space rotates with θ — `ā_θ = √N e^{iθ} u₀`,
/// `Γ_θ = R(θ) diag(σ², 1/σ²) R(θ)ᵀ`. Both terms of the Fisher information
/// are nonzero when `σ² ≠ 1`.
pub struct RotatedSqueezedFamily {
    n: f64,
    sigma_sq: f64,
}

impl RotatedSqueezedFamily {
    pub fn new(n: f64, sigma_sq: f64) -> Result<Self> {
        Ok(RotatedSqueezedFamily { n: positive_photons(n)?, sigma_sq: positive_variance(sigma_sq)? })
    }
}

impl ParametricFamily for RotatedSqueezedFamily {
    fn id(&self) -> &str {
        "rotated-squeezed"
    }

    fn mode_count(&self) -> usize {
        1
    }

    fn evaluate(&self, theta: f64, grid: &Arc<Grid>) -> Result<FamilyState> {
        check_domain(self, theta)?;
        let u0 = hermite_gauss(0, 1.0, 0.0, grid)?;
        let amp = Complex64::from_polar(self.n.sqrt(), theta);
        let (s, c) = theta.sin_cos();
        let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            self.sigma_sq,
            1.0 / self.sigma_sq,
        ]));
        let cov = &r * d * r.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(FamilyState { mean_field: u0.scaled(amp), basis: ModeBasis::new(vec![u0])?, cov })
    }

    fn analytic_bundle(&self, grid: &Arc<Grid>) -> Option<Result<DerivativeBundle>> {
        Some((|| {
            let at0 = self.evaluate(0.0, grid)?;
            let a_bar_prime = at0.mean_field.scaled(Complex64::new(0.0, 1.0));
            let gap = self.sigma_sq - 1.0 / self.sigma_sq;
            let cov_prime = DMatrix::from_row_slice(2, 2, &[0.0, gap, gap, 0.0]);
            Ok(DerivativeBundle {
                n: at0.mean_field.norm_sq(),
                a_bar: at0.mean_field,
                a_bar_prime,
                n_prime: 0.0,
                cov_prime,
                cov0: at0.cov,
                step: 0.0,
            })
        })())
    }
}

/// Vacuum family: θ enters nowhere. Every information route returns zero;
/// useful for exercising the degenerate paths.
pub struct VacuumFamily;

impl ParametricFamily for VacuumFamily {
    fn id(&self) -> &str {
        "vacuum"
    }

    fn mode_count(&self) -> usize {
        1
    }

    fn evaluate(&self, theta: f64, grid: &Arc<Grid>) -> Result<FamilyState> {
        check_domain(self, theta)?;
        let u0 = hermite_gauss(0, 1.0, 0.0, grid)?;
        Ok(FamilyState {
            mean_field: ComplexField::zeros(grid.clone()),
            basis: ModeBasis::new(vec![u0])?,
            cov: DMatrix::identity(2, 2),
        })
    }

    fn analytic_bundle(&self, grid: &Arc<Grid>) -> Option<Result<DerivativeBundle>> {
        Some(Ok(DerivativeBundle {
            a_bar: ComplexField::zeros(grid.clone()),
            a_bar_prime: ComplexField::zeros(grid.clone()),
            n: 0.0,
            n_prime: 0.0,
            cov0: DMatrix::identity(2, 2),
            cov_prime: DMatrix::zeros(2, 2),
            step: 0.0,
        }))
    }
}
