//! Pure multimode Gaussian states in quadrature phase space.
//!
//! Conventions: quadratures `x̂ = â + â†`, `p̂ = i(â† − â)`, so the vacuum
//! covariance is the identity. Vectors stack block-wise as
//! `(x₁…x_M, p₁…p_M)` and the symplectic form is `Ω = [[0, I], [−I, 0]]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetry tolerance for covariance matrices.
const SYMMETRY_TOL: f64 = 1e-12;

/// Purity tolerance: `max|ΓΩΓ − Ω| ≤ PURITY_TOL` for pure states.
pub const PURITY_TOL: f64 = 1e-9;

/// Symplectic / orthogonal deviation tolerance for transforms.
const SYMPLECTIC_TOL: f64 = 1e-12;

/// Unitarity tolerance for mode-basis matrices.
const UNITARY_TOL: f64 = 1e-10;

/// Symplectic form Ω for `m` modes in `(x…,p…)` ordering.
pub fn symplectic_form(m: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        omega[(i, m + i)] = 1.0;
        omega[(m + i, i)] = -1.0;
    }
    omega
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, &v| a.max(v.abs()))
}

/// Mean quadrature vector and covariance matrix of a Gaussian state.
#[derive(Debug, Clone)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    mode_count: usize,
}

impl GaussianState {
    /// Validates dimensions, symmetry (1e-12) and positive definiteness.
    /// Purity is a separate diagnostic ([`check_purity`]) so that impure
    /// covariances can still be inspected.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, mode_count: usize) -> Result<Self> {
        let dim = 2 * mode_count;
        if mode_count == 0 {
            return Err(Error::Dimension("mode_count must be ≥ 1".into()));
        }
        if mean.len() != dim || cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::Dimension(format!(
                "expected mean length {dim} and {dim}×{dim} covariance, got {} and {}×{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        let asym = max_abs(&(&cov - cov.transpose()));
        if asym > SYMMETRY_TOL {
            return Err(Error::Covariance(format!("asymmetry {asym:.3e} exceeds 1e-12")));
        }
        if cov.clone().cholesky().is_none() {
            return Err(Error::Covariance("matrix is not positive definite".into()));
        }
        Ok(GaussianState { mean, cov, mode_count })
    }

    /// Vacuum state of `m` modes.
    pub fn vacuum(m: usize) -> Self {
        GaussianState {
            mean: DVector::zeros(2 * m),
            cov: DMatrix::identity(2 * m, 2 * m),
            mode_count: m,
        }
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    /// Errors with [`Error::Purity`] unless `ΓΩΓ = Ω` within tolerance.
    pub fn assert_pure(&self) -> Result<()> {
        let report = check_purity(self);
        if report.pure {
            Ok(())
        } else {
            Err(Error::Purity(report.residual))
        }
    }
}

/// Serialization mirror: `{mode_count, mean, cov}` with row-major cov.
#[derive(Serialize, Deserialize)]
struct GaussianStateRepr {
    mode_count: usize,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl Serialize for GaussianState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let dim = 2 * self.mode_count;
        let cov = (0..dim)
            .map(|i| (0..dim).map(|j| self.cov[(i, j)]).collect())
            .collect();
        GaussianStateRepr {
            mode_count: self.mode_count,
            mean: self.mean.iter().copied().collect(),
            cov,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaussianState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GaussianStateRepr::deserialize(d)?;
        let dim = 2 * repr.mode_count;
        if repr.cov.len() != dim || repr.cov.iter().any(|r| r.len() != dim) {
            return Err(serde::de::Error::custom("covariance has wrong shape"));
        }
        let cov = DMatrix::from_fn(dim, dim, |i, j| repr.cov[i][j]);
        GaussianState::new(DVector::from_vec(repr.mean), cov, repr.mode_count)
            .map_err(serde::de::Error::custom)
    }
}

/// Purity diagnostic: residual `max|ΓΩΓ − Ω|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PurityReport {
    pub residual: f64,
    pub pure: bool,
}

/// Check `ΓΩΓ = Ω` within 1e-9.
pub fn check_purity(state: &GaussianState) -> PurityReport {
    let omega = symplectic_form(state.mode_count);
    let residual = max_abs(&(state.cov() * &omega * state.cov() - &omega));
    PurityReport { residual, pure: residual <= PURITY_TOL }
}

/// Symplectic eigenvalues of a covariance matrix: the paired singular values
/// of `LᵀΩL` with `Γ = LLᵀ`. All ones iff the state is pure.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let m = cov.nrows() / 2;
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Covariance("matrix is not positive definite".into()))?;
    let l = chol.l();
    let a = l.transpose() * symplectic_form(m) * &l;
    let svd = a.svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(sv)
}

/// Bank of independent squeezers: `variances[i]` is the x-quadrature
/// variance of squeezer `i`; the conjugate quadrature carries its inverse.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SqueezerBank {
    variances: Vec<f64>,
}

impl SqueezerBank {
    pub fn new(variances: Vec<f64>) -> Result<Self> {
        if variances.is_empty() {
            return Err(Error::Dimension("squeezer bank may not be empty".into()));
        }
        if let Some(&bad) = variances.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidVariance(bad));
        }
        Ok(SqueezerBank { variances })
    }

    /// Variances given as squeezing in dB: `σ² = 10^(−dB/10)`.
    pub fn from_db(db: &[f64]) -> Result<Self> {
        Self::new(db.iter().map(|d| 10f64.powf(-d / 10.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Smallest listed x-quadrature variance.
    pub fn sigma_min_sq(&self) -> f64 {
        self.variances.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Smallest quadrature variance over both quadratures of every squeezer,
    /// i.e. `min_i min(σᵢ², 1/σᵢ²)`. The spectral radius of `Γ⁻¹` for the
    /// product state is its inverse.
    pub fn effective_sigma_min_sq(&self) -> f64 {
        self.variances
            .iter()
            .map(|&v| v.min(1.0 / v))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Product state of independent squeezed vacua:
/// `Γ = diag(σ₁²,…,σ_M², 1/σ₁²,…,1/σ_M²)`, zero mean.
pub fn make_squeezed_bank(bank: &SqueezerBank) -> GaussianState {
    let m = bank.len();
    let mut cov = DMatrix::zeros(2 * m, 2 * m);
    for (i, &v) in bank.variances().iter().enumerate() {
        cov[(i, i)] = v;
        cov[(m + i, m + i)] = 1.0 / v;
    }
    GaussianState { mean: DVector::zeros(2 * m), cov, mode_count: m }
}

/// Linear phase-space transform. Passive transforms (derived from a
/// mode-basis unitary) are additionally orthogonal.
#[derive(Debug, Clone)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
    origin: Option<DMatrix<Complex64>>,
}

impl SymplecticTransform {
    /// Validates `OΩOᵀ = Ω` within 1e-12.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || !matrix.nrows().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "symplectic matrix must be 2M×2M, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let omega = symplectic_form(matrix.nrows() / 2);
        let dev = max_abs(&(&matrix * &omega * matrix.transpose() - &omega));
        if dev > SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic(dev));
        }
        Ok(SymplecticTransform { matrix, origin: None })
    }

    pub fn identity(m: usize) -> Self {
        SymplecticTransform {
            matrix: DMatrix::identity(2 * m, 2 * m),
            origin: Some(DMatrix::identity(m, m)),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Mode-basis unitary this transform was derived from, when known.
    pub fn origin(&self) -> Option<&DMatrix<Complex64>> {
        self.origin.as_ref()
    }

    pub fn mode_count(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// Orthogonality deviation `max|OOᵀ − I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        max_abs(&(&self.matrix * self.matrix.transpose() - DMatrix::identity(n, n)))
    }

    /// Passive (photon-number preserving) transforms are orthogonal.
    pub fn is_passive(&self) -> bool {
        self.orthogonality_residual() <= SYMPLECTIC_TOL
    }

    /// Symplectic inverse `O⁻¹ = −Ω Oᵀ Ω`.
    pub fn inverse(&self) -> SymplecticTransform {
        let omega = symplectic_form(self.mode_count());
        SymplecticTransform {
            matrix: -(&omega * self.matrix.transpose() * &omega),
            origin: self.origin.as_ref().map(|u| u.adjoint()),
        }
    }
}

/// Real embedding `O(T) = [[Re T, −Im T], [Im T, Re T]]` of a complex matrix
/// acting on mode operators; for unitary `T` it is symplectic-orthogonal, for
/// an isometry it embeds a smaller mode set into a larger one.
pub fn embed_complex(t: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (r, c) = t.shape();
    let mut o = DMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = t[(i, j)];
            o[(i, j)] = z.re;
            o[(i, c + j)] = -z.im;
            o[(r + i, j)] = z.im;
            o[(r + i, c + j)] = z.re;
        }
    }
    o
}

/// Build the passive symplectic transform of a mode-basis unitary `U`.
pub fn symplectic_from_unitary(u: &DMatrix<Complex64>) -> Result<SymplecticTransform> {
    if u.nrows() != u.ncols() {
        return Err(Error::Dimension(format!("unitary must be square, got {}×{}", u.nrows(), u.ncols())));
    }
    let m = u.nrows();
    let dev = (u.adjoint() * u - DMatrix::<Complex64>::identity(m, m))
        .iter()
        .fold(0.0_f64, |a, z| a.max(z.norm()));
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    Ok(SymplecticTransform { matrix: embed_complex(u), origin: Some(u.clone()) })
}

/// Apply a symplectic transform: `mean′ = O mean`, `Γ′ = O Γ Oᵀ`.
pub fn transform_state(state: &GaussianState, t: &SymplecticTransform) -> Result<GaussianState> {
    if t.matrix.nrows() != 2 * state.mode_count {
        return Err(Error::Dimension(format!(
            "transform is {}×{} but state has {} modes",
            t.matrix.nrows(),
            t.matrix.ncols(),
            state.mode_count
        )));
    }
    let mean = &t.matrix * state.mean();
    let mut cov = &t.matrix * state.cov() * t.matrix.transpose();
    // round-off symmetrization; the product is symmetric up to 1ulp noise
    cov = (&cov + cov.transpose()) * 0.5;
    Ok(GaussianState { mean, cov, mode_count: state.mode_count })
}
