//! Discretized spatio-temporal mode functions.
//!
//! A mode is a complex amplitude profile sampled on a 1-D [`Grid`] with
//! quadrature weights, so that every overlap integral reduces to a weighted
//! sum. The module provides the Hermite-Gauss family, the normalized
//! mean-field mode, and the construction of the detection-mode basis: the
//! normalized derivative of the mean field followed by Gram-Schmidt
//! completion.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Residual threshold below which a completion candidate is considered
/// linearly dependent and rejected.
const PIVOT_THRESHOLD: f64 = 1e-10;

/// Orthonormality tolerance for [`ModeBasis`].
const ORTHO_TOL: f64 = 1e-8;

/// 1-D sample grid with positive quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Uniform grid on `[min, max]` with trapezoid weights.
    pub fn uniform(min: f64, max: f64, n: usize) -> Result<Arc<Grid>> {
        if n < 2 || !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::Config(format!(
                "invalid grid: min={min}, max={max}, points={n}"
            )));
        }
        let step = (max - min) / (n - 1) as f64;
        let points = (0..n).map(|i| min + step * i as f64).collect();
        Self::from_points(points)
    }

    /// Grid from strictly increasing points, with trapezoid weights.
    pub fn from_points(points: Vec<f64>) -> Result<Arc<Grid>> {
        if points.len() < 2 {
            return Err(Error::Config("grid needs at least 2 points".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("grid points must be strictly increasing".into()));
        }
        let n = points.len();
        let mut weights = vec![0.0; n];
        weights[0] = 0.5 * (points[1] - points[0]);
        weights[n - 1] = 0.5 * (points[n - 1] - points[n - 2]);
        for i in 1..n - 1 {
            weights[i] = 0.5 * (points[i + 1] - points[i - 1]);
        }
        Ok(Arc::new(Grid { points, weights }))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest spacing between neighbouring points.
    pub fn max_spacing(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Integrate a real function sampled by `f` over the grid.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn same_grid(a: &ComplexField, b: &ComplexField) -> bool {
    Arc::ptr_eq(&a.grid, &b.grid) || a.grid == b.grid
}

/// Complex amplitude profile sampled on a shared [`Grid`].
#[derive(Debug, Clone)]
pub struct ComplexField {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "field has {} samples, grid has {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Dimension("field contains non-finite samples".into()));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        ComplexField { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Sample `f` at every grid point.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        ComplexField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `self + c * other`, elementwise.
    pub fn axpy(&self, c: Complex64, other: &ComplexField) -> Result<Self> {
        if !same_grid(self, other) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(ComplexField { grid: self.grid.clone(), values })
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(&w, v)| w * v.norm_sqr())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// Grid inner product `⟨f, g⟩ = Σ_k w_k conj(f_k) g_k`, conjugate-linear in
/// the first argument.
pub fn inner_product(f: &ComplexField, g: &ComplexField) -> Result<Complex64> {
    if !same_grid(f, g) {
        return Err(Error::GridMismatch);
    }
    Ok(f.grid
        .weights()
        .iter()
        .zip(f.values.iter().zip(&g.values))
        .map(|(&w, (a, b))| w * a.conj() * b)
        .sum())
}

/// `n`-th Hermite-Gauss mode with waist `w` and the given center, normalized
/// to unit grid norm. The fundamental is `HG₀(x) ∝ exp(−(x−c)²/w²)`.
pub fn hermite_gauss(n: usize, waist: f64, center: f64, grid: &Arc<Grid>) -> Result<ComplexField> {
    if !(waist > 0.0) {
        return Err(Error::Config(format!("waist {waist} must be positive")));
    }
    let spacing = grid.max_spacing();
    if spacing > waist / 16.0 {
        return Err(Error::Resolution { waist, spacing });
    }
    let mut values = Vec::with_capacity(grid.len());
    for &x in grid.points() {
        let xi = std::f64::consts::SQRT_2 * (x - center) / waist;
        // physicists' Hermite recurrence
        let mut h_prev = 0.0_f64;
        let mut h = 1.0_f64;
        for k in 0..n {
            let h_next = 2.0 * xi * h - 2.0 * k as f64 * h_prev;
            h_prev = h;
            h = h_next;
        }
        let envelope = (-(x - center) * (x - center) / (waist * waist)).exp();
        values.push(Complex64::new(h * envelope, 0.0));
    }
    let field = ComplexField::new(grid.clone(), values)?;
    let norm = field.norm();
    if norm <= 0.0 {
        return Err(Error::Resolution { waist, spacing });
    }
    Ok(field.scaled(Complex64::new(1.0 / norm, 0.0)))
}

/// Normalized mean photon field mode `u = ā / ‖ā‖`.
pub fn mean_field_mode(a_bar: &ComplexField) -> Result<ComplexField> {
    let norm = a_bar.norm();
    if norm <= 1e-12 {
        return Err(Error::ZeroMeanField);
    }
    Ok(a_bar.scaled(Complex64::new(1.0 / norm, 0.0)))
}

/// Ordered orthonormal set of mode functions on a shared grid.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    modes: Vec<ComplexField>,
}

impl ModeBasis {
    /// Build from modes, checking pairwise orthonormality to 1e-8.
    pub fn new(modes: Vec<ComplexField>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Dimension("basis must contain at least one mode".into()));
        }
        for i in 0..modes.len() {
            for j in i..modes.len() {
                let g = inner_product(&modes[i], &modes[j])?;
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - target).norm() > ORTHO_TOL {
                    return Err(Error::Dimension(format!(
                        "modes {i},{j} not orthonormal: |⟨i,j⟩ − δ| = {:.3e}",
                        (g - target).norm()
                    )));
                }
            }
        }
        Ok(ModeBasis { modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn mode(&self, i: usize) -> &ComplexField {
        &self.modes[i]
    }

    pub fn modes(&self) -> &[ComplexField] {
        &self.modes
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.modes[0].grid()
    }

    /// Coefficients `c_i = ⟨v_i, f⟩` of a field on this basis.
    pub fn coefficients(&self, f: &ComplexField) -> Result<Vec<Complex64>> {
        self.modes.iter().map(|m| inner_product(m, f)).collect()
    }

    /// Norm of the component of `f` orthogonal to the basis span.
    pub fn residual_norm(&self, f: &ComplexField) -> Result<f64> {
        let mut r = f.clone();
        for m in &self.modes {
            let c = inner_product(m, &r)?;
            r = r.axpy(-c, m)?;
        }
        Ok(r.norm())
    }

    /// Max deviation of the Gram matrix from the identity.
    pub fn gram_residual(&self) -> Result<f64> {
        let mut worst = 0.0_f64;
        for i in 0..self.modes.len() {
            for j in 0..self.modes.len() {
                let g = inner_product(&self.modes[i], &self.modes[j])?;
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        Ok(worst)
    }
}

/// Project out the components of `f` along `basis` (one Gram-Schmidt pass).
fn project_out(f: &ComplexField, basis: &[ComplexField]) -> Result<ComplexField> {
    let mut r = f.clone();
    for m in basis {
        let c = inner_product(m, &r)?;
        r = r.axpy(-c, m)?;
    }
    Ok(r)
}

/// Pivoted Gram-Schmidt over a candidate pool, with two-pass
/// re-orthogonalization. Grows `basis` until `target` is reached (`Some`) or
/// the pool runs out of independent candidates (`None`). Candidates whose
/// residual falls below 1e-10 are rejected as dependent.
fn gram_schmidt_grow(
    mut basis: Vec<ComplexField>,
    pool: &[ComplexField],
    target: Option<usize>,
) -> Result<Vec<ComplexField>> {
    let mut pool: Vec<ComplexField> = pool.to_vec();
    loop {
        if let Some(t) = target {
            if basis.len() >= t {
                return Ok(basis);
            }
        }
        let mut best: Option<(usize, f64, ComplexField)> = None;
        for (idx, cand) in pool.iter().enumerate() {
            let n0 = cand.norm();
            if n0 <= 0.0 {
                continue;
            }
            let unit = cand.scaled(Complex64::new(1.0 / n0, 0.0));
            let r = project_out(&unit, &basis)?;
            let rn = r.norm();
            if rn <= PIVOT_THRESHOLD {
                continue;
            }
            if best.as_ref().is_none_or(|(_, b, _)| rn > *b) {
                best = Some((idx, rn, r));
            }
        }
        let Some((idx, rn, r)) = best else {
            return match target {
                Some(t) => Err(Error::BasisDeficient { got: basis.len(), need: t }),
                None => Ok(basis),
            };
        };
        // second orthogonalization pass for numerical stability
        let r = project_out(&r, &basis)?;
        let rn2 = r.norm();
        if rn2 <= PIVOT_THRESHOLD * rn.max(1.0) {
            pool.remove(idx);
            continue;
        }
        basis.push(r.scaled(Complex64::new(1.0 / rn2, 0.0)));
        pool.remove(idx);
    }
}

/// Complete an orthonormal basis starting from `first`, drawing further modes
/// from `candidates` by largest-residual pivoting.
pub fn complete_basis(
    first: ComplexField,
    candidates: &[ComplexField],
    target_size: usize,
) -> Result<ModeBasis> {
    if target_size == 0 {
        return Err(Error::Dimension("basis size must be ≥ 1".into()));
    }
    let norm = first.norm();
    if norm <= 1e-12 {
        return Err(Error::ZeroDetectionMode);
    }
    let seed = first.scaled(Complex64::new(1.0 / norm, 0.0));
    ModeBasis::new(gram_schmidt_grow(vec![seed], candidates, Some(target_size))?)
}

/// Like [`complete_basis`] but stops, without error, once the candidates are
/// exhausted; the result spans `first` plus all independent candidates.
pub fn complete_up_to(
    first: ComplexField,
    candidates: &[ComplexField],
    max_size: usize,
) -> Result<ModeBasis> {
    let norm = first.norm();
    if norm <= 1e-12 {
        return Err(Error::ZeroDetectionMode);
    }
    let seed = first.scaled(Complex64::new(1.0 / norm, 0.0));
    let mut modes = gram_schmidt_grow(vec![seed], candidates, None)?;
    modes.truncate(max_size.max(1));
    ModeBasis::new(modes)
}

/// Orthonormal basis spanning the independent members of `seeds`, in pivot
/// order.
pub fn orthonormal_span(seeds: &[ComplexField]) -> Result<ModeBasis> {
    ModeBasis::new(gram_schmidt_grow(Vec::new(), seeds, None)?)
}

/// Build the detection-mode basis: mode 1 is `ā′/‖ā′‖`, the rest completes it
/// with a Hermite-Gauss ladder (waist 1, n = 0..M+4) re-orthonormalized.
pub fn build_detection_basis(a_bar_prime: &ComplexField, target_size: usize) -> Result<ModeBasis> {
    build_detection_basis_with_waist(a_bar_prime, target_size, 1.0)
}

/// [`build_detection_basis`] with an explicit seed-ladder waist.
pub fn build_detection_basis_with_waist(
    a_bar_prime: &ComplexField,
    target_size: usize,
    seed_waist: f64,
) -> Result<ModeBasis> {
    let candidates = hg_ladder(a_bar_prime.grid(), seed_waist, target_size + 5)?;
    complete_basis(a_bar_prime.clone(), &candidates, target_size)
}

/// Hermite-Gauss ladder `HG₀..HG_{count−1}` centered at the origin.
pub fn hg_ladder(grid: &Arc<Grid>, waist: f64, count: usize) -> Result<Vec<ComplexField>> {
    (0..count).map(|n| hermite_gauss(n, waist, 0.0, grid)).collect()
}
