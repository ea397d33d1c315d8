//! Periodic grids, FFT-backed fields, Sobolev norms and assembly of `L_ε` and `A_ε`.
//!
//! Coefficient convention: `f̂(η) = (1/n) Σ_j f(y_j) e^{−iη y_j}`, so that
//! `‖f‖²_{L²} = 2π Σ_η |f̂(η)|²`. Index `i` of a coefficient vector holds wavenumber
//! `η = i` for `i < n/2` and `η = i − n` otherwise.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::fft::FftPlan;
use crate::linalg::{CMatrix, Lu};
use crate::profiles::ShearProfile;
use crate::{C64, TAU};
use num_traits::Float;


/// Uniform grid `y_j = 2πj/n` on the circle.
#[derive(Debug, Clone)]
pub struct Grid {
    n: usize,
    plan: Arc<FftPlan>,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 64 || !n.is_power_of_two() {
            return Err(invalid(format!("grid size must be a power of two ≥ 64, got {n}")));
        }
        Ok(Self { n, plan: Arc::new(FftPlan::new(n)?) })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dy(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Wavenumber stored at coefficient index `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Index of the grid point nearest to `y` (periodically).
    pub fn nearest_index(&self, y: f64) -> usize {
        let j = (crate::wrap(y, TAU) / self.dy()).round() as usize;
        j % self.n
    }

    pub fn plan(&self) -> &FftPlan {
        &self.plan
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n
    }
}

/// Complex grid function for one x-Fourier mode.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<C64>,
}

impl SpectralField {
    pub fn from_values(grid: &Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("field length does not match the grid"));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    /// Inverse of [`coefficients`](Self::coefficients).
    pub fn from_coefficients(grid: &Grid, coeffs: &[C64]) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(invalid("coefficient length does not match the grid"));
        }
        let mut values = coeffs.to_vec();
        grid.plan().inverse(&mut values);
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// `f̂(η)` in FFT index order.
    pub fn coefficients(&self) -> Vec<C64> {
        let mut c = self.values.clone();
        self.grid.plan().forward(&mut c);
        let inv = 1.0 / self.grid.len() as f64;
        c.iter_mut().for_each(|v| *v *= inv);
        c
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.dy() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `∫ f ḡ dy` by the periodic trapezoid rule.
    pub fn inner(&self, other: &SpectralField) -> C64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum::<C64>() * self.grid.dy()
    }

    /// Bilinear `∫ f g dy` (no conjugation).
    pub fn bilinear(&self, other: &SpectralField) -> C64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<C64>() * self.grid.dy()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    /// `y ↦ f(y − m Δy)`.
    pub fn translated(&self, m: usize) -> Self {
        let n = self.grid.len();
        let values = (0..n).map(|j| self.values[(j + n - m % n) % n]).collect();
        Self { grid: self.grid.clone(), values }
    }

    /// Spectral derivative of the given order; odd orders drop the Nyquist mode.
    pub fn derivative(&self, order: u32) -> Self {
        let mut c = self.coefficients();
        let n = self.grid.len();
        for (i, v) in c.iter_mut().enumerate() {
            let eta = self.grid.wavenumber(i) as f64;
            if order % 2 == 1 && i == n / 2 {
                *v = C64::new(0.0, 0.0);
                continue;
            }
            *v *= C64::new(0.0, eta).powu(order);
        }
        Self::from_coefficients(&self.grid, &c).expect("same grid")
    }
}

/// `(2π Σ_η w(η)^s |f̂(η)|²)^{1/2}` with `w = 1 + η²` (inhomogeneous) or `η²` (homogeneous,
/// `η = 0` excluded). Homogeneous negative orders require a mean-zero field.
pub fn sobolev_norm(field: &SpectralField, s: f64, homogeneous: bool) -> Result<f64> {
    let c = field.coefficients();
    if homogeneous && s < 0.0 && c[0].norm() >= 1e-10 {
        return Err(Error::NonZeroMean(c[0].norm()));
    }
    Ok(weighted_norm(field, &c, |eta| if homogeneous { eta * eta } else { 1.0 + eta * eta }, s, homogeneous))
}

/// Sobolev norm of the x-mode `k` of a two-dimensional field, using the joint
/// multiplier `k² + η²` (homogeneous) or `1 + k² + η²`. For `k = 0` this is
/// [`sobolev_norm`] without the mean-zero guard.
pub fn mode_sobolev_norm(field: &SpectralField, k: f64, s: f64, homogeneous: bool) -> f64 {
    let c = field.coefficients();
    mode_sobolev_norm_from_coefficients(field, &c, k, s, homogeneous)
}

/// As [`mode_sobolev_norm`] with precomputed coefficients.
pub fn mode_sobolev_norm_from_coefficients(
    field: &SpectralField,
    coeffs: &[C64],
    k: f64,
    s: f64,
    homogeneous: bool,
) -> f64 {
    let k2 = k * k;
    weighted_norm(
        field,
        coeffs,
        |eta| if homogeneous { k2 + eta * eta } else { 1.0 + k2 + eta * eta },
        s,
        homogeneous && k2 == 0.0,
    )
}

fn weighted_norm(
    field: &SpectralField,
    c: &[C64],
    weight: impl Fn(f64) -> f64,
    s: f64,
    skip_zero: bool,
) -> f64 {
    let grid = field.grid();
    let mut acc = 0.0;
    for (i, v) in c.iter().enumerate() {
        let eta = grid.wavenumber(i) as f64;
        if skip_zero && i == 0 {
            continue;
        }
        let w = weight(eta);
        acc += w.powf(s) * v.norm_sqr();
    }
    (TAU * acc).sqrt()
}

/// Real circulant matrix of the spectral second derivative (multiplier `−η²`).
pub fn second_derivative_matrix(grid: &Grid) -> CMatrix {
    let n = grid.len();
    let mut col: Vec<C64> = (0..n)
        .map(|i| {
            let eta = grid.wavenumber(i) as f64;
            C64::new(-eta * eta, 0.0)
        })
        .collect();
    grid.plan().inverse(&mut col);
    let inv = 1.0 / n as f64;
    let c: Vec<f64> = col.iter().map(|v| v.re * inv).collect();
    CMatrix::from_fn(n, n, |i, j| C64::new(c[(i + n - j) % n], 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `ε D² − i b`.
    Evolution,
    /// `−ε D² + (α − σ₀ ε^{(N+1)/(N+3)}) + i(b − λ)`.
    Airy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMeta {
    pub kind: OperatorKind,
    pub eps: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub sigma0: f64,
    pub order: usize,
    pub profile: String,
}

/// Dense matrix of a discretized operator with its parameters.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub matrix: CMatrix,
    pub meta: OperatorMeta,
    /// Set by [`build_a`] when `σ_min(A) < 1e−13 ‖A‖`.
    pub near_singular: bool,
    /// LU factors computed while checking conditioning.
    pub factorization: Option<Lu>,
    pub grid: Grid,
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, field: &SpectralField) -> SpectralField {
        SpectralField { grid: self.grid.clone(), values: self.matrix.matvec(field.values()) }
    }
}

/// Discrete `L_ε = ε D² − i diag(b(y_j))`.
pub fn build_l(profile: &ShearProfile, eps: f64, grid: &Grid) -> Result<DiscreteOperator> {
    if !(eps >= 0.0) {
        return Err(invalid("ε must be nonnegative"));
    }
    let mut m = second_derivative_matrix(grid);
    m.scale(C64::new(eps, 0.0));
    for (j, y) in grid.points().into_iter().enumerate() {
        m[(j, j)] -= C64::new(0.0, profile.value(y));
    }
    Ok(DiscreteOperator {
        matrix: m,
        meta: OperatorMeta {
            kind: OperatorKind::Evolution,
            eps,
            lambda: 0.0,
            alpha: 0.0,
            sigma0: 0.0,
            order: profile.max_order(),
            profile: profile.name().into(),
        },
        near_singular: false,
        factorization: None,
        grid: grid.clone(),
    })
}

/// `σ₀ ε^{(N+1)/(N+3)}`.
pub fn sigma_shift(eps: f64, sigma0: f64, order: usize) -> f64 {
    let m = order as f64;
    sigma0 * eps.powf((m + 1.0) / (m + 3.0))
}

/// Discrete Airy-type operator `−ε D² + (α − σ₀ε^{(N+1)/(N+3)}) I + i diag(b(y_j) − λ)`,
/// factorized, with the near-singularity flag set.
#[allow(clippy::too_many_arguments)]
pub fn build_a(
    profile: &ShearProfile,
    eps: f64,
    lambda: f64,
    alpha: f64,
    sigma0: f64,
    order: usize,
    grid: &Grid,
) -> Result<DiscreteOperator> {
    if !(alpha >= 0.0) {
        return Err(invalid("α must be nonnegative"));
    }
    let mut m = second_derivative_matrix(grid);
    m.scale(C64::new(-eps, 0.0));
    let shift = alpha - sigma_shift(eps, sigma0, order);
    for (j, y) in grid.points().into_iter().enumerate() {
        m[(j, j)] += C64::new(shift, profile.value(y) - lambda);
    }
    let norm = m.norm2_estimate(30);
    let (factorization, near_singular) = match Lu::factor(m.clone()) {
        Ok(lu) => {
            let smin = lu.min_singular_estimate(12);
            (Some(lu), smin < 1e-13 * norm)
        }
        Err(_) => (None, true),
    };
    Ok(DiscreteOperator {
        matrix: m,
        meta: OperatorMeta {
            kind: OperatorKind::Airy,
            eps,
            lambda,
            alpha,
            sigma0,
            order,
            profile: profile.name().into(),
        },
        near_singular,
        factorization,
        grid: grid.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigen;
    use crate::profiles::ShearProfile;

    fn cis(t: f64) -> C64 {
        C64::new(t.cos(), t.sin())
    }

    #[test]
    fn parseval_and_roundtrip() {
        let g = Grid::new(128).unwrap();
        let f = SpectralField::from_fn(&g, |y| C64::new((3.0 * y).sin() + 0.2, (y * 5.0).cos() * y.sin()));
        let c = f.coefficients();
        let par = (TAU * c.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
        assert!((par - f.l2_norm()).abs() < 1e-12);
        let back = SpectralField::from_coefficients(&g, &c).unwrap();
        assert!(back.sub(&f).sup_norm() < 1e-13);
    }

    #[test]
    fn single_mode_norms() {
        let g = Grid::new(64).unwrap();
        let eta = 3.0;
        let f = SpectralField::from_fn(&g, |y| cis(eta * y));
        let n = sobolev_norm(&f, -1.0, false).unwrap();
        assert!((n - TAU.sqrt() / (1.0 + eta * eta).sqrt()).abs() < 1e-12);
        let e1 = SpectralField::from_fn(&g, cis);
        assert!((sobolev_norm(&e1, 1.0, true).unwrap() - TAU.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_negative_needs_mean_zero() {
        let g = Grid::new(64).unwrap();
        let f = SpectralField::from_fn(&g, |_| C64::new(1.0, 0.0));
        assert!(matches!(sobolev_norm(&f, -1.0, true), Err(Error::NonZeroMean(_))));
    }

    #[test]
    fn derivative_commutes_with_translation() {
        let g = Grid::new(128).unwrap();
        let f = SpectralField::from_fn(&g, |y| C64::new((y.sin()).exp(), (2.0 * y).cos()));
        let a = f.translated(7).derivative(1);
        let b = f.derivative(1).translated(7);
        let e = a.sub(&b).sup_norm();
        assert!(e < 1e-12, "{e}");
    }

    #[test]
    fn l_applied_to_exponential() {
        let g = Grid::new(256).unwrap();
        let eps = 0.01;
        let op = build_l(&ShearProfile::sinusoidal(), eps, &g).unwrap();
        let f = SpectralField::from_fn(&g, cis);
        let lf = op.apply(&f);
        let err = g
            .points()
            .iter()
            .zip(lf.values())
            .map(|(&y, v)| (v - C64::new(-eps, -y.sin()) * cis(y)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn laplacian_spectrum() {
        let g = Grid::new(64).unwrap();
        let op = build_l(&ShearProfile::zero(), 1.0, &g).unwrap();
        let (vals, _) = eigen(op.matrix.clone()).unwrap();
        for i in 0..64 {
            let eta = g.wavenumber(i) as f64;
            assert!(vals.iter().any(|v| (v.re + eta * eta).abs() < 1e-9 && v.im.abs() < 1e-9));
        }
    }

    #[test]
    fn airy_is_shifted_negative_l() {
        let g = Grid::new(64).unwrap();
        let p = ShearProfile::sinusoidal();
        let (eps, lam, alpha, s0) = (1e-3, 0.5, 0.2, 0.1);
        let l = build_l(&p, eps, &g).unwrap();
        let a = build_a(&p, eps, lam, alpha, s0, 1, &g).unwrap();
        let c = alpha - sigma_shift(eps, s0, 1);
        let mut expect = l.matrix.clone();
        expect.scale(C64::new(-1.0, 0.0));
        expect.add_to_diagonal(C64::new(c, -lam));
        let mut d = a.matrix.clone();
        d.axpy(C64::new(-1.0, 0.0), &expect);
        assert!(d.max_abs() < 1e-14);
        assert!(!a.near_singular);
    }
}
