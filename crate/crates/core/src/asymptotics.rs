//! High-order eigenvalue expansion around a non-degenerate critical point.
//!
//! With `y − γ = ℓ̃ ε^{1/4} Y` and `λ = −i b(γ) + ε^{1/2} τ̃^{−1} Λ`, the eigenvalue problem
//! becomes `∂_Y²Φ − i s Y²Φ − i Σ_k ℓ₁^k B_k(Y) Φ = ΛΦ` with `s = sgn b″(γ)`,
//! `ℓ₁ = ℓ̃ ε^{1/4}` and `B_k(Y) = b^{(k+2)}(γ) / ((k+2)! |b″(γ)/2|) · Y^{k+2}`.
//! Expanding `Φ = Σ ℓ₁^k Φ_k`, `Λ = Σ ℓ₁^k Λ_k` gives a triangular recursion that is solved
//! exactly in the rotated Hermite basis `Φ_{β,ζ}`, `ζ = sπ/4`, where the base operator is
//! diagonal and `Y` acts as `e^{−iζ/2}` times the real ladder operator.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use crate::error::{invalid, Error, Result};
use crate::hermite::{HermiteExpansion, MAX_COEFFICIENTS};
use crate::profiles::{CriticalPoint, ShearProfile};
use crate::C64;
use num_traits::Float;


/// Highest supported expansion order.
pub const MAX_ORDER: usize = 6;

/// `B_k(Y) = coefficient · Y^{power}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaledTaylor {
    pub k: usize,
    pub coefficient: f64,
    pub power: usize,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Rescaled Taylor term of order `k ≥ 1` of `b` at a non-degenerate critical point.
pub fn taylor_rescaled_bk(profile: &ShearProfile, cp: &CriticalPoint, k: usize) -> Result<RescaledTaylor> {
    if k == 0 {
        return Err(invalid("B_0 is the base operator, not a correction"));
    }
    if k > MAX_ORDER {
        return Err(invalid("expansion order is capped at 6"));
    }
    if cp.order != 1 {
        return Err(Error::DegenerateCriticalPoint { location: cp.location, order: cp.order });
    }
    let d = profile.derivative(k as u32 + 2, cp.location);
    Ok(RescaledTaylor { k, coefficient: d / (factorial(k + 2) * cp.half_curvature()), power: k + 2 })
}

/// Coefficients of the expansion at one critical point and level.
#[derive(Debug, Clone)]
pub struct ExpansionResult {
    pub alpha: usize,
    /// Rotation angle `ζ = sgn(b″)·π/4` of the basis the `Φ_k` are expressed in.
    pub zeta: f64,
    /// `Λ_0, …, Λ_m`.
    pub lambdas: Vec<C64>,
    /// `Φ_0, …, Φ_m` as coefficients over `Φ_{β,ζ}`.
    pub phis: Vec<HermiteExpansion>,
    /// `B_1, …, B_m` coefficients.
    pub b_coefficients: Vec<f64>,
    pub wave_speed: f64,
    pub inner_length: f64,
    pub inner_time: f64,
}

impl ExpansionResult {
    pub fn order(&self) -> usize {
        self.lambdas.len() - 1
    }
}

/// Runs the recursion in the basis rotated by `zeta` for the given `B_k` coefficients
/// (`bk[0]` is `B_1`). The base operator is `∂² − e^{2iζ} Y²`.
pub fn recursion(bk: &[f64], alpha: usize, order: usize, zeta: f64) -> Result<(Vec<C64>, Vec<HermiteExpansion>)> {
    if order > MAX_ORDER {
        return Err(invalid("expansion order is capped at 6"));
    }
    if bk.len() < order {
        return Err(invalid("not enough Taylor coefficients for the requested order"));
    }
    let size = alpha + 3 * order + 1;
    if size > MAX_COEFFICIENTS {
        return Err(Error::CoefficientOverflow(size));
    }
    let rot = C64::from_polar(1.0, zeta);
    let mut lambdas = alloc::vec![-rot * (2.0 * alpha as f64 + 1.0)];
    let mut phis = alloc::vec![HermiteExpansion::basis(alpha)];
    for k in 1..=order {
        let mut rhs = HermiteExpansion::zeros(size, alpha, k);
        for j in 1..=k {
            let term = phis[k - j].multiply_by_x_pow(j + 2)?;
            let factor = C64::new(0.0, -bk[j - 1]) * C64::from_polar(1.0, -((j + 2) as f64) * zeta / 2.0);
            rhs.add_scaled(factor, &term);
        }
        for j in 1..k {
            rhs.add_scaled(-lambdas[j], &phis[k - j]);
        }
        let lk = rhs.coeff(alpha);
        let mut phi = HermiteExpansion::zeros(rhs.coeffs.len(), alpha, k);
        for (beta, c) in rhs.coeffs.iter().enumerate() {
            if beta != alpha {
                phi.coeffs[beta] = c / (rot * (2.0 * (beta as f64 - alpha as f64)));
            }
        }
        lambdas.push(lk);
        phis.push(phi);
    }
    Ok((lambdas, phis))
}

/// Expansion to the given order at a non-degenerate critical point.
///
/// The recursion always runs on the `ζ = +π/4` branch; for `b″(γ) < 0` it runs on the
/// problem with `B_k ↦ −B_k` and conjugates the resulting `Λ_k` and `Φ_k` coefficients.
pub fn higher_order_expansion(
    profile: &ShearProfile,
    cp: &CriticalPoint,
    alpha: usize,
    order: usize,
) -> Result<ExpansionResult> {
    if cp.order != 1 {
        return Err(Error::DegenerateCriticalPoint { location: cp.location, order: cp.order });
    }
    if order > MAX_ORDER {
        return Err(invalid("expansion order is capped at 6"));
    }
    let bk: Vec<f64> =
        (1..=order).map(|k| taylor_rescaled_bk(profile, cp, k).map(|t| t.coefficient)).collect::<Result<_>>()?;
    let s = cp.sign;
    let signed: Vec<f64> = bk.iter().map(|b| s * b).collect();
    let (mut lambdas, mut phis) = recursion(&signed, alpha, order, FRAC_PI_4)?;
    if s < 0.0 {
        lambdas.iter_mut().for_each(|l| *l = l.conj());
        for p in &mut phis {
            p.coeffs.iter_mut().for_each(|c| *c = c.conj());
        }
    }
    Ok(ExpansionResult {
        alpha,
        zeta: s * FRAC_PI_4,
        lambdas,
        phis,
        b_coefficients: bk,
        wave_speed: cp.value,
        inner_length: cp.inner_length.expect("non-degenerate"),
        inner_time: cp.inner_time.expect("non-degenerate"),
    })
}

/// `λ = −i b(γ) + ε^{1/2} τ̃^{−1} Σ_k (ℓ̃ ε^{1/4})^k Λ_k`.
pub fn expansion_prediction(result: &ExpansionResult, eps: f64) -> C64 {
    let l1 = result.inner_length * eps.powf(0.25);
    let mut sum = C64::new(0.0, 0.0);
    let mut p = 1.0;
    for l in &result.lambdas {
        sum += l * p;
        p *= l1;
    }
    C64::new(0.0, -result.wave_speed) + sum * (eps.sqrt() / result.inner_time)
}
