//! Normalized Hermite functions `G_β(x) = (2^β β! √π)^{−1/2} H_β(x) e^{−x²/2}`,
//! their rotated versions, coefficient-space ladder algebra and Gauss–Hermite rules.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::{C64, PI};
use num_traits::Float;


/// Largest degree accepted by the evaluators.
pub const MAX_DEGREE: usize = 400;

/// Largest coefficient count of a [`HermiteExpansion`].
pub const MAX_COEFFICIENTS: usize = 256;

const RESCALE: f64 = 1e150;

/// `G_α(x)` for real `x`, with the Gaussian applied in log space.
pub fn hermite_eval(alpha: usize, x: f64) -> f64 {
    assert!(alpha <= MAX_DEGREE, "Hermite degree above {MAX_DEGREE}");
    let (p, _, log_scale) = real_recurrence(alpha, x);
    if p == 0.0 {
        return 0.0;
    }
    p.signum() * (p.abs().ln() + log_scale - 0.5 * x * x).exp()
}

fn real_recurrence(alpha: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    let mut log_scale = 0.0;
    for b in 0..alpha {
        let bf = b as f64;
        let next = x * (2.0 / (bf + 1.0)).sqrt() * cur - (bf / (bf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    (cur, prev, log_scale)
}

/// `G_α(z)` for complex `z` by the same recurrence on the analytic continuation.
pub fn hermite_eval_complex(alpha: usize, z: C64) -> C64 {
    assert!(alpha <= MAX_DEGREE, "Hermite degree above {MAX_DEGREE}");
    let mut prev = C64::new(0.0, 0.0);
    let mut cur = C64::new(PI.powf(-0.25), 0.0);
    let mut log_scale = 0.0;
    for b in 0..alpha {
        let bf = b as f64;
        let next = z * cur * (2.0 / (bf + 1.0)).sqrt() - prev * (bf / (bf + 1.0)).sqrt();
        prev = cur;
        cur = next;
        if cur.norm() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    if cur == C64::new(0.0, 0.0) {
        return cur;
    }
    (cur.ln() + log_scale - z * z * 0.5).exp()
}

/// `[G_0(x), …, G_max(x)]`.
pub fn hermite_all(max: usize, x: f64) -> Vec<f64> {
    let w = (-0.5 * x * x).exp();
    let mut out = Vec::with_capacity(max + 1);
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * w;
    out.push(cur);
    for b in 0..max {
        let bf = b as f64;
        let next = x * (2.0 / (bf + 1.0)).sqrt() * cur - (bf / (bf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// `Φ_{α,ζ}(Y) = e^{iζ/4} G_α(e^{iζ/2} Y)`.
pub fn rotated_eigenfunction(alpha: usize, zeta: f64, y: f64) -> C64 {
    C64::from_polar(1.0, zeta / 4.0) * hermite_eval_complex(alpha, C64::from_polar(y, zeta / 2.0))
}

/// Finite expansion `Σ_β c_β G_β`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion {
    pub coeffs: Vec<C64>,
    /// Level `α` of the eigenfunction this term belongs to.
    pub level: usize,
    /// Order `k` of the expansion term.
    pub order: usize,
}

impl HermiteExpansion {
    /// The single basis function `G_α`.
    pub fn basis(alpha: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); alpha + 1];
        coeffs[alpha] = C64::new(1.0, 0.0);
        Self { coeffs, level: alpha, order: 0 }
    }

    pub fn zeros(len: usize, level: usize, order: usize) -> Self {
        Self { coeffs: vec![C64::new(0.0, 0.0); len], level, order }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, beta: usize) -> C64 {
        self.coeffs.get(beta).copied().unwrap_or_default()
    }

    /// `Σ c_β G_β(x)`.
    pub fn eval(&self, x: f64) -> C64 {
        let g = hermite_all(self.degree(), x);
        self.coeffs.iter().zip(&g).map(|(c, v)| c * v).sum()
    }

    /// `Σ c_β Φ_{β,ζ}(Y)`.
    pub fn eval_rotated(&self, zeta: f64, y: f64) -> C64 {
        let z = C64::from_polar(y, zeta / 2.0);
        let pre = C64::from_polar(1.0, zeta / 4.0);
        let w = (-z * z * 0.5).exp();
        let mut prev = C64::new(0.0, 0.0);
        let mut cur = w * PI.powf(-0.25);
        let mut acc = self.coeffs.first().copied().unwrap_or_default() * cur;
        for b in 0..self.degree() {
            let bf = b as f64;
            let next = z * cur * (2.0 / (bf + 1.0)).sqrt() - prev * (bf / (bf + 1.0)).sqrt();
            prev = cur;
            cur = next;
            acc += self.coeffs[b + 1] * cur;
        }
        pre * acc
    }

    /// `X·Σ c_β G_β` via `X G_β = √((β+1)/2) G_{β+1} + √(β/2) G_{β−1}`.
    pub fn multiply_by_x(&self) -> Result<Self> {
        let len = self.coeffs.len() + 1;
        if len > MAX_COEFFICIENTS {
            return Err(Error::CoefficientOverflow(len));
        }
        let mut out = vec![C64::new(0.0, 0.0); len];
        for (b, &c) in self.coeffs.iter().enumerate() {
            let bf = b as f64;
            out[b + 1] += c * ((bf + 1.0) / 2.0).sqrt();
            if b > 0 {
                out[b - 1] += c * (bf / 2.0).sqrt();
            }
        }
        Ok(Self { coeffs: out, level: self.level, order: self.order })
    }

    /// Applies [`multiply_by_x`](Self::multiply_by_x) `p` times.
    pub fn multiply_by_x_pow(&self, p: usize) -> Result<Self> {
        let mut e = self.clone();
        for _ in 0..p {
            e = e.multiply_by_x()?;
        }
        Ok(e)
    }

    pub fn scale(&mut self, factor: C64) {
        self.coeffs.iter_mut().for_each(|c| *c *= factor);
    }

    /// `self += factor·other`, growing as needed.
    pub fn add_scaled(&mut self, factor: C64, other: &HermiteExpansion) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), C64::new(0.0, 0.0));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
    }
}

/// Gauss–Hermite rule for `∫ f(x) e^{−x²} dx`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    /// Weights for integrands carrying the `e^{−x²}` factor implicitly.
    pub weights: Vec<f64>,
    /// `w_i e^{x_i²}`: weights for integrands that already decay like `e^{−x²}`,
    /// e.g. products of two Hermite functions.
    pub scaled_weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DEGREE {
            return Err(invalid("Gauss–Hermite order must lie in 1..=400"));
        }
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut log_scaled = vec![0.0; n];
        // Positive roots of G_n by a sign-change scan finer than the smallest root
        // spacing (≈ π/√(2n+1)), then bisection to machine precision.
        let sign_at = |x: f64| real_recurrence(n, x).0;
        let half = n / 2;
        let edge = (2.0 * nf + 1.0).sqrt() + 1.0;
        let h = PI / (2.0 * nf + 1.0).sqrt() / 16.0;
        let mut roots = Vec::with_capacity(half);
        let mut x0 = if n % 2 == 1 { h * 0.5 } else { 0.0 };
        let mut g0 = sign_at(x0);
        while x0 < edge && roots.len() < half {
            let x1 = x0 + h;
            let g1 = sign_at(x1);
            if (g0 < 0.0) != (g1 < 0.0) {
                let (mut a, mut b, ga) = (x0, x1, g0);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if (sign_at(mid) < 0.0) == (ga < 0.0) {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            x0 = x1;
            g0 = g1;
        }
        if roots.len() != half {
            return Err(Error::NoConvergence(alloc::format!(
                "Gauss–Hermite scan found {} of {half} positive nodes",
                roots.len()
            )));
        }
        if n % 2 == 1 {
            roots.insert(0, 0.0);
        }
        for (i, &z) in roots.iter().rev().enumerate() {
            let (_, pm1, log_scale) = real_recurrence(n, z);
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            // scaled weight = 1 / (n G_{n−1}(z)²) with G_{n−1} = p_{n−1} e^{−z²/2}
            let lw = z * z - nf.ln() - 2.0 * (pm1.abs().ln() + log_scale);
            log_scaled[i] = lw;
            log_scaled[n - 1 - i] = lw;
        }
        let scaled_weights: Vec<f64> = log_scaled.iter().map(|l| l.exp()).collect();
        let weights: Vec<f64> = log_scaled.iter().zip(&nodes).map(|(l, x)| (l - x * x).exp()).collect();
        // Ascending order.
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| nodes[a].partial_cmp(&nodes[b]).unwrap());
        let weights: Vec<f64> = idx.iter().map(|&i| weights[i]).collect();
        let scaled_weights = idx.iter().map(|&i| scaled_weights[i]).collect();
        let nodes = idx.iter().map(|&i| nodes[i]).collect();
        Ok(Self { nodes, weights, scaled_weights })
    }

    /// `∫ g(x) dx` for `g` decaying like `e^{−x²}` times a polynomial.
    pub fn integrate_decaying(&self, g: impl Fn(f64) -> C64) -> C64 {
        self.nodes.iter().zip(&self.scaled_weights).map(|(&x, &w)| g(x) * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((hermite_eval(0, 0.0) - 0.751_125_544_464_942_5).abs() < 1e-15);
        assert_eq!(hermite_eval(1, 0.0), 0.0);
        let x: f64 = 0.7;
        let g2 = (4.0 * x * x - 2.0) * (-x * x / 2.0).exp() / (8.0 * PI.sqrt()).sqrt();
        assert!((hermite_eval(2, x) - g2).abs() < 1e-15);
    }

    #[test]
    fn large_arguments_do_not_overflow() {
        let v = hermite_eval(60, 40.0);
        assert!(v.is_finite() && v.abs() < 1e-100);
        let w = hermite_eval(300, 20.0);
        assert!(w.is_finite() && w.abs() < 1.0);
    }

    #[test]
    fn complex_matches_real_on_axis() {
        for a in [0, 3, 17] {
            for x in [-2.5, 0.1, 4.0] {
                let c = hermite_eval_complex(a, C64::new(x, 0.0));
                assert!((c.re - hermite_eval(a, x)).abs() < 1e-13 && c.im.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn orthonormal_under_gauss_hermite() {
        let q = GaussHermite::new(200).unwrap();
        let tables: Vec<Vec<f64>> = q.nodes.iter().map(|&x| hermite_all(20, x)).collect();
        for a in 0..=20 {
            for b in 0..=20 {
                let s: f64 = tables.iter().zip(&q.scaled_weights).map(|(g, w)| g[a] * g[b] * w).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-10, "({a},{b}) -> {s}");
            }
        }
    }

    #[test]
    fn gauss_hermite_weights_sum_to_sqrt_pi() {
        let q = GaussHermite::new(40).unwrap();
        assert!((q.weights.iter().sum::<f64>() - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ladder_identities() {
        let x0 = HermiteExpansion::basis(0).multiply_by_x().unwrap();
        assert!((x0.coeff(1).re - 0.5f64.sqrt()).abs() < 1e-15 && x0.coeff(0).norm() == 0.0);
        let x1 = HermiteExpansion::basis(1).multiply_by_x().unwrap();
        assert!((x1.coeff(0).re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((x1.coeff(2).re - 1.0).abs() < 1e-15);
        let xx0 = HermiteExpansion::basis(0).multiply_by_x_pow(2).unwrap();
        assert!((xx0.coeff(0).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rotated_function_reduces_at_zero_angle() {
        for y in [-1.3, 0.0, 2.2] {
            let v = rotated_eigenfunction(4, 0.0, y);
            assert!((v.re - hermite_eval(4, y)).abs() < 1e-14 && v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn rotated_square_integrates_to_one() {
        let zeta = PI / 4.0;
        let h = 1e-3;
        let s: C64 = (0..=60_000)
            .map(|i| {
                let y = -30.0 + i as f64 * h;
                let v = rotated_eigenfunction(0, zeta, y);
                v * v
            })
            .sum::<C64>()
            * h;
        assert!((s - C64::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn rotated_eigen_equation() {
        let zeta = PI / 4.0;
        for alpha in 0..4 {
            let lam = -C64::from_polar(1.0, zeta) * (2.0 * alpha as f64 + 1.0);
            let h = 2e-3;
            let mut worst: f64 = 0.0;
            for i in -40..=40 {
                let y = i as f64 * 0.1;
                let f = |t: f64| rotated_eigenfunction(alpha, zeta, t);
                let d2 = (-f(y + 2.0 * h) + f(y + h) * 16.0 - f(y) * 30.0 + f(y - h) * 16.0
                    - f(y - 2.0 * h))
                    / (12.0 * h * h);
                let r = lam * f(y) + C64::from_polar(y * y, 2.0 * zeta) * f(y) - d2;
                worst = worst.max(r.norm());
            }
            assert!(worst < 1e-7, "α = {alpha}: {worst}");
        }
    }

    #[test]
    fn expansion_eval_matches_basis() {
        let mut e = HermiteExpansion::zeros(4, 0, 0);
        e.coeffs[1] = C64::new(2.0, 0.0);
        e.coeffs[3] = C64::new(0.0, -1.0);
        let x = 0.6;
        let direct = C64::new(2.0 * hermite_eval(1, x), -hermite_eval(3, x));
        assert!((e.eval(x) - direct).norm() < 1e-14);
        let r = e.eval_rotated(PI / 4.0, x);
        let direct = rotated_eigenfunction(1, PI / 4.0, x) * 2.0 - C64::new(0.0, 1.0) * rotated_eigenfunction(3, PI / 4.0, x);
        assert!((r - direct).norm() < 1e-14);
    }
}
