//! Shear profiles `b(y)`, their critical points, the regularized derivative `|B′|`
//! and the local time/length scales of the advection–diffusion balance.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::{PI, TAU};
use num_traits::Float;


/// One term `a cos(η y) + b sin(η y)` of a truncated Fourier profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierTerm {
    pub eta: u32,
    pub cos_coeff: f64,
    pub sin_coeff: f64,
}

impl FourierTerm {
    pub fn new(eta: u32, cos_coeff: f64, sin_coeff: f64) -> Self {
        Self { eta, cos_coeff, sin_coeff }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Fourier(Vec<FourierTerm>),
    /// `Σ c_i (y − center)^i` on a bounded interval.
    Polynomial { center: f64, coeffs: Vec<f64>, half_width: f64 },
}

/// A velocity profile with exact derivative evaluators.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearProfile {
    name: String,
    kind: Kind,
    sigma_sharp: f64,
    max_order: usize,
}

/// `d^j/dx^j cos x` and `sin x` without phase-shift rounding.
#[inline]
fn cos_sin_derivative(j: u32, c: f64, s: f64) -> (f64, f64) {
    match j % 4 {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

impl ShearProfile {
    /// `b(y) = sin y`.
    pub fn sinusoidal() -> Self {
        Self {
            name: "sinusoidal".into(),
            kind: Kind::Fourier(alloc::vec![FourierTerm::new(1, 0.0, 1.0)]),
            sigma_sharp: PI / 8.0,
            max_order: 1,
        }
    }

    /// `b(y) = sin y − ½ sin 2y`: an order-2 critical point at 0 and order-1 points at ±2π/3.
    pub fn degenerate2() -> Self {
        Self {
            name: "degenerate2".into(),
            kind: Kind::Fourier(alloc::vec![
                FourierTerm::new(1, 0.0, 1.0),
                FourierTerm::new(2, 0.0, -0.5)
            ]),
            sigma_sharp: PI / 16.0,
            max_order: 2,
        }
    }

    /// `b(y) = y` on `[−half_width, half_width]`; not periodic.
    pub fn couette_truncated(half_width: f64) -> Self {
        Self {
            name: "couette-truncated".into(),
            kind: Kind::Polynomial { center: 0.0, coeffs: alloc::vec![0.0, 1.0], half_width },
            sigma_sharp: PI / 8.0,
            max_order: 1,
        }
    }

    /// `b ≡ 0`, used for operator and kernel sanity checks.
    pub fn zero() -> Self {
        Self::fourier("zero", Vec::new(), PI / 8.0, 1)
    }

    /// Custom periodic profile from a truncated Fourier series.
    pub fn fourier(name: &str, terms: Vec<FourierTerm>, sigma_sharp: f64, max_order: usize) -> Self {
        Self { name: name.to_string(), kind: Kind::Fourier(terms), sigma_sharp, max_order }
    }

    /// Non-periodic polynomial `Σ c_i (y − center)^i` on `center ± half_width`.
    pub fn polynomial(
        name: &str,
        center: f64,
        coeffs: Vec<f64>,
        half_width: f64,
        sigma_sharp: f64,
        max_order: usize,
    ) -> Self {
        Self {
            name: name.to_string(),
            kind: Kind::Polynomial { center, coeffs, half_width },
            sigma_sharp,
            max_order,
        }
    }

    /// Looks up a built-in profile.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "sin" | "sinusoidal" => Ok(Self::sinusoidal()),
            "degenerate2" => Ok(Self::degenerate2()),
            "couette" | "couette-truncated" => Ok(Self::couette_truncated(20.0)),
            "zero" => Ok(Self::zero()),
            other => Err(invalid(alloc::format!("unknown profile '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sigma_sharp(&self) -> f64 {
        self.sigma_sharp
    }

    /// Declared maximal order `N` of the critical points.
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, Kind::Fourier(_))
    }

    /// Interval on which the profile lives; `[0, 2π)` when periodic.
    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Fourier(_) => (0.0, TAU),
            Kind::Polynomial { center, half_width, .. } => (center - half_width, center + half_width),
        }
    }

    pub fn value(&self, y: f64) -> f64 {
        self.derivative(0, y)
    }

    /// Exact `b^{(j)}(y)`.
    pub fn derivative(&self, j: u32, y: f64) -> f64 {
        match &self.kind {
            Kind::Fourier(terms) => terms
                .iter()
                .map(|t| {
                    let eta = t.eta as f64;
                    let (c, s) = ((eta * y).cos(), (eta * y).sin());
                    let (dc, ds) = cos_sin_derivative(j, c, s);
                    eta.powi(j as i32) * (t.cos_coeff * dc + t.sin_coeff * ds)
                })
                .sum(),
            Kind::Polynomial { center, coeffs, .. } => {
                let u = y - center;
                coeffs
                    .iter()
                    .enumerate()
                    .skip(j as usize)
                    .map(|(i, &c)| {
                        let falling: f64 = (0..j as usize).map(|r| (i - r) as f64).product();
                        c * falling * u.powi((i - j as usize) as i32)
                    })
                    .sum()
            }
        }
    }

    /// The same profile negated, `−b`.
    pub fn negated(&self) -> Self {
        let kind = match &self.kind {
            Kind::Fourier(terms) => Kind::Fourier(
                terms.iter().map(|t| FourierTerm::new(t.eta, -t.cos_coeff, -t.sin_coeff)).collect(),
            ),
            Kind::Polynomial { center, coeffs, half_width } => Kind::Polynomial {
                center: *center,
                coeffs: coeffs.iter().map(|c| -c).collect(),
                half_width: *half_width,
            },
        };
        Self { name: alloc::format!("-{}", self.name), kind, ..self.clone() }
    }

    /// `y ↦ b(y − shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        let kind = match &self.kind {
            Kind::Fourier(terms) => Kind::Fourier(
                terms
                    .iter()
                    .map(|t| {
                        // a cos(η(y−s)) + b sin(η(y−s)) re-expanded in cos(ηy), sin(ηy).
                        let th = t.eta as f64 * shift;
                        let (c, s) = (th.cos(), th.sin());
                        FourierTerm::new(
                            t.eta,
                            t.cos_coeff * c - t.sin_coeff * s,
                            t.cos_coeff * s + t.sin_coeff * c,
                        )
                    })
                    .collect(),
            ),
            Kind::Polynomial { center, coeffs, half_width } => Kind::Polynomial {
                center: center + shift,
                coeffs: coeffs.clone(),
                half_width: *half_width,
            },
        };
        Self { kind, ..self.clone() }
    }

    /// Minimum and maximum of `b` sampled on 4096 points of the domain.
    pub fn range(&self) -> (f64, f64) {
        let (a, b) = self.domain();
        let m = 4096;
        (0..=m).map(|i| self.value(a + (b - a) * i as f64 / m as f64)).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), v| (lo.min(v), hi.max(v)),
        )
    }

    /// Distance between two locations, periodic when the profile is.
    pub fn distance(&self, y: f64, z: f64) -> f64 {
        let d = (y - z).abs();
        if self.is_periodic() {
            let d = d % TAU;
            d.min(TAU - d)
        } else {
            d
        }
    }
}

/// A root `γ` of `b′` of order `m`: `b^{(j)}(γ) = 0` for `1 ≤ j ≤ m`, `b^{(m+1)}(γ) ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub location: f64,
    pub order: usize,
    /// `b(γ)`, the wave speed of the associated slow modes.
    pub value: f64,
    /// `b^{(m+1)}(γ)`.
    pub leading: f64,
    /// `|b″(γ)/2|^{−1/4}`; only for `m = 1`.
    pub inner_length: Option<f64>,
    /// `|b″(γ)/2|^{−1/2}`; only for `m = 1`.
    pub inner_time: Option<f64>,
    /// Sign of `b^{(m+1)}(γ)` (the sign of `b″` for non-degenerate points).
    pub sign: f64,
}

impl CriticalPoint {
    pub fn is_nondegenerate(&self) -> bool {
        self.order == 1
    }

    /// `|b″(γ)/2|`, the curvature scale of a non-degenerate point.
    pub fn half_curvature(&self) -> f64 {
        (self.leading / 2.0).abs()
    }
}

const SCAN_POINTS: usize = 4096;

fn bracket_root(profile: &ShearProfile, j: u32, mut a: f64, mut b: f64) -> f64 {
    let g = |y: f64| profile.derivative(j, y);
    let mut ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    let mut y = 0.5 * (a + b);
    // Newton polish, kept only while it improves and stays bracketed.
    for _ in 0..8 {
        let (gy, dg) = (g(y), profile.derivative(j + 1, y));
        if dg == 0.0 || gy == 0.0 {
            break;
        }
        let next = y - gy / dg;
        if next < a - (b - a) || next > b + (b - a) || g(next).abs() >= gy.abs() {
            break;
        }
        y = next;
    }
    y
}

/// Locates and classifies every root of `b′` on the profile's domain.
///
/// Roots of each `b^{(j)}`, `1 ≤ j ≤ N+1`, are bracketed on a 4096-point scan, bisected
/// and Newton-polished; a root counts as a critical point when all lower derivatives
/// vanish there as well, which also catches even-order points where `b′` does not
/// change sign. The order is the first `m` with `|b^{(m+1)}(γ)| > tol`.
pub fn find_critical_points(profile: &ShearProfile, tol: f64) -> Result<Vec<CriticalPoint>> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(invalid("critical-point tolerance must lie in (0, 1e-6]"));
    }
    let n_max = profile.max_order();
    let (lo, hi) = profile.domain();
    let periodic = profile.is_periodic();
    let h = (hi - lo) / SCAN_POINTS as f64;
    let vanish = |y: f64, upto: u32| -> bool {
        (1..=upto).all(|i| profile.derivative(i, y).abs() <= tol)
    };
    let mut found: Vec<f64> = Vec::new();
    for j in 1..=(n_max as u32 + 1) {
        let samples = if periodic { SCAN_POINTS } else { SCAN_POINTS + 1 };
        let vals: Vec<f64> = (0..samples).map(|i| profile.derivative(j, lo + h * i as f64)).collect();
        let pairs = if periodic { samples } else { samples - 1 };
        for i in 0..pairs {
            let (y0, g0) = (lo + h * i as f64, vals[i]);
            let g1 = vals[(i + 1) % samples];
            let root = if g0 == 0.0 {
                Some(y0)
            } else if (g0 < 0.0) != (g1 < 0.0) && g1 != 0.0 {
                Some(bracket_root(profile, j, y0, y0 + h))
            } else {
                None
            };
            let Some(mut r) = root else { continue };
            if periodic {
                r = crate::wrap(r, TAU);
                if TAU - r < 1e-13 {
                    r = 0.0;
                }
            }
            if j > 1 && !vanish(r, j - 1) {
                continue;
            }
            if profile.derivative(1, r).abs() > tol {
                continue;
            }
            if !found.iter().any(|&f| profile.distance(f, r) < 1e-7) {
                found.push(r);
            }
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut points = Vec::with_capacity(found.len());
    for &g in &found {
        let order = (1..=n_max + 1).find(|&m| profile.derivative(m as u32 + 1, g).abs() > 1e-8);
        let order = match order {
            Some(m) if m <= n_max => m,
            _ => return Err(Error::OrderTooHigh { location: g, declared: n_max }),
        };
        let leading = profile.derivative(order as u32 + 1, g);
        let (inner_length, inner_time) = if order == 1 {
            let half = (leading / 2.0).abs();
            (Some(half.powf(-0.25)), Some(half.powf(-0.5)))
        } else {
            (None, None)
        };
        points.push(CriticalPoint {
            location: g,
            order,
            value: profile.value(g),
            leading,
            inner_length,
            inner_time,
            sign: leading.signum(),
        });
    }
    let min_sep = 4.0 * profile.sigma_sharp();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if profile.distance(a.location, b.location) < min_sep {
                return Err(Error::CriticalPointsTooClose {
                    a: a.location,
                    b: b.location,
                    min_separation: min_sep,
                });
            }
        }
    }
    Ok(points)
}

fn nearest<'a>(profile: &ShearProfile, cps: &'a [CriticalPoint], y: f64) -> Option<(&'a CriticalPoint, f64)> {
    cps.iter()
        .map(|c| (c, profile.distance(y, c.location)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
}

/// Signed offset `y − γ` reduced to `(−π, π]` for periodic profiles.
fn signed_offset(profile: &ShearProfile, y: f64, gamma: f64) -> f64 {
    let d = y - gamma;
    if profile.is_periodic() {
        let r = crate::wrap(d + PI, TAU) - PI;
        if r == -PI {
            PI
        } else {
            r
        }
    } else {
        d
    }
}

/// Regularized derivative `|B′(y)|`.
///
/// Within `σ♯` of an order-`m` critical point it is `2σ₀(|y−γ|^m + ε^{m/(m+3)})`, beyond
/// `2σ♯` of every critical point it is `2σ₀|b′(y)|`, and on the annulus in between it
/// interpolates linearly in `|y−γ|` between the two branch values at `σ♯` and `2σ♯`
/// on the same side of `γ`.
pub fn regularized_derivative(
    profile: &ShearProfile,
    cps: &[CriticalPoint],
    y: f64,
    eps: f64,
    sigma0: f64,
) -> f64 {
    let far = |x: f64| 2.0 * sigma0 * profile.derivative(1, x).abs();
    let Some((cp, d)) = nearest(profile, cps, y) else {
        return far(y);
    };
    let s = profile.sigma_sharp();
    let m = cp.order as i32;
    let near = |dist: f64| 2.0 * sigma0 * (dist.powi(m) + eps.powf(m as f64 / (m as f64 + 3.0)));
    if d <= s {
        near(d)
    } else if d >= 2.0 * s {
        far(y)
    } else {
        let side = signed_offset(profile, y, cp.location).signum();
        let inner = near(s);
        let outer = far(cp.location + side * 2.0 * s);
        inner + (d - s) / s * (outer - inner)
    }
}

/// Local advection–diffusion time and length scales `(T_loc, L_loc)` at `y`.
///
/// Within `σ♯` of a critical point of order `m` the critical-point formulas apply,
/// beyond `2σ♯` the monotone ones; the annulus in between is rejected.
pub fn local_scales(
    profile: &ShearProfile,
    cps: &[CriticalPoint],
    y: f64,
    kappa: f64,
    k: f64,
) -> Result<(f64, f64)> {
    if !(kappa > 0.0) || !(k >= 1.0) {
        return Err(invalid("local_scales needs κ > 0 and k ≥ 1"));
    }
    let s = profile.sigma_sharp();
    if let Some((cp, d)) = nearest(profile, cps, y) {
        if d <= s {
            let m = cp.order as f64;
            let a = k * cp.leading.abs();
            return Ok((
                a.powf(-2.0 / (m + 3.0)) * kappa.powf(-(m + 1.0) / (m + 3.0)),
                a.powf(-1.0 / (m + 3.0)) * kappa.powf(1.0 / (m + 3.0)),
            ));
        }
        if d < 2.0 * s {
            return Err(Error::AmbiguousRegime { y, gamma: cp.location });
        }
    }
    let a = k * profile.derivative(1, y).abs();
    Ok((a.powf(-2.0 / 3.0) * kappa.powf(-1.0 / 3.0), a.powf(-1.0 / 3.0) * kappa.powf(1.0 / 3.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinusoidal_derivatives_are_exact() {
        let p = ShearProfile::sinusoidal();
        for &y in &[0.0, 0.3, 2.0, 5.5] {
            assert_eq!(p.derivative(1, y), y.cos());
            assert_eq!(p.derivative(2, y), -y.sin());
            assert_eq!(p.derivative(4, y), y.sin());
        }
        assert!((p.value(0.0) - p.value(TAU)).abs() < 1e-12);
    }

    #[test]
    fn polynomial_derivatives() {
        let p = ShearProfile::polynomial("cubic", 0.0, alloc::vec![0.0, 0.0, 0.5, 1.0 / 6.0], 10.0, 0.5, 1);
        let y = 0.7;
        assert!((p.value(y) - (y * y / 2.0 + y * y * y / 6.0)).abs() < 1e-15);
        assert!((p.derivative(1, y) - (y + y * y / 2.0)).abs() < 1e-15);
        assert!((p.derivative(3, y) - 1.0).abs() < 1e-15);
        assert_eq!(p.derivative(4, y), 0.0);
    }

    #[test]
    fn sinusoidal_critical_points() {
        let cps = find_critical_points(&ShearProfile::sinusoidal(), 1e-8).unwrap();
        assert_eq!(cps.len(), 2);
        assert!((cps[0].location - PI / 2.0).abs() < 1e-12);
        assert!((cps[1].location - 3.0 * PI / 2.0).abs() < 1e-12);
        assert_eq!(cps[0].order, 1);
        assert!((cps[0].value - 1.0).abs() < 1e-14 && (cps[0].leading + 1.0).abs() < 1e-12);
        assert!((cps[1].value + 1.0).abs() < 1e-14 && (cps[1].leading - 1.0).abs() < 1e-12);
        assert!((cps[0].inner_time.unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate2_inventory() {
        let cps = find_critical_points(&ShearProfile::degenerate2(), 1e-8).unwrap();
        assert_eq!(cps.len(), 3);
        let zero = cps.iter().find(|c| c.location < 1e-9 || TAU - c.location < 1e-9).unwrap();
        assert_eq!(zero.order, 2);
        assert!((zero.leading - 3.0).abs() < 1e-10);
        let p = cps.iter().find(|c| (c.location - 2.0 * PI / 3.0).abs() < 1e-10).unwrap();
        assert_eq!(p.order, 1);
        assert!((p.value - 3f64.sqrt() * 3.0 / 4.0).abs() < 1e-12);
        assert!(cps.iter().any(|c| (c.location - 4.0 * PI / 3.0).abs() < 1e-10));
    }

    #[test]
    fn couette_has_no_critical_points() {
        assert!(find_critical_points(&ShearProfile::couette_truncated(20.0), 1e-8).unwrap().is_empty());
    }

    #[test]
    fn order_above_declared_is_rejected() {
        let mut p = ShearProfile::degenerate2();
        p.max_order = 1;
        assert!(matches!(find_critical_points(&p, 1e-8), Err(Error::OrderTooHigh { .. })));
    }

    #[test]
    fn close_points_are_rejected() {
        let p = ShearProfile::fourier("sin4", alloc::vec![FourierTerm::new(4, 0.0, 1.0)], PI / 8.0, 1);
        assert!(matches!(
            find_critical_points(&p, 1e-8),
            Err(Error::CriticalPointsTooClose { .. })
        ));
    }

    #[test]
    fn regularized_derivative_branches() {
        let p = ShearProfile::sinusoidal();
        let cps = find_critical_points(&p, 1e-8).unwrap();
        let v = regularized_derivative(&p, &cps, PI / 2.0, 1e-4, 0.1);
        assert!((v - 0.02).abs() < 1e-12);
        let s = p.sigma_sharp();
        let y = PI / 2.0 + 3.0 * s;
        assert!((regularized_derivative(&p, &cps, y, 0.3, 0.1) - 0.2 * y.cos().abs()).abs() < 1e-15);
        let eps = 1e-3;
        let mid = regularized_derivative(&p, &cps, PI / 2.0 + 1.5 * s, eps, 0.1);
        let a = 0.2 * (s + eps.powf(0.25));
        let b = 0.2 * (PI / 2.0 + 2.0 * s).cos().abs();
        assert!((mid - 0.5 * (a + b)).abs() < 1e-14);
    }

    #[test]
    fn regularized_derivative_is_continuous() {
        let p = ShearProfile::degenerate2();
        let cps = find_critical_points(&p, 1e-8).unwrap();
        let s = p.sigma_sharp();
        for cp in &cps {
            for side in [-1.0, 1.0] {
                for r in [1.0, 2.0] {
                    let y = cp.location + side * r * s;
                    let h = 1e-13;
                    let a = regularized_derivative(&p, &cps, y - side * h, 1e-4, 0.1);
                    let b = regularized_derivative(&p, &cps, y + side * h, 1e-4, 0.1);
                    assert!((a - b).abs() < 1e-12, "jump {} at {}", (a - b).abs(), y);
                }
            }
        }
    }

    #[test]
    fn local_scale_examples() {
        let c = ShearProfile::couette_truncated(20.0);
        let (t, l) = local_scales(&c, &[], 0.3, 1e-6, 1.0).unwrap();
        assert!((t - 1e2).abs() < 1e-9 && (l - 1e-2).abs() < 1e-14);
        let p = ShearProfile::sinusoidal();
        let cps = find_critical_points(&p, 1e-8).unwrap();
        let (t, l) = local_scales(&p, &cps, PI / 2.0, 1e-4, 1.0).unwrap();
        assert!((t - 100.0).abs() < 1e-9 && (l - 0.1).abs() < 1e-12);
        let y = PI / 2.0 + 1.5 * p.sigma_sharp();
        assert!(matches!(local_scales(&p, &cps, y, 1e-4, 1.0), Err(Error::AmbiguousRegime { .. })));
        let (t, l) = local_scales(&p, &cps, 0.1, 1e-4, 1.0).unwrap();
        assert!((l - (1e-4 * t).sqrt()).abs() < 1e-14);
    }
}
