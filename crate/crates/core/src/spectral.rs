//! Eigenpairs of the discrete `L_ε`: dense QR, shift-invert refinement seeded by the
//! complex-oscillator asymptotics, slow-mode windows and projections.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use crate::error::{invalid, Error, Result};
use crate::fourier::{build_l, DiscreteOperator, Grid, SpectralField};
use crate::hermite::rotated_eigenfunction;
use crate::linalg::{eigen, hessenberg_solve, vdot, vec_norm, CMatrix, Hessenberg};
use crate::profiles::{find_critical_points, CriticalPoint, ShearProfile};
use crate::{C64, PI, TAU};
use num_traits::Float;


#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dense,
    ShiftInvert,
}

/// An eigenvalue with its L²-normalized eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: C64,
    pub vector: SpectralField,
    /// `‖Lφ − λφ‖/‖φ‖`.
    pub residual: f64,
    /// Index of the matched critical point, if any.
    pub critical_index: Option<usize>,
    /// Matched level `α`.
    pub level: Option<usize>,
    pub method: Method,
}

fn normalize_l2(grid: &Grid, mut v: Vec<C64>) -> SpectralField {
    let norm = vec_norm(&v) * grid.dy().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    SpectralField::from_values(grid, v).expect("grid-sized vector")
}

fn residual(matrix: &CMatrix, lambda: C64, v: &[C64]) -> f64 {
    let lv = matrix.matvec(v);
    let r: f64 = lv.iter().zip(v).map(|(a, b)| (a - lambda * b).norm_sqr()).sum::<f64>().sqrt();
    r / vec_norm(v)
}

/// Full spectrum by Hessenberg reduction and shifted QR, sorted by `Re λ` descending.
pub fn dense_spectrum(op: &DiscreteOperator) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    if n > 1024 {
        return Err(invalid("dense spectrum is limited to n ≤ 1024"));
    }
    let (vals, vecs) = eigen(op.matrix.clone())?;
    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|k| {
            let v = vecs.column(k);
            let res = residual(&op.matrix, vals[k], &v);
            EigenPair {
                lambda: vals[k],
                vector: normalize_l2(&op.grid, v),
                residual: res,
                critical_index: None,
                level: None,
                method: Method::Dense,
            }
        })
        .collect();
    pairs.sort_by(|a, b| b.lambda.re.partial_cmp(&a.lambda.re).unwrap());
    Ok(pairs)
}

/// Rotation angle `ζ = sgn(b″(γ))·π/4` of the inner problem at a non-degenerate point.
pub fn branch_angle(cp: &CriticalPoint) -> f64 {
    cp.sign * FRAC_PI_4
}

/// Leading-order eigenvalue `−i b(γ) − ε^{1/2} τ̃^{−1} (2α+1) e^{iζ}`.
pub fn asymptotic_seed(cp: &CriticalPoint, alpha: usize, eps: f64) -> Result<C64> {
    let tau = cp.inner_time.ok_or(Error::DegenerateCriticalPoint { location: cp.location, order: cp.order })?;
    if cp.order != 1 {
        return Err(Error::DegenerateCriticalPoint { location: cp.location, order: cp.order });
    }
    let rot = C64::from_polar(1.0, branch_angle(cp));
    Ok(C64::new(0.0, -cp.value) - rot * (eps.sqrt() / tau * (2.0 * alpha as f64 + 1.0)))
}

/// Reusable shift-invert solver: one Hessenberg reduction, O(n²) per shifted solve.
#[derive(Debug, Clone)]
pub struct ShiftInvert {
    matrix: CMatrix,
    hess: Hessenberg,
    grid: Grid,
    scale: f64,
}

impl ShiftInvert {
    pub fn new(op: &DiscreteOperator) -> Result<Self> {
        let hess = Hessenberg::reduce(op.matrix.clone())?;
        let scale = op.matrix.max_abs().max(1.0);
        Ok(Self { matrix: op.matrix.clone(), hess, grid: op.grid.clone(), scale })
    }

    /// Inverse iteration from `shift`, switching to Rayleigh-quotient shifts after a few
    /// fixed-shift steps. Converges to the eigenvalue nearest the seed.
    ///
    /// A residual history that is not monotone over ten iterations signals oscillation
    /// between eigenvalues; the seed is then perturbed, the perturbation halved on each
    /// of at most three retries.
    pub fn solve(&self, shift: C64, tol: f64) -> Result<EigenPair> {
        let mut delta = C64::new(1e-3, 1e-3) * self.scale.min(1.0) * 1e-2;
        let mut last_err = None;
        for attempt in 0..4 {
            let seed = if attempt == 0 { shift } else { shift + delta };
            match self.iterate(seed, tol) {
                Ok(p) => return Ok(p),
                Err(e) => last_err = Some(e),
            }
            delta *= 0.5;
        }
        Err(last_err.unwrap_or_else(|| Error::NoConvergence("shift-invert".into())))
    }

    fn iterate(&self, seed: C64, tol: f64) -> Result<EigenPair> {
        let n = self.grid.len();
        let h = &self.hess.h;
        let mut x: Vec<C64> = (0..n)
            .map(|j| {
                let t = j as f64;
                C64::new(1.0 + 0.5 * (1.7 * t).sin(), 0.5 * (0.61 * t + 0.3).cos())
            })
            .collect();
        let nx = vec_norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let mut sigma = seed;
        let mut history: Vec<f64> = Vec::new();
        for it in 0..25 {
            let y = match hessenberg_solve(h, -sigma, &x) {
                Ok(y) => y,
                Err(_) => {
                    sigma += C64::new(1e-12, 1e-12) * self.scale;
                    hessenberg_solve(h, -sigma, &x)?
                }
            };
            let ny = vec_norm(&y);
            if !ny.is_finite() || ny == 0.0 {
                return Err(Error::NonFinite("shift-invert iterate".into()));
            }
            x = y.iter().map(|v| v / ny).collect();
            let hx = h.matvec(&x);
            let theta = vdot(&x, &hx);
            let r = hx.iter().zip(&x).map(|(a, b)| (a - theta * b).norm_sqr()).sum::<f64>().sqrt();
            history.push(r);
            if r < tol {
                let v = self.hess.q.matvec(&x);
                let res = residual(&self.matrix, theta, &v);
                return Ok(EigenPair {
                    lambda: theta,
                    vector: normalize_l2(&self.grid, v),
                    residual: res,
                    critical_index: None,
                    level: None,
                    method: Method::ShiftInvert,
                });
            }
            if history.len() >= 10 {
                let w = &history[history.len() - 10..];
                if w.windows(2).filter(|p| p[1] > p[0]).count() >= 3 {
                    return Err(Error::NoConvergence(format!(
                        "residual oscillates near {seed} (iteration {it})"
                    )));
                }
            }
            if it >= 3 {
                sigma = theta;
            }
        }
        Err(Error::NoConvergence(format!(
            "shift-invert from {seed} stalled at residual {:.3e}",
            history.last().copied().unwrap_or(f64::NAN)
        )))
    }
}

/// One-off shift-invert solve on `op`.
pub fn shift_invert_eigen(op: &DiscreteOperator, shift: C64, tol: f64) -> Result<EigenPair> {
    ShiftInvert::new(op)?.solve(shift, tol)
}

/// Two seeds that converged to the same eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowAnomaly {
    pub lambda: C64,
    pub first: (usize, usize),
    pub second: (usize, usize),
}

/// Eigenpairs with `Re λ ≥ −q ε^{1/2}`, sorted by `Re λ` descending.
#[derive(Debug, Clone)]
pub struct SpectralWindow {
    pub eps: f64,
    pub q: f64,
    pub pairs: Vec<EigenPair>,
    pub anomalies: Vec<WindowAnomaly>,
    pub critical_points: Vec<CriticalPoint>,
}

impl SpectralWindow {
    pub fn threshold(&self) -> f64 {
        -self.q * self.eps.sqrt()
    }

    /// `max Re λ` over the window.
    pub fn abscissa(&self) -> Option<f64> {
        self.pairs.first().map(|p| p.lambda.re)
    }

    pub fn find(&self, critical_index: usize, level: usize) -> Option<&EigenPair> {
        self.pairs.iter().find(|p| p.critical_index == Some(critical_index) && p.level == Some(level))
    }
}

/// Critical points of a profile, validated for the slow-mode theory: all non-degenerate
/// with pairwise distinct wave speeds.
pub fn nondegenerate_critical_points(profile: &ShearProfile) -> Result<Vec<CriticalPoint>> {
    let cps = find_critical_points(profile, 1e-8)?;
    for cp in &cps {
        if cp.order != 1 {
            return Err(Error::DegenerateCriticalPoint { location: cp.location, order: cp.order });
        }
    }
    for (i, a) in cps.iter().enumerate() {
        for b in &cps[i + 1..] {
            if (a.value - b.value).abs() < 1e-10 {
                return Err(Error::RepeatedWaveSpeed(a.value));
            }
        }
    }
    Ok(cps)
}

/// Slow eigenpairs of `L_ε` on `grid` seeded at every `(γ_j, α)` with
/// `(2α+1) τ̃_j^{−1} cos(π/4) ≤ q + 1`, converged by shift-invert, matched to the nearest
/// seed within half a level spacing, deduplicated and filtered to the window.
pub fn window_spectrum(profile: &ShearProfile, eps: f64, q: f64, grid: &Grid) -> Result<SpectralWindow> {
    if !(q >= 1.0) || !(eps > 0.0) {
        return Err(invalid("window needs q ≥ 1 and ε > 0"));
    }
    let cps = nondegenerate_critical_points(profile)?;
    let op = build_l(profile, eps, grid)?;
    let solver = ShiftInvert::new(&op)?;
    let mut seeds: Vec<(usize, usize, C64)> = Vec::new();
    for (j, cp) in cps.iter().enumerate() {
        let inv_tau = 1.0 / cp.inner_time.unwrap_or(1.0);
        let mut alpha = 0;
        while (2.0 * alpha as f64 + 1.0) * inv_tau * FRAC_PI_4.cos() <= q + 1.0 {
            seeds.push((j, alpha, asymptotic_seed(cp, alpha, eps)?));
            alpha += 1;
        }
    }
    let tol = 1e-10 * op.matrix.max_abs().max(1.0);
    let mut pairs: Vec<EigenPair> = Vec::new();
    let mut anomalies = Vec::new();
    let mut origin: Vec<(usize, usize)> = Vec::new();
    for &(j, alpha, seed) in &seeds {
        let mut pair = solver.solve(seed, tol)?;
        if let Some(pos) = pairs.iter().position(|p| (p.lambda - pair.lambda).norm() <= 1e-8) {
            anomalies.push(WindowAnomaly { lambda: pair.lambda, first: origin[pos], second: (j, alpha) });
            continue;
        }
        let (mj, ma) = match_to_seed(&cps, eps, pair.lambda, &seeds);
        pair.critical_index = mj;
        pair.level = ma;
        pairs.push(pair);
        origin.push((j, alpha));
    }
    let threshold = -q * eps.sqrt();
    pairs.retain(|p| p.lambda.re >= threshold);
    pairs.sort_by(|a, b| b.lambda.re.partial_cmp(&a.lambda.re).unwrap());
    Ok(SpectralWindow { eps, q, pairs, anomalies, critical_points: cps })
}

fn match_to_seed(
    cps: &[CriticalPoint],
    eps: f64,
    lambda: C64,
    seeds: &[(usize, usize, C64)],
) -> (Option<usize>, Option<usize>) {
    seeds
        .iter()
        .map(|&(j, a, s)| (j, a, (s - lambda).norm()))
        .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
        .filter(|&(j, _, d)| d <= eps.sqrt() / cps[j].inner_time.unwrap_or(1.0))
        .map(|(j, a, _)| (Some(j), Some(a)))
        .unwrap_or((None, None))
}

/// Leading-order eigenfunction `Φ_{α,ζ}((y − γ)/(ℓ̃ ε^{1/4}))` on the grid, with the
/// offset taken periodically in `(−π, π]`.
pub fn predicted_eigenfunction(grid: &Grid, cp: &CriticalPoint, alpha: usize, eps: f64) -> Result<SpectralField> {
    let lt = cp.inner_length.ok_or(Error::DegenerateCriticalPoint { location: cp.location, order: cp.order })?;
    let zeta = branch_angle(cp);
    let width = lt * eps.powf(0.25);
    Ok(SpectralField::from_fn(grid, |y| {
        let u = crate::wrap(y - cp.location + PI, TAU) - PI;
        rotated_eigenfunction(alpha, zeta, u / width)
    }))
}

/// L² distance between the normalized numeric eigenvector and the normalized leading-order
/// prediction after aligning phases.
pub fn compare_eigenfunction(pair: &EigenPair, cp: &CriticalPoint, alpha: usize, eps: f64) -> Result<f64> {
    let grid = pair.vector.grid();
    let pred = predicted_eigenfunction(grid, cp, alpha, eps)?;
    let pred = pred.scaled(C64::new(1.0 / pred.l2_norm(), 0.0));
    let phi = pair.vector.scaled(C64::new(1.0 / pair.vector.l2_norm(), 0.0));
    let ip = pred.inner(&phi);
    let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { C64::new(1.0, 0.0) };
    Ok(phi.scaled(phase).sub(&pred).l2_norm())
}

/// Coefficients `c_j = ∫ f φ_j / ∫ φ_j²` and the reconstruction `Σ c_j φ_j`.
#[derive(Debug, Clone)]
pub struct Projection {
    pub coefficients: Vec<C64>,
    pub reconstruction: SpectralField,
}

impl Projection {
    /// `‖f − Σ c_j φ_j‖/‖f‖`.
    pub fn relative_error(&self, field: &SpectralField) -> f64 {
        field.sub(&self.reconstruction).l2_norm() / field.l2_norm()
    }
}

pub fn slow_projection(field: &SpectralField, pairs: &[EigenPair]) -> Result<Projection> {
    let mut coefficients = Vec::with_capacity(pairs.len());
    let mut reconstruction = SpectralField::zeros(field.grid());
    for p in pairs {
        let norm2 = p.vector.bilinear(&p.vector);
        let scale = p.vector.l2_norm().powi(2);
        if norm2.norm() <= 1e-6 * scale {
            return Err(Error::NearDefective(norm2.norm() / scale));
        }
        let c = field.bilinear(&p.vector) / norm2;
        reconstruction = reconstruction.add(&p.vector.scaled(c));
        coefficients.push(c);
    }
    Ok(Projection { coefficients, reconstruction })
}

/// Traveling-wave speed `−Im λ` and per-mode decay rate `Re λ`.
pub fn traveling_wave_readout(pair: &EigenPair) -> (f64, f64) {
    (-pair.lambda.im, pair.lambda.re)
}

/// `y ↦ conj f(2π − y)`, the symmetry partner map for profiles odd about π.
pub fn reflect_conjugate(field: &SpectralField) -> SpectralField {
    let n = field.grid().len();
    let v = field.values();
    let values = (0..n).map(|j| v[(n - j) % n].conj()).collect();
    SpectralField::from_values(field.grid(), values).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::build_l;

    #[test]
    fn laplacian_levels() {
        let g = Grid::new(64).unwrap();
        let op = build_l(&ShearProfile::zero(), 0.01, &g).unwrap();
        let pairs = dense_spectrum(&op).unwrap();
        for p in &pairs {
            let eta2 = -p.lambda.re / 0.01;
            assert!((eta2 - eta2.round()).abs() < 1e-7 && p.lambda.im.abs() < 1e-10);
            assert!(p.residual < 1e-9);
            assert!((p.vector.l2_norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn seed_values() {
        let cps = find_critical_points(&ShearProfile::sinusoidal(), 1e-8).unwrap();
        let s = asymptotic_seed(&cps[0], 0, 0.01).unwrap();
        assert!((s - C64::new(-0.05, -0.95)).norm() < 1e-12);
        let d = asymptotic_seed(&cps[0], 3, 0.01).unwrap() - asymptotic_seed(&cps[0], 2, 0.01).unwrap();
        let expect = -C64::from_polar(1.0, -FRAC_PI_4) * (2.0 * 0.1 / 2f64.sqrt());
        assert!((d - expect).norm() < 1e-14);
        for cp in &cps {
            assert!(asymptotic_seed(cp, 0, 1e-3).unwrap().re < 0.0);
        }
    }

    #[test]
    fn degenerate_seed_is_rejected() {
        let cps = find_critical_points(&ShearProfile::degenerate2(), 1e-8).unwrap();
        let zero = cps.iter().find(|c| c.order == 2).unwrap();
        assert!(matches!(asymptotic_seed(zero, 0, 1e-3), Err(Error::DegenerateCriticalPoint { .. })));
    }

    #[test]
    fn shift_invert_recovers_dense_pair() {
        let g = Grid::new(64).unwrap();
        let op = build_l(&ShearProfile::sinusoidal(), 0.05, &g).unwrap();
        let dense = dense_spectrum(&op).unwrap();
        let target = dense[3].lambda;
        let p = shift_invert_eigen(&op, target + C64::new(1e-3, 0.0), 1e-11).unwrap();
        assert!((p.lambda - target).norm() < 1e-10);
        assert!(p.residual < 1e-9);
    }

    #[test]
    fn shift_invert_picks_nearest_heat_level() {
        let g = Grid::new(64).unwrap();
        let eps = 0.01;
        let op = build_l(&ShearProfile::zero(), eps, &g).unwrap();
        let p = shift_invert_eigen(&op, C64::new(-0.45 * eps, 0.0), 1e-11).unwrap();
        assert!(p.lambda.norm() < 1e-10);
        let p = shift_invert_eigen(&op, C64::new(-0.55 * eps, 0.0), 1e-11).unwrap();
        assert!((p.lambda + eps).norm() < 1e-10);
    }

    #[test]
    fn projection_identities() {
        let g = Grid::new(64).unwrap();
        let op = build_l(&ShearProfile::sinusoidal(), 0.05, &g).unwrap();
        let pairs: Vec<EigenPair> = dense_spectrum(&op).unwrap().into_iter().take(3).collect();
        let f = pairs[0].vector.scaled(C64::new(2.5, 0.0));
        let proj = slow_projection(&f, &pairs).unwrap();
        assert!((proj.coefficients[0] - C64::new(2.5, 0.0)).norm() < 1e-8);
        assert!(proj.coefficients[1..].iter().all(|c| c.norm() < 1e-8));
        let generic = SpectralField::from_fn(&g, |y| C64::new(1.0 + y.cos(), 0.3 * (2.0 * y).sin()));
        let p1 = slow_projection(&generic, &pairs).unwrap();
        let p2 = slow_projection(&p1.reconstruction, &pairs).unwrap();
        for (a, b) in p1.coefficients.iter().zip(&p2.coefficients) {
            assert!((a - b).norm() < 1e-10 * a.norm().max(1.0));
        }
    }

    #[test]
    fn distance_is_phase_invariant() {
        let g = Grid::new(256).unwrap();
        let p = ShearProfile::sinusoidal();
        let cps = find_critical_points(&p, 1e-8).unwrap();
        let op = build_l(&p, 0.01, &g).unwrap();
        let seed = asymptotic_seed(&cps[0], 0, 0.01).unwrap();
        let pair = shift_invert_eigen(&op, seed, 1e-10).unwrap();
        let d1 = compare_eigenfunction(&pair, &cps[0], 0, 0.01).unwrap();
        let mut rotated = pair.clone();
        rotated.vector = rotated.vector.scaled(C64::from_polar(1.0, 1.234));
        let d2 = compare_eigenfunction(&rotated, &cps[0], 0, 0.01).unwrap();
        assert!((d1 - d2).abs() < 1e-12);
    }
}
