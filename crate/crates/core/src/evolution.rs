//! Time stepping of the mode equation `∂_t f + i k b(y) f = κ(∂_y² − k²) f`.
//!
//! The production scheme is Strang splitting with both substeps solved exactly:
//! half a step of pure transport `e^{−ikb dt/2}` on the grid, a full heat step
//! `e^{−κ(η²+k²)dt}` on the coefficients, then the second transport half step.
//! The eigen-propagator scheme diagonalizes the full generator once and is only
//! meant as an oracle for moderate grids.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::fit::{fit_line, fit_loglog, LineFit};
use crate::fourier::{mode_sobolev_norm_from_coefficients, second_derivative_matrix, Grid, SpectralField};
use crate::linalg::{eigen, CMatrix, Lu};
use crate::profiles::ShearProfile;
use crate::C64;
use num_traits::Float;


#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Strang,
    Eigenprop,
}

/// Everything needed to run one evolution.
#[derive(Debug, Clone)]
pub struct EvolveSpec {
    pub profile: ShearProfile,
    pub kappa: f64,
    /// x-wavenumber of the mode.
    pub k: f64,
    pub initial: SpectralField,
    pub t_end: f64,
    pub dt: f64,
    /// Number of steps between diagnostic samples.
    pub cadence: usize,
    pub scheme: Scheme,
}

impl EvolveSpec {
    /// Number of time steps; validates the step/cadence bookkeeping.
    pub fn steps(&self) -> Result<usize> {
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(invalid("κ must be finite and nonnegative"));
        }
        if !(self.dt > 0.0) || !(self.t_end > 0.0) || self.dt > self.t_end {
            return Err(invalid("need 0 < dt ≤ t_end"));
        }
        let steps = (self.t_end / self.dt).round() as usize;
        if ((steps as f64) * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(invalid("t_end must be an integer multiple of dt"));
        }
        if self.cadence == 0 || steps % self.cadence != 0 {
            return Err(invalid(format!("cadence {} does not divide {} steps", self.cadence, steps)));
        }
        Ok(steps)
    }
}

/// Diagnostics of one sample. Norms are per x-mode `k` with the joint multiplier
/// `k² + η²` (homogeneous) or `1 + k² + η²` (inhomogeneous).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticSample {
    pub t: f64,
    pub l2: f64,
    pub h1dot: f64,
    pub hm1: f64,
    pub hm1dot: f64,
    /// `‖f‖_{L²}/‖f‖_{Ḣ¹}`.
    pub ell: f64,
    /// `‖f‖_{Ḣ^{−1}}/‖f‖_{L²}`.
    pub ellbar: f64,
    pub sup: f64,
}

impl DiagnosticSample {
    pub fn compute(field: &SpectralField, k: f64, t: f64) -> Self {
        let c = field.coefficients();
        let l2 = mode_sobolev_norm_from_coefficients(field, &c, k, 0.0, true);
        let h1dot = mode_sobolev_norm_from_coefficients(field, &c, k, 1.0, true);
        let hm1 = mode_sobolev_norm_from_coefficients(field, &c, k, -1.0, false);
        let hm1dot = mode_sobolev_norm_from_coefficients(field, &c, k, -1.0, true);
        Self {
            t,
            l2,
            h1dot,
            hm1,
            hm1dot,
            ell: l2 / h1dot,
            ellbar: hm1dot / l2,
            sup: field.sup_norm(),
        }
    }

    pub fn norm(&self, tag: NormTag) -> f64 {
        match tag {
            NormTag::L2 => self.l2,
            NormTag::H1Dot => self.h1dot,
            NormTag::Hm1 => self.hm1,
            NormTag::Hm1Dot => self.hm1dot,
            NormTag::Sup => self.sup,
        }
    }

    fn is_finite(&self) -> bool {
        [self.l2, self.h1dot, self.hm1, self.hm1dot, self.sup].iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormTag {
    L2,
    H1Dot,
    Hm1,
    Hm1Dot,
    Sup,
}

/// Time series of diagnostics from one run.
#[derive(Debug, Clone)]
pub struct DiagnosticsSeries {
    pub kappa: f64,
    pub k: f64,
    /// Declared critical-point order `N` of the profile.
    pub order: usize,
    pub samples: Vec<DiagnosticSample>,
}

impl DiagnosticsSeries {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn values(&self, tag: NormTag) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm(tag)).collect()
    }

    pub fn enhanced_dissipation_time(&self) -> f64 {
        enhanced_dissipation_time(self.kappa, self.order)
    }
}

/// Output of [`evolve`].
#[derive(Debug, Clone)]
pub struct EvolveOutput {
    pub series: DiagnosticsSeries,
    pub final_field: SpectralField,
}

/// `T_e = κ^{−(N+1)/(N+3)}`.
pub fn enhanced_dissipation_time(kappa: f64, order: usize) -> f64 {
    let m = order as f64;
    kappa.powf(-(m + 1.0) / (m + 3.0))
}

/// Precomputed substep multipliers for repeated Strang steps.
#[derive(Debug, Clone)]
pub struct StrangStepper {
    grid: Grid,
    half_phase: Vec<C64>,
    heat: Option<Vec<f64>>,
}

impl StrangStepper {
    pub fn new(grid: &Grid, profile: &ShearProfile, kappa: f64, k: f64, dt: f64) -> Self {
        let half_phase = grid
            .points()
            .iter()
            .map(|&y| C64::from_polar(1.0, -k * profile.value(y) * dt / 2.0))
            .collect();
        let heat = (kappa != 0.0).then(|| {
            let inv_n = 1.0 / grid.len() as f64;
            (0..grid.len())
                .map(|i| {
                    let eta = grid.wavenumber(i) as f64;
                    (-kappa * (eta * eta + k * k) * dt).exp() * inv_n
                })
                .collect()
        });
        Self { grid: grid.clone(), half_phase, heat }
    }

    pub fn step(&self, values: &mut [C64]) {
        for (v, p) in values.iter_mut().zip(&self.half_phase) {
            *v *= p;
        }
        if let Some(heat) = &self.heat {
            let plan = self.grid.plan();
            plan.forward(values);
            for (v, h) in values.iter_mut().zip(heat) {
                *v *= h;
            }
            plan.inverse(values);
        }
        for (v, p) in values.iter_mut().zip(&self.half_phase) {
            *v *= p;
        }
    }
}

/// One Strang step of size `dt` (either sign when `κ = 0`).
pub fn strang_step(field: &SpectralField, profile: &ShearProfile, kappa: f64, k: f64, dt: f64) -> SpectralField {
    let stepper = StrangStepper::new(field.grid(), profile, kappa, k, dt);
    let mut values = field.values().to_vec();
    stepper.step(&mut values);
    SpectralField::from_values(field.grid(), values).expect("same grid")
}

/// Dense propagator `f(t) = V e^{Λt} V^{−1} f` of the generator
/// `κ(D² − k²) − ik diag(b)`.
#[derive(Debug, Clone)]
pub struct EigenPropagator {
    grid: Grid,
    eigenvalues: Vec<C64>,
    vectors: CMatrix,
    vectors_lu: Lu,
}

impl EigenPropagator {
    pub fn new(grid: &Grid, profile: &ShearProfile, kappa: f64, k: f64) -> Result<Self> {
        if grid.len() > 1024 {
            return Err(invalid("eigen-propagator is limited to n ≤ 1024"));
        }
        let mut m = second_derivative_matrix(grid);
        m.scale(C64::new(kappa, 0.0));
        for (j, y) in grid.points().into_iter().enumerate() {
            m[(j, j)] += C64::new(-kappa * k * k, -k * profile.value(y));
        }
        let (eigenvalues, vectors) = eigen(m)?;
        let vectors_lu = Lu::factor(vectors.clone())?;
        Ok(Self { grid: grid.clone(), eigenvalues, vectors, vectors_lu })
    }

    pub fn propagate(&self, field: &SpectralField, t: f64) -> SpectralField {
        let mut c = self.vectors_lu.solve(field.values());
        for (ci, l) in c.iter_mut().zip(&self.eigenvalues) {
            *ci *= (l * t).exp();
        }
        SpectralField::from_values(&self.grid, self.vectors.matvec(&c)).expect("same grid")
    }
}

/// Runs the evolution and samples diagnostics every `cadence` steps (including `t = 0`).
pub fn evolve(spec: &EvolveSpec) -> Result<EvolveOutput> {
    let steps = spec.steps()?;
    let grid = spec.initial.grid().clone();
    let mut samples = Vec::with_capacity(steps / spec.cadence + 1);
    let record = |field: &SpectralField, t: f64, samples: &mut Vec<DiagnosticSample>| -> Result<()> {
        let s = DiagnosticSample::compute(field, spec.k, t);
        if !s.is_finite() {
            return Err(Error::NonFinite(format!("diagnostics at t = {t}")));
        }
        samples.push(s);
        Ok(())
    };
    record(&spec.initial, 0.0, &mut samples)?;
    let final_field = match spec.scheme {
        Scheme::Strang => {
            let stepper = StrangStepper::new(&grid, &spec.profile, spec.kappa, spec.k, spec.dt);
            let mut values = spec.initial.values().to_vec();
            let mut field = spec.initial.clone();
            for step in 1..=steps {
                stepper.step(&mut values);
                if step % spec.cadence == 0 {
                    field = SpectralField::from_values(&grid, values.clone())?;
                    record(&field, step as f64 * spec.dt, &mut samples)?;
                }
            }
            field
        }
        Scheme::Eigenprop => {
            let prop = EigenPropagator::new(&grid, &spec.profile, spec.kappa, spec.k)?;
            let mut field = spec.initial.clone();
            for sample in 1..=steps / spec.cadence {
                let t = (sample * spec.cadence) as f64 * spec.dt;
                field = prop.propagate(&spec.initial, t);
                record(&field, t, &mut samples)?;
            }
            field
        }
    };
    Ok(EvolveOutput {
        series: DiagnosticsSeries { kappa: spec.kappa, k: spec.k, order: spec.profile.max_order(), samples },
        final_field,
    })
}

/// Least-squares slope of `log ‖f‖` against `log t` over `[t0, t1]`.
///
/// The window must stay before the enhanced-dissipation time `T_e` and contain at
/// least ten samples.
pub fn fit_decay_exponent(series: &DiagnosticsSeries, tag: NormTag, window: (f64, f64)) -> Result<LineFit> {
    let (t0, t1) = window;
    if !(t0 > 0.0 && t1 > t0) {
        return Err(Error::BadWindow(format!("[{t0}, {t1}] is not a positive interval")));
    }
    if series.kappa > 0.0 {
        let te = series.enhanced_dissipation_time();
        if t1 > te {
            return Err(Error::BadWindow(format!("window end {t1} crosses T_e = {te:.3}")));
        }
    }
    let (t, v): (Vec<f64>, Vec<f64>) = series
        .samples
        .iter()
        .filter(|s| s.t >= t0 && s.t <= t1)
        .map(|s| (s.t, s.norm(tag)))
        .unzip();
    if t.len() < 10 {
        return Err(Error::BadWindow(format!("only {} samples in [{t0}, {t1}]", t.len())));
    }
    fit_loglog(&t, &v)
}

/// Exponential decay rate of `‖f‖_{L²} e^{κk²t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateRate {
    /// E-fold rate, positive for decay.
    pub rate: f64,
    pub stderr: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub window: (f64, f64),
}

/// Fits the late-time exponential rate on `[2 T_e, t_end]`, with the diffusive factor
/// `e^{−κk²t}` removed. Fails when the log-linear residual exceeds 5%.
pub fn fit_late_rate(series: &DiagnosticsSeries) -> Result<LateRate> {
    let t_end = series.samples.last().map(|s| s.t).unwrap_or(0.0);
    let t0 = 2.0 * series.enhanced_dissipation_time();
    fit_late_rate_window(series, (t0, t_end))
}

/// [`fit_late_rate`] on an explicit window.
pub fn fit_late_rate_window(series: &DiagnosticsSeries, window: (f64, f64)) -> Result<LateRate> {
    let (t0, t1) = window;
    let k2 = series.k * series.k;
    let (t, v): (Vec<f64>, Vec<f64>) = series
        .samples
        .iter()
        .filter(|s| s.t >= t0 && s.t <= t1 && s.l2 > 0.0)
        .map(|s| (s.t, s.l2.ln() + series.kappa * k2 * s.t))
        .unzip();
    if t.len() < 10 {
        return Err(Error::BadWindow(format!("only {} samples in [{t0:.3}, {t1:.3}]", t.len())));
    }
    let fit = fit_line(&t, &v)?;
    if fit.rms_residual > 0.05 {
        return Err(Error::BadWindow(format!(
            "log-linear residual {:.3} exceeds 5%: exponential regime not reached",
            fit.rms_residual
        )));
    }
    Ok(LateRate { rate: -fit.slope, stderr: fit.slope_stderr, residual: fit.rms_residual, window })
}

/// `f(y) = amplitude · e^{iηy}`.
pub fn plane_wave(grid: &Grid, eta: i64, amplitude: C64) -> SpectralField {
    SpectralField::from_fn(grid, |y| amplitude * C64::from_polar(1.0, eta as f64 * y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(profile: ShearProfile, kappa: f64, t_end: f64, dt: f64, n: usize) -> EvolveSpec {
        let grid = Grid::new(n).unwrap();
        EvolveSpec {
            profile,
            kappa,
            k: 1.0,
            initial: plane_wave(&grid, 1, C64::new(1.0, 0.0)),
            t_end,
            dt,
            cadence: 10,
            scheme: Scheme::Strang,
        }
    }

    #[test]
    fn pure_transport_is_exact() {
        let s = spec(ShearProfile::sinusoidal(), 0.0, 5.0, 0.01, 64);
        let out = evolve(&s).unwrap();
        let exact = SpectralField::from_fn(s.initial.grid(), |y| C64::from_polar(1.0, y - y.sin() * 5.0));
        assert!(out.final_field.sub(&exact).sup_norm() < 1e-12);
        let l0 = out.series.samples[0].l2;
        assert!(out.series.samples.iter().all(|x| (x.l2 - l0).abs() < 1e-12));
    }

    #[test]
    fn heat_multiplier_is_exact() {
        let grid = Grid::new(64).unwrap();
        let f = plane_wave(&grid, 3, C64::new(1.0, 0.0));
        let g = strang_step(&f, &ShearProfile::zero(), 0.1, 1.0, 0.5);
        let factor = (-0.1f64 * 10.0 * 0.5).exp();
        assert!(g.sub(&f.scaled(C64::new(factor, 0.0))).sup_norm() < 1e-14);
    }

    #[test]
    fn strang_is_reversible_without_diffusion() {
        let grid = Grid::new(64).unwrap();
        let p = ShearProfile::degenerate2();
        let f = SpectralField::from_fn(&grid, |y| C64::new(y.cos(), (2.0 * y).sin()));
        let g = strang_step(&strang_step(&f, &p, 0.0, 1.0, 0.3), &p, 0.0, 1.0, -0.3);
        assert!(g.sub(&f).sup_norm() < 1e-12);
    }

    #[test]
    fn l2_is_nonincreasing_with_diffusion() {
        let out = evolve(&spec(ShearProfile::sinusoidal(), 1e-3, 20.0, 0.05, 64)).unwrap();
        for w in out.series.samples.windows(2) {
            assert!(w[1].l2 < w[0].l2);
        }
    }

    #[test]
    fn length_scales_are_scale_invariant() {
        let mut a = spec(ShearProfile::sinusoidal(), 1e-3, 5.0, 0.05, 64);
        let out_a = evolve(&a).unwrap();
        a.initial = a.initial.scaled(C64::new(-3.0, 2.5));
        let out_b = evolve(&a).unwrap();
        for (x, y) in out_a.series.samples.iter().zip(&out_b.series.samples) {
            assert!((x.ell - y.ell).abs() < 1e-12 * x.ell);
            assert!((x.ellbar - y.ellbar).abs() < 1e-12 * x.ellbar);
        }
    }

    #[test]
    fn exact_power_law_fit() {
        let samples = (1..=50)
            .map(|i| {
                let t = i as f64;
                let v = t.powf(-0.5);
                DiagnosticSample { t, l2: v, h1dot: v, hm1: v, hm1dot: v, ell: 1.0, ellbar: 1.0, sup: v }
            })
            .collect();
        let series = DiagnosticsSeries { kappa: 1e-6, k: 1.0, order: 1, samples };
        let fit = fit_decay_exponent(&series, NormTag::Hm1, (1.0, 50.0)).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit_decay_exponent(&series, NormTag::Hm1, (1.0, 5.0)).is_err());
    }

    #[test]
    fn window_crossing_te_is_rejected() {
        let samples = (1..=50)
            .map(|i| DiagnosticSample {
                t: i as f64 * 10.0,
                l2: 1.0,
                h1dot: 1.0,
                hm1: 1.0,
                hm1dot: 1.0,
                ell: 1.0,
                ellbar: 1.0,
                sup: 1.0,
            })
            .collect();
        let series = DiagnosticsSeries { kappa: 1e-4, k: 1.0, order: 1, samples };
        assert!(matches!(
            fit_decay_exponent(&series, NormTag::L2, (10.0, 400.0)),
            Err(Error::BadWindow(_))
        ));
    }
}
