//! The acceptance suite AC-1 … AC-11 as runnable experiments.

use std::f64::consts::PI;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use shearmix_core::asymptotics::{expansion_prediction, higher_order_expansion};
use shearmix_core::evolution::{enhanced_dissipation_time, fit_decay_exponent, fit_late_rate, NormTag};
use shearmix_core::fit::fit_loglog;
use shearmix_core::fourier::Grid;
use shearmix_core::profiles::ShearProfile;
use shearmix_core::resolvent::{
    monotone_resolvent_check, solve_kernels, spectral_gap_check, verify_kernel_bounds, KernelSlice, MonotoneSpec,
};
use shearmix_core::spectral::{
    asymptotic_seed, compare_eigenfunction, nondegenerate_critical_points, slow_projection, traveling_wave_readout,
    window_spectrum,
};

use crate::config::{InitialData, Suite};
use crate::error::Result;
use crate::experiments::{grid_for, seeded_pairs, Run};
use crate::identities;

/// What a criterion measured, against what it needed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub measured: String,
    pub expected: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub measured: String,
    pub expected: String,
    pub pass: bool,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} {:<6} {:<34} measured {} | expected {} | {:.1}s",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.measured,
            self.expected,
            self.seconds
        )
    }
}

pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    pub run: fn(Suite) -> Result<Outcome>,
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: "AC-1", title: "mixing rate, N=1", run: mixing_rate_n1 },
        Criterion { id: "AC-2", title: "mixing rate, N=2", run: mixing_rate_n2 },
        Criterion { id: "AC-3", title: "enhanced dissipation exponent", run: dissipation_exponent },
        Criterion { id: "AC-4", title: "eigenvalue asymptotics", run: eigenvalue_asymptotics },
        Criterion { id: "AC-5", title: "eigenfunction convergence", run: eigenfunction_convergence },
        Criterion { id: "AC-6", title: "length scales", run: length_scales },
        Criterion { id: "AC-7", title: "traveling waves", run: traveling_waves },
        Criterion { id: "AC-8", title: "higher-order expansion", run: higher_order },
        Criterion { id: "AC-9", title: "kernel bounds", run: kernel_bounds },
        Criterion { id: "AC-10", title: "monotone resolvent + spectral gap", run: monotone_and_gap },
        Criterion { id: "AC-11", title: "exact identities", run: identities::suite },
    ]
}

/// Runs one criterion, turning an error into a FAIL row that names it.
pub fn run_criterion(c: &Criterion) -> CriterionResult {
    run_criterion_in(c, Suite::Quick)
}

/// [`run_criterion`] at the resolution levels of `suite`.
pub fn run_criterion_in(c: &Criterion, suite: Suite) -> CriterionResult {
    let start = Instant::now();
    let outcome = (c.run)(suite).unwrap_or_else(|e| Outcome {
        measured: format!("error: {e}"),
        expected: "completes".into(),
        pass: false,
    });
    CriterionResult {
        id: c.id.into(),
        title: c.title.into(),
        measured: outcome.measured,
        expected: outcome.expected,
        pass: outcome.pass,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Criteria named in `only`, or all of them when it is empty.
pub fn select(only: &[String]) -> Vec<Criterion> {
    criteria().into_iter().filter(|c| only.is_empty() || only.iter().any(|o| o.eq_ignore_ascii_case(c.id))).collect()
}

/// `(grid multiplier, time step)` levels an evolution criterion runs at. The full suite
/// repeats every evolution at twice the grid and half the step, and both must pass.
fn levels(suite: Suite) -> &'static [(usize, f64)] {
    match suite {
        Suite::Quick => &[(1, 0.01)],
        Suite::Full => &[(1, 0.01), (2, 0.005)],
    }
}

/// Runs `measure` at every level of `suite`; passes only if every level passes.
fn at_levels(suite: Suite, measure: impl Fn(usize, f64) -> Result<Outcome>) -> Result<Outcome> {
    let outcomes = levels(suite).iter().map(|&(m, dt)| measure(m, dt)).collect::<Result<Vec<_>>>()?;
    if outcomes.len() == 1 {
        return Ok(outcomes.into_iter().next().unwrap());
    }
    let measured: Vec<String> = levels(suite)
        .iter()
        .zip(&outcomes)
        .map(|((m, dt), o)| format!("{}x grid, dt {dt}: {}", m, o.measured))
        .collect();
    Ok(Outcome {
        measured: measured.join(" / "),
        expected: outcomes[0].expected.clone(),
        pass: outcomes.iter().all(|o| o.pass),
    })
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn list(xs: &[f64], digits: usize) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.digits$}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Slope of `log ‖f‖_{H^{-1}}` against `log t` on `[10, 0.3 T_e]`.
fn mixing_slope(profile: ShearProfile, kappa: f64, n: usize, dt: f64) -> Result<f64> {
    let t1 = 0.3 * enhanced_dissipation_time(kappa, profile.max_order());
    let mut run = Run::new(profile, kappa, n, t1);
    run.dt = dt;
    let out = run.execute()?;
    Ok(fit_decay_exponent(&out.series, NormTag::Hm1, (10.0, t1))?.slope)
}

fn mixing_rate_n1(suite: Suite) -> Result<Outcome> {
    at_levels(suite, |m, dt| {
        let slopes = [1e-4, 1e-5]
            .par_iter()
            .map(|&kappa| mixing_slope(ShearProfile::sinusoidal(), kappa, 256 * m, dt))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Outcome {
            measured: format!("slopes {} for κ = [1e-4, 1e-5]", list(&slopes, 3)),
            expected: "-0.50 ± 0.10 each".into(),
            pass: slopes.iter().all(|&s| within(s, -0.5, 0.1)),
        })
    })
}

fn mixing_rate_n2(suite: Suite) -> Result<Outcome> {
    at_levels(suite, |m, dt| {
        let s = mixing_slope(ShearProfile::degenerate2(), 1e-5, 512 * m, dt)?;
        Ok(Outcome {
            measured: format!("slope {s:.3}"),
            expected: "-0.333 ± 0.07".into(),
            pass: within(s, -1.0 / 3.0, 0.07),
        })
    })
}

fn late_rate(profile: ShearProfile, kappa: f64, n: usize, dt: f64) -> Result<f64> {
    let te = enhanced_dissipation_time(kappa, profile.max_order());
    let mut run = Run::new(profile, kappa, n, 6.0 * te);
    run.samples = 600;
    run.dt = dt;
    Ok(fit_late_rate(&run.execute()?.series)?.rate)
}

fn dissipation_exponent(suite: Suite) -> Result<Outcome> {
    at_levels(suite, |m, dt| {
        let jobs: Vec<(ShearProfile, f64, usize)> = vec![
            (ShearProfile::sinusoidal(), 1e-3, 256),
            (ShearProfile::sinusoidal(), 1e-4, 256),
            (ShearProfile::sinusoidal(), 1e-5, 512),
            (ShearProfile::degenerate2(), 1e-3, 256),
            (ShearProfile::degenerate2(), 1e-4, 512),
        ];
        let rates = jobs
            .into_par_iter()
            .map(|(p, kappa, n)| late_rate(p, kappa, n * m, dt))
            .collect::<Result<Vec<f64>>>()?;
        let sin = fit_loglog(&[1e-3, 1e-4, 1e-5], &rates[..3])?.slope;
        let deg = fit_loglog(&[1e-3, 1e-4], &rates[3..])?.slope;
        Ok(Outcome {
            measured: format!("sin {sin:.3}, degenerate2 {deg:.3}"),
            expected: "0.50 ± 0.05, 0.60 ± 0.06".into(),
            pass: within(sin, 0.5, 0.05) && within(deg, 0.6, 0.06),
        })
    })
}

fn eigenvalue_asymptotics(_: Suite) -> Result<Outcome> {
    let profile = ShearProfile::sinusoidal();
    let cps = nondegenerate_critical_points(&profile)?;
    let eps_list = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let errors = eps_list
        .par_iter()
        .map(|&eps| {
            let targets: Vec<_> = cps.iter().flat_map(|cp| (0..2).map(move |a| (cp, a, None))).collect();
            let pairs = seeded_pairs(&profile, eps, grid_for(eps), &targets)?;
            targets
                .iter()
                .zip(&pairs)
                .map(|(&(cp, a, _), pair)| Ok((pair.lambda - asymptotic_seed(cp, a, eps)?).norm()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let scale = |eps: f64| eps.powf(0.75);
    let constants: Vec<f64> = errors[0].iter().map(|e| e / scale(eps_list[0])).collect();
    let worst = eps_list[1..]
        .iter()
        .zip(&errors[1..])
        .flat_map(|(&eps, row)| row.iter().zip(&constants).map(move |(e, c)| e / (c * scale(eps))))
        .fold(0.0, f64::max);
    Ok(Outcome {
        measured: format!("C at ε=1e-2 {}; max err/(C ε^0.75) = {worst:.3}", list(&constants, 3)),
        expected: "≤ 1 for ε down to 1e-4".into(),
        pass: worst <= 1.0,
    })
}

fn eigenfunction_convergence(_: Suite) -> Result<Outcome> {
    let profile = ShearProfile::sinusoidal();
    let cps = nondegenerate_critical_points(&profile)?;
    let eps_list = [1e-2, 1e-3, 1e-4];
    let distances = eps_list
        .par_iter()
        .map(|&eps| {
            let targets: Vec<_> = cps.iter().map(|cp| (cp, 0, None)).collect();
            let pairs = seeded_pairs(&profile, eps, grid_for(eps), &targets)?;
            cps.iter().zip(&pairs).map(|(cp, p)| Ok(compare_eigenfunction(p, cp, 0, eps)?)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let slopes = (0..cps.len())
        .map(|j| Ok(fit_loglog(&eps_list, &distances.iter().map(|d| d[j]).collect::<Vec<_>>())?.slope))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Outcome {
        measured: format!("slopes {} at γ = π/2, 3π/2", list(&slopes, 3)),
        expected: "≥ 0.30".into(),
        pass: slopes.iter().all(|&s| s >= 0.30),
    })
}

fn length_scales(suite: Suite) -> Result<Outcome> {
    at_levels(suite, |m, dt| length_scales_at(256 * m, dt))
}

fn length_scales_at(n: usize, dt: f64) -> Result<Outcome> {
    let kappas = [1e-3, 3e-4, 1e-4];
    let plateaus = kappas
        .par_iter()
        .map(|&kappa| {
            let te = enhanced_dissipation_time(kappa, 1);
            let mut run = Run::new(ShearProfile::sinusoidal(), kappa, n, 6.0 * te);
            run.dt = dt;
            let out = run.execute()?;
            let late: Vec<_> = out.series.samples.iter().filter(|s| s.t >= 4.0 * te).collect();
            let mean = |f: fn(&shearmix_core::evolution::DiagnosticSample) -> f64| {
                late.iter().map(|s| f(s)).sum::<f64>() / late.len() as f64
            };
            Ok((mean(|s| s.ell), mean(|s| s.ellbar)))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let ell: Vec<f64> = plateaus.iter().map(|p| p.0).collect();
    let ellbar: Vec<f64> = plateaus.iter().map(|p| p.1).collect();
    let s1 = fit_loglog(&kappas, &ell)?.slope;
    let s2 = fit_loglog(&kappas, &ellbar)?.slope;
    Ok(Outcome {
        measured: format!("ℓ slope {s1:.3}, ℓ̄ slope {s2:.3}"),
        expected: "0.25 ± 0.05, 0.125 ± 0.04".into(),
        pass: within(s1, 0.25, 0.05) && within(s2, 0.125, 0.04),
    })
}

fn traveling_waves(suite: Suite) -> Result<Outcome> {
    at_levels(suite, traveling_waves_at)
}

fn traveling_waves_at(m: usize, dt: f64) -> Result<Outcome> {
    let kappa = 1e-3;
    let profile = ShearProfile::sinusoidal();
    let grid = Grid::new(256 * m)?;
    let window = window_spectrum(&profile, kappa, 3.0, &grid)?;
    let slow: Vec<_> = (0..window.critical_points.len())
        .map(|j| window.find(j, 0).cloned())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| shearmix_core::Error::NoConvergence("slow pair missing from window".into()))?;
    let mut run = Run::new(profile, kappa, 256 * m, 3.0 * enhanced_dissipation_time(kappa, 1));
    run.initial = InitialData::Generic;
    run.dt = dt;
    let field = run.execute()?.final_field;
    let projection = slow_projection(&field, &slow)?;
    let error = projection.relative_error(&field);
    let tol = 2.0 * (2.0 * kappa).sqrt();
    let deviations: Vec<f64> = slow
        .iter()
        .zip(&window.critical_points)
        .map(|(p, cp)| (traveling_wave_readout(p).0 - cp.value).abs())
        .collect();
    Ok(Outcome {
        measured: format!("reconstruction error {:.2}%, |speed − b(γ)| {}", 100.0 * error, list(&deviations, 4)),
        expected: format!("< 5%, ≤ {tol:.4}"),
        pass: error < 0.05 && deviations.iter().all(|&d| d <= tol),
    })
}

fn higher_order(_: Suite) -> Result<Outcome> {
    let profile = ShearProfile::sinusoidal();
    let cps = nondegenerate_critical_points(&profile)?;
    let eps_list = [1e-2, 1e-3, 1e-4];
    let expansions = cps.iter().map(|cp| higher_order_expansion(&profile, cp, 0, 2)).collect::<std::result::Result<Vec<_>, _>>()?;
    let errors = eps_list
        .par_iter()
        .map(|&eps| {
            let predictions: Vec<_> = expansions.iter().map(|e| expansion_prediction(e, eps)).collect();
            let targets: Vec<_> = cps.iter().zip(&predictions).map(|(cp, p)| (cp, 0, Some(*p))).collect();
            let pairs = seeded_pairs(&profile, eps, grid_for(eps), &targets)?;
            cps.iter()
                .zip(&pairs)
                .zip(&predictions)
                .map(|((cp, pair), p2)| Ok(((pair.lambda - asymptotic_seed(cp, 0, eps)?).norm(), (pair.lambda - p2).norm())))
                .collect::<Result<Vec<(f64, f64)>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = errors[1].iter().map(|(e0, e2)| e0 / e2).collect();
    let slopes = (0..cps.len())
        .map(|j| Ok(fit_loglog(&eps_list, &errors.iter().map(|row| row[j].1).collect::<Vec<_>>())?.slope))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Outcome {
        measured: format!("m=0/m=2 error ratio at ε=1e-3 {}, m=2 slopes {}", list(&ratios, 1), list(&slopes, 3)),
        expected: "ratio ≥ 3, slope ≥ 1.1".into(),
        pass: ratios.iter().all(|&r| r >= 3.0) && slopes.iter().all(|&s| s >= 1.1),
    })
}

/// The kernel sweep: critical and monotone poles, spectral values inside, at and
/// outside the range of `b`, three values of ε.
pub fn kernel_sweep(alpha: f64, sigma0: f64) -> Result<Vec<KernelSlice>> {
    let profile = ShearProfile::sinusoidal();
    let poles = [PI / 2.0, 1.5 * PI, PI / 4.0, PI];
    let lambdas = [1.0, -1.0, 0.0, 0.3, -0.6, 1.5, -1.5];
    let cases: Vec<(f64, usize, f64)> = [(1e-2, 512), (1e-3, 512), (1e-4, 1024)]
        .iter()
        .flat_map(|&(eps, n)| lambdas.iter().map(move |&l| (eps, n, l)))
        .collect();
    let chunks = cases
        .into_par_iter()
        .map(|(eps, n, lambda)| {
            let grid = Grid::new(n)?;
            let zs: Vec<f64> = poles.iter().map(|&z| grid.point(grid.nearest_index(z))).collect();
            Ok(solve_kernels(&profile, eps, lambda, alpha, sigma0, &zs, &grid)?)
        })
        .collect::<Result<Vec<Vec<KernelSlice>>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn kernel_bounds(_: Suite) -> Result<Outcome> {
    let slices = kernel_sweep(0.0, 0.1)?;
    let fit = verify_kernel_bounds(&slices)?;
    let pass = fit.pass && fit.c0 >= 0.05 && slices.len() >= 60;
    Ok(Outcome {
        measured: format!(
            "{} slices, c0 = {:.2}, C = {:.3}, C' = {:.3}, fit {}",
            slices.len(),
            fit.c0,
            fit.amplitude_constant,
            fit.derivative_constant,
            if fit.pass { "PASS" } else { "FAIL" }
        ),
        expected: "single (C, c0) with c0 ≥ 0.05 over ≥ 60 slices".into(),
        pass,
    })
}

fn monotone_and_gap(_: Suite) -> Result<Outcome> {
    let monotone = monotone_resolvent_check(&MonotoneSpec::default())?;
    let profile = ShearProfile::sinusoidal();
    let grid = Grid::new(512)?;
    let gaps = [1e-3, 1e-5]
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed + i as u64);
            Ok(spectral_gap_check(&profile, eps, 0.1, 200, &grid, &mut rng)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let s1 = monotone.norm_fit.slope;
    let s2 = monotone.derivative_fit.slope;
    let ratios: Vec<f64> = gaps.iter().map(|g| g.max_ratio).collect();
    Ok(Outcome {
        measured: format!("slopes {s1:.3}, {s2:.3}; max gap ratio {} at ε = [1e-3, 1e-5]", list(&ratios, 3)),
        expected: "-1/3 ± 0.05, -2/3 ± 0.05; ≤ 1".into(),
        pass: within(s1, -1.0 / 3.0, 0.05) && within(s2, -2.0 / 3.0, 0.05) && gaps.iter().all(|g| g.pass()),
    })
}
