//! Command-line front end. Every flag overrides the matching config entry.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use shearmix_core::asymptotics::{expansion_prediction, higher_order_expansion};
use shearmix_core::evolution::{enhanced_dissipation_time, fit_late_rate};
use shearmix_core::fourier::Grid;
use shearmix_core::resolvent::{solve_kernels, verify_kernel_bounds, BoundFit, KernelSlice};
use shearmix_core::spectral::{asymptotic_seed, nondegenerate_critical_points, window_spectrum};

use crate::acceptance::{run_criterion_in, select, CriterionResult};
use crate::config::{parse_angle, InitialData, RunConfig, SchemeName, Suite};
use crate::error::{LabError, Result};
use crate::experiments::Run;
use crate::io::RunDir;

#[derive(Debug, Parser)]
#[command(name = "shearmix", version, about = "Mixing and enhanced dissipation experiments for shear flows")]
pub struct Cli {
    /// TOML run configuration; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output root (runs land in <out>/<subcommand>/<config-hash>/).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parameter sweeps (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for random trial generators.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one x-mode and write its diagnostics series.
    Evolve(EvolveArgs),
    /// Slow eigenpairs in the window Re λ ≥ −q√ε.
    Spectrum(SpectrumArgs),
    /// Higher-order eigenvalue expansion at a critical point.
    Asymptotics(AsymptoticsArgs),
    /// Fundamental-solution sweep with the joint bound fit.
    Kernel(KernelArgs),
    /// Acceptance suite with a PASS/FAIL table.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Default)]
pub struct ProfileArgs {
    /// Built-in profile: sin, degenerate2, couette, zero.
    #[arg(long)]
    pub profile: Option<String>,
    /// Grid size (power of two, at least 64).
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: ProfileArgs,
    /// Diffusivity κ.
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Streamwise wavenumber.
    #[arg(long)]
    pub k: Option<f64>,
    /// Final time (default: six enhanced-dissipation times).
    #[arg(long)]
    pub tend: Option<f64>,
    /// Time step.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Approximate number of diagnostic samples.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeName>,
    #[arg(long, value_enum)]
    pub initial: Option<InitialData>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: ProfileArgs,
    /// Viscosity ε of the Airy operator.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Window depth: keep Re λ ≥ −q√ε.
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub common: ProfileArgs,
    /// Critical point, e.g. pi/2.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<String>,
    /// Hermite levels, comma separated.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub alpha: Option<Vec<usize>>,
    /// Truncation order of the expansion.
    #[arg(long)]
    pub order: Option<usize>,
    /// Values of ε at which to evaluate the prediction.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub common: ProfileArgs,
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Pole locations, e.g. pi/2,pi.
    #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true)]
    pub z: Option<Vec<String>>,
    #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true)]
    pub lambda: Option<Vec<f64>>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Contour offset factor σ₀.
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Skip the per-slice CSV dumps.
    #[arg(long)]
    pub no_dump: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Run only these criteria, e.g. AC-4,AC-11.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub only: Option<Vec<String>>,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(LabError::Usage("--threads must be positive".into()));
        }
        // A second initialisation in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        config.output.dir = out;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match cli.command {
        Command::Evolve(a) => {
            apply_common(&mut config, &a.common);
            let e = &mut config.evolve;
            set(&mut e.kappa, a.kappa);
            set(&mut e.k, a.k);
            set(&mut e.dt, a.dt);
            set(&mut e.samples, a.samples);
            set(&mut e.scheme, a.scheme);
            set(&mut e.initial, a.initial);
            if a.tend.is_some() {
                e.t_end = a.tend;
            }
            cmd_evolve(&config)
        }
        Command::Spectrum(a) => {
            apply_common(&mut config, &a.common);
            set(&mut config.spectrum.eps, a.eps);
            set(&mut config.spectrum.q, a.q);
            cmd_spectrum(&config)
        }
        Command::Asymptotics(a) => {
            apply_common(&mut config, &a.common);
            let s = &mut config.asymptotics;
            set(&mut s.gamma, a.gamma);
            set(&mut s.alpha, a.alpha);
            set(&mut s.order, a.order);
            set(&mut s.eps, a.eps);
            cmd_asymptotics(&config)
        }
        Command::Kernel(a) => {
            apply_common(&mut config, &a.common);
            let s = &mut config.kernel;
            set(&mut s.eps, a.eps);
            set(&mut s.z, a.z);
            set(&mut s.lambda, a.lambda);
            set(&mut s.alpha, a.alpha);
            set(&mut s.sigma0, a.sigma0);
            if a.no_dump {
                s.dump = false;
            }
            cmd_kernel(&config)
        }
        Command::Verify(a) => {
            set(&mut config.verify.suite, a.suite);
            set(&mut config.verify.only, a.only);
            cmd_verify(&config)
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_common(config: &mut RunConfig, args: &ProfileArgs) {
    if args.profile.is_some() {
        config.profile.name = args.profile.clone();
    }
    set(&mut config.grid.n, args.n);
}

#[derive(Serialize)]
struct SeriesRow {
    t: f64,
    l2: f64,
    h1dot: f64,
    hm1: f64,
    hm1dot: f64,
    ell: f64,
    ellbar: f64,
    sup: f64,
}

pub fn cmd_evolve(config: &RunConfig) -> Result<i32> {
    let profile = config.profile.build()?;
    config.grid.build()?;
    let e = &config.evolve;
    if !(e.kappa >= 0.0) {
        return Err(LabError::Usage("--kappa must be nonnegative".into()));
    }
    let order = profile.max_order();
    let te = if e.kappa > 0.0 { enhanced_dissipation_time(e.kappa, order) } else { f64::INFINITY };
    let t_end = match e.t_end {
        Some(t) => t,
        None if te.is_finite() => 6.0 * te,
        None => return Err(LabError::Usage("--tend is required when κ = 0".into())),
    };
    let run = Run {
        profile,
        kappa: e.kappa,
        k: e.k,
        n: config.grid.n,
        dt: e.dt,
        t_end,
        samples: e.samples,
        scheme: e.scheme,
        initial: e.initial,
    };
    let spec = run.spec()?;
    let out = shearmix_core::evolution::evolve(&spec)?;
    let rows: Vec<SeriesRow> = out
        .series
        .samples
        .iter()
        .map(|s| SeriesRow {
            t: s.t,
            l2: s.l2,
            h1dot: s.h1dot,
            hm1: s.hm1,
            hm1dot: s.hm1dot,
            ell: s.ell,
            ellbar: s.ellbar,
            sup: s.sup,
        })
        .collect();
    let dir = RunDir::create(config, "evolve")?;
    let csv = dir.write_csv("series", &rows)?;
    let late = fit_late_rate(&out.series).ok().map(|r| r.rate);
    dir.write_manifest(
        config,
        json!({
            "profile": run.profile.name(),
            "N": order,
            "T_e": if te.is_finite() { json!(te) } else { json!(null) },
            "t_end": spec.t_end,
            "steps": spec.steps()?,
            "cadence": spec.cadence,
            "samples": rows.len(),
            "late_rate": late,
            "series": file_name(&csv),
        }),
    )?;
    println!("evolve: {} samples, N = {order}, T_e = {te:.4e} -> {}", rows.len(), dir.path.display());
    Ok(0)
}

fn file_name(p: &std::path::Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

#[derive(Serialize)]
struct PairRow {
    lambda_re: f64,
    lambda_im: f64,
    critical_index: Option<usize>,
    level: Option<usize>,
    seed_re: Option<f64>,
    seed_im: Option<f64>,
    residual: f64,
}

pub fn cmd_spectrum(config: &RunConfig) -> Result<i32> {
    let profile = config.profile.build()?;
    let grid = config.grid.build()?;
    let s = &config.spectrum;
    let window = window_spectrum(&profile, s.eps, s.q, &grid)?;
    let rows = window
        .pairs
        .iter()
        .map(|p| {
            let seed = match (p.critical_index, p.level) {
                (Some(j), Some(a)) => Some(asymptotic_seed(&window.critical_points[j], a, s.eps)?),
                _ => None,
            };
            Ok(PairRow {
                lambda_re: p.lambda.re,
                lambda_im: p.lambda.im,
                critical_index: p.critical_index,
                level: p.level,
                seed_re: seed.map(|z| z.re),
                seed_im: seed.map(|z| z.im),
                residual: p.residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let dir = RunDir::create(config, "spectrum")?;
    dir.write_csv("pairs", &rows)?;
    let anomalies: Vec<_> = window
        .anomalies
        .iter()
        .map(|a| json!({"lambda": [a.lambda.re, a.lambda.im], "first": a.first, "second": a.second}))
        .collect();
    let critical: Vec<_> = window
        .critical_points
        .iter()
        .map(|c| json!({"gamma": c.location, "b": c.value, "b2": c.leading}))
        .collect();
    dir.write_json(
        "spectrum",
        &json!({
            "eps": s.eps,
            "q": s.q,
            "n": grid.len(),
            "threshold": window.threshold(),
            "critical_points": critical,
            "pairs": rows,
            "anomalies": anomalies,
        }),
    )?;
    dir.write_manifest(config, json!({"profile": profile.name(), "N": profile.max_order(), "pairs": rows.len()}))?;
    println!("spectrum: {} pairs in the window (ε = {}, q = {}) -> {}", rows.len(), s.eps, s.q, dir.path.display());
    for r in &rows {
        println!("  λ = {:+.6} {:+.6}i  (j, α) = {:?}", r.lambda_re, r.lambda_im, (r.critical_index, r.level));
    }
    Ok(0)
}

pub fn cmd_asymptotics(config: &RunConfig) -> Result<i32> {
    let profile = config.profile.build()?;
    let a = &config.asymptotics;
    let gamma = parse_angle(&a.gamma)?;
    let cps = nondegenerate_critical_points(&profile)?;
    let cp = cps
        .iter()
        .min_by(|x, y| profile.distance(x.location, gamma).partial_cmp(&profile.distance(y.location, gamma)).unwrap())
        .ok_or_else(|| LabError::Usage(format!("profile '{}' has no non-degenerate critical point", profile.name())))?;
    if profile.distance(cp.location, gamma) > profile.sigma_sharp() {
        return Err(LabError::Usage(format!("no critical point within σ♯ of γ = {gamma:.6}")));
    }
    let mut reports = Vec::new();
    for &alpha in &a.alpha {
        let r = higher_order_expansion(&profile, cp, alpha, a.order)?;
        let lambdas: Vec<_> =
            r.lambdas.iter().enumerate().map(|(k, l)| json!({"k": k, "re": l.re, "im": l.im})).collect();
        let predictions: Vec<_> = a
            .eps
            .iter()
            .map(|&eps| {
                let p = expansion_prediction(&r, eps);
                json!({"eps": eps, "re": p.re, "im": p.im})
            })
            .collect();
        println!("asymptotics: γ = {:.6}, α = {alpha}", cp.location);
        for (k, l) in r.lambdas.iter().enumerate() {
            println!("  Λ_{k} = {:+.10e} {:+.10e}i", l.re, l.im);
        }
        reports.push(json!({
            "gamma": cp.location,
            "alpha": alpha,
            "zeta": r.zeta,
            "wave_speed": r.wave_speed,
            "inner_length": r.inner_length,
            "inner_time": r.inner_time,
            "b_coefficients": r.b_coefficients,
            "lambdas": lambdas,
            "predictions": predictions,
        }));
    }
    let dir = RunDir::create(config, "asymptotics")?;
    dir.write_json("expansion", &reports)?;
    dir.write_manifest(config, json!({"profile": profile.name(), "gamma": cp.location, "order": a.order}))?;
    Ok(0)
}

#[derive(Serialize)]
struct KernelRow {
    y: f64,
    abs_k: f64,
    envelope: f64,
}

#[derive(Serialize)]
struct SliceRow {
    eps: f64,
    lambda: f64,
    z: f64,
    diagonal_re: f64,
    diagonal_im: f64,
    amplitude: f64,
    amplitude_ratio: f64,
    derivative_ratio: f64,
    impulse_residual: f64,
}

#[derive(Serialize)]
struct BoundReport {
    c0: f64,
    amplitude_constant: f64,
    derivative_constant: f64,
    per_eps: Vec<serde_json::Value>,
    slices: usize,
    median_margin: f64,
    worst_slice: usize,
    pass: bool,
}

impl From<&BoundFit> for BoundReport {
    fn from(f: &BoundFit) -> Self {
        Self {
            c0: f.c0,
            amplitude_constant: f.amplitude_constant,
            derivative_constant: f.derivative_constant,
            per_eps: f
                .per_eps
                .iter()
                .map(|e| json!({"eps": e.eps, "amplitude": e.amplitude, "derivative": e.derivative}))
                .collect(),
            slices: f.slices,
            median_margin: f.median_margin,
            worst_slice: f.worst_slice,
            pass: f.pass,
        }
    }
}

pub fn cmd_kernel(config: &RunConfig) -> Result<i32> {
    let profile = config.profile.build()?;
    let grid = config.grid.build()?;
    let k = &config.kernel;
    let zs: Vec<f64> = k
        .z
        .iter()
        .map(|s| parse_angle(s).map(|z| grid.point(grid.nearest_index(z))))
        .collect::<Result<_>>()?;
    if zs.is_empty() || k.lambda.is_empty() || k.eps.is_empty() {
        return Err(LabError::Usage("kernel sweep needs at least one ε, z and λ".into()));
    }
    let cases: Vec<(f64, f64)> = k.eps.iter().flat_map(|&e| k.lambda.iter().map(move |&l| (e, l))).collect();
    let slices: Vec<KernelSlice> = cases
        .par_iter()
        .map(|&(eps, lambda)| solve_kernels(&profile, eps, lambda, k.alpha, k.sigma0, &zs, &grid))
        .collect::<std::result::Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let fit = if distinct(&k.eps) >= 2 { Some(verify_kernel_bounds(&slices)?) } else { None };
    let c0 = fit.as_ref().map(|f| f.c0).unwrap_or(0.05);
    let dir = RunDir::create(config, "kernel")?;
    let rows: Vec<SliceRow> = slices
        .iter()
        .map(|s| SliceRow {
            eps: s.eps,
            lambda: s.lambda,
            z: s.z,
            diagonal_re: s.diagonal().re,
            diagonal_im: s.diagonal().im,
            amplitude: s.amplitude,
            amplitude_ratio: s.amplitude_ratio(c0, 0.0),
            derivative_ratio: s.derivative_ratio(c0, 0.0),
            impulse_residual: s.impulse_residual,
        })
        .collect();
    dir.write_csv("slices", &rows)?;
    if k.dump {
        for (i, s) in slices.iter().enumerate() {
            dir.write_csv(&format!("kernel{i:03}"), &dump_rows(s, &grid, c0))?;
        }
    }
    let report = fit.as_ref().map(BoundReport::from);
    dir.write_json("boundfit", &json!({"fit": report, "c0_used": c0}))?;
    dir.write_manifest(config, json!({"profile": profile.name(), "slices": slices.len()}))?;
    match &fit {
        Some(f) => println!(
            "kernel: {} slices, c0 = {:.2}, C = {:.4}, C' = {:.4}, {} -> {}",
            slices.len(),
            f.c0,
            f.amplitude_constant,
            f.derivative_constant,
            if f.pass { "PASS" } else { "FAIL" },
            dir.path.display()
        ),
        None => println!("kernel: {} slices (one ε: no uniformity fit) -> {}", slices.len(), dir.path.display()),
    }
    Ok(0)
}

fn distinct(xs: &[f64]) -> usize {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v.len()
}

fn dump_rows(s: &KernelSlice, grid: &Grid, c0: f64) -> Vec<KernelRow> {
    grid.points()
        .iter()
        .enumerate()
        .map(|(i, &y)| KernelRow {
            y,
            abs_k: s.kernel.values()[i].norm(),
            envelope: s.amplitude * (-c0 * s.distance[i] * s.inverse_length[i]).exp(),
        })
        .collect()
}

pub fn cmd_verify(config: &RunConfig) -> Result<i32> {
    let criteria = select(&config.verify.only);
    if criteria.is_empty() {
        return Err(LabError::Usage(format!("no criterion matches {:?}", config.verify.only)));
    }
    let mut results: Vec<CriterionResult> = Vec::new();
    for c in &criteria {
        let r = run_criterion_in(c, config.verify.suite);
        println!("{}", r.line());
        results.push(r);
    }
    let dir = RunDir::create(config, "verify")?;
    dir.write_csv("table", &results)?;
    dir.write_manifest(config, json!({"suite": config.verify.suite, "criteria": results.len()}))?;
    let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
    if failed.is_empty() {
        println!("verify: all {} criteria PASS", results.len());
        Ok(0)
    } else {
        Err(LabError::Acceptance(format!("failing: {}", failed.join(", "))))
    }
}
