use shearmix_core::evolution::{EigenPropagator, StrangStepper};
use shearmix_core::fourier::{build_l, Grid, SpectralField};
use shearmix_core::profiles::ShearProfile;
use shearmix_core::resolvent::{laplace_reconstruct, LaplaceGrid};
use shearmix_core::spectral::{
    asymptotic_seed, dense_spectrum, nondegenerate_critical_points, window_spectrum, ShiftInvert,
};
use shearmix_core::C64;

fn smooth(grid: &Grid) -> SpectralField {
    let v: Vec<C64> = grid
        .points()
        .into_iter()
        .map(|y| C64::new((y - 0.4).cos().exp(), 0.5 * (2.0 * y).sin()))
        .collect();
    SpectralField::from_values(grid, v).unwrap()
}

fn distance(a: &SpectralField, b: &SpectralField) -> f64 {
    let d: Vec<C64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    SpectralField::from_values(a.grid(), d).unwrap().l2_norm() / b.l2_norm()
}

#[test]
fn shift_invert_agrees_with_dense_spectrum() {
    let g = Grid::new(128).unwrap();
    let op = build_l(&ShearProfile::sinusoidal(), 1e-2, &g).unwrap();
    let dense = dense_spectrum(&op).unwrap();
    let solver = ShiftInvert::new(&op).unwrap();
    for pair in dense.iter().take(8) {
        let seed = pair.lambda + C64::new(1e-4, -1e-4);
        let found = solver.solve(seed, 1e-10).unwrap();
        assert!((found.lambda - pair.lambda).norm() < 1e-8, "{} vs {}", found.lambda, pair.lambda);
        assert!(found.residual < 1e-8);
    }
}

#[test]
fn window_matches_the_top_of_the_dense_spectrum() {
    let g = Grid::new(256).unwrap();
    let p = ShearProfile::sinusoidal();
    let window = window_spectrum(&p, 1e-2, 3.0, &g).unwrap();
    assert_eq!(window.pairs.len(), 6);
    assert!(window.anomalies.is_empty());
    let dense = dense_spectrum(&build_l(&p, 1e-2, &g).unwrap()).unwrap();
    let inside: Vec<C64> = dense.iter().map(|d| d.lambda).filter(|l| l.re >= window.threshold()).collect();
    assert_eq!(inside.len(), window.pairs.len());
    for pair in &window.pairs {
        let nearest = inside.iter().map(|l| (l - pair.lambda).norm()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-8);
    }
}

#[test]
fn seeds_approach_dense_eigenvalues() {
    let g = Grid::new(256).unwrap();
    let p = ShearProfile::sinusoidal();
    let cps = nondegenerate_critical_points(&p).unwrap();
    let mut previous = f64::INFINITY;
    for eps in [1e-2, 1e-3] {
        let dense = dense_spectrum(&build_l(&p, eps, &g).unwrap()).unwrap();
        let mut worst: f64 = 0.0;
        for cp in &cps {
            let seed = asymptotic_seed(cp, 0, eps).unwrap();
            let nearest = dense.iter().map(|d| (d.lambda - seed).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest / eps.sqrt());
        }
        assert!(worst < 0.5, "relative seed error {worst} at ε = {eps}");
        assert!(worst < previous);
        previous = worst;
    }
}

#[test]
fn strang_and_eigen_propagation_agree() {
    let g = Grid::new(128).unwrap();
    let p = ShearProfile::sinusoidal();
    let (kappa, k, t, dt) = (1e-3, 1.0, 5.0, 1e-3);
    let f0 = smooth(&g);
    let exact = EigenPropagator::new(&g, &p, kappa, k).unwrap().propagate(&f0, t);
    let stepper = StrangStepper::new(&g, &p, kappa, k, dt);
    let mut v = f0.values().to_vec();
    for _ in 0..(t / dt).round() as usize {
        stepper.step(&mut v);
    }
    let strang = SpectralField::from_values(&g, v).unwrap();
    assert!(distance(&strang, &exact) < 1e-5);
}

#[test]
fn laplace_reconstruction_matches_the_semigroup() {
    let g = Grid::new(64).unwrap();
    let p = ShearProfile::sinusoidal();
    let (eps, t) = (1e-2, 2.0);
    let f0 = smooth(&g);
    let lgrid = LaplaceGrid::for_time(t, eps, p.max_order(), 60.0);
    let laplace = laplace_reconstruct(&p, eps, 0.1, &f0, t, lgrid, 1e-6).unwrap();
    // e^{tL_ε} differs from the k = 1 generator κ(D² − 1) − i b by the factor e^{εt}.
    let mut reference = EigenPropagator::new(&g, &p, eps, 1.0).unwrap().propagate(&f0, t);
    let grow = (eps * t).exp();
    let scaled: Vec<C64> = reference.values().iter().map(|x| x * grow).collect();
    reference = SpectralField::from_values(&g, scaled).unwrap();
    assert!(distance(&laplace.field, &reference) < 1e-4, "{}", distance(&laplace.field, &reference));
}
