use approx::assert_relative_eq;
use proptest::prelude::*;
use shearmix_core::evolution::{DiagnosticSample, StrangStepper};
use shearmix_core::fit::{fit_line, fit_loglog};
use shearmix_core::fourier::{build_a, build_l, sobolev_norm, Grid, SpectralField};
use shearmix_core::hermite::{hermite_eval, HermiteExpansion};
use shearmix_core::profiles::ShearProfile;
use shearmix_core::resolvent::{solve_kernel, Envelope};
use shearmix_core::spectral::{asymptotic_seed, nondegenerate_critical_points};
use shearmix_core::C64;

fn field(grid: &Grid, coeffs: &[(f64, f64)]) -> SpectralField {
    let c: Vec<C64> = (0..grid.len())
        .map(|i| {
            let (re, im) = coeffs[i % coeffs.len()];
            C64::new(re, im) / (1.0 + (grid.wavenumber(i) as f64).powi(2))
        })
        .collect();
    SpectralField::from_coefficients(grid, &c).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 8..32)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn strang_step_never_grows_l2(c in coeffs(), kappa in 0.0..1e-2f64, k in 1.0..4.0f64, dt in 1e-3..0.2f64) {
        let g = Grid::new(64).unwrap();
        let f = field(&g, &c);
        let stepper = StrangStepper::new(&g, &ShearProfile::degenerate2(), kappa, k, dt);
        let mut v = f.values().to_vec();
        stepper.step(&mut v);
        let after = SpectralField::from_values(&g, v).unwrap().l2_norm();
        prop_assert!(after <= f.l2_norm() * (1.0 + 1e-13));
    }

    #[test]
    fn negative_norm_interpolation(c in coeffs()) {
        let g = Grid::new(64).unwrap();
        let f = field(&g, &c);
        let lhs = sobolev_norm(&f, -1.0, false).unwrap() * sobolev_norm(&f, 1.0, false).unwrap();
        prop_assert!(lhs >= f.l2_norm().powi(2) * (1.0 - 1e-12));
    }

    #[test]
    fn length_scales_are_ratios(c in coeffs(), k in 1.0..3.0f64) {
        let g = Grid::new(64).unwrap();
        let s = DiagnosticSample::compute(&field(&g, &c), k, 0.0);
        assert_relative_eq!(s.ell, s.l2 / s.h1dot, max_relative = 1e-14);
        assert_relative_eq!(s.ellbar, s.hm1dot / s.l2, max_relative = 1e-14);
        prop_assert!(s.ell <= 1.0 / k + 1e-14);
    }

    #[test]
    fn seeds_lie_in_the_left_half_plane(eps in 1e-8..0.5f64, alpha in 0usize..12) {
        for cp in nondegenerate_critical_points(&ShearProfile::sinusoidal()).unwrap() {
            let s = asymptotic_seed(&cp, alpha, eps).unwrap();
            prop_assert!(s.re < 0.0);
            assert_relative_eq!(s.re, -(2.0 * alpha as f64 + 1.0) * (eps / 2.0).sqrt() * std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-12);
        }
    }

    #[test]
    fn ladder_matches_pointwise_product(beta in 0usize..40, x in -6.0..6.0f64) {
        let xb = HermiteExpansion::basis(beta).multiply_by_x().unwrap();
        let direct = x * hermite_eval(beta, x);
        prop_assert!((xb.eval(x).re - direct).abs() < 1e-12);
        prop_assert!(xb.eval(x).im.abs() == 0.0);
    }

    #[test]
    fn exact_lines_are_recovered(a in -5.0..5.0f64, b in -3.0..3.0f64, n in 3usize..40) {
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.37 + 1.0).collect();
        let y: Vec<f64> = x.iter().map(|v| a + b * v).collect();
        let fit = fit_line(&x, &y).unwrap();
        prop_assert!((fit.slope - b).abs() < 1e-10);
        let ly: Vec<f64> = x.iter().map(|v| a.exp() * v.powf(b)).collect();
        prop_assert!((fit_loglog(&x, &ly).unwrap().slope - b).abs() < 1e-10);
    }

    #[test]
    fn airy_operator_is_minus_l_shifted(lambda in -2.0..2.0f64, alpha in 0.0..2.0f64, eps in 1e-4..0.1f64) {
        let g = Grid::new(64).unwrap();
        let p = ShearProfile::sinusoidal();
        let a = build_a(&p, eps, lambda, alpha, 0.0, 1, &g).unwrap();
        let mut m = build_l(&p, eps, &g).unwrap().matrix;
        m.scale(C64::new(-1.0, 0.0));
        m.add_to_diagonal(C64::new(alpha, -lambda));
        let diff = a.matrix.as_slice().iter().zip(m.as_slice()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-14);
    }

    #[test]
    fn kernel_conjugation_symmetry(lambda in -1.5..1.5f64, zi in 0usize..128) {
        let g = Grid::new(128).unwrap();
        let p = ShearProfile::sinusoidal();
        let z = g.point(zi);
        let k = solve_kernel(&p, 1e-2, lambda, 0.0, 0.1, z, &g).unwrap();
        let km = solve_kernel(&p.negated(), 1e-2, -lambda, 0.0, 0.1, z, &g).unwrap();
        let scale = k.kernel.sup_norm();
        for (a, b) in k.kernel.values().iter().zip(km.kernel.values()) {
            prop_assert!((a - b.conj()).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn envelope_length_is_symmetric(y in 0.0..6.28f64, z in 0.0..6.28f64, lambda in -1.5..1.5f64) {
        let p = ShearProfile::sinusoidal();
        let env = Envelope::new(&p, 1e-3, lambda, 0.0, 0.1).unwrap();
        prop_assert_eq!(env.inverse_length(y, z), env.inverse_length(z, y));
    }
}
