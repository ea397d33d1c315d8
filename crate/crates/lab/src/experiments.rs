//! Building blocks shared by the subcommands and the acceptance suite.

use shearmix_core::evolution::{evolve, EvolveOutput, EvolveSpec, Scheme};
use shearmix_core::fourier::{build_l, Grid, SpectralField};
use shearmix_core::profiles::{CriticalPoint, ShearProfile};
use shearmix_core::spectral::{asymptotic_seed, EigenPair, ShiftInvert};
use shearmix_core::C64;

use crate::config::{InitialData, SchemeName};
use crate::error::Result;

pub fn initial_field(grid: &Grid, kind: InitialData) -> SpectralField {
    match kind {
        InitialData::Plane => SpectralField::from_fn(grid, |y| C64::from_polar(1.0, y)),
        InitialData::Generic => SpectralField::from_fn(grid, |y| {
            let envelope = (y - 0.4).cos().exp();
            C64::new(envelope, 0.5 * envelope * (2.0 * y).sin()) + C64::from_polar(0.3, 3.0 * y + 1.0)
        }),
    }
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Strang => Scheme::Strang,
            SchemeName::Eigenprop => Scheme::Eigenprop,
        }
    }
}

/// One evolution request; `t_end` is rounded up to a whole number of steps and the
/// sampling cadence is the largest divisor of the step count giving at least `samples`
/// diagnostic rows.
#[derive(Debug, Clone)]
pub struct Run {
    pub profile: ShearProfile,
    pub kappa: f64,
    pub k: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub samples: usize,
    pub scheme: SchemeName,
    pub initial: InitialData,
}

impl Run {
    pub fn new(profile: ShearProfile, kappa: f64, n: usize, t_end: f64) -> Self {
        Self {
            profile,
            kappa,
            k: 1.0,
            n,
            dt: 0.01,
            t_end,
            samples: 2000,
            scheme: SchemeName::Strang,
            initial: InitialData::Plane,
        }
    }

    pub fn spec(&self) -> Result<EvolveSpec> {
        let grid = Grid::new(self.n)?;
        let steps = ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize;
        let target = (steps / self.samples.max(1)).max(1);
        let cadence = (1..=target).rev().find(|c| steps % c == 0).unwrap_or(1);
        Ok(EvolveSpec {
            initial: initial_field(&grid, self.initial),
            profile: self.profile.clone(),
            kappa: self.kappa,
            k: self.k,
            t_end: steps as f64 * self.dt,
            dt: self.dt,
            cadence,
            scheme: self.scheme.into(),
        })
    }

    pub fn execute(&self) -> Result<EvolveOutput> {
        Ok(evolve(&self.spec()?)?)
    }
}

/// Slow eigenpairs converged from the leading-order seeds of the requested
/// `(critical point, α)` combinations, sharing one reduction of `L_ε`.
pub fn seeded_pairs(
    profile: &ShearProfile,
    eps: f64,
    n: usize,
    targets: &[(&CriticalPoint, usize, Option<C64>)],
) -> Result<Vec<EigenPair>> {
    let grid = Grid::new(n)?;
    let op = build_l(profile, eps, &grid)?;
    let solver = ShiftInvert::new(&op)?;
    let tol = 1e-10 * op.matrix.max_abs().max(1.0);
    targets
        .iter()
        .map(|&(cp, alpha, shift)| {
            let seed = match shift {
                Some(s) => s,
                None => asymptotic_seed(cp, alpha, eps)?,
            };
            Ok(solver.solve(seed, tol)?)
        })
        .collect()
}

/// Grid size resolving the `ε^{1/4}` shear layers and the `ε^{1/3}` critical layers.
pub fn grid_for(eps: f64) -> usize {
    if eps >= 1e-3 {
        256
    } else {
        512
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cadence_divides_steps() {
        let mut run = Run::new(ShearProfile::sinusoidal(), 1e-3, 64, 1.234);
        run.samples = 7;
        let spec = run.spec().unwrap();
        let steps = spec.steps().unwrap();
        assert_eq!(steps, 124);
        assert_eq!(steps % spec.cadence, 0);
        assert!(steps / spec.cadence >= 7);
    }

    #[test]
    fn generic_data_touches_many_modes() {
        let g = Grid::new(64).unwrap();
        let c = initial_field(&g, InitialData::Generic).coefficients();
        let active = c.iter().filter(|z| z.norm() > 1e-6).count();
        assert!(active > 8);
    }
}
