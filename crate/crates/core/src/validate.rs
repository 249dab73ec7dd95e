//! Self-checks of the numerics against identities that hold exactly.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dipole_response::{response, DipoleOrientation, RaySettings, ResponseMethod};
use crate::error::Result;
use crate::ray_model::{enhancement_ray, Corrections, RayOrders};
use crate::scenario::{airy_kernels, airy_phases};
use crate::specfun::{bessel_sum_rules, FieldPoint, HarmonicBasis};
use crate::wave_ops::{
    build_operators, closed_cavity_mode_sum, enhancement_full, operator_grid, CavityGeometry,
};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn() -> Result<(bool, String)>;

/// A named invariant with a one-line description.
pub struct Check {
    pub name: &'static str,
    pub description: &'static str,
    run: CheckFn,
}

impl Check {
    pub fn run(&self) -> CheckOutcome {
        match (self.run)() {
            Ok((passed, detail)) => CheckOutcome { name: self.name, passed, detail },
            Err(e) => CheckOutcome { name: self.name, passed: false, detail: format!("error: {e}") },
        }
    }
}

/// Reference cavity used by the checks: `kR = 10⁵`, 30% coverage, `ρ = 0.98`.
pub fn reference_geometry() -> CavityGeometry {
    CavityGeometry::symmetric(1e5, 0.7f64.acos(), 0.98)
}

pub fn all_checks() -> Vec<Check> {
    vec![
        Check {
            name: "bessel-sum-rules",
            description: "completeness and even/odd split of the spherical Bessel series for kr <= 100",
            run: bessel_rules,
        },
        Check {
            name: "pv-oracle",
            description: "closed-form shift kernels against principal-value quadrature",
            run: pv_oracle,
        },
        Check {
            name: "orientation-sum",
            description: "(parallel + 2 perpendicular)/3 equals isotropic for damping and shift",
            run: orientation_sum,
        },
        Check {
            name: "frequency-average-ray",
            description: "ray enhancement averaged over one free spectral range equals 1",
            run: frequency_average_ray,
        },
        Check {
            name: "frequency-average-closed",
            description: "closed-sphere mode sum averaged over one free spectral range equals 1",
            run: frequency_average_closed,
        },
        Check {
            name: "operator-symmetry",
            description: "mirror operator is Hermitian, commutes with parity and is bounded by rho",
            run: operator_symmetry,
        },
        Check {
            name: "free-space",
            description: "without mirrors every method returns Gamma = 1, Delta' = 0",
            run: free_space,
        },
        Check {
            name: "shift-antisymmetry",
            description: "center level shift is odd in the detuning and vanishes on resonance",
            run: shift_antisymmetry,
        },
    ]
}

/// Runs every check whose name contains `filter` (all when `None`).
pub fn run_checks(filter: Option<&str>) -> Vec<CheckOutcome> {
    all_checks().iter().filter(|c| filter.is_none_or(|f| c.name.contains(f))).map(Check::run).collect()
}

fn bessel_rules() -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for &kr in &[0.5, 3.0, 10.0, 37.5, 64.0, 100.0] {
        let l_max = (kr as usize) + 60;
        let (total, even, odd) = bessel_sum_rules(kr, l_max)?;
        let split = (2.0 * kr).sin() / (4.0 * kr);
        worst = worst.max((total - 1.0).abs()).max((even - 0.5 - split).abs()).max((odd - 0.5 + split).abs());
    }
    Ok((worst < 1e-8, format!("max deviation {worst:.2e}")))
}

fn pv_oracle() -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for &rho in &[0.3, 0.9] {
        for phi in airy_phases(8) {
            for (_, closed, oracle) in airy_kernels(rho, phi)? {
                worst = worst.max((closed - oracle.value).abs() / oracle.value.abs().max(1e-12));
            }
        }
    }
    Ok((worst < 1e-5, format!("max relative deviation {worst:.2e}")))
}

fn orientation_sum() -> Result<(bool, String)> {
    let geom = CavityGeometry { rho2: 0.9, theta_m2: 0.6, ..reference_geometry() };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let p = FieldPoint::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-20.0..20.0));
        let phi = rng.gen_range(-0.2..0.2);
        let r = |d| response(p, d, &geom, phi, ResponseMethod::RayAsymmetric, RaySettings::default());
        let (par, perp, iso) =
            (r(DipoleOrientation::Parallel)?, r(DipoleOrientation::Perpendicular)?, r(DipoleOrientation::Isotropic)?);
        let dg = ((par.gamma_ratio + 2.0 * perp.gamma_ratio) / 3.0 - iso.gamma_ratio).abs();
        let ds = ((par.shift_ratio + 2.0 * perp.shift_ratio) / 3.0 - iso.shift_ratio).abs();
        worst = worst.max(dg).max(ds);
    }
    Ok((worst < 1e-8, format!("max deviation {worst:.2e} over 5 random samples")))
}

/// Mean of `f` over `n` equally spaced detunings in `[0, π)`.
pub fn frequency_average(n: usize, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut s = 0.0;
    for i in 0..n {
        s += f(PI * i as f64 / n as f64)?;
    }
    Ok(s / n as f64)
}

fn frequency_average_ray() -> Result<(bool, String)> {
    let geom = reference_geometry();
    let mut worst = 0.0_f64;
    for &kz in &[0.0, 7.0, 25.0, 60.0, 100.0] {
        let avg = frequency_average(1024, |phi| {
            enhancement_ray(&geom, FieldPoint::on_axis(kz), phi, Corrections::ALL, RayOrders::default()).map(|r| r.value)
        })?;
        worst = worst.max((avg - 1.0).abs());
    }
    Ok((worst < 1e-3, format!("max |average - 1| {worst:.2e} at five axial points")))
}

fn frequency_average_closed() -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for &kr in &[0.0, 5.0, 20.0, 50.0, 100.0] {
        let avg = frequency_average(4000, |phi| closed_cavity_mode_sum(0.98, 1e5, phi, kr, 180))?;
        worst = worst.max((avg - 1.0).abs());
    }
    Ok((worst < 1e-3, format!("max |average - 1| {worst:.2e} at five radii")))
}

fn operator_symmetry() -> Result<(bool, String)> {
    let geom = reference_geometry();
    let l_max = 40;
    let grid = operator_grid(&geom, l_max, 16)?;
    let ops = build_operators(&geom, HarmonicBasis::new(l_max), &grid)?;
    let (mut herm, mut comm, mut bound) = (0.0_f64, 0.0_f64, 0.0_f64);
    for m in [0i64, 1, 5, 20] {
        let b = ops.block(m).expect("all blocks built");
        herm = herm.max((&b.rho - b.rho.adjoint()).camax());
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                comm = comm.max(((b.parity[i] - b.parity[j]) * b.rho[(i, j)]).norm());
            }
        }
        bound = bound.max(b.rho.clone().singular_values().max());
    }
    let ok = herm < 1e-12 && comm < 1e-12 && bound <= geom.rho1 + 1e-10;
    Ok((ok, format!("hermiticity {herm:.1e}, parity commutator {comm:.1e}, norm {bound:.6}")))
}

fn free_space() -> Result<(bool, String)> {
    let geom = CavityGeometry { rho1: 0.0, rho2: 0.0, ..reference_geometry() };
    let mut worst = 0.0_f64;
    let p = FieldPoint::new(3.0, -1.0, 12.0);
    for d in [DipoleOrientation::Parallel, DipoleOrientation::Perpendicular, DipoleOrientation::Isotropic] {
        for method in [ResponseMethod::RaySymmetric, ResponseMethod::RayAsymmetric] {
            let r = response(p, d, &geom, 0.2, method, RaySettings::default())?;
            worst = worst.max((r.gamma_ratio - 1.0).abs()).max(r.shift_ratio.abs());
        }
    }
    let basis = HarmonicBasis::new(40);
    let full = enhancement_full(&geom, basis, &operator_grid(&geom, 40, 16)?, FieldPoint::on_axis(5.0), 0.3)?;
    worst = worst.max((full.value - 1.0).abs());
    Ok((worst < 1e-10, format!("max deviation {worst:.2e}")))
}

fn shift_antisymmetry() -> Result<(bool, String)> {
    let geom = reference_geometry();
    let at = |phi| {
        response(FieldPoint::ORIGIN, DipoleOrientation::Parallel, &geom, phi, ResponseMethod::RaySymmetric, RaySettings::default())
            .map(|r| r.shift_ratio)
    };
    let zero = at(0.0)?;
    let mut worst = zero.abs();
    for &phi in &[0.005, 0.02, 0.1] {
        worst = worst.max((at(phi)? + at(-phi)?).abs());
    }
    Ok((worst == 0.0, format!("max |shift(phi) + shift(-phi)| {worst:.1e}, shift on resonance {zero:.1e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for outcome in run_checks(None) {
            assert!(outcome.passed, "{}: {}", outcome.name, outcome.detail);
        }
    }

    #[test]
    fn filter_selects_by_name() {
        let out = run_checks(Some("bessel"));
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].name, "bessel-sum-rules");
        assert!(run_checks(Some("no-such-check")).is_empty());
    }
}
