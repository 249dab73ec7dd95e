//! Damping rate and level shift at the center against the detuning, for the
//! two principal dipole orientations, with the exact center formulas alongside.

use cavityqed::dipole_response::center_closed_forms;
use cavityqed::ray_model::{linewidth, Corrections};
use cavityqed::scenario::linspace;
use cavityqed::{response, CavityGeometry, DipoleOrientation, FieldPoint, RaySettings, ResponseMethod};

fn main() -> cavityqed::Result<()> {
    let geom = CavityGeometry::symmetric(1e5, 0.7f64.acos(), 0.98);
    let width = linewidth(geom.rho1, geom.rho2);
    let settings = RaySettings { corrections: Corrections::NONE, ..RaySettings::default() };

    for dipole in [DipoleOrientation::Parallel, DipoleOrientation::Perpendicular] {
        println!("{} dipole", dipole.label());
        println!("{:>10} {:>10} {:>10} {:>10}", "detuning", "Γ/Γvac", "Δ'/Γvac", "exact Γ");
        for phi in linspace(-3.0 * width, 3.0 * width, 13) {
            let r = response(FieldPoint::ORIGIN, dipole, &geom, phi, ResponseMethod::RaySymmetric, settings)?;
            let exact = center_closed_forms(dipole, geom.theta_m1, geom.rho1, phi)?;
            println!("{:>10.2} {:>10.4} {:>10.4} {:>10.4}", phi / width, r.gamma_ratio, r.shift_ratio, exact.gamma_ratio);
        }
    }
    Ok(())
}
