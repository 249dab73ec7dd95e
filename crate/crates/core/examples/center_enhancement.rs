//! Resonant vacuum-fluctuation enhancement at the cavity center, three ways.

use cavityqed::ray_model::{center_enhancement_naive, diffraction_correction};
use cavityqed::wave_ops::operator_grid;
use cavityqed::{enhancement_full, enhancement_ray, CavityGeometry, Corrections, FieldPoint, HarmonicBasis, RayOrders};

fn main() -> cavityqed::Result<()> {
    let geom = CavityGeometry::symmetric(1e5, 0.7f64.acos(), 0.98);
    println!("mirror coverage {:.3} of 4π, reflectivity {}", geom.coverage(), geom.rho1);

    for l_max in [100, 150, 300] {
        let grid = operator_grid(&geom, l_max, 64)?;
        let full = enhancement_full(&geom, HarmonicBasis::new(l_max), &grid, FieldPoint::ORIGIN, 0.0)?;
        println!("full calculation, l_max = {l_max:>3}: {:.4} (condition {:.1e})", full.value, full.condition);
    }

    let corrected = enhancement_ray(&geom, FieldPoint::ORIGIN, 0.0, Corrections::ALL, RayOrders::default())?;
    println!("ray model with corrections:     {:.4}", corrected.value);
    println!("ray model, naive closed form:   {:.4}", center_enhancement_naive(geom.theta_m1, geom.rho1, 0.0));
    println!("first-order diffraction change: {:.4}", diffraction_correction(geom.theta_m1, geom.k_radius, geom.rho1));
    Ok(())
}
