//! A single small mirror: damping and shift against the atom-mirror distance,
//! and the 3/2 enhancement of the vectorial coupling over the scalar one.

use cavityqed::dipole_response::{cap_for_fraction, mirror_distance_phase, one_mirror_response, one_mirror_small_angle};
use cavityqed::{DipoleOrientation, FieldPoint, RayOrders};

fn main() -> cavityqed::Result<()> {
    let (rho, eps) = (0.98, 0.01);
    let theta = cap_for_fraction(eps);
    let dipole = DipoleOrientation::Vector([1.0, 0.0, 0.0]);
    println!("{:>5} {:>8} {:>10} {:>10} {:>10} {:>10}", "kz", "kl", "Γ", "Γ small", "Δ'", "Δ' small");
    for i in 0..=12 {
        let kz = 0.25 * i as f64;
        let r = one_mirror_response(FieldPoint::on_axis(kz), dipole, rho, theta, 0.0, RayOrders::default())?;
        let (g, d) = one_mirror_small_angle(kz, rho, eps, 0.0);
        let kl = mirror_distance_phase(kz, 0.0);
        println!("{kz:>5.2} {kl:>8.4} {:>10.6} {g:>10.6} {:>10.6} {d:>10.6}", r.gamma_ratio, r.shift_ratio);
    }

    let slope = |d: DipoleOrientation, e: f64| -> cavityqed::Result<f64> {
        let r = one_mirror_response(FieldPoint::ORIGIN, d, rho, cap_for_fraction(e), 0.0, RayOrders::default())?;
        Ok((r.gamma_ratio - 1.0) / e)
    };
    let linear = |d| -> cavityqed::Result<f64> { Ok(2.0 * slope(d, 0.005)? - slope(d, 0.01)?) };
    println!("vector / scalar linear coefficient: {:.5}", linear(dipole)? / linear(DipoleOrientation::Isotropic)?);
    Ok(())
}
