//! Displacing one mirror along the axis moves and lowers the center resonance.

use cavityqed::io_formats::{Numerics, ScanMethod};
use cavityqed::scenario::{center_curve, linspace, refine_peak};
use cavityqed::CavityGeometry;

fn main() -> cavityqed::Result<()> {
    let base = CavityGeometry::symmetric(1e5, 0.7f64.acos(), 0.98);
    let phis = linspace(-0.3, 0.1, 81);
    let numerics = Numerics::default();
    for method in [ScanMethod::Full, ScanMethod::RayAsymmetric] {
        let (focused, _) = center_curve(&base, &numerics, method, &phis)?;
        let reference = refine_peak(&phis, &focused).1;
        for k_delta in [0.1, 0.2, 0.3] {
            let (values, _) = center_curve(&base.with_defocus(k_delta), &numerics, method, &phis)?;
            let (phi, peak) = refine_peak(&phis, &values);
            println!(
                "{:<15} kδ = {k_delta}: peak {peak:7.3} at φ0 = {phi:+.4} rad ({:.3} of focused)",
                method.label(),
                peak / reference
            );
        }
    }
    Ok(())
}
