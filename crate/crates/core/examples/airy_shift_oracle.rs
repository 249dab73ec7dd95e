//! Closed-form level-shift kernels checked against direct principal-value quadrature.

use cavityqed::scenario::{airy_kernels, airy_phases};

fn main() -> cavityqed::Result<()> {
    for rho in [0.5, 0.9, 0.98] {
        let mut worst = 0.0_f64;
        for phi in airy_phases(16) {
            for (name, closed, oracle) in airy_kernels(rho, phi)? {
                let rel = (closed - oracle.value).abs() / oracle.value.abs();
                worst = worst.max(rel);
                if phi > 0.0 && phi < 0.1 {
                    println!("ρ = {rho}, φ = {phi:.4}, {name:<8} closed {closed:+.10e}  quadrature {:+.10e}", oracle.value);
                }
            }
        }
        println!("ρ = {rho}: worst relative deviation {worst:.2e}\n");
    }
    Ok(())
}
