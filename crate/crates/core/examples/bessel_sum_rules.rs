//! Completeness of the spherical Bessel expansion of a plane wave, and its
//! split between even and odd orders.

use cavityqed::specfun::bessel_sum_rules;

fn main() -> cavityqed::Result<()> {
    println!("{:>7} {:>12} {:>12} {:>12}", "kr", "total - 1", "even", "½ + sin2kr/4kr");
    for kr in [0.1, 1.0, 5.0, 12.5, 40.0, 100.0] {
        let (total, even, _) = bessel_sum_rules(kr, kr as usize + 60)?;
        println!("{kr:>7.1} {:>12.2e} {even:>12.9} {:>12.9}", total - 1.0, 0.5 + (2.0 * kr).sin() / (4.0 * kr));
    }
    Ok(())
}
