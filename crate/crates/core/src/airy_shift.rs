//! Airy resonance factor and its principal-value (dispersive) partners.
//!
//! With `ℒ(φ) = √(1+F)/(1 + F sin²φ)` the normalized Airy function, the level
//! shift kernels are the principal-value transforms `P∫ dδ/δ · g(φ − δ)` of
//! `ℒ`, `ℒ·cos` and `ℒ·sin`. All three have closed forms, evaluated here.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Coefficient of finesse and the auxiliary `β` with `sinh²β = 1/F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinesseParam {
    pub f: f64,
    pub beta: f64,
}

impl FinesseParam {
    /// `F = 4ρ/(1−ρ)²` for a symmetric pair of mirrors of reflectivity `ρ`
    /// (or for the product `ρ1ρ2`, which gives `F′`).
    pub fn from_reflectivity(rho: f64) -> Self {
        let f = 4.0 * rho / ((1.0 - rho) * (1.0 - rho));
        let beta = if f > 0.0 { (1.0 / f.sqrt()).asinh() } else { f64::INFINITY };
        Self { f, beta }
    }

    /// `F′ = 4ρ1ρ2/(1 − ρ1ρ2)²`.
    pub fn asymmetric(rho1: f64, rho2: f64) -> Self {
        Self::from_reflectivity(rho1 * rho2)
    }
}

fn resonance_denominator(phi: f64, rho: f64) -> f64 {
    (Complex64::new(1.0, 0.0) - rho * Complex64::from_polar(1.0, 2.0 * phi)).norm_sqr()
}

/// `ℒ(φ) = (1−ρ²)/|1 − ρe^{2iφ}|²`.
pub fn airy_lorentzian(phi: f64, rho: f64) -> f64 {
    (1.0 - rho * rho) / resonance_denominator(phi, rho)
}

/// The same function written through the finesse coefficient.
pub fn airy_lorentzian_finesse(phi: f64, finesse: FinesseParam) -> f64 {
    let s = phi.sin();
    (1.0 + finesse.f).sqrt() / (1.0 + finesse.f * s * s)
}

/// `Δ(φ) = 2πρ sin2φ / |1 − ρe^{2iφ}|²`.
pub fn pv_shift(phi: f64, rho: f64) -> f64 {
    2.0 * PI * rho * (2.0 * phi).sin() / resonance_denominator(phi, rho)
}

/// `Δ_c(φ′) = π(1+F′) sinφ′ / (1 + F′ sin²φ′)`.
pub fn pv_shift_cos(phi_prime: f64, finesse: FinesseParam) -> f64 {
    let s = phi_prime.sin();
    PI * (1.0 + finesse.f) * s / (1.0 + finesse.f * s * s)
}

/// `Δ_s(φ′) = −π cosφ′ / (1 + F′ sin²φ′)`.
pub fn pv_shift_sin(phi_prime: f64, finesse: FinesseParam) -> f64 {
    let s = phi_prime.sin();
    -PI * phi_prime.cos() / (1.0 + finesse.f * s * s)
}

/// Phase of the extremum of `Δ(φ)` in `(0, π/2)`, located by golden-section search.
pub fn pv_shift_extremum(rho: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (1e-9, PI / 2.0 - 1e-9);
    // Δ is unimodal on (0, π/2): single positive lobe
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if pv_shift(c, rho) > pv_shift(d, rho) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{pv_integrate, PvOptions};
    use approx::assert_relative_eq;

    #[test]
    fn lorentzian_forms_agree() {
        for &rho in &[0.0, 0.1, 0.5, 0.9, 0.98] {
            let fp = FinesseParam::from_reflectivity(rho);
            for i in 0..50 {
                let phi = -1.5 + 0.06 * i as f64;
                let a = airy_lorentzian(phi, rho);
                let b = airy_lorentzian_finesse(phi, fp);
                assert!((a - b).abs() <= 1e-14 * a.max(1.0) * 10.0, "{rho} {phi}");
            }
        }
    }

    #[test]
    fn lorentzian_anchor_values() {
        assert_eq!(airy_lorentzian(0.3, 0.0), 1.0);
        assert_relative_eq!(airy_lorentzian(0.0, 0.98), 99.0, max_relative = 1e-12);
        assert_relative_eq!(airy_lorentzian(PI / 2.0, 0.98), 0.02 / 1.98, max_relative = 1e-12);
        let fp = FinesseParam::from_reflectivity(0.98);
        assert_relative_eq!((1.0 + fp.f).sqrt(), 99.0, max_relative = 1e-12);
        assert_relative_eq!(fp.beta.sinh().powi(2), 1.0 / fp.f, max_relative = 1e-12);
    }

    #[test]
    fn shift_kernels_trivial_values() {
        assert_eq!(pv_shift(0.0, 0.9), 0.0);
        assert!(pv_shift(PI / 2.0, 0.9).abs() < 1e-12);
        let fp = FinesseParam::asymmetric(0.5, 0.5);
        assert_eq!(pv_shift_cos(0.0, fp), 0.0);
        assert_relative_eq!(pv_shift_sin(0.0, fp), -PI);
        let free = FinesseParam::from_reflectivity(0.0);
        assert_relative_eq!(pv_shift_cos(0.7, free), PI * 0.7f64.sin());
        assert_relative_eq!(pv_shift_sin(0.7, free), -PI * 0.7f64.cos());
        for i in 0..20 {
            assert_eq!(pv_shift(0.1 * i as f64, 0.0), 0.0);
        }
    }

    #[test]
    fn kernels_match_oracle() {
        let (rho, phi) = (0.9, 0.1);
        let oracle = pv_integrate(|d| airy_lorentzian(phi - d, rho), PvOptions::default()).unwrap();
        assert_relative_eq!(pv_shift(phi, rho), oracle.value, max_relative = 1e-6);

        let fp = FinesseParam::asymmetric(0.5, 0.5);
        let opts = PvOptions { period: 2.0 * PI, ..Default::default() };
        let pp = 0.2;
        let lor = |x: f64| airy_lorentzian_finesse(x, fp);
        let c = pv_integrate(|d| lor(pp - d) * (pp - d).cos(), opts).unwrap();
        let s = pv_integrate(|d| lor(pp - d) * (pp - d).sin(), opts).unwrap();
        assert_relative_eq!(pv_shift_cos(pp, fp), c.value, max_relative = 1e-6);
        assert_relative_eq!(pv_shift_sin(pp, fp), s.value, max_relative = 1e-6);
    }

    #[test]
    fn extremum_near_half_linewidth() {
        for &rho in &[0.9, 0.98] {
            let phi = pv_shift_extremum(rho);
            let ratio = airy_lorentzian(phi, rho) / airy_lorentzian(0.0, rho);
            assert!((ratio - 0.5).abs() < 0.05, "{rho}: {ratio}");
        }
    }

    #[test]
    fn kernels_periodic_and_odd() {
        let fp = FinesseParam::from_reflectivity(0.7);
        for i in 0..30 {
            let phi = -1.4 + 0.1 * i as f64;
            assert!((pv_shift(phi + PI, 0.7) - pv_shift(phi, 0.7)).abs() < 1e-9);
            assert!((pv_shift(-phi, 0.7) + pv_shift(phi, 0.7)).abs() < 1e-12);
            assert!((pv_shift_cos(-phi, fp) + pv_shift_cos(phi, fp)).abs() < 1e-12);
            assert!((pv_shift_sin(-phi, fp) - pv_shift_sin(phi, fp)).abs() < 1e-12);
        }
    }
}
