//! Damping rate `Γ/Γ_vac` and level shift `Δ′/Γ_vac` of a two-level atom.
//!
//! Both are angular averages of a ray resonance factor weighted by the dipole
//! emission pattern `(3/2)(1 − (d̂·Ω̂)²)`. The damping uses the Airy factor of
//! [`crate::ray_model`]; the shift uses its principal-value partner, built from
//! the kernels of [`crate::airy_shift`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::airy_shift::{pv_shift, pv_shift_cos, pv_shift_sin, FinesseParam};
use crate::error::{Error, Result, Warning};
use crate::quadrature::build_grid;
use crate::ray_model::{airy_factor_m, Corrections, RayIntegrator, RayOrders, RayState};
use crate::specfun::FieldPoint;
use crate::wave_ops::CavityGeometry;

/// Dipole orientation. `Perpendicular` is averaged over its azimuth in the transverse plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DipoleOrientation {
    Vector([f64; 3]),
    Parallel,
    Perpendicular,
    Isotropic,
}

impl DipoleOrientation {
    pub fn validate(&self) -> Result<()> {
        if let DipoleOrientation::Vector(d) = self {
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if !((n - 1.0).abs() < 1e-9) {
                return Err(Error::Domain(format!("dipole vector must be a unit vector, |d| = {n}")));
            }
        }
        Ok(())
    }

    /// Emission weight in direction `Ω̂`; averages to 1 over the sphere.
    pub fn weight(&self, omega: [f64; 3]) -> f64 {
        match self {
            DipoleOrientation::Vector(d) => polarization_factor(*d, omega),
            DipoleOrientation::Parallel => 1.5 * (1.0 - omega[2] * omega[2]),
            DipoleOrientation::Perpendicular => 1.5 - 0.75 * (1.0 - omega[2] * omega[2]),
            DipoleOrientation::Isotropic => 1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            DipoleOrientation::Vector(_) => "vector",
            DipoleOrientation::Parallel => "parallel",
            DipoleOrientation::Perpendicular => "perpendicular",
            DipoleOrientation::Isotropic => "isotropic",
        }
    }
}

/// `(3/2)(1 − (d̂·Ω̂)²)`.
pub fn polarization_factor(d: [f64; 3], omega: [f64; 3]) -> f64 {
    let c = d[0] * omega[0] + d[1] * omega[1] + d[2] * omega[2];
    1.5 * (1.0 - c * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseMethod {
    /// Equal mirrors: `cos²/|1−ρe^{2iφ}|²` and `sin²/|1+ρe^{2iφ}|²` resonance factors.
    RaySymmetric,
    /// General mirror pair, with the cross term and the three shift kernels.
    RayAsymmetric,
    ClosedForm,
    OneMirror,
}

impl ResponseMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ResponseMethod::RaySymmetric => "ray-symmetric",
            ResponseMethod::RayAsymmetric => "ray-asymmetric",
            ResponseMethod::ClosedForm => "closed-form",
            ResponseMethod::OneMirror => "one-mirror",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseResult {
    pub gamma_ratio: f64,
    pub shift_ratio: f64,
    pub method: ResponseMethod,
    /// Number of angular nodes used (0 for closed forms).
    pub nodes: usize,
    pub warnings: Vec<Warning>,
}

/// Ray-model settings for the response integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RaySettings {
    pub corrections: Corrections,
    pub orders: RayOrders,
}

impl Default for RaySettings {
    fn default() -> Self {
        Self { corrections: Corrections::ALL, orders: RayOrders::default() }
    }
}

fn symmetric_terms(s: &RayState) -> (f64, f64) {
    let rho = s.rho_near;
    let e = Complex64::from_polar(rho, 2.0 * s.phi);
    let one = Complex64::new(1.0, 0.0);
    let (dm, dp) = ((one - e).norm_sqr(), (one + e).norm_sqr());
    let (c2, s2) = (s.x.cos().powi(2), s.x.sin().powi(2));
    let t = 1.0 - rho * rho;
    let k = rho * (2.0 * s.phi).sin();
    (t * c2 / dm + t * s2 / dp, k * c2 / dm - k * s2 / dp)
}

/// Level-shift integrand of a ray with near mirror `ρ1` and far mirror `ρ2`.
pub fn shift_factor(phi: f64, x: f64, rho1: f64, rho2: f64) -> Result<f64> {
    let p = rho1 * rho2;
    if p >= 1.0 {
        return Err(Error::Singular { gap: 1.0 - p });
    }
    let fp = FinesseParam::from_reflectivity(p);
    let two_phi = 2.0 * phi;
    let base = pv_shift(two_phi, p) / (2.0 * PI);
    let kc = (rho1 + rho2) / (2.0 * PI * (1.0 + p)) * pv_shift_cos(two_phi, fp);
    let kx = -(rho1 - rho2) / (2.0 * PI * (1.0 - p)) * pv_shift_sin(two_phi, fp);
    let (c2, s2) = (x.cos().powi(2), x.sin().powi(2));
    Ok(c2 * (base + kc) + s2 * (base - kc) + (2.0 * x).sin() * kx)
}

/// Γ/Γ_vac and Δ′/Γ_vac at `point` from the ray model.
pub fn response(
    point: FieldPoint,
    orientation: DipoleOrientation,
    geom: &CavityGeometry,
    detuning: f64,
    method: ResponseMethod,
    settings: RaySettings,
) -> Result<ResponseResult> {
    orientation.validate()?;
    match method {
        ResponseMethod::RaySymmetric => {
            if !geom.is_symmetric() {
                return Err(Error::Geometry(
                    "ray-symmetric method needs equal mirrors without defocus; use ray-asymmetric".into(),
                ));
            }
        }
        ResponseMethod::RayAsymmetric => {}
        other => {
            return Err(Error::Domain(format!("{} is not a ray method", other.label())));
        }
    }
    let integrator = RayIntegrator::new(geom, point, detuning, settings.corrections, settings.orders)?;
    let gamma = integrator.integrate(|state, dir| {
        let w = orientation.weight(dir);
        Ok(match state {
            None => w,
            Some(s) => {
                w * match method {
                    ResponseMethod::RaySymmetric => symmetric_terms(&s).0,
                    _ => airy_factor_m(s.phi, s.x, s.rho_near, s.rho_far)?,
                }
            }
        })
    })?;
    let shift = integrator.integrate(|state, dir| {
        Ok(match state {
            None => 0.0,
            Some(s) => {
                orientation.weight(dir)
                    * match method {
                        ResponseMethod::RaySymmetric => symmetric_terms(&s).1,
                        _ => shift_factor(s.phi, s.x, s.rho_near, s.rho_far)?,
                    }
            }
        })
    })?;
    let grid = integrator.grid();
    Ok(ResponseResult {
        gamma_ratio: gamma,
        shift_ratio: shift,
        method,
        nodes: grid.polar_nodes().len() * grid.order_azimuthal(),
        warnings: integrator.validity_warnings(),
    })
}

pub fn gamma_ratio(
    point: FieldPoint,
    orientation: DipoleOrientation,
    geom: &CavityGeometry,
    detuning: f64,
    method: ResponseMethod,
    settings: RaySettings,
) -> Result<f64> {
    response(point, orientation, geom, detuning, method, settings).map(|r| r.gamma_ratio)
}

pub fn shift_ratio(
    point: FieldPoint,
    orientation: DipoleOrientation,
    geom: &CavityGeometry,
    detuning: f64,
    method: ResponseMethod,
    settings: RaySettings,
) -> Result<f64> {
    response(point, orientation, geom, detuning, method, settings).map(|r| r.shift_ratio)
}

/// Exact values at the center of a symmetric cavity with caps of half-aperture `theta_m`.
pub fn center_closed_forms(orientation: DipoleOrientation, theta_m: f64, rho: f64, detuning: f64) -> Result<ResponseResult> {
    if !(0.0..1.0).contains(&rho) || !(0.0..=PI / 2.0).contains(&theta_m) {
        return Err(Error::Domain(format!("closed forms need 0 <= rho < 1 and 0 <= theta_m <= π/2, got {rho}, {theta_m}")));
    }
    let c = theta_m.cos();
    let d = (Complex64::new(1.0, 0.0) - Complex64::from_polar(rho, 2.0 * detuning)).norm_sqr();
    let airy = (1.0 - rho * rho) / d;
    let kernel = rho * (2.0 * detuning).sin() / d;
    let (vac, cav) = match orientation {
        DipoleOrientation::Parallel => (c * (3.0 - c * c) / 2.0, (1.0 - c) * (1.0 - c * (1.0 + c) / 2.0)),
        DipoleOrientation::Perpendicular => (c * (1.0 - (1.0 - c * c) / 4.0), (1.0 - c) * (1.0 + c * (1.0 + c) / 4.0)),
        DipoleOrientation::Isotropic => (c, 1.0 - c),
        DipoleOrientation::Vector(_) => {
            return Err(Error::Domain("closed forms exist for parallel, perpendicular and isotropic dipoles".into()))
        }
    };
    Ok(ResponseResult {
        gamma_ratio: vac + cav * airy,
        shift_ratio: cav * kernel,
        method: ResponseMethod::ClosedForm,
        nodes: 0,
        warnings: Vec::new(),
    })
}

/// Single cap of half-aperture `theta_m` around `+z`, without aberration.
pub fn one_mirror_response(
    point: FieldPoint,
    orientation: DipoleOrientation,
    rho: f64,
    theta_m: f64,
    phase: f64,
    orders: RayOrders,
) -> Result<ResponseResult> {
    orientation.validate()?;
    if !(0.0..=1.0).contains(&rho) || !(theta_m > 0.0 && theta_m < PI) {
        return Err(Error::Domain(format!("one-mirror response needs 0 <= rho <= 1 and 0 < theta_m < π, got {rho}, {theta_m}")));
    }
    if rho == 0.0 {
        return Ok(ResponseResult {
            gamma_ratio: 1.0,
            shift_ratio: 0.0,
            method: ResponseMethod::OneMirror,
            nodes: 0,
            warnings: Vec::new(),
        });
    }
    // only the cap contributes beyond the free-space value 1
    let kr = point.kr();
    let polar = orders.polar.max((2.0 * kr).ceil() as usize + 32);
    let azimuthal = orders.azimuthal.max((4.0 * point.transverse()).ceil() as usize + 16);
    let grid = build_grid(&[theta_m], polar, azimuthal)?;
    let (mut gamma, mut shift) = (1.0, 0.0);
    for (theta, az, w) in grid.nodes() {
        if theta >= theta_m {
            continue;
        }
        let dir = [theta.sin() * az.cos(), theta.sin() * az.sin(), theta.cos()];
        let arg = 2.0 * (point.dot(dir) + phase);
        let weight = w * orientation.weight(dir);
        gamma += weight * rho * arg.cos();
        shift += weight * 0.5 * rho * arg.sin();
    }
    Ok(ResponseResult {
        gamma_ratio: gamma,
        shift_ratio: shift,
        method: ResponseMethod::OneMirror,
        nodes: grid.polar_nodes().len() * azimuthal,
        warnings: Vec::new(),
    })
}

/// Small-cap limit for a dipole orthogonal to the axis, `ε = Ω/4π`.
pub fn one_mirror_small_angle(kz: f64, rho: f64, epsilon: f64, phase: f64) -> (f64, f64) {
    let arg = 2.0 * (kz + phase);
    (1.0 + 1.5 * epsilon * rho * arg.cos(), 0.75 * epsilon * rho * arg.sin())
}

/// Half-aperture of a single cap covering the fraction `epsilon` of the sphere.
pub fn cap_for_fraction(epsilon: f64) -> f64 {
    (1.0 - 2.0 * epsilon).clamp(-1.0, 1.0).acos()
}

/// Atom–mirror distance phase `kl = kz + φ + π/2`; antinodes sit at `kl ≡ π/2 (mod π)`.
pub fn mirror_distance_phase(kz: f64, phase: f64) -> f64 {
    kz + phase + PI / 2.0
}
