//! Ray-optics model of the vacuum fluctuations near the cavity center.
//!
//! Each direction `Ω̂` is treated as the axis of a plane Fabry–Perot resonator
//! formed by the mirror it points into ("near") and the mirror behind it
//! ("far"). The resonance factor along that direction is [`airy_factor_m`],
//! evaluated at the one-way phase `φ₀ + (k²r² − (kΩ̂·r)²)/2kR` when the
//! aberration correction is on. Diffraction losses at the mirror rims are
//! modelled by shrinking each reflecting cap to `θ_eff = θ_m − δθ`; the exposed
//! annulus then behaves as free space.
//!
//! Axial displacement `δ` of the first mirror multiplies its reflectivity by
//! `e^{iα}`, `α = 2kδ|cosθ|`, which is the same as advancing `φ` by `α/4`
//! and shifting `kΩ̂·r` by `±α/4` (sign according to whether the first mirror
//! is near or far).

use std::f64::consts::PI;

use crate::error::{Error, Result, Warning};
use crate::quadrature::{build_grid, AngularGrid};
use crate::specfun::FieldPoint;
use crate::wave_ops::{cap_at, cap_edges, CavityGeometry, EnhancementResult, Mirror};

pub use crate::wave_ops::defocus_profile;

/// Resonance denominators below this are treated as singular.
pub const SINGULARITY_FLOOR: f64 = 1e-24;
/// Largest `kr` for which the ray model is considered reliable.
pub const RAY_VALIDITY_KR: f64 = 100.0;

/// One-way cavity phase along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPhase {
    pub detuning: f64,
    pub aberration: f64,
}

impl RayPhase {
    /// `φ₀ + (k²r² − (kΩ̂·r)²)/2kR`.
    pub fn new(detuning: f64, k_radius: f64, point: FieldPoint, direction: [f64; 3]) -> Self {
        let kr2 = point.kr().powi(2);
        let along = point.dot(direction);
        Self { detuning, aberration: ((kr2 - along * along) / (2.0 * k_radius)).max(0.0) }
    }

    pub fn total(&self) -> f64 {
        self.detuning + self.aberration
    }
}

/// Standing-wave weights along a ray through the point, `x = kΩ̂·r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandingWaveWeights {
    pub w_cos: f64,
    pub w_sin: f64,
    pub w_cross: f64,
}

impl StandingWaveWeights {
    pub fn new(x: f64) -> Self {
        let c = x.cos();
        let s = x.sin();
        Self { w_cos: c * c, w_sin: s * s, w_cross: 2.0 * s * c }
    }
}

/// `|1 − ρ1ρ2 e^{4iφ}|²`.
fn round_trip_denominator(phi: f64, p: f64) -> f64 {
    1.0 + p * p - 2.0 * p * (4.0 * phi).cos()
}

/// Resonance factor of a ray with near mirror `ρ1` and far mirror `ρ2`.
///
/// ```
/// use cavityqed::ray_model::airy_factor_m;
/// let center = airy_factor_m(0.0, 0.0, 0.98, 0.98).unwrap();
/// assert!((center - 99.0).abs() < 1e-9);
/// ```
pub fn airy_factor_m(phi: f64, x: f64, rho1: f64, rho2: f64) -> Result<f64> {
    let p = rho1 * rho2;
    let d = round_trip_denominator(phi, p);
    if d < SINGULARITY_FLOOR {
        return Err(Error::Singular { gap: 1.0 - p });
    }
    let t1 = 1.0 - rho1 * rho1;
    let t2 = 1.0 - rho2 * rho2;
    let a = t1 * (1.0 + rho2 * rho2 + 2.0 * rho2 * (2.0 * (phi - x)).cos());
    let b = t2 * (1.0 + rho1 * rho1 + 2.0 * rho1 * (2.0 * (phi + x)).cos());
    Ok((a + b) / (2.0 * d))
}

/// The same factor in the `cos²`, `sin²`, `sin 2x` decomposition.
pub fn airy_factor_m_weights(phi: f64, weights: StandingWaveWeights, rho1: f64, rho2: f64) -> Result<f64> {
    let p = rho1 * rho2;
    let d = round_trip_denominator(phi, p);
    if d < SINGULARITY_FLOOR {
        return Err(Error::Singular { gap: 1.0 - p });
    }
    let c2 = (2.0 * phi).cos();
    let s2 = (2.0 * phi).sin();
    let even = (1.0 - p) * (1.0 + p + (rho1 + rho2) * c2) * weights.w_cos
        + (1.0 - p) * (1.0 + p - (rho1 + rho2) * c2) * weights.w_sin;
    let cross = (1.0 + p) * (rho2 - rho1) * s2 * weights.w_cross;
    Ok((even + cross) / d)
}

/// High-finesse approximation of [`airy_factor_m`] in terms of the transmissions.
pub fn airy_factor_m_high_finesse(phi: f64, x: f64, tau1: f64, tau2: f64) -> f64 {
    let (t1, t2) = (tau1 * tau1, tau2 * tau2);
    let num = 2.0 * (t1 * (phi - x).cos().powi(2) + t2 * (phi + x).cos().powi(2));
    let h = 0.5 * (t1 + t2);
    let re = (4.0 * phi).cos() - 1.0 + h;
    let im = (4.0 * phi).sin();
    num / (re * re + im * im)
}

/// Shrunk half-aperture `θ_m − 1/√(kR(1 − ρ_av²))`, `ρ_av = (ρ1+ρ2)/2`.
pub fn effective_aperture(theta_m: f64, k_radius: f64, rho1: f64, rho2: f64) -> Result<f64> {
    let rho_av = 0.5 * (rho1 + rho2);
    let loss = k_radius * (1.0 - rho_av * rho_av);
    let delta_theta = if loss > 0.0 { 1.0 / loss.sqrt() } else { f64::INFINITY };
    if delta_theta >= theta_m {
        return Err(Error::ApertureCollapse { theta_m, delta_theta });
    }
    Ok(theta_m - delta_theta)
}

/// Which corrections to the naive ray picture are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Corrections {
    pub aberration: bool,
    pub diffraction: bool,
}

impl Corrections {
    pub const NONE: Corrections = Corrections { aberration: false, diffraction: false };
    pub const ALL: Corrections = Corrections { aberration: true, diffraction: true };
}

/// Minimum angular quadrature orders; raised automatically for large `kr`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RayOrders {
    pub polar: usize,
    pub azimuthal: usize,
}

impl Default for RayOrders {
    fn default() -> Self {
        Self { polar: 64, azimuthal: 32 }
    }
}

/// The state of one ray direction passed to integrands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayState {
    /// Total one-way phase including aberration and defocus.
    pub phi: f64,
    /// `kΩ̂·r`, including the defocus offset.
    pub x: f64,
    pub rho_near: f64,
    pub rho_far: f64,
}

/// Prepared angular integration of a ray-model integrand at one point.
#[derive(Debug, Clone)]
pub struct RayIntegrator {
    geometry: CavityGeometry,
    point: FieldPoint,
    detuning: f64,
    corrections: Corrections,
    apertures: (f64, f64),
    grid: AngularGrid,
}

impl RayIntegrator {
    pub fn new(
        geom: &CavityGeometry,
        point: FieldPoint,
        detuning: f64,
        corrections: Corrections,
        orders: RayOrders,
    ) -> Result<Self> {
        geom.validate()?;
        if !point.is_finite() {
            return Err(Error::Domain("field point must be finite".into()));
        }
        let mut apertures = (geom.theta_m1, geom.theta_m2);
        if corrections.diffraction {
            if geom.rho1 > 0.0 {
                apertures.0 = effective_aperture(geom.theta_m1, geom.k_radius, geom.rho1, geom.rho2)?;
            }
            if geom.rho2 > 0.0 {
                apertures.1 = effective_aperture(geom.theta_m2, geom.k_radius, geom.rho1, geom.rho2)?;
            }
        }
        let mut edges = cap_edges(apertures.0, apertures.1);
        edges.extend(geom.mirror_edges());
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

        let kr = point.kr();
        let polar = orders.polar.max((2.0 * kr).ceil() as usize + 32);
        let azimuthal = if point.is_on_axis() {
            orders.azimuthal.max(4)
        } else {
            orders.azimuthal.max((4.0 * point.transverse()).ceil() as usize + 16)
        };
        let grid = build_grid(&edges, polar, azimuthal)?;
        Ok(Self { geometry: *geom, point, detuning, corrections, apertures, grid })
    }

    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn effective_apertures(&self) -> (f64, f64) {
        self.apertures
    }

    fn rho_of(&self, mirror: Option<Mirror>) -> f64 {
        match mirror {
            Some(Mirror::First) => self.geometry.rho1,
            Some(Mirror::Second) => self.geometry.rho2,
            None => 0.0,
        }
    }

    /// Ray state for direction `(θ, ϕ)`; `None` when the ray points at no reflecting mirror.
    pub fn state(&self, theta: f64, azimuth: f64) -> (Option<RayState>, [f64; 3]) {
        let dir = [theta.sin() * azimuth.cos(), theta.sin() * azimuth.sin(), theta.cos()];
        let (t1, t2) = self.apertures;
        let near = cap_at(theta, t1, t2);
        let far = cap_at(PI - theta, t1, t2);
        let rho_near = self.rho_of(near);
        if rho_near == 0.0 {
            return (None, dir);
        }
        let rho_far = self.rho_of(far);
        let phase = if self.corrections.aberration {
            RayPhase::new(self.detuning, self.geometry.k_radius, self.point, dir)
        } else {
            RayPhase { detuning: self.detuning, aberration: 0.0 }
        };
        let mut phi = phase.total();
        let mut x = self.point.dot(dir);
        if self.geometry.k_delta != 0.0 && self.geometry.rho1 > 0.0 {
            let quarter = 0.5 * self.geometry.k_delta * theta.cos().abs();
            match (near, far) {
                (Some(Mirror::First), _) => {
                    phi += quarter;
                    x += quarter;
                }
                (_, Some(Mirror::First)) => {
                    phi += quarter;
                    x -= quarter;
                }
                _ => {}
            }
        }
        (Some(RayState { phi, x, rho_near, rho_far }), dir)
    }

    /// `∫ dΩ/4π f(state, Ω̂)`. Integrand errors abort the integration.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(Option<RayState>, [f64; 3]) -> Result<f64>,
    {
        let mut total = 0.0;
        let na = self.grid.order_azimuthal() as f64;
        for node in self.grid.polar_nodes() {
            let mut ring = 0.0;
            for &a in self.grid.azimuths() {
                let (state, dir) = self.state(node.theta, a);
                ring += f(state, dir)?;
            }
            total += node.weight * ring / na;
        }
        Ok(total)
    }

    pub fn validity_warnings(&self) -> Vec<Warning> {
        let kr = self.point.kr();
        if kr > RAY_VALIDITY_KR {
            vec![Warning::RayValidity { kr }]
        } else {
            Vec::new()
        }
    }
}

/// Scalar vacuum-fluctuation ratio from the ray model.
pub fn enhancement_ray(
    geom: &CavityGeometry,
    point: FieldPoint,
    detuning: f64,
    corrections: Corrections,
    orders: RayOrders,
) -> Result<EnhancementResult> {
    let integrator = RayIntegrator::new(geom, point, detuning, corrections, orders)?;
    let value = integrator.integrate(|state, _| match state {
        Some(s) => airy_factor_m(s.phi, s.x, s.rho_near, s.rho_far),
        None => Ok(1.0),
    })?;
    Ok(EnhancementResult { value, l_max: 0, tail: 0.0, condition: 1.0, warnings: integrator.validity_warnings() })
}

/// `Ω_vac/4π + (T/|1 − ρe^{2iφ₀}|²)·Ω_m/4π` at the center of a symmetric cavity.
pub fn center_enhancement_naive(theta_m: f64, rho: f64, detuning: f64) -> f64 {
    let coverage = 1.0 - theta_m.cos();
    let airy = (1.0 - rho * rho) / (1.0 + rho * rho - 2.0 * rho * (2.0 * detuning).cos());
    (1.0 - coverage) + coverage * airy
}

/// First-order change of the center value caused by the aperture shrink.
pub fn diffraction_correction(theta_m: f64, k_radius: f64, rho: f64) -> f64 {
    let t = 1.0 - rho * rho;
    let delta_theta = 1.0 / (k_radius * t).sqrt();
    delta_theta * theta_m.sin() * (t / (1.0 - rho).powi(2) - 1.0)
}

/// Full width at half maximum, in `φ`, of the round-trip resonance `1/|1 − ρ1ρ2 e^{4iφ}|²`.
pub fn linewidth(rho1: f64, rho2: f64) -> f64 {
    let p = rho1 * rho2;
    ((1.0 - p) / (2.0 * p.sqrt())).min(1.0).asin()
}
