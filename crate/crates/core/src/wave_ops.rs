//! Full wave calculation on the spherical-harmonic basis.
//!
//! The cavity is described by three operators acting on angular functions:
//! the orthoradial propagator `U_R = e^{iΔs/2kR}` (diagonal, phase
//! `−l(l+1)/2kR`), the parity `P` (diagonal, `(−1)^l`) and multiplication by
//! the mirror reflectivity `ρ(θ)`. All three commute with rotations about the
//! axis, so every `m` block is solved independently and blocks `±m` share
//! their matrices.
//!
//! The vacuum-fluctuation ratio at `r` is `‖τ·y‖²` with
//! `y = (U_R² − e^{2iφ₀} P ρ̂)⁻¹ U_R c` and `c` the coefficients of
//! `e^{−ikΩ̂·r}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigViolation, Error, Result, Warning};
use crate::quadrature::{build_grid, AngularGrid};
use crate::specfun::{
    normalized_legendre, plane_wave_coeffs, radial_bessel_table, AngularFunction, FieldPoint, HarmonicBasis,
    PlaneWaveExpansion, DEFAULT_TAIL_TOLERANCE,
};

/// Largest tolerated deviation of the quadrature Gram matrix from the identity.
pub const IDENTITY_DEFECT_LIMIT: f64 = 1e-10;
/// Condition estimate above which a block solve is reported as failed.
pub const CONDITION_LIMIT: f64 = 1e13;
/// Plane-wave block energy below which an `m` block is left out of the solve.
pub const BLOCK_ENERGY_FLOOR: f64 = 1e-18;

/// One of the two mirror caps. The first sits around `θ = 0` (`+z`), the second around `θ = π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mirror {
    First,
    Second,
}

/// Two coaxial spherical caps sharing their center of curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityGeometry {
    #[serde(rename = "kR")]
    pub k_radius: f64,
    pub theta_m1: f64,
    pub theta_m2: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// Axial displacement of the first mirror, times `k`.
    #[serde(default)]
    pub k_delta: f64,
}

impl CavityGeometry {
    pub fn symmetric(k_radius: f64, theta_m: f64, rho: f64) -> Self {
        Self { k_radius, theta_m1: theta_m, theta_m2: theta_m, rho1: rho, rho2: rho, k_delta: 0.0 }
    }

    pub fn with_defocus(mut self, k_delta: f64) -> Self {
        self.k_delta = k_delta;
        self
    }

    /// Every violated constraint, keyed by config field name.
    pub fn violations(&self) -> Vec<ConfigViolation> {
        let mut out = Vec::new();
        let mut push = |field: &str, constraint: &str| {
            out.push(ConfigViolation { field: field.to_string(), constraint: constraint.to_string() })
        };
        if !(self.k_radius > 0.0 && self.k_radius.is_finite()) {
            push("geometry.kR", "must be finite and > 0");
        }
        for (name, t) in [("geometry.theta_m1", self.theta_m1), ("geometry.theta_m2", self.theta_m2)] {
            if !(0.0..=PI / 2.0).contains(&t) {
                push(name, "half-aperture out of [0, π/2]");
            }
        }
        for (name, r) in [("geometry.rho1", self.rho1), ("geometry.rho2", self.rho2)] {
            if !(0.0..=1.0).contains(&r) {
                push(name, "reflectivity out of [0,1]");
            }
        }
        if !self.k_delta.is_finite() {
            push("geometry.k_delta", "must be finite");
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            let text: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            Err(Error::Geometry(text.join("; ")))
        }
    }

    pub fn tau1(&self) -> f64 {
        (1.0 - self.rho1 * self.rho1).max(0.0).sqrt()
    }

    pub fn tau2(&self) -> f64 {
        (1.0 - self.rho2 * self.rho2).max(0.0).sqrt()
    }

    pub fn is_symmetric(&self) -> bool {
        self.theta_m1 == self.theta_m2 && self.rho1 == self.rho2 && self.k_delta == 0.0
    }

    /// Mean fractional solid angle of the caps: `Ω_cav/4π`.
    pub fn coverage(&self) -> f64 {
        0.5 * ((1.0 - self.theta_m1.cos()) + (1.0 - self.theta_m2.cos()))
    }

    /// Polar angles where the reflectivity profile is discontinuous.
    pub fn mirror_edges(&self) -> Vec<f64> {
        cap_edges(self.theta_m1, self.theta_m2)
    }

    /// Which cap (if any) lies in direction `θ`.
    pub fn cap(&self, theta: f64) -> Option<Mirror> {
        cap_at(theta, self.theta_m1, self.theta_m2)
    }

    /// `ρ(θ)`: `ρ1·e^{2ikδ cosθ}` on the first cap, `ρ2` on the second, 0 elsewhere.
    pub fn reflectivity(&self, theta: f64) -> Complex64 {
        match self.cap(theta) {
            Some(Mirror::First) => defocus_profile(self.rho1, self.k_delta, theta),
            Some(Mirror::Second) => Complex64::new(self.rho2, 0.0),
            None => Complex64::new(0.0, 0.0),
        }
    }
}

/// `ρ0·e^{2ikδ cosθ}`.
pub fn defocus_profile(rho0: f64, k_delta: f64, theta: f64) -> Complex64 {
    if k_delta == 0.0 {
        return Complex64::new(rho0, 0.0);
    }
    Complex64::from_polar(rho0, 2.0 * k_delta * theta.cos())
}

pub(crate) fn cap_at(theta: f64, t1: f64, t2: f64) -> Option<Mirror> {
    if theta < t1 {
        Some(Mirror::First)
    } else if theta > PI - t2 {
        Some(Mirror::Second)
    } else {
        None
    }
}

pub(crate) fn cap_edges(t1: f64, t2: f64) -> Vec<f64> {
    let mut edges: Vec<f64> = [t1, PI - t2].into_iter().filter(|&t| t > 0.0 && t < PI).collect();
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    edges
}

/// Polar grid for operator construction. The requested order is raised to
/// `l_max + 16` per segment so that products of two harmonics are integrated exactly.
pub fn operator_grid(geom: &CavityGeometry, l_max: usize, requested_order: usize) -> Result<AngularGrid> {
    build_grid(&geom.mirror_edges(), requested_order.max(l_max + 16), 1)
}

/// Matrices of one `|m|` block, indexed by `l = |m|..=l_max`.
#[derive(Debug, Clone)]
pub struct OperatorBlock {
    pub m: usize,
    /// Diagonal of `U_R`.
    pub propagator: Vec<Complex64>,
    /// Diagonal of `P`.
    pub parity: Vec<f64>,
    pub rho: DMatrix<Complex64>,
    pub tau: DMatrix<f64>,
    /// Multiplication by `|τ(θ)|²`.
    pub transmission: DMatrix<f64>,
    /// `max |G − 1|` of the quadrature Gram matrix.
    pub identity_defect: f64,
}

impl OperatorBlock {
    pub fn dim(&self) -> usize {
        self.parity.len()
    }
}

/// Truncated cavity operators for a set of `|m|` blocks. Immutable once built.
#[derive(Debug, Clone)]
pub struct CavityOperatorSet {
    geometry: CavityGeometry,
    basis: HarmonicBasis,
    blocks: Vec<Option<OperatorBlock>>,
}

impl CavityOperatorSet {
    pub fn geometry(&self) -> &CavityGeometry {
        &self.geometry
    }

    pub fn basis(&self) -> HarmonicBasis {
        self.basis
    }

    /// Block for `m` (shared by `±m`), if it was built.
    pub fn block(&self, m: i64) -> Option<&OperatorBlock> {
        self.blocks.get(m.unsigned_abs() as usize).and_then(|b| b.as_ref())
    }

    pub fn max_identity_defect(&self) -> f64 {
        self.blocks.iter().flatten().map(|b| b.identity_defect).fold(0.0, f64::max)
    }

    /// Factorizes `U_R² − e^{2iφ₀} P ρ̂` in every block.
    pub fn resolvent(&self, detuning_phase: f64) -> Result<Resolvent<'_>> {
        let phase = Complex64::from_polar(1.0, 2.0 * detuning_phase);
        let factors: Vec<Option<BlockFactor>> = self
            .blocks
            .par_iter()
            .map(|b| b.as_ref().map(|b| factor_block(b, phase, |a| parity_left(a, &b.parity))).transpose())
            .collect::<Result<_>>()?;
        Ok(Resolvent { ops: self, factors })
    }
}

struct BlockFactor {
    lu: LU<Complex64, Dyn, Dyn>,
    condition: f64,
}

fn parity_left(rho: &DMatrix<Complex64>, parity: &[f64]) -> DMatrix<Complex64> {
    let mut out = rho.clone();
    for (i, &p) in parity.iter().enumerate() {
        if p < 0.0 {
            out.row_mut(i).neg_mut();
        }
    }
    out
}

fn parity_right(rho: &DMatrix<Complex64>, parity: &[f64]) -> DMatrix<Complex64> {
    let mut out = rho.clone();
    for (j, &p) in parity.iter().enumerate() {
        if p < 0.0 {
            out.column_mut(j).neg_mut();
        }
    }
    out
}

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn factor_block(
    block: &OperatorBlock,
    phase: Complex64,
    mirror_term: impl Fn(&DMatrix<Complex64>) -> DMatrix<Complex64>,
) -> Result<BlockFactor> {
    let mut a = mirror_term(&block.rho) * (-phase);
    for (i, u) in block.propagator.iter().enumerate() {
        a[(i, i)] += u * u;
    }
    let norm = one_norm(&a);
    let lu = a.lu();
    let m = block.m as i64;
    let inverse = lu.try_inverse().ok_or(Error::Solver { m, condition: f64::INFINITY })?;
    let condition = norm * one_norm(&inverse);
    if !(condition.is_finite() && condition < CONDITION_LIMIT) {
        return Err(Error::Solver { m, condition });
    }
    Ok(BlockFactor { lu, condition })
}

/// Builds the operators for every block `|m| ≤ l_max`.
pub fn build_operators(geom: &CavityGeometry, basis: HarmonicBasis, grid: &AngularGrid) -> Result<CavityOperatorSet> {
    let all: Vec<usize> = (0..=basis.l_max).collect();
    build_operator_blocks(geom, basis, grid, &all)
}

/// Builds the operators for the listed `|m|` blocks only.
pub fn build_operator_blocks(
    geom: &CavityGeometry,
    basis: HarmonicBasis,
    grid: &AngularGrid,
    ms: &[usize],
) -> Result<CavityOperatorSet> {
    geom.validate()?;
    let l_max = basis.l_max;
    let built: Vec<OperatorBlock> = ms
        .par_iter()
        .filter(|&&m| m <= l_max)
        .map(|&m| build_block(geom, l_max, grid, m))
        .collect();
    let mut blocks = vec![None; l_max + 1];
    for b in built {
        if b.identity_defect > IDENTITY_DEFECT_LIMIT {
            return Err(Error::QuadratureOrder { order: grid.order_polar(), l_max, defect: b.identity_defect });
        }
        let m = b.m;
        blocks[m] = Some(b);
    }
    Ok(CavityOperatorSet { geometry: *geom, basis, blocks })
}

fn build_block(geom: &CavityGeometry, l_max: usize, grid: &AngularGrid, m: usize) -> OperatorBlock {
    let nodes = grid.polar_nodes();
    let dim = l_max - m + 1;
    let mut q = DMatrix::<f64>::zeros(dim, nodes.len());
    for (j, node) in nodes.iter().enumerate() {
        for (i, v) in normalized_legendre(m, l_max, node.u).into_iter().enumerate() {
            q[(i, j)] = v;
        }
    }
    let qt = q.transpose();
    let weighted = |f: &dyn Fn(f64) -> f64| -> DMatrix<f64> {
        let mut s = q.clone();
        for (j, node) in nodes.iter().enumerate() {
            let c = node.weight * f(node.theta);
            s.column_mut(j).scale_mut(c);
        }
        s * &qt
    };
    let gram = weighted(&|_| 1.0);
    let rho_re = weighted(&|t| geom.reflectivity(t).re);
    let rho_im = if geom.k_delta == 0.0 { DMatrix::zeros(dim, dim) } else { weighted(&|t| geom.reflectivity(t).im) };
    let tau = weighted(&|t| (1.0 - geom.reflectivity(t).norm_sqr()).max(0.0).sqrt());
    let transmission = weighted(&|t| (1.0 - geom.reflectivity(t).norm_sqr()).max(0.0));

    let mut identity_defect = 0.0_f64;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { 1.0 } else { 0.0 };
            identity_defect = identity_defect.max((gram[(i, j)] - target).abs());
        }
    }
    let rho = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(rho_re[(i, j)], rho_im[(i, j)]));
    let propagator = (m..=l_max)
        .map(|l| Complex64::from_polar(1.0, -((l * (l + 1)) as f64) / (2.0 * geom.k_radius)))
        .collect();
    let parity = (m..=l_max).map(|l| if l % 2 == 0 { 1.0 } else { -1.0 }).collect();
    OperatorBlock { m, propagator, parity, rho, tau, transmission, identity_defect }
}

/// Factorized resolvent at one detuning; reusable across field points.
pub struct Resolvent<'a> {
    ops: &'a CavityOperatorSet,
    factors: Vec<Option<BlockFactor>>,
}

/// Outcome of an enhancement evaluation with its numerical diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancementResult {
    pub value: f64,
    pub l_max: usize,
    /// Plane-wave coefficient energy in the last five `l` shells.
    pub tail: f64,
    /// Largest 1-norm condition estimate among the solved blocks.
    pub condition: f64,
    pub warnings: Vec<Warning>,
}

impl Resolvent<'_> {
    pub fn enhancement(&self, point: FieldPoint, tail_tolerance: f64) -> Result<EnhancementResult> {
        let expansion = plane_wave_coeffs(point, self.ops.basis)?;
        self.enhancement_of(&expansion, tail_tolerance)
    }

    pub fn enhancement_of(&self, expansion: &PlaneWaveExpansion, tail_tolerance: f64) -> Result<EnhancementResult> {
        let l_max = self.ops.basis.l_max;
        if expansion.coeffs.l_max() != l_max {
            return Err(Error::Domain("expansion and operators use different l_max".into()));
        }
        let ms: Vec<i64> = (-(l_max as i64)..=l_max as i64).collect();
        let parts: Vec<(f64, f64)> = ms
            .par_iter()
            .map(|&m| {
                let c = expansion.coeffs.block(m);
                let energy: f64 = c.iter().map(|z| z.norm_sqr()).sum();
                if energy == 0.0 {
                    return Ok((0.0, 0.0));
                }
                let idx = m.unsigned_abs() as usize;
                let (block, factor) = match (self.ops.blocks[idx].as_ref(), self.factors[idx].as_ref()) {
                    (Some(b), Some(f)) => (b, f),
                    _ if energy <= BLOCK_ENERGY_FLOOR => return Ok((0.0, 0.0)),
                    _ => return Err(Error::Domain(format!("operator block |m|={idx} was not built"))),
                };
                let rhs = DVector::from_iterator(c.len(), c.iter().zip(&block.propagator).map(|(c, u)| c * u));
                let y = factor.lu.solve(&rhs).ok_or(Error::Solver { m, condition: factor.condition })?;
                let wy = block.transmission.map(|v| Complex64::new(v, 0.0)) * &y;
                Ok((y.dotc(&wy).re, factor.condition))
            })
            .collect::<Result<_>>()?;
        let value = parts.iter().map(|p| p.0).sum();
        let condition = parts.iter().map(|p| p.1).fold(0.0, f64::max);
        let mut warnings = Vec::new();
        if expansion.tail > tail_tolerance {
            warnings.push(Warning::Truncation { l_max, tail: expansion.tail });
        }
        Ok(EnhancementResult { value, l_max, tail: expansion.tail, condition, warnings })
    }
}

/// `|m|` blocks carrying coefficient energy above `threshold`.
pub fn required_blocks(expansion: &PlaneWaveExpansion, threshold: f64) -> Vec<usize> {
    let l_max = expansion.coeffs.l_max();
    (0..=l_max)
        .filter(|&am| {
            let m = am as i64;
            let e: f64 = expansion.coeffs.block(m).iter().map(|z| z.norm_sqr()).sum::<f64>()
                + expansion.coeffs.block(-m).iter().map(|z| z.norm_sqr()).sum::<f64>();
            e > threshold
        })
        .collect()
}

/// Vacuum-fluctuation ratio at `point` from the full operator calculation.
pub fn enhancement_full(
    geom: &CavityGeometry,
    basis: HarmonicBasis,
    grid: &AngularGrid,
    point: FieldPoint,
    detuning_phase: f64,
) -> Result<EnhancementResult> {
    let expansion = plane_wave_coeffs(point, basis)?;
    let ms = required_blocks(&expansion, BLOCK_ENERGY_FLOOR);
    let ops = build_operator_blocks(geom, basis, grid, &ms)?;
    ops.resolvent(detuning_phase)?.enhancement_of(&expansion, DEFAULT_TAIL_TOLERANCE)
}

/// Intracavity field `U_R (U_R² − e^{2iφ} ρ̂P)⁻¹ τ̂ U_R f_in` for an incoming angular distribution.
pub fn intracavity_field_coeffs(
    ops: &CavityOperatorSet,
    detuning_phase: f64,
    f_in: &AngularFunction,
) -> Result<AngularFunction> {
    let basis = ops.basis;
    if f_in.l_max() != basis.l_max {
        return Err(Error::Domain("input function and operators use different l_max".into()));
    }
    let phase = Complex64::from_polar(1.0, 2.0 * detuning_phase);
    let mut out = AngularFunction::zeros(basis);
    for m in basis.m_values() {
        let f = f_in.block(m);
        if f.iter().all(|z| z.norm_sqr() == 0.0) {
            continue;
        }
        let block = ops
            .block(m)
            .ok_or_else(|| Error::Domain(format!("operator block |m|={} was not built", m.unsigned_abs())))?;
        let factor = factor_block(block, phase, |a| parity_right(a, &block.parity))?;
        let uf = DVector::from_iterator(f.len(), f.iter().zip(&block.propagator).map(|(f, u)| f * u));
        let rhs = block.tau.map(|v| Complex64::new(v, 0.0)) * uf;
        let x = factor.lu.solve(&rhs).ok_or(Error::Solver { m, condition: factor.condition })?;
        for ((g, x), u) in out.block_mut(m).iter_mut().zip(x.iter()).zip(&block.propagator) {
            *g = u * x;
        }
    }
    Ok(out)
}

/// `ν_{l,n}` of the closed sphere, in units of the free spectral range `c/2R`.
pub fn perfect_sphere_frequency(l: usize, n: usize, k_radius: f64) -> f64 {
    let lf = l as f64;
    n as f64 + lf / 2.0 - lf * (lf + 1.0) / (2.0 * PI * k_radius)
}

/// Vacuum fluctuations at radius `kr` inside a closed sphere of uniform reflectivity.
pub fn closed_cavity_mode_sum(rho: f64, k_radius: f64, detuning_phase: f64, kr: f64, l_max: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain(format!("closed-cavity sum needs 0 <= rho < 1, got {rho}")));
    }
    let radial = radial_bessel_table(l_max, kr)?;
    let t = 1.0 - rho * rho;
    let round_trip = Complex64::from_polar(rho, 2.0 * detuning_phase);
    Ok(radial
        .iter()
        .enumerate()
        .map(|(l, j)| {
            let lf = l as f64;
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let d = Complex64::from_polar(1.0, -lf * (lf + 1.0) / k_radius) - round_trip * sign;
            t / d.norm_sqr() * 0.5 * PI * (2.0 * lf + 1.0) * j * j
        })
        .sum())
}
