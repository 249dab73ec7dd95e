//! Special functions and the spherical-harmonic basis.
//!
//! Harmonics are normalized under the `dΩ/4π` measure, so `Y_00 = 1` and
//! `∫ dΩ/4π |Y_lm|² = 1`. The radial functions are `J_{l+1/2}(kr)/√(kr)`,
//! i.e. `√(2/π)·j_l(kr)` in terms of spherical Bessel functions. All lengths
//! are dimensionless phases (wavenumber times length).

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default bound on the coefficient energy carried by the last five `l`
/// values of a truncated expansion.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;

/// Quantum numbers of one harmonic `Y_lm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    pub l: usize,
    pub m: i64,
}

impl HarmonicIndex {
    pub fn new(l: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > l {
            return Err(Error::InvalidIndex { l, m });
        }
        Ok(Self { l, m })
    }
}

/// Dimensionless radius `kr`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RadialArgument(f64);

impl RadialArgument {
    pub fn new(kr: f64) -> Result<Self> {
        if !(kr >= 0.0) || !kr.is_finite() {
            return Err(Error::Domain(format!("radial argument kr={kr} must be finite and >= 0")));
        }
        Ok(Self(kr))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A position near the cavity center, in units of `1/k`. The cavity axis is `z`.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct FieldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FieldPoint {
    pub const ORIGIN: FieldPoint = FieldPoint { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn on_axis(kz: f64) -> Self {
        Self { x: 0.0, y: 0.0, z: kz }
    }

    pub fn kr(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Distance from the cavity axis.
    pub fn transverse(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_on_axis(&self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }

    /// Polar and azimuthal angles of the direction of the point; `(0, 0)` at the origin.
    pub fn angles(&self) -> (f64, f64) {
        let r = self.kr();
        if r == 0.0 {
            return (0.0, 0.0);
        }
        ((self.z / r).clamp(-1.0, 1.0).acos(), self.y.atan2(self.x))
    }

    pub fn dot(&self, v: [f64; 3]) -> f64 {
        self.x * v[0] + self.y * v[1] + self.z * v[2]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Truncation of the harmonic basis: every `(l, m)` with `l <= l_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarmonicBasis {
    pub l_max: usize,
}

impl HarmonicBasis {
    pub fn new(l_max: usize) -> Self {
        Self { l_max }
    }

    /// Dimension of the `m` block (`l = |m|..=l_max`).
    pub fn block_dim(&self, m: i64) -> usize {
        let am = m.unsigned_abs() as usize;
        if am > self.l_max {
            0
        } else {
            self.l_max - am + 1
        }
    }

    pub fn m_values(&self) -> impl Iterator<Item = i64> {
        let l = self.l_max as i64;
        -l..=l
    }

    pub fn len(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Coefficients of an angular function on the truncated harmonic basis,
/// stored as per-`m` blocks indexed by `l = |m|..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularFunction {
    basis: HarmonicBasis,
    blocks: Vec<Vec<Complex64>>,
}

impl AngularFunction {
    pub fn zeros(basis: HarmonicBasis) -> Self {
        let blocks = basis
            .m_values()
            .map(|m| vec![Complex64::new(0.0, 0.0); basis.block_dim(m)])
            .collect();
        Self { basis, blocks }
    }

    pub fn basis(&self) -> HarmonicBasis {
        self.basis
    }

    pub fn l_max(&self) -> usize {
        self.basis.l_max
    }

    fn slot(&self, m: i64) -> usize {
        (m + self.basis.l_max as i64) as usize
    }

    pub fn block(&self, m: i64) -> &[Complex64] {
        &self.blocks[self.slot(m)]
    }

    pub fn block_mut(&mut self, m: i64) -> &mut [Complex64] {
        let s = self.slot(m);
        &mut self.blocks[s]
    }

    pub fn get(&self, idx: HarmonicIndex) -> Complex64 {
        let am = idx.m.unsigned_abs() as usize;
        if idx.l > self.basis.l_max || am > idx.l {
            return Complex64::new(0.0, 0.0);
        }
        self.block(idx.m)[idx.l - am]
    }

    pub fn set(&mut self, idx: HarmonicIndex, value: Complex64) {
        let am = idx.m.unsigned_abs() as usize;
        self.block_mut(idx.m)[idx.l - am] = value;
    }

    /// `Σ |c_lm|²`, the squared norm under `dΩ/4π`.
    pub fn norm_sqr(&self) -> f64 {
        self.blocks.iter().flatten().map(|c| c.norm_sqr()).sum()
    }

    /// Coefficient energy summed over `m` for each `l`.
    pub fn energy_per_l(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.basis.l_max + 1];
        for m in self.basis.m_values() {
            let am = m.unsigned_abs() as usize;
            for (i, c) in self.block(m).iter().enumerate() {
                out[am + i] += c.norm_sqr();
            }
        }
        out
    }
}

/// `J_{l+1/2}(kr)/√(kr)` for `l = 0..=l_max`, by Miller's downward recurrence.
///
/// The recurrence is seeded well above `max(l_max, kr)` and normalized against
/// whichever of the closed forms `j_0`, `j_1` is larger in magnitude.
pub fn radial_bessel_table(l_max: usize, kr: f64) -> Result<Vec<f64>> {
    let x = RadialArgument::new(kr)?.value();
    let scale = FRAC_2_PI.sqrt();
    let mut out = vec![0.0; l_max + 1];
    if x == 0.0 {
        out[0] = scale;
        return Ok(out);
    }

    let top = (l_max as f64).max(x.ceil());
    let start = (top + 30.0 + 10.0 * top.cbrt()).ceil() as usize;

    // Unnormalized minimal solution of j_{n-1} = (2n+1)/x j_n - j_{n+1}.
    let mut next = 0.0_f64;
    let mut current = 1e-300_f64;
    for n in (1..=start).rev() {
        let below = (2 * n + 1) as f64 / x * current - next;
        next = current;
        current = below;
        if n - 1 <= l_max {
            out[n - 1] = current;
        }
        if current.abs() > 1e200 {
            let s = 1e-200;
            current *= s;
            next *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }

    let (sin, cos) = x.sin_cos();
    let j0 = sin / x;
    let j1 = sin / (x * x) - cos / x;
    let norm = if j0.abs() >= j1.abs() { j0 / current } else { j1 / next };
    for v in out.iter_mut() {
        *v *= norm * scale;
    }
    Ok(out)
}

/// `J_{l+1/2}(kr)/√(kr)`.
pub fn radial_bessel(l: usize, kr: f64) -> Result<f64> {
    Ok(radial_bessel_table(l, kr)?[l])
}

/// Large-argument form `√(2/π)/kr · sin(kr − πl/2 + l(l+1)/2kr)`.
pub fn asymptotic_radial_bessel(l: usize, kr: f64) -> Result<f64> {
    if !(kr > 0.0) || !kr.is_finite() {
        return Err(Error::Domain(format!("asymptotic form needs kr > 0, got {kr}")));
    }
    let lf = l as f64;
    let quarter = (l % 4) as f64 * PI / 2.0;
    let phase = kr - quarter + lf * (lf + 1.0) / (2.0 * kr);
    Ok(FRAC_2_PI.sqrt() / kr * phase.sin())
}

/// `√((2l+1)(l−m)!/(l+m)!) · P_l^m(u)` for `l = m..=l_max` (Condon–Shortley phase),
/// computed with the standard normalized three-term recurrence.
pub fn normalized_legendre(m: usize, l_max: usize, u: f64) -> Vec<f64> {
    if m > l_max {
        return Vec::new();
    }
    let s = (1.0 - u * u).max(0.0).sqrt();
    let mut qmm = 1.0_f64;
    for k in 1..=m {
        let k = k as f64;
        qmm *= -((2.0 * k + 1.0) / (2.0 * k)).sqrt() * s;
    }
    let mut out = Vec::with_capacity(l_max - m + 1);
    out.push(qmm);
    if m == l_max {
        return out;
    }
    let mf = m as f64;
    out.push((2.0 * mf + 3.0).sqrt() * u * qmm);
    for l in (m + 2)..=l_max {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lm1 = lf - 1.0;
        let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
        let n = out.len();
        out.push(a * (u * out[n - 1] - b * out[n - 2]));
    }
    out
}

/// Partial sums of `Σ (2l+1) j_l(kr)²` over `l ≤ l_max`: `(all, even l, odd l)`.
///
/// For `l_max` well above `kr` these approach `1` and `½ ± sin(2kr)/4kr`.
pub fn bessel_sum_rules(kr: f64, l_max: usize) -> Result<(f64, f64, f64)> {
    let table = radial_bessel_table(l_max, kr)?;
    let (mut even, mut odd) = (0.0, 0.0);
    for (l, j) in table.iter().enumerate() {
        let term = 0.5 * PI * (2 * l + 1) as f64 * j * j;
        if l % 2 == 0 {
            even += term;
        } else {
            odd += term;
        }
    }
    Ok((even + odd, even, odd))
}

/// Harmonic `Y_lm(θ, φ)` normalized so that `∫ dΩ/4π |Y_lm|² = 1`.
pub fn ylm(idx: HarmonicIndex, theta: f64, azimuth: f64) -> Result<Complex64> {
    let idx = HarmonicIndex::new(idx.l, idx.m)?;
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("polar angle {theta} outside [0, π]")));
    }
    let am = idx.m.unsigned_abs() as usize;
    let p = normalized_legendre(am, idx.l, theta.cos())[idx.l - am];
    let y = Complex64::from_polar(p, am as f64 * azimuth);
    if idx.m < 0 {
        let sign = if am.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(y.conj() * sign)
    } else {
        Ok(y)
    }
}

/// Harmonic expansion of the focused kernel `e^{-ikΩ̂·r}` together with its
/// truncation diagnostic.
#[derive(Debug, Clone)]
pub struct PlaneWaveExpansion {
    pub coeffs: AngularFunction,
    /// Coefficient energy in the last five `l` shells.
    pub tail: f64,
}

impl PlaneWaveExpansion {
    pub fn check_tail(&self, tolerance: f64) -> Result<()> {
        if self.tail > tolerance {
            return Err(Error::Truncation {
                l_max: self.coeffs.l_max(),
                tail: self.tail,
                tolerance,
            });
        }
        Ok(())
    }
}

/// Coefficients `(−i)^l √(π/2) · J_{l+1/2}(kr)/√(kr) · conj(Y_lm(r̂))` of
/// `e^{-ikΩ̂·r}` on `Y_lm(Ω̂)`.
pub fn plane_wave_coeffs(point: FieldPoint, basis: HarmonicBasis) -> Result<PlaneWaveExpansion> {
    if !point.is_finite() {
        return Err(Error::Domain("field point must be finite".into()));
    }
    let l_max = basis.l_max;
    let kr = point.kr();
    let radial = radial_bessel_table(l_max, kr)?;
    let (theta, azimuth) = point.angles();
    let u = theta.cos();
    let half_pi_sqrt = (PI / 2.0).sqrt();

    let mut coeffs = AngularFunction::zeros(basis);
    let phase_l = |l: usize| match l % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    for am in 0..=l_max {
        let legendre = normalized_legendre(am, l_max, u);
        let rot = Complex64::from_polar(1.0, am as f64 * azimuth);
        let sign = if am.is_multiple_of(2) { 1.0 } else { -1.0 };
        for (i, p) in legendre.iter().enumerate() {
            let l = am + i;
            let radial_part = phase_l(l) * half_pi_sqrt * radial[l];
            // conj(Y_l,m(r̂)) with Y_l,m = p e^{imφ}; Y_l,-m = (-1)^m conj(Y_l,m)
            let y_pos = rot * *p;
            coeffs.block_mut(am as i64)[i] = radial_part * y_pos.conj();
            if am > 0 {
                let y_neg = y_pos.conj() * sign;
                coeffs.block_mut(-(am as i64))[i] = radial_part * y_neg.conj();
            }
        }
    }

    let shells = coeffs.energy_per_l();
    let first = l_max.saturating_sub(4);
    let tail = shells[first..].iter().sum();
    Ok(PlaneWaveExpansion { coeffs, tail })
}
