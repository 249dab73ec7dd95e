//! Angular integration over the sphere and a principal-value integrator.
//!
//! Grids use the `dΩ/4π` measure: weights over the full sphere sum to one.
//! Polar integration is Gauss–Legendre in `cos θ`, split into segments at
//! mirror edges so that step-like integrands are integrated piecewise-smoothly.
//! Azimuthal integration is the periodic trapezoidal rule.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi's initial guess, then Newton on P_n.
        let k = (i + 1) as f64;
        let nf = n as f64;
        let mut x = (PI * (k - 0.25) / (nf + 0.5)).cos()
            * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        for _ in 0..100 {
            let (p, prev) = legendre_pair(n, x);
            let dp = n as f64 * (x * p - prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        // at a root, (1 − x²) P_n'(x) = n P_{n−1}(x)
        let (_, prev) = legendre_pair(n, x);
        let w = 2.0 * (1.0 - x * x) / (nf * prev).powi(2);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_{n−1}(x))`.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// One polar node: `u = cos θ`, its weight under `dΩ/4π` (azimuth integrated),
/// and the index of the segment it belongs to (segments ordered by increasing θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarNode {
    pub u: f64,
    pub theta: f64,
    pub weight: f64,
    pub segment: usize,
}

/// Product grid: Gauss–Legendre in `cos θ` per segment × uniform azimuth.
#[derive(Debug, Clone)]
pub struct AngularGrid {
    edges: Vec<f64>,
    order_polar: usize,
    polar: Vec<PolarNode>,
    azimuths: Vec<f64>,
}

impl AngularGrid {
    /// Segment boundaries in θ, including 0 and π.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn order_polar(&self) -> usize {
        self.order_polar
    }

    pub fn order_azimuthal(&self) -> usize {
        self.azimuths.len()
    }

    pub fn polar_nodes(&self) -> &[PolarNode] {
        &self.polar
    }

    pub fn azimuths(&self) -> &[f64] {
        &self.azimuths
    }

    /// All nodes as `(θ, φ, weight)`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let na = self.azimuths.len() as f64;
        self.polar
            .iter()
            .flat_map(move |p| self.azimuths.iter().map(move |&a| (p.theta, a, p.weight / na)))
    }

    /// `∫ dΩ/4π f(θ, φ)`.
    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        let na = self.azimuths.len() as f64;
        self.polar
            .iter()
            .map(|p| p.weight * self.azimuths.iter().map(|&a| f(p.theta, a)).sum::<f64>() / na)
            .sum()
    }

    /// `∫ dΩ/4π f(cos θ)` for azimuth-independent integrands.
    pub fn integrate_polar<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.polar.iter().map(|p| p.weight * f(p.u)).sum()
    }
}

/// Builds a grid with segment boundaries at `theta_edges` (strictly increasing, inside (0, π)).
pub fn build_grid(theta_edges: &[f64], order_polar: usize, order_azimuthal: usize) -> Result<AngularGrid> {
    if order_polar < 2 || order_azimuthal < 1 {
        return Err(Error::Grid(format!(
            "orders must be >= 2 (polar) and >= 1 (azimuthal), got {order_polar}, {order_azimuthal}"
        )));
    }
    let mut edges = Vec::with_capacity(theta_edges.len() + 2);
    edges.push(0.0);
    for &t in theta_edges {
        if !(t > 0.0 && t < PI) {
            return Err(Error::Grid(format!("segment edge {t} outside (0, π)")));
        }
        edges.push(t);
    }
    edges.push(PI);
    for w in edges.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::DegenerateSegment { lo: w[0], hi: w[1] });
        }
    }

    let (x, wts) = gauss_legendre(order_polar);
    let mut polar = Vec::with_capacity(order_polar * (edges.len() - 1));
    for (segment, w) in edges.windows(2).enumerate() {
        // integrate in u = cos θ; u decreases as θ increases
        let (u_hi, u_lo) = (w[0].cos(), w[1].cos());
        let half = 0.5 * (u_hi - u_lo);
        let mid = 0.5 * (u_hi + u_lo);
        // nodes ordered by increasing θ within the segment
        for (xi, wi) in x.iter().rev().zip(wts.iter().rev()) {
            let u = mid + half * xi;
            polar.push(PolarNode {
                u,
                theta: u.clamp(-1.0, 1.0).acos(),
                weight: 0.5 * half * wi,
                segment,
            });
        }
    }
    let azimuths = (0..order_azimuthal)
        .map(|j| 2.0 * PI * j as f64 / order_azimuthal as f64)
        .collect();
    Ok(AngularGrid { edges, order_polar, polar, azimuths })
}

/// Fraction of the full solid angle covered by two symmetric caps of half-aperture `theta_m`.
pub fn solid_angle_fraction(theta_m: f64) -> f64 {
    (1.0 - theta_m.clamp(0.0, PI / 2.0).cos()).clamp(0.0, 1.0)
}

/// Settings for [`pv_integrate`].
#[derive(Debug, Clone, Copy)]
pub struct PvOptions {
    /// Period of the integrand's numerator.
    pub period: f64,
    /// Composite Gauss panels per period and nodes per panel.
    pub panels_per_period: usize,
    pub nodes_per_panel: usize,
    /// Window half-width of the coarsest level, in periods; doubled at each refinement.
    pub base_periods: usize,
    pub refinements: usize,
    pub abs_tolerance: f64,
    pub rel_tolerance: f64,
}

impl Default for PvOptions {
    fn default() -> Self {
        Self {
            period: PI,
            panels_per_period: 256,
            nodes_per_panel: 16,
            base_periods: 16,
            refinements: 4,
            abs_tolerance: 1e-10,
            rel_tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvEstimate {
    pub value: f64,
    pub error: f64,
}

/// Principal value `P∫ f(δ)/δ dδ` over the real line for a periodic `f`.
///
/// The odd part `f(δ) − f(−δ)` is integrated against `1/δ` over `(0, W]`, one
/// period at a time so that cancelling lobes are summed together, and the
/// windowed values are extrapolated in `W` with a Richardson table on the
/// `1/W` tail expansion.
pub fn pv_integrate<F: Fn(f64) -> f64>(f: F, opts: PvOptions) -> Result<PvEstimate> {
    let period = opts.period;
    if !(period > 0.0) || opts.panels_per_period == 0 || opts.nodes_per_panel == 0 || opts.base_periods == 0 {
        return Err(Error::Domain("invalid principal-value options".into()));
    }
    let (x, w) = gauss_legendre(opts.nodes_per_panel);
    let panel = period / opts.panels_per_period as f64;
    let mut nodes = Vec::with_capacity(opts.panels_per_period * x.len());
    for p in 0..opts.panels_per_period {
        let mid = (p as f64 + 0.5) * panel;
        for (xi, wi) in x.iter().zip(&w) {
            let u = mid + 0.5 * panel * xi;
            let odd = f(u) - f(-u);
            nodes.push((u, 0.5 * panel * wi * odd));
        }
    }

    let levels = opts.refinements + 1;
    let mut windows = Vec::with_capacity(levels);
    let mut partial = vec![0.0_f64; nodes.len()];
    let mut done = 0usize;
    for level in 0..levels {
        let target = opts.base_periods << level;
        for (acc, (u, _)) in partial.iter_mut().zip(&nodes) {
            let mut s = 0.0;
            for n in (done..target).rev() {
                s += 1.0 / (u + n as f64 * period);
            }
            *acc += s;
        }
        done = target;
        let total: f64 = nodes.iter().zip(&partial).map(|((_, wo), k)| wo * k).sum();
        windows.push(total);
    }

    // Richardson on S(W) = S∞ + a/W + b/W² + ...
    let mut table = vec![windows];
    for order in 1..levels {
        let prev = &table[order - 1];
        let factor = (1u64 << order) as f64;
        let next: Vec<f64> = prev.windows(2).map(|p| (factor * p[1] - p[0]) / (factor - 1.0)).collect();
        table.push(next);
    }
    let best = *table[levels - 1].last().unwrap();
    let error = if levels >= 2 {
        (best - table[levels - 2].last().unwrap()).abs()
    } else {
        f64::INFINITY
    };
    let tol = opts.abs_tolerance + opts.rel_tolerance * best.abs();
    if !(error <= tol) {
        return Err(Error::NoConvergence { estimate: error, tolerance: tol });
    }
    Ok(PvEstimate { value: best, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(10);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-14);
        // degree 19 polynomial is exact
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert_relative_eq!(s, 2.0 / 19.0, epsilon = 1e-14);
        let big = gauss_legendre(301);
        assert_relative_eq!(big.1.iter().sum::<f64>(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_weights_normalized() {
        let g = build_grid(&[PI / 4.0, 3.0 * PI / 4.0], 64, 32).unwrap();
        let total: f64 = g.nodes().map(|n| n.2).sum();
        assert!((total - 1.0).abs() < 1e-13, "{}", total - 1.0);
        assert!((g.integrate(|_, _| 1.0) - 1.0).abs() < 1e-14);
        // no node lands on a boundary
        for p in g.polar_nodes() {
            assert!(g.edges().iter().all(|&e| (p.theta - e).abs() > 1e-9));
        }
    }

    #[test]
    fn grid_integrates_kernel_and_polarization() {
        let g = build_grid(&[PI / 4.0, 3.0 * PI / 4.0], 64, 32).unwrap();
        // cos²(kΩ̂·r) at r = 0
        assert!((g.integrate(|_, _| 1.0f64.powi(2)) - 1.0).abs() < 1e-14);
        for d in [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.6, 0.0, 0.8], [0.48, 0.6, 0.64]] {
            let v = g.integrate(|t, p| {
                let o = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
                let c = d[0] * o[0] + d[1] * o[1] + d[2] * o[2];
                1.5 * (1.0 - c * c)
            });
            assert!((v - 1.0).abs() < 1e-13, "{d:?}: {v}");
        }
    }

    #[test]
    fn grid_legendre_exactness() {
        let order = 12;
        let g = build_grid(&[0.9, 2.0], order, 1).unwrap();
        for n in 0..(2 * order) {
            let v = g.integrate_polar(|u| legendre_pair(n, u).0);
            let expect = if n == 0 { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-12, "P_{n}: {v}");
        }
    }

    #[test]
    fn grid_rejects_bad_edges() {
        assert!(matches!(
            build_grid(&[1.0, 1.0], 8, 4),
            Err(Error::DegenerateSegment { .. })
        ));
        assert!(build_grid(&[0.0], 8, 4).is_err());
        assert!(build_grid(&[2.0, 1.0], 8, 4).is_err());
        assert!(build_grid(&[1.0], 1, 4).is_err());
    }

    #[test]
    fn solid_angle_values() {
        assert_relative_eq!(solid_angle_fraction(PI / 4.0), 0.29289321881345254, epsilon = 1e-15);
        assert!((solid_angle_fraction(PI / 4.0) - 0.293).abs() < 5e-4);
        assert_eq!(solid_angle_fraction(0.0), 0.0);
        assert_relative_eq!(solid_angle_fraction(PI / 2.0), 1.0, epsilon = 1e-15);
    }

    fn airy(rho: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| (1.0 - rho * rho) / (1.0 - 2.0 * rho * (2.0 * x).cos() + rho * rho)
    }

    #[test]
    fn pv_of_even_integrand_vanishes() {
        let l = airy(0.9);
        let est = pv_integrate(|d| l(-d), PvOptions::default()).unwrap();
        assert!(est.value.abs() < 1e-12);
    }

    #[test]
    fn pv_reproduces_known_transform() {
        // P∫ dδ/δ L(φ−δ) = 2πρ sin2φ / |1 − ρe^{2iφ}|²
        let (rho, phi) = (0.9, 0.1);
        let l = airy(rho);
        let est = pv_integrate(|d| l(phi - d), PvOptions::default()).unwrap();
        let closed = 2.0 * PI * rho * (2.0 * phi).sin()
            / (1.0 - 2.0 * rho * (2.0 * phi).cos() + rho * rho);
        assert_relative_eq!(est.value, closed, max_relative = 1e-8);
        assert!(est.error < 1e-8);
    }

    #[test]
    fn pv_antisymmetric_in_phase() {
        let l = airy(0.5);
        for &phi in &[0.05, 0.4, 1.2] {
            let a = pv_integrate(|d| l(phi - d), PvOptions::default()).unwrap().value;
            let b = pv_integrate(|d| l(-phi - d), PvOptions::default()).unwrap().value;
            assert!((a + b).abs() < 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn pv_reports_non_convergence() {
        let opts = PvOptions { refinements: 1, base_periods: 1, abs_tolerance: 0.0, rel_tolerance: 0.0, ..Default::default() };
        let l = airy(0.9);
        assert!(matches!(
            pv_integrate(|d| l(0.3 - d), opts),
            Err(Error::NoConvergence { .. })
        ));
    }
}
