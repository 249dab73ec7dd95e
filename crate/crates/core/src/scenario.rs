//! Execution of a [`ScenarioConfig`] into result tables.
//!
//! Scan points are evaluated on the current rayon pool and gathered in input
//! order, so the tables do not depend on the number of worker threads.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::airy_shift::{
    airy_lorentzian, airy_lorentzian_finesse, pv_shift, pv_shift_cos, pv_shift_sin, FinesseParam,
};
use crate::dipole_response::{response, DipoleOrientation, RaySettings, ResponseMethod};
use crate::error::{Error, Result, Warning};
use crate::io_formats::{
    emit_plot_script, plot_kind_for, write_table_file, Cell, Column, Numerics, Provenance, ResultTable,
    ScanMethod, ScanSpec, ScenarioConfig, TableFormat,
};
use crate::quadrature::{pv_integrate, PvOptions};
use crate::ray_model::{enhancement_ray, linewidth, Corrections, RayOrders};
use crate::specfun::{plane_wave_coeffs, FieldPoint, HarmonicBasis};
use crate::wave_ops::{
    build_operator_blocks, operator_grid, required_blocks, CavityGeometry, CavityOperatorSet,
    EnhancementResult, BLOCK_ENERGY_FLOOR,
};

/// Everything a scenario run produced.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub tables: Vec<ResultTable>,
    /// Human-readable summary lines (peak values, method agreement).
    pub summary: Vec<String>,
    /// Distinct validity warnings raised anywhere in the run.
    pub warnings: Vec<Warning>,
}

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Ray settings implied by the numerics block.
pub fn ray_settings(numerics: &Numerics) -> RaySettings {
    RaySettings {
        corrections: Corrections { aberration: numerics.aberration, diffraction: numerics.diffraction },
        orders: RayOrders { polar: numerics.order_polar, azimuthal: numerics.order_azimuthal },
    }
}

fn method_settings(method: ScanMethod, base: RaySettings) -> (ResponseMethod, RaySettings) {
    match method {
        ScanMethod::RaySymmetric => (ResponseMethod::RaySymmetric, base),
        ScanMethod::RayNaive => (ResponseMethod::RayAsymmetric, RaySettings { corrections: Corrections::NONE, ..base }),
        _ => (ResponseMethod::RayAsymmetric, base),
    }
}

/// Full-calculation operators shared by every point of a scan.
pub struct FullSolver {
    ops: CavityOperatorSet,
    tail_tolerance: f64,
}

impl FullSolver {
    /// Builds only the `|m|` blocks that the plane-wave expansions of `points` need.
    pub fn new(geom: &CavityGeometry, numerics: &Numerics, points: &[FieldPoint]) -> Result<Self> {
        let basis = HarmonicBasis::new(numerics.l_max);
        let mut ms = BTreeSet::new();
        for p in points {
            ms.extend(required_blocks(&plane_wave_coeffs(*p, basis)?, BLOCK_ENERGY_FLOOR));
        }
        let ms: Vec<usize> = ms.into_iter().collect();
        let grid = operator_grid(geom, numerics.l_max, numerics.order_polar)?;
        let ops = build_operator_blocks(geom, basis, &grid, &ms)?;
        Ok(Self { ops, tail_tolerance: numerics.tail_tolerance })
    }

    pub fn operators(&self) -> &CavityOperatorSet {
        &self.ops
    }

    /// Enhancement at every point for one detuning, in input order.
    pub fn enhancements(&self, detuning: f64, points: &[FieldPoint]) -> Result<Vec<EnhancementResult>> {
        let resolvent = self.ops.resolvent(detuning)?;
        points.par_iter().map(|p| resolvent.enhancement(*p, self.tail_tolerance)).collect()
    }
}

#[derive(Default)]
struct Diagnostics {
    warnings: Vec<Warning>,
    max_tail: f64,
    max_condition: f64,
    methods: BTreeSet<String>,
}

impl Diagnostics {
    fn warn(&mut self, w: impl IntoIterator<Item = Warning>) {
        for w in w {
            let dup = self.warnings.iter().any(|x| match (x, &w) {
                (Warning::RayValidity { .. }, Warning::RayValidity { .. }) => true,
                _ => *x == w,
            });
            if !dup {
                self.warnings.push(w);
            }
        }
    }

    fn full(&mut self, r: &EnhancementResult) {
        self.max_tail = self.max_tail.max(r.tail);
        self.max_condition = self.max_condition.max(r.condition);
        self.warn(r.warnings.iter().cloned());
    }

    fn provenance(&self, config: &ScenarioConfig) -> Result<Provenance> {
        let mut p = Provenance::for_config(config)?;
        p.methods = self.methods.iter().cloned().collect();
        let n = &config.numerics;
        p.accuracy.insert("l_max".into(), n.l_max as f64);
        p.accuracy.insert("order_polar".into(), n.order_polar as f64);
        p.accuracy.insert("order_azimuthal".into(), n.order_azimuthal as f64);
        p.accuracy.insert("tail_tolerance".into(), n.tail_tolerance);
        p.accuracy.insert("max_tail".into(), self.max_tail);
        p.accuracy.insert("max_condition".into(), self.max_condition);
        Ok(p)
    }
}

type Row = Vec<Cell>;

/// Runs the scan described by `config`. The config is validated first.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutput> {
    config.validate()?;
    let mut diag = Diagnostics::default();
    let mut summary = Vec::new();
    let tables: Vec<(String, Vec<Column>, Vec<Row>)> = match &config.scan {
        ScanSpec::DetuningSweep { phi_min, phi_max, steps, point, dipoles, methods } => {
            let dipoles = if dipoles.is_empty() { vec![config.dipole] } else { dipoles.clone() };
            let rows = detuning_sweep(config, &mut diag, &mut summary, (*phi_min, *phi_max, *steps), *point, &dipoles, methods)?;
            let cols = vec![
                Column::float("phi0", "rad"),
                Column::float("detuning", "linewidth"),
                Column::text("dipole"),
                Column::float("gamma_ratio", "1"),
                Column::float("shift_ratio", "1"),
                Column::text("method"),
            ];
            vec![("detuning-sweep".into(), cols, rows)]
        }
        ScanSpec::AxialProfile { kz_min, kz_max, steps, detuning, methods } => {
            let points: Vec<FieldPoint> = linspace(*kz_min, *kz_max, *steps).into_iter().map(FieldPoint::on_axis).collect();
            let rows = point_scan(config, &mut diag, &mut summary, &points, *detuning, methods, |p| vec![Cell::Float(p.z)])?;
            let mut cols = vec![Column::float("kz", "1")];
            cols.extend(response_columns());
            vec![("axial-profile".into(), cols, rows)]
        }
        ScanSpec::RadialMap { kx_max, kz_max, nx, nz, detuning, methods } => {
            let mut points = Vec::with_capacity(nx * nz);
            for kx in linspace(0.0, *kx_max, *nx) {
                for kz in linspace(0.0, *kz_max, *nz) {
                    points.push(FieldPoint::new(kx, 0.0, kz));
                }
            }
            let rows = point_scan(config, &mut diag, &mut summary, &points, *detuning, methods, |p| {
                vec![Cell::Float(p.x), Cell::Float(p.z)]
            })?;
            let mut cols = vec![Column::float("kx", "1"), Column::float("kz", "1")];
            cols.extend(response_columns());
            vec![("radial-map".into(), cols, rows)]
        }
        ScanSpec::Compare { kz_min, kz_max, steps, detuning } => {
            let rows = compare(config, &mut diag, &mut summary, (*kz_min, *kz_max, *steps), *detuning)?;
            let cols = vec![
                Column::float("kz", "1"),
                Column::float("full", "1"),
                Column::float("ray_corrected", "1"),
                Column::float("ray_naive", "1"),
                Column::float("dev_corrected", "1"),
                Column::float("dev_naive", "1"),
            ];
            vec![("compare".into(), cols, rows)]
        }
        ScanSpec::DefocusStudy { k_deltas, phi_min, phi_max, steps, methods } => {
            let (rows, peaks) = defocus_study(config, &mut diag, &mut summary, k_deltas, (*phi_min, *phi_max, *steps), methods)?;
            let cols = vec![
                Column::float("k_delta", "1"),
                Column::float("phi0", "rad"),
                Column::float("enhancement", "1"),
                Column::text("method"),
            ];
            let peak_cols = vec![
                Column::float("k_delta", "1"),
                Column::text("method"),
                Column::float("phi_peak", "rad"),
                Column::float("peak", "1"),
                Column::float("peak_ratio", "1"),
            ];
            vec![("defocus-study".into(), cols, rows), ("defocus-peaks".into(), peak_cols, peaks)]
        }
        ScanSpec::AiryCheck { rhos, phi_steps } => {
            diag.methods.insert("closed-form".into());
            diag.methods.insert("pv-quadrature".into());
            let rows = airy_check_rows(rhos, *phi_steps, &mut summary)?;
            let cols = vec![
                Column::float("rho", "1"),
                Column::float("phi", "rad"),
                Column::text("kernel"),
                Column::float("closed_form", "1"),
                Column::float("oracle", "1"),
                Column::float("oracle_error", "1"),
                Column::float("rel_err", "1"),
            ];
            vec![("airy-check".into(), cols, rows)]
        }
    };
    let provenance = diag.provenance(config)?;
    let mut out = Vec::with_capacity(tables.len());
    for (name, cols, rows) in tables {
        let mut t = ResultTable::new(&name, cols, provenance.clone());
        for r in rows {
            t.push_row(r)?;
        }
        out.push(t);
    }
    Ok(ScenarioOutput { tables: out, summary, warnings: diag.warnings })
}

fn response_columns() -> Vec<Column> {
    vec![Column::float("gamma_ratio", "1"), Column::float("shift_ratio", "1"), Column::text("method")]
}

fn detuning_sweep(
    config: &ScenarioConfig,
    diag: &mut Diagnostics,
    summary: &mut Vec<String>,
    (lo, hi, n): (f64, f64, usize),
    point: FieldPoint,
    dipoles: &[DipoleOrientation],
    methods: &[ScanMethod],
) -> Result<Vec<Row>> {
    let geom = &config.geometry;
    let width = linewidth(geom.rho1, geom.rho2);
    let phis = linspace(lo, hi, n);
    let base = ray_settings(&config.numerics);
    let mut rows = Vec::new();
    for dipole in dipoles {
        for &method in methods {
            diag.methods.insert(method.label().into());
            let (rm, settings) = method_settings(method, base);
            let results: Vec<_> = phis
                .par_iter()
                .map(|&phi| response(point, *dipole, geom, phi, rm, settings))
                .collect::<Result<_>>()?;
            let (mut best, mut best_phi) = (f64::NEG_INFINITY, 0.0);
            for (phi, r) in phis.iter().zip(&results) {
                diag.warn(r.warnings.iter().cloned());
                if r.gamma_ratio > best {
                    best = r.gamma_ratio;
                    best_phi = *phi;
                }
                rows.push(vec![
                    Cell::Float(*phi),
                    Cell::Float(phi / width),
                    Cell::Text(dipole.label().into()),
                    Cell::Float(r.gamma_ratio),
                    Cell::Float(r.shift_ratio),
                    Cell::Text(method.label().into()),
                ]);
            }
            let shift_max = results.iter().map(|r| r.shift_ratio.abs()).fold(0.0, f64::max);
            summary.push(format!(
                "{} dipole, {}: peak gamma_ratio {best:.4} at phi0 = {best_phi:.4} rad, max |shift_ratio| {shift_max:.4}",
                dipole.label(),
                method.label()
            ));
        }
    }
    Ok(rows)
}

fn point_scan(
    config: &ScenarioConfig,
    diag: &mut Diagnostics,
    summary: &mut Vec<String>,
    points: &[FieldPoint],
    detuning: f64,
    methods: &[ScanMethod],
    coords: impl Fn(&FieldPoint) -> Vec<Cell>,
) -> Result<Vec<Row>> {
    let geom = &config.geometry;
    let base = ray_settings(&config.numerics);
    let mut rows = Vec::new();
    let mut curves: Vec<(ScanMethod, Vec<f64>)> = Vec::new();
    for &method in methods {
        diag.methods.insert(method.label().into());
        let values: Vec<(f64, Option<f64>)> = if method == ScanMethod::Full {
            let solver = FullSolver::new(geom, &config.numerics, points)?;
            let res = solver.enhancements(detuning, points)?;
            res.iter().for_each(|r| diag.full(r));
            res.into_iter().map(|r| (r.value, None)).collect()
        } else {
            let (rm, settings) = method_settings(method, base);
            let res: Vec<_> = points
                .par_iter()
                .map(|p| response(*p, config.dipole, geom, detuning, rm, settings))
                .collect::<Result<_>>()?;
            res.iter().for_each(|r| diag.warn(r.warnings.iter().cloned()));
            res.into_iter().map(|r| (r.gamma_ratio, Some(r.shift_ratio))).collect()
        };
        for (p, (g, s)) in points.iter().zip(&values) {
            let mut row = coords(p);
            row.push(Cell::Float(*g));
            row.push(s.map_or(Cell::Missing, Cell::Float));
            row.push(Cell::Text(method.label().into()));
            rows.push(row);
        }
        let gammas: Vec<f64> = values.iter().map(|v| v.0).collect();
        let max = gammas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        summary.push(format!("{}: max gamma_ratio {max:.4}, first point {:.4}", method.label(), gammas[0]));
        curves.push((method, gammas));
    }
    if let Some((_, full)) = curves.iter().find(|c| c.0 == ScanMethod::Full) {
        if config.dipole != DipoleOrientation::Isotropic && curves.len() > 1 {
            summary.push(format!(
                "full values are the scalar (isotropic) enhancement; ray rows use the {} dipole and are not compared",
                config.dipole.label()
            ));
            return Ok(rows);
        }
        for (m, other) in curves.iter().filter(|c| c.0 != ScanMethod::Full) {
            let dev = max_relative_deviation(full, other);
            summary.push(format!("max |full - {}|/full = {:.2}%", m.label(), 100.0 * dev));
        }
    }
    Ok(rows)
}

/// `max_i |b_i − a_i| / |a_i|`.
pub fn max_relative_deviation(reference: &[f64], other: &[f64]) -> f64 {
    reference.iter().zip(other).map(|(a, b)| ((b - a) / a).abs()).fold(0.0, f64::max)
}

fn compare(
    config: &ScenarioConfig,
    diag: &mut Diagnostics,
    summary: &mut Vec<String>,
    (lo, hi, n): (f64, f64, usize),
    detuning: f64,
) -> Result<Vec<Row>> {
    let geom = &config.geometry;
    let orders = ray_settings(&config.numerics).orders;
    let points: Vec<FieldPoint> = linspace(lo, hi, n).into_iter().map(FieldPoint::on_axis).collect();
    for m in ["full", "ray-corrected", "ray-naive"] {
        diag.methods.insert(m.into());
    }
    let full = FullSolver::new(geom, &config.numerics, &points)?.enhancements(detuning, &points)?;
    full.iter().for_each(|r| diag.full(r));
    let ray = |c: Corrections| -> Result<Vec<f64>> {
        points.par_iter().map(|p| enhancement_ray(geom, *p, detuning, c, orders).map(|r| r.value)).collect()
    };
    let corrected = ray(Corrections::ALL)?;
    let naive = ray(Corrections::NONE)?;
    for p in &points {
        if p.kr() > crate::ray_model::RAY_VALIDITY_KR {
            diag.warn([Warning::RayValidity { kr: p.kr() }]);
        }
    }
    let full: Vec<f64> = full.iter().map(|r| r.value).collect();
    let rows = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let f = full[i];
            vec![
                Cell::Float(p.z),
                Cell::Float(f),
                Cell::Float(corrected[i]),
                Cell::Float(naive[i]),
                Cell::Float((corrected[i] - f) / f),
                Cell::Float((naive[i] - f) / f),
            ]
        })
        .collect();
    summary.push(format!("first point: full {:.4}, ray (corrected) {:.4}, ray (naive) {:.4}", full[0], corrected[0], naive[0]));
    summary.push(format!("max |full - ray (corrected)|/full = {:.2}%", 100.0 * max_relative_deviation(&full, &corrected)));
    summary.push(format!("max |full - ray (naive)|/full = {:.2}%", 100.0 * max_relative_deviation(&full, &naive)));
    Ok(rows)
}

/// Location and height of the maximum of sampled data, refined by a parabola through the top three samples.
pub fn refine_peak(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let i = ys.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|p| p.0).unwrap_or(0);
    if i == 0 || i + 1 >= ys.len() {
        return (xs[i], ys[i]);
    }
    let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom >= 0.0 {
        return (xs[i], ys[i]);
    }
    let h = xs[i + 1] - xs[i];
    let t = 0.5 * (y0 - y2) / denom;
    (xs[i] + t * h, y1 - 0.25 * (y0 - y2) * t)
}

/// Center enhancement against detuning for one geometry, with the given method.
pub fn center_curve(
    geom: &CavityGeometry,
    numerics: &Numerics,
    method: ScanMethod,
    phis: &[f64],
) -> Result<(Vec<f64>, Vec<EnhancementResult>)> {
    let orders = ray_settings(numerics).orders;
    let results: Vec<EnhancementResult> = match method {
        ScanMethod::Full => {
            let solver = FullSolver::new(geom, numerics, &[FieldPoint::ORIGIN])?;
            phis.par_iter()
                .map(|&phi| solver.enhancements(phi, &[FieldPoint::ORIGIN]).map(|mut v| v.remove(0)))
                .collect::<Result<_>>()?
        }
        _ => {
            let corrections =
                if method == ScanMethod::RayNaive { Corrections::NONE } else { ray_settings(numerics).corrections };
            phis.par_iter()
                .map(|&phi| enhancement_ray(geom, FieldPoint::ORIGIN, phi, corrections, orders))
                .collect::<Result<_>>()?
        }
    };
    Ok((results.iter().map(|r| r.value).collect(), results))
}

fn defocus_study(
    config: &ScenarioConfig,
    diag: &mut Diagnostics,
    summary: &mut Vec<String>,
    k_deltas: &[f64],
    (lo, hi, n): (f64, f64, usize),
    methods: &[ScanMethod],
) -> Result<(Vec<Row>, Vec<Row>)> {
    let phis = linspace(lo, hi, n);
    let mut rows = Vec::new();
    let mut peaks = Vec::new();
    for &method in methods {
        diag.methods.insert(method.label().into());
        let mut curves = Vec::with_capacity(k_deltas.len());
        for &kd in k_deltas {
            let geom = config.geometry.with_defocus(kd);
            let (values, res) = center_curve(&geom, &config.numerics, method, &phis)?;
            if method == ScanMethod::Full {
                res.iter().for_each(|r| diag.full(r));
            }
            curves.push((kd, refine_peak(&phis, &values), values));
        }
        let reference = match curves.iter().find(|c| c.0 == 0.0) {
            Some(c) => c.1 .1,
            None => {
                let geom = config.geometry.with_defocus(0.0);
                let (values, _) = center_curve(&geom, &config.numerics, method, &phis)?;
                refine_peak(&phis, &values).1
            }
        };
        for (kd, (phi_peak, peak), values) in curves {
            for (phi, v) in phis.iter().zip(&values) {
                rows.push(vec![Cell::Float(kd), Cell::Float(*phi), Cell::Float(*v), Cell::Text(method.label().into())]);
            }
            let ratio = peak / reference;
            peaks.push(vec![
                Cell::Float(kd),
                Cell::Text(method.label().into()),
                Cell::Float(phi_peak),
                Cell::Float(peak),
                Cell::Float(ratio),
            ]);
            summary.push(format!(
                "{}, k_delta = {kd}: peak {peak:.4} at phi0 = {phi_peak:.4} rad, {ratio:.3} of the focused peak",
                method.label()
            ));
        }
    }
    Ok((rows, peaks))
}

/// The three shift kernels at `phi` for reflectivity product `rho`: `(name, closed form, oracle)`.
pub fn airy_kernels(rho: f64, phi: f64) -> Result<[(&'static str, f64, crate::quadrature::PvEstimate); 3]> {
    let fp = FinesseParam::from_reflectivity(rho);
    let wide = PvOptions { period: 2.0 * PI, ..Default::default() };
    let lor = |x: f64| airy_lorentzian_finesse(x, fp);
    let delta = pv_integrate(|d| airy_lorentzian(phi - d, rho), PvOptions::default())?;
    let cos = pv_integrate(|d| lor(phi - d) * (phi - d).cos(), wide)?;
    let sin = pv_integrate(|d| lor(phi - d) * (phi - d).sin(), wide)?;
    Ok([
        ("delta", pv_shift(phi, rho), delta),
        ("delta_c", pv_shift_cos(phi, fp), cos),
        ("delta_s", pv_shift_sin(phi, fp), sin),
    ])
}

/// Midpoints of `n` equal cells spanning `(−π/2, π/2)`.
pub fn airy_phases(n: usize) -> Vec<f64> {
    (0..n).map(|j| -PI / 2.0 + PI * (j as f64 + 0.5) / n as f64).collect()
}

fn airy_check_rows(rhos: &[f64], phi_steps: usize, summary: &mut Vec<String>) -> Result<Vec<Row>> {
    let phis = airy_phases(phi_steps);
    let jobs: Vec<(f64, f64)> = rhos.iter().flat_map(|&r| phis.iter().map(move |&p| (r, p))).collect();
    let results: Vec<_> = jobs.par_iter().map(|&(r, p)| airy_kernels(r, p)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut worst = 0.0_f64;
    for ((rho, phi), kernels) in jobs.iter().zip(results) {
        for (name, closed, oracle) in kernels {
            let rel = (closed - oracle.value).abs() / oracle.value.abs().max(1e-12);
            worst = worst.max(rel);
            rows.push(vec![
                Cell::Float(*rho),
                Cell::Float(*phi),
                Cell::Text(name.into()),
                Cell::Float(closed),
                Cell::Float(oracle.value),
                Cell::Float(oracle.error),
                Cell::Float(rel),
            ]);
        }
    }
    summary.push(format!("{} kernel evaluations, max relative deviation from the oracle {worst:.2e}", rows.len()));
    Ok(rows)
}

/// Writes every table in each requested format, plus a plot script per main table.
/// Returns the paths written.
pub fn write_outputs(output: &ScenarioOutput, config: &ScenarioConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = &config.outputs.stem;
    let mut written = Vec::new();
    for table in &output.tables {
        let base = format!("{stem}-{}", table.name);
        for format in &config.outputs.formats {
            let path = dir.join(format!("{base}.{}", format.extension()));
            write_table_file(table, *format, &path)?;
            written.push(path);
        }
        if config.outputs.plots {
            if let Some(kind) = plot_kind_for(&table.name) {
                let data = if config.outputs.formats.contains(&TableFormat::Csv) {
                    format!("{base}.csv")
                } else {
                    let path = dir.join(format!("{base}.csv"));
                    write_table_file(table, TableFormat::Csv, &path)?;
                    written.push(path);
                    format!("{base}.csv")
                };
                let script = emit_plot_script(table, kind, &data)?;
                let path = dir.join(format!("{base}.gp"));
                std::fs::write(&path, script).map_err(|e| Error::io(&path, e))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
