use std::process::ExitCode;
use std::time::Instant;

use cavityqed::airy_shift::pv_shift;
use cavityqed::dipole_response::{cap_for_fraction, one_mirror_response, one_mirror_small_angle};
use cavityqed::io_formats::{Numerics, ScanMethod};
use cavityqed::ray_model::{center_enhancement_naive, diffraction_correction};
use cavityqed::scenario::{airy_kernels, airy_phases, center_curve, linspace, max_relative_deviation, refine_peak, FullSolver};
use cavityqed::specfun::bessel_sum_rules;
use cavityqed::validate::frequency_average;
use cavityqed::wave_ops::closed_cavity_mode_sum;
use cavityqed::{
    enhancement_ray, response, CavityGeometry, Corrections, DipoleOrientation, FieldPoint, RayOrders, RaySettings,
    ResponseMethod,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn geometry() -> CavityGeometry {
    CavityGeometry::symmetric(1e5, 0.7f64.acos(), 0.98)
}

fn numerics(l_max: usize) -> Numerics {
    Numerics { l_max, ..Numerics::default() }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    ((value - target) / target).abs() <= rel
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn full_center(l_max: usize) -> Result<f64, String> {
    let solver = FullSolver::new(&geometry(), &numerics(l_max), &[FieldPoint::ORIGIN]).map_err(err)?;
    Ok(solver.enhancements(0.0, &[FieldPoint::ORIGIN]).map_err(err)?[0].value)
}

fn full_axis(kzs: &[f64], l_max: usize) -> Result<Vec<f64>, String> {
    let points: Vec<FieldPoint> = kzs.iter().map(|&z| FieldPoint::on_axis(z)).collect();
    let solver = FullSolver::new(&geometry(), &numerics(l_max), &points).map_err(err)?;
    Ok(solver.enhancements(0.0, &points).map_err(err)?.into_iter().map(|r| r.value).collect())
}

fn ray_axis(kzs: &[f64], c: Corrections) -> Result<Vec<f64>, String> {
    kzs.iter()
        .map(|&z| enhancement_ray(&geometry(), FieldPoint::on_axis(z), 0.0, c, RayOrders::default()).map(|r| r.value))
        .collect::<Result<_, _>>()
        .map_err(err)
}

fn window_means(xs: &[f64], ys: &[f64], lo: f64, hi: f64, width: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi - 1e-9 {
        let b = a + width;
        let sel: Vec<f64> =
            xs.iter().zip(ys).filter(|(x, _)| **x >= a && (**x < b || (b >= hi && **x <= hi))).map(|p| *p.1).collect();
        out.push(sel.iter().sum::<f64>() / sel.len() as f64);
        a = b;
    }
    out
}

fn center_enhancement() -> Outcome {
    let start = Instant::now();
    let full = full_center(150)?;
    let elapsed = start.elapsed().as_secs_f64();
    let g = geometry();
    let naive = center_enhancement_naive(g.theta_m1, g.rho1, 0.0);
    let corrected =
        enhancement_ray(&g, FieldPoint::ORIGIN, 0.0, Corrections::ALL, RayOrders::default()).map_err(err)?.value;
    let diff = diffraction_correction(g.theta_m1, g.k_radius, g.rho1);
    let msg = format!(
        "full {full:.3}, ray corrected {corrected:.3}, naive {naive:.3}, diffraction correction {diff:.3}, {elapsed:.2}s"
    );
    let ok = within(full, 29.2, 0.02)
        && within(corrected, 29.2, 0.02)
        && within(naive, 30.4, 0.02)
        && within(diff, 1.2, 0.10)
        && elapsed < 60.0;
    if ok { Ok(msg) } else { Err(msg) }
}

fn rough_estimate() -> Outcome {
    let g = geometry();
    let full = full_center(150)?;
    let estimate = 4.0 / (1.0 - g.rho1 * g.rho1) * g.coverage();
    let msg = format!("full {full:.3} against 4/T x coverage = {estimate:.3}");
    if within(full, estimate, 0.15) { Ok(msg) } else { Err(msg) }
}

fn off_center_halving() -> Outcome {
    let kzs = linspace(0.0, 100.0, 201);
    let full = full_axis(&kzs, 150)?;
    let plateau = window_means(&kzs, &full, 20.0, 60.0, 40.0)[0];
    let ratio = plateau / full[0];
    let envelope = window_means(&kzs, &full, 30.0, 100.0, 10.0);
    let monotone = envelope.windows(2).all(|w| w[1] <= w[0]);
    let msg = format!(
        "plateau (kz 20-60) / center = {ratio:.3}, 10-wide window means over [30,100]: {}",
        envelope.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(" ")
    );
    if (ratio - 0.5).abs() <= 0.15 && monotone { Ok(msg) } else { Err(msg) }
}

fn ray_vs_full() -> Outcome {
    let kzs = linspace(0.0, 100.0, 101);
    let full = full_axis(&kzs, 150)?;
    let corrected = ray_axis(&kzs, Corrections::ALL)?;
    let naive = ray_axis(&kzs, Corrections::NONE)?;
    let dev = max_relative_deviation(&full, &corrected);
    let naive_dev: Vec<f64> = full.iter().zip(&naive).map(|(f, n)| ((n - f) / f).abs()).collect();
    let trend = window_means(&kzs, &naive_dev, 0.0, 100.0, 25.0);
    let increasing = trend.windows(2).all(|w| w[1] > w[0]);
    let msg = format!(
        "corrected max deviation {:.2}%, naive 25-wide window mean deviations {}",
        100.0 * dev,
        trend.iter().map(|v| format!("{:.1}%", 100.0 * v)).collect::<Vec<_>>().join(" ")
    );
    if dev < 0.05 && increasing { Ok(msg) } else { Err(msg) }
}

fn pv_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut count = 0;
    for &rho in &[0.3, 0.6, 0.9, 0.98] {
        for phi in airy_phases(32) {
            for (_, closed, oracle) in airy_kernels(rho, phi).map_err(err)? {
                worst = worst.max((closed - oracle.value).abs() / oracle.value.abs());
                count += 1;
            }
        }
    }
    let msg = format!("{count} kernel values, max relative deviation {worst:.2e}, {:.2}s", start.elapsed().as_secs_f64());
    if worst < 1e-5 { Ok(msg) } else { Err(msg) }
}

fn sum_rules() -> Outcome {
    let mut bessel = 0.0_f64;
    for i in 0..=40 {
        let kr = 0.25 + 99.75 * i as f64 / 40.0;
        let (total, even, odd) = bessel_sum_rules(kr, kr as usize + 60).map_err(err)?;
        let split = (2.0 * kr).sin() / (4.0 * kr);
        bessel = bessel.max((total - 1.0).abs()).max((even - 0.5 - split).abs()).max((odd - 0.5 + split).abs());
    }
    let g = geometry();
    let (mut ray, mut closed) = (0.0_f64, 0.0_f64);
    for &kz in &[0.0, 10.0, 30.0, 60.0, 100.0] {
        let p = FieldPoint::on_axis(kz);
        let avg = frequency_average(1024, |phi| {
            enhancement_ray(&g, p, phi, Corrections::ALL, RayOrders::default()).map(|r| r.value)
        })
        .map_err(err)?;
        ray = ray.max((avg - 1.0).abs());
        let avg = frequency_average(2048, |phi| closed_cavity_mode_sum(g.rho1, g.k_radius, phi, kz, 180)).map_err(err)?;
        closed = closed.max((avg - 1.0).abs());
    }
    let msg = format!("Bessel {bessel:.1e}, ray frequency average {ray:.1e}, closed-cavity frequency average {closed:.1e}");
    if bessel < 1e-8 && ray < 1e-3 && closed < 1e-3 { Ok(msg) } else { Err(msg) }
}

fn orientation_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let geom = CavityGeometry {
            theta_m2: rng.gen_range(0.3..1.2),
            rho2: rng.gen_range(0.0..0.99),
            ..geometry()
        };
        let p = FieldPoint::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-40.0..40.0));
        let phi = rng.gen_range(-0.5..0.5);
        let r = |d| response(p, d, &geom, phi, ResponseMethod::RayAsymmetric, RaySettings::default()).map_err(err);
        let (par, perp, iso) =
            (r(DipoleOrientation::Parallel)?, r(DipoleOrientation::Perpendicular)?, r(DipoleOrientation::Isotropic)?);
        worst = worst
            .max(((par.gamma_ratio + 2.0 * perp.gamma_ratio) / 3.0 - iso.gamma_ratio).abs())
            .max(((par.shift_ratio + 2.0 * perp.shift_ratio) / 3.0 - iso.shift_ratio).abs());
    }
    let mut center = 0.0_f64;
    for d in [DipoleOrientation::Parallel, DipoleOrientation::Perpendicular, DipoleOrientation::Isotropic] {
        for m in [ResponseMethod::RaySymmetric, ResponseMethod::RayAsymmetric] {
            let s = response(FieldPoint::ORIGIN, d, &geometry(), 0.0, m, RaySettings::default()).map_err(err)?;
            center = center.max(s.shift_ratio.abs());
        }
    }
    let msg = format!("orientation sum max deviation {worst:.1e} over 20 samples, center shift on resonance {center:e}");
    if worst < 1e-8 && center == 0.0 && pv_shift(0.0, 0.98) == 0.0 { Ok(msg) } else { Err(msg) }
}

fn defocus() -> Outcome {
    let phis = linspace(-0.3, 0.1, 81);
    let mut parts = Vec::new();
    let mut ok = true;
    for method in [ScanMethod::Full, ScanMethod::RayAsymmetric] {
        let (focused, _) = center_curve(&geometry(), &numerics(150), method, &phis).map_err(err)?;
        let (shifted, _) = center_curve(&geometry().with_defocus(0.3), &numerics(150), method, &phis).map_err(err)?;
        let (_, p0) = refine_peak(&phis, &focused);
        let (phi1, p1) = refine_peak(&phis, &shifted);
        let ratio = p1 / p0;
        ok &= phi1.abs() > 0.02 && (ratio - 0.5).abs() <= 0.15;
        parts.push(format!("{}: peak moves to phi0 = {phi1:.3}, re-centered peak ratio {ratio:.3}", method.label()));
    }
    let msg = parts.join("; ");
    if ok { Ok(msg) } else { Err(msg) }
}

fn truncation() -> Outcome {
    let a = full_center(100)?;
    let b = full_center(300)?;
    let change = ((b - a) / b).abs();
    let msg = format!("l_max 100: {a:.4}, l_max 300: {b:.4}, change {:.2}%", 100.0 * change);
    if change < 0.01 { Ok(msg) } else { Err(msg) }
}

fn small_angle() -> Outcome {
    let rho = 0.98;
    let dipole = DipoleOrientation::Vector([1.0, 0.0, 0.0]);
    let orders = RayOrders { polar: 96, azimuthal: 32 };
    let residual = |eps: f64| -> Result<f64, String> {
        let mut worst = 0.0_f64;
        for i in 0..=20 {
            let kz = 0.5 * i as f64;
            for &phase in &[0.0, 0.4] {
                let exact = one_mirror_response(FieldPoint::on_axis(kz), dipole, rho, cap_for_fraction(eps), phase, orders)
                    .map_err(err)?;
                let (g, d) = one_mirror_small_angle(kz, rho, eps, phase);
                worst = worst.max((exact.gamma_ratio - g).abs()).max((exact.shift_ratio - d).abs());
            }
        }
        Ok(worst)
    };
    let (r1, r2) = (residual(0.01)?, residual(0.005)?);
    let order = r1 / r2;
    let linear = |d: DipoleOrientation| -> Result<f64, String> {
        let slope = |eps: f64| -> Result<f64, String> {
            let r = one_mirror_response(FieldPoint::ORIGIN, d, rho, cap_for_fraction(eps), 0.0, orders).map_err(err)?;
            Ok((r.gamma_ratio - 1.0) / eps)
        };
        Ok(2.0 * slope(0.005)? - slope(0.01)?)
    };
    let factor = linear(dipole)? / linear(DipoleOrientation::Isotropic)?;
    let msg = format!(
        "residual {r1:.2e} at eps=0.01, {r2:.2e} at eps=0.005 (ratio {order:.2}), ratio of the eps-linear damping coefficients, vector to scalar, {factor:.5}"
    );
    if (3.0..=5.0).contains(&order) && (factor - 1.5).abs() < 1e-3 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("center-enhancement", center_enhancement),
        ("rough-estimate", rough_estimate),
        ("off-center-halving", off_center_halving),
        ("ray-vs-full", ray_vs_full),
        ("pv-oracle", pv_oracle),
        ("sum-rules", sum_rules),
        ("orientation-identities", orientation_identities),
        ("defocus", defocus),
        ("truncation", truncation),
        ("small-angle", small_angle),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let t = start.elapsed().as_secs_f64();
        match result.map(|m| format!("{m} [{t:.1}s]")).map_err(|m| format!("{m} [{t:.1}s]")) {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}

