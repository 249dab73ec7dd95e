//! Enhancement along the cavity axis: full calculation against the ray models.

use cavityqed::scenario::{linspace, FullSolver};
use cavityqed::io_formats::Numerics;
use cavityqed::{enhancement_ray, CavityGeometry, Corrections, FieldPoint, RayOrders};

fn main() -> cavityqed::Result<()> {
    let geom = CavityGeometry::symmetric(1e5, 0.7f64.acos(), 0.98);
    let points: Vec<FieldPoint> = linspace(0.0, 100.0, 21).into_iter().map(FieldPoint::on_axis).collect();

    let solver = FullSolver::new(&geom, &Numerics::default(), &points)?;
    let full = solver.enhancements(0.0, &points)?;

    println!("{:>6} {:>9} {:>9} {:>9}", "kz", "full", "ray", "naive");
    for (p, f) in points.iter().zip(&full) {
        let ray = enhancement_ray(&geom, *p, 0.0, Corrections::ALL, RayOrders::default())?.value;
        let naive = enhancement_ray(&geom, *p, 0.0, Corrections::NONE, RayOrders::default())?.value;
        println!("{:>6.1} {:>9.3} {:>9.3} {:>9.3}", p.z, f.value, ray, naive);
    }
    Ok(())
}
