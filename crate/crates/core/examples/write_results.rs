//! Runs a scenario from JSON text and writes its CSV/JSON tables and gnuplot
//! scripts into a directory (first argument, default `./results`).

use cavityqed::scenario::write_outputs;
use cavityqed::{parse_config, run_scenario};

const CONFIG: &str = r#"{
  "name": "short-profile",
  "geometry": { "kR": 1e5, "theta_m1": 0.7953988301841436, "theta_m2": 0.7953988301841436, "rho1": 0.98, "rho2": 0.98 },
  "dipole": "perpendicular",
  "scan": { "kind": "axial-profile", "kz_min": 0, "kz_max": 30, "steps": 31, "methods": ["full", "ray-asymmetric"] },
  "numerics": { "l_max": 120 },
  "outputs": { "stem": "short", "formats": ["csv", "json"] }
}"#;

fn main() -> cavityqed::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "results".into());
    let config = parse_config(CONFIG)?;
    let output = run_scenario(&config)?;
    for line in &output.summary {
        println!("{line}");
    }
    for path in write_outputs(&output, &config, dir.as_ref())? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
