//! Command-line front end of the `cavityqed` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::io_formats::{parse_config, Numerics, Outputs, ScanSpec, ScenarioConfig};
use crate::presets::{preset_config, presets};
use crate::ray_model::diffraction_correction;
use crate::scenario::{run_scenario, write_outputs};
use crate::validate::{reference_geometry, run_checks};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_STRICT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "cavityqed", version, about = "Damping rates, level shifts and vacuum-fluctuation enhancement in a concentric spherical cavity")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, short = 'j', env = "CAVITYQED_JOBS", global = true)]
    jobs: Option<usize>,
    /// Print the paths of written files.
    #[arg(long, short = 'v', action = ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario config and write its tables and plot scripts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Treat validity warnings as failures.
        #[arg(long)]
        strict: bool,
    },
    /// Run one of the bundled presets.
    Reproduce {
        preset: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Run the invariant suite.
    Validate {
        /// Only run checks whose name contains this text.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Compare the closed-form shift kernels with the quadrature oracle.
    AiryCheck {
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 32)]
        phi_steps: usize,
        /// Also write the comparison table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the bundled presets.
    Presets,
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::Unknown { .. } | Error::Geometry(_) => EXIT_CONFIG,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_CONFIG
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let pool = match cli.jobs {
        Some(0) => {
            let _ = writeln!(err, "error: --jobs must be at least 1");
            return EXIT_CONFIG;
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_FAILURE;
        }
    };
    let verbose = cli.verbose > 0;
    pool.install(|| match dispatch(cli.command, verbose, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    })
}

fn dispatch(command: Command, verbose: bool, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    match command {
        Command::Run { config, out: dir, strict } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::io(&config, e))?;
            let cfg = parse_config(&text)?;
            execute(&cfg, &dir, strict, verbose, out, err)
        }
        Command::Reproduce { preset, out: dir, strict } => {
            let cfg = preset_config(&preset)?;
            execute(&cfg, &dir, strict, verbose, out, err)
        }
        Command::Validate { filter } => {
            let outcomes = run_checks(filter.as_deref());
            if outcomes.is_empty() {
                return Err(Error::Unknown { kind: "check", name: filter.unwrap_or_default() });
            }
            let mut failed = 0;
            for o in &outcomes {
                let tag = if o.passed { "PASS" } else { "FAIL" };
                failed += usize::from(!o.passed);
                let _ = writeln!(out, "{tag} {:<26} {}", o.name, o.detail);
            }
            let _ = writeln!(out, "{} of {} checks passed", outcomes.len() - failed, outcomes.len());
            Ok(if failed == 0 { EXIT_OK } else { EXIT_NUMERICAL })
        }
        Command::AiryCheck { rho, phi_steps, out: dir } => {
            let cfg = ScenarioConfig {
                name: "airy-check".into(),
                geometry: reference_geometry(),
                dipole: crate::dipole_response::DipoleOrientation::Isotropic,
                scan: ScanSpec::AiryCheck { rhos: vec![rho], phi_steps },
                numerics: Numerics::default(),
                outputs: Outputs { stem: "airy".into(), ..Outputs::default() },
            };
            match dir {
                Some(dir) => execute(&cfg, &dir, false, verbose, out, err),
                None => {
                    let output = run_scenario(&cfg)?;
                    for line in &output.summary {
                        let _ = writeln!(out, "{line}");
                    }
                    Ok(EXIT_OK)
                }
            }
        }
        Command::Presets => {
            for p in presets() {
                let _ = writeln!(out, "{:<20} {}", p.name, p.description);
            }
            Ok(EXIT_OK)
        }
    }
}

fn execute(
    cfg: &ScenarioConfig,
    dir: &Path,
    strict: bool,
    verbose: bool,
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
) -> Result<i32> {
    let output = run_scenario(cfg)?;
    let written = write_outputs(&output, cfg, dir)?;
    if !cfg.name.is_empty() {
        let _ = writeln!(out, "scenario {}", cfg.name);
    }
    for line in &output.summary {
        let _ = writeln!(out, "  {line}");
    }
    if cfg.name == "center-enhancement" {
        let g = &cfg.geometry;
        let d = diffraction_correction(g.theta_m1, g.k_radius, g.rho1);
        let _ = writeln!(out, "  diffraction correction (first order): {d:.3}");
    }
    if verbose {
        for p in &written {
            let _ = writeln!(out, "wrote {}", p.display());
        }
    } else {
        let _ = writeln!(out, "wrote {} files to {}", written.len(), dir.display());
    }
    for w in &output.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    if strict && !output.warnings.is_empty() {
        let _ = writeln!(err, "error: {} warning(s) in strict mode", output.warnings.len());
        return Ok(EXIT_STRICT);
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let mut full = vec!["cavityqed"];
        full.extend_from_slice(args);
        let code = run_cli(full, &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn presets_listed() {
        let (code, out, _) = call(&["presets"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 6);
    }

    #[test]
    fn bad_usage_and_unknown_preset() {
        assert_eq!(call(&["frobnicate"]).0, EXIT_CONFIG);
        let (code, _, err) = call(&["reproduce", "nope", "--out", "/tmp/x"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("unknown preset"));
        assert_eq!(call(&["--jobs", "0", "presets"]).0, EXIT_CONFIG);
    }

    #[test]
    fn validate_filter() {
        let (code, out, _) = call(&["validate", "--filter", "bessel"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.starts_with("PASS bessel-sum-rules"));
        assert_eq!(call(&["validate", "--filter", "zzz"]).0, EXIT_CONFIG);
    }
}
