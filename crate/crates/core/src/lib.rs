//! Vacuum fluctuations, spontaneous-emission rates and radiative level shifts
//! of an atom near the center of a concentric spherical resonator whose two
//! mirror caps cover a large fraction of the solid angle.
//!
//! * [`wave_ops`]: the full calculation in a truncated spherical-harmonic basis.
//! * [`ray_model`]: the ray-optics approximation with aberration and diffraction corrections.
//! * [`dipole_response`]: damping rate and level shift for a given dipole orientation.
//! * [`scenario`] and [`io_formats`]: configurable scans and their result tables.
//!
//! ```
//! use cavityqed::{CavityGeometry, Corrections, FieldPoint, RayOrders};
//! let geom = CavityGeometry::symmetric(1e5, 0.7f64.acos(), 0.98);
//! let naive = cavityqed::ray_model::enhancement_ray(&geom, FieldPoint::ORIGIN, 0.0, Corrections::NONE, RayOrders::default())
//!     .unwrap();
//! assert!((naive.value - 30.4).abs() < 1e-6);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy_shift;
pub mod cli;
pub mod dipole_response;
pub mod error;
pub mod io_formats;
pub mod presets;
pub mod quadrature;
pub mod ray_model;
pub mod scenario;
pub mod specfun;
pub mod validate;
pub mod wave_ops;

pub use dipole_response::{response, DipoleOrientation, RaySettings, ResponseMethod, ResponseResult};
pub use error::{Error, Result, Warning};
pub use io_formats::{parse_config, ResultTable, ScenarioConfig};
pub use ray_model::{enhancement_ray, Corrections, RayOrders};
pub use scenario::{run_scenario, ScenarioOutput};
pub use specfun::{FieldPoint, HarmonicBasis};
pub use wave_ops::{enhancement_full, CavityGeometry, EnhancementResult};
