//! Bundled scenario configs for the standard studies of the 30%-coverage,
//! `kR = 10⁵`, `ρ = 0.98` resonator.

use crate::error::{Error, Result};
use crate::io_formats::{parse_config, ScenarioConfig};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub source: &'static str,
}

static PRESETS: [Preset; 6] = [
    Preset {
        name: "center-enhancement",
        description: "resonant enhancement at the center: full calculation, corrected ray and naive ray",
        source: include_str!("../presets/center-enhancement.json"),
    },
    Preset {
        name: "detuning-sweep",
        description: "damping and level shift at the center against detuning, parallel and perpendicular dipoles",
        source: include_str!("../presets/detuning-sweep.json"),
    },
    Preset {
        name: "axial-profile",
        description: "damping and level shift along the axis for kz in [0, 100]",
        source: include_str!("../presets/axial-profile.json"),
    },
    Preset {
        name: "ray-vs-full",
        description: "on-axis enhancement from the full calculation against corrected and naive ray models",
        source: include_str!("../presets/ray-vs-full.json"),
    },
    Preset {
        name: "defocus-study",
        description: "center resonance with the first mirror displaced by k*delta = 0.3",
        source: include_str!("../presets/defocus-study.json"),
    },
    Preset {
        name: "airy-check",
        description: "closed-form shift kernels against principal-value quadrature, 4 reflectivities x 32 phases",
        source: include_str!("../presets/airy-check.json"),
    },
];

pub fn presets() -> &'static [Preset] {
    &PRESETS
}

/// Parsed config of the preset called `name`.
pub fn preset_config(name: &str) -> Result<ScenarioConfig> {
    let preset = PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Unknown { kind: "preset", name: name.into() })?;
    parse_config(preset.source)
}
