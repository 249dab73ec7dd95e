//! Scenario configuration, result tables and plot scripts.
//!
//! Configs are JSON documents:
//!
//! ```json
//! {
//!   "name": "center",
//!   "geometry": { "kR": 1e5, "theta_m1": 0.7954, "theta_m2": 0.7954, "rho1": 0.98, "rho2": 0.98 },
//!   "dipole": "isotropic",
//!   "scan": { "kind": "axial-profile", "kz_min": 0, "kz_max": 100, "steps": 101 },
//!   "numerics": { "l_max": 150 },
//!   "outputs": { "stem": "profile", "formats": ["csv", "json"] }
//! }
//! ```
//!
//! Result tables carry unit-annotated columns and a provenance block. CSV files
//! hold the data only (header `name [unit]`); the JSON form adds the schema and
//! provenance and round-trips every value bit-exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dipole_response::DipoleOrientation;
use crate::error::{ConfigViolation, Error, Result};
use crate::specfun::FieldPoint;
use crate::wave_ops::CavityGeometry;

pub const TABLE_SCHEMA: &str = "cavityqed.result-table/1";

/// Method used for an enhancement or response column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMethod {
    Full,
    RaySymmetric,
    RayAsymmetric,
    RayNaive,
}

impl ScanMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ScanMethod::Full => "full",
            ScanMethod::RaySymmetric => "ray-symmetric",
            ScanMethod::RayAsymmetric => "ray-asymmetric",
            ScanMethod::RayNaive => "ray-naive",
        }
    }
}

fn default_point() -> FieldPoint {
    FieldPoint::ORIGIN
}

fn default_ray_methods() -> Vec<ScanMethod> {
    vec![ScanMethod::RayAsymmetric]
}

fn default_profile_methods() -> Vec<ScanMethod> {
    vec![ScanMethod::Full, ScanMethod::RayAsymmetric]
}

/// What to compute. Each kind produces one or more result tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScanSpec {
    /// Γ and Δ′ against the detuning phase `φ₀` at one point.
    DetuningSweep {
        phi_min: f64,
        phi_max: f64,
        steps: usize,
        #[serde(default = "default_point")]
        point: FieldPoint,
        /// Dipoles to sweep; the config's `dipole` when empty.
        #[serde(default)]
        dipoles: Vec<DipoleOrientation>,
        #[serde(default = "default_ray_methods")]
        methods: Vec<ScanMethod>,
    },
    /// Γ and Δ′ along the cavity axis. The full method yields the scalar enhancement only.
    AxialProfile {
        kz_min: f64,
        kz_max: f64,
        steps: usize,
        #[serde(default)]
        detuning: f64,
        #[serde(default = "default_profile_methods")]
        methods: Vec<ScanMethod>,
    },
    /// Γ and Δ′ on a grid in the `(x, z)` plane.
    RadialMap {
        kx_max: f64,
        kz_max: f64,
        nx: usize,
        nz: usize,
        #[serde(default)]
        detuning: f64,
        #[serde(default = "default_ray_methods")]
        methods: Vec<ScanMethod>,
    },
    /// Scalar enhancement on axis: full calculation against the corrected and naive ray models.
    Compare {
        kz_min: f64,
        kz_max: f64,
        steps: usize,
        #[serde(default)]
        detuning: f64,
    },
    /// Center enhancement against detuning for several mirror displacements.
    DefocusStudy {
        k_deltas: Vec<f64>,
        phi_min: f64,
        phi_max: f64,
        steps: usize,
        #[serde(default = "default_profile_methods")]
        methods: Vec<ScanMethod>,
    },
    /// Closed-form shift kernels against the principal-value quadrature.
    AiryCheck { rhos: Vec<f64>, phi_steps: usize },
}

impl ScanSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ScanSpec::DetuningSweep { .. } => "detuning-sweep",
            ScanSpec::AxialProfile { .. } => "axial-profile",
            ScanSpec::RadialMap { .. } => "radial-map",
            ScanSpec::Compare { .. } => "compare",
            ScanSpec::DefocusStudy { .. } => "defocus-study",
            ScanSpec::AiryCheck { .. } => "airy-check",
        }
    }
}

fn default_l_max() -> usize {
    150
}
fn default_order_polar() -> usize {
    64
}
fn default_order_azimuthal() -> usize {
    32
}
fn default_tail() -> f64 {
    crate::specfun::DEFAULT_TAIL_TOLERANCE
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default = "default_order_polar")]
    pub order_polar: usize,
    #[serde(default = "default_order_azimuthal")]
    pub order_azimuthal: usize,
    #[serde(default = "default_tail")]
    pub tail_tolerance: f64,
    #[serde(default = "default_true")]
    pub aberration: bool,
    #[serde(default = "default_true")]
    pub diffraction: bool,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            l_max: default_l_max(),
            order_polar: default_order_polar(),
            order_azimuthal: default_order_azimuthal(),
            tail_tolerance: default_tail(),
            aberration: true,
            diffraction: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Json,
}

impl TableFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
        }
    }
}

fn default_stem() -> String {
    "results".into()
}
fn default_formats() -> Vec<TableFormat> {
    vec![TableFormat::Csv, TableFormat::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_stem")]
    pub stem: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<TableFormat>,
    #[serde(default = "default_true")]
    pub plots: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { stem: default_stem(), formats: default_formats(), plots: true }
    }
}

fn default_dipole() -> DipoleOrientation {
    DipoleOrientation::Isotropic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub geometry: CavityGeometry,
    #[serde(default = "default_dipole")]
    pub dipole: DipoleOrientation,
    pub scan: ScanSpec,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ScenarioConfig {
    /// Every violated constraint.
    pub fn violations(&self) -> Vec<ConfigViolation> {
        let mut out = self.geometry.violations();
        let mut push = |field: &str, constraint: &str| {
            out.push(ConfigViolation { field: field.into(), constraint: constraint.into() })
        };
        if self.dipole.validate().is_err() {
            push("dipole", "vector must have unit length");
        }
        let range = |push: &mut dyn FnMut(&str, &str), name: &str, lo: f64, hi: f64| {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                push(name, "range must be finite and non-empty (max > min)");
            }
        };
        let steps = |push: &mut dyn FnMut(&str, &str), name: &str, n: usize| {
            if n < 2 {
                push(name, "step count must be >= 2");
            }
        };
        let methods_nonempty = |push: &mut dyn FnMut(&str, &str), m: &[ScanMethod]| {
            if m.is_empty() {
                push("scan.methods", "at least one method required");
            }
        };
        match &self.scan {
            ScanSpec::DetuningSweep { phi_min, phi_max, steps: n, point, dipoles, methods } => {
                range(&mut push, "scan.phi_min/phi_max", *phi_min, *phi_max);
                steps(&mut push, "scan.steps", *n);
                methods_nonempty(&mut push, methods);
                if methods.contains(&ScanMethod::Full) {
                    push("scan.methods", "full method has no dipole response; use compare or axial-profile");
                }
                if !point.is_finite() {
                    push("scan.point", "must be finite");
                }
                if dipoles.iter().any(|d| d.validate().is_err()) {
                    push("scan.dipoles", "vector must have unit length");
                }
            }
            ScanSpec::AxialProfile { kz_min, kz_max, steps: n, detuning, methods } => {
                range(&mut push, "scan.kz_min/kz_max", *kz_min, *kz_max);
                steps(&mut push, "scan.steps", *n);
                methods_nonempty(&mut push, methods);
                if !detuning.is_finite() {
                    push("scan.detuning", "must be finite");
                }
            }
            ScanSpec::RadialMap { kx_max, kz_max, nx, nz, detuning, methods } => {
                if !(*kx_max > 0.0 && kx_max.is_finite()) {
                    push("scan.kx_max", "must be finite and > 0");
                }
                if !(*kz_max > 0.0 && kz_max.is_finite()) {
                    push("scan.kz_max", "must be finite and > 0");
                }
                steps(&mut push, "scan.nx", *nx);
                steps(&mut push, "scan.nz", *nz);
                methods_nonempty(&mut push, methods);
                if !detuning.is_finite() {
                    push("scan.detuning", "must be finite");
                }
            }
            ScanSpec::Compare { kz_min, kz_max, steps: n, detuning } => {
                range(&mut push, "scan.kz_min/kz_max", *kz_min, *kz_max);
                steps(&mut push, "scan.steps", *n);
                if !detuning.is_finite() {
                    push("scan.detuning", "must be finite");
                }
            }
            ScanSpec::DefocusStudy { k_deltas, phi_min, phi_max, steps: n, methods } => {
                if k_deltas.is_empty() || k_deltas.iter().any(|d| !d.is_finite()) {
                    push("scan.k_deltas", "need at least one finite displacement");
                }
                range(&mut push, "scan.phi_min/phi_max", *phi_min, *phi_max);
                steps(&mut push, "scan.steps", *n);
                methods_nonempty(&mut push, methods);
                if methods.contains(&ScanMethod::RaySymmetric) {
                    push("scan.methods", "a displaced mirror breaks the symmetry; use ray-asymmetric");
                }
            }
            ScanSpec::AiryCheck { rhos, phi_steps } => {
                if rhos.is_empty() || rhos.iter().any(|r| !(0.0..1.0).contains(r)) {
                    push("scan.rhos", "reflectivities must lie in [0,1)");
                }
                steps(&mut push, "scan.phi_steps", *phi_steps);
            }
        }
        let n = &self.numerics;
        if n.l_max < 1 || n.l_max > 1000 {
            push("numerics.l_max", "must lie in [1, 1000]");
        }
        if n.order_polar < 2 {
            push("numerics.order_polar", "must be >= 2");
        }
        if n.order_azimuthal < 1 {
            push("numerics.order_azimuthal", "must be >= 1");
        }
        if !(n.tail_tolerance > 0.0) {
            push("numerics.tail_tolerance", "must be > 0");
        }
        if self.outputs.formats.is_empty() {
            push("outputs.formats", "at least one format required");
        }
        let stem = &self.outputs.stem;
        if stem.is_empty() || stem.contains(['/', '\\']) || stem.starts_with('.') {
            push("outputs.stem", "must be a plain file name");
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// SHA-256 of the compact JSON serialization.
    pub fn hash(&self) -> Result<String> {
        let text = serde_json::to_string(self).map_err(|e| Error::Serialize(e.to_string()))?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }
}

/// Parses and validates a config, reporting all violations at once.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = serde_json::from_str(text)
        .map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Float,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    #[serde(rename = "type")]
    pub kind: ColumnType,
}

impl Column {
    pub fn float(name: &str, unit: &str) -> Self {
        Self { name: name.into(), unit: unit.into(), kind: ColumnType::Float }
    }

    pub fn text(name: &str) -> Self {
        Self { name: name.into(), unit: String::new(), kind: ColumnType::Text }
    }

    pub fn header(&self) -> String {
        if self.unit.is_empty() {
            self.name.clone()
        } else {
            format!("{} [{}]", self.name, self.unit)
        }
    }
}

/// One table cell. `Missing` marks a quantity a method does not provide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Float(f64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: String,
    pub methods: Vec<String>,
    pub accuracy: BTreeMap<String, f64>,
    /// The scenario that produced the table, sufficient to re-run it.
    pub config: Option<ScenarioConfig>,
}

impl Provenance {
    pub fn for_config(config: &ScenarioConfig) -> Result<Self> {
        Ok(Self {
            config_hash: config.hash()?,
            code_version: env!("CARGO_PKG_VERSION").into(),
            methods: Vec::new(),
            accuracy: BTreeMap::new(),
            config: Some(config.clone()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub schema: String,
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: Provenance,
}

impl ResultTable {
    pub fn new(name: &str, columns: Vec<Column>, provenance: Provenance) -> Self {
        Self { schema: TABLE_SCHEMA.into(), name: name.into(), columns, rows: Vec::new(), provenance }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Columns(format!(
                "row has {} cells, table '{}' has {} columns",
                row.len(),
                self.name,
                self.columns.len()
            )));
        }
        for (cell, col) in row.iter().zip(&self.columns) {
            let ok = matches!(
                (cell, col.kind),
                (Cell::Float(_), ColumnType::Float) | (Cell::Text(_), ColumnType::Text) | (Cell::Missing, _)
            );
            if !ok {
                return Err(Error::Columns(format!("cell type does not match column '{}'", col.name)));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Float values of one column (missing cells skipped).
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column_index(name) else { return Vec::new() };
        self.rows
            .iter()
            .filter_map(|r| match &r[i] {
                Cell::Float(v) => Some(*v),
                _ => None,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for row in &self.rows {
            if row.len() != self.columns.len() {
                return Err(Error::Columns(format!("ragged row in table '{}'", self.name)));
            }
        }
        Ok(())
    }
}

/// Shortest exactly round-tripping scientific form, 17 significant digits.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// Serializes a table to `out`.
pub fn write_table<W: Write>(table: &ResultTable, format: TableFormat, out: W) -> Result<()> {
    table.validate()?;
    match format {
        TableFormat::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
            let map_err = |e: csv::Error| Error::Serialize(e.to_string());
            w.write_record(table.columns.iter().map(Column::header)).map_err(map_err)?;
            for row in &table.rows {
                let record: Vec<String> = row
                    .iter()
                    .map(|c| match c {
                        Cell::Float(v) => format_float(*v),
                        Cell::Text(s) => s.clone(),
                        Cell::Missing => String::new(),
                    })
                    .collect();
                w.write_record(&record).map_err(map_err)?;
            }
            w.flush().map_err(|e| Error::Serialize(e.to_string()))?;
        }
        TableFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, table).map_err(|e| Error::Serialize(e.to_string()))?;
            out.write_all(b"\n").map_err(|e| Error::Serialize(e.to_string()))?;
        }
    }
    Ok(())
}

/// Writes a table to `path`, reporting I/O errors with the path.
pub fn write_table_file(table: &ResultTable, format: TableFormat, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = std::io::BufWriter::new(file);
    write_table(table, format, &mut buf)?;
    buf.flush().map_err(|e| Error::io(path, e))
}

/// Reads a JSON table written by [`write_table`].
pub fn read_table_json(text: &str) -> Result<ResultTable> {
    let t: ResultTable = serde_json::from_str(text)
        .map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
    if t.schema != TABLE_SCHEMA {
        return Err(Error::Serialize(format!("unsupported table schema '{}'", t.schema)));
    }
    t.validate()?;
    Ok(t)
}

/// Reads a CSV table: returns the header and the rows as strings.
pub fn read_table_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Serialize(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Serialize(e.to_string()))?;
        rows.push(rec.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

/// Plot layouts understood by [`emit_plot_script`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Γ (left) and Δ′ (right) against the detuning.
    Detuning,
    /// Γ against `kz`, one curve per method.
    Profile,
    /// Full calculation overlaid with the corrected and naive ray models.
    Compare,
    /// Center enhancement against detuning for each displacement.
    Defocus,
    /// Closed-form kernels and their quadrature oracle.
    Airy,
    /// Γ over the `(x, z)` plane.
    Map,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "detuning" => PlotKind::Detuning,
            "profile" => PlotKind::Profile,
            "compare" => PlotKind::Compare,
            "defocus" => PlotKind::Defocus,
            "airy" => PlotKind::Airy,
            "map" => PlotKind::Map,
            other => return Err(Error::Unknown { kind: "plot kind", name: other.into() }),
        })
    }
}

impl PlotKind {
    fn required(&self) -> &'static [&'static str] {
        match self {
            PlotKind::Detuning => &["detuning", "gamma_ratio", "shift_ratio", "dipole", "method"],
            PlotKind::Profile => &["kz", "gamma_ratio", "shift_ratio", "method"],
            PlotKind::Compare => &["kz", "full", "ray_corrected", "ray_naive"],
            PlotKind::Defocus => &["k_delta", "phi0", "enhancement", "method"],
            PlotKind::Airy => &["rho", "phi", "kernel", "closed_form", "oracle"],
            PlotKind::Map => &["kx", "kz", "gamma_ratio", "method"],
        }
    }
}

fn distinct_text(table: &ResultTable, col: usize) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for row in &table.rows {
        if let Cell::Text(s) = &row[col] {
            if !out.contains(s) {
                out.push(s.clone());
            }
        }
    }
    out
}

fn gp_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// A gnuplot script plotting the CSV file `data_file`. Data is referenced, never embedded.
pub fn emit_plot_script(table: &ResultTable, kind: PlotKind, data_file: &str) -> Result<String> {
    let mut idx = BTreeMap::new();
    for name in kind.required() {
        let i = table
            .column_index(name)
            .ok_or_else(|| Error::Columns(format!("plot needs column '{name}', table '{}' lacks it", table.name)))?;
        idx.insert(*name, i + 1);
    }
    let data = gp_escape(data_file);
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script for table '{}'", gp_escape(&table.name));
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set grid");
    let _ = writeln!(s, "data = \"{data}\"");
    let select = |col: usize, label: &str, value: usize| {
        format!("(strcol({col}) eq \"{}\" ? ${value} : NaN)", gp_escape(label))
    };
    match kind {
        PlotKind::Detuning => {
            let dip = distinct_text(table, idx["dipole"] - 1);
            let met = distinct_text(table, idx["method"] - 1);
            let _ = writeln!(s, "set multiplot layout 1,2");
            for (panel, col, label) in [(0, "gamma_ratio", "Gamma/Gamma_vac"), (1, "shift_ratio", "Delta'/Gamma_vac")] {
                let _ = writeln!(s, "set xlabel 'detuning [linewidths]'");
                let _ = writeln!(s, "set ylabel '{label}'");
                let mut curves = Vec::new();
                for d in &dip {
                    for m in &met {
                        let y = select(idx["dipole"], d, idx[col]);
                        let y = y.replace(" : NaN)", &format!(" : NaN) * (strcol({}) eq \"{}\" ? 1 : NaN)", idx["method"], gp_escape(m)));
                        curves.push(format!("data using {}:{} with lines title \"{} {}\"", idx["detuning"], y, gp_escape(d), gp_escape(m)));
                    }
                }
                let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
                let _ = panel;
            }
            let _ = writeln!(s, "unset multiplot");
        }
        PlotKind::Profile => {
            let met = distinct_text(table, idx["method"] - 1);
            let _ = writeln!(s, "set xlabel 'kz'");
            let _ = writeln!(s, "set ylabel 'Gamma/Gamma_vac'");
            let curves: Vec<String> = met
                .iter()
                .map(|m| format!("data using {}:{} with lines title \"{}\"", idx["kz"], select(idx["method"], m, idx["gamma_ratio"]), gp_escape(m)))
                .collect();
            let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
        }
        PlotKind::Compare => {
            let _ = writeln!(s, "set xlabel 'kz'");
            let _ = writeln!(s, "set ylabel 'enhancement'");
            let _ = writeln!(
                s,
                "plot data using {k}:{f} with lines title 'full', \\\n     data using {k}:{c} with lines title 'ray (corrected)', \\\n     data using {k}:{n} with lines dashtype 2 title 'ray (naive)'",
                k = idx["kz"],
                f = idx["full"],
                c = idx["ray_corrected"],
                n = idx["ray_naive"]
            );
        }
        PlotKind::Defocus => {
            let _ = writeln!(s, "set xlabel 'phi0 [rad]'");
            let _ = writeln!(s, "set ylabel 'center enhancement'");
            let met = distinct_text(table, idx["method"] - 1);
            let deltas = {
                let mut v: Vec<f64> = Vec::new();
                for row in &table.rows {
                    if let Cell::Float(d) = row[idx["k_delta"] - 1] {
                        if !v.contains(&d) {
                            v.push(d);
                        }
                    }
                }
                v
            };
            let mut curves = Vec::new();
            for m in &met {
                for d in &deltas {
                    curves.push(format!(
                        "data using {p}:((strcol({mc}) eq \"{m}\" && ${dc} == {d:e}) ? ${e} : NaN) with lines title \"{m} kdelta={d}\"",
                        p = idx["phi0"],
                        mc = idx["method"],
                        m = gp_escape(m),
                        dc = idx["k_delta"],
                        e = idx["enhancement"],
                    ));
                }
            }
            let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
        }
        PlotKind::Airy => {
            let _ = writeln!(s, "set xlabel 'phi [rad]'");
            let _ = writeln!(s, "set ylabel 'kernel'");
            let kernels = distinct_text(table, idx["kernel"] - 1);
            let mut curves = Vec::new();
            for k in &kernels {
                curves.push(format!("data using {}:{} with lines title \"{} closed form\"", idx["phi"], select(idx["kernel"], k, idx["closed_form"]), gp_escape(k)));
                curves.push(format!("data using {}:{} with points pt 6 title \"{} oracle\"", idx["phi"], select(idx["kernel"], k, idx["oracle"]), gp_escape(k)));
            }
            let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
        }
        PlotKind::Map => {
            let met = distinct_text(table, idx["method"] - 1);
            let _ = writeln!(s, "set xlabel 'kx'");
            let _ = writeln!(s, "set ylabel 'kz'");
            let _ = writeln!(s, "set view map");
            let first = met.first().cloned().unwrap_or_default();
            let _ = writeln!(
                s,
                "splot data using {}:{}:{} with points pt 5 palette title \"{}\"",
                idx["kx"],
                idx["kz"],
                select(idx["method"], &first, idx["gamma_ratio"]),
                gp_escape(&first)
            );
        }
    }
    let _ = writeln!(s, "pause mouse close");
    Ok(s)
}

/// Default plot layout for a scan kind's main table.
pub fn plot_kind_for(table_name: &str) -> Option<PlotKind> {
    match table_name {
        "detuning-sweep" => Some(PlotKind::Detuning),
        "axial-profile" => Some(PlotKind::Profile),
        "compare" => Some(PlotKind::Compare),
        "defocus-study" => Some(PlotKind::Defocus),
        "airy-check" => Some(PlotKind::Airy),
        "radial-map" => Some(PlotKind::Map),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "geometry": { "kR": 1e5, "theta_m1": 0.7, "theta_m2": 0.7, "rho1": 0.98, "rho2": 0.98 },
        "scan": { "kind": "compare", "kz_min": 0, "kz_max": 100, "steps": 11 }
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.numerics.l_max, 150);
        assert_eq!(c.numerics.order_polar, 64);
        assert_eq!(c.numerics.order_azimuthal, 32);
        assert_eq!(c.numerics.tail_tolerance, 1e-8);
        assert_eq!(c.dipole, DipoleOrientation::Isotropic);
        assert_eq!(c.geometry.k_delta, 0.0);
    }

    #[test]
    fn all_violations_reported() {
        let text = MINIMAL.replace("\"rho1\": 0.98", "\"rho1\": 1.2").replace("\"steps\": 11", "\"steps\": 1");
        match parse_config(&text) {
            Err(Error::Config(v)) => {
                assert_eq!(v.len(), 2, "{v:?}");
                assert!(v.iter().any(|x| x.field == "geometry.rho1" && x.constraint.contains("reflectivity out of [0,1]")));
                assert!(v.iter().any(|x| x.field == "scan.steps"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let text = "{\n  \"geometry\": {\n    \"kR\": ,\n  }\n}";
        match parse_config(text) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_config(&MINIMAL.replace("\"compare\"", "\"bogus\"")), Err(Error::Parse { .. })));
    }

    #[test]
    fn config_round_trip_is_identity() {
        let c = parse_config(MINIMAL).unwrap();
        let back = parse_config(&c.to_json().unwrap()).unwrap();
        assert_eq!(c, back);
        assert_eq!(c.hash().unwrap(), back.hash().unwrap());
    }

    fn sample_table() -> ResultTable {
        let c = parse_config(MINIMAL).unwrap();
        let mut t = ResultTable::new(
            "axial-profile",
            vec![Column::float("kz", "1/k"), Column::float("gamma_ratio", "Γ/Γ_vac"), Column::float("shift_ratio", "Δ′/Γ_vac"), Column::text("method")],
            Provenance::for_config(&c).unwrap(),
        );
        t.push_row(vec![0.0.into(), 29.288098511894646.into(), Cell::Missing, "full".into()]).unwrap();
        t.push_row(vec![1.0.into(), (1.0f64 / 3.0).into(), (-1e-300).into(), "ray-asymmetric, \"q\"".into()]).unwrap();
        t
    }

    #[test]
    fn csv_header_and_exact_floats() {
        let t = sample_table();
        let mut buf = Vec::new();
        write_table(&t, TableFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (header, rows) = read_table_csv(&text).unwrap();
        assert_eq!(header, vec!["kz [1/k]", "gamma_ratio [Γ/Γ_vac]", "shift_ratio [Δ′/Γ_vac]", "method"]);
        assert_eq!(rows[0][1].parse::<f64>().unwrap(), 29.288098511894646);
        assert_eq!(rows[1][1].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(rows[0][2], "");
        assert_eq!(rows[1][3], "ray-asymmetric, \"q\"");
        assert!(text.contains("\r\n"));
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut t = sample_table();
        t.rows.clear();
        let mut buf = Vec::new();
        write_table(&t, TableFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn json_round_trip_bit_exact() {
        let t = sample_table();
        let mut buf = Vec::new();
        write_table(&t, TableFormat::Json, &mut buf).unwrap();
        let back = read_table_json(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn row_shape_enforced() {
        let mut t = sample_table();
        assert!(matches!(t.push_row(vec![1.0.into()]), Err(Error::Columns(_))));
        assert!(matches!(t.push_row(vec!["x".into(), 1.0.into(), 1.0.into(), "m".into()]), Err(Error::Columns(_))));
    }

    #[test]
    fn plot_scripts() {
        let t = sample_table();
        let s = emit_plot_script(&t, PlotKind::Profile, "profile.csv").unwrap();
        assert!(s.contains("\"profile.csv\""));
        assert!(!s.contains("29.288"));
        assert!(matches!(emit_plot_script(&t, PlotKind::Compare, "x.csv"), Err(Error::Columns(_))));
        assert!(matches!("histogram".parse::<PlotKind>(), Err(Error::Unknown { .. })));
    }
}
