//! Run configuration: a TOML file with unit-suffixed keys.
//!
//! ```toml
//! fluid = "air"
//!
//! [geometry]
//! length_um = 250
//! gap_um = 2
//! ```
//!
//! Values are converted to SI on load. Every key must be consumed, so a
//! misspelt name or an unsupported unit suffix is reported rather than ignored.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use mems_liquid::dynamics::{modal_stiffness, EvaluationPoint};
use mems_liquid::model::{beam_stiffness, calibrate_stiffness, LoadModel, VoltageObservation};
use mems_liquid::transient::{SqueezeFilmOption, SqueezeGapMode};
use mems_liquid::{
    ActuatorGeometry, DielectricStack, DriveSignal, FluidMedium, SpringModel, StructuralMaterial,
};
use thiserror::Error;
use toml::{Table, Value};

/// Reference cantilever shipped with the tool.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/cantilever.toml");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("`{path}`: {reason}")]
    Invalid { path: String, reason: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Length,
    Area,
    Voltage,
    Frequency,
    Modulus,
    Time,
    Density,
    Viscosity,
    Stiffness,
    Force,
}

impl Unit {
    /// Accepted suffixes with their SI power of ten; the first one is canonical.
    fn suffixes(self) -> &'static [(&'static str, i32)] {
        match self {
            Unit::Length => &[("_um", -6), ("_nm", -9), ("_m", 0)],
            Unit::Area => &[("_um2", -12), ("_m2", 0)],
            Unit::Voltage => &[("_V", 0)],
            Unit::Frequency => &[("_Hz", 0), ("_kHz", 3), ("_MHz", 6)],
            Unit::Modulus => &[("_GPa", 9), ("_Pa", 0)],
            Unit::Time => &[("_s", 0), ("_ms", -3), ("_us", -6), ("_ns", -9)],
            Unit::Density => &[("_kg_m3", 0)],
            Unit::Viscosity => &[("_Pa_s", 0), ("_mPa_s", -3)],
            Unit::Stiffness => &[("_N_m", 0)],
            Unit::Force => &[("_N", 0), ("_nN", -9)],
        }
    }
}

/// Dividing by an exact power of ten keeps `300 nm` at exactly `3e-7`.
fn to_si(x: f64, power: i32) -> f64 {
    if power < 0 {
        x / 10f64.powi(-power)
    } else {
        x * 10f64.powi(power)
    }
}

/// A TOML table that remembers which keys were read.
struct Block {
    path: String,
    table: Table,
    seen: BTreeSet<String>,
}

impl Block {
    fn new(path: &str, table: Table) -> Self {
        Self {
            path: path.to_string(),
            table,
            seen: BTreeSet::new(),
        }
    }

    fn key_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn invalid(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            path: self.key_path(key),
            reason: reason.into(),
        }
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        let v = self.table.get(key).cloned();
        if v.is_some() {
            self.seen.insert(key.to_string());
        }
        v
    }

    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(x)),
            Some(Value::Integer(i)) => Ok(Some(i as f64)),
            Some(other) => Err(self.invalid(
                key,
                format!("expected a number, found {}", other.type_str()),
            )),
        }
    }

    fn required_number(&mut self, key: &str) -> Result<f64> {
        self.number(key)?
            .ok_or_else(|| ConfigError::Missing(self.key_path(key)))
    }

    fn quantity(&mut self, base: &str, unit: Unit) -> Result<Option<f64>> {
        let present: Vec<(String, i32)> = unit
            .suffixes()
            .iter()
            .map(|(s, p)| (format!("{base}{s}"), *p))
            .filter(|(k, _)| self.has(k))
            .collect();
        match present.as_slice() {
            [] => Ok(None),
            [(key, power)] => {
                let key = key.clone();
                let x = self.required_number(&key)?;
                if !x.is_finite() {
                    return Err(self.invalid(&key, "must be finite"));
                }
                Ok(Some(to_si(x, *power)))
            }
            many => {
                let keys: Vec<&str> = many.iter().map(|(k, _)| k.as_str()).collect();
                Err(self.invalid(base, format!("give only one of {}", keys.join(", "))))
            }
        }
    }

    fn canonical(&self, base: &str, unit: Unit) -> String {
        self.key_path(&format!("{base}{}", unit.suffixes()[0].0))
    }

    fn required(&mut self, base: &str, unit: Unit) -> Result<f64> {
        self.quantity(base, unit)?
            .ok_or_else(|| ConfigError::Missing(self.canonical(base, unit)))
    }

    fn positive(&mut self, base: &str, unit: Unit) -> Result<f64> {
        let x = self.required(base, unit)?;
        if x <= 0.0 {
            return Err(ConfigError::Invalid {
                path: self.canonical(base, unit),
                reason: format!("must be > 0, got {x}"),
            });
        }
        Ok(x)
    }

    fn optional_positive(&mut self, base: &str, unit: Unit) -> Result<Option<f64>> {
        if self.quantity_present(base, unit) {
            self.positive(base, unit).map(Some)
        } else {
            Ok(None)
        }
    }

    fn quantity_present(&self, base: &str, unit: Unit) -> bool {
        unit.suffixes()
            .iter()
            .any(|(s, _)| self.has(&format!("{base}{s}")))
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(self.invalid(
                key,
                format!("expected a string, found {}", other.type_str()),
            )),
        }
    }

    fn boolean(&mut self, key: &str) -> Result<Option<bool>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(b)),
            Some(other) => Err(self.invalid(
                key,
                format!("expected true or false, found {}", other.type_str()),
            )),
        }
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if i > 0 => Ok(Some(i as usize)),
            Some(other) => {
                Err(self.invalid(key, format!("expected a positive integer, found {other}")))
            }
        }
    }

    fn block(&mut self, key: &str) -> Result<Option<Block>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(Block::new(&self.key_path(key), t))),
            Some(other) => {
                Err(self.invalid(key, format!("expected a table, found {}", other.type_str())))
            }
        }
    }

    fn required_block(&mut self, key: &str) -> Result<Block> {
        self.block(key)?
            .ok_or_else(|| ConfigError::Missing(self.key_path(key)))
    }

    fn finish(self) -> Result<()> {
        match self.table.keys().find(|k| !self.seen.contains(*k)) {
            Some(k) => Err(ConfigError::Unknown(self.key_path(k))),
            None => Ok(()),
        }
    }
}

fn model_error(path: &str, err: mems_liquid::Error) -> ConfigError {
    ConfigError::Invalid {
        path: path.to_string(),
        reason: err.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpringSpec {
    Direct(f64),
    Calibrated {
        observation: VoltageObservation,
        voltage: f64,
        fluid: FluidMedium,
    },
    Beam(LoadModel),
    Modal,
}

/// Stiffness used by the dynamic commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DynamicStiffness {
    /// Places the lumped oscillator on the first bending mode.
    #[default]
    Modal,
    /// Whatever the `[spring]` block specifies.
    Spring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}`, expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverSettings {
    pub v_start: Option<f64>,
    pub v_stop: Option<f64>,
    pub steps: Option<usize>,
    pub f_start: Option<f64>,
    pub f_stop: Option<f64>,
    pub points: Option<usize>,
    /// Harmonic force amplitude for `freq-response`, overriding the drive.
    pub force: Option<f64>,
    pub evaluation: EvaluationPoint,
    pub frozen_loading: bool,
    pub softened_stiffness: bool,
    pub squeeze: SqueezeFilmOption,
    pub duration: Option<f64>,
    pub dt: Option<f64>,
    pub z0: f64,
    pub ramp: Option<f64>,
    pub stiffness: DynamicStiffness,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSettings {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: ActuatorGeometry,
    pub stack: DielectricStack,
    pub material: StructuralMaterial,
    pub spring: SpringSpec,
    pub fluid: FluidMedium,
    pub drive: DriveSignal,
    pub solver: SolverSettings,
    pub output: OutputSettings,
}

impl RunConfig {
    /// Static spring as configured.
    pub fn spring(&self) -> mems_liquid::Result<SpringModel> {
        match &self.spring {
            SpringSpec::Direct(k) => SpringModel::direct(*k),
            SpringSpec::Calibrated {
                observation,
                voltage,
                fluid,
            } => calibrate_stiffness(*observation, *voltage, &self.geometry, &self.stack, fluid),
            SpringSpec::Beam(load) => Ok(beam_stiffness(&self.geometry, &self.material, *load)),
            SpringSpec::Modal => Ok(modal_stiffness(&self.geometry, &self.material)),
        }
    }

    /// Spring for resonance, response and transient runs.
    pub fn dynamic_spring(&self) -> mems_liquid::Result<SpringModel> {
        match self.solver.stiffness {
            DynamicStiffness::Modal => Ok(modal_stiffness(&self.geometry, &self.material)),
            DynamicStiffness::Spring => self.spring(),
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    let mut root = Block::new("", table);

    let fluid = match root.take("fluid") {
        None => return Err(ConfigError::Missing("fluid".into())),
        Some(Value::String(name)) => {
            FluidMedium::preset(&name).map_err(|e| model_error("fluid", e))?
        }
        Some(Value::Table(t)) => inline_fluid(Block::new("fluid", t))?,
        Some(other) => {
            return Err(root.invalid(
                "fluid",
                format!(
                    "expected a preset name or a table, found {}",
                    other.type_str()
                ),
            ))
        }
    };

    let geometry = geometry(root.required_block("geometry")?)?;
    let stack = dielectric(root.required_block("dielectric")?)?;
    let material = material(root.required_block("material")?)?;
    let spring = spring(root.required_block("spring")?, &fluid)?;
    let drive = match root.block("drive")? {
        Some(b) => drive(b)?,
        None => DriveSignal::dc(0.0).expect("zero volts is valid"),
    };
    let solver = match root.block("solver")? {
        Some(b) => solver(b)?,
        None => SolverSettings::default(),
    };
    let output = match root.block("output")? {
        Some(b) => output(b)?,
        None => OutputSettings::default(),
    };
    root.finish()?;

    Ok(RunConfig {
        geometry,
        stack,
        material,
        spring,
        fluid,
        drive,
        solver,
        output,
    })
}

fn inline_fluid(mut b: Block) -> Result<FluidMedium> {
    let name = b.string("name")?.unwrap_or_else(|| "custom".into());
    let eps = b.required_number("eps")?;
    let rho = b.required("density", Unit::Density)?;
    let eta = b.required("viscosity", Unit::Viscosity)?;
    let fc = b.optional_positive("screening_frequency", Unit::Frequency)?;
    b.finish()?;
    FluidMedium::new(name, eps, rho, eta, fc).map_err(|e| model_error("fluid", e))
}

fn geometry(mut b: Block) -> Result<ActuatorGeometry> {
    let length = b.positive("length", Unit::Length)?;
    let width = b.positive("width", Unit::Length)?;
    let thickness = b.positive("thickness", Unit::Length)?;
    let gap = b.positive("gap", Unit::Length)?;
    let area = match b.optional_positive("electrode_area", Unit::Area)? {
        Some(a) => a,
        None => length * width,
    };
    b.finish()?;
    ActuatorGeometry::new(length, width, thickness, area, gap)
        .map_err(|e| model_error("geometry", e))
}

fn dielectric(mut b: Block) -> Result<DielectricStack> {
    let t1 = b.required("t1", Unit::Length)?;
    let t2 = b.required("t2", Unit::Length)?;
    let eps1 = b.required_number("eps1")?;
    let eps2 = b.required_number("eps2")?;
    b.finish()?;
    DielectricStack::new(t1, t2, eps1, eps2).map_err(|e| model_error("dielectric", e))
}

fn material(mut b: Block) -> Result<StructuralMaterial> {
    let e = b.positive("youngs_modulus", Unit::Modulus)?;
    let rho = b.positive("density", Unit::Density)?;
    b.finish()?;
    StructuralMaterial::new(e, rho).map_err(|e| model_error("material", e))
}

fn spring(mut b: Block, fluid: &FluidMedium) -> Result<SpringSpec> {
    let given: Vec<&str> = ["k_N_m", "calibrate", "beam", "modal"]
        .into_iter()
        .filter(|k| b.has(k))
        .collect();
    if given.len() != 1 {
        return Err(ConfigError::Invalid {
            path: "spring".into(),
            reason: format!(
                "specify exactly one of k_N_m, calibrate, beam or modal (found {})",
                if given.is_empty() {
                    "none".to_string()
                } else {
                    given.join(", ")
                }
            ),
        });
    }
    let spec = match given[0] {
        "k_N_m" => SpringSpec::Direct(b.positive("k", Unit::Stiffness)?),
        "calibrate" => {
            let observation = match b.string("calibrate")?.as_deref() {
                Some("pull-in") => VoltageObservation::PullIn,
                Some("close") => VoltageObservation::Close,
                other => {
                    return Err(b.invalid(
                        "calibrate",
                        format!("expected \"pull-in\" or \"close\", got {other:?}"),
                    ))
                }
            };
            let voltage = b.positive("voltage", Unit::Voltage)?;
            let fluid = match b.string("fluid")? {
                Some(name) => {
                    FluidMedium::preset(&name).map_err(|e| model_error("spring.fluid", e))?
                }
                None => fluid.clone(),
            };
            SpringSpec::Calibrated {
                observation,
                voltage,
                fluid,
            }
        }
        "beam" => match b.string("beam")?.as_deref() {
            Some("end-load") => SpringSpec::Beam(LoadModel::EndLoad),
            Some("uniform-load") => SpringSpec::Beam(LoadModel::UniformLoad),
            other => {
                return Err(b.invalid(
                    "beam",
                    format!("expected \"end-load\" or \"uniform-load\", got {other:?}"),
                ))
            }
        },
        _ => match b.boolean("modal")? {
            Some(true) => SpringSpec::Modal,
            _ => return Err(b.invalid("modal", "only `modal = true` is meaningful")),
        },
    };
    b.finish()?;
    Ok(spec)
}

fn drive(mut b: Block) -> Result<DriveSignal> {
    let kind = b.string("kind")?.unwrap_or_else(|| "dc".into());
    let voltage = b.required("voltage", Unit::Voltage)?;
    let frequency = b.quantity("frequency", Unit::Frequency)?;
    let signal = match (kind.as_str(), frequency) {
        ("dc", None) => DriveSignal::dc(voltage),
        ("dc", Some(_)) => return Err(b.invalid("frequency", "a DC drive takes no frequency")),
        ("ac", Some(f)) => DriveSignal::ac(voltage, f),
        ("ac", None) => {
            return Err(ConfigError::Missing(
                b.canonical("frequency", Unit::Frequency),
            ))
        }
        _ => return Err(b.invalid("kind", format!("expected \"dc\" or \"ac\", got \"{kind}\""))),
    };
    let signal = signal.map_err(|e| model_error("drive", e))?;
    b.finish()?;
    Ok(signal)
}

fn solver(mut b: Block) -> Result<SolverSettings> {
    let mut s = SolverSettings {
        v_start: b.quantity("v_start", Unit::Voltage)?,
        v_stop: b.quantity("v_stop", Unit::Voltage)?,
        steps: b.count("steps")?,
        f_start: b.optional_positive("f_start", Unit::Frequency)?,
        f_stop: b.optional_positive("f_stop", Unit::Frequency)?,
        points: b.count("points")?,
        force: b.quantity("force", Unit::Force)?,
        duration: b.optional_positive("duration", Unit::Time)?,
        dt: b.optional_positive("dt", Unit::Time)?,
        z0: b.quantity("z0", Unit::Length)?.unwrap_or(0.0),
        ramp: b.optional_positive("ramp", Unit::Time)?,
        grid_points: b.count("grid_points")?,
        ..SolverSettings::default()
    };
    if let Some(f) = s.force {
        if f < 0.0 {
            return Err(b.invalid("force_N", "must be >= 0"));
        }
    }
    let explicit = b.optional_positive("evaluation_frequency", Unit::Frequency)?;
    s.evaluation = match (b.string("evaluation")?.as_deref(), explicit) {
        (None | Some("natural"), None) => EvaluationPoint::NaturalFrequency,
        (Some("peak"), None) => EvaluationPoint::PeakFrequency,
        (None, Some(f)) => EvaluationPoint::Explicit(f),
        (Some(_), Some(_)) => {
            return Err(b.invalid("evaluation", "conflicts with evaluation_frequency"))
        }
        (Some(other), None) => {
            return Err(b.invalid(
                "evaluation",
                format!("expected \"natural\" or \"peak\", got \"{other}\""),
            ))
        }
    };
    s.frozen_loading = match b.string("loading")?.as_deref() {
        None | Some("frequency-dependent") => false,
        Some("frozen") => true,
        Some(other) => {
            return Err(b.invalid(
                "loading",
                format!("expected \"frequency-dependent\" or \"frozen\", got \"{other}\""),
            ))
        }
    };
    s.softened_stiffness = b.boolean("softened_stiffness")?.unwrap_or(false);
    s.squeeze.enabled = b.boolean("squeeze_film")?.unwrap_or(false);
    s.squeeze.gap_mode = match b.string("squeeze_gap")?.as_deref() {
        None | Some("fixed") => SqueezeGapMode::Fixed,
        Some("instantaneous") => SqueezeGapMode::Instantaneous,
        Some(other) => {
            return Err(b.invalid(
                "squeeze_gap",
                format!("expected \"fixed\" or \"instantaneous\", got \"{other}\""),
            ))
        }
    };
    s.stiffness = match b.string("stiffness")?.as_deref() {
        None | Some("modal") => DynamicStiffness::Modal,
        Some("spring") => DynamicStiffness::Spring,
        Some(other) => {
            return Err(b.invalid(
                "stiffness",
                format!("expected \"modal\" or \"spring\", got \"{other}\""),
            ))
        }
    };
    b.finish()?;
    Ok(s)
}

fn output(mut b: Block) -> Result<OutputSettings> {
    let path = b.string("path")?.map(PathBuf::from);
    let format = match b.string("format")? {
        None => None,
        Some(f) => Some(f.parse().map_err(|e: String| b.invalid("format", e))?),
    };
    b.finish()?;
    Ok(OutputSettings { path, format })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_the_reference_cantilever() {
        let c = parse_config(DEFAULT_CONFIG).unwrap();
        assert_eq!(c.geometry.length(), 250e-6);
        assert_eq!(c.geometry.gap(), 2e-6);
        assert!((c.geometry.electrode_area() - 7.5e-9).abs() < 1e-24);
        assert_eq!(c.stack.t1(), 300e-9);
        assert_eq!(c.material.youngs_modulus(), 160e9);
        assert_eq!(c.fluid.name(), "air");
        assert!((c.spring().unwrap().k() - 1.448275529).abs() < 1e-9);
    }

    fn without(key: &str) -> String {
        DEFAULT_CONFIG
            .lines()
            .filter(|l| !l.trim_start().starts_with(key))
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn missing_key_is_named() {
        let err = parse_config(&without("gap_um")).unwrap_err();
        assert_eq!(err.to_string(), "missing key `geometry.gap_um`");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = DEFAULT_CONFIG.replace("gap_um", "gap_mm");
        let err = parse_config(&text).unwrap_err();
        assert!(
            matches!(err, ConfigError::Missing(ref p) if p == "geometry.gap_um"),
            "{err}"
        );
        let text = format!("{DEFAULT_CONFIG}\n[extra]\nfoo = 1\n");
        assert_eq!(
            parse_config(&text).unwrap_err().to_string(),
            "unknown key `extra`"
        );
        let text = DEFAULT_CONFIG.replace("[geometry]", "[geometry]\ncolour = \"red\"");
        assert_eq!(
            parse_config(&text).unwrap_err().to_string(),
            "unknown key `geometry.colour`"
        );
    }

    #[test]
    fn units_are_converted() {
        let text = DEFAULT_CONFIG.replace("gap_um = 2", "gap_nm = 2000");
        assert_eq!(parse_config(&text).unwrap().geometry.gap(), 2e-6);
        let text = DEFAULT_CONFIG.replace("gap_um = 2", "gap_um = 2\ngap_m = 2e-6");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::Invalid { .. })
        ));
        let text = DEFAULT_CONFIG.replace("gap_um = 2", "gap_um = -2");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().starts_with("`geometry.gap_um`"), "{err}");
    }

    #[test]
    fn fluid_forms() {
        let water = DEFAULT_CONFIG.replacen("fluid = \"air\"\n", "fluid = \"tap-water\"\n", 1);
        assert_eq!(parse_config(&water).unwrap().fluid.eps(), 80.1);
        let inline = DEFAULT_CONFIG.replacen(
            "fluid = \"air\"\n",
            "[fluid]\nname = \"oil\"\neps = 2.5\ndensity_kg_m3 = 900\nviscosity_mPa_s = 30\n",
            1,
        );
        let c = parse_config(&inline).unwrap();
        assert_eq!(
            (c.fluid.name(), c.fluid.eps(), c.fluid.rho()),
            ("oil", 2.5, 900.0)
        );
        assert!((c.fluid.eta() - 0.03).abs() < 1e-15);
        let bad = DEFAULT_CONFIG.replacen("fluid = \"air\"\n", "fluid = \"mercury\"\n", 1);
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn exactly_one_spring() {
        let two = DEFAULT_CONFIG.replace("[spring]", "[spring]\nk_N_m = 1.0");
        assert!(parse_config(&two)
            .unwrap_err()
            .to_string()
            .contains("exactly one"));
        let none = DEFAULT_CONFIG.replace("calibrate = \"pull-in\"\n", "");
        assert!(parse_config(&none)
            .unwrap_err()
            .to_string()
            .contains("found none"));
        let direct = DEFAULT_CONFIG.replace("calibrate = \"pull-in\"", "k_N_m = 2.5");
        assert_eq!(
            parse_config(&direct).unwrap_err().to_string(),
            "unknown key `spring.fluid`"
        );
    }

    #[test]
    fn drive_kinds() {
        let ac = DEFAULT_CONFIG.replace("kind = \"dc\"", "kind = \"ac\"\nfrequency_kHz = 500");
        assert_eq!(
            parse_config(&ac).unwrap().drive.drive_frequency(),
            Some(500e3)
        );
        let ac = DEFAULT_CONFIG.replace("kind = \"dc\"", "kind = \"ac\"");
        assert_eq!(
            parse_config(&ac).unwrap_err().to_string(),
            "missing key `drive.frequency_Hz`"
        );
        let dc = DEFAULT_CONFIG.replace("kind = \"dc\"", "kind = \"dc\"\nfrequency_Hz = 5");
        assert!(parse_config(&dc).is_err());
    }
}
