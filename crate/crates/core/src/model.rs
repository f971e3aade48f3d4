//! Physical quantities shared by every solver.
//!
//! Everything is stored in SI base units. Constructors validate their
//! invariants, so a value that exists is a value the solvers can use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.85e-12;

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and >= 0, got {value}"),
        ))
    }
}

fn relative_permittivity(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 1.0 {
        Ok(value)
    } else {
        Err(Error::invalid(
            name,
            format!("relative permittivity must be >= 1, got {value}"),
        ))
    }
}

/// Rectangular plate/cantilever with a parallel-plate electrode underneath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorGeometry {
    length: f64,
    width: f64,
    thickness: f64,
    electrode_area: f64,
    gap: f64,
}

impl ActuatorGeometry {
    pub fn new(
        length: f64,
        width: f64,
        thickness: f64,
        electrode_area: f64,
        gap: f64,
    ) -> Result<Self> {
        let geom = Self {
            length: positive("length", length)?,
            width: positive("width", width)?,
            thickness: positive("thickness", thickness)?,
            electrode_area: positive("electrode_area", electrode_area)?,
            gap: positive("gap", gap)?,
        };
        // Allow for rounding when S is given as exactly L*w in other units.
        if electrode_area > length * width * (1.0 + 1e-12) {
            return Err(Error::invalid(
                "electrode_area",
                format!(
                    "{electrode_area:e} m^2 exceeds the plate footprint {:e} m^2",
                    length * width
                ),
            ));
        }
        Ok(geom)
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn width(&self) -> f64 {
        self.width
    }
    pub fn thickness(&self) -> f64 {
        self.thickness
    }
    pub fn electrode_area(&self) -> f64 {
        self.electrode_area
    }
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Copy with a different gap.
    pub fn with_gap(&self, gap: f64) -> Result<Self> {
        Self::new(
            self.length,
            self.width,
            self.thickness,
            self.electrode_area,
            gap,
        )
    }

    /// Copy with a different electrode area.
    pub fn with_electrode_area(&self, area: f64) -> Result<Self> {
        Self::new(self.length, self.width, self.thickness, area, self.gap)
    }
}

/// Insulating layers on the two electrodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DielectricStack {
    t1: f64,
    t2: f64,
    eps1: f64,
    eps2: f64,
}

impl DielectricStack {
    pub fn new(t1: f64, t2: f64, eps1: f64, eps2: f64) -> Result<Self> {
        Ok(Self {
            t1: non_negative("t1", t1)?,
            t2: non_negative("t2", t2)?,
            eps1: relative_permittivity("eps1", eps1)?,
            eps2: relative_permittivity("eps2", eps2)?,
        })
    }

    /// Bare electrodes.
    pub fn bare() -> Self {
        Self {
            t1: 0.0,
            t2: 0.0,
            eps1: 1.0,
            eps2: 1.0,
        }
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }
    pub fn t2(&self) -> f64 {
        self.t2
    }
    pub fn eps1(&self) -> f64 {
        self.eps1
    }
    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    /// Σ tᵢ/εᵢ, the vacuum-referred series thickness.
    pub fn reduced_thickness(&self) -> f64 {
        self.t1 / self.eps1 + self.t2 / self.eps2
    }
}

/// Medium filling the gap and surrounding the beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidMedium {
    name: String,
    eps: f64,
    rho: f64,
    eta: f64,
    screening_frequency: Option<f64>,
    assumed_defaults: bool,
}

impl FluidMedium {
    pub fn new(
        name: impl Into<String>,
        eps: f64,
        rho: f64,
        eta: f64,
        screening_frequency: Option<f64>,
    ) -> Result<Self> {
        if let Some(fc) = screening_frequency {
            positive("f_c", fc)?;
        }
        Ok(Self {
            name: name.into(),
            eps: relative_permittivity("eps", eps)?,
            rho: non_negative("rho", rho)?,
            eta: non_negative("eta", eta)?,
            screening_frequency,
            assumed_defaults: false,
        })
    }

    /// Resolves one of the built-in media: `vacuum`, `air`, `ipa`, `tap-water`.
    pub fn preset(name: &str) -> Result<Self> {
        let key = name.trim().to_ascii_lowercase().replace('_', "-");
        let fluid = match key.as_str() {
            "vacuum" => Self::new("vacuum", 1.0, 0.0, 0.0, None)?,
            "air" => Self::new("air", 1.0, 1.18, 1.86e-5, None)?,
            "ipa" | "isopropyl-alcohol" => {
                let mut ipa = Self::new("ipa", 21.3, 786.0, 2.04e-3, Some(17e3))?;
                // density and viscosity are textbook values, not measured here
                ipa.assumed_defaults = true;
                ipa
            }
            "tap-water" | "water" => Self::new("tap-water", 80.1, 1000.0, 8.59e-4, Some(950e3))?,
            _ => return Err(Error::UnknownPreset(name.to_string())),
        };
        Ok(fluid)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn screening_frequency(&self) -> Option<f64> {
        self.screening_frequency
    }
    /// Set when some property is a generic default rather than a measured value.
    pub fn assumed_defaults(&self) -> bool {
        self.assumed_defaults
    }
    pub fn is_vacuum(&self) -> bool {
        self.rho == 0.0
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Ok(Self {
            eps: relative_permittivity("eps", eps)?,
            ..self.clone()
        })
    }
}

/// Free function form of [`FluidMedium::preset`].
pub fn fluid_preset(name: &str) -> Result<FluidMedium> {
    FluidMedium::preset(name)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralMaterial {
    youngs_modulus: f64,
    density: f64,
}

impl StructuralMaterial {
    pub fn new(youngs_modulus: f64, density: f64) -> Result<Self> {
        Ok(Self {
            youngs_modulus: positive("youngs_modulus", youngs_modulus)?,
            density: positive("density", density)?,
        })
    }

    /// Polysilicon, E = 160 GPa, ρ = 2330 kg/m³.
    pub fn polysilicon() -> Self {
        Self {
            youngs_modulus: 160e9,
            density: 2330.0,
        }
    }

    pub fn youngs_modulus(&self) -> f64 {
        self.youngs_modulus
    }
    pub fn density(&self) -> f64 {
        self.density
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpringProvenance {
    Direct,
    Calibrated,
    BeamEndLoad,
    BeamUniformLoad,
    /// m_struct · ω_vac², consistent with the first-mode vacuum frequency.
    Modal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringModel {
    k: f64,
    provenance: SpringProvenance,
}

impl SpringModel {
    pub fn new(k: f64, provenance: SpringProvenance) -> Result<Self> {
        Ok(Self {
            k: positive("k", k)?,
            provenance,
        })
    }

    pub fn direct(k: f64) -> Result<Self> {
        Self::new(k, SpringProvenance::Direct)
    }

    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn provenance(&self) -> SpringProvenance {
        self.provenance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveKind {
    Dc,
    Ac,
}

/// DC voltage or AC excitation `V_rms·√2·cos(2π f t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSignal {
    kind: DriveKind,
    voltage: f64,
    drive_frequency: Option<f64>,
}

impl DriveSignal {
    pub fn dc(voltage: f64) -> Result<Self> {
        Ok(Self {
            kind: DriveKind::Dc,
            voltage: non_negative("voltage", voltage)?,
            drive_frequency: None,
        })
    }

    pub fn ac(v_rms: f64, drive_frequency: f64) -> Result<Self> {
        Ok(Self {
            kind: DriveKind::Ac,
            voltage: non_negative("voltage", v_rms)?,
            drive_frequency: Some(positive("drive_frequency", drive_frequency)?),
        })
    }

    pub fn kind(&self) -> DriveKind {
        self.kind
    }
    /// DC level, or V_rms for AC.
    pub fn voltage(&self) -> f64 {
        self.voltage
    }
    pub fn drive_frequency(&self) -> Option<f64> {
        self.drive_frequency
    }

    /// Instantaneous voltage at time `t`.
    pub fn instantaneous(&self, t: f64) -> f64 {
        match (self.kind, self.drive_frequency) {
            (DriveKind::Ac, Some(f)) => {
                self.voltage * std::f64::consts::SQRT_2 * (2.0 * std::f64::consts::PI * f * t).cos()
            }
            _ => self.voltage,
        }
    }
}

/// Everything about the device except the medium it runs in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Actuator {
    pub geometry: ActuatorGeometry,
    pub stack: DielectricStack,
    pub material: StructuralMaterial,
    pub spring: SpringModel,
}

/// `d = ε·(t1/ε1 + t2/ε2)`: the dielectric layers expressed as an equivalent
/// thickness of the surrounding medium.
pub fn effective_dielectric_thickness(stack: &DielectricStack, fluid: &FluidMedium) -> f64 {
    fluid.eps() * stack.reduced_thickness()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadModel {
    EndLoad,
    UniformLoad,
}

/// Euler-Bernoulli cantilever stiffness referred to the tip.
pub fn beam_stiffness(
    geom: &ActuatorGeometry,
    mat: &StructuralMaterial,
    load: LoadModel,
) -> SpringModel {
    let inertia = geom.width() * geom.thickness().powi(3) / 12.0;
    let ei_over_l3 = mat.youngs_modulus() * inertia / geom.length().powi(3);
    let (k, provenance) = match load {
        LoadModel::EndLoad => (3.0 * ei_over_l3, SpringProvenance::BeamEndLoad),
        LoadModel::UniformLoad => (8.0 * ei_over_l3, SpringProvenance::BeamUniformLoad),
    };
    SpringModel { k, provenance }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VoltageObservation {
    /// Voltage at which the plate snaps down (fluid must allow pull-in).
    PullIn,
    /// Voltage at which a stable plate reaches the electrode.
    Close,
}

/// Back-solves the lumped stiffness from an observed actuation voltage.
pub fn calibrate_stiffness(
    observation: VoltageObservation,
    voltage: f64,
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
) -> Result<SpringModel> {
    positive("voltage", voltage)?;
    let d = effective_dielectric_thickness(stack, fluid);
    let g = geom.gap();
    let suppressed = pull_in_suppressed(d, g);
    let e_s = EPS0 * fluid.eps() * geom.electrode_area();
    let k = match observation {
        VoltageObservation::PullIn => {
            if suppressed {
                return Err(Error::ModeMismatch {
                    observation: "pull-in",
                    reason: format!(
                        "d = {d:e} m > 2g = {:e} m in {}, so no pull-in occurs",
                        2.0 * g,
                        fluid.name()
                    ),
                });
            }
            27.0 * e_s * voltage * voltage / (8.0 * (g + d).powi(3))
        }
        VoltageObservation::Close => {
            if !suppressed {
                return Err(Error::ModeMismatch {
                    observation: "gap-close",
                    reason: format!(
                        "d = {d:e} m <= 2g = {:e} m in {}, so the plate pulls in before closing",
                        2.0 * g,
                        fluid.name()
                    ),
                });
            }
            e_s * voltage * voltage / (2.0 * g * d * d)
        }
    };
    SpringModel::new(k, SpringProvenance::Calibrated)
}

/// `d > 2g`: stable travel over the whole gap.
pub(crate) fn pull_in_suppressed(d: f64, g: f64) -> bool {
    d > 2.0 * g
}

/// Reference configurations for the 250 × 30 × 2 µm nitride-encapsulated
/// polysilicon cantilever.
pub mod presets {
    use super::*;

    pub fn cantilever_geometry() -> ActuatorGeometry {
        ActuatorGeometry {
            length: 250e-6,
            width: 30e-6,
            thickness: 2e-6,
            electrode_area: 7500e-12,
            gap: 2e-6,
        }
    }

    /// 300 nm of silicon nitride (ε = 8) on each electrode.
    pub fn nitride_stack() -> DielectricStack {
        DielectricStack {
            t1: 300e-9,
            t2: 300e-9,
            eps1: 8.0,
            eps2: 8.0,
        }
    }

    /// Stiffness calibrated so that the air pull-in voltage is 7.6 V.
    pub fn calibrated_spring() -> SpringModel {
        let air = FluidMedium::preset("air").expect("air preset");
        calibrate_stiffness(
            VoltageObservation::PullIn,
            7.6,
            &cantilever_geometry(),
            &nitride_stack(),
            &air,
        )
        .expect("air pull-in calibration")
    }

    pub fn cantilever() -> Actuator {
        Actuator {
            geometry: cantilever_geometry(),
            stack: nitride_stack(),
            material: StructuralMaterial::polysilicon(),
            spring: calibrated_spring(),
        }
    }
}
