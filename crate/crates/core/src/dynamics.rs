//! Hydrodynamic loading of a rectangular cantilever.
//!
//! The fluid enters through the rectangular-beam hydrodynamic function
//! `Γ = Γr + iΓi`, a polynomial fit in `x = δ/w` with `δ = √(2η/(ρω))` the
//! viscous boundary-layer thickness. `Γr` adds mass, `Γi` adds damping.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ActuatorGeometry, FluidMedium, SpringModel, SpringProvenance, StructuralMaterial,
};

/// `λ₁²` of the first clamped-free bending mode.
pub const FIRST_MODE_EIGENVALUE: f64 = 3.51602;

/// Leading coefficients of `Γr = a0 + a1·x` and `Γi = b1·x + b2·x²`.
pub const GAMMA_R0: f64 = 1.0553;
pub const GAMMA_R1: f64 = 3.7997;
pub const GAMMA_I1: f64 = 3.8018;
pub const GAMMA_I2: f64 = 2.7364;

const RESONANCE_TOL: f64 = 1e-12;
const RESONANCE_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydrodynamicFunction {
    pub gamma_r: f64,
    pub gamma_i: f64,
    pub evaluated_at_omega: f64,
    pub delta_over_w: f64,
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("omega", format!("must be > 0, got {omega}")))
    }
}

pub fn boundary_layer_thickness(omega: f64, fluid: &FluidMedium) -> Result<f64> {
    check_omega(omega)?;
    if fluid.is_vacuum() {
        return Err(Error::Inapplicable("boundary-layer thickness"));
    }
    Ok((2.0 * fluid.eta() / (fluid.rho() * omega)).sqrt())
}

pub fn hydrodynamic_function(
    omega: f64,
    geom: &ActuatorGeometry,
    fluid: &FluidMedium,
) -> Result<HydrodynamicFunction> {
    if fluid.is_vacuum() {
        return Err(Error::Inapplicable("hydrodynamic function"));
    }
    let x = boundary_layer_thickness(omega, fluid)? / geom.width();
    Ok(HydrodynamicFunction {
        gamma_r: GAMMA_R0 + GAMMA_R1 * x,
        gamma_i: GAMMA_I1 * x + GAMMA_I2 * x * x,
        evaluated_at_omega: omega,
        delta_over_w: x,
    })
}

/// `ρ_lever·L·w·t`.
pub fn structural_mass(geom: &ActuatorGeometry, mat: &StructuralMaterial) -> f64 {
    mat.density() * geom.length() * geom.width() * geom.thickness()
}

/// Mass of the fluid cylinder of diameter `w` per unit `Γr`: `(π/4)ρw²L`.
fn fluid_cylinder_mass(geom: &ActuatorGeometry, fluid: &FluidMedium) -> f64 {
    PI / 4.0 * fluid.rho() * geom.width().powi(2) * geom.length()
}

pub fn effective_mass(
    omega: f64,
    geom: &ActuatorGeometry,
    mat: &StructuralMaterial,
    fluid: &FluidMedium,
) -> Result<f64> {
    check_omega(omega)?;
    let structural = structural_mass(geom, mat);
    if fluid.is_vacuum() {
        return Ok(structural);
    }
    let gamma = hydrodynamic_function(omega, geom, fluid)?;
    Ok(fluid_cylinder_mass(geom, fluid) * gamma.gamma_r + structural)
}

/// Viscous damping coefficient, kg/s.
pub fn damping_coefficient(
    omega: f64,
    geom: &ActuatorGeometry,
    fluid: &FluidMedium,
) -> Result<f64> {
    check_omega(omega)?;
    if fluid.is_vacuum() {
        return Ok(0.0);
    }
    let gamma = hydrodynamic_function(omega, geom, fluid)?;
    Ok(fluid_cylinder_mass(geom, fluid) * omega * gamma.gamma_i)
}

/// Hydrodynamic quality factor; `f64::INFINITY` when there is no dissipation.
pub fn quality_factor(
    omega: f64,
    geom: &ActuatorGeometry,
    mat: &StructuralMaterial,
    fluid: &FluidMedium,
) -> Result<f64> {
    check_omega(omega)?;
    if fluid.is_vacuum() {
        return Ok(f64::INFINITY);
    }
    let gamma = hydrodynamic_function(omega, geom, fluid)?;
    if gamma.gamma_i == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mass_ratio = 4.0 / PI * mat.density() / fluid.rho() * geom.thickness() / geom.width();
    Ok((mass_ratio + gamma.gamma_r) / gamma.gamma_i)
}

/// First-mode Euler-Bernoulli frequency of the clamped-free beam, Hz.
pub fn vacuum_frequency(geom: &ActuatorGeometry, mat: &StructuralMaterial) -> f64 {
    FIRST_MODE_EIGENVALUE / (2.0 * PI) * geom.thickness() / geom.length().powi(2)
        * (mat.youngs_modulus() / (12.0 * mat.density())).sqrt()
}

/// Stiffness that places the lumped oscillator (mass `ρ_lever·L·w·t`) at the
/// first-mode vacuum frequency. With it, `√(k/m*)` reproduces the in-fluid
/// natural frequency exactly.
pub fn modal_stiffness(geom: &ActuatorGeometry, mat: &StructuralMaterial) -> SpringModel {
    let omega = 2.0 * PI * vacuum_frequency(geom, mat);
    SpringModel::new(
        structural_mass(geom, mat) * omega * omega,
        SpringProvenance::Modal,
    )
    .expect("positive geometry gives positive stiffness")
}

/// Right-hand side of the implicit in-fluid resonance relation, Hz.
pub fn natural_frequency_map(
    f: f64,
    geom: &ActuatorGeometry,
    mat: &StructuralMaterial,
    fluid: &FluidMedium,
) -> Result<f64> {
    let f_vac = vacuum_frequency(geom, mat);
    if fluid.is_vacuum() {
        return Ok(f_vac);
    }
    let gamma = hydrodynamic_function(2.0 * PI * f, geom, fluid)?;
    let loading =
        PI / 4.0 * fluid.rho() / mat.density() * geom.width() / geom.thickness() * gamma.gamma_r;
    Ok(f_vac / (1.0 + loading).sqrt())
}

/// Frequency at which m*, γ and Q are reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluationPoint {
    #[default]
    NaturalFrequency,
    PeakFrequency,
    Explicit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicParameters {
    pub effective_mass: f64,
    pub damping: f64,
    pub q_factor: f64,
    pub f_vacuum: f64,
    pub f_natural_hyd: f64,
    pub f_peak: f64,
    pub omega_hyd: f64,
    /// Frequency (Hz) at which `effective_mass`, `damping` and `q_factor` were evaluated.
    pub evaluated_at: f64,
    pub hydrodynamic: Option<HydrodynamicFunction>,
    pub iterations: usize,
}

/// Solves `f = natural_frequency_map(f)` by fixed-point iteration from the
/// vacuum frequency, falling back to bisection if the iterates stop contracting.
pub fn solve_natural_frequency(
    geom: &ActuatorGeometry,
    mat: &StructuralMaterial,
    fluid: &FluidMedium,
) -> Result<(f64, usize)> {
    let f_vac = vacuum_frequency(geom, mat);
    if fluid.is_vacuum() {
        return Ok((f_vac, 0));
    }
    let mut f = f_vac;
    let mut last_step = f64::INFINITY;
    for iteration in 1..=RESONANCE_MAX_ITER {
        let next = natural_frequency_map(f, geom, mat, fluid)?;
        let step = (next - f).abs();
        if step <= RESONANCE_TOL * next {
            return Ok((next, iteration));
        }
        if step >= last_step {
            return bisect_natural_frequency(geom, mat, fluid, f_vac);
        }
        last_step = step;
        f = next;
    }
    Err(Error::NonConvergence {
        what: "in-fluid resonance fixed point",
        iterations: RESONANCE_MAX_ITER,
    })
}

fn bisect_natural_frequency(
    geom: &ActuatorGeometry,
    mat: &StructuralMaterial,
    fluid: &FluidMedium,
    f_vac: f64,
) -> Result<(f64, usize)> {
    // map(f) - f is positive for f -> 0 (the map falls off like f^(1/4)) and
    // non-positive at f_vac.
    let residual = |f: f64| natural_frequency_map(f, geom, mat, fluid).map(|m| m - f);
    let mut hi = f_vac;
    let mut lo = f_vac * 1e-6;
    if residual(lo)? <= 0.0 {
        return Err(Error::NonConvergence {
            what: "in-fluid resonance bracket",
            iterations: 0,
        });
    }
    for iteration in 1..=200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= RESONANCE_TOL * hi {
            return Ok((0.5 * (lo + hi), iteration));
        }
    }
    Err(Error::NonConvergence {
        what: "in-fluid resonance bisection",
        iterations: 200,
    })
}

/// Damped-peak frequency `f_n·√(1 − 1/(2Q²))`, or 0 when the response has no peak.
pub fn damped_peak_frequency(f_natural: f64, q: f64) -> f64 {
    if q.is_infinite() {
        return f_natural;
    }
    if q > std::f64::consts::FRAC_1_SQRT_2 {
        f_natural * (1.0 - 1.0 / (2.0 * q * q)).sqrt()
    } else {
        0.0
    }
}

pub fn resonance_in_fluid(
    geom: &ActuatorGeometry,
    mat: &StructuralMaterial,
    fluid: &FluidMedium,
) -> Result<DynamicParameters> {
    resonance_in_fluid_at(geom, mat, fluid, EvaluationPoint::NaturalFrequency)
}

pub fn resonance_in_fluid_at(
    geom: &ActuatorGeometry,
    mat: &StructuralMaterial,
    fluid: &FluidMedium,
    at: EvaluationPoint,
) -> Result<DynamicParameters> {
    let f_vacuum = vacuum_frequency(geom, mat);
    let (f_natural, iterations) = solve_natural_frequency(geom, mat, fluid)?;
    let omega_hyd = 2.0 * PI * f_natural;
    let q_natural = quality_factor(omega_hyd, geom, mat, fluid)?;
    let f_peak = damped_peak_frequency(f_natural, q_natural);

    let evaluated_at = match at {
        EvaluationPoint::NaturalFrequency => f_natural,
        EvaluationPoint::PeakFrequency => f_peak,
        EvaluationPoint::Explicit(f) => f,
    };
    let omega = 2.0 * PI * evaluated_at;
    let hydrodynamic = if fluid.is_vacuum() {
        None
    } else {
        Some(hydrodynamic_function(omega, geom, fluid)?)
    };
    Ok(DynamicParameters {
        effective_mass: effective_mass(omega, geom, mat, fluid)?,
        damping: damping_coefficient(omega, geom, fluid)?,
        q_factor: quality_factor(omega, geom, mat, fluid)?,
        f_vacuum,
        f_natural_hyd: f_natural,
        f_peak,
        omega_hyd,
        evaluated_at,
        hydrodynamic,
        iterations,
    })
}
