//! Brute-force cross-checks for the solvers.
//!
//! Nothing here shares code paths with `statics` or `response`: the potential
//! landscape is scanned on a uniform grid and the harmonic steady state is
//! written out in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    effective_dielectric_thickness, ActuatorGeometry, DielectricStack, FluidMedium, SpringModel,
    EPS0,
};

pub const DEFAULT_GRID_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScanResult {
    /// `(z, U(z))` pairs.
    pub grid_points: Vec<(f64, f64)>,
    pub minima: Vec<f64>,
    pub maxima: Vec<f64>,
    pub spacing: f64,
}

/// Total potential `U(z) = ½kz² − ½ε0εS·V²/(d + g − z)`.
pub fn potential_energy(
    z: f64,
    voltage: f64,
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
    spring: &SpringModel,
) -> f64 {
    let elastic = 0.5 * spring.k() * z * z;
    if voltage == 0.0 {
        return elastic;
    }
    let separation = effective_dielectric_thickness(stack, fluid) + geom.gap() - z;
    let electric =
        0.5 * EPS0 * fluid.eps() * geom.electrode_area() * voltage * voltage / separation;
    elastic - electric
}

/// Local extrema of `U` on a uniform grid over `[0, g]`.
///
/// The rest end `z = 0` counts as a minimum when `U` rises away from it; the
/// contact end `z = g` is never reported.
pub fn scan_potential(
    voltage: f64,
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
    spring: &SpringModel,
    n_points: usize,
) -> Result<GridScanResult> {
    if n_points < 1000 {
        return Err(Error::invalid(
            "n_points",
            format!("need at least 1000, got {n_points}"),
        ));
    }
    let g = geom.gap();
    let spacing = g / (n_points - 1) as f64;
    let grid_points: Vec<(f64, f64)> = (0..n_points)
        .map(|i| {
            let z = if i == n_points - 1 {
                g
            } else {
                i as f64 * spacing
            };
            (z, potential_energy(z, voltage, geom, stack, fluid, spring))
        })
        .collect();

    let u: Vec<f64> = grid_points.iter().map(|p| p.1).collect();
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    if u[0] < u[1] {
        minima.push(grid_points[0].0);
    }
    for i in 1..n_points - 1 {
        if u[i] < u[i - 1] && u[i] <= u[i + 1] {
            minima.push(grid_points[i].0);
        } else if u[i] > u[i - 1] && u[i] >= u[i + 1] {
            maxima.push(grid_points[i].0);
        }
    }
    Ok(GridScanResult {
        grid_points,
        minima,
        maxima,
        spacing,
    })
}

/// Relative mismatch between `−dU/dz` by central differences and the
/// analytic net force `F_elect − k z`.
#[allow(clippy::too_many_arguments)]
pub fn finite_difference_force_check(
    z: f64,
    voltage: f64,
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
    spring: &SpringModel,
    h: f64,
) -> Result<f64> {
    let g = geom.gap();
    if !(h > 0.0 && z > h && z < g - h) {
        return Err(Error::invalid(
            "z",
            format!("need h < z < g - h, got z = {z:e}, h = {h:e}"),
        ));
    }
    let u = |z: f64| potential_energy(z, voltage, geom, stack, fluid, spring);
    let fd = -(u(z + h) - u(z - h)) / (2.0 * h);

    let separation = effective_dielectric_thickness(stack, fluid) + g - z;
    let electric = 0.5 * EPS0 * fluid.eps() * geom.electrode_area() * voltage * voltage
        / (separation * separation);
    let elastic = spring.k() * z;
    let scale = electric.abs() + elastic.abs();
    Ok((fd - (electric - elastic)).abs() / scale)
}

/// Default step `10⁻⁶·g`.
pub fn default_fd_step(geom: &ActuatorGeometry) -> f64 {
    1e-6 * geom.gap()
}

/// Steady state of `m ẍ + γ ẋ + k x = F cos ωt` as `(amplitude, phase)`.
///
/// An undamped system driven exactly at resonance reports an infinite amplitude.
pub fn lorentzian_oracle(
    omega: f64,
    force: f64,
    m_star: f64,
    gamma_total: f64,
    k: f64,
) -> (f64, f64) {
    let detuning = k / m_star - omega * omega;
    let loss = gamma_total * omega / m_star;
    let denom = (detuning * detuning + loss * loss).sqrt();
    if denom == 0.0 {
        return (f64::INFINITY, -std::f64::consts::FRAC_PI_2);
    }
    ((force / m_star) / denom, -loss.atan2(detuning))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fluid_preset, presets::*};

    #[test]
    fn rest_state_has_single_minimum_at_zero() {
        let air = fluid_preset("air").unwrap();
        let scan = scan_potential(
            0.0,
            &cantilever_geometry(),
            &nitride_stack(),
            &air,
            &calibrated_spring(),
            10_000,
        )
        .unwrap();
        assert_eq!(scan.minima, vec![0.0]);
        assert!(scan.maxima.is_empty());
    }

    #[test]
    fn four_volts_in_air() {
        let air = fluid_preset("air").unwrap();
        let scan = scan_potential(
            4.0,
            &cantilever_geometry(),
            &nitride_stack(),
            &air,
            &calibrated_spring(),
            10_000,
        )
        .unwrap();
        assert_eq!(scan.minima.len(), 1);
        assert_eq!(scan.maxima.len(), 1);
        assert!((scan.minima[0] - 9.3e-8).abs() < 1e-9 + scan.spacing);
        assert!(scan.maxima[0] > scan.minima[0]);
    }

    #[test]
    fn above_pull_in_the_landscape_is_monotone() {
        let air = fluid_preset("air").unwrap();
        let scan = scan_potential(
            9.0,
            &cantilever_geometry(),
            &nitride_stack(),
            &air,
            &calibrated_spring(),
            10_000,
        )
        .unwrap();
        assert!(scan.minima.is_empty());
        assert!(scan.maxima.is_empty());
        assert!(scan.grid_points.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn too_coarse_grid_rejected() {
        let air = fluid_preset("air").unwrap();
        assert!(scan_potential(
            1.0,
            &cantilever_geometry(),
            &nitride_stack(),
            &air,
            &calibrated_spring(),
            999
        )
        .is_err());
    }

    #[test]
    fn fd_force_check() {
        let geom = cantilever_geometry();
        let stack = nitride_stack();
        let air = fluid_preset("air").unwrap();
        let spring = calibrated_spring();
        let h = default_fd_step(&geom);
        for &(z, v) in &[(1e-7, 3.0), (5e-7, 7.0), (1.5e-6, 1.0), (3e-7, 0.0)] {
            let err = finite_difference_force_check(z, v, &geom, &stack, &air, &spring, h).unwrap();
            assert!(err < 1e-6, "z={z} v={v} err={err}");
        }
        // truncation-dominated regime shows the second-order stencil
        let e1 =
            finite_difference_force_check(1e-6, 5.0, &geom, &stack, &air, &spring, 1e-7).unwrap();
        let e2 =
            finite_difference_force_check(1e-6, 5.0, &geom, &stack, &air, &spring, 5e-8).unwrap();
        let ratio = e1 / e2;
        assert!((3.8..4.2).contains(&ratio), "{ratio}");
        assert!(finite_difference_force_check(0.0, 5.0, &geom, &stack, &air, &spring, h).is_err());
    }

    #[test]
    fn lorentzian_limits() {
        let (a, p) = lorentzian_oracle(0.0, 2.0, 1e-10, 1e-7, 4.0);
        assert!((a - 0.5).abs() < 1e-15);
        assert_eq!(p, 0.0);
        let (a, p) = lorentzian_oracle(2e5, 1.0, 1e-10, 0.0, 4.0);
        assert!(a.is_infinite());
        assert_eq!(p, -std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn lorentzian_peak_is_about_q_in_air() {
        use crate::dynamics::{modal_stiffness, resonance_in_fluid};
        use crate::model::StructuralMaterial;
        let geom = cantilever_geometry();
        let mat = StructuralMaterial::polysilicon();
        let air = fluid_preset("air").unwrap();
        let p = resonance_in_fluid(&geom, &mat, &air).unwrap();
        let k = modal_stiffness(&geom, &mat).k();
        let (a, _) = lorentzian_oracle(p.omega_hyd, 1e-9, p.effective_mass, p.damping, k);
        let gain = a * k / 1e-9;
        assert!((gain - p.q_factor).abs() / p.q_factor < 1e-9, "{gain}");
        assert!((gain - 98.0).abs() < 0.5);
    }
}
