//! Steady-state harmonic response from the period-averaged Lagrangian.
//!
//! The trial motion `z = A cos(ωt + φ)` is carried in Cartesian form
//! `z = x cos ωt + y sin ωt` (`x = A cos φ`, `y = −A sin φ`). The Lagrangian
//!
//! ```text
//! L = ½ m* ż² − ½ k z² + F cos(ωt)·z − γ z ż_p
//! ```
//!
//! is averaged over one period by uniform quadrature, where `ż_p` is the
//! velocity along the physical path and is held fixed while varying. The
//! sign on the dissipative term makes it remove energy. Stationarity of `⟨L⟩`
//! in `(x, y)` is equivalent to stationarity in `(A, φ)` for `A > 0`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::dynamics::{damping_coefficient, effective_mass};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{
    effective_dielectric_thickness, ActuatorGeometry, DielectricStack, DriveKind, DriveSignal,
    FluidMedium, SpringModel, SpringProvenance, StructuralMaterial, EPS0,
};
use crate::transient::SqueezeFilmOption;

/// Quadrature nodes per period; exact for the second-degree trigonometric
/// products that appear in `⟨L⟩`.
const QUADRATURE_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponsePoint {
    /// Mechanical (force) frequency, Hz.
    pub frequency: f64,
    pub amplitude: f64,
    /// Phase lag in (−π, 0].
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceDecomposition {
    pub static_component: f64,
    pub harmonic_amplitude: f64,
    /// Frequency of the harmonic component, Hz (twice the electrical frequency).
    pub harmonic_frequency: f64,
}

/// Splits the electrostatic force of a drive, linearised at displacement
/// `z0`, into its mean and its oscillating part. With
/// `V² = V_rms²(1 + cos 2ωt)` both parts have the same magnitude.
pub fn decompose_drive_force(
    drive: &DriveSignal,
    z0: f64,
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
) -> Result<ForceDecomposition> {
    let g = geom.gap();
    if !(0.0..g).contains(&z0) {
        return Err(Error::invalid(
            "z0",
            format!("{z0:e} m lies outside [0, {g:e}) m"),
        ));
    }
    let separation = effective_dielectric_thickness(stack, fluid) + g - z0;
    let v = drive.voltage();
    let force =
        0.5 * EPS0 * fluid.eps() * geom.electrode_area() * v * v / (separation * separation);
    Ok(match (drive.kind(), drive.drive_frequency()) {
        (DriveKind::Ac, Some(f)) => ForceDecomposition {
            static_component: force,
            harmonic_amplitude: force,
            harmonic_frequency: 2.0 * f,
        },
        _ => ForceDecomposition {
            static_component: force,
            harmonic_amplitude: 0.0,
            harmonic_frequency: 0.0,
        },
    })
}

/// Spring stiffness reduced by the electrostatic force gradient at `z0`.
pub fn softened_stiffness(
    spring: &SpringModel,
    voltage: f64,
    z0: f64,
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
) -> Result<SpringModel> {
    let separation = effective_dielectric_thickness(stack, fluid) + geom.gap() - z0;
    let gradient =
        EPS0 * fluid.eps() * geom.electrode_area() * voltage * voltage / separation.powi(3);
    let k = spring.k() - gradient;
    if k <= 0.0 {
        return Err(Error::invalid(
            "voltage",
            format!(
                "electrostatic softening {gradient:e} N/m exceeds k = {:e} N/m",
                spring.k()
            ),
        ));
    }
    SpringModel::new(k, SpringProvenance::Direct)
}

/// Coefficients of the period-averaged Lagrangian at one drive frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianModel {
    pub mass: f64,
    pub stiffness: f64,
    pub damping: f64,
    pub force: f64,
    pub omega: f64,
}

impl LagrangianModel {
    fn nodes(&self) -> impl Iterator<Item = (f64, f64)> {
        (0..QUADRATURE_NODES).map(|j| {
            let phase = 2.0 * PI * j as f64 / QUADRATURE_NODES as f64;
            (phase.cos(), phase.sin())
        })
    }

    /// `⟨L⟩` for trial coefficients `(x, y)` with the physical-path velocity
    /// taken from `(xp, yp)`.
    pub fn mean(&self, x: f64, y: f64, xp: f64, yp: f64) -> f64 {
        let w = self.omega;
        let sum: f64 = self
            .nodes()
            .map(|(c, s)| {
                let z = x * c + y * s;
                let zdot = w * (-x * s + y * c);
                let zdot_path = w * (-xp * s + yp * c);
                0.5 * self.mass * zdot * zdot - 0.5 * self.stiffness * z * z + self.force * c * z
                    - self.damping * z * zdot_path
            })
            .sum();
        sum / QUADRATURE_NODES as f64
    }

    /// `(∂⟨L⟩/∂x, ∂⟨L⟩/∂y)` with the path velocity frozen at `(x, y)`.
    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let w = self.omega;
        let mut grad = [0.0; 2];
        for (c, s) in self.nodes() {
            let z = x * c + y * s;
            let zdot = w * (-x * s + y * c);
            let common = -self.stiffness * z + self.force * c - self.damping * zdot;
            // ∂z/∂x = c, ∂ż/∂x = −ωs; ∂z/∂y = s, ∂ż/∂y = ωc
            grad[0] += self.mass * zdot * (-w * s) + common * c;
            grad[1] += self.mass * zdot * (w * c) + common * s;
        }
        grad.map(|g| g / QUADRATURE_NODES as f64)
    }

    /// `(∂⟨L⟩/∂A, ∂⟨L⟩/∂φ)` at amplitude `a` and phase `phi`.
    pub fn polar_gradient(&self, a: f64, phi: f64) -> [f64; 2] {
        let (x, y) = (a * phi.cos(), -a * phi.sin());
        let [gx, gy] = self.gradient(x, y);
        [
            phi.cos() * gx - phi.sin() * gy,
            -a * phi.sin() * gx - a * phi.cos() * gy,
        ]
    }

    /// Stationary point of `⟨L⟩` as `(amplitude, phase)`.
    pub fn solve(&self) -> Result<(f64, f64)> {
        if self.force == 0.0 {
            let unit = LagrangianModel {
                force: 1.0,
                ..*self
            };
            return unit.solve().map(|(_, phase)| (0.0, phase));
        }
        // The gradient is affine in (x, y): recover it from three evaluations.
        let scale = self.force / self.stiffness;
        let b = self.gradient(0.0, 0.0);
        let ex = self.gradient(scale, 0.0);
        let ey = self.gradient(0.0, scale);
        let jac = [
            [(ex[0] - b[0]) / scale, (ey[0] - b[0]) / scale],
            [(ex[1] - b[1]) / scale, (ey[1] - b[1]) / scale],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Ok((f64::INFINITY, -FRAC_PI_2));
        }
        let solve = |r: [f64; 2]| {
            [
                (-r[0] * jac[1][1] + r[1] * jac[0][1]) / det,
                (-r[1] * jac[0][0] + r[0] * jac[1][0]) / det,
            ]
        };
        let mut xy = solve(b);
        // one Newton polish removes the rounding left by the differencing
        let r = self.gradient(xy[0], xy[1]);
        let delta = solve(r);
        xy = [xy[0] + delta[0], xy[1] + delta[1]];

        let amplitude = xy[0].hypot(xy[1]);
        if !amplitude.is_finite() {
            return Err(Error::NonConvergence {
                what: "averaged-Lagrangian stationarity",
                iterations: 1,
            });
        }
        let mut phase = (-xy[1]).atan2(xy[0]);
        if phase > 0.0 {
            phase -= 2.0 * PI;
        }
        Ok((amplitude, phase))
    }
}

/// How the hydrodynamic mass and damping follow the drive frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Loading {
    /// Re-evaluate m*(ω) and γ(ω) at each sweep frequency.
    #[default]
    FrequencyDependent,
    /// Hold m* and γ at their values for this angular frequency.
    Frozen { omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResponseOptions {
    pub squeeze_film: SqueezeFilmOption,
    pub loading: Loading,
}

/// Builds the averaged-Lagrangian coefficients at mechanical frequency `frequency` (Hz).
pub fn lagrangian_at(
    frequency: f64,
    force: f64,
    geom: &ActuatorGeometry,
    mat: &StructuralMaterial,
    fluid: &FluidMedium,
    spring: &SpringModel,
    options: &ResponseOptions,
) -> Result<LagrangianModel> {
    let omega = 2.0 * PI * frequency;
    let loading_omega = match options.loading {
        Loading::FrequencyDependent => omega,
        Loading::Frozen { omega } => omega,
    };
    let mass = effective_mass(loading_omega, geom, mat, fluid)?;
    let damping = damping_coefficient(loading_omega, geom, fluid)?
        + options.squeeze_film.coefficient(geom, fluid, 0.0);
    Ok(LagrangianModel {
        mass,
        stiffness: spring.k(),
        damping,
        force,
        omega,
    })
}

/// Amplitude and phase at each frequency of an ascending grid (Hz).
#[allow(clippy::too_many_arguments)]
pub fn harmonic_response(
    frequencies: &[f64],
    force_amplitude: f64,
    geom: &ActuatorGeometry,
    mat: &StructuralMaterial,
    fluid: &FluidMedium,
    spring: &SpringModel,
    options: &ResponseOptions,
    exec: Execution,
) -> Result<Vec<ResponsePoint>> {
    if !(force_amplitude.is_finite() && force_amplitude >= 0.0) {
        return Err(Error::invalid(
            "force_amplitude",
            format!("must be >= 0, got {force_amplitude}"),
        ));
    }
    if frequencies.iter().any(|&f| !(f.is_finite() && f > 0.0)) {
        return Err(Error::invalid("frequencies", "all frequencies must be > 0"));
    }
    if frequencies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "frequencies",
            "grid must be strictly ascending",
        ));
    }
    exec.try_map(frequencies, |&frequency| {
        let model = lagrangian_at(
            frequency,
            force_amplitude,
            geom,
            mat,
            fluid,
            spring,
            options,
        )?;
        let (amplitude, phase) = model.solve()?;
        Ok(ResponsePoint {
            frequency,
            amplitude,
            phase,
        })
    })
}

/// Uniform frequency grid of `points` values over `[start, stop]`.
pub fn linear_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Point of maximum amplitude.
pub fn peak(points: &[ResponsePoint]) -> Option<ResponsePoint> {
    points
        .iter()
        .copied()
        .max_by(|a, b| a.amplitude.total_cmp(&b.amplitude))
}

/// Divides amplitudes by the peak amplitude of `reference`.
pub fn normalize_response(
    points: &[ResponsePoint],
    reference: &[ResponsePoint],
) -> Result<Vec<ResponsePoint>> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let top = peak(reference).map(|p| p.amplitude).unwrap_or(0.0);
    if !(top > 0.0 && top.is_finite()) {
        return Err(Error::ZeroReference);
    }
    Ok(points
        .iter()
        .map(|p| ResponsePoint {
            amplitude: p.amplitude / top,
            ..*p
        })
        .collect())
}
