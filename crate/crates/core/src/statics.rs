//! Static force balance of the lumped spring-capacitor actuator.
//!
//! With `G = g + d` the balance `½ε0εS V²/(G − z)² = k z` is rearranged to the
//! cubic `h(z) = k z (G − z)² − ½ε0εS V² = 0`. Since `h'(z) = k (G − z)(G − 3z)`
//! the cubic rises on `[0, G/3]` and falls beyond, so every root in `[0, g]`
//! sits in one of at most two monotone brackets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{
    effective_dielectric_thickness, pull_in_suppressed, ActuatorGeometry, DielectricStack,
    DriveKind, DriveSignal, FluidMedium, SpringModel, EPS0,
};

pub const DISPLACEMENT_TOL: f64 = 1e-12;
pub const RESIDUAL_TOL: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub displacement: f64,
    pub stability: Stability,
    /// `F_elect − k z` at the root, in newtons.
    pub residual: f64,
}

impl EquilibriumPoint {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticSweepRow {
    pub voltage: f64,
    pub displacement: f64,
    pub stable: bool,
    pub pulled_in: bool,
}

/// Attractive electrostatic force on the mobile plate at displacement `z`.
pub fn electrostatic_force(
    z: f64,
    voltage: f64,
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
) -> Result<f64> {
    let g = geom.gap();
    if !(0.0..=g).contains(&z) {
        return Err(Error::invalid(
            "z",
            format!("{z:e} m lies outside [0, {g:e}] m"),
        ));
    }
    if voltage == 0.0 {
        return Ok(0.0);
    }
    let d = effective_dielectric_thickness(stack, fluid);
    let separation = d + g - z;
    if separation <= 0.0 {
        return Err(Error::TouchingSingularity);
    }
    Ok(
        0.5 * EPS0 * fluid.eps() * geom.electrode_area() * voltage * voltage
            / (separation * separation),
    )
}

/// True when the dielectric stack suppresses pull-in over the whole gap.
pub fn stability_condition(stack: &DielectricStack, fluid: &FluidMedium, gap: f64) -> bool {
    pull_in_suppressed(effective_dielectric_thickness(stack, fluid), gap)
}

/// `(g + d)/3` when that lies inside the gap, otherwise `None`.
pub fn pull_in_displacement(
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
) -> Option<f64> {
    let d = effective_dielectric_thickness(stack, fluid);
    let z = (geom.gap() + d) / 3.0;
    (z < geom.gap()).then_some(z)
}

pub fn pull_in_voltage(
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
    spring: &SpringModel,
) -> Option<f64> {
    pull_in_displacement(geom, stack, fluid)?;
    let big_g = geom.gap() + effective_dielectric_thickness(stack, fluid);
    Some(
        (8.0 * spring.k() * big_g.powi(3) / (27.0 * EPS0 * fluid.eps() * geom.electrode_area()))
            .sqrt(),
    )
}

/// Pull-in voltage found by bisecting on V for the loss of the stable root.
///
/// Returns `None` when the stable branch survives all the way to contact.
pub fn pull_in_voltage_numeric(
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
    spring: &SpringModel,
) -> Result<Option<f64>> {
    let stable_root = |v: f64| -> Result<Option<f64>> {
        Ok(solve_equilibria(v, geom, stack, fluid, spring)?
            .into_iter()
            .find(EquilibriumPoint::is_stable)
            .map(|p| p.displacement))
    };

    let mut lo = 0.0;
    let mut hi =
        (spring.k() * geom.gap().powi(3) / (EPS0 * fluid.eps() * geom.electrode_area())).sqrt();
    let mut expansions = 0;
    while stable_root(hi)?.is_some() {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > MAX_ITERATIONS {
            return Err(Error::NonConvergence {
                what: "pull-in voltage bracket",
                iterations: expansions,
            });
        }
    }

    let mut iterations = 0;
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if stable_root(mid)?.is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::NonConvergence {
                what: "pull-in voltage bisection",
                iterations,
            });
        }
    }

    // If the last stable position is the electrode itself the gap closed
    // smoothly and there is no instability.
    let last = stable_root(lo)?.unwrap_or(0.0);
    if geom.gap() - last <= 1e-6 * geom.gap() {
        Ok(None)
    } else {
        Ok(Some(0.5 * (lo + hi)))
    }
}

/// Voltage at which the plate reaches the electrode, by either route.
///
/// With pull-in suppressed this is the stable `z = g` solution; otherwise
/// the collapse at the pull-in voltage closes the gap.
pub fn gap_close_voltage(
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
    spring: &SpringModel,
) -> f64 {
    stable_close_voltage(geom, stack, fluid, spring)
        .ok()
        .or_else(|| pull_in_voltage(geom, stack, fluid, spring))
        .expect("pull-in exists whenever stable closure does not")
}

/// Voltage that brings the plate to `z = g` along the stable branch.
pub fn stable_close_voltage(
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
    spring: &SpringModel,
) -> Result<f64> {
    let d = effective_dielectric_thickness(stack, fluid);
    let g = geom.gap();
    if !pull_in_suppressed(d, g) {
        return Err(Error::ModeMismatch {
            observation: "stable closure",
            reason: format!(
                "d = {d:e} m <= 2g = {:e} m, the plate pulls in first",
                2.0 * g
            ),
        });
    }
    Ok((2.0 * spring.k() * g * d * d / (EPS0 * fluid.eps() * geom.electrode_area())).sqrt())
}

struct Cubic {
    k: f64,
    big_g: f64,
    c: f64,
}

impl Cubic {
    fn h(&self, z: f64) -> f64 {
        let s = self.big_g - z;
        self.k * z * s * s - self.c
    }

    fn dh(&self, z: f64) -> f64 {
        self.k * (self.big_g - z) * (self.big_g - 3.0 * z)
    }

    /// Root of `h` in `[lo, hi]` where `h` is monotone and changes sign.
    fn root(&self, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
        let mut f_lo = self.h(lo);
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if self.h(hi) == 0.0 {
            return Ok(hi);
        }
        let mut z = 0.5 * (lo + hi);
        for _ in 0..MAX_ITERATIONS {
            let f = self.h(z);
            if f == 0.0 {
                return Ok(z);
            }
            if (f < 0.0) == (f_lo < 0.0) {
                lo = z;
                f_lo = f;
            } else {
                hi = z;
            }
            if hi - lo <= tol {
                return Ok(0.5 * (lo + hi));
            }
            let slope = self.dh(z);
            let newton = z - f / slope;
            if slope != 0.0 && newton > lo && newton < hi {
                if (newton - z).abs() <= tol {
                    return Ok(newton);
                }
                z = newton;
            } else {
                z = 0.5 * (lo + hi);
            }
        }
        Err(Error::NonConvergence {
            what: "equilibrium root",
            iterations: MAX_ITERATIONS,
        })
    }
}

/// All force-balance roots in `[0, g]`, ordered by displacement.
pub fn solve_equilibria(
    voltage: f64,
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
    spring: &SpringModel,
) -> Result<Vec<EquilibriumPoint>> {
    if !(voltage.is_finite() && voltage >= 0.0) {
        return Err(Error::invalid(
            "voltage",
            format!("must be >= 0, got {voltage}"),
        ));
    }
    let k = spring.k();
    let g = geom.gap();
    if voltage == 0.0 {
        return Ok(vec![EquilibriumPoint {
            displacement: 0.0,
            stability: Stability::Stable,
            residual: 0.0,
        }]);
    }

    let d = effective_dielectric_thickness(stack, fluid);
    let e_s = EPS0 * fluid.eps() * geom.electrode_area();
    let cubic = Cubic {
        k,
        big_g: g + d,
        c: 0.5 * e_s * voltage * voltage,
    };
    // steep force gradients near contact need the root to the last few ulps
    let tol = DISPLACEMENT_TOL.min(4.0 * f64::EPSILON * g);
    let z_crit = cubic.big_g / 3.0;

    let mut roots: Vec<(f64, Option<Stability>)> = Vec::new();
    if z_crit >= g {
        if cubic.h(g) >= 0.0 {
            roots.push((cubic.root(0.0, g, tol)?, None));
        }
    } else {
        let peak = cubic.h(z_crit);
        if peak == 0.0 {
            // marginal stability counts as collapse
            roots.push((z_crit, Some(Stability::Unstable)));
        } else if peak > 0.0 {
            roots.push((cubic.root(0.0, z_crit, tol)?, None));
            if cubic.h(g) <= 0.0 {
                roots.push((cubic.root(z_crit, g, tol)?, None));
            }
        }
    }

    roots
        .into_iter()
        .map(|(z, forced)| {
            let separation = cubic.big_g - z;
            if separation <= 0.0 {
                return Err(Error::TouchingSingularity);
            }
            let force = 0.5 * e_s * voltage * voltage / (separation * separation);
            let residual = force - k * z;
            if residual.abs() >= RESIDUAL_TOL * k * g {
                return Err(Error::NonConvergence {
                    what: "equilibrium residual",
                    iterations: MAX_ITERATIONS,
                });
            }
            let stability = forced.unwrap_or(if k > e_s * voltage * voltage / separation.powi(3) {
                Stability::Stable
            } else {
                Stability::Unstable
            });
            Ok(EquilibriumPoint {
                displacement: z,
                stability,
                residual,
            })
        })
        .collect()
}

/// Displacement along the stable branch for a ramp of DC voltages.
///
/// A voltage range of zero length yields a single row.
#[allow(clippy::too_many_arguments)]
pub fn static_sweep(
    v_start: f64,
    v_stop: f64,
    steps: usize,
    geom: &ActuatorGeometry,
    stack: &DielectricStack,
    fluid: &FluidMedium,
    spring: &SpringModel,
    exec: Execution,
) -> Result<Vec<StaticSweepRow>> {
    if !(v_start >= 0.0 && v_stop >= v_start && v_stop.is_finite()) {
        return Err(Error::invalid(
            "voltage range",
            format!("need 0 <= start <= stop, got [{v_start}, {v_stop}]"),
        ));
    }
    let voltages: Vec<f64> = if v_stop == v_start {
        vec![v_start]
    } else {
        if steps < 2 {
            return Err(Error::invalid(
                "steps",
                format!("need at least 2, got {steps}"),
            ));
        }
        let span = v_stop - v_start;
        (0..steps)
            .map(|i| v_start + span * i as f64 / (steps - 1) as f64)
            .collect()
    };
    let pull_in_possible = !stability_condition(stack, fluid, geom.gap());

    exec.try_map(&voltages, |&voltage| {
        let roots = solve_equilibria(voltage, geom, stack, fluid, spring)?;
        Ok(match roots.iter().find(|p| p.is_stable()) {
            Some(p) => StaticSweepRow {
                voltage,
                displacement: p.displacement,
                stable: true,
                pulled_in: false,
            },
            // past the closure voltage the plate rests on the electrode
            None => StaticSweepRow {
                voltage,
                displacement: geom.gap(),
                stable: !pull_in_possible,
                pulled_in: pull_in_possible,
            },
        })
    })
}

/// DC level for DC drives, `V_rms` for AC drives.
pub fn equivalent_dc_voltage(drive: &DriveSignal) -> f64 {
    drive.voltage()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ScreeningStatus {
    Ok,
    Warning {
        screening_frequency: f64,
        message: String,
    },
}

impl ScreeningStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, ScreeningStatus::Ok)
    }
}

/// Flags drives that ionic screening in a conductive medium would cancel.
pub fn screening_check(drive: &DriveSignal, fluid: &FluidMedium) -> ScreeningStatus {
    let Some(fc) = fluid.screening_frequency() else {
        return ScreeningStatus::Ok;
    };
    let message = match (drive.kind(), drive.drive_frequency()) {
        (DriveKind::Ac, Some(f)) if f >= fc => return ScreeningStatus::Ok,
        (DriveKind::Ac, Some(f)) => format!(
            "AC drive at {f} Hz is below the {fc} Hz screening frequency of {}",
            fluid.name()
        ),
        _ => format!(
            "DC drive in {} will be screened; use AC above {fc} Hz",
            fluid.name()
        ),
    };
    ScreeningStatus::Warning {
        screening_frequency: fc,
        message,
    }
}
