//! Time-domain integration of the driven, damped lumped oscillator
//!
//! ```text
//! m* z̈ = −k z − (γ + c_sq) ż + F_elect(t, z)
//! ```
//!
//! with fixed-step classical RK4. `m*` and `γ` are frozen for the whole run at
//! one evaluation frequency; the electrostatic force uses the instantaneous
//! gap, so a DC step above pull-in runs into contact.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{damping_coefficient, effective_mass, structural_mass};
use crate::error::{Error, Result};
use crate::model::{
    effective_dielectric_thickness, Actuator, ActuatorGeometry, DriveKind, DriveSignal,
    FluidMedium, EPS0,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SqueezeGapMode {
    /// `η w³ / g³` with the rest gap.
    #[default]
    Fixed,
    /// `η w³ / (g − z)³` with the instantaneous gap.
    Instantaneous,
}

/// Near-surface squeeze-out damping.
///
/// The coefficient `η w³ / g³` is used exactly as written: dimensionally it is
/// kg·m⁻¹·s⁻¹, one length short of a damping coefficient, and it is applied
/// as if it were kg·s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct SqueezeFilmOption {
    pub enabled: bool,
    pub gap_mode: SqueezeGapMode,
}

impl SqueezeFilmOption {
    pub fn on() -> Self {
        Self {
            enabled: true,
            gap_mode: SqueezeGapMode::Fixed,
        }
    }

    pub fn coefficient(&self, geom: &ActuatorGeometry, fluid: &FluidMedium, z: f64) -> f64 {
        if !self.enabled {
            return 0.0;
        }
        let gap = match self.gap_mode {
            SqueezeGapMode::Fixed => geom.gap(),
            SqueezeGapMode::Instantaneous => (geom.gap() - z).max(f64::MIN_POSITIVE),
        };
        fluid.eta() * geom.width().powi(3) / gap.powi(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransientSample {
    pub time: f64,
    pub displacement: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientConfig {
    pub duration: f64,
    pub dt: f64,
    pub z0: f64,
    pub v0: f64,
    pub squeeze: SqueezeFilmOption,
    /// Frequency (Hz) at which m* and γ are frozen. Defaults to the force
    /// frequency of an AC drive, or the natural frequency otherwise.
    pub evaluation_frequency: Option<f64>,
    /// Linear ramp of the drive amplitude from zero over this many seconds.
    pub voltage_ramp: Option<f64>,
}

impl TransientConfig {
    pub fn new(duration: f64, dt: f64) -> Self {
        Self {
            duration,
            dt,
            z0: 0.0,
            v0: 0.0,
            squeeze: SqueezeFilmOption::default(),
            evaluation_frequency: None,
            voltage_ramp: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub samples: Vec<TransientSample>,
    /// Time at which the plate reached the electrode; the trace stops before it.
    pub contact_time: Option<f64>,
    pub effective_mass: f64,
    pub damping: f64,
    pub squeeze_coefficient: f64,
    pub stiffness: f64,
    /// Frequency at which `effective_mass` and `damping` were evaluated, Hz.
    pub evaluated_at: f64,
    /// `√(k/m*)/2π` of the lumped oscillator, Hz.
    pub natural_frequency: f64,
}

impl Trace {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }
    pub fn displacements(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.displacement).collect()
    }
    /// `2 m*/γ`, the amplitude time constant of the frozen oscillator.
    pub fn time_constant(&self) -> f64 {
        2.0 * self.effective_mass / (self.damping + self.squeeze_coefficient)
    }
}

/// Natural frequency of `k` against the frequency-dependent mass, solved
/// self-consistently, Hz.
pub fn lumped_natural_frequency(k: f64, actuator: &Actuator, fluid: &FluidMedium) -> Result<f64> {
    let geom = &actuator.geometry;
    let mat = &actuator.material;
    let mut f = (k / structural_mass(geom, mat)).sqrt() / (2.0 * PI);
    if fluid.is_vacuum() {
        return Ok(f);
    }
    for _ in 0..100 {
        let next = (k / effective_mass(2.0 * PI * f, geom, mat, fluid)?).sqrt() / (2.0 * PI);
        if (next - f).abs() <= 1e-13 * next {
            return Ok(next);
        }
        f = next;
    }
    Err(Error::NonConvergence {
        what: "lumped natural frequency",
        iterations: 100,
    })
}

/// One classical RK4 step of `ẏ = f(t, y)`.
pub fn rk4_step<F>(f: &F, t: f64, y: [f64; 2], dt: f64) -> [f64; 2]
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * dt, add(y, k1, 0.5 * dt));
    let k3 = f(t + 0.5 * dt, add(y, k2, 0.5 * dt));
    let k4 = f(t + dt, add(y, k3, dt));
    [
        y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

pub fn simulate(
    actuator: &Actuator,
    fluid: &FluidMedium,
    drive: &DriveSignal,
    config: &TransientConfig,
) -> Result<Trace> {
    let geom = &actuator.geometry;
    let g = geom.gap();
    let k = actuator.spring.k();
    let TransientConfig {
        duration,
        dt,
        z0,
        v0,
        squeeze,
        ..
    } = *config;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::invalid(
            "duration",
            format!("must be > 0, got {duration}"),
        ));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    if z0.abs() > g || !z0.is_finite() || !v0.is_finite() {
        return Err(Error::invalid(
            "z0",
            format!("|z0| must not exceed the gap, got {z0:e}"),
        ));
    }

    let natural_frequency = lumped_natural_frequency(k, actuator, fluid)?;
    if dt > 1.0 / (20.0 * natural_frequency) {
        return Err(Error::invalid(
            "dt",
            format!(
                "{dt:e} s exceeds 1/(20 f_n) = {:e} s for f_n = {natural_frequency:.6e} Hz",
                1.0 / (20.0 * natural_frequency)
            ),
        ));
    }
    let evaluated_at =
        config
            .evaluation_frequency
            .unwrap_or(match (drive.kind(), drive.drive_frequency()) {
                (DriveKind::Ac, Some(f)) => 2.0 * f,
                _ => natural_frequency,
            });
    let omega_eval = 2.0 * PI * evaluated_at;
    let mass = effective_mass(omega_eval, geom, &actuator.material, fluid)?;
    let damping = damping_coefficient(omega_eval, geom, fluid)?;
    let squeeze_fixed = squeeze.coefficient(geom, fluid, 0.0);
    // explicit RK4 loses stability once the decay rate times dt passes ~2.78
    if (damping + squeeze_fixed) / mass * dt > 2.5 {
        return Err(Error::invalid(
            "dt",
            format!(
                "{dt:e} s is too large for the damping rate {:e} 1/s",
                (damping + squeeze_fixed) / mass
            ),
        ));
    }

    let big_g = g + effective_dielectric_thickness(&actuator.stack, fluid);
    let e_s = 0.5 * EPS0 * fluid.eps() * geom.electrode_area();
    let ramp = config.voltage_ramp.filter(|r| *r > 0.0);
    let rhs = |t: f64, y: [f64; 2]| -> [f64; 2] {
        let [z, v] = y;
        let mut volts = drive.instantaneous(t);
        if let Some(r) = ramp {
            volts *= (t / r).min(1.0);
        }
        let separation = big_g - z;
        let f_elect = if volts == 0.0 {
            0.0
        } else {
            e_s * volts * volts / (separation * separation)
        };
        let c = damping + squeeze.coefficient(geom, fluid, z);
        [v, (f_elect - k * z - c * v) / mass]
    };

    let steps = (duration / dt - 1e-9).ceil() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(TransientSample {
        time: 0.0,
        displacement: z0,
        velocity: v0,
    });
    let mut y = [z0, v0];
    let mut contact_time = None;
    for i in 0..steps {
        let t = i as f64 * dt;
        y = rk4_step(&rhs, t, y, dt);
        let time = (i + 1) as f64 * dt;
        // a blown-up state counts as contact too
        if y[0] >= g || y[0].is_nan() {
            contact_time = Some(time);
            break;
        }
        samples.push(TransientSample {
            time,
            displacement: y[0],
            velocity: y[1],
        });
    }

    Ok(Trace {
        samples,
        contact_time,
        effective_mass: mass,
        damping,
        squeeze_coefficient: squeeze_fixed,
        stiffness: k,
        evaluated_at,
        natural_frequency,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeResult {
    /// Centre of each oscillation period, s.
    pub times: Vec<f64>,
    /// Half peak-to-peak displacement per period, m.
    pub envelope: Vec<f64>,
    /// Amplitude time constant; 0 when there is no transient to fit.
    pub tau: f64,
    pub settling_time_99: f64,
    pub period: f64,
    pub steady_amplitude: f64,
}

const STEADY_PERIODS: usize = 10;

/// Vertex of the parabola through three equally spaced samples.
fn parabolic_peak(y0: f64, y1: f64, y2: f64) -> f64 {
    let denom = y0 - 2.0 * y1 + y2;
    if denom == 0.0 {
        return y1;
    }
    let offset = 0.5 * (y0 - y2) / denom;
    y1 - 0.25 * (y0 - y2) * offset
}

/// Oscillation period from upward crossings of the tail mean.
fn detect_period(t: &[f64], z: &[f64]) -> Option<f64> {
    let half = z.len() / 2;
    let tail = &z[half..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let mut crossings = Vec::new();
    for i in half.max(1)..z.len() {
        if z[i - 1] < mean && z[i] >= mean {
            let frac = (mean - z[i - 1]) / (z[i] - z[i - 1]);
            crossings.push(t[i - 1] + frac * (t[i] - t[i - 1]));
        }
    }
    if crossings.len() < 3 {
        return None;
    }
    Some((crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
}

/// Half peak-to-peak amplitude of each whole period, counted back from the end.
fn per_period_amplitudes(t: &[f64], z: &[f64], period: f64) -> (Vec<f64>, Vec<f64>) {
    let dt = t[1] - t[0];
    let per = period / dt;
    let n = ((t.len() - 1) as f64 / per).floor() as usize;
    let last = t.len() - 1;
    let mut times = Vec::with_capacity(n);
    let mut amps = Vec::with_capacity(n);
    for j in (0..n).rev() {
        let hi = last - (j as f64 * per).round() as usize;
        let lo = last - ((j + 1) as f64 * per).round() as usize;
        let window = lo..=hi;
        let (mut imax, mut imin) = (lo, lo);
        for i in window {
            if z[i] > z[imax] {
                imax = i;
            }
            if z[i] < z[imin] {
                imin = i;
            }
        }
        let refine = |i: usize| {
            if i > 0 && i < last {
                parabolic_peak(z[i - 1], z[i], z[i + 1])
            } else {
                z[i]
            }
        };
        times.push(0.5 * (t[lo] + t[hi]));
        amps.push(0.5 * (refine(imax) - refine(imin)));
    }
    (times, amps)
}

/// Least-squares `c0 + a cos ωt + b sin ωt` over `range`.
fn fit_sinusoid(t: &[f64], z: &[f64], omega: f64, range: std::ops::Range<usize>) -> [f64; 3] {
    let t_ref = t[range.start];
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for i in range {
        let arg = omega * (t[i] - t_ref);
        let row = [1.0, arg.cos(), arg.sin()];
        for r in 0..3 {
            atb[r] += row[r] * z[i];
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
        }
    }
    let sol = solve3(ata, atb);
    // re-express the phase relative to t = 0
    let (c, s) = ((omega * t_ref).cos(), (omega * t_ref).sin());
    [sol[0], sol[1] * c - sol[2] * s, sol[1] * s + sol[2] * c]
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            for c in col..3 {
                a[row][c] -= factor * a[col][c];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

/// Decay time of the transient part of the trace.
///
/// The steady-state sinusoid fitted to the final periods is subtracted; what
/// remains of a linear oscillator is a single decaying mode `e^(−t/τ)`, so
/// `ln|residual|` at its extrema is a straight line whose slope is `−1/τ`.
fn fit_time_constant(t: &[f64], z: &[f64], period: f64) -> f64 {
    let omega = 2.0 * PI / period;
    let dt = t[1] - t[0];
    let tail = ((STEADY_PERIODS as f64 * period / dt).round() as usize).min(t.len());
    let [c0, a, b] = fit_sinusoid(t, z, omega, t.len() - tail..t.len());
    let residual: Vec<f64> = t
        .iter()
        .zip(z)
        .map(|(&ti, &zi)| (zi - (c0 + a * (omega * ti).cos() + b * (omega * ti).sin())).abs())
        .collect();
    let biggest = residual.iter().cloned().fold(0.0, f64::max);
    let scale = a.hypot(b) + c0.abs();
    if biggest <= 1e-6 * scale || biggest == 0.0 {
        return 0.0;
    }
    let floor = 1e-3 * biggest;
    let mut points = Vec::new();
    for i in 1..residual.len() - 1 {
        let r = residual[i];
        if r > floor && r > residual[i - 1] && r >= residual[i + 1] {
            points.push((t[i], parabolic_peak(residual[i - 1], r, residual[i + 1])));
        }
    }
    if points.len() < 3 {
        return 0.0;
    }
    // Weighted by r² so the small extrema, where leftover error from the
    // steady fit is largest in relative terms, count least.
    let w: Vec<f64> = points.iter().map(|p| p.1 * p.1).collect();
    let sw: f64 = w.iter().sum();
    let mx = points.iter().zip(&w).map(|(p, w)| w * p.0).sum::<f64>() / sw;
    let my = points
        .iter()
        .zip(&w)
        .map(|(p, w)| w * p.1.ln())
        .sum::<f64>()
        / sw;
    let sxy: f64 = points
        .iter()
        .zip(&w)
        .map(|(p, w)| w * (p.0 - mx) * (p.1.ln() - my))
        .sum();
    let sxx: f64 = points
        .iter()
        .zip(&w)
        .map(|(p, w)| w * (p.0 - mx).powi(2))
        .sum();
    let slope = sxy / sxx;
    if slope < 0.0 {
        -1.0 / slope
    } else {
        0.0
    }
}

fn settling_time(times: &[f64], envelope: &[f64], final_value: f64, start: f64) -> f64 {
    let top = envelope.iter().cloned().fold(0.0, f64::max);
    let reference = if final_value.abs() > 0.01 * top {
        final_value.abs()
    } else {
        top
    };
    let band = 0.01 * reference;
    match envelope
        .iter()
        .rposition(|e| (e - final_value).abs() > band)
    {
        None => start,
        Some(i) if i + 1 >= envelope.len() => times[i],
        Some(i) => {
            // interpolate where the envelope enters the band
            let (e0, e1) = (envelope[i] - final_value, envelope[i + 1] - final_value);
            let target = band.copysign(e0);
            let frac = if e1 == e0 {
                1.0
            } else {
                ((target - e0) / (e1 - e0)).clamp(0.0, 1.0)
            };
            times[i] + frac * (times[i + 1] - times[i])
        }
    }
}

pub fn envelope(trace: &Trace) -> Result<EnvelopeResult> {
    let t = trace.times();
    let z = trace.displacements();
    if t.len() < 4 {
        return Err(Error::TraceTooShort(format!("{} samples", t.len())));
    }
    let period = detect_period(&t, &z)
        .ok_or_else(|| Error::TraceTooShort("no oscillation found in the second half".into()))?;
    let span = t[t.len() - 1] - t[0];
    if span < STEADY_PERIODS as f64 * period {
        return Err(Error::TraceTooShort(format!(
            "{:.2} periods, need at least {STEADY_PERIODS}",
            span / period
        )));
    }
    let (times, env) = per_period_amplitudes(&t, &z, period);
    let steady_amplitude =
        env[env.len() - STEADY_PERIODS..].iter().sum::<f64>() / STEADY_PERIODS as f64;
    let tau = fit_time_constant(&t, &z, period);
    let settling_time_99 = settling_time(&times, &env, steady_amplitude, t[0]);
    Ok(EnvelopeResult {
        times,
        envelope: env,
        tau,
        settling_time_99,
        period,
        steady_amplitude,
    })
}

/// Mean half peak-to-peak amplitude over the final ten periods.
pub fn steady_state_amplitude(trace: &Trace) -> Result<f64> {
    if trace
        .samples
        .iter()
        .all(|s| s.displacement == trace.samples[0].displacement)
    {
        return Ok(0.0);
    }
    let env = envelope(trace)?;
    let tail = &env.envelope[env.envelope.len() - STEADY_PERIODS..];
    let rise = (tail[STEADY_PERIODS - 1] - tail[0]) / (STEADY_PERIODS - 1) as f64;
    if env.steady_amplitude > 0.0 && rise > 0.01 * env.steady_amplitude {
        return Err(Error::NotSettled(format!(
            "envelope still rising {:.2}% per period",
            100.0 * rise / env.steady_amplitude
        )));
    }
    Ok(env.steady_amplitude)
}
