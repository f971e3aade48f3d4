use std::f64::consts::PI;
use std::path::PathBuf;

use mems_liquid::dynamics::{
    damping_coefficient, effective_mass, resonance_in_fluid, resonance_in_fluid_at,
};
use mems_liquid::model::effective_dielectric_thickness;
use mems_liquid::oracle::{scan_potential, DEFAULT_GRID_POINTS};
use mems_liquid::response::{
    decompose_drive_force, harmonic_response, linear_grid, softened_stiffness, Loading,
    ResponseOptions,
};
use mems_liquid::statics::{
    gap_close_voltage, pull_in_displacement, pull_in_voltage, pull_in_voltage_numeric,
    screening_check, solve_equilibria, stability_condition, stable_close_voltage, static_sweep,
    ScreeningStatus,
};
use mems_liquid::transient::{envelope, lumped_natural_frequency, simulate, TransientConfig};
use mems_liquid::{Actuator, DriveKind, Execution};
use serde_json::{json, Value};

use crate::config::{Format, RunConfig, SpringSpec};
use crate::error::{CliError, Result};
use crate::output::{
    json_text, record_csv, record_json, table_csv, table_json, write_file, Field, Record, Sink,
};
use crate::report;

/// Everything a command needs once flags and config are merged.
pub struct Context {
    pub config: RunConfig,
    pub format: Format,
    pub sink: Sink,
    pub quiet: bool,
    pub points: Option<usize>,
}

impl Context {
    /// Human-readable summary: stdout when data go to a file, stderr otherwise.
    fn note(&self, text: impl AsRef<str>) {
        if self.quiet {
            return;
        }
        if self.sink.is_stdout() {
            eprintln!("{}", text.as_ref());
        } else {
            println!("{}", text.as_ref());
        }
    }

    fn warn(&self, text: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("warning: {}", text.as_ref());
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        self.sink.write(text).map_err(|source| CliError::Io {
            path: match &self.sink {
                Sink::File(p) => p.clone(),
                Sink::Stdout => PathBuf::from("<stdout>"),
            },
            source,
        })
    }

    fn emit_record(&self, record: &Record) -> Result<()> {
        match self.format {
            Format::Csv => self.emit(&record_csv(record)),
            Format::Json => self.emit(&json_text(&record_json(record))),
        }
    }

    fn emit_table(&self, header: &[&str], rows: &[Vec<Field>], metadata: Record) -> Result<()> {
        match self.format {
            Format::Csv => self.emit(&table_csv(header, rows)),
            Format::Json => self.emit(&json_text(&json!({
                "metadata": record_json(&metadata),
                "rows": table_json(header, rows),
            }))),
        }
    }

    fn screening(&self) -> ScreeningStatus {
        let status = screening_check(&self.config.drive, &self.config.fluid);
        if let ScreeningStatus::Warning { message, .. } = &status {
            self.warn(message);
        }
        status
    }

    fn spring_label(&self) -> &'static str {
        match self.config.spring {
            SpringSpec::Direct(_) => "direct",
            SpringSpec::Calibrated { .. } => "calibrated",
            SpringSpec::Beam(_) => "beam",
            SpringSpec::Modal => "modal",
        }
    }
}

const PEAK_CONVENTION: &str = "damped amplitude peak, f_n sqrt(1 - 1/(2 Q^2))";

/// The squeeze-film coefficient is dimensionally short of a length.
fn squeeze_note(enabled: bool) -> Field {
    if enabled {
        "eta w^3/g^3 has units kg/(m s); applied as a damping coefficient in kg/s".into()
    } else {
        Field::Missing
    }
}

fn screening_field(status: &ScreeningStatus) -> Field {
    match status {
        ScreeningStatus::Ok => "ok".into(),
        ScreeningStatus::Warning { .. } => "warning".into(),
    }
}

pub fn check_stability(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let spring = c.spring()?;
    let g = c.geometry.gap();
    let d = effective_dielectric_thickness(&c.stack, &c.fluid);
    let stable = stability_condition(&c.stack, &c.fluid, g);
    let screening = ctx.screening();
    let record: Record = vec![
        ("fluid", c.fluid.name().into()),
        ("eps_fluid", c.fluid.eps().into()),
        ("d_m", d.into()),
        ("gap_m", g.into()),
        ("stable_over_full_gap", stable.into()),
        (
            "pull_in_z_m",
            pull_in_displacement(&c.geometry, &c.stack, &c.fluid).into(),
        ),
        (
            "pull_in_V",
            pull_in_voltage(&c.geometry, &c.stack, &c.fluid, &spring).into(),
        ),
        (
            "close_V",
            stable_close_voltage(&c.geometry, &c.stack, &c.fluid, &spring)
                .ok()
                .into(),
        ),
        ("k_N_m", spring.k().into()),
        ("screening", screening_field(&screening)),
    ];
    ctx.emit_record(&record)?;
    ctx.note(format!("stable over full gap: {stable}"));
    ctx.note(format!(
        "d = {d:.4e} m, 2g = {:.4e} m ({})",
        2.0 * g,
        c.fluid.name()
    ));
    Ok(())
}

pub fn pull_in(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let spring = c.spring()?;
    let condition2 = stability_condition(&c.stack, &c.fluid, c.geometry.gap());
    let v_pi = pull_in_voltage(&c.geometry, &c.stack, &c.fluid, &spring);
    let v_numeric = pull_in_voltage_numeric(&c.geometry, &c.stack, &c.fluid, &spring)?;
    let record: Record = vec![
        ("fluid", c.fluid.name().into()),
        ("condition2", condition2.into()),
        ("pull_in_V", v_pi.into()),
        (
            "pull_in_z_m",
            pull_in_displacement(&c.geometry, &c.stack, &c.fluid).into(),
        ),
        ("pull_in_V_numeric", v_numeric.into()),
        (
            "gap_close_V",
            gap_close_voltage(&c.geometry, &c.stack, &c.fluid, &spring).into(),
        ),
        ("k_N_m", spring.k().into()),
        ("spring", ctx.spring_label().into()),
    ];
    ctx.emit_record(&record)?;
    match v_pi {
        Some(v) => ctx.note(format!("pull-in at {v:.6} V in {}", c.fluid.name())),
        None => ctx.note(format!(
            "no pull-in in {}: the plate closes the gap stably at {:.6} V",
            c.fluid.name(),
            gap_close_voltage(&c.geometry, &c.stack, &c.fluid, &spring)
        )),
    }
    Ok(())
}

pub fn static_sweep_cmd(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let spring = c.spring()?;
    let v_start = c.solver.v_start.unwrap_or(0.0);
    let v_stop = c
        .solver
        .v_stop
        .unwrap_or_else(|| 1.2 * gap_close_voltage(&c.geometry, &c.stack, &c.fluid, &spring));
    let steps = ctx.points.or(c.solver.steps).unwrap_or(201);
    let rows = static_sweep(
        v_start,
        v_stop,
        steps,
        &c.geometry,
        &c.stack,
        &c.fluid,
        &spring,
        Execution::default(),
    )?;
    let table: Vec<Vec<Field>> = rows
        .iter()
        .map(|r| {
            vec![
                r.voltage.into(),
                r.displacement.into(),
                r.stable.into(),
                r.pulled_in.into(),
            ]
        })
        .collect();
    let metadata: Record = vec![
        ("fluid", c.fluid.name().into()),
        ("k_N_m", spring.k().into()),
        ("gap_m", c.geometry.gap().into()),
        (
            "pull_in_V",
            pull_in_voltage(&c.geometry, &c.stack, &c.fluid, &spring).into(),
        ),
    ];
    ctx.emit_table(
        &["voltage_V", "displacement_m", "stable", "pulled_in"],
        &table,
        metadata,
    )?;
    let first_pull = rows.iter().find(|r| r.pulled_in);
    ctx.note(format!(
        "{} points from {v_start:.4} V to {v_stop:.4} V in {}{}",
        rows.len(),
        c.fluid.name(),
        first_pull.map_or(String::new(), |r| format!(
            ", pulled in from {:.4} V",
            r.voltage
        ))
    ));
    Ok(())
}

pub fn dynamics(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let p = resonance_in_fluid_at(&c.geometry, &c.material, &c.fluid, c.solver.evaluation)?;
    let spring = c.dynamic_spring()?;
    let h = p.hydrodynamic;
    let record: Record = vec![
        ("fluid", c.fluid.name().into()),
        ("f_vacuum_Hz", p.f_vacuum.into()),
        ("f_natural_Hz", p.f_natural_hyd.into()),
        ("f_peak_Hz", p.f_peak.into()),
        ("q", p.q_factor.into()),
        ("m_eff_kg", p.effective_mass.into()),
        ("gamma_kg_s", p.damping.into()),
        ("evaluated_at_Hz", p.evaluated_at.into()),
        ("f_peak_convention", PEAK_CONVENTION.into()),
        ("hydro_gamma_r", h.map(|h| h.gamma_r).into()),
        ("hydro_gamma_i", h.map(|h| h.gamma_i).into()),
        ("delta_over_w", h.map(|h| h.delta_over_w).into()),
        ("iterations", p.iterations.into()),
        ("k_dynamic_N_m", spring.k().into()),
        ("assumed_defaults", c.fluid.assumed_defaults().into()),
    ];
    ctx.emit_record(&record)?;
    if c.fluid.assumed_defaults() {
        ctx.warn(format!(
            "{} uses assumed density and viscosity",
            c.fluid.name()
        ));
    }
    ctx.note(format!(
        "{}: f_n = {:.1} Hz, f_peak = {:.1} Hz, Q = {:.4}",
        c.fluid.name(),
        p.f_natural_hyd,
        p.f_peak,
        p.q_factor
    ));
    Ok(())
}

/// Static operating point on the stable branch at `voltage`.
fn operating_point(ctx: &Context, voltage: f64) -> Result<f64> {
    let c = &ctx.config;
    let roots = solve_equilibria(
        voltage,
        &c.geometry,
        &c.stack,
        &c.fluid,
        &c.dynamic_spring()?,
    )?;
    roots
        .iter()
        .find(|r| r.is_stable())
        .map(|r| r.displacement)
        .filter(|&z| z < c.geometry.gap())
        .ok_or_else(|| {
            CliError::Usage(format!(
                "no stable operating point below contact at {voltage} V"
            ))
        })
}

pub fn freq_response(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let mut spring = c.dynamic_spring()?;
    let p = resonance_in_fluid(&c.geometry, &c.material, &c.fluid)?;
    ctx.screening();

    let (force, z0) = match (c.solver.force, c.drive.kind()) {
        (Some(f), _) => (f, 0.0),
        (None, DriveKind::Ac) => {
            let z0 = operating_point(ctx, c.drive.voltage())?;
            let split = decompose_drive_force(&c.drive, z0, &c.geometry, &c.stack, &c.fluid)?;
            (split.harmonic_amplitude, z0)
        }
        (None, DriveKind::Dc) => {
            return Err(CliError::Usage(
                "freq-response needs an AC drive or `solver.force_N`".into(),
            ))
        }
    };
    if c.solver.softened_stiffness {
        spring = softened_stiffness(
            &spring,
            c.drive.voltage(),
            z0,
            &c.geometry,
            &c.stack,
            &c.fluid,
        )?;
    }
    let options = ResponseOptions {
        squeeze_film: c.solver.squeeze,
        loading: if c.solver.frozen_loading {
            Loading::Frozen { omega: p.omega_hyd }
        } else {
            Loading::FrequencyDependent
        },
    };
    let f_start = c.solver.f_start.unwrap_or(0.5 * p.f_natural_hyd);
    let f_stop = c.solver.f_stop.unwrap_or(1.5 * p.f_natural_hyd);
    let points = ctx.points.or(c.solver.points).unwrap_or(1001);
    let grid = linear_grid(f_start, f_stop, points);
    let response = harmonic_response(
        &grid,
        force,
        &c.geometry,
        &c.material,
        &c.fluid,
        &spring,
        &options,
        Execution::default(),
    )?;
    let top = mems_liquid::response::peak(&response);
    let top_amp = top.map_or(0.0, |t| t.amplitude);
    let rows: Vec<Vec<Field>> = response
        .iter()
        .map(|r| {
            let norm = if top_amp > 0.0 {
                r.amplitude / top_amp
            } else {
                0.0
            };
            vec![
                r.frequency.into(),
                r.amplitude.into(),
                norm.into(),
                r.phase.into(),
            ]
        })
        .collect();
    let metadata: Record = vec![
        ("fluid", c.fluid.name().into()),
        ("force_N", force.into()),
        ("operating_point_m", z0.into()),
        ("k_N_m", spring.k().into()),
        ("f_natural_Hz", p.f_natural_hyd.into()),
        ("peak_frequency_Hz", top.map(|t| t.frequency).into()),
        ("peak_amplitude_m", top.map(|t| t.amplitude).into()),
        (
            "frequency_axis",
            "mechanical; the electrical drive runs at half this".into(),
        ),
        ("squeeze_units", squeeze_note(c.solver.squeeze.enabled)),
    ];
    ctx.emit_table(
        &["frequency_Hz", "amplitude_m", "amplitude_norm", "phase_rad"],
        &rows,
        metadata,
    )?;
    if let Some(t) = top {
        ctx.note(format!(
            "peak {:.4e} m at {:.1} Hz ({})",
            t.amplitude,
            t.frequency,
            c.fluid.name()
        ));
    }
    Ok(())
}

pub fn transient(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let actuator = Actuator {
        geometry: c.geometry,
        stack: c.stack,
        material: c.material,
        spring: c.dynamic_spring()?,
    };
    ctx.screening();
    let f_n = lumped_natural_frequency(actuator.spring.k(), &actuator, &c.fluid)?;
    let dt = c.solver.dt.unwrap_or(1.0 / (40.0 * f_n));
    let duration = match c.solver.duration {
        Some(t) => t,
        None => {
            let omega = 2.0 * PI * f_n;
            let tau = if c.fluid.is_vacuum() {
                f64::INFINITY
            } else {
                2.0 * effective_mass(omega, &c.geometry, &c.material, &c.fluid)?
                    / damping_coefficient(omega, &c.geometry, &c.fluid)?
            };
            // ten time constants, capped for near-undamped media
            (10.0 * tau).min(2000.0 / f_n) + 20.0 / f_n
        }
    };
    let mut config = TransientConfig::new(duration, dt);
    config.z0 = c.solver.z0;
    config.squeeze = c.solver.squeeze;
    config.voltage_ramp = c.solver.ramp;
    let trace = simulate(&actuator, &c.fluid, &c.drive, &config)?;
    // an envelope is only meaningful for a free-running, damped trace
    let env = match trace.contact_time {
        None if trace.time_constant().is_finite() => Some(envelope(&trace)?),
        _ => None,
    };

    let rows: Vec<Vec<Field>> = trace
        .samples
        .iter()
        .map(|s| vec![s.time.into(), s.displacement.into(), s.velocity.into()])
        .collect();
    let env_rows: Vec<Vec<Field>> = env
        .iter()
        .flat_map(|e| {
            e.times
                .iter()
                .zip(&e.envelope)
                .map(|(t, a)| vec![(*t).into(), (*a).into()])
        })
        .collect();
    let metadata: Record = vec![
        ("fluid", c.fluid.name().into()),
        ("duration_s", duration.into()),
        ("dt_s", dt.into()),
        ("k_N_m", trace.stiffness.into()),
        ("m_eff_kg", trace.effective_mass.into()),
        ("gamma_kg_s", trace.damping.into()),
        ("squeeze_kg_s", trace.squeeze_coefficient.into()),
        ("squeeze_units", squeeze_note(c.solver.squeeze.enabled)),
        ("evaluated_at_Hz", trace.evaluated_at.into()),
        ("contact_time_s", trace.contact_time.into()),
        ("tau_s", env.as_ref().map(|e| e.tau).into()),
        ("tau_model_s", trace.time_constant().into()),
        (
            "steady_amplitude_m",
            env.as_ref().map(|e| e.steady_amplitude).into(),
        ),
    ];

    let header = ["time_s", "displacement_m", "velocity_m_s"];
    let env_header = ["time_s", "envelope_m"];
    match ctx.format {
        Format::Csv => {
            ctx.emit(&table_csv(&header, &rows))?;
            if let Some(path) = ctx.sink.sibling("envelope") {
                write_file(&path, &table_csv(&env_header, &env_rows))
                    .map_err(CliError::io(&path))?;
            }
        }
        Format::Json => {
            let doc: Value = json!({
                "metadata": record_json(&metadata),
                "samples": table_json(&header, &rows),
                "envelope": table_json(&env_header, &env_rows),
            });
            ctx.emit(&json_text(&doc))?;
        }
    }

    match (trace.contact_time, &env) {
        (Some(t), _) => ctx.note(format!("contact with the electrode at {t:.4e} s")),
        (None, Some(e)) => ctx.note(format!(
            "tau = {:.4e} s (model {:.4e} s), steady amplitude {:.4e} m",
            e.tau,
            trace.time_constant(),
            e.steady_amplitude
        )),
        (None, None) => ctx.note(format!(
            "{} samples, final displacement {:.4e} m",
            trace.samples.len(),
            trace.samples.last().map_or(0.0, |s| s.displacement)
        )),
    }
    Ok(())
}

/// Grid scan of the potential for cross-checking the root finder.
pub fn oracle(ctx: &Context, voltage: Option<f64>) -> Result<()> {
    let c = &ctx.config;
    let spring = c.spring()?;
    let v = voltage.unwrap_or_else(|| c.drive.voltage());
    let n = ctx
        .points
        .or(c.solver.grid_points)
        .unwrap_or(DEFAULT_GRID_POINTS);
    let scan = scan_potential(v, &c.geometry, &c.stack, &c.fluid, &spring, n)?;
    let roots = solve_equilibria(v, &c.geometry, &c.stack, &c.fluid, &spring)?;
    let stable: Vec<f64> = roots
        .iter()
        .filter(|r| r.is_stable())
        .map(|r| r.displacement)
        .collect();
    let rows: Vec<Vec<Field>> = scan
        .grid_points
        .iter()
        .map(|(z, u)| vec![(*z).into(), (*u).into()])
        .collect();
    let metadata: Record = vec![
        ("voltage_V", v.into()),
        ("spacing_m", scan.spacing.into()),
        ("grid_minima", scan.minima.len().into()),
        ("solver_stable_roots", stable.len().into()),
    ];
    ctx.emit_table(&["z_m", "potential_J"], &rows, metadata)?;
    let agree = scan.minima.len() == stable.len()
        && scan
            .minima
            .iter()
            .zip(&stable)
            .all(|(a, b)| (a - b).abs() <= scan.spacing);
    ctx.note(format!(
        "grid minima {:?}, solver stable roots {:?}: {}",
        scan.minima,
        stable,
        if agree { "agree" } else { "DISAGREE" }
    ));
    Ok(())
}

pub fn reproduce(ctx: &Context, dir: PathBuf) -> Result<()> {
    let points = ctx.points.unwrap_or(1001);
    let (report, files) = report::reproduce(&ctx.config, points)?;
    report::write_all(&dir, &files)?;
    if !ctx.quiet {
        print!("{}", report.table());
        println!("wrote {} files to {}", files.len(), dir.display());
    }
    let failed: Vec<_> = report.failures().collect();
    if failed.is_empty() {
        return Ok(());
    }
    for r in &failed {
        eprintln!("failed: row {} {} ({})", r.id, r.quantity, r.unit);
    }
    Err(CliError::Reproduce(failed.len()))
}
