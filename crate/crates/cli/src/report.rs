//! Reference-value reproduction: recomputes every tabulated quantity for the
//! reference cantilever and checks it against the versioned golden file.

use std::collections::BTreeMap;
use std::path::Path;

use mems_liquid::dynamics::{modal_stiffness, resonance_in_fluid};
use mems_liquid::model::{calibrate_stiffness, fluid_preset, VoltageObservation};
use mems_liquid::response::{
    decompose_drive_force, harmonic_response, linear_grid, peak, ResponseOptions, ResponsePoint,
};
use mems_liquid::statics::{
    pull_in_displacement, pull_in_voltage, stability_condition, stable_close_voltage,
};
use mems_liquid::transient::{envelope, simulate, EnvelopeResult, Trace, TransientConfig};
use mems_liquid::{Actuator, DielectricStack, DriveSignal, Execution, FluidMedium};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{json_text, record_json, table_csv, write_file, Field, Record};

pub const GOLDEN: &str = include_str!("../data/golden_v1.toml");

#[derive(Debug, Deserialize)]
struct Golden {
    version: u32,
    calibration: Calibration,
    row: Vec<GoldenRow>,
}

#[derive(Debug, Deserialize)]
struct Calibration {
    observation: String,
    fluid: String,
    #[serde(rename = "voltage_V")]
    voltage: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GoldenRow {
    id: String,
    key: String,
    quantity: String,
    #[serde(default)]
    unit: String,
    expected: Option<f64>,
    tolerance: Option<f64>,
    band: Option<[f64; 2]>,
    flag: Option<bool>,
    reference: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Computed {
    Num(f64),
    Flag(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub id: String,
    pub quantity: String,
    pub unit: String,
    pub expected: Field,
    /// Value the computed one is judged against.
    pub reference: Field,
    pub computed: Field,
    pub rel_error: Option<f64>,
    pub tolerance: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproductionReport {
    pub version: u32,
    pub rows: Vec<ReportRow>,
}

impl ReproductionReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    const HEADER: [&'static str; 9] = [
        "id",
        "quantity",
        "unit",
        "expected",
        "reference",
        "computed",
        "rel_error",
        "tolerance",
        "pass",
    ];

    fn cells(r: &ReportRow) -> Vec<Field> {
        vec![
            r.id.as_str().into(),
            r.quantity.as_str().into(),
            r.unit.as_str().into(),
            r.expected.clone(),
            r.reference.clone(),
            r.computed.clone(),
            r.rel_error.into(),
            r.tolerance.as_str().into(),
            r.pass.into(),
        ]
    }

    pub fn csv(&self) -> String {
        let rows: Vec<Vec<Field>> = self.rows.iter().map(Self::cells).collect();
        table_csv(&Self::HEADER, &rows)
    }

    pub fn json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let record: Record = Self::HEADER.iter().copied().zip(Self::cells(r)).collect();
                record_json(&record)
            })
            .collect();
        json!({ "golden_version": self.version, "pass": self.pass(), "rows": rows })
    }

    /// Fixed-width table for the terminal.
    pub fn table(&self) -> String {
        let show = |f: &Field| match f {
            Field::Num(x) => format!("{x:.6e}"),
            Field::Bool(b) => b.to_string(),
            _ => "-".into(),
        };
        let mut out = format!(
            "{:<4} {:<34} {:>14} {:>14} {:>10} {:>12}  status\n",
            "id", "quantity", "reference", "computed", "rel.err", "tolerance"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<4} {:<34} {:>14} {:>14} {:>10} {:>12}  {}\n",
                r.id,
                r.quantity,
                show(&r.reference),
                show(&r.computed),
                r.rel_error.map_or("-".into(), |e| format!("{e:.2e}")),
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" }
            ));
        }
        let failed = self.failures().count();
        out.push_str(&if failed == 0 {
            format!("overall: PASS ({} rows)\n", self.rows.len())
        } else {
            format!("overall: FAIL ({failed} of {} rows)\n", self.rows.len())
        });
        out
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn judge(
    row: &GoldenRow,
    values: &BTreeMap<String, Computed>,
) -> std::result::Result<ReportRow, String> {
    let computed = values.get(&row.key).copied();
    let field = |c: Option<Computed>| match c {
        Some(Computed::Num(x)) => Field::Num(x),
        Some(Computed::Flag(b)) => Field::Bool(b),
        None => Field::Missing,
    };
    let mut out = ReportRow {
        id: row.id.clone(),
        quantity: row.quantity.clone(),
        unit: row.unit.clone(),
        expected: row
            .expected
            .map_or(row.flag.map_or(Field::Missing, Field::Bool), Field::Num),
        reference: Field::Missing,
        computed: field(computed),
        rel_error: None,
        tolerance: String::new(),
        pass: false,
    };

    if let Some(flag) = row.flag {
        out.reference = Field::Bool(flag);
        out.tolerance = "exact".into();
        out.pass = computed == Some(Computed::Flag(flag));
        return Ok(out);
    }
    let expected = row
        .expected
        .ok_or_else(|| format!("row {}: needs `expected` or `flag`", row.key))?;
    let x = match computed {
        Some(Computed::Num(x)) => Some(x),
        _ => None,
    };

    if let Some([lo, hi]) = row.band {
        out.reference = Field::Num(expected);
        out.tolerance = format!("[{lo}, {hi}]");
        out.rel_error = x.map(|x| rel(x, expected));
        out.pass = x.is_some_and(|x| (lo..=hi).contains(&x));
        return Ok(out);
    }

    let tol = row
        .tolerance
        .ok_or_else(|| format!("row {}: needs `tolerance`, `band` or `flag`", row.key))?;
    let target = match row.reference.as_deref() {
        None => expected,
        Some("model") => match values.get(&format!("{}@model", row.key)) {
            Some(Computed::Num(t)) => *t,
            _ => return Err(format!("row {}: no model reference computed", row.key)),
        },
        Some(other) => return Err(format!("row {}: unknown reference `{other}`", row.key)),
    };
    out.reference = Field::Num(target);
    out.tolerance = if tol == 0.0 {
        "exact".into()
    } else {
        format!("{tol}")
    };
    out.rel_error = x.map(|x| rel(x, target));
    out.pass = match x {
        Some(x) if target.is_infinite() || tol == 0.0 => x == target,
        Some(x) => rel(x, target) <= tol,
        None => false,
    };
    Ok(out)
}

/// Everything the figures need besides the table.
struct Figures {
    fig4: Vec<(&'static str, Vec<ResponsePoint>)>,
    fig5: Vec<ResponsePoint>,
    fig6: Vec<ResponsePoint>,
    fig7: Vec<(&'static str, Trace, Option<EnvelopeResult>)>,
}

/// Ring-up at resonance from rest, long enough to settle.
fn ring_up(actuator: &Actuator, fluid: &FluidMedium, v_rms: f64) -> Result<(Trace, f64)> {
    let p = resonance_in_fluid(&actuator.geometry, &actuator.material, fluid)?;
    let tau = 2.0 * p.q_factor / p.omega_hyd;
    let f = p.f_natural_hyd;
    let duration = 16.0 * tau + 20.0 / f;
    let drive = DriveSignal::ac(v_rms, 0.5 * f)?;
    let trace = simulate(
        actuator,
        fluid,
        &drive,
        &TransientConfig::new(duration, 1.0 / (40.0 * f)),
    )?;
    Ok((trace, tau))
}

fn sweep(
    actuator: &Actuator,
    fluid: &FluidMedium,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Vec<ResponsePoint>> {
    // 1 V rms at rest; only the force magnitude matters here
    let drive = DriveSignal::ac(1.0, 0.5 * hi)?;
    let force = decompose_drive_force(&drive, 0.0, &actuator.geometry, &actuator.stack, fluid)?;
    let grid = linear_grid(lo, hi, points);
    Ok(harmonic_response(
        &grid,
        force.harmonic_amplitude,
        &actuator.geometry,
        &actuator.material,
        fluid,
        &actuator.spring,
        &ResponseOptions::default(),
        Execution::Parallel,
    )?)
}

fn compute(
    config: &RunConfig,
    golden: &Golden,
    points: usize,
) -> Result<(BTreeMap<String, Computed>, Figures)> {
    let geom = &config.geometry;
    let stack = &config.stack;
    let mat = &config.material;
    let mut v: BTreeMap<String, Computed> = BTreeMap::new();
    let mut put = |k: String, c: Computed| {
        v.insert(k, c);
    };

    let observation = match golden.calibration.observation.as_str() {
        "pull-in" => VoltageObservation::PullIn,
        "close" => VoltageObservation::Close,
        other => {
            return Err(CliError::Usage(format!(
                "golden calibration: unknown observation `{other}`"
            )))
        }
    };
    let cal_fluid = fluid_preset(&golden.calibration.fluid)?;
    let spring = calibrate_stiffness(
        observation,
        golden.calibration.voltage,
        geom,
        stack,
        &cal_fluid,
    )?;

    for name in ["air", "ipa", "tap-water"] {
        let f = fluid_preset(name)?;
        if let Some(x) = pull_in_voltage(geom, stack, &f, &spring) {
            put(format!("{name}.pull_in_V"), Computed::Num(x));
        }
        if let Ok(x) = stable_close_voltage(geom, stack, &f, &spring) {
            put(format!("{name}.close_V"), Computed::Num(x));
        }
        put(
            format!("{name}.full_gap_stable"),
            Computed::Flag(stability_condition(stack, &f, geom.gap())),
        );
    }
    if let Some(z) = pull_in_displacement(geom, &DielectricStack::bare(), &cal_fluid) {
        put(
            "bare.pull_in_z_over_third_gap".into(),
            Computed::Num(z / (geom.gap() / 3.0)),
        );
    }

    let mut peaks = BTreeMap::new();
    for name in ["vacuum", "air", "tap-water"] {
        let p = resonance_in_fluid(geom, mat, &fluid_preset(name)?)?;
        for (k, x) in [
            ("f_vacuum_Hz", p.f_vacuum),
            ("f_natural_Hz", p.f_natural_hyd),
            ("f_peak_Hz", p.f_peak),
            ("q", p.q_factor),
            ("m_eff_kg", p.effective_mass),
            ("gamma_kg_s", p.damping),
        ] {
            put(format!("{name}.{k}"), Computed::Num(x));
        }
        peaks.insert(name, p);
    }
    let (f_air, f_water) = (peaks["air"].f_peak, peaks["tap-water"].f_peak);
    put(
        "peak_shift".into(),
        Computed::Num((f_air - f_water) / f_air),
    );

    let actuator = Actuator {
        geometry: *geom,
        stack: *stack,
        material: *mat,
        spring: modal_stiffness(geom, mat),
    };
    let air = fluid_preset("air")?;
    let water = fluid_preset("tap-water")?;
    let mut fig7 = Vec::new();
    for (name, fluid, v_rms) in [("air", &air, 0.1), ("tap-water", &water, 0.5)] {
        let (trace, tau_model) = ring_up(&actuator, fluid, v_rms)?;
        let env = envelope(&trace).ok();
        if let Some(e) = &env {
            put(format!("{name}.tau_s"), Computed::Num(e.tau));
        }
        put(format!("{name}.tau_s@model"), Computed::Num(tau_model));
        fig7.push((name, trace, env));
    }

    let fa = peaks["air"].f_natural_hyd;
    let fw = peaks["tap-water"].f_natural_hyd;
    let wide_hi = 1.5 * fa;
    let figures = Figures {
        fig4: vec![
            (
                "air",
                sweep(&actuator, &air, wide_hi / points as f64, wide_hi, points)?,
            ),
            (
                "tap-water",
                sweep(&actuator, &water, wide_hi / points as f64, wide_hi, points)?,
            ),
        ],
        fig5: sweep(&actuator, &air, 0.95 * fa, 1.05 * fa, points)?,
        fig6: sweep(&actuator, &water, 0.2 * fw, 2.0 * fw, points)?,
        fig7,
    };
    Ok((v, figures))
}

pub fn response_csv(points: &[ResponsePoint]) -> String {
    let top = peak(points).map_or(0.0, |p| p.amplitude);
    let rows: Vec<Vec<Field>> = points
        .iter()
        .map(|p| {
            vec![
                p.frequency.into(),
                p.amplitude.into(),
                (if top > 0.0 { p.amplitude / top } else { 0.0 }).into(),
                p.phase.into(),
            ]
        })
        .collect();
    table_csv(
        &["frequency_Hz", "amplitude_m", "amplitude_norm", "phase_rad"],
        &rows,
    )
}

pub fn trace_csv(trace: &Trace) -> String {
    let rows: Vec<Vec<Field>> = trace
        .samples
        .iter()
        .map(|s| vec![s.time.into(), s.displacement.into(), s.velocity.into()])
        .collect();
    table_csv(&["time_s", "displacement_m", "velocity_m_s"], &rows)
}

pub fn envelope_csv(env: &EnvelopeResult) -> String {
    let rows: Vec<Vec<Field>> = env
        .times
        .iter()
        .zip(&env.envelope)
        .map(|(t, e)| vec![(*t).into(), (*e).into()])
        .collect();
    table_csv(&["time_s", "envelope_m"], &rows)
}

fn parse_golden() -> Result<Golden> {
    toml::from_str(GOLDEN).map_err(|e| CliError::Usage(format!("golden data: {e}")))
}

pub fn reproduce(
    config: &RunConfig,
    points: usize,
) -> Result<(ReproductionReport, Vec<(String, String)>)> {
    let golden = parse_golden()?;
    let (values, figures) = compute(config, &golden, points)?;
    let rows = golden
        .row
        .iter()
        .map(|r| judge(r, &values))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("golden data: {e}")))?;

    let mut files = Vec::new();
    for (name, pts) in &figures.fig4 {
        files.push((format!("fig4_{name}.csv"), response_csv(pts)));
    }
    files.push(("fig5_air.csv".into(), response_csv(&figures.fig5)));
    files.push(("fig6_tap-water.csv".into(), response_csv(&figures.fig6)));
    for (name, trace, env) in &figures.fig7 {
        files.push((format!("fig7_{name}_transient.csv"), trace_csv(trace)));
        if let Some(e) = env {
            files.push((format!("fig7_{name}_envelope.csv"), envelope_csv(e)));
        }
    }
    let report = ReproductionReport {
        version: golden.version,
        rows,
    };
    files.push(("report.csv".into(), report.csv()));
    files.push(("report.json".into(), json_text(&report.json())));
    Ok((report, files))
}

pub fn write_all(dir: &Path, files: &[(String, String)]) -> Result<()> {
    for (name, text) in files {
        let path = dir.join(name);
        write_file(&path, text).map_err(CliError::io(&path))?;
    }
    Ok(())
}
