//! Acceptance report: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;

use mems_liquid::dynamics::{modal_stiffness, resonance_in_fluid};
use mems_liquid::model::{calibrate_stiffness, fluid_preset, presets, VoltageObservation};
use mems_liquid::oracle::{lorentzian_oracle, scan_potential, DEFAULT_GRID_POINTS};
use mems_liquid::response::{
    decompose_drive_force, harmonic_response, lagrangian_at, linear_grid, ResponseOptions,
};
use mems_liquid::statics::{
    gap_close_voltage, pull_in_displacement, pull_in_voltage, pull_in_voltage_numeric,
    solve_equilibria, stability_condition,
};
use mems_liquid::transient::{
    envelope, lumped_natural_frequency, simulate, steady_state_amplitude, Trace, TransientConfig,
};
use mems_liquid::{
    Actuator, ActuatorGeometry, DielectricStack, DriveSignal, Execution, FluidMedium, SpringModel,
    StructuralMaterial,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed_0011;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, what: &str, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!(
            "[{}] {id:>3}  {what}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }

    /// `value` against `target` within relative tolerance `tol`.
    fn within(
        &mut self,
        id: &str,
        what: &str,
        value: f64,
        target: f64,
        tol: f64,
        unit: &str,
    ) -> bool {
        let err = rel(value, target);
        let ok = err <= tol;
        self.line(
            id,
            ok,
            what,
            format!("{value:.6e} {unit} vs {target:.6e} {unit}, rel err {err:.2e} (tol {tol})"),
        );
        ok
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn air() -> FluidMedium {
    fluid_preset("air").unwrap()
}
fn water() -> FluidMedium {
    fluid_preset("tap-water").unwrap()
}
fn ipa() -> FluidMedium {
    fluid_preset("ipa").unwrap()
}

fn statics(r: &mut Report) {
    let geom = presets::cantilever_geometry();
    let stack = presets::nitride_stack();
    let spring =
        calibrate_stiffness(VoltageObservation::PullIn, 7.6, &geom, &stack, &air()).unwrap();

    let v_air = pull_in_voltage(&geom, &stack, &air(), &spring).unwrap();
    let v_num = pull_in_voltage_numeric(&geom, &stack, &air(), &spring)
        .unwrap()
        .unwrap();
    let err = rel(v_air, 7.6).max(rel(v_num, 7.6));
    r.line(
        "1",
        err <= 1e-6,
        "air pull-in voltage",
        format!("closed {v_air:.9} V, numeric {v_num:.9} V vs 7.60 V, rel err {err:.2e} (tol 1e-6), k = {:.9} N/m", spring.k()),
    );

    r.within(
        "2",
        "water gap-close voltage",
        gap_close_voltage(&geom, &stack, &water(), &spring),
        6.3,
        0.05,
        "V",
    );
    let v_ipa = pull_in_voltage(&geom, &stack, &ipa(), &spring).unwrap_or(f64::NAN);
    r.within("3", "IPA pull-in voltage", v_ipa, 3.9, 0.10, "V");

    let classes: Vec<(String, bool)> = [air(), ipa(), water()]
        .iter()
        .map(|f| {
            (
                f.name().to_string(),
                stability_condition(&stack, f, geom.gap()),
            )
        })
        .collect();
    let ok = classes
        == [
            ("air".into(), false),
            ("ipa".into(), false),
            ("tap-water".into(), true),
        ];
    let listing: Vec<String> = classes
        .iter()
        .map(|(n, s)| format!("{n} {}", if *s { "stable" } else { "unstable" }))
        .collect();
    r.line(
        "4",
        ok,
        "full-gap stability classification",
        listing.join(", "),
    );

    let bare = DielectricStack::bare();
    let z = pull_in_displacement(&geom, &bare, &air());
    r.line(
        "5",
        z == Some(geom.gap() / 3.0),
        "classical pull-in displacement",
        format!(
            "{:e} m vs g/3 = {:e} m (exact)",
            z.unwrap_or(f64::NAN),
            geom.gap() / 3.0
        ),
    );
}

fn dynamics(r: &mut Report) -> (f64, f64) {
    let geom = presets::cantilever_geometry();
    let mat = StructuralMaterial::polysilicon();

    let vac = resonance_in_fluid(&geom, &mat, &fluid_preset("vacuum").unwrap()).unwrap();
    r.within("6", "vacuum frequency", vac.f_vacuum, 42.88e3, 0.01, "Hz");
    r.within("6", "vacuum m*", vac.effective_mass, 3.49e-11, 0.005, "kg");
    r.line(
        "6",
        vac.q_factor.is_infinite(),
        "vacuum Q",
        format!("{}", vac.q_factor),
    );

    let a = resonance_in_fluid(&geom, &mat, &air()).unwrap();
    r.within(
        "7",
        "air natural frequency",
        a.f_natural_hyd,
        42.57e3,
        0.01,
        "Hz",
    );
    r.within("7", "air Q", a.q_factor, 98.31, 0.03, "");
    r.within("7", "air m*", a.effective_mass, 3.5456e-11, 0.01, "kg");
    r.within("7", "air gamma", a.damping, 9.69e-8, 0.02, "kg/s");

    let w = resonance_in_fluid(&geom, &mat, &water()).unwrap();
    r.within("8", "water peak frequency", w.f_peak, 13.77e3, 0.05, "Hz");
    r.within("8", "water Q", w.q_factor, 3.19, 0.15, "");
    r.within("8", "water m*", w.effective_mass, 3.09e-10, 0.10, "kg");
    r.within("8", "water gamma", w.damping, 1.06e-5, 0.15, "kg/s");

    let shift = (a.f_peak - w.f_peak) / a.f_peak;
    r.line(
        "9",
        (0.65..=0.70).contains(&shift),
        "air to water peak shift",
        format!("{:.2} % (band 65-70 %)", 100.0 * shift),
    );
    (
        2.0 * a.q_factor / a.omega_hyd,
        2.0 * w.q_factor / w.omega_hyd,
    )
}

fn lagrangian_vs_lorentzian(r: &mut Report) {
    let geom = presets::cantilever_geometry();
    let mat = StructuralMaterial::polysilicon();
    let spring = modal_stiffness(&geom, &mat);
    let options = ResponseOptions::default();
    let mut worst = 0.0f64;
    for fluid in [air(), water()] {
        let p = resonance_in_fluid(&geom, &mat, &fluid).unwrap();
        let grid = linear_grid(0.2 * p.f_natural_hyd, 2.0 * p.f_natural_hyd, 500);
        let points = harmonic_response(
            &grid,
            1e-9,
            &geom,
            &mat,
            &fluid,
            &spring,
            &options,
            Execution::Parallel,
        )
        .unwrap();
        for pt in points {
            let m =
                lagrangian_at(pt.frequency, 1e-9, &geom, &mat, &fluid, &spring, &options).unwrap();
            let (a, phi) = lorentzian_oracle(m.omega, m.force, m.mass, m.damping, m.stiffness);
            worst = worst.max(rel(pt.amplitude, a)).max((pt.phase - phi).abs());
        }
    }
    r.line(
        "10",
        worst <= 1e-9,
        "averaged Lagrangian vs Lorentzian (2 x 500 points)",
        format!("max rel err {worst:.2e} (tol 1e-9)"),
    );
}

fn grid_scan(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_cells = 0.0f64;
    let mut mismatched = 0;
    for _ in 0..100 {
        let (l, w) = (250e-6, 30e-6);
        let geom = ActuatorGeometry::new(
            l,
            w,
            2e-6,
            rng.gen_range(0.2..1.0) * l * w,
            rng.gen_range(0.5e-6..5e-6),
        )
        .unwrap();
        let stack = DielectricStack::new(
            rng.gen_range(0.0..1e-6),
            rng.gen_range(0.0..1e-6),
            rng.gen_range(1.0..10.0),
            rng.gen_range(1.0..10.0),
        )
        .unwrap();
        let fluid =
            FluidMedium::new("random", rng.gen_range(1.0..90.0), 1000.0, 1e-3, None).unwrap();
        let spring = SpringModel::direct(rng.gen_range(0.1..10.0)).unwrap();
        let v = rng.gen_range(0.05..0.95) * gap_close_voltage(&geom, &stack, &fluid, &spring);

        let scan = scan_potential(v, &geom, &stack, &fluid, &spring, DEFAULT_GRID_POINTS).unwrap();
        let stable: Vec<f64> = solve_equilibria(v, &geom, &stack, &fluid, &spring)
            .unwrap()
            .into_iter()
            .filter(|p| p.is_stable())
            .map(|p| p.displacement)
            .collect();
        if scan.minima.len() != stable.len() {
            mismatched += 1;
            continue;
        }
        for (m, s) in scan.minima.iter().zip(&stable) {
            worst_cells = worst_cells.max((m - s).abs() / scan.spacing);
        }
    }
    r.line(
        "11",
        mismatched == 0 && worst_cells <= 1.0,
        "grid-scan minima vs stable roots (100 configs)",
        format!("{mismatched} count mismatches, max offset {worst_cells:.3} cells (tol 1)"),
    );
}

fn modal_cantilever() -> Actuator {
    let mut a = presets::cantilever();
    a.spring = modal_stiffness(&a.geometry, &a.material);
    a
}

fn ring_up(a: &Actuator, fluid: &FluidMedium, v_rms: f64, force_freq: f64, duration: f64) -> Trace {
    let fn_ = lumped_natural_frequency(a.spring.k(), a, fluid).unwrap();
    let drive = DriveSignal::ac(v_rms, 0.5 * force_freq).unwrap();
    simulate(
        a,
        fluid,
        &drive,
        &TransientConfig::new(duration, 1.0 / (40.0 * fn_)),
    )
    .unwrap()
}

fn transient_vs_harmonic(r: &mut Report) {
    let a = modal_cantilever();
    let mut all_ok = true;
    let mut cases = Vec::new();
    for (fluid, v_rms, duration) in [(air(), 0.1, 12e-3), (water(), 0.5, 2e-3)] {
        let fn_ = lumped_natural_frequency(a.spring.k(), &a, &fluid).unwrap();
        for (label, force_freq) in [("f0", fn_), ("f0/2", 0.5 * fn_)] {
            let drive = DriveSignal::ac(v_rms, 0.5 * force_freq).unwrap();
            let z0 = solve_equilibria(v_rms, &a.geometry, &a.stack, &fluid, &a.spring).unwrap()[0]
                .displacement;
            let force = decompose_drive_force(&drive, z0, &a.geometry, &a.stack, &fluid).unwrap();
            let harmonic = harmonic_response(
                &[force.harmonic_frequency],
                force.harmonic_amplitude,
                &a.geometry,
                &a.material,
                &fluid,
                &a.spring,
                &ResponseOptions::default(),
                Execution::Sequential,
            )
            .unwrap()[0]
                .amplitude;
            let simulated =
                steady_state_amplitude(&ring_up(&a, &fluid, v_rms, force_freq, duration))
                    .unwrap_or(f64::NAN);
            let err = rel(simulated, harmonic);
            all_ok &= err <= 0.01;
            cases.push(format!("{} {label} {:.2e}", fluid.name(), err));
        }
    }
    r.line(
        "12",
        all_ok,
        "transient steady state vs harmonic response",
        format!("{} (tol 0.01)", cases.join(", ")),
    );
}

fn convergence_order(r: &mut Report) {
    let a = modal_cantilever();
    let fluid = air();
    let fn_ = lumped_natural_frequency(a.spring.k(), &a, &fluid).unwrap();
    let z0 = 1e-8;
    let error = |per_period: f64| {
        let mut cfg = TransientConfig::new(5.0 / fn_, 1.0 / (per_period * fn_));
        cfg.z0 = z0;
        let trace = simulate(&a, &fluid, &DriveSignal::dc(0.0).unwrap(), &cfg).unwrap();
        let m = trace.effective_mass;
        let beta = trace.damping / (2.0 * m);
        let wd = (trace.stiffness / m - beta * beta).sqrt();
        trace
            .samples
            .iter()
            .map(|s| {
                let exact = (-beta * s.time).exp()
                    * z0
                    * ((wd * s.time).cos() + beta / wd * (wd * s.time).sin());
                (s.displacement - exact).abs()
            })
            .fold(0.0, f64::max)
    };
    let ratio = error(40.0) / error(80.0);
    r.line(
        "13",
        (13.0..=19.0).contains(&ratio),
        "RK4 error ratio on halving dt",
        format!("{ratio:.3} (band 13-19)"),
    );
}

fn dc_step(a: &Actuator, fluid: &FluidMedium, volts: f64) -> Trace {
    let fn_ = lumped_natural_frequency(a.spring.k(), a, fluid).unwrap();
    simulate(
        a,
        fluid,
        &DriveSignal::dc(volts).unwrap(),
        &TransientConfig::new(12e-3, 1.0 / (40.0 * fn_)),
    )
    .unwrap()
}

fn time_domain_pull_in(r: &mut Report) {
    let a = presets::cantilever();
    let fluid = air();
    let v_pi = pull_in_voltage(&a.geometry, &a.stack, &fluid, &a.spring).unwrap();

    let above = dc_step(&a, &fluid, 1.05 * v_pi);
    r.line(
        "14a",
        above.contact_time.is_some(),
        "DC step to 1.05 V_PI in air",
        match above.contact_time {
            Some(t) => format!("contact at {:.3} us", t * 1e6),
            None => "no contact".into(),
        },
    );

    let v = 0.95 * v_pi;
    let below = dc_step(&a, &fluid, v);
    let root = solve_equilibria(v, &a.geometry, &a.stack, &fluid, &a.spring)
        .unwrap()
        .into_iter()
        .find(|p| p.is_stable())
        .map(|p| p.displacement)
        .unwrap();
    let (ok, detail) = match below.contact_time {
        Some(t) => (
            false,
            format!(
                "contact at {:.3} us; static root {root:.4e} m (tol 5e-3)",
                t * 1e6
            ),
        ),
        None => {
            let end = below.samples.last().unwrap().time;
            let tail: Vec<f64> = below
                .samples
                .iter()
                .filter(|s| s.time >= end - 0.5e-3)
                .map(|s| s.displacement)
                .collect();
            let settled = tail.iter().sum::<f64>() / tail.len() as f64;
            let err = rel(settled, root);
            (err <= 5e-3, format!("settled {settled:.4e} m vs static root {root:.4e} m, rel err {err:.2e} (tol 5e-3)"))
        }
    };
    r.line("14b", ok, "DC step to 0.95 V_PI in air settles", detail);
}

fn time_constants(r: &mut Report, (tau_air, tau_water): (f64, f64)) {
    let a = modal_cantilever();
    for (fluid, v_rms, duration, model_tau, nominal) in [
        (air(), 0.1, 12e-3, tau_air, 0.73e-3),
        (water(), 0.5, 2e-3, tau_water, 74e-6),
    ] {
        let fn_ = lumped_natural_frequency(a.spring.k(), &a, &fluid).unwrap();
        let fit = envelope(&ring_up(&a, &fluid, v_rms, fn_, duration))
            .map(|e| e.tau)
            .unwrap_or(f64::NAN);
        let err = rel(fit, model_tau);
        r.line(
            "15",
            err <= 0.05,
            &format!("{} envelope time constant", fluid.name()),
            format!(
                "fit {:.4} us vs 2Q/w0 = {:.4} us, rel err {err:.2e} (tol 0.05); nominal {:.1} us",
                fit * 1e6,
                model_tau * 1e6,
                nominal * 1e6
            ),
        );
    }
}

fn main() -> ExitCode {
    let mut r = Report { failures: 0 };
    statics(&mut r);
    let taus = dynamics(&mut r);
    lagrangian_vs_lorentzian(&mut r);
    grid_scan(&mut r);
    transient_vs_harmonic(&mut r);
    convergence_order(&mut r);
    time_domain_pull_in(&mut r);
    time_constants(&mut r, taus);
    if r.failures == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} check(s) failed", r.failures);
        ExitCode::FAILURE
    }
}
