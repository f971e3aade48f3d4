use mems_liquid::dynamics::modal_stiffness;
use mems_liquid::model::{fluid_preset, presets};
use mems_liquid::response::{decompose_drive_force, harmonic_response, ResponseOptions};
use mems_liquid::statics::{pull_in_voltage, solve_equilibria};
use mems_liquid::transient::{
    envelope, lumped_natural_frequency, simulate, steady_state_amplitude, Trace, TransientConfig,
};
use mems_liquid::{Actuator, DriveSignal, Execution, FluidMedium};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn modal_cantilever() -> Actuator {
    let mut a = presets::cantilever();
    a.spring = modal_stiffness(&a.geometry, &a.material);
    a
}

fn natural_frequency(a: &Actuator, fluid: &FluidMedium) -> f64 {
    lumped_natural_frequency(a.spring.k(), a, fluid).unwrap()
}

/// Free decay of the frozen-coefficient oscillator.
fn analytic_decay(trace: &Trace, z0: f64, t: f64) -> f64 {
    let m = trace.effective_mass;
    let beta = trace.damping / (2.0 * m);
    let wd = (trace.stiffness / m - beta * beta).sqrt();
    (-beta * t).exp() * z0 * ((wd * t).cos() + beta / wd * (wd * t).sin())
}

#[test]
fn rk4_is_fourth_order() {
    let a = modal_cantilever();
    let air = fluid_preset("air").unwrap();
    let fn_ = natural_frequency(&a, &air);
    let z0 = 1e-8;
    let error = |per_period: f64| {
        let mut cfg = TransientConfig::new(5.0 / fn_, 1.0 / (per_period * fn_));
        cfg.z0 = z0;
        let trace = simulate(&a, &air, &DriveSignal::dc(0.0).unwrap(), &cfg).unwrap();
        trace
            .samples
            .iter()
            .map(|s| (s.displacement - analytic_decay(&trace, z0, s.time)).abs())
            .fold(0.0, f64::max)
    };
    let ratio = error(40.0) / error(80.0);
    assert!((13.0..=19.0).contains(&ratio), "{ratio}");
}

#[test]
fn undamped_energy_is_conserved() {
    let a = modal_cantilever();
    let vacuum = fluid_preset("vacuum").unwrap();
    let fn_ = natural_frequency(&a, &vacuum);
    let mut cfg = TransientConfig::new(100.0 / fn_, 1.0 / (200.0 * fn_));
    cfg.z0 = 1e-8;
    let trace = simulate(&a, &vacuum, &DriveSignal::dc(0.0).unwrap(), &cfg).unwrap();
    assert_eq!(trace.damping, 0.0);
    let energy =
        |z: f64, v: f64| 0.5 * trace.effective_mass * v * v + 0.5 * trace.stiffness * z * z;
    let e0 = energy(cfg.z0, 0.0);
    let drift = trace
        .samples
        .iter()
        .map(|s| rel(energy(s.displacement, s.velocity), e0))
        .fold(0.0, f64::max);
    assert!(drift < 1e-6, "{drift}");
}

fn ring_up(a: &Actuator, fluid: &FluidMedium, v_rms: f64, force_freq: f64, duration: f64) -> Trace {
    let fn_ = natural_frequency(a, fluid);
    let drive = DriveSignal::ac(v_rms, 0.5 * force_freq).unwrap();
    simulate(
        a,
        fluid,
        &drive,
        &TransientConfig::new(duration, 1.0 / (40.0 * fn_)),
    )
    .unwrap()
}

fn ring_down(a: &Actuator, fluid: &FluidMedium, z0: f64, duration: f64) -> Trace {
    let fn_ = natural_frequency(a, fluid);
    let mut cfg = TransientConfig::new(duration, 1.0 / (40.0 * fn_));
    cfg.z0 = z0;
    simulate(a, fluid, &DriveSignal::dc(0.0).unwrap(), &cfg).unwrap()
}

#[test]
fn ring_up_and_ring_down_share_tau() {
    let a = modal_cantilever();
    for (name, v_rms, duration) in [("air", 0.1, 10e-3), ("tap-water", 0.5, 1.5e-3)] {
        let fluid = fluid_preset(name).unwrap();
        let fn_ = natural_frequency(&a, &fluid);
        let up = ring_up(&a, &fluid, v_rms, fn_, duration);
        let down = ring_down(&a, &fluid, 1e-8, duration);
        let (tu, td) = (envelope(&up).unwrap().tau, envelope(&down).unwrap().tau);
        assert!(rel(tu, td) < 0.02, "{name}: {tu} vs {td}");
        assert!(
            rel(td, down.time_constant()) < 0.02,
            "{name}: {td} vs {}",
            down.time_constant()
        );
    }
}

#[test]
fn settling_takes_about_four_point_six_tau() {
    let a = modal_cantilever();
    let air = fluid_preset("air").unwrap();
    let env = envelope(&ring_up(&a, &air, 0.1, natural_frequency(&a, &air), 10e-3)).unwrap();
    assert!(
        rel(env.settling_time_99, 4.6 * env.tau) < 0.05,
        "{} vs {}",
        env.settling_time_99,
        env.tau
    );
    assert!(env.envelope.iter().all(|&e| e >= 0.0));
}

#[test]
fn steady_state_matches_harmonic_response() {
    let a = modal_cantilever();
    for (name, v_rms, duration) in [("air", 0.1, 12e-3), ("tap-water", 0.5, 2e-3)] {
        let fluid = fluid_preset(name).unwrap();
        let fn_ = natural_frequency(&a, &fluid);
        for force_freq in [fn_, 0.5 * fn_] {
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
            let trace = ring_up(&a, &fluid, v_rms, force_freq, duration);
            let simulated = steady_state_amplitude(&trace).unwrap();
            assert!(
                rel(simulated, harmonic) < 0.01,
                "{name} @ {force_freq}: {simulated} vs {harmonic}"
            );
        }
    }
}

fn dc_step(a: &Actuator, fluid: &FluidMedium, volts: f64, ramp: Option<f64>) -> Trace {
    let fn_ = natural_frequency(a, fluid);
    let mut cfg = TransientConfig::new(12e-3, 1.0 / (40.0 * fn_));
    cfg.voltage_ramp = ramp;
    simulate(a, fluid, &DriveSignal::dc(volts).unwrap(), &cfg).unwrap()
}

fn tail_mean(trace: &Trace, span: f64) -> f64 {
    let end = trace.samples.last().unwrap().time;
    let tail: Vec<f64> = trace
        .samples
        .iter()
        .filter(|s| s.time >= end - span)
        .map(|s| s.displacement)
        .collect();
    tail.iter().sum::<f64>() / tail.len() as f64
}

fn static_root(a: &Actuator, fluid: &FluidMedium, volts: f64) -> f64 {
    solve_equilibria(volts, &a.geometry, &a.stack, fluid, &a.spring)
        .unwrap()
        .into_iter()
        .find(|p| p.is_stable())
        .unwrap()
        .displacement
}

#[test]
fn step_above_pull_in_hits_the_electrode() {
    let a = presets::cantilever();
    let air = fluid_preset("air").unwrap();
    let v_pi = pull_in_voltage(&a.geometry, &a.stack, &air, &a.spring).unwrap();
    let trace = dc_step(&a, &air, 1.05 * v_pi, None);
    assert!(trace.contact_time.is_some());
    assert!(trace.samples.last().unwrap().displacement < a.geometry.gap());
}

#[test]
fn moderate_step_settles_on_static_root() {
    let a = presets::cantilever();
    let air = fluid_preset("air").unwrap();
    let v = 0.85 * pull_in_voltage(&a.geometry, &a.stack, &air, &a.spring).unwrap();
    let trace = dc_step(&a, &air, v, None);
    assert!(trace.contact_time.is_none());
    let settled = tail_mean(&trace, 0.5e-3);
    assert!(rel(settled, static_root(&a, &air, v)) < 0.005);
}

/// An abrupt step overshoots to roughly twice its static deflection, so with
/// light air damping the plate snaps through below the static pull-in voltage.
#[test]
fn abrupt_step_below_pull_in_snaps_through() {
    let a = presets::cantilever();
    let air = fluid_preset("air").unwrap();
    let v_pi = pull_in_voltage(&a.geometry, &a.stack, &air, &a.spring).unwrap();
    assert!(dc_step(&a, &air, 0.95 * v_pi, None).contact_time.is_some());
}

#[test]
fn ramped_approach_below_pull_in_settles() {
    let a = presets::cantilever();
    let air = fluid_preset("air").unwrap();
    let v = 0.95 * pull_in_voltage(&a.geometry, &a.stack, &air, &a.spring).unwrap();
    let trace = dc_step(&a, &air, v, Some(4e-3));
    assert!(trace.contact_time.is_none());
    let settled = tail_mean(&trace, 0.5e-3);
    assert!(rel(settled, static_root(&a, &air, v)) < 0.005, "{settled}");
}
