mod common;

use ffdg_core::synth::*;
use ffdg_core::Error;
use proptest::prelude::*;

fn traj_from(speeds: &[f64]) -> Trajectory {
    let samples = speeds
        .iter()
        .enumerate()
        .map(|(i, &v)| StateSample {
            t: i as f64 * GRID_STEP_S,
            altitude: 10_000.0,
            ground_speed: v,
            tas: v,
            temperature: 268.338,
            ..StateSample::default()
        })
        .collect();
    Trajectory { type_code: "NB".into(), flight_id: "NB-000".into(), samples }
}

fn level_state(altitude: f64, tas: f64) -> StateSample {
    StateSample { altitude, tas, ground_speed: tas, temperature: isa_temperature(altitude), ..StateSample::default() }
}

#[test]
fn isa_temperature_examples() {
    assert_eq!(isa_temperature(0.0), 288.15);
    assert!((isa_temperature(36_089.0) - 216.65).abs() < 1e-3);
    assert!((isa_temperature(10_000.0) - 268.338).abs() < 1e-9);
    assert_eq!(isa_temperature(50_000.0), 216.65);
    assert!((isa_density(0.0) - 1.225).abs() < 1e-12);
}

#[test]
fn generation_is_deterministic() {
    let spec = common::narrowbody("NB");
    let a = generate_trajectory(&spec, "NB-000", 9, &SynthConfig::default()).unwrap();
    let b = generate_trajectory(&spec, "NB-000", 9, &SynthConfig::default()).unwrap();
    assert_eq!(a, b);
    let c = generate_trajectory(&spec, "NB-000", 10, &SynthConfig::default()).unwrap();
    assert_ne!(a, c);
    a.validate().unwrap();
}

#[test]
fn cruise_is_level_and_dominates_the_hour() {
    let spec = common::narrowbody("NB");
    let config = SynthConfig::default();
    for seed in 0..20 {
        let traj = generate_trajectory(&spec, "NB-000", seed, &config).unwrap();
        assert_eq!(traj.samples.len(), 900);
        let cruise_end = config.climb_duration_s + 2400.0;
        for s in traj.samples.iter().filter(|s| s.t >= config.climb_duration_s && s.t < cruise_end) {
            assert!(s.vertical_rate.abs() < 100.0, "cruise vr {} at t={}", s.vertical_rate, s.t);
        }
        let level = traj.samples.iter().filter(|s| s.vertical_rate.abs() <= 200.0).count();
        let climb = traj.samples.iter().filter(|s| s.vertical_rate > 200.0).count();
        assert!(level > climb);
        for s in &traj.samples {
            assert!(s.altitude <= spec.get(ffdg_core::fleet::NumericFeature::Hmo).unwrap() + 1e-6);
        }
    }
}

#[test]
fn constant_speed_has_zero_acceleration() {
    let out = smooth_derivatives(&traj_from(&[300.0; 12]));
    assert!(out.samples.iter().all(|s| s.ground_accel == 0.0 && s.air_accel == 0.0));
}

#[test]
fn linear_ramp_keeps_its_slope() {
    let speeds: Vec<f64> = (0..12).map(|i| 2.0 * i as f64 * GRID_STEP_S).collect();
    let out = smooth_derivatives(&traj_from(&speeds));
    for s in &out.samples[1..11] {
        assert!((s.ground_accel - 2.0).abs() < 1e-12);
        assert!((s.air_accel - 2.0).abs() < 1e-12);
    }
}

#[test]
fn step_change_spreads_over_three_points() {
    let out = smooth_derivatives(&traj_from(&[0.0, 0.0, 0.0, 0.0, 12.0, 12.0, 12.0, 12.0]));
    // averaged series is 0 0 0 4 8 12 12 12
    let expected = [0.0, 0.0, 0.5, 1.0, 1.0, 0.5, 0.0, 0.0];
    for (s, e) in out.samples.iter().zip(expected) {
        assert!((s.ground_accel - e).abs() < 1e-12, "{} vs {e}", s.ground_accel);
    }
}

#[test]
fn level_flight_matches_hand_evaluation() {
    let a = common::narrowbody("NB").airframe().unwrap();
    let state = level_state(0.0, 250.0);
    let ff = oracle_fuel_flow(&state, &a, 60_000.0).unwrap();

    let v = 250.0 * 1852.0 / 3600.0;
    let q = 0.5 * 1.225 * v * v;
    let cl = 60_000.0 * 9.80665 / (q * 122.6);
    let ar = 35.8 * 35.8 / 122.6;
    let drag = q * 122.6 * (0.021 + cl * cl / (std::f64::consts::PI * ar * 0.8));
    let mach = v / (1.4f64 * 287.05287 * 288.15).sqrt();
    let c0 = 1.8e-5 * (8.0f64 / 7.0).powf(0.3);
    let hand = c0 * (1.0 + mach) * drag;

    assert!((ff - hand).abs() < 1e-12 * hand);
    assert!((ff - 0.947_290_424_929).abs() < 1e-9);
}

#[test]
fn oracle_clamps_at_both_ends() {
    let a = common::narrowbody("NB").airframe().unwrap();
    let steep = StateSample { vertical_rate: -6000.0, ..level_state(20_000.0, 280.0) };
    assert_eq!(oracle_fuel_flow(&steep, &a, 60_000.0).unwrap(), 2.0 * 0.10);
    let hard = StateSample { vertical_rate: 6000.0, air_accel: 5.0, ..level_state(5_000.0, 250.0) };
    assert_eq!(oracle_fuel_flow(&hard, &a, 70_000.0).unwrap(), 1.05 * 2.0 * 1.05);
}

#[test]
fn oracle_rejects_mass_outside_the_envelope() {
    let a = common::narrowbody("NB").airframe().unwrap();
    let s = level_state(0.0, 250.0);
    assert!(matches!(oracle_fuel_flow(&s, &a, a.oew), Err(Error::MassOutOfBounds { .. })));
    assert!(matches!(oracle_fuel_flow(&s, &a, a.mtow + 1.0), Err(Error::MassOutOfBounds { .. })));
}

#[test]
fn turboprop_reference_tsfc_follows_rated_power() {
    use ffdg_core::fleet::EngineType;
    let mut a = common::narrowbody("TP").airframe().unwrap();
    a.engine_type = EngineType::Turboprop;
    a.rated_power = 3000.0;
    assert!((tsfc_reference(&a) - 2.2e-5).abs() < 1e-18);
    a.rated_power = 6000.0;
    assert!((tsfc_reference(&a) - 2.2e-5 * 2f64.powf(-0.1)).abs() < 1e-18);
}

#[test]
fn zero_burn_keeps_mass_constant() {
    let a = common::narrowbody("NB").airframe().unwrap();
    let traj = traj_from(&[250.0; 40]);
    let series = integrate_mass_with(&traj, &a, 60_000.0, |_, _| Ok(0.0)).unwrap();
    assert!(series.masses.iter().all(|&m| m == 60_000.0));
}

#[test]
fn unit_burn_over_ten_steps_is_forty_kg() {
    let a = common::narrowbody("NB").airframe().unwrap();
    let traj = traj_from(&[250.0; 11]);
    let series = integrate_mass_with(&traj, &a, 60_000.0, |_, _| Ok(1.0)).unwrap();
    assert_eq!(series.masses[0] - series.masses[10], 40.0);
}

#[test]
fn total_burn_telescopes() {
    let spec = common::narrowbody("NB");
    let a = spec.airframe().unwrap();
    let traj = generate_trajectory(&spec, "NB-000", 1, &SynthConfig::default()).unwrap();
    let series = integrate_mass(&traj, &a, 0.8 * a.mtow).unwrap();
    let n = series.masses.len();
    let final_mass = series.masses[n - 1] - series.fuel_flows[n - 1] * GRID_STEP_S;
    let burn = 4.0 * series.fuel_flows.iter().sum::<f64>();
    assert!((series.masses[0] - final_mass - burn).abs() < 1e-6);
    assert!((series.total_burn() - burn).abs() < 1e-9);
    assert!(series.masses.windows(2).all(|w| w[1] < w[0]));
    let (lo, hi) = oracle_bounds(&a);
    assert!(series.fuel_flows.iter().all(|&f| (lo..=hi).contains(&f)));
}

#[test]
fn running_dry_names_the_flight() {
    let a = common::narrowbody("NB").airframe().unwrap();
    let traj = traj_from(&[250.0; 40]);
    let err = integrate_mass_with(&traj, &a, a.oew + 10.0, |_, _| Ok(1.0)).unwrap_err();
    assert_eq!(err, Error::FuelExhausted { flight_id: "NB-000".into(), sample: 3 });
}

proptest! {
    #[test]
    fn oracle_is_monotone_in_mass_in_level_flight(alt in 0.0f64..40_000.0, tas in 120.0f64..500.0, f1 in 0.0f64..1.0, f2 in 0.0f64..1.0) {
        let a = common::narrowbody("NB").airframe().unwrap();
        let state = level_state(alt, tas);
        let lo = a.oew + 1.0 + f1.min(f2) * (a.mtow - a.oew - 1.0);
        let hi = a.oew + 1.0 + f1.max(f2) * (a.mtow - a.oew - 1.0);
        let (ff_lo, ff_hi) = (oracle_fuel_flow(&state, &a, lo).unwrap(), oracle_fuel_flow(&state, &a, hi).unwrap());
        prop_assert!(ff_lo <= ff_hi);
        let (min, max) = oracle_bounds(&a);
        prop_assert!(min <= ff_lo && ff_hi <= max);
    }
}
