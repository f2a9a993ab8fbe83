//! Synthetic flights and the total-energy fuel-flow oracle.
//!
//! The oracle stands in for a licensed aircraft performance model: drag from
//! a parabolic polar, required thrust from the energy balance, and a
//! thrust-specific fuel consumption that depends on Mach number, ambient
//! temperature and engine type. Results are clamped to the engine's idle and
//! take-off flows.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::fleet::{AircraftSpec, Airframe, EngineType, Fleet, FleetEntry, Membership, NumericFeature};
use crate::math;
use crate::rng::Rng;

/// Sample spacing of every trajectory, s.
pub const GRID_STEP_S: f64 = 4.0;

pub const FT_TO_M: f64 = 0.3048;
pub const KT_TO_MS: f64 = 1852.0 / 3600.0;
pub const FPM_TO_MS: f64 = FT_TO_M / 60.0;
pub const G0: f64 = 9.80665;
const R_AIR: f64 = 287.052_87;
const GAMMA: f64 = 1.4;
const T0: f64 = 288.15;
const RHO0: f64 = 1.225;
const LAPSE_PER_FT: f64 = 0.001_981_2;
const TROPOPAUSE_FT: f64 = 36_089.0;
const T_TROPOPAUSE: f64 = 216.65;

/// Zero-lift drag coefficient shared by all types.
pub const CD0: f64 = 0.021;
/// Oswald efficiency shared by all types.
pub const OSWALD: f64 = 0.80;

/// ISA temperature in K; altitude is clamped to `[0, 60000]` ft.
pub fn isa_temperature(altitude_ft: f64) -> f64 {
    let h = altitude_ft.clamp(0.0, 60_000.0);
    if h <= TROPOPAUSE_FT {
        T0 - LAPSE_PER_FT * h
    } else {
        T_TROPOPAUSE
    }
}

/// ISA density in kg/m³.
pub fn isa_density(altitude_ft: f64) -> f64 {
    let h = altitude_ft.clamp(0.0, 60_000.0);
    let lapse_m = LAPSE_PER_FT / FT_TO_M;
    let exponent = G0 / (lapse_m * R_AIR) - 1.0;
    let rho_at = |h_ft: f64| RHO0 * math::powf(isa_temperature(h_ft) / T0, exponent);
    if h <= TROPOPAUSE_FT {
        rho_at(h)
    } else {
        let rho11 = rho_at(TROPOPAUSE_FT);
        rho11 * math::exp(-G0 * (h - TROPOPAUSE_FT) * FT_TO_M / (R_AIR * T_TROPOPAUSE))
    }
}

/// Speed of sound in m/s.
pub fn speed_of_sound(temperature_k: f64) -> f64 {
    math::sqrt(GAMMA * R_AIR * temperature_k)
}

/// One point of a flight on the 4-second grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateSample {
    /// s
    pub t: f64,
    /// ft
    pub altitude: f64,
    /// ft/min
    pub vertical_rate: f64,
    /// kt
    pub ground_speed: f64,
    /// kt
    pub tas: f64,
    /// kt/s
    pub ground_accel: f64,
    /// kt/s
    pub air_accel: f64,
    /// K
    pub temperature: f64,
}

impl StateSample {
    pub const FEATURE_NAMES: [&'static str; 7] =
        ["altitude", "vertical_rate", "ground_speed", "tas", "ground_accel", "air_accel", "temperature"];

    /// The seven network/sampling state features (everything but `t`).
    pub fn features(&self) -> [f64; 7] {
        [
            self.altitude,
            self.vertical_rate,
            self.ground_speed,
            self.tas,
            self.ground_accel,
            self.air_accel,
            self.temperature,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub type_code: String,
    pub flight_id: String,
    pub samples: Vec<StateSample>,
}

impl Trajectory {
    pub const MIN_SAMPLES: usize = 30;

    /// Checks sample count, the 4-second grid and the state ranges.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidSpec { type_code: self.flight_id.clone(), reason });
        if self.samples.len() < Self::MIN_SAMPLES {
            return Err(Error::TooFew { what: "trajectory samples", needed: Self::MIN_SAMPLES, got: self.samples.len() });
        }
        for (i, w) in self.samples.windows(2).enumerate() {
            if (w[1].t - w[0].t - GRID_STEP_S).abs() > 1e-9 {
                return bad(format!("sample {} is not on the 4 s grid", i + 1));
            }
        }
        for (i, s) in self.samples.iter().enumerate() {
            if !(180.0..=330.0).contains(&s.temperature) {
                return bad(format!("sample {i}: temperature {} K out of range", s.temperature));
            }
            if s.tas < 0.0 {
                return bad(format!("sample {i}: negative tas"));
            }
            if s.features().iter().any(|v| !v.is_finite()) {
                return bad(format!("sample {i}: non-finite state"));
            }
        }
        Ok(())
    }
}

/// Phase durations and per-flight draw ranges of the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub climb_duration_s: f64,
    pub descent_duration_s: f64,
    /// Inclusive range the cruise duration is drawn from, s.
    pub cruise_duration_s: (f64, f64),
}

impl Default for SynthConfig {
    /// One-hour flights: 10 min climb, 40 min cruise, 10 min descent.
    fn default() -> Self {
        SynthConfig { climb_duration_s: 600.0, descent_duration_s: 600.0, cruise_duration_s: (2400.0, 2400.0) }
    }
}

/// Per-flight draws scaled by the aircraft envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightProfile {
    /// ft
    pub cruise_altitude: f64,
    /// kt
    pub climb_cas: f64,
    pub cruise_mach: f64,
    /// Mean descent rate, ft/min.
    pub descent_rate: f64,
    /// s
    pub cruise_duration: f64,
    /// Added to TAS to obtain ground speed, kt.
    pub wind_offset: f64,
    /// Added to ISA temperature, K.
    pub temperature_offset: f64,
    speed_wobble: (f64, f64, f64),
    altitude_wobble: (f64, f64, f64),
}

const MAX_PROFILE_ATTEMPTS: u32 = 10;

fn draw_profile(a: &Airframe, config: &SynthConfig, rng: &mut Rng, attempt: u32) -> FlightProfile {
    // each retry narrows the envelope toward lower altitude and speed
    let shrink = math::powf(0.93, f64::from(attempt));
    let ceiling = a.hmo.min(45_000.0);
    let cruise_altitude = ceiling * rng.uniform(0.72, 0.92) * shrink;
    let climb_cas = a.vmo * rng.uniform(0.72, 0.85);
    let cruise_mach = a.mmo * rng.uniform(0.86, 0.96) * shrink;
    let (lo, hi) = config.cruise_duration_s;
    let cruise_duration = GRID_STEP_S * math::round(rng.uniform(lo, hi) / GRID_STEP_S);
    FlightProfile {
        cruise_altitude,
        climb_cas,
        cruise_mach,
        descent_rate: cruise_altitude / (config.descent_duration_s / 60.0),
        cruise_duration,
        wind_offset: rng.uniform(-25.0, 25.0),
        temperature_offset: rng.uniform(-10.0, 10.0),
        speed_wobble: (rng.uniform(0.0, 3.0), rng.uniform(240.0, 900.0), rng.uniform(0.0, TAU)),
        altitude_wobble: (rng.uniform(0.0, 40.0), rng.uniform(300.0, 900.0), rng.uniform(0.0, TAU)),
    }
}

/// Calibrated airspeed from true airspeed at altitude (equivalent-airspeed approximation).
fn cas_from_tas(tas: f64, altitude: f64) -> f64 {
    tas * math::sqrt(isa_density(altitude) / RHO0)
}

fn tas_from_cas(cas: f64, altitude: f64) -> f64 {
    cas * math::sqrt(RHO0 / isa_density(altitude))
}

fn profile_is_feasible(a: &Airframe, p: &FlightProfile) -> bool {
    let temp = isa_temperature(p.cruise_altitude) + p.temperature_offset;
    let cruise_tas = p.cruise_mach * speed_of_sound(temp) / KT_TO_MS;
    let approach = 0.42 * a.vmo;
    p.cruise_altitude <= a.hmo
        && p.cruise_altitude > 1_000.0
        && p.cruise_mach <= a.mmo
        && cas_from_tas(cruise_tas, p.cruise_altitude) <= a.vmo
        && cas_from_tas(cruise_tas, p.cruise_altitude) > approach
        && cruise_tas + p.wind_offset > 0.0
        && approach + p.wind_offset > 0.0
}

/// Deterministic climb / cruise / descent flight for `spec`.
///
/// Climb and descent follow quadratic altitude schedules; cruise carries
/// small sinusoidal speed and altitude perturbations that keep the vertical
/// rate below 100 ft/min. Accelerations are filled by [`smooth_derivatives`].
pub fn generate_trajectory(
    spec: &AircraftSpec,
    flight_id: &str,
    seed: u64,
    config: &SynthConfig,
) -> Result<Trajectory> {
    let a = spec.airframe()?;
    let mut rng = Rng::new(seed);
    let profile = (0..MAX_PROFILE_ATTEMPTS)
        .map(|attempt| draw_profile(&a, config, &mut rng, attempt))
        .find(|p| profile_is_feasible(&a, p))
        .ok_or_else(|| Error::InfeasibleProfile { type_code: spec.type_code.clone(), attempts: MAX_PROFILE_ATTEMPTS })?;
    let samples = fly_profile(&a, &profile, config);
    let traj = Trajectory { type_code: spec.type_code.clone(), flight_id: flight_id.into(), samples };
    Ok(smooth_derivatives(&traj))
}

fn fly_profile(a: &Airframe, p: &FlightProfile, config: &SynthConfig) -> Vec<StateSample> {
    let climb = config.climb_duration_s;
    let descent = config.descent_duration_s;
    let total = climb + p.cruise_duration + descent;
    let n = math::round(total / GRID_STEP_S) as usize;
    let h = p.cruise_altitude;
    let takeoff_cas = 0.45 * a.vmo;
    let approach_cas = 0.42 * a.vmo;
    let mach_tas = |temp: f64| p.cruise_mach * speed_of_sound(temp) / KT_TO_MS;
    let (sa, sp, sph) = p.speed_wobble;
    let (aa, ap, aph) = p.altitude_wobble;
    let top_of_descent = climb + p.cruise_duration;
    let cruise_tas_at_tod = {
        let alt = h + aa * (math::sin(TAU * p.cruise_duration / ap + aph) - math::sin(aph));
        mach_tas(isa_temperature(alt) + p.temperature_offset)
            + sa * (math::sin(TAU * p.cruise_duration / sp + sph) - math::sin(sph))
    };

    (0..n)
        .map(|i| {
            let t = i as f64 * GRID_STEP_S;
            let (altitude, vertical_rate, tas);
            if t < climb {
                let s = t / climb;
                altitude = h * s * (1.4 - 0.4 * s);
                vertical_rate = h / climb * (1.4 - 0.8 * s) * 60.0;
                let cas = takeoff_cas + (p.climb_cas - takeoff_cas) * (s / 0.25).min(1.0);
                let temp = isa_temperature(altitude) + p.temperature_offset;
                tas = tas_from_cas(cas, altitude).min(mach_tas(temp));
            } else if t < top_of_descent {
                let tc = t - climb;
                let phase = TAU * tc / ap + aph;
                altitude = h + aa * (math::sin(phase) - math::sin(aph));
                vertical_rate = aa * TAU / ap * math::cos(phase) * 60.0;
                let temp = isa_temperature(altitude) + p.temperature_offset;
                tas = mach_tas(temp) + sa * (math::sin(TAU * tc / sp + sph) - math::sin(sph));
            } else {
                let s = (t - top_of_descent) / descent;
                let start = h + aa * (math::sin(TAU * p.cruise_duration / ap + aph) - math::sin(aph));
                altitude = start * (1.0 - s * (0.6 + 0.4 * s));
                vertical_rate = -start / descent * (0.6 + 0.8 * s) * 60.0;
                let cas_tod = cas_from_tas(cruise_tas_at_tod, start);
                let cas = cas_tod + (approach_cas - cas_tod) * s;
                let temp = isa_temperature(altitude) + p.temperature_offset;
                tas = tas_from_cas(cas, altitude).min(mach_tas(temp));
            }
            let temperature = (isa_temperature(altitude) + p.temperature_offset).clamp(180.0, 330.0);
            StateSample {
                t,
                altitude,
                vertical_rate,
                ground_speed: (tas + p.wind_offset).max(0.0),
                tas,
                ground_accel: 0.0,
                air_accel: 0.0,
                temperature,
            }
        })
        .collect()
}

/// Three-point (8 s) centred moving average; endpoints keep their raw value.
fn moving_average3(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 == n {
                values[i]
            } else {
                (values[i - 1] + values[i] + values[i + 1]) / 3.0
            }
        })
        .collect()
}

/// Centred first difference on the 4 s grid, one-sided at the ends.
fn grid_derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (values[1] - values[0]) / GRID_STEP_S
            } else if i + 1 == n {
                (values[i] - values[i - 1]) / GRID_STEP_S
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * GRID_STEP_S)
            }
        })
        .collect()
}

/// Recomputes `ground_accel` and `air_accel` (kt/s) from the 8-second moving
/// average of ground speed and TAS. Trajectories with fewer than 3 samples
/// are returned unchanged.
pub fn smooth_derivatives(traj: &Trajectory) -> Trajectory {
    let mut out = traj.clone();
    if traj.samples.len() < 3 {
        return out;
    }
    let gs: Vec<f64> = traj.samples.iter().map(|s| s.ground_speed).collect();
    let tas: Vec<f64> = traj.samples.iter().map(|s| s.tas).collect();
    let ga = grid_derivative(&moving_average3(&gs));
    let aa = grid_derivative(&moving_average3(&tas));
    for ((s, g), a) in out.samples.iter_mut().zip(ga).zip(aa) {
        s.ground_accel = g;
        s.air_accel = a;
    }
    out
}

/// Thrust-specific fuel consumption reference at zero Mach and sea-level
/// temperature, kg/(N·s).
pub fn tsfc_reference(a: &Airframe) -> f64 {
    match a.engine_type {
        EngineType::Turbofan => 1.8e-5 * math::powf(8.0 / (a.bypass_ratio + 1.0), 0.3),
        EngineType::Turboprop => 2.2e-5 * math::powf(a.rated_power / 3000.0, -0.1),
    }
}

/// Fuel-flow bounds `[n·ff_idle, 1.05·n·ff_takeoff]`, kg/s.
pub fn oracle_bounds(a: &Airframe) -> (f64, f64) {
    (a.n_engines * a.ff_idle, 1.05 * a.n_engines * a.ff_takeoff)
}

/// Required thrust in N (may be negative in steep descents).
pub fn required_thrust(state: &StateSample, a: &Airframe, mass: f64) -> f64 {
    let rho = isa_density(state.altitude);
    let v = (state.tas * KT_TO_MS).max(1.0);
    let q_s = 0.5 * rho * v * v * a.wing_area;
    let cl = mass * G0 / q_s;
    let aspect_ratio = a.span * a.span / a.wing_area;
    let cd = CD0 + cl * cl / (PI * aspect_ratio * OSWALD);
    let drag = q_s * cd;
    drag + mass * state.air_accel * KT_TO_MS + mass * G0 * (state.vertical_rate * FPM_TO_MS) / v
}

/// Whole-aircraft fuel flow in kg/s for `state` at instantaneous `mass`.
pub fn oracle_fuel_flow(state: &StateSample, a: &Airframe, mass: f64) -> Result<f64> {
    if !(mass > a.oew && mass <= a.mtow) {
        return Err(Error::MassOutOfBounds { mass, oew: a.oew, mtow: a.mtow });
    }
    let thrust = required_thrust(state, a, mass);
    let v = (state.tas * KT_TO_MS).max(1.0);
    let mach = v / speed_of_sound(state.temperature);
    let tsfc = tsfc_reference(a) * (1.0 + mach) * math::sqrt(state.temperature / T0);
    let (lo, hi) = oracle_bounds(a);
    Ok((tsfc * thrust.max(0.0)).clamp(lo, hi))
}

/// Instantaneous masses and the fuel flows evaluated at them.
#[derive(Debug, Clone, PartialEq)]
pub struct MassSeries {
    pub masses: Vec<f64>,
    pub fuel_flows: Vec<f64>,
}

impl MassSeries {
    pub fn total_burn(&self) -> f64 {
        self.fuel_flows.iter().sum::<f64>() * GRID_STEP_S
    }
}

/// Integrates mass along `traj` with the oracle as the burn model.
pub fn integrate_mass(traj: &Trajectory, a: &Airframe, takeoff_mass: f64) -> Result<MassSeries> {
    integrate_mass_with(traj, a, takeoff_mass, |s, m| oracle_fuel_flow(s, a, m))
}

/// `m₀ = takeoff_mass`, `m_{i+1} = m_i − FF_i · 4 s`, with `FF_i = burn(state_i, m_i)`.
pub fn integrate_mass_with(
    traj: &Trajectory,
    a: &Airframe,
    takeoff_mass: f64,
    mut burn: impl FnMut(&StateSample, f64) -> Result<f64>,
) -> Result<MassSeries> {
    if !(takeoff_mass > a.oew && takeoff_mass <= a.mtow) {
        return Err(Error::MassOutOfBounds { mass: takeoff_mass, oew: a.oew, mtow: a.mtow });
    }
    let n = traj.samples.len();
    let mut masses = Vec::with_capacity(n);
    let mut fuel_flows = Vec::with_capacity(n);
    let mut m = takeoff_mass;
    for (i, s) in traj.samples.iter().enumerate() {
        if m <= a.oew {
            return Err(Error::FuelExhausted { flight_id: traj.flight_id.clone(), sample: i });
        }
        let ff = burn(s, m)?;
        masses.push(m);
        fuel_flows.push(ff);
        m -= ff * GRID_STEP_S;
    }
    Ok(MassSeries { masses, fuel_flows })
}

struct Archetype {
    prefix: &'static str,
    engine: EngineType,
    n_engines: f64,
    wing_area: f64,
    span: f64,
    length: f64,
    mtow: f64,
    oew_ratio: f64,
    mmo: f64,
    vmo: f64,
    hmo: f64,
    rated_power: f64,
    rated_thrust: f64,
    bypass_ratio: f64,
    pressure_ratio: f64,
    /// per-engine take-off, climb, approach, idle, kg/s
    ff: [f64; 4],
}

const ARCHETYPES: [Archetype; 6] = [
    Archetype {
        prefix: "TP",
        engine: EngineType::Turboprop,
        n_engines: 2.0,
        wing_area: 61.0,
        span: 27.0,
        length: 27.2,
        mtow: 23_000.0,
        oew_ratio: 0.56,
        mmo: 0.55,
        vmo: 250.0,
        hmo: 25_000.0,
        rated_power: 2_750.0,
        rated_thrust: 26.0,
        bypass_ratio: 0.0,
        pressure_ratio: 15.0,
        ff: [0.22, 0.19, 0.09, 0.04],
    },
    Archetype {
        prefix: "RJ",
        engine: EngineType::Turbofan,
        n_engines: 2.0,
        wing_area: 72.7,
        span: 26.0,
        length: 31.7,
        mtow: 38_800.0,
        oew_ratio: 0.54,
        mmo: 0.82,
        vmo: 320.0,
        hmo: 41_000.0,
        rated_power: 6_500.0,
        rated_thrust: 62.0,
        bypass_ratio: 5.0,
        pressure_ratio: 28.0,
        ff: [0.62, 0.52, 0.19, 0.08],
    },
    Archetype {
        prefix: "NB",
        engine: EngineType::Turbofan,
        n_engines: 2.0,
        wing_area: 122.6,
        span: 35.8,
        length: 37.6,
        mtow: 73_500.0,
        oew_ratio: 0.54,
        mmo: 0.82,
        vmo: 350.0,
        hmo: 39_800.0,
        rated_power: 12_000.0,
        rated_thrust: 120.0,
        bypass_ratio: 6.0,
        pressure_ratio: 31.0,
        ff: [1.05, 0.88, 0.31, 0.10],
    },
    Archetype {
        prefix: "WB",
        engine: EngineType::Turbofan,
        n_engines: 2.0,
        wing_area: 361.6,
        span: 60.3,
        length: 63.7,
        mtow: 233_000.0,
        oew_ratio: 0.52,
        mmo: 0.86,
        vmo: 330.0,
        hmo: 41_100.0,
        rated_power: 32_000.0,
        rated_thrust: 310.0,
        bypass_ratio: 5.0,
        pressure_ratio: 36.0,
        ff: [3.0, 2.45, 0.82, 0.26],
    },
    Archetype {
        prefix: "QW",
        engine: EngineType::Turbofan,
        n_engines: 4.0,
        wing_area: 845.0,
        span: 79.8,
        length: 72.7,
        mtow: 560_000.0,
        oew_ratio: 0.50,
        mmo: 0.89,
        vmo: 340.0,
        hmo: 43_000.0,
        rated_power: 33_000.0,
        rated_thrust: 330.0,
        bypass_ratio: 8.0,
        pressure_ratio: 39.0,
        ff: [3.1, 2.55, 0.9, 0.3],
    },
    Archetype {
        prefix: "BJ",
        engine: EngineType::Turbofan,
        n_engines: 2.0,
        wing_area: 50.4,
        span: 21.0,
        length: 23.2,
        mtow: 20_000.0,
        oew_ratio: 0.52,
        mmo: 0.85,
        vmo: 340.0,
        hmo: 45_000.0,
        rated_power: 3_200.0,
        rated_thrust: 31.0,
        bypass_ratio: 4.2,
        pressure_ratio: 20.0,
        ff: [0.36, 0.30, 0.12, 0.05],
    },
];

fn synth_spec(arch: &Archetype, type_code: String, rng: &mut Rng) -> AircraftSpec {
    use NumericFeature::*;
    let size = rng.uniform(0.88, 1.12);
    let jitter = |rng: &mut Rng, spread: f64| rng.uniform(1.0 - spread, 1.0 + spread);
    let mtow = arch.mtow * math::powf(size, 1.3) * jitter(rng, 0.02);
    let oew = mtow * arch.oew_ratio * jitter(rng, 0.03);
    let thrust_scale = math::powf(size, 1.1) * jitter(rng, 0.04);
    let ff_scale = thrust_scale * jitter(rng, 0.03);
    let wing_area = arch.wing_area * size * jitter(rng, 0.03);
    let mut spec = AircraftSpec::new(type_code, arch.engine)
        .with(WingArea, wing_area)
        .with(Span, arch.span * math::sqrt(size) * jitter(rng, 0.02))
        .with(Length, arch.length * math::powf(size, 0.7) * jitter(rng, 0.04))
        .with(Mtow, mtow)
        .with(Oew, oew)
        .with(Mmo, arch.mmo * jitter(rng, 0.015))
        .with(Vmo, arch.vmo * jitter(rng, 0.02))
        .with(Hmo, arch.hmo * jitter(rng, 0.03))
        .with(NEngines, arch.n_engines)
        .with(RatedPower, arch.rated_power * thrust_scale)
        .with(RatedThrust, arch.rated_thrust * thrust_scale)
        .with(BypassRatio, arch.bypass_ratio * jitter(rng, 0.08))
        .with(PressureRatio, arch.pressure_ratio * jitter(rng, 0.05));
    let [to, cl, ap, idle] = arch.ff;
    spec = spec
        .with(FfTakeoff, to * ff_scale)
        .with(FfClimb, cl * ff_scale * jitter(rng, 0.02))
        .with(FfApproach, ap * ff_scale * jitter(rng, 0.04))
        .with(FfIdle, idle * ff_scale * jitter(rng, 0.05));
    spec
}

/// Seeded synthetic fleet of `n_train` training and `n_gen` generalization
/// types spread over six airframe families.
///
/// Like the public databases it imitates, the result has gaps: turbofans lack
/// `rated_power` and turboprops lack `rated_thrust` and `bypass_ratio` when
/// the other engine class has at least two members to impute from.
pub fn synthesize_fleet(n_train: usize, n_gen: usize, seed: u64) -> Result<Fleet> {
    let mut rng = Rng::derived(seed, "synth-fleet", 0);
    let total = n_train + n_gen;
    let mut families: Vec<usize> = (0..total).map(|i| i % ARCHETYPES.len()).collect();
    rng.shuffle(&mut families);
    let mut counters = [0usize; ARCHETYPES.len()];
    let mut specs: Vec<AircraftSpec> = Vec::with_capacity(total);
    for &fam in &families {
        counters[fam] += 1;
        let arch = &ARCHETYPES[fam];
        let code = format!("{}{:02}", arch.prefix, counters[fam]);
        specs.push(synth_spec(arch, code, &mut rng));
    }

    let count = |e: EngineType| specs.iter().filter(|s| s.engine_type == e).count();
    let (fans, props) = (count(EngineType::Turbofan), count(EngineType::Turboprop));
    for spec in &mut specs {
        match spec.engine_type {
            EngineType::Turbofan if props >= 2 => spec.set(NumericFeature::RatedPower, None),
            EngineType::Turboprop if fans >= 2 => {
                spec.set(NumericFeature::RatedThrust, None);
                spec.set(NumericFeature::BypassRatio, None);
            }
            _ => {}
        }
    }

    let entries = specs
        .into_iter()
        .enumerate()
        .map(|(i, spec)| FleetEntry {
            spec,
            membership: if i < n_train { Membership::Training } else { Membership::Generalization },
        })
        .collect();
    Fleet::new(entries)
}
