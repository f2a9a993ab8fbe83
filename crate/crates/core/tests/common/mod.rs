#![allow(dead_code)]

use ffdg_core::dataset::{ObservationRow, N_STATE};
use ffdg_core::fleet::{AircraftSpec, EngineType, NumericFeature, N_NUMERIC};
use ffdg_core::rng::Rng;

/// A complete, valid narrow-body-like spec.
pub fn narrowbody(code: &str) -> AircraftSpec {
    use NumericFeature::*;
    AircraftSpec::new(code, EngineType::Turbofan)
        .with(WingArea, 122.6)
        .with(Span, 35.8)
        .with(Length, 37.6)
        .with(Mtow, 73_500.0)
        .with(Oew, 42_600.0)
        .with(Mmo, 0.82)
        .with(Vmo, 350.0)
        .with(Hmo, 39_800.0)
        .with(NEngines, 2.0)
        .with(RatedPower, 12_000.0)
        .with(RatedThrust, 120.0)
        .with(BypassRatio, 6.0)
        .with(PressureRatio, 31.0)
        .with(FfTakeoff, 1.05)
        .with(FfClimb, 0.88)
        .with(FfApproach, 0.31)
        .with(FfIdle, 0.10)
}

/// Rows whose target is an affine function of the first two state features.
pub fn affine_rows(type_code: &str, flights: usize, per_flight: usize, seed: u64) -> Vec<ObservationRow> {
    let mut rng = Rng::new(seed);
    let mut spec = [0.0; N_NUMERIC];
    spec[NumericFeature::NEngines.index()] = 2.0;
    spec[NumericFeature::FfTakeoff.index()] = 1.0;
    let mut rows = Vec::new();
    for f in 0..flights {
        for _ in 0..per_flight {
            let mut state = [0.0; N_STATE];
            for s in &mut state {
                *s = rng.uniform(0.0, 1.0);
            }
            rows.push(ObservationRow {
                flight_id: format!("{type_code}-{f:03}"),
                type_code: type_code.into(),
                mass_variant: 70,
                state,
                mass: 1.0,
                spec,
                engine_type: EngineType::Turbofan,
                target_ff: 0.5 + 0.3 * state[0] + 0.2 * state[1],
            });
        }
    }
    rows
}

/// A row carrying only identifiers and a state vector.
pub fn state_row(flight_id: &str, type_code: &str, state: [f64; N_STATE]) -> ObservationRow {
    let mut spec = [0.0; N_NUMERIC];
    spec[NumericFeature::NEngines.index()] = 2.0;
    spec[NumericFeature::FfTakeoff.index()] = 1.0;
    ObservationRow {
        flight_id: flight_id.into(),
        type_code: type_code.into(),
        mass_variant: 80,
        state,
        mass: 1.0,
        spec,
        engine_type: EngineType::Turbofan,
        target_ff: 1.0,
    }
}
