//! Observation tables: mass-grid expansion of trajectories into labelled
//! rows, and flight-level train/validation/test splits.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fleet::{AircraftSpec, EngineType, NumericFeature, N_NUMERIC};
use crate::rng::Rng;
use crate::synth::{self, Trajectory};

/// Take-off masses as a percentage of MTOW.
pub const MASS_VARIANTS: [u8; 6] = [70, 75, 80, 85, 90, 95];

pub const N_STATE: usize = 7;
/// State features, mass, numeric characteristics and the engine one-hot.
pub const INPUT_DIM: usize = N_STATE + 1 + N_NUMERIC + 2;
/// Input columns holding aircraft/engine characteristics (the noise targets).
pub const SPEC_COLUMNS: core::ops::Range<usize> = (N_STATE + 1)..(N_STATE + 1 + N_NUMERIC);

/// One training example.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRow {
    pub flight_id: String,
    pub type_code: String,
    /// Take-off mass as a percentage of MTOW.
    pub mass_variant: u8,
    /// altitude, vertical_rate, ground_speed, tas, ground_accel, air_accel, temperature
    pub state: [f64; N_STATE],
    /// kg
    pub mass: f64,
    /// Numeric characteristics in [`NumericFeature::ALL`] order.
    pub spec: [f64; N_NUMERIC],
    pub engine_type: EngineType,
    /// kg/s
    pub target_ff: f64,
}

impl ObservationRow {
    pub fn spec_value(&self, feature: NumericFeature) -> f64 {
        self.spec[feature.index()]
    }

    pub fn vertical_rate(&self) -> f64 {
        self.state[1]
    }

    /// Upper bound used by the network heads, kg/s.
    pub fn ff_cap(&self) -> f64 {
        1.1 * self.spec_value(NumericFeature::NEngines) * self.spec_value(NumericFeature::FfTakeoff)
    }

    /// Writes the network input vector (length [`INPUT_DIM`]) into `out`.
    pub fn write_inputs(&self, out: &mut [f64]) {
        out[..N_STATE].copy_from_slice(&self.state);
        out[N_STATE] = self.mass;
        out[SPEC_COLUMNS].copy_from_slice(&self.spec);
        out[INPUT_DIM - 2] = f64::from(u8::from(self.engine_type == EngineType::Turbofan));
        out[INPUT_DIM - 1] = f64::from(u8::from(self.engine_type == EngineType::Turboprop));
    }
}

/// Which mass the `mass` input column carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassFeature {
    /// Mass integrated along the flight.
    #[default]
    Instantaneous,
    /// The constant take-off mass of the variant.
    Takeoff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassGridExpansion {
    pub rows: Vec<ObservationRow>,
    /// Variants that could not be flown, with the reason.
    pub dropped: Vec<(u8, Error)>,
}

/// Labels `traj` at each take-off mass of the grid.
///
/// Variants whose take-off mass does not exceed OEW are skipped silently;
/// variants that run out of fuel are reported in `dropped`.
pub fn expand_mass_grid(traj: &Trajectory, spec: &AircraftSpec, mass_feature: MassFeature) -> Result<MassGridExpansion> {
    let airframe = spec.airframe()?;
    let mut spec_values = [0.0; N_NUMERIC];
    for f in NumericFeature::ALL {
        spec_values[f.index()] = spec.value(f)?;
    }
    let mut rows = Vec::with_capacity(traj.samples.len() * MASS_VARIANTS.len());
    let mut dropped = Vec::new();
    for pct in MASS_VARIANTS {
        let takeoff_mass = f64::from(pct) / 100.0 * airframe.mtow;
        if takeoff_mass <= airframe.oew {
            continue;
        }
        let series = match synth::integrate_mass(traj, &airframe, takeoff_mass) {
            Ok(s) => s,
            Err(e @ Error::FuelExhausted { .. }) => {
                dropped.push((pct, e));
                continue;
            }
            Err(e) => return Err(e),
        };
        for ((sample, &mass), &ff) in traj.samples.iter().zip(&series.masses).zip(&series.fuel_flows) {
            rows.push(ObservationRow {
                flight_id: traj.flight_id.clone(),
                type_code: traj.type_code.clone(),
                mass_variant: pct,
                state: sample.features(),
                mass: match mass_feature {
                    MassFeature::Instantaneous => mass,
                    MassFeature::Takeoff => takeoff_mass,
                },
                spec: spec_values,
                engine_type: spec.engine_type,
                target_ff: ff,
            });
        }
    }
    Ok(MassGridExpansion { rows, dropped })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subset {
    Train,
    Validation,
    Test,
}

impl Subset {
    pub fn token(self) -> &'static str {
        match self {
            Subset::Train => "train",
            Subset::Validation => "val",
            Subset::Test => "test",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "train" => Some(Subset::Train),
            "val" => Some(Subset::Validation),
            "test" => Some(Subset::Test),
            _ => None,
        }
    }
}

/// Flight-level assignment to subsets, with each flight's aircraft type.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetSplit {
    /// `(flight_id, type_code, subset)` in file order.
    assignments: Vec<(String, String, Subset)>,
}

impl DatasetSplit {
    /// Builds a split without checking it; see [`DatasetSplit::check_leakage`].
    pub fn from_assignments(assignments: Vec<(String, String, Subset)>) -> Self {
        DatasetSplit { assignments }
    }

    pub fn assignments(&self) -> &[(String, String, Subset)] {
        &self.assignments
    }

    pub fn flights(&self, subset: Subset) -> BTreeSet<&str> {
        self.assignments.iter().filter(|a| a.2 == subset).map(|a| a.0.as_str()).collect()
    }

    /// Subset of `flight_id`; the first assignment wins if the split is leaky.
    pub fn subset_of(&self, flight_id: &str) -> Option<Subset> {
        self.assignments.iter().find(|a| a.0 == flight_id).map(|a| a.2)
    }

    /// Lookup table from flight id to subset.
    pub fn index(&self) -> BTreeMap<&str, Subset> {
        let mut map = BTreeMap::new();
        for (f, _, s) in &self.assignments {
            map.entry(f.as_str()).or_insert(*s);
        }
        map
    }

    /// Fails if any flight is assigned more than once.
    pub fn check_leakage(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (flight, _, _) in &self.assignments {
            if !seen.insert(flight.as_str()) {
                return Err(Error::FlightLeakage { flight_id: flight.clone() });
            }
        }
        Ok(())
    }
}

/// Per-type `(⌊0.8n⌋, ⌊0.1n⌋, rest)` split after a seeded shuffle.
///
/// `flights` holds `(flight_id, type_code)` pairs; types are processed in
/// sorted order and each type shuffles with its own derived stream.
pub fn split_flights(flights: &[(String, String)], seed: u64) -> Result<DatasetSplit> {
    let mut by_type: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (flight, ty) in flights {
        by_type.entry(ty.as_str()).or_default().push(flight.as_str());
    }
    let mut assignments = Vec::with_capacity(flights.len());
    for (ty, mut ids) in by_type {
        let n = ids.len();
        if n < 10 {
            return Err(Error::TooFewFlights { type_code: ty.into(), count: n });
        }
        let mut rng = Rng::derived(seed, &format!("split:{ty}"), 0);
        rng.shuffle(&mut ids);
        let n_train = n * 8 / 10;
        let n_val = n / 10;
        for (i, id) in ids.into_iter().enumerate() {
            let subset = if i < n_train {
                Subset::Train
            } else if i < n_train + n_val {
                Subset::Validation
            } else {
                Subset::Test
            };
            assignments.push((id.into(), ty.into(), subset));
        }
    }
    Ok(DatasetSplit { assignments })
}
