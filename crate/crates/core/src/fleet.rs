//! Aircraft and engine characteristics, imputation of missing values, and
//! the pseudo-distance between aircraft types.
//!
//! The distance is the Euclidean norm between feature vectors after each
//! feature has been pushed through a uniform quantile transform fitted on the
//! whole fleet (training and generalization members together). Two types with
//! identical characteristics are at distance zero, so this is a pseudo-metric.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg;
use crate::math;
use crate::quantile::QuantileColumn;

/// Numeric aircraft/engine characteristics, in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NumericFeature {
    /// m²
    WingArea,
    /// m
    Span,
    /// m
    Length,
    /// kg
    Mtow,
    /// kg
    Oew,
    /// Mach
    Mmo,
    /// kt
    Vmo,
    /// ft
    Hmo,
    NEngines,
    /// hp, turboprops
    RatedPower,
    /// kN, turbofans
    RatedThrust,
    BypassRatio,
    PressureRatio,
    /// kg/s per engine
    FfTakeoff,
    /// kg/s per engine
    FfClimb,
    /// kg/s per engine
    FfApproach,
    /// kg/s per engine
    FfIdle,
}

pub const N_NUMERIC: usize = 17;

impl NumericFeature {
    pub const ALL: [NumericFeature; N_NUMERIC] = [
        NumericFeature::WingArea,
        NumericFeature::Span,
        NumericFeature::Length,
        NumericFeature::Mtow,
        NumericFeature::Oew,
        NumericFeature::Mmo,
        NumericFeature::Vmo,
        NumericFeature::Hmo,
        NumericFeature::NEngines,
        NumericFeature::RatedPower,
        NumericFeature::RatedThrust,
        NumericFeature::BypassRatio,
        NumericFeature::PressureRatio,
        NumericFeature::FfTakeoff,
        NumericFeature::FfClimb,
        NumericFeature::FfApproach,
        NumericFeature::FfIdle,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            NumericFeature::WingArea => "wing_area",
            NumericFeature::Span => "span",
            NumericFeature::Length => "length",
            NumericFeature::Mtow => "mtow",
            NumericFeature::Oew => "oew",
            NumericFeature::Mmo => "mmo",
            NumericFeature::Vmo => "vmo",
            NumericFeature::Hmo => "hmo",
            NumericFeature::NEngines => "n_engines",
            NumericFeature::RatedPower => "rated_power",
            NumericFeature::RatedThrust => "rated_thrust",
            NumericFeature::BypassRatio => "bypass_ratio",
            NumericFeature::PressureRatio => "pressure_ratio",
            NumericFeature::FfTakeoff => "ff_takeoff",
            NumericFeature::FfClimb => "ff_climb",
            NumericFeature::FfApproach => "ff_approach",
            NumericFeature::FfIdle => "ff_idle",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EngineType {
    Turbofan,
    Turboprop,
}

impl EngineType {
    pub fn name(self) -> &'static str {
        match self {
            EngineType::Turbofan => "turbofan",
            EngineType::Turboprop => "turboprop",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "turbofan" => Some(EngineType::Turbofan),
            "turboprop" => Some(EngineType::Turboprop),
            _ => None,
        }
    }
}

/// Static characteristics of one aircraft type. Numeric fields may be missing
/// until the fleet has been imputed.
#[derive(Debug, Clone, PartialEq)]
pub struct AircraftSpec {
    pub type_code: String,
    pub engine_type: EngineType,
    values: [Option<f64>; N_NUMERIC],
}

impl AircraftSpec {
    /// A spec with every numeric field missing.
    pub fn new(type_code: impl Into<String>, engine_type: EngineType) -> Self {
        AircraftSpec { type_code: type_code.into(), engine_type, values: [None; N_NUMERIC] }
    }

    pub fn with(mut self, feature: NumericFeature, value: f64) -> Self {
        self.values[feature.index()] = Some(value);
        self
    }

    pub fn get(&self, feature: NumericFeature) -> Option<f64> {
        self.values[feature.index()]
    }

    pub fn set(&mut self, feature: NumericFeature, value: Option<f64>) {
        self.values[feature.index()] = value;
    }

    pub fn value(&self, feature: NumericFeature) -> Result<f64> {
        self.get(feature).ok_or_else(|| Error::MissingValue {
            type_code: self.type_code.clone(),
            feature: feature.name(),
        })
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// Resolved numeric view; fails if any field is still missing.
    pub fn airframe(&self) -> Result<Airframe> {
        use NumericFeature::*;
        let v = |f| self.value(f);
        Ok(Airframe {
            engine_type: self.engine_type,
            wing_area: v(WingArea)?,
            span: v(Span)?,
            length: v(Length)?,
            mtow: v(Mtow)?,
            oew: v(Oew)?,
            mmo: v(Mmo)?,
            vmo: v(Vmo)?,
            hmo: v(Hmo)?,
            n_engines: v(NEngines)?,
            rated_power: v(RatedPower)?,
            rated_thrust: v(RatedThrust)?,
            bypass_ratio: v(BypassRatio)?,
            pressure_ratio: v(PressureRatio)?,
            ff_takeoff: v(FfTakeoff)?,
            ff_climb: v(FfClimb)?,
            ff_approach: v(FfApproach)?,
            ff_idle: v(FfIdle)?,
        })
    }

    /// Checks the invariants that must hold once every field is present.
    pub fn validate(&self) -> Result<()> {
        let a = self.airframe()?;
        let fail = |reason: &str| Err(Error::InvalidSpec { type_code: self.type_code.clone(), reason: reason.to_string() });
        if self.values.iter().any(|v| !v.is_some_and(f64::is_finite)) {
            return fail("non-finite characteristic");
        }
        if !(a.oew > 0.0 && a.oew < a.mtow) {
            return fail("requires 0 < oew < mtow");
        }
        if !(a.wing_area > 0.0 && a.span > 0.0 && a.length > 0.0) {
            return fail("wing_area, span and length must be positive");
        }
        if a.n_engines < 1.0 || a.n_engines != math::round(a.n_engines) {
            return fail("n_engines must be a whole number >= 1");
        }
        if !(a.mmo > 0.0 && a.vmo > 0.0 && a.hmo > 0.0) {
            return fail("mmo, vmo and hmo must be positive");
        }
        if !(0.0 < a.ff_idle && a.ff_idle < a.ff_approach && a.ff_approach < a.ff_climb && a.ff_climb < a.ff_takeoff) {
            return fail("requires 0 < ff_idle < ff_approach < ff_climb < ff_takeoff");
        }
        Ok(())
    }
}

/// Fully resolved characteristics used by the physics code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Airframe {
    pub engine_type: EngineType,
    pub wing_area: f64,
    pub span: f64,
    pub length: f64,
    pub mtow: f64,
    pub oew: f64,
    pub mmo: f64,
    pub vmo: f64,
    pub hmo: f64,
    pub n_engines: f64,
    pub rated_power: f64,
    pub rated_thrust: f64,
    pub bypass_ratio: f64,
    pub pressure_ratio: f64,
    pub ff_takeoff: f64,
    pub ff_climb: f64,
    pub ff_approach: f64,
    pub ff_idle: f64,
}

impl Airframe {
    /// Whole-aircraft output cap of the network heads, 1.1 x total take-off flow.
    pub fn ff_cap(&self) -> f64 {
        1.1 * self.n_engines * self.ff_takeoff
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Membership {
    Training,
    Generalization,
}

impl Membership {
    /// Token used in the fleet file's `set` column.
    pub fn token(self) -> &'static str {
        match self {
            Membership::Training => "train",
            Membership::Generalization => "gen",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "train" => Some(Membership::Training),
            "gen" => Some(Membership::Generalization),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FleetEntry {
    pub spec: AircraftSpec,
    pub membership: Membership,
}

/// Ordered set of aircraft types with unique type codes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fleet {
    entries: Vec<FleetEntry>,
}

impl Fleet {
    pub fn new(entries: Vec<FleetEntry>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if entries[..i].iter().any(|o| o.spec.type_code == e.spec.type_code) {
                return Err(Error::DuplicateTypeCode(e.spec.type_code.clone()));
            }
        }
        Ok(Fleet { entries })
    }

    pub fn entries(&self) -> &[FleetEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn specs(&self) -> impl Iterator<Item = &AircraftSpec> {
        self.entries.iter().map(|e| &e.spec)
    }

    pub fn members(&self, membership: Membership) -> impl Iterator<Item = &AircraftSpec> {
        self.entries.iter().filter(move |e| e.membership == membership).map(|e| &e.spec)
    }

    pub fn get(&self, type_code: &str) -> Option<&FleetEntry> {
        self.entries.iter().find(|e| e.spec.type_code == type_code)
    }

    pub fn membership(&self, type_code: &str) -> Option<Membership> {
        self.get(type_code).map(|e| e.membership)
    }

    /// Validates every spec's invariants (requires a complete fleet).
    pub fn validate(&self) -> Result<()> {
        self.specs().try_for_each(AircraftSpec::validate)
    }

    /// Fills missing numeric fields by iterative regression imputation.
    pub fn impute_missing(&self, options: &ImputeOptions) -> Result<Fleet> {
        let specs: Vec<AircraftSpec> = self.specs().cloned().collect();
        let imputed = impute_specs(&specs, options)?;
        let entries = self
            .entries
            .iter()
            .zip(imputed)
            .map(|(e, spec)| FleetEntry { spec, membership: e.membership })
            .collect();
        Ok(Fleet { entries })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImputeOptions {
    /// Regression rounds after mean initialization; 0 keeps the column means.
    pub max_rounds: usize,
    /// Stop once every imputed value moves by less than this many standard
    /// deviations of its feature in a round.
    pub tolerance: f64,
}

impl Default for ImputeOptions {
    fn default() -> Self {
        ImputeOptions { max_rounds: 10, tolerance: 1e-6 }
    }
}

/// Iterative imputation: mean initialization, then round-robin ordinary least
/// squares of each incomplete feature on every other feature (plus the
/// engine-type indicator), in declaration order.
pub fn impute_specs(specs: &[AircraftSpec], options: &ImputeOptions) -> Result<Vec<AircraftSpec>> {
    if specs.iter().all(AircraftSpec::is_complete) {
        return Ok(specs.to_vec());
    }
    if specs.len() < 2 {
        return Err(Error::TooFew { what: "specs for imputation", needed: 2, got: specs.len() });
    }
    let rows = specs.len();
    // predictors: 17 numeric + turbofan indicator
    let cols = N_NUMERIC + 1;
    let mut table = alloc::vec![0.0; rows * cols];
    let mut missing: Vec<Vec<usize>> = alloc::vec![Vec::new(); N_NUMERIC];
    let mut spread = [0.0; N_NUMERIC];

    for f in NumericFeature::ALL {
        let j = f.index();
        let observed: Vec<f64> = specs.iter().filter_map(|s| s.get(f)).collect();
        let absent: Vec<usize> = (0..rows).filter(|&r| specs[r].get(f).is_none()).collect();
        if !absent.is_empty() && observed.len() < 2 {
            return Err(Error::UnimputableFeature { feature: f.name() });
        }
        let mean = observed.iter().sum::<f64>() / observed.len() as f64;
        spread[j] = math::sqrt(observed.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / observed.len() as f64);
        for (r, s) in specs.iter().enumerate() {
            table[r * cols + j] = s.get(f).unwrap_or(mean);
        }
        missing[j] = absent;
    }
    for (r, s) in specs.iter().enumerate() {
        table[r * cols + N_NUMERIC] = f64::from(u8::from(s.engine_type == EngineType::Turbofan));
    }

    for _round in 0..options.max_rounds {
        let mut converged = true;
        for f in NumericFeature::ALL {
            let j = f.index();
            if missing[j].is_empty() {
                continue;
            }
            let fit_rows: Vec<usize> = (0..rows).filter(|r| !missing[j].contains(r)).collect();
            let mut design = Vec::with_capacity(fit_rows.len() * (cols - 1));
            let mut target = Vec::with_capacity(fit_rows.len());
            for &r in &fit_rows {
                design.extend((0..cols).filter(|&c| c != j).map(|c| table[r * cols + c]));
                target.push(table[r * cols + j]);
            }
            let (intercept, coef) = linalg::least_squares(&design, &target, cols - 1);
            for &r in &missing[j] {
                let pred = intercept
                    + (0..cols).filter(|&c| c != j).zip(&coef).map(|(c, b)| b * table[r * cols + c]).sum::<f64>();
                let change = math::abs(pred - table[r * cols + j]);
                if change > options.tolerance * spread[j] {
                    converged = false;
                }
                table[r * cols + j] = pred;
            }
        }
        if converged {
            break;
        }
    }

    let mut out = specs.to_vec();
    for f in NumericFeature::ALL {
        let j = f.index();
        for &r in &missing[j] {
            let mut v = table[r * cols + j];
            if f == NumericFeature::NEngines {
                v = math::round(v).max(1.0);
            }
            out[r].set(f, Some(v));
        }
    }
    Ok(out)
}

/// One coordinate of the vector compared by [`pseudo_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DistanceFeature {
    Numeric(NumericFeature),
    /// One-hot engine type indicators.
    IsTurbofan,
    IsTurboprop,
}

impl DistanceFeature {
    pub fn value_of(self, spec: &AircraftSpec) -> Option<f64> {
        match self {
            DistanceFeature::Numeric(f) => spec.get(f),
            DistanceFeature::IsTurbofan => Some(f64::from(u8::from(spec.engine_type == EngineType::Turbofan))),
            DistanceFeature::IsTurboprop => Some(f64::from(u8::from(spec.engine_type == EngineType::Turboprop))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DistanceFeature::Numeric(f) => f.name(),
            DistanceFeature::IsTurbofan => "engine_turbofan",
            DistanceFeature::IsTurboprop => "engine_turboprop",
        }
    }
}

impl fmt::Display for DistanceFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every numeric characteristic plus the one-hot engine type.
pub fn default_distance_features() -> Vec<DistanceFeature> {
    NumericFeature::ALL
        .into_iter()
        .map(DistanceFeature::Numeric)
        .chain([DistanceFeature::IsTurbofan, DistanceFeature::IsTurboprop])
        .collect()
}

/// Per-feature uniform quantile transforms fitted on a fleet.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileMap {
    features: Vec<DistanceFeature>,
    columns: Vec<QuantileColumn>,
}

impl QuantileMap {
    pub fn features(&self) -> &[DistanceFeature] {
        &self.features
    }

    pub fn column(&self, feature: DistanceFeature) -> Option<&QuantileColumn> {
        self.features.iter().position(|&f| f == feature).map(|i| &self.columns[i])
    }

    /// Quantile-mapped feature vector of `spec`, in fitted-feature order.
    pub fn map_spec(&self, spec: &AircraftSpec) -> Result<Vec<f64>> {
        self.features
            .iter()
            .zip(&self.columns)
            .map(|(f, col)| {
                f.value_of(spec)
                    .map(|v| col.map(v))
                    .ok_or_else(|| Error::MissingFeature { feature: f.name().to_string() })
            })
            .collect()
    }
}

pub fn fit_quantile_map<'a>(
    specs: impl IntoIterator<Item = &'a AircraftSpec>,
    features: &[DistanceFeature],
) -> Result<QuantileMap> {
    let specs: Vec<&AircraftSpec> = specs.into_iter().collect();
    let columns = features
        .iter()
        .map(|f| {
            let values = specs
                .iter()
                .map(|s| f.value_of(s).ok_or_else(|| Error::MissingValue { type_code: s.type_code.clone(), feature: f.name() }))
                .collect::<Result<Vec<f64>>>()?;
            QuantileColumn::fit(&values)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantileMap { features: features.to_vec(), columns })
}

/// Fits the default distance features on every member of `fleet`.
pub fn fit_fleet_quantile_map(fleet: &Fleet) -> Result<QuantileMap> {
    fit_quantile_map(fleet.specs(), &default_distance_features())
}

/// Euclidean norm of the difference of two mapped vectors.
pub fn mapped_distance(a: &[f64], b: &[f64]) -> f64 {
    math::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

pub fn pseudo_distance(a: &AircraftSpec, b: &AircraftSpec, qmap: &QuantileMap) -> Result<f64> {
    Ok(mapped_distance(&qmap.map_spec(a)?, &qmap.map_spec(b)?))
}

/// Distance to the nearest training member and its type code; ties go to the
/// lexicographically smaller code.
pub fn closest_training_distance(spec: &AircraftSpec, fleet: &Fleet, qmap: &QuantileMap) -> Result<(f64, String)> {
    let target = qmap.map_spec(spec)?;
    let mut best: Option<(f64, &str)> = None;
    for member in fleet.members(Membership::Training) {
        let d = mapped_distance(&target, &qmap.map_spec(member)?);
        let better = match best {
            None => true,
            Some((bd, code)) => d < bd || (d == bd && member.type_code.as_str() < code),
        };
        if better {
            best = Some((d, &member.type_code));
        }
    }
    best.map(|(d, code)| (d, code.to_string())).ok_or(Error::EmptyTrainingFleet)
}
