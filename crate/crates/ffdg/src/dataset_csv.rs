//! Observation table, split file and the `.meta` sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ffdg_core::dataset::{DatasetSplit, ObservationRow, Subset, MASS_VARIANTS, N_STATE};
use ffdg_core::fleet::{EngineType, NumericFeature, N_NUMERIC};
use ffdg_core::synth::StateSample;

use crate::csvio;
use crate::error::{Error, Result};
use crate::keyvalue;

/// Column order: identifiers, the seven state features, mass, the spec
/// features, engine type, label.
pub fn header() -> Vec<&'static str> {
    let mut h = vec!["flight_id", "type_code", "mass_variant"];
    h.extend(StateSample::FEATURE_NAMES);
    h.push("mass");
    h.extend(NumericFeature::ALL.iter().map(|f| f.name()));
    h.extend(["engine_type", "target_ff"]);
    h
}

const FIRST_STATE: usize = 3;
const MASS: usize = FIRST_STATE + N_STATE;
const FIRST_SPEC: usize = MASS + 1;
const ENGINE: usize = FIRST_SPEC + N_NUMERIC;
const TARGET: usize = ENGINE + 1;

pub fn write_dataset(path: &Path, rows: &[ObservationRow]) -> Result<()> {
    let mut w = csvio::create(path, &header())?;
    let mut rec: Vec<String> = Vec::with_capacity(TARGET + 1);
    for r in rows {
        rec.clear();
        rec.extend([r.flight_id.clone(), r.type_code.clone(), r.mass_variant.to_string()]);
        rec.extend(r.state.iter().map(f64::to_string));
        rec.push(r.mass.to_string());
        rec.extend(r.spec.iter().map(f64::to_string));
        rec.push(r.engine_type.name().to_string());
        rec.push(r.target_ff.to_string());
        w.write_record(&rec).map_err(|e| csvio::csv_error(path, e))?;
    }
    csvio::finish(path, w)
}

pub fn read_dataset(path: &Path) -> Result<Vec<ObservationRow>> {
    let header = header();
    let mut rdr = csvio::open(path, &header)?;
    let mut rows = Vec::new();
    for item in csvio::records(path, &mut rdr) {
        let (line, rec) = item?;
        let mass_variant: u8 = csvio::cell(path, line, &rec, 2, header[2])?;
        if !MASS_VARIANTS.contains(&mass_variant) {
            return Err(Error::parse(path, line, format!("column `mass_variant`: {mass_variant} is not on the grid")));
        }
        let mut state = [0.0; N_STATE];
        for (k, s) in state.iter_mut().enumerate() {
            *s = csvio::cell(path, line, &rec, FIRST_STATE + k, header[FIRST_STATE + k])?;
        }
        let mut spec = [0.0; N_NUMERIC];
        for (k, s) in spec.iter_mut().enumerate() {
            *s = csvio::cell(path, line, &rec, FIRST_SPEC + k, header[FIRST_SPEC + k])?;
        }
        let engine_raw = rec.get(ENGINE).unwrap_or("");
        let engine_type = EngineType::from_name(engine_raw)
            .ok_or_else(|| Error::parse(path, line, format!("column `engine_type`: unknown engine type `{engine_raw}`")))?;
        rows.push(ObservationRow {
            flight_id: csvio::text(&rec, 0),
            type_code: csvio::text(&rec, 1),
            mass_variant,
            state,
            mass: csvio::cell(path, line, &rec, MASS, header[MASS])?,
            spec,
            engine_type,
            target_ff: csvio::cell(path, line, &rec, TARGET, header[TARGET])?,
        });
    }
    Ok(rows)
}

pub const SPLIT_HEADER: [&str; 3] = ["flight_id", "type_code", "subset"];

pub fn write_split(path: &Path, split: &DatasetSplit) -> Result<()> {
    let mut w = csvio::create(path, &SPLIT_HEADER)?;
    for (flight, ty, subset) in split.assignments() {
        w.write_record([flight.as_str(), ty.as_str(), subset.token()]).map_err(|e| csvio::csv_error(path, e))?;
    }
    csvio::finish(path, w)
}

/// Reads a split without judging it; leakage is checked by the consumers.
pub fn read_split(path: &Path) -> Result<DatasetSplit> {
    let mut rdr = csvio::open(path, &SPLIT_HEADER)?;
    let mut assignments = Vec::new();
    for item in csvio::records(path, &mut rdr) {
        let (line, rec) = item?;
        let raw = rec.get(2).unwrap_or("");
        let subset = Subset::from_token(raw)
            .ok_or_else(|| Error::parse(path, line, format!("column `subset`: expected train, val or test, found `{raw}`")))?;
        assignments.push((csvio::text(&rec, 0), csvio::text(&rec, 1), subset));
    }
    Ok(DatasetSplit::from_assignments(assignments))
}

/// Provenance sidecar written next to a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub version: String,
    pub prng: String,
    pub seed: u64,
    pub fleet_sha256: String,
    pub flights_per_type: usize,
    pub mass_feature: String,
    pub rows: usize,
}

/// `observations.csv` → `observations.meta`.
pub fn meta_path(dataset: &Path) -> PathBuf {
    dataset.with_extension("meta")
}

impl DatasetMeta {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in [
            ("version", self.version.clone()),
            ("prng", self.prng.clone()),
            ("seed", self.seed.to_string()),
            ("fleet_sha256", self.fleet_sha256.clone()),
            ("flights_per_type", self.flights_per_type.to_string()),
            ("mass_feature", self.mass_feature.clone()),
            ("rows", self.rows.to_string()),
        ] {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let map = keyvalue::parse(path, &text)?;
        let get = |k: &str| map.get(k).map(|(_, v)| v.clone()).ok_or_else(|| Error::parse(path, 0, format!("missing key `{k}`")));
        let num = |k: &str| -> Result<u64> {
            let (line, v) = map.get(k).ok_or_else(|| Error::parse(path, 0, format!("missing key `{k}`")))?;
            v.parse().map_err(|_| Error::parse(path, *line, format!("`{k}` is not an integer")))
        };
        Ok(DatasetMeta {
            version: get("version")?,
            prng: get("prng")?,
            seed: num("seed")?,
            fleet_sha256: get("fleet_sha256")?,
            flights_per_type: num("flights_per_type")? as usize,
            mass_feature: get("mass_feature")?,
            rows: num("rows")? as usize,
        })
    }
}
