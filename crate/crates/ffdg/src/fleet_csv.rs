//! Fleet file: one row per type, empty cell = missing, `set` ∈ {train, gen}.

use std::path::Path;

use ffdg_core::fleet::{AircraftSpec, EngineType, Fleet, FleetEntry, Membership, NumericFeature};

use crate::csvio;
use crate::error::{Error, Result};

/// Column order of the fleet file.
pub fn header() -> Vec<&'static str> {
    let mut h = vec!["type_code"];
    for f in NumericFeature::ALL {
        if f == NumericFeature::NEngines {
            h.push("engine_type");
        }
        h.push(f.name());
    }
    h.push("set");
    h
}

pub fn read_fleet(path: &Path) -> Result<Fleet> {
    let header = header();
    let mut rdr = csvio::open(path, &header)?;
    let mut entries = Vec::new();
    for item in csvio::records(path, &mut rdr) {
        let (line, rec) = item?;
        let type_code = csvio::text(&rec, 0);
        if type_code.is_empty() || type_code.contains(|c: char| c == ',' || c.is_whitespace()) {
            return Err(Error::parse(path, line, format!("type_code `{type_code}` must be non-empty without commas or spaces")));
        }
        let engine_raw = rec.get(header.iter().position(|&c| c == "engine_type").unwrap()).unwrap_or("");
        let engine = EngineType::from_name(engine_raw.trim())
            .ok_or_else(|| Error::parse(path, line, format!("column `engine_type`: unknown engine type `{engine_raw}`")))?;
        let mut spec = AircraftSpec::new(type_code, engine);
        for f in NumericFeature::ALL {
            let idx = header.iter().position(|&c| c == f.name()).unwrap();
            if rec.get(idx).is_some_and(|v| !v.trim().is_empty()) {
                spec.set(f, Some(csvio::cell(path, line, &rec, idx, f.name())?));
            }
        }
        let set_raw = rec.get(header.len() - 1).unwrap_or("");
        let membership = Membership::from_token(set_raw.trim())
            .ok_or_else(|| Error::parse(path, line, format!("column `set`: expected train or gen, found `{set_raw}`")))?;
        entries.push(FleetEntry { spec, membership });
    }
    Ok(Fleet::new(entries)?)
}

pub fn write_fleet(path: &Path, fleet: &Fleet) -> Result<()> {
    let mut w = csvio::create(path, &header())?;
    for e in fleet.entries() {
        let mut rec = vec![e.spec.type_code.clone()];
        for f in NumericFeature::ALL {
            if f == NumericFeature::NEngines {
                rec.push(e.spec.engine_type.name().to_string());
            }
            rec.push(e.spec.get(f).map(|v| v.to_string()).unwrap_or_default());
        }
        rec.push(e.membership.token().to_string());
        w.write_record(&rec).map_err(|err| csvio::csv_error(path, err))?;
    }
    csvio::finish(path, w)
}
