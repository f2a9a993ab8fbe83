//! Trajectory file: long format, one row per sample, flights contiguous.

use std::path::Path;

use ffdg_core::synth::{StateSample, Trajectory};

use crate::csvio;
use crate::error::{Error, Result};

pub const HEADER: [&str; 10] =
    ["flight_id", "type_code", "t", "altitude", "vertical_rate", "ground_speed", "tas", "ground_accel", "air_accel", "temperature"];

pub fn write_trajectories(path: &Path, trajectories: &[Trajectory]) -> Result<()> {
    let mut w = csvio::create(path, &HEADER)?;
    for traj in trajectories {
        for s in &traj.samples {
            let mut rec = vec![traj.flight_id.clone(), traj.type_code.clone(), s.t.to_string()];
            rec.extend(s.features().iter().map(f64::to_string));
            w.write_record(&rec).map_err(|e| csvio::csv_error(path, e))?;
        }
    }
    csvio::finish(path, w)
}

/// Reads trajectories in file order; a flight's samples must be contiguous.
pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>> {
    let mut rdr = csvio::open(path, &HEADER)?;
    let mut out: Vec<Trajectory> = Vec::new();
    for item in csvio::records(path, &mut rdr) {
        let (line, rec) = item?;
        let mut v = [0.0; 8];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = csvio::cell(path, line, &rec, k + 2, HEADER[k + 2])?;
        }
        let sample = StateSample {
            t: v[0],
            altitude: v[1],
            vertical_rate: v[2],
            ground_speed: v[3],
            tas: v[4],
            ground_accel: v[5],
            air_accel: v[6],
            temperature: v[7],
        };
        let (flight_id, type_code) = (csvio::text(&rec, 0), csvio::text(&rec, 1));
        match out.last_mut() {
            Some(t) if t.flight_id == flight_id => {
                if t.type_code != type_code {
                    return Err(Error::parse(path, line, format!("flight {flight_id} changes type_code")));
                }
                t.samples.push(sample);
            }
            _ => {
                if out.iter().any(|t| t.flight_id == flight_id) {
                    return Err(Error::parse(path, line, format!("samples of flight {flight_id} are not contiguous")));
                }
                out.push(Trajectory { type_code, flight_id, samples: vec![sample] });
            }
        }
    }
    Ok(out)
}
