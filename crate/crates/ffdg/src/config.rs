//! Training configuration file: flat `key = value`, one line per field.

use std::fmt::Write as _;
use std::path::Path;

use ffdg_core::nn::{HeadVariant, LossKind};
use ffdg_core::sampling::SamplerKind;
use ffdg_core::train::TrainConfig;

use crate::error::{Error, Result};
use crate::keyvalue;

/// Every key, in the order [`to_text`] writes them.
pub const KEYS: [&str; 17] = [
    "epochs",
    "loss",
    "beta",
    "noise",
    "sampler",
    "train_per_flight",
    "val_per_flight",
    "seed",
    "n_blocks",
    "width",
    "head_width",
    "head",
    "l2_coeff",
    "learning_rate",
    "batch_size",
    "resample_each_epoch",
    "track_generalization",
];

pub fn to_text(c: &TrainConfig) -> String {
    let values = [
        c.epochs.to_string(),
        c.loss.kind.name().to_string(),
        c.loss.beta.to_string(),
        c.noise.to_string(),
        c.sampler.name().to_string(),
        c.budget.train_per_flight.to_string(),
        c.budget.val_per_flight.to_string(),
        c.seed.to_string(),
        c.n_blocks.to_string(),
        c.width.to_string(),
        c.head_width.to_string(),
        c.head_variant.letter().to_string(),
        c.l2_coeff.to_string(),
        c.learning_rate.to_string(),
        c.batch_size.to_string(),
        c.resample_each_epoch.to_string(),
        c.track_generalization.to_string(),
    ];
    let mut s = String::new();
    for (k, v) in KEYS.iter().zip(values) {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

/// Sets one field from its textual value.
pub fn set(c: &mut TrainConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
        v.parse().map_err(|_| format!("`{key}`: cannot parse `{v}`"))
    }
    match key {
        "epochs" => c.epochs = num(key, value)?,
        "loss" => c.loss.kind = LossKind::from_name(value).ok_or_else(|| format!("`loss`: unknown loss `{value}`"))?,
        "beta" => c.loss.beta = num(key, value)?,
        "noise" => c.noise = num(key, value)?,
        "sampler" => {
            c.sampler = SamplerKind::from_name(value).ok_or_else(|| format!("`sampler`: expected random or uniform, found `{value}`"))?
        }
        "train_per_flight" => c.budget.train_per_flight = num(key, value)?,
        "val_per_flight" => c.budget.val_per_flight = num(key, value)?,
        "seed" => c.seed = num(key, value)?,
        "n_blocks" => c.n_blocks = num(key, value)?,
        "width" => c.width = num(key, value)?,
        "head_width" => c.head_width = num(key, value)?,
        "head" => c.head_variant = HeadVariant::from_letter(value).ok_or_else(|| format!("`head`: expected C, R or S, found `{value}`"))?,
        "l2_coeff" => c.l2_coeff = num(key, value)?,
        "learning_rate" => c.learning_rate = num(key, value)?,
        "batch_size" => c.batch_size = num(key, value)?,
        "resample_each_epoch" => c.resample_each_epoch = num(key, value)?,
        "track_generalization" => c.track_generalization = num(key, value)?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

/// Applies a config text on top of `base`. Problems are usage errors that
/// name the file and line.
pub fn apply_text(base: TrainConfig, path: &Path, text: &str) -> Result<TrainConfig> {
    let mut c = base;
    let map = keyvalue::parse(path, text).map_err(|e| Error::Usage(e.to_string()))?;
    for (key, (line, value)) in &map {
        set(&mut c, key, value).map_err(|m| Error::Usage(format!("{}:{line}: {m}", path.display())))?;
    }
    Ok(c)
}

pub fn read_config(base: TrainConfig, path: &Path) -> Result<TrainConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    apply_text(base, path, &text)
}
