//! Textual checkpoint container. Floats that must survive bit-exactly are
//! stored as the hex of their IEEE-754 bits, so load → save reproduces the
//! file byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use ffdg_core::nn::{HeadVariant, Layout, ModelConfig, ModelState, Provenance};
use ffdg_core::rng::PRNG_ID;
use ffdg_core::train::{EpochRecord, TrainConfig, TrainHistory};

use crate::config;
use crate::error::{Error, Result};

const MAGIC: &str = "ffdg-checkpoint 1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub tool_version: String,
    pub model: ModelState,
    pub train: TrainConfig,
    pub history: TrainHistory,
}

fn hex(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

fn unhex(s: &str) -> Option<f64> {
    (s.len() == 16).then(|| u64::from_str_radix(s, 16).ok().map(f64::from_bits)).flatten()
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let p = &m.provenance;
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "tool_version = {}", self.tool_version);
        let _ = writeln!(s, "prng = {PRNG_ID}");
        let _ = writeln!(s, "[model]");
        let _ = writeln!(s, "n_blocks = {}", m.config.n_blocks);
        let _ = writeln!(s, "width = {}", m.config.width);
        let _ = writeln!(s, "head_width = {}", m.config.head_width);
        let _ = writeln!(s, "head = {}", m.config.head_variant.letter());
        let _ = writeln!(s, "l2_coeff = {}", hex(m.config.l2_coeff));
        let _ = writeln!(s, "input_dim = {}", m.config.input_dim);
        let _ = writeln!(s, "[provenance]");
        let _ = writeln!(s, "seed = {}", p.seed);
        let _ = writeln!(s, "epochs_run = {}", p.epochs_run);
        let _ = writeln!(s, "best_epoch = {}", p.best_epoch);
        let _ = writeln!(s, "best_val_metric = {}", hex(p.best_val_metric));
        let _ = writeln!(s, "checkpoint_metric = {}", p.checkpoint_metric);
        let _ = writeln!(s, "training_types = {}", p.training_types.join(","));
        let _ = writeln!(s, "[train]");
        s.push_str(&config::to_text(&self.train));
        for (name, values) in [("params", &m.params), ("running_mean", &m.running_mean), ("running_var", &m.running_var)] {
            let _ = writeln!(s, "[{name} {}]", values.len());
            for v in values {
                let _ = writeln!(s, "{}", hex(*v));
            }
        }
        let _ = writeln!(s, "[history {}]", self.history.epochs.len());
        let _ = writeln!(s, "best_epoch = {}", self.history.best_epoch);
        for e in &self.history.epochs {
            let gen = e.gen_mape.map_or_else(|| "-".to_string(), hex);
            let _ = writeln!(
                s,
                "{} {} {} {} {} {} {}",
                e.epoch,
                hex(e.train_loss),
                hex(e.val_metric),
                hex(e.val_mape),
                hex(e.val_mae),
                hex(e.val_me),
                gen
            );
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        Parser { path, lines: text.lines().enumerate().peekable() }.checkpoint()
    }
}

struct Parser<'a, I: Iterator<Item = (usize, &'a str)>> {
    path: &'a Path,
    lines: std::iter::Peekable<I>,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Parser<'a, I> {
    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.path, line as u64 + 1, msg)
    }

    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.lines.next().ok_or_else(|| Error::parse(self.path, 0, "unexpected end of checkpoint"))
    }

    fn expect(&mut self, want: &str) -> Result<()> {
        let (n, l) = self.next()?;
        if l != want {
            return Err(self.err(n, format!("expected `{want}`, found `{l}`")));
        }
        Ok(())
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, l) = self.next()?;
        match l.split_once(" = ") {
            Some((k, v)) if k == key => Ok((n, v)),
            _ => Err(self.err(n, format!("expected `{key} = ...`, found `{l}`"))),
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (n, v) = self.field(key)?;
        v.parse().map_err(|_| self.err(n, format!("`{key}`: cannot parse `{v}`")))
    }

    fn hex_field(&mut self, key: &str) -> Result<f64> {
        let (n, v) = self.field(key)?;
        unhex(v).ok_or_else(|| self.err(n, format!("`{key}`: expected 16 hex digits")))
    }

    fn section(&mut self, name: &str) -> Result<usize> {
        let (n, l) = self.next()?;
        let count = l
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .and_then(|r| r.strip_prefix(name))
            .and_then(|r| r.strip_prefix(' '))
            .and_then(|c| c.parse().ok());
        count.ok_or_else(|| self.err(n, format!("expected `[{name} <count>]`, found `{l}`")))
    }

    fn hex_block(&mut self, name: &str, want: usize) -> Result<Vec<f64>> {
        let count = self.section(name)?;
        if count != want {
            return Err(Error::parse(self.path, 0, format!("[{name}] holds {count} values, the architecture needs {want}")));
        }
        (0..count)
            .map(|_| {
                let (n, l) = self.next()?;
                unhex(l).ok_or_else(|| self.err(n, "expected 16 hex digits"))
            })
            .collect()
    }

    fn checkpoint(mut self) -> Result<Checkpoint> {
        self.expect(MAGIC)?;
        let tool_version = self.field("tool_version")?.1.to_string();
        let (n, prng) = self.field("prng")?;
        if prng != PRNG_ID {
            return Err(self.err(n, format!("checkpoint written with PRNG `{prng}`, this build uses `{PRNG_ID}`")));
        }

        self.expect("[model]")?;
        let n_blocks = self.parsed("n_blocks")?;
        let width = self.parsed("width")?;
        let head_width = self.parsed("head_width")?;
        let (n, letter) = self.field("head")?;
        let head_variant = HeadVariant::from_letter(letter).ok_or_else(|| self.err(n, format!("unknown head `{letter}`")))?;
        let l2_coeff = self.hex_field("l2_coeff")?;
        let input_dim = self.parsed("input_dim")?;
        let model_config = ModelConfig { n_blocks, width, head_width, head_variant, l2_coeff, input_dim };
        model_config.validate()?;

        self.expect("[provenance]")?;
        let seed = self.parsed("seed")?;
        let epochs_run = self.parsed("epochs_run")?;
        let best_epoch = self.parsed("best_epoch")?;
        let best_val_metric = self.hex_field("best_val_metric")?;
        let checkpoint_metric = self.field("checkpoint_metric")?.1.to_string();
        let types = self.field("training_types")?.1;
        let training_types = if types.is_empty() { Vec::new() } else { types.split(',').map(String::from).collect() };

        self.expect("[train]")?;
        let mut train = TrainConfig::default();
        for key in config::KEYS {
            let (n, v) = self.field(key)?;
            config::set(&mut train, key, v).map_err(|m| self.err(n, m))?;
        }

        let layout = Layout::new(&model_config);
        let params = self.hex_block("params", layout.len)?;
        let running_mean = self.hex_block("running_mean", input_dim)?;
        let running_var = self.hex_block("running_var", input_dim)?;

        let count = self.section("history")?;
        let history_best = self.parsed("best_epoch")?;
        let mut epochs = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, l) = self.next()?;
            let parts: Vec<&str> = l.split(' ').collect();
            let bad = || self.err(n, "malformed history record");
            if parts.len() != 7 {
                return Err(bad());
            }
            let h = |k: usize| unhex(parts[k]).ok_or_else(bad);
            epochs.push(EpochRecord {
                epoch: parts[0].parse().map_err(|_| bad())?,
                train_loss: h(1)?,
                val_metric: h(2)?,
                val_mape: h(3)?,
                val_mae: h(4)?,
                val_me: h(5)?,
                gen_mape: if parts[6] == "-" { None } else { Some(h(6)?) },
            });
        }
        if let Some((n, l)) = self.lines.next() {
            return Err(self.err(n, format!("trailing content `{l}`")));
        }

        let model = ModelState {
            config: model_config,
            layout,
            params,
            running_mean,
            running_var,
            provenance: Provenance { seed, epochs_run, best_epoch, best_val_metric, checkpoint_metric, training_types },
        };
        Ok(Checkpoint { tool_version, model, train, history: TrainHistory { epochs, best_epoch: history_best } })
    }
}
