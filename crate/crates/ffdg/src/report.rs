//! Report bundle: per-type metrics, aggregates, the distance/error scatter,
//! phase histogram, training history and a markdown summary.

use std::fmt::Write as _;
use std::path::Path;

use ffdg_core::dataset::ObservationRow;
use ffdg_core::eval::{Aggregate, GenReport, PerTypeReport, Phase, PhaseHistogram, TypeMetrics, LEVEL_THRESHOLD_FPM};
use ffdg_core::train::TrainHistory;

use crate::csvio;
use crate::error::{Error, Result};

pub const FILES: [&str; 6] =
    ["metrics_by_type.csv", "aggregate.csv", "gen_vs_distance.csv", "phase_hist.csv", "history.csv", "report.md"];

/// Counts and MAPE of one flight phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRow {
    pub phase: Phase,
    pub count: usize,
    pub fraction: f64,
    /// `None` when the phase has no rows.
    pub mape: Option<f64>,
}

/// Phase histogram of `indices` with the MAPE of `predictions` per phase.
pub fn phase_rows(rows: &[ObservationRow], indices: &[usize], predictions: &[f64]) -> Vec<PhaseRow> {
    let hist = PhaseHistogram::from_vertical_rates(indices.iter().map(|&i| rows[i].vertical_rate()), LEVEL_THRESHOLD_FPM);
    Phase::ALL
        .into_iter()
        .map(|phase| {
            let ape: Vec<f64> = indices
                .iter()
                .zip(predictions)
                .filter(|(&i, _)| Phase::classify(rows[i].vertical_rate(), LEVEL_THRESHOLD_FPM) == phase)
                .map(|(&i, &p)| ((p - rows[i].target_ff) / rows[i].target_ff).abs())
                .collect();
            PhaseRow {
                phase,
                count: hist.count(phase),
                fraction: hist.fraction(phase),
                mape: (!ape.is_empty()).then(|| 100.0 * ape.iter().sum::<f64>() / ape.len() as f64),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub primary: PerTypeReport,
    pub primary_phases: Vec<PhaseRow>,
    pub generalization: Option<GenReport>,
    pub history: TrainHistory,
    /// Free-form `key: value` lines shown at the top of the markdown.
    pub context: Vec<(String, String)>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csvio::create(path, header)?;
    for r in rows {
        w.write_record(&r).map_err(|e| csvio::csv_error(path, e))?;
    }
    csvio::finish(path, w)
}

fn metric_cells(set: &str, t: &TypeMetrics) -> Vec<String> {
    vec![set.into(), t.type_code.clone(), t.mape.to_string(), t.mae.to_string(), t.me.to_string(), t.n_rows.to_string()]
}

fn aggregate_cells(set: &str, a: &Aggregate) -> Vec<Vec<String>> {
    [("mape", a.mape), ("mae_kg_h", a.mae), ("me_kg_h", a.me)]
        .into_iter()
        .map(|(m, (mean, std))| vec![set.into(), m.into(), mean.to_string(), std.to_string()])
        .collect()
}

/// Per-epoch training history with the retained epoch flagged.
pub fn write_history(path: &Path, history: &TrainHistory) -> Result<()> {
    let rows = history.epochs.iter().map(|e| {
        vec![
            e.epoch.to_string(),
            e.train_loss.to_string(),
            e.val_metric.to_string(),
            e.val_mape.to_string(),
            e.val_mae.to_string(),
            e.val_me.to_string(),
            opt(e.gen_mape),
            u8::from(e.epoch == history.best_epoch).to_string(),
        ]
    });
    write_rows(
        path,
        &["epoch", "train_loss", "val_metric", "val_mape", "val_mae_kg_h", "val_me_kg_h", "gen_mape", "best"],
        rows,
    )
}

impl ReportBundle {
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let gen_entries = self.generalization.as_ref().map_or(&[][..], |g| &g.entries[..]);

        let by_type = self
            .primary
            .types
            .iter()
            .map(|t| metric_cells("primary", t))
            .chain(gen_entries.iter().map(|e| metric_cells("generalization", &e.metrics)));
        write_rows(&dir.join(FILES[0]), &["set", "type_code", "mape", "mae_kg_h", "me_kg_h", "n_rows"], by_type)?;

        let mut agg = aggregate_cells("primary", &self.primary.aggregate);
        if let Some(g) = &self.generalization {
            agg.extend(aggregate_cells("generalization", &g.aggregate));
        }
        write_rows(&dir.join(FILES[1]), &["set", "metric", "mean", "std"], agg)?;

        let scatter = gen_entries.iter().map(|e| {
            let m = &e.metrics;
            vec![
                m.type_code.clone(),
                e.d_min.to_string(),
                e.closest.clone(),
                m.mape.to_string(),
                m.mae.to_string(),
                m.me.to_string(),
                m.n_rows.to_string(),
            ]
        });
        write_rows(
            &dir.join(FILES[2]),
            &["type_code", "d_min", "closest_type", "mape", "mae_kg_h", "me_kg_h", "n_rows"],
            scatter,
        )?;

        let phases = self.primary_phases.iter().map(|p| {
            vec![p.phase.name().into(), p.count.to_string(), p.fraction.to_string(), opt(p.mape)]
        });
        write_rows(&dir.join(FILES[3]), &["phase", "count", "fraction", "mape"], phases)?;

        write_history(&dir.join(FILES[4]), &self.history)?;

        let md = dir.join(FILES[5]);
        std::fs::write(&md, self.markdown()).map_err(|e| Error::io(&md, e))
    }

    pub fn markdown(&self) -> String {
        let mut s = String::from("# Fuel-flow evaluation report\n\n");
        for (k, v) in &self.context {
            let _ = writeln!(s, "- {k}: {v}");
        }
        s.push_str("\n## Primary test set\n\n");
        s.push_str(&metrics_table(&self.primary.types, &self.primary.aggregate));

        if let Some(g) = &self.generalization {
            s.push_str("\n## Generalization test set\n\n");
            let types: Vec<TypeMetrics> = g.entries.iter().map(|e| e.metrics.clone()).collect();
            s.push_str(&metrics_table(&types, &g.aggregate));
            s.push_str("\n| type | d_min | closest | MAPE (%) |\n|---|---:|---|---:|\n");
            for e in &g.entries {
                let _ = writeln!(s, "| {} | {:.4} | {} | {:.3} |", e.metrics.type_code, e.d_min, e.closest, e.metrics.mape);
            }
            let rho = g.spearman.map_or_else(|| "undefined".to_string(), |r| format!("{r:.4}"));
            let _ = writeln!(s, "\nSpearman rank correlation of d_min and MAPE: {rho}");
        }

        s.push_str("\n## Flight phases (primary test set)\n\n| phase | rows | fraction | MAPE (%) |\n|---|---:|---:|---:|\n");
        for p in &self.primary_phases {
            let mape = p.mape.map_or_else(|| "-".to_string(), |m| format!("{m:.3}"));
            let _ = writeln!(s, "| {} | {} | {:.4} | {} |", p.phase.name(), p.count, p.fraction, mape);
        }

        if let Some(best) = self.history.epochs.get(self.history.best_epoch.wrapping_sub(1)) {
            let _ = writeln!(
                s,
                "\n## Training\n\n{} epochs; best epoch {} with validation metric {:.6} (MAPE {:.3}%).",
                self.history.epochs.len(),
                best.epoch,
                best.val_metric,
                best.val_mape
            );
        }
        s
    }
}

/// One row per type plus a final mean (std) row.
fn metrics_table(types: &[TypeMetrics], agg: &Aggregate) -> String {
    let mut s = String::from("| type | MAPE (%) | MAE (kg/h) | ME (kg/h) | rows |\n|---|---:|---:|---:|---:|\n");
    for t in types {
        let _ = writeln!(s, "| {} | {:.3} | {:.2} | {:.2} | {} |", t.type_code, t.mape, t.mae, t.me, t.n_rows);
    }
    let _ = writeln!(
        s,
        "| mean (std) | {:.3} ({:.3}) | {:.2} ({:.2}) | {:.2} ({:.2}) | |",
        agg.mape.0, agg.mape.1, agg.mae.0, agg.mae.1, agg.me.0, agg.me.1
    );
    s
}
