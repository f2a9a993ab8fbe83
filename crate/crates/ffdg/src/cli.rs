//! Subcommands of the `ffdg` binary.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ffdg_core::dataset::{expand_mass_grid, split_flights, DatasetSplit, MassFeature, ObservationRow};
use ffdg_core::eval::{evaluate_per_type, generalization_report};
use ffdg_core::fleet::{fit_fleet_quantile_map, Fleet, ImputeOptions, Membership};
use ffdg_core::nn::{HeadVariant, LossKind};
use ffdg_core::rng::{derive_seed, PRNG_ID};
use ffdg_core::sampling::{random_sample, InverseDensityWeights, SamplerKind};
use ffdg_core::synth::{generate_trajectory, smooth_derivatives, synthesize_fleet, SynthConfig, Trajectory};
use ffdg_core::train::{predict_rows, train_model, SubsetRows, TrainConfig, TrainingData};

use crate::checkpoint::Checkpoint;
use crate::dataset_csv::{self, DatasetMeta};
use crate::error::{Error, Result, EXIT_OK};
use crate::manifest::{self, RunManifest};
use crate::parallel;
use crate::report::{self, ReportBundle};
use crate::{config, fleet_csv, trajectory_csv};

/// Files of a data directory written by `gen-data`.
pub const FLEET_FILE: &str = "fleet.csv";
pub const TRAJECTORY_FILE: &str = "trajectories.csv";
pub const DATASET_FILE: &str = "observations.csv";
pub const SPLIT_FILE: &str = "split.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "ffdg", version, about = "Aircraft-generic fuel-flow regression workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic fleet, or validate and normalize a user fleet.
    SynthFleet(SynthFleetArgs),
    /// Generate trajectories, label them and split flights.
    GenData(GenDataArgs),
    /// Train a model on a data directory.
    Train(TrainArgs),
    /// Evaluate a checkpoint and write the report bundle.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct SynthFleetArgs {
    /// Number of training types.
    #[arg(long, default_value_t = 16)]
    pub types: usize,
    /// Number of generalization types.
    #[arg(long, default_value_t = 8)]
    pub gen_types: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Validate this fleet file instead of synthesizing one.
    #[arg(long)]
    pub from: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MassFeatureArg {
    Instantaneous,
    Takeoff,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub fleet: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub flights_per_type: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Label these trajectories instead of synthesizing new ones.
    #[arg(long)]
    pub trajectories: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MassFeatureArg::Instantaneous)]
    pub mass_feature: MassFeatureArg,
    /// Cruise duration of synthetic flights, s.
    #[arg(long, default_value_t = 2400.0)]
    pub cruise_s: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_head(s: &str) -> std::result::Result<HeadVariant, String> {
    HeadVariant::from_letter(s).ok_or_else(|| format!("expected C, R or S, found `{s}`"))
}

fn parse_sampler(s: &str) -> std::result::Result<SamplerKind, String> {
    SamplerKind::from_name(s).ok_or_else(|| format!("expected random or uniform, found `{s}`"))
}

fn parse_loss(s: &str) -> std::result::Result<LossKind, String> {
    LossKind::from_name(s).ok_or_else(|| format!("expected mse, me, mae, mape or beta_mape, found `{s}`"))
}

/// `N-K-M`, e.g. `7-250-4`.
fn parse_arch(s: &str) -> std::result::Result<(usize, usize, usize), String> {
    let parts: Vec<usize> = s.split('-').map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| format!("expected N-K-M, found `{s}`"))?;
    match parts[..] {
        [n, k, m] => Ok((n, k, m)),
        _ => Err(format!("expected N-K-M, found `{s}`")),
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// `key = value` file; flags given here take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fleet file; defaults to the data directory's copy.
    #[arg(long)]
    pub fleet: Option<PathBuf>,
    #[arg(long, value_parser = parse_sampler)]
    pub sampler: Option<SamplerKind>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, value_parser = parse_head)]
    pub head: Option<HeadVariant>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_loss)]
    pub loss: Option<LossKind>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_parser = parse_arch)]
    pub arch: Option<(usize, usize, usize)>,
    #[arg(long)]
    pub train_per_flight: Option<usize>,
    #[arg(long)]
    pub val_per_flight: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub l2_coeff: Option<f64>,
    #[arg(long)]
    pub resample_each_epoch: bool,
    #[arg(long)]
    pub no_track_generalization: bool,
    /// Also write sampling plot data (projection, densities, phase mix).
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RowsArg {
    Test,
    Val,
    Train,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Fleet for distances and membership; defaults to the data directory's copy.
    #[arg(long)]
    pub fleet: Option<PathBuf>,
    /// Primary-fleet rows to evaluate.
    #[arg(long, value_enum, default_value_t = RowsArg::Test)]
    pub rows: RowsArg,
    /// Permit evaluating on the rows the model was trained on.
    #[arg(long)]
    pub allow_train_eval: bool,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code; errors are printed to stderr prefixed `error:`.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli.command, argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, argv: Vec<String>) -> Result<()> {
    let started = Instant::now();
    let mut m = RunManifest {
        command: String::new(),
        args: argv,
        config: BTreeMap::new(),
        inputs: Vec::new(),
        outputs: Vec::new(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        prng: PRNG_ID.to_string(),
        threads: parallel::threads(),
        wall_clock_s: 0.0,
    };
    let manifest_path = match command {
        Command::SynthFleet(a) => synth_fleet(&a, &mut m)?,
        Command::GenData(a) => gen_data(&a, &mut m)?,
        Command::Train(a) => train(&a, &mut m)?,
        Command::Eval(a) => eval(&a, &mut m)?,
    };
    m.wall_clock_s = started.elapsed().as_secs_f64();
    m.write(&manifest_path)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// `dir/model.ckpt` → `dir/model.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn load_fleet(path: &Path) -> Result<Fleet> {
    let fleet = fleet_csv::read_fleet(path)?.impute_missing(&ImputeOptions::default())?;
    fleet.validate()?;
    Ok(fleet)
}

fn synth_fleet(a: &SynthFleetArgs, m: &mut RunManifest) -> Result<PathBuf> {
    m.command = "synth-fleet".into();
    let fleet = match &a.from {
        Some(src) => {
            m.inputs = manifest::hash_files([src])?;
            fleet_csv::read_fleet(src)?
        }
        None => {
            m.config.insert("types".into(), a.types.to_string());
            m.config.insert("gen_types".into(), a.gen_types.to_string());
            m.config.insert("seed".into(), a.seed.to_string());
            synthesize_fleet(a.types, a.gen_types, a.seed)?
        }
    };
    // the file keeps its gaps; it only has to be imputable into valid specs
    fleet.impute_missing(&ImputeOptions::default())?.validate()?;
    fleet_csv::write_fleet(&a.out, &fleet)?;
    log::info!(
        "wrote {} types ({} training, {} generalization) to {}",
        fleet.len(),
        fleet.members(Membership::Training).count(),
        fleet.members(Membership::Generalization).count(),
        a.out.display()
    );
    m.outputs = manifest::hash_files([&a.out])?;
    Ok(sibling(&a.out, "manifest.json"))
}

fn gen_data(a: &GenDataArgs, m: &mut RunManifest) -> Result<PathBuf> {
    m.command = "gen-data".into();
    let mass_feature = match a.mass_feature {
        MassFeatureArg::Instantaneous => MassFeature::Instantaneous,
        MassFeatureArg::Takeoff => MassFeature::Takeoff,
    };
    for (k, v) in [
        ("flights_per_type", a.flights_per_type.to_string()),
        ("seed", a.seed.to_string()),
        ("mass_feature", format!("{:?}", a.mass_feature).to_lowercase()),
        ("cruise_s", a.cruise_s.to_string()),
    ] {
        m.config.insert(k.into(), v);
    }
    let fleet = load_fleet(&a.fleet)?;
    let mut inputs = vec![a.fleet.clone()];
    let threads = parallel::threads();

    let trajectories: Vec<Trajectory> = match &a.trajectories {
        Some(path) => {
            inputs.push(path.clone());
            let imported = trajectory_csv::read_trajectories(path)?;
            for t in &imported {
                if fleet.get(&t.type_code).is_none() {
                    return Err(Error::Data(format!("flight {} has type {} which is not in the fleet", t.flight_id, t.type_code)));
                }
                t.validate()?;
            }
            imported.iter().map(smooth_derivatives).collect()
        }
        None => {
            if !(a.cruise_s > 0.0) {
                return Err(Error::Usage("--cruise-s must be positive".into()));
            }
            let synth = SynthConfig { cruise_duration_s: (a.cruise_s, a.cruise_s), ..SynthConfig::default() };
            let jobs: Vec<(&ffdg_core::fleet::AircraftSpec, usize)> =
                fleet.specs().flat_map(|s| (0..a.flights_per_type).map(move |k| (s, k))).collect();
            parallel::par_map(&jobs, threads, |&(spec, k)| {
                let seed = derive_seed(a.seed, &spec.type_code, k as u64);
                generate_trajectory(spec, &format!("{}-{k:04}", spec.type_code), seed, &synth)
            })
            .into_iter()
            .collect::<ffdg_core::Result<_>>()?
        }
    };

    let labeled = parallel::par_map(&trajectories, threads, |t| {
        expand_mass_grid(t, &fleet.get(&t.type_code).expect("checked above").spec, mass_feature)
    });
    let mut rows: Vec<ObservationRow> = Vec::new();
    for (t, out) in trajectories.iter().zip(labeled) {
        let out = out?;
        for (pct, err) in &out.dropped {
            log::warn!("flight {}: dropped {pct}% mass variant: {err}", t.flight_id);
        }
        rows.extend(out.rows);
    }

    let flights: Vec<(String, String)> = trajectories.iter().map(|t| (t.flight_id.clone(), t.type_code.clone())).collect();
    // too few flights still yields a labeled dataset, just not a trainable one
    let split = match split_flights(&flights, a.seed) {
        Ok(s) => Some(s),
        Err(e @ ffdg_core::Error::TooFewFlights { .. }) => {
            log::warn!("no split written: {e}");
            None
        }
        Err(e) => return Err(e.into()),
    };

    ensure_dir(&a.out)?;
    let mut paths: Vec<PathBuf> = [FLEET_FILE, TRAJECTORY_FILE, DATASET_FILE].iter().map(|f| a.out.join(f)).collect();
    fleet_csv::write_fleet(&paths[0], &fleet)?;
    trajectory_csv::write_trajectories(&paths[1], &trajectories)?;
    dataset_csv::write_dataset(&paths[2], &rows)?;
    let split_path = a.out.join(SPLIT_FILE);
    match &split {
        Some(split) => {
            dataset_csv::write_split(&split_path, split)?;
            paths.push(split_path);
        }
        None if split_path.exists() => std::fs::remove_file(&split_path).map_err(|e| Error::io(&split_path, e))?,
        None => {}
    }
    let meta = DatasetMeta {
        version: env!("CARGO_PKG_VERSION").into(),
        prng: PRNG_ID.into(),
        seed: a.seed,
        fleet_sha256: manifest::sha256_file(&a.fleet)?,
        flights_per_type: a.flights_per_type,
        mass_feature: m.config["mass_feature"].clone(),
        rows: rows.len(),
    };
    let meta_path = dataset_csv::meta_path(&paths[2]);
    std::fs::write(&meta_path, meta.to_text()).map_err(|e| Error::io(&meta_path, e))?;
    log::info!("{} flights, {} rows written to {}", flights.len(), rows.len(), a.out.display());

    m.inputs = manifest::hash_files(&inputs)?;
    let mut outputs = paths;
    outputs.push(meta_path);
    m.outputs = manifest::hash_files(&outputs)?;
    Ok(a.out.join(MANIFEST_FILE))
}

/// Defaults, then the config file, then explicit flags.
pub fn resolve_train_config(a: &TrainArgs) -> Result<TrainConfig> {
    let mut c = match &a.config {
        Some(path) => config::read_config(TrainConfig::default(), path)?,
        None => TrainConfig::default(),
    };
    if let Some(v) = a.sampler {
        c.sampler = v;
    }
    if let Some(v) = a.noise {
        c.noise = v;
    }
    if let Some(v) = a.head {
        c.head_variant = v;
    }
    if let Some(v) = a.epochs {
        c.epochs = v;
    }
    if let Some(v) = a.seed {
        c.seed = v;
    }
    if let Some(v) = a.loss {
        c.loss.kind = v;
    }
    if let Some(v) = a.beta {
        c.loss.beta = v;
    }
    if let Some((n, k, m)) = a.arch {
        (c.n_blocks, c.width, c.head_width) = (n, k, m);
    }
    if let Some(v) = a.train_per_flight {
        c.budget.train_per_flight = v;
    }
    if let Some(v) = a.val_per_flight {
        c.budget.val_per_flight = v;
    }
    if let Some(v) = a.batch_size {
        c.batch_size = v;
    }
    if let Some(v) = a.learning_rate {
        c.learning_rate = v;
    }
    if let Some(v) = a.l2_coeff {
        c.l2_coeff = v;
    }
    c.resample_each_epoch |= a.resample_each_epoch;
    if a.no_track_generalization {
        c.track_generalization = false;
    }
    c.validate()?;
    Ok(c)
}

struct DataDir {
    rows: Vec<ObservationRow>,
    split: DatasetSplit,
    fleet: Fleet,
    inputs: Vec<PathBuf>,
}

fn load_data_dir(dir: &Path, fleet_override: Option<&PathBuf>) -> Result<DataDir> {
    let data_path = dir.join(DATASET_FILE);
    let split_path = dir.join(SPLIT_FILE);
    let fleet_path = fleet_override.cloned().unwrap_or_else(|| dir.join(FLEET_FILE));
    let inputs = vec![data_path.clone(), split_path.clone(), fleet_path.clone()];
    manifest::verify_against(&dir.join(MANIFEST_FILE), &inputs)?;
    Ok(DataDir {
        rows: dataset_csv::read_dataset(&data_path)?,
        split: dataset_csv::read_split(&split_path)?,
        fleet: load_fleet(&fleet_path)?,
        inputs,
    })
}

fn train(a: &TrainArgs, m: &mut RunManifest) -> Result<PathBuf> {
    m.command = "train".into();
    let config = resolve_train_config(a)?;
    for line in config::to_text(&config).lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            m.config.insert(k.into(), v.into());
        }
    }
    let mut inputs = Vec::new();
    if let Some(c) = &a.config {
        inputs.push(c.clone());
    }
    let data = load_data_dir(&a.data, a.fleet.as_ref())?;
    inputs.extend(data.inputs.iter().cloned());

    let subsets = SubsetRows::select(&data.rows, &data.split, &data.fleet)?;
    if let Some(dir) = &a.plot_dir {
        write_sampling_plots(dir, &data.rows, &subsets.train, &config)?;
    }
    let training = TrainingData::from_subsets(&data.rows, subsets, &config)?;
    log::info!(
        "training {}-{}-{} on {} pool rows ({} validation, {} types)",
        config.n_blocks,
        config.width,
        config.head_width,
        training.train_pool.len(),
        training.val_pool.len(),
        training.training_types().len()
    );
    let (model, history) = train_model(&training, &config)?;
    log::info!(
        "best epoch {} of {}: validation metric {:.6}, MAPE {:.3}%",
        history.best_epoch,
        history.epochs.len(),
        history.best_val_metric(),
        history.epochs[history.best_epoch - 1].val_mape
    );

    let ckpt = Checkpoint { tool_version: env!("CARGO_PKG_VERSION").into(), model, train: config, history };
    ckpt.save(&a.out)?;
    let history_path = sibling(&a.out, "history.csv");
    report::write_history(&history_path, &ckpt.history)?;
    m.inputs = manifest::hash_files(&inputs)?;
    m.outputs = manifest::hash_files([&a.out, &history_path])?;
    Ok(sibling(&a.out, "manifest.json"))
}

/// Projected points, densities and the phase mix of both samplers for the
/// training subset.
fn write_sampling_plots(dir: &Path, rows: &[ObservationRow], train_subset: &[usize], config: &TrainConfig) -> Result<()> {
    ensure_dir(dir)?;
    let weights = InverseDensityWeights::fit(rows, train_subset)?;
    let seed = derive_seed(config.seed, "pool-train", 0);
    let uniform = weights.draw(config.budget.train_per_flight, seed);
    let random = random_sample(rows, train_subset, config.budget.train_per_flight, seed);
    let mut picked = vec![[0usize; 2]; rows.len()];
    for &i in &random {
        picked[i][0] += 1;
    }
    for &i in &uniform {
        picked[i][1] += 1;
    }

    let path = dir.join("sampling_projection.csv");
    let mut w = crate::csvio::create(&path, &["type_code", "x", "y", "density", "weight", "random_count", "uniform_count"])?;
    for (k, &i) in train_subset.iter().enumerate() {
        let [x, y] = weights.projected[k];
        let rec = [
            rows[i].type_code.clone(),
            x.to_string(),
            y.to_string(),
            weights.density[k].to_string(),
            weights.weight[k].to_string(),
            picked[i][0].to_string(),
            picked[i][1].to_string(),
        ];
        w.write_record(&rec).map_err(|e| crate::csvio::csv_error(&path, e))?;
    }
    crate::csvio::finish(&path, w)?;

    let path = dir.join("sampling_phases.csv");
    let mut w = crate::csvio::create(&path, &["sampler", "phase", "count", "fraction"])?;
    for (name, pool) in [("random", &random), ("uniform", &uniform)] {
        let h = ffdg_core::eval::phase_histogram(rows, pool);
        for phase in ffdg_core::eval::Phase::ALL {
            let rec = [name.to_string(), phase.name().into(), h.count(phase).to_string(), h.fraction(phase).to_string()];
            w.write_record(&rec).map_err(|e| crate::csvio::csv_error(&path, e))?;
        }
    }
    crate::csvio::finish(&path, w)
}

fn eval(a: &EvalArgs, m: &mut RunManifest) -> Result<PathBuf> {
    m.command = "eval".into();
    m.config.insert("rows".into(), format!("{:?}", a.rows).to_lowercase());
    m.config.insert("allow_train_eval".into(), a.allow_train_eval.to_string());
    if a.rows == RowsArg::Train && !a.allow_train_eval {
        return Err(Error::Data("refusing to evaluate on the training rows; pass --allow-train-eval to override".into()));
    }
    manifest::verify_against(&sibling(&a.ckpt, "manifest.json"), std::slice::from_ref(&a.ckpt))?;
    let ckpt = Checkpoint::load(&a.ckpt)?;
    let data = load_data_dir(&a.data, a.fleet.as_ref())?;

    // a generalization type the model has seen voids the whole comparison
    for code in &ckpt.model.provenance.training_types {
        if data.fleet.membership(code) == Some(Membership::Generalization) {
            return Err(ffdg_core::Error::TypeLeakage { type_code: code.clone() }.into());
        }
    }
    let subsets = SubsetRows::select(&data.rows, &data.split, &data.fleet)?;
    let primary_idx = match a.rows {
        RowsArg::Test => &subsets.test,
        RowsArg::Val => &subsets.validation,
        RowsArg::Train => &subsets.train,
    };
    if primary_idx.is_empty() {
        return Err(Error::Data("no primary-fleet rows to evaluate".into()));
    }
    let primary = evaluate_per_type(&ckpt.model, &data.rows, primary_idx)?;
    let primary_pred = predict_rows(&ckpt.model, &data.rows, primary_idx)?;
    let primary_phases = report::phase_rows(&data.rows, primary_idx, &primary_pred);
    let generalization = if subsets.generalization.is_empty() {
        None
    } else {
        let qmap = fit_fleet_quantile_map(&data.fleet)?;
        Some(generalization_report(&ckpt.model, &data.rows, &subsets.generalization, &data.fleet, &qmap)?)
    };

    let p = &ckpt.model.provenance;
    let c = &ckpt.model.config;
    let bundle = ReportBundle {
        primary,
        primary_phases,
        generalization,
        history: ckpt.history.clone(),
        context: vec![
            ("architecture".into(), format!("{}-{}-{} head {}", c.n_blocks, c.width, c.head_width, c.head_variant.letter())),
            ("sampler".into(), ckpt.train.sampler.name().into()),
            ("noise".into(), ckpt.train.noise.to_string()),
            ("seed".into(), p.seed.to_string()),
            ("checkpoint metric".into(), format!("{} = {:.6} at epoch {}", p.checkpoint_metric, p.best_val_metric, p.best_epoch)),
            ("primary rows".into(), format!("{:?}", a.rows).to_lowercase()),
        ],
    };
    bundle.write(&a.out)?;
    log::info!("report bundle written to {}", a.out.display());

    let mut inputs = vec![a.ckpt.clone()];
    inputs.extend(data.inputs);
    m.inputs = manifest::hash_files(&inputs)?;
    let outputs: Vec<PathBuf> = report::FILES.iter().map(|f| a.out.join(f)).collect();
    m.outputs = manifest::hash_files(&outputs)?;
    Ok(a.out.join(MANIFEST_FILE))
}
