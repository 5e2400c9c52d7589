use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fegnn::data::{gen_sbm, save_dataset, SbmSpec};
use fegnn::experiment::{
    curves_csv, diagnose, run_ablate, run_svd_sweep, run_train, sweep_csv, text_table, DataSource, RunConfig, RunRecord,
};
use fegnn::featurize::PolyBasis;
use fegnn::pipeline::FeatureConfig;
use fegnn::spectral::{RankSpec, SvdTarget};

/// Linear graph classifiers over explicit polynomial and spectral feature subspaces.
///
/// Any flag can also come from `--config FILE`, either flat `key = value`
/// lines or a previously emitted JSON record; flags given on the command line
/// take precedence over the file.
#[derive(Parser, Debug)]
#[command(name = "fegnn", version, args_override_self = true)]
struct Cli {
    /// Read flags from a config file (flat key = value, or a JSON record).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train on every seed and print one JSON record.
    Train(RunArgs),
    /// Train the full model and each enabled ablation on the same seeds.
    Ablate(RunArgs),
    /// Coherence profile, column-norm dispersion and dataset statistics.
    Diagnose(DiagnoseArgs),
    /// Train once per SVD mass ratio.
    SvdSweep(SweepArgs),
    /// Sample a stochastic block model dataset to disk.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Dataset directory (edges.txt, features.csv, labels.txt).
    #[arg(long, value_name = "DIR", overrides_with = "sbm")]
    data: Option<PathBuf>,
    /// Synthetic SBM, e.g. `blocks=4x100;p_in=0.01;p_out=0.08;noise=8;seed=0`.
    #[arg(long, value_name = "SPEC", overrides_with = "data")]
    sbm: Option<String>,
}

impl DataArgs {
    fn source(&self) -> Result<DataSource> {
        match (&self.data, &self.sbm) {
            (Some(p), None) => Ok(DataSource::Dir(p.clone())),
            (None, Some(s)) => Ok(DataSource::Sbm(s.parse()?)),
            _ => bail!("give exactly one of --data or --sbm"),
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    basis: Option<PolyBasis>,
    /// Polynomial order K.
    #[arg(long)]
    k: Option<usize>,
    /// Keep the components holding this fraction of singular-value mass.
    #[arg(long, overrides_with = "svd_dim")]
    svd_ratio: Option<f64>,
    /// Keep exactly this many structural components.
    #[arg(long, overrides_with = "svd_ratio")]
    svd_dim: Option<usize>,
    #[arg(long)]
    svd_target: Option<SvdTarget>,
    #[arg(long)]
    svd_seed: Option<u64>,
    /// Use the mass-ratio rank as is instead of rounding up to a hundred.
    #[arg(long)]
    no_round_rank: bool,
    /// Run the Chebyshev recurrence on L̂ − I.
    #[arg(long)]
    chebyshev_rescale: bool,
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    weight_sharing: bool,
    #[arg(long)]
    without_s: bool,
    #[arg(long)]
    without_poly_high: bool,
    #[arg(long)]
    without_poly_zero: bool,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    /// Comma-separated seeds, or a half-open range `a..b`.
    #[arg(long, value_name = "LIST")]
    seeds: Option<String>,
    /// Factorize each weight through this inner width.
    #[arg(long)]
    hidden: Option<usize>,
    /// Train,validation,test fractions.
    #[arg(long, value_name = "F,F,F")]
    split: Option<String>,
    /// Build features once, outside the timed region.
    #[arg(long)]
    precompute: bool,
    /// Write JSON records here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-epoch `epoch,train_loss,val_acc` CSV here.
    #[arg(long)]
    curves: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated mass ratios in (0, 1].
    #[arg(long, value_name = "LIST", required = true)]
    ratios: String,
    /// Write `ratio,rank,mean_test_acc,ci95` CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Directory for `coherence.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_name = "SPEC")]
    sbm: String,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().with_context(|| format!("bad seed `{t}`")))
        .collect()
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse().with_context(|| format!("bad number `{t}`")))
        .collect()
}

impl RunArgs {
    fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::new(self.data.source()?);
        let d = FeatureConfig::default();
        cfg.train.features = FeatureConfig {
            basis: self.basis.unwrap_or(d.basis),
            order: self.k.unwrap_or(d.order),
            rank: match (self.svd_dim, self.svd_ratio) {
                (Some(z), _) => RankSpec::Explicit(z),
                (None, Some(r)) => RankSpec::MassRatio(r),
                (None, None) => d.rank,
            },
            round_rank: !self.no_round_rank,
            svd_target: self.svd_target.unwrap_or(d.svd_target),
            svd_seed: self.svd_seed.unwrap_or(d.svd_seed),
            normalize: !self.no_normalize,
            chebyshev_rescale: self.chebyshev_rescale,
            without_s: self.without_s,
            without_poly_high: self.without_poly_high,
            without_poly_zero: self.without_poly_zero,
        };
        let t = &mut cfg.train;
        t.weight_sharing = self.weight_sharing;
        t.hidden = self.hidden;
        t.lr = self.lr.unwrap_or(t.lr);
        t.weight_decay = self.weight_decay.unwrap_or(t.weight_decay);
        t.max_epochs = self.max_epochs.unwrap_or(t.max_epochs);
        t.warmup_epochs = self.warmup.unwrap_or(t.warmup_epochs);
        t.patience = self.patience.unwrap_or(t.patience);
        if let Some(s) = &self.seeds {
            cfg.seeds = parse_seeds(s)?;
        }
        if let Some(s) = &self.split {
            let f = parse_list(s)?;
            let [a, b, c] = f[..] else {
                bail!("--split needs three fractions, got `{s}`")
            };
            cfg.split = (a, b, c);
        }
        cfg.precompute = self.precompute;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Switches that take no value; a config value of `true` turns them on.
const SWITCHES: &[&str] = &[
    "no-round-rank",
    "chebyshev-rescale",
    "no-normalize",
    "weight-sharing",
    "without-s",
    "without-poly-high",
    "without-poly-zero",
    "precompute",
];

fn config_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap_or_default())
            .with_context(|| format!("parsing {}", path.display()))?;
        let obj = v.get("config").unwrap_or(&v);
        let Some(map) = obj.as_object() else {
            bail!("{}: expected a JSON object", path.display());
        };
        return Ok(map
            .iter()
            .map(|(k, v)| {
                let v = match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                (k.clone(), v)
            })
            .collect());
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected `key = value`", path.display(), i + 1);
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Splices `--config FILE` into flags placed right after the subcommand, so
/// that anything on the real command line overrides them.
fn expand_config(mut argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(pos) = argv
        .iter()
        .position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="))
    else {
        return Ok(argv);
    };
    let flag = argv.remove(pos).to_string_lossy().into_owned();
    let path = match flag.strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None if pos < argv.len() => PathBuf::from(argv.remove(pos)),
        None => bail!("--config needs a file"),
    };
    let mut tokens = Vec::new();
    for (k, v) in config_pairs(&path)? {
        let key = k.replace('_', "-");
        if SWITCHES.contains(&key.as_str()) {
            match v.as_str() {
                "true" => tokens.push(OsString::from(format!("--{key}"))),
                "false" => {}
                _ => bail!("config key `{k}` takes true or false, got `{v}`"),
            }
        } else {
            tokens.push(OsString::from(format!("--{key}")));
            tokens.push(OsString::from(v));
        }
    }
    let at = argv.len().min(2);
    argv.splice(at..at, tokens);
    Ok(argv)
}

fn emit(records: &[RunRecord], out: Option<&Path>) -> Result<()> {
    let mut body = String::new();
    for r in records {
        body.push_str(&serde_json::to_string(r)?);
        body.push('\n');
    }
    match out {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    eprint!("{}", text_table(records));
    Ok(())
}

fn write_curves(record: &RunRecord, path: &Path) -> Result<()> {
    if let [only] = &record.histories[..] {
        return fs::write(path, curves_csv(only)).with_context(|| format!("writing {}", path.display()));
    }
    let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    for (run, history) in record.runs.iter().zip(&record.histories) {
        let p = path.with_file_name(format!("{stem}.seed{}.csv", run.seed));
        fs::write(&p, curves_csv(history)).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    let argv = expand_config(std::env::args_os().collect())?;
    let cli = Cli::parse_from(argv);
    match cli.command {
        Command::Train(a) => {
            let record = run_train(&a.run_config()?)?;
            if let Some(p) = &a.curves {
                write_curves(&record, p)?;
            }
            emit(std::slice::from_ref(&record), a.out.as_deref())
        }
        Command::Ablate(a) => {
            let records = run_ablate(&a.run_config()?)?;
            emit(&records, a.out.as_deref())
        }
        Command::SvdSweep(a) => {
            let records = run_svd_sweep(&a.run.run_config()?, &parse_list(&a.ratios)?)?;
            if let Some(p) = &a.csv {
                fs::write(p, sweep_csv(&records)).with_context(|| format!("writing {}", p.display()))?;
            }
            emit(&records, a.run.out.as_deref())
        }
        Command::Diagnose(a) => {
            let ds = a.data.source()?.load()?;
            let report = diagnose(&ds, a.k)?;
            if let (Some(dir), Some(profile)) = (&a.out, &report.profile) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                let p = dir.join("coherence.csv");
                fs::write(&p, profile.to_csv()).with_context(|| format!("writing {}", p.display()))?;
            }
            println!("{}", serde_json::to_string(&report)?);
            Ok(())
        }
        Command::Gen(a) => {
            let spec: SbmSpec = a.sbm.parse()?;
            let ds = gen_sbm(&spec)?;
            save_dataset(&ds, &a.out)?;
            eprintln!(
                "wrote {} nodes, {} edges to {}",
                ds.n(),
                ds.edges.len(),
                a.out.display()
            );
            Ok(())
        }
    }
}
