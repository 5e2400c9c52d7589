//! Multi-seed experiment drivers behind the command-line tool: training runs,
//! ablation tables, SVD-ratio sweeps and dataset diagnostics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{gen_sbm, load_dataset, random_split, Dataset, SbmSpec};
use crate::diagnostics::{column_norm_std, correlation_profile, dataset_stats, CoherenceProfile, DatasetStats};
use crate::error::{Error, Result};
use crate::featurize::{build_poly_subspaces, FeatureSpace, PolyBasis};
use crate::optimize::{train, EpochRecord, TrainConfig};
use crate::pipeline::{build_features_from, GraphOperators};
use crate::spectral::RankSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Dir(PathBuf),
    Sbm(SbmSpec),
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Dir(p) => load_dataset(p),
            DataSource::Sbm(spec) => gen_sbm(spec),
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: DataSource,
    /// Model, optimizer and feature settings. `train.seed` is replaced by each entry of `seeds`.
    pub train: TrainConfig,
    /// One run per seed; the seed drives both the split and the initialization.
    pub seeds: Vec<u64>,
    /// Train/validation/test fractions.
    pub split: (f64, f64, f64),
    /// Build features once, outside the timed region.
    pub precompute: bool,
}

impl RunConfig {
    pub fn new(data: DataSource) -> Self {
        RunConfig {
            data,
            train: TrainConfig::default(),
            seeds: vec![0],
            split: (0.6, 0.2, 0.2),
            precompute: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::input("at least one seed is required"));
        }
        self.train.validate()
    }

    /// Flat `key → value` form; keys match the command-line flag names.
    pub fn to_flat(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        match &self.data {
            DataSource::Dir(p) => put("data", p.display().to_string()),
            DataSource::Sbm(s) => put("sbm", s.to_string()),
        }
        let t = &self.train;
        let f = &t.features;
        put("basis", f.basis.to_string());
        put("k", f.order.to_string());
        match f.rank {
            RankSpec::MassRatio(r) => put("svd-ratio", r.to_string()),
            RankSpec::Explicit(z) => put("svd-dim", z.to_string()),
        }
        put("svd-target", f.svd_target.to_string());
        put("svd-seed", f.svd_seed.to_string());
        put("no-round-rank", (!f.round_rank).to_string());
        put("chebyshev-rescale", f.chebyshev_rescale.to_string());
        put("no-normalize", (!f.normalize).to_string());
        put("without-s", f.without_s.to_string());
        put("without-poly-high", f.without_poly_high.to_string());
        put("without-poly-zero", f.without_poly_zero.to_string());
        put("weight-sharing", t.weight_sharing.to_string());
        put("lr", t.lr.to_string());
        put("weight-decay", t.weight_decay.to_string());
        put("max-epochs", t.max_epochs.to_string());
        put("warmup", t.warmup_epochs.to_string());
        put("patience", t.patience.to_string());
        if let Some(h) = t.hidden {
            put("hidden", h.to_string());
        }
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        put("seeds", seeds.join(","));
        put("split", format!("{},{},{}", self.split.0, self.split.1, self.split.2));
        put("precompute", self.precompute.to_string());
        m
    }

    /// `full`, or the enabled ablation switches joined with `+`.
    pub fn variant_name(&self) -> String {
        let f = &self.train.features;
        let names: Vec<&str> = [
            (f.without_s, "without-s"),
            (f.without_poly_high, "without-poly-high"),
            (f.without_poly_zero, "without-poly-zero"),
            (self.train.weight_sharing, "weight-sharing"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        if names.is_empty() {
            "full".into()
        } else {
            names.join("+")
        }
    }
}

/// Outcome of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub test_acc: Option<f64>,
    pub best_val_acc: Option<f64>,
    /// 1-based epoch whose parameters were kept; `None` when no update ran.
    pub best_epoch: Option<usize>,
    pub epochs_run: usize,
    pub final_train_loss: Option<f64>,
    pub train_ms: f64,
}

/// One JSON line of output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub variant: String,
    pub config: BTreeMap<String, String>,
    pub dataset: DatasetStats,
    pub feature_blocks: Vec<String>,
    pub feature_width: usize,
    pub structural_rank: Option<usize>,
    pub runs: Vec<SeedRun>,
    pub mean_test_acc: Option<f64>,
    /// Half-width of the normal-approximation 95% interval, `1.96·s/√runs`.
    pub ci95: Option<f64>,
    /// Feature construction time: once when precomputed, else the per-seed mean.
    pub feature_ms: f64,
    pub wall_ms: f64,
    /// Per-seed training curves, in seed order.
    #[serde(skip)]
    pub histories: Vec<Vec<EpochRecord>>,
}

/// Mean and normal-approximation 95% half-width (sample standard deviation).
pub fn mean_ci95(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0);
    Some((mean, 1.96 * var.sqrt() / len.sqrt()))
}

fn describe(fs: &FeatureSpace) -> (Vec<String>, usize, Option<usize>) {
    (
        fs.blocks().iter().map(|b| b.label()).collect(),
        fs.width(),
        fs.structural().map(|s| s.width()),
    )
}

/// Runs every seed of `cfg` on an already loaded dataset.
pub fn run_on(ds: &Dataset, ops: &GraphOperators, cfg: &RunConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let features = &cfg.train.features;

    let pre = if cfg.precompute {
        let t0 = Instant::now();
        let fs = build_features_from(ops, &ds.features, features)?;
        Some((fs, t0.elapsed().as_secs_f64() * 1e3))
    } else {
        None
    };

    type Outcome = (SeedRun, Vec<EpochRecord>, (Vec<String>, usize, Option<usize>), f64);
    let outcomes: Vec<Result<Outcome>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let t0 = Instant::now();
            let built;
            let (fs, feature_ms) = match &pre {
                Some((fs, ms)) => (fs, *ms),
                None => {
                    built = build_features_from(ops, &ds.features, features)?;
                    (&built, t0.elapsed().as_secs_f64() * 1e3)
                }
            };
            let splits = random_split(ds.n(), cfg.split, seed)?;
            let tc = TrainConfig {
                seed,
                ..cfg.train.clone()
            };
            let (_, report) = train(fs, &ds.labels, &splits, &tc)?;
            let best = report.best_epoch.map(|i| &report.history[i]);
            let run = SeedRun {
                seed,
                test_acc: report.test_acc,
                best_val_acc: best.and_then(|r| r.val_acc),
                best_epoch: best.map(|r| r.epoch),
                epochs_run: report.epochs_run(),
                final_train_loss: report.final_train_loss(),
                train_ms: t0.elapsed().as_secs_f64() * 1e3,
            };
            Ok((run, report.history, describe(fs), feature_ms))
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let (feature_blocks, feature_width, structural_rank) = outcomes[0].2.clone();
    let feature_ms = outcomes.iter().map(|o| o.3).sum::<f64>() / outcomes.len() as f64;
    let (runs, histories): (Vec<SeedRun>, Vec<Vec<EpochRecord>>) = outcomes.into_iter().map(|o| (o.0, o.1)).unzip();

    let accs: Vec<f64> = runs.iter().filter_map(|r| r.test_acc).collect();
    let stats = mean_ci95(&accs);
    Ok(RunRecord {
        variant: cfg.variant_name(),
        config: cfg.to_flat(),
        dataset: dataset_stats(ds),
        feature_blocks,
        feature_width,
        structural_rank,
        runs,
        mean_test_acc: stats.map(|s| s.0),
        ci95: stats.map(|s| s.1),
        feature_ms,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        histories,
    })
}

pub fn run_train(cfg: &RunConfig) -> Result<RunRecord> {
    let ds = cfg.data.load()?;
    run_on(&ds, &GraphOperators::new(&ds.edges)?, cfg)
}

/// The full model, then one run per ablation switch enabled in `cfg`, all on the same seeds.
pub fn run_ablate(cfg: &RunConfig) -> Result<Vec<RunRecord>> {
    let ds = cfg.data.load()?;
    let ops = GraphOperators::new(&ds.edges)?;
    let mut base = cfg.clone();
    {
        let f = &mut base.train.features;
        f.without_s = false;
        f.without_poly_high = false;
        f.without_poly_zero = false;
        base.train.weight_sharing = false;
    }
    let src = &cfg.train.features;
    let mut variants = vec![base.clone()];
    let switches: [(bool, fn(&mut RunConfig)); 4] = [
        (src.without_s, |c| c.train.features.without_s = true),
        (src.without_poly_high, |c| c.train.features.without_poly_high = true),
        (src.without_poly_zero, |c| c.train.features.without_poly_zero = true),
        (cfg.train.weight_sharing, |c| c.train.weight_sharing = true),
    ];
    for (on, set) in switches {
        if on {
            let mut v = base.clone();
            set(&mut v);
            variants.push(v);
        }
    }
    variants.iter().map(|v| run_on(&ds, &ops, v)).collect()
}

/// One run per mass ratio, on the seeds (and hence splits) of `cfg`.
pub fn run_svd_sweep(cfg: &RunConfig, ratios: &[f64]) -> Result<Vec<RunRecord>> {
    if ratios.is_empty() {
        return Err(Error::input("svd sweep needs at least one ratio"));
    }
    for &r in ratios {
        RankSpec::MassRatio(r).validate()?;
    }
    let ds = cfg.data.load()?;
    let ops = GraphOperators::new(&ds.edges)?;
    ratios
        .iter()
        .map(|&r| {
            let mut c = cfg.clone();
            c.train.features.rank = RankSpec::MassRatio(r);
            c.train.features.without_s = false;
            run_on(&ds, &ops, &c)
        })
        .collect()
}

/// `ratio,rank,mean_test_acc,ci95` for sweep records.
pub fn sweep_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("ratio,rank,mean_test_acc,ci95\n");
    for r in records {
        let cell = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.config.get("svd-ratio").map_or("", String::as_str),
            r.structural_rank.map_or(String::new(), |z| z.to_string()),
            cell(r.mean_test_acc),
            cell(r.ci95),
        );
    }
    out
}

/// `epoch,train_loss,val_acc`; validation accuracy is blank without a validation split.
pub fn curves_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,val_acc\n");
    for r in history {
        let val = r.val_acc.map_or(String::new(), |v| v.to_string());
        let _ = writeln!(out, "{},{},{val}", r.epoch, r.train_loss);
    }
    out
}

/// Fixed-width text rendering of records, accuracies with four decimals.
pub fn text_table(records: &[RunRecord]) -> String {
    let width = records.iter().map(|r| r.variant.len()).max().unwrap_or(7).max(7);
    let mut out = format!("{:<width$}  {:>8}  {:>8}  {:>5}\n", "variant", "mean", "ci95", "runs");
    for r in records {
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>8}  {:>5}",
            r.variant,
            cell(r.mean_test_acc),
            cell(r.ci95),
            r.runs.len()
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseReport {
    pub dataset: DatasetStats,
    pub k: usize,
    /// Median `E^k` for `k = 1..K`; `None` where every column of `L̂ᵏX` is zero.
    pub coherence_medians: Vec<Option<f64>>,
    /// Std of raw column norms of `Φ_0..Φ_K`, per basis.
    pub column_norm_std: BTreeMap<String, f64>,
    #[serde(skip)]
    pub profile: Option<CoherenceProfile>,
}

pub fn diagnose(ds: &Dataset, order: usize) -> Result<DiagnoseReport> {
    let ops = GraphOperators::new(&ds.edges)?;
    let profile = correlation_profile(&ops.lhat, &ds.features, order)?;
    let mut column_norm = BTreeMap::new();
    for basis in PolyBasis::ALL {
        let blocks = build_poly_subspaces(&ops.lhat, &ds.features, order, basis)?;
        let refs: Vec<_> = blocks.iter().map(|b| &b.block).collect();
        column_norm.insert(basis.to_string(), column_norm_std(&refs)?);
    }
    Ok(DiagnoseReport {
        dataset: dataset_stats(ds),
        k: order,
        coherence_medians: profile.medians(),
        column_norm_std: column_norm,
        profile: Some(profile),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureMode;

    fn sbm() -> DataSource {
        DataSource::Sbm(SbmSpec {
            block_sizes: vec![15, 15],
            p_in: 0.3,
            p_out: 0.05,
            features: FeatureMode::Informative { dim: 4, signal: 3.0 },
            seed: 5,
        })
    }

    fn quick(data: DataSource) -> RunConfig {
        let mut c = RunConfig::new(data);
        c.seeds = vec![1, 2, 3];
        c.train.max_epochs = 30;
        c.train.features.rank = RankSpec::Explicit(5);
        c
    }

    #[test]
    fn ci_matches_hand_computation() {
        let (m, h) = mean_ci95(&[0.8, 0.9, 1.0]).unwrap();
        assert!((m - 0.9).abs() < 1e-15);
        assert!((h - 1.96 * 0.1 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(mean_ci95(&[0.5]), Some((0.5, 0.0)));
        assert_eq!(mean_ci95(&[]), None);
    }

    #[test]
    fn runs_are_ordered_and_repeatable() {
        let cfg = quick(sbm());
        let a = run_train(&cfg).unwrap();
        let b = run_train(&cfg).unwrap();
        assert_eq!(a.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(a.histories, b.histories);
        assert_eq!(a.mean_test_acc, b.mean_test_acc);
        assert_eq!(a.structural_rank, Some(5));
    }

    #[test]
    fn precompute_does_not_change_results() {
        let mut cfg = quick(sbm());
        let a = run_train(&cfg).unwrap();
        cfg.precompute = true;
        let b = run_train(&cfg).unwrap();
        assert_eq!(a.histories, b.histories);
    }

    #[test]
    fn ablate_without_switches_is_train() {
        let cfg = quick(sbm());
        let recs = run_ablate(&cfg).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].histories, run_train(&cfg).unwrap().histories);

        let mut cfg = quick(sbm());
        cfg.train.features.without_s = true;
        cfg.train.weight_sharing = true;
        let names: Vec<String> = run_ablate(&cfg).unwrap().into_iter().map(|r| r.variant).collect();
        assert_eq!(names, vec!["full", "without-s", "weight-sharing"]);
    }

    #[test]
    fn sweep_rejects_zero_ratio() {
        assert!(run_svd_sweep(&quick(sbm()), &[0.0]).is_err());
        let recs = run_svd_sweep(&quick(sbm()), &[1.0]).unwrap();
        assert_eq!(recs[0].structural_rank, Some(30));
        assert!(sweep_csv(&recs).starts_with("ratio,rank,mean_test_acc,ci95\n1,30,"));
    }
}
