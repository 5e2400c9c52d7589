//! Adam, the full-batch training loop with warmup + patience early stopping, and evaluation.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::SplitMasks;
use crate::error::{Error, Result};
use crate::featurize::FeatureSpace;
use crate::model::{masked_cross_entropy, predict, FeGnnParams, LossConfig, ModelParams, ParamSet, WsParams};
use crate::pipeline::FeatureConfig;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub warmup_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    /// Inner width of the `W = L·R` factorization; `None` trains full matrices.
    pub hidden: Option<usize>,
    /// Train the shared-weight variant instead of independent per-block weights.
    pub weight_sharing: bool,
    pub features: FeatureConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.01,
            weight_decay: 0.0005,
            max_epochs: 1000,
            warmup_epochs: 50,
            patience: 200,
            seed: 0,
            hidden: None,
            weight_sharing: false,
            features: FeatureConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::input(format!("learning rate must be positive, got {}", self.lr)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::input("weight decay must be nonnegative"));
        }
        if self.hidden == Some(0) {
            return Err(Error::input("hidden width must be at least 1"));
        }
        self.features.validate()
    }
}

/// First/second moment estimates, one buffer per parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamState {
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(params: &impl ParamSet) -> Self {
        let zeros: Vec<Vec<f64>> = params.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        AdamState {
            first: zeros.clone(),
            second: zeros,
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut impl ParamSet, grads: &impl ParamSet, state: &mut AdamState, lr: f64) -> Result<()> {
    let grads = grads.tensors();
    if grads.iter().flat_map(|g| g.iter()).any(|g| !g.is_finite()) {
        return Err(Error::numeric("non-finite gradient"));
    }
    let mut tensors = params.tensors_mut();
    if tensors.len() != grads.len()
        || tensors.len() != state.first.len()
        || tensors.iter().zip(&grads).any(|(p, g)| p.len() != g.len())
    {
        return Err(Error::contract("parameter, gradient and optimizer shapes disagree"));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - ADAM_BETA1.powi(t);
    let c2 = 1.0 - ADAM_BETA2.powi(t);
    for (k, (p, g)) in tensors.iter_mut().zip(&grads).enumerate() {
        let (m, v) = (&mut state.first[k], &mut state.second[k]);
        for i in 0..p.len() {
            m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
            v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based: the metrics after this many updates.
    pub epoch: usize,
    /// Full objective on the training nodes (cross-entropy plus penalty).
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: Option<f64>,
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub history: Vec<EpochRecord>,
    /// Index into `history` of the checkpoint that was returned.
    pub best_epoch: Option<usize>,
    /// Test accuracy of the returned parameters, measured once after training.
    pub test_acc: Option<f64>,
    pub wall_ms: f64,
}

impl TrainReport {
    pub fn final_train_loss(&self) -> Option<f64> {
        self.history.last().map(|r| r.train_loss)
    }

    pub fn epochs_run(&self) -> usize {
        self.history.len()
    }
}

/// Fraction of masked nodes whose argmax prediction matches the label.
pub fn evaluate(params: &ModelParams, fs: &FeatureSpace, y: &[usize], mask: &[bool]) -> Result<f64> {
    let h = params.forward(fs)?;
    accuracy(&predict(&h), y, mask)
}

pub(crate) fn accuracy(pred: &[usize], y: &[usize], mask: &[bool]) -> Result<f64> {
    if pred.len() != y.len() || mask.len() != y.len() {
        return Err(Error::contract("prediction, label and mask lengths differ"));
    }
    let mut total = 0usize;
    let mut hit = 0usize;
    for ((p, t), &m) in pred.iter().zip(y).zip(mask) {
        if m {
            total += 1;
            hit += usize::from(p == t);
        }
    }
    if total == 0 {
        return Err(Error::input("evaluation mask selects no nodes"));
    }
    Ok(hit as f64 / total as f64)
}

/// Initial parameters for `cfg`'s parameterization.
pub fn init_params(fs: &FeatureSpace, classes: usize, cfg: &TrainConfig) -> Result<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(if cfg.weight_sharing {
        ModelParams::Shared(WsParams::init(fs, classes, cfg.hidden, &mut rng)?)
    } else {
        ModelParams::Flattened(FeGnnParams::init(fs, classes, cfg.hidden, &mut rng))
    })
}

/// Full-batch training from a seeded initialization.
///
/// Returns the parameters of the best validation epoch (accuracy, ties broken
/// by lower validation loss; training loss when there is no validation set).
pub fn train(
    fs: &FeatureSpace,
    y: &[usize],
    splits: &SplitMasks,
    cfg: &TrainConfig,
) -> Result<(ModelParams, TrainReport)> {
    cfg.validate()?;
    let classes = y.iter().max().map_or(0, |&c| c + 1);
    let params = init_params(fs, classes, cfg)?;
    train_from(fs, y, splits, cfg, params)
}

/// As [`train`], starting from the given parameters.
pub fn train_from(
    fs: &FeatureSpace,
    y: &[usize],
    splits: &SplitMasks,
    cfg: &TrainConfig,
    mut params: ModelParams,
) -> Result<(ModelParams, TrainReport)> {
    let start = Instant::now();
    splits.validate(fs.n())?;
    let loss_cfg = LossConfig::new(cfg.weight_decay, splits.train.clone());
    let has_val = splits.val.iter().any(|&v| v);

    let mut state = AdamState::new(&params);
    let mut history = Vec::new();
    let mut best: Option<(usize, (f64, f64), ModelParams)> = None;
    let mut since_best = 0usize;

    let (_, mut grads) = params.gradients(fs, y, &loss_cfg)?;
    for epoch in 1..=cfg.max_epochs {
        adam_step(&mut params, &grads, &mut state, cfg.lr)?;

        // This forward pass also provides the next update's gradient.
        let obj = params.objective(fs, y, &loss_cfg)?;
        let (train_loss, h) = (obj.value, obj.logits);
        grads = obj.gradients;
        let pred = predict(&h);
        let train_acc = accuracy(&pred, y, &splits.train)?;
        let (val_acc, val_loss) = if has_val {
            (
                Some(accuracy(&pred, y, &splits.val)?),
                Some(masked_cross_entropy(&h, y, &splits.val)?),
            )
        } else {
            (None, None)
        };
        history.push(EpochRecord {
            epoch,
            train_loss,
            train_acc,
            val_acc,
            val_loss,
        });

        // Higher is better: (accuracy, −loss).
        let score = match (val_acc, val_loss) {
            (Some(a), Some(l)) => (a, -l),
            _ => (train_acc, -train_loss),
        };
        let improved = best
            .as_ref()
            .is_none_or(|(_, b, _)| score.0 > b.0 || (score.0 == b.0 && score.1 > b.1));
        if improved {
            best = Some((history.len() - 1, score, params.clone()));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if epoch >= cfg.warmup_epochs && since_best >= cfg.patience {
            break;
        }
    }

    let (best_epoch, params) = match best {
        Some((idx, _, p)) => (Some(idx), p),
        None => (None, params),
    };
    let test_acc = if splits.test.iter().any(|&t| t) {
        Some(evaluate(&params, fs, y, &splits.test)?)
    } else {
        None
    };
    Ok((
        params,
        TrainReport {
            history,
            best_epoch,
            test_acc,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    ))
}
