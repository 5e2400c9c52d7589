//! The linear predictor `H = Σ_t Φ_t W_t`, its weight-sharing variant, and the
//! cross-entropy objective with closed-form gradients.
//!
//! With `G` the `n × c` matrix whose masked rows are
//! `(softmax(H_i) − onehot(y_i)) / |mask|` (zero elsewhere), the gradients are
//!
//! * flattened: `∂L/∂W_t = Φ_tᵀ G + 2λ W_t`
//! * shared: `∂L/∂W = Σ_k γ_k Φ_kᵀ G + 2λ W`, `∂L/∂γ_k = ⟨Φ_k W, G⟩ + 2λ γ_k`
//!
//! and a factored weight `W = L R` gets `∂L/∂L = Fᵀ G Rᵀ`, `∂L/∂R = (F L)ᵀ G`.

use rand::Rng;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::featurize::FeatureSpace;

/// Weights applied to one feature block: a full `d × c` matrix or a rank factorization.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Full(DenseMatrix),
    Factored { left: DenseMatrix, right: DenseMatrix },
}

impl Weight {
    /// Seeded uniform init in `±√(6 / (fan_in + fan_out))` per matrix.
    pub fn init(rows: usize, cols: usize, hidden: Option<usize>, rng: &mut impl Rng) -> Weight {
        let uniform = |r: usize, c: usize, rng: &mut dyn rand::RngCore| {
            let a = (6.0 / (r + c).max(1) as f64).sqrt();
            DenseMatrix::from_fn(r, c, |_, _| rng.random_range(-a..=a))
        };
        match hidden {
            None => Weight::Full(uniform(rows, cols, rng)),
            Some(h) => Weight::Factored {
                left: uniform(rows, h, rng),
                right: uniform(h, cols, rng),
            },
        }
    }

    pub fn zeros_like(&self) -> Weight {
        match self {
            Weight::Full(w) => Weight::Full(DenseMatrix::zeros(w.rows(), w.cols())),
            Weight::Factored { left, right } => Weight::Factored {
                left: DenseMatrix::zeros(left.rows(), left.cols()),
                right: DenseMatrix::zeros(right.rows(), right.cols()),
            },
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Weight::Full(w) => w.rows(),
            Weight::Factored { left, .. } => left.rows(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Weight::Full(w) => w.cols(),
            Weight::Factored { right, .. } => right.cols(),
        }
    }

    /// The `d × c` matrix this weight represents.
    pub fn effective(&self) -> DenseMatrix {
        match self {
            Weight::Full(w) => w.clone(),
            Weight::Factored { left, right } => left.matmul(right).expect("factor shapes agree"),
        }
    }

    /// `features · W`.
    pub fn apply(&self, features: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            Weight::Full(w) => features.matmul(w),
            Weight::Factored { left, right } => features.matmul(left)?.matmul(right),
        }
    }

    /// Gradient of `⟨features · W, G⟩ + λ‖W‖²` with respect to the stored factors.
    fn gradient(&self, features: &DenseMatrix, g: &DenseMatrix, decay: f64) -> Result<Weight> {
        Ok(match self {
            Weight::Full(w) => {
                let mut d = features.t_matmul(g)?;
                d.axpy(2.0 * decay, w)?;
                Weight::Full(d)
            }
            Weight::Factored { left, right } => {
                let mut dl = features.t_matmul(&g.matmul_t(right)?)?;
                dl.axpy(2.0 * decay, left)?;
                let mut dr = features.matmul(left)?.t_matmul(g)?;
                dr.axpy(2.0 * decay, right)?;
                Weight::Factored { left: dl, right: dr }
            }
        })
    }

    fn scale_output(&mut self, s: f64) {
        match self {
            Weight::Full(w) => w.scale(s),
            Weight::Factored { left, .. } => left.scale(s),
        }
    }

    fn tensors(&self) -> Vec<&[f64]> {
        match self {
            Weight::Full(w) => vec![w.as_slice()],
            Weight::Factored { left, right } => vec![left.as_slice(), right.as_slice()],
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Weight::Full(w) => vec![w.as_mut_slice()],
            Weight::Factored { left, right } => vec![left.as_mut_slice(), right.as_mut_slice()],
        }
    }
}

/// Flat views over every trainable number, in a fixed order.
pub trait ParamSet {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;

    fn squared_norm(&self) -> f64 {
        self.tensors().iter().flat_map(|t| t.iter()).map(|v| v * v).sum()
    }

    fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }
}

/// One independent weight per feature subspace, in feature-space order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeGnnParams {
    pub weights: Vec<Weight>,
}

impl FeGnnParams {
    pub fn init(fs: &FeatureSpace, classes: usize, hidden: Option<usize>, rng: &mut impl Rng) -> Self {
        FeGnnParams {
            weights: fs
                .blocks()
                .iter()
                .map(|b| Weight::init(b.width(), classes, hidden, rng))
                .collect(),
        }
    }

    pub fn zeros(fs: &FeatureSpace, classes: usize) -> Self {
        FeGnnParams {
            weights: fs
                .blocks()
                .iter()
                .map(|b| Weight::Full(DenseMatrix::zeros(b.width(), classes)))
                .collect(),
        }
    }
}

impl ParamSet for FeGnnParams {
    fn tensors(&self) -> Vec<&[f64]> {
        self.weights.iter().flat_map(Weight::tensors).collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.weights.iter_mut().flat_map(Weight::tensors_mut).collect()
    }
}

/// One weight shared by all polynomial blocks, mixed by scalars `γ_k`; the
/// structural block keeps its own weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WsParams {
    pub shared: Weight,
    pub gamma: Vec<f64>,
    pub structural: Option<Weight>,
}

impl WsParams {
    /// `γ_k` start at 1.
    pub fn init(fs: &FeatureSpace, classes: usize, hidden: Option<usize>, rng: &mut impl Rng) -> Result<Self> {
        let d = shared_width(fs)?;
        let k = fs.polynomial_blocks().count();
        let shared = Weight::init(d, classes, hidden, rng);
        let structural = fs.structural().map(|s| Weight::init(s.width(), classes, hidden, rng));
        Ok(WsParams {
            shared,
            gamma: vec![1.0; k],
            structural,
        })
    }

    /// The equivalent flattened parameters `W_k = γ_k · W_shared`.
    pub fn to_flattened(&self) -> FeGnnParams {
        let mut weights: Vec<Weight> = self
            .gamma
            .iter()
            .map(|&g| {
                let mut w = self.shared.clone();
                w.scale_output(g);
                w
            })
            .collect();
        weights.extend(self.structural.clone());
        FeGnnParams { weights }
    }
}

impl ParamSet for WsParams {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.shared.tensors();
        t.push(&self.gamma);
        if let Some(s) = &self.structural {
            t.extend(s.tensors());
        }
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.shared.tensors_mut();
        t.push(&mut self.gamma);
        if let Some(s) = &mut self.structural {
            t.extend(s.tensors_mut());
        }
        t
    }
}

/// Either parameterization, so training code can treat them uniformly.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Flattened(FeGnnParams),
    Shared(WsParams),
}

impl ParamSet for ModelParams {
    fn tensors(&self) -> Vec<&[f64]> {
        match self {
            ModelParams::Flattened(p) => p.tensors(),
            ModelParams::Shared(p) => p.tensors(),
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            ModelParams::Flattened(p) => p.tensors_mut(),
            ModelParams::Shared(p) => p.tensors_mut(),
        }
    }
}

impl ModelParams {
    pub fn forward(&self, fs: &FeatureSpace) -> Result<DenseMatrix> {
        match self {
            ModelParams::Flattened(p) => forward(fs, p),
            ModelParams::Shared(p) => forward_ws(fs, p),
        }
    }

    pub fn gradients(&self, fs: &FeatureSpace, y: &[usize], cfg: &LossConfig) -> Result<(f64, ModelParams)> {
        let obj = self.objective(fs, y, cfg)?;
        Ok((obj.value, obj.gradients))
    }

    /// Objective, gradients and the logits they were computed from, in one forward pass.
    pub fn objective(&self, fs: &FeatureSpace, y: &[usize], cfg: &LossConfig) -> Result<Objective> {
        let logits = self.forward(fs)?;
        let (value, gradients) = match self {
            ModelParams::Flattened(p) => {
                let (l, g) = gradients_at(fs, p, &logits, y, cfg)?;
                (l, ModelParams::Flattened(g))
            }
            ModelParams::Shared(p) => {
                let (l, g) = gradients_ws_at(fs, p, &logits, y, cfg)?;
                (l, ModelParams::Shared(g))
            }
        };
        Ok(Objective {
            value,
            gradients,
            logits,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Objective {
    pub value: f64,
    pub gradients: ModelParams,
    pub logits: DenseMatrix,
}

/// Width shared by every polynomial block; errors if they differ or there are none.
fn shared_width(fs: &FeatureSpace) -> Result<usize> {
    let mut widths = fs.polynomial_blocks().map(|b| b.width());
    let d = widths
        .next()
        .ok_or_else(|| Error::contract("weight sharing needs at least one polynomial block"))?;
    if widths.any(|w| w != d) {
        return Err(Error::contract("weight sharing needs equal polynomial block widths"));
    }
    Ok(d)
}

fn check_weight(block_width: usize, n_blocks_label: &str, w: &Weight) -> Result<()> {
    if w.input_dim() != block_width {
        return Err(Error::contract(format!(
            "{n_blocks_label}: weight expects {} inputs, block has width {block_width}",
            w.input_dim()
        )));
    }
    Ok(())
}

/// `H = Σ_t Φ_t W_t`.
pub fn forward(fs: &FeatureSpace, params: &FeGnnParams) -> Result<DenseMatrix> {
    if params.weights.len() != fs.blocks().len() {
        return Err(Error::contract(format!(
            "{} weights for {} feature blocks",
            params.weights.len(),
            fs.blocks().len()
        )));
    }
    let classes = params.weights[0].output_dim();
    let mut h = DenseMatrix::zeros(fs.n(), classes);
    for (b, w) in fs.blocks().iter().zip(&params.weights) {
        check_weight(b.width(), &b.label(), w)?;
        h.axpy(1.0, &w.apply(&b.block)?)?;
    }
    Ok(h)
}

/// `Σ_k γ_k Φ_k`, the mixed polynomial block seen by the shared weight.
fn mixed_polynomial(fs: &FeatureSpace, gamma: &[f64]) -> Result<DenseMatrix> {
    let d = shared_width(fs)?;
    if gamma.len() != fs.polynomial_blocks().count() {
        return Err(Error::contract(format!(
            "{} mixing coefficients for {} polynomial blocks",
            gamma.len(),
            fs.polynomial_blocks().count()
        )));
    }
    let mut mixed = DenseMatrix::zeros(fs.n(), d);
    for (b, &g) in fs.polynomial_blocks().zip(gamma) {
        mixed.axpy(g, &b.block)?;
    }
    Ok(mixed)
}

/// `H = Σ_k γ_k Φ_k W + S W_s`.
pub fn forward_ws(fs: &FeatureSpace, params: &WsParams) -> Result<DenseMatrix> {
    let mixed = mixed_polynomial(fs, &params.gamma)?;
    check_weight(mixed.cols(), "shared", &params.shared)?;
    let mut h = params.shared.apply(&mixed)?;
    match (fs.structural(), &params.structural) {
        (Some(s), Some(w)) => {
            check_weight(s.width(), "S", w)?;
            h.axpy(1.0, &w.apply(&s.block)?)?;
        }
        (None, None) => {}
        _ => return Err(Error::contract("structural block and weight must both be present")),
    }
    Ok(h)
}

#[derive(Debug, Clone)]
pub struct LossConfig {
    /// Coefficient `λ` of the `λ Σ‖W‖²_F` penalty.
    pub weight_decay: f64,
    pub train_mask: Vec<bool>,
}

impl LossConfig {
    pub fn new(weight_decay: f64, train_mask: Vec<bool>) -> Self {
        LossConfig {
            weight_decay,
            train_mask,
        }
    }
}

fn check_labels(h: &DenseMatrix, y: &[usize], mask: &[bool]) -> Result<usize> {
    if y.len() != h.rows() || mask.len() != h.rows() {
        return Err(Error::contract(format!(
            "{} logit rows, {} labels, {} mask entries",
            h.rows(),
            y.len(),
            mask.len()
        )));
    }
    if let Some((i, &c)) = y.iter().enumerate().find(|(_, &c)| c >= h.cols()) {
        return Err(Error::input(format!("label {c} of node {i} outside 0..{}", h.cols())));
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::input("mask selects no nodes"));
    }
    Ok(count)
}

/// `−log softmax(row)[target]` with max-subtraction.
fn row_nll(row: &[f64], target: usize) -> f64 {
    let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let lse = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
    lse - row[target]
}

/// Mean cross-entropy over the masked rows, without any penalty.
pub fn masked_cross_entropy(h: &DenseMatrix, y: &[usize], mask: &[bool]) -> Result<f64> {
    let count = check_labels(h, y, mask)?;
    let total: f64 = (0..h.rows())
        .filter(|&i| mask[i])
        .map(|i| row_nll(h.row(i), y[i]))
        .sum();
    Ok(total / count as f64)
}

/// Masked mean cross-entropy plus `λ` times the squared norm of every parameter.
pub fn loss(h: &DenseMatrix, y: &[usize], cfg: &LossConfig, params: &impl ParamSet) -> Result<f64> {
    Ok(masked_cross_entropy(h, y, &cfg.train_mask)? + cfg.weight_decay * params.squared_norm())
}

/// Cross-entropy value and its logit gradient `G`.
fn loss_and_logit_grad(h: &DenseMatrix, y: &[usize], mask: &[bool]) -> Result<(f64, DenseMatrix)> {
    let count = check_labels(h, y, mask)?;
    let inv = 1.0 / count as f64;
    let mut g = DenseMatrix::zeros(h.rows(), h.cols());
    let mut total = 0.0;
    for i in (0..h.rows()).filter(|&i| mask[i]) {
        let row = h.row(i);
        total += row_nll(row, y[i]);
        let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let exps: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        let gi = g.row_mut(i);
        for (j, e) in exps.iter().enumerate() {
            gi[j] = e / z * inv;
        }
        gi[y[i]] -= inv;
    }
    Ok((total * inv, g))
}

/// Objective value and gradients for flattened parameters.
pub fn gradients(fs: &FeatureSpace, params: &FeGnnParams, y: &[usize], cfg: &LossConfig) -> Result<(f64, FeGnnParams)> {
    gradients_at(fs, params, &forward(fs, params)?, y, cfg)
}

/// [`gradients`] with the logits `h = forward(fs, params)` already computed.
fn gradients_at(
    fs: &FeatureSpace,
    params: &FeGnnParams,
    h: &DenseMatrix,
    y: &[usize],
    cfg: &LossConfig,
) -> Result<(f64, FeGnnParams)> {
    let (ce, g) = loss_and_logit_grad(h, y, &cfg.train_mask)?;
    let weights = fs
        .blocks()
        .iter()
        .zip(&params.weights)
        .map(|(b, w)| w.gradient(&b.block, &g, cfg.weight_decay))
        .collect::<Result<Vec<_>>>()?;
    Ok((ce + cfg.weight_decay * params.squared_norm(), FeGnnParams { weights }))
}

/// Objective value and gradients for weight-shared parameters.
pub fn gradients_ws(fs: &FeatureSpace, params: &WsParams, y: &[usize], cfg: &LossConfig) -> Result<(f64, WsParams)> {
    gradients_ws_at(fs, params, &forward_ws(fs, params)?, y, cfg)
}

fn gradients_ws_at(
    fs: &FeatureSpace,
    params: &WsParams,
    h: &DenseMatrix,
    y: &[usize],
    cfg: &LossConfig,
) -> Result<(f64, WsParams)> {
    let (ce, g) = loss_and_logit_grad(h, y, &cfg.train_mask)?;
    let lambda = cfg.weight_decay;

    let mixed = mixed_polynomial(fs, &params.gamma)?;
    let shared = params.shared.gradient(&mixed, &g, lambda)?;
    let gamma = fs
        .polynomial_blocks()
        .zip(&params.gamma)
        .map(|(b, &gk)| Ok(params.shared.apply(&b.block)?.dot(&g)? + 2.0 * lambda * gk))
        .collect::<Result<Vec<_>>>()?;
    let structural = match (fs.structural(), &params.structural) {
        (Some(s), Some(w)) => Some(w.gradient(&s.block, &g, lambda)?),
        _ => None,
    };
    Ok((
        ce + lambda * params.squared_norm(),
        WsParams {
            shared,
            gamma,
            structural,
        },
    ))
}

/// Row-wise argmax; ties go to the lowest class index.
pub fn predict(h: &DenseMatrix) -> Vec<usize> {
    (0..h.rows())
        .map(|i| {
            let row = h.row(i);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::{assemble, FeatureSubspace, PolyBasis};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(n: usize, widths: &[usize], structural: Option<usize>, seed: u64) -> FeatureSpace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = widths
            .iter()
            .enumerate()
            .map(|(t, &d)| {
                let b = DenseMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
                FeatureSubspace::polynomial(b, t, PolyBasis::Monomial)
            })
            .collect();
        let s = structural
            .map(|z| FeatureSubspace::structural(DenseMatrix::from_fn(n, z, |_, _| rng.random_range(-1.0..1.0))));
        assemble(poly, s, false).unwrap()
    }

    #[test]
    fn zero_weights_give_zero_logits() {
        let fs = space(5, &[2, 2], Some(3), 1);
        let h = forward(&fs, &FeGnnParams::zeros(&fs, 4)).unwrap();
        assert_eq!(h, DenseMatrix::zeros(5, 4));
    }

    #[test]
    fn identity_features_with_onehot_weights_recover_labels() {
        let y = [2usize, 0, 1, 1];
        let fs = assemble(
            vec![FeatureSubspace::polynomial(
                DenseMatrix::identity(4),
                0,
                PolyBasis::Monomial,
            )],
            None,
            false,
        )
        .unwrap();
        let w = DenseMatrix::from_fn(4, 3, |i, j| if y[i] == j { 1.0 } else { 0.0 });
        let h = forward(
            &fs,
            &FeGnnParams {
                weights: vec![Weight::Full(w.clone())],
            },
        )
        .unwrap();
        assert_eq!(h, w);
        assert_eq!(predict(&h), y.to_vec());
    }

    #[test]
    fn forward_equals_concatenated_product() {
        let fs = space(10, &[3, 3, 3], None, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = FeGnnParams::init(&fs, 4, None, &mut rng);
        let stacked: Vec<DenseMatrix> = p.weights.iter().map(Weight::effective).collect();
        let refs: Vec<&DenseMatrix> = stacked.iter().collect();
        let oracle = fs.concatenated().matmul(&DenseMatrix::vcat(&refs).unwrap()).unwrap();
        assert!(forward(&fs, &p).unwrap().max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn ws_special_cases() {
        let fs = space(6, &[2, 2, 2], Some(3), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut p = WsParams::init(&fs, 3, None, &mut rng).unwrap();

        p.gamma = vec![0.0; 3];
        let s_only = p
            .structural
            .as_ref()
            .unwrap()
            .apply(&fs.structural().unwrap().block)
            .unwrap();
        assert!(forward_ws(&fs, &p).unwrap().max_abs_diff(&s_only) < 1e-15);

        p.gamma = vec![0.0, 1.0, 0.0];
        let mut want = p.shared.apply(&fs.blocks()[1].block).unwrap();
        want.axpy(1.0, &s_only).unwrap();
        assert!(forward_ws(&fs, &p).unwrap().max_abs_diff(&want) < 1e-14);

        p.gamma = vec![0.3, -1.2, 2.0];
        let flat = p.to_flattened();
        let a = forward_ws(&fs, &p).unwrap();
        let b = forward(&fs, &flat).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn ws_rejects_unequal_widths() {
        let fs = space(6, &[2, 3], None, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            WsParams::init(&fs, 3, None, &mut rng),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn uniform_logits_give_log_c() {
        let h = DenseMatrix::zeros(4, 5);
        let cfg = LossConfig::new(0.0, vec![true; 4]);
        let l = loss(&h, &[0, 1, 2, 3], &cfg, &FeGnnParams { weights: vec![] }).unwrap();
        assert!((l - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn large_margin_gives_vanishing_loss() {
        let h = DenseMatrix::from_rows(&[vec![1000.0, 0.0, 0.0]]).unwrap();
        let l = masked_cross_entropy(&h, &[0], &[true]).unwrap();
        assert!(l <= 1e-12);
    }

    #[test]
    fn empty_mask_is_an_input_error() {
        let h = DenseMatrix::zeros(2, 2);
        assert!(matches!(
            masked_cross_entropy(&h, &[0, 1], &[false, false]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn single_node_logit_gradient() {
        let fs = assemble(
            vec![FeatureSubspace::polynomial(
                DenseMatrix::from_rows(&[vec![2.0, -1.0]]).unwrap(),
                0,
                PolyBasis::Monomial,
            )],
            None,
            false,
        )
        .unwrap();
        let p = FeGnnParams::zeros(&fs, 2);
        let (l, g) = gradients(&fs, &p, &[0], &LossConfig::new(0.0, vec![true])).unwrap();
        assert!((l - 2f64.ln()).abs() < 1e-15);
        // Φ₀ᵀ G with G = [−0.5, 0.5].
        let want = DenseMatrix::from_rows(&[vec![-1.0, 1.0], vec![0.5, -0.5]]).unwrap();
        assert_eq!(g.weights[0], Weight::Full(want));
    }

    #[test]
    fn zero_features_leave_only_decay() {
        let fs = assemble(
            vec![FeatureSubspace::polynomial(
                DenseMatrix::zeros(3, 2),
                0,
                PolyBasis::Monomial,
            )],
            None,
            false,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = FeGnnParams::init(&fs, 2, None, &mut rng);
        let (_, g) = gradients(&fs, &p, &[0, 1, 0], &LossConfig::new(0.1, vec![true; 3])).unwrap();
        let Weight::Full(w) = &p.weights[0] else { unreachable!() };
        assert_eq!(g.weights[0], Weight::Full(w.scaled(0.2)));
    }

    #[test]
    fn argmax_ties_pick_lowest_class() {
        let h = DenseMatrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 2.0, 2.0]]).unwrap();
        assert_eq!(predict(&h), vec![0, 1]);
    }
}
