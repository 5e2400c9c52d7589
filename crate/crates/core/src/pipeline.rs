//! From a dataset to a [`FeatureSpace`]: graph operators, polynomial blocks,
//! structural components, ablation switches and normalization.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::featurize::{assemble, build_poly_subspaces_with, FeatureSpace, FeatureSubspace, PolyBasis};
use crate::graph::{build_adjacency, laplacian, normalize_adjacency, EdgeList, SparseSym};
use crate::spectral::{resolve_rank, structural_components, truncated_svd, RankSpec, SvdTarget};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub basis: PolyBasis,
    /// Highest polynomial order `K`; the space holds `Φ_0..Φ_K`.
    pub order: usize,
    pub rank: RankSpec,
    /// Round mass-ratio ranks up to the next hundred (capped at `n`).
    pub round_rank: bool,
    pub svd_target: SvdTarget,
    pub svd_seed: u64,
    pub normalize: bool,
    pub chebyshev_rescale: bool,
    pub without_s: bool,
    /// Drop `Φ_k` for `k > 0`.
    pub without_poly_high: bool,
    /// Drop `Φ_0 = X`.
    pub without_poly_zero: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            basis: PolyBasis::Chebyshev,
            order: 3,
            rank: RankSpec::MassRatio(0.94),
            round_rank: true,
            svd_target: SvdTarget::Adjacency,
            svd_seed: 0,
            normalize: true,
            chebyshev_rescale: false,
            without_s: false,
            without_poly_high: false,
            without_poly_zero: false,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        let no_poly = self.without_poly_zero && (self.without_poly_high || self.order == 0);
        if no_poly && self.without_s {
            return Err(Error::input("ablation switches remove every feature block"));
        }
        if !self.without_s {
            self.rank.validate()?;
        }
        Ok(())
    }
}

/// `Â` and `L̂ = I − Â` of a graph.
#[derive(Debug, Clone)]
pub struct GraphOperators {
    pub ahat: SparseSym,
    pub lhat: SparseSym,
}

impl GraphOperators {
    pub fn new(edges: &EdgeList) -> Result<Self> {
        let ahat = normalize_adjacency(&build_adjacency(edges)?)?;
        let lhat = laplacian(&ahat);
        Ok(GraphOperators { ahat, lhat })
    }

    pub fn n(&self) -> usize {
        self.ahat.n()
    }

    pub fn svd_matrix(&self, target: SvdTarget) -> &SparseSym {
        match target {
            SvdTarget::Adjacency => &self.ahat,
            SvdTarget::Laplacian => &self.lhat,
        }
    }
}

/// The structural block `S` for `cfg`, or `None` when ablated.
pub fn structural_block(ops: &GraphOperators, cfg: &FeatureConfig) -> Result<Option<FeatureSubspace>> {
    if cfg.without_s {
        return Ok(None);
    }
    let m = ops.svd_matrix(cfg.svd_target);
    let z = resolve_rank(m, cfg.rank, cfg.round_rank)?;
    let svd = truncated_svd(m, RankSpec::Explicit(z), cfg.svd_seed)?;
    Ok(Some(structural_components(&svd)))
}

/// Builds the feature space for attributes `x` on the graph behind `ops`.
pub fn build_features_from(ops: &GraphOperators, x: &DenseMatrix, cfg: &FeatureConfig) -> Result<FeatureSpace> {
    cfg.validate()?;
    let order = if cfg.without_poly_high { 0 } else { cfg.order };
    let poly = if cfg.without_poly_zero && order == 0 {
        Vec::new()
    } else {
        let mut blocks = build_poly_subspaces_with(&ops.lhat, x, order, cfg.basis, cfg.chebyshev_rescale)?;
        if cfg.without_poly_zero {
            blocks.remove(0);
        }
        blocks
    };
    assemble(poly, structural_block(ops, cfg)?, cfg.normalize)
}

pub fn build_features(ds: &Dataset, cfg: &FeatureConfig) -> Result<FeatureSpace> {
    build_features_from(&GraphOperators::new(&ds.edges)?, &ds.features, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_sbm, FeatureMode, SbmSpec};
    use crate::featurize::SubspaceKind;

    fn small() -> Dataset {
        gen_sbm(&SbmSpec {
            block_sizes: vec![10, 10],
            p_in: 0.4,
            p_out: 0.1,
            features: FeatureMode::Noise { dim: 3 },
            seed: 2,
        })
        .unwrap()
    }

    fn orders(fs: &FeatureSpace) -> Vec<Option<usize>> {
        fs.blocks()
            .iter()
            .map(|b| match b.kind {
                SubspaceKind::Polynomial { order, .. } => Some(order),
                SubspaceKind::Structural => None,
            })
            .collect()
    }

    #[test]
    fn default_layout() {
        let fs = build_features(&small(), &FeatureConfig::default()).unwrap();
        assert_eq!(orders(&fs), vec![Some(0), Some(1), Some(2), Some(3), None]);
        // Mass-ratio rank rounds up to 100, capped at n = 20.
        assert_eq!(fs.structural().unwrap().width(), 20);
    }

    #[test]
    fn ablations_drop_blocks() {
        let ds = small();
        let cfg = |f: fn(&mut FeatureConfig)| {
            let mut c = FeatureConfig {
                rank: RankSpec::Explicit(4),
                ..FeatureConfig::default()
            };
            f(&mut c);
            c
        };
        let fs = build_features(&ds, &cfg(|c| c.without_s = true)).unwrap();
        assert_eq!(orders(&fs), vec![Some(0), Some(1), Some(2), Some(3)]);
        let fs = build_features(&ds, &cfg(|c| c.without_poly_high = true)).unwrap();
        assert_eq!(orders(&fs), vec![Some(0), None]);
        let fs = build_features(&ds, &cfg(|c| c.without_poly_zero = true)).unwrap();
        assert_eq!(orders(&fs), vec![Some(1), Some(2), Some(3), None]);
        assert_eq!(fs.structural().unwrap().width(), 4);
        let fs = build_features(
            &ds,
            &cfg(|c| {
                c.without_poly_zero = true;
                c.without_poly_high = true;
            }),
        )
        .unwrap();
        assert_eq!(orders(&fs), vec![None]);
        let all = cfg(|c| {
            c.without_poly_zero = true;
            c.without_poly_high = true;
            c.without_s = true;
        });
        assert!(build_features(&ds, &all).is_err());
    }
}
