pub mod data;
pub mod dense;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod featurize;
pub mod graph;
pub mod model;
pub mod optimize;
pub mod pipeline;
pub mod spectral;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    pub mod graphs {}
    #[doc = include_str!("../../../book/src/polynomial_subspaces.md")]
    pub mod polynomial_subspaces {}
    #[doc = include_str!("../../../book/src/structural_components.md")]
    pub mod structural_components {}
    #[doc = include_str!("../../../book/src/training.md")]
    pub mod training {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    pub mod diagnostics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
}
