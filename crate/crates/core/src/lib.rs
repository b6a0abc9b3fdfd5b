//! Spectral characterization and comparison of directed graphs through the
//! magnetic Laplacian.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`graph`] | directed graphs, edge-list I/O, symmetrization, components |
//! | [`generators`] | seeded ER / BA / scale-free / WS / cyclic SBM / uniform modular |
//! | [`operator`] | sparse Hermitian `L_q` and normalized `H_q` |
//! | [`exact`] | dense spectra, partition function, specific heat, entropy |
//! | [`kpm`] | Chebyshev moments, Jackson damping, stochastic trace estimates |
//! | [`circulant`] | closed-form spectra of block-circulant modular networks |
//! | [`distance`] | 1-D Wasserstein distances and parameter inference |
//! | [`som`] | heat-grid fingerprints and self-organizing maps |
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default) and sequentially otherwise; see [`exec`].

pub mod circulant;
pub mod distance;
pub mod error;
pub mod exact;
pub mod exec;
pub mod format;
pub mod generators;
pub mod graph;
pub mod kpm;
pub mod operator;
pub mod rng;
pub mod som;
pub mod transport;

pub use error::{Error, Result};
pub use exact::{HeatGrid, Spectrum};
pub use exec::Execution;
pub use graph::{DirectedGraph, Edge, SymmetrizedGraph};
pub use kpm::{KpmConfig, SpectralDensity};
pub use operator::{MagneticOperator, OperatorKind};
