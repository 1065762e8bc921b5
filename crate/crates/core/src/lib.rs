//! Topological analysis of the latent spaces of multilayer perceptrons.
//!
//! The crate is `no_std` (it only needs `alloc`). It covers the whole
//! numerical pipeline:
//!
//! * [`dataset`]: labelled point clouds, synthetic circles, standardisation
//!   and greedy sparsification.
//! * [`mlp`]: small fully-connected networks trained with Adam on binary
//!   cross-entropy, plus extraction of per-layer images of a dataset.
//! * [`complex`]: simplices, clique (Vietoris–Rips) complexes, nerves,
//!   connected components and a dense Z/2 Betti number oracle.
//! * [`persistence`]: persistence diagrams via coboundary reduction over Z/2
//!   and the exact bottleneck distance.
//! * [`tower`]: output covers, pullback covers, the layer-wise complex tower,
//!   layer persistence and MLP persistence.
//! * [`trajectory`]: per-point trajectories through a tower and the
//!   aggregated trajectory graph.
//!
//! File formats, table ingestion and the command line live in the `mlptopo`
//! companion crate.
#![cfg_attr(not(test), no_std)]
#![warn(rust_2018_idioms, missing_debug_implementations)]

extern crate alloc;

pub mod complex;
pub mod dataset;
mod error;
mod matching;
pub mod mlp;
pub mod persistence;
pub mod tower;
pub mod trajectory;
mod union_find;

pub use error::{Error, Result};
