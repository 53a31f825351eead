//! Evaluation and fusion machinery for facial-retouching detection.
//!
//! The crate covers the full tabletop pipeline: score ingestion and
//! validation ([`score`]), ISO-style attack-detection metrics with DET
//! curves ([`metrics`]), min-max normalization and weighted-sum fusion
//! ([`fusion`]) with Powell weight fitting ([`powell`]), beauty-score
//! distribution analysis ([`beauty`]), forensic image features — face
//! crops, 2-D DCT spectra, SRM noise residuals — plus a synthetic retouch
//! generator ([`imgfeat`]), and small from-scratch learners for ML-based
//! score fusion ([`learners`]).
//!
//! Everything randomized draws from named sub-streams of a single run seed
//! ([`seeds`]), and batch work runs on rayon when the default `parallel`
//! feature is enabled (order-preserving, so results match the sequential
//! build bit for bit).

pub mod beauty;
pub mod error;
pub mod fusion;
pub mod imgfeat;
pub mod learners;
pub mod manifest;
pub mod metrics;
pub mod par;
pub mod powell;
pub mod score;
pub mod seeds;
mod svgplot;

pub use error::{Error, Result};
