//! Building blocks for an unsupervised, federated network-intrusion detector.
//!
//! The pipeline turns raw packet records into per-flow feature vectors
//! ([`flow`], [`features`]), trains a deep autoencoder on benign traffic only
//! ([`autoencoder`]), calibrates a robust reconstruction-error threshold
//! ([`detector`]), and simulates federated averaging across virtual vehicle
//! clients ([`fedavg`]). [`traffic`] synthesizes labeled benign/attack
//! datasets for experiments and [`eval`] reproduces the experiment shapes
//! (client-count sweeps, per-attack breakdowns, centralized-vs-federated
//! comparison).
//!
//! The crate is `no_std` + `alloc` so the detection path can run on embedded
//! in-vehicle targets; file formats, CSV handling, and the command-line
//! interface live in the companion `fedids-cli` crate.

#![no_std]

extern crate alloc;

pub mod autoencoder;
pub mod dataset;
pub mod detector;
pub mod eval;
pub mod features;
pub mod fedavg;
pub mod flow;
pub mod metrics;
pub mod rng;
pub mod schema;
pub mod stats;
pub mod traffic;

pub use autoencoder::{AEModel, Activation, TrainConfig};
pub use dataset::PreparedDataset;
pub use detector::{DetectionThreshold, Verdict, VerdictLabel};
pub use features::{FeatureVector, Label};
pub use fedavg::{ClientState, Clock, FedConfig, GlobalModel, NullClock};
pub use flow::{FlowAggregate, FlowKey, PacketRecord, Protocol};
pub use metrics::{ConfusionCounts, EvalReport};
pub use schema::FeatureSchema;
pub use traffic::{DatasetManifest, TrafficProfile};
