//! Attack-disjoint evaluation toolkit for audio deepfake detectors.

pub mod preprocess;
pub mod frontends;
pub mod corpus;
pub mod gmm;
pub mod metrics;
pub mod synth;
