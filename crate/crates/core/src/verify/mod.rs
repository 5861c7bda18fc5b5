//! Independent solution oracles and stability diagnostics.

pub mod greens;
pub mod hankel;
pub mod plane_wave;
pub mod spectrum;
