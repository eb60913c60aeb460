//! Numerical toolkit for the frequency-localized free Schrodinger evolution
//! in two dimensions: maximal functions, mixed space-time norms, time-block
//! localization, Whitney and wave-packet decompositions, extremal examples
//! and scaling-exponent experiments.

pub mod error;
pub mod examples;
pub mod field_core;
pub mod localization;
pub mod mixed_norms;
pub mod propagator;
pub mod wavepacket;
pub mod explab;
pub mod whitney;

pub use error::{Error, Result};
pub use field_core::{
    forward_ft, inverse_ft, make_grid, restricted_l2_norm, sample_bump, Ball, BumpKind, BumpProfile, Complex64,
    FrequencyField, GridSpec, Shape, SpacetimeRegion, SpatialField, Support, TimeGrid,
};
pub use propagator::{evolve, evolve_oracle, galilean_boost, kernel_eval, parabolic_rescale, translate_spacetime};
