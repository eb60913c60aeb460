//! Periodic grids, fields in both domains, cutoffs and restricted norms.

pub mod bump;
pub mod fields;
pub mod grid;
pub mod io;
pub mod region;
pub mod support;
pub mod transform;

pub use bump::{edge, fejer_lattice_sum, sample_bump, sample_bump_freq, smooth_step, BumpKind, BumpProfile, Shape};
pub use fields::{forward_ft, inverse_ft, FrequencyField, SpatialField};
pub use grid::{make_grid, GridSpec, MAX_SCALE, MIN_SCALE};
pub use region::{restricted_l2_norm, Ball, SpacetimeRegion, Spatial, TimeGrid, DEFAULT_DT, MAX_DT};
pub use support::Support;

pub use rustfft::num_complex::Complex64;

/// Convenience constructor for a complex zero.
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
