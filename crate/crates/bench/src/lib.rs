//! Fixtures shared by the benchmarks.

use maxwave_core::examples::random_annulus;
use maxwave_core::{make_grid, FrequencyField};

/// Random annulus data on the standard grid for scale `n`.
pub fn fixture(n: u32) -> FrequencyField {
    random_annulus(&make_grid(n).expect("dyadic scale"), 7).expect("annulus fits the grid")
}
