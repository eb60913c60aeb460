use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

fn planner() -> &'static Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)> {
    static P: OnceLock<Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)>> = OnceLock::new();
    P.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())))
}

/// Cached 1D plan. `inverse` selects the `e^{+2pi i jk/n}` direction.
pub fn plan(n: usize, inverse: bool) -> Plan {
    let mut guard = planner().lock().expect("fft planner poisoned");
    let (pl, cache) = &mut *guard;
    cache
        .entry((n, inverse))
        .or_insert_with(|| if inverse { pl.plan_fft_inverse(n) } else { pl.plan_fft_forward(n) })
        .clone()
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

/// Unnormalized 2D DFT of a row-major `n x n` array, in place.
pub fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    assert_eq!(data.len(), n * n);
    let p = plan(n, inverse);
    let rows = |buf: &mut [Complex64]| {
        buf.par_chunks_mut(n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); p.get_inplace_scratch_len()],
            |scratch, row| p.process_with_scratch(row, scratch),
        );
    };
    rows(data);
    let mut tmp = vec![Complex64::new(0.0, 0.0); n * n];
    transpose(data, &mut tmp, n);
    rows(&mut tmp);
    transpose(&tmp, data, n);
}

/// `(-1)^(k1+k2)` checkerboard, the phase from nodes starting at `-L/2`.
pub(crate) fn checkerboard(data: &mut [Complex64], n: usize) {
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            if (i + j) % 2 == 1 {
                *v = -*v;
            }
        }
    });
}
