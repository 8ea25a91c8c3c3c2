//! Unnormalized 3D complex FFT over `ndarray::Array3`, built on `rustfft`.
//!
//! Normalization is applied by the caller ([`crate::field`]) so the
//! Riemann-sum transform convention lives in one place.

use ndarray::{Array3, Axis};
use num_complex::Complex64;
use rayon::iter::{IntoParallelIterator, ParallelIterator};
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::{Arc, Mutex, OnceLock};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    planner().lock().unwrap().plan_fft(len, direction)
}

fn transform_axis(data: &mut Array3<Complex64>, axis: usize, direction: FftDirection) {
    let len = data.len_of(Axis(axis));
    let fft = plan(len, direction);
    let scratch_len = fft.get_inplace_scratch_len();
    data.lanes_mut(Axis(axis))
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .for_each_init(
            || (vec![Complex64::default(); len], vec![Complex64::default(); scratch_len]),
            |(buf, scratch), mut lane| {
                if let Some(slice) = lane.as_slice_mut() {
                    fft.process_with_scratch(slice, scratch);
                } else {
                    for (b, v) in buf.iter_mut().zip(lane.iter()) {
                        *b = *v;
                    }
                    fft.process_with_scratch(buf, scratch);
                    for (v, b) in lane.iter_mut().zip(buf.iter()) {
                        *v = *b;
                    }
                }
            },
        );
}

/// In-place forward DFT (`e^{−iξ·x}` phases, unscaled) along all three axes.
pub(crate) fn forward(data: &mut Array3<Complex64>) {
    for axis in 0..3 {
        transform_axis(data, axis, FftDirection::Forward);
    }
}

/// In-place inverse DFT (`e^{+iξ·x}` phases, unscaled) along all three axes.
pub(crate) fn inverse(data: &mut Array3<Complex64>) {
    for axis in 0..3 {
        transform_axis(data, axis, FftDirection::Inverse);
    }
}
