//! Seed derivation and complex Gaussian sampling.
//!
//! Every random entity in a trial gets its own generator, seeded from the
//! root seed, the trial index and a fixed stream tag. Any single term of a
//! realization can therefore be regenerated in isolation, and trials never
//! share generator state.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::CMatrix;

/// Independent random streams within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Channels,
    Data,
    Attack,
    /// Receiver noise at the base station of the given cell.
    Noise(usize),
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Channels => 1,
            Stream::Data => 2,
            Stream::Attack => 3,
            Stream::Noise(bs) => 0x100 + bs as u64,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under root seed `root`.
pub fn trial_seed(root: u64, trial: usize) -> u64 {
    splitmix64(splitmix64(root) ^ splitmix64(0xA5A5_0000 ^ trial as u64))
}

/// Seed of one stream inside a trial.
pub fn stream_seed(trial_seed: u64, stream: Stream) -> u64 {
    splitmix64(trial_seed ^ splitmix64(stream.tag()))
}

pub fn stream_rng(trial_seed: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(trial_seed, stream))
}

/// One draw from CN(0, variance).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// `rows x cols` matrix with i.i.d. CN(0, variance) entries, filled column
/// by column. A zero variance yields an exact zero matrix but still consumes
/// the same number of draws, so later draws do not shift.
pub fn complex_normal_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    let mut m = DMatrix::from_element(rows, cols, Complex64::new(0.0, 0.0));
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_normal(rng, variance);
        }
    }
    m
}
