//! Seeded test-function generation.
//!
//! Trials draw band-limited fields with independent standard normal Fourier
//! coefficients. Each trial's stream depends only on (master seed, trial
//! index), so parallel schedules cannot change what any trial sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;

use crate::engine::{freq_of, transform_axes};
use crate::error::{Error, Result};
use crate::field::{GridSpec, SampledField};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based per-trial seed: decorrelated across both arguments.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0xA5A5_A5A5_A5A5_A5A5)))
}

/// Default bandwidth m/8, at least 1.
pub fn default_band(grid: &GridSpec) -> usize {
    (grid.m() / 8).max(1)
}

/// Random real field with iid N(0,1) cos/sin coefficients on every mode
/// whose integer frequencies all lie within ±max_freq, assembled in the
/// Fourier domain. Bins are visited in flat order and the conjugate partner
/// is filled alongside, so the draw sequence is fixed by the seed alone.
pub fn band_limited_field(
    grid: &GridSpec,
    seed: u64,
    max_freq: usize,
) -> Result<SampledField> {
    if max_freq == 0 || max_freq >= grid.m() / 2 {
        return Err(Error::invalid(format!(
            "bandwidth must satisfy 1 <= max_freq < m/2 = {}, got {max_freq}",
            grid.m() / 2
        )));
    }
    let m = grid.m();
    let n = grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spectrum = vec![Complex::new(0.0, 0.0); n];
    let mut filled = vec![false; n];
    let scale = n as f64;
    for flat in 0..n {
        if filled[flat] {
            continue;
        }
        let idx = grid.unflatten(flat);
        let in_band = (0..grid.d()).all(|a| freq_of(idx[a], m).unsigned_abs() as usize <= max_freq);
        if !in_band {
            continue;
        }
        let mut mirror_idx = [0usize; 3];
        for a in 0..grid.d() {
            mirror_idx[a] = (m - idx[a]) % m;
        }
        let mirror = grid.flatten(&mirror_idx[..grid.d()]);
        if mirror == flat {
            // Self-conjugate bin: a pure cosine mode, one real draw.
            let a: f64 = StandardNormal.sample(&mut rng);
            spectrum[flat] = Complex::new(scale * a, 0.0);
            filled[flat] = true;
        } else {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            spectrum[flat] = Complex::new(scale * 0.5 * a, -scale * 0.5 * b);
            spectrum[mirror] = spectrum[flat].conj();
            filled[flat] = true;
            filled[mirror] = true;
        }
    }
    transform_axes(grid, &mut spectrum, false);
    let values = spectrum.iter().map(|z| z.re).collect();
    SampledField::new(*grid, values)
}
