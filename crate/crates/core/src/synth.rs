//! Regularity-controlled random fields on the torus.
//!
//! `synth_field(s, seed, grid, dim)` sums `c_n e^{i n·x}` over the modes with
//! `|n₁|, |n₂| < N/2`, where `|c_n| = (1 + |n|)^{−s}` and the phase of each
//! mode is drawn from a ChaCha stream addressed by `(seed, component, n)`.
//! A given mode therefore receives the same coefficient on every grid, so a
//! refinement sweep sees the same function truncated at a higher band.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::field::DiscreteField;
use crate::grid::{Domain, GridSpec};
use crate::spectral::fft2;

/// Name and version of the generator behind every seeded draw.
pub const GENERATOR: &str = "rand_chacha::ChaCha8Rng/0.9";

fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

/// Grid-independent index of mode `(n₁, n₂)`.
fn mode_index(n1: i64, n2: i64) -> u64 {
    let (a, b) = (zigzag(n1), zigzag(n2));
    (a + b) * (a + b + 1) / 2 + b
}

fn mode_phase(seed: u64, component: usize, n1: i64, n2: i64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(component as u64);
    rng.set_word_pos(2 * mode_index(n1, n2) as u128);
    rng.random::<f64>() * std::f64::consts::TAU
}

/// Seeded random field with algebraic spectral decay `s`.
pub fn synth_field(s: f64, seed: u64, grid: GridSpec, target_dim: usize) -> Result<DiscreteField> {
    if !(s > 1.0) {
        return Err(LabError::Config(format!("decay s = {s} must exceed 1")));
    }
    if grid.domain() != Domain::Torus {
        return Err(LabError::GridMismatch("synth_field needs a torus grid".into()));
    }
    if target_dim == 0 {
        return Err(LabError::Shape("target dimension must be positive".into()));
    }
    let n = grid.n();
    let half = (n / 2) as i64;
    let bin = |k: i64| (k.rem_euclid(n as i64)) as usize;
    let comps = (0..target_dim)
        .map(|c| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
            for n2 in (1 - half)..half {
                for n1 in (1 - half)..half {
                    if n1 < 0 || (n1 == 0 && n2 <= 0) {
                        continue;
                    }
                    let mag = (1.0 + ((n1 * n1 + n2 * n2) as f64).sqrt()).powf(-s);
                    let coeff = Complex64::from_polar(mag, mode_phase(seed, c, n1, n2));
                    buf[bin(n2) * n + bin(n1)] = coeff;
                    buf[bin(-n2) * n + bin(-n1)] = coeff.conj();
                }
            }
            let sign = if mode_phase(seed, c, 0, 0) < std::f64::consts::PI { 1.0 } else { -1.0 };
            buf[0] = Complex64::new(sign, 0.0);
            fft2(&mut buf, n, true);
            buf.iter().map(|v| v.re).collect()
        })
        .collect();
    DiscreteField::from_components(grid, comps)
}

/// Keeps only the modes with `max(|n₁|, |n₂|) <= band`.
pub fn spectral_truncate(f: &DiscreteField, band: usize) -> Result<DiscreteField> {
    if f.grid().domain() != Domain::Torus {
        return Err(LabError::GridMismatch("spectral truncation needs a torus grid".into()));
    }
    let n = f.grid().n();
    let keep = |b: usize| crate::spectral::wavenumber(b, n).is_some_and(|k| k.unsigned_abs() as usize <= band);
    let comps = f
        .components()
        .map(|comp| {
            let mut buf: Vec<Complex64> = comp.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft2(&mut buf, n, false);
            for (idx, v) in buf.iter_mut().enumerate() {
                if !(keep(idx % n) && keep(idx / n)) {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
            fft2(&mut buf, n, true);
            let scale = 1.0 / (n * n) as f64;
            buf.iter().map(|v| v.re * scale).collect()
        })
        .collect();
    DiscreteField::from_components(*f.grid(), comps)
}
