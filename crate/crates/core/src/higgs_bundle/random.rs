//! Seeded band-limited random fields.
//!
//! Every field is a finite trigonometric sum with integer wave vectors in
//! `[-modes, modes]^{2n}`, `modes ≤ N/4`, so spectral derivatives of the
//! field itself are exact on the grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kahler_grid::{EndoField, KahlerTorus};
use crate::linalg::{C64, ZERO};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_modes(torus: &KahlerTorus, modes: usize) -> Result<()> {
    if modes == 0 || modes > torus.grid_points() / 4 {
        return Err(Error::InvalidInput(format!(
            "band limit {modes} must lie in 1..={} for N = {}",
            torus.grid_points() / 4,
            torus.grid_points()
        )));
    }
    Ok(())
}

/// Real trigonometric polynomial with max |u| = amplitude (zero mean part excluded).
pub fn real_field(torus: &KahlerTorus, rng: &mut impl Rng, amplitude: f64, modes: usize) -> Result<Vec<f64>> {
    check_modes(torus, modes)?;
    let ndim = 2 * torus.n();
    let width = 2 * modes + 1;
    let mut terms = Vec::new();
    for code in 0..width.pow(ndim as u32) {
        let m: Vec<i64> = (0..ndim)
            .map(|k| ((code / width.pow(k as u32)) % width) as i64 - modes as i64)
            .collect();
        if m.iter().all(|&x| x == 0) {
            continue;
        }
        let a: f64 = rng.random_range(-1.0..1.0);
        let b: f64 = rng.random_range(-1.0..1.0);
        terms.push((m, a, b));
    }
    let lengths = torus.lengths().to_vec();
    let mut u: Vec<f64> = (0..torus.npts())
        .map(|p| {
            let x = torus.coords(p);
            terms
                .iter()
                .map(|(m, a, b)| {
                    let phase: f64 = (0..ndim)
                        .map(|k| 2.0 * std::f64::consts::PI * m[k] as f64 * x[k] / lengths[k / 2])
                        .sum();
                    a * phase.cos() + b * phase.sin()
                })
                .sum()
        })
        .collect();
    let peak = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak > 0.0 {
        u.iter_mut().for_each(|x| *x *= amplitude / peak);
    }
    Ok(u)
}

/// Hermitian matrix field with every entry a band-limited field of size ≤ amplitude.
pub fn hermitian_field(
    torus: &KahlerTorus,
    rng: &mut impl Rng,
    rank: usize,
    amplitude: f64,
    modes: usize,
) -> Result<EndoField> {
    let npts = torus.npts();
    let mut data = vec![ZERO; rank * rank * npts];
    for i in 0..rank {
        for j in i..rank {
            let re = real_field(torus, rng, amplitude, modes)?;
            let im = if i == j {
                vec![0.0; npts]
            } else {
                real_field(torus, rng, amplitude, modes)?
            };
            for p in 0..npts {
                let z = C64::new(re[p], im[p]) * if i == j { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
                data[p * rank * rank + i * rank + j] = z;
                data[p * rank * rank + j * rank + i] = z.conj();
            }
        }
    }
    EndoField::from_data(rank, data)
}

/// General complex matrix field, entries band-limited of size ≤ amplitude.
pub fn complex_field(
    torus: &KahlerTorus,
    rng: &mut impl Rng,
    rank: usize,
    amplitude: f64,
    modes: usize,
) -> Result<EndoField> {
    let npts = torus.npts();
    let mut data = vec![ZERO; rank * rank * npts];
    for e in 0..rank * rank {
        let re = real_field(torus, rng, amplitude, modes)?;
        let im = real_field(torus, rng, amplitude, modes)?;
        for p in 0..npts {
            data[p * rank * rank + e] = C64::new(re[p], im[p]);
        }
    }
    EndoField::from_data(rank, data)
}
