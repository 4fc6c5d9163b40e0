//! Complex partial derivatives ∂/∂z^α and ∂/∂z̄^α on the periodic grid.
//!
//! Real axes are ordered `x₁, y₁, …, xₙ, yₙ` with the last axis fastest.
//! The spectral scheme is exact on band-limited samples; the Nyquist
//! wave number of each axis is dropped so the operators stay skew-adjoint
//! under the rectangle rule.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::linalg::{C64, I, ZERO};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScheme {
    #[default]
    Spectral,
    /// Fourth-order central differences along each real axis.
    FiniteDifference4,
}

pub struct SpectralEngine {
    n: usize,
    grid: usize,
    total: usize,
    scheme: DerivativeScheme,
    /// Spacing per real axis.
    spacing: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    holo_symbol: Vec<Vec<C64>>,
    anti_symbol: Vec<Vec<C64>>,
}

impl std::fmt::Debug for SpectralEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralEngine")
            .field("n", &self.n)
            .field("grid", &self.grid)
            .field("scheme", &self.scheme)
            .finish()
    }
}

impl SpectralEngine {
    pub fn new(n: usize, lengths: &[f64], grid: usize, scheme: DerivativeScheme) -> Self {
        let ndim = 2 * n;
        let total = grid.pow(ndim as u32);
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(grid);
        let ifft = planner.plan_fft_inverse(grid);

        // Wave number for frequency index m on an axis of length L.
        let wave = |m: usize, len: f64| -> f64 {
            let half = grid / 2;
            if m == half {
                0.0
            } else if m < half {
                2.0 * std::f64::consts::PI * m as f64 / len
            } else {
                2.0 * std::f64::consts::PI * (m as f64 - grid as f64) / len
            }
        };

        let mut holo_symbol = vec![vec![ZERO; total]; n];
        let mut anti_symbol = vec![vec![ZERO; total]; n];
        for idx in 0..total {
            for a in 0..n {
                let mx = (idx / grid.pow((ndim - 1 - 2 * a) as u32)) % grid;
                let my = (idx / grid.pow((ndim - 2 - 2 * a) as u32)) % grid;
                let kx = wave(mx, lengths[a]);
                let ky = wave(my, lengths[a]);
                // ∂_z = (∂_x − i∂_y)/2 and ∂_z̄ = (∂_x + i∂_y)/2 acting on e^{i(kx x + ky y)}.
                holo_symbol[a][idx] = C64::new(ky, kx) * 0.5;
                anti_symbol[a][idx] = C64::new(-ky, kx) * 0.5;
            }
        }
        let spacing = (0..ndim).map(|k| lengths[k / 2] / grid as f64).collect();
        SpectralEngine {
            n,
            grid,
            total,
            scheme,
            spacing,
            fft,
            ifft,
            holo_symbol,
            anti_symbol,
        }
    }

    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }

    fn stride(&self, axis: usize) -> usize {
        self.grid.pow((2 * self.n - 1 - axis) as u32)
    }

    fn transform(&self, buf: &mut [C64], inverse: bool) {
        let grid = self.grid;
        let plan = if inverse { &self.ifft } else { &self.fft };
        let mut scratch = vec![ZERO; self.total];
        for axis in 0..2 * self.n {
            let stride = self.stride(axis);
            let block = grid * stride;
            let mut line = 0;
            for start in (0..self.total).step_by(block) {
                for off in 0..stride {
                    for i in 0..grid {
                        scratch[line * grid + i] = buf[start + off + i * stride];
                    }
                    line += 1;
                }
            }
            plan.process(&mut scratch);
            line = 0;
            for start in (0..self.total).step_by(block) {
                for off in 0..stride {
                    for i in 0..grid {
                        buf[start + off + i * stride] = scratch[line * grid + i];
                    }
                    line += 1;
                }
            }
        }
        if inverse {
            let norm = 1.0 / self.total as f64;
            buf.iter_mut().for_each(|z| *z *= norm);
        }
    }

    fn axis_derivative_fd4(&self, f: &[C64], axis: usize) -> Vec<C64> {
        let grid = self.grid;
        let stride = self.stride(axis);
        let h = self.spacing[axis];
        let mut out = vec![ZERO; self.total];
        for (idx, o) in out.iter_mut().enumerate() {
            let m = (idx / stride) % grid;
            let base = idx - m * stride;
            let at = |shift: isize| -> C64 {
                let mm = (m as isize + shift).rem_euclid(grid as isize) as usize;
                f[base + mm * stride]
            };
            *o = (-at(2) + at(1) * 8.0 - at(-1) * 8.0 + at(-2)) / (12.0 * h);
        }
        out
    }

    /// Returns `(∂f/∂z^α, ∂f/∂z̄^α)` for α = 1..n.
    pub fn partials(&self, f: &[C64]) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
        assert_eq!(f.len(), self.total, "scalar field does not match grid");
        match self.scheme {
            DerivativeScheme::Spectral => {
                let mut hat = f.to_vec();
                self.transform(&mut hat, false);
                let apply = |symbol: &[C64]| {
                    let mut g: Vec<C64> = hat.iter().zip(symbol).map(|(a, s)| a * s).collect();
                    self.transform(&mut g, true);
                    g
                };
                let holo = self.holo_symbol.iter().map(|s| apply(s)).collect();
                let anti = self.anti_symbol.iter().map(|s| apply(s)).collect();
                (holo, anti)
            }
            DerivativeScheme::FiniteDifference4 => {
                let mut holo = Vec::with_capacity(self.n);
                let mut anti = Vec::with_capacity(self.n);
                for a in 0..self.n {
                    let dx = self.axis_derivative_fd4(f, 2 * a);
                    let dy = self.axis_derivative_fd4(f, 2 * a + 1);
                    holo.push(dx.iter().zip(&dy).map(|(x, y)| (x - I * y) * 0.5).collect());
                    anti.push(dx.iter().zip(&dy).map(|(x, y)| (x + I * y) * 0.5).collect());
                }
                (holo, anti)
            }
        }
    }

    /// Entry-wise partials of a field of r×r matrices laid out point-major.
    pub fn partials_matrix(&self, data: &[C64], rank: usize) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
        let rr = rank * rank;
        let npts = data.len() / rr;
        let mut holo = vec![vec![ZERO; data.len()]; self.n];
        let mut anti = vec![vec![ZERO; data.len()]; self.n];
        let mut scalar = vec![ZERO; npts];
        for e in 0..rr {
            let mut nonzero = false;
            for p in 0..npts {
                scalar[p] = data[p * rr + e];
                nonzero |= scalar[p] != ZERO;
            }
            if !nonzero {
                continue;
            }
            let (dh, da) = self.partials(&scalar);
            for a in 0..self.n {
                for p in 0..npts {
                    holo[a][p * rr + e] = dh[a][p];
                    anti[a][p * rr + e] = da[a][p];
                }
            }
        }
        (holo, anti)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn coords(idx: usize, n: usize, grid: usize, lengths: &[f64]) -> Vec<f64> {
        let ndim = 2 * n;
        (0..ndim)
            .map(|k| {
                let m = (idx / grid.pow((ndim - 1 - k) as u32)) % grid;
                m as f64 * lengths[k / 2] / grid as f64
            })
            .collect()
    }

    #[test]
    fn single_mode_is_eigenfunction() {
        let (n, grid, lengths) = (2usize, 8usize, [1.3, 0.7]);
        let engine = SpectralEngine::new(n, &lengths, grid, DerivativeScheme::Spectral);
        let total = grid.pow(4);
        // f = exp(2πi (x₁/L₁ + 2 y₂/L₂))
        let f: Vec<C64> = (0..total)
            .map(|i| {
                let x = coords(i, n, grid, &lengths);
                (I * 2.0 * PI * (x[0] / lengths[0] + 2.0 * x[3] / lengths[1])).exp()
            })
            .collect();
        let (holo, anti) = engine.partials(&f);
        let kx1 = 2.0 * PI / lengths[0];
        let ky2 = 4.0 * PI / lengths[1];
        // ∂_{z1} f = (i kx1)/2 f, ∂_{z̄2} f = (i · i ky2)/2 f.
        for i in 0..total {
            assert!((holo[0][i] - I * kx1 * 0.5 * f[i]).norm() < 1e-10 * kx1);
            assert!((anti[1][i] - (-ky2) * 0.5 * f[i]).norm() < 1e-10 * ky2);
            assert!((holo[1][i] - ky2 * 0.5 * f[i]).norm() < 1e-10 * ky2);
        }
    }

    #[test]
    fn fd4_converges_at_fourth_order() {
        let err = |grid: usize| {
            let engine = SpectralEngine::new(1, &[1.0], grid, DerivativeScheme::FiniteDifference4);
            let f: Vec<C64> = (0..grid * grid)
                .map(|i| {
                    let x = coords(i, 1, grid, &[1.0]);
                    C64::new((2.0 * PI * x[0]).sin(), 0.0)
                })
                .collect();
            let (holo, _) = engine.partials(&f);
            (0..grid * grid)
                .map(|i| {
                    let x = coords(i, 1, grid, &[1.0]);
                    (holo[0][i] - C64::new(PI * (2.0 * PI * x[0]).cos(), 0.0)).norm()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(16) / err(32);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }
}
