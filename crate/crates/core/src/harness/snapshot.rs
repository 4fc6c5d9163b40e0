//! Binary metric snapshots.
//!
//! Layout, all integers and floats little-endian:
//!
//! | offset      | size    | field                                   |
//! |-------------|---------|-----------------------------------------|
//! | 0           | 4       | magic `b"HFMS"`                         |
//! | 4           | 4       | version, u32 (= 1)                      |
//! | 8           | 4       | n, u32                                  |
//! | 12          | 4       | N, u32 (grid points per real axis)      |
//! | 16          | 4       | r, u32                                  |
//! | 20          | 8·n     | lengths L_1..L_n, f64                   |
//! | 20 + 8n     | 8·r²·P  | entries, P = N^{2n}                     |
//!
//! Entries are (re, im) pairs of f32, ordered by grid point (axes
//! x₁, y₁, x₂, y₂ with the last index fastest), then row-major within each
//! r×r matrix. Values are therefore rounded to single precision.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::higgs_bundle::MetricField;
use crate::kahler_grid::{EndoField, KahlerTorus};
use crate::linalg::C64;

pub const MAGIC: [u8; 4] = *b"HFMS";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub grid: usize,
    pub rank: usize,
    pub lengths: Vec<f64>,
    pub data: Vec<C64>,
}

impl Snapshot {
    pub fn of(torus: &KahlerTorus, h: &MetricField) -> Self {
        Snapshot {
            n: torus.n(),
            grid: torus.grid_points(),
            rank: h.rank(),
            lengths: torus.lengths().to_vec(),
            data: h.h().data().to_vec(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + 8 * self.n + 8 * self.data.len());
        out.extend_from_slice(&MAGIC);
        for v in [VERSION, self.n as u32, self.grid as u32, self.rank as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for l in &self.lengths {
            out.extend_from_slice(&l.to_le_bytes());
        }
        for z in &self.data {
            out.extend_from_slice(&(z.re as f32).to_le_bytes());
            out.extend_from_slice(&(z.im as f32).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |why: &str| Error::Format(format!("metric snapshot: {why}"));
        if bytes.len() < 20 || bytes[..4] != MAGIC {
            return Err(bad("missing magic"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
        if word(4) != VERSION as usize {
            return Err(bad("unsupported version"));
        }
        let (n, grid, rank) = (word(8), word(12), word(16));
        if !(1..=2).contains(&n) || rank == 0 || grid == 0 {
            return Err(bad("header out of range"));
        }
        let npts = grid.checked_pow(2 * n as u32).ok_or_else(|| bad("grid too large"))?;
        let body = 20 + 8 * n;
        if bytes.len() != body + 8 * rank * rank * npts {
            return Err(bad("length does not match header"));
        }
        let lengths = (0..n)
            .map(|a| f64::from_le_bytes(bytes[20 + 8 * a..28 + 8 * a].try_into().expect("8 bytes")))
            .collect();
        let f = |i: usize| f32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as f64;
        let data = (0..rank * rank * npts)
            .map(|e| C64::new(f(body + 8 * e), f(body + 8 * e + 4)))
            .collect();
        Ok(Snapshot {
            n,
            grid,
            rank,
            lengths,
            data,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        super::output::write_atomic(path, &self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    /// The stored metric, symmetrized and validated.
    pub fn metric(&self) -> Result<MetricField> {
        let r = self.rank;
        let mut data = self.data.clone();
        for m in data.chunks_mut(r * r) {
            let t = crate::linalg::conj_transpose(m, r);
            for (a, b) in m.iter_mut().zip(t) {
                *a = (*a + b) * 0.5;
            }
        }
        MetricField::new(EndoField::from_data(r, data)?)
    }
}

/// Writes a snapshot to any sink.
pub fn write_to(mut w: impl Write, s: &Snapshot) -> Result<()> {
    w.write_all(&s.to_bytes())?;
    Ok(())
}
