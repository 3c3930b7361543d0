use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

/// Periodic `n^3` lattice on the torus `[0, 2pi)^3`.
///
/// Lattice index `i` along an axis carries the integer wavenumber `i` for
/// `i < n/2` and `i - n` otherwise, so `k` ranges over `-n/2 ..= n/2 - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridSpec {
    n: usize,
    dealias_fraction: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: usize,
    #[serde(default = "default_fraction")]
    dealias_fraction: f64,
}

fn default_fraction() -> f64 {
    DEFAULT_DEALIAS_FRACTION
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        GridSpec::with_dealias(raw.n, raw.dealias_fraction)
    }
}

impl From<GridSpec> for RawGrid {
    fn from(g: GridSpec) -> Self {
        RawGrid {
            n: g.n,
            dealias_fraction: g.dealias_fraction,
        }
    }
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_dealias(n, DEFAULT_DEALIAS_FRACTION)
    }

    pub fn with_dealias(n: usize, dealias_fraction: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias_fraction = {dealias_fraction} must lie in (0, 1]"
            )));
        }
        Ok(GridSpec {
            n,
            dealias_fraction,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    pub fn domain_length(&self) -> f64 {
        2.0 * PI
    }

    /// Number of lattice points (and Fourier modes) per component.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Quadrature weight of one lattice cell, `(2pi/n)^3`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// Volume of the torus, `(2pi)^3`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(3)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    #[inline]
    pub fn index(&self, i0: usize, i1: usize, i2: usize) -> usize {
        (i0 * self.n + i1) * self.n + i2
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Wavenumber used for spectral derivatives: the unpaired Nyquist
    /// index differentiates to zero so real fields stay real.
    #[inline]
    pub fn derivative_wavenumber(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.wavenumber(i) as f64
        }
    }

    /// Index of `-k` along one axis.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    /// Flat index of the mode `-k`.
    #[inline]
    pub fn mirror_index(&self, idx: usize) -> usize {
        let [a, b, c] = self.unindex(idx);
        self.index(self.mirror(a), self.mirror(b), self.mirror(c))
    }

    /// Flat index of the integer wavevector `k`, taken modulo the lattice.
    pub fn index_of(&self, k: [i64; 3]) -> usize {
        let n = self.n as i64;
        let w = |x: i64| x.rem_euclid(n) as usize;
        self.index(w(k[0]), w(k[1]), w(k[2]))
    }

    /// Largest retained `|k_i|` is the floor of this value.
    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_fraction * self.n as f64 / 2.0
    }

    /// Per-axis retention mask of the truncation rule.
    pub fn retained_mask(&self) -> Vec<bool> {
        let cut = self.dealias_cutoff();
        (0..self.n)
            .map(|i| (self.wavenumber(i).abs() as f64) <= cut)
            .collect()
    }

    /// Euclidean `|k|` for every flat index.
    pub fn radii(&self) -> Vec<f64> {
        let n = self.n;
        let k: Vec<f64> = (0..n).map(|i| self.wavenumber(i) as f64).collect();
        let mut out = Vec::with_capacity(self.len());
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    out.push((k[a] * k[a] + k[b] * k[b] + k[c] * k[c]).sqrt());
                }
            }
        }
        out
    }

    /// Largest `|k|` present on the lattice.
    pub fn max_radius(&self) -> f64 {
        (3.0f64).sqrt() * (self.n / 2) as f64
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}
