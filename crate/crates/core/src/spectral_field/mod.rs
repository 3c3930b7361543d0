//! Periodic vector fields on the torus `[0, 2pi)^3`.
//!
//! Transform convention: a physical field is `g(x) = sum_k g_hat(k) e^{i k.x}`,
//! so a single mode `a e^{i k.x}` maps to that literal function sampled on the
//! lattice and Parseval reads `||g||_2^2 = (2pi)^3 sum_k |g_hat(k)|^2`.
//!
//! Real fields are transformed two at a time by packing them into the real
//! and imaginary parts of one complex FFT.

mod fft;
mod grid;

use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::{GridSpec, DEFAULT_DEALIAS_FRACTION};

pub(crate) use fft::Fft3;

/// Integrability exponent of a lattice norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exponent {
    Two,
    Three,
    Infinity,
}

impl Exponent {
    pub const ALL: [Exponent; 3] = [Exponent::Two, Exponent::Three, Exponent::Infinity];

    pub fn value(self) -> f64 {
        match self {
            Exponent::Two => 2.0,
            Exponent::Three => 3.0,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `1/p`, zero for the supremum norm.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Infinity => 0.0,
            p => 1.0 / p.value(),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "2" => Ok(Exponent::Two),
            "3" => Ok(Exponent::Three),
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => Err(Error::param(
                "p",
                format!("{other:?} is not one of 2, 3, inf"),
            )),
        }
    }
}

/// Real vector field sampled on the lattice, component-major, C order.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: GridSpec,
    values: [Vec<f64>; 3],
}

impl PhysicalField {
    pub fn zeros(grid: GridSpec) -> Self {
        let z = vec![0.0; grid.len()];
        PhysicalField {
            grid,
            values: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_values(grid: GridSpec, values: [Vec<f64>; 3]) -> Result<Self> {
        for v in &values {
            if v.len() != grid.len() {
                return Err(Error::param(
                    "values",
                    format!("component length {} != n^3 = {}", v.len(), grid.len()),
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::param("values", "non-finite sample"));
            }
        }
        Ok(PhysicalField { grid, values })
    }

    /// Samples `f(x)` at every lattice point `x = 2pi (i0, i1, i2) / n`.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = PhysicalField::zeros(grid);
        let n = grid.n();
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    let x = [
                        grid.coordinate(i0),
                        grid.coordinate(i1),
                        grid.coordinate(i2),
                    ];
                    let v = f(x);
                    let idx = grid.index(i0, i1, i2);
                    for c in 0..3 {
                        out.values[c][idx] = v[c];
                    }
                }
            }
        }
        out
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<f64>; 3] {
        &self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.values[c]
    }

    pub fn into_values(self) -> [Vec<f64>; 3] {
        self.values
    }

    /// Euclidean magnitude at one lattice point.
    pub fn magnitude(&self, idx: usize) -> f64 {
        let [a, b, c] = &self.values;
        (a[idx] * a[idx] + b[idx] * b[idx] + c[idx] * c[idx]).sqrt()
    }
}

/// Complex Fourier coefficients of a real vector field plus its time stamp
/// and viscosity context.
///
/// Fields produced by the solver are Hermitian, divergence-free and zero-mean;
/// [`SpectralField::divergence_residual`] and friends measure how far an
/// arbitrary field is from those invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: [Vec<Complex64>; 3],
    time: f64,
    nu: f64,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        let z = vec![Complex64::default(); grid.len()];
        SpectralField {
            grid,
            coeffs: [z.clone(), z.clone(), z],
            time: 0.0,
            nu: 0.0,
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: [Vec<Complex64>; 3]) -> Result<Self> {
        if coeffs.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::param("coeffs", "component length != n^3"));
        }
        Ok(SpectralField {
            grid,
            coeffs,
            time: 0.0,
            nu: 0.0,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>; 3] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Vec<Complex64>; 3] {
        &mut self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn coeff(&self, c: usize, k: [i64; 3]) -> Complex64 {
        self.coeffs[c][self.grid.index_of(k)]
    }

    /// Sets mode `k` to `value` and mode `-k` to its conjugate.
    pub fn set_mode(&mut self, k: [i64; 3], value: [Complex64; 3]) {
        let i = self.grid.index_of(k);
        let j = self.grid.index_of([-k[0], -k[1], -k[2]]);
        for c in 0..3 {
            self.coeffs[c][i] = value[c];
            self.coeffs[c][j] = value[c].conj();
        }
    }

    /// Same field with the coefficients multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        for comp in out.coeffs.iter_mut() {
            for v in comp.iter_mut() {
                *v *= alpha;
            }
        }
        out
    }

    /// `self + alpha * other`; metadata is taken from `self`.
    pub fn axpy(&self, alpha: f64, other: &SpectralField) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let mut out = self.clone();
        for c in 0..3 {
            for (o, x) in out.coeffs[c].iter_mut().zip(&other.coeffs[c]) {
                *o += alpha * x;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Applies the radial multiplier `m(|k|)` to every mode.
    pub fn apply_radial(&self, m: impl Fn(f64) -> f64) -> Self {
        let radii = self.grid.radii();
        self.apply_radial_with(&radii, m)
    }

    pub(crate) fn apply_radial_with(&self, radii: &[f64], m: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for (idx, r) in radii.iter().enumerate() {
            let w = m(*r);
            for c in 0..3 {
                out.coeffs[c][idx] *= w;
            }
        }
        out
    }

    /// Zeroes every mode with some `|k_i|` above the truncation cutoff.
    pub fn truncated(&self) -> Self {
        let keep = self.grid.retained_mask();
        let mut out = self.clone();
        for comp in out.coeffs.iter_mut() {
            fft::zero_outside(comp, self.grid.n(), &keep);
        }
        out
    }

    /// True when no mode outside the truncation band is populated.
    pub fn is_band_limited(&self) -> bool {
        let keep = self.grid.retained_mask();
        let n = self.grid.n();
        self.coeffs.iter().all(|comp| {
            comp.iter().enumerate().all(|(idx, v)| {
                let [a, b, c] = [idx / (n * n), (idx / n) % n, idx % n];
                (keep[a] && keep[b] && keep[c]) || *v == Complex64::default()
            })
        })
    }

    /// `||u||_2^2` via Parseval.
    pub fn energy(&self) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm_sqr())
            .sum();
        self.grid.volume() * s
    }

    pub fn l2_norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// `||grad u||_2^2` via Parseval with the derivative wavenumbers.
    pub fn gradient_energy(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let kd: Vec<f64> = (0..n).map(|i| g.derivative_wavenumber(i)).collect();
        let mut s = 0.0;
        for idx in 0..g.len() {
            let [a, b, c] = g.unindex(idx);
            let k2 = kd[a] * kd[a] + kd[b] * kd[b] + kd[c] * kd[c];
            if k2 == 0.0 {
                continue;
            }
            let m: f64 = self.coeffs.iter().map(|comp| comp[idx].norm_sqr()).sum();
            s += k2 * m;
        }
        g.volume() * s
    }

    /// `max_k |k . u_hat(k)| / |u_hat(k)|` over populated modes `k != 0`.
    pub fn divergence_residual(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let kd: Vec<f64> = (0..n).map(|i| g.derivative_wavenumber(i)).collect();
        let mut worst = 0.0f64;
        for idx in 1..g.len() {
            let [a, b, c] = g.unindex(idx);
            let v = [
                self.coeffs[0][idx],
                self.coeffs[1][idx],
                self.coeffs[2][idx],
            ];
            let mag = (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt();
            if mag == 0.0 {
                continue;
            }
            let div = v[0] * kd[a] + v[1] * kd[b] + v[2] * kd[c];
            worst = worst.max(div.norm() / mag);
        }
        worst
    }

    /// `max |u_hat(-k) - conj(u_hat(k))|`, relative to the largest coefficient.
    pub fn hermitian_residual(&self) -> f64 {
        let g = &self.grid;
        let scale = self
            .coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for comp in &self.coeffs {
            for idx in 0..g.len() {
                let m = g.mirror_index(idx);
                worst = worst.max((comp[m] - comp[idx].conj()).norm());
            }
        }
        worst / scale
    }

    pub fn mean(&self) -> [Complex64; 3] {
        [self.coeffs[0][0], self.coeffs[1][0], self.coeffs[2][0]]
    }

    /// Divergence-free, zero-mean field with Gaussian coefficients on the
    /// shell `k_min <= |k| <= k_max`, rescaled to `||u||_2^2 = energy`.
    pub fn random_solenoidal(
        grid: GridSpec,
        seed: u64,
        k_min: f64,
        k_max: f64,
        energy: f64,
    ) -> Result<Self> {
        if !(k_min >= 0.0 && k_max >= k_min) {
            return Err(Error::param(
                "k_max",
                format!("shell [{k_min}, {k_max}] is empty"),
            ));
        }
        if k_max > grid.dealias_cutoff() {
            return Err(Error::param(
                "k_max",
                format!(
                    "{k_max} lies beyond the dealiased band |k_i| <= {:.3}",
                    grid.dealias_cutoff()
                ),
            ));
        }
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::param("energy", format!("{energy} must be positive")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let radii = grid.radii();
        let mut raw = SpectralField::zeros(grid);
        for idx in 1..grid.len() {
            let r = radii[idx];
            for c in 0..3 {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                if r >= k_min && r <= k_max {
                    raw.coeffs[c][idx] = Complex64::new(re, im);
                }
            }
        }
        let mut sym = SpectralField::zeros(grid);
        for idx in 0..grid.len() {
            let m = grid.mirror_index(idx);
            for c in 0..3 {
                sym.coeffs[c][idx] = 0.5 * (raw.coeffs[c][idx] + raw.coeffs[c][m].conj());
            }
        }
        let projected = leray_project(&sym);
        let e = projected.energy();
        if e == 0.0 {
            return Err(Error::param("k_min", "shell contains no lattice modes"));
        }
        Ok(projected.scaled((energy / e).sqrt()))
    }
}

/// Spectral second-order tensor field, components `T_ij` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTensor {
    grid: GridSpec,
    comps: Vec<Vec<Complex64>>,
}

impl SpectralTensor {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralTensor {
            grid,
            comps: vec![vec![Complex64::default(); grid.len()]; 9],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn get(&self, i: usize, j: usize) -> &[Complex64] {
        &self.comps[3 * i + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Vec<Complex64> {
        &mut self.comps[3 * i + j]
    }

    pub fn transpose(&self) -> Self {
        let mut out = self.clone();
        for i in 0..3 {
            for j in 0..3 {
                out.comps[3 * i + j] = self.comps[3 * j + i].clone();
            }
        }
        out
    }

    pub fn axpy(&self, alpha: f64, other: &SpectralTensor) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let mut out = self.clone();
        for (o, x) in out.comps.iter_mut().zip(&other.comps) {
            for (a, b) in o.iter_mut().zip(x) {
                *a += alpha * b;
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        for comp in out.comps.iter_mut() {
            for v in comp.iter_mut() {
                *v *= alpha;
            }
        }
        out
    }

    pub fn apply_radial(&self, m: impl Fn(f64) -> f64) -> Self {
        let radii = self.grid.radii();
        self.apply_radial_with(&radii, m)
    }

    pub(crate) fn apply_radial_with(&self, radii: &[f64], m: impl Fn(f64) -> f64) -> Self {
        let weights: Vec<f64> = radii.iter().map(|r| m(*r)).collect();
        let mut out = self.clone();
        for comp in out.comps.iter_mut() {
            for (v, w) in comp.iter_mut().zip(&weights) {
                *v *= *w;
            }
        }
        out
    }

    /// `sum_ij ||T_ij||_2^2` via Parseval.
    pub fn energy(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm_sqr())
            .sum();
        self.grid.volume() * s
    }

    /// `int tr[self . other] dx = sum_ij int self_ij other_ji dx`.
    pub fn trace_pairing(&self, other: &SpectralTensor) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += inner(&self.grid, self.get(i, j), other.get(j, i));
            }
        }
        s
    }

    /// Physical samples of the nine components.
    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        let refs: Vec<&[Complex64]> = self.comps.iter().map(|c| c.as_slice()).collect();
        inverse_real(&self.grid, &refs, None)
    }
}

/// `int f g dx` for two real fields given by their coefficients.
pub(crate) fn inner(grid: &GridSpec, a: &[Complex64], b: &[Complex64]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x * y.conj()).re).sum();
    grid.volume() * s
}

/// Inverse transforms Hermitian coefficient arrays into real samples.
fn inverse_real(grid: &GridSpec, arrays: &[&[Complex64]], keep: Option<&[bool]>) -> Vec<Vec<f64>> {
    let plan = Fft3::get(grid.n());
    let mut out = Vec::with_capacity(arrays.len());
    for pair in arrays.chunks(2) {
        let mut buf: Vec<Complex64> = match pair {
            [a, b] => a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| x + Complex64::i() * y)
                .collect(),
            [a] => a.to_vec(),
            _ => unreachable!(),
        };
        plan.inverse(&mut buf, keep);
        out.push(buf.iter().map(|v| v.re).collect());
        if pair.len() == 2 {
            out.push(buf.iter().map(|v| v.im).collect());
        }
    }
    out
}

/// Forward transforms real samples; the output is exactly Hermitian.
fn forward_real(grid: &GridSpec, arrays: &[&[f64]], keep: Option<&[bool]>) -> Vec<Vec<Complex64>> {
    let plan = Fft3::get(grid.n());
    let norm = 1.0 / grid.len() as f64;
    let half = Complex64::new(0.5, 0.0);
    let minus_half_i = Complex64::new(0.0, -0.5);
    let mirror = plan.mirror();
    let mut out = Vec::with_capacity(arrays.len());
    for pair in arrays.chunks(2) {
        let mut buf: Vec<Complex64> = match pair {
            [a, b] => a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| Complex64::new(*x, *y))
                .collect(),
            [a] => a.iter().map(|x| Complex64::new(*x, 0.0)).collect(),
            _ => unreachable!(),
        };
        plan.forward(&mut buf, keep);
        for v in buf.iter_mut() {
            *v *= norm;
        }
        let first: Vec<Complex64> = (0..buf.len())
            .map(|k| half * (buf[k] + buf[mirror[k]].conj()))
            .collect();
        if pair.len() == 2 {
            let second: Vec<Complex64> = (0..buf.len())
                .map(|k| minus_half_i * (buf[k] - buf[mirror[k]].conj()))
                .collect();
            out.push(first);
            out.push(second);
        } else {
            out.push(first);
        }
    }
    out
}

/// Samples of the three components; band-limited input uses pruned passes.
pub(crate) fn physical_components(f: &SpectralField) -> [Vec<f64>; 3] {
    let mask = f.grid.retained_mask();
    let keep = if f.is_band_limited() {
        Some(mask.as_slice())
    } else {
        None
    };
    physical_components_with(f, keep)
}

/// As [`physical_components`], trusting the caller that `f` vanishes outside `keep`.
pub(crate) fn physical_components_with(f: &SpectralField, keep: Option<&[bool]>) -> [Vec<f64>; 3] {
    let refs: Vec<&[Complex64]> = f.coeffs.iter().map(|c| c.as_slice()).collect();
    let mut v = inverse_real(&f.grid, &refs, keep).into_iter();
    [v.next().unwrap(), v.next().unwrap(), v.next().unwrap()]
}

/// Inverse transform to lattice samples.
pub fn to_physical(f: &SpectralField) -> PhysicalField {
    PhysicalField {
        grid: f.grid,
        values: physical_components(f),
    }
}

/// Forward transform of lattice samples; time and viscosity are zero.
pub fn to_spectral(g: &PhysicalField) -> SpectralField {
    let refs: Vec<&[f64]> = g.values.iter().map(|c| c.as_slice()).collect();
    let mut v = forward_real(&g.grid, &refs, None).into_iter();
    SpectralField {
        grid: g.grid,
        coeffs: [v.next().unwrap(), v.next().unwrap(), v.next().unwrap()],
        time: 0.0,
        nu: 0.0,
    }
}

/// Leray projection `u_hat - k (k . u_hat) / |k|^2` per mode; mode 0 untouched.
pub fn leray_project(f: &SpectralField) -> SpectralField {
    let g = f.grid;
    let n = g.n();
    let kd: Vec<f64> = (0..n).map(|i| g.derivative_wavenumber(i)).collect();
    let mut out = f.clone();
    let mut idx = 0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let k = [kd[a], kd[b], kd[c]];
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if k2 != 0.0 {
                    let u = [f.coeffs[0][idx], f.coeffs[1][idx], f.coeffs[2][idx]];
                    let kdotu = (u[0] * k[0] + u[1] * k[1] + u[2] * k[2]) / k2;
                    for comp in 0..3 {
                        out.coeffs[comp][idx] = u[comp] - kdotu * k[comp];
                    }
                }
                idx += 1;
            }
        }
    }
    out
}

/// `G_ij = d_i u_j`, i.e. `i k_i u_hat_j`.
pub fn gradient(f: &SpectralField) -> SpectralTensor {
    let g = f.grid;
    let n = g.n();
    let kd: Vec<f64> = (0..n).map(|i| g.derivative_wavenumber(i)).collect();
    let mut out = SpectralTensor::zeros(g);
    for idx in 0..g.len() {
        let lattice = g.unindex(idx);
        for i in 0..3 {
            let ik = Complex64::new(0.0, kd[lattice[i]]);
            for j in 0..3 {
                out.comps[3 * i + j][idx] = ik * f.coeffs[j][idx];
            }
        }
    }
    out
}

/// Builds the tensor `a_i b_j` from physical samples and truncates it.
pub(crate) fn product_from_samples(
    grid: &GridSpec,
    a: &[Vec<f64>; 3],
    b: &[Vec<f64>; 3],
    symmetric: bool,
) -> SpectralTensor {
    let keep = grid.retained_mask();
    let pairs: Vec<(usize, usize)> = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .filter(|(i, j)| !symmetric || i <= j)
        .collect();
    let products: Vec<Vec<f64>> = pairs
        .iter()
        .map(|&(i, j)| a[i].iter().zip(&b[j]).map(|(x, y)| x * y).collect())
        .collect();
    let refs: Vec<&[f64]> = products.iter().map(|p| p.as_slice()).collect();
    let spectral = forward_real(grid, &refs, Some(&keep));
    let mut out = SpectralTensor::zeros(*grid);
    for ((i, j), comp) in pairs.into_iter().zip(spectral) {
        if symmetric && i != j {
            out.comps[3 * j + i] = comp.clone();
        }
        out.comps[3 * i + j] = comp;
    }
    out
}

/// Dealiased tensor product `f (x) g`: both inputs truncated, multiplied
/// pointwise on the lattice, transformed back and truncated again.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralTensor> {
    f.grid.ensure_same(&g.grid)?;
    let a = physical_components(&f.truncated());
    if std::ptr::eq(f, g) || f.coeffs == g.coeffs {
        return Ok(product_from_samples(&f.grid, &a, &a, true));
    }
    let b = physical_components(&g.truncated());
    Ok(product_from_samples(&f.grid, &a, &b, false))
}

/// Lattice quadrature of `(int |g|^p dx)^{1/p}`; lattice maximum for `p = inf`.
pub fn lp_norm(g: &PhysicalField, p: Exponent) -> f64 {
    let w = g.grid.cell_volume();
    let len = g.grid.len();
    match p {
        Exponent::Two => {
            let s: f64 = (0..len).map(|i| g.magnitude(i).powi(2)).sum();
            (w * s).sqrt()
        }
        Exponent::Three => {
            let s: f64 = (0..len).map(|i| g.magnitude(i).powi(3)).sum();
            (w * s).cbrt()
        }
        Exponent::Infinity => (0..len).map(|i| g.magnitude(i)).fold(0.0, f64::max),
    }
}

/// Lattice maximum of `|u|` after trigonometric interpolation onto a grid
/// `factor` times finer. Nyquist coefficients are split evenly between
/// `+n/2` and `-n/2` so the interpolant stays real.
pub fn oversampled_linf(f: &SpectralField, factor: usize) -> Result<f64> {
    if factor == 0 {
        return Err(Error::param("factor", "must be positive"));
    }
    let g = f.grid;
    let n = g.n();
    let fine = GridSpec::with_dealias(factor * n, g.dealias_fraction())?;
    let m = fine.n();
    let targets: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let k = g.wavenumber(i);
            let to = |k: i64| k.rem_euclid(m as i64) as usize;
            if i == n / 2 && factor > 1 {
                vec![(to(k), 0.5), (to(-k), 0.5)]
            } else {
                vec![(to(k), 1.0)]
            }
        })
        .collect();
    let mut padded = SpectralField::zeros(fine);
    for idx in 0..g.len() {
        let [a, b, c] = g.unindex(idx);
        for &(ta, wa) in &targets[a] {
            for &(tb, wb) in &targets[b] {
                for &(tc, wc) in &targets[c] {
                    let to = fine.index(ta, tb, tc);
                    let w = wa * wb * wc;
                    for comp in 0..3 {
                        padded.coeffs[comp][to] += f.coeffs[comp][idx] * w;
                    }
                }
            }
        }
    }
    Ok(lp_norm(&to_physical(&padded), Exponent::Infinity))
}

#[cfg(test)]
mod tests;
