//! Dyadic Littlewood-Paley blocks and the Besov / Sobolev norms built on them.
//!
//! The radial cutoff `chi` equals one on `|xi| <= 1`, vanishes for
//! `|xi| >= 2` and is the `exp(-1/s)` smooth step in between. The annular bump
//! is `phi(xi) = chi(xi/2) - chi(xi)`, block `q >= 0` applies
//! `phi(|k| / 2^q)` and block `-1` applies `chi(|k|)`. Blocks are computed as
//! spectral multipliers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_field::{lp_norm, to_physical, Exponent, GridSpec, SpectralField};

/// `lambda_q = 2^q`, including `lambda_{-1} = 1/2`.
#[inline]
pub fn lambda(q: i32) -> f64 {
    2f64.powi(q)
}

fn smooth_step_kernel(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Radial cutoff `chi(|xi|)`.
pub fn chi(radius: f64) -> f64 {
    if radius <= 1.0 {
        1.0
    } else if radius >= 2.0 {
        0.0
    } else {
        let a = smooth_step_kernel(2.0 - radius);
        let b = smooth_step_kernel(radius - 1.0);
        a / (a + b)
    }
}

/// Annular bump `phi(|xi|) = chi(|xi|/2) - chi(|xi|)`, supported on `1 < |xi| < 4`.
pub fn phi(radius: f64) -> f64 {
    chi(radius / 2.0) - chi(radius)
}

/// Multiplier of block `q` at wavenumber magnitude `radius`.
pub fn block_multiplier(q: i32, radius: f64) -> f64 {
    if q < 0 {
        chi(radius)
    } else {
        phi(radius / lambda(q))
    }
}

/// Multiplier of the partial sum `u_{<=q}`, i.e. `chi(|k| / lambda_{q+1})`.
pub fn partial_multiplier(q: i32, radius: f64) -> f64 {
    chi(radius / lambda(q + 1))
}

/// Largest `q` whose annulus `lambda_q < |k| < lambda_{q+2}` meets the lattice.
pub fn q_max(grid: &GridSpec) -> i32 {
    let r = grid.max_radius();
    let mut q = -1;
    while lambda(q + 1) < r {
        q += 1;
    }
    q
}

/// Smoothness and integrability of a `B^s_{p,inf}` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: Exponent,
}

impl BesovParams {
    pub fn new(s: f64, p: Exponent) -> Self {
        BesovParams { s, p }
    }
}

/// Per-block lattice norms `||u_q||_2`, `||u_q||_3`, `||u_q||_inf` for
/// `q = -1 ..= q_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockNorms {
    q_max: i32,
    l2: Vec<f64>,
    l3: Vec<f64>,
    linf: Vec<f64>,
}

impl BlockNorms {
    pub fn from_parts(q_max: i32, l2: Vec<f64>, l3: Vec<f64>, linf: Vec<f64>) -> Result<Self> {
        let len = (q_max + 2) as usize;
        if l2.len() != len || l3.len() != len || linf.len() != len {
            return Err(Error::param("norms", "length does not match q_max + 2"));
        }
        Ok(BlockNorms {
            q_max,
            l2,
            l3,
            linf,
        })
    }

    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    pub fn qs(&self) -> impl Iterator<Item = i32> {
        -1..=self.q_max
    }

    fn slot(&self, q: i32) -> Option<usize> {
        (q >= -1 && q <= self.q_max).then(|| (q + 1) as usize)
    }

    /// Zero outside `-1 ..= q_max`.
    pub fn get(&self, q: i32, p: Exponent) -> f64 {
        let Some(i) = self.slot(q) else { return 0.0 };
        match p {
            Exponent::Two => self.l2[i],
            Exponent::Three => self.l3[i],
            Exponent::Infinity => self.linf[i],
        }
    }

    pub fn l2(&self, q: i32) -> f64 {
        self.get(q, Exponent::Two)
    }

    pub fn l3(&self, q: i32) -> f64 {
        self.get(q, Exponent::Three)
    }

    pub fn linf(&self, q: i32) -> f64 {
        self.get(q, Exponent::Infinity)
    }

    /// Same norms after multiplying the field by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let a = alpha.abs();
        let s = |v: &Vec<f64>| v.iter().map(|x| a * x).collect();
        BlockNorms {
            q_max: self.q_max,
            l2: s(&self.l2),
            l3: s(&self.l3),
            linf: s(&self.linf),
        }
    }

    /// Same norms with block `q` zeroed.
    pub fn without_block(&self, q: i32) -> Self {
        let mut out = self.clone();
        if let Some(i) = self.slot(q) {
            out.l2[i] = 0.0;
            out.l3[i] = 0.0;
            out.linf[i] = 0.0;
        }
        out
    }

    /// `sup_q lambda_q^s ||u_q||_p`.
    pub fn besov(&self, params: BesovParams) -> f64 {
        self.qs()
            .map(|q| lambda(q).powf(params.s) * self.get(q, params.p))
            .fold(0.0, f64::max)
    }

    /// `(sum_q lambda_q^{2s} ||u_q||_2^2)^{1/2}`.
    pub fn sobolev(&self, s: f64) -> f64 {
        self.qs()
            .map(|q| lambda(q).powf(2.0 * s) * self.l2(q).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// The dyadic blocks `{u_q}` of one snapshot with their norms.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    source: SpectralField,
    blocks: Vec<SpectralField>,
    norms: BlockNorms,
}

impl BlockDecomposition {
    pub fn source(&self) -> &SpectralField {
        &self.source
    }

    pub fn q_max(&self) -> i32 {
        self.norms.q_max
    }

    pub fn norms(&self) -> &BlockNorms {
        &self.norms
    }

    /// Block `q`; `None` outside `-1 ..= q_max`.
    pub fn block(&self, q: i32) -> Option<&SpectralField> {
        self.norms.slot(q).map(|i| &self.blocks[i])
    }

    pub fn blocks(&self) -> impl Iterator<Item = (i32, &SpectralField)> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (i as i32 - 1, b))
    }
}

fn norms_of(block: &SpectralField) -> [f64; 3] {
    let phys = to_physical(block);
    [
        lp_norm(&phys, Exponent::Two),
        lp_norm(&phys, Exponent::Three),
        lp_norm(&phys, Exponent::Infinity),
    ]
}

/// Splits `f` into its Littlewood-Paley blocks.
pub fn decompose(f: &SpectralField) -> BlockDecomposition {
    let grid = *f.grid();
    let radii = grid.radii();
    let top = q_max(&grid);
    let mut blocks = Vec::with_capacity((top + 2) as usize);
    let (mut l2, mut l3, mut linf) = (Vec::new(), Vec::new(), Vec::new());
    for q in -1..=top {
        let b = f.apply_radial_with(&radii, |r| block_multiplier(q, r));
        let [a, c, d] = norms_of(&b);
        l2.push(a);
        l3.push(c);
        linf.push(d);
        blocks.push(b);
    }
    BlockDecomposition {
        source: f.clone(),
        blocks,
        norms: BlockNorms {
            q_max: top,
            l2,
            l3,
            linf,
        },
    }
}

/// Block norms without retaining the blocks.
pub fn block_norms(f: &SpectralField) -> BlockNorms {
    let grid = *f.grid();
    let radii = grid.radii();
    let top = q_max(&grid);
    let (mut l2, mut l3, mut linf) = (Vec::new(), Vec::new(), Vec::new());
    for q in -1..=top {
        let [a, c, d] = norms_of(&f.apply_radial_with(&radii, |r| block_multiplier(q, r)));
        l2.push(a);
        l3.push(c);
        linf.push(d);
    }
    BlockNorms {
        q_max: top,
        l2,
        l3,
        linf,
    }
}

/// `u_{<=q} = sum_{p=-1}^{q} u_p`.
pub fn partial_sum(d: &BlockDecomposition, q: i32) -> Result<SpectralField> {
    if q < -1 {
        return Err(Error::param("q", format!("{q} < -1")));
    }
    let mut out = SpectralField::zeros(*d.source.grid())
        .with_time(d.source.time())
        .with_nu(d.source.nu());
    for (p, b) in d.blocks() {
        if p > q {
            break;
        }
        out = out.axpy(1.0, b)?;
    }
    Ok(out)
}

pub fn besov_norm(d: &BlockDecomposition, params: BesovParams) -> f64 {
    d.norms.besov(params)
}

pub fn sobolev_norm(d: &BlockDecomposition, s: f64) -> f64 {
    d.norms.sobolev(s)
}

/// `((2pi)^3 sum_{k != 0} |k|^{2s} |u_hat(k)|^2)^{1/2}`, the multiplier form
/// used to cross-check [`sobolev_norm`].
pub fn sobolev_norm_multiplier(f: &SpectralField, s: f64) -> f64 {
    let radii = f.grid().radii();
    let mut acc = 0.0;
    for (idx, r) in radii.iter().enumerate().skip(1) {
        let m: f64 = (0..3).map(|c| f.component(c)[idx].norm_sqr()).sum();
        acc += r.powf(2.0 * s) * m;
    }
    (f.grid().volume() * acc).sqrt()
}

/// Largest observed `||u_q||_{p_high} / (lambda_q^{3/p_low - 3/p_high} ||u_q||_{p_low})`
/// over every nonzero block in the battery.
pub fn bernstein_constant(
    battery: &[BlockNorms],
    p_low: Exponent,
    p_high: Exponent,
) -> Result<f64> {
    if p_low.value() > p_high.value() {
        return Err(Error::param(
            "p_low",
            format!("{} exceeds p_high = {}", p_low.value(), p_high.value()),
        ));
    }
    if p_low == p_high {
        return Ok(1.0);
    }
    let gap = 3.0 * (p_low.reciprocal() - p_high.reciprocal());
    let mut best = 0.0f64;
    for norms in battery {
        for q in norms.qs() {
            let low = norms.get(q, p_low);
            if low <= 0.0 {
                continue;
            }
            best = best.max(norms.get(q, p_high) / (lambda(q).powf(gap) * low));
        }
    }
    Ok(best)
}

/// Lattice samples of `(2pi)^-3 sum_k m(|k|) e^{i k.x}`.
fn kernel_samples(grid: &GridSpec, m: impl Fn(f64) -> f64) -> Vec<f64> {
    let radii = grid.radii();
    let mut f = SpectralField::zeros(*grid);
    for (idx, r) in radii.iter().enumerate() {
        f.coeffs_mut()[0][idx] = num_complex::Complex64::new(m(*r), 0.0);
    }
    let scale = 1.0 / grid.volume();
    to_physical(&f).into_values()[0]
        .iter()
        .map(|v| v * scale)
        .collect()
}

/// Lattice `L^p` norm of a scalar sample array.
fn scalar_norm(grid: &GridSpec, v: &[f64], p: f64) -> f64 {
    let w = grid.cell_volume();
    if p.is_infinite() {
        return v.iter().fold(0.0, |a, x| a.max(x.abs()));
    }
    (w * v.iter().map(|x| x.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
}

/// Multiplier equal to one on the support of block `q`.
fn block_envelope(q: i32, r: f64) -> f64 {
    match q {
        -1 => chi(r / 2.0),
        0 => chi(r / 4.0),
        _ => chi(r / lambda(q + 2)) - chi(r / lambda(q - 1)),
    }
}

/// Kernel-norm upper bound for the Bernstein constant of the pair
/// `(p_low, inf)` on this grid: `max_q lambda_q^{-3/p_low} ||K_q||_{p_low'}` with
/// `K_q` the kernel of a multiplier equal to one on block `q`'s support.
///
/// The lattice convolution `u_q = K_q * u_q` is exact for fields on the grid,
/// so discrete Hoelder makes this a rigorous bound for lattice norms.
pub fn kernel_bernstein_bound(grid: &GridSpec, p_low: Exponent) -> f64 {
    if p_low == Exponent::Infinity {
        return 1.0;
    }
    let conj = 1.0 / (1.0 - p_low.reciprocal());
    (-1..=q_max(grid))
        .map(|q| {
            let k = kernel_samples(grid, |r| block_envelope(q, r));
            lambda(q).powf(-3.0 * p_low.reciprocal()) * scalar_norm(grid, &k, conj)
        })
        .fold(0.0, f64::max)
}

/// Constant `C_emb` with `||u||_{B^{-1}_{inf,inf}} <= C_emb ||u||_{L^3}` on this
/// grid: `max_q lambda_q^{-1} ||F^-1 phi_q||_{3/2}` by lattice quadrature.
pub fn embedding_constant(grid: &GridSpec) -> f64 {
    (-1..=q_max(grid))
        .map(|q| {
            let k = kernel_samples(grid, |r| block_multiplier(q, r));
            scalar_norm(grid, &k, 1.5) / lambda(q)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::spectral_field::{to_physical, PhysicalField};
    use num_complex::Complex64;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n).unwrap()
    }

    #[test]
    fn cutoff_values() {
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(3.0), 0.0);
        assert_eq!(phi(1.0), 0.0);
        assert_eq!(phi(4.0), 0.0);
        assert!((chi(1.5) - 0.5).abs() < 1e-15);
        assert!((phi(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chi_monotone_and_bounded() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let r = 1.0 + i as f64 / 1000.0;
            let v = chi(r);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-15);
            prev = v;
            assert!(phi(r) >= 0.0 && phi(r) <= 1.0);
        }
    }

    #[test]
    fn partition_of_unity() {
        let top = 8;
        for i in 0..10_000 {
            let r = i as f64 * (lambda(top + 1) / 10_000.0);
            let s: f64 = chi(r) + (0..=top).map(|q| phi(r / lambda(q))).sum::<f64>();
            assert!((s - 1.0).abs() <= 1e-12, "r = {r}: {s}");
        }
    }

    #[test]
    fn q_max_matches_formula() {
        for n in [8usize, 16, 32, 64, 128] {
            let g = grid(n);
            let formula = (n as f64 * g.dealias_fraction() / 2.0).log2().ceil() as i32;
            assert_eq!(q_max(&g), formula, "n = {n}");
        }
    }

    #[test]
    fn unit_mode_lives_in_block_minus_one() {
        let g = grid(16);
        let mut f = SpectralField::zeros(g);
        f.set_mode(
            [1, 0, 0],
            [
                Complex64::default(),
                Complex64::new(0.0, -0.5),
                Complex64::default(),
            ],
        );
        let d = decompose(&f);
        assert!(d.norms().l2(-1) > 0.0);
        for q in 0..=d.q_max() {
            assert_eq!(d.norms().l2(q), 0.0);
        }
    }

    #[test]
    fn radius_three_mode_splits_evenly() {
        let g = grid(16);
        let mut f = SpectralField::zeros(g);
        f.set_mode(
            [3, 0, 0],
            [
                Complex64::default(),
                Complex64::new(1.0, 0.0),
                Complex64::default(),
            ],
        );
        let d = decompose(&f);
        let b0 = d.block(0).unwrap().coeff(1, [3, 0, 0]);
        let b1 = d.block(1).unwrap().coeff(1, [3, 0, 0]);
        assert!((b0.re - 0.5).abs() < 1e-15);
        assert!((b1.re - 0.5).abs() < 1e-15);
        for q in [-1, 2, 3] {
            assert_eq!(d.norms().l2(q), 0.0);
        }
    }

    #[test]
    fn reconstruction_and_partial_sums() {
        let g = grid(32);
        let f = SpectralField::random_solenoidal(g, 3, 1.0, 10.0, 1.0).unwrap();
        let d = decompose(&f);
        let all = partial_sum(&d, d.q_max()).unwrap();
        assert!(all.sub(&f).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
        assert_eq!(partial_sum(&d, -1).unwrap(), *d.block(-1).unwrap());
        for q in -1..d.q_max() {
            let mut acc = partial_sum(&d, q).unwrap();
            for p in (q + 1)..=d.q_max() {
                acc = acc.axpy(1.0, d.block(p).unwrap()).unwrap();
            }
            assert!(acc.sub(&f).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
            // Multiplier form of the partial sum.
            let direct = f.apply_radial(|r| partial_multiplier(q, r));
            assert!(direct.sub(&partial_sum(&d, q).unwrap()).unwrap().l2_norm() <= 1e-13);
        }
        assert!(partial_sum(&d, -2).is_err());
    }

    #[test]
    fn block_support() {
        let g = grid(32);
        let f = SpectralField::random_solenoidal(g, 5, 0.0, 10.0, 1.0).unwrap();
        let d = decompose(&f);
        let radii = g.radii();
        for (q, b) in d.blocks() {
            for (idx, r) in radii.iter().enumerate() {
                let populated = (0..3).any(|c| b.component(c)[idx] != Complex64::default());
                if !populated {
                    continue;
                }
                if q < 0 {
                    assert!(*r < 2.0);
                } else {
                    assert!(*r > lambda(q) && *r < lambda(q + 2), "q={q} r={r}");
                }
            }
        }
    }

    #[test]
    fn blocks_match_convolution_oracle() {
        let g = grid(16);
        let f = SpectralField::random_solenoidal(g, 11, 1.0, 5.0, 1.0).unwrap();
        let u = to_physical(&f);
        let d = decompose(&f);
        let points = [[0, 0, 0], [3, 7, 1], [15, 2, 9], [8, 8, 8]];
        for q in 0..=2 {
            let kernel = oracle::periodized_kernel(&g, |r| block_multiplier(q, r));
            let block = to_physical(d.block(q).unwrap());
            let scale = lp_norm(&block, Exponent::Infinity);
            for p in points {
                let want = oracle::convolve_at(&kernel, &u, p);
                let idx = g.index(p[0], p[1], p[2]);
                for c in 0..3 {
                    assert!((block.component(c)[idx] - want[c]).abs() <= 1e-10 * scale);
                }
            }
        }
    }

    #[test]
    fn besov_of_low_block() {
        let g = grid(16);
        let mut f = SpectralField::zeros(g);
        f.set_mode(
            [1, 0, 0],
            [
                Complex64::default(),
                Complex64::new(0.0, -1.5),
                Complex64::default(),
            ],
        );
        let d = decompose(&f);
        let a = d.norms().linf(-1);
        assert!((a - 3.0).abs() < 1e-12);
        let b = besov_norm(&d, BesovParams::new(-1.0, Exponent::Infinity));
        assert!((b - 2.0 * a).abs() < 1e-12);
        assert_eq!(
            besov_norm(
                &decompose(&SpectralField::zeros(g)),
                BesovParams::new(-1.0, Exponent::Infinity)
            ),
            0.0
        );
        // Sobolev norm of a single |k| = 1 mode.
        let s = 0.7;
        assert!((sobolev_norm(&d, s) - lambda(-1).powf(s) * d.norms().l2(-1)).abs() < 1e-12);
    }

    #[test]
    fn besov_homogeneous_and_monotone_under_block_removal() {
        let g = grid(16);
        let f = SpectralField::random_solenoidal(g, 9, 1.0, 5.0, 2.0).unwrap();
        let n = block_norms(&f);
        let p = BesovParams::new(-0.5, Exponent::Infinity);
        let base = n.besov(p);
        let scaled = block_norms(&f.scaled(-3.0)).besov(p);
        assert!((scaled - 3.0 * base).abs() <= 1e-12 * scaled);
        for q in n.qs() {
            assert!(n.without_block(q).besov(p) <= base);
        }
    }

    #[test]
    fn sobolev_equivalences() {
        let g = grid(32);
        for seed in 0..4 {
            let f = SpectralField::random_solenoidal(g, seed, 1.0, 10.0, 1.0).unwrap();
            let d = decompose(&f);
            let r0 = sobolev_norm(&d, 0.0) / f.l2_norm();
            assert!((0.5..=2.0).contains(&r0), "s=0 ratio {r0}");
            let r1 = sobolev_norm(&d, 1.0) / f.gradient_energy().sqrt();
            assert!((0.25..=4.0).contains(&r1), "s=1 ratio {r1}");
            let m = sobolev_norm_multiplier(&f, 1.0);
            assert!((m - f.gradient_energy().sqrt()).abs() <= 1e-12 * m);
        }
    }

    #[test]
    fn bernstein_trivial_cases() {
        let g = grid(16);
        let f = SpectralField::random_solenoidal(g, 1, 1.0, 5.0, 1.0).unwrap();
        let n = block_norms(&f);
        assert_eq!(
            bernstein_constant(std::slice::from_ref(&n), Exponent::Three, Exponent::Three).unwrap(),
            1.0
        );
        assert!(
            bernstein_constant(std::slice::from_ref(&n), Exponent::Infinity, Exponent::Two)
                .is_err()
        );
        let c = bernstein_constant(std::slice::from_ref(&n), Exponent::Two, Exponent::Infinity)
            .unwrap();
        let c5 = bernstein_constant(&[n.scaled(5.0)], Exponent::Two, Exponent::Infinity).unwrap();
        assert!((c - c5).abs() <= 1e-12 * c);
        assert!(c <= kernel_bernstein_bound(&g, Exponent::Two));
    }

    #[test]
    fn embedding_bound_on_constant_magnitude_field() {
        let g = grid(16);
        let u = PhysicalField::from_fn(g, |x| [0.0, x[0].sin(), x[0].cos()]);
        let f = crate::spectral_field::to_spectral(&u);
        let lhs = block_norms(&f).besov(BesovParams::new(-1.0, Exponent::Infinity));
        let l3 = lp_norm(&u, Exponent::Three);
        assert!(lhs <= embedding_constant(&g) * l3);
    }
}
