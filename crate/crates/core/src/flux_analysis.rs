//! Frequency-localized nonlinear flux and the weighted block sums that
//! bound it.
//!
//! Trace convention: `tr[A . B] = sum_ij A_ij B_ji` with `(grad u)_ij = d_i u_j`.
//! All products are dealiased. Every flux integral pairs a product with a
//! band-limited gradient, so truncating the product does not change it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{
    block_multiplier, decompose, lambda, partial_multiplier, BlockDecomposition, BlockNorms,
};
use crate::spectral_field::{dealiased_product, gradient, SpectralField, SpectralTensor};

/// Default smoothness offset `eps`.
pub const DEFAULT_EPS: f64 = 0.5;

/// Multiple of machine epsilon used as the denominator floor of relative residuals.
const FLOOR_ULPS: f64 = 64.0;

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::param("eps", format!("{eps} is outside (0, 1)")))
    }
}

fn check_big_q(big_q: i32) -> Result<()> {
    if big_q >= 0 {
        Ok(())
    } else {
        Err(Error::param("Q", format!("{big_q} < 0")))
    }
}

fn check_block(q: i32, min: i32) -> Result<()> {
    if q >= min {
        Ok(())
    } else {
        Err(Error::param("q", format!("{q} < {min}")))
    }
}

/// Cached pieces shared by the per-block computations on one field.
struct FluxContext<'a> {
    u: &'a SpectralField,
    uu: SpectralTensor,
    radii: Vec<f64>,
}

impl<'a> FluxContext<'a> {
    fn new(u: &'a SpectralField) -> Self {
        let uu = dealiased_product(u, u).expect("same field");
        FluxContext {
            u,
            uu,
            radii: u.grid().radii(),
        }
    }

    fn block(&self, q: i32) -> SpectralField {
        self.u
            .apply_radial_with(&self.radii, |r| block_multiplier(q, r))
    }

    fn uu_block(&self, q: i32) -> SpectralTensor {
        self.uu
            .apply_radial_with(&self.radii, |r| block_multiplier(q, r))
    }

    /// `(u (x) u)_q - u_q (x) u - u (x) u_q`.
    fn commutator(&self, uq: &SpectralField, q: i32) -> SpectralTensor {
        let left = dealiased_product(uq, self.u).expect("same grid");
        self.uu_block(q)
            .axpy(-1.0, &left)
            .and_then(|t| t.axpy(-1.0, &left.transpose()))
            .expect("same grid")
    }

    fn flux(&self, q: i32) -> f64 {
        let grad = gradient(&self.block(q));
        self.uu_block(q).trace_pairing(&grad)
    }

    /// Cauchy-Schwarz scale `||(u (x) u)_q||_2 ||grad u_q||_2` of the flux integrals.
    fn scale(&self, q: i32, grad_q: &SpectralTensor) -> f64 {
        (self.uu_block(q).energy() * grad_q.energy()).sqrt()
    }

    fn identity_residual(&self, q: i32, cutoff: i32) -> f64 {
        let uq = self.block(q);
        let grad_q = gradient(&uq);
        let lhs = self.uu_block(q).trace_pairing(&grad_q);
        let rq = self.commutator(&uq, q);
        let low = self
            .u
            .apply_radial_with(&self.radii, |r| partial_multiplier(cutoff, r));
        let qq = dealiased_product(&uq, &uq).expect("same grid");
        let rhs = rq.trace_pairing(&grad_q) - qq.trace_pairing(&gradient(&low));
        let floor = FLOOR_ULPS * f64::EPSILON * self.scale(q, &grad_q);
        let denom = lhs.abs() + rhs.abs() + floor;
        if denom == 0.0 {
            0.0
        } else {
            (lhs - rhs).abs() / denom
        }
    }

    /// `|int tr[(u_q (x) u) . grad u_q]|` relative to its Cauchy-Schwarz scale;
    /// the term vanishes for divergence-free `u`.
    fn transport_residual(&self, q: i32) -> f64 {
        let uq = self.block(q);
        let grad_q = gradient(&uq);
        let left = dealiased_product(&uq, self.u).expect("same grid");
        let t = left.trace_pairing(&grad_q);
        let scale = (left.energy() * grad_q.energy()).sqrt();
        if scale == 0.0 {
            0.0
        } else {
            t.abs() / scale
        }
    }
}

/// Commutator remainder `r_q(u, u) = (u (x) u)_q - u_q (x) u - u (x) u_q` for `q >= 0`.
pub fn commutator(u: &SpectralField, q: i32) -> Result<SpectralTensor> {
    check_block(q, 0)?;
    let ctx = FluxContext::new(u);
    Ok(ctx.commutator(&ctx.block(q), q))
}

/// `Pi_q = int tr[(u (x) u)_q . grad u_q] dx`.
pub fn localized_flux(u: &SpectralField, q: i32) -> Result<f64> {
    check_block(q, -1)?;
    Ok(FluxContext::new(u).flux(q))
}

/// `Pi_q` for `q = -1 ..= q_max`.
pub fn localized_flux_profile(u: &SpectralField) -> Vec<f64> {
    let ctx = FluxContext::new(u);
    let top = crate::littlewood_paley::q_max(u.grid());
    (-1..=top).map(|q| ctx.flux(q)).collect()
}

/// `sum_q int tr[(u (x) u)_q . grad u] dx`, which telescopes to
/// `int tr[(u (x) u) . grad u] dx = 0` for divergence-free `u`, paired with
/// `sum_q |.|` of the same terms.
pub fn one_sided_flux_sum(u: &SpectralField) -> (f64, f64) {
    let ctx = FluxContext::new(u);
    let grad = gradient(u);
    let top = crate::littlewood_paley::q_max(u.grid());
    let terms: Vec<f64> = (-1..=top)
        .map(|q| ctx.uu_block(q).trace_pairing(&grad))
        .collect();
    (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
}

/// Relative mismatch of
/// `int tr[(u (x) u)_q . grad u_q] = int tr[r_q . grad u_q] - int u_q . grad u_{<=cutoff} . u_q`.
pub fn flux_identity_residual(u: &SpectralField, q: i32, cutoff: i32) -> Result<f64> {
    check_block(q, 0)?;
    check_block(cutoff, -1)?;
    Ok(FluxContext::new(u).identity_residual(q, cutoff))
}

/// The three weighted block sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxTerms {
    pub i: f64,
    pub ii: f64,
    pub iii: f64,
}

impl FluxTerms {
    pub fn total(&self) -> f64 {
        self.i + self.ii + self.iii
    }
}

/// `I`, `II`, `III` summed over `Q <= q <= q_max`, via prefix and suffix sums.
pub fn terms_i_ii_iii(norms: &BlockNorms, big_q: i32, eps: f64) -> Result<FluxTerms> {
    check_eps(eps)?;
    check_big_q(big_q)?;
    let top = norms.q_max();
    let qs: Vec<i32> = norms.qs().collect();
    let a: Vec<f64> = qs.iter().map(|&q| norms.l3(q)).collect();
    let len = a.len();

    // low2[i] = sum_{p <= q_i} lambda_p^2 a_p^2, low1[i] = sum_{p <= q_i} lambda_p a_p
    let mut low2 = vec![0.0; len];
    let mut low1 = vec![0.0; len];
    let (mut s2, mut s1) = (0.0, 0.0);
    for i in 0..len {
        s2 += lambda(qs[i]).powi(2) * a[i].powi(2);
        s1 += lambda(qs[i]) * a[i];
        low2[i] = s2;
        low1[i] = s1;
    }
    // high[i] = sum_{p > q_i} a_p^2
    let mut high = vec![0.0; len];
    let mut s = 0.0;
    for i in (0..len).rev() {
        high[i] = s;
        s += a[i].powi(2);
    }

    let mut t = FluxTerms {
        i: 0.0,
        ii: 0.0,
        iii: 0.0,
    };
    for (i, &q) in qs.iter().enumerate() {
        if q < big_q {
            continue;
        }
        let lq = lambda(q);
        t.i += lq.powf(eps) * a[i] * low2[i];
        t.ii += lq.powf(2.0 + eps) * a[i] * high[i];
        let upto = if q < top { low1[i + 1] } else { low1[i] };
        t.iii += lq.powf(1.0 + eps) * a[i].powi(2) * upto;
    }
    Ok(t)
}

/// `sum_{q >= Q} lambda_q^{2+eps} ||u_q||_3^3`.
pub fn tail_cubic_sum(norms: &BlockNorms, big_q: i32, eps: f64) -> f64 {
    norms
        .qs()
        .filter(|&q| q >= big_q)
        .map(|q| lambda(q).powf(2.0 + eps) * norms.l3(q).powi(3))
        .sum()
}

/// `R(Q) = sup_t sum_{q=-1}^{Q-1} lambda_q^{2+eps} ||u_q(t)||_3^3` over the recorded history.
pub fn remainder_r(history: &[BlockNorms], big_q: i32, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    check_big_q(big_q)?;
    if history.is_empty() {
        return Err(Error::InsufficientHistory { needed: 1, got: 0 });
    }
    Ok(history
        .iter()
        .map(|norms| {
            norms
                .qs()
                .filter(|&q| q < big_q)
                .map(|q| lambda(q).powf(2.0 + eps) * norms.l3(q).powi(3))
                .sum::<f64>()
        })
        .fold(0.0, f64::max))
}

/// `(I + II + III) / (sum_{q >= Q} lambda_q^{2+eps} ||u_q||_3^3 + R(Q))`, zero when
/// the denominator vanishes.
pub fn inequality_iii_ratio(
    norms: &BlockNorms,
    history: &[BlockNorms],
    big_q: i32,
    eps: f64,
) -> Result<f64> {
    let terms = terms_i_ii_iii(norms, big_q, eps)?;
    let denom = tail_cubic_sum(norms, big_q, eps) + remainder_r(history, big_q, eps)?;
    Ok(if denom > 0.0 {
        terms.total() / denom
    } else {
        0.0
    })
}

/// Hoelder slack `||u_q||_2^2 ||u_q||_inf - ||u_q||_3^3` at the worst block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationSlack {
    /// Block attaining the smallest scaled slack.
    pub q: i32,
    pub slack: f64,
    /// `slack / (||u_q||_2^2 ||u_q||_inf)`, zero for empty blocks.
    pub scaled: f64,
}

pub fn interpolation_check(norms: &BlockNorms) -> InterpolationSlack {
    let mut worst = InterpolationSlack {
        q: -1,
        slack: 0.0,
        scaled: f64::INFINITY,
    };
    for q in norms.qs() {
        let bound = norms.l2(q).powi(2) * norms.linf(q);
        let slack = bound - norms.l3(q).powi(3);
        let scaled = if bound > 0.0 { slack / bound } else { 0.0 };
        if scaled < worst.scaled {
            worst = InterpolationSlack { q, slack, scaled };
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrilinearRow {
    pub q: i32,
    pub measured: f64,
    /// `sum_p lambda_{|q-p|}^{-2/3} lambda_p ||u_p||_3^3`.
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrilinearBoundReport {
    pub rows: Vec<TrilinearRow>,
    /// Largest ratio, the measured `C_1`.
    pub c1: f64,
}

/// Measured `|Pi_q|` against the nearest-shell bound with `C_1 = 1`. Blocks
/// with a zero bound are omitted.
pub fn trilinear_bound_report(d: &BlockDecomposition) -> TrilinearBoundReport {
    let ctx = FluxContext::new(d.source());
    let norms = d.norms();
    let mut rows = Vec::new();
    for q in norms.qs() {
        let bound: f64 = norms
            .qs()
            .map(|p| lambda((q - p).abs()).powf(-2.0 / 3.0) * lambda(p) * norms.l3(p).powi(3))
            .sum();
        if bound <= 0.0 {
            continue;
        }
        let measured = ctx.flux(q).abs();
        rows.push(TrilinearRow {
            q,
            measured,
            bound,
            ratio: measured / bound,
        });
    }
    let c1 = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    TrilinearBoundReport { rows, c1 }
}

/// Parameters of a [`FluxReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxConfig {
    pub eps: f64,
    pub big_q: i32,
    /// Inclusive block range of the per-q rows; clipped to `-1 ..= q_max`.
    pub q_range: Option<(i32, i32)>,
}

impl Default for FluxConfig {
    fn default() -> Self {
        FluxConfig {
            eps: DEFAULT_EPS,
            big_q: 2,
            q_range: None,
        }
    }
}

impl FluxConfig {
    pub fn validate(&self) -> Result<()> {
        check_eps(self.eps)?;
        check_big_q(self.big_q)?;
        if let Some((lo, hi)) = self.q_range {
            if lo < -1 || hi < lo {
                return Err(Error::param(
                    "q_range",
                    format!("[{lo}, {hi}] is empty or below -1"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxRow {
    pub q: i32,
    pub pi: f64,
    /// Relative transport term; `None` for `q = -1`.
    pub commutator_residual: Option<f64>,
    /// Identity residual with cutoff `q + 2`; `None` for `q = -1`.
    pub identity_residual: Option<f64>,
    /// Identity residual with cutoff `q + 1`; `None` for `q = -1`.
    pub identity_residual_q1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub time: f64,
    pub eps: f64,
    pub big_q: i32,
    pub rows: Vec<FluxRow>,
    pub terms: FluxTerms,
    pub remainder: f64,
    pub ratio_iii: f64,
    /// `sum_q Pi_q` and `sum_q |Pi_q|` over every block, not just the rows.
    pub total_flux: f64,
    pub total_abs_flux: f64,
}

/// Full flux analysis of one snapshot; `history` supplies `R(Q)` and should
/// contain this snapshot's norms.
pub fn flux_report(
    u: &SpectralField,
    history: &[BlockNorms],
    config: &FluxConfig,
) -> Result<FluxReport> {
    config.validate()?;
    let d = decompose(u);
    let norms = d.norms();
    let ctx = FluxContext::new(u);
    let top = d.q_max();
    let (lo, hi) = config.q_range.unwrap_or((-1, top));
    let pis: Vec<f64> = (-1..=top).map(|q| ctx.flux(q)).collect();
    let rows = (lo.max(-1)..=hi.min(top))
        .map(|q| {
            let pi = pis[(q + 1) as usize];
            if q < 0 {
                return FluxRow {
                    q,
                    pi,
                    commutator_residual: None,
                    identity_residual: None,
                    identity_residual_q1: None,
                };
            }
            FluxRow {
                q,
                pi,
                commutator_residual: Some(ctx.transport_residual(q)),
                identity_residual: Some(ctx.identity_residual(q, q + 2)),
                identity_residual_q1: Some(ctx.identity_residual(q, q + 1)),
            }
        })
        .collect();
    let terms = terms_i_ii_iii(norms, config.big_q, config.eps)?;
    let remainder = remainder_r(history, config.big_q, config.eps)?;
    let denom = tail_cubic_sum(norms, config.big_q, config.eps) + remainder;
    Ok(FluxReport {
        time: u.time(),
        eps: config.eps,
        big_q: config.big_q,
        rows,
        terms,
        remainder,
        ratio_iii: if denom > 0.0 {
            terms.total() / denom
        } else {
            0.0
        },
        total_flux: pis.iter().sum(),
        total_abs_flux: pis.iter().map(|p| p.abs()).sum(),
    })
}
