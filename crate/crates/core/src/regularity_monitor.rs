//! Regularity criteria evaluated on a recorded snapshot sequence.
//!
//! `limsup_{q -> inf}` is approximated by the maximum over `q >= Q_tail`, and
//! left limits in time by a trailing window of snapshots. The absolute constant
//! `c` is an input; reports carry margins against the resulting thresholds
//! rather than claims of regularity. Time integrals use the trapezoid rule on
//! the snapshot grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{
    block_norms, embedding_constant, kernel_bernstein_bound, lambda, BesovParams, BlockNorms,
};
use crate::spectral_field::{lp_norm, to_physical, Exponent, GridSpec, SpectralField};

/// Relative width of the boundary band around a threshold.
pub const BOUNDARY_RESOLUTION: f64 = 1e-10;

/// Tolerance on `2/r + 3/s - 1` for the Prodi-Serrin relation.
pub const LPS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionConfig {
    pub c: f64,
    pub r: f64,
    pub q_tail: i32,
    pub jump_window: usize,
}

impl Default for CriterionConfig {
    fn default() -> Self {
        CriterionConfig {
            c: 1.0,
            r: 3.0,
            q_tail: 3,
            jump_window: 1,
        }
    }
}

impl CriterionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::param("c", format!("{} must be positive", self.c)));
        }
        check_r(self.r)?;
        if self.q_tail < -1 {
            return Err(Error::param("q_tail", format!("{} < -1", self.q_tail)));
        }
        if self.jump_window == 0 {
            return Err(Error::param("jump_window", "must be at least 1"));
        }
        Ok(())
    }
}

fn check_r(r: f64) -> Result<()> {
    if r > 2.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::param("r", format!("{r} is outside (2, inf)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Violated,
    Boundary,
}

impl Verdict {
    /// Classifies `margin = threshold - measured`.
    pub fn from_margin(threshold: f64, margin: f64) -> Self {
        if margin.abs() <= BOUNDARY_RESOLUTION * threshold.abs() {
            Verdict::Boundary
        } else if margin > 0.0 {
            Verdict::Satisfied
        } else {
            Verdict::Violated
        }
    }
}

/// Summary of one criterion at a coarser or finer approximation level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementPoint {
    pub window: usize,
    pub summary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: String,
    /// Snapshot times the rows of `matrix` and entries of `series` refer to.
    pub times: Vec<f64>,
    /// Block indices of the columns of `matrix`.
    pub qs: Vec<i32>,
    pub matrix: Vec<Vec<f64>>,
    /// Per-time scalar quantity.
    pub series: Vec<f64>,
    pub summary: f64,
    pub threshold: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub refinement: Vec<RefinementPoint>,
}

impl CriterionReport {
    fn finish(mut self) -> Self {
        self.margin = self.threshold - self.summary;
        self.verdict = Verdict::from_margin(self.threshold, self.margin);
        self
    }
}

/// Immutable snapshot sequence with cached block norms.
#[derive(Debug, Clone)]
pub struct History {
    fields: Vec<SpectralField>,
    norms: Vec<BlockNorms>,
}

impl History {
    /// Times must be strictly increasing and all fields share one grid.
    pub fn new(fields: Vec<SpectralField>) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::InsufficientHistory { needed: 1, got: 0 });
        }
        let grid = *fields[0].grid();
        for w in fields.windows(2) {
            if w[1].grid() != &grid {
                return Err(Error::GridMismatch {
                    left: grid.n(),
                    right: w[1].grid().n(),
                });
            }
            if w[1].time() <= w[0].time() {
                return Err(Error::param(
                    "history",
                    format!(
                        "times {} and {} are not increasing",
                        w[0].time(),
                        w[1].time()
                    ),
                ));
            }
        }
        let norms = fields.iter().map(block_norms).collect();
        Ok(History { fields, norms })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn grid(&self) -> &GridSpec {
        self.fields[0].grid()
    }

    /// Viscosity recorded on the first snapshot.
    pub fn nu(&self) -> f64 {
        self.fields[0].nu()
    }

    pub fn times(&self) -> Vec<f64> {
        self.fields.iter().map(|f| f.time()).collect()
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn norms(&self) -> &[BlockNorms] {
        &self.norms
    }

    pub fn q_max(&self) -> i32 {
        self.norms[0].q_max()
    }

    /// Every snapshot multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        History {
            fields: self.fields.iter().map(|f| f.scaled(alpha)).collect(),
            norms: self.norms.iter().map(|n| n.scaled(alpha)).collect(),
        }
    }

    /// Every `stride`-th snapshot, starting with the first.
    pub fn thinned(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        History {
            fields: self.fields.iter().step_by(stride).cloned().collect(),
            norms: self.norms.iter().step_by(stride).cloned().collect(),
        }
    }

    fn require(&self, needed: usize) -> Result<()> {
        if self.len() < needed {
            Err(Error::InsufficientHistory {
                needed,
                got: self.len(),
            })
        } else {
            Ok(())
        }
    }
}

fn besov_inf(s: f64) -> BesovParams {
    BesovParams::new(s, Exponent::Infinity)
}

/// `int_a^b` of piecewise-linear data by the trapezoid rule.
fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// `sup_t lambda_q^{-1} ||u_q(t)||_inf` per `q`, summarized over `q >= Q_tail`
/// against `c nu`.
pub fn criterion_tail_sup(history: &History, config: &CriterionConfig) -> Result<CriterionReport> {
    config.validate()?;
    let top = history.q_max();
    if config.q_tail > top {
        return Err(Error::EmptyTail {
            q_tail: config.q_tail,
            q_max: top,
        });
    }
    let qs: Vec<i32> = (-1..=top).collect();
    let matrix: Vec<Vec<f64>> = history
        .norms()
        .iter()
        .map(|n| qs.iter().map(|&q| n.linf(q) / lambda(q)).collect())
        .collect();
    let profile: Vec<f64> = (0..qs.len())
        .map(|j| matrix.iter().map(|row| row[j]).fold(0.0, f64::max))
        .collect();
    let summary = qs
        .iter()
        .zip(&profile)
        .filter(|(q, _)| **q >= config.q_tail)
        .map(|(_, m)| *m)
        .fold(0.0, f64::max);
    let series = matrix
        .iter()
        .map(|row| {
            qs.iter()
                .zip(row)
                .filter(|(q, _)| **q >= config.q_tail)
                .map(|(_, v)| *v)
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(CriterionReport {
        criterion: "tail_sup".into(),
        times: history.times(),
        qs,
        matrix,
        series,
        summary,
        threshold: config.c * history.nu(),
        margin: 0.0,
        verdict: Verdict::Boundary,
        refinement: Vec::new(),
    }
    .finish())
}

/// `sup_t ||u(t)||_{B^{-1}_{inf,inf}}` against `c nu`.
pub fn criterion_linfty_besov(
    history: &History,
    config: &CriterionConfig,
) -> Result<CriterionReport> {
    config.validate()?;
    let top = history.q_max();
    let qs: Vec<i32> = (-1..=top).collect();
    let matrix: Vec<Vec<f64>> = history
        .norms()
        .iter()
        .map(|n| qs.iter().map(|&q| n.linf(q) / lambda(q)).collect())
        .collect();
    let series: Vec<f64> = history
        .norms()
        .iter()
        .map(|n| n.besov(besov_inf(-1.0)))
        .collect();
    let summary = series.iter().copied().fold(0.0, f64::max);
    Ok(CriterionReport {
        criterion: "linfty_besov".into(),
        times: history.times(),
        qs,
        matrix,
        series,
        summary,
        threshold: config.c * history.nu(),
        margin: 0.0,
        verdict: Verdict::Boundary,
        refinement: Vec::new(),
    }
    .finish())
}

/// `J_i` for `i >= 1` with a trailing window of `window` snapshots.
fn jump_series(history: &History, window: usize, cache: &mut JumpCache) -> Vec<f64> {
    (1..history.len())
        .map(|i| {
            (i.saturating_sub(window)..i)
                .map(|j| cache.get(history, j, i))
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Memoized `||u(t_i) - u(t_j)||_{B^{-1}_{inf,inf}}`.
#[derive(Default)]
struct JumpCache {
    values: std::collections::HashMap<(usize, usize), f64>,
}

impl JumpCache {
    fn get(&mut self, history: &History, j: usize, i: usize) -> f64 {
        *self.values.entry((j, i)).or_insert_with(|| {
            let d = history.fields[i]
                .sub(&history.fields[j])
                .expect("history shares one grid");
            block_norms(&d).besov(besov_inf(-1.0))
        })
    }
}

/// `max_i max_{t_0 in window} ||u(t_i) - u(t_0)||_{B^{-1}_{inf,inf}}` against `c nu`,
/// with the summaries for windows 1 and 2 as the refinement series.
pub fn jump_functional(history: &History, config: &CriterionConfig) -> Result<CriterionReport> {
    config.validate()?;
    history.require(2)?;
    let mut cache = JumpCache::default();
    let series = jump_series(history, config.jump_window, &mut cache);
    let summary = series.iter().copied().fold(0.0, f64::max);
    let refinement = (1..=2)
        .map(|w| RefinementPoint {
            window: w,
            summary: jump_series(history, w, &mut cache)
                .into_iter()
                .fold(0.0, f64::max),
        })
        .collect();
    Ok(CriterionReport {
        criterion: "jump".into(),
        times: history.times()[1..].to_vec(),
        qs: Vec::new(),
        matrix: Vec::new(),
        series,
        summary,
        threshold: config.c * history.nu(),
        margin: 0.0,
        verdict: Verdict::Boundary,
        refinement,
    }
    .finish())
}

/// `nu^{r-1} c^r (r/(r-1))^{r-1}`.
pub fn threshold_a(nu: f64, c: f64, r: f64) -> Result<f64> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::param("nu", format!("{nu} must be positive")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("c", format!("{c} must be positive")));
    }
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::param("r", format!("{r} must exceed 1")));
    }
    Ok(nu.powf(r - 1.0) * c.powf(r) * (r / (r - 1.0)).powf(r - 1.0))
}

/// Trailing-window integrals of `(lambda_q^{2/r-1} ||u_q||_inf)^r` for `q >= Q_tail`.
///
/// The matrix holds the `jump_window` integrals; the summary is the maximum of
/// the one-interval integrals; the refinement series lists the summary for
/// every window length up to `jump_window`.
pub fn criterion_time_integral(
    history: &History,
    config: &CriterionConfig,
) -> Result<CriterionReport> {
    config.validate()?;
    history.require(2)?;
    let top = history.q_max();
    if config.q_tail > top {
        return Err(Error::EmptyTail {
            q_tail: config.q_tail,
            q_max: top,
        });
    }
    let r = config.r;
    let times = history.times();
    let qs: Vec<i32> = (config.q_tail..=top).collect();
    let integrand: Vec<Vec<f64>> = history
        .norms()
        .iter()
        .map(|n| {
            qs.iter()
                .map(|&q| (lambda(q).powf(2.0 / r - 1.0) * n.linf(q)).powf(r))
                .collect()
        })
        .collect();
    let window_matrix = |w: usize| -> Vec<Vec<f64>> {
        (1..history.len())
            .map(|i| {
                let lo = i.saturating_sub(w);
                (0..qs.len())
                    .map(|j| {
                        let y: Vec<f64> = integrand[lo..=i].iter().map(|row| row[j]).collect();
                        trapezoid(&times[lo..=i], &y)
                    })
                    .collect()
            })
            .collect()
    };
    let row_max = |m: &[Vec<f64>]| -> Vec<f64> {
        m.iter()
            .map(|row| row.iter().copied().fold(0.0, f64::max))
            .collect()
    };
    let shortest = row_max(&window_matrix(1));
    let summary = shortest.iter().copied().fold(0.0, f64::max);
    let refinement = (1..=config.jump_window)
        .map(|w| RefinementPoint {
            window: w,
            summary: row_max(&window_matrix(w)).into_iter().fold(0.0, f64::max),
        })
        .collect();
    let matrix = window_matrix(config.jump_window);
    Ok(CriterionReport {
        criterion: "time_integral".into(),
        times: times[1..].to_vec(),
        qs,
        matrix,
        series: shortest,
        summary,
        threshold: threshold_a(history.nu(), config.c, r)?,
        margin: 0.0,
        verdict: Verdict::Boundary,
        refinement,
    }
    .finish())
}

/// `||u(t)||_{B^{2/r-1}_{inf,inf}}` per snapshot.
pub fn besov_series(history: &History, r: f64) -> Result<Vec<f64>> {
    check_r(r)?;
    Ok(history
        .norms()
        .iter()
        .map(|n| n.besov(besov_inf(2.0 / r - 1.0)))
        .collect())
}

/// `int ||u(t)||^r_{B^{2/r-1}_{inf,inf}} dt` over the recorded span.
pub fn criterion_lr_besov(history: &History, r: f64) -> Result<f64> {
    let y: Vec<f64> = besov_series(history, r)?
        .into_iter()
        .map(|b| b.powf(r))
        .collect();
    Ok(trapezoid(&history.times(), &y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpsStatus {
    Satisfied,
    Violated,
    /// On the line `2/r + 3/s = 1` but at the excluded endpoint `s = 3`.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpsRelation {
    pub slack: f64,
    pub status: LpsStatus,
}

/// Checks `2/r + 3/s = 1` with `s` in `(3, inf]`; either exponent may be infinite.
pub fn lps_relation(r: f64, s: f64) -> Result<LpsRelation> {
    if !(r > 0.0) || !(s > 0.0) {
        return Err(Error::param("r, s", format!("({r}, {s}) must be positive")));
    }
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    let slack = 2.0 * inv(r) + 3.0 * inv(s) - 1.0;
    let on_line = slack.abs() <= LPS_TOLERANCE;
    let status = if on_line && s > 3.0 {
        LpsStatus::Satisfied
    } else if on_line {
        LpsStatus::Boundary
    } else {
        LpsStatus::Violated
    };
    Ok(LpsRelation { slack, status })
}

/// Measured ratios along the Besov / Lebesgue embedding chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingChainReport {
    pub s: f64,
    pub r: f64,
    /// `||u||_{B^{2/r-1}_{inf,inf}} / ||u||_{B^{3/s+2/r-1}_{s,inf}}` per field.
    pub besov_ratios: Vec<f64>,
    /// `||u||_{B^0_{s,inf}} / ||u||_{L^s}` per field.
    pub lebesgue_ratios: Vec<f64>,
    /// `||u||_{B^{-1}_{inf,inf}} / ||u||_{L^3}` per field.
    pub critical_ratios: Vec<f64>,
    pub max_besov_ratio: f64,
    pub max_lebesgue_ratio: f64,
    pub max_critical_ratio: f64,
    /// Kernel-norm Bernstein bound for `(s, inf)`, an upper bound on `besov_ratios`.
    pub bernstein_bound: f64,
    /// Kernel-norm constant `C_emb`, an upper bound on `critical_ratios`.
    pub embedding_bound: f64,
}

/// Evaluates the chain on every nonzero field of the battery; zero fields are skipped.
pub fn embedding_chain_report(
    battery: &[SpectralField],
    s: Exponent,
    r: f64,
) -> Result<EmbeddingChainReport> {
    check_r(r)?;
    if s == Exponent::Infinity {
        return Err(Error::param("s", "must be finite"));
    }
    let Some(first) = battery.first() else {
        return Err(Error::param("battery", "empty"));
    };
    let grid = *first.grid();
    let sv = s.value();
    let (mut besov_ratios, mut lebesgue_ratios, mut critical_ratios) =
        (Vec::new(), Vec::new(), Vec::new());
    for f in battery {
        f.grid().ensure_same(&grid)?;
        let norms = block_norms(f);
        let phys = to_physical(f);
        let ls = lp_norm(&phys, s);
        if ls == 0.0 {
            continue;
        }
        let top = norms.besov(besov_inf(2.0 / r - 1.0));
        let bottom = norms.besov(BesovParams::new(3.0 / sv + 2.0 / r - 1.0, s));
        besov_ratios.push(top / bottom);
        lebesgue_ratios.push(norms.besov(BesovParams::new(0.0, s)) / ls);
        critical_ratios.push(norms.besov(besov_inf(-1.0)) / lp_norm(&phys, Exponent::Three));
    }
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(EmbeddingChainReport {
        s: sv,
        r,
        max_besov_ratio: max(&besov_ratios),
        max_lebesgue_ratio: max(&lebesgue_ratios),
        max_critical_ratio: max(&critical_ratios),
        besov_ratios,
        lebesgue_ratios,
        critical_ratios,
        bernstein_bound: kernel_bernstein_bound(&grid, s),
        embedding_bound: embedding_constant(&grid),
    })
}
