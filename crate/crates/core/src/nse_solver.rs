//! Unforced incompressible Navier-Stokes on the 3-torus.
//!
//! Time stepping is classical RK4 in integrating-factor variables
//! `v(k, t) = e^{nu |k|^2 t} u_hat(k, t)`, so viscous decay is exact and only
//! the projected, dealiased advection term `-P[div(u (x) u)]` is integrated
//! numerically. Pressure is never formed.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_field::{
    lp_norm, physical_components, physical_components_with, product_from_samples, to_physical,
    Exponent, GridSpec, SpectralField,
};

/// Relative slack when checking that `t_end` and the snapshot interval are
/// whole multiples of `dt`.
const STEP_MULTIPLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `A (sin x1 cos x2 cos x3, -cos x1 sin x2 cos x3, 0)`.
    TaylorGreen { amplitude: f64 },
    /// Gaussian coefficients on `k_min <= |k| <= k_max`, projected and
    /// rescaled to `||u||_2^2 = energy`.
    RandomBandLimited {
        seed: u64,
        k_min: f64,
        k_max: f64,
        energy: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub grid: GridSpec,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_interval: f64,
    pub initial_condition: InitialCondition,
}

fn whole_multiple(total: f64, unit: f64) -> Option<usize> {
    let ratio = total / unit;
    let rounded = ratio.round();
    ((ratio - rounded).abs() <= STEP_MULTIPLE_TOL * ratio.max(1.0)).then_some(rounded as usize)
}

impl SolverConfig {
    /// Checks ranges and step arithmetic; the CFL bound needs the initial
    /// field and is checked by [`SolverConfig::check_cfl`].
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} = {v} must be positive and finite"
                )))
            }
        };
        positive("nu", self.nu)?;
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        positive("snapshot_interval", self.snapshot_interval)?;
        if self.snapshot_interval > self.t_end * (1.0 + STEP_MULTIPLE_TOL) {
            return Err(Error::Config(format!(
                "snapshot_interval = {} exceeds t_end = {}",
                self.snapshot_interval, self.t_end
            )));
        }
        self.total_steps()?;
        self.steps_per_snapshot()?;
        Ok(())
    }

    pub fn total_steps(&self) -> Result<usize> {
        whole_multiple(self.t_end, self.dt).ok_or_else(|| {
            Error::Config(format!(
                "t_end = {} is not a whole number of dt = {}",
                self.t_end, self.dt
            ))
        })
    }

    pub fn steps_per_snapshot(&self) -> Result<usize> {
        whole_multiple(self.snapshot_interval, self.dt)
            .filter(|&s| s > 0)
            .ok_or_else(|| {
                Error::Config(format!(
                    "snapshot_interval = {} is not a whole number of dt = {}",
                    self.snapshot_interval, self.dt
                ))
            })
    }

    /// `floor(t_end / snapshot_interval) + 1`.
    pub fn snapshot_count(&self) -> Result<usize> {
        Ok(self.total_steps()? / self.steps_per_snapshot()? + 1)
    }

    /// Advective limit `0.5 dx / ||u0||_inf`.
    pub fn cfl_limit(&self, u0: &SpectralField) -> f64 {
        let umax = lp_norm(&to_physical(u0), Exponent::Infinity);
        if umax == 0.0 {
            f64::INFINITY
        } else {
            0.5 * self.grid.spacing() / umax
        }
    }

    pub fn check_cfl(&self, u0: &SpectralField) -> Result<()> {
        let limit = self.cfl_limit(u0);
        if self.dt > limit {
            return Err(Error::NumericalAbort {
                step: 0,
                time: 0.0,
                detail: format!(
                    "dt = {} exceeds the advective CFL bound {limit:.6}",
                    self.dt
                ),
            });
        }
        Ok(())
    }
}

/// Initial velocity of the run, stamped with `t = 0` and the run's viscosity.
pub fn initial_field(config: &SolverConfig) -> Result<SpectralField> {
    let grid = config.grid;
    let field = match config.initial_condition {
        InitialCondition::TaylorGreen { amplitude } => taylor_green(grid, amplitude),
        InitialCondition::RandomBandLimited {
            seed,
            k_min,
            k_max,
            energy,
        } => SpectralField::random_solenoidal(grid, seed, k_min, k_max, energy)?,
    };
    Ok(field.with_time(0.0).with_nu(config.nu))
}

/// Taylor-Green vortex built directly from its eight Fourier modes.
pub fn taylor_green(grid: GridSpec, amplitude: f64) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    let c = amplitude / 8.0;
    for s0 in [-1i64, 1] {
        for s1 in [-1i64, 1] {
            for s2 in [-1i64, 1] {
                let idx = grid.index_of([s0, s1, s2]);
                // sin(s x) = s (e^{ix} - e^{-ix}) / 2i contributes -i s / 2 at +-1.
                f.coeffs_mut()[0][idx] = Complex64::new(0.0, -c * s0 as f64);
                f.coeffs_mut()[1][idx] = Complex64::new(0.0, c * s1 as f64);
            }
        }
    }
    f
}

/// `||u(t)||_2^2` and `2 nu int_0^t ||grad u||_2^2 ds` on the step grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub dissipation_integral: Vec<f64>,
    #[serde(skip)]
    last_rate: f64,
}

impl EnergyLedger {
    fn record(&mut self, time: f64, u: &SpectralField, nu: f64) {
        let rate = 2.0 * nu * u.gradient_energy();
        let integral = match (self.times.last(), self.dissipation_integral.last()) {
            (Some(t0), Some(d0)) => d0 + 0.5 * (time - t0) * (rate + self.last_rate),
            _ => 0.0,
        };
        self.times.push(time);
        self.kinetic.push(u.energy());
        self.dissipation_integral.push(integral);
        self.last_rate = rate;
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `E(t) + D(t) - E(0)` at every recorded time.
    pub fn residuals(&self) -> Vec<f64> {
        let e0 = self.kinetic.first().copied().unwrap_or(0.0);
        self.kinetic
            .iter()
            .zip(&self.dissipation_integral)
            .map(|(e, d)| e + d - e0)
            .collect()
    }

    /// Largest `|E(t) + 2 nu int_{t0}^t ||grad u||^2 - E(t0)|` over all pairs
    /// of recorded times, relative to `E(0)`.
    pub fn worst_pair_residual(&self) -> f64 {
        let r = self.residuals();
        let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
        let e0 = self.kinetic.first().copied().unwrap_or(0.0);
        if r.is_empty() || e0 == 0.0 {
            0.0
        } else {
            (hi - lo) / e0
        }
    }

    /// True if kinetic energy never rises by more than `rel_tol * E(0)`.
    pub fn kinetic_non_increasing(&self, rel_tol: f64) -> bool {
        let e0 = self.kinetic.first().copied().unwrap_or(0.0);
        self.kinetic.windows(2).all(|w| w[1] <= w[0] + rel_tol * e0)
    }
}

/// Reusable RK4 integrating-factor stepper for one grid, viscosity and `dt`.
pub struct Stepper {
    grid: GridSpec,
    nu: f64,
    dt: f64,
    k_deriv: Vec<f64>,
    keep: Vec<bool>,
    decay_half: Vec<f64>,
    decay_full: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: GridSpec, nu: f64, dt: f64) -> Self {
        let n = grid.n();
        let k_deriv: Vec<f64> = (0..n).map(|i| grid.derivative_wavenumber(i)).collect();
        let mut decay_half = Vec::with_capacity(grid.len());
        let mut decay_full = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let [a, b, c] = grid.unindex(idx);
            let k2 = k_deriv[a].powi(2) + k_deriv[b].powi(2) + k_deriv[c].powi(2);
            decay_half.push((-nu * k2 * 0.5 * dt).exp());
            decay_full.push((-nu * k2 * dt).exp());
        }
        Stepper {
            grid,
            nu,
            dt,
            k_deriv,
            keep: grid.retained_mask(),
            decay_half,
            decay_full,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `-P[div(u (x) u)]` with a dealiased product.
    pub fn nonlinear(&self, u: &SpectralField) -> SpectralField {
        let g = &self.grid;
        let samples = if u.is_band_limited() {
            physical_components_with(u, Some(&self.keep))
        } else {
            physical_components(&u.truncated())
        };
        let t = product_from_samples(g, &samples, &samples, true);
        let n = g.n();
        let kd = &self.k_deriv;
        let mut out = SpectralField::zeros(*g);
        let mut idx = 0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let k = [kd[a], kd[b], kd[c]];
                    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                    if k2 != 0.0 {
                        // i k_j T_ji, then remove the component along k.
                        let mut v = [Complex64::default(); 3];
                        for (i, slot) in v.iter_mut().enumerate() {
                            let s = k[0] * t.get(0, i)[idx]
                                + k[1] * t.get(1, i)[idx]
                                + k[2] * t.get(2, i)[idx];
                            *slot = Complex64::new(s.im, -s.re);
                        }
                        let kv = (v[0] * k[0] + v[1] * k[1] + v[2] * k[2]) / k2;
                        for i in 0..3 {
                            out.coeffs_mut()[i][idx] = v[i] - kv * k[i];
                        }
                    }
                    idx += 1;
                }
            }
        }
        out
    }

    /// One RK4 step in integrating-factor form.
    pub fn step(&self, u: &SpectralField) -> SpectralField {
        let h = self.dt;
        let combine = |base: &SpectralField,
                       decay: &[f64],
                       incr: &SpectralField,
                       scale: f64,
                       incr_decay: Option<&[f64]>| {
            let mut out = base.clone();
            for c in 0..3 {
                let o = &mut out.coeffs_mut()[c];
                let x = incr.component(c);
                for idx in 0..o.len() {
                    let inc = match incr_decay {
                        Some(d) => d[idx] * x[idx],
                        None => x[idx],
                    };
                    o[idx] = decay[idx] * o[idx] + scale * inc;
                }
            }
            out
        };
        let ones_like = |f: &SpectralField, decay: &[f64]| {
            let mut out = f.clone();
            for c in 0..3 {
                for (v, d) in out.coeffs_mut()[c].iter_mut().zip(decay) {
                    *v *= d;
                }
            }
            out
        };

        let a = self.nonlinear(u);
        // u2 = E(h/2) (u + h/2 a)
        let u2 = ones_like(&u.axpy(0.5 * h, &a).expect("same grid"), &self.decay_half);
        let b = self.nonlinear(&u2);
        // u3 = E(h/2) u + h/2 b
        let u3 = combine(u, &self.decay_half, &b, 0.5 * h, None);
        let c = self.nonlinear(&u3);
        // u4 = E(h) u + h E(h/2) c
        let u4 = combine(u, &self.decay_full, &c, h, Some(&self.decay_half));
        let d = self.nonlinear(&u4);

        let mut out = u.clone();
        for comp in 0..3 {
            let o = &mut out.coeffs_mut()[comp];
            let (ac, bc, cc, dc) = (
                a.component(comp),
                b.component(comp),
                c.component(comp),
                d.component(comp),
            );
            for idx in 0..o.len() {
                let ef = self.decay_full[idx];
                let eh = self.decay_half[idx];
                o[idx] = ef * o[idx]
                    + (h / 6.0) * (ef * ac[idx] + 2.0 * eh * (bc[idx] + cc[idx]) + dc[idx]);
            }
        }
        out.set_time(u.time() + h);
        out.with_nu(self.nu)
    }
}

fn non_finite(u: &SpectralField) -> bool {
    !u.energy().is_finite()
}

/// Single step of size `dt` using the viscosity stored on `u`.
pub fn step(u: &SpectralField, dt: f64) -> Result<SpectralField> {
    let next = Stepper::new(*u.grid(), u.nu(), dt).step(u);
    if non_finite(&next) {
        return Err(Error::NumericalAbort {
            step: 1,
            time: u.time() + dt,
            detail: "non-finite coefficients (CFL violation?)".into(),
        });
    }
    Ok(next)
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub snapshots: Vec<SpectralField>,
    pub ledger: EnergyLedger,
}

/// Integrates the configured run, handing each snapshot to `on_snapshot`.
pub fn run_with(
    config: &SolverConfig,
    mut on_snapshot: impl FnMut(usize, &SpectralField) -> Result<()>,
) -> Result<EnergyLedger> {
    config.validate()?;
    let u0 = initial_field(config)?;
    config.check_cfl(&u0)?;
    let steps = config.total_steps()?;
    let every = config.steps_per_snapshot()?;
    let stepper = Stepper::new(config.grid, config.nu, config.dt);

    let mut ledger = EnergyLedger::default();
    ledger.record(0.0, &u0, config.nu);
    on_snapshot(0, &u0)?;
    let mut u = u0;
    for s in 1..=steps {
        u = stepper.step(&u);
        let t = s as f64 * config.dt;
        u.set_time(t);
        if non_finite(&u) {
            return Err(Error::NumericalAbort {
                step: s,
                time: t,
                detail: "non-finite coefficients (CFL violation?)".into(),
            });
        }
        ledger.record(t, &u, config.nu);
        if s % every == 0 {
            on_snapshot(s / every, &u)?;
        }
        log::debug!("step {s}/{steps} t = {t:.6} E = {:.12e}", ledger.kinetic[s]);
    }
    Ok(ledger)
}

/// Integrates the configured run and keeps every snapshot in memory.
pub fn run(config: &SolverConfig) -> Result<RunOutput> {
    let mut snapshots = Vec::new();
    let ledger = run_with(config, |_, u| {
        snapshots.push(u.clone());
        Ok(())
    })?;
    Ok(RunOutput { snapshots, ledger })
}

/// `||u0||_2^2` of the unit Taylor-Green vortex: `2 pi^3`.
pub const TAYLOR_GREEN_UNIT_ENERGY: f64 = 2.0 * PI * PI * PI;
