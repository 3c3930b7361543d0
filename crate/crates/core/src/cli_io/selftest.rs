//! Oracle-equivalence checks of the production routines at small `n`.

use serde::{Deserialize, Serialize};

use super::snapshot::scaled_divergence;
use crate::flux_analysis::{
    commutator, flux_identity_residual, interpolation_check, terms_i_ii_iii,
};
use crate::littlewood_paley::{block_multiplier, chi, decompose, lambda, phi, BlockNorms};
use crate::oracle;
use crate::spectral_field::{
    dealiased_product, leray_project, lp_norm, to_physical, to_spectral, Exponent, GridSpec,
    SpectralField,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCheck {
    pub name: String,
    pub n: usize,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SelfCheck {
    fn new(name: &str, n: usize, measured: f64, tolerance: f64) -> Self {
        SelfCheck {
            name: name.to_string(),
            n,
            measured,
            tolerance,
            passed: measured.is_finite() && measured <= tolerance,
        }
    }
}

impl std::fmt::Display for SelfCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<24} n={:<3} measured={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.n,
            self.measured,
            self.tolerance
        )
    }
}

const PROBE_POINTS: [[usize; 3]; 4] = [[0, 0, 0], [1, 5, 3], [7, 2, 6], [4, 4, 1]];

fn field(n: usize, seed: u64, band: f64) -> SpectralField {
    let g = GridSpec::new(n).expect("valid self-test grid");
    SpectralField::random_solenoidal(g, seed, 1.0, band, 1.0).expect("non-empty shell")
}

fn rel(diff: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn synthesis(n: usize) -> SelfCheck {
    let u = field(n, 1, GridSpec::new(n).unwrap().dealias_cutoff());
    let phys = to_physical(&u);
    let g = *u.grid();
    let points: Vec<[usize; 3]> = (0..g.len()).map(|i| g.unindex(i)).collect();
    let direct = oracle::direct_synthesis_at(&u, &points);
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for (idx, d) in direct.iter().enumerate() {
        for c in 0..3 {
            diff = diff.max((d[c] - phys.component(c)[idx]).abs());
            scale = scale.max(d[c].abs());
        }
    }
    SelfCheck::new("dft_synthesis", n, rel(diff, scale), 1e-10)
}

fn analysis(n: usize) -> SelfCheck {
    let u = field(n, 2, GridSpec::new(n).unwrap().dealias_cutoff());
    let phys = to_physical(&u);
    let fast = to_spectral(&phys);
    let direct = oracle::direct_analysis(&phys);
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for c in 0..3 {
        for (a, b) in fast.component(c).iter().zip(&direct[c]) {
            diff = diff.max((a - b).norm());
            scale = scale.max(b.norm());
        }
    }
    SelfCheck::new("dft_analysis", n, rel(diff, scale), 1e-10)
}

fn block_convolution(n: usize) -> SelfCheck {
    let u = field(n, 3, GridSpec::new(n).unwrap().dealias_cutoff());
    let g = *u.grid();
    let phys = to_physical(&u);
    let d = decompose(&u);
    // Blocks outside the retained band are zero, so measure against the field.
    let scale = lp_norm(&phys, Exponent::Infinity);
    let mut diff = 0.0f64;
    for q in 0..=3.min(d.q_max()) {
        let block = to_physical(d.block(q).unwrap());
        let kernel = oracle::periodized_kernel(&g, |r| block_multiplier(q, r));
        for p in PROBE_POINTS {
            let direct = oracle::convolve_at(&kernel, &phys, p);
            let idx = g.index(p[0], p[1], p[2]);
            for c in 0..3 {
                diff = diff.max((direct[c] - block.component(c)[idx]).abs());
            }
        }
    }
    let worst = rel(diff, scale);
    SelfCheck::new("block_convolution", n, worst, 1e-8)
}

fn commutator_integral(n: usize) -> SelfCheck {
    // Band |k| <= cut/2 keeps pointwise lattice products alias-free.
    let g = GridSpec::new(n).unwrap();
    let u = field(n, 4, g.dealias_cutoff() / 2.0);
    let phys = to_physical(&u);
    let sup = lp_norm(&phys, Exponent::Infinity);
    let mut diff = 0.0f64;
    for q in 1..=3 {
        let r = commutator(&u, q).expect("q >= 0").to_physical();
        let kernel = oracle::periodized_kernel(&g, |k| block_multiplier(q, k));
        for p in PROBE_POINTS {
            let direct = oracle::commutator_integral_at(&kernel, &phys, p);
            let idx = g.index(p[0], p[1], p[2]);
            for c in 0..9 {
                diff = diff.max((direct[c] - r[c][idx]).abs());
            }
        }
    }
    let worst = rel(diff, sup * sup);
    SelfCheck::new("commutator_integral", n, worst, 1e-8)
}

fn product(n: usize) -> SelfCheck {
    let g = GridSpec::new(n).unwrap();
    let a = field(n, 5, g.dealias_cutoff());
    let b = field(n, 6, g.dealias_cutoff());
    let fast = dealiased_product(&a, &b).unwrap();
    let slow = oracle::convolution_product(&a, &b);
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for i in 0..3 {
        for j in 0..3 {
            for (x, y) in fast.get(i, j).iter().zip(slow.get(i, j)) {
                diff = diff.max((x - y).norm());
                scale = scale.max(y.norm());
            }
        }
    }
    SelfCheck::new("dealiased_product", n, rel(diff, scale), 1e-12)
}

fn partition_of_unity() -> SelfCheck {
    let top = 10;
    let worst = (0..10_000)
        .map(|i| {
            let r = i as f64 * lambda(top + 1) / 10_000.0;
            (chi(r) + (0..=top).map(|q| phi(r / lambda(q))).sum::<f64>() - 1.0).abs()
        })
        .fold(0.0, f64::max);
    SelfCheck::new("partition_of_unity", 0, worst, 1e-12)
}

fn reconstruction(n: usize) -> SelfCheck {
    let u = field(n, 7, GridSpec::new(n).unwrap().dealias_cutoff());
    let d = decompose(&u);
    let mut sum = SpectralField::zeros(*u.grid());
    for (_, b) in d.blocks() {
        sum = sum.axpy(1.0, b).unwrap();
    }
    let err = sum.sub(&u).unwrap().l2_norm() / u.l2_norm();
    SelfCheck::new("block_reconstruction", n, err, 1e-12)
}

fn flux_identity(n: usize) -> SelfCheck {
    let u = field(n, 8, GridSpec::new(n).unwrap().dealias_cutoff());
    let top = decompose(&u).q_max();
    let worst = (0..=top)
        .map(|q| flux_identity_residual(&u, q, q + 2).unwrap())
        .fold(0.0, f64::max);
    SelfCheck::new("flux_identity_q+2", n, worst, 1e-8)
}

fn weighted_terms(n: usize) -> SelfCheck {
    let u = field(n, 9, GridSpec::new(n).unwrap().dealias_cutoff());
    let norms: BlockNorms = decompose(&u).norms().clone();
    let mut worst = 0.0f64;
    for big_q in 0..=3 {
        let t = terms_i_ii_iii(&norms, big_q, 0.5).unwrap();
        let (i, ii, iii) = oracle::terms_double_loop(&norms, big_q, 0.5);
        for (a, b) in [(t.i, i), (t.ii, ii), (t.iii, iii)] {
            worst = worst.max(rel((a - b).abs(), b.abs()));
        }
    }
    SelfCheck::new("terms_I_II_III", n, worst, 1e-12)
}

fn hoelder(n: usize) -> SelfCheck {
    let u = field(n, 10, GridSpec::new(n).unwrap().dealias_cutoff());
    let s = interpolation_check(decompose(&u).norms());
    SelfCheck::new("hoelder_interpolation", n, (-s.scaled).max(0.0), 1e-12)
}

fn leray(n: usize) -> SelfCheck {
    let g = GridSpec::new(n).unwrap();
    let phys = crate::spectral_field::PhysicalField::from_fn(g, |x| {
        [
            x[1].sin() + x[0].cos(),
            (x[0] + x[2]).cos(),
            (2.0 * x[1]).sin(),
        ]
    });
    let p = leray_project(&to_spectral(&phys));
    SelfCheck::new("leray_divergence", n, scaled_divergence(&p), 1e-14)
}

/// Runs every check at `n` in {16, 32}.
pub fn run_selftest() -> Vec<SelfCheck> {
    let mut out = vec![partition_of_unity(), synthesis(16), analysis(16)];
    for n in [16, 32] {
        out.push(block_convolution(n));
        out.push(commutator_integral(n));
        out.push(product(n));
        out.push(reconstruction(n));
        out.push(flux_identity(n));
        out.push(weighted_terms(n));
        out.push(hoelder(n));
        out.push(leray(n));
    }
    out
}
