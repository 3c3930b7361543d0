//! Brute-force reference evaluations.
//!
//! Nothing here goes through the FFT engine or the spectral multiplier path:
//! transforms are direct sums over the lattice, filters are physical-space
//! convolutions with periodized kernels, products are direct mode-pair
//! convolutions and the weighted block sums are plain double loops. The
//! self-test command and the test suites compare the production routines
//! against these.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::littlewood_paley::{lambda, BlockNorms};
use crate::spectral_field::{GridSpec, PhysicalField, SpectralField, SpectralTensor};

/// `e^{i k x_j}` for every axis index pair, `table[k_idx * n + j]`.
fn phase_table(grid: &GridSpec) -> Vec<Complex64> {
    let n = grid.n();
    let mut t = Vec::with_capacity(n * n);
    for ki in 0..n {
        let k = grid.wavenumber(ki) as f64;
        for j in 0..n {
            let x = 2.0 * PI * j as f64 / n as f64;
            t.push(Complex64::from_polar(1.0, k * x));
        }
    }
    t
}

/// Direct synthesis `sum_k u_hat(k) e^{i k.x}` at the given lattice points.
pub fn direct_synthesis_at(f: &SpectralField, points: &[[usize; 3]]) -> Vec<[f64; 3]> {
    let g = f.grid();
    let n = g.n();
    let t = phase_table(g);
    let modes: Vec<(usize, [usize; 3])> = (0..g.len())
        .filter(|&idx| (0..3).any(|c| f.component(c)[idx] != Complex64::default()))
        .map(|idx| (idx, g.unindex(idx)))
        .collect();
    points
        .iter()
        .map(|p| {
            let mut acc = [Complex64::default(); 3];
            for (idx, [a, b, c]) in &modes {
                let e = t[a * n + p[0]] * t[b * n + p[1]] * t[c * n + p[2]];
                for (comp, slot) in acc.iter_mut().enumerate() {
                    *slot += f.component(comp)[*idx] * e;
                }
            }
            [acc[0].re, acc[1].re, acc[2].re]
        })
        .collect()
}

/// Direct analysis `n^-3 sum_x g(x) e^{-i k.x}` for every mode.
pub fn direct_analysis(g: &PhysicalField) -> [Vec<Complex64>; 3] {
    let grid = g.grid();
    let n = grid.n();
    let t = phase_table(grid);
    let norm = 1.0 / grid.len() as f64;
    let mut out = [
        vec![Complex64::default(); grid.len()],
        vec![Complex64::default(); grid.len()],
        vec![Complex64::default(); grid.len()],
    ];
    for kidx in 0..grid.len() {
        let [a, b, c] = grid.unindex(kidx);
        let mut acc = [Complex64::default(); 3];
        for x in 0..grid.len() {
            let [i, j, l] = grid.unindex(x);
            let e = (t[a * n + i] * t[b * n + j] * t[c * n + l]).conj();
            for (comp, slot) in acc.iter_mut().enumerate() {
                *slot += g.component(comp)[x] * e;
            }
        }
        for comp in 0..3 {
            out[comp][kidx] = acc[comp] * norm;
        }
    }
    out
}

/// Lattice samples of the periodized kernel `K(x) = (2pi)^-3 sum_k m(|k|) e^{i k.x}`,
/// with `k` over the grid's wavenumber box, evaluated by separable direct sums.
pub fn periodized_kernel(grid: &GridSpec, multiplier: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = grid.n();
    let t = phase_table(grid);
    // Stage through the three axes: sum over k2, then k1, then k0.
    let mut coef = vec![Complex64::default(); grid.len()];
    for idx in 0..grid.len() {
        let [a, b, c] = grid.unindex(idx);
        let k = [a, b, c].map(|i| grid.wavenumber(i) as f64);
        let r = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        coef[idx] = Complex64::new(multiplier(r), 0.0);
    }
    let mut s2 = vec![Complex64::default(); grid.len()];
    for a in 0..n {
        for b in 0..n {
            for x2 in 0..n {
                let mut acc = Complex64::default();
                for c in 0..n {
                    acc += coef[grid.index(a, b, c)] * t[c * n + x2];
                }
                s2[grid.index(a, b, x2)] = acc;
            }
        }
    }
    let mut s1 = vec![Complex64::default(); grid.len()];
    for a in 0..n {
        for x1 in 0..n {
            for x2 in 0..n {
                let mut acc = Complex64::default();
                for b in 0..n {
                    acc += s2[grid.index(a, b, x2)] * t[b * n + x1];
                }
                s1[grid.index(a, x1, x2)] = acc;
            }
        }
    }
    let scale = 1.0 / grid.volume();
    let mut out = vec![0.0; grid.len()];
    for x0 in 0..n {
        for x1 in 0..n {
            for x2 in 0..n {
                let mut acc = Complex64::default();
                for a in 0..n {
                    acc += s1[grid.index(a, x1, x2)] * t[a * n + x0];
                }
                out[grid.index(x0, x1, x2)] = acc.re * scale;
            }
        }
    }
    out
}

fn shifted(grid: &GridSpec, p: [usize; 3], y: [usize; 3]) -> usize {
    let n = grid.n();
    grid.index(
        (p[0] + n - y[0]) % n,
        (p[1] + n - y[1]) % n,
        (p[2] + n - y[2]) % n,
    )
}

/// `int K(y) u(x - y) dy` by lattice summation at point `p`.
pub fn convolve_at(kernel: &[f64], u: &PhysicalField, p: [usize; 3]) -> [f64; 3] {
    let g = u.grid();
    let w = g.cell_volume();
    let mut acc = [0.0; 3];
    for (yidx, k) in kernel.iter().enumerate() {
        let src = shifted(g, p, g.unindex(yidx));
        for (c, slot) in acc.iter_mut().enumerate() {
            *slot += k * u.component(c)[src];
        }
    }
    acc.map(|v| v * w)
}

/// `int K(y) (u(x-y) - u(x)) (x) (u(x-y) - u(x)) dy` at point `p`, row-major.
pub fn commutator_integral_at(kernel: &[f64], u: &PhysicalField, p: [usize; 3]) -> [f64; 9] {
    let g = u.grid();
    let w = g.cell_volume();
    let here = g.index(p[0], p[1], p[2]);
    let u0 = [
        u.component(0)[here],
        u.component(1)[here],
        u.component(2)[here],
    ];
    let mut acc = [0.0; 9];
    for (yidx, k) in kernel.iter().enumerate() {
        let src = shifted(g, p, g.unindex(yidx));
        let d = [
            u.component(0)[src] - u0[0],
            u.component(1)[src] - u0[1],
            u.component(2)[src] - u0[2],
        ];
        for i in 0..3 {
            for j in 0..3 {
                acc[3 * i + j] += k * d[i] * d[j];
            }
        }
    }
    acc.map(|v| v * w)
}

/// Exact product `f (x) g` by direct mode-pair convolution, restricted to the
/// retained band of the grid.
pub fn convolution_product(f: &SpectralField, g: &SpectralField) -> SpectralTensor {
    let grid = *f.grid();
    let keep = grid.retained_mask();
    let cut = grid.dealias_cutoff();
    let populated = |h: &SpectralField| -> Vec<([i64; 3], [Complex64; 3])> {
        (0..grid.len())
            .filter_map(|idx| {
                let l = grid.unindex(idx);
                if !(keep[l[0]] && keep[l[1]] && keep[l[2]]) {
                    return None;
                }
                let v = [
                    h.component(0)[idx],
                    h.component(1)[idx],
                    h.component(2)[idx],
                ];
                if v.iter().all(|x| *x == Complex64::default()) {
                    return None;
                }
                Some((l.map(|i| grid.wavenumber(i)), v))
            })
            .collect()
    };
    let fm = populated(f);
    let gm = populated(g);
    let mut out = SpectralTensor::zeros(grid);
    for (ka, va) in &fm {
        for (kb, vb) in &gm {
            let k = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
            if k.iter().any(|x| x.abs() as f64 > cut) {
                continue;
            }
            let idx = grid.index_of(k);
            for i in 0..3 {
                for j in 0..3 {
                    out.get_mut(i, j)[idx] += va[i] * vb[j];
                }
            }
        }
    }
    out
}

/// Weighted block sums by explicit double loops over `q` and `p`.
pub fn terms_double_loop(norms: &BlockNorms, big_q: i32, eps: f64) -> (f64, f64, f64) {
    let q_max = norms.q_max();
    let a = |q: i32| norms.l3(q);
    let (mut t1, mut t2, mut t3) = (0.0, 0.0, 0.0);
    for q in big_q.max(-1)..=q_max {
        let mut inner1 = 0.0;
        for p in -1..=q {
            inner1 += lambda(p).powi(2) * a(p).powi(2);
        }
        t1 += lambda(q).powf(eps) * a(q) * inner1;

        let mut inner2 = 0.0;
        for p in (q + 1)..=q_max {
            inner2 += a(p).powi(2);
        }
        t2 += lambda(q).powf(2.0 + eps) * a(q) * inner2;

        let mut inner3 = 0.0;
        for p in -1..=(q + 1).min(q_max) {
            inner3 += lambda(p) * a(p);
        }
        t3 += lambda(q).powf(1.0 + eps) * a(q).powi(2) * inner3;
    }
    (t1, t2, t3)
}

/// `sup_t sum_{q=-1}^{Q-1} lambda_q^{2+eps} ||u_q||_3^3` by direct loops.
pub fn remainder_double_loop(history: &[BlockNorms], big_q: i32, eps: f64) -> f64 {
    let mut best = 0.0f64;
    for norms in history {
        let mut s = 0.0;
        for q in -1..big_q {
            if q > norms.q_max() {
                break;
            }
            s += lambda(q).powf(2.0 + eps) * norms.l3(q).powi(3);
        }
        best = best.max(s);
    }
    best
}
