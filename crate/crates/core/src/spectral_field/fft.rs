//! Cached 3-D complex FFT plans on an `n x n x n` C-ordered cube.
//!
//! Both directions are unnormalized; callers apply `1/n^3` where needed.
//! The optional `keep` mask prunes 1-D passes whose input (inverse) or
//! output (forward) lies entirely outside the retained index set.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Column block width for the strided axis-0 pass.
const COLUMN_BLOCK: usize = 64;

pub(crate) struct Fft3 {
    n: usize,
    mirror: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

impl Fft3 {
    pub(crate) fn get(n: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("fft plan cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft3 {
                    n,
                    mirror: mirror_table(n),
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                })
            })
            .clone()
    }

    /// Flat index of `-k` for every flat index `k`.
    pub(crate) fn mirror(&self) -> &[usize] {
        &self.mirror
    }

    /// `data[x] <- sum_k data[k] e^{+i k.x}` over the lattice.
    pub(crate) fn inverse(&self, data: &mut [Complex64], keep: Option<&[bool]>) {
        self.run(data, keep, Direction::Inverse);
    }

    /// `data[k] <- sum_x data[x] e^{-i k.x}` over the lattice. With a mask,
    /// entries outside the retained set are left zero.
    pub(crate) fn forward(&self, data: &mut [Complex64], keep: Option<&[bool]>) {
        self.run(data, keep, Direction::Forward);
        if let Some(keep) = keep {
            zero_outside(data, self.n, keep);
        }
    }

    fn run(&self, data: &mut [Complex64], keep: Option<&[bool]>, dir: Direction) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "buffer does not match FFT cube");
        let all = vec![true; n];
        let keep = keep.unwrap_or(&all);
        let fft = match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        match dir {
            Direction::Inverse => {
                self.pass_contiguous(data, keep, fft);
                self.pass_middle(data, keep, fft);
                self.pass_outer(data, fft);
            }
            Direction::Forward => {
                self.pass_outer(data, fft);
                self.pass_middle(data, keep, fft);
                self.pass_contiguous(data, keep, fft);
            }
        }
    }

    /// Axis 2 (contiguous lines), restricted to lines with i0 and i1 retained.
    fn pass_contiguous(&self, data: &mut [Complex64], keep: &[bool], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        data.par_chunks_mut(n * n)
            .enumerate()
            .filter(|(i0, _)| keep[*i0])
            .for_each(|(_, slab)| {
                let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
                for (i1, line) in slab.chunks_mut(n).enumerate() {
                    if keep[i1] {
                        fft.process_with_scratch(line, &mut scratch);
                    }
                }
            });
    }

    /// Axis 1, restricted to slabs with i0 retained.
    fn pass_middle(&self, data: &mut [Complex64], keep: &[bool], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        data.par_chunks_mut(n * n)
            .enumerate()
            .filter(|(i0, _)| keep[*i0])
            .for_each(|(_, slab)| {
                let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
                let mut tmp = vec![Complex64::default(); n * n];
                for i1 in 0..n {
                    for i2 in 0..n {
                        tmp[i2 * n + i1] = slab[i1 * n + i2];
                    }
                }
                fft.process_with_scratch(&mut tmp, &mut scratch);
                for i1 in 0..n {
                    for i2 in 0..n {
                        slab[i1 * n + i2] = tmp[i2 * n + i1];
                    }
                }
            });
    }

    /// Axis 0, all lines, processed in column blocks of the `n x n^2` view.
    fn pass_outer(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let cols = n * n;
        let block = COLUMN_BLOCK.min(cols);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut tmp = vec![Complex64::default(); block * n];
        for c0 in (0..cols).step_by(block) {
            let width = block.min(cols - c0);
            for i0 in 0..n {
                let row = &data[i0 * cols + c0..i0 * cols + c0 + width];
                for (c, v) in row.iter().enumerate() {
                    tmp[c * n + i0] = *v;
                }
            }
            fft.process_with_scratch(&mut tmp[..width * n], &mut scratch);
            for i0 in 0..n {
                let row = &mut data[i0 * cols + c0..i0 * cols + c0 + width];
                for (c, v) in row.iter_mut().enumerate() {
                    *v = tmp[c * n + i0];
                }
            }
        }
    }
}

fn mirror_table(n: usize) -> Vec<usize> {
    let m = |i: usize| (n - i) % n;
    let mut out = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                out.push((m(a) * n + m(b)) * n + m(c));
            }
        }
    }
    out
}

pub(crate) fn zero_outside(data: &mut [Complex64], n: usize, keep: &[bool]) {
    for (i0, slab) in data.chunks_mut(n * n).enumerate() {
        for (i1, line) in slab.chunks_mut(n).enumerate() {
            if !(keep[i0] && keep[i1]) {
                line.fill(Complex64::default());
                continue;
            }
            for (i2, v) in line.iter_mut().enumerate() {
                if !keep[i2] {
                    *v = Complex64::default();
                }
            }
        }
    }
}
