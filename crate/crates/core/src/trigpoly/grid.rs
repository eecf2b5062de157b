//! Evaluation of a sparse trigonometric polynomial on the uniform grid
//! `x_m = 2π m / G` (per axis), by FFT or by direct summation.
//!
//! Layout is row-major: the last axis is contiguous.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Largest grid (total points) any evaluation may allocate.
pub const GRID_MEMORY_CAP: u128 = 1 << 26;

/// Below this many `terms × points` products, direct summation is used.
pub const DIRECT_CROSSOVER: u128 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPath {
    Auto,
    Fft,
    Direct,
}

pub fn check_grid(sizes: &[usize]) -> Result<usize> {
    let total = sizes.iter().map(|&g| g as u128).product::<u128>();
    if total > GRID_MEMORY_CAP {
        return Err(Error::Capacity {
            what: "evaluation grid",
            needed: total,
            cap: GRID_MEMORY_CAP,
        });
    }
    Ok(total as usize)
}

/// Values of `Σ c_k e^{i(k,x)}` at every grid point.
pub fn evaluate<'a, I>(terms: I, n_terms: usize, sizes: &[usize], path: EvalPath) -> Result<Vec<Complex64>>
where
    I: Iterator<Item = (&'a [i64], Complex64)> + Clone,
{
    let total = check_grid(sizes)?;
    let use_direct = match path {
        EvalPath::Direct => true,
        EvalPath::Fft => false,
        EvalPath::Auto => (n_terms as u128) * (total as u128) < DIRECT_CROSSOVER,
    };
    if use_direct {
        Ok(direct(terms, sizes, total))
    } else {
        Ok(fft(terms, sizes, total))
    }
}

fn folded_index(k: &[i64], sizes: &[usize]) -> usize {
    k.iter().zip(sizes).fold(0usize, |acc, (&kj, &g)| {
        acc * g + kj.rem_euclid(g as i64) as usize
    })
}

fn fft<'a, I>(terms: I, sizes: &[usize], total: usize) -> Vec<Complex64>
where
    I: Iterator<Item = (&'a [i64], Complex64)>,
{
    let mut buf = vec![Complex64::new(0.0, 0.0); total];
    for (k, c) in terms {
        buf[folded_index(k, sizes)] += c;
    }
    let mut planner = FftPlanner::<f64>::new();
    let d = sizes.len();
    for axis in 0..d {
        let n = sizes[axis];
        if n == 1 {
            continue;
        }
        let inner: usize = sizes[axis + 1..].iter().product();
        let plan = planner.plan_fft(n, FftDirection::Inverse);
        if inner == 1 {
            buf.par_chunks_mut(n).for_each(|line| plan.process(line));
            continue;
        }
        // Columns with stride `inner`: gather a batch into contiguous lines.
        const BATCH: usize = 16;
        buf.par_chunks_mut(n * inner).for_each(|slab| {
            let mut scratch = vec![Complex64::new(0.0, 0.0); n * BATCH];
            let mut col = 0;
            while col < inner {
                let width = BATCH.min(inner - col);
                for b in 0..width {
                    for i in 0..n {
                        scratch[b * n + i] = slab[i * inner + col + b];
                    }
                }
                plan.process(&mut scratch[..width * n]);
                for b in 0..width {
                    for i in 0..n {
                        slab[i * inner + col + b] = scratch[b * n + i];
                    }
                }
                col += width;
            }
        });
    }
    buf
}

fn direct<'a, I>(terms: I, sizes: &[usize], total: usize) -> Vec<Complex64>
where
    I: Iterator<Item = (&'a [i64], Complex64)>,
{
    let d = sizes.len();
    // Twiddle tables e^{2πi t / G_j}.
    let twiddles: Vec<Vec<Complex64>> = sizes
        .iter()
        .map(|&g| {
            (0..g)
                .map(|t| Complex64::from_polar(1.0, std::f64::consts::TAU * t as f64 / g as f64))
                .collect()
        })
        .collect();
    let folded: Vec<(Vec<usize>, Complex64)> = terms
        .map(|(k, c)| {
            (
                k.iter()
                    .zip(sizes)
                    .map(|(&kj, &g)| kj.rem_euclid(g as i64) as usize)
                    .collect(),
                c,
            )
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); total];
    out.par_chunks_mut(1024).enumerate().for_each(|(chunk, vals)| {
        let mut m = vec![0usize; d];
        for (offset, v) in vals.iter_mut().enumerate() {
            let mut idx = chunk * 1024 + offset;
            for j in (0..d).rev() {
                m[j] = idx % sizes[j];
                idx /= sizes[j];
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, c) in &folded {
                let mut phase = Complex64::new(1.0, 0.0);
                for j in 0..d {
                    phase *= twiddles[j][(k[j] * m[j]) % sizes[j]];
                }
                acc += c * phase;
            }
            *v = acc;
        }
    });
    out
}

/// Smallest power of two `≥ n` (and `≥ 1`).
pub fn pow2_at_least(n: u64) -> usize {
    n.max(1).next_power_of_two() as usize
}
