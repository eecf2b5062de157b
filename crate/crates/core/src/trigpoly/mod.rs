//! Trigonometric polynomials on the torus `[0, 2π)^d` stored by their
//! nonzero Fourier coefficients, with norms taken against the normalized
//! measure `(2π)^{-d} dx`.

pub mod grid;
pub mod text;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexsets::{DyadicIndex, Freq, SpectrumSet, DEFAULT_FREQUENCY_CAP};
use crate::rng::stream_rng;
use grid::{pow2_at_least, EvalPath};

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    d: usize,
    coeffs: BTreeMap<Freq, Complex64>,
}

impl TrigPolynomial {
    pub fn zero(d: usize) -> Self {
        Self { d, coeffs: BTreeMap::new() }
    }

    /// Builds a polynomial, summing repeated frequencies and dropping zeros.
    pub fn from_terms<I>(d: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Freq, Complex64)>,
    {
        let mut coeffs: BTreeMap<Freq, Complex64> = BTreeMap::new();
        for (k, c) in terms {
            if k.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: k.len() });
            }
            *coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(Self { d, coeffs })
    }

    /// `e^{i(k,x)}`.
    pub fn monomial(k: Freq) -> Self {
        let d = k.len();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(k, Complex64::new(1.0, 0.0));
        Self { d, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of stored (nonzero) coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Coefficients in lexicographic frequency order.
    pub fn iter(&self) -> impl Iterator<Item = (&Freq, &Complex64)> + Clone {
        self.coeffs.iter()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = &Freq> {
        self.coeffs.keys()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: other.d });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Self::from_terms(self.d, self.iter().chain(other.iter()).map(|(k, c)| (k.clone(), *c)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Self::from_terms(
            self.d,
            self.iter()
                .map(|(k, c)| (k.clone(), *c))
                .chain(other.iter().map(|(k, c)| (k.clone(), -c))),
        )
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            return Self::zero(self.d);
        }
        let coeffs = self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        Self { d: self.d, coeffs }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// `x ↦ f(x + y)`: coefficients pick up `e^{i(k,y)}`.
    pub fn translate(&self, y: &[f64]) -> Result<Self> {
        if y.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: y.len() });
        }
        if y.iter().all(|&v| v == 0.0) {
            return Ok(self.clone());
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let phase: f64 = k.iter().zip(y).map(|(&kj, &yj)| kj as f64 * yj).sum();
                (k.clone(), c * Complex64::from_polar(1.0, phase))
            })
            .collect();
        Ok(Self { d: self.d, coeffs })
    }

    /// Keeps the coefficients whose frequency satisfies `keep`.
    pub fn restrict<F: Fn(&[i64]) -> bool>(&self, keep: F) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| keep(k))
            .map(|(k, c)| (k.clone(), *c))
            .collect();
        Self { d: self.d, coeffs }
    }

    /// Multiplies every coefficient by `multiplier(k)`; zero products are pruned.
    pub fn multiply_coefficients<F: Fn(&[i64]) -> f64>(&self, multiplier: F) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter_map(|(k, c)| {
                let m = multiplier(k);
                (m != 0.0).then(|| (k.clone(), c * m))
            })
            .collect();
        Self { d: self.d, coeffs }
    }

    /// `δ_s(f)`: the part of the spectrum inside `ρ(s)`.
    pub fn block_extract(&self, s: &DyadicIndex) -> Self {
        self.restrict(|k| s.contains(k))
    }

    /// Blocks occupied by the spectrum, lexicographic. Frequencies with a zero
    /// coordinate belong to no block.
    pub fn occupied_blocks(&self) -> Vec<DyadicIndex> {
        let mut blocks: Vec<DyadicIndex> =
            self.frequencies().filter_map(|k| DyadicIndex::of_frequency(k)).collect();
        blocks.sort();
        blocks.dedup();
        blocks
    }

    /// First frequency with a zero coordinate, if any.
    pub fn zero_coordinate_frequency(&self) -> Option<&Freq> {
        self.frequencies().find(|k| k.contains(&0))
    }

    /// `max |k_j|` over the spectrum, per coordinate.
    pub fn max_degree(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.d];
        for k in self.frequencies() {
            for (dj, &kj) in deg.iter_mut().zip(k) {
                *dj = (*dj).max(kj.unsigned_abs());
            }
        }
        deg
    }

    /// Modulation by an integer vector that centers the spectrum in each
    /// coordinate. `|f|` is unchanged pointwise; returns the shifted
    /// polynomial and its per-coordinate degree.
    fn centered(&self) -> (Self, Vec<u64>) {
        let mut lo = vec![i64::MAX; self.d];
        let mut hi = vec![i64::MIN; self.d];
        for k in self.frequencies() {
            for j in 0..self.d {
                lo[j] = lo[j].min(k[j]);
                hi[j] = hi[j].max(k[j]);
            }
        }
        let center: Vec<i64> = lo.iter().zip(&hi).map(|(&a, &b)| (a + b).div_euclid(2)).collect();
        if center.iter().all(|&c| c == 0) {
            let deg = self.max_degree();
            return (self.clone(), deg);
        }
        let coeffs: BTreeMap<Freq, Complex64> = self
            .coeffs
            .iter()
            .map(|(k, c)| (k.iter().zip(&center).map(|(a, b)| a - b).collect(), *c))
            .collect();
        let shifted = Self { d: self.d, coeffs };
        let deg = shifted.max_degree();
        (shifted, deg)
    }

    /// Direct evaluation at one point.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.iter()
            .map(|(k, c)| {
                let phase: f64 = k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    /// Values on the grid `2π m / G_j`, row-major.
    pub fn eval_grid(&self, sizes: &[usize], path: EvalPath) -> Result<Vec<Complex64>> {
        if sizes.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: sizes.len() });
        }
        grid::evaluate(
            self.iter().map(|(k, c)| (k.as_slice(), *c)),
            self.len(),
            sizes,
            path,
        )
    }

    /// `Σ |f̂(k)|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ |f̂(k)|`, an upper bound for `‖f‖_∞`.
    pub fn sum_abs_coeffs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMode {
    /// Closed forms where available: Parseval at `p = 2`, exact grids for even
    /// integer `p`, adaptive grids otherwise.
    ExactParseval,
    /// As above but `p = 2` also goes through the exact grid.
    EvenPowerExact,
    /// Adaptive doubling for every finite `p`.
    AdaptiveGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub mode: QuadratureMode,
    pub rel_tol: f64,
    /// Per-axis grid cap, a power of two.
    pub max_grid: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { mode: QuadratureMode::ExactParseval, rel_tol: 1e-6, max_grid: 1 << 16 }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if !self.max_grid.is_power_of_two() {
            return Err(Error::Config(format!(
                "max_grid must be a power of two, got {}",
                self.max_grid
            )));
        }
        Ok(())
    }
}

fn is_even_integer(p: f64) -> bool {
    p.fract() == 0.0 && (p as u64) % 2 == 0 && p <= 64.0
}

fn mean_power(values: &[Complex64], p: f64) -> f64 {
    let sum: f64 = if p == 2.0 {
        values.iter().map(|v| v.norm_sqr()).sum()
    } else if p == 1.0 {
        values.iter().map(|v| v.norm()).sum()
    } else {
        values.iter().map(|v| v.norm_sqr().powf(0.5 * p)).sum()
    };
    sum / values.len() as f64
}

/// Grid candidates polished by this many local ascents.
const SUP_CANDIDATES: usize = 16;

/// Grid maximum of `|f|`, then Newton ascent on `|f|²` from the best grid
/// points. Candidates are ordered by value then index, so the result does not
/// depend on scheduling.
fn refined_max(f: &TrigPolynomial, sizes: &[usize]) -> Result<f64> {
    let vals = f.eval_grid(sizes, EvalPath::Auto)?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    let take = SUP_CANDIDATES.min(vals.len());
    order.select_nth_unstable_by(take - 1, |&a, &b| {
        vals[b].norm_sqr().total_cmp(&vals[a].norm_sqr()).then(a.cmp(&b))
    });
    order.truncate(take);
    order.sort_unstable();
    let terms: Vec<(Vec<f64>, Complex64)> =
        f.iter().map(|(k, c)| (k.iter().map(|&kj| kj as f64).collect(), *c)).collect();
    let mut best = vals[order[0]].norm_sqr();
    for &idx in &order {
        let mut x = vec![0.0; sizes.len()];
        let mut rem = idx;
        for j in (0..sizes.len()).rev() {
            x[j] = std::f64::consts::TAU * (rem % sizes[j]) as f64 / sizes[j] as f64;
            rem /= sizes[j];
        }
        best = best.max(ascend(&terms, x));
    }
    Ok(best.sqrt())
}

/// `|f|²`, its gradient and Hessian at `x`.
fn local_model(terms: &[(Vec<f64>, Complex64)], x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
    let d = x.len();
    let mut f = Complex64::new(0.0, 0.0);
    let mut df = vec![Complex64::new(0.0, 0.0); d];
    let mut ddf = vec![Complex64::new(0.0, 0.0); d * d];
    for (k, c) in terms {
        let phase: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
        let t = c * Complex64::from_polar(1.0, phase);
        f += t;
        for j in 0..d {
            df[j] += Complex64::i() * k[j] * t;
            for l in 0..d {
                ddf[j * d + l] -= k[j] * k[l] * t;
            }
        }
    }
    let grad = DVector::from_fn(d, |j, _| 2.0 * (f.conj() * df[j]).re);
    let hess = DMatrix::from_fn(d, d, |j, l| 2.0 * (df[j].conj() * df[l] + f.conj() * ddf[j * d + l]).re);
    (f.norm_sqr(), grad, hess)
}

fn value_at(terms: &[(Vec<f64>, Complex64)], x: &[f64]) -> f64 {
    terms
        .iter()
        .map(|(k, c)| c * Complex64::from_polar(1.0, k.iter().zip(x).map(|(a, b)| a * b).sum()))
        .sum::<Complex64>()
        .norm_sqr()
}

/// Damped Newton ascent on `|f|²`; falls back to a gradient step when the
/// Hessian is not negative definite.
fn ascend(terms: &[(Vec<f64>, Complex64)], mut x: Vec<f64>) -> f64 {
    let (mut h, _, _) = local_model(terms, &x);
    for _ in 0..60 {
        let (_, grad, hess) = local_model(terms, &x);
        let step = match (-&hess).cholesky() {
            Some(ch) => ch.solve(&grad),
            None => {
                let scale = hess.norm().max(f64::MIN_POSITIVE);
                &grad / scale
            }
        };
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-6 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let v = value_at(terms, &trial);
            if v > h {
                x = trial;
                let gain = v - h;
                h = v;
                moved = gain > 1e-15 * h;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    h
}

/// `‖f‖_p` under the normalized measure, `p ∈ [1, ∞]`.
///
/// `p = ∞` is exact for nonnegative real coefficients; otherwise it is a grid
/// maximum, refined by doubling until successive maxima agree to `rel_tol`.
pub fn lp_norm(f: &TrigPolynomial, p: f64, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("p must be at least 1, got {p}")));
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    if p == 2.0 && quad.mode == QuadratureMode::ExactParseval {
        return Ok(f.l2_norm_sq().sqrt());
    }
    if f.len() == 1 {
        // |c e^{i(k,x)}| is constant.
        return Ok(f.coeffs.values().next().expect("nonempty").norm());
    }
    if p.is_infinite() && f.coeffs.values().all(|c| c.im == 0.0 && c.re >= 0.0) {
        // |f(x)| ≤ Σ c_k = f(0): the supremum is attained at the origin.
        return Ok(f.coeffs.values().map(|c| c.re).sum());
    }
    let (g, deg) = f.centered();
    let too_big = |sizes: &[usize]| sizes.iter().any(|&s| s > quad.max_grid);

    if p.is_infinite() {
        let mut sizes: Vec<usize> = deg.iter().map(|&n| pow2_at_least(4 * (2 * n + 1))).collect();
        if too_big(&sizes) {
            return Err(grid_cap_error(&sizes, quad));
        }
        let mut prev = refined_max(&g, &sizes)?;
        loop {
            let next: Vec<usize> = sizes.iter().map(|&s| 2 * s).collect();
            if too_big(&next) || grid::check_grid(&next).is_err() {
                return Err(Error::ToleranceNotMet { best: prev, grid: *sizes.iter().max().unwrap() });
            }
            let m = refined_max(&g, &next)?;
            if (m - prev).abs() <= quad.rel_tol * m {
                return Ok(m);
            }
            prev = m;
            sizes = next;
        }
    }

    if is_even_integer(p) && quad.mode != QuadratureMode::AdaptiveGrid {
        // |g|^p is a trigonometric polynomial of degree p·n_j; a grid finer
        // than that integrates it exactly.
        let sizes: Vec<usize> = deg.iter().map(|&n| pow2_at_least(p as u64 * n + 1)).collect();
        if too_big(&sizes) {
            return Err(grid_cap_error(&sizes, quad));
        }
        let vals = g.eval_grid(&sizes, EvalPath::Auto)?;
        return Ok(mean_power(&vals, p).powf(1.0 / p));
    }

    let mut sizes: Vec<usize> = deg.iter().map(|&n| pow2_at_least(2 * n + 1)).collect();
    if too_big(&sizes) {
        return Err(grid_cap_error(&sizes, quad));
    }
    let mut prev = mean_power(&g.eval_grid(&sizes, EvalPath::Auto)?, p).powf(1.0 / p);
    loop {
        let next: Vec<usize> = sizes.iter().map(|&s| 2 * s).collect();
        if too_big(&next) || grid::check_grid(&next).is_err() {
            return Err(Error::ToleranceNotMet { best: prev, grid: *sizes.iter().max().unwrap() });
        }
        let est = mean_power(&g.eval_grid(&next, EvalPath::Auto)?, p).powf(1.0 / p);
        if (est - prev).abs() <= quad.rel_tol * est {
            return Ok(est);
        }
        prev = est;
        sizes = next;
    }
}

fn grid_cap_error(sizes: &[usize], quad: &QuadratureSpec) -> Error {
    Error::Capacity {
        what: "quadrature grid per axis",
        needed: *sizes.iter().max().unwrap() as u128,
        cap: quad.max_grid as u128,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientLaw {
    /// `e^{iφ}` with `φ` uniform on `[0, 2π)`.
    UnitComplex,
    /// `(X + iY)/√2` with `X, Y` standard normal.
    Gaussian,
}

pub fn draw_coefficient<R: Rng>(rng: &mut R, law: CoefficientLaw) -> Complex64 {
    match law {
        CoefficientLaw::UnitComplex => {
            Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)
        }
        CoefficientLaw::Gaussian => {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
        }
    }
}

/// Random polynomial with i.i.d. coefficients on every frequency of `set`,
/// drawn in lexicographic order.
pub fn random_in_spectrum(set: &SpectrumSet, seed: u64, law: CoefficientLaw) -> Result<TrigPolynomial> {
    if set.is_empty() {
        return Err(Error::Domain("cannot draw a polynomial on an empty spectrum".into()));
    }
    let freqs = set.materialize(DEFAULT_FREQUENCY_CAP)?;
    let mut rng = stream_rng(seed, &[]);
    let terms: Vec<(Freq, Complex64)> = freqs
        .into_iter()
        .map(|k| {
            let c = draw_coefficient(&mut rng, law);
            (k, c)
        })
        .collect();
    TrigPolynomial::from_terms(set.dim(), terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NikolskiiCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Slack allowed on the right-hand side of the Nikolskii check.
pub const NIKOLSKII_SLACK: f64 = 1e-9;

/// `‖t‖_p ≤ 2^d ∏ n_j^{1/q - 1/p} ‖t‖_q` for `1 ≤ q < p ≤ ∞`.
pub fn nikolskii_check(t: &TrigPolynomial, p: f64, q: f64, quad: &QuadratureSpec) -> Result<NikolskiiCheck> {
    if !(q >= 1.0 && q < p) {
        return Err(Error::Domain(format!("need 1 ≤ q < p, got q = {q}, p = {p}")));
    }
    let exponent = 1.0 / q - if p.is_infinite() { 0.0 } else { 1.0 / p };
    let factor: f64 = t
        .max_degree()
        .iter()
        .map(|&n| (n.max(1) as f64).powf(exponent))
        .product::<f64>()
        * (t.dim() as f64).exp2();
    let lhs = lp_norm(t, p, quad)?;
    let rhs = factor * lp_norm(t, q, quad)?;
    Ok(NikolskiiCheck { lhs, rhs, pass: lhs <= rhs * (1.0 + NIKOLSKII_SLACK) })
}
