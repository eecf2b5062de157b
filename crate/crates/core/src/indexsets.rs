//! Dyadic index families: blocks `ρ(s)`, the step hyperbolic cross `Q(N)`,
//! the sets `χ(N)`, `Θ(N)`, `Θ′(N)`, and the tail sums over `χ^⊥(N)`.
//!
//! Membership is decided in the log domain: `s ∈ χ(N)` iff
//! `Σ_j (r s_j + b_j log₂ s_j) ≤ log₂ N`. For `b = 0` and integral `r` the
//! comparison is exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorant::MajorantParams;

/// Integer frequency vector.
pub type Freq = Vec<i64>;

/// Default cap on the number of frequencies [`SpectrumSet::materialize`] will produce.
pub const DEFAULT_FREQUENCY_CAP: u128 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicIndex(Vec<u32>);

impl DyadicIndex {
    pub fn new(s: Vec<u32>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Domain("dyadic index needs at least one coordinate".into()));
        }
        if s.iter().any(|&sj| sj == 0) {
            return Err(Error::Domain(format!("dyadic index coordinates must be ≥ 1, got {s:?}")));
        }
        Ok(Self(s))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// `‖s‖₁`.
    pub fn l1(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn min_coord(&self) -> u32 {
        *self.0.iter().min().expect("nonempty")
    }

    /// Block containing `k`, or `None` if some `k_j = 0`.
    pub fn of_frequency(k: &[i64]) -> Option<Self> {
        k.iter()
            .map(|&kj| {
                if kj == 0 {
                    None
                } else {
                    Some(64 - kj.unsigned_abs().leading_zeros())
                }
            })
            .collect::<Option<Vec<u32>>>()
            .map(Self)
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.len() == self.dim()
            && k.iter().zip(&self.0).all(|(&kj, &sj)| {
                let a = kj.unsigned_abs();
                a >= 1 << (sj - 1) && a < 1 << sj
            })
    }
}

impl fmt::Display for DyadicIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Chi,
    Theta,
    ThetaPrime,
    Custom,
}

/// A finite set of dyadic indices, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexFamily {
    pub members: Vec<DyadicIndex>,
    pub kind: FamilyKind,
    pub n: f64,
}

impl IndexFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: &DyadicIndex) -> bool {
        self.members.binary_search(s).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DyadicIndex> {
        self.members.iter()
    }
}

/// A finite set of frequencies with all coordinates nonzero.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSet {
    /// Union of the boxes `ρ(s)`; the indices are distinct, so the boxes are disjoint.
    Blocks { d: usize, blocks: Vec<DyadicIndex> },
    /// Explicit frequencies, sorted and deduplicated.
    Explicit { d: usize, frequencies: Vec<Freq> },
}

impl SpectrumSet {
    pub fn from_blocks(d: usize, mut blocks: Vec<DyadicIndex>) -> Result<Self> {
        if let Some(bad) = blocks.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.dim() });
        }
        blocks.sort();
        blocks.dedup();
        Ok(Self::Blocks { d, blocks })
    }

    pub fn from_frequencies(d: usize, mut frequencies: Vec<Freq>) -> Result<Self> {
        for k in &frequencies {
            if k.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: k.len() });
            }
            if k.contains(&0) {
                return Err(Error::Domain(format!("frequency {k:?} has a zero coordinate")));
            }
        }
        frequencies.sort();
        frequencies.dedup();
        Ok(Self::Explicit { d, frequencies })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Blocks { d, .. } | Self::Explicit { d, .. } => *d,
        }
    }

    pub fn len(&self) -> u128 {
        match self {
            Self::Blocks { blocks, .. } => blocks.iter().map(|s| 1u128 << s.l1()).sum(),
            Self::Explicit { frequencies, .. } => frequencies.len() as u128,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        match self {
            Self::Blocks { blocks, .. } => DyadicIndex::of_frequency(k)
                .map(|s| blocks.binary_search(&s).is_ok())
                .unwrap_or(false),
            Self::Explicit { frequencies, .. } => {
                frequencies.binary_search_by(|f| f.as_slice().cmp(k)).is_ok()
            }
        }
    }

    /// All frequencies in lexicographic order.
    pub fn materialize(&self, cap: u128) -> Result<Vec<Freq>> {
        let needed = self.len();
        if needed > cap {
            return Err(Error::Capacity { what: "spectrum materialization", needed, cap });
        }
        match self {
            Self::Explicit { frequencies, .. } => Ok(frequencies.clone()),
            Self::Blocks { blocks, .. } => {
                let mut out = Vec::with_capacity(needed as usize);
                for s in blocks {
                    out.extend(rho_frequencies(s));
                }
                out.sort();
                Ok(out)
            }
        }
    }
}

/// Signed integers `k` with `2^{s-1} ≤ |k| < 2^s`, ascending.
pub fn rho_1d(s: u32) -> Vec<i64> {
    let lo = 1i64 << (s - 1);
    let hi = 1i64 << s;
    (-hi + 1..=-lo).chain(lo..hi).collect()
}

fn rho_frequencies(s: &DyadicIndex) -> Vec<Freq> {
    let axes: Vec<Vec<i64>> = s.as_slice().iter().map(|&sj| rho_1d(sj)).collect();
    cartesian(&axes)
}

/// Lexicographic cartesian product.
pub(crate) fn cartesian(axes: &[Vec<i64>]) -> Vec<Freq> {
    let total: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    if total == 0 {
        return out;
    }
    let mut idx = vec![0usize; axes.len()];
    loop {
        out.push(idx.iter().zip(axes).map(|(&i, a)| a[i]).collect());
        let mut j = axes.len();
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// The dyadic block `ρ(s)`.
pub fn rho(s: &DyadicIndex) -> SpectrumSet {
    SpectrumSet::Blocks { d: s.dim(), blocks: vec![s.clone()] }
}

/// Minimum over `s ≥ 1` of `r s + b_j log₂ s`. The function is increasing past
/// `s* = -b_j / (r ln 2)`, so scanning to `⌈s*⌉ + 1` suffices.
fn min_log2_weight_1d(params: &MajorantParams, j: usize) -> f64 {
    let turning = (-params.b[j] / (params.r * std::f64::consts::LN_2)).max(1.0);
    let last = turning.ceil() as u32 + 1;
    (1..=last)
        .map(|s| params.log2_weight_1d(j, s))
        .fold(f64::INFINITY, f64::min)
}

/// First `s` past the turning point with weight above `budget`.
fn coordinate_bound(params: &MajorantParams, j: usize, budget: f64) -> u32 {
    let turning = (-params.b[j] / (params.r * std::f64::consts::LN_2)).max(1.0).ceil() as u32;
    let mut s = turning.max(1);
    while params.log2_weight_1d(j, s) <= budget {
        s += 1;
    }
    s
}

/// All `s` with `log₂ weight(s) ≤ log2_n`, lexicographic.
fn enumerate_below(params: &MajorantParams, log2_n: f64) -> Vec<DyadicIndex> {
    let d = params.d;
    let mins: Vec<f64> = (0..d).map(|j| min_log2_weight_1d(params, j)).collect();
    let total_min: f64 = mins.iter().sum();
    if total_min > log2_n {
        return Vec::new();
    }
    let bounds: Vec<u32> = (0..d)
        .map(|j| coordinate_bound(params, j, log2_n - (total_min - mins[j])))
        .collect();
    // rest_min[j] = Σ_{i ≥ j} mins[i]
    let mut rest_min = vec![0.0; d + 1];
    for j in (0..d).rev() {
        rest_min[j] = rest_min[j + 1] + mins[j];
    }

    let mut out = Vec::new();
    let mut current = Vec::with_capacity(d);
    fn recurse(
        params: &MajorantParams,
        log2_n: f64,
        bounds: &[u32],
        rest_min: &[f64],
        partial: f64,
        current: &mut Vec<u32>,
        out: &mut Vec<DyadicIndex>,
    ) {
        let j = current.len();
        if j == params.d {
            if partial <= log2_n {
                out.push(DyadicIndex(current.clone()));
            }
            return;
        }
        for s in 1..bounds[j] {
            let w = partial + params.log2_weight_1d(j, s);
            if w + rest_min[j + 1] > log2_n {
                continue;
            }
            current.push(s);
            recurse(params, log2_n, bounds, rest_min, w, current, out);
            current.pop();
        }
    }
    recurse(params, log2_n, &bounds, &rest_min, 0.0, &mut current, &mut out);
    out
}

/// `χ(N) = {s : ∏ 2^{r s_j} s_j^{b_j} ≤ N}`.
pub fn chi(params: &MajorantParams, n: f64) -> Result<IndexFamily> {
    params.validate_indexing()?;
    let members = if n > 0.0 { enumerate_below(params, n.log2()) } else { Vec::new() };
    Ok(IndexFamily { members, kind: FamilyKind::Chi, n })
}

/// `Θ(N) = {s : 1/(2^l N) ≤ Ω(2^{-s}) < 1/N}`.
pub fn theta(params: &MajorantParams, n: f64) -> Result<IndexFamily> {
    params.validate_indexing()?;
    if !(n >= 1.0) {
        return Err(Error::Domain(format!("N must be at least 1, got {n}")));
    }
    let log2_n = n.log2();
    let members = enumerate_below(params, log2_n + params.l as f64)
        .into_iter()
        .filter(|s| params.log2_weight(s.as_slice()) > log2_n)
        .collect();
    Ok(IndexFamily { members, kind: FamilyKind::Theta, n })
}

/// Smallest admissible coordinate of `Θ′(N)`: `⌈L/(2rd)⌉` with `L = ⌊log₂ N⌋`.
pub fn theta_prime_floor(params: &MajorantParams, n: f64) -> u32 {
    let l = n.log2().floor().max(0.0);
    ((l / (2.0 * params.r * params.d as f64)).ceil() as u32).max(1)
}

/// Explicit subfamily of `Θ(N)` with every coordinate of order `log N`.
///
/// The first `d-1` coordinates range over `[⌈L/(2rd)⌉, ⌊L/(rd)⌋]`; for each
/// such prefix the smallest `s_d ≥ ⌈L/(2rd)⌉` completing it to a member of
/// `Θ(N)` is kept. For `d = 1` this is `Θ(N)` itself.
pub fn theta_prime(params: &MajorantParams, n: f64) -> Result<IndexFamily> {
    let band = theta(params, n)?;
    let d = params.d;
    if d == 1 {
        return Ok(IndexFamily { kind: FamilyKind::ThetaPrime, ..band });
    }
    let l = n.log2().floor().max(0.0);
    let lo = theta_prime_floor(params, n);
    let hi = (l / (params.r * d as f64)).floor() as u32;
    let mut members = Vec::new();
    if hi >= lo {
        let axes: Vec<Vec<i64>> = (0..d - 1).map(|_| (lo as i64..=hi as i64).collect()).collect();
        for prefix in cartesian(&axes) {
            let mut s: Vec<u32> = prefix.iter().map(|&x| x as u32).collect();
            s.push(lo);
            // Band members with this prefix are contiguous in `band` order.
            let found = band
                .members
                .iter()
                .find(|m| m.as_slice()[..d - 1] == s[..d - 1] && m.as_slice()[d - 1] >= lo);
            if let Some(m) = found {
                members.push(m.clone());
            }
        }
    }
    Ok(IndexFamily { members, kind: FamilyKind::ThetaPrime, n })
}

/// `Q(N) = ⋃_{s ∈ χ(N)} ρ(s)`, kept in block form.
pub fn q_set(params: &MajorantParams, n: f64) -> Result<SpectrumSet> {
    let family = chi(params, n)?;
    SpectrumSet::from_blocks(params.d, family.members)
}

/// `|Q(N)| = Σ_{s ∈ χ(N)} 2^{‖s‖₁}`.
pub fn q_size(params: &MajorantParams, n: f64) -> Result<u128> {
    Ok(chi(params, n)?.iter().map(|s| 1u128 << s.l1()).sum())
}

/// `N^{1/r} (log₂ N)^{-Σb/r + d - 1}`.
pub fn q_size_prediction(params: &MajorantParams, n: f64) -> f64 {
    let exponent = -params.b_sum() / params.r + (params.d as f64 - 1.0);
    n.powf(1.0 / params.r) * n.log2().powf(exponent)
}

/// Sum over `χ^⊥(N)` with a certified bound on the part left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSum {
    /// Exact sum over `χ^⊥(N) ∩ [1, cutoff]^d`.
    pub value: f64,
    /// Upper bound on the sum over `χ^⊥(N) \ [1, cutoff]^d`.
    pub tail_bound: f64,
    pub cutoff: u32,
}

/// Target ratio `tail_bound / value` for [`tail_sum`].
pub const TAIL_REL_TARGET: f64 = 1e-6;

/// Per-coordinate factor `φ_j(s) = 2^{-a s} s^{-b_j p}` with `a = (r - β) p`.
struct TailFactor {
    a: f64,
    c: f64,
    /// From here on `s^{-c} ≤ 2^{(a/2) s}` and `φ_j` is nonincreasing.
    start: u32,
}

impl TailFactor {
    fn new(a: f64, c: f64) -> Self {
        let mut start = 1u32;
        if c < 0.0 {
            // s^{|c|} ≤ 2^{(a/2) s}  ⇔  |c| log₂ s ≤ (a/2) s, true for all large s;
            // also require that φ is past its maximum.
            let turning = (-c / (a * std::f64::consts::LN_2)).ceil().max(3.0) as u32;
            start = turning;
            // log₂ s / s is decreasing for s ≥ 3, so the first s ≥ 3 where the
            // inequality holds starts a run where it always holds.
            while (-c) * (start as f64).log2() > 0.5 * a * start as f64 {
                start += 1;
            }
        }
        Self { a, c, start }
    }

    fn value(&self, s: u32) -> f64 {
        let s = s as f64;
        let log_term = if self.c == 0.0 { 0.0 } else { self.c * s.log2() };
        (-(self.a * s + log_term)).exp2()
    }

    /// Upper bound on `Σ_{s > cutoff} φ(s)`; requires `cutoff + 1 ≥ start`.
    fn tail(&self, cutoff: u32) -> f64 {
        let first = cutoff + 1;
        if self.c >= 0.0 {
            // φ(s) ≤ φ(first) 2^{-a (s - first)}
            self.value(first) / (1.0 - (-self.a).exp2())
        } else {
            let half = 0.5 * self.a;
            (-half * first as f64).exp2() / (1.0 - (-half).exp2())
        }
    }

    /// Upper bound on `Σ_{s ≥ 1} φ(s)`.
    fn total_upper(&self, cutoff: u32) -> f64 {
        (1..=cutoff).map(|s| self.value(s)).sum::<f64>() + self.tail(cutoff)
    }
}

fn check_tail_args(params: &MajorantParams, p: f64, beta: f64) -> Result<()> {
    params.validate()?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must lie in (0, ∞), got {p}")));
    }
    if !(beta >= 0.0 && beta < params.r) {
        return Err(Error::Domain(format!(
            "β must lie in [0, r) = [0, {}), got {beta}",
            params.r
        )));
    }
    Ok(())
}

/// `log₂ (Ω(2^{-s}) 2^{β‖s‖₁})^p`.
fn log2_term(params: &MajorantParams, s: &[u32], p: f64, beta: f64) -> f64 {
    let l1: u32 = s.iter().sum();
    p * (beta * l1 as f64 - params.log2_weight(s))
}

/// Exact sum of `(Ω(2^{-s}) 2^{β‖s‖₁})^p` over `χ^⊥(N) ∩ [1, cutoff]^d`.
pub fn box_complement_sum(params: &MajorantParams, n: f64, p: f64, beta: f64, cutoff: u32) -> f64 {
    let log2_n = n.log2();
    let axes: Vec<Vec<i64>> = (0..params.d).map(|_| (1..=cutoff as i64).collect()).collect();
    let mut sum = 0.0;
    let mut s = vec![0u32; params.d];
    for k in cartesian(&axes) {
        for (dst, &src) in s.iter_mut().zip(&k) {
            *dst = src as u32;
        }
        if params.log2_weight(&s) > log2_n {
            sum += log2_term(params, &s, p, beta).exp2();
        }
    }
    sum
}

/// Sum of `(Ω(2^{-s}) 2^{β‖s‖₁})^p` over `χ^⊥(N)`, truncated to a box whose
/// size is grown until the certified tail bound is at most
/// [`TAIL_REL_TARGET`] times the computed value.
pub fn tail_sum(params: &MajorantParams, n: f64, p: f64, beta: f64) -> Result<TailSum> {
    check_tail_args(params, p, beta)?;
    let a = (params.r - beta) * p;
    let factors: Vec<TailFactor> = params.b.iter().map(|&bj| TailFactor::new(a, bj * p)).collect();
    let min_start = factors.iter().map(|f| f.start).max().unwrap_or(1);
    // The box must contain every member of χ(N) so that the outside is all χ^⊥.
    let chi_extent = chi(params, n)?
        .iter()
        .flat_map(|s| s.as_slice().iter().copied())
        .max()
        .unwrap_or(0);
    let mut cutoff = min_start.max(chi_extent + 1).max(4);
    loop {
        let value = box_complement_sum(params, n, p, beta, cutoff);
        let totals: Vec<f64> = factors.iter().map(|f| f.total_upper(cutoff)).collect();
        // Outside the box some s_j > cutoff: union bound over j.
        let tail_bound: f64 = (0..params.d)
            .map(|j| {
                factors[j].tail(cutoff)
                    * (0..params.d).filter(|&i| i != j).map(|i| totals[i]).product::<f64>()
            })
            .sum();
        if tail_bound <= TAIL_REL_TARGET * value || cutoff >= 4096 {
            return Ok(TailSum { value, tail_bound, cutoff });
        }
        cutoff = (cutoff as f64 * 1.25).ceil() as u32 + 1;
    }
}

/// Finite sum of `(Ω(2^{-s}) 2^{β‖s‖₁})^p` over `Θ(N)`.
pub fn theta_sum(params: &MajorantParams, n: f64, p: f64, beta: f64) -> Result<f64> {
    let band = theta(params, n)?;
    Ok(band
        .iter()
        .map(|s| log2_term(params, s.as_slice(), p, beta).exp2())
        .sum())
}
