//! Vallée Poussin and Fejér kernels, the band filters `A_s`, and the
//! modulated Fejér packets `𝒦^s`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::ks_vector;
use crate::indexsets::{cartesian, DyadicIndex, Freq};
use crate::trigpoly::{lp_norm, QuadratureSpec, TrigPolynomial};

/// `V̂_n(k)`: 1 for `|k| ≤ n`, `1 - (|k| - n)/n` for `n < |k| ≤ 2n - 1`, else 0.
pub fn vallee_poussin_coeff(n: u64, k: i64) -> f64 {
    let a = k.unsigned_abs();
    if a <= n {
        1.0
    } else if a < 2 * n {
        (2 * n - a) as f64 / n as f64
    } else {
        0.0
    }
}

/// `K̂_n(k) = 1 - |k|/(n+1)` for `|k| ≤ n`, else 0.
pub fn fejer_coeff(n: u64, k: i64) -> f64 {
    let a = k.unsigned_abs();
    if a <= n {
        (n + 1 - a) as f64 / (n + 1) as f64
    } else {
        0.0
    }
}

fn kernel_1d(reach: i64, coeff: impl Fn(i64) -> f64) -> TrigPolynomial {
    TrigPolynomial::from_terms(
        1,
        (-reach..=reach).map(|k| (vec![k], Complex64::new(coeff(k), 0.0))),
    )
    .expect("one-dimensional terms")
}

pub fn vallee_poussin(n: u64) -> Result<TrigPolynomial> {
    if n == 0 {
        return Err(Error::Domain("Vallée Poussin order must be at least 1".into()));
    }
    Ok(kernel_1d(2 * n as i64 - 1, |k| vallee_poussin_coeff(n, k)))
}

pub fn fejer(n: u64) -> Result<TrigPolynomial> {
    if n == 0 {
        return Err(Error::Domain("Fejér order must be at least 1".into()));
    }
    Ok(kernel_1d(n as i64, |k| fejer_coeff(n, k)))
}

/// One coordinate of the `A_s` multiplier. For `s = 1` this is `V̂_2`, so the
/// band filters telescope to `V̂_{2^S}` and cover `|k| = 1`.
pub fn a_band_factor(s: u32, k: i64) -> f64 {
    if s == 1 {
        vallee_poussin_coeff(2, k)
    } else {
        vallee_poussin_coeff(1 << s, k) - vallee_poussin_coeff(1 << (s - 1), k)
    }
}

/// `Â_s(k) = ∏_j` [`a_band_factor`]`(s_j, k_j)`.
pub fn a_band_multiplier(s: &DyadicIndex, k: &[i64]) -> f64 {
    s.as_slice()
        .iter()
        .zip(k)
        .map(|(&sj, &kj)| a_band_factor(sj, kj))
        .product()
}

/// `|k|` range where the `s`-th factor can be nonzero.
fn band_reach(s: u32) -> i64 {
    if s == 1 {
        3
    } else {
        (1 << (s + 1)) - 1
    }
}

pub fn a_band_kernel(s: &DyadicIndex) -> TrigPolynomial {
    let axes: Vec<Vec<i64>> = s
        .as_slice()
        .iter()
        .map(|&sj| {
            let reach = band_reach(sj);
            (-reach..=reach).filter(|&k| a_band_factor(sj, k) != 0.0).collect()
        })
        .collect();
    TrigPolynomial::from_terms(
        s.dim(),
        cartesian(&axes).into_iter().map(|k| {
            let m = a_band_multiplier(s, &k);
            (k, Complex64::new(m, 0.0))
        }),
    )
    .expect("dimension of s")
}

/// `A_s(f) = f ∗ A_s`: multiplies each `f̂(k)` by `Â_s(k)`.
pub fn a_apply(f: &TrigPolynomial, s: &DyadicIndex) -> Result<TrigPolynomial> {
    if f.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: s.dim() });
    }
    Ok(f.multiply_coefficients(|k| a_band_multiplier(s, k)))
}

/// Indices `s_j` whose factor is nonzero at `k_j`.
pub fn bands_at(k: i64) -> Vec<u32> {
    let a = k.unsigned_abs();
    let mut out = Vec::with_capacity(3);
    if a <= 3 {
        out.push(1);
    }
    if a >= 3 {
        // 2^{s-1} < a < 2^{s+1}  ⇔  s ∈ {⌊log₂ a⌋, ⌊log₂ a⌋ + 1} ∩ [2, ∞)
        let m = 63 - a.leading_zeros();
        for s in m.max(2)..=m + 1 {
            if a_band_factor(s, k) != 0.0 {
                out.push(s);
            }
        }
    }
    out
}

/// Every `s` with `A_s(f) ≠ 0`, lexicographic.
pub fn active_bands(f: &TrigPolynomial) -> Vec<DyadicIndex> {
    let mut all: Vec<DyadicIndex> = Vec::new();
    for k in f.frequencies() {
        let axes: Vec<Vec<i64>> = k
            .iter()
            .map(|&kj| bands_at(kj).into_iter().map(i64::from).collect())
            .collect();
        all.extend(
            cartesian(&axes)
                .into_iter()
                .map(|s| DyadicIndex::new(s.into_iter().map(|x| x as u32).collect()).expect("s ≥ 1")),
        );
    }
    all.sort();
    all.dedup();
    all
}

/// `𝒦^s(x - x_c)`-style packet: `e^{i(k^s, x)} ∏_j K_{u_j}(x_j - c_j)` with
/// `u_j = 2^{s_j - 2}` unless `u_override` is given.
pub fn k_packet(s: &DyadicIndex, x_center: &[f64], u_override: Option<u64>) -> Result<TrigPolynomial> {
    let d = s.dim();
    if x_center.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x_center.len() });
    }
    let ks = ks_vector(s);
    let u: Vec<u64> = match u_override {
        Some(u) => vec![u; d],
        None => {
            if let Some(&bad) = s.as_slice().iter().find(|&&sj| sj < 2) {
                return Err(Error::Domain(format!(
                    "packet for s = {s} needs every s_j ≥ 2 (found {bad}) or an explicit u"
                )));
            }
            s.as_slice().iter().map(|&sj| 1u64 << (sj - 2)).collect()
        }
    };
    for j in 0..d {
        if ks[j] - (u[j] as i64) <= 0 {
            return Err(Error::Domain(format!(
                "packet for s = {s} with u = {} reaches frequency {} in coordinate {}",
                u[j],
                ks[j] - u[j] as i64,
                j + 1
            )));
        }
    }
    let axes: Vec<Vec<i64>> = u.iter().map(|&uj| (-(uj as i64)..=uj as i64).collect()).collect();
    let terms = cartesian(&axes).into_iter().map(|m| {
        let weight: f64 = m.iter().zip(&u).map(|(&mj, &uj)| fejer_coeff(uj, mj)).product();
        let phase: f64 = -m.iter().zip(x_center).map(|(&mj, &cj)| mj as f64 * cj).sum::<f64>();
        let k: Freq = m.iter().zip(&ks).map(|(mj, kj)| mj + kj).collect();
        (k, Complex64::from_polar(weight, phase))
    });
    TrigPolynomial::from_terms(d, terms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    ValleePoussin { n: u64 },
    Fejer { n: u64 },
    ABand { s: DyadicIndex },
    KPacket { s: DyadicIndex, center: Vec<f64>, u: Option<u64> },
}

impl KernelSpec {
    pub fn build(&self) -> Result<TrigPolynomial> {
        match self {
            Self::ValleePoussin { n } => vallee_poussin(*n),
            Self::Fejer { n } => fejer(*n),
            Self::ABand { s } => Ok(a_band_kernel(s)),
            Self::KPacket { s, center, u } => k_packet(s, center, *u),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheckRow {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Exact profile checks for all kernel families with orders up to `max_n`,
/// and the partition of unity of the band filters on `[1, S]^dims`.
pub fn selfcheck(max_n: u64, partition_s: u32, partition_dims: usize) -> Vec<SelfCheckRow> {
    let mut rows = Vec::new();
    let quad = QuadratureSpec::default();

    let mut bad = Vec::new();
    for n in 1..=max_n {
        let v = vallee_poussin(n).expect("n ≥ 1");
        let k = fejer(n).expect("n ≥ 1");
        let reach = 2 * n as i64 + 1;
        for j in -reach..=reach {
            let a = j.unsigned_abs();
            let want_v = if a <= n {
                1.0
            } else if a <= 2 * n - 1 {
                (2 * n - a) as f64 / n as f64
            } else {
                0.0
            };
            let want_k = if a <= n { (n + 1 - a) as f64 / (n + 1) as f64 } else { 0.0 };
            if v.coeff(&[j]).re != want_v || k.coeff(&[j]).re != want_k {
                bad.push(format!("n={n} k={j}"));
            }
        }
    }
    rows.push(row("kernel coefficient profiles", bad));

    let mut bad = Vec::new();
    for n in 1..=max_n {
        let v0 = vallee_poussin(n).unwrap().eval(&[0.0]).re;
        let k0 = fejer(n).unwrap().eval(&[0.0]).re;
        if (v0 - 3.0 * n as f64).abs() > 1e-9 * n as f64 {
            bad.push(format!("V_{n}(0) = {v0}"));
        }
        if (k0 - (n + 1) as f64).abs() > 1e-9 * n as f64 {
            bad.push(format!("K_{n}(0) = {k0}"));
        }
    }
    rows.push(row("V_n(0) = 3n and K_n(0) = n + 1", bad));

    let mut bad = Vec::new();
    for n in 1..=max_n {
        let k = fejer(n).unwrap();
        match lp_norm(&k, 1.0, &quad) {
            Ok(v) if (v - 1.0).abs() <= 1e-10 => {}
            other => bad.push(format!("‖K_{n}‖₁ = {other:?}")),
        }
        let g = 4 * (2 * n as usize + 1);
        let vals = k.eval_grid(&[g.next_power_of_two()], crate::trigpoly::grid::EvalPath::Auto).unwrap();
        if let Some(min) = vals.iter().map(|v| v.re).reduce(f64::min) {
            if min < -1e-12 {
                bad.push(format!("K_{n} min {min}"));
            }
        }
    }
    rows.push(row("‖K_n‖₁ = 1 and K_n ≥ 0", bad));

    let mut bad = Vec::new();
    for s in 1..=partition_s + 1 {
        let reach = band_reach(s) + 2;
        for k in -reach..=reach {
            let got = a_band_factor(s, k);
            let want = if s == 1 {
                vallee_poussin_coeff(2, k)
            } else {
                vallee_poussin_coeff(1 << s, k) - vallee_poussin_coeff(1 << (s - 1), k)
            };
            if got != want || !(0.0..=1.0).contains(&got) {
                bad.push(format!("s={s} k={k}: {got}"));
            }
        }
    }
    rows.push(row("A-band factor profiles in [0, 1]", bad));

    // Σ_{s ∈ [1,S]^d} Â_s(k) = ∏_j V̂_{2^S}(k_j) = 1 for |k_j| ≤ 2^{S-1}.
    let mut bad = Vec::new();
    let limit = 1i64 << (partition_s - 1);
    let per_coord: Vec<Vec<f64>> = (1..=limit)
        .map(|k| (1..=partition_s).map(|s| a_band_factor(s, k)).collect())
        .collect();
    for k in 1..=limit {
        let total: f64 = per_coord[(k - 1) as usize].iter().sum();
        if total != 1.0 {
            bad.push(format!("k={k}: {total}"));
        }
    }
    if partition_dims >= 2 {
        let axes: Vec<Vec<i64>> = (0..partition_dims)
            .map(|_| (1..=partition_s as i64).collect())
            .collect();
        let all_s = cartesian(&axes);
        // factors are even in k; exhaustive while the probe box stays small
        let step = if (limit as f64).powi(partition_dims as i32) <= (1u64 << 20) as f64 {
            1
        } else {
            (limit / 16).max(1)
        };
        let probe: Vec<i64> = (1..=limit).step_by(step as usize).chain([limit]).collect();
        let kaxes: Vec<Vec<i64>> = (0..partition_dims).map(|_| probe.clone()).collect();
        for k in cartesian(&kaxes) {
            let total: f64 = all_s
                .iter()
                .map(|s| {
                    s.iter()
                        .zip(&k)
                        .map(|(&sj, &kj)| a_band_factor(sj as u32, kj))
                        .product::<f64>()
                })
                .sum();
            if total != 1.0 {
                bad.push(format!("k={k:?}: {total}"));
            }
        }
    }
    rows.push(row(&format!("partition of unity, S = {partition_s}"), bad));
    rows
}

fn row(name: &str, bad: Vec<String>) -> SelfCheckRow {
    SelfCheckRow {
        name: name.to_string(),
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            "ok".into()
        } else {
            format!("{} failures, first: {}", bad.len(), bad[0])
        },
    }
}
