//! Lower-bound witness functions `g₁ … g₇` and their ingredients.
//!
//! The index subfamilies the constructions need are instantiated
//! deterministically: `Θ₁ = Θ′(N)`, and `Θ₂` is the first `v^d` members of
//! `Θ′(N)`. Only the `Q(N)` projector is ever applied to these functions and
//! it commutes with translation, so no shift search is performed.

use num_complex::Complex64;
use serde::Serialize;

use crate::besov::BesovParams;
use crate::error::{Error, Result};
use crate::indexsets::{cartesian, theta, theta_prime, DyadicIndex, Freq, IndexFamily};
use crate::kernels::k_packet;
use crate::majorant::MajorantParams;
use crate::trigpoly::TrigPolynomial;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessConfig {
    pub omega: MajorantParams,
    pub bp: BesovParams,
    pub n: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub seed: u64,
}

impl WitnessConfig {
    pub fn new(omega: MajorantParams, bp: BesovParams, n: f64) -> Self {
        Self { omega, bp, n, c5: 1.0, c6: 1.0, c7: 1.0, seed: 0 }
    }

    fn log_n(&self) -> f64 {
        self.n.log2()
    }

    fn d(&self) -> f64 {
        self.omega.d as f64
    }
}

/// `k^s_j = 2^{s_j - 1} + 2^{s_j - 2}` for `s_j ≥ 2`, and `1` for `s_j = 1`.
pub fn ks_vector(s: &DyadicIndex) -> Freq {
    s.as_slice()
        .iter()
        .map(|&sj| if sj == 1 { 1 } else { (1i64 << (sj - 1)) + (1i64 << (sj - 2)) })
        .collect()
}

fn nonempty(family: IndexFamily, what: &str, n: f64) -> Result<IndexFamily> {
    if family.is_empty() {
        return Err(Error::Domain(format!("{what} is empty at N = {n}; increase N")));
    }
    Ok(family)
}

/// `g₁ = N^{-1} e^{i(k⁰,x)}`; by default `k⁰ = k^s` for the smallest `s ∈ Θ(N)`.
pub fn g1(cfg: &WitnessConfig, k0: Option<Freq>) -> Result<TrigPolynomial> {
    let k0 = match k0 {
        Some(k) => k,
        None => {
            let band = nonempty(theta(&cfg.omega, cfg.n)?, "Θ(N)", cfg.n)?;
            ks_vector(&band.members[0])
        }
    };
    if k0.len() != cfg.omega.d {
        return Err(Error::DimensionMismatch { expected: cfg.omega.d, got: k0.len() });
    }
    Ok(TrigPolynomial::monomial(k0).scale_real(1.0 / cfg.n))
}

/// `g₂ = Σ_{s ∈ Θ′(N)} e^{i(k^s,x)}`.
pub fn g2(cfg: &WitnessConfig) -> Result<TrigPolynomial> {
    let family = nonempty(theta_prime(&cfg.omega, cfg.n)?, "Θ′(N)", cfg.n)?;
    TrigPolynomial::from_terms(
        cfg.omega.d,
        family.iter().map(|s| (ks_vector(s), Complex64::new(1.0, 0.0))),
    )
}

pub fn g3_scale(cfg: &WitnessConfig) -> f64 {
    cfg.c5 / cfg.n * cfg.log_n().powf(-(cfg.d() - 1.0) / cfg.bp.theta)
}

/// `g₃ = C₅ N^{-1} (log N)^{-(d-1)/θ} g₂`.
pub fn g3(cfg: &WitnessConfig) -> Result<TrigPolynomial> {
    Ok(g2(cfg)?.scale_real(g3_scale(cfg)))
}

/// Parameters of the `g₄` packet layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketLayout {
    pub u: u64,
    pub v: u64,
    pub members: Vec<DyadicIndex>,
    pub centers: Vec<Vec<f64>>,
}

/// `u = 2^{⌊log₂|Θ′|/d⌋}`, `v = ⌊|Θ′|^{1/d}⌋`, the first `v^d` members of
/// `Θ′(N)`, and the centers of the `v^d` cubes of edge `2π/v`, matched in
/// lexicographic order.
pub fn packet_layout(cfg: &WitnessConfig) -> Result<PacketLayout> {
    let family = nonempty(theta_prime(&cfg.omega, cfg.n)?, "Θ′(N)", cfg.n)?;
    let d = cfg.omega.d;
    let count = family.len() as f64;
    let u = 1u64 << ((count.log2() / d as f64).floor() as u32);
    let mut v = count.powf(1.0 / d as f64).floor() as u64;
    // guard against `powf` landing just below an exact integer root
    while (v + 1).pow(d as u32) as f64 <= count {
        v += 1;
    }
    let members: Vec<DyadicIndex> = family.members[..v.pow(d as u32) as usize].to_vec();
    for s in &members {
        if u >= 1u64 << (s.min_coord() - 1) {
            return Err(Error::Domain(format!(
                "packet width u = {u} too large for s = {s}: needs u < 2^(min s_j - 1)"
            )));
        }
    }
    let edge = std::f64::consts::TAU / v as f64;
    let axes: Vec<Vec<i64>> = (0..d).map(|_| (0..v as i64).collect()).collect();
    let centers = cartesian(&axes)
        .into_iter()
        .map(|c| c.iter().map(|&cj| (cj as f64 + 0.5) * edge).collect())
        .collect();
    Ok(PacketLayout { u, v, members, centers })
}

/// `g₄ = Σ_{s ∈ Θ₂} e^{i(k^s,x)} ∏_j K_u(x_j - x^s_j)`.
pub fn g4(cfg: &WitnessConfig) -> Result<TrigPolynomial> {
    let layout = packet_layout(cfg)?;
    let mut total = TrigPolynomial::zero(cfg.omega.d);
    for (s, center) in layout.members.iter().zip(&layout.centers) {
        total = total.add(&k_packet(s, center, Some(layout.u))?)?;
    }
    Ok(total)
}

pub fn g5_scale(cfg: &WitnessConfig) -> f64 {
    let p = cfg.bp.p;
    cfg.c6 / cfg.n * cfg.log_n().powf((cfg.d() - 1.0) * (1.0 / p - 1.0 - 1.0 / cfg.bp.theta))
}

/// `g₅ = C₆ N^{-1} (log N)^{(d-1)(1/p - 1 - 1/θ)} g₄`.
pub fn g5(cfg: &WitnessConfig) -> Result<TrigPolynomial> {
    Ok(g4(cfg)?.scale_real(g5_scale(cfg)))
}

fn g6_family(cfg: &WitnessConfig) -> Result<IndexFamily> {
    let family = nonempty(theta_prime(&cfg.omega, cfg.n)?, "Θ′(N)", cfg.n)?;
    if let Some(s) = family.iter().find(|s| s.min_coord() < 2) {
        return Err(Error::Domain(format!(
            "Θ′(N) contains s = {s} with a coordinate below 2; increase N"
        )));
    }
    Ok(family)
}

/// `g₆ = Σ_{s ∈ Θ′(N)} 𝒦^s`.
pub fn g6(cfg: &WitnessConfig) -> Result<TrigPolynomial> {
    let family = g6_family(cfg)?;
    let zero = vec![0.0; cfg.omega.d];
    let mut total = TrigPolynomial::zero(cfg.omega.d);
    for s in family.iter() {
        total = total.add(&k_packet(s, &zero, None)?)?;
    }
    Ok(total)
}

/// `g₆(0) = Σ_{s ∈ Θ′(N)} ∏_j (2^{s_j-2} + 1)`.
pub fn g6_peak(cfg: &WitnessConfig) -> Result<f64> {
    Ok(g6_family(cfg)?
        .iter()
        .map(|s| s.as_slice().iter().map(|&sj| ((1u64 << (sj - 2)) + 1) as f64).product::<f64>())
        .sum())
}

/// `N^{1/r} (log N)^{-Σb/r}`.
fn block_size_prediction(cfg: &WitnessConfig) -> f64 {
    cfg.n.powf(1.0 / cfg.omega.r) * cfg.log_n().powf(-cfg.omega.b_sum() / cfg.omega.r)
}

pub fn g7_scale(cfg: &WitnessConfig) -> f64 {
    let p = cfg.bp.p;
    cfg.c7 / cfg.n
        * block_size_prediction(cfg).powf(1.0 / p - 1.0)
        * cfg.log_n().powf(-(cfg.d() - 1.0) / cfg.bp.theta)
}

/// `g₇ = C₇ N^{-1} (N^{1/r}(log N)^{-Σb/r})^{1/p - 1} (log N)^{-(d-1)/θ} g₆`.
pub fn g7(cfg: &WitnessConfig) -> Result<TrigPolynomial> {
    Ok(g6(cfg)?.scale_real(g7_scale(cfg)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessFamily {
    G1,
    G3,
    G5,
    G7,
}

impl WitnessFamily {
    pub fn build(self, cfg: &WitnessConfig) -> Result<TrigPolynomial> {
        match self {
            Self::G1 => g1(cfg, None),
            Self::G3 => g3(cfg),
            Self::G5 => g5(cfg),
            Self::G7 => g7(cfg),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::G1 => "g1",
            Self::G3 => "g3",
            Self::G5 => "g5",
            Self::G7 => "g7",
        }
    }
}

impl std::str::FromStr for WitnessFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g1" => Ok(Self::G1),
            "g3" => Ok(Self::G3),
            "g5" => Ok(Self::G5),
            "g7" => Ok(Self::G7),
            other => Err(Error::Config(format!("unknown witness family `{other}`"))),
        }
    }
}
