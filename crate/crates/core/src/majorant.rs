//! The power-logarithmic majorant
//!
//! ```text
//! Ω(t) = ∏_j t_j^r / max{1, log₂(1/t_j)}^{b_j}     (all t_j > 0)
//! Ω(t) = 0                                          (some t_j = 0)
//! ```
//!
//! together with its dyadic values `Ω(2^{-s})` and a numeric audit of the
//! modulus-of-continuity conditions and the Bari–Stechkin conditions (S), (S_l).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexsets::DyadicIndex;

/// Parameters `(d, r, b, l)` of the majorant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantParams {
    pub d: usize,
    pub r: f64,
    pub b: Vec<f64>,
    pub l: u32,
}

impl MajorantParams {
    pub fn new(d: usize, r: f64, b: Vec<f64>, l: u32) -> Result<Self> {
        let params = Self { d, r, b, l };
        params.validate()?;
        Ok(params)
    }

    /// Same `b` in every coordinate.
    pub fn isotropic(d: usize, r: f64, b: f64, l: u32) -> Result<Self> {
        Self::new(d, r, vec![b; d], l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("d must be at least 1".into()));
        }
        if self.b.len() != self.d {
            return Err(Error::Config(format!(
                "b has {} entries but d = {}",
                self.b.len(),
                self.d
            )));
        }
        if !(self.r.is_finite() && self.r > 0.0 && self.r < self.l as f64) {
            return Err(Error::Config(format!(
                "need 0 < r < l, got r = {}, l = {}",
                self.r, self.l
            )));
        }
        for (j, &bj) in self.b.iter().enumerate() {
            if !(bj.is_finite() && bj < self.r) {
                return Err(Error::Config(format!(
                    "need b_j < r, got b_{} = {} with r = {}",
                    j + 1,
                    bj,
                    self.r
                )));
            }
        }
        Ok(())
    }

    /// Weaker check sufficient for the index families: the dyadic weights
    /// stay well defined for any `r > 0` and `l ≥ 1`.
    pub fn validate_indexing(&self) -> Result<()> {
        if self.d == 0 || self.b.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: self.b.len() });
        }
        if !(self.r.is_finite() && self.r > 0.0) || self.l == 0 {
            return Err(Error::Config(format!("need r > 0 and l ≥ 1, got r = {}, l = {}", self.r, self.l)));
        }
        if self.b.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config("b must be finite".into()));
        }
        Ok(())
    }

    pub fn b_sum(&self) -> f64 {
        self.b.iter().sum()
    }

    /// One-dimensional factor `t^r / max{1, log₂(1/t)}^{b_j}`.
    pub fn factor(&self, j: usize, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let log_factor = (-t.log2()).max(1.0);
        t.powf(self.r) / log_factor.powf(self.b[j])
    }

    /// `log₂` of the dyadic weight `2^{r s} s^{b_j}` of coordinate `j`.
    pub fn log2_weight_1d(&self, j: usize, s: u32) -> f64 {
        let s = s as f64;
        let log_term = if self.b[j] == 0.0 { 0.0 } else { self.b[j] * s.log2() };
        self.r * s + log_term
    }

    /// `log₂ ∏_j 2^{r s_j} s_j^{b_j} = -log₂ Ω(2^{-s})`.
    pub fn log2_weight(&self, s: &[u32]) -> f64 {
        s.iter()
            .enumerate()
            .map(|(j, &sj)| self.log2_weight_1d(j, sj))
            .sum()
    }
}

/// `Ω(t)` for a point `t` with nonnegative coordinates.
pub fn omega_eval(params: &MajorantParams, t: &[f64]) -> Result<f64> {
    params.validate()?;
    check_len(params, t.len())?;
    if let Some(bad) = t.iter().find(|&&tj| !(tj >= 0.0) || !tj.is_finite()) {
        return Err(Error::Domain(format!("t_j must be finite and nonnegative, got {bad}")));
    }
    if t.iter().any(|&tj| tj == 0.0) {
        return Ok(0.0);
    }
    Ok(t.iter()
        .enumerate()
        .map(|(j, &tj)| params.factor(j, tj))
        .product())
}

/// `Ω(2^{-s}) = ∏_j 2^{-r s_j} s_j^{-b_j}`.
pub fn omega_dyadic(params: &MajorantParams, s: &DyadicIndex) -> Result<f64> {
    params.validate()?;
    check_len(params, s.dim())?;
    Ok((-params.log2_weight(s.as_slice())).exp2())
}

fn check_len(params: &MajorantParams, got: usize) -> Result<()> {
    if got != params.d {
        return Err(Error::DimensionMismatch {
            expected: params.d,
            got,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AxiomKind {
    Positivity,
    Monotonicity,
    Scaling,
    AlmostIncreasing,
    AlmostDecreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomViolation {
    pub kind: AxiomKind,
    pub coordinate: usize,
    /// Witness points as exponents: `τ = 2^{-m}`.
    pub witness: Vec<f64>,
    pub detail: String,
}

/// Result of [`verify_majorant_axioms`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomAudit {
    /// Smallest `C₁` with `φ(τ₁)/τ₁^α ≤ C₁ φ(τ₂)/τ₂^α` on the probe grid.
    pub c1: f64,
    /// Largest `C₂` with `φ(τ₁)/τ₁^γ ≥ C₂ φ(τ₂)/τ₂^γ` on the probe grid.
    pub c2: f64,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomAudit {
    pub fn all_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits conditions 1–3 and (S), (S_l) on the dyadic points `τ = 2^{-m}`,
/// `0 ≤ m ≤ probe_depth`, one coordinate at a time with the others held at `1/2`.
///
/// (S) or (S_l) is flagged when the required constant is still growing at the
/// deepest probe, i.e. the extremal pair sits on the boundary `m = probe_depth`
/// and the constant is strictly worse than at `probe_depth - 1`.
pub fn verify_majorant_axioms(
    params: &MajorantParams,
    alpha: f64,
    gamma: f64,
    probe_depth: u32,
) -> Result<AxiomAudit> {
    params.validate()?;
    if !(alpha > 0.0) {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    if !(gamma > 0.0 && gamma < params.l as f64) {
        return Err(Error::Config(format!(
            "gamma must lie in (0, l), got {gamma} with l = {}",
            params.l
        )));
    }
    if probe_depth < 2 {
        return Err(Error::Config("probe_depth must be at least 2".into()));
    }

    let mut violations = Vec::new();
    let mut c1: f64 = 0.0;
    let mut c2 = f64::INFINITY;
    let rel = 1e-12;

    for j in 0..params.d {
        // Other coordinates are fixed at 1/2; Ω is a product, so the fixed
        // part is a positive constant that cancels in every ratio below.
        let eval = |tj: f64| -> f64 {
            let mut t = vec![0.5; params.d];
            t[j] = tj;
            omega_eval(params, &t).expect("validated parameters")
        };
        let tau = |m: u32| (-(m as f64)).exp2();

        for m in 0..=probe_depth {
            let v = eval(tau(m));
            if !(v > 0.0) {
                violations.push(AxiomViolation {
                    kind: AxiomKind::Positivity,
                    coordinate: j,
                    witness: vec![m as f64],
                    detail: format!("Ω = {v} at τ = 2^-{m}"),
                });
            }
        }
        if eval(0.0) != 0.0 {
            violations.push(AxiomViolation {
                kind: AxiomKind::Positivity,
                coordinate: j,
                witness: vec![f64::INFINITY],
                detail: "Ω nonzero at t_j = 0".into(),
            });
        }

        // Condition 2: nondecreasing along the dyadic grid (m decreasing).
        for m in 1..=probe_depth {
            let (small, large) = (eval(tau(m)), eval(tau(m - 1)));
            if small > large * (1.0 + rel) {
                violations.push(AxiomViolation {
                    kind: AxiomKind::Monotonicity,
                    coordinate: j,
                    witness: vec![m as f64, (m - 1) as f64],
                    detail: format!("Ω(2^-{m}) = {small} > Ω(2^-{}) = {large}", m - 1),
                });
            }
        }

        // Condition 3: Ω(m t) ≤ m^l Ω(t) for integer multipliers m ≤ 2^depth.
        let max_mult = 1u64 << probe_depth.min(16);
        for m in 0..=probe_depth {
            let t = tau(m);
            let base = eval(t);
            for mult in 1..=max_mult {
                let lhs = eval(mult as f64 * t);
                let rhs = (mult as f64).powi(params.l as i32) * base;
                if lhs > rhs * (1.0 + rel) {
                    violations.push(AxiomViolation {
                        kind: AxiomKind::Scaling,
                        coordinate: j,
                        witness: vec![m as f64, mult as f64],
                        detail: format!("Ω({mult}·2^-{m}) = {lhs} > {mult}^l Ω(2^-{m}) = {rhs}"),
                    });
                    break;
                }
            }
        }

        // (S) and (S_l): scan all pairs τ₁ ≤ τ₂, i.e. m₁ ≥ m₂.
        let scan = |depth: u32, exponent: f64, want_max: bool| -> (f64, u32, u32) {
            let g = |m: u32| eval(tau(m)) / tau(m).powf(exponent);
            let mut best = if want_max { f64::NEG_INFINITY } else { f64::INFINITY };
            let mut arg = (0, 0);
            for m1 in 0..=depth {
                for m2 in 0..=m1 {
                    let ratio = g(m1) / g(m2);
                    let better = if want_max { ratio > best } else { ratio < best };
                    if better {
                        best = ratio;
                        arg = (m1, m2);
                    }
                }
            }
            (best, arg.0, arg.1)
        };

        let (s_const, m1, m2) = scan(probe_depth, alpha, true);
        let (s_prev, _, _) = scan(probe_depth - 1, alpha, true);
        c1 = c1.max(s_const);
        if m1 == probe_depth && s_const > s_prev * (1.0 + 1e-9) {
            violations.push(AxiomViolation {
                kind: AxiomKind::AlmostIncreasing,
                coordinate: j,
                witness: vec![m1 as f64, m2 as f64],
                detail: format!(
                    "φ/τ^α ratio {s_const} still growing at depth {probe_depth} (was {s_prev})"
                ),
            });
        }

        let (sl_const, m1, m2) = scan(probe_depth, gamma, false);
        let (sl_prev, _, _) = scan(probe_depth - 1, gamma, false);
        c2 = c2.min(sl_const);
        if m1 == probe_depth && sl_const < sl_prev * (1.0 - 1e-9) {
            violations.push(AxiomViolation {
                kind: AxiomKind::AlmostDecreasing,
                coordinate: j,
                witness: vec![m1 as f64, m2 as f64],
                detail: format!(
                    "φ/τ^γ ratio {sl_const} still shrinking at depth {probe_depth} (was {sl_prev})"
                ),
            });
        }
    }

    Ok(AxiomAudit { c1, c2, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(r: f64, b: f64, l: u32) -> MajorantParams {
        MajorantParams::isotropic(1, r, b, l).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MajorantParams::new(0, 1.0, vec![], 2).is_err());
        assert!(MajorantParams::new(1, 2.0, vec![0.0], 2).is_err());
        assert!(MajorantParams::new(1, 1.0, vec![1.0], 2).is_err());
        assert!(MajorantParams::new(2, 1.0, vec![0.0], 2).is_err());
        assert!(MajorantParams::new(1, 1.0, vec![-3.0], 2).is_ok());
    }

    #[test]
    fn eval_examples() {
        let p = p1(1.0, 0.0, 2);
        assert_eq!(omega_eval(&p, &[0.0]).unwrap(), 0.0);
        assert_eq!(omega_eval(&p, &[0.125]).unwrap(), 0.125);
        let p2 = MajorantParams::isotropic(2, 1.0, 0.5, 2).unwrap();
        let v = omega_eval(&p2, &[0.25, 1.0 / 16.0]).unwrap();
        assert!((v - (-7.5f64).exp2()).abs() < 1e-15);
        assert!((v - 5.524e-3).abs() < 1e-6);
        assert!(omega_eval(&p, &[-0.1]).is_err());
    }

    #[test]
    fn dyadic_examples() {
        let p = p1(1.0, 0.0, 2);
        assert_eq!(omega_dyadic(&p, &DyadicIndex::new(vec![3]).unwrap()).unwrap(), 0.125);
        let p2 = MajorantParams::isotropic(2, 1.0, 0.5, 2).unwrap();
        let v = omega_dyadic(&p2, &DyadicIndex::new(vec![2, 4]).unwrap()).unwrap();
        assert!((v - (-7.5f64).exp2()).abs() < 1e-15);
        let p3 = MajorantParams::isotropic(2, 2.0, 0.0, 3).unwrap();
        assert_eq!(omega_dyadic(&p3, &DyadicIndex::new(vec![1, 1]).unwrap()).unwrap(), 1.0 / 16.0);
    }

    #[test]
    fn audit_pure_power() {
        let audit = verify_majorant_axioms(&p1(1.0, 0.0, 2), 0.5, 1.5, 10).unwrap();
        assert!(audit.all_pass(), "{:?}", audit.violations);
        assert!((audit.c1 - 1.0).abs() < 1e-12);
        assert!((audit.c2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn audit_log_factor_passes() {
        let audit = verify_majorant_axioms(&p1(1.0, 0.5, 2), 0.5, 1.5, 10).unwrap();
        assert!(audit.all_pass(), "{:?}", audit.violations);
        assert!(audit.c1.is_finite() && audit.c1 > 0.0);
        assert!(audit.c2.is_finite() && audit.c2 > 0.0);
    }

    #[test]
    fn audit_flags_alpha_at_order_with_negative_b() {
        // φ/τ^r = log₂(1/τ)^{|b|} grows without bound as τ → 0.
        let audit = verify_majorant_axioms(&p1(1.0, -0.5, 2), 1.0, 1.5, 10).unwrap();
        assert!(audit
            .violations
            .iter()
            .any(|v| v.kind == AxiomKind::AlmostIncreasing));
    }

    #[test]
    fn audit_flags_gamma_at_order_with_positive_b() {
        // φ/τ^r = log₂(1/τ)^{-b} decays to 0 as τ → 0, so C₂ → 0.
        let audit = verify_majorant_axioms(&p1(1.0, 0.5, 2), 0.5, 1.0, 10).unwrap();
        assert!(audit
            .violations
            .iter()
            .any(|v| v.kind == AxiomKind::AlmostDecreasing));
        // With b > 0 and α = r the ratio is increasing, so (S) holds.
        let audit = verify_majorant_axioms(&p1(1.0, 0.5, 2), 1.0, 1.5, 10).unwrap();
        assert!(!audit
            .violations
            .iter()
            .any(|v| v.kind == AxiomKind::AlmostIncreasing));
    }

    #[test]
    fn b_zero_is_pure_power() {
        let p = MajorantParams::isotropic(3, 1.25, 0.0, 2).unwrap();
        let t = [0.3, 0.01, 0.77];
        let expected: f64 = t.iter().map(|x: &f64| x.powf(1.25)).product();
        assert_eq!(omega_eval(&p, &t).unwrap(), expected);
    }
}
