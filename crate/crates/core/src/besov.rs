//! `B^Ω_{p,θ}` norms, computed from the dyadic blocks `δ_s(f)` or from the
//! band-filtered pieces `A_s(f)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indexsets::DyadicIndex;
use crate::kernels::{a_apply, active_bands};
use crate::majorant::MajorantParams;
use crate::trigpoly::{lp_norm, QuadratureSpec, TrigPolynomial};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesovParams {
    pub p: f64,
    pub theta: f64,
}

impl BesovParams {
    pub fn new(p: f64, theta: f64) -> Result<Self> {
        let bp = Self { p, theta };
        bp.validate()?;
        Ok(bp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(Error::Config(format!("p must be in [1, ∞], got {}", self.p)));
        }
        if !(self.theta >= 1.0) {
            return Err(Error::Config(format!("θ must be in [1, ∞], got {}", self.theta)));
        }
        Ok(())
    }

    /// Blocks form for `1 < p < ∞`, band-filter form at the endpoints.
    pub fn default_form(&self) -> NormForm {
        if self.p > 1.0 && self.p.is_finite() {
            NormForm::Blocks
        } else {
            NormForm::ValleePoussin
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormForm {
    /// `‖δ_s(f)‖_p` pieces.
    Blocks,
    /// `‖A_s(f)‖_p` pieces.
    ValleePoussin,
}

fn check_class(f: &TrigPolynomial, omega: &MajorantParams) -> Result<()> {
    omega.validate()?;
    if f.dim() != omega.d {
        return Err(Error::DimensionMismatch { expected: omega.d, got: f.dim() });
    }
    if let Some(k) = f.zero_coordinate_frequency() {
        return Err(Error::Domain(format!(
            "frequency {k:?} has a zero coordinate; the class is zero-mean in every variable"
        )));
    }
    Ok(())
}

/// `(s, ‖piece_s‖_p)` for every nonzero piece, lexicographic in `s`.
pub fn piece_norms(
    f: &TrigPolynomial,
    omega: &MajorantParams,
    p: f64,
    form: NormForm,
    quad: &QuadratureSpec,
) -> Result<Vec<(DyadicIndex, f64)>> {
    check_class(f, omega)?;
    let indices = match form {
        NormForm::Blocks => f.occupied_blocks(),
        NormForm::ValleePoussin => active_bands(f),
    };
    indices
        .into_par_iter()
        .map(|s| {
            let piece = match form {
                NormForm::Blocks => f.block_extract(&s),
                NormForm::ValleePoussin => a_apply(f, &s)?,
            };
            let norm = lp_norm(&piece, p, quad)?;
            Ok((s, norm))
        })
        .collect()
}

/// `(Σ_s Ω^{-θ}(2^{-s}) n_s^θ)^{1/θ}`, or the sup for `θ = ∞`. Accumulates in
/// the given order.
pub fn combine(omega: &MajorantParams, pieces: &[(DyadicIndex, f64)], theta: f64) -> f64 {
    let weighted = pieces.iter().map(|(s, n)| {
        // Ω^{-1}(2^{-s}) n, formed in the log domain to avoid overflow
        if *n == 0.0 {
            0.0
        } else {
            (omega.log2_weight(s.as_slice()) + n.log2()).exp2()
        }
    });
    if theta.is_infinite() {
        weighted.fold(0.0, f64::max)
    } else {
        weighted.map(|w| w.powf(theta)).sum::<f64>().powf(1.0 / theta)
    }
}

pub fn besov_norm_blocks(
    f: &TrigPolynomial,
    omega: &MajorantParams,
    bp: &BesovParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    bp.validate()?;
    let pieces = piece_norms(f, omega, bp.p, NormForm::Blocks, quad)?;
    Ok(combine(omega, &pieces, bp.theta))
}

pub fn besov_norm_vp(
    f: &TrigPolynomial,
    omega: &MajorantParams,
    bp: &BesovParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    bp.validate()?;
    let pieces = piece_norms(f, omega, bp.p, NormForm::ValleePoussin, quad)?;
    Ok(combine(omega, &pieces, bp.theta))
}

/// Norm in the form [`BesovParams::default_form`] selects.
pub fn besov_norm(
    f: &TrigPolynomial,
    omega: &MajorantParams,
    bp: &BesovParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    match bp.default_form() {
        NormForm::Blocks => besov_norm_blocks(f, omega, bp, quad),
        NormForm::ValleePoussin => besov_norm_vp(f, omega, bp, quad),
    }
}

/// `f / ‖f‖_{B^Ω_{p,θ}}`.
pub fn normalize_to_ball(
    f: &TrigPolynomial,
    omega: &MajorantParams,
    bp: &BesovParams,
    quad: &QuadratureSpec,
) -> Result<TrigPolynomial> {
    if f.is_zero() {
        return Err(Error::Domain("cannot normalize the zero function".into()));
    }
    let norm = besov_norm(f, omega, bp, quad)?;
    Ok(f.scale_real(1.0 / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexsets::{rho, theta as theta_family};
    use crate::majorant::omega_dyadic;
    use crate::trigpoly::{random_in_spectrum, CoefficientLaw};
    use num_complex::Complex64;

    fn omega1() -> MajorantParams {
        MajorantParams::isotropic(1, 1.0, 0.0, 2).unwrap()
    }

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn single_exponential_norm() {
        let omega = MajorantParams::new(2, 1.5, vec![0.5, 0.25], 2).unwrap();
        let s = DyadicIndex::new(vec![3, 2]).unwrap();
        let f = TrigPolynomial::monomial(vec![-5, 3]);
        let expected = 1.0 / omega_dyadic(&omega, &s).unwrap();
        for theta in [1.0, 2.0, 3.5, f64::INFINITY] {
            for p in [1.5, 2.0, 4.0] {
                let bp = BesovParams::new(p, theta).unwrap();
                let v = besov_norm_blocks(&f, &omega, &bp, &quad()).unwrap();
                assert!((v - expected).abs() < 1e-12 * expected);
            }
        }
    }

    #[test]
    fn two_block_example() {
        let f = TrigPolynomial::from_terms(
            1,
            vec![(vec![1], Complex64::new(1.0, 0.0)), (vec![2], Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        let bp = BesovParams::new(2.0, 1.0).unwrap();
        assert!((besov_norm_blocks(&f, &omega1(), &bp, &quad()).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn vp_norm_at_band_peak() {
        let omega = omega1();
        for s in 2..8u32 {
            let k = 1i64 << s;
            let f = TrigPolynomial::monomial(vec![k]);
            // Band s+1 vanishes at k = 2^s: V̂_{2^{s+1}}(2^s) = V̂_{2^s}(2^s) = 1.
            let m = crate::kernels::a_band_factor(s + 1, k);
            assert_eq!(m, 0.0);
            for theta in [1.0, 2.0, f64::INFINITY] {
                let bp = BesovParams::new(2.0, theta).unwrap();
                let w_s = 1.0 / omega_dyadic(&omega, &DyadicIndex::new(vec![s]).unwrap()).unwrap();
                let w_next = 1.0 / omega_dyadic(&omega, &DyadicIndex::new(vec![s + 1]).unwrap()).unwrap();
                let expected = if theta.is_infinite() {
                    w_s.max(w_next * m)
                } else {
                    (w_s.powf(theta) + (w_next * m).powf(theta)).powf(1.0 / theta)
                };
                let v = besov_norm_vp(&f, &omega, &bp, &quad()).unwrap();
                assert!((v - expected).abs() < 1e-12 * expected);
            }
        }
    }

    #[test]
    fn homogeneity() {
        let omega = MajorantParams::isotropic(2, 1.0, 0.0, 2).unwrap();
        let set = rho(&DyadicIndex::new(vec![2, 3]).unwrap());
        let f = random_in_spectrum(&set, 3, CoefficientLaw::Gaussian).unwrap();
        let c = Complex64::new(-1.5, 2.0);
        for (p, theta) in [(2.0, 1.0), (1.5, 2.0), (1.0, f64::INFINITY), (f64::INFINITY, 2.0)] {
            let bp = BesovParams::new(p, theta).unwrap();
            let a = besov_norm(&f, &omega, &bp, &quad()).unwrap();
            let b = besov_norm(&f.scale(c), &omega, &bp, &quad()).unwrap();
            assert!((b - 2.5 * a).abs() < 1e-6 * b, "p = {p}: {a} {b}");
        }
    }

    #[test]
    fn rejects_zero_coordinate() {
        let f = TrigPolynomial::monomial(vec![0, 2]);
        let omega = MajorantParams::isotropic(2, 1.0, 0.0, 2).unwrap();
        let err = besov_norm_blocks(&f, &omega, &BesovParams::new(2.0, 2.0).unwrap(), &quad()).unwrap_err();
        assert!(err.to_string().contains("[0, 2]"), "{err}");
    }

    #[test]
    fn normalize_examples() {
        let omega = MajorantParams::isotropic(2, 1.5, 0.25, 2).unwrap();
        let bp = BesovParams::new(2.0, 2.0).unwrap();
        let f = TrigPolynomial::monomial(vec![5, -2]);
        let g = normalize_to_ball(&f, &omega, &bp, &quad()).unwrap();
        let s = DyadicIndex::new(vec![3, 2]).unwrap();
        let want = omega_dyadic(&omega, &s).unwrap();
        assert!((g.coeff(&[5, -2]).re - want).abs() < 1e-15);
        let again = normalize_to_ball(&g, &omega, &bp, &quad()).unwrap();
        assert!((again.coeff(&[5, -2]) - g.coeff(&[5, -2])).norm() < 1e-12 * want);
        assert!(normalize_to_ball(&TrigPolynomial::zero(2), &omega, &bp, &quad()).is_err());
    }

    #[test]
    fn g1_norm_in_band() {
        let omega = MajorantParams::isotropic(2, 1.0, 0.0, 2).unwrap();
        let n = 512.0;
        for s in theta_family(&omega, n).unwrap().iter() {
            let k: Vec<i64> = s.as_slice().iter().map(|&sj| 1i64 << (sj - 1)).collect();
            let g = TrigPolynomial::monomial(k).scale_real(1.0 / n);
            for theta in [1.0, 3.0] {
                let v = besov_norm_blocks(&g, &omega, &BesovParams::new(2.0, theta).unwrap(), &quad()).unwrap();
                assert!(v > 1.0 && v <= 4.0 + 1e-12, "{v}");
            }
        }
    }
}
