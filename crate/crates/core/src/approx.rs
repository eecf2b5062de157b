//! The orthoprojector onto `Q(N)`, rate formulas, experiments and rate fits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::besov::{normalize_to_ball, BesovParams};
use crate::error::{Error, Result};
use crate::extremal::{WitnessConfig, WitnessFamily};
use crate::indexsets::{chi, q_size, rho, theta, DyadicIndex, Freq, DEFAULT_FREQUENCY_CAP};
use crate::majorant::{omega_dyadic, MajorantParams};
use crate::rng::stream_rng;
use crate::trigpoly::{draw_coefficient, lp_norm, CoefficientLaw, QuadratureSpec, TrigPolynomial};

/// Fourier partial sum over `Q(N)`: keeps the frequencies whose block lies in `χ(N)`.
pub fn project_q(f: &TrigPolynomial, omega: &MajorantParams, n: f64) -> TrigPolynomial {
    let log2_n = n.log2();
    f.restrict(|k| match DyadicIndex::of_frequency(k) {
        Some(s) => n > 0.0 && omega.log2_weight(s.as_slice()) <= log2_n,
        None => false,
    })
}

/// `‖f − P_{Q(N)} f‖_q`.
pub fn approx_error(
    f: &TrigPolynomial,
    omega: &MajorantParams,
    n: f64,
    q: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let residual = f.sub(&project_q(f, omega, n))?;
    lp_norm(&residual, q, quad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeTag {
    T31,
    T32,
    T33,
}

/// Order `M^{-ρ} (log₂ M)^{λ}` of the projection error for one parameter regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRegime {
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    pub tag: RegimeTag,
    pub rho: f64,
    pub lambda: f64,
}

fn pos(a: f64) -> f64 {
    a.max(0.0)
}

impl RateRegime {
    /// Regime for `(p, q, θ)`; `p = 2, q ≤ 2` resolves to `T31`.
    pub fn select(omega: &MajorantParams, p: f64, q: f64, theta: f64) -> Result<Self> {
        if q.is_infinite() {
            return Self::new(RegimeTag::T33, omega, p, q, theta);
        }
        Self::new(RegimeTag::T31, omega, p, q, theta)
            .or_else(|_| Self::new(RegimeTag::T32, omega, p, q, theta))
            .map_err(|_| {
                Error::UnsupportedRegime(format!(
                    "no rate theorem covers p = {p}, q = {q}, θ = {theta}"
                ))
            })
    }

    pub fn new(tag: RegimeTag, omega: &MajorantParams, p: f64, q: f64, theta: f64) -> Result<Self> {
        omega.validate()?;
        let r = omega.r;
        let dm1 = omega.d as f64 - 1.0;
        let bsum = omega.b_sum();
        let theta_ok = (1.0..f64::INFINITY).contains(&theta);
        let (ok, rho, lambda) = match tag {
            RegimeTag::T31 => (
                theta_ok && 1.0 <= q && q <= p && p.is_finite() && p >= 2.0,
                r,
                -bsum + dm1 * (r + pos(0.5 - 1.0 / theta)),
            ),
            RegimeTag::T32 => (
                theta_ok && 1.0 <= q && q <= p && p <= 2.0 && !(p == 1.0 && q == 1.0),
                r,
                -bsum + dm1 * (r + pos(1.0 / p - 1.0 / theta)),
            ),
            RegimeTag::T33 => (
                theta_ok && q.is_infinite() && p >= 1.0 && p.is_finite() && r > 1.0 / p,
                r - 1.0 / p,
                -bsum + dm1 * (r + 1.0 - 1.0 / p - 1.0 / theta),
            ),
        };
        if !ok {
            return Err(Error::UnsupportedRegime(format!(
                "{tag:?} does not cover p = {p}, q = {q}, θ = {theta}, r = {r}"
            )));
        }
        Ok(Self { p, q, theta, tag, rho, lambda })
    }

    /// `M^{-ρ} (log₂ M)^{λ}`, defined for `M ≥ 4`.
    pub fn rate(&self, m: f64) -> Result<f64> {
        if !(m >= 4.0) {
            return Err(Error::Domain(format!("rate formulas need M ≥ 4, got {m}")));
        }
        Ok(m.powf(-self.rho) * m.log2().powf(self.lambda))
    }
}

pub fn theoretical_rate(regime: &RateRegime, m: f64) -> Result<f64> {
    regime.rate(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RandomBall,
    Shell,
    G3,
    G5,
    G7,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Self::RandomBall => "random_ball",
            Self::Shell => "shell",
            Self::G3 => "g3",
            Self::G5 => "g5",
            Self::G7 => "g7",
        }
    }

    fn witness(self) -> Option<WitnessFamily> {
        match self {
            Self::G3 => Some(WitnessFamily::G3),
            Self::G5 => Some(WitnessFamily::G5),
            Self::G7 => Some(WitnessFamily::G7),
            _ => None,
        }
    }

    /// Checks that `(p, q, θ)` is the regime this family is a witness for.
    pub fn check_regime(self, regime: &RateRegime) -> Result<()> {
        let (p, q, theta) = (regime.p, regime.q, regime.theta);
        let ok = match self {
            Self::RandomBall | Self::Shell => true,
            Self::G3 => regime.tag == RegimeTag::T31 && theta >= 2.0,
            Self::G5 => q <= p && p <= 2.0 && theta >= p && regime.tag != RegimeTag::T33,
            Self::G7 => regime.tag == RegimeTag::T33,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedRegime(format!(
                "family {} is not a witness for p = {p}, q = {q}, θ = {theta}",
                self.name()
            )))
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_ball" => Ok(Self::RandomBall),
            "shell" => Ok(Self::Shell),
            "g3" => Ok(Self::G3),
            "g5" => Ok(Self::G5),
            "g7" => Ok(Self::G7),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub n: f64,
    pub m: u64,
    pub error: f64,
    pub theory: f64,
    pub ratio: f64,
}

/// `count` points from `n_min` to `n_max`, equally spaced in `log₂`.
pub fn geometric_grid(n_min: f64, n_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(n_min >= 1.0 && n_max > n_min) || count < 2 {
        return Err(Error::Config(format!(
            "need 1 ≤ n_min < n_max and at least 2 points, got [{n_min}, {n_max}] with {count}"
        )));
    }
    let (a, b) = (n_min.log2(), n_max.log2());
    Ok((0..count)
        .map(|i| {
            let e = a + (b - a) * i as f64 / (count - 1) as f64;
            if i == count - 1 {
                n_max
            } else {
                e.exp2()
            }
        })
        .collect())
}

/// `Σ_{s ∈ blocks} w_s Ω(2^{-s}) u_s` with `u_s` random on `ρ(s)` and `‖u_s‖_p = 1`.
fn block_mixture<R: Rng>(
    rng: &mut R,
    omega: &MajorantParams,
    p: f64,
    blocks: &[DyadicIndex],
    random_weights: bool,
    quad: &QuadratureSpec,
) -> Result<TrigPolynomial> {
    let d = omega.d;
    let mut terms: Vec<(Freq, Complex64)> = Vec::new();
    for s in blocks {
        let freqs = rho(s).materialize(DEFAULT_FREQUENCY_CAP)?;
        let block: Vec<(Freq, Complex64)> = freqs
            .into_iter()
            .map(|k| (k, draw_coefficient(rng, CoefficientLaw::Gaussian)))
            .collect();
        let u = TrigPolynomial::from_terms(d, block)?;
        let w = if random_weights { rng.random::<f64>() } else { 1.0 };
        let scale = w * omega_dyadic(omega, s)? / lp_norm(&u, p, quad)?;
        terms.extend(u.iter().map(|(k, c)| (k.clone(), c * scale)));
    }
    TrigPolynomial::from_terms(d, terms)
}

/// Description of a rate experiment over a grid of `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateExperiment {
    pub family: Family,
    pub omega: MajorantParams,
    pub bp: BesovParams,
    pub q: f64,
    pub n_grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub quad: QuadratureSpec,
}

impl RateExperiment {
    pub fn regime(&self) -> Result<RateRegime> {
        RateRegime::select(&self.omega, self.bp.p, self.q, self.bp.theta)
    }

    fn validate(&self) -> Result<RateRegime> {
        self.omega.validate()?;
        self.bp.validate()?;
        if self.n_grid.len() < 5 {
            return Err(Error::Config(format!(
                "the N grid needs at least 5 points, got {}",
                self.n_grid.len()
            )));
        }
        if self.n_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("the N grid must be strictly increasing".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        let regime = self.regime()?;
        self.family.check_regime(&regime)?;
        Ok(regime)
    }

    /// One normalized function of the family at `N`.
    pub fn sample(&self, n_index: usize, sample_index: usize) -> Result<TrigPolynomial> {
        let n = self.n_grid[n_index];
        if let Some(w) = self.family.witness() {
            let mut cfg = WitnessConfig::new(self.omega.clone(), self.bp, n);
            cfg.seed = self.seed;
            return w.build(&cfg);
        }
        let mut rng = stream_rng(self.seed, &[n_index as u64, sample_index as u64]);
        let (blocks, random_weights) = match self.family {
            Family::Shell => (theta(&self.omega, n)?.members, false),
            _ => {
                let outer = n * (self.omega.l as f64).exp2();
                let needed = q_size(&self.omega, outer)?;
                if needed > DEFAULT_FREQUENCY_CAP as u128 {
                    return Err(Error::Capacity {
                        what: "random ball spectrum",
                        needed,
                        cap: DEFAULT_FREQUENCY_CAP as u128,
                    });
                }
                (chi(&self.omega, outer)?.members, true)
            }
        };
        if blocks.is_empty() {
            return Err(Error::Domain(format!("no blocks available at N = {n}")));
        }
        let f = block_mixture(&mut rng, &self.omega, self.bp.p, &blocks, random_weights, &self.quad)?;
        normalize_to_ball(&f, &self.omega, &self.bp, &self.quad)
    }

    /// For each `N`: `M = |Q(N)|`, the largest error over the samples, the
    /// theoretical rate and their ratio. Deterministic in `seed`.
    pub fn run(&self) -> Result<Vec<ExperimentRecord>> {
        let regime = self.validate()?;
        let samples = if self.family.witness().is_some() { 1 } else { self.samples };
        let jobs: Vec<(usize, usize)> = (0..self.n_grid.len())
            .flat_map(|i| (0..samples).map(move |j| (i, j)))
            .collect();
        let errors: Vec<f64> = jobs
            .par_iter()
            .map(|&(i, j)| {
                let f = self.sample(i, j)?;
                approx_error(&f, &self.omega, self.n_grid[i], self.q, &self.quad)
            })
            .collect::<Result<_>>()?;
        self.n_grid
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let error = errors[i * samples..(i + 1) * samples].iter().cloned().fold(0.0, f64::max);
                let m = q_size(&self.omega, n)?;
                let theory = regime.rate(m as f64)?;
                Ok(ExperimentRecord { n, m: m as u64, error, theory, ratio: error / theory })
            })
            .collect()
    }
}

/// Condition number above which the `log₂ log₂ M` coefficient is flagged.
pub const COLLINEARITY_THRESHOLD: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub rho_hat: f64,
    pub lambda_hat: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub condition_number: f64,
    pub collinear: bool,
    /// `-Δlog₂ error / Δlog₂ M` over the two largest `M`.
    pub two_point_slope: f64,
}

/// Least squares of `log₂ error` on `(1, log₂ M, log₂ log₂ M)`.
pub fn fit_rate(records: &[ExperimentRecord]) -> Result<RateFit> {
    if records.len() < 5 {
        return Err(Error::Domain(format!("need at least 5 records, got {}", records.len())));
    }
    if records.iter().any(|r| !(r.error > 0.0 && r.m >= 4)) {
        return Err(Error::Domain("records need positive error and M ≥ 4".into()));
    }
    let lm: Vec<f64> = records.iter().map(|r| (r.m as f64).log2()).collect();
    let lo = lm.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lm.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 3.0 {
        return Err(Error::Domain(format!(
            "M spans {:.2} octaves; at least 3 are needed",
            hi - lo
        )));
    }
    let n = records.len();
    let x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => lm[i],
        _ => lm[i].log2(),
    });
    let y = DVector::from_iterator(n, records.iter().map(|r| r.error.log2()));
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition_number = smax / smin;
    let beta = svd
        .solve(&y, 1e-12 * smax)
        .map_err(|e| Error::Domain(format!("least squares failed: {e}")))?;
    let resid = &y - &x * &beta;
    let residual_rms = (resid.norm_squared() / n as f64).sqrt();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lm[a].total_cmp(&lm[b]));
    let (a, b) = (order[n - 2], order[n - 1]);
    let two_point_slope = if lm[b] > lm[a] {
        -(y[b] - y[a]) / (lm[b] - lm[a])
    } else {
        f64::NAN
    };
    Ok(RateFit {
        rho_hat: -beta[1],
        lambda_hat: beta[2],
        intercept: beta[0],
        residual_rms,
        condition_number,
        collinear: condition_number > COLLINEARITY_THRESHOLD,
        two_point_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Uniform};

    fn omega(d: usize, r: f64, b: f64, l: u32) -> MajorantParams {
        MajorantParams::isotropic(d, r, b, l).unwrap()
    }

    fn synthetic(ms: &[u64], mut err: impl FnMut(f64) -> f64) -> Vec<ExperimentRecord> {
        ms.iter()
            .map(|&m| {
                let e = err(m as f64);
                ExperimentRecord { n: m as f64, m, error: e, theory: 1.0, ratio: e }
            })
            .collect()
    }

    #[test]
    fn projection_example() {
        let o = omega(1, 1.0, 0.0, 2);
        let f = TrigPolynomial::from_terms(
            1,
            vec![(vec![1], Complex64::new(1.0, 0.0)), (vec![12], Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        let pf = project_q(&f, &o, 8.0);
        assert_eq!(pf, TrigPolynomial::monomial(vec![1]));
        let quad = QuadratureSpec::default();
        assert_eq!(approx_error(&f, &o, 8.0, 2.0, &quad).unwrap(), 1.0);
        assert_eq!(project_q(&pf, &o, 8.0), pf);
    }

    #[test]
    fn regime_formulas() {
        let o = omega(2, 1.5, 0.0, 2);
        let t33 = RateRegime::select(&o, 2.0, f64::INFINITY, 2.0).unwrap();
        assert_eq!(t33.tag, RegimeTag::T33);
        let want = (-10.0f64).exp2() * 10f64.powf(1.5);
        assert!((t33.rate(1024.0).unwrap() - want).abs() < 1e-15);

        let t31 = RateRegime::select(&o, 2.0, 1.0, 2.0).unwrap();
        assert_eq!(t31.tag, RegimeTag::T31);
        let t32 = RateRegime::new(RegimeTag::T32, &o, 2.0, 1.0, 2.0).unwrap();
        assert_eq!(t31.rate(512.0).unwrap(), t32.rate(512.0).unwrap());
        assert_eq!(t31.lambda, 1.5);

        assert_eq!(RateRegime::select(&o, 1.5, 1.0, 2.0).unwrap().tag, RegimeTag::T32);
        assert!(matches!(RateRegime::select(&o, 1.0, 1.0, 2.0), Err(Error::UnsupportedRegime(_))));
        assert!(matches!(RateRegime::select(&o, 2.0, 3.0, 2.0), Err(Error::UnsupportedRegime(_))));
        assert!(RateRegime::select(&omega(2, 0.4, 0.0, 2), 2.0, f64::INFINITY, 2.0).is_err());
        assert!(t31.rate(2.0).is_err());
    }

    #[test]
    fn family_regime_intent() {
        let o = omega(2, 1.5, 0.0, 2);
        let t31 = RateRegime::select(&o, 2.0, 2.0, 4.0).unwrap();
        assert!(Family::G3.check_regime(&t31).is_ok());
        assert!(Family::G7.check_regime(&t31).is_err());
        let t31_low = RateRegime::select(&o, 2.0, 2.0, 1.5).unwrap();
        assert!(Family::G3.check_regime(&t31_low).is_err());
        let g5 = RateRegime::select(&o, 2.0, 1.0, 3.0).unwrap();
        assert!(Family::G5.check_regime(&g5).is_ok());
    }

    #[test]
    fn fit_exact_power() {
        let ms: Vec<u64> = (4..=20).map(|e| 1u64 << e).collect();
        let fit = fit_rate(&synthetic(&ms, |m| m.powf(-1.5))).unwrap();
        assert!((fit.rho_hat - 1.5).abs() < 1e-9);
        assert!(fit.lambda_hat.abs() < 1e-9);
        assert!(fit.residual_rms < 1e-9);
        assert!((fit.two_point_slope - 1.5).abs() < 1e-12);
    }

    #[test]
    fn fit_power_log_model() {
        let ms: Vec<u64> = (4..=20).map(|e| 1u64 << e).collect();
        let fit = fit_rate(&synthetic(&ms, |m| m.powf(-1.0) * m.log2().powi(2))).unwrap();
        assert!((fit.rho_hat - 1.0).abs() < 1e-9);
        assert!((fit.lambda_hat - 2.0).abs() < 1e-9);
        assert!(fit.condition_number > 1.0 && fit.condition_number.is_finite());
    }

    #[test]
    fn fit_noisy_power() {
        let mut rng = stream_rng(7, &[]);
        let noise = Uniform::new(0.95, 1.05).unwrap();
        let ms: Vec<u64> = (4..=24).map(|e| 1u64 << e).collect();
        let fit = fit_rate(&synthetic(&ms, |m| m.powf(-1.5) * noise.sample(&mut rng))).unwrap();
        assert!((fit.rho_hat - 1.5).abs() <= 0.05, "{fit:?}");
    }

    #[test]
    fn fit_rejects_degenerate() {
        let recs = synthetic(&[64; 6], |m| 1.0 / m);
        assert!(matches!(fit_rate(&recs), Err(Error::Domain(_))));
        let recs = synthetic(&[64, 70, 80, 90, 100], |m| 1.0 / m);
        assert!(fit_rate(&recs).is_err());
        assert!(fit_rate(&recs[..3]).is_err());
    }

    #[test]
    fn grid_is_geometric() {
        let g = geometric_grid(64.0, 1048576.0, 15).unwrap();
        assert_eq!(g.len(), 15);
        for (i, n) in g.iter().enumerate() {
            assert_eq!(*n, ((6 + i) as f64).exp2());
        }
        assert!(geometric_grid(8.0, 8.0, 5).is_err());
    }

    #[test]
    fn shell_experiment_is_deterministic_and_decreasing() {
        let exp = RateExperiment {
            family: Family::Shell,
            omega: omega(2, 1.5, 0.0, 2),
            bp: BesovParams::new(2.0, 2.0).unwrap(),
            q: 2.0,
            n_grid: geometric_grid(256.0, 4096.0, 5).unwrap(),
            samples: 2,
            seed: 11,
            quad: QuadratureSpec::default(),
        };
        let a = exp.run().unwrap();
        let b = exp.run().unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[1].error < w[0].error));
        for rec in &a {
            assert!(rec.error > 0.0 && rec.theory > 0.0 && rec.m > 0);
        }
    }

    #[test]
    fn shell_samples_are_normalized() {
        let exp = RateExperiment {
            family: Family::Shell,
            omega: omega(2, 1.5, 0.0, 2),
            bp: BesovParams::new(2.0, 2.0).unwrap(),
            q: 2.0,
            n_grid: geometric_grid(256.0, 4096.0, 5).unwrap(),
            samples: 1,
            seed: 3,
            quad: QuadratureSpec::default(),
        };
        let f = exp.sample(2, 0).unwrap();
        let norm = crate::besov::besov_norm(&f, &exp.omega, &exp.bp, &exp.quad).unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn experiment_rejects_mismatched_family() {
        let exp = RateExperiment {
            family: Family::G7,
            omega: omega(2, 1.5, 0.0, 2),
            bp: BesovParams::new(2.0, 2.0).unwrap(),
            q: 2.0,
            n_grid: geometric_grid(4096.0, 65536.0, 5).unwrap(),
            samples: 1,
            seed: 0,
            quad: QuadratureSpec::default(),
        };
        assert!(matches!(exp.run(), Err(Error::UnsupportedRegime(_))));
    }
}
