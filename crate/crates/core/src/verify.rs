//! Desk-scale verification suite: exact identities, cardinality and tail
//! lemmas, Nikolskii, norm equivalence and the three rate theorems.
//!
//! Every check returns a [`CriterionOutcome`] whose text lines are formatted
//! with fixed precision so that reports are byte-stable across runs.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::approx::{approx_error, fit_rate, Family, RateExperiment, RateRegime};
use crate::besov::{besov_norm, combine, piece_norms, BesovParams, NormForm};
use crate::error::Result;
use crate::extremal::{g3, g5, g6_peak, g7, WitnessConfig};
use crate::indexsets::{chi, q_size, q_size_prediction, rho, tail_sum, theta, theta_sum, Freq, TAIL_REL_TARGET};
use crate::kernels::selfcheck;
use crate::majorant::MajorantParams;
use crate::rng::stream_rng;
use crate::trigpoly::{
    draw_coefficient, lp_norm, nikolskii_check, CoefficientLaw, QuadratureMode, QuadratureSpec, TrigPolynomial,
};

pub const IDENTITY_REL_TOL: f64 = 1e-10;
pub const LEMMA_BAND: f64 = 4.0;
pub const NORM_EQUIV_BAND: f64 = 10.0;
/// Quadrature tolerance for the norm-equivalence sweep; `|f|^p` with `p = 1.5`
/// is not smooth at zeros of `f`, and the bands need only a few digits.
pub const NORM_EQUIV_QUAD_TOL: f64 = 1e-4;
pub const SHELL_BAND: f64 = 5.0;
pub const FIT_TOL: f64 = 0.15;
pub const WITNESS_NORM_BAND: f64 = 4.0;
pub const L_INF_BAND: f64 = 8.0;
/// A ratio sequence is "bounded below" when its minimum stays above this
/// fraction of its value at the first grid point.
pub const LOWER_BOUND_FRACTION: f64 = 0.25;
/// Uniform upper bound asserted for the tail-to-shell ratios.
pub const TAIL_RATIO_CAP: f64 = 64.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub lines: Vec<String>,
}

impl CriterionOutcome {
    fn new(id: u32, title: &str) -> Self {
        Self { id, title: title.into(), pass: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.lines.push(format!("     {line}"));
    }

    fn fail_with(&mut self, what: &str, err: crate::Error) {
        self.check(false, format!("{what}: {err}"));
    }
}

/// `(min, max, max/min)` of a positive sequence.
pub fn band(values: &[f64]) -> (f64, f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi, hi / lo)
}

fn pow2_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| (e as f64).exp2()).collect()
}

fn fmt_seq(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>().join(" ")
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn lemma_configs() -> Vec<MajorantParams> {
    vec![
        MajorantParams::new(2, 1.0, vec![0.0, 0.0], 2).expect("valid"),
        MajorantParams::new(2, 1.5, vec![0.5, 0.25], 2).expect("valid"),
        MajorantParams::new(3, 1.0, vec![0.0; 3], 2).expect("valid"),
    ]
}

fn label(o: &MajorantParams) -> String {
    let b: Vec<String> = o.b.iter().map(|b| format!("{b}")).collect();
    format!("d={} r={} b=({}) l={}", o.d, o.r, b.join(","), o.l)
}

/// Random polynomial with up to `max_terms` frequencies in `[-reach, reach]^d`
/// having no zero coordinate.
fn random_poly<R: Rng>(rng: &mut R, d: usize, reach: i64, max_terms: usize) -> Result<TrigPolynomial> {
    let count = rng.random_range(1..=max_terms);
    let terms: Vec<(Freq, Complex64)> = (0..count)
        .map(|_| {
            let k: Freq = (0..d)
                .map(|_| {
                    let m = rng.random_range(1..=reach);
                    if rng.random::<bool>() {
                        m
                    } else {
                        -m
                    }
                })
                .collect();
            (k, draw_coefficient(rng, CoefficientLaw::Gaussian))
        })
        .collect();
    TrigPolynomial::from_terms(d, terms)
}

/// Parseval and the `p = 2` Littlewood–Paley identity on grids, kernel
/// profiles, the partition of unity and kernel peak values.
pub fn criterion_1(seed: u64) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(1, "exact identities");
    let grid = QuadratureSpec { mode: QuadratureMode::EvenPowerExact, ..QuadratureSpec::default() };
    let mut worst_parseval: f64 = 0.0;
    let mut worst_lp: f64 = 0.0;
    for i in 0..100u64 {
        let d = 1 + (i % 2) as usize;
        let mut rng = stream_rng(seed, &[1, i]);
        let res = (|| -> Result<(f64, f64)> {
            let f = random_poly(&mut rng, d, 64, 48)?;
            let on_grid = lp_norm(&f, 2.0, &grid)?.powi(2);
            let coeff = f.l2_norm_sq();
            let mut blocks = 0.0;
            for s in f.occupied_blocks() {
                blocks += lp_norm(&f.block_extract(&s), 2.0, &grid)?.powi(2);
            }
            Ok((rel_diff(on_grid, coeff), rel_diff(blocks, on_grid)))
        })();
        match res {
            Ok((a, b)) => {
                worst_parseval = worst_parseval.max(a);
                worst_lp = worst_lp.max(b);
            }
            Err(e) => out.fail_with("random polynomial", e),
        }
    }
    out.check(
        worst_parseval <= IDENTITY_REL_TOL,
        format!("Parseval on 100 polynomials, worst rel diff {worst_parseval:.3e}"),
    );
    out.check(
        worst_lp <= IDENTITY_REL_TOL,
        format!("Littlewood-Paley p=2 on 100 polynomials, worst rel diff {worst_lp:.3e}"),
    );
    for row in selfcheck(1 << 10, 8, 2) {
        out.check(row.pass, format!("{}: {}", row.name, row.detail));
    }
    out
}

/// `|Q(N)|` against `N^{1/r} (log₂N)^{-Σb/r + d - 1}`.
pub fn criterion_2() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(2, "cardinality of Q(N)");
    let grid = pow2_grid(6, 20);
    for o in lemma_configs() {
        let ratios: Result<Vec<f64>> =
            grid.iter().map(|&n| Ok(q_size(&o, n)? as f64 / q_size_prediction(&o, n))).collect();
        match ratios {
            Ok(r) => {
                let (lo, hi, b) = band(&r);
                out.check(
                    b <= LEMMA_BAND,
                    format!("{}: ratio in [{lo:.4}, {hi:.4}], max/min {b:.3}", label(&o)),
                );
            }
            Err(e) => out.fail_with(&label(&o), e),
        }
    }
    out
}

/// `|Θ(N)|` against `(log₂N)^{d-1}`.
pub fn criterion_3() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(3, "cardinality of the shell Θ(N)");
    let grid = pow2_grid(6, 20);
    for o in lemma_configs() {
        let ratios: Result<Vec<f64>> = grid
            .iter()
            .map(|&n| Ok(theta(&o, n)?.len() as f64 / n.log2().powi(o.d as i32 - 1)))
            .collect();
        match ratios {
            Ok(r) => {
                let (lo, hi, b) = band(&r);
                out.check(
                    b <= LEMMA_BAND,
                    format!("{}: ratio in [{lo:.4}, {hi:.4}], max/min {b:.3}", label(&o)),
                );
            }
            Err(e) => out.fail_with(&label(&o), e),
        }
    }
    out
}

/// Tail sums over `χ^⊥(N)` against shell sums over `Θ(N)`.
pub fn criterion_4() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(4, "tail sums over the complement of χ(N)");
    let grid = pow2_grid(6, 20);
    for o in lemma_configs() {
        for p in [1.0, 2.0] {
            for beta in [0.0, o.r / 2.0] {
                let res = (|| -> Result<(Vec<f64>, f64)> {
                    let mut ratios = Vec::new();
                    let mut worst_cert: f64 = 0.0;
                    for &n in &grid {
                        let t = tail_sum(&o, n, p, beta)?;
                        worst_cert = worst_cert.max(t.tail_bound / t.value);
                        ratios.push(t.value / theta_sum(&o, n, p, beta)?);
                    }
                    Ok((ratios, worst_cert))
                })();
                let what = format!("{} p={p} beta={beta}", label(&o));
                match res {
                    Ok((r, cert)) => {
                        let (lo, hi, _) = band(&r);
                        out.check(
                            hi <= TAIL_RATIO_CAP && cert <= TAIL_REL_TARGET,
                            format!("{what}: C = {hi:.4} (min {lo:.4}), tail bound/value {cert:.2e}"),
                        );
                    }
                    Err(e) => out.fail_with(&what, e),
                }
            }
        }
    }
    out
}

/// Nikolskii inequality on random polynomials.
pub fn criterion_5(seed: u64) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(5, "Nikolskii inequality");
    let quad = QuadratureSpec::default();
    let pairs = [(1.0, 2.0), (1.5, 4.0), (2.0, f64::INFINITY)];
    for d in [1usize, 2] {
        let mut violations = 0usize;
        let mut errors = 0usize;
        let mut worst: f64 = 0.0;
        for i in 0..500u64 {
            let mut rng = stream_rng(seed, &[5, d as u64, i]);
            let t = match random_poly(&mut rng, d, 12, 16) {
                Ok(t) => t,
                Err(_) => {
                    errors += 1;
                    continue;
                }
            };
            for &(q, p) in &pairs {
                match nikolskii_check(&t, p, q, &quad) {
                    Ok(c) => {
                        worst = worst.max(c.lhs / c.rhs);
                        if !c.pass {
                            violations += 1;
                        }
                    }
                    Err(_) => errors += 1,
                }
            }
        }
        out.check(
            violations == 0 && errors == 0,
            format!(
                "d={d}: 500 polynomials x 3 (q,p) pairs, {violations} violations, {errors} errors, max lhs/rhs {worst:.4}"
            ),
        );
    }
    out
}

/// Block form against band-filter form of the Besov norm.
pub fn criterion_6(seed: u64) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(6, "equivalence of block and band-filter norms");
    let omega = MajorantParams::new(2, 1.0, vec![0.0, 0.0], 2).expect("valid");
    let n = 4096.0;
    let quad = QuadratureSpec::with_rel_tol(NORM_EQUIV_QUAD_TOL);
    let blocks = match chi(&omega, n) {
        Ok(c) => c.members,
        Err(e) => {
            out.fail_with("χ(2^12)", e);
            return out;
        }
    };
    let ps = [1.5, 2.0, 4.0];
    let thetas = [1.0, 2.0, f64::INFINITY];
    let mut ratios = vec![Vec::new(); ps.len() * thetas.len()];
    for i in 0..200u64 {
        let mut rng = stream_rng(seed, &[6, i]);
        let res = (|| -> Result<Vec<f64>> {
            let count = rng.random_range(1..=4);
            let mut terms = Vec::new();
            for _ in 0..count {
                let s = &blocks[rng.random_range(0..blocks.len())];
                let freqs = rho(s).materialize(1 << 20)?;
                let take = rng.random_range(1..=16usize.min(freqs.len()));
                for _ in 0..take {
                    let k = freqs[rng.random_range(0..freqs.len())].clone();
                    terms.push((k, draw_coefficient(&mut rng, CoefficientLaw::Gaussian)));
                }
            }
            let f = TrigPolynomial::from_terms(2, terms)?;
            let mut row = Vec::new();
            for &p in &ps {
                let pb = piece_norms(&f, &omega, p, NormForm::Blocks, &quad)?;
                let pv = piece_norms(&f, &omega, p, NormForm::ValleePoussin, &quad)?;
                for &th in &thetas {
                    row.push(combine(&omega, &pb, th) / combine(&omega, &pv, th));
                }
            }
            Ok(row)
        })();
        match res {
            Ok(row) => {
                for (j, v) in row.into_iter().enumerate() {
                    ratios[j].push(v);
                }
            }
            Err(e) => out.fail_with(&format!("polynomial {i}"), e),
        }
    }
    for (pi, &p) in ps.iter().enumerate() {
        for (ti, &th) in thetas.iter().enumerate() {
            let r = &ratios[pi * thetas.len() + ti];
            if r.is_empty() {
                continue;
            }
            let (lo, hi, b) = band(r);
            out.check(
                b <= NORM_EQUIV_BAND,
                format!("p={p} theta={th}: blocks/vp in [{lo:.4}, {hi:.4}], max/min {b:.3}"),
            );
        }
    }
    out
}

fn lower_bound_line(out: &mut CriterionOutcome, what: &str, ratios: &[f64]) {
    let (lo, hi, _) = band(ratios);
    out.check(
        lo > 0.0 && lo >= LOWER_BOUND_FRACTION * ratios[0],
        format!("{what}: error/theory in [{lo:.4e}, {hi:.4e}], first {:.4e}", ratios[0]),
    );
    out.note(format!("ratios {}", fmt_seq(ratios)));
}

/// `L₂` rates: shell-family bands and the `g₃` lower bound.
pub fn criterion_7(seed: u64) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(7, "L2 approximation rate (p = q = 2)");
    let quad = QuadratureSpec::default();
    let grid = pow2_grid(8, 18);
    for b in [vec![0.0, 0.0], vec![0.5, 0.25]] {
        let omega = MajorantParams::new(2, 1.5, b.clone(), 2).expect("valid");
        let exp = RateExperiment {
            family: Family::Shell,
            omega: omega.clone(),
            bp: BesovParams::new(2.0, 2.0).expect("valid"),
            q: 2.0,
            n_grid: grid.clone(),
            samples: 2,
            seed,
            quad,
        };
        let what = format!("shell {} theta=2", label(&omega));
        let records = match exp.run() {
            Ok(r) => r,
            Err(e) => {
                out.fail_with(&what, e);
                continue;
            }
        };
        let ratios: Vec<f64> = records.iter().map(|r| r.ratio).collect();
        let (lo, hi, bw) = band(&ratios);
        out.check(bw <= SHELL_BAND, format!("{what}: ratio in [{lo:.4e}, {hi:.4e}], max/min {bw:.3}"));
        out.note(format!("ratios {}", fmt_seq(&ratios)));
        if b.iter().all(|&x| x == 0.0) {
            match fit_rate(&records) {
                Ok(fit) => out.check(
                    (fit.rho_hat - omega.r).abs() <= FIT_TOL,
                    format!(
                        "{what}: fitted rho {:.4} (r = {}), lambda {:.4}, cond {:.3e}{}, two-point slope {:.4}",
                        fit.rho_hat,
                        omega.r,
                        fit.lambda_hat,
                        fit.condition_number,
                        if fit.collinear { " (collinear)" } else { "" },
                        fit.two_point_slope
                    ),
                ),
                Err(e) => out.fail_with("fit", e),
            }
        }
    }

    let omega = MajorantParams::new(2, 1.5, vec![0.0, 0.0], 2).expect("valid");
    let bp = BesovParams::new(2.0, 4.0).expect("valid");
    let res = (|| -> Result<Vec<f64>> {
        let regime = RateRegime::select(&omega, 2.0, 2.0, 4.0)?;
        Family::G3.check_regime(&regime)?;
        grid.iter()
            .map(|&n| {
                let g = g3(&WitnessConfig::new(omega.clone(), bp, n))?;
                let err = approx_error(&g, &omega, n, 2.0, &quad)?;
                Ok(err / regime.rate(q_size(&omega, n)? as f64)?)
            })
            .collect()
    })();
    match res {
        Ok(r) => lower_bound_line(&mut out, "g3 theta=4", &r),
        Err(e) => out.fail_with("g3", e),
    }
    out
}

/// `g₅` in `L₁`: bounded Besov norm and the lower bound.
pub fn criterion_8() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(8, "L1 lower bound witness g5");
    // r = 1 keeps the dyadic shells aligned with the octave grid in N
    let omega = MajorantParams::new(2, 1.0, vec![0.0, 0.0], 2).expect("valid");
    let bp = BesovParams::new(2.0, 3.0).expect("valid");
    let quad = QuadratureSpec { mode: QuadratureMode::AdaptiveGrid, rel_tol: 1e-3, ..QuadratureSpec::default() };
    let grid = pow2_grid(12, 18);
    let res = (|| -> Result<(Vec<f64>, Vec<f64>)> {
        let regime = RateRegime::select(&omega, 2.0, 1.0, 3.0)?;
        Family::G5.check_regime(&regime)?;
        let mut norms = Vec::new();
        let mut ratios = Vec::new();
        for &n in &grid {
            let g = g5(&WitnessConfig::new(omega.clone(), bp, n))?;
            norms.push(besov_norm(&g, &omega, &bp, &QuadratureSpec::default())?);
            let err = approx_error(&g, &omega, n, 1.0, &quad)?;
            ratios.push(err / regime.rate(q_size(&omega, n)? as f64)?);
        }
        Ok((norms, ratios))
    })();
    match res {
        Ok((norms, ratios)) => {
            let (lo, hi, b) = band(&norms);
            out.check(
                b <= WITNESS_NORM_BAND,
                format!("besov norm of g5 in [{lo:.4}, {hi:.4}], max/min {b:.3}"),
            );
            lower_bound_line(&mut out, "g5 q=1 p=2 theta=3", &ratios);
        }
        Err(e) => out.fail_with("g5", e),
    }
    out
}

/// `g₇` in `L_∞`: bounded Besov norm, peak prediction and a two-sided band.
pub fn criterion_9() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(9, "L-infinity rate witness g7");
    let omega = MajorantParams::new(2, 1.5, vec![0.0, 0.0], 2).expect("valid");
    let bp = BesovParams::new(2.0, 2.0).expect("valid");
    let quad = QuadratureSpec::default();
    let grid = pow2_grid(12, 18);
    let res = (|| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let regime = RateRegime::select(&omega, 2.0, f64::INFINITY, 2.0)?;
        Family::G7.check_regime(&regime)?;
        let (mut norms, mut peaks, mut ratios) = (Vec::new(), Vec::new(), Vec::new());
        for &n in &grid {
            let cfg = WitnessConfig::new(omega.clone(), bp, n);
            let g = g7(&cfg)?;
            norms.push(besov_norm(&g, &omega, &bp, &quad)?);
            peaks.push(g6_peak(&cfg)? / q_size_prediction(&omega, n));
            let err = approx_error(&g, &omega, n, f64::INFINITY, &quad)?;
            ratios.push(err / regime.rate(q_size(&omega, n)? as f64)?);
        }
        Ok((norms, peaks, ratios))
    })();
    match res {
        Ok((norms, peaks, ratios)) => {
            let (lo, hi, b) = band(&norms);
            out.check(
                b <= WITNESS_NORM_BAND,
                format!("besov norm of g7 in [{lo:.4}, {hi:.4}], max/min {b:.3}"),
            );
            let (lo, hi, b) = band(&peaks);
            out.check(
                b <= WITNESS_NORM_BAND,
                format!("g6(0) / predicted size in [{lo:.4}, {hi:.4}], max/min {b:.3}"),
            );
            let (lo, hi, b) = band(&ratios);
            out.check(
                b <= L_INF_BAND,
                format!("sup-norm error/theory in [{lo:.4e}, {hi:.4e}], max/min {b:.3}"),
            );
            out.note(format!("ratios {}", fmt_seq(&ratios)));
        }
        Err(e) => out.fail_with("g7", e),
    }
    out
}

pub fn run_criterion(id: u32, seed: u64) -> Option<CriterionOutcome> {
    Some(match id {
        1 => criterion_1(seed),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(seed),
        6 => criterion_6(seed),
        7 => criterion_7(seed),
        8 => criterion_8(),
        9 => criterion_9(),
        _ => return None,
    })
}

pub const CRITERIA: [u32; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

/// Runs every criterion in order.
pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    CRITERIA.iter().filter_map(|&id| run_criterion(id, seed)).collect()
}
