//! Subcommand drivers. Each returns the text to emit and whether every check
//! it ran passed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use hypercross::approx::{fit_rate, Family, RateExperiment};
use hypercross::besov::{besov_norm_blocks, besov_norm_vp};
use hypercross::extremal::{g6_peak, packet_layout, WitnessConfig, WitnessFamily};
use hypercross::indexsets::{chi, q_size, q_size_prediction, tail_sum, theta, theta_prime, theta_sum, DyadicIndex};
use hypercross::kernels::{fejer, selfcheck, vallee_poussin};
use hypercross::majorant::MajorantParams;
use hypercross::trigpoly::{text, QuadratureSpec, TrigPolynomial};
use hypercross::verify::{run_criterion, CRITERIA};
use hypercross::{Error, Result};

use crate::config::{RunConfig, MAX_BLOCK_EXPONENT};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_SEED: u64 = 20_261_019;

pub struct Output {
    pub text: String,
    pub pass: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, pass: true }
    }
}

fn header(command: &str, cfg: &RunConfig) -> String {
    format!("# hypercross {VERSION} {command}\n# config {}\n", cfg.echo())
}

fn meta(command: &str, cfg: &RunConfig) -> serde_json::Value {
    json!({ "version": VERSION, "command": command, "config": cfg })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn num(x: f64) -> String {
    format!("{x:.10e}")
}

fn wants_json(cfg: &RunConfig) -> Result<bool> {
    match cfg.out.as_deref() {
        None | Some("csv") => Ok(false),
        Some("json") => Ok(true),
        Some(other) => Err(Error::Config(format!("out must be `csv` or `json`, got `{other}`"))),
    }
}

fn check_blocks<'a>(blocks: impl IntoIterator<Item = &'a DyadicIndex>) -> Result<()> {
    let top = blocks
        .into_iter()
        .flat_map(|s| s.as_slice().iter().copied())
        .max()
        .unwrap_or(0);
    if top > MAX_BLOCK_EXPONENT {
        return Err(Error::Capacity {
            what: "per-coordinate frequency",
            needed: 1u128 << top,
            cap: 1u128 << MAX_BLOCK_EXPONENT,
        });
    }
    Ok(())
}

fn check_degree(f: &TrigPolynomial) -> Result<()> {
    let top = f.max_degree().into_iter().max().unwrap_or(0);
    if top > 1 << MAX_BLOCK_EXPONENT {
        return Err(Error::Capacity {
            what: "per-coordinate frequency",
            needed: top as u128,
            cap: 1u128 << MAX_BLOCK_EXPONENT,
        });
    }
    Ok(())
}

#[derive(Serialize)]
struct SetsRow {
    n: f64,
    chi_count: usize,
    theta_count: usize,
    theta_prime_count: usize,
    q_size: u128,
    lemma_b_prediction: f64,
    ratio: f64,
}

pub fn sets(cfg: &RunConfig) -> Result<Output> {
    let omega = cfg.majorant(2)?;
    let grid = cfg.n_grid(64.0, 1048576.0)?;
    let rows = grid
        .iter()
        .map(|&n| {
            let q = q_size(&omega, n)?;
            let pred = q_size_prediction(&omega, n);
            Ok(SetsRow {
                n,
                chi_count: chi(&omega, n)?.len(),
                theta_count: theta(&omega, n)?.len(),
                theta_prime_count: theta_prime(&omega, n)?.len(),
                q_size: q,
                lemma_b_prediction: pred,
                ratio: q as f64 / pred,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if wants_json(cfg)? {
        return Ok(Output::ok(to_json(&json!({ "meta": meta("sets", cfg), "rows": rows }))));
    }
    let mut out = header("sets", cfg);
    out.push_str("N,chi_count,theta_count,theta_prime_count,q_size,lemmaB_prediction,ratio\n");
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n, r.chi_count, r.theta_count, r.theta_prime_count, r.q_size, num(r.lemma_b_prediction), num(r.ratio)
        );
    }
    Ok(Output::ok(out))
}

#[derive(Serialize)]
struct LemmaRow {
    n: f64,
    p: f64,
    beta: f64,
    tail_value: f64,
    tail_bound: f64,
    cutoff: u32,
    theta_sum: f64,
    ratio: f64,
}

pub fn lemmas(cfg: &RunConfig) -> Result<Output> {
    let omega = cfg.majorant(2)?;
    let grid = cfg.n_grid(64.0, 1048576.0)?;
    let ps: Vec<f64> = match cfg.p {
        Some(p) => vec![p.0],
        None => vec![1.0, 2.0],
    };
    let betas: Vec<f64> = match cfg.beta {
        Some(b) => vec![b],
        None => vec![0.0, omega.r / 2.0],
    };
    let mut rows = Vec::new();
    for &p in &ps {
        for &beta in &betas {
            for &n in &grid {
                let t = tail_sum(&omega, n, p, beta)?;
                let s = theta_sum(&omega, n, p, beta)?;
                rows.push(LemmaRow {
                    n,
                    p,
                    beta,
                    tail_value: t.value,
                    tail_bound: t.tail_bound,
                    cutoff: t.cutoff,
                    theta_sum: s,
                    ratio: t.value / s,
                });
            }
        }
    }
    if wants_json(cfg)? {
        return Ok(Output::ok(to_json(&json!({ "meta": meta("lemmas", cfg), "rows": rows }))));
    }
    let mut out = header("lemmas", cfg);
    out.push_str("N,p,beta,tail_value,tail_bound,cutoff,theta_sum,ratio\n");
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.p,
            r.beta,
            num(r.tail_value),
            num(r.tail_bound),
            r.cutoff,
            num(r.theta_sum),
            num(r.ratio)
        );
    }
    Ok(Output::ok(out))
}

pub fn norms(cfg: &RunConfig, input: &Path) -> Result<Output> {
    let text_in = std::fs::read_to_string(input)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", input.display())))?;
    let f = text::parse(&text_in)?;
    if let Some(d) = cfg.d {
        if d != f.dim() {
            return Err(Error::DimensionMismatch { expected: d, got: f.dim() });
        }
    }
    if let Some(k) = f.zero_coordinate_frequency() {
        return Err(Error::Config(format!("frequency k = {k:?} has a zero coordinate")));
    }
    check_degree(&f)?;
    let omega = cfg.majorant(f.dim())?;
    let bp = cfg.besov(2.0, 2.0)?;
    let quad = QuadratureSpec::default();
    let blocks = besov_norm_blocks(&f, &omega, &bp, &quad)?;
    let vp = besov_norm_vp(&f, &omega, &bp, &quad)?;
    Ok(Output::ok(to_json(&json!({
        "meta": meta("norms", cfg),
        "blocks_norm": blocks,
        "vp_norm": vp,
        "ratio": blocks / vp,
    }))))
}

pub struct KernelArgs {
    pub selfcheck: bool,
    pub max_n: u64,
    pub partition_s: u32,
    pub dims: usize,
    pub fejer: Option<u64>,
    pub vallee_poussin: Option<u64>,
}

pub fn kernels(args: &KernelArgs) -> Result<Output> {
    if args.selfcheck {
        let rows = selfcheck(args.max_n, args.partition_s, args.dims);
        let mut out = format!(
            "# hypercross {VERSION} kernels --selfcheck\n# max_n {} partition_s {} dims {}\n",
            args.max_n, args.partition_s, args.dims
        );
        let width = rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(0);
        for r in &rows {
            let pad = width - r.name.chars().count();
            let _ = writeln!(
                out,
                "{}  {}{}  {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                " ".repeat(pad),
                r.detail
            );
        }
        let pass = rows.iter().all(|r| r.pass);
        return Ok(Output { text: out, pass });
    }
    let (name, k) = match (args.fejer, args.vallee_poussin) {
        (Some(n), None) => (format!("fejer n={n}"), fejer(n)?),
        (None, Some(n)) => (format!("vallee_poussin n={n}"), vallee_poussin(n)?),
        _ => {
            return Err(Error::Config(
                "pass --selfcheck, or exactly one of --fejer N / --vallee-poussin N".into(),
            ))
        }
    };
    Ok(Output::ok(text::write(&k, &[format!("hypercross {VERSION} kernels"), name])))
}

pub fn rates(cfg: &RunConfig) -> Result<Output> {
    let omega = cfg.majorant(2)?;
    let bp = cfg.besov(2.0, 2.0)?;
    let family: Family = cfg.family.as_deref().unwrap_or("shell").parse()?;
    let q = cfg.q.map_or(2.0, |x| x.0);
    let n_grid = cfg.n_grid(256.0, 65536.0)?;
    let top = *n_grid.last().expect("nonempty grid");
    let blocks = match family {
        Family::RandomBall => chi(&omega, top * (omega.l as f64).exp2())?.members,
        _ => theta(&omega, top)?.members,
    };
    check_blocks(&blocks)?;
    let exp = RateExperiment {
        family,
        omega,
        bp,
        q,
        n_grid,
        samples: cfg.samples.unwrap_or(4),
        seed: cfg.seed_or(DEFAULT_SEED),
        quad: QuadratureSpec::default(),
    };
    let records = exp.run()?;
    let fit = fit_rate(&records);
    if wants_json(cfg)? {
        let fit_json = match &fit {
            Ok(f) => json!(f),
            Err(e) => json!({ "error": e.to_string() }),
        };
        return Ok(Output::ok(to_json(&json!({
            "meta": meta("rates", cfg),
            "regime": exp.regime()?,
            "records": records,
            "fit": fit_json,
        }))));
    }
    let mut out = header("rates", cfg);
    out.push_str("N,M,error,theory,ratio\n");
    for r in &records {
        let _ = writeln!(out, "{},{},{},{},{}", r.n, r.m, num(r.error), num(r.theory), num(r.ratio));
    }
    match fit {
        Ok(f) => {
            let _ = writeln!(
                out,
                "# fit rho_hat={:.6} lambda_hat={:.6} residual_rms={:.3e} condition={:.3e}{} two_point_slope={:.6}",
                f.rho_hat,
                f.lambda_hat,
                f.residual_rms,
                f.condition_number,
                if f.collinear { " collinear" } else { "" },
                f.two_point_slope
            );
        }
        Err(e) => {
            let _ = writeln!(out, "# fit unavailable: {e}");
        }
    }
    Ok(Output::ok(out))
}

#[derive(Serialize)]
struct WitnessDiagnostics {
    family: &'static str,
    n: f64,
    besov_norm: f64,
    spectrum_size: usize,
    peak_value: f64,
    theta_prime_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    packet_u: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    packet_v: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g6_peak: Option<f64>,
}

/// Writes the witness polynomial to `path` and diagnostics to `path.json`.
pub fn witness(cfg: &RunConfig, path: Option<&Path>) -> Result<Output> {
    let omega: MajorantParams = cfg.majorant(2)?;
    let bp = cfg.besov(2.0, 2.0)?;
    let family: WitnessFamily = cfg
        .family
        .as_deref()
        .ok_or_else(|| Error::Config("witness needs --family g3|g5|g7".into()))?
        .parse()?;
    if family == WitnessFamily::G1 {
        return Err(Error::Config("witness families are g3, g5 and g7".into()));
    }
    let n = cfg.n.ok_or_else(|| Error::Config("witness needs --N".into()))?;
    let mut wc = WitnessConfig::new(omega.clone(), bp, n);
    wc.seed = cfg.seed_or(DEFAULT_SEED);
    check_blocks(theta_prime(&omega, n)?.iter())?;
    let g = family.build(&wc)?;
    check_degree(&g)?;

    let layout = match family {
        WitnessFamily::G5 => Some(packet_layout(&wc)?),
        _ => None,
    };
    // the constructions peak at the origin or at the packet centres
    let mut points = vec![vec![0.0; omega.d]];
    if let Some(l) = &layout {
        points.extend(l.centers.iter().cloned());
    }
    let peak_value = points.iter().map(|x| g.eval(x).norm()).fold(0.0, f64::max);
    let diag = WitnessDiagnostics {
        family: family.name(),
        n,
        besov_norm: besov_norm_blocks(&g, &omega, &bp, &QuadratureSpec::default())?,
        spectrum_size: g.len(),
        peak_value,
        theta_prime_count: theta_prime(&omega, n)?.len(),
        packet_u: layout.as_ref().map(|l| l.u),
        packet_v: layout.as_ref().map(|l| l.v),
        g6_peak: match family {
            WitnessFamily::G7 => Some(g6_peak(&wc)?),
            _ => None,
        },
    };
    let poly = text::write(
        &g,
        &[format!("hypercross {VERSION} witness"), format!("config {}", cfg.echo())],
    );
    let sidecar = to_json(&json!({ "meta": meta("witness", cfg), "diagnostics": diag }));
    let target: PathBuf = match path {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from(format!("{}_N{}.poly", family.name(), n)),
    };
    let side_path = sidecar_path(&target);
    std::fs::write(&target, poly).map_err(|e| Error::Config(format!("cannot write {}: {e}", target.display())))?;
    std::fs::write(&side_path, &sidecar)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", side_path.display())))?;
    Ok(Output::ok(format!("wrote {} and {}\n", target.display(), side_path.display())))
}

pub fn sidecar_path(poly: &Path) -> PathBuf {
    let mut s = poly.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Runs the selected criteria (all by default) and renders the report.
pub fn verify_all(cfg: &RunConfig, only: &[u32]) -> Result<Output> {
    let seed = cfg.seed_or(DEFAULT_SEED);
    let ids: Vec<u32> = if only.is_empty() { CRITERIA.to_vec() } else { only.to_vec() };
    let mut out = header("verify-all", &RunConfig { seed: Some(seed), ..cfg.clone() });
    let mut failed = Vec::new();
    for id in ids {
        let outcome =
            run_criterion(id, seed).ok_or_else(|| Error::Config(format!("no criterion numbered {id}")))?;
        let _ = writeln!(out, "[{}] {} {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.id, outcome.title);
        for line in &outcome.lines {
            let _ = writeln!(out, "    {line}");
        }
        if !outcome.pass {
            failed.push(outcome.id.to_string());
        }
    }
    if failed.is_empty() {
        out.push_str("summary: all criteria passed\n");
    } else {
        let _ = writeln!(out, "summary: failing sections {}", failed.join(","));
    }
    Ok(Output { text: out, pass: failed.is_empty() })
}
