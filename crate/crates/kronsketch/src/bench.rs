//! Synthetic benchmarks: Gaussian ℓ2 and ℓ1 problems and a B-spline surface
//! fit, each timed against an exact solve.
//!
//! `r_e = 100·|cost(x̃) − cost(x*)| / cost(x*)` with `cost` the ℓ2 residual
//! norm for least squares and P-splines and the ℓ1 residual norm for ℓ1.
//! `T₁` times the exact solve, `T₂` the sketched one; data generation and
//! cost evaluation are not timed.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use kronsketch_core::l1::{l1_tensor_regression, L1Options, SampleProbability};
use kronsketch_core::l2::{sketched_kron_lstsq, L2Options};
use kronsketch_core::linalg::{norm1, norm2, residual, solve_lad, LadOptions};
use kronsketch_core::oracle::{oracle_l2, oracle_pspline};
use kronsketch_core::pspline::{basis_size, bspline_basis, sketched_pspline, tensor_penalty, PenaltySpec, PsplineOptions};
use kronsketch_core::rng::{derive_seed, rng_from_seed};
use kronsketch_core::FactoredMatrix;

use crate::error::{io_err, Error, Result};

/// Environment variable that replaces the default oracle cap.
pub const ORACLE_CAP_ENV: &str = "KRONSKETCH_ORACLE_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Example {
    L2,
    L1,
    Pspline,
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Example::L2 => "l2",
            Example::L1 => "l1",
            Example::Pspline => "pspline",
        })
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(Example::L2),
            "l1" => Ok(Example::L1),
            "pspline" => Ok(Example::Pspline),
            other => Err(Error::Config(format!("unknown example {other:?} (expected l2, l1 or pspline)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub example: Example,
    /// `n_k`.
    pub row_dims: Vec<usize>,
    /// `d_k` for `l2` and `l1`; ignored for `pspline`, where it follows
    /// from `knots` and `degree`.
    pub col_dims: Vec<usize>,
    /// Sketch rows (ℓ2, P-spline) or sample count (ℓ1); one table row per
    /// value and trial.
    pub sketch_rows: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub oracle_cap: usize,
    /// Run trials on the thread pool. Timings are then not comparable.
    pub parallel_trials: bool,
    pub knots: usize,
    pub degree: usize,
    pub order: usize,
    pub eps: f64,
    pub delta: f64,
    pub heights: Option<Vec<usize>>,
    pub rows_per_block: Option<usize>,
    pub boost: Option<usize>,
    pub reweight: bool,
    pub probability: SampleProbability,
}

impl ExperimentConfig {
    /// The published setting of each example.
    pub fn preset(example: Example) -> Self {
        let base = ExperimentConfig {
            example,
            row_dims: vec![300, 300],
            col_dims: vec![15, 15],
            sketch_rows: vec![8000, 12000, 16000],
            lambdas: Vec::new(),
            trials: 10,
            seed: 0,
            output: None,
            oracle_cap: 1 << 25,
            parallel_trials: false,
            knots: 21,
            degree: 3,
            order: 3,
            eps: 0.5,
            delta: 0.1,
            heights: None,
            rows_per_block: None,
            boost: None,
            reweight: true,
            probability: SampleProbability::Path,
        };
        match example {
            Example::L2 => base,
            Example::L1 => ExperimentConfig {
                heights: Some(vec![300, 300]),
                rows_per_block: Some(4000),
                boost: Some(1),
                probability: SampleProbability::Marginal,
                ..base
            },
            Example::Pspline => ExperimentConfig {
                row_dims: vec![100, 100],
                col_dims: vec![23, 23],
                sketch_rows: vec![2000, 4000, 6000],
                lambdas: vec![1.0, 0.1, 0.01],
                ..base
            },
        }
    }

    /// Column dimensions of the generated design.
    pub fn design_cols(&self) -> Vec<usize> {
        match self.example {
            Example::Pspline => vec![basis_size(self.knots, self.degree); self.row_dims.len()],
            _ => self.col_dims.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.row_dims.is_empty() || self.row_dims.contains(&0) {
            return bad("row dimensions must be positive".into());
        }
        let cols = self.design_cols();
        if cols.len() != self.row_dims.len() {
            return bad(format!("{} row dimensions but {} column dimensions", self.row_dims.len(), cols.len()));
        }
        if let Some((n, d)) = self.row_dims.iter().zip(&cols).find(|(n, d)| **d == 0 || d > n) {
            return bad(format!("need n_k >= d_k >= 1, got n = {n}, d = {d}"));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.sketch_rows.is_empty() || self.sketch_rows.contains(&0) {
            return bad("at least one positive m is required".into());
        }
        if self.example == Example::Pspline {
            if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
                return bad("pspline needs a non-empty list of finite lambda >= 0".into());
            }
            if self.knots < 2 || !(1..=5).contains(&self.degree) || !(1..=3).contains(&self.order) {
                return bad("pspline needs knots >= 2, degree in 1..=5 and order in 1..=3".into());
            }
        }
        Ok(())
    }
}

/// Reads the oracle cap from the environment, falling back to `default`.
pub fn oracle_cap_from_env(default: usize) -> Result<usize> {
    match std::env::var(ORACLE_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{ORACLE_CAP_ENV}={v:?} is not a non-negative integer"))),
        Err(_) => Ok(default),
    }
}

fn instance_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    derive_seed(cfg.seed, trial as u64)
}

/// The design and right-hand side of one trial; a pure function of
/// `(cfg.seed, trial)` and the shapes. Gaussian factors for `l2` and `l1`;
/// for `pspline`, B-spline bases evaluated at Gaussian sample points.
pub fn gen_gaussian_instance(cfg: &ExperimentConfig, trial: usize) -> Result<(FactoredMatrix, Vec<f64>)> {
    cfg.validate()?;
    let mut rng = rng_from_seed(instance_seed(cfg, trial));
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let factors = match cfg.example {
        Example::Pspline => cfg
            .row_dims
            .iter()
            .map(|&n| {
                let u: Vec<f64> = (0..n).map(|_| normal()).collect();
                bspline_basis(&u, cfg.knots, cfg.degree)
            })
            .collect::<kronsketch_core::Result<Vec<_>>>()?,
        _ => cfg
            .row_dims
            .iter()
            .zip(&cfg.col_dims)
            .map(|(&n, &d)| {
                let mut a = DMatrix::zeros(n, d);
                for i in 0..n {
                    for j in 0..d {
                        a[(i, j)] = normal();
                    }
                }
                a
            })
            .collect(),
    };
    let f = FactoredMatrix::new(factors)?;
    let b = (0..f.nrows()).map(|_| normal()).collect();
    Ok((f, b))
}

/// One table row. `trial` is `None` for the mean over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub example: Example,
    pub m: usize,
    pub lambda: Option<f64>,
    pub trial: Option<usize>,
    pub r_e_pct: f64,
    pub t1_s: f64,
    pub t2_s: f64,
    pub r_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub example: Example,
    /// Per-trial rows, ordered by trial, then `λ`, then `m`.
    pub rows: Vec<TrialRow>,
    /// Free-form metadata printed with the table.
    pub notes: Vec<String>,
}

impl ExperimentResult {
    /// Mean over trials for each `(m, λ)`, in first-seen order.
    pub fn means(&self) -> Vec<TrialRow> {
        let mut keys: Vec<(usize, Option<f64>)> = Vec::new();
        for r in &self.rows {
            if !keys.contains(&(r.m, r.lambda)) {
                keys.push((r.m, r.lambda));
            }
        }
        keys.into_iter()
            .map(|(m, lambda)| {
                let group: Vec<&TrialRow> = self.rows.iter().filter(|r| r.m == m && r.lambda == lambda).collect();
                let k = group.len() as f64;
                let mean = |f: fn(&TrialRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / k;
                TrialRow {
                    example: self.example,
                    m,
                    lambda,
                    trial: None,
                    r_e_pct: mean(|r| r.r_e_pct),
                    t1_s: mean(|r| r.t1_s),
                    t2_s: mean(|r| r.t2_s),
                    r_t: mean(|r| r.r_t),
                }
            })
            .collect()
    }

    /// Mean `r_e` for one `(m, λ)`.
    pub fn mean_r_e(&self, m: usize, lambda: Option<f64>) -> Option<f64> {
        self.means().into_iter().find(|r| r.m == m && r.lambda == lambda).map(|r| r.r_e_pct)
    }
}

/// `100·|cost − opt| / opt`.
pub fn relative_error_pct(cost: f64, opt: f64) -> f64 {
    100.0 * (cost - opt).abs() / opt
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE))
}

fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<TrialRow>> {
    let (f, b) = gen_gaussian_instance(cfg, trial)?;
    let sketch_seed = derive_seed(instance_seed(cfg, trial), 1 << 32);
    let row = |m: usize, lambda: Option<f64>, r_e_pct: f64, t1_s: f64, t2_s: f64| TrialRow {
        example: cfg.example,
        m,
        lambda,
        trial: Some(trial),
        r_e_pct,
        t1_s,
        t2_s,
        r_t: t2_s / t1_s,
    };
    let mut rows = Vec::new();
    match cfg.example {
        Example::L2 => {
            let (exact, t1) = timed(|| oracle_l2(&f, &b, cfg.oracle_cap));
            let exact = exact?;
            for &m in &cfg.sketch_rows {
                let opts = L2Options {
                    eps: cfg.eps,
                    delta: cfg.delta,
                    m_override: Some(m),
                    seed: sketch_seed,
                    ..L2Options::default()
                };
                let (sol, t2) = timed(|| sketched_kron_lstsq(&f, &b, &opts));
                let cost = norm2(&residual(&f, &sol?.x, &b));
                rows.push(row(m, None, relative_error_pct(cost, exact.objective), t1, t2));
            }
        }
        Example::L1 => {
            let (exact, t1) = timed(|| solve_lad(&f, &b, None, &LadOptions::default()));
            let exact = exact?;
            for &m in &cfg.sketch_rows {
                let opts = L1Options {
                    eps: cfg.eps,
                    delta: cfg.delta,
                    heights: cfg.heights.clone(),
                    rows_per_block: cfg.rows_per_block,
                    boost: cfg.boost,
                    n_samples: Some(m),
                    reweight: cfg.reweight,
                    probability: cfg.probability,
                    seed: sketch_seed,
                    ..L1Options::default()
                };
                let (sol, t2) = timed(|| l1_tensor_regression(&f, &b, &opts));
                let cost = norm1(&residual(&f, &sol?.x, &b));
                rows.push(row(m, None, relative_error_pct(cost, exact.objective), t1, t2));
            }
        }
        Example::Pspline => {
            let penalty = tensor_penalty(f.col_dims(), cfg.order)?;
            for &lambda in &cfg.lambdas {
                let (exact, t1) = timed(|| oracle_pspline(&f, &penalty, lambda, &b, cfg.oracle_cap));
                let opt = norm2(&residual(&f, &exact?.x, &b));
                let spec = PenaltySpec::explicit(penalty.clone(), lambda)?;
                for &m in &cfg.sketch_rows {
                    let opts = PsplineOptions {
                        eps: cfg.eps,
                        m_override: Some(m),
                        seed: sketch_seed,
                        ..PsplineOptions::default()
                    };
                    let (sol, t2) = timed(|| sketched_pspline(&f, &spec, &b, &opts));
                    let cost = norm2(&residual(&f, &sol?.x, &b));
                    rows.push(row(m, Some(lambda), relative_error_pct(cost, opt), t1, t2));
                }
            }
        }
    }
    Ok(rows)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let per_trial: Vec<Result<Vec<TrialRow>>> = if cfg.parallel_trials {
        (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect()
    } else {
        (0..cfg.trials).map(|t| run_trial(cfg, t)).collect()
    };
    let mut rows = Vec::new();
    for r in per_trial {
        rows.extend(r?);
    }
    let mut notes = vec![format!(
        "n = {:?}, d = {:?}, trials = {}, seed = {}",
        cfg.row_dims,
        cfg.design_cols(),
        cfg.trials,
        cfg.seed
    )];
    match cfg.example {
        Example::L1 => {
            notes.push(
                "T1 is the in-repo exact vertex-descent LAD solver; r_t is not comparable to a commercial LP baseline"
                    .into(),
            );
            notes.push(format!(
                "w = {:?}, rows per block = {:?}, boost = {:?}, reweight = {}, probability = {:?}",
                cfg.heights, cfg.rows_per_block, cfg.boost, cfg.reweight, cfg.probability
            ));
        }
        Example::Pspline => notes.push(format!(
            "knots = {}, degree = {}, penalty order = {}; r_e compares data-fit residual norms",
            cfg.knots, cfg.degree, cfg.order
        )),
        Example::L2 => {}
    }
    if cfg.parallel_trials {
        notes.push("trials ran in parallel; timings are indicative only".into());
    }
    Ok(ExperimentResult {
        example: cfg.example,
        rows,
        notes,
    })
}

pub const CSV_HEADER: [&str; 8] = ["example", "m", "lambda", "trial", "r_e_pct", "T1_s", "T2_s", "r_t"];

fn csv_record(r: &TrialRow) -> [String; 8] {
    [
        r.example.to_string(),
        r.m.to_string(),
        r.lambda.map_or(String::new(), |l| l.to_string()),
        r.trial.map_or("mean".into(), |t| t.to_string()),
        r.r_e_pct.to_string(),
        r.t1_s.to_string(),
        r.t2_s.to_string(),
        r.r_t.to_string(),
    ]
}

/// Per-trial rows followed by the mean rows, at full precision.
pub fn write_csv(result: &ExperimentResult, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in result.rows.iter().chain(result.means().iter()) {
        w.write_record(csv_record(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a table written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<TrialRow>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::Reader::from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(Error::Format {
            path: path.into(),
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let err = |message: String| Error::Parse {
            path: path.into(),
            line,
            message,
        };
        let num = |k: usize| -> Result<f64> { rec[k].parse().map_err(|_| err(format!("bad number {:?}", &rec[k]))) };
        rows.push(TrialRow {
            example: rec[0].parse()?,
            m: rec[1].parse().map_err(|_| err(format!("bad m {:?}", &rec[1])))?,
            lambda: if rec[2].is_empty() { None } else { Some(num(2)?) },
            trial: match &rec[3] {
                "mean" => None,
                t => Some(t.parse().map_err(|_| err(format!("bad trial {t:?}")))?),
            },
            r_e_pct: num(4)?,
            t1_s: num(5)?,
            t2_s: num(6)?,
            r_t: num(7)?,
        });
    }
    Ok(rows)
}

/// `v` rounded to three significant digits.
pub fn sig3(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-3..6).contains(&exp) {
        let decimals = (2 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.2e}")
    }
}

/// Console table of the means (three significant digits) and, when `csv`
/// is given, the full CSV.
pub fn emit_table(result: &ExperimentResult, csv: Option<&Path>, console: &mut impl Write) -> Result<()> {
    for note in &result.notes {
        writeln!(console, "# {note}")?;
    }
    writeln!(
        console,
        "{:<8} {:>7} {:>8} {:>10} {:>10} {:>10} {:>8}",
        "example", "m", "lambda", "r_e (%)", "T1 (s)", "T2 (s)", "r_t"
    )?;
    for r in result.means() {
        writeln!(
            console,
            "{:<8} {:>7} {:>8} {:>10} {:>10} {:>10} {:>8}",
            r.example.to_string(),
            r.m,
            r.lambda.map_or("-".into(), sig3),
            sig3(r.r_e_pct),
            sig3(r.t1_s),
            sig3(r.t2_s),
            sig3(r.r_t)
        )?;
    }
    if let Some(path) = csv {
        let file = File::create(path).map_err(io_err(path))?;
        write_csv(result, file)?;
    }
    Ok(())
}
