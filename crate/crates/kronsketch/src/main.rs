use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use kronsketch::bench::{emit_table, gen_gaussian_instance, oracle_cap_from_env, run_experiment, Example, ExperimentConfig};
use kronsketch::config::ConfigOverrides;
use kronsketch::io::{read_matrix, read_vector, write_csv_vector, write_krn1};
use kronsketch::{Error, Result};
use kronsketch_core::l1::{l1_tensor_regression_best_of, L1Options, SampleProbability};
use kronsketch_core::l2::{sketch_system, sketched_kron_lstsq, sketched_kron_nnls, L2Options};
use kronsketch_core::linalg::{norm1, norm2, residual};
use kronsketch_core::oracle::{oracle_l1, oracle_l2, oracle_nnls, oracle_pspline};
use kronsketch_core::pspline::{bspline_basis, sketched_pspline, PenaltySpec, PsplineOptions};
use kronsketch_core::rng::{derive_seed, rng_from_seed};
use kronsketch_core::{FactoredMatrix, DEFAULT_ORACLE_CAP};

#[derive(Parser)]
#[command(name = "kronsketch", version, about = "Sketched regression over Kronecker-product designs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Least squares (or NNLS) through one TensorSketch.
    L2(L2Cmd),
    /// ℓ1 regression by well-conditioned-basis row sampling.
    L1(L1Cmd),
    /// P-spline surface fit with a sketched data term.
    Pspline(PsplineCmd),
    /// Reproduce the synthetic benchmark tables.
    Bench(BenchCmd),
    #[command(hide = true)]
    Oracle(OracleCmd),
}

#[derive(Args)]
struct Problem {
    /// Factor matrix (CSV or KRN1), repeated once per factor in order.
    #[arg(long = "factor", value_name = "FILE")]
    factors: Vec<PathBuf>,
    /// Right-hand side vector (one column).
    #[arg(long, value_name = "FILE")]
    rhs: Option<PathBuf>,
    /// Gaussian instance with two factors instead of files.
    #[arg(long, num_args = 4, value_names = ["N1", "N2", "D1", "D2"], conflicts_with_all = ["factors", "rhs"])]
    synthetic: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the solution vector to this CSV file.
    #[arg(long = "csv", value_name = "FILE")]
    csv: Option<PathBuf>,
}

impl Problem {
    fn load(&self) -> Result<(FactoredMatrix, Vec<f64>)> {
        if let Some(s) = &self.synthetic {
            let cfg = ExperimentConfig {
                row_dims: vec![s[0], s[1]],
                col_dims: vec![s[2], s[3]],
                seed: self.seed,
                ..ExperimentConfig::preset(Example::L2)
            };
            return gen_gaussian_instance(&cfg, 0);
        }
        if self.factors.is_empty() {
            return Err(Error::Config("give --factor files and --rhs, or --synthetic".into()));
        }
        let rhs = self
            .rhs
            .as_ref()
            .ok_or_else(|| Error::Config("--rhs is required with --factor".into()))?;
        let factors = self.factors.iter().map(|p| read_matrix(p)).collect::<Result<Vec<_>>>()?;
        Ok((FactoredMatrix::new(factors)?, read_vector(rhs)?))
    }

    fn save(&self, x: &[f64]) -> Result<()> {
        if let Some(p) = &self.csv {
            write_csv_vector(p, x)?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct L2Cmd {
    #[command(flatten)]
    problem: Problem,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Sketch rows; overrides the size formula.
    #[arg(long)]
    m_override: Option<usize>,
    /// Constrain the solution to be nonnegative.
    #[arg(long)]
    nonneg: bool,
    /// Write the sketched design S𝒜 in KRN1 format.
    #[arg(long, value_name = "FILE")]
    dump_sketch: Option<PathBuf>,
}

#[derive(Args)]
struct L1Cmd {
    #[command(flatten)]
    problem: Problem,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Block height for factor 1.
    #[arg(long)]
    w1: Option<usize>,
    /// Block height for factor 2.
    #[arg(long)]
    w2: Option<usize>,
    /// Block heights for all factors, comma-separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["w1", "w2"])]
    w: Option<Vec<usize>>,
    /// TensorSketch rows per block.
    #[arg(long)]
    rows_per_block: Option<usize>,
    /// Boosting candidates per block (odd).
    #[arg(long)]
    boost: Option<usize>,
    /// Number of sampled rows.
    #[arg(long = "n-override", alias = "N-override")]
    n_override: Option<usize>,
    /// Give every sampled row weight 1.
    #[arg(long)]
    no_reweight: bool,
    /// Weight rows by their marginal sampling probability instead of the
    /// probability of the sampled path.
    #[arg(long)]
    marginal_probabilities: bool,
    /// Independent runs; the one with the smallest ℓ1 cost is kept.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
}

#[derive(Args)]
struct PsplineCmd {
    /// Sample points of one coordinate (one column), repeated per coordinate.
    #[arg(long = "coords", value_name = "FILE")]
    coords: Vec<PathBuf>,
    #[arg(long, value_name = "FILE")]
    rhs: Option<PathBuf>,
    /// Distinct knots per coordinate.
    #[arg(long, default_value_t = 21)]
    knots: usize,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Gaussian sample points and data; D is the basis size per coordinate.
    #[arg(long, num_args = 4, value_names = ["N1", "N2", "D1", "D2"], conflicts_with_all = ["coords", "rhs"])]
    synthetic: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Difference order of the penalty.
    #[arg(long, default_value_t = 3)]
    order: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Constant in the sketch size formula.
    #[arg(long = "K", default_value_t = 1.0)]
    k_const: f64,
    #[arg(long)]
    m_override: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "csv", value_name = "FILE")]
    csv: Option<PathBuf>,
}

impl PsplineCmd {
    fn load(&self) -> Result<(FactoredMatrix, Vec<f64>)> {
        if let Some(s) = &self.synthetic {
            let mut rng = rng_from_seed(derive_seed(self.seed, 0));
            let mut factors = Vec::new();
            for (&n, &d) in [s[0], s[1]].iter().zip(&[s[2], s[3]]) {
                let breakpoints = (d + 1)
                    .checked_sub(self.degree)
                    .filter(|&k| k >= 2)
                    .ok_or_else(|| Error::Config(format!("basis size {d} is too small for degree {}", self.degree)))?;
                let u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                factors.push(bspline_basis(&u, breakpoints, self.degree)?);
            }
            let f = FactoredMatrix::new(factors)?;
            let b = (0..f.nrows()).map(|_| StandardNormal.sample(&mut rng)).collect();
            return Ok((f, b));
        }
        if self.coords.is_empty() {
            return Err(Error::Config("give --coords files and --rhs, or --synthetic".into()));
        }
        let rhs = self
            .rhs
            .as_ref()
            .ok_or_else(|| Error::Config("--rhs is required with --coords".into()))?;
        let factors = self
            .coords
            .iter()
            .map(|p| Ok(bspline_basis(&read_vector(p)?, self.knots, self.degree)?))
            .collect::<Result<Vec<DMatrix<f64>>>>()?;
        Ok((FactoredMatrix::new(factors)?, read_vector(rhs)?))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchExample {
    L2,
    L1,
    Pspline,
}

#[derive(Args)]
struct BenchCmd {
    #[arg(value_enum)]
    example: BenchExample,
    /// key = value settings; flags override them.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Row counts per factor, comma-separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Column counts per factor (l2, l1).
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    /// Sketch rows or sample counts.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Penalty weights (pspline).
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Largest dense matrix, in entries, the exact baseline may form.
    #[arg(long)]
    oracle_cap: Option<usize>,
    /// Run trials concurrently; timings become indicative only.
    #[arg(long)]
    parallel_trials: bool,
    /// Distinct B-spline breakpoints per axis.
    #[arg(long)]
    knots: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    /// Difference order of the penalty.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Block heights for the l1 conditioning sketch.
    #[arg(long, value_delimiter = ',')]
    w: Option<Vec<usize>>,
    #[arg(long)]
    rows_per_block: Option<usize>,
    /// Independent block sketches combined by median.
    #[arg(long)]
    boost: Option<usize>,
    /// Give every sampled row weight 1.
    #[arg(long)]
    no_reweight: bool,
    /// Weight sampled rows by their marginal probability.
    #[arg(long)]
    marginal_probabilities: bool,
}

impl BenchCmd {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            row_dims: self.n.clone(),
            col_dims: self.d.clone(),
            sketch_rows: self.m.clone(),
            lambdas: self.lambda.clone(),
            trials: self.trials,
            seed: self.seed,
            output: self.output.clone(),
            oracle_cap: self.oracle_cap,
            parallel_trials: self.parallel_trials.then_some(true),
            knots: self.knots,
            degree: self.degree,
            order: self.order,
            eps: self.eps,
            delta: self.delta,
            heights: self.w.clone(),
            rows_per_block: self.rows_per_block,
            boost: self.boost,
            reweight: self.no_reweight.then_some(false),
            probability: self.marginal_probabilities.then_some(SampleProbability::Marginal),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    L2,
    Nnls,
    L1,
    Pspline,
}

#[derive(Args)]
struct OracleCmd {
    #[arg(value_enum)]
    kind: OracleKind,
    #[command(flatten)]
    problem: Problem,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Entry cap for the dense design; defaults to the environment or the
    /// built-in cap.
    #[arg(long)]
    cap: Option<usize>,
}

fn run_l2(cmd: &L2Cmd) -> Result<()> {
    let (f, b) = cmd.problem.load()?;
    let opts = L2Options {
        eps: cmd.eps,
        delta: cmd.delta,
        m_override: cmd.m_override,
        seed: cmd.problem.seed,
        ..L2Options::default()
    };
    let sol = if cmd.nonneg {
        sketched_kron_nnls(&f, &b, &opts)?
    } else {
        sketched_kron_lstsq(&f, &b, &opts)?
    };
    if let Some(path) = &cmd.dump_sketch {
        let sys = sketch_system(&f, &b, sol.m, opts.seed, opts.memory_cap)?;
        write_krn1(path, &sys.sa)?;
    }
    println!("n = {}, d = {}, m = {}{}", f.nrows(), f.ncols(), sol.m, if sol.identity { " (full problem)" } else { "" });
    println!("sketched residual = {}", sol.sketched_residual);
    println!("residual = {}", norm2(&residual(&f, &sol.x, &b)));
    cmd.problem.save(&sol.x)
}

fn run_l1(cmd: &L1Cmd) -> Result<()> {
    let (f, b) = cmd.problem.load()?;
    let heights = match (&cmd.w, cmd.w1, cmd.w2) {
        (Some(w), _, _) => Some(w.clone()),
        (None, Some(a), Some(c)) => Some(vec![a, c]),
        (None, None, None) => None,
        _ => return Err(Error::Config("--w1 and --w2 go together".into())),
    };
    let opts = L1Options {
        eps: cmd.eps,
        delta: cmd.delta,
        heights,
        rows_per_block: cmd.rows_per_block,
        boost: cmd.boost,
        n_samples: cmd.n_override,
        reweight: !cmd.no_reweight,
        probability: if cmd.marginal_probabilities {
            SampleProbability::Marginal
        } else {
            SampleProbability::Path
        },
        seed: cmd.problem.seed,
        ..L1Options::default()
    };
    let (sol, cost) = l1_tensor_regression_best_of(&f, &b, &opts, cmd.repeats)?;
    println!(
        "n = {}, d = {}, samples = {} ({} distinct){}",
        f.nrows(),
        f.ncols(),
        sol.n_samples,
        sol.unique_rows,
        if sol.full { ", full problem" } else { "" }
    );
    println!(
        "blocks: heights {:?}, {} rows each, boost {}",
        sol.basis.heights, sol.basis.rows_per_block, sol.basis.boost
    );
    println!("sampled objective = {}", sol.sampled_objective);
    println!("l1 residual = {cost}");
    cmd.problem.save(&sol.x)
}

fn run_pspline(cmd: &PsplineCmd) -> Result<()> {
    let (f, b) = cmd.load()?;
    let penalty = PenaltySpec::difference(f.col_dims(), cmd.order, cmd.lambda)?;
    let opts = PsplineOptions {
        eps: cmd.eps,
        size_constant: cmd.k_const,
        m_override: cmd.m_override,
        seed: cmd.seed,
        ..PsplineOptions::default()
    };
    let sol = sketched_pspline(&f, &penalty, &b, &opts)?;
    if let Some(w) = &sol.warning {
        eprintln!("warning: {w}");
    }
    println!("n = {}, d = {}, m = {}{}", f.nrows(), f.ncols(), sol.m, if sol.identity { " (full problem)" } else { "" });
    if let Some(sd) = sol.stat_dim {
        println!("statistical dimension = {sd}");
    }
    println!("sketched objective = {}", sol.sketched_objective);
    println!("residual = {}", norm2(&residual(&f, &sol.x, &b)));
    if let Some(p) = &cmd.csv {
        write_csv_vector(p, &sol.x)?;
    }
    Ok(())
}

fn run_bench(cmd: &BenchCmd) -> Result<()> {
    let example = match cmd.example {
        BenchExample::L2 => Example::L2,
        BenchExample::L1 => Example::L1,
        BenchExample::Pspline => Example::Pspline,
    };
    let mut cfg = ExperimentConfig::preset(example);
    cfg.oracle_cap = oracle_cap_from_env(cfg.oracle_cap)?;
    if let Some(path) = &cmd.config {
        ConfigOverrides::from_file(path)?.apply(&mut cfg);
    }
    cmd.overrides().apply(&mut cfg);
    let result = run_experiment(&cfg)?;
    emit_table(&result, cfg.output.as_deref(), &mut std::io::stdout().lock())
}

fn run_oracle(cmd: &OracleCmd) -> Result<()> {
    let (f, b) = cmd.problem.load()?;
    let cap = match cmd.cap {
        Some(c) => c,
        None => oracle_cap_from_env(DEFAULT_ORACLE_CAP)?,
    };
    let sol = match cmd.kind {
        OracleKind::L2 => oracle_l2(&f, &b, cap)?,
        OracleKind::Nnls => oracle_nnls(&f, &b, cap)?,
        OracleKind::L1 => oracle_l1(&f, &b, cap)?,
        OracleKind::Pspline => {
            let pen = PenaltySpec::difference(f.col_dims(), cmd.order, cmd.lambda)?;
            oracle_pspline(&f, &pen.matrix, cmd.lambda, &b, cap)?
        }
    };
    println!("objective = {}", sol.objective);
    if matches!(cmd.kind, OracleKind::L1) {
        println!("l1 residual = {}", norm1(&residual(&f, &sol.x, &b)));
    }
    cmd.problem.save(&sol.x)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::L2(c) => run_l2(c),
        Command::L1(c) => run_l1(c),
        Command::Pspline(c) => run_pspline(c),
        Command::Bench(c) => run_bench(c),
        Command::Oracle(c) => run_oracle(c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_infeasible() { 2 } else { 1 })
        }
    }
}
