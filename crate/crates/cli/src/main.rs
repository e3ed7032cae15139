use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use divkit::divergence::{closed_form, named_divergence, partition_sum, supsum_estimate};
use divkit::dynsys::{
    t_entropy, t_entropy_n_def1, t_entropy_profile, variational_check, INVARIANCE_TOL,
    T_ENTROPY_N_MAX,
};
use divkit::io::{read_measure, read_potential, read_system};
use divkit::measure::radon_nikodym;
use divkit::verify::{run_suites, Suite, SuiteReport, VerifyConfig};
use divkit::{
    Domain, Error, ExtReal, ExtendedConvexFunction, FiniteMeasure, Generator, InvariantMeasure,
    Measure, PartitionOfUnity, Potential, SignedMeasure, SupportLine,
};

const EXIT_INPUT: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "divkit", version, about = "Sup-sums F-divergences and t-entropy of finite dynamical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Numeric tolerance (invariance, spectral convergence).
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// Iteration budget for the mixture-weight fixed point.
    #[arg(long, global = true, default_value_t = divkit::dynsys::EM_MAX_ITERS)]
    iters: usize,
    #[arg(long, global = true, value_enum, default_value_t = Output::Plain)]
    output: Output,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Plain,
    Structured,
}

#[derive(Args)]
struct GeneratorArgs {
    /// kl | hellinger | total_variation | pearson_chi2 | alpha | alpha:<value>
    #[arg(long = "f")]
    f: String,
    /// Parameter of the alpha generator.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
}

impl GeneratorArgs {
    fn generator(&self) -> Result<Generator, Error> {
        match self.alpha {
            Some(a) => Generator::from_name(&self.f, Some(a)),
            None => self.f.parse(),
        }
    }
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    nu: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form divergence of nu from mu.
    Divergence {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        pair: PairArgs,
        /// Print the three terms and the decomposition.
        #[arg(long)]
        report: bool,
    },
    /// Lebesgue decomposition of nu with respect to mu.
    Decompose {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Compare sampled partition sums with the closed form.
    Supsums {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 6)]
        k_max: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// t-entropy of an invariant measure.
    Tentropy {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        mu: PathBuf,
        #[arg(long, default_value_t = T_ENTROPY_N_MAX)]
        n_max: usize,
    },
    /// Spectral potential against the variational maximum.
    Variational {
        #[arg(long)]
        system: PathBuf,
        /// Potential file; defaults to the system's `phi`, then to 0.
        #[arg(long)]
        phi: Option<PathBuf>,
    },
    /// Seeded property batches.
    Verify {
        /// Run a single suite.
        suite: Option<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 6)]
        k_max: usize,
        /// Replay one instance index.
        #[arg(long)]
        index: Option<u64>,
        /// Replace the generators by a total-variation function with a wrong
        /// asymptotic slope. Exercises the failure path.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

/// Error carrying the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence { .. } => EXIT_NUMERIC,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

type Outcome = Result<(), Failure>;

fn emit<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn check_positive(name: &str, v: f64) -> Outcome {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(input(format!("--{name} must be positive, got {v}")))
    }
}

fn nonnegative(nu: SignedMeasure, which: &str) -> Result<FiniteMeasure, Failure> {
    FiniteMeasure::try_from(nu).map_err(|e| input(format!("{which}: {e}")))
}

fn read_pair(pair: &PairArgs) -> Result<(FiniteMeasure, SignedMeasure), Failure> {
    let mu = nonnegative(read_measure(&pair.mu)?, "mu")?;
    let nu = read_measure(&pair.nu)?;
    mu.space().check_same(nu.space())?;
    Ok((mu, nu))
}

#[derive(Serialize)]
struct MeasureOut<'a> {
    space: &'a [String],
    weights: &'a [f64],
}

fn measure_out<M: Measure>(m: &M) -> MeasureOut<'_> {
    MeasureOut { space: m.space().labels(), weights: m.weights() }
}

#[derive(Serialize)]
struct DivergenceOut<'a> {
    generator: String,
    value: ExtReal,
    #[serde(skip_serializing_if = "Option::is_none")]
    terms: Option<Terms<'a>>,
}

#[derive(Serialize)]
struct Terms<'a> {
    absolutely_continuous: ExtReal,
    singular_plus: ExtReal,
    singular_minus: ExtReal,
    nu_a: MeasureOut<'a>,
    nu_s_plus: MeasureOut<'a>,
    nu_s_minus: MeasureOut<'a>,
}

fn run_divergence(common: &Common, g: &GeneratorArgs, pair: &PairArgs, report: bool) -> Outcome {
    let generator = g.generator()?;
    let (mu, nu) = read_pair(pair)?;
    let r = named_divergence(generator, &mu, &nu)?;
    let d = &r.decomposition;
    if common.output == Output::Structured {
        emit(&DivergenceOut {
            generator: generator.to_string(),
            value: r.value,
            terms: report.then(|| Terms {
                absolutely_continuous: r.ac_term,
                singular_plus: r.sing_plus_term,
                singular_minus: r.sing_minus_term,
                nu_a: measure_out(&d.nu_a),
                nu_s_plus: measure_out(&d.nu_s_plus),
                nu_s_minus: measure_out(&d.nu_s_minus),
            }),
        });
    } else if report {
        println!("generator         {generator}");
        println!("value             {:.12}", r.value);
        println!("absolutely cont.  {:.12}", r.ac_term);
        println!("singular +        {:.12}", r.sing_plus_term);
        println!("singular -        {:.12}", r.sing_minus_term);
        println!("singular masses   {} / {}", d.singular_plus_mass(), d.singular_minus_mass());
    } else {
        println!("{:.12}", r.value);
    }
    Ok(())
}

#[derive(Serialize)]
struct DecomposeOut<'a> {
    nu_a: MeasureOut<'a>,
    nu_s_plus: MeasureOut<'a>,
    nu_s_minus: MeasureOut<'a>,
    /// d nu_a / d mu, 0 off the support of mu.
    density: &'a [f64],
}

fn run_decompose(common: &Common, pair: &PairArgs) -> Outcome {
    let (mu, nu) = read_pair(pair)?;
    let d = nu.lebesgue_decompose(&mu)?;
    let density = radon_nikodym(&d.nu_a, &mu)?;
    if common.output == Output::Structured {
        emit(&DecomposeOut {
            nu_a: measure_out(&d.nu_a),
            nu_s_plus: measure_out(&d.nu_s_plus),
            nu_s_minus: measure_out(&d.nu_s_minus),
            density: density.values(),
        });
    } else {
        println!("{:<12} {:>14} {:>14} {:>14} {:>14}", "atom", "nu_a", "nu_s+", "nu_s-", "dnu_a/dmu");
        for (x, label) in mu.space().labels().iter().enumerate() {
            println!(
                "{:<12} {:>14.9} {:>14.9} {:>14.9} {:>14.9}",
                label,
                d.nu_a.weights()[x],
                d.nu_s_plus.weights()[x],
                d.nu_s_minus.weights()[x],
                density.values()[x]
            );
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SupsumsOut {
    generator: String,
    closed_form: ExtReal,
    atomic: ExtReal,
    best_sampled: ExtReal,
    k_max: usize,
    samples: usize,
    seed: u64,
}

fn run_supsums(common: &Common, g: &GeneratorArgs, pair: &PairArgs, k_max: usize, samples: usize, seed: u64) -> Outcome {
    if k_max == 0 {
        return Err(input("--k-max must be positive"));
    }
    let generator = g.generator()?;
    let f = ExtendedConvexFunction::builtin(generator)?;
    let (mu, nu) = read_pair(pair)?;
    let closed = closed_form(&f, &mu, &nu)?.value;
    let atomic = partition_sum(&f, &mu, &nu, &PartitionOfUnity::atomic(mu.space()))?;
    let best = supsum_estimate(&f, &mu, &nu, k_max, samples, seed)?;
    if common.output == Output::Structured {
        emit(&SupsumsOut {
            generator: generator.to_string(),
            closed_form: closed,
            atomic,
            best_sampled: best,
            k_max,
            samples,
            seed,
        });
    } else {
        println!("closed form       {closed:.12}");
        println!("atomic partition  {atomic:.12}");
        println!("best of {samples} sampled (k <= {k_max}, seed {seed}) and atomic  {best:.12}");
    }
    Ok(())
}

fn load_invariant(system: &Path, mu: &Path, tol: f64) -> Result<(divkit::TransferOperator, InvariantMeasure), Failure> {
    let (op, _) = read_system(system)?;
    let m = nonnegative(read_measure(mu)?, "mu")?;
    op.system().space().check_same(m.space())?;
    let inv = InvariantMeasure::new(op.system(), m, tol)?;
    Ok((op, inv))
}

#[derive(Serialize)]
struct TentropyRow {
    n: usize,
    tau_n: ExtReal,
    tau_n_over_n: ExtReal,
    /// -D_KL(mu || A*^n mu) / n, the same quantity read as a divergence.
    neg_kl_over_n: ExtReal,
    /// Mixture-weight sup over the atomic partition.
    mixture_sup: ExtReal,
}

#[derive(Serialize)]
struct TentropyOut {
    rows: Vec<TentropyRow>,
    tau: ExtReal,
}

fn per_step(v: ExtReal, n: usize) -> ExtReal {
    match v {
        ExtReal::Finite(x) => ExtReal::Finite(x / n as f64),
        inf => inf,
    }
}

fn run_tentropy(common: &Common, system: &Path, mu: &Path, n_max: usize) -> Outcome {
    if n_max == 0 {
        return Err(input("--n-max must be positive"));
    }
    check_positive("tol", common.tol)?;
    let tol = common.tol.max(INVARIANCE_TOL);
    let (op, inv) = load_invariant(system, mu, tol)?;
    let profile = t_entropy_profile(&op, &inv, n_max)?;
    let atomic = PartitionOfUnity::atomic(inv.measure().space());
    let mut rows = Vec::with_capacity(n_max);
    for (i, &tau_n) in profile.iter().enumerate() {
        let n = i + 1;
        let def1 = t_entropy_n_def1(&op, inv.measure(), n, &atomic, common.iters, divkit::dynsys::EM_TOL)?;
        let neg_kl = -divkit::divergence::kl_divergence(inv.measure(), &op.adjoint_push(inv.measure(), n)?)?;
        rows.push(TentropyRow {
            n,
            tau_n,
            tau_n_over_n: per_step(tau_n, n),
            neg_kl_over_n: per_step(neg_kl, n),
            mixture_sup: def1,
        });
    }
    let tau = t_entropy(&op, &inv, n_max)?;
    if common.output == Output::Structured {
        emit(&TentropyOut { rows, tau });
    } else {
        println!("{:>4} {:>20} {:>20} {:>20} {:>20}", "n", "tau_n", "tau_n/n", "-D_KL/n", "mixture sup");
        for r in &rows {
            println!(
                "{:>4} {:>20.12} {:>20.12} {:>20.12} {:>20.12}",
                r.n, r.tau_n, r.tau_n_over_n, r.neg_kl_over_n, r.mixture_sup
            );
        }
        println!("tau = {tau:.12}");
    }
    Ok(())
}

#[derive(Serialize)]
struct VariationalOut {
    lambda: ExtReal,
    lambda_cycles: ExtReal,
    cycles: Vec<Vec<String>>,
    vertex_values: Vec<ExtReal>,
    best: ExtReal,
    argmax_cycle: Option<usize>,
    gap: f64,
}

fn run_variational(common: &Common, system: &Path, phi: Option<&Path>) -> Outcome {
    check_positive("tol", common.tol)?;
    let (op, embedded) = read_system(system)?;
    let space = op.system().space().clone();
    let phi = match phi {
        Some(p) => read_potential(p, &space)?,
        None => embedded.unwrap_or_else(|| Potential::zero(space.len())),
    };
    let r = variational_check(&op, &phi, common.tol)?;
    let cycles: Vec<Vec<String>> = op
        .system()
        .enumerate_cycles()
        .cycles
        .iter()
        .map(|c| c.iter().map(|&x| space.labels()[x].clone()).collect())
        .collect();
    if common.output == Output::Structured {
        emit(&VariationalOut {
            lambda: r.lambda,
            lambda_cycles: r.lambda_cycles,
            cycles,
            vertex_values: r.vertex_values,
            best: r.best,
            argmax_cycle: r.argmax_cycle,
            gap: r.gap,
        });
    } else {
        println!("lambda (squaring)  {:.12}", r.lambda);
        println!("lambda (cycles)    {:.12}", r.lambda_cycles);
        for (c, v) in cycles.iter().zip(&r.vertex_values) {
            println!("  cycle [{}]  u[phi] + tau(u) = {v:.12}", c.join(" "));
        }
        println!("max over vertices  {:.12}", r.best);
        println!("gap                {:e}", r.gap);
    }
    Ok(())
}

fn faulty_generator() -> ExtendedConvexFunction {
    ExtendedConvexFunction::from_parts(
        "corrupt_tv",
        Domain::REAL_LINE,
        |t| (t - 1.0).abs(),
        ExtReal::Finite(0.5),
        ExtReal::Finite(-1.0),
        SupportLine { slope: 0.0, intercept: 0.0 },
    )
}

#[derive(Serialize)]
struct SuiteOut<'a> {
    suite: &'a str,
    instances: usize,
    checks: usize,
    failures: Vec<FailureOut<'a>>,
}

#[derive(Serialize)]
struct FailureOut<'a> {
    seed: u64,
    index: u64,
    detail: &'a str,
}

#[derive(Serialize)]
struct VerifyOut<'a> {
    seed: u64,
    trials: usize,
    passed: bool,
    suites: Vec<SuiteOut<'a>>,
}

/// Failures listed per suite in plain output.
const SHOWN_FAILURES: usize = 5;

#[allow(clippy::too_many_arguments)]
fn run_verify(
    common: &Common,
    suite: Option<&str>,
    trials: usize,
    seed: u64,
    samples: usize,
    k_max: usize,
    index: Option<u64>,
    inject_fault: bool,
) -> Outcome {
    if k_max == 0 {
        return Err(input("--k-max must be positive"));
    }
    let suites: Vec<Suite> = match suite {
        Some(name) => vec![name.parse()?],
        None => Suite::ALL.to_vec(),
    };
    let cfg = VerifyConfig {
        trials,
        seed,
        partitions: samples,
        k_max,
        generators: inject_fault.then(|| vec![faulty_generator()]),
        only_index: index,
    };
    let reports: Vec<SuiteReport> = run_suites(&suites, &cfg);
    let passed = reports.iter().all(SuiteReport::passed);
    if common.output == Output::Structured {
        emit(&VerifyOut {
            seed,
            trials,
            passed,
            suites: reports
                .iter()
                .map(|r| SuiteOut {
                    suite: r.suite.name(),
                    instances: r.instances,
                    checks: r.checks,
                    failures: r
                        .failures
                        .iter()
                        .map(|f| FailureOut { seed: f.seed, index: f.index, detail: &f.detail })
                        .collect(),
                })
                .collect(),
        });
    } else {
        println!("{:<14} {:>9} {:>9} {:>9}", "suite", "instances", "checks", "failures");
        for r in &reports {
            println!("{:<14} {:>9} {:>9} {:>9}", r.suite.name(), r.instances, r.checks, r.failures.len());
        }
        for r in reports.iter().filter(|r| !r.passed()) {
            for f in r.failures.iter().take(SHOWN_FAILURES) {
                println!("FAIL {f}");
                println!("  replay: divkit verify {} --seed {} --index {}", f.suite, f.seed, f.index);
            }
            if r.failures.len() > SHOWN_FAILURES {
                println!("  ... {} more in {}", r.failures.len() - SHOWN_FAILURES, r.suite);
            }
        }
        println!("{}", if passed { "all suites passed" } else { "property violations found" });
    }
    if passed {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VIOLATION, message: "property violations found".into() })
    }
}

fn run(cli: &Cli) -> Outcome {
    let common = &cli.common;
    if common.iters == 0 {
        return Err(input("--iters must be positive"));
    }
    match &cli.command {
        Command::Divergence { generator, pair, report } => run_divergence(common, generator, pair, *report),
        Command::Decompose { pair } => run_decompose(common, pair),
        Command::Supsums { generator, pair, k_max, samples, seed } => {
            run_supsums(common, generator, pair, *k_max, *samples, *seed)
        }
        Command::Tentropy { system, mu, n_max } => run_tentropy(common, system, mu, *n_max),
        Command::Variational { system, phi } => run_variational(common, system, phi.as_deref()),
        Command::Verify { suite, trials, seed, samples, k_max, index, inject_fault } => run_verify(
            common,
            suite.as_deref(),
            *trials,
            *seed,
            *samples,
            *k_max,
            *index,
            *inject_fault,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap's own usage status (2) would read as a numeric failure.
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
