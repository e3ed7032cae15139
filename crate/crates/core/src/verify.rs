//! Seeded property batches.
//!
//! Each suite draws `trials` random instances; instance `i` of suite `s`
//! under root seed `r` is generated from [`instance_rng`]`(r, stream_id(s), i)`
//! alone, so any failure can be replayed in isolation from its
//! `(suite, seed, index)` triple.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::divergence::{
    closed_form, integral, integral_via_partitions, kl_divergence, kl_partition_sum,
    partition_sum,
};
use crate::dynsys::{
    t_entropy, t_entropy_n, t_entropy_n_def1, t_entropy_n_def2_objective, variational_check,
    DynamicalSystem, InvariantMeasure, Potential, TransferOperator, EM_MAX_ITERS, EM_TOL,
    T_ENTROPY_N_MAX,
};
use crate::error::{Error, Result};
use crate::extended_convex::{Direction, ExtReal, ExtendedConvexFunction, Generator};
use crate::measure::{AtomSpace, FiniteMeasure, Measure, SignedMeasure};
use crate::partition::PartitionOfUnity;
use crate::rng::{instance_rng, stream_id};

/// Tolerance for inequalities.
pub const INEQ_TOL: f64 = 1e-9;
/// Tolerance for identities between finite sums.
pub const EQ_TOL: f64 = 1e-12;
/// Tolerance for the two t-entropy definitions.
pub const DEF_TOL: f64 = 1e-6;
/// Tolerance for numeric versus analytic slopes.
pub const SLOPE_CHECK_TOL: f64 = 1e-6;

/// Alpha parameters used by the slope suite.
pub const SLOPE_ALPHAS: [f64; 5] = [-1.5, -1.0, 0.25, 2.0, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Perspective,
    Supsums,
    Subadditivity,
    Additivity,
    Kl,
    Jensen,
    Transfer,
    Spectral,
    TEntropy,
    Definitions,
    Variational,
    Slopes,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Perspective,
        Suite::Supsums,
        Suite::Subadditivity,
        Suite::Additivity,
        Suite::Kl,
        Suite::Jensen,
        Suite::Transfer,
        Suite::Spectral,
        Suite::TEntropy,
        Suite::Definitions,
        Suite::Variational,
        Suite::Slopes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Perspective => "perspective",
            Suite::Supsums => "supsums",
            Suite::Subadditivity => "subadditivity",
            Suite::Additivity => "additivity",
            Suite::Kl => "kl",
            Suite::Jensen => "jensen",
            Suite::Transfer => "transfer",
            Suite::Spectral => "spectral",
            Suite::TEntropy => "tentropy",
            Suite::Definitions => "definitions",
            Suite::Variational => "variational",
            Suite::Slopes => "slopes",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

/// Settings shared by all suites.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    /// Sampled partitions per instance in the partition-based suites.
    pub partitions: usize,
    /// Largest sampled partition size.
    pub k_max: usize,
    /// Replaces the builtin generators; used for fault injection.
    pub generators: Option<Vec<ExtendedConvexFunction>>,
    /// Run only this instance index.
    pub only_index: Option<u64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: 100,
            seed: 0,
            partitions: 200,
            k_max: 6,
            generators: None,
            only_index: None,
        }
    }
}

/// One violated check, with enough to replay it.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub suite: Suite,
    pub seed: u64,
    pub index: u64,
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "suite={} seed={} index={}: {}",
            self.suite, self.seed, self.index, self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub instances: usize,
    pub checks: usize,
    pub failures: Vec<Failure>,
    /// Suite-specific tallies, e.g. how many sampled tuples hit `s = 0`.
    pub counters: BTreeMap<&'static str, usize>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn counter(&self, key: &str) -> usize {
        self.counters.get(key).copied().unwrap_or(0)
    }
}

struct Ctx {
    suite: Suite,
    seed: u64,
    index: u64,
    checks: usize,
    failures: Vec<Failure>,
    counters: BTreeMap<&'static str, usize>,
}

impl Ctx {
    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(Failure {
                suite: self.suite,
                seed: self.seed,
                index: self.index,
                detail: detail(),
            });
        }
    }

    fn fail(&mut self, detail: String) {
        self.check(false, || detail);
    }

    fn count(&mut self, key: &'static str, by: usize) {
        *self.counters.entry(key).or_insert(0) += by;
    }
}

fn le(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    a.le_within(b, tol)
}

fn close(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    a.approx_eq(b, tol)
}

// ---------------------------------------------------------------------------
// Instance generators

pub mod instances {
    //! Random instances shared by the suites, the acceptance tests and the
    //! benches.

    use super::*;

    /// Alpha drawn from `[-2, 3]` away from the excluded values 0 and 1.
    pub fn alpha<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        loop {
            let a: f64 = rng.random_range(-2.0..3.0);
            if a.abs() >= 0.1 && (a - 1.0).abs() >= 0.1 {
                return a;
            }
        }
    }

    /// The four fixed generators plus an alpha generator with random parameter.
    pub fn builtins<R: Rng + ?Sized>(rng: &mut R) -> Vec<ExtendedConvexFunction> {
        let a = alpha(rng);
        Generator::FIXED
            .into_iter()
            .chain([Generator::Alpha(a)])
            .map(|g| ExtendedConvexFunction::builtin(g).expect("valid builtin"))
            .collect()
    }

    /// Nonnegative weights; each atom is 0 with probability `zero_prob`,
    /// otherwise uniform in `[0.05, 1)`.
    pub fn weights<R: Rng + ?Sized>(rng: &mut R, n: usize, zero_prob: f64) -> Vec<f64> {
        (0..n)
            .map(|_| {
                if rng.random_bool(zero_prob) {
                    0.0
                } else {
                    rng.random_range(0.05..1.0)
                }
            })
            .collect()
    }

    /// Signed weights uniform in `[-1, 1)`, 0 with probability `zero_prob`.
    pub fn signed_weights<R: Rng + ?Sized>(rng: &mut R, n: usize, zero_prob: f64) -> Vec<f64> {
        (0..n)
            .map(|_| {
                if rng.random_bool(zero_prob) {
                    0.0
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
            .collect()
    }

    /// `(mu, nu)` on `n` atoms: `mu` has null atoms, `nu` is signed, so all
    /// three Lebesgue parts occur.
    pub fn measure_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (FiniteMeasure, SignedMeasure) {
        let space = AtomSpace::indexed(n).expect("n >= 1");
        let mu = FiniteMeasure::new(space.clone(), weights(rng, n, 0.3)).expect("valid");
        let nu = SignedMeasure::new(space, signed_weights(rng, n, 0.1)).expect("valid");
        (mu, nu)
    }

    pub fn normalize(w: &[f64]) -> Vec<f64> {
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    }

    /// A probability pair with `mu << nu`; `nu = mu` with probability 0.1.
    pub fn kl_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (FiniteMeasure, FiniteMeasure) {
        let space = AtomSpace::indexed(n).expect("n >= 1");
        let mut mu_w = weights(rng, n, 0.3);
        if mu_w.iter().all(|&w| w == 0.0) {
            mu_w[rng.random_range(0..n)] = 1.0;
        }
        let mu_w = normalize(&mu_w);
        let nu_w = if rng.random_bool(0.1) {
            mu_w.clone()
        } else {
            let raw: Vec<f64> = mu_w
                .iter()
                .map(|&m| {
                    if m > 0.0 || rng.random_bool(0.5) {
                        rng.random_range(0.05..1.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            normalize(&raw)
        };
        (
            FiniteMeasure::new(space.clone(), mu_w).expect("valid"),
            FiniteMeasure::new(space, nu_w).expect("valid"),
        )
    }

    /// A random self-map of `n` atoms with weights in `[0.2, 3)`.
    pub fn operator<R: Rng + ?Sized>(rng: &mut R, n: usize) -> TransferOperator {
        let space = AtomSpace::indexed(n).expect("n >= 1");
        let map = (0..n).map(|_| rng.random_range(0..n)).collect();
        let system = DynamicalSystem::new(space, map).expect("valid map");
        let w = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
        TransferOperator::new(system, w).expect("valid operator")
    }

    pub fn potential<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Potential {
        Potential::new((0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).expect("finite")
    }

    /// A random mixture of the cycle vertices.
    pub fn invariant<R: Rng + ?Sized>(rng: &mut R, a: &TransferOperator) -> (InvariantMeasure, Vec<f64>) {
        let vertices = a.system().invariant_vertices();
        let w: Vec<f64> = (0..vertices.len()).map(|_| rng.random_range(0.05..1.0)).collect();
        let w = normalize(&w);
        (InvariantMeasure::mixture(&vertices, &w).expect("valid mixture"), w)
    }

    pub fn partition<R: Rng + ?Sized>(rng: &mut R, space: &AtomSpace, k_max: usize) -> PartitionOfUnity {
        let k = rng.random_range(1..=k_max.max(1));
        PartitionOfUnity::sample_with(space, k, rng).expect("k >= 1")
    }
}

// ---------------------------------------------------------------------------
// Suites

fn generators(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Vec<ExtendedConvexFunction> {
    match &cfg.generators {
        Some(g) => g.clone(),
        None => instances::builtins(rng),
    }
}

fn perspective(ctx: &mut Ctx, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) {
    let gens = generators(cfg, rng);
    let draw = |rng: &mut ChaCha8Rng, zero: f64| -> f64 {
        if rng.random_bool(zero) {
            0.0
        } else {
            rng.random_range(0.0..3.0)
        }
    };
    for f in &gens {
        for _ in 0..4 {
            let (s, t) = (draw(rng, 0.25), draw(rng, 0.25));
            let x: f64 = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(-3.0..3.0) };
            let y: f64 = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(-3.0..3.0) };
            ctx.count("tuples", 1);
            ctx.count("s_zero", (s == 0.0) as usize);
            ctx.count("t_zero", (t == 0.0) as usize);

            let joint = f.perspective(s + t, x + y);
            let split = f.perspective(s, x).checked_add(f.perspective(t, y));
            match split {
                Ok(split) => ctx.check(le(joint, split, INEQ_TOL), || {
                    format!("{}: subadditivity (s,t,x,y)=({s},{t},{x},{y}): {joint} > {split}", f.label())
                }),
                Err(e) => ctx.fail(format!("{}: {e}", f.label())),
            }

            let line = f.superlinear_bounds();
            let p = f.perspective(s, x);
            let bound = ExtReal::Finite(line.slope * x + line.intercept * s);
            ctx.check(le(bound, p, INEQ_TOL), || {
                format!("{}: lower bound (s,x)=({s},{x}): {p} < {bound}", f.label())
            });

            if s > 0.0 {
                let lam: f64 = rng.random_range(0.1..10.0);
                let lhs = f.perspective(lam * s, lam * x);
                let rhs = p.mul_real(lam).expect("lam > 0");
                // Both sides are computed from different arguments, so the
                // comparison is relative.
                let scale = rhs.finite().map_or(1.0, |v| v.abs().max(1.0));
                ctx.check(close(lhs, rhs, INEQ_TOL * scale), || {
                    format!("{}: homogeneity lam={lam} (s,x)=({s},{x}): {lhs} vs {rhs}", f.label())
                });
            }

            let slope = if x > 0.0 {
                f.asymptotic_slope(Direction::Pos)
            } else {
                f.asymptotic_slope(Direction::Neg)
            };
            if x != 0.0 && slope.is_finite() {
                let at_zero = f.perspective(0.0, x).to_f64();
                let err = |k: i32| (f.perspective(2f64.powi(-k), x).to_f64() - at_zero).abs();
                let (coarse, fine) = (err(20), err(60));
                ctx.check(fine <= (0.5 * coarse).max(INEQ_TOL), || {
                    format!("{}: s -> 0 limit at x={x}: error {fine} after {coarse}", f.label())
                });
            }
        }
    }
}

fn supsums(ctx: &mut Ctx, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) {
    let n = rng.random_range(1..=6);
    let (mu, nu) = instances::measure_pair(rng, n);
    let gens = generators(cfg, rng);
    let parts: Vec<PartitionOfUnity> =
        (0..cfg.partitions).map(|_| instances::partition(rng, mu.space(), cfg.k_max)).collect();
    let extra = instances::partition(rng, mu.space(), cfg.k_max);
    let atomic = PartitionOfUnity::atomic(mu.space());
    let dec = nu.lebesgue_decompose(&mu).expect("same space");
    if dec.singular_plus_mass() != 0.0 || dec.singular_minus_mass() != 0.0 {
        ctx.count("singular_instances", 1);
    }
    ctx.count("instances", 1);
    for f in &gens {
        let report = match closed_form(f, &mu, &nu) {
            Ok(r) => r,
            Err(e) => return ctx.fail(format!("{}: closed form failed: {e}", f.label())),
        };
        let closed = report.value;
        match partition_sum(f, &mu, &nu, &atomic) {
            Ok(v) => ctx.check(close(v, closed, EQ_TOL), || {
                format!("{}: atomic sum {v} != closed form {closed} (mu={:?}, nu={:?})", f.label(), mu.weights(), nu.weights())
            }),
            Err(e) => ctx.fail(format!("{}: {e}", f.label())),
        }
        let sp = ExtReal::singular_product(dec.singular_plus_mass(), f.asymptotic_slope(Direction::Pos));
        let sm = ExtReal::singular_product(dec.singular_minus_mass(), f.asymptotic_slope(Direction::Neg));
        ctx.check(report.sing_plus_term == sp && report.sing_minus_term == sm, || {
            format!("{}: singular terms {}/{} expected {sp}/{sm}", f.label(), report.sing_plus_term, report.sing_minus_term)
        });
        ctx.check(report.sing_minus_term != ExtReal::NegInf, || format!("{}: -inf singular term", f.label()));
        for g in &parts {
            ctx.count("partitions", 1);
            match partition_sum(f, &mu, &nu, g) {
                Ok(v) => ctx.check(le(v, closed, INEQ_TOL), || {
                    format!("{}: sampled partition sum {v} exceeds closed form {closed}", f.label())
                }),
                Err(e) => ctx.fail(format!("{}: {e}", f.label())),
            }
        }
        let refined = parts[0].refine(&extra).expect("same space");
        match (partition_sum(f, &mu, &nu, &parts[0]), partition_sum(f, &mu, &nu, &refined)) {
            (Ok(coarse), Ok(fine)) => ctx.check(le(coarse, fine, INEQ_TOL), || {
                format!("{}: refinement decreased the sum: {coarse} > {fine}", f.label())
            }),
            (Err(e), _) | (_, Err(e)) => ctx.fail(format!("{}: {e}", f.label())),
        }
    }
}

fn subadditivity(ctx: &mut Ctx, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) {
    let n = rng.random_range(1..=6);
    let (mu1, nu1) = instances::measure_pair(rng, n);
    let (mu2, nu2) = instances::measure_pair(rng, n);
    let mu = mu1.checked_add(&mu2).expect("same space");
    let nu = nu1.checked_add(&nu2).expect("same space");
    for f in &generators(cfg, rng) {
        let r = (|| -> Result<(ExtReal, ExtReal)> {
            let joint = closed_form(f, &mu, &nu)?.value;
            let split = closed_form(f, &mu1, &nu1)?.value.checked_add(closed_form(f, &mu2, &nu2)?.value)?;
            Ok((joint, split))
        })();
        match r {
            Ok((joint, split)) => ctx.check(le(joint, split, INEQ_TOL), || {
                format!("{}: rho(mu1+mu2, nu1+nu2) = {joint} > {split}", f.label())
            }),
            Err(e) => ctx.fail(format!("{}: {e}", f.label())),
        }
    }
}

fn additivity(ctx: &mut Ctx, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) {
    let n = rng.random_range(1..=6);
    let (mu, nu) = instances::measure_pair(rng, n);
    let density = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n)
            .map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random_range(0.0..2.0) })
            .collect()
    };
    let (f1, f2) = (density(rng), density(rng));
    let f12: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
    for f in &generators(cfg, rng) {
        let r = (|| -> Result<(ExtReal, ExtReal)> {
            let rho = |d: &[f64]| -> Result<ExtReal> {
                Ok(closed_form(f, &mu.apply_density(d)?, &nu.apply_density(d)?)?.value)
            };
            Ok((rho(&f12)?, rho(&f1)?.checked_add(rho(&f2)?)?))
        })();
        match r {
            Ok((joint, split)) => ctx.check(close(joint, split, INEQ_TOL), || {
                format!("{}: rho((f1+f2)mu, (f1+f2)nu) = {joint} vs {split}", f.label())
            }),
            Err(e) => ctx.fail(format!("{}: {e}", f.label())),
        }
    }
}

fn kl(ctx: &mut Ctx, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) {
    let n = rng.random_range(1..=6);
    let (mu, nu) = instances::kl_pair(rng, n);
    let value = match kl_divergence(&mu, &nu) {
        Ok(v) => v,
        Err(e) => return ctx.fail(e.to_string()),
    };
    let direct: f64 = mu
        .weights()
        .iter()
        .zip(nu.weights())
        .filter(|(&m, _)| m > 0.0)
        .map(|(&m, &v)| m * (m / v).ln())
        .sum();
    ctx.check(value.approx_eq(ExtReal::Finite(direct), EQ_TOL), || {
        format!("kl {value} vs direct sum {direct}")
    });

    let nu_s = nu.to_signed();
    let nu_a = nu_s.lebesgue_decompose(&mu).expect("same space").nu_a;
    let atomic = PartitionOfUnity::atomic(mu.space());
    for target in [&nu_s, &nu_a] {
        match kl_partition_sum(&mu, target, &atomic) {
            Ok(v) => ctx.check(v.approx_eq(value, EQ_TOL), || format!("atomic kl sum {v} vs {value}")),
            Err(e) => ctx.fail(e.to_string()),
        }
    }
    for _ in 0..cfg.partitions {
        let g = instances::partition(rng, mu.space(), cfg.k_max);
        for target in [&nu_s, &nu_a] {
            match kl_partition_sum(&mu, target, &g) {
                Ok(v) => ctx.check(v.le_within(value, INEQ_TOL), || format!("sampled kl sum {v} exceeds {value}")),
                Err(e) => ctx.fail(e.to_string()),
            }
        }
    }

    let l1: f64 = mu.weights().iter().zip(nu.weights()).map(|(a, b)| (a - b).abs()).sum();
    let v = value.to_f64();
    ctx.check(v >= -EQ_TOL, || format!("negative kl {v}"));
    if mu == nu {
        ctx.count("equal_pairs", 1);
        ctx.check(v.abs() <= EQ_TOL, || format!("kl(mu, mu) = {v}"));
    } else {
        // Pinsker: kl >= |mu - nu|_1^2 / 2, which is strictly positive here.
        ctx.check(v >= 0.5 * l1 * l1 - EQ_TOL && v > 0.0, || {
            format!("kl {v} below Pinsker bound {}", 0.5 * l1 * l1)
        });
    }

    // Extension to finite positive measures that are not probabilities:
    // scale nu and add mass where mu vanishes; the sup-sums identities persist.
    let c: f64 = rng.random_range(0.2..3.0);
    let extended: Vec<f64> = mu
        .weights()
        .iter()
        .zip(nu.weights())
        .map(|(&m, &w)| if m > 0.0 { c * w } else { w + rng.random_range(0.0..1.0) })
        .collect();
    let ext = FiniteMeasure::new(mu.space().clone(), extended).expect("valid");
    match (kl_divergence(&mu, &ext), kl_partition_sum(&mu, &ext.to_signed(), &atomic)) {
        (Ok(a), Ok(b)) => ctx.check(a.approx_eq(b, EQ_TOL), || format!("extended kl {a} vs atomic {b}")),
        (Err(e), _) | (_, Err(e)) => ctx.fail(e.to_string()),
    }
}

fn jensen(ctx: &mut Ctx, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) {
    let n = rng.random_range(1..=6);
    let space = AtomSpace::indexed(n).expect("n >= 1");
    let mu = FiniteMeasure::new(space.clone(), instances::weights(rng, n, 0.3)).expect("valid");
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let atomic = PartitionOfUnity::atomic(&space);
    let parts: Vec<PartitionOfUnity> =
        (0..cfg.partitions.min(50)).map(|_| instances::partition(rng, &space, cfg.k_max)).collect();
    for f in &generators(cfg, rng) {
        let direct = match integral(f, &values, &mu) {
            Ok(v) => v,
            Err(e) => return ctx.fail(e.to_string()),
        };
        match integral_via_partitions(f, &values, &mu, &atomic) {
            Ok(v) => ctx.check(close(v, direct, EQ_TOL), || format!("{}: atomic {v} vs integral {direct}", f.label())),
            Err(e) => ctx.fail(e.to_string()),
        }
        for g in &parts {
            match integral_via_partitions(f, &values, &mu, g) {
                Ok(v) => ctx.check(le(v, direct, INEQ_TOL), || format!("{}: partition {v} exceeds integral {direct}", f.label())),
                Err(e) => ctx.fail(e.to_string()),
            }
        }
    }
}

fn transfer(ctx: &mut Ctx, _cfg: &VerifyConfig, rng: &mut ChaCha8Rng) {
    let n = rng.random_range(1..=8);
    let a = instances::operator(rng, n);
    for _ in 0..100 {
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = a.homological_residual(&f, &g).expect("same space");
        ctx.check(r < EQ_TOL, || format!("homological residual {r}"));
        let pos: Vec<f64> = f.iter().map(|v| v.abs()).collect();
        let image = a.apply(&pos).expect("same space");
        ctx.check(image.iter().all(|&v| v >= 0.0), || "positivity violated".into());
    }
    let mu = FiniteMeasure::new(a.system().space().clone(), instances::weights(rng, n, 0.2)).expect("valid");
    for k in 1..=4 {
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs = mu.integrate(&a.apply_power(&g, k).expect("ok")).expect("ok");
        let rhs = a.adjoint_push(&mu, k).expect("ok").integrate(&g).expect("ok");
        ctx.check((lhs - rhs).abs() < EQ_TOL, || {
            format!("adjoint identity n={k}: {lhs} vs {rhs}")
        });
    }
}

fn spectral(ctx: &mut Ctx, _cfg: &VerifyConfig, rng: &mut ChaCha8Rng) {
    let n = rng.random_range(1..=8);
    let mut a = instances::operator(rng, n);
    if rng.random_bool(0.2) {
        let mut w = a.weights().to_vec();
        w[rng.random_range(0..n)] = 0.0;
        a = TransferOperator::new(a.system().clone(), w).expect("valid");
        ctx.count("with_zero_weight", 1);
    }
    let phi = instances::potential(rng, n);
    match (a.spectral_potential(&phi, 1e-12), a.spectral_potential_cycles(&phi)) {
        (Ok(p), Ok(c)) => ctx.check(p.approx_eq(c, INEQ_TOL), || format!("power {p} vs cycles {c}")),
        (Err(e), _) | (_, Err(e)) => ctx.fail(e.to_string()),
    }
}

fn tentropy(ctx: &mut Ctx, _cfg: &VerifyConfig, rng: &mut ChaCha8Rng) {
    let n = rng.random_range(1..=8);
    let a = instances::operator(rng, n);
    let cycles = a.system().enumerate_cycles().cycles;
    let zero = vec![0.0; n];
    let averages: Vec<f64> = cycles
        .iter()
        .map(|c| a.cycle_average(c, &zero).to_f64())
        .collect();
    for (u, &avg) in a.system().invariant_vertices().iter().zip(&averages) {
        for k in 1..=8 {
            match t_entropy_n(&a, u, k) {
                Ok(t) => ctx.check(t.approx_eq(ExtReal::Finite(k as f64 * avg), INEQ_TOL * k as f64), || {
                    format!("tau_{k} = {t} vs {k} * cycle average {avg}")
                }),
                Err(e) => ctx.fail(e.to_string()),
            }
        }
        match t_entropy(&a, u, T_ENTROPY_N_MAX) {
            Ok(t) => ctx.check(t.approx_eq(ExtReal::Finite(avg), INEQ_TOL), || format!("tau = {t} vs {avg}")),
            Err(e) => ctx.fail(e.to_string()),
        }
    }
    let (mu, w) = instances::invariant(rng, &a);
    let expected: f64 = w.iter().zip(&averages).map(|(a, b)| a * b).sum();
    for k in 1..=4 {
        match t_entropy_n(&a, &mu, k) {
            Ok(t) => ctx.check(t.approx_eq(ExtReal::Finite(k as f64 * expected), INEQ_TOL * k as f64), || {
                format!("mixture tau_{k} = {t} vs {}", k as f64 * expected)
            }),
            Err(e) => ctx.fail(e.to_string()),
        }
    }
}

fn definitions(ctx: &mut Ctx, cfg: &VerifyConfig, rng: &mut ChaCha8Rng) {
    let n = rng.random_range(1..=6);
    let a = instances::operator(rng, n);
    let (mu, _) = instances::invariant(rng, &a);
    let m = mu.measure();
    let atomic = PartitionOfUnity::atomic(m.space());
    // An exhausted iteration budget still yields a lower bound for the
    // supremum, which is what the checks below compare against.
    let def1 = |ctx: &mut Ctx, g: &PartitionOfUnity, k: usize| -> Result<ExtReal> {
        match t_entropy_n_def1(&a, m, k, g, EM_MAX_ITERS, EM_TOL) {
            Err(Error::NonConvergence { best: Some(b), .. }) => {
                ctx.count("em_budget_exhausted", 1);
                Ok(ExtReal::Finite(b))
            }
            other => other,
        }
    };
    for k in 1..=3 {
        let tau = match t_entropy_n(&a, &mu, k) {
            Ok(t) => t,
            Err(e) => return ctx.fail(e.to_string()),
        };
        match def1(ctx, &atomic, k) {
            Ok(v) => ctx.check(v.approx_eq(tau, DEF_TOL), || format!("n={k}: def1(atomic) {v} vs tau_n {tau}")),
            Err(e) => ctx.fail(e.to_string()),
        }
        let mut inf = match t_entropy_n_def2_objective(&a, m, k, &atomic) {
            Ok(v) => {
                ctx.check(v.approx_eq(tau, DEF_TOL), || format!("n={k}: def2(atomic) {v} vs tau_n {tau}"));
                v
            }
            Err(e) => return ctx.fail(e.to_string()),
        };
        for _ in 0..cfg.partitions.min(8) {
            let g = instances::partition(rng, m.space(), cfg.k_max.min(4));
            ctx.count("partitions", 1);
            match def1(ctx, &g, k) {
                Ok(v) => ctx.check(tau.le_within(v, DEF_TOL), || format!("n={k}: def1(G) {v} below tau_n {tau}")),
                Err(e) => ctx.fail(e.to_string()),
            }
            match t_entropy_n_def2_objective(&a, m, k, &g) {
                Ok(v) => {
                    ctx.check(tau.le_within(v, DEF_TOL), || format!("n={k}: def2(G) {v} below tau_n {tau}"));
                    inf = inf.min(v);
                }
                Err(e) => ctx.fail(e.to_string()),
            }
        }
        ctx.check(inf.approx_eq(tau, DEF_TOL), || format!("n={k}: inf over partitions {inf} vs tau_n {tau}"));
    }
}

fn variational(ctx: &mut Ctx, _cfg: &VerifyConfig, rng: &mut ChaCha8Rng) {
    let n = rng.random_range(1..=8);
    let a = instances::operator(rng, n);
    let phi = instances::potential(rng, n);
    match variational_check(&a, &phi, 1e-12) {
        Ok(r) => {
            ctx.check(r.gap <= INEQ_TOL, || format!("gap {} (lambda {}, best {})", r.gap, r.lambda, r.best));
            ctx.check(r.lambda.approx_eq(r.lambda_cycles, INEQ_TOL), || {
                format!("lambda by squaring {} vs by cycles {}", r.lambda, r.lambda_cycles)
            });
        }
        Err(e) => ctx.fail(e.to_string()),
    }
}

fn slopes(ctx: &mut Ctx, cfg: &VerifyConfig) {
    let funcs: Vec<ExtendedConvexFunction> = match &cfg.generators {
        Some(g) => g.clone(),
        None => Generator::FIXED
            .into_iter()
            .chain(SLOPE_ALPHAS.map(Generator::Alpha))
            .map(|g| ExtendedConvexFunction::builtin(g).expect("valid builtin"))
            .collect(),
    };
    for f in &funcs {
        for dir in [Direction::Pos, Direction::Neg] {
            let analytic = f.asymptotic_slope(dir);
            match f.numeric_slope(dir) {
                Ok(numeric) => ctx.check(numeric.approx_eq(analytic, SLOPE_CHECK_TOL), || {
                    format!("{} {dir:?}: numeric slope {numeric} vs analytic {analytic}", f.label())
                }),
                Err(e) => ctx.fail(format!("{} {dir:?}: {e}", f.label())),
            }
        }
    }
}

/// Runs one suite.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> SuiteReport {
    let mut ctx = Ctx {
        suite,
        seed: cfg.seed,
        index: 0,
        checks: 0,
        failures: Vec::new(),
        counters: BTreeMap::new(),
    };
    let stream = stream_id(suite.name());
    let indices: Vec<u64> = match cfg.only_index {
        Some(i) => vec![i],
        None => (0..cfg.trials as u64).collect(),
    };
    let mut instances = 0;
    if suite == Suite::Slopes {
        // Deterministic; one pass unless the batch is empty.
        if !indices.is_empty() {
            slopes(&mut ctx, cfg);
            instances = 1;
        }
    } else {
        for &i in &indices {
            ctx.index = i;
            let mut rng = instance_rng(cfg.seed, stream, i);
            match suite {
                Suite::Perspective => perspective(&mut ctx, cfg, &mut rng),
                Suite::Supsums => supsums(&mut ctx, cfg, &mut rng),
                Suite::Subadditivity => subadditivity(&mut ctx, cfg, &mut rng),
                Suite::Additivity => additivity(&mut ctx, cfg, &mut rng),
                Suite::Kl => kl(&mut ctx, cfg, &mut rng),
                Suite::Jensen => jensen(&mut ctx, cfg, &mut rng),
                Suite::Transfer => transfer(&mut ctx, cfg, &mut rng),
                Suite::Spectral => spectral(&mut ctx, cfg, &mut rng),
                Suite::TEntropy => tentropy(&mut ctx, cfg, &mut rng),
                Suite::Definitions => definitions(&mut ctx, cfg, &mut rng),
                Suite::Variational => variational(&mut ctx, cfg, &mut rng),
                Suite::Slopes => unreachable!(),
            }
            instances += 1;
        }
    }
    SuiteReport {
        suite,
        instances,
        checks: ctx.checks,
        failures: ctx.failures,
        counters: ctx.counters,
    }
}

/// Runs the given suites in order.
pub fn run_suites(suites: &[Suite], cfg: &VerifyConfig) -> Vec<SuiteReport> {
    suites.iter().map(|&s| run_suite(s, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extended_convex::{Domain, SupportLine};

    #[test]
    fn suite_names_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn empty_batch_passes_vacuously() {
        let cfg = VerifyConfig { trials: 0, ..VerifyConfig::default() };
        for r in run_suites(&Suite::ALL, &cfg) {
            assert!(r.passed());
            assert_eq!(r.instances, 0);
            assert_eq!(r.checks, 0);
        }
    }

    #[test]
    fn small_batches_pass() {
        let cfg = VerifyConfig { trials: 10, seed: 3, partitions: 20, ..VerifyConfig::default() };
        for r in run_suites(&Suite::ALL, &cfg) {
            assert!(r.passed(), "{}: {:?}", r.suite, r.failures.first());
            assert!(r.checks > 0);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = VerifyConfig { trials: 5, seed: 11, partitions: 10, ..VerifyConfig::default() };
        assert_eq!(run_suite(Suite::Supsums, &cfg), run_suite(Suite::Supsums, &cfg));
    }

    #[test]
    fn corrupted_slope_is_caught_and_replayable() {
        // |t - 1| with F'(+inf) misreported as 0.5.
        let bad = ExtendedConvexFunction::from_parts(
            "corrupt_tv",
            Domain::REAL_LINE,
            |t| (t - 1.0).abs(),
            ExtReal::Finite(0.5),
            ExtReal::Finite(-1.0),
            SupportLine { slope: 0.0, intercept: 0.0 },
        );
        let cfg = VerifyConfig {
            trials: 50,
            seed: 7,
            generators: Some(vec![bad]),
            ..VerifyConfig::default()
        };
        let r = run_suite(Suite::Perspective, &cfg);
        assert!(!r.passed());
        let first = r.failures[0].clone();
        let replay = run_suite(Suite::Perspective, &VerifyConfig { only_index: Some(first.index), ..cfg });
        assert_eq!(replay.failures.first(), Some(&first));
    }
}
