//! Sup-sums F-divergence and its closed form.
//!
//! For a partition of unity `G` the sup-sums sum is
//! `sum_g mu[g] F(nu[g] / mu[g])`, each term read as the perspective of `F`
//! so that `mu[g] = 0` falls back on the asymptotic slopes. Its supremum
//! over `G` is
//!
//! ```text
//! int F(d nu_a / d mu) d mu + nu_s+(X) F'(+inf) + nu_s-(X) F'(-inf)
//! ```
//!
//! with a vanishing singular part contributing 0 whatever the slope. On a
//! finite atom set the atomic partition attains it, so [`closed_form`] is the
//! reported value and the partition sums serve as its check.

use rand::Rng;

use crate::error::{Error, Result};
use crate::extended_convex::{Direction, ExtReal, ExtendedConvexFunction, Generator};
use crate::measure::{radon_nikodym, FiniteMeasure, LebesgueDecomposition, Measure, SignedMeasure};
use crate::partition::{PartitionOfUnity, PARTITION_TOL};
use crate::rng::{instance_rng, stream_id};

/// The three terms of the closed form and the decomposition they come from.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub value: ExtReal,
    /// `int F(d nu_a / d mu) d mu`
    pub ac_term: ExtReal,
    /// `nu_s+(X) F'(+inf)`
    pub sing_plus_term: ExtReal,
    /// `nu_s-(X) F'(-inf)`
    pub sing_minus_term: ExtReal,
    pub decomposition: LebesgueDecomposition,
}

fn bounded_below(v: ExtReal, context: &'static str) -> Result<ExtReal> {
    if v == ExtReal::NegInf {
        Err(Error::UnboundedBelow { context })
    } else {
        Ok(v)
    }
}

/// `mu[g] F(nu[g] / mu[g])` with the zero-mass convention.
pub fn supsum_term(
    f: &ExtendedConvexFunction,
    mu: &FiniteMeasure,
    nu: &SignedMeasure,
    g: &[f64],
) -> Result<ExtReal> {
    mu.space().check_same(nu.space())?;
    let s = mu.integrate(g)?;
    let x = nu.integrate(g)?;
    bounded_below(f.perspective(s.max(0.0), x), "sup-sums term")
}

/// `sum_{g in G} mu[g] F(nu[g] / mu[g])` for a valid partition `G`.
pub fn partition_sum(
    f: &ExtendedConvexFunction,
    mu: &FiniteMeasure,
    nu: &SignedMeasure,
    partition: &PartitionOfUnity,
) -> Result<ExtReal> {
    mu.space().check_same(partition.space())?;
    if !partition.validate(PARTITION_TOL) {
        return Err(Error::InvalidPartition("not a partition of unity".into()));
    }
    let terms = partition
        .elements()
        .iter()
        .map(|g| supsum_term(f, mu, nu, g))
        .collect::<Result<Vec<_>>>()?;
    ExtReal::checked_sum(terms)
}

/// The closed form of the sup-sums divergence.
pub fn closed_form(
    f: &ExtendedConvexFunction,
    mu: &FiniteMeasure,
    nu: &SignedMeasure,
) -> Result<DivergenceReport> {
    let decomposition = nu.lebesgue_decompose(mu)?;
    let density = radon_nikodym(&decomposition.nu_a, mu)?;
    let ac_terms = mu
        .weights()
        .iter()
        .zip(density.values())
        .filter(|(&m, _)| m > 0.0)
        .map(|(&m, &d)| f.eval(d).mul_real(m))
        .collect::<Result<Vec<_>>>()?;
    let ac_term = bounded_below(ExtReal::checked_sum(ac_terms)?, "absolutely continuous term")?;
    let sing_plus_term = bounded_below(
        ExtReal::singular_product(
            decomposition.singular_plus_mass(),
            f.asymptotic_slope(Direction::Pos),
        ),
        "positive singular term",
    )?;
    let sing_minus_term = bounded_below(
        ExtReal::singular_product(
            decomposition.singular_minus_mass(),
            f.asymptotic_slope(Direction::Neg),
        ),
        "negative singular term",
    )?;
    let value = ExtReal::checked_sum([ac_term, sing_plus_term, sing_minus_term])?;
    Ok(DivergenceReport { value, ac_term, sing_plus_term, sing_minus_term, decomposition })
}

/// Maximum of [`partition_sum`] over the atomic partition and `samples`
/// random partitions with between 1 and `k_max` elements.
///
/// On a finite space this equals `closed_form(..).value`; it exists to
/// demonstrate and check that, not to compute the divergence.
pub fn supsum_estimate(
    f: &ExtendedConvexFunction,
    mu: &FiniteMeasure,
    nu: &SignedMeasure,
    k_max: usize,
    samples: usize,
    seed: u64,
) -> Result<ExtReal> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let space = mu.space();
    let mut best = partition_sum(f, mu, nu, &PartitionOfUnity::atomic(space))?;
    let stream = stream_id("supsum_estimate");
    for i in 0..samples {
        let mut rng = instance_rng(seed, stream, i as u64);
        let k = rng.random_range(1..=k_max);
        let g = PartitionOfUnity::sample_with(space, k, &mut rng)?;
        best = best.max(partition_sum(f, mu, nu, &g)?);
    }
    Ok(best)
}

/// Extended Kullback-Leibler divergence `int -ln(d nu_a / d mu) d mu` for
/// nonnegative `mu`, `nu`. Mass of `nu` singular to `mu` is ignored since
/// `(-ln)'(+inf) = 0`; the value is `+inf` iff `mu` charges an atom where
/// `nu` vanishes.
pub fn kl_divergence(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Result<ExtReal> {
    let kl = ExtendedConvexFunction::builtin(Generator::Kl)?;
    Ok(closed_form(&kl, mu, &nu.to_signed())?.value)
}

/// `sum_g mu[g] ln(mu[g] / nu[g])`, with summands where `mu[g] = 0` set to 0
/// before any logarithm is taken.
pub fn kl_partition_sum(
    mu: &FiniteMeasure,
    nu: &SignedMeasure,
    partition: &PartitionOfUnity,
) -> Result<ExtReal> {
    mu.space().check_same(nu.space())?;
    mu.space().check_same(partition.space())?;
    let mut total = ExtReal::ZERO;
    for g in partition.elements() {
        let m = mu.integrate(g)?;
        if m <= 0.0 {
            continue;
        }
        let v = nu.integrate(g)?;
        let term = if v > 0.0 {
            ExtReal::from(m * (m / v).ln())
        } else {
            ExtReal::PosInf
        };
        total = total.checked_add(term)?;
    }
    Ok(total)
}

/// [`closed_form`] for a named generator. `kl` rejects a signed `nu`.
pub fn named_divergence(
    generator: Generator,
    mu: &FiniteMeasure,
    nu: &SignedMeasure,
) -> Result<DivergenceReport> {
    if generator == Generator::Kl {
        if let Some(index) = nu.weights().iter().position(|&w| w < 0.0) {
            return Err(Error::SignedKl { index, value: nu.weights()[index] });
        }
    }
    let f = ExtendedConvexFunction::builtin(generator)?;
    closed_form(&f, mu, nu)
}

/// `int F(f) d mu` over the atoms `mu` charges.
pub fn integral(f: &ExtendedConvexFunction, values: &[f64], mu: &FiniteMeasure) -> Result<ExtReal> {
    mu.space().check_len(values.len())?;
    let terms = mu
        .weights()
        .iter()
        .zip(values)
        .filter(|(&m, _)| m > 0.0)
        .map(|(&m, &v)| f.eval(v).mul_real(m))
        .collect::<Result<Vec<_>>>()?;
    ExtReal::checked_sum(terms)
}

/// `sum_g mu[g] F(mu[f g] / mu[g])`. Its supremum over partitions is
/// `int F(f) d mu`, attained by the atomic partition.
pub fn integral_via_partitions(
    f: &ExtendedConvexFunction,
    values: &[f64],
    mu: &FiniteMeasure,
    partition: &PartitionOfUnity,
) -> Result<ExtReal> {
    mu.space().check_len(values.len())?;
    mu.space().check_same(partition.space())?;
    if !partition.validate(PARTITION_TOL) {
        return Err(Error::InvalidPartition("not a partition of unity".into()));
    }
    let mut terms = Vec::with_capacity(partition.len());
    for g in partition.elements() {
        let s = mu.integrate(g)?;
        let fg: Vec<f64> = values.iter().zip(g).map(|(a, b)| a * b).collect();
        let x = mu.integrate(&fg)?;
        terms.push(bounded_below(f.perspective(s.max(0.0), x), "Jensen sum term")?);
    }
    ExtReal::checked_sum(terms)
}
