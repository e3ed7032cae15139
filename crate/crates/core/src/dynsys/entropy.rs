//! t-entropy of a transfer operator.
//!
//! For an invariant probability `mu`,
//! `tau_n(mu) = int ln(d (A*^n mu)_a / d mu) d mu = -D_KL(mu || A*^n mu)` and
//! `tau(mu) = inf_n tau_n(mu) / n`. The partition forms
//!
//! ```text
//! tau_n(mu, G) = sup_m sum_i mu[g_i] ln(m[A^n g_i] / mu[g_i])     (sup over probabilities m)
//! tau_n(mu)    = inf_G sum_g mu[g] ln(mu[A^n g] / mu[g])
//! ```
//!
//! are exposed for comparison with the Kullback-Leibler form.

use super::{InvariantMeasure, Potential, TransferOperator};
use crate::divergence::kl_divergence;
use crate::error::{Error, Result};
use crate::extended_convex::ExtReal;
use crate::measure::{FiniteMeasure, Measure};
use crate::partition::PartitionOfUnity;

/// Truncation of `inf_n tau_n / n`.
pub const T_ENTROPY_N_MAX: usize = 32;
/// Iteration budget of the inner supremum over `m`.
pub const EM_MAX_ITERS: usize = 10_000;
/// Objective change below which the inner supremum is converged.
pub const EM_TOL: f64 = 1e-10;

fn ensure_invariant(a: &TransferOperator, mu: &InvariantMeasure) -> Result<()> {
    let residual = a.system().invariance_residual(mu.measure())?;
    let tol = mu.tol().max(super::INVARIANCE_TOL);
    if residual > tol {
        return Err(Error::NotInvariant { residual, tol });
    }
    Ok(())
}

/// `tau_n(mu) = -D_KL(mu || A*^n mu)`; `-inf` iff `mu` charges an atom where
/// `A*^n mu` vanishes. Positive values occur when `A` is not normalized.
pub fn t_entropy_n(a: &TransferOperator, mu: &InvariantMeasure, n: usize) -> Result<ExtReal> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    ensure_invariant(a, mu)?;
    let pushed = a.adjoint_push(mu.measure(), n)?;
    Ok(-kl_divergence(mu.measure(), &pushed)?)
}

/// `[tau_1(mu), ..., tau_{n_max}(mu)]`.
pub fn t_entropy_profile(
    a: &TransferOperator,
    mu: &InvariantMeasure,
    n_max: usize,
) -> Result<Vec<ExtReal>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    (1..=n_max).map(|n| t_entropy_n(a, mu, n)).collect()
}

/// `min_{1 <= n <= n_max} tau_n(mu) / n`.
pub fn t_entropy(a: &TransferOperator, mu: &InvariantMeasure, n_max: usize) -> Result<ExtReal> {
    let profile = t_entropy_profile(a, mu, n_max)?;
    Ok(profile
        .into_iter()
        .enumerate()
        .map(|(i, t)| match t {
            ExtReal::Finite(v) => ExtReal::Finite(v / (i + 1) as f64),
            inf => inf,
        })
        .fold(ExtReal::PosInf, ExtReal::min))
}

fn check_probability(mu: &FiniteMeasure) -> Result<()> {
    let mass = mu.total_mass();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::NotProbability(mass));
    }
    Ok(())
}

/// `tau_n(mu, G) = sup_m sum_i mu[g_i] ln(m[A^n g_i] / mu[g_i])` over
/// probability measures `m`.
///
/// The objective is concave in `m`; it is maximized by the mixture-weight
/// fixed point `m <- sum_i c_i (h_i m) / m[h_i]` (normalized), with
/// `c_i = mu[g_i]`, `h_i = A^n g_i`, started from the uniform measure and
/// stopped when the objective changes by less than `tol`. Summands with
/// `c_i = 0` are dropped; an `h_i` that vanishes identically while `c_i > 0`
/// makes the value `-inf`.
pub fn t_entropy_n_def1(
    a: &TransferOperator,
    mu: &FiniteMeasure,
    n: usize,
    partition: &PartitionOfUnity,
    iters: usize,
    tol: f64,
) -> Result<ExtReal> {
    if iters == 0 {
        return Err(Error::InvalidArgument("iters must be at least 1".into()));
    }
    a.system().space().check_same(mu.space())?;
    a.system().space().check_same(partition.space())?;
    check_probability(mu)?;

    let mut coeffs = Vec::new();
    let mut images = Vec::new();
    for g in partition.elements() {
        let c = mu.integrate(g)?;
        if c <= 0.0 {
            continue;
        }
        let h = a.apply_power(g, n)?;
        if h.iter().all(|&v| v == 0.0) {
            return Ok(ExtReal::NegInf);
        }
        coeffs.push(c);
        images.push(h);
    }
    if coeffs.is_empty() {
        return Ok(ExtReal::ZERO);
    }

    let size = a.len();
    let mut m = vec![1.0 / size as f64; size];
    let pair = |m: &[f64], h: &[f64]| -> f64 { m.iter().zip(h).map(|(a, b)| a * b).sum() };
    let objective = |m: &[f64]| -> f64 {
        coeffs
            .iter()
            .zip(&images)
            .map(|(&c, h)| c * (pair(m, h) / c).ln())
            .sum()
    };

    let mut value = objective(&m);
    let mut last_delta = f64::INFINITY;
    let mut next = vec![0.0; size];
    for _ in 0..iters {
        next.fill(0.0);
        for (&c, h) in coeffs.iter().zip(&images) {
            let r = pair(&m, h);
            for x in 0..size {
                next[x] += c * h[x] * m[x] / r;
            }
        }
        let total: f64 = next.iter().sum();
        for (dst, &src) in m.iter_mut().zip(&next) {
            *dst = src / total;
        }
        let updated = objective(&m);
        last_delta = (updated - value).abs();
        value = updated;
        if last_delta < tol {
            return Ok(ExtReal::Finite(value));
        }
    }
    Err(Error::NonConvergence {
        what: "t-entropy inner supremum",
        iterations: iters,
        last_delta,
        best: Some(value),
    })
}

/// `sum_g mu[g] ln(mu[A^n g] / mu[g])`, summands with `mu[g] = 0` set to 0,
/// and `-inf` when `mu[A^n g] = 0 < mu[g]`.
pub fn t_entropy_n_def2_objective(
    a: &TransferOperator,
    mu: &FiniteMeasure,
    n: usize,
    partition: &PartitionOfUnity,
) -> Result<ExtReal> {
    a.system().space().check_same(mu.space())?;
    a.system().space().check_same(partition.space())?;
    let mut total = ExtReal::ZERO;
    for g in partition.elements() {
        let c = mu.integrate(g)?;
        if c <= 0.0 {
            continue;
        }
        let v = mu.integrate(&a.apply_power(g, n)?)?;
        let term = if v > 0.0 {
            ExtReal::from(c * (v / c).ln())
        } else {
            ExtReal::NegInf
        };
        total = total.checked_add(term)?;
    }
    Ok(total)
}

/// Both sides of `lambda(phi) = max_{mu invariant} (mu[phi] + tau(mu))`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalReport {
    /// `lambda(phi)` by repeated squaring.
    pub lambda: ExtReal,
    /// `lambda(phi)` as the largest cycle average of `phi + ln a`.
    pub lambda_cycles: ExtReal,
    /// `u[phi] + tau(u)` for each cycle vertex `u`, in cycle order.
    pub vertex_values: Vec<ExtReal>,
    pub best: ExtReal,
    pub argmax_cycle: Option<usize>,
    /// `|lambda - best|`; 0 when both are `-inf`.
    pub gap: f64,
}

/// Evaluates the variational principle on the cycle vertices.
///
/// `mu[phi] + tau(mu)` is affine on the simplex spanned by the uniform cycle
/// measures, so its maximum over invariant measures is a vertex maximum.
pub fn variational_check(
    a: &TransferOperator,
    phi: &Potential,
    tol: f64,
) -> Result<VariationalReport> {
    let lambda = a.spectral_potential(phi, tol)?;
    let lambda_cycles = a.spectral_potential_cycles(phi)?;
    let vertices = a.system().invariant_vertices();
    let mut vertex_values = Vec::with_capacity(vertices.len());
    for u in &vertices {
        let tau = t_entropy(a, u, T_ENTROPY_N_MAX)?;
        let v = match tau {
            ExtReal::Finite(t) => ExtReal::Finite(u.measure().integrate(phi.values())? + t),
            inf => inf,
        };
        vertex_values.push(v);
    }
    let (argmax_cycle, best) = vertex_values
        .iter()
        .copied()
        .enumerate()
        .fold((None, ExtReal::NegInf), |(ai, b), (i, v)| {
            if ai.is_none() || v > b {
                (Some(i), v)
            } else {
                (ai, b)
            }
        });
    let gap = match (lambda, best) {
        (ExtReal::Finite(l), ExtReal::Finite(b)) => (l - b).abs(),
        (l, b) if l == b => 0.0,
        _ => f64::INFINITY,
    };
    Ok(VariationalReport { lambda, lambda_cycles, vertex_values, best, argmax_cycle, gap })
}

#[cfg(test)]
mod tests {
    use super::super::DynamicalSystem;
    use super::*;
    use crate::measure::AtomSpace;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::E;

    fn op(map: &[usize], a: &[f64]) -> TransferOperator {
        let s = DynamicalSystem::new(AtomSpace::indexed(map.len()).unwrap(), map.to_vec()).unwrap();
        TransferOperator::new(s, a.to_vec()).unwrap()
    }

    fn inv(a: &TransferOperator, w: &[f64]) -> InvariantMeasure {
        let m = FiniteMeasure::new(a.system().space().clone(), w.to_vec()).unwrap();
        InvariantMeasure::new(a.system(), m, 1e-12).unwrap()
    }

    #[test]
    fn identity_map_closed_form() {
        // tau_n = n mu[ln a] = n (0.5 * 1 + 0.5 * 2).
        let a = op(&[0, 1], &[E, E * E]);
        let mu = inv(&a, &[0.5, 0.5]);
        assert_abs_diff_eq!(t_entropy_n(&a, &mu, 3).unwrap().to_f64(), 4.5, epsilon = 1e-12);
        for n_max in [1, 5, 32] {
            assert_abs_diff_eq!(t_entropy(&a, &mu, n_max).unwrap().to_f64(), 1.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn unit_weights_on_identity_give_zero() {
        let a = op(&[0, 1, 2], &[1.0; 3]);
        let mu = inv(&a, &[0.2, 0.3, 0.5]);
        for n in 1..5 {
            assert_eq!(t_entropy_n(&a, &mu, n).unwrap(), ExtReal::ZERO);
        }
    }

    #[test]
    fn cycle_measure_gives_cycle_average() {
        let a = op(&[1, 2, 0, 3], &[2.0, 0.5, 3.0, 7.0]);
        let mu = inv(&a, &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
        let avg = (2f64.ln() + 0.5f64.ln() + 3f64.ln()) / 3.0;
        for n in 1..=7 {
            assert_abs_diff_eq!(t_entropy_n(&a, &mu, n).unwrap().to_f64(), n as f64 * avg, epsilon = 1e-12);
        }
    }

    #[test]
    fn stochastic_operator_has_nonpositive_entropy() {
        // a = 1 on a functional graph: A*^n mu stays a probability.
        let a = op(&[1, 0, 0, 2], &[1.0; 4]);
        for u in a.system().invariant_vertices() {
            assert!(t_entropy(&a, &u, 8).unwrap() <= ExtReal::ZERO);
        }
    }

    #[test]
    fn zero_weight_on_cycle_gives_negative_infinity() {
        let a = op(&[1, 0], &[0.0, 3.0]);
        let mu = inv(&a, &[0.5, 0.5]);
        assert_eq!(t_entropy(&a, &mu, 4).unwrap(), ExtReal::NegInf);
    }

    #[test]
    fn non_invariant_measures_are_rejected() {
        let a = op(&[1, 0], &[1.0, 1.0]);
        let other = op(&[0, 1], &[1.0, 1.0]);
        let mu = inv(&other, &[1.0, 0.0]);
        assert!(matches!(t_entropy_n(&a, &mu, 1), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn def1_trivial_partition_is_log_of_max() {
        let a = op(&[1, 2, 0, 0], &[2.0, 0.5, 3.0, 1.5]);
        let mu = FiniteMeasure::new(a.system().space().clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = PartitionOfUnity::trivial(mu.space());
        for n in 1..=3 {
            let an1 = a.apply_power(&[1.0; 4], n).unwrap();
            let expected = an1.iter().copied().fold(0.0, f64::max).ln();
            let v = t_entropy_n_def1(&a, &mu, n, &g, EM_MAX_ITERS, 1e-13).unwrap();
            assert_abs_diff_eq!(v.to_f64(), expected, epsilon = 1e-6);
        }
    }

    #[test]
    fn def1_identity_operator_is_zero_on_atoms() {
        let a = op(&[0, 1, 2], &[1.0; 3]);
        let mu = FiniteMeasure::new(a.system().space().clone(), vec![0.2, 0.3, 0.5]).unwrap();
        let g = PartitionOfUnity::atomic(mu.space());
        let v = t_entropy_n_def1(&a, &mu, 2, &g, EM_MAX_ITERS, EM_TOL).unwrap();
        assert_abs_diff_eq!(v.to_f64(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn def1_dominates_the_objective_at_mu() {
        let a = op(&[1, 2, 0, 3, 3], &[2.0, 0.5, 3.0, 1.5, 0.7]);
        let vertices = a.system().invariant_vertices();
        let mu = InvariantMeasure::mixture(&vertices, &[0.6, 0.4]).unwrap();
        for seed in 0..10 {
            let g = PartitionOfUnity::sample(mu.measure().space(), 3, seed).unwrap();
            for n in 1..=2 {
                let sup = t_entropy_n_def1(&a, mu.measure(), n, &g, EM_MAX_ITERS, EM_TOL).unwrap();
                let at_mu = t_entropy_n_def2_objective(&a, mu.measure(), n, &g).unwrap();
                assert!(at_mu.le_within(sup, 1e-6), "seed {seed} n {n}: {at_mu} > {sup}");
            }
        }
    }

    #[test]
    fn def1_vanishing_image_is_negative_infinity() {
        let a = op(&[1, 0], &[0.0, 1.0]);
        let mu = FiniteMeasure::new(a.system().space().clone(), vec![0.5, 0.5]).unwrap();
        // A^2 e_0 = 0.
        let g = PartitionOfUnity::atomic(mu.space());
        assert_eq!(t_entropy_n_def1(&a, &mu, 2, &g, 100, EM_TOL).unwrap(), ExtReal::NegInf);
    }

    #[test]
    fn def1_reports_budget_exhaustion() {
        let a = op(&[1, 2, 0, 0], &[2.0, 0.5, 3.0, 1.5]);
        let mu = FiniteMeasure::new(a.system().space().clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = PartitionOfUnity::sample(mu.space(), 3, 4).unwrap();
        match t_entropy_n_def1(&a, &mu, 1, &g, 1, 0.0) {
            Err(Error::NonConvergence { best: Some(_), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn variational_examples() {
        let a = op(&[0, 1], &[E, E * E]);
        let r = variational_check(&a, &Potential::new(vec![1.0, 0.0]).unwrap(), 1e-12).unwrap();
        assert_abs_diff_eq!(r.lambda.to_f64(), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.best.to_f64(), 2.0, epsilon = 1e-12);
        assert!(r.gap < 1e-9);

        let a = op(&[0, 1, 2], &[1.0; 3]);
        let phi = Potential::new(vec![0.3, -1.0, 0.9]).unwrap();
        let r = variational_check(&a, &phi, 1e-12).unwrap();
        assert_abs_diff_eq!(r.lambda.to_f64(), 0.9, epsilon = 1e-9);
        assert_abs_diff_eq!(r.best.to_f64(), 0.9, epsilon = 1e-12);
        assert_eq!(r.argmax_cycle, Some(2));

        let a = op(&[1, 0], &[2.0, 8.0]);
        let r = variational_check(&a, &Potential::zero(2), 1e-12).unwrap();
        assert_abs_diff_eq!(r.lambda.to_f64(), 4f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(r.best.to_f64(), (2f64.ln() + 8f64.ln()) / 2.0, epsilon = 1e-12);
        assert!(r.gap < 1e-9);
    }
}
