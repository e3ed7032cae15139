use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DynamicalSystem;
use crate::error::{Error, Result};
use crate::extended_convex::ExtReal;
use crate::measure::{FiniteMeasure, Measure};

/// Squaring budget for the spectral radius.
pub const MAX_SQUARINGS: usize = 64;

/// A continuous potential `phi` on the atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential(Vec<f64>);

impl Potential {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index, value: values[index] });
        }
        Ok(Potential(values))
    }

    pub fn zero(n: usize) -> Self {
        Potential(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// `(A f)(x) = sum_{alpha(y) = x} a(y) f(y)`.
///
/// Stored as the pair `(alpha, a)`: the homological identity
/// `A(g o alpha * f) = g A f` forces column `y` of the matrix to live on row
/// `alpha(y)`, so the dense matrix is only built on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferOperator {
    system: DynamicalSystem,
    weights: Vec<f64>,
}

impl TransferOperator {
    /// Builds the operator and spot-checks the homological identity on a
    /// few fixed pseudo-random pairs.
    pub fn new(system: DynamicalSystem, weights: Vec<f64>) -> Result<Self> {
        system.space().check_len(weights.len())?;
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
            if value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let op = TransferOperator { system, weights };
        let scale = 1.0 + op.weights.iter().sum::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(0x7472_616e_7366_6572);
        for _ in 0..4 {
            let f: Vec<f64> = (0..op.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..op.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = op.homological_residual(&f, &g)?;
            if r > 1e-12 * scale {
                return Err(Error::HomologicalIdentity(r));
            }
        }
        Ok(op)
    }

    pub fn system(&self) -> &DynamicalSystem {
        &self.system
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.system.space().check_len(f.len())?;
        let mut out = vec![0.0; self.len()];
        for (y, &x) in self.system.map().iter().enumerate() {
            out[x] += self.weights[y] * f[y];
        }
        Ok(out)
    }

    /// `A^n f`.
    pub fn apply_power(&self, f: &[f64], n: usize) -> Result<Vec<f64>> {
        let mut v = f.to_vec();
        self.system.space().check_len(v.len())?;
        for _ in 0..n {
            v = self.apply(&v)?;
        }
        Ok(v)
    }

    /// `max_x |A(g o alpha * f)(x) - g(x) (A f)(x)|`.
    pub fn homological_residual(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        self.system.space().check_len(g.len())?;
        let gf: Vec<f64> = self.system.compose(g).iter().zip(f).map(|(a, b)| a * b).collect();
        let lhs = self.apply(&gf)?;
        let af = self.apply(f)?;
        Ok(lhs
            .iter()
            .zip(g.iter().zip(&af))
            .map(|(l, (gx, a))| (l - gx * a).abs())
            .fold(0.0, f64::max))
    }

    /// Dense matrix, row-major: `M[x][y] = a(y) [alpha(y) = x]`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for (y, &x) in self.system.map().iter().enumerate() {
            m[x][y] = self.weights[y];
        }
        m
    }

    /// `A_phi f = A(e^phi f)`: weights `a(y) e^phi(y)`.
    pub fn weighted(&self, phi: &Potential) -> Result<TransferOperator> {
        self.system.space().check_len(phi.values().len())?;
        let weights = self
            .weights
            .iter()
            .zip(phi.values())
            .map(|(a, p)| a * p.exp())
            .collect();
        Ok(TransferOperator { system: self.system.clone(), weights })
    }

    /// `A*^n mu`, the measure with `(A*^n mu)[g] = mu[A^n g]`. One step is
    /// `(A* mu)(y) = a(y) mu(alpha(y))`.
    pub fn adjoint_push(&self, mu: &FiniteMeasure, n: usize) -> Result<FiniteMeasure> {
        self.system.space().check_same(mu.space())?;
        let map = self.system.map();
        let mut w = mu.weights().to_vec();
        for _ in 0..n {
            w = (0..self.len()).map(|y| self.weights[y] * w[map[y]]).collect();
        }
        FiniteMeasure::new(mu.space().clone(), w)
    }

    /// `lambda(phi) = lim (1/n) ln ||A_phi^n 1||`, by repeated squaring of the
    /// dense matrix with max-entry renormalization.
    ///
    /// Stops once two consecutive estimates change by less than `tol`;
    /// `-inf` when some power of `A_phi` vanishes.
    pub fn spectral_potential(&self, phi: &Potential, tol: f64) -> Result<ExtReal> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        let n = self.len();
        let weighted = self.weighted(phi)?;
        let mut m: Vec<f64> = weighted.matrix().into_iter().flatten().collect();
        // m holds A_phi^(2^k) / e^log_scale.
        let mut log_scale = 0.0f64;
        let mut prev: Option<f64> = None;
        let mut settled = 0;
        let mut last_delta = f64::INFINITY;
        for k in 0..=MAX_SQUARINGS {
            let norm = m
                .chunks(n)
                .map(|row| row.iter().sum::<f64>())
                .fold(0.0, f64::max);
            if norm == 0.0 {
                return Ok(ExtReal::NegInf);
            }
            let estimate = (log_scale + norm.ln()) / 2f64.powi(k as i32);
            if let Some(p) = prev {
                last_delta = (estimate - p).abs();
                if last_delta < tol {
                    settled += 1;
                    if settled == 2 {
                        return Ok(ExtReal::Finite(estimate));
                    }
                } else {
                    settled = 0;
                }
            }
            prev = Some(estimate);

            let s = m.iter().copied().fold(0.0, f64::max);
            for v in m.iter_mut() {
                *v /= s;
            }
            log_scale += s.ln();
            m = square(&m, n);
            log_scale *= 2.0;
        }
        Err(Error::NonConvergence {
            what: "spectral potential",
            iterations: MAX_SQUARINGS,
            last_delta,
            best: prev,
        })
    }

    /// `lambda(phi)` for a deterministic finite system: the largest cycle
    /// average of `phi + ln a`, a cycle through a zero weight counting as
    /// `-inf`.
    pub fn spectral_potential_cycles(&self, phi: &Potential) -> Result<ExtReal> {
        self.system.space().check_len(phi.values().len())?;
        let best = self
            .system
            .enumerate_cycles()
            .cycles
            .iter()
            .map(|c| self.cycle_average(c, phi.values()))
            .fold(ExtReal::NegInf, ExtReal::max);
        Ok(best)
    }

    /// Average of `phi + ln a` over a cycle.
    pub(crate) fn cycle_average(&self, cycle: &[usize], phi: &[f64]) -> ExtReal {
        if cycle.iter().any(|&y| self.weights[y] == 0.0) {
            return ExtReal::NegInf;
        }
        let s: f64 = cycle.iter().map(|&y| phi[y] + self.weights[y].ln()).sum();
        ExtReal::Finite(s / cycle.len() as f64)
    }
}

fn square(m: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let a = m[i * n + k];
            if a == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += a * m[k * n + j];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::AtomSpace;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::E;

    fn op(map: &[usize], a: &[f64]) -> TransferOperator {
        let s = DynamicalSystem::new(AtomSpace::indexed(map.len()).unwrap(), map.to_vec()).unwrap();
        TransferOperator::new(s, a.to_vec()).unwrap()
    }

    #[test]
    fn build_examples() {
        assert_eq!(op(&[0, 1], &[2.0, 3.0]).matrix(), vec![vec![2.0, 0.0], vec![0.0, 3.0]]);
        assert_eq!(
            op(&[0, 0, 0], &[1.0, 1.0, 1.0]).matrix(),
            vec![vec![1.0, 1.0, 1.0], vec![0.0; 3], vec![0.0; 3]]
        );
        let s = DynamicalSystem::identity(AtomSpace::indexed(2).unwrap());
        assert!(matches!(
            TransferOperator::new(s, vec![1.0, -1.0]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
    }

    #[test]
    fn homological_identity_on_random_pairs() {
        let a = op(&[2, 0, 1, 4, 3, 3], &[0.5, 2.0, 1.5, 3.0, 0.1, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let f: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(a.homological_residual(&f, &g).unwrap() < 1e-12);
        }
    }

    #[test]
    fn positivity() {
        let a = op(&[1, 2, 0, 0], &[0.5, 2.0, 1.5, 3.0]);
        let af = a.apply(&[0.0, 1.0, 2.0, 0.5]).unwrap();
        assert!(af.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn weighting_examples() {
        let a = op(&[1, 0, 2], &[0.5, 2.0, 1.5]);
        assert_eq!(a.weighted(&Potential::zero(3)).unwrap(), a);
        let b = op(&[0, 1], &[1.0, 1.0]).weighted(&Potential::new(vec![1.0, 2.0]).unwrap()).unwrap();
        let m = b.matrix();
        assert_abs_diff_eq!(m[0][0], E, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1][1], E * E, epsilon = 1e-14);
        let phi = Potential::new(vec![0.3, -1.0, 2.0]).unwrap();
        let psi = Potential::new(vec![-0.7, 0.5, 0.1]).unwrap();
        let sum = Potential::new(vec![-0.4, -0.5, 2.1]).unwrap();
        let twice = a.weighted(&phi).unwrap().weighted(&psi).unwrap();
        let once = a.weighted(&sum).unwrap();
        for (x, y) in twice.weights().iter().zip(once.weights()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn spectral_potential_examples() {
        let a = op(&[0, 1], &[E, E * E]);
        let zero = Potential::zero(2);
        let l = a.spectral_potential(&zero, 1e-12).unwrap();
        assert_abs_diff_eq!(l.to_f64(), 2.0, epsilon = 1e-9);
        let phi = Potential::new(vec![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(a.spectral_potential(&phi, 1e-12).unwrap().to_f64(), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.spectral_potential_cycles(&phi).unwrap().to_f64(), 2.0, epsilon = 1e-15);

        let b = op(&[1, 0], &[2.0, 8.0]);
        let l = b.spectral_potential(&zero, 1e-12).unwrap();
        assert_abs_diff_eq!(l.to_f64(), 4f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(b.spectral_potential_cycles(&zero).unwrap().to_f64(), 4f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn spectral_potential_with_transients() {
        // Tree of transients feeding a 3-cycle and a fixed point.
        let a = op(&[1, 2, 0, 3, 3, 4, 0], &[1.5, 0.5, 2.0, 0.9, 7.0, 3.0, 11.0]);
        let phi = Potential::new(vec![0.1, -0.2, 0.3, 0.0, 1.0, -1.0, 0.5]).unwrap();
        let power = a.spectral_potential(&phi, 1e-12).unwrap();
        let cycles = a.spectral_potential_cycles(&phi).unwrap();
        assert_abs_diff_eq!(power.to_f64(), cycles.to_f64(), epsilon = 1e-9);
    }

    #[test]
    fn nilpotent_weights_give_negative_infinity() {
        // Every cycle passes through a zero weight.
        let a = op(&[1, 0, 0], &[0.0, 3.0, 5.0]);
        let zero = Potential::zero(3);
        assert_eq!(a.spectral_potential(&zero, 1e-12).unwrap(), ExtReal::NegInf);
        assert_eq!(a.spectral_potential_cycles(&zero).unwrap(), ExtReal::NegInf);
    }

    #[test]
    fn adjoint_examples() {
        let a = op(&[1, 0], &[2.0, 3.0]);
        let mu = FiniteMeasure::new(a.system().space().clone(), vec![0.5, 0.5]).unwrap();
        assert_eq!(a.adjoint_push(&mu, 1).unwrap().weights(), &[1.0, 1.5]);
        let id = op(&[0, 1], &[1.0, 1.0]);
        assert_eq!(id.adjoint_push(&mu, 5).unwrap(), mu);
        let twice = a.adjoint_push(&a.adjoint_push(&mu, 1).unwrap(), 1).unwrap();
        assert_eq!(a.adjoint_push(&mu, 2).unwrap(), twice);
    }

    #[test]
    fn adjoint_identity_on_basis_functions() {
        let a = op(&[2, 0, 1, 4, 3, 3], &[0.5, 2.0, 1.5, 3.0, 0.1, 1.0]);
        let mu = FiniteMeasure::new(a.system().space().clone(), vec![0.1, 0.2, 0.05, 0.3, 0.15, 0.2]).unwrap();
        for n in 1..=4 {
            let pushed = a.adjoint_push(&mu, n).unwrap();
            for y in 0..6 {
                let mut e = vec![0.0; 6];
                e[y] = 1.0;
                let lhs = mu.integrate(&a.apply_power(&e, n).unwrap()).unwrap();
                assert_abs_diff_eq!(lhs, pushed.weights()[y], epsilon = 1e-12);
            }
        }
    }
}
