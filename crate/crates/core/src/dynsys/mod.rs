//! Finite dynamical systems `alpha: X -> X`, weighted transfer operators
//! `(A f)(x) = sum_{alpha(y) = x} a(y) f(y)`, the spectral potential
//! `lambda(phi) = ln r(A_phi)` and t-entropy.

mod entropy;
mod operator;

pub use entropy::{
    t_entropy, t_entropy_n, t_entropy_n_def1, t_entropy_n_def2_objective, t_entropy_profile,
    variational_check, VariationalReport, EM_MAX_ITERS, EM_TOL, T_ENTROPY_N_MAX,
};
pub use operator::{Potential, TransferOperator, MAX_SQUARINGS};

use crate::error::{Error, Result};
use crate::measure::{AtomSpace, FiniteMeasure, Measure};

/// Default tolerance for invariance and unit mass.
pub const INVARIANCE_TOL: f64 = 1e-12;

/// A total self-map of a finite atom set, given by `map[x] = alpha(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalSystem {
    space: AtomSpace,
    map: Vec<usize>,
}

impl DynamicalSystem {
    pub fn new(space: AtomSpace, map: Vec<usize>) -> Result<Self> {
        space.check_len(map.len())?;
        let size = map.len();
        if let Some(index) = map.iter().position(|&v| v >= size) {
            return Err(Error::MapOutOfRange { index, value: map[index], size });
        }
        Ok(DynamicalSystem { space, map })
    }

    pub fn identity(space: AtomSpace) -> Self {
        let map = (0..space.len()).collect();
        DynamicalSystem { space, map }
    }

    pub fn space(&self) -> &AtomSpace {
        &self.space
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// `g o alpha`.
    pub fn compose(&self, g: &[f64]) -> Vec<f64> {
        self.map.iter().map(|&y| g[y]).collect()
    }

    /// Pushforward weights `(alpha_* mu)(x) = sum_{alpha(y) = x} mu(y)`.
    pub fn pushforward(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (y, &x) in self.map.iter().enumerate() {
            out[x] += weights[y];
        }
        out
    }

    /// `max_x |mu(x) - (alpha_* mu)(x)|`.
    pub fn invariance_residual(&self, mu: &FiniteMeasure) -> Result<f64> {
        self.space.check_same(mu.space())?;
        let push = self.pushforward(mu.weights());
        Ok(mu
            .weights()
            .iter()
            .zip(&push)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Periodic orbits of `alpha`, each listed from its smallest atom in
    /// orbit order and sorted by that atom, plus the atoms on no cycle.
    pub fn enumerate_cycles(&self) -> CycleDecomposition {
        const UNSEEN: usize = usize::MAX;
        const ON_PATH: usize = usize::MAX - 1;
        let n = self.len();
        // basin[x]: id of the cycle x eventually reaches.
        let mut basin = vec![UNSEEN; n];
        let mut on_cycle = vec![false; n];
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut path = Vec::new();
        for start in 0..n {
            if basin[start] != UNSEEN {
                continue;
            }
            path.clear();
            let mut x = start;
            while basin[x] == UNSEEN {
                basin[x] = ON_PATH;
                path.push(x);
                x = self.map[x];
            }
            let id = if basin[x] == ON_PATH {
                // Closed a new cycle at x.
                let pos = path.iter().position(|&p| p == x).expect("x is on the path");
                let mut cycle = path[pos..].to_vec();
                let min_pos = cycle.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i).unwrap();
                cycle.rotate_left(min_pos);
                for &c in &cycle {
                    on_cycle[c] = true;
                }
                cycles.push(cycle);
                cycles.len() - 1
            } else {
                basin[x]
            };
            for &p in &path {
                basin[p] = id;
            }
        }
        // Canonical order: by smallest atom.
        let mut order: Vec<usize> = (0..cycles.len()).collect();
        order.sort_by_key(|&i| cycles[i][0]);
        let mut rank = vec![0; cycles.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let cycles_sorted = order.iter().map(|&i| cycles[i].clone()).collect();
        let basin = basin.into_iter().map(|b| rank[b]).collect();
        let transient = (0..n).filter(|&x| !on_cycle[x]).collect();
        CycleDecomposition { cycles: cycles_sorted, transient, basin }
    }

    /// Uniform measures on the cycles: the extreme points of the invariant
    /// probability measures of a finite deterministic system.
    pub fn invariant_vertices(&self) -> Vec<InvariantMeasure> {
        self.enumerate_cycles()
            .cycles
            .iter()
            .map(|cycle| {
                let mut w = vec![0.0; self.len()];
                let p = cycle.len() as f64;
                for &x in cycle {
                    w[x] = 1.0 / p;
                }
                let measure = FiniteMeasure::new(self.space.clone(), w).expect("valid weights");
                InvariantMeasure { measure, tol: INVARIANCE_TOL }
            })
            .collect()
    }
}

/// Cycles and transient atoms of a functional graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleDecomposition {
    pub cycles: Vec<Vec<usize>>,
    pub transient: Vec<usize>,
    /// `basin[x]`: index into `cycles` of the cycle reached from `x`.
    pub basin: Vec<usize>,
}

/// A probability measure fixed by the pushforward of `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantMeasure {
    measure: FiniteMeasure,
    tol: f64,
}

impl InvariantMeasure {
    /// Checks unit mass and invariance within `tol`.
    pub fn new(system: &DynamicalSystem, measure: FiniteMeasure, tol: f64) -> Result<Self> {
        let mass = measure.total_mass();
        if (mass - 1.0).abs() > tol {
            return Err(Error::NotProbability(mass));
        }
        let residual = system.invariance_residual(&measure)?;
        if residual > tol {
            return Err(Error::NotInvariant { residual, tol });
        }
        Ok(InvariantMeasure { measure, tol })
    }

    /// Mixture `sum_i w_i u_i` of vertex measures; weights are normalized.
    pub fn mixture(vertices: &[InvariantMeasure], weights: &[f64]) -> Result<Self> {
        if vertices.is_empty() || vertices.len() != weights.len() {
            return Err(Error::InvalidArgument("one weight per vertex is required".into()));
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidArgument("mixture weights must be nonnegative with positive sum".into()));
        }
        let n = vertices[0].measure.weights().len();
        let mut w = vec![0.0; n];
        for (v, &c) in vertices.iter().zip(weights) {
            for (acc, x) in w.iter_mut().zip(v.measure.weights()) {
                *acc += c / total * x;
            }
        }
        let measure = FiniteMeasure::new(vertices[0].measure.space().clone(), w)?;
        Ok(InvariantMeasure { measure, tol: vertices.iter().map(|v| v.tol).fold(INVARIANCE_TOL, f64::max) })
    }

    pub fn measure(&self) -> &FiniteMeasure {
        &self.measure
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(map: &[usize]) -> DynamicalSystem {
        DynamicalSystem::new(AtomSpace::indexed(map.len()).unwrap(), map.to_vec()).unwrap()
    }

    #[test]
    fn rejects_out_of_range_map() {
        let s = AtomSpace::indexed(2).unwrap();
        assert!(matches!(
            DynamicalSystem::new(s, vec![0, 2]),
            Err(Error::MapOutOfRange { index: 1, value: 2, size: 2 })
        ));
    }

    #[test]
    fn cycle_examples() {
        let d = sys(&[1, 0, 2]).enumerate_cycles();
        assert_eq!(d.cycles, vec![vec![0, 1], vec![2]]);
        assert!(d.transient.is_empty());

        let d = sys(&[0, 0, 0, 0]).enumerate_cycles();
        assert_eq!(d.cycles, vec![vec![0]]);
        assert_eq!(d.transient, vec![1, 2, 3]);
        assert_eq!(d.basin, vec![0, 0, 0, 0]);

        let d = sys(&[0, 1, 2, 3, 4]).enumerate_cycles();
        assert_eq!(d.cycles.len(), 5);
        assert!(d.cycles.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn cycles_on_a_mixed_graph() {
        // 5 -> 3 -> 4 -> 3 ; 0 -> 2 -> 1 -> 0 ; 6 -> 6 ; 7 -> 5
        let d = sys(&[2, 0, 1, 4, 3, 3, 6, 5]).enumerate_cycles();
        assert_eq!(d.cycles, vec![vec![0, 2, 1], vec![3, 4], vec![6]]);
        assert_eq!(d.transient, vec![5, 7]);
        assert_eq!(d.basin, vec![0, 0, 0, 1, 1, 1, 2, 1]);
    }

    #[test]
    fn vertex_examples() {
        let v = sys(&[1, 0, 2]).invariant_vertices();
        assert_eq!(v[0].measure().weights(), &[0.5, 0.5, 0.0]);
        assert_eq!(v[1].measure().weights(), &[0.0, 0.0, 1.0]);

        let v = sys(&[0, 1, 2]).invariant_vertices();
        for (i, m) in v.iter().enumerate() {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            assert_eq!(m.measure().weights(), e.as_slice());
        }

        let s = sys(&[1, 1, 1]);
        let v = s.invariant_vertices();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].measure().weights(), &[0.0, 1.0, 0.0]);
        for m in &v {
            assert!(s.invariance_residual(m.measure()).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn invariance_is_checked() {
        let s = sys(&[1, 0]);
        let space = s.space().clone();
        let bad = FiniteMeasure::new(space.clone(), vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            InvariantMeasure::new(&s, bad, 1e-12),
            Err(Error::NotInvariant { .. })
        ));
        let light = FiniteMeasure::new(space.clone(), vec![0.25, 0.25]).unwrap();
        assert!(matches!(InvariantMeasure::new(&s, light, 1e-12), Err(Error::NotProbability(_))));
        let ok = FiniteMeasure::new(space, vec![0.5, 0.5]).unwrap();
        assert!(InvariantMeasure::new(&s, ok, 1e-12).is_ok());
    }

    #[test]
    fn mixtures_of_vertices_are_invariant() {
        let s = sys(&[2, 0, 1, 4, 3, 3, 6, 5]);
        let v = s.invariant_vertices();
        let m = InvariantMeasure::mixture(&v, &[0.2, 0.5, 0.3]).unwrap();
        assert!(s.invariance_residual(m.measure()).unwrap() < 1e-15);
        assert!((m.measure().total_mass() - 1.0).abs() < 1e-15);
    }
}
