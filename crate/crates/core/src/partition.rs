//! Finite partitions of unity `G = {g_1, ..., g_k}`: nonnegative functions
//! on the atoms with `sum_i g_i(x) = 1` at every atom.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::measure::AtomSpace;

/// Column-sum tolerance used when constructing partitions.
pub const PARTITION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOfUnity {
    space: AtomSpace,
    elements: Vec<Vec<f64>>,
}

impl PartitionOfUnity {
    /// Validated construction at [`PARTITION_TOL`].
    pub fn new(space: AtomSpace, elements: Vec<Vec<f64>>) -> Result<Self> {
        let g = PartitionOfUnity::from_raw(space, elements)?;
        if let Some(reason) = g.violation(PARTITION_TOL) {
            return Err(Error::InvalidPartition(reason));
        }
        Ok(g)
    }

    /// Checks only the shape; the partition-of-unity property is left to
    /// [`PartitionOfUnity::validate`].
    pub fn from_raw(space: AtomSpace, elements: Vec<Vec<f64>>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPartition("no elements".into()));
        }
        for e in &elements {
            space.check_len(e.len())?;
        }
        Ok(PartitionOfUnity { space, elements })
    }

    /// Indicators of the individual atoms.
    pub fn atomic(space: &AtomSpace) -> Self {
        let n = space.len();
        let elements = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        PartitionOfUnity { space: space.clone(), elements }
    }

    /// The one-element partition `{1}`.
    pub fn trivial(space: &AtomSpace) -> Self {
        PartitionOfUnity { space: space.clone(), elements: vec![vec![1.0; space.len()]] }
    }

    /// Indicators of the blocks of a labelling `block[x] in 0..k`; empty
    /// blocks are dropped.
    pub fn from_blocks(space: &AtomSpace, block: &[usize]) -> Result<Self> {
        space.check_len(block.len())?;
        let k = block.iter().copied().max().map_or(0, |m| m + 1);
        let elements: Vec<Vec<f64>> = (0..k)
            .map(|b| block.iter().map(|&x| if x == b { 1.0 } else { 0.0 }).collect())
            .filter(|e: &Vec<f64>| e.iter().any(|&v| v > 0.0))
            .collect();
        PartitionOfUnity::new(space.clone(), elements)
    }

    /// `k` elements; at each atom the column is an independent uniform point
    /// of the `(k-1)`-simplex (normalized standard exponentials).
    pub fn sample(space: &AtomSpace, k: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PartitionOfUnity::sample_with(space, k, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(space: &AtomSpace, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("partition size k must be at least 1".into()));
        }
        let n = space.len();
        let mut elements = vec![vec![0.0; n]; k];
        if k == 1 {
            elements[0].fill(1.0);
        } else {
            let mut column = vec![0.0; k];
            for x in 0..n {
                for c in column.iter_mut() {
                    *c = rng.sample::<f64, _>(Exp1);
                }
                let total: f64 = column.iter().sum();
                for (e, c) in elements.iter_mut().zip(&column) {
                    e[x] = c / total;
                }
            }
        }
        Ok(PartitionOfUnity { space: space.clone(), elements })
    }

    /// Pointwise products `{g h : g in G, h in H}`, `G`-major.
    pub fn refine(&self, other: &PartitionOfUnity) -> Result<Self> {
        self.space.check_same(&other.space)?;
        let elements = self
            .elements
            .iter()
            .flat_map(|g| {
                other
                    .elements
                    .iter()
                    .map(move |h| g.iter().zip(h).map(|(a, b)| a * b).collect())
            })
            .collect();
        Ok(PartitionOfUnity { space: self.space.clone(), elements })
    }

    /// Nonnegativity and unit column sums within `tol`.
    pub fn validate(&self, tol: f64) -> bool {
        self.violation(tol).is_none()
    }

    fn violation(&self, tol: f64) -> Option<String> {
        for (i, e) in self.elements.iter().enumerate() {
            if let Some(x) = e.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Some(format!("element {i} has entry {} at atom {x}", e[x]));
            }
        }
        for x in 0..self.space.len() {
            let s: f64 = self.elements.iter().map(|e| e[x]).sum();
            if (s - 1.0).abs() > tol {
                return Some(format!("elements sum to {s} at atom {x}"));
            }
        }
        None
    }

    pub fn space(&self) -> &AtomSpace {
        &self.space
    }

    pub fn elements(&self) -> &[Vec<f64>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize) -> AtomSpace {
        AtomSpace::indexed(n).unwrap()
    }

    #[test]
    fn atomic_examples() {
        let g = PartitionOfUnity::atomic(&space(2));
        assert_eq!(g.elements(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let g = PartitionOfUnity::atomic(&space(1));
        assert_eq!(g.elements(), &[vec![1.0]]);
        assert!(PartitionOfUnity::atomic(&space(5)).validate(1e-15));
    }

    #[test]
    fn sample_examples() {
        let s = space(4);
        for seed in [0, 1, 99] {
            let g = PartitionOfUnity::sample(&s, 1, seed).unwrap();
            assert_eq!(g, PartitionOfUnity::trivial(&s));
        }
        assert_eq!(
            PartitionOfUnity::sample(&s, 3, 5).unwrap(),
            PartitionOfUnity::sample(&s, 3, 5).unwrap()
        );
        assert_ne!(
            PartitionOfUnity::sample(&s, 3, 5).unwrap(),
            PartitionOfUnity::sample(&s, 3, 6).unwrap()
        );
        for seed in 0..50 {
            let g = PartitionOfUnity::sample(&space(2), 3, seed).unwrap();
            assert_eq!(g.len(), 3);
            assert!(g.validate(1e-12));
        }
        assert!(PartitionOfUnity::sample(&s, 0, 1).is_err());
    }

    #[test]
    fn refine_examples() {
        let s = space(3);
        let g = PartitionOfUnity::sample(&s, 3, 11).unwrap();
        let r = g.refine(&PartitionOfUnity::trivial(&s)).unwrap();
        assert_eq!(r, g);

        let a = PartitionOfUnity::atomic(&s);
        let r = a.refine(&a).unwrap();
        let nonzero: Vec<&Vec<f64>> =
            r.elements().iter().filter(|e| e.iter().any(|&v| v != 0.0)).collect();
        assert_eq!(nonzero.len(), 3);
        for (i, e) in nonzero.iter().enumerate() {
            assert_eq!(e.as_slice(), a.elements()[i].as_slice());
        }

        let h = PartitionOfUnity::sample(&s, 2, 12).unwrap();
        assert!(g.refine(&h).unwrap().validate(1e-12));
    }

    #[test]
    fn validate_examples() {
        let s = space(2);
        assert!(PartitionOfUnity::atomic(&s).validate(1e-12));
        let half = PartitionOfUnity::from_raw(s.clone(), vec![vec![0.5, 0.5]]).unwrap();
        assert!(!half.validate(1e-12));
        let negative =
            PartitionOfUnity::from_raw(s.clone(), vec![vec![-0.1, 0.5], vec![1.1, 0.5]]).unwrap();
        assert!(!negative.validate(1e-12));
        assert!(PartitionOfUnity::new(s, vec![vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn blocks_become_indicators() {
        let g = PartitionOfUnity::from_blocks(&space(4), &[0, 2, 0, 2]).unwrap();
        assert_eq!(g.elements(), &[vec![1.0, 0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0, 1.0]]);
    }
}
