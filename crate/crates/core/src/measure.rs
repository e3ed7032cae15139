//! Measures on a finite atom set.
//!
//! Every subset of a finite set is measurable, so a measure is a dense
//! weight array over an [`AtomSpace`] and `mu[g] = sum_x g(x) mu(x)`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An ordered, nonempty list of unique atom labels.
#[derive(Clone)]
pub struct AtomSpace {
    labels: Arc<[String]>,
}

impl AtomSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(AtomSpace { labels: labels.into() })
    }

    /// Atoms labelled `0..n`.
    pub fn indexed(n: usize) -> Result<Self> {
        AtomSpace::new((0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub(crate) fn check_len(&self, found: usize) -> Result<()> {
        if found == self.len() {
            Ok(())
        } else {
            Err(Error::SpaceMismatch { expected: self.len(), found })
        }
    }

    /// Errors unless both spaces have the same labels in the same order.
    pub fn check_same(&self, other: &AtomSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else if self.len() != other.len() {
            Err(Error::SpaceMismatch { expected: self.len(), found: other.len() })
        } else {
            Err(Error::DifferentLabels)
        }
    }
}

impl PartialEq for AtomSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels
    }
}

impl Eq for AtomSpace {}

impl fmt::Debug for AtomSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

/// Shared behaviour of nonnegative and signed measures.
pub trait Measure: Sized {
    fn space(&self) -> &AtomSpace;
    fn weights(&self) -> &[f64];

    /// Rebuilds a measure of the same kind with new weights.
    fn with_weights(&self, weights: Vec<f64>) -> Result<Self>;

    /// `m[g] = sum_x g(x) m(x)`.
    fn integrate(&self, g: &[f64]) -> Result<f64> {
        self.space().check_len(g.len())?;
        Ok(self.weights().iter().zip(g).map(|(w, v)| w * v).sum())
    }

    fn total_mass(&self) -> f64 {
        self.weights().iter().sum()
    }

    /// The measure `f m` with `(f m)[g] = m[f g]`, for bounded `f >= 0`.
    fn apply_density(&self, f: &[f64]) -> Result<Self> {
        self.space().check_len(f.len())?;
        for (index, &value) in f.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
            if value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let w = self.weights().iter().zip(f).map(|(w, v)| w * v).collect();
        self.with_weights(w)
    }
}

fn check_finite(weights: &[f64]) -> Result<()> {
    match weights.iter().position(|w| !w.is_finite()) {
        Some(index) => Err(Error::NonFinite { index, value: weights[index] }),
        None => Ok(()),
    }
}

fn check_nonnegative(weights: &[f64]) -> Result<()> {
    match weights.iter().position(|&w| w < 0.0) {
        Some(index) => Err(Error::NegativeWeight { index, value: weights[index] }),
        None => Ok(()),
    }
}

/// A finite nonnegative measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasure {
    space: AtomSpace,
    weights: Vec<f64>,
}

impl FiniteMeasure {
    pub fn new(space: AtomSpace, weights: Vec<f64>) -> Result<Self> {
        space.check_len(weights.len())?;
        check_finite(&weights)?;
        check_nonnegative(&weights)?;
        Ok(FiniteMeasure { space, weights })
    }

    pub fn zero(space: AtomSpace) -> Self {
        let weights = vec![0.0; space.len()];
        FiniteMeasure { space, weights }
    }

    pub fn checked_add(&self, other: &FiniteMeasure) -> Result<FiniteMeasure> {
        self.space.check_same(&other.space)?;
        let w = self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect();
        FiniteMeasure::new(self.space.clone(), w)
    }

    pub fn to_signed(&self) -> SignedMeasure {
        SignedMeasure { space: self.space.clone(), weights: self.weights.clone() }
    }
}

impl Measure for FiniteMeasure {
    fn space(&self) -> &AtomSpace {
        &self.space
    }
    fn weights(&self) -> &[f64] {
        &self.weights
    }
    fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        FiniteMeasure::new(self.space.clone(), weights)
    }
}

/// A finite real-valued measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure {
    space: AtomSpace,
    weights: Vec<f64>,
}

impl SignedMeasure {
    pub fn new(space: AtomSpace, weights: Vec<f64>) -> Result<Self> {
        space.check_len(weights.len())?;
        check_finite(&weights)?;
        Ok(SignedMeasure { space, weights })
    }

    pub fn zero(space: AtomSpace) -> Self {
        let weights = vec![0.0; space.len()];
        SignedMeasure { space, weights }
    }

    pub fn checked_add(&self, other: &SignedMeasure) -> Result<SignedMeasure> {
        self.space.check_same(&other.space)?;
        let w = self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect();
        SignedMeasure::new(self.space.clone(), w)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    /// Splits into `(nu_plus, nu_minus)` with `nu = nu_plus - nu_minus` and
    /// disjoint supports.
    pub fn jordan_decompose(&self) -> (FiniteMeasure, FiniteMeasure) {
        let plus = self.weights.iter().map(|&w| w.max(0.0)).collect();
        let minus = self.weights.iter().map(|&w| (-w).max(0.0)).collect();
        (
            FiniteMeasure { space: self.space.clone(), weights: plus },
            FiniteMeasure { space: self.space.clone(), weights: minus },
        )
    }

    /// `|nu|(X) = sum_x |nu(x)|`.
    pub fn total_variation(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// Splits `nu` relative to `mu` into an absolutely continuous part and
    /// positive and negative singular parts.
    pub fn lebesgue_decompose(&self, mu: &FiniteMeasure) -> Result<LebesgueDecomposition> {
        self.space.check_same(&mu.space)?;
        let n = self.weights.len();
        let (mut a, mut sp, mut sm) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for (x, (&v, &m)) in self.weights.iter().zip(&mu.weights).enumerate() {
            if m > 0.0 {
                a[x] = v;
            } else if v > 0.0 {
                sp[x] = v;
            } else if v < 0.0 {
                sm[x] = v;
            }
        }
        let space = self.space.clone();
        Ok(LebesgueDecomposition {
            nu_a: SignedMeasure { space: space.clone(), weights: a },
            nu_s_plus: FiniteMeasure { space: space.clone(), weights: sp },
            nu_s_minus: SignedMeasure { space, weights: sm },
        })
    }
}

impl Measure for SignedMeasure {
    fn space(&self) -> &AtomSpace {
        &self.space
    }
    fn weights(&self) -> &[f64] {
        &self.weights
    }
    fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        SignedMeasure::new(self.space.clone(), weights)
    }
}

impl From<FiniteMeasure> for SignedMeasure {
    fn from(m: FiniteMeasure) -> Self {
        SignedMeasure { space: m.space, weights: m.weights }
    }
}

impl TryFrom<SignedMeasure> for FiniteMeasure {
    type Error = Error;

    fn try_from(m: SignedMeasure) -> Result<Self> {
        check_nonnegative(&m.weights)?;
        Ok(FiniteMeasure { space: m.space, weights: m.weights })
    }
}

/// `nu = nu_a + nu_s_plus + nu_s_minus` relative to a reference `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct LebesgueDecomposition {
    /// Vanishes where `mu` does.
    pub nu_a: SignedMeasure,
    /// Supported on `mu`-null atoms, nonnegative.
    pub nu_s_plus: FiniteMeasure,
    /// Supported on `mu`-null atoms, nonpositive.
    pub nu_s_minus: SignedMeasure,
}

impl LebesgueDecomposition {
    /// The sum of the three parts.
    pub fn reconstruct(&self) -> SignedMeasure {
        let w = self
            .nu_a
            .weights
            .iter()
            .zip(&self.nu_s_plus.weights)
            .zip(&self.nu_s_minus.weights)
            .map(|((a, p), m)| a + p + m)
            .collect();
        SignedMeasure { space: self.nu_a.space.clone(), weights: w }
    }

    pub fn singular_plus_mass(&self) -> f64 {
        self.nu_s_plus.total_mass()
    }

    pub fn singular_minus_mass(&self) -> f64 {
        self.nu_s_minus.total_mass()
    }
}

/// A Radon-Nikodym derivative with respect to a reference measure.
/// Values on atoms the reference does not charge are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    space: AtomSpace,
    values: Vec<f64>,
}

impl Density {
    pub fn space(&self) -> &AtomSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `d nu_a / d mu`. Fails if `nu_a` charges an atom where `mu` vanishes.
pub fn radon_nikodym(nu_a: &SignedMeasure, mu: &FiniteMeasure) -> Result<Density> {
    nu_a.space.check_same(&mu.space)?;
    let mut values = vec![0.0; mu.weights.len()];
    for (x, (&v, &m)) in nu_a.weights.iter().zip(&mu.weights).enumerate() {
        if m > 0.0 {
            values[x] = v / m;
        } else if v != 0.0 {
            return Err(Error::NotAbsolutelyContinuous { index: x });
        }
    }
    Ok(Density { space: mu.space.clone(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space(n: usize) -> AtomSpace {
        AtomSpace::indexed(n).unwrap()
    }

    fn fm(w: &[f64]) -> FiniteMeasure {
        FiniteMeasure::new(space(w.len()), w.to_vec()).unwrap()
    }

    fn sm(w: &[f64]) -> SignedMeasure {
        SignedMeasure::new(space(w.len()), w.to_vec()).unwrap()
    }

    #[test]
    fn construction_validates() {
        assert!(matches!(AtomSpace::new(Vec::<String>::new()), Err(Error::EmptySpace)));
        assert!(matches!(AtomSpace::new(["a", "a"]), Err(Error::DuplicateLabel(_))));
        assert!(matches!(
            FiniteMeasure::new(space(2), vec![1.0, -0.5]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        assert!(matches!(
            SignedMeasure::new(space(2), vec![f64::NAN, 0.0]),
            Err(Error::NonFinite { index: 0, .. })
        ));
        assert!(matches!(
            SignedMeasure::new(space(2), vec![1.0]),
            Err(Error::SpaceMismatch { expected: 2, found: 1 })
        ));
        let other = AtomSpace::new(["p", "q"]).unwrap();
        assert!(matches!(
            fm(&[1.0, 1.0]).checked_add(&FiniteMeasure::zero(other)),
            Err(Error::DifferentLabels)
        ));
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(fm(&[1.0, 2.0]).integrate(&[1.0, 1.0]).unwrap(), 3.0);
        assert_eq!(sm(&[2.0, -3.0]).integrate(&[0.5, 0.5]).unwrap(), -0.5);
        assert_eq!(sm(&[2.0, -3.0]).integrate(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(fm(&[1.0]).integrate(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn jordan_examples() {
        let (p, m) = sm(&[2.0, -3.0, 0.0]).jordan_decompose();
        assert_eq!(p.weights(), &[2.0, 0.0, 0.0]);
        assert_eq!(m.weights(), &[0.0, 3.0, 0.0]);
        let (_, m) = sm(&[1.0, 4.0]).jordan_decompose();
        assert_eq!(m.total_mass(), 0.0);
        let (p, m) = sm(&[-1.0, -1.0]).jordan_decompose();
        assert_eq!(p.total_mass(), 0.0);
        assert_eq!(m.weights(), &[1.0, 1.0]);
    }

    #[test]
    fn lebesgue_examples() {
        let d = sm(&[3.0, -1.0, -2.0]).lebesgue_decompose(&fm(&[1.0, 0.0, 2.0])).unwrap();
        assert_eq!(d.nu_a.weights(), &[3.0, 0.0, -2.0]);
        assert_eq!(d.nu_s_plus.weights(), &[0.0, 0.0, 0.0]);
        assert_eq!(d.nu_s_minus.weights(), &[0.0, -1.0, 0.0]);

        let nu = sm(&[1.0, -2.0]);
        let d = nu.lebesgue_decompose(&fm(&[0.5, 0.1])).unwrap();
        assert_eq!(d.nu_a, nu);
        assert_eq!(d.singular_plus_mass() + d.singular_minus_mass(), 0.0);

        let d = sm(&[0.5, 0.5]).lebesgue_decompose(&fm(&[1.0, 0.0])).unwrap();
        assert_eq!(d.nu_a.weights(), &[0.5, 0.0]);
        assert_eq!(d.nu_s_plus.weights(), &[0.0, 0.5]);
        assert_eq!(d.nu_s_minus.weights(), &[0.0, 0.0]);
    }

    #[test]
    fn radon_nikodym_examples() {
        let d = radon_nikodym(&sm(&[1.0, 3.0]), &fm(&[2.0, 2.0])).unwrap();
        assert_eq!(d.values(), &[0.5, 1.5]);
        let mu = fm(&[0.3, 0.7]);
        let d = radon_nikodym(&mu.to_signed(), &mu).unwrap();
        assert_eq!(d.values(), &[1.0, 1.0]);
        let d = radon_nikodym(&sm(&[4.0, 0.0]), &fm(&[1.0, 0.0])).unwrap();
        assert_eq!(d.values(), &[4.0, 0.0]);
        assert!(matches!(
            radon_nikodym(&sm(&[4.0, 1.0]), &fm(&[1.0, 0.0])),
            Err(Error::NotAbsolutelyContinuous { index: 1 })
        ));
    }

    #[test]
    fn apply_density_examples() {
        let nu = sm(&[3.0, 5.0]);
        assert_eq!(nu.apply_density(&[1.0, 1.0]).unwrap(), nu);
        assert_eq!(nu.apply_density(&[0.0, 0.0]).unwrap().weights(), &[0.0, 0.0]);
        assert_eq!(nu.apply_density(&[2.0, 0.0]).unwrap().weights(), &[6.0, 0.0]);
        assert!(matches!(
            nu.apply_density(&[1.0, -1.0]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
    }

    #[test]
    fn total_variation_examples() {
        assert_eq!(sm(&[2.0, -3.0]).total_variation(), 5.0);
        assert_eq!(sm(&[0.0, 0.0]).total_variation(), 0.0);
        assert_eq!(sm(&[0.25, 0.5]).total_variation(), fm(&[0.25, 0.5]).total_mass());
    }

    fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..8).prop_flat_map(|n| {
            (
                prop::collection::vec(prop_oneof![Just(0.0), 0.0..5.0f64], n),
                prop::collection::vec(-5.0..5.0f64, n),
            )
        })
    }

    proptest! {
        #[test]
        fn lebesgue_parts_reconstruct_exactly((mu, nu) in pair()) {
            let d = sm(&nu).lebesgue_decompose(&fm(&mu)).unwrap();
            let r = d.reconstruct();
            prop_assert_eq!(r.weights(), &nu[..]);
            for (x, &m) in mu.iter().enumerate() {
                if m > 0.0 {
                    prop_assert_eq!(d.nu_s_plus.weights()[x], 0.0);
                    prop_assert_eq!(d.nu_s_minus.weights()[x], 0.0);
                } else {
                    prop_assert_eq!(d.nu_a.weights()[x], 0.0);
                    prop_assert!(d.nu_s_plus.weights()[x] * d.nu_s_minus.weights()[x] == 0.0);
                }
                prop_assert!(d.nu_s_minus.weights()[x] <= 0.0);
            }
        }

        #[test]
        fn density_reproduces_integrals((mu, nu) in pair(), seed in any::<u64>()) {
            let mu = fm(&mu);
            let d = sm(&nu).lebesgue_decompose(&mu).unwrap();
            let rn = radon_nikodym(&d.nu_a, &mu).unwrap();
            let g: Vec<f64> = (0..nu.len())
                .map(|i| ((seed.rotate_left(i as u32 * 7) % 1000) as f64) / 250.0 - 2.0)
                .collect();
            let lhs = d.nu_a.integrate(&g).unwrap();
            let dg: Vec<f64> = rn.values().iter().zip(&g).map(|(a, b)| a * b).collect();
            let rhs = mu.integrate(&dg).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn apply_density_is_additive(
            (f1, f2, nu) in (1usize..8).prop_flat_map(|n| (
                prop::collection::vec(0.0..3.0f64, n),
                prop::collection::vec(0.0..3.0f64, n),
                prop::collection::vec(-5.0..5.0f64, n),
            ))
        ) {
            let nu = sm(&nu);
            let sum: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
            let lhs = nu.apply_density(&sum).unwrap();
            let rhs = nu.apply_density(&f1).unwrap().checked_add(&nu.apply_density(&f2).unwrap()).unwrap();
            for (a, b) in lhs.weights().iter().zip(rhs.weights()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn jordan_parts_are_disjoint(nu in prop::collection::vec(-5.0..5.0f64, 1..8)) {
            let nu = sm(&nu);
            let (p, m) = nu.jordan_decompose();
            for x in 0..nu.weights().len() {
                prop_assert_eq!(p.weights()[x] - m.weights()[x], nu.weights()[x]);
                prop_assert!(p.weights()[x] * m.weights()[x] == 0.0);
            }
            prop_assert!((nu.total_variation() - p.total_mass() - m.total_mass()).abs() < 1e-12);
        }
    }
}
