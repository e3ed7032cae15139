//! # divkit
//!
//! Sup-sums F-divergences on finite measure spaces.
//!
//! For a convex `F: R -> (-inf, +inf]`, a nonnegative measure `mu` and a
//! signed measure `nu`, the sup-sums divergence is
//!
//! ```text
//! rho_F(mu, nu) = sup_G  sum_{g in G} mu[g] F(nu[g] / mu[g])
//! ```
//!
//! over partitions of unity `G`. It splits into an absolutely continuous
//! integral plus singular masses weighted by the asymptotic slopes of `F`:
//!
//! ```text
//! rho_F(mu, nu) = int F(d nu_a / d mu) d mu + nu_s+(X) F'(+inf) + nu_s-(X) F'(-inf)
//! ```
//!
//! On a finite atom set the atomic partition attains the supremum, so
//! [`divergence::closed_form`] is exact and [`divergence::partition_sum`]
//! over sampled partitions is a check on it.
//!
//! The [`dynsys`] module applies the same machinery to transfer operators
//! of a self-map `alpha` of a finite set: the t-entropy
//! `tau_n(mu) = -D_KL(mu || A*^n mu)` and the variational principle
//! `lambda(phi) = max_mu (mu[phi] + tau(mu))`.
//!
//! Every function on a finite discrete space is continuous, so the
//! distinction between continuous and measurable partitions of unity, and
//! the regularity of measures, play no role here.
//!
//! ## Modules
//!
//! - [`extended_convex`]: [`ExtReal`], convex generators, slopes, perspective
//! - [`measure`]: finite and signed measures, Jordan/Lebesgue decompositions
//! - [`partition`]: partitions of unity
//! - [`divergence`]: sup-sums sums, closed form, extended KL
//! - [`dynsys`]: transfer operators, spectral potential, t-entropy
//! - [`io`]: JSON file schemas for measures and systems
//! - [`verify`]: seeded property batches behind `divkit verify`

#![forbid(unsafe_code)]

pub mod divergence;
pub mod dynsys;
pub mod error;
pub mod extended_convex;
pub mod io;
pub mod measure;
pub mod partition;
pub mod rng;
pub mod verify;

pub use divergence::DivergenceReport;
pub use dynsys::{
    CycleDecomposition, DynamicalSystem, InvariantMeasure, Potential, TransferOperator,
};
pub use error::{Error, Result};
pub use extended_convex::{Direction, Domain, ExtReal, ExtendedConvexFunction, Generator, SupportLine};
pub use measure::{AtomSpace, Density, FiniteMeasure, LebesgueDecomposition, Measure, SignedMeasure};
pub use partition::PartitionOfUnity;
