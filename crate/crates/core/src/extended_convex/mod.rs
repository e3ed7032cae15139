//! Convex functions `F: R -> (-inf, +inf]`, their asymptotic slopes
//! `F'(+-inf) = lim F(t)/t`, supporting lines, and the perspective
//! `(s, x) -> s F(x/s)` extended to `s = 0` through the slopes.

mod ext_real;
mod generator;

use std::fmt;
use std::ops::{Bound, RangeBounds};
use std::sync::Arc;

pub use ext_real::ExtReal;
pub use generator::Generator;

use crate::error::{Error, Result};

/// Doubling exponent limit for the numeric slope: `t = 2^k`, `k <= 60`.
pub const SLOPE_MAX_DOUBLINGS: u32 = 60;
/// Successive ratio change below which the numeric slope is converged.
pub const SLOPE_TOL: f64 = 1e-9;
/// Ratios beyond this magnitude are promoted to an infinite slope.
pub const SLOPE_INFINITY_THRESHOLD: f64 = 1e12;

/// Direction of an asymptotic slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Pos,
    Neg,
}

/// An affine minorant `t -> slope * t + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportLine {
    pub slope: f64,
    pub intercept: f64,
}

impl SupportLine {
    pub fn at(&self, t: f64) -> f64 {
        self.slope * t + self.intercept
    }
}

/// The interval on which a convex function is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lower: Bound<f64>,
    pub upper: Bound<f64>,
}

impl Domain {
    pub const REAL_LINE: Domain = Domain {
        lower: Bound::Unbounded,
        upper: Bound::Unbounded,
    };

    pub fn new(lower: Bound<f64>, upper: Bound<f64>) -> Self {
        Domain { lower, upper }
    }

    pub fn contains(&self, t: f64) -> bool {
        t.is_finite() && (self.lower, self.upper).contains(&t)
    }

    fn endpoints(&self) -> (f64, f64) {
        let lo = match self.lower {
            Bound::Included(a) | Bound::Excluded(a) => a,
            Bound::Unbounded => f64::NEG_INFINITY,
        };
        let hi = match self.upper {
            Bound::Included(b) | Bound::Excluded(b) => b,
            Bound::Unbounded => f64::INFINITY,
        };
        (lo, hi)
    }

    pub fn is_empty(&self) -> bool {
        let (lo, hi) = self.endpoints();
        match (self.lower, self.upper) {
            (Bound::Included(_), Bound::Included(_)) => lo > hi,
            _ => lo >= hi,
        }
    }

    /// A point of the interior, or the single point of a degenerate domain.
    fn interior_point(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let (lo, hi) = self.endpoints();
        let t = if lo < 1.0 && 1.0 < hi {
            1.0
        } else if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else if lo.is_finite() {
            lo + 1.0
        } else {
            hi - 1.0
        };
        Some(t)
    }
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Builtin(Generator),
    Custom(Evaluator),
}

/// A convex function with extended-real values, together with its
/// asymptotic slopes and a supporting line.
///
/// Builtin generators carry analytic slopes and support lines. Custom
/// functions get them numerically at construction.
#[derive(Clone)]
pub struct ExtendedConvexFunction {
    label: String,
    kind: Kind,
    domain: Domain,
    slope_pos: ExtReal,
    slope_neg: ExtReal,
    support: SupportLine,
}

impl fmt::Debug for ExtendedConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtendedConvexFunction")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("slope_pos", &self.slope_pos)
            .field("slope_neg", &self.slope_neg)
            .field("support", &self.support)
            .finish()
    }
}

fn eval_builtin(g: Generator, t: f64) -> f64 {
    match g {
        Generator::Kl => {
            if t > 0.0 {
                -t.ln()
            } else {
                f64::INFINITY
            }
        }
        Generator::Hellinger => {
            if t >= 0.0 {
                1.0 - t.sqrt()
            } else {
                f64::INFINITY
            }
        }
        Generator::TotalVariation => (t - 1.0).abs(),
        Generator::PearsonChi2 => (t - 1.0) * (t - 1.0),
        Generator::Alpha(a) => {
            if t < 0.0 || (t == 0.0 && a < 0.0) {
                f64::INFINITY
            } else {
                (t.powf(a) - t) / (a * a - a)
            }
        }
    }
}

impl ExtendedConvexFunction {
    /// Builds one of the named generators with analytic slopes and a
    /// tangent line at `t = 1` (or `(0, 0)` for Pearson).
    pub fn builtin(g: Generator) -> Result<Self> {
        g.validate()?;
        use Bound::*;
        let (domain, slope_pos, slope_neg, support) = match g {
            Generator::Kl => (
                Domain::new(Excluded(0.0), Unbounded),
                ExtReal::ZERO,
                ExtReal::NegInf,
                SupportLine { slope: -1.0, intercept: 1.0 },
            ),
            Generator::Hellinger => (
                Domain::new(Included(0.0), Unbounded),
                ExtReal::ZERO,
                ExtReal::NegInf,
                SupportLine { slope: -0.5, intercept: 0.5 },
            ),
            Generator::TotalVariation => (
                Domain::REAL_LINE,
                ExtReal::Finite(1.0),
                ExtReal::Finite(-1.0),
                SupportLine { slope: 1.0, intercept: -1.0 },
            ),
            Generator::PearsonChi2 => (
                Domain::REAL_LINE,
                ExtReal::PosInf,
                ExtReal::NegInf,
                SupportLine { slope: 0.0, intercept: 0.0 },
            ),
            Generator::Alpha(a) => {
                let lower = if a > 0.0 { Included(0.0) } else { Excluded(0.0) };
                // F(t)/t = (t^(a-1) - 1)/(a^2 - a) as t -> +inf.
                let slope_pos = if a > 1.0 {
                    ExtReal::PosInf
                } else {
                    ExtReal::Finite(-1.0 / (a * a - a))
                };
                (
                    Domain::new(lower, Unbounded),
                    slope_pos,
                    ExtReal::NegInf,
                    SupportLine { slope: 1.0 / a, intercept: -1.0 / a },
                )
            }
        };
        Ok(ExtendedConvexFunction {
            label: g.to_string(),
            kind: Kind::Builtin(g),
            domain,
            slope_pos,
            slope_neg,
            support,
        })
    }

    /// Wraps a user-supplied convex function. Values outside `domain` are
    /// `+inf`; slopes and the support line are computed numerically.
    pub fn custom<F>(label: impl Into<String>, domain: Domain, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        if domain.is_empty() {
            return Err(Error::EmptyDomain(label));
        }
        let mut func = ExtendedConvexFunction {
            label,
            kind: Kind::Custom(Arc::new(f)),
            domain,
            slope_pos: ExtReal::PosInf,
            slope_neg: ExtReal::NegInf,
            support: SupportLine { slope: 0.0, intercept: 0.0 },
        };
        func.slope_pos = func.numeric_slope(Direction::Pos)?;
        func.slope_neg = func.numeric_slope(Direction::Neg)?;
        func.support = func.numeric_support_line()?;
        Ok(func)
    }

    /// Assembles a function from explicit parts without any checking.
    /// Intended for tests and fault injection; the caller vouches for
    /// convexity, slopes and the support line.
    pub fn from_parts<F>(
        label: impl Into<String>,
        domain: Domain,
        f: F,
        slope_pos: ExtReal,
        slope_neg: ExtReal,
        support: SupportLine,
    ) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ExtendedConvexFunction {
            label: label.into(),
            kind: Kind::Custom(Arc::new(f)),
            domain,
            slope_pos,
            slope_neg,
            support,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn generator(&self) -> Option<Generator> {
        match self.kind {
            Kind::Builtin(g) => Some(g),
            Kind::Custom(_) => None,
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// `F(t)`: `+inf` outside the finiteness domain and for non-finite `t`,
    /// never `-inf`.
    pub fn eval(&self, t: f64) -> ExtReal {
        if !self.domain.contains(t) {
            return ExtReal::PosInf;
        }
        let v = match &self.kind {
            Kind::Builtin(g) => eval_builtin(*g, t),
            Kind::Custom(f) => f(t),
        };
        match ExtReal::try_from_f64(v) {
            Some(ExtReal::NegInf) | None => ExtReal::PosInf,
            Some(x) => x,
        }
    }

    /// `F'(+inf)` or `F'(-inf)`.
    pub fn asymptotic_slope(&self, dir: Direction) -> ExtReal {
        match dir {
            Direction::Pos => self.slope_pos,
            Direction::Neg => self.slope_neg,
        }
    }

    /// Estimates `lim F(t)/t` along `t = +-2^k`, `k = 0..=60`.
    ///
    /// Converged once successive ratios differ by less than `1e-9`; a ratio
    /// beyond `1e12` in magnitude is promoted to the matching infinity.
    pub fn numeric_slope(&self, dir: Direction) -> Result<ExtReal> {
        let sign = match dir {
            Direction::Pos => 1.0,
            Direction::Neg => -1.0,
        };
        let mut prev: Option<f64> = None;
        let mut last_delta = f64::INFINITY;
        // Two small steps in a row: a single one can be a coincidence, e.g.
        // -ln(t)/t takes the same value at t = 2 and t = 4.
        let mut small_steps = 0;
        for k in 0..=SLOPE_MAX_DOUBLINGS {
            let t = sign * 2f64.powi(k as i32);
            let ratio = match self.eval(t) {
                // +inf / t
                ExtReal::PosInf => return Ok(if sign > 0.0 { ExtReal::PosInf } else { ExtReal::NegInf }),
                v => v.to_f64() / t,
            };
            if ratio.abs() > SLOPE_INFINITY_THRESHOLD {
                return Ok(if ratio > 0.0 { ExtReal::PosInf } else { ExtReal::NegInf });
            }
            if let Some(p) = prev {
                last_delta = (ratio - p).abs();
                small_steps = if last_delta < SLOPE_TOL { small_steps + 1 } else { 0 };
                if small_steps == 2 {
                    return Ok(ExtReal::Finite(ratio));
                }
            }
            prev = Some(ratio);
        }
        Err(Error::NonConvergence {
            what: "asymptotic slope",
            iterations: SLOPE_MAX_DOUBLINGS as usize + 1,
            last_delta,
            best: prev,
        })
    }

    /// The stored supporting line `F(t) >= A t + B`.
    pub fn superlinear_bounds(&self) -> SupportLine {
        self.support
    }

    /// A supporting line built from a one-sided difference quotient at an
    /// interior point of the domain.
    ///
    /// With `s` the secant slope over `[t0, t0 + h]`, `F(t) - s t` is convex
    /// and takes equal values at both ends, so its infimum over the real line
    /// lies in that interval and is found by golden-section search.
    pub fn numeric_support_line(&self) -> Result<SupportLine> {
        let t0 = self
            .domain
            .interior_point()
            .ok_or_else(|| Error::EmptyDomain(self.label.clone()))?;
        let f0 = self.eval(t0).to_f64();
        let (_, hi) = self.domain.endpoints();
        let mut h = 1e-3 * (1.0 + t0.abs());
        if hi.is_finite() {
            h = h.min(0.5 * (hi - t0));
        }
        if h <= 0.0 || !h.is_finite() {
            // Single-point domain.
            return Ok(SupportLine { slope: 0.0, intercept: f0 });
        }
        let f1 = self.eval(t0 + h).to_f64();
        let slope = (f1 - f0) / h;
        if !slope.is_finite() {
            return Err(Error::EmptyDomain(self.label.clone()));
        }
        let g = |t: f64| self.eval(t).to_f64() - slope * t;
        let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (t0, t0 + h);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut gc, mut gd) = (g(c), g(d));
        for _ in 0..100 {
            if gc <= gd {
                b = d;
                d = c;
                gd = gc;
                c = b - inv_phi * (b - a);
                gc = g(c);
            } else {
                a = c;
                c = d;
                gc = gd;
                d = a + inv_phi * (b - a);
                gd = g(d);
            }
        }
        let best = gc.min(gd).min(g(t0));
        let intercept = best - 1e-9 * (1.0 + best.abs());
        Ok(SupportLine { slope, intercept })
    }

    /// The perspective `s F(x/s)`, extended to `s = 0` by
    /// `x F'(+inf)` for `x > 0`, `x F'(-inf)` for `x < 0` and `0` for `x = 0`.
    ///
    /// Panics if `s` is negative or NaN.
    pub fn perspective(&self, s: f64, x: f64) -> ExtReal {
        assert!(s >= 0.0, "perspective needs s >= 0, got {s}");
        if s > 0.0 {
            let ratio = x / s;
            if ratio.is_finite() {
                return self
                    .eval(ratio)
                    .mul_real(s)
                    .expect("positive scale is determinate");
            }
        }
        if x > 0.0 {
            ExtReal::singular_product(x, self.slope_pos)
        } else if x < 0.0 {
            ExtReal::singular_product(x, self.slope_neg)
        } else {
            ExtReal::ZERO
        }
    }

    /// Convexity on consecutive triples of a sorted grid, within `tol`.
    /// An infinite interpolation bound satisfies the inequality vacuously.
    pub fn check_convexity(&self, grid: &[f64], tol: f64) -> bool {
        grid.windows(3).all(|w| {
            let (t1, t2, t3) = (w[0], w[1], w[2]);
            if !(t1 < t2 && t2 < t3) {
                return true;
            }
            let lam = (t3 - t2) / (t3 - t1);
            let (f1, f2, f3) = (self.eval(t1), self.eval(t2), self.eval(t3));
            let bound = match (f1, f3) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                    ExtReal::Finite(lam * a + (1.0 - lam) * b)
                }
                _ => ExtReal::PosInf,
            };
            f2.le_within(bound, tol)
        })
    }
}
