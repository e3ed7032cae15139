use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Named divergence generators.
///
/// | name | F(t) |
/// |---|---|
/// | `kl` | `-ln t` |
/// | `hellinger` | `1 - sqrt(t)` |
/// | `total_variation` | `abs(t - 1)` |
/// | `pearson_chi2` | `(t - 1)^2` |
/// | `alpha:<a>` | `(t^a - t) / (a^2 - a)` |
///
/// Each is extended by `+inf` wherever the formula is undefined on the real
/// line (negative arguments for `kl`, `hellinger` and `alpha`, and `t = 0` for
/// `kl` and negative `a`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    Kl,
    Hellinger,
    TotalVariation,
    PearsonChi2,
    Alpha(f64),
}

impl Generator {
    /// Builds a generator from its name and optional alpha parameter.
    pub fn from_name(name: &str, alpha: Option<f64>) -> Result<Self, Error> {
        let g = match (name, alpha) {
            ("kl", None) => Generator::Kl,
            ("hellinger", None) => Generator::Hellinger,
            ("total_variation", None) => Generator::TotalVariation,
            ("pearson_chi2", None) => Generator::PearsonChi2,
            ("alpha", Some(a)) => Generator::Alpha(a),
            ("alpha", None) => {
                return Err(Error::InvalidArgument(
                    "the alpha generator needs a parameter".into(),
                ))
            }
            (n, Some(_)) if ["kl", "hellinger", "total_variation", "pearson_chi2"].contains(&n) => {
                return Err(Error::InvalidArgument(format!(
                    "generator `{n}` takes no alpha parameter"
                )))
            }
            (other, _) => return Err(Error::UnknownGenerator(other.to_string())),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(self) -> Result<(), Error> {
        match self {
            Generator::Alpha(a) if !a.is_finite() || a == 0.0 || a == 1.0 => {
                Err(Error::InvalidAlpha(a))
            }
            _ => Ok(()),
        }
    }

    /// The four parameter-free generators.
    pub const FIXED: [Generator; 4] = [
        Generator::Kl,
        Generator::Hellinger,
        Generator::TotalVariation,
        Generator::PearsonChi2,
    ];
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Kl => f.write_str("kl"),
            Generator::Hellinger => f.write_str("hellinger"),
            Generator::TotalVariation => f.write_str("total_variation"),
            Generator::PearsonChi2 => f.write_str("pearson_chi2"),
            Generator::Alpha(a) => write!(f, "alpha:{a}"),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.split_once(':') {
            Some(("alpha", v)) => {
                let a: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad alpha value `{v}`")))?;
                Generator::from_name("alpha", Some(a))
            }
            Some(_) => Err(Error::UnknownGenerator(s.to_string())),
            None => Generator::from_name(s, None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in ["kl", "hellinger", "total_variation", "pearson_chi2", "alpha:2", "alpha:-0.5"] {
            let g: Generator = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
    }

    #[test]
    fn rejects_bad_names_and_alphas() {
        assert!("renyi".parse::<Generator>().is_err());
        assert!("alpha".parse::<Generator>().is_err());
        assert!(matches!("alpha:1".parse::<Generator>(), Err(Error::InvalidAlpha(_))));
        assert!(matches!("alpha:0".parse::<Generator>(), Err(Error::InvalidAlpha(_))));
        assert!("alpha:x".parse::<Generator>().is_err());
        assert!(Generator::from_name("kl", Some(2.0)).is_err());
    }
}
