//! Problem files: JSON schema and conversion into a [`CauchyProblem`].

use std::str::FromStr;

use gfcalc::opcalc::DEFAULT_TOL;
use gfcalc::poly::Polynomial;
use gfcalc::series::DEFAULT_HORIZON;
use gfcalc::sonine::validate_pair;
use gfcalc::{CauchyProblem, Exponent, GenSeries, NullElement, SoninePair, Truncation};
use num_complex::Complex64;
use serde::Deserialize;

use crate::CliError;

/// An exponent written as `"p/q"`, `"p"` or a JSON integer.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ExponentSpec {
    Int(i64),
    Text(String),
}

impl ExponentSpec {
    pub fn parse(&self) -> Result<Exponent, CliError> {
        match self {
            ExponentSpec::Int(n) => Ok(Exponent::integer(*n)),
            ExponentSpec::Text(s) => Exponent::from_str(s).map_err(|e| CliError::Schema(e.to_string())),
        }
    }
}

/// `{"exp": "3/2", "coeff": [re, im]}`, or a named atom: `"one"`, `"t"` or `"h_p/q"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum TermSpec {
    Named(String),
    Term { exp: ExponentSpec, coeff: [f64; 2] },
}

impl TermSpec {
    fn parse(&self) -> Result<(Exponent, Complex64), CliError> {
        match self {
            TermSpec::Term { exp, coeff } => Ok((exp.parse()?, complex(*coeff, "term coefficient")?)),
            TermSpec::Named(name) => {
                let one = Complex64::new(1.0, 0.0);
                let mu = match name.as_str() {
                    "one" => Exponent::integer(1),
                    "t" => Exponent::integer(2),
                    other => match other.strip_prefix("h_") {
                        Some(e) => Exponent::from_str(e).map_err(|e| CliError::Schema(e.to_string()))?,
                        None => return Err(CliError::Schema(format!("unknown atom name {other:?}"))),
                    },
                };
                Ok((mu, one))
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    PowerLaw {
        alpha: ExponentSpec,
        n: u32,
    },
    Explicit {
        terms: Vec<TermSpec>,
        n: u32,
        #[serde(default)]
        associate: Option<Vec<TermSpec>>,
    },
}

impl KernelSpec {
    pub fn build(&self, trunc: Truncation) -> Result<SoninePair, CliError> {
        match self {
            KernelSpec::PowerLaw { alpha, n } => Ok(SoninePair::power_law(alpha.parse()?, *n, trunc)?),
            KernelSpec::Explicit { terms, n, associate } => {
                let kappa = series(terms, trunc)?;
                if kappa.is_zero() {
                    return Err(CliError::Schema("explicit kernel has no nonzero terms".into()));
                }
                match associate {
                    Some(k) => Ok(validate_pair(kappa, series(k, trunc)?, *n)?),
                    None => Ok(SoninePair::from_kernel(kappa, *n)?),
                }
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn nodes(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.t_min];
        }
        let step = (self.t_max - self.t_min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.t_max } else { self.t_min + step * k as f64 })
            .collect()
    }

    fn check(&self) -> Result<(), CliError> {
        if !(self.t_min > 0.0) || !self.t_min.is_finite() {
            return Err(CliError::Schema(format!("grid.t_min must be positive, got {}", self.t_min)));
        }
        if !(self.t_max >= self.t_min) || !self.t_max.is_finite() {
            return Err(CliError::Schema(format!("grid.t_max must be >= t_min, got {}", self.t_max)));
        }
        if self.points == 0 {
            return Err(CliError::Schema("grid.points must be at least 1".into()));
        }
        if self.points == 1 && self.t_max != self.t_min {
            return Err(CliError::Schema("a single grid point needs t_min = t_max".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    #[serde(default)]
    pub mu_max: Option<ExponentSpec>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default, rename = "T")]
    pub horizon: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub kernel: KernelSpec,
    /// `c_0, ..., c_m` in ascending powers of `S`.
    pub equation: Vec<[f64; 2]>,
    #[serde(default)]
    pub rhs: Vec<TermSpec>,
    /// `initial[p][i] = a_ip`; omitted means homogeneous data.
    #[serde(default)]
    pub initial: Option<Vec<Vec<[f64; 2]>>>,
    pub grid: GridSpec,
    #[serde(default)]
    pub truncation: TruncationSpec,
}

/// Command-line overrides of the truncation block.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub mu_max: Option<String>,
    pub tol: Option<f64>,
}

/// A schema-checked problem ready to solve.
#[derive(Clone, Debug)]
pub struct Problem {
    pub cauchy: CauchyProblem,
    pub grid: Vec<f64>,
    pub truncation: Truncation,
    pub tol: f64,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn truncation(&self, overrides: &Overrides) -> Result<(Truncation, f64), CliError> {
        let mu_max = match (&overrides.mu_max, &self.truncation.mu_max) {
            (Some(s), _) => ExponentSpec::Text(s.clone()).parse()?,
            (None, Some(e)) => e.parse()?,
            (None, None) => Truncation::default().mu_max,
        };
        if !mu_max.is_positive() {
            return Err(CliError::Schema(format!("mu_max must be positive, got {mu_max}")));
        }
        let tol = overrides.tol.or(self.truncation.tol).unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(CliError::Schema(format!("tol must be positive, got {tol}")));
        }
        let horizon = self.truncation.horizon.unwrap_or(DEFAULT_HORIZON.max(self.grid.t_max));
        if horizon < self.grid.t_max {
            return Err(CliError::Schema(format!(
                "grid.t_max = {} lies beyond the truncation horizon T = {horizon}",
                self.grid.t_max
            )));
        }
        let trunc = Truncation::new(mu_max, horizon).map_err(|e| CliError::Schema(e.to_string()))?;
        Ok((trunc, tol))
    }

    /// Schema checks first, then the kernel pair and the Cauchy problem.
    pub fn build(&self, overrides: &Overrides) -> Result<Problem, CliError> {
        self.grid.check()?;
        let (trunc, tol) = self.truncation(overrides)?;
        let coeffs = self
            .equation
            .iter()
            .map(|c| complex(*c, "equation coefficient"))
            .collect::<Result<Vec<_>, _>>()?;
        let coeffs = Polynomial::new(coeffs);
        if coeffs.degree() == 0 {
            return Err(CliError::Schema("equation needs degree >= 1 in S".into()));
        }
        let m = coeffs.degree();
        let rhs = series(&self.rhs, trunc)?;

        let pair = self.kernel.build(trunc)?;
        let n = pair.n() as usize;
        let initial = match &self.initial {
            None => vec![NullElement::zero(pair.n()); m],
            Some(rows) => {
                if rows.len() != m {
                    return Err(CliError::Schema(format!("initial has {} rows, the equation needs m = {m}", rows.len())));
                }
                rows.iter()
                    .enumerate()
                    .map(|(p, row)| {
                        if row.len() != n {
                            return Err(CliError::Schema(format!(
                                "initial[{p}] has {} entries, the kernel needs n = {n}",
                                row.len()
                            )));
                        }
                        let a = row.iter().map(|c| complex(*c, "initial value")).collect::<Result<_, _>>()?;
                        Ok(NullElement::new(a))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        let cauchy = CauchyProblem::new(pair, coeffs, rhs, initial)?;
        Ok(Problem { cauchy, grid: self.grid.nodes(), truncation: trunc, tol })
    }
}

fn complex(c: [f64; 2], what: &str) -> Result<Complex64, CliError> {
    if !c[0].is_finite() || !c[1].is_finite() {
        return Err(CliError::Schema(format!("{what} must be finite, got [{}, {}]", c[0], c[1])));
    }
    Ok(Complex64::new(c[0], c[1]))
}

fn series(terms: &[TermSpec], trunc: Truncation) -> Result<GenSeries, CliError> {
    let terms = terms.iter().map(TermSpec::parse).collect::<Result<Vec<_>, _>>()?;
    Ok(GenSeries::new(terms, trunc)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RL: &str = r#"{
        "kernel": {"type": "power_law", "alpha": "1/2", "n": 1},
        "equation": [[-1, 0], [1, 0]],
        "initial": [[[1, 0]]],
        "grid": {"t_min": 0.1, "t_max": 2, "points": 5}
    }"#;

    #[test]
    fn parses_a_minimal_file() {
        let p = ProblemFile::from_json(RL).unwrap().build(&Overrides::default()).unwrap();
        assert_eq!(p.grid.len(), 5);
        assert_eq!(p.grid[4], 2.0);
        assert_eq!(p.truncation.mu_max, Exponent::integer(60));
        assert_eq!(p.cauchy.order(), 1);
    }

    #[test]
    fn zero_denominator_is_a_schema_error() {
        let text = RL.replace("\"1/2\"", "\"1/0\"");
        let err = ProblemFile::from_json(&text).unwrap().build(&Overrides::default()).unwrap_err();
        assert!(matches!(err, CliError::Schema(_)), "{err}");
        assert!(err.to_string().contains("malformed exponent"));
    }

    #[test]
    fn named_atoms() {
        let t = Truncation::default();
        let s = series(
            &[TermSpec::Named("one".into()), TermSpec::Named("t".into()), TermSpec::Named("h_5/2".into())],
            t,
        )
        .unwrap();
        let exps: Vec<String> = s.exponents().map(|e| e.to_string()).collect();
        assert_eq!(exps, ["1", "2", "5/2"]);
        assert!(series(&[TermSpec::Named("sin".into())], t).is_err());
    }

    #[test]
    fn rejects_bad_grids_and_shapes() {
        let bad_grid = RL.replace("\"t_min\": 0.1", "\"t_min\": 0");
        assert!(ProblemFile::from_json(&bad_grid).unwrap().build(&Overrides::default()).is_err());
        let bad_rows = RL.replace("[[[1, 0]]]", "[[[1, 0], [0, 0]]]");
        assert!(ProblemFile::from_json(&bad_rows).unwrap().build(&Overrides::default()).is_err());
        let unknown = RL.replace("\"grid\"", "\"gird\"");
        assert!(ProblemFile::from_json(&unknown).is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let file = ProblemFile::from_json(RL).unwrap();
        let o = Overrides { mu_max: Some("20".into()), tol: Some(1e-12) };
        let p = file.build(&o).unwrap();
        assert_eq!(p.truncation.mu_max, Exponent::integer(20));
        assert_eq!(p.tol, 1e-12);
    }
}
