//! Exact generalized power series with a Sonine-kernel fractional calculus and a
//! Mikusiński-style operational calculus for linear fractional differential equations.

mod accum;
pub mod error;
pub mod exponent;
pub mod opcalc;
pub mod operators;
pub mod oracle;
pub mod poly;
pub mod series;
pub mod solver;
pub mod sonine;
pub mod special;

pub use error::{Error, Result};
pub use exponent::{ex, Exponent};
pub use series::{GenSeries, SeriesRecord, TailBound, Truncation};
pub use solver::{solve_multi, solve_single, verify_solution, CauchyProblem, SolutionReport};
pub use sonine::{lattice_step, sonine_associate, validate_pair, SoninePair};
pub use operators::NullElement;
pub use opcalc::{l_series, realize_rational, RationalOperator, Realization, Realizer};
pub use poly::{partial_fractions, PartialFractionForm, Polynomial};
