//! Exact polynomial and graded Laurent-series arithmetic over the rationals.

mod bipoly;
mod phase;
mod potential;
mod qpoly;

pub type Rational = num_rational::BigRational;

pub use bipoly::BiPoly;
pub(crate) use phase::falling_factorial;
pub use phase::{
    entry_coeff, min_abs_exponent, series_diff, series_eval, Cutoffs, GradedLaurent, PhaseSeries,
    Var,
};
pub(crate) use potential::PotentialPowers;
pub use potential::{
    parse_rational, potential_difference_power, potential_difference_power_weighted,
    PolynomialPotential,
};
pub(crate) use qpoly::rational_to_f64;
pub use qpoly::QPoly;

/// Exact rational n/d.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
