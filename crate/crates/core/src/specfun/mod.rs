//! Special functions and quadrature rules shared by the kernel and expectation layers.

mod erfi;
mod hypergeom;
mod quadrature;

pub use erfi::{dawson, erfi};
pub(crate) use hypergeom::hyp0f1_unit;
pub use hypergeom::{hyp0f1, hyp2f1, hyp_pfq, HypergeomSpec, DEFAULT_MAX_TERMS, DEFAULT_REL_TOL};
pub use quadrature::{
    gauss_hermite, gauss_legendre, integrate, integrate_composite, principal_value, GaussRule,
    PvEstimate, QuadratureSpec,
};
