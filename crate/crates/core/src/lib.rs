//! Exact measure and integration over fields of generalized power series.

pub mod algebra;
pub mod calculus;
pub mod cli;
pub mod constants;
pub mod constructible;
pub mod datum;
pub mod error;
pub mod exponents;
pub mod logexp;
pub mod oracle;
pub mod semialg;
pub mod series;
pub mod syntax;

pub use algebra::AlgebraElement;
pub use constants::{RealConstant, Q};
pub use error::{Error, Result};
pub use exponents::{Exponent, ExponentGroup, Group};
pub use series::{Precision, Series, StandardPart};
pub use oracle::{Quadrature32, Quadrature64};
