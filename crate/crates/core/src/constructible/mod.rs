//! Constructible functions of one variable.

pub mod asym;
pub mod convolve;
pub mod describe;
pub mod extract;
pub mod limit;

/// Constructible functions share the expression type; log factors are `Func::Log` nodes.
pub type ConstructibleExpr = crate::semialg::Expr;

pub use convolve::{cauchy_kernel, convolve};
pub use describe::{differentiate, simple_description, SimpleDescription, SimpleTerm};
pub use extract::extract_coefficients;
pub use limit::{limit_at_infinity, limit_at_point, Limit, Side};
