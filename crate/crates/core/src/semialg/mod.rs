//! The computable semialgebraic fragment.

pub mod expr;
pub mod poly;
pub mod set;

pub use expr::{Expr, Func, Guard};
pub use set::{Component, Endpoint, Region, SetOneD};
