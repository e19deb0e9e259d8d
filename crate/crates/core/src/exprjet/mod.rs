//! Expression language for scalar functions and third-order forward-mode jets.

mod eval;
mod jet;
mod parse;

pub use eval::DIVISION_FLOOR;
pub use jet::Jet3;
pub use parse::{Expr, Expression, Func, ParseError};
