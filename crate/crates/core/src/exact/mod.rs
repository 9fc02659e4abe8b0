//! Exact rational scalars, univariate polynomials and real-root isolation.

mod lex;
mod linscalar;
mod poly;
mod rat;
mod roots;

pub use lex::{lex_sign, lex_sign_at, lex_sign_left_of, lex_sign_right_of};
pub use linscalar::LinScalar;
pub use poly::UniPoly;
pub use rat::{exact_decimal, factorial, int, midpoint, parse_rat, plot_string, rat, to_f64, Rat, Sign};
pub use roots::{isolate_roots, sign_at, sign_left_of, sign_right_of, RootReport};
