use super::poly::UniPoly;
use super::rat::{Rat, Sign};
use super::roots::{sign_left_of, sign_right_of};

/// Sign of the first nonzero entry, i.e. the lexicographic comparison with zero.
pub fn lex_sign(v: &[Rat]) -> Sign {
    v.iter().map(Sign::of).find(|s| *s != Sign::Zero).unwrap_or(Sign::Zero)
}

/// Lexicographic sign of a parameter-dependent vector at `x`.
pub fn lex_sign_at(v: &[UniPoly], x: &Rat) -> Sign {
    cascade(v, |p| p.sign_at(x))
}

/// Lexicographic sign on `(x, x+ε)`.
pub fn lex_sign_right_of(v: &[UniPoly], x: &Rat) -> Sign {
    cascade(v, |p| sign_right_of(p, x))
}

/// Lexicographic sign on `(x-ε, x)`.
pub fn lex_sign_left_of(v: &[UniPoly], x: &Rat) -> Sign {
    cascade(v, |p| sign_left_of(p, x))
}

fn cascade(v: &[UniPoly], sign: impl Fn(&UniPoly) -> Sign) -> Sign {
    v.iter().map(sign).find(|s| *s != Sign::Zero).unwrap_or(Sign::Zero)
}
