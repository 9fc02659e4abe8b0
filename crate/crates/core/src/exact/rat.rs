use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar. Always kept in lowest terms with a positive denominator.
pub type Rat = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-1.25"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if s.contains('/') {
            return Err(Error::Parse(format!("malformed rational `{s}`")));
        }
        let negative = whole.trim_start().starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let digits = format!("{whole_digits}{frac}");
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::Parse(format!("malformed decimal `{s}`")));
        }
        let numer = BigInt::from_str(&digits).map_err(|_| Error::Parse(format!("malformed decimal `{s}`")))?;
        let denom = num::pow(BigInt::from(10), frac.len());
        let value = Rat::new(numer, denom);
        return Ok(if negative { -value } else { value });
    }
    let value = Rat::from_str(s).map_err(|_| Error::Parse(format!("malformed rational `{s}`")))?;
    Ok(value)
}

/// Terminating decimal expansion of `r`, or `None` when the denominator has a
/// prime factor other than 2 and 5.
pub fn exact_decimal(r: &Rat) -> Option<String> {
    let mut denom = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return None;
    }
    let places = twos.max(fives);
    if places == 0 {
        return Some(r.numer().to_string());
    }
    let scaled = r * Rat::from_integer(num::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    let sign = if r.is_negative() { "-" } else { "" };
    Some(format!("{sign}{int_part}.{frac_part}"))
}

/// Decimal where terminating, otherwise `p/q`.
pub fn plot_string(r: &Rat) -> String {
    exact_decimal(r).unwrap_or_else(|| r.to_string())
}

pub fn midpoint(a: &Rat, b: &Rat) -> Rat {
    (a + b) / int(2)
}

pub fn factorial(n: usize) -> Rat {
    (1..=n).fold(Rat::one(), |acc, i| acc * int(i as i64))
}

/// Lossy conversion, used only for emitted plot geometry.
pub fn to_f64(r: &Rat) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact sign of a scalar or of a lexicographic comparison against zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(r: &Rat) -> Sign {
        if r.is_zero() {
            Sign::Zero
        } else if r.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Negative => "-",
            Sign::Zero => "0",
            Sign::Positive => "+",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rat("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("-7").unwrap(), int(-7));
        assert_eq!(parse_rat("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rat("0.5").unwrap(), rat(1, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
        assert!(parse_rat("").is_err());
    }

    #[test]
    fn decimal_expansion_only_when_terminating() {
        assert_eq!(exact_decimal(&rat(1, 4)).as_deref(), Some("0.25"));
        assert_eq!(exact_decimal(&rat(-3, 40)).as_deref(), Some("-0.075"));
        assert_eq!(exact_decimal(&int(12)).as_deref(), Some("12"));
        assert_eq!(exact_decimal(&rat(1, 3)), None);
        assert_eq!(plot_string(&rat(2, 3)), "2/3");
    }

    #[test]
    fn lowest_terms_invariant() {
        let r = rat(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        let a = rat(7, 9);
        assert_eq!(&a * a.recip(), Rat::one());
    }
}
