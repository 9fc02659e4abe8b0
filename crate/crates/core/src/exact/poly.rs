use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};

use super::rat::{int, Rat, Sign};

/// Dense univariate polynomial with rational coefficients in ascending degree.
///
/// Trailing zeros are trimmed, so the zero polynomial has no coefficients.
/// The variable name is cosmetic and does not take part in equality.
#[derive(Clone, Debug)]
pub struct UniPoly {
    coeffs: Vec<Rat>,
    var: char,
}

impl PartialEq for UniPoly {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for UniPoly {}

impl UniPoly {
    pub fn new(coeffs: Vec<Rat>, var: char) -> Self {
        let mut p = UniPoly { coeffs, var };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new(), var: 't' }
    }

    pub fn constant(c: Rat) -> Self {
        UniPoly::new(vec![c], 't')
    }

    /// `c + m·var`
    pub fn linear(c: Rat, m: Rat, var: char) -> Self {
        UniPoly::new(vec![c, m], var)
    }

    pub fn from_ints(coeffs: &[i64], var: char) -> Self {
        UniPoly::new(coeffs.iter().map(|&c| int(c)).collect(), var)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn var(&self) -> char {
        self.var
    }

    pub fn with_var(mut self, var: char) -> Self {
        self.var = var;
        self
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    /// `None` for the identically zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.coeffs.iter().rev().fold(Rat::zero(), |acc, c| acc * x + c)
    }

    pub fn sign_at(&self, x: &Rat) -> Sign {
        Sign::of(&self.eval(x))
    }

    pub fn derivative(&self) -> UniPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * int(i as i64))
            .collect();
        UniPoly::new(coeffs, self.var)
    }

    pub fn scale(&self, r: &Rat) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| c * r).collect(), self.var)
    }

    /// Substitutes `var = offset + slope·x`.
    pub fn compose_linear(&self, offset: &Rat, slope: &Rat) -> UniPoly {
        let inner = UniPoly::linear(offset.clone(), slope.clone(), self.var);
        self.coeffs
            .iter()
            .rev()
            .fold(UniPoly::zero().with_var(self.var), |acc, c| &(&acc * &inner) + &UniPoly::constant(c.clone()))
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &UniPoly) -> (UniPoly, UniPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rat::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let factor = rem.last().unwrap() / &lead;
            for (i, c) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] -= &factor * c;
            }
            quot[shift] = factor;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        (UniPoly::new(quot, self.var), UniPoly::new(rem, self.var))
    }

    pub fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().recip())
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Product of the distinct irreducible factors, made monic.
    pub fn squarefree(&self) -> UniPoly {
        if self.is_constant() {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Scales to a primitive integer polynomial with positive leading coefficient.
    pub fn primitive_integer(&self) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self.coeffs.iter().fold(num::BigInt::one(), |acc, c| num::integer::lcm(acc, c.denom().clone()));
        let scaled: Vec<Rat> = self.coeffs.iter().map(|c| c * Rat::from_integer(lcm.clone())).collect();
        let gcd = scaled
            .iter()
            .filter(|c| !c.is_zero())
            .fold(num::BigInt::zero(), |acc, c| num::integer::gcd(acc, c.to_integer()));
        let mut divisor = Rat::from_integer(gcd);
        if scaled.last().unwrap().is_negative() {
            divisor = -divisor;
        }
        UniPoly::new(scaled.iter().map(|c| c / &divisor).collect(), self.var)
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        UniPoly::new(coeffs, self.var)
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect();
        UniPoly::new(coeffs, self.var)
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero().with_var(self.var);
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        UniPoly::new(coeffs, self.var)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| -c).collect(), self.var)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for UniPoly {
            type Output = UniPoly;
            fn $method(self, rhs: UniPoly) -> UniPoly {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        -&self
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            let mag = c.abs();
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            first = false;
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if i == 1 {
                        write!(f, "{}", self.var)?;
                    } else {
                        write!(f, "{}^{i}", self.var)?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::rat;

    #[test]
    fn arithmetic_and_trim() {
        let p = UniPoly::from_ints(&[1, 2, 0], 't');
        assert_eq!(p.degree(), Some(1));
        let q = UniPoly::from_ints(&[-1, -2], 't');
        assert!((&p + &q).is_zero());
        let sq = &p * &p;
        assert_eq!(sq, UniPoly::from_ints(&[1, 4, 4], 't'));
        assert_eq!(sq.eval(&rat(1, 2)), Rat::from_integer(4.into()));
    }

    #[test]
    fn division_and_gcd() {
        // (t-1)^2 (t+2)
        let p = UniPoly::from_ints(&[2, -3, 0, 1], 't');
        let (q, r) = p.div_rem(&UniPoly::from_ints(&[-1, 1], 't'));
        assert!(r.is_zero());
        assert_eq!(q, UniPoly::from_ints(&[-2, 1, 1], 't'));
        assert_eq!(p.squarefree(), UniPoly::from_ints(&[-2, 1, 1], 't'));
    }

    #[test]
    fn compose_linear_substitutes() {
        let p = UniPoly::from_ints(&[0, 0, 1], 'u');
        let shifted = p.compose_linear(&int(1), &int(2));
        assert_eq!(shifted, UniPoly::from_ints(&[1, 4, 4], 'u'));
    }

    #[test]
    fn primitive_integer_form() {
        let p = UniPoly::new(vec![rat(-1, 3), rat(2, 3)], 't');
        assert_eq!(p.primitive_integer(), UniPoly::from_ints(&[-1, 2], 't'));
        assert_eq!(p.to_string(), "2/3*t - 1/3");
    }
}
