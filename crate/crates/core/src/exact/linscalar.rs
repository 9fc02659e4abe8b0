use std::fmt;

use num::{Signed, Zero};

use super::poly::UniPoly;
use super::rat::{Rat, Sign};
use crate::error::{Error, Result};

/// `constant + slope·var` for a parameter `var ∈ [0,1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinScalar {
    pub constant: Rat,
    pub slope: Rat,
    pub var: char,
}

impl LinScalar {
    pub fn new(constant: Rat, slope: Rat, var: char) -> Self {
        LinScalar { constant, slope, var }
    }

    pub fn constant(c: Rat) -> Self {
        LinScalar { constant: c, slope: Rat::zero(), var: 't' }
    }

    /// The affine function taking `at0` at 0 and `at1` at 1.
    pub fn through(at0: Rat, at1: Rat, var: char) -> Self {
        let slope = &at1 - &at0;
        LinScalar { constant: at0, slope, var }
    }

    pub fn with_var(mut self, var: char) -> Self {
        self.var = var;
        self
    }

    pub fn is_constant(&self) -> bool {
        self.slope.is_zero()
    }

    pub fn eval(&self, v: &Rat) -> Rat {
        &self.constant + &self.slope * v
    }

    pub fn at0(&self) -> Rat {
        self.constant.clone()
    }

    pub fn at1(&self) -> Rat {
        &self.constant + &self.slope
    }

    /// Nonnegative on all of `[0,1]`; by linearity the endpoints suffice.
    pub fn nonnegative_on_unit(&self) -> bool {
        !self.at0().is_negative() && !self.at1().is_negative()
    }

    pub fn sign_at(&self, v: &Rat) -> Sign {
        Sign::of(&self.eval(v))
    }

    pub fn add(&self, other: &LinScalar) -> LinScalar {
        LinScalar {
            constant: &self.constant + &other.constant,
            slope: &self.slope + &other.slope,
            var: if self.is_constant() { other.var } else { self.var },
        }
    }

    pub fn scale(&self, c: &Rat) -> LinScalar {
        LinScalar { constant: &self.constant * c, slope: &self.slope * c, var: self.var }
    }

    /// Product, defined only while the result stays affine.
    pub fn mul(&self, other: &LinScalar) -> Result<LinScalar> {
        match (self.is_constant(), other.is_constant()) {
            (true, _) => Ok(other.scale(&self.constant)),
            (_, true) => Ok(self.scale(&other.constant)),
            _ => Err(Error::NonLinearCoefficient),
        }
    }

    pub fn to_poly(&self) -> UniPoly {
        UniPoly::linear(self.constant.clone(), self.slope.clone(), self.var)
    }
}

impl fmt::Display for LinScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::{int, rat};

    #[test]
    fn affine_evaluation() {
        let s = LinScalar::through(rat(1, 3), int(0), 't');
        assert_eq!(s.eval(&rat(1, 2)), rat(1, 6));
        assert!(s.nonnegative_on_unit());
        assert_eq!(s.to_string(), "-1/3*t + 1/3");
    }

    #[test]
    fn product_stays_affine() {
        let a = LinScalar::through(int(0), int(1), 'r');
        let c = LinScalar::constant(int(3));
        assert_eq!(a.mul(&c).unwrap().at1(), int(3));
        assert_eq!(a.mul(&a), Err(Error::NonLinearCoefficient));
    }
}
