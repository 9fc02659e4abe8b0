//! Topological types of sheaves and formal sums of line bundles.

use std::fmt;

use num::{Signed, Zero};

use crate::chow::{DivisorClass, GradedClass, NumericalModel};
use crate::error::{Error, Result};
use crate::exact::{int, LinScalar, Rat, UniPoly};

/// A topological type, given by its Chern character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafType {
    pub name: String,
    pub ch: GradedClass,
}

impl SheafType {
    pub fn new(name: &str, ch: GradedClass) -> Self {
        SheafType { name: name.to_string(), ch }
    }

    /// Type with the given rank and first Chern class, higher terms zero.
    pub fn with_rank_c1(model: &NumericalModel, name: &str, rank: Rat, c1: &DivisorClass) -> Self {
        let ch = model.scalar(rank).add(&model.divisor(c1));
        SheafType::new(name, ch)
    }

    pub fn rank(&self) -> Rat {
        self.ch.coeff(0, 0).clone()
    }

    /// `(ch(E)·Todd(X))_i`
    pub fn hilb_upper(&self, model: &NumericalModel, i: usize) -> GradedClass {
        model.mul(&self.ch, model.todd()).component(i)
    }

    /// `Hilb_i(E) / rank(E)`
    pub fn hilb(&self, model: &NumericalModel, i: usize) -> GradedClass {
        self.hilb_upper(model, i).scale(&self.rank().recip())
    }

    /// `ch(E)·Todd(X) / rank(E)` in all degrees at once.
    pub fn hilb_total(&self, model: &NumericalModel) -> GradedClass {
        model.mul(&self.ch, model.todd()).scale(&self.rank().recip())
    }
}

/// `hilb_i(F) - hilb_i(E)`
pub fn hilb_diff(model: &NumericalModel, f: &SheafType, e: &SheafType, i: usize) -> GradedClass {
    f.hilb(model, i).sub(&e.hilb(model, i))
}

/// A line bundle, optionally remembered as a power `base^exponent` of a named bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineBundle {
    pub name: String,
    pub c1: DivisorClass,
    pub power: Option<(String, i64)>,
}

impl LineBundle {
    pub fn new(name: &str, c1: DivisorClass) -> Self {
        LineBundle { name: name.to_string(), c1, power: None }
    }

    pub fn trivial(n: usize) -> Self {
        LineBundle { name: "O".into(), c1: DivisorClass::zero(n), power: None }
    }

    /// `base^exponent`; exponent 0 gives the structure sheaf.
    pub fn power_of(base: &str, c1: &DivisorClass, exponent: i64) -> Self {
        if exponent == 0 {
            return LineBundle::trivial(c1.coords.len());
        }
        LineBundle {
            name: if exponent == 1 { base.to_string() } else { format!("{base}^{exponent}") },
            c1: c1.scale(&int(exponent)),
            power: Some((base.to_string(), exponent)),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.c1.is_zero()
    }

    pub fn ch(&self, model: &NumericalModel) -> GradedClass {
        model.exp_class(&self.c1)
    }

    pub fn tensor(&self, other: &LineBundle) -> LineBundle {
        let c1 = self.c1.add(&other.c1);
        if self.is_trivial() {
            return other.clone();
        }
        if other.is_trivial() {
            return self.clone();
        }
        match (&self.power, &other.power) {
            (Some((a, m)), Some((b, n))) if a == b => LineBundle::power_of(a, &self.c1.scale(&int(*m).recip()), m + n),
            _ => LineBundle { name: format!("{}⊗{}", self.name, other.name), c1, power: None },
        }
    }
}

impl fmt::Display for LineBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `Σ b_i(v)·A_i` with coefficients affine in one parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalBundleSum {
    pub terms: Vec<(LinScalar, LineBundle)>,
}

impl FormalBundleSum {
    pub fn new(terms: Vec<(LinScalar, LineBundle)>) -> Self {
        FormalBundleSum { terms }
    }

    /// `c·O_X`
    pub fn trivial(c: LinScalar, n: usize) -> Self {
        FormalBundleSum { terms: vec![(c, LineBundle::trivial(n))] }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.is_constant())
    }

    /// Specializes the parameter to `v`.
    pub fn at(&self, v: &Rat) -> FormalBundleSum {
        FormalBundleSum {
            terms: self.terms.iter().map(|(c, b)| (LinScalar::constant(c.eval(v)), b.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &LinScalar) -> Result<FormalBundleSum> {
        let terms = self
            .terms
            .iter()
            .map(|(b, l)| Ok((b.mul(c)?, l.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(FormalBundleSum { terms })
    }

    pub fn plus(&self, other: &FormalBundleSum) -> FormalBundleSum {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        FormalBundleSum { terms }
    }

    /// Every coefficient nonnegative on `[0,1]` and some coefficient positive
    /// at each interior point.
    pub fn is_admissible(&self) -> bool {
        if !self.terms.iter().all(|(c, _)| c.nonnegative_on_unit()) {
            return false;
        }
        let total0 = self.terms.iter().any(|(c, _)| c.at0().is_positive());
        let total1 = self.terms.iter().any(|(c, _)| c.at1().is_positive());
        total0 || total1
    }

    /// Total Chern character at parameter `v`.
    pub fn ch_at(&self, model: &NumericalModel, v: &Rat) -> GradedClass {
        self.terms
            .iter()
            .fold(model.zero(), |acc, (c, l)| acc.add(&l.ch(model).scale(&c.eval(v))))
    }
}

impl fmt::Display for FormalBundleSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(c, l)| format!("({c})·{l}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

pub fn sum_rank(b: &FormalBundleSum) -> LinScalar {
    b.terms.iter().fold(LinScalar::constant(Rat::zero()), |acc, (c, _)| acc.add(c))
}

pub fn sum_c1(model: &NumericalModel, b: &FormalBundleSum, v: &Rat) -> GradedClass {
    b.ch_at(model, v).component(1)
}

pub fn sum_ch2(model: &NumericalModel, b: &FormalBundleSum, v: &Rat) -> GradedClass {
    if model.dim() < 2 {
        return model.zero();
    }
    b.ch_at(model, v).component(2)
}

/// Distributes `B ⊗ C` term by term.
pub fn tensor_sum(b: &FormalBundleSum, c: &FormalBundleSum) -> Result<FormalBundleSum> {
    let mut terms = Vec::with_capacity(b.terms.len() * c.terms.len());
    for (x, l) in &b.terms {
        for (y, m) in &c.terms {
            terms.push((x.mul(y)?, l.tensor(m)));
        }
    }
    Ok(FormalBundleSum { terms })
}

/// `χ(E ⊗ L^k ⊗ B) = ∫ ch(E)·e^{k c₁(L)}·ch(B)·Todd(X)` as a polynomial in `k`.
///
/// `B` must have constant coefficients; specialize a parametric sum with
/// [`FormalBundleSum::at`] first.
pub fn euler_characteristic(
    model: &NumericalModel,
    e: &SheafType,
    l: &DivisorClass,
    b: &FormalBundleSum,
) -> Result<UniPoly> {
    if !b.is_constant() {
        return Err(Error::Precondition("euler characteristic needs a constant twist".into()));
    }
    let base = model.mul_all(&[&e.ch, &b.ch_at(model, &Rat::zero()), model.todd()]);
    let coeffs = model.exp_divisor(l).iter().map(|ek| model.pairing(&base, ek)).collect();
    Ok(UniPoly::new(coeffs, 'k'))
}

/// Validates that a type may enter a stability comparison.
pub fn require_positive_rank(e: &SheafType) -> Result<()> {
    if e.rank().is_positive() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("sheaf type `{}` must have positive rank", e.name)))
    }
}

pub fn is_zero_class(c: &GradedClass) -> bool {
    c.parts().iter().flatten().all(Zero::is_zero)
}
