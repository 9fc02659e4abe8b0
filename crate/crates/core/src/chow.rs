//! Numerical even-cohomology rings with a Todd class.
//!
//! Classes are stored as dense coordinate vectors per degree against the
//! model's named basis.  The degree-0 and degree-d pieces are one-dimensional,
//! and the degree-d generator integrates to 1.

use std::fmt;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{factorial, int, rat, Rat};

/// A homogeneous-or-mixed class: `parts[i]` holds the degree-`i` coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedClass {
    parts: Vec<Vec<Rat>>,
}

impl GradedClass {
    pub fn from_parts(parts: Vec<Vec<Rat>>) -> Self {
        GradedClass { parts }
    }

    pub fn parts(&self) -> &[Vec<Rat>] {
        &self.parts
    }

    pub fn part(&self, degree: usize) -> &[Rat] {
        &self.parts[degree]
    }

    pub fn coeff(&self, degree: usize, index: usize) -> &Rat {
        &self.parts[degree][index]
    }

    pub fn dim(&self) -> usize {
        self.parts.len() - 1
    }

    fn same_shape(&self, other: &GradedClass) -> bool {
        self.parts.len() == other.parts.len() && self.parts.iter().zip(&other.parts).all(|(a, b)| a.len() == b.len())
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().flatten().all(Zero::is_zero)
    }

    pub fn add(&self, other: &GradedClass) -> GradedClass {
        assert!(self.same_shape(other), "adding classes of different models");
        let parts = self
            .parts
            .iter()
            .zip(&other.parts)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        GradedClass { parts }
    }

    pub fn sub(&self, other: &GradedClass) -> GradedClass {
        self.add(&other.scale(&int(-1)))
    }

    pub fn scale(&self, c: &Rat) -> GradedClass {
        GradedClass { parts: self.parts.iter().map(|p| p.iter().map(|x| x * c).collect()).collect() }
    }

    /// Keeps only the degree-`degree` component.
    pub fn component(&self, degree: usize) -> GradedClass {
        let parts = self
            .parts
            .iter()
            .enumerate()
            .map(|(i, p)| if i == degree { p.clone() } else { vec![Rat::zero(); p.len()] })
            .collect();
        GradedClass { parts }
    }

    /// True when all nonzero coordinates sit in degree `degree`.
    pub fn is_pure(&self, degree: usize) -> bool {
        self.parts.iter().enumerate().all(|(i, p)| i == degree || p.iter().all(Zero::is_zero))
    }
}

/// Degree-1 coordinates of a divisor class.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DivisorClass {
    pub coords: Vec<Rat>,
}

impl DivisorClass {
    pub fn new(coords: Vec<Rat>) -> Self {
        DivisorClass { coords }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        DivisorClass { coords: coords.iter().map(|&c| int(c)).collect() }
    }

    pub fn zero(n: usize) -> Self {
        DivisorClass { coords: vec![Rat::zero(); n] }
    }

    pub fn scale(&self, c: &Rat) -> DivisorClass {
        DivisorClass { coords: self.coords.iter().map(|x| x * c).collect() }
    }

    pub fn add(&self, other: &DivisorClass) -> DivisorClass {
        DivisorClass { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() }
    }

    /// `(1-u)·self + u·other`.
    pub fn lerp(&self, other: &DivisorClass, u: &Rat) -> DivisorClass {
        self.scale(&(Rat::one() - u)).add(&other.scale(u))
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "O({})", coords.join(","))
    }
}

/// Structure constants indexed `[p][q][a][b]`, giving degree-`(p+q)` coordinates.
type ProductTable = Vec<Vec<Vec<Vec<Vec<Rat>>>>>;

#[derive(Clone, Debug, PartialEq)]
pub struct NumericalModel {
    pub name: String,
    dim: usize,
    basis: Vec<Vec<String>>,
    table: ProductTable,
    todd: GradedClass,
    point_integral: Rat,
}

/// One structure-constant entry `left · right = result`.
#[derive(Clone, Debug)]
pub struct ProductEntry {
    pub left: (usize, usize),
    pub right: (usize, usize),
    pub result: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Commutativity { left: String, right: String },
    Associativity { a: String, b: String, c: String },
    Identity { element: String },
    Normalization { point_integral: Rat },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Commutativity { left, right } => write!(f, "commutativity fails at ({left},{right})"),
            Violation::Associativity { a, b, c } => write!(f, "associativity fails at ({a},{b},{c})"),
            Violation::Identity { element } => write!(f, "identity law fails for {element}"),
            Violation::Normalization { point_integral } => {
                write!(f, "point class integrates to {point_integral}, expected 1")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModelReport {
    pub violations: Vec<Violation>,
}

impl ModelReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl NumericalModel {
    /// Builds a model from its basis and the listed products of positive-degree
    /// basis elements.  Products of the degree-0 generator are filled in as the
    /// identity, unlisted products default to their listed mirror image, and
    /// anything else is zero.
    pub fn new(
        name: &str,
        basis: Vec<Vec<String>>,
        entries: &[ProductEntry],
        todd: GradedClass,
        point_integral: Rat,
    ) -> Result<Self> {
        if basis.len() < 2 {
            return Err(Error::InvalidModel("dimension must be at least 1".into()));
        }
        let dim = basis.len() - 1;
        if basis[0].len() != 1 || basis[dim].len() != 1 {
            return Err(Error::InvalidModel("degree 0 and top degree must be one-dimensional".into()));
        }
        if basis.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidModel("every degree needs at least one basis element".into()));
        }
        let dims: Vec<usize> = basis.iter().map(Vec::len).collect();
        if todd.parts.len() != dims.len() || todd.parts.iter().zip(&dims).any(|(p, n)| p.len() != *n) {
            return Err(Error::InvalidModel("Todd class does not match the basis".into()));
        }
        let mut table: ProductTable = (0..=dim)
            .map(|p| {
                (0..=dim - p)
                    .map(|q| vec![vec![vec![Rat::zero(); dims[p + q]]; dims[q]]; dims[p]])
                    .collect()
            })
            .collect();
        let mut given = vec![];
        for e in entries {
            let ((p, a), (q, b)) = (e.left, e.right);
            if p == 0 || q == 0 {
                return Err(Error::InvalidModel("products with the degree-0 generator are implicit".into()));
            }
            if p > dim || q > dim || a >= dims[p] || b >= dims[q] {
                return Err(Error::InvalidModel(format!("product entry {:?}·{:?} is out of range", e.left, e.right)));
            }
            if p + q > dim {
                if e.result.iter().any(|c| !c.is_zero()) {
                    return Err(Error::InvalidModel(format!(
                        "product {}·{} exceeds the top degree but is nonzero",
                        basis[p][a], basis[q][b]
                    )));
                }
                continue;
            }
            if e.result.len() != dims[p + q] {
                return Err(Error::InvalidModel(format!(
                    "product {}·{} needs {} coordinates",
                    basis[p][a],
                    basis[q][b],
                    dims[p + q]
                )));
            }
            table[p][q][a][b] = e.result.clone();
            given.push((e.left, e.right));
        }
        for e in entries {
            let ((p, a), (q, b)) = (e.left, e.right);
            if p + q <= dim && !given.contains(&((q, b), (p, a))) {
                table[q][p][b][a] = e.result.clone();
            }
        }
        for p in 0..=dim {
            for a in 0..dims[p] {
                let mut unit = vec![Rat::zero(); dims[p]];
                unit[a] = Rat::one();
                table[0][p][0][a] = unit.clone();
                table[p][0][a][0] = unit;
            }
        }
        Ok(NumericalModel { name: name.to_string(), dim, basis, table, todd, point_integral })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Vec<String>] {
        &self.basis
    }

    pub fn todd(&self) -> &GradedClass {
        &self.todd
    }

    pub fn point_integral(&self) -> &Rat {
        &self.point_integral
    }

    pub fn divisor_rank(&self) -> usize {
        self.basis[1].len()
    }

    pub fn find(&self, name: &str) -> Option<(usize, usize)> {
        self.basis
            .iter()
            .enumerate()
            .find_map(|(p, names)| names.iter().position(|n| n == name).map(|a| (p, a)))
    }

    pub fn zero(&self) -> GradedClass {
        GradedClass { parts: self.basis.iter().map(|b| vec![Rat::zero(); b.len()]).collect() }
    }

    pub fn one(&self) -> GradedClass {
        self.scalar(Rat::one())
    }

    pub fn scalar(&self, c: Rat) -> GradedClass {
        let mut z = self.zero();
        z.parts[0][0] = c;
        z
    }

    pub fn basis_class(&self, degree: usize, index: usize) -> GradedClass {
        let mut z = self.zero();
        z.parts[degree][index] = Rat::one();
        z
    }

    pub fn point(&self) -> GradedClass {
        self.basis_class(self.dim, 0)
    }

    pub fn divisor(&self, d: &DivisorClass) -> GradedClass {
        assert_eq!(d.coords.len(), self.divisor_rank(), "divisor has the wrong number of coordinates");
        let mut z = self.zero();
        z.parts[1] = d.coords.clone();
        z
    }

    /// Degree-1 part of a class as a divisor.
    pub fn divisor_of(&self, c: &GradedClass) -> DivisorClass {
        DivisorClass::new(c.parts[1].clone())
    }

    pub fn owns(&self, c: &GradedClass) -> bool {
        c.parts.len() == self.basis.len() && c.parts.iter().zip(&self.basis).all(|(p, b)| p.len() == b.len())
    }

    /// Graded product; components above the top degree are dropped.
    pub fn multiply(&self, a: &GradedClass, b: &GradedClass) -> Result<GradedClass> {
        if !self.owns(a) || !self.owns(b) {
            return Err(Error::ModelMismatch);
        }
        Ok(self.mul(a, b))
    }

    /// Unchecked product for classes known to belong to this model.
    pub fn mul(&self, a: &GradedClass, b: &GradedClass) -> GradedClass {
        let mut out = self.zero();
        for (p, ap) in a.parts.iter().enumerate() {
            for (i, x) in ap.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (q, bq) in b.parts.iter().enumerate().take(self.dim - p + 1) {
                    for (j, y) in bq.iter().enumerate() {
                        if y.is_zero() {
                            continue;
                        }
                        let xy = x * y;
                        for (slot, c) in out.parts[p + q].iter_mut().zip(&self.table[p][q][i][j]) {
                            if !c.is_zero() {
                                *slot += &xy * c;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn mul_all(&self, factors: &[&GradedClass]) -> GradedClass {
        factors.iter().fold(self.one(), |acc, f| self.mul(&acc, f))
    }

    pub fn pow(&self, a: &GradedClass, n: usize) -> GradedClass {
        (0..n).fold(self.one(), |acc, _| self.mul(&acc, a))
    }

    /// Coefficient of the point class.
    pub fn integrate(&self, a: &GradedClass) -> Rat {
        &a.parts[self.dim][0] * &self.point_integral
    }

    /// `∫ a·b`
    pub fn pairing(&self, a: &GradedClass, b: &GradedClass) -> Rat {
        self.integrate(&self.mul(a, b))
    }

    pub fn volume(&self, l: &DivisorClass) -> Rat {
        self.integrate(&self.pow(&self.divisor(l), self.dim))
    }

    /// Coefficients of `k^i` in `exp(k·c₁(L))`, for `i = 0..=d`.
    pub fn exp_divisor(&self, l: &DivisorClass) -> Vec<GradedClass> {
        let c1 = self.divisor(l);
        let mut power = self.one();
        let mut out = Vec::with_capacity(self.dim + 1);
        for i in 0..=self.dim {
            out.push(power.scale(&factorial(i).recip()));
            power = self.mul(&power, &c1);
        }
        out
    }

    /// Chern character `exp(c₁)` of a line bundle.
    pub fn exp_class(&self, c1: &DivisorClass) -> GradedClass {
        self.exp_divisor(c1).iter().fold(self.zero(), |acc, c| acc.add(c))
    }

    fn basis_name(&self, (p, a): (usize, usize)) -> String {
        self.basis[p][a].clone()
    }

    fn all_basis(&self) -> Vec<(usize, usize)> {
        (0..=self.dim).flat_map(|p| (0..self.basis[p].len()).map(move |a| (p, a))).collect()
    }

    pub fn validate(&self) -> ModelReport {
        validate_model(self)
    }
}

/// Checks commutativity, associativity, the identity law and point
/// normalization on every basis pair/triple.
pub fn validate_model(m: &NumericalModel) -> ModelReport {
    let mut report = ModelReport::default();
    let elems = m.all_basis();
    let class = |(p, a): (usize, usize)| m.basis_class(p, a);
    for (i, &x) in elems.iter().enumerate() {
        let one_x = m.mul(&m.one(), &class(x));
        let x_one = m.mul(&class(x), &m.one());
        if one_x != class(x) || x_one != class(x) {
            report.violations.push(Violation::Identity { element: m.basis_name(x) });
        }
        for &y in &elems[i + 1..] {
            if m.mul(&class(x), &class(y)) != m.mul(&class(y), &class(x)) {
                report.violations.push(Violation::Commutativity { left: m.basis_name(x), right: m.basis_name(y) });
            }
        }
    }
    for &x in &elems {
        for &y in &elems {
            for &z in &elems {
                if x.0 + y.0 + z.0 > m.dim || x.0 == 0 || y.0 == 0 || z.0 == 0 {
                    continue;
                }
                let left = m.mul(&m.mul(&class(x), &class(y)), &class(z));
                let right = m.mul(&class(x), &m.mul(&class(y), &class(z)));
                if left != right {
                    report.violations.push(Violation::Associativity {
                        a: m.basis_name(x),
                        b: m.basis_name(y),
                        c: m.basis_name(z),
                    });
                }
            }
        }
    }
    if !m.point_integral.is_one() {
        report.violations.push(Violation::Normalization { point_integral: m.point_integral.clone() });
    }
    report
}

fn names(groups: &[&[&str]]) -> Vec<Vec<String>> {
    groups.iter().map(|g| g.iter().map(|s| s.to_string()).collect()).collect()
}

fn entry(left: (usize, usize), right: (usize, usize), result: &[Rat]) -> ProductEntry {
    ProductEntry { left, right, result: result.to_vec() }
}

/// `P²` with hyperplane class `h`.
pub fn p2() -> NumericalModel {
    let basis = names(&[&["1"], &["h"], &["pt"]]);
    let one = Rat::one();
    let entries = [entry((1, 0), (1, 0), std::slice::from_ref(&one))];
    let todd = GradedClass::from_parts(vec![vec![int(1)], vec![rat(3, 2)], vec![int(1)]]);
    NumericalModel::new("p2", basis, &entries, todd, one).expect("built-in model")
}

/// `P¹×P¹` with rulings `h1`, `h2`.
pub fn p1p1() -> NumericalModel {
    let basis = names(&[&["1"], &["h1", "h2"], &["pt"]]);
    let (o, z) = (Rat::one(), Rat::zero());
    let entries = [
        entry((1, 0), (1, 0), std::slice::from_ref(&z)),
        entry((1, 0), (1, 1), std::slice::from_ref(&o)),
        entry((1, 1), (1, 1), &[z]),
    ];
    let todd = GradedClass::from_parts(vec![vec![int(1)], vec![int(1), int(1)], vec![int(1)]]);
    NumericalModel::new("p1p1", basis, &entries, todd, o).expect("built-in model")
}

/// `P¹×P²` with pullbacks `h1`, `h2` of the hyperplane classes.
pub fn p1p2() -> NumericalModel {
    let basis = names(&[&["1"], &["h1", "h2"], &["h1h2", "h2^2"], &["pt"]]);
    let (o, z) = (Rat::one(), Rat::zero());
    let entries = [
        entry((1, 0), (1, 0), &[z.clone(), z.clone()]),
        entry((1, 0), (1, 1), &[o.clone(), z.clone()]),
        entry((1, 1), (1, 1), &[z.clone(), o.clone()]),
        entry((1, 0), (2, 0), std::slice::from_ref(&z)),
        entry((1, 0), (2, 1), std::slice::from_ref(&o)),
        entry((1, 1), (2, 0), std::slice::from_ref(&o)),
        entry((1, 1), (2, 1), &[z]),
    ];
    let todd = GradedClass::from_parts(vec![
        vec![int(1)],
        vec![int(1), rat(3, 2)],
        vec![rat(3, 2), int(1)],
        vec![int(1)],
    ]);
    NumericalModel::new("p1p2", basis, &entries, todd, o).expect("built-in model")
}

pub fn builtin(name: &str) -> Option<NumericalModel> {
    match name {
        "p2" => Some(p2()),
        "p1p1" => Some(p1p1()),
        "p1p2" => Some(p1p2()),
        _ => None,
    }
}
