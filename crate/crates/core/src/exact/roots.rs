use num::{BigInt, Integer, One, Signed};

use super::poly::UniPoly;
use super::rat::{midpoint, Rat, Sign};

/// Real roots of a polynomial inside an open interval.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RootReport {
    pub exact_roots: Vec<Rat>,
    pub irrational_root_intervals: Vec<(Rat, Rat)>,
    pub identically_zero: bool,
}

impl RootReport {
    pub fn count(&self) -> usize {
        self.exact_roots.len() + self.irrational_root_intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }
}

pub fn sign_at(p: &UniPoly, x: &Rat) -> Sign {
    p.sign_at(x)
}

/// Sign of `p` on `(x, x+ε)`.
pub fn sign_right_of(p: &UniPoly, x: &Rat) -> Sign {
    let mut q = p.clone();
    while !q.is_zero() {
        let s = q.sign_at(x);
        if s != Sign::Zero {
            return s;
        }
        q = q.derivative();
    }
    Sign::Zero
}

/// Sign of `p` on `(x-ε, x)`.
pub fn sign_left_of(p: &UniPoly, x: &Rat) -> Sign {
    let mut q = p.clone();
    let mut order = 0usize;
    while !q.is_zero() {
        let s = q.sign_at(x);
        if s != Sign::Zero {
            return if order.is_multiple_of(2) { s } else { s.flip() };
        }
        q = q.derivative();
        order += 1;
    }
    Sign::Zero
}

/// Reports every real root of `p` in the open interval `(lo, hi)`.
///
/// Roots are distinct (multiplicities are discarded).  Rational roots come
/// back exactly; every remaining root gets an isolating interval with
/// rational endpoints that are not roots.
pub fn isolate_roots(p: &UniPoly, lo: &Rat, hi: &Rat) -> RootReport {
    assert!(lo < hi, "isolate_roots needs lo < hi");
    let mut report = RootReport::default();
    if p.is_zero() {
        report.identically_zero = true;
        return report;
    }
    let sqf = p.squarefree().primitive_integer();
    match sqf.degree() {
        Some(0) | None => return report,
        Some(1) => {
            let root = -sqf.coeff(0) / sqf.coeff(1);
            if lo < &root && &root < hi {
                report.exact_roots.push(root);
            }
            return report;
        }
        Some(2) => {
            if let Some(roots) = rational_quadratic_roots(&sqf) {
                report.exact_roots = roots.into_iter().filter(|r| lo < r && r < hi).collect();
                return report;
            }
        }
        _ => {}
    }

    let mut sqf = sqf;
    for end in [lo, hi] {
        if sqf.sign_at(end) == Sign::Zero {
            sqf = deflate(&sqf, end);
        }
    }
    let mut isolator = Isolator { exact: Vec::new(), intervals: Vec::new() };
    isolator.split(sqf, lo.clone(), hi.clone());
    isolator.exact.sort();
    isolator.intervals.sort();
    report.exact_roots = isolator.exact;
    report.irrational_root_intervals = isolator.intervals;
    report
}

/// Both roots when the discriminant is a rational square, `None` otherwise.
/// An empty vector means no real roots.
fn rational_quadratic_roots(p: &UniPoly) -> Option<Vec<Rat>> {
    let (c, b, a) = (p.coeff(0), p.coeff(1), p.coeff(2));
    let disc = &b * &b - Rat::from_integer(4.into()) * &a * &c;
    if disc.is_negative() {
        return Some(Vec::new());
    }
    let root = rational_sqrt(&disc)?;
    let two_a = &a + &a;
    let mut roots = vec![(-&b - &root) / &two_a, (-&b + &root) / &two_a];
    roots.sort();
    roots.dedup();
    Some(roots)
}

fn rational_sqrt(r: &Rat) -> Option<Rat> {
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

fn deflate(p: &UniPoly, root: &Rat) -> UniPoly {
    let factor = UniPoly::linear(-root.clone(), Rat::one(), p.var());
    p.div_rem(&factor).0.primitive_integer()
}

fn sturm_chain(p: &UniPoly) -> Vec<UniPoly> {
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let n = chain.len();
        if chain[n - 1].is_zero() {
            chain.pop();
            break;
        }
        let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
        if r.is_zero() {
            break;
        }
        chain.push(-r);
    }
    chain
}

fn sign_variations(chain: &[UniPoly], x: &Rat) -> usize {
    let signs: Vec<Sign> = chain.iter().map(|q| q.sign_at(x)).filter(|s| *s != Sign::Zero).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

struct Isolator {
    exact: Vec<Rat>,
    intervals: Vec<(Rat, Rat)>,
}

impl Isolator {
    /// `p` is squarefree and does not vanish at `a` or `b`.
    fn split(&mut self, p: UniPoly, a: Rat, b: Rat) {
        if p.degree().unwrap_or(0) == 0 {
            return;
        }
        let chain = sturm_chain(&p);
        let count = sign_variations(&chain, &a) - sign_variations(&chain, &b);
        match count {
            0 => {}
            1 => self.single(&p, a, b),
            _ => {
                let m = midpoint(&a, &b);
                if p.sign_at(&m) == Sign::Zero {
                    self.exact.push(m.clone());
                    let q = deflate(&p, &m);
                    self.split(q.clone(), a, m.clone());
                    self.split(q, m, b);
                } else {
                    self.split(p.clone(), a, m.clone());
                    self.split(p, m, b);
                }
            }
        }
    }

    /// Exactly one root in `(a, b)`, where `p` changes sign.
    fn single(&mut self, p: &UniPoly, mut a: Rat, mut b: Rat) {
        let lead = p.primitive_integer().leading();
        let lead = lead.numer().abs();
        let sa = p.sign_at(&a);
        // A rational root has denominator dividing the leading coefficient,
        // so once the interval is shorter than 1/lead one candidate remains.
        let bound = Rat::new(BigInt::one(), lead.clone());
        while &b - &a >= bound {
            let m = midpoint(&a, &b);
            let sm = p.sign_at(&m);
            if sm == Sign::Zero {
                self.exact.push(m);
                return;
            }
            if sm == sa {
                a = m;
            } else {
                b = m;
            }
        }
        let scaled = &a * Rat::from_integer(lead.clone());
        let numer = scaled.numer().div_floor(scaled.denom()) + BigInt::one();
        let candidate = Rat::new(numer, lead);
        if candidate > a && candidate < b && p.sign_at(&candidate) == Sign::Zero {
            self.exact.push(candidate);
        } else {
            self.intervals.push((a, b));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::{int, rat};

    fn unit() -> (Rat, Rat) {
        (int(0), int(1))
    }

    #[test]
    fn worked_linear_root() {
        let p = UniPoly::new(vec![rat(-1, 3), rat(2, 3)], 't');
        let (lo, hi) = unit();
        let r = isolate_roots(&p, &lo, &hi);
        assert_eq!(r.exact_roots, vec![rat(1, 2)]);
        assert!(!r.identically_zero);
        assert_eq!(sign_at(&p, &rat(1, 4)), Sign::Negative);
        assert_eq!(sign_at(&p, &rat(1, 2)), Sign::Zero);
        assert_eq!(sign_at(&p, &rat(3, 4)), Sign::Positive);
        assert_eq!(sign_right_of(&p, &rat(1, 2)), Sign::Positive);
    }

    #[test]
    fn zero_polynomial_flagged() {
        let (lo, hi) = unit();
        let r = isolate_roots(&UniPoly::zero(), &lo, &hi);
        assert!(r.identically_zero);
        assert_eq!(sign_right_of(&UniPoly::zero(), &lo), Sign::Zero);
    }

    #[test]
    fn sqrt_two_isolated() {
        let p = UniPoly::from_ints(&[-2, 0, 1], 't');
        let r = isolate_roots(&p, &int(1), &int(2));
        assert!(r.exact_roots.is_empty());
        assert_eq!(r.irrational_root_intervals.len(), 1);
        let (a, b) = &r.irrational_root_intervals[0];
        assert!(a * a < int(2) && b * b > int(2));
    }

    #[test]
    fn cubic_with_mixed_roots() {
        // (3t-1)(t^2-1/2), roots 1/3 and 1/sqrt(2) in (0,1)
        let p = &UniPoly::from_ints(&[-1, 3], 't') * &UniPoly::new(vec![rat(-1, 2), int(0), int(1)], 't');
        let r = isolate_roots(&p, &int(0), &int(1));
        assert_eq!(r.exact_roots, vec![rat(1, 3)]);
        assert_eq!(r.irrational_root_intervals.len(), 1);
    }

    #[test]
    fn endpoint_roots_excluded() {
        // t(t-1)(2t-1)
        let p = &(&UniPoly::from_ints(&[0, 1], 't') * &UniPoly::from_ints(&[-1, 1], 't')) * &UniPoly::from_ints(&[-1, 2], 't');
        let r = isolate_roots(&p, &int(0), &int(1));
        assert_eq!(r.exact_roots, vec![rat(1, 2)]);
        assert_eq!(r.count(), 1);
    }

    #[test]
    fn repeated_roots_reported_once() {
        let base = &UniPoly::from_ints(&[-1, 4], 't') * &UniPoly::from_ints(&[-3, 4], 't');
        let p = &(&base * &base) * &UniPoly::from_ints(&[-1, 4], 't');
        let r = isolate_roots(&p, &int(0), &int(1));
        assert_eq!(r.exact_roots, vec![rat(1, 4), rat(3, 4)]);
    }

    #[test]
    fn one_sided_signs() {
        let p = UniPoly::from_ints(&[0, -1, 1], 't');
        assert_eq!(sign_right_of(&p, &int(0)), Sign::Negative);
        assert_eq!(sign_left_of(&p, &int(0)), Sign::Positive);
        let sq = UniPoly::from_ints(&[0, 0, 1], 't');
        assert_eq!(sign_left_of(&sq, &int(0)), Sign::Positive);
        let cube = UniPoly::from_ints(&[0, 0, 0, 1], 't');
        assert_eq!(sign_left_of(&cube, &int(0)), Sign::Negative);
    }
}
