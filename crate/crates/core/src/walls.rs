//! Gieseker walls in the ample cone and multi-Gieseker walls on segments.

use std::fmt;

use num::{One, Zero};

use crate::chow::{DivisorClass, GradedClass, NumericalModel};
use crate::error::{Error, Result};
use crate::exact::{factorial, int, isolate_roots, midpoint, Rat, RootReport, Sign, UniPoly};
use crate::sheaves::{hilb_diff, SheafType};
use crate::stability::{difference_vector, FamilyProfile, StabilitySegment, SubsheafFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WallKind {
    /// `β` never vanishes.
    Empty,
    /// `β` vanishes on every polarisation.
    Everything,
    Nontrivial,
}

impl WallKind {
    pub fn is_trivial(self) -> bool {
        self != WallKind::Nontrivial
    }
}

/// `L ↦ β_{F,i}^L = ∫ hilb_i(F,τ)·c₁(L)^{d-i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallFunction {
    pub subsheaf: String,
    pub index: usize,
    pub form: GradedClass,
}

impl WallFunction {
    pub fn new(model: &NumericalModel, f: &SheafType, tau: &SheafType, index: usize) -> Self {
        WallFunction { subsheaf: f.name.clone(), index, form: hilb_diff(model, f, tau, index) }
    }

    pub fn eval(&self, model: &NumericalModel, l: &DivisorClass) -> Rat {
        let power = model.pow(&model.divisor(l), model.dim() - self.index);
        model.pairing(&self.form, &power)
    }

    /// Decided symbolically: the form is paired against every product of
    /// `d-i` divisor basis elements.
    pub fn kind(&self, model: &NumericalModel) -> WallKind {
        let d = model.dim();
        let n = model.divisor_rank();
        let mut monomials = vec![model.one()];
        for _ in self.index..d {
            monomials = monomials
                .iter()
                .flat_map(|m| (0..n).map(move |a| (m.clone(), a)))
                .map(|(m, a)| model.mul(&m, &model.basis_class(1, a)))
                .collect();
        }
        let vanishes = monomials.iter().all(|m| model.pairing(&self.form, m).is_zero());
        match (vanishes, self.index == d) {
            (true, _) => WallKind::Everything,
            (false, true) => WallKind::Empty,
            (false, false) => WallKind::Nontrivial,
        }
    }

    /// `u ↦ β((1-u)L₀ + uL₁)`, a polynomial of degree at most `d-i`.
    pub fn on_line(&self, model: &NumericalModel, l0: &DivisorClass, l1: &DivisorClass) -> UniPoly {
        let n = model.dim() - self.index;
        let (a, b) = (model.divisor(l0), model.divisor(l1));
        let one_minus = UniPoly::from_ints(&[1, -1], 'u');
        let u = UniPoly::from_ints(&[0, 1], 'u');
        (0..=n).fold(UniPoly::zero().with_var('u'), |acc, k| {
            let class = model.mul(&model.pow(&a, n - k), &model.pow(&b, k));
            let c = model.pairing(&self.form, &class) * binomial(n, k);
            let basis = &pow_poly(&one_minus, n - k) * &pow_poly(&u, k);
            &acc + &basis.scale(&c)
        })
    }
}

fn binomial(n: usize, k: usize) -> Rat {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn pow_poly(p: &UniPoly, n: usize) -> UniPoly {
    (0..n).fold(UniPoly::constant(Rat::one()).with_var(p.var()), |acc, _| &acc * p)
}

/// `(β₁, …, β_d)` for the polarisation `L`, read off the reduced Hilbert
/// polynomials of the single-bundle parameter `(L; (1/vol L)·O_X)`.
pub fn beta(model: &NumericalModel, f: &SheafType, tau: &SheafType, l: &DivisorClass) -> Result<Vec<Rat>> {
    let sigma = StabilitySegment::single(model, "L", l)?;
    let vol = model.volume(l);
    let diff = difference_vector(model, f, tau, &sigma)?;
    Ok(diff.at(&Rat::zero()).into_iter().map(|x| x * &vol).collect())
}

pub fn walls_on_ample_line(
    model: &NumericalModel,
    f: &SheafType,
    tau: &SheafType,
    l0: &DivisorClass,
    l1: &DivisorClass,
    index: usize,
) -> RootReport {
    let w = WallFunction::new(model, f, tau, index);
    isolate_roots(&w.on_line(model, l0, l1), &Rat::zero(), &Rat::one())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Separation {
    NoWall,
    SingleFirstKind,
    Other(String),
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Separation::NoWall => f.write_str("no_wall"),
            Separation::SingleFirstKind => f.write_str("single_first_kind"),
            Separation::Other(why) => write!(f, "other({why})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationReport {
    pub verdict: Separation,
    /// Distinct wall crossings in `(0,1)` for each index `i = 1..d-1`.
    pub crossings: Vec<usize>,
}

/// Counts the nontrivial walls met by the open segment `(L₀, L₁)`, merging
/// crossings at the same rational point.
pub fn classify_separation(
    model: &NumericalModel,
    fam: &SubsheafFamily,
    l0: &DivisorClass,
    l1: &DivisorClass,
) -> SeparationReport {
    let d = model.dim();
    let mut crossings = Vec::new();
    let mut endpoint_hits = Vec::new();
    for i in 1..d {
        let mut exact: Vec<Rat> = Vec::new();
        let mut irrational = 0;
        for f in fam.effective_members() {
            let w = WallFunction::new(model, f, &fam.ambient, i);
            if w.kind(model).is_trivial() {
                continue;
            }
            for (end, l) in [("L0", l0), ("L1", l1)] {
                if w.eval(model, l).is_zero() {
                    endpoint_hits.push(format!("{end} lies on W({}, {i})", f.name));
                }
            }
            let roots = isolate_roots(&w.on_line(model, l0, l1), &Rat::zero(), &Rat::one());
            exact.extend(roots.exact_roots);
            irrational += roots.irrational_root_intervals.len();
        }
        exact.sort();
        exact.dedup();
        crossings.push(exact.len() + irrational);
    }
    let verdict = if !endpoint_hits.is_empty() {
        Separation::Other(endpoint_hits.join("; "))
    } else if crossings.iter().all(|&c| c == 0) {
        Separation::NoWall
    } else if crossings[0] == 1 && crossings[1..].iter().all(|&c| c == 0) {
        Separation::SingleFirstKind
    } else {
        let parts: Vec<String> = crossings.iter().enumerate().map(|(i, c)| format!("index {}: {c}", i + 1)).collect();
        Separation::Other(format!("crossings {}", parts.join(", ")))
    };
    SeparationReport { verdict, crossings }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralityReport {
    pub general: bool,
    pub witness: Option<(String, usize)>,
}

/// `L` avoids every nontrivial wall with index `1..d-1`.
pub fn is_general(model: &NumericalModel, l: &DivisorClass, fam: &SubsheafFamily) -> GeneralityReport {
    for f in fam.effective_members() {
        for i in 1..model.dim() {
            let w = WallFunction::new(model, f, &fam.ambient, i);
            if w.kind(model) == WallKind::Nontrivial && w.eval(model, l).is_zero() {
                return GeneralityReport { general: false, witness: Some((f.name.clone(), i)) };
            }
        }
    }
    GeneralityReport { general: true, witness: None }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipEntry {
    pub member: String,
    pub index: usize,
    pub sign: Sign,
    pub kind: WallKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipReport {
    pub entries: Vec<MembershipEntry>,
}

impl MembershipReport {
    pub fn admissible(&self) -> bool {
        self.entries.iter().all(|e| e.kind.is_trivial() || e.sign != Sign::Zero)
    }
}

/// Sign of `β_{F,i}(ω)` for every member and `i = 2..d-1`.
pub fn second_kind_membership(model: &NumericalModel, omega: &DivisorClass, fam: &SubsheafFamily) -> MembershipReport {
    let mut entries = Vec::new();
    for f in fam.effective_members() {
        for i in 2..model.dim() {
            let w = WallFunction::new(model, f, &fam.ambient, i);
            entries.push(MembershipEntry {
                member: f.name.clone(),
                index: i,
                sign: Sign::of(&w.eval(model, omega)),
                kind: w.kind(model),
            });
        }
    }
    MembershipReport { entries }
}

/// A wall point with every `(member, entry index)` that vanishes there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub at: Rat,
    pub tags: Vec<(String, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChamberDecomposition {
    pub walls: Vec<Wall>,
    pub chambers: Vec<(Rat, Rat)>,
    pub representatives: Vec<Rat>,
}

impl ChamberDecomposition {
    pub fn from_walls(walls: Vec<Wall>) -> Self {
        let mut cuts = vec![Rat::zero()];
        cuts.extend(walls.iter().map(|w| w.at.clone()));
        cuts.push(Rat::one());
        let chambers: Vec<(Rat, Rat)> = cuts.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        let representatives = chambers.iter().map(|(a, b)| midpoint(a, b)).collect();
        ChamberDecomposition { walls, chambers, representatives }
    }

    pub fn wall_points(&self) -> Vec<Rat> {
        self.walls.iter().map(|w| w.at.clone()).collect()
    }

    /// Index of the chamber containing `v`, if `v` is not a wall or an endpoint.
    pub fn chamber_of(&self, v: &Rat) -> Option<usize> {
        self.chambers.iter().position(|(a, b)| a < v && v < b)
    }
}

/// Roots in `(0,1)` of every non-identically-zero entry of every member's
/// difference vector, merged and sorted.
pub fn segment_walls(model: &NumericalModel, seg: &StabilitySegment, fam: &SubsheafFamily) -> Result<ChamberDecomposition> {
    seg.require_normalized(model)?;
    let profile = FamilyProfile::new(model, fam, seg)?;
    profile_walls(&profile)
}

pub fn profile_walls(profile: &FamilyProfile) -> Result<ChamberDecomposition> {
    let mut walls: Vec<Wall> = Vec::new();
    for (name, vector) in &profile.vectors {
        for (i, p) in vector.entries.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let roots = isolate_roots(p, &Rat::zero(), &Rat::one());
            if let Some((lo, hi)) = roots.irrational_root_intervals.first() {
                return Err(Error::IrrationalWall { tag: format!("({name}, {})", i + 1), lo: lo.clone(), hi: hi.clone() });
            }
            for r in roots.exact_roots {
                let tag = (name.clone(), i + 1);
                match walls.iter_mut().find(|w| w.at == r) {
                    Some(w) => w.tags.push(tag),
                    None => walls.push(Wall { at: r, tags: vec![tag] }),
                }
            }
        }
    }
    walls.sort_by(|a, b| a.at.cmp(&b.at));
    Ok(ChamberDecomposition::from_walls(walls))
}

pub const NUDGE_DEPTH: usize = 16;

/// Moves `start` halfway towards `wall` until `generic` accepts it.
/// Returns the accepted point and whether it moved.
pub fn nudge_toward(start: &Rat, wall: &Rat, generic: impl Fn(&Rat) -> bool) -> Result<(Rat, bool)> {
    let mut x = start.clone();
    for depth in 0..=NUDGE_DEPTH {
        if generic(&x) {
            return Ok((x, depth > 0));
        }
        x = midpoint(&x, wall);
    }
    Err(Error::NudgeDepthExceeded { wall: wall.clone() })
}

/// Plot samples of `u ↦ β_{F,i}` on a line, `steps + 1` equally spaced points.
pub fn sample_line(
    model: &NumericalModel,
    w: &WallFunction,
    l0: &DivisorClass,
    l1: &DivisorClass,
    steps: usize,
) -> Vec<(Rat, Rat)> {
    let p = w.on_line(model, l0, l1);
    (0..=steps)
        .map(|s| {
            let u = int(s as i64) / int(steps as i64);
            let y = p.eval(&u);
            (u, y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chow::p1p2;
    use crate::exact::rat;
    use crate::stability::{Component, SubsheafFamily};
    use crate::sheaves::FormalBundleSum;
    use crate::exact::LinScalar;

    fn worked(model: &NumericalModel) -> SubsheafFamily {
        let f = SheafType::with_rank_c1(model, "F", int(1), &DivisorClass::from_ints(&[3, -2]));
        let e = SheafType::with_rank_c1(model, "E", int(2), &DivisorClass::zero(2));
        SubsheafFamily::new(e, vec![f])
    }

    fn l(c: &[i64]) -> DivisorClass {
        DivisorClass::from_ints(c)
    }

    #[test]
    fn worked_betas() {
        let m = p1p2();
        let fam = worked(&m);
        let f = &fam.members[0];
        let b0 = beta(&m, f, &fam.ambient, &l(&[1, 1])).unwrap();
        let b1 = beta(&m, f, &fam.ambient, &l(&[1, 2])).unwrap();
        assert_eq!(b0, vec![int(-1), rat(-1, 2), int(0)]);
        assert_eq!(b1, vec![int(4), int(2), int(0)]);
        for (i, b) in b0.iter().enumerate() {
            assert_eq!(&WallFunction::new(&m, f, &fam.ambient, i + 1).eval(&m, &l(&[1, 1])), b);
        }
    }

    #[test]
    fn worked_line_walls() {
        let m = p1p2();
        let fam = worked(&m);
        let f = &fam.members[0];
        let r1 = walls_on_ample_line(&m, f, &fam.ambient, &l(&[1, 1]), &l(&[1, 2]), 1);
        assert_eq!(r1.exact_roots, vec![rat(1, 3)]);
        let r2 = walls_on_ample_line(&m, f, &fam.ambient, &l(&[1, 1]), &l(&[1, 2]), 2);
        assert_eq!(r2.exact_roots, vec![rat(1, 5)]);
        let r3 = walls_on_ample_line(&m, f, &fam.ambient, &l(&[1, 1]), &l(&[1, 2]), 3);
        assert!(r3.identically_zero);
        let report = classify_separation(&m, &fam, &l(&[1, 1]), &l(&[1, 2]));
        assert_eq!(report.crossings, vec![1, 1]);
        assert!(matches!(report.verdict, Separation::Other(_)));
    }

    #[test]
    fn wall_kinds() {
        let m = p1p2();
        let fam = worked(&m);
        let f = &fam.members[0];
        assert_eq!(WallFunction::new(&m, f, &fam.ambient, 1).kind(&m), WallKind::Nontrivial);
        assert_eq!(WallFunction::new(&m, f, &fam.ambient, 3).kind(&m), WallKind::Everything);
        let g = SheafType::with_rank_c1(&m, "G", int(1), &DivisorClass::zero(2));
        let mut ch = g.ch.clone();
        ch = ch.add(&m.point());
        let g = SheafType::new("G", ch);
        assert_eq!(WallFunction::new(&m, &g, &fam.ambient, 3).kind(&m), WallKind::Empty);
    }

    #[test]
    fn generality_and_membership() {
        let m = p1p2();
        let fam = worked(&m);
        assert!(is_general(&m, &l(&[1, 1]), &fam).general);
        let on_wall = l(&[1, 1]).lerp(&l(&[1, 2]), &rat(1, 3));
        let g = is_general(&m, &on_wall, &fam);
        assert_eq!(g.witness, Some(("F".to_string(), 1)));
        let report = second_kind_membership(&m, &l(&[1, 1]), &fam);
        assert_eq!(report.entries[0].sign, Sign::Negative);
        assert!(report.admissible());
        let empty = SubsheafFamily::new(fam.ambient.clone(), vec![]);
        assert!(is_general(&m, &on_wall, &empty).general);
        assert_eq!(classify_separation(&m, &empty, &l(&[1, 1]), &l(&[1, 2])).verdict, Separation::NoWall);
    }

    #[test]
    fn worked_segment_chambers() {
        let m = p1p2();
        let fam = worked(&m);
        let comp = |name: &str, c: &[i64], s: LinScalar| Component {
            name: name.into(),
            polarisation: l(c),
            twist: FormalBundleSum::trivial(s, 2),
        };
        let seg = StabilitySegment::new(
            't',
            vec![
                comp("L0", &[1, 1], LinScalar::through(rat(1, 3), int(0), 't')),
                comp("L1", &[1, 2], LinScalar::through(int(0), rat(1, 12), 't')),
            ],
        );
        let ch = segment_walls(&m, &seg, &fam).unwrap();
        assert_eq!(ch.wall_points(), vec![rat(1, 2)]);
        assert_eq!(ch.walls[0].tags.len(), 2);
        assert_eq!(ch.representatives, vec![rat(1, 4), rat(3, 4)]);
        assert_eq!(ch.chamber_of(&rat(1, 3)), Some(0));
        assert_eq!(ch.chamber_of(&rat(1, 2)), None);
    }

    #[test]
    fn nudging() {
        let (x, moved) = nudge_toward(&rat(1, 4), &rat(1, 2), |x| x != &rat(1, 4)).unwrap();
        assert_eq!((x, moved), (rat(3, 8), true));
        assert!(nudge_toward(&rat(1, 4), &rat(1, 2), |_| false).is_err());
    }
}
