//! Stability parameters and segments, multi-Hilbert polynomials and the
//! comparison, uniformity, openness and equivalence predicates.
//!
//! Every verdict here is relative to an explicit [`SubsheafFamily`].

use std::fmt;

use num::{One, Signed, Zero};

use crate::chow::{DivisorClass, GradedClass, NumericalModel};
use crate::error::{Error, Result};
use crate::exact::{factorial, lex_sign_at, lex_sign_left_of, lex_sign_right_of, LinScalar, Rat, Sign, UniPoly};
use crate::sheaves::{euler_characteristic, hilb_diff, sum_rank, FormalBundleSum, SheafType};

/// One polarisation `L_j` together with its twist `B_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub polarisation: DivisorClass,
    pub twist: FormalBundleSum,
}

/// A one-parameter family of twisted stability parameters whose twist
/// coefficients are affine in `var ∈ [0,1]`.  A segment whose coefficients are
/// all constant doubles as a single stability parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilitySegment {
    pub var: char,
    pub components: Vec<Component>,
}

pub type StabilityParameter = StabilitySegment;

impl StabilitySegment {
    pub fn new(var: char, components: Vec<Component>) -> Self {
        StabilitySegment { var, components }
    }

    /// The untwisted parameter `(L; (1/vol L)·O_X)`.
    pub fn single(model: &NumericalModel, name: &str, l: &DivisorClass) -> Result<Self> {
        let vol = model.volume(l);
        if vol.is_zero() {
            return Err(Error::Precondition(format!("polarisation {l} has zero volume")));
        }
        let twist = FormalBundleSum::trivial(LinScalar::constant(vol.recip()), model.divisor_rank());
        Ok(StabilitySegment {
            var: 't',
            components: vec![Component { name: name.to_string(), polarisation: l.clone(), twist }],
        })
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(|c| c.twist.is_constant())
    }

    /// The parameter at `v`.
    pub fn at(&self, v: &Rat) -> StabilityParameter {
        StabilitySegment {
            var: self.var,
            components: self
                .components
                .iter()
                .map(|c| Component { name: c.name.clone(), polarisation: c.polarisation.clone(), twist: c.twist.at(v) })
                .collect(),
        }
    }

    /// `Σ_j rank(B_j(v))·vol(L_j)` as an affine function of the parameter.
    pub fn normalization(&self, model: &NumericalModel) -> LinScalar {
        self.components
            .iter()
            .fold(LinScalar::constant(Rat::zero()), |acc, c| acc.add(&sum_rank(&c.twist).scale(&model.volume(&c.polarisation))))
            .with_var(self.var)
    }

    /// Normalization identically 1; by linearity the endpoints suffice.
    pub fn is_normalized(&self, model: &NumericalModel) -> bool {
        let n = self.normalization(model);
        n.at0().is_one() && n.at1().is_one()
    }

    /// Coefficients nonnegative on `[0,1]` and not all zero.
    pub fn has_admissible_coefficients(&self) -> bool {
        let nonneg = self.components.iter().all(|c| c.twist.terms.iter().all(|(b, _)| b.nonnegative_on_unit()));
        let positive = |v: Rat| {
            self.components.iter().any(|c| c.twist.terms.iter().any(|(b, _)| b.eval(&v).is_positive()))
        };
        nonneg && positive(Rat::zero()) && positive(Rat::one())
    }

    pub fn require_normalized(&self, model: &NumericalModel) -> Result<()> {
        if self.is_normalized(model) {
            Ok(())
        } else {
            Err(Error::NotNormalized(format!("Σ rank(B_j)·vol(L_j) = {}", self.normalization(model))))
        }
    }
}

impl fmt::Display for StabilitySegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.components.iter().map(|c| format!("{} {}: {}", c.name, c.polarisation, c.twist)).collect();
        write!(f, "[{}] {}", self.var, parts.join("; "))
    }
}

/// `⟨⟨p₁||…||p_d⟩⟩`, the polynomial `Σ p_i k^{d-i}/(d-i)!`, with entries that
/// may depend on the segment parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientVector {
    pub entries: Vec<UniPoly>,
}

impl CoefficientVector {
    pub fn constant(entries: Vec<Rat>) -> Self {
        CoefficientVector { entries: entries.into_iter().map(UniPoly::constant).collect() }
    }

    pub fn at(&self, v: &Rat) -> Vec<Rat> {
        self.entries.iter().map(|p| p.eval(v)).collect()
    }

    pub fn sign_at(&self, v: &Rat) -> Sign {
        lex_sign_at(&self.entries, v)
    }

    pub fn sign_right_of(&self, v: &Rat) -> Sign {
        lex_sign_right_of(&self.entries, v)
    }

    pub fn sign_left_of(&self, v: &Rat) -> Sign {
        lex_sign_left_of(&self.entries, v)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(UniPoly::is_zero)
    }

    pub fn sub(&self, other: &CoefficientVector) -> CoefficientVector {
        CoefficientVector { entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect() }
    }

    /// `Σ p_i k^{d-i}/(d-i)!` at parameter `v`, as a polynomial in `k`.
    pub fn polynomial_at(&self, v: &Rat) -> UniPoly {
        let d = self.entries.len();
        let mut coeffs = vec![Rat::zero(); d];
        for (i, p) in self.entries.iter().enumerate() {
            let power = d - 1 - i;
            coeffs[power] = p.eval(v) / factorial(power);
        }
        UniPoly::new(coeffs, 'k')
    }
}

impl fmt::Display for CoefficientVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|p| p.to_string()).collect();
        write!(f, "⟨⟨{}⟩⟩", parts.join(" || "))
    }
}

/// `P_E^σ(k) = Σ_j χ(E ⊗ L_j^k ⊗ B_j)` for a constant parameter.
pub fn multi_hilbert(model: &NumericalModel, e: &SheafType, sigma: &StabilityParameter) -> Result<UniPoly> {
    if !sigma.is_constant() {
        return Err(Error::Precondition("multi_hilbert needs a constant parameter; use multi_hilbert_segment".into()));
    }
    sigma.components.iter().try_fold(UniPoly::zero().with_var('k'), |acc, c| {
        Ok(&acc + &euler_characteristic(model, e, &c.polarisation, &c.twist)?)
    })
}

/// Coefficients of `k^i` of `P_E^{σ(v)}`, each an affine polynomial in the parameter.
pub fn multi_hilbert_segment(model: &NumericalModel, e: &SheafType, seg: &StabilitySegment) -> Result<Vec<UniPoly>> {
    let p0 = multi_hilbert(model, e, &seg.at(&Rat::zero()))?;
    let p1 = multi_hilbert(model, e, &seg.at(&Rat::one()))?;
    Ok((0..=model.dim())
        .map(|i| LinScalar::through(p0.coeff(i), p1.coeff(i), seg.var).to_poly())
        .collect())
}

/// `α_d = d!·[k^d] P_E^σ`.
pub fn multiplicity(model: &NumericalModel, e: &SheafType, sigma: &StabilityParameter) -> Result<Rat> {
    Ok(multi_hilbert(model, e, sigma)?.coeff(model.dim()) * factorial(model.dim()))
}

fn to_vector(d: usize, coeffs: &[UniPoly], divisor: &Rat) -> CoefficientVector {
    let entries = (1..=d).map(|i| coeffs[d - i].scale(&(factorial(d - i) / divisor))).collect();
    CoefficientVector { entries }
}

/// Reduced multi-Hilbert polynomial `P/α_d`, without its leading `k^d/d!`.
///
/// Normalized segments divide by `rank(E)` and check that it agrees with
/// `α_d`; otherwise `α_d` must be constant along the segment.
pub fn reduced(model: &NumericalModel, e: &SheafType, seg: &StabilitySegment) -> Result<CoefficientVector> {
    let d = model.dim();
    let coeffs = multi_hilbert_segment(model, e, seg)?;
    let alpha = coeffs[d].scale(&factorial(d));
    if alpha.is_zero() {
        return Err(Error::ZeroMultiplicity(e.name.clone()));
    }
    if seg.is_normalized(model) {
        let rank = e.rank();
        if alpha != UniPoly::constant(rank.clone()) {
            return Err(Error::PropertyViolation(format!(
                "multiplicity {alpha} of `{}` differs from its rank {rank} on a normalized segment",
                e.name
            )));
        }
        return Ok(to_vector(d, &coeffs, &rank));
    }
    if !alpha.is_constant() {
        return Err(Error::NotNormalized(format!("multiplicity of `{}` varies along the segment", e.name)));
    }
    Ok(to_vector(d, &coeffs, &alpha.leading()))
}

/// Coefficient vector of `p_F − p_E`.
pub fn difference_vector(
    model: &NumericalModel,
    f: &SheafType,
    e: &SheafType,
    seg: &StabilitySegment,
) -> Result<CoefficientVector> {
    Ok(reduced(model, f, seg)?.sub(&reduced(model, e, seg)?))
}

/// `p_F − p_E` from the Riemann–Roch expansion
/// `h_i = Σ_j Σ_{a+b=i} hilb_a(F,E)·ch_b(B_j)·c₁(L_j)^{d-i}`, valid for
/// normalized segments.  Independent of [`difference_vector`], which goes
/// through the Euler characteristics.
pub fn riemann_roch_difference(
    model: &NumericalModel,
    f: &SheafType,
    e: &SheafType,
    seg: &StabilitySegment,
) -> CoefficientVector {
    let d = model.dim();
    let hilb: Vec<GradedClass> = (0..=d).map(|a| hilb_diff(model, f, e, a)).collect();
    let entry_at = |v: &Rat, i: usize| {
        seg.components.iter().fold(Rat::zero(), |acc, c| {
            let ch = c.twist.ch_at(model, v);
            let l = model.pow(&model.divisor(&c.polarisation), d - i);
            (1..=i).fold(acc, |acc, a| acc + model.integrate(&model.mul_all(&[&hilb[a], &ch.component(i - a), &l])))
        })
    };
    let entries = (1..=d)
        .map(|i| LinScalar::through(entry_at(&Rat::zero(), i), entry_at(&Rat::one(), i), seg.var).to_poly())
        .collect();
    CoefficientVector { entries }
}

/// Sign of `p_F − p_E` at parameter `v`.
pub fn compare(model: &NumericalModel, f: &SheafType, e: &SheafType, seg: &StabilitySegment, v: &Rat) -> Result<Sign> {
    Ok(difference_vector(model, f, e, seg)?.sign_at(v))
}

/// Ambient type plus candidate destabilizing subsheaf types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsheafFamily {
    pub ambient: SheafType,
    pub members: Vec<SheafType>,
}

impl SubsheafFamily {
    pub fn new(ambient: SheafType, members: Vec<SheafType>) -> Self {
        SubsheafFamily { ambient, members }
    }

    fn is_effective(&self, f: &SheafType) -> bool {
        f.rank().is_positive() && f.rank() < self.ambient.rank()
    }

    /// Members with `0 < rank < rank(τ)`; the rest only produce warnings.
    pub fn effective_members(&self) -> impl Iterator<Item = &SheafType> {
        self.members.iter().filter(|f| self.is_effective(f))
    }

    pub fn warnings(&self) -> Vec<String> {
        self.members
            .iter()
            .filter(|f| !self.is_effective(f))
            .map(|f| {
                format!(
                    "member `{}` has rank {} outside (0, {}) and is excluded from verdicts",
                    f.name,
                    f.rank(),
                    self.ambient.rank()
                )
            })
            .collect()
    }
}

/// Difference vectors of every effective family member along one segment.
#[derive(Clone, Debug)]
pub struct FamilyProfile {
    pub vectors: Vec<(String, CoefficientVector)>,
    pub warnings: Vec<String>,
}

impl FamilyProfile {
    pub fn new(model: &NumericalModel, fam: &SubsheafFamily, seg: &StabilitySegment) -> Result<Self> {
        if !fam.ambient.rank().is_positive() {
            return Err(Error::Precondition(format!("ambient type `{}` must have positive rank", fam.ambient.name)));
        }
        let vectors = fam
            .effective_members()
            .map(|f| Ok((f.name.clone(), difference_vector(model, f, &fam.ambient, seg)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(FamilyProfile { vectors, warnings: fam.warnings() })
    }

    pub fn signs_at(&self, v: &Rat) -> Vec<Sign> {
        self.vectors.iter().map(|(_, p)| p.sign_at(v)).collect()
    }

    pub fn verdict_at(&self, v: &Rat) -> Verdict {
        Verdict::from_signs(&self.signs_at(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Stable,
    ProperlySemistable,
    Unstable,
}

impl Verdict {
    pub fn from_signs(signs: &[Sign]) -> Verdict {
        match signs.iter().max() {
            Some(Sign::Positive) => Verdict::Unstable,
            Some(Sign::Zero) => Verdict::ProperlySemistable,
            _ => Verdict::Stable,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::ProperlySemistable => "properly_semistable",
            Verdict::Unstable => "unstable",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Semistability of the ambient type at `v`, relative to the family.
pub fn semistable(model: &NumericalModel, fam: &SubsheafFamily, seg: &StabilitySegment, v: &Rat) -> Result<Verdict> {
    Ok(FamilyProfile::new(model, fam, seg)?.verdict_at(v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UniformityMode {
    /// Every non-constant coefficient of the reduced polynomial is fixed.
    Strict,
    /// Only the parts that can differ between two types are fixed.
    Difference,
}

/// The first coefficient whose dependence on `hilb_q(E)` paired with
/// `basis` varies along the segment.  `entry` indexes `⟨⟨p₁||…||p_d⟩⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformityWitness {
    pub entry: usize,
    pub k_power: usize,
    pub hilb_degree: usize,
    pub basis: String,
    pub slope: Rat,
}

impl fmt::Display for UniformityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k^{}-coefficient (entry {}) varies with slope {} through hilb_{} paired with {}",
            self.k_power, self.entry, self.slope, self.hilb_degree, self.basis
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformityReport {
    pub mode: UniformityMode,
    pub witness: Option<UniformityWitness>,
}

impl UniformityReport {
    pub fn is_uniform(&self) -> bool {
        self.witness.is_none()
    }
}

/// Symbolic uniformity check.  The reduced coefficient of `k^{d-i}/(d-i)!`
/// is `Σ_j Σ_q ∫ hilb_q(E)·ch_{i-q}(B_j(v))·c₁(L_j)^{d-i}` with `hilb_q(E)`
/// a formal unknown (`hilb_0 = 1`); each functional must be constant in `v`.
/// The difference mode skips `q = 0`, which cancels in `p_F − p_E`.
pub fn is_uniform(model: &NumericalModel, seg: &StabilitySegment, mode: UniformityMode) -> Result<UniformityReport> {
    seg.require_normalized(model)?;
    let d = model.dim();
    let first_q = match mode {
        UniformityMode::Strict => 0,
        UniformityMode::Difference => 1,
    };
    let ends: Vec<[GradedClass; 2]> = seg
        .components
        .iter()
        .map(|c| [c.twist.ch_at(model, &Rat::zero()), c.twist.ch_at(model, &Rat::one())])
        .collect();
    let pairing = |end: usize, i: usize, q: usize, basis: &GradedClass| {
        seg.components.iter().zip(&ends).fold(Rat::zero(), |acc, (c, ch)| {
            let ch = ch[end].component(i - q);
            let l = model.pow(&model.divisor(&c.polarisation), d - i);
            acc + model.integrate(&model.mul_all(&[basis, &ch, &l]))
        })
    };
    for i in 1..d {
        for q in first_q..=i {
            for (idx, name) in model.basis()[q].iter().enumerate() {
                let x = model.basis_class(q, idx);
                let slope = pairing(1, i, q, &x) - pairing(0, i, q, &x);
                if !slope.is_zero() {
                    let witness = UniformityWitness {
                        entry: i,
                        k_power: d - i,
                        hilb_degree: q,
                        basis: name.clone(),
                        slope,
                    };
                    return Ok(UniformityReport { mode, witness: Some(witness) });
                }
            }
        }
    }
    Ok(UniformityReport { mode, witness: None })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub witness: Option<String>,
}

/// Openness at both ends: the sign at 0 persists just right of 0 and the
/// sign at 1 persists just left of 1, for every family member.
pub fn is_open(model: &NumericalModel, fam: &SubsheafFamily, seg: &StabilitySegment) -> Result<EquivalenceReport> {
    seg.require_normalized(model)?;
    Ok(profile_is_open(&FamilyProfile::new(model, fam, seg)?))
}

pub fn profile_is_open(profile: &FamilyProfile) -> EquivalenceReport {
    let (zero, one) = (Rat::zero(), Rat::one());
    for (name, p) in &profile.vectors {
        if p.sign_at(&zero) != p.sign_right_of(&zero) {
            return EquivalenceReport { equivalent: false, witness: Some(format!("{name} at 0")) };
        }
        if p.sign_at(&one) != p.sign_left_of(&one) {
            return EquivalenceReport { equivalent: false, witness: Some(format!("{name} at 1")) };
        }
    }
    EquivalenceReport { equivalent: true, witness: None }
}

/// Whether every family member compares the same way at `v1` and `v2`.
pub fn equivalent_at(
    model: &NumericalModel,
    fam: &SubsheafFamily,
    seg: &StabilitySegment,
    v1: &Rat,
    v2: &Rat,
) -> Result<EquivalenceReport> {
    let profile = FamilyProfile::new(model, fam, seg)?;
    for (name, p) in &profile.vectors {
        if p.sign_at(v1) != p.sign_at(v2) {
            return Ok(EquivalenceReport { equivalent: false, witness: Some(name.clone()) });
        }
    }
    Ok(EquivalenceReport { equivalent: true, witness: None })
}
