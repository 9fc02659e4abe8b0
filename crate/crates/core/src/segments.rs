//! The σ, η and ζ segments of the zooming construction on threefolds, the
//! zero-`c₁` twist builders, and the searches for `a` and `b`.

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};

use crate::chow::{DivisorClass, NumericalModel};
use crate::error::{Error, Result};
use crate::exact::{int, LinScalar, Rat, UniPoly};
use crate::sheaves::{hilb_diff, sum_ch2, sum_rank, tensor_sum, FormalBundleSum, LineBundle, SheafType};
use crate::stability::{
    difference_vector, is_uniform, profile_is_open, CoefficientVector, Component, FamilyProfile, StabilitySegment,
    SubsheafFamily, UniformityMode,
};
use crate::walls::ChamberDecomposition;

pub const SEARCH_CAP_EXPONENT: u32 = 20;

const NAMES: [&str; 2] = ["L0", "L1"];

/// `σ(t) = (L₀, L₁; (1-t)/vol L₀, t/vol L₁)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaSegment {
    pub polarisations: [DivisorClass; 2],
    pub weights: [LinScalar; 2],
    /// `c[j][k] = ∫ c₁(L_j)·c₁(L_k)²`, threefolds only.
    pub pairing: Option<[[Rat; 2]; 2]>,
    /// Indices `k` with `c[0][k] = c[1][k]`.
    pub gen_violations: Vec<usize>,
    pub segment: StabilitySegment,
}

impl SigmaSegment {
    pub fn sigma(&self, j: usize, t: &Rat) -> Rat {
        self.weights[j].eval(t)
    }

    pub fn satisfies_gen(&self) -> bool {
        self.gen_violations.is_empty()
    }
}

pub fn make_sigma(model: &NumericalModel, l0: &DivisorClass, l1: &DivisorClass) -> Result<SigmaSegment> {
    let vols = [model.volume(l0), model.volume(l1)];
    for (j, v) in vols.iter().enumerate() {
        if !v.is_positive() {
            return Err(Error::Precondition(format!("vol({}) = {v} is not positive", NAMES[j])));
        }
    }
    let weights = [
        LinScalar::through(vols[0].recip(), Rat::zero(), 't'),
        LinScalar::through(Rat::zero(), vols[1].recip(), 't'),
    ];
    let polarisations = [l0.clone(), l1.clone()];
    let components = (0..2)
        .map(|j| Component {
            name: NAMES[j].into(),
            polarisation: polarisations[j].clone(),
            twist: FormalBundleSum::trivial(weights[j].clone(), model.divisor_rank()),
        })
        .collect();
    let (pairing, gen_violations) = if model.dim() == 3 {
        let c = pairing_matrix(model, &polarisations);
        let bad = (0..2).filter(|&k| c[0][k] == c[1][k]).collect();
        (Some(c), bad)
    } else {
        (None, Vec::new())
    };
    Ok(SigmaSegment { polarisations, weights, pairing, gen_violations, segment: StabilitySegment::new('t', components) })
}

fn pairing_matrix(model: &NumericalModel, l: &[DivisorClass; 2]) -> [[Rat; 2]; 2] {
    let cls = [model.divisor(&l[0]), model.divisor(&l[1])];
    let c = |j: usize, k: usize| model.integrate(&model.mul_all(&[&cls[j], &cls[k], &cls[k]]));
    [[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]]
}

fn check_order(what: &str, lo: &Rat, mid: &Rat, hi: &Rat) -> Result<()> {
    if Rat::zero() < *lo && lo < mid && mid < hi && *hi < Rat::one() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{what}: need 0 < {lo} < {mid} < {hi} < 1")))
    }
}

/// Least `a` with every `a·σ_j(t_i)/σ_j(t̄)` a positive integer.
pub fn minimal_divisibility_a(sigma: &SigmaSegment, t_bar: &Rat, t0: &Rat, t1: &Rat) -> Result<u64> {
    check_order("flanks", t0, t_bar, t1)?;
    let mut a = BigInt::one();
    for j in 0..2 {
        for t in [t0, t1] {
            let ratio = sigma.sigma(j, t) / sigma.sigma(j, t_bar);
            a = a.lcm(ratio.denom());
        }
    }
    a.to_u64().ok_or_else(|| Error::Precondition(format!("divisibility modulus {a} too large")))
}

/// `B_j(s) = σ_j(t̄)(s·L_j^{aσ_j(t₁)/σ_j(t̄)} + (1-s)·L_j^{aσ_j(t₀)/σ_j(t̄)})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaSegment {
    pub sigma: SigmaSegment,
    pub t_bar: Rat,
    pub t0: Rat,
    pub t1: Rat,
    pub a: u64,
    /// `exponents[j][i] = a·σ_j(t_i)/σ_j(t̄)`.
    pub exponents: [[i64; 2]; 2],
    pub segment: StabilitySegment,
}

impl EtaSegment {
    pub fn rank(&self, j: usize) -> Rat {
        self.sigma.sigma(j, &self.t_bar)
    }

    /// `t_s = s·t₁ + (1-s)·t₀`.
    pub fn t_of(&self, s: &Rat) -> Rat {
        &self.t0 + s * (&self.t1 - &self.t0)
    }
}

/// Flanks must sit in the chambers on either side of `t̄`.
pub fn check_flanks(walls: &ChamberDecomposition, t_bar: &Rat, t0: &Rat, t1: &Rat) -> Result<()> {
    for w in walls.wall_points() {
        if t0 <= &w && &w < t_bar {
            return Err(Error::FlankMisplaced { wall: t_bar.clone(), flank: t0.clone() });
        }
        if t_bar < &w && &w <= t1 {
            return Err(Error::FlankMisplaced { wall: t_bar.clone(), flank: t1.clone() });
        }
    }
    Ok(())
}

pub fn make_eta(
    model: &NumericalModel,
    sigma: &SigmaSegment,
    walls: &ChamberDecomposition,
    t_bar: &Rat,
    t0: &Rat,
    t1: &Rat,
    a: u64,
) -> Result<EtaSegment> {
    check_order("flanks", t0, t_bar, t1)?;
    check_flanks(walls, t_bar, t0, t1)?;
    let mut exponents = [[0i64; 2]; 2];
    for (j, row) in exponents.iter_mut().enumerate() {
        for (i, t) in [t0, t1].into_iter().enumerate() {
            let e = int(a as i64) * sigma.sigma(j, t) / sigma.sigma(j, t_bar);
            if !e.is_integer() || !e.is_positive() {
                return Err(Error::Divisibility { a, exponent: e });
            }
            row[i] = e.to_integer().to_i64().ok_or(Error::Divisibility { a, exponent: e.clone() })?;
        }
    }
    let components = (0..2)
        .map(|j| {
            let r = sigma.sigma(j, t_bar);
            let l = &sigma.polarisations[j];
            let twist = FormalBundleSum::new(vec![
                (LinScalar::new(r.clone(), -r.clone(), 's'), LineBundle::power_of(NAMES[j], l, exponents[j][0])),
                (LinScalar::new(Rat::zero(), r, 's'), LineBundle::power_of(NAMES[j], l, exponents[j][1])),
            ]);
            Component { name: NAMES[j].into(), polarisation: l.clone(), twist }
        })
        .collect();
    let eta = EtaSegment {
        sigma: sigma.clone(),
        t_bar: t_bar.clone(),
        t0: t0.clone(),
        t1: t1.clone(),
        a,
        exponents,
        segment: StabilitySegment::new('s', components),
    };
    eta.segment.require_normalized(model)?;
    check_eta_chern(model, &eta)?;
    Ok(eta)
}

/// Ranks, `c₁` and `ch₂` of `B_j(s)` at `s = 0, 1` against the closed forms
/// `σ_j(t̄)`, `a·σ_j(t_s)·c₁(L_j)` and `(a²/2)(sσ_j(t₁)² + (1-s)σ_j(t₀)²)/σ_j(t̄)·c₁(L_j)²`.
pub fn check_eta_chern(model: &NumericalModel, eta: &EtaSegment) -> Result<()> {
    let a = int(eta.a as i64);
    for (j, comp) in eta.segment.components.iter().enumerate() {
        let r = eta.rank(j);
        let l = model.divisor(&comp.polarisation);
        if sum_rank(&comp.twist).at0() != r || sum_rank(&comp.twist).at1() != r {
            return Err(Error::PropertyViolation(format!("rank of B_{j}(s) is not σ_{j}(t̄)")));
        }
        for s in [Rat::zero(), Rat::one()] {
            let ch = comp.twist.ch_at(model, &s);
            let c1 = l.scale(&(&a * eta.sigma.sigma(j, &eta.t_of(&s))));
            let weight = &s * eta.sigma.sigma(j, &eta.t1).pow(2) + (Rat::one() - &s) * eta.sigma.sigma(j, &eta.t0).pow(2);
            let ch2 = model.mul(&l, &l).scale(&(&a * &a / int(2) * weight / &r));
            if ch.component(1) != c1 || (model.dim() >= 2 && ch.component(2) != ch2) {
                return Err(Error::PropertyViolation(format!("Chern data of B_{j}({s}) off the closed form")));
            }
        }
    }
    Ok(())
}

/// `⟨⟨u₁ || u₂(s) || u₃(s)⟩⟩`, the difference vector along η.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaU {
    pub u1: Rat,
    pub u2: UniPoly,
    pub u3: UniPoly,
}

impl EtaU {
    pub fn vector(&self) -> CoefficientVector {
        CoefficientVector { entries: vec![UniPoly::constant(self.u1.clone()).with_var('s'), self.u2.clone(), self.u3.clone()] }
    }
}

/// `h_i(t) = ∫ hilb_i(F,τ)·Σ_j σ_j(t)c₁(L_j)^{3-i}` on the σ segment.
pub fn sigma_h(model: &NumericalModel, sigma: &SigmaSegment, f: &SheafType, tau: &SheafType) -> Vec<UniPoly> {
    (1..=model.dim())
        .map(|i| {
            let form = hilb_diff(model, f, tau, i);
            (0..2).fold(UniPoly::zero().with_var('t'), |acc, j| {
                let l = model.pow(&model.divisor(&sigma.polarisations[j]), model.dim() - i);
                &acc + &sigma.weights[j].to_poly().scale(&model.pairing(&form, &l))
            })
        })
        .collect()
}

/// `u₁ = h₁(t̄)`, `u₂(s) = h₂(t̄) + a·h₁(t_s)`, `u₃(s) = h₃(t̄) + a·h₂(t_s) + a²ε(s)`,
/// cross-checked against the difference vector of the η segment.
pub fn eta_u_coefficients(model: &NumericalModel, eta: &EtaSegment, f: &SheafType, tau: &SheafType) -> Result<EtaU> {
    if model.dim() != 3 {
        return Err(Error::Precondition("u-coefficients need a threefold".into()));
    }
    let h = sigma_h(model, &eta.sigma, f, tau);
    let a = int(eta.a as i64);
    let along = |p: &UniPoly| p.compose_linear(&eta.t0, &(&eta.t1 - &eta.t0)).with_var('s');
    let at_bar = |p: &UniPoly| UniPoly::constant(p.eval(&eta.t_bar)).with_var('s');
    let hilb1 = hilb_diff(model, f, tau, 1);
    let epsilon = (0..2).fold(UniPoly::zero().with_var('s'), |acc, j| {
        let l = model.divisor(&eta.sigma.polarisations[j]);
        let pair = model.pairing(&hilb1, &model.mul(&l, &l));
        let (w0, w1) = (eta.sigma.sigma(j, &eta.t0).pow(2), eta.sigma.sigma(j, &eta.t1).pow(2));
        let weight = UniPoly::linear(w0.clone(), w1 - w0, 's').scale(&(pair / eta.rank(j)));
        &acc + &weight
    });
    let epsilon = epsilon.scale(&Rat::new(1.into(), 2.into()));
    let u = EtaU {
        u1: h[0].eval(&eta.t_bar),
        u2: &at_bar(&h[1]) + &along(&h[0]).scale(&a),
        u3: &(&at_bar(&h[2]) + &along(&h[1]).scale(&a)) + &epsilon.scale(&(&a * &a)),
    };
    if difference_vector(model, f, tau, &eta.segment)? != u.vector() {
        return Err(Error::PropertyViolation(format!("u-coefficients of `{}` disagree with the η difference vector", f.name)));
    }
    Ok(u)
}

/// First member whose sign at `v1` on `p1` differs from its sign at `v2` on `p2`.
pub fn sign_mismatch(p1: &FamilyProfile, v1: &Rat, p2: &FamilyProfile, v2: &Rat) -> Option<String> {
    p1.vectors
        .iter()
        .zip(&p2.vectors)
        .find(|((_, x), (_, y))| x.sign_at(v1) != y.sign_at(v2))
        .map(|((name, _), _)| name.clone())
}

/// Doubling search from the divisibility modulus for the first `a` whose η
/// matches `σ(t₀)` at 0, `σ(t₁)` at 1, and is open.
pub fn search_a(
    model: &NumericalModel,
    sigma: &SigmaSegment,
    walls: &ChamberDecomposition,
    fam: &SubsheafFamily,
    t_bar: &Rat,
    t0: &Rat,
    t1: &Rat,
) -> Result<EtaSegment> {
    let modulus = minimal_divisibility_a(sigma, t_bar, t0, t1)?;
    let sigma_profile = FamilyProfile::new(model, fam, &sigma.segment)?;
    let mut witness = String::new();
    for step in 0..=SEARCH_CAP_EXPONENT {
        let a = modulus << step;
        let eta = make_eta(model, sigma, walls, t_bar, t0, t1, a)?;
        let profile = FamilyProfile::new(model, fam, &eta.segment)?;
        let bad = sign_mismatch(&profile, &Rat::zero(), &sigma_profile, t0)
            .or_else(|| sign_mismatch(&profile, &Rat::one(), &sigma_profile, t1))
            .or_else(|| profile_is_open(&profile).witness);
        match bad {
            None => return Ok(eta),
            Some(w) => witness = w,
        }
    }
    Err(Error::SearchCap { what: "a", witness })
}

/// `α(Aⁿ + A⁻ⁿ) + (λ-2α)O_X` with `α = μ/n²` and `n` least with `α < λ/2`:
/// rank `λ`, `c₁ = 0`, `ch₂ = μ·c₁(A)²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroC1Twist {
    pub n: i64,
    pub alpha: Rat,
    pub sum: FormalBundleSum,
}

pub fn make_zero_c1_twist(lambda: &Rat, mu: &Rat, base: &str, a: &DivisorClass) -> Result<ZeroC1Twist> {
    if !lambda.is_positive() || !mu.is_positive() {
        return Err(Error::Precondition(format!("twist needs λ, μ > 0 (got {lambda}, {mu})")));
    }
    let half = lambda / int(2);
    let guess = (mu * int(2) / lambda).floor().to_integer().sqrt();
    let mut n = guess.to_i64().unwrap_or(1).max(1);
    while mu / int(n * n) >= half {
        n += 1;
    }
    let alpha = mu / int(n * n);
    let c = |x: Rat| LinScalar::constant(x);
    let sum = FormalBundleSum::new(vec![
        (c(alpha.clone()), LineBundle::power_of(base, a, n)),
        (c(alpha.clone()), LineBundle::power_of(base, a, -n)),
        (c(lambda - &alpha * int(2)), LineBundle::trivial(a.coords.len())),
    ]);
    Ok(ZeroC1Twist { n, alpha, sum })
}

/// Solution of the twist system, indexed `beta[k][j][i]` and `alpha[j][i][k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaBeta {
    pub beta: [[[Rat; 2]; 2]; 2],
    pub alpha: [[[Rat; 2]; 2]; 2],
    pub lambda: Rat,
    pub b: Rat,
    pub lambda_min: Rat,
}

fn zero3() -> [[[Rat; 2]; 2]; 2] {
    std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| Rat::zero())))
}

/// For each `k`: `r₀β₀ᵢ + r₁β₁ᵢ = r_k q_{ki}` and
/// `r₀c₀ₖ(β₀₁ - β₀₀) = r₁c₁ₖ(β₁₀ - β₁₁)`, in the gauge `β₀₀ = gauge`.
pub fn solve_beta(q: &[[Rat; 2]; 2], r: &[Rat; 2], c: &[[Rat; 2]; 2], gauge: &Rat) -> Result<[[[Rat; 2]; 2]; 2]> {
    let mut beta = zero3();
    for k in 0..2 {
        if c[0][k] == c[1][k] {
            return Err(Error::DegeneratePairing { k });
        }
        let (r0, r1) = (&r[0], &r[1]);
        let (c0, c1) = (&c[0][k], &c[1][k]);
        let b00 = gauge.clone();
        let b10 = (&r[k] * &q[k][0] - r0 * &b00) / r1;
        let rhs1 = &r[k] * &q[k][1];
        let rhs2 = r1 * c1 * &b10 + r0 * c0 * &b00;
        let det = r0 * r1 * (c1 - c0);
        let b01 = (&rhs1 * r1 * c1 - r1 * &rhs2) / &det;
        let b11 = (r0 * &rhs2 - r0 * c0 * &rhs1) / &det;
        beta[k] = [[b00, b01], [b10, b11]];
    }
    Ok(beta)
}

/// Least `λ` bound: every `β_{jik} + λr_k/(2r_j)` is positive iff `λ > λ_min`.
pub fn lambda_min(beta: &[[[Rat; 2]; 2]; 2], r: &[Rat; 2]) -> Rat {
    let mut m = Rat::zero();
    for k in 0..2 {
        for j in 0..2 {
            for b in &beta[k][j] {
                let bound = -int(2) * &r[j] * b / &r[k];
                if bound > m {
                    m = bound;
                }
            }
        }
    }
    m
}

pub fn solve_alphabeta(
    q: &[[Rat; 2]; 2],
    r: &[Rat; 2],
    c: &[[Rat; 2]; 2],
    lambda: &Rat,
    b: &Rat,
) -> Result<AlphaBeta> {
    solve_alphabeta_gauge(q, r, c, lambda, b, &Rat::zero())
}

pub fn solve_alphabeta_gauge(
    q: &[[Rat; 2]; 2],
    r: &[Rat; 2],
    c: &[[Rat; 2]; 2],
    lambda: &Rat,
    b: &Rat,
    gauge: &Rat,
) -> Result<AlphaBeta> {
    if !r[0].is_positive() || !r[1].is_positive() || !b.is_positive() {
        return Err(Error::Precondition("alphabeta needs r₀, r₁, b > 0".into()));
    }
    let beta = solve_beta(q, r, c, gauge)?;
    let lmin = lambda_min(&beta, r);
    if lambda <= &lmin {
        return Err(Error::Positivity { lambda_min: lmin });
    }
    let mut alpha = zero3();
    for (j, aj) in alpha.iter_mut().enumerate() {
        for (i, aji) in aj.iter_mut().enumerate() {
            for (k, a) in aji.iter_mut().enumerate() {
                *a = b * (&beta[k][j][i] + lambda * &r[k] / (int(2) * &r[j]));
            }
        }
    }
    let ab = AlphaBeta { beta, alpha, lambda: lambda.clone(), b: b.clone(), lambda_min: lmin };
    check_alphabeta(&ab, q, r, c)?;
    Ok(ab)
}

/// `Σ_j r_j α_{jik} = b·r_k(λ + q_{ki})` and `Σ_j r_j c_{jk} α_{jik}` independent of `i`.
pub fn check_alphabeta(ab: &AlphaBeta, q: &[[Rat; 2]; 2], r: &[Rat; 2], c: &[[Rat; 2]; 2]) -> Result<()> {
    let al = &ab.alpha;
    for k in 0..2 {
        for i in 0..2 {
            let lhs = &r[0] * &al[0][i][k] + &r[1] * &al[1][i][k];
            if lhs != &ab.b * &r[k] * (&ab.lambda + &q[k][i]) {
                return Err(Error::PropertyViolation(format!("rank-weighted α sum fails at i = {i}, k = {k}")));
            }
        }
        let paired = |i: usize| &r[0] * &c[0][k] * &al[0][i][k] + &r[1] * &c[1][k] * &al[1][i][k];
        if paired(0) != paired(1) {
            return Err(Error::PropertyViolation(format!("pairing-weighted α sum depends on i at k = {k}")));
        }
    }
    Ok(())
}

/// `ζ(r) = (L₀, L₁; D₀(r), D₁(r))` with `D_j(r) = B_j(s̄)⊗((1-r)C_{j0} + rC_{j1})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZetaSegment {
    pub eta: EtaSegment,
    pub s_bar: Rat,
    pub s0: Rat,
    pub s1: Rat,
    pub q: [[Rat; 2]; 2],
    pub r: [Rat; 2],
    pub c: [[Rat; 2]; 2],
    pub solution: AlphaBeta,
    /// `twists[j][i] = C_{ji}`, each the sum of two zero-`c₁` pieces.
    pub twists: [[[ZeroC1Twist; 2]; 2]; 2],
    pub segment: StabilitySegment,
}

impl ZetaSegment {
    pub fn c_sum(&self, j: usize, i: usize) -> FormalBundleSum {
        self.twists[j][i][0].sum.plus(&self.twists[j][i][1].sum)
    }

    pub fn lambda(&self) -> &Rat {
        &self.solution.lambda
    }

    pub fn b(&self) -> &Rat {
        &self.solution.b
    }
}

/// `q_{ji} = a(s_i - s̄)(σ_j(t₁) - σ_j(t₀))/σ_j(t̄)`.
pub fn zeta_q(eta: &EtaSegment, s_bar: &Rat, s0: &Rat, s1: &Rat) -> [[Rat; 2]; 2] {
    let a = int(eta.a as i64);
    std::array::from_fn(|j| {
        let slope = (eta.sigma.sigma(j, &eta.t1) - eta.sigma.sigma(j, &eta.t0)) / eta.rank(j);
        let s = [s0, s1];
        std::array::from_fn(|i| &a * (s[i] - s_bar) * &slope)
    })
}

pub fn zeta_lambda_min(eta: &EtaSegment, s_bar: &Rat, s0: &Rat, s1: &Rat) -> Result<Rat> {
    let c = eta.sigma.pairing.clone().ok_or_else(|| Error::Precondition("ζ needs a threefold".into()))?;
    let r = [eta.rank(0), eta.rank(1)];
    let beta = solve_beta(&zeta_q(eta, s_bar, s0, s1), &r, &c, &Rat::zero())?;
    Ok(lambda_min(&beta, &r))
}

/// Builds ζ; `lambda = None` takes `λ_min + 1`.
pub fn make_zeta(
    model: &NumericalModel,
    eta: &EtaSegment,
    s_bar: &Rat,
    s0: &Rat,
    s1: &Rat,
    lambda: Option<&Rat>,
    b: &Rat,
) -> Result<ZetaSegment> {
    make_zeta_gauge(model, eta, s_bar, s0, s1, lambda, b, &Rat::zero())
}

#[allow(clippy::too_many_arguments)]
pub fn make_zeta_gauge(
    model: &NumericalModel,
    eta: &EtaSegment,
    s_bar: &Rat,
    s0: &Rat,
    s1: &Rat,
    lambda: Option<&Rat>,
    b: &Rat,
    gauge: &Rat,
) -> Result<ZetaSegment> {
    if model.dim() != 3 {
        return Err(Error::Precondition("ζ needs a threefold".into()));
    }
    check_order("s-flanks", s0, s_bar, s1)?;
    let c = eta.sigma.pairing.clone().ok_or_else(|| Error::Precondition("ζ needs a threefold".into()))?;
    let r = [eta.rank(0), eta.rank(1)];
    let q = zeta_q(eta, s_bar, s0, s1);
    let lambda = match lambda {
        Some(l) => l.clone(),
        None => lambda_min(&solve_beta(&q, &r, &c, gauge)?, &r) + Rat::one(),
    };
    let solution = solve_alphabeta_gauge(&q, &r, &c, &lambda, b, gauge)?;
    let half = Rat::new(1.into(), 2.into());
    let mut twists = Vec::new();
    for j in 0..2 {
        let mut row = Vec::new();
        for i in 0..2 {
            let pieces = [0, 1].map(|k| {
                make_zero_c1_twist(&half, &solution.alpha[j][i][k], NAMES[k], &eta.sigma.polarisations[k])
            });
            let [p0, p1] = pieces;
            row.push([p0?, p1?]);
        }
        let [c0, c1]: [[ZeroC1Twist; 2]; 2] = row.try_into().expect("two flanks");
        twists.push([c0, c1]);
    }
    let twists: [[[ZeroC1Twist; 2]; 2]; 2] = twists.try_into().expect("two components");
    let mut components = Vec::new();
    for (j, comp) in eta.segment.components.iter().enumerate() {
        let cs = |i: usize| twists[j][i][0].sum.plus(&twists[j][i][1].sum);
        let mix = cs(0)
            .scale(&LinScalar::new(Rat::one(), -Rat::one(), 'r'))?
            .plus(&cs(1).scale(&LinScalar::new(Rat::zero(), Rat::one(), 'r'))?);
        let twist = tensor_sum(&comp.twist.at(s_bar), &mix)?;
        components.push(Component { name: comp.name.clone(), polarisation: comp.polarisation.clone(), twist });
    }
    let zeta = ZetaSegment {
        eta: eta.clone(),
        s_bar: s_bar.clone(),
        s0: s0.clone(),
        s1: s1.clone(),
        q,
        r,
        c,
        solution,
        twists,
        segment: StabilitySegment::new('r', components),
    };
    zeta.segment.require_normalized(model)?;
    check_finaltwist(model, &zeta)?;
    let uniform = is_uniform(model, &zeta.segment, UniformityMode::Strict)?;
    if let Some(w) = uniform.witness {
        return Err(Error::PropertyViolation(format!("ζ is not strict-uniform: {w}")));
    }
    Ok(zeta)
}

/// The three twist properties of `D_j`, recomputed from the bundle sums:
/// (1) `rank D_j = r_j`, `c₁(D_j) = c₁(B_j(s̄))`;
/// (2) `Σ_j ch₂(D_j(i)) = b Σ_j r_j(λ + q_{ji})c₁(L_j)² + Σ_j ch₂(B_j(s̄))`;
/// (3) `Σ_j c₁(L_j)·ch₂(D_j(r))` constant in `r`.
pub fn check_finaltwist(model: &NumericalModel, zeta: &ZetaSegment) -> Result<()> {
    let fail = |what: &str| Err(Error::PropertyViolation(format!("twist property {what}")));
    let ends = [Rat::zero(), Rat::one()];
    let b_bar: Vec<FormalBundleSum> = zeta.eta.segment.components.iter().map(|c| c.twist.at(&zeta.s_bar)).collect();
    for (j, comp) in zeta.segment.components.iter().enumerate() {
        let rank = sum_rank(&comp.twist);
        if rank.at0() != zeta.r[j] || rank.at1() != zeta.r[j] {
            return fail("(1): rank");
        }
        for v in &ends {
            if comp.twist.ch_at(model, v).component(1) != b_bar[j].ch_at(model, v).component(1) {
                return fail("(1): c₁");
            }
        }
    }
    let (lambda, b) = (zeta.lambda(), zeta.b());
    for (i, v) in ends.iter().enumerate() {
        let lhs = zeta.segment.components.iter().fold(model.zero(), |acc, c| acc.add(&sum_ch2(model, &c.twist, v)));
        let rhs = (0..2).fold(model.zero(), |acc, j| {
            let l = model.divisor(&zeta.eta.sigma.polarisations[j]);
            let coeff = b * &zeta.r[j] * (lambda + &zeta.q[j][i]);
            acc.add(&model.mul(&l, &l).scale(&coeff)).add(&sum_ch2(model, &b_bar[j], v))
        });
        if lhs != rhs {
            return fail(&format!("(2) at r = {i}"));
        }
    }
    let paired = |v: &Rat| {
        zeta.segment.components.iter().fold(Rat::zero(), |acc, c| {
            acc + model.pairing(&model.divisor(&c.polarisation), &sum_ch2(model, &c.twist, v))
        })
    };
    if paired(&ends[0]) != paired(&ends[1]) {
        return fail("(3)");
    }
    Ok(())
}

/// Both sides of the δ identity as polynomials in `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaReport {
    pub direct: UniPoly,
    pub closed: UniPoly,
}

impl DeltaReport {
    pub fn holds(&self) -> bool {
        self.direct == self.closed
    }
}

/// `δ(r) = Σ_j rank(B_j(s̄))·∫hilb₁(F,τ)·((1-r)ch₂(C_{j0}) + r·ch₂(C_{j1}))`
/// against `b[λu₁ + (1-r)u₂(s₀) + r·u₂(s₁) - u₂(s̄)]`; the ζ difference vector
/// must also equal `⟨⟨u₁ || u₂(s̄) || u₃(s̄) + δ(r)⟩⟩`.
pub fn delta_identity_check(model: &NumericalModel, zeta: &ZetaSegment, f: &SheafType, tau: &SheafType) -> Result<DeltaReport> {
    let hilb1 = hilb_diff(model, f, tau, 1);
    let end_value = |i: usize| {
        (0..2).fold(Rat::zero(), |acc, j| {
            let ch2 = sum_ch2(model, &zeta.c_sum(j, i), &Rat::zero());
            acc + &zeta.r[j] * model.pairing(&hilb1, &ch2)
        })
    };
    let direct = UniPoly::linear(end_value(0), end_value(1) - end_value(0), 'r');
    let u = eta_u_coefficients(model, &zeta.eta, f, tau)?;
    let closed = zeta_delta(&u, &zeta.s_bar, &zeta.s0, &zeta.s1, zeta.lambda(), zeta.b());
    let report = DeltaReport { direct, closed };
    if !report.holds() {
        return Err(Error::PropertyViolation(format!("δ identity fails for `{}`: {} vs {}", f.name, report.direct, report.closed)));
    }
    let expected = zeta_u_vector(&u, &zeta.s_bar, &zeta.s0, &zeta.s1, zeta.lambda(), zeta.b());
    if difference_vector(model, f, tau, &zeta.segment)? != expected {
        return Err(Error::PropertyViolation(format!("ζ difference vector of `{}` off the u-form", f.name)));
    }
    Ok(report)
}

/// `b[λu₁ + (1-r)u₂(s₀) + r·u₂(s₁) - u₂(s̄)]`.
pub fn zeta_delta(u: &EtaU, s_bar: &Rat, s0: &Rat, s1: &Rat, lambda: &Rat, b: &Rat) -> UniPoly {
    let base = lambda * &u.u1 - u.u2.eval(s_bar);
    let at0 = &base + u.u2.eval(s0);
    let at1 = &base + u.u2.eval(s1);
    UniPoly::linear(b * &at0, b * (at1 - at0), 'r')
}

/// `⟨⟨u₁ || u₂(s̄) || u₃(s̄) + δ(r)⟩⟩`.
pub fn zeta_u_vector(u: &EtaU, s_bar: &Rat, s0: &Rat, s1: &Rat, lambda: &Rat, b: &Rat) -> CoefficientVector {
    let c = |x: Rat| UniPoly::constant(x).with_var('r');
    let third = &c(u.u3.eval(s_bar)) + &zeta_delta(u, s_bar, s0, s1, lambda, b);
    CoefficientVector { entries: vec![c(u.u1.clone()), c(u.u2.eval(s_bar)), third] }
}

fn zeta_acceptance(
    zeta_vectors: &[(String, CoefficientVector)],
    eta_vectors: &[(String, CoefficientVector)],
    s0: &Rat,
    s1: &Rat,
) -> Option<String> {
    let (zero, one) = (Rat::zero(), Rat::one());
    for ((name, z), (_, e)) in zeta_vectors.iter().zip(eta_vectors) {
        if z.sign_at(&zero) != e.sign_at(s0) || z.sign_at(&one) != e.sign_at(s1) {
            return Some(name.clone());
        }
        if z.sign_at(&zero) != z.sign_right_of(&zero) || z.sign_at(&one) != z.sign_left_of(&one) {
            return Some(name.clone());
        }
    }
    None
}

/// Doubling search over `b = 1, 2, 4, …` for the first ζ matching `η(s₀)` at 0,
/// `η(s₁)` at 1, and open.
pub fn search_b(
    model: &NumericalModel,
    eta: &EtaSegment,
    fam: &SubsheafFamily,
    s_bar: &Rat,
    s0: &Rat,
    s1: &Rat,
    lambda: Option<&Rat>,
) -> Result<ZetaSegment> {
    let eta_profile = FamilyProfile::new(model, fam, &eta.segment)?;
    let mut witness = String::new();
    for step in 0..=SEARCH_CAP_EXPONENT {
        let b = int(1i64 << step);
        let zeta = make_zeta(model, eta, s_bar, s0, s1, lambda, &b)?;
        let profile = FamilyProfile::new(model, fam, &zeta.segment)?;
        match zeta_acceptance(&profile.vectors, &eta_profile.vectors, s0, s1) {
            None => return Ok(zeta),
            Some(w) => witness = w,
        }
    }
    Err(Error::SearchCap { what: "b", witness })
}

/// The same search run directly on u-data.
pub fn search_b_u(members: &[(String, EtaU)], s_bar: &Rat, s0: &Rat, s1: &Rat, lambda: &Rat) -> Result<Rat> {
    let eta_vectors: Vec<_> = members.iter().map(|(n, u)| (n.clone(), u.vector())).collect();
    let mut witness = String::new();
    for step in 0..=SEARCH_CAP_EXPONENT {
        let b = int(1i64 << step);
        let zeta_vectors: Vec<_> =
            members.iter().map(|(n, u)| (n.clone(), zeta_u_vector(u, s_bar, s0, s1, lambda, &b))).collect();
        match zeta_acceptance(&zeta_vectors, &eta_vectors, s0, s1) {
            None => return Ok(b),
            Some(w) => witness = w,
        }
    }
    Err(Error::SearchCap { what: "b", witness })
}

/// Genericity of a flank `t` for the ε term: for every member whose
/// `Σ_j ∫hilb₁(F,τ)·c₁(L_j)²·σ_j(t)²/σ_j(t̄)` is not identically zero in `t`,
/// it must not vanish at `t`.
pub fn epsilon_generic(model: &NumericalModel, sigma: &SigmaSegment, fam: &SubsheafFamily, t_bar: &Rat, t: &Rat) -> bool {
    fam.effective_members().all(|f| {
        let hilb1 = hilb_diff(model, f, &fam.ambient, 1);
        let e = (0..2).fold(UniPoly::zero().with_var('t'), |acc, j| {
            let l = model.divisor(&sigma.polarisations[j]);
            let w = sigma.weights[j].to_poly();
            let c = model.pairing(&hilb1, &model.mul(&l, &l)) / sigma.sigma(j, t_bar);
            &acc + &(&w * &w).scale(&c)
        });
        e.is_zero() || !e.eval(t).is_zero()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chow::p1p2;
    use crate::exact::rat;
    use crate::walls::segment_walls;

    fn l(c: &[i64]) -> DivisorClass {
        DivisorClass::from_ints(c)
    }

    fn worked_family(m: &NumericalModel) -> SubsheafFamily {
        let f = SheafType::with_rank_c1(m, "F", int(1), &l(&[3, -2]));
        let e = SheafType::with_rank_c1(m, "E", int(2), &DivisorClass::zero(2));
        SubsheafFamily::new(e, vec![f])
    }

    fn worked_eta(m: &NumericalModel) -> (SigmaSegment, SubsheafFamily, EtaSegment) {
        let fam = worked_family(m);
        let sigma = make_sigma(m, &l(&[1, 1]), &l(&[1, 2])).unwrap();
        let walls = segment_walls(m, &sigma.segment, &fam).unwrap();
        let eta = make_eta(m, &sigma, &walls, &rat(1, 2), &rat(1, 4), &rat(3, 4), 2).unwrap();
        (sigma, fam, eta)
    }

    #[test]
    fn worked_sigma() {
        let m = p1p2();
        let s = make_sigma(&m, &l(&[1, 1]), &l(&[1, 2])).unwrap();
        assert_eq!(s.sigma(0, &rat(1, 2)), rat(1, 6));
        assert_eq!(s.sigma(1, &rat(1, 2)), rat(1, 24));
        assert_eq!(s.pairing, Some([[int(3), int(8)], [int(5), int(12)]]));
        assert!(s.satisfies_gen());
        assert!(s.segment.is_normalized(&m));
        let bad = make_sigma(&m, &l(&[1, 2]), &l(&[2, 1])).unwrap();
        assert_eq!(bad.gen_violations, vec![0]);
    }

    #[test]
    fn divisibility() {
        let m = p1p2();
        let s = make_sigma(&m, &l(&[1, 1]), &l(&[1, 2])).unwrap();
        assert_eq!(minimal_divisibility_a(&s, &rat(1, 2), &rat(1, 4), &rat(3, 4)).unwrap(), 2);
        let walls = ChamberDecomposition::from_walls(vec![]);
        let err = make_eta(&m, &s, &walls, &rat(1, 2), &rat(1, 4), &rat(3, 4), 1).unwrap_err();
        assert!(matches!(err, Error::Divisibility { a: 1, .. }));
        let fam = worked_family(&m);
        let walls = segment_walls(&m, &s.segment, &fam).unwrap();
        let err = make_eta(&m, &s, &walls, &rat(1, 3), &rat(1, 4), &rat(3, 4), 6).unwrap_err();
        assert!(matches!(err, Error::FlankMisplaced { .. }));
    }

    #[test]
    fn worked_eta_data() {
        let m = p1p2();
        let (_, fam, eta) = worked_eta(&m);
        assert_eq!(eta.exponents, [[3, 1], [1, 3]]);
        let u = eta_u_coefficients(&m, &eta, &fam.members[0], &fam.ambient).unwrap();
        assert_eq!(u.u1, int(0));
        assert_eq!(u.u2, UniPoly::new(vec![rat(-1, 3), rat(2, 3)], 's'));
        assert_eq!(u.u3, UniPoly::new(vec![rat(-5, 6), rat(5, 3)], 's'));
    }

    #[test]
    fn worked_search_a() {
        let m = p1p2();
        let (sigma, fam, _) = worked_eta(&m);
        let walls = segment_walls(&m, &sigma.segment, &fam).unwrap();
        let eta = search_a(&m, &sigma, &walls, &fam, &rat(1, 2), &rat(1, 4), &rat(3, 4)).unwrap();
        assert_eq!(eta.a, 2);
        let empty = SubsheafFamily::new(fam.ambient.clone(), vec![]);
        let eta = search_a(&m, &sigma, &walls, &empty, &rat(1, 2), &rat(1, 4), &rat(3, 4)).unwrap();
        assert_eq!(eta.a, 2);
    }

    #[test]
    fn zero_c1_twist() {
        let m = p1p2();
        let a = l(&[1, 1]);
        let t = make_zero_c1_twist(&int(1), &int(1), "A", &a).unwrap();
        assert_eq!((t.n, t.alpha.clone()), (2, rat(1, 4)));
        let ch = t.sum.ch_at(&m, &int(0));
        assert_eq!(sum_rank(&t.sum).at0(), int(1));
        assert!(ch.component(1).is_zero());
        let ca = m.divisor(&a);
        assert_eq!(ch.component(2), m.mul(&ca, &ca));
        assert_eq!(make_zero_c1_twist(&int(2), &rat(1, 3), "A", &a).unwrap().n, 1);
        assert!(make_zero_c1_twist(&int(0), &int(1), "A", &a).is_err());
    }

    fn worked_qrc() -> ([[Rat; 2]; 2], [Rat; 2], [[Rat; 2]; 2]) {
        let q = [[rat(1, 2), rat(-1, 2)], [rat(-1, 2), rat(1, 2)]];
        let r = [rat(1, 6), rat(1, 24)];
        let c = [[int(3), int(8)], [int(5), int(12)]];
        (q, r, c)
    }

    #[test]
    fn worked_alphabeta() {
        let (q, r, c) = worked_qrc();
        let ab = solve_alphabeta(&q, &r, &c, &int(6), &int(1)).unwrap();
        assert_eq!(ab.beta[0], [[int(0), rat(-5, 2)], [int(2), int(8)]]);
        let k0: Vec<Rat> = [(0, 0), (0, 1), (1, 0), (1, 1)].iter().map(|&(j, i)| ab.alpha[j][i][0].clone()).collect();
        assert_eq!(k0, vec![int(3), rat(1, 2), int(14), int(20)]);
        assert_eq!(ab.lambda_min, int(5));
        let err = solve_alphabeta(&q, &r, &c, &int(4), &int(1)).unwrap_err();
        assert_eq!(err, Error::Positivity { lambda_min: int(5) });
        let zero = [[int(0), int(0)], [int(0), int(0)]];
        let ab = solve_alphabeta(&zero, &r, &c, &int(1), &int(1)).unwrap();
        assert!(ab.beta.iter().flatten().flatten().all(Zero::is_zero));
        let flat = [[int(3), int(8)], [int(3), int(12)]];
        assert_eq!(solve_alphabeta(&q, &r, &flat, &int(6), &int(1)).unwrap_err(), Error::DegeneratePairing { k: 0 });
    }

    #[test]
    fn worked_zeta() {
        let m = p1p2();
        let (_, fam, eta) = worked_eta(&m);
        let (sb, s0, s1) = (rat(1, 2), rat(1, 4), rat(3, 4));
        assert_eq!(zeta_q(&eta, &sb, &s0, &s1), worked_qrc().0);
        let zeta = make_zeta(&m, &eta, &sb, &s0, &s1, Some(&int(6)), &int(1)).unwrap();
        let delta = delta_identity_check(&m, &zeta, &fam.members[0], &fam.ambient).unwrap();
        assert_eq!(delta.direct, UniPoly::new(vec![rat(-1, 6), rat(1, 3)], 'r'));
        let default = make_zeta(&m, &eta, &sb, &s0, &s1, None, &int(1)).unwrap();
        assert_eq!(default.lambda(), &int(6));
        let found = search_b(&m, &eta, &fam, &sb, &s0, &s1, None).unwrap();
        assert_eq!(found.b(), &int(1));
    }

    #[test]
    fn gauge_independent_verdicts() {
        let m = p1p2();
        let (_, fam, eta) = worked_eta(&m);
        let (sb, s0, s1) = (rat(1, 2), rat(1, 4), rat(3, 4));
        let z0 = make_zeta_gauge(&m, &eta, &sb, &s0, &s1, Some(&int(40)), &int(1), &int(0)).unwrap();
        let z1 = make_zeta_gauge(&m, &eta, &sb, &s0, &s1, Some(&int(40)), &int(1), &int(1)).unwrap();
        let p0 = FamilyProfile::new(&m, &fam, &z0.segment).unwrap();
        let p1 = FamilyProfile::new(&m, &fam, &z1.segment).unwrap();
        for k in 0..=10 {
            let v = rat(k, 10);
            assert_eq!(p0.signs_at(&v), p1.signs_at(&v));
        }
    }

    #[test]
    fn u_data_search() {
        let u = EtaU {
            u1: int(0),
            u2: UniPoly::new(vec![int(-2), int(4)], 's'),
            u3: UniPoly::new(vec![int(10)], 's'),
        };
        let b = search_b_u(&[("G".into(), u)], &rat(1, 2), &rat(1, 4), &rat(3, 4), &int(1)).unwrap();
        assert_eq!(b, int(16));
        assert_eq!(search_b_u(&[], &rat(1, 2), &rat(1, 4), &rat(3, 4), &int(1)).unwrap(), int(1));
    }

    #[test]
    fn degenerate_pairing_blocks_zeta() {
        let m = p1p2();
        let fam = worked_family(&m);
        let sigma = make_sigma(&m, &l(&[1, 2]), &l(&[2, 1])).unwrap();
        let walls = segment_walls(&m, &sigma.segment, &fam).unwrap();
        let t = walls.wall_points();
        let t_bar = t.first().cloned().unwrap_or_else(|| rat(1, 2));
        let (lo, hi) = (walls.chambers[0].0.clone(), walls.chambers.get(1).map(|c| c.1.clone()).unwrap_or_else(Rat::one));
        let (t0, t1) = (crate::exact::midpoint(&lo, &t_bar), crate::exact::midpoint(&t_bar, &hi));
        let eta = search_a(&m, &sigma, &walls, &fam, &t_bar, &t0, &t1).unwrap();
        let err = make_zeta(&m, &eta, &rat(1, 2), &rat(1, 4), &rat(3, 4), None, &int(1)).unwrap_err();
        assert_eq!(err, Error::DegeneratePairing { k: 0 });
    }
}
