//! The σ → η → ζ variation pipeline, flip schedules, and the verification
//! ledger.
//!
//! A plan is produced in two passes: [`build_plan`] searches for flanks and the
//! parameters `a`, `λ`, `b`, then [`assemble`] rebuilds every segment from
//! those stored parameters and runs all checks.  Re-running [`assemble`] on a
//! stored plan is the replay verification.

use num::{One, Zero};

use crate::chow::{DivisorClass, NumericalModel};
use crate::error::{Error, Result};
use crate::exact::{int, midpoint, LinScalar, Rat, Sign};
use crate::segments::{
    check_alphabeta, check_finaltwist, delta_identity_check, epsilon_generic, eta_u_coefficients, make_eta,
    make_sigma, make_zeta, search_a, search_b, sign_mismatch, EtaSegment, SigmaSegment, ZetaSegment,
};
use crate::sheaves::{FormalBundleSum, LineBundle};
use crate::stability::{
    is_uniform, profile_is_open, Component, FamilyProfile, StabilitySegment, SubsheafFamily, UniformityMode,
};
use crate::walls::{classify_separation, nudge_toward, profile_walls, ChamberDecomposition, Separation, Wall};

pub const PLAN_COMPLETE: &str = "plan complete";
pub const PLAN_INCOMPLETE: &str = "plan incomplete";

/// Anchors `t′ = t₀ < … < t_N = t″` with the walls in between, and one
/// intermediate point per interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipSchedule {
    pub anchors: Vec<Rat>,
    pub intermediates: Vec<Rat>,
}

impl FlipSchedule {
    pub fn new(walls: &[Rat], lo: &Rat, hi: &Rat) -> Result<Self> {
        if !(Rat::zero() < *lo && lo < hi && *hi < Rat::one()) {
            return Err(Error::Precondition(format!("schedule window needs 0 < {lo} < {hi} < 1")));
        }
        let mut anchors = vec![lo.clone()];
        anchors.extend(walls.iter().filter(|w| lo < *w && *w < hi).cloned());
        anchors.push(hi.clone());
        let intermediates = anchors.windows(2).map(|w| midpoint(&w[0], &w[1])).collect();
        Ok(FlipSchedule { anchors, intermediates })
    }

    pub fn flips(&self) -> usize {
        self.anchors.len() - 2
    }
}

/// Schedule on a difference-uniform segment.
pub fn flip_schedule(
    model: &NumericalModel,
    seg: &StabilitySegment,
    fam: &SubsheafFamily,
    lo: &Rat,
    hi: &Rat,
) -> Result<FlipSchedule> {
    let report = is_uniform(model, seg, UniformityMode::Difference)?;
    if let Some(w) = report.witness {
        return Err(Error::NotUniform(w.to_string()));
    }
    let walls = profile_walls(&FamilyProfile::new(model, fam, seg)?)?;
    FlipSchedule::new(&walls.wall_points(), lo, hi)
}

/// Halfway between 0 and the first wall, and between the last wall and 1.
pub fn default_window(walls: &[Rat]) -> (Rat, Rat) {
    match (walls.first(), walls.last()) {
        (Some(a), Some(b)) => (a / int(2), (b + Rat::one()) / int(2)),
        _ => (Rat::new(1.into(), 4.into()), Rat::new(3.into(), 4.into())),
    }
}

pub const SAMPLES_PER_INTERVAL: i64 = 10;

/// First interval on which the family sign vector is not constant, sampled at
/// [`SAMPLES_PER_INTERVAL`] interior points.
pub fn schedule_constancy(profile: &FamilyProfile, schedule: &FlipSchedule) -> Option<(Rat, Rat)> {
    for w in schedule.anchors.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let point = |k: i64| lo + (hi - lo) * int(k) / int(SAMPLES_PER_INTERVAL + 1);
        let first = profile.signs_at(&point(1));
        if (2..=SAMPLES_PER_INTERVAL).any(|k| profile.signs_at(&point(k)) != first) {
            return Some((lo.clone(), hi.clone()));
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerEntry {
    pub level: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZetaLevel {
    pub s_bar: Rat,
    pub s0: Rat,
    pub s1: Rat,
    pub nudged: bool,
    pub lambda: Option<Rat>,
    pub b: Option<Rat>,
    pub error: Option<String>,
    /// `alpha[j][i][k]` and twist exponents `n[j][i][k]`, filled by assembly.
    pub alpha: Option<[[[Rat; 2]; 2]; 2]>,
    pub exponents: Option<[[[i64; 2]; 2]; 2]>,
    pub walls: Vec<Wall>,
    pub schedule: Option<FlipSchedule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaLevel {
    pub t_bar: Rat,
    pub t0: Rat,
    pub t1: Rat,
    pub nudged: bool,
    pub a: Option<u64>,
    pub error: Option<String>,
    pub walls: Vec<Wall>,
    pub zetas: Vec<ZetaLevel>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanKind {
    Threefold,
    Surface { lbar: DivisorClass, a: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariationPlan {
    pub kind: PlanKind,
    pub l0: DivisorClass,
    pub l1: DivisorClass,
    pub separation: String,
    pub root_walls: Vec<Wall>,
    pub root_schedule: Option<FlipSchedule>,
    pub etas: Vec<EtaLevel>,
    pub ledger: Vec<LedgerEntry>,
    pub warnings: Vec<String>,
}

impl VariationPlan {
    fn skeleton(kind: PlanKind, l0: &DivisorClass, l1: &DivisorClass) -> Self {
        VariationPlan {
            kind,
            l0: l0.clone(),
            l1: l1.clone(),
            separation: String::new(),
            root_walls: Vec::new(),
            root_schedule: None,
            etas: Vec::new(),
            ledger: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn complete(&self) -> bool {
        self.ledger.iter().all(|e| e.passed)
    }

    pub fn verdict(&self) -> &'static str {
        if self.complete() {
            PLAN_COMPLETE
        } else {
            PLAN_INCOMPLETE
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.ledger.iter().filter(|e| !e.passed)
    }

    fn record(&mut self, level: &str, check: &str, passed: bool, detail: impl Into<String>) {
        self.ledger.push(LedgerEntry { level: level.into(), check: check.into(), passed, detail: detail.into() });
    }

    fn record_result<T>(&mut self, level: &str, check: &str, r: &Result<T>) -> bool {
        match r {
            Ok(_) => self.record(level, check, true, "ok"),
            Err(e) => self.record(level, check, false, e.to_string()),
        }
        r.is_ok()
    }
}

fn eta_label(t_bar: &Rat) -> String {
    format!("eta t={t_bar}")
}

fn zeta_label(t_bar: &Rat, s_bar: &Rat) -> String {
    format!("zeta t={t_bar} s={s_bar}")
}

fn flank(c: &(Rat, Rat), wall: &Rat, generic: impl Fn(&Rat) -> bool) -> Result<(Rat, bool)> {
    nudge_toward(&midpoint(&c.0, &c.1), wall, generic)
}

fn separation_label(model: &NumericalModel, fam: &SubsheafFamily, l0: &DivisorClass, l1: &DivisorClass) -> (String, bool) {
    let report = classify_separation(model, fam, l0, l1);
    let single = matches!(report.verdict, Separation::SingleFirstKind | Separation::NoWall);
    (report.verdict.to_string(), single)
}

/// Searches flanks, `a`, `λ` and `b` for the threefold pipeline, then
/// assembles and verifies the plan.  Search failures are stored in the plan
/// and surface as failing ledger entries.
pub fn build_plan(model: &NumericalModel, fam: &SubsheafFamily, l0: &DivisorClass, l1: &DivisorClass) -> Result<VariationPlan> {
    let mut plan = VariationPlan::skeleton(PlanKind::Threefold, l0, l1);
    let sigma = make_sigma(model, l0, l1)?;
    if let Ok(walls) = profile_walls(&FamilyProfile::new(model, fam, &sigma.segment)?) {
        for (w, wall) in walls.walls.iter().enumerate() {
            plan.etas.push(search_eta_level(model, fam, &sigma, &walls, w, &wall.at));
        }
    }
    assemble(model, fam, &plan)
}

fn search_eta_level(
    model: &NumericalModel,
    fam: &SubsheafFamily,
    sigma: &SigmaSegment,
    walls: &ChamberDecomposition,
    w: usize,
    t_bar: &Rat,
) -> EtaLevel {
    let generic = |t: &Rat| epsilon_generic(model, sigma, fam, t_bar, t);
    let mut level = EtaLevel {
        t_bar: t_bar.clone(),
        t0: midpoint(&walls.chambers[w].0, t_bar),
        t1: midpoint(t_bar, &walls.chambers[w + 1].1),
        nudged: false,
        a: None,
        error: None,
        walls: Vec::new(),
        zetas: Vec::new(),
    };
    let flanks = flank(&walls.chambers[w], t_bar, generic).and_then(|l| Ok((l, flank(&walls.chambers[w + 1], t_bar, generic)?)));
    let ((t0, n0), (t1, n1)) = match flanks {
        Ok(f) => f,
        Err(e) => {
            level.error = Some(e.to_string());
            return level;
        }
    };
    level.t0 = t0;
    level.t1 = t1;
    level.nudged = n0 || n1;
    let eta = match search_a(model, sigma, walls, fam, t_bar, &level.t0, &level.t1) {
        Ok(eta) => eta,
        Err(e) => {
            level.error = Some(e.to_string());
            return level;
        }
    };
    level.a = Some(eta.a);
    let profile = match FamilyProfile::new(model, fam, &eta.segment) {
        Ok(p) => p,
        Err(e) => {
            level.error = Some(e.to_string());
            return level;
        }
    };
    let eta_walls = match profile_walls(&profile) {
        Ok(w) => w,
        Err(e) => {
            level.error = Some(e.to_string());
            return level;
        }
    };
    for (v, wall) in eta_walls.walls.iter().enumerate() {
        level.zetas.push(search_zeta_level(model, fam, &eta, &profile, &eta_walls, v, &wall.at));
    }
    level
}

fn search_zeta_level(
    model: &NumericalModel,
    fam: &SubsheafFamily,
    eta: &EtaSegment,
    profile: &FamilyProfile,
    walls: &ChamberDecomposition,
    v: usize,
    s_bar: &Rat,
) -> ZetaLevel {
    let generic = |s: &Rat| profile.vectors.iter().all(|(_, p)| p.sign_at(s) != Sign::Zero);
    let mut level = ZetaLevel {
        s_bar: s_bar.clone(),
        s0: midpoint(&walls.chambers[v].0, s_bar),
        s1: midpoint(s_bar, &walls.chambers[v + 1].1),
        nudged: false,
        lambda: None,
        b: None,
        error: None,
        alpha: None,
        exponents: None,
        walls: Vec::new(),
        schedule: None,
    };
    let flanks = flank(&walls.chambers[v], s_bar, generic).and_then(|l| Ok((l, flank(&walls.chambers[v + 1], s_bar, generic)?)));
    match flanks {
        Ok(((s0, n0), (s1, n1))) => {
            level.s0 = s0;
            level.s1 = s1;
            level.nudged = n0 || n1;
        }
        Err(e) => {
            level.error = Some(e.to_string());
            return level;
        }
    }
    match search_b(model, eta, fam, s_bar, &level.s0, &level.s1, None) {
        Ok(zeta) => {
            level.lambda = Some(zeta.lambda().clone());
            level.b = Some(zeta.b().clone());
        }
        Err(e) => level.error = Some(e.to_string()),
    }
    level
}

/// Rebuilds every segment of `skeleton` from its stored parameters and runs
/// every check.  Derived fields (walls, schedules, α, ledger) are recomputed.
pub fn assemble(model: &NumericalModel, fam: &SubsheafFamily, skeleton: &VariationPlan) -> Result<VariationPlan> {
    match &skeleton.kind {
        PlanKind::Threefold => assemble_threefold(model, fam, skeleton),
        PlanKind::Surface { lbar, a } => surface_plan(model, fam, &skeleton.l0, &skeleton.l1, lbar, *a),
    }
}

fn assemble_threefold(model: &NumericalModel, fam: &SubsheafFamily, skeleton: &VariationPlan) -> Result<VariationPlan> {
    let mut plan = VariationPlan::skeleton(PlanKind::Threefold, &skeleton.l0, &skeleton.l1);
    plan.warnings.extend(fam.warnings());
    let sigma = make_sigma(model, &skeleton.l0, &skeleton.l1)?;
    let (separation, single) = separation_label(model, fam, &skeleton.l0, &skeleton.l1);
    if !single {
        plan.warnings.push(format!(
            "L0 and L1 are not separated by a single wall of the first kind ({separation}); ζ endpoint equivalences are not guaranteed"
        ));
    }
    plan.separation = separation;
    if !sigma.satisfies_gen() {
        plan.warnings.push(format!("pairing genericity fails for k in {:?}", sigma.gen_violations));
    }
    let profile = FamilyProfile::new(model, fam, &sigma.segment)?;
    let open = profile_is_open(&profile);
    plan.record("sigma", "open", open.equivalent, open.witness.unwrap_or_else(|| "ok".into()));
    let walls = match profile_walls(&profile) {
        Ok(w) => w,
        Err(e) => {
            plan.record("sigma", "walls", false, e.to_string());
            return Ok(plan);
        }
    };
    plan.root_walls = walls.walls.clone();
    if walls.walls.is_empty() {
        let (lo, hi) = default_window(&[]);
        let schedule = FlipSchedule::new(&[], &lo, &hi)?;
        let bad = schedule_constancy(&profile, &schedule);
        plan.record("sigma", "schedule constant", bad.is_none(), interval_detail(bad));
        plan.root_schedule = Some(schedule);
    }
    let stored: Vec<Rat> = skeleton.etas.iter().map(|e| e.t_bar.clone()).collect();
    let same = stored == walls.wall_points();
    plan.record("sigma", "walls match stored parameters", same, format!("{} walls", walls.walls.len()));
    for stored in &skeleton.etas {
        let level = assemble_eta(model, fam, &sigma, &walls, &profile, stored, &mut plan);
        plan.etas.push(level);
    }
    Ok(plan)
}

fn interval_detail(bad: Option<(Rat, Rat)>) -> String {
    match bad {
        None => "ok".into(),
        Some((a, b)) => format!("verdicts vary on ({a}, {b})"),
    }
}

fn endpoint_detail(w: Option<String>) -> String {
    w.map(|m| format!("sign mismatch for {m}")).unwrap_or_else(|| "ok".into())
}

fn assemble_eta(
    model: &NumericalModel,
    fam: &SubsheafFamily,
    sigma: &SigmaSegment,
    walls: &ChamberDecomposition,
    sigma_profile: &FamilyProfile,
    stored: &EtaLevel,
    plan: &mut VariationPlan,
) -> EtaLevel {
    let label = eta_label(&stored.t_bar);
    let mut level = EtaLevel { walls: Vec::new(), zetas: Vec::new(), ..stored.clone() };
    if stored.nudged {
        plan.warnings.push(format!("{label}: flanks nudged for genericity"));
    }
    let a = match (&stored.error, stored.a) {
        (None, Some(a)) => a,
        (err, _) => {
            plan.record(&label, "search a", false, err.clone().unwrap_or_else(|| "missing a".into()));
            return level;
        }
    };
    let eta = make_eta(model, sigma, walls, &stored.t_bar, &stored.t0, &stored.t1, a);
    if !plan.record_result(&label, "construction and Chern data", &eta) {
        return level;
    }
    let eta = eta.expect("checked");
    for f in fam.effective_members() {
        let u = eta_u_coefficients(model, &eta, f, &fam.ambient);
        plan.record_result(&label, &format!("u-coefficients {}", f.name), &u);
    }
    let profile = match FamilyProfile::new(model, fam, &eta.segment) {
        Ok(p) => p,
        Err(e) => {
            plan.record(&label, "profile", false, e.to_string());
            return level;
        }
    };
    let w0 = sign_mismatch(&profile, &Rat::zero(), sigma_profile, &stored.t0);
    plan.record(&label, "endpoint 0 matches sigma(t0)", w0.is_none(), endpoint_detail(w0));
    let w1 = sign_mismatch(&profile, &Rat::one(), sigma_profile, &stored.t1);
    plan.record(&label, "endpoint 1 matches sigma(t1)", w1.is_none(), endpoint_detail(w1));
    let open = profile_is_open(&profile);
    plan.record(&label, "open", open.equivalent, open.witness.unwrap_or_else(|| "ok".into()));
    let eta_walls = match profile_walls(&profile) {
        Ok(w) => w,
        Err(e) => {
            plan.record(&label, "walls", false, e.to_string());
            return level;
        }
    };
    level.walls = eta_walls.walls.clone();
    let stored_walls: Vec<Rat> = stored.zetas.iter().map(|z| z.s_bar.clone()).collect();
    plan.record(
        &label,
        "walls match stored parameters",
        stored_walls == eta_walls.wall_points(),
        format!("{} walls", eta_walls.walls.len()),
    );
    for z in &stored.zetas {
        let zl = assemble_zeta(model, fam, &eta, &profile, z, plan);
        level.zetas.push(zl);
    }
    level
}

fn assemble_zeta(
    model: &NumericalModel,
    fam: &SubsheafFamily,
    eta: &EtaSegment,
    eta_profile: &FamilyProfile,
    stored: &ZetaLevel,
    plan: &mut VariationPlan,
) -> ZetaLevel {
    let label = zeta_label(&eta.t_bar, &stored.s_bar);
    let mut level = ZetaLevel { alpha: None, exponents: None, walls: Vec::new(), schedule: None, ..stored.clone() };
    if stored.nudged {
        plan.warnings.push(format!("{label}: flanks nudged for genericity"));
    }
    let (lambda, b) = match (&stored.error, &stored.lambda, &stored.b) {
        (None, Some(l), Some(b)) => (l.clone(), b.clone()),
        (err, _, _) => {
            plan.record(&label, "search b", false, err.clone().unwrap_or_else(|| "missing λ or b".into()));
            return level;
        }
    };
    let zeta = make_zeta(model, eta, &stored.s_bar, &stored.s0, &stored.s1, Some(&lambda), &b);
    if !plan.record_result(&label, "construction", &zeta) {
        return level;
    }
    let zeta = zeta.expect("checked");
    record_zeta_provenance(&zeta, &mut level);
    let ab = check_alphabeta(&zeta.solution, &zeta.q, &zeta.r, &zeta.c);
    plan.record_result(&label, "alphabeta constraints", &ab);
    let ft = check_finaltwist(model, &zeta);
    plan.record_result(&label, "twist properties", &ft);
    let uniform = is_uniform(model, &zeta.segment, UniformityMode::Strict);
    match uniform {
        Ok(r) => plan.record(&label, "uniform strict", r.is_uniform(), r.witness.map(|w| w.to_string()).unwrap_or_else(|| "ok".into())),
        Err(e) => plan.record(&label, "uniform strict", false, e.to_string()),
    }
    for f in fam.effective_members() {
        let d = delta_identity_check(model, &zeta, f, &fam.ambient);
        plan.record_result(&label, &format!("delta identity {}", f.name), &d);
    }
    let profile = match FamilyProfile::new(model, fam, &zeta.segment) {
        Ok(p) => p,
        Err(e) => {
            plan.record(&label, "profile", false, e.to_string());
            return level;
        }
    };
    let w0 = sign_mismatch(&profile, &Rat::zero(), eta_profile, &stored.s0);
    plan.record(&label, "endpoint 0 matches eta(s0)", w0.is_none(), endpoint_detail(w0));
    let w1 = sign_mismatch(&profile, &Rat::one(), eta_profile, &stored.s1);
    plan.record(&label, "endpoint 1 matches eta(s1)", w1.is_none(), endpoint_detail(w1));
    let open = profile_is_open(&profile);
    plan.record(&label, "open", open.equivalent, open.witness.unwrap_or_else(|| "ok".into()));
    let walls = match profile_walls(&profile) {
        Ok(w) => w,
        Err(e) => {
            plan.record(&label, "walls", false, e.to_string());
            return level;
        }
    };
    level.walls = walls.walls.clone();
    let (lo, hi) = default_window(&walls.wall_points());
    match flip_schedule(model, &zeta.segment, fam, &lo, &hi) {
        Ok(s) => {
            let bad = schedule_constancy(&profile, &s);
            plan.record(&label, "schedule constant", bad.is_none(), interval_detail(bad));
            level.schedule = Some(s);
        }
        Err(e) => plan.record(&label, "schedule", false, e.to_string()),
    }
    level
}

fn record_zeta_provenance(zeta: &ZetaSegment, level: &mut ZetaLevel) {
    level.alpha = Some(zeta.solution.alpha.clone());
    level.exponents = Some(std::array::from_fn(|j| std::array::from_fn(|i| std::array::from_fn(|k| zeta.twists[j][i][k].n))));
}

/// `σ(t) = (L̄, L̄; (t/vol L̄)·L₁^a, ((1-t)/vol L̄)·L₀^a)`.
pub fn surface_segment(
    model: &NumericalModel,
    l0: &DivisorClass,
    l1: &DivisorClass,
    lbar: &DivisorClass,
    a: u64,
) -> Result<StabilitySegment> {
    if model.dim() != 2 {
        return Err(Error::Precondition("the surface segment needs a surface".into()));
    }
    if !lbar.is_integral() {
        return Err(Error::Precondition(format!("L̄ = {lbar} is not integral")));
    }
    let vol = model.volume(lbar);
    if vol <= Rat::zero() {
        return Err(Error::Precondition(format!("vol(L̄) = {vol} is not positive")));
    }
    let w = vol.recip();
    let part = |name: &str, base: &str, l: &DivisorClass, coeff: LinScalar| Component {
        name: name.into(),
        polarisation: lbar.clone(),
        twist: FormalBundleSum::new(vec![(coeff, LineBundle::power_of(base, l, a as i64))]),
    };
    Ok(StabilitySegment::new(
        't',
        vec![
            part("Lbar·L1", "L1", l1, LinScalar::through(Rat::zero(), w.clone(), 't')),
            part("Lbar·L0", "L0", l0, LinScalar::through(w, Rat::zero(), 't')),
        ],
    ))
}

/// The surface variant: one difference-uniform segment and its schedule.
pub fn surface_plan(
    model: &NumericalModel,
    fam: &SubsheafFamily,
    l0: &DivisorClass,
    l1: &DivisorClass,
    lbar: &DivisorClass,
    a: u64,
) -> Result<VariationPlan> {
    let seg = surface_segment(model, l0, l1, lbar, a)?;
    let mut plan = VariationPlan::skeleton(PlanKind::Surface { lbar: lbar.clone(), a }, l0, l1);
    plan.warnings.extend(fam.warnings());
    plan.separation = separation_label(model, fam, l0, l1).0;
    let report = is_uniform(model, &seg, UniformityMode::Difference)?;
    let uniform = report.is_uniform();
    plan.record(
        "surface",
        "uniform difference",
        uniform,
        report.witness.map(|w| w.to_string()).unwrap_or_else(|| "ok".into()),
    );
    let profile = FamilyProfile::new(model, fam, &seg)?;
    let open = profile_is_open(&profile);
    plan.record("surface", "open", open.equivalent, open.witness.unwrap_or_else(|| "ok".into()));
    let walls = match profile_walls(&profile) {
        Ok(w) => w,
        Err(e) => {
            plan.record("surface", "walls", false, e.to_string());
            return Ok(plan);
        }
    };
    plan.root_walls = walls.walls.clone();
    if uniform {
        let (lo, hi) = default_window(&walls.wall_points());
        let schedule = FlipSchedule::new(&walls.wall_points(), &lo, &hi)?;
        let bad = schedule_constancy(&profile, &schedule);
        plan.record("surface", "schedule constant", bad.is_none(), interval_detail(bad));
        plan.root_schedule = Some(schedule);
    }
    Ok(plan)
}
