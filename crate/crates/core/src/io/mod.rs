//! Model, problem and plan files, and plot output.
//!
//! All files are JSON.  Every number is a string `"p/q"` (or an integer or
//! finite decimal) so that nothing passes through binary floating point.

pub mod plot;

use std::collections::BTreeMap;
use std::path::Path;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::chow::{builtin, DivisorClass, GradedClass, NumericalModel, ProductEntry};
use crate::error::{Error, Result};
use crate::exact::{parse_rat, Rat};
use crate::plan::{EtaLevel, FlipSchedule, LedgerEntry, PlanKind, VariationPlan, ZetaLevel};
use crate::sheaves::SheafType;
use crate::stability::SubsheafFamily;
use crate::walls::Wall;

pub const PLAN_FORMAT: &str = "mgs-plan/1";

type ClassMap = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub basis: Vec<Vec<String>>,
    #[serde(default)]
    pub products: Vec<ProductFile>,
    pub todd: ClassMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_integral: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductFile {
    pub left: String,
    pub right: String,
    pub result: ClassMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Named(String),
    Inline(ModelFile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleFile {
    pub class: String,
    #[serde(default)]
    pub ample: bool,
}

/// Either a full Chern character by basis name, or rank and `c₁` with
/// optional higher parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheafFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ch: Option<ClassMap>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub ambient: String,
    #[serde(default)]
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    #[serde(rename = "L0")]
    pub l0: String,
    #[serde(rename = "L1")]
    pub l1: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceRequest {
    #[serde(rename = "L0")]
    pub l0: String,
    #[serde(rename = "L1")]
    pub l1: String,
    #[serde(rename = "Lbar")]
    pub lbar: String,
    pub a: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub model: ModelRef,
    #[serde(default)]
    pub bundles: BTreeMap<String, BundleFile>,
    #[serde(default)]
    pub sheaves: BTreeMap<String, SheafFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceRequest>,
}

/// A resolved problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub file: ProblemFile,
    pub model: NumericalModel,
    pub bundles: BTreeMap<String, (DivisorClass, bool)>,
    pub sheaves: BTreeMap<String, SheafType>,
    pub family: Option<SubsheafFamily>,
}

impl Problem {
    /// A polarisation, which must carry an ampleness assertion.
    pub fn polarisation(&self, name: &str) -> Result<DivisorClass> {
        match self.bundles.get(name) {
            Some((c, true)) => Ok(c.clone()),
            Some((_, false)) => Err(Error::Precondition(format!("bundle `{name}` is not asserted ample"))),
            None => parse_divisor(&self.model, name),
        }
    }

    pub fn family(&self) -> Result<&SubsheafFamily> {
        self.family.as_ref().ok_or_else(|| Error::Parse("problem has no `family` section".into()))
    }

    pub fn sheaf(&self, name: &str) -> Result<SheafType> {
        if let Some(s) = self.sheaves.get(name) {
            return Ok(s.clone());
        }
        sheaf_literal(&self.model, name)
    }
}

fn json_err(what: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{what}: line {} column {}: {e}", e.line(), e.column()))
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Resolves a built-in name or a `.model` file.
pub fn load_model(name: &str, base: Option<&Path>) -> Result<NumericalModel> {
    if let Some(m) = builtin(name) {
        return Ok(m);
    }
    let path = match base {
        Some(dir) if Path::new(name).is_relative() => dir.join(name),
        _ => Path::new(name).to_path_buf(),
    };
    if !path.exists() {
        return Err(Error::UnknownName(name.to_string()));
    }
    parse_model(&read_file(&path)?)
}

pub fn parse_model(text: &str) -> Result<NumericalModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| json_err("model", e))?;
    model_from_file(&file)
}

fn locate(basis: &[Vec<String>], name: &str) -> Result<(usize, usize)> {
    basis
        .iter()
        .enumerate()
        .find_map(|(p, names)| names.iter().position(|n| n == name).map(|a| (p, a)))
        .ok_or_else(|| Error::UnknownName(name.to_string()))
}

fn class_from_map(basis: &[Vec<String>], map: &ClassMap) -> Result<GradedClass> {
    let mut parts: Vec<Vec<Rat>> = basis.iter().map(|b| vec![Rat::zero(); b.len()]).collect();
    for (name, value) in map {
        let (p, a) = locate(basis, name)?;
        parts[p][a] = parse_rat(value)?;
    }
    Ok(GradedClass::from_parts(parts))
}

fn class_to_map(basis: &[Vec<String>], c: &GradedClass) -> ClassMap {
    let mut map = ClassMap::new();
    for (p, names) in basis.iter().enumerate() {
        for (a, n) in names.iter().enumerate() {
            let v = c.coeff(p, a);
            if !v.is_zero() {
                map.insert(n.clone(), v.to_string());
            }
        }
    }
    map
}

pub fn model_from_file(file: &ModelFile) -> Result<NumericalModel> {
    let basis = &file.basis;
    let mut entries = Vec::new();
    for p in &file.products {
        let left = locate(basis, &p.left)?;
        let right = locate(basis, &p.right)?;
        let degree = left.0 + right.0;
        let mut result = vec![Rat::zero(); basis.get(degree).map_or(0, Vec::len)];
        for (name, value) in &p.result {
            let (q, a) = locate(basis, name)?;
            if q != degree {
                return Err(Error::InvalidModel(format!("{}·{} has a term `{name}` of the wrong degree", p.left, p.right)));
            }
            result[a] = parse_rat(value)?;
        }
        entries.push(ProductEntry { left, right, result });
    }
    if basis.is_empty() {
        return Err(Error::InvalidModel("empty basis".into()));
    }
    let todd = class_from_map(basis, &file.todd)?;
    let point = match &file.point_integral {
        Some(s) => parse_rat(s)?,
        None => Rat::one(),
    };
    NumericalModel::new(&file.name, basis.clone(), &entries, todd, point)
}

/// Every nonzero product of positive-degree basis elements, listed once.
pub fn model_to_file(model: &NumericalModel) -> ModelFile {
    let basis = model.basis().to_vec();
    let d = model.dim();
    let mut products = Vec::new();
    for p in 1..=d {
        for a in 0..basis[p].len() {
            for q in p..=d - p {
                for b in 0..basis[q].len() {
                    if q == p && b < a {
                        continue;
                    }
                    let prod = model.mul(&model.basis_class(p, a), &model.basis_class(q, b));
                    let result = class_to_map(&basis, &prod);
                    if !result.is_empty() {
                        products.push(ProductFile { left: basis[p][a].clone(), right: basis[q][b].clone(), result });
                    }
                }
            }
        }
    }
    let todd = class_to_map(&basis, model.todd());
    let point_integral = (!model.point_integral().is_one()).then(|| model.point_integral().to_string());
    ModelFile { name: model.name.clone(), basis, products, todd, point_integral }
}

/// `"O(a,b,…)"`, `"O"`, or a linear expression such as `"3h1-2h2"` or `"1/2*h1 + h2"`.
pub fn parse_divisor(model: &NumericalModel, s: &str) -> Result<DivisorClass> {
    let s = s.trim();
    let n = model.divisor_rank();
    if s == "O" || s == "0" {
        return Ok(DivisorClass::zero(n));
    }
    if let Some(inner) = s.strip_prefix("O(").and_then(|r| r.strip_suffix(')')) {
        let coords = inner.split(',').map(parse_rat).collect::<Result<Vec<_>>>()?;
        if coords.len() != n {
            return Err(Error::Parse(format!("`{s}` needs {n} coordinates")));
        }
        return Ok(DivisorClass::new(coords));
    }
    let mut coords = vec![Rat::zero(); n];
    for (coef, name) in linear_terms(s)? {
        match locate(model.basis(), &name)? {
            (1, a) => coords[a] += coef,
            _ => return Err(Error::Parse(format!("`{name}` is not a divisor basis element"))),
        }
    }
    Ok(DivisorClass::new(coords))
}

fn linear_terms(s: &str) -> Result<Vec<(Rat, String)>> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let is_sign = |b: u8| b == b'+' || b == b'-';
    let bytes = compact.as_bytes();
    let mut terms = Vec::new();
    let mut start = 0;
    for i in 1..=bytes.len() {
        if i == bytes.len() || (is_sign(bytes[i]) && !is_sign(bytes[i - 1]) && bytes[i - 1] != b'^') {
            terms.push(&compact[start..i]);
            start = i;
        }
    }
    terms
        .into_iter()
        .map(|t| {
            let body = t.trim_start_matches(['+', '-']);
            let negative = t[..t.len() - body.len()].matches('-').count() % 2 == 1;
            let split = body.find(|c: char| !(c.is_ascii_digit() || c == '/' || c == '.')).unwrap_or(body.len());
            let (coef, name) = body.split_at(split);
            let name = name.strip_prefix('*').unwrap_or(name);
            if name.is_empty() {
                return Err(Error::Parse(format!("term `{t}` has no basis element")));
            }
            let c = if coef.is_empty() { Rat::one() } else { parse_rat(coef)? };
            Ok((if negative { -c } else { c }, name.to_string()))
        })
        .collect()
}

/// `"O"` or a line bundle `"O(a,b)"` as a rank-one sheaf type.
pub fn sheaf_literal(model: &NumericalModel, s: &str) -> Result<SheafType> {
    let c1 = parse_divisor(model, s).map_err(|_| Error::UnknownName(s.to_string()))?;
    Ok(SheafType::new(s, model.exp_class(&c1)))
}

fn sheaf_from_file(model: &NumericalModel, name: &str, f: &SheafFile) -> Result<SheafType> {
    match (&f.ch, &f.rank, &f.c1) {
        (Some(ch), None, None) => Ok(SheafType::new(name, class_from_map(model.basis(), ch)?)),
        (None, Some(rank), c1) => {
            let c1 = match c1 {
                Some(c) => parse_divisor(model, c)?,
                None => DivisorClass::zero(model.divisor_rank()),
            };
            Ok(SheafType::with_rank_c1(model, name, parse_rat(rank)?, &c1))
        }
        _ => Err(Error::Parse(format!("sheaf `{name}` needs either `ch` or `rank` (with optional `c1`)"))),
    }
}

pub fn parse_problem(text: &str, base: Option<&Path>) -> Result<Problem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| json_err("problem", e))?;
    resolve_problem(file, base)
}

pub fn load_problem(path: &Path) -> Result<Problem> {
    parse_problem(&read_file(path)?, path.parent())
}

pub fn resolve_problem(file: ProblemFile, base: Option<&Path>) -> Result<Problem> {
    let model = match &file.model {
        ModelRef::Named(s) => load_model(s, base)?,
        ModelRef::Inline(m) => model_from_file(m)?,
    };
    let report = model.validate();
    if !report.is_valid() {
        let v: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidModel(v.join("; ")));
    }
    let bundles = file
        .bundles
        .iter()
        .map(|(k, b)| Ok((k.clone(), (parse_divisor(&model, &b.class)?, b.ample))))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let sheaves = file
        .sheaves
        .iter()
        .map(|(k, s)| Ok((k.clone(), sheaf_from_file(&model, k, s)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let lookup = |name: &str| {
        sheaves.get(name).cloned().ok_or_else(|| Error::UnknownName(format!("sheaf `{name}`")))
    };
    let family = match &file.family {
        Some(f) => {
            let members = f.members.iter().map(|m| lookup(m)).collect::<Result<Vec<_>>>()?;
            Some(SubsheafFamily::new(lookup(&f.ambient)?, members))
        }
        None => None,
    };
    Ok(Problem { file, model, bundles, sheaves, family })
}

/// The problem with its model written inline, so a plan is self-contained.
pub fn inline_problem(p: &Problem) -> ProblemFile {
    ProblemFile { model: ModelRef::Inline(model_to_file(&p.model)), ..p.file.clone() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallFile {
    pub at: String,
    pub tags: Vec<(String, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub anchors: Vec<String>,
    pub intermediates: Vec<String>,
    /// Symbolic flip diagram, one arrow per interior anchor.
    pub flips: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZetaFile {
    pub s_bar: String,
    pub s0: String,
    pub s1: String,
    pub nudged: bool,
    pub lambda: Option<String>,
    pub b: Option<String>,
    pub error: Option<String>,
    /// `alpha[j][i][k]`.
    pub alpha: Option<Vec<Vec<Vec<String>>>>,
    /// Exponents `n[j][i][k]` of the zero-`c₁` twists.
    pub twist_exponents: Option<Vec<Vec<Vec<i64>>>>,
    pub walls: Vec<WallFile>,
    pub schedule: Option<ScheduleFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaFile {
    pub t_bar: String,
    pub t0: String,
    pub t1: String,
    pub nudged: bool,
    pub a: Option<u64>,
    pub error: Option<String>,
    pub walls: Vec<WallFile>,
    pub zetas: Vec<ZetaFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerFile {
    pub level: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "Lbar")]
    pub lbar: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub format: String,
    pub problem: ProblemFile,
    pub construction: KindFile,
    #[serde(rename = "L0")]
    pub l0: String,
    #[serde(rename = "L1")]
    pub l1: String,
    pub separation: String,
    pub walls: Vec<WallFile>,
    pub schedule: Option<ScheduleFile>,
    pub etas: Vec<EtaFile>,
    pub ledger: Vec<LedgerFile>,
    pub warnings: Vec<String>,
    pub verdict: String,
}

fn s(r: &Rat) -> String {
    r.to_string()
}

fn walls_file(w: &[Wall]) -> Vec<WallFile> {
    w.iter().map(|w| WallFile { at: s(&w.at), tags: w.tags.clone() }).collect()
}

fn schedule_file(sc: &Option<FlipSchedule>, var: char) -> Option<ScheduleFile> {
    sc.as_ref().map(|sc| ScheduleFile {
        anchors: sc.anchors.iter().map(s).collect(),
        intermediates: sc.intermediates.iter().map(s).collect(),
        flips: sc.anchors[1..sc.anchors.len() - 1]
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let (l, r) = (&sc.intermediates[i], &sc.intermediates[i + 1]);
                format!("M({var}={l}) -> M({var}={w}) <- M({var}={r})")
            })
            .collect(),
    })
}

pub fn ledger_file(ledger: &[LedgerEntry]) -> Vec<LedgerFile> {
    ledger
        .iter()
        .map(|e| LedgerFile { level: e.level.clone(), check: e.check.clone(), passed: e.passed, detail: e.detail.clone() })
        .collect()
}

pub fn plan_to_file(problem: &Problem, plan: &VariationPlan) -> PlanFile {
    let construction = match &plan.kind {
        PlanKind::Threefold => KindFile { kind: "threefold".into(), lbar: None, a: None },
        PlanKind::Surface { lbar, a } => KindFile { kind: "surface".into(), lbar: Some(lbar.to_string()), a: Some(*a) },
    };
    let etas = plan
        .etas
        .iter()
        .map(|e| EtaFile {
            t_bar: s(&e.t_bar),
            t0: s(&e.t0),
            t1: s(&e.t1),
            nudged: e.nudged,
            a: e.a,
            error: e.error.clone(),
            walls: walls_file(&e.walls),
            zetas: e
                .zetas
                .iter()
                .map(|z| ZetaFile {
                    s_bar: s(&z.s_bar),
                    s0: s(&z.s0),
                    s1: s(&z.s1),
                    nudged: z.nudged,
                    lambda: z.lambda.as_ref().map(s),
                    b: z.b.as_ref().map(s),
                    error: z.error.clone(),
                    alpha: z.alpha.as_ref().map(|a| a.iter().map(|x| x.iter().map(|y| y.iter().map(s).collect()).collect()).collect()),
                    twist_exponents: z.exponents.map(|n| n.iter().map(|x| x.iter().map(|y| y.to_vec()).collect()).collect()),
                    walls: walls_file(&z.walls),
                    schedule: schedule_file(&z.schedule, 'r'),
                })
                .collect(),
        })
        .collect();
    PlanFile {
        format: PLAN_FORMAT.into(),
        problem: inline_problem(problem),
        construction,
        l0: plan.l0.to_string(),
        l1: plan.l1.to_string(),
        separation: plan.separation.clone(),
        walls: walls_file(&plan.root_walls),
        schedule: schedule_file(&plan.root_schedule, 't'),
        etas,
        ledger: ledger_file(&plan.ledger),
        warnings: plan.warnings.clone(),
        verdict: plan.verdict().into(),
    }
}

pub fn plan_to_json(problem: &Problem, plan: &VariationPlan) -> String {
    let mut out = serde_json::to_string_pretty(&plan_to_file(problem, plan)).expect("plan serializes");
    out.push('\n');
    out
}

pub fn parse_plan(text: &str) -> Result<PlanFile> {
    let file: PlanFile = serde_json::from_str(text).map_err(|e| json_err("plan", e))?;
    if file.format != PLAN_FORMAT {
        return Err(Error::Parse(format!("unsupported plan format `{}`", file.format)));
    }
    Ok(file)
}

fn opt_rat(x: &Option<String>) -> Result<Option<Rat>> {
    x.as_deref().map(parse_rat).transpose()
}

/// The stored search parameters of a plan, ready for re-assembly.
pub fn plan_skeleton(model: &NumericalModel, file: &PlanFile) -> Result<VariationPlan> {
    let kind = match file.construction.kind.as_str() {
        "threefold" => PlanKind::Threefold,
        "surface" => {
            let lbar = file.construction.lbar.as_deref().ok_or_else(|| Error::Parse("surface plan without Lbar".into()))?;
            let a = file.construction.a.ok_or_else(|| Error::Parse("surface plan without a".into()))?;
            PlanKind::Surface { lbar: parse_divisor(model, lbar)?, a }
        }
        other => return Err(Error::Parse(format!("unknown construction `{other}`"))),
    };
    let etas = file
        .etas
        .iter()
        .map(|e| {
            Ok(EtaLevel {
                t_bar: parse_rat(&e.t_bar)?,
                t0: parse_rat(&e.t0)?,
                t1: parse_rat(&e.t1)?,
                nudged: e.nudged,
                a: e.a,
                error: e.error.clone(),
                walls: Vec::new(),
                zetas: e
                    .zetas
                    .iter()
                    .map(|z| {
                        Ok(ZetaLevel {
                            s_bar: parse_rat(&z.s_bar)?,
                            s0: parse_rat(&z.s0)?,
                            s1: parse_rat(&z.s1)?,
                            nudged: z.nudged,
                            lambda: opt_rat(&z.lambda)?,
                            b: opt_rat(&z.b)?,
                            error: z.error.clone(),
                            alpha: None,
                            exponents: None,
                            walls: Vec::new(),
                            schedule: None,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VariationPlan {
        kind,
        l0: parse_divisor(model, &file.l0)?,
        l1: parse_divisor(model, &file.l1)?,
        separation: String::new(),
        root_walls: Vec::new(),
        root_schedule: None,
        etas,
        ledger: Vec::new(),
        warnings: Vec::new(),
    })
}

/// Outcome of re-running a stored plan from its parameters.
#[derive(Clone, Debug)]
pub struct ReplanReport {
    pub plan: VariationPlan,
    pub document: String,
    pub ledger_identical: bool,
    pub document_identical: bool,
    /// First ledger line that differs, stored then regenerated.
    pub first_difference: Option<(String, String)>,
}

fn ledger_lines(ledger: &[LedgerFile]) -> Vec<String> {
    ledger.iter().map(|e| serde_json::to_string(e).expect("ledger serializes")).collect()
}

/// Rebuilds every level from the stored parameters and compares ledgers.
pub fn replan(text: &str) -> Result<ReplanReport> {
    let stored = parse_plan(text)?;
    let problem = resolve_problem(stored.problem.clone(), None)?;
    let fam = problem.family()?;
    let skeleton = plan_skeleton(&problem.model, &stored)?;
    let plan = crate::plan::assemble(&problem.model, fam, &skeleton)?;
    let document = plan_to_json(&problem, &plan);
    let (old, new) = (ledger_lines(&stored.ledger), ledger_lines(&ledger_file(&plan.ledger)));
    let first_difference = (0..old.len().max(new.len())).find_map(|i| {
        let (a, b) = (old.get(i).cloned().unwrap_or_default(), new.get(i).cloned().unwrap_or_default());
        (a != b).then_some((a, b))
    });
    Ok(ReplanReport {
        ledger_identical: first_difference.is_none(),
        document_identical: document == text,
        plan,
        document,
        first_difference,
    })
}
