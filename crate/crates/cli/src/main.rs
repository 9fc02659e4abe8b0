//! `mgs`: exact multi-Gieseker stability from the command line.
//!
//! Exit status is 0 on success, 1 when a check fails and 2 on bad input.

#![allow(clippy::result_large_err, clippy::large_enum_variant)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::One;

use multigieseker::chow::DivisorClass;
use multigieseker::exact::{parse_rat, LinScalar, Rat};
use multigieseker::io::{self, plot, Problem};
use multigieseker::plan::{build_plan, default_window, flip_schedule, surface_plan, surface_segment, FlipSchedule, VariationPlan};
use multigieseker::segments::{make_eta, make_sigma, make_zeta, search_a, search_b, EtaSegment, SigmaSegment, ZetaSegment};
use multigieseker::sheaves::{euler_characteristic, FormalBundleSum};
use multigieseker::stability::{
    equivalent_at, is_open, is_uniform, FamilyProfile, StabilitySegment, SubsheafFamily, UniformityMode,
};
use multigieseker::walls::{classify_separation, is_general, segment_walls, walls_on_ample_line};
use multigieseker::Error;

#[derive(Parser)]
#[command(name = "mgs", version, about = "Exact multi-Gieseker stability, walls and flip schedules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model or problem file.
    Validate { file: PathBuf },
    /// Euler characteristic χ(E ⊗ L^k).
    Chi {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long, default_value = "O")]
        sheaf: String,
        #[arg(long = "L")]
        l: String,
        /// Omit to print χ as a polynomial in k.
        #[arg(long)]
        k: Option<String>,
    },
    /// Walls of every family member along the ample line from L0 to L1.
    Walls(LineArgs),
    /// Chamber decomposition of a segment.
    Chambers(LevelArgs),
    /// Build and print a segment with its difference vectors.
    Segment {
        #[arg(value_enum)]
        kind: Level,
        #[command(flatten)]
        level: LevelArgs,
    },
    /// Check a segment property.
    Verify {
        #[arg(value_enum)]
        property: Property,
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long, value_enum, default_value = "difference")]
        mode: Mode,
        /// First parameter for `equiv`.
        #[arg(long)]
        at: Option<String>,
        /// Second parameter for `equiv`.
        #[arg(long)]
        with: Option<String>,
    },
    /// Flip schedule of a difference-uniform segment.
    Schedule {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long)]
        lo: Option<String>,
        #[arg(long)]
        hi: Option<String>,
    },
    /// Run the full σ → η → ζ construction and write the plan document.
    Plan {
        #[command(flatten)]
        line: LineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a stored plan from its parameters.
    Replan {
        plan: PathBuf,
        /// Compare the regenerated ledger with the stored one.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the uniform segment on a surface and its schedule.
    SurfacePlan {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write plot data for a segment or an ample line.
    Plot {
        #[command(flatten)]
        level: LevelArgs,
        /// Plot the wall functions along the ample line instead.
        #[arg(long)]
        line: bool,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
}

#[derive(Args, Clone)]
struct LineArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long = "L0")]
    l0: Option<String>,
    #[arg(long = "L1")]
    l1: Option<String>,
}

#[derive(Args, Clone)]
struct LevelArgs {
    #[command(flatten)]
    line: LineArgs,
    /// Segment to work on; `surface` uses the problem's surface section.
    #[arg(long, value_enum, default_value = "sigma")]
    level: Level,
    #[arg(long)]
    t_bar: Option<String>,
    #[arg(long)]
    t0: Option<String>,
    #[arg(long)]
    t1: Option<String>,
    #[arg(long)]
    a: Option<u64>,
    #[arg(long)]
    s_bar: Option<String>,
    #[arg(long)]
    s0: Option<String>,
    #[arg(long)]
    s1: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    b: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Level {
    Sigma,
    Eta,
    Zeta,
    Surface,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Uniform,
    Open,
    Equiv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strict,
    Difference,
}

enum Failure {
    Check(String),
    Input(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn check(ok: bool, what: impl Into<String>) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::Check(what.into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn opt_rat(s: &Option<String>) -> Result<Option<Rat>, Error> {
    s.as_deref().map(parse_rat).transpose()
}

fn write_out(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// A named bundle of the problem (ample or not) or a divisor literal.
fn divisor(p: &Problem, name: &str) -> Result<DivisorClass, Error> {
    match p.bundles.get(name) {
        Some((c, _)) => Ok(c.clone()),
        None => io::parse_divisor(&p.model, name),
    }
}

fn endpoints(p: &Problem, line: &LineArgs) -> Result<(DivisorClass, DivisorClass), Error> {
    let request = p.file.plan.as_ref();
    let pick = |given: &Option<String>, stored: Option<&String>, which: &str| {
        given
            .as_ref()
            .or(stored)
            .cloned()
            .ok_or_else(|| Error::Parse(format!("no {which}: pass --{which} or add a `plan` section")))
    };
    let l0 = pick(&line.l0, request.map(|r| &r.l0), "L0")?;
    let l1 = pick(&line.l1, request.map(|r| &r.l1), "L1")?;
    Ok((p.polarisation(&l0)?, p.polarisation(&l1)?))
}

enum Built {
    Sigma(SigmaSegment),
    Eta(EtaSegment),
    Zeta(ZetaSegment),
    Surface(StabilitySegment),
}

impl Built {
    fn segment(&self) -> &StabilitySegment {
        match self {
            Built::Sigma(s) => &s.segment,
            Built::Eta(e) => &e.segment,
            Built::Zeta(z) => &z.segment,
            Built::Surface(s) => s,
        }
    }

    fn var(&self) -> char {
        self.segment().var
    }
}

/// The wall and flanking chamber representatives, defaulting to the first wall.
fn around_wall(
    walls: &multigieseker::walls::ChamberDecomposition,
    bar: &Option<String>,
    lo: &Option<String>,
    hi: &Option<String>,
    what: &str,
) -> Result<(Rat, Rat, Rat), Error> {
    let bar = match opt_rat(bar)? {
        Some(v) => v,
        None => walls
            .walls
            .first()
            .map(|w| w.at.clone())
            .ok_or_else(|| Error::Precondition(format!("the {what} segment has no wall to zoom into")))?,
    };
    let pos = walls.walls.iter().position(|w| w.at == bar);
    let default = |side: usize| pos.map(|k| walls.representatives[k + side].clone());
    let lo = opt_rat(lo)?.or_else(|| default(0));
    let hi = opt_rat(hi)?.or_else(|| default(1));
    match (lo, hi) {
        (Some(lo), Some(hi)) => Ok((bar, lo, hi)),
        _ => Err(Error::Precondition(format!("{bar} is not a wall of the {what} segment; give both flanks"))),
    }
}

fn build(p: &Problem, args: &LevelArgs, level: Level) -> Result<Built, Error> {
    let fam = p.family()?;
    if level == Level::Surface {
        let req = p.file.surface.as_ref().ok_or_else(|| Error::Parse("problem has no `surface` section".into()))?;
        let seg = surface_segment(
            &p.model,
            &p.polarisation(&req.l0)?,
            &p.polarisation(&req.l1)?,
            &p.polarisation(&req.lbar)?,
            req.a,
        )?;
        return Ok(Built::Surface(seg));
    }
    let (l0, l1) = endpoints(p, &args.line)?;
    let sigma = make_sigma(&p.model, &l0, &l1)?;
    if level == Level::Sigma {
        return Ok(Built::Sigma(sigma));
    }
    let walls = segment_walls(&p.model, &sigma.segment, fam)?;
    let (t_bar, t0, t1) = around_wall(&walls, &args.t_bar, &args.t0, &args.t1, "sigma")?;
    let eta = match args.a {
        Some(a) => make_eta(&p.model, &sigma, &walls, &t_bar, &t0, &t1, a)?,
        None => search_a(&p.model, &sigma, &walls, fam, &t_bar, &t0, &t1)?,
    };
    if level == Level::Eta {
        return Ok(Built::Eta(eta));
    }
    let walls = segment_walls(&p.model, &eta.segment, fam)?;
    let (s_bar, s0, s1) = around_wall(&walls, &args.s_bar, &args.s0, &args.s1, "eta")?;
    let lambda = opt_rat(&args.lambda)?;
    let zeta = match opt_rat(&args.b)? {
        Some(b) => make_zeta(&p.model, &eta, &s_bar, &s0, &s1, lambda.as_ref(), &b)?,
        None => search_b(&p.model, &eta, fam, &s_bar, &s0, &s1, lambda.as_ref())?,
    };
    Ok(Built::Zeta(zeta))
}

fn print_plan(plan: &VariationPlan) {
    for e in &plan.ledger {
        println!("[{}] {}: {} ({})", if e.passed { "PASS" } else { "FAIL" }, e.level, e.check, e.detail);
    }
    let show = |label: String, s: &Option<FlipSchedule>| {
        if let Some(s) = s {
            let anchors: Vec<String> = s.anchors.iter().map(ToString::to_string).collect();
            println!("{label} schedule: [{}], {} flips", anchors.join(", "), s.flips());
        }
    };
    show("root".into(), &plan.root_schedule);
    for e in &plan.etas {
        if let Some(a) = e.a {
            println!("eta t={}: a = {a}, flanks ({}, {})", e.t_bar, e.t0, e.t1);
        }
        for z in &e.zetas {
            show(format!("zeta t={} s={}", e.t_bar, z.s_bar), &z.schedule);
        }
    }
    for w in &plan.warnings {
        println!("warning: {w}");
    }
    println!("{}", plan.verdict());
}

fn finish_plan(p: &Problem, plan: &VariationPlan, out: &Option<PathBuf>) -> Outcome {
    if let Some(path) = out {
        write_out(path, &io::plan_to_json(p, plan))?;
    }
    print_plan(plan);
    let failures: Vec<String> = plan.failures().map(|e| format!("{}: {}", e.level, e.check)).collect();
    check(plan.complete(), failures.join("; "))
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { file } => {
            let text = io::read_file(&file)?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
            if value.get("model").is_some() {
                let p = io::parse_problem(&text, file.parent())?;
                println!("model valid");
                println!("problem valid: {} bundles, {} sheaves", p.bundles.len(), p.sheaves.len());
                for w in p.family.iter().flat_map(SubsheafFamily::warnings) {
                    println!("warning: {w}");
                }
                return Ok(());
            }
            let model = io::parse_model(&text)?;
            let report = model.validate();
            for v in &report.violations {
                println!("{v}");
            }
            check(report.is_valid(), "model axioms")?;
            println!("model valid");
            Ok(())
        }
        Command::Chi { model, problem, sheaf, l, k } => {
            let p = match (&model, &problem) {
                (_, Some(path)) => io::load_problem(path)?,
                (Some(m), None) => io::resolve_problem(
                    io::ProblemFile {
                        model: io::ModelRef::Named(m.clone()),
                        bundles: Default::default(),
                        sheaves: Default::default(),
                        family: None,
                        plan: None,
                        surface: None,
                    },
                    None,
                )?,
                (None, None) => return Err(Error::Parse("pass --model or --problem".into()).into()),
            };
            let e = p.sheaf(&sheaf)?;
            let l = divisor(&p, &l)?;
            let one = FormalBundleSum::trivial(LinScalar::constant(Rat::one()), p.model.divisor_rank());
            let chi = euler_characteristic(&p.model, &e, &l, &one)?;
            match opt_rat(&k)? {
                Some(k) => println!("{}", chi.eval(&k)),
                None => println!("{chi}"),
            }
            Ok(())
        }
        Command::Walls(line) => {
            let p = io::load_problem(&line.problem)?;
            let fam = p.family()?;
            let (l0, l1) = endpoints(&p, &line)?;
            let d = p.model.dim();
            for f in fam.effective_members() {
                for i in 1..=d {
                    let roots = walls_on_ample_line(&p.model, f, &fam.ambient, &l0, &l1, i);
                    let mut parts: Vec<String> = roots.exact_roots.iter().map(ToString::to_string).collect();
                    parts.extend(roots.irrational_root_intervals.iter().map(|(a, b)| format!("({a}, {b})")));
                    let listed = if roots.identically_zero { "identically zero".into() } else { parts.join(", ") };
                    println!("{}[{i}]: {{{listed}}}", f.name);
                }
            }
            for (name, l) in [("L0", &l0), ("L1", &l1)] {
                let g = is_general(&p.model, l, fam);
                match g.witness {
                    Some((m, i)) => println!("{name} = {l}: on a wall of {m}[{i}]"),
                    None => println!("{name} = {l}: general"),
                }
            }
            let sep = classify_separation(&p.model, fam, &l0, &l1);
            println!("separation: {} crossings {:?}", sep.verdict, sep.crossings);
            Ok(())
        }
        Command::Chambers(args) => {
            let p = io::load_problem(&args.line.problem)?;
            let fam = p.family()?;
            let built = build(&p, &args, args.level)?;
            let profile = FamilyProfile::new(&p.model, fam, built.segment())?;
            let dec = multigieseker::walls::profile_walls(&profile)?;
            let var = built.var();
            for w in &dec.walls {
                let tags: Vec<String> = w.tags.iter().map(|(n, i)| format!("{n}[{i}]")).collect();
                println!("wall {var}={} [{}] {}", w.at, tags.join(" "), profile.verdict_at(&w.at).as_str());
            }
            for ((lo, hi), rep) in dec.chambers.iter().zip(&dec.representatives) {
                println!("chamber ({lo}, {hi}) at {var}={rep}: {}", profile.verdict_at(rep).as_str());
            }
            Ok(())
        }
        Command::Segment { kind, level } => {
            let p = io::load_problem(&level.line.problem)?;
            let fam = p.family()?;
            let built = build(&p, &level, kind)?;
            match &built {
                Built::Eta(e) => println!("a = {}, exponents {:?}", e.a, e.exponents),
                Built::Zeta(z) => {
                    println!("lambda = {}, b = {}, lambda_min = {}", z.lambda(), z.b(), z.solution.lambda_min);
                    for (j, row) in z.solution.alpha.iter().enumerate() {
                        for (i, col) in row.iter().enumerate() {
                            let vals: Vec<String> = col.iter().map(ToString::to_string).collect();
                            println!("alpha[{j}][{i}] = ({})", vals.join(", "));
                        }
                    }
                }
                _ => {}
            }
            println!("{}", built.segment());
            let profile = FamilyProfile::new(&p.model, fam, built.segment())?;
            for (name, v) in &profile.vectors {
                let entries: Vec<String> = v.entries.iter().map(ToString::to_string).collect();
                println!("{name}: <<{}>>", entries.join(" || "));
            }
            Ok(())
        }
        Command::Verify { property, level, mode, at, with } => {
            let p = io::load_problem(&level.line.problem)?;
            let fam = p.family()?;
            let built = build(&p, &level, level.level)?;
            let seg = built.segment();
            match property {
                Property::Uniform => {
                    let mode = match mode {
                        Mode::Strict => UniformityMode::Strict,
                        Mode::Difference => UniformityMode::Difference,
                    };
                    let report = is_uniform(&p.model, seg, mode)?;
                    match &report.witness {
                        None => println!("uniform"),
                        Some(w) => println!("not uniform: {w}"),
                    }
                    check(report.is_uniform(), "uniformity")
                }
                Property::Open => {
                    let report = is_open(&p.model, fam, seg)?;
                    match &report.witness {
                        None => println!("open"),
                        Some(w) => println!("not open: {w}"),
                    }
                    check(report.equivalent, "openness")
                }
                Property::Equiv => {
                    let v1 = opt_rat(&at)?.ok_or_else(|| Error::Parse("equiv needs --at".into()))?;
                    let v2 = opt_rat(&with)?.ok_or_else(|| Error::Parse("equiv needs --with".into()))?;
                    let report = equivalent_at(&p.model, fam, seg, &v1, &v2)?;
                    match &report.witness {
                        None => println!("equivalent"),
                        Some(w) => println!("not equivalent: {w} changes sign"),
                    }
                    check(report.equivalent, "equivalence")
                }
            }
        }
        Command::Schedule { level, lo, hi } => {
            let p = io::load_problem(&level.line.problem)?;
            let fam = p.family()?;
            let built = build(&p, &level, level.level)?;
            let walls = segment_walls(&p.model, built.segment(), fam)?;
            let (dlo, dhi) = default_window(&walls.wall_points());
            let lo = opt_rat(&lo)?.unwrap_or(dlo);
            let hi = opt_rat(&hi)?.unwrap_or(dhi);
            let schedule = match flip_schedule(&p.model, built.segment(), fam, &lo, &hi) {
                Ok(s) => s,
                Err(Error::NotUniform(w)) => return Err(Failure::Check(format!("segment is not difference-uniform: {w}"))),
                Err(e) => return Err(e.into()),
            };
            let show = |v: &[Rat]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
            println!("anchors: [{}]", show(&schedule.anchors));
            println!("intermediates: [{}]", show(&schedule.intermediates));
            println!("flips: {}", schedule.flips());
            Ok(())
        }
        Command::Plan { line, out } => {
            let p = io::load_problem(&line.problem)?;
            let (l0, l1) = endpoints(&p, &line)?;
            let plan = build_plan(&p.model, p.family()?, &l0, &l1)?;
            finish_plan(&p, &plan, &out)
        }
        Command::Replan { plan, verify, out } => {
            let text = io::read_file(&plan)?;
            let report = io::replan(&text)?;
            if let Some(path) = &out {
                write_out(path, &report.document)?;
            }
            print_plan(&report.plan);
            if !verify {
                return check(report.plan.complete(), "plan incomplete");
            }
            if let Some((old, new)) = &report.first_difference {
                println!("stored:      {old}");
                println!("regenerated: {new}");
            }
            println!("ledger {}", if report.ledger_identical { "identical" } else { "differs" });
            println!("document {}", if report.document_identical { "identical" } else { "differs" });
            check(report.ledger_identical && report.plan.complete(), "replan verification")
        }
        Command::SurfacePlan { problem, out } => {
            let p = io::load_problem(&problem)?;
            let req = p.file.surface.as_ref().ok_or_else(|| Error::Parse("problem has no `surface` section".into()))?;
            let plan = surface_plan(
                &p.model,
                p.family()?,
                &p.polarisation(&req.l0)?,
                &p.polarisation(&req.l1)?,
                &p.polarisation(&req.lbar)?,
                req.a,
            )?;
            finish_plan(&p, &plan, &out)
        }
        Command::Plot { level, line, csv, svg, steps } => {
            let p = io::load_problem(&level.line.problem)?;
            let fam = p.family()?;
            if line {
                let (l0, l1) = endpoints(&p, &level.line)?;
                write_out(&csv, &plot::line_csv(&p.model, fam, &l0, &l1, steps))?;
                return Ok(());
            }
            let built = build(&p, &level, level.level)?;
            let profile = FamilyProfile::new(&p.model, fam, built.segment())?;
            let walls = multigieseker::walls::profile_walls(&profile)?;
            write_out(&csv, &plot::segment_csv(&profile, &walls, built.var(), steps))?;
            if let Some(path) = svg {
                write_out(&path, &plot::wall_svg(&walls, built.var()))?;
            }
            Ok(())
        }
    }
}
