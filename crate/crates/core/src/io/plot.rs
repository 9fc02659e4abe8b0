//! CSV and SVG renderings of walls along segments and lines.

use std::fmt::Write;

use crate::chow::{DivisorClass, NumericalModel};
use crate::exact::{int, plot_string, to_f64, Rat};
use crate::stability::{FamilyProfile, SubsheafFamily};
use crate::walls::{ChamberDecomposition, WallFunction};

fn sample_points(steps: usize, walls: &[Rat]) -> Vec<Rat> {
    let steps = steps.max(1);
    let mut pts: Vec<Rat> = (0..=steps).map(|i| int(i as i64) / int(steps as i64)).collect();
    pts.extend(walls.iter().cloned());
    pts.sort();
    pts.dedup();
    pts
}

/// One row per sample of the segment parameter: every difference-vector
/// entry of every member, the verdict, and `1` in the last column at walls.
pub fn segment_csv(profile: &FamilyProfile, walls: &ChamberDecomposition, var: char, steps: usize) -> String {
    let wall_points = walls.wall_points();
    let mut out = String::from(var);
    for (name, v) in &profile.vectors {
        for i in 0..v.entries.len() {
            write!(out, ",{name}[{}]", i + 1).unwrap();
        }
    }
    out.push_str(",verdict,wall\n");
    for x in sample_points(steps, &wall_points) {
        out.push_str(&plot_string(&x));
        for (_, v) in &profile.vectors {
            for e in v.at(&x) {
                write!(out, ",{}", plot_string(&e)).unwrap();
            }
        }
        let wall = u8::from(wall_points.contains(&x));
        writeln!(out, ",{},{wall}", profile.verdict_at(&x).as_str()).unwrap();
    }
    out
}

/// Wall functions `β_i` of every member along `(1-u)L0 + uL1`.
pub fn line_csv(
    model: &NumericalModel,
    fam: &SubsheafFamily,
    l0: &DivisorClass,
    l1: &DivisorClass,
    steps: usize,
) -> String {
    let d = model.dim();
    let fns: Vec<WallFunction> = fam
        .effective_members()
        .flat_map(|f| (1..=d).map(move |i| (f, i)))
        .map(|(f, i)| WallFunction::new(model, f, &fam.ambient, i))
        .collect();
    let polys: Vec<_> = fns.iter().map(|w| w.on_line(model, l0, l1)).collect();
    let mut out = String::from("u");
    for w in &fns {
        write!(out, ",{}[{}]", w.subsheaf, w.index).unwrap();
    }
    out.push_str(",wall\n");
    for x in sample_points(steps, &[]) {
        out.push_str(&plot_string(&x));
        let mut wall = false;
        for p in &polys {
            let y = p.eval(&x);
            wall |= num::Zero::is_zero(&y) && !p.is_zero();
            write!(out, ",{}", plot_string(&y)).unwrap();
        }
        writeln!(out, ",{}", u8::from(wall)).unwrap();
    }
    out
}

/// The unit interval with walls marked and chambers labelled.
pub fn wall_svg(walls: &ChamberDecomposition, var: char) -> String {
    let (w, h, margin) = (640.0, 120.0, 40.0);
    let x = |r: &Rat| margin + to_f64(r) * (w - 2.0 * margin);
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    writeln!(out, r#"<line x1="{margin}" y1="60" x2="{}" y2="60" stroke="black"/>"#, w - margin).unwrap();
    for (end, label) in [(int(0), "0"), (int(1), "1")] {
        writeln!(out, r#"<text x="{:.2}" y="90" text-anchor="middle">{var}={label}</text>"#, x(&end)).unwrap();
    }
    for wall in &walls.walls {
        let px = x(&wall.at);
        let tags: Vec<String> = wall.tags.iter().map(|(n, i)| format!("{n}[{i}]")).collect();
        writeln!(out, r#"<line x1="{px:.2}" y1="40" x2="{px:.2}" y2="80" stroke="red"/>"#).unwrap();
        writeln!(out, r#"<text x="{px:.2}" y="30" text-anchor="middle" font-size="11">{}</text>"#, wall.at).unwrap();
        writeln!(out, r#"<title>{}</title>"#, tags.join(" ")).unwrap();
    }
    for (i, (lo, hi)) in walls.chambers.iter().enumerate() {
        let px = (x(lo) + x(hi)) / 2.0;
        writeln!(out, r#"<text x="{px:.2}" y="55" text-anchor="middle" font-size="11">C{i}</text>"#).unwrap();
    }
    out.push_str("</svg>\n");
    out
}
