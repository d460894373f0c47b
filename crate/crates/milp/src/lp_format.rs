//! CPLEX-style LP file export, for inspecting models with external tools.

use std::fmt::Write;

use crate::model::{Cmp, MilpModel, ObjSense, VarKind};

fn sanitize(name: &str, fallback: usize, prefix: char) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        s = format!("{prefix}{fallback}_{s}");
    }
    s
}

fn write_terms(out: &mut String, terms: &[(crate::VarId, f64)], names: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&names.first().cloned().unwrap_or_default());
        return;
    }
    for (k, &(v, c)) in terms.iter().enumerate() {
        let sign = if c < 0.0 { '-' } else { '+' };
        if k == 0 && c >= 0.0 {
            write!(out, " {} {}", c.abs(), names[v.index()]).unwrap();
        } else {
            write!(out, " {} {} {}", sign, c.abs(), names[v.index()]).unwrap();
        }
    }
}

fn fmt_bound(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

/// Renders `model` in LP syntax. The objective constant is emitted as a
/// comment since not every reader accepts constant objective terms.
pub fn to_lp_string(model: &MilpModel) -> String {
    let names: Vec<String> = model
        .vars
        .iter()
        .enumerate()
        .map(|(i, v)| sanitize(&v.name, i, 'x'))
        .collect();
    let mut out = String::new();
    writeln!(out, "\\ model {}", model.name).unwrap();
    if model.objective.constant != 0.0 {
        writeln!(out, "\\ objective constant {}", model.objective.constant).unwrap();
    }
    out.push_str(match model.sense {
        ObjSense::Minimize => "Minimize\n",
        ObjSense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    if model.objective.terms.is_empty() && names.is_empty() {
        out.push_str(" 0");
    } else {
        write_terms(&mut out, &model.objective.terms, &names);
    }
    out.push_str("\nSubject To\n");
    for (i, c) in model.constraints.iter().enumerate() {
        write!(out, " {}:", sanitize(&c.name, i, 'c')).unwrap();
        write_terms(&mut out, &c.terms, &names);
        let op = match c.cmp {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        };
        writeln!(out, " {op} {}", c.rhs).unwrap();
    }
    out.push_str("Bounds\n");
    for (v, name) in model.vars.iter().zip(&names) {
        if v.kind == VarKind::Binary {
            continue;
        }
        if v.lo == f64::NEG_INFINITY && v.hi == f64::INFINITY {
            writeln!(out, " {name} free").unwrap();
        } else {
            writeln!(out, " {} <= {name} <= {}", fmt_bound(v.lo), fmt_bound(v.hi)).unwrap();
        }
    }
    let generals: Vec<&String> = model
        .vars
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Integer)
        .map(|(_, n)| n)
        .collect();
    if !generals.is_empty() {
        out.push_str("General\n");
        for n in generals {
            writeln!(out, " {n}").unwrap();
        }
    }
    let binaries: Vec<&String> = model
        .vars
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for n in binaries {
            writeln!(out, " {n}").unwrap();
        }
    }
    out.push_str("End\n");
    out
}
