//! Text and JSON serializations of a system.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::LpError;
use crate::rat::Rat;
use crate::system::{Bounds, LPSystem, LinConstraint, Objective, Sense, VarId};

/// How coefficients are printed in LP text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RationalStyle {
    /// Decimal when exact; otherwise a 12-digit approximation followed by a
    /// comment carrying the exact fraction.
    #[default]
    Decimal,
    Fraction,
}

fn fmt_num(v: &Rat, style: RationalStyle, inexact: &mut Vec<String>) -> String {
    match style {
        RationalStyle::Fraction => v.to_string(),
        RationalStyle::Decimal => match v.to_exact_decimal() {
            Some(s) => s,
            None => {
                inexact.push(v.to_string());
                format!("{:.12}", v.to_f64())
            }
        },
    }
}

fn fmt_terms(
    terms: &[(VarId, Rat)],
    names: &[String],
    style: RationalStyle,
    inexact: &mut Vec<String>,
) -> String {
    let mut out = String::new();
    for (i, (v, c)) in terms.iter().enumerate() {
        let sign = if c.is_negative() { "-" } else { "+" };
        if i == 0 {
            if c.is_negative() {
                out.push_str("- ");
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        let mag = c.abs();
        if !mag.is_one() {
            out.push_str(&fmt_num(&mag, style, inexact));
            out.push(' ');
        }
        out.push_str(&names[v.0]);
    }
    out
}

/// Writes CPLEX-style LP text. `tags`, when given, labels each row with a
/// comment naming the group it came from; a tag change starts a new block.
pub fn to_lp_text(
    system: &LPSystem,
    objective: Option<&Objective>,
    tags: Option<&[String]>,
    style: RationalStyle,
) -> String {
    let names = system.names();
    let mut out = String::new();
    let mut inexact = Vec::new();
    out.push_str("Maximize\n obj: ");
    match objective {
        Some(obj) if !obj.terms().is_empty() => {
            out.push_str(&fmt_terms(obj.terms(), names, style, &mut inexact));
        }
        _ => out.push('0'),
    }
    out.push('\n');
    flush_inexact(&mut out, &mut inexact);
    out.push_str("Subject To\n");
    let mut last_tag: Option<&str> = None;
    for (i, c) in system.constraints().iter().enumerate() {
        if let Some(tags) = tags {
            let tag = tags.get(i).map(String::as_str).unwrap_or("");
            if last_tag != Some(tag) {
                let _ = writeln!(out, "\\ {tag}");
                last_tag = Some(tag);
            }
        }
        let lhs = fmt_terms(c.terms(), names, style, &mut inexact);
        let rhs = fmt_num(&c.rhs, style, &mut inexact);
        let _ = writeln!(out, " c{i}: {lhs} {} {rhs}", c.sense.symbol());
        flush_inexact(&mut out, &mut inexact);
    }
    out.push_str("Bounds\n");
    for (j, b) in system.all_bounds().iter().enumerate() {
        let name = &names[j];
        let line = match (&b.lower, &b.upper) {
            (None, None) => format!(" {name} free"),
            (Some(l), Some(u)) if l == u => format!(" {name} = {}", fmt_num(l, style, &mut inexact)),
            (Some(l), Some(u)) => format!(
                " {} <= {name} <= {}",
                fmt_num(l, style, &mut inexact),
                fmt_num(u, style, &mut inexact)
            ),
            (Some(l), None) => format!(" {name} >= {}", fmt_num(l, style, &mut inexact)),
            (None, Some(u)) => format!(" -inf <= {name} <= {}", fmt_num(u, style, &mut inexact)),
        };
        out.push_str(&line);
        out.push('\n');
        flush_inexact(&mut out, &mut inexact);
    }
    out.push_str("End\n");
    out
}

fn flush_inexact(out: &mut String, inexact: &mut Vec<String>) {
    if !inexact.is_empty() {
        let _ = writeln!(out, " \\ exact: {}", inexact.join(", "));
        inexact.clear();
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
struct VarDump {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lower: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    upper: Option<Rat>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
struct RowDump {
    terms: Vec<(VarId, Rat)>,
    sense: Sense,
    rhs: Rat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tag: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
struct SystemDump {
    vars: Vec<VarDump>,
    rows: Vec<RowDump>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    objective: Option<Vec<(VarId, Rat)>>,
}

/// Lossless JSON dump. Rationals are strings of the form `p` or `p/q`.
pub fn to_json(system: &LPSystem, objective: Option<&Objective>, tags: Option<&[String]>) -> String {
    let dump = SystemDump {
        vars: system
            .names()
            .iter()
            .zip(system.all_bounds())
            .map(|(n, b)| VarDump { name: n.clone(), lower: b.lower.clone(), upper: b.upper.clone() })
            .collect(),
        rows: system
            .constraints()
            .iter()
            .enumerate()
            .map(|(i, c)| RowDump {
                terms: c.terms().to_vec(),
                sense: c.sense,
                rhs: c.rhs.clone(),
                tag: tags.and_then(|t| t.get(i).cloned()),
            })
            .collect(),
        objective: objective.map(|o| o.terms().to_vec()),
    };
    serde_json::to_string_pretty(&dump).expect("dump serializes")
}

/// Parsed form of [`to_json`] output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedSystem {
    pub system: LPSystem,
    pub objective: Option<Objective>,
    pub tags: Vec<Option<String>>,
}

pub fn from_json(text: &str) -> Result<LoadedSystem, LpError> {
    let dump: SystemDump = serde_json::from_str(text).map_err(|e| LpError::Dump(e.to_string()))?;
    let mut system = LPSystem::new();
    for v in dump.vars {
        let b = Bounds { lower: v.lower, upper: v.upper };
        if !b.is_consistent() {
            return Err(LpError::InvertedBounds(v.name));
        }
        system.add_var_with_bounds(v.name, b);
    }
    let mut tags = Vec::with_capacity(dump.rows.len());
    for r in dump.rows {
        let c = LinConstraint::new(r.terms, r.sense, r.rhs)?;
        system.add_constraint(c)?;
        tags.push(r.tag);
    }
    let objective = match dump.objective {
        Some(terms) => {
            if let Some((v, _)) = terms.iter().find(|(v, _)| v.0 >= system.num_vars()) {
                return Err(LpError::UnknownVar(v.0));
            }
            Some(Objective::maximize(terms))
        }
        None => None,
    };
    Ok(LoadedSystem { system, objective, tags })
}
