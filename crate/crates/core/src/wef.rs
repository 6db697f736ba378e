//! The common output of both encoders.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wefc_lp::{LPSystem, VarId};

/// Constraint family a row was generated by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    /// One gate of a circuit encoding.
    Gate,
    /// Pins initial memory.
    C,
    /// Pins the first executed line.
    D,
    /// Exactly one line per time step.
    E,
    /// Control flow.
    F,
    /// Memory updates.
    G,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Group::Gate => "gate",
            Group::C => "C",
            Group::D => "D",
            Group::E => "E",
            Group::F => "F",
            Group::G => "G",
        };
        f.write_str(s)
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "gate" => Group::Gate,
            "C" => Group::C,
            "D" => Group::D,
            "E" => Group::E,
            "F" => Group::F,
            "G" => Group::G,
            other => return Err(format!("unknown group `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowTag {
    pub group: Group,
    pub detail: String,
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.detail.is_empty() {
            write!(f, "{}", self.group)
        } else {
            write!(f, "{} {}", self.group, self.detail)
        }
    }
}

impl FromStr for RowTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (group, detail) = s.split_once(' ').unwrap_or((s, ""));
        Ok(RowTag { group: group.parse()?, detail: detail.to_string() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stats {
    pub num_constraints: usize,
    pub num_vars: usize,
    pub per_group: BTreeMap<Group, usize>,
}

/// An LP system together with its designated input and output variables.
#[derive(Debug, Clone)]
pub struct WefSystem {
    pub lp: LPSystem,
    pub x_vars: Vec<VarId>,
    pub w_var: VarId,
    /// One tag per constraint, in constraint order.
    pub tags: Vec<RowTag>,
}

impl WefSystem {
    pub fn stats(&self) -> Stats {
        let mut per_group = BTreeMap::new();
        for t in &self.tags {
            *per_group.entry(t.group).or_insert(0) += 1;
        }
        Stats { num_constraints: self.lp.num_constraints(), num_vars: self.lp.num_vars(), per_group }
    }

    pub fn tag_strings(&self) -> Vec<String> {
        self.tags.iter().map(ToString::to_string).collect()
    }

    /// Drops one constraint, keeping tags aligned. Used by negative controls.
    pub fn without_constraint(&self, index: usize) -> WefSystem {
        let mut out = self.clone();
        out.lp.remove_constraint(index);
        out.tags.remove(index);
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WefFileError {
    #[error("malformed WEF file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Lp(#[from] wefc_lp::LpError),
    #[error("row {row}: {msg}")]
    Tag { row: usize, msg: String },
    #[error("variable index {0} out of range")]
    VarRange(usize),
}

#[derive(Serialize, Deserialize)]
struct WefFile {
    x_vars: Vec<usize>,
    w_var: usize,
    system: serde_json::Value,
}

impl WefSystem {
    /// JSON holding the lossless LP dump plus the input and output designations.
    pub fn to_json(&self) -> String {
        let system = wefc_lp::to_json(&self.lp, None, Some(&self.tag_strings()));
        let file = WefFile {
            x_vars: self.x_vars.iter().map(|v| v.index()).collect(),
            w_var: self.w_var.index(),
            system: serde_json::from_str(&system).expect("dump is JSON"),
        };
        serde_json::to_string_pretty(&file).expect("serializes")
    }

    pub fn from_json(text: &str) -> Result<WefSystem, WefFileError> {
        let file: WefFile = serde_json::from_str(text)?;
        let loaded = wefc_lp::from_json(&file.system.to_string())?;
        let n = loaded.system.num_vars();
        if let Some(&bad) = file.x_vars.iter().chain([&file.w_var]).find(|&&v| v >= n) {
            return Err(WefFileError::VarRange(bad));
        }
        let tags = loaded
            .tags
            .iter()
            .enumerate()
            .map(|(row, t)| {
                let t = t.as_deref().ok_or_else(|| WefFileError::Tag { row, msg: "missing tag".into() })?;
                t.parse().map_err(|msg| WefFileError::Tag { row, msg })
            })
            .collect::<Result<Vec<RowTag>, _>>()?;
        Ok(WefSystem {
            lp: loaded.system,
            x_vars: file.x_vars.into_iter().map(VarId).collect(),
            w_var: VarId(file.w_var),
            tags,
        })
    }
}
