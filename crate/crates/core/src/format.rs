//! Family file formats.
//!
//! Text:
//!
//! ```text
//! # comment
//! x=6
//! 0 1
//! 2 3
//! -
//! ```
//!
//! The header `x=<ground_size>` comes first; each following line is one set as
//! space-separated element indices, `-` denotes the empty set, `#` starts a comment
//! and blank lines are skipped.
//!
//! JSON: `{"ground_size": 6, "sets": [[0,1],[2,3]], "weights": ["1/2","1"]}` with
//! `weights` optional.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::family::{FamilyError, SetFamily, WeightedFamily};
use crate::rational::{format_rational, parse_rational};
use crate::set::{ElementError, ElementSet};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing `x=<ground_size>` header")]
    MissingHeader,
    #[error("invalid JSON family: {0}")]
    Json(#[from] serde_json::Error),
    #[error("set {index}: {message}")]
    Set { index: usize, message: String },
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// A parsed family file; weights only come from JSON input.
#[derive(Debug, Clone)]
pub struct ParsedFamily {
    pub family: SetFamily,
    pub weights: Option<Vec<BigRational>>,
}

impl ParsedFamily {
    pub fn weighted(&self) -> Result<Option<WeightedFamily>, FamilyError> {
        self.weights
            .clone()
            .map(|w| WeightedFamily::new(self.family.clone(), w))
            .transpose()
    }
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(a, _)| a).trim()
}

pub fn parse_text(input: &str) -> Result<SetFamily, FormatError> {
    let mut ground: Option<usize> = None;
    let mut sets: Vec<ElementSet> = Vec::new();
    let mut lines_of: Vec<usize> = Vec::new();
    for (i, raw) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let Some(x) = ground else {
            let value = line
                .strip_prefix("x=")
                .or_else(|| line.strip_prefix("x ="))
                .ok_or(FormatError::MissingHeader)?;
            let x = value
                .trim()
                .parse::<usize>()
                .map_err(|_| FormatError::Line {
                    line: line_no,
                    message: format!("bad ground size {:?}", value.trim()),
                })?;
            ground = Some(x);
            continue;
        };
        let set = if line == "-" {
            ElementSet::empty(x)
        } else {
            let elems = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| FormatError::Line {
                        line: line_no,
                        message: format!("bad element {tok:?}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            ElementSet::from_elements(x, elems).map_err(|e| FormatError::Line {
                line: line_no,
                message: element_message(&e),
            })?
        };
        sets.push(set);
        lines_of.push(line_no);
    }
    let x = ground.ok_or(FormatError::MissingHeader)?;
    SetFamily::from_sets(x, sets).map_err(|e| match e {
        FamilyError::DuplicateSet { index, first, set } => FormatError::Line {
            line: lines_of[index],
            message: format!(
                "duplicate set {set} (first seen at line {})",
                lines_of[first]
            ),
        },
        other => other.into(),
    })
}

fn element_message(e: &ElementError) -> String {
    match e {
        ElementError::Duplicate { element } => format!("duplicate element {element}"),
        ElementError::OutOfRange { element, universe } => {
            format!("element {element} out of range for x={universe}")
        }
    }
}

pub fn write_text(family: &SetFamily) -> String {
    let mut out = format!("x={}\n", family.ground_size());
    for m in family.iter() {
        if m.is_empty() {
            out.push('-');
        } else {
            let parts: Vec<String> = m.iter().map(|e| e.to_string()).collect();
            out.push_str(&parts.join(" "));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
struct JsonFamily {
    ground_size: usize,
    sets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<String>>,
}

pub fn parse_json(input: &str) -> Result<ParsedFamily, FormatError> {
    let raw: JsonFamily = serde_json::from_str(input)?;
    let x = raw.ground_size;
    let sets = raw
        .sets
        .into_iter()
        .enumerate()
        .map(|(index, elems)| {
            ElementSet::from_elements(x, elems).map_err(|e| FormatError::Set {
                index,
                message: element_message(&e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let count = sets.len();
    let (family, order) = SetFamily::from_sets_with_order(x, sets)?;
    let weights = match raw.weights {
        None => None,
        Some(ws) => {
            if ws.len() != count {
                return Err(FamilyError::WeightCount {
                    weights: ws.len(),
                    members: count,
                }
                .into());
            }
            let parsed = ws
                .iter()
                .enumerate()
                .map(|(index, w)| {
                    parse_rational(w).map_err(|e| FormatError::Set {
                        index,
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Some(order.iter().map(|&i| parsed[i].clone()).collect())
        }
    };
    let parsed = ParsedFamily { family, weights };
    parsed.weighted()?;
    Ok(parsed)
}

pub fn write_json(family: &SetFamily, weights: Option<&[BigRational]>) -> String {
    let raw = JsonFamily {
        ground_size: family.ground_size(),
        sets: family.to_lists(),
        weights: weights.map(|w| w.iter().map(format_rational).collect()),
    };
    serde_json::to_string(&raw).expect("family serializes") + "\n"
}

/// Sniffs the format: JSON if the first non-space byte is `{`.
pub fn parse_any(input: &str) -> Result<ParsedFamily, FormatError> {
    if input.trim_start().starts_with('{') {
        parse_json(input)
    } else {
        Ok(ParsedFamily {
            family: parse_text(input)?,
            weights: None,
        })
    }
}
