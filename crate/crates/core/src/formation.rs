//! Formations: named sets of roles, each mapping the ball position to a home
//! position for one robot.
//!
//! File format (UTF-8, `#` starts a comment):
//!
//! ```text
//! formation <name>
//! role <name> anchor <x> <y> weight <wx> <wy> [behind <margin>] [goalkeeper]
//! ```
//!
//! A role block ends at a blank line or at the next `formation` header.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{clamp_to_field, FieldModel, Vec2, ROBOT_RADIUS};
use crate::trajectory::{keeper_target, GoalkeeperLine};

/// The formation file shipped with the crate.
pub const DEFAULT_FORMATION_FILE: &str = include_str!("../data/default.formation");

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

fn err<T>(line: usize, reason: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        reason: reason.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Role {
    pub name: String,
    /// Home position with the ball on the centre spot.
    pub anchor: Vec2,
    /// Per-axis coupling to the ball position, each in [0, 1].
    pub ball_weight: Vec2,
    pub stay_behind_ball: bool,
    pub behind_margin: f64,
    pub is_goalkeeper: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Formation {
    pub name: String,
    pub roles: Vec<Role>,
}

impl Formation {
    pub fn role(&self, name: &str) -> Option<&Role> {
        self.roles.iter().find(|r| r.name == name)
    }

    pub fn goalkeeper(&self) -> Option<&Role> {
        self.roles.iter().find(|r| r.is_goalkeeper)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationLibrary {
    formations: BTreeMap<String, Formation>,
    /// Names in file order.
    order: Vec<String>,
    active: String,
}

impl FormationLibrary {
    pub fn builtin() -> Self {
        parse_formation_file(DEFAULT_FORMATION_FILE).expect("shipped formation file parses")
    }

    pub fn len(&self) -> usize {
        self.formations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formations.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Formation> {
        self.formations.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    pub fn active(&self) -> &Formation {
        &self.formations[&self.active]
    }

    /// Switch the active formation; returns false for unknown names.
    pub fn set_active(&mut self, name: &str) -> bool {
        if self.formations.contains_key(name) {
            self.active = name.to_string();
            true
        } else {
            false
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formation> {
        self.order.iter().map(|n| &self.formations[n])
    }
}

fn parse_number(tok: Option<&str>, what: &str, line: usize) -> Result<f64, ParseError> {
    let Some(tok) = tok else {
        return err(line, format!("missing {what}"));
    };
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(line, format!("malformed number {tok:?} for {what}")),
    }
}

fn expect_keyword<'a>(
    toks: &mut impl Iterator<Item = &'a str>,
    kw: &str,
    line: usize,
) -> Result<(), ParseError> {
    match toks.next() {
        Some(t) if t == kw => Ok(()),
        Some(t) => err(line, format!("expected `{kw}`, found `{t}`")),
        None => err(line, format!("missing `{kw}`")),
    }
}

fn parse_role(rest: &str, line: usize) -> Result<Role, ParseError> {
    let mut toks = rest.split_whitespace();
    let Some(name) = toks.next() else {
        return err(line, "role needs a name");
    };
    expect_keyword(&mut toks, "anchor", line)?;
    let ax = parse_number(toks.next(), "anchor x", line)?;
    let ay = parse_number(toks.next(), "anchor y", line)?;
    expect_keyword(&mut toks, "weight", line)?;
    let wx = parse_number(toks.next(), "weight x", line)?;
    let wy = parse_number(toks.next(), "weight y", line)?;
    if !(0.0..=1.0).contains(&wx) || !(0.0..=1.0).contains(&wy) {
        return err(line, "weights must lie in [0, 1]");
    }
    let mut role = Role {
        name: name.to_string(),
        anchor: Vec2::new(ax, ay),
        ball_weight: Vec2::new(wx, wy),
        stay_behind_ball: false,
        behind_margin: 0.0,
        is_goalkeeper: false,
    };
    while let Some(tok) = toks.next() {
        match tok {
            "behind" if !role.stay_behind_ball => {
                let m = parse_number(toks.next(), "behind margin", line)?;
                if m < 0.0 {
                    return err(line, "behind margin must be non-negative");
                }
                role.stay_behind_ball = true;
                role.behind_margin = m;
            }
            "goalkeeper" if !role.is_goalkeeper => role.is_goalkeeper = true,
            "behind" | "goalkeeper" => return err(line, format!("`{tok}` given twice")),
            other => return err(line, format!("unexpected token `{other}`")),
        }
    }
    Ok(role)
}

struct Open {
    formation: Formation,
    header_line: usize,
}

fn close(
    open: Option<Open>,
    lib: &mut BTreeMap<String, Formation>,
    order: &mut Vec<String>,
) -> Result<(), ParseError> {
    let Some(open) = open else { return Ok(()) };
    if open.formation.roles.is_empty() {
        return err(
            open.header_line,
            format!("formation `{}` has no roles", open.formation.name),
        );
    }
    order.push(open.formation.name.clone());
    lib.insert(open.formation.name.clone(), open.formation);
    Ok(())
}

/// Parse a formation file. The first formation becomes the active one.
pub fn parse_formation_file(text: &str) -> Result<FormationLibrary, ParseError> {
    let mut formations = BTreeMap::new();
    let mut order = Vec::new();
    let mut open: Option<Open> = None;
    let mut header_lines: BTreeMap<String, usize> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            // A blank line (not a comment-only line) ends the current block.
            if raw.trim().is_empty() {
                close(open.take(), &mut formations, &mut order)?;
            }
            continue;
        }
        let (keyword, rest) = content
            .split_once(char::is_whitespace)
            .map_or((content, ""), |(k, r)| (k, r.trim()));
        match keyword {
            "formation" => {
                close(open.take(), &mut formations, &mut order)?;
                let mut toks = rest.split_whitespace();
                let Some(name) = toks.next() else {
                    return err(line, "formation needs a name");
                };
                if let Some(extra) = toks.next() {
                    return err(line, format!("unexpected token `{extra}`"));
                }
                if let Some(first) = header_lines.get(name) {
                    return err(line, format!("duplicate formation `{name}` (first at line {first})"));
                }
                header_lines.insert(name.to_string(), line);
                open = Some(Open {
                    formation: Formation {
                        name: name.to_string(),
                        roles: Vec::new(),
                    },
                    header_line: line,
                });
            }
            "role" => {
                let Some(current) = open.as_mut() else {
                    return err(line, "role outside of a formation block");
                };
                let role = parse_role(rest, line)?;
                if current.formation.role(&role.name).is_some() {
                    return err(line, format!("duplicate role `{}`", role.name));
                }
                if role.is_goalkeeper && current.formation.goalkeeper().is_some() {
                    return err(line, "formation already has a goalkeeper");
                }
                current.formation.roles.push(role);
            }
            other => return err(line, format!("unknown keyword `{other}`")),
        }
    }
    close(open.take(), &mut formations, &mut order)?;
    let Some(active) = order.first().cloned() else {
        return err(text.lines().count().max(1), "no formations defined");
    };
    Ok(FormationLibrary {
        formations,
        order,
        active,
    })
}

/// Canonical text for a library: one block per formation, separated by blank lines.
pub fn serialize_formations(lib: &FormationLibrary) -> String {
    let mut out = String::new();
    for (i, f) in lib.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "formation {}", f.name);
        for r in &f.roles {
            let _ = write!(
                out,
                "role {} anchor {} {} weight {} {}",
                r.name, r.anchor.x, r.anchor.y, r.ball_weight.x, r.ball_weight.y
            );
            if r.stay_behind_ball {
                let _ = write!(out, " behind {}", r.behind_margin);
            }
            if r.is_goalkeeper {
                out.push_str(" goalkeeper");
            }
            out.push('\n');
        }
    }
    out
}

/// Home position for `role` given the ball: `anchor + weight ⊙ ball`, held
/// `behind_margin` behind the ball (smaller x) when the role asks for it, then
/// clamped into the field. Goalkeepers shadow the ball on their line instead.
pub fn home_position(role: &Role, ball: Vec2, field: &FieldModel) -> Vec2 {
    if role.is_goalkeeper {
        return keeper_target(None, ball, &GoalkeeperLine::for_field(field));
    }
    let mut h = role.anchor + role.ball_weight.hadamard(ball);
    if role.stay_behind_ball {
        h.x = h.x.min(ball.x - role.behind_margin);
    }
    clamp_to_field(h, field, ROBOT_RADIUS)
}

/// Give role `i` to `robot_ids[i]`. With fewer robots than roles the goalkeeper
/// is filled first, then roles in file order; surplus robots share the last role.
pub fn assign_roles<'f>(f: &'f Formation, robot_ids: &[u32]) -> BTreeMap<u32, &'f Role> {
    let mut out = BTreeMap::new();
    if robot_ids.len() >= f.roles.len() {
        for (i, &id) in robot_ids.iter().enumerate() {
            out.insert(id, &f.roles[i.min(f.roles.len() - 1)]);
        }
        return out;
    }
    let priority = f
        .roles
        .iter()
        .filter(|r| r.is_goalkeeper)
        .chain(f.roles.iter().filter(|r| !r.is_goalkeeper));
    for (&id, role) in robot_ids.iter().zip(priority) {
        out.insert(id, role);
    }
    out
}
