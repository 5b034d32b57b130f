//! LP-format text serialization for 0/1 programs, for cross-validation with
//! external solvers.
//!
//! The dialect is the common CPLEX LP layout (Minimize / Subject To /
//! Binary / End). Two pieces of metadata external solvers do not need are
//! carried in comment lines so files round-trip exactly: the constant
//! objective offset and the feasibility sense.

use std::io::{self, Write};

use thiserror::Error;

use super::{BinaryLinearProgram, Relation, Row, Sense};

#[derive(Debug, Error)]
pub enum LpParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("missing section: {0}")]
    MissingSection(&'static str),
}

fn write_terms(out: &mut impl Write, coeffs: &[(usize, f64)], names: &[String]) -> io::Result<()> {
    for (i, &(j, c)) in coeffs.iter().enumerate() {
        if i == 0 {
            if c < 0.0 {
                write!(out, "- ")?;
            }
        } else if c < 0.0 {
            write!(out, " - ")?;
        } else {
            write!(out, " + ")?;
        }
        write!(out, "{:?} {}", c.abs(), names[j])?;
    }
    Ok(())
}

/// Write a program in LP format.
pub fn write_lp(p: &BinaryLinearProgram, out: &mut impl Write) -> io::Result<()> {
    if p.sense == Sense::Feasibility {
        writeln!(out, "\\ sense: feasibility")?;
    }
    if p.objective_offset != 0.0 {
        writeln!(out, "\\ objective-offset: {:?}", p.objective_offset)?;
    }
    if p.derived.iter().any(|&d| d) {
        write!(out, "\\ derived:")?;
        for (j, &d) in p.derived.iter().enumerate() {
            if d {
                write!(out, " {}", p.var_names[j])?;
            }
        }
        writeln!(out)?;
    }
    writeln!(out, "Minimize")?;
    let obj_terms: Vec<(usize, f64)> = p
        .objective
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c != 0.0)
        .map(|(j, &c)| (j, c))
        .collect();
    write!(out, " obj:")?;
    if !obj_terms.is_empty() {
        write!(out, " ")?;
        write_terms(out, &obj_terms, &p.var_names)?;
    }
    writeln!(out)?;
    writeln!(out, "Subject To")?;
    for (i, row) in p.rows.iter().enumerate() {
        write!(out, " c{i}: ")?;
        write_terms(out, &row.coeffs, &p.var_names)?;
        if row.coeffs.is_empty() {
            write!(out, "0 zero_terms_placeholder")?;
        }
        writeln!(out, " {} {:?}", row.relation.symbol(), row.rhs)?;
    }
    writeln!(out, "Binary")?;
    for name in &p.var_names {
        writeln!(out, " {name}")?;
    }
    writeln!(out, "End")?;
    Ok(())
}

/// Render a program to an LP-format string.
pub fn to_lp_string(p: &BinaryLinearProgram) -> String {
    let mut buf = Vec::new();
    write_lp(p, &mut buf).expect("write to Vec");
    String::from_utf8(buf).expect("LP text is ASCII")
}

#[derive(PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Binary,
    Done,
}

/// Parse terms of the form `[+|-] coeff name ...`; returns (name, coeff)
/// pairs in order of appearance.
fn parse_terms(tokens: &[&str], line: usize) -> Result<Vec<(String, f64)>, LpParseError> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut pending: Option<f64> = None;
    for tok in tokens {
        match *tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => {
                if pending.is_none() {
                    let c: f64 = tok.parse().map_err(|_| LpParseError::Syntax {
                        line,
                        msg: format!("expected coefficient, found '{tok}'"),
                    })?;
                    pending = Some(sign * c);
                } else {
                    terms.push((tok.to_string(), pending.take().unwrap()));
                    sign = 1.0;
                }
            }
        }
    }
    if pending.is_some() {
        return Err(LpParseError::Syntax {
            line,
            msg: "dangling coefficient".into(),
        });
    }
    Ok(terms)
}

/// Parse an LP-format document produced by [`write_lp`].
pub fn parse_lp(text: &str) -> Result<BinaryLinearProgram, LpParseError> {
    let mut sense = Sense::Minimize;
    let mut offset = 0.0;
    let mut section = Section::Preamble;
    // (name, terms, relation, rhs) until variable order is known.
    let mut obj_terms: Vec<(String, f64)> = Vec::new();
    let mut raw_rows: Vec<(Vec<(String, f64)>, Relation, f64)> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut derived_names: Vec<String> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('\\') {
            let comment = comment.trim();
            if comment == "sense: feasibility" {
                sense = Sense::Feasibility;
            } else if let Some(v) = comment.strip_prefix("objective-offset:") {
                offset = v.trim().parse().map_err(|_| LpParseError::Syntax {
                    line: lineno + 1,
                    msg: "bad objective offset".into(),
                })?;
            } else if let Some(v) = comment.strip_prefix("derived:") {
                derived_names.extend(v.split_whitespace().map(str::to_string));
            }
            continue;
        }
        match line {
            "Minimize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Constraints;
                continue;
            }
            "Binary" => {
                section = Section::Binary;
                continue;
            }
            "End" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Objective => {
                let rest = line.strip_prefix("obj:").ok_or(LpParseError::Syntax {
                    line: lineno + 1,
                    msg: "objective line must start with 'obj:'".into(),
                })?;
                let tokens: Vec<&str> = rest.split_whitespace().collect();
                obj_terms = parse_terms(&tokens, lineno + 1)?;
            }
            Section::Constraints => {
                let body = match line.find(':') {
                    Some(i) => &line[i + 1..],
                    None => line,
                };
                let tokens: Vec<&str> = body.split_whitespace().collect();
                let rel_pos = tokens
                    .iter()
                    .position(|t| matches!(*t, "<=" | ">=" | "="))
                    .ok_or(LpParseError::Syntax {
                        line: lineno + 1,
                        msg: "constraint without relation".into(),
                    })?;
                let relation = match tokens[rel_pos] {
                    "<=" => Relation::Le,
                    ">=" => Relation::Ge,
                    _ => Relation::Eq,
                };
                if rel_pos + 2 != tokens.len() {
                    return Err(LpParseError::Syntax {
                        line: lineno + 1,
                        msg: "expected a single rhs value".into(),
                    });
                }
                let rhs: f64 = tokens[rel_pos + 1].parse().map_err(|_| LpParseError::Syntax {
                    line: lineno + 1,
                    msg: "bad rhs".into(),
                })?;
                let mut terms = parse_terms(&tokens[..rel_pos], lineno + 1)?;
                terms.retain(|(name, _)| name != "zero_terms_placeholder");
                raw_rows.push((terms, relation, rhs));
            }
            Section::Binary => {
                for tok in line.split_whitespace() {
                    names.push(tok.to_string());
                }
            }
            Section::Preamble | Section::Done => {
                return Err(LpParseError::Syntax {
                    line: lineno + 1,
                    msg: "content outside any section".into(),
                });
            }
        }
    }

    if section != Section::Done {
        return Err(LpParseError::MissingSection("End"));
    }

    let index_of = |name: &str| -> Result<usize, LpParseError> {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| LpParseError::UnknownVariable(name.to_string()))
    };

    let mut p = BinaryLinearProgram::new(sense);
    p.objective_offset = offset;
    for name in &names {
        p.add_var(name.clone());
    }
    for (name, c) in obj_terms {
        let j = index_of(&name)?;
        p.objective[j] = c;
    }
    for (terms, relation, rhs) in raw_rows {
        let coeffs = terms
            .into_iter()
            .map(|(name, c)| Ok((index_of(&name)?, c)))
            .collect::<Result<Vec<_>, LpParseError>>()?;
        p.rows.push(Row { coeffs, relation, rhs });
    }
    for name in &derived_names {
        let j = index_of(name)?;
        p.mark_derived(j);
    }
    Ok(p)
}
