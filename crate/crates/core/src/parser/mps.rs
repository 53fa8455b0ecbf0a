use std::collections::HashMap;

use crate::model::{Constraint, ConstraintSense, Objective, ObjectiveSense, Problem, Variable};

use super::{column_of, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Objective(usize),
    Constraint(usize),
}

struct Field<'a> {
    text: &'a str,
    col: usize,
}

fn fields(line: &str) -> Vec<Field<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Field {
                    text: &line[s..i],
                    col: column_of(line, s),
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Field {
            text: &line[s..],
            col: column_of(line, s),
        });
    }
    out
}

struct RowData {
    name: String,
    sense: ConstraintSense,
    rhs: f64,
    range: Option<f64>,
    coefficients: Vec<(usize, f64)>,
}

pub fn parse_mps(text: &str) -> Result<Problem, ParseError> {
    let mut name = String::new();
    let mut sense = ObjectiveSense::Minimize;
    let mut section: Option<Section> = None;
    let mut seen: Vec<Section> = Vec::new();
    let mut rows: HashMap<String, RowKind> = HashMap::new();
    let mut objectives: Vec<(String, Vec<(usize, f64)>)> = Vec::new();
    let mut constraints: Vec<RowData> = Vec::new();
    let mut columns: HashMap<String, usize> = HashMap::new();
    let mut variables: Vec<Variable> = Vec::new();
    let mut in_integer_block = false;
    let mut ended = false;
    let mut last_line = 0;

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        last_line = line_no;
        if raw.starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        let f = fields(raw);
        let err = |k: usize, msg: String| ParseError::at(line_no, f.get(k).map_or(1, |x| x.col), msg);
        let num = |k: usize| -> Result<f64, ParseError> {
            let Some(x) = f.get(k) else {
                return Err(err(k.saturating_sub(1), "missing numeric field".into()));
            };
            x.text
                .parse::<f64>()
                .map_err(|_| err(k, format!("malformed number `{}`", x.text)))
        };

        if !raw.starts_with(char::is_whitespace) {
            let head = f[0].text.to_ascii_uppercase();
            let sec = match head.as_str() {
                "NAME" => {
                    name = f.get(1).map_or("", |x| x.text).to_string();
                    Section::Name
                }
                "OBJSENSE" => {
                    if let Some(v) = f.get(1) {
                        sense = parse_sense(v.text).ok_or_else(|| err(1, format!("unknown objective sense `{}`", v.text)))?;
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => {
                    ended = true;
                    break;
                }
                _ => return Err(err(0, format!("unknown section `{}`", f[0].text))),
            };
            if seen.contains(&sec) {
                return Err(err(0, format!("section `{head}` appears twice")));
            }
            seen.push(sec);
            section = Some(sec);
            continue;
        }

        match section {
            None | Some(Section::Name) => return Err(err(0, "data line outside of a section".into())),
            Some(Section::ObjSense) => {
                sense = parse_sense(f[0].text).ok_or_else(|| err(0, format!("unknown objective sense `{}`", f[0].text)))?;
            }
            Some(Section::Rows) => {
                if f.len() != 2 {
                    return Err(err(0, "expected `<type> <row name>`".into()));
                }
                let row = f[1].text.to_string();
                if rows.contains_key(&row) {
                    return Err(err(1, format!("duplicate row name `{row}`")));
                }
                let kind = match f[0].text.to_ascii_uppercase().as_str() {
                    "N" => {
                        objectives.push((row.clone(), Vec::new()));
                        RowKind::Objective(objectives.len() - 1)
                    }
                    t @ ("L" | "G" | "E") => {
                        let sense = match t {
                            "L" => ConstraintSense::Le,
                            "G" => ConstraintSense::Ge,
                            _ => ConstraintSense::Eq,
                        };
                        constraints.push(RowData {
                            name: row.clone(),
                            sense,
                            rhs: 0.0,
                            range: None,
                            coefficients: Vec::new(),
                        });
                        RowKind::Constraint(constraints.len() - 1)
                    }
                    other => return Err(err(0, format!("unknown row type `{other}`"))),
                };
                rows.insert(row, kind);
            }
            Some(Section::Columns) => {
                if f.len() >= 3 && f[1].text.trim_matches('\'').eq_ignore_ascii_case("MARKER") {
                    match f[2].text.trim_matches('\'').to_ascii_uppercase().as_str() {
                        "INTORG" => in_integer_block = true,
                        "INTEND" => in_integer_block = false,
                        other => return Err(err(2, format!("unknown marker `{other}`"))),
                    }
                    continue;
                }
                if f.len() != 3 && f.len() != 5 {
                    return Err(err(0, "expected `<column> <row> <value> [<row> <value>]`".into()));
                }
                let col = f[0].text;
                let j = match columns.get(col) {
                    Some(&j) => j,
                    None => {
                        let mut v = Variable::continuous(col);
                        v.integer = in_integer_block;
                        variables.push(v);
                        columns.insert(col.to_string(), variables.len() - 1);
                        variables.len() - 1
                    }
                };
                for k in [1, 3] {
                    if k >= f.len() {
                        break;
                    }
                    let v = num(k + 1)?;
                    match rows.get(f[k].text) {
                        Some(RowKind::Objective(i)) => objectives[*i].1.push((j, v)),
                        Some(RowKind::Constraint(i)) => constraints[*i].coefficients.push((j, v)),
                        None => return Err(err(k, format!("undeclared row `{}`", f[k].text))),
                    }
                }
            }
            Some(sec @ (Section::Rhs | Section::Ranges)) => {
                // The set name is optional: pairs start at field 0 or 1.
                let start = if f.len() % 2 == 1 { 1 } else { 0 };
                if f.len() < 2 || f.len() > 5 {
                    return Err(err(0, "expected `[<set>] <row> <value> [<row> <value>]`".into()));
                }
                let mut k = start;
                while k + 1 < f.len() {
                    let v = num(k + 1)?;
                    match rows.get(f[k].text) {
                        Some(RowKind::Constraint(i)) if sec == Section::Rhs => constraints[*i].rhs = v,
                        Some(RowKind::Constraint(i)) => constraints[*i].range = Some(v),
                        Some(RowKind::Objective(_)) => {
                            return Err(err(k, format!("objective row `{}` cannot carry a constant", f[k].text)))
                        }
                        None => return Err(err(k, format!("undeclared row `{}`", f[k].text))),
                    }
                    k += 2;
                }
            }
            Some(Section::Bounds) => {
                let kind = f[0].text.to_ascii_uppercase();
                let takes_value = matches!(kind.as_str(), "UP" | "LO" | "FX" | "LI" | "UI");
                let (col_k, val_k) = match (takes_value, f.len()) {
                    (true, 3) => (1, Some(2)),
                    (true, 4) => (2, Some(3)),
                    (false, 2) => (1, None),
                    (false, 3) => (2, None),
                    (false, 4) => (2, None),
                    _ => return Err(err(0, format!("malformed `{kind}` bound"))),
                };
                let Some(&j) = columns.get(f[col_k].text) else {
                    return Err(err(col_k, format!("undeclared column `{}`", f[col_k].text)));
                };
                let v = val_k.map(num).transpose()?;
                let var = &mut variables[j];
                match (kind.as_str(), v) {
                    ("UP", Some(v)) => var.upper = v,
                    ("LO", Some(v)) => var.lower = v,
                    ("FX", Some(v)) => {
                        var.lower = v;
                        var.upper = v;
                    }
                    ("LI", Some(v)) => {
                        var.lower = v;
                        var.integer = true;
                    }
                    ("UI", Some(v)) => {
                        var.upper = v;
                        var.integer = true;
                    }
                    ("FR", _) => {
                        var.lower = f64::NEG_INFINITY;
                        var.upper = f64::INFINITY;
                    }
                    ("MI", _) => var.lower = f64::NEG_INFINITY,
                    ("PL", _) => var.upper = f64::INFINITY,
                    ("BV", _) => {
                        var.lower = 0.0;
                        var.upper = 1.0;
                        var.integer = true;
                    }
                    _ => return Err(err(0, format!("unknown bound type `{kind}`"))),
                }
            }
        }
    }

    for (sec, label) in [(Section::Rows, "ROWS"), (Section::Columns, "COLUMNS")] {
        if !seen.contains(&sec) {
            return Err(ParseError::at(last_line.max(1), 1, format!("missing mandatory section {label}")));
        }
    }
    if !ended {
        return Err(ParseError::at(last_line.max(1), 1, "missing ENDATA"));
    }
    if objectives.is_empty() {
        return Err(ParseError::at(1, 1, "no objectives"));
    }

    let n = variables.len();
    let dense = |entries: &[(usize, f64)]| {
        let mut v = vec![0.0; n];
        for &(j, c) in entries {
            v[j] += c;
        }
        v
    };
    let mut out_constraints = Vec::new();
    for r in &constraints {
        let coefficients = dense(&r.coefficients);
        match r.range {
            None => out_constraints.push(Constraint::new(r.name.clone(), coefficients, r.sense, r.rhs)),
            Some(range) => {
                // Classic RANGES semantics turn the row into `lo <= a·x <= hi`.
                let (lo, hi) = match r.sense {
                    ConstraintSense::Le => (r.rhs - range.abs(), r.rhs),
                    ConstraintSense::Ge => (r.rhs, r.rhs + range.abs()),
                    ConstraintSense::Eq if range >= 0.0 => (r.rhs, r.rhs + range),
                    ConstraintSense::Eq => (r.rhs + range, r.rhs),
                };
                out_constraints.push(Constraint::new(
                    format!("{}_lo", r.name),
                    coefficients.clone(),
                    ConstraintSense::Ge,
                    lo,
                ));
                out_constraints.push(Constraint::new(format!("{}_hi", r.name), coefficients, ConstraintSense::Le, hi));
            }
        }
    }
    Ok(Problem {
        name,
        objectives: objectives
            .iter()
            .map(|(name, entries)| Objective {
                name: name.clone(),
                sense,
                coefficients: dense(entries),
                quadratic: None,
            })
            .collect(),
        constraints: out_constraints,
        variables,
    })
}

fn parse_sense(s: &str) -> Option<ObjectiveSense> {
    match s.to_ascii_uppercase().as_str() {
        "MIN" | "MINIMIZE" | "MINIMISE" => Some(ObjectiveSense::Minimize),
        "MAX" | "MAXIMIZE" | "MAXIMISE" => Some(ObjectiveSense::Maximize),
        _ => None,
    }
}
