use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{ConstraintSense, ObjectiveSense, Problem, QuadraticForm};

use super::lp::is_plain_name;
use super::Format;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WriteError {
    #[error("the MPS dialect has no quadratic terms (in `{0}`)")]
    QuadraticInMps(String),
    #[error("the MPS dialect needs all objectives in the same sense")]
    MixedSenses,
    #[error("name `{0}` cannot be written in this format")]
    BadName(String),
    #[error("`{0}` has a non-finite coefficient")]
    NonFinite(String),
}

/// Writes `p` so that parsing the text yields an equal problem. Numbers use
/// the shortest representation that parses back to the same `f64`.
pub fn serialize_problem(p: &Problem, format: Format) -> Result<String, WriteError> {
    for o in &p.objectives {
        if o.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(WriteError::NonFinite(o.name.clone()));
        }
    }
    for c in &p.constraints {
        if c.coefficients.iter().any(|v| !v.is_finite()) || !c.rhs.is_finite() {
            return Err(WriteError::NonFinite(c.name.clone()));
        }
    }
    match format {
        Format::Lp => write_lp(p),
        Format::Mps => write_mps(p),
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn write_lp(p: &Problem) -> Result<String, WriteError> {
    let names = p
        .variables
        .iter()
        .map(|v| &v.name)
        .chain(p.objectives.iter().map(|o| &o.name))
        .chain(p.constraints.iter().map(|c| &c.name));
    for n in names {
        if !is_plain_name(n) {
            return Err(WriteError::BadName(n.clone()));
        }
    }
    if p.name.contains(['\n', '\r']) {
        return Err(WriteError::BadName(p.name.clone()));
    }
    let mut s = String::new();
    if !p.name.is_empty() {
        let _ = writeln!(s, "\\Problem name: {}", p.name);
    }
    s.push_str("Minimize\n");
    for (k, o) in p.objectives.iter().enumerate() {
        let sense = match o.sense {
            ObjectiveSense::Minimize => "min",
            ObjectiveSense::Maximize => "max",
        };
        // The first row lists every variable so that column order survives.
        let _ = writeln!(
            s,
            " {sense} {}: {}",
            o.name,
            lp_expr(p, &o.coefficients, o.quadratic.as_ref(), k == 0)
        );
    }
    s.push_str("Subject To\n");
    for c in &p.constraints {
        let _ = writeln!(
            s,
            " {}: {} {} {}",
            c.name,
            lp_expr(p, &c.coefficients, c.quadratic.as_ref(), false),
            c.sense.symbol(),
            num(c.rhs)
        );
    }
    s.push_str("Bounds\n");
    for v in &p.variables {
        if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(s, " {} free", v.name);
        } else if v.lower == v.upper {
            let _ = writeln!(s, " {} = {}", v.name, num(v.lower));
        } else {
            let _ = writeln!(s, " {} <= {} <= {}", num(v.lower), v.name, num(v.upper));
        }
    }
    if p.variables.iter().any(|v| v.integer) {
        s.push_str("Generals\n");
        for v in p.variables.iter().filter(|v| v.integer) {
            let _ = writeln!(s, " {}", v.name);
        }
    }
    s.push_str("End\n");
    Ok(s)
}

fn lp_expr(p: &Problem, coefficients: &[f64], quadratic: Option<&QuadraticForm>, dense: bool) -> String {
    let mut parts: Vec<String> = Vec::new();
    let term = |c: f64, body: String, parts: &mut Vec<String>| {
        let sign = if c.is_sign_negative() { "-" } else { "+" };
        parts.push(format!("{sign} {} {body}", num(c.abs())));
    };
    for (j, &c) in coefficients.iter().enumerate() {
        if dense || c != 0.0 {
            term(c, p.variables[j].name.clone(), &mut parts);
        }
    }
    if let Some(q) = quadratic {
        let mut inner = Vec::new();
        for (i, j, c) in q.terms() {
            let body = if i == j {
                format!("{} ^ 2", p.variables[i].name)
            } else {
                format!("{} * {}", p.variables[i].name, p.variables[j].name)
            };
            term(c, body, &mut inner);
        }
        parts.push(format!("+ [ {} ]", inner.join(" ")));
    }
    if parts.is_empty() {
        // An explicit zero keeps the row well formed.
        parts.push(format!("+ 0.0 {}", p.variables.first().map_or("x", |v| v.name.as_str())));
    }
    parts.join(" ")
}

fn is_mps_name(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

fn write_mps(p: &Problem) -> Result<String, WriteError> {
    for o in &p.objectives {
        if o.quadratic.is_some() {
            return Err(WriteError::QuadraticInMps(o.name.clone()));
        }
    }
    for c in &p.constraints {
        if c.quadratic.is_some() {
            return Err(WriteError::QuadraticInMps(c.name.clone()));
        }
    }
    let sense = p.objectives.first().map_or(ObjectiveSense::Minimize, |o| o.sense);
    if p.objectives.iter().any(|o| o.sense != sense) {
        return Err(WriteError::MixedSenses);
    }
    let mut rows: Vec<&String> = p.objectives.iter().map(|o| &o.name).collect();
    rows.extend(p.constraints.iter().map(|c| &c.name));
    for n in rows.iter().copied().chain(p.variables.iter().map(|v| &v.name)) {
        if !is_mps_name(n) {
            return Err(WriteError::BadName(n.clone()));
        }
    }
    if rows.iter().enumerate().any(|(i, a)| rows[..i].contains(a)) {
        let dup = rows.iter().enumerate().find(|(i, a)| rows[..*i].contains(a)).unwrap().1;
        return Err(WriteError::BadName((*dup).clone()));
    }
    if p.name.chars().any(char::is_whitespace) {
        return Err(WriteError::BadName(p.name.clone()));
    }

    let mut s = String::new();
    let _ = writeln!(s, "NAME {}", p.name);
    if sense == ObjectiveSense::Maximize {
        s.push_str("OBJSENSE\n    MAX\n");
    }
    s.push_str("ROWS\n");
    for o in &p.objectives {
        let _ = writeln!(s, " N  {}", o.name);
    }
    for c in &p.constraints {
        let t = match c.sense {
            ConstraintSense::Le => "L",
            ConstraintSense::Ge => "G",
            ConstraintSense::Eq => "E",
        };
        let _ = writeln!(s, " {t}  {}", c.name);
    }
    s.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut markers = 0;
    for (j, v) in p.variables.iter().enumerate() {
        if v.integer != in_int {
            let tag = if v.integer { "INTORG" } else { "INTEND" };
            let _ = writeln!(s, "    M{markers} 'MARKER' '{tag}'");
            markers += 1;
            in_int = v.integer;
        }
        let entries: Vec<(&String, f64)> = p
            .objectives
            .iter()
            .map(|o| (&o.name, o.coefficients[j]))
            .chain(p.constraints.iter().map(|c| (&c.name, c.coefficients[j])))
            .filter(|&(_, c)| c != 0.0)
            .collect();
        if entries.is_empty() {
            let _ = writeln!(s, "    {} {} 0.0", v.name, p.objectives[0].name);
        }
        for (row, c) in entries {
            let _ = writeln!(s, "    {} {} {}", v.name, row, num(c));
        }
    }
    if in_int {
        let _ = writeln!(s, "    M{markers} 'MARKER' 'INTEND'");
    }
    s.push_str("RHS\n");
    for c in p.constraints.iter().filter(|c| c.rhs != 0.0) {
        let _ = writeln!(s, "    RHS {} {}", c.name, num(c.rhs));
    }
    s.push_str("BOUNDS\n");
    for v in &p.variables {
        let (lo, up) = (v.lower, v.upper);
        if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            let _ = writeln!(s, " FR BND {}", v.name);
        } else if lo == up {
            let _ = writeln!(s, " FX BND {} {}", v.name, num(lo));
        } else {
            if lo == f64::NEG_INFINITY {
                let _ = writeln!(s, " MI BND {}", v.name);
            } else if lo != 0.0 || lo.is_sign_negative() {
                let _ = writeln!(s, " LO BND {} {}", v.name, num(lo));
            }
            if up.is_finite() {
                let _ = writeln!(s, " UP BND {} {}", v.name, num(up));
            } else if up == f64::NEG_INFINITY {
                let _ = writeln!(s, " UP BND {} -inf", v.name);
            }
        }
    }
    s.push_str("ENDATA\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constraint, Objective, Variable};
    use crate::parser::{parse_lp, parse_mps};

    fn e1() -> Problem {
        Problem {
            name: "e1".into(),
            variables: vec![
                Variable::continuous("x1").with_bounds(0.0, 1.0),
                Variable::continuous("x2").with_bounds(0.0, 1.0),
            ],
            objectives: vec![
                Objective::minimize("f1", vec![1.0, 0.0]),
                Objective::minimize("f2", vec![0.0, 1.0]),
            ],
            constraints: vec![Constraint::new("c1", vec![1.0, 1.0], ConstraintSense::Ge, 1.0)],
        }
    }

    #[test]
    fn e1_lp_round_trip() {
        let text = serialize_problem(&e1(), Format::Lp).unwrap();
        assert_eq!(parse_lp(&text).unwrap(), e1());
    }

    #[test]
    fn integer_mps_round_trip() {
        let mut p = e1();
        p.variables[0] = Variable::integer("x1", 0.0, 2.0);
        p.variables.push(Variable::integer("x3", -1.0, f64::INFINITY));
        for o in &mut p.objectives {
            o.coefficients.push(0.0);
        }
        p.constraints[0].coefficients.push(-3.5);
        let text = serialize_problem(&p, Format::Mps).unwrap();
        let q = parse_mps(&text).unwrap();
        assert_eq!(q, p);
        assert_eq!(q.num_integer(), 2);
    }

    #[test]
    fn quadratic_to_mps_fails() {
        let mut p = e1();
        let mut q = QuadraticForm::new();
        q.add_term(0, 0, 1.0);
        p.objectives[0].quadratic = Some(q);
        assert!(matches!(serialize_problem(&p, Format::Mps), Err(WriteError::QuadraticInMps(_))));
        let text = serialize_problem(&p, Format::Lp).unwrap();
        assert_eq!(parse_lp(&text).unwrap(), p);
    }

    #[test]
    fn mixed_senses_to_mps_fails() {
        let mut p = e1();
        p.objectives[1].sense = ObjectiveSense::Maximize;
        assert_eq!(serialize_problem(&p, Format::Mps), Err(WriteError::MixedSenses));
        let text = serialize_problem(&p, Format::Lp).unwrap();
        assert_eq!(parse_lp(&text).unwrap(), p);
    }

    #[test]
    fn reserved_names_rejected_in_lp() {
        let mut p = e1();
        p.variables[0].name = "free".into();
        assert!(matches!(serialize_problem(&p, Format::Lp), Err(WriteError::BadName(_))));
    }

    #[test]
    fn awkward_floats_survive() {
        let mut p = e1();
        p.objectives[0].coefficients = vec![0.1 + 0.2, -1e-300];
        p.constraints[0].rhs = 123456789.123456789;
        p.variables[1].upper = 1.0 / 3.0;
        for f in [Format::Lp, Format::Mps] {
            let text = serialize_problem(&p, f).unwrap();
            let q = crate::parser::parse_str(&text, f).unwrap();
            assert_eq!(q, p, "{f}");
        }
    }
}
