use std::collections::HashMap;

use crate::model::{Constraint, ConstraintSense, Objective, ObjectiveSense, Problem, QuadraticForm, Variable};

use super::{column_of, ParseError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Colon,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LBracket,
    RBracket,
    Cmp(ConstraintSense),
    /// `min`/`max` keyword inside the objective section.
    Sense(ObjectiveSense),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
    line_start: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Objectives,
    Constraints,
    Bounds,
    Generals,
    Binaries,
}

/// Words that switch sections when they open a line. The writer refuses to
/// emit names that collide with them.
pub(crate) const RESERVED: &[&str] = &[
    "minimize", "minimise", "minimum", "min", "maximize", "maximise", "maximum", "max", "subject", "such", "st",
    "s.t.", "bounds", "bound", "generals", "general", "gen", "integers", "binaries", "binary", "bin", "end", "free",
    "inf", "infinity", "semi-continuous", "semis", "semi", "sos",
];

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || "_!\"#$%&(),;?@'{}|~`".contains(c)
}

fn is_ident_char(c: char) -> bool {
    is_ident_start(c) || c.is_ascii_digit() || c == '.'
}

/// Whether `name` survives a write/parse cycle as a single LP identifier.
pub(crate) fn is_plain_name(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(is_ident_start)
        && chars.all(is_ident_char)
        && !RESERVED.contains(&name.to_ascii_lowercase().as_str())
}

fn tokenize(text: &str) -> Result<(Vec<Token>, Option<String>), ParseError> {
    let mut out = Vec::new();
    let mut name = None;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = match raw.find('\\') {
            Some(p) => {
                let comment = raw[p + 1..].trim();
                if let Some(head) = comment.get(..13).filter(|h| h.eq_ignore_ascii_case("problem name:")) {
                    if name.is_none() {
                        name = Some(comment[head.len()..].trim().to_string());
                    }
                }
                &raw[..p]
            }
            None => raw,
        };
        let mut first = true;
        let mut it = line.char_indices().peekable();
        while let Some(&(at, c)) = it.peek() {
            let col = column_of(line, at);
            if c.is_whitespace() {
                it.next();
                continue;
            }
            let tok = if c.is_ascii_digit() || (c == '.' && line[at + 1..].starts_with(|d: char| d.is_ascii_digit())) {
                let end = number_end(line, at);
                while it.peek().is_some_and(|&(p, _)| p < end) {
                    it.next();
                }
                let s = &line[at..end];
                Tok::Num(
                    s.parse()
                        .map_err(|_| ParseError::at(line_no, col, format!("malformed number `{s}`")))?,
                )
            } else if is_ident_start(c) {
                let mut end = at;
                while let Some(&(p, ch)) = it.peek() {
                    if !is_ident_char(ch) {
                        break;
                    }
                    end = p + ch.len_utf8();
                    it.next();
                }
                Tok::Ident(line[at..end].to_string())
            } else {
                it.next();
                match c {
                    ':' => Tok::Colon,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '^' => Tok::Caret,
                    '/' => Tok::Slash,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '<' | '>' | '=' => {
                        let next = it.peek().map(|&(_, n)| n);
                        let sense = match (c, next) {
                            ('<', Some('=')) | ('=', Some('<')) => {
                                it.next();
                                ConstraintSense::Le
                            }
                            ('>', Some('=')) | ('=', Some('>')) => {
                                it.next();
                                ConstraintSense::Ge
                            }
                            ('<', _) => ConstraintSense::Le,
                            ('>', _) => ConstraintSense::Ge,
                            _ => ConstraintSense::Eq,
                        };
                        Tok::Cmp(sense)
                    }
                    other => return Err(ParseError::at(line_no, col, format!("unexpected character `{other}`"))),
                }
            };
            out.push(Token {
                tok,
                line: line_no,
                col,
                line_start: first,
            });
            first = false;
        }
    }
    Ok((out, name))
}

fn number_end(line: &str, start: usize) -> usize {
    let b = line.as_bytes();
    let mut i = start;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    if i < b.len() && b[i] == b'.' {
        i += 1;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

enum Keyword {
    Sense(ObjectiveSense),
    Section(Section),
    End,
    Unsupported,
}

/// Recognizes a section keyword at `toks[i]`; returns it with the number of tokens it spans.
fn keyword(toks: &[Token], i: usize) -> Option<(Keyword, usize)> {
    let Tok::Ident(w) = &toks[i].tok else {
        return None;
    };
    let next_is = |word: &str| {
        toks.get(i + 1)
            .is_some_and(|t| !t.line_start && matches!(&t.tok, Tok::Ident(s) if s.eq_ignore_ascii_case(word)))
    };
    let kw = match w.to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "minimum" | "min" => Keyword::Sense(ObjectiveSense::Minimize),
        "maximize" | "maximise" | "maximum" | "max" => Keyword::Sense(ObjectiveSense::Maximize),
        "subject" if next_is("to") => return Some((Keyword::Section(Section::Constraints), 2)),
        "such" if next_is("that") => return Some((Keyword::Section(Section::Constraints), 2)),
        "st" | "s.t." => Keyword::Section(Section::Constraints),
        "bounds" | "bound" => Keyword::Section(Section::Bounds),
        "generals" | "general" | "gen" | "integers" => Keyword::Section(Section::Generals),
        "binaries" | "binary" | "bin" => Keyword::Section(Section::Binaries),
        "end" => Keyword::End,
        "semi-continuous" | "semis" | "semi" | "sos" => Keyword::Unsupported,
        _ => return None,
    };
    Some((kw, 1))
}

#[derive(Default)]
struct Expr {
    linear: Vec<(usize, f64)>,
    quadratic: Option<QuadraticForm>,
}

#[derive(Default)]
struct Vars {
    names: Vec<String>,
    index: HashMap<String, usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    integer: Vec<bool>,
}

impl Vars {
    fn get(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.lower.push(0.0);
        self.upper.push(f64::INFINITY);
        self.integer.push(false);
        i
    }
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    end: usize,
    vars: Vars,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        (self.pos < self.end).then(|| &self.toks[self.pos])
    }

    fn peek_at(&self, k: usize) -> Option<&'a Token> {
        (self.pos + k < self.end).then(|| &self.toks[self.pos + k])
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        match self.peek().or_else(|| self.toks.get(self.end.saturating_sub(1))) {
            Some(t) => ParseError::at(t.line, t.col, msg),
            None => ParseError::at(1, 1, msg),
        }
    }

    /// `name :` at the cursor.
    fn row_name(&mut self) -> Option<(&'a Token, String)> {
        match (self.peek(), self.peek_at(1)) {
            (Some(t @ Token { tok: Tok::Ident(n), .. }), Some(Token { tok: Tok::Colon, .. })) => {
                self.pos += 2;
                Some((t, n.clone()))
            }
            _ => None,
        }
    }

    fn at_row_name(&self) -> bool {
        matches!(
            (self.peek(), self.peek_at(1)),
            (Some(Token { tok: Tok::Ident(_), .. }), Some(Token { tok: Tok::Colon, .. }))
        )
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        match self.bump() {
            Some(Token { tok: Tok::Num(v), .. }) => Ok(*v),
            _ => {
                self.pos -= 1;
                Err(self.err_here("expected a number"))
            }
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(n), .. }) if !self.at_row_name() => {
                self.pos += 1;
                Ok(n.clone())
            }
            _ => Err(self.err_here("expected a variable name")),
        }
    }

    /// Signed sum of linear terms and bracketed quadratic groups. Stops at
    /// anything that cannot continue the expression.
    fn expression(&mut self) -> Result<Expr, ParseError> {
        let mut e = Expr::default();
        let mut first = true;
        loop {
            let mut sign = 1.0;
            let mut signed = false;
            while let Some(t) = self.peek() {
                match t.tok {
                    Tok::Plus => {}
                    Tok::Minus => sign = -sign,
                    _ => break,
                }
                signed = true;
                self.pos += 1;
            }
            if !first && !signed {
                return Ok(e);
            }
            match self.peek().map(|t| &t.tok) {
                Some(Tok::LBracket) => {
                    self.pos += 1;
                    let q = self.quadratic_group(sign)?;
                    let acc = e.quadratic.get_or_insert_with(QuadraticForm::new);
                    for (i, j, c) in q.terms() {
                        acc.add_term(i, j, c);
                    }
                }
                Some(Tok::Num(v)) => {
                    let v = *v;
                    self.pos += 1;
                    if matches!(self.peek().map(|t| &t.tok), Some(Tok::Star)) {
                        self.pos += 1;
                    }
                    if !matches!(self.peek().map(|t| &t.tok), Some(Tok::Ident(_))) || self.at_row_name() {
                        self.pos -= 1;
                        return Err(self.err_here("constant terms are not supported in expressions"));
                    }
                    let name = self.ident()?;
                    e.linear.push((self.vars.get(&name), sign * v));
                }
                Some(Tok::Ident(_)) if !self.at_row_name() => {
                    let name = self.ident()?;
                    e.linear.push((self.vars.get(&name), sign));
                }
                _ if signed => return Err(self.err_here("expected a term after sign")),
                _ => return Ok(e),
            }
            first = false;
        }
    }

    /// Contents of `[ ... ]` plus an optional `/ k`, after the opening bracket.
    fn quadratic_group(&mut self, outer_sign: f64) -> Result<QuadraticForm, ParseError> {
        let mut terms: Vec<(usize, usize, f64)> = Vec::new();
        let mut first = true;
        loop {
            if matches!(self.peek().map(|t| &t.tok), Some(Tok::RBracket)) {
                self.pos += 1;
                break;
            }
            let mut sign = 1.0;
            let mut signed = false;
            while let Some(t) = self.peek() {
                match t.tok {
                    Tok::Plus => {}
                    Tok::Minus => sign = -sign,
                    _ => break,
                }
                signed = true;
                self.pos += 1;
            }
            if !first && !signed {
                return Err(self.err_here("expected `+`, `-` or `]` in quadratic group"));
            }
            let mut coef = 1.0;
            if let Some(Token { tok: Tok::Num(v), .. }) = self.peek() {
                coef = *v;
                self.pos += 1;
                if matches!(self.peek().map(|t| &t.tok), Some(Tok::Star)) {
                    self.pos += 1;
                }
            }
            let a = self.ident()?;
            let ia = self.vars.get(&a);
            match self.bump().map(|t| &t.tok) {
                Some(Tok::Caret) => {
                    let p = self.number()?;
                    if p != 2.0 {
                        self.pos -= 1;
                        return Err(self.err_here("only squares are allowed in quadratic groups"));
                    }
                    terms.push((ia, ia, sign * coef));
                }
                Some(Tok::Star) => {
                    let b = self.ident()?;
                    let ib = self.vars.get(&b);
                    terms.push((ia, ib, sign * coef));
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.err_here("expected `^ 2` or `* var` in quadratic group"));
                }
            }
            first = false;
        }
        let mut divisor = 1.0;
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::Slash)) {
            self.pos += 1;
            divisor = self.number()?;
            if divisor == 0.0 {
                self.pos -= 1;
                return Err(self.err_here("division by zero"));
            }
        }
        let mut q = QuadraticForm::new();
        for (i, j, c) in terms {
            q.add_term(i, j, outer_sign * c / divisor);
        }
        Ok(q)
    }

    fn value(&mut self) -> Result<f64, ParseError> {
        let mut sign = 1.0;
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Plus => {}
                Tok::Minus => sign = -sign,
                _ => break,
            }
            self.pos += 1;
        }
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(sign * v)
            }
            Some(Tok::Ident(w)) if w.eq_ignore_ascii_case("inf") || w.eq_ignore_ascii_case("infinity") => {
                self.pos += 1;
                Ok(sign * f64::INFINITY)
            }
            _ => Err(self.err_here("expected a number")),
        }
    }

    fn cmp(&mut self) -> Result<ConstraintSense, ParseError> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Cmp(s)) => {
                self.pos += 1;
                Ok(*s)
            }
            _ => Err(self.err_here("expected `<=`, `>=` or `=`")),
        }
    }
}

struct RawRow {
    name: String,
    sense: ObjectiveSense,
    expr: Expr,
}

struct RawConstraint {
    name: String,
    expr: Expr,
    sense: ConstraintSense,
    rhs: f64,
}

pub fn parse_lp(text: &str) -> Result<Problem, ParseError> {
    let (mut toks, name) = tokenize(text)?;

    // Split into sections; `min`/`max` inside the objective section become sense markers.
    let mut sections: Vec<(Section, usize, usize, ObjectiveSense, (usize, usize))> = Vec::new();
    let mut current: Option<(Section, usize, ObjectiveSense, (usize, usize))> = None;
    let mut i = 0;
    let mut end = toks.len();
    while i < toks.len() {
        if toks[i].line_start {
            if let Some((kw, span)) = keyword(&toks, i) {
                let here = (toks[i].line, toks[i].col);
                match kw {
                    Keyword::Sense(s) if matches!(current, Some((Section::Objectives, ..))) => {
                        toks[i].tok = Tok::Sense(s);
                        i += 1;
                        continue;
                    }
                    Keyword::Sense(s) => {
                        if sections.iter().any(|x| x.0 == Section::Objectives) {
                            return Err(ParseError::at(here.0, here.1, "objective section appears twice"));
                        }
                        close(&mut sections, current.take(), i);
                        current = Some((Section::Objectives, i + span, s, here));
                    }
                    Keyword::Section(sec) => {
                        close(&mut sections, current.take(), i);
                        current = Some((sec, i + span, ObjectiveSense::Minimize, here));
                    }
                    Keyword::End => {
                        end = i;
                        break;
                    }
                    Keyword::Unsupported => {
                        return Err(ParseError::at(here.0, here.1, "unsupported section (SOS and semi-continuous)"));
                    }
                }
                i += span;
                continue;
            }
        }
        if current.is_none() {
            let t = &toks[i];
            let what = match &t.tok {
                Tok::Ident(w) => format!("unknown section keyword `{w}`"),
                _ => "expected a section keyword".to_string(),
            };
            return Err(ParseError::at(t.line, t.col, what));
        }
        i += 1;
    }
    close(&mut sections, current.take(), end);

    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: 0,
        vars: Vars::default(),
    };
    let mut objectives: Vec<(RawRow, (usize, usize))> = Vec::new();
    let mut constraints: Vec<(RawConstraint, (usize, usize))> = Vec::new();
    for &(sec, from, to, default_sense, _) in &sections {
        p.pos = from;
        p.end = to;
        match sec {
            Section::Objectives => {
                let mut pending: Option<ObjectiveSense> = None;
                while let Some(t) = p.peek() {
                    if let Tok::Sense(s) = t.tok {
                        pending = Some(s);
                        p.pos += 1;
                        continue;
                    }
                    let loc = (t.line, t.col);
                    let name = match p.row_name() {
                        Some((_, n)) => n,
                        None => format!("obj{}", objectives.len() + 1),
                    };
                    let expr = p.expression()?;
                    // A new row starts with a name, a sense keyword or an unsigned term on a fresh line.
                    let next = p.peek();
                    if next.is_none_or(|t| t.line_start || matches!(t.tok, Tok::Sense(_))) || p.at_row_name() {
                        let sense = pending.take().unwrap_or(default_sense);
                        objectives.push((RawRow { name, sense, expr }, loc));
                    } else {
                        return Err(p.err_here("unexpected token in objective"));
                    }
                }
            }
            Section::Constraints => {
                while let Some(t) = p.peek() {
                    let loc = (t.line, t.col);
                    let name = p.row_name().map(|(_, n)| n);
                    let expr = p.expression()?;
                    if expr.linear.is_empty() && expr.quadratic.is_none() {
                        return Err(p.err_here("expected a constraint expression"));
                    }
                    let sense = p.cmp()?;
                    let rhs = p.value()?;
                    if !rhs.is_finite() {
                        p.pos -= 1;
                        return Err(p.err_here("right-hand side must be finite"));
                    }
                    let name = name.unwrap_or_else(|| format!("R{}", constraints.len() + 1));
                    constraints.push((RawConstraint { name, expr, sense, rhs }, loc));
                }
            }
            Section::Bounds => {
                while p.peek().is_some() {
                    bound(&mut p)?;
                }
            }
            Section::Generals | Section::Binaries => {
                while p.peek().is_some() {
                    let name = p.ident()?;
                    let j = p.vars.get(&name);
                    p.vars.integer[j] = true;
                    if sec == Section::Binaries {
                        p.vars.lower[j] = 0.0;
                        p.vars.upper[j] = 1.0;
                    }
                }
            }
        }
    }

    if objectives.is_empty() {
        let (line, col) = sections
            .iter()
            .find(|s| s.0 == Section::Objectives)
            .map_or((1, 1), |s| s.4);
        return Err(ParseError::at(line, col, "no objectives"));
    }
    check_unique(objectives.iter().map(|(o, l)| (&o.name, *l)), "objective")?;
    check_unique(constraints.iter().map(|(c, l)| (&c.name, *l)), "constraint")?;

    let vars = p.vars;
    let n = vars.names.len();
    let dense = |e: &Expr| {
        let mut v = vec![0.0; n];
        for &(j, c) in &e.linear {
            v[j] += c;
        }
        v
    };
    Ok(Problem {
        name: name.unwrap_or_default(),
        objectives: objectives
            .iter()
            .map(|(o, _)| Objective {
                name: o.name.clone(),
                sense: o.sense,
                coefficients: dense(&o.expr),
                quadratic: o.expr.quadratic.clone(),
            })
            .collect(),
        constraints: constraints
            .iter()
            .map(|(c, _)| Constraint {
                name: c.name.clone(),
                coefficients: dense(&c.expr),
                quadratic: c.expr.quadratic.clone(),
                sense: c.sense,
                rhs: c.rhs,
            })
            .collect(),
        variables: (0..n)
            .map(|j| Variable {
                name: vars.names[j].clone(),
                lower: vars.lower[j],
                upper: vars.upper[j],
                integer: vars.integer[j],
            })
            .collect(),
    })
}

type SectionSpan = (Section, usize, usize, ObjectiveSense, (usize, usize));

fn close(
    sections: &mut Vec<SectionSpan>,
    current: Option<(Section, usize, ObjectiveSense, (usize, usize))>,
    to: usize,
) {
    if let Some((sec, from, sense, loc)) = current {
        sections.push((sec, from, to, sense, loc));
    }
}

fn check_unique<'s>(
    names: impl Iterator<Item = (&'s String, (usize, usize))>,
    kind: &str,
) -> Result<(), ParseError> {
    let mut seen = HashMap::new();
    for (name, loc) in names {
        if seen.insert(name.as_str(), ()).is_some() {
            return Err(ParseError::at(loc.0, loc.1, format!("duplicate {kind} name `{name}`")));
        }
    }
    Ok(())
}

/// One bound statement: `x free`, `x op v`, `v op x` or `v op x op v`.
fn bound(p: &mut Parser<'_>) -> Result<(), ParseError> {
    let starts_with_var = matches!(
        p.peek().map(|t| &t.tok),
        Some(Tok::Ident(w)) if !w.eq_ignore_ascii_case("inf") && !w.eq_ignore_ascii_case("infinity")
    );
    if starts_with_var {
        let name = p.ident()?;
        let j = p.vars.get(&name);
        if let Some(Token { tok: Tok::Ident(w), .. }) = p.peek() {
            if w.eq_ignore_ascii_case("free") {
                p.pos += 1;
                p.vars.lower[j] = f64::NEG_INFINITY;
                p.vars.upper[j] = f64::INFINITY;
                return Ok(());
            }
        }
        let op = p.cmp()?;
        let v = p.value()?;
        apply_bound(&mut p.vars, j, op, v);
        return Ok(());
    }
    let v = p.value()?;
    let op = p.cmp()?;
    let name = p.ident()?;
    let j = p.vars.get(&name);
    // `v <= x` is `x >= v`.
    let flipped = match op {
        ConstraintSense::Le => ConstraintSense::Ge,
        ConstraintSense::Ge => ConstraintSense::Le,
        ConstraintSense::Eq => ConstraintSense::Eq,
    };
    apply_bound(&mut p.vars, j, flipped, v);
    if matches!(p.peek().map(|t| &t.tok), Some(Tok::Cmp(_))) {
        let op2 = p.cmp()?;
        let v2 = p.value()?;
        apply_bound(&mut p.vars, j, op2, v2);
    }
    Ok(())
}

fn apply_bound(vars: &mut Vars, j: usize, op: ConstraintSense, v: f64) {
    match op {
        ConstraintSense::Le => vars.upper[j] = v,
        ConstraintSense::Ge => vars.lower[j] = v,
        ConstraintSense::Eq => {
            vars.lower[j] = v;
            vars.upper[j] = v;
        }
    }
}
