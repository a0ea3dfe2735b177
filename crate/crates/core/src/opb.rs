//! OPB linear format reader, instance writer, and competition-style output.
//!
//! Accepted grammar (one statement per `;`, statements may span lines):
//!
//! ```text
//! * #variable= 4 #constraint= 1        (optional header, first line)
//! * any other comment
//! min: +2 x1 +3 x2 ;
//! +5 x1 +1 x2 +1 x3 +1 x4 >= 6 ;
//! -1 x1 +1 ~x2 <= 0 ;
//! +1 x1 +1 x2 = 1 ;
//! ```
//!
//! A term is a signed integer followed by one literal (`x<k>` or `~x<k>`).
//! The objective may carry one bare integer, read as a constant offset.

use std::fmt::Write as _;
use std::io::{self, BufRead, Read, Write};

use crate::error::ParseError;
use crate::model::{
    normalize_constraint, normalize_objective, Assignment, Literal, PboInstance, RawConstraint,
    Relation, Term,
};

/// Maximum length of a `v` line, prefix included.
pub const MAX_V_LINE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawObjective {
    pub terms: Vec<Term>,
    pub constant: i64,
}

/// Parsed but not yet normalized OPB file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpbDocument {
    pub declared_vars: Option<usize>,
    pub declared_constraints: Option<usize>,
    pub objective: Option<RawObjective>,
    pub constraints: Vec<RawConstraint>,
    /// Source line of each entry in `constraints`.
    pub lines: Vec<usize>,
    pub objective_line: usize,
    /// Largest variable index referenced.
    pub max_var: u32,
}

impl OpbDocument {
    pub fn num_vars(&self) -> usize {
        self.declared_vars
            .unwrap_or(0)
            .max(self.max_var as usize)
    }

    /// Normalizes every constraint and the objective.
    pub fn to_instance(&self) -> Result<PboInstance, ParseError> {
        let mut hard = Vec::with_capacity(self.constraints.len());
        for (i, (raw, &line)) in self.constraints.iter().zip(&self.lines).enumerate() {
            let normalized =
                normalize_constraint(raw, i).map_err(|source| ParseError::Model { line, source })?;
            hard.extend(normalized);
        }
        let objective = match &self.objective {
            Some(obj) => normalize_objective(&obj.terms, obj.constant).map_err(|source| {
                ParseError::Model {
                    line: self.objective_line,
                    source,
                }
            })?,
            None => Default::default(),
        };
        Ok(PboInstance::new(self.num_vars(), hard, objective))
    }
}

pub fn parse_opb<R: Read>(reader: R) -> Result<PboInstance, ParseError> {
    parse_document(reader)?.to_instance()
}

pub fn parse_opb_str(text: &str) -> Result<PboInstance, ParseError> {
    parse_document(text.as_bytes())?.to_instance()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Min,
    Int(i64),
    Var(Literal),
    Rel(Relation),
    Semi,
}

struct Lexer {
    tokens: Vec<(Token, usize)>,
}

impl Lexer {
    fn lex_line(&mut self, line: &str, lineno: usize) -> Result<(), ParseError> {
        let bytes = line.as_bytes();
        let syntax = |msg: String| ParseError::Syntax { line: lineno, msg };
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            match c {
                b' ' | b'\t' | b'\r' => i += 1,
                b';' => {
                    self.tokens.push((Token::Semi, lineno));
                    i += 1;
                }
                b'>' | b'<' => {
                    if bytes.get(i + 1) != Some(&b'=') {
                        return Err(syntax(format!("unknown operator '{}'", c as char)));
                    }
                    let rel = if c == b'>' { Relation::Ge } else { Relation::Le };
                    self.tokens.push((Token::Rel(rel), lineno));
                    i += 2;
                }
                b'=' => {
                    self.tokens.push((Token::Rel(Relation::Eq), lineno));
                    i += 1;
                }
                b'+' | b'-' | b'0'..=b'9' => {
                    let start = i;
                    if c == b'+' || c == b'-' {
                        i += 1;
                    }
                    let digits = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if digits == i {
                        return Err(syntax(format!("malformed integer '{}'", &line[start..i])));
                    }
                    let value: i64 = line[start..i]
                        .parse()
                        .map_err(|_| syntax(format!("malformed integer '{}'", &line[start..i])))?;
                    self.tokens.push((Token::Int(value), lineno));
                }
                b'~' | b'x' => {
                    let negated = c == b'~';
                    if negated {
                        i += 1;
                    }
                    if bytes.get(i) != Some(&b'x') {
                        return Err(syntax("expected variable after '~'".into()));
                    }
                    i += 1;
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let var: u32 = line[start..i]
                        .parse()
                        .map_err(|_| syntax("malformed variable name".into()))?;
                    if var == 0 {
                        return Err(syntax("variable index 0".into()));
                    }
                    self.tokens.push((Token::Var(Literal::new(var, negated)), lineno));
                }
                b'm' if line[i..].starts_with("min:") => {
                    self.tokens.push((Token::Min, lineno));
                    i += 4;
                }
                _ => {
                    let rest: String = line[i..].chars().take(12).collect();
                    return Err(syntax(format!("unexpected input '{rest}'")));
                }
            }
        }
        Ok(())
    }
}

fn parse_header(line: &str) -> (Option<usize>, Option<usize>) {
    let field = |key: &str| {
        line.find(key).and_then(|p| {
            line[p + key.len()..]
                .split_whitespace()
                .next()
                .and_then(|s| s.parse().ok())
        })
    };
    (field("#variable="), field("#constraint="))
}

/// Reads an OPB document without normalizing it.
pub fn parse_document<R: Read>(reader: R) -> Result<OpbDocument, ParseError> {
    let mut doc = OpbDocument::default();
    let mut lexer = Lexer { tokens: Vec::new() };
    let mut seen_statement = false;
    for (idx, line) in io::BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim_start().starts_with('*') {
            if idx == 0 {
                let (v, c) = parse_header(&line);
                doc.declared_vars = v;
                doc.declared_constraints = c;
            }
            continue;
        }
        lexer.lex_line(&line, lineno)?;
        // Statements are assembled as soon as a ';' closes them so that a
        // malformed statement reports its own line.
        while let Some(end) = lexer.tokens.iter().position(|(t, _)| *t == Token::Semi) {
            let stmt: Vec<_> = lexer.tokens.drain(..=end).collect();
            parse_statement(&stmt[..stmt.len() - 1], &mut doc, seen_statement)?;
            seen_statement = true;
        }
    }
    if let Some((_, line)) = lexer.tokens.first() {
        return Err(ParseError::Syntax {
            line: *line,
            msg: "missing ';'".into(),
        });
    }
    if let Some(m) = doc.declared_constraints {
        if m != doc.constraints.len() {
            log::warn!(
                "header declares {m} constraints, file contains {}",
                doc.constraints.len()
            );
        }
    }
    Ok(doc)
}

fn parse_statement(
    stmt: &[(Token, usize)],
    doc: &mut OpbDocument,
    seen_statement: bool,
) -> Result<(), ParseError> {
    let Some((first, line)) = stmt.first() else {
        return Ok(());
    };
    let line = *line;
    if *first == Token::Min {
        if seen_statement || doc.objective.is_some() {
            return Err(ParseError::Syntax {
                line,
                msg: "objective must be the first statement".into(),
            });
        }
        let (terms, constant, rest) = parse_terms(&stmt[1..], doc, true)?;
        if let Some((_, l)) = rest.first() {
            return Err(ParseError::Syntax {
                line: *l,
                msg: "unexpected token in objective".into(),
            });
        }
        doc.objective = Some(RawObjective { terms, constant });
        doc.objective_line = line;
        return Ok(());
    }
    let (terms, _, rest) = parse_terms(stmt, doc, false)?;
    let relation = match rest.first() {
        Some((Token::Rel(r), _)) => *r,
        Some((_, l)) => {
            return Err(ParseError::Syntax {
                line: *l,
                msg: "expected '>=', '<=' or '='".into(),
            })
        }
        None => {
            return Err(ParseError::Syntax {
                line,
                msg: "missing relational operator".into(),
            })
        }
    };
    let rhs = match rest.get(1) {
        Some((Token::Int(v), _)) => *v,
        _ => {
            return Err(ParseError::Syntax {
                line,
                msg: "expected integer right-hand side".into(),
            })
        }
    };
    if let Some((_, l)) = rest.get(2) {
        return Err(ParseError::Syntax {
            line: *l,
            msg: "unexpected token after right-hand side".into(),
        });
    }
    doc.constraints.push(RawConstraint::new(terms, relation, rhs));
    doc.lines.push(line);
    Ok(())
}

fn note_var(doc: &mut OpbDocument, lit: Literal, line: usize) -> Result<(), ParseError> {
    if let Some(n) = doc.declared_vars {
        if lit.var() as usize > n {
            return Err(ParseError::Syntax {
                line,
                msg: format!("variable x{} exceeds declared count {n}", lit.var()),
            });
        }
    }
    doc.max_var = doc.max_var.max(lit.var());
    Ok(())
}

type Terms<'a> = (Vec<Term>, i64, &'a [(Token, usize)]);

/// Reads terms up to the first relational operator (or the end).
fn parse_terms<'a>(
    mut toks: &'a [(Token, usize)],
    doc: &mut OpbDocument,
    allow_constant: bool,
) -> Result<Terms<'a>, ParseError> {
    let mut terms = Vec::new();
    let mut constant = 0i64;
    loop {
        match toks {
            [(Token::Int(c), line), rest @ ..] => {
                let mut lits = rest.iter().take_while(|(t, _)| matches!(t, Token::Var(_)));
                match lits.next() {
                    Some((Token::Var(lit), l)) => {
                        if let Some((_, l)) = lits.next() {
                            return Err(ParseError::UnsupportedNonlinear { line: *l });
                        }
                        note_var(doc, *lit, *l)?;
                        terms.push(Term::new(*c, *lit));
                        toks = &rest[1..];
                    }
                    _ if allow_constant => {
                        constant += c;
                        toks = rest;
                    }
                    _ => {
                        return Err(ParseError::Syntax {
                            line: *line,
                            msg: "coefficient without variable".into(),
                        })
                    }
                }
            }
            [(Token::Var(lit), line), rest @ ..] => {
                if let Some((Token::Var(_), l)) = rest.first() {
                    return Err(ParseError::UnsupportedNonlinear { line: *l });
                }
                note_var(doc, *lit, *line)?;
                terms.push(Term::new(1, *lit));
                toks = rest;
            }
            [(Token::Min, l), ..] => {
                return Err(ParseError::Syntax {
                    line: *l,
                    msg: "unexpected 'min:'".into(),
                })
            }
            _ => return Ok((terms, constant, toks)),
        }
    }
}

/// Writes a normalized instance back out as OPB.
pub fn write_opb(instance: &PboInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "* #variable= {} #constraint= {}",
        instance.num_vars,
        instance.hard.len()
    );
    if !instance.objective.is_empty() || instance.objective.constant_offset != 0 {
        out.push_str("min:");
        for t in &instance.objective.terms {
            let _ = write!(out, " +{} {}", t.coeff, t.lit);
        }
        if instance.objective.constant_offset != 0 {
            let _ = write!(out, " {:+}", instance.objective.constant_offset);
        }
        out.push_str(" ;\n");
    }
    for c in &instance.hard {
        for t in &c.terms {
            let _ = write!(out, "+{} {} ", t.coeff, t.lit);
        }
        let _ = writeln!(out, ">= {} ;", c.bound);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Satisfiable,
    Unknown,
    Unsatisfiable,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Satisfiable => "SATISFIABLE",
            SolveStatus::Unknown => "UNKNOWN",
            SolveStatus::Unsatisfiable => "UNSATISFIABLE",
        }
    }

    /// Process exit code for this status.
    pub fn exit_code(self) -> i32 {
        match self {
            SolveStatus::Satisfiable => 0,
            SolveStatus::Unknown => 10,
            SolveStatus::Unsatisfiable => 20,
        }
    }
}

/// Streams competition output: `o` lines during search, then `s` and `v`.
pub struct SolutionWriter<W: Write> {
    out: W,
}

impl<W: Write> SolutionWriter<W> {
    pub fn new(out: W) -> Self {
        SolutionWriter { out }
    }

    /// Emits an `o` line and flushes it immediately.
    pub fn improvement(&mut self, cost: i64) -> io::Result<()> {
        writeln!(self.out, "o {cost}")?;
        self.out.flush()
    }

    pub fn finish(&mut self, status: SolveStatus, best: Option<&Assignment>) -> io::Result<()> {
        writeln!(self.out, "s {}", status.as_str())?;
        if let (SolveStatus::Satisfiable, Some(a)) = (status, best) {
            for line in v_lines(a) {
                writeln!(self.out, "{line}")?;
            }
        }
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Formats an assignment as `v` lines of at most [`MAX_V_LINE`] characters.
pub fn v_lines(assignment: &Assignment) -> Vec<String> {
    let mut lines = Vec::new();
    let mut cur = String::from("v");
    for (i, &val) in assignment.values().iter().enumerate() {
        let lit = if val {
            format!("x{}", i + 1)
        } else {
            format!("-x{}", i + 1)
        };
        if cur.len() + 1 + lit.len() > MAX_V_LINE {
            lines.push(std::mem::replace(&mut cur, String::from("v")));
        }
        cur.push(' ');
        cur.push_str(&lit);
    }
    if cur.len() > 1 || lines.is_empty() {
        lines.push(cur);
    }
    lines
}

/// Solver output read back from text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolutionFile {
    pub status: Option<String>,
    pub costs: Vec<i64>,
    /// `(var, value)` pairs from the `v` lines.
    pub literals: Vec<(u32, bool)>,
}

impl SolutionFile {
    pub fn last_cost(&self) -> Option<i64> {
        self.costs.last().copied()
    }

    /// Complete assignment over `num_vars`, or the first missing variable.
    pub fn assignment(&self, num_vars: usize) -> Result<Assignment, u32> {
        let mut values: Vec<Option<bool>> = vec![None; num_vars];
        for &(var, val) in &self.literals {
            if let Some(slot) = values.get_mut(var as usize - 1) {
                *slot = Some(val);
            }
        }
        values
            .iter()
            .enumerate()
            .map(|(i, v)| v.ok_or(i as u32 + 1))
            .collect::<Result<Vec<_>, _>>()
            .map(Assignment::from_values)
    }
}

pub fn parse_solution<R: Read>(reader: R) -> Result<SolutionFile, ParseError> {
    let mut sol = SolutionFile::default();
    for (idx, line) in io::BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("s") => sol.status = Some(parts.collect::<Vec<_>>().join(" ")),
            Some("o") => {
                let cost = parts.next().and_then(|s| s.parse().ok()).ok_or(ParseError::Syntax {
                    line: lineno,
                    msg: "malformed 'o' line".into(),
                })?;
                sol.costs.push(cost);
            }
            Some("v") => {
                for tok in parts {
                    let (val, name) = match tok.strip_prefix('-').or_else(|| tok.strip_prefix('~')) {
                        Some(rest) => (false, rest),
                        None => (true, tok),
                    };
                    let var = name
                        .strip_prefix('x')
                        .and_then(|s| s.parse::<u32>().ok())
                        .filter(|&v| v >= 1)
                        .ok_or_else(|| ParseError::Syntax {
                            line: lineno,
                            msg: format!("malformed literal '{tok}'"),
                        })?;
                    sol.literals.push((var, val));
                }
            }
            _ => {}
        }
    }
    Ok(sol)
}
