//! Tokenizer and recursive-descent parser for correlator expressions.
//!
//! ```text
//! expression := insertion*
//! insertion  := ident '*'? '(' label ')'
//!             | ident '_' label              (operator strings only)
//! ```
//!
//! `<name>bar` stands for the adjoint of a declared parafermi field and, in
//! operator strings, `<name>dag_k` for the creator `<name>*(k)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::Statistics;
use crate::correlator::{FieldSpec, Insertion, Mode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprErrorKind {
    Syntax(String),
    UndeclaredField(String),
    DuplicateLabel(String),
}

impl fmt::Display for ExprErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ExprErrorKind::UndeclaredField(name) => write!(f, "undeclared field `{name}`"),
            ExprErrorKind::DuplicateLabel(label) => write!(f, "duplicate point label `{label}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ExprError {
    pub line: usize,
    pub column: usize,
    pub kind: ExprErrorKind,
}

struct Cursor<'a> {
    chars: Vec<char>,
    at: usize,
    src: &'a str,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.at += c.is_some() as usize;
        c
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.at += 1;
        }
    }

    fn position(&self, at: usize) -> (usize, usize) {
        let before = &self.chars[..at.min(self.chars.len())];
        let line = 1 + before.iter().filter(|&&c| c == '\n').count();
        let column = 1 + before.iter().rev().take_while(|&&c| c != '\n').count();
        (line, column)
    }

    fn error(&self, at: usize, kind: ExprErrorKind) -> ExprError {
        let (line, column) = self.position(at);
        ExprError { line, column, kind }
    }

    fn syntax(&self, at: usize, msg: impl Into<String>) -> ExprError {
        self.error(at, ExprErrorKind::Syntax(msg.into()))
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let start = self.at;
        while self.peek().is_some_and(&f) {
            self.at += 1;
        }
        self.chars[start..self.at].iter().collect()
    }

    fn describe(&self, at: usize) -> String {
        match self.chars.get(at) {
            Some(c) => format!("unexpected `{c}`"),
            None if self.src.is_empty() => "empty expression".into(),
            None => "unexpected end of expression".into(),
        }
    }
}

fn is_label_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '\'' | '+' | '-')
}

/// Parses `src` against the declared fields, leftmost token first.
pub fn parse_expression(
    src: &str,
    fields: &[FieldSpec],
    mode: Mode,
) -> Result<Vec<Insertion>, ExprError> {
    let mut cur = Cursor {
        chars: src.chars().collect(),
        at: 0,
        src,
    };
    let by_name: BTreeMap<&str, usize> = fields
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name.as_str(), i))
        .collect();
    let mut out = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    cur.skip_ws();
    while cur.peek().is_some() {
        let start = cur.at;
        if !cur.peek().is_some_and(char::is_alphabetic) {
            return Err(cur.syntax(
                start,
                format!("{}, expected a field name", cur.describe(start)),
            ));
        }
        let ident = cur.take_while(char::is_alphanumeric);
        let (field, mut adjoint) = resolve(&ident, &by_name, fields, mode)
            .ok_or_else(|| cur.error(start, ExprErrorKind::UndeclaredField(ident.clone())))?;
        let label = match cur.peek() {
            Some('_') => {
                if mode != Mode::OperatorString {
                    return Err(cur.syntax(
                        cur.at,
                        "`name_label` shorthand is only valid in operator strings",
                    ));
                }
                cur.bump();
                let label = cur.take_while(char::is_alphanumeric);
                if label.is_empty() {
                    return Err(cur.syntax(
                        cur.at,
                        format!("{}, expected a mode label", cur.describe(cur.at)),
                    ));
                }
                label
            }
            _ => {
                if cur.peek() == Some('*') {
                    if adjoint {
                        return Err(cur.syntax(cur.at, "adjoint marked twice"));
                    }
                    cur.bump();
                    adjoint = true;
                }
                if cur.peek() != Some('(') {
                    return Err(
                        cur.syntax(cur.at, format!("{}, expected `(`", cur.describe(cur.at)))
                    );
                }
                cur.bump();
                let label_at = cur.at;
                let label = cur.take_while(is_label_char);
                if label.is_empty() {
                    return Err(cur.syntax(
                        label_at,
                        format!("{}, expected a label", cur.describe(label_at)),
                    ));
                }
                if cur.peek() != Some(')') {
                    return Err(
                        cur.syntax(cur.at, format!("{}, expected `)`", cur.describe(cur.at)))
                    );
                }
                cur.bump();
                label
            }
        };
        if cur.peek().is_some_and(|c| !c.is_whitespace()) {
            return Err(cur.syntax(
                cur.at,
                format!("{}, expected whitespace", cur.describe(cur.at)),
            ));
        }
        if mode == Mode::TimeOrdered {
            if seen.insert(label.clone(), start).is_some() {
                return Err(cur.error(start, ExprErrorKind::DuplicateLabel(label)));
            }
            out.push(Insertion::field(field, adjoint, label));
        } else if adjoint {
            out.push(Insertion::creator(field, label));
        } else {
            out.push(Insertion::annihilator(field, label));
        }
        cur.skip_ws();
    }
    Ok(out)
}

fn resolve(
    ident: &str,
    by_name: &BTreeMap<&str, usize>,
    fields: &[FieldSpec],
    mode: Mode,
) -> Option<(usize, bool)> {
    if let Some(&f) = by_name.get(ident) {
        return Some((f, false));
    }
    if let Some(&f) = ident.strip_suffix("bar").and_then(|base| by_name.get(base)) {
        if fields[f].stat == Statistics::ParaFermi {
            return Some((f, true));
        }
    }
    if mode == Mode::OperatorString {
        if let Some(&f) = ident.strip_suffix("dag").and_then(|base| by_name.get(base)) {
            return Some((f, true));
        }
    }
    None
}

/// Writes insertions back in the input grammar.
pub fn format_expression(insertions: &[Insertion], fields: &[FieldSpec]) -> String {
    insertions
        .iter()
        .map(|i| {
            let star = if i.adjoint { "*" } else { "" };
            format!("{}{star}({})", fields[i.field].name, i.label)
        })
        .collect::<Vec<_>>()
        .join(" ")
}
