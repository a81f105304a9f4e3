// SPDX-License-Identifier: Apache-2.0

//! Line-oriented rule files.
//!
//! ```text
//! # comment
//! a & b -> c
//! true -> c
//! a & not_a -> false
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::{is_valid_name, Head, HornClause, HornTheory, LogicError, Var, VariableTable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: unknown variable `{name}`")]
    UnknownVariable { line: usize, column: usize, name: String },
    #[error("{line}: tautological rule (consequent `{name}` occurs in the antecedent)")]
    Tautology { line: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Ident(&'a str),
    And,
    Arrow,
}

fn lex(line: &str, lineno: usize) -> Result<Vec<(usize, Tok<'_>)>, ParseError> {
    let mut out = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '#' => break,
            '&' => {
                out.push((i + 1, Tok::And));
                i += 1;
            }
            '-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((i + 1, Tok::Arrow));
                i += 2;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                    i += 1;
                }
                out.push((start + 1, Tok::Ident(&line[start..i])));
            }
            _ => {
                let ch = line[i..].chars().next().unwrap_or(c);
                return Err(ParseError::Syntax {
                    line: lineno,
                    column: i + 1,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(out)
}

/// Syntax tree of one rule line: antecedent names (empty for `true`) and
/// consequent name (`None` for `false`), with columns.
type RawRule<'a> = (Vec<(usize, &'a str)>, Option<(usize, &'a str)>);

fn parse_line(line: &str, lineno: usize) -> Result<Option<RawRule<'_>>, ParseError> {
    let toks = lex(line, lineno)?;
    if toks.is_empty() {
        return Ok(None);
    }
    let syntax =
        |column: usize, message: &str| ParseError::Syntax { line: lineno, column, message: message.to_string() };
    let end_col = line.trim_end().len() + 1;
    let mut it = toks.into_iter().peekable();
    let mut ant = Vec::new();
    let mut saw_true = false;
    loop {
        match it.next() {
            Some((col, Tok::Ident("true"))) => {
                if saw_true || !ant.is_empty() {
                    return Err(syntax(col, "`true` must be the whole antecedent"));
                }
                saw_true = true;
            }
            Some((col, Tok::Ident("false"))) => {
                return Err(syntax(col, "`false` may only appear as a consequent"));
            }
            Some((col, Tok::Ident(name))) => {
                if saw_true {
                    return Err(syntax(col, "`true` must be the whole antecedent"));
                }
                ant.push((col, name));
            }
            Some((col, _)) => return Err(syntax(col, "expected a variable name or `true`")),
            None => return Err(syntax(end_col, "expected a variable name or `true`")),
        }
        match it.next() {
            Some((_, Tok::And)) => continue,
            Some((_, Tok::Arrow)) => break,
            Some((col, _)) => return Err(syntax(col, "expected `&` or `->`")),
            None => return Err(syntax(end_col, "expected `&` or `->`")),
        }
    }
    let con = match it.next() {
        Some((_, Tok::Ident("false"))) => None,
        Some((col, Tok::Ident("true"))) => return Err(syntax(col, "`true` is not a valid consequent")),
        Some((col, Tok::Ident(name))) => Some((col, name)),
        Some((col, _)) => return Err(syntax(col, "expected a consequent")),
        None => return Err(syntax(end_col, "expected a consequent")),
    };
    if let Some((col, _)) = it.next() {
        return Err(syntax(col, "trailing input after consequent"));
    }
    Ok(Some((ant, con)))
}

/// Parses a single rule. Line numbers in errors are 1.
pub fn parse_rule(text: &str, table: &VariableTable) -> Result<HornClause, ParseError> {
    match parse_line_in(text, 1, table)? {
        Some(c) => Ok(c),
        None => Err(ParseError::Syntax { line: 1, column: 1, message: "empty rule".into() }),
    }
}

fn parse_line_in(line: &str, lineno: usize, table: &VariableTable) -> Result<Option<HornClause>, ParseError> {
    let Some((ant, con)) = parse_line(line, lineno)? else {
        return Ok(None);
    };
    let resolve = |(column, name): (usize, &str)| {
        table.var(name).ok_or_else(|| ParseError::UnknownVariable { line: lineno, column, name: name.to_string() })
    };
    let antecedent = ant.into_iter().map(resolve).collect::<Result<Vec<_>, _>>()?;
    let consequent = match con {
        None => Head::Bottom,
        Some(c) => Head::Atom(resolve(c)?),
    };
    HornClause::new(antecedent, consequent).map(Some).map_err(|e| match e {
        LogicError::Tautology(v) => ParseError::Tautology { line: lineno, name: table.name(Var(v)).to_string() },
        other => unreachable!("clause construction only fails on tautologies: {other}"),
    })
}

/// Parses a whole rule file into a (not normalized) theory over `table`.
pub fn parse_rules(text: &str, table: &VariableTable) -> Result<HornTheory, ParseError> {
    let mut clauses = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(c) = parse_line_in(line, i + 1, table)? {
            clauses.push(c);
        }
    }
    Ok(HornTheory::new(table.len(), clauses).expect("parsed variables come from the table"))
}

/// Variable names mentioned in a rule file, in order of first appearance.
pub fn rule_file_names(text: &str) -> Result<Vec<String>, ParseError> {
    let mut names: Vec<String> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some((ant, con)) = parse_line(line, i + 1)? {
            for (_, n) in ant.into_iter().chain(con) {
                debug_assert!(is_valid_name(n));
                if !names.iter().any(|m| m == n) {
                    names.push(n.to_string());
                }
            }
        }
    }
    Ok(names)
}

pub fn render_rule(clause: &HornClause, table: &VariableTable) -> String {
    let mut out = String::new();
    if clause.antecedent().is_empty() {
        out.push_str("true");
    } else {
        for (k, v) in clause.antecedent().iter().enumerate() {
            if k > 0 {
                out.push_str(" & ");
            }
            out.push_str(table.name(*v));
        }
    }
    out.push_str(" -> ");
    match clause.consequent() {
        Head::Atom(v) => out.push_str(table.name(v)),
        Head::Bottom => out.push_str("false"),
    }
    out
}

/// One rule per line, newline-terminated.
pub fn render_rules(theory: &HornTheory, table: &VariableTable) -> String {
    let mut out = String::new();
    for c in theory.clauses() {
        let _ = writeln!(out, "{}", render_rule(c, table));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> VariableTable {
        VariableTable::dualized(&["a", "b", "c"]).unwrap()
    }

    #[test]
    fn parses_conjunction() {
        let c = parse_rule("a & b -> c", &table()).unwrap();
        assert_eq!(c.antecedent(), &[Var(0), Var(1)]);
        assert_eq!(c.consequent(), Head::Atom(Var(2)));
    }

    #[test]
    fn parses_true_and_false() {
        let c = parse_rule("true -> c", &table()).unwrap();
        assert!(c.antecedent().is_empty());
        let c = parse_rule("a & not_a -> false", &table()).unwrap();
        assert_eq!(c.consequent(), Head::Bottom);
    }

    #[test]
    fn tilde_is_not_in_the_grammar() {
        let err = parse_rule("a & ~a -> false", &table()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 1, column: 5, .. }), "{err:?}");
    }

    #[test]
    fn unknown_variable_and_tautology() {
        assert!(matches!(parse_rule("a & zz -> c", &table()), Err(ParseError::UnknownVariable { column: 5, .. })));
        assert!(matches!(parse_rule("a & c -> c", &table()), Err(ParseError::Tautology { .. })));
    }

    #[test]
    fn malformed_lines_report_position() {
        for (text, col) in [("a b -> c", 3), ("a & -> c", 5), ("a ->", 5), ("-> c", 1), ("a -> b c", 8)] {
            match parse_rule(text, &table()) {
                Err(ParseError::Syntax { column, .. }) => assert_eq!(column, col, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn file_skips_comments_and_blank_lines() {
        let text = "# header\n\na -> b  # trailing\n  \nb & c -> false\n";
        let t = parse_rules(text, &table()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(render_rules(&t, &table()), "a -> b\nb & c -> false\n");
        let err = parse_rules("a -> b\nq -> a\n", &table()).unwrap_err();
        assert!(matches!(err, ParseError::UnknownVariable { line: 2, .. }));
    }

    #[test]
    fn names_in_order_of_appearance() {
        let names = rule_file_names("b & a -> c\nnot_a -> b\n").unwrap();
        assert_eq!(names, vec!["b", "a", "c", "not_a"]);
    }
}
