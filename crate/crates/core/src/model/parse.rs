//! Text syntax for programs, fact files and queries.
//!
//! ```text
//! program ::= rule*
//! rule    ::= conj "->" ["exists" VAR ("," VAR)* ":"] conj "."
//!           | conj ":-" conj "."
//! facts   ::= (atom ".")*
//! query   ::= "?-" conj "."
//! conj    ::= atom ("," atom)*
//! atom    ::= NAME ["(" [term ("," term)*] ")"]
//! term    ::= VAR | NAME | NUMBER | QUOTED
//! ```
//!
//! Variables start with an uppercase letter or `_`; `%` starts a comment.

use std::collections::HashMap;

use thiserror::Error;

use super::atom::Atom;
use super::query::Bcq;
use super::rule::{Program, RuleDraft, Signature};
use super::store::FactStore;
use super::term::{Term, VarId};
use super::ModelError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unsafe rule {rule}: variable {var} occurs only in the head but is not declared existential")]
    Unsafe {
        line: usize,
        col: usize,
        rule: usize,
        var: String,
    },
    #[error("{line}:{col}: rule {rule}: declared existential {var} occurs in the body")]
    ExistentialInBody {
        line: usize,
        col: usize,
        rule: usize,
        var: String,
    },
    #[error("{line}:{col}: arity mismatch for predicate {pred}: expected {expected}, found {found}")]
    Arity {
        line: usize,
        col: usize,
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("{line}:{col}: fact is not ground: variable {var}")]
    NonGround { line: usize, col: usize, var: String },
    #[error("{line}:{col}: empty query")]
    EmptyQuery { line: usize, col: usize },
}

impl ParseError {
    pub fn location(&self) -> (usize, usize) {
        match *self {
            ParseError::Syntax { line, col, .. }
            | ParseError::Unsafe { line, col, .. }
            | ParseError::ExistentialInBody { line, col, .. }
            | ParseError::Arity { line, col, .. }
            | ParseError::NonGround { line, col, .. }
            | ParseError::EmptyQuery { line, col } => (line, col),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Var(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Arrow,
    ColonDash,
    Query,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        col,
        msg: msg.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: tl, col: tc });
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => push(&mut out, Tok::LParen),
            ')' => push(&mut out, Tok::RParen),
            ',' => push(&mut out, Tok::Comma),
            '.' => push(&mut out, Tok::Dot),
            '-' if chars.get(i + 1) == Some(&'>') => {
                push(&mut out, Tok::Arrow);
                i += 2;
                col += 2;
                continue;
            }
            ':' if chars.get(i + 1) == Some(&'-') => {
                push(&mut out, Tok::ColonDash);
                i += 2;
                col += 2;
                continue;
            }
            ':' => push(&mut out, Tok::Colon),
            '?' if chars.get(i + 1) == Some(&'-') => {
                push(&mut out, Tok::Query);
                i += 2;
                col += 2;
                continue;
            }
            '\'' => {
                let mut s = String::new();
                i += 1;
                col += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(syntax(tl, tc, "unterminated quoted constant")),
                        Some('\'') => break,
                        Some('\\') => match chars.get(i + 1) {
                            Some(&e @ ('\\' | '\'')) => {
                                s.push(e);
                                i += 2;
                                col += 2;
                            }
                            _ => return Err(syntax(line, col, "invalid escape in quoted constant")),
                        },
                        Some(&ch) if ch.is_control() => {
                            return Err(syntax(line, col, "control character in quoted constant"))
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                            col += 1;
                        }
                    }
                }
                push(&mut out, Tok::Quoted(s));
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += i - start;
                let tok = if c.is_uppercase() || c == '_' {
                    Tok::Var(word)
                } else {
                    Tok::Name(word)
                };
                push(&mut out, tok);
                continue;
            }
            other => return Err(syntax(tl, tc, format!("unexpected character {other:?}"))),
        }
        i += 1;
        col += 1;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// Raw term before variables are resolved.
enum RawTerm {
    Var(String, usize, usize),
    Const(Term),
}

struct RawAtom {
    pred: String,
    args: Vec<RawTerm>,
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(syntax(t.line, t.col, format!("expected {what}, found {}", describe(&t.tok))))
        }
    }

    fn atom(&mut self) -> Result<RawAtom, ParseError> {
        let t = self.next();
        let pred = match t.tok {
            Tok::Name(n) => n,
            other => {
                return Err(syntax(
                    t.line,
                    t.col,
                    format!("expected predicate name, found {}", describe(&other)),
                ))
            }
        };
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.next();
            if self.peek().tok != Tok::RParen {
                loop {
                    let a = self.next();
                    args.push(match a.tok {
                        Tok::Var(v) => RawTerm::Var(v, a.line, a.col),
                        Tok::Name(n) | Tok::Quoted(n) => RawTerm::Const(Term::constant(&n)),
                        other => {
                            return Err(syntax(
                                a.line,
                                a.col,
                                format!("expected term, found {}", describe(&other)),
                            ))
                        }
                    });
                    if self.peek().tok == Tok::Comma {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "')'")?;
        }
        Ok(RawAtom {
            pred,
            args,
            line: t.line,
            col: t.col,
        })
    }

    fn conj(&mut self) -> Result<Vec<RawAtom>, ParseError> {
        let mut out = vec![self.atom()?];
        while self.peek().tok == Tok::Comma {
            self.next();
            out.push(self.atom()?);
        }
        Ok(out)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Name(n) => format!("name '{n}'"),
        Tok::Var(v) => format!("variable '{v}'"),
        Tok::Quoted(q) => format!("constant '{q}'"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Comma => "','".into(),
        Tok::Dot => "'.'".into(),
        Tok::Colon => "':'".into(),
        Tok::Arrow => "'->'".into(),
        Tok::ColonDash => "':-'".into(),
        Tok::Query => "'?-'".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Resolves variable names to local ids shared by one rule or query.
#[derive(Default)]
struct Scope {
    ids: HashMap<String, VarId>,
    names: Vec<String>,
}

impl Scope {
    fn var(&mut self, name: &str) -> VarId {
        if let Some(&v) = self.ids.get(name) {
            return v;
        }
        let v = VarId(self.names.len() as u32);
        self.ids.insert(name.to_string(), v);
        self.names.push(name.to_string());
        v
    }
}

fn resolve(
    raw: &RawAtom,
    scope: &mut Scope,
    sig: &mut Signature,
) -> Result<Atom, ParseError> {
    let atom = Atom::new(
        &raw.pred,
        raw.args
            .iter()
            .map(|t| match t {
                RawTerm::Var(name, ..) => Term::Var(scope.var(name)),
                RawTerm::Const(c) => *c,
            })
            .collect(),
    );
    sig.declare(atom.pred, atom.arity())
        .map_err(|(expected, found)| ParseError::Arity {
            line: raw.line,
            col: raw.col,
            pred: raw.pred.clone(),
            expected,
            found,
        })?;
    Ok(atom)
}

/// Parses a program. Head-only variables become existential.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let mut sig = Signature::new();
    let mut drafts = Vec::new();
    while !p.at_eof() {
        let start = p.peek().clone();
        let rid = drafts.len();
        let first = p.conj()?;
        let sep = p.next();
        let (body_raw, head_raw, declared_raw) = match sep.tok {
            Tok::Arrow => {
                let mut declared = None;
                if matches!(&p.peek().tok, Tok::Name(n) if n == "exists")
                    && matches!(p.peek_at(1), Tok::Var(_))
                {
                    p.next();
                    let mut vs = Vec::new();
                    loop {
                        let t = p.next();
                        match t.tok {
                            Tok::Var(v) => vs.push((v, t.line, t.col)),
                            other => {
                                return Err(syntax(
                                    t.line,
                                    t.col,
                                    format!("expected variable, found {}", describe(&other)),
                                ))
                            }
                        }
                        if p.peek().tok == Tok::Comma {
                            p.next();
                        } else {
                            break;
                        }
                    }
                    p.expect(Tok::Colon, "':' after existential declaration")?;
                    declared = Some(vs);
                }
                let head = p.conj()?;
                (first, head, declared)
            }
            Tok::ColonDash => {
                let body = p.conj()?;
                (body, first, None)
            }
            other => {
                return Err(syntax(
                    sep.line,
                    sep.col,
                    format!("expected '->' or ':-', found {}", describe(&other)),
                ))
            }
        };
        p.expect(Tok::Dot, "'.' at end of rule")?;
        let mut scope = Scope::default();
        let mut body = Vec::new();
        for a in &body_raw {
            body.push(resolve(a, &mut scope, &mut sig)?);
        }
        let body_var_count = scope.names.len();
        let mut head = Vec::new();
        for a in &head_raw {
            head.push(resolve(a, &mut scope, &mut sig)?);
        }
        let declared = match declared_raw {
            None => None,
            Some(vs) => {
                let mut ids = Vec::new();
                for (name, line, col) in vs {
                    let v = scope.var(&name);
                    if (v.0 as usize) < body_var_count {
                        return Err(ParseError::ExistentialInBody {
                            line,
                            col,
                            rule: rid,
                            var: name,
                        });
                    }
                    ids.push(v);
                }
                for (i, name) in scope.names.iter().enumerate().skip(body_var_count) {
                    if !ids.contains(&VarId(i as u32)) {
                        let (line, col) = head_raw
                            .iter()
                            .flat_map(|a| a.args.iter())
                            .find_map(|t| match t {
                                RawTerm::Var(n, l, c) if n == name => Some((*l, *c)),
                                _ => None,
                            })
                            .unwrap_or((start.line, start.col));
                        return Err(ParseError::Unsafe {
                            line,
                            col,
                            rule: rid,
                            var: name.clone(),
                        });
                    }
                }
                Some(ids)
            }
        };
        drafts.push(RuleDraft {
            body,
            head,
            names: scope.names,
            declared,
        });
    }
    Program::from_drafts(drafts).map_err(|e| match e {
        ModelError::Arity {
            pred,
            expected,
            found,
        } => ParseError::Arity {
            line: 0,
            col: 0,
            pred,
            expected,
            found,
        },
        other => syntax(0, 0, other.to_string()),
    })
}

/// Parses a fact file with a fresh arity table.
pub fn parse_facts(text: &str) -> Result<FactStore, ParseError> {
    parse_facts_with(text, &mut Signature::new())
}

/// Parses a fact file, checking and extending `sig`.
pub fn parse_facts_with(text: &str, sig: &mut Signature) -> Result<FactStore, ParseError> {
    let mut p = Parser::new(text)?;
    let mut store = FactStore::new();
    while !p.at_eof() {
        let raw = p.atom()?;
        if let Some(RawTerm::Var(v, line, col)) =
            raw.args.iter().find(|t| matches!(t, RawTerm::Var(..)))
        {
            return Err(ParseError::NonGround {
                line: *line,
                col: *col,
                var: v.clone(),
            });
        }
        let atom = resolve(&raw, &mut Scope::default(), sig)?;
        p.expect(Tok::Dot, "'.' after fact")?;
        store.insert(atom);
    }
    Ok(store)
}

pub fn parse_query(text: &str) -> Result<Bcq, ParseError> {
    parse_query_with(text, &mut Signature::new())
}

pub fn parse_query_with(text: &str, sig: &mut Signature) -> Result<Bcq, ParseError> {
    let mut p = Parser::new(text)?;
    let q = p.expect(Tok::Query, "'?-'")?;
    if p.peek().tok == Tok::Dot {
        return Err(ParseError::EmptyQuery {
            line: q.line,
            col: q.col,
        });
    }
    let raw = p.conj()?;
    p.expect(Tok::Dot, "'.' at end of query")?;
    if !p.at_eof() {
        let t = p.peek();
        return Err(syntax(t.line, t.col, "trailing input after query"));
    }
    let mut scope = Scope::default();
    let mut atoms = Vec::new();
    for a in &raw {
        atoms.push(resolve(a, &mut scope, sig)?);
    }
    Ok(Bcq::new(atoms, scope.names))
}
