//! Reader for problem files.
//!
//! ```text
//! type N;
//! fun add : N -> N -> N;
//! var X : N;
//! rule a1 : add(0, Y) -> Y;
//! ```
//!
//! Abstractions are written `\x y. body`; `#` starts a comment unless it
//! directly follows an identifier, where it marks the symbol (`f#`).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::rewrite::{RewriteSystem, Rule, Signature};
use crate::subst::{normalize, Preterm};
use crate::term::{FunSym, Head, Term, Var};
use crate::types::SimpleType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Arrow,
    Colon,
    Semi,
    LParen,
    RParen,
    Comma,
    Lambda,
    Dot,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Loc {
    line: usize,
    column: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    is_ident_start(c) || c == '\''
}

fn lex(src: &str) -> Result<Vec<(Tok, Loc)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let loc = Loc { line, column: col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, loc));
                advance(2, &mut i, &mut col);
            }
            '→' => {
                out.push((Tok::Arrow, loc));
                advance(1, &mut i, &mut col);
            }
            ':' | ';' | '(' | ')' | ',' | '\\' | '.' | 'λ' => {
                let t = match c {
                    ':' => Tok::Colon,
                    ';' => Tok::Semi,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    _ => Tok::Lambda,
                };
                out.push((t, loc));
                advance(1, &mut i, &mut col);
            }
            c if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                if chars.get(i) == Some(&'#') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                out.push((Tok::Ident(s), loc));
            }
            other => {
                return Err(ParseError {
                    line,
                    column: col,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    out.push((Tok::Eof, Loc { line, column: col }));
    Ok(out)
}

#[derive(Debug, Clone)]
enum Raw {
    Lam(Vec<(String, Loc)>, Box<Raw>, Loc),
    App(RawHead, Vec<Raw>, Loc),
}

#[derive(Debug, Clone)]
enum RawHead {
    Name(String),
    Paren(Box<Raw>),
}

impl Raw {
    fn loc(&self) -> Loc {
        match self {
            Raw::Lam(_, _, l) | Raw::App(_, _, l) => *l,
        }
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, Loc)>,
    pos: usize,
    sig: &'a mut Signature,
}

fn err<T>(loc: Loc, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line: loc.line, column: loc.column, message: message.into() })
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn loc(&self) -> Loc {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, Loc) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<Loc, ParseError> {
        let (got, loc) = self.next();
        if got == t {
            Ok(loc)
        } else {
            err(loc, format!("expected {what}, found {}", describe(&got)))
        }
    }

    fn ident(&mut self) -> Result<(String, Loc), ParseError> {
        match self.next() {
            (Tok::Ident(s), l) => Ok((s, l)),
            (t, l) => err(l, format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn ty(&mut self) -> Result<SimpleType, ParseError> {
        let dom = match self.next() {
            (Tok::LParen, _) => {
                let t = self.ty()?;
                self.expect(Tok::RParen, "')'")?;
                t
            }
            (Tok::Ident(name), l) => {
                let t = SimpleType::basic(&name);
                if !self.sig.base_types.contains(&t) {
                    return err(l, format!("undeclared type {name}"));
                }
                t
            }
            (t, l) => return err(l, format!("expected a type, found {}", describe(&t))),
        };
        if *self.peek() == Tok::Arrow {
            self.next();
            Ok(SimpleType::arrow(dom, self.ty()?))
        } else {
            Ok(dom)
        }
    }

    fn term(&mut self) -> Result<Raw, ParseError> {
        let loc = self.loc();
        if *self.peek() == Tok::Lambda {
            self.next();
            let mut names = Vec::new();
            while let Tok::Ident(_) = self.peek() {
                names.push(self.ident()?);
            }
            if names.is_empty() {
                return err(self.loc(), "expected a bound variable after '\\'");
            }
            self.expect(Tok::Dot, "'.'")?;
            let body = self.term()?;
            return Ok(Raw::Lam(names, Box::new(body), loc));
        }
        let head = match self.next() {
            (Tok::Ident(s), _) => RawHead::Name(s),
            (Tok::LParen, _) => {
                let t = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                RawHead::Paren(Box::new(t))
            }
            (t, l) => return err(l, format!("expected a term, found {}", describe(&t))),
        };
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            loop {
                args.push(self.term()?);
                match self.next() {
                    (Tok::Comma, _) => continue,
                    (Tok::RParen, _) => break,
                    (t, l) => return err(l, format!("expected ',' or ')', found {}", describe(&t))),
                }
            }
        }
        Ok(Raw::App(head, args, loc))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Arrow => "'->'".into(),
        Tok::Colon => "':'".into(),
        Tok::Semi => "';'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Comma => "','".into(),
        Tok::Lambda => "'\\'".into(),
        Tok::Dot => "'.'".into(),
        Tok::Eof => "end of input".into(),
    }
}

struct Elaborator<'a> {
    sig: &'a Signature,
    scope: Vec<(String, Var)>,
}

impl Elaborator<'_> {
    fn resolve(&self, name: &str, loc: Loc) -> Result<Head, ParseError> {
        if let Some((_, v)) = self.scope.iter().rev().find(|(n, _)| n == name) {
            return Ok(Head::Var(v.clone()));
        }
        if let Some(v) = self.sig.variables.get(name) {
            return Ok(Head::Var(v.clone()));
        }
        match self.sig.resolve(name) {
            Some(f) => Ok(Head::Fun(f)),
            None => err(loc, format!("unknown identifier {name}")),
        }
    }

    fn go(&mut self, raw: &Raw, expected: Option<&SimpleType>) -> Result<(Preterm, SimpleType), ParseError> {
        match raw {
            Raw::Lam(names, body, loc) => {
                let Some(mut ty) = expected else {
                    return err(*loc, "cannot infer the type of an abstraction here");
                };
                let n = self.scope.len();
                let mut vars = Vec::new();
                for (name, l) in names {
                    let SimpleType::Arrow(d, c) = ty else {
                        return err(*l, format!("too many binders for type {}", expected.unwrap()));
                    };
                    let v = Var::fresh(name, (**d).clone());
                    self.scope.push((name.clone(), v.clone()));
                    vars.push(v);
                    ty = c;
                }
                let (b, _) = self.go(body, Some(ty))?;
                self.scope.truncate(n);
                let p = vars.into_iter().rev().fold(b, |acc, v| Preterm::lam(v, acc));
                Ok((p, expected.unwrap().clone()))
            }
            Raw::App(head, args, loc) => {
                let (hp, hty) = match head {
                    RawHead::Name(s) => {
                        let h = self.resolve(s, *loc)?;
                        let t = h.ty().clone();
                        (Preterm::Atom(h), t)
                    }
                    RawHead::Paren(r) => {
                        let guess = if args.is_empty() { expected } else { None };
                        self.go(r, guess)?
                    }
                };
                let mut ty = hty;
                let mut ps = Vec::new();
                for a in args {
                    let SimpleType::Arrow(d, c) = ty else {
                        return err(a.loc(), "too many arguments");
                    };
                    let (ap, _) = self.go(a, Some(&d))?;
                    ps.push(ap);
                    ty = *c;
                }
                if let Some(e) = expected {
                    if *e != ty {
                        return err(*loc, format!("term has type {ty}, expected {e}"));
                    }
                }
                Ok((Preterm::apply(hp, ps), ty))
            }
        }
    }
}

fn elaborate(sig: &Signature, raw: &Raw, expected: Option<&SimpleType>) -> Result<Term, ParseError> {
    let mut e = Elaborator { sig, scope: Vec::new() };
    let (p, _) = e.go(raw, expected)?;
    let loc = raw.loc();
    normalize(&p).map_err(|t| ParseError {
        line: loc.line,
        column: loc.column,
        message: t.to_string(),
    })
}

/// Parses a complete problem file.
pub fn parse_problem(src: &str) -> Result<RewriteSystem, ParseError> {
    let mut sig = Signature::default();
    let mut rules = Vec::new();
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, sig: &mut sig };
    let mut pending: Vec<(String, Raw, Raw, Loc)> = Vec::new();
    loop {
        let (kw, loc) = match p.next() {
            (Tok::Eof, _) => break,
            (Tok::Ident(s), l) => (s, l),
            (t, l) => return err(l, format!("expected a declaration, found {}", describe(&t))),
        };
        match kw.as_str() {
            "type" => {
                let (name, l) = p.ident()?;
                let t = SimpleType::basic(&name);
                if p.sig.base_types.contains(&t) {
                    return err(l, format!("type {name} declared twice"));
                }
                p.sig.base_types.push(t);
            }
            "fun" | "var" => {
                let (name, l) = p.ident()?;
                if name.ends_with('#') {
                    return err(l, format!("{name}: '#' is reserved for marked symbols"));
                }
                p.expect(Tok::Colon, "':'")?;
                let ty = p.ty()?;
                if p.sig.functions.contains_key(&name) || p.sig.variables.contains_key(&name) {
                    return err(l, format!("{name} declared twice"));
                }
                if kw == "fun" {
                    p.sig.functions.insert(name.clone(), FunSym::new(&name, ty));
                } else {
                    p.sig.variables.insert(name.clone(), Var::named(&name, ty));
                }
            }
            "rule" => {
                let (label, _) = p.ident()?;
                p.expect(Tok::Colon, "':'")?;
                let lhs = p.term()?;
                p.expect(Tok::Arrow, "'->'")?;
                let rhs = p.term()?;
                pending.push((label, lhs, rhs, loc));
            }
            other => return err(loc, format!("unknown declaration '{other}'")),
        }
        p.expect(Tok::Semi, "';'")?;
    }
    let mut labels = BTreeMap::new();
    for (label, lraw, rraw, loc) in pending {
        if labels.insert(label.clone(), ()).is_some() {
            return err(loc, format!("duplicate rule label {label}"));
        }
        let lhs = elaborate(&sig, &lraw, None)?;
        let ty = lhs.ty();
        let rhs = elaborate(&sig, &rraw, Some(&ty))?;
        let rule = Rule::new(&label, lhs, rhs).map_err(|e| ParseError {
            line: loc.line,
            column: loc.column,
            message: e.to_string(),
        })?;
        rule.check_pattern().map_err(|e| ParseError {
            line: loc.line,
            column: loc.column,
            message: e.to_string(),
        })?;
        rules.push(rule);
    }
    RewriteSystem::new(sig, rules).map_err(|e| ParseError { line: 1, column: 1, message: e.to_string() })
}

/// Parses a term against the declarations of `sig`.
pub fn parse_term(sig: &Signature, src: &str) -> Result<Term, ParseError> {
    parse_term_typed(sig, src, None)
}

pub fn parse_term_typed(
    sig: &Signature,
    src: &str,
    expected: Option<&SimpleType>,
) -> Result<Term, ParseError> {
    let mut scratch = sig.clone();
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, sig: &mut scratch };
    let raw = p.term()?;
    if *p.peek() != Tok::Eof {
        return err(p.loc(), format!("unexpected {}", describe(p.peek())));
    }
    elaborate(sig, &raw, expected)
}

pub fn parse_type(sig: &Signature, src: &str) -> Result<SimpleType, ParseError> {
    let mut scratch = sig.clone();
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, sig: &mut scratch };
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return err(p.loc(), format!("unexpected {}", describe(p.peek())));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declarations_and_rules() {
        let r = parse_problem(
            "# addition
             type N;
             fun 0 : N; fun s : N -> N; fun add : N -> N -> N;
             var X : N; var Y : N;
             rule a1 : add(0, Y) -> Y;
             rule a2 : add(s(X), Y) -> s(add(X, Y));",
        )
        .unwrap();
        assert_eq!(r.rules.len(), 2);
        assert_eq!(r.rules[1].to_string(), "add(s(X), Y) -> s(add(X, Y))");
        assert_eq!(r.signature.functions["add"].ty.to_string(), "N -> N -> N");
    }

    #[test]
    fn eta_expands_partial_applications() {
        let r = parse_problem(
            "type N; fun add : N -> N -> N; fun ap : (N -> N -> N) -> N;
             rule x : ap(add) -> ap(\\u v. add(v, u));",
        )
        .unwrap();
        assert_eq!(r.rules[0].lhs.to_string(), "ap(\\z1 z2. add(z1, z2))");
    }

    #[test]
    fn extra_variable_is_named() {
        let e = parse_problem("type N; fun f : N -> N; var X : N; var Y : N; rule r : f(X) -> Y;")
            .unwrap_err();
        assert!(e.message.contains("variable Y"), "{e}");
    }

    #[test]
    fn errors_carry_locations() {
        let e = parse_problem("type N;\nfun f : M;").unwrap_err();
        assert_eq!((e.line, e.column), (2, 9));
        let e = parse_problem("type N; fun f : N -> N;\nrule r : f(f) -> f;").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn marked_symbols_and_comments() {
        let r = parse_problem("type N; fun f : N -> N; fun a : N; # trailing\n").unwrap();
        let t = parse_term(&r.signature, "f#(f(a))").unwrap();
        assert!(t.head.as_fun().unwrap().marked);
        assert_eq!(t.to_string(), "f#(f(a))");
    }
}
