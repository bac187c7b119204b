//! Terms in η-long β-normal spine form `λx̄.a(t̄)`.
//!
//! Equality, hashing and ordering on [`Term`] are modulo α-equivalence: they
//! go through a canonical rendering where bound variables are replaced by
//! de Bruijn indices.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;

use thiserror::Error;

use crate::types::SimpleType;

static FRESH: AtomicU64 = AtomicU64::new(1);

/// A variable. Variables read from problem files have `id == 0`; every
/// binder opened by an operation gets a fresh, globally unique id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Arc<str>,
    pub id: u64,
    pub ty: SimpleType,
}

impl Var {
    pub fn named(name: &str, ty: SimpleType) -> Self {
        Var { name: Arc::from(name), id: 0, ty }
    }

    pub fn fresh(name: &str, ty: SimpleType) -> Self {
        Var {
            name: Arc::from(name),
            id: FRESH.fetch_add(1, AtomicOrdering::Relaxed),
            ty,
        }
    }

    /// A fresh variable with the same name and type.
    pub fn refresh(&self) -> Self {
        Var {
            name: self.name.clone(),
            id: FRESH.fetch_add(1, AtomicOrdering::Relaxed),
            ty: self.ty.clone(),
        }
    }
}

/// A function symbol. Identity is the pair (name, marked); the type is
/// carried along so terms are self-describing (argument filtering rewrites it).
#[derive(Debug, Clone)]
pub struct FunSym {
    pub name: Arc<str>,
    pub ty: SimpleType,
    pub marked: bool,
}

impl FunSym {
    pub fn new(name: &str, ty: SimpleType) -> Self {
        FunSym { name: Arc::from(name), ty, marked: false }
    }

    pub fn marked(&self) -> Self {
        FunSym { marked: true, ..self.clone() }
    }

    pub fn unmarked(&self) -> Self {
        FunSym { marked: false, ..self.clone() }
    }

    pub fn with_type(&self, ty: SimpleType) -> Self {
        FunSym { ty, ..self.clone() }
    }

    /// Printed identity, `f` or `f#`.
    pub fn id(&self) -> String {
        if self.marked {
            format!("{}#", self.name)
        } else {
            self.name.to_string()
        }
    }
}

impl PartialEq for FunSym {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.marked == other.marked
    }
}
impl Eq for FunSym {}
impl Hash for FunSym {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state);
        self.marked.hash(state);
    }
}
impl PartialOrd for FunSym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FunSym {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.name, self.marked).cmp(&(&other.name, other.marked))
    }
}

impl fmt::Display for FunSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if self.marked {
            f.write_str("#")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    Fun(FunSym),
    Var(Var),
}

impl Head {
    pub fn ty(&self) -> &SimpleType {
        match self {
            Head::Fun(f) => &f.ty,
            Head::Var(v) => &v.ty,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Head::Var(v) => Some(v),
            Head::Fun(_) => None,
        }
    }

    pub fn as_fun(&self) -> Option<&FunSym> {
        match self {
            Head::Fun(f) => Some(f),
            Head::Var(_) => None,
        }
    }
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Head::Fun(s) => write!(f, "{s}"),
            Head::Var(v) => write!(f, "{}", v.name),
        }
    }
}

/// A string over positive integers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Self {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }

    /// Strict prefix order `self ≺ other`.
    pub fn strict_prefix_of(&self, other: &Position) -> bool {
        self.0.len() < other.0.len() && other.0.starts_with(&self.0)
    }

    /// All strict prefixes, shortest first (including the root).
    pub fn strict_prefixes(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.0.len()).map(|n| Position(self.0[..n].to_vec()))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PositionError {
    #[error("position {0} is not a position of {1}")]
    Invalid(Position, String),
}

/// A subterm together with the variables bound above it.
#[derive(Debug, Clone)]
pub struct Located {
    pub term: Term,
    pub context: Vec<Var>,
}

/// An η-long β-normal term `λ binders. head(args)`.
#[derive(Debug, Clone)]
pub struct Term {
    pub binders: Vec<Var>,
    pub head: Head,
    pub args: Vec<Term>,
}

impl Term {
    pub fn new(binders: Vec<Var>, head: Head, args: Vec<Term>) -> Self {
        Term { binders, head, args }
    }

    pub fn app(head: Head, args: Vec<Term>) -> Self {
        Term { binders: Vec::new(), head, args }
    }

    pub fn fun(f: &FunSym, args: Vec<Term>) -> Self {
        Term::app(Head::Fun(f.clone()), args)
    }

    pub fn constant(f: &FunSym) -> Self {
        Term::fun(f, Vec::new())
    }

    /// The η-long form `λȳ.a(ȳ↓)` of a bare head.
    pub fn eta(head: Head) -> Self {
        let (arg_tys, _) = head.ty().decompose();
        let binders: Vec<Var> = arg_tys
            .iter()
            .enumerate()
            .map(|(i, t)| Var::fresh(&format!("z{}", i + 1), (*t).clone()))
            .collect();
        let args = binders.iter().map(|v| Term::eta(Head::Var(v.clone()))).collect();
        Term { binders, head, args }
    }

    pub fn var(v: &Var) -> Self {
        Term::eta(Head::Var(v.clone()))
    }

    pub fn top(&self) -> &Head {
        &self.head
    }

    /// Type of the body `head(args)` (basic for well-formed terms).
    pub fn body_type(&self) -> Option<&SimpleType> {
        self.head.ty().drop_args(self.args.len())
    }

    pub fn ty(&self) -> SimpleType {
        let body = self
            .body_type()
            .cloned()
            .unwrap_or_else(|| SimpleType::basic("?"));
        SimpleType::curried(self.binders.iter().map(|b| b.ty.clone()), body)
    }

    pub fn is_abstraction(&self) -> bool {
        !self.binders.is_empty()
    }

    /// Returns `x` when the term is the η-long form of the variable `x`.
    pub fn as_eta_var(&self) -> Option<&Var> {
        let x = self.head.as_var()?;
        if self.binders.len() != self.args.len() || self.binders.contains(x) {
            return None;
        }
        for (b, a) in self.binders.iter().zip(&self.args) {
            if a.as_eta_var() != Some(b) {
                return None;
            }
        }
        Some(x)
    }

    /// Body without binders.
    pub fn body(&self) -> Term {
        Term::app(self.head.clone(), self.args.clone())
    }

    pub fn size(&self) -> usize {
        1 + self.binders.len() + self.args.iter().map(Term::size).sum::<usize>()
    }

    /// Canonical rendering modulo α.
    pub fn key(&self) -> String {
        let mut out = String::new();
        let mut stack = Vec::new();
        write_key(&self.binders, &self.head, &self.args, &[], &mut stack, &mut out);
        out
    }

    /// Like [`Term::key`], but variables of `context` (the binders above a
    /// subterm, outermost first) are rendered by level and type, so subterms
    /// taken below corresponding binders of different terms can be compared.
    pub fn key_in_context(&self, context: &[Var]) -> String {
        let mut out = String::new();
        let mut stack = Vec::new();
        write_key(&self.binders, &self.head, &self.args, context, &mut stack, &mut out);
        out
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_fv(&mut bound, &mut out);
        out
    }

    fn collect_fv<'a>(&'a self, bound: &mut Vec<&'a Var>, out: &mut BTreeSet<Var>) {
        let n = bound.len();
        bound.extend(self.binders.iter());
        if let Head::Var(v) = &self.head {
            if !bound.contains(&v) {
                out.insert(v.clone());
            }
        }
        for a in &self.args {
            a.collect_fv(bound, out);
        }
        bound.truncate(n);
    }

    /// Function symbols occurring anywhere in the term.
    pub fn fun_symbols(&self) -> BTreeSet<FunSym> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Head::Fun(f) = &t.head {
                out.insert(f.clone());
            }
        });
        out
    }

    /// Pre-order visit over spine nodes (each node is visited with its binders).
    pub fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        for a in &self.args {
            a.visit(f);
        }
    }

    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        self.collect_positions(0, Position::root(), &mut out);
        out
    }

    fn collect_positions(&self, skip: usize, here: Position, out: &mut Vec<Position>) {
        out.push(here.clone());
        if skip < self.binders.len() {
            self.collect_positions(skip + 1, here.child(1), out);
        } else {
            for (i, a) in self.args.iter().enumerate() {
                a.collect_positions(0, here.child(i + 1), out);
            }
        }
    }

    pub fn subterm_at(&self, p: &Position) -> Result<Located, PositionError> {
        let mut cur = self;
        let mut skip = 0;
        let mut context = Vec::new();
        for &step in &p.0 {
            if skip < cur.binders.len() {
                if step != 1 {
                    return Err(PositionError::Invalid(p.clone(), self.to_string()));
                }
                context.push(cur.binders[skip].clone());
                skip += 1;
            } else {
                match step.checked_sub(1).and_then(|i| cur.args.get(i)) {
                    Some(a) => {
                        cur = a;
                        skip = 0;
                    }
                    None => return Err(PositionError::Invalid(p.clone(), self.to_string())),
                }
            }
        }
        let term = Term {
            binders: cur.binders[skip..].to_vec(),
            head: cur.head.clone(),
            args: cur.args.clone(),
        };
        Ok(Located { term, context })
    }

    /// Replaces the subterm at `p` by `new` (which must have the same type).
    pub fn replace_at(&self, p: &Position, new: Term) -> Result<Term, PositionError> {
        self.replace_rec(0, &p.0, new)
            .ok_or_else(|| PositionError::Invalid(p.clone(), self.to_string()))
    }

    fn replace_rec(&self, skip: usize, path: &[usize], new: Term) -> Option<Term> {
        let Some((&step, rest)) = path.split_first() else {
            let mut binders = self.binders[..skip].to_vec();
            binders.extend(new.binders);
            return Some(Term { binders, head: new.head, args: new.args });
        };
        if skip < self.binders.len() {
            if step != 1 {
                return None;
            }
            return self.replace_rec(skip + 1, rest, new);
        }
        let i = step.checked_sub(1)?;
        let arg = self.args.get(i)?;
        let replaced = arg.replace_rec(0, rest, new)?;
        let mut out = self.clone();
        out.args[i] = replaced;
        Some(out)
    }

    /// `Sub(t)`, deduplicated modulo α, in pre-order.
    pub fn subterms(&self) -> Vec<Term> {
        let mut out: Vec<Term> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for p in self.positions() {
            let t = self.subterm_at(&p).expect("own position").term;
            if seen.insert(t.key()) {
                out.push(t);
            }
        }
        out
    }

    /// `self ⊵_sub other`.
    pub fn has_subterm(&self, other: &Term) -> bool {
        let k = other.key();
        self.positions()
            .iter()
            .any(|p| self.subterm_at(p).map(|l| l.term.key() == k).unwrap_or(false))
    }

    /// Checks η-long well-typedness using the types carried by heads.
    pub fn check_well_formed(&self) -> Result<(), String> {
        let (arg_tys, _) = self.head.ty().decompose();
        if arg_tys.len() != self.args.len() {
            return Err(format!(
                "{} expects {} arguments, got {} in {}",
                self.head,
                arg_tys.len(),
                self.args.len(),
                self
            ));
        }
        for (a, expected) in self.args.iter().zip(arg_tys) {
            a.check_well_formed()?;
            let actual = a.ty();
            if &actual != expected {
                return Err(format!("argument {a} has type {actual}, expected {expected}"));
            }
        }
        Ok(())
    }

    /// Distinct bound variables and disjointness from free variables.
    pub fn binders_distinct(&self) -> bool {
        let mut seen = Vec::new();
        let fv = self.free_vars();
        let mut ok = true;
        self.visit(&mut |t| {
            for b in &t.binders {
                if seen.contains(b) || fv.contains(b) {
                    ok = false;
                }
                seen.push(b.clone());
            }
        });
        ok
    }
}

pub(crate) fn write_key<'a>(
    binders: &'a [Var],
    head: &'a Head,
    args: &'a [Term],
    context: &[Var],
    stack: &mut Vec<&'a Var>,
    out: &mut String,
) {
    let n = stack.len();
    for b in binders {
        out.push('\\');
        stack.push(b);
    }
    match head {
        Head::Fun(f) => {
            out.push_str(&f.name);
            if f.marked {
                out.push('#');
            }
        }
        Head::Var(v) => match stack.iter().rposition(|b| *b == v) {
            Some(i) => {
                let _ = write!(out, "${}", stack.len() - 1 - i);
            }
            None => match context.iter().position(|c| c == v) {
                Some(k) => {
                    let _ = write!(out, "@{k}:{}", v.ty);
                }
                None => {
                    let _ = write!(out, "?{}'{}", v.name, v.id);
                }
            },
        },
    }
    if !args.is_empty() {
        out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write_key(&a.binders, &a.head, &a.args, context, stack, out);
        }
        out.push(')');
    }
    stack.truncate(n);
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for Term {}
impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}
impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
/// Total order: size first, then canonical rendering.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.key().cmp(&other.key()))
    }
}

/// α-equivalence.
pub fn alpha_eq(s: &Term, t: &Term) -> bool {
    s == t
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.binders.is_empty() {
            f.write_str("\\")?;
            for (i, b) in self.binders.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                f.write_str(&b.name)?;
            }
            f.write_str(". ")?;
        }
        write!(f, "{}", self.head)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}
