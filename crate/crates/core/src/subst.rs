//! Preterms, normalization to η-long β-normal form, and capture-avoiding
//! hereditary substitution.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::term::{Head, Position, Term, Var};
use crate::types::SimpleType;

/// A simply-typed λ-term without the η-long/β-normal invariants.
#[derive(Debug, Clone)]
pub enum Preterm {
    Atom(Head),
    App(Box<Preterm>, Box<Preterm>),
    Lam(Var, Box<Preterm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type error at {position}: {message}")]
pub struct TypeError {
    pub position: Position,
    pub message: String,
}

impl Preterm {
    pub fn app(f: Preterm, a: Preterm) -> Self {
        Preterm::App(Box::new(f), Box::new(a))
    }

    pub fn lam(x: Var, body: Preterm) -> Self {
        Preterm::Lam(x, Box::new(body))
    }

    /// Applies `head` to `args` left to right.
    pub fn apply(head: Preterm, args: impl IntoIterator<Item = Preterm>) -> Self {
        args.into_iter().fold(head, Preterm::app)
    }

    pub fn type_of(&self) -> Result<SimpleType, TypeError> {
        self.type_at(Position::root())
    }

    fn type_at(&self, here: Position) -> Result<SimpleType, TypeError> {
        match self {
            Preterm::Atom(h) => Ok(h.ty().clone()),
            Preterm::Lam(x, b) => {
                let bt = b.type_at(here.child(1))?;
                Ok(SimpleType::arrow(x.ty.clone(), bt))
            }
            Preterm::App(f, a) => {
                let ft = f.type_at(here.child(1))?;
                let at = a.type_at(here.child(2))?;
                match ft {
                    SimpleType::Arrow(d, c) if *d == at => Ok(*c),
                    SimpleType::Arrow(d, _) => Err(TypeError {
                        position: here,
                        message: format!("argument has type {at}, expected {d}"),
                    }),
                    other => Err(TypeError {
                        position: here,
                        message: format!("cannot apply a term of basic type {other}"),
                    }),
                }
            }
        }
    }
}

impl fmt::Display for Preterm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preterm::Atom(h) => write!(f, "{h}"),
            Preterm::App(g, a) => write!(f, "({g} {a})"),
            Preterm::Lam(x, b) => write!(f, "(\\{}. {b})", x.name),
        }
    }
}

/// Injects a term into preterms (η-long form is kept as is).
pub fn embed(t: &Term) -> Preterm {
    let body = Preterm::apply(Preterm::Atom(t.head.clone()), t.args.iter().map(embed));
    t.binders
        .iter()
        .rev()
        .fold(body, |acc, x| Preterm::lam(x.clone(), acc))
}

/// `p↓`: the η-long β-normal form of a well-typed preterm.
pub fn normalize(p: &Preterm) -> Result<Term, TypeError> {
    p.type_of()?;
    Ok(freshen(&norm(p)))
}

fn norm(p: &Preterm) -> Term {
    match p {
        Preterm::Atom(h) => Term::eta(h.clone()),
        Preterm::Lam(x, b) => {
            let mut body = norm(b);
            body.binders.insert(0, x.clone());
            body
        }
        Preterm::App(f, a) => {
            let tf = norm(f);
            let ta = norm(a);
            instantiate(&tf, vec![ta])
        }
    }
}

/// A finite, type-preserving map from variables to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution(BTreeMap<Var, Term>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot bind {var} of type {expected} to {term} of type {actual}")]
pub struct SubstitutionError {
    pub var: String,
    pub expected: SimpleType,
    pub term: String,
    pub actual: SimpleType,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `var`; identity bindings (`X ↦ X↓`) are dropped.
    pub fn insert(&mut self, var: Var, term: Term) -> Result<(), SubstitutionError> {
        let actual = term.ty();
        if actual != var.ty {
            return Err(SubstitutionError {
                var: var.name.to_string(),
                expected: var.ty.clone(),
                term: term.to_string(),
                actual,
            });
        }
        if term.as_eta_var() == Some(&var) {
            self.0.remove(&var);
        } else {
            self.0.insert(var, term);
        }
        Ok(())
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Image of `v` (its η-long form when unbound).
    pub fn image(&self, v: &Var) -> Term {
        self.0.get(v).cloned().unwrap_or_else(|| Term::var(v))
    }

    /// Pointwise map over the range.
    pub fn map_range(&self, mut f: impl FnMut(&Term) -> Term) -> Substitution {
        Substitution(self.0.iter().map(|(k, v)| (k.clone(), f(v))).collect())
    }

    /// `(self; other)(X) = self(X) other↓`, extended by `other` on its own domain.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = BTreeMap::new();
        for (k, v) in &self.0 {
            out.insert(k.clone(), substitute(v, other));
        }
        for (k, v) in &other.0 {
            out.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Substitution(out)
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (v, t) in iter {
            s.0.insert(v, t);
        }
        s
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} := {v}", k.name)?;
        }
        f.write_str("}")
    }
}

/// `tθ↓`. Every binder of the result is fresh.
pub fn substitute(t: &Term, theta: &Substitution) -> Term {
    let mut env = Env {
        values: theta.0.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        renames: HashMap::new(),
    };
    env.go(t)
}

/// Copy of `t` with all binders renamed to fresh variables.
pub fn freshen(t: &Term) -> Term {
    Env::default().go(t)
}

/// Renames free occurrences of variables (variable-for-variable).
pub fn rename(t: &Term, map: &HashMap<Var, Var>) -> Term {
    let mut env = Env { values: HashMap::new(), renames: map.clone() };
    env.go(t)
}

/// β-reduces `(λȳ.body) args` hereditarily; `args.len()` may be smaller
/// than the number of binders, in which case the rest stay abstracted.
pub fn instantiate(v: &Term, args: Vec<Term>) -> Term {
    assert!(args.len() <= v.binders.len(), "too many arguments for {v}");
    let k = args.len();
    let mut env = Env::default();
    for (y, a) in v.binders.iter().zip(args) {
        env.values.insert(y.clone(), a);
    }
    let rest = Term::new(v.binders[k..].to_vec(), v.head.clone(), v.args.clone());
    env.go(&rest)
}

#[derive(Default)]
struct Env {
    values: HashMap<Var, Term>,
    renames: HashMap<Var, Var>,
}

impl Env {
    fn go(&mut self, t: &Term) -> Term {
        if let Some(x) = t.as_eta_var() {
            if !self.renames.contains_key(x) {
                if let Some(value) = self.values.get(x) {
                    return freshen(value);
                }
            }
        }
        let mut saved = Vec::with_capacity(t.binders.len());
        let mut binders = Vec::with_capacity(t.binders.len());
        for b in &t.binders {
            let nb = b.refresh();
            saved.push((b.clone(), self.renames.insert(b.clone(), nb.clone())));
            binders.push(nb);
        }
        let args: Vec<Term> = t.args.iter().map(|a| self.go(a)).collect();
        let mut result = match &t.head {
            Head::Var(v) => {
                if let Some(r) = self.renames.get(v) {
                    Term::app(Head::Var(r.clone()), args)
                } else if let Some(value) = self.values.get(v) {
                    let value = value.clone();
                    instantiate(&value, args)
                } else {
                    Term::app(t.head.clone(), args)
                }
            }
            Head::Fun(_) => Term::app(t.head.clone(), args),
        };
        for (b, prev) in saved.into_iter().rev() {
            match prev {
                Some(p) => self.renames.insert(b, p),
                None => self.renames.remove(&b),
            };
        }
        binders.extend(result.binders);
        result.binders = binders;
        result
    }
}
