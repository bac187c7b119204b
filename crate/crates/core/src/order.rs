//! A conservative recursive path order on (filtered) terms, and a search for
//! precedences that orient given constraints.
//!
//! `s > t` holds when one of the following applies:
//!
//! * `t = λx̄.v` and either `s = λȳ.u` with binders of the same types and
//!   `u > v{x̄ ↦ ȳ}`, or `s > v`;
//! * `s = f(s̄)` and some `sᵢ` is α-equal to `t` or `sᵢ > t`;
//! * `s = f(s̄)`, `t = g(t̄)`, `f > g` in the precedence and `s > tⱼ` for all `j`;
//! * `s = f(s̄)`, `t = f(t̄)`, `s̄ >lex t̄` and `s > tⱼ` for all `j` (lex status),
//!   or `s̄ >mul t̄` (mul status).
//!
//! Terms headed by variables are only ever reached on the right through the
//! first subterm case, which keeps the order stable under substitution.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::subst::rename;
use crate::term::{FunSym, Head, Term};

/// A strict order on function symbols given by generating arcs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Precedence {
    arcs: BTreeSet<(FunSym, FunSym)>,
}

impl Precedence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_arcs(arcs: impl IntoIterator<Item = (FunSym, FunSym)>) -> Option<Self> {
        let mut p = Precedence::new();
        for (f, g) in arcs {
            if !p.try_add(&f, &g) {
                return None;
            }
        }
        Some(p)
    }

    pub fn arcs(&self) -> impl Iterator<Item = &(FunSym, FunSym)> {
        self.arcs.iter()
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// `f > g` in the transitive closure.
    pub fn gt(&self, f: &FunSym, g: &FunSym) -> bool {
        let mut stack = vec![f];
        let mut seen = BTreeSet::new();
        while let Some(h) = stack.pop() {
            for (a, b) in self.arcs.range((h.clone(), min_sym())..) {
                if a != h {
                    break;
                }
                if b == g {
                    return true;
                }
                if seen.insert(b) {
                    stack.push(b);
                }
            }
        }
        false
    }

    /// Adds `f > g` unless this would create a cycle.
    pub fn try_add(&mut self, f: &FunSym, g: &FunSym) -> bool {
        if f == g || self.gt(g, f) {
            return false;
        }
        self.arcs.insert((f.clone(), g.clone()));
        true
    }

    fn remove(&mut self, arc: &(FunSym, FunSym)) {
        self.arcs.remove(arc);
    }
}

fn min_sym() -> FunSym {
    FunSym::new("", crate::types::SimpleType::basic(""))
}

impl fmt::Display for Precedence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.arcs.iter().map(|(a, b)| format!("{a} > {b}")).collect();
        f.write_str(&parts.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Lex,
    Mul,
}

/// Per-symbol status; symbols not listed use `default`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusMap {
    pub default: Status,
    pub overrides: BTreeMap<FunSym, Status>,
}

impl Default for StatusMap {
    fn default() -> Self {
        StatusMap { default: Status::Lex, overrides: BTreeMap::new() }
    }
}

impl StatusMap {
    pub fn uniform(s: Status) -> Self {
        StatusMap { default: s, overrides: BTreeMap::new() }
    }

    pub fn of(&self, f: &FunSym) -> Status {
        self.overrides.get(f).copied().unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BaseOrder {
    pub precedence: Precedence,
    pub status: StatusMap,
}

impl BaseOrder {
    pub fn greater(&self, s: &Term, t: &Term) -> bool {
        let mut o = Orienter { prec: self.precedence.clone(), status: &self.status, extend: false };
        o.gt(s, t)
    }

    pub fn greater_or_equal(&self, s: &Term, t: &Term) -> bool {
        s == t || self.greater(s, t)
    }
}

pub fn path_greater(order: &BaseOrder, s: &Term, t: &Term) -> bool {
    order.greater(s, t)
}

pub fn path_ge(order: &BaseOrder, s: &Term, t: &Term) -> bool {
    order.greater_or_equal(s, t)
}

struct Orienter<'a> {
    prec: Precedence,
    status: &'a StatusMap,
    extend: bool,
}

impl Orienter<'_> {
    fn ge(&mut self, s: &Term, t: &Term) -> bool {
        s == t || self.gt(s, t)
    }

    fn gt(&mut self, s: &Term, t: &Term) -> bool {
        if !s.is_abstraction() && s.head.as_fun().is_some() && s.args.iter().any(|si| si == t) {
            return true;
        }
        if t.is_abstraction() {
            if s.binders.len() == t.binders.len()
                && s.binders.iter().zip(&t.binders).all(|(x, y)| x.ty == y.ty)
            {
                let map: HashMap<_, _> = t.binders.iter().cloned().zip(s.binders.iter().cloned()).collect();
                let v = rename(&t.body(), &map);
                if self.gt(&s.body(), &v) {
                    return true;
                }
            }
            return self.gt(s, &t.body());
        }
        if s.is_abstraction() {
            return false;
        }
        let Head::Fun(f) = &s.head else {
            return false;
        };
        let snapshot = self.prec.clone();
        for si in &s.args {
            if !si.is_abstraction() && si.head.as_fun().is_some() && self.gt(si, t) {
                return true;
            }
            self.prec = snapshot.clone();
        }
        let Head::Fun(g) = &t.head else {
            return false;
        };
        if f == g && s.args.len() == t.args.len() {
            let ok = match self.status.of(f) {
                Status::Lex => self.lex(s, t),
                Status::Mul => self.mul(&s.args, &t.args),
            };
            if ok {
                return true;
            }
            self.prec = snapshot.clone();
        }
        if f != g {
            let known = self.prec.gt(f, g);
            if (known || (self.extend && self.prec.try_add(f, g))) && t.args.iter().all(|tj| self.gt(s, tj)) {
                return true;
            }
            self.prec = snapshot;
        }
        false
    }

    fn lex(&mut self, s: &Term, t: &Term) -> bool {
        let i = match s.args.iter().zip(&t.args).position(|(a, b)| a != b) {
            Some(i) => i,
            None => return false,
        };
        self.gt(&s.args[i], &t.args[i]) && t.args[i + 1..].iter().all(|tj| self.gt(s, tj))
    }

    fn mul(&mut self, ss: &[Term], ts: &[Term]) -> bool {
        let mut left: Vec<&Term> = ss.iter().collect();
        let mut right: Vec<&Term> = Vec::new();
        for t in ts {
            if let Some(k) = left.iter().position(|s| *s == t) {
                left.remove(k);
            } else {
                right.push(t);
            }
        }
        if left.is_empty() {
            return false;
        }
        right.iter().all(|t| left.iter().any(|s| self.gt(s, t)))
    }
}

/// Greedily extends a precedence so that every strict constraint satisfies
/// `>` and every weak one `≥`, then drops arcs that are not needed.
pub fn find_precedence(
    strict: &[(Term, Term)],
    weak: &[(Term, Term)],
    status: &StatusMap,
) -> Option<Precedence> {
    let mut o = Orienter { prec: Precedence::new(), status, extend: true };
    for (s, t) in strict {
        if !o.gt(s, t) {
            return None;
        }
    }
    for (s, t) in weak {
        if !o.ge(s, t) {
            return None;
        }
    }
    let mut prec = o.prec;
    let arcs: Vec<_> = prec.arcs().cloned().collect();
    for arc in arcs {
        let mut trial = prec.clone();
        trial.remove(&arc);
        let order = BaseOrder { precedence: trial.clone(), status: status.clone() };
        let ok = strict.iter().all(|(s, t)| order.greater(s, t))
            && weak.iter().all(|(s, t)| order.greater_or_equal(s, t));
        if ok {
            prec = trial;
        }
    }
    Some(prec)
}

/// Candidate status assignments: all lex, all mul, then each single symbol
/// flipped from lex to mul.
pub fn status_candidates(symbols: &BTreeSet<FunSym>) -> Vec<StatusMap> {
    let mut out = vec![StatusMap::uniform(Status::Lex), StatusMap::uniform(Status::Mul)];
    for f in symbols {
        let mut m = StatusMap::uniform(Status::Lex);
        m.overrides.insert(f.clone(), Status::Mul);
        out.push(m);
    }
    out
}

/// Tries the status candidates in order.
pub fn find_base_order(strict: &[(Term, Term)], weak: &[(Term, Term)]) -> Option<BaseOrder> {
    let mut symbols = BTreeSet::new();
    for (s, t) in strict.iter().chain(weak) {
        symbols.extend(s.fun_symbols());
        symbols.extend(t.fun_symbols());
    }
    status_candidates(&symbols).into_iter().find_map(|status| {
        find_precedence(strict, weak, &status).map(|precedence| BaseOrder { precedence, status })
    })
}
