//! Rewrite rules, pattern matching and one-step reduction.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::subst::{rename, substitute, Substitution};
use crate::term::{FunSym, Head, Term, Var};
use crate::types::SimpleType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule {0}: left-hand side must have a function symbol at the top")]
    NotFunctionHead(String),
    #[error("rule {0}: sides must have the same basic type (found {1} and {2})")]
    TypeMismatch(String, SimpleType, SimpleType),
    #[error("rule {0}: variable {1} occurs in the right-hand side but not in the left-hand side")]
    ExtraVariable(String, String),
    #[error("rule {0}: left-hand side is not a higher-order pattern at {1}")]
    NonPattern(String, String),
    #[error("rule {0}: {1}")]
    IllFormed(String, String),
    #[error("duplicate rule label {0}")]
    DuplicateLabel(String),
}

/// `lhs → rhs` with `top(lhs) ∈ Σ`, both sides of the same basic type and
/// `FV(rhs) ⊆ FV(lhs)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub label: String,
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    /// Checks every rule invariant except the pattern restriction (see
    /// [`Rule::check_pattern`]).
    pub fn new(label: &str, lhs: Term, rhs: Term) -> Result<Rule, RuleError> {
        let label = label.to_string();
        lhs.check_well_formed()
            .map_err(|e| RuleError::IllFormed(label.clone(), e))?;
        rhs.check_well_formed()
            .map_err(|e| RuleError::IllFormed(label.clone(), e))?;
        if lhs.is_abstraction() || lhs.head.as_fun().is_none() {
            return Err(RuleError::NotFunctionHead(label));
        }
        let (lt, rt) = (lhs.ty(), rhs.ty());
        if lt != rt || !lt.is_basic() {
            return Err(RuleError::TypeMismatch(label, lt, rt));
        }
        let lfv = lhs.free_vars();
        if let Some(v) = rhs.free_vars().iter().find(|v| !lfv.contains(*v)) {
            return Err(RuleError::ExtraVariable(label, v.name.to_string()));
        }
        Ok(Rule { label, lhs, rhs })
    }

    pub fn top(&self) -> &FunSym {
        self.lhs.head.as_fun().expect("rule lhs has a function head")
    }

    pub fn check_pattern(&self) -> Result<(), RuleError> {
        match non_pattern_subterm(&self.lhs) {
            Some(s) => Err(RuleError::NonPattern(self.label.clone(), s.to_string())),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// First subterm `X(t̄)` (X free) whose arguments are not distinct bound variables.
pub fn non_pattern_subterm(t: &Term) -> Option<Term> {
    fn walk<'a>(t: &'a Term, bound: &mut Vec<&'a Var>) -> Option<Term> {
        let n = bound.len();
        bound.extend(t.binders.iter());
        let mut found = None;
        if let Head::Var(x) = &t.head {
            if !bound.contains(&x) && !t.args.is_empty() {
                let mut seen = Vec::new();
                for a in &t.args {
                    match a.as_eta_var() {
                        Some(z) if bound.contains(&z) && !seen.contains(&z) => seen.push(z),
                        _ => {
                            found = Some(t.body());
                            break;
                        }
                    }
                }
            }
        }
        if found.is_none() {
            for a in &t.args {
                if let Some(s) = walk(a, bound) {
                    found = Some(s);
                    break;
                }
            }
        }
        bound.truncate(n);
        found
    }
    walk(t, &mut Vec::new())
}

/// Declared basic types, function symbols and free variables.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    pub base_types: Vec<SimpleType>,
    pub functions: BTreeMap<String, FunSym>,
    pub variables: BTreeMap<String, Var>,
}

impl Signature {
    pub fn function(&self, name: &str) -> Option<&FunSym> {
        self.functions.get(name)
    }

    /// Resolves `f` or `f#` to a symbol.
    pub fn resolve(&self, id: &str) -> Option<FunSym> {
        match id.strip_suffix('#') {
            Some(base) => self.functions.get(base).map(FunSym::marked),
            None => self.functions.get(id).cloned(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RewriteSystem {
    pub signature: Signature,
    pub rules: Vec<Rule>,
}

impl RewriteSystem {
    pub fn new(signature: Signature, rules: Vec<Rule>) -> Result<Self, RuleError> {
        let mut labels = HashSet::new();
        for r in &rules {
            if !labels.insert(r.label.clone()) {
                return Err(RuleError::DuplicateLabel(r.label.clone()));
            }
        }
        Ok(RewriteSystem { signature, rules })
    }

    /// `D_R`: the top symbols of left-hand sides.
    pub fn defined_symbols(&self) -> BTreeSet<FunSym> {
        self.rules.iter().map(|r| r.top().clone()).collect()
    }

    pub fn rule(&self, label: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.label == label)
    }

    pub fn step_all(&self, t: &Term) -> Vec<Term> {
        step_all(t, &self.rules)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unsupported rule: left-hand side {0} is not a higher-order pattern")]
pub struct MatchError(pub String);

/// Pattern matching: the unique `θ` with `lhs θ↓ ≡ ground`, if any.
pub fn match_pattern(lhs: &Term, ground: &Term) -> Result<Option<Substitution>, MatchError> {
    if non_pattern_subterm(lhs).is_some() {
        return Err(MatchError(lhs.to_string()));
    }
    Ok(match_unchecked(lhs, ground))
}

pub(crate) fn match_unchecked(lhs: &Term, ground: &Term) -> Option<Substitution> {
    let free = lhs.free_vars();
    let mut m = Matcher { free: &free, bound: Vec::new(), theta: BTreeMap::new() };
    if m.go(lhs, ground) {
        Some(m.theta.into_iter().collect())
    } else {
        None
    }
}

struct Matcher<'a> {
    free: &'a BTreeSet<Var>,
    bound: Vec<(Var, Var)>,
    theta: BTreeMap<Var, Term>,
}

impl Matcher<'_> {
    fn go(&mut self, l: &Term, g: &Term) -> bool {
        if l.binders.len() != g.binders.len() {
            return false;
        }
        let n = self.bound.len();
        for (a, b) in l.binders.iter().zip(&g.binders) {
            if a.ty != b.ty {
                self.bound.truncate(n);
                return false;
            }
            self.bound.push((a.clone(), b.clone()));
        }
        let ok = self.body(l, g);
        self.bound.truncate(n);
        ok
    }

    fn body(&mut self, l: &Term, g: &Term) -> bool {
        match &l.head {
            Head::Var(x) => {
                if let Some((_, gx)) = self.bound.iter().rev().find(|(lb, _)| lb == x) {
                    let gx = gx.clone();
                    return g.head.as_var() == Some(&gx) && self.args(l, g);
                }
                if !self.free.contains(x) {
                    // a variable free in the rule but not in the pattern cannot occur
                    return g.head.as_var() == Some(x) && self.args(l, g);
                }
                self.bind(x, l, g)
            }
            Head::Fun(f) => g.head.as_fun() == Some(f) && self.args(l, g),
        }
    }

    fn args(&mut self, l: &Term, g: &Term) -> bool {
        l.args.len() == g.args.len() && l.args.iter().zip(&g.args).all(|(a, b)| self.go(a, b))
    }

    fn bind(&mut self, x: &Var, l: &Term, g: &Term) -> bool {
        let mut map = HashMap::new();
        let mut params = Vec::new();
        for a in &l.args {
            let z = a.as_eta_var().expect("pattern argument");
            let Some((_, gz)) = self.bound.iter().rev().find(|(lb, _)| lb == z) else {
                return false;
            };
            let w = Var::fresh(&z.name, z.ty.clone());
            map.insert(gz.clone(), w.clone());
            params.push(w);
        }
        let body = g.body();
        let fv = body.free_vars();
        // locally bound variables of the target may only occur through the parameters
        if self
            .bound
            .iter()
            .any(|(_, gb)| fv.contains(gb) && !map.contains_key(gb))
        {
            return false;
        }
        let mut value = rename(&body, &map);
        let mut binders = params;
        binders.extend(value.binders);
        value.binders = binders;
        match self.theta.get(x) {
            Some(prev) => prev == &value,
            None => {
                if value.as_eta_var() != Some(x) {
                    self.theta.insert(x.clone(), value);
                }
                true
            }
        }
    }
}

/// Applies `rule` at the root of `t` when it matches.
pub fn rewrite_root(t: &Term, rule: &Rule) -> Option<Term> {
    if t.is_abstraction() {
        return None;
    }
    let theta = match_unchecked(&rule.lhs, t)?;
    Some(substitute(&rule.rhs, &theta))
}

/// All one-step reducts of `t`, deduplicated modulo α, root reducts first.
pub fn step_all(t: &Term, rules: &[Rule]) -> Vec<Term> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    steps_into(t, rules, &mut |u| {
        if seen.insert(u.key()) {
            out.push(u);
        }
    });
    out
}

fn steps_into(t: &Term, rules: &[Rule], emit: &mut dyn FnMut(Term)) {
    let body = t.body();
    if body.body_type().map(SimpleType::is_basic).unwrap_or(false) {
        for r in rules {
            if let Some(mut u) = rewrite_root(&body, r) {
                let mut binders = t.binders.clone();
                binders.extend(u.binders);
                u.binders = binders;
                emit(u);
            }
        }
    }
    for (i, a) in t.args.iter().enumerate() {
        steps_into(a, rules, &mut |r| {
            let mut u = t.clone();
            u.args[i] = r;
            emit(u);
        });
    }
}

/// Whether `t` is reachable from `s` in at most `depth` steps.
pub fn reachable_within(s: &Term, t: &Term, rules: &[Rule], depth: usize) -> bool {
    if s == t {
        return true;
    }
    let mut seen: HashSet<String> = HashSet::from([s.key()]);
    let mut frontier = vec![s.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for u in &frontier {
            for v in step_all(u, rules) {
                if &v == t {
                    return true;
                }
                if seen.insert(v.key()) {
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            return false;
        }
        frontier = next;
    }
    false
}
