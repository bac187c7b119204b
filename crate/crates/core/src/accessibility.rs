//! Stable subterms, accessible terms, safe subterms and the PFP check.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rewrite::{RewriteSystem, Rule};
use crate::subst::{embed, normalize};
use crate::term::{Head, Term, Var};

/// `SSub(t) = SSub_{FV(t)}(t)`, deduplicated modulo α in pre-order.
pub fn stable_subterms(t: &Term) -> Vec<Term> {
    let blocked = t.free_vars();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    ssub(t, &blocked, &mut seen, &mut out);
    out
}

fn ssub(t: &Term, blocked: &BTreeSet<Var>, seen: &mut HashSet<String>, out: &mut Vec<Term>) {
    if seen.insert(t.key()) {
        out.push(t.clone());
    }
    if let Some((_, rest)) = t.binders.split_first() {
        let s = Term::new(rest.to_vec(), t.head.clone(), t.args.clone());
        ssub(&s, blocked, seen, out);
        return;
    }
    if let Head::Var(a) = &t.head {
        if blocked.contains(a) {
            return;
        }
    }
    for a in &t.args {
        ssub(a, blocked, seen, out);
    }
}

/// Which accessibility cases are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SafeMode {
    /// Cases 0 to 5.
    Full,
    /// Cases 0 and 1 only.
    Legacy,
}

/// `Acc(l')`: β-normal preterms in spine form whose argument lists may be
/// shorter than the head's arity.
#[derive(Debug, Clone)]
pub struct AccessibleSet {
    pub origin: Term,
    pub members: Vec<Term>,
}

impl AccessibleSet {
    pub fn contains(&self, t: &Term) -> bool {
        let k = t.key();
        self.members.iter().any(|m| m.key() == k)
    }
}

pub fn accessible_set(l_prime: &Term) -> AccessibleSet {
    accessible_set_with(l_prime, SafeMode::Full)
}

pub fn accessible_set_with(l_prime: &Term, mode: SafeMode) -> AccessibleSet {
    let fv_l = l_prime.free_vars();
    let mut members = Vec::new();
    let mut seen = HashSet::new();
    let mut work = Vec::new();
    let mut add = |t: Term, work: &mut Vec<Term>| {
        if seen.insert(t.key()) {
            members.push(t.clone());
            work.push(t);
        }
    };
    add(l_prime.clone(), &mut work);
    for s in stable_subterms(l_prime) {
        let basic = s.ty().is_basic();
        if basic && s.free_vars().is_subset(&fv_l) {
            add(s, &mut work);
        }
    }
    if mode == SafeMode::Full {
        while let Some(t) = work.pop() {
            for u in destruct(&t, &fv_l) {
                add(u, &mut work);
            }
        }
    }
    AccessibleSet { origin: l_prime.clone(), members }
}

/// Cases 2 to 5 read right to left: each output is smaller than `t`.
fn destruct(t: &Term, fv_l: &BTreeSet<Var>) -> Vec<Term> {
    let mut out = Vec::new();
    if let Some((x, rest)) = t.binders.split_first() {
        if !fv_l.contains(x) {
            out.push(Term::new(rest.to_vec(), t.head.clone(), t.args.clone()));
        }
        return out;
    }
    if let Some((last, init)) = t.args.split_last() {
        if let Some(x) = last.as_eta_var() {
            let s = Term::new(Vec::new(), t.head.clone(), init.to_vec());
            if t.head.as_var() != Some(x) && !s.free_vars().contains(x) && !fv_l.contains(x) {
                out.push(s);
            }
        }
    }
    match &t.head {
        Head::Fun(_) => {
            for a in &t.args {
                let body = a.body();
                if body.ty().is_basic() {
                    let fv = body.free_vars();
                    if a.binders.iter().all(|x| !fv.contains(x)) {
                        out.push(body);
                    }
                }
            }
        }
        Head::Var(x) => {
            let in_args = t.args.iter().any(|a| a.free_vars().contains(x));
            if !in_args && !fv_l.contains(x) {
                out.extend(t.args.iter().cloned());
            }
        }
    }
    out
}

/// `safe(l)` in argument order, deduplicated modulo α.
pub fn safe_subterms(l: &Term) -> Vec<Term> {
    safe_subterms_with(l, SafeMode::Full)
}

pub fn safe_subterms_with(l: &Term, mode: SafeMode) -> Vec<Term> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for lp in &l.args {
        let fv = lp.free_vars();
        for t in accessible_set_with(lp, mode).members {
            if t.free_vars().is_subset(&fv) {
                let n = normal(&t);
                if seen.insert(n.key()) {
                    out.push(n);
                }
            }
        }
    }
    out
}

/// `t↓` for a partial spine.
pub fn normal(t: &Term) -> Term {
    normalize(&embed(t)).expect("accessible terms are well-typed")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PfpViolation {
    pub rule: String,
    pub subterm: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PfpReport {
    pub pfp: bool,
    pub mode: SafeMode,
    pub violations: Vec<PfpViolation>,
}

impl fmt::Display for PfpReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pfp {
            return f.write_str("plain function-passing");
        }
        f.write_str("not plain function-passing:")?;
        for v in &self.violations {
            write!(f, "\n  rule {}: no prefix of {} is safe", v.rule, v.subterm)?;
        }
        Ok(())
    }
}

/// Subterms `Z(r̄ₙ)` of `r` with `Z ∈ FV(r)`.
pub fn free_variable_applications(r: &Term) -> Vec<Term> {
    let fv = r.free_vars();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    r.visit(&mut |t| {
        if let Head::Var(z) = &t.head {
            if fv.contains(z) {
                let b = t.body();
                if seen.insert(b.key()) {
                    out.push(b);
                }
            }
        }
    });
    out
}

/// Whether some `Z(r̄ₖ)↓`, `k ≤ n`, is in `safe`.
pub fn has_safe_prefix(app: &Term, safe: &[Term]) -> bool {
    let keys: HashSet<String> = safe.iter().map(Term::key).collect();
    (0..=app.args.len()).any(|k| {
        let p = Term::new(Vec::new(), app.head.clone(), app.args[..k].to_vec());
        keys.contains(&normal(&p).key())
    })
}

pub fn rule_violations(rule: &Rule, mode: SafeMode) -> Vec<PfpViolation> {
    let safe = safe_subterms_with(&rule.lhs, mode);
    free_variable_applications(&rule.rhs)
        .into_iter()
        .filter(|app| !has_safe_prefix(app, &safe))
        .map(|app| PfpViolation { rule: rule.label.clone(), subterm: app.to_string() })
        .collect()
}

pub fn is_pfp(r: &RewriteSystem, legacy: bool) -> PfpReport {
    let mode = if legacy { SafeMode::Legacy } else { SafeMode::Full };
    let violations: Vec<PfpViolation> =
        r.rules.iter().flat_map(|rule| rule_violations(rule, mode)).collect();
    PfpReport { pfp: violations.is_empty(), mode, violations }
}
