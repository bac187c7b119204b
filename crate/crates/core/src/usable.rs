//! Usable rules and the projection system `C_e`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::rewrite::{RewriteSystem, Rule, Signature};
use crate::static_dp::DependencyPair;
use crate::term::{FunSym, Term, Var};
use crate::types::SimpleType;

/// `f >_def g`: `g` is defined and occurs in the right-hand side of a rule
/// for `f`.
pub fn defined_dependency(r: &RewriteSystem) -> BTreeMap<FunSym, BTreeSet<FunSym>> {
    let defined = r.defined_symbols();
    let mut out: BTreeMap<FunSym, BTreeSet<FunSym>> = BTreeMap::new();
    for rule in &r.rules {
        let deps = out.entry(rule.top().clone()).or_default();
        deps.extend(rule.rhs.fun_symbols().into_iter().filter(|g| defined.contains(g)));
    }
    out
}

/// A subterm `X(t̄)` with `X` free whose arguments are not distinct variables
/// bound in `t`.
pub fn non_pattern_application(t: &Term) -> Option<Term> {
    fn walk<'a>(t: &'a Term, bound: &mut Vec<&'a Var>) -> Option<Term> {
        let n = bound.len();
        bound.extend(t.binders.iter());
        let mut found = None;
        if t.head.as_var().is_some_and(|x| !bound.contains(&x)) {
            let mut seen: Vec<&Var> = Vec::new();
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
        if found.is_none() {
            found = t.args.iter().find_map(|a| walk(a, bound));
        }
        bound.truncate(n);
        found
    }
    walk(t, &mut Vec::new())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsableReport {
    /// Labels in rule order.
    pub rules: Vec<String>,
    /// Set when `U` is all of `R` because of a non-pattern subterm.
    pub reason: Option<String>,
}

/// `U(t)`.
pub fn usable_rules_of_term(r: &RewriteSystem, t: &Term) -> UsableReport {
    if let Some(s) = non_pattern_application(t) {
        return UsableReport {
            rules: r.rules.iter().map(|x| x.label.clone()).collect(),
            reason: Some(format!("{s} is not applied to distinct bound variables")),
        };
    }
    let defined = r.defined_symbols();
    let deps = defined_dependency(r);
    let mut reach: BTreeSet<FunSym> = t.fun_symbols().into_iter().filter(|f| defined.contains(f)).collect();
    let mut stack: Vec<FunSym> = reach.iter().cloned().collect();
    while let Some(f) = stack.pop() {
        for g in deps.get(&f).into_iter().flatten() {
            if reach.insert(g.clone()) {
                stack.push(g.clone());
            }
        }
    }
    UsableReport {
        rules: r.rules.iter().filter(|x| reach.contains(x.top())).map(|x| x.label.clone()).collect(),
        reason: None,
    }
}

/// `U(C)`: union over the right-hand sides of the pairs.
pub fn usable_rules(r: &RewriteSystem, pairs: &[DependencyPair]) -> UsableReport {
    let mut labels = BTreeSet::new();
    let mut reason = None;
    for p in pairs {
        let u = usable_rules_of_term(r, &p.rhs);
        labels.extend(u.rules);
        if reason.is_none() {
            reason = u.reason.map(|s| format!("pair {}: {s}", p.id));
        }
    }
    UsableReport {
        rules: r.rules.iter().filter(|x| labels.contains(&x.label)).map(|x| x.label.clone()).collect(),
        reason,
    }
}

fn fresh_name(sig: &Signature, base: &str) -> String {
    let mut name = base.to_string();
    while sig.functions.contains_key(&name) || sig.variables.contains_key(&name) {
        name.push('\'');
    }
    name
}

/// `C_e = { c_α(x1, x2) → x1, c_α(x1, x2) → x2 | α basic }`.
pub fn ce_rules(sig: &Signature) -> Vec<Rule> {
    let mut out = Vec::new();
    for alpha in &sig.base_types {
        let c = choice(sig, alpha);
        let x1 = Var::fresh("x1", alpha.clone());
        let x2 = Var::fresh("x2", alpha.clone());
        let lhs = Term::fun(&c, vec![Term::var(&x1), Term::var(&x2)]);
        for (i, x) in [(1, &x1), (2, &x2)] {
            let rule = Rule::new(&format!("ce_{alpha}_{i}"), lhs.clone(), Term::var(x)).expect("well-formed");
            out.push(rule);
        }
    }
    out
}

/// The constant `⊥_α`.
pub fn bottom(sig: &Signature, alpha: &SimpleType) -> FunSym {
    FunSym::new(&fresh_name(sig, &format!("bot_{alpha}")), alpha.clone())
}

/// The symbol `c_α`.
pub fn choice(sig: &Signature, alpha: &SimpleType) -> FunSym {
    FunSym::new(
        &fresh_name(sig, &format!("c_{alpha}")),
        SimpleType::curried([alpha.clone(), alpha.clone()], alpha.clone()),
    )
}
