//! Randomised property suites over the shipped problems. Each returns a tally
//! so callers can report counts.

use std::collections::BTreeSet;

use hrs_sdp::accessibility::stable_subterms;
use hrs_sdp::filtering::{apply_filtering, deviations, filtered_substitution, ArgumentFiltering};
use hrs_sdp::rewrite::{step_all, RewriteSystem, Rule};
use hrs_sdp::static_dp::{dependency_graph, static_dependency_pairs};
use hrs_sdp::accessibility::SafeMode;
use hrs_sdp::subst::{embed, normalize, substitute, Substitution};
use hrs_sdp::term::{FunSym, Head, Term, Var};
use hrs_sdp::types::SimpleType;
use hrs_sdp::usable::{ce_rules, usable_rules};

use super::{loose_key, problem, reach, search, Interpretation, TermGen};

#[derive(Debug, Default, Clone)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub first_failure: Option<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

impl std::fmt::Display for Tally {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} passed, {} failed, {} skipped", self.passed, self.failed, self.skipped)?;
        if let Some(x) = &self.first_failure {
            write!(f, "; first failure: {x}")?;
        }
        Ok(())
    }
}

const SYSTEMS: &[&str] = &["ave", "heap", "deriv", "forall"];

fn types_of(r: &RewriteSystem) -> Vec<SimpleType> {
    let mut out: Vec<SimpleType> = r.signature.base_types.clone();
    for v in r.signature.variables.values() {
        if !out.contains(&v.ty) {
            out.push(v.ty.clone());
        }
    }
    out
}

fn random_term(g: &mut TermGen, r: &RewriteSystem, depth: usize) -> Term {
    let tys = types_of(r);
    let ty = g.pick(&tys).unwrap().clone();
    g.term(&ty, depth)
}

fn random_filtering(g: &mut TermGen, symbols: &[FunSym]) -> ArgumentFiltering {
    let mut pi = ArgumentFiltering::identity();
    for f in symbols {
        let ds = deviations(f);
        if !ds.is_empty() && g.below(2) == 0 {
            pi.set(f, g.pick(&ds).unwrap().clone()).unwrap();
        }
    }
    pi
}

fn symbols(r: &RewriteSystem) -> Vec<FunSym> {
    let mut out: Vec<FunSym> = r.signature.functions.values().cloned().collect();
    let marked: Vec<FunSym> = r.defined_symbols().iter().map(FunSym::marked).collect();
    out.extend(marked);
    out
}

/// Terms over the signature extended with marked symbols.
fn generator(r: &RewriteSystem, seed: u64) -> TermGen {
    let mut g = TermGen::new(r, seed);
    g.funs = symbols(r);
    g
}

/// `π(tθ↓) ≡ π(t)θ_π↓`.
pub fn filtering_commutes(n: usize, seed: u64) -> Tally {
    let mut tally = Tally::default();
    let systems: Vec<RewriteSystem> = SYSTEMS.iter().map(|s| problem(s)).collect();
    let mut g = generator(&systems[0], seed);
    for i in 0..n {
        let r = &systems[i % systems.len()];
        g.funs = symbols(r);
        g.free = r.signature.variables.values().cloned().collect();
        let t = random_term(&mut g, r, 3);
        let theta = g.substitution(&t.free_vars(), 2);
        let funs = g.funs.clone();
        let pi = random_filtering(&mut g, &funs);
        let lhs = apply_filtering(&pi, &substitute(&t, &theta));
        let rhs = substitute(&apply_filtering(&pi, &t), &filtered_substitution(&pi, &theta));
        tally.check(lhs == rhs, || format!("t = {t}, θ = {theta}, π = {pi}: {lhs} vs {rhs}"));
    }
    tally
}

/// `π(t)` is well-typed under `type_π` and keeps the type of `t`.
pub fn filtering_well_typed(n: usize, seed: u64) -> Tally {
    let mut tally = Tally::default();
    let systems: Vec<RewriteSystem> = SYSTEMS.iter().map(|s| problem(s)).collect();
    let mut g = generator(&systems[0], seed);
    for i in 0..n {
        let r = &systems[i % systems.len()];
        g.funs = symbols(r);
        g.free = r.signature.variables.values().cloned().collect();
        let t = random_term(&mut g, r, 4);
        let funs = g.funs.clone();
        let pi = random_filtering(&mut g, &funs);
        let ft = apply_filtering(&pi, &t);
        let ok = ft.check_well_formed().is_ok() && ft.ty() == t.ty();
        tally.check(ok, || format!("π = {pi}, t = {t}, π(t) = {ft}"));
    }
    tally
}

/// `SSub(t) ⊆ Sub(t)` and `uθ↓ ∈ SSub(tθ↓)` for `u ∈ SSub(t)`.
pub fn stable_subterms_stable(n: usize, seed: u64) -> Tally {
    let mut tally = Tally::default();
    let systems: Vec<RewriteSystem> = SYSTEMS.iter().map(|s| problem(s)).collect();
    let mut g = TermGen::new(&systems[0], seed);
    for i in 0..n {
        let r = &systems[i % systems.len()];
        g.funs = r.signature.functions.values().cloned().collect();
        g.free = r.signature.variables.values().cloned().collect();
        let t = random_term(&mut g, r, 3);
        let ss = stable_subterms(&t);
        let sub_ok = ss.iter().all(|u| t.has_subterm(u));
        let theta = g.substitution(&t.free_vars(), 2);
        let t_theta = substitute(&t, &theta);
        let mut globals: BTreeSet<Var> = t.free_vars();
        for (_, v) in theta.iter() {
            globals.extend(v.free_vars());
        }
        let target: BTreeSet<String> = stable_subterms(&t_theta).iter().map(|v| loose_key(v, &globals)).collect();
        let missing = ss.iter().find(|u| !target.contains(&loose_key(&substitute(u, &theta), &globals)));
        tally.check(sub_ok && missing.is_none(), || match missing {
            Some(u) => format!("t = {t}, θ = {theta}: {u}θ↓ not stable in {t_theta}"),
            None => format!("t = {t}: a stable subterm is not a subterm"),
        });
    }
    tally
}

fn random_reduct(g: &mut TermGen, t: &Term, rules: &[Rule]) -> Option<Term> {
    let next = step_all(t, rules);
    g.pick(&next).cloned()
}

fn occurrences(t: &Term, x: &Var) -> usize {
    let mut n = 0;
    t.visit(&mut |s| {
        if s.head == Head::Var(x.clone()) {
            n += 1;
        }
    });
    n
}

/// `s →* t` and `θ →* θ'` imply `sθ↓ →* tθ'↓`, over `R_sum`.
pub fn reduction_under_substitution(n: usize, seed: u64) -> Tally {
    let mut tally = Tally::default();
    let r = problem("sum");
    let mut g = TermGen::new(&r, seed);
    let mut attempts = 0;
    while tally.passed + tally.failed + tally.skipped < n {
        attempts += 1;
        assert!(attempts < 100 * n, "generator produces no redexes");
        let s = random_term(&mut g, &r, 3);
        let steps = g.below(3);
        let mut t = s.clone();
        for _ in 0..steps {
            match random_reduct(&mut g, &t, &r.rules) {
                Some(u) => t = u,
                None => break,
            }
        }
        let vars: BTreeSet<Var> = s.free_vars().union(&t.free_vars()).cloned().collect();
        let theta = g.substitution(&vars, 2);
        let mut theta2 = Substitution::new();
        let mut changed = None;
        for (x, v) in theta.iter() {
            let w = if changed.is_none() { random_reduct(&mut g, v, &r.rules) } else { None };
            match w {
                Some(w) => {
                    changed = Some(x.clone());
                    theta2.insert(x.clone(), w).unwrap();
                }
                None => theta2.insert(x.clone(), v.clone()).unwrap(),
            }
        }
        if steps == 0 && changed.is_none() && g.below(4) != 0 {
            continue;
        }
        let from = substitute(&s, &theta);
        let to = substitute(&t, &theta2);
        let copies = changed.as_ref().map_or(0, |x| occurrences(&t, x));
        let depth = steps + 2 * copies + 2;
        match search(&from, &to, &r.rules, depth, false, 50_000) {
            None => tally.skipped += 1,
            Some(ok) => tally.check(ok, || format!("{from} does not reach {to} within {depth} steps")),
        }
    }
    tally
}

/// Interpretations above this size count as inconclusive.
const MAX_IMAGE: usize = 3000;

/// `s → t` implies `I(s) →+ I(t)` under `U(C) ∪ C_e`,
/// for the `l2t` component of `R_heap`.
pub fn interpretation_steps(min_steps: usize, seed: u64) -> Tally {
    let mut tally = Tally::default();
    let r = problem("heap");
    let pairs = static_dependency_pairs(&r, SafeMode::Full);
    let graph = dependency_graph(&pairs, &r.defined_symbols(), false);
    let comp = graph
        .recursion_components()
        .into_iter()
        .find(|c| c.iter().all(|id| graph.pair(*id).unwrap().lhs_top().name.as_ref() == "l2t"))
        .expect("l2t component");
    let cps: Vec<_> = pairs.iter().filter(|p| comp.contains(&p.id)).cloned().collect();
    let usable = usable_rules(&r, &cps);
    let mut rules: Vec<Rule> = r.rules.iter().filter(|x| usable.rules.contains(&x.label)).cloned().collect();
    let ce = ce_rules(&r.signature);
    let choices: BTreeSet<FunSym> = ce.iter().map(|x| x.top().clone()).collect();
    rules.extend(ce);
    let mut g = TermGen::new(&r, seed).closed();
    let mut attempts = 0;
    while tally.passed + tally.failed < min_steps {
        attempts += 1;
        assert!(attempts < 200 * min_steps, "too few conclusive instances: {tally}");
        let s = random_term(&mut g, &r, 3);
        if !s.binders.is_empty() {
            continue;
        }
        let Some(t) = random_reduct(&mut g, &s, &r.rules) else { continue };
        let mut oracle = Interpretation::new(&r, &usable.rules, 20_000);
        let (Ok(is), Ok(it)) = (oracle.interpret(&s), oracle.interpret(&t)) else {
            tally.skipped += 1;
            continue;
        };
        if is.size() > MAX_IMAGE {
            tally.skipped += 1;
            continue;
        }
        if is != it && reach(&is, &it, &rules, &choices, 4) {
            tally.passed += 1;
            continue;
        }
        match search(&is, &it, &rules, 12, true, 20_000) {
            None => tally.skipped += 1,
            Some(ok) => tally.check(ok, || format!("I({s}) does not reach I({t})")),
        }
    }
    tally
}

/// `t↓ = t` for normal `t`, and reducts are well-typed of the same type.
pub fn normalization_and_subject_reduction(n: usize, seed: u64) -> Tally {
    let mut tally = Tally::default();
    let systems: Vec<RewriteSystem> = ["ave", "heap", "deriv", "forall", "sum"].iter().map(|s| problem(s)).collect();
    let mut g = TermGen::new(&systems[0], seed);
    for i in 0..n {
        let r = &systems[i % systems.len()];
        g.funs = r.signature.functions.values().cloned().collect();
        g.free = r.signature.variables.values().cloned().collect();
        let t = random_term(&mut g, r, 3);
        let idem = normalize(&embed(&t)).map(|u| u == t).unwrap_or(false);
        let ty = t.ty();
        let bad = step_all(&t, &r.rules).into_iter().find(|u| u.check_well_formed().is_err() || u.ty() != ty);
        tally.check(idem && t.check_well_formed().is_ok() && bad.is_none(), || match &bad {
            Some(u) => format!("{t} → {u} changes the type"),
            None => format!("{t} is not a fixpoint of normalisation"),
        });
    }
    tally
}
