//! Shared test helpers: problem loading, a seeded random term generator and
//! an interpretation oracle for usable-rule soundness.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub mod suites;

use hrs_sdp::parse::parse_problem;
use hrs_sdp::rewrite::{rewrite_root, step_all, RewriteSystem, Rule};
use hrs_sdp::subst::{rename, Substitution};
use hrs_sdp::term::{FunSym, Head, Term, Var};
use hrs_sdp::types::SimpleType;
use hrs_sdp::usable::{bottom, choice};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn problem_source(name: &str) -> String {
    let path = format!("{}/problems/{name}.hrs", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn problem(name: &str) -> RewriteSystem {
    parse_problem(&problem_source(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub const CORPUS: &[&str] = &["foldl", "sum", "len", "ave", "heap", "deriv", "forall", "loop_c", "loop_f"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random η-long β-normal terms over a set of symbols and free variables.
pub struct TermGen {
    pub funs: Vec<FunSym>,
    pub free: Vec<Var>,
    pub rng: ChaCha8Rng,
}

impl TermGen {
    pub fn new(r: &RewriteSystem, seed: u64) -> Self {
        TermGen {
            funs: r.signature.functions.values().cloned().collect(),
            free: r.signature.variables.values().cloned().collect(),
            rng: rng(seed),
        }
    }

    pub fn closed(mut self) -> Self {
        self.free.clear();
        self
    }

    pub fn term(&mut self, ty: &SimpleType, depth: usize) -> Term {
        self.term_in(ty, depth, &mut Vec::new())
    }

    fn term_in(&mut self, ty: &SimpleType, depth: usize, ctx: &mut Vec<Var>) -> Term {
        let (args, res) = ty.decompose();
        let binders: Vec<Var> = args.iter().enumerate().map(|(i, a)| Var::fresh(&format!("x{i}"), (*a).clone())).collect();
        let n = ctx.len();
        ctx.extend(binders.iter().cloned());
        let body = self.atom(res, depth, ctx);
        ctx.truncate(n);
        Term::new(binders, body.head, body.args)
    }

    fn atom(&mut self, ty: &SimpleType, depth: usize, ctx: &mut Vec<Var>) -> Term {
        let mut heads: Vec<Head> = Vec::new();
        heads.extend(self.funs.iter().filter(|f| f.ty.result() == ty).cloned().map(Head::Fun));
        heads.extend(self.free.iter().chain(ctx.iter()).filter(|v| v.ty.result() == ty).cloned().map(Head::Var));
        if depth == 0 {
            heads.retain(|h| h.ty().arity() == 0);
        }
        if heads.is_empty() {
            // A placeholder variable keeps uninhabited or leafless types finite.
            heads.push(Head::Var(Var::named(&format!("k_{ty}"), ty.clone())));
        }
        let head = heads.choose(&mut self.rng).unwrap().clone();
        let arg_tys: Vec<SimpleType> = head.ty().decompose().0.into_iter().cloned().collect();
        let args = arg_tys.iter().map(|t| self.term_in(t, depth.saturating_sub(1), ctx)).collect();
        Term::app(head, args)
    }

    /// A substitution on a random subset of `vars`, images of depth at most
    /// `depth` over closed terms.
    pub fn substitution(&mut self, vars: &BTreeSet<Var>, depth: usize) -> Substitution {
        let saved = std::mem::take(&mut self.free);
        let mut theta = Substitution::new();
        for v in vars {
            if self.rng.gen_bool(0.7) {
                let t = self.term(&v.ty, depth);
                theta.insert(v.clone(), t).expect("types agree");
            }
        }
        self.free = saved;
        theta
    }

    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> Option<&'a T> {
        xs.choose(&mut self.rng)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

/// Key of `t` with free variables outside `globals` renamed by order of first
/// occurrence, so terms below differently named binders can be compared.
pub fn loose_key(t: &Term, globals: &BTreeSet<Var>) -> String {
    let mut order: Vec<Var> = Vec::new();
    let fv = t.free_vars();
    t.visit(&mut |s| {
        if let Head::Var(v) = &s.head {
            if fv.contains(v) && !globals.contains(v) && !order.contains(v) {
                order.push(v.clone());
            }
        }
    });
    let map: HashMap<Var, Var> = order
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), Var::named(&format!("_loose{i}"), v.ty.clone())))
        .collect();
    rename(t, &map).key()
}

/// Breadth-first search for `t` from `s`, in one or more steps when `plus`
/// is set. `None` when the frontier outgrows `max_states`.
pub fn search(s: &Term, t: &Term, rules: &[Rule], depth: usize, plus: bool, max_states: usize) -> Option<bool> {
    if !plus && s == t {
        return Some(true);
    }
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut frontier = vec![s.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for u in &frontier {
            for v in step_all(u, rules) {
                if &v == t {
                    return Some(true);
                }
                if seen.insert(v.key()) {
                    next.push(v);
                }
            }
        }
        if seen.len() > max_states {
            return None;
        }
        frontier = next;
    }
    Some(false)
}

/// Goal-directed check of `u →* v`: argumentwise when heads agree, through
/// either argument of a choice symbol, or after at most `depth` root steps.
/// Sound but incomplete; callers fall back to [`search`].
pub fn reach(u: &Term, v: &Term, rules: &[Rule], choices: &BTreeSet<FunSym>, depth: usize) -> bool {
    Reach { rules, choices, memo: HashMap::new() }.go(u, v, depth)
}

struct Reach<'a> {
    rules: &'a [Rule],
    choices: &'a BTreeSet<FunSym>,
    memo: HashMap<(String, String, usize), bool>,
}

impl Reach<'_> {
    fn go(&mut self, u: &Term, v: &Term, depth: usize) -> bool {
        if u == v {
            return true;
        }
        let key = (u.key(), v.key(), depth);
        if let Some(&b) = self.memo.get(&key) {
            return b;
        }
        self.memo.insert(key.clone(), false);
        let b = self.step(u, v, depth);
        self.memo.insert(key, b);
        b
    }

    fn step(&mut self, u: &Term, v: &Term, depth: usize) -> bool {
        if u.binders.len() == v.binders.len() && u.binders.iter().zip(&v.binders).all(|(x, y)| x.ty == y.ty) {
            let map: HashMap<Var, Var> = v.binders.iter().cloned().zip(u.binders.iter().cloned()).collect();
            let (ub, vb) = (u.body(), rename(&v.body(), &map));
            if !u.binders.is_empty() {
                return self.go(&ub, &vb, depth);
            }
            if ub.head == vb.head
                && ub.args.len() == vb.args.len()
                && ub.args.iter().zip(&vb.args).all(|(a, b)| self.go(a, b, depth))
            {
                return true;
            }
        }
        if !u.binders.is_empty() {
            return false;
        }
        if let Head::Fun(c) = &u.head {
            if self.choices.contains(c) && u.args.iter().any(|a| self.go(a, v, depth)) {
                return true;
            }
        }
        depth > 0
            && self
                .rules
                .iter()
                .filter_map(|rule| rewrite_root(u, rule))
                .collect::<Vec<_>>()
                .iter()
                .any(|w| self.go(w, v, depth - 1))
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct Inconclusive;

/// The interpretation `I` relative to a set of usable rule labels. `Δ` is
/// the set of root symbols of the other rules; `Red` collects the images of
/// all one-step reducts.
pub struct Interpretation<'a> {
    r: &'a RewriteSystem,
    delta: BTreeSet<FunSym>,
    reduct_rules: Vec<Rule>,
    budget: usize,
    memo: HashMap<String, Term>,
}

impl<'a> Interpretation<'a> {
    pub fn new(r: &'a RewriteSystem, usable: &[String], budget: usize) -> Self {
        let mut i = Self::restricted(r, usable, budget);
        i.reduct_rules = r.rules.clone();
        i
    }

    /// Variant whose `Red` only follows the non-usable rules.
    pub fn restricted(r: &'a RewriteSystem, usable: &[String], budget: usize) -> Self {
        let others: Vec<Rule> = r.rules.iter().filter(|x| !usable.contains(&x.label)).cloned().collect();
        let delta = others.iter().map(|x| x.top().clone()).collect();
        Interpretation { r, delta, reduct_rules: others, budget, memo: HashMap::new() }
    }

    pub fn delta(&self) -> &BTreeSet<FunSym> {
        &self.delta
    }

    /// `Red_α(T)`: `T` nested with `c_α` in ascending term order, `⊥_α` last.
    pub fn red(&self, alpha: &SimpleType, mut ts: Vec<Term>) -> Term {
        ts.sort();
        ts.dedup();
        let c = choice(&self.r.signature, alpha);
        let mut acc = Term::constant(&bottom(&self.r.signature, alpha));
        for u in ts.into_iter().rev() {
            acc = Term::fun(&c, vec![u, acc]);
        }
        acc
    }

    pub fn interpret(&mut self, t: &Term) -> Result<Term, Inconclusive> {
        let key = t.key();
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        if self.budget == 0 {
            return Err(Inconclusive);
        }
        self.budget -= 1;
        let args = t.args.iter().map(|a| self.interpret(a)).collect::<Result<Vec<_>, _>>()?;
        let inner = Term::app(t.head.clone(), args);
        let body = match &t.head {
            Head::Fun(f) if self.delta.contains(f) => {
                let alpha = t.body().ty();
                let reducts = step_all(&t.body(), &self.reduct_rules);
                let images = reducts.iter().map(|u| self.interpret(u)).collect::<Result<Vec<_>, _>>()?;
                let c = choice(&self.r.signature, &alpha);
                Term::fun(&c, vec![inner, self.red(&alpha, images)])
            }
            _ => inner,
        };
        let out = Term::new(t.binders.clone(), body.head, body.args);
        self.memo.insert(key, out.clone());
        Ok(out)
    }
}

/// Strongly connected components by transitive closure, for cross-checking.
pub fn naive_components(nodes: &[usize], arcs: &BTreeSet<(usize, usize)>) -> Vec<Vec<usize>> {
    let mut reach: BTreeMap<usize, BTreeSet<usize>> = nodes.iter().map(|&n| (n, BTreeSet::new())).collect();
    for &(a, b) in arcs {
        reach.get_mut(&a).unwrap().insert(b);
    }
    loop {
        let mut changed = false;
        for &n in nodes {
            let succ: Vec<usize> = reach[&n].iter().copied().collect();
            for m in succ {
                let more: Vec<usize> = reach[&m].iter().copied().collect();
                let entry = reach.get_mut(&n).unwrap();
                for k in more {
                    changed |= entry.insert(k);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &n in nodes {
        if !reach[&n].contains(&n) || out.iter().any(|c| c.contains(&n)) {
            continue;
        }
        let c: Vec<usize> = nodes.iter().copied().filter(|&m| m == n || (reach[&n].contains(&m) && reach[&m].contains(&n))).collect();
        out.push(c);
    }
    out.sort();
    out
}
