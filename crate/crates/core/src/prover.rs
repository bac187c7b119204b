//! Proof search: PFP check, static dependency pairs, and the
//! iterate-and-remove loop over recursion components.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::accessibility::{is_pfp, SafeMode};
use crate::certificate::{
    filtering_record, order_record, pair_records, projection_record, GraphRecord, ProofCertificate,
    Step, Verdict, Witness,
};
use crate::filtering::{apply_filtering, enumerate_filterings, guided_filterings, ArgumentFiltering};
use crate::order::{find_base_order, BaseOrder};
use crate::par;
use crate::rewrite::{RewriteSystem, Rule};
use crate::static_dp::{dependency_graph, static_dependency_pairs, DependencyGraph, DependencyPair};
use crate::subterm::{explain_subterm_criterion, find_projection};
use crate::term::{FunSym, Head, Term};
use crate::usable::{ce_rules, usable_rules, UsableReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Subterm,
    Redpair,
    All,
}

impl Technique {
    fn subterm(self) -> bool {
        matches!(self, Technique::Subterm | Technique::All)
    }

    fn redpair(self) -> bool {
        matches!(self, Technique::Redpair | Technique::All)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProveOptions {
    pub legacy_safe: bool,
    pub use_usable: bool,
    pub technique: Technique,
    pub timeout_secs: u64,
    pub max_proj_len: usize,
    pub filter_budget: usize,
    pub refine_graph: bool,
    /// Runtime switch; has no effect without the `parallel` feature and never
    /// changes the certificate.
    #[serde(skip, default = "par::parallel_available")]
    pub parallel: bool,
}

impl Default for ProveOptions {
    fn default() -> Self {
        ProveOptions {
            legacy_safe: false,
            use_usable: true,
            technique: Technique::All,
            timeout_secs: 60,
            max_proj_len: 3,
            filter_budget: 10_000,
            refine_graph: false,
            parallel: par::parallel_available(),
        }
    }
}

impl ProveOptions {
    pub fn safe_mode(&self) -> SafeMode {
        if self.legacy_safe {
            SafeMode::Legacy
        } else {
            SafeMode::Full
        }
    }
}

struct Ctx<'a> {
    r: &'a RewriteSystem,
    opts: &'a ProveOptions,
    defined: BTreeSet<FunSym>,
    ce: Vec<Rule>,
    deadline: Instant,
}

impl Ctx<'_> {
    fn expired(&self) -> bool {
        Instant::now() >= self.deadline
    }
}

/// Constraint set of one reduction-pair attempt.
pub(crate) struct Constraints<'a> {
    pub pairs: Vec<&'a DependencyPair>,
    pub rules: Vec<&'a Rule>,
}

/// Weak rules for a component: `U(C) ∪ C_e`, or all of `R`.
pub(crate) fn weak_rules<'a>(
    r: &'a RewriteSystem,
    ce: &'a [Rule],
    pairs: &[DependencyPair],
    use_usable: bool,
) -> (Vec<&'a Rule>, Option<UsableReport>) {
    if !use_usable {
        return (r.rules.iter().collect(), None);
    }
    let u = usable_rules(r, pairs);
    let mut rules: Vec<&Rule> = r.rules.iter().filter(|x| u.rules.contains(&x.label)).collect();
    rules.extend(ce.iter());
    (rules, Some(u))
}

/// Why `l ≥ r` cannot hold in the base order whatever the precedence.
pub fn obviously_unorientable(l: &Term, r: &Term) -> Option<String> {
    let lfv = l.free_vars();
    if let Some(x) = r.free_vars().iter().find(|x| !lfv.contains(*x)) {
        return Some(format!("{} does not occur in {l}", x.name));
    }
    let rfv = r.free_vars();
    let mut bad = None;
    r.visit(&mut |t| {
        if bad.is_some() {
            return;
        }
        if let Head::Var(x) = &t.head {
            let b = t.body();
            if rfv.contains(x)
                && !t.args.is_empty()
                && b.free_vars().is_subset(&rfv)
                && !l.has_subterm(&b)
            {
                bad = Some(format!("{b} is not a subterm of {l}"));
            }
        }
    });
    bad
}

fn symbols_of(c: &Constraints) -> BTreeSet<FunSym> {
    let mut out = BTreeSet::new();
    for p in &c.pairs {
        out.extend(p.lhs.fun_symbols());
        out.extend(p.rhs.fun_symbols());
    }
    for r in &c.rules {
        out.extend(r.lhs.fun_symbols());
        out.extend(r.rhs.fun_symbols());
    }
    out
}

/// Candidate filterings: identity, guided ones, then the enumeration.
pub(crate) fn filtering_candidates(c: &Constraints, pairs: &[DependencyPair], budget: usize) -> Vec<ArgumentFiltering> {
    let mut out = vec![ArgumentFiltering::identity()];
    let mut seen: BTreeSet<ArgumentFiltering> = out.iter().cloned().collect();
    for pi in guided_filterings(pairs).into_iter().chain(enumerate_filterings(&symbols_of(c), budget)) {
        if out.len() >= budget.max(1) {
            break;
        }
        if seen.insert(pi.clone()) {
            out.push(pi);
        }
    }
    out
}

pub(crate) struct RedPairFound {
    pub filtering: ArgumentFiltering,
    pub order: BaseOrder,
    pub strict: Vec<usize>,
}

fn filtered(pi: &ArgumentFiltering, l: &Term, r: &Term) -> (Term, Term) {
    (apply_filtering(pi, l), apply_filtering(pi, r))
}

/// Tries one filtering: all pairs strict, then each pair strict alone.
pub(crate) fn try_filtering(pi: &ArgumentFiltering, c: &Constraints) -> Option<RedPairFound> {
    let mut weak = Vec::new();
    for r in &c.rules {
        let (l, rr) = filtered(pi, &r.lhs, &r.rhs);
        if l != rr && obviously_unorientable(&l, &rr).is_some() {
            return None;
        }
        weak.push((l, rr));
    }
    let pairs: Vec<(usize, (Term, Term))> =
        c.pairs.iter().map(|p| (p.id, filtered(pi, &p.lhs, &p.rhs))).collect();
    if pairs.iter().any(|(_, (l, r))| l != r && obviously_unorientable(l, r).is_some()) {
        return None;
    }
    let all: Vec<(Term, Term)> = pairs.iter().map(|(_, lr)| lr.clone()).collect();
    if let Some(order) = find_base_order(&all, &weak) {
        return Some(RedPairFound {
            filtering: pi.clone(),
            order,
            strict: pairs.iter().map(|(id, _)| *id).collect(),
        });
    }
    if pairs.len() == 1 {
        return None;
    }
    for (i, (id, lr)) in pairs.iter().enumerate() {
        if lr.0 == lr.1 {
            continue;
        }
        let mut w = weak.clone();
        w.extend(pairs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, (_, x))| x.clone()));
        if let Some(order) = find_base_order(std::slice::from_ref(lr), &w) {
            return Some(RedPairFound { filtering: pi.clone(), order, strict: vec![*id] });
        }
    }
    None
}

enum Outcome {
    Proved(Step),
    Failed(Vec<String>),
    TimedOut,
}

fn attempt(ctx: &Ctx, comp: &[usize], pairs: &[DependencyPair], round: usize) -> Outcome {
    let cps: Vec<DependencyPair> = pairs.iter().filter(|p| comp.contains(&p.id)).cloned().collect();
    let mut notes = Vec::new();
    if ctx.opts.technique.subterm() {
        if let Some(pi) = find_projection(&cps, ctx.opts.max_proj_len, &ctx.defined) {
            let strict = explain_subterm_criterion(&cps, &pi, &ctx.defined).expect("found projection checks");
            return Outcome::Proved(Step {
                round,
                component: comp.to_vec(),
                witness: Witness::SubtermCriterion { projection: projection_record(&pi) },
                removed: strict,
            });
        }
        notes.push(format!("component {comp:?}: no projection of length at most {}", ctx.opts.max_proj_len));
    }
    if !ctx.opts.technique.redpair() {
        return Outcome::Failed(notes);
    }
    if ctx.expired() {
        return Outcome::TimedOut;
    }
    let (rules, usable) = weak_rules(ctx.r, &ctx.ce, &cps, ctx.opts.use_usable);
    let c = Constraints { pairs: cps.iter().collect(), rules };
    let candidates = filtering_candidates(&c, &cps, ctx.opts.filter_budget);
    let found = par::find_first(&candidates, ctx.opts.parallel, |pi| {
        if ctx.expired() {
            return None;
        }
        try_filtering(pi, &c)
    });
    match found {
        Some(f) => Outcome::Proved(Step {
            round,
            component: comp.to_vec(),
            witness: Witness::ReductionPair {
                filtering: filtering_record(&f.filtering, &cps, &c.rules),
                order: order_record(&f.order),
                usable,
                strict: f.strict.clone(),
            },
            removed: f.strict,
        }),
        None if ctx.expired() => Outcome::TimedOut,
        None => {
            notes.push(format!(
                "component {comp:?}: no reduction pair among {} filterings",
                candidates.len()
            ));
            notes.extend(explain_redpair_failure(&c, &candidates, comp));
            Outcome::Failed(notes)
        }
    }
}

/// Names the weak rules that block orientation, under the filtering that
/// orients the pairs alone with the fewest blocked rules.
fn explain_redpair_failure(c: &Constraints, candidates: &[ArgumentFiltering], comp: &[usize]) -> Vec<String> {
    let pairs_only = Constraints { pairs: c.pairs.clone(), rules: Vec::new() };
    let blocked = |pi: &ArgumentFiltering| -> Vec<String> {
        let mut out = Vec::new();
        for r in &c.rules {
            let (l, rr) = filtered(pi, &r.lhs, &r.rhs);
            if l == rr {
                continue;
            }
            if let Some(why) = obviously_unorientable(&l, &rr) {
                out.push(format!(
                    "component {comp:?}: under filtering {pi} rule {} ({l} -> {rr}) cannot be oriented: {why}",
                    r.label
                ));
            }
        }
        out
    };
    let best = candidates
        .iter()
        .filter(|pi| try_filtering(pi, &pairs_only).is_some())
        .map(|pi| (blocked(pi), pi))
        .min_by_key(|(b, _)| b.len());
    match best {
        None => vec![format!("component {comp:?}: no filtering orients the pairs")],
        Some((b, pi)) if b.is_empty() => vec![format!(
            "component {comp:?}: under filtering {pi} the rules cannot be oriented together with the pairs"
        )],
        Some((b, _)) => b,
    }
}

/// Full proof attempt; never panics on well-formed systems.
pub fn prove(r: &RewriteSystem, opts: &ProveOptions) -> ProofCertificate {
    let start = Instant::now();
    let ctx = Ctx {
        r,
        opts,
        defined: r.defined_symbols(),
        ce: ce_rules(&r.signature),
        deadline: start + Duration::from_secs(opts.timeout_secs),
    };
    let mut cert = ProofCertificate::new(opts.clone());
    for rule in &r.rules {
        if let Err(e) = rule.check_pattern() {
            cert.verdict = Verdict::Unknown;
            cert.diagnostics.push(e.to_string());
        }
    }
    cert.pfp = Some(is_pfp(r, opts.legacy_safe));
    if !cert.diagnostics.is_empty() {
        return cert;
    }
    if !cert.pfp.as_ref().is_some_and(|p| p.pfp) {
        cert.verdict = Verdict::Unknown;
        return cert;
    }
    let pairs = static_dependency_pairs(r, opts.safe_mode());
    let graph = dependency_graph(&pairs, &ctx.defined, opts.refine_graph);
    cert.pairs = pair_records(&pairs);
    cert.graph = GraphRecord {
        arcs: graph.arcs.iter().copied().collect(),
        components: graph.recursion_components(),
    };
    let mut pending: BTreeSet<usize> = pairs.iter().map(|p| p.id).collect();
    let mut round = 0;
    loop {
        round += 1;
        let comps = graph.components_within(&pending);
        if comps.is_empty() {
            break;
        }
        if ctx.expired() {
            cert.diagnostics.push(format!("timeout after {} s", opts.timeout_secs));
            cert.open.extend(comps);
            break;
        }
        let outcomes = par::map_ordered(&comps, opts.parallel, |comp| attempt(&ctx, comp, &pairs, round));
        for (comp, outcome) in comps.iter().zip(outcomes) {
            match outcome {
                Outcome::Proved(step) => {
                    for id in &step.removed {
                        pending.remove(id);
                    }
                    cert.steps.push(step);
                }
                Outcome::Failed(notes) => {
                    cert.diagnostics.extend(notes);
                    cert.open.extend(open_parts(&ctx, &graph, comp, &pairs, round));
                    for id in comp {
                        pending.remove(id);
                    }
                }
                Outcome::TimedOut => {
                    cert.diagnostics.push(format!("component {comp:?}: timeout"));
                    cert.open.push(comp.clone());
                    for id in comp {
                        pending.remove(id);
                    }
                }
            }
        }
    }
    cert.open.sort();
    cert.verdict = if cert.open.is_empty() { Verdict::Terminating } else { Verdict::Unknown };
    cert
}

/// Self-loop singletons of a failed component that cannot be discharged on
/// their own; the whole component when every singleton can.
fn open_parts(
    ctx: &Ctx,
    graph: &DependencyGraph,
    comp: &[usize],
    pairs: &[DependencyPair],
    round: usize,
) -> Vec<Vec<usize>> {
    let loops: Vec<usize> = comp.iter().copied().filter(|id| graph.arcs.contains(&(*id, *id))).collect();
    let open: Vec<Vec<usize>> = loops
        .iter()
        .filter(|id| !matches!(attempt(ctx, &[**id], pairs, round), Outcome::Proved(_)))
        .map(|id| vec![*id])
        .collect();
    if open.is_empty() || comp.len() == 1 {
        vec![comp.to_vec()]
    } else {
        let mut all = open;
        all.push(comp.to_vec());
        all
    }
}

/// Usable rules of each component, keyed by component.
pub fn component_usable_rules(r: &RewriteSystem, opts: &ProveOptions) -> BTreeMap<Vec<usize>, UsableReport> {
    let pairs = static_dependency_pairs(r, opts.safe_mode());
    let graph = dependency_graph(&pairs, &r.defined_symbols(), opts.refine_graph);
    graph
        .recursion_components()
        .into_iter()
        .map(|c| {
            let cps: Vec<DependencyPair> = pairs.iter().filter(|p| c.contains(&p.id)).cloned().collect();
            (c, usable_rules(r, &cps))
        })
        .collect()
}
