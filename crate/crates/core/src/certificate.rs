//! Proof certificates, their text/JSON rendering, and an independent replayer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::accessibility::{is_pfp, PfpReport};
use crate::filtering::{apply_filtering, ArgumentFiltering, Filter};
use crate::order::{BaseOrder, Precedence, Status, StatusMap};
use crate::prover::ProveOptions;
use crate::rewrite::{RewriteSystem, Rule};
use crate::static_dp::{dependency_graph, static_dependency_pairs, DependencyPair};
use crate::subterm::{explain_subterm_criterion, Projection};
use crate::term::{FunSym, Position};
use crate::usable::{ce_rules, usable_rules, UsableReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Terminating,
    Unknown,
    InputError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub id: usize,
    pub lhs: String,
    pub rhs: String,
    /// Label of the rule the pair comes from.
    pub origin: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub arcs: Vec<(usize, usize)>,
    /// Maximal recursion components of the whole graph.
    pub components: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderRecord {
    /// Generating arcs `f > g`.
    pub precedence: Vec<(String, String)>,
    pub default_status: Status,
    pub status: BTreeMap<String, Status>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    SubtermCriterion {
        /// Symbol to position, positions written `1.2`.
        projection: BTreeMap<String, String>,
    },
    ReductionPair {
        filtering: BTreeMap<String, Filter>,
        order: OrderRecord,
        /// `None` when all rules are used as weak constraints.
        usable: Option<UsableReport>,
        strict: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub round: usize,
    pub component: Vec<usize>,
    pub witness: Witness,
    pub removed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofCertificate {
    pub verdict: Verdict,
    pub options: ProveOptions,
    pub pfp: Option<PfpReport>,
    pub pairs: Vec<PairRecord>,
    pub graph: GraphRecord,
    pub steps: Vec<Step>,
    /// Components left undischarged.
    pub open: Vec<Vec<usize>>,
    pub diagnostics: Vec<String>,
}

impl ProofCertificate {
    pub fn new(options: ProveOptions) -> Self {
        ProofCertificate {
            verdict: Verdict::Unknown,
            options,
            pfp: None,
            pairs: Vec::new(),
            graph: GraphRecord::default(),
            steps: Vec::new(),
            open: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn input_error(message: String) -> Self {
        let mut c = ProofCertificate::new(ProveOptions::default());
        c.verdict = Verdict::InputError;
        c.diagnostics.push(message);
        c
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = match self.verdict {
            Verdict::Terminating => "TERMINATING",
            Verdict::Unknown => "UNKNOWN",
            Verdict::InputError => "INPUT ERROR",
        };
        writeln!(out, "{verdict}").unwrap();
        if let Some(p) = &self.pfp {
            writeln!(out, "{p}").unwrap();
        }
        if !self.pairs.is_empty() {
            writeln!(out, "static dependency pairs:").unwrap();
            for p in &self.pairs {
                writeln!(out, "  ({}) {} -> {}    [{}]", p.id, p.lhs, p.rhs, p.origin).unwrap();
            }
            writeln!(out, "recursion components: {}", ids(&self.graph.components)).unwrap();
        }
        for s in &self.steps {
            let comp = id_list(&s.component);
            match &s.witness {
                Witness::SubtermCriterion { projection } => {
                    writeln!(out, "round {}, component {comp}: subterm criterion", s.round).unwrap();
                    for (f, p) in projection {
                        writeln!(out, "  nu({f}) = {p}").unwrap();
                    }
                }
                Witness::ReductionPair { filtering, order, usable, .. } => {
                    writeln!(out, "round {}, component {comp}: reduction pair", s.round).unwrap();
                    if filtering.is_empty() {
                        writeln!(out, "  filtering: identity").unwrap();
                    }
                    for (f, v) in filtering {
                        writeln!(out, "  {f} = {v}").unwrap();
                    }
                    for (f, g) in &order.precedence {
                        writeln!(out, "  {f} > {g}").unwrap();
                    }
                    writeln!(out, "  status default = {}", status_name(order.default_status)).unwrap();
                    for (f, st) in &order.status {
                        writeln!(out, "  status {f} = {}", status_name(*st)).unwrap();
                    }
                    match usable {
                        Some(u) => {
                            write!(out, "  usable rules of {comp}: {}", u.rules.join(", ")).unwrap();
                            match &u.reason {
                                Some(r) => writeln!(out, " (all rules: {r})").unwrap(),
                                None => writeln!(out, " (pattern condition holds)").unwrap(),
                            }
                        }
                        None => writeln!(out, "  usable rules: not used").unwrap(),
                    }
                }
            }
            writeln!(out, "  removed {}", id_list(&s.removed)).unwrap();
        }
        if !self.open.is_empty() {
            writeln!(out, "open components: {}", ids(&self.open)).unwrap();
        }
        for d in &self.diagnostics {
            writeln!(out, "note: {d}").unwrap();
        }
        out
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Lex => "lex",
        Status::Mul => "mul",
    }
}

fn id_list(xs: &[usize]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn ids(xss: &[Vec<usize>]) -> String {
    let parts: Vec<String> = xss.iter().map(|x| id_list(x)).collect();
    parts.join(" ")
}

pub fn pair_records(pairs: &[DependencyPair]) -> Vec<PairRecord> {
    pairs
        .iter()
        .map(|p| PairRecord { id: p.id, lhs: p.lhs.to_string(), rhs: p.rhs.to_string(), origin: p.origin.clone() })
        .collect()
}

pub fn projection_record(pi: &Projection) -> BTreeMap<String, String> {
    pi.iter().map(|(f, p)| (f.id(), p.to_string())).collect()
}

/// The filtering on every symbol with arguments in the constraints, default
/// entries included, so the record is total on what it orients.
pub fn filtering_record(pi: &ArgumentFiltering, pairs: &[DependencyPair], rules: &[&Rule]) -> BTreeMap<String, Filter> {
    Symbols::of(pairs, rules)
        .0
        .into_iter()
        .filter(|(_, f)| f.ty.arity() > 0)
        .map(|(id, f)| (id, pi.get(&f)))
        .collect()
}

pub fn order_record(o: &BaseOrder) -> OrderRecord {
    OrderRecord {
        precedence: o.precedence.arcs().map(|(f, g)| (f.id(), g.id())).collect(),
        default_status: o.status.default,
        status: o.status.overrides.iter().map(|(f, s)| (f.id(), *s)).collect(),
    }
}

/// DOT rendering of the dependency graph of a system.
pub fn emit_graph(r: &RewriteSystem, opts: &ProveOptions) -> String {
    let pairs = static_dependency_pairs(r, opts.safe_mode());
    dependency_graph(&pairs, &r.defined_symbols(), opts.refine_graph).to_dot()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("the system is not accepted: {0}")]
    Input(String),
    #[error("the stored dependency pairs differ from the recomputed ones")]
    Pairs,
    #[error("the stored graph differs from the recomputed one")]
    Graph,
    #[error("step {0}: component {1:?} is not a current recursion component")]
    NoSuchComponent(usize, Vec<usize>),
    #[error("step {0}: {1}")]
    Witness(usize, String),
    #[error("component {0:?} is neither discharged nor declared open")]
    Undischarged(Vec<usize>),
    #[error("the verdict does not match the trace")]
    Verdict,
    #[error("steps left over after the trace ended")]
    LeftoverSteps,
}

fn position(s: &str) -> Result<Position, String> {
    if s == "ε" {
        return Ok(Position::root());
    }
    s.split('.')
        .map(|p| p.parse::<usize>().map_err(|_| format!("bad position {s}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Position)
}

struct Symbols(BTreeMap<String, FunSym>);

impl Symbols {
    fn of(pairs: &[DependencyPair], rules: &[&Rule]) -> Self {
        let mut m = BTreeMap::new();
        for t in pairs.iter().flat_map(|p| [&p.lhs, &p.rhs]).chain(rules.iter().flat_map(|r| [&r.lhs, &r.rhs])) {
            for f in t.fun_symbols() {
                m.insert(f.id(), f);
            }
        }
        Symbols(m)
    }

    fn get(&self, id: &str) -> Result<&FunSym, String> {
        self.0.get(id).ok_or_else(|| format!("unknown symbol {id}"))
    }
}

fn check_subterm(
    comp: &[DependencyPair],
    projection: &BTreeMap<String, String>,
    defined: &BTreeSet<crate::term::FunSym>,
) -> Result<Vec<usize>, String> {
    let syms = Symbols::of(comp, &[]);
    let mut pi = Projection::new();
    for (f, p) in projection {
        pi.insert(syms.get(f)?.clone(), position(p)?);
    }
    explain_subterm_criterion(comp, &pi, defined)
}

fn check_reduction_pair(
    r: &RewriteSystem,
    opts: &ProveOptions,
    comp: &[DependencyPair],
    filtering: &BTreeMap<String, Filter>,
    order: &OrderRecord,
    usable: &Option<UsableReport>,
    strict: &[usize],
) -> Result<(), String> {
    let ce = ce_rules(&r.signature);
    let weak: Vec<&Rule> = if opts.use_usable {
        let u = usable_rules(r, comp);
        if usable.as_ref() != Some(&u) {
            return Err("stored usable rules differ from the recomputed ones".into());
        }
        r.rules.iter().filter(|x| u.rules.contains(&x.label)).chain(ce.iter()).collect()
    } else {
        if usable.is_some() {
            return Err("usable rules stored although they are disabled".into());
        }
        r.rules.iter().collect()
    };
    let syms = Symbols::of(comp, &weak);
    let domain: Vec<&String> = syms.0.iter().filter(|(_, f)| f.ty.arity() > 0).map(|(id, _)| id).collect();
    if !filtering.keys().eq(domain.iter().copied()) {
        return Err("the filtering is not given for exactly the symbols with arguments".into());
    }
    let mut pi = ArgumentFiltering::identity();
    for (f, v) in filtering {
        pi.set(syms.get(f)?, v.clone()).map_err(|e| e.to_string())?;
    }
    let mut arcs = Vec::new();
    for (f, g) in &order.precedence {
        arcs.push((syms.get(f)?.clone(), syms.get(g)?.clone()));
    }
    let precedence = Precedence::from_arcs(arcs).ok_or("precedence is cyclic")?;
    let mut status = StatusMap::uniform(order.default_status);
    for (f, s) in &order.status {
        status.overrides.insert(syms.get(f)?.clone(), *s);
    }
    let base = BaseOrder { precedence, status };
    if strict.is_empty() {
        return Err("no pair is oriented strictly".into());
    }
    for p in comp {
        let (l, rr) = (apply_filtering(&pi, &p.lhs), apply_filtering(&pi, &p.rhs));
        let ok = if strict.contains(&p.id) { base.greater(&l, &rr) } else { base.greater_or_equal(&l, &rr) };
        if !ok {
            return Err(format!("pair {} is not oriented", p.id));
        }
    }
    if let Some(s) = strict.iter().find(|s| !comp.iter().any(|p| p.id == **s)) {
        return Err(format!("pair {s} is not in the component"));
    }
    for rule in weak {
        let (l, rr) = (apply_filtering(&pi, &rule.lhs), apply_filtering(&pi, &rule.rhs));
        if !base.greater_or_equal(&l, &rr) {
            return Err(format!("rule {} is not oriented", rule.label));
        }
    }
    Ok(())
}

/// Re-derives pairs and graph, then checks every step of the trace.
pub fn replay(r: &RewriteSystem, c: &ProofCertificate) -> Result<(), ReplayError> {
    let opts = &c.options;
    for rule in &r.rules {
        rule.check_pattern().map_err(|e| ReplayError::Input(e.to_string()))?;
    }
    let pfp = is_pfp(r, opts.legacy_safe);
    if !pfp.pfp {
        return Err(ReplayError::Input(pfp.to_string()));
    }
    let pairs = static_dependency_pairs(r, opts.safe_mode());
    if pair_records(&pairs) != c.pairs {
        return Err(ReplayError::Pairs);
    }
    let defined = r.defined_symbols();
    let graph = dependency_graph(&pairs, &defined, opts.refine_graph);
    if graph.arcs.iter().copied().collect::<Vec<_>>() != c.graph.arcs
        || graph.recursion_components() != c.graph.components
    {
        return Err(ReplayError::Graph);
    }
    let mut pending: BTreeSet<usize> = pairs.iter().map(|p| p.id).collect();
    let mut steps = c.steps.iter().enumerate().peekable();
    let mut open = BTreeSet::new();
    let mut round = 0;
    loop {
        round += 1;
        let comps = graph.components_within(&pending);
        if comps.is_empty() {
            break;
        }
        for comp in comps {
            let step = match steps.peek() {
                Some((_, s)) if s.round == round && s.component == comp => steps.next(),
                _ => None,
            };
            let Some((i, step)) = step else {
                if !c.open.contains(&comp) {
                    return Err(ReplayError::Undischarged(comp));
                }
                open.insert(comp.clone());
                comp.iter().for_each(|id| {
                    pending.remove(id);
                });
                continue;
            };
            let cps: Vec<DependencyPair> = pairs.iter().filter(|p| comp.contains(&p.id)).cloned().collect();
            let strict = match &step.witness {
                Witness::SubtermCriterion { projection } => {
                    check_subterm(&cps, projection, &defined).map_err(|e| ReplayError::Witness(i, e))?
                }
                Witness::ReductionPair { filtering, order, usable, strict } => {
                    check_reduction_pair(r, opts, &cps, filtering, order, usable, strict)
                        .map_err(|e| ReplayError::Witness(i, e))?;
                    strict.clone()
                }
            };
            if strict != step.removed {
                return Err(ReplayError::Witness(i, "removed pairs differ from the strictly oriented ones".into()));
            }
            for id in &step.removed {
                pending.remove(id);
            }
        }
        if let Some((i, s)) = steps.peek() {
            if s.round == round {
                return Err(ReplayError::NoSuchComponent(*i, s.component.clone()));
            }
        }
    }
    if steps.peek().is_some() {
        return Err(ReplayError::LeftoverSteps);
    }
    let expected = if open.is_empty() { Verdict::Terminating } else { Verdict::Unknown };
    if c.verdict != expected {
        return Err(ReplayError::Verdict);
    }
    Ok(())
}

/// True iff the trace checks and ends with every component discharged.
pub fn replay_certificate(r: &RewriteSystem, c: &ProofCertificate) -> bool {
    c.verdict == Verdict::Terminating && replay(r, c).is_ok()
}
