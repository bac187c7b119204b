//! Static dependency pairs and the static dependency graph.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::accessibility::{normal, safe_subterms_with, SafeMode};
use crate::rewrite::RewriteSystem;
use crate::term::{FunSym, Head, Term};

/// `t♯`: marks the head of `f(t̄)` when `f ∈ defined`.
pub fn mark(t: &Term, defined: &BTreeSet<FunSym>) -> Term {
    match &t.head {
        Head::Fun(f) if t.binders.is_empty() && defined.contains(f) => {
            Term::new(Vec::new(), Head::Fun(f.marked()), t.args.clone())
        }
        _ => t.clone(),
    }
}

/// `Cand(t)`, with the binders of each node re-wrapped onto its arguments.
pub fn candidates(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    cand(t, &mut seen, &mut out);
    out
}

fn cand(t: &Term, seen: &mut HashSet<String>, out: &mut Vec<Term>) {
    if seen.insert(t.key()) {
        out.push(t.clone());
    }
    for a in &t.args {
        let mut binders = t.binders.clone();
        binders.extend(a.binders.iter().cloned());
        cand(&Term::new(binders, a.head.clone(), a.args.clone()), seen, out);
    }
}

#[derive(Debug, Clone)]
pub struct DependencyPair {
    pub id: usize,
    pub lhs: Term,
    pub rhs: Term,
    pub origin: String,
}

impl DependencyPair {
    pub fn lhs_top(&self) -> &FunSym {
        self.lhs.head.as_fun().expect("marked lhs")
    }

    pub fn rhs_top(&self) -> &FunSym {
        self.rhs.head.as_fun().expect("marked rhs")
    }
}

impl fmt::Display for DependencyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// `SDP(R)`, numbered from 1 in rule order.
pub fn static_dependency_pairs(r: &RewriteSystem, mode: SafeMode) -> Vec<DependencyPair> {
    let defined = r.defined_symbols();
    let mut out = Vec::new();
    for rule in &r.rules {
        let safe: HashSet<String> = safe_subterms_with(&rule.lhs, mode).iter().map(Term::key).collect();
        let lhs = mark(&rule.lhs, &defined);
        let mut seen = HashSet::new();
        for c in candidates(&rule.rhs) {
            let Head::Fun(f) = &c.head else { continue };
            if !defined.contains(f) {
                continue;
            }
            let prefix_safe = (0..=c.args.len()).any(|k| {
                let p = Term::new(Vec::new(), c.head.clone(), c.args[..k].to_vec());
                safe.contains(&normal(&p).key())
            });
            if prefix_safe {
                continue;
            }
            let rhs = Term::new(Vec::new(), Head::Fun(f.marked()), c.args.clone());
            if seen.insert(rhs.key()) {
                out.push(DependencyPair {
                    id: out.len() + 1,
                    lhs: lhs.clone(),
                    rhs,
                    origin: rule.label.clone(),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct DependencyGraph {
    pub nodes: Vec<DependencyPair>,
    pub arcs: BTreeSet<(usize, usize)>,
}

/// Both arguments headed by distinct constructors.
fn clash(a: &Term, b: &Term, defined: &BTreeSet<FunSym>) -> bool {
    if a.binders.len() != b.binders.len() {
        return false;
    }
    match (&a.head, &b.head) {
        (Head::Fun(f), Head::Fun(g)) => {
            let ctor = |s: &FunSym| !s.marked && !defined.contains(s);
            if ctor(f) && ctor(g) {
                f != g || a.args.iter().zip(&b.args).any(|(x, y)| clash(x, y, defined))
            } else {
                false
            }
        }
        _ => false,
    }
}

/// Arc `i → j` when `top(rhs_i) = top(lhs_j)`; with `refine`, arcs whose
/// arguments clash on constructors are dropped.
pub fn dependency_graph(
    pairs: &[DependencyPair],
    defined: &BTreeSet<FunSym>,
    refine: bool,
) -> DependencyGraph {
    let mut arcs = BTreeSet::new();
    for p in pairs {
        for q in pairs {
            if p.rhs_top() != q.lhs_top() {
                continue;
            }
            if refine && p.rhs.args.iter().zip(&q.lhs.args).any(|(a, b)| clash(a, b, defined)) {
                continue;
            }
            arcs.insert((p.id, q.id));
        }
    }
    DependencyGraph { nodes: pairs.to_vec(), arcs }
}

impl DependencyGraph {
    pub fn pair(&self, id: usize) -> Option<&DependencyPair> {
        self.nodes.iter().find(|p| p.id == id)
    }

    /// Non-trivial SCCs of the whole graph.
    pub fn recursion_components(&self) -> Vec<Vec<usize>> {
        let all: BTreeSet<usize> = self.nodes.iter().map(|p| p.id).collect();
        self.components_within(&all)
    }

    /// Non-trivial SCCs of the subgraph induced by `ids`, each sorted, ordered
    /// by smallest member.
    pub fn components_within(&self, ids: &BTreeSet<usize>) -> Vec<Vec<usize>> {
        let mut g: DiGraph<usize, ()> = DiGraph::new();
        let mut index = BTreeMap::new();
        for &id in ids {
            index.insert(id, g.add_node(id));
        }
        for &(a, b) in &self.arcs {
            if let (Some(&x), Some(&y)) = (index.get(&a), index.get(&b)) {
                g.add_edge(x, y, ());
            }
        }
        let mut out: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut ids: Vec<usize> = c.into_iter().map(|n| g[n]).collect();
                ids.sort_unstable();
                ids
            })
            .filter(|c| c.len() > 1 || self.arcs.contains(&(c[0], c[0])))
            .collect();
        out.sort();
        out
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph sdg {\n");
        for p in &self.nodes {
            let label = format!("{}: {} → {}", p.id, p.lhs, p.rhs).replace('\\', "\\\\").replace('"', "\\\"");
            let _ = writeln!(s, "  n{} [label=\"{}\"];", p.id, label);
        }
        for (a, b) in &self.arcs {
            let _ = writeln!(s, "  n{a} -> n{b};");
        }
        s.push_str("}\n");
        s
    }
}
