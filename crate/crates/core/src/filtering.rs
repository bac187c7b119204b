//! Argument filterings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::order::BaseOrder;
use crate::static_dp::DependencyPair;
use crate::subst::Substitution;
use crate::term::{FunSym, Head, Term, Var};
use crate::types::SimpleType;

/// `π(f)`: a collapse index or the list of kept indices (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Filter {
    Collapse(usize),
    Keep(Vec<usize>),
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Filter::Collapse(i) => write!(f, "{i}"),
            Filter::Keep(ks) => {
                let parts: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
                write!(f, "[{}]", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FilterError {
    #[error("{0}: cannot collapse to argument {1}")]
    IllegalCollapse(String, usize),
    #[error("{0}: argument indices must be increasing and at most {1}")]
    BadKeep(String, usize),
}

/// Symbols without an entry keep all their arguments.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArgumentFiltering {
    map: BTreeMap<FunSym, Filter>,
}

impl ArgumentFiltering {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn set(&mut self, f: &FunSym, filter: Filter) -> Result<(), FilterError> {
        let (args, result) = f.ty.decompose();
        let n = args.len();
        match &filter {
            Filter::Collapse(i) => {
                if *i == 0 || *i > n || args[*i - 1] != result {
                    return Err(FilterError::IllegalCollapse(f.id(), *i));
                }
            }
            Filter::Keep(ks) => {
                if ks.iter().any(|&k| k == 0 || k > n) || ks.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(FilterError::BadKeep(f.id(), n));
                }
                if ks.len() == n {
                    self.map.remove(f);
                    return Ok(());
                }
            }
        }
        self.map.insert(f.clone(), filter);
        Ok(())
    }

    pub fn with(mut self, f: &FunSym, filter: Filter) -> Result<Self, FilterError> {
        self.set(f, filter)?;
        Ok(self)
    }

    pub fn get(&self, f: &FunSym) -> Filter {
        self.map
            .get(f)
            .cloned()
            .unwrap_or_else(|| Filter::Keep((1..=f.ty.arity()).collect()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FunSym, &Filter)> {
        self.map.iter()
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }
}

impl fmt::Display for ArgumentFiltering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.map.is_empty() {
            return f.write_str("identity");
        }
        let parts: Vec<String> = self.map.iter().map(|(s, v)| format!("{s}:{v}")).collect();
        f.write_str(&parts.join(", "))
    }
}

/// `type_π(f)`. Collapsed symbols keep their type; they never occur in
/// filtered terms.
pub fn filtered_type(pi: &ArgumentFiltering, f: &FunSym) -> SimpleType {
    let (args, result) = f.ty.decompose();
    match pi.get(f) {
        Filter::Keep(ks) => SimpleType::curried(ks.iter().map(|&k| args[k - 1].clone()), result.clone()),
        Filter::Collapse(_) => f.ty.clone(),
    }
}

/// `type_π` on the symbols of a signature.
#[derive(Debug, Clone, Default)]
pub struct FilteredSignature {
    pub types: BTreeMap<FunSym, SimpleType>,
}

impl FilteredSignature {
    pub fn new(pi: &ArgumentFiltering, symbols: impl IntoIterator<Item = FunSym>) -> Self {
        let types = symbols.into_iter().map(|f| {
            let t = filtered_type(pi, &f);
            (f, t)
        });
        FilteredSignature { types: types.collect() }
    }
}

/// `π(t)`. Heads of kept symbols carry their filtered type.
pub fn apply_filtering(pi: &ArgumentFiltering, t: &Term) -> Term {
    let mut body = match &t.head {
        Head::Fun(f) => match pi.get(f) {
            Filter::Collapse(i) => apply_filtering(pi, &t.args[i - 1]),
            Filter::Keep(ks) => {
                let args = ks.iter().map(|&k| apply_filtering(pi, &t.args[k - 1])).collect();
                Term::app(Head::Fun(f.with_type(filtered_type(pi, f))), args)
            }
        },
        Head::Var(_) => Term::app(t.head.clone(), t.args.iter().map(|a| apply_filtering(pi, a)).collect()),
    };
    let mut binders = t.binders.clone();
    binders.append(&mut body.binders);
    body.binders = binders;
    body
}

/// `θ_π(x) = π(θ(x))`.
pub fn filtered_substitution(pi: &ArgumentFiltering, theta: &Substitution) -> Substitution {
    theta.map_range(|t| apply_filtering(pi, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Strict,
    WeakEqual,
    Incomparable,
}

pub fn compare_filtered(pi: &ArgumentFiltering, base: &BaseOrder, s: &Term, t: &Term) -> Comparison {
    let (fs, ft) = (apply_filtering(pi, s), apply_filtering(pi, t));
    if base.greater(&fs, &ft) {
        Comparison::Strict
    } else if fs == ft {
        Comparison::WeakEqual
    } else {
        Comparison::Incomparable
    }
}

/// Single-symbol deviations from the identity: each dropped index, then
/// each legal collapse.
pub fn deviations(f: &FunSym) -> Vec<Filter> {
    let (args, result) = f.ty.decompose();
    let n = args.len();
    let mut out = Vec::new();
    for i in 1..=n {
        out.push(Filter::Keep((1..=n).filter(|&k| k != i).collect()));
    }
    for i in 1..=n {
        if args[i - 1] == result {
            out.push(Filter::Collapse(i));
        }
    }
    out
}

/// Identity, then single-symbol deviations (symbols in order), then pairwise
/// combinations, truncated to `budget` candidates.
pub fn enumerate_filterings(symbols: &BTreeSet<FunSym>, budget: usize) -> Vec<ArgumentFiltering> {
    let mut out = vec![ArgumentFiltering::identity()];
    let singles: Vec<(FunSym, Filter)> = symbols
        .iter()
        .flat_map(|f| deviations(f).into_iter().map(move |d| (f.clone(), d)))
        .collect();
    for (f, d) in &singles {
        if out.len() >= budget {
            return out;
        }
        out.push(ArgumentFiltering::identity().with(f, d.clone()).expect("legal deviation"));
    }
    for (i, (f, d)) in singles.iter().enumerate() {
        for (g, e) in &singles[i + 1..] {
            if f == g {
                continue;
            }
            if out.len() >= budget {
                return out;
            }
            let pi = ArgumentFiltering::identity()
                .with(f, d.clone())
                .and_then(|p| p.with(g, e.clone()))
                .expect("legal deviation");
            out.push(pi);
        }
    }
    out.truncate(budget.max(1));
    out
}

/// Filterings suggested by the pairs: for each variable, in order of first
/// occurrence, drop argument `i` of `f` whenever every occurrence of `f` in
/// the pairs has that variable inside its `i`-th argument.
pub fn guided_filterings(pairs: &[DependencyPair]) -> Vec<ArgumentFiltering> {
    let mut order: Vec<Var> = Vec::new();
    let mut occurrences: BTreeMap<FunSym, Vec<Term>> = BTreeMap::new();
    for p in pairs {
        for side in [&p.lhs, &p.rhs] {
            side.visit(&mut |t| {
                if let Head::Var(v) = &t.head {
                    if !order.contains(v) {
                        order.push(v.clone());
                    }
                }
                if let Head::Fun(f) = &t.head {
                    occurrences.entry(f.clone()).or_default().push(t.clone());
                }
            });
        }
    }
    let mut out: Vec<ArgumentFiltering> = Vec::new();
    for v in &order {
        let mut pi = ArgumentFiltering::identity();
        for (f, occs) in &occurrences {
            let n = f.ty.arity();
            let drop: BTreeSet<usize> = (1..=n)
                .filter(|&i| occs.iter().all(|t| t.args[i - 1].free_vars().contains(v)))
                .collect();
            if !drop.is_empty() {
                let keep: Vec<usize> = (1..=n).filter(|k| !drop.contains(k)).collect();
                pi.set(f, Filter::Keep(keep)).expect("legal keep list");
            }
        }
        if !pi.is_identity() && !out.contains(&pi) {
            out.push(pi);
        }
    }
    out
}
