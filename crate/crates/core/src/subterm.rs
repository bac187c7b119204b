//! The subterm criterion.

use std::collections::{BTreeMap, BTreeSet};

use crate::static_dp::DependencyPair;
use crate::term::{FunSym, Head, Located, Position, Term};

/// Maps each marked symbol to a non-empty position.
pub type Projection = BTreeMap<FunSym, Position>;

fn unmark(t: &Term) -> Term {
    match &t.head {
        Head::Fun(f) => Term::new(t.binders.clone(), Head::Fun(f.unmarked()), t.args.clone()),
        Head::Var(_) => t.clone(),
    }
}

/// Condition (c) for `u` at `p`: no strict prefix of `p` is headed by a
/// free variable of `u`. Returns the projected subterm.
fn project_lhs(u: &Term, p: &Position) -> Result<Located, String> {
    let fv = u.free_vars();
    for q in p.strict_prefixes() {
        let s = u.subterm_at(&q).map_err(|e| e.to_string())?.term;
        if let Head::Var(x) = &s.head {
            if fv.contains(x) {
                return Err(format!("{u} has the free variable {} above {p}", x.name));
            }
        }
    }
    u.subterm_at(p).map_err(|e| e.to_string())
}

/// Condition (d) for `v` at `p`: no strict non-root prefix is headed by a
/// free variable or a defined symbol.
fn project_rhs(v: &Term, p: &Position, defined: &BTreeSet<FunSym>) -> Result<Located, String> {
    let fv = v.free_vars();
    for q in p.strict_prefixes().filter(|q| !q.is_root()) {
        let s = v.subterm_at(&q).map_err(|e| e.to_string())?.term;
        let bad = match &s.head {
            Head::Var(x) => fv.contains(x),
            Head::Fun(f) => defined.contains(f),
        };
        if bad {
            return Err(format!("{v} has {} at {q}, above {p}", s.head));
        }
    }
    v.subterm_at(p).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Strict,
    Equal,
}

fn compare(pair: &DependencyPair, pi: &Projection, defined: &BTreeSet<FunSym>) -> Result<Cmp, String> {
    let pu = pi
        .get(pair.lhs_top())
        .ok_or_else(|| format!("no position for {}", pair.lhs_top()))?;
    let pv = pi
        .get(pair.rhs_top())
        .ok_or_else(|| format!("no position for {}", pair.rhs_top()))?;
    if pu.is_root() || pv.is_root() {
        return Err("projections must be non-empty".into());
    }
    let a = project_lhs(&unmark(&pair.lhs), pu)?;
    let b = project_rhs(&unmark(&pair.rhs), pv, defined)?;
    let same_context = a.context.len() == b.context.len()
        && a.context.iter().zip(&b.context).all(|(x, y)| x.ty == y.ty);
    if same_context {
        if let Some(c) = subterm_relation(&a, &b) {
            return Ok(c);
        }
    }
    Err(format!("pair {}: {} is not a subterm of {}", pair.id, b.term, a.term))
}

/// `a ⊵ b`, identifying the binders above both subterms by level.
fn subterm_relation(a: &Located, b: &Located) -> Option<Cmp> {
    let kb = b.term.key_in_context(&b.context);
    if a.term.key_in_context(&a.context) == kb {
        return Some(Cmp::Equal);
    }
    for p in a.term.positions().into_iter().skip(1) {
        let s = a.term.subterm_at(&p).ok()?;
        let mut ctx = a.context.clone();
        ctx.extend(s.context);
        if s.term.key_in_context(&ctx) == kb {
            return Some(Cmp::Strict);
        }
    }
    None
}

/// Checks the criterion and returns the ids of the strictly decreasing pairs.
pub fn explain_subterm_criterion(
    pairs: &[DependencyPair],
    pi: &Projection,
    defined: &BTreeSet<FunSym>,
) -> Result<Vec<usize>, String> {
    let mut strict = Vec::new();
    for p in pairs {
        if compare(p, pi, defined)? == Cmp::Strict {
            strict.push(p.id);
        }
    }
    if strict.is_empty() {
        return Err("no pair decreases strictly".into());
    }
    Ok(strict)
}

pub fn check_subterm_criterion(
    pairs: &[DependencyPair],
    pi: &Projection,
    defined: &BTreeSet<FunSym>,
) -> bool {
    explain_subterm_criterion(pairs, pi, defined).is_ok()
}

fn positions_up_to(t: &Term, max_len: usize) -> BTreeSet<Position> {
    t.positions()
        .into_iter()
        .filter(|p| !p.is_root() && p.0.len() <= max_len)
        .collect()
}

/// Searches projections with positions of length at most `max_len`, in
/// lexicographic order per symbol.
pub fn find_projection(
    pairs: &[DependencyPair],
    max_len: usize,
    defined: &BTreeSet<FunSym>,
) -> Option<Projection> {
    let mut symbols: BTreeSet<FunSym> = BTreeSet::new();
    for p in pairs {
        symbols.insert(p.lhs_top().clone());
        symbols.insert(p.rhs_top().clone());
    }
    let mut choices: Vec<(FunSym, Vec<Position>)> = Vec::new();
    for f in &symbols {
        let mut cand: Option<BTreeSet<Position>> = None;
        for p in pairs {
            let (u, v) = (unmark(&p.lhs), unmark(&p.rhs));
            for (t, lhs) in [(&u, true), (&v, false)] {
                let top = if lhs { p.lhs_top() } else { p.rhs_top() };
                if top != f {
                    continue;
                }
                let ok: BTreeSet<Position> = positions_up_to(t, max_len)
                    .into_iter()
                    .filter(|q| {
                        if lhs {
                            project_lhs(t, q).is_ok()
                        } else {
                            project_rhs(t, q, defined).is_ok()
                        }
                    })
                    .collect();
                cand = Some(match cand {
                    None => ok,
                    Some(c) => c.intersection(&ok).cloned().collect(),
                });
            }
        }
        let c: Vec<Position> = cand.unwrap_or_default().into_iter().collect();
        if c.is_empty() {
            return None;
        }
        choices.push((f.clone(), c));
    }
    let mut pi = Projection::new();
    search(pairs, &choices, 0, &mut pi, defined)
}

fn search(
    pairs: &[DependencyPair],
    choices: &[(FunSym, Vec<Position>)],
    i: usize,
    pi: &mut Projection,
    defined: &BTreeSet<FunSym>,
) -> Option<Projection> {
    if i == choices.len() {
        return check_subterm_criterion(pairs, pi, defined).then(|| pi.clone());
    }
    let (f, options) = &choices[i];
    for p in options {
        pi.insert(f.clone(), p.clone());
        let consistent = pairs.iter().all(|pair| {
            !(pi.contains_key(pair.lhs_top()) && pi.contains_key(pair.rhs_top()))
                || compare(pair, pi, defined).is_ok()
        });
        if consistent {
            if let Some(found) = search(pairs, choices, i + 1, pi, defined) {
                return Some(found);
            }
        }
        pi.remove(f);
    }
    None
}
