mod common;

use std::collections::BTreeSet;

use common::{problem, reach, search, Interpretation};
use hrs_sdp::accessibility::SafeMode;
use hrs_sdp::parse::parse_term;
use hrs_sdp::rewrite::{step_all, RewriteSystem, Rule};
use hrs_sdp::static_dp::{dependency_graph, static_dependency_pairs, DependencyPair};
use hrs_sdp::term::FunSym;
use hrs_sdp::usable::{ce_rules, defined_dependency, usable_rules, UsableReport};

fn component(r: &RewriteSystem, top: &str) -> Vec<DependencyPair> {
    let pairs = static_dependency_pairs(r, SafeMode::Full);
    let g = dependency_graph(&pairs, &r.defined_symbols(), false);
    let comp = g
        .recursion_components()
        .into_iter()
        .find(|c| g.pair(c[0]).unwrap().lhs_top().to_string() == top)
        .unwrap();
    pairs.into_iter().filter(|p| comp.contains(&p.id)).collect()
}

fn l2t_usable(r: &RewriteSystem) -> UsableReport {
    usable_rules(r, &component(r, "l2t#"))
}

#[test]
fn heap_l2t_component() {
    let r = problem("heap");
    let u = l2t_usable(&r);
    assert_eq!(u.rules, ["merge_leaf_r", "merge_leaf_l", "merge_node_1", "merge_node_2", "l2t_nil", "l2t_one", "l2t_many"]);
    assert_eq!(u.reason, None);
}

#[test]
fn foldl_component_uses_every_rule() {
    let r = problem("sum");
    let u = usable_rules(&r, &component(&r, "foldl#"));
    let all: Vec<String> = r.rules.iter().map(|x| x.label.clone()).collect();
    assert_eq!(u.rules, all);
    assert!(u.reason.unwrap().contains("F(X, Y)"));
}

#[test]
fn defined_dependency_of_heap() {
    let r = problem("heap");
    let deps = defined_dependency(&r);
    let names = |f: &str| -> BTreeSet<String> {
        deps.iter().find(|(g, _)| g.to_string() == f).map(|(_, s)| s.iter().map(FunSym::to_string).collect()).unwrap_or_default()
    };
    assert_eq!(names("l2t"), ["l2t", "merge"].iter().map(|s| s.to_string()).collect());
    assert_eq!(names("list2heap"), ["hd", "l2t", "map"].iter().map(|s| s.to_string()).collect());
    assert!(names("hd").is_empty());
}

#[test]
fn ce_has_two_rules_per_basic_type() {
    for name in ["heap", "ave", "forall"] {
        let r = problem(name);
        let ce = ce_rules(&r.signature);
        assert_eq!(ce.len(), 2 * r.signature.base_types.len(), "{name}");
        for rule in &ce {
            assert_eq!(rule.lhs.args.len(), 2);
            assert!(r.signature.function(&rule.top().to_string()).is_none());
        }
    }
}

#[test]
fn interpretation_of_hd_nil() {
    let r = problem("heap");
    let u = l2t_usable(&r);
    let mut i = Interpretation::new(&r, &u.rules, 1000);
    let hd = r.signature.function("hd").unwrap();
    assert!(i.delta().contains(hd));
    let t = parse_term(&r.signature, "hd(nil)").unwrap();
    assert_eq!(i.interpret(&t).unwrap().to_string(), "c_H(hd(nil), c_H(leaf, bot_H))");
    let leaf = parse_term(&r.signature, "node(0, leaf, leaf)").unwrap();
    assert_eq!(i.interpret(&leaf).unwrap(), leaf);
}

#[test]
fn red_of_nothing_is_bottom() {
    let r = problem("heap");
    let i = Interpretation::new(&r, &[], 10);
    let h = r.signature.function("leaf").unwrap().ty.clone();
    assert_eq!(i.red(&h, Vec::new()).to_string(), "bot_H");
}

fn usable_with_ce(r: &RewriteSystem, u: &UsableReport) -> Vec<Rule> {
    let mut rules: Vec<Rule> = r.rules.iter().filter(|x| u.rules.contains(&x.label)).cloned().collect();
    rules.extend(ce_rules(&r.signature));
    rules
}

#[test]
fn red_over_all_reducts_simulates_a_usable_step() {
    let r = problem("heap");
    let u = l2t_usable(&r);
    let rules = usable_with_ce(&r, &u);
    let choices = ce_rules(&r.signature).iter().map(|x| x.top().clone()).collect();
    let s = parse_term(&r.signature, "cons(hd(l2t(nil)), map(\\x. hd(nil), nnil))").unwrap();
    let t = parse_term(&r.signature, "cons(hd(nil), map(\\x. hd(nil), nnil))").unwrap();
    assert!(step_all(&s, &r.rules).contains(&t));
    let mut i = Interpretation::new(&r, &u.rules, 10_000);
    let (is, it) = (i.interpret(&s).unwrap(), i.interpret(&t).unwrap());
    assert!(is != it && reach(&is, &it, &rules, &choices, 4));
}

#[test]
fn red_over_other_rules_only_breaks_the_step() {
    let r = problem("heap");
    let u = l2t_usable(&r);
    let rules = usable_with_ce(&r, &u);
    let s = parse_term(&r.signature, "cons(hd(l2t(nil)), map(\\x. hd(nil), nnil))").unwrap();
    let t = parse_term(&r.signature, "cons(hd(nil), map(\\x. hd(nil), nnil))").unwrap();
    let mut i = Interpretation::restricted(&r, &u.rules, 10_000);
    let (is, it) = (i.interpret(&s).unwrap(), i.interpret(&t).unwrap());
    assert_eq!(search(&is, &it, &rules, 12, true, 50_000), Some(false));
}
