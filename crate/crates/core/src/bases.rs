//! Implication bases of a formal context: the base of proper premises
//! (canonical direct base) and the Duquenne-Guigues (stem) base.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::context::FormalContext;
use crate::hypergraph::{minimal_sets, Hypergraph, ScaleGuard};
use crate::set::AttributeSet;

/// Attribute limit for [`brute_force_proper_premises`].
pub const PROPER_ORACLE_LIMIT: usize = 15;
/// Attribute limit for [`brute_force_pseudo_intents`].
pub const PSEUDO_INTENT_ORACLE_LIMIT: usize = 12;

/// `premise -> conclusion`, stored with the premise removed from the
/// conclusion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Implication {
    premise: AttributeSet,
    conclusion: AttributeSet,
}

impl Implication {
    /// Returns `None` when nothing remains of the conclusion once the
    /// premise is taken out.
    pub fn new(premise: AttributeSet, conclusion: AttributeSet) -> Option<Self> {
        let conclusion = conclusion.difference(&premise);
        (!conclusion.is_empty()).then_some(Implication {
            premise,
            conclusion,
        })
    }

    pub fn premise(&self) -> &AttributeSet {
        &self.premise
    }

    pub fn conclusion(&self) -> &AttributeSet {
        &self.conclusion
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Proper,
    Stem,
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseKind::Proper => "proper",
            BaseKind::Stem => "stem",
        })
    }
}

/// A set of implications over `n_attributes` attributes, one per premise,
/// sorted by premise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicationBase {
    kind: BaseKind,
    n_attributes: usize,
    implications: Vec<Implication>,
}

impl ImplicationBase {
    /// Merges implications sharing a premise and sorts the result.
    pub fn new(
        kind: BaseKind,
        n_attributes: usize,
        implications: impl IntoIterator<Item = Implication>,
    ) -> Self {
        let mut merged: BTreeMap<AttributeSet, AttributeSet> = BTreeMap::new();
        for imp in implications {
            assert_eq!(imp.premise.universe(), n_attributes, "implication universe");
            merged
                .entry(imp.premise)
                .and_modify(|c| c.union_with(&imp.conclusion))
                .or_insert(imp.conclusion);
        }
        ImplicationBase {
            kind,
            n_attributes,
            implications: merged
                .into_iter()
                .map(|(premise, conclusion)| Implication {
                    premise,
                    conclusion,
                })
                .collect(),
        }
    }

    pub fn kind(&self) -> BaseKind {
        self.kind
    }

    pub fn n_attributes(&self) -> usize {
        self.n_attributes
    }

    pub fn implications(&self) -> &[Implication] {
        &self.implications
    }

    /// Number of distinct premises.
    pub fn len(&self) -> usize {
        self.implications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.implications.is_empty()
    }

    /// Number of distinct `premise -> single attribute` pairs.
    pub fn pair_count(&self) -> usize {
        self.implications.iter().map(|i| i.conclusion.len()).sum()
    }

    pub fn premises(&self) -> impl Iterator<Item = &AttributeSet> {
        self.implications.iter().map(|i| &i.premise)
    }

    /// `x` together with the conclusions of every implication whose
    /// premise lies in `x`; a single pass over the base.
    pub fn close_once(&self, x: &AttributeSet) -> AttributeSet {
        let mut out = x.clone();
        for imp in &self.implications {
            if imp.premise.is_subset(x) {
                out.union_with(&imp.conclusion);
            }
        }
        out
    }

    /// Least superset of `x` closed under every implication of the base.
    pub fn close_fixpoint(&self, x: &AttributeSet) -> AttributeSet {
        let mut current = x.clone();
        loop {
            let next = self.close_once(&current);
            if next == current {
                return current;
            }
            current = next;
        }
    }

    /// Renders the base one implication per line, e.g. `a2 a3 a5 -> a1`.
    /// Members appear in attribute-index order and lines in premise order.
    pub fn to_text(&self, names: &[String]) -> String {
        let mut out = String::new();
        for imp in &self.implications {
            out.push_str(&format_implication(imp, names));
            out.push('\n');
        }
        out
    }
}

pub fn format_implication(imp: &Implication, names: &[String]) -> String {
    let join = |s: &AttributeSet| {
        s.iter()
            .map(|a| names[a].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let premise = join(&imp.premise);
    let conclusion = join(&imp.conclusion);
    if premise.is_empty() {
        format!("-> {conclusion}")
    } else {
        format!("{premise} -> {conclusion}")
    }
}

/// `{ A \ o' : o an object without attribute a }`, one edge per object,
/// duplicates kept. Every edge contains `a`.
pub fn attribute_hypergraph(ctx: &FormalContext, a: usize) -> Hypergraph {
    assert!(a < ctx.n_attributes(), "attribute {a} out of range");
    let mut h = Hypergraph::new(ctx.n_attributes());
    for o in 0..ctx.n_objects() {
        if !ctx.has(o, a) {
            h.push(ctx.row(o).complement());
        }
    }
    h
}

/// Proper premises of `a`: the minimal transversals of the attribute
/// hypergraph without the trivial `{a}`. A full column gives `{∅}`.
pub fn proper_premises_of(ctx: &FormalContext, a: usize) -> Vec<AttributeSet> {
    let trivial = AttributeSet::from_indices(ctx.n_attributes(), [a]);
    let mut tr = attribute_hypergraph(ctx, a).minimal_transversals();
    tr.retain(|t| t != &trivial);
    tr
}

/// Proper premises of every attribute, computed in parallel and returned
/// in attribute order.
pub fn all_proper_premises(ctx: &FormalContext) -> Vec<Vec<AttributeSet>> {
    (0..ctx.n_attributes())
        .into_par_iter()
        .map(|a| proper_premises_of(ctx, a))
        .collect()
}

/// Builds the base from per-attribute premise families as returned by
/// [`all_proper_premises`].
pub fn proper_base_from_premises(
    n_attributes: usize,
    premises: &[Vec<AttributeSet>],
) -> ImplicationBase {
    let implications = premises.iter().enumerate().flat_map(|(a, family)| {
        family.iter().filter_map(move |p| {
            Implication::new(p.clone(), AttributeSet::from_indices(n_attributes, [a]))
        })
    });
    ImplicationBase::new(BaseKind::Proper, n_attributes, implications)
}

/// The base of proper premises: `P -> a` for every proper premise `P` of
/// every attribute `a`, merged by premise.
pub fn proper_premise_base(ctx: &FormalContext) -> ImplicationBase {
    proper_base_from_premises(ctx.n_attributes(), &all_proper_premises(ctx))
}

/// Exhaustive reference for [`proper_premises_of`]: keeps every `P`
/// meeting `A \ o'` for each object `o` lacking `a`, then the minimal ones.
pub fn brute_force_proper_premises(
    ctx: &FormalContext,
    a: usize,
) -> Result<Vec<AttributeSet>, ScaleGuard> {
    let n = ctx.n_attributes();
    if n > PROPER_ORACLE_LIMIT {
        return Err(ScaleGuard {
            vertices: n,
            limit: PROPER_ORACLE_LIMIT,
        });
    }
    let blockers: Vec<AttributeSet> = (0..ctx.n_objects())
        .filter(|&o| !ctx.has(o, a))
        .map(|o| ctx.row(o).complement())
        .collect();
    let premises: Vec<AttributeSet> = (0..1u64 << n)
        .map(|m| AttributeSet::from_mask(n, m))
        .filter(|p| blockers.iter().all(|b| b.intersects(p)))
        .collect();
    let trivial = AttributeSet::from_indices(n, [a]);
    let mut out = minimal_sets(premises);
    out.retain(|p| p != &trivial);
    Ok(out)
}

/// Closure of `x` under the implications whose premise is a proper subset
/// of the current set; this is the operator whose closed sets are exactly
/// the intents and pseudo-intents.
fn pseudo_closure(found: &[Implication], x: &AttributeSet) -> AttributeSet {
    let mut current = x.clone();
    loop {
        let mut next = current.clone();
        for imp in found {
            if imp.premise.is_proper_subset(&current) {
                next.union_with(&imp.conclusion);
            }
        }
        if next == current {
            return current;
        }
        current = next;
    }
}

/// The Duquenne-Guigues base `P -> P'' \ P` over all pseudo-intents `P`,
/// found by enumerating pseudo-closed sets in lectic order.
pub fn stem_base(ctx: &FormalContext) -> ImplicationBase {
    let n = ctx.n_attributes();
    let mut found: Vec<Implication> = Vec::new();
    let mut current = AttributeSet::empty(n);
    loop {
        let closed = ctx.closure(&current);
        if closed != current {
            found.extend(Implication::new(current.clone(), closed));
        }
        match next_pseudo_closed(&found, &current, n) {
            Some(next) => current = next,
            None => break,
        }
    }
    ImplicationBase::new(BaseKind::Stem, n, found)
}

/// Lectic successor of `current` among the sets closed under
/// `pseudo_closure`; the largest attribute index varies fastest.
fn next_pseudo_closed(
    found: &[Implication],
    current: &AttributeSet,
    n: usize,
) -> Option<AttributeSet> {
    for i in (0..n).rev() {
        if current.contains(i) {
            continue;
        }
        let candidate = pseudo_closure(found, &current.prefix(i).with(i));
        if candidate.prefix(i) == current.prefix(i) {
            return Some(candidate);
        }
    }
    None
}

/// Exhaustive reference for the stem base premises: subsets are visited by
/// ascending size and tested against the recursive definition.
pub fn brute_force_pseudo_intents(ctx: &FormalContext) -> Result<Vec<AttributeSet>, ScaleGuard> {
    let n = ctx.n_attributes();
    if n > PSEUDO_INTENT_ORACLE_LIMIT {
        return Err(ScaleGuard {
            vertices: n,
            limit: PSEUDO_INTENT_ORACLE_LIMIT,
        });
    }
    let mut subsets: Vec<AttributeSet> = (0..1u64 << n)
        .map(|m| AttributeSet::from_mask(n, m))
        .collect();
    subsets.sort_by_key(AttributeSet::len);
    let mut pseudo: Vec<(AttributeSet, AttributeSet)> = Vec::new();
    for p in subsets {
        let closed = ctx.closure(&p);
        if closed == p {
            continue;
        }
        let respects_smaller = pseudo
            .iter()
            .filter(|(q, _)| q.is_proper_subset(&p))
            .all(|(_, q_closed)| q_closed.is_subset(&p));
        if respects_smaller {
            pseudo.push((p, closed));
        }
    }
    let mut out: Vec<AttributeSet> = pseudo.into_iter().map(|(p, _)| p).collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::fixtures::{from_bits, toy};
    use crate::hypergraph::is_antichain;
    use proptest::prelude::*;

    fn set(ids: &[usize]) -> AttributeSet {
        AttributeSet::from_indices(5, ids.iter().map(|i| i - 1))
    }

    fn family(lists: &[&[usize]]) -> Vec<AttributeSet> {
        let mut v: Vec<_> = lists.iter().map(|l| set(l)).collect();
        v.sort();
        v
    }

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("a{i}")).collect()
    }

    fn full(n_objects: usize, n_attributes: usize) -> FormalContext {
        FormalContext::from_rows(n_attributes, &vec![vec![true; n_attributes]; n_objects])
    }

    fn empty_relation(n_objects: usize, n_attributes: usize) -> FormalContext {
        FormalContext::from_rows(n_attributes, &vec![vec![false; n_attributes]; n_objects])
    }

    #[test]
    fn toy_attribute_hypergraphs() {
        let ctx = toy();
        let mut h1 = attribute_hypergraph(&ctx, 0).edges().to_vec();
        h1.sort();
        assert_eq!(h1, family(&[&[1, 3], &[1, 5], &[1, 2, 3], &[1, 2, 4]]));
        let mut h2 = attribute_hypergraph(&ctx, 1).edges().to_vec();
        h2.sort();
        assert_eq!(h2, family(&[&[1, 2, 3], &[1, 2, 4]]));
        assert!(attribute_hypergraph(&full(3, 3), 1).is_edgeless());
    }

    #[test]
    fn duplicate_edges_are_kept() {
        let ctx = FormalContext::from_rows(2, &[vec![true, false], vec![true, false]]);
        assert_eq!(attribute_hypergraph(&ctx, 1).edges().len(), 2);
    }

    #[test]
    fn toy_proper_premises() {
        let ctx = toy();
        assert_eq!(
            proper_premises_of(&ctx, 0),
            family(&[&[2, 3, 5], &[3, 4, 5]])
        );
        assert_eq!(proper_premises_of(&ctx, 1), family(&[&[1], &[3, 4]]));
        assert_eq!(proper_premises_of(&ctx, 4), family(&[&[1, 3], &[1, 4]]));
        for a in 0..5 {
            assert_eq!(
                proper_premises_of(&ctx, a),
                brute_force_proper_premises(&ctx, a).unwrap()
            );
        }
        assert_eq!(
            brute_force_proper_premises(&ctx, 0).unwrap(),
            family(&[&[2, 3, 5], &[3, 4, 5]])
        );
        assert_eq!(
            brute_force_proper_premises(&ctx, 1).unwrap(),
            family(&[&[1], &[3, 4]])
        );
    }

    #[test]
    fn full_column_premise_is_empty_set() {
        let ctx = full(3, 3);
        assert_eq!(proper_premises_of(&ctx, 2), vec![AttributeSet::empty(3)]);
        assert_eq!(
            brute_force_proper_premises(&ctx, 2).unwrap(),
            vec![AttributeSet::empty(3)]
        );
    }

    #[test]
    fn toy_proper_base() {
        let ctx = toy();
        let base = proper_premise_base(&ctx);
        let has_pair = |p: &[usize], a: usize| {
            base.implications()
                .iter()
                .any(|i| i.premise() == &set(p) && i.conclusion().contains(a - 1))
        };
        assert!(has_pair(&[3, 4], 2));
        assert!(has_pair(&[1, 3], 5));
        assert!(has_pair(&[1, 4], 5));
        assert!(has_pair(&[2, 3, 5], 1));
        assert!(has_pair(&[3, 4, 5], 1));
        let text = base.to_text(&names(5));
        assert!(text.contains("a2 a3 a5 -> a1\n"));
        // frozen from the exhaustive oracle
        let oracle_pairs: usize = (0..5)
            .map(|a| brute_force_proper_premises(&ctx, a).unwrap().len())
            .sum();
        assert_eq!(base.pair_count(), oracle_pairs);
        for imp in base.implications() {
            assert!(ctx.implication_holds(imp.premise(), imp.conclusion()));
        }
    }

    #[test]
    fn full_relation_bases() {
        let ctx = full(3, 3);
        for base in [proper_premise_base(&ctx), stem_base(&ctx)] {
            assert_eq!(base.to_text(&names(3)), "-> a1 a2 a3\n");
        }
        assert_eq!(
            brute_force_pseudo_intents(&ctx).unwrap(),
            vec![AttributeSet::empty(3)]
        );
    }

    #[test]
    fn empty_relation_bases_are_sound() {
        for (no, na) in [(0, 3), (1, 1), (3, 3), (2, 4)] {
            let ctx = empty_relation(no, na);
            let proper = proper_premise_base(&ctx);
            let stem = stem_base(&ctx);
            for imp in proper.implications().iter().chain(stem.implications()) {
                assert!(ctx.implication_holds(imp.premise(), imp.conclusion()));
            }
            for m in 0..1u64 << na {
                let x = AttributeSet::from_mask(na, m);
                assert_eq!(proper.close_once(&x), ctx.closure(&x));
                assert_eq!(stem.close_fixpoint(&x), ctx.closure(&x));
            }
            let mut premises: Vec<_> = stem.premises().cloned().collect();
            premises.sort();
            assert_eq!(premises, brute_force_pseudo_intents(&ctx).unwrap());
        }
        // one attribute, one object lacking it: both ∅ and {a1} are closed
        let ctx = empty_relation(1, 1);
        assert_eq!(
            brute_force_pseudo_intents(&ctx).unwrap(),
            Vec::<AttributeSet>::new()
        );
        // no objects: ∅'' is everything, so ∅ is the only pseudo-intent
        let ctx = empty_relation(0, 2);
        assert_eq!(
            brute_force_pseudo_intents(&ctx).unwrap(),
            vec![AttributeSet::empty(2)]
        );
    }

    #[test]
    fn all_subsets_closed_gives_empty_stem() {
        // every singleton complement is an object intent, so every set is closed
        let rows: Vec<Vec<bool>> = (0..4).map(|o| (0..4).map(|a| a != o).collect()).collect();
        let ctx = FormalContext::from_rows(4, &rows);
        assert!(stem_base(&ctx).is_empty());
        assert!(brute_force_pseudo_intents(&ctx).unwrap().is_empty());
    }

    #[test]
    fn close_examples() {
        let ctx = toy();
        let proper = proper_premise_base(&ctx);
        assert_eq!(proper.close_once(&set(&[3, 4])), set(&[2, 3, 4]));
        let closed = set(&[2, 3, 4]);
        assert_eq!(proper.close_once(&closed), closed);
        let stem = stem_base(&ctx);
        assert_eq!(stem.close_fixpoint(&set(&[3, 4])), set(&[2, 3, 4]));

        let one = ImplicationBase::new(
            BaseKind::Proper,
            5,
            Implication::new(AttributeSet::empty(5), set(&[1])),
        );
        assert_eq!(one.close_once(&AttributeSet::empty(5)), set(&[1]));
        let empty = ImplicationBase::new(BaseKind::Stem, 5, []);
        assert_eq!(empty.close_fixpoint(&set(&[2])), set(&[2]));
        let chain = ImplicationBase::new(
            BaseKind::Stem,
            5,
            [
                Implication::new(set(&[1]), set(&[2])).unwrap(),
                Implication::new(set(&[2]), set(&[3])).unwrap(),
            ],
        );
        assert_eq!(chain.close_fixpoint(&set(&[1])), set(&[1, 2, 3]));
        assert_eq!(chain.close_once(&set(&[1])), set(&[1, 2]));
    }

    #[test]
    fn toy_stem_base() {
        let ctx = toy();
        let stem = stem_base(&ctx);
        let mut premises: Vec<_> = stem.premises().cloned().collect();
        premises.sort();
        assert_eq!(premises, brute_force_pseudo_intents(&ctx).unwrap());
        assert!(stem.len() <= proper_premise_base(&ctx).len());
        for imp in stem.implications() {
            assert_eq!(
                imp.premise().union(imp.conclusion()),
                ctx.closure(imp.premise())
            );
        }
    }

    #[test]
    fn implication_drops_premise_from_conclusion() {
        let imp = Implication::new(set(&[1, 2]), set(&[2, 3])).unwrap();
        assert_eq!(imp.conclusion(), &set(&[3]));
        assert!(Implication::new(set(&[1, 2]), set(&[2])).is_none());
    }

    #[test]
    fn merged_base_counts() {
        let base = ImplicationBase::new(
            BaseKind::Proper,
            5,
            [
                Implication::new(set(&[1]), set(&[2])).unwrap(),
                Implication::new(set(&[1]), set(&[3])).unwrap(),
                Implication::new(set(&[4]), set(&[3])).unwrap(),
            ],
        );
        assert_eq!(base.len(), 2);
        assert_eq!(base.pair_count(), 3);
        assert_eq!(base.to_text(&names(5)), "a1 -> a2 a3\na4 -> a3\n");
    }

    #[test]
    fn oracle_scale_guards() {
        let ctx = empty_relation(1, 16);
        assert!(brute_force_proper_premises(&ctx, 0).is_err());
        assert!(brute_force_pseudo_intents(&empty_relation(1, 13)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn bases_agree_with_oracles(bits in any::<u128>(), no in 0usize..=10, na in 1usize..=8) {
            let ctx = from_bits(no, na, bits & ((1u128 << (no * na)) - 1));
            let premises = all_proper_premises(&ctx);
            for (a, fam) in premises.iter().enumerate() {
                prop_assert_eq!(fam, &brute_force_proper_premises(&ctx, a).unwrap());
                prop_assert!(is_antichain(fam));
                for p in fam {
                    prop_assert!(!p.contains(a));
                    for e in p {
                        let smaller = p.without(e);
                        prop_assert!(attribute_hypergraph(&ctx, a).edges().iter().any(|edge| !edge.intersects(&smaller)));
                    }
                }
            }
            let proper = proper_base_from_premises(na, &premises);
            let stem = stem_base(&ctx);
            let mut stem_premises: Vec<_> = stem.premises().cloned().collect();
            stem_premises.sort();
            prop_assert_eq!(stem_premises, brute_force_pseudo_intents(&ctx).unwrap());
            prop_assert!(stem.len() <= proper.len());
            for imp in proper.implications().iter().chain(stem.implications()) {
                prop_assert!(ctx.implication_holds(imp.premise(), imp.conclusion()));
            }
            for m in 0..1u64 << na {
                let x = AttributeSet::from_mask(na, m);
                let closed = ctx.closure(&x);
                prop_assert_eq!(proper.close_once(&x), closed.clone());
                prop_assert_eq!(stem.close_fixpoint(&x), closed);
            }
        }
    }
}
