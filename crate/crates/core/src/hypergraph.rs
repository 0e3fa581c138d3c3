//! Hypergraphs over a dense vertex universe and their minimal transversals.

use thiserror::Error;

use crate::set::AttributeSet;

/// Largest vertex count the exhaustive oracles accept.
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("exhaustive scan over {vertices} vertices exceeds the limit of {limit}")]
pub struct ScaleGuard {
    pub vertices: usize,
    pub limit: usize,
}

/// A finite family of vertex sets. Duplicate edges are kept until
/// [`Hypergraph::normalize`] is called.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    vertex_count: usize,
    edges: Vec<AttributeSet>,
}

impl Hypergraph {
    pub fn new(vertex_count: usize) -> Self {
        Hypergraph {
            vertex_count,
            edges: Vec::new(),
        }
    }

    /// Panics if an edge lives in a different universe.
    pub fn from_edges(vertex_count: usize, edges: Vec<AttributeSet>) -> Self {
        for e in &edges {
            assert_eq!(e.universe(), vertex_count, "edge outside vertex universe");
        }
        Hypergraph {
            vertex_count,
            edges,
        }
    }

    pub fn from_index_lists(vertex_count: usize, edges: &[&[usize]]) -> Self {
        Self::from_edges(
            vertex_count,
            edges
                .iter()
                .map(|e| AttributeSet::from_indices(vertex_count, e.iter().copied()))
                .collect(),
        )
    }

    pub fn push(&mut self, edge: AttributeSet) {
        assert_eq!(
            edge.universe(),
            self.vertex_count,
            "edge outside vertex universe"
        );
        self.edges.push(edge);
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[AttributeSet] {
        &self.edges
    }

    pub fn is_edgeless(&self) -> bool {
        self.edges.is_empty()
    }

    /// Inclusion-minimal, deduplicated edges in lexicographic order.
    pub fn normalize(&self) -> Hypergraph {
        Hypergraph {
            vertex_count: self.vertex_count,
            edges: minimal_sets(self.edges.clone()),
        }
    }

    pub fn is_transversal(&self, s: &AttributeSet) -> bool {
        self.edges.iter().all(|e| e.intersects(s))
    }

    /// Whether `s` is a transversal and no set obtained by dropping one of
    /// its members is.
    pub fn is_minimal_transversal(&self, s: &AttributeSet) -> bool {
        self.is_transversal(s) && s.iter().all(|v| !self.is_transversal(&s.without(v)))
    }

    /// All inclusion-minimal transversals, in lexicographic order.
    ///
    /// Edges are folded in one at a time (Berge multiplication), smallest
    /// first. An edgeless hypergraph yields `{∅}`; a hypergraph with an
    /// empty edge yields no transversal at all.
    pub fn minimal_transversals(&self) -> Vec<AttributeSet> {
        let mut edges = self.normalize().edges;
        if edges.iter().any(AttributeSet::is_empty) {
            return Vec::new();
        }
        edges.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

        let mut current = vec![AttributeSet::empty(self.vertex_count)];
        for edge in &edges {
            let (hit, miss): (Vec<_>, Vec<_>) =
                current.into_iter().partition(|t| t.intersects(edge));
            // A candidate t+v (t misses the edge) can only be dominated by a
            // set that already hits the edge: two candidates never nest.
            let mut next = Vec::with_capacity(hit.len() + miss.len());
            for t in &miss {
                for v in edge {
                    let candidate = t.with(v);
                    if !hit.iter().any(|h| h.is_subset(&candidate)) {
                        next.push(candidate);
                    }
                }
            }
            next.extend(hit);
            current = next;
        }
        current.sort();
        current
    }

    /// Exhaustive reference for [`Hypergraph::minimal_transversals`].
    pub fn brute_force_transversals(&self) -> Result<Vec<AttributeSet>, ScaleGuard> {
        let n = self.vertex_count;
        if n > BRUTE_FORCE_LIMIT {
            return Err(ScaleGuard {
                vertices: n,
                limit: BRUTE_FORCE_LIMIT,
            });
        }
        let masks: Vec<u64> = self
            .edges
            .iter()
            .map(|e| e.iter().fold(0u64, |m, v| m | 1 << v))
            .collect();
        let hits = |s: u64| masks.iter().all(|&e| e & s != 0);
        let mut out: Vec<AttributeSet> = (0..1u64 << n)
            .filter(|&s| hits(s) && (0..n).all(|v| s >> v & 1 == 0 || !hits(s & !(1 << v))))
            .map(|s| AttributeSet::from_mask(n, s))
            .collect();
        out.sort();
        Ok(out)
    }
}

/// Inclusion-minimal members of `sets`, deduplicated and sorted.
pub fn minimal_sets(mut sets: Vec<AttributeSet>) -> Vec<AttributeSet> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut kept: Vec<AttributeSet> = Vec::with_capacity(sets.len());
    for s in sets {
        // everything kept so far is no larger, so only it can be a subset
        if !kept.iter().any(|k| k.is_subset(&s)) {
            kept.push(s);
        }
    }
    kept.sort();
    kept
}

/// Whether no member of `sets` is a proper subset of another.
pub fn is_antichain(sets: &[AttributeSet]) -> bool {
    sets.iter().enumerate().all(|(i, a)| {
        sets.iter()
            .enumerate()
            .all(|(j, b)| i == j || !a.is_subset(b))
    })
}
