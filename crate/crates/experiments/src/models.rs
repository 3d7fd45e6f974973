//! Enumeration of every (ordering, arc subset) pair.
//!
//! Under an ordering, the arc from position `a` to position `b > a` is bit
//! `b * (b - 1) / 2 + a` of the mask, so a node's candidate arcs occupy a
//! contiguous run of bits.

use bmn_core::{Error, Result, Structure};
use itertools::Itertools;

/// Sweeps beyond this many nodes are refused.
pub const MAX_SWEEP_NODES: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSpec {
    /// Original node indices in ordering position.
    pub ordering: Vec<usize>,
    pub bitmask: u64,
}

pub fn arc_count(v: usize) -> usize {
    v * v.saturating_sub(1) / 2
}

pub fn arc_bit(a: usize, b: usize) -> usize {
    debug_assert!(a < b);
    b * (b - 1) / 2 + a
}

impl ModelSpec {
    /// Parent positions of the node at position `b`.
    pub fn parents_of(&self, b: usize) -> Vec<usize> {
        (0..b).filter(|&a| self.bitmask >> arc_bit(a, b) & 1 == 1).collect()
    }

    pub fn is_empty_model(&self) -> bool {
        self.bitmask == 0
    }

    pub fn is_full_model(&self) -> bool {
        self.bitmask == (1u64 << arc_count(self.ordering.len())) - 1
    }

    /// The model as a structure whose node order is this ordering.
    pub fn structure(&self, base: &Structure) -> Result<Structure> {
        crate::reorder(base, &self.ordering, |b| self.parents_of(b))
    }

    /// Parent sets in original node indices, each sorted.
    pub fn parent_sets(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.ordering.len()];
        for (b, &node) in self.ordering.iter().enumerate() {
            let mut ps: Vec<usize> = self.parents_of(b).iter().map(|&a| self.ordering[a]).collect();
            ps.sort_unstable();
            sets[node] = ps;
        }
        sets
    }
}

/// All `V! * 2^(V(V-1)/2)` models: orderings in lexicographic order, and for
/// each ordering every arc mask in increasing order.
pub fn enumerate_models(v: usize) -> Result<impl Iterator<Item = ModelSpec>> {
    if v == 0 || v > MAX_SWEEP_NODES {
        return Err(Error::GuardExceeded {
            what: "sweep nodes",
            value: v as u128,
            limit: MAX_SWEEP_NODES as u128,
        });
    }
    let masks = 1u64 << arc_count(v);
    Ok((0..v).permutations(v).flat_map(move |ordering| {
        (0..masks).map(move |bitmask| ModelSpec {
            ordering: ordering.clone(),
            bitmask,
        })
    }))
}
