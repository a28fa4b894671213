use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::NetworkCase;

/// Three buses pairwise joined by in-service branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Triangle {
    /// Internal bus indices, strictly increasing.
    pub buses: [usize; 3],
    /// First branch realizing each of the pairs `(i,j)`, `(i,k)`, `(j,k)`.
    pub branch_ids: [usize; 3],
}

impl Triangle {
    /// Unordered bus pairs of the triangle, in `(i,j)`, `(i,k)`, `(j,k)` order.
    pub fn pairs(&self) -> [(usize, usize); 3] {
        let [i, j, k] = self.buses;
        [(i, j), (i, k), (j, k)]
    }
}

/// Lowest in-service branch index spanning each unordered bus pair, keyed `(min, max)`.
pub fn branch_pairs(case: &NetworkCase) -> BTreeMap<(usize, usize), usize> {
    let mut pairs = BTreeMap::new();
    for (id, br) in case.active_branches() {
        let key = (br.from_bus.min(br.to_bus), br.from_bus.max(br.to_bus));
        pairs.entry(key).or_insert(id);
    }
    pairs
}

/// All 3-cycles of the in-service branch graph, sorted lexicographically by bus triple.
pub fn enumerate_triangles(case: &NetworkCase) -> Vec<Triangle> {
    let pairs = branch_pairs(case);
    let mut higher: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); case.n_buses()];
    for &(a, b) in pairs.keys() {
        higher[a].insert(b);
    }

    let mut out = Vec::new();
    for (i, nbrs) in higher.iter().enumerate() {
        for &j in nbrs {
            for &k in higher[j].intersection(nbrs) {
                out.push(Triangle {
                    buses: [i, j, k],
                    branch_ids: [pairs[&(i, j)], pairs[&(i, k)], pairs[&(j, k)]],
                });
            }
        }
    }
    out
}
