use std::fmt;

use num_bigint::BigInt;

use super::product::{ProductSpec, SignTable};
use super::CorrelatorError;
use crate::algebra::{falling_factorial, PPoly};
use crate::partition::for_each_set_partition;

/// A perfect pairing of string positions. Pairs are `(i, j)` with `i < j`,
/// sorted by `i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    /// Sorts the pairs; panics if they do not form a perfect matching of `0..2k`.
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        let mut pairs: Vec<_> = pairs
            .into_iter()
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        pairs.sort_unstable();
        let mut seen = vec![false; 2 * pairs.len()];
        for &(a, b) in &pairs {
            assert!(
                a != b && b < seen.len(),
                "not a perfect matching: {pairs:?}"
            );
            assert!(!seen[a] && !seen[b], "position reused: {pairs:?}");
            seen[a] = true;
            seen[b] = true;
        }
        Matching { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn crossing_count(&self) -> usize {
        crossing_edges(self).edges.len()
    }
}

impl fmt::Display for Matching {
    /// One-based positions, e.g. `{(1,4),(2,3)}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, (a, b)) in self.pairs.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "({},{})", a + 1, b + 1)?;
        }
        f.write_str("}")
    }
}

/// All admissible perfect matchings of `product`, in lexicographic order.
pub fn enumerate_matchings(product: &ProductSpec) -> Vec<Matching> {
    let n = product.len();
    let mut out = Vec::new();
    if n % 2 == 1 {
        return out;
    }
    let mut used = vec![false; n];
    let mut pairs = Vec::with_capacity(n / 2);
    extend_matchings(product, &mut used, &mut pairs, &mut out);
    out
}

fn extend_matchings(
    product: &ProductSpec,
    used: &mut [bool],
    pairs: &mut Vec<(usize, usize)>,
    out: &mut Vec<Matching>,
) {
    let Some(i) = used.iter().position(|u| !u) else {
        out.push(Matching {
            pairs: pairs.clone(),
        });
        return;
    };
    used[i] = true;
    for j in i + 1..used.len() {
        if used[j] || !product.admissible(i, j) {
            continue;
        }
        used[j] = true;
        pairs.push((i, j));
        extend_matchings(product, used, pairs, out);
        pairs.pop();
        used[j] = false;
    }
    used[i] = false;
}

/// Vertices are the pairs of a matching; two vertices are adjacent when their
/// intervals interleave.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingGraph {
    pairs: Vec<(usize, usize)>,
    fields: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl CrossingGraph {
    /// Tags each vertex with the field its pair contracts.
    pub fn for_product(product: &ProductSpec, m: &Matching) -> Self {
        let mut g = crossing_edges(m);
        g.fields = m
            .pairs
            .iter()
            .map(|&(i, _)| product.insertions()[i].field)
            .collect();
        g
    }

    /// Graph with explicit vertices and edges; every vertex belongs to field 0.
    pub fn from_edges(vertices: usize, edges: Vec<(usize, usize)>) -> Self {
        CrossingGraph {
            pairs: (0..vertices).map(|v| (2 * v, 2 * v + 1)).collect(),
            fields: vec![0; vertices],
            edges,
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn fields(&self) -> &[usize] {
        &self.fields
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.pairs.len()
    }
}

pub fn crossing_edges(m: &Matching) -> CrossingGraph {
    let pairs = m.pairs.clone();
    let mut edges = Vec::new();
    for (u, &(i, j)) in pairs.iter().enumerate() {
        for (v, &(k, l)) in pairs.iter().enumerate().skip(u + 1) {
            if (i < k && k < j && j < l) || (k < i && i < l && l < j) {
                edges.push((u, v));
            }
        }
    }
    CrossingGraph {
        fields: vec![0; pairs.len()],
        pairs,
        edges,
    }
}

/// An edge of a crossing graph with the signs it contributes when its
/// endpoints share a Green index or not.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedEdge {
    pub u: usize,
    pub v: usize,
    pub same: i32,
    pub different: i32,
}

/// Restrictions on which graph vertices may share a Green index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockConstraints {
    /// Vertex pairs forced into one block.
    pub same: Vec<(usize, usize)>,
    /// Vertex pairs forced into different blocks.
    pub distinct: Vec<(usize, usize)>,
}

impl BlockConstraints {
    pub fn is_empty(&self) -> bool {
        self.same.is_empty() && self.distinct.is_empty()
    }

    fn allows(&self, labels: &[usize]) -> bool {
        self.same.iter().all(|&(a, b)| labels[a] == labels[b])
            && self.distinct.iter().all(|&(a, b)| labels[a] != labels[b])
    }
}

/// Sum over set partitions of the vertices of `falling_factorial(#blocks)`
/// times the product of edge signs.
///
/// A set partition with `b` blocks stands for the `p (p−1) … (p−b+1)`
/// assignments of distinct Green indices to its blocks, so this is the sum
/// over all index assignments with `p` left symbolic.
pub fn partition_sum(
    vertices: usize,
    edges: &[SignedEdge],
    constraints: &BlockConstraints,
) -> PPoly {
    let mut by_blocks = vec![0i128; vertices + 1];
    for_each_set_partition(vertices, |labels, blocks| {
        if !constraints.allows(labels) {
            return;
        }
        let negative = edges
            .iter()
            .filter(|e| {
                let s = if labels[e.u] == labels[e.v] {
                    e.same
                } else {
                    e.different
                };
                s < 0
            })
            .count();
        by_blocks[blocks] += if negative % 2 == 0 { 1 } else { -1 };
    });
    let mut acc = PPoly::zero();
    for (b, &c) in by_blocks.iter().enumerate() {
        if c != 0 {
            acc += &falling_factorial(b).scale(BigInt::from(c));
        }
    }
    acc
}

pub(crate) fn signed_edges(
    g: &CrossingGraph,
    signs: &SignTable,
) -> Result<Vec<SignedEdge>, CorrelatorError> {
    g.edges
        .iter()
        .map(|&(u, v)| {
            let (same, different) = signs.pair(g.fields[u], g.fields[v])?;
            Ok(SignedEdge {
                u,
                v,
                same,
                different,
            })
        })
        .collect()
}

/// Green-index weight of one matching, as a polynomial in `p`.
pub fn matching_coefficient(
    g: &CrossingGraph,
    signs: &SignTable,
) -> Result<PPoly, CorrelatorError> {
    let edges = signed_edges(g, signs)?;
    Ok(partition_sum(
        g.vertex_count(),
        &edges,
        &BlockConstraints::default(),
    ))
}
