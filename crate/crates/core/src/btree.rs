//! Dendrograms of marked points in the Bruhat–Tits tree, their
//! combinatorial types, and first Betti numbers of dual semigraphs.
//!
//! A configuration of n ≥ 3 distinct points of P¹ spans a metric tree with
//! n labeled ends. Ends are labeled 0..n−1 by input order. Internal
//! vertices carry the valuation ("depth") of the disc they correspond to,
//! and internal edges carry exact positive lengths (valuation differences),
//! so trees over ramified extensions compare on a common rational scale.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{BigInt, BigRational, One};
use thiserror::Error;

use crate::padic::{normalize_to_standard_triple, val, ExtVal, FieldParams, ProjPoint1};

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum TreeError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("points must be pairwise distinct")]
    PointsNotDistinct,
    #[error("combinatorial enumeration supports 3 ≤ n ≤ 9, got {0}")]
    EnumerationRange(usize),
    #[error("semigraph is not connected")]
    NotConnected,
    #[error("semigraph has no vertices")]
    EmptyGraph,
    #[error("tree carries no depth annotations")]
    NoDepths,
    #[error("no such end label {0}")]
    BadLabel(usize),
    #[error("splits are not pairwise compatible")]
    IncompatibleSplits,
    #[error("invalid split: each side needs at least 2 labels in range")]
    BadSplit,
}

/// A finite metric tree with n labeled ends and trivalent-or-higher
/// internal vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedTree {
    n: usize,
    /// Depth (valuation of the corresponding disc) per internal vertex;
    /// `None` for trees not built from a point configuration.
    depths: Vec<Option<BigRational>>,
    /// Internal edges (vertex, vertex, length > 0).
    edges: Vec<(usize, usize, BigRational)>,
    /// ends[label] = internal vertex the end is attached to.
    ends: Vec<usize>,
}

impl MarkedTree {
    pub fn num_ends(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        self.depths.len()
    }

    pub fn edges(&self) -> &[(usize, usize, BigRational)] {
        &self.edges
    }

    pub fn ends(&self) -> &[usize] {
        &self.ends
    }

    pub fn depth(&self, vertex: usize) -> Option<&BigRational> {
        self.depths.get(vertex).and_then(|d| d.as_ref())
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        // adjacency[v] = (neighbor, edge index)
        let mut adj = vec![Vec::new(); self.num_vertices()];
        for (i, (a, b, _)) in self.edges.iter().enumerate() {
            adj[*a].push((*b, i));
            adj[*b].push((*a, i));
        }
        adj
    }

    /// Valence of an internal vertex: incident internal edges plus ends.
    pub fn valence(&self, vertex: usize) -> usize {
        let from_edges = self
            .edges
            .iter()
            .filter(|(a, b, _)| *a == vertex || *b == vertex)
            .count();
        let from_ends = self.ends.iter().filter(|&&v| v == vertex).count();
        from_edges + from_ends
    }

    /// The depth at which the paths from ends `i` and `j` toward the rest
    /// of the tree separate: the minimal vertex depth on the path between
    /// them. For a dendrogram this equals val(x_i − x_j).
    pub fn merge_depth(&self, i: usize, j: usize) -> Result<BigRational, TreeError> {
        if i >= self.n || j >= self.n || i == j {
            return Err(TreeError::BadLabel(i.max(j)));
        }
        if self.depths.iter().any(|d| d.is_none()) {
            return Err(TreeError::NoDepths);
        }
        let adj = self.adjacency();
        // BFS from the vertex of end i to the vertex of end j.
        let (src, dst) = (self.ends[i], self.ends[j]);
        let mut prev = vec![usize::MAX; self.num_vertices()];
        let mut queue = std::collections::VecDeque::from([src]);
        prev[src] = src;
        while let Some(v) = queue.pop_front() {
            if v == dst {
                break;
            }
            for &(w, _) in &adj[v] {
                if prev[w] == usize::MAX {
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        let mut path_min = self.depths[dst].clone().unwrap();
        let mut v = dst;
        while v != src {
            v = prev[v];
            let d = self.depths[v].clone().unwrap();
            path_min = path_min.min(d);
        }
        Ok(path_min)
    }

    /// Length-free combinatorial type: the set of splits of the end labels
    /// induced by the internal edges.
    pub fn comb_type(&self) -> CombType {
        let adj = self.adjacency();
        let mut splits = Vec::new();
        for (idx, (a, b, _)) in self.edges.iter().enumerate() {
            // Collect ends on the b-side of edge idx.
            let mut seen = vec![false; self.num_vertices()];
            seen[*a] = true;
            let mut stack = vec![*b];
            seen[*b] = true;
            let mut mask = 0u16;
            while let Some(v) = stack.pop() {
                for (lbl, &ev) in self.ends.iter().enumerate() {
                    if ev == v {
                        mask |= 1 << lbl;
                    }
                }
                for &(w, e) in &adj[v] {
                    if e != idx && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            splits.push(CombType::canonical_side(mask, self.n));
        }
        splits.sort_unstable();
        splits.dedup();
        debug_assert_eq!(splits.len(), self.edges.len(), "edges induce distinct splits");
        CombType {
            n: self.n as u8,
            splits,
        }
    }
}

/// The combinatorial type of a marked tree: n plus the set of nontrivial
/// splits, one per internal edge. A tree with labeled ends and no
/// valence-2 vertices is determined by its splits, so equality of types is
/// equality of trees up to label-preserving isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CombType {
    n: u8,
    /// Bitmasks over end labels; canonical side is the one without label 0.
    splits: Vec<u16>,
}

impl CombType {
    fn canonical_side(mask: u16, n: usize) -> u16 {
        let full = (1u16 << n) - 1;
        if mask & 1 != 0 {
            full & !mask
        } else {
            mask
        }
    }

    /// The star tree: one vertex, no internal edges.
    pub fn star(n: usize) -> CombType {
        CombType {
            n: n as u8,
            splits: Vec::new(),
        }
    }

    /// Build a type from explicit splits, each given as the set of labels
    /// on one side. Splits must be pairwise compatible.
    pub fn from_splits(n: usize, sides: &[&[usize]]) -> Result<CombType, TreeError> {
        let mut splits = Vec::new();
        for side in sides {
            let mut mask = 0u16;
            for &l in *side {
                if l >= n {
                    return Err(TreeError::BadSplit);
                }
                mask |= 1 << l;
            }
            let mask = Self::canonical_side(mask, n);
            let size = mask.count_ones() as usize;
            if size < 2 || n - size < 2 {
                return Err(TreeError::BadSplit);
            }
            splits.push(mask);
        }
        splits.sort_unstable();
        splits.dedup();
        // Pairwise compatibility: as 0-free sides, two splits of a common
        // tree are nested or disjoint.
        for (i, a) in splits.iter().enumerate() {
            for b in splits.iter().skip(i + 1) {
                let inter = a & b;
                if inter != 0 && inter != *a && inter != *b {
                    return Err(TreeError::IncompatibleSplits);
                }
            }
        }
        Ok(CombType {
            n: n as u8,
            splits,
        })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Number of internal edges; this is the dimension of the corresponding
    /// cell in the space of tree metrics.
    pub fn dimension(&self) -> usize {
        self.splits.len()
    }

    /// Trivalent everywhere, i.e. of maximal dimension n − 3.
    pub fn is_binary(&self) -> bool {
        self.dimension() == self.n as usize - 3
    }

    pub fn splits(&self) -> Vec<Vec<usize>> {
        self.splits
            .iter()
            .map(|m| (0..self.n()).filter(|l| m & (1 << l) != 0).collect())
            .collect()
    }

    /// Apply a relabeling of the ends: label l becomes perm[l].
    pub fn relabel(&self, perm: &[usize]) -> CombType {
        assert_eq!(perm.len(), self.n());
        let mut splits: Vec<u16> = self
            .splits
            .iter()
            .map(|m| {
                let mut out = 0u16;
                for l in 0..self.n() {
                    if m & (1 << l) != 0 {
                        out |= 1 << perm[l];
                    }
                }
                Self::canonical_side(out, self.n())
            })
            .collect();
        splits.sort_unstable();
        CombType {
            n: self.n,
            splits,
        }
    }
}

impl fmt::Display for CombType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.splits.is_empty() {
            return write!(f, "star");
        }
        let sides = self.splits();
        let parts: Vec<String> = sides
            .iter()
            .map(|side| {
                let labels: Vec<String> = side.iter().map(|l| l.to_string()).collect();
                format!("{{{}}}", labels.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Dendrogram of n ≥ 3 distinct points of P¹: the subtree of the
/// Bruhat–Tits tree spanned by the points, with valence-2 vertices
/// suppressed.
///
/// If no input point is ∞ the configuration is first moved by the Möbius
/// map taking (points[1], points[2], points[0]) to (0, 1, ∞); this is an
/// isometry of the tree, so the combinatorial type and the edge lengths do
/// not depend on the choice.
pub fn build_dendrogram(
    points: &[ProjPoint1],
    params: &FieldParams,
) -> Result<MarkedTree, TreeError> {
    let n = points.len();
    if n < 3 {
        return Err(TreeError::TooFewPoints(n));
    }
    for i in 0..n {
        for j in i + 1..n {
            if points[i] == points[j] {
                return Err(TreeError::PointsNotDistinct);
            }
        }
    }
    // Choose the root end (the one at ∞), normalizing if necessary.
    let root = match points.iter().position(|q| q.is_infinity()) {
        Some(k) => k,
        None => 0,
    };
    let moved: Vec<ProjPoint1> = if points[root].is_infinity() {
        points.to_vec()
    } else {
        let m = normalize_to_standard_triple(&points[1], &points[2], &points[0])
            .map_err(|_| TreeError::PointsNotDistinct)?;
        points.iter().map(|q| m.apply(q)).collect()
    };

    let finite: Vec<(usize, BigRational)> = moved
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != root)
        .map(|(i, q)| (i, q.to_affine().expect("only the root end is at infinity")))
        .collect();

    // Pairwise merge depths val(x_i − x_j), grouped by value.
    let mut by_depth: BTreeMap<BigRational, Vec<(usize, usize)>> = BTreeMap::new();
    for a in 0..finite.len() {
        for b in a + 1..finite.len() {
            let d = &finite[a].1 - &finite[b].1;
            match val(&d, params) {
                ExtVal::Finite(v) => by_depth.entry(v).or_default().push((a, b)),
                ExtVal::Infinity => return Err(TreeError::PointsNotDistinct),
            }
        }
    }

    // Single-linkage merging from the deepest level up. Each cluster is
    // either a single end or a completed subtree hanging at a vertex.
    #[derive(Clone)]
    enum Node {
        End(usize),
        Vertex(usize),
    }
    let m = finite.len();
    let mut uf: Vec<usize> = (0..m).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        let mut c = x;
        while uf[c] != r {
            let next = uf[c];
            uf[c] = r;
            c = next;
        }
        r
    }
    let mut cluster_node: Vec<Node> = (0..m).map(Node::End).collect();
    let mut depths: Vec<Option<BigRational>> = Vec::new();
    let mut edges: Vec<(usize, usize, BigRational)> = Vec::new();
    let mut ends = vec![usize::MAX; n];

    for (depth, pairs) in by_depth.iter().rev() {
        // Group the clusters that meet at this depth.
        let mut groups: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for &(a, b) in pairs {
            let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
            if ra != rb {
                groups
                    .entry(ra.min(rb))
                    .or_insert_with(|| BTreeSet::from([ra.min(rb)]))
                    .insert(ra.max(rb));
            }
        }
        // Transitive closure of the groups formed at this level.
        let mut merged = true;
        while merged {
            merged = false;
            let keys: Vec<usize> = groups.keys().copied().collect();
            'outer: for i in 0..keys.len() {
                for j in i + 1..keys.len() {
                    let disjoint = groups[&keys[i]].is_disjoint(&groups[&keys[j]]);
                    if !disjoint {
                        let other = groups.remove(&keys[j]).unwrap();
                        groups.get_mut(&keys[i]).unwrap().extend(other);
                        merged = true;
                        break 'outer;
                    }
                }
            }
        }
        for (_, members) in groups {
            // Members are union-find roots of clusters meeting at `depth`.
            let vid = depths.len();
            depths.push(Some(depth.clone()));
            let mut first = usize::MAX;
            for &r in &members {
                match &cluster_node[r] {
                    Node::End(e) => {
                        ends[finite[*e].0] = vid;
                    }
                    Node::Vertex(child) => {
                        let child_depth = depths[*child].clone().unwrap();
                        edges.push((vid, *child, child_depth - depth));
                    }
                }
                if first == usize::MAX {
                    first = r;
                } else {
                    uf[r] = first;
                }
            }
            let root_rep = find(&mut uf, first);
            cluster_node[root_rep] = Node::Vertex(vid);
        }
    }

    // All finite points are now one cluster whose vertex takes the ∞ end.
    let top = match &cluster_node[find(&mut uf, 0)] {
        Node::Vertex(v) => *v,
        Node::End(_) => unreachable!("n ≥ 3 forces at least one merge"),
    };
    ends[root] = top;

    let tree = MarkedTree {
        n,
        depths,
        edges,
        ends,
    };
    debug_assert!(
        (0..tree.num_vertices()).all(|v| tree.valence(v) >= 3),
        "dendrogram construction cannot produce valence-2 vertices"
    );
    Ok(tree)
}

/// Convenience: the combinatorial type of a point configuration.
pub fn comb_type_of(
    points: &[ProjPoint1],
    params: &FieldParams,
) -> Result<CombType, TreeError> {
    Ok(build_dendrogram(points, params)?.comb_type())
}

/// (2n−5)!! — the number of trivalent types with n labeled ends.
pub fn binary_count(n: usize) -> Result<BigInt, TreeError> {
    if n < 3 {
        return Err(TreeError::TooFewPoints(n));
    }
    let mut acc = BigInt::one();
    let mut k = 2 * n as i64 - 5;
    while k >= 2 {
        acc *= k;
        k -= 2;
    }
    Ok(acc)
}

/// A tree with labeled leaves used during enumeration. Nodes are either
/// leaves (with a label) or internal; edges are an explicit list.
#[derive(Clone)]
struct EnumTree {
    edges: Vec<(u8, u8)>,
    label: Vec<Option<u8>>, // per node
}

impl EnumTree {
    fn star3() -> EnumTree {
        EnumTree {
            edges: vec![(0, 1), (0, 2), (0, 3)],
            label: vec![None, Some(0), Some(1), Some(2)],
        }
    }

    fn internal_nodes(&self) -> impl Iterator<Item = u8> + '_ {
        self.label
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_none())
            .map(|(i, _)| i as u8)
    }

    /// Attach a new leaf in the middle of edge `e`.
    fn split_edge(&self, e: usize, lbl: u8) -> EnumTree {
        let mut t = self.clone();
        let (a, b) = t.edges[e];
        let mid = t.label.len() as u8;
        t.label.push(None);
        let leaf = t.label.len() as u8;
        t.label.push(Some(lbl));
        t.edges[e] = (a, mid);
        t.edges.push((mid, b));
        t.edges.push((mid, leaf));
        t
    }

    /// Attach a new leaf directly to internal node `v`.
    fn attach_at(&self, v: u8, lbl: u8) -> EnumTree {
        let mut t = self.clone();
        let leaf = t.label.len() as u8;
        t.label.push(Some(lbl));
        t.edges.push((v, leaf));
        t
    }

    fn to_comb_type(&self, n: usize) -> CombType {
        // Splits from internal edges (both endpoints internal).
        let nodes = self.label.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
        for (i, (a, b)) in self.edges.iter().enumerate() {
            adj[*a as usize].push((*b as usize, i));
            adj[*b as usize].push((*a as usize, i));
        }
        let mut splits = Vec::new();
        for (i, (a, b)) in self.edges.iter().enumerate() {
            if self.label[*a as usize].is_some() || self.label[*b as usize].is_some() {
                continue;
            }
            let mut mask = 0u16;
            let mut seen = vec![false; nodes];
            seen[*a as usize] = true;
            seen[*b as usize] = true;
            let mut stack = vec![*b as usize];
            while let Some(v) = stack.pop() {
                if let Some(l) = self.label[v] {
                    mask |= 1 << l;
                }
                for &(w, e) in &adj[v] {
                    if e != i && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            splits.push(CombType::canonical_side(mask, n));
        }
        splits.sort_unstable();
        CombType {
            n: n as u8,
            splits,
        }
    }
}

/// All combinatorial types with n labeled ends, 3 ≤ n ≤ 9, sorted.
///
/// Types are generated by leaf insertion: every tree on n leaves arises
/// from exactly one tree on n−1 leaves by removing leaf n−1, so the
/// recursion is duplicate-free by construction.
pub fn enumerate_comb_types(n: usize) -> Result<Vec<CombType>, TreeError> {
    if !(3..=9).contains(&n) {
        return Err(TreeError::EnumerationRange(n));
    }
    let mut level: Vec<EnumTree> = vec![EnumTree::star3()];
    for next in 3..n {
        let lbl = next as u8;
        let mut out = Vec::new();
        for t in &level {
            for e in 0..t.edges.len() {
                out.push(t.split_edge(e, lbl));
            }
            for v in t.internal_nodes().collect::<Vec<_>>() {
                out.push(t.attach_at(v, lbl));
            }
        }
        level = out;
    }
    let mut types: Vec<CombType> = level.iter().map(|t| t.to_comb_type(n)).collect();
    types.sort_unstable();
    debug_assert!(types.windows(2).all(|w| w[0] != w[1]), "insertion is bijective");
    Ok(types)
}

/// A semigraph: a multigraph (loops allowed) with labeled legs attached to
/// vertices. Legs do not affect the Betti number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Semigraph {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub legs: Vec<(usize, usize)>, // (label, vertex)
}

/// First Betti number b₁ = E − V + 1 of a connected semigraph.
pub fn betti_number(g: &Semigraph) -> Result<usize, TreeError> {
    if g.n_vertices == 0 {
        return Err(TreeError::EmptyGraph);
    }
    let mut uf: Vec<usize> = (0..g.n_vertices).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        uf[x] = r;
        r
    }
    for &(a, b) in &g.edges {
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        if ra != rb {
            uf[ra] = rb;
        }
    }
    let root = find(&mut uf, 0);
    if (1..g.n_vertices).any(|v| find(&mut uf, v) != root) {
        return Err(TreeError::NotConnected);
    }
    Ok(g.edges.len() + 1 - g.n_vertices)
}

/// Does the semigraph witness genus `g`, i.e. b₁ = g?
pub fn is_mumford_tropicalization(g: &Semigraph, genus: usize) -> Result<bool, TreeError> {
    Ok(betti_number(g)? == genus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn ri(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn p5() -> FieldParams {
        FieldParams::qp(5).unwrap()
    }

    fn pts(affine: &[i64], with_inf_at: Option<usize>) -> Vec<ProjPoint1> {
        let mut out: Vec<ProjPoint1> = affine
            .iter()
            .map(|&z| ProjPoint1::from_affine(ri(z)))
            .collect();
        if let Some(k) = with_inf_at {
            out.insert(k, ProjPoint1::infinity());
        }
        out
    }

    #[test]
    fn four_point_types_at_p5() {
        // Points (0, 1, ∞, λ): λ = 5 groups with 0, λ = 6 groups with 1,
        // λ = 2 is equidistant from everything (star).
        let params = p5();
        let t5 = comb_type_of(&pts(&[0, 1, 5], Some(2)), &params).unwrap();
        assert_eq!(t5, CombType::from_splits(4, &[&[1, 2]]).unwrap()); // {0,3}|{1,2}
        let t6 = comb_type_of(&pts(&[0, 1, 6], Some(2)), &params).unwrap();
        assert_eq!(t6, CombType::from_splits(4, &[&[1, 3]]).unwrap()); // {1,6} grouped
        let t2 = comb_type_of(&pts(&[0, 1, 2], Some(2)), &params).unwrap();
        assert_eq!(t2, CombType::star(4));
    }

    #[test]
    fn grouped_pair_edge_has_length_one() {
        let params = p5();
        let tree = build_dendrogram(&pts(&[0, 1, 5], Some(2)), &params).unwrap();
        assert_eq!(tree.num_vertices(), 2);
        assert_eq!(tree.edges().len(), 1);
        assert_eq!(tree.edges()[0].2, ri(1));
        // Deep vertex at val 1 (where 0 and 5 meet), shallow at val 0.
        let depths: Vec<_> = (0..2).map(|v| tree.depth(v).unwrap().clone()).collect();
        assert!(depths.contains(&ri(0)) && depths.contains(&ri(1)));
    }

    #[test]
    fn merge_depth_equals_pairwise_valuation() {
        let params = p5();
        let points = pts(&[0, 1, 5, 26, 30], Some(2));
        let tree = build_dendrogram(&points, &params).unwrap();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let (Some(xi), Some(xj)) = (points[i].to_affine(), points[j].to_affine())
                else {
                    continue;
                };
                let want = match val(&(xi - xj), &params) {
                    ExtVal::Finite(v) => v,
                    ExtVal::Infinity => unreachable!(),
                };
                assert_eq!(tree.merge_depth(i, j).unwrap(), want, "ends {} {}", i, j);
            }
        }
    }

    #[test]
    fn all_finite_configuration_is_normalized_isometrically() {
        // (0, 1, 5, 6) has pairs {0,5} and {1,6} meeting at val 1; without
        // an ∞ end the two trivalent vertices are joined by an edge of
        // length 2 (the path climbs to val 0 and back down).
        let params = p5();
        let tree = build_dendrogram(&pts(&[0, 1, 5, 6], None), &params).unwrap();
        let ty = tree.comb_type();
        assert_eq!(ty, CombType::from_splits(4, &[&[1, 3]]).unwrap());
        assert_eq!(tree.edges().len(), 1);
        assert_eq!(tree.edges()[0].2, ri(2));
    }

    #[test]
    fn five_point_caterpillar() {
        let params = p5();
        // 0 and 5 meet at val 1; 1 and 6 meet at val 1; ∞ separates them.
        let tree = build_dendrogram(&pts(&[0, 1, 5, 6], Some(2)), &params).unwrap();
        let ty = tree.comb_type();
        assert_eq!(
            ty,
            CombType::from_splits(5, &[&[1, 2, 4], &[1, 4]]).unwrap()
        );
        assert!(ty.is_binary());
        assert_eq!(ty.dimension(), 2);
    }

    #[test]
    fn relabeling_equivariance() {
        let params = p5();
        let points = pts(&[0, 1, 5, 26], Some(2));
        let base = comb_type_of(&points, &params).unwrap();
        // Swap ends 0 and 3 (a cyclic shift of the input).
        let perm = [3, 1, 2, 0, 4];
        let permuted: Vec<ProjPoint1> = (0..points.len())
            .map(|new| {
                let old = perm.iter().position(|&q| q == new).unwrap();
                points[old].clone()
            })
            .collect();
        let relabeled = comb_type_of(&permuted, &params).unwrap();
        assert_eq!(relabeled, base.relabel(&perm));
    }

    #[test]
    fn unit_moebius_preserves_type_and_lengths() {
        let params = p5();
        let points = pts(&[0, 1, 5, 26, 7], Some(2));
        let tree = build_dendrogram(&points, &params).unwrap();
        // An integral matrix whose det is a unit fixes the standard vertex
        // and acts by isometries, so type and lengths are preserved.
        let u = crate::padic::Moebius::new(ri(2), ri(3), ri(3), ri(5)).unwrap();
        assert_eq!(val(&u.det(), &params), ExtVal::from_int(0));
        let moved: Vec<ProjPoint1> = points.iter().map(|q| u.apply(q)).collect();
        let tree2 = build_dendrogram(&moved, &params).unwrap();
        assert_eq!(tree.comb_type(), tree2.comb_type());
        let mut l1: Vec<BigRational> = tree.edges().iter().map(|e| e.2.clone()).collect();
        let mut l2: Vec<BigRational> = tree2.edges().iter().map(|e| e.2.clone()).collect();
        l1.sort();
        l2.sort();
        assert_eq!(l1, l2);
    }

    #[test]
    fn duplicate_points_rejected() {
        let params = p5();
        assert_eq!(
            build_dendrogram(&pts(&[0, 1, 1], Some(0)), &params),
            Err(TreeError::PointsNotDistinct)
        );
        assert_eq!(
            build_dendrogram(&pts(&[0, 1], None), &params),
            Err(TreeError::TooFewPoints(2))
        );
    }

    #[test]
    fn enumeration_counts_small_n() {
        let t3 = enumerate_comb_types(3).unwrap();
        assert_eq!(t3.len(), 1);
        assert_eq!(t3[0], CombType::star(3));

        let t4 = enumerate_comb_types(4).unwrap();
        assert_eq!(t4.len(), 4);
        assert_eq!(t4.iter().filter(|t| t.is_binary()).count(), 3);
        assert_eq!(t4.iter().filter(|t| t.dimension() == 0).count(), 1);

        let t5 = enumerate_comb_types(5).unwrap();
        assert_eq!(t5.len(), 26);
        assert_eq!(t5.iter().filter(|t| t.is_binary()).count(), 15);
        assert_eq!(t5.iter().filter(|t| t.dimension() == 1).count(), 10);
        assert_eq!(t5.iter().filter(|t| t.dimension() == 0).count(), 1);

        assert_eq!(enumerate_comb_types(6).unwrap().len(), 236);
        assert!(enumerate_comb_types(2).is_err());
        assert!(enumerate_comb_types(10).is_err());
    }

    #[test]
    fn enumeration_matches_double_factorial() {
        for n in 3..=8 {
            let types = enumerate_comb_types(n).unwrap();
            let binary = types.iter().filter(|t| t.is_binary()).count();
            assert_eq!(
                BigInt::from(binary),
                binary_count(n).unwrap(),
                "n = {}",
                n
            );
        }
    }

    #[test]
    fn enumeration_n9_total() {
        assert_eq!(enumerate_comb_types(9).unwrap().len(), 660032);
    }

    #[test]
    fn binary_count_values() {
        let want = [1i64, 3, 15, 105, 945, 10395];
        for (i, w) in want.iter().enumerate() {
            assert_eq!(binary_count(i + 3).unwrap(), BigInt::from(*w));
        }
    }

    #[test]
    fn betti_numbers_of_small_graphs() {
        // A path on 4 vertices is a tree.
        let path = Semigraph {
            n_vertices: 4,
            edges: vec![(0, 1), (1, 2), (2, 3)],
            legs: vec![(0, 0), (1, 3)],
        };
        assert_eq!(betti_number(&path).unwrap(), 0);
        // Theta graph: two vertices, three parallel edges.
        let theta = Semigraph {
            n_vertices: 2,
            edges: vec![(0, 1), (0, 1), (0, 1)],
            legs: vec![],
        };
        assert_eq!(betti_number(&theta).unwrap(), 2);
        assert!(is_mumford_tropicalization(&theta, 2).unwrap());
        assert!(!is_mumford_tropicalization(&theta, 1).unwrap());
        // A single loop.
        let loop1 = Semigraph {
            n_vertices: 1,
            edges: vec![(0, 0)],
            legs: vec![(0, 0)],
        };
        assert_eq!(betti_number(&loop1).unwrap(), 1);
        let split = Semigraph {
            n_vertices: 2,
            edges: vec![],
            legs: vec![],
        };
        assert_eq!(betti_number(&split), Err(TreeError::NotConnected));
    }

    #[test]
    fn comb_type_display_and_splits() {
        let ty = CombType::from_splits(4, &[&[1, 2]]).unwrap();
        assert_eq!(ty.to_string(), "{1,2}");
        assert_eq!(CombType::star(4).to_string(), "star");
        assert_eq!(ty.splits(), vec![vec![1, 2]]);
        // A side containing label 0 is stored as its complement.
        let same = CombType::from_splits(4, &[&[0, 3]]).unwrap();
        assert_eq!(ty, same);
        assert!(CombType::from_splits(4, &[&[1]]).is_err());
        assert!(CombType::from_splits(5, &[&[1, 2], &[2, 3]]).is_err());
    }
}
