//! Generalized Parisi-Wu graphs: `n` rooted trees whose noise leaves are
//! grouped into empty vertices by a set partition.
//!
//! A graph is stored as the pair (tree tuple, partition of the global
//! noise-leaf list). The global list enumerates the noise leaves of tree
//! 0, then tree 1, …, each tree in depth-first order over its canonical
//! children. Adjacency is derived on demand by [`simplify`].

use std::fmt;

use crate::error::{Error, Result};
use crate::trees::{tree_table, RootedTree};

/// A graph of order `m = Σ order(T_k)` with `n` roots.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PWGraph {
    trees: Vec<RootedTree>,
    blocks: Vec<Vec<usize>>,
}

impl PWGraph {
    /// Builds a graph, normalizing block order (each block sorted, blocks
    /// sorted by their smallest leaf) and checking that the blocks
    /// partition the noise leaves.
    pub fn new(trees: Vec<RootedTree>, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::MalformedGraph("a graph needs at least one root".into()));
        }
        let leaves: usize = trees.iter().map(RootedTree::noise_leaves).sum();
        let mut seen = vec![false; leaves];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::MalformedGraph("empty block".into()));
            }
            b.sort_unstable();
            for &i in b.iter() {
                if i >= leaves || seen[i] {
                    return Err(Error::MalformedGraph(format!(
                        "noise leaf {i} not of degree 2 (missing, repeated or out of range)"
                    )));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::MalformedGraph(format!("noise leaf {i} is not in any block")));
        }
        blocks.sort();
        Ok(PWGraph { trees, blocks })
    }

    pub fn trees(&self) -> &[RootedTree] {
        &self.trees
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn roots(&self) -> usize {
        self.trees.len()
    }

    pub fn order(&self) -> usize {
        self.trees.iter().map(RootedTree::order).sum()
    }

    /// Product of the tree multiplicities.
    pub fn multiplicity(&self) -> u64 {
        self.trees.iter().map(|t| t.multiplicity().0).product()
    }

    pub fn has_initial_leaf(&self) -> bool {
        self.trees.iter().any(|t| t.initial_leaves() > 0)
    }

    /// Sizes of the blocks, i.e. the leg counts of the empty vertices.
    pub fn leg_counts(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Index of the tree owning each global noise leaf.
    fn leaf_owner(&self) -> Vec<usize> {
        self.trees
            .iter()
            .enumerate()
            .flat_map(|(k, t)| std::iter::repeat_n(k, t.noise_leaves()))
            .collect()
    }

    /// Classes of the root relation: two roots are related when their
    /// trees share an empty vertex (transitively closed).
    pub fn root_classes(&self) -> Vec<Vec<usize>> {
        let owner = self.leaf_owner();
        let mut uf = UnionFind::new(self.trees.len());
        for b in &self.blocks {
            for w in b.windows(2) {
                uf.union(owner[w[0]], owner[w[1]]);
            }
        }
        uf.classes()
    }

    pub fn is_connected(&self) -> bool {
        self.root_classes().len() == 1
    }

    /// Whether some empty vertex has an odd number of legs.
    pub fn has_odd_block(&self) -> bool {
        self.blocks.iter().any(|b| b.len() % 2 == 1)
    }

    /// Whether some empty vertex with at least two legs has all of them
    /// attached to the same inner vertex.
    pub fn has_tadpole(&self) -> bool {
        simplify(self).map(|s| s.has_tadpole()).unwrap_or(false)
    }
}

impl fmt::Display for PWGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let trees: Vec<String> = self.trees.iter().map(ToString::to_string).collect();
        let blocks: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let v: Vec<String> = b.iter().map(ToString::to_string).collect();
                format!("{{{}}}", v.join(","))
            })
            .collect();
        let legs: Vec<String> = self.leg_counts().iter().map(ToString::to_string).collect();
        write!(
            f,
            "order={} multiplicity={} trees=[{}] blocks=[{}] legs=[{}] connected={} tadpole={}",
            self.order(),
            self.multiplicity(),
            trees.join(", "),
            blocks.join(" "),
            legs.join(","),
            self.is_connected(),
            self.has_tadpole()
        )
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Classes sorted by smallest member, members ascending.
    fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_rep: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_rep[r].push(i);
        }
        let mut out: Vec<Vec<usize>> = by_rep.into_iter().filter(|c| !c.is_empty()).collect();
        out.sort();
        out
    }
}

/// All set partitions of `{0, …, n−1}`, generated from restricted growth
/// strings. Blocks are ascending and ordered by smallest element.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, rgs: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            let k = rgs.iter().copied().max().map_or(0, |m| m + 1);
            let mut blocks = vec![Vec::new(); k];
            for (e, &b) in rgs.iter().enumerate() {
                blocks[b].push(e);
            }
            out.push(blocks);
            return;
        }
        let limit = if i == 0 { 0 } else { max + 1 };
        for b in 0..=limit {
            rgs.push(b);
            rec(i + 1, n, rgs, max.max(b), out);
            rgs.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::with_capacity(n), 0, &mut out);
    out
}

/// Ordered tuples of `n` nonnegative orders summing to `m`.
pub fn order_compositions(m: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return if m == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=m {
        for mut rest in order_compositions(m - first, n - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All tuples of canonical trees with orders summing to `m`.
pub fn tree_tuples(m: usize, n: usize, p: usize, equilibrium_only: bool) -> Vec<Vec<RootedTree>> {
    let table = tree_table(m, p);
    let mut out = Vec::new();
    for orders in order_compositions(m, n) {
        let mut partial: Vec<Vec<RootedTree>> = vec![Vec::new()];
        for &o in &orders {
            let pool: Vec<&RootedTree> = table[o]
                .iter()
                .filter(|t| !equilibrium_only || t.initial_leaves() == 0)
                .collect();
            partial = partial
                .into_iter()
                .flat_map(|prefix| {
                    pool.iter().map(move |t| {
                        let mut v = prefix.clone();
                        v.push((*t).clone());
                        v
                    })
                })
                .collect();
        }
        out.extend(partial);
    }
    out
}

/// Every (tree tuple, noise-leaf partition) pair of order `m` with `n`
/// roots, each exactly once. With `equilibrium_only`, trees carrying an
/// initial-condition leaf are excluded.
pub fn enumerate_graphs(m: usize, n: usize, p: usize, equilibrium_only: bool) -> Vec<PWGraph> {
    assert!(n >= 1, "a graph needs at least one root");
    let mut out = Vec::new();
    for trees in tree_tuples(m, n, p, equilibrium_only) {
        let leaves: usize = trees.iter().map(RootedTree::noise_leaves).sum();
        for blocks in set_partitions(leaves) {
            out.push(PWGraph { trees: trees.clone(), blocks });
        }
    }
    out
}

pub fn filter_connected(gs: Vec<PWGraph>) -> Vec<PWGraph> {
    gs.into_iter().filter(PWGraph::is_connected).collect()
}

/// Removes graphs with an odd-leg empty vertex; these vanish whenever
/// all odd cumulants vanish.
pub fn prune_odd(gs: Vec<PWGraph>) -> Vec<PWGraph> {
    gs.into_iter().filter(|g| !g.has_odd_block()).collect()
}

pub fn drop_tadpoles(gs: Vec<PWGraph>) -> Vec<PWGraph> {
    gs.into_iter().filter(|g| !g.has_tadpole()).collect()
}

/// Splits a graph into its root classes and the induced connected
/// subgraphs (leaf indices renumbered within each subgraph).
pub fn decompose_components(g: &PWGraph) -> (Vec<Vec<usize>>, Vec<PWGraph>) {
    let classes = g.root_classes();
    let owner = g.leaf_owner();
    let offsets = leaf_offsets(&g.trees);
    let mut parts = Vec::with_capacity(classes.len());
    for class in &classes {
        let trees: Vec<RootedTree> = class.iter().map(|&k| g.trees[k].clone()).collect();
        // Map a global leaf index of g to the subgraph's global index.
        let mut local_offset = vec![usize::MAX; g.trees.len()];
        let mut acc = 0;
        for &k in class {
            local_offset[k] = acc;
            acc += g.trees[k].noise_leaves();
        }
        let blocks: Vec<Vec<usize>> = g
            .blocks
            .iter()
            .filter(|b| class.contains(&owner[b[0]]))
            .map(|b| b.iter().map(|&i| local_offset[owner[i]] + i - offsets[owner[i]]).collect())
            .collect();
        parts.push(PWGraph::new(trees, blocks).expect("induced subgraph is well formed"));
    }
    (classes, parts)
}

/// Inverse of [`decompose_components`]: places the parts' trees at the
/// root positions given by `classes` and merges their partitions.
pub fn reassemble(classes: &[Vec<usize>], parts: &[PWGraph]) -> Result<PWGraph> {
    if classes.len() != parts.len() {
        return Err(Error::MalformedGraph("class/part count mismatch".into()));
    }
    let n: usize = classes.iter().map(Vec::len).sum();
    let mut slots: Vec<Option<(usize, usize)>> = vec![None; n];
    for (c, class) in classes.iter().enumerate() {
        if class.len() != parts[c].roots() {
            return Err(Error::MalformedGraph("class size differs from part roots".into()));
        }
        for (j, &k) in class.iter().enumerate() {
            if k >= n || slots[k].is_some() {
                return Err(Error::MalformedGraph("classes do not partition the roots".into()));
            }
            slots[k] = Some((c, j));
        }
    }
    let slots: Vec<(usize, usize)> = slots.into_iter().map(|s| s.expect("filled")).collect();
    let trees: Vec<RootedTree> = slots.iter().map(|&(c, j)| parts[c].trees[j].clone()).collect();
    let offsets = leaf_offsets(&trees);
    let mut blocks = Vec::new();
    for (c, class) in classes.iter().enumerate() {
        let part = &parts[c];
        let part_owner = part.leaf_owner();
        let part_offsets = leaf_offsets(&part.trees);
        for b in &part.blocks {
            blocks.push(
                b.iter()
                    .map(|&i| {
                        let j = part_owner[i];
                        offsets[class[j]] + i - part_offsets[j]
                    })
                    .collect(),
            );
        }
    }
    PWGraph::new(trees, blocks)
}

fn leaf_offsets(trees: &[RootedTree]) -> Vec<usize> {
    let mut acc = 0;
    trees
        .iter()
        .map(|t| {
            let o = acc;
            acc += t.noise_leaves();
            o
        })
        .collect()
}

/// Vertex kinds of a simplified graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vertex {
    /// External root `k`, fixed at the evaluation point.
    Root(usize),
    /// Tree inner vertex with its local multiplicity factor.
    Inner { multiplicity: u64 },
    /// Empty vertex carrying the cumulant of order `legs`.
    Empty { legs: usize },
    /// Initial-condition leaf, evaluated at time zero.
    InitialLeaf,
}

/// A graph after each noise leaf and its two edges have been replaced by
/// one edge. Edges run parent → child (toward later integration), so an
/// empty vertex appears as the child of every vertex one of its legs
/// comes from; parallel edges are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplifiedGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(usize, usize)>,
}

impl SimplifiedGraph {
    pub fn roots(&self) -> usize {
        self.vertices.iter().filter(|v| matches!(v, Vertex::Root(_))).count()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        self.edges.iter().filter(|&&(_, b)| b == v).map(|&(a, _)| a).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        self.edges.iter().filter(|&&(a, _)| a == v).map(|&(_, b)| b).collect()
    }

    pub fn has_initial_leaf(&self) -> bool {
        self.vertices.contains(&Vertex::InitialLeaf)
    }

    /// Product of the inner-vertex multiplicities.
    pub fn multiplicity(&self) -> u64 {
        self.vertices
            .iter()
            .map(|v| match v {
                Vertex::Inner { multiplicity } => *multiplicity,
                _ => 1,
            })
            .product()
    }

    pub fn leg_counts(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .filter_map(|v| match v {
                Vertex::Empty { legs } => Some(*legs),
                _ => None,
            })
            .collect()
    }

    pub fn has_odd_empty_vertex(&self) -> bool {
        self.leg_counts().iter().any(|l| l % 2 == 1)
    }

    /// An empty vertex with at least two legs, all from one inner vertex.
    pub fn is_tadpole_vertex(&self, v: usize) -> bool {
        match self.vertices[v] {
            Vertex::Empty { legs } if legs >= 2 => {
                let parents = self.parents(v);
                parents.windows(2).all(|w| w[0] == w[1])
                    && matches!(self.vertices[parents[0]], Vertex::Inner { .. })
            }
            _ => false,
        }
    }

    pub fn has_tadpole(&self) -> bool {
        (0..self.vertices.len()).any(|v| self.is_tadpole_vertex(v))
    }

    /// Connectivity of the underlying undirected multigraph.
    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.vertices.len());
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        uf.classes().len() <= 1
    }
}

/// Contracts every noise leaf into a single edge between its parent
/// (root or inner vertex) and its empty vertex.
pub fn simplify(g: &PWGraph) -> Result<SimplifiedGraph> {
    // Re-validate: each noise leaf must sit in exactly one block.
    let g = PWGraph::new(g.trees.clone(), g.blocks.clone())?;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    // Parent vertex of each global noise leaf, in global order.
    let mut leaf_parent = Vec::new();

    fn walk(
        t: &RootedTree,
        parent: usize,
        vertices: &mut Vec<Vertex>,
        edges: &mut Vec<(usize, usize)>,
        leaf_parent: &mut Vec<usize>,
    ) {
        match t {
            RootedTree::Noise => leaf_parent.push(parent),
            RootedTree::Initial => {
                vertices.push(Vertex::InitialLeaf);
                edges.push((parent, vertices.len() - 1));
            }
            RootedTree::Inner(children) => {
                vertices.push(Vertex::Inner { multiplicity: t.vertex_multiplicity() });
                let me = vertices.len() - 1;
                edges.push((parent, me));
                for c in children {
                    walk(c, me, vertices, edges, leaf_parent);
                }
            }
        }
    }

    for (k, t) in g.trees.iter().enumerate() {
        vertices.push(Vertex::Root(k));
        let root = vertices.len() - 1;
        walk(t, root, &mut vertices, &mut edges, &mut leaf_parent);
    }
    for b in &g.blocks {
        vertices.push(Vertex::Empty { legs: b.len() });
        let e = vertices.len() - 1;
        for &leaf in b {
            edges.push((leaf_parent[leaf], e));
        }
    }
    Ok(SimplifiedGraph { vertices, edges })
}

/// Number of edges of the unsimplified graph: tree edges plus one edge
/// from each noise leaf to its empty vertex.
pub fn unsimplified_edge_count(g: &PWGraph) -> usize {
    fn tree_edges(t: &RootedTree) -> usize {
        match t {
            RootedTree::Inner(ch) => 1 + ch.iter().map(tree_edges).sum::<usize>(),
            _ => 1,
        }
    }
    let noise: usize = g.trees.iter().map(RootedTree::noise_leaves).sum();
    g.trees.iter().map(tree_edges).sum::<usize>() + noise
}

/// One line per graph in the structured text format.
pub fn format_graph_records(gs: &[PWGraph]) -> String {
    gs.iter().map(|g| format!("{g}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bell numbers from the Bell triangle, independent of the generator.
    fn bell(n: usize) -> usize {
        let mut row = vec![1usize];
        for _ in 0..n {
            let mut next = vec![*row.last().unwrap()];
            for &x in &row {
                let v = *next.last().unwrap() + x;
                next.push(v);
            }
            row = next;
        }
        row[0]
    }

    #[test]
    fn partitions_match_bell_numbers() {
        for n in 0..=7 {
            assert_eq!(set_partitions(n).len(), bell(n), "n = {n}");
        }
        assert_eq!(bell(5), 52);
    }

    #[test]
    fn partitions_are_distinct_and_cover() {
        let ps = set_partitions(4);
        let mut sorted = ps.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ps.len());
        for p in ps {
            let mut all: Vec<usize> = p.concat();
            all.sort();
            assert_eq!(all, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn zeroth_order_two_point_graphs() {
        assert_eq!(enumerate_graphs(0, 2, 3, false).len(), 5);
        let eq = enumerate_graphs(0, 2, 3, true);
        assert_eq!(eq.len(), 2);
        let connected = filter_connected(eq);
        assert_eq!(connected.len(), 1);
        assert_eq!(connected[0].blocks(), &[vec![0, 1]]);
        assert_eq!(enumerate_graphs(0, 1, 3, false).len(), 2);
    }

    #[test]
    fn first_order_equilibrium_even_connected_graphs() {
        let gs = prune_odd(filter_connected(enumerate_graphs(1, 2, 3, true)));
        assert_eq!(gs.len(), 8);
        let tadpoles = gs.iter().filter(|g| g.has_tadpole()).count();
        assert_eq!(tadpoles, 6);
        let melons = drop_tadpoles(gs);
        assert_eq!(melons.len(), 2);
        for g in &melons {
            assert_eq!(g.leg_counts(), vec![4]);
        }
    }

    #[test]
    fn simplify_joint_block_graph() {
        let g = PWGraph::new(vec![RootedTree::Noise, RootedTree::Noise], vec![vec![0, 1]]).unwrap();
        let s = simplify(&g).unwrap();
        assert_eq!(s.vertices, vec![Vertex::Root(0), Vertex::Root(1), Vertex::Empty { legs: 2 }]);
        assert_eq!(s.edges, vec![(0, 2), (1, 2)]);
        assert!(s.is_connected());
    }

    #[test]
    fn simplify_removes_one_edge_per_noise_leaf() {
        for g in enumerate_graphs(1, 2, 3, false) {
            let s = simplify(&g).unwrap();
            let noise: usize = g.trees().iter().map(RootedTree::noise_leaves).sum();
            assert_eq!(s.edges.len(), unsimplified_edge_count(&g) - noise);
            assert_eq!(s.is_connected(), g.is_connected());
            for (v, kind) in s.vertices.iter().enumerate() {
                match kind {
                    Vertex::Inner { .. } => assert_eq!(s.degree(v), 4),
                    Vertex::Root(_) => assert_eq!(s.degree(v), 1),
                    Vertex::Empty { legs } => assert_eq!(s.degree(v), *legs),
                    Vertex::InitialLeaf => assert_eq!(s.degree(v), 1),
                }
            }
        }
    }

    #[test]
    fn malformed_partitions_rejected() {
        let t = vec![RootedTree::Noise, RootedTree::Noise];
        assert!(PWGraph::new(t.clone(), vec![vec![0]]).is_err());
        assert!(PWGraph::new(t.clone(), vec![vec![0, 0, 1]]).is_err());
        assert!(PWGraph::new(t.clone(), vec![vec![0, 1], vec![]]).is_err());
        assert!(PWGraph::new(t, vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn decomposition_of_disjoint_union() {
        let g = PWGraph::new(
            vec![RootedTree::Noise, RootedTree::Noise],
            vec![vec![0], vec![1]],
        )
        .unwrap();
        let (classes, parts) = decompose_components(&g);
        assert_eq!(classes, vec![vec![0], vec![1]]);
        assert_eq!(parts.len(), 2);
        assert_eq!(reassemble(&classes, &parts).unwrap(), g);
    }

    #[test]
    fn odd_pruning() {
        let g = PWGraph::new(vec![RootedTree::Noise; 3], vec![vec![0, 1, 2]]).unwrap();
        assert!(prune_odd(vec![g]).is_empty());
        let g = PWGraph::new(vec![RootedTree::Noise; 2], vec![vec![0, 1]]).unwrap();
        assert_eq!(prune_odd(vec![g.clone()]), vec![g]);
    }

    #[test]
    fn display_is_stable() {
        let g = PWGraph::new(vec![RootedTree::Noise, RootedTree::Noise], vec![vec![1, 0]]).unwrap();
        assert_eq!(
            g.to_string(),
            "order=0 multiplicity=1 trees=[N, N] blocks=[{0,1}] legs=[2] connected=true tadpole=false"
        );
    }
}
