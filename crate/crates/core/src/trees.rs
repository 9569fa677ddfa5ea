//! Rooted trees with two leaf types whose inner vertices have `p` child
//! subtrees (fertility `p + 1` counting the edge toward the root).
//!
//! Trees are stored in canonical form: the children of every inner
//! vertex are kept sorted, with noise leaf < initial-condition leaf <
//! inner vertices, inner vertices compared lexicographically by their
//! sorted child lists. Two trees are equal iff their canonical forms are.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A canonical rooted tree. The root itself is implicit: a tree is the
/// subtree hanging below the root edge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RootedTree {
    /// Leaf of type one, a noise insertion.
    Noise,
    /// Leaf of type two, an initial-condition insertion.
    Initial,
    /// Inner vertex with its child subtrees in canonical order.
    Inner(Vec<RootedTree>),
}

/// Combinatorial weight of a canonical tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multiplicity(pub u64);

impl RootedTree {
    /// Inner vertex over the given children, canonicalized.
    pub fn inner(mut children: Vec<RootedTree>) -> Self {
        children.sort();
        RootedTree::Inner(children)
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, RootedTree::Inner(_))
    }

    /// Number of inner vertices.
    pub fn order(&self) -> usize {
        match self {
            RootedTree::Inner(ch) => 1 + ch.iter().map(RootedTree::order).sum::<usize>(),
            _ => 0,
        }
    }

    pub fn noise_leaves(&self) -> usize {
        match self {
            RootedTree::Noise => 1,
            RootedTree::Initial => 0,
            RootedTree::Inner(ch) => ch.iter().map(RootedTree::noise_leaves).sum(),
        }
    }

    pub fn initial_leaves(&self) -> usize {
        match self {
            RootedTree::Noise => 0,
            RootedTree::Initial => 1,
            RootedTree::Inner(ch) => ch.iter().map(RootedTree::initial_leaves).sum(),
        }
    }

    /// Fertility parameter `p`, or `None` for a bare leaf.
    pub fn fertility(&self) -> Option<usize> {
        match self {
            RootedTree::Inner(ch) => Some(ch.len()),
            _ => None,
        }
    }

    /// Checks that every inner vertex has exactly `p` children stored in
    /// canonical order.
    pub fn validate(&self, p: usize) -> Result<()> {
        if let RootedTree::Inner(ch) = self {
            if ch.len() != p {
                return Err(Error::MalformedTree(format!(
                    "inner vertex with {} children, expected {p}",
                    ch.len()
                )));
            }
            if ch.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::MalformedTree("children not in canonical order".into()));
            }
            for c in ch {
                c.validate(p)?;
            }
        }
        Ok(())
    }

    /// Multiplicity of the tree: the product over inner vertices of
    /// `p! / Π_c k_c!`, where `k_c` counts the children of that vertex
    /// in each identical-subtree class.
    ///
    /// Leaf children split into noise and initial classes, and order-`i`
    /// children with identical shapes share a class; when all order-`i`
    /// children of a vertex coincide this is `p!/(n₀′!(n₀−n₀′)!n₁!…)`.
    pub fn multiplicity(&self) -> Multiplicity {
        Multiplicity(self.multiplicity_u64())
    }

    fn multiplicity_u64(&self) -> u64 {
        match self {
            RootedTree::Inner(ch) => {
                let mut m = factorial(ch.len());
                let mut run = 1usize;
                for w in ch.windows(2) {
                    if w[0] == w[1] {
                        run += 1;
                    } else {
                        m /= factorial(run);
                        run = 1;
                    }
                }
                m /= factorial(run);
                ch.iter().fold(m, |acc, c| acc * c.multiplicity_u64())
            }
            _ => 1,
        }
    }

    /// Local multiplicity factor of the vertex adjacent to the root.
    pub fn vertex_multiplicity(&self) -> u64 {
        match self {
            RootedTree::Inner(ch) => {
                let mut m = factorial(ch.len());
                let mut counts: BTreeMap<&RootedTree, usize> = BTreeMap::new();
                for c in ch {
                    *counts.entry(c).or_default() += 1;
                }
                for k in counts.values() {
                    m /= factorial(*k);
                }
                m
            }
            _ => 1,
        }
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

impl fmt::Display for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootedTree::Noise => f.write_str("N"),
            RootedTree::Initial => f.write_str("F"),
            RootedTree::Inner(ch) => {
                f.write_str("(")?;
                for (i, c) in ch.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for RootedTree {
    type Err = Error;

    /// Parses the nested-list encoding, e.g. `(N N (N F N))`.
    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let tree = parse_tree(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::MalformedTree(format!("trailing input in {s:?}")));
        }
        Ok(tree)
    }
}

fn parse_tree(tokens: &[char], pos: &mut usize) -> Result<RootedTree> {
    match tokens.get(*pos) {
        Some('N') => {
            *pos += 1;
            Ok(RootedTree::Noise)
        }
        Some('F') => {
            *pos += 1;
            Ok(RootedTree::Initial)
        }
        Some('(') => {
            *pos += 1;
            let mut children = Vec::new();
            while tokens.get(*pos) != Some(&')') {
                if *pos >= tokens.len() {
                    return Err(Error::MalformedTree("unclosed '('".into()));
                }
                children.push(parse_tree(tokens, pos)?);
            }
            *pos += 1;
            if children.is_empty() {
                return Err(Error::MalformedTree("inner vertex without children".into()));
            }
            Ok(RootedTree::inner(children))
        }
        other => Err(Error::MalformedTree(format!("unexpected token {other:?}"))),
    }
}

/// All canonical trees of order `j` for fertility parameter `p`, each
/// once, paired with its multiplicity. Output is sorted canonically.
///
/// Built recursively: a tree of order `j ≥ 1` is an inner vertex whose
/// `p` children have orders `n_i` times `i` with `Σ n_i = p` and
/// `Σ i·n_i = j − 1`.
pub fn enumerate_trees(j: usize, p: usize) -> Vec<(RootedTree, Multiplicity)> {
    assert!(p >= 1, "fertility parameter must be positive");
    let table = tree_table(j, p);
    table[j].iter().map(|t| (t.clone(), t.multiplicity())).collect()
}

/// Canonical trees for all orders `0..=max_order`.
pub fn tree_table(max_order: usize, p: usize) -> Vec<Vec<RootedTree>> {
    let mut table: Vec<Vec<RootedTree>> = vec![vec![RootedTree::Noise, RootedTree::Initial]];
    for j in 1..=max_order {
        let mut out = Vec::new();
        for orders in order_multisets(p, j - 1) {
            // Group equal child orders and choose a multiset of trees for each.
            let mut groups: Vec<(usize, usize)> = Vec::new();
            for &o in &orders {
                match groups.last_mut() {
                    Some((go, n)) if *go == o => *n += 1,
                    _ => groups.push((o, 1)),
                }
            }
            let mut partial: Vec<Vec<RootedTree>> = vec![Vec::new()];
            for (o, n) in groups {
                let pool = &table[o];
                let mut next = Vec::new();
                for choice in multisets(pool.len(), n) {
                    for prefix in &partial {
                        let mut v = prefix.clone();
                        v.extend(choice.iter().map(|&i| pool[i].clone()));
                        next.push(v);
                    }
                }
                partial = next;
            }
            out.extend(partial.into_iter().map(RootedTree::inner));
        }
        out.sort();
        table.push(out);
    }
    table
}

/// Nondecreasing sequences of `p` orders summing to `total`.
fn order_multisets(p: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(p: usize, total: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p == 0 {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut o = min;
        while o * p <= total {
            cur.push(o);
            rec(p - 1, total - o, o, cur, out);
            cur.pop();
            o += 1;
        }
    }
    let mut out = Vec::new();
    rec(p, total, 0, &mut Vec::new(), &mut out);
    out
}

/// Nondecreasing index sequences of length `k` over `0..n`.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            out.push(cur.clone());
            return;
        }
        for i in min..n {
            cur.push(i);
            rec(n, k - 1, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Splits a tree at the vertex adjacent to the root into its `p` subtrees.
pub fn cut(tree: &RootedTree) -> Result<Vec<RootedTree>> {
    match tree {
        RootedTree::Inner(ch) => Ok(ch.clone()),
        _ => Err(Error::CutLeaf),
    }
}

/// Joins `p` subtrees below a fresh inner vertex adjacent to the root.
pub fn attach(children: Vec<RootedTree>, p: usize) -> Result<RootedTree> {
    if children.len() != p {
        return Err(Error::WrongChildCount { expected: p, got: children.len() });
    }
    Ok(RootedTree::inner(children))
}

/// One line per tree: `order=<j> multiplicity=<M> tree=<encoding>`.
pub fn format_tree_records(trees: &[(RootedTree, Multiplicity)]) -> String {
    trees
        .iter()
        .map(|(t, m)| format!("order={} multiplicity={} tree={}\n", t.order(), m.0, t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf_tree(noise: usize, init: usize) -> RootedTree {
        let mut ch = vec![RootedTree::Noise; noise];
        ch.extend(std::iter::repeat_n(RootedTree::Initial, init));
        RootedTree::inner(ch)
    }

    #[test]
    fn order_zero_has_two_trees() {
        for p in 1..6 {
            let t = enumerate_trees(0, p);
            assert_eq!(t.len(), 2);
            assert!(t.iter().all(|(_, m)| m.0 == 1));
        }
    }

    #[test]
    fn cubic_first_order_table() {
        let t = enumerate_trees(1, 3);
        let mut mults: Vec<u64> = t.iter().map(|(_, m)| m.0).collect();
        mults.sort();
        assert_eq!(mults, vec![1, 1, 3, 3]);
        let find = |tree: &RootedTree| t.iter().find(|(x, _)| x == tree).unwrap().1 .0;
        assert_eq!(find(&leaf_tree(3, 0)), 1);
        assert_eq!(find(&leaf_tree(0, 3)), 1);
        assert_eq!(find(&leaf_tree(2, 1)), 3);
        assert_eq!(find(&leaf_tree(1, 2)), 3);
    }

    #[test]
    fn vertex_multiplicities() {
        assert_eq!(leaf_tree(3, 0).multiplicity().0, 1);
        assert_eq!(leaf_tree(2, 1).multiplicity().0, 3);
        assert_eq!(leaf_tree(2, 0).multiplicity().0, 1);
    }

    #[test]
    fn first_order_multiplicities_sum_to_power_of_two() {
        for p in 1..=4 {
            let total: u64 = enumerate_trees(1, p).iter().map(|(_, m)| m.0).sum();
            assert_eq!(total, 1 << p);
        }
    }

    #[test]
    fn cut_and_attach() {
        let t = leaf_tree(2, 1);
        let pieces = cut(&t).unwrap();
        assert_eq!(pieces, vec![RootedTree::Noise, RootedTree::Noise, RootedTree::Initial]);
        assert_eq!(attach(pieces, 3).unwrap(), t);
        assert!(matches!(cut(&RootedTree::Noise), Err(Error::CutLeaf)));
        assert!(matches!(
            attach(vec![RootedTree::Noise], 3),
            Err(Error::WrongChildCount { expected: 3, got: 1 })
        ));
        assert_eq!(attach(vec![RootedTree::Noise; 3], 3).unwrap(), leaf_tree(3, 0));
    }

    #[test]
    fn cut_pieces_of_order_two_sum_to_one() {
        for p in 1..=3 {
            for (t, _) in enumerate_trees(2, p) {
                let s: usize = cut(&t).unwrap().iter().map(RootedTree::order).sum();
                assert_eq!(s, 1);
            }
        }
    }

    #[test]
    fn encoding_round_trip() {
        for j in 0..=3 {
            for (t, _) in enumerate_trees(j, 3) {
                let s = t.to_string();
                assert_eq!(s.parse::<RootedTree>().unwrap(), t);
            }
        }
        assert!("(N N".parse::<RootedTree>().is_err());
        assert!("()".parse::<RootedTree>().is_err());
        assert!("N N".parse::<RootedTree>().is_err());
    }

    #[test]
    fn canonical_order_puts_leaves_first() {
        let t: RootedTree = "((N N) F N)".parse().unwrap();
        assert_eq!(t.to_string(), "(N F (N N))");
        assert!(t.validate(3).is_err());
        assert!(t.validate(2).is_err() || t.fertility() == Some(3));
        assert!("(N F (N N N))".parse::<RootedTree>().unwrap().validate(3).is_ok());
    }

    #[test]
    fn records_format() {
        let s = format_tree_records(&enumerate_trees(1, 2));
        assert_eq!(s.lines().count(), 3);
        assert!(s.contains("order=1 multiplicity=2 tree=(N F)"));
    }
}
