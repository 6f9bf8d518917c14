use std::ops::Range;

use super::{Coalition, ExplainError, ValueFunction};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub span: Range<usize>,
    /// Indices of the left and right child; `None` for leaves.
    pub children: Option<(usize, usize)>,
}

/// Binary hierarchy of contiguous token spans; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionTree {
    nodes: Vec<TreeNode>,
}

impl CoalitionTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes[0].span.end
    }

    pub fn depth(&self) -> usize {
        fn go(t: &CoalitionTree, i: usize) -> usize {
            match t.nodes[i].children {
                None => 0,
                Some((l, r)) => 1 + go(t, l).max(go(t, r)),
            }
        }
        go(self, 0)
    }
}

/// Balanced tree over `0..n`: a span `[a, b)` splits at `ceil((a + b) / 2)`.
///
/// # Panics
/// If `n == 0`.
pub fn build_partition_tree(n: usize) -> CoalitionTree {
    assert!(n >= 1, "a partition tree needs at least one token");
    let mut nodes = vec![TreeNode {
        span: 0..n,
        children: None,
    }];
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        let Range { start, end } = nodes[i].span;
        if end - start < 2 {
            continue;
        }
        let mid = (start + end).div_ceil(2);
        let l = nodes.len();
        nodes.push(TreeNode {
            span: start..mid,
            children: None,
        });
        nodes.push(TreeNode {
            span: mid..end,
            children: None,
        });
        nodes[i].children = Some((l, l + 1));
        stack.extend([l + 1, l]);
    }
    CoalitionTree { nodes }
}

/// Owen values for the nested two-way coalition structure of `tree`.
///
/// The root plays against the empty context. Each child of a node inherits
/// the node's contexts twice, once as-is and once joined with its sibling,
/// at half the weight. A leaf's value is its weighted mean marginal
/// contribution over its contexts, so values sum to `v(F) - v({})`.
pub fn owen_values<T: Scalar, V: ValueFunction<T> + ?Sized>(
    v: &V,
    tree: &CoalitionTree,
) -> Result<Vec<T>, ExplainError> {
    let n = v.n_players();
    if tree.n_leaves() != n {
        return Err(ExplainError::TreeMismatch {
            leaves: tree.n_leaves(),
            players: n,
        });
    }
    let mut phi = vec![T::zero(); n];
    let mut stack = vec![(0usize, vec![Coalition::empty(n)])];
    while let Some((i, contexts)) = stack.pop() {
        let node = tree.node(i);
        match node.children {
            None => {
                let pos = node.span.start;
                let mut acc = T::zero();
                for s in &contexts {
                    acc += v.value(&s.with_span(pos, pos + 1))? - v.value(s)?;
                }
                phi[pos] = acc / T::from_count(contexts.len());
            }
            Some((l, r)) => {
                let (ls, rs) = (&tree.node(l).span, &tree.node(r).span);
                let mut left = Vec::with_capacity(2 * contexts.len());
                let mut right = Vec::with_capacity(2 * contexts.len());
                for s in &contexts {
                    left.push(s.clone());
                    left.push(s.with_span(rs.start, rs.end));
                    right.push(s.clone());
                    right.push(s.with_span(ls.start, ls.end));
                }
                stack.push((r, right));
                stack.push((l, left));
            }
        }
    }
    Ok(phi)
}
