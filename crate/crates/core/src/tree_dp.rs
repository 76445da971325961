//! Path-prefix (computation) trees and their exact dynamic program.
//!
//! The tree of height `h` rooted at variable `r` has one node per
//! backtrack-free path of length at most `h` starting at `r`; every node
//! inherits the function of the vertex its path ends at. The bottom-up DP
//! over this tree is an independent oracle for the min-sum beliefs: it does
//! its constraint maximizations by enumerating child assignments outright
//! whenever that is small enough, and by its own budget DP otherwise.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::extended::ExtendedValue;
use crate::factor_graph::{FactorGraph, Vertex};
use crate::instances::Sense;
use crate::scalar::Scalar;

pub const DEFAULT_NODE_CAP: usize = 1_000_000;

/// Child assignment spaces up to this size are enumerated exhaustively.
pub const ENUMERATION_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeLabel<T> {
    Variable { index: usize, bound: u32, weight: T },
    Constraint { index: usize, budget: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode<T> {
    pub label: NodeLabel<T>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
}

impl<T> TreeNode<T> {
    pub fn vertex(&self) -> Vertex {
        match self.label {
            NodeLabel::Variable { index, .. } => Vertex::Variable(index),
            NodeLabel::Constraint { index, .. } => Vertex::Constraint(index),
        }
    }
}

/// Nodes are stored in BFS order, so every child has a larger index than its
/// parent and node 0 is the zero-length path `(r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPrefixTree<T> {
    nodes: Vec<TreeNode<T>>,
    height: usize,
}

impl<T: Scalar> PathPrefixTree<T> {
    pub fn nodes(&self) -> &[TreeNode<T>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn root_bound(&self) -> u32 {
        match self.nodes[0].label {
            NodeLabel::Variable { bound, .. } => bound,
            NodeLabel::Constraint { .. } => unreachable!("trees are rooted at variables"),
        }
    }

    /// Whether no two nodes end at the same factor-graph vertex.
    pub fn is_injective(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.nodes.iter().all(|n| seen.insert(n.vertex()))
    }

    /// Path of factor-graph vertices from the root to `node`.
    pub fn path(&self, mut node: usize) -> Vec<Vertex> {
        let mut out = vec![self.nodes[node].vertex()];
        while let Some(p) = self.nodes[node].parent {
            out.push(self.nodes[p].vertex());
            node = p;
        }
        out.reverse();
        out
    }
}

pub fn build_tree<T: Scalar>(
    fg: &FactorGraph<T>,
    root: usize,
    height: usize,
) -> Result<PathPrefixTree<T>> {
    build_tree_capped(fg, root, height, DEFAULT_NODE_CAP)
}

pub fn build_tree_capped<T: Scalar>(
    fg: &FactorGraph<T>,
    root: usize,
    height: usize,
    cap: usize,
) -> Result<PathPrefixTree<T>> {
    if fg.sense() != Sense::Packing {
        return Err(Error::WrongSense {
            expected: "packing",
        });
    }
    if root >= fg.variables().len() {
        return Err(Error::Dimension {
            expected: fg.variables().len(),
            got: root,
        });
    }
    let label = |v: Vertex| match v {
        Vertex::Variable(i) => {
            let node = fg.variable(i);
            NodeLabel::Variable {
                index: i,
                bound: node.bound,
                weight: node.weight.clone(),
            }
        }
        Vertex::Constraint(j) => NodeLabel::Constraint {
            index: j,
            budget: fg.constraint(j).budget,
        },
    };
    let mut nodes = vec![TreeNode {
        label: label(Vertex::Variable(root)),
        parent: None,
        children: Vec::new(),
        depth: 0,
    }];
    let mut head = 0;
    while head < nodes.len() {
        let (vertex, depth, parent) = (nodes[head].vertex(), nodes[head].depth, nodes[head].parent);
        if depth < height {
            let previous = parent.map(|p| nodes[p].vertex());
            for next in fg.neighbors(vertex) {
                if Some(next) == previous {
                    continue;
                }
                if nodes.len() >= cap {
                    return Err(Error::Resource {
                        what: "path-prefix tree nodes",
                        needed: nodes.len() as u128 + 1,
                        cap: cap as u128,
                    });
                }
                let id = nodes.len();
                nodes.push(TreeNode {
                    label: label(next),
                    parent: Some(head),
                    children: Vec::new(),
                    depth: depth + 1,
                });
                nodes[head].children.push(id);
            }
        }
        head += 1;
    }
    Ok(PathPrefixTree { nodes, height })
}

/// `g(z)` for a constraint node with the given child tables: the best
/// `Σ table_c(z_c)` with `Σ z_c ≤ budget − z`, for `z = 0..=parent_bound`.
fn constraint_value<T: Scalar>(
    children: &[&Vec<ExtendedValue<T>>],
    budget: i64,
    parent_bound: u32,
) -> Vec<ExtendedValue<T>> {
    let space = children
        .iter()
        .try_fold(1u64, |acc, t| acc.checked_mul(t.len() as u64))
        .unwrap_or(u64::MAX);
    let total_bound: i64 = children.iter().map(|t| t.len() as i64 - 1).sum();
    // best[s] = best value with child sum at most s
    let best = if space <= ENUMERATION_LIMIT {
        let mut at_sum = vec![ExtendedValue::NegInf; total_bound as usize + 1];
        let mut digits = vec![0usize; children.len()];
        loop {
            let sum: usize = digits.iter().sum();
            let value = digits
                .iter()
                .zip(children)
                .fold(ExtendedValue::zero(), |acc, (&z, t)| acc + t[z].clone());
            if value > at_sum[sum] {
                at_sum[sum] = value;
            }
            // advance the mixed-radix counter
            let mut k = 0;
            while k < digits.len() {
                digits[k] += 1;
                if digits[k] < children[k].len() {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == digits.len() {
                break;
            }
        }
        let mut running = ExtendedValue::NegInf;
        at_sum
            .into_iter()
            .map(|v| {
                running = running.clone().max(v);
                running.clone()
            })
            .collect::<Vec<_>>()
    } else {
        let width = total_bound as usize + 1;
        let mut f = vec![ExtendedValue::zero(); width];
        for table in children {
            let prev = f;
            f = (0..width)
                .map(|s| {
                    (0..table.len().min(s + 1))
                        .map(|z| prev[s - z].clone() + table[z].clone())
                        .max()
                        .unwrap_or(ExtendedValue::NegInf)
                })
                .collect();
        }
        f
    };
    (0..=i64::from(parent_bound))
        .map(|z| {
            let room = budget - z;
            if room < 0 {
                ExtendedValue::NegInf
            } else {
                best[(room.min(total_bound)) as usize].clone()
            }
        })
        .collect()
}

/// Optimal tree objective with the root fixed to each `β ∈ {0, …, X_r}`.
pub fn tree_optima<T: Scalar>(tree: &PathPrefixTree<T>) -> Vec<ExtendedValue<T>> {
    let mut tables: Vec<Vec<ExtendedValue<T>>> = vec![Vec::new(); tree.nodes.len()];
    for id in (0..tree.nodes.len()).rev() {
        let node = &tree.nodes[id];
        tables[id] = match &node.label {
            NodeLabel::Variable { bound, weight, .. } => (0..=i64::from(*bound))
                .map(|z| {
                    node.children
                        .iter()
                        .fold(ExtendedValue::Finite(weight.scale(z)), |acc, &c| {
                            acc + tables[c][z as usize].clone()
                        })
                })
                .collect(),
            NodeLabel::Constraint { budget, .. } => {
                let parent = node.parent.expect("constraint nodes have a parent");
                let parent_bound = match tree.nodes[parent].label {
                    NodeLabel::Variable { bound, .. } => bound,
                    NodeLabel::Constraint { .. } => unreachable!("tree is bipartite"),
                };
                let children: Vec<_> = node.children.iter().map(|&c| &tables[c]).collect();
                constraint_value(&children, *budget, parent_bound)
            }
        };
    }
    tables.swap_remove(0)
}

pub fn tree_optimum<T: Scalar>(tree: &PathPrefixTree<T>, beta: i64) -> Result<ExtendedValue<T>> {
    let bound = tree.root_bound();
    if beta < 0 || beta > i64::from(bound) {
        return Err(Error::Dimension {
            expected: bound as usize,
            got: beta.max(0) as usize,
        });
    }
    Ok(tree_optima(tree)[beta as usize].clone())
}

/// Root values of the optimal tree assignments.
pub fn opt_dp_root_set<T: Scalar>(tree: &PathPrefixTree<T>) -> Result<Vec<i64>> {
    let optima = tree_optima(tree);
    let top = optima
        .iter()
        .max()
        .cloned()
        .unwrap_or(ExtendedValue::NegInf);
    if top == ExtendedValue::NegInf {
        let index = match tree.nodes[0].label {
            NodeLabel::Variable { index, .. } => index,
            NodeLabel::Constraint { index, .. } => index,
        };
        return Err(Error::InfeasibleAtRoot { variable: index });
    }
    Ok((0..optima.len())
        .filter(|&b| optima[b] == top)
        .map(|b| b as i64)
        .collect())
}
