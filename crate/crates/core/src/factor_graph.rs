//! Bipartite factor-graph model of a packing or covering program.
//!
//! Variable vertex `v_i` carries the alphabet `{0, …, X_i}` and the variable
//! function `φ(β) = w_i·β`. Constraint vertex `C_j` carries the integer budget
//! of row `j` and evaluates its threshold factor from the values of its own
//! neighbours only.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::extended::ExtendedValue;
use crate::graph::Graph;
use crate::instances::{ProblemInstance, Sense};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Variable(usize),
    Constraint(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableVertex<T> {
    pub bound: u32,
    pub weight: T,
    /// Incident edge ids, ordered by constraint index.
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintVertex {
    pub budget: i64,
    /// Incident edge ids, ordered by variable index.
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub variable: usize,
    pub constraint: usize,
}

/// Edges are numbered in row-major order of `A`: all of row 0 by column,
/// then row 1, and so on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorGraph<T> {
    variables: Vec<VariableVertex<T>>,
    constraints: Vec<ConstraintVertex>,
    edges: Vec<Edge>,
    sense: Sense,
}

impl<T: Scalar> FactorGraph<T> {
    pub fn new(inst: &ProblemInstance<T>) -> Self {
        let mut variables: Vec<_> = inst
            .w()
            .iter()
            .zip(inst.bounds())
            .map(|(w, &bound)| VariableVertex {
                bound,
                weight: w.clone(),
                edges: Vec::new(),
            })
            .collect();
        let mut constraints = Vec::with_capacity(inst.m());
        let mut edges = Vec::new();
        for (j, row) in inst.rows().iter().enumerate() {
            let mut incident = Vec::with_capacity(row.len());
            for &i in row {
                let id = edges.len();
                edges.push(Edge {
                    variable: i,
                    constraint: j,
                });
                variables[i].edges.push(id);
                incident.push(id);
            }
            constraints.push(ConstraintVertex {
                budget: inst.budget(j),
                edges: incident,
            });
        }
        FactorGraph {
            variables,
            constraints,
            edges,
            sense: inst.sense(),
        }
    }

    pub fn variables(&self) -> &[VariableVertex<T>] {
        &self.variables
    }

    pub fn constraints(&self) -> &[ConstraintVertex] {
        &self.constraints
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn variable(&self, v: usize) -> &VariableVertex<T> {
        &self.variables[v]
    }

    pub fn constraint(&self, c: usize) -> &ConstraintVertex {
        &self.constraints[c]
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn degree(&self, v: Vertex) -> usize {
        match v {
            Vertex::Variable(i) => self.variables[i].edges.len(),
            Vertex::Constraint(j) => self.constraints[j].edges.len(),
        }
    }

    /// Neighbours of a vertex, in incident-edge order.
    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        let (ids, to_var) = match v {
            Vertex::Variable(i) => (&self.variables[i].edges, false),
            Vertex::Constraint(j) => (&self.constraints[j].edges, true),
        };
        ids.iter().map(move |&e| {
            let edge = self.edges[e];
            if to_var {
                Vertex::Variable(edge.variable)
            } else {
                Vertex::Constraint(edge.constraint)
            }
        })
    }

    pub fn variable_function(&self, v: usize, beta: i64) -> T {
        self.variables[v].weight.scale(beta)
    }

    /// `ψ_C(y)` where `y[k]` is the value of the `k`-th neighbour of `C`.
    pub fn eval_factor(&self, c: usize, y: &[i64]) -> Result<ExtendedValue<T>> {
        let node = &self.constraints[c];
        if y.len() != node.edges.len() {
            return Err(Error::Dimension {
                expected: node.edges.len(),
                got: y.len(),
            });
        }
        let sum: i64 = y.iter().sum();
        Ok(match self.sense {
            Sense::Packing if sum > node.budget => ExtendedValue::NegInf,
            Sense::Covering if sum < node.budget => ExtendedValue::PosInf,
            _ => ExtendedValue::zero(),
        })
    }

    /// `Σ_v φ_v(a_v) + Σ_C ψ_C(a|N(C))`.
    pub fn objective(&self, a: &[i64]) -> Result<ExtendedValue<T>> {
        if a.len() != self.variables.len() {
            return Err(Error::Dimension {
                expected: self.variables.len(),
                got: a.len(),
            });
        }
        let mut total = ExtendedValue::Finite(
            (0..a.len()).fold(T::zero(), |acc, v| acc + self.variable_function(v, a[v])),
        );
        for (c, node) in self.constraints.iter().enumerate() {
            let local: Vec<i64> = node
                .edges
                .iter()
                .map(|&e| a[self.edges[e].variable])
                .collect();
            total = total + self.eval_factor(c, &local)?;
        }
        Ok(total)
    }

    /// Vertex id in [`FactorGraph::to_graph`]: variables first, then constraints.
    pub fn vertex_index(&self, v: Vertex) -> usize {
        match v {
            Vertex::Variable(i) => i,
            Vertex::Constraint(j) => self.variables.len() + j,
        }
    }

    /// Underlying bipartite graph; edge `e` of the result is edge `e` here.
    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::new(self.variables.len() + self.constraints.len());
        for e in &self.edges {
            g.add_edge(e.variable, self.variables.len() + e.constraint)
                .expect("factor graph edges are simple");
        }
        g
    }

    pub fn girth(&self) -> Option<usize> {
        self.to_graph().girth()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph factor_graph {\n");
        for (i, v) in self.variables.iter().enumerate() {
            let _ = writeln!(
                out,
                "  v{i} [shape=circle, label=\"v{i}\\nX={} w={}\"];",
                v.bound, v.weight
            );
        }
        for (j, c) in self.constraints.iter().enumerate() {
            let _ = writeln!(out, "  C{j} [shape=box, label=\"C{j}\\nb={}\"];", c.budget);
        }
        for e in &self.edges {
            let _ = writeln!(out, "  v{} -- C{};", e.variable, e.constraint);
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::fixtures::*;
    use crate::instances::zbox_points;
    use crate::Rational;

    #[test]
    fn structure_of_fixtures() {
        let t = FactorGraph::new(&triangle());
        assert_eq!(
            (t.variables().len(), t.constraints().len(), t.edges().len()),
            (3, 3, 6)
        );
        let s = FactorGraph::new(&single());
        assert_eq!(
            (s.variables().len(), s.constraints().len(), s.edges().len()),
            (1, 1, 1)
        );
        let m = FactorGraph::new(&path_matching());
        assert_eq!(m.degree(Vertex::Variable(0)), 2);
        assert_eq!(m.degree(Vertex::Variable(1)), 2);
        let nbrs: Vec<_> = t.neighbors(Vertex::Constraint(2)).collect();
        assert_eq!(nbrs, vec![Vertex::Variable(0), Vertex::Variable(2)]);
        assert_eq!(t.variable_function(1, 1), q(1));
    }

    #[test]
    fn factor_values() {
        let t = FactorGraph::new(&triangle());
        assert_eq!(t.eval_factor(0, &[1, 0]).unwrap(), ExtendedValue::zero());
        assert_eq!(t.eval_factor(0, &[1, 1]).unwrap(), ExtendedValue::NegInf);
        assert!(matches!(
            t.eval_factor(0, &[1]),
            Err(Error::Dimension { .. })
        ));
        let cover = ProblemInstance::new(
            1,
            vec![vec![0]],
            qs(&[1]),
            qs(&[1]),
            vec![1],
            Sense::Covering,
        )
        .unwrap();
        let c = FactorGraph::new(&cover);
        assert_eq!(c.eval_factor(0, &[0]).unwrap(), ExtendedValue::PosInf);
        assert_eq!(c.eval_factor(0, &[1]).unwrap(), ExtendedValue::zero());
    }

    #[test]
    fn objective_examples() {
        let t = FactorGraph::new(&triangle());
        assert_eq!(
            t.objective(&[1, 0, 0]).unwrap(),
            ExtendedValue::Finite(q(1))
        );
        assert_eq!(t.objective(&[1, 1, 0]).unwrap(), ExtendedValue::NegInf);
        let s = FactorGraph::new(&single());
        assert_eq!(s.objective(&[1]).unwrap(), ExtendedValue::Finite(q(1)));
    }

    #[test]
    fn girth_examples() {
        assert_eq!(FactorGraph::new(&triangle()).girth(), Some(6));
        assert_eq!(FactorGraph::new(&single()).girth(), None);
        assert_eq!(FactorGraph::new(&path_matching()).girth(), None);
    }

    #[test]
    fn dot_dump_names_vertices() {
        let dot = FactorGraph::new(&single()).to_dot();
        assert!(dot.contains("v0 -- C0;"));
        assert!(dot.starts_with("graph"));
    }

    #[test]
    fn objective_matches_weight_on_valid_points() {
        use crate::instances::{generate, Family, GeneratorParams};
        for seed in 0..30 {
            let sense = if seed % 2 == 0 {
                Sense::Packing
            } else {
                Sense::Covering
            };
            let params = GeneratorParams {
                n: 4,
                m: 3,
                sense,
                weight_min: -3,
                ..Default::default()
            };
            let inst: ProblemInstance<Rational> = generate(Family::Random, &params, seed).unwrap();
            let fg = FactorGraph::new(&inst);
            let g = fg.girth();
            assert!(g.is_none_or(|g| g % 2 == 0));
            for a in zbox_points(inst.bounds()) {
                let value = fg.objective(&a).unwrap();
                if inst.validate_assignment(&a).unwrap() {
                    assert_eq!(value, ExtendedValue::Finite(inst.objective_int(&a)));
                } else if sense == Sense::Packing {
                    assert_eq!(value, ExtendedValue::NegInf);
                } else {
                    assert_eq!(value, ExtendedValue::PosInf);
                }
            }
        }
    }
}
