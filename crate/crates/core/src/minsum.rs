//! Min-sum (max-sum) message passing with zero initialization and no
//! attenuation.
//!
//! One iteration sends a variable-to-constraint message and then a
//! constraint-to-variable message along every edge, for every value
//! `β ∈ {0, …, X_v}`. Tables hold exact [`ExtendedValue`]s; a constraint's
//! maximization over its neighbours' values is a budgeted knapsack DP.
//!
//! Covering programs run through the complement reduction: the packing
//! instance over `x = X − z` is solved and the result mapped back.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::ExtendedValue;
use crate::factor_graph::FactorGraph;
use crate::instances::{ProblemInstance, Sense};
use crate::scalar::Scalar;

/// Message table indexed by `β`.
pub type Table<T> = Vec<ExtendedValue<T>>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Schedule {
    #[default]
    Sequential,
    /// Each half-iteration is computed with rayon; a barrier separates them.
    Parallel,
}

#[derive(Debug, Clone, Default)]
pub struct MinSumConfig {
    pub schedule: Schedule,
    /// Subtract each constraint-to-variable table's largest finite entry after
    /// every iteration. Leaves `δ` and `x̂` unchanged.
    pub normalize: bool,
    pub keep_history: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    pub var_to_con: Vec<Table<T>>,
    pub con_to_var: Vec<Table<T>>,
}

/// Per-edge message tables. `var_to_con` is empty before the first iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageState<T> {
    pub iteration: usize,
    pub var_to_con: Vec<Table<T>>,
    pub con_to_var: Vec<Table<T>>,
    pub history: Vec<IterationRecord<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub direction: &'static str,
    pub variable: usize,
    pub constraint: usize,
    pub beta: usize,
    pub value: String,
}

impl<T: Scalar> MessageState<T> {
    /// Flattens the retained history into one record per `(edge, β)`.
    pub fn trace_records<U: Scalar>(&self, fg: &FactorGraph<U>) -> Vec<TraceRecord> {
        let mut out = Vec::new();
        for rec in &self.history {
            for (direction, tables) in [
                ("var_to_con", &rec.var_to_con),
                ("con_to_var", &rec.con_to_var),
            ] {
                for (e, table) in tables.iter().enumerate() {
                    let edge = fg.edges()[e];
                    for (beta, value) in table.iter().enumerate() {
                        out.push(TraceRecord {
                            iteration: rec.iteration,
                            direction,
                            variable: edge.variable,
                            constraint: edge.constraint,
                            beta,
                            value: value.to_string(),
                        });
                    }
                }
            }
        }
        out
    }

    /// Adds `shift` to every finite entry of one constraint-to-variable table.
    pub fn shift_con_to_var(&mut self, edge: usize, shift: &T) {
        for entry in &mut self.con_to_var[edge] {
            *entry = entry.plus(shift);
        }
    }
}

/// Outcome of the decision step at one variable per entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision<T> {
    pub iterations: usize,
    pub mu: Vec<Table<T>>,
    pub mu_max: Vec<ExtendedValue<T>>,
    /// Values attaining `mu_max`, ascending.
    pub delta: Vec<Vec<i64>>,
    pub x_hat: Vec<i64>,
}

impl<T> Decision<T> {
    pub fn delta_min(&self, v: usize) -> i64 {
        self.delta[v][0]
    }

    pub fn delta_max(&self, v: usize) -> i64 {
        *self.delta[v].last().expect("delta is non-empty")
    }
}

/// All constraint-to-variable messages at iteration 0 are zero.
pub fn init_messages<T: Scalar>(fg: &FactorGraph<T>) -> MessageState<T> {
    let con_to_var = fg
        .edges()
        .iter()
        .map(|e| vec![ExtendedValue::zero(); fg.variable(e.variable).bound as usize + 1])
        .collect();
    MessageState {
        iteration: 0,
        var_to_con: Vec::new(),
        con_to_var,
        history: Vec::new(),
    }
}

fn var_to_con_message<T: Scalar>(
    fg: &FactorGraph<T>,
    incoming: &[Table<T>],
    edge: usize,
) -> Table<T> {
    let v = fg.edges()[edge].variable;
    let node = fg.variable(v);
    (0..=i64::from(node.bound))
        .map(|beta| {
            node.edges.iter().filter(|&&e| e != edge).fold(
                ExtendedValue::Finite(fg.variable_function(v, beta)),
                |acc, &e| acc.add_ref(&incoming[e][beta as usize]),
            )
        })
        .collect()
}

pub fn variable_to_constraint_step<T: Scalar>(
    state: &mut MessageState<T>,
    fg: &FactorGraph<T>,
    schedule: Schedule,
) {
    let incoming = &state.con_to_var;
    let edges = 0..fg.edges().len();
    state.var_to_con = match schedule {
        Schedule::Sequential => edges.map(|e| var_to_con_message(fg, incoming, e)).collect(),
        Schedule::Parallel => edges
            .into_par_iter()
            .map(|e| var_to_con_message(fg, incoming, e))
            .collect(),
    };
}

/// `best[s]` = largest `Σ table_u(z_u)` with `Σ z_u = s`, over the given
/// tables; `s` runs up to `cap`.
fn exact_sum_profile<'a, T: Scalar>(
    tables: impl Iterator<Item = &'a Table<T>>,
    cap: usize,
) -> Vec<ExtendedValue<T>> {
    let mut best = vec![ExtendedValue::zero()];
    for table in tables {
        let width = (best.len() - 1 + table.len() - 1).min(cap) + 1;
        let mut next = vec![ExtendedValue::NegInf; width];
        for (s, acc) in best.iter().enumerate() {
            if *acc == ExtendedValue::NegInf {
                continue;
            }
            for (z, value) in table.iter().enumerate().take(width.saturating_sub(s)) {
                let cand = acc.add_ref(value);
                if cand > next[s + z] {
                    next[s + z] = cand;
                }
            }
        }
        best = next;
    }
    best
}

/// Messages from one constraint to each of its neighbours.
fn con_to_var_messages<T: Scalar>(
    fg: &FactorGraph<T>,
    outgoing: &[Table<T>],
    c: usize,
) -> Vec<(usize, Table<T>)> {
    let node = fg.constraint(c);
    node.edges
        .iter()
        .map(|&target| {
            let others = node.edges.iter().filter(|&&e| e != target);
            let capacity: i64 = others.clone().map(|&e| outgoing[e].len() as i64 - 1).sum();
            let cap = node.budget.clamp(0, capacity) as usize;
            let mut profile = exact_sum_profile(others.map(|&e| &outgoing[e]), cap);
            for s in 1..profile.len() {
                if profile[s - 1] > profile[s] {
                    profile[s] = profile[s - 1].clone();
                }
            }
            let bound = outgoing[target].len() as i64 - 1;
            let table = (0..=bound)
                .map(|beta| {
                    let room = node.budget - beta;
                    if room < 0 {
                        ExtendedValue::NegInf
                    } else {
                        profile[(room as usize).min(profile.len() - 1)].clone()
                    }
                })
                .collect();
            (target, table)
        })
        .collect()
}

pub fn constraint_to_variable_step<T: Scalar>(
    state: &mut MessageState<T>,
    fg: &FactorGraph<T>,
    schedule: Schedule,
) {
    let outgoing = &state.var_to_con;
    let constraints = 0..fg.constraints().len();
    let parts: Vec<Vec<(usize, Table<T>)>> = match schedule {
        Schedule::Sequential => constraints
            .map(|c| con_to_var_messages(fg, outgoing, c))
            .collect(),
        Schedule::Parallel => constraints
            .into_par_iter()
            .map(|c| con_to_var_messages(fg, outgoing, c))
            .collect(),
    };
    for (edge, table) in parts.into_iter().flatten() {
        state.con_to_var[edge] = table;
    }
    state.iteration += 1;
}

fn normalize<T: Scalar>(tables: &mut [Table<T>]) {
    for table in tables {
        if let Some(top) = table
            .iter()
            .filter_map(ExtendedValue::finite)
            .max()
            .cloned()
        {
            let shift = -top;
            for entry in table.iter_mut() {
                *entry = entry.plus(&shift);
            }
        }
    }
}

/// Runs one full iteration (both halves).
pub fn iterate<T: Scalar>(state: &mut MessageState<T>, fg: &FactorGraph<T>, config: &MinSumConfig) {
    variable_to_constraint_step(state, fg, config.schedule);
    constraint_to_variable_step(state, fg, config.schedule);
    if config.normalize {
        normalize(&mut state.con_to_var);
    }
    if config.keep_history {
        state.history.push(IterationRecord {
            iteration: state.iteration,
            var_to_con: state.var_to_con.clone(),
            con_to_var: state.con_to_var.clone(),
        });
    }
}

/// Beliefs `μ_v(β) = w_v·β + Σ_C μ_{C→v}(β)`, their argmax sets, and the
/// parity rule: `x̂_v = max δ_v` after an even number of iterations, `min δ_v`
/// after an odd number.
pub fn decide<T: Scalar>(state: &MessageState<T>, fg: &FactorGraph<T>) -> Result<Decision<T>> {
    let t = state.iteration;
    let n = fg.variables().len();
    let mut decision = Decision {
        iterations: t,
        mu: Vec::with_capacity(n),
        mu_max: Vec::with_capacity(n),
        delta: Vec::with_capacity(n),
        x_hat: Vec::with_capacity(n),
    };
    for v in 0..n {
        let node = fg.variable(v);
        let mu: Table<T> = (0..=i64::from(node.bound))
            .map(|beta| {
                node.edges.iter().fold(
                    ExtendedValue::Finite(fg.variable_function(v, beta)),
                    |acc, &e| acc.add_ref(&state.con_to_var[e][beta as usize]),
                )
            })
            .collect();
        let top = mu.iter().max().cloned().expect("alphabet is non-empty");
        if top == ExtendedValue::NegInf {
            return Err(Error::InfeasibleAtRoot { variable: v });
        }
        let delta: Vec<i64> = (0..mu.len())
            .filter(|&b| mu[b] == top)
            .map(|b| b as i64)
            .collect();
        let pick = if t.is_multiple_of(2) {
            *delta.last().unwrap()
        } else {
            delta[0]
        };
        decision.mu.push(mu);
        decision.mu_max.push(top);
        decision.delta.push(delta);
        decision.x_hat.push(pick);
    }
    Ok(decision)
}

/// Runs `t` iterations on a packing instance and returns the final decision
/// together with the message state.
pub fn run_packing_with<T: Scalar>(
    inst: &ProblemInstance<T>,
    t: usize,
    config: &MinSumConfig,
) -> Result<(Decision<T>, MessageState<T>)> {
    if inst.sense() != Sense::Packing {
        return Err(Error::WrongSense {
            expected: "packing",
        });
    }
    let fg = FactorGraph::new(inst);
    let mut state = init_messages(&fg);
    for _ in 0..t {
        iterate(&mut state, &fg, config);
    }
    Ok((decide(&state, &fg)?, state))
}

pub fn run_minsum_packing<T: Scalar>(inst: &ProblemInstance<T>, t: usize) -> Result<Decision<T>> {
    run_packing_with(inst, t, &MinSumConfig::default()).map(|(d, _)| d)
}

/// Maps a packing decision on the complement back to covering values:
/// `ẑ = X − x̂`, `δ ↦ {X − β}`, and `mu[z]` is the complement belief at
/// `X − z`.
pub fn complement_decision<T: Scalar>(packing: Decision<T>, bounds: &[u32]) -> Decision<T> {
    let Decision {
        iterations,
        mu,
        mu_max,
        delta,
        x_hat,
    } = packing;
    let mu = mu.into_iter().map(|mut table| {
        table.reverse();
        table
    });
    let delta = delta
        .into_iter()
        .zip(bounds)
        .map(|(d, &x)| d.iter().rev().map(|&beta| i64::from(x) - beta).collect());
    Decision {
        iterations,
        mu: mu.collect(),
        mu_max,
        delta: delta.collect(),
        x_hat: x_hat
            .iter()
            .zip(bounds)
            .map(|(&v, &x)| i64::from(x) - v)
            .collect(),
    }
}

pub fn run_covering_with<T: Scalar>(
    inst: &ProblemInstance<T>,
    t: usize,
    config: &MinSumConfig,
) -> Result<(Decision<T>, MessageState<T>)> {
    if inst.sense() != Sense::Covering {
        return Err(Error::WrongSense {
            expected: "covering",
        });
    }
    let (packing, _) = inst.complement_reduction()?;
    let (decision, state) = run_packing_with(&packing, t, config)?;
    Ok((complement_decision(decision, inst.bounds()), state))
}

pub fn run_minsum_covering<T: Scalar>(inst: &ProblemInstance<T>, t: usize) -> Result<Decision<T>> {
    run_covering_with(inst, t, &MinSumConfig::default()).map(|(d, _)| d)
}

/// Dispatches on the instance sense.
pub fn run_minsum<T: Scalar>(inst: &ProblemInstance<T>, t: usize) -> Result<Decision<T>> {
    match inst.sense() {
        Sense::Packing => run_minsum_packing(inst, t),
        Sense::Covering => run_minsum_covering(inst, t),
    }
}

/// Decisions after each of the iterations `1..=t_max`, from a single run.
pub fn run_minsum_trajectory<T: Scalar>(
    inst: &ProblemInstance<T>,
    t_max: usize,
) -> Result<Vec<Decision<T>>> {
    let (packing, covering) = match inst.sense() {
        Sense::Packing => (inst.clone(), false),
        Sense::Covering => (inst.complement_reduction()?.0, true),
    };
    let fg = FactorGraph::new(&packing);
    let mut state = init_messages(&fg);
    let config = MinSumConfig::default();
    let mut out = Vec::with_capacity(t_max);
    for _ in 0..t_max {
        iterate(&mut state, &fg, &config);
        let decision = decide(&state, &fg)?;
        out.push(if covering {
            complement_decision(decision, inst.bounds())
        } else {
            decision
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extended::ExtendedValue::{Finite, NegInf};
    use crate::instances::fixtures::*;
    use crate::Rational;

    fn fin(v: &[i64]) -> Table<Rational> {
        v.iter().map(|&x| Finite(q(x))).collect()
    }

    #[test]
    fn zero_initialization() {
        let fg = FactorGraph::new(&single());
        let state = init_messages(&fg);
        assert_eq!(state.con_to_var, vec![fin(&[0, 0, 0])]);
        assert!(state.var_to_con.is_empty());
        let t = init_messages(&FactorGraph::new(&triangle()));
        assert_eq!(t.con_to_var.len(), 6);
        assert!(t.con_to_var.iter().all(|tab| *tab == fin(&[0, 0])));
    }

    #[test]
    fn first_iteration_single() {
        let fg = FactorGraph::new(&single());
        let mut state = init_messages(&fg);
        variable_to_constraint_step(&mut state, &fg, Schedule::Sequential);
        assert_eq!(state.var_to_con[0], fin(&[0, 1, 2]));
        constraint_to_variable_step(&mut state, &fg, Schedule::Sequential);
        assert_eq!(
            state.con_to_var[0],
            vec![Finite(q(0)), Finite(q(0)), NegInf]
        );
        let d = decide(&state, &fg).unwrap();
        assert_eq!(d.mu[0], vec![Finite(q(0)), Finite(q(1)), NegInf]);
        assert_eq!(d.delta[0], vec![1]);
        assert_eq!(d.x_hat, vec![1]);
    }

    #[test]
    fn first_iteration_triangle() {
        let fg = FactorGraph::new(&triangle());
        let mut state = init_messages(&fg);
        variable_to_constraint_step(&mut state, &fg, Schedule::Sequential);
        assert!(state.var_to_con.iter().all(|tab| *tab == fin(&[0, 1])));
        constraint_to_variable_step(&mut state, &fg, Schedule::Sequential);
        // edge 0 is (v0, C0 = {0, 1})
        assert_eq!(state.con_to_var[0], fin(&[1, 0]));
    }

    #[test]
    fn triangle_oscillates() {
        let t1 = run_minsum_packing(&triangle(), 1).unwrap();
        assert_eq!(t1.x_hat, vec![0, 0, 0]);
        let t2 = run_minsum_packing(&triangle(), 2).unwrap();
        assert_eq!(t2.x_hat, vec![1, 1, 1]);
    }

    #[test]
    fn absorbing_negative_infinity() {
        let fg = FactorGraph::new(&single());
        let mut state = init_messages(&fg);
        state.con_to_var[0][2] = NegInf;
        let table = var_to_con_message(&fg, &state.con_to_var, 0);
        // the only other neighbour set is empty, so the -inf entry is not seen
        assert_eq!(table[2], Finite(q(2)));
        let d = decide(&state, &fg).unwrap();
        assert_eq!(d.mu[0][2], NegInf);
        assert!(!d.delta[0].contains(&2));
    }

    #[test]
    fn slack_budget_is_unconstrained() {
        let inst = ProblemInstance::new(
            3,
            vec![vec![0, 1, 2]],
            qs(&[10]),
            qs(&[1, -1, 2]),
            vec![2, 1, 2],
            Sense::Packing,
        )
        .unwrap();
        let fg = FactorGraph::new(&inst);
        let mut state = init_messages(&fg);
        variable_to_constraint_step(&mut state, &fg, Schedule::Sequential);
        constraint_to_variable_step(&mut state, &fg, Schedule::Sequential);
        // to v0: max over v1 (0) plus max over v2 (4)
        assert_eq!(state.con_to_var[0], fin(&[4, 4, 4]));
    }

    #[test]
    fn t_zero_uses_variable_functions() {
        let d = run_minsum_packing(&single(), 0).unwrap();
        assert_eq!(d.delta[0], vec![2]);
        assert_eq!(d.x_hat, vec![2]);
        let zero = single().with_weights(qs(&[0])).unwrap();
        let d = run_minsum_packing(&zero, 0).unwrap();
        assert_eq!(d.delta[0], vec![0, 1, 2]);
        assert_eq!(d.x_hat, vec![2]);
    }

    #[test]
    fn covering_examples() {
        let cover = ProblemInstance::new(
            1,
            vec![vec![0]],
            qs(&[1]),
            qs(&[1]),
            vec![2],
            Sense::Covering,
        )
        .unwrap();
        let d = run_minsum_covering(&cover, 1).unwrap();
        assert_eq!(d.x_hat, vec![1]);
        assert_eq!(d.delta[0], vec![1]);

        let vertex_cover = ProblemInstance::new(
            3,
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
            qs(&[1, 1, 1]),
            qs(&[1, 1, 1]),
            vec![1, 1, 1],
            Sense::Covering,
        )
        .unwrap();
        assert_eq!(
            run_minsum_covering(&vertex_cover, 1).unwrap().x_hat,
            vec![1, 1, 1]
        );
        assert_eq!(
            run_minsum_covering(&vertex_cover, 2).unwrap().x_hat,
            vec![0, 0, 0]
        );

        // d = 0 pins the complement to 0 and the covering values to X
        let tight = ProblemInstance::new(
            2,
            vec![vec![0, 1]],
            qs(&[3]),
            qs(&[5, 7]),
            vec![1, 2],
            Sense::Covering,
        )
        .unwrap();
        for t in 1..4 {
            assert_eq!(run_minsum_covering(&tight, t).unwrap().x_hat, vec![1, 2]);
        }
        assert_eq!(
            run_minsum_packing(&tight, 1).unwrap_err(),
            Error::WrongSense {
                expected: "packing"
            }
        );
    }

    #[test]
    fn sequential_and_parallel_agree() {
        use crate::instances::{generate, Family, GeneratorParams};
        for seed in 0..10 {
            let params = GeneratorParams {
                n: 6,
                m: 5,
                max_bound: 3,
                ..Default::default()
            };
            let inst: ProblemInstance<Rational> = generate(Family::Random, &params, seed).unwrap();
            let seq = run_packing_with(&inst, 4, &MinSumConfig::default()).unwrap();
            let par = run_packing_with(
                &inst,
                4,
                &MinSumConfig {
                    schedule: Schedule::Parallel,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn trace_has_one_record_per_entry() {
        let inst = triangle();
        let fg = FactorGraph::new(&inst);
        let config = MinSumConfig {
            keep_history: true,
            ..Default::default()
        };
        let (_, state) = run_packing_with(&inst, 2, &config).unwrap();
        let records = state.trace_records(&fg);
        assert_eq!(records.len(), 2 * 2 * 6 * 2);
        assert_eq!(records[0].direction, "var_to_con");
        assert_eq!(records.last().unwrap().iteration, 2);
    }
}
