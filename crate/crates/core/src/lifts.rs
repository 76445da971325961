//! Finite graph covers.
//!
//! An `M`-lift of a base graph is fixed by one permutation of `{0, …, M−1}`
//! per base edge: for edge `e = (u, v)`, copy `i` of `u` is joined to copy
//! `perm_e[i]` of `v`. Lifted vertex `(v, i)` has index `v·M + i` and lifted
//! edge `(e, i)` has index `e·M + i`.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::factor_graph::FactorGraph;
use crate::graph::Graph;
use crate::instances::{ProblemInstance, Sense};
use crate::scalar::{Field, Scalar};

/// Largest fold [`amplify_girth`] will build by default.
pub const DEFAULT_FOLD_CAP: u128 = 1 << 16;

/// Nodes explored per constraint by [`realize_fractional_solution`].
pub const DEFAULT_SEARCH_NODES: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lift {
    base: Graph,
    fold: usize,
    perms: Vec<Vec<usize>>,
}

fn check_permutation(perm: &[usize], fold: usize, edge: usize) -> Result<()> {
    if perm.len() != fold {
        return Err(Error::MalformedPermutation(format!(
            "edge {edge}: expected {fold} entries, got {}",
            perm.len()
        )));
    }
    let mut seen = vec![false; fold];
    for &p in perm {
        if p >= fold || std::mem::replace(&mut seen[p], true) {
            return Err(Error::MalformedPermutation(format!(
                "edge {edge}: {perm:?} is not a permutation"
            )));
        }
    }
    Ok(())
}

impl Lift {
    pub fn new(base: Graph, fold: usize, perms: Vec<Vec<usize>>) -> Result<Self> {
        if fold == 0 {
            return Err(Error::ParamOutOfRange("fold must be positive".into()));
        }
        if perms.len() != base.edge_count() {
            return Err(Error::MalformedPermutation(format!(
                "{} permutations for {} edges",
                perms.len(),
                base.edge_count()
            )));
        }
        for (e, perm) in perms.iter().enumerate() {
            check_permutation(perm, fold, e)?;
        }
        Ok(Lift { base, fold, perms })
    }

    pub fn identity(base: Graph, fold: usize) -> Result<Self> {
        let perms = vec![(0..fold).collect(); base.edge_count()];
        Lift::new(base, fold, perms)
    }

    /// Every edge shifts copies cyclically, `i ↦ i + 1 mod M`.
    pub fn all_swap(base: Graph, fold: usize) -> Result<Self> {
        let perms = vec![cyclic_shift(fold); base.edge_count()];
        Lift::new(base, fold, perms)
    }

    pub fn random(base: Graph, fold: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perms = (0..base.edge_count())
            .map(|_| random_permutation(fold, &mut rng))
            .collect();
        Lift::new(base, fold, perms)
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn fold(&self) -> usize {
        self.fold
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn lifted_vertex(&self, v: usize, copy: usize) -> usize {
        v * self.fold + copy
    }

    /// `π(x)` together with the copy index.
    pub fn project(&self, x: usize) -> (usize, usize) {
        (x / self.fold, x % self.fold)
    }

    pub fn lifted_graph(&self) -> Graph {
        let mut g = Graph::new(self.base.vertex_count() * self.fold);
        for (e, &(u, v)) in self.base.edges().iter().enumerate() {
            for i in 0..self.fold {
                g.add_edge(
                    self.lifted_vertex(u, i),
                    self.lifted_vertex(v, self.perms[e][i]),
                )
                .expect("lifted edges are simple");
            }
        }
        g
    }

    /// Lifts of `self.lifted_graph()` compose into a lift of `self.base()`
    /// with fold `M₁·M₂`; copy `(i, j)` is numbered `i·M₂ + j`.
    pub fn compose(&self, outer: &Lift) -> Result<Lift> {
        if outer.base != self.lifted_graph() {
            return Err(Error::InvalidInstance(
                "outer lift is not over this lift".into(),
            ));
        }
        let (m1, m2) = (self.fold, outer.fold);
        let perms = (0..self.base.edge_count())
            .map(|e| {
                (0..m1 * m2)
                    .map(|c| {
                        let (i, j) = (c / m2, c % m2);
                        self.perms[e][i] * m2 + outer.perms[e * m1 + i][j]
                    })
                    .collect()
            })
            .collect();
        Lift::new(self.base.clone(), m1 * m2, perms)
    }
}

pub fn cyclic_shift(fold: usize) -> Vec<usize> {
    (0..fold).map(|i| (i + 1) % fold).collect()
}

fn random_permutation(fold: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..fold).collect();
    perm.shuffle(rng);
    perm
}

/// Whether `x ↦ x / M` maps `lifted` onto `base` as a covering map: every
/// lifted vertex's neighbours project bijectively onto the neighbours of its
/// image.
pub fn validate_covering_map(base: &Graph, fold: usize, lifted: &Graph) -> bool {
    if fold == 0 || lifted.vertex_count() != base.vertex_count() * fold {
        return false;
    }
    (0..lifted.vertex_count()).all(|x| {
        let mut image: Vec<usize> = lifted.neighbors(x).iter().map(|y| y / fold).collect();
        let mut expected = base.neighbors(x / fold).to_vec();
        image.sort_unstable();
        expected.sort_unstable();
        image == expected
    })
}

/// The `2^|E|`-fold cover whose copies are `|E|`-bit strings and where edge
/// `e` flips bit `e`. Every cycle of the cover projects to a closed walk that
/// uses each edge an even number of times, so its girth is at least twice
/// the base girth.
pub fn girth_doubling_lift(g: &Graph) -> Result<Lift> {
    let edges = g.edge_count();
    if edges > 16 {
        return Err(Error::Resource {
            what: "girth-doubling fold",
            needed: 1u128 << edges.min(127),
            cap: 1 << 16,
        });
    }
    let fold = 1usize << edges;
    let perms = (0..edges)
        .map(|e| (0..fold).map(|i| i ^ (1 << e)).collect())
        .collect();
    let lift = Lift::new(g.clone(), fold, perms)?;
    // XOR by a constant is a deck transformation, so copy 0 of each fiber
    // sees every cycle class.
    let lifted_girth = lift
        .lifted_graph()
        .girth_from((0..g.vertex_count()).map(|v| v * fold));
    if let Some(base_girth) = g.girth() {
        assert!(
            lifted_girth.is_none_or(|l| l >= 2 * base_girth),
            "girth doubling failed"
        );
    } else {
        assert!(lifted_girth.is_none(), "lift of a forest has a cycle");
    }
    Ok(lift)
}

pub fn amplify_girth(g: &Graph, target: usize) -> Result<Lift> {
    amplify_girth_capped(g, target, DEFAULT_FOLD_CAP)
}

/// Repeated girth doubling until the cover's girth reaches `target`.
pub fn amplify_girth_capped(g: &Graph, target: usize, fold_cap: u128) -> Result<Lift> {
    let mut lift = Lift::identity(g.clone(), 1)?;
    loop {
        let lifted = lift.lifted_graph();
        if lifted.girth().is_none_or(|l| l >= target) {
            return Ok(lift);
        }
        let edges = lifted.edge_count();
        let needed = if edges >= 127 {
            u128::MAX
        } else {
            (lift.fold as u128).saturating_mul(1u128 << edges)
        };
        if needed > fold_cap || edges > 16 {
            return Err(Error::Resource {
                what: "lift fold for girth amplification",
                needed,
                cap: fold_cap,
            });
        }
        lift = lift.compose(&girth_doubling_lift(&lifted)?)?;
    }
}

/// How to pick the per-edge permutations of a lift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermSpec {
    AllSwap,
    Random(u64),
    Explicit(Vec<Vec<usize>>),
}

impl FromStr for PermSpec {
    type Err = Error;

    /// `all-swap` or `random:<seed>`; explicit lists go through
    /// [`parse_permutations`].
    fn from_str(s: &str) -> Result<Self> {
        if s == "all-swap" {
            return Ok(PermSpec::AllSwap);
        }
        s.strip_prefix("random:")
            .and_then(|seed| seed.parse().ok())
            .map(PermSpec::Random)
            .ok_or_else(|| Error::Parse(format!("unknown permutation source `{s}`")))
    }
}

/// One permutation per non-empty line, entries separated by commas or spaces.
pub fn parse_permutations(text: &str) -> Result<Vec<Vec<usize>>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| {
            line.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::Parse(format!("bad permutation entry `{t}`")))
                })
                .collect()
        })
        .collect()
}

/// A lift of an instance's factor graph. Lifted variable `(v, i)` is
/// variable `v·M + i` of [`InstanceLift::lifted_instance`] and lifted
/// constraint `(C, k)` is row `C·M + k`; each inherits its base data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceLift<T> {
    base: ProblemInstance<T>,
    lift: Lift,
}

impl<T: Scalar> InstanceLift<T> {
    /// `perms[e]` sends copy `i` of the variable end of factor-graph edge `e`
    /// to copy `perms[e][i]` of its constraint end.
    pub fn new(inst: &ProblemInstance<T>, fold: usize, perms: Vec<Vec<usize>>) -> Result<Self> {
        let lift = Lift::new(FactorGraph::new(inst).to_graph(), fold, perms)?;
        Ok(InstanceLift {
            base: inst.clone(),
            lift,
        })
    }

    pub fn identity(inst: &ProblemInstance<T>, fold: usize) -> Result<Self> {
        let edges = FactorGraph::new(inst).edges().len();
        InstanceLift::new(inst, fold, vec![(0..fold).collect(); edges])
    }

    /// Each constraint keeps its first incidence straight and shifts the
    /// others cyclically. When every row has two entries this is the lift of
    /// the graph whose edges are the rows with every edge swapped.
    pub fn all_swap(inst: &ProblemInstance<T>, fold: usize) -> Result<Self> {
        let fg = FactorGraph::new(inst);
        let mut perms = vec![cyclic_shift(fold); fg.edges().len()];
        for c in fg.constraints() {
            perms[c.edges[0]] = (0..fold).collect();
        }
        InstanceLift::new(inst, fold, perms)
    }

    pub fn random(inst: &ProblemInstance<T>, fold: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = FactorGraph::new(inst).edges().len();
        let perms = (0..edges)
            .map(|_| random_permutation(fold, &mut rng))
            .collect();
        InstanceLift::new(inst, fold, perms)
    }

    pub fn from_spec(inst: &ProblemInstance<T>, fold: usize, spec: &PermSpec) -> Result<Self> {
        match spec {
            PermSpec::AllSwap => InstanceLift::all_swap(inst, fold),
            PermSpec::Random(seed) => InstanceLift::random(inst, fold, *seed),
            PermSpec::Explicit(perms) => InstanceLift::new(inst, fold, perms.clone()),
        }
    }

    pub fn base(&self) -> &ProblemInstance<T> {
        &self.base
    }

    pub fn lift(&self) -> &Lift {
        &self.lift
    }

    pub fn fold(&self) -> usize {
        self.lift.fold
    }

    pub fn lifted_variable(&self, v: usize, copy: usize) -> usize {
        v * self.lift.fold + copy
    }

    pub fn lifted_instance(&self) -> ProblemInstance<T> {
        let m_fold = self.lift.fold;
        let fg = FactorGraph::new(&self.base);
        let mut rows = Vec::with_capacity(self.base.m() * m_fold);
        let mut b = Vec::with_capacity(rows.capacity());
        for (j, c) in fg.constraints().iter().enumerate() {
            let mut copies = vec![Vec::new(); m_fold];
            for &e in &c.edges {
                let v = fg.edges()[e].variable;
                for (i, &k) in self.lift.perms[e].iter().enumerate() {
                    copies[k].push(v * m_fold + i);
                }
            }
            for row in copies {
                rows.push(row);
                b.push(self.base.b()[j].clone());
            }
        }
        let repeat = |xs: &[T]| {
            xs.iter()
                .flat_map(|x| std::iter::repeat_n(x.clone(), m_fold))
                .collect()
        };
        let bounds = self
            .base
            .bounds()
            .iter()
            .flat_map(|&x| std::iter::repeat_n(x, m_fold))
            .collect();
        ProblemInstance::new(
            self.base.n() * m_fold,
            rows,
            b,
            repeat(self.base.w()),
            bounds,
            self.base.sense(),
        )
        .expect("lift of a valid instance is valid")
    }

    /// Girth of the lifted factor graph.
    pub fn girth(&self) -> Option<usize> {
        self.lift.lifted_graph().girth()
    }

    /// Copies every base value onto its whole fiber.
    pub fn lift_assignment(&self, a: &[i64]) -> Result<Vec<i64>> {
        if !self.base.validate_assignment(a)? {
            return Err(Error::InvalidAssignment(
                "base assignment is not valid".into(),
            ));
        }
        let lifted: Vec<i64> = a
            .iter()
            .flat_map(|&x| std::iter::repeat_n(x, self.lift.fold))
            .collect();
        assert!(
            self.lifted_instance().validate_assignment(&lifted)?,
            "lifting broke validity"
        );
        Ok(lifted)
    }
}

impl<T: Field> InstanceLift<T> {
    /// Per-fiber mean of a valid integral lifted assignment.
    pub fn average_assignment(&self, lifted: &[i64]) -> Result<Vec<T>> {
        if !self.lifted_instance().validate_assignment(lifted)? {
            return Err(Error::InvalidAssignment(
                "lifted assignment is not valid".into(),
            ));
        }
        let m_fold = self.lift.fold;
        let avg: Vec<T> = lifted
            .chunks(m_fold)
            .map(|fiber| T::from_i64(fiber.iter().sum()).ratio(&T::from_i64(m_fold as i64)))
            .collect();
        assert!(
            self.base.validate_fractional(&avg)?,
            "average is not LP-feasible"
        );
        Ok(avg)
    }
}

/// Searches for a lift of fold `M ≤ m_max` and a valid integral assignment on
/// it whose fiber averages equal `x`.
///
/// Only folds with `M·x` integral are tried. Fibers get balanced values
/// (`⌊x_v⌋` and `⌊x_v⌋ + 1`); constraints are independent once fiber values
/// are fixed, so each one is matched separately by backtracking over its
/// copies. `Ok(None)` means the search gave up, not that no lift exists.
pub fn realize_fractional_solution<T: Field>(
    inst: &ProblemInstance<T>,
    x: &[T],
    m_max: usize,
) -> Result<Option<(InstanceLift<T>, Vec<i64>)>> {
    realize_with_budget(inst, x, m_max, DEFAULT_SEARCH_NODES)
}

pub fn realize_with_budget<T: Field>(
    inst: &ProblemInstance<T>,
    x: &[T],
    m_max: usize,
    node_budget: usize,
) -> Result<Option<(InstanceLift<T>, Vec<i64>)>> {
    if !inst.validate_fractional(x)? {
        return Err(Error::InvalidAssignment("x is not LP-feasible".into()));
    }
    let fg = FactorGraph::new(inst);
    'fold: for m_fold in 1..=m_max {
        let totals: Vec<T> = x.iter().map(|v| v.scale(m_fold as i64)).collect();
        if !totals.iter().all(Scalar::is_integral) {
            continue;
        }
        // copies 0..r take ⌊x⌋ + 1, the rest ⌊x⌋
        let fibers: Vec<Vec<i64>> = x
            .iter()
            .zip(&totals)
            .map(|(v, s)| {
                let low = v.floor_i64();
                let high = (s.floor_i64() - low * m_fold as i64) as usize;
                (0..m_fold).map(|i| low + i64::from(i < high)).collect()
            })
            .collect();
        let mut perms = vec![Vec::new(); fg.edges().len()];
        for c in fg.constraints() {
            let vars: Vec<usize> = c.edges.iter().map(|&e| fg.edges()[e].variable).collect();
            let Some(columns) =
                match_constraint(&vars, &fibers, c.budget, inst.sense(), m_fold, node_budget)
            else {
                continue 'fold;
            };
            for (slot, &e) in c.edges.iter().enumerate() {
                let fiber = &fibers[vars[slot]];
                let mut perm = vec![usize::MAX; m_fold];
                let mut used = vec![false; m_fold];
                for (k, column) in columns.iter().enumerate() {
                    let i = (0..m_fold)
                        .find(|&i| !used[i] && fiber[i] == column[slot])
                        .expect("counts match");
                    used[i] = true;
                    perm[i] = k;
                }
                perms[e] = perm;
            }
        }
        let lift = InstanceLift::new(inst, m_fold, perms)?;
        let assignment: Vec<i64> = fibers.concat();
        assert!(
            lift.lifted_instance().validate_assignment(&assignment)?,
            "realized assignment invalid"
        );
        assert_eq!(
            lift.average_assignment(&assignment)?,
            x,
            "realized average differs"
        );
        return Ok(Some((lift, assignment)));
    }
    Ok(None)
}

/// Splits the fibers of a constraint's neighbours into `M` columns, one value
/// per neighbour each, with every column sum within budget. Columns are kept
/// in non-increasing order to skip permutations of the same split.
fn match_constraint(
    vars: &[usize],
    fibers: &[Vec<i64>],
    budget: i64,
    sense: Sense,
    m_fold: usize,
    node_budget: usize,
) -> Option<Vec<Vec<i64>>> {
    // distinct values per neighbour, descending, with multiplicities
    let classes: Vec<Vec<(i64, usize)>> = vars
        .iter()
        .map(|&v| {
            let mut values = fibers[v].clone();
            values.sort_unstable_by(|a, b| b.cmp(a));
            let mut out: Vec<(i64, usize)> = Vec::new();
            for value in values {
                match out.last_mut() {
                    Some((last, count)) if *last == value => *count += 1,
                    _ => out.push((value, 1)),
                }
            }
            out
        })
        .collect();
    let ok = |sum: i64| match sense {
        Sense::Packing => sum <= budget,
        Sense::Covering => sum >= budget,
    };

    struct Search<'a, F> {
        classes: &'a [Vec<(i64, usize)>],
        counts: Vec<Vec<usize>>,
        columns: Vec<Vec<usize>>,
        nodes: usize,
        node_budget: usize,
        m_fold: usize,
        ok: F,
    }

    impl<F: Fn(i64) -> bool> Search<'_, F> {
        fn run(&mut self) -> bool {
            if self.columns.len() == self.m_fold {
                return true;
            }
            let d = self.classes.len();
            let upper = self.columns.last().cloned();
            let mut choice = vec![0usize; d];
            loop {
                self.nodes += 1;
                if self.nodes > self.node_budget {
                    return false;
                }
                let ordered = upper.as_ref().is_none_or(|u| choice <= *u);
                let available = (0..d).all(|s| self.counts[s][choice[s]] > 0);
                let sum: i64 = (0..d).map(|s| self.classes[s][choice[s]].0).sum();
                if ordered && available && (self.ok)(sum) {
                    for (counts, &k) in self.counts.iter_mut().zip(&choice) {
                        counts[k] -= 1;
                    }
                    self.columns.push(choice.clone());
                    if self.run() {
                        return true;
                    }
                    self.columns.pop();
                    for (counts, &k) in self.counts.iter_mut().zip(&choice) {
                        counts[k] += 1;
                    }
                    if self.nodes > self.node_budget {
                        return false;
                    }
                }
                // odometer, last position fastest
                let mut pos = d;
                loop {
                    if pos == 0 {
                        return false;
                    }
                    pos -= 1;
                    choice[pos] += 1;
                    if choice[pos] < self.classes[pos].len() {
                        break;
                    }
                    choice[pos] = 0;
                }
            }
        }
    }

    let mut search = Search {
        classes: &classes,
        counts: classes
            .iter()
            .map(|c| c.iter().map(|&(_, n)| n).collect())
            .collect(),
        columns: Vec::with_capacity(m_fold),
        nodes: 0,
        node_budget,
        m_fold,
        ok,
    };
    if !search.run() {
        return None;
    }
    Some(
        search
            .columns
            .iter()
            .map(|choice| {
                choice
                    .iter()
                    .enumerate()
                    .map(|(s, &k)| classes[s][k].0)
                    .collect()
            })
            .collect(),
    )
}
