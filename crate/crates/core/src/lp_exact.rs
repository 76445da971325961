//! Exact LP relaxations by basic-feasible-solution enumeration.
//!
//! A vertex of `{x ∈ RBox(X) : A·x ≤ b}` (or `≥ b`) is pinned down by the
//! coordinates sitting at a bound together with `k` tight rows that are
//! nonsingular on the `k` remaining free coordinates. The enumeration walks
//! every free set `F`, every `|F|`-subset of rows touching `F` and every
//! `{0, X_i}` pattern on the rest, solving the square system exactly.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instances::{ProblemInstance, Sense};
use crate::scalar::Field;

/// Default cap on the number of candidate bases examined.
pub const DEFAULT_BASIS_CAP: u128 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpResult<T> {
    pub sense: Sense,
    pub opt_value: T,
    pub witness: Vec<T>,
    /// Every basic feasible solution, lexicographically sorted.
    pub vertices: Vec<Vec<T>>,
    pub opt_vertices: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableRange<T> {
    pub x_min: Vec<T>,
    pub x_max: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    UniqueIntegral,
    UniqueFractional,
    Multiple,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::UniqueIntegral => "unique-integral",
            Classification::UniqueFractional => "unique-fractional",
            Classification::Multiple => "multiple",
        }
    }

    pub fn is_unique(self) -> bool {
        self != Classification::Multiple
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Upper bound on the number of `(F, R, pattern)` triples.
pub fn basis_count_bound(n: usize, m: usize) -> u128 {
    (0..=n.min(m))
        .map(|k| {
            binomial(n, k)
                .saturating_mul(binomial(m, k))
                .saturating_mul(1u128 << (n - k).min(120))
        })
        .fold(0u128, u128::saturating_add)
}

/// Inverse of a square matrix by Gauss–Jordan elimination, `None` if singular.
fn invert<T: Field>(mut a: Vec<Vec<T>>) -> Option<Vec<Vec<T>>> {
    let k = a.len();
    let mut inv: Vec<Vec<T>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..k {
            a[col][j] = a[col][j].ratio(&p);
            inv[col][j] = inv[col][j].ratio(&p);
        }
        for r in 0..k {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..k {
                let da = factor.clone() * a[col][j].clone();
                a[r][j] = a[r][j].clone() - da;
                let di = factor.clone() * inv[col][j].clone();
                inv[r][j] = inv[r][j].clone() - di;
            }
        }
    }
    Some(inv)
}

fn for_each_combination(pool: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(
        pool: &[usize],
        k: usize,
        start: usize,
        acc: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if acc.len() == k {
            f(acc);
            return;
        }
        for i in start..pool.len() {
            if pool.len() - i < k - acc.len() {
                break;
            }
            acc.push(pool[i]);
            go(pool, k, i + 1, acc, f);
            acc.pop();
        }
    }
    go(pool, k, 0, &mut Vec::with_capacity(k), f);
}

/// Vertices whose strictly-interior coordinates are exactly `free`.
fn vertices_with_free_set<T: Field>(inst: &ProblemInstance<T>, free: &[usize]) -> Vec<Vec<T>> {
    let n = inst.n();
    let bound = |i: usize| T::from_i64(i64::from(inst.bounds()[i]));
    let is_free = {
        let mut mask = vec![false; n];
        for &i in free {
            mask[i] = true;
        }
        mask
    };
    let fixed: Vec<usize> = (0..n).filter(|&i| !is_free[i]).collect();
    let touching: Vec<usize> = (0..inst.m())
        .filter(|&j| inst.row(j).iter().any(|&i| is_free[i]))
        .collect();
    let mut found = Vec::new();
    let mut emit = |rows: &[usize]| {
        let matrix: Vec<Vec<T>> = rows
            .iter()
            .map(|&j| {
                free.iter()
                    .map(|i| {
                        if inst.row(j).contains(i) {
                            T::one()
                        } else {
                            T::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let Some(inv) = invert(matrix) else { return };
        // patterns over fixed coordinates with a non-zero bound
        let flexible: Vec<usize> = fixed
            .iter()
            .copied()
            .filter(|&i| inst.bounds()[i] > 0)
            .collect();
        for pattern in 0u64..(1u64 << flexible.len()) {
            let mut x = vec![T::zero(); n];
            for (bit, &i) in flexible.iter().enumerate() {
                if pattern >> bit & 1 == 1 {
                    x[i] = bound(i);
                }
            }
            let rhs: Vec<T> = rows
                .iter()
                .map(|&j| {
                    inst.row(j)
                        .iter()
                        .filter(|&&i| !is_free[i])
                        .fold(inst.b()[j].clone(), |acc, &i| acc - x[i].clone())
                })
                .collect();
            let mut interior = true;
            for (r, &i) in free.iter().enumerate() {
                let v = inv[r]
                    .iter()
                    .zip(&rhs)
                    .fold(T::zero(), |acc, (a, c)| acc + a.clone() * c.clone());
                if !v.is_positive() || v >= bound(i) {
                    interior = false;
                    break;
                }
                x[i] = v;
            }
            if interior && inst.validate_fractional(&x).unwrap_or(false) {
                found.push(x);
            }
        }
    };
    for_each_combination(&touching, free.len(), &mut emit);
    found
}

pub fn solve_lp<T: Field>(inst: &ProblemInstance<T>) -> Result<LpResult<T>> {
    solve_lp_capped(inst, DEFAULT_BASIS_CAP)
}

pub fn solve_lp_capped<T: Field>(inst: &ProblemInstance<T>, cap: u128) -> Result<LpResult<T>> {
    let n = inst.n();
    let needed = basis_count_bound(n, inst.m());
    if n >= 63 || needed > cap {
        return Err(Error::Resource {
            what: "LP basis enumeration",
            needed,
            cap,
        });
    }
    let movable: Vec<usize> = (0..n).filter(|&i| inst.bounds()[i] > 0).collect();
    let vertices: BTreeSet<Vec<T>> = (0u64..(1u64 << movable.len()))
        .into_par_iter()
        .map(|mask| {
            let free: Vec<usize> = movable
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask >> bit & 1 == 1)
                .map(|(_, &i)| i)
                .collect();
            vertices_with_free_set(inst, &free)
        })
        .flatten_iter()
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    let vertices: Vec<Vec<T>> = vertices.into_iter().collect();
    let values: Vec<T> = vertices
        .iter()
        .map(|v| inst.objective_fractional(v))
        .collect();
    let opt_value = match inst.sense() {
        Sense::Packing => values.iter().max(),
        Sense::Covering => values.iter().min(),
    }
    .cloned()
    .ok_or(Error::Infeasible)?;
    let opt_vertices: Vec<Vec<T>> = vertices
        .iter()
        .zip(&values)
        .filter(|(_, v)| **v == opt_value)
        .map(|(x, _)| x.clone())
        .collect();
    Ok(LpResult {
        sense: inst.sense(),
        opt_value,
        witness: opt_vertices[0].clone(),
        vertices,
        opt_vertices,
    })
}

/// Coordinate extremes over the optimal face. The face is the convex hull of
/// the optimal vertices, so its coordinate extremes are attained there.
pub fn variable_range<T: Field>(lp: &LpResult<T>) -> VariableRange<T> {
    let n = lp.witness.len();
    let pick = |i: usize, f: fn(T, T) -> T| {
        lp.opt_vertices
            .iter()
            .map(|v| v[i].clone())
            .reduce(f)
            .expect("at least one optimum")
    };
    VariableRange {
        x_min: (0..n).map(|i| pick(i, std::cmp::min)).collect(),
        x_max: (0..n).map(|i| pick(i, std::cmp::max)).collect(),
    }
}

pub fn classify<T: Field>(lp: &LpResult<T>) -> Classification {
    let range = variable_range(lp);
    if range.x_min != range.x_max {
        Classification::Multiple
    } else if lp.witness.iter().all(|v| v.is_integral()) {
        Classification::UniqueIntegral
    } else {
        Classification::UniqueFractional
    }
}

/// Uniqueness margin `min_{x ∈ P∖{x*}} wᵀ(x* − x)/‖x* − x‖₁` (the numerator is
/// sign-flipped for covering). Zero when the optimum is not unique.
///
/// The minimum over `P` is attained at a vertex: writing `x = Σ λ_i v_i`, the
/// numerator is linear and each `wᵀ(x* − v_i) ≥ 0`, while the `ℓ₁` norm is
/// subadditive, so the ratio at `x` is at least the smallest vertex ratio.
pub fn compute_c<T: Field>(lp: &LpResult<T>, weights: &[T]) -> Result<T> {
    if !classify(lp).is_unique() {
        return Ok(T::zero());
    }
    let star = &lp.witness;
    lp.vertices
        .iter()
        .filter(|v| *v != star)
        .map(|v| {
            let mut gain = T::zero();
            let mut dist = T::zero();
            for ((s, x), w) in star.iter().zip(v).zip(weights) {
                let diff = s.clone() - x.clone();
                gain = gain + w.clone() * diff.clone();
                dist = dist + diff.abs();
            }
            if lp.sense == Sense::Covering {
                gain = -gain;
            }
            gain.ratio(&dist)
        })
        .min()
        .ok_or(Error::UndefinedC)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::fixtures::*;
    use crate::instances::{generate, zbox_points, Family, GeneratorParams};
    use crate::Rational;
    use num_traits::{Signed, Zero};

    fn r(p: i64, qd: i64) -> Rational {
        Rational::new(p.into(), qd.into())
    }

    #[test]
    fn triangle_relaxation() {
        let lp = solve_lp(&triangle()).unwrap();
        assert_eq!(lp.opt_value, r(3, 2));
        assert_eq!(lp.opt_vertices, vec![vec![r(1, 2); 3]]);
        let range = variable_range(&lp);
        assert_eq!(range.x_min, vec![r(1, 2); 3]);
        assert_eq!(classify(&lp), Classification::UniqueFractional);
        // 0, the three unit vectors and the half point
        assert_eq!(lp.vertices.len(), 5);
    }

    #[test]
    fn single_and_path() {
        let s = solve_lp(&single()).unwrap();
        assert_eq!((s.opt_value.clone(), s.witness.clone()), (q(1), vec![q(1)]));
        assert_eq!(s.vertices, vec![vec![q(0)], vec![q(1)]]);
        assert_eq!(compute_c(&s, single().w()).unwrap(), q(1));

        let m = solve_lp(&path_matching()).unwrap();
        assert_eq!(m.opt_value, q(2));
        assert_eq!(m.witness, vec![q(1), q(0)]);
        assert_eq!(
            m.vertices,
            vec![vec![q(0), q(0)], vec![q(0), q(1)], vec![q(1), q(0)]]
        );
        assert_eq!(classify(&m), Classification::UniqueIntegral);
        let range = variable_range(&m);
        assert_eq!((range.x_min, range.x_max), (qs(&[1, 0]), qs(&[1, 0])));
        assert_eq!(compute_c(&m, path_matching().w()).unwrap(), r(1, 2));
    }

    #[test]
    fn multiple_optima() {
        let inst = ProblemInstance::new(
            2,
            vec![vec![0, 1]],
            qs(&[1]),
            qs(&[1, 1]),
            vec![1, 1],
            Sense::Packing,
        )
        .unwrap();
        let lp = solve_lp(&inst).unwrap();
        assert_eq!(classify(&lp), Classification::Multiple);
        assert_eq!(lp.opt_vertices.len(), 2);
        assert_eq!(compute_c(&lp, inst.w()).unwrap(), q(0));

        let zero = ProblemInstance::new(
            2,
            vec![vec![0, 1]],
            qs(&[4]),
            qs(&[0, 0]),
            vec![1, 2],
            Sense::Packing,
        )
        .unwrap();
        let range = variable_range(&solve_lp(&zero).unwrap());
        assert_eq!((range.x_min, range.x_max), (qs(&[0, 0]), qs(&[1, 2])));
    }

    #[test]
    fn degenerate_polytope() {
        let inst = ProblemInstance::new(
            1,
            vec![vec![0]],
            qs(&[0]),
            qs(&[3]),
            vec![2],
            Sense::Packing,
        )
        .unwrap();
        let lp = solve_lp(&inst).unwrap();
        assert_eq!(lp.vertices, vec![vec![q(0)]]);
        assert_eq!(compute_c(&lp, inst.w()), Err(Error::UndefinedC));
    }

    #[test]
    fn covering_relaxation() {
        let vertex_cover = ProblemInstance::new(
            3,
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
            qs(&[1, 1, 1]),
            qs(&[1, 1, 1]),
            vec![1, 1, 1],
            Sense::Covering,
        )
        .unwrap();
        let lp = solve_lp(&vertex_cover).unwrap();
        assert_eq!(lp.opt_value, r(3, 2));
        assert_eq!(lp.witness, vec![r(1, 2); 3]);
        let unreachable = ProblemInstance::new(
            1,
            vec![vec![0]],
            qs(&[3]),
            qs(&[1]),
            vec![2],
            Sense::Covering,
        )
        .unwrap();
        assert_eq!(solve_lp(&unreachable), Err(Error::Infeasible));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            solve_lp_capped(&triangle(), 10),
            Err(Error::Resource { .. })
        ));
        assert_eq!(basis_count_bound(1, 1), 3);
    }

    #[test]
    fn invert_small() {
        let a = vec![vec![q(1), q(1)], vec![q(0), q(1)]];
        assert_eq!(
            invert(a).unwrap(),
            vec![vec![q(1), q(-1)], vec![q(0), q(1)]]
        );
        assert!(invert(vec![vec![q(1), q(1)], vec![q(1), q(1)]]).is_none());
    }

    #[test]
    fn vertices_are_feasible_and_bound_the_integer_optimum() {
        for seed in 0..40 {
            let sense = if seed % 3 == 0 {
                Sense::Covering
            } else {
                Sense::Packing
            };
            let params = GeneratorParams {
                n: 4,
                m: 4,
                sense,
                weight_min: -2,
                ..Default::default()
            };
            let inst: ProblemInstance<Rational> = generate(Family::Random, &params, seed).unwrap();
            let lp = solve_lp(&inst).unwrap();
            for v in &lp.vertices {
                assert!(inst.validate_fractional(v).unwrap());
                let value = inst.objective_fractional(v);
                match sense {
                    Sense::Packing => assert!(value <= lp.opt_value),
                    Sense::Covering => assert!(value >= lp.opt_value),
                }
            }
            let best_int = zbox_points(inst.bounds())
                .filter(|a| inst.validate_assignment(a).unwrap())
                .map(|a| inst.objective_int(&a))
                .reduce(|a, b| {
                    if (sense == Sense::Packing) == (b > a) {
                        b
                    } else {
                        a
                    }
                })
                .unwrap();
            match sense {
                Sense::Packing => assert!(lp.opt_value >= best_int),
                Sense::Covering => assert!(lp.opt_value <= best_int),
            }
            if classify(&lp) == Classification::UniqueIntegral {
                assert_eq!(lp.opt_value, best_int);
            }
            if let Ok(c) = compute_c(&lp, inst.w()) {
                assert!(!c.is_negative());
                assert_eq!(c.is_zero(), !classify(&lp).is_unique());
            }
        }
    }
}
