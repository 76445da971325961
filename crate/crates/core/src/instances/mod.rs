//! Zero-one packing and covering programs with box constraints.
//!
//! A [`ProblemInstance`] stores the constraint matrix `A ∈ {0,1}^{m×n}` as one
//! sorted column-index list per row, together with the constraint vector `b`,
//! the weights `w`, the box bounds `X` and the problem [`Sense`].

mod generate;
mod io;

pub use generate::{generate, Family, GeneratorParams};
pub use io::{from_json, to_json, InstanceFile};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    /// maximize `wᵀx` subject to `A·x ≤ b`
    Packing,
    /// minimize `wᵀx` subject to `A·x ≥ b`
    Covering,
}

impl Sense {
    pub fn name(self) -> &'static str {
        match self {
            Sense::Packing => "packing",
            Sense::Covering => "covering",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance<T> {
    n: usize,
    rows: Vec<Vec<usize>>,
    b: Vec<T>,
    w: Vec<T>,
    bounds: Vec<u32>,
    sense: Sense,
}

impl<T: Scalar> ProblemInstance<T> {
    /// Validates and builds an instance. Row index lists are sorted; empty
    /// rows, duplicate or out-of-range indices and negative `b_j` are rejected.
    pub fn new(
        n: usize,
        rows: Vec<Vec<usize>>,
        b: Vec<T>,
        w: Vec<T>,
        bounds: Vec<u32>,
        sense: Sense,
    ) -> Result<Self> {
        let m = rows.len();
        if b.len() != m {
            return Err(Error::Dimension {
                expected: m,
                got: b.len(),
            });
        }
        if w.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: w.len(),
            });
        }
        if bounds.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: bounds.len(),
            });
        }
        let mut sorted = Vec::with_capacity(m);
        for (j, mut row) in rows.into_iter().enumerate() {
            if row.is_empty() {
                return Err(Error::InvalidInstance(format!("row {j} is empty")));
            }
            row.sort_unstable();
            if row.windows(2).any(|p| p[0] == p[1]) {
                return Err(Error::InvalidInstance(format!(
                    "row {j} repeats a column index"
                )));
            }
            if let Some(&bad) = row.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidInstance(format!(
                    "row {j} references column {bad} but n = {n}"
                )));
            }
            sorted.push(row);
        }
        if let Some(j) = b.iter().position(|bj| bj.is_negative()) {
            return Err(Error::InvalidInstance(format!("b[{j}] is negative")));
        }
        Ok(ProblemInstance {
            n,
            rows: sorted,
            b,
            w,
            bounds,
            sense,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> &[usize] {
        &self.rows[j]
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn w(&self) -> &[T] {
        &self.w
    }

    pub fn bounds(&self) -> &[u32] {
        &self.bounds
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Integer budget of row `j`: `floor(b_j)` for packing, `ceil(b_j)` for
    /// covering. Over integral assignments this is the same constraint.
    pub fn budget(&self, j: usize) -> i64 {
        match self.sense {
            Sense::Packing => self.b[j].floor_i64(),
            Sense::Covering => self.b[j].ceil_i64(),
        }
    }

    /// Rows containing each column.
    pub fn columns(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.n];
        for (j, row) in self.rows.iter().enumerate() {
            for &i in row {
                cols[i].push(j);
            }
        }
        cols
    }

    /// Largest number of 1s in any column.
    pub fn max_column_weight(&self) -> usize {
        self.columns().iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn with_weights(&self, w: Vec<T>) -> Result<Self> {
        Self::new(
            self.n,
            self.rows.clone(),
            self.b.clone(),
            w,
            self.bounds.clone(),
            self.sense,
        )
    }

    /// Same instance with every `b_j` replaced by its integer budget.
    pub fn with_integral_budgets(&self) -> Self {
        let b = (0..self.m()).map(|j| T::from_i64(self.budget(j))).collect();
        ProblemInstance { b, ..self.clone() }
    }

    pub fn has_integral_b(&self) -> bool {
        self.b.iter().all(Scalar::is_integral)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    pub fn in_box(&self, a: &[i64]) -> bool {
        a.iter()
            .zip(&self.bounds)
            .all(|(&v, &x)| v >= 0 && v <= i64::from(x))
    }

    /// Box constraints plus every row constraint in the instance's sense.
    pub fn validate_assignment(&self, a: &[i64]) -> Result<bool> {
        self.check_len(a.len())?;
        if !self.in_box(a) {
            return Ok(false);
        }
        Ok((0..self.m()).all(|j| {
            let sum: i64 = self.rows[j].iter().map(|&i| a[i]).sum();
            match self.sense {
                Sense::Packing => sum <= self.budget(j),
                Sense::Covering => sum >= self.budget(j),
            }
        }))
    }

    /// Membership in the LP polytope (`RBox(X)` and the rows, with `b` exact).
    pub fn validate_fractional(&self, x: &[T]) -> Result<bool> {
        self.check_len(x.len())?;
        let in_box = x
            .iter()
            .zip(&self.bounds)
            .all(|(v, &bound)| !v.is_negative() && *v <= T::from_i64(i64::from(bound)));
        if !in_box {
            return Ok(false);
        }
        Ok(self.rows.iter().zip(&self.b).all(|(row, bj)| {
            let sum = row.iter().fold(T::zero(), |acc, &i| acc + x[i].clone());
            match self.sense {
                Sense::Packing => sum <= *bj,
                Sense::Covering => sum >= *bj,
            }
        }))
    }

    pub fn objective_int(&self, a: &[i64]) -> T {
        self.w
            .iter()
            .zip(a)
            .fold(T::zero(), |acc, (wi, &ai)| acc + wi.scale(ai))
    }

    pub fn objective_fractional(&self, x: &[T]) -> T {
        self.w
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (wi, xi)| acc + wi.clone() * xi.clone())
    }

    /// `A·X`, one entry per row.
    pub fn row_capacity(&self, j: usize) -> i64 {
        self.rows[j]
            .iter()
            .map(|&i| i64::from(self.bounds[i]))
            .sum()
    }

    /// Rewrites a covering instance as the packing instance over `x = X − z`
    /// with constraint vector `d = A·X − b`.
    pub fn complement_reduction(&self) -> Result<(ProblemInstance<T>, Complement<T>)> {
        if self.sense != Sense::Covering {
            return Err(Error::WrongSense {
                expected: "covering",
            });
        }
        let mut d = Vec::with_capacity(self.m());
        for (j, bj) in self.b.iter().enumerate() {
            let dj = T::from_i64(self.row_capacity(j)) - bj.clone();
            if dj.is_negative() {
                return Err(Error::InfeasibleCovering { row: j });
            }
            d.push(dj);
        }
        let packing = ProblemInstance {
            n: self.n,
            rows: self.rows.clone(),
            b: d,
            w: self.w.clone(),
            bounds: self.bounds.clone(),
            sense: Sense::Packing,
        };
        let bounds_as_t: Vec<T> = self
            .bounds
            .iter()
            .map(|&x| T::from_i64(i64::from(x)))
            .collect();
        let complement = Complement {
            bounds: self.bounds.clone(),
            box_weight: self.objective_fractional(&bounds_as_t),
        };
        Ok((packing, complement))
    }
}

/// The bijection `z ↦ X − z` between covering and packing assignments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Complement<T> {
    bounds: Vec<u32>,
    box_weight: T,
}

impl<T: Scalar> Complement<T> {
    pub fn map_int(&self, a: &[i64]) -> Vec<i64> {
        a.iter()
            .zip(&self.bounds)
            .map(|(&v, &x)| i64::from(x) - v)
            .collect()
    }

    pub fn map_fractional(&self, a: &[T]) -> Vec<T> {
        a.iter()
            .zip(&self.bounds)
            .map(|(v, &x)| T::from_i64(i64::from(x)) - v.clone())
            .collect()
    }

    /// `wᵀX`.
    pub fn box_weight(&self) -> &T {
        &self.box_weight
    }

    /// Objective of `X − x` given the objective `wᵀx` on the other side.
    pub fn objective(&self, other_side: &T) -> T {
        self.box_weight.clone() - other_side.clone()
    }

    pub fn describe(&self) -> String {
        format!("z = X - x; w^T z = {} - w^T x", self.box_weight)
    }
}

/// Number of points of `ZBox(X)`.
pub fn zbox_size(bounds: &[u32]) -> u128 {
    bounds
        .iter()
        .try_fold(1u128, |acc, &x| acc.checked_mul(u128::from(x) + 1))
        .unwrap_or(u128::MAX)
}

/// All integral points of `ZBox(X)` in lexicographic order.
pub fn zbox_points(bounds: &[u32]) -> impl Iterator<Item = Vec<i64>> + '_ {
    let mut next = Some(vec![0i64; bounds.len()]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for i in (0..bounds.len()).rev() {
            if succ[i] < i64::from(bounds[i]) {
                succ[i] += 1;
                next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(current)
    })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::Rational;

    #[test]
    fn validate_examples() {
        let s = single();
        assert!(s.validate_assignment(&[1]).unwrap());
        assert!(!s.validate_assignment(&[2]).unwrap());
        assert!(!triangle().validate_assignment(&[1, 1, 0]).unwrap());
        assert!(triangle().validate_assignment(&[0, 0, 1]).unwrap());
        assert_eq!(
            s.validate_assignment(&[1, 0]),
            Err(Error::Dimension {
                expected: 1,
                got: 2
            })
        );
        assert!(!s.validate_assignment(&[-1]).unwrap());
    }

    #[test]
    fn rejects_malformed_rows() {
        let mk = |rows: Vec<Vec<usize>>| {
            ProblemInstance::new(2, rows, qs(&[1]), qs(&[1, 1]), vec![1, 1], Sense::Packing)
        };
        assert!(matches!(mk(vec![vec![]]), Err(Error::InvalidInstance(_))));
        assert!(matches!(
            mk(vec![vec![0, 0]]),
            Err(Error::InvalidInstance(_))
        ));
        assert!(matches!(mk(vec![vec![2]]), Err(Error::InvalidInstance(_))));
        assert_eq!(mk(vec![vec![1, 0]]).unwrap().row(0), &[0, 1]);
        let neg = ProblemInstance::new(
            1,
            vec![vec![0]],
            qs(&[-1]),
            qs(&[1]),
            vec![1],
            Sense::Packing,
        );
        assert!(matches!(neg, Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn complement_examples() {
        let cover = |b: i64, rows: Vec<Vec<usize>>, n: usize, bounds: Vec<u32>| {
            ProblemInstance::new(n, rows, qs(&[b]), vec![q(1); n], bounds, Sense::Covering).unwrap()
        };
        let (p, c) = cover(1, vec![vec![0]], 1, vec![2])
            .complement_reduction()
            .unwrap();
        assert_eq!(p.b(), &qs(&[1])[..]);
        assert_eq!(p.sense(), Sense::Packing);
        assert_eq!(c.map_int(&[1]), vec![1]);
        assert_eq!(c.describe(), "z = X - x; w^T z = 2 - w^T x");

        let (p, _) = cover(2, vec![vec![0, 1]], 2, vec![1, 1])
            .complement_reduction()
            .unwrap();
        assert_eq!(p.b(), &qs(&[0])[..]);

        let err = cover(3, vec![vec![0]], 1, vec![2]).complement_reduction();
        assert_eq!(err.unwrap_err(), Error::InfeasibleCovering { row: 0 });

        assert_eq!(
            single().complement_reduction().unwrap_err(),
            Error::WrongSense {
                expected: "covering"
            }
        );
    }

    #[test]
    fn fractional_b_budgets() {
        let half = Rational::new(3.into(), 2.into());
        let p = ProblemInstance::new(
            1,
            vec![vec![0]],
            vec![half.clone()],
            qs(&[1]),
            vec![2],
            Sense::Packing,
        )
        .unwrap();
        assert_eq!(p.budget(0), 1);
        assert!(p.validate_fractional(std::slice::from_ref(&half)).unwrap());
        assert!(!p.validate_assignment(&[2]).unwrap());
        assert_eq!(p.with_integral_budgets().b(), &qs(&[1])[..]);
        let c = ProblemInstance::new(
            1,
            vec![vec![0]],
            vec![half],
            qs(&[1]),
            vec![2],
            Sense::Covering,
        )
        .unwrap();
        assert_eq!(c.budget(0), 2);
    }

    #[test]
    fn zbox_enumeration() {
        let pts: Vec<_> = zbox_points(&[1, 2]).collect();
        assert_eq!(pts.len() as u128, zbox_size(&[1, 2]));
        assert_eq!(pts[0], vec![0, 0]);
        assert_eq!(pts[5], vec![1, 2]);
        assert_eq!(zbox_points(&[]).count(), 1);
    }
}
