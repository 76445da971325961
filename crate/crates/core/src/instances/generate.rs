use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ProblemInstance, Sense};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_VARIABLES: usize = 12;
pub const MAX_CONSTRAINTS: usize = 12;
pub const MAX_BOX: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Random,
    TriangleMwis,
    PathMatching,
    BMatching,
    SetCover,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Family::Random),
            "triangle-mwis" => Ok(Family::TriangleMwis),
            "path-matching" => Ok(Family::PathMatching),
            "b-matching" => Ok(Family::BMatching),
            "set-cover" => Ok(Family::SetCover),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Random => "random",
            Family::TriangleMwis => "triangle-mwis",
            Family::PathMatching => "path-matching",
            Family::BMatching => "b-matching",
            Family::SetCover => "set-cover",
        };
        f.write_str(name)
    }
}

/// Knobs for [`generate`]. Fields a family does not use are ignored.
///
/// For `b-matching`, `n` is the number of edges (columns) and `m` the number
/// of graph vertices; vertices left without edges are dropped. `max_b` bounds
/// the per-vertex capacity there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub n: usize,
    pub m: usize,
    pub max_bound: u32,
    pub max_row: usize,
    pub max_b: u32,
    pub weight_min: i64,
    pub weight_max: i64,
    pub sense: Sense,
    /// Explicit integer weights; overrides the random weights.
    pub weights: Option<Vec<i64>>,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n: 4,
            m: 3,
            max_bound: 2,
            max_row: 3,
            max_b: 2,
            weight_min: 1,
            weight_max: 5,
            sense: Sense::Packing,
            weights: None,
        }
    }
}

impl GeneratorParams {
    fn check(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_VARIABLES {
            return Err(Error::ParamOutOfRange(format!(
                "n = {} not in 1..={MAX_VARIABLES}",
                self.n
            )));
        }
        if self.m == 0 || self.m > MAX_CONSTRAINTS {
            return Err(Error::ParamOutOfRange(format!(
                "m = {} not in 1..={MAX_CONSTRAINTS}",
                self.m
            )));
        }
        if self.max_bound == 0 || self.max_bound > MAX_BOX {
            return Err(Error::ParamOutOfRange(format!(
                "max_bound = {} not in 1..={MAX_BOX}",
                self.max_bound
            )));
        }
        if self.max_row == 0 {
            return Err(Error::ParamOutOfRange("max_row must be positive".into()));
        }
        if self.max_b == 0 {
            return Err(Error::ParamOutOfRange("max_b must be positive".into()));
        }
        if self.weight_min > self.weight_max {
            return Err(Error::ParamOutOfRange("weight_min > weight_max".into()));
        }
        Ok(())
    }

    fn weights<R: Rng>(&self, rng: &mut R, n: usize) -> Result<Vec<i64>> {
        match &self.weights {
            Some(w) if w.len() == n => Ok(w.clone()),
            Some(w) => Err(Error::Dimension {
                expected: n,
                got: w.len(),
            }),
            None => Ok((0..n)
                .map(|_| rng.gen_range(self.weight_min..=self.weight_max))
                .collect()),
        }
    }
}

fn scalars<T: Scalar>(v: &[i64]) -> Vec<T> {
    v.iter().map(|&x| T::from_i64(x)).collect()
}

/// Builds an instance of the requested family. Output depends only on
/// `(family, params, seed)`.
pub fn generate<T: Scalar>(
    family: Family,
    params: &GeneratorParams,
    seed: u64,
) -> Result<ProblemInstance<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match family {
        Family::TriangleMwis => {
            let w = match &params.weights {
                None => vec![1, 1, 1],
                Some(_) => params.weights(&mut rng, 3)?,
            };
            ProblemInstance::new(
                3,
                vec![vec![0, 1], vec![1, 2], vec![0, 2]],
                scalars(&[1, 1, 1]),
                scalars(&w),
                vec![1, 1, 1],
                Sense::Packing,
            )
        }
        Family::PathMatching => {
            let w = params.weights.clone().unwrap_or_else(|| vec![2, 1]);
            let n = w.len();
            if n == 0 || n > MAX_VARIABLES {
                return Err(Error::ParamOutOfRange(format!(
                    "path length {n} not in 1..={MAX_VARIABLES}"
                )));
            }
            // Vertex j of the path touches edges j-1 and j.
            let rows = (0..=n)
                .map(|j| (j.saturating_sub(1)..(j + 1).min(n)).collect())
                .collect();
            ProblemInstance::new(
                n,
                rows,
                vec![T::one(); n + 1],
                scalars(&w),
                vec![1; n],
                Sense::Packing,
            )
        }
        Family::Random => {
            params.check()?;
            let n = params.n;
            let bounds: Vec<u32> = (0..n)
                .map(|_| rng.gen_range(1..=params.max_bound))
                .collect();
            let mut rows = Vec::with_capacity(params.m);
            let mut b = Vec::with_capacity(params.m);
            for _ in 0..params.m {
                let size = rng.gen_range(1..=params.max_row.min(n));
                let row: Vec<usize> = sample(&mut rng, n, size).into_vec();
                let capacity: i64 = row.iter().map(|&i| i64::from(bounds[i])).sum();
                b.push(rng.gen_range(1..=capacity.max(1)));
                rows.push(row);
            }
            let w = params.weights(&mut rng, n)?;
            ProblemInstance::new(n, rows, scalars(&b), scalars(&w), bounds, params.sense)
        }
        Family::BMatching => {
            params.check()?;
            if params.m < 2 {
                return Err(Error::ParamOutOfRange(
                    "b-matching needs at least two vertices".into(),
                ));
            }
            let edges: Vec<(usize, usize)> = (0..params.n)
                .map(|_| {
                    let pair = sample(&mut rng, params.m, 2).into_vec();
                    (pair[0].min(pair[1]), pair[0].max(pair[1]))
                })
                .collect();
            let mut incident = vec![Vec::new(); params.m];
            for (e, &(u, v)) in edges.iter().enumerate() {
                incident[u].push(e);
                incident[v].push(e);
            }
            let rows: Vec<Vec<usize>> = incident.into_iter().filter(|r| !r.is_empty()).collect();
            let b: Vec<i64> = rows
                .iter()
                .map(|_| rng.gen_range(1..=i64::from(params.max_b)))
                .collect();
            let bounds: Vec<u32> = (0..params.n)
                .map(|_| rng.gen_range(1..=params.max_bound))
                .collect();
            let w = params.weights(&mut rng, params.n)?;
            ProblemInstance::new(
                params.n,
                rows,
                scalars(&b),
                scalars(&w),
                bounds,
                Sense::Packing,
            )
        }
        Family::SetCover => {
            params.check()?;
            let (sets, elements) = (params.n, params.m);
            let mut member = vec![vec![false; sets]; elements];
            for row in member.iter_mut() {
                let size = rng.gen_range(1..=params.max_row.min(sets));
                for s in sample(&mut rng, sets, size) {
                    row[s] = true;
                }
            }
            let rows = member
                .iter()
                .map(|row| (0..sets).filter(|&s| row[s]).collect())
                .collect();
            let w = params.weights(&mut rng, sets)?;
            ProblemInstance::new(
                sets,
                rows,
                vec![T::one(); elements],
                scalars(&w),
                vec![1; sets],
                Sense::Covering,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::fixtures;
    use crate::Rational;

    #[test]
    fn fixture_families() {
        let t: ProblemInstance<Rational> =
            generate(Family::TriangleMwis, &GeneratorParams::default(), 0).unwrap();
        assert_eq!(t, fixtures::triangle());
        let params = GeneratorParams {
            weights: Some(vec![2, 1]),
            ..Default::default()
        };
        let m: ProblemInstance<Rational> = generate(Family::PathMatching, &params, 0).unwrap();
        assert_eq!(m, fixtures::path_matching());
    }

    #[test]
    fn random_is_deterministic() {
        let params = GeneratorParams {
            n: 4,
            m: 3,
            ..Default::default()
        };
        let a: ProblemInstance<Rational> = generate(Family::Random, &params, 7).unwrap();
        let b: ProblemInstance<Rational> = generate(Family::Random, &params, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.n(), a.m()), (4, 3));
        let c: ProblemInstance<Rational> = generate(Family::Random, &params, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn b_matching_columns_have_two_ones() {
        for seed in 0..50 {
            let params = GeneratorParams {
                n: 6,
                m: 5,
                ..Default::default()
            };
            let inst: ProblemInstance<Rational> =
                generate(Family::BMatching, &params, seed).unwrap();
            assert!(inst.max_column_weight() <= 2);
        }
    }

    #[test]
    fn set_cover_is_covering_and_feasible() {
        for seed in 0..20 {
            let params = GeneratorParams {
                n: 5,
                m: 4,
                ..Default::default()
            };
            let inst: ProblemInstance<Rational> =
                generate(Family::SetCover, &params, seed).unwrap();
            assert_eq!(inst.sense(), Sense::Covering);
            assert!(inst.validate_assignment(&[1; 5]).unwrap());
        }
    }

    #[test]
    fn out_of_range_params() {
        let too_big = GeneratorParams {
            n: 13,
            ..Default::default()
        };
        assert!(matches!(
            generate::<Rational>(Family::Random, &too_big, 0),
            Err(Error::ParamOutOfRange(_))
        ));
        let wide_box = GeneratorParams {
            max_bound: 5,
            ..Default::default()
        };
        assert!(matches!(
            generate::<Rational>(Family::Random, &wide_box, 0),
            Err(Error::ParamOutOfRange(_))
        ));
        assert_eq!(
            "nope".parse::<Family>(),
            Err(Error::UnknownFamily("nope".into()))
        );
        assert_eq!("b-matching".parse::<Family>(), Ok(Family::BMatching));
    }
}
