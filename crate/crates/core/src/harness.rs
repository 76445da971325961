//! Executable checks of the weak-oscillation and convergence statements, and
//! a deterministic sweep driver producing CSV reports.
//!
//! The LP side always uses the instance with integer budgets, which is the
//! program min-sum actually sees.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{generate, Family, GeneratorParams, ProblemInstance, Sense};
use crate::lp_exact::{
    classify, compute_c, solve_lp_capped, variable_range, Classification, DEFAULT_BASIS_CAP,
};
use crate::minsum::run_minsum_trajectory;
use crate::scalar::{Field, Scalar};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(t: usize) -> Self {
        if t.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OscillationRow<T> {
    pub instance_id: String,
    pub r: usize,
    pub t: usize,
    pub parity: Parity,
    pub delta_min: i64,
    pub delta_max: i64,
    pub x_min: T,
    pub x_max: T,
    pub x_hat: i64,
    /// The parity inequality between `δ` and the optimal face holds.
    pub verdict: bool,
    /// Rounding-direction check, present when some optimum has a
    /// fractional `x_r`.
    pub rounding: Option<bool>,
}

/// `δ_{r,t} ∩ δ_{r,s}` for an even `t` and odd `s`, when non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossParityFinding {
    pub r: usize,
    pub t: usize,
    pub s: usize,
    pub intersection: Vec<i64>,
    /// The intersection is one value `β` with `x_min = x_max = β`.
    pub holds: bool,
}

/// Even `t`, odd `s` with `x̂_{r,t} = x̂_{r,s}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputAgreement {
    pub r: usize,
    pub t: usize,
    pub s: usize,
    pub value: i64,
    /// `x_min = x_max = value`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OscillationReport<T> {
    pub instance_id: String,
    pub sense: Sense,
    pub classification: Classification,
    pub lp_value: T,
    pub rows: Vec<OscillationRow<T>>,
    pub cross_parity: Vec<CrossParityFinding>,
    pub agreements: Vec<OutputAgreement>,
}

impl<T> OscillationReport<T> {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.verdict).count()
    }

    pub fn rounding_violations(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.rounding == Some(false))
            .count()
    }

    pub fn cross_parity_violations(&self) -> usize {
        self.cross_parity.iter().filter(|f| !f.holds).count()
    }

    pub fn agreement_violations(&self) -> usize {
        self.agreements.iter().filter(|a| !a.holds).count()
    }
}

fn with_id(e: Error, id: &str) -> Error {
    match e {
        Error::InvalidInstance(msg) => Error::InvalidInstance(format!("{id}: {msg}")),
        other => other,
    }
}

pub fn check_weak_oscillation<T: Field>(
    inst: &ProblemInstance<T>,
    t_max: usize,
) -> Result<OscillationReport<T>> {
    check_weak_oscillation_with(inst, "instance", t_max, DEFAULT_BASIS_CAP)
}

/// Runs min-sum for `1..=t_max` iterations and checks, for every variable:
/// packing even `t`: `max δ ≥ x_max`, odd `t`: `min δ ≤ x_min`; covering the
/// other way round.
pub fn check_weak_oscillation_with<T: Field>(
    inst: &ProblemInstance<T>,
    instance_id: &str,
    t_max: usize,
    lp_cap: u128,
) -> Result<OscillationReport<T>> {
    let lp = solve_lp_capped(&inst.with_integral_budgets(), lp_cap)
        .map_err(|e| with_id(e, instance_id))?;
    let range = variable_range(&lp);
    let trajectory = run_minsum_trajectory(inst, t_max)?;
    let sense = inst.sense();
    let mut rows = Vec::with_capacity(inst.n() * t_max);
    for r in 0..inst.n() {
        let (x_min, x_max) = (&range.x_min[r], &range.x_max[r]);
        let fractional_somewhere = x_min != x_max || !x_min.is_integral();
        for (k, decision) in trajectory.iter().enumerate() {
            let t = k + 1;
            let parity = Parity::of(t);
            let (lo, hi) = (decision.delta_min(r), decision.delta_max(r));
            let x_hat = decision.x_hat[r];
            let overshoot = (parity == Parity::Even) == (sense == Sense::Packing);
            let verdict = if overshoot {
                T::from_i64(hi) >= *x_max
            } else {
                T::from_i64(lo) <= *x_min
            };
            let rounding = fractional_somewhere.then(|| {
                if overshoot {
                    x_hat >= x_max.ceil_i64()
                } else {
                    x_hat <= x_min.floor_i64()
                }
            });
            rows.push(OscillationRow {
                instance_id: instance_id.to_string(),
                r,
                t,
                parity,
                delta_min: lo,
                delta_max: hi,
                x_min: x_min.clone(),
                x_max: x_max.clone(),
                x_hat,
                verdict,
                rounding,
            });
        }
    }

    let mut cross_parity = Vec::new();
    let mut agreements = Vec::new();
    for r in 0..inst.n() {
        let exact =
            |beta: i64| range.x_min[r] == T::from_i64(beta) && range.x_max[r] == T::from_i64(beta);
        for t in (2..=t_max).step_by(2) {
            for s in (1..=t_max).step_by(2) {
                let (dt, ds) = (&trajectory[t - 1], &trajectory[s - 1]);
                let intersection: Vec<i64> = dt.delta[r]
                    .iter()
                    .copied()
                    .filter(|beta| ds.delta[r].contains(beta))
                    .collect();
                if !intersection.is_empty() {
                    let holds = intersection.len() == 1 && exact(intersection[0]);
                    cross_parity.push(CrossParityFinding {
                        r,
                        t,
                        s,
                        intersection,
                        holds,
                    });
                }
                if dt.x_hat[r] == ds.x_hat[r] {
                    let value = dt.x_hat[r];
                    agreements.push(OutputAgreement {
                        r,
                        t,
                        s,
                        value,
                        holds: exact(value),
                    });
                }
            }
        }
    }

    Ok(OscillationReport {
        instance_id: instance_id.to_string(),
        sense,
        classification: classify(&lp),
        lp_value: lp.opt_value,
        rows,
        cross_parity,
        agreements,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConvergenceStatus {
    Converged,
    Failed,
    /// The hypotheses do not hold; nothing was asserted.
    PreconditionViolated(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceCheck {
    pub t: usize,
    pub x_hat: Vec<i64>,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceReport<T> {
    pub status: ConvergenceStatus,
    pub classification: Classification,
    pub w_max: T,
    pub c: Option<T>,
    pub t_star: Option<usize>,
    pub x_star: Option<Vec<i64>>,
    pub checks: Vec<ConvergenceCheck>,
}

/// Smallest integer `t ≥ 1` with `t > w_max / c + 1/2`.
pub fn convergence_threshold<T: Field>(w_max: &T, c: &T) -> usize {
    let two = T::from_i64(2);
    let bound = w_max.ratio(c) + T::one().ratio(&two);
    usize::try_from(bound.floor_i64().saturating_add(1))
        .unwrap_or(0)
        .max(1)
}

/// When columns have at most two 1s and the LP optimum is unique, integral
/// and on the box boundary, runs min-sum for `t*, …, t* + slack` iterations
/// and compares each output with the optimum.
pub fn check_convergence<T: Field>(
    inst: &ProblemInstance<T>,
    slack: usize,
) -> Result<ConvergenceReport<T>> {
    check_convergence_capped(inst, slack, DEFAULT_BASIS_CAP)
}

pub fn check_convergence_capped<T: Field>(
    inst: &ProblemInstance<T>,
    slack: usize,
    lp_cap: u128,
) -> Result<ConvergenceReport<T>> {
    let integral = inst.with_integral_budgets();
    let lp = solve_lp_capped(&integral, lp_cap)?;
    let classification = classify(&lp);
    let w_max = inst.w().iter().max().cloned().unwrap_or_else(T::zero);
    let mut report = ConvergenceReport {
        status: ConvergenceStatus::Converged,
        classification,
        w_max: w_max.clone(),
        c: None,
        t_star: None,
        x_star: None,
        checks: Vec::new(),
    };
    let weight = inst.max_column_weight();
    if weight > 2 {
        report.status =
            ConvergenceStatus::PreconditionViolated(format!("a column has {weight} nonzeros"));
        return Ok(report);
    }
    if classification != Classification::UniqueIntegral {
        report.status = ConvergenceStatus::PreconditionViolated(format!(
            "LP optimum is {}",
            classification.name()
        ));
        return Ok(report);
    }
    let x_star: Vec<i64> = lp.witness.iter().map(Scalar::floor_i64).collect();
    if let Some(i) =
        (0..inst.n()).find(|&i| x_star[i] != 0 && x_star[i] != i64::from(inst.bounds()[i]))
    {
        report.status = ConvergenceStatus::PreconditionViolated(format!(
            "x*[{i}] = {} is strictly inside the box",
            x_star[i]
        ));
        return Ok(report);
    }
    let c = match compute_c(&lp, integral.w()) {
        Ok(c) => c,
        Err(Error::UndefinedC) => {
            report.status =
                ConvergenceStatus::PreconditionViolated("polytope is a single point".into());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let t_star = convergence_threshold(&w_max, &c);
    let trajectory = run_minsum_trajectory(inst, t_star + slack)?;
    for (k, decision) in trajectory.iter().enumerate().skip(t_star - 1) {
        let matches = decision.x_hat == x_star;
        report.checks.push(ConvergenceCheck {
            t: k + 1,
            x_hat: decision.x_hat.clone(),
            matches,
        });
    }
    if report.checks.iter().any(|c| !c.matches) {
        report.status = ConvergenceStatus::Failed;
    }
    report.c = Some(c);
    report.t_star = Some(t_star);
    report.x_star = Some(x_star);
    Ok(report)
}

fn default_slack() -> usize {
    3
}

/// Sweep description, read from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub family: Family,
    /// Seeds `seed_start..seed_end`.
    pub seed_start: u64,
    pub seed_end: u64,
    pub t_max: usize,
    #[serde(default)]
    pub params: GeneratorParams,
    /// Also run the convergence check on each instance.
    #[serde(default)]
    pub convergence: bool,
    #[serde(default = "default_slack")]
    pub slack: usize,
    #[serde(default)]
    pub lp_cap: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CsvRow {
    pub instance_id: String,
    pub r: usize,
    pub t: usize,
    pub parity: Parity,
    pub delta_min: i64,
    pub delta_max: i64,
    pub x_min: String,
    pub x_max: String,
    pub x_hat: i64,
    pub verdict: &'static str,
}

impl<T: Scalar> From<&OscillationRow<T>> for CsvRow {
    fn from(row: &OscillationRow<T>) -> Self {
        CsvRow {
            instance_id: row.instance_id.clone(),
            r: row.r,
            t: row.t,
            parity: row.parity,
            delta_min: row.delta_min,
            delta_max: row.delta_max,
            x_min: row.x_min.to_string(),
            x_max: row.x_max.to_string(),
            x_hat: row.x_hat,
            verdict: if row.verdict { "pass" } else { "fail" },
        }
    }
}

pub const CSV_HEADER: &str = "instance_id,r,t,parity,delta_min,delta_max,x_min,x_max,x_hat,verdict";

/// CSV with the fixed header, rows in the given order.
pub fn rows_to_csv<T: Scalar>(rows: &[OscillationRow<T>]) -> String {
    let mut out = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        return format!("{CSV_HEADER}\n");
    }
    for row in rows {
        out.serialize(CsvRow::from(row)).expect("writing to memory");
    }
    String::from_utf8(out.into_inner().expect("flushing to memory")).expect("CSV is UTF-8")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedInstance {
    pub instance_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConvergenceSummary {
    pub eligible: usize,
    pub converged: usize,
    pub failed: Vec<String>,
    pub not_eligible: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub instances: usize,
    pub rows: usize,
    pub violations: usize,
    pub rounding_violations: usize,
    pub cross_parity_findings: usize,
    pub cross_parity_violations: usize,
    pub agreement_violations: usize,
    pub skipped: Vec<SkippedInstance>,
    pub convergence: Option<ConvergenceSummary>,
    #[serde(skip)]
    pub csv: String,
}

enum Outcome {
    Checked(Box<OscillationReport<Rational>>, Option<ConvergenceStatus>),
    Skipped(SkippedInstance),
}

pub fn sweep(config: &SweepConfig) -> Result<SweepReport> {
    let cap = config.lp_cap.map_or(DEFAULT_BASIS_CAP, u128::from);
    let outcomes: Vec<Outcome> = (config.seed_start..config.seed_end.max(config.seed_start))
        .into_par_iter()
        .map(|seed| -> Result<Outcome> {
            let id = format!("{}-{seed}", config.family);
            let inst: ProblemInstance<Rational> =
                match generate(config.family, &config.params, seed) {
                    Ok(inst) => inst,
                    Err(e @ Error::ParamOutOfRange(_)) | Err(e @ Error::Dimension { .. }) => {
                        return Err(e)
                    }
                    Err(e) => {
                        return Ok(Outcome::Skipped(SkippedInstance {
                            instance_id: id,
                            reason: e.to_string(),
                        }))
                    }
                };
            let report = match check_weak_oscillation_with(&inst, &id, config.t_max, cap) {
                Ok(report) => report,
                Err(
                    e @ (Error::Resource { .. }
                    | Error::Infeasible
                    | Error::InfeasibleCovering { .. }),
                ) => {
                    return Ok(Outcome::Skipped(SkippedInstance {
                        instance_id: id,
                        reason: e.to_string(),
                    }))
                }
                Err(e) => return Err(e),
            };
            let convergence = if config.convergence {
                Some(check_convergence_capped(&inst, config.slack, cap)?.status)
            } else {
                None
            };
            Ok(Outcome::Checked(Box::new(report), convergence))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut report = SweepReport {
        instances: 0,
        rows: 0,
        violations: 0,
        rounding_violations: 0,
        cross_parity_findings: 0,
        cross_parity_violations: 0,
        agreement_violations: 0,
        skipped: Vec::new(),
        convergence: config.convergence.then(ConvergenceSummary::default),
        csv: String::new(),
    };
    for outcome in outcomes {
        match outcome {
            Outcome::Skipped(s) => report.skipped.push(s),
            Outcome::Checked(osc, status) => {
                report.instances += 1;
                report.violations += osc.violations();
                report.rounding_violations += osc.rounding_violations();
                report.cross_parity_findings += osc.cross_parity.len();
                report.cross_parity_violations += osc.cross_parity_violations();
                report.agreement_violations += osc.agreement_violations();
                if let (Some(summary), Some(status)) = (report.convergence.as_mut(), status) {
                    match status {
                        ConvergenceStatus::Converged => {
                            summary.eligible += 1;
                            summary.converged += 1;
                        }
                        ConvergenceStatus::Failed => {
                            summary.eligible += 1;
                            summary.failed.push(osc.instance_id.clone());
                        }
                        ConvergenceStatus::PreconditionViolated(_) => summary.not_eligible += 1,
                    }
                }
                rows.extend(osc.rows);
            }
        }
    }
    // rayon keeps seed order and each report is already sorted by (r, t)
    report.rows = rows.len();
    report.csv = rows_to_csv(&rows);
    Ok(report)
}
