//! Run protocol: lexicographic comparison, budgeted evaluation with
//! best-so-far tracking, termination rules and the driver that turns one
//! (optimizer, instance, seed) triple into a reproducible run record.
//!
//! Every run consumes a ChaCha8 stream seeded with `seed_from_u64`; that
//! generator is fixed so records reproduce across platforms.

use std::cmp::Ordering;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::problem::{EvaluationResult, ProblemInstance};
use crate::solvers::Optimizer;

/// Evaluation budget per dimension: `2e4 * N`.
pub const EVALUATIONS_PER_DIMENSION: u64 = 20_000;
/// A feasible best within this distance of the optimum ends the run.
pub const SUCCESS_TOLERANCE: f64 = 1e-8;
/// Stagnation window per dimension: `100 * N` evaluations without improvement.
pub const STAGNATION_PER_DIMENSION: u64 = 100;

/// Total preorder on evaluations: lower violation wins, objective breaks
/// feasibility ties. Requires finite inputs; non-finite evaluations are
/// rejected earlier as corrupted.
pub fn lex_compare(a: &EvaluationResult, b: &EvaluationResult) -> Ordering {
    debug_assert!(
        a.is_finite() && b.is_finite(),
        "lex order is undefined for non-finite values"
    );
    a.violation
        .total_cmp(&b.violation)
        .then(a.objective.total_cmp(&b.objective))
}

/// When a run stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminationRule {
    pub max_evaluations: u64,
    /// Absolute objective tolerance for success; violation must be exactly 0.
    pub success_tolerance: f64,
    /// Evaluations without best-so-far improvement before the run is cut.
    pub stagnation_window: u64,
}

impl TerminationRule {
    /// Conventional rule for dimension `n`.
    pub fn for_dimension(n: usize) -> Self {
        TerminationRule {
            max_evaluations: EVALUATIONS_PER_DIMENSION * n as u64,
            success_tolerance: SUCCESS_TOLERANCE,
            stagnation_window: STAGNATION_PER_DIMENSION * n as u64,
        }
    }

    /// Same budget and success tolerance, stagnation cut disabled: the
    /// window spans the whole budget, so only budget or success can end the
    /// run. Used when a claim is stated purely "within budget".
    pub fn without_stagnation(mut self) -> Self {
        self.stagnation_window = self.max_evaluations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_evaluations == 0 || self.stagnation_window == 0 {
            return Err(Error::InvalidConfig(
                "budget and stagnation window must be positive".into(),
            ));
        }
        // `<=` alone would wave NaN through.
        if self.success_tolerance <= 0.0 || self.success_tolerance.is_nan() {
            return Err(Error::InvalidConfig(
                "success tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    BudgetExhausted,
    Success,
    Stagnation,
    /// The optimizer broke its contract (non-finite candidate, empty batch).
    Failed,
}

/// One best-so-far improvement event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "(u64, f64, f64)", from = "(u64, f64, f64)")]
pub struct TrajectoryPoint {
    /// 1-based evaluation counter at the improvement.
    pub evaluation: u64,
    pub objective: f64,
    pub violation: f64,
}

impl From<TrajectoryPoint> for (u64, f64, f64) {
    fn from(p: TrajectoryPoint) -> Self {
        (p.evaluation, p.objective, p.violation)
    }
}

impl From<(u64, f64, f64)> for TrajectoryPoint {
    fn from((evaluation, objective, violation): (u64, f64, f64)) -> Self {
        TrajectoryPoint {
            evaluation,
            objective,
            violation,
        }
    }
}

/// Wraps an instance with an evaluation counter, the lexicographic
/// best-so-far and its improvement trajectory.
#[derive(Debug)]
pub struct BudgetedBlackBox<'a> {
    instance: &'a ProblemInstance,
    budget: u64,
    used: u64,
    best: Option<(Vec<f64>, EvaluationResult)>,
    trajectory: Vec<TrajectoryPoint>,
    last_improvement: u64,
}

impl<'a> BudgetedBlackBox<'a> {
    pub fn new(instance: &'a ProblemInstance, budget: u64) -> Self {
        BudgetedBlackBox {
            instance,
            budget,
            used: 0,
            best: None,
            trajectory: Vec::new(),
            last_improvement: 0,
        }
    }

    pub fn instance(&self) -> &ProblemInstance {
        self.instance
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn evaluations_used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.used
    }

    pub fn best(&self) -> Option<(&[f64], EvaluationResult)> {
        self.best.as_ref().map(|(y, r)| (y.as_slice(), *r))
    }

    pub fn trajectory(&self) -> &[TrajectoryPoint] {
        &self.trajectory
    }

    /// Evaluates `y`, charging the budget. Errs when the budget is already
    /// spent (a solver bug) or the evaluation comes back non-finite. The
    /// best-so-far updates only on strict lexicographic improvement.
    pub fn counted_evaluate(&mut self, y: &[f64]) -> Result<EvaluationResult> {
        if self.used >= self.budget {
            return Err(Error::BudgetExhausted {
                budget: self.budget,
            });
        }
        let result = self.instance.evaluate(y)?;
        self.used += 1;
        if !result.is_finite() {
            return Err(Error::NonFinite(format!(
                "evaluation {} returned f = {}, violation = {}",
                self.used, result.objective, result.violation
            )));
        }
        let improved = match &self.best {
            None => true,
            Some((_, incumbent)) => lex_compare(&result, incumbent) == Ordering::Less,
        };
        if improved {
            self.best = Some((y.to_vec(), result));
            self.last_improvement = self.used;
            self.trajectory.push(TrajectoryPoint {
                evaluation: self.used,
                objective: result.objective,
                violation: result.violation,
            });
        }
        Ok(result)
    }

    /// First matching stop condition, checked after every evaluation.
    /// Success takes precedence; budget beats stagnation when both land on
    /// the same evaluation.
    pub fn check_termination(
        &self,
        rule: &TerminationRule,
        skip_stagnation: bool,
    ) -> Option<TerminationReason> {
        if let Some((_, best)) = &self.best {
            if best.violation == 0.0
                && (best.objective - self.instance.optimal_objective()).abs()
                    <= rule.success_tolerance
            {
                return Some(TerminationReason::Success);
            }
        }
        if self.used >= rule.max_evaluations {
            return Some(TerminationReason::BudgetExhausted);
        }
        if !skip_stagnation
            && self.best.is_some()
            && self.used - self.last_improvement >= rule.stagnation_window
        {
            return Some(TerminationReason::Stagnation);
        }
        None
    }
}

/// Uniform draws from the box, one point per row. Components are drawn in
/// point-major order from `rng`, which pins the stream layout.
pub fn sample_initial(
    instance: &ProblemInstance,
    rng: &mut ChaCha8Rng,
    count: usize,
) -> Vec<Vec<f64>> {
    let (lo, hi) = instance.box_bounds();
    let n = instance.dimension();
    (0..count)
        .map(|_| (0..n).map(|_| rng.random_range(lo..=hi)).collect())
        .collect()
}

/// Everything needed to replay or audit one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub dimension: usize,
    pub seed: u64,
    /// SHA-256 over problem config, termination rule, algorithm name and
    /// parameters; reruns of the same setup carry the same hash.
    pub config_hash: String,
    pub harness_version: String,
    pub evaluations_used: u64,
    pub termination_reason: TerminationReason,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<String>,
    pub final_candidate: Option<Vec<f64>>,
    pub final_objective: Option<f64>,
    pub final_violation: Option<f64>,
    /// Improvement events as `[evaluation, objective, violation]` triples.
    pub trajectory: Vec<TrajectoryPoint>,
}

impl RunRecord {
    pub fn final_result(&self) -> Option<EvaluationResult> {
        match (self.final_objective, self.final_violation) {
            (Some(objective), Some(violation)) => Some(EvaluationResult {
                objective,
                violation,
            }),
            _ => None,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.termination_reason == TerminationReason::Success
    }
}

/// Hash pinning the run setup into the record header.
pub fn config_fingerprint(
    instance: &ProblemInstance,
    rule: &TerminationRule,
    algorithm: &str,
    parameters: &serde_json::Value,
) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(instance.config()).expect("config serializes"));
    hasher.update(serde_json::to_vec(rule).expect("rule serializes"));
    hasher.update(algorithm.as_bytes());
    hasher.update(serde_json::to_vec(parameters).expect("parameters serialize"));
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Drives one optimizer against one instance until a termination condition
/// fires. Deterministic in (optimizer config, instance config, rule, seed).
/// Optimizer contract violations surface as a failed record, never a panic.
pub fn run_experiment(
    optimizer: &mut dyn Optimizer,
    instance: &ProblemInstance,
    rule: &TerminationRule,
    seed: u64,
) -> RunRecord {
    let parameters = optimizer.parameters(instance.dimension());
    let algorithm = optimizer.name().to_string();
    let config_hash = config_fingerprint(instance, rule, &algorithm, &parameters);
    let make_record =
        |bb: &BudgetedBlackBox, reason: TerminationReason, failure: Option<String>| {
            let (final_candidate, final_objective, final_violation) = match bb.best() {
                Some((y, res)) => (Some(y.to_vec()), Some(res.objective), Some(res.violation)),
                None => (None, None, None),
            };
            RunRecord {
                algorithm: algorithm.clone(),
                dimension: instance.dimension(),
                seed,
                config_hash: config_hash.clone(),
                harness_version: env!("CARGO_PKG_VERSION").to_string(),
                evaluations_used: bb.evaluations_used(),
                termination_reason: reason,
                failure,
                final_candidate,
                final_objective,
                final_violation,
                trajectory: bb.trajectory().to_vec(),
            }
        };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bb = BudgetedBlackBox::new(instance, rule.max_evaluations);
    let skip_stagnation = !optimizer.stagnation_applies();

    if rule.validate().is_err() || rule.max_evaluations < optimizer.min_budget(instance.dimension())
    {
        return make_record(
            &bb,
            TerminationReason::Failed,
            Some(format!(
                "budget {} below the optimizer's minimum {}",
                rule.max_evaluations,
                optimizer.min_budget(instance.dimension())
            )),
        );
    }

    loop {
        if let Some(reason) = bb.check_termination(rule, skip_stagnation) {
            return make_record(&bb, reason, None);
        }
        let limit = bb.remaining() as usize;
        let batch = optimizer.ask(instance, &mut rng, limit);
        if batch.is_empty() || batch.len() > limit {
            return make_record(
                &bb,
                TerminationReason::Failed,
                Some(format!(
                    "optimizer proposed {} candidates with {limit} allowed",
                    batch.len()
                )),
            );
        }
        let mut evaluated = Vec::with_capacity(batch.len());
        for y in batch {
            match bb.counted_evaluate(&y) {
                Ok(result) => {
                    evaluated.push((y, result));
                    if let Some(reason) = bb.check_termination(rule, skip_stagnation) {
                        return make_record(&bb, reason, None);
                    }
                }
                Err(err) => {
                    return make_record(&bb, TerminationReason::Failed, Some(err.to_string()));
                }
            }
        }
        optimizer.tell(&evaluated);
    }
}
