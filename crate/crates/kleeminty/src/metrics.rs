//! Batch post-processing: final-state indicators, fixed target sets, ECDF
//! curves over first-hit counts, and the consensus ranking built from them.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{EvaluationResult, ProblemInstance};
use crate::protocol::{lex_compare, RunRecord, TrajectoryPoint};

/// 50 log-uniform violation targets from 1e4 down to 1e-6, plus exact 0.
pub const INFEASIBLE_TARGET_COUNT: usize = 51;
/// 52 log-uniform objective-gap targets from 1e0 down to 1e-8.
pub const FEASIBLE_TARGET_COUNT: usize = 52;
pub const TOTAL_TARGET_COUNT: usize = INFEASIBLE_TARGET_COUNT + FEASIBLE_TARGET_COUNT;
/// Log-spaced evaluation checkpoints behind the ECDF area factor.
pub const AREA_CHECKPOINTS: usize = 101;

/// Stable lexicographic sort, middle element (lower middle for even counts;
/// batches follow the 15-run convention, which makes it the true median).
pub fn median_solution(results: &[EvaluationResult]) -> Result<EvaluationResult> {
    if results.is_empty() {
        return Err(Error::EmptyInput("median of zero results".into()));
    }
    let mut sorted = results.to_vec();
    sorted.sort_by(lex_compare);
    Ok(sorted[(sorted.len() - 1) / 2])
}

/// Final-state summary of one (algorithm, dimension) batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorReport {
    pub algorithm: String,
    pub dimension: usize,
    pub runs: usize,
    pub optimal_objective: f64,
    /// Objective of the lexicographically best final solution.
    pub best_objective: f64,
    /// Objective of the median final solution.
    pub median_objective: f64,
    /// Violation of the median final solution.
    pub median_violation: f64,
    /// `|median_objective - optimal_objective|`.
    pub absolute_error: f64,
    /// Fraction of runs whose final solution is feasible.
    pub feasibility_ratio: f64,
    /// Mean distance `||y - t||` over feasible finals; `None` when no run
    /// ended feasible.
    pub mean_distance_to_optimum: Option<f64>,
    pub mean_evaluations: f64,
}

/// Permutation-invariant mean: summands are added in sorted order so record
/// order cannot leak into the last bits.
fn stable_mean(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn compute_indicators(
    records: &[RunRecord],
    instance: &ProblemInstance,
) -> Result<IndicatorReport> {
    if records.is_empty() {
        return Err(Error::EmptyInput("indicator batch".into()));
    }
    let algorithm = records[0].algorithm.clone();
    for r in records {
        if r.algorithm != algorithm {
            return Err(Error::InconsistentBatch(format!(
                "mixed algorithms '{}' and '{}'",
                algorithm, r.algorithm
            )));
        }
        if r.dimension != instance.dimension() {
            return Err(Error::InconsistentBatch(format!(
                "record at N={} in a batch for N={}",
                r.dimension,
                instance.dimension()
            )));
        }
    }
    let mut finals = Vec::with_capacity(records.len());
    for r in records {
        match (r.final_result(), &r.final_candidate) {
            (Some(result), Some(candidate)) => finals.push((candidate.clone(), result)),
            _ => {
                return Err(Error::InconsistentBatch(format!(
                    "seed {} carries no final solution (reason {:?})",
                    r.seed, r.termination_reason
                )))
            }
        }
    }

    let results: Vec<EvaluationResult> = finals.iter().map(|(_, r)| *r).collect();
    let median = median_solution(&results)?;
    let best = *results
        .iter()
        .min_by(|a, b| lex_compare(a, b))
        .expect("non-empty");

    let optimal_objective = instance.optimal_objective();
    let t = instance.optimal_point();
    let mut distances: Vec<f64> = finals
        .iter()
        .filter(|(_, r)| r.is_feasible())
        .map(|(y, _)| {
            y.iter()
                .zip(t.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let feasible = distances.len();
    let mean_distance_to_optimum = if feasible == 0 {
        None
    } else {
        Some(stable_mean(&mut distances))
    };

    let total_evaluations: u64 = records.iter().map(|r| r.evaluations_used).sum();

    Ok(IndicatorReport {
        algorithm,
        dimension: instance.dimension(),
        runs: records.len(),
        optimal_objective,
        best_objective: best.objective,
        median_objective: median.objective,
        median_violation: median.violation,
        absolute_error: (median.objective - optimal_objective).abs(),
        feasibility_ratio: feasible as f64 / records.len() as f64,
        mean_distance_to_optimum,
        mean_evaluations: total_evaluations as f64 / records.len() as f64,
    })
}

/// Fixed target ladder: violation targets for the approach phase, objective
/// gaps once feasible. Both sequences are strictly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    optimal_objective: f64,
    infeasible: Vec<f64>,
    feasible: Vec<f64>,
}

pub fn make_targets(optimal_objective: f64) -> TargetSet {
    let mut infeasible = Vec::with_capacity(INFEASIBLE_TARGET_COUNT);
    for i in 0..50 {
        // 10 decades over 49 steps; endpoints pinned to exact literals.
        let value = match i {
            0 => 1e4,
            49 => 1e-6,
            _ => 10f64.powf(4.0 - 10.0 * i as f64 / 49.0),
        };
        infeasible.push(value);
    }
    infeasible.push(0.0);
    let mut feasible = Vec::with_capacity(FEASIBLE_TARGET_COUNT);
    for j in 0..52 {
        let value = match j {
            0 => 1e0,
            51 => 1e-8,
            _ => 10f64.powf(-8.0 * j as f64 / 51.0),
        };
        feasible.push(value);
    }
    TargetSet {
        optimal_objective,
        infeasible,
        feasible,
    }
}

impl TargetSet {
    pub fn optimal_objective(&self) -> f64 {
        self.optimal_objective
    }

    pub fn infeasible(&self) -> &[f64] {
        &self.infeasible
    }

    pub fn feasible(&self) -> &[f64] {
        &self.feasible
    }

    pub fn len(&self) -> usize {
        self.infeasible.len() + self.feasible.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// First-hit evaluation counts of one run against a target set; `None` where
/// the run never reached the target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetHits {
    pub infeasible: Vec<Option<u64>>,
    pub feasible: Vec<Option<u64>>,
}

impl TargetHits {
    pub fn total(&self) -> usize {
        self.infeasible
            .iter()
            .chain(self.feasible.iter())
            .filter(|h| h.is_some())
            .count()
    }

    fn all_hits(&self) -> impl Iterator<Item = u64> + '_ {
        self.infeasible
            .iter()
            .chain(self.feasible.iter())
            .flatten()
            .copied()
    }
}

/// Scans an improvement trajectory once per target. A violation target is hit
/// at the first entry with `violation <= target` (boundary counts); an
/// objective target needs exact feasibility and `|objective - optimum| <=
/// target` — the gap is absolute, since box-constrained candidates can
/// undershoot the optimum only through rounding.
pub fn update_hits(targets: &TargetSet, trajectory: &[TrajectoryPoint]) -> TargetHits {
    let infeasible = targets
        .infeasible
        .iter()
        .map(|&tau| {
            trajectory
                .iter()
                .find(|p| p.violation <= tau)
                .map(|p| p.evaluation)
        })
        .collect();
    let feasible = targets
        .feasible
        .iter()
        .map(|&tau| {
            trajectory
                .iter()
                .find(|p| {
                    p.violation == 0.0 && (p.objective - targets.optimal_objective).abs() <= tau
                })
                .map(|p| p.evaluation)
        })
        .collect();
    TargetHits {
        infeasible,
        feasible,
    }
}

/// Right-continuous step function: fraction of (run, target) pairs hit by
/// each evaluation count, over `[1, budget]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfCurve {
    /// `(evaluations, fraction)` at every change point, plus pinned points at
    /// evaluation 1 and at the budget.
    pub points: Vec<(u64, f64)>,
    pub budget: u64,
    /// Total (run, target) pairs, the fraction's denominator.
    pub pair_count: usize,
}

pub fn ecdf_curve(hits: &[TargetHits], budget: u64) -> Result<EcdfCurve> {
    if hits.is_empty() {
        return Err(Error::EmptyInput("ecdf over zero runs".into()));
    }
    if budget == 0 {
        return Err(Error::InvalidConfig("budget must be positive".into()));
    }
    let pair_count = hits
        .iter()
        .map(|h| h.infeasible.len() + h.feasible.len())
        .sum::<usize>();
    let mut events: Vec<u64> = hits.iter().flat_map(|h| h.all_hits()).collect();
    events.sort_unstable();
    let denominator = pair_count as f64;
    let mut points: Vec<(u64, f64)> = Vec::new();
    let mut covered = 0usize;
    let mut idx = 0usize;
    // Hits land on evaluations within the budget by construction.
    debug_assert!(events.last().is_none_or(|&e| e <= budget));
    let push = |points: &mut Vec<(u64, f64)>, e: u64, frac: f64| {
        if points.last().map(|&(pe, _)| pe) == Some(e) {
            points.last_mut().expect("non-empty").1 = frac;
        } else {
            points.push((e, frac));
        }
    };
    while idx < events.len() {
        let e = events[idx];
        while idx < events.len() && events[idx] == e {
            covered += 1;
            idx += 1;
        }
        if points.is_empty() && e > 1 {
            push(&mut points, 1, 0.0);
        }
        push(&mut points, e, covered as f64 / denominator);
    }
    if points.is_empty() {
        push(&mut points, 1, 0.0);
    }
    let final_fraction = points.last().expect("non-empty").1;
    push(&mut points, budget, final_fraction);
    Ok(EcdfCurve {
        points,
        budget,
        pair_count,
    })
}

impl EcdfCurve {
    /// Fraction hit by evaluation `e` (0 before the first point).
    pub fn fraction_at(&self, e: u64) -> f64 {
        match self.points.partition_point(|&(pe, _)| pe <= e) {
            0 => 0.0,
            idx => self.points[idx - 1].1,
        }
    }

    /// The log-spaced evaluation grid the area factor averages over.
    pub fn checkpoints(&self) -> Vec<u64> {
        let span = (self.budget as f64).log10();
        (0..AREA_CHECKPOINTS)
            .map(|k| {
                let e = 10f64.powf(span * k as f64 / (AREA_CHECKPOINTS - 1) as f64);
                (e.round() as u64).max(1)
            })
            .collect()
    }

    /// Mean unresolved fraction over the checkpoint grid; 0 is ideal, 1 means
    /// nothing was ever hit. Lower is better.
    pub fn area_above(&self) -> f64 {
        let points = self.checkpoints();
        points
            .iter()
            .map(|&e| 1.0 - self.fraction_at(e))
            .sum::<f64>()
            / points.len() as f64
    }
}

/// One (algorithm, dimension) cell of the ranking input.
#[derive(Debug, Clone)]
pub struct BatchPerformance {
    pub indicators: IndicatorReport,
    pub ecdf: EcdfCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedAlgorithm {
    pub algorithm: String,
    /// Rank by (median violation, absolute error), ascending.
    pub quality_rank: f64,
    /// Rank by mean distance to the optimum; batches without feasible finals
    /// rank behind everyone.
    pub distance_rank: f64,
    /// Rank by unresolved ECDF area, ascending.
    pub ecdf_rank: f64,
    /// Mean of the three factor ranks.
    pub consensus: f64,
    pub mean_evaluations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionRanking {
    pub dimension: usize,
    /// Ordered best first (consensus, then mean evaluations, then name).
    pub entries: Vec<RankedAlgorithm>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverallRanking {
    pub algorithm: String,
    pub mean_consensus: f64,
    pub mean_evaluations: f64,
    /// 1-based position after the full tie-break ladder.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingTable {
    pub per_dimension: Vec<DimensionRanking>,
    pub overall: Vec<OverallRanking>,
}

/// Fractional (average) ranks, 1-based; equal keys share the mean of their
/// positions.
fn fractional_ranks<T, C>(keys: &[T], compare: C) -> Vec<f64>
where
    C: Fn(&T, &T) -> Ordering,
{
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| compare(&keys[a], &keys[b]));
    let mut ranks = vec![0.0; keys.len()];
    let mut i = 0;
    while i < keys.len() {
        let mut j = i;
        while j + 1 < keys.len() && compare(&keys[order[j + 1]], &keys[order[i]]) == Ordering::Equal
        {
            j += 1;
        }
        let shared = (i + j + 2) as f64 / 2.0;
        for &slot in &order[i..=j] {
            ranks[slot] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Builds the consensus ranking from per-(algorithm, dimension) batches.
/// Every algorithm must cover the same set of dimensions exactly once.
pub fn rank_algorithms(batches: &[BatchPerformance]) -> Result<RankingTable> {
    if batches.is_empty() {
        return Err(Error::EmptyInput("ranking input".into()));
    }
    let mut by_dimension: BTreeMap<usize, Vec<&BatchPerformance>> = BTreeMap::new();
    let mut dims_by_algo: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for b in batches {
        by_dimension
            .entry(b.indicators.dimension)
            .or_default()
            .push(b);
        dims_by_algo
            .entry(b.indicators.algorithm.as_str())
            .or_default()
            .push(b.indicators.dimension);
    }
    let mut reference: Vec<usize> = dims_by_algo.values().next().expect("non-empty").clone();
    reference.sort_unstable();
    for (algo, dims) in &mut dims_by_algo {
        dims.sort_unstable();
        if *dims != reference {
            return Err(Error::InconsistentBatch(format!(
                "algorithm '{algo}' covers dimensions {dims:?}, expected {reference:?}"
            )));
        }
        if dims.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InconsistentBatch(format!(
                "algorithm '{algo}' appears twice for one dimension"
            )));
        }
    }

    let mut per_dimension = Vec::new();
    let mut consensus_by_algo: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut evals_by_algo: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (&dimension, cell) in &by_dimension {
        let quality: Vec<(f64, f64)> = cell
            .iter()
            .map(|b| (b.indicators.median_violation, b.indicators.absolute_error))
            .collect();
        let quality_ranks = fractional_ranks(&quality, |a, b| {
            a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
        });
        let distance: Vec<f64> = cell
            .iter()
            .map(|b| {
                b.indicators
                    .mean_distance_to_optimum
                    .unwrap_or(f64::INFINITY)
            })
            .collect();
        let distance_ranks = fractional_ranks(&distance, |a, b| a.total_cmp(b));
        let areas: Vec<f64> = cell.iter().map(|b| b.ecdf.area_above()).collect();
        let ecdf_ranks = fractional_ranks(&areas, |a, b| a.total_cmp(b));

        let mut entries: Vec<RankedAlgorithm> = cell
            .iter()
            .enumerate()
            .map(|(i, b)| RankedAlgorithm {
                algorithm: b.indicators.algorithm.clone(),
                quality_rank: quality_ranks[i],
                distance_rank: distance_ranks[i],
                ecdf_rank: ecdf_ranks[i],
                consensus: (quality_ranks[i] + distance_ranks[i] + ecdf_ranks[i]) / 3.0,
                mean_evaluations: b.indicators.mean_evaluations,
            })
            .collect();
        entries.sort_by(|a, b| {
            a.consensus
                .total_cmp(&b.consensus)
                .then(a.mean_evaluations.total_cmp(&b.mean_evaluations))
                .then(a.algorithm.cmp(&b.algorithm))
        });
        for e in &entries {
            consensus_by_algo
                .entry(e.algorithm.clone())
                .or_default()
                .push(e.consensus);
            evals_by_algo
                .entry(e.algorithm.clone())
                .or_default()
                .push(e.mean_evaluations);
        }
        per_dimension.push(DimensionRanking { dimension, entries });
    }

    let mut overall: Vec<OverallRanking> = consensus_by_algo
        .into_iter()
        .map(|(algorithm, consensus)| {
            let mean_consensus = consensus.iter().sum::<f64>() / consensus.len() as f64;
            let evals = &evals_by_algo[&algorithm];
            let mean_evaluations = evals.iter().sum::<f64>() / evals.len() as f64;
            OverallRanking {
                algorithm,
                mean_consensus,
                mean_evaluations,
                rank: 0,
            }
        })
        .collect();
    overall.sort_by(|a, b| {
        a.mean_consensus
            .total_cmp(&b.mean_consensus)
            .then(a.mean_evaluations.total_cmp(&b.mean_evaluations))
            .then(a.algorithm.cmp(&b.algorithm))
    });
    for (i, entry) in overall.iter_mut().enumerate() {
        entry.rank = i + 1;
    }
    Ok(RankingTable {
        per_dimension,
        overall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemConfig;
    use crate::protocol::TerminationReason;

    fn res(objective: f64, violation: f64) -> EvaluationResult {
        EvaluationResult {
            objective,
            violation,
        }
    }

    fn record(algorithm: &str, n: usize, y: Vec<f64>, f: f64, v: f64, evals: u64) -> RunRecord {
        RunRecord {
            algorithm: algorithm.into(),
            dimension: n,
            seed: 0,
            config_hash: String::new(),
            harness_version: "test".into(),
            evaluations_used: evals,
            termination_reason: TerminationReason::BudgetExhausted,
            failure: None,
            final_candidate: Some(y),
            final_objective: Some(f),
            final_violation: Some(v),
            trajectory: vec![TrajectoryPoint {
                evaluation: 1,
                objective: f,
                violation: v,
            }],
        }
    }

    fn instance(n: usize) -> ProblemInstance {
        ProblemInstance::new(ProblemConfig::new(n)).unwrap()
    }

    #[test]
    fn median_of_shuffled_feasible_batch() {
        let mut values: Vec<EvaluationResult> = [11, 3, 7, 15, 1, 9, 5, 13, 2, 8, 14, 6, 10, 4, 12]
            .iter()
            .map(|&f| res(f as f64, 0.0))
            .collect();
        let median = median_solution(&values).unwrap();
        assert_eq!(median.objective, 8.0);
        values.clear();
        assert!(median_solution(&values).is_err());
    }

    #[test]
    fn median_prefers_low_violation() {
        // 8 infeasible, 7 feasible: the median (8th of 15) is the worst
        // feasible... sorted by (violation, objective) the first 7 are
        // feasible, so index 7 is the least-violating infeasible one.
        let mut batch = Vec::new();
        for k in 0..7 {
            batch.push(res(10.0 + k as f64, 0.0));
        }
        for k in 0..8 {
            batch.push(res(5.0, 1.0 + k as f64));
        }
        let median = median_solution(&batch).unwrap();
        assert_eq!(median.violation, 1.0);
    }

    #[test]
    fn indicators_for_ideal_batch() {
        let inst = instance(2);
        let t = vec![8.0, 8.0];
        let records: Vec<RunRecord> = (0..15)
            .map(|_| record("a", 2, t.clone(), 8.0, 0.0, 300))
            .collect();
        let report = compute_indicators(&records, &inst).unwrap();
        assert_eq!(report.best_objective, 8.0);
        assert_eq!(report.median_objective, 8.0);
        assert_eq!(report.median_violation, 0.0);
        assert_eq!(report.absolute_error, 0.0);
        assert_eq!(report.feasibility_ratio, 1.0);
        assert_eq!(report.mean_distance_to_optimum, Some(0.0));
        assert_eq!(report.mean_evaluations, 300.0);
        assert_eq!(report.runs, 15);
    }

    #[test]
    fn indicators_near_optimal_batch() {
        let inst = instance(2);
        let records: Vec<RunRecord> = (0..15)
            .map(|k| {
                let err = k as f64 * 1e-9;
                record("a", 2, vec![8.0 + err, 8.0], 8.0 + err, 0.0, 100 + k)
            })
            .collect();
        let report = compute_indicators(&records, &inst).unwrap();
        assert_eq!(report.median_objective, 8.0 + 7e-9);
        assert_eq!(report.absolute_error, (8.0 + 7e-9) - 8.0);
        assert_eq!(report.feasibility_ratio, 1.0);
        // Distances reproduce the per-record errors through the same
        // norm-and-sorted-sum pipeline the report uses.
        let mut distances: Vec<f64> = (0..15)
            .map(|k| (((8.0 + k as f64 * 1e-9) - 8.0).powi(2)).sqrt())
            .collect();
        let expected = stable_mean(&mut distances);
        assert_eq!(report.mean_distance_to_optimum, Some(expected));
    }

    #[test]
    fn indicators_mark_infeasible_batches() {
        let inst = instance(2);
        let records: Vec<RunRecord> = (0..15)
            .map(|k| record("a", 2, vec![0.0, 0.0], 0.0, 1.0 + k as f64, 10))
            .collect();
        let report = compute_indicators(&records, &inst).unwrap();
        assert_eq!(report.feasibility_ratio, 0.0);
        assert_eq!(report.mean_distance_to_optimum, None);
        assert_eq!(report.median_violation, 8.0);
    }

    #[test]
    fn indicators_are_permutation_invariant() {
        let inst = instance(2);
        let mut records: Vec<RunRecord> = (0..15)
            .map(|k| {
                let f = 8.0 + (k as f64 - 7.0) * 1e-3;
                let v = if k % 3 == 0 { 0.0 } else { k as f64 * 0.1 };
                record("a", 2, vec![f, 8.0], f, v, 50 + 13 * k)
            })
            .collect();
        let base = compute_indicators(&records, &inst).unwrap();
        records.reverse();
        assert_eq!(compute_indicators(&records, &inst).unwrap(), base);
        records.swap(0, 7);
        records.swap(3, 11);
        assert_eq!(compute_indicators(&records, &inst).unwrap(), base);
    }

    #[test]
    fn indicators_reject_mixed_batches() {
        let inst = instance(2);
        let records = vec![
            record("a", 2, vec![8.0, 8.0], 8.0, 0.0, 10),
            record("b", 2, vec![8.0, 8.0], 8.0, 0.0, 10),
        ];
        assert!(matches!(
            compute_indicators(&records, &inst),
            Err(Error::InconsistentBatch(_))
        ));
        let records = vec![record("a", 3, vec![27.0; 3], 27.0, 0.0, 10)];
        assert!(compute_indicators(&records, &inst).is_err());
    }

    #[test]
    fn target_counts_and_endpoints() {
        let targets = make_targets(8.0);
        assert_eq!(targets.infeasible().len(), INFEASIBLE_TARGET_COUNT);
        assert_eq!(targets.feasible().len(), FEASIBLE_TARGET_COUNT);
        assert_eq!(targets.len(), TOTAL_TARGET_COUNT);
        assert_eq!(targets.infeasible()[0], 1e4);
        assert_eq!(targets.infeasible()[49], 1e-6);
        assert_eq!(targets.infeasible()[50], 0.0);
        assert_eq!(targets.feasible()[0], 1e0);
        assert_eq!(targets.feasible()[51], 1e-8);
    }

    #[test]
    fn targets_are_strictly_decreasing_with_constant_ratio() {
        let targets = make_targets(8.0);
        for w in targets.infeasible().windows(2) {
            assert!(w[1] < w[0], "infeasible targets must fall: {w:?}");
        }
        for w in targets.feasible().windows(2) {
            assert!(w[1] < w[0], "feasible targets must fall: {w:?}");
        }
        let ratio = 10f64.powf(-10.0 / 49.0);
        for w in targets.infeasible()[..50].windows(2) {
            assert!((w[1] / w[0] - ratio).abs() <= 1e-12 * ratio, "{w:?}");
        }
        let ratio = 10f64.powf(-8.0 / 51.0);
        for w in targets.feasible().windows(2) {
            assert!((w[1] / w[0] - ratio).abs() <= 1e-12 * ratio, "{w:?}");
        }
    }

    #[test]
    fn instant_optimum_hits_every_target_at_one() {
        let targets = make_targets(8.0);
        let trajectory = [TrajectoryPoint {
            evaluation: 1,
            objective: 8.0,
            violation: 0.0,
        }];
        let hits = update_hits(&targets, &trajectory);
        assert_eq!(hits.total(), TOTAL_TARGET_COUNT);
        assert!(hits
            .infeasible
            .iter()
            .chain(hits.feasible.iter())
            .all(|h| *h == Some(1)));
        let curve = ecdf_curve(&[hits], 40_000).unwrap();
        assert_eq!(curve.fraction_at(1), 1.0);
        assert_eq!(curve.area_above(), 0.0);
    }

    #[test]
    fn staged_trajectory_hits_in_stages() {
        let targets = make_targets(8.0);
        let trajectory = [
            TrajectoryPoint {
                evaluation: 1,
                objective: 50.0,
                violation: 1e3,
            },
            TrajectoryPoint {
                evaluation: 5,
                objective: 20.0,
                violation: 1.0,
            },
            TrajectoryPoint {
                evaluation: 9,
                objective: 9.0,
                violation: 0.0,
            },
        ];
        let hits = update_hits(&targets, &trajectory);
        for (tau, hit) in targets.infeasible().iter().zip(hits.infeasible.iter()) {
            let expected = if *tau >= 1e3 {
                Some(1)
            } else if *tau >= 1.0 {
                Some(5)
            } else {
                Some(9)
            };
            assert_eq!(*hit, expected, "violation target {tau}");
        }
        // Feasible from evaluation 9 with gap 1.0: only the 1e0 target hits.
        assert_eq!(hits.feasible[0], Some(9));
        assert!(hits.feasible[1..].iter().all(|h| h.is_none()));
        assert_eq!(hits.total(), INFEASIBLE_TARGET_COUNT + 1);
    }

    #[test]
    fn boundary_hits_count() {
        let targets = make_targets(0.0);
        let trajectory = [TrajectoryPoint {
            evaluation: 2,
            objective: 1.0,
            violation: 1e-6,
        }];
        let hits = update_hits(&targets, &trajectory);
        // Exactly on the 1e-6 violation target: counts.
        assert_eq!(hits.infeasible[49], Some(2));
        assert_eq!(
            hits.infeasible[50], None,
            "zero target needs exact feasibility"
        );
    }

    #[test]
    fn ecdf_is_monotone_and_bounded() {
        let targets = make_targets(8.0);
        let slow = update_hits(
            &targets,
            &[
                TrajectoryPoint {
                    evaluation: 10,
                    objective: 30.0,
                    violation: 5.0,
                },
                TrajectoryPoint {
                    evaluation: 500,
                    objective: 8.5,
                    violation: 0.0,
                },
            ],
        );
        let fast = update_hits(
            &targets,
            &[TrajectoryPoint {
                evaluation: 2,
                objective: 8.0 + 1e-9,
                violation: 0.0,
            }],
        );
        let curve = ecdf_curve(&[slow, fast], 40_000).unwrap();
        assert_eq!(curve.pair_count, 2 * TOTAL_TARGET_COUNT);
        let mut last = 0.0;
        for &(_, frac) in &curve.points {
            assert!((0.0..=1.0).contains(&frac));
            assert!(frac >= last, "fractions must not fall");
            last = frac;
        }
        assert!(curve.points.windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(curve.points.last().unwrap().0, 40_000);
        assert_eq!(curve.fraction_at(0), 0.0);
    }

    #[test]
    fn earlier_hits_shrink_the_unresolved_area() {
        let targets = make_targets(8.0);
        let early = update_hits(
            &targets,
            &[TrajectoryPoint {
                evaluation: 1,
                objective: 8.0,
                violation: 0.0,
            }],
        );
        let late = update_hits(
            &targets,
            &[TrajectoryPoint {
                evaluation: 39_000,
                objective: 8.0,
                violation: 0.0,
            }],
        );
        let a = ecdf_curve(&[early], 40_000).unwrap().area_above();
        let b = ecdf_curve(&[late], 40_000).unwrap().area_above();
        assert!(a < b, "early resolution must dominate: {a} vs {b}");
    }

    fn perf(algorithm: &str, dimension: usize, hit_at: u64) -> BatchPerformance {
        let targets = make_targets(8.0);
        let hits = update_hits(
            &targets,
            &[TrajectoryPoint {
                evaluation: hit_at,
                objective: 8.0,
                violation: 0.0,
            }],
        );
        let ecdf = ecdf_curve(&[hits], 40_000).unwrap();
        let indicators = IndicatorReport {
            algorithm: algorithm.into(),
            dimension,
            runs: 15,
            optimal_objective: 8.0,
            best_objective: 8.0,
            median_objective: 8.0,
            median_violation: 0.0,
            absolute_error: 0.0,
            feasibility_ratio: 1.0,
            mean_distance_to_optimum: Some(0.0),
            mean_evaluations: 1000.0,
        };
        BatchPerformance { indicators, ecdf }
    }

    #[test]
    fn dominating_ecdf_wins_equal_quality() {
        let table = rank_algorithms(&[perf("slow", 2, 30_000), perf("fast", 2, 10)]).unwrap();
        let dim = &table.per_dimension[0];
        assert_eq!(dim.entries[0].algorithm, "fast");
        // Equal quality and distance: those factors tie at 1.5 each.
        assert_eq!(dim.entries[0].quality_rank, 1.5);
        assert_eq!(dim.entries[0].distance_rank, 1.5);
        assert_eq!(dim.entries[0].ecdf_rank, 1.0);
        assert_eq!(table.overall[0].algorithm, "fast");
        assert_eq!(table.overall[0].rank, 1);
        assert_eq!(table.overall[1].rank, 2);
    }

    #[test]
    fn ranking_is_input_order_invariant() {
        let a = rank_algorithms(&[perf("x", 2, 100), perf("y", 2, 50)]).unwrap();
        let b = rank_algorithms(&[perf("y", 2, 50), perf("x", 2, 100)]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_batches_rank_last_on_distance() {
        let mut bad = perf("bad", 2, 30_000);
        bad.indicators.feasibility_ratio = 0.0;
        bad.indicators.mean_distance_to_optimum = None;
        let table = rank_algorithms(&[bad, perf("good", 2, 10)]).unwrap();
        let entries = &table.per_dimension[0].entries;
        let bad_entry = entries.iter().find(|e| e.algorithm == "bad").unwrap();
        assert_eq!(bad_entry.distance_rank, 2.0);
    }

    #[test]
    fn ranking_rejects_ragged_dimension_coverage() {
        let err = rank_algorithms(&[perf("x", 2, 10), perf("y", 2, 10), perf("x", 3, 10)]);
        assert!(matches!(err, Err(Error::InconsistentBatch(_))));
    }

    #[test]
    fn name_breaks_residual_ties() {
        let table = rank_algorithms(&[perf("zeta", 2, 10), perf("alpha", 2, 10)]).unwrap();
        assert_eq!(table.overall[0].algorithm, "alpha");
    }
}
