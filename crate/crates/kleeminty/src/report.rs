//! Report emission: turns a records directory into indicator CSVs, ECDF
//! step-function data files and the consensus ranking table.
//!
//! Reports are a pure function of the directory contents; damaged record
//! files are listed and skipped so partial reports still come out.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::{
    compute_indicators, ecdf_curve, make_targets, rank_algorithms, update_hits, BatchPerformance,
    IndicatorReport, RankingTable,
};
use crate::problem::ProblemInstance;
use crate::protocol::{RunRecord, TerminationRule};
use crate::suite::{load_manifest, load_records, SkippedRecord, SuiteManifest};

/// Everything derived from one records directory.
#[derive(Debug)]
pub struct SuiteAnalysis {
    pub manifest: SuiteManifest,
    /// One entry per (algorithm, dimension) batch, sorted.
    pub batches: Vec<BatchPerformance>,
    /// Record files that would not load.
    pub skipped: Vec<SkippedRecord>,
    /// Batches that could not be analyzed, with reasons.
    pub notes: Vec<String>,
}

/// Loads a directory and computes indicators plus ECDF curves per batch.
pub fn analyze_directory(dir: &Path) -> Result<SuiteAnalysis> {
    let manifest = load_manifest(dir)?;
    let (records, skipped) = load_records(dir, &manifest);
    let mut groups: BTreeMap<(String, usize), Vec<RunRecord>> = BTreeMap::new();
    for (_, record) in records {
        groups
            .entry((record.algorithm.clone(), record.dimension))
            .or_default()
            .push(record);
    }
    let mut batches = Vec::new();
    let mut notes = Vec::new();
    for ((algorithm, dimension), group) in groups {
        let instance = match ProblemInstance::new(manifest.config.problem_config(dimension)) {
            Ok(instance) => instance,
            Err(err) => {
                notes.push(format!("{algorithm} N={dimension}: {err}"));
                continue;
            }
        };
        let indicators = match compute_indicators(&group, &instance) {
            Ok(indicators) => indicators,
            Err(err) => {
                notes.push(format!("{algorithm} N={dimension}: {err}"));
                continue;
            }
        };
        let targets = make_targets(instance.optimal_objective());
        let hits: Vec<_> = group
            .iter()
            .map(|r| update_hits(&targets, &r.trajectory))
            .collect();
        let budget = TerminationRule::for_dimension(dimension).max_evaluations;
        match ecdf_curve(&hits, budget) {
            Ok(ecdf) => batches.push(BatchPerformance { indicators, ecdf }),
            Err(err) => notes.push(format!("{algorithm} N={dimension}: {err}")),
        }
    }
    Ok(SuiteAnalysis {
        manifest,
        batches,
        skipped,
        notes,
    })
}

/// One indicator CSV row in the fixed column order
/// `N,f_opt,f_best,f_med,nu_med,abs_err,FR,param_dev,meanFevals`.
fn indicator_row(report: &IndicatorReport) -> String {
    let param_dev = match report.mean_distance_to_optimum {
        Some(d) => format!("{d}"),
        None => "-".to_string(),
    };
    format!(
        "{},{},{},{},{},{},{:.2},{},{}",
        report.dimension,
        report.optimal_objective,
        report.best_objective,
        report.median_objective,
        report.median_violation,
        report.absolute_error,
        report.feasibility_ratio,
        param_dev,
        report.mean_evaluations,
    )
}

pub const INDICATOR_HEADER: &str = "N,f_opt,f_best,f_med,nu_med,abs_err,FR,param_dev,meanFevals";

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Files written by `emit_reports`, plus what had to be skipped.
#[derive(Debug)]
pub struct ReportSummary {
    pub files: Vec<PathBuf>,
    pub skipped: Vec<SkippedRecord>,
    pub notes: Vec<String>,
}

/// Emits one indicator CSV per algorithm and one ECDF data file per
/// (algorithm, dimension) batch into `out_dir`.
pub fn emit_reports(records_dir: &Path, out_dir: &Path) -> Result<ReportSummary> {
    let analysis = analyze_directory(records_dir)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::new();

    let algorithms: BTreeSet<&str> = analysis
        .batches
        .iter()
        .map(|b| b.indicators.algorithm.as_str())
        .collect();
    for algorithm in algorithms {
        let mut csv = String::from(INDICATOR_HEADER);
        csv.push('\n');
        for batch in analysis
            .batches
            .iter()
            .filter(|b| b.indicators.algorithm == algorithm)
        {
            csv.push_str(&indicator_row(&batch.indicators));
            csv.push('\n');
        }
        let path = out_dir.join(format!("indicators_{algorithm}.csv"));
        write_text(&path, &csv)?;
        files.push(path);
    }

    for batch in &analysis.batches {
        let mut dat = String::new();
        let _ = writeln!(
            dat,
            "# ecdf {} N={} (pairs={}, budget={})",
            batch.indicators.algorithm,
            batch.indicators.dimension,
            batch.ecdf.pair_count,
            batch.ecdf.budget,
        );
        dat.push_str("# evaluations fraction\n");
        for &(evaluation, fraction) in &batch.ecdf.points {
            let _ = writeln!(dat, "{evaluation} {fraction}");
        }
        let path = out_dir.join(format!(
            "ecdf_{}_N{:02}.dat",
            batch.indicators.algorithm, batch.indicators.dimension
        ));
        write_text(&path, &dat)?;
        files.push(path);
    }

    Ok(ReportSummary {
        files,
        skipped: analysis.skipped,
        notes: analysis.notes,
    })
}

/// Renders the ranking as CSV: per-dimension rows first, then `overall` rows.
/// Overall rows leave the three factor columns empty.
fn ranking_csv(table: &RankingTable) -> String {
    let mut csv = String::from(
        "scope,position,algorithm,quality_rank,param_dev_rank,ecdf_rank,consensus,meanFevals\n",
    );
    for dim in &table.per_dimension {
        for (position, entry) in dim.entries.iter().enumerate() {
            let _ = writeln!(
                csv,
                "N={:02},{},{},{},{},{},{},{}",
                dim.dimension,
                position + 1,
                entry.algorithm,
                entry.quality_rank,
                entry.distance_rank,
                entry.ecdf_rank,
                entry.consensus,
                entry.mean_evaluations,
            );
        }
    }
    for entry in &table.overall {
        let _ = writeln!(
            csv,
            "overall,{},{},,,,{},{}",
            entry.rank, entry.algorithm, entry.mean_consensus, entry.mean_evaluations,
        );
    }
    csv
}

/// Ranks all batches in a records directory and writes `ranking.csv`.
pub fn emit_ranking(records_dir: &Path, out_dir: &Path) -> Result<(RankingTable, PathBuf)> {
    let analysis = analyze_directory(records_dir)?;
    let table = rank_algorithms(&analysis.batches)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join("ranking.csv");
    write_text(&path, &ranking_csv(&table))?;
    Ok((table, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::AlgorithmSpec;
    use crate::suite::{run_suite, SuiteConfig};
    use tempfile::tempdir;

    fn ideal_report(n: usize, evals: f64) -> IndicatorReport {
        let cube = (n as f64).powi(3);
        IndicatorReport {
            algorithm: "a".into(),
            dimension: n,
            runs: 15,
            optimal_objective: cube,
            best_objective: cube,
            median_objective: cube,
            median_violation: 0.0,
            absolute_error: 0.0,
            feasibility_ratio: 1.0,
            mean_distance_to_optimum: Some(0.0),
            mean_evaluations: evals,
        }
    }

    #[test]
    fn ideal_batch_row_matches_the_fixed_layout() {
        assert_eq!(
            indicator_row(&ideal_report(2, 300.0)),
            "2,8,8,8,0,0,1.00,0,300"
        );
    }

    #[test]
    fn undefined_distance_prints_as_dash() {
        let report = IndicatorReport {
            feasibility_ratio: 0.0,
            mean_distance_to_optimum: None,
            median_violation: 2.5,
            absolute_error: 8.0,
            median_objective: 0.0,
            best_objective: 0.5,
            ..ideal_report(2, 40000.0)
        };
        assert_eq!(indicator_row(&report), "2,8,0.5,0,2.5,8,0.00,-,40000");
    }

    fn tiny_suite(dir: &Path) -> SuiteManifest {
        let config = SuiteConfig {
            dimensions: vec![2, 3],
            runs: 3,
            algorithms: vec![
                AlgorithmSpec::RandomSearch,
                AlgorithmSpec::DifferentialEvolution(Default::default()),
            ],
            override_conventions: true,
            ..SuiteConfig::default()
        };
        run_suite(&config, dir).unwrap()
    }

    #[test]
    fn reports_cover_every_batch() {
        let records = tempdir().unwrap();
        let out = tempdir().unwrap();
        tiny_suite(records.path());
        let summary = emit_reports(records.path(), out.path()).unwrap();
        assert!(summary.skipped.is_empty());
        assert!(summary.notes.is_empty());
        // 2 algorithms -> 2 CSVs; 2 algorithms x 2 dims -> 4 ECDF files.
        assert_eq!(summary.files.len(), 6);
        let csv = fs::read_to_string(out.path().join("indicators_random_search.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(INDICATOR_HEADER));
        assert_eq!(csv.lines().count(), 3, "header plus one row per dimension");
        for line in lines {
            assert_eq!(line.split(',').count(), 9, "bad row: {line}");
        }
    }

    #[test]
    fn ecdf_files_are_two_column_step_data() {
        let records = tempdir().unwrap();
        let out = tempdir().unwrap();
        tiny_suite(records.path());
        emit_reports(records.path(), out.path()).unwrap();
        let dat = fs::read_to_string(out.path().join("ecdf_random_search_N02.dat")).unwrap();
        let mut fractions = Vec::new();
        for line in dat.lines() {
            if line.starts_with('#') {
                continue;
            }
            let mut cols = line.split_whitespace();
            let _evals: u64 = cols.next().unwrap().parse().unwrap();
            let fraction: f64 = cols.next().unwrap().parse().unwrap();
            assert_eq!(cols.next(), None);
            fractions.push(fraction);
        }
        assert!(!fractions.is_empty());
        assert!(fractions.windows(2).all(|w| w[0] <= w[1]));
        assert!(fractions.iter().all(|f| (0.0..=1.0).contains(f)));
    }

    #[test]
    fn corrupt_records_yield_partial_reports() {
        let records = tempdir().unwrap();
        let out = tempdir().unwrap();
        let manifest = tiny_suite(records.path());
        // Corrupt one random_search record: that batch drops out with a
        // note, the rest still report.
        let victim = manifest
            .records
            .iter()
            .find(|f| f.contains("N02_r01"))
            .unwrap();
        fs::write(records.path().join(victim), b"garbage").unwrap();
        let summary = emit_reports(records.path(), out.path()).unwrap();
        assert_eq!(summary.skipped.len(), 1);
        assert!(out
            .path()
            .join("indicators_differential_evolution.csv")
            .is_file());
    }

    #[test]
    fn ranking_csv_lists_dimensions_then_overall() {
        let records = tempdir().unwrap();
        let out = tempdir().unwrap();
        tiny_suite(records.path());
        let (table, path) = emit_ranking(records.path(), out.path()).unwrap();
        assert_eq!(table.per_dimension.len(), 2);
        assert_eq!(table.overall.len(), 2);
        let csv = fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines.len(),
            1 + 4 + 2,
            "header, 2x2 dimension rows, 2 overall rows"
        );
        assert!(lines[1].starts_with("N=02,1,"));
        assert!(lines[5].starts_with("overall,1,"));
    }
}
