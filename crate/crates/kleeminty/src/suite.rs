//! Campaign orchestration: fans (algorithm, dimension, run) tasks out to a
//! worker pool, writes one JSON record per run plus a manifest, and validates
//! directories written earlier.
//!
//! Nothing here records wall-clock time or hostnames: rerunning a suite with
//! the same config must produce byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::problem::{ProblemConfig, ProblemInstance};
use crate::protocol::{lex_compare, run_experiment, RunRecord, TerminationReason, TerminationRule};
use crate::solvers::AlgorithmSpec;

/// Batches below this run count need an explicit override.
pub const CONVENTIONAL_RUNS: usize = 15;
/// The standard dimension ladder.
pub const BENCHMARK_DIMENSIONS: [usize; 6] = [2, 3, 5, 10, 20, 40];
pub const DEFAULT_BASE_SEED: u64 = 42;
pub const MANIFEST_FILE: &str = "manifest.json";

fn default_dimensions() -> Vec<usize> {
    BENCHMARK_DIMENSIONS.to_vec()
}

fn default_runs() -> usize {
    CONVENTIONAL_RUNS
}

fn default_base_seed() -> u64 {
    DEFAULT_BASE_SEED
}

fn default_algorithms() -> Vec<AlgorithmSpec> {
    vec![
        AlgorithmSpec::RandomSearch,
        AlgorithmSpec::DifferentialEvolution(Default::default()),
        AlgorithmSpec::EvolutionStrategy(Default::default()),
    ]
}

fn default_epsilon() -> f64 {
    crate::problem::DEFAULT_EPSILON
}

fn default_rotation_angle() -> f64 {
    crate::problem::DEFAULT_ROTATION_ANGLE
}

fn default_translation_scale() -> f64 {
    crate::problem::DEFAULT_TRANSLATION_SCALE
}

fn default_box_upper_scale() -> f64 {
    crate::problem::DEFAULT_BOX_UPPER_SCALE
}

/// Full description of a campaign. Serialized into the manifest, so every
/// field must stay deterministic — no paths, clocks or host details.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_dimensions")]
    pub dimensions: Vec<usize>,
    /// Independent runs per (algorithm, dimension) batch.
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Run `i` of every batch draws from a generator seeded `base_seed + i`.
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_rotation_angle")]
    pub rotation_angle: f64,
    #[serde(default = "default_translation_scale")]
    pub translation_scale: f64,
    #[serde(default = "default_box_upper_scale")]
    pub box_upper_scale: f64,
    /// Permits run counts below the convention and off-interval angles.
    #[serde(default)]
    pub override_conventions: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            dimensions: default_dimensions(),
            runs: default_runs(),
            base_seed: default_base_seed(),
            algorithms: default_algorithms(),
            epsilon: default_epsilon(),
            rotation_angle: default_rotation_angle(),
            translation_scale: default_translation_scale(),
            box_upper_scale: default_box_upper_scale(),
            override_conventions: false,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimensions.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one dimension is required".into(),
            ));
        }
        let mut seen = self.dimensions.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("duplicate dimensions".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidConfig("at least one run is required".into()));
        }
        if self.runs < CONVENTIONAL_RUNS && !self.override_conventions {
            return Err(Error::ConventionViolated(format!(
                "{} runs per batch is below the conventional {CONVENTIONAL_RUNS}",
                self.runs
            )));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one algorithm is required".into(),
            ));
        }
        let mut names: Vec<&str> = self.algorithms.iter().map(|a| a.name()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(
                "duplicate algorithm entries would overwrite each other's records".into(),
            ));
        }
        for spec in &self.algorithms {
            spec.validate()?;
        }
        for &n in &self.dimensions {
            self.problem_config(n).validate()?;
        }
        Ok(())
    }

    /// Problem configuration for one dimension of this campaign.
    pub fn problem_config(&self, dimension: usize) -> ProblemConfig {
        ProblemConfig {
            dimension,
            epsilon: self.epsilon,
            rotation_angle: self.rotation_angle,
            translation_scale: self.translation_scale,
            box_upper_scale: self.box_upper_scale,
            allow_any_angle: self.override_conventions,
        }
    }

    /// SHA-256 over the serialized config; field order is fixed by the
    /// struct, so equal configs hash equally.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(self).expect("config serializes"));
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn record_count(&self) -> usize {
        self.algorithms.len() * self.dimensions.len() * self.runs
    }
}

/// `record_{algorithm}_N{dim:02}_r{run:02}.json`
pub fn record_file_name(algorithm: &str, dimension: usize, run: usize) -> String {
    format!("record_{algorithm}_N{dimension:02}_r{run:02}.json")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteManifest {
    pub harness_version: String,
    pub config: SuiteConfig,
    pub config_hash: String,
    /// Record files in sorted order; written only after every record landed.
    pub records: Vec<String>,
}

fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::json(path, e))?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::json(path, e))
}

/// Runs one (algorithm, dimension) batch: `runs` independent experiments with
/// seeds `base_seed..base_seed + runs`. Work is spread across the pool; the
/// result order is by run index either way.
pub fn run_batch(
    config: &SuiteConfig,
    spec: &AlgorithmSpec,
    dimension: usize,
) -> Result<Vec<RunRecord>> {
    run_batch_with_rule(
        config,
        spec,
        dimension,
        &TerminationRule::for_dimension(dimension),
    )
}

/// Like [`run_batch`] but under an explicit termination rule instead of the
/// conventional one.
pub fn run_batch_with_rule(
    config: &SuiteConfig,
    spec: &AlgorithmSpec,
    dimension: usize,
    rule: &TerminationRule,
) -> Result<Vec<RunRecord>> {
    let instance = ProblemInstance::new(config.problem_config(dimension))?;
    #[cfg(feature = "parallel")]
    {
        Ok((0..config.runs)
            .into_par_iter()
            .map(|i| {
                let mut optimizer = spec.build();
                run_experiment(
                    optimizer.as_mut(),
                    &instance,
                    rule,
                    config.base_seed + i as u64,
                )
            })
            .collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_batch_with(config, spec, &instance, rule)
    }
}

/// Single-threaded batch runner; the fallback when the `parallel` feature is
/// off and the reference the bench suite compares against.
pub fn run_batch_sequential(
    config: &SuiteConfig,
    spec: &AlgorithmSpec,
    dimension: usize,
) -> Result<Vec<RunRecord>> {
    let instance = ProblemInstance::new(config.problem_config(dimension))?;
    let rule = TerminationRule::for_dimension(dimension);
    run_batch_with(config, spec, &instance, &rule)
}

fn run_batch_with(
    config: &SuiteConfig,
    spec: &AlgorithmSpec,
    instance: &ProblemInstance,
    rule: &TerminationRule,
) -> Result<Vec<RunRecord>> {
    Ok((0..config.runs)
        .map(|i| {
            let mut optimizer = spec.build();
            run_experiment(
                optimizer.as_mut(),
                instance,
                rule,
                config.base_seed + i as u64,
            )
        })
        .collect())
}

/// Executes the full campaign into `out_dir` and returns the manifest.
/// Every run writes its own file as it finishes; the manifest goes last, so a
/// directory with a manifest is always complete.
pub fn run_suite(config: &SuiteConfig, out_dir: &Path) -> Result<SuiteManifest> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut instances: BTreeMap<usize, ProblemInstance> = BTreeMap::new();
    for &n in &config.dimensions {
        instances.insert(n, ProblemInstance::new(config.problem_config(n))?);
    }

    struct Task<'a> {
        spec: &'a AlgorithmSpec,
        instance: &'a ProblemInstance,
        rule: TerminationRule,
        seed: u64,
        file: String,
    }
    let mut tasks = Vec::with_capacity(config.record_count());
    for spec in &config.algorithms {
        for (&n, instance) in &instances {
            for run in 0..config.runs {
                tasks.push(Task {
                    spec,
                    instance,
                    rule: TerminationRule::for_dimension(n),
                    seed: config.base_seed + run as u64,
                    file: record_file_name(spec.name(), n, run),
                });
            }
        }
    }

    let execute = |task: &Task| -> Result<String> {
        let mut optimizer = task.spec.build();
        let record = run_experiment(optimizer.as_mut(), task.instance, &task.rule, task.seed);
        write_pretty_json(&out_dir.join(&task.file), &record)?;
        Ok(task.file.clone())
    };
    #[cfg(feature = "parallel")]
    let mut records: Vec<String> = tasks.par_iter().map(execute).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let mut records: Vec<String> = tasks.iter().map(execute).collect::<Result<_>>()?;
    records.sort_unstable();

    let manifest = SuiteManifest {
        harness_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        config_hash: config.fingerprint(),
        records,
    };
    write_pretty_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn load_manifest(dir: &Path) -> Result<SuiteManifest> {
    read_json(&dir.join(MANIFEST_FILE))
}

/// A record file the loader had to skip, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedRecord {
    pub file: String,
    pub reason: String,
}

/// Loads every record the manifest lists, tolerating missing or corrupt
/// files: those are returned as skipped entries instead of failing the load.
pub fn load_records(
    dir: &Path,
    manifest: &SuiteManifest,
) -> (Vec<(String, RunRecord)>, Vec<SkippedRecord>) {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for file in &manifest.records {
        match read_json::<RunRecord>(&dir.join(file)) {
            Ok(record) => records.push((file.clone(), record)),
            Err(err) => skipped.push(SkippedRecord {
                file: file.clone(),
                reason: err.to_string(),
            }),
        }
    }
    (records, skipped)
}

/// Outcome of `validate_directory`: per-file problems, empty means clean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub records_checked: usize,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Cross-checks a suite directory against its manifest: the file list, every
/// record's header, trajectory monotonicity and the termination semantics.
pub fn validate_directory(dir: &Path) -> Result<ValidationReport> {
    let manifest = load_manifest(dir)?;
    let mut problems = Vec::new();
    if let Err(err) = manifest.config.validate() {
        problems.push(format!("manifest config: {err}"));
    }
    if manifest.config_hash != manifest.config.fingerprint() {
        problems.push("manifest config_hash does not match the config".to_string());
    }
    let expected: Vec<String> = {
        let mut files = Vec::new();
        for spec in &manifest.config.algorithms {
            for &n in &manifest.config.dimensions {
                for run in 0..manifest.config.runs {
                    files.push(record_file_name(spec.name(), n, run));
                }
            }
        }
        files.sort_unstable();
        files
    };
    if manifest.records != expected {
        problems.push(format!(
            "manifest lists {} records, config implies {}",
            manifest.records.len(),
            expected.len()
        ));
    }

    let (records, skipped) = load_records(dir, &manifest);
    for s in &skipped {
        problems.push(format!("{}: {}", s.file, s.reason));
    }
    let algorithm_names: Vec<&str> = manifest
        .config
        .algorithms
        .iter()
        .map(|a| a.name())
        .collect();
    for (file, record) in &records {
        let mut complain = |msg: String| problems.push(format!("{file}: {msg}"));
        if !algorithm_names.contains(&record.algorithm.as_str()) {
            complain(format!("unknown algorithm '{}'", record.algorithm));
        }
        if !manifest.config.dimensions.contains(&record.dimension) {
            complain(format!(
                "dimension {} is not part of the campaign",
                record.dimension
            ));
        }
        let seed_lo = manifest.config.base_seed;
        let seed_hi = seed_lo + manifest.config.runs as u64;
        if !(seed_lo..seed_hi).contains(&record.seed) {
            complain(format!(
                "seed {} outside [{seed_lo}, {seed_hi})",
                record.seed
            ));
        }
        let rule = TerminationRule::for_dimension(record.dimension);
        if record.evaluations_used > rule.max_evaluations {
            complain(format!(
                "{} evaluations exceed the budget {}",
                record.evaluations_used, rule.max_evaluations
            ));
        }
        for w in record.trajectory.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if b.evaluation <= a.evaluation {
                complain(format!(
                    "trajectory evaluations not increasing at {} -> {}",
                    a.evaluation, b.evaluation
                ));
                break;
            }
            let earlier = crate::problem::EvaluationResult {
                objective: a.objective,
                violation: a.violation,
            };
            let later = crate::problem::EvaluationResult {
                objective: b.objective,
                violation: b.violation,
            };
            if lex_compare(&later, &earlier) != std::cmp::Ordering::Less {
                complain(format!(
                    "trajectory not strictly improving at evaluation {}",
                    b.evaluation
                ));
                break;
            }
        }
        match (record.final_result(), record.trajectory.last()) {
            (Some(fin), Some(last)) => {
                if fin.objective != last.objective || fin.violation != last.violation {
                    complain("final solution disagrees with the trajectory tail".to_string());
                }
            }
            (None, None) => {}
            _ => complain("final solution and trajectory disagree on existence".to_string()),
        }
        if record.termination_reason == TerminationReason::Success {
            match record.final_result() {
                Some(fin) => {
                    let optimum = manifest
                        .config
                        .problem_config(record.dimension)
                        .translation_scale
                        * (record.dimension as f64).powi(3);
                    if fin.violation != 0.0
                        || (fin.objective - optimum).abs() > rule.success_tolerance
                    {
                        complain(
                            "success claimed without meeting the success condition".to_string(),
                        );
                    }
                }
                None => complain("success claimed without a final solution".to_string()),
            }
        }
        if record.termination_reason == TerminationReason::Failed && record.failure.is_none() {
            complain("failed run carries no failure message".to_string());
        }
    }
    Ok(ValidationReport {
        records_checked: records.len(),
        problems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn tiny_config() -> SuiteConfig {
        SuiteConfig {
            dimensions: vec![2],
            runs: 2,
            algorithms: vec![AlgorithmSpec::RandomSearch],
            override_conventions: true,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn default_config_is_valid_and_conventional() {
        let config = SuiteConfig::default();
        assert!(config.validate().is_ok());
        assert_eq!(config.dimensions, vec![2, 3, 5, 10, 20, 40]);
        assert_eq!(config.runs, 15);
        assert_eq!(config.algorithms.len(), 3);
        assert_eq!(config.record_count(), 270);
    }

    #[test]
    fn conventions_gate_low_run_counts() {
        let mut config = SuiteConfig {
            runs: 5,
            ..SuiteConfig::default()
        };
        assert!(matches!(
            config.validate(),
            Err(Error::ConventionViolated(_))
        ));
        config.override_conventions = true;
        assert!(config.validate().is_ok());
    }

    #[test]
    fn config_rejects_duplicates() {
        let config = SuiteConfig {
            dimensions: vec![2, 3, 2],
            ..SuiteConfig::default()
        };
        assert!(config.validate().is_err());
        let config = SuiteConfig {
            algorithms: vec![AlgorithmSpec::RandomSearch, AlgorithmSpec::RandomSearch],
            ..SuiteConfig::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn fingerprint_tracks_config_changes() {
        let a = SuiteConfig::default();
        let b = SuiteConfig {
            base_seed: 43,
            ..SuiteConfig::default()
        };
        assert_eq!(a.fingerprint(), SuiteConfig::default().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn record_file_names_are_sortable() {
        assert_eq!(
            record_file_name("random_search", 2, 0),
            "record_random_search_N02_r00.json"
        );
        assert_eq!(record_file_name("es", 40, 14), "record_es_N40_r14.json");
    }

    #[test]
    fn batch_runs_are_seeded_consecutively() {
        let config = tiny_config();
        let records = run_batch(&config, &config.algorithms[0], 2).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].seed, config.base_seed);
        assert_eq!(records[1].seed, config.base_seed + 1);
        assert_eq!(records[0].algorithm, "random_search");
    }

    #[test]
    fn parallel_and_sequential_batches_agree() {
        let config = tiny_config();
        let parallel = run_batch(&config, &config.algorithms[0], 2).unwrap();
        let sequential = run_batch_sequential(&config, &config.algorithms[0], 2).unwrap();
        assert_eq!(parallel, sequential);
    }

    #[test]
    fn suite_writes_records_then_manifest() {
        let dir = tempdir().unwrap();
        let config = tiny_config();
        let manifest = run_suite(&config, dir.path()).unwrap();
        assert_eq!(manifest.records.len(), 2);
        for file in &manifest.records {
            assert!(dir.path().join(file).is_file(), "{file} missing");
        }
        let reloaded = load_manifest(dir.path()).unwrap();
        assert_eq!(reloaded, manifest);
        let (records, skipped) = load_records(dir.path(), &manifest);
        assert_eq!(records.len(), 2);
        assert!(skipped.is_empty());
    }

    #[test]
    fn suite_reruns_byte_identically() {
        let dir_a = tempdir().unwrap();
        let dir_b = tempdir().unwrap();
        let config = tiny_config();
        let manifest = run_suite(&config, dir_a.path()).unwrap();
        run_suite(&config, dir_b.path()).unwrap();
        let mut files = manifest.records.clone();
        files.push(MANIFEST_FILE.to_string());
        for file in files {
            let a = fs::read(dir_a.path().join(&file)).unwrap();
            let b = fs::read(dir_b.path().join(&file)).unwrap();
            assert_eq!(a, b, "{file} differs between reruns");
        }
    }

    #[test]
    fn corrupt_record_is_skipped_not_fatal() {
        let dir = tempdir().unwrap();
        let config = tiny_config();
        let manifest = run_suite(&config, dir.path()).unwrap();
        fs::write(dir.path().join(&manifest.records[0]), b"{ not json").unwrap();
        let (records, skipped) = load_records(dir.path(), &manifest);
        assert_eq!(records.len(), 1);
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].file, manifest.records[0]);
    }

    #[test]
    fn validate_accepts_fresh_suite_and_flags_tampering() {
        let dir = tempdir().unwrap();
        let config = tiny_config();
        let manifest = run_suite(&config, dir.path()).unwrap();
        let report = validate_directory(dir.path()).unwrap();
        assert!(report.is_clean(), "problems: {:?}", report.problems);
        assert_eq!(report.records_checked, 2);

        // Claim success on a record that did not earn it.
        let path = dir.path().join(&manifest.records[0]);
        let mut record: RunRecord = read_json(&path).unwrap();
        record.termination_reason = TerminationReason::Success;
        write_pretty_json(&path, &record).unwrap();
        let report = validate_directory(dir.path()).unwrap();
        assert!(!report.is_clean());
        assert!(
            report.problems.iter().any(|p| p.contains("success")),
            "{:?}",
            report.problems
        );
    }

    #[test]
    fn validate_flags_missing_files() {
        let dir = tempdir().unwrap();
        let config = tiny_config();
        let manifest = run_suite(&config, dir.path()).unwrap();
        fs::remove_file(dir.path().join(&manifest.records[1])).unwrap();
        let report = validate_directory(dir.path()).unwrap();
        assert_eq!(report.records_checked, 1);
        assert!(!report.is_clean());
    }

    #[test]
    fn missing_manifest_is_an_io_error() {
        let dir = tempdir().unwrap();
        assert!(matches!(
            validate_directory(dir.path()),
            Err(Error::Io { .. })
        ));
    }
}
