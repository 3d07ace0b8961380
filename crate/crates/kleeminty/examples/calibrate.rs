//! Calibration run backing the pinned solver thresholds: 15 seeded runs per
//! (algorithm, dimension) cell at N = 2 and N = 3, once under the
//! conventional termination rule (stagnation cut at 100 N evaluations) and
//! once budget-only (stagnation disabled), reporting the feasibility rate,
//! the median final objective error and the per-run spread.
//!
//! Output of `cargo run --release --example calibrate` is recorded in
//! docs/calibration.md next to the thresholds it justifies.

use kleeminty::metrics::{compute_indicators, median_solution};
use kleeminty::problem::ProblemInstance;
use kleeminty::protocol::TerminationRule;
use kleeminty::solvers::AlgorithmSpec;
use kleeminty::suite::{run_batch_with_rule, SuiteConfig};

fn main() {
    let config = SuiteConfig::default();
    for (label, rule_for) in [
        (
            "conventional",
            TerminationRule::for_dimension as fn(usize) -> TerminationRule,
        ),
        ("budget-only", |n| {
            TerminationRule::for_dimension(n).without_stagnation()
        }),
    ] {
        println!("== termination: {label} ==");
        for spec in [
            AlgorithmSpec::RandomSearch,
            AlgorithmSpec::DifferentialEvolution(Default::default()),
            AlgorithmSpec::EvolutionStrategy(Default::default()),
        ] {
            for n in [2usize, 3] {
                let instance = ProblemInstance::new(config.problem_config(n)).unwrap();
                let rule = rule_for(n);
                let records = run_batch_with_rule(&config, &spec, n, &rule).unwrap();
                let indicators = compute_indicators(&records, &instance).unwrap();
                let finals: Vec<_> = records.iter().map(|r| r.final_result().unwrap()).collect();
                let median = median_solution(&finals).unwrap();
                println!(
                    "{} N={} FR={:.2} f_med={:.12} |f_med-{}|={:.3e} nu_med={:.3e} meanFevals={:.0}",
                    spec.name(),
                    n,
                    indicators.feasibility_ratio,
                    median.objective,
                    instance.optimal_objective(),
                    indicators.absolute_error,
                    indicators.median_violation,
                    indicators.mean_evaluations,
                );
                let mut errors: Vec<(u64, String, f64, f64)> = records
                    .iter()
                    .map(|r| {
                        let fin = r.final_result().unwrap();
                        (
                            r.seed,
                            format!("{:?}", r.termination_reason),
                            fin.objective - instance.optimal_objective(),
                            fin.violation,
                        )
                    })
                    .collect();
                errors.sort_by(|a, b| a.2.abs().total_cmp(&b.2.abs()));
                for (seed, reason, err, nu) in errors {
                    println!("    seed {seed:3} {reason:<16} f_err {err:+.3e} nu {nu:.1e}");
                }
            }
        }
    }
}
