//! Uniform random search over the box. Stateless between batches; the
//! best-so-far bookkeeping lives in the protocol layer.

use rand_chacha::ChaCha8Rng;

use crate::problem::{EvaluationResult, ProblemInstance};
use crate::protocol::sample_initial;
use crate::solvers::Optimizer;

/// Candidates are drawn in fixed-size slices purely to amortize driver
/// overhead; slice size does not change the sample stream.
const BATCH: usize = 128;

#[derive(Debug, Default)]
pub struct RandomSearch;

impl Optimizer for RandomSearch {
    fn name(&self) -> &str {
        "random_search"
    }

    fn parameters(&self, _n: usize) -> serde_json::Value {
        serde_json::json!({})
    }

    fn min_budget(&self, _n: usize) -> u64 {
        1
    }

    fn stagnation_applies(&self) -> bool {
        false
    }

    fn ask(
        &mut self,
        instance: &ProblemInstance,
        rng: &mut ChaCha8Rng,
        limit: usize,
    ) -> Vec<Vec<f64>> {
        sample_initial(instance, rng, limit.min(BATCH))
    }

    fn tell(&mut self, _evaluated: &[(Vec<f64>, EvaluationResult)]) {}
}
