//! Baseline solvers driven through an ask/tell contract. Each strategy is a
//! deterministic function of its configuration and the run seed; all
//! randomness flows through the ChaCha8 stream handed to `ask`.

mod differential_evolution;
mod evolution_strategy;
mod random_search;

pub use differential_evolution::{DeConfig, DifferentialEvolution};
pub use evolution_strategy::{EsConfig, EvolutionStrategy};
pub use random_search::RandomSearch;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{EvaluationResult, ProblemInstance};

/// Ask/tell optimizer: propose candidates, receive their evaluations,
/// keep whatever internal state the strategy needs.
pub trait Optimizer {
    /// Stable identifier used in records, reports and file names.
    fn name(&self) -> &str;

    /// Parameters as resolved for dimension `n`; folded into the record's
    /// config hash.
    fn parameters(&self, n: usize) -> serde_json::Value;

    /// Smallest budget the strategy can start from at dimension `n`.
    fn min_budget(&self, n: usize) -> u64;

    /// Whether the stagnation cut applies. Pure random search reports
    /// `false`: it cannot stagnate in the intended sense.
    fn stagnation_applies(&self) -> bool {
        true
    }

    /// Propose at most `limit` candidates, `limit >= 1`. Candidates must lie
    /// inside the box (repair by clamping).
    fn ask(
        &mut self,
        instance: &ProblemInstance,
        rng: &mut ChaCha8Rng,
        limit: usize,
    ) -> Vec<Vec<f64>>;

    /// Evaluations for a prefix of the batch returned by the last `ask`.
    fn tell(&mut self, evaluated: &[(Vec<f64>, EvaluationResult)]);
}

/// Serializable selection of one algorithm plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    RandomSearch,
    DifferentialEvolution(DeConfig),
    EvolutionStrategy(EsConfig),
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::RandomSearch => "random_search",
            AlgorithmSpec::DifferentialEvolution(_) => "differential_evolution",
            AlgorithmSpec::EvolutionStrategy(_) => "evolution_strategy",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AlgorithmSpec::RandomSearch => Ok(()),
            AlgorithmSpec::DifferentialEvolution(c) => c.validate(),
            AlgorithmSpec::EvolutionStrategy(c) => c.validate(),
        }
    }

    pub fn build(&self) -> Box<dyn Optimizer> {
        match self {
            AlgorithmSpec::RandomSearch => Box::new(RandomSearch),
            AlgorithmSpec::DifferentialEvolution(c) => {
                Box::new(DifferentialEvolution::new(c.clone()))
            }
            AlgorithmSpec::EvolutionStrategy(c) => Box::new(EvolutionStrategy::new(c.clone())),
        }
    }

    /// Parses `name` or `name=key:value,key:value`. Accepted names:
    /// `rs`/`random_search`, `de`/`differential_evolution`,
    /// `es`/`evolution_strategy`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, params) = match text.split_once('=') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (text.trim(), None),
        };
        let mut spec = match name {
            "rs" | "random_search" | "random-search" => AlgorithmSpec::RandomSearch,
            "de" | "differential_evolution" | "differential-evolution" => {
                AlgorithmSpec::DifferentialEvolution(DeConfig::default())
            }
            "es" | "evolution_strategy" | "evolution-strategy" => {
                AlgorithmSpec::EvolutionStrategy(EsConfig::default())
            }
            other => {
                return Err(Error::InvalidConfig(format!("unknown algorithm '{other}'")));
            }
        };
        if let Some(params) = params.filter(|p| !p.is_empty()) {
            for pair in params.split(',') {
                let (key, value) = pair.split_once(':').ok_or_else(|| {
                    Error::InvalidConfig(format!("expected key:value, got '{pair}'"))
                })?;
                spec.set_parameter(key.trim(), value.trim())?;
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    fn set_parameter(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidConfig(format!("invalid {what}: '{value}'"));
        match self {
            AlgorithmSpec::RandomSearch => Err(Error::InvalidConfig(format!(
                "random_search takes no parameter '{key}'"
            ))),
            AlgorithmSpec::DifferentialEvolution(c) => match key {
                "np" | "population" => {
                    c.population = Some(value.parse().map_err(|_| bad("population"))?);
                    Ok(())
                }
                "f" | "weight" => {
                    c.differential_weight = value.parse().map_err(|_| bad("weight"))?;
                    Ok(())
                }
                "cr" | "crossover" => {
                    c.crossover_rate = value.parse().map_err(|_| bad("crossover rate"))?;
                    Ok(())
                }
                other => Err(Error::InvalidConfig(format!(
                    "differential_evolution: unknown key '{other}'"
                ))),
            },
            AlgorithmSpec::EvolutionStrategy(c) => match key {
                "lambda" | "offspring" => {
                    c.offspring = Some(value.parse().map_err(|_| bad("offspring count"))?);
                    Ok(())
                }
                "sigma0" | "initial_step" => {
                    c.initial_step = Some(value.parse().map_err(|_| bad("initial step"))?);
                    Ok(())
                }
                other => Err(Error::InvalidConfig(format!(
                    "evolution_strategy: unknown key '{other}'"
                ))),
            },
        }
    }
}
