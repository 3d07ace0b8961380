//! (mu/mu, lambda) evolution strategy with self-adaptive step size: each
//! offspring mutates the parent step log-normally, the best mu offspring are
//! averaged into the next mean and step.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{EvaluationResult, ProblemInstance};
use crate::protocol::{lex_compare, sample_initial};
use crate::solvers::Optimizer;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EsConfig {
    /// Offspring per generation; `None` resolves to `4N`.
    #[serde(default)]
    pub offspring: Option<usize>,
    /// Initial step size; `None` resolves to `N^3 / 2`.
    #[serde(default)]
    pub initial_step: Option<f64>,
}

impl EsConfig {
    pub fn resolved_offspring(&self, n: usize) -> usize {
        self.offspring.unwrap_or(4 * n)
    }

    /// `mu = floor(lambda / 4)`, at least one parent.
    pub fn resolved_parents(&self, n: usize) -> usize {
        (self.resolved_offspring(n) / 4).max(1)
    }

    pub fn resolved_initial_step(&self, n: usize) -> f64 {
        self.initial_step
            .unwrap_or_else(|| (n as f64).powi(3) / 2.0)
    }

    /// Self-adaptation learning rate `1 / sqrt(2N)`.
    pub fn learning_rate(n: usize) -> f64 {
        1.0 / (2.0 * n as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(lambda) = self.offspring {
            if lambda < 4 {
                return Err(Error::InvalidConfig(format!(
                    "offspring count must be at least 4, got {lambda}"
                )));
            }
        }
        if let Some(step) = self.initial_step {
            if !(step.is_finite() && step > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "initial step must be positive, got {step}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct EvolutionStrategy {
    config: EsConfig,
    mean: Vec<f64>,
    /// Parent step size; strictly positive for the whole run.
    sigma: f64,
    /// Step sizes of the batch currently out for evaluation.
    pending_steps: Vec<f64>,
    initialized: bool,
}

impl EvolutionStrategy {
    pub fn new(config: EsConfig) -> Self {
        EvolutionStrategy {
            config,
            mean: Vec::new(),
            sigma: 0.0,
            pending_steps: Vec::new(),
            initialized: false,
        }
    }
}

impl Optimizer for EvolutionStrategy {
    fn name(&self) -> &str {
        "evolution_strategy"
    }

    fn parameters(&self, n: usize) -> serde_json::Value {
        serde_json::json!({
            "offspring": self.config.resolved_offspring(n),
            "parents": self.config.resolved_parents(n),
            "initial_step": self.config.resolved_initial_step(n),
            "learning_rate": EsConfig::learning_rate(n),
        })
    }

    fn min_budget(&self, n: usize) -> u64 {
        // One evaluation seeds the mean, one full generation adapts it.
        (1 + self.config.resolved_offspring(n)) as u64
    }

    fn ask(
        &mut self,
        instance: &ProblemInstance,
        rng: &mut ChaCha8Rng,
        limit: usize,
    ) -> Vec<Vec<f64>> {
        if !self.initialized {
            return sample_initial(instance, rng, 1);
        }
        let n = instance.dimension();
        let lambda = self.config.resolved_offspring(n);
        let tau = EsConfig::learning_rate(n);
        let (lo, hi) = instance.box_bounds();
        let count = lambda.min(limit);
        self.pending_steps.clear();
        let mut offspring = Vec::with_capacity(count);
        for _ in 0..count {
            let log_step: f64 = rng.sample(StandardNormal);
            let step = self.sigma * (tau * log_step).exp();
            let child: Vec<f64> = self
                .mean
                .iter()
                .map(|&m| {
                    let z: f64 = rng.sample(StandardNormal);
                    (m + step * z).clamp(lo, hi)
                })
                .collect();
            self.pending_steps.push(step);
            offspring.push(child);
        }
        offspring
    }

    fn tell(&mut self, evaluated: &[(Vec<f64>, EvaluationResult)]) {
        if !self.initialized {
            if let Some((y, _)) = evaluated.first() {
                self.sigma = self.config.resolved_initial_step(y.len());
                self.mean = y.clone();
                self.initialized = true;
            }
            return;
        }
        if evaluated.is_empty() {
            return;
        }
        let mut order: Vec<usize> = (0..evaluated.len()).collect();
        order.sort_by(|&a, &b| lex_compare(&evaluated[a].1, &evaluated[b].1));
        let n = self.mean.len();
        let mu = self.config.resolved_parents(n).min(evaluated.len());
        let weight = 1.0 / mu as f64;
        let mut mean = vec![0.0; n];
        let mut sigma = 0.0;
        for &idx in &order[..mu] {
            for (m, v) in mean.iter_mut().zip(evaluated[idx].0.iter()) {
                *m += weight * v;
            }
            sigma += weight * self.pending_steps[idx];
        }
        self.mean = mean;
        self.sigma = sigma;
    }
}
