use rayon::prelude::*;

use crate::error::{usage_err, Error, Result};
use crate::model::ScenarioConfig;
use crate::rng::RandomnessContract;
use crate::sim::{run_trial, MonteCarloSummary, Tally, TrialResult};

/// Trial-parallel runner. Trial `i` always uses the contract
/// `(master_seed, i)`, so results do not depend on `workers`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub master_seed: u64,
    pub workers: usize,
}

impl MonteCarlo {
    pub fn new(master_seed: u64, workers: usize) -> Self {
        Self {
            master_seed,
            workers,
        }
    }

    /// Worker count from the machine.
    pub fn with_available_parallelism(master_seed: u64) -> Self {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        Self::new(master_seed, workers)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        if self.workers == 0 {
            return Err(usage_err("worker count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))
    }

    /// Apply `f` to every trial contract; output is in trial order.
    pub fn map_trials<T, F>(&self, trials: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(RandomnessContract) -> T + Sync,
    {
        let seed = self.master_seed;
        Ok(self.pool()?.install(|| {
            (0..trials)
                .into_par_iter()
                .map(|i| f(RandomnessContract::new(seed, i)))
                .collect()
        }))
    }

    pub fn run(&self, cfg: &ScenarioConfig, trials: u64) -> Result<Vec<TrialResult>> {
        check(cfg, trials)?;
        self.map_trials(trials, |c| run_trial(cfg, c))
    }

    /// Metrics without keeping individual results.
    pub fn summarize(&self, cfg: &ScenarioConfig, trials: u64) -> Result<MonteCarloSummary> {
        check(cfg, trials)?;
        let seed = self.master_seed;
        let tally = self.pool()?.install(|| {
            (0..trials)
                .into_par_iter()
                .fold(Tally::default, |mut t, i| {
                    t.push_result(&run_trial(cfg, RandomnessContract::new(seed, i)));
                    t
                })
                .reduce(Tally::default, Tally::merge)
        });
        tally.summary(cfg.true_hypothesis)
    }
}

fn check(cfg: &ScenarioConfig, trials: u64) -> Result<()> {
    cfg.validate()?;
    if trials == 0 {
        return Err(usage_err("trial count must be at least 1"));
    }
    Ok(())
}
