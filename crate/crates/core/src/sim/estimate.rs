//! Monte Carlo estimators built on top of the simulator: the time
//! constant μ and upper-tail probabilities at local (M√n) and global
//! (n) scales.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{simulate_run, Site, StepSource, Time};
use crate::error::{Error, Result};
use crate::rng::replica_seed;
use crate::stats::{mean_stderr, wilson_interval};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MuEstimate {
    pub n: Site,
    pub replicas: u64,
    pub censored: u64,
    pub mu_hat: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailEstimate {
    pub n: u64,
    pub m: f64,
    pub xi: f64,
    pub replicas: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// −log(p_hat)/√n; `None` when no replica hit the event.
    pub rate: Option<f64>,
    pub target: Site,
    pub budget: Time,
}

/// Mean of T(0,n)/n with a normal-approximation CI; budget fixed at 8n,
/// censored replicas excluded from the mean and reported separately.
pub fn estimate_mu(n: Site, replicas: u64, seed: u64) -> Result<MuEstimate> {
    if n < 16 {
        return Err(Error::Precondition(format!("n = {n} must be ≥ 16")));
    }
    if replicas < 100 {
        return Err(Error::Precondition(format!(
            "replicas = {replicas} must be ≥ 100"
        )));
    }
    let budget = 8 * n as Time;
    let samples: Vec<Option<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let src = StepSource::seeded(replica_seed(seed, r));
            let run = simulate_run(n, budget, &src).expect("valid simulate_run arguments");
            run.passage_time.map(|t| t as f64 / n as f64)
        })
        .collect();
    let censored = samples.iter().filter(|s| s.is_none()).count() as u64;
    let values: Vec<f64> = samples.into_iter().flatten().collect();
    let (mu_hat, stderr) = mean_stderr(&values).ok_or(Error::AllCensored { censored })?;
    let z = 1.959_963_984_540_054_f64;
    Ok(MuEstimate {
        n,
        replicas,
        censored,
        mu_hat,
        stderr,
        ci_low: mu_hat - z * stderr,
        ci_high: mu_hat + z * stderr,
    })
}

/// Fraction of replicas in which `target` is not visited before time
/// `budget`, i.e. P(T(0,target) ≥ budget). Every run stops by `budget`.
pub fn estimate_tail_raw(
    target: Site,
    budget: Time,
    replicas: u64,
    seed: u64,
) -> Result<(u64, f64)> {
    if target < 1 || budget < 1 || replicas == 0 {
        return Err(Error::Precondition(
            "target, budget, replicas must all be positive".into(),
        ));
    }
    let hits: u64 = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let src = StepSource::seeded(replica_seed(seed, r));
            let run = simulate_run(target, budget, &src).expect("valid simulate_run arguments");
            // T ≥ budget ⇔ not visited strictly before the budget.
            match run.passage_time {
                Some(t) if t < budget => 0u64,
                _ => 1,
            }
        })
        .sum();
    Ok((hits, hits as f64 / replicas as f64))
}

fn tail_estimate(
    n: u64,
    m: f64,
    xi: f64,
    target: Site,
    budget: Time,
    replicas: u64,
    seed: u64,
) -> Result<TailEstimate> {
    let (hits, p_hat) = estimate_tail_raw(target, budget, replicas, seed)?;
    let (ci_low, ci_high) = wilson_interval(hits, replicas);
    let rate = (hits >= 1).then(|| -p_hat.ln() / (n as f64).sqrt());
    Ok(TailEstimate {
        n,
        m,
        xi,
        replicas,
        hits,
        p_hat,
        ci_low,
        ci_high,
        rate,
        target,
        budget,
    })
}

/// P(T(0, ⌊M√n⌋) ≥ ⌈ξn⌉).
pub fn estimate_tail_local(
    n: u64,
    m: f64,
    xi: f64,
    replicas: u64,
    seed: u64,
) -> Result<TailEstimate> {
    if n < 1 || m < 1.0 || xi <= 0.0 {
        return Err(Error::Precondition(format!(
            "need n ≥ 1, M ≥ 1, ξ > 0 (got n={n}, M={m}, ξ={xi})"
        )));
    }
    let target = (m * (n as f64).sqrt()).floor() as Site;
    let budget = (xi * n as f64).ceil() as Time;
    tail_estimate(n, m, xi, target, budget, replicas, seed)
}

/// P(T(0,n) ≥ ⌈(μ̂+ξ)n⌉).
pub fn estimate_tail_global(
    n: u64,
    xi: f64,
    mu_hat: f64,
    replicas: u64,
    seed: u64,
) -> Result<TailEstimate> {
    if n < 1 || xi < 0.0 || mu_hat <= 0.0 {
        return Err(Error::Precondition(format!(
            "need n ≥ 1, ξ ≥ 0, μ̂ > 0 (got n={n}, ξ={xi}, μ̂={mu_hat})"
        )));
    }
    let budget = ((mu_hat + xi) * n as f64).ceil() as Time;
    tail_estimate(n, 0.0, xi, n as Site, budget, replicas, seed)
}
