//! Monte Carlo oracles: Euler paths with Brownian-bridge crossing
//! weights for corridor survival, and the conditional-FKG check on
//! discretized Gaussian paths.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CorridorSchedule;
use crate::error::{Error, Result};
use crate::profile::StepProfile;
use crate::rng::{replica_seed, stream};
use crate::stats::CompensatedSum;

const CHUNK: u64 = 4096;

/// Survival probability by Euler time stepping with an exact
/// single-barrier bridge-crossing weight per sub-step and active
/// barrier. Returns (estimate, stderr); deterministic in (seed,
/// replicas) independent of thread count.
pub fn mc_corridor_oracle(
    s: &CorridorSchedule,
    x: f64,
    replicas: u64,
    dt: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    s.validate()?;
    if replicas == 0 || !(dt > 0.0) {
        return Err(Error::Precondition("need replicas ≥ 1 and dt > 0".into()));
    }
    if s.horizon == 0.0 {
        return Ok((1.0, 0.0));
    }
    let first = &s.slabs[0];
    if !(first.lower < x && x < first.upper) {
        return Err(Error::StartOutsideCorridor {
            x,
            lo: first.lower,
            hi: first.upper,
        });
    }
    let min_len = s
        .slabs
        .iter()
        .map(|sl| sl.t1 - sl.t0)
        .fold(f64::INFINITY, f64::min);
    if dt > min_len / 4.0 {
        return Err(Error::Precondition(format!(
            "dt = {dt} exceeds a quarter of the shortest slab ({min_len})"
        )));
    }

    // Sub-steps are aligned per slab so barrier changes never fall
    // inside a step.
    let steps: Vec<(usize, f64, f64, f64)> = s
        .slabs
        .iter()
        .map(|sl| {
            let len = sl.t1 - sl.t0;
            let n = (len / dt).ceil() as usize;
            (n, len / n as f64, sl.lower, sl.upper)
        })
        .collect();

    let chunks = replicas.div_ceil(CHUNK);
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sum = CompensatedSum::default();
            let mut sumsq = CompensatedSum::default();
            for r in (c * CHUNK)..(((c + 1) * CHUNK).min(replicas)) {
                let mut rng = stream(replica_seed(seed, r));
                let mut w = 1.0f64;
                let mut pos = x;
                'path: for &(n, h, lo, hi) in &steps {
                    let sig = h.sqrt();
                    for _ in 0..n {
                        let z: f64 = rng.sample(StandardNormal);
                        let next = pos + sig * z;
                        if next <= lo || next >= hi {
                            w = 0.0;
                            break 'path;
                        }
                        if hi.is_finite() {
                            w *= 1.0 - (-2.0 * (hi - pos) * (hi - next) / h).exp();
                        }
                        if lo.is_finite() {
                            w *= 1.0 - (-2.0 * (pos - lo) * (next - lo) / h).exp();
                        }
                        pos = next;
                    }
                }
                sum.add(w);
                sumsq.add(w * w);
            }
            (sum.value(), sumsq.value())
        })
        .collect();

    let mut total = CompensatedSum::default();
    let mut total_sq = CompensatedSum::default();
    for (a, b) in partials {
        total.add(a);
        total_sq.add(b);
    }
    let n = replicas as f64;
    let mean = total.value() / n;
    let var = (total_sq.value() / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FkgReport {
    /// P(A ∩ D | B)
    pub lhs: f64,
    /// P(A | B) · P(D | B)
    pub rhs: f64,
    pub lhs_stderr: f64,
    pub rhs_stderr: f64,
    pub b_hits: u64,
    pub replicas: u64,
}

/// Conditional-FKG Monte Carlo check on the discretized path, with
/// A = {τ_{−δ} ≥ 1}, D = {τ_a < 1} and B the staircase event
/// {τ_y ≥ f(y) ∀ y ≥ a} read off the positive side of `profile`.
///
/// A and D are increasing and B is decreasing in the path order, so
/// the inequality lhs ≥ rhs holds exactly for the discrete model; the
/// check is purely statistical.
pub fn fkg_check(
    profile: &StepProfile,
    delta: f64,
    a: f64,
    t_hor: f64,
    replicas: u64,
    dt: f64,
    seed: u64,
) -> Result<FkgReport> {
    if !(delta > 0.0) || !(a > 0.0) {
        return Err(Error::Precondition(format!(
            "need δ > 0 and a > 0 (got δ={delta}, a={a})"
        )));
    }
    if replicas == 0 || !(dt > 0.0) || !(t_hor >= 1.0) {
        return Err(Error::Precondition(
            "need replicas ≥ 1, dt > 0, horizon ≥ 1".into(),
        ));
    }
    let n_steps = (t_hor / dt).ceil() as usize;
    let h = t_hor / n_steps as f64;
    // Per-step staircase bound: the tightest constraint still active at
    // that time, +∞ once all constraints have expired.
    let bound: Vec<f64> = (1..=n_steps)
        .map(|m| {
            let t = m as f64 * h;
            profile
                .pos_jumps
                .iter()
                .filter(|&&(_, lev)| lev >= t)
                .map(|&(u, _)| u.max(a))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let unit_steps = ((1.0 / h).round() as usize).min(n_steps);

    let chunks = replicas.div_ceil(CHUNK);
    let partials: Vec<[u64; 4]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = [0u64; 4]; // [b, a, d, a∩d]
            for r in (c * CHUNK)..(((c + 1) * CHUNK).min(replicas)) {
                let mut rng = stream(replica_seed(seed, r));
                let sig = h.sqrt();
                let mut pos = 0.0f64;
                let mut in_b = true;
                let mut in_a = true;
                let mut in_d = false;
                for (m, &ub) in bound.iter().enumerate() {
                    let z: f64 = rng.sample(StandardNormal);
                    pos += sig * z;
                    if pos > ub {
                        in_b = false;
                        break;
                    }
                    if m < unit_steps {
                        if pos <= -delta {
                            in_a = false;
                        }
                        if pos >= a {
                            in_d = true;
                        }
                    }
                }
                if in_b {
                    counts[0] += 1;
                    if in_a {
                        counts[1] += 1;
                    }
                    if in_d {
                        counts[2] += 1;
                    }
                    if in_a && in_d {
                        counts[3] += 1;
                    }
                }
            }
            counts
        })
        .collect();

    let mut c = [0u64; 4];
    for p in partials {
        for (t, v) in c.iter_mut().zip(p) {
            *t += v;
        }
    }
    let [nb, na, nd, nad] = c;
    if nb == 0 {
        return Err(Error::ConditioningNeverHit {
            hits: 0,
            replicas,
        });
    }
    let nbf = nb as f64;
    let pa = na as f64 / nbf;
    let pd = nd as f64 / nbf;
    let lhs = nad as f64 / nbf;
    let rhs = pa * pd;
    let se = |p: f64| (p * (1.0 - p) / nbf).sqrt();
    let rhs_stderr = ((pd * se(pa)).powi(2) + (pa * se(pd)).powi(2)).sqrt();
    Ok(FkgReport {
        lhs,
        rhs,
        lhs_stderr: se(lhs),
        rhs_stderr,
        b_hits: nb,
        replicas,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{prob_tau_geq, two_barrier_survival, Slab};
    use super::*;

    fn schedule(slabs: Vec<Slab>) -> CorridorSchedule {
        let horizon = slabs.last().unwrap().t1;
        CorridorSchedule::new(horizon, slabs).unwrap()
    }

    #[test]
    fn oracle_matches_one_barrier_closed_form() {
        let s = schedule(vec![Slab {
            t0: 0.0,
            t1: 1.0,
            lower: f64::NEG_INFINITY,
            upper: 1.0,
        }]);
        let (est, se) = mc_corridor_oracle(&s, 0.0, 40_000, 2e-3, 7).unwrap();
        let exact = prob_tau_geq(1.0, 1.0).unwrap();
        assert!((est - exact).abs() <= 3.0 * se, "{est} vs {exact} ± {se}");
    }

    #[test]
    fn oracle_matches_two_barrier_closed_form() {
        let s = schedule(vec![Slab {
            t0: 0.0,
            t1: 1.0,
            lower: -1.0,
            upper: 1.0,
        }]);
        let (est, se) = mc_corridor_oracle(&s, 0.0, 40_000, 2e-3, 8).unwrap();
        let exact = two_barrier_survival(-1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((est - exact).abs() <= 3.0 * se, "{est} vs {exact} ± {se}");
    }

    #[test]
    fn oracle_deterministic() {
        let s = schedule(vec![Slab {
            t0: 0.0,
            t1: 1.0,
            lower: -0.5,
            upper: 0.8,
        }]);
        let a = mc_corridor_oracle(&s, 0.0, 5_000, 1e-2, 3).unwrap();
        let b = mc_corridor_oracle(&s, 0.0, 5_000, 1e-2, 3).unwrap();
        assert!(a.0 == b.0 && a.1 == b.1);
    }

    #[test]
    fn oracle_rejects_coarse_dt() {
        let s = schedule(vec![Slab {
            t0: 0.0,
            t1: 0.1,
            lower: -1.0,
            upper: 1.0,
        }]);
        assert!(mc_corridor_oracle(&s, 0.0, 10, 0.05, 1).is_err());
    }

    fn unit_jump(at: f64) -> StepProfile {
        StepProfile::new(1.0, vec![(at, 1.0)], vec![]).unwrap()
    }

    #[test]
    fn fkg_vacuous_conditioning() {
        // Barrier far away: B almost sure, plain FKG for monotone
        // events must hold within noise.
        let f = unit_jump(50.0);
        let rep = fkg_check(&f, 0.5, 1.0, 1.0, 40_000, 5e-3, 11).unwrap();
        assert!(rep.b_hits > 39_000);
        assert!(
            rep.lhs >= rep.rhs - 3.0 * (rep.lhs_stderr + rep.rhs_stderr),
            "{rep:?}"
        );
    }

    #[test]
    fn fkg_one_step_barrier() {
        let f = unit_jump(1.0);
        let rep = fkg_check(&f, 0.5, 1.0, 1.0, 40_000, 5e-3, 13).unwrap();
        assert!(
            rep.lhs >= rep.rhs - 3.0 * (rep.lhs_stderr + rep.rhs_stderr),
            "{rep:?}"
        );
    }

    #[test]
    fn fkg_degenerate_small_a() {
        let f = unit_jump(2.0);
        let rep = fkg_check(&f, 0.5, 1e-4, 1.0, 20_000, 5e-3, 17).unwrap();
        // D is nearly sure, so both sides collapse to P(A | B).
        assert!((rep.lhs - rep.rhs).abs() <= 4.0 * (rep.lhs_stderr + rep.rhs_stderr) + 1e-3);
    }

    #[test]
    fn fkg_errors() {
        let f = unit_jump(1.0);
        assert!(fkg_check(&f, 0.0, 1.0, 1.0, 10, 1e-2, 1).is_err());
        assert!(fkg_check(&f, 0.1, 0.0, 1.0, 10, 1e-2, 1).is_err());
    }
}
