//! Discrete-time frog model on the integer line.
//!
//! One sleeping frog per site; the frog at the start site is active at
//! time 0. At every time step each active frog moves by ±1, and a
//! sleeping frog wakes the instant its site is first visited (it makes
//! its own first move on the following step). The passage time to a
//! target site is the first time an active frog stands on it.

mod estimate;

pub use estimate::{
    estimate_mu, estimate_tail_global, estimate_tail_local, estimate_tail_raw, MuEstimate,
    TailEstimate,
};

use std::collections::BTreeMap;

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::PassageProfile;
use crate::rng;

pub type Site = i64;
pub type Time = u64;

/// Where the ±1 steps of each frog come from.
///
/// In seeded mode every frog draws from an independent stream derived
/// from (master seed, site), so results do not depend on activation
/// order. In scripted mode only the listed sites hold frogs; the rest
/// of the line is vacant.
#[derive(Debug, Clone)]
pub enum StepSource {
    Seeded { seed: u64 },
    Scripted { scripts: BTreeMap<Site, Vec<i8>> },
}

impl StepSource {
    pub fn seeded(seed: u64) -> Self {
        StepSource::Seeded { seed }
    }

    /// Scripted source; every step must be ±1.
    pub fn scripted<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Site, Vec<i8>)>,
    {
        let scripts: BTreeMap<Site, Vec<i8>> = entries.into_iter().collect();
        for (site, steps) in &scripts {
            if steps.iter().any(|&s| s != 1 && s != -1) {
                return Err(Error::Precondition(format!(
                    "script for site {site} contains a step other than ±1"
                )));
            }
        }
        Ok(StepSource::Scripted { scripts })
    }
}

/// One realization of the model on a truncated domain.
///
/// Sites absent from `first_visit` were not visited before the run
/// ended: censoring is the absence of an entry, never a sentinel time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationRun {
    pub target: Site,
    pub budget: Time,
    /// Inclusive interval of sites the run accounts for.
    pub domain: (Site, Site),
    pub first_visit: BTreeMap<Site, Time>,
    /// Wake times of participating frogs; in restricted runs only sites
    /// inside the allowed set ever activate.
    pub activation: BTreeMap<Site, Time>,
    /// `None` when the target was not reached within the budget.
    pub passage_time: Option<Time>,
}

impl SimulationRun {
    /// Empirical profile u_k = k/√n ↦ T(0,k)/n over an inclusive site
    /// window; errors if any window site is censored.
    pub fn extract_profile(&self, n: u64, window: (Site, Site)) -> Result<PassageProfile> {
        let (lo, hi) = window;
        if lo > hi {
            return Err(Error::Precondition(format!("empty window [{lo}, {hi}]")));
        }
        let mut samples = Vec::with_capacity((hi - lo + 1) as usize);
        for site in lo..=hi {
            match self.first_visit.get(&site) {
                Some(&t) => samples.push((site, t)),
                None => return Err(Error::CensoredInWindow { site }),
            }
        }
        PassageProfile::new(n, samples)
    }
}

enum Walk {
    Seeded { rng: ChaCha8Rng, bits: u64, left: u8 },
    Scripted { steps: Vec<i8>, next: usize },
}

impl Walk {
    fn step(&mut self, site: Site, time: Time) -> Result<i64> {
        match self {
            Walk::Seeded { rng, bits, left } => {
                if *left == 0 {
                    *bits = rng.next_u64();
                    *left = 64;
                }
                let b = *bits & 1;
                *bits >>= 1;
                *left -= 1;
                Ok(if b == 1 { 1 } else { -1 })
            }
            Walk::Scripted { steps, next } => {
                let s = *steps
                    .get(*next)
                    .ok_or(Error::ScriptUnderrun { site, time })?;
                *next += 1;
                Ok(s as i64)
            }
        }
    }
}

struct Frog {
    origin: Site,
    pos: Site,
    walk: Walk,
}

struct SimParams {
    start: Site,
    target: Site,
    budget: Time,
    /// Inclusive interval of sites whose frogs participate; `None`
    /// means unrestricted.
    allowed: Option<(Site, Site)>,
    /// Extra sites simulated beyond the default left truncation;
    /// used to validate the truncation rule.
    extra_left_margin: Site,
}

/// Unrestricted run from the origin.
pub fn simulate_run(target: Site, budget: Time, source: &StepSource) -> Result<SimulationRun> {
    if target < 1 {
        return Err(Error::Precondition(format!("target {target} must be ≥ 1")));
    }
    if budget < 1 {
        return Err(Error::Precondition(format!("budget {budget} must be ≥ 1")));
    }
    simulate(
        &SimParams {
            start: 0,
            target,
            budget,
            allowed: None,
            extra_left_margin: 0,
        },
        source,
    )
}

/// Unrestricted run with a widened left truncation margin. Passage
/// times are invariant in the margin; the wider domain only records
/// more sites.
pub fn simulate_run_with_margin(
    target: Site,
    budget: Time,
    source: &StepSource,
    extra_left_margin: Site,
) -> Result<SimulationRun> {
    if target < 1 || budget < 1 {
        return Err(Error::Precondition("target and budget must be ≥ 1".into()));
    }
    simulate(
        &SimParams {
            start: 0,
            target,
            budget,
            allowed: None,
            extra_left_margin,
        },
        source,
    )
}

/// Passage time using only frogs inside the interval `allowed` (the
/// starting frog always participates). T_allowed ≥ T on the same source.
pub fn restricted_run(
    target: Site,
    start: Site,
    allowed: (Site, Site),
    budget: Time,
    source: &StepSource,
) -> Result<SimulationRun> {
    if allowed.0 > start || start > allowed.1 {
        return Err(Error::StartOutsideAllowed { start });
    }
    if target <= start {
        return Err(Error::Precondition(format!(
            "target {target} must exceed start {start}"
        )));
    }
    if budget < 1 {
        return Err(Error::Precondition("budget must be ≥ 1".into()));
    }
    simulate(
        &SimParams {
            start,
            target,
            budget,
            allowed: Some(allowed),
            extra_left_margin: 0,
        },
        source,
    )
}

fn simulate(params: &SimParams, source: &StepSource) -> Result<SimulationRun> {
    let SimParams {
        start,
        target,
        budget,
        allowed,
        extra_left_margin,
    } = *params;

    // A frog at x < start is woken no earlier than start - x and needs
    // at least target - x further steps of influence propagation, so it
    // cannot matter unless 2(start - x) + (target - start) ≤ budget.
    let dist = (target - start) as u64;
    let slack = budget.saturating_sub(dist);
    let x_lo = start - ((slack + 1) / 2) as i64 - extra_left_margin;
    let domain = (x_lo, target);

    let mut first_visit = BTreeMap::new();
    let mut activation = BTreeMap::new();
    let mut frogs: Vec<Frog> = Vec::new();

    let in_allowed = |site: Site| match allowed {
        None => true,
        Some((a, b)) => a <= site && site <= b,
    };

    let make_walk = |site: Site| -> Option<Walk> {
        match source {
            StepSource::Seeded { seed } => Some(Walk::Seeded {
                rng: rng::stream(rng::frog_seed(*seed, site)),
                bits: 0,
                left: 0,
            }),
            StepSource::Scripted { scripts } => scripts.get(&site).map(|steps| Walk::Scripted {
                steps: steps.clone(),
                next: 0,
            }),
        }
    };

    first_visit.insert(start, 0);
    activation.insert(start, 0);
    if let Some(walk) = make_walk(start) {
        frogs.push(Frog {
            origin: start,
            pos: start,
            walk,
        });
    }

    // Visited sites always form an interval around the start.
    let mut vis_lo = start;
    let mut vis_hi = start;
    let mut passage = None;

    let mut t: Time = 0;
    'steps: while t < budget {
        t += 1;
        let mut new_lo = false;
        let mut new_hi = false;
        for frog in &mut frogs {
            frog.pos += frog.walk.step(frog.origin, t)?;
            // Front-interval assertion: a frog can only step one site
            // past the currently visited interval.
            debug_assert!(
                frog.pos >= vis_lo - 1 && frog.pos <= vis_hi + 1,
                "visited set left interval form at t={t}"
            );
            if frog.pos == vis_hi + 1 {
                new_hi = true;
            } else if frog.pos == vis_lo - 1 {
                new_lo = true;
            }
        }
        let mut newly_visited: [Option<Site>; 2] = [None, None];
        if new_hi {
            vis_hi += 1;
            newly_visited[0] = Some(vis_hi);
        }
        if new_lo {
            vis_lo -= 1;
            newly_visited[1] = Some(vis_lo);
        }
        for site in newly_visited.into_iter().flatten() {
            if site >= domain.0 && site <= domain.1 {
                first_visit.insert(site, t);
            }
            if site == target {
                passage = Some(t);
                continue;
            }
            let participates = in_allowed(site) && site >= domain.0 && site < target;
            if participates {
                if site >= domain.0 && site <= domain.1 {
                    activation.insert(site, t);
                }
                if let Some(walk) = make_walk(site) {
                    frogs.push(Frog {
                        origin: site,
                        pos: site,
                        walk,
                    });
                }
            }
        }
        if passage.is_some() {
            break 'steps;
        }
    }

    Ok(SimulationRun {
        target,
        budget,
        domain,
        first_visit,
        activation,
        passage_time: passage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scripted(entries: &[(Site, &[i8])]) -> StepSource {
        StepSource::scripted(entries.iter().map(|(s, v)| (*s, v.to_vec()))).unwrap()
    }

    /// Exhaustive enumeration of every relevant step combination for
    /// T(0, 1) up to time 3: frog 0 uses at most 3 steps, the frog at
    /// −1 at most 2, the frog at −2 at most 1, so 64 equally likely
    /// script prefixes cover all outcomes.
    #[test]
    fn exhaustive_t01_distribution() {
        let mut counts = [0u64; 4];
        for bits in 0..64u32 {
            let b = |i: u32| if bits >> i & 1 == 1 { 1i8 } else { -1 };
            let pad = |mut v: Vec<i8>| {
                v.resize(12, 1);
                v
            };
            let src = StepSource::scripted([
                (0, pad(vec![b(0), b(1), b(2)])),
                (-1, pad(vec![b(3), b(4)])),
                (-2, pad(vec![b(5)])),
            ])
            .unwrap();
            let run = simulate_run(1, 8, &src).unwrap();
            if let Some(t) = run.passage_time {
                if t <= 3 {
                    counts[t as usize] += 1;
                }
            }
        }
        // P(T = 1) = 1/2, P(T = 2) = 0, P(T = 3) = 7/32.
        assert_eq!(counts[1], 32);
        assert_eq!(counts[2], 0);
        assert_eq!(counts[3], 14);
    }

    #[test]
    fn single_step_right() {
        let src = scripted(&[(0, &[1, 1, 1, 1, 1])]);
        let run = simulate_run(1, 5, &src).unwrap();
        assert_eq!(run.passage_time, Some(1));
        assert_eq!(run.first_visit[&0], 0);
        assert_eq!(run.first_visit[&1], 1);
    }

    #[test]
    fn detour_left_then_back() {
        // Frog 0 walks -1, 0, 1; frog -1 wanders off left.
        let src = scripted(&[(0, &[-1, 1, 1]), (-1, &[-1, -1])]);
        let run = simulate_run(1, 5, &src).unwrap();
        assert_eq!(run.passage_time, Some(3));
        assert_eq!(run.first_visit[&-1], 1);
        assert_eq!(run.activation[&-1], 1);
    }

    #[test]
    fn woken_neighbor_finishes_first() {
        // Frog 0 runs away left; frog -1, woken at t=1, reaches the
        // target at t=3.
        let src = scripted(&[(0, &[-1, -1, -1]), (-1, &[1, 1])]);
        let run = simulate_run(1, 5, &src).unwrap();
        assert_eq!(run.passage_time, Some(3));
    }

    #[test]
    fn script_underrun_is_an_error() {
        let src = scripted(&[(0, &[-1])]);
        let err = simulate_run(1, 5, &src).unwrap_err();
        match err {
            Error::ScriptUnderrun { site: 0, time: 2 } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_unit_script_step_rejected() {
        assert!(StepSource::scripted([(0, vec![2])]).is_err());
    }

    #[test]
    fn restricted_full_interval_matches_unrestricted() {
        for seed in 0..20 {
            let src = StepSource::seeded(seed);
            let full = simulate_run(5, 40, &src).unwrap();
            let restricted = restricted_run(5, 0, (full.domain.0, full.domain.1), 40, &src).unwrap();
            assert_eq!(full.passage_time, restricted.passage_time, "seed {seed}");
        }
    }

    #[test]
    fn restricted_to_origin_only() {
        let src = scripted(&[(0, &[1])]);
        let run = restricted_run(1, 0, (0, 0), 5, &src).unwrap();
        assert_eq!(run.passage_time, Some(1));
    }

    #[test]
    fn restriction_never_speeds_up_passage() {
        // Restricted to the start alone the frog needs its full detour;
        // unrestricted the woken neighbors can only help.
        let src = scripted(&[(0, &[-1, 1, 1, 1]), (1, &[1, 1, 1, 1])]);
        let restricted = restricted_run(2, 0, (0, 0), 5, &src).unwrap();
        assert_eq!(restricted.passage_time, Some(4));
        let full = simulate_run(2, 5, &src).unwrap();
        assert!(full.passage_time.unwrap() <= restricted.passage_time.unwrap());
    }

    #[test]
    fn start_outside_allowed_rejected() {
        let src = StepSource::seeded(1);
        assert!(matches!(
            restricted_run(3, 0, (1, 2), 10, &src),
            Err(Error::StartOutsideAllowed { start: 0 })
        ));
    }

    #[test]
    fn restriction_dominates_on_seeded_sources() {
        for seed in 0..50 {
            let src = StepSource::seeded(seed);
            let full = simulate_run(4, 64, &src).unwrap();
            for width in [0i64, 1, 2, 4] {
                let r = restricted_run(4, 0, (-width, width.min(3)), 64, &src).unwrap();
                match (r.passage_time, full.passage_time) {
                    (Some(ta), Some(t)) => assert!(ta >= t, "seed {seed} width {width}"),
                    (None, Some(_)) | (None, None) => {}
                    (Some(_), None) => panic!("restricted reached target but full run did not"),
                }
            }
        }
    }

    #[test]
    fn monotone_censoring_in_budget() {
        for seed in 0..30 {
            let src = StepSource::seeded(seed);
            let mut last: Option<Time> = None;
            for budget in [4u64, 8, 16, 32, 64, 128] {
                let run = simulate_run(4, budget, &src).unwrap();
                if let Some(t) = run.passage_time {
                    if let Some(prev) = last {
                        assert_eq!(prev, t, "passage changed once uncensored, seed {seed}");
                    }
                    assert!(t <= budget);
                    last = Some(t);
                }
            }
            assert!(last.is_some(), "seed {seed} never reached the target");
        }
    }

    #[test]
    fn truncation_margin_is_safe() {
        for seed in 0..100 {
            let src = StepSource::seeded(seed);
            let base = simulate_run(3, 48, &src).unwrap();
            let margin = (base.domain.1 - base.domain.0) as Site;
            let wide = simulate_run_with_margin(3, 48, &src, margin).unwrap();
            assert_eq!(base.passage_time, wide.passage_time, "seed {seed}");
        }
    }

    #[test]
    fn first_visit_nondecreasing_toward_target() {
        for seed in 0..20 {
            let src = StepSource::seeded(seed);
            let run = simulate_run(6, 200, &src).unwrap();
            if run.passage_time.is_none() {
                continue;
            }
            let mut prev = 0;
            for k in 0..=6 {
                let t = run.first_visit[&k];
                assert!(t >= prev);
                prev = t;
            }
        }
    }

    #[test]
    fn profile_window_with_censored_site_errors() {
        let src = scripted(&[(0, &[1])]);
        let run = simulate_run(1, 1, &src).unwrap();
        assert!(matches!(
            run.extract_profile(1, (-1, 1)),
            Err(Error::CensoredInWindow { .. })
        ));
    }
}
