//! The energy functional E(f) = −∫ log θ_f(x) dx for step profiles:
//! corridor construction for θ, adaptive Gauss–Kronrod quadrature with
//! a log substitution at the integrable singularities next to each
//! jump, and the windowed / perturbed variants E_M and E⁺_{δ,M}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hitting::{corridor_survival_with, CorridorSchedule, Slab, SolverOptions};
use crate::profile::{PerturbSign, StepProfile};
use crate::stats::CompensatedSum;

#[derive(Debug, Clone, Copy)]
pub struct EnergyOptions {
    /// Absolute quadrature target.
    pub tol: f64,
    /// Corridor solver settings for θ evaluations.
    pub solver: SolverOptions,
    /// Width of the substitution zone next to each singular jump side.
    pub singular_width: f64,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        EnergyOptions {
            tol: 1e-4,
            solver: SolverOptions::default(),
            singular_width: 0.1,
        }
    }
}

impl EnergyOptions {
    /// Cheap settings for inner optimization loops: coarse single-pass
    /// corridor grids and a looser quadrature target.
    pub fn fast() -> Self {
        EnergyOptions {
            tol: 2e-3,
            solver: SolverOptions {
                grid: 128,
                tol: 1e-4,
                max_grid: 128,
                richardson: false,
            },
            singular_width: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    pub value: f64,
    pub abs_error: f64,
    pub nodes: u64,
    /// Jump locations where the integrand was split / substituted.
    pub singular_points: Vec<f64>,
}

/// Corridor schedule of the event {τ_y ≥ barrier(y) − level ∀y} for a
/// Brownian path started at `x` with clock offset `level`: at time t
/// the path may not yet have hit any y with barrier(y) > level + t.
pub fn corridor_from_level(
    barrier: &StepProfile,
    _x: f64,
    level: f64,
) -> Result<CorridorSchedule> {
    let horizon = barrier.xi - level;
    if horizon <= 0.0 {
        return Ok(CorridorSchedule::empty());
    }
    // Constraint expiry times, i.e. slab boundaries.
    let mut cuts: Vec<f64> = barrier
        .pos_jumps
        .iter()
        .chain(barrier.neg_jumps.iter())
        .map(|&(_, l)| l - level)
        .filter(|&d| d > 0.0 && d < horizon)
        .collect();
    cuts.push(horizon);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut slabs = Vec::with_capacity(cuts.len());
    let mut t0 = 0.0;
    for &t1 in &cuts {
        // Barriers active throughout [t0, t1): constraints with expiry
        // strictly beyond t0.
        let upper = barrier
            .pos_jumps
            .iter()
            .filter(|&&(_, l)| l - level > t0)
            .map(|&(u, _)| u)
            .fold(f64::INFINITY, f64::min);
        let lower = barrier
            .neg_jumps
            .iter()
            .filter(|&&(_, l)| l - level > t0)
            .map(|&(v, _)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        slabs.push(Slab {
            t0,
            t1,
            lower,
            upper,
        });
        t0 = t1;
    }
    CorridorSchedule::new(horizon, slabs)
}

/// θ_f(x): survival probability of the profile's hitting-time
/// constraints started from x.
pub fn theta(f: &StepProfile, x: f64) -> Result<f64> {
    theta_with(f, x, &SolverOptions::default())
}

pub fn theta_with(f: &StepProfile, x: f64, solver: &SolverOptions) -> Result<f64> {
    let level = f.evaluate(x);
    let s = corridor_from_level(f, x, level)?;
    if s.horizon == 0.0 {
        return Ok(1.0);
    }
    corridor_survival_with(&s, x, solver)
        .map(|r| r.p)
        .map_err(|e| match e {
            Error::StartOutsideCorridor { .. } => Error::CorridorSolver(format!(
                "start x = {x} landed on a corridor boundary of its own profile"
            )),
            other => other,
        })
}

// --- Gauss–Kronrod 7/15 pair -------------------------------------------

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Quad<'a, F> {
    f: F,
    nodes: u64,
    _marker: std::marker::PhantomData<&'a ()>,
}

impl<F: FnMut(f64) -> Result<f64>> Quad<'_, F> {
    fn new(f: F) -> Self {
        Quad {
            f,
            nodes: 0,
            _marker: std::marker::PhantomData,
        }
    }

    fn gk(&mut self, a: f64, b: f64) -> Result<(f64, f64)> {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut kron = CompensatedSum::default();
        let mut gauss = CompensatedSum::default();
        for (i, (&x, &wk)) in XGK.iter().zip(&WGK).enumerate() {
            let (lo, hi) = (c - h * x, c + h * x);
            let flo = (self.f)(lo)?;
            self.nodes += 1;
            let both = if x == 0.0 {
                flo
            } else {
                self.nodes += 1;
                flo + (self.f)(hi)?
            };
            kron.add(wk * both);
            if i % 2 == 1 {
                gauss.add(WG[i / 2] * both);
            } else if x == 0.0 {
                // x = 0 is a Kronrod-only node in this indexing; no
                // Gauss contribution.
            }
        }
        let k = kron.value() * h;
        let g = gauss.value() * h;
        Ok((k, (k - g).abs()))
    }

    fn adaptive(&mut self, a: f64, b: f64, tol: f64, depth: u32) -> Result<(f64, f64)> {
        let (v, e) = self.gk(a, b)?;
        if e <= tol || depth >= 24 || (b - a) < 1e-13 {
            return Ok((v, e));
        }
        let m = 0.5 * (a + b);
        let (v1, e1) = self.adaptive(a, m, tol / 2.0, depth + 1)?;
        let (v2, e2) = self.adaptive(m, b, tol / 2.0, depth + 1)?;
        Ok((v1 + v2, e1 + e2))
    }
}

// --- energy assembly ----------------------------------------------------

/// A panel [a, b] whose integrand may blow up logarithmically at one
/// endpoint (right endpoints of positive jumps, left endpoints of
/// negative jumps).
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    sing_left: bool,
    sing_right: bool,
}

fn build_panels(barrier: &StepProfile, lo: f64, hi: f64) -> Vec<Panel> {
    let mut cuts: Vec<f64> = vec![lo, hi];
    if lo < 0.0 && hi > 0.0 {
        cuts.push(0.0);
    }
    for &(u, _) in &barrier.pos_jumps {
        if u > lo && u < hi {
            cuts.push(u);
        }
    }
    for &(v, _) in &barrier.neg_jumps {
        if v > lo && v < hi {
            cuts.push(v);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let is_pos_jump = |x: f64| barrier.pos_jumps.iter().any(|&(u, _)| u == x);
    let is_neg_jump = |x: f64| barrier.neg_jumps.iter().any(|&(v, _)| v == x);
    cuts.windows(2)
        .map(|w| Panel {
            a: w[0],
            b: w[1],
            sing_left: is_neg_jump(w[0]),
            sing_right: is_pos_jump(w[1]),
        })
        .collect()
}

/// Integrate −log θ over [lo, hi] against the corridor of `barrier`
/// with the start level taken from `level_of`.
fn integrate_neg_log_theta(
    barrier: &StepProfile,
    level_of: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    singular: bool,
    opts: &EnergyOptions,
) -> Result<EnergyReport> {
    if !(lo < hi) {
        return Ok(EnergyReport {
            value: 0.0,
            abs_error: 0.0,
            nodes: 0,
            singular_points: Vec::new(),
        });
    }
    let solver = opts.solver;
    let eval = |x: f64| -> Result<f64> {
        let level = level_of(x);
        let s = corridor_from_level(barrier, x, level)?;
        if s.horizon == 0.0 {
            return Ok(0.0);
        }
        let p = corridor_survival_with(&s, x, &solver)?.p;
        Ok(-(p.max(1e-300)).ln())
    };

    let panels = build_panels(barrier, lo, hi);
    let mut singular_points = Vec::new();
    let tol_each = opts.tol / panels.len() as f64;
    let mut value = CompensatedSum::default();
    let mut err = CompensatedSum::default();
    let mut nodes = 0u64;
    // Beyond this distance from the nearest jump the integrand is
    // Gaussian-small; wide panels keep only their end zones and the
    // skipped middle is bounded analytically.
    let reach = 8.0 * barrier.xi.sqrt();

    for p in panels {
        let w = opts.singular_width.min(p.b - p.a);
        let (core_a, sub_left) = if singular && p.sing_left {
            singular_points.push(p.a);
            (p.a + w, true)
        } else {
            (p.a, false)
        };
        let (core_b, sub_right) = if singular && p.sing_right {
            singular_points.push(p.b);
            (p.b - w, true)
        } else {
            (p.b, false)
        };

        let mut q = Quad::new(eval);
        if core_a < core_b {
            if core_b - core_a > 2.0 * reach {
                let (v1, e1) = q.adaptive(core_a, core_a + reach, tol_each / 2.0, 0)?;
                let (v2, e2) = q.adaptive(core_b - reach, core_b, tol_each / 2.0, 0)?;
                value.add(v1 + v2);
                // −log θ ≤ 8 Q(d/√ξ) at distance d from every jump;
                // both middle halves together integrate to at most
                // 4 · (4√ξ ∫_{8}^{∞} Q).
                err.add(e1 + e2 + 4.0 * left_tail_bound(reach, barrier.xi));
            } else {
                let (v, e) = q.adaptive(core_a, core_b, tol_each / 2.0, 0)?;
                value.add(v);
                err.add(e);
            }
        }
        if sub_left {
            // x = a + e^{−s}: the −log(x − a) blow-up becomes a smooth
            // decaying integrand in s.
            let s0 = -(w.ln());
            let mut qs = Quad::new(|s: f64| {
                let d = (-s).exp();
                eval(p.a + d).map(|g| g * d)
            });
            let (v, e) = qs.adaptive(s0, 36.0, tol_each / 2.0, 0)?;
            value.add(v);
            err.add(e);
            nodes += qs.nodes;
        }
        if sub_right {
            let s0 = -(w.ln());
            let mut qs = Quad::new(|s: f64| {
                let d = (-s).exp();
                eval(p.b - d).map(|g| g * d)
            });
            let (v, e) = qs.adaptive(s0, 36.0, tol_each / 2.0, 0)?;
            value.add(v);
            err.add(e);
            nodes += qs.nodes;
        }
        nodes += q.nodes;
    }

    Ok(EnergyReport {
        value: value.value().max(0.0),
        abs_error: err.value(),
        nodes,
        singular_points,
    })
}

fn gaussian_upper_tail(v: f64) -> f64 {
    0.5 * libm::erfc(v / std::f64::consts::SQRT_2)
}

/// Analytic bound on the neglected left tail ∫_{−∞}^{lo} −log θ dx:
/// 4 ∫_{d}^{∞} Q(u/√ξ) du with d the distance from the leftmost jump.
fn left_tail_bound(d: f64, xi: f64) -> f64 {
    let s = xi.sqrt();
    let v = d / s;
    let phi_v = (-v * v / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    4.0 * s * (phi_v - v * gaussian_upper_tail(v))
}

/// E(f) = −∫ log θ_f(x) dx over the whole line; the far-left tail is
/// bounded analytically and folded into the error estimate.
pub fn energy_total(f: &StepProfile) -> Result<EnergyReport> {
    energy_total_with(f, &EnergyOptions::default())
}

pub fn energy_total_with(f: &StepProfile, opts: &EnergyOptions) -> Result<EnergyReport> {
    f.validate()?;
    if f.xi == 0.0 {
        return Ok(EnergyReport {
            value: 0.0,
            abs_error: 0.0,
            nodes: 0,
            singular_points: Vec::new(),
        });
    }
    let leftmost = f
        .neg_jumps
        .last()
        .map(|&(v, _)| v)
        .unwrap_or(0.0)
        .min(0.0);
    let margin = 8.0 * f.xi.sqrt();
    let lo = leftmost - margin;
    let hi = f.pos_jumps.last().unwrap().0;
    let level_of = |x: f64| f.evaluate(x);
    let mut rep = integrate_neg_log_theta(f, &level_of, lo, hi, true, opts)?;
    rep.abs_error += left_tail_bound(margin, f.xi);
    Ok(rep)
}

/// E_M(f): the same integral restricted to [−M, M].
pub fn energy_windowed(f: &StepProfile, m: f64) -> Result<EnergyReport> {
    energy_windowed_with(f, m, &EnergyOptions::default())
}

pub fn energy_windowed_with(f: &StepProfile, m: f64, opts: &EnergyOptions) -> Result<EnergyReport> {
    if !(m > 0.0) {
        return Err(Error::Precondition(format!("window M = {m} must be > 0")));
    }
    f.validate()?;
    if f.xi == 0.0 {
        return Ok(EnergyReport {
            value: 0.0,
            abs_error: 0.0,
            nodes: 0,
            singular_points: Vec::new(),
        });
    }
    let level_of = |x: f64| f.evaluate(x);
    integrate_neg_log_theta(f, &level_of, -m, m, true, opts)
}

/// E⁺_{δ,M}(f): barrier constraints from f^{−,δ}, start level from
/// f^{+,δ}. The δ-gap keeps every start strictly away from its
/// barriers, so the integrand has no singularities.
pub fn energy_perturbed(f: &StepProfile, delta: f64, m: f64) -> Result<EnergyReport> {
    energy_perturbed_with(f, delta, m, &EnergyOptions::default())
}

pub fn energy_perturbed_with(
    f: &StepProfile,
    delta: f64,
    m: f64,
    opts: &EnergyOptions,
) -> Result<EnergyReport> {
    if !(delta > 0.0) || !(m > 0.0) {
        return Err(Error::Precondition(format!(
            "need δ > 0 and M > 0 (got δ={delta}, M={m})"
        )));
    }
    f.validate()?;
    if f.xi == 0.0 {
        return Ok(EnergyReport {
            value: 0.0,
            abs_error: 0.0,
            nodes: 0,
            singular_points: Vec::new(),
        });
    }
    let minus = f.perturb(delta, PerturbSign::Minus)?;
    let plus = f.perturb(delta, PerturbSign::Plus)?;
    let level_of = |x: f64| plus.evaluate(x);
    integrate_neg_log_theta(&minus, &level_of, -m, m, false, opts)
}
