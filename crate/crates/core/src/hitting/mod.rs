//! Brownian hitting-time probabilities: the one-barrier closed form,
//! absorbed two-barrier survival, survival in expanding piecewise-
//! constant corridors, the joint (endpoint, running max) density, and
//! the conditional-FKG Monte Carlo check.

mod corridor;
mod mc;

pub use corridor::{corridor_survival, corridor_survival_with, CorridorResult, SolverOptions};
pub use mc::{fkg_check, mc_corridor_oracle, FkgReport};

use serde::{Deserialize, Serialize};
use libm::erf;

use crate::error::{Error, Result};

/// One slab of a corridor: barriers `lower < upper` active on
/// [t0, t1); either may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slab {
    pub t0: f64,
    pub t1: f64,
    #[serde(with = "ext_real")]
    pub lower: f64,
    #[serde(with = "ext_real")]
    pub upper: f64,
}

/// Expanding two-sided barrier schedule on [0, horizon]: the corridor
/// of the event {τ_y ≥ f(y) − f(x) ∀y}. Constraints only expire, so
/// the upper barrier is nondecreasing and the lower nonincreasing
/// across slabs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorridorSchedule {
    pub horizon: f64,
    pub slabs: Vec<Slab>,
}

/// JSON representation of extended reals: plain numbers, with the
/// strings "inf" / "-inf" for the infinite barriers.
mod ext_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(de::Error::custom(format!(
                    "expected a number, \"inf\" or \"-inf\", got {other:?}"
                ))),
            },
        }
    }
}

impl CorridorSchedule {
    pub fn new(horizon: f64, slabs: Vec<Slab>) -> Result<Self> {
        let s = CorridorSchedule { horizon, slabs };
        s.validate()?;
        Ok(s)
    }

    /// Zero-horizon schedule: survival is trivially 1.
    pub fn empty() -> Self {
        CorridorSchedule {
            horizon: 0.0,
            slabs: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSchedule(msg));
        if !self.horizon.is_finite() || self.horizon < 0.0 {
            return fail(format!("horizon {} must be finite and ≥ 0", self.horizon));
        }
        if self.horizon == 0.0 {
            if !self.slabs.is_empty() {
                return fail("zero-horizon schedule must have no slabs".into());
            }
            return Ok(());
        }
        if self.slabs.is_empty() {
            return fail("positive horizon needs at least one slab".into());
        }
        if self.slabs[0].t0 != 0.0 {
            return fail("first slab must start at 0".into());
        }
        if self.slabs.last().unwrap().t1 != self.horizon {
            return fail("last slab must end at the horizon".into());
        }
        let mut prev: Option<&Slab> = None;
        for s in &self.slabs {
            if !(s.t0 < s.t1) {
                return fail(format!("slab [{}, {}) must have positive length", s.t0, s.t1));
            }
            if s.lower.is_nan() || s.upper.is_nan() || !(s.lower < s.upper) {
                return fail(format!(
                    "slab barriers must satisfy lower {} < upper {}",
                    s.lower, s.upper
                ));
            }
            if let Some(p) = prev {
                if p.t1 != s.t0 {
                    return fail(format!("slabs must be contiguous at t = {}", p.t1));
                }
                if s.upper < p.upper || s.lower > p.lower {
                    return fail(format!(
                        "corridor must expand: slab at t = {} narrows it",
                        s.t0
                    ));
                }
            }
            prev = Some(s);
        }
        Ok(())
    }
}

/// P₀(τ_u ≥ t) = √(2/π) ∫₀^{u/√t} e^{−s²/2} ds = erf(u/√(2t)).
pub fn prob_tau_geq(u: f64, t: f64) -> Result<f64> {
    if !(u > 0.0) || !(t > 0.0) || !u.is_finite() || !t.is_finite() {
        return Err(Error::Precondition(format!(
            "prob_tau_geq needs finite u > 0, t > 0 (got u={u}, t={t})"
        )));
    }
    Ok(erf(u / (2.0 * t).sqrt()))
}

const SERIES_CAP: usize = 10_000;

/// P_x(B stays inside (a, b) throughout [0, t]); `a` may be −∞ and `b`
/// may be +∞. Uses the sine eigenfunction series for diffusive times
/// and the method of images for short times.
pub fn two_barrier_survival(a: f64, b: f64, x: f64, t: f64) -> Result<f64> {
    if a.is_nan() || b.is_nan() || !(a < x && x < b) {
        return Err(Error::StartOutsideCorridor { x, lo: a, hi: b });
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Precondition(format!("time {t} must be finite > 0")));
    }
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) => Ok(1.0),
        (true, false) => prob_tau_geq(b - x, t),
        (false, true) => prob_tau_geq(x - a, t),
        (false, false) => {
            let big_l = b - a;
            // Survival is symmetric in z ↔ L−z; reflecting keeps the
            // start in the lower half, where both expansions stay
            // relatively accurate even within 10⁻¹⁵ of a barrier.
            let z = (x - a).min(b - x);
            if t / (big_l * big_l) >= 0.2 {
                series_survival(big_l, z, t)
            } else {
                Ok(image_survival(big_l, z, t))
            }
        }
    }
}

fn series_survival(big_l: f64, z: f64, t: f64) -> Result<f64> {
    let mut sum = 0.0f64;
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        let envelope = 4.0 / (nf * std::f64::consts::PI)
            * (-(nf * std::f64::consts::PI).powi(2) * t / (2.0 * big_l * big_l)).exp();
        if envelope < 1e-14 {
            return Ok(sum.clamp(0.0, 1.0));
        }
        sum += envelope * (nf * std::f64::consts::PI * z / big_l).sin();
        n += 2;
        if n / 2 >= SERIES_CAP {
            return Err(Error::SeriesCapped { cap: SERIES_CAP });
        }
    }
}

fn image_survival(big_l: f64, z: f64, t: f64) -> f64 {
    // Φ-difference pairs written through erf so the leading k = 0 term
    // is erf(z/√(2t)) exactly, without cancellation for small z.
    let s2t = (2.0 * t).sqrt();
    let term = |k: f64| {
        let shift = 2.0 * k * big_l;
        0.5 * (erf((z + shift) / s2t) - erf((-z + shift) / s2t))
            - 0.5 * (erf((big_l + z + shift) / s2t) - erf((big_l - z + shift) / s2t))
    };
    let mut sum = term(0.0);
    for k in 1..200 {
        let contrib = term(k as f64) + term(-(k as f64));
        sum += contrib;
        if contrib.abs() < 1e-16 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Joint density of (B_t, max_{s≤t} B_s) at (α, β):
/// 2(2β−α)/√(2πt³) · exp{−(2β−α)²/(2t)} for β ≥ max(0, α), else 0.
pub fn joint_density_bm_max(t: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Precondition(format!("time {t} must be finite > 0")));
    }
    if beta < alpha.max(0.0) {
        return Ok(0.0);
    }
    let w = 2.0 * beta - alpha;
    Ok(2.0 * w / (2.0 * std::f64::consts::PI * t.powi(3)).sqrt() * (-w * w / (2.0 * t)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_closed_form_values() {
        // 2Φ(1) − 1 and the Gaussian-tail regime.
        assert!((prob_tau_geq(1.0, 1.0).unwrap() - 0.682_689_492_137_085_9).abs() < 1e-12);
        assert!(prob_tau_geq(5.0, 1.0).unwrap() >= 1.0 - 1e-6);
        let small = prob_tau_geq(0.01, 1.0).unwrap();
        let lin = (2.0 / std::f64::consts::PI).sqrt() * 0.01;
        assert!((small / lin - 1.0).abs() < 1e-3);
    }

    #[test]
    fn tau_preconditions() {
        assert!(prob_tau_geq(0.0, 1.0).is_err());
        assert!(prob_tau_geq(1.0, 0.0).is_err());
        assert!(prob_tau_geq(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn tau_monotonicity_grid() {
        for i in 1..100 {
            let u = i as f64 * 0.05;
            let t = i as f64 * 0.07;
            assert!(prob_tau_geq(u, 1.0).unwrap() >= prob_tau_geq(u - 0.049, 1.0).unwrap());
            assert!(prob_tau_geq(1.0, t + 0.07).unwrap() <= prob_tau_geq(1.0, t).unwrap());
        }
    }

    #[test]
    fn two_barrier_reductions() {
        let one_sided = two_barrier_survival(f64::NEG_INFINITY, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(one_sided, prob_tau_geq(1.0, 1.0).unwrap());
        assert_eq!(
            two_barrier_survival(f64::NEG_INFINITY, f64::INFINITY, 0.0, 1.0).unwrap(),
            1.0
        );
    }

    #[test]
    fn two_barrier_symmetric_unit() {
        let p = two_barrier_survival(-1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((p - 0.370_777_429_799_523_9).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn two_barrier_series_images_agree() {
        // Straddle the regime switch at t/L² = 0.2 (L = 2 ⇒ t = 0.8).
        for &t in &[0.05, 0.2, 0.5, 0.79, 0.81, 1.5, 4.0] {
            let s = series_survival(2.0, 0.7, t).unwrap();
            let i = image_survival(2.0, 0.7, t);
            assert!((s - i).abs() < 1e-12, "t = {t}: {s} vs {i}");
        }
    }

    #[test]
    fn two_barrier_reflection_strictness() {
        for &b in &[0.5, 1.0, 2.0] {
            for &t in &[0.5, 1.0, 2.0] {
                let two = two_barrier_survival(-b, b, 0.0, t).unwrap();
                let one = prob_tau_geq(b, t).unwrap();
                assert!(two < one, "b={b} t={t}");
            }
        }
    }

    #[test]
    fn two_barrier_rejects_bad_start() {
        assert!(matches!(
            two_barrier_survival(-1.0, 1.0, 1.0, 1.0),
            Err(Error::StartOutsideCorridor { .. })
        ));
    }

    #[test]
    fn joint_density_values() {
        let d = joint_density_bm_max(1.0, 0.0, 1.0).unwrap();
        // 4·φ(2) with φ the standard normal density.
        assert!((d - 0.215_963_866_052_752_2).abs() < 1e-12);
        assert_eq!(joint_density_bm_max(1.0, 0.5, 0.2).unwrap(), 0.0);
        assert!(joint_density_bm_max(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn joint_density_integrates_to_one() {
        // Midpoint grid over β ≥ max(0, α).
        let h = 0.01;
        let mut total = 0.0;
        let mut alpha = -8.0f64 + h / 2.0;
        while alpha < 8.0 {
            let mut beta = alpha.max(0.0) + h / 2.0;
            while beta < 8.0 {
                total += joint_density_bm_max(1.0, alpha, beta).unwrap() * h * h;
                beta += h;
            }
            alpha += h;
        }
        assert!((total - 1.0).abs() < 1e-4, "mass = {total}");
    }

    #[test]
    fn schedule_validation_and_json() {
        let s = CorridorSchedule::new(
            1.0,
            vec![
                Slab {
                    t0: 0.0,
                    t1: 0.4,
                    lower: -1.0,
                    upper: 1.0,
                },
                Slab {
                    t0: 0.4,
                    t1: 1.0,
                    lower: f64::NEG_INFINITY,
                    upper: 2.0,
                },
            ],
        )
        .unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"-inf\""));
        let back: CorridorSchedule = serde_json::from_str(&j).unwrap();
        back.validate().unwrap();
        assert_eq!(s, back);

        // Narrowing corridors are rejected.
        assert!(CorridorSchedule::new(
            1.0,
            vec![
                Slab {
                    t0: 0.0,
                    t1: 0.5,
                    lower: -1.0,
                    upper: 2.0
                },
                Slab {
                    t0: 0.5,
                    t1: 1.0,
                    lower: -1.0,
                    upper: 1.0
                },
            ],
        )
        .is_err());
    }
}
