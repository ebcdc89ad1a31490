//! Step profiles: two-sided monotone staircases with sup level ξ,
//! vanishing near 0, together with the profile calculus (rescaling,
//! ±ε perturbations, soft/hard deformations, interval heights) and the
//! empirical passage-time profile they are fitted from.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A step function that is 0 near the origin, nondecreasing on
/// [0, ∞) with limit `xi`, and nonincreasing on (−∞, 0] with values
/// ≤ `xi`.
///
/// Conventions: right-continuous on the positive axis, left-continuous
/// on the negative axis, so the value at a jump is the post-jump level
/// on either side. `pos_jumps` is ordered by increasing location with
/// strictly increasing levels ending at `xi`; `neg_jumps` by decreasing
/// location (inward to outward) with strictly increasing levels.
///
/// Jump locations are strictly signed except that a perturbation may
/// clip an inner jump to exactly 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepProfile {
    pub xi: f64,
    pub pos_jumps: Vec<(f64, f64)>,
    pub neg_jumps: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbSign {
    Plus,
    Minus,
}

impl StepProfile {
    pub fn new(
        xi: f64,
        pos_jumps: Vec<(f64, f64)>,
        neg_jumps: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let p = StepProfile {
            xi,
            pos_jumps,
            neg_jumps,
        };
        p.validate()?;
        Ok(p)
    }

    /// The identically-zero profile (ξ = 0); produced by deformations
    /// that flatten everything.
    pub fn zero() -> Self {
        StepProfile {
            xi: 0.0,
            pos_jumps: Vec::new(),
            neg_jumps: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidProfile(msg));
        if !self.xi.is_finite() || self.xi < 0.0 {
            return fail(format!("xi = {} must be finite and ≥ 0", self.xi));
        }
        if self.xi == 0.0 {
            if !self.pos_jumps.is_empty() || !self.neg_jumps.is_empty() {
                return fail("zero profile must have no jumps".into());
            }
            return Ok(());
        }
        if self.pos_jumps.is_empty() {
            return fail("positive side must attain xi".into());
        }
        let mut prev_u = -1.0;
        let mut prev_l = 0.0;
        for &(u, l) in &self.pos_jumps {
            if !u.is_finite() || u < 0.0 || u <= prev_u {
                return fail(format!("positive locations must increase from ≥ 0 (at {u})"));
            }
            if !l.is_finite() || l <= prev_l {
                return fail(format!("positive levels must increase from > 0 (at {l})"));
            }
            prev_u = u;
            prev_l = l;
        }
        if prev_l != self.xi {
            return fail(format!("last positive level {prev_l} must equal xi = {}", self.xi));
        }
        let mut prev_v = 1.0;
        let mut prev_l = 0.0;
        for &(v, l) in &self.neg_jumps {
            if !v.is_finite() || v > 0.0 || v >= prev_v {
                return fail(format!("negative locations must decrease from ≤ 0 (at {v})"));
            }
            if !l.is_finite() || l <= prev_l || l > self.xi {
                return fail(format!("negative levels must increase within (0, xi] (at {l})"));
            }
            prev_v = v;
            prev_l = l;
        }
        Ok(())
    }

    /// Staircase value at `x` under the continuity convention; x = 0 is
    /// resolved on the positive side.
    pub fn evaluate(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.pos_jumps
                .iter()
                .rev()
                .find(|&&(u, _)| u <= x)
                .map_or(0.0, |&(_, l)| l)
        } else {
            self.neg_jumps
                .iter()
                .rev()
                .find(|&&(v, _)| v >= x)
                .map_or(0.0, |&(_, l)| l)
        }
    }

    /// f_ξ(x) = ξ⁻¹ f(√ξ x), mapping sup level ξ to 1.
    pub fn rescale(&self) -> StepProfile {
        self.scaled(1.0 / self.xi.sqrt(), 1.0 / self.xi)
    }

    /// Inverse of `rescale`: maps a sup-1 profile to sup level `xi`.
    pub fn unscale(&self, xi: f64) -> StepProfile {
        self.scaled(xi.sqrt(), xi)
    }

    fn scaled(&self, loc: f64, lev: f64) -> StepProfile {
        StepProfile {
            xi: self.xi * lev,
            pos_jumps: self
                .pos_jumps
                .iter()
                .map(|&(u, l)| (u * loc, l * lev))
                .collect(),
            neg_jumps: self
                .neg_jumps
                .iter()
                .map(|&(v, l)| (v * loc, l * lev))
                .collect(),
        }
    }

    /// f^{+,ε} (sign +) shifts positive jumps left and negative jumps
    /// right by ε, clipping at 0 where inner jumps would cross (the
    /// highest clipped level survives at 0, matching the sup
    /// definition); f^{−,ε} (sign −) shifts outward, never clipping.
    pub fn perturb(&self, eps: f64, sign: PerturbSign) -> Result<StepProfile> {
        if !(eps > 0.0) {
            return Err(Error::Precondition(format!("eps = {eps} must be > 0")));
        }
        let (dp, dn) = match sign {
            PerturbSign::Plus => (-eps, eps),
            PerturbSign::Minus => (eps, -eps),
        };
        let mut pos: Vec<(f64, f64)> = Vec::with_capacity(self.pos_jumps.len());
        for &(u, l) in &self.pos_jumps {
            let nu = (u + dp).max(0.0);
            // Several jumps clipped to 0 merge into the highest level.
            if let Some(last) = pos.last_mut() {
                if last.0 == nu {
                    last.1 = l;
                    continue;
                }
            }
            pos.push((nu, l));
        }
        let mut neg: Vec<(f64, f64)> = Vec::with_capacity(self.neg_jumps.len());
        for &(v, l) in &self.neg_jumps {
            let nv = (v + dn).min(0.0);
            if let Some(last) = neg.last_mut() {
                if last.0 == nv {
                    // Inner (lower) clipped levels are overtaken by the
                    // outer ones arriving later in the list.
                    last.1 = l;
                    continue;
                }
            }
            neg.push((nv, l));
        }
        StepProfile::new(self.xi, pos, neg)
    }

    /// (m_I, M_I, Δ_I): inf, sup, and oscillation of the staircase over
    /// the closed interval [a, b].
    pub fn delta_height(&self, a: f64, b: f64) -> Result<(f64, f64, f64)> {
        if !(a <= b) {
            return Err(Error::Precondition(format!("interval [{a}, {b}] is empty")));
        }
        let fa = self.evaluate(a);
        let fb = self.evaluate(b);
        let m = if a < 0.0 && 0.0 < b {
            0.0
        } else {
            fa.min(fb)
        };
        let mm = fa.max(fb);
        Ok((m, mm, mm - m))
    }

    fn check_disjoint(js: &[(f64, f64)]) -> Result<()> {
        for &(a, b) in js {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::Precondition(format!(
                    "interval [{a}, {b}] must be finite with a < b"
                )));
            }
        }
        let mut sorted: Vec<(f64, f64)> = js.to_vec();
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in sorted.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(Error::OverlappingIntervals {
                    a0: w[0].0,
                    a1: w[0].1,
                    b0: w[1].0,
                    b1: w[1].1,
                });
            }
        }
        Ok(())
    }

    /// Soft deformation over the (order-sensitive) interval list: one
    /// interval at a time, levels in [m_I, M_I] collapse to m_I and
    /// levels above M_I drop by Δ_I. The map acts on level values only.
    pub fn soft_deform(&self, js: &[(f64, f64)]) -> Result<StepProfile> {
        Self::check_disjoint(js)?;
        let mut cur = self.clone();
        for &(a, b) in js {
            let (m, mm, delta) = cur.delta_height(a, b)?;
            let map = |v: f64| {
                if v < m {
                    v
                } else if v <= mm {
                    m
                } else {
                    v - delta
                }
            };
            let rebuild = |jumps: &[(f64, f64)]| {
                let mut out: Vec<(f64, f64)> = Vec::with_capacity(jumps.len());
                let mut prev = 0.0;
                for &(x, l) in jumps {
                    let nl = map(l);
                    if nl > prev {
                        out.push((x, nl));
                        prev = nl;
                    }
                }
                out
            };
            cur = StepProfile {
                xi: map(cur.xi),
                pos_jumps: rebuild(&cur.pos_jumps),
                neg_jumps: rebuild(&cur.neg_jumps),
            };
            if cur.xi == 0.0 {
                cur = StepProfile::zero();
            }
            debug_assert!(cur.validate().is_ok(), "soft deformation left the class");
        }
        Ok(cur)
    }

    /// Hard deformation: the interval infimum on each I ∈ J, f
    /// elsewhere. At the boundary jump the staircase convention keeps
    /// the one-sided limit (a measure-zero difference from the
    /// pointwise definition).
    pub fn hard_deform(&self, js: &[(f64, f64)]) -> Result<StepProfile> {
        Self::check_disjoint(js)?;
        let mut cur = self.clone();
        for &(a, b) in js {
            let (m, _, _) = cur.delta_height(a, b)?;
            let mut pos_pts: Vec<f64> = cur.pos_jumps.iter().map(|&(u, _)| u).collect();
            for e in [a, b] {
                if e >= 0.0 {
                    pos_pts.push(e);
                }
            }
            pos_pts.sort_by(f64::total_cmp);
            pos_pts.dedup();
            let mut pos = Vec::new();
            let mut prev = 0.0;
            for &c in &pos_pts {
                let v = if a <= c && c < b { m } else { cur.evaluate(c) };
                if v > prev {
                    pos.push((c, v));
                    prev = v;
                }
            }
            let xi = prev;

            let mut neg_pts: Vec<f64> = cur.neg_jumps.iter().map(|&(v, _)| v).collect();
            for e in [a, b] {
                if e < 0.0 {
                    neg_pts.push(e);
                }
            }
            neg_pts.sort_by(|x, y| y.total_cmp(x));
            neg_pts.dedup();
            let mut neg = Vec::new();
            let mut prev = 0.0;
            for &c in &neg_pts {
                let v = if a < c && c <= b { m } else { cur.evaluate(c) };
                if v > prev {
                    neg.push((c, v));
                    prev = v;
                }
            }
            if let Some(&(_, top)) = neg.last() {
                if top > xi {
                    return Err(Error::InvalidProfile(format!(
                        "hard deformation over [{a}, {b}] leaves negative level {top} above the \
                         positive sup {xi}"
                    )));
                }
            }
            cur = if xi == 0.0 && neg.is_empty() {
                StepProfile::zero()
            } else {
                StepProfile {
                    xi,
                    pos_jumps: pos,
                    neg_jumps: neg,
                }
            };
            debug_assert!(cur.validate().is_ok(), "hard deformation left the class");
        }
        Ok(cur)
    }

    /// Random valid profile with the given jump counts; used by tests
    /// and optimizer restarts.
    pub fn random<R: Rng>(rng: &mut R, xi: f64, k_pos: usize, k_neg: usize) -> StepProfile {
        assert!(k_pos >= 1 && xi > 0.0);
        let mut pos_locs: Vec<f64> = Vec::with_capacity(k_pos);
        let mut acc = 0.0;
        for _ in 0..k_pos {
            acc += rng.gen_range(0.1..2.0_f64) * xi.sqrt();
            pos_locs.push(acc);
        }
        let weights: Vec<f64> = (0..k_pos).map(|_| rng.gen_range(0.1..1.0_f64)).collect();
        let total: f64 = weights.iter().sum();
        let mut pos = Vec::with_capacity(k_pos);
        let mut lev = 0.0;
        for (i, (&u, w)) in pos_locs.iter().zip(&weights).enumerate() {
            lev += w / total * xi;
            if i == k_pos - 1 {
                lev = xi;
            }
            pos.push((u, lev));
        }

        let mut neg = Vec::with_capacity(k_neg);
        if k_neg > 0 {
            let mut acc = 0.0;
            let cap = xi * rng.gen_range(0.2..1.0);
            let mut locs = Vec::with_capacity(k_neg);
            for _ in 0..k_neg {
                acc += rng.gen_range(0.1..2.0_f64) * xi.sqrt();
                locs.push(-acc);
            }
            let ws: Vec<f64> = (0..k_neg).map(|_| rng.gen_range(0.1..1.0_f64)).collect();
            let tot: f64 = ws.iter().sum();
            let mut lev = 0.0;
            for (&v, w) in locs.iter().zip(&ws) {
                lev += w / tot * cap;
                neg.push((v, lev));
            }
        }
        let p = StepProfile {
            xi,
            pos_jumps: pos,
            neg_jumps: neg,
        };
        debug_assert!(p.validate().is_ok());
        p
    }
}

/// Empirical profile u_k = k/√n ↦ T(0,k)/n sampled on a site window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PassageProfile {
    pub n: u64,
    /// (site, passage time), strictly increasing in site.
    pub samples: Vec<(i64, u64)>,
}

impl PassageProfile {
    pub fn new(n: u64, samples: Vec<(i64, u64)>) -> Result<Self> {
        if n == 0 || samples.is_empty() {
            return Err(Error::Precondition(
                "need n ≥ 1 and a nonempty sample window".into(),
            ));
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Precondition("sample sites must increase".into()));
            }
        }
        // Passage times grow outward on each side of the origin.
        for w in samples.windows(2) {
            let ((s0, t0), (s1, t1)) = (w[0], w[1]);
            if s0 >= 0 && t1 < t0 {
                return Err(Error::NonMonotoneProfile { site: s1 });
            }
            if s1 <= 0 && t0 < t1 {
                return Err(Error::NonMonotoneProfile { site: s0 });
            }
        }
        Ok(PassageProfile { n, samples })
    }

    pub fn location(&self, site: i64) -> f64 {
        site as f64 / (self.n as f64).sqrt()
    }

    pub fn value(&self, time: u64) -> f64 {
        time as f64 / self.n as f64
    }

    /// Fit a staircase through the samples; ξ is the largest sampled
    /// value on the positive side, and negative levels are clipped to
    /// ξ so the result stays a valid profile.
    pub fn to_step_profile(&self) -> Result<StepProfile> {
        let mut pos = Vec::new();
        let mut prev = 0.0;
        for &(k, t) in self.samples.iter().filter(|&&(k, _)| k > 0) {
            let l = self.value(t);
            if l > prev {
                pos.push((self.location(k), l));
                prev = l;
            }
        }
        let xi = prev;
        if pos.is_empty() {
            return Err(Error::InvalidProfile(
                "window has no positive-side increase; sup level would be 0".into(),
            ));
        }
        let mut neg = Vec::new();
        let mut prev = 0.0;
        for &(k, t) in self.samples.iter().rev().filter(|&&(k, _)| k < 0) {
            let l = self.value(t).min(xi);
            if l > prev {
                neg.push((self.location(k), l));
                prev = l;
            }
        }
        StepProfile::new(xi, pos, neg)
    }
}

/// Staircase through an empirical profile's samples.
pub fn from_empirical(p: &PassageProfile) -> Result<StepProfile> {
    p.to_step_profile()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_jump(at: f64) -> StepProfile {
        StepProfile::new(1.0, vec![(at, 1.0)], vec![]).unwrap()
    }

    #[test]
    fn evaluate_unit_jump() {
        let f = unit_jump(1.0);
        assert_eq!(f.evaluate(0.5), 0.0);
        assert_eq!(f.evaluate(1.0), 1.0);
        assert_eq!(f.evaluate(2.0), 1.0);
        assert_eq!(f.evaluate(-3.0), 0.0);
    }

    #[test]
    fn evaluate_negative_side() {
        let f = StepProfile::new(1.0, vec![(1.0, 1.0)], vec![(-1.0, 0.3), (-2.0, 0.8)]).unwrap();
        assert_eq!(f.evaluate(-0.5), 0.0);
        assert_eq!(f.evaluate(-1.0), 0.3);
        assert_eq!(f.evaluate(-1.5), 0.3);
        assert_eq!(f.evaluate(-2.0), 0.8);
        assert_eq!(f.evaluate(-7.0), 0.8);
    }

    #[test]
    fn rescale_examples() {
        let f = StepProfile::new(4.0, vec![(2.0, 4.0)], vec![]).unwrap();
        let g = f.rescale();
        assert_eq!(g.xi, 1.0);
        assert_eq!(g.pos_jumps, vec![(1.0, 1.0)]);
        let h = unit_jump(1.0);
        assert_eq!(h.rescale(), h);
        assert_eq!(g.unscale(4.0), f);
    }

    #[test]
    fn perturb_examples() {
        let f = unit_jump(1.0);
        let plus = f.perturb(0.1, PerturbSign::Plus).unwrap();
        assert_eq!(plus.pos_jumps, vec![(0.9, 1.0)]);
        let minus = f.perturb(0.1, PerturbSign::Minus).unwrap();
        assert_eq!(minus.pos_jumps, vec![(1.1, 1.0)]);
    }

    #[test]
    fn perturb_sandwich_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let f = StepProfile::random(&mut rng, 1.0, 3, 2);
            let eps = rng.gen_range(0.01..0.5);
            let plus = f.perturb(eps, PerturbSign::Plus).unwrap();
            let minus = f.perturb(eps, PerturbSign::Minus).unwrap();
            for _ in 0..50 {
                let x = rng.gen_range(-6.0..6.0);
                assert!(minus.evaluate(x) <= f.evaluate(x));
                assert!(f.evaluate(x) <= plus.evaluate(x));
            }
        }
    }

    #[test]
    fn perturb_clips_at_zero() {
        let f = StepProfile::new(1.0, vec![(0.2, 0.5), (1.0, 1.0)], vec![(-0.1, 0.3)]).unwrap();
        let plus = f.perturb(0.3, PerturbSign::Plus).unwrap();
        assert_eq!(plus.pos_jumps, vec![(0.0, 0.5), (0.7, 1.0)]);
        assert_eq!(plus.neg_jumps, vec![(0.0, 0.3)]);
        plus.validate().unwrap();
    }

    #[test]
    fn soft_deform_hand_example() {
        // Indicator-sum notation: levels 0.3 on [1,2) and 1.0 beyond.
        let f = StepProfile::new(1.0, vec![(1.0, 0.3), (2.0, 1.0)], vec![]).unwrap();
        let g = f.soft_deform(&[(0.5, 1.5)]).unwrap();
        assert_eq!(g.xi, 0.7);
        assert_eq!(g.pos_jumps, vec![(2.0, 0.7)]);
    }

    #[test]
    fn soft_deform_empty_and_constant() {
        let f = unit_jump(1.0);
        assert_eq!(f.soft_deform(&[]).unwrap(), f);
        assert_eq!(f.soft_deform(&[(2.0, 3.0)]).unwrap(), f);
    }

    #[test]
    fn soft_deform_overlap_rejected() {
        let f = unit_jump(1.0);
        assert!(matches!(
            f.soft_deform(&[(0.0, 1.0), (0.5, 2.0)]),
            Err(Error::OverlappingIntervals { .. })
        ));
    }

    #[test]
    fn hard_deform_hand_example() {
        let f = unit_jump(1.0);
        let g = f.hard_deform(&[(0.5, 1.5)]).unwrap();
        assert_eq!(g.pos_jumps, vec![(1.5, 1.0)]);
        assert_eq!(f.hard_deform(&[]).unwrap(), f);
    }

    #[test]
    fn hard_deform_below_original() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let f = StepProfile::random(&mut rng, 1.0, 3, 2);
            let a = rng.gen_range(-4.0..3.0);
            let b = a + rng.gen_range(0.1..2.0);
            let g = match f.hard_deform(&[(a, b)]) {
                Ok(g) => g,
                Err(Error::InvalidProfile(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            for _ in 0..50 {
                let x = rng.gen_range(-8.0..8.0);
                assert!(g.evaluate(x) <= f.evaluate(x) + 0.0, "x = {x}");
            }
        }
    }

    #[test]
    fn delta_height_examples() {
        let f = unit_jump(1.0);
        assert_eq!(f.delta_height(0.5, 1.5).unwrap(), (0.0, 1.0, 1.0));
        assert_eq!(f.delta_height(1.1, 1.9).unwrap(), (1.0, 1.0, 0.0));
        assert_eq!(f.delta_height(-1.0, 0.5).unwrap(), (0.0, 0.0, 0.0));
    }

    #[test]
    fn delta_subadditive_on_adjacent_intervals() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let f = StepProfile::random(&mut rng, 1.0, 3, 0);
            let a = rng.gen_range(0.0..3.0);
            let b = a + rng.gen_range(0.1..2.0);
            let c = b + rng.gen_range(0.1..2.0);
            let (_, _, d_ab) = f.delta_height(a, b).unwrap();
            let (_, _, d_bc) = f.delta_height(b, c).unwrap();
            let (_, _, d_ac) = f.delta_height(a, c).unwrap();
            assert!(d_ac <= d_ab + d_bc + 1e-15);
        }
    }

    #[test]
    fn empirical_ballistic() {
        let samples: Vec<(i64, u64)> = (0..=20).map(|k| (k, k as u64)).collect();
        let p = PassageProfile::new(100, samples).unwrap();
        let f = from_empirical(&p).unwrap();
        assert_eq!(f.pos_jumps.len(), 20);
        for (i, &(u, l)) in f.pos_jumps.iter().enumerate() {
            let k = (i + 1) as f64;
            assert!((u - k / 10.0).abs() < 1e-12);
            assert!((l - k / 100.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_round_trip() {
        let p = PassageProfile::new(
            16,
            vec![(-2, 9), (-1, 3), (0, 0), (1, 2), (2, 7), (3, 16)],
        )
        .unwrap();
        let f = from_empirical(&p).unwrap();
        for &(k, t) in &p.samples {
            assert_eq!(f.evaluate(p.location(k)), p.value(t), "site {k}");
        }
    }

    #[test]
    fn empirical_single_sample() {
        let p = PassageProfile::new(4, vec![(1, 3)]).unwrap();
        let f = from_empirical(&p).unwrap();
        assert_eq!(f.pos_jumps, vec![(0.5, 0.75)]);
        assert_eq!(f.xi, 0.75);
    }

    #[test]
    fn empirical_rejects_non_monotone() {
        assert!(matches!(
            PassageProfile::new(16, vec![(1, 5), (2, 3)]),
            Err(Error::NonMonotoneProfile { site: 2 })
        ));
    }

    #[test]
    fn soft_deform_lemma_suite_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let f = StepProfile::random(&mut rng, 1.0, 3, 2);
            let a = rng.gen_range(-3.0..2.0);
            let b = a + rng.gen_range(0.1..2.0);
            let g = f.soft_deform(&[(a, b)]).unwrap();
            let (_, _, delta) = f.delta_height(a, b).unwrap();
            // Constancy on the interval.
            let ga = g.evaluate(a + 1e-9);
            assert_eq!(g.evaluate(b - 1e-9), ga);
            for _ in 0..30 {
                let x = rng.gen_range(-8.0..8.0);
                let y = rng.gen_range(-8.0..8.0);
                // Floor and two-point contraction (Lemma-style).
                assert!(g.evaluate(x) >= f.evaluate(x) - delta - 1e-12);
                let lhs = (g.evaluate(x) - g.evaluate(y)).max(0.0);
                let rhs = (f.evaluate(x) - f.evaluate(y)).max(0.0);
                assert!(lhs <= rhs + 1e-12);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let f = StepProfile::new(1.0, vec![(1.0, 1.0)], vec![(-0.5, 0.25)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("pos_jumps"));
        let g: StepProfile = serde_json::from_str(&s).unwrap();
        g.validate().unwrap();
        assert_eq!(f, g);
    }
}
