//! Combinatorial localization of slow regions in a passage-time
//! environment: Red/Blue block classification, the greedy dyadic
//! covering of bad intervals, distance-R interval grouping, and the
//! clustering of moderate grid intervals.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{restricted_run, StepSource};

/// Base used for the inner logarithm in the block exponent
/// N = ⌈2 log₂(log n)⌉; the outer logarithm is always base 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerLog {
    #[default]
    Natural,
    Base2,
}

pub fn block_exponent(n: i64, inner: InnerLog) -> u32 {
    let ln = (n as f64).ln();
    let inner_log = match inner {
        InnerLog::Natural => ln,
        InnerLog::Base2 => ln / std::f64::consts::LN_2,
    };
    (2.0 * inner_log.log2()).ceil() as u32
}

/// Query interface for passage times T(x, x + len). `passage` returns
/// the exact time when it is < budget and `None` when it is ≥ budget
/// (censored), so censoring is itself an exceedance certificate.
pub trait PassageOracle: Sync {
    fn passage(&self, x: i64, len: i64, budget: u64) -> Result<Option<u64>>;

    /// Inclusive window of sites the oracle can answer about.
    fn window(&self) -> (i64, i64);

    /// Whether T(x, x + len) ≥ t.
    fn exceeds(&self, x: i64, len: i64, t: u64) -> Result<bool> {
        Ok(self.passage(x, len, t)?.is_none())
    }
}

fn check_window(window: (i64, i64), x: i64, len: i64) -> Result<()> {
    if len < 1 {
        return Err(Error::Precondition(format!("query length {len} must be ≥ 1")));
    }
    let (lo, hi) = window;
    if x < lo || x + len > hi {
        return Err(Error::OracleWindow {
            x,
            len: len as u64,
            lo,
            hi,
        });
    }
    Ok(())
}

/// Synthetic environment: ballistic T = len everywhere except explicit
/// overrides keyed by (x, len).
#[derive(Debug, Clone)]
pub struct TableOracle {
    window: (i64, i64),
    entries: HashMap<(i64, i64), u64>,
}

impl TableOracle {
    pub fn ballistic(window: (i64, i64)) -> Self {
        TableOracle {
            window,
            entries: HashMap::new(),
        }
    }

    pub fn with_entries<I>(window: (i64, i64), entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((i64, i64), u64)>,
    {
        let entries: HashMap<(i64, i64), u64> = entries.into_iter().collect();
        for (&(x, len), &t) in &entries {
            check_window(window, x, len)?;
            if t < len as u64 {
                return Err(Error::Precondition(format!(
                    "table entry T({x}, {x}+{len}) = {t} violates the ballistic bound"
                )));
            }
        }
        Ok(TableOracle { window, entries })
    }
}

impl PassageOracle for TableOracle {
    fn passage(&self, x: i64, len: i64, budget: u64) -> Result<Option<u64>> {
        check_window(self.window, x, len)?;
        let t = self.entries.get(&(x, len)).copied().unwrap_or(len as u64);
        Ok((t < budget).then_some(t))
    }

    fn window(&self) -> (i64, i64) {
        self.window
    }
}

/// Frog-model-backed oracle: each query simulates the passage from x
/// to x + len with every frog drawing its walk from a fixed per-site
/// stream, so overlapping queries see a consistent environment.
/// Results are memoized per (x, len) together with the largest budget
/// at which the query was censored.
pub struct SimOracle {
    source: StepSource,
    window: (i64, i64),
    cache: Mutex<HashMap<(i64, i64), CacheEntry>>,
}

#[derive(Clone, Copy)]
enum CacheEntry {
    Exact(u64),
    CensoredAt(u64),
}

impl SimOracle {
    pub fn new(seed: u64, window: (i64, i64)) -> Self {
        SimOracle {
            source: StepSource::seeded(seed),
            window,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl PassageOracle for SimOracle {
    fn passage(&self, x: i64, len: i64, budget: u64) -> Result<Option<u64>> {
        check_window(self.window, x, len)?;
        if budget == 0 {
            return Ok(None);
        }
        {
            let cache = self.cache.lock().unwrap();
            match cache.get(&(x, len)) {
                Some(&CacheEntry::Exact(t)) => return Ok((t < budget).then_some(t)),
                Some(&CacheEntry::CensoredAt(b)) if b >= budget => return Ok(None),
                _ => {}
            }
        }
        // Frogs far outside the window are truncated away by the
        // simulator's own slack rule; a huge allowed interval makes
        // the run effectively unrestricted.
        let big = i64::MAX / 4;
        let run = restricted_run(x + len, x, (-big, big), budget, &self.source)?;
        let mut cache = self.cache.lock().unwrap();
        match run.passage_time {
            Some(t) if t < budget => {
                cache.insert((x, len), CacheEntry::Exact(t));
                Ok(Some(t))
            }
            _ => {
                let e = cache.entry((x, len)).or_insert(CacheEntry::CensoredAt(0));
                if let CacheEntry::CensoredAt(b) = e {
                    *b = (*b).max(budget);
                }
                Ok(None)
            }
        }
    }

    fn window(&self) -> (i64, i64) {
        self.window
    }
}

/// Oracle backed by one completed simulation run: T(x, x + len) is
/// read off as the difference of recorded first-visit times, an O(1)
/// lookup. On the right half-line the front advances one site per
/// step, so the ballistic bound T ≥ len holds.
pub struct RunOracle {
    times: Vec<u64>,
    window: (i64, i64),
}

impl RunOracle {
    /// Wrap a run; the window is [0, y*] for the longest prefix of
    /// the nonnegative axis with recorded visits.
    pub fn from_run(run: &crate::sim::SimulationRun) -> Result<Self> {
        let mut times = Vec::new();
        let mut site = 0i64;
        while let Some(&t) = run.first_visit.get(&site) {
            times.push(t);
            site += 1;
        }
        if times.len() < 2 {
            return Err(Error::Precondition(
                "run records no visits on the nonnegative axis".into(),
            ));
        }
        Ok(RunOracle {
            window: (0, times.len() as i64 - 1),
            times,
        })
    }
}

impl PassageOracle for RunOracle {
    fn passage(&self, x: i64, len: i64, budget: u64) -> Result<Option<u64>> {
        check_window(self.window, x, len)?;
        let t = self.times[(x + len) as usize] - self.times[x as usize];
        Ok((t < budget).then_some(t))
    }

    fn window(&self) -> (i64, i64) {
        self.window
    }
}

// --- Red/Blue blocks ----------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockClassification {
    pub n: i64,
    pub exponent: u32,
    /// Indices i with block start i · 2^N and T(i·2^N, i·2^N + 2^N) > 2^{2N}.
    pub red: Vec<i64>,
    pub blue: Vec<i64>,
}

/// Partition ⟦0, n − 2^N⟧ ∩ 2^N ℤ into Red and Blue blocks: Red iff
/// T(start, start + 2^N) > 2^{2N}.
pub fn classify_blocks(
    oracle: &dyn PassageOracle,
    n: i64,
    inner: InnerLog,
) -> Result<BlockClassification> {
    if n < 16 {
        return Err(Error::Precondition(format!("n = {n} must be ≥ 16")));
    }
    let exponent = block_exponent(n, inner);
    classify_blocks_with(oracle, n, exponent)
}

pub fn classify_blocks_with(
    oracle: &dyn PassageOracle,
    n: i64,
    exponent: u32,
) -> Result<BlockClassification> {
    let block = 1i64 << exponent;
    let threshold = 1u64 << (2 * exponent);
    let mut red = Vec::new();
    let mut blue = Vec::new();
    let mut i = 0;
    while i * block <= n - block {
        // T > threshold ⇔ T ≥ threshold + 1 ⇔ censored at threshold + 1.
        if oracle.exceeds(i * block, block, threshold + 1)? {
            red.push(i);
        } else {
            blue.push(i);
        }
        i += 1;
    }
    Ok(BlockClassification {
        n,
        exponent,
        red,
        blue,
    })
}

// --- greedy dyadic cover ------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoverPiece {
    pub x: i64,
    /// Dyadic radius 𝓛_j.
    pub l: i64,
    /// [s, t] = Ĩ_j ∩ [0, ∞).
    pub s: i64,
    pub t: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalCover {
    pub n: i64,
    pub exponent: u32,
    pub red_blocks: Vec<i64>,
    pub blue_blocks: Vec<i64>,
    pub pieces: Vec<CoverPiece>,
    pub ell: usize,
}

/// Union of open integer intervals, kept disjoint and sorted.
#[derive(Default)]
struct OpenCover {
    parts: Vec<(i64, i64)>,
}

impl OpenCover {
    fn contains(&self, x: i64) -> bool {
        self.parts.iter().any(|&(a, b)| a < x && x < b)
    }

    /// Insert (a, b); returns the part of [a, b] not already covered,
    /// which must itself be an interval (the greedy invariant).
    fn insert(&mut self, a: i64, b: i64) -> Result<(i64, i64)> {
        // Closed-set difference [a,b] \ ∪(parts): since every existing
        // part is at least as long as (a, b), the remainder is a single
        // closed interval; assert rather than assume.
        let mut lo = a;
        let mut hi = b;
        let mut clipped = false;
        for &(pa, pb) in &self.parts {
            if pb <= a || pa >= b {
                continue;
            }
            // Overlapping part: it must cut from one side only.
            if pa <= a && pb >= b {
                return Err(Error::Precondition(format!(
                    "greedy invariant violated: ({a}, {b}) already covered"
                )));
            }
            if pa <= a {
                lo = lo.max(pb);
                clipped = true;
            } else if pb >= b {
                hi = hi.min(pa);
                clipped = true;
            } else {
                return Err(Error::Precondition(format!(
                    "greedy invariant violated: part ({pa}, {pb}) strictly inside ({a}, {b})"
                )));
            }
        }
        let _ = clipped;
        if lo > hi {
            return Err(Error::Precondition(
                "greedy invariant violated: empty uncovered remainder".into(),
            ));
        }
        // Merge (a, b) into the union.
        let mut merged_lo = a;
        let mut merged_hi = b;
        self.parts.retain(|&(pa, pb)| {
            if pa <= merged_hi && merged_lo <= pb {
                merged_lo = merged_lo.min(pa);
                merged_hi = merged_hi.max(pb);
                false
            } else {
                true
            }
        });
        self.parts.push((merged_lo, merged_hi));
        self.parts.sort_unstable();
        Ok((lo, hi))
    }
}

/// Greedy covering of bad dyadic intervals: repeatedly take the
/// largest radius 𝓛 = 2^k admitting an uncovered x ∈ ⟦0, n⟧ with
/// T(x, x + 𝓛) ≥ 𝓛², smallest such x first, until 𝓛 < 2^N.
pub fn dyadic_cover(oracle: &dyn PassageOracle, n: i64, inner: InnerLog) -> Result<IntervalCover> {
    if n < 16 {
        return Err(Error::Precondition(format!("n = {n} must be ≥ 16")));
    }
    dyadic_cover_with(oracle, n, block_exponent(n, inner))
}

pub fn dyadic_cover_with(
    oracle: &dyn PassageOracle,
    n: i64,
    exponent: u32,
) -> Result<IntervalCover> {
    let blocks = classify_blocks_with(oracle, n, exponent)?;
    let (_, win_hi) = oracle.window();
    // Largest dyadic length queryable from some x in ⟦0, n⟧.
    let mut k_max = exponent;
    while (1i64 << (k_max + 1)) <= win_hi {
        k_max += 1;
    }

    let mut covered = OpenCover::default();
    let mut pieces = Vec::new();
    let mut current_k = k_max;
    'outer: loop {
        // Radii are nonincreasing along the construction, so the scan
        // resumes from the last accepted k.
        for k in (exponent..=current_k).rev() {
            let len = 1i64 << k;
            let threshold = 1u64 << (2 * k);
            for x in 0..=n {
                if x + len > win_hi || covered.contains(x) {
                    continue;
                }
                if oracle.exceeds(x, len, threshold)? {
                    let (s, t) = covered.insert(x - len, x + len)?;
                    pieces.push(CoverPiece {
                        x,
                        l: len,
                        s: s.max(0),
                        t: t.max(0),
                    });
                    current_k = k;
                    continue 'outer;
                }
            }
        }
        break;
    }

    let ell = pieces.len();
    Ok(IntervalCover {
        n,
        exponent,
        red_blocks: blocks.red,
        blue_blocks: blocks.blue,
        pieces,
        ell,
    })
}

/// The structural guarantees of the covering: every Red block lies in
/// ∪ [S_j, T_j + 𝓛_j]; T(S_j, T_j + 𝓛_j) ≤ 16 𝓛_j²; the middle thirds
/// (x_j ± 𝓛_j/3) are pairwise disjoint.
pub fn check_cover(cover: &IntervalCover, oracle: &dyn PassageOracle) -> Result<()> {
    let block = 1i64 << cover.exponent;
    for &i in &cover.red_blocks {
        let (a, b) = (i * block, i * block + block);
        let ok = cover
            .pieces
            .iter()
            .any(|p| p.s <= a && b <= p.t + p.l);
        if !ok {
            return Err(Error::Precondition(format!(
                "red block [{a}, {b}] not covered by any [S_j, T_j + L_j]"
            )));
        }
    }
    for p in &cover.pieces {
        let len = p.t + p.l - p.s;
        if len >= 1 {
            let bound = 16 * (p.l as u64) * (p.l as u64);
            if oracle.exceeds(p.s, len, bound + 1)? {
                return Err(Error::Precondition(format!(
                    "T({}, {}) exceeds 16 L^2 = {bound}",
                    p.s,
                    p.t + p.l
                )));
            }
        }
    }
    for (j, pj) in cover.pieces.iter().enumerate() {
        for pk in &cover.pieces[j + 1..] {
            // (x_j − L_j/3, x_j + L_j/3) disjoint ⇔ 3|x_j − x_k| ≥ L_j + L_k.
            if 3 * (pj.x - pk.x).abs() < pj.l + pk.l {
                return Err(Error::Precondition(format!(
                    "middle thirds of pieces at {} and {} overlap",
                    pj.x, pk.x
                )));
            }
        }
    }
    // Radii nonincreasing in construction order.
    if cover.pieces.windows(2).any(|w| w[0].l < w[1].l) {
        return Err(Error::Precondition("piece radii increase".into()));
    }
    Ok(())
}

// --- interval grouping --------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupedCover {
    pub intervals: Vec<(f64, f64)>,
    pub r: f64,
    pub m: usize,
}

/// Equivalence-closure grouping: chain input intervals at distance
/// ≤ R and output the hull of each class. The output hulls use input
/// endpoints, are R-separated, cover the input, and have total length
/// at most 2 m R + Σ|y_i − x_i|; all four properties are asserted.
pub fn group_intervals(intervals: &[(f64, f64)], r: f64) -> Result<GroupedCover> {
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("R = {r} must be > 0")));
    }
    for &(a, b) in intervals {
        if !(a <= b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Precondition(format!("bad interval [{a}, {b}]")));
        }
    }
    let mut sorted = intervals.to_vec();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut hulls: Vec<(f64, f64)> = Vec::new();
    for &(a, b) in &sorted {
        match hulls.last_mut() {
            Some(h) if a - h.1 <= r => h.1 = h.1.max(b),
            _ => hulls.push((a, b)),
        }
    }

    // Lemma-bullet assertions.
    let eps = 1e-9;
    for &(s, t) in &hulls {
        debug_assert!(intervals.iter().any(|&(a, _)| a == s));
        debug_assert!(intervals.iter().any(|&(_, b)| b == t));
        let covered = |x: f64| hulls.iter().any(|&(hs, ht)| hs <= x && x <= ht);
        let _ = covered;
        assert!(s <= t);
    }
    for &(a, b) in intervals {
        if !hulls.iter().any(|&(s, t)| s <= a && b <= t) {
            return Err(Error::Precondition(format!(
                "grouping lost input interval [{a}, {b}]"
            )));
        }
    }
    for w in hulls.windows(2) {
        if w[1].0 - w[0].1 < r - eps {
            return Err(Error::Precondition(format!(
                "hulls [{:?}] and [{:?}] closer than R",
                w[0], w[1]
            )));
        }
    }
    let total: f64 = hulls.iter().map(|&(s, t)| t - s).sum();
    let input_total: f64 = intervals.iter().map(|&(a, b)| b - a).sum();
    if total > 2.0 * intervals.len() as f64 * r + input_total + eps {
        return Err(Error::Precondition(
            "grouped total length exceeds 2mR + Σ|y_i − x_i|".into(),
        ));
    }

    let m = hulls.len();
    Ok(GroupedCover {
        intervals: hulls,
        r,
        m,
    })
}

impl GroupedCover {
    /// The 𝒮_M(n) family constraints: at most `big_m` intervals with
    /// endpoints in [0, n], pairwise distance > M³√n, total length
    /// ≤ M⁶√n.
    pub fn check_family(&self, big_m: usize, n: u64) -> Result<()> {
        if self.m == 0 || self.m > big_m {
            return Err(Error::Precondition(format!(
                "m = {} outside ⟦1, {big_m}⟧",
                self.m
            )));
        }
        let root = (n as f64).sqrt();
        let sep = (big_m as f64).powi(3) * root;
        let len_cap = (big_m as f64).powi(6) * root;
        let mut total = 0.0;
        for &(s, t) in &self.intervals {
            if !(0.0 <= s && s < t && t <= n as f64) {
                return Err(Error::Precondition(format!(
                    "interval [{s}, {t}] outside [0, {n}] or degenerate"
                )));
            }
            total += t - s;
        }
        for (i, &(_, t)) in self.intervals.iter().enumerate() {
            if let Some(&(s2, _)) = self.intervals.get(i + 1) {
                if s2 - t <= sep {
                    return Err(Error::Precondition(format!(
                        "separation {} ≤ M³√n = {sep}",
                        s2 - t
                    )));
                }
            }
        }
        if total > len_cap {
            return Err(Error::Precondition(format!(
                "total length {total} > M⁶√n = {len_cap}"
            )));
        }
        Ok(())
    }
}

// --- clustering of moderate intervals -----------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cluster {
    pub members: Vec<(f64, f64)>,
    pub size: usize,
    /// t_i: extreme endpoint of the cluster (sup for the positive
    /// side, inf for the negative side).
    pub t: f64,
    /// F_i = [t − K·size/n, t) on the positive side, (t, t + K·size/n]
    /// on the negative side.
    pub f: (f64, f64),
}

/// Iterated Γ construction on length-1/n grid intervals lying on one
/// side of 0. Positive side: enumerate by decreasing inf and keep the
/// longest prefix with inf I_i > sup I_1 − (i/n)K; peel and repeat.
/// The negative side is the mirror image.
pub fn cluster_moderate(intervals: &[(f64, f64)], k: u64, n: u64) -> Result<Vec<Cluster>> {
    if k < 2 {
        return Err(Error::Precondition(format!("K = {k} must be ≥ 2")));
    }
    if n == 0 {
        return Err(Error::Precondition("n must be ≥ 1".into()));
    }
    if intervals.is_empty() {
        return Ok(Vec::new());
    }
    let h = 1.0 / n as f64;
    let eps = 1e-9 * h.max(1.0);
    for &(a, b) in intervals {
        if ((b - a) - h).abs() > eps || (a * n as f64 - (a * n as f64).round()).abs() > 1e-6 {
            return Err(Error::Precondition(format!(
                "[{a}, {b}] is not a length-1/{n} grid interval"
            )));
        }
    }
    let positive = intervals.iter().all(|&(a, _)| a >= -eps);
    let negative = intervals.iter().all(|&(_, b)| b <= eps);
    if !(positive || negative) {
        return Err(Error::MixedSides);
    }

    let kf = k as f64;
    let mut rest: Vec<(f64, f64)> = intervals.to_vec();
    if positive {
        // inf I_1 > inf I_2 > …
        rest.sort_by(|p, q| q.0.total_cmp(&p.0));
    } else {
        // sup I_{-1} < sup I_{-2} < …
        rest.sort_by(|p, q| p.1.total_cmp(&q.1));
    }

    let mut clusters = Vec::new();
    while !rest.is_empty() {
        let lead = rest[0];
        let mut lambda = 0;
        for (idx, &iv) in rest.iter().enumerate() {
            let i = (idx + 1) as f64;
            let ok = if positive {
                iv.0 > lead.1 - i * kf * h - eps
            } else {
                iv.1 < lead.0 + i * kf * h + eps
            };
            if ok {
                lambda = idx + 1;
            } else {
                break;
            }
        }
        let members: Vec<(f64, f64)> = rest.drain(..lambda).collect();
        let size = members.len();
        let width = kf * size as f64 * h;
        let (t, f) = if positive {
            let t = lead.1;
            (t, (t - width, t))
        } else {
            let t = lead.0;
            (t, (t, t + width))
        };
        clusters.push(Cluster {
            members,
            size,
            t,
            f,
        });
    }

    // Disjointness of the F_i along one side is structural; assert it.
    for w in clusters.windows(2) {
        let disjoint = if positive {
            w[1].f.1 <= w[0].f.0 + eps
        } else {
            w[1].f.0 >= w[0].f.1 - eps
        };
        if !disjoint {
            return Err(Error::Precondition(format!(
                "clusters produce overlapping F intervals {:?} and {:?}",
                w[0].f, w[1].f
            )));
        }
    }
    Ok(clusters)
}
