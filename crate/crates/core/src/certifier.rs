//! Sample-relative certification of contractive classes.
//!
//! Every constant here is the tightest value for which the class inequality
//! holds on the sampled pairs; a certificate is a falsifiable statement about
//! the sample, not a proof over the whole space. Each report therefore carries
//! a description of the sample it was computed on.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{affine_image, hausdorff_unchecked, point_set_distance_unchecked, FiniteSet, Point};
use crate::mappings::{Domain, MultiMap};
use crate::solver::{self, Descent};

/// Pairs whose denominator falls below this are skipped, not counted as
/// violations.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;
pub const DEFAULT_PAIRS_CAP: usize = 20_000;
pub const DEFAULT_CRR_STEPS: u32 = 100;

/// Slack allowed when re-checking a grid-searched inequality.
const RECHECK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractiveClass {
    Contraction,
    Kannan,
    Chatterjea,
    Crr,
    Gornicki,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnrichedClass {
    Contraction,
    Kannan,
    Chatterjea,
    Crr,
}

/// Sampled nodes and the index pairs the inequalities are tested on.
#[derive(Debug, Clone)]
pub struct Sample {
    nodes: Vec<Point>,
    pairs: Vec<(usize, usize)>,
    info: SampleInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleInfo {
    pub description: String,
    pub nodes: usize,
    pub pairs: usize,
    pub exhaustive: bool,
    pub pairs_cap: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
}

impl Sample {
    /// All grid nodes of `domain`. Every node pair is used when there are at
    /// most `pairs_cap` of them, otherwise `pairs_cap` distinct pairs drawn
    /// with a ChaCha8 generator seeded by `seed`.
    pub fn from_domain(domain: &Domain, pairs_cap: usize, seed: u64) -> Result<Self> {
        let nodes = domain.nodes();
        let total = nodes.len() * (nodes.len() - 1) / 2;
        let exhaustive = total <= pairs_cap;
        let pairs =
            if exhaustive { all_pairs(nodes.len()) } else { random_pairs(nodes.len(), pairs_cap, seed) };
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        let description = if exhaustive {
            format!("all {} pairs of {} grid nodes", pairs.len(), nodes.len())
        } else {
            format!("{} seeded random pairs (seed {seed}) of {} grid nodes", pairs.len(), nodes.len())
        };
        let info = SampleInfo {
            description,
            nodes: nodes.len(),
            pairs: pairs.len(),
            exhaustive,
            pairs_cap,
            seed,
            domain: Some(domain.clone()),
        };
        Ok(Sample { nodes, pairs, info })
    }

    /// Every pair of the given points.
    pub fn from_points(points: Vec<Point>) -> Result<Self> {
        let pairs = all_pairs(points.len());
        Sample::from_pairs(points, pairs)
    }

    /// Explicit pairs over explicit points.
    pub fn from_pairs(points: Vec<Point>, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() || points.len() < 2 {
            return Err(Error::EmptySample);
        }
        if let Some(&(i, j)) = pairs.iter().find(|(i, j)| *i >= points.len() || *j >= points.len()) {
            return Err(Error::invalid(format!("pair ({i}, {j}) indexes past {} points", points.len())));
        }
        let info = SampleInfo {
            description: format!("{} explicit pairs of {} points", pairs.len(), points.len()),
            nodes: points.len(),
            pairs: pairs.len(),
            exhaustive: false,
            pairs_cap: pairs.len(),
            seed: 0,
            domain: None,
        };
        Ok(Sample { nodes: points, pairs, info })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn info(&self) -> &SampleInfo {
        &self.info
    }

    /// The first `count` pairs, as a smaller sample over the same nodes.
    pub fn prefix(&self, count: usize) -> Result<Self> {
        Sample::from_pairs(self.nodes.clone(), self.pairs[..count.min(self.pairs.len())].to_vec())
    }
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn random_pairs(n: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(count);
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let pair = (i.min(j), i.max(j));
        if seen.insert(pair) {
            pairs.push(pair);
        }
    }
    pairs
}

/// Image sets and residuals of the map at every sample node.
struct NodeCache<'s> {
    nodes: &'s [Point],
    images: Vec<FiniteSet>,
    residuals: Vec<f64>,
}

impl<'s> NodeCache<'s> {
    fn new(map: &MultiMap, sample: &'s Sample) -> Result<Self> {
        let images: Vec<FiniteSet> = sample.nodes.iter().map(|x| map.evaluate(x)).collect::<Result<_>>()?;
        let residuals =
            sample.nodes.iter().zip(&images).map(|(x, img)| point_set_distance_unchecked(x, img)).collect();
        Ok(NodeCache { nodes: &sample.nodes, images, residuals })
    }

    fn d(&self, i: usize, j: usize) -> f64 {
        self.nodes[i].distance_unchecked(&self.nodes[j])
    }

    /// `d(x_i, T x_j)`
    fn cross(&self, i: usize, j: usize) -> f64 {
        point_set_distance_unchecked(&self.nodes[i], &self.images[j])
    }

    /// Images of `x ↦ bx + Tx` and the scaled points `(b+1)x`.
    fn shifted(&self, b: f64) -> Result<(Vec<FiniteSet>, Vec<Point>)> {
        let images = self
            .nodes
            .iter()
            .zip(&self.images)
            .map(|(x, img)| affine_image(img, 1.0, &x.scale(b)?))
            .collect::<Result<_>>()?;
        let scaled = self.nodes.iter().map(|x| x.scale(b + 1.0)).collect::<Result<_>>()?;
        Ok((images, scaled))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Point,
    pub y: Point,
}

/// Supremum of `lhs / denominator` over the sampled pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub constant: f64,
    pub witness: Option<Witness>,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Minimal `(a, b)` on the `1/steps` grid for `lhs ≤ a·d(x,y) + b·cross`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrrEstimate {
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `(a + b)/(1 − b)`
    pub delta: Option<f64>,
    pub satisfied: bool,
    pub witness: Option<Witness>,
    pub evaluated: usize,
    pub skipped: usize,
    pub grid_steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum ClassEstimate {
    Ratio {
        class: ContractiveClass,
        #[serde(flatten)]
        estimate: RatioEstimate,
        satisfied: bool,
    },
    Crr(CrrEstimate),
}

impl ClassEstimate {
    pub fn satisfied(&self) -> bool {
        match self {
            ClassEstimate::Ratio { satisfied, .. } => *satisfied,
            ClassEstimate::Crr(c) => c.satisfied,
        }
    }

    pub fn ratio(&self) -> Option<&RatioEstimate> {
        match self {
            ClassEstimate::Ratio { estimate, .. } => Some(estimate),
            ClassEstimate::Crr(_) => None,
        }
    }

    pub fn crr(&self) -> Option<&CrrEstimate> {
        match self {
            ClassEstimate::Crr(c) => Some(c),
            ClassEstimate::Ratio { .. } => None,
        }
    }
}

/// Class thresholds: `θ < 1` contraction, `θ < ½` Kannan and Chatterjea,
/// `M < 1` Górnicki.
pub fn ratio_threshold(class: ContractiveClass) -> f64 {
    match class {
        ContractiveClass::Contraction | ContractiveClass::Gornicki => 1.0,
        ContractiveClass::Kannan | ContractiveClass::Chatterjea => 0.5,
        ContractiveClass::Crr => f64::NAN,
    }
}

fn sup_ratio<F>(cache: &NodeCache<'_>, pairs: &[(usize, usize)], terms: F) -> RatioEstimate
where
    F: Fn(usize, usize) -> (f64, f64),
{
    let mut best = 0.0_f64;
    let mut witness = None;
    let (mut evaluated, mut skipped) = (0, 0);
    for &(i, j) in pairs {
        let (lhs, den) = terms(i, j);
        if den < DENOMINATOR_FLOOR {
            skipped += 1;
            continue;
        }
        evaluated += 1;
        let ratio = lhs / den;
        if witness.is_none() || ratio > best {
            best = ratio;
            witness = Some((i, j));
        }
    }
    RatioEstimate {
        constant: best,
        witness: witness.map(|(i, j)| Witness { x: cache.nodes[i].clone(), y: cache.nodes[j].clone() }),
        evaluated,
        skipped,
    }
}

fn plain_ratio(cache: &NodeCache<'_>, class: ContractiveClass, pairs: &[(usize, usize)]) -> RatioEstimate {
    let h = |i: usize, j: usize| hausdorff_unchecked(&cache.images[i], &cache.images[j]);
    let r = &cache.residuals;
    match class {
        ContractiveClass::Contraction => sup_ratio(cache, pairs, |i, j| (h(i, j), cache.d(i, j))),
        ContractiveClass::Kannan => sup_ratio(cache, pairs, |i, j| (h(i, j), r[i] + r[j])),
        ContractiveClass::Chatterjea => {
            sup_ratio(cache, pairs, |i, j| (h(i, j), cache.cross(i, j) + cache.cross(j, i)))
        }
        ContractiveClass::Gornicki => sup_ratio(cache, pairs, |i, j| (h(i, j), r[i] + r[j] + cache.d(i, j))),
        ContractiveClass::Crr => unreachable!("CRR is grid-searched"),
    }
}

/// Per-pair `(lhs, d(x,y), cross)` for a CRR-type inequality.
type CrrTerms = Vec<(f64, f64, f64)>;

fn crr_search(cache: &NodeCache<'_>, pairs: &[(usize, usize)], terms: &CrrTerms, steps: u32) -> CrrEstimate {
    let n = steps as i64;
    let skipped = terms.iter().filter(|t| t.1 < DENOMINATOR_FLOOR).count();
    let holds = |a: f64, b: f64| {
        terms.iter().all(|&(lhs, d, cross)| lhs <= a * d + b * cross + RECHECK_TOLERANCE * lhs.max(1.0))
    };
    // (delta, a+2b in steps, ia, ib, witness index)
    let mut best: Option<(f64, i64, i64, i64, usize)> = None;
    let mut ib = 0i64;
    while 2 * ib < n {
        let b = ib as f64 / n as f64;
        let mut a_req = 0.0_f64;
        let mut arg = 0usize;
        let mut feasible = true;
        for (k, &(lhs, d, cross)) in terms.iter().enumerate() {
            let excess = lhs - b * cross;
            if d < DENOMINATOR_FLOOR {
                if excess > RECHECK_TOLERANCE * lhs.max(1.0) {
                    feasible = false;
                    break;
                }
                continue;
            }
            let need = excess / d;
            if need > a_req {
                a_req = need;
                arg = k;
            }
        }
        if feasible {
            let mut ia = ((a_req * n as f64) - 1e-9).ceil().max(0.0) as i64;
            while ia + 2 * ib < n && !holds(ia as f64 / n as f64, b) {
                ia += 1;
            }
            if ia + 2 * ib < n {
                let a = ia as f64 / n as f64;
                let delta = (a + b) / (1.0 - b);
                let key = (delta, ia + 2 * ib, ia);
                let better = match best {
                    None => true,
                    Some((d0, s0, a0, _, _)) => key < (d0, s0, a0),
                };
                if better {
                    best = Some((delta, ia + 2 * ib, ia, ib, arg));
                }
            }
        }
        ib += 1;
    }
    let evaluated = terms.len() - skipped;
    match best {
        Some((delta, _, ia, ib, arg)) => {
            let (i, j) = pairs[arg];
            CrrEstimate {
                a: Some(ia as f64 / n as f64),
                b: Some(ib as f64 / n as f64),
                delta: Some(delta),
                satisfied: true,
                witness: Some(Witness { x: cache.nodes[i].clone(), y: cache.nodes[j].clone() }),
                evaluated,
                skipped,
                grid_steps: steps,
            }
        }
        None => CrrEstimate {
            a: None,
            b: None,
            delta: None,
            satisfied: false,
            witness: None,
            evaluated,
            skipped,
            grid_steps: steps,
        },
    }
}

fn plain_crr(cache: &NodeCache<'_>, pairs: &[(usize, usize)], steps: u32) -> CrrEstimate {
    let terms: CrrTerms = pairs
        .iter()
        .map(|&(i, j)| {
            (
                hausdorff_unchecked(&cache.images[i], &cache.images[j]),
                cache.d(i, j),
                cache.cross(i, j) + cache.cross(j, i),
            )
        })
        .collect();
    crr_search(cache, pairs, &terms, steps)
}

/// Tightest sampled constant for a plain class.
///
/// Ratio classes return `sup H(Tx,Ty)/denominator`; CRR returns the minimal
/// `(a, b)` with `a + 2b < 1` on a 0.01 grid, preferring the smallest
/// `(a+b)/(1−b)`.
pub fn estimate_class_constant(
    map: &MultiMap,
    class: ContractiveClass,
    sample: &Sample,
) -> Result<ClassEstimate> {
    estimate_class_constant_with(map, class, sample, DEFAULT_CRR_STEPS)
}

pub fn estimate_class_constant_with(
    map: &MultiMap,
    class: ContractiveClass,
    sample: &Sample,
    crr_steps: u32,
) -> Result<ClassEstimate> {
    check_crr_steps(crr_steps)?;
    let cache = NodeCache::new(map, sample)?;
    Ok(plain_estimate(&cache, class, &sample.pairs, crr_steps))
}

fn plain_estimate(
    cache: &NodeCache<'_>,
    class: ContractiveClass,
    pairs: &[(usize, usize)],
    crr_steps: u32,
) -> ClassEstimate {
    match class {
        ContractiveClass::Crr => ClassEstimate::Crr(plain_crr(cache, pairs, crr_steps)),
        _ => {
            let estimate = plain_ratio(cache, class, pairs);
            let satisfied = estimate.constant < ratio_threshold(class);
            ClassEstimate::Ratio { class, estimate, satisfied }
        }
    }
}

fn check_crr_steps(steps: u32) -> Result<()> {
    if steps < 2 {
        return Err(Error::invalid("CRR grid needs at least 2 steps"));
    }
    Ok(())
}

/// Result of scanning the enrichment constant over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedEstimate {
    pub class: EnrichedClass,
    /// Chosen enrichment constant (`b`, or `c` for CRR).
    pub b: f64,
    /// `1/(b+1)`
    pub lambda: f64,
    pub estimate: ClassEstimate,
    pub satisfied: bool,
    /// Constant obtained at each grid value, in grid order.
    pub scan: Vec<ScanEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub b: f64,
    pub constant: Option<f64>,
    pub satisfied: bool,
}

fn enriched_at(
    cache: &NodeCache<'_>,
    class: EnrichedClass,
    b: f64,
    pairs: &[(usize, usize)],
    crr_steps: u32,
) -> Result<(ClassEstimate, bool)> {
    let (shifted, scaled) = cache.shifted(b)?;
    let h = |i: usize, j: usize| hausdorff_unchecked(&shifted[i], &shifted[j]);
    let r = &cache.residuals;
    let ratio = |class: ContractiveClass, est: RatioEstimate, threshold: f64| {
        let satisfied = est.constant < threshold;
        (ClassEstimate::Ratio { class, estimate: est, satisfied }, satisfied)
    };
    Ok(match class {
        EnrichedClass::Contraction => {
            let est = sup_ratio(cache, pairs, |i, j| (h(i, j), cache.d(i, j)));
            ratio(ContractiveClass::Contraction, est, b + 1.0)
        }
        EnrichedClass::Kannan => {
            let est = sup_ratio(cache, pairs, |i, j| (h(i, j), r[i] + r[j]));
            ratio(ContractiveClass::Kannan, est, 0.5)
        }
        EnrichedClass::Chatterjea => {
            let est = sup_ratio(cache, pairs, |i, j| {
                let den = point_set_distance_unchecked(&scaled[i], &shifted[j])
                    + point_set_distance_unchecked(&scaled[j], &shifted[i]);
                (h(i, j), den)
            });
            ratio(ContractiveClass::Chatterjea, est, 0.5)
        }
        EnrichedClass::Crr => {
            let terms: CrrTerms = pairs.iter().map(|&(i, j)| (h(i, j), cache.d(i, j), r[i] + r[j])).collect();
            let est = crr_search(cache, pairs, &terms, crr_steps);
            let satisfied = est.satisfied;
            (ClassEstimate::Crr(est), satisfied)
        }
    })
}

fn scan_value(est: &ClassEstimate) -> Option<f64> {
    match est {
        ClassEstimate::Ratio { estimate, .. } => Some(estimate.constant),
        ClassEstimate::Crr(c) => c.delta,
    }
}

/// Scans `b_grid`, testing the enriched inequality for `x ↦ bx + Tx` at each
/// value, and keeps the value with the smallest constant (smallest `δ` for
/// CRR). Values meeting the class threshold are preferred; ties go to the
/// smallest `b`.
pub fn estimate_enriched(
    map: &MultiMap,
    class: EnrichedClass,
    b_grid: &[f64],
    sample: &Sample,
) -> Result<EnrichedEstimate> {
    estimate_enriched_with(map, class, b_grid, sample, DEFAULT_CRR_STEPS)
}

pub fn estimate_enriched_with(
    map: &MultiMap,
    class: EnrichedClass,
    b_grid: &[f64],
    sample: &Sample,
    crr_steps: u32,
) -> Result<EnrichedEstimate> {
    validate_b_grid(b_grid)?;
    check_crr_steps(crr_steps)?;
    let cache = NodeCache::new(map, sample)?;
    enriched_scan(&cache, class, b_grid, &sample.pairs, crr_steps)
}

pub fn validate_b_grid(b_grid: &[f64]) -> Result<()> {
    if b_grid.is_empty() {
        return Err(Error::invalid("b grid must be nonempty"));
    }
    if let Some(b) = b_grid.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
        return Err(Error::invalid(format!("b grid entries must be finite and >= 0, got {b}")));
    }
    Ok(())
}

fn enriched_scan(
    cache: &NodeCache<'_>,
    class: EnrichedClass,
    b_grid: &[f64],
    pairs: &[(usize, usize)],
    crr_steps: u32,
) -> Result<EnrichedEstimate> {
    let mut scan = Vec::with_capacity(b_grid.len());
    let mut best: Option<(bool, f64, f64, ClassEstimate)> = None;
    for &b in b_grid {
        let (est, satisfied) = enriched_at(cache, class, b, pairs, crr_steps)?;
        let value = scan_value(&est);
        scan.push(ScanEntry { b, constant: value, satisfied });
        let Some(value) = value else { continue };
        let better = match &best {
            None => true,
            Some((s0, v0, b0, _)) => {
                (satisfied && !s0) || (satisfied == *s0 && (value < *v0 || (value == *v0 && b < *b0)))
            }
        };
        if better {
            best = Some((satisfied, value, b, est));
        }
    }
    let (satisfied, b, estimate) = match best {
        Some((s, _, b, est)) => (s, b, est),
        // every CRR search came back empty: report the first grid value
        None => {
            let b = b_grid[0];
            let (est, s) = enriched_at(cache, class, b, pairs, crr_steps)?;
            (s, b, est)
        }
    };
    Ok(EnrichedEstimate { class, b, lambda: 1.0 / (b + 1.0), estimate, satisfied, scan })
}

/// `k = θ/(1−θ)`; `None` when `θ ≥ 1`.
pub fn kannan_k(theta: f64) -> Option<f64> {
    (theta < 1.0).then(|| theta / (1.0 - theta))
}

/// `δ = (a+b)/(1−b)`; `None` when `b ≥ 1`.
pub fn crr_delta(a: f64, b: f64) -> Option<f64> {
    (b < 1.0).then(|| (a + b) / (1.0 - b))
}

/// `2M/(1−M)`, the one-step constant of a Górnicki map; `None` when `M ≥ 1`.
pub fn gornicki_k(m: f64) -> Option<f64> {
    (m < 1.0).then(|| 2.0 * m / (1.0 - m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GornickiCertificate {
    pub m: RatioEstimate,
    /// Descent constants used for the empirical check.
    pub descent: Option<Descent>,
    /// True when `descent` was estimated from nearest image points rather
    /// than supplied.
    pub descent_estimated: bool,
    pub descent_checked: usize,
    pub descent_failures: usize,
    pub satisfied: bool,
}

fn certify_gornicki(
    map: &MultiMap,
    cache: &NodeCache<'_>,
    pairs: &[(usize, usize)],
    descent: Option<Descent>,
) -> GornickiCertificate {
    let m = plain_ratio(cache, ContractiveClass::Gornicki, pairs);
    let (descent, estimated) = match descent {
        Some(d) => (Some(d), false),
        None => (estimate_descent(map, cache), true),
    };
    let mut checked = 0;
    let mut failures = 0;
    if let Some(d) = descent {
        for x in cache.nodes {
            checked += 1;
            match solver::gornicki_step(map, x, d.a, d.b) {
                Ok(Some(_)) => {}
                _ => failures += 1,
            }
        }
    }
    let satisfied = m.constant < 1.0 && descent.is_some() && failures == 0;
    GornickiCertificate {
        m,
        descent,
        descent_estimated: estimated,
        descent_checked: checked,
        descent_failures: failures,
        satisfied,
    }
}

/// Descent constants realised by stepping to the nearest image point:
/// `a = sup d(u,Tu)/d(x,Tx)`, `b = sup ‖u−x‖/d(x,Tx)`. `None` if `a ≥ 1` or
/// some image cannot be evaluated.
fn estimate_descent(map: &MultiMap, cache: &NodeCache<'_>) -> Option<Descent> {
    let (mut a, mut b) = (0.0_f64, 0.0_f64);
    for ((x, image), &r) in cache.nodes.iter().zip(&cache.images).zip(&cache.residuals) {
        if r == 0.0 {
            continue;
        }
        let u = solver::nadler_select(x, image, solver::DEFAULT_MU).ok()?;
        let ru = map.residual(&u).ok()?;
        a = a.max(ru / r);
        b = b.max(x.distance_unchecked(&u) / r);
    }
    Descent::new(a, b).ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    pub pairs_cap: usize,
    pub seed: u64,
    pub b_grid: Vec<f64>,
    pub crr_steps: u32,
    /// Descent constants for the Górnicki check; estimated when absent.
    pub descent: Option<Descent>,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            pairs_cap: DEFAULT_PAIRS_CAP,
            seed: 0,
            b_grid: default_b_grid(),
            crr_steps: DEFAULT_CRR_STEPS,
            descent: None,
        }
    }
}

/// `0, 0.25, …, 4`.
pub fn default_b_grid() -> Vec<f64> {
    (0..=16).map(|i| i as f64 * 0.25).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlainCertificate {
    pub constant: f64,
    pub threshold: f64,
    pub satisfied: bool,
    pub witness: Option<Witness>,
    pub evaluated: usize,
    pub skipped: usize,
}

impl PlainCertificate {
    fn new(est: RatioEstimate, threshold: f64) -> Self {
        PlainCertificate {
            satisfied: est.constant < threshold,
            constant: est.constant,
            threshold,
            witness: est.witness,
            evaluated: est.evaluated,
            skipped: est.skipped,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedK {
    pub theta: f64,
    pub k: Option<f64>,
    /// `k < 1`, so the data-dependence bound can be formed.
    pub applicable: bool,
}

impl DerivedK {
    fn new(theta: f64, k: Option<f64>) -> Self {
        DerivedK { theta, k, applicable: k.is_some_and(|k| k < 1.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// `θ/(1−θ)` per class (`2M/(1−M)` for Górnicki).
    pub k: BTreeMap<String, DerivedK>,
    pub crr_delta: Option<f64>,
    pub enriched_crr_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingClassReport {
    pub sample: SampleInfo,
    pub contraction: PlainCertificate,
    pub kannan: PlainCertificate,
    pub chatterjea: PlainCertificate,
    pub crr: CrrEstimate,
    pub gornicki: GornickiCertificate,
    pub enriched_contraction: EnrichedEstimate,
    pub enriched_kannan: EnrichedEstimate,
    pub enriched_chatterjea: EnrichedEstimate,
    pub enriched_crr: EnrichedEstimate,
    pub derived: DerivedConstants,
}

impl MappingClassReport {
    pub fn enriched(&self, class: EnrichedClass) -> &EnrichedEstimate {
        match class {
            EnrichedClass::Contraction => &self.enriched_contraction,
            EnrichedClass::Kannan => &self.enriched_kannan,
            EnrichedClass::Chatterjea => &self.enriched_chatterjea,
            EnrichedClass::Crr => &self.enriched_crr,
        }
    }
}

/// Runs every plain and enriched estimate on one deterministic sample of the
/// map's grid.
pub fn certify(map: &MultiMap, cfg: &CertifyConfig) -> Result<MappingClassReport> {
    validate_b_grid(&cfg.b_grid)?;
    check_crr_steps(cfg.crr_steps)?;
    if let Some(d) = &cfg.descent {
        d.validate()?;
    }
    let sample = Sample::from_domain(map.domain(), cfg.pairs_cap, cfg.seed)?;
    let cache = NodeCache::new(map, &sample)?;
    let pairs = sample.pairs();

    let plain = |class| PlainCertificate::new(plain_ratio(&cache, class, pairs), ratio_threshold(class));
    let contraction = plain(ContractiveClass::Contraction);
    let kannan = plain(ContractiveClass::Kannan);
    let chatterjea = plain(ContractiveClass::Chatterjea);
    let crr = plain_crr(&cache, pairs, cfg.crr_steps);
    let gornicki = certify_gornicki(map, &cache, pairs, cfg.descent);

    let scan = |class| enriched_scan(&cache, class, &cfg.b_grid, pairs, cfg.crr_steps);
    let enriched_contraction = scan(EnrichedClass::Contraction)?;
    let enriched_kannan = scan(EnrichedClass::Kannan)?;
    let enriched_chatterjea = scan(EnrichedClass::Chatterjea)?;
    let enriched_crr = scan(EnrichedClass::Crr)?;

    let mut k = BTreeMap::new();
    for (name, theta) in [
        ("contraction", contraction.constant),
        ("kannan", kannan.constant),
        ("chatterjea", chatterjea.constant),
    ] {
        k.insert(name.to_string(), DerivedK::new(theta, kannan_k(theta)));
    }
    for (name, est) in [("enriched-kannan", &enriched_kannan), ("enriched-chatterjea", &enriched_chatterjea)]
    {
        if let Some(theta) = est.estimate.ratio().map(|r| r.constant) {
            k.insert(name.to_string(), DerivedK::new(theta, kannan_k(theta)));
        }
    }
    let m = gornicki.m.constant;
    k.insert("gornicki".to_string(), DerivedK::new(m, gornicki_k(m)));

    let derived = DerivedConstants {
        k,
        crr_delta: crr.delta,
        enriched_crr_delta: enriched_crr.estimate.crr().and_then(|c| c.delta),
    };

    Ok(MappingClassReport {
        sample: sample.info().clone(),
        contraction,
        kannan,
        chatterjea,
        crr,
        gornicki,
        enriched_contraction,
        enriched_kannan,
        enriched_chatterjea,
        enriched_crr,
        derived,
    })
}
