//! Iteration engines for multivalued maps.
//!
//! * [`krasnoselskii_iterate`] picks `x_{n+1} ∈ T_λ x_n` by near-best
//!   selection and stops on the residual of the original map.
//! * [`solve_gornicki`] follows the descent clause of a Górnicki map: from
//!   `x` move to some `u` with `d(u,Tu) ≤ a·d(x,Tx)` and `‖u−x‖ ≤ b·d(x,Tx)`.
//! * [`endpoint_iterate`] is the same descent with `δ({x}, Tx)` in place of
//!   `d(x, Tx)`, so convergence means the image collapses onto the iterate.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    affine_image, check_dims, delta_distance, point_set_distance_unchecked, FiniteSet, Point,
};
use crate::mappings::MultiMap;
use crate::transform;

pub const DEFAULT_MU: f64 = 1.001;
pub const DEFAULT_EPS: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    /// Selection slack; any `μ > 1` admits the exact nearest point.
    pub mu: f64,
    /// Residual stop tolerance.
    pub eps: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig { mu: DEFAULT_MU, eps: DEFAULT_EPS, max_iter: DEFAULT_MAX_ITER, seed: 0 }
    }
}

impl IterationConfig {
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 1.0) || !self.mu.is_finite() {
            return Err(Error::invalid(format!("mu must exceed 1, got {}", self.mu)));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::invalid(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Descent constants `(a, b)` with `0 ≤ a < 1`, `b ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descent {
    pub a: f64,
    pub b: f64,
}

impl Descent {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let d = Descent { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.a < 1.0) {
            return Err(Error::invalid(format!("descent a must lie in [0, 1), got {}", self.a)));
        }
        if !(self.b >= 0.0) || !self.b.is_finite() {
            return Err(Error::invalid(format!("descent b must be >= 0, got {}", self.b)));
        }
        Ok(())
    }

    /// `b·aⁿ·r0`, the bound on the n-th step length.
    pub fn envelope(&self, n: usize, r0: f64) -> f64 {
        self.b * self.a.powi(n as i32) * r0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converged,
    MaxIterExceeded,
    DescentFailed,
    EvaluationFailed,
}

/// Record of one iteration run.
///
/// `iterates` has one more entry than `selected`; `residuals[n]` belongs to
/// `iterates[n]`. For the descent engines `envelope[n]` bounds the length of
/// step `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub iterates: Vec<Point>,
    pub selected: Vec<Point>,
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Vec<f64>>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl IterationTrace {
    fn start(x0: Point) -> Self {
        IterationTrace {
            iterates: vec![x0],
            selected: Vec::new(),
            residuals: Vec::new(),
            envelope: None,
            verdict: Verdict::MaxIterExceeded,
            error: None,
        }
    }

    fn fail(mut self, err: Error) -> Self {
        // keep the invariant that every iterate has a residual
        self.iterates.truncate(self.residuals.len().max(1));
        self.selected.truncate(self.iterates.len() - 1);
        self.verdict = Verdict::EvaluationFailed;
        self.error = Some(err.to_string());
        self
    }

    /// Number of steps taken.
    pub fn steps(&self) -> usize {
        self.selected.len()
    }

    pub fn last_point(&self) -> &Point {
        self.iterates.last().expect("trace always holds x0")
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }

    pub fn converged(&self) -> bool {
        self.verdict == Verdict::Converged
    }

    /// Step lengths `‖x_{n+1} − x_n‖`.
    pub fn step_lengths(&self) -> Vec<f64> {
        self.iterates.windows(2).map(|w| w[0].distance_unchecked(&w[1])).collect()
    }

    /// CSV with columns `n, x_0..x_{d-1}, residual, envelope`.
    pub fn to_csv(&self) -> String {
        let dim = self.iterates[0].dim();
        let mut out = String::from("n");
        for k in 0..dim {
            let _ = write!(out, ",x{k}");
        }
        out.push_str(",residual,envelope\n");
        for (n, x) in self.iterates.iter().enumerate() {
            let _ = write!(out, "{n}");
            for c in x.coords() {
                let _ = write!(out, ",{c:?}");
            }
            match self.residuals.get(n) {
                Some(r) => {
                    let _ = write!(out, ",{r:?}");
                }
                None => out.push(','),
            }
            match self.envelope.as_ref().and_then(|e| e.get(n)) {
                Some(e) => {
                    let _ = writeln!(out, ",{e:?}");
                }
                None => out.push_str(",\n"),
            }
        }
        out
    }
}

/// Picks `a ∈ A` with `‖x − a‖ ≤ μ·d(x, A)`.
///
/// Finite sets always contain an exact nearest point, which is returned;
/// ties go to the lexicographically smallest candidate.
pub fn nadler_select(x: &Point, set: &FiniteSet, mu: f64) -> Result<Point> {
    if !(mu > 1.0) {
        return Err(Error::invalid(format!("mu must exceed 1, got {mu}")));
    }
    check_dims(x.dim(), set.dim())?;
    let mut best = &set.points()[0];
    let mut best_d = x.distance_unchecked(best);
    for a in &set.points()[1..] {
        let d = x.distance_unchecked(a);
        if d < best_d {
            best = a;
            best_d = d;
        }
    }
    Ok(best.clone())
}

/// Krasnoselskii-type selection iteration `x_{n+1} ∈ T_λ x_n`.
///
/// Stops once `d(x_n, Tx_n) ≤ eps` on the original map; this is `1/λ` times
/// the averaged residual, so the stop rule does not depend on `λ`.
pub fn krasnoselskii_iterate(
    map: &MultiMap,
    lambda: f64,
    x0: Point,
    cfg: &IterationConfig,
) -> Result<IterationTrace> {
    cfg.validate()?;
    // validates lambda
    transform::averaged(map, lambda)?;
    check_dims(map.dim(), x0.dim())?;

    let mut trace = IterationTrace::start(x0);
    loop {
        let x = trace.last_point().clone();
        let image = match map.evaluate(&x) {
            Ok(image) => image,
            Err(e) => return Ok(trace.fail(e)),
        };
        let r = point_set_distance_unchecked(&x, &image);
        trace.residuals.push(r);
        if r <= cfg.eps {
            trace.verdict = Verdict::Converged;
            return Ok(trace);
        }
        if trace.steps() == cfg.max_iter {
            trace.verdict = Verdict::MaxIterExceeded;
            return Ok(trace);
        }
        let averaged = match x.scale(1.0 - lambda).and_then(|v| affine_image(&image, lambda, &v)) {
            Ok(set) => set,
            Err(e) => return Ok(trace.fail(e)),
        };
        let next = nadler_select(&x, &averaged, cfg.mu)?;
        trace.selected.push(next.clone());
        trace.iterates.push(next);
    }
}

fn delta_residual(map: &MultiMap, x: &Point) -> Result<f64> {
    let image = map.evaluate(x)?;
    delta_distance(&FiniteSet::singleton(x.clone()), &image)
}

/// Residual used by a descent engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gauge {
    /// `d(x, Tx)`
    Distance,
    /// `δ({x}, Tx)`
    Delta,
}

impl Gauge {
    fn measure(self, map: &MultiMap, x: &Point) -> Result<f64> {
        match self {
            Gauge::Distance => map.residual(x),
            Gauge::Delta => delta_residual(map, x),
        }
    }
}

fn descent_step(
    map: &MultiMap,
    x: &Point,
    rx: f64,
    descent: &Descent,
    gauge: Gauge,
) -> Result<Option<Point>> {
    if rx == 0.0 {
        return Ok(Some(x.clone()));
    }
    let radius = descent.b * rx;
    let target = descent.a * rx;
    let image = map.evaluate(x)?;
    let from_grid = map.domain().nodes_in_ball(x, radius);
    for u in image.iter().chain(from_grid.iter()) {
        if x.distance_unchecked(u) > radius {
            continue;
        }
        // a candidate whose image cannot be evaluated does not qualify
        if matches!(gauge.measure(map, u), Ok(ru) if ru <= target) {
            return Ok(Some(u.clone()));
        }
    }
    Ok(None)
}

/// One Górnicki descent step from `x`.
///
/// Candidates are the points of `Tx` followed by the grid nodes in the ball
/// of radius `b·d(x,Tx)` around `x`, each in canonical order; the first one
/// with `d(u,Tu) ≤ a·d(x,Tx)` and `‖u−x‖ ≤ b·d(x,Tx)` is returned. `Ok(None)`
/// signals descent failure.
pub fn gornicki_step(map: &MultiMap, x: &Point, a: f64, b: f64) -> Result<Option<Point>> {
    let descent = Descent::new(a, b)?;
    check_dims(map.dim(), x.dim())?;
    let rx = map.residual(x)?;
    descent_step(map, x, rx, &descent, Gauge::Distance)
}

/// Iterates [`gornicki_step`] until `d(x_n, Tx_n) ≤ eps`, `max_iter` steps,
/// or descent failure. The trace carries the envelope `b·aⁿ·d(x_0,Tx_0)`.
pub fn solve_gornicki(
    map: &MultiMap,
    x0: Point,
    a: f64,
    b: f64,
    cfg: &IterationConfig,
) -> Result<IterationTrace> {
    descent_run(map, x0, Descent::new(a, b)?, cfg, Gauge::Distance)
}

/// δ-residual descent towards an end point (`Tz = {z}`).
///
/// Converged means `δ({x_N}, Tx_N) ≤ eps`: every point of the image lies
/// within `eps` of the iterate.
pub fn endpoint_iterate(
    map: &MultiMap,
    x0: Point,
    descent: Descent,
    cfg: &IterationConfig,
) -> Result<IterationTrace> {
    descent.validate()?;
    descent_run(map, x0, descent, cfg, Gauge::Delta)
}

fn descent_run(
    map: &MultiMap,
    x0: Point,
    descent: Descent,
    cfg: &IterationConfig,
    gauge: Gauge,
) -> Result<IterationTrace> {
    cfg.validate()?;
    check_dims(map.dim(), x0.dim())?;
    let mut trace = IterationTrace::start(x0);
    let mut envelope = Vec::new();
    loop {
        let x = trace.last_point().clone();
        let r = match gauge.measure(map, &x) {
            Ok(r) => r,
            Err(e) => {
                trace.envelope = Some(envelope);
                return Ok(trace.fail(e));
            }
        };
        trace.residuals.push(r);
        if r <= cfg.eps {
            trace.verdict = Verdict::Converged;
            break;
        }
        if trace.steps() == cfg.max_iter {
            trace.verdict = Verdict::MaxIterExceeded;
            break;
        }
        let r0 = trace.residuals[0];
        match descent_step(map, &x, r, &descent, gauge) {
            Ok(Some(u)) => {
                envelope.push(descent.envelope(trace.steps(), r0));
                trace.selected.push(u.clone());
                trace.iterates.push(u);
            }
            Ok(None) => {
                trace.verdict = Verdict::DescentFailed;
                break;
            }
            Err(e) => {
                trace.envelope = Some(envelope);
                return Ok(trace.fail(e));
            }
        }
    }
    trace.envelope = Some(envelope);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mappings::builtins::*;

    fn p(c: f64) -> Point {
        Point::new(vec![c]).unwrap()
    }

    fn set(vals: &[f64]) -> FiniteSet {
        FiniteSet::new(vals.iter().map(|&v| p(v)).collect()).unwrap()
    }

    #[test]
    fn nadler_select_examples() {
        assert_eq!(nadler_select(&p(0.0), &set(&[1.0, 5.0]), 1.5).unwrap(), p(1.0));
        assert_eq!(nadler_select(&p(5.0), &set(&[1.0, 5.0]), 1.5).unwrap(), p(5.0));
        assert_eq!(nadler_select(&p(0.0), &set(&[-1.0, 1.0]), 1.5).unwrap(), p(-1.0));
        assert!(nadler_select(&p(0.0), &set(&[1.0]), 1.0).is_err());
    }

    #[test]
    fn krasnoselskii_examples() {
        let cfg = IterationConfig::default();
        let trace = krasnoselskii_iterate(&negation(), 0.5, p(8.0), &cfg).unwrap();
        assert_eq!(trace.iterates, vec![p(8.0), p(0.0)]);
        assert_eq!(trace.residuals, vec![16.0, 0.0]);
        assert!(trace.converged());

        let id = crate::mappings::MultiMap::identity(halving().domain().clone());
        let trace = krasnoselskii_iterate(&id, 0.7, p(3.0), &cfg).unwrap();
        assert_eq!(trace.steps(), 0);
        assert!(trace.converged());

        let trace = krasnoselskii_iterate(&halving(), 1.0, p(8.0), &cfg.with_eps(1e-6)).unwrap();
        assert!(trace.converged());
        assert_eq!(&trace.iterates[..4], &[p(8.0), p(4.0), p(2.0), p(1.0)]);
        for w in trace.residuals.windows(2) {
            assert_eq!(w[1], w[0] / 2.0);
        }
    }

    #[test]
    fn krasnoselskii_hits_iteration_cap() {
        let cfg = IterationConfig::default().with_max_iter(5);
        let trace = krasnoselskii_iterate(&scalar_affine(1.0, 1.0), 0.5, p(0.0), &cfg).unwrap();
        assert_eq!(trace.verdict, Verdict::MaxIterExceeded);
        assert_eq!(trace.steps(), 5);
        assert_eq!(trace.residuals.len(), 6);
    }

    #[test]
    fn evaluation_failure_truncates_trace() {
        let domain = crate::mappings::Domain::cube(1, 0.0, 2.0, 3).unwrap();
        let table = vec![set(&[1.0]), set(&[4.0]), set(&[3.0])];
        let t = MultiMap::tabulated(table, domain).unwrap();
        let trace = krasnoselskii_iterate(&t, 1.0, p(1.0), &IterationConfig::default()).unwrap();
        assert_eq!(trace.verdict, Verdict::EvaluationFailed);
        assert_eq!(trace.iterates.len(), trace.residuals.len());
        assert_eq!(trace.iterates.len(), trace.selected.len() + 1);
        assert!(trace.error.as_deref().unwrap().contains("out of domain"));
    }

    #[test]
    fn krasnoselskii_rejects_bad_parameters() {
        let cfg = IterationConfig::default();
        assert!(krasnoselskii_iterate(&halving(), 0.0, p(1.0), &cfg).is_err());
        let bad = IterationConfig { mu: 1.0, ..cfg };
        assert!(krasnoselskii_iterate(&halving(), 0.5, p(1.0), &bad).is_err());
        let bad = IterationConfig { eps: 0.0, ..cfg };
        assert!(krasnoselskii_iterate(&halving(), 0.5, p(1.0), &bad).is_err());
    }

    #[test]
    fn gornicki_step_examples() {
        assert_eq!(gornicki_step(&halving(), &p(8.0), 0.5, 1.0).unwrap(), Some(p(4.0)));
        assert_eq!(gornicki_step(&halving(), &p(0.0), 0.5, 1.0).unwrap(), Some(p(0.0)));
        assert_eq!(gornicki_step(&scalar_affine(1.0, 1.0), &p(0.5), 0.1, 0.1).unwrap(), None);
        assert!(gornicki_step(&halving(), &p(1.0), 1.0, 1.0).is_err());
        assert!(gornicki_step(&halving(), &p(1.0), 0.5, -1.0).is_err());
    }

    #[test]
    fn gornicki_step_falls_back_to_grid_nodes() {
        // the image point −0.75 lies outside the ball of radius 0.6·1.75,
        // so the first qualifying grid node is taken
        let t = scalar_affine(-1.0, 0.25);
        let x = p(1.0);
        let r = t.residual(&x).unwrap();
        assert_eq!(r, 1.75);
        let u = gornicki_step(&t, &x, 0.5, 0.6).unwrap().unwrap();
        assert_eq!(u, p(0.0));
        assert!(t.residual(&u).unwrap() <= 0.5 * r);
        assert!(u.distance(&x).unwrap() <= 0.6 * r);
    }

    #[test]
    fn solve_gornicki_examples() {
        let cfg = IterationConfig::default().with_eps(1e-6);
        let trace = solve_gornicki(&halving(), p(8.0), 0.5, 1.0, &cfg).unwrap();
        assert!(trace.converged());
        let env = trace.envelope.as_ref().unwrap();
        for (n, (step, bound)) in trace.step_lengths().iter().zip(env).enumerate() {
            assert_eq!(*step, 4.0 * 0.5f64.powi(n as i32));
            assert_eq!(step, bound);
        }

        let trace = solve_gornicki(&halving(), p(0.0), 0.5, 1.0, &cfg).unwrap();
        assert_eq!(trace.iterates.len(), 1);
        assert!(trace.converged());

        let trace = solve_gornicki(&scalar_affine(1.0, 1.0), p(0.0), 0.1, 0.1, &cfg).unwrap();
        assert_eq!(trace.verdict, Verdict::DescentFailed);
        assert_eq!(trace.iterates.len(), 1);
        assert_eq!(trace.residuals, vec![1.0]);
    }

    #[test]
    fn endpoint_examples() {
        let cfg = IterationConfig::default().with_eps(1e-6);
        let descent = Descent::new(0.5, 1.0).unwrap();
        let by_delta = endpoint_iterate(&halving(), p(8.0), descent, &cfg).unwrap();
        let by_dist = solve_gornicki(&halving(), p(8.0), 0.5, 1.0, &cfg).unwrap();
        assert_eq!(by_delta.iterates, by_dist.iterates);

        let constant = scalar_affine(0.0, 1.5);
        let trace = endpoint_iterate(&constant, p(-3.0), descent, &cfg).unwrap();
        assert_eq!(trace.iterates, vec![p(-3.0), p(1.5)]);
        assert_eq!(trace.residuals[1], 0.0);

        let trace = endpoint_iterate(&split_halving(), p(8.0), descent, &cfg).unwrap();
        assert!(trace.converged());
        assert!(trace.last_point().norm() <= 1e-6);
        assert_eq!(split_halving().evaluate(&p(0.0)).unwrap(), set(&[0.0]));
    }

    #[test]
    fn csv_layout() {
        let cfg = IterationConfig::default().with_eps(1.0);
        let trace = solve_gornicki(&halving(), p(8.0), 0.5, 1.0, &cfg).unwrap();
        let csv = trace.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,x0,residual,envelope");
        assert_eq!(lines[1], "0,8.0,4.0,4.0");
        assert_eq!(lines.last().unwrap(), &"2,2.0,1.0,");
    }
}
