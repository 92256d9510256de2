//! Data dependence of fixed-point sets.
//!
//! Given a map `T` in one of the supported classes and a perturbation `S`
//! with `H(Tx, Sx) ≤ γ` on the grid, every fixed point `z*` of `S` should
//! lie within `λγ/(1−k)` of a fixed point of `T`. The check starts the
//! class iteration on `T` at each `z*` and measures how far it travels.

use serde::{Deserialize, Serialize};

use crate::certifier::{self, EnrichedClass, MappingClassReport};
use crate::error::{Error, Result};
use crate::geometry::{check_dims, hausdorff, FiniteSet, Point};
use crate::mappings::{fixed_point_set, MultiMap};
use crate::solver::{self, Descent, IterationConfig, IterationTrace};

/// Relative slack on the bound comparison.
pub const BOUND_TOLERANCE: f64 = 1e-6;
/// Relative slack on per-step contraction checks.
pub const STEP_TOLERANCE: f64 = 1e-9;
/// Fixed-point sets are refined to this resolution by default.
pub const DEFAULT_FIXED_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataDepClass {
    EnrichedKannan,
    EnrichedChatterjea,
    EnrichedCrr,
    Gornicki,
}

impl std::str::FromStr for DataDepClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::invalid(format!("unknown class `{s}`")))
    }
}

/// Class constants for `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClassConstants {
    /// `H(bx+Tx, by+Ty) ≤ θ[d(x,Tx) + d(y,Ty)]`
    EnrichedKannan { b: f64, theta: f64 },
    /// `H(bx+Tx, by+Ty) ≤ θ[d((b+1)x, by+Ty) + d((b+1)y, bx+Tx)]`
    EnrichedChatterjea { b: f64, theta: f64 },
    /// `H(cx+Tx, cy+Ty) ≤ a·d(x,y) + b[d(x,Tx) + d(y,Ty)]`
    EnrichedCrr { a: f64, b: f64, c: f64 },
    /// `H(Tx,Ty) ≤ M[d(x,Tx) + d(y,Ty) + d(x,y)]` with descent constants
    /// `(a, b)`.
    Gornicki { m: f64, a: f64, b: f64 },
}

impl ClassConstants {
    pub fn class(&self) -> DataDepClass {
        match self {
            ClassConstants::EnrichedKannan { .. } => DataDepClass::EnrichedKannan,
            ClassConstants::EnrichedChatterjea { .. } => DataDepClass::EnrichedChatterjea,
            ClassConstants::EnrichedCrr { .. } => DataDepClass::EnrichedCrr,
            ClassConstants::Gornicki { .. } => DataDepClass::Gornicki,
        }
    }

    /// Averaging parameter of the iteration the bound is built on:
    /// `1/(b+1)` (`1/(c+1)` for CRR), and 1 for Górnicki maps, which are
    /// iterated directly.
    pub fn lambda(&self) -> Result<f64> {
        let enrichment = match *self {
            ClassConstants::EnrichedKannan { b, .. } | ClassConstants::EnrichedChatterjea { b, .. } => b,
            ClassConstants::EnrichedCrr { c, .. } => c,
            ClassConstants::Gornicki { .. } => 0.0,
        };
        crate::transform::lambda_from_enrichment(enrichment)
    }

    /// Per-step constant of the iteration: `θ/(1−θ)` for Kannan and
    /// Chatterjea, `(a+b)/(1−b)` for CRR, `2M/(1−M)` for Górnicki.
    pub fn k(&self) -> Result<f64> {
        self.validate()?;
        let k = match *self {
            ClassConstants::EnrichedKannan { theta, .. }
            | ClassConstants::EnrichedChatterjea { theta, .. } => certifier::kannan_k(theta),
            ClassConstants::EnrichedCrr { a, b, .. } => certifier::crr_delta(a, b),
            ClassConstants::Gornicki { m, .. } => certifier::gornicki_k(m),
        };
        match k {
            Some(k) if k < 1.0 => Ok(k),
            Some(k) => Err(Error::BoundInapplicable(format!("k = {k} is not below 1"))),
            None => Err(Error::BoundInapplicable("k is undefined for these constants".into())),
        }
    }

    /// `θ/(1−θ)` with the class's leading constant, as written in the bound's
    /// statement. Differs from [`ClassConstants::k`] for CRR and Górnicki.
    pub fn k_stated(&self) -> Option<f64> {
        match *self {
            ClassConstants::EnrichedKannan { theta, .. }
            | ClassConstants::EnrichedChatterjea { theta, .. } => certifier::kannan_k(theta),
            ClassConstants::EnrichedCrr { .. } => None,
            ClassConstants::Gornicki { m, .. } => certifier::kannan_k(m),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        match *self {
            ClassConstants::EnrichedKannan { b, theta } | ClassConstants::EnrichedChatterjea { b, theta } => {
                nonneg("b", b)?;
                nonneg("theta", theta)?;
                if theta >= 0.5 {
                    return Err(Error::BoundInapplicable(format!("theta = {theta} is outside [0, 1/2)")));
                }
            }
            ClassConstants::EnrichedCrr { a, b, c } => {
                nonneg("a", a)?;
                nonneg("b", b)?;
                nonneg("c", c)?;
                if a + 2.0 * b >= 1.0 {
                    return Err(Error::BoundInapplicable(format!("a + 2b = {} is not below 1", a + 2.0 * b)));
                }
            }
            ClassConstants::Gornicki { m, a, b } => {
                nonneg("m", m)?;
                Descent::new(a, b)?;
                if m >= 1.0 / 3.0 {
                    return Err(Error::GornickiPrecondition(m));
                }
            }
        }
        Ok(())
    }

    /// Reads the constants for `class` off a certification report.
    pub fn from_report(report: &MappingClassReport, class: DataDepClass) -> Result<Self> {
        let theta_of = |class: EnrichedClass| -> Result<(f64, f64)> {
            let est = report.enriched(class);
            let theta = est
                .estimate
                .ratio()
                .map(|r| r.constant)
                .ok_or_else(|| Error::invalid("ratio estimate expected"))?;
            Ok((est.b, theta))
        };
        Ok(match class {
            DataDepClass::EnrichedKannan => {
                let (b, theta) = theta_of(EnrichedClass::Kannan)?;
                ClassConstants::EnrichedKannan { b, theta }
            }
            DataDepClass::EnrichedChatterjea => {
                let (b, theta) = theta_of(EnrichedClass::Chatterjea)?;
                ClassConstants::EnrichedChatterjea { b, theta }
            }
            DataDepClass::EnrichedCrr => {
                let est = &report.enriched_crr;
                let crr = est.estimate.crr().ok_or_else(|| Error::invalid("CRR estimate expected"))?;
                match (crr.a, crr.b) {
                    (Some(a), Some(b)) => ClassConstants::EnrichedCrr { a, b, c: est.b },
                    _ => {
                        return Err(Error::BoundInapplicable(
                            "no enriched CRR constants fit the sample".into(),
                        ))
                    }
                }
            }
            DataDepClass::Gornicki => {
                let g = &report.gornicki;
                let d = g.descent.ok_or_else(|| {
                    Error::BoundInapplicable("Górnicki descent clause not certified".into())
                })?;
                ClassConstants::Gornicki { m: g.m.constant, a: d.a, b: d.b }
            }
        })
    }
}

/// `max` over grid nodes of `H(Tx, Sx)`.
pub fn gamma_bound(t: &MultiMap, s: &MultiMap) -> Result<f64> {
    check_dims(t.dim(), s.dim())?;
    if t.domain() != s.domain() {
        return Err(Error::invalid("mappings are sampled on different domains"));
    }
    let mut gamma = 0.0_f64;
    for x in t.domain().nodes() {
        gamma = gamma.max(hausdorff(&t.evaluate(&x)?, &s.evaluate(&x)?)?);
    }
    Ok(gamma)
}

/// `H(F(S), F(T))` with both sets enumerated at resolution `eps`.
pub fn fixed_set_hausdorff(t: &MultiMap, s: &MultiMap, eps: f64) -> Result<f64> {
    let ft = fixed_point_set(t, eps)?.ok_or(Error::EmptyFixedPointSet("T"))?;
    let fs = fixed_point_set(s, eps)?.ok_or(Error::EmptyFixedPointSet("S"))?;
    hausdorff(&fs, &ft)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataDepConfig {
    pub iteration: IterationConfig,
    /// Resolution of the fixed-point set enumeration; the bound check allows
    /// an extra `2·fixed_eps` for discretization.
    pub fixed_eps: f64,
    /// When set, `H(F(S), F(T))` is also compared with the bound.
    pub perturbed_in_class: bool,
}

impl Default for DataDepConfig {
    fn default() -> Self {
        DataDepConfig {
            iteration: IterationConfig::default().with_eps(1e-10),
            fixed_eps: DEFAULT_FIXED_EPS,
            perturbed_in_class: false,
        }
    }
}

/// One run of the class iteration on `T` started at a fixed point of `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRun {
    pub start: Point,
    pub limit: Point,
    pub distance: f64,
    pub trace: IterationTrace,
}

/// Largest observed per-step ratio against the class constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepCheck {
    pub constant: f64,
    pub max_ratio: f64,
    pub steps_checked: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataDependenceReport {
    pub class: DataDepClass,
    pub constants: ClassConstants,
    pub gamma: f64,
    pub lambda: f64,
    pub k: f64,
    pub k_stated: Option<f64>,
    /// `λγ/(1−k)`
    pub bound: f64,
    pub allowance: f64,
    /// `sup_{z*∈F(S)} ‖z* − z‖` over the iteration limits `z`.
    pub observed_sup: f64,
    /// `sup_{z*∈F(S)} d(z*, F(T))` against the enumerated `F(T)`.
    pub observed_enumerated: Option<f64>,
    /// `H(F(S), F(T))`.
    pub symmetric_observed: Option<f64>,
    pub symmetric_holds: Option<bool>,
    pub all_converged: bool,
    pub holds: bool,
    /// `bound·(1+tol) + allowance − observed_sup`
    pub slack: f64,
    pub fixed_points_s: FiniteSet,
    pub fixed_points_t: Option<FiniteSet>,
    pub step_check: StepCheck,
    pub runs: Vec<StartRun>,
}

/// Measures `γ`, enumerates `F(S)`, runs the class iteration on `T` from each
/// of its points, and compares the distance travelled with `λγ/(1−k)`.
pub fn verify_data_dependence(
    t: &MultiMap,
    s: &MultiMap,
    constants: ClassConstants,
    cfg: &DataDepConfig,
) -> Result<DataDependenceReport> {
    cfg.iteration.validate()?;
    let k = constants.k()?;
    let lambda = constants.lambda()?;
    let gamma = gamma_bound(t, s)?;
    let fs = fixed_point_set(s, cfg.fixed_eps)?.ok_or(Error::EmptyFixedPointSet("S"))?;

    let mut runs = Vec::with_capacity(fs.len());
    for z_star in fs.iter() {
        let trace = match constants {
            ClassConstants::Gornicki { a, b, .. } => {
                solver::solve_gornicki(t, z_star.clone(), a, b, &cfg.iteration)?
            }
            _ => solver::krasnoselskii_iterate(t, lambda, z_star.clone(), &cfg.iteration)?,
        };
        let limit = trace.last_point().clone();
        let distance = z_star.distance(&limit)?;
        runs.push(StartRun { start: z_star.clone(), limit, distance, trace });
    }

    let step_check = check_steps(t, &constants, lambda, k, cfg.iteration.mu, &runs);
    let observed_sup = runs.iter().map(|r| r.distance).fold(0.0, f64::max);
    let all_converged = runs.iter().all(|r| r.trace.converged());
    let bound = lambda * gamma / (1.0 - k);
    let allowance = 2.0 * cfg.fixed_eps;
    let threshold = bound * (1.0 + BOUND_TOLERANCE) + allowance;

    let ft = fixed_point_set(t, cfg.fixed_eps)?;
    let observed_enumerated = ft.as_ref().map(|ft| {
        fs.iter().map(|z| crate::geometry::point_set_distance_unchecked(z, ft)).fold(0.0, f64::max)
    });
    let symmetric_observed = match &ft {
        Some(ft) if cfg.perturbed_in_class => Some(hausdorff(&fs, ft)?),
        _ => None,
    };

    Ok(DataDependenceReport {
        class: constants.class(),
        constants,
        gamma,
        lambda,
        k,
        k_stated: constants.k_stated(),
        bound,
        allowance,
        observed_sup,
        observed_enumerated,
        symmetric_observed,
        symmetric_holds: symmetric_observed.map(|h| h <= threshold),
        all_converged,
        holds: all_converged && observed_sup <= threshold,
        slack: threshold - observed_sup,
        fixed_points_s: fs,
        fixed_points_t: ft,
        step_check,
        runs,
    })
}

/// Enriched classes: `d(x_{n+1}, T_λx_{n+1}) ≤ kμ·d(x_n, T_λx_n)`.
/// Górnicki: `d(u, Tu) ≤ (2M/(1−M))·‖x − u‖` for steps with `u ∈ Tx`.
fn check_steps(
    t: &MultiMap,
    constants: &ClassConstants,
    lambda: f64,
    k: f64,
    mu: f64,
    runs: &[StartRun],
) -> StepCheck {
    let gornicki = matches!(constants, ClassConstants::Gornicki { .. });
    let constant = if gornicki { k } else { k * mu };
    let mut max_ratio = 0.0_f64;
    let mut steps_checked = 0;
    let mut holds = true;
    for run in runs {
        let tr = &run.trace;
        for n in 0..tr.steps() {
            let Some(&r_next) = tr.residuals.get(n + 1) else { break };
            let (lhs, rhs) = if gornicki {
                let (x, u) = (&tr.iterates[n], &tr.iterates[n + 1]);
                if !t.evaluate(x).is_ok_and(|img| img.contains(u)) {
                    continue;
                }
                (r_next, x.distance_unchecked(u))
            } else {
                (lambda * r_next, lambda * tr.residuals[n])
            };
            steps_checked += 1;
            if lhs > constant * rhs * (1.0 + STEP_TOLERANCE) {
                holds = false;
            }
            if rhs > 0.0 {
                max_ratio = max_ratio.max(lhs / rhs);
            }
        }
    }
    StepCheck { constant, max_ratio, steps_checked, holds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mappings::builtins::*;

    fn v(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let t = planar_rotation();
        assert_eq!(gamma_bound(&t, &t).unwrap(), 0.0);

        let s = t.translated(v(&[0.06, 0.08])).unwrap();
        assert!((gamma_bound(&t, &s).unwrap() - 0.1).abs() < 1e-15);

        let domain = crate::mappings::Domain::cube(1, -1.0, 1.0, 41).unwrap();
        let t = halving().with_domain(domain.clone()).unwrap();
        let s = MultiMap::affine(
            vec![
                crate::mappings::AffineBranch::scalar(0.5, 0.0),
                crate::mappings::AffineBranch::scalar(0.5, 0.2),
            ],
            domain,
        )
        .unwrap();
        assert!((gamma_bound(&t, &s).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn gamma_rejects_mismatched_domains() {
        assert!(gamma_bound(&halving(), &planar_rotation()).is_err());
        let other = halving().with_domain(crate::mappings::Domain::cube(1, -1.0, 1.0, 41).unwrap()).unwrap();
        assert!(gamma_bound(&halving(), &other).is_err());
    }

    #[test]
    fn bound_arithmetic() {
        let c = ClassConstants::EnrichedKannan { b: 1.0, theta: 1.0 / 3.0 };
        assert_eq!(c.lambda().unwrap(), 0.5);
        let k = c.k().unwrap();
        assert!((k - 0.5).abs() < 1e-15);
        assert!((0.5 * 0.1 / (1.0 - k) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn inapplicable_constants_are_rejected() {
        let err = ClassConstants::EnrichedKannan { b: 1.0, theta: 0.5 }.k().unwrap_err();
        assert!(err.to_string().contains("bound inapplicable"));
        let err = ClassConstants::EnrichedCrr { a: 0.5, b: 0.3, c: 0.0 }.k().unwrap_err();
        assert!(matches!(err, Error::BoundInapplicable(_)));
        let err = ClassConstants::Gornicki { m: 0.34, a: 0.5, b: 1.0 }.k().unwrap_err();
        assert!(matches!(err, Error::GornickiPrecondition(_)));
        assert!(ClassConstants::Gornicki { m: 0.2, a: 1.0, b: 1.0 }.k().is_err());
    }

    #[test]
    fn unperturbed_map_has_zero_bound() {
        let t = planar_reflection([0.3, -0.15]);
        let c = ClassConstants::EnrichedKannan { b: 1.0, theta: 1.0 / 3.0 };
        let report = verify_data_dependence(&t, &t, c, &DataDepConfig::default()).unwrap();
        assert_eq!(report.gamma, 0.0);
        assert_eq!(report.bound, 0.0);
        assert!(report.observed_sup <= 1e-6);
        assert!(report.holds);
    }

    #[test]
    fn translated_negation_stays_within_bound() {
        let t = negation();
        let s = t.translated(v(&[0.05])).unwrap();
        let c = ClassConstants::EnrichedKannan { b: 1.0, theta: 0.0 };
        let report = verify_data_dependence(&t, &s, c, &DataDepConfig::default()).unwrap();
        assert!((report.gamma - 0.05).abs() < 1e-15);
        assert!((report.bound - 0.025).abs() < 1e-15);
        // F(S) = {0.025}, F(T) = {0}: the bound is attained
        assert!((report.observed_sup - 0.025).abs() <= 2e-6);
        assert!(report.holds, "{report:?}");
    }

    #[test]
    fn empty_fixed_set_of_perturbation_is_an_error() {
        let t = halving();
        let s = scalar_affine(1.0, 1.0);
        let c = ClassConstants::EnrichedKannan { b: 0.0, theta: 0.3 };
        let err = verify_data_dependence(&t, &s, c, &DataDepConfig::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyFixedPointSet("S")));
    }

    #[test]
    fn fixed_set_hausdorff_examples() {
        let t = planar_rotation();
        assert_eq!(fixed_set_hausdorff(&t, &t, 1e-6).unwrap(), 0.0);

        let t = scalar_affine(0.5, 0.0);
        let s = scalar_affine(0.5, 0.025);
        let h = fixed_set_hausdorff(&t, &s, 1e-6).unwrap();
        assert!((h - 0.05).abs() <= 2e-6);

        let none = scalar_affine(1.0, 1.0);
        assert!(matches!(fixed_set_hausdorff(&none, &t, 1e-6), Err(Error::EmptyFixedPointSet("T"))));
        assert!(matches!(fixed_set_hausdorff(&t, &none, 1e-6), Err(Error::EmptyFixedPointSet("S"))));
    }

    #[test]
    fn class_names_parse() {
        assert_eq!("enriched-kannan".parse::<DataDepClass>().unwrap(), DataDepClass::EnrichedKannan);
        assert_eq!("gornicki".parse::<DataDepClass>().unwrap(), DataDepClass::Gornicki);
        assert!("banach".parse::<DataDepClass>().is_err());
        let c: ClassConstants =
            serde_json::from_str(r#"{"class":"enriched-crr","a":0.2,"b":0.1,"c":0.5}"#).unwrap();
        assert_eq!(c, ClassConstants::EnrichedCrr { a: 0.2, b: 0.1, c: 0.5 });
    }
}
