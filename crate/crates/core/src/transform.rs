//! Averaged operators `T_λ x = {(1−λ)x + λu : u ∈ Tx}`, the enrichment shift
//! `x ↦ bx + Tx`, and the correspondence `λ = 1/(b+1)` between them.

use crate::error::{Error, Result};
use crate::mappings::MultiMap;

/// Tolerance for accepting a `(λ, b)` pair given together.
pub const LAMBDA_B_TOLERANCE: f64 = 1e-9;

/// The averaged map `T_λ`. It inherits the base map's sampling box.
///
/// `λ = 1` gives back `T` itself; `λ = 0` would freeze every iterate and is
/// rejected.
pub fn averaged(map: &MultiMap, lambda: f64) -> Result<MultiMap> {
    check_lambda(lambda)?;
    Ok(map.averaged_unchecked(lambda))
}

/// `λ = 1/(b+1)`.
pub fn lambda_from_enrichment(b: f64) -> Result<f64> {
    check_enrichment(b)?;
    Ok(1.0 / (b + 1.0))
}

/// `b = 1/λ − 1`, the inverse of [`lambda_from_enrichment`].
pub fn enrichment_from_lambda(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(1.0 / lambda - 1.0)
}

/// The shifted map `x ↦ bx + Tx`.
pub fn enriched_shift(map: &MultiMap, b: f64) -> Result<MultiMap> {
    check_enrichment(b)?;
    Ok(map.shifted_unchecked(b))
}

/// Reconciles an averaging parameter and an enrichment constant that may be
/// given separately or together. Returns `λ`; defaults to `λ = 1` when
/// neither is given.
pub fn resolve_lambda(lambda: Option<f64>, b: Option<f64>) -> Result<f64> {
    match (lambda, b) {
        (None, None) => Ok(1.0),
        (Some(l), None) => {
            check_lambda(l)?;
            Ok(l)
        }
        (None, Some(b)) => lambda_from_enrichment(b),
        (Some(l), Some(b)) => {
            check_lambda(l)?;
            let from_b = lambda_from_enrichment(b)?;
            if (l - from_b).abs() > LAMBDA_B_TOLERANCE {
                return Err(Error::invalid(format!(
                    "lambda = {l} is inconsistent with b = {b} (expected {from_b})"
                )));
            }
            Ok(l)
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("lambda must lie in (0, 1], got {lambda}")))
    }
}

fn check_enrichment(b: f64) -> Result<()> {
    if b >= 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("enrichment constant must be >= 0, got {b}")))
    }
}
