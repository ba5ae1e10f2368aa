//! Closed-form training-conditional bounds. Logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};

/// Miscoverage bounds at or above this level are flagged as nearly vacuous.
pub const NEAR_ONE: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Vacuity {
    Informative,
    /// An upper bound close enough to 1 to say little.
    VacuousNearOne,
    /// An upper bound of at least 1, or a lower bound of at most 0.
    Vacuous,
}

impl Vacuity {
    pub fn of_upper(bound: f64) -> Self {
        if bound >= 1.0 {
            Vacuity::Vacuous
        } else if bound >= NEAR_ONE {
            Vacuity::VacuousNearOne
        } else {
            Vacuity::Informative
        }
    }

    pub fn of_lower(floor: f64) -> Self {
        if floor <= 0.0 {
            Vacuity::Vacuous
        } else {
            Vacuity::Informative
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Vacuity::Informative => "",
            Vacuity::VacuousNearOne => "VACUOUS-NEAR-1",
            Vacuity::Vacuous => "VACUOUS",
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    Ok(())
}

fn check_count(name: &str, value: usize, min: usize) -> Result<()> {
    if value < min {
        return Err(Error::InvalidParameter(format!(
            "{name} must be at least {min}, got {value}"
        )));
    }
    Ok(())
}

/// Hoeffding slack `√(ln(1/δ)/(2n₁))` of split conformal.
pub fn split_correction(delta: f64, n1: usize) -> Result<f64> {
    check_delta(delta)?;
    check_count("n1", n1, 1)?;
    if delta > 0.5 {
        log::warn!(
            "delta = {delta} is outside (0, 0.5]; the split bound is only established there"
        );
    }
    Ok(((1.0 / delta).ln() / (2.0 * n1 as f64)).sqrt())
}

/// `α + √(ln(1/δ)/(2n₁))`: with probability `1 − δ` over the data, split
/// conformal miscovers at most this much.
pub fn split_pac_bound(alpha: f64, delta: f64, n1: usize) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(alpha + split_correction(delta, n1)?)
}

/// `2α + √(2 ln(K/δ)/m)` for CV+ with `K` folds of size `m`.
pub fn cvplus_pac_bound(alpha: f64, delta: f64, k: usize, m: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_delta(delta)?;
    check_count("K", k, 2)?;
    check_count("m", m, 1)?;
    Ok(2.0 * alpha + (2.0 * (k as f64 / delta).ln() / m as f64).sqrt())
}

/// `α − 6√(ln n / n)`, the miscoverage probability the adversaries can force
/// on full conformal and jackknife+. Not clamped; check [`Vacuity::of_lower`].
pub fn adversarial_floor(alpha: f64, n: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_count("n", n, 2)?;
    let nf = n as f64;
    Ok(alpha - 6.0 * (nf.ln() / nf).sqrt())
}

/// Level at which split conformal must be run to get the PAC guarantee at `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CorrectedAlpha {
    Feasible {
        alpha: f64,
        correction: f64,
    },
    /// The correction is at least `α`.
    Infeasible {
        correction: f64,
    },
}

impl CorrectedAlpha {
    pub fn value(self) -> Option<f64> {
        match self {
            CorrectedAlpha::Feasible { alpha, .. } => Some(alpha),
            CorrectedAlpha::Infeasible { .. } => None,
        }
    }
}

/// `α′ = α − √(ln(1/δ)/(2n₁))` when positive.
pub fn corrected_alpha_split(alpha: f64, delta: f64, n1: usize) -> Result<CorrectedAlpha> {
    check_alpha(alpha)?;
    let correction = split_correction(delta, n1)?;
    let corrected = alpha - correction;
    Ok(if corrected > 0.0 {
        CorrectedAlpha::Feasible {
            alpha: corrected,
            correction,
        }
    } else {
        CorrectedAlpha::Infeasible { correction }
    })
}
