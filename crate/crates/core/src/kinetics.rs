//! Rate coefficients from equilibrium constants.
//!
//! An equilibrium constant only fixes the ratio `K = kf / kb`. The absolute
//! speed is set by a correction coefficient `c`, giving `kf = K * c` and
//! `kb = c`; scaling `c` changes how fast a reaction settles but not where.

use thiserror::Error;

use crate::dsl::{Reaction, MAX_CORRECTION};

/// Relative disagreement between a declared and an implied equilibrium
/// constant above which a mismatch is reported.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantKind {
    /// Dissociation constant `[X]^a [Y]^b / [XaYb]`.
    Kd,
    /// Solubility product `[X]^a [Y]^b` of a dissolving solid.
    Ksp,
    /// Acid dissociation constant.
    Ka,
    /// Water autoionization.
    Kw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumConstant {
    value: f64,
    kind: ConstantKind,
}

impl EquilibriumConstant {
    pub fn new(value: f64, kind: ConstantKind) -> Result<Self, KineticsError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(KineticsError::NonPositiveConstant(value));
        }
        Ok(Self { value, kind })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn kind(&self) -> ConstantKind {
        self.kind
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KineticsError {
    #[error("equilibrium constant must be positive, got {0}")]
    NonPositiveConstant(f64),
    #[error("correction coefficient must lie in (0, {MAX_CORRECTION}], got {0}")]
    CorrectionOutOfRange(f64),
    #[error("molar solubility must be positive, got {0}")]
    NonPositiveSolubility(f64),
    #[error("ion count must be at least 1")]
    ZeroIonCount,
    #[error("forward coefficient must be non-negative, got {0}")]
    NegativeRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IonRole {
    Cation,
    Anion,
}

/// Solubility product of a salt with molar solubility `s` (mol/L): every ion
/// with count `n` contributes `(n * s)^n`.
pub fn ksp_from_solubility(
    ions: &[(IonRole, u32)],
    solubility: f64,
) -> Result<EquilibriumConstant, KineticsError> {
    if !(solubility.is_finite() && solubility > 0.0) {
        return Err(KineticsError::NonPositiveSolubility(solubility));
    }
    let mut product = 1.0;
    for &(_, count) in ions {
        if count == 0 {
            return Err(KineticsError::ZeroIonCount);
        }
        product *= (count as f64 * solubility).powi(count as i32);
    }
    EquilibriumConstant::new(product, ConstantKind::Ksp)
}

/// `(kf, kb) = (K * c, c)`.
pub fn rate_pair_from_k(k: EquilibriumConstant, correction: f64) -> Result<(f64, f64), KineticsError> {
    if !(correction > 0.0 && correction <= MAX_CORRECTION) {
        return Err(KineticsError::CorrectionOutOfRange(correction));
    }
    Ok((k.value * correction, correction))
}

/// Rate pair of an irreversible process such as salt dissolution into a
/// dilute solution.
pub fn irreversible_rate(kf: f64) -> Result<(f64, f64), KineticsError> {
    if !(kf >= 0.0 && kf.is_finite()) {
        return Err(KineticsError::NegativeRate(kf));
    }
    Ok((kf, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateConsistency {
    Irreversible,
    Reversible {
        implied_k: f64,
        declared_k: Option<f64>,
        /// `|implied - declared| / declared`, when a constant was declared.
        relative_error: Option<f64>,
        mismatch: bool,
    },
}

impl RateConsistency {
    pub fn implied_k(&self) -> Option<f64> {
        match *self {
            RateConsistency::Irreversible => None,
            RateConsistency::Reversible { implied_k, .. } => Some(implied_k),
        }
    }

    pub fn is_mismatch(&self) -> bool {
        matches!(self, RateConsistency::Reversible { mismatch: true, .. })
    }
}

/// Compare the equilibrium constant implied by a reaction's rate pair with the
/// one it declares (the derived `K`, or a `Kref` annotation).
pub fn check_rate_consistency(reaction: &Reaction) -> RateConsistency {
    let kb = reaction.kb();
    if kb == 0.0 {
        return RateConsistency::Irreversible;
    }
    let implied_k = reaction.kf() / kb;
    let declared_k = match reaction.rate {
        crate::dsl::RateSpec::Derived { k, .. } => Some(k),
        crate::dsl::RateSpec::Explicit { .. } => reaction.reference_k,
    };
    let relative_error = declared_k.map(|d| (implied_k - d).abs() / d.abs());
    RateConsistency::Reversible {
        implied_k,
        declared_k,
        relative_error,
        mismatch: relative_error.is_some_and(|e| e > CONSISTENCY_TOLERANCE),
    }
}
