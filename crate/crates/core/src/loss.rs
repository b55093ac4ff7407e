//! Margin losses used as surrogates for the zero-one loss.
//!
//! Every loss is a function of the margin `z = y * g(x)` (or of a score
//! difference `g(x) - g(x')` for pairwise objectives). A loss is *symmetric*
//! when `l(z) + l(-z)` is the same constant `K` for every `z`; those are the
//! losses whose corrupted-label risk is an affine function of the clean risk.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Largest exponent handed to `exp`; keeps `exp` finite in double precision.
const EXP_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    ZeroOne,
    Squared,
    Hinge,
    SquaredHinge,
    Exponential,
    Logistic,
    Savage,
    Tangent,
    Ramp,
    Sigmoid,
    Unhinged,
}

/// Whether minimizing the pairwise surrogate risk is known to maximize AUC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AucConsistency {
    Yes,
    No,
    Unknown,
}

/// A loss together with the properties the rest of the crate relies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub name: String,
    pub kind: LossKind,
    /// `Some(K)` iff `l(z) + l(-z) = K` for all `z`.
    pub symmetry_constant: Option<f64>,
    pub convex: bool,
    pub classification_calibrated: bool,
    pub auc_consistent: AucConsistency,
}

impl LossKind {
    pub const ALL: [LossKind; 11] = [
        LossKind::ZeroOne,
        LossKind::Squared,
        LossKind::Hinge,
        LossKind::SquaredHinge,
        LossKind::Exponential,
        LossKind::Logistic,
        LossKind::Savage,
        LossKind::Tangent,
        LossKind::Ramp,
        LossKind::Sigmoid,
        LossKind::Unhinged,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::ZeroOne => "zero_one",
            LossKind::Squared => "squared",
            LossKind::Hinge => "hinge",
            LossKind::SquaredHinge => "squared_hinge",
            LossKind::Exponential => "exponential",
            LossKind::Logistic => "logistic",
            LossKind::Savage => "savage",
            LossKind::Tangent => "tangent",
            LossKind::Ramp => "ramp",
            LossKind::Sigmoid => "sigmoid",
            LossKind::Unhinged => "unhinged",
        }
    }

    pub fn symmetry_constant(self) -> Option<f64> {
        match self {
            LossKind::ZeroOne | LossKind::Ramp | LossKind::Sigmoid => Some(1.0),
            LossKind::Unhinged => Some(2.0),
            _ => None,
        }
    }

    pub fn is_symmetric(self) -> bool {
        self.symmetry_constant().is_some()
    }

    pub fn is_convex(self) -> bool {
        matches!(
            self,
            LossKind::Squared
                | LossKind::Hinge
                | LossKind::SquaredHinge
                | LossKind::Exponential
                | LossKind::Logistic
                | LossKind::Unhinged
        )
    }

    pub fn auc_consistent(self) -> AucConsistency {
        match self {
            LossKind::Sigmoid | LossKind::Ramp => AucConsistency::Yes,
            LossKind::Hinge => AucConsistency::No,
            _ => AucConsistency::Unknown,
        }
    }

    pub fn is_differentiable(self) -> bool {
        self != LossKind::ZeroOne
    }

    /// Points where the derivative jumps; gradients there are right-hand.
    pub fn kinks(self) -> &'static [f64] {
        match self {
            LossKind::ZeroOne => &[0.0],
            LossKind::Hinge => &[1.0],
            LossKind::Ramp => &[-1.0, 1.0],
            _ => &[],
        }
    }

    pub fn spec(self) -> LossSpec {
        LossSpec {
            name: self.name().to_string(),
            kind: self,
            symmetry_constant: self.symmetry_constant(),
            convex: self.is_convex(),
            classification_calibrated: true,
            auc_consistent: self.auc_consistent(),
        }
    }

    /// Loss value without argument checks. Callers guarantee `z` is finite.
    #[inline]
    pub fn value(self, z: f64) -> f64 {
        match self {
            LossKind::ZeroOne => {
                if z > 0.0 {
                    0.0
                } else if z < 0.0 {
                    1.0
                } else {
                    0.5
                }
            }
            LossKind::Squared => (1.0 - z) * (1.0 - z),
            LossKind::Hinge => (1.0 - z).max(0.0),
            LossKind::SquaredHinge => {
                let m = (1.0 - z).max(0.0);
                m * m
            }
            LossKind::Exponential => (-z).min(EXP_CLAMP).exp(),
            LossKind::Logistic => (-z).max(0.0) + (-z.abs()).exp().ln_1p(),
            LossKind::Savage => {
                let s = sigmoid(-2.0 * z);
                s * s
            }
            LossKind::Tangent => {
                let t = 2.0 * z.atan() - 1.0;
                t * t
            }
            LossKind::Ramp => ((1.0 - z) / 2.0).clamp(0.0, 1.0),
            LossKind::Sigmoid => sigmoid(-z),
            LossKind::Unhinged => 1.0 - z,
        }
    }

    /// Derivative `dl/dz` without argument checks. Zero-one returns 0; use
    /// [`eval_grad`] when the caller must be told that is meaningless.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            LossKind::ZeroOne => 0.0,
            LossKind::Squared => -2.0 * (1.0 - z),
            LossKind::Hinge => {
                if z < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            LossKind::SquaredHinge => -2.0 * (1.0 - z).max(0.0),
            LossKind::Exponential => -(-z).min(EXP_CLAMP).exp(),
            LossKind::Logistic => -sigmoid(-z),
            LossKind::Savage => {
                let s = sigmoid(-2.0 * z);
                -4.0 * s * s * (1.0 - s)
            }
            LossKind::Tangent => {
                let t = 2.0 * z.atan() - 1.0;
                4.0 * t / (1.0 + z * z)
            }
            LossKind::Ramp => {
                if (-1.0..1.0).contains(&z) {
                    -0.5
                } else {
                    0.0
                }
            }
            LossKind::Sigmoid => {
                let s = sigmoid(-z);
                -s * (1.0 - s)
            }
            LossKind::Unhinged => -1.0,
        }
    }

    /// `l(z) + l(-z)`.
    #[inline]
    pub fn gamma(self, z: f64) -> f64 {
        self.value(z) + self.value(-z)
    }
}

/// Numerically stable logistic function `1 / (1 + exp(-t))`.
#[inline]
pub(crate) fn sigmoid(t: f64) -> f64 {
    let t = t.clamp(-EXP_CLAMP, EXP_CLAMP);
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown loss `{s}`")))
    }
}

impl From<LossKind> for LossSpec {
    fn from(kind: LossKind) -> Self {
        kind.spec()
    }
}

impl LossSpec {
    pub fn is_symmetric(&self) -> bool {
        self.symmetry_constant.is_some()
    }
}

/// Evaluate `l(z)`.
pub fn eval_loss(loss: &LossSpec, z: f64) -> Result<f64> {
    ensure_finite(z, "margin")?;
    Ok(loss.kind.value(z))
}

/// Evaluate `dl/dz`. The zero-one loss has no useful derivative and is refused.
pub fn eval_grad(loss: &LossSpec, z: f64) -> Result<f64> {
    ensure_finite(z, "margin")?;
    if !loss.kind.is_differentiable() {
        return Err(Error::Unsupported(format!(
            "`{}` has no gradient; pick a differentiable surrogate",
            loss.name
        )));
    }
    Ok(loss.kind.derivative(z))
}

/// `gamma(z) = l(z) + l(-z)`, the quantity that must be constant for symmetry.
pub fn symmetry_gap(loss: &LossSpec, z: f64) -> Result<f64> {
    ensure_finite(z, "margin")?;
    Ok(loss.kind.gamma(z))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    /// `gamma(0)`; equals `K` when the loss is symmetric.
    pub reference: f64,
    pub max_deviation: f64,
    pub argmax: f64,
}

/// Test `gamma(z) == gamma(0)` across `grid` up to `tol`.
pub fn check_symmetry(loss: &LossSpec, grid: &[f64], tol: f64) -> Result<SymmetryCheck> {
    if grid.is_empty() {
        return Err(Error::invalid("symmetry grid is empty"));
    }
    let reference = loss.kind.gamma(0.0);
    let mut max_deviation = 0.0;
    let mut argmax = grid[0];
    for &z in grid {
        let dev = (symmetry_gap(loss, z)? - reference).abs();
        if dev > max_deviation {
            max_deviation = dev;
            argmax = z;
        }
    }
    Ok(SymmetryCheck {
        symmetric: max_deviation <= tol,
        reference,
        max_deviation,
        argmax,
    })
}
