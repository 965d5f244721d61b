//! Success-probability families `P(Y)` and the complementarity strength `beta`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuccessFamily {
    /// `P(Y) = min(alpha Y, cap)`, used only on its linear branch.
    CappedLinear { alpha: f64, cap: f64 },
    /// `P(Y) = kappa (1 - exp(-lambda Y))`.
    Saturating { kappa: f64, lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessModel {
    family: SuccessFamily,
    beta: f64,
}

/// JSON form of a [`SuccessModel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    CappedLinear { alpha: f64, cap: f64, beta: f64 },
    Saturating { kappa: f64, lambda: f64, beta: f64 },
}

impl SuccessModel {
    pub fn new(family: SuccessFamily, beta: f64) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidModel(m.into()));
        if !(beta > 0.0 && beta.is_finite()) {
            return bad("beta must be positive");
        }
        match family {
            SuccessFamily::CappedLinear { alpha, cap } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad("alpha must be positive");
                }
                if !(cap > 0.0 && cap < 1.0) {
                    return bad("cap must lie in (0, 1)");
                }
            }
            SuccessFamily::Saturating { kappa, lambda } => {
                if !(kappa > 0.0 && kappa < 1.0) {
                    return bad("kappa must lie in (0, 1)");
                }
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return bad("lambda must be positive");
                }
            }
        }
        Ok(SuccessModel { family, beta })
    }

    /// `min(alpha Y, cap)` with the cap just below one.
    pub fn linear(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(
            SuccessFamily::CappedLinear {
                alpha,
                cap: 1.0 - 1e-12,
            },
            beta,
        )
    }

    pub fn saturating(kappa: f64, lambda: f64, beta: f64) -> Result<Self> {
        Self::new(SuccessFamily::Saturating { kappa, lambda }, beta)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ModelConfig = serde_json::from_str(text)?;
        Self::try_from(cfg)
    }

    pub fn family(&self) -> SuccessFamily {
        self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Same family with a different `beta`.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.family, beta)
    }

    /// `Some(alpha)` when `P'` is constant on the operative range.
    pub fn constant_slope(&self) -> Option<f64> {
        match self.family {
            SuccessFamily::CappedLinear { alpha, .. } => Some(alpha),
            SuccessFamily::Saturating { .. } => None,
        }
    }

    fn check(&self, y: f64) -> Result<()> {
        if y < 0.0 {
            return Err(Error::NegativePerformance(y));
        }
        if let SuccessFamily::CappedLinear { alpha, cap } = self.family {
            if alpha * y >= cap {
                return Err(Error::KinkReached(y));
            }
        }
        Ok(())
    }

    /// `P(y)`.
    pub fn eval(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        Ok(self.prob_unchecked(y))
    }

    /// `P'(y)`.
    pub fn deriv(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        Ok(match self.family {
            SuccessFamily::CappedLinear { alpha, .. } => alpha,
            SuccessFamily::Saturating { kappa, lambda } => kappa * lambda * (-lambda * y).exp(),
        })
    }

    /// `P''(y)`.
    pub fn second_deriv(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        Ok(match self.family {
            SuccessFamily::CappedLinear { .. } => 0.0,
            SuccessFamily::Saturating { kappa, lambda } => -kappa * lambda * lambda * (-lambda * y).exp(),
        })
    }

    /// The true success probability at any `y >= 0`, flat branch included.
    /// Used for payoff checks at off-equilibrium deviations.
    pub fn prob_unchecked(&self, y: f64) -> f64 {
        let y = y.max(0.0);
        match self.family {
            SuccessFamily::CappedLinear { alpha, cap } => (alpha * y).min(cap),
            SuccessFamily::Saturating { kappa, lambda } => -kappa * (-lambda * y).exp_m1(),
        }
    }
}

impl TryFrom<ModelConfig> for SuccessModel {
    type Error = Error;

    fn try_from(cfg: ModelConfig) -> Result<Self> {
        match cfg {
            ModelConfig::CappedLinear { alpha, cap, beta } => {
                Self::new(SuccessFamily::CappedLinear { alpha, cap }, beta)
            }
            ModelConfig::Saturating { kappa, lambda, beta } => {
                Self::new(SuccessFamily::Saturating { kappa, lambda }, beta)
            }
        }
    }
}

impl From<SuccessModel> for ModelConfig {
    fn from(m: SuccessModel) -> Self {
        match m.family {
            SuccessFamily::CappedLinear { alpha, cap } => ModelConfig::CappedLinear {
                alpha,
                cap,
                beta: m.beta,
            },
            SuccessFamily::Saturating { kappa, lambda } => ModelConfig::Saturating {
                kappa,
                lambda,
                beta: m.beta,
            },
        }
    }
}
