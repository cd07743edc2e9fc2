//! Prospect-theory and regret-aversion valuation and choice probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prospects::{Outcome, Prospect};

/// Lower/upper bound shared by every positive parameter.
pub const PARAM_LO: f64 = 0.01;
pub const PARAM_HI: f64 = 1000.0;

/// Interior clamp for the weighting function.
const WEIGHT_EPS: f64 = 1e-12;

/// Choice probabilities are kept strictly inside (0, 1).
const PROB_EPS: f64 = f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtParams {
    pub sigma: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub beta: f64,
}

impl PtParams {
    pub fn new(sigma: f64, lambda: f64, gamma: f64, beta: f64) -> Result<Self> {
        let p = Self {
            sigma,
            lambda,
            gamma,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Expected-value maximiser with decisiveness `beta`.
    pub fn risk_neutral(beta: f64) -> Self {
        Self {
            sigma: 1.0,
            lambda: 1.0,
            gamma: 1.0,
            beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check("sigma", self.sigma, PARAM_LO, PARAM_HI)?;
        check("lambda", self.lambda, PARAM_LO, PARAM_HI)?;
        check("gamma", self.gamma, PARAM_LO, PARAM_HI)?;
        check("beta", self.beta, PARAM_LO, PARAM_HI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegretParams {
    pub lambda_reg: f64,
    pub kappa: f64,
    pub alpha: f64,
}

impl RegretParams {
    pub fn new(lambda_reg: f64, kappa: f64, alpha: f64) -> Result<Self> {
        let p = Self {
            lambda_reg,
            kappa,
            alpha,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check("lambda_reg", self.lambda_reg, PARAM_LO, PARAM_HI)?;
        check("kappa", self.kappa, 0.0, PARAM_HI)?;
        check("alpha", self.alpha, 0.0, PARAM_HI)
    }
}

fn check(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_finite() && (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfBounds {
            name,
            value,
            lo,
            hi,
        })
    }
}

/// Reference-dependent value: `x^σ` for gains, `-λ(-x)^σ` for losses.
pub fn value(x: f64, sigma: f64, lambda: f64) -> f64 {
    if x > 0.0 {
        x.powf(sigma)
    } else if x < 0.0 {
        -lambda * (-x).powf(sigma)
    } else {
        0.0
    }
}

/// Inverse-S probability weighting.
pub fn weight(p: f64, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(weight_unchecked(p, gamma))
}

pub(crate) fn weight_unchecked(p: f64, gamma: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let p = p.clamp(WEIGHT_EPS, 1.0 - WEIGHT_EPS);
    let pg = p.powf(gamma);
    let qg = (1.0 - p).powf(gamma);
    pg / (pg + qg).powf(1.0 / gamma)
}

/// Logistic function evaluated without overflow, kept inside (0, 1).
pub fn sigmoid(z: f64) -> f64 {
    if z == 0.0 {
        return 0.5;
    }
    let s = if z > 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    s.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// A prospect with at most two distinct outcomes, arranged so the
/// prospect-utility case rule applies directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Canonical {
    Certain(f64),
    /// Both outcomes on the same side of zero (or one of them zero);
    /// `extreme` has the larger magnitude.
    SameSign {
        extreme: f64,
        p_extreme: f64,
        other: f64,
    },
    Mixed {
        loss: f64,
        p_loss: f64,
        gain: f64,
        p_gain: f64,
    },
}

impl Canonical {
    pub fn from_prospect(p: &Prospect) -> Result<Self> {
        let support: Vec<Outcome> = p
            .support()
            .into_iter()
            .filter(|o| o.probability > 0.0)
            .collect();
        match support.as_slice() {
            [] => Err(Error::InvalidProspect("no outcome with positive probability".into())),
            [only] => Ok(Canonical::Certain(only.payoff)),
            [lo, hi] => {
                if lo.payoff < 0.0 && hi.payoff > 0.0 {
                    Ok(Canonical::Mixed {
                        loss: lo.payoff,
                        p_loss: lo.probability,
                        gain: hi.payoff,
                        p_gain: hi.probability,
                    })
                } else {
                    let (ext, oth) = if lo.payoff.abs() >= hi.payoff.abs() {
                        (lo, hi)
                    } else {
                        (hi, lo)
                    };
                    Ok(Canonical::SameSign {
                        extreme: ext.payoff,
                        p_extreme: ext.probability,
                        other: oth.payoff,
                    })
                }
            }
            more => Err(Error::TooManyOutcomes(more.len())),
        }
    }

    pub fn utility(&self, sigma: f64, lambda: f64, gamma: f64) -> f64 {
        match *self {
            Canonical::Certain(x) => value(x, sigma, lambda),
            Canonical::SameSign {
                extreme,
                p_extreme,
                other,
            } => {
                let vy = value(other, sigma, lambda);
                vy + weight_unchecked(p_extreme, gamma) * (value(extreme, sigma, lambda) - vy)
            }
            Canonical::Mixed {
                loss,
                p_loss,
                gain,
                p_gain,
            } => {
                weight_unchecked(p_loss, gamma) * value(loss, sigma, lambda)
                    + weight_unchecked(p_gain, gamma) * value(gain, sigma, lambda)
            }
        }
    }

    pub fn expected_value(&self) -> f64 {
        match *self {
            Canonical::Certain(x) => x,
            Canonical::SameSign {
                extreme,
                p_extreme,
                other,
            } => p_extreme * extreme + (1.0 - p_extreme) * other,
            Canonical::Mixed {
                loss,
                p_loss,
                gain,
                p_gain,
            } => p_loss * loss + p_gain * gain,
        }
    }
}

/// Prospect-theory utility of a prospect with one or two distinct outcomes.
pub fn pt_utility(p: &Prospect, params: &PtParams) -> Result<f64> {
    Ok(Canonical::from_prospect(p)?.utility(params.sigma, params.lambda, params.gamma))
}

/// Probability of choosing `a` over `b`.
pub fn pt_choice_prob(a: &Prospect, b: &Prospect, params: &PtParams) -> Result<f64> {
    let diff = pt_utility(a, params)? - pt_utility(b, params)?;
    Ok(sigmoid(params.beta * diff))
}

/// Regret evaluation of a payoff difference: `δ + κ·sgn(δ)·|δ|^α`.
pub fn regret_eval(delta: f64, kappa: f64, alpha: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    delta + kappa * delta.signum() * delta.abs().powf(alpha)
}

/// Expected regret-adjusted value of `a` against `b`, pairing outcomes
/// through the independent product distribution.
pub fn regret_value(a: &Prospect, b: &Prospect, params: &RegretParams) -> f64 {
    regret_value_over(a.outcomes(), b.outcomes(), params.kappa, params.alpha)
}

pub(crate) fn regret_value_over(a: &[Outcome], b: &[Outcome], kappa: f64, alpha: f64) -> f64 {
    let mut total = 0.0;
    for oa in a {
        for ob in b {
            let p = oa.probability * ob.probability;
            if p > 0.0 {
                total += p * regret_eval(oa.payoff - ob.payoff, kappa, alpha);
            }
        }
    }
    total
}

pub fn regret_choice_prob(a: &Prospect, b: &Prospect, params: &RegretParams) -> f64 {
    let ra = regret_value(a, b, params);
    let rb = regret_value(b, a, params);
    sigmoid(params.lambda_reg * (ra - rb))
}
