use std::f64::consts::PI;

use nalgebra::DVector;

use super::{Distribution, KnowledgeState, Outcome};
use crate::error::{AigError, Result};
use crate::linalg::Factor;
use crate::special::{ln_beta, ln_binomial, ln_factorial};

/// x·ln y with the convention 0·ln 0 = 0.
pub(crate) fn xlny(x: f64, lny: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * lny
    }
}

/// A state with its normalisers and factorisations precomputed, for
/// repeated log-density evaluation.
#[derive(Debug, Clone)]
pub enum LogDensity {
    Bernoulli { ln_p: f64, ln_q: f64 },
    Binomial { n: u64, ln_p: f64, ln_q: f64 },
    Poisson { lambda: f64, ln_lambda: f64 },
    Beta { am1: f64, bm1: f64, ln_norm: f64 },
    Gaussian1 { mean: f64, var: f64, ln_norm: f64 },
    Gaussian { mean: DVector<f64>, factor: Factor, ln_norm: f64 },
    Table { ln_p: Vec<f64> },
    PointMass { s: Vec<f64> },
}

impl LogDensity {
    pub fn new(state: &KnowledgeState) -> Result<Self> {
        Ok(match &state.dist {
            Distribution::Bernoulli(b) => LogDensity::Bernoulli {
                ln_p: b.p.ln(),
                ln_q: (-b.p).ln_1p(),
            },
            Distribution::Binomial(b) => LogDensity::Binomial {
                n: b.n,
                ln_p: b.p.ln(),
                ln_q: (-b.p).ln_1p(),
            },
            Distribution::Poisson(p) => LogDensity::Poisson {
                lambda: p.lambda,
                ln_lambda: p.lambda.ln(),
            },
            Distribution::Beta(b) => LogDensity::Beta {
                am1: b.n0,
                bm1: b.n1,
                ln_norm: -ln_beta(b.a(), b.b()),
            },
            Distribution::Gaussian(g) if g.dim() == 1 => {
                let var = g.cov[0][0];
                if !(var > 0.0) {
                    return Err(AigError::NotPositiveDefinite {
                        which: label_or(state, "cov"),
                    });
                }
                LogDensity::Gaussian1 {
                    mean: g.mean[0],
                    var,
                    ln_norm: -0.5 * (2.0 * PI * var).ln(),
                }
            }
            Distribution::Gaussian(g) => {
                let factor = g.factor(&label_or(state, "cov"))?;
                let n = g.dim() as f64;
                let ln_norm = -0.5 * (n * (2.0 * PI).ln() + factor.log_det);
                LogDensity::Gaussian {
                    mean: g.mean_vec(),
                    factor,
                    ln_norm,
                }
            }
            Distribution::DiscreteTable(t) => LogDensity::Table {
                ln_p: t.probabilities.iter().map(|p| p.ln()).collect(),
            },
            Distribution::PointMass(pm) => LogDensity::PointMass {
                s: pm.s.as_vector(),
            },
        })
    }

    pub fn eval(&self, s: &Outcome) -> Result<f64> {
        let outside = |family: &str| AigError::OutsideSupport {
            outcome: s.to_string(),
            family: family.to_string(),
        };
        match self {
            LogDensity::Bernoulli { ln_p, ln_q } => match s.as_index() {
                Some(0) => Ok(*ln_p),
                Some(1) => Ok(*ln_q),
                _ => Err(outside("bernoulli")),
            },
            LogDensity::Binomial { n, ln_p, ln_q } => match s.as_index() {
                Some(k) if k <= *n => Ok(self.binomial_at(k, *n, *ln_p, *ln_q)),
                _ => Err(outside("binomial")),
            },
            LogDensity::Poisson { lambda, ln_lambda } => match s.as_index() {
                Some(k) => Ok(xlny(k as f64, *ln_lambda) - lambda - ln_factorial(k)),
                None => Err(outside("poisson")),
            },
            LogDensity::Beta { am1, bm1, ln_norm } => match s.as_real() {
                Some(x) if (0.0..=1.0).contains(&x) => {
                    Ok(xlny(*am1, x.ln()) + xlny(*bm1, (-x).ln_1p()) + ln_norm)
                }
                _ => Err(outside("beta")),
            },
            LogDensity::Gaussian1 { .. } => match s.as_real() {
                Some(x) if x.is_finite() => Ok(self.eval_real(x)),
                _ => Err(outside("gaussian")),
            },
            LogDensity::Gaussian {
                mean,
                factor,
                ln_norm,
            } => {
                let v = s.as_vector();
                if v.len() != mean.len() || v.iter().any(|x| !x.is_finite()) {
                    return Err(outside("gaussian"));
                }
                let d = DVector::from_vec(v) - mean;
                Ok(ln_norm - 0.5 * factor.inv_quad(&d))
            }
            LogDensity::Table { ln_p } => match s.as_index() {
                Some(k) if (k as usize) < ln_p.len() => Ok(ln_p[k as usize]),
                _ => Err(outside("discrete_table")),
            },
            LogDensity::PointMass { s: at } => {
                if s.as_vector() == *at {
                    Ok(0.0)
                } else {
                    Ok(f64::NEG_INFINITY)
                }
            }
        }
    }

    /// Fast path for one-dimensional continuous states; callers guarantee the family.
    pub fn eval_real(&self, x: f64) -> f64 {
        match self {
            LogDensity::Gaussian1 { mean, var, ln_norm } => {
                let d = x - mean;
                ln_norm - 0.5 * d * d / var
            }
            LogDensity::Beta { am1, bm1, ln_norm } => {
                xlny(*am1, x.ln()) + xlny(*bm1, (-x).ln_1p()) + ln_norm
            }
            _ => self.eval(&Outcome::Real(x)).unwrap_or(f64::NAN),
        }
    }

    /// Beta log-density from the distances to both endpoints, avoiding
    /// cancellation in ln(1 − x) near x = 1.
    pub(crate) fn eval_unit(&self, x: f64, dist0: f64, dist1: f64) -> f64 {
        match self {
            LogDensity::Beta { am1, bm1, ln_norm } => {
                xlny(*am1, dist0.ln()) + xlny(*bm1, dist1.ln()) + ln_norm
            }
            _ => self.eval_real(x),
        }
    }

    fn binomial_at(&self, k: u64, n: u64, ln_p: f64, ln_q: f64) -> f64 {
        ln_binomial(n, k) + xlny(k as f64, ln_p) + xlny((n - k) as f64, ln_q)
    }
}

fn label_or(state: &KnowledgeState, fallback: &str) -> String {
    state
        .label
        .as_ref()
        .map(|l| format!("D_{l}"))
        .unwrap_or_else(|| fallback.to_string())
}

/// ln P(s | state); `-inf` for zero-probability outcomes inside the support.
pub fn log_pdf(state: &KnowledgeState, s: &Outcome) -> Result<f64> {
    state.validate()?;
    LogDensity::new(state)?.eval(s)
}

/// (outcome index, probability) pairs of a discrete state. Poisson support
/// is truncated where the remaining tail mass is far below 1e-16.
pub(crate) fn discrete_masses(state: &KnowledgeState) -> Option<Vec<(u64, f64)>> {
    match &state.dist {
        Distribution::Bernoulli(b) => Some(vec![(0, b.p), (1, 1.0 - b.p)]),
        Distribution::Binomial(b) => {
            let ld = LogDensity::new(state).ok()?;
            Some(
                (0..=b.n)
                    .map(|k| (k, ld.eval(&Outcome::Index(k)).unwrap_or(f64::NEG_INFINITY).exp()))
                    .collect(),
            )
        }
        Distribution::Poisson(p) => {
            let kmax = poisson_cutoff(p.lambda);
            let ln_l = p.lambda.ln();
            Some(
                (0..=kmax)
                    .map(|k| (k, (xlny(k as f64, ln_l) - p.lambda - ln_factorial(k)).exp()))
                    .collect(),
            )
        }
        Distribution::DiscreteTable(t) => Some(
            t.probabilities
                .iter()
                .enumerate()
                .map(|(k, p)| (k as u64, *p))
                .collect(),
        ),
        _ => None,
    }
}

pub(crate) fn poisson_cutoff(lambda: f64) -> u64 {
    (lambda + 14.0 * lambda.sqrt() + 40.0).ceil() as u64
}
