//! Second-order structure of relative entropy and AIG in a parameter chart:
//! Fisher metric g, AIG gradient j and Hessian f at the initial state, and
//! the Newton ascent direction.
//!
//! Charts: Bernoulli (p), Binomial (p) at fixed n, Poisson (λ),
//! Gaussian-1d (m, v), Beta (n0, n1). With H(s|θ) = −ln P(s|θ),
//!
//! AIG(A, θ0 + Δ, θ0) = −jᵀΔ − ½ ΔᵀfΔ + O(Δ³),
//! j = ⟨∂H(s|θ0)⟩_A,  f = ⟨∂²H(s|θ0)⟩_A.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distributions::{Distribution, KnowledgeState};
use crate::error::{AigError, Result};
use crate::linalg::Factor;
use crate::quadrature::integrate_interval;
use crate::special::{digamma, trigamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ChartFamily {
    Bernoulli,
    Binomial { n: u64 },
    Poisson,
    Gaussian1d,
    Beta,
}

impl ChartFamily {
    pub fn dim(self) -> usize {
        match self {
            ChartFamily::Gaussian1d | ChartFamily::Beta => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamChart {
    pub family: ChartFamily,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryReport {
    pub metric_g: DMatrix<f64>,
    pub gradient_j: DVector<f64>,
    pub hessian_f: DMatrix<f64>,
}

impl ParamChart {
    pub fn new(family: ChartFamily, theta: Vec<f64>) -> Result<Self> {
        let c = ParamChart { family, theta };
        c.validate()?;
        Ok(c)
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(ChartFamily::Bernoulli, vec![p])
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::new(ChartFamily::Poisson, vec![lambda])
    }

    pub fn gaussian_1d(m: f64, v: f64) -> Result<Self> {
        Self::new(ChartFamily::Gaussian1d, vec![m, v])
    }

    pub fn beta(n0: f64, n1: f64) -> Result<Self> {
        Self::new(ChartFamily::Beta, vec![n0, n1])
    }

    /// Interior points only.
    pub fn validate(&self) -> Result<()> {
        if self.theta.len() != self.family.dim() {
            return Err(AigError::param(
                "theta",
                format!("expected {} coordinates, got {}", self.family.dim(), self.theta.len()),
            ));
        }
        let th = &self.theta;
        if th.iter().any(|x| !x.is_finite()) {
            return Err(AigError::param("theta", "must be finite"));
        }
        let ok = match self.family {
            ChartFamily::Bernoulli | ChartFamily::Binomial { .. } => th[0] > 0.0 && th[0] < 1.0,
            ChartFamily::Poisson => th[0] > 0.0,
            ChartFamily::Gaussian1d => th[1] > 0.0,
            ChartFamily::Beta => th[0] > -1.0 && th[1] > -1.0,
        };
        if let ChartFamily::Binomial { n } = self.family {
            if n < 1 {
                return Err(AigError::param("n", "must be at least 1"));
            }
        }
        if !ok {
            return Err(AigError::param("theta", "must lie in the interior of the parameter domain"));
        }
        Ok(())
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        Self::new(self.family, theta)
    }

    pub fn to_state(&self) -> Result<KnowledgeState> {
        self.validate()?;
        let th = &self.theta;
        match self.family {
            ChartFamily::Bernoulli => KnowledgeState::bernoulli(th[0]),
            ChartFamily::Binomial { n } => KnowledgeState::binomial(n, th[0]),
            ChartFamily::Poisson => KnowledgeState::poisson(th[0]),
            ChartFamily::Gaussian1d => KnowledgeState::gaussian_1d(th[0], th[1]),
            ChartFamily::Beta => KnowledgeState::beta(th[0], th[1]),
        }
    }

    pub fn from_state(state: &KnowledgeState) -> Result<Self> {
        let (family, theta) = match &state.dist {
            Distribution::Bernoulli(b) => (ChartFamily::Bernoulli, vec![b.p]),
            Distribution::Binomial(b) => (ChartFamily::Binomial { n: b.n }, vec![b.p]),
            Distribution::Poisson(p) => (ChartFamily::Poisson, vec![p.lambda]),
            Distribution::Gaussian(g) if g.dim() == 1 => {
                (ChartFamily::Gaussian1d, vec![g.mean[0], g.cov[0][0]])
            }
            Distribution::Beta(b) => (ChartFamily::Beta, vec![b.n0, b.n1]),
            _ => {
                return Err(AigError::Unsupported(format!(
                    "no parameter chart for {} states",
                    state.family_name()
                )))
            }
        };
        Self::new(family, theta)
    }
}

fn same_chart(chart0: &ParamChart, a: &KnowledgeState) -> Result<ParamChart> {
    chart0.validate()?;
    let ca = ParamChart::from_state(a).map_err(|_| AigError::FamilyMismatch {
        left: format!("{:?}", chart0.family),
        right: a.family_name().to_string(),
    })?;
    if ca.family != chart0.family {
        return Err(AigError::FamilyMismatch {
            left: format!("{:?}", chart0.family),
            right: format!("{:?}", ca.family),
        });
    }
    Ok(ca)
}

fn beta_trigamma_matrix(a: f64, b: f64) -> DMatrix<f64> {
    let t = trigamma(a + b);
    DMatrix::from_row_slice(2, 2, &[trigamma(a) - t, -t, -t, trigamma(b) - t])
}

/// g = ⟨∂H ∂Hᵀ⟩ at the chart point: closed forms for Bernoulli, Binomial,
/// Poisson and Gaussian-1d; quadrature for Beta.
pub fn fisher_metric(chart: &ParamChart) -> Result<DMatrix<f64>> {
    chart.validate()?;
    let th = &chart.theta;
    Ok(match chart.family {
        ChartFamily::Bernoulli => DMatrix::from_element(1, 1, 1.0 / (th[0] * (1.0 - th[0]))),
        ChartFamily::Binomial { n } => {
            DMatrix::from_element(1, 1, n as f64 / (th[0] * (1.0 - th[0])))
        }
        ChartFamily::Poisson => DMatrix::from_element(1, 1, 1.0 / th[0]),
        ChartFamily::Gaussian1d => {
            let v = th[1];
            DMatrix::from_row_slice(2, 2, &[1.0 / v, 0.0, 0.0, 0.5 / (v * v)])
        }
        ChartFamily::Beta => beta_score_covariance(th[0] + 1.0, th[1] + 1.0)?,
    })
}

/// ⟨∂H ∂Hᵀ⟩ for Beta(a, b) by quadrature; ∂H/∂a = −ln x + ψ(a) − ψ(a+b).
fn beta_score_covariance(a: f64, b: f64) -> Result<DMatrix<f64>> {
    let ln_norm = -crate::special::ln_beta(a, b);
    let psi_ab = digamma(a + b);
    let (ca, cb) = (digamma(a) - psi_ab, digamma(b) - psi_ab);
    let moment = |i: usize, j: usize| {
        integrate_interval(
            |_, d0: f64, d1: f64| {
                let (l0, l1) = (d0.ln(), d1.ln());
                let p = ((a - 1.0) * l0 + (b - 1.0) * l1 + ln_norm).exp();
                if p == 0.0 {
                    return 0.0;
                }
                let score = [ca - l0, cb - l1];
                p * score[i] * score[j]
            },
            0.0,
            1.0,
            1e-12,
        )
    };
    let (g00, g01, g11) = (moment(0, 0)?, moment(0, 1)?, moment(1, 1)?);
    Ok(DMatrix::from_row_slice(2, 2, &[g00, g01, g01, g11]))
}

/// j = ⟨∂H(s|θ0)⟩_A; AIG(A, θ0 + Δ, θ0) = −jᵀΔ + O(Δ²).
pub fn aig_gradient_j(chart0: &ParamChart, a: &KnowledgeState) -> Result<DVector<f64>> {
    let ca = same_chart(chart0, a)?;
    let (t0, ta) = (&chart0.theta, &ca.theta);
    Ok(match chart0.family {
        ChartFamily::Bernoulli => DVector::from_element(1, bernoulli_j(ta[0], t0[0])),
        ChartFamily::Binomial { n } => {
            DVector::from_element(1, n as f64 * bernoulli_j(ta[0], t0[0]))
        }
        ChartFamily::Poisson => DVector::from_element(1, 1.0 - ta[0] / t0[0]),
        ChartFamily::Gaussian1d => {
            let (m0, v0, ma, va) = (t0[0], t0[1], ta[0], ta[1]);
            let d = ma - m0;
            DVector::from_vec(vec![-d / v0, 0.5 / v0 - (va + d * d) / (2.0 * v0 * v0)])
        }
        ChartFamily::Beta => {
            let (a0, b0, aa, ba) = (t0[0] + 1.0, t0[1] + 1.0, ta[0] + 1.0, ta[1] + 1.0);
            let (psi0, psia) = (digamma(a0 + b0), digamma(aa + ba));
            DVector::from_vec(vec![
                -(digamma(aa) - psia) + digamma(a0) - psi0,
                -(digamma(ba) - psia) + digamma(b0) - psi0,
            ])
        }
    })
}

fn bernoulli_j(pa: f64, p0: f64) -> f64 {
    -pa / p0 + (1.0 - pa) / (1.0 - p0)
}

/// f = ⟨∂²H(s|θ0)⟩_A, the exact second-order coefficient. Equals g when A
/// sits at θ0; need not be positive semidefinite otherwise.
pub fn aig_hessian_f(chart0: &ParamChart, a: &KnowledgeState) -> Result<DMatrix<f64>> {
    let ca = same_chart(chart0, a)?;
    let (t0, ta) = (&chart0.theta, &ca.theta);
    Ok(match chart0.family {
        ChartFamily::Bernoulli => DMatrix::from_element(1, 1, bernoulli_f(ta[0], t0[0])),
        ChartFamily::Binomial { n } => {
            DMatrix::from_element(1, 1, n as f64 * bernoulli_f(ta[0], t0[0]))
        }
        ChartFamily::Poisson => DMatrix::from_element(1, 1, ta[0] / (t0[0] * t0[0])),
        ChartFamily::Gaussian1d => {
            let (m0, v0, ma, va) = (t0[0], t0[1], ta[0], ta[1]);
            let d = ma - m0;
            let fmv = d / (v0 * v0);
            let fvv = -0.5 / (v0 * v0) + (va + d * d) / (v0 * v0 * v0);
            DMatrix::from_row_slice(2, 2, &[1.0 / v0, fmv, fmv, fvv])
        }
        // ∂²H does not depend on s for the Beta family
        ChartFamily::Beta => beta_trigamma_matrix(t0[0] + 1.0, t0[1] + 1.0),
    })
}

fn bernoulli_f(pa: f64, p0: f64) -> f64 {
    pa / (p0 * p0) + (1.0 - pa) / ((1.0 - p0) * (1.0 - p0))
}

pub fn geometry_report(chart0: &ParamChart, a: &KnowledgeState) -> Result<GeometryReport> {
    Ok(GeometryReport {
        metric_g: fisher_metric(chart0)?,
        gradient_j: aig_gradient_j(chart0, a)?,
        hessian_f: aig_hessian_f(chart0, a)?,
    })
}

/// Solves g x = −j.
pub fn newton_direction(j: &DVector<f64>, g: &DMatrix<f64>) -> Result<DVector<f64>> {
    if g.nrows() != j.len() || g.ncols() != j.len() {
        return Err(AigError::InvalidArgument(format!(
            "metric is {}x{} but gradient has {} entries",
            g.nrows(),
            g.ncols(),
            j.len()
        )));
    }
    let f = Factor::new(g, "g")?;
    Ok(-f.solve_vec(j))
}

/// Default finite-difference step: 1e-4 · max(1, |θ_i|).
pub fn fd_step(theta: f64) -> f64 {
    1e-4 * theta.abs().max(1.0)
}

/// Central-difference gradient with one Richardson level.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, theta: &[f64]) -> DVector<f64> {
    let n = theta.len();
    let central = |i: usize, h: f64| {
        let mut p = theta.to_vec();
        let mut m = theta.to_vec();
        p[i] += h;
        m[i] -= h;
        (f(&p) - f(&m)) / (2.0 * h)
    };
    DVector::from_fn(n, |i, _| {
        let h = fd_step(theta[i]);
        (4.0 * central(i, h / 2.0) - central(i, h)) / 3.0
    })
}

/// Central-difference Hessian with one Richardson level.
pub fn fd_hessian(f: impl Fn(&[f64]) -> f64, theta: &[f64]) -> DMatrix<f64> {
    let n = theta.len();
    let at = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut p = theta.to_vec();
        p[di] += si;
        p[dj] += sj;
        f(&p)
    };
    let second = |i: usize, j: usize, scale: f64| {
        let hi = fd_step(theta[i]) * scale;
        let hj = fd_step(theta[j]) * scale;
        if i == j {
            (at(i, hi, i, 0.0) - 2.0 * f(theta) + at(i, -hi, i, 0.0)) / (hi * hi)
        } else {
            (at(i, hi, j, hj) - at(i, hi, j, -hj) - at(i, -hi, j, hj) + at(i, -hi, j, -hj))
                / (4.0 * hi * hj)
        }
    };
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = (4.0 * second(i, j, 0.5) - second(i, j, 1.0)) / 3.0;
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}
