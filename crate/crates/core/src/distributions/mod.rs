//! Knowledge states: per-family parameter records, validation and JSON form.
//!
//! A [`KnowledgeState`] serialises as `{"family": ..., "params": {...}, "label": ...}`.
//! Parameter field names are `p`, `n`, `lambda`, `n0`, `n1`, `mean`, `cov`,
//! `probabilities`, `shape` and `s`.

mod closed_form;
mod density;
mod sampling;

pub(crate) use closed_form::GainSum;
pub use closed_form::{
    aig_bernoulli, aig_beta, aig_binomial, aig_gaussian, aig_gaussian_terms, aig_poisson,
    kl_bernoulli, kl_beta, kl_gaussian, kl_poisson, optimal_posterior_covariance,
    GaussianAigTerms,
};
pub(crate) use density::{discrete_masses, xlny};
pub use density::{log_pdf, LogDensity};
pub use sampling::{sample, SampleSet, Sampler};

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{AigError, Result};
use crate::linalg::Factor;

/// A point of a sample space.
///
/// Discrete families use `Index`; one-dimensional continuous families accept
/// `Real` (and integral `Index`); multivariate Gaussians use `Vector`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    Index(u64),
    Real(f64),
    Vector(Vec<f64>),
}

impl Outcome {
    pub fn as_index(&self) -> Option<u64> {
        match *self {
            Outcome::Index(k) => Some(k),
            Outcome::Real(x) if x >= 0.0 && x.fract() == 0.0 && x < 9.0e15 => Some(x as u64),
            Outcome::Vector(ref v) if v.len() == 1 => Outcome::Real(v[0]).as_index(),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match *self {
            Outcome::Index(k) => Some(k as f64),
            Outcome::Real(x) => Some(x),
            Outcome::Vector(ref v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Vec<f64> {
        match self {
            Outcome::Index(k) => vec![*k as f64],
            Outcome::Real(x) => vec![*x],
            Outcome::Vector(v) => v.clone(),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Index(k) => write!(f, "{k}"),
            Outcome::Real(x) => write!(f, "{x}"),
            Outcome::Vector(v) => write!(f, "{v:?}"),
        }
    }
}

/// Probability of outcome s = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernoulliParams {
    pub p: f64,
}

/// `n` trials with success probability `p`; the outcome is the success count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinomialParams {
    pub n: u64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonParams {
    pub lambda: f64,
}

/// Pseudo-counts; the density is Beta(f₀ | n0 + 1, n1 + 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaParams {
    pub n0: f64,
    pub n1: f64,
}

impl BetaParams {
    pub fn a(&self) -> f64 {
        self.n0 + 1.0
    }

    pub fn b(&self) -> f64 {
        self.n1 + 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianParams {
    #[serde(deserialize_with = "scalar_or_vec")]
    pub mean: Vec<f64>,
    #[serde(deserialize_with = "scalar_or_matrix")]
    pub cov: Vec<Vec<f64>>,
}

impl GaussianParams {
    pub fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Self {
        Self { mean, cov }
    }

    pub fn scalar(mean: f64, var: f64) -> Self {
        Self {
            mean: vec![mean],
            cov: vec![vec![var]],
        }
    }

    pub fn from_nalgebra(mean: &DVector<f64>, cov: &DMatrix<f64>) -> Self {
        Self {
            mean: mean.iter().copied().collect(),
            cov: (0..cov.nrows())
                .map(|i| cov.row(i).iter().copied().collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.mean)
    }

    pub fn cov_mat(&self) -> DMatrix<f64> {
        let n = self.cov.len();
        DMatrix::from_fn(n, n, |i, j| self.cov[i].get(j).copied().unwrap_or(f64::NAN))
    }

    pub(crate) fn factor(&self, which: &str) -> Result<Factor> {
        Factor::new(&self.cov_mat(), which)
    }
}

/// A finite probability table, optionally shaped as a joint over several axes
/// (row-major, last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableParams {
    pub probabilities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMassParams {
    pub s: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Distribution {
    Bernoulli(BernoulliParams),
    Binomial(BinomialParams),
    Poisson(PoissonParams),
    Beta(BetaParams),
    #[serde(alias = "gaussian_mv")]
    Gaussian(GaussianParams),
    #[serde(alias = "discrete")]
    DiscreteTable(TableParams),
    PointMass(PointMassParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeState {
    #[serde(flatten)]
    pub dist: Distribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Sample space of a state, used for compatibility checks.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Binary,
    Counts { n: u64 },
    NonNegativeIntegers,
    UnitInterval,
    Real { dim: usize },
    Finite { len: usize, shape: Vec<usize> },
}

impl Support {
    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            Support::Binary
                | Support::Counts { .. }
                | Support::NonNegativeIntegers
                | Support::Finite { .. }
        )
    }
}

impl KnowledgeState {
    pub fn new(dist: Distribution) -> Result<Self> {
        let s = Self { dist, label: None };
        s.validate()?;
        Ok(s)
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(Distribution::Bernoulli(BernoulliParams { p }))
    }

    pub fn binomial(n: u64, p: f64) -> Result<Self> {
        Self::new(Distribution::Binomial(BinomialParams { n, p }))
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::new(Distribution::Poisson(PoissonParams { lambda }))
    }

    pub fn beta(n0: f64, n1: f64) -> Result<Self> {
        Self::new(Distribution::Beta(BetaParams { n0, n1 }))
    }

    pub fn gaussian(params: GaussianParams) -> Result<Self> {
        Self::new(Distribution::Gaussian(params))
    }

    pub fn gaussian_1d(mean: f64, var: f64) -> Result<Self> {
        Self::gaussian(GaussianParams::scalar(mean, var))
    }

    pub fn gaussian_nalgebra(mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        Self::gaussian(GaussianParams::from_nalgebra(mean, cov))
    }

    pub fn table(probabilities: Vec<f64>) -> Result<Self> {
        Self::new(Distribution::DiscreteTable(TableParams {
            probabilities,
            shape: None,
        }))
    }

    pub fn joint_table(probabilities: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        Self::new(Distribution::DiscreteTable(TableParams {
            probabilities,
            shape: Some(shape),
        }))
    }

    pub fn point_mass(s: Outcome) -> Result<Self> {
        Self::new(Distribution::PointMass(PointMassParams { s }))
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn family_name(&self) -> &'static str {
        self.dist.family_name()
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self.dist, Distribution::PointMass(_))
    }

    pub fn support(&self) -> Option<Support> {
        self.dist.support()
    }

    /// Check the family constraints. Deserialised states are unchecked until this runs.
    pub fn validate(&self) -> Result<()> {
        self.dist.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)
            .map_err(|e| AigError::InvalidArgument(format!("state JSON: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("states always serialise")
    }
}

impl Distribution {
    pub fn family_name(&self) -> &'static str {
        match self {
            Distribution::Bernoulli(_) => "bernoulli",
            Distribution::Binomial(_) => "binomial",
            Distribution::Poisson(_) => "poisson",
            Distribution::Beta(_) => "beta",
            Distribution::Gaussian(_) => "gaussian",
            Distribution::DiscreteTable(_) => "discrete_table",
            Distribution::PointMass(_) => "point_mass",
        }
    }

    /// `None` for a point mass, whose support is inherited from its partners.
    pub fn support(&self) -> Option<Support> {
        Some(match self {
            Distribution::Bernoulli(_) => Support::Binary,
            Distribution::Binomial(b) => Support::Counts { n: b.n },
            Distribution::Poisson(_) => Support::NonNegativeIntegers,
            Distribution::Beta(_) => Support::UnitInterval,
            Distribution::Gaussian(g) => Support::Real { dim: g.dim() },
            Distribution::DiscreteTable(t) => Support::Finite {
                len: t.probabilities.len(),
                shape: t
                    .shape
                    .clone()
                    .unwrap_or_else(|| vec![t.probabilities.len()]),
            },
            Distribution::PointMass(_) => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::Bernoulli(b) => check_probability("p", b.p),
            Distribution::Binomial(b) => {
                if b.n < 1 {
                    return Err(AigError::param("n", "must be at least 1"));
                }
                check_probability("p", b.p)
            }
            Distribution::Poisson(p) => {
                if !(p.lambda > 0.0) || !p.lambda.is_finite() {
                    return Err(AigError::param(
                        "lambda",
                        format!("must be positive and finite, got {}", p.lambda),
                    ));
                }
                Ok(())
            }
            Distribution::Beta(b) => {
                for (field, v) in [("n0", b.n0), ("n1", b.n1)] {
                    if !(v > -1.0) || !v.is_finite() {
                        return Err(AigError::param(
                            field,
                            format!("must be finite and > -1, got {v}"),
                        ));
                    }
                }
                Ok(())
            }
            Distribution::Gaussian(g) => {
                let n = g.dim();
                if n == 0 {
                    return Err(AigError::param("mean", "must have at least one component"));
                }
                if g.mean.iter().any(|x| !x.is_finite()) {
                    return Err(AigError::param("mean", "non-finite component"));
                }
                if g.cov.len() != n || g.cov.iter().any(|row| row.len() != n) {
                    return Err(AigError::param(
                        "cov",
                        format!("expected a {n}x{n} matrix matching mean"),
                    ));
                }
                g.factor("cov").map(|_| ())
            }
            Distribution::DiscreteTable(t) => {
                if t.probabilities.is_empty() {
                    return Err(AigError::param("probabilities", "empty table"));
                }
                if let Some(i) = t
                    .probabilities
                    .iter()
                    .position(|p| !(*p >= 0.0) || !p.is_finite())
                {
                    return Err(AigError::param(
                        "probabilities",
                        format!("entry {i} is not a probability"),
                    ));
                }
                let total: f64 = t.probabilities.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(AigError::param(
                        "probabilities",
                        format!("sum is {total}, expected 1"),
                    ));
                }
                if let Some(shape) = &t.shape {
                    let size: usize = shape.iter().product();
                    if shape.is_empty() || shape.contains(&0) || size != t.probabilities.len() {
                        return Err(AigError::param(
                            "shape",
                            format!(
                                "{shape:?} does not match {} entries",
                                t.probabilities.len()
                            ),
                        ));
                    }
                }
                Ok(())
            }
            Distribution::PointMass(pm) => match &pm.s {
                Outcome::Real(x) if !x.is_finite() => Err(AigError::param("s", "non-finite")),
                Outcome::Vector(v) if v.is_empty() || v.iter().any(|x| !x.is_finite()) => {
                    Err(AigError::param("s", "empty or non-finite vector"))
                }
                _ => Ok(()),
            },
        }
    }
}

fn check_probability(field: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(AigError::param(field, format!("must lie in [0, 1], got {p}")))
    }
}

/// Reject cross-family and cross-support comparisons.
pub(crate) fn check_compatible(a: &KnowledgeState, b: &KnowledgeState) -> Result<()> {
    match (a.support(), b.support()) {
        (Some(sa), Some(sb)) => {
            if a.family_name() != b.family_name() {
                return Err(AigError::FamilyMismatch {
                    left: a.family_name().into(),
                    right: b.family_name().into(),
                });
            }
            if sa != sb {
                return Err(AigError::SupportMismatch(format!("{sa:?} vs {sb:?}")));
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn scalar_or_vec<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Scalar(f64),
        Vector(Vec<f64>),
    }
    Ok(match Repr::deserialize(d)? {
        Repr::Scalar(x) => vec![x],
        Repr::Vector(v) => v,
    })
}

fn scalar_or_matrix<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<Vec<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Scalar(f64),
        Matrix(Vec<Vec<f64>>),
    }
    Ok(match Repr::deserialize(d)? {
        Repr::Scalar(x) => vec![vec![x]],
        Repr::Matrix(m) => m,
    })
}
