//! Three-argument information measures: AIG, α-AIG, achieved mutual
//! information, attention gain, cognitive fidelity and scoring rules.
//!
//! Argument order follows D(A, B, 0): `a` is the ideal (reference) state,
//! `b` the updated state and `o` the initial state.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::distributions::{
    self, aig_bernoulli, aig_beta, aig_binomial, aig_gaussian, aig_poisson, check_compatible,
    discrete_masses, kl_bernoulli, kl_beta, kl_gaussian, kl_poisson, xlny, Distribution, GainSum,
    GaussianParams, KnowledgeState, LogDensity, Outcome, Support,
};
use crate::error::{AigError, Result};
use crate::linalg::Factor;
use crate::quadrature::{integrate_interval, integrate_real_line};
use crate::special::{digamma, ln_beta, ln_factorial};
use crate::units::InfoQuantity;

const QUAD_TOL: f64 = 1e-11;

/// Cognitive fidelity, or `Undefined` when the ideal gain vanishes
/// (nothing was there to be learned) or both gains are infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fidelity {
    Value(f64),
    Undefined,
}

impl Fidelity {
    pub fn value(self) -> Option<f64> {
        match self {
            Fidelity::Value(v) => Some(v),
            Fidelity::Undefined => None,
        }
    }

    /// 1 − remaining/ideal.
    pub fn from_gains(ideal: f64, remaining: f64) -> Self {
        if ideal == 0.0 || (ideal.is_infinite() && remaining.is_infinite()) || ideal.is_nan() {
            return Fidelity::Undefined;
        }
        Fidelity::Value(1.0 - remaining / ideal)
    }

    /// achieved/ideal, for measures without a separate remaining term.
    pub fn from_ratio(achieved: f64, ideal: f64) -> Self {
        if ideal == 0.0 || (ideal.is_infinite() && achieved.is_infinite()) || ideal.is_nan() {
            return Fidelity::Undefined;
        }
        Fidelity::Value(achieved / ideal)
    }
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fidelity::Value(v) => write!(f, "{v}"),
            Fidelity::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Fidelity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Fidelity::Value(v) => s.serialize_f64(*v),
            Fidelity::Undefined => s.serialize_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AigReport {
    /// D(A, 0)
    pub ideal: InfoQuantity,
    /// D(A, B)
    pub remaining: InfoQuantity,
    /// D(B, 0)
    pub apparent: InfoQuantity,
    /// D(A, B, 0)
    pub achieved: InfoQuantity,
    pub fidelity: Fidelity,
}

fn validate_all(states: &[&KnowledgeState]) -> Result<()> {
    for s in states {
        s.validate()?;
    }
    Ok(())
}

fn point_of(s: &KnowledgeState) -> Option<&Outcome> {
    match &s.dist {
        Distribution::PointMass(pm) => Some(&pm.s),
        _ => None,
    }
}

/// Relative entropy D(a, b) = ⟨ln P_a/P_b⟩_a in nits; `+inf` when b rules
/// out outcomes that a allows.
pub fn kl_divergence(a: &KnowledgeState, b: &KnowledgeState) -> Result<InfoQuantity> {
    validate_all(&[a, b])?;
    check_compatible(a, b)?;
    if a.dist == b.dist {
        return Ok(InfoQuantity::ZERO);
    }
    if let Some(s) = point_of(a) {
        let lb = LogDensity::new(b)?.eval(s)?;
        let continuous = b.support().map(|sp| !sp.is_discrete()).unwrap_or(false);
        return Ok(InfoQuantity::nits(if continuous { f64::INFINITY } else { -lb }));
    }
    if point_of(b).is_some() {
        // D(a, δ) is zero only if a is itself concentrated on that point
        let lb = LogDensity::new(b)?;
        return match discrete_masses(a) {
            Some(masses) => {
                let mut g = GainSum::default();
                for (k, p) in masses {
                    g.add(p, p.ln(), lb.eval(&Outcome::Index(k))?)?;
                }
                g.finish().map(InfoQuantity::nits)
            }
            None => Ok(InfoQuantity::nits(f64::INFINITY)),
        };
    }
    match (&a.dist, &b.dist) {
        (Distribution::Bernoulli(x), Distribution::Bernoulli(y)) => kl_bernoulli(x.p, y.p),
        (Distribution::Binomial(x), Distribution::Binomial(y)) => {
            Ok(InfoQuantity::nits(x.n as f64 * kl_bernoulli(x.p, y.p)?.value))
        }
        (Distribution::Poisson(x), Distribution::Poisson(y)) => kl_poisson(x.lambda, y.lambda),
        (Distribution::Beta(x), Distribution::Beta(y)) => kl_beta(x, y),
        (Distribution::Gaussian(x), Distribution::Gaussian(y)) => kl_gaussian(x, y),
        (Distribution::DiscreteTable(x), Distribution::DiscreteTable(y)) => {
            let mut g = GainSum::default();
            for (p, q) in x.probabilities.iter().zip(&y.probabilities) {
                g.add(*p, p.ln(), q.ln())?;
            }
            g.finish().map(InfoQuantity::nits)
        }
        _ => unreachable!("compatibility checked"),
    }
}

/// D(a, b, 0) = D(a, 0) − D(a, b) = ⟨ln P_b/P_0⟩_a in nits.
///
/// `a` may be a point mass (ground-truth form ln P_b(s) − ln P_0(s)).
/// An unchanged belief (`b` equal to `o`) gains exactly nothing.
pub fn achieved_information_gain(
    a: &KnowledgeState,
    b: &KnowledgeState,
    o: &KnowledgeState,
) -> Result<InfoQuantity> {
    validate_all(&[a, b, o])?;
    check_compatible(a, b)?;
    check_compatible(a, o)?;
    check_compatible(b, o)?;
    if b.dist == o.dist {
        return Ok(InfoQuantity::ZERO);
    }
    if let Some(s) = point_of(a) {
        let lb = LogDensity::new(b)?.eval(s)?;
        let lo = LogDensity::new(o)?.eval(s)?;
        let mut g = GainSum::default();
        g.add(1.0, lb, lo)?;
        return g.finish().map(InfoQuantity::nits);
    }
    if point_of(b).is_some() || point_of(o).is_some() {
        return aig_by_expectation(a, b, o);
    }
    match (&a.dist, &b.dist, &o.dist) {
        (Distribution::Bernoulli(x), Distribution::Bernoulli(y), Distribution::Bernoulli(z)) => {
            aig_bernoulli(x.p, y.p, z.p)
        }
        (Distribution::Binomial(x), Distribution::Binomial(y), Distribution::Binomial(z)) => {
            aig_binomial(x.n, x.p, y.p, z.p)
        }
        (Distribution::Poisson(x), Distribution::Poisson(y), Distribution::Poisson(z)) => {
            aig_poisson(x.lambda, y.lambda, z.lambda)
        }
        (Distribution::Beta(x), Distribution::Beta(y), Distribution::Beta(z)) => aig_beta(x, y, z),
        (Distribution::Gaussian(x), Distribution::Gaussian(y), Distribution::Gaussian(z)) => {
            aig_gaussian(x, y, z)
        }
        (Distribution::DiscreteTable(_), _, _) => aig_by_expectation(a, b, o),
        _ => unreachable!("compatibility checked"),
    }
}

/// Direct ⟨ln P_b − ln P_o⟩_a, used for tables and point-mass partners.
fn aig_by_expectation(
    a: &KnowledgeState,
    b: &KnowledgeState,
    o: &KnowledgeState,
) -> Result<InfoQuantity> {
    let lb = LogDensity::new(b)?;
    let lo = LogDensity::new(o)?;
    if let Some(masses) = discrete_masses(a) {
        let mut g = GainSum::default();
        for (k, p) in masses {
            let s = Outcome::Index(k);
            g.add(p, lb.eval(&s)?, lo.eval(&s)?)?;
        }
        return g.finish().map(InfoQuantity::nits);
    }
    // continuous a against a point mass: the point carries no a-probability
    let mut g = GainSum::default();
    let b_point = point_of(b).is_some();
    let o_point = point_of(o).is_some();
    g.add(
        1.0,
        if b_point { f64::NEG_INFINITY } else { 0.0 },
        if o_point { f64::NEG_INFINITY } else { 0.0 },
    )?;
    g.finish().map(InfoQuantity::nits)
}

/// Ideal, remaining, apparent and achieved gains with cognitive fidelity.
pub fn aig_report(
    a: &KnowledgeState,
    b: &KnowledgeState,
    o: &KnowledgeState,
) -> Result<AigReport> {
    let achieved = achieved_information_gain(a, b, o)?;
    let ideal = kl_divergence(a, o)?;
    let remaining = kl_divergence(a, b)?;
    let apparent = if point_of(b).is_some() && o.support().is_some_and(|s| !s.is_discrete()) {
        InfoQuantity::nits(f64::INFINITY)
    } else {
        kl_divergence(b, o)?
    };
    Ok(AigReport {
        ideal,
        remaining,
        apparent,
        achieved,
        fidelity: Fidelity::from_gains(ideal.value, remaining.value),
    })
}

/// ln Σ exp(x_i) over terms that may be ±inf.
fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// ln⟨(P_b/P_o)^β⟩ for one outcome weight, in log space.
fn powered_log_ratio(ln_w: f64, lb: f64, lo: f64, beta: f64) -> Result<f64> {
    if ln_w == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if lb == f64::NEG_INFINITY && lo == f64::NEG_INFINITY {
        return Err(AigError::Indeterminate(
            "both compared states assign zero probability to a possible outcome".into(),
        ));
    }
    Ok(ln_w + beta * (lb - lo))
}

fn finish_alpha(ln_mean: f64, beta: f64) -> InfoQuantity {
    InfoQuantity::nits(ln_mean / beta)
}

/// (1/(α−1)) ln⟨(P_b/P_o)^{α−1}⟩_a in nits. A divergent expectation yields
/// an infinity carrying the sign of α − 1.
pub fn alpha_aig(
    a: &KnowledgeState,
    b: &KnowledgeState,
    o: &KnowledgeState,
    alpha: f64,
) -> Result<InfoQuantity> {
    if alpha == 1.0 || !alpha.is_finite() {
        return Err(AigError::InvalidArgument(format!(
            "alpha must be finite and different from 1, got {alpha}"
        )));
    }
    validate_all(&[a, b, o])?;
    check_compatible(a, b)?;
    check_compatible(a, o)?;
    check_compatible(b, o)?;
    if b.dist == o.dist {
        return Ok(InfoQuantity::ZERO);
    }
    let beta = alpha - 1.0;
    if let Some(s) = point_of(a) {
        let lb = LogDensity::new(b)?.eval(s)?;
        let lo = LogDensity::new(o)?.eval(s)?;
        return Ok(finish_alpha(powered_log_ratio(0.0, lb, lo, beta)?, beta));
    }
    let ln_mean = match (&a.dist, &b.dist, &o.dist) {
        (Distribution::Binomial(x), Distribution::Binomial(y), Distribution::Binomial(z)) => {
            // independent trials: the expectation factorises
            let per = bernoulli_ln_mean(x.p, y.p, z.p, beta)?;
            x.n as f64 * per
        }
        (Distribution::Poisson(x), Distribution::Poisson(y), Distribution::Poisson(z)) => {
            let ratio = (beta * (y.lambda.ln() - z.lambda.ln())).exp();
            x.lambda * (ratio - 1.0) - beta * (y.lambda - z.lambda)
        }
        (Distribution::Beta(x), Distribution::Beta(y), Distribution::Beta(z)) => {
            let k1 = beta * (y.n0 - z.n0);
            let k2 = beta * (y.n1 - z.n1);
            let (p, q) = (x.a() + k1, x.b() + k2);
            if p <= 0.0 || q <= 0.0 {
                f64::INFINITY
            } else {
                ln_beta(p, q) - ln_beta(x.a(), x.b())
                    + beta * (ln_beta(z.a(), z.b()) - ln_beta(y.a(), y.b()))
            }
        }
        (Distribution::Gaussian(x), Distribution::Gaussian(y), Distribution::Gaussian(z)) => {
            gaussian_alpha_ln_mean(x, y, z, beta)?
        }
        _ => {
            let lb = LogDensity::new(b)?;
            let lo = LogDensity::new(o)?;
            match discrete_masses(a) {
                Some(masses) => {
                    let mut terms = Vec::with_capacity(masses.len());
                    for (k, p) in masses {
                        let s = Outcome::Index(k);
                        terms.push(powered_log_ratio(p.ln(), lb.eval(&s)?, lo.eval(&s)?, beta)?);
                    }
                    log_sum_exp(&terms)
                }
                None => {
                    let v = aig_by_expectation(a, b, o)?.value;
                    return Ok(InfoQuantity::nits(v));
                }
            }
        }
    };
    Ok(finish_alpha(ln_mean, beta))
}

fn bernoulli_ln_mean(pa: f64, pb: f64, p0: f64, beta: f64) -> Result<f64> {
    let terms = [
        powered_log_ratio(pa.ln(), pb.ln(), p0.ln(), beta)?,
        powered_log_ratio((-pa).ln_1p(), (-pb).ln_1p(), (-p0).ln_1p(), beta)?,
    ];
    Ok(log_sum_exp(&terms))
}

/// ln⟨(G_b/G_o)^β⟩ under G_a, in coordinates centred on m_a.
fn gaussian_alpha_ln_mean(
    a: &GaussianParams,
    b: &GaussianParams,
    o: &GaussianParams,
    beta: f64,
) -> Result<f64> {
    if a.dim() != b.dim() || a.dim() != o.dim() {
        return Err(AigError::SupportMismatch("gaussian dimensions differ".into()));
    }
    let fa = a.factor("D_A")?;
    let fb = b.factor("D_B")?;
    let fo = o.factor("D_0")?;
    let (pa, pb, po) = (fa.inverse(), fb.inverse(), fo.inverse());
    let ma = a.mean_vec();
    let db = &ma - b.mean_vec();
    let d0 = &ma - o.mean_vec();
    let p: DMatrix<f64> = &pa + (&pb - &po) * beta;
    let p = (&p + p.transpose()) * 0.5;
    let fp = match Factor::new(&p, "P") {
        Ok(f) => f,
        Err(_) => return Ok(f64::INFINITY),
    };
    let h: DVector<f64> = -(&pb * &db - &po * &d0) * beta;
    let c = beta * (fb.inv_quad(&db) - fo.inv_quad(&d0));
    let hph = h.dot(&fp.solve_vec(&h));
    Ok(-0.5 * fa.log_det - 0.5 * fp.log_det + 0.5 * hph - 0.5 * c
        + 0.5 * beta * (fo.log_det - fb.log_det))
}

/// Product of the one-dimensional (Gaussian) or per-axis (table) marginals of `b`.
pub fn product_of_marginals(b: &KnowledgeState) -> Result<KnowledgeState> {
    b.validate()?;
    match &b.dist {
        Distribution::Gaussian(g) if g.dim() >= 2 => {
            let n = g.dim();
            let cov = (0..n)
                .map(|i| (0..n).map(|j| if i == j { g.cov[i][i] } else { 0.0 }).collect())
                .collect();
            KnowledgeState::gaussian(GaussianParams::new(g.mean.clone(), cov))
        }
        Distribution::DiscreteTable(t) => {
            let shape = match &t.shape {
                Some(s) if s.len() >= 2 => s.clone(),
                _ => {
                    return Err(AigError::SupportMismatch(
                        "achieved mutual information needs a table with at least two axes".into(),
                    ))
                }
            };
            let marginals = table_marginals(&t.probabilities, &shape);
            let mut probs = Vec::with_capacity(t.probabilities.len());
            for flat in 0..t.probabilities.len() {
                let idx = unravel(flat, &shape);
                probs.push(idx.iter().enumerate().map(|(ax, &i)| marginals[ax][i]).product());
            }
            // renormalise the roundoff of the marginal products
            let total: f64 = probs.iter().sum();
            let probs = probs.into_iter().map(|p: f64| p / total).collect();
            KnowledgeState::joint_table(probs, shape)
        }
        _ => Err(AigError::SupportMismatch(format!(
            "{} state has no product support",
            b.family_name()
        ))),
    }
}

fn unravel(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for ax in (0..shape.len()).rev() {
        idx[ax] = flat % shape[ax];
        flat /= shape[ax];
    }
    idx
}

fn table_marginals(p: &[f64], shape: &[usize]) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = shape.iter().map(|&n| vec![0.0; n]).collect();
    for (flat, &v) in p.iter().enumerate() {
        for (ax, i) in unravel(flat, shape).into_iter().enumerate() {
            m[ax][i] += v;
        }
    }
    m
}

/// AMI(a, b) = D(a, b, product of b's marginals). Equals the mutual
/// information of b when a = b; may be negative otherwise.
pub fn achieved_mutual_information(
    a: &KnowledgeState,
    b: &KnowledgeState,
) -> Result<InfoQuantity> {
    let o = product_of_marginals(b)?;
    achieved_information_gain(a, b, &o)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoringRule {
    /// ln P_b(s): cross-entropy
    CrossEntropy,
    /// −ln(P_b(s)/P_a(s)): relative entropy
    RelativeEntropy,
    /// ln(P_b(s)/P_o(s)): achieved information gain
    Aig,
    /// (P_b(s)/P_o(s))^{α−1}
    AlphaAig(f64),
}

/// Expected score ⟨S(P_b, s)⟩_a. Cross-entropy and relative entropy ignore `o`.
pub fn evaluate_scoring_rule(
    rule: ScoringRule,
    a: &KnowledgeState,
    b: &KnowledgeState,
    o: &KnowledgeState,
) -> Result<f64> {
    match rule {
        ScoringRule::CrossEntropy => expected_log_density(a, b),
        ScoringRule::RelativeEntropy => kl_divergence(a, b).map(|q| q.value),
        ScoringRule::Aig => achieved_information_gain(a, b, o).map(|q| q.value),
        ScoringRule::AlphaAig(alpha) => {
            let v = alpha_aig(a, b, o, alpha)?.value;
            Ok(((alpha - 1.0) * v).exp())
        }
    }
}

/// ⟨ln P_b(s)⟩_a.
pub fn expected_log_density(a: &KnowledgeState, b: &KnowledgeState) -> Result<f64> {
    validate_all(&[a, b])?;
    check_compatible(a, b)?;
    if let Some(s) = point_of(a) {
        return LogDensity::new(b)?.eval(s);
    }
    if point_of(b).is_some() {
        return match discrete_masses(a) {
            Some(_) => expected_by_masses(a, b),
            None => Ok(f64::NEG_INFINITY),
        };
    }
    match (&a.dist, &b.dist) {
        (Distribution::Poisson(x), Distribution::Poisson(y)) => {
            // ⟨ln s!⟩ by the truncated series
            let mut e_ln_fact = 0.0;
            if let Some(masses) = discrete_masses(a) {
                for (k, p) in masses {
                    e_ln_fact += p * ln_factorial(k);
                }
            }
            Ok(x.lambda * y.lambda.ln() - y.lambda - e_ln_fact)
        }
        (Distribution::Beta(x), Distribution::Beta(y)) => {
            let psi_sum = digamma(x.a() + x.b());
            Ok(xlny(y.n0, 1.0) * (digamma(x.a()) - psi_sum)
                + xlny(y.n1, 1.0) * (digamma(x.b()) - psi_sum)
                - ln_beta(y.a(), y.b()))
        }
        (Distribution::Gaussian(x), Distribution::Gaussian(y)) => {
            let fb = y.factor("D_B")?;
            let d = x.mean_vec() - y.mean_vec();
            let n = x.dim() as f64;
            Ok(-0.5
                * (n * (2.0 * std::f64::consts::PI).ln()
                    + fb.log_det
                    + fb.trace_solve(&x.cov_mat())
                    + fb.inv_quad(&d)))
        }
        _ => expected_by_masses(a, b),
    }
}

fn expected_by_masses(a: &KnowledgeState, b: &KnowledgeState) -> Result<f64> {
    let lb = LogDensity::new(b)?;
    let masses = discrete_masses(a)
        .ok_or_else(|| AigError::Unsupported("expectation over a continuous state".into()))?;
    let mut total = 0.0;
    for (k, p) in masses {
        if p == 0.0 {
            continue;
        }
        let l = lb.eval(&Outcome::Index(k))?;
        if l == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += p * l;
    }
    Ok(total)
}

/// Attention weights w(s) ≥ 0: one entry per discrete outcome (missing
/// entries of an unbounded support count as zero), or a function of the
/// outcome value.
#[derive(Clone)]
pub enum AttentionWeights {
    Discrete(Vec<f64>),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for AttentionWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttentionWeights::Discrete(w) => f.debug_tuple("Discrete").field(w).finish(),
            AttentionWeights::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl AttentionWeights {
    pub fn uniform() -> Self {
        AttentionWeights::Function(Arc::new(|_| 1.0))
    }

    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        AttentionWeights::Function(Arc::new(f))
    }

    fn at(&self, k: u64, x: f64) -> Result<f64> {
        let w = match self {
            AttentionWeights::Discrete(v) => v.get(k as usize).copied().unwrap_or(0.0),
            AttentionWeights::Function(f) => f(x),
        };
        if !(w >= 0.0) || !w.is_finite() {
            return Err(AigError::InvalidArgument(format!(
                "attention weight at {x} is {w}, must be finite and >= 0"
            )));
        }
        Ok(w)
    }
}

/// Σ or ∫ of w(s)·P(s|state)·g(s); discrete or one-dimensional continuous.
fn weighted_integral(
    state: &KnowledgeState,
    w: &AttentionWeights,
    g: &dyn Fn(f64, f64, f64) -> Result<f64>,
) -> Result<f64> {
    let ld = LogDensity::new(state)?;
    if let Some(masses) = discrete_masses(state) {
        let mut total = 0.0;
        for (k, p) in masses {
            let wk = w.at(k, k as f64)?;
            if wk == 0.0 || p == 0.0 {
                continue;
            }
            total += wk * p * g(k as f64, 0.0, 0.0)?;
        }
        return Ok(total);
    }
    let err = std::cell::RefCell::new(None);
    let eval = |x: f64, d0: f64, d1: f64| -> f64 {
        let wx = match w.at(0, x) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                return 0.0;
            }
        };
        if wx == 0.0 {
            return 0.0;
        }
        let p = ld.eval_unit(x, d0, d1).exp();
        if p == 0.0 {
            return 0.0;
        }
        match g(x, d0, d1) {
            Ok(v) => wx * p * v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let v = match &state.dist {
        Distribution::Beta(_) => integrate_interval(eval, 0.0, 1.0, QUAD_TOL)?,
        Distribution::Gaussian(gp) if gp.dim() == 1 => {
            integrate_real_line(|x| eval(x, 0.0, 0.0), gp.mean[0], gp.cov[0][0].sqrt(), QUAD_TOL)?
        }
        _ => {
            return Err(AigError::Unsupported(format!(
                "attention over {} states",
                state.family_name()
            )))
        }
    };
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Achieved attention gain:
/// ⟨w ln(P_b/P_o)⟩_a / ⟨w⟩_a − ln(⟨w⟩_b / ⟨w⟩_o).
pub fn attention_gain(
    a: &KnowledgeState,
    b: &KnowledgeState,
    o: &KnowledgeState,
    w: &AttentionWeights,
) -> Result<InfoQuantity> {
    validate_all(&[a, b, o])?;
    for s in [a, b, o] {
        if s.is_point_mass() {
            return Err(AigError::Unsupported("attention gain with point masses".into()));
        }
    }
    check_compatible(a, b)?;
    check_compatible(a, o)?;
    if let (AttentionWeights::Discrete(v), Some(sp)) = (w, a.support()) {
        let expected = match sp {
            Support::Binary => Some(2),
            Support::Counts { n } => Some(n as usize + 1),
            Support::Finite { len, .. } => Some(len),
            _ => None,
        };
        if let Some(len) = expected {
            if v.len() != len {
                return Err(AigError::InvalidArgument(format!(
                    "{} weights for a support of size {len}",
                    v.len()
                )));
            }
        }
    }
    let lb = LogDensity::new(b)?;
    let lo = LogDensity::new(o)?;
    let one = |_: f64, _: f64, _: f64| Ok(1.0);
    let wa = weighted_integral(a, w, &one)?;
    if wa == 0.0 {
        return Err(AigError::InvalidArgument(
            "attention weights vanish on the support of a".into(),
        ));
    }
    let log_ratio = |x: f64, d0: f64, d1: f64| -> Result<f64> {
        let (vb, vo) = if matches!(a.support(), Some(s) if s.is_discrete()) {
            let s = Outcome::Index(x as u64);
            (lb.eval(&s)?, lo.eval(&s)?)
        } else {
            (lb.eval_unit(x, d0, d1), lo.eval_unit(x, d0, d1))
        };
        let mut g = GainSum::default();
        g.add(1.0, vb, vo)?;
        g.finish()
    };
    let first = weighted_integral(a, w, &log_ratio)? / wa;
    let wb = weighted_integral(b, w, &one)?;
    let wo = weighted_integral(o, w, &one)?;
    let mut second = GainSum::default();
    second.add(1.0, wb.ln(), wo.ln())?;
    let second = second.finish()?;
    if first.is_infinite() && second.is_infinite() && first.signum() == second.signum() {
        return Err(AigError::Indeterminate(
            "attention gain terms diverge in opposite directions".into(),
        ));
    }
    Ok(InfoQuantity::nits(first - second))
}

/// attention_gain(a, b, o, w) / attention_gain(a, a, o, w).
pub fn attention_fidelity(
    a: &KnowledgeState,
    b: &KnowledgeState,
    o: &KnowledgeState,
    w: &AttentionWeights,
) -> Result<Fidelity> {
    let achieved = attention_gain(a, b, o, w)?.value;
    let ideal = attention_gain(a, a, o, w)?.value;
    Ok(Fidelity::from_ratio(achieved, ideal))
}

/// Marginal AIGs of a Gaussian triple, used by the separability property.
pub fn marginal_gains(
    a: &KnowledgeState,
    b: &KnowledgeState,
    o: &KnowledgeState,
) -> Result<Vec<InfoQuantity>> {
    let (Distribution::Gaussian(x), Distribution::Gaussian(y), Distribution::Gaussian(z)) =
        (&a.dist, &b.dist, &o.dist)
    else {
        return Err(AigError::Unsupported("marginals of non-Gaussian states".into()));
    };
    (0..x.dim())
        .map(|i| {
            let m = |g: &GaussianParams| GaussianParams::scalar(g.mean[i], g.cov[i][i]);
            distributions::aig_gaussian(&m(x), &m(y), &m(z))
        })
        .collect()
}
