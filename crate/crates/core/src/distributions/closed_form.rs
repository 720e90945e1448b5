//! Closed-form AIG and KL expressions per family. All results in nits.

use nalgebra::{DMatrix, DVector};

use super::{BetaParams, Distribution, GaussianParams};
use crate::error::{AigError, Result};
use crate::linalg::Factor;
use crate::special::{digamma, ln_beta};
use crate::units::InfoQuantity;

/// Accumulates Σ w·(ln P_b − ln P_o) with the sentinel rules:
/// zero weight contributes nothing, ln P_b = −∞ pushes towards −∞,
/// ln P_o = −∞ towards +∞, both at once is indeterminate.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct GainSum {
    finite: f64,
    comp: f64,
    pos: bool,
    neg: bool,
}

impl GainSum {
    pub(crate) fn add(&mut self, w: f64, ln_b: f64, ln_o: f64) -> Result<()> {
        if w == 0.0 {
            return Ok(());
        }
        match (ln_b == f64::NEG_INFINITY, ln_o == f64::NEG_INFINITY) {
            (true, true) => Err(AigError::Indeterminate(
                "both compared states assign zero probability to a possible outcome".into(),
            )),
            (true, false) => {
                self.neg = true;
                Ok(())
            }
            (false, true) => {
                self.pos = true;
                Ok(())
            }
            (false, false) => {
                self.push(w * (ln_b - ln_o));
                Ok(())
            }
        }
    }

    // Neumaier compensated addition
    fn push(&mut self, x: f64) {
        let t = self.finite + x;
        if self.finite.abs() >= x.abs() {
            self.comp += (self.finite - t) + x;
        } else {
            self.comp += (x - t) + self.finite;
        }
        self.finite = t;
    }

    pub(crate) fn finish(self) -> Result<f64> {
        match (self.pos, self.neg) {
            (true, true) => Err(AigError::Indeterminate(
                "gain has both +inf and -inf contributions".into(),
            )),
            (true, false) => Ok(f64::INFINITY),
            (false, true) => Ok(f64::NEG_INFINITY),
            (false, false) => Ok(self.finite + self.comp),
        }
    }
}

fn check_prob(field: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(AigError::param(field, format!("must lie in [0, 1], got {p}")))
    }
}

fn check_rate(field: &str, l: f64) -> Result<()> {
    if l > 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(AigError::param(field, format!("must be positive, got {l}")))
    }
}

/// p_A ln(p_B/p_0) + (1 − p_A) ln((1 − p_B)/(1 − p_0)), p = P(s = 0).
pub fn aig_bernoulli(pa: f64, pb: f64, p0: f64) -> Result<InfoQuantity> {
    check_prob("p_A", pa)?;
    check_prob("p_B", pb)?;
    check_prob("p_0", p0)?;
    let mut g = GainSum::default();
    g.add(pa, pb.ln(), p0.ln())?;
    g.add(1.0 - pa, (-pb).ln_1p(), (-p0).ln_1p())?;
    g.finish().map(InfoQuantity::nits)
}

pub fn kl_bernoulli(pa: f64, pb: f64) -> Result<InfoQuantity> {
    check_prob("p_A", pa)?;
    check_prob("p_B", pb)?;
    let mut g = GainSum::default();
    g.add(pa, pa.ln(), pb.ln())?;
    g.add(1.0 - pa, (-pa).ln_1p(), (-pb).ln_1p())?;
    g.finish().map(InfoQuantity::nits)
}

/// n times the Bernoulli gain; avoids the factorials of the direct sum.
pub fn aig_binomial(n: u64, pa: f64, pb: f64, p0: f64) -> Result<InfoQuantity> {
    if n < 1 {
        return Err(AigError::param("n", "must be at least 1"));
    }
    let per_trial = aig_bernoulli(pa, pb, p0)?.value;
    Ok(InfoQuantity::nits(n as f64 * per_trial))
}

/// λ_A ln(λ_B/λ_0) − λ_B + λ_0.
pub fn aig_poisson(la: f64, lb: f64, l0: f64) -> Result<InfoQuantity> {
    check_rate("lambda_A", la)?;
    check_rate("lambda_B", lb)?;
    check_rate("lambda_0", l0)?;
    Ok(InfoQuantity::nits(la * (lb.ln() - l0.ln()) + (l0 - lb)))
}

pub fn kl_poisson(la: f64, lb: f64) -> Result<InfoQuantity> {
    check_rate("lambda_A", la)?;
    check_rate("lambda_B", lb)?;
    Ok(InfoQuantity::nits(la * (la.ln() - lb.ln()) + (lb - la)))
}

fn check_beta(p: &BetaParams) -> Result<()> {
    Distribution::Beta(*p).validate()
}

/// Beta AIG using ⟨ln f⟩ = ψ(a) − ψ(a + b) under Alice's state.
pub fn aig_beta(a: &BetaParams, b: &BetaParams, o: &BetaParams) -> Result<InfoQuantity> {
    check_beta(a)?;
    check_beta(b)?;
    check_beta(o)?;
    let psi_sum = digamma(a.a() + a.b());
    let e_ln_f = digamma(a.a()) - psi_sum;
    let e_ln_1mf = digamma(a.b()) - psi_sum;
    let v = (b.n0 - o.n0) * e_ln_f
        + (b.n1 - o.n1) * e_ln_1mf
        + (ln_beta(o.a(), o.b()) - ln_beta(b.a(), b.b()));
    Ok(InfoQuantity::nits(v))
}

pub fn kl_beta(a: &BetaParams, b: &BetaParams) -> Result<InfoQuantity> {
    check_beta(a)?;
    check_beta(b)?;
    let (a1, a2, b1, b2) = (a.a(), a.b(), b.a(), b.b());
    let v = ln_beta(b1, b2) - ln_beta(a1, a2)
        + (a1 - b1) * digamma(a1)
        + (a2 - b2) * digamma(a2)
        + (b1 - a1 + b2 - a2) * digamma(a1 + a2);
    Ok(InfoQuantity::nits(v))
}

/// The three terms of the Gaussian AIG: log-determinant (I), trace (II) and
/// mean-shift (III) parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianAigTerms {
    pub log_det: f64,
    pub trace: f64,
    pub mean_shift: f64,
}

impl GaussianAigTerms {
    pub fn total(&self) -> f64 {
        self.log_det + self.trace + self.mean_shift
    }
}

fn same_dim(a: &GaussianParams, others: &[&GaussianParams]) -> Result<()> {
    for o in others {
        if o.dim() != a.dim() {
            return Err(AigError::SupportMismatch(format!(
                "gaussian dimensions {} vs {}",
                a.dim(),
                o.dim()
            )));
        }
    }
    Ok(())
}

pub fn aig_gaussian_terms(
    a: &GaussianParams,
    b: &GaussianParams,
    o: &GaussianParams,
) -> Result<GaussianAigTerms> {
    same_dim(a, &[b, o])?;
    a.factor("D_A")?;
    let fb = b.factor("D_B")?;
    let fo = o.factor("D_0")?;
    let da = a.cov_mat();
    let ma = a.mean_vec();
    let delta_b = &ma - b.mean_vec();
    let delta_o = &ma - o.mean_vec();
    Ok(GaussianAigTerms {
        log_det: 0.5 * (fo.log_det - fb.log_det),
        trace: 0.5 * (fo.trace_solve(&da) - fb.trace_solve(&da)),
        mean_shift: 0.5 * (fo.inv_quad(&delta_o) - fb.inv_quad(&delta_b)),
    })
}

/// ½ln(|D_0|/|D_B|) + ½Tr[(D_0⁻¹ − D_B⁻¹)D_A] + ½(Δ_0ᵀD_0⁻¹Δ_0 − Δ_BᵀD_B⁻¹Δ_B).
pub fn aig_gaussian(
    a: &GaussianParams,
    b: &GaussianParams,
    o: &GaussianParams,
) -> Result<InfoQuantity> {
    aig_gaussian_terms(a, b, o).map(|t| InfoQuantity::nits(t.total()))
}

pub fn kl_gaussian(a: &GaussianParams, b: &GaussianParams) -> Result<InfoQuantity> {
    same_dim(a, &[b])?;
    let fa = a.factor("D_A")?;
    let fb = b.factor("D_B")?;
    let delta = a.mean_vec() - b.mean_vec();
    let n = a.dim() as f64;
    let v = 0.5 * (fb.trace_solve(&a.cov_mat()) - n + fb.inv_quad(&delta) + fb.log_det - fa.log_det);
    Ok(InfoQuantity::nits(v))
}

/// D_A + Δ_B Δ_Bᵀ, the covariance maximising the AIG for a fixed mean error.
pub fn optimal_posterior_covariance(
    da: &DMatrix<f64>,
    delta_b: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    Factor::new(da, "D_A")?;
    if delta_b.len() != da.nrows() {
        return Err(AigError::SupportMismatch(format!(
            "Δ_B has length {}, D_A is {}x{}",
            delta_b.len(),
            da.nrows(),
            da.ncols()
        )));
    }
    Ok(da + delta_b * delta_b.transpose())
}
