//! Gaussian imperfect updates: the (t, u) path between initial and ideal
//! state, the optimal uncertainty inflation, the mean-field study, and the
//! figure grids built from them.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{aig_bernoulli, aig_poisson, kl_bernoulli, kl_poisson, GaussianParams};
use crate::error::{AigError, Result};
use crate::linalg::{check_symmetric, sym_pow, symmetrize};
use crate::measures::{AigReport, Fidelity};
use crate::table::{Cell, Table};
use crate::units::{InfoQuantity, Unit};

/// D_A = r² D_0 and Δ_0ᵀ D_0⁻¹ Δ_0 = n χ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathScenario {
    pub r: f64,
    pub chi2: f64,
    pub n: u32,
}

impl PathScenario {
    pub fn new(r: f64, chi2: f64, n: u32) -> Result<Self> {
        let sc = PathScenario { r, chi2, n };
        sc.validate()?;
        Ok(sc)
    }

    /// The scenario with the largest possible AIG of −n ln r, reached when
    /// χ² = 1 − r².
    pub fn balanced(r: f64, n: u32) -> Result<Self> {
        Self::new(r, 1.0 - r * r, n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(AigError::param("r", "must lie in (0, 1]"));
        }
        if !(self.chi2 >= 0.0) || !self.chi2.is_finite() {
            return Err(AigError::param("chi2", "must be finite and >= 0"));
        }
        if self.n < 1 {
            return Err(AigError::param("n", "must be at least 1"));
        }
        Ok(())
    }

    /// Explicit (A, 0) pair: D_0 = 1, m_0 = 0, m_A = √χ²·(1, …, 1).
    pub fn endpoints(&self) -> (GaussianParams, GaussianParams) {
        let n = self.n as usize;
        let o = GaussianParams::from_nalgebra(&DVector::zeros(n), &DMatrix::identity(n, n));
        let a = GaussianParams::from_nalgebra(
            &DVector::from_element(n, self.chi2.sqrt()),
            &(DMatrix::identity(n, n) * (self.r * self.r)),
        );
        (a, o)
    }

    /// (A, B(t, u), 0) as explicit Gaussian parameters.
    pub fn states(&self, t: f64, u: f64) -> Result<(GaussianParams, GaussianParams, GaussianParams)> {
        let (a, o) = self.endpoints();
        let b = interpolate_path(t, u, &a, &o)?;
        Ok((a, b, o))
    }
}

/// m_B = t m_A + (1−t) m_0 and D_B = D_A^{u/2} D_0^{1−u} D_A^{u/2}.
pub fn interpolate_path(
    t: f64,
    u: f64,
    a: &GaussianParams,
    o: &GaussianParams,
) -> Result<GaussianParams> {
    if a.dim() != o.dim() {
        return Err(AigError::SupportMismatch("gaussian dimensions differ".into()));
    }
    let (da, d0) = (a.cov_mat(), o.cov_mat());
    check_symmetric(&da, "D_A")?;
    check_symmetric(&d0, "D_0")?;
    let half = sym_pow(&da, 0.5 * u);
    let db = symmetrize(&(&half * sym_pow(&d0, 1.0 - u) * &half));
    let mb = a.mean_vec() * t + o.mean_vec() * (1.0 - t);
    Ok(GaussianParams::from_nalgebra(&mb, &db))
}

/// AIG along the path, in nits:
/// (n/2)[−2u ln r − r^{2−2u} + r² + (1 − (1−t)² r^{−2u}) χ²].
pub fn path_aig(t: f64, u: f64, sc: &PathScenario) -> InfoQuantity {
    let r = sc.r;
    let v = 0.5
        * sc.n as f64
        * (-2.0 * u * r.ln() - r.powf(2.0 - 2.0 * u)
            + r * r
            + (1.0 - (1.0 - t).powi(2) * r.powf(-2.0 * u)) * sc.chi2);
    InfoQuantity::nits(v)
}

/// The u maximising [`path_aig`] at fixed t: ln(r² + (1−t)²χ²)/ln r².
pub fn u_opt(t: f64, sc: &PathScenario) -> Result<f64> {
    sc.validate()?;
    if sc.r == 1.0 {
        return Err(AigError::InvalidArgument(
            "u_opt is undefined for r = 1".into(),
        ));
    }
    let r2 = sc.r * sc.r;
    Ok((r2 + (1.0 - t).powi(2) * sc.chi2).ln() / r2.ln())
}

/// D_A = σ_A²((1, c), (c, 1)), D_B = diag(D_A), m_B = m_A = Δ_0, D_0 = 1, m_0 = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanFieldScenario {
    pub sigma_a2: f64,
    pub c: f64,
    #[serde(default)]
    pub delta0: [f64; 2],
}

impl MeanFieldScenario {
    pub fn new(sigma_a2: f64, c: f64, delta0: [f64; 2]) -> Result<Self> {
        let sc = MeanFieldScenario { sigma_a2, c, delta0 };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_a2 > 0.0 && self.sigma_a2 < 1.0) {
            return Err(AigError::param("sigma_a2", "must lie in (0, 1)"));
        }
        if !(self.c.abs() < 1.0) {
            return Err(AigError::param("c", "must satisfy |c| < 1"));
        }
        if self.delta0.iter().any(|d| !d.is_finite()) {
            return Err(AigError::param("delta0", "must be finite"));
        }
        Ok(())
    }

    pub fn states(&self) -> (GaussianParams, GaussianParams, GaussianParams) {
        let s = self.sigma_a2;
        let m = self.delta0.to_vec();
        let a = GaussianParams::new(m.clone(), vec![vec![s, self.c * s], vec![self.c * s, s]]);
        let b = GaussianParams::new(m, vec![vec![s, 0.0], vec![0.0, s]]);
        let o = GaussianParams::new(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        (a, b, o)
    }
}

/// Gains of the mean-field update; ideal = remaining + apparent holds exactly here.
pub fn mean_field_report(sc: &MeanFieldScenario) -> Result<AigReport> {
    sc.validate()?;
    let s = sc.sigma_a2;
    let shift = 0.5 * (sc.delta0[0].powi(2) + sc.delta0[1].powi(2));
    let remaining = correlation_loss(sc.c);
    let apparent = -s.ln() + s - 1.0 + shift;
    let ideal = apparent + remaining;
    Ok(AigReport {
        ideal: InfoQuantity::nits(ideal),
        remaining: InfoQuantity::nits(remaining),
        apparent: InfoQuantity::nits(apparent),
        achieved: InfoQuantity::nits(apparent),
        fidelity: Fidelity::from_gains(ideal, remaining),
    })
}

/// −ln √(1 − c²): information lost by dropping a correlation c.
fn correlation_loss(c: f64) -> f64 {
    -0.5 * (-c * c).ln_1p()
}

/// [1 + (−ln √(1−c²)) / apparent]⁻¹.
pub fn mean_field_fidelity(c: f64, apparent_gain: InfoQuantity) -> Result<f64> {
    if !(c.abs() < 1.0) {
        return Err(AigError::param("c", "must satisfy |c| < 1"));
    }
    let g = apparent_gain.as_nits();
    if !(g > 0.0) {
        return Err(AigError::param("apparent_gain", "must be > 0"));
    }
    Ok(1.0 / (1.0 + correlation_loss(c) / g))
}

/// Inclusive grid lo, lo+step, …, hi built from integer offsets so that
/// values such as 1.0 are hit exactly.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| {
            if i == steps {
                hi
            } else {
                lo + (hi - lo) * i as f64 / steps as f64
            }
        })
        .collect()
}

/// `count` points between 10^lo and 10^hi, evenly spaced in the exponent.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
        .collect()
}

/// t, u ∈ [−0.5, 1.5] in steps of 0.01, as (i − 50)/100.
pub fn path_axis() -> Vec<f64> {
    (0..=200).map(|i| (i as f64 - 50.0) / 100.0).collect()
}

/// c ∈ [0, 0.999], crowded towards 1: c = 1 − 10^{−3k/(count−1)}.
pub fn correlation_axis(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                1.0 - 10f64.powf(-3.0 * k as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FigureSpec {
    /// Bernoulli gains as a function of p_0 for several p_B.
    BernoulliScan { p_a: f64, p_b: Vec<f64>, p0: Vec<f64> },
    /// Poisson gains per λ_A as a function of x_0 = λ_0/λ_A for several x_B.
    PoissonScan { lambda_a: f64, x_b: Vec<f64>, x0: Vec<f64> },
    /// Path gain against t for fixed u values (plus u_opt), and against u at t = 1.
    GaussianPath1d { scenario: PathScenario, u_curves: Vec<f64>, axis: Vec<f64> },
    /// Path gain on the full (t, u) grid.
    GaussianPath2d { scenario: PathScenario, t: Vec<f64>, u: Vec<f64> },
    /// Mean-field fidelity against c for apparent gains 2^i bit.
    MeanFieldCurves { exponents: Vec<i32>, c: Vec<f64> },
}

impl FigureSpec {
    pub fn bernoulli_default() -> Self {
        FigureSpec::BernoulliScan {
            p_a: 0.64,
            p_b: vec![0.1, 0.5, 0.6, 0.9],
            p0: (1..200).map(|i| i as f64 / 200.0).collect(),
        }
    }

    pub fn poisson_default() -> Self {
        FigureSpec::PoissonScan {
            lambda_a: 1.0,
            x_b: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            x0: log_grid(-2.0, 2.0, 201),
        }
    }

    pub fn path_scenario_default() -> PathScenario {
        PathScenario {
            r: 0.125,
            chi2: 1.0 - 0.125 * 0.125,
            n: 1,
        }
    }

    pub fn path_1d_default() -> Self {
        FigureSpec::GaussianPath1d {
            scenario: Self::path_scenario_default(),
            u_curves: vec![0.0, 0.5, 1.0],
            axis: path_axis(),
        }
    }

    pub fn path_2d_default() -> Self {
        FigureSpec::GaussianPath2d {
            scenario: Self::path_scenario_default(),
            t: path_axis(),
            u: path_axis(),
        }
    }

    pub fn mean_field_default() -> Self {
        FigureSpec::MeanFieldCurves {
            exponents: (-10..=10).collect(),
            c: correlation_axis(301),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = |field: &str, v: &[f64]| -> Result<()> {
            if v.iter().all(|p| (0.0..=1.0).contains(p)) && !v.is_empty() {
                Ok(())
            } else {
                Err(AigError::param(field, "must be a nonempty list of probabilities"))
            }
        };
        let positive = |field: &str, v: &[f64]| -> Result<()> {
            if v.iter().all(|x| *x > 0.0 && x.is_finite()) && !v.is_empty() {
                Ok(())
            } else {
                Err(AigError::param(field, "must be a nonempty list of positive values"))
            }
        };
        let finite = |field: &str, v: &[f64]| -> Result<()> {
            if v.iter().all(|x| x.is_finite()) && !v.is_empty() {
                Ok(())
            } else {
                Err(AigError::param(field, "must be a nonempty list of finite values"))
            }
        };
        match self {
            FigureSpec::BernoulliScan { p_a, p_b, p0 } => {
                probs("p_a", &[*p_a])?;
                probs("p_b", p_b)?;
                probs("p0", p0)
            }
            FigureSpec::PoissonScan { lambda_a, x_b, x0 } => {
                positive("lambda_a", &[*lambda_a])?;
                positive("x_b", x_b)?;
                positive("x0", x0)
            }
            FigureSpec::GaussianPath1d { scenario, u_curves, axis } => {
                scenario.validate()?;
                finite("u_curves", u_curves)?;
                finite("axis", axis)
            }
            FigureSpec::GaussianPath2d { scenario, t, u } => {
                scenario.validate()?;
                finite("t", t)?;
                finite("u", u)
            }
            FigureSpec::MeanFieldCurves { exponents, c } => {
                if exponents.is_empty() {
                    return Err(AigError::param("exponents", "must be nonempty"));
                }
                if c.is_empty() || c.iter().any(|c| !(c.abs() < 1.0)) {
                    return Err(AigError::param("c", "must be a nonempty list with |c| < 1"));
                }
                Ok(())
            }
        }
    }
}

/// Evaluates a figure's data grid. Rows are computed in parallel and kept
/// in grid order.
pub fn figure_grid(spec: &FigureSpec, unit: Unit) -> Result<Table> {
    spec.validate()?;
    let sfx = unit.suffix();
    let q = |v: f64| Cell::Num(InfoQuantity::nits(v).to(unit).value);
    match spec {
        FigureSpec::BernoulliScan { p_a, p_b, p0 } => {
            let mut t = Table::new([
                "p_a".to_string(),
                "p_b".into(),
                "p_0".into(),
                format!("achieved_{sfx}"),
                format!("apparent_{sfx}"),
                format!("ideal_{sfx}"),
                format!("remaining_{sfx}"),
                "fidelity".into(),
            ]);
            let pairs: Vec<(f64, f64)> =
                p_b.iter().flat_map(|b| p0.iter().map(move |o| (*b, *o))).collect();
            let rows: Result<Vec<Vec<Cell>>> = pairs
                .par_iter()
                .map(|&(pb, po)| {
                    let achieved = aig_bernoulli(*p_a, pb, po)?.value;
                    let apparent = kl_bernoulli(pb, po)?.value;
                    let ideal = kl_bernoulli(*p_a, po)?.value;
                    let remaining = kl_bernoulli(*p_a, pb)?.value;
                    Ok(vec![
                        Cell::Num(*p_a),
                        Cell::Num(pb),
                        Cell::Num(po),
                        q(achieved),
                        q(apparent),
                        q(ideal),
                        q(remaining),
                        Fidelity::from_gains(ideal, remaining).into(),
                    ])
                })
                .collect();
            t.rows = rows?;
            Ok(t)
        }
        FigureSpec::PoissonScan { lambda_a, x_b, x0 } => {
            let mut t = Table::new([
                "lambda_a".to_string(),
                "x_b".into(),
                "x_0".into(),
                format!("achieved_per_lambda_a_{sfx}"),
                format!("apparent_per_lambda_a_{sfx}"),
                "fidelity".into(),
            ]);
            let la = *lambda_a;
            let pairs: Vec<(f64, f64)> =
                x_b.iter().flat_map(|b| x0.iter().map(move |o| (*b, *o))).collect();
            let rows: Result<Vec<Vec<Cell>>> = pairs
                .par_iter()
                .map(|&(xb, xo)| {
                    let (lb, lo) = (xb * la, xo * la);
                    let achieved = aig_poisson(la, lb, lo)?.value;
                    let apparent = kl_poisson(lb, lo)?.value;
                    let ideal = kl_poisson(la, lo)?.value;
                    let remaining = kl_poisson(la, lb)?.value;
                    Ok(vec![
                        Cell::Num(la),
                        Cell::Num(xb),
                        Cell::Num(xo),
                        q(achieved / la),
                        q(apparent / la),
                        Fidelity::from_gains(ideal, remaining).into(),
                    ])
                })
                .collect();
            t.rows = rows?;
            Ok(t)
        }
        FigureSpec::GaussianPath1d { scenario, u_curves, axis } => {
            let mut t = Table::new([
                "panel".to_string(),
                "series".into(),
                "t".into(),
                "u".into(),
                format!("achieved_{sfx}"),
            ]);
            let optimal = scenario.r < 1.0;
            for &u in u_curves {
                for &tv in axis {
                    let v = path_aig(tv, u, scenario).value;
                    t.push(vec!["mean".into(), format!("u={u}").into(), tv.into(), u.into(), q(v)]);
                }
            }
            if optimal {
                for &tv in axis {
                    let u = u_opt(tv, scenario)?;
                    let v = path_aig(tv, u, scenario).value;
                    t.push(vec!["mean".into(), "u_opt".into(), tv.into(), u.into(), q(v)]);
                }
            }
            for &u in axis {
                let v = path_aig(1.0, u, scenario).value;
                t.push(vec!["variance".into(), "t=1".into(), 1.0.into(), u.into(), q(v)]);
            }
            Ok(t)
        }
        FigureSpec::GaussianPath2d { scenario, t: ts, u: us } => {
            let mut t = Table::new([
                "t".to_string(),
                "u".into(),
                format!("achieved_{sfx}"),
            ]);
            let rows: Vec<Vec<Cell>> = ts
                .par_iter()
                .flat_map_iter(|&tv| {
                    us.iter().map(move |&u| {
                        vec![tv.into(), u.into(), q(path_aig(tv, u, scenario).value)]
                    })
                })
                .collect();
            t.rows = rows;
            Ok(t)
        }
        FigureSpec::MeanFieldCurves { exponents, c } => {
            let mut t = Table::new([
                "i".to_string(),
                format!("apparent_{sfx}"),
                "c".into(),
                format!("remaining_{sfx}"),
                "fidelity".into(),
            ]);
            for &i in exponents {
                let apparent = InfoQuantity::bits(2f64.powi(i));
                for &cv in c {
                    let f = mean_field_fidelity(cv, apparent)?;
                    t.push(vec![
                        Cell::Int(i as i64),
                        Cell::Num(apparent.to(unit).value),
                        cv.into(),
                        q(correlation_loss(cv)),
                        f.into(),
                    ]);
                }
            }
            Ok(t)
        }
    }
}
