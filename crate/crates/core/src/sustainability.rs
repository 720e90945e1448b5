//! Cognitive efficiency and the cost amortization argument: a costlier but
//! more faithful method B against a cheaper method C that needs more data
//! to reach the same AIG.

use serde::{Deserialize, Serialize};

use crate::error::{AigError, Result};
use crate::table::Table;
use crate::units::InfoQuantity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModel {
    pub facility_cost: f64,
    pub facility_fraction_b: f64,
    pub facility_fraction_c: f64,
    pub comp_cost_b: f64,
    pub comp_cost_c: f64,
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        for (field, f) in [
            ("facility_fraction_b", self.facility_fraction_b),
            ("facility_fraction_c", self.facility_fraction_c),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(AigError::param(field, "must lie in [0, 1]"));
            }
        }
        for (field, c) in [
            ("facility_cost", self.facility_cost),
            ("comp_cost_b", self.comp_cost_b),
            ("comp_cost_c", self.comp_cost_c),
        ] {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(AigError::param(field, "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    /// The same model with the roles of B and C exchanged.
    pub fn swapped(&self) -> Self {
        CostModel {
            facility_cost: self.facility_cost,
            facility_fraction_b: self.facility_fraction_c,
            facility_fraction_c: self.facility_fraction_b,
            comp_cost_b: self.comp_cost_c,
            comp_cost_c: self.comp_cost_b,
        }
    }
}

/// a_M in ε_M(d) = a_M ln |d|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingModel {
    pub a_b: f64,
    pub a_c: f64,
    pub d_b_size: f64,
}

impl ScalingModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_b > 0.0 && self.a_b.is_finite()) {
            return Err(AigError::param("a_b", "must be finite and > 0"));
        }
        if !(self.a_c > 0.0 && self.a_c.is_finite()) {
            return Err(AigError::param("a_c", "must be finite and > 0"));
        }
        if !(self.d_b_size >= 1.0 && self.d_b_size.is_finite()) {
            return Err(AigError::param("d_b_size", "must be finite and >= 1"));
        }
        Ok(())
    }

    /// f_C/f_B = |d_C|/|d_B| = |d_B|^{a_B/a_C − 1}.
    pub fn time_factor(&self) -> f64 {
        self.d_b_size.powf(self.a_b / self.a_c - 1.0)
    }
}

/// AIG per unit cost, in nits per currency unit.
pub fn cognitive_efficiency(aig: InfoQuantity, cost: f64) -> Result<f64> {
    if !(cost > 0.0) {
        return Err(AigError::param("cost", "must be > 0"));
    }
    Ok(aig.as_nits() / cost)
}

/// f_M C^facility + C_M^comp.
pub fn total_cost(model: &CostModel, method: Method) -> f64 {
    match method {
        Method::B => model.facility_fraction_b * model.facility_cost + model.comp_cost_b,
        Method::C => model.facility_fraction_c * model.facility_cost + model.comp_cost_c,
    }
}

/// B is more economic iff C_B^comp − C_C^comp < (f_C − f_B) C^facility.
pub fn prefers_b(model: &CostModel) -> bool {
    model.comp_cost_b - model.comp_cost_c
        < (model.facility_fraction_c - model.facility_fraction_b) * model.facility_cost
}

/// |d_C| = |d_B|^{a_B/a_C}, real-valued.
pub fn matched_data_size(model: &ScalingModel) -> Result<f64> {
    model.validate()?;
    Ok(model.d_b_size.powf(model.a_b / model.a_c))
}

/// Largest extra computing cost of B that the saved facility time pays for:
/// (|d_B|^{a_B/a_C − 1} − 1) f_B C^facility.
pub fn amortization_threshold(scaling: &ScalingModel, f_b: f64, facility_cost: f64) -> Result<f64> {
    scaling.validate()?;
    threshold_from_factor(scaling.time_factor(), f_b, facility_cost)
}

fn threshold_from_factor(factor: f64, f_b: f64, facility_cost: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f_b) {
        return Err(AigError::param("f_b", "must lie in [0, 1]"));
    }
    if !(facility_cost >= 0.0 && facility_cost.is_finite()) {
        return Err(AigError::param("facility_cost", "must be finite and >= 0"));
    }
    Ok((factor - 1.0) * f_b * facility_cost)
}

/// Facility-scenario inputs. `quoted_*` are the rounded intermediates used
/// in the published arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub scaling: ScalingModel,
    pub facility_cost: f64,
    pub facility_days_b: f64,
    pub days_per_decade: f64,
    pub quoted_time_factor: f64,
    pub quoted_f_b: f64,
}

impl Scenario {
    /// 10⁹ for a decade of operation, |d_B| = 10 taken in one day, a_B = 1.2 a_C.
    pub fn paper() -> Self {
        Scenario {
            scaling: ScalingModel {
                a_b: 1.2,
                a_c: 1.0,
                d_b_size: 10.0,
            },
            facility_cost: 1e9,
            facility_days_b: 1.0,
            days_per_decade: 3652.5,
            quoted_time_factor: 1.5,
            quoted_f_b: 0.27e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scaling.validate()?;
        if !(self.days_per_decade > 0.0) {
            return Err(AigError::param("days_per_decade", "must be > 0"));
        }
        if !(self.facility_days_b >= 0.0 && self.facility_days_b <= self.days_per_decade) {
            return Err(AigError::param("facility_days_b", "must lie in [0, days_per_decade]"));
        }
        if !(self.quoted_time_factor >= 1.0) {
            return Err(AigError::param("quoted_time_factor", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.quoted_f_b) {
            return Err(AigError::param("quoted_f_b", "must lie in [0, 1]"));
        }
        if !(self.facility_cost >= 0.0 && self.facility_cost.is_finite()) {
            return Err(AigError::param("facility_cost", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn f_b(&self) -> f64 {
        self.facility_days_b / self.days_per_decade
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub matched_data_size: f64,
    pub exact_time_factor: f64,
    pub exact_f_b: f64,
    pub exact_threshold: f64,
    pub rounded_time_factor: f64,
    pub rounded_f_b: f64,
    pub rounded_threshold: f64,
}

pub fn scenario_report(sc: &Scenario) -> Result<ScenarioReport> {
    sc.validate()?;
    Ok(ScenarioReport {
        matched_data_size: matched_data_size(&sc.scaling)?,
        exact_time_factor: sc.scaling.time_factor(),
        exact_f_b: sc.f_b(),
        exact_threshold: amortization_threshold(&sc.scaling, sc.f_b(), sc.facility_cost)?,
        rounded_time_factor: sc.quoted_time_factor,
        rounded_f_b: sc.quoted_f_b,
        rounded_threshold: threshold_from_factor(sc.quoted_time_factor, sc.quoted_f_b, sc.facility_cost)?,
    })
}

pub fn scenario_table(r: &ScenarioReport) -> Table {
    let mut t = Table::new(["arithmetic", "time_factor", "f_b", "matched_data_size", "threshold"]);
    t.push(vec![
        "rounded".into(),
        r.rounded_time_factor.into(),
        r.rounded_f_b.into(),
        r.matched_data_size.into(),
        r.rounded_threshold.into(),
    ]);
    t.push(vec![
        "exact".into(),
        r.exact_time_factor.into(),
        r.exact_f_b.into(),
        r.matched_data_size.into(),
        r.exact_threshold.into(),
    ]);
    t
}
