//! Experiment configuration: presets, JSON config files and flags merged in
//! that order, then checked as a whole.

use std::fmt;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::grammar::parse_state;
use crate::sequential::{ENSEMBLE_RUNS, ENSEMBLE_SEED};
use crate::sustainability::Scenario;
use crate::units::Unit;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = ENSEMBLE_SEED;
/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "AIG_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Eval,
    BernoulliScan,
    PoissonScan,
    GaussianPath,
    MeanField,
    IncompleteData,
    ExpectedAig,
    Scenario,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Eval,
        Experiment::BernoulliScan,
        Experiment::PoissonScan,
        Experiment::GaussianPath,
        Experiment::MeanField,
        Experiment::IncompleteData,
        Experiment::ExpectedAig,
        Experiment::Scenario,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Eval => "eval",
            Experiment::BernoulliScan => "bernoulli-scan",
            Experiment::PoissonScan => "poisson-scan",
            Experiment::GaussianPath => "gaussian-path",
            Experiment::MeanField => "mean-field",
            Experiment::IncompleteData => "incomplete-data",
            Experiment::ExpectedAig => "expected-aig",
            Experiment::Scenario => "scenario",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    fn valid_list() -> String {
        Self::ALL.map(|e| e.name()).join(", ")
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub struct Preset {
    pub name: &'static str,
    pub experiment: Experiment,
    pub params: Value,
    pub unit: Unit,
}

pub fn presets() -> Vec<Preset> {
    let p = |name, experiment, params, unit| Preset {
        name,
        experiment,
        params,
        unit,
    };
    vec![
        p("fig1", Experiment::BernoulliScan, json!({}), Unit::Bit),
        p("fig1-poisson", Experiment::PoissonScan, json!({}), Unit::Bit),
        p("fig2", Experiment::GaussianPath, json!({ "grid": "1d" }), Unit::Bit),
        p("fig3", Experiment::GaussianPath, json!({ "grid": "2d" }), Unit::Bit),
        p("fig4", Experiment::MeanField, json!({ "mode": "curves" }), Unit::Bit),
        p("fig5", Experiment::IncompleteData, json!({}), Unit::Nit),
        p("paper", Experiment::Scenario, json!({}), Unit::Nit),
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Aig,
    Kl,
    Report,
    AlphaAig,
    Ami,
    #[serde(alias = "cross-entropy")]
    Ce,
    Attention,
    AttentionFidelity,
}

impl Measure {
    fn needs(self) -> (bool, bool) {
        // (b, o)
        match self {
            Measure::Kl | Measure::Ami | Measure::Ce => (true, false),
            _ => (true, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalParams {
    pub measure: Measure,
    pub a: Option<Value>,
    pub b: Option<Value>,
    pub o: Option<Value>,
    pub alpha: Option<f64>,
    pub weights: Option<Vec<f64>>,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            measure: Measure::Aig,
            a: None,
            b: None,
            o: None,
            alpha: None,
            weights: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BernoulliScanParams {
    pub p_a: f64,
    pub p_b: Vec<f64>,
    /// p_0 = i/p0_steps for i = 1..p0_steps−1
    pub p0_steps: usize,
}

impl Default for BernoulliScanParams {
    fn default() -> Self {
        BernoulliScanParams {
            p_a: 0.64,
            p_b: vec![0.1, 0.5, 0.6, 0.9],
            p0_steps: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonScanParams {
    pub lambda_a: f64,
    pub x_b: Vec<f64>,
    pub x0_min_log10: f64,
    pub x0_max_log10: f64,
    pub x0_points: usize,
}

impl Default for PoissonScanParams {
    fn default() -> Self {
        PoissonScanParams {
            lambda_a: 1.0,
            x_b: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            x0_min_log10: -2.0,
            x0_max_log10: 2.0,
            x0_points: 201,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathGrid {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Chi2 {
    Value(f64),
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianPathParams {
    pub r: f64,
    /// A number, or "auto" for 1 − r².
    pub chi2: Chi2,
    pub n: u32,
    pub grid: PathGrid,
    pub u_curves: Vec<f64>,
}

impl Default for GaussianPathParams {
    fn default() -> Self {
        GaussianPathParams {
            r: 0.125,
            chi2: Chi2::Word("auto".into()),
            n: 1,
            grid: PathGrid::TwoD,
            u_curves: vec![0.0, 0.5, 1.0],
        }
    }
}

impl GaussianPathParams {
    pub fn chi2_value(&self) -> Option<f64> {
        match &self.chi2 {
            Chi2::Value(v) => Some(*v),
            Chi2::Word(w) if w == "auto" => Some(1.0 - self.r * self.r),
            Chi2::Word(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanFieldMode {
    Curves,
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanFieldParams {
    pub mode: MeanFieldMode,
    pub sigma_a2: Option<f64>,
    pub c: Option<f64>,
    pub delta0: [f64; 2],
    pub exponent_min: i32,
    pub exponent_max: i32,
    pub c_points: usize,
}

impl Default for MeanFieldParams {
    fn default() -> Self {
        MeanFieldParams {
            mode: MeanFieldMode::Curves,
            sigma_a2: None,
            c: None,
            delta0: [0.0, 0.0],
            exponent_min: -10,
            exponent_max: 10,
            c_points: 301,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncompleteDataParams {
    pub r_a: usize,
    pub sigma_s: f64,
    pub sigma_n: f64,
    /// 1 writes the single trajectory; more writes ensemble statistics.
    pub runs: usize,
}

impl Default for IncompleteDataParams {
    fn default() -> Self {
        IncompleteDataParams {
            r_a: 1 << 20,
            sigma_s: 1.0,
            sigma_n: 1.0,
            runs: ENSEMBLE_RUNS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builder {
    /// conjugate posterior
    Exact,
    /// no update at all
    Prior,
    /// conjugate variance with the mean shifted by `mean_offset`
    Damaged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpectedAigParams {
    pub pairs: usize,
    pub sigma_s: f64,
    pub sigma_n: f64,
    pub measurements: usize,
    pub builder: Builder,
    pub mean_offset: f64,
}

impl Default for ExpectedAigParams {
    fn default() -> Self {
        ExpectedAigParams {
            pairs: 100_000,
            sigma_s: 1.0,
            sigma_n: 1.0,
            measurements: 1,
            builder: Builder::Exact,
            mean_offset: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Eval(EvalParams),
    BernoulliScan(BernoulliScanParams),
    PoissonScan(PoissonScanParams),
    GaussianPath(GaussianPathParams),
    MeanField(MeanFieldParams),
    IncompleteData(IncompleteDataParams),
    ExpectedAig(ExpectedAigParams),
    Scenario(Scenario),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: Params,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub unit: Unit,
    pub plot: bool,
}

/// Top level of a JSON config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<String>,
    pub preset: Option<String>,
    #[serde(default)]
    pub params: Map<String, Value>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub unit: Option<String>,
    pub plot: Option<bool>,
}

/// Everything the command line supplied, before merging.
#[derive(Debug, Clone, Default)]
pub struct Request {
    pub experiment: Option<String>,
    pub preset: Option<String>,
    pub config: Option<PathBuf>,
    pub params: Map<String, Value>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub unit: Option<String>,
    pub plot: bool,
}

/// Recursive object merge; `over` wins.
pub fn merge(base: &mut Map<String, Value>, over: &Map<String, Value>) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(Value::Object(b)), Value::Object(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

fn typed<T: DeserializeOwned>(map: &Map<String, Value>, diags: &mut Vec<String>) -> Option<T> {
    match serde_json::from_value(Value::Object(map.clone())) {
        Ok(v) => Some(v),
        Err(e) => {
            diags.push(format!("params: {e}"));
            None
        }
    }
}

fn need(diags: &mut Vec<String>, ok: bool, field: &str, reason: &str) {
    if !ok {
        diags.push(format!("{field}: {reason}"));
    }
}

fn check_prob(diags: &mut Vec<String>, field: &str, p: f64) {
    need(diags, (0.0..=1.0).contains(&p), field, "must lie in [0, 1]");
}

fn check_positive(diags: &mut Vec<String>, field: &str, v: f64) {
    need(diags, v > 0.0 && v.is_finite(), field, "must be finite and > 0");
}

fn check_params(params: &Params, diags: &mut Vec<String>) {
    match params {
        Params::Eval(p) => {
            let (nb, no) = p.measure.needs();
            for (name, spec, needed) in [("a", &p.a, true), ("b", &p.b, nb), ("o", &p.o, no)] {
                match spec {
                    Some(v) => {
                        if let Err(e) = parse_state(v) {
                            diags.push(format!("{name}: {e}"));
                        }
                    }
                    None if needed => diags.push(format!("{name}: state required for this measure")),
                    None => {}
                }
            }
            if p.measure == Measure::AlphaAig {
                match p.alpha {
                    Some(a) if a.is_finite() && a != 1.0 => {}
                    _ => diags.push("alpha: required, finite and different from 1".into()),
                }
            }
            if let Some(w) = &p.weights {
                need(
                    diags,
                    w.iter().all(|x| *x >= 0.0 && x.is_finite()) && w.iter().any(|x| *x > 0.0),
                    "weights",
                    "must be finite, >= 0 and not all zero",
                );
            }
        }
        Params::BernoulliScan(p) => {
            check_prob(diags, "p_a", p.p_a);
            need(diags, !p.p_b.is_empty(), "p_b", "must be nonempty");
            for v in &p.p_b {
                check_prob(diags, "p_b", *v);
            }
            need(diags, p.p0_steps >= 2, "p0_steps", "must be at least 2");
        }
        Params::PoissonScan(p) => {
            check_positive(diags, "lambda_a", p.lambda_a);
            need(diags, !p.x_b.is_empty(), "x_b", "must be nonempty");
            for v in &p.x_b {
                check_positive(diags, "x_b", *v);
            }
            need(
                diags,
                p.x0_min_log10 < p.x0_max_log10,
                "x0_min_log10",
                "must be below x0_max_log10",
            );
            need(diags, p.x0_points >= 2, "x0_points", "must be at least 2");
        }
        Params::GaussianPath(p) => {
            need(diags, p.r > 0.0 && p.r <= 1.0, "r", "must lie in (0, 1]");
            match p.chi2_value() {
                Some(c) => need(diags, c >= 0.0 && c.is_finite(), "chi2", "must be finite and >= 0"),
                None => diags.push("chi2: must be a number or \"auto\"".into()),
            }
            need(diags, p.n >= 1, "n", "must be at least 1");
            for u in &p.u_curves {
                need(diags, u.is_finite(), "u_curves", "must be finite");
            }
        }
        Params::MeanField(p) => {
            need(diags, p.exponent_min <= p.exponent_max, "exponent_min", "must not exceed exponent_max");
            need(diags, p.c_points >= 2, "c_points", "must be at least 2");
            if p.mode == MeanFieldMode::Report {
                match p.sigma_a2 {
                    Some(s) => need(diags, s > 0.0 && s < 1.0, "sigma_a2", "must lie in (0, 1)"),
                    None => diags.push("sigma_a2: required in report mode".into()),
                }
                match p.c {
                    Some(c) => need(diags, c.abs() < 1.0, "c", "must satisfy |c| < 1"),
                    None => diags.push("c: required in report mode".into()),
                }
            }
        }
        Params::IncompleteData(p) => {
            need(diags, p.r_a >= 1, "r_a", "must be at least 1");
            check_positive(diags, "sigma_s", p.sigma_s);
            check_positive(diags, "sigma_n", p.sigma_n);
            need(diags, p.runs >= 1, "runs", "must be at least 1");
        }
        Params::ExpectedAig(p) => {
            need(diags, p.pairs >= 2, "pairs", "must be at least 2");
            check_positive(diags, "sigma_s", p.sigma_s);
            check_positive(diags, "sigma_n", p.sigma_n);
            need(diags, p.mean_offset.is_finite(), "mean_offset", "must be finite");
        }
        Params::Scenario(s) => {
            if let Err(e) = s.validate() {
                diags.push(e.to_string());
            }
        }
    }
}

fn typed_params(
    exp: Experiment,
    map: &Map<String, Value>,
    diags: &mut Vec<String>,
) -> Option<Params> {
    Some(match exp {
        Experiment::Eval => Params::Eval(typed(map, diags)?),
        Experiment::BernoulliScan => Params::BernoulliScan(typed(map, diags)?),
        Experiment::PoissonScan => Params::PoissonScan(typed(map, diags)?),
        Experiment::GaussianPath => Params::GaussianPath(typed(map, diags)?),
        Experiment::MeanField => Params::MeanField(typed(map, diags)?),
        Experiment::IncompleteData => Params::IncompleteData(typed(map, diags)?),
        Experiment::ExpectedAig => Params::ExpectedAig(typed(map, diags)?),
        Experiment::Scenario => {
            let mut base = match serde_json::to_value(Scenario::paper()) {
                Ok(Value::Object(m)) => m,
                _ => Map::new(),
            };
            merge(&mut base, map);
            Params::Scenario(typed(&base, diags)?)
        }
    })
}

/// Merges preset, config file and flags and checks the result. Returns every
/// problem found rather than stopping at the first.
pub fn resolve(req: &Request) -> Result<ExperimentConfig, Vec<String>> {
    let mut diags = Vec::new();
    let file = match &req.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match serde_json::from_str::<ConfigFile>(&text) {
                Ok(f) => f,
                Err(e) => return Err(vec![format!("{}: {e}", path.display())]),
            },
            Err(e) => return Err(vec![format!("{}: {e}", path.display())]),
        },
        None => ConfigFile::default(),
    };

    let preset_name = req.preset.clone().or(file.preset.clone());
    let preset = match &preset_name {
        Some(name) => match preset(name) {
            Some(p) => Some(p),
            None => {
                let valid: Vec<&str> = presets().iter().map(|p| p.name).collect();
                diags.push(format!("unknown preset `{name}`; valid: {}", valid.join(", ")));
                None
            }
        },
        None => None,
    };

    let mut names: Vec<(&str, String)> = Vec::new();
    if let Some(e) = &req.experiment {
        names.push(("command", e.clone()));
    }
    if let Some(p) = &preset {
        names.push(("preset", p.experiment.name().to_string()));
    }
    if let Some(e) = &file.experiment {
        names.push(("config file", e.clone()));
    }
    let experiment = match names.first() {
        None => {
            diags.push(format!(
                "no experiment given; valid: {}",
                Experiment::valid_list()
            ));
            None
        }
        Some((_, first)) => {
            for (src, n) in &names[1..] {
                if n != first {
                    diags.push(format!("experiment `{n}` from {src} conflicts with `{first}`"));
                }
            }
            let found = Experiment::from_name(first);
            if found.is_none() {
                diags.push(format!(
                    "unknown experiment `{first}`; valid: {}",
                    Experiment::valid_list()
                ));
            }
            for (_, n) in &names[1..] {
                if Experiment::from_name(n).is_none() && n != first {
                    diags.push(format!(
                        "unknown experiment `{n}`; valid: {}",
                        Experiment::valid_list()
                    ));
                }
            }
            found
        }
    };

    let unit = match req.unit.clone().or(file.unit.clone()) {
        Some(u) => match u.parse::<Unit>() {
            Ok(u) => u,
            Err(e) => {
                diags.push(format!("unit: {e}"));
                Unit::Nit
            }
        },
        None => preset.as_ref().map(|p| p.unit).unwrap_or(Unit::Nit),
    };

    let mut map = match preset.as_ref().map(|p| &p.params) {
        Some(Value::Object(m)) => m.clone(),
        _ => Map::new(),
    };
    merge(&mut map, &file.params);
    merge(&mut map, &req.params);

    let params = experiment.and_then(|e| typed_params(e, &map, &mut diags));
    if let Some(p) = &params {
        check_params(p, &mut diags);
    }

    let output_dir = req
        .output_dir
        .clone()
        .or(file.output_dir.clone())
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    match (experiment, params) {
        (Some(experiment), Some(params)) if diags.is_empty() => Ok(ExperimentConfig {
            experiment,
            params,
            output_dir,
            seed: req.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            unit,
            plot: req.plot || file.plot.unwrap_or(false),
        }),
        _ => Err(diags),
    }
}

/// All configuration problems; empty means runnable.
pub fn validate(req: &Request) -> Vec<String> {
    resolve(req).err().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(exp: &str, params: Value) -> Request {
        Request {
            experiment: Some(exp.into()),
            params: params.as_object().cloned().unwrap_or_default(),
            ..Default::default()
        }
    }

    #[test]
    fn presets_are_valid() {
        for p in presets() {
            let r = Request {
                preset: Some(p.name.into()),
                ..Default::default()
            };
            assert!(validate(&r).is_empty(), "{}: {:?}", p.name, validate(&r));
        }
    }

    #[test]
    fn negative_lambda_names_the_field() {
        let d = validate(&req("poisson-scan", json!({ "lambda_a": -1.0 })));
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("lambda_a"));
        let d = validate(&req(
            "eval",
            json!({ "measure": "kl", "a": "poisson:lambda=-1", "b": "poisson:lambda=1" }),
        ));
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("lambda"), "{d:?}");
    }

    #[test]
    fn unknown_experiment_lists_valid_set() {
        let d = validate(&req("bogus", json!({})));
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("gaussian-path") && d[0].contains("scenario"));
    }

    #[test]
    fn several_problems_reported_together() {
        let d = validate(&req(
            "incomplete-data",
            json!({ "sigma_s": -1.0, "sigma_n": 0.0, "runs": 0 }),
        ));
        assert_eq!(d.len(), 3, "{d:?}");
    }

    #[test]
    fn flags_override_file_and_preset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"experiment":"gaussian-path","params":{"r":0.5,"n":2},"seed":9}"#,
        )
        .unwrap();
        let r = Request {
            preset: Some("fig3".into()),
            config: Some(path),
            params: json!({ "n": 3 }).as_object().cloned().unwrap(),
            ..Default::default()
        };
        let c = resolve(&r).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.unit, Unit::Bit);
        match c.params {
            Params::GaussianPath(p) => {
                assert_eq!((p.r, p.n, p.grid), (0.5, 3, PathGrid::TwoD));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn conflicting_experiments() {
        let r = Request {
            experiment: Some("eval".into()),
            preset: Some("paper".into()),
            ..Default::default()
        };
        assert!(validate(&r)[0].contains("conflicts"));
    }
}
