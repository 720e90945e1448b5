//! Executes a resolved experiment: table, optional chart, one-line summary.

use std::fs;
use std::path::PathBuf;

use super::config::{
    Builder, EvalParams, ExperimentConfig, Measure, MeanFieldMode, Params, PathGrid,
};
use super::grammar::parse_state;
use super::svg::LineChart;
use super::CliError;
use crate::distributions::KnowledgeState;
use crate::error::Result;
use crate::gaussian_lab::{
    correlation_axis, figure_grid, log_grid, mean_field_report, path_axis, FigureSpec,
    MeanFieldScenario, PathScenario,
};
use crate::measures::{
    achieved_information_gain, achieved_mutual_information, aig_report, alpha_aig,
    attention_fidelity, attention_gain, expected_log_density, kl_divergence, AigReport,
    AttentionWeights,
};
use crate::monte_carlo::{expected_aig, gaussian_conjugate_posterior, gaussian_measurement_model};
use crate::sequential::{ensemble_table, streamed_trajectory, trajectory_ensemble, trajectory_table};
use crate::sustainability::{scenario_report, scenario_table};
use crate::table::{Cell, Table};
use crate::units::{InfoQuantity, Unit};

/// In-memory result of an experiment.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub chart: Option<LineChart>,
    pub summary: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
    pub summary: String,
}

fn show(q: InfoQuantity, unit: Unit) -> String {
    format!("{:.6} {unit}", q.to(unit).value)
}

fn conv(v: f64, unit: Unit) -> Cell {
    Cell::Num(InfoQuantity::nits(v).to(unit).value)
}

/// Series keyed by the rendered value of `group`, plotted as (x, y).
fn grouped(
    table: &Table,
    group: Option<&str>,
    x: &str,
    y: &str,
    keep: impl Fn(&str) -> bool,
    chart: &mut LineChart,
) {
    let gi = group.and_then(|g| table.column_index(g));
    let (Some(xi), Some(yi)) = (table.column_index(x), table.column_index(y)) else {
        return;
    };
    let mut order: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for row in &table.rows {
        let key = gi.map(|i| row[i].render()).unwrap_or_default();
        if !keep(&key) {
            continue;
        }
        let p = (
            row[xi].as_f64().unwrap_or(f64::NAN),
            row[yi].as_f64().unwrap_or(f64::NAN),
        );
        match order.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push(p),
            None => order.push((key, vec![p])),
        }
    }
    for (k, pts) in order {
        let label = match group {
            Some(g) => format!("{g} = {}", k.trim_end_matches('0').trim_end_matches('.')),
            None => y.to_string(),
        };
        chart.add(label, pts);
    }
}

fn state(spec: &Option<serde_json::Value>) -> Result<KnowledgeState> {
    let v = spec.clone().unwrap_or(serde_json::Value::Null);
    parse_state(&v).map_err(crate::AigError::InvalidArgument)
}

fn report_table(r: &AigReport, unit: Unit, lead: Vec<(&str, Cell)>) -> Table {
    let s = unit.suffix();
    let mut cols: Vec<String> = lead.iter().map(|(c, _)| c.to_string()).collect();
    cols.extend(
        ["ideal", "remaining", "apparent", "achieved"].map(|g| format!("{g}_{s}")),
    );
    cols.push("fidelity".into());
    let mut t = Table::new(cols);
    let mut row: Vec<Cell> = lead.into_iter().map(|(_, c)| c).collect();
    for q in [r.ideal, r.remaining, r.apparent, r.achieved] {
        row.push(Cell::Num(q.to(unit).value));
    }
    row.push(r.fidelity.into());
    t.push(row);
    t
}

fn eval(p: &EvalParams, unit: Unit) -> Result<Outcome> {
    let a = state(&p.a)?;
    let b = state(&p.b)?;
    let o = if p.o.is_some() { Some(state(&p.o)?) } else { None };
    let o_ref = || o.as_ref().expect("checked by validation");
    let weights = match &p.weights {
        Some(w) => AttentionWeights::Discrete(w.clone()),
        None => AttentionWeights::uniform(),
    };
    let name = serde_json::to_value(p.measure)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let scalar = |q: InfoQuantity| {
        let mut t = Table::new(["measure".to_string(), format!("value_{}", unit.suffix())]);
        t.push(vec![name.clone().into(), Cell::Num(q.to(unit).value)]);
        Outcome {
            table: t,
            chart: None,
            summary: format!("{name}: {}", show(q, unit)),
        }
    };
    Ok(match p.measure {
        Measure::Aig => scalar(achieved_information_gain(&a, &b, o_ref())?),
        Measure::Kl => scalar(kl_divergence(&a, &b)?),
        Measure::AlphaAig => scalar(alpha_aig(&a, &b, o_ref(), p.alpha.unwrap_or(f64::NAN))?),
        Measure::Ami => scalar(achieved_mutual_information(&a, &b)?),
        Measure::Ce => scalar(InfoQuantity::nits(expected_log_density(&a, &b)?)),
        Measure::Attention => scalar(attention_gain(&a, &b, o_ref(), &weights)?),
        Measure::AttentionFidelity => {
            let f = attention_fidelity(&a, &b, o_ref(), &weights)?;
            let mut t = Table::new(["measure", "fidelity"]);
            t.push(vec![name.clone().into(), f.into()]);
            Outcome {
                table: t,
                chart: None,
                summary: format!("{name}: {f}"),
            }
        }
        Measure::Report => {
            let r = aig_report(&a, &b, o_ref())?;
            Outcome {
                table: report_table(&r, unit, vec![]),
                chart: None,
                summary: format!(
                    "achieved: {}, ideal: {}, fidelity: {}",
                    show(r.achieved, unit),
                    show(r.ideal, unit),
                    r.fidelity
                ),
            }
        }
    })
}

fn max_row(t: &Table, col: &str) -> Option<(usize, f64)> {
    t.column(col)?
        .into_iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .fold(None, |best, (i, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
}

/// Computes an experiment without touching the file system.
pub fn compute(cfg: &ExperimentConfig) -> Result<Outcome> {
    let unit = cfg.unit;
    let s = unit.suffix();
    match &cfg.params {
        Params::Eval(p) => eval(p, unit),
        Params::BernoulliScan(p) => {
            let spec = FigureSpec::BernoulliScan {
                p_a: p.p_a,
                p_b: p.p_b.clone(),
                p0: (1..p.p0_steps).map(|i| i as f64 / p.p0_steps as f64).collect(),
            };
            let table = figure_grid(&spec, unit)?;
            let mut chart = LineChart::new("Bernoulli updates", "p_0", format!("achieved gain [{s}]"));
            grouped(&table, Some("p_b"), "p_0", &format!("achieved_{s}"), |_| true, &mut chart);
            let summary = format!("bernoulli-scan: {} rows", table.rows.len());
            Ok(Outcome { table, chart: Some(chart), summary })
        }
        Params::PoissonScan(p) => {
            let spec = FigureSpec::PoissonScan {
                lambda_a: p.lambda_a,
                x_b: p.x_b.clone(),
                x0: log_grid(p.x0_min_log10, p.x0_max_log10, p.x0_points),
            };
            let table = figure_grid(&spec, unit)?;
            let mut chart = LineChart::new(
                "Poisson updates",
                "x_0 = lambda_0/lambda_A",
                format!("achieved gain per lambda_A [{s}]"),
            )
            .log_x();
            grouped(&table, Some("x_b"), "x_0", &format!("achieved_per_lambda_a_{s}"), |_| true, &mut chart);
            let summary = format!("poisson-scan: {} rows", table.rows.len());
            Ok(Outcome { table, chart: Some(chart), summary })
        }
        Params::GaussianPath(p) => {
            let chi2 = p.chi2_value().unwrap_or(f64::NAN);
            let scenario = PathScenario::new(p.r, chi2, p.n)?;
            let col = format!("achieved_{s}");
            let (table, chart) = match p.grid {
                PathGrid::OneD => {
                    let spec = FigureSpec::GaussianPath1d {
                        scenario,
                        u_curves: p.u_curves.clone(),
                        axis: path_axis(),
                    };
                    let table = figure_grid(&spec, unit)?;
                    let mut chart = LineChart::new("Gaussian path, mean panel", "t", format!("achieved gain [{s}]"));
                    grouped(&table, Some("series"), "t", &col, |k| k != "t=1", &mut chart);
                    (table, chart)
                }
                PathGrid::TwoD => {
                    let axis = path_axis();
                    let spec = FigureSpec::GaussianPath2d {
                        scenario,
                        t: axis.clone(),
                        u: axis,
                    };
                    let table = figure_grid(&spec, unit)?;
                    let mut chart = LineChart::new("Gaussian path", "t", format!("achieved gain [{s}]"));
                    grouped(
                        &table,
                        Some("u"),
                        "t",
                        &col,
                        |k| ["-0.5", "0", "0.5", "1"].iter().any(|u| k.parse::<f64>().ok() == u.parse().ok()),
                        &mut chart,
                    );
                    (table, chart)
                }
            };
            let summary = match max_row(&table, &col) {
                Some((i, v)) => {
                    let at = |c: &str| table.column(c).map(|v| v[i]).unwrap_or(f64::NAN);
                    let (t, u) = (at("t"), at("u"));
                    format!("gaussian-path: max achieved {v:.6} {unit} at t={t}, u={u}")
                }
                None => "gaussian-path: no finite values".into(),
            };
            Ok(Outcome { table, chart: Some(chart), summary })
        }
        Params::MeanField(p) => match p.mode {
            MeanFieldMode::Curves => {
                let spec = FigureSpec::MeanFieldCurves {
                    exponents: (p.exponent_min..=p.exponent_max).collect(),
                    c: correlation_axis(p.c_points),
                };
                let table = figure_grid(&spec, unit)?;
                let mut chart = LineChart::new("Mean-field fidelity", "c", "fidelity");
                grouped(
                    &table,
                    Some("i"),
                    "c",
                    "fidelity",
                    |k| k.parse::<i64>().is_ok_and(|i| i % 5 == 0),
                    &mut chart,
                );
                let summary = format!("mean-field: {} rows", table.rows.len());
                Ok(Outcome { table, chart: Some(chart), summary })
            }
            MeanFieldMode::Report => {
                let sc = MeanFieldScenario::new(
                    p.sigma_a2.unwrap_or(f64::NAN),
                    p.c.unwrap_or(f64::NAN),
                    p.delta0,
                )?;
                let r = mean_field_report(&sc)?;
                let table = report_table(
                    &r,
                    unit,
                    vec![("sigma_a2", sc.sigma_a2.into()), ("c", sc.c.into())],
                );
                let summary = format!(
                    "mean-field: remaining {}, fidelity {}",
                    show(r.remaining, unit),
                    r.fidelity
                );
                Ok(Outcome { table, chart: None, summary })
            }
        },
        Params::IncompleteData(p) => {
            let mut chart = LineChart::new("Incomplete data", "r_B", format!("gain [{s}]")).log_x();
            if p.runs == 1 {
                let (s_true, points) = streamed_trajectory(p.r_a, p.sigma_s, p.sigma_n, cfg.seed)?;
                let table = trajectory_table(&points, unit);
                for g in ["achieved", "achieved_vs_truth", "apparent"] {
                    grouped(&table, None, "r_b", &format!("{g}_{s}"), |_| true, &mut chart);
                }
                let last = points.last().expect("schedule is nonempty");
                let negative = points.iter().filter(|p| p.achieved.value < 0.0).count();
                let summary = format!(
                    "incomplete-data: seed {}, s_true {s_true:.6}, final achieved {}, prefixes with negative achieved gain: {negative}",
                    cfg.seed,
                    show(last.achieved, unit)
                );
                Ok(Outcome { table, chart: Some(chart), summary })
            } else {
                let e = trajectory_ensemble(p.runs, p.r_a, p.sigma_s, p.sigma_n, cfg.seed)?;
                let table = ensemble_table(&e, unit);
                for g in ["achieved", "achieved_vs_truth", "apparent"] {
                    grouped(&table, None, "r_b", &format!("{g}_mean_{s}"), |_| true, &mut chart);
                }
                let last = e.points.last().expect("schedule is nonempty");
                let summary = format!(
                    "incomplete-data: {} runs from seed {}, final mean achieved {} ± {:.6}, runs with a negative achieved gain: {}",
                    p.runs,
                    cfg.seed,
                    show(InfoQuantity::nits(last.achieved.mean), unit),
                    InfoQuantity::nits(last.achieved.standard_error).to(unit).value,
                    e.runs_with_negative_achieved.len()
                );
                Ok(Outcome { table, chart: Some(chart), summary })
            }
        }
        Params::ExpectedAig(p) => {
            let model = gaussian_measurement_model(p.sigma_s, p.sigma_n, p.measurements)?;
            let (vs, vn) = (p.sigma_s.powi(2), p.sigma_n.powi(2));
            let model = match p.builder {
                Builder::Exact => model,
                Builder::Prior => {
                    let prior = model.prior.clone();
                    model.with_builder(move |_| Ok(prior.clone()))
                }
                Builder::Damaged => {
                    let offset = p.mean_offset;
                    model.with_builder(move |d| {
                        let g = gaussian_conjugate_posterior(vs, vn, d)?;
                        KnowledgeState::gaussian_1d(g.mean[0] + offset, g.cov[0][0])
                    })
                }
            };
            let r = expected_aig(&model, p.pairs, cfg.seed)?;
            // ½ ln(1 + r σ_s²/σ_n²): the expected gain of the exact posterior.
            let mi = 0.5 * (p.measurements as f64 * vs / vn).ln_1p();
            let builder = serde_json::to_value(p.builder)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            let mut table = Table::new([
                "builder".to_string(),
                "pairs".into(),
                "seed".into(),
                format!("estimate_{s}"),
                format!("standard_error_{s}"),
                "excluded".into(),
                format!("mutual_information_{s}"),
            ]);
            table.push(vec![
                builder.clone().into(),
                r.n_samples.into(),
                Cell::Int(cfg.seed as i64),
                Cell::Num(r.estimate.to(unit).value),
                Cell::Num(r.standard_error.to(unit).value),
                r.excluded.len().into(),
                conv(mi, unit),
            ]);
            let summary = format!(
                "expected aig ({builder}): {} ± {:.6}, exact-posterior value {}",
                show(r.estimate, unit),
                r.standard_error.to(unit).value,
                show(InfoQuantity::nits(mi), unit)
            );
            Ok(Outcome { table, chart: None, summary })
        }
        Params::Scenario(sc) => {
            let r = scenario_report(sc)?;
            let summary = format!(
                "amortization threshold: {:.0} (rounded), {:.2} (exact); matched data size {:.4}",
                r.rounded_threshold, r.exact_threshold, r.matched_data_size
            );
            Ok(Outcome {
                table: scenario_table(&r),
                chart: None,
                summary,
            })
        }
    }
}

/// Runs the experiment and writes `<experiment>.csv` (and `.svg` when asked).
pub fn run(cfg: &ExperimentConfig) -> std::result::Result<RunOutput, CliError> {
    let out = compute(cfg)?;
    let io = |path: &PathBuf| {
        let path = path.clone();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(&cfg.output_dir).map_err(io(&cfg.output_dir))?;
    let csv = cfg.output_dir.join(format!("{}.csv", cfg.experiment));
    fs::write(&csv, out.table.to_csv()?).map_err(io(&csv))?;
    let svg = match (&out.chart, cfg.plot) {
        (Some(chart), true) => {
            let path = cfg.output_dir.join(format!("{}.svg", cfg.experiment));
            fs::write(&path, chart.render()).map_err(io(&path))?;
            Some(path)
        }
        _ => None,
    };
    Ok(RunOutput {
        csv,
        svg,
        summary: out.summary,
    })
}
