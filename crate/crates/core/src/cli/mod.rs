//! The `aig` command line.
//!
//! Exit codes: 0 success, 2 invalid configuration or input, 1 runtime failure
//! (indeterminate gain, quadrature failure, I/O).

pub mod config;
pub mod grammar;
pub mod run;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::AigError;
use config::{resolve, validate, Request};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error(transparent)]
    Aig(#[from] AigError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Aig(AigError::Indeterminate(_) | AigError::Quadrature(_)) => 1,
            CliError::Aig(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "aig", version, about = "Achieved information gain of belief updates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named parameter set (fig1, fig1-poisson, fig2, fig3, fig4, fig5, paper)
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory [env: AIG_OUTPUT_DIR, default: out]
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// nit or bit
    #[arg(long)]
    pub unit: Option<String>,
    /// Also write an SVG chart
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Subcommand)]
#[command(args_conflicts_with_subcommands = true)]
pub enum Command {
    /// Evaluate one measure on states given as `family:key=value,...`
    #[command(allow_negative_numbers = true)]
    Eval {
        #[command(flatten)]
        common: Common,
        /// aig, kl, report, alpha-aig, ami, ce, attention, attention-fidelity
        #[arg(long)]
        measure: Option<String>,
        /// Ideal posterior
        #[arg(long)]
        a: Option<String>,
        /// Actual posterior
        #[arg(long)]
        b: Option<String>,
        /// Prior
        #[arg(long)]
        o: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Attention weights per discrete outcome
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Bernoulli gains against p_0
    BernoulliScan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p_a: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        p_b: Option<Vec<f64>>,
        #[arg(long)]
        p0_steps: Option<usize>,
    },
    /// Poisson gains against x_0 = lambda_0/lambda_A
    #[command(allow_negative_numbers = true)]
    PoissonScan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda_a: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        x_b: Option<Vec<f64>>,
        #[arg(long)]
        x0_min_log10: Option<f64>,
        #[arg(long)]
        x0_max_log10: Option<f64>,
        #[arg(long)]
        x0_points: Option<usize>,
    },
    /// Gaussian path gains over (t, u)
    #[command(allow_negative_numbers = true)]
    GaussianPath {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        r: Option<f64>,
        /// A number or `auto` (1 - r^2)
        #[arg(long)]
        chi2: Option<String>,
        #[arg(long)]
        n: Option<u32>,
        /// 1d or 2d
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, value_delimiter = ',')]
        u_curves: Option<Vec<f64>>,
    },
    /// Mean-field fidelity curves, or one mean-field report
    #[command(allow_negative_numbers = true)]
    MeanField {
        #[command(flatten)]
        common: Common,
        /// curves or report
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        sigma_a2: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        delta0: Option<Vec<f64>>,
        #[arg(long)]
        c_points: Option<usize>,
    },
    /// Gains of incomplete-data posteriors along one run or an ensemble
    IncompleteData {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        r_a: Option<usize>,
        #[arg(long)]
        sigma_s: Option<f64>,
        #[arg(long)]
        sigma_n: Option<f64>,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Monte Carlo expected gain of a posterior builder
    #[command(allow_negative_numbers = true)]
    ExpectedAig {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        sigma_s: Option<f64>,
        #[arg(long)]
        sigma_n: Option<f64>,
        #[arg(long)]
        measurements: Option<usize>,
        /// exact, prior or damaged
        #[arg(long)]
        builder: Option<String>,
        #[arg(long)]
        mean_offset: Option<f64>,
    },
    /// Cost amortization scenario
    Scenario {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a_b: Option<f64>,
        #[arg(long)]
        a_c: Option<f64>,
        #[arg(long)]
        d_b_size: Option<f64>,
        #[arg(long)]
        facility_cost: Option<f64>,
        #[arg(long)]
        facility_days_b: Option<f64>,
        #[arg(long)]
        days_per_decade: Option<f64>,
    },
    /// Run the experiment named by --preset or --config
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Check a configuration without running it
    Validate {
        experiment: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn put<T: Serialize>(m: &mut Map<String, Value>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        m.insert(key.into(), serde_json::to_value(v).expect("flag values serialize"));
    }
}

fn number_or_word(s: String) -> Value {
    match s.trim().parse::<f64>() {
        Ok(v) => Value::from(v),
        Err(_) => Value::String(s),
    }
}

fn request(common: Common, experiment: Option<&str>, params: Map<String, Value>) -> Request {
    Request {
        experiment: experiment.map(str::to_string),
        preset: common.preset,
        config: common.config,
        params,
        output_dir: common.output_dir,
        seed: common.seed,
        unit: common.unit,
        plot: common.plot,
    }
}

/// Turns parsed arguments into a configuration request.
pub fn to_request(cmd: Command) -> Request {
    let mut m = Map::new();
    match cmd {
        Command::Eval { common, measure, a, b, o, alpha, weights } => {
            put(&mut m, "measure", measure);
            put(&mut m, "a", a);
            put(&mut m, "b", b);
            put(&mut m, "o", o);
            put(&mut m, "alpha", alpha);
            put(&mut m, "weights", weights);
            request(common, Some("eval"), m)
        }
        Command::BernoulliScan { common, p_a, p_b, p0_steps } => {
            put(&mut m, "p_a", p_a);
            put(&mut m, "p_b", p_b);
            put(&mut m, "p0_steps", p0_steps);
            request(common, Some("bernoulli-scan"), m)
        }
        Command::PoissonScan { common, lambda_a, x_b, x0_min_log10, x0_max_log10, x0_points } => {
            put(&mut m, "lambda_a", lambda_a);
            put(&mut m, "x_b", x_b);
            put(&mut m, "x0_min_log10", x0_min_log10);
            put(&mut m, "x0_max_log10", x0_max_log10);
            put(&mut m, "x0_points", x0_points);
            request(common, Some("poisson-scan"), m)
        }
        Command::GaussianPath { common, r, chi2, n, grid, u_curves } => {
            put(&mut m, "r", r);
            put(&mut m, "chi2", chi2.map(number_or_word));
            put(&mut m, "n", n);
            put(&mut m, "grid", grid);
            put(&mut m, "u_curves", u_curves);
            request(common, Some("gaussian-path"), m)
        }
        Command::MeanField { common, mode, sigma_a2, c, delta0, c_points } => {
            put(&mut m, "mode", mode);
            put(&mut m, "sigma_a2", sigma_a2);
            put(&mut m, "c", c);
            put(&mut m, "delta0", delta0);
            put(&mut m, "c_points", c_points);
            request(common, Some("mean-field"), m)
        }
        Command::IncompleteData { common, r_a, sigma_s, sigma_n, runs } => {
            put(&mut m, "r_a", r_a);
            put(&mut m, "sigma_s", sigma_s);
            put(&mut m, "sigma_n", sigma_n);
            put(&mut m, "runs", runs);
            request(common, Some("incomplete-data"), m)
        }
        Command::ExpectedAig { common, pairs, sigma_s, sigma_n, measurements, builder, mean_offset } => {
            put(&mut m, "pairs", pairs);
            put(&mut m, "sigma_s", sigma_s);
            put(&mut m, "sigma_n", sigma_n);
            put(&mut m, "measurements", measurements);
            put(&mut m, "builder", builder);
            put(&mut m, "mean_offset", mean_offset);
            request(common, Some("expected-aig"), m)
        }
        Command::Scenario { common, a_b, a_c, d_b_size, facility_cost, facility_days_b, days_per_decade } => {
            let mut scaling = Map::new();
            put(&mut scaling, "a_b", a_b);
            put(&mut scaling, "a_c", a_c);
            put(&mut scaling, "d_b_size", d_b_size);
            if !scaling.is_empty() {
                m.insert("scaling".into(), Value::Object(scaling));
            }
            put(&mut m, "facility_cost", facility_cost);
            put(&mut m, "facility_days_b", facility_days_b);
            put(&mut m, "days_per_decade", days_per_decade);
            request(common, Some("scenario"), m)
        }
        Command::Run { common } => request(common, None, m),
        Command::Validate { experiment, common } => request(common, experiment.as_deref(), m),
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let is_validate = matches!(cli.command, Command::Validate { .. });
    let req = to_request(cli.command);
    if is_validate {
        let diags = validate(&req);
        if diags.is_empty() {
            let _ = writeln!(std::io::stdout(), "ok");
            return 0;
        }
        for d in &diags {
            eprintln!("error: {d}");
        }
        return 2;
    }
    let result = resolve(&req)
        .map_err(CliError::Config)
        .and_then(|cfg| run::run(&cfg));
    match result {
        Ok(out) => {
            // A closed stdout (e.g. piped into `head`) is not a failure.
            let mut w = std::io::stdout().lock();
            let _ = writeln!(w, "{}", out.summary);
            let _ = writeln!(w, "wrote {}", out.csv.display());
            if let Some(svg) = out.svg {
                let _ = writeln!(w, "wrote {}", svg.display());
            }
            0
        }
        Err(e) => {
            for line in e.to_string().lines() {
                eprintln!("error: {line}");
            }
            e.exit_code()
        }
    }
}
