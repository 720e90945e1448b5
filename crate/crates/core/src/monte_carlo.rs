//! Sample-based AIG: posterior-sample averages, ground-truth AIG, and the
//! expected AIG over (signal, data) pairs drawn from a generative model.
//!
//! Pair i of a run seeded with `seed` uses ChaCha8 stream i, so results do
//! not depend on thread scheduling.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{
    GainSum, GaussianParams, KnowledgeState, LogDensity, Outcome, SampleSet, Sampler,
};
use crate::error::{AigError, Result};
use crate::units::InfoQuantity;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorResult {
    pub estimate: InfoQuantity,
    pub standard_error: InfoQuantity,
    pub n_samples: usize,
    pub seed: u64,
    /// Terms that were ±inf; a nonzero count makes the estimate that sentinel.
    pub contaminated: usize,
    /// Pair indices dropped because the posterior could not be built.
    pub excluded: Vec<usize>,
}

/// Compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.comp
    }
}

/// Mean and standard error of terms in their given order.
fn summarize(terms: &[f64], seed: u64, excluded: Vec<usize>) -> Result<EstimatorResult> {
    let n = terms.len();
    if n < 2 {
        return Err(AigError::InvalidArgument(
            "at least two usable samples are needed for a standard error".into(),
        ));
    }
    let pos = terms.iter().filter(|t| **t == f64::INFINITY).count();
    let neg = terms.iter().filter(|t| **t == f64::NEG_INFINITY).count();
    if pos > 0 && neg > 0 {
        return Err(AigError::Indeterminate(format!(
            "{pos} samples at +inf and {neg} at -inf"
        )));
    }
    if pos + neg > 0 {
        let v = if pos > 0 { f64::INFINITY } else { f64::NEG_INFINITY };
        return Ok(EstimatorResult {
            estimate: InfoQuantity::nits(v),
            standard_error: InfoQuantity::nits(f64::INFINITY),
            n_samples: n,
            seed,
            contaminated: pos + neg,
            excluded,
        });
    }
    let mut s = Neumaier::default();
    for t in terms {
        s.add(*t);
    }
    let mean = s.total() / n as f64;
    let mut ss = Neumaier::default();
    for t in terms {
        ss.add((t - mean) * (t - mean));
    }
    let var = ss.total() / (n - 1) as f64;
    Ok(EstimatorResult {
        estimate: InfoQuantity::nits(mean),
        standard_error: InfoQuantity::nits((var / n as f64).sqrt()),
        n_samples: n,
        seed,
        contaminated: 0,
        excluded,
    })
}

fn log_ratio(lb: f64, lo: f64) -> Result<f64> {
    let mut g = GainSum::default();
    g.add(1.0, lb, lo)?;
    g.finish()
}

/// Sample mean of ln P_b(s_i) − ln P_o(s_i) over draws s_i from the ideal state.
pub fn estimate_aig(
    samples: &SampleSet,
    b: &KnowledgeState,
    o: &KnowledgeState,
) -> Result<EstimatorResult> {
    b.validate()?;
    o.validate()?;
    let identical = b.dist == o.dist;
    let (lb, lo) = (LogDensity::new(b)?, LogDensity::new(o)?);
    let terms: Result<Vec<f64>> = samples
        .draws
        .par_iter()
        .map(|s| {
            if identical {
                return Ok(0.0);
            }
            log_ratio(lb.eval(s)?, lo.eval(s)?)
        })
        .collect();
    summarize(&terms?, samples.seed, Vec::new())
}

/// ln P_b(s) − ln P_o(s): the surprise reduction at the true value.
pub fn ground_truth_aig(
    s_true: &Outcome,
    b: &KnowledgeState,
    o: &KnowledgeState,
) -> Result<InfoQuantity> {
    b.validate()?;
    o.validate()?;
    let lb = LogDensity::new(b)?.eval(s_true)?;
    let lo = LogDensity::new(o)?.eval(s_true)?;
    if b.dist == o.dist {
        return Ok(InfoQuantity::ZERO);
    }
    log_ratio(lb, lo).map(InfoQuantity::nits)
}

pub type DataSampler<D> = Arc<dyn Fn(&Outcome, &mut ChaCha8Rng) -> D + Send + Sync>;
pub type DataLogDensity<D> = Arc<dyn Fn(&D, &Outcome) -> f64 + Send + Sync>;
pub type PosteriorBuilder<D> = Arc<dyn Fn(&D) -> Result<KnowledgeState> + Send + Sync>;

/// Prior over signals, likelihood of data given a signal, and the updating
/// method under study.
#[derive(Clone)]
pub struct GenerativeModel<D> {
    pub prior: KnowledgeState,
    pub sample_data: DataSampler<D>,
    pub data_log_density: DataLogDensity<D>,
    pub posterior_builder: PosteriorBuilder<D>,
}

impl<D> GenerativeModel<D> {
    pub fn with_builder(
        &self,
        builder: impl Fn(&D) -> Result<KnowledgeState> + Send + Sync + 'static,
    ) -> Self {
        GenerativeModel {
            prior: self.prior.clone(),
            sample_data: self.sample_data.clone(),
            data_log_density: self.data_log_density.clone(),
            posterior_builder: Arc::new(builder),
        }
    }
}

/// Conjugate Gaussian posterior of a scalar signal after `data` iid
/// measurements d_i = s + n_i.
pub fn gaussian_conjugate_posterior(
    prior_var: f64,
    noise_var: f64,
    data: &[f64],
) -> Result<GaussianParams> {
    if !(prior_var > 0.0) || !(noise_var > 0.0) {
        return Err(AigError::param("variance", "must be > 0"));
    }
    let k = data.len() as f64;
    let precision = 1.0 / prior_var + k / noise_var;
    let mut s = Neumaier::default();
    for d in data {
        s.add(*d);
    }
    let var = 1.0 / precision;
    Ok(GaussianParams::scalar(var * s.total() / noise_var, var))
}

/// s ~ N(0, σ_s²), d_i = s + n_i with n_i ~ N(0, σ_n²), i = 1..r, and the
/// exact conjugate posterior as the builder.
pub fn gaussian_measurement_model(
    sigma_s: f64,
    sigma_n: f64,
    r: usize,
) -> Result<GenerativeModel<Vec<f64>>> {
    if !(sigma_s > 0.0) || !(sigma_n > 0.0) {
        return Err(AigError::param("sigma", "must be > 0"));
    }
    let (vs, vn) = (sigma_s * sigma_s, sigma_n * sigma_n);
    let ln_norm = -0.5 * (2.0 * std::f64::consts::PI * vn).ln();
    Ok(GenerativeModel {
        prior: KnowledgeState::gaussian_1d(0.0, vs)?,
        sample_data: Arc::new(move |s, rng| {
            let s = s.as_real().unwrap_or(f64::NAN);
            (0..r)
                .map(|_| s + sigma_n * rng.sample::<f64, _>(StandardNormal))
                .collect()
        }),
        data_log_density: Arc::new(move |d, s| {
            let s = s.as_real().unwrap_or(f64::NAN);
            d.iter().map(|x| ln_norm - 0.5 * (x - s).powi(2) / vn).sum()
        }),
        posterior_builder: Arc::new(move |d| {
            KnowledgeState::gaussian(gaussian_conjugate_posterior(vs, vn, d)?)
        }),
    })
}

/// ChaCha8 generator for task `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mean over pairs s_i ~ prior, d_i ~ P(d|s_i) of ln P(s_i|B(d_i)) − ln P(s_i|prior).
pub fn expected_aig<D: Send>(
    model: &GenerativeModel<D>,
    n_pairs: usize,
    seed: u64,
) -> Result<EstimatorResult> {
    if n_pairs < 2 {
        return Err(AigError::InvalidArgument("n_pairs must be at least 2".into()));
    }
    let sampler = Sampler::new(&model.prior)?;
    let outcomes: Vec<Result<Option<f64>>> = (0..n_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let s = sampler.draw(&mut rng);
            let d = (model.sample_data)(&s, &mut rng);
            match (model.posterior_builder)(&d) {
                Ok(b) => ground_truth_aig(&s, &b, &model.prior).map(|q| Some(q.value)),
                Err(_) => Ok(None),
            }
        })
        .collect();
    let mut terms = Vec::with_capacity(n_pairs);
    let mut excluded = Vec::new();
    for (i, r) in outcomes.into_iter().enumerate() {
        match r? {
            Some(v) => terms.push(v),
            None => excluded.push(i),
        }
    }
    summarize(&terms, seed, excluded)
}
