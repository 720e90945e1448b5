use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _, Poisson, StandardNormal};

use super::{Distribution, KnowledgeState, Outcome};
use crate::error::{AigError, Result};
use crate::linalg::Factor;

/// Seeded, reproducible draws from a state.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub draws: Vec<Outcome>,
    pub seed: u64,
    pub family: String,
    pub size: usize,
}

/// A state prepared for repeated sampling.
#[derive(Debug, Clone)]
pub enum Sampler {
    Bernoulli(f64),
    Binomial(Binomial),
    Poisson(Poisson<f64>),
    Beta(rand_distr::Beta<f64>),
    Gaussian1 { mean: f64, sd: f64 },
    Gaussian { mean: DVector<f64>, factor: Factor },
    Table { cdf: Vec<f64> },
    Point(Outcome),
}

impl Sampler {
    pub fn new(state: &KnowledgeState) -> Result<Self> {
        state.validate()?;
        let bad = |e: String| AigError::InvalidArgument(format!("sampler: {e}"));
        Ok(match &state.dist {
            Distribution::Bernoulli(b) => Sampler::Bernoulli(b.p),
            Distribution::Binomial(b) => {
                Sampler::Binomial(Binomial::new(b.n, b.p).map_err(|e| bad(e.to_string()))?)
            }
            Distribution::Poisson(p) => {
                Sampler::Poisson(Poisson::new(p.lambda).map_err(|e| bad(e.to_string()))?)
            }
            Distribution::Beta(b) => Sampler::Beta(
                rand_distr::Beta::new(b.a(), b.b()).map_err(|e| bad(e.to_string()))?,
            ),
            Distribution::Gaussian(g) if g.dim() == 1 => Sampler::Gaussian1 {
                mean: g.mean[0],
                sd: g.cov[0][0].sqrt(),
            },
            Distribution::Gaussian(g) => Sampler::Gaussian {
                mean: g.mean_vec(),
                factor: g.factor("cov")?,
            },
            Distribution::DiscreteTable(t) => {
                let mut acc = 0.0;
                let cdf = t
                    .probabilities
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                Sampler::Table { cdf }
            }
            Distribution::PointMass(pm) => Sampler::Point(pm.s.clone()),
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome {
        match self {
            Sampler::Bernoulli(p) => {
                let u: f64 = rng.gen();
                Outcome::Index(if u < *p { 0 } else { 1 })
            }
            Sampler::Binomial(d) => Outcome::Index(d.sample(rng)),
            Sampler::Poisson(d) => Outcome::Index(d.sample(rng) as u64),
            Sampler::Beta(d) => Outcome::Real(d.sample(rng)),
            Sampler::Gaussian1 { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                Outcome::Real(mean + sd * z)
            }
            Sampler::Gaussian { mean, factor } => {
                let z = DVector::from_fn(mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
                let x = mean + factor.colour(&z);
                Outcome::Vector(x.iter().copied().collect())
            }
            Sampler::Table { cdf } => {
                let u: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
                let k = cdf.partition_point(|c| *c <= u).min(cdf.len() - 1);
                Outcome::Index(k as u64)
            }
            Sampler::Point(s) => s.clone(),
        }
    }

    /// Scalar draw for one-dimensional states.
    pub fn draw_real<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gaussian1 { mean, sd } => mean + sd * rng.sample::<f64, _>(StandardNormal),
            other => other.draw(rng).as_real().unwrap_or(f64::NAN),
        }
    }
}

/// `count` draws from `state` using a ChaCha8 stream seeded with `seed`.
/// Identical inputs give bit-identical outputs.
pub fn sample(state: &KnowledgeState, seed: u64, count: usize) -> Result<SampleSet> {
    if count == 0 {
        return Err(AigError::InvalidArgument("count must be at least 1".into()));
    }
    let sampler = Sampler::new(state)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = (0..count).map(|_| sampler.draw(&mut rng)).collect();
    Ok(SampleSet {
        draws,
        seed,
        family: state.family_name().to_string(),
        size: count,
    })
}
