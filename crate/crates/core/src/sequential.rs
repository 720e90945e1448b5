//! Incomplete data usage: iid Gaussian measurements d_i = s + n_i of a
//! scalar signal, Wiener-filter posteriors of data prefixes, and the gain
//! trajectories when only the first r_B of r_A measurements are used.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{kl_gaussian, GaussianParams, KnowledgeState, Outcome};
use crate::error::{AigError, Result};
use crate::monte_carlo::ground_truth_aig;
use crate::table::{Cell, Table};
use crate::units::{InfoQuantity, Unit};

/// First seed of the committed ensemble; run k uses seed `ENSEMBLE_SEED + k`.
pub const ENSEMBLE_SEED: u64 = 2024;
pub const ENSEMBLE_RUNS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementRun {
    pub s_true: f64,
    pub data: Vec<f64>,
    pub sigma_s: f64,
    pub sigma_n: f64,
    pub seed: u64,
}

impl MeasurementRun {
    /// q = σ_s²/σ_n²
    pub fn q(&self) -> f64 {
        (self.sigma_s / self.sigma_n).powi(2)
    }

    pub fn r_a(&self) -> usize {
        self.data.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub r_b: usize,
    /// D(A, B, 0) with A the posterior from all r_A measurements.
    pub achieved: InfoQuantity,
    /// D(δ(s − s_true), B, 0).
    pub achieved_vs_truth: InfoQuantity,
    /// D(B, 0)
    pub apparent: InfoQuantity,
    /// D(A, B)
    pub remaining: InfoQuantity,
}

fn check_sigmas(sigma_s: f64, sigma_n: f64) -> Result<()> {
    if !(sigma_s > 0.0 && sigma_s.is_finite()) {
        return Err(AigError::param("sigma_s", "must be finite and > 0"));
    }
    if !(sigma_n > 0.0 && sigma_n.is_finite()) {
        return Err(AigError::param("sigma_n", "must be finite and > 0"));
    }
    Ok(())
}

/// Draws s_true ~ N(0, σ_s²) and then d_1..d_{r_A} from one ChaCha8 stream.
pub fn simulate_run(r_a: usize, sigma_s: f64, sigma_n: f64, seed: u64) -> Result<MeasurementRun> {
    check_sigmas(sigma_s, sigma_n)?;
    if r_a < 1 {
        return Err(AigError::param("r_a", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s_true = sigma_s * rng.sample::<f64, _>(StandardNormal);
    let data = (0..r_a)
        .map(|_| s_true + sigma_n * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(MeasurementRun {
        s_true,
        data,
        sigma_s,
        sigma_n,
        seed,
    })
}

/// Compensated sum.
fn neumaier(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Posterior from a prefix of `r_x` measurements whose sum is `prefix_sum`:
/// D_X = σ_s²/(1 + q r_X), m_X = q·Σd/(1 + q r_X).
fn posterior_from_sum(sigma_s: f64, q: f64, r_x: usize, prefix_sum: f64) -> GaussianParams {
    let k = 1.0 + q * r_x as f64;
    GaussianParams::scalar(q * prefix_sum / k, sigma_s * sigma_s / k)
}

/// Wiener-filter posterior after the first `r_x` measurements; r_x = 0 is the prior.
pub fn wiener_posterior(run: &MeasurementRun, r_x: usize) -> Result<GaussianParams> {
    if r_x > run.r_a() {
        return Err(AigError::InvalidArgument(format!(
            "prefix length {r_x} exceeds the {} available measurements",
            run.r_a()
        )));
    }
    let sum = neumaier(run.data[..r_x].iter().copied());
    Ok(posterior_from_sum(run.sigma_s, run.q(), r_x, sum))
}

/// Powers of two up to r_A, with r_A appended when it is not one.
pub fn prefix_schedule(r_a: usize) -> Vec<usize> {
    let mut s: Vec<usize> = std::iter::successors(Some(1usize), |r| r.checked_mul(2))
        .take_while(|r| *r <= r_a)
        .collect();
    if s.last() != Some(&r_a) {
        s.push(r_a);
    }
    s
}

/// Closed-form achieved gain of the r_B-prefix posterior relative to the
/// full-data posterior, in nits.
pub fn incomplete_data_aig(sigma_s: f64, q: f64, r_a: usize, r_b: usize, m_a: f64, m_b: f64) -> f64 {
    let (ra, rb) = (r_a as f64, r_b as f64);
    0.5 * (q * rb).ln_1p() - q * rb / (2.0 * (1.0 + q * ra))
        + (m_a * m_a - (1.0 + q * rb) * (m_a - m_b).powi(2)) / (2.0 * sigma_s * sigma_s)
}

fn trajectory_from_sums(
    s_true: f64,
    sigma_s: f64,
    sigma_n: f64,
    r_a: usize,
    sums: &[(usize, f64)],
) -> Result<Vec<TrajectoryPoint>> {
    let q = (sigma_s / sigma_n).powi(2);
    let prior_params = GaussianParams::scalar(0.0, sigma_s * sigma_s);
    let prior = KnowledgeState::gaussian(prior_params.clone())?;
    let full = sums
        .iter()
        .find(|(r, _)| *r == r_a)
        .map(|(_, s)| *s)
        .expect("schedule ends at r_A");
    let a = posterior_from_sum(sigma_s, q, r_a, full);
    let truth = Outcome::Real(s_true);
    sums.iter()
        .map(|&(r_b, sum)| {
            let b = posterior_from_sum(sigma_s, q, r_b, sum);
            let achieved = incomplete_data_aig(sigma_s, q, r_a, r_b, a.mean[0], b.mean[0]);
            let bs = KnowledgeState::gaussian(b.clone())?;
            Ok(TrajectoryPoint {
                r_b,
                achieved: InfoQuantity::nits(achieved),
                achieved_vs_truth: ground_truth_aig(&truth, &bs, &prior)?,
                apparent: kl_gaussian(&b, &prior_params)?,
                remaining: kl_gaussian(&a, &b)?,
            })
        })
        .collect()
}

/// Gains at every r_B of [`prefix_schedule`].
pub fn aig_trajectory(run: &MeasurementRun) -> Result<Vec<TrajectoryPoint>> {
    check_sigmas(run.sigma_s, run.sigma_n)?;
    if run.data.is_empty() {
        return Err(AigError::param("data", "must hold at least one measurement"));
    }
    let sched = prefix_schedule(run.r_a());
    let sums: Vec<(usize, f64)> = sched
        .iter()
        .map(|&r| (r, neumaier(run.data[..r].iter().copied())))
        .collect();
    trajectory_from_sums(run.s_true, run.sigma_s, run.sigma_n, run.r_a(), &sums)
}

/// Same draws and result as `aig_trajectory(&simulate_run(..))` without
/// holding the data in memory.
pub fn streamed_trajectory(
    r_a: usize,
    sigma_s: f64,
    sigma_n: f64,
    seed: u64,
) -> Result<(f64, Vec<TrajectoryPoint>)> {
    check_sigmas(sigma_s, sigma_n)?;
    if r_a < 1 {
        return Err(AigError::param("r_a", "must be at least 1"));
    }
    let sched = prefix_schedule(r_a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s_true = sigma_s * rng.sample::<f64, _>(StandardNormal);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut sums = Vec::with_capacity(sched.len());
    let mut next = 0;
    for i in 1..=r_a {
        let x = s_true + sigma_n * rng.sample::<f64, _>(StandardNormal);
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        if sched[next] == i {
            sums.push((i, sum + comp));
            next += 1;
        }
    }
    Ok((s_true, trajectory_from_sums(s_true, sigma_s, sigma_n, r_a, &sums)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainStats {
    pub mean: f64,
    pub standard_error: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

impl GainStats {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = neumaier(values.iter().copied()) / n;
        let var = neumaier(values.iter().map(|v| (v - mean).powi(2))) / (n - 1.0);
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        GainStats {
            mean,
            standard_error: (var / n).sqrt(),
            q10: quantile(&sorted, 0.1),
            q50: quantile(&sorted, 0.5),
            q90: quantile(&sorted, 0.9),
        }
    }
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsemblePoint {
    pub r_b: usize,
    pub achieved: GainStats,
    pub achieved_vs_truth: GainStats,
    pub apparent: GainStats,
    /// Runs whose achieved gain is negative at this r_B.
    pub negative_achieved: usize,
    pub negative_vs_truth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub seeds: Vec<u64>,
    pub r_a: usize,
    pub sigma_s: f64,
    pub sigma_n: f64,
    pub points: Vec<EnsemblePoint>,
    /// Seeds of runs with a negative achieved gain at some prefix, with the first such r_B.
    pub runs_with_negative_achieved: Vec<(u64, usize)>,
    pub runs_with_negative_vs_truth: Vec<(u64, usize)>,
}

/// `n_runs` runs seeded `seed, seed + 1, …`, evaluated in parallel.
pub fn trajectory_ensemble(
    n_runs: usize,
    r_a: usize,
    sigma_s: f64,
    sigma_n: f64,
    seed: u64,
) -> Result<EnsembleSummary> {
    if n_runs < 2 {
        return Err(AigError::param("n_runs", "must be at least 2"));
    }
    let seeds: Vec<u64> = (0..n_runs as u64).map(|k| seed.wrapping_add(k)).collect();
    let runs: Vec<Vec<TrajectoryPoint>> = seeds
        .par_iter()
        .map(|&s| streamed_trajectory(r_a, sigma_s, sigma_n, s).map(|(_, t)| t))
        .collect::<Result<_>>()?;
    let first_negative = |pick: fn(&TrajectoryPoint) -> f64| -> Vec<(u64, usize)> {
        seeds
            .iter()
            .zip(&runs)
            .filter_map(|(s, run)| run.iter().find(|p| pick(p) < 0.0).map(|p| (*s, p.r_b)))
            .collect()
    };
    let points = (0..runs[0].len())
        .map(|k| {
            let col = |pick: fn(&TrajectoryPoint) -> f64| -> Vec<f64> {
                runs.iter().map(|r| pick(&r[k])).collect()
            };
            let ach = col(|p| p.achieved.value);
            let truth = col(|p| p.achieved_vs_truth.value);
            EnsemblePoint {
                r_b: runs[0][k].r_b,
                achieved: GainStats::of(&ach),
                achieved_vs_truth: GainStats::of(&truth),
                apparent: GainStats::of(&col(|p| p.apparent.value)),
                negative_achieved: ach.iter().filter(|v| **v < 0.0).count(),
                negative_vs_truth: truth.iter().filter(|v| **v < 0.0).count(),
            }
        })
        .collect();
    Ok(EnsembleSummary {
        runs_with_negative_achieved: first_negative(|p| p.achieved.value),
        runs_with_negative_vs_truth: first_negative(|p| p.achieved_vs_truth.value),
        seeds,
        r_a,
        sigma_s,
        sigma_n,
        points,
    })
}

pub fn trajectory_table(points: &[TrajectoryPoint], unit: Unit) -> Table {
    let s = unit.suffix();
    let mut t = Table::new([
        "r_b".to_string(),
        format!("achieved_{s}"),
        format!("achieved_vs_truth_{s}"),
        format!("apparent_{s}"),
    ]);
    for p in points {
        t.push(vec![
            p.r_b.into(),
            p.achieved.to(unit).value.into(),
            p.achieved_vs_truth.to(unit).value.into(),
            p.apparent.to(unit).value.into(),
        ]);
    }
    t
}

pub fn ensemble_table(summary: &EnsembleSummary, unit: Unit) -> Table {
    let s = unit.suffix();
    let mut cols = vec!["r_b".to_string()];
    for g in ["achieved", "achieved_vs_truth", "apparent"] {
        for stat in ["mean", "se", "q10", "q50", "q90"] {
            cols.push(format!("{g}_{stat}_{s}"));
        }
    }
    cols.push("negative_achieved_runs".into());
    cols.push("negative_vs_truth_runs".into());
    let mut t = Table::new(cols);
    let conv = |v: f64| Cell::Num(InfoQuantity::nits(v).to(unit).value);
    for p in &summary.points {
        let mut row = vec![Cell::from(p.r_b)];
        for g in [&p.achieved, &p.achieved_vs_truth, &p.apparent] {
            row.extend([g.mean, g.standard_error, g.q10, g.q50, g.q90].map(conv));
        }
        row.push(p.negative_achieved.into());
        row.push(p.negative_vs_truth.into());
        t.push(row);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::aig_gaussian;

    #[test]
    fn noiseless_run() {
        let run = simulate_run(10, 1.0, 1e-12, 3).unwrap();
        assert!(run.data.iter().all(|d| (d - run.s_true).abs() < 1e-10));
    }

    #[test]
    fn posterior_examples() {
        let run = MeasurementRun {
            s_true: 0.0,
            data: vec![1.0],
            sigma_s: 1.0,
            sigma_n: 1.0,
            seed: 0,
        };
        let p0 = wiener_posterior(&run, 0).unwrap();
        assert_eq!((p0.mean[0], p0.cov[0][0]), (0.0, 1.0));
        let p1 = wiener_posterior(&run, 1).unwrap();
        assert_eq!((p1.mean[0], p1.cov[0][0]), (0.5, 0.5));
        assert!(wiener_posterior(&run, 2).is_err());
    }

    #[test]
    fn schedule() {
        assert_eq!(prefix_schedule(8), vec![1, 2, 4, 8]);
        assert_eq!(prefix_schedule(10), vec![1, 2, 4, 8, 10]);
        assert_eq!(prefix_schedule(1 << 20).len(), 21);
    }

    #[test]
    fn closed_form_matches_generic_and_reduces_at_full_data() {
        let run = simulate_run(300, 1.3, 0.7, 11).unwrap();
        let traj = aig_trajectory(&run).unwrap();
        let a = wiener_posterior(&run, run.r_a()).unwrap();
        let o = wiener_posterior(&run, 0).unwrap();
        for p in &traj {
            let b = wiener_posterior(&run, p.r_b).unwrap();
            let generic = aig_gaussian(&a, &b, &o).unwrap().value;
            assert!((p.achieved.value - generic).abs() < 1e-10);
        }
        let last = traj.last().unwrap();
        assert_eq!(last.r_b, 300);
        assert!((last.achieved.value - kl_gaussian(&a, &o).unwrap().value).abs() < 1e-12);
        assert!(last.remaining.value.abs() < 1e-15);
    }

    #[test]
    fn streamed_equals_stored() {
        let run = simulate_run(1000, 1.0, 2.0, 77).unwrap();
        let (s, streamed) = streamed_trajectory(1000, 1.0, 2.0, 77).unwrap();
        assert_eq!(s, run.s_true);
        assert_eq!(streamed, aig_trajectory(&run).unwrap());
    }

    #[test]
    fn small_ensemble_is_deterministic() {
        let a = trajectory_ensemble(8, 64, 1.0, 1.0, 5).unwrap();
        assert_eq!(a, trajectory_ensemble(8, 64, 1.0, 1.0, 5).unwrap());
        assert_eq!(a.points.len(), 7);
        assert_eq!(ensemble_table(&a, Unit::Nit).rows.len(), 7);
    }
}
