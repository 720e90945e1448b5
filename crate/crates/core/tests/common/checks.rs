//! Checks behind the acceptance criteria. Each returns a [`Check`] so the
//! integration tests can assert and the acceptance runner can report.

use std::time::Instant;

use aig_core::distributions::{aig_binomial, aig_bernoulli, aig_gaussian, sample, GaussianParams};
use aig_core::geometry::{aig_gradient_j, aig_hessian_f, fisher_metric, newton_direction, ChartFamily, ParamChart};
use aig_core::measures::{achieved_information_gain as aig, kl_divergence, marginal_gains};
use aig_core::monte_carlo::{estimate_aig, expected_aig, gaussian_measurement_model};
use aig_core::sequential::{
    incomplete_data_aig, prefix_schedule, simulate_run, trajectory_ensemble, wiener_posterior,
    EnsembleSummary,
};
use aig_core::KnowledgeState;
use nalgebra::DVector;
use rand::Rng;

use super::*;

#[derive(Debug, Clone, Default)]
pub struct Check {
    pub instances: usize,
    pub failures: Vec<String>,
    /// Largest error seen, in the check's own measure.
    pub worst: f64,
    pub note: String,
}

impl Check {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.instances > 0
    }

    fn record(&mut self, err: f64, pass: bool, what: impl FnOnce() -> String) {
        self.instances += 1;
        if err.is_finite() {
            self.worst = self.worst.max(err);
        } else {
            self.worst = f64::INFINITY;
        }
        if !pass {
            self.failures.push(what());
        }
    }

    pub fn merge(&mut self, other: Check) {
        self.instances += other.instances;
        self.worst = self.worst.max(other.worst);
        self.failures.extend(other.failures);
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{} instances, worst {:.3e}", self.instances, self.worst);
        if !self.note.is_empty() {
            s.push_str("; ");
            s.push_str(&self.note);
        }
        if let Some(f) = self.failures.first() {
            s.push_str(&format!("; {} failed, first: {f}", self.failures.len()));
        }
        s
    }
}

fn val(s: &KnowledgeState, t: &KnowledgeState, u: &KnowledgeState) -> f64 {
    aig(s, t, u).unwrap().value
}

fn kl(s: &KnowledgeState, t: &KnowledgeState) -> f64 {
    kl_divergence(s, t).unwrap().value
}

// ---- axioms ----

pub const AXIOM_TOL: f64 = 1e-10;

/// Anti-symmetry, path additivity, calibration, reduction and KL
/// nonnegativity on one random instance of `family`. Returns the largest
/// scaled residual.
pub fn axioms_on(family: Family, seed: u64) -> Result<f64, String> {
    let mut r = rng(seed);
    let [a, b, c, o] = rand_states(family, &mut r);
    let mut worst: f64 = 0.0;
    let mut check = |name: &str, lhs: f64, rhs: f64, scale: f64| -> Result<(), String> {
        let e = (lhs - rhs).abs() / scale.abs().max(1.0);
        worst = worst.max(e);
        if e <= AXIOM_TOL {
            Ok(())
        } else {
            Err(format!("{family:?} seed {seed}: {name}: {lhs} vs {rhs}"))
        }
    };
    let abo = val(&a, &b, &o);
    check("anti-symmetry", abo, -val(&a, &o, &b), abo)?;
    let cb = val(&a, &c, &b);
    check("path additivity", val(&a, &c, &o), cb + abo, cb.abs() + abo.abs())?;
    check("calibration", val(&a, &o, &o), 0.0, 1.0)?;
    let ao = kl(&a, &o);
    check("reduction", val(&a, &a, &o), ao, ao)?;
    for (x, y) in [(&a, &b), (&b, &o), (&a, &o), (&a, &a)] {
        let d = kl(x, y);
        if d < -AXIOM_TOL {
            return Err(format!("{family:?} seed {seed}: KL = {d} < 0"));
        }
    }
    Ok(worst)
}

/// Gain of a product state equals the sum of the factor gains: diagonal
/// Gaussians against per-axis gains, and a 2-axis product table against
/// its marginal tables.
pub fn separability_on(seed: u64) -> Result<f64, String> {
    let mut r = rng(seed);
    let dim = r.gen_range(2..=5);
    let [a, b, o] = [0; 3].map(|_| rand_diag_gaussian(&mut r, dim));
    let (sa, sb, so) = (
        KnowledgeState::gaussian(a.clone()).unwrap(),
        KnowledgeState::gaussian(b.clone()).unwrap(),
        KnowledgeState::gaussian(o.clone()).unwrap(),
    );
    let joint = val(&sa, &sb, &so);
    let one = |g: &GaussianParams, i: usize| KnowledgeState::gaussian_1d(g.mean[i], g.cov[i][i]).unwrap();
    let parts: f64 = (0..dim).map(|i| val(&one(&a, i), &one(&b, i), &one(&o, i))).sum();
    let lib_parts: f64 = marginal_gains(&sa, &sb, &so).unwrap().iter().map(|q| q.value).sum();
    let mut worst = (joint - parts).abs() / joint.abs().max(1.0);
    worst = worst.max((joint - lib_parts).abs() / joint.abs().max(1.0));

    let (k1, k2) = (r.gen_range(2..=4), r.gen_range(2..=4));
    let tabs: Vec<(Vec<f64>, Vec<f64>)> =
        (0..3).map(|_| (rand_table(&mut r, k1), rand_table(&mut r, k2))).collect();
    let prod = |(x, y): &(Vec<f64>, Vec<f64>)| {
        let p: Vec<f64> = x.iter().flat_map(|u| y.iter().map(move |v| u * v)).collect();
        KnowledgeState::joint_table(p, vec![k1, k2]).unwrap()
    };
    let t = |v: &Vec<f64>| KnowledgeState::table(v.clone()).unwrap();
    let jt = val(&prod(&tabs[0]), &prod(&tabs[1]), &prod(&tabs[2]));
    let st = val(&t(&tabs[0].0), &t(&tabs[1].0), &t(&tabs[2].0))
        + val(&t(&tabs[0].1), &t(&tabs[1].1), &t(&tabs[2].1));
    worst = worst.max((jt - st).abs() / jt.abs().max(1.0));
    if worst <= AXIOM_TOL {
        Ok(worst)
    } else {
        Err(format!("seed {seed}: separability residual {worst:.3e}"))
    }
}

pub fn axiom_suite(per_family: usize) -> Check {
    let mut c = Check::default();
    for fam in FAMILIES {
        for i in 0..per_family {
            let seed = 0xA5_0000 + i as u64;
            match axioms_on(fam, seed) {
                Ok(w) => c.record(w, true, String::new),
                Err(e) => c.record(f64::NAN, false, || e),
            }
        }
    }
    for i in 0..per_family {
        match separability_on(0x5E_0000 + i as u64) {
            Ok(w) => c.record(w, true, String::new),
            Err(e) => c.record(f64::NAN, false, || e),
        }
    }
    c
}

// ---- oracle equivalence ----

pub fn oracle_bernoulli(n: usize) -> Check {
    let mut c = Check::default();
    let mut r = rng(11);
    for _ in 0..n {
        let (pa, pb, po) = (rand_prob(&mut r), rand_prob(&mut r), rand_prob(&mut r));
        let lib = aig_bernoulli(pa, pb, po).unwrap().value;
        let gen = val(
            &KnowledgeState::bernoulli(pa).unwrap(),
            &KnowledgeState::bernoulli(pb).unwrap(),
            &KnowledgeState::bernoulli(po).unwrap(),
        );
        let o = bernoulli_aig(pa, pb, po);
        let e = ((lib - o).abs().max((gen - o).abs())) / o.abs().max(1.0);
        c.record(e, e <= 1e-12, || format!("bernoulli({pa},{pb},{po}): {lib} vs {o}"));
    }
    c
}

pub fn oracle_binomial(n: usize) -> Check {
    let mut c = Check::default();
    let mut r = rng(12);
    for _ in 0..n {
        let trials = r.gen_range(1..=30u64);
        let (pa, pb, po) = (rand_prob(&mut r), rand_prob(&mut r), rand_prob(&mut r));
        let lib = aig_binomial(trials, pa, pb, po).unwrap().value;
        let o = binomial_aig(trials, pa, pb, po);
        let nb = trials as f64 * aig_bernoulli(pa, pb, po).unwrap().value;
        let e1 = (lib - o).abs() / o.abs().max(1.0);
        let e2 = (lib - nb).abs() / nb.abs().max(1.0);
        c.record(e1.max(e2), e1 <= 1e-12 && e2 <= 1e-12, || {
            format!("binomial(n={trials},{pa},{pb},{po}): {lib} vs sum {o} vs n*bernoulli {nb}")
        });
    }
    c
}

pub fn oracle_poisson(n: usize) -> Check {
    let mut c = Check::default();
    let mut r = rng(13);
    for _ in 0..n {
        let l = [0; 3].map(|_| r.gen_range(0.05..40.0));
        let lib = val(
            &KnowledgeState::poisson(l[0]).unwrap(),
            &KnowledgeState::poisson(l[1]).unwrap(),
            &KnowledgeState::poisson(l[2]).unwrap(),
        );
        let o = poisson_aig(l[0], l[1], l[2]);
        let e = (lib - o).abs() / o.abs().max(1.0);
        c.record(e, e <= 1e-8, || format!("poisson{l:?}: {lib} vs {o}"));
    }
    c
}

pub fn oracle_beta(n: usize) -> Check {
    let mut c = Check::default();
    let mut r = rng(14);
    for _ in 0..n {
        let p = [0; 3].map(|_| rand_beta(&mut r));
        let st = p.map(|(x, y)| KnowledgeState::beta(x, y).unwrap());
        let lib = val(&st[0], &st[1], &st[2]);
        let o = beta_aig(p[0], p[1], p[2]);
        let e = (lib - o).abs() / o.abs().max(1.0);
        c.record(e, e <= 1e-8, || format!("beta{p:?}: {lib} vs {o}"));
    }
    c
}

pub fn oracle_gaussian_1d(n: usize) -> Check {
    let mut c = Check::default();
    let mut r = rng(15);
    for _ in 0..n {
        let p = [0; 3].map(|_| (r.gen_range(-2.0..2.0), r.gen_range(0.2..3.0)));
        let st = p.map(|(m, v)| KnowledgeState::gaussian_1d(m, v).unwrap());
        let lib = val(&st[0], &st[1], &st[2]);
        let o = gaussian_1d_aig(p[0], p[1], p[2]);
        let e = (lib - o).abs() / o.abs().max(1.0);
        c.record(e, e <= 1e-8, || format!("gaussian1d{p:?}: {lib} vs {o}"));
    }
    c
}

/// Multivariate Gaussians (n ≤ 5) against an independent Monte Carlo
/// estimate; `worst` is the largest |z| score.
pub fn oracle_gaussian_mc(n: usize, samples: usize) -> Check {
    let mut c = Check::default();
    let mut r = rng(16);
    for i in 0..n {
        let dim = 1 + i % 5;
        let g = [0; 3].map(|_| rand_gaussian(&mut r, dim));
        let lib = aig_gaussian(&g[0], &g[1], &g[2]).unwrap().value;
        let (m, se) = gaussian_mc_aig(&g[0], &g[1], &g[2], samples, 1000 + i as u64);
        let z = (lib - m).abs() / se;
        c.record(z, z <= 3.0, || format!("gaussian dim {dim} #{i}: {lib} vs {m} ± {se} (z = {z:.2})"));
    }
    c
}

pub fn oracle_table(n: usize) -> Check {
    let mut c = Check::default();
    let mut r = rng(17);
    for _ in 0..n {
        let k = r.gen_range(2..=8);
        let t = [0; 3].map(|_| rand_table(&mut r, k));
        let st = t.clone().map(|p| KnowledgeState::table(p).unwrap());
        let lib = val(&st[0], &st[1], &st[2]);
        let o = table_aig(&t[0], &t[1], &t[2]);
        let e = (lib - o).abs() / o.abs().max(1.0);
        c.record(e, e <= 1e-12, || format!("table: {lib} vs {o}"));
    }
    c
}

// ---- geometry ----

fn kl_chart(family: ChartFamily, t0: &[f64], t: &[f64]) -> f64 {
    match family {
        ChartFamily::Bernoulli => bernoulli_kl(t0[0], t[0]),
        ChartFamily::Poisson => t0[0] * (t0[0] / t[0]).ln() - t0[0] + t[0],
        ChartFamily::Gaussian1d => {
            let (m0, v0, m, v) = (t0[0], t0[1], t[0], t[1]);
            0.5 * ((v / v0).ln() + (v0 + (m0 - m).powi(2)) / v - 1.0)
        }
        _ => unreachable!(),
    }
}

/// Central-difference Hessian of θ ↦ KL(P_θ0, P_θ) at θ0 with Richardson
/// extrapolation, compared to the library's Fisher metric.
pub fn fisher_vs_fd(n: usize) -> Check {
    let mut c = Check::default();
    let mut r = rng(21);
    for i in 0..n {
        let (family, t0) = match i % 3 {
            0 => (ChartFamily::Bernoulli, vec![r.gen_range(0.1..0.9)]),
            1 => (ChartFamily::Poisson, vec![r.gen_range(0.3..20.0)]),
            _ => (ChartFamily::Gaussian1d, vec![r.gen_range(-2.0..2.0), r.gen_range(0.3..3.0)]),
        };
        let g = fisher_metric(&ParamChart::new(family, t0.clone()).unwrap()).unwrap();
        let d = t0.len();
        let f = |t: &[f64]| kl_chart(family, &t0, t);
        let hess = |i: usize, j: usize, h: f64| {
            let hi = h * t0[i].abs().max(0.1);
            let hj = h * t0[j].abs().max(0.1);
            let at = |si: f64, sj: f64| {
                let mut t = t0.clone();
                t[i] += si;
                t[j] += sj;
                f(&t)
            };
            if i == j {
                (at(hi, 0.0) - 2.0 * f(&t0) + at(-hi, 0.0)) / (hi * hi)
            } else {
                (at(hi, hj) - at(hi, -hj) - at(-hi, hj) + at(-hi, -hj)) / (4.0 * hi * hj)
            }
        };
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let est = (4.0 * hess(a, b, 5e-4) - hess(a, b, 1e-3)) / 3.0;
                let scale = g[(a, a)].abs().max(g[(b, b)].abs());
                worst = worst.max((est - g[(a, b)]).abs() / scale);
            }
        }
        c.record(worst, worst <= 1e-5, || format!("{family:?} at {t0:?}: relative error {worst:.2e}"));
    }
    c
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn slope_of(xs: &[f64], ys: &[f64]) -> f64 {
    fit_slope(xs, ys)
}

/// Residual of the second-order expansion AIG(A, θ0+εd, θ0) ≈ −εjᵀd −
/// ½ε²dᵀfd must shrink like ε³; `worst` is the smallest fitted slope.
pub fn expansion_slopes() -> Check {
    let mut c = Check {
        worst: f64::INFINITY,
        ..Default::default()
    };
    let cases: Vec<(ParamChart, Vec<f64>, Vec<f64>)> = vec![
        (ParamChart::bernoulli(0.3).unwrap(), vec![0.55], vec![1.0]),
        (ParamChart::poisson(2.0).unwrap(), vec![3.5], vec![1.0]),
        (ParamChart::gaussian_1d(0.0, 1.0).unwrap(), vec![0.7, 0.4], vec![0.6, -0.8]),
        (ParamChart::beta(2.0, 5.0).unwrap(), vec![4.0, 3.0], vec![0.8, 0.6]),
    ];
    let mut slopes = Vec::new();
    for (chart0, ta, dir) in cases {
        let a = chart0.with_theta(ta).unwrap().to_state().unwrap();
        let s0 = chart0.to_state().unwrap();
        let j = aig_gradient_j(&chart0, &a).unwrap();
        let f = aig_hessian_f(&chart0, &a).unwrap();
        let d = DVector::from_vec(dir);
        let eps: Vec<f64> = (0..6).map(|k| 0.1 * 0.5f64.powi(k)).collect();
        let res: Vec<f64> = eps
            .iter()
            .map(|e| {
                let delta = &d * *e;
                let theta: Vec<f64> = chart0.theta.iter().zip(delta.iter()).map(|(t, x)| t + x).collect();
                let b = chart0.with_theta(theta).unwrap().to_state().unwrap();
                let exact = val(&a, &b, &s0);
                let approx = -j.dot(&delta) - 0.5 * (delta.transpose() * &f * &delta)[(0, 0)];
                (exact - approx).abs()
            })
            .collect();
        let slope = fit_slope(&eps, &res);
        slopes.push(format!("{:?} {slope:.2}", chart0.family));
        c.instances += 1;
        c.worst = c.worst.min(slope);
        if slope < 2.7 {
            c.failures.push(format!("{:?}: slope {slope:.3}", chart0.family));
        }
    }
    c.note = format!("slopes: {}", slopes.join(", "));
    c
}

/// A small step along the Newton direction −g⁻¹j increases AIG.
pub fn newton_positive(n: usize) -> Check {
    let mut c = Check::default();
    let mut r = rng(23);
    for i in 0..n {
        let (chart0, ta) = match i % 4 {
            0 => (ParamChart::bernoulli(r.gen_range(0.1..0.9)).unwrap(), vec![r.gen_range(0.1..0.9)]),
            1 => (ParamChart::poisson(r.gen_range(0.5..10.0)).unwrap(), vec![r.gen_range(0.5..10.0)]),
            2 => (
                ParamChart::gaussian_1d(r.gen_range(-1.0..1.0), r.gen_range(0.5..2.0)).unwrap(),
                vec![r.gen_range(-1.0..1.0), r.gen_range(0.1..2.0)],
            ),
            _ => (
                ParamChart::beta(r.gen_range(0.0..8.0), r.gen_range(0.0..8.0)).unwrap(),
                vec![r.gen_range(0.0..8.0), r.gen_range(0.0..8.0)],
            ),
        };
        let a = chart0.with_theta(ta.clone()).unwrap().to_state().unwrap();
        let s0 = chart0.to_state().unwrap();
        let j = aig_gradient_j(&chart0, &a).unwrap();
        let g = fisher_metric(&chart0).unwrap();
        let dir = newton_direction(&j, &g).unwrap();
        let step = 1e-3 / dir.norm().max(1.0);
        let theta: Vec<f64> = chart0.theta.iter().zip(dir.iter()).map(|(t, d)| t + step * d).collect();
        let b = chart0.with_theta(theta).unwrap().to_state().unwrap();
        let gain = val(&a, &b, &s0);
        c.record(0.0, gain > 0.0, || format!("{:?} θ0={:?} θA={ta:?}: gain {gain}", chart0.family, chart0.theta));
    }
    c
}

// ---- incomplete data ----

/// Closed form against the generic Gaussian AIG at every prefix of a few runs.
pub fn incomplete_closed_form(runs: usize, r_a: usize) -> Check {
    let mut c = Check::default();
    for k in 0..runs {
        let (ss, sn) = (0.5 + k as f64 * 0.3, 1.0 + k as f64 * 0.2);
        let run = simulate_run(r_a, ss, sn, 7000 + k as u64).unwrap();
        let q = run.q();
        let prior = KnowledgeState::gaussian_1d(0.0, ss * ss).unwrap();
        let pa = wiener_posterior(&run, r_a).unwrap();
        let a = KnowledgeState::gaussian(pa.clone()).unwrap();
        for rb in prefix_schedule(r_a) {
            let pb = wiener_posterior(&run, rb).unwrap();
            let closed = incomplete_data_aig(ss, q, r_a, rb, pa.mean[0], pb.mean[0]);
            let generic = val(&a, &KnowledgeState::gaussian(pb).unwrap(), &prior);
            let e = (closed - generic).abs();
            c.record(e, e <= 1e-10, || format!("seed {} r_B {rb}: {closed} vs {generic}", run.seed));
        }
    }
    c
}

pub struct EnsembleCheck {
    pub summary: EnsembleSummary,
    pub seconds: f64,
    /// r_B values where mean apparent < mean achieved.
    pub apparent_below: Vec<(usize, f64, f64)>,
    /// r_B values where mean apparent < mean achieved by more than 3 combined standard errors.
    pub apparent_below_3se: Vec<usize>,
}

pub fn ensemble(runs: usize, r_a: usize, seed: u64) -> EnsembleCheck {
    let t = Instant::now();
    let summary = trajectory_ensemble(runs, r_a, 1.0, 1.0, seed).unwrap();
    let seconds = t.elapsed().as_secs_f64();
    let apparent_below = summary
        .points
        .iter()
        .filter(|p| p.apparent.mean < p.achieved.mean - 1e-12 * p.achieved.mean.abs().max(1.0))
        .map(|p| (p.r_b, p.apparent.mean, p.achieved.mean))
        .collect();
    let apparent_below_3se = summary
        .points
        .iter()
        .filter(|p| {
            let se = p.apparent.standard_error.hypot(p.achieved.standard_error);
            p.apparent.mean < p.achieved.mean - 3.0 * se
        })
        .map(|p| p.r_b)
        .collect();
    EnsembleCheck {
        summary,
        seconds,
        apparent_below,
        apparent_below_3se,
    }
}

// ---- Monte Carlo ----

fn mc_triple() -> (KnowledgeState, KnowledgeState, KnowledgeState) {
    (
        KnowledgeState::gaussian_1d(0.3, 0.5).unwrap(),
        KnowledgeState::gaussian_1d(0.1, 0.8).unwrap(),
        KnowledgeState::gaussian_1d(0.0, 2.0).unwrap(),
    )
}

/// Log-log slope of RMS error against N over `reps` seeds per N.
pub fn mc_convergence_slope(reps: usize) -> (f64, Vec<(usize, f64)>) {
    let (a, b, o) = mc_triple();
    let truth = val(&a, &b, &o);
    let ns = [100usize, 400, 1600, 6400, 25600];
    let rms: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let se: f64 = (0..reps)
                .map(|k| {
                    let s = sample(&a, 50_000 + k as u64 * 7 + n as u64, n).unwrap();
                    (estimate_aig(&s, &b, &o).unwrap().estimate.value - truth).powi(2)
                })
                .sum();
            (se / reps as f64).sqrt()
        })
        .collect();
    let xs: Vec<f64> = ns.iter().map(|n| *n as f64).collect();
    (fit_slope(&xs, &rms), ns.into_iter().zip(rms).collect())
}

/// N = 10⁶ estimates against closed forms, as z scores.
pub fn mc_large_n() -> Check {
    let mut c = Check::default();
    let n = 1_000_000;
    let cases: Vec<(&str, [KnowledgeState; 3])> = vec![
        ("gaussian-1d", {
            let (a, b, o) = mc_triple();
            [a, b, o]
        }),
        ("gaussian-3d", {
            let mut r = rng(31);
            [0; 3].map(|_| KnowledgeState::gaussian(rand_gaussian(&mut r, 3)).unwrap())
        }),
        ("bernoulli", [0.64, 0.6, 0.1].map(|p| KnowledgeState::bernoulli(p).unwrap())),
        ("poisson", [3.0, 2.5, 6.0].map(|l| KnowledgeState::poisson(l).unwrap())),
        ("beta", [(3.0, 1.0), (2.0, 2.0), (0.0, 0.0)].map(|(x, y)| KnowledgeState::beta(x, y).unwrap())),
        ("binomial", [0.3, 0.4, 0.5].map(|p| KnowledgeState::binomial(12, p).unwrap())),
    ];
    for (i, (name, [a, b, o])) in cases.into_iter().enumerate() {
        let exact = val(&a, &b, &o);
        let s = sample(&a, 90 + i as u64, n).unwrap();
        let est = estimate_aig(&s, &b, &o).unwrap();
        let z = (est.estimate.value - exact).abs() / est.standard_error.value;
        c.record(z, z <= 3.0, || {
            format!("{name}: {} ± {} vs {exact} (z = {z:.2})", est.estimate.value, est.standard_error.value)
        });
    }
    c
}

/// Identical seeds give bit-identical estimator outputs.
pub fn mc_reproducible() -> bool {
    let (a, b, o) = mc_triple();
    let run = || {
        let s = sample(&a, 5, 20_000).unwrap();
        estimate_aig(&s, &b, &o).unwrap()
    };
    let model = gaussian_measurement_model(1.0, 0.7, 3).unwrap();
    let e1 = expected_aig(&model, 5_000, 9).unwrap();
    let e2 = expected_aig(&model, 5_000, 9).unwrap();
    let (r1, r2) = (run(), run());
    r1.estimate.value.to_bits() == r2.estimate.value.to_bits()
        && r1.standard_error.value.to_bits() == r2.standard_error.value.to_bits()
        && e1.estimate.value.to_bits() == e2.estimate.value.to_bits()
        && e1 == e2
}

// ---- CLI goldens ----

pub const GOLDEN_PRESETS: [(&str, &str); 7] = [
    ("fig1", "bernoulli-scan"),
    ("fig1-poisson", "poisson-scan"),
    ("fig2", "gaussian-path"),
    ("fig3", "gaussian-path"),
    ("fig4", "mean-field"),
    ("fig5", "incomplete-data"),
    ("paper", "scenario"),
];

pub fn golden_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/goldens")
}

/// Runs `aig run --preset <name>` and returns the CSV bytes.
pub fn preset_csv(bin: &str, preset: &str, experiment: &str) -> Result<Vec<u8>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = std::process::Command::new(bin)
        .args(["run", "--preset", preset, "--output-dir"])
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    std::fs::read(dir.path().join(format!("{experiment}.csv"))).map_err(|e| e.to_string())
}

/// Compares every preset against its committed golden; with `AIG_BLESS=1`
/// the goldens are rewritten instead.
pub fn goldens(bin: &str) -> Check {
    let mut c = Check::default();
    let bless = std::env::var_os("AIG_BLESS").is_some_and(|v| v == "1");
    for (preset, exp) in GOLDEN_PRESETS {
        let path = golden_dir().join(format!("{preset}.csv"));
        match preset_csv(bin, preset, exp) {
            Ok(bytes) => {
                if bless {
                    std::fs::create_dir_all(golden_dir()).unwrap();
                    std::fs::write(&path, &bytes).unwrap();
                }
                let same = std::fs::read(&path).map(|g| g == bytes).unwrap_or(false);
                c.record(0.0, same, || format!("{preset}: differs from {}", path.display()));
            }
            Err(e) => c.record(0.0, false, || format!("{preset}: {e}")),
        }
    }
    c
}
