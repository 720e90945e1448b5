//! Independent oracles and random instance generators shared by the
//! integration tests and the acceptance runner. Nothing here calls the
//! library's density, quadrature or closed-form code.

#![allow(dead_code)]

pub mod checks;

use aig_core::distributions::GaussianParams;
use aig_core::KnowledgeState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Beta, Binomial, Continuous, Discrete, Poisson};
use statrs::function::gamma::ln_gamma;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * y.abs().max(1.0)
}

// ---- discrete sums ----

/// Σ_s P_a(s) ln(P_b(s)/P_o(s)) over a two-point space, p = P(s = 0).
pub fn bernoulli_aig(pa: f64, pb: f64, po: f64) -> f64 {
    let term = |w: f64, b: f64, o: f64| if w == 0.0 { 0.0 } else { w * (b.ln() - o.ln()) };
    term(pa, pb, po) + term(1.0 - pa, 1.0 - pb, 1.0 - po)
}

pub fn bernoulli_kl(pa: f64, pb: f64) -> f64 {
    bernoulli_aig(pa, pa, pb)
}

/// Direct sum over k = 0..n of the binomial pmf with success probability p.
pub fn binomial_aig(n: u64, pa: f64, pb: f64, po: f64) -> f64 {
    let (a, b, o) = (
        Binomial::new(pa, n).unwrap(),
        Binomial::new(pb, n).unwrap(),
        Binomial::new(po, n).unwrap(),
    );
    (0..=n)
        .map(|k| {
            let w = a.pmf(k);
            if w == 0.0 {
                0.0
            } else {
                w * (b.ln_pmf(k) - o.ln_pmf(k))
            }
        })
        .sum()
}

/// Poisson series summed until the tail weight of A is below 1e-17.
pub fn poisson_aig(la: f64, lb: f64, lo: f64) -> f64 {
    let (a, b, o) = (
        Poisson::new(la).unwrap(),
        Poisson::new(lb).unwrap(),
        Poisson::new(lo).unwrap(),
    );
    let mut total = 0.0;
    let mut mass = 0.0;
    let mut k = 0u64;
    loop {
        let w = a.pmf(k);
        mass += w;
        if w > 0.0 {
            total += w * (b.ln_pmf(k) - o.ln_pmf(k));
        }
        if (k as f64) > la && 1.0 - mass < 1e-17 && w < 1e-300f64.max(1e-20 * total.abs()) {
            break;
        }
        if (k as f64) > la + 60.0 * la.sqrt() + 100.0 {
            break;
        }
        k += 1;
    }
    total
}

pub fn table_aig(a: &[f64], b: &[f64], o: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(o)
        .map(|((pa, pb), po)| if *pa == 0.0 { 0.0 } else { pa * (pb.ln() - po.ln()) })
        .sum()
}

// ---- quadrature ----

/// Tanh-sinh quadrature on (0, 1). `f` receives x and 1 − x, both computed
/// without cancellation, so endpoint log singularities are harmless.
pub fn tanh_sinh(f: impl Fn(f64, f64) -> f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let eval = |h: f64| {
        let mut sum = 0.0;
        let mut k: i64 = 0;
        loop {
            let t = k as f64 * h;
            let s = FRAC_PI_2 * t.sinh();
            let w = FRAC_PI_2 * t.cosh() / (s.cosh() * s.cosh());
            if w < 1e-300 {
                break;
            }
            // x = 1/(1+e^{-2s}), 1 − x = 1/(1+e^{2s})
            let (x, xc) = (1.0 / (1.0 + (-2.0 * s).exp()), 1.0 / (1.0 + (2.0 * s).exp()));
            let mut add = |x: f64, xc: f64| {
                if x > 0.0 && xc > 0.0 {
                    let v = f(x, xc);
                    if v.is_finite() {
                        sum += w * v;
                    }
                }
            };
            add(x, xc);
            if k > 0 {
                add(xc, x);
            }
            k += 1;
        }
        // dx/dt = w/2 with the 1/2 from mapping (−1, 1) onto (0, 1)
        0.5 * h * sum
    };
    let mut h = 0.5;
    let mut prev = eval(h);
    for _ in 0..8 {
        h /= 2.0;
        let cur = eval(h);
        if (cur - prev).abs() <= 1e-13 * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// ∫ P_A ln(P_B/P_O) for Beta pseudo-count states (density Beta(n0+1, n1+1)).
pub fn beta_aig(a: (f64, f64), b: (f64, f64), o: (f64, f64)) -> f64 {
    let da = Beta::new(a.0 + 1.0, a.1 + 1.0).unwrap();
    let lnb = |p: (f64, f64)| {
        let (x, y) = (p.0 + 1.0, p.1 + 1.0);
        ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)
    };
    // log densities written with (x, 1 − x) to keep endpoint accuracy
    let lpdf = |p: (f64, f64), lnnorm: f64, x: f64, xc: f64| p.0 * x.ln() + p.1 * xc.ln() - lnnorm;
    let (nb, no) = (lnb(b), lnb(o));
    tanh_sinh(|x, xc| {
        let w = da.pdf(x);
        if w == 0.0 {
            0.0
        } else {
            w * (lpdf(b, nb, x, xc) - lpdf(o, no, x, xc))
        }
    })
}

/// 1-d Gaussian AIG by tanh-sinh after mapping the real line with x = m + s·tan(π(u − ½)).
pub fn gaussian_1d_aig(a: (f64, f64), b: (f64, f64), o: (f64, f64)) -> f64 {
    use std::f64::consts::PI;
    let ln_pdf = |(m, v): (f64, f64), x: f64| -0.5 * ((2.0 * PI * v).ln() + (x - m).powi(2) / v);
    let s = a.1.sqrt();
    tanh_sinh(|u, uc| {
        // tan(π(u − ½)) = −cot(πu); use the smaller of u, uc for accuracy
        let t = if u < 0.5 { -1.0 / (PI * u).tan() } else { 1.0 / (PI * uc).tan() };
        let x = a.0 + s * t;
        let jac = s * PI * (1.0 + t * t);
        let w = ln_pdf(a, x).exp();
        if w == 0.0 {
            0.0
        } else {
            jac * w * (ln_pdf(b, x) - ln_pdf(o, x))
        }
    })
}

// ---- Gaussian Monte Carlo ----

/// Lower Cholesky factor by the textbook algorithm.
pub fn cholesky(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][j] = (m[i][i] - s).sqrt();
            } else {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

fn forward(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    y
}

pub struct GaussOracle {
    mean: Vec<f64>,
    l: Vec<Vec<f64>>,
    ln_norm: f64,
}

impl GaussOracle {
    pub fn new(g: &GaussianParams) -> Self {
        let l = cholesky(&g.cov);
        let n = g.mean.len() as f64;
        let ln_det: f64 = l.iter().enumerate().map(|(i, r)| 2.0 * r[i].ln()).sum();
        GaussOracle {
            mean: g.mean.clone(),
            l,
            ln_norm: -0.5 * (n * (2.0 * std::f64::consts::PI).ln() + ln_det),
        }
    }

    pub fn ln_pdf(&self, x: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        let y = forward(&self.l, &d);
        self.ln_norm - 0.5 * y.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn draw(&self, rng: &mut impl Rng) -> Vec<f64> {
        let n = self.mean.len();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        (0..n)
            .map(|i| self.mean[i] + (0..=i).map(|k| self.l[i][k] * z[k]).sum::<f64>())
            .collect()
    }
}

/// Monte Carlo mean and standard error of ln P_b − ln P_o under a.
pub fn gaussian_mc_aig(
    a: &GaussianParams,
    b: &GaussianParams,
    o: &GaussianParams,
    n: usize,
    seed: u64,
) -> (f64, f64) {
    let (ga, gb, go) = (GaussOracle::new(a), GaussOracle::new(b), GaussOracle::new(o));
    let mut r = rng(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let x = ga.draw(&mut r);
        let v = gb.ln_pdf(&x) - go.ln_pdf(&x);
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    let var = (s2 / n as f64 - mean * mean) * n as f64 / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

// ---- random instances ----

pub fn rand_prob(r: &mut impl Rng) -> f64 {
    r.gen_range(0.02..0.98)
}

pub fn rand_beta(r: &mut impl Rng) -> (f64, f64) {
    (r.gen_range(0.0..15.0), r.gen_range(0.0..15.0))
}

/// Mean in [−2, 2]^n; covariance M Mᵀ + 0.2 I with M entries in [−1, 1].
pub fn rand_gaussian(r: &mut impl Rng, n: usize) -> GaussianParams {
    let mean: Vec<f64> = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
    let m: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
    let cov = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let s: f64 = (0..n).map(|k| m[i][k] * m[j][k]).sum();
                    s + if i == j { 0.2 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    GaussianParams::new(mean, cov)
}

pub fn rand_diag_gaussian(r: &mut impl Rng, n: usize) -> GaussianParams {
    let mean: Vec<f64> = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
    let cov = (0..n)
        .map(|i| (0..n).map(|j| if i == j { r.gen_range(0.2..3.0) } else { 0.0 }).collect())
        .collect();
    GaussianParams::new(mean, cov)
}

pub fn rand_table(r: &mut impl Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| r.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Bernoulli,
    Binomial,
    Poisson,
    Beta,
    Gaussian,
    Table,
}

pub const FAMILIES: [Family; 6] = [
    Family::Bernoulli,
    Family::Binomial,
    Family::Poisson,
    Family::Beta,
    Family::Gaussian,
    Family::Table,
];

/// Four random states of one family sharing a support.
pub fn rand_states(family: Family, r: &mut impl Rng) -> [KnowledgeState; 4] {
    let n = r.gen_range(1..=30u64);
    let dim = r.gen_range(1..=5usize);
    let k = r.gen_range(2..=8usize);
    let mut one = || -> KnowledgeState {
        match family {
            Family::Bernoulli => KnowledgeState::bernoulli(rand_prob(r)),
            Family::Binomial => KnowledgeState::binomial(n, rand_prob(r)),
            Family::Poisson => KnowledgeState::poisson(r.gen_range(0.05..40.0)),
            Family::Beta => {
                let (a, b) = rand_beta(r);
                KnowledgeState::beta(a, b)
            }
            Family::Gaussian => KnowledgeState::gaussian(rand_gaussian(r, dim)),
            Family::Table => KnowledgeState::table(rand_table(r, k)),
        }
        .unwrap()
    };
    [one(), one(), one(), one()]
}
