//! Special functions needed by the Beta, binomial and Poisson closed forms:
//! log-gamma, log-beta, digamma and trigamma.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of |Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::INFINITY;
    }
    if x == x.floor() && (1.0..=32.0).contains(&x) {
        return ln_factorial(x as u64 - 1);
    }
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return PI.ln() - (PI * x).sin().abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a + b).
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// ln(k!) for a non-negative integer count.
pub fn ln_factorial(k: u64) -> f64 {
    const SMALL: u64 = 32;
    if k < SMALL {
        let mut acc = 0.0;
        for i in 2..=k {
            acc += (i as f64).ln();
        }
        acc
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// ln C(n, k).
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

// B_{2k} / (2k), k = 1..7
const DIGAMMA_ASYMP: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
];

// B_{2k}, k = 1..7
const TRIGAMMA_ASYMP: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

const ASYMP_THRESHOLD: f64 = 10.0;

/// Digamma ψ(x) = d ln Γ(x) / dx.
///
/// Upward recurrence ψ(x) = ψ(x+1) − 1/x until x ≥ 10, then the asymptotic
/// series in 1/x². Negative non-integers use reflection; poles return NaN.
pub fn digamma(x: f64) -> f64 {
    if x.is_nan() || (x <= 0.0 && x == x.floor()) {
        return f64::NAN;
    }
    if x < 0.0 {
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut result = 0.0;
    let mut xx = x;
    while xx < ASYMP_THRESHOLD {
        result -= 1.0 / xx;
        xx += 1.0;
    }
    let inv2 = 1.0 / (xx * xx);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in DIGAMMA_ASYMP {
        series += c * pow;
        pow *= inv2;
    }
    result + xx.ln() - 0.5 / xx - series
}

/// Trigamma ψ₁(x) = dψ(x)/dx for x > 0.
pub fn trigamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let mut result = 0.0;
    let mut xx = x;
    while xx < ASYMP_THRESHOLD {
        result += 1.0 / (xx * xx);
        xx += 1.0;
    }
    let inv = 1.0 / xx;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv2 * inv;
    for c in TRIGAMMA_ASYMP {
        series += c * pow;
        pow *= inv2;
    }
    result + inv + 0.5 * inv2 + series
}
