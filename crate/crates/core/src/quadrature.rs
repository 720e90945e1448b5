//! Double-exponential (tanh-sinh / sinh-sinh) quadrature.
//!
//! Used where no closed form exists: α-AIG and attention gains of
//! one-dimensional continuous states, and the Fisher metric of charts
//! without an analytic expression. Endpoint singularities of the
//! `ln x` type are handled without special treatment.

use std::f64::consts::FRAC_PI_2;

use crate::error::{AigError, Result};

const MAX_LEVEL: u32 = 10;
// Interval nodes reach within ~1e-61 of the endpoints; real-line nodes
// reach ~1e8 scale lengths.
const T_MAX_INTERVAL: f64 = 4.5;
const T_MAX_REAL: f64 = 3.2;

/// ∫_a^b f(x) dx with relative tolerance `tol`.
///
/// `f` receives `(x, distance_to_a, distance_to_b)` so integrands with
/// endpoint singularities can be evaluated without cancellation.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(AigError::InvalidArgument(format!(
            "invalid interval [{a}, {b}]"
        )));
    }
    let half = 0.5 * (b - a);
    let node = |t: f64| -> (f64, f64) {
        let u = FRAC_PI_2 * t.sinh();
        let cosh_u = u.cosh();
        let w = half * FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        // 1 - tanh|u| = 2 / (exp(2|u|) + 1), computed without cancellation
        let comp = 2.0 / ((2.0 * u.abs()).exp() + 1.0);
        let (x, da, db) = if u >= 0.0 {
            let db = half * comp;
            (b - db, b - a - db, db)
        } else {
            let da = half * comp;
            (a + da, da, b - a - da)
        };
        if da <= 0.0 || db <= 0.0 || w == 0.0 {
            return (0.0, 0.0);
        }
        (w, f(x, da, db))
    };
    run_levels(node, T_MAX_INTERVAL, tol)
}

/// ∫_{-∞}^{∞} f(x) dx using the sinh-sinh map centred on `center` with
/// length scale `scale`.
pub fn integrate_real_line<F>(f: F, center: f64, scale: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(scale > 0.0) || !center.is_finite() {
        return Err(AigError::InvalidArgument(format!(
            "invalid center/scale {center}/{scale}"
        )));
    }
    let node = |t: f64| -> (f64, f64) {
        let u = FRAC_PI_2 * t.sinh();
        let x = center + scale * u.sinh();
        let w = scale * FRAC_PI_2 * t.cosh() * u.cosh();
        if !w.is_finite() || !x.is_finite() {
            return (0.0, 0.0);
        }
        let v = f(x);
        if v == 0.0 {
            return (0.0, 0.0);
        }
        (w, v)
    };
    run_levels(node, T_MAX_REAL, tol)
}

fn run_levels<N>(node: N, t_max: f64, tol: f64) -> Result<f64>
where
    N: Fn(f64) -> (f64, f64),
{
    let mut h = 1.0;
    let (w0, f0) = node(0.0);
    let mut sum = w0 * f0;
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        if t > t_max {
            break;
        }
        let (wp, fp) = node(t);
        let (wm, fm) = node(-t);
        sum += wp * fp + wm * fm;
        k += 1;
    }
    let mut estimate = sum * h;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            if t > t_max {
                break;
            }
            let (wp, fp) = node(t);
            let (wm, fm) = node(-t);
            sum += wp * fp + wm * fm;
            k += 2;
        }
        let next = sum * h;
        if !next.is_finite() {
            return Err(AigError::Quadrature(format!("non-finite sum {next}")));
        }
        let err = (next - estimate).abs();
        estimate = next;
        if level >= 3 && err <= tol * estimate.abs().max(tol) {
            return Ok(estimate);
        }
    }
    Err(AigError::Quadrature(format!(
        "tolerance {tol} not reached, last estimate {estimate}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_log_singularity() {
        let v = integrate_interval(|x, _, _| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-13);
        // ∫_0^1 ln x dx = -1
        let v = integrate_interval(|_, da, _| da.ln(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v + 1.0).abs() < 1e-11);
        // ∫_0^1 x^{-1/2} dx = 2
        let v = integrate_interval(|_, da, _| da.powf(-0.5), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn gaussian_on_real_line() {
        let norm = (2.0 * std::f64::consts::PI).sqrt();
        let v = integrate_real_line(|x| (-0.5 * (x - 3.0).powi(2)).exp() / norm, 3.0, 1.0, 1e-12)
            .unwrap();
        assert!((v - 1.0).abs() < 1e-13);
        let second = integrate_real_line(
            |x| x * x * (-0.5 * x * x / 4.0).exp() / (norm * 2.0),
            0.0,
            2.0,
            1e-12,
        )
        .unwrap();
        assert!((second - 4.0).abs() < 1e-11);
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(integrate_interval(|x, _, _| x, 1.0, 0.0, 1e-8).is_err());
        assert!(integrate_real_line(|x| x, 0.0, -1.0, 1e-8).is_err());
    }
}
