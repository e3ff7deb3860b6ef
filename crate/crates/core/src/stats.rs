//! Welch's two-sample t-test and the interval-overlap comparison of errors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub dof: f64,
    /// Two-sided p-value.
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("each group needs at least two observations (got {0} and {1})")]
pub struct GroupTooSmall(pub usize, pub usize);

const EPS: f64 = 1e-15;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 500;

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
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
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// `P(|T| >= |t|)` for Student's t with `dof` degrees of freedom.
pub fn student_t_two_sided(t: f64, dof: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let x = dof / (dof + t * t);
    regularized_beta(0.5 * dof, 0.5, x).clamp(0.0, 1.0)
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch's unequal-variance t-test of `mean(treated) - mean(control)`.
///
/// When both groups have zero variance the p-value is 1 for equal means and
/// 0 otherwise.
pub fn welch_t_test(treated: &[f64], control: &[f64]) -> Result<TTestResult, GroupTooSmall> {
    let (n1, n0) = (treated.len(), control.len());
    if n1 < 2 || n0 < 2 {
        return Err(GroupTooSmall(n1, n0));
    }
    let (m1, v1) = mean_var(treated);
    let (m0, v0) = mean_var(control);
    let (s1, s0) = (v1 / n1 as f64, v0 / n0 as f64);
    let se2 = s1 + s0;
    let diff = m1 - m0;
    if se2 == 0.0 {
        let pooled_dof = (n1 + n0 - 2) as f64;
        return Ok(if diff == 0.0 {
            TTestResult {
                t_statistic: 0.0,
                dof: pooled_dof,
                p_value: 1.0,
            }
        } else {
            TTestResult {
                t_statistic: diff.signum() * f64::INFINITY,
                dof: pooled_dof,
                p_value: 0.0,
            }
        });
    }
    let t = diff / se2.sqrt();
    let dof = se2 * se2 / (s1 * s1 / (n1 - 1) as f64 + s0 * s0 / (n0 - 1) as f64);
    Ok(TTestResult {
        t_statistic: t,
        dof,
        p_value: student_t_two_sided(t, dof),
    })
}

/// True when `[mean_a ± sd_a]` and `[mean_b ± sd_b]` do not intersect.
pub fn sd_overlap_significant(mean_a: f64, sd_a: f64, mean_b: f64, sd_b: f64) -> bool {
    mean_a + sd_a < mean_b - sd_b || mean_b + sd_b < mean_a - sd_a
}

/// Sample mean and standard deviation (n - 1 denominator; 0 for a single value).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.len() < 2 {
        return (xs.first().copied().unwrap_or(f64::NAN), 0.0);
    }
    let (m, v) = mean_var(xs);
    (m, v.sqrt())
}
