//! Paired-sample statistics and the Student t distribution.
//!
//! The t CDF goes through the regularized incomplete beta function,
//! evaluated with a Lentz continued fraction; the quantile is found by
//! bracketing and bisection on the upper tail.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("samples differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("need at least two pairs, got {0}")]
    TooFew(usize),
    #[error("differences have zero variance")]
    ZeroVariance,
    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    BadLevel(f64),
    #[error("samples contain a non-finite value")]
    NonFinite,
}

const LANCZOS: [f64; 9] = [
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

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the series in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 10_000;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;
    let clamp = |v: f64| if v.abs() < TINY { TINY } else { v };

    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b).
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// P(|T| ≥ |t|) for Student t with `df` degrees of freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    incomplete_beta(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Student t CDF.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    let half_tail = 0.5 * t_two_sided_p(t, df);
    if t > 0.0 {
        1.0 - half_tail
    } else {
        half_tail
    }
}

/// Inverse Student t CDF, for `prob` in (0, 1).
pub fn t_quantile(prob: f64, df: f64) -> f64 {
    assert!(prob > 0.0 && prob < 1.0, "quantile probability must lie in (0, 1)");
    if prob < 0.5 {
        return -t_quantile(1.0 - prob, df);
    }
    let upper = 1.0 - prob;
    if upper == 0.5 {
        return 0.0;
    }
    let tail = |t: f64| 0.5 * t_two_sided_p(t, df);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while tail(hi) > upper {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > upper {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample variance with the n − 1 denominator.
fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

struct Differences {
    n: usize,
    mean: f64,
    sd: f64,
}

fn differences(a: &[f64], b: &[f64]) -> Result<Differences, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.len() < 2 {
        return Err(StatsError::TooFew(a.len()));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let sd = variance(&d).sqrt();
    // Rounding noise from b = a + c must still count as zero variance.
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
    if sd <= 1e-12 * scale {
        return Err(StatsError::ZeroVariance);
    }
    Ok(Differences {
        n: d.len(),
        mean: mean(&d),
        sd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    pub n: usize,
    pub df: usize,
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub t: f64,
    pub p_two_sided: f64,
}

/// Two-sided paired t-test on d = b − a.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest, StatsError> {
    let d = differences(a, b)?;
    let df = d.n - 1;
    let t = d.mean / d.sd * (d.n as f64).sqrt();
    Ok(PairedTTest {
        n: d.n,
        df,
        mean_diff: d.mean,
        sd_diff: d.sd,
        t,
        p_two_sided: t_two_sided_p(t, df as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CohenVariant {
    /// mean(d) / sd(d); equals t / √n.
    DiffSd,
    /// mean(d) / sqrt((s_a² + s_b²) / 2).
    PooledSd,
}

pub fn cohens_d_paired(a: &[f64], b: &[f64], variant: CohenVariant) -> Result<f64, StatsError> {
    let d = differences(a, b)?;
    match variant {
        CohenVariant::DiffSd => Ok(d.mean / d.sd),
        CohenVariant::PooledSd => {
            let pooled = ((variance(a) + variance(b)) / 2.0).sqrt();
            if pooled == 0.0 {
                return Err(StatsError::ZeroVariance);
            }
            Ok(d.mean / pooled)
        }
    }
}

/// Confidence interval for mean(b − a).
pub fn ci_mean_diff(a: &[f64], b: &[f64], level: f64) -> Result<(f64, f64), StatsError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::BadLevel(level));
    }
    let d = differences(a, b)?;
    let crit = t_quantile((1.0 + level) / 2.0, (d.n - 1) as f64);
    let half = crit * d.sd / (d.n as f64).sqrt();
    Ok((d.mean - half, d.mean + half))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedStats {
    pub n: usize,
    pub t: f64,
    pub df: usize,
    pub p_two_sided: f64,
    pub mean_diff: f64,
    pub cohen_d: f64,
    pub cohen_d_pooled: Option<f64>,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_level: f64,
}

/// Everything reported for one paired comparison. The pooled-sd effect
/// size is omitted when both samples are constant.
pub fn paired_stats(a: &[f64], b: &[f64], level: f64) -> Result<PairedStats, StatsError> {
    let test = paired_t_test(a, b)?;
    let (ci_low, ci_high) = ci_mean_diff(a, b, level)?;
    Ok(PairedStats {
        n: test.n,
        t: test.t,
        df: test.df,
        p_two_sided: test.p_two_sided,
        mean_diff: test.mean_diff,
        cohen_d: test.mean_diff / test.sd_diff,
        cohen_d_pooled: cohens_d_paired(a, b, CohenVariant::PooledSd).ok(),
        ci_low,
        ci_high,
        ci_level: level,
    })
}
