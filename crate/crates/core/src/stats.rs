//! Cost-population summaries, histogram and Q-Q data, and the Z-statistics
//! that rate nearest-neighbor results against random sampling.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation (denominator `n`).
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(costs: &[f64]) -> Result<Moments> {
    if costs.is_empty() {
        return Err(invalid("cannot summarize an empty population"));
    }
    let n = costs.len() as f64;
    let mean = costs.iter().sum::<f64>() / n;
    let var = costs.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n;
    let (min, max) = costs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
            (lo.min(c), hi.max(c))
        });
    Ok(Moments {
        n: costs.len(),
        // Rounding can push the mean of near-constant data a hair outside.
        mean: mean.clamp(min, max),
        std: libm::sqrt(var),
        min,
        max,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` edges; the last bin includes its right edge.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Uniform-width bins spanning `[min, max]`. Constant data lands in the
/// first bin.
pub fn histogram(costs: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(invalid("histogram needs at least one bin"));
    }
    let m = summarize(costs)?;
    let width = (m.max - m.min) / bins as f64;
    let edges = (0..=bins)
        .map(|k| {
            if k == bins {
                m.max
            } else {
                m.min + width * k as f64
            }
        })
        .collect();
    let mut counts = vec![0u64; bins];
    for &c in costs {
        let k = if width > 0.0 {
            (((c - m.min) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Standard normal lower-tail probability `Φ(z)`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// Standard normal upper-tail probability `1 - Φ(z)`, without cancellation.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * libm::exp(-0.5 * z * z)
}

/// Inverse of [`normal_cdf`] on `(0, 1)`.
///
/// Wichura's AS 241 (PPND16) rational approximations, followed by one Newton
/// step against the erfc-based tail on the side of `p`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("normal quantile needs p in (0, 1)"));
    }
    let x = ppnd16(p);
    let step = if p < 0.5 {
        (normal_cdf(x) - p) / normal_pdf(x)
    } else {
        ((1.0 - p) - normal_sf(x)) / normal_pdf(x)
    };
    Ok(if step.is_finite() { x - step } else { x })
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn ppnd16(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_5,
        1.331_416_678_917_843_8e2,
        1.971_590_950_306_551_3e3,
        1.373_169_376_550_946e4,
        4.592_195_393_154_987e4,
        6.726_577_092_700_87e4,
        3.343_057_558_358_813e4,
        2.509_080_928_730_122_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091e1,
        6.871_870_074_920_579e2,
        5.394_196_021_424_751e3,
        2.121_379_430_158_659_7e4,
        3.930_789_580_009_271e4,
        2.872_908_573_572_194_3e4,
        5.226_495_278_852_545e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5,
        4.630_337_846_156_546,
        5.769_497_221_460_691,
        3.647_848_324_763_204_5,
        1.270_458_252_452_368_4,
        2.417_807_251_774_506e-1,
        2.272_384_498_926_918_4e-2,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_759,
        1.676_384_830_183_803_8,
        6.897_673_349_851e-1,
        1.481_039_764_274_800_8e-1,
        1.519_866_656_361_645_7e-2,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_9e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103,
        5.463_784_911_164_114,
        1.784_826_539_917_291_3,
        2.965_605_718_285_048_7e-1,
        2.653_218_952_657_612_4e-2,
        1.242_660_947_388_078_4e-3,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_88e-1,
        1.369_298_809_227_358e-1,
        1.487_536_129_085_061_5e-2,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_939_7e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = libm::sqrt(-libm::log(tail));
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QQSeries {
    /// `(theoretical normal quantile, normalized sample quantile)`, ascending.
    pub points: Vec<(f64, f64)>,
    /// Pearson correlation of the two coordinates.
    pub correlation: f64,
}

/// Normal Q-Q data with plotting positions `(i + 0.5) / n`.
pub fn qq_data(costs: &[f64]) -> Result<QQSeries> {
    if costs.len() < 3 {
        return Err(invalid("Q-Q data needs at least 3 values"));
    }
    let m = summarize(costs)?;
    if m.std == 0.0 {
        return Err(Error::DegenerateData("zero standard deviation"));
    }
    let mut z: Vec<f64> = costs.iter().map(|c| (c - m.mean) / m.std).collect();
    z.sort_unstable_by(f64::total_cmp);
    let n = z.len() as f64;
    let points: Vec<(f64, f64)> = z
        .into_iter()
        .enumerate()
        .map(|(i, s)| normal_quantile((i as f64 + 0.5) / n).map(|q| (q, s)))
        .collect::<Result<_>>()?;
    let correlation = pearson(&points);
    Ok(QQSeries {
        points,
        correlation,
    })
}

fn pearson(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (mx / n, my / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0)
}

/// Standardized gaps between nearest-neighbor results and a random sample,
/// in units of the sample's standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZScores {
    /// `(mean(NN) - mean(sample)) / std(sample)`.
    pub z: f64,
    /// `(min(NN) - min(sample)) / std(sample)`.
    pub z_prime: f64,
    /// `(max(NN) - min(sample)) / std(sample)`.
    pub z_double_prime: f64,
}

pub fn z_scores(nn: &Moments, sample: &Moments) -> Result<ZScores> {
    if sample.std.is_nan() || sample.std <= 0.0 {
        return Err(Error::DegenerateData("sample standard deviation is zero"));
    }
    Ok(ZScores {
        z: (nn.mean - sample.mean) / sample.std,
        z_prime: (nn.min - sample.min) / sample.std,
        z_double_prime: (nn.max - sample.min) / sample.std,
    })
}

/// `(p_c, p_ln)`: the chance one random path falls below level `z`, and the
/// chance at least one of `n` independent paths does.
///
/// `1 - (1 - p_c)^n` is evaluated as `-expm1(n * log1p(-p_c))`, which keeps
/// full relative accuracy when `p_c` is far below machine epsilon.
pub fn p_lower_n(z: f64, n: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(invalid("number of draws must be at least 1"));
    }
    let p_c = normal_cdf(z);
    if n == 1 {
        return Ok((p_c, p_c));
    }
    let p_ln = -libm::expm1(n as f64 * libm::log1p(-p_c));
    Ok((p_c, p_ln.clamp(p_c, 1.0)))
}

/// Nearest-neighbor versus random-sample comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZReport {
    pub scores: ZScores,
    /// Draws `n` used for `p_ln`.
    pub draws: u64,
    /// Lower-tail probability `Φ(z)`.
    pub p_c: f64,
    /// Upper-tail `1 - Φ(z)`, kept for comparison with the other orientation.
    pub p_c_upper: f64,
    pub p_ln: f64,
    pub p_c_prime: f64,
    pub p_ln_prime: f64,
    pub p_c_double_prime: f64,
    pub p_ln_double_prime: f64,
}

impl ZReport {
    pub fn new(nn: &Moments, sample: &Moments, draws: u64) -> Result<Self> {
        let scores = z_scores(nn, sample)?;
        let (p_c, p_ln) = p_lower_n(scores.z, draws)?;
        let (p_c_prime, p_ln_prime) = p_lower_n(scores.z_prime, draws)?;
        let (p_c_double_prime, p_ln_double_prime) = p_lower_n(scores.z_double_prime, draws)?;
        Ok(Self {
            scores,
            draws,
            p_c,
            p_c_upper: normal_sf(scores.z),
            p_ln,
            p_c_prime,
            p_ln_prime,
            p_c_double_prime,
            p_ln_double_prime,
        })
    }
}
