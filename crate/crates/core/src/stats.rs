//! Estimators: detrending-moving-average Hurst exponents, power-law tails,
//! returns, divergence rates, half-lives and two-regressor least squares.
//!
//! Inputs and outputs use the generic scalar; accumulations run in `f64`.

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("series too short: need at least {needed} points, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("non-positive or non-finite value {value} at index {index}")]
    NonPositive { index: usize, value: f64 },
    #[error("fewer than {needed} points in the fitted tail")]
    SparseTail { needed: usize },
    #[error("series never crosses {threshold}")]
    NoCrossing { threshold: f64 },
    #[error("regressors are collinear")]
    Collinear,
    #[error("invalid input: {0}")]
    Invalid(String),
}

fn f64s<T: Real>(values: &[T]) -> Vec<f64> {
    values.iter().map(|v| v.as_f64()).collect()
}

/// OLS line `y = a + b x`, returning `(a, b, stderr of b)`.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let stderr = if x.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (intercept, slope, stderr)
}

/// The default largest window is the series length over this.
///
/// Wider windows let the pinned end of the demeaned profile pull strongly
/// persistent series low: at `H = 0.9` and `n = 2^16` the upper scale
/// `n / 10` loses about 0.04 on average, `n / 100` about 0.015.
pub const DEFAULT_SCALE_DIVISOR: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmaOptions {
    pub scale_min: usize,
    /// Defaults to a hundredth of the series length, and never less than
    /// ten times `scale_min`.
    pub scale_max: Option<usize>,
    pub points_per_decade: usize,
}

impl Default for DmaOptions {
    fn default() -> Self {
        Self {
            scale_min: 10,
            scale_max: None,
            points_per_decade: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmaResult<T> {
    pub scales: Vec<usize>,
    pub fluctuations: Vec<T>,
    pub hurst: T,
    pub stderr: T,
}

/// Log-spaced integer window sizes in `[lo, hi]`.
pub fn log_scales(lo: usize, hi: usize, per_decade: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).log10(), (hi as f64).log10());
    let steps = ((b - a) * per_decade as f64).ceil().max(1.0) as usize;
    let mut out: Vec<usize> = (0..=steps)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / steps as f64).round() as usize)
        .map(|l| l.clamp(lo, hi))
        .collect();
    out.dedup();
    out
}

/// Hurst exponent by the backward detrending moving average of the profile.
///
/// For each window `l` the profile `y` (cumulative sum of the demeaned
/// series) is compared with its trailing `l`-point average; `F(l)` is the
/// root-mean-square residual and `H` the slope of `log F` on `log l`.
pub fn dma_hurst<T: Real>(series: &[T], opts: DmaOptions) -> Result<DmaResult<T>, StatsError> {
    let n = series.len();
    let lo = opts.scale_min.max(2);
    let needed = 100 * lo;
    if n < needed {
        return Err(StatsError::TooShort { needed, got: n });
    }
    let hi = opts
        .scale_max
        .unwrap_or((n / DEFAULT_SCALE_DIVISOR).max(10 * lo))
        .min(n / 2);
    if hi <= lo {
        return Err(StatsError::Invalid(format!(
            "scale range [{lo}, {hi}] is empty"
        )));
    }
    let x = f64s(series);
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut profile = Vec::with_capacity(n);
    let mut acc = 0.0;
    for v in &x {
        acc += v - mean;
        profile.push(acc);
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut s = 0.0;
    for y in &profile {
        s += y;
        prefix.push(s);
    }
    let scales = log_scales(lo, hi, opts.points_per_decade.max(1));
    let mut fluct = Vec::with_capacity(scales.len());
    for &l in &scales {
        let inv = 1.0 / l as f64;
        let mut sq = 0.0;
        for i in (l - 1)..n {
            let avg = (prefix[i + 1] - prefix[i + 1 - l]) * inv;
            sq += (profile[i] - avg).powi(2);
        }
        fluct.push((sq / (n - l + 1) as f64).sqrt());
    }
    if fluct.iter().any(|f| !(*f > 0.0)) {
        return Err(StatsError::Invalid("series has no fluctuations".into()));
    }
    let lx: Vec<f64> = scales.iter().map(|&l| (l as f64).ln()).collect();
    let ly: Vec<f64> = fluct.iter().map(|f| f.ln()).collect();
    let (_, h, se) = fit_line(&lx, &ly);
    Ok(DmaResult {
        scales,
        fluctuations: fluct.into_iter().map(T::lit).collect(),
        hurst: T::lit(h),
        stderr: T::lit(se),
    })
}

/// Log returns `R(t) = ln(m(t) / m(t-1))` and volatilities `V = |R|`.
pub fn returns_and_volatility<T: Real>(mids: &[T]) -> Result<(Vec<T>, Vec<T>), StatsError> {
    if mids.len() < 2 {
        return Err(StatsError::TooShort {
            needed: 2,
            got: mids.len(),
        });
    }
    if let Some((index, v)) = mids
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > T::zero()))
    {
        return Err(StatsError::NonPositive {
            index,
            value: v.as_f64(),
        });
    }
    let r: Vec<T> = mids.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let v = r.iter().map(|x| x.abs()).collect();
    Ok((r, v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit<T> {
    /// Exponent of the complementary cdf, `P(X > x) ~ x^(-alpha)`.
    pub alpha: T,
    pub x_min: T,
    pub ks: T,
    pub n_tail: usize,
}

impl<T: Real> TailFit<T> {
    /// Exponent of the density, `alpha + 1`.
    pub fn density_exponent(&self) -> T {
        self.alpha + T::one()
    }
}

/// Largest number of `x_min` candidates scanned.
pub const TAIL_CANDIDATES: usize = 250;
/// Smallest tail accepted for a fit.
pub const MIN_TAIL: usize = 10;

/// Power-law tail by maximum likelihood with the cutoff chosen to minimise
/// the Kolmogorov-Smirnov distance between the tail and the fit.
///
/// Non-positive samples are ignored. Candidate cutoffs are distinct sample
/// values at evenly spaced sample quantiles.
pub fn fit_power_law_tail<T: Real>(samples: &[T]) -> Result<TailFit<T>, StatsError> {
    let mut xs: Vec<f64> = samples
        .iter()
        .map(|v| v.as_f64())
        .filter(|v| v.is_finite() && *v > 0.0)
        .collect();
    if xs.len() < 100 {
        return Err(StatsError::TooShort {
            needed: 100,
            got: xs.len(),
        });
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let logs: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + logs[i];
    }
    // Start index of each candidate: first occurrence of the value.
    let last_start = n - MIN_TAIL;
    let mut starts: Vec<usize> = (0..TAIL_CANDIDATES)
        .map(|j| j * last_start / (TAIL_CANDIDATES - 1))
        .map(|i| xs.partition_point(|&v| v < xs[i]))
        .filter(|&i| n - i >= MIN_TAIL)
        .collect();
    starts.dedup();
    let mut best: Option<(f64, f64, f64, usize)> = None;
    for &i0 in &starts {
        let n_tail = n - i0;
        let lx_min = logs[i0];
        let s = suffix[i0] - n_tail as f64 * lx_min;
        if !(s > 0.0) {
            continue;
        }
        let alpha = n_tail as f64 / s;
        let mut ks: f64 = 0.0;
        let mut i = i0;
        while i < n {
            let mut j = i;
            while j < n && xs[j] == xs[i] {
                j += 1;
            }
            let fit = 1.0 - (-alpha * (logs[i] - lx_min)).exp();
            let below = (i - i0) as f64 / n_tail as f64;
            let at = (j - i0) as f64 / n_tail as f64;
            ks = ks.max((fit - below).abs()).max((fit - at).abs());
            i = j;
        }
        if best.map_or(true, |b| ks < b.2) {
            best = Some((alpha, xs[i0], ks, n_tail));
        }
    }
    let (alpha, x_min, ks, n_tail) = best.ok_or(StatsError::SparseTail { needed: MIN_TAIL })?;
    Ok(TailFit {
        alpha: T::lit(alpha),
        x_min: T::lit(x_min),
        ks: T::lit(ks),
        n_tail,
    })
}

/// Exponential growth rate: slope of `ln p_t` on `t` over the trailing
/// `1 - fit_start_frac` of the series.
pub fn divergence_rate<T: Real>(prices: &[T], fit_start_frac: f64) -> Result<T, StatsError> {
    if let Some((index, v)) = prices
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > T::zero()))
    {
        return Err(StatsError::NonPositive {
            index,
            value: v.as_f64(),
        });
    }
    let start = ((prices.len() as f64) * fit_start_frac.clamp(0.0, 1.0)).floor() as usize;
    if prices.len().saturating_sub(start) < 2 {
        return Err(StatsError::TooShort {
            needed: start + 2,
            got: prices.len(),
        });
    }
    let t: Vec<f64> = (start..prices.len()).map(|i| i as f64).collect();
    let y: Vec<f64> = prices[start..].iter().map(|p| p.as_f64().ln()).collect();
    Ok(T::lit(fit_line(&t, &y).1))
}

/// Mean of the indices at which the series crosses or touches `p_ref / 2`.
pub fn half_life<T: Real>(prices: &[T], p_ref: T) -> Result<T, StatsError> {
    let th = p_ref.as_f64() / 2.0;
    let p = f64s(prices);
    let mut sum = 0.0;
    let mut count = 0usize;
    for t in 0..p.len() {
        let hit = p[t] == th || (t > 0 && (p[t - 1] - th) * (p[t] - th) < 0.0);
        if hit {
            sum += t as f64;
            count += 1;
        }
    }
    if count == 0 {
        return Err(StatsError::NoCrossing { threshold: th });
    }
    Ok(T::lit(sum / count as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit<T> {
    pub intercept: T,
    pub coef_up: T,
    pub coef_down: T,
    pub std_errors: [T; 3],
    pub t_values: [T; 3],
    /// Two-sided p-values for intercept, `coef_up` and `coef_down`.
    pub p_values: [T; 3],
    pub r2: T,
    pub adj_r2: T,
    /// Residual mean square `SSE / (n - 3)`.
    pub mse: T,
    pub residuals: Vec<T>,
    pub n: usize,
}

/// Solve the 3x3 system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` if a pivot vanishes relative to the matrix scale.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in (c + 1)..3 {
            let f = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = ((r + 1)..3).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Least squares `y = c0 + c_up * phi_up + c_down * abs_phi_down` with
/// t-test p-values.
pub fn ols2<T: Real>(y: &[T], phi_up: &[T], abs_phi_down: &[T]) -> Result<OlsFit<T>, StatsError> {
    let n = y.len();
    if phi_up.len() != n || abs_phi_down.len() != n {
        return Err(StatsError::Invalid("inputs differ in length".into()));
    }
    if n < 4 {
        return Err(StatsError::TooShort { needed: 4, got: n });
    }
    let (y, x1, x2) = (f64s(y), f64s(phi_up), f64s(abs_phi_down));
    // Centre the regressors to keep the normal equations well conditioned.
    let m1 = x1.iter().sum::<f64>() / n as f64;
    let m2 = x2.iter().sum::<f64>() / n as f64;
    let rows: Vec<[f64; 3]> = x1
        .iter()
        .zip(&x2)
        .map(|(a, b)| [1.0, a - m1, b - m2])
        .collect();
    let mut xtx = [[0.0; 3]; 3];
    let mut xty = [0.0; 3];
    for (row, yi) in rows.iter().zip(&y) {
        for i in 0..3 {
            xty[i] += row[i] * yi;
            for j in 0..3 {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    // Collinearity is judged on the centred regressors' correlation.
    let (s11, s22, s12) = (xtx[1][1], xtx[2][2], xtx[1][2]);
    if s11 <= 0.0 || s22 <= 0.0 || 1.0 - s12 * s12 / (s11 * s22) < 1e-10 {
        return Err(StatsError::Collinear);
    }
    let beta_c = solve3(xtx, xty).ok_or(StatsError::Collinear)?;
    let mut inv = [[0.0; 3]; 3];
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let col = solve3(xtx, e).ok_or(StatsError::Collinear)?;
        for r in 0..3 {
            inv[r][k] = col[r];
        }
    }
    let residuals: Vec<f64> = rows
        .iter()
        .zip(&y)
        .map(|(r, yi)| yi - (beta_c[0] + beta_c[1] * r[1] + beta_c[2] * r[2]))
        .collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let my = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let dof = (n - 3) as f64;
    let mse = sse / dof;
    // Back to the uncentred intercept.
    let intercept = beta_c[0] - beta_c[1] * m1 - beta_c[2] * m2;
    let coefs = [intercept, beta_c[1], beta_c[2]];
    let var_intercept = inv[0][0] + m1 * m1 * inv[1][1] + m2 * m2 * inv[2][2]
        - 2.0 * m1 * inv[0][1]
        - 2.0 * m2 * inv[0][2]
        + 2.0 * m1 * m2 * inv[1][2];
    let variances = [var_intercept, inv[1][1], inv[2][2]];
    let tdist = StudentsT::new(0.0, 1.0, dof).map_err(|e| StatsError::Invalid(e.to_string()))?;
    let mut se = [0.0; 3];
    let mut tv = [0.0; 3];
    let mut pv = [0.0; 3];
    for k in 0..3 {
        se[k] = (mse * variances[k].max(0.0)).sqrt();
        if se[k] > 0.0 {
            tv[k] = coefs[k] / se[k];
            pv[k] = 2.0 * (1.0 - tdist.cdf(tv[k].abs()));
        } else {
            tv[k] = if coefs[k] == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(coefs[k])
            };
            pv[k] = if coefs[k] == 0.0 { 1.0 } else { 0.0 };
        }
    }
    let r2 = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
    let adj_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / dof;
    let lit3 = |a: [f64; 3]| a.map(T::lit);
    Ok(OlsFit {
        intercept: T::lit(intercept),
        coef_up: T::lit(coefs[1]),
        coef_down: T::lit(coefs[2]),
        std_errors: lit3(se),
        t_values: lit3(tv),
        p_values: lit3(pv),
        r2: T::lit(r2),
        adj_r2: T::lit(adj_r2),
        mse: T::lit(mse),
        residuals: residuals.into_iter().map(T::lit).collect(),
        n,
    })
}
