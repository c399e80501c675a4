//! Long-memory noise, empirical-distribution sampling and rank reordering.

use std::cmp::Ordering;
use std::io::{Read, Write};
use std::sync::Arc;

use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum StochError {
    #[error("Hurst exponent {0} outside (0, 1)")]
    Hurst(f64),
    #[error("series length {0} too short (need at least 2)")]
    Length(usize),
    #[error("invalid distribution parameter: {0}")]
    Parameter(String),
    #[error("invalid empirical cdf: {0}")]
    Cdf(String),
    #[error("cdf csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Autocovariance of unit-variance fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance<T: Real>(k: usize, h: T) -> T {
    let two_h = h + h;
    let k = T::from_usize_lossy(k);
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    half * ((k + T::one()).powf(two_h) - two * k.powf(two_h) + (k - T::one()).abs().powf(two_h))
}

#[derive(Debug, Clone)]
pub struct FgnSeries<T> {
    pub values: Vec<T>,
    pub target_h: T,
}

/// Exact fGn sampler based on circulant embedding of the covariance matrix.
///
/// The embedding eigenvalues are computed once, so drawing many series of the
/// same length and exponent costs one FFT each.
pub struct FgnGenerator<T: Real> {
    n: usize,
    h: T,
    // sqrt(eigenvalue / m) for each Fourier mode of the embedding.
    scale: Vec<T>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> FgnGenerator<T> {
    pub fn new(n: usize, h: T) -> Result<Self, StochError> {
        if !(h > T::zero() && h < T::one()) {
            return Err(StochError::Hurst(h.as_f64()));
        }
        if n < 2 {
            return Err(StochError::Length(n));
        }
        let half = n.next_power_of_two();
        let m = 2 * half;
        let mut row: Vec<Complex<T>> = (0..m)
            .map(|j| {
                let lag = if j <= half { j } else { m - j };
                Complex::new(fgn_autocovariance(lag, h), T::zero())
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let m_t = T::from_usize_lossy(m);
        // The fGn embedding is non-negative definite; clip rounding noise.
        let scale = row
            .iter()
            .map(|c| (c.re.max(T::zero()) / m_t).sqrt())
            .collect();
        Ok(Self { n, h, scale, fft })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn hurst(&self) -> T {
        self.h
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FgnSeries<T> {
        let mut buf: Vec<Complex<T>> = self
            .scale
            .iter()
            .map(|&s| Complex::new(s * T::standard_normal(rng), s * T::standard_normal(rng)))
            .collect();
        self.fft.process(&mut buf);
        FgnSeries {
            values: buf[..self.n].iter().map(|c| c.re).collect(),
            target_h: self.h,
        }
    }
}

/// Draw `n` points of unit-variance fGn with Hurst exponent `h`.
pub fn generate_fgn<T: Real, R: Rng + ?Sized>(
    n: usize,
    h: T,
    rng: &mut R,
) -> Result<FgnSeries<T>, StochError> {
    Ok(FgnGenerator::new(n, h)?.sample(rng))
}

/// Map increments to order directions; exact zeros become `+1`.
pub fn signs_from_fgn<T: Real>(values: &[T]) -> Vec<i8> {
    values
        .iter()
        .map(|&v| if v < T::zero() { -1 } else { 1 })
        .collect()
}

/// Indices that sort `values` ascending; ties keep their original order.
pub fn argsort<T: PartialOrd>(values: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    idx
}

/// Permute `values` so their rank sequence follows `reference`.
///
/// The output position holding the k-th smallest reference value receives
/// the k-th smallest input value.
pub fn reorder_by_ranks<T: Copy + PartialOrd, U: PartialOrd>(
    values: &[T],
    reference: &[U],
) -> Vec<T> {
    assert_eq!(
        values.len(),
        reference.len(),
        "rank reference length mismatch"
    );
    let sorted: Vec<T> = argsort(values).into_iter().map(|i| values[i]).collect();
    let mut out = sorted.clone();
    for (rank, pos) in argsort(reference).into_iter().enumerate() {
        out[pos] = sorted[rank];
    }
    out
}

/// Impose the long memory of fGn with exponent `h` on an arbitrary marginal
/// by rank reordering against a fresh fGn draw.
pub fn impose_long_memory<T: Real, R: Rng + ?Sized>(
    values: &[T],
    h: T,
    rng: &mut R,
) -> Result<Vec<T>, StochError> {
    let noise = generate_fgn(values.len(), h, rng)?;
    Ok(reorder_by_ranks(values, &noise.values))
}

/// Same as [`impose_long_memory`] with a pre-built generator.
pub fn impose_long_memory_with<T: Real, R: Rng + ?Sized>(
    values: &[T],
    generator: &FgnGenerator<T>,
    rng: &mut R,
) -> Vec<T> {
    let noise = generator.sample(rng);
    reorder_by_ranks(values, &noise.values)
}

/// Piecewise-linear cumulative distribution on `[-1, 1]`.
///
/// `F(x)` is 0 left of the first support point, jumps to `F_1` there (an atom
/// at `x_1`), interpolates linearly between support points and reaches
/// exactly 1 at the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf<T> {
    support: Vec<T>,
    probs: Vec<T>,
}

impl<T: Real> EmpiricalCdf<T> {
    pub fn new(support: Vec<T>, probs: Vec<T>) -> Result<Self, StochError> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(StochError::Cdf(
                "support and probabilities must be non-empty and of equal length".into(),
            ));
        }
        if support.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(StochError::Cdf(
                "support must be strictly increasing".into(),
            ));
        }
        if support[0] < -T::one() || *support.last().unwrap() > T::one() {
            return Err(StochError::Cdf("support must lie within [-1, 1]".into()));
        }
        if probs[0] < T::zero() || probs.windows(2).any(|w| w[1] < w[0]) {
            return Err(StochError::Cdf(
                "probabilities must be non-decreasing from >= 0".into(),
            ));
        }
        if *probs.last().unwrap() != T::one() {
            return Err(StochError::Cdf(
                "final probability must be exactly 1".into(),
            ));
        }
        Ok(Self { support, probs })
    }

    /// Build from raw samples.
    ///
    /// Each distinct value's cumulative mass is placed at the midpoint to the
    /// next distinct value, which undoes the half-step bias of rounding to a
    /// grid; the lowest value keeps its own mass as an atom. At most
    /// `max_points` support points are kept (quantile thinning).
    pub fn from_samples(samples: &[T], max_points: usize) -> Result<Self, StochError> {
        let mut sorted: Vec<T> = samples.iter().copied().filter(|v| v.is_finite()).collect();
        if sorted.is_empty() {
            return Err(StochError::Cdf("no finite samples".into()));
        }
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = T::from_usize_lossy(sorted.len());
        // (distinct value, ECDF at that value)
        let mut distinct: Vec<(T, T)> = Vec::new();
        for (i, &v) in sorted.iter().enumerate() {
            let f = T::from_usize_lossy(i + 1) / n;
            match distinct.last_mut() {
                Some(last) if last.0 == v => last.1 = f,
                _ => distinct.push((v, f)),
            }
        }
        let max_points = max_points.max(2);
        if distinct.len() > max_points {
            let k = distinct.len();
            let mut thinned: Vec<(T, T)> = (0..max_points)
                .map(|j| distinct[j * (k - 1) / (max_points - 1)])
                .collect();
            thinned.dedup_by(|a, b| a.0 == b.0);
            distinct = thinned;
        }
        let clamp = |v: T| v.max(-T::one()).min(T::one());
        let mut support = vec![clamp(distinct[0].0)];
        let mut probs = vec![distinct[0].1];
        for w in distinct.windows(2) {
            let mid = clamp((w[0].0 + w[1].0) * T::lit(0.5));
            if mid > *support.last().unwrap() {
                support.push(mid);
                probs.push(w[0].1);
            }
        }
        let last = clamp(distinct.last().unwrap().0);
        if last > *support.last().unwrap() {
            support.push(last);
            probs.push(T::one());
        } else {
            *probs.last_mut().unwrap() = T::one();
        }
        Self::new(support, probs)
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Evaluate `F(x)`.
    pub fn cdf(&self, x: T) -> T {
        let s = &self.support;
        if x < s[0] {
            return T::zero();
        }
        if x >= *s.last().unwrap() {
            return T::one();
        }
        let i = s.partition_point(|&v| v <= x);
        let (x0, x1) = (s[i - 1], s[i]);
        let (f0, f1) = (self.probs[i - 1], self.probs[i]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    fn cdf_left(&self, x: T) -> T {
        if x <= self.support[0] {
            T::zero()
        } else {
            self.cdf(x)
        }
    }

    /// Generalised inverse `F^{-1}(u)` with linear interpolation.
    pub fn sample(&self, u: T) -> T {
        let u = u.max(T::zero()).min(T::one());
        let i = self.probs.partition_point(|&f| f < u);
        if i == 0 {
            return self.support[0];
        }
        if i >= self.probs.len() {
            return *self.support.last().unwrap();
        }
        let (f0, f1) = (self.probs[i - 1], self.probs[i]);
        let (x0, x1) = (self.support[i - 1], self.support[i]);
        x0 + (x1 - x0) * (u - f0) / (f1 - f0)
    }

    /// Kolmogorov-Smirnov distance `sup |F - G|` between two cdfs.
    pub fn ks_distance(&self, other: &Self) -> T {
        self.support
            .iter()
            .chain(other.support.iter())
            .map(|&x| {
                let right = (self.cdf(x) - other.cdf(x)).abs();
                let left = (self.cdf_left(x) - other.cdf_left(x)).abs();
                right.max(left)
            })
            .fold(T::zero(), T::max)
    }

    /// One-sample KS distance of `samples` against this cdf.
    pub fn ks_against_samples(&self, samples: &[T]) -> T {
        let mut sorted: Vec<T> = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = T::from_usize_lossy(sorted.len());
        let mut d = T::zero();
        let mut i = 0;
        while i < sorted.len() {
            let v = sorted[i];
            let mut j = i;
            while j < sorted.len() && sorted[j] == v {
                j += 1;
            }
            let below = T::from_usize_lossy(i) / n;
            let at = T::from_usize_lossy(j) / n;
            d = d
                .max((self.cdf_left(v) - below).abs())
                .max((self.cdf(v) - at).abs());
            i = j;
        }
        d
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), StochError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x", "F"])?;
        for (x, f) in self.support.iter().zip(&self.probs) {
            wtr.write_record([x.as_f64().to_string(), f.as_f64().to_string()])?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, StochError> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for rec in rdr.deserialize::<(f64, f64)>() {
            let (x, f) = rec?;
            support.push(T::lit(x));
            probs.push(T::lit(f));
        }
        Self::new(support, probs)
    }
}

#[derive(Serialize, Deserialize)]
struct CdfTable {
    x: Vec<f64>,
    #[serde(rename = "F")]
    f: Vec<f64>,
}

impl Serialize for EmpiricalCdf<f64> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CdfTable {
            x: self.support.clone(),
            f: self.probs.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EmpiricalCdf<f64> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let t = CdfTable::deserialize(deserializer)?;
        EmpiricalCdf::new(t.x, t.f).map_err(de::Error::custom)
    }
}

/// Relative price level of a cancellation: log-normal(`mu`, `sigma`)
/// truncated to `(0, 1]`.
pub fn sample_cancel_level<T: Real, R: Rng + ?Sized>(
    mu: T,
    sigma: T,
    rng: &mut R,
) -> Result<T, StochError> {
    if !(sigma > T::zero()) {
        return Err(StochError::Parameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    // Rejection needs P(X <= 1) = Phi(-mu / sigma) to be workable; otherwise
    // sample the truncated normal of ln X by inversion.
    let accept =
        statrs::function::erf::erfc(mu.as_f64() / sigma.as_f64() / std::f64::consts::SQRT_2) / 2.0;
    if accept > 1e-3 {
        loop {
            let x = (mu + sigma * T::standard_normal(rng)).exp();
            if x <= T::one() && x > T::zero() {
                return Ok(x);
            }
        }
    }
    let u: f64 = rng.random::<f64>() * accept;
    let z =
        -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * u.max(f64::MIN_POSITIVE));
    let x = (mu.as_f64() + sigma.as_f64() * z).exp().min(1.0);
    Ok(T::lit(x.max(f64::MIN_POSITIVE)))
}

/// Density of the relative queue position of a cancellation.
pub fn cancel_position_density<T: Real>(y: T, gamma: T) -> T {
    let z = (gamma + T::one() - gamma.exp()) / gamma;
    (T::one() - (gamma * y).exp()) / z
}

/// Relative queue position of a cancellation, density `(1 - e^{gamma Y}) / z`
/// on `(0, 1]`, sampled by rejection against the maximum at `Y = 1`.
pub fn sample_cancel_position<T: Real, R: Rng + ?Sized>(
    gamma: T,
    rng: &mut R,
) -> Result<T, StochError> {
    if !(gamma < T::zero()) {
        return Err(StochError::Parameter(format!(
            "gamma must be negative, got {gamma}"
        )));
    }
    let ceiling = T::one() - gamma.exp();
    loop {
        let y = T::one() - T::unit_uniform(rng);
        let accept = (T::one() - (gamma * y).exp()) / ceiling;
        if T::unit_uniform(rng) < accept {
            return Ok(y);
        }
    }
}
