//! Statistics over completed runs: empirical distributions, queue-occupancy
//! summaries, byte shares, least squares, rank correlation, and multi-run
//! envelopes. All pure functions — nothing here touches simulation state.

use crate::error::MetricsError;
use crate::transport::link::DequeueSample;
use serde::Serialize;

/// Empirical distribution as a right-continuous step function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDist {
    /// Sorted unique sample values.
    xs: Vec<f64>,
    /// cum[i] = number of samples ≤ xs[i].
    cum: Vec<u64>,
    n: u64,
    sum: f64,
}

impl StepDist {
    pub fn from_samples(samples: &[f64]) -> Result<Self, MetricsError> {
        if samples.is_empty() {
            return Err(MetricsError::EmptySamples);
        }
        debug_assert!(samples.iter().all(|x| x.is_finite()));
        let mut sorted: Vec<f64> = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sum = sorted.iter().sum();
        let mut xs: Vec<f64> = Vec::new();
        let mut cum: Vec<u64> = Vec::new();
        for (i, &x) in sorted.iter().enumerate() {
            if xs.last() == Some(&x) {
                *cum.last_mut().unwrap() = (i + 1) as u64;
            } else {
                xs.push(x);
                cum.push((i + 1) as u64);
            }
        }
        Ok(StepDist {
            xs,
            cum,
            n: samples.len() as u64,
            sum,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    pub fn min(&self) -> f64 {
        self.xs[0]
    }

    pub fn max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// Distinct sample values (the step points).
    pub fn support(&self) -> &[f64] {
        &self.xs
    }

    /// F(x) = fraction of samples ≤ x.
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.xs.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1] as f64 / self.n as f64
        }
    }

    /// P(X > x).
    pub fn ccdf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// Smallest sample value with F(x) ≥ p, for p ∈ (0, 1].
    pub fn quantile(&self, p: f64) -> f64 {
        debug_assert!(p > 0.0 && p <= 1.0);
        let need = (p * self.n as f64).ceil() as u64;
        let idx = self.cum.partition_point(|&c| c < need);
        self.xs[idx.min(self.xs.len() - 1)]
    }
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Population standard deviation (divides by n).
pub fn std_pop(samples: &[f64]) -> f64 {
    let m = mean(samples);
    (samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / samples.len() as f64).sqrt()
}

/// Summary of a dequeue log: distribution of post-dequeue occupancy, busy
/// fraction, and means in bytes and milliseconds.
#[derive(Debug, Clone, Serialize)]
pub struct QueueStats {
    pub dist: StepDist,
    /// P(Q > 0) over post-dequeue samples.
    pub p_busy: f64,
    pub mean_bytes: f64,
    /// mean_bytes × 8 / capacity, expressed in ms — exact by construction.
    pub mean_ms: f64,
}

pub fn queue_stats(log: &[DequeueSample], bps: u64) -> Result<QueueStats, MetricsError> {
    if log.is_empty() {
        return Err(MetricsError::EmptyLog);
    }
    let samples: Vec<f64> = log.iter().map(|s| s.bytes as f64).collect();
    let dist = StepDist::from_samples(&samples).expect("non-empty");
    let p_busy = dist.ccdf(0.0);
    let mean_bytes = dist.mean();
    let mean_ms = bytes_to_ms(mean_bytes, bps);
    Ok(QueueStats {
        dist,
        p_busy,
        mean_bytes,
        mean_ms,
    })
}

/// Drain time of `bytes` at `bps`, in milliseconds.
pub fn bytes_to_ms(bytes: f64, bps: u64) -> f64 {
    bytes * 8.0 * 1000.0 / bps as f64
}

/// Percent split (tcp_pct, utp_pct) of a byte total; errors when nothing
/// was transferred.
pub fn byte_share(tcp_bytes: u64, utp_bytes: u64) -> Result<(f64, f64), MetricsError> {
    let total = tcp_bytes + utp_bytes;
    if total == 0 {
        return Err(MetricsError::ZeroBytes);
    }
    let tcp = tcp_bytes as f64 * 100.0 / total as f64;
    Ok((tcp, 100.0 - tcp))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Ordinary least squares over (x, y) points.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinFit, MetricsError> {
    if points.len() < 2 {
        return Err(MetricsError::TooFewPoints(points.len()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(MetricsError::DegenerateX);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LinFit {
        slope,
        intercept,
        r_squared,
        n: points.len(),
    })
}

/// Ranks with ties averaged (1-based).
fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson over average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let pts: Vec<(f64, f64)> = rx.into_iter().zip(ry).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Pointwise min/max of several step functions on their merged support.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub grid: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Envelope of CDF curves. Config compatibility is the caller's concern
/// (checked where run identity is known).
pub fn envelope_cdf(dists: &[&StepDist]) -> Result<Envelope, MetricsError> {
    if dists.len() < 2 {
        return Err(MetricsError::TooFewReports);
    }
    let mut grid: Vec<f64> = dists
        .iter()
        .flat_map(|d| d.support().iter().copied())
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let mut lo = Vec::with_capacity(grid.len());
    let mut hi = Vec::with_capacity(grid.len());
    for &x in &grid {
        let mut mn = f64::INFINITY;
        let mut mx = f64::NEG_INFINITY;
        for d in dists {
            let v = d.cdf(x);
            mn = mn.min(v);
            mx = mx.max(v);
        }
        lo.push(mn);
        hi.push(mx);
    }
    Ok(Envelope { grid, lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::SimTime;
    use proptest::prelude::*;

    fn log(bytes: &[u64]) -> Vec<DequeueSample> {
        bytes
            .iter()
            .enumerate()
            .map(|(i, &b)| DequeueSample {
                at: SimTime(i as u64),
                bytes: b,
                pkts: (b / 1500) as u32,
            })
            .collect()
    }

    #[test]
    fn cdf_single_sample() {
        let d = StepDist::from_samples(&[5.0]).unwrap();
        assert_eq!(d.cdf(5.0), 1.0);
        assert_eq!(d.cdf(4.999), 0.0);
    }

    #[test]
    fn cdf_midpoint() {
        let d = StepDist::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d.cdf(2.5), 0.5);
        assert_eq!(d.cdf(0.5), 0.0);
        assert_eq!(d.cdf(4.0), 1.0);
        assert_eq!(d.mean(), 2.5);
    }

    #[test]
    fn empty_samples_rejected() {
        assert_eq!(
            StepDist::from_samples(&[]).unwrap_err(),
            MetricsError::EmptySamples
        );
    }

    #[test]
    fn quantile_picks_smallest_value_covering_p() {
        let d = StepDist::from_samples(&[10.0, 20.0, 30.0, 40.0]).unwrap();
        assert_eq!(d.quantile(0.25), 10.0);
        assert_eq!(d.quantile(0.5), 20.0);
        assert_eq!(d.quantile(0.75), 30.0);
        assert_eq!(d.quantile(1.0), 40.0);
    }

    #[test]
    fn queue_stats_example() {
        let qs = queue_stats(&log(&[0, 0, 1500, 1500]), 1_000_000).unwrap();
        assert_eq!(qs.p_busy, 0.5);
        assert_eq!(qs.mean_bytes, 750.0);
        assert_eq!(qs.mean_ms, 750.0 * 8.0 / 1000.0);
    }

    #[test]
    fn queue_stats_all_zero() {
        let qs = queue_stats(&log(&[0, 0, 0]), 1_000_000).unwrap();
        assert_eq!(qs.p_busy, 0.0);
        assert_eq!(qs.mean_bytes, 0.0);
        assert_eq!(qs.mean_ms, 0.0);
    }

    #[test]
    fn unit_conversion_is_exact() {
        // 50 000 B at 1 Mbps drain in exactly 400 ms.
        assert_eq!(bytes_to_ms(50_000.0, 1_000_000), 400.0);
        let qs = queue_stats(&log(&[50_000]), 1_000_000).unwrap();
        assert_eq!(qs.mean_ms, qs.mean_bytes * 8.0 / 1_000_000.0 * 1000.0);
    }

    #[test]
    fn empty_log_rejected() {
        assert_eq!(
            queue_stats(&[], 1_000_000).unwrap_err(),
            MetricsError::EmptyLog
        );
    }

    #[test]
    fn byte_share_sums_to_100() {
        assert_eq!(byte_share(0, 500).unwrap(), (0.0, 100.0));
        assert_eq!(byte_share(500, 0).unwrap(), (100.0, 0.0));
        let (t, u) = byte_share(300, 700).unwrap();
        assert!((t - 30.0).abs() < 1e-12);
        assert!((t + u - 100.0).abs() < 1e-12);
        assert_eq!(byte_share(0, 0).unwrap_err(), MetricsError::ZeroBytes);
    }

    #[test]
    fn linear_fit_recovers_lines() {
        let f = linear_fit(&[(1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!(f.intercept.abs() < 1e-12);

        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 * i as f64 + 5.0)).collect();
        let f = linear_fit(&pts).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-9);
        assert!((f.intercept - 5.0).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn linear_fit_rejects_degenerate() {
        assert_eq!(
            linear_fit(&[(1.0, 1.0), (1.0, 2.0)]).unwrap_err(),
            MetricsError::DegenerateX
        );
        assert_eq!(
            linear_fit(&[(1.0, 1.0)]).unwrap_err(),
            MetricsError::TooFewPoints(1)
        );
    }

    #[test]
    fn spearman_detects_monotonicity() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let inc = [2.0, 4.0, 9.0, 16.0, 100.0];
        let dec = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert!((spearman(&x, &inc) - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &dec) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_averages_ties() {
        let r = average_ranks(&[10.0, 20.0, 20.0, 30.0]);
        assert_eq!(r, vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn envelope_of_identical_runs_degenerates() {
        let a = StepDist::from_samples(&[1.0, 2.0, 3.0]).unwrap();
        let b = a.clone();
        let env = envelope_cdf(&[&a, &b]).unwrap();
        assert_eq!(env.lo, env.hi);
    }

    #[test]
    fn envelope_bounds_every_member_and_stays_monotone() {
        let a = StepDist::from_samples(&[1.0, 2.0, 3.0]).unwrap();
        let b = StepDist::from_samples(&[1.5, 2.5, 3.5]).unwrap();
        let c = StepDist::from_samples(&[0.5, 2.0, 4.0]).unwrap();
        let env = envelope_cdf(&[&a, &b, &c]).unwrap();
        for (i, &x) in env.grid.iter().enumerate() {
            for d in [&a, &b, &c] {
                let v = d.cdf(x);
                assert!(env.lo[i] <= v + 1e-12 && v <= env.hi[i] + 1e-12);
            }
            if i > 0 {
                assert!(env.lo[i] >= env.lo[i - 1] - 1e-12, "lo stays monotone");
                assert!(env.hi[i] >= env.hi[i - 1] - 1e-12, "hi stays monotone");
            }
        }
    }

    proptest! {
        /// ECDF built by the struct matches a brute-force counting oracle at
        /// every sample point and at points between.
        #[test]
        fn cdf_matches_counting_oracle(mut v in proptest::collection::vec(-1e6f64..1e6, 1..200)) {
            v.iter_mut().for_each(|x| *x = x.round());
            let d = StepDist::from_samples(&v).unwrap();
            for probe in v.iter().copied().chain(v.iter().map(|x| x + 0.5)) {
                let count = v.iter().filter(|&&s| s <= probe).count();
                let expect = count as f64 / v.len() as f64;
                prop_assert!((d.cdf(probe) - expect).abs() < 1e-12);
            }
            prop_assert!((d.cdf(d.max()) - 1.0).abs() < 1e-12);
            prop_assert!((d.ccdf(d.max())).abs() < 1e-12);
        }
    }
}
