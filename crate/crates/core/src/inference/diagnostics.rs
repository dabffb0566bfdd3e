//! Convergence diagnostics for scalar chain traces.

use super::pcn::ChainRecord;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Effective sample size `n / (1 + 2 sum_k rho_k)`.
///
/// Autocorrelations come from direct (biased) autocovariances and the sum
/// is truncated by Geyer's initial positive sequence: consecutive pairs
/// `rho_{2m} + rho_{2m+1}` are accumulated while they stay positive. The
/// result is clamped to `[1, n]`; a constant series has ESS 1.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 2 {
        return n as f64;
    }
    let mu = mean(series);
    let centered: Vec<f64> = series.iter().map(|x| x - mu).collect();
    let autocov = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let gamma0 = autocov(0);
    if !(gamma0 > f64::MIN_POSITIVE) {
        return 1.0;
    }
    let mut pair_sum = 0.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocov(lag) + autocov(lag + 1)) / gamma0;
        if pair <= 0.0 {
            break;
        }
        pair_sum += pair;
        lag += 2;
    }
    let tau = 2.0 * pair_sum - 1.0;
    let n = n as f64;
    if tau <= 0.0 {
        return n;
    }
    (n / tau).clamp(1.0, n)
}

/// Minimum ESS over the chain's probe set (log-likelihood trace plus the
/// latent probe traces), restricted to steps at or after `burn_in`.
pub fn chain_ess(record: &ChainRecord, burn_in: usize) -> f64 {
    let start = burn_in.min(record.len());
    std::iter::once(&record.log_likelihood)
        .chain(record.probes.iter())
        .map(|trace| effective_sample_size(&trace[start..]))
        .fold(f64::INFINITY, f64::min)
}

/// Gelman-Rubin potential scale reduction for equally long traces (longer
/// traces are truncated to the shortest). `None` with fewer than two chains
/// or fewer than two samples per chain.
pub fn potential_scale_reduction(traces: &[&[f64]]) -> Option<f64> {
    let m = traces.len();
    let n = traces.iter().map(|t| t.len()).min()?;
    if m < 2 || n < 2 {
        return None;
    }
    let means: Vec<f64> = traces.iter().map(|t| mean(&t[..n])).collect();
    let grand = mean(&means);
    let b = n as f64 / (m - 1) as f64 * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let w = traces
        .iter()
        .zip(&means)
        .map(|(t, mu)| t[..n].iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1) as f64)
        .sum::<f64>()
        / m as f64;
    if !(w > 0.0) {
        return None;
    }
    let var_plus = (n - 1) as f64 / n as f64 * w + b / n as f64;
    Some((var_plus / w).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_clamps_to_one() {
        assert_eq!(effective_sample_size(&[2.5; 100]), 1.0);
    }

    #[test]
    fn alternating_series_caps_at_n() {
        let xs: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(effective_sample_size(&xs), 100.0);
    }

    #[test]
    fn rhat_of_identical_distributions_near_one() {
        let a: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64).collect();
        let b: Vec<f64> = (0..1000).map(|i| ((i * 53 + 7) % 101) as f64).collect();
        let r = potential_scale_reduction(&[&a, &b]).unwrap();
        assert!((r - 1.0).abs() < 0.01, "{r}");
        let c: Vec<f64> = a.iter().map(|x| x + 500.0).collect();
        assert!(potential_scale_reduction(&[&a, &c]).unwrap() > 2.0);
        assert!(potential_scale_reduction(&[&a]).is_none());
    }
}
