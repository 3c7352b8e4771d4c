//! Circular autocorrelation of a bit stream and the lag scan with
//! sigma-based outlier flagging.
//!
//! The statistic for lag `n` over a stream of `N` bits is
//!
//! ```text
//! gamma(n) = (1/N) * sum_{i=0}^{N-1} x[i] XOR x[(i+n) mod N]
//! ```
//!
//! i.e. the fraction of positions that differ from their lag-n circular
//! neighbor. For an i.i.d. stream with one-fraction `p` the null mean is
//! `2 p (1-p)` and the standard deviation is
//! `sqrt(2p(1-p) * (1 - 2p(1-p)) / N)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitcore::BitStream;

/// Extract the 64 bits starting at circular bit offset `start` from a
/// packed stream of `n_bits >= 64` bits. Bits past the end wrap to the
/// beginning.
#[inline]
fn word_at(words: &[u64], n_bits: u64, start: u64) -> u64 {
    debug_assert!(n_bits >= 64);
    let start = start % n_bits;
    let avail = n_bits - start;
    let lo_word = (start / 64) as usize;
    let shift = (start % 64) as u32;
    let mut w = words[lo_word] >> shift;
    if shift != 0 {
        if let Some(&next) = words.get(lo_word + 1) {
            w |= next << (64 - shift);
        }
    }
    if avail >= 64 {
        w
    } else {
        // splice in wrapped bits from the front of the stream
        let tail = avail as u32; // < 64 bits valid in w
        let mask = (1u64 << tail) - 1;
        (w & mask) | (word_at(words, n_bits, 0) << tail)
    }
}

fn autocorrelation_fast(words: &[u64], n_bits: u64, lag: u64) -> f64 {
    let mut differing = 0u64;
    let full_words = (n_bits / 64) as usize;
    for i in 0..full_words {
        let a = words[i];
        let b = word_at(words, n_bits, i as u64 * 64 + lag);
        differing += (a ^ b).count_ones() as u64;
    }
    let tail = n_bits % 64;
    if tail != 0 {
        let a = words[full_words];
        let b = word_at(words, n_bits, full_words as u64 * 64 + lag);
        let mask = (1u64 << tail) - 1;
        differing += ((a ^ b) & mask).count_ones() as u64;
    }
    differing as f64 / n_bits as f64
}

/// Streams of at most 64 bits fit in one word; circular rotation is two
/// shifts and a mask.
fn autocorrelation_word(word: u64, n_bits: u64, lag: u64) -> f64 {
    let mask = if n_bits == 64 {
        u64::MAX
    } else {
        (1u64 << n_bits) - 1
    };
    let w = word & mask;
    let rot = ((w >> lag) | (w << (n_bits - lag))) & mask;
    (w ^ rot).count_ones() as f64 / n_bits as f64
}

/// Circular autocorrelation at lag `n` (fraction of differing pairs, in
/// [0, 1]).
pub fn autocorrelation(stream: &BitStream, lag: u64) -> crate::Result<f64> {
    if stream.len() < 2 {
        return Err(crate::Error::ParamDomain(format!(
            "autocorrelation needs at least 2 bits, got {}",
            stream.len()
        )));
    }
    if lag == 0 || lag >= stream.len() {
        return Err(crate::Error::ParamDomain(format!(
            "lag must satisfy 1 <= n < length ({}), got {lag}",
            stream.len()
        )));
    }
    if stream.len() > 64 {
        Ok(autocorrelation_fast(stream.words(), stream.len(), lag))
    } else {
        Ok(autocorrelation_word(stream.words()[0], stream.len(), lag))
    }
}

/// Result of scanning gamma over a range of lags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagScan {
    /// gamma(n) for n = 1..=n_max (index 0 holds lag 1).
    pub gamma: Vec<f64>,
    /// Mean over non-outlier lags.
    pub scan_mean: f64,
    /// Standard deviation over non-outlier lags.
    pub scan_sigma: f64,
    /// i.i.d.-null sigma from the stream's one-fraction:
    /// sqrt(2p(1-p)(1-2p(1-p))) / sqrt(N).
    pub analytic_sigma: f64,
    /// Lags flagged beyond the threshold, as (lag, deviation in units of
    /// scan_sigma), sorted by lag.
    pub outliers: Vec<(u64, f64)>,
}

impl LagScan {
    /// Signed deviation of lag `n` from the scan mean in scan-sigma units.
    pub fn sigma_deviation(&self, lag: u64) -> f64 {
        (self.gamma[(lag - 1) as usize] - self.scan_mean) / self.scan_sigma
    }
}

fn thread_pool() -> Option<rayon::ThreadPool> {
    // QRNG_THREADS caps lag-scan parallelism; unset or invalid means the
    // global default pool.
    let n: usize = std::env::var("QRNG_THREADS").ok()?.parse().ok()?;
    if n == 0 {
        return None;
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()
}

/// Scan gamma over lags 1..=n_max and flag outliers beyond `flag_sigma`
/// scan sigmas. The mean and sigma are re-estimated excluding flagged
/// lags, iterating to a fixpoint (at most 3 passes) so a single strong
/// outlier cannot inflate the baseline it is measured against.
pub fn lag_scan(stream: &BitStream, n_max: u64, flag_sigma: f64) -> crate::Result<LagScan> {
    if n_max == 0 || n_max >= stream.len() {
        return Err(crate::Error::ParamDomain(format!(
            "n_max must satisfy 1 <= n_max < length ({}), got {n_max}",
            stream.len()
        )));
    }
    if !(flag_sigma > 0.0) {
        return Err(crate::Error::ParamDomain(format!(
            "flag_sigma must be positive, got {flag_sigma}"
        )));
    }
    let lags: Vec<u64> = (1..=n_max).collect();
    let compute = || -> Vec<f64> {
        lags.par_iter()
            .map(|&n| autocorrelation(stream, n).expect("validated lag"))
            .collect()
    };
    let gamma = match thread_pool() {
        Some(pool) => pool.install(compute),
        None => compute(),
    };

    let mut flagged = vec![false; gamma.len()];
    let mut scan_mean = 0.0;
    let mut scan_sigma = 0.0;
    for _ in 0..3 {
        let kept: Vec<f64> = gamma
            .iter()
            .zip(&flagged)
            .filter(|(_, &f)| !f)
            .map(|(&g, _)| g)
            .collect();
        let m = kept.iter().sum::<f64>() / kept.len() as f64;
        let var = kept.iter().map(|g| (g - m) * (g - m)).sum::<f64>()
            / (kept.len().saturating_sub(1)).max(1) as f64;
        scan_mean = m;
        scan_sigma = var.sqrt();
        let next: Vec<bool> = gamma
            .iter()
            .map(|&g| scan_sigma > 0.0 && ((g - scan_mean) / scan_sigma).abs() >= flag_sigma)
            .collect();
        if next == flagged {
            break;
        }
        flagged = next;
    }

    let p = stream.ones() as f64 / stream.len() as f64;
    let null_var = 2.0 * p * (1.0 - p) * (1.0 - 2.0 * p * (1.0 - p));
    let analytic_sigma = (null_var / stream.len() as f64).sqrt();

    let outliers = gamma
        .iter()
        .enumerate()
        .filter(|(i, _)| flagged[*i])
        .map(|(i, &g)| (i as u64 + 1, (g - scan_mean) / scan_sigma))
        .collect();

    Ok(LagScan {
        gamma,
        scan_mean,
        scan_sigma,
        analytic_sigma,
        outliers,
    })
}
