//! Statistical randomness test battery: circular autocorrelation lag scan
//! plus frequency (monobit), generalized serial, runs, entropy (block
//! entropy + approximate entropy), and Maurer's universal test.
//!
//! Every test yields a [`TestEntry`] with its statistic, p-value, and a
//! pass/fail verdict at the chosen significance level. [`run_battery`]
//! executes a configurable subset, applies a Bonferroni correction across
//! all evaluated p-values for the overall verdict, and attaches the lag
//! scan. Tests that cannot run on the given stream report `not_applicable`
//! instead of failing.

mod autocorr;
mod maurer;
pub mod special;

pub use autocorr::{autocorrelation, lag_scan, LagScan};
pub use maurer::{default_q, gap_oracle, maurer_universal, MaurerOutcome, MAURER_CONSTANTS};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bitcore::BitStream;
use special::{chi_square_sf, erfc};

/// Per-test outcome at the configured significance level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The test could not be applied (insufficient data, or a gating
    /// prerequisite failed). Distinct from `Fail`.
    NotApplicable,
}

/// Why a test was not applicable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NaCause {
    InsufficientData,
    FrequencyGate,
}

/// One line of the test report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestEntry {
    pub name: String,
    pub params: serde_json::Value,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub na_cause: Option<NaCause>,
    pub bits_consumed: u64,
}

impl TestEntry {
    fn evaluated(
        name: &str,
        params: serde_json::Value,
        statistic: f64,
        p_value: f64,
        alpha: f64,
        bits: u64,
    ) -> Self {
        TestEntry {
            name: name.into(),
            params,
            statistic,
            p_value: Some(p_value),
            verdict: if p_value >= alpha {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            na_cause: None,
            bits_consumed: bits,
        }
    }

    fn not_applicable(name: &str, cause: NaCause, detail: String) -> Self {
        TestEntry {
            name: name.into(),
            params: json!({ "detail": detail }),
            statistic: f64::NAN,
            p_value: None,
            verdict: Verdict::NotApplicable,
            na_cause: Some(cause),
            bits_consumed: 0,
        }
    }

    /// All p-values this entry contributes to the multiple-test
    /// correction (serial carries a second one in its params).
    pub fn p_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if let Some(p) = self.p_value {
            out.push(p);
        }
        if let Some(p2) = self.params.get("p_value2").and_then(|v| v.as_f64()) {
            out.push(p2);
        }
        out
    }
}

#[inline]
fn bit_at(words: &[u64], i: u64) -> u64 {
    (words[(i / 64) as usize] >> (i % 64)) & 1
}

/// Frequency (monobit) test: S = sum(2x - 1), s = |S|/sqrt(N),
/// p = erfc(s / sqrt(2)).
pub fn frequency_test(stream: &BitStream, alpha: f64) -> crate::Result<TestEntry> {
    let n = stream.len();
    if n < 100 {
        return Err(crate::Error::InsufficientData(format!(
            "frequency test needs at least 100 bits, got {n}"
        )));
    }
    let s = 2.0 * stream.ones() as f64 - n as f64;
    let s_obs = s.abs() / (n as f64).sqrt();
    let p = erfc(s_obs / std::f64::consts::SQRT_2);
    Ok(TestEntry::evaluated(
        "frequency",
        json!({ "excess": s }),
        s_obs,
        p,
        alpha,
        n,
    ))
}

/// Counts of overlapping circular m-grams (one per start position).
fn overlapping_counts(stream: &BitStream, m: u32) -> Vec<u64> {
    let n = stream.len();
    let words = stream.words();
    let mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut counts = vec![0u64; 1usize << m];
    let mut value = 0u64;
    for j in 0..m as u64 {
        value = (value << 1) | bit_at(words, j % n);
    }
    counts[value as usize] += 1;
    for i in 1..n {
        value = ((value << 1) | bit_at(words, (i + m as u64 - 1) % n)) & mask;
        counts[value as usize] += 1;
    }
    counts
}

/// psi-square statistic from overlapping counts.
fn psi_square(counts: &[u64], n: u64) -> f64 {
    let sum_sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    sum_sq * counts.len() as f64 / n as f64 - n as f64
}

/// Sum counts over the trailing bit, turning m-gram counts into
/// (m-1)-gram counts.
fn marginalize(counts: &[u64]) -> Vec<u64> {
    counts.chunks_exact(2).map(|c| c[0] + c[1]).collect()
}

/// Generalized serial test on overlapping circular m-grams. Evaluates the
/// first and second psi-square differences with chi-square tails at
/// 2^(m-1) and 2^(m-2) degrees of freedom; the entry fails if either
/// p-value falls below alpha.
pub fn serial_test(stream: &BitStream, m: u32, alpha: f64) -> crate::Result<TestEntry> {
    if !(2..=16).contains(&m) {
        return Err(crate::Error::ParamDomain(format!(
            "serial block length must be 2..=16, got {m}"
        )));
    }
    let n = stream.len();
    if n < 100 * (1u64 << m) {
        return Err(crate::Error::InsufficientData(format!(
            "serial test with m={m} needs at least {} bits, got {n}",
            100 * (1u64 << m)
        )));
    }
    let counts_m = overlapping_counts(stream, m);
    let counts_m1 = marginalize(&counts_m);
    let psi_m = psi_square(&counts_m, n);
    let psi_m1 = psi_square(&counts_m1, n);
    let psi_m2 = if m == 2 {
        0.0
    } else {
        psi_square(&marginalize(&counts_m1), n)
    };
    let d1 = (psi_m - psi_m1).max(0.0);
    let d2 = (psi_m - 2.0 * psi_m1 + psi_m2).max(0.0);
    let df1 = (1u64 << (m - 1)) as f64;
    let df2 = (1u64 << (m - 2)) as f64;
    let p1 = chi_square_sf(d1, df1);
    let p2 = chi_square_sf(d2, df2);
    let mut entry = TestEntry::evaluated(
        "serial",
        json!({ "m": m, "statistic2": d2, "p_value2": p2 }),
        d1,
        p1,
        alpha,
        n,
    );
    if p2 < alpha {
        entry.verdict = Verdict::Fail;
    }
    Ok(entry)
}

/// Count of adjacent differing pairs x[i] != x[i+1] (non-circular).
fn transition_count(stream: &BitStream) -> u64 {
    let n = stream.len();
    if n < 2 {
        return 0;
    }
    let words = stream.words();
    let mut total = 0u64;
    for i in 0..words.len() {
        let w = words[i];
        let carry = words.get(i + 1).map_or(0, |&next| next & 1);
        let mut d = w ^ ((w >> 1) | (carry << 63));
        let comparisons = (n - 1).saturating_sub(i as u64 * 64).min(64);
        if comparisons < 64 {
            d &= (1u64 << comparisons) - 1;
        }
        total += d.count_ones() as u64;
    }
    total
}

/// Runs test. Requires the one-fraction gate |pi - 1/2| < 2/sqrt(N); a
/// gated stream reports `not_applicable` rather than failing.
pub fn runs_test(stream: &BitStream, alpha: f64) -> crate::Result<TestEntry> {
    let n = stream.len();
    if n < 100 {
        return Err(crate::Error::InsufficientData(format!(
            "runs test needs at least 100 bits, got {n}"
        )));
    }
    let pi = stream.ones() as f64 / n as f64;
    let tau = 2.0 / (n as f64).sqrt();
    if (pi - 0.5).abs() >= tau {
        return Ok(TestEntry::not_applicable(
            "runs",
            NaCause::FrequencyGate,
            format!("one-fraction {pi:.6} outside 1/2 +- {tau:.6}"),
        ));
    }
    let v = 1.0 + transition_count(stream) as f64;
    let nf = n as f64;
    let expected = 2.0 * nf * pi * (1.0 - pi);
    let denom = 2.0 * (2.0 * nf).sqrt() * pi * (1.0 - pi);
    let p = erfc((v - expected).abs() / denom);
    Ok(TestEntry::evaluated(
        "runs",
        json!({ "total_runs": v, "one_fraction": pi }),
        v,
        p,
        alpha,
        n,
    ))
}

/// phi_m statistic of the approximate-entropy test.
fn phi(counts: &[u64], n: u64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let f = c as f64 / n as f64;
            f * libm::log(f)
        })
        .sum()
}

/// Entropy test: Shannon entropy of non-overlapping m-bit blocks
/// (reported per bit) together with the approximate-entropy statistic
/// ApEn(m) = phi_m - phi_{m+1}, whose chi-square tail decides the
/// verdict.
pub fn entropy_test(stream: &BitStream, m: u32, alpha: f64) -> crate::Result<TestEntry> {
    if !(1..=16).contains(&m) {
        return Err(crate::Error::ParamDomain(format!(
            "entropy block length must be 1..=16, got {m}"
        )));
    }
    let n = stream.len();
    if n < 100 * (1u64 << m) {
        return Err(crate::Error::InsufficientData(format!(
            "entropy test with m={m} needs at least {} bits, got {n}",
            100 * (1u64 << m)
        )));
    }
    // block entropy over non-overlapping blocks
    let words = stream.words();
    let n_blocks = n / m as u64;
    let mut block_counts = vec![0u64; 1usize << m];
    for b in 0..n_blocks {
        let mut value = 0u64;
        for j in 0..m as u64 {
            value = (value << 1) | bit_at(words, b * m as u64 + j);
        }
        block_counts[value as usize] += 1;
    }
    let h_m: f64 = block_counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let f = c as f64 / n_blocks as f64;
            -f * libm::log2(f)
        })
        .sum();
    let h_per_bit = h_m / m as f64;

    // approximate entropy over overlapping circular blocks
    let counts_m1 = overlapping_counts(stream, m + 1);
    let counts_m = marginalize(&counts_m1);
    let apen = phi(&counts_m, n) - phi(&counts_m1, n);
    let chi2 = 2.0 * n as f64 * (std::f64::consts::LN_2 - apen);
    let p = chi_square_sf(chi2, (1u64 << m) as f64);
    Ok(TestEntry::evaluated(
        "entropy",
        json!({ "m": m, "h_per_bit": h_per_bit, "apen": apen }),
        chi2,
        p,
        alpha,
        n,
    ))
}

/// Maurer's universal test wrapped as a report entry.
pub fn maurer_test(
    stream: &BitStream,
    word_bits: u32,
    init_words: Option<u64>,
    alpha: f64,
) -> crate::Result<TestEntry> {
    let out = maurer_universal(stream, word_bits, init_words)?;
    Ok(TestEntry::evaluated(
        "maurer",
        json!({
            "l": out.word_bits,
            "q": out.init_words,
            "k": out.scored_words,
            "expected": out.expected,
            "sigma": out.sigma,
        }),
        out.statistic,
        out.p_value,
        alpha,
        out.word_bits as u64 * (out.init_words + out.scored_words),
    ))
}

/// Which tests the battery runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Frequency,
    Serial,
    Runs,
    Entropy,
    Maurer,
    Autocorr,
}

impl TestKind {
    pub const ALL: [TestKind; 6] = [
        TestKind::Frequency,
        TestKind::Serial,
        TestKind::Runs,
        TestKind::Entropy,
        TestKind::Maurer,
        TestKind::Autocorr,
    ];
}

impl std::str::FromStr for TestKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "frequency" => Ok(TestKind::Frequency),
            "serial" => Ok(TestKind::Serial),
            "runs" => Ok(TestKind::Runs),
            "entropy" => Ok(TestKind::Entropy),
            "maurer" => Ok(TestKind::Maurer),
            "autocorr" => Ok(TestKind::Autocorr),
            other => Err(crate::Error::ParamDomain(format!(
                "unknown test {other:?} (expected frequency, serial, runs, entropy, maurer, or autocorr)"
            ))),
        }
    }
}

/// Battery configuration with the standard defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatteryConfig {
    /// Per-test significance level.
    pub alpha: f64,
    /// Serial test block length.
    pub serial_m: u32,
    /// Entropy test block length.
    pub entropy_m: u32,
    /// Maurer word size.
    pub maurer_l: u32,
    /// Lag scan range.
    pub max_lag: u64,
    /// Lag scan outlier threshold in sigmas.
    pub flag_sigma: f64,
    /// Which tests to run.
    pub tests: Vec<TestKind>,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            alpha: 0.01,
            serial_m: 2,
            entropy_m: 8,
            maurer_l: 7,
            max_lag: 2000,
            flag_sigma: 5.0,
            tests: TestKind::ALL.to_vec(),
        }
    }
}

/// Full battery report, serializable as the test-report JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub alpha: f64,
    pub overall: Verdict,
    /// Origin of the analyzed stream (which input the scan baseline was
    /// estimated from).
    pub stream_origin: crate::bitcore::Origin,
    pub bits_analyzed: u64,
    pub tests: Vec<TestEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lag_scan: Option<LagScanSection>,
}

/// Lag-scan portion of the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagScanSection {
    pub n_max: u64,
    pub flag_sigma: f64,
    pub mean: f64,
    pub sigma: f64,
    pub analytic_sigma: f64,
    pub outliers: Vec<(u64, f64)>,
}

impl TestReport {
    /// Entries that were not applicable because the stream is too short.
    pub fn insufficient(&self) -> Vec<&TestEntry> {
        self.tests
            .iter()
            .filter(|e| e.na_cause == Some(NaCause::InsufficientData))
            .collect()
    }
}

/// Run every enabled test, apply a Bonferroni correction across all
/// evaluated p-values for the overall verdict, and attach the lag scan.
/// Insufficient data degrades individual tests to `not_applicable`.
pub fn run_battery(stream: &BitStream, config: &BatteryConfig) -> crate::Result<TestReport> {
    if !(0.0 < config.alpha && config.alpha < 1.0) {
        return Err(crate::Error::ParamDomain(format!(
            "alpha must lie in (0, 1), got {}",
            config.alpha
        )));
    }
    let mut entries = Vec::new();
    let mut scan_section = None;
    let mut scan_clean = true;

    for kind in &config.tests {
        match kind {
            TestKind::Frequency => {
                entries.push(catch_na("frequency", frequency_test(stream, config.alpha))?)
            }
            TestKind::Serial => entries.push(catch_na(
                "serial",
                serial_test(stream, config.serial_m, config.alpha),
            )?),
            TestKind::Runs => entries.push(catch_na("runs", runs_test(stream, config.alpha))?),
            TestKind::Entropy => entries.push(catch_na(
                "entropy",
                entropy_test(stream, config.entropy_m, config.alpha),
            )?),
            TestKind::Maurer => entries.push(catch_na(
                "maurer",
                maurer_test(stream, config.maurer_l, None, config.alpha),
            )?),
            TestKind::Autocorr => {
                if config.max_lag >= stream.len() {
                    entries.push(TestEntry::not_applicable(
                        "autocorr",
                        NaCause::InsufficientData,
                        format!(
                            "lag scan to {} needs more than {} bits",
                            config.max_lag,
                            stream.len()
                        ),
                    ));
                } else {
                    let scan = lag_scan(stream, config.max_lag, config.flag_sigma)?;
                    scan_clean = scan.outliers.is_empty();
                    scan_section = Some(LagScanSection {
                        n_max: config.max_lag,
                        flag_sigma: config.flag_sigma,
                        mean: scan.scan_mean,
                        sigma: scan.scan_sigma,
                        analytic_sigma: scan.analytic_sigma,
                        outliers: scan.outliers,
                    });
                }
            }
        }
    }

    // Bonferroni across every evaluated p-value
    let p_values: Vec<f64> = entries.iter().flat_map(|e| e.p_values()).collect();
    let corrected = if p_values.is_empty() {
        config.alpha
    } else {
        config.alpha / p_values.len() as f64
    };
    let any_fail = p_values.iter().any(|&p| p < corrected) || !scan_clean;
    let overall = if any_fail { Verdict::Fail } else { Verdict::Pass };

    Ok(TestReport {
        alpha: config.alpha,
        overall,
        stream_origin: stream.meta().origin,
        bits_analyzed: stream.len(),
        tests: entries,
        lag_scan: scan_section,
    })
}

/// Turn an insufficient-data error into a not-applicable entry;
/// propagate anything else.
fn catch_na(name: &str, result: crate::Result<TestEntry>) -> crate::Result<TestEntry> {
    match result {
        Ok(entry) => Ok(entry),
        Err(crate::Error::InsufficientData(msg)) => {
            Ok(TestEntry::not_applicable(name, NaCause::InsufficientData, msg))
        }
        Err(other) => Err(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::{Origin, RngEngine};

    fn fair_stream(seed: u64, n: u64) -> BitStream {
        let mut rng = RngEngine::new(seed);
        BitStream::from_bits(Origin::File, (0..n).map(|_| rng.bernoulli(0.5)))
    }

    fn repeated(pattern: &str, n: usize) -> BitStream {
        BitStream::from_ascii(Origin::File, &pattern.repeat(n)).unwrap()
    }

    #[test]
    fn frequency_balanced_stream_p_is_one() {
        let s = repeated("01", 100);
        let entry = frequency_test(&s, 0.01).unwrap();
        assert_eq!(entry.p_value, Some(1.0));
        assert_eq!(entry.verdict, Verdict::Pass);
    }

    #[test]
    fn frequency_detects_bias() {
        let mut rng = RngEngine::new(1);
        let s = BitStream::from_bits(Origin::File, (0..1_000_000).map(|_| rng.bernoulli(0.4)));
        let entry = frequency_test(&s, 0.01).unwrap();
        assert!(entry.p_value.unwrap() < 1e-10);
        assert_eq!(entry.verdict, Verdict::Fail);
    }

    #[test]
    fn frequency_needs_100_bits() {
        let s = repeated("01", 49);
        assert!(matches!(
            frequency_test(&s, 0.01),
            Err(crate::Error::InsufficientData(_))
        ));
    }

    #[test]
    fn serial_alternating_fails_hard() {
        let s = repeated("01", 5_000);
        let entry = serial_test(&s, 2, 0.01).unwrap();
        assert!(entry.p_value.unwrap() < 1e-10);
        assert_eq!(entry.verdict, Verdict::Fail);
    }

    #[test]
    fn serial_all_zeros_fails() {
        let s = repeated("0", 10_000);
        let entry = serial_test(&s, 2, 0.01).unwrap();
        assert_eq!(entry.verdict, Verdict::Fail);
    }

    #[test]
    fn serial_fair_stream_passes() {
        let entry = serial_test(&fair_stream(2, 1_000_000), 2, 0.01).unwrap();
        assert_eq!(entry.verdict, Verdict::Pass);
    }

    #[test]
    fn serial_psi_identities() {
        // psi-square differences are non-negative and the m-1 marginals
        // rebuild the exact overlapping counts
        let s = fair_stream(3, 4096);
        let c3 = overlapping_counts(&s, 3);
        let c2 = marginalize(&c3);
        assert_eq!(c2.iter().sum::<u64>(), s.len());
        let direct = overlapping_counts(&s, 2);
        assert_eq!(c2, direct);
    }

    #[test]
    fn runs_alternating_and_blocked_fail() {
        let alt = repeated("01", 5_000);
        let entry = runs_test(&alt, 0.01).unwrap();
        assert_eq!(entry.verdict, Verdict::Fail);

        let blocked = BitStream::from_ascii(
            Origin::File,
            &("0".repeat(5_000) + &"1".repeat(5_000)),
        )
        .unwrap();
        let entry = runs_test(&blocked, 0.01).unwrap();
        assert_eq!(entry.verdict, Verdict::Fail);
    }

    #[test]
    fn runs_gate_reports_not_applicable() {
        let mut rng = RngEngine::new(4);
        let s = BitStream::from_bits(Origin::File, (0..100_000).map(|_| rng.bernoulli(0.4)));
        let entry = runs_test(&s, 0.01).unwrap();
        assert_eq!(entry.verdict, Verdict::NotApplicable);
        assert_eq!(entry.na_cause, Some(NaCause::FrequencyGate));
    }

    #[test]
    fn runs_fair_stream_passes() {
        let entry = runs_test(&fair_stream(5, 1_000_000), 0.01).unwrap();
        assert_eq!(entry.verdict, Verdict::Pass);
    }

    #[test]
    fn transition_count_matches_naive() {
        let mut rng = RngEngine::new(6);
        for n in [2u64, 63, 64, 65, 129, 1000] {
            let s = BitStream::from_bits(Origin::File, (0..n).map(|_| rng.bernoulli(0.5)));
            let naive = (0..n - 1)
                .filter(|&i| s.get(i) != s.get(i + 1))
                .count() as u64;
            assert_eq!(transition_count(&s), naive, "n={n}");
        }
    }

    #[test]
    fn entropy_all_zeros_is_zero() {
        let s = repeated("0", 10_000);
        let entry = entropy_test(&s, 4, 0.01).unwrap();
        assert_eq!(entry.params["h_per_bit"].as_f64().unwrap(), 0.0);
        assert_eq!(entry.verdict, Verdict::Fail);
    }

    #[test]
    fn entropy_alternating_has_full_marginal_but_fails_apen() {
        let s = repeated("01", 5_000);
        let entry = entropy_test(&s, 1, 0.01).unwrap();
        assert_eq!(entry.params["h_per_bit"].as_f64().unwrap(), 1.0);
        assert_eq!(entry.verdict, Verdict::Fail);
    }

    #[test]
    fn entropy_fair_stream_passes() {
        let entry = entropy_test(&fair_stream(7, 1_000_000), 8, 0.01).unwrap();
        assert!(entry.params["h_per_bit"].as_f64().unwrap() >= 0.999);
        assert_eq!(entry.verdict, Verdict::Pass);
    }

    #[test]
    fn battery_on_biased_stream_fails_overall() {
        let mut rng = RngEngine::new(8);
        let s = BitStream::from_bits(Origin::File, (0..1_100_000).map(|_| rng.bernoulli(0.4)));
        let config = BatteryConfig {
            max_lag: 200,
            ..BatteryConfig::default()
        };
        let report = run_battery(&s, &config).unwrap();
        assert_eq!(report.overall, Verdict::Fail);
        let freq = report.tests.iter().find(|e| e.name == "frequency").unwrap();
        assert_eq!(freq.verdict, Verdict::Fail);
    }

    #[test]
    fn battery_on_fair_stream_passes_overall() {
        let config = BatteryConfig {
            max_lag: 500,
            ..BatteryConfig::default()
        };
        let report = run_battery(&fair_stream(9, 1_100_000), &config).unwrap();
        assert_eq!(report.overall, Verdict::Pass, "report: {report:?}");
        assert!(report.lag_scan.unwrap().outliers.is_empty());
    }

    #[test]
    fn battery_all_zeros_everything_fails_or_na() {
        let s = repeated("0", 20_000);
        let config = BatteryConfig {
            max_lag: 100,
            ..BatteryConfig::default()
        };
        let report = run_battery(&s, &config).unwrap();
        assert_eq!(report.overall, Verdict::Fail);
        for entry in &report.tests {
            assert_ne!(entry.verdict, Verdict::Pass, "{} passed", entry.name);
        }
    }

    #[test]
    fn battery_short_stream_marks_not_applicable() {
        let s = repeated("01", 150);
        let config = BatteryConfig {
            max_lag: 100,
            ..BatteryConfig::default()
        };
        let report = run_battery(&s, &config).unwrap();
        assert!(!report.insufficient().is_empty());
        let maurer = report.tests.iter().find(|e| e.name == "maurer").unwrap();
        assert_eq!(maurer.verdict, Verdict::NotApplicable);
    }

    #[test]
    fn report_json_shape() {
        let config = BatteryConfig {
            max_lag: 100,
            ..BatteryConfig::default()
        };
        let report = run_battery(&fair_stream(10, 1_100_000), &config).unwrap();
        let value = serde_json::to_value(&report).unwrap();
        assert!(value["alpha"].is_number());
        assert_eq!(value["overall"], "pass");
        assert!(value["tests"].is_array());
        assert!(value["lag_scan"]["outliers"].is_array());
        let parsed: TestReport = serde_json::from_value(value).unwrap();
        assert_eq!(parsed.tests.len(), report.tests.len());
    }
}
