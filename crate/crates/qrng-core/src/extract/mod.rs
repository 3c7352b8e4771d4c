//! Unbiasing extractors: von Neumann pair discarding and the Peres
//! recursion, with yield accounting against the binary entropy bound.
//!
//! Both extractors consume non-overlapping input pairs `(x[2i], x[2i+1])`.
//! Von Neumann emits the first bit of each unequal pair and drops equal
//! pairs; a trailing odd bit is dropped. Peres additionally recurses on
//! two derived sequences and concatenates, at every level, in the fixed
//! order `VN(x) ++ peres(u) ++ peres(v)` where
//!
//! * `u` holds `x[2i] XOR x[2i+1]` for every pair, and
//! * `v` holds `x[2i]` for the equal pairs only.
//!
//! The recursion stops when the sequence has fewer than two bits or the
//! depth budget is exhausted; depth 1 therefore reproduces von Neumann
//! exactly. For i.i.d. biased inputs the Peres output length approaches
//! the entropy bound `h(p)` per input bit as the input grows.

use serde::{Deserialize, Serialize};

use crate::bitcore::{binary_entropy, BitStream, Origin};

/// Which unbiasing procedure to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    VonNeumann,
    Peres,
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vn" | "von_neumann" | "von-neumann" => Ok(Method::VonNeumann),
            "peres" => Ok(Method::Peres),
            other => Err(crate::Error::ParamDomain(format!(
                "unknown extraction method {other:?} (expected vn or peres)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::VonNeumann => f.write_str("von_neumann"),
            Method::Peres => f.write_str("peres"),
        }
    }
}

/// Input/output accounting for one extraction run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub method: Method,
    pub input_length: u64,
    pub output_length: u64,
    /// output_length / input_length (0 for empty input).
    pub yield_per_input_bit: f64,
    /// Exact one-fraction of the input (0 for empty input).
    pub input_one_fraction: f64,
    /// Binary entropy of the input one-fraction, the asymptotic yield
    /// bound per input bit.
    pub entropy_bound: f64,
    /// yield / entropy_bound (0 when the bound is 0).
    pub efficiency_vs_entropy: f64,
}

impl ExtractionReport {
    fn build(method: Method, input: &BitStream, output_length: u64) -> Self {
        let input_length = input.len();
        let input_one_fraction = if input_length == 0 {
            0.0
        } else {
            input.ones() as f64 / input_length as f64
        };
        let entropy_bound = binary_entropy(input_one_fraction).expect("fraction in [0,1]");
        let yield_per_input_bit = if input_length == 0 {
            0.0
        } else {
            output_length as f64 / input_length as f64
        };
        let efficiency_vs_entropy = if entropy_bound == 0.0 {
            0.0
        } else {
            yield_per_input_bit / entropy_bound
        };
        ExtractionReport {
            method,
            input_length,
            output_length,
            yield_per_input_bit,
            input_one_fraction,
            entropy_bound,
            efficiency_vs_entropy,
        }
    }
}

/// Von Neumann level on an unpacked bit buffer.
fn vn_pass(bits: &[u8], out: &mut Vec<u8>) {
    for pair in bits.chunks_exact(2) {
        if pair[0] != pair[1] {
            out.push(pair[0]);
        }
    }
}

/// One Peres level: von Neumann output plus the two derived sequences.
fn peres_level(bits: &[u8], out: &mut Vec<u8>) -> (Vec<u8>, Vec<u8>) {
    let mut u = Vec::with_capacity(bits.len() / 2);
    let mut v = Vec::new();
    for pair in bits.chunks_exact(2) {
        u.push(pair[0] ^ pair[1]);
        if pair[0] == pair[1] {
            v.push(pair[0]);
        } else {
            out.push(pair[0]);
        }
    }
    (u, v)
}

fn peres_recurse(bits: &[u8], depth_left: Option<u32>, out: &mut Vec<u8>) {
    if bits.len() < 2 {
        return;
    }
    match depth_left {
        Some(0) => (),
        Some(1) => vn_pass(bits, out),
        _ => {
            let next = depth_left.map(|d| d - 1);
            let (u, v) = peres_level(bits, out);
            peres_recurse(&u, next, out);
            peres_recurse(&v, next, out);
        }
    }
}

fn unpack(input: &BitStream) -> Vec<u8> {
    input.iter().map(u8::from).collect()
}

fn pack(bits: &[u8]) -> BitStream {
    BitStream::from_bits(Origin::Extracted, bits.iter().map(|&b| b == 1))
}

/// Von Neumann unbiasing: emits the first bit of each unequal
/// non-overlapping pair.
pub fn von_neumann(input: &BitStream) -> (BitStream, ExtractionReport) {
    let bits = unpack(input);
    let mut out = Vec::with_capacity(bits.len() / 4);
    vn_pass(&bits, &mut out);
    let stream = pack(&out);
    let report = ExtractionReport::build(Method::VonNeumann, input, stream.len());
    (stream, report)
}

/// Peres unbiasing. `max_depth` of `None` runs the full recursion (it
/// always terminates: both derived sequences are at most half as long);
/// `Some(1)` degenerates to von Neumann.
pub fn peres(input: &BitStream, max_depth: Option<u32>) -> crate::Result<(BitStream, ExtractionReport)> {
    if max_depth == Some(0) {
        return Err(crate::Error::ParamDomain(
            "peres max_depth must be at least 1 (or unbounded)".into(),
        ));
    }
    let bits = unpack(input);
    let mut out = Vec::with_capacity(bits.len());
    peres_recurse(&bits, max_depth, &mut out);
    let stream = pack(&out);
    let report = ExtractionReport::build(Method::Peres, input, stream.len());
    Ok((stream, report))
}

/// Run an extractor by method tag. Peres runs unbounded.
pub fn extract(method: Method, input: &BitStream) -> (BitStream, ExtractionReport) {
    match method {
        Method::VonNeumann => von_neumann(input),
        Method::Peres => peres(input, None).expect("unbounded depth is valid"),
    }
}

/// Default chunk size (bits) for chunked extraction.
pub const DEFAULT_CHUNK_BITS: u64 = 1 << 16;

/// Chunked extraction for large inputs: the input is split into
/// `chunk_bits` pieces, each extracted independently, and the outputs are
/// concatenated. Loses a little yield at chunk boundaries relative to
/// whole-stream extraction (each chunk drops its own trailing odd bit and
/// restarts the Peres recursion).
pub fn extract_chunked(
    method: Method,
    input: &BitStream,
    chunk_bits: u64,
) -> crate::Result<(BitStream, ExtractionReport)> {
    if chunk_bits < 2 {
        return Err(crate::Error::ParamDomain(
            "chunk size must be at least 2 bits".into(),
        ));
    }
    let mut out = BitStream::new(Origin::Extracted);
    let mut start = 0u64;
    while start < input.len() {
        let end = (start + chunk_bits).min(input.len());
        let chunk = BitStream::from_bits(Origin::File, (start..end).map(|i| input.get(i)));
        let (piece, _) = extract(method, &chunk);
        for b in piece.iter() {
            out.push(b);
        }
        start = end;
    }
    out.finalize_meta();
    let report = ExtractionReport::build(method, input, out.len());
    Ok((out, report))
}

/// Exact expected output length of an extractor on i.i.d. inputs of
/// length `n` with one-probability `p`, by full enumeration of all 2^n
/// inputs weighted by their probabilities.
pub fn exact_yield_oracle(method: Method, n: u32, p: f64) -> crate::Result<f64> {
    if n > 20 {
        return Err(crate::Error::Capacity(format!(
            "exact yield enumeration is limited to n <= 20 inputs, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(crate::Error::ParamDomain(format!(
            "probability must lie in [0, 1], got {p}"
        )));
    }
    let mut expected = 0.0;
    let mut bits = vec![0u8; n as usize];
    let mut out = Vec::with_capacity(n as usize);
    for word in 0u32..1u32 << n {
        let ones = word.count_ones();
        let weight = libm::pow(p, ones as f64) * libm::pow(1.0 - p, (n - ones) as f64);
        if weight == 0.0 {
            continue;
        }
        for (i, slot) in bits.iter_mut().enumerate() {
            *slot = ((word >> i) & 1) as u8;
        }
        out.clear();
        match method {
            Method::VonNeumann => vn_pass(&bits, &mut out),
            Method::Peres => peres_recurse(&bits, None, &mut out),
        }
        expected += weight * out.len() as f64;
    }
    Ok(expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::RngEngine;
    use proptest::prelude::*;

    fn stream(text: &str) -> BitStream {
        BitStream::from_ascii(Origin::File, text).unwrap()
    }

    #[test]
    fn von_neumann_definition() {
        let (out, report) = von_neumann(&stream("0110"));
        assert_eq!(out.to_ascii(), "01");
        assert_eq!(report.output_length, 2);
        assert_eq!(von_neumann(&stream("0000")).0.to_ascii(), "");
        // trailing odd bit dropped
        assert_eq!(von_neumann(&stream("01101")).0.to_ascii(), "01");
        let (empty_out, empty_report) = von_neumann(&BitStream::new(Origin::File));
        assert!(empty_out.is_empty());
        assert_eq!(empty_report.yield_per_input_bit, 0.0);
    }

    #[test]
    fn peres_hand_traces() {
        // "0110": VN = "01"; u = "11" recurses to nothing; v empty.
        let (out, _) = peres(&stream("0110"), None).unwrap();
        assert_eq!(out.to_ascii(), "01");
        // "00": VN empty; u = "0", v = "0", both too short.
        let (out, _) = peres(&stream("00"), None).unwrap();
        assert_eq!(out.to_ascii(), "");
        // "0011": VN empty; u = "00" -> nothing at its level, then u'="0",
        // v'="0"; v = "01" -> VN gives "0".
        let (out, _) = peres(&stream("0011"), None).unwrap();
        assert_eq!(out.to_ascii(), "0");
    }

    #[test]
    fn peres_depth_one_is_von_neumann() {
        let mut rng = RngEngine::new(17);
        let input = BitStream::from_bits(Origin::File, (0..4096).map(|_| rng.bernoulli(0.3)));
        let (vn_out, _) = von_neumann(&input);
        let (p1_out, _) = peres(&input, Some(1)).unwrap();
        assert_eq!(vn_out, p1_out);
    }

    #[test]
    fn peres_depth_zero_rejected() {
        assert!(peres(&stream("01"), Some(0)).is_err());
    }

    #[test]
    fn von_neumann_yield_at_forty_sixty() {
        // E[yield] = p(1-p) = 0.24 per input bit at p = 0.4.
        let mut rng = RngEngine::new(23);
        let n = 1_000_000u64;
        let input = BitStream::from_bits(Origin::File, (0..n).map(|_| rng.bernoulli(0.4)));
        let (_, report) = von_neumann(&input);
        // per-pair variance: 2pq(1 - 2pq)
        let pq2 = 2.0 * 0.4 * 0.6;
        let sigma = ((n as f64 / 2.0) * pq2 * (1.0 - pq2)).sqrt() / n as f64;
        assert!(
            (report.yield_per_input_bit - 0.24).abs() < 3.0 * sigma,
            "yield {}",
            report.yield_per_input_bit
        );
    }

    #[test]
    fn exact_oracle_closed_forms() {
        // n = 2: one pair, emits with probability 2pq.
        assert!((exact_yield_oracle(Method::VonNeumann, 2, 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!((exact_yield_oracle(Method::VonNeumann, 2, 0.4).unwrap() - 0.48).abs() < 1e-12);
        // general closed form: floor(n/2) * 2pq
        for n in [4u32, 7, 10] {
            for p in [0.1, 0.3, 0.5] {
                let want = (n / 2) as f64 * 2.0 * p * (1.0 - p);
                let got = exact_yield_oracle(Method::VonNeumann, n, p).unwrap();
                assert!((got - want).abs() < 1e-12, "n={n} p={p}");
            }
        }
        // Peres dominates von Neumann at n = 4, p = 0.5.
        let vn = exact_yield_oracle(Method::VonNeumann, 4, 0.5).unwrap();
        let pr = exact_yield_oracle(Method::Peres, 4, 0.5).unwrap();
        assert!(pr > vn, "peres {pr} <= vn {vn}");
        assert!(exact_yield_oracle(Method::Peres, 21, 0.5).is_err());
    }

    #[test]
    fn chunked_mode_concatenates_and_loses_little() {
        let mut rng = RngEngine::new(31);
        let input = BitStream::from_bits(Origin::File, (0..200_000).map(|_| rng.bernoulli(0.4)));
        let (whole, whole_report) = peres(&input, None).unwrap();
        let (chunked, chunked_report) = extract_chunked(Method::Peres, &input, 1 << 16).unwrap();
        assert!(chunked.len() <= whole.len());
        assert!(chunked_report.yield_per_input_bit > 0.9 * whole_report.yield_per_input_bit);
        // chunk = whole length reproduces whole-stream extraction
        let (same, _) = extract_chunked(Method::Peres, &input, input.len()).unwrap();
        assert_eq!(same, whole);
    }

    #[test]
    fn extraction_report_fields() {
        let input = stream("110100");
        let (_, report) = von_neumann(&input);
        assert_eq!(report.input_length, 6);
        assert_eq!(report.input_one_fraction, 0.5);
        assert_eq!(report.entropy_bound, 1.0);
        assert!(report.efficiency_vs_entropy <= 1.0 + 1e-9);
    }

    proptest! {
        #[test]
        fn peres_dominates_von_neumann(bits in proptest::collection::vec(any::<bool>(), 0..512)) {
            let input = BitStream::from_bits(Origin::File, bits.iter().copied());
            let (vn_out, _) = von_neumann(&input);
            let (p_out, _) = peres(&input, None).unwrap();
            prop_assert!(p_out.len() >= vn_out.len());
            // von Neumann output is the prefix of the Peres output
            let vn_ascii = vn_out.to_ascii();
            prop_assert!(p_out.to_ascii().starts_with(&vn_ascii));
        }

        #[test]
        fn vn_output_multiset_is_pair_order_invariant(
            bits in proptest::collection::vec(any::<bool>(), 0..16),
            seed in any::<u64>(),
        ) {
            // permuting whole pairs must not change the multiset of
            // level-0 outputs (exchangeability)
            let input = BitStream::from_bits(Origin::File, bits.iter().copied());
            let (base, _) = von_neumann(&input);
            let mut pairs: Vec<[bool; 2]> = bits.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
            // Fisher-Yates with the crate RNG
            let mut rng = RngEngine::new(seed);
            for i in (1..pairs.len()).rev() {
                let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                pairs.swap(i, j);
            }
            let shuffled = BitStream::from_bits(Origin::File, pairs.iter().flatten().copied());
            let (permuted, _) = von_neumann(&shuffled);
            let count = |s: &BitStream| (s.ones(), s.len() - s.ones());
            prop_assert_eq!(count(&base), count(&permuted));
        }

        #[test]
        fn depth_budget_monotone(bits in proptest::collection::vec(any::<bool>(), 0..256)) {
            let input = BitStream::from_bits(Origin::File, bits.iter().copied());
            let mut prev = 0;
            for depth in 1..=9 {
                let (out, _) = peres(&input, Some(depth)).unwrap();
                prop_assert!(out.len() >= prev);
                prev = out.len();
            }
            let (unbounded, _) = peres(&input, None).unwrap();
            prop_assert!(unbounded.len() >= prev);
        }
    }

    #[test]
    fn unbiasedness_of_extracted_output() {
        // i.i.d. inputs at p in {0.1, 0.4, 0.5}: output one-fraction
        // within 4 sigma of 1/2.
        for (seed, p) in [(41u64, 0.1f64), (42, 0.4), (43, 0.5)] {
            let mut rng = RngEngine::new(seed);
            let n = 1u64 << 20;
            let input = BitStream::from_bits(Origin::File, (0..n).map(|_| rng.bernoulli(p)));
            for method in [Method::VonNeumann, Method::Peres] {
                let (out, _) = extract(method, &input);
                assert!(out.len() > 1000);
                let frac = out.ones() as f64 / out.len() as f64;
                let sigma = 0.5 / (out.len() as f64).sqrt();
                assert!(
                    (frac - 0.5).abs() < 4.0 * sigma,
                    "{method} at p={p}: fraction {frac} over {} bits",
                    out.len()
                );
            }
        }
    }
}
