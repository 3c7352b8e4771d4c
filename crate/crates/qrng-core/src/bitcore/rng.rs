//! Deterministic pseudo-random engine: splitmix64 seeding, xoshiro256**
//! draws.
//!
//! The engine stands in for the physical randomness of the device so that
//! every simulation is reproducible bit-for-bit from its seed. The two
//! algorithms are fixed by contract — any reimplementation must match this
//! output exactly:
//!
//! * seeding: the 64-bit seed is run through four steps of splitmix64
//!   (increment `0x9E3779B97F4A7C15`, then two xor-multiply mixes) to fill
//!   the 256-bit state;
//! * draws: xoshiro256** (Blackman & Vigna), `rotl(s1 * 5, 7) * 9` output
//!   scrambler over the xor-shift state update.
//!
//! Floating-point helpers use `libm` rather than the platform math library
//! so that transcendental results, and therefore whole simulations, are
//! identical across platforms.

/// Divisor converting a 53-bit integer into a uniform in [0, 1).
const F64_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// Reproducible pseudo-random engine (xoshiro256** seeded via splitmix64).
///
/// Not cryptographically secure. Single-owner: clone or re-seed for
/// concurrent use, never share one engine across threads.
#[derive(Debug, Clone)]
pub struct RngEngine {
    state: [u64; 4],
    seed: u64,
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

#[inline]
fn rotl(x: u64, k: u32) -> u64 {
    x.rotate_left(k)
}

impl RngEngine {
    /// Create an engine from a 64-bit seed.
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let state = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        RngEngine { state, seed }
    }

    /// The seed this engine was constructed from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Next raw 64-bit output.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = rotl(s[1].wrapping_mul(5), 7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        result
    }

    /// Uniform draw in [0, 1) with 53 significant bits. Consumes one u64.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * F64_SCALE
    }

    /// Bernoulli trial. Always consumes exactly one uniform, even for
    /// p = 0 or p = 1, so draw sequences stay aligned across configs.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Standard normal via the basic Box-Muller transform. Consumes exactly
    /// two uniforms and uses only the cosine branch, trading half the
    /// entropy for a fixed consumption pattern.
    #[inline]
    pub fn gauss(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        // 1 - u1 lies in (0, 1], keeping the log argument nonzero.
        let r = libm::sqrt(-2.0 * libm::log(1.0 - u1));
        r * libm::cos(2.0 * std::f64::consts::PI * u2)
    }

    /// Exponential deviate with mean `tau`. Consumes one uniform.
    #[inline]
    pub fn exponential(&mut self, tau: f64) -> f64 {
        -tau * libm::log(1.0 - self.uniform())
    }
}

/// Poisson sampler with a cached `e^(-mu)` so the hot simulation loop does
/// not re-evaluate the exponential for every frame.
///
/// Sampling is inversion by sequential search and consumes exactly one
/// uniform per draw regardless of the outcome, which keeps downstream draw
/// sequences reproducible.
#[derive(Debug, Clone)]
pub struct PoissonSampler {
    mu: f64,
    p_zero: f64,
}

/// Largest mean accepted by the sequential-search sampler. Beyond this the
/// term recursion loses too much precision to be trusted.
pub const POISSON_MU_MAX: f64 = 30.0;

// Hard iteration stop: at mu = 30 the CDF mass beyond k = 250 is far below
// 1e-100, but accumulated rounding can leave the partial sum just under a
// uniform drawn extremely close to 1.
const POISSON_K_MAX: u64 = 250;

impl PoissonSampler {
    /// Build a sampler for mean `mu` in [0, POISSON_MU_MAX].
    pub fn new(mu: f64) -> crate::Result<Self> {
        if !mu.is_finite() || mu < 0.0 || mu > POISSON_MU_MAX {
            return Err(crate::Error::ParamDomain(format!(
                "poisson mean must lie in [0, {POISSON_MU_MAX}], got {mu}"
            )));
        }
        Ok(PoissonSampler {
            mu,
            p_zero: libm::exp(-mu),
        })
    }

    /// Draw one Poisson variate. Consumes exactly one uniform.
    #[inline]
    pub fn sample(&self, rng: &mut RngEngine) -> u64 {
        let u = rng.uniform();
        let mut k = 0u64;
        let mut term = self.p_zero;
        let mut cdf = term;
        while u >= cdf && k < POISSON_K_MAX {
            k += 1;
            term *= self.mu / k as f64;
            cdf += term;
        }
        k
    }
}

/// Sample a Poisson variate with mean `mu` (inversion by sequential
/// search, one uniform per draw).
pub fn sample_poisson(rng: &mut RngEngine, mu: f64) -> crate::Result<u64> {
    Ok(PoissonSampler::new(mu)?.sample(rng))
}
