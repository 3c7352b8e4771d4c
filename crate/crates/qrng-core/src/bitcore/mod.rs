//! Packed bit sequences, the reproducible pseudo-random engine driving the
//! simulator, and shared numeric helpers.

mod bitstream;
mod io;
mod rng;

pub use bitstream::{bit_fraction, BitStream, Origin, StreamMeta};
pub use io::{
    read_ascii, read_packed, sidecar_path, write_ascii, write_packed, BitFileFormat, SidecarMeta,
};
pub use rng::{sample_poisson, PoissonSampler, RngEngine, POISSON_MU_MAX};

/// Binary Shannon entropy in bits per symbol, with 0·log2(0) = 0.
pub fn binary_entropy(p: f64) -> crate::Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(crate::Error::ParamDomain(format!(
            "probability must lie in [0, 1], got {p}"
        )));
    }
    let term = |x: f64| if x == 0.0 { 0.0 } else { -x * libm::log2(x) };
    Ok(term(p) + term(1.0 - p))
}
