//! Discrete-event simulation of the optical generator.
//!
//! One frame per LED pulse. Photons leave the source in a Poisson-
//! distributed bunch, take the short ('0') or long ('1') fiber path, and
//! arrive inside one of two coincidence windows separated by the path
//! delay; a third window far from both arrival times counts thermal noise.
//! The Geiger-mode counter is blind immediately after an avalanche and
//! recovers linearly over `recovery_time_ns`; dark counts fire anywhere in
//! the frame, and every avalanche may schedule one afterpulse.
//!
//! A frame yields bit 0 when only the '0' window fired, bit 1 when only
//! the '1' window fired, and is discarded as ambiguous when both fired.

mod sim;

pub use sim::{simulate, simulate_traced};

use serde::{Deserialize, Serialize};

use crate::bitcore::BitStream;

/// Default optical split toward the long/'1' path.
///
/// Calibrated so the emitted bit stream is 40/60 under the default
/// detector: in frames carrying photons on both paths, the fresh '0'
/// avalanche suppresses the delayed photon (60 ns into a 1000 ns
/// recovery), converting would-be ambiguous frames into extra '0' bits
/// and pulling the output one-fraction about 0.011 below the optical
/// split.
pub const DEFAULT_SPLIT_TO_ONE: f64 = 0.411;

/// Detector physics parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorParams {
    /// Detection probability at full recovery. The default of 1.0 folds
    /// quantum efficiency into `mean_photons_per_pulse`, which is then
    /// read as mean *detectable* photons per pulse; photons that would
    /// never register do not influence the output.
    pub base_efficiency: f64,
    /// Time to ramp linearly from zero efficiency back to
    /// `base_efficiency` after an avalanche.
    pub recovery_time_ns: f64,
    /// Thermal (dark) count rate per detector.
    pub dark_rate_hz: f64,
    /// Probability that an avalanche schedules one afterpulse.
    pub afterpulse_prob: f64,
    /// Mean of the exponential afterpulse delay.
    pub afterpulse_tau_ns: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            base_efficiency: 1.0,
            recovery_time_ns: 1000.0,
            dark_rate_hz: 3000.0,
            afterpulse_prob: 0.0,
            afterpulse_tau_ns: 100.0,
        }
    }
}

/// One shared counter for both paths, or one counter per path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    OneDetector,
    TwoDetector,
}

/// Full generator configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceConfig {
    /// LED pulse rate; one frame per pulse.
    pub pulse_rate_hz: f64,
    /// Mean detectable photons per pulse (Poisson).
    pub mean_photons_per_pulse: f64,
    /// Probability a photon takes the long/'1' path.
    pub split_to_one: f64,
    /// Extra travel time of the long path.
    pub path_delay_ns: f64,
    /// Width of each coincidence window.
    pub window_width_ns: f64,
    /// Center of the '0' window relative to the frame start (the nominal
    /// short-path arrival time).
    pub window0_offset_ns: f64,
    /// Center of the noise window, placed clear of both arrival times.
    pub noise_window_offset_ns: f64,
    /// Gaussian jitter of photon arrival times.
    pub arrival_jitter_sigma_ns: f64,
    pub detector: DetectorParams,
    pub scheme: Scheme,
    /// Drop bits whose immediately preceding frame also produced a bit
    /// (they are still counted, just excluded from the stream).
    pub reject_adjacent: bool,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        DeviceConfig {
            pulse_rate_hz: 1e6,
            mean_photons_per_pulse: 0.1,
            split_to_one: DEFAULT_SPLIT_TO_ONE,
            path_delay_ns: 60.0,
            window_width_ns: 10.0,
            window0_offset_ns: 0.0,
            noise_window_offset_ns: 200.0,
            arrival_jitter_sigma_ns: 1.0,
            detector: DetectorParams::default(),
            scheme: Scheme::OneDetector,
            reject_adjacent: false,
        }
    }
}

impl DeviceConfig {
    /// Frame duration in nanoseconds.
    pub fn period_ns(&self) -> f64 {
        1e9 / self.pulse_rate_hz
    }

    /// Check every structural invariant, reporting the offending field.
    pub fn validate(&self) -> crate::Result<()> {
        let fail = |path: &str, message: String| {
            Err(crate::Error::Config {
                path: format!("config.{path}"),
                message,
            })
        };
        if !(self.pulse_rate_hz.is_finite() && self.pulse_rate_hz > 0.0) {
            return fail("pulse_rate_hz", format!("must be positive, got {}", self.pulse_rate_hz));
        }
        if !(self.mean_photons_per_pulse >= 0.0
            && self.mean_photons_per_pulse <= crate::bitcore::POISSON_MU_MAX)
        {
            return fail(
                "mean_photons_per_pulse",
                format!(
                    "must lie in [0, {}], got {}",
                    crate::bitcore::POISSON_MU_MAX,
                    self.mean_photons_per_pulse
                ),
            );
        }
        if !(0.0..=1.0).contains(&self.split_to_one) {
            return fail("split_to_one", format!("must lie in [0, 1], got {}", self.split_to_one));
        }
        if !(self.window_width_ns.is_finite() && self.window_width_ns > 0.0) {
            return fail("window_width_ns", format!("must be positive, got {}", self.window_width_ns));
        }
        if self.path_delay_ns < self.window_width_ns {
            return fail(
                "path_delay_ns",
                format!(
                    "windows 0 and 1 would overlap: path delay {} ns must be at least the window width {} ns",
                    self.path_delay_ns, self.window_width_ns
                ),
            );
        }
        if self.window0_offset_ns < 0.0 {
            return fail("window0_offset_ns", format!("must be nonnegative, got {}", self.window0_offset_ns));
        }
        if self.noise_window_offset_ns
            < self.window0_offset_ns + self.path_delay_ns + self.window_width_ns
        {
            return fail(
                "noise_window_offset_ns",
                format!(
                    "noise window at {} ns overlaps the photon windows; needs at least {} ns",
                    self.noise_window_offset_ns,
                    self.window0_offset_ns + self.path_delay_ns + self.window_width_ns
                ),
            );
        }
        if self.period_ns() < self.noise_window_offset_ns + self.window_width_ns {
            return fail(
                "pulse_rate_hz",
                format!(
                    "windows do not fit in one frame: period {} ns is shorter than noise window offset {} ns + width {} ns",
                    self.period_ns(),
                    self.noise_window_offset_ns,
                    self.window_width_ns
                ),
            );
        }
        if !(self.arrival_jitter_sigma_ns >= 0.0) {
            return fail("arrival_jitter_sigma_ns", format!("must be nonnegative, got {}", self.arrival_jitter_sigma_ns));
        }
        let d = &self.detector;
        if !(0.0..=1.0).contains(&d.base_efficiency) {
            return fail("detector.base_efficiency", format!("must lie in [0, 1], got {}", d.base_efficiency));
        }
        if !(d.recovery_time_ns.is_finite() && d.recovery_time_ns > 0.0) {
            return fail("detector.recovery_time_ns", format!("must be positive, got {}", d.recovery_time_ns));
        }
        if !(d.dark_rate_hz >= 0.0 && d.dark_rate_hz.is_finite()) {
            return fail("detector.dark_rate_hz", format!("must be nonnegative, got {}", d.dark_rate_hz));
        }
        if !(0.0..=1.0).contains(&d.afterpulse_prob) {
            return fail("detector.afterpulse_prob", format!("must lie in [0, 1], got {}", d.afterpulse_prob));
        }
        if !(d.afterpulse_tau_ns.is_finite() && d.afterpulse_tau_ns > 0.0) {
            return fail("detector.afterpulse_tau_ns", format!("must be positive, got {}", d.afterpulse_tau_ns));
        }
        // dark counts per frame must stay inside the Poisson sampler domain
        let dark_mean = d.dark_rate_hz * self.period_ns() * 1e-9;
        if dark_mean > crate::bitcore::POISSON_MU_MAX {
            return fail(
                "detector.dark_rate_hz",
                format!("implies {dark_mean} dark counts per frame, beyond the sampler domain"),
            );
        }
        Ok(())
    }
}

/// Detector efficiency after `dt_ns` of recovery: a linear ramp from 0 at
/// the avalanche to `base_efficiency` at `recovery_time_ns`.
pub fn detector_efficiency(dt_ns: f64, params: &DetectorParams) -> crate::Result<f64> {
    if !(dt_ns >= 0.0) {
        return Err(crate::Error::ParamDomain(format!(
            "time since last avalanche must be nonnegative, got {dt_ns}"
        )));
    }
    Ok(params.base_efficiency * (dt_ns / params.recovery_time_ns).min(1.0))
}

/// How an avalanche was classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowLabel {
    Zero,
    One,
    Noise,
    /// Fired outside every coincidence window; not attributable to a path.
    Ambiguous,
}

/// Physical cause of an avalanche.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventCause {
    Photon,
    Dark,
    Afterpulse,
}

/// One fired avalanche (trace output for diagnostics and tests).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    /// Frame the event was attributed to (the frame whose window it hit;
    /// the generating frame for out-of-window events).
    pub pulse_index: u64,
    /// Absolute time in nanoseconds from the start of the run.
    pub time_ns: f64,
    pub label: WindowLabel,
    pub cause: EventCause,
    /// Which physical detector fired (always 0 in the one-detector
    /// scheme).
    pub detector: u8,
}

/// Event counters accumulated over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterBank {
    /// Frames that yielded bit 0 (including rejected ones).
    pub zeros: u64,
    /// Frames that yielded bit 1 (including rejected ones).
    pub ones: u64,
    /// Avalanches inside the noise window.
    pub noise: u64,
    /// Frames where both bit windows fired (discarded).
    pub ambiguous: u64,
    /// Bits excluded from the stream by adjacent-detection rejection.
    pub rejected_adjacent: u64,
    /// Bits whose immediately preceding frame also produced a bit
    /// (counted whether or not rejection is enabled).
    pub adjacent_bits: u64,
}

/// Everything a simulation run produces.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub raw_bits: BitStream,
    pub counters: CounterBank,
    pub pulses_simulated: u64,
    pub config_echo: DeviceConfig,
    pub seed: u64,
}

/// Noise-window counts relative to emitted bits.
pub fn noise_fraction(counters: &CounterBank) -> crate::Result<f64> {
    let bits = counters.zeros + counters.ones;
    if bits == 0 {
        return Err(crate::Error::EmptyInput(
            "noise fraction needs at least one emitted bit".into(),
        ));
    }
    Ok(counters.noise as f64 / bits as f64)
}

/// Fraction of bits whose immediately preceding frame also yielded a bit.
pub fn adjacent_detection_fraction(result: &SimulationResult) -> crate::Result<f64> {
    let bits = result.counters.zeros + result.counters.ones;
    if bits < 2 {
        return Err(crate::Error::EmptyInput(format!(
            "adjacency fraction needs at least 2 emitted bits, got {bits}"
        )));
    }
    Ok(result.counters.adjacent_bits as f64 / bits as f64)
}
