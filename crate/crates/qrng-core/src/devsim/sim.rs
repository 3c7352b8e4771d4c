//! The frame-by-frame simulation loop.
//!
//! Draw order per frame is part of the reproducibility contract:
//!
//! 1. photon count ~ Poisson(mean_photons_per_pulse), one uniform;
//! 2. per photon: path Bernoulli (one uniform), then arrival jitter
//!    (two uniforms, Box-Muller);
//! 3. dark count ~ Poisson(dark_rate * period) per detector (one uniform
//!    each; the two-detector scheme draws detector 0 first), then one
//!    uniform per dark event for its position in the frame;
//! 4. candidates (photons, darks, afterpulses due this frame) in time
//!    order: one uniform for the efficiency trial; on a firing, one
//!    uniform for the afterpulse Bernoulli and, if it schedules, one more
//!    for the exponential delay.
//!
//! Times are tracked as (frame index, offset) pairs so recovery intervals
//! are computed from small differences and stay exact for arbitrarily
//! long runs.

use crate::bitcore::{BitStream, Origin, PoissonSampler, RngEngine};

use super::{
    CounterBank, DetectionEvent, DeviceConfig, EventCause, Scheme, SimulationResult, WindowLabel,
};

/// Hard cap on pulses per run; keeps frame arithmetic comfortably inside
/// exact integer range.
pub const MAX_PULSES: u64 = 1 << 48;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    /// Arrival time relative to the current frame start. May be slightly
    /// negative (jitter) or up to one period (darks).
    offset: f64,
    detector: u8,
    cause: EventCause,
}

/// An afterpulse waiting for its frame.
#[derive(Debug, Clone, Copy)]
struct PendingAfterpulse {
    frame: u64,
    offset: f64,
    detector: u8,
}

#[derive(Debug, Clone, Copy)]
struct DetectorState {
    last_frame: i64,
    last_offset: f64,
}

impl DetectorState {
    fn fresh() -> Self {
        // far enough in the past that the first trial sees full recovery
        DetectorState {
            last_frame: i64::MIN / 4,
            last_offset: 0.0,
        }
    }

    #[inline]
    fn recovery_ns(&self, frame: u64, offset: f64, period: f64) -> f64 {
        (frame as i64 - self.last_frame) as f64 * period + (offset - self.last_offset)
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct FrameHits {
    w0: bool,
    w1: bool,
}

/// Window membership: returns the frame shift (0 or +1) of the window
/// instance containing `offset`, if any. Windows are half-open
/// [center - w/2, center + w/2).
#[inline]
fn window_shift(offset: f64, center: f64, half_width: f64, period: f64) -> Option<i64> {
    let j = libm::round((offset - center) / period);
    let d = offset - center - j * period;
    if d >= -half_width && d < half_width {
        Some(j as i64)
    } else {
        None
    }
}

struct Simulator<'a> {
    config: &'a DeviceConfig,
    rng: RngEngine,
    period: f64,
    half_width: f64,
    center0: f64,
    center1: f64,
    center_noise: f64,
    photon_sampler: PoissonSampler,
    dark_sampler: PoissonSampler,
    detectors: [DetectorState; 2],
    pending: Vec<PendingAfterpulse>,
    candidates: Vec<Candidate>,
    hits_current: FrameHits,
    hits_next: FrameHits,
    counters: CounterBank,
    bits: BitStream,
    last_bit_frame: Option<u64>,
    trace: Option<(Vec<DetectionEvent>, usize)>,
}

impl<'a> Simulator<'a> {
    fn new(config: &'a DeviceConfig, seed: u64, n_pulses: u64) -> crate::Result<Self> {
        let period = config.period_ns();
        let dark_mean = config.detector.dark_rate_hz * period * 1e-9;
        Ok(Simulator {
            config,
            rng: RngEngine::new(seed),
            period,
            half_width: config.window_width_ns / 2.0,
            center0: config.window0_offset_ns,
            center1: config.window0_offset_ns + config.path_delay_ns,
            center_noise: config.noise_window_offset_ns,
            photon_sampler: PoissonSampler::new(config.mean_photons_per_pulse)?,
            dark_sampler: PoissonSampler::new(dark_mean)?,
            detectors: [DetectorState::fresh(); 2],
            pending: Vec::new(),
            candidates: Vec::new(),
            hits_current: FrameHits::default(),
            hits_next: FrameHits::default(),
            counters: CounterBank::default(),
            bits: BitStream::with_capacity(
                Origin::Simulated,
                // rough upper bound on emitted bits for preallocation
                ((n_pulses as f64) * (1.0 - libm::exp(-config.mean_photons_per_pulse)) * 1.1)
                    as u64
                    + 1024,
            ),
            last_bit_frame: None,
            trace: None,
        })
    }

    /// Classify a firing at (frame, offset) and record it.
    fn register_firing(&mut self, frame: u64, candidate: &Candidate) {
        let two_detector = self.config.scheme == Scheme::TwoDetector;
        let mut label = WindowLabel::Ambiguous;
        let mut label_frame = frame;

        let check0 = !two_detector || candidate.detector == 0;
        let check1 = !two_detector || candidate.detector == 1;
        if check0 {
            if let Some(shift @ 0..=1) =
                window_shift(candidate.offset, self.center0, self.half_width, self.period)
            {
                label = WindowLabel::Zero;
                label_frame = frame + shift as u64;
                if shift == 0 {
                    self.hits_current.w0 = true;
                } else {
                    self.hits_next.w0 = true;
                }
            }
        }
        if label == WindowLabel::Ambiguous && check1 {
            if let Some(shift @ 0..=1) =
                window_shift(candidate.offset, self.center1, self.half_width, self.period)
            {
                label = WindowLabel::One;
                label_frame = frame + shift as u64;
                if shift == 0 {
                    self.hits_current.w1 = true;
                } else {
                    self.hits_next.w1 = true;
                }
            }
        }
        if label == WindowLabel::Ambiguous {
            if let Some(0) = window_shift(candidate.offset, self.center_noise, self.half_width, self.period) {
                label = WindowLabel::Noise;
                self.counters.noise += 1;
            }
        }

        if let Some((events, limit)) = &mut self.trace {
            if events.len() < *limit {
                events.push(DetectionEvent {
                    pulse_index: label_frame,
                    time_ns: frame as f64 * self.period + candidate.offset,
                    label,
                    cause: candidate.cause,
                    detector: candidate.detector,
                });
            }
        }
    }

    /// Process one candidate avalanche; returns whether it fired.
    fn try_fire(&mut self, frame: u64, index: usize) {
        let candidate = self.candidates[index];
        let det = &self.detectors[candidate.detector as usize];
        let dt = det.recovery_ns(frame, candidate.offset, self.period);
        let ramp = (dt / self.config.detector.recovery_time_ns).clamp(0.0, 1.0);
        // photons carry the base efficiency; darks and afterpulses are
        // count rates already, gated only by the recovery state
        let fire_p = if candidate.cause == EventCause::Photon {
            self.config.detector.base_efficiency * ramp
        } else {
            ramp
        };
        if !self.rng.bernoulli(fire_p) {
            return;
        }
        self.detectors[candidate.detector as usize] = DetectorState {
            last_frame: frame as i64,
            last_offset: candidate.offset,
        };
        if self.rng.bernoulli(self.config.detector.afterpulse_prob) {
            let delay = self.rng.exponential(self.config.detector.afterpulse_tau_ns);
            self.schedule_afterpulse(frame, candidate.offset + delay, candidate.detector, index);
        }
        self.register_firing(frame, &candidate);
    }

    /// Queue an afterpulse at `offset` relative to frame `frame`,
    /// inserting into the current frame's remaining candidates when due
    /// immediately.
    fn schedule_afterpulse(&mut self, frame: u64, offset: f64, detector: u8, current_index: usize) {
        if offset < self.period {
            // due within the current frame, after the current candidate
            let candidate = Candidate {
                offset,
                detector,
                cause: EventCause::Afterpulse,
            };
            let insert_at = self.candidates[current_index + 1..]
                .iter()
                .position(|c| c.offset > offset)
                .map(|p| current_index + 1 + p)
                .unwrap_or(self.candidates.len());
            self.candidates.insert(insert_at, candidate);
        } else {
            let frames_ahead = (offset / self.period) as u64;
            self.pending.push(PendingAfterpulse {
                frame: frame + frames_ahead,
                offset: offset - frames_ahead as f64 * self.period,
                detector,
            });
        }
    }

    /// Close out the current frame's window hits into counters and bits.
    fn finalize_frame(&mut self, frame: u64) {
        let hits = self.hits_current;
        self.hits_current = self.hits_next;
        self.hits_next = FrameHits::default();
        let bit = match (hits.w0, hits.w1) {
            (false, false) => return,
            (true, true) => {
                self.counters.ambiguous += 1;
                return;
            }
            (false, true) => true,
            (true, false) => false,
        };
        if bit {
            self.counters.ones += 1;
        } else {
            self.counters.zeros += 1;
        }
        let adjacent = frame > 0 && self.last_bit_frame == Some(frame - 1);
        self.last_bit_frame = Some(frame);
        if adjacent {
            self.counters.adjacent_bits += 1;
            if self.config.reject_adjacent {
                self.counters.rejected_adjacent += 1;
                return;
            }
        }
        self.bits.push(bit);
    }

    fn run(&mut self, n_pulses: u64) {
        let two_detector = self.config.scheme == Scheme::TwoDetector;
        let jitter_sigma = self.config.arrival_jitter_sigma_ns;
        let split = self.config.split_to_one;

        for frame in 0..n_pulses {
            self.candidates.clear();

            // photons
            let n_photons = self.photon_sampler.sample(&mut self.rng);
            for _ in 0..n_photons {
                let long_path = self.rng.bernoulli(split);
                let jitter = self.rng.gauss() * jitter_sigma;
                let offset = if long_path {
                    self.center1 + jitter
                } else {
                    self.center0 + jitter
                };
                self.candidates.push(Candidate {
                    offset,
                    detector: if two_detector && long_path { 1 } else { 0 },
                    cause: EventCause::Photon,
                });
            }

            // dark counts, one Poisson process per physical detector
            let n_dark_detectors: u8 = if two_detector { 2 } else { 1 };
            for detector in 0..n_dark_detectors {
                let n_dark = self.dark_sampler.sample(&mut self.rng);
                for _ in 0..n_dark {
                    let offset = self.rng.uniform() * self.period;
                    self.candidates.push(Candidate {
                        offset,
                        detector,
                        cause: EventCause::Dark,
                    });
                }
            }

            // afterpulses that come due in this frame
            if !self.pending.is_empty() {
                let mut i = 0;
                while i < self.pending.len() {
                    if self.pending[i].frame == frame {
                        let ap = self.pending.swap_remove(i);
                        self.candidates.push(Candidate {
                            offset: ap.offset,
                            detector: ap.detector,
                            cause: EventCause::Afterpulse,
                        });
                    } else {
                        i += 1;
                    }
                }
            }

            if !self.candidates.is_empty() {
                self.candidates
                    .sort_by(|a, b| a.offset.total_cmp(&b.offset));
                let mut i = 0;
                while i < self.candidates.len() {
                    self.try_fire(frame, i);
                    i += 1;
                }
            }

            self.finalize_frame(frame);
        }
        // window hits spilled into the frame after the last pulse belong
        // to an unsimulated frame and are dropped (they were produced by
        // simulated pulses, but their frame never completed)
        self.bits.finalize_meta();
    }

    fn into_result(self, seed: u64, n_pulses: u64) -> SimulationResult {
        SimulationResult {
            raw_bits: self.bits,
            counters: self.counters,
            pulses_simulated: n_pulses,
            config_echo: self.config.clone(),
            seed,
        }
    }
}

fn check_run_args(config: &DeviceConfig, n_pulses: u64) -> crate::Result<()> {
    config.validate()?;
    if n_pulses == 0 {
        return Err(crate::Error::ParamDomain(
            "simulation needs at least one pulse".into(),
        ));
    }
    if n_pulses > MAX_PULSES {
        return Err(crate::Error::Capacity(format!(
            "pulse count {n_pulses} exceeds the supported maximum {MAX_PULSES}"
        )));
    }
    Ok(())
}

/// Simulate `n_pulses` frames of the configured generator.
pub fn simulate(config: &DeviceConfig, seed: u64, n_pulses: u64) -> crate::Result<SimulationResult> {
    check_run_args(config, n_pulses)?;
    let mut sim = Simulator::new(config, seed, n_pulses)?;
    sim.run(n_pulses);
    Ok(sim.into_result(seed, n_pulses))
}

/// Like [`simulate`], additionally capturing up to `max_events` fired
/// avalanches for inspection.
pub fn simulate_traced(
    config: &DeviceConfig,
    seed: u64,
    n_pulses: u64,
    max_events: usize,
) -> crate::Result<(SimulationResult, Vec<DetectionEvent>)> {
    check_run_args(config, n_pulses)?;
    let mut sim = Simulator::new(config, seed, n_pulses)?;
    sim.trace = Some((Vec::new(), max_events));
    sim.run(n_pulses);
    let events = sim.trace.take().map(|(e, _)| e).unwrap_or_default();
    Ok((sim.into_result(seed, n_pulses), events))
}
