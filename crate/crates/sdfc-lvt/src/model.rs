//! Waveform constants, target motion, and echo synthesis.
//!
//! Two synthesis routes exist. `synthesize_raw_echo` evaluates the
//! down-converted fast-time echo sample by sample (rectangular chirp
//! envelope, stop-and-hop range per pulse). `synthesize_compressed_spectrum`
//! skips the matched filter and writes the ideal range-compressed spectrum
//! directly: per-bin value σ′·a(f/B)·e^{-j4π(f+f_c)R(t)/c} with compression
//! gain σ′ = σ·√(B·T_p). Noise is injected once, in whichever domain a
//! pipeline starts.
//!
//! Conventions:
//! - the transmit window a(x) is exactly rectangular, one for |x| ≤ 1/2;
//! - range-frequency rows are stored in centered order on [-f_s/2, f_s/2)
//!   with phases referenced to the gate start (the absolute delay is
//!   recovered through `range_gate_start`);
//! - the fast-time ↔ range-frequency contract divides by the in-band bin
//!   count N_B, so a unit target compresses to peak √(B·T_p) and each
//!   half-band sub-signal to √(B·T_p)/2;
//! - compressed-spectrum noise is white over the in-band bins with per-bin
//!   variance N_B·V², which makes the compressed fast-time noise power V²
//!   and each sub-band channel V²/2 — the convention the closed-form SNR
//!   expressions assume.

use crate::matrix::{DataMatrix, DomainTag};
use crate::noise::NoiseStream;
use crate::{C64, Error, Result};

/// Default propagation speed, m/s. Set `propagation_speed` to 3e8 to make
/// round demo numbers (150 m/s ambiguity limit at L-band, T = 0.5 ms) exact.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Waveform and system constants of the pulse-Doppler radar.
#[derive(Debug, Clone, Copy)]
pub struct RadarParams {
    /// Carrier frequency f_c, Hz.
    pub carrier_frequency: f64,
    /// Transmit bandwidth B, Hz.
    pub bandwidth: f64,
    /// Pulse width T_p, s.
    pub pulse_width: f64,
    /// Complex baseband sampling frequency f_s, Hz.
    pub range_sampling_frequency: f64,
    /// Pulse repetition interval T, s.
    pub pulse_repetition_interval: f64,
    /// Number of coherently integrated pulses N.
    pub pulse_count: usize,
    /// Propagation speed c, m/s.
    pub propagation_speed: f64,
}

impl RadarParams {
    pub fn validate(&self) -> Result<()> {
        let all_positive = self.carrier_frequency > 0.0
            && self.bandwidth > 0.0
            && self.pulse_width > 0.0
            && self.range_sampling_frequency > 0.0
            && self.pulse_repetition_interval > 0.0
            && self.propagation_speed > 0.0;
        if !all_positive {
            return Err(Error::InvalidParameter(
                "radar parameters must all be positive".into(),
            ));
        }
        if self.bandwidth > self.range_sampling_frequency {
            return Err(Error::InvalidParameter(format!(
                "bandwidth {} Hz exceeds sampling frequency {} Hz",
                self.bandwidth, self.range_sampling_frequency
            )));
        }
        if self.pulse_count < 2 {
            return Err(Error::InvalidParameter(format!(
                "pulse count {} < 2",
                self.pulse_count
            )));
        }
        Ok(())
    }

    /// Chirp rate γ = B/T_p, Hz/s.
    pub fn chirp_rate(&self) -> f64 {
        self.bandwidth / self.pulse_width
    }

    /// Wavelength λ = c/f_c, m.
    pub fn wavelength(&self) -> f64 {
        self.propagation_speed / self.carrier_frequency
    }

    /// Time-bandwidth product B·T_p (the pulse-compression gain).
    pub fn time_bandwidth(&self) -> f64 {
        self.bandwidth * self.pulse_width
    }

    /// Coherent aperture N·T, s.
    pub fn aperture(&self) -> f64 {
        self.pulse_count as f64 * self.pulse_repetition_interval
    }

    /// Slow time of pulse n (t = n·T).
    pub fn pulse_time(&self, n: usize) -> f64 {
        n as f64 * self.pulse_repetition_interval
    }
}

/// Range history model of one target.
#[derive(Debug, Clone, Copy)]
pub enum MotionModel {
    /// R(t) = R₀ − v₀·t − ½·a₀·t².
    Quadratic {
        initial_range: f64,
        radial_velocity: f64,
        radial_acceleration: f64,
    },
    /// Side-looking geometry: R(t) = √((V·t − v_a·t)² + (R₀ − v_c·t)²).
    SarGeometry {
        initial_range: f64,
        along_track_velocity: f64,
        cross_track_velocity: f64,
        platform_velocity: f64,
    },
}

impl MotionModel {
    pub fn initial_range(&self) -> f64 {
        match *self {
            MotionModel::Quadratic { initial_range, .. }
            | MotionModel::SarGeometry { initial_range, .. } => initial_range,
        }
    }
}

/// One scatterer: motion plus complex reflectivity σ₀.
#[derive(Debug, Clone, Copy)]
pub struct TargetMotion {
    pub model: MotionModel,
    pub reflectivity: C64,
}

impl TargetMotion {
    pub fn quadratic(initial_range: f64, velocity: f64, acceleration: f64, sigma: C64) -> Self {
        Self {
            model: MotionModel::Quadratic {
                initial_range,
                radial_velocity: velocity,
                radial_acceleration: acceleration,
            },
            reflectivity: sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model.initial_range() <= 0.0 {
            return Err(Error::InvalidParameter("initial range must be > 0".into()));
        }
        if let MotionModel::Quadratic { radial_velocity, .. } = self.model {
            if radial_velocity.abs() >= 1e5 {
                return Err(Error::InvalidParameter(format!(
                    "|v₀| = {} m/s is not sub-relativistic plausible",
                    radial_velocity.abs()
                )));
            }
        }
        Ok(())
    }

    /// Instantaneous range R(t); errors if the geometry collapses.
    pub fn instantaneous_range(&self, t: f64) -> Result<f64> {
        let r = match self.model {
            MotionModel::Quadratic {
                initial_range,
                radial_velocity,
                radial_acceleration,
            } => initial_range - radial_velocity * t - 0.5 * radial_acceleration * t * t,
            MotionModel::SarGeometry {
                initial_range,
                along_track_velocity,
                cross_track_velocity,
                platform_velocity,
            } => {
                let across = (platform_velocity - along_track_velocity) * t;
                let along = initial_range - cross_track_velocity * t;
                (across * across + along * along).sqrt()
            }
        };
        if r <= 0.0 {
            return Err(Error::InvalidGeometry { range: r, t });
        }
        Ok(r)
    }

    /// Velocity and acceleration of the quadratic model equivalent to this
    /// motion at t = 0 (identity for `Quadratic`).
    pub fn quadratic_equivalent(&self) -> (f64, f64) {
        match self.model {
            MotionModel::Quadratic {
                radial_velocity,
                radial_acceleration,
                ..
            } => (radial_velocity, radial_acceleration),
            MotionModel::SarGeometry {
                initial_range,
                along_track_velocity,
                cross_track_velocity,
                platform_velocity,
            } => sar_to_quadratic(
                initial_range,
                along_track_velocity,
                cross_track_velocity,
                platform_velocity,
            ),
        }
    }
}

/// Second-order expansion of the side-looking range history:
/// v₀ = v_c and a₀ = −(V − v_a)²/R₀.
pub fn sar_to_quadratic(
    initial_range: f64,
    along_track_velocity: f64,
    cross_track_velocity: f64,
    platform_velocity: f64,
) -> (f64, f64) {
    let relative = platform_velocity - along_track_velocity;
    (
        cross_track_velocity,
        -(relative * relative) / initial_range,
    )
}

/// Multi-target scene with one shared noise level and seed.
#[derive(Debug, Clone)]
pub struct Scene {
    pub targets: Vec<TargetMotion>,
    /// Noise power V² (linear, per complex sample).
    pub noise_variance: f64,
    pub rng_seed: u64,
    /// Noise stream counter under `rng_seed`; Monte Carlo harnesses give
    /// each trial its own stream so realizations stay independent and
    /// reproducible regardless of execution order.
    pub noise_stream: u64,
}

impl Scene {
    pub fn noiseless(targets: Vec<TargetMotion>) -> Self {
        Self {
            targets,
            noise_variance: 0.0,
            rng_seed: 0,
            noise_stream: 0,
        }
    }

    pub fn with_noise(targets: Vec<TargetMotion>, noise_variance: f64, rng_seed: u64) -> Self {
        Self {
            targets,
            noise_variance,
            rng_seed,
            noise_stream: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::InvalidParameter("scene needs K ≥ 1 targets".into()));
        }
        if self.noise_variance < 0.0 {
            return Err(Error::InvalidParameter("noise variance must be ≥ 0".into()));
        }
        for t in &self.targets {
            t.validate()?;
        }
        Ok(())
    }
}

/// Fast-time gate: absolute start and sample count at f_s.
#[derive(Debug, Clone, Copy)]
pub struct Gate {
    pub start: f64,
    pub samples: usize,
}

impl Gate {
    /// Gate from a fast-time interval; the sample count is
    /// round(width·f_s).
    pub fn from_interval(start: f64, end: f64, radar: &RadarParams) -> Result<Self> {
        if end <= start {
            return Err(Error::InvalidParameter("gate end before start".into()));
        }
        let samples = ((end - start) * radar.range_sampling_frequency).round() as usize;
        Ok(Self { start, samples })
    }

    pub fn end(&self, radar: &RadarParams) -> f64 {
        self.start + self.samples as f64 / radar.range_sampling_frequency
    }
}

/// Smallest column multiple that makes the half-band shift B/4 an integer
/// number of bins, so the sub-band split is an exact partition with
/// Δf_r = B/2. Falls back to 1 when nothing small works.
pub(crate) fn split_friendly_column_multiple(radar: &RadarParams) -> usize {
    for l in 1..=4096usize {
        let shift = radar.bandwidth * l as f64 / (4.0 * radar.range_sampling_frequency);
        if (shift - shift.round()).abs() < 1e-9 && shift.round() >= 1.0 {
            return l;
        }
    }
    1
}

/// Default gate: the target delay span padded by T_p on each side, with the
/// sample count rounded up so the sub-band split lands on whole bins.
pub fn default_gate(radar: &RadarParams, scene: &Scene) -> Result<Gate> {
    let c = radar.propagation_speed;
    let mut tau_min = f64::INFINITY;
    let mut tau_max = f64::NEG_INFINITY;
    for target in &scene.targets {
        for n in 0..radar.pulse_count {
            let tau = 2.0 * target.instantaneous_range(radar.pulse_time(n))? / c;
            tau_min = tau_min.min(tau);
            tau_max = tau_max.max(tau);
        }
    }
    let start = tau_min - radar.pulse_width;
    let width = tau_max - tau_min + 2.0 * radar.pulse_width;
    let multiple = split_friendly_column_multiple(radar);
    let mut samples = (width * radar.range_sampling_frequency).ceil() as usize;
    samples = samples.div_ceil(multiple) * multiple;
    samples = samples.max(8);
    Ok(Gate { start, samples })
}

/// Rectangular transmit window a(x): one for |x| ≤ 1/2 (with an ulp-scale
/// guard so grid-aligned envelope edges do not flicker across routes that
/// reconstruct the argument differently).
pub fn window(x: f64) -> f64 {
    if x.abs() <= 0.5 + 1e-9 {
        1.0
    } else {
        0.0
    }
}

/// Signed frequency-bin center index: column j carries (j − cols/2)·Δf.
pub(crate) fn center_col(cols: usize) -> usize {
    cols / 2
}

/// Columns of the in-band support, as a half-open index range into the
/// centered spectrum.
///
/// The band is taken as (−B/2, B/2]: dropping the lower edge bin keeps
/// both sub-band halves symmetric about their centers after the split, so
/// their compressed envelopes are purely real and the conjugate-product
/// phase is exactly the Δf_r carrier term.
pub(crate) fn in_band_cols(radar: &RadarParams, cols: usize) -> std::ops::Range<usize> {
    let step = radar.range_sampling_frequency / cols as f64;
    let center = center_col(cols) as isize;
    let half_bins = radar.bandwidth / (2.0 * step);
    let lo = (-half_bins + 1e-9).floor() as isize + 1 + center;
    let hi = (half_bins + 1e-9).floor() as isize + center;
    (lo.max(0) as usize)..((hi + 1).min(cols as isize) as usize)
}

/// Down-converted fast-time echo of the scene over `gate`, with complex
/// white Gaussian noise of power V² per sample when V² > 0.
pub fn synthesize_raw_echo(radar: &RadarParams, scene: &Scene, gate: Gate) -> Result<DataMatrix> {
    radar.validate()?;
    scene.validate()?;
    let c = radar.propagation_speed;
    let fs = radar.range_sampling_frequency;
    let gate_end = gate.end(radar);

    // The rectangular envelope |τ − 2R(t)/c| ≤ T_p/2 must fit for every
    // pulse of every target.
    for (k, target) in scene.targets.iter().enumerate() {
        for n in 0..radar.pulse_count {
            let tau_d = 2.0 * target.instantaneous_range(radar.pulse_time(n))? / c;
            let need_start = tau_d - radar.pulse_width / 2.0;
            let need_end = tau_d + radar.pulse_width / 2.0;
            if need_start < gate.start - 0.5 / fs || need_end > gate_end + 0.5 / fs {
                return Err(Error::GateTooSmall {
                    target: k,
                    gate_start: gate.start,
                    gate_end,
                    need_start,
                    need_end,
                });
            }
        }
    }

    let mut out = DataMatrix::zeros(
        radar.pulse_count,
        gate.samples,
        DomainTag::FastTime,
        radar.pulse_repetition_interval,
        gate.start,
        1.0 / fs,
        gate.start,
    )?;

    let gamma = radar.chirp_rate();
    let wavelength = radar.wavelength();
    for n in 0..radar.pulse_count {
        let t = radar.pulse_time(n);
        for target in &scene.targets {
            let range = target.instantaneous_range(t)?;
            let tau_d = 2.0 * range / c;
            let carrier = C64::from_polar(
                1.0,
                -4.0 * std::f64::consts::PI * range / wavelength,
            ) * target.reflectivity;
            // Only samples inside the envelope contribute.
            let m_lo = ((tau_d - radar.pulse_width / 2.0 - gate.start) * fs).floor() as isize;
            let m_hi = ((tau_d + radar.pulse_width / 2.0 - gate.start) * fs).ceil() as isize;
            let row = out.row_mut(n);
            for m in m_lo.max(0)..=m_hi.min(gate.samples as isize - 1) {
                let tau = gate.start + m as f64 / fs;
                let arg = (tau - tau_d) / radar.pulse_width;
                if window(arg) == 0.0 {
                    continue;
                }
                let chirp_phase = std::f64::consts::PI * gamma * (tau - tau_d) * (tau - tau_d);
                row[m as usize] += carrier * C64::from_polar(1.0, chirp_phase);
            }
        }
    }

    if scene.noise_variance > 0.0 {
        let mut stream = NoiseStream::new(scene.rng_seed, scene.noise_stream);
        for v in out.values_mut() {
            *v += stream.complex_gaussian(scene.noise_variance);
        }
    }
    Ok(out)
}

/// Ideal range-compressed spectrum of the scene (the matched-filter output
/// without simulating the raw convolution), over the default gate.
pub fn synthesize_compressed_spectrum(radar: &RadarParams, scene: &Scene) -> Result<DataMatrix> {
    let gate = default_gate(radar, scene)?;
    synthesize_compressed_spectrum_with_gate(radar, scene, gate)
}

/// As [`synthesize_compressed_spectrum`] with an explicit gate (the gate
/// fixes the column count and the fast-time origin of the phases).
pub fn synthesize_compressed_spectrum_with_gate(
    radar: &RadarParams,
    scene: &Scene,
    gate: Gate,
) -> Result<DataMatrix> {
    radar.validate()?;
    scene.validate()?;
    let cols = gate.samples;
    let c = radar.propagation_speed;
    let step = radar.range_sampling_frequency / cols as f64;
    let center = center_col(cols);
    let col_start = -(center as f64) * step;

    let mut out = DataMatrix::zeros(
        radar.pulse_count,
        cols,
        DomainTag::RangeFrequency,
        radar.pulse_repetition_interval,
        col_start,
        step,
        gate.start,
    )?;

    let band = in_band_cols(radar, cols);
    let n_b = band.len();
    let gain = radar.time_bandwidth().sqrt();
    let wavelength = radar.wavelength();

    for n in 0..radar.pulse_count {
        let t = radar.pulse_time(n);
        for target in &scene.targets {
            let range = target.instantaneous_range(t)?;
            let tau_rel = 2.0 * range / c - gate.start;
            // σ′·e^{-j4πR/λ}·e^{-j2πf·(τ_d − gate_start)} over the band,
            // evaluated with a per-bin phasor recurrence.
            let amp = target.reflectivity * gain;
            let f0 = col_start + band.start as f64 * step;
            let mut phasor = C64::from_polar(
                1.0,
                -4.0 * std::f64::consts::PI * range / wavelength
                    - std::f64::consts::TAU * f0 * tau_rel,
            );
            let ratio = C64::from_polar(1.0, -std::f64::consts::TAU * step * tau_rel);
            let row = out.row_mut(n);
            for v in row[band.clone()].iter_mut() {
                *v += amp * phasor;
                phasor *= ratio;
            }
        }
    }

    if scene.noise_variance > 0.0 {
        // Per-bin variance N_B·V² ⇒ compressed fast-time noise power V².
        let bin_variance = n_b as f64 * scene.noise_variance;
        let mut stream = NoiseStream::new(scene.rng_seed, scene.noise_stream);
        for n in 0..radar.pulse_count {
            let row = out.row_mut(n);
            for v in row[band.clone()].iter_mut() {
                *v += stream.complex_gaussian(bin_variance);
            }
        }
    }
    Ok(out)
}

/// Add in-band white noise to a compressed spectrum in place, with the
/// per-bin variance N_B·V² of the synthesis convention.
pub fn inject_spectrum_noise(
    spectrum: &mut DataMatrix,
    radar: &RadarParams,
    noise_variance: f64,
    seed: u64,
    stream: u64,
) -> Result<()> {
    spectrum.expect_domain(DomainTag::RangeFrequency)?;
    if noise_variance <= 0.0 {
        return Ok(());
    }
    let band = in_band_cols(radar, spectrum.cols());
    let bin_variance = band.len() as f64 * noise_variance;
    let mut noise = NoiseStream::new(seed, stream);
    for n in 0..spectrum.rows() {
        for v in spectrum.row_mut(n)[band.clone()].iter_mut() {
            *v += noise.complex_gaussian(bin_variance);
        }
    }
    Ok(())
}
