//! Self-describing JSON configuration: sections `radar`, `scene`,
//! `subband`, `keystone`, `lvt`, `montecarlo`, all physical quantities in
//! SI with unit-suffixed keys.

use std::path::Path;

use serde::{Deserialize, Serialize};

use sdfc_lvt::keystone::Interpolator;
use sdfc_lvt::lvt::{EstimateConfig, LvtConfig};
use sdfc_lvt::model::{MotionModel, RadarParams, Scene, TargetMotion};
use sdfc_lvt::C64;

use crate::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub radar: RadarSection,
    pub scene: SceneSection,
    #[serde(default)]
    pub subband: SubbandSection,
    #[serde(default)]
    pub keystone: KeystoneSection,
    #[serde(default)]
    pub lvt: LvtSection,
    #[serde(default)]
    pub montecarlo: MonteCarloSection,
    /// Optional explicit fast-time gate; defaults to the padded target span.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarSection {
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub pulse_width_s: f64,
    pub range_sampling_frequency_hz: f64,
    pub pulse_repetition_interval_s: f64,
    pub pulse_count: usize,
    #[serde(default = "default_propagation_speed")]
    pub propagation_speed_m_s: f64,
}

fn default_propagation_speed() -> f64 {
    sdfc_lvt::model::SPEED_OF_LIGHT
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    pub targets: Vec<TargetSection>,
    /// Input SNR in dB, referenced to the first target's |σ|²; mutually
    /// exclusive with `noise_variance`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_in_db: Option<f64>,
    /// Noise power V², linear.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_variance: Option<f64>,
    #[serde(default)]
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", deny_unknown_fields)]
pub enum TargetSection {
    #[serde(rename = "quadratic")]
    Quadratic {
        initial_range_m: f64,
        radial_velocity_m_s: f64,
        radial_acceleration_m_s2: f64,
        #[serde(default = "default_amplitude")]
        reflectivity_amplitude: f64,
        #[serde(default)]
        reflectivity_phase_rad: f64,
    },
    #[serde(rename = "sar_geometry")]
    SarGeometry {
        initial_range_m: f64,
        along_track_velocity_m_s: f64,
        cross_track_velocity_m_s: f64,
        platform_velocity_m_s: f64,
        #[serde(default = "default_amplitude")]
        reflectivity_amplitude: f64,
        #[serde(default)]
        reflectivity_phase_rad: f64,
    },
}

fn default_amplitude() -> f64 {
    1.0
}

/// Reserved: the split is the fixed half-band construction with
/// Δf_r = B/2; the section exists so configs state that explicitly.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubbandSection {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeystoneSection {
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// "chirp-z" (default) or "windowed-sinc".
    #[serde(default = "default_interpolator")]
    pub interpolator: String,
}

fn default_kappa() -> f64 {
    0.95
}

fn default_interpolator() -> String {
    "chirp-z".into()
}

impl Default for KeystoneSection {
    fn default() -> Self {
        Self {
            kappa: default_kappa(),
            interpolator: default_interpolator(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LvtSection {
    /// Lag-offset sample count q; defaults to N/2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_sample_count: Option<usize>,
    /// Lag-normalization constant h, seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling_factor_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_pad_freq: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_pad_chirp: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_snr_list")]
    pub snr_in_db_list: Vec<f64>,
}

fn default_trials() -> usize {
    200
}

fn default_snr_list() -> Vec<f64> {
    vec![-10.0, -5.0, 0.0, 5.0, 10.0]
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            snr_in_db_list: default_snr_list(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    pub start_s: f64,
    pub end_s: f64,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config parse error: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.radar()
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        if self.scene.targets.is_empty() {
            return Err(CliError::Validation(
                "scene.targets must contain at least one target (K ≥ 1)".into(),
            ));
        }
        if self.scene.snr_in_db.is_some() && self.scene.noise_variance.is_some() {
            return Err(CliError::Validation(
                "set either scene.snr_in_db or scene.noise_variance, not both".into(),
            ));
        }
        self.scene_model()
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        match self.keystone.interpolator.as_str() {
            "chirp-z" | "windowed-sinc" => {}
            other => {
                return Err(CliError::Validation(format!(
                    "keystone.interpolator must be \"chirp-z\" or \"windowed-sinc\", got \"{other}\""
                )))
            }
        }
        if self.montecarlo.trials < 100 {
            return Err(CliError::Validation(format!(
                "montecarlo.trials must be ≥ 100, got {}",
                self.montecarlo.trials
            )));
        }
        self.lvt_config()
            .validate(self.radar.pulse_count)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(())
    }

    pub fn radar(&self) -> RadarParams {
        RadarParams {
            carrier_frequency: self.radar.carrier_frequency_hz,
            bandwidth: self.radar.bandwidth_hz,
            pulse_width: self.radar.pulse_width_s,
            range_sampling_frequency: self.radar.range_sampling_frequency_hz,
            pulse_repetition_interval: self.radar.pulse_repetition_interval_s,
            pulse_count: self.radar.pulse_count,
            propagation_speed: self.radar.propagation_speed_m_s,
        }
    }

    pub fn scene_model(&self) -> Scene {
        let targets = self
            .scene
            .targets
            .iter()
            .map(|t| match *t {
                TargetSection::Quadratic {
                    initial_range_m,
                    radial_velocity_m_s,
                    radial_acceleration_m_s2,
                    reflectivity_amplitude,
                    reflectivity_phase_rad,
                } => TargetMotion {
                    model: MotionModel::Quadratic {
                        initial_range: initial_range_m,
                        radial_velocity: radial_velocity_m_s,
                        radial_acceleration: radial_acceleration_m_s2,
                    },
                    reflectivity: C64::from_polar(
                        reflectivity_amplitude,
                        reflectivity_phase_rad,
                    ),
                },
                TargetSection::SarGeometry {
                    initial_range_m,
                    along_track_velocity_m_s,
                    cross_track_velocity_m_s,
                    platform_velocity_m_s,
                    reflectivity_amplitude,
                    reflectivity_phase_rad,
                } => TargetMotion {
                    model: MotionModel::SarGeometry {
                        initial_range: initial_range_m,
                        along_track_velocity: along_track_velocity_m_s,
                        cross_track_velocity: cross_track_velocity_m_s,
                        platform_velocity: platform_velocity_m_s,
                    },
                    reflectivity: C64::from_polar(
                        reflectivity_amplitude,
                        reflectivity_phase_rad,
                    ),
                },
            })
            .collect::<Vec<_>>();
        let noise_variance = match (self.scene.noise_variance, self.scene.snr_in_db) {
            (Some(v), _) => v,
            (None, Some(db)) => {
                let reference = targets[0].reflectivity.norm_sqr();
                reference / 10f64.powf(db / 10.0)
            }
            (None, None) => 0.0,
        };
        Scene {
            targets,
            noise_variance,
            rng_seed: self.scene.rng_seed,
            noise_stream: 0,
        }
    }

    pub fn lvt_config(&self) -> LvtConfig {
        let defaults = LvtConfig::for_sequence(
            self.radar.pulse_count,
            self.radar.pulse_repetition_interval_s,
        );
        LvtConfig {
            delay_sample_count: self
                .lvt
                .delay_sample_count
                .unwrap_or(defaults.delay_sample_count),
            scaling_factor: self.lvt.scaling_factor_s.unwrap_or(defaults.scaling_factor),
            zero_pad_freq: self.lvt.zero_pad_freq.unwrap_or(defaults.zero_pad_freq),
            zero_pad_chirp: self.lvt.zero_pad_chirp.unwrap_or(defaults.zero_pad_chirp),
        }
    }

    pub fn estimate_config(&self) -> EstimateConfig {
        EstimateConfig {
            lvt: Some(self.lvt_config()),
            interpolator: match self.keystone.interpolator.as_str() {
                "windowed-sinc" => Interpolator::WindowedSinc,
                _ => Interpolator::ChirpZ,
            },
            kappa: self.keystone.kappa,
            ..EstimateConfig::default()
        }
    }
}
