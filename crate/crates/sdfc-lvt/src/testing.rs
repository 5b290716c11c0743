//! Shared fixtures for unit tests: the two-target demo scene used across
//! the crate (L-band radar, one ambiguous fast target and one slow target).

use crate::model::{RadarParams, TargetMotion};
use crate::C64;

pub(crate) fn table2_radar() -> RadarParams {
    RadarParams {
        carrier_frequency: 1.0e9,
        bandwidth: 15.0e6,
        pulse_width: 4.0e-6,
        range_sampling_frequency: 37.5e6,
        pulse_repetition_interval: 5.0e-4,
        pulse_count: 2048,
        propagation_speed: 3.0e8,
    }
}

pub(crate) fn table1_targets() -> [TargetMotion; 2] {
    [
        TargetMotion::quadratic(15_300.0, 197.87, 4.88, C64::new(1.0, 0.0)),
        TargetMotion::quadratic(
            15_300.0,
            70.92,
            4.88,
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ),
    ]
}

/// Same radar with a shorter aperture, for tests that do not need N = 2048.
pub(crate) fn short_radar(pulse_count: usize) -> RadarParams {
    RadarParams {
        pulse_count,
        ..table2_radar()
    }
}
