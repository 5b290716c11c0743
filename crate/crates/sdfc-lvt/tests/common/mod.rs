//! Shared fixtures and reporting for the acceptance suite.

use num_complex::Complex64 as C64;
use sdfc_lvt::model::{RadarParams, TargetMotion};

/// L-band demo radar: 1 GHz carrier, 15 MHz bandwidth, 4 µs pulse,
/// 37.5 MHz sampling, 0.5 ms PRI, 2048 pulses, c pinned to 3×10⁸ m/s so
/// the round ambiguity numbers (150 m/s on the carrier, 20 km/s on the
/// sub-band product) are exact.
pub fn demo_radar(pulse_count: usize) -> RadarParams {
    RadarParams {
        carrier_frequency: 1.0e9,
        bandwidth: 15.0e6,
        pulse_width: 4.0e-6,
        range_sampling_frequency: 37.5e6,
        pulse_repetition_interval: 5.0e-4,
        pulse_count,
        propagation_speed: 3.0e8,
    }
}

/// The two demo targets: a fast one beyond the carrier's 150 m/s
/// ambiguity limit and a slow one at half the power.
pub fn demo_targets() -> [TargetMotion; 2] {
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

/// Print one pass/fail line for a criterion clause and assert it.
pub fn check(criterion: &str, ok: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance {criterion} failed: {detail}");
}
