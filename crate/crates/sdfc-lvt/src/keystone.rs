//! Keystone transform: per-bin slow-time rescaling that straightens the
//! range walk of every target at once.
//!
//! In the range-frequency domain a target contributes
//! e^{-j2π(f + f_ref)·τ_d(t)} with τ_d(t) = 2R(t)/c. Substituting
//! t = f_ref·t_a/(f_ref + f) — evaluating each bin's azimuth signal at the
//! scaled times s(f)·t_a with s(f) = f_ref/(f_ref + f) — makes the
//! velocity-induced coupling between f and slow time vanish identically,
//! for all targets, without knowing their velocities. The quadratic
//! (acceleration) term keeps a small residual curvature.
//!
//! The rescaling runs on the exact scale factor through the chirp-z kernel
//! in [`crate::spectral`] (spectral-exact for band-limited azimuth
//! signals); a Kaiser-windowed-sinc interpolator is available as a
//! cross-check. Slow time is pivoted at the aperture center so stretching
//! is symmetric. Beyond-aperture samples follow the periodic spectral
//! extension of the chirp-z evaluation: this keeps a static scene an exact
//! fixed point of the transform and the rescaling unitary per bin, where
//! zero-filling would bleed the stretched wings of low-frequency-reference
//! runs. Bins with |f| ≥ κ·f_ref are zeroed to stay clear of the s(f)
//! singularity at f = −f_ref; for the sub-band product the spectrum is
//! triangular there, so the discarded energy is tiny and is reported per
//! run.

use rayon::prelude::*;

use crate::matrix::{DataMatrix, DomainTag};
use crate::model::center_col;
use crate::spectral::{
    fft_in_place, from_centered_order, ifft_in_place, scaled_resample,
    scaled_resample_windowed_sinc, to_centered_order,
};
use crate::{C64, Error, Result};

/// Which resampling backend performs the slow-time scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolator {
    /// Scaled discrete Fourier evaluation via Bluestein's chirp-z. Default.
    ChirpZ,
    /// 16-tap Kaiser-windowed sinc in the time domain. Cross-check path.
    WindowedSinc,
}

#[derive(Debug, Clone, Copy)]
pub struct KeystoneConfig {
    /// Reference frequency f_ref: Δf_r for the sub-band product, f_c for
    /// conventional processing.
    pub reference_frequency: f64,
    /// Bins with |f| ≥ κ·f_ref are zeroed.
    pub kappa: f64,
    pub interpolator: Interpolator,
}

impl KeystoneConfig {
    pub fn new(reference_frequency: f64) -> Self {
        Self {
            reference_frequency,
            kappa: 0.95,
            interpolator: Interpolator::ChirpZ,
        }
    }
}

/// Per-run bookkeeping of the κ cutoff.
#[derive(Debug, Clone, Copy)]
pub struct KeystoneDiagnostics {
    /// Fraction of input energy in the zeroed |f| ≥ κ·f_ref bins.
    pub discarded_energy_fraction: f64,
}

/// Keystone transform with the default configuration; returns fast-time
/// data with the linear range walk removed.
pub fn keystone_transform(input: &DataMatrix, reference_frequency: f64) -> Result<DataMatrix> {
    keystone_transform_with(input, &KeystoneConfig::new(reference_frequency)).map(|(m, _)| m)
}

/// Keystone transform with explicit configuration and diagnostics.
pub fn keystone_transform_with(
    input: &DataMatrix,
    cfg: &KeystoneConfig,
) -> Result<(DataMatrix, KeystoneDiagnostics)> {
    if cfg.reference_frequency <= 0.0 || cfg.reference_frequency.is_nan() {
        return Err(Error::InvalidParameter(
            "keystone reference frequency must be positive".into(),
        ));
    }
    if !(0.0 < cfg.kappa && cfg.kappa <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa {} outside (0, 1]",
            cfg.kappa
        )));
    }
    let rows = input.rows();
    let cols = input.cols();

    // Bring the data to the range-frequency domain (centered bins).
    let (mut spectrum_cols, freq_start, freq_step, fs) = match input.domain {
        DomainTag::FastTime => {
            let fs = 1.0 / input.col_step;
            let step = fs / cols as f64;
            let start = -(center_col(cols) as f64) * step;
            let mut buf = vec![C64::new(0.0, 0.0); cols];
            let mut columns = vec![vec![C64::new(0.0, 0.0); rows]; cols];
            for n in 0..rows {
                buf.copy_from_slice(input.row(n));
                fft_in_place(&mut buf);
                to_centered_order(&mut buf);
                for (column, v) in columns.iter_mut().zip(&buf) {
                    column[n] = *v;
                }
            }
            (columns, start, step, fs)
        }
        DomainTag::RangeFrequency => {
            let fs = input.col_step * cols as f64;
            let mut columns = vec![vec![C64::new(0.0, 0.0); rows]; cols];
            for n in 0..rows {
                for (column, v) in columns.iter_mut().zip(input.row(n)) {
                    column[n] = *v;
                }
            }
            (columns, input.col_start, input.col_step, fs)
        }
    };

    let total_energy: f64 = spectrum_cols
        .iter()
        .flat_map(|c| c.iter())
        .map(|v| v.norm_sqr())
        .sum();
    let mut discarded = 0.0;

    let reference = cfg.reference_frequency;
    let kappa_limit = cfg.kappa * reference;
    let interpolator = cfg.interpolator;

    // Each range-frequency bin rescales independently. The cutoff guards
    // the s(f) singularity at f = −f_ref, which sits on the negative side
    // only; positive-frequency bins scale harmlessly toward s = 1/2.
    let kept: Vec<(usize, f64)> = (0..cols)
        .filter_map(|j| {
            let f = freq_start + j as f64 * freq_step;
            if f <= -kappa_limit || reference + f <= 1e-9 * reference {
                None
            } else {
                Some((j, reference / (reference + f)))
            }
        })
        .collect();
    let kept_set: Vec<bool> = {
        let mut mask = vec![false; cols];
        for &(j, _) in &kept {
            mask[j] = true;
        }
        mask
    };
    for (j, column) in spectrum_cols.iter_mut().enumerate() {
        if !kept_set[j] {
            discarded += column.iter().map(|v| v.norm_sqr()).sum::<f64>();
            column.fill(C64::new(0.0, 0.0));
        }
    }

    spectrum_cols.par_iter_mut().enumerate().for_each(|(j, column)| {
        if !kept_set[j] {
            return;
        }
        let scale = kept.iter().find(|(k, _)| *k == j).map(|(_, s)| *s).unwrap();
        *column = match interpolator {
            Interpolator::ChirpZ => scaled_resample(column, scale, 1),
            Interpolator::WindowedSinc => scaled_resample_windowed_sinc(column, scale),
        };
    });

    // Back to fast time.
    let fast_step = 1.0 / fs;
    let mut out = input.like_with_domain(DomainTag::FastTime, input.range_gate_start, fast_step);
    let mut buf = vec![C64::new(0.0, 0.0); cols];
    for n in 0..rows {
        for (j, column) in spectrum_cols.iter().enumerate() {
            buf[j] = column[n];
        }
        from_centered_order(&mut buf);
        ifft_in_place(&mut buf);
        out.row_mut(n).copy_from_slice(&buf);
    }

    let diagnostics = KeystoneDiagnostics {
        discarded_energy_fraction: if total_energy > 0.0 {
            discarded / total_energy
        } else {
            0.0
        },
    };
    Ok((out, diagnostics))
}

/// Walk metric: max over pulses of |per-pulse argmax bin − median peak
/// bin|, in range cells.
pub fn residual_walk(matrix: &DataMatrix) -> Result<f64> {
    matrix.expect_domain(DomainTag::FastTime)?;
    if matrix.energy() == 0.0 {
        return Err(Error::UndefinedMetric("residual walk of an all-zero matrix"));
    }
    let mut peaks: Vec<f64> = (0..matrix.rows())
        .map(|n| {
            matrix
                .row(n)
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
                .map(|(i, _)| i as f64)
                .unwrap()
        })
        .collect();
    let mut sorted = peaks.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    peaks.iter_mut().for_each(|p| *p = (*p - median).abs());
    Ok(peaks.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{synthesize_compressed_spectrum, Scene, TargetMotion};
    use crate::rangeproc::{conjugate_product, split_subbands};
    use crate::testing::{short_radar, table1_targets, table2_radar};

    fn product_of(radar: &crate::model::RadarParams, targets: Vec<TargetMotion>) -> (DataMatrix, f64) {
        let scene = Scene::noiseless(targets);
        let spectrum = synthesize_compressed_spectrum(radar, &scene).unwrap();
        let pair = split_subbands(&spectrum, radar).unwrap();
        (conjugate_product(&pair), pair.delta_f)
    }

    #[test]
    fn static_target_passes_through() {
        // A static scene has no time-frequency coupling, so the transform
        // is an identity up to the κ band cutoff: the default κ = 0.95
        // clips a sliver of the triangular spectrum's lower wing (≈ −45 dB
        // of energy); with the cutoff disabled the identity is numerically
        // exact.
        let radar = short_radar(64);
        let (product, delta_f) = product_of(
            &radar,
            vec![TargetMotion::quadratic(15_300.0, 0.0, 0.0, C64::new(1.0, 0.0))],
        );
        let pass_through_db = |cfg: &KeystoneConfig| {
            let (out, _) = keystone_transform_with(&product, cfg).unwrap();
            let err: f64 = out
                .values()
                .iter()
                .zip(product.values())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            10.0 * (err / product.energy()).log10()
        };
        let default_db = pass_through_db(&KeystoneConfig::new(delta_f));
        assert!(default_db < -40.0, "static pass-through {default_db:.1} dB");
        let full_band = KeystoneConfig {
            kappa: 1.0,
            ..KeystoneConfig::new(delta_f)
        };
        let full_db = pass_through_db(&full_band);
        assert!(full_db < -60.0, "κ=1 pass-through {full_db:.1} dB");
    }

    #[test]
    fn fast_target_walk_is_straightened() {
        let radar = table2_radar();
        let (product, delta_f) = product_of(&radar, vec![table1_targets()[0]]);
        // The fast target drifts ≈ 51 cells across the aperture; the metric
        // reports deviation from the median, i.e. about half the extent.
        let before = residual_walk(&product).unwrap();
        assert!(before >= 22.0, "pre-keystone walk {before} cells");
        let out = keystone_transform(&product, delta_f).unwrap();
        let after = residual_walk(&out).unwrap();
        assert!(after <= 2.0, "post-keystone walk {after} cells");
    }

    #[test]
    fn one_transform_fixes_two_targets() {
        // Different velocities and different range cells, one Keystone
        // pass. Walk correction concentrates each target's energy into a
        // few range cells; the wandering cross-terms leave too little
        // energy in any fixed column to matter, so measure concentration
        // rather than per-pulse argmax.
        let radar = table2_radar();
        let t_fast = TargetMotion::quadratic(15_300.0, 197.87, 4.88, C64::new(1.0, 0.0));
        let t_slow = TargetMotion::quadratic(15_500.0, 70.92, 4.88, C64::new(1.0, 0.0));
        // One shared gate, one transform applied to the joint product; the
        // per-target behavior is read off the single-target products that
        // sum (with the cross-terms) to the joint one.
        let both = Scene::noiseless(vec![t_fast, t_slow]);
        let gate = crate::model::default_gate(&radar, &both).unwrap();
        let product_with_gate = |targets: Vec<TargetMotion>| {
            let scene = Scene::noiseless(targets);
            let spectrum =
                crate::model::synthesize_compressed_spectrum_with_gate(&radar, &scene, gate)
                    .unwrap();
            let pair = split_subbands(&spectrum, &radar).unwrap();
            (conjugate_product(&pair), pair.delta_f)
        };
        let (joint, delta_f) = product_with_gate(vec![t_fast, t_slow]);
        let joint_out = keystone_transform(&joint, delta_f).unwrap();
        let t_c = (joint_out.rows() as f64 - 1.0) / 2.0 * joint_out.slow_time_step;
        let window_energy = |m: &DataMatrix, col: usize| -> f64 {
            (0..m.rows())
                .map(|n| {
                    m.row(n)[col - 3..=col + 3]
                        .iter()
                        .map(|v| v.norm_sqr())
                        .sum::<f64>()
                })
                .sum()
        };
        for target in [&t_fast, &t_slow] {
            let (single, _) = product_with_gate(vec![*target]);
            let single_out = keystone_transform(&single, delta_f).unwrap();
            let tau_mid = 2.0 * target.instantaneous_range(t_c).unwrap()
                / radar.propagation_speed;
            let col =
                ((tau_mid - joint_out.range_gate_start) / joint_out.col_step).round() as usize;
            let after = window_energy(&single_out, col);
            let before = window_energy(&single, col);
            // A straightened ramp of W cells concentrates the window's
            // share of energy from ~7/W to ~1, so require half of that.
            let (v0, a0) = target.quadratic_equivalent();
            let aperture = radar.aperture();
            let walk_cells = 2.0 * (v0 * aperture + 0.5 * a0 * aperture * aperture).abs()
                / radar.propagation_speed
                / joint_out.col_step;
            let required = 0.5 * walk_cells / 7.0;
            assert!(
                after > required * before,
                "concentration {:.2} (need {required:.2}) at col {col}",
                after / before
            );
        }
    }

    #[test]
    fn energy_preserved_when_band_is_narrow_against_reference() {
        // |f| ≪ f_ref regime: rescaling is near-unitary.
        let radar = short_radar(64);
        let scene = Scene::noiseless(vec![table1_targets()[0]]);
        let spectrum = synthesize_compressed_spectrum(&radar, &scene).unwrap();
        let (out, diag) =
            keystone_transform_with(&spectrum, &KeystoneConfig::new(radar.carrier_frequency))
                .unwrap();
        assert_eq!(diag.discarded_energy_fraction, 0.0);
        let ratio = out.energy() / spectrum.energy() * spectrum.cols() as f64;
        // Input was range-frequency (unnormalized FFT scale): compare in the
        // same domain instead. Round-trip the output.
        let _ = ratio;
        let in_time_energy = {
            let mut acc = 0.0;
            let mut buf = vec![C64::new(0.0, 0.0); spectrum.cols()];
            for n in 0..spectrum.rows() {
                buf.copy_from_slice(spectrum.row(n));
                from_centered_order(&mut buf);
                ifft_in_place(&mut buf);
                acc += buf.iter().map(|v| v.norm_sqr()).sum::<f64>();
            }
            acc
        };
        let drift = (out.energy() - in_time_energy).abs() / in_time_energy;
        assert!(drift < 5e-3, "energy drift {drift:.4}");
    }

    #[test]
    fn product_energy_retention_is_logged() {
        // At f_ref = Δf_r the stretched wings fall outside the aperture and
        // are zero-filled; the triangular spectrum keeps the loss moderate.
        let radar = short_radar(256);
        let (product, delta_f) = product_of(&radar, vec![table1_targets()[0]]);
        let (out, diag) =
            keystone_transform_with(&product, &KeystoneConfig::new(delta_f)).unwrap();
        assert!(
            diag.discarded_energy_fraction < 3e-3,
            "kappa cutoff discarded {:.2e}",
            diag.discarded_energy_fraction
        );
        let retention = out.energy() / product.energy();
        assert!(
            (0.97..=1.03).contains(&retention),
            "retention {retention:.3}"
        );
    }

    #[test]
    fn chirpz_and_windowed_sinc_agree() {
        // The 16-tap interpolator is only accurate for mild scalings, so
        // compare on a carrier-referenced run where s(f) stays near one.
        let radar = short_radar(128);
        let scene = Scene::noiseless(vec![table1_targets()[1]]);
        let product = synthesize_compressed_spectrum(&radar, &scene).unwrap();
        let delta_f = radar.carrier_frequency;
        let czt = keystone_transform(&product, delta_f).unwrap();
        let cfg = KeystoneConfig {
            interpolator: Interpolator::WindowedSinc,
            ..KeystoneConfig::new(delta_f)
        };
        let (sinc, _) = keystone_transform_with(&product, &cfg).unwrap();
        let err: f64 = czt
            .values()
            .iter()
            .zip(sinc.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let db = 10.0 * (err / czt.energy()).log10();
        // The 16-tap kernel's passband ripple at ~half-Nyquist Doppler sets
        // the floor here, not the chirp-z path.
        assert!(db < -25.0, "interpolator disagreement {db:.1} dB");
    }

    #[test]
    fn transform_is_linear() {
        let radar = short_radar(32);
        let (p1, delta_f) = product_of(&radar, vec![table1_targets()[0]]);
        let (p2, _) = product_of(&radar, vec![table1_targets()[1]]);
        let mut sum = p1.clone();
        for (s, v) in sum.values_mut().iter_mut().zip(p2.values()) {
            *s += v;
        }
        let k1 = keystone_transform(&p1, delta_f).unwrap();
        let k2 = keystone_transform(&p2, delta_f).unwrap();
        let ksum = keystone_transform(&sum, delta_f).unwrap();
        let err: f64 = ksum
            .values()
            .iter()
            .zip(k1.values().iter().zip(k2.values()))
            .map(|(s, (a, b))| (s - (a + b)).norm_sqr())
            .sum();
        assert!(err / ksum.energy() < 1e-20);
    }

    #[test]
    fn residual_walk_edge_cases() {
        let radar = short_radar(16);
        let (product, _) = product_of(
            &radar,
            vec![TargetMotion::quadratic(15_300.0, 0.0, 0.0, C64::new(1.0, 0.0))],
        );
        assert_eq!(residual_walk(&product).unwrap(), 0.0);

        let zeros = DataMatrix::zeros(
            4,
            16,
            DomainTag::FastTime,
            5e-4,
            0.0,
            1.0 / 37.5e6,
            0.0,
        )
        .unwrap();
        assert!(matches!(
            residual_walk(&zeros),
            Err(Error::UndefinedMetric(_))
        ));
    }
}
