//! Command implementations.

use std::path::Path;

use serde::Serialize;

use sdfc_lvt::analysis::{crossterm_locus, measure_snr_sdfc, monte_carlo_rmse, snr_sdfc_closed_form};
use sdfc_lvt::keystone::keystone_transform;
use sdfc_lvt::lvt::{sdfc_lvt_pipeline, EstimateReport};
use sdfc_lvt::model::{default_gate, synthesize_compressed_spectrum_with_gate, synthesize_raw_echo, Gate, Scene};
use sdfc_lvt::rangeproc::{check_walk_constraint, conjugate_product, split_subbands, unsplit_subbands};
use sdfc_lvt::spectral::scaled_resample;
use sdfc_lvt::{C64, DataMatrix, RadarParams};

use crate::config::Config;
use crate::io::{
    load_raw_binary, write_atomic, write_matrix_heatmap, write_plane_heatmap, write_raw_binary,
    CsvWriter, RawHeader,
};
use crate::{CliError, OutputFormat, Result, RunOptions};

fn resolve_gate(config: &Config, radar: &RadarParams, scene: &Scene) -> Result<Gate> {
    match config.gate {
        Some(section) => Gate::from_interval(section.start_s, section.end_s, radar)
            .map_err(|e| CliError::Validation(e.to_string())),
        None => default_gate(radar, scene).map_err(CliError::from),
    }
}

pub fn simulate(config: &Config, out_dir: &Path) -> Result<()> {
    let radar = config.radar();
    let scene = config.scene_model();
    let gate = resolve_gate(config, &radar, &scene)?;
    let raw = synthesize_raw_echo(&radar, &scene, gate)?;

    write_raw_binary(&raw, &out_dir.join("raw_echo.bin"))?;
    let header = RawHeader::for_matrix(&raw, &radar);
    let header_json = serde_json::to_string_pretty(&header)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(&out_dir.join("raw_echo.header.json"), header_json.as_bytes())?;

    let mut truth = CsvWriter::new(
        "target_index,initial_range_m,velocity_m_s,acceleration_m_s2,\
         reflectivity_amplitude,reflectivity_phase_rad",
    );
    for (k, target) in scene.targets.iter().enumerate() {
        let (v, a) = target.quadratic_equivalent();
        truth.row(&[
            k.to_string(),
            target.model.initial_range().to_string(),
            v.to_string(),
            a.to_string(),
            target.reflectivity.norm().to_string(),
            target.reflectivity.arg().to_string(),
        ]);
    }
    truth.finish(&out_dir.join("truth.csv"))?;
    Ok(())
}

#[derive(Serialize)]
struct JsonReport {
    delta_f_hz: f64,
    residual_walk_cells: f64,
    keystone_discarded_energy_fraction: f64,
    noise_floor: f64,
    targets: Vec<JsonTarget>,
}

#[derive(Serialize)]
struct JsonTarget {
    velocity_m_s: f64,
    acceleration_m_s2: f64,
    amplitude: f64,
    range_cell: usize,
    frequency_hz: f64,
    chirp_rate_hz_s: f64,
    reliable: bool,
    constraint_satisfied: bool,
}

fn write_report(
    report: &EstimateReport,
    out_dir: &Path,
    format: OutputFormat,
) -> Result<()> {
    let mut csv = CsvWriter::new(
        "target_index,velocity_m_s,acceleration_m_s2,amplitude,range_cell,\
         frequency_hz,chirp_rate_hz_s,reliable,constraint_satisfied",
    );
    for (k, est) in report.estimates.iter().enumerate() {
        csv.row(&[
            k.to_string(),
            est.velocity.to_string(),
            est.acceleration.to_string(),
            est.amplitude.to_string(),
            est.range_cell.to_string(),
            est.peak.frequency.to_string(),
            est.peak.chirp_rate.to_string(),
            est.reliable.to_string(),
            est.constraint.satisfied.to_string(),
        ]);
    }
    csv.finish(&out_dir.join("estimate_report.csv"))?;

    let mut diag = CsvWriter::new("quantity,value,unit");
    diag.row(&["delta_f".into(), report.delta_f.to_string(), "Hz".into()]);
    diag.row(&[
        "residual_walk".into(),
        report.residual_walk_cells.to_string(),
        "range_cells".into(),
    ]);
    diag.row(&[
        "keystone_discarded_energy".into(),
        report.keystone_discarded_energy.to_string(),
        "fraction".into(),
    ]);
    diag.row(&[
        "noise_floor".into(),
        report.noise_floor.to_string(),
        "plane_magnitude".into(),
    ]);
    diag.finish(&out_dir.join("estimate_diagnostics.csv"))?;

    if format == OutputFormat::Json {
        let json = JsonReport {
            delta_f_hz: report.delta_f,
            residual_walk_cells: report.residual_walk_cells,
            keystone_discarded_energy_fraction: report.keystone_discarded_energy,
            noise_floor: report.noise_floor,
            targets: report
                .estimates
                .iter()
                .map(|est| JsonTarget {
                    velocity_m_s: est.velocity,
                    acceleration_m_s2: est.acceleration,
                    amplitude: est.amplitude,
                    range_cell: est.range_cell,
                    frequency_hz: est.peak.frequency,
                    chirp_rate_hz_s: est.peak.chirp_rate,
                    reliable: est.reliable,
                    constraint_satisfied: est.constraint.satisfied,
                })
                .collect(),
        };
        let text = serde_json::to_string_pretty(&json)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        write_atomic(&out_dir.join("estimate_report.json"), text.as_bytes())?;
    }
    Ok(())
}

pub fn estimate(config: &Config, out_dir: &Path, options: &RunOptions) -> Result<()> {
    let scene = config.scene_model();
    let target_count = scene.targets.len();

    let (input, radar): (DataMatrix, RadarParams) = match (&options.data, &options.data_header) {
        (Some(data), Some(header_path)) => {
            let header = RawHeader::load(header_path)?;
            let radar = header.radar();
            radar
                .validate()
                .map_err(|e| CliError::Validation(e.to_string()))?;
            (load_raw_binary(data, &header)?, radar)
        }
        (None, None) => {
            let radar = config.radar();
            let gate = resolve_gate(config, &radar, &scene)?;
            (
                synthesize_compressed_spectrum_with_gate(&radar, &scene, gate)?,
                radar,
            )
        }
        _ => {
            return Err(CliError::Validation(
                "--data and --data-header must be given together".into(),
            ))
        }
    };

    let output = sdfc_lvt_pipeline(&input, &radar, target_count, &config.estimate_config())?;
    write_report(&output.report, out_dir, options.format)?;
    write_matrix_heatmap(&output.product, &out_dir.join("product_trajectory.pgm"))?;
    write_matrix_heatmap(&output.corrected, &out_dir.join("corrected_trajectory.pgm"))?;
    write_plane_heatmap(&output.plane, &out_dir.join("lvt_plane.pgm"))?;
    Ok(())
}

pub fn snr_curve(config: &Config, out_dir: &Path) -> Result<()> {
    let radar = config.radar();
    let scene = config.scene_model();
    let target = &scene.targets[0];
    let mut csv = CsvWriter::new(
        "snr_in_db,snr_pc_db,snr_sdfc_predicted_db,snr_sdfc_measured_db,stderr_db,trials",
    );
    for &snr_db in &config.montecarlo.snr_in_db_list {
        let snr = 10f64.powf(snr_db / 10.0);
        let point = measure_snr_sdfc(
            &radar,
            target,
            snr,
            config.montecarlo.trials,
            scene.rng_seed,
        )?;
        csv.row(&[
            point.snr_in_db.to_string(),
            point.snr_pc_db.to_string(),
            point.snr_sdfc_predicted_db.to_string(),
            point.snr_sdfc_measured_db.to_string(),
            point.stderr_db.to_string(),
            point.trials.to_string(),
        ]);
    }
    csv.finish(&out_dir.join("snr_curve.csv"))?;
    Ok(())
}

pub fn rmse_curve(config: &Config, out_dir: &Path) -> Result<()> {
    let radar = config.radar();
    let scene = config.scene_model();
    let points = monte_carlo_rmse(
        &radar,
        &scene,
        &config.montecarlo.snr_in_db_list,
        config.montecarlo.trials,
        scene.rng_seed,
        &config.estimate_config(),
    )?;
    let mut csv = CsvWriter::new(
        "snr_in_db,target_index,rmse_v_m_s,rmse_a_m_s2,stderr_v_m_s,stderr_a_m_s2,\
         bound_v_m_s,bound_a_m_s2,trials,failures,flagged",
    );
    for p in points {
        csv.row(&[
            p.snr_in_db.to_string(),
            p.target_index.to_string(),
            p.rmse_v.to_string(),
            p.rmse_a.to_string(),
            p.stderr_v.to_string(),
            p.stderr_a.to_string(),
            p.bound_v.to_string(),
            p.bound_a.to_string(),
            p.trials.to_string(),
            p.failures.to_string(),
            p.flagged.to_string(),
        ]);
    }
    csv.finish(&out_dir.join("rmse_curve.csv"))?;
    Ok(())
}

pub fn crossterm(config: &Config, out_dir: &Path) -> Result<()> {
    let radar = config.radar();
    let scene = config.scene_model();
    if scene.targets.len() < 2 {
        return Err(CliError::Validation(
            "crossterm needs at least two targets in the scene".into(),
        ));
    }
    let noiseless = Scene::noiseless(scene.targets.clone());
    let gate = resolve_gate(config, &radar, &noiseless)?;
    let product_of = |targets: Vec<sdfc_lvt::model::TargetMotion>| -> Result<(DataMatrix, f64)> {
        let scene = Scene::noiseless(targets);
        let spectrum = synthesize_compressed_spectrum_with_gate(&radar, &scene, gate)?;
        let pair = split_subbands(&spectrum, &radar)?;
        Ok((conjugate_product(&pair), pair.delta_f))
    };
    let (full, delta_f) = product_of(noiseless.targets.clone())?;
    let (auto_i, _) = product_of(vec![noiseless.targets[0]])?;
    let (auto_j, _) = product_of(vec![noiseless.targets[1]])?;
    let mut cross = full;
    for (idx, v) in cross.values_mut().iter_mut().enumerate() {
        *v -= auto_i.values()[idx] + auto_j.values()[idx];
    }

    let loci = crossterm_locus(
        &noiseless.targets[0],
        &noiseless.targets[1],
        &radar,
        delta_f,
    )?;
    let mut csv = CsvWriter::new("pulse,centered_slow_time_s,tau_plus_s,tau_minus_s");
    for (n, &u) in loci.times.iter().enumerate() {
        csv.row(&[
            n.to_string(),
            u.to_string(),
            loci.plus[n].to_string(),
            loci.minus[n].to_string(),
        ]);
    }
    csv.finish(&out_dir.join("crossterm_locus.csv"))?;

    let corrected = keystone_transform(&cross, delta_f)?;
    write_matrix_heatmap(&corrected, &out_dir.join("crossterm_difference.pgm"))?;
    Ok(())
}

pub fn selftest(config: &Config, out_dir: &Path, options: &RunOptions) -> Result<()> {
    let radar = config.radar();
    let scene = config.scene_model();
    let mut results = CsvWriter::new("check,value,threshold,unit,pass");
    let mut all_pass = true;
    let mut record = |name: &str, value: f64, threshold: f64, unit: &str, ok: bool| -> bool {
        results.row(&[
            name.into(),
            value.to_string(),
            threshold.to_string(),
            unit.into(),
            ok.to_string(),
        ]);
        ok
    };

    // Scaled-resampler exactness on closed-form tones.
    {
        let len = 256;
        let center = (len as f64 - 1.0) / 2.0;
        let mut worst_db = f64::NEG_INFINITY;
        for &k in &[1.0f64, -17.0, 40.0] {
            for &scale in &[0.6f64, 1.0, 1.7] {
                let tone: Vec<C64> = (0..len)
                    .map(|n| {
                        C64::from_polar(
                            1.0,
                            std::f64::consts::TAU * k * (n as f64 - center) / len as f64,
                        )
                    })
                    .collect();
                let got = scaled_resample(&tone, scale, 1);
                let err: f64 = got
                    .iter()
                    .enumerate()
                    .map(|(n, v)| {
                        let want = C64::from_polar(
                            1.0,
                            std::f64::consts::TAU * k * scale * (n as f64 - center)
                                / len as f64,
                        );
                        (v - want).norm_sqr()
                    })
                    .sum();
                worst_db = worst_db.max(10.0 * (err / len as f64).log10());
            }
        }
        all_pass &= record("resampler_exactness", worst_db, -80.0, "dB", worst_db < -80.0);
    }

    // Sub-band split is an exact partition on this configuration.
    {
        let gate = resolve_gate(config, &radar, &scene)?;
        let spectrum = synthesize_compressed_spectrum_with_gate(&radar, &scene, gate)?;
        let pair = split_subbands(&spectrum, &radar)?;
        let rebuilt = unsplit_subbands(&pair);
        let mut identical = true;
        for (a, b) in spectrum.values().iter().zip(rebuilt.values()) {
            // Out-of-band bins are zero on both sides; in-band must match
            // bit for bit.
            if b.norm_sqr() > 0.0 && (a.re.to_bits() != b.re.to_bits() || a.im.to_bits() != b.im.to_bits()) {
                identical = false;
                break;
            }
        }
        all_pass &= record(
            "subband_partition_bit_identical",
            identical as u8 as f64,
            1.0,
            "bool",
            identical,
        );

        // Walk constraints for every configured target.
        for (k, target) in scene.targets.iter().enumerate() {
            let (v, a) = target.quadratic_equivalent();
            let constraint = check_walk_constraint(&radar, pair.delta_f, v, a);
            all_pass &= record(
                &format!("target_{k}_walk_constraint"),
                constraint.velocity_headroom,
                0.0,
                "m_s_headroom",
                constraint.satisfied,
            );
        }

        // Full estimation against the configured truth.
        let output =
            sdfc_lvt_pipeline(&spectrum, &radar, scene.targets.len(), &config.estimate_config())?;
        write_report(&output.report, out_dir, options.format)?;
        write_plane_heatmap(&output.plane, &out_dir.join("lvt_plane.pgm"))?;
        let lvt_cfg = config.lvt_config();
        let (v_cell, _) = sdfc_lvt::lvt::mapped_cell_sizes(
            radar.pulse_count,
            radar.pulse_repetition_interval,
            &lvt_cfg,
            pair.delta_f,
            radar.propagation_speed,
        );
        // Chirp readout is aperture²-limited; tolerate a quarter of that
        // resolution mapped to acceleration, and two cells in velocity.
        let aperture = radar.aperture();
        let a_tol = radar.propagation_speed / (2.0 * pair.delta_f) * 4.0
            / (aperture * aperture)
            / 4.0;
        let v_tol = 2.0 * v_cell;
        for (k, target) in scene.targets.iter().enumerate() {
            let (v_true, a_true) = target.quadratic_equivalent();
            let (best_dv, best_da) = output
                .report
                .estimates
                .iter()
                .map(|e| ((e.velocity - v_true).abs(), (e.acceleration - a_true).abs()))
                .min_by(|a, b| (a.0 / v_tol + a.1 / a_tol).total_cmp(&(b.0 / v_tol + b.1 / a_tol)))
                .unwrap_or((f64::INFINITY, f64::INFINITY));
            all_pass &= record(
                &format!("target_{k}_velocity_error"),
                best_dv,
                v_tol,
                "m_s",
                best_dv <= v_tol,
            );
            all_pass &= record(
                &format!("target_{k}_acceleration_error"),
                best_da,
                a_tol,
                "m_s2",
                best_da <= a_tol,
            );
        }
    }

    // Product-SNR spot check at SNR_PC = 10 dB.
    {
        let snr_pc = 10.0f64;
        let snr_in = snr_pc / radar.time_bandwidth();
        let probe = sdfc_lvt::model::TargetMotion::quadratic(
            scene.targets[0].model.initial_range(),
            0.0,
            0.0,
            C64::new(1.0, 0.0),
        );
        let point = measure_snr_sdfc(&radar, &probe, snr_in, 200, scene.rng_seed)?;
        let predicted = 10.0 * snr_sdfc_closed_form(snr_pc).log10();
        let err = (point.snr_sdfc_measured_db - predicted).abs();
        all_pass &= record("snr_spot_check_error", err, 1.0, "dB", err <= 1.0);

        let mut csv = CsvWriter::new(
            "snr_in_db,snr_pc_db,snr_sdfc_predicted_db,snr_sdfc_measured_db,stderr_db,trials",
        );
        csv.row(&[
            point.snr_in_db.to_string(),
            point.snr_pc_db.to_string(),
            point.snr_sdfc_predicted_db.to_string(),
            point.snr_sdfc_measured_db.to_string(),
            point.stderr_db.to_string(),
            point.trials.to_string(),
        ]);
        csv.finish(&out_dir.join("snr_curve.csv"))?;
    }

    results.finish(&out_dir.join("selftest.csv"))?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Runtime(
            "selftest found failing checks; see selftest.csv".into(),
        ))
    }
}
