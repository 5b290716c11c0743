//! File formats: raw complex binary with a JSON sidecar header, P5
//! graymap heatmaps, and atomically written CSV tables.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sdfc_lvt::matrix::{DataMatrix, DomainTag};
use sdfc_lvt::model::RadarParams;
use sdfc_lvt::C64;

use crate::{CliError, Result};

/// Sidecar header describing a raw complex binary: row-major pulses ×
/// range samples of interleaved little-endian f32 (real, imaginary).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawHeader {
    pub pulse_count: usize,
    pub range_samples: usize,
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub pulse_width_s: f64,
    pub range_sampling_frequency_hz: f64,
    /// Either the PRI or, when more natural for the source, 1/PRF.
    pub pulse_repetition_interval_s: f64,
    pub range_gate_start_s: f64,
    #[serde(default = "default_speed")]
    pub propagation_speed_m_s: f64,
}

fn default_speed() -> f64 {
    sdfc_lvt::model::SPEED_OF_LIGHT
}

impl RawHeader {
    pub fn for_matrix(matrix: &DataMatrix, radar: &RadarParams) -> Self {
        Self {
            pulse_count: matrix.rows(),
            range_samples: matrix.cols(),
            carrier_frequency_hz: radar.carrier_frequency,
            bandwidth_hz: radar.bandwidth,
            pulse_width_s: radar.pulse_width,
            range_sampling_frequency_hz: radar.range_sampling_frequency,
            pulse_repetition_interval_s: radar.pulse_repetition_interval,
            range_gate_start_s: matrix.range_gate_start,
            propagation_speed_m_s: radar.propagation_speed,
        }
    }

    pub fn radar(&self) -> RadarParams {
        RadarParams {
            carrier_frequency: self.carrier_frequency_hz,
            bandwidth: self.bandwidth_hz,
            pulse_width: self.pulse_width_s,
            range_sampling_frequency: self.range_sampling_frequency_hz,
            pulse_repetition_interval: self.pulse_repetition_interval_s,
            pulse_count: self.pulse_count,
            propagation_speed: self.propagation_speed_m_s,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read header {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("header parse error: {e}")))
    }
}

/// Write fast-time data as interleaved little-endian f32 pairs.
pub fn write_raw_binary(matrix: &DataMatrix, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(matrix.values().len() * 8);
    for v in matrix.values() {
        bytes.extend_from_slice(&(v.re as f32).to_le_bytes());
        bytes.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    write_atomic(path, &bytes)
}

/// Load a raw complex binary under its sidecar header.
pub fn load_raw_binary(path: &Path, header: &RawHeader) -> Result<DataMatrix> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let expected = header.pulse_count * header.range_samples * 8;
    if bytes.len() != expected {
        return Err(CliError::Validation(format!(
            "raw binary length mismatch: expected {} bytes ({} pulses × {} samples × 8), got {}",
            expected,
            header.pulse_count,
            header.range_samples,
            bytes.len()
        )));
    }
    let mut matrix = DataMatrix::zeros(
        header.pulse_count,
        header.range_samples,
        DomainTag::FastTime,
        header.pulse_repetition_interval_s,
        header.range_gate_start_s,
        1.0 / header.range_sampling_frequency_hz,
        header.range_gate_start_s,
    )?;
    for (i, chunk) in bytes.chunks_exact(8).enumerate() {
        let re = f32::from_le_bytes(chunk[0..4].try_into().unwrap()) as f64;
        let im = f32::from_le_bytes(chunk[4..8].try_into().unwrap()) as f64;
        matrix.values_mut()[i] = C64::new(re, im);
    }
    Ok(matrix)
}

/// 8-bit P5 graymap of 20·log10 magnitude, clipped to [peak − 60 dB,
/// peak]; axis calibration goes into header comments.
pub fn write_heatmap_values(
    values: &[f64],
    rows: usize,
    cols: usize,
    axes_comment: &str,
    path: &Path,
) -> Result<()> {
    let peak = values.iter().cloned().fold(0.0f64, f64::max);
    if !peak.is_finite() {
        return Err(CliError::Runtime("heatmap input contains non-finite values".into()));
    }
    let floor_db = -60.0;
    let mut body = Vec::with_capacity(rows * cols);
    for &v in values {
        let level = if peak <= 0.0 || v <= 0.0 {
            0u8
        } else {
            let db = 20.0 * (v / peak).log10();
            let scaled = (db - floor_db) / -floor_db;
            (scaled.clamp(0.0, 1.0) * 255.0).round() as u8
        };
        body.push(level);
    }
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"P5\n");
    for line in axes_comment.lines() {
        bytes.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    bytes.extend_from_slice(b"# intensity: 20*log10(magnitude), clipped to [peak-60 dB, peak]\n");
    bytes.extend_from_slice(format!("{cols} {rows}\n255\n").as_bytes());
    bytes.extend_from_slice(&body);
    write_atomic(path, &bytes)
}

/// Heatmap of a complex matrix (rows = pulses).
pub fn write_matrix_heatmap(matrix: &DataMatrix, path: &Path) -> Result<()> {
    let magnitudes: Vec<f64> = matrix.values().iter().map(|v| v.norm()).collect();
    let comment = format!(
        "rows: pulses, row 0 at slow time 0 s, step {} s\n\
         cols: {}, col 0 at {} , step {}",
        matrix.slow_time_step,
        match matrix.domain {
            DomainTag::FastTime => "fast-time samples (s)",
            DomainTag::RangeFrequency => "range-frequency bins (Hz)",
        },
        matrix.col_start,
        matrix.col_step,
    );
    write_heatmap_values(&magnitudes, matrix.rows(), matrix.cols(), &comment, path)
}

/// Heatmap of a parameter plane (rows = chirp bins, cols = frequency bins).
pub fn write_plane_heatmap(plane: &sdfc_lvt::lvt::LvtPlane, path: &Path) -> Result<()> {
    let comment = format!(
        "rows: chirp-rate bins, row 0 at {} Hz/s, step {} Hz/s\n\
         cols: frequency bins, col 0 at {} Hz, step {} Hz",
        plane.chirp_start, plane.chirp_step, plane.freq_start, plane.freq_step,
    );
    write_heatmap_values(
        plane.magnitudes(),
        plane.chirp_bins,
        plane.freq_bins,
        &comment,
        path,
    )
}

/// CSV writer: header row first, atomic rename on completion.
pub struct CsvWriter {
    lines: Vec<String>,
}

impl CsvWriter {
    pub fn new(header: &str) -> Self {
        Self {
            lines: vec![header.to_string()],
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.lines.push(fields.join(","));
    }

    pub fn finish(self, path: &Path) -> Result<()> {
        let mut text = self.lines.join("\n");
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }
}

/// Write via a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let directory = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = directory.to_path_buf();
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Runtime(format!("bad output path {}", path.display())))?;
    tmp.push(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_of_zeros_is_black() {
        let dir = std::env::temp_dir().join("sdfc_lvt_cli_test_pgm");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("zeros.pgm");
        write_heatmap_values(&[0.0; 12], 3, 4, "test", &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n"));
        let body = &bytes[bytes.len() - 12..];
        assert!(body.iter().all(|&b| b == 0));
    }

    #[test]
    fn heatmap_single_peak_is_single_bright_pixel() {
        let dir = std::env::temp_dir().join("sdfc_lvt_cli_test_pgm");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("peak.pgm");
        let mut values = vec![0.0; 25];
        values[12] = 3.0;
        write_heatmap_values(&values, 5, 5, "test", &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let body = &bytes[bytes.len() - 25..];
        assert_eq!(body[12], 255);
        assert_eq!(body.iter().filter(|&&b| b > 0).count(), 1);
    }
}
