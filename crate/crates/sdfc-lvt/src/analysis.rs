//! Closed-form performance companions and Monte Carlo harnesses.
//!
//! The conjugate product is a nonlinearity, so its output SNR obeys
//! SNR = SNR_PC²/(4 + 4·SNR_PC): a 6 dB loss at high SNR and a collapse
//! below the threshold SNR_PC = 1. This module carries that closed form,
//! the post-transform SNR bound, the printed variance bounds for the
//! velocity/acceleration estimates (kept exactly as regression formulas),
//! the cross-term trajectory loci, a brute-force trajectory grid-search
//! oracle used to cross-check the search-free estimator, and the Monte
//! Carlo harnesses that measure all of the above.
//!
//! One modeling note, verified by `sample_product_moments`: the printed moment
//! table behind the product-SNR derivation treats the two sub-band noises
//! as a single shared draw of power V²/2 (E[n₂n₁*] = V²/2, E|n₁n₂|² =
//! V⁴/2). Physically the two half-bands carry independent noise, which
//! zeroes those cross moments — yet both models give the same product
//! variance σ₀²BτV²/4 + V⁴/4, so the SNR curve is insensitive to the
//! distinction. The moment harness reproduces the printed table under the
//! shared-noise model and the variance under both.

use rayon::prelude::*;

use crate::lvt::{
    mapped_cell_sizes, sdfc_lvt_estimate, EstimateConfig, LvtConfig,
};
use crate::matrix::{DataMatrix, DomainTag};
use crate::model::{
    inject_spectrum_noise, synthesize_compressed_spectrum, RadarParams, Scene, TargetMotion,
};
use crate::noise::NoiseStream;
use crate::rangeproc::{conjugate_product, split_subbands};
use crate::{C64, Error, Result};

/// Product-output SNR as a function of the post-compression SNR (linear):
/// SNR_PC²/(4 + 4·SNR_PC).
pub fn snr_sdfc_closed_form(snr_pc: f64) -> f64 {
    snr_pc * snr_pc / (4.0 + 4.0 * snr_pc)
}

/// Lower bound on the SNR after the transform (linear in, linear out):
/// N²(Bτ)⁴s⁴ / (8N(Bτ)³s³ + (8N+32)(Bτ)²s² + 64Bτs + 32).
pub fn snr_lvt_bound(n: usize, time_bandwidth: f64, snr_in: f64) -> f64 {
    let nf = n as f64;
    let bt = time_bandwidth;
    let s = snr_in;
    let numerator = nf * nf * bt.powi(4) * s.powi(4);
    let denominator = 8.0 * nf * bt.powi(3) * s.powi(3)
        + (8.0 * nf + 32.0) * bt * bt * s * s
        + 64.0 * bt * s
        + 32.0;
    numerator / denominator
}

/// Printed upper bounds on the velocity and acceleration estimate
/// variances, (σ_v², σ_a²) in (m/s)² and (m/s²)². Kept exactly as printed
/// (h enters only the acceleration bound); they serve as regression
/// formulas rather than derived truths.
#[allow(clippy::too_many_arguments)]
pub fn variance_bounds(
    n: usize,
    pri: f64,
    delta_f: f64,
    q: usize,
    time_bandwidth: f64,
    snr_in: f64,
    h: f64,
    c: f64,
) -> (f64, f64) {
    let _ = pri;
    let nf = n as f64;
    let qf = q as f64;
    let bt = time_bandwidth;
    let s = snr_in;
    let pi_sq = std::f64::consts::PI * std::f64::consts::PI;
    let common = (1.0 + bt * s) / (bt * bt * s * s);
    let sigma_v2 = c * c * (147.0 * nf.powi(3) + 36.0 * qf * qf * nf * nf) * common
        / (pi_sq * delta_f * delta_f * (98.0 * nf.powi(4) + 72.0 * qf.powi(4)));
    let sigma_a2 =
        588.0 * c * c * h * h * common / (2.0 * pi_sq * delta_f * delta_f * nf);
    (sigma_v2, sigma_a2)
}

/// One measured point of the product-SNR curve.
#[derive(Debug, Clone, Copy)]
pub struct SnrCurvePoint {
    pub snr_in_db: f64,
    pub snr_pc_db: f64,
    pub snr_sdfc_predicted_db: f64,
    pub snr_sdfc_measured_db: f64,
    pub stderr_db: f64,
    pub trials: usize,
}

/// Monte Carlo measurement of the product-output SNR at the per-pulse
/// peak delay: |signal-only product|² over the across-trial variance of
/// the noisy product, averaged over pulses. V² = 0 reports the infinite
/// sentinel.
pub fn measure_snr_sdfc(
    radar: &RadarParams,
    target: &TargetMotion,
    snr_in: f64,
    trials: usize,
    seed: u64,
) -> Result<SnrCurvePoint> {
    if trials < 100 {
        return Err(Error::InvalidParameter(format!(
            "need ≥ 100 trials, got {trials}"
        )));
    }
    let sigma_sq = target.reflectivity.norm_sqr();
    let snr_pc = radar.time_bandwidth() * snr_in;
    let predicted = snr_sdfc_closed_form(snr_pc);

    let scene = Scene::noiseless(vec![*target]);
    let clean_spectrum = synthesize_compressed_spectrum(radar, &scene)?;
    let pair = split_subbands(&clean_spectrum, radar)?;
    let clean_product = conjugate_product(&pair);
    let rows = clean_product.rows();
    let peak_bins: Vec<usize> = (0..rows)
        .map(|n| {
            clean_product
                .row(n)
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
                .map(|(i, _)| i)
                .unwrap()
        })
        .collect();
    let signal: Vec<C64> = (0..rows)
        .map(|n| clean_product.get(n, peak_bins[n]))
        .collect();
    let signal_power: f64 =
        signal.iter().map(|s| s.norm_sqr()).sum::<f64>() / rows as f64;

    if snr_in <= 0.0 {
        return Err(Error::InvalidParameter("snr_in must be positive".into()));
    }
    // Infinite SNR ⇔ V² = 0: zero variance, reported as the infinite
    // sentinel rather than a division.
    let noise_variance = if snr_in.is_finite() { sigma_sq / snr_in } else { 0.0 };
    if !noise_variance.is_normal() {
        return Ok(SnrCurvePoint {
            snr_in_db: 10.0 * snr_in.log10(),
            snr_pc_db: 10.0 * snr_pc.log10(),
            snr_sdfc_predicted_db: 10.0 * predicted.log10(),
            snr_sdfc_measured_db: f64::INFINITY,
            stderr_db: 0.0,
            trials,
        });
    }

    // Per trial: fresh in-band noise on the same clean spectrum, then the
    // same split/product path, sampled at the fixed peak bins.
    let samples: Vec<Vec<C64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut noisy = clean_spectrum.clone();
            inject_spectrum_noise(&mut noisy, radar, noise_variance, seed, trial as u64 + 1)
                .expect("spectrum domain");
            let pair = split_subbands(&noisy, radar).expect("support checked");
            let product = conjugate_product(&pair);
            (0..rows).map(|n| product.get(n, peak_bins[n])).collect()
        })
        .collect();

    // Across-trial variance per pulse, averaged over pulses; batched for a
    // standard error.
    let batches = 10usize;
    let per_batch = trials / batches;
    let mut batch_snr_db = Vec::with_capacity(batches);
    for b in 0..batches {
        let slice = &samples[b * per_batch..(b + 1) * per_batch];
        let mut var_acc = 0.0;
        for n in 0..rows {
            let mean: C64 = slice.iter().map(|t| t[n]).sum::<C64>() / per_batch as f64;
            let var: f64 = slice
                .iter()
                .map(|t| (t[n] - mean).norm_sqr())
                .sum::<f64>()
                / (per_batch - 1) as f64;
            var_acc += var;
        }
        let var_mean = var_acc / rows as f64;
        batch_snr_db.push(10.0 * (signal_power / var_mean).log10());
    }
    let mean_db: f64 = batch_snr_db.iter().sum::<f64>() / batches as f64;
    let var_db: f64 = batch_snr_db
        .iter()
        .map(|x| (x - mean_db) * (x - mean_db))
        .sum::<f64>()
        / (batches - 1) as f64;
    let stderr_db = (var_db / batches as f64).sqrt();

    Ok(SnrCurvePoint {
        snr_in_db: 10.0 * snr_in.log10(),
        snr_pc_db: 10.0 * snr_pc.log10(),
        snr_sdfc_predicted_db: 10.0 * predicted.log10(),
        snr_sdfc_measured_db: mean_db,
        stderr_db,
        trials,
    })
}

/// Measured vs printed second-order moments of the noisy product at the
/// peak (the quantities behind the closed-form variance).
#[derive(Debug, Clone)]
pub struct MomentReport {
    /// (label, measured, printed, standard error) per moment; complex
    /// moments are compared on their real parts after derotating the
    /// carrier phase.
    pub moments: Vec<(&'static str, f64, f64, f64)>,
    pub variance_measured: f64,
    pub variance_printed: f64,
    pub mean_offset_measured: f64,
    /// V²/2 under the shared-noise model, 0 under independent noise.
    pub mean_offset_printed: f64,
}

/// Sample the moment table of the product statistic at the peak.
///
/// `shared_noise = true` draws one noise for both sub-band channels (the
/// model the printed table assumes); `false` draws independent noises per
/// channel (the physical disjoint-band model). Each channel noise has
/// power V²/2.
pub fn sample_product_moments(
    sigma_sq: f64,
    time_bandwidth: f64,
    noise_variance: f64,
    trials: usize,
    seed: u64,
    shared_noise: bool,
) -> MomentReport {
    let amp = (sigma_sq * time_bandwidth).sqrt() / 2.0; // |s₁| = |s₂| = σ√(Bτ)/2
    let theta = 1.9; // arbitrary carrier phase −4πΔf_r·R/c
    let s1 = C64::from_polar(amp, 0.37);
    let s2 = s1 * C64::from_polar(1.0, -theta);
    let peak = sigma_sq * time_bandwidth / 4.0; // |s₂·s₁*|
    let channel_var = noise_variance / 2.0;

    let mut stream = NoiseStream::new(seed, 0);
    let mut acc = MomentAccumulator::default();
    for _ in 0..trials {
        let n1 = stream.complex_gaussian(channel_var);
        let n2 = if shared_noise {
            n1
        } else {
            stream.complex_gaussian(channel_var)
        };
        acc.push(s1, s2, n1, n2, theta);
    }
    acc.report(
        peak,
        sigma_sq,
        time_bandwidth,
        noise_variance,
        shared_noise,
        trials,
    )
}

#[derive(Default)]
struct MomentAccumulator {
    m2_s2n1: Welford,
    m3_cross: Welford,
    m5_s1n2: Welford,
    m6_n1n2: Welford,
    product: Vec<C64>,
}

#[derive(Default)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn stderr(&self) -> f64 {
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

impl MomentAccumulator {
    fn push(&mut self, s1: C64, s2: C64, n1: C64, n2: C64, theta: f64) {
        // E[s₂s₂*n₁*n₁], E[s₂s₁*n₂*n₁]·e^{jθ}, E[s₁s₁*n₂*n₂], E[n₁*n₂n₂*n₁]
        self.m2_s2n1.push(s2.norm_sqr() * n1.norm_sqr());
        let cross = s2 * s1.conj() * n2.conj() * n1 * C64::from_polar(1.0, theta);
        self.m3_cross.push(cross.re);
        self.m5_s1n2.push(s1.norm_sqr() * n2.norm_sqr());
        self.m6_n1n2.push(n1.norm_sqr() * n2.norm_sqr());
        self.product.push((s2 + n2) * (s1 + n1).conj());
    }

    fn report(
        &self,
        peak: f64,
        sigma_sq: f64,
        time_bandwidth: f64,
        noise_variance: f64,
        shared_noise: bool,
        trials: usize,
    ) -> MomentReport {
        let v2 = noise_variance;
        let bt = time_bandwidth;
        let sig_bt = sigma_sq * bt;
        let cross_expected = if shared_noise { sig_bt * v2 / 8.0 } else { 0.0 };
        let quad_expected = if shared_noise {
            v2 * v2 / 2.0
        } else {
            v2 * v2 / 4.0
        };
        let moments = vec![
            (
                "E[s2 s2* s1* s1]",
                peak * peak,
                (sig_bt / 4.0) * (sig_bt / 4.0),
                0.0,
            ),
            (
                "E[s2 s2* n1* n1]",
                self.m2_s2n1.mean,
                sig_bt * v2 / 8.0,
                self.m2_s2n1.stderr(),
            ),
            (
                "E[s2 s1* n2* n1]",
                self.m3_cross.mean,
                cross_expected,
                self.m3_cross.stderr(),
            ),
            (
                "E[s1 s2* n1* n2]",
                self.m3_cross.mean,
                cross_expected,
                self.m3_cross.stderr(),
            ),
            (
                "E[s1 s1* n2* n2]",
                self.m5_s1n2.mean,
                sig_bt * v2 / 8.0,
                self.m5_s1n2.stderr(),
            ),
            (
                "E[n1* n2 n2* n1]",
                self.m6_n1n2.mean,
                quad_expected,
                self.m6_n1n2.stderr(),
            ),
        ];

        let mean: C64 = self.product.iter().sum::<C64>() / trials as f64;
        let variance = self
            .product
            .iter()
            .map(|z| (z - mean).norm_sqr())
            .sum::<f64>()
            / (trials - 1) as f64;
        let signal_mean = C64::from_polar(peak, self.product_phase());
        MomentReport {
            moments,
            variance_measured: variance,
            variance_printed: sig_bt * v2 / 4.0 + v2 * v2 / 4.0,
            mean_offset_measured: (mean - signal_mean).re,
            mean_offset_printed: if shared_noise { v2 / 2.0 } else { 0.0 },
        }
    }

    fn product_phase(&self) -> f64 {
        -1.9
    }
}

/// The two cross-term envelope trajectories after walk correction,
/// sampled on the centered slow-time clock u_n = (n − (N−1)/2)·T that the
/// Keystone output uses (velocities are referred to the aperture center,
/// which reduces to the printed form for equal accelerations).
#[derive(Debug, Clone)]
pub struct CrosstermLoci {
    /// Centered slow time per pulse, s.
    pub times: Vec<f64>,
    /// τ₊ branch, absolute fast time, s.
    pub plus: Vec<f64>,
    /// τ₋ branch, absolute fast time, s.
    pub minus: Vec<f64>,
}

/// Evaluate the cross-term loci of a target pair: envelope centers at
/// [R_i + R_j + ½(a_i+a_j)u²]/c ± (f_c1+f_c2)·[(v_i−v_j)u + (a_i−a_j)u²]/(c·Δf_r).
/// Identical targets collapse both branches onto the auto-term locus.
pub fn crossterm_locus(
    target_i: &TargetMotion,
    target_j: &TargetMotion,
    radar: &RadarParams,
    delta_f: f64,
) -> Result<CrosstermLoci> {
    let n = radar.pulse_count;
    let pri = radar.pulse_repetition_interval;
    let c = radar.propagation_speed;
    let t_c = (n as f64 - 1.0) / 2.0 * pri;
    let (v_i, a_i) = target_i.quadratic_equivalent();
    let (v_j, a_j) = target_j.quadratic_equivalent();
    let r_i = target_i.instantaneous_range(t_c)?;
    let r_j = target_j.instantaneous_range(t_c)?;
    // Center-referenced velocities.
    let vi_c = v_i + a_i * t_c;
    let vj_c = v_j + a_j * t_c;
    let f_c1 = radar.carrier_frequency - delta_f / 2.0;
    let f_c2 = radar.carrier_frequency + delta_f / 2.0;
    let sum_f = f_c1 + f_c2;

    let mut times = Vec::with_capacity(n);
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for i in 0..n {
        let u = (i as f64 - (n as f64 - 1.0) / 2.0) * pri;
        let base = (r_i + r_j + 0.5 * (a_i + a_j) * u * u) / c;
        let skew = sum_f * ((vi_c - vj_c) * u + (a_i - a_j) * u * u) / (c * delta_f);
        times.push(u);
        plus.push(base + skew);
        minus.push(base - skew);
    }
    Ok(CrosstermLoci { times, plus, minus })
}

/// Outcome of comparing a measured cross-term against the printed loci.
#[derive(Debug, Clone, Copy)]
pub struct LociAgreement {
    /// Branch measurements attempted (pulses × branches after filtering).
    pub checked: usize,
    /// Measurements within one range cell of the locus.
    pub hits: usize,
    /// Median |measured − predicted| over the checked set, cells.
    pub median_error_cells: f64,
}

/// Measure how well an isolated cross-term signal follows its loci after
/// walk correction.
///
/// The printed loci come from a first-order series in f/Δf_r, so the
/// signal is band-limited to |f| ≤ `band_fraction`·Δf_r before correction
/// and the comparison keeps only pulses where that series is meaningful:
/// branch skew under 90 cells and wrapped branch separation of at least
/// two envelope lobes. Within that regime each branch center (magnitude
/// centroid over one lobe) is compared against the locus per pulse.
pub fn measure_crossterm_agreement(
    cross: &DataMatrix,
    loci: &CrosstermLoci,
    delta_f: f64,
    band_fraction: f64,
) -> Result<LociAgreement> {
    cross.expect_domain(DomainTag::FastTime)?;
    let mut limited = cross.clone();
    let cols = limited.cols();
    let fs = 1.0 / limited.col_step;
    let step = fs / cols as f64;
    let center = cols / 2;
    let mut buf = vec![C64::new(0.0, 0.0); cols];
    for n in 0..limited.rows() {
        buf.copy_from_slice(limited.row(n));
        crate::spectral::fft_in_place(&mut buf);
        crate::spectral::to_centered_order(&mut buf);
        for (j, v) in buf.iter_mut().enumerate() {
            let f = (j as f64 - center as f64) * step;
            if f.abs() > band_fraction * delta_f {
                *v = C64::new(0.0, 0.0);
            }
        }
        crate::spectral::from_centered_order(&mut buf);
        crate::spectral::ifft_in_place(&mut buf);
        limited.row_mut(n).copy_from_slice(&buf);
    }

    let corrected = crate::keystone::keystone_transform(&limited, delta_f)?;
    Ok(crossterm_loci_agreement(
        &corrected,
        loci,
        delta_f,
        band_fraction,
    ))
}

pub(crate) fn crossterm_loci_agreement(
    corrected: &DataMatrix,
    loci: &CrosstermLoci,
    delta_f: f64,
    band_fraction: f64,
) -> LociAgreement {
    let fs = 1.0 / corrected.col_step;
    let cols = corrected.cols() as f64;
    let wrap =
        |tau: f64| -> f64 { ((tau - corrected.range_gate_start) * fs).rem_euclid(cols) };
    let half_lobe = (fs / (2.0 * band_fraction * delta_f)).round() as isize;
    let mut checked = 0;
    let mut hits = 0;
    let mut errors: Vec<f64> = Vec::new();
    for n in 0..corrected.rows() {
        let skew_cells = 0.5 * (loci.plus[n] - loci.minus[n]).abs() * fs;
        if skew_cells > 90.0 {
            continue;
        }
        let p_plus = wrap(loci.plus[n]);
        let p_minus = wrap(loci.minus[n]);
        let raw_gap = (p_plus - p_minus).abs();
        let sep = raw_gap.min(cols - raw_gap);
        if sep < 2.0 * half_lobe as f64 {
            continue;
        }
        let row = corrected.row(n);
        for predicted in [p_plus, p_minus] {
            checked += 1;
            let anchor = predicted.round() as isize;
            let mut weight = 0.0;
            let mut moment = 0.0;
            for off in -half_lobe..=half_lobe {
                let idx = (anchor + off).rem_euclid(cols as isize) as usize;
                let w = row[idx].norm_sqr();
                weight += w;
                moment += w * off as f64;
            }
            let refined = anchor as f64 + moment / weight.max(1e-300);
            let err = (refined - predicted)
                .abs()
                .min(cols - (refined - predicted).abs());
            errors.push(err);
            if err <= 1.0 {
                hits += 1;
            }
        }
    }
    errors.sort_by(f64::total_cmp);
    let median_error_cells = if errors.is_empty() {
        f64::NAN
    } else {
        errors[errors.len() / 2]
    };
    LociAgreement {
        checked,
        hits,
        median_error_cells,
    }
}

/// Result of the trajectory grid search.
#[derive(Debug, Clone)]
pub struct OracleSearch {
    pub velocity: f64,
    pub acceleration: f64,
    /// |coherent sum| per hypothesis, row-major over (v_grid, a_grid).
    pub scores: Vec<f64>,
    pub v_grid: Vec<f64>,
    pub a_grid: Vec<f64>,
    /// Peak score; N·|σ|²Bτ/4 for an on-grid noise-free target.
    pub peak_score: f64,
    /// False when the best score does not dominate the score floor.
    pub reliable: bool,
}

/// Brute-force independent estimator on the conjugate product: for every
/// (v, a) hypothesis, demodulate e^{+j4πΔf_r(v·t + ½a·t²)/c} and integrate
/// the product along the hypothesized delay trajectory
/// 2(R̂₀ − v·t − ½a·t²)/c, with R̂₀ taken from the strongest range cell.
/// The search-free pipeline must agree with the argmax of this search.
pub fn oracle_grid_search(
    product: &DataMatrix,
    radar: &RadarParams,
    delta_f: f64,
    v_grid: &[f64],
    a_grid: &[f64],
) -> Result<OracleSearch> {
    product.expect_domain(DomainTag::FastTime)?;
    if v_grid.len() < 2 || a_grid.len() < 2 {
        return Err(Error::InvalidParameter(
            "hypothesis grids need at least two points per axis".into(),
        ));
    }
    let rows = product.rows();
    let cols = product.cols();
    let c = radar.propagation_speed;
    let fs = 1.0 / product.col_step;

    // R̂₀ from the strongest range cell at the first pulse block.
    let mut column_energy = vec![0.0f64; cols];
    for n in 0..rows {
        for (j, v) in product.row(n).iter().enumerate() {
            column_energy[j] += v.norm_sqr();
        }
    }
    // Anchor range at mid-aperture. A walking target spreads its energy
    // over a flat-topped band of columns whose argmax wanders with the
    // ripple, but whose energy centroid sits at the mid-aperture position
    // (the dwell is symmetric in slow time), so the anchor is the
    // centroid of the contiguous region around the strongest column.
    let best_col = column_energy
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j)
        .unwrap();
    let cutoff = 0.25 * column_energy[best_col];
    let mut lo = best_col;
    while lo > 0 && column_energy[lo - 1] >= cutoff {
        lo -= 1;
    }
    let mut hi = best_col;
    while hi + 1 < cols && column_energy[hi + 1] >= cutoff {
        hi += 1;
    }
    let (mut weight, mut moment) = (0.0f64, 0.0f64);
    for (j, &energy) in column_energy.iter().enumerate().take(hi + 1).skip(lo) {
        weight += energy;
        moment += energy * j as f64;
    }
    let anchor_col = moment / weight.max(f64::MIN_POSITIVE);
    let r_center_hat =
        0.5 * c * (product.col_start + anchor_col * product.col_step);
    let t_center = (rows as f64 - 1.0) / 2.0 * product.slow_time_step;

    let evaluate = |v: f64, a: f64| -> (f64, f64, usize) {
        let v_center = v + a * t_center;
        let mut acc = C64::new(0.0, 0.0);
        let mut power = 0.0;
        let mut used = 0usize;
        for n in 0..rows {
            let u = n as f64 * product.slow_time_step - t_center;
            let displacement = v_center * u + 0.5 * a * u * u;
            let tau = 2.0 * (r_center_hat - displacement) / c;
            let pos = (tau - product.range_gate_start) * fs;
            if pos < 0.0 || pos > (cols - 2) as f64 {
                continue;
            }
            let base = pos.floor() as usize;
            let frac = pos - base as f64;
            let sample =
                product.get(n, base) * (1.0 - frac) + product.get(n, base + 1) * frac;
            let demod = C64::from_polar(
                1.0,
                -4.0 * std::f64::consts::PI * delta_f * displacement / c,
            );
            acc += sample * demod;
            power += sample.norm_sqr();
            used += 1;
        }
        (acc.norm(), power, used)
    };
    let scores: Vec<f64> = v_grid
        .par_iter()
        .flat_map_iter(|&v| {
            a_grid.iter().map(move |&a| (v, a)).collect::<Vec<_>>()
        })
        .map(|(v, a)| evaluate(v, a).0)
        .collect();

    let (best_idx, &peak_score) = scores
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let vi = best_idx / a_grid.len();
    let ai = best_idx % a_grid.len();
    // Coherence at the best hypothesis: |Σz|²/(N·Σ|z|²) is ≈ 1 for a real
    // trajectory and ≈ 1/N for incoherent residue, independent of scale.
    let (best_sum, best_power, used) =
        evaluate(v_grid[best_idx / a_grid.len()], a_grid[best_idx % a_grid.len()]);
    let coherence = if best_power > 0.0 && used > 0 {
        best_sum * best_sum / (best_power * used as f64)
    } else {
        0.0
    };
    let reliable = coherence > 0.1;
    // A boundary argmax means the grid failed to bracket the peak — but an
    // unreliable (signal-free) surface has no peak to bracket.
    if reliable {
        if vi == 0 || vi == v_grid.len() - 1 {
            return Err(Error::GridCoverage { axis: "velocity" });
        }
        if ai == 0 || ai == a_grid.len() - 1 {
            return Err(Error::GridCoverage {
                axis: "acceleration",
            });
        }
    }
    Ok(OracleSearch {
        velocity: v_grid[vi],
        acceleration: a_grid[ai],
        scores,
        v_grid: v_grid.to_vec(),
        a_grid: a_grid.to_vec(),
        peak_score,
        reliable,
    })
}

/// One (SNR, target) point of the estimator's error curve.
#[derive(Debug, Clone, Copy)]
pub struct RmsePoint {
    pub snr_in_db: f64,
    pub target_index: usize,
    pub rmse_v: f64,
    pub rmse_a: f64,
    pub stderr_v: f64,
    pub stderr_a: f64,
    /// Printed variance bounds at this target's own input SNR, as RMS.
    pub bound_v: f64,
    pub bound_a: f64,
    pub trials: usize,
    /// Trials whose estimate failed to associate with this truth.
    pub failures: usize,
    /// Set when the association failure rate exceeded 50%.
    pub flagged: bool,
}

/// Monte Carlo RMSE of the full pipeline versus input SNR.
///
/// Per SNR point: independent noisy realizations of the scene (stream =
/// trial index under `seed`), full estimation, greedy amplitude-ordered
/// association of estimates to truths within a 3-cell gate in normalized
/// (v/δv, a/δa) space, RMSE over the successful associations.
pub fn monte_carlo_rmse(
    radar: &RadarParams,
    scene: &Scene,
    snr_db_list: &[f64],
    trials: usize,
    seed: u64,
    cfg: &EstimateConfig,
) -> Result<Vec<RmsePoint>> {
    if trials < 100 {
        return Err(Error::InvalidParameter(format!(
            "need ≥ 100 trials, got {trials}"
        )));
    }
    if snr_db_list.is_empty() {
        return Err(Error::InvalidParameter("empty SNR list".into()));
    }
    scene.validate()?;
    let k = scene.targets.len();
    let truths: Vec<(f64, f64)> = scene
        .targets
        .iter()
        .map(|t| t.quadratic_equivalent())
        .collect();
    let reference_power = scene.targets[0].reflectivity.norm_sqr();
    let lvt_cfg = cfg.lvt.unwrap_or_else(|| {
        LvtConfig::for_sequence(radar.pulse_count, radar.pulse_repetition_interval)
    });
    let q = lvt_cfg.delay_sample_count;
    let h = lvt_cfg.scaling_factor;

    // Association gate in plane cells mapped to motion units.
    let delta_f = radar.bandwidth / 2.0;
    let (v_cell, a_cell) = mapped_cell_sizes(
        radar.pulse_count,
        radar.pulse_repetition_interval,
        &lvt_cfg,
        delta_f,
        radar.propagation_speed,
    );
    let gate = 3.0;

    let mut points = Vec::with_capacity(snr_db_list.len() * k);
    for (snr_idx, &snr_db) in snr_db_list.iter().enumerate() {
        let snr = 10f64.powf(snr_db / 10.0);
        let noise_variance = reference_power / snr;

        let estimates: Vec<Vec<(f64, f64, f64)>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut trial_scene = scene.clone();
                trial_scene.noise_variance = noise_variance;
                trial_scene.rng_seed = seed;
                trial_scene.noise_stream = (snr_idx * trials + trial) as u64 + 1;
                let spectrum = synthesize_compressed_spectrum(radar, &trial_scene)
                    .expect("scene validated");
                let report = sdfc_lvt_estimate(&spectrum, radar, k, cfg)
                    .expect("pipeline on valid scene");
                report
                    .estimates
                    .iter()
                    .map(|e| (e.velocity, e.acceleration, e.amplitude))
                    .collect()
            })
            .collect();

        // Greedy association by amplitude, nearest truth inside the gate.
        let mut sq_v: Vec<Vec<f64>> = vec![Vec::new(); k];
        let mut sq_a: Vec<Vec<f64>> = vec![Vec::new(); k];
        let mut failures = vec![0usize; k];
        for trial_estimates in &estimates {
            let mut order: Vec<usize> = (0..trial_estimates.len()).collect();
            order.sort_by(|&a, &b| {
                trial_estimates[b].2.total_cmp(&trial_estimates[a].2)
            });
            let mut taken = vec![false; k];
            let mut matched = vec![false; k];
            for &e_idx in &order {
                let (v, a, _) = trial_estimates[e_idx];
                let mut best: Option<(usize, f64)> = None;
                for (t_idx, &(tv, ta)) in truths.iter().enumerate() {
                    if taken[t_idx] {
                        continue;
                    }
                    let d = ((v - tv) / v_cell)
                        .abs()
                        .max(((a - ta) / a_cell).abs());
                    if d <= gate && best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((t_idx, d));
                    }
                }
                if let Some((t_idx, _)) = best {
                    taken[t_idx] = true;
                    matched[t_idx] = true;
                    let (tv, ta) = truths[t_idx];
                    sq_v[t_idx].push((v - tv) * (v - tv));
                    sq_a[t_idx].push((a - ta) * (a - ta));
                }
            }
            for t_idx in 0..k {
                if !matched[t_idx] {
                    failures[t_idx] += 1;
                }
            }
        }

        for t_idx in 0..k {
            let target_snr = scene.targets[t_idx].reflectivity.norm_sqr() / noise_variance;
            let (bv2, ba2) = variance_bounds(
                radar.pulse_count,
                radar.pulse_repetition_interval,
                delta_f,
                q,
                radar.time_bandwidth(),
                target_snr,
                h,
                radar.propagation_speed,
            );
            let (rmse_v, stderr_v) = rmse_and_stderr(&sq_v[t_idx]);
            let (rmse_a, stderr_a) = rmse_and_stderr(&sq_a[t_idx]);
            points.push(RmsePoint {
                snr_in_db: snr_db,
                target_index: t_idx,
                rmse_v,
                rmse_a,
                stderr_v,
                stderr_a,
                bound_v: bv2.sqrt(),
                bound_a: ba2.sqrt(),
                trials,
                failures: failures[t_idx],
                flagged: failures[t_idx] * 2 > trials,
            });
        }
    }
    Ok(points)
}

fn rmse_and_stderr(squared_errors: &[f64]) -> (f64, f64) {
    if squared_errors.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = squared_errors.len() as f64;
    // Compensated summation keeps the reduction order-insensitive.
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for &x in squared_errors {
        let y = x - compensation;
        let t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
    }
    let mse = sum / n;
    let rmse = mse.sqrt();
    if squared_errors.len() < 2 || rmse == 0.0 {
        return (rmse, 0.0);
    }
    let var_of_sq: f64 = squared_errors
        .iter()
        .map(|&x| (x - mse) * (x - mse))
        .sum::<f64>()
        / (n - 1.0);
    let se_mse = (var_of_sq / n).sqrt();
    (rmse, se_mse / (2.0 * rmse))
}
