//! Pulse × range sample grid shared by every stage of the chain.

use crate::{C64, Error, Result};

/// Which physical axis the columns of a [`DataMatrix`] run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainTag {
    /// Columns are fast-time samples, spacing 1/f_s, starting at the gate.
    FastTime,
    /// Columns are range-frequency bins on [-f_s/2, f_s/2), spacing f_s/N_r.
    RangeFrequency,
}

impl DomainTag {
    pub fn name(self) -> &'static str {
        match self {
            DomainTag::FastTime => "fast-time",
            DomainTag::RangeFrequency => "range-frequency",
        }
    }
}

/// Complex pulse × range grid with axis calibration.
///
/// Rows are pulses (slow time t = n·T); columns are either fast-time samples
/// or range-frequency bins depending on `domain`. `range_gate_start` is the
/// absolute fast-time origin of the gate and is carried through the
/// frequency domain so delays stay absolute.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    values: Vec<C64>,
    rows: usize,
    cols: usize,
    pub domain: DomainTag,
    /// Slow-time step T between rows, seconds.
    pub slow_time_step: f64,
    /// First column coordinate: gate start (fast time) or -f_s/2 (frequency).
    pub col_start: f64,
    /// Column step: 1/f_s (fast time) or f_s/N_r (frequency).
    pub col_step: f64,
    /// Absolute fast-time origin of the range gate, seconds.
    pub range_gate_start: f64,
}

impl DataMatrix {
    pub fn zeros(
        rows: usize,
        cols: usize,
        domain: DomainTag,
        slow_time_step: f64,
        col_start: f64,
        col_step: f64,
        range_gate_start: f64,
    ) -> Result<Self> {
        if rows < 2 {
            return Err(Error::InvalidParameter(format!(
                "pulse count {rows} < 2"
            )));
        }
        if cols < 8 {
            return Err(Error::InvalidParameter(format!(
                "range sample count {cols} < 8"
            )));
        }
        if slow_time_step <= 0.0
            || col_step <= 0.0
            || slow_time_step.is_nan()
            || col_step.is_nan()
        {
            return Err(Error::InvalidParameter(
                "axis steps must be positive".into(),
            ));
        }
        Ok(Self {
            values: vec![C64::new(0.0, 0.0); rows * cols],
            rows,
            cols,
            domain,
            slow_time_step,
            col_start,
            col_step,
            range_gate_start,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.values[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.values[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[C64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_mut(&mut self, row: usize) -> &mut [C64] {
        &mut self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    /// Parallel row chunks, for per-pulse work.
    pub fn par_rows_mut(&mut self) -> rayon::slice::ChunksMut<'_, C64> {
        use rayon::prelude::*;
        self.values.par_chunks_mut(self.cols)
    }

    /// Slow time of row n (t = n·T).
    pub fn slow_time(&self, row: usize) -> f64 {
        row as f64 * self.slow_time_step
    }

    /// Physical column coordinate (fast time or frequency).
    pub fn col_coord(&self, col: usize) -> f64 {
        self.col_start + col as f64 * self.col_step
    }

    /// Total energy Σ|x|².
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn expect_domain(&self, expected: DomainTag) -> Result<()> {
        if self.domain == expected {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                expected: expected.name(),
                got: self.domain.name(),
            })
        }
    }

    /// Same shape and axes, different domain tag and sample meaning.
    pub fn like_with_domain(&self, domain: DomainTag, col_start: f64, col_step: f64) -> Self {
        Self {
            values: vec![C64::new(0.0, 0.0); self.rows * self.cols],
            rows: self.rows,
            cols: self.cols,
            domain,
            slow_time_step: self.slow_time_step,
            col_start,
            col_step,
            range_gate_start: self.range_gate_start,
        }
    }
}
