use std::fmt;
use std::str::FromStr;

use crate::{CliError, CliResult};

/// Upper bound on grid length.
pub const MAX_POINTS: usize = 100_000;

/// Inclusive dB grid `start:step:stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrGrid {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl SnrGrid {
    pub fn new(start: f64, step: f64, stop: f64) -> CliResult<Self> {
        if !(start.is_finite() && step.is_finite() && stop.is_finite()) {
            return Err(CliError::config("SNR grid bounds must be finite"));
        }
        if step <= 0.0 {
            return Err(CliError::config(format!("SNR grid step must be positive, got {step}")));
        }
        if stop < start {
            return Err(CliError::config(format!("SNR grid stop {stop} is below start {start}")));
        }
        let g = SnrGrid { start, step, stop };
        if g.len_unchecked() > MAX_POINTS as f64 {
            return Err(CliError::config(format!("SNR grid has more than {MAX_POINTS} points")));
        }
        Ok(g)
    }

    fn len_unchecked(&self) -> f64 {
        ((self.stop - self.start) / self.step + 1e-9).floor() + 1.0
    }

    /// Points `start + i·step`; `stop` is included when it lies on the grid.
    pub fn points(&self) -> Vec<f64> {
        let n = self.len_unchecked() as usize;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl Default for SnrGrid {
    fn default() -> Self {
        SnrGrid { start: 0.0, step: 2.0, stop: 30.0 }
    }
}

impl fmt::Display for SnrGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.stop)
    }
}

impl FromStr for SnrGrid {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("bad number '{p}' in SNR grid '{s}'")))
        };
        match parts.as_slice() {
            [a] => {
                let a = num(a)?;
                SnrGrid::new(a, 1.0, a)
            }
            [a, b, c] => SnrGrid::new(num(a)?, num(b)?, num(c)?),
            _ => Err(CliError::config(format!("SNR grid '{s}' is not start:step:stop"))),
        }
    }
}
