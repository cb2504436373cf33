use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite truncation used by every check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Largest sequence index `N`.
    pub n_max: usize,
    /// Largest target grade examined.
    pub k_max: usize,
    /// Ceiling for source-grade (witness) searches.
    pub m_max: usize,
    /// Absolute tolerance.
    pub tol: f64,
    /// Span used for trend detection.
    pub growth_window: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            n_max: 200,
            k_max: 6,
            m_max: 12,
            tol: 1e-10,
            growth_window: 32,
        }
    }
}

impl TruncationPolicy {
    pub fn new(
        n_max: usize,
        k_max: usize,
        m_max: usize,
        tol: f64,
        growth_window: usize,
    ) -> Result<Self> {
        let p = TruncationPolicy {
            n_max,
            k_max,
            m_max,
            tol,
            growth_window,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 16 {
            return Err(Error::InvalidPolicy(format!("N = {} < 16", self.n_max)));
        }
        if self.k_max == 0 || self.m_max == 0 {
            return Err(Error::InvalidPolicy(
                "k_max and m_max must be positive".into(),
            ));
        }
        if self.growth_window == 0 || self.growth_window >= self.n_max {
            return Err(Error::InvalidPolicy(format!(
                "growth_window = {} must lie in 1..N",
                self.growth_window
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidPolicy(format!(
                "tol = {} must be positive",
                self.tol
            )));
        }
        Ok(())
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_k_max(mut self, k_max: usize) -> Self {
        self.k_max = k_max;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub(crate) fn check_grade(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.k_max {
            Err(Error::GradeOutOfRange {
                grade: k,
                max: self.k_max,
            })
        } else {
            Ok(())
        }
    }
}
