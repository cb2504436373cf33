use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Three-valued outcome of every criterion check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "payload")]
pub enum Verdict<W> {
    Certified(W),
    Refuted(Counterexample),
    Inconclusive(Diagnostics),
}

impl<W> Verdict<W> {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Certified(_) => "Certified",
            Verdict::Refuted(_) => "Refuted",
            Verdict::Inconclusive(_) => "Inconclusive",
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Certified(w) => Some(w),
            _ => None,
        }
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::Refuted(c) => Some(c),
            _ => None,
        }
    }

    pub fn map<V>(self, f: impl FnOnce(W) -> V) -> Verdict<V> {
        match self {
            Verdict::Certified(w) => Verdict::Certified(f(w)),
            Verdict::Refuted(c) => Verdict::Refuted(c),
            Verdict::Inconclusive(d) => Verdict::Inconclusive(d),
        }
    }
}

/// Reproducible counterexample: the indices that exhibit the failure and
/// the offending values at those indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Counterexample {
    pub reason: String,
    pub indices: BTreeMap<String, usize>,
    pub values: BTreeMap<String, f64>,
}

impl Counterexample {
    pub fn new(reason: impl Into<String>) -> Self {
        Counterexample {
            reason: reason.into(),
            ..Default::default()
        }
    }

    pub fn index(mut self, name: &str, v: usize) -> Self {
        self.indices.insert(name.to_string(), v);
        self
    }

    pub fn value(mut self, name: &str, v: f64) -> Self {
        self.values.insert(name.to_string(), v);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrendClass {
    Decaying,
    Flat,
    Growing,
}

/// Least-squares log-slope over the last `window` points of a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub window: usize,
    pub first: f64,
    pub last: f64,
    pub log_slope: f64,
    pub class: TrendClass,
}

/// Log-slopes inside this band count as flat.
pub const FLAT_SLOPE: f64 = 1e-3;

impl TrendSummary {
    /// `None` when fewer than two finite positive values are available.
    pub fn of(values: &[f64], window: usize) -> Option<Self> {
        let logs: Vec<f64> = values
            .iter()
            .copied()
            .take_while(|v| v.is_finite())
            .map(|v| v.abs().ln())
            .collect();
        Self::of_logs(&logs, window)
    }

    /// Same as [`TrendSummary::of`] for values already in log form.
    pub fn of_logs(logs: &[f64], window: usize) -> Option<Self> {
        let finite: Vec<f64> = logs.iter().copied().take_while(|v| v.is_finite()).collect();
        let w = window.min(finite.len());
        if w < 2 {
            return None;
        }
        let tail = &finite[finite.len() - w..];
        let n = w as f64;
        let mean_x = (n - 1.0) / 2.0;
        let mean_y = tail.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (i, y) in tail.iter().enumerate() {
            let dx = i as f64 - mean_x;
            sxy += dx * (y - mean_y);
            sxx += dx * dx;
        }
        let slope = sxy / sxx;
        let class = if slope > FLAT_SLOPE {
            TrendClass::Growing
        } else if slope < -FLAT_SLOPE {
            TrendClass::Decaying
        } else {
            TrendClass::Flat
        };
        Some(TrendSummary {
            window: w,
            first: tail[0].exp(),
            last: tail[w - 1].exp(),
            log_slope: slope,
            class,
        })
    }
}

/// Why a check could not decide, with enough numbers to interpret it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub reason: String,
    pub trend: Option<TrendSummary>,
    pub values: BTreeMap<String, f64>,
}

impl Diagnostics {
    pub fn new(reason: impl Into<String>) -> Self {
        Diagnostics {
            reason: reason.into(),
            ..Default::default()
        }
    }

    pub fn with_trend(mut self, trend: Option<TrendSummary>) -> Self {
        self.trend = trend;
        self
    }

    pub fn value(mut self, name: &str, v: f64) -> Self {
        self.values.insert(name.to_string(), v);
        self
    }
}
