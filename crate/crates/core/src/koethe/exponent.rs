use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::koethe::TruncationPolicy;
use crate::profile::LogProfile;

/// A user-supplied map `n ↦ value` (1-based) with a label for reports.
#[derive(Clone)]
pub struct IndexFn {
    label: String,
    f: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl IndexFn {
    pub fn new(label: impl Into<String>, f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        IndexFn {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn call(&self, n: usize) -> f64 {
        (self.f)(n)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for IndexFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexFn({})", self.label)
    }
}

#[derive(Debug, Clone)]
pub enum ExponentFamily {
    /// `c · n`
    Linear {
        c: f64,
    },
    /// `c · n^γ`
    Power {
        c: f64,
        gamma: f64,
    },
    /// `ln(n + 1)`
    Log,
    Custom(IndexFn),
}

/// Nonnegative nondecreasing exponent sequence (`α`, `β`), 1-based.
#[derive(Debug, Clone)]
pub struct ExponentSequence {
    family: ExponentFamily,
}

impl ExponentSequence {
    pub fn linear(c: f64) -> Self {
        ExponentSequence {
            family: ExponentFamily::Linear { c },
        }
    }

    pub fn power(c: f64, gamma: f64) -> Self {
        ExponentSequence {
            family: ExponentFamily::Power { c, gamma },
        }
    }

    pub fn log() -> Self {
        ExponentSequence {
            family: ExponentFamily::Log,
        }
    }

    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ExponentSequence {
            family: ExponentFamily::Custom(IndexFn::new(label, f)),
        }
    }

    pub fn family(&self) -> &ExponentFamily {
        &self.family
    }

    pub fn value(&self, n: usize) -> f64 {
        let x = n as f64;
        match &self.family {
            ExponentFamily::Linear { c } => c * x,
            ExponentFamily::Power { c, gamma } => c * x.powf(*gamma),
            ExponentFamily::Log => x.ln_1p(),
            ExponentFamily::Custom(f) => f.call(n),
        }
    }

    /// Closed-form profile of `n ↦ α_n`; `None` for custom sequences.
    pub fn profile(&self) -> Option<LogProfile> {
        match &self.family {
            ExponentFamily::Linear { c } => Some(LogProfile::linear(*c)),
            ExponentFamily::Power { c, gamma } => Some(LogProfile::power(*c, *gamma)),
            ExponentFamily::Log => Some(LogProfile::ln_n_plus_one(1.0)),
            ExponentFamily::Custom(_) => None,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self.family, ExponentFamily::Custom(_))
    }

    /// Whether the closed form is unbounded (`α_n → ∞`).
    pub fn diverges(&self) -> Option<bool> {
        match &self.family {
            ExponentFamily::Linear { c } => Some(*c > 0.0),
            ExponentFamily::Power { c, gamma } => Some(*c > 0.0 && *gamma > 0.0),
            ExponentFamily::Log => Some(true),
            ExponentFamily::Custom(_) => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.family {
            ExponentFamily::Linear { c } => format!("linear:{c}"),
            ExponentFamily::Power { c, gamma } => format!("power:{c}:{gamma}"),
            ExponentFamily::Log => "log".to_string(),
            ExponentFamily::Custom(f) => format!("custom:{}", f.label()),
        }
    }

    /// Nonnegative and nondecreasing on `1..=N`; for power-series use also
    /// `α_N > α_1` (divergence trend at truncation).
    pub fn validate(&self, policy: &TruncationPolicy, require_growth: bool) -> Result<()> {
        match &self.family {
            ExponentFamily::Linear { c } if *c < 0.0 => {
                return Err(Error::InvalidSequence(format!("linear slope {c} < 0")))
            }
            ExponentFamily::Power { c, gamma } if *c < 0.0 || *gamma < 0.0 => {
                return Err(Error::InvalidSequence(format!(
                    "power:{c}:{gamma} is not nondecreasing"
                )))
            }
            _ => {}
        }
        let mut prev = f64::NEG_INFINITY;
        for n in 1..=policy.n_max {
            let v = self.value(n);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidSequence(format!(
                    "{}: value {v} at n={n} is not a finite nonnegative number",
                    self.describe()
                )));
            }
            if v < prev {
                return Err(Error::InvalidSequence(format!(
                    "{}: decreases at n={n}",
                    self.describe()
                )));
            }
            prev = v;
        }
        if require_growth && self.value(policy.n_max) <= self.value(1) {
            return Err(Error::InvalidSequence(format!(
                "{}: α_N = α_1, no divergence trend",
                self.describe()
            )));
        }
        Ok(())
    }
}
