use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::koethe::{ExponentSequence, IndexFn, WeightGrid};
use crate::profile::LogProfile;

#[derive(Debug, Clone)]
pub enum SequenceFamily {
    /// `c · r^n`
    Geometric {
        c: f64,
        r: f64,
    },
    /// `c · exp(-α_n / s)`
    ExpOfExponent {
        c: f64,
        s: f64,
        alpha: ExponentSequence,
    },
    /// `1 / n`
    Reciprocal,
    /// Entries `1..=len`, zero afterwards.
    FinitelySupported(Vec<f64>),
    /// Known entries `1..=len` of a sequence whose continuation is unknown
    /// (outputs of operators at truncation).
    Sampled(Vec<f64>),
    /// `base` with every entry below `start` zeroed.
    TailFrom {
        start: usize,
        base: Box<CoefficientSequence>,
    },
    Custom(IndexFn),
}

/// Bound on the part of a weighted sum beyond the truncation index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailBound {
    /// The tail vanishes identically.
    Exact,
    Bound(f64),
    Unavailable,
}

impl TailBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            TailBound::Exact => Some(0.0),
            TailBound::Bound(b) => Some(*b),
            TailBound::Unavailable => None,
        }
    }

    pub fn is_available(&self) -> bool {
        !matches!(self, TailBound::Unavailable)
    }
}

/// A real sequence `(x_n)_{n ≥ 1}` given by a closed-form family or by data.
#[derive(Debug, Clone)]
pub struct CoefficientSequence {
    family: SequenceFamily,
}

impl CoefficientSequence {
    pub fn geometric(c: f64, r: f64) -> Self {
        Self::from_family(SequenceFamily::Geometric { c, r })
    }

    pub fn exp_of_exponent(c: f64, s: f64, alpha: ExponentSequence) -> Self {
        assert!(s > 0.0, "exp_of_exponent needs s > 0");
        Self::from_family(SequenceFamily::ExpOfExponent { c, s, alpha })
    }

    pub fn reciprocal() -> Self {
        Self::from_family(SequenceFamily::Reciprocal)
    }

    pub fn finitely_supported(values: Vec<f64>) -> Self {
        Self::from_family(SequenceFamily::FinitelySupported(values))
    }

    pub fn zero() -> Self {
        Self::finitely_supported(Vec::new())
    }

    /// Canonical unit vector `e_n`.
    pub fn unit(n: usize) -> Self {
        assert!(n >= 1, "sequences are 1-based");
        let mut v = vec![0.0; n];
        v[n - 1] = 1.0;
        Self::finitely_supported(v)
    }

    pub fn sampled(values: Vec<f64>) -> Self {
        Self::from_family(SequenceFamily::Sampled(values))
    }

    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::from_family(SequenceFamily::Custom(IndexFn::new(label, f)))
    }

    /// Entries below `start` zeroed.
    pub fn tail_from(&self, start: usize) -> Self {
        Self::from_family(SequenceFamily::TailFrom {
            start,
            base: Box::new(self.clone()),
        })
    }

    pub fn from_family(family: SequenceFamily) -> Self {
        CoefficientSequence { family }
    }

    pub fn family(&self) -> &SequenceFamily {
        &self.family
    }

    /// Entry `n` (1-based). Index 0 is outside every sequence and reads as 0.
    pub fn value(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let x = n as f64;
        match &self.family {
            SequenceFamily::Geometric { c, r } => c * r.powi(n as i32),
            SequenceFamily::ExpOfExponent { c, s, alpha } => c * (-alpha.value(n) / s).exp(),
            SequenceFamily::Reciprocal => 1.0 / x,
            SequenceFamily::FinitelySupported(v) | SequenceFamily::Sampled(v) => {
                v.get(n - 1).copied().unwrap_or(0.0)
            }
            SequenceFamily::TailFrom { start, base } => {
                if n < *start {
                    0.0
                } else {
                    base.value(n)
                }
            }
            SequenceFamily::Custom(f) => f.call(n),
        }
    }

    /// `ln |x_n|`, `-∞` for zero entries. Closed forms are evaluated in log
    /// space so that tiny entries do not underflow.
    pub fn log_abs(&self, n: usize) -> f64 {
        if n == 0 {
            return f64::NEG_INFINITY;
        }
        match (&self.family, self.log_abs_profile()) {
            (SequenceFamily::TailFrom { start, .. }, _) if n < *start => f64::NEG_INFINITY,
            (_, Some(p)) => p.eval(n),
            _ => self.value(n).abs().ln(),
        }
    }

    /// Closed-form profile of `n ↦ ln |x_n|`. `None` for data-backed,
    /// custom, finitely supported and identically zero sequences.
    pub fn log_abs_profile(&self) -> Option<LogProfile> {
        match &self.family {
            SequenceFamily::Geometric { c, r } => {
                if *c == 0.0 || *r == 0.0 {
                    None
                } else {
                    Some(LogProfile::constant(c.abs().ln()).add(&LogProfile::linear(r.abs().ln())))
                }
            }
            SequenceFamily::ExpOfExponent { c, s, alpha } => {
                if *c == 0.0 {
                    return None;
                }
                let a = alpha.profile()?;
                Some(a.scale(-1.0 / s).plus_constant(c.abs().ln()))
            }
            SequenceFamily::Reciprocal => Some(LogProfile::ln_n(-1.0)),
            SequenceFamily::TailFrom { base, .. } => base.log_abs_profile(),
            _ => None,
        }
    }

    /// Last index carrying a nonzero entry, when the support is finite and known.
    pub fn support_end(&self) -> Option<usize> {
        match &self.family {
            SequenceFamily::FinitelySupported(v) => {
                Some(v.iter().rposition(|x| *x != 0.0).map_or(0, |i| i + 1))
            }
            SequenceFamily::Geometric { c, r } if *c == 0.0 || *r == 0.0 => Some(0),
            SequenceFamily::ExpOfExponent { c, .. } if *c == 0.0 => Some(0),
            SequenceFamily::TailFrom { start, base } => {
                base.support_end().map(|e| if e < *start { 0 } else { e })
            }
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.support_end() == Some(0)
    }

    /// Whether the family can bound its own weighted tails.
    pub fn has_tail_capability(&self) -> bool {
        self.support_end().is_some() || self.log_abs_profile().is_some()
    }

    /// Bound on `Σ_{j > n} |x_j| a(j, k)`.
    pub fn tail_bound(&self, n: usize, grid: &WeightGrid, k: usize) -> TailBound {
        if let Some(end) = self.support_end() {
            if end <= n {
                return TailBound::Exact;
            }
            let s: f64 = (n + 1..=end)
                .map(|j| (self.log_abs(j) + grid.log_weight(j, k)).exp())
                .sum();
            return TailBound::Bound(s);
        }
        let (Some(x), Some(w)) = (self.log_abs_profile(), grid.log_profile(k)) else {
            return TailBound::Unavailable;
        };
        // entries below `start` vanish for TailFrom
        let from = match &self.family {
            SequenceFamily::TailFrom { start, .. } => n.max(start.saturating_sub(1)),
            _ => n,
        };
        match x.add(&w).tail_sum(from) {
            Some(t) => TailBound::Bound(t),
            None => TailBound::Unavailable,
        }
    }

    /// Entries `1..=n_max`.
    pub fn truncate(&self, n_max: usize) -> Vec<f64> {
        (1..=n_max).map(|n| self.value(n)).collect()
    }

    pub fn validate(&self, n_max: usize) -> Result<()> {
        for n in 1..=n_max {
            let v = self.value(n);
            if !v.is_finite() {
                return Err(Error::InvalidSequence(format!(
                    "{}: non-finite entry at n={n}",
                    self.describe()
                )));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match &self.family {
            SequenceFamily::Geometric { c, r } => format!("geometric:{c}:{r}"),
            SequenceFamily::ExpOfExponent { c, s, alpha } => {
                format!("expexp:{c}:{s}:{}", alpha.describe())
            }
            SequenceFamily::Reciprocal => "reciprocal".to_string(),
            SequenceFamily::FinitelySupported(v) => {
                let body: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("finite:{}", body.join(";"))
            }
            SequenceFamily::Sampled(v) => format!("sampled[{}]", v.len()),
            SequenceFamily::TailFrom { start, base } => format!("{}|n>={start}", base.describe()),
            SequenceFamily::Custom(f) => format!("custom:{}", f.label()),
        }
    }
}
