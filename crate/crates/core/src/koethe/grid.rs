use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::koethe::{ExponentSequence, TruncationPolicy};
use crate::profile::LogProfile;

/// Structural class of a Köthe matrix.
#[derive(Debug, Clone)]
pub enum GridKind {
    General,
    /// `a(n,k) = exp(-α_n / k)`
    FiniteTypePower(ExponentSequence),
    /// `a(n,k) = exp(k α_n)`
    InfiniteTypePower(ExponentSequence),
}

type LogWeightFn = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;
type ProfileFn = Arc<dyn Fn(usize) -> LogProfile + Send + Sync>;

#[derive(Clone)]
enum GeneralWeights {
    /// Closed-form `k ↦ (n ↦ ln a(n,k))`.
    Profiled(ProfileFn),
    /// Opaque `ln a(n,k)`.
    Opaque(LogWeightFn),
}

/// Köthe matrix `(n, k) ↦ a(n,k)`, stored as `ln a(n,k)`.
///
/// Power-series weights overflow doubles for moderate `k α_n`, so every
/// consumer works with [`WeightGrid::log_weight`] and exponentiates only at
/// output. A zero weight is `-∞`.
#[derive(Clone)]
pub struct WeightGrid {
    kind: GridKind,
    general: Option<GeneralWeights>,
    label: String,
    montel: bool,
}

impl fmt::Debug for WeightGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightGrid")
            .field("label", &self.describe())
            .field("montel", &self.montel)
            .finish()
    }
}

impl WeightGrid {
    /// `Λ₁(α)`.
    pub fn finite_type(alpha: ExponentSequence) -> Self {
        WeightGrid {
            label: format!("finite:{}", alpha.describe()),
            kind: GridKind::FiniteTypePower(alpha),
            general: None,
            montel: true,
        }
    }

    /// `Λ_∞(α)`.
    pub fn infinite_type(alpha: ExponentSequence) -> Self {
        WeightGrid {
            label: format!("infinite:{}", alpha.describe()),
            kind: GridKind::InfiniteTypePower(alpha),
            general: None,
            montel: true,
        }
    }

    /// General grid whose grade-`k` row has the closed-form log profile `f(k)`.
    /// `montel` is the caller's assertion; it is never verified.
    pub fn general_profiled(
        label: impl Into<String>,
        montel: bool,
        f: impl Fn(usize) -> LogProfile + Send + Sync + 'static,
    ) -> Self {
        WeightGrid {
            kind: GridKind::General,
            general: Some(GeneralWeights::Profiled(Arc::new(f))),
            label: label.into(),
            montel,
        }
    }

    /// General grid with the same closed-form row at every grade.
    pub fn grade_independent(label: impl Into<String>, montel: bool, row: LogProfile) -> Self {
        Self::general_profiled(label, montel, move |_| row.clone())
    }

    /// General grid from an opaque `ln a(n,k)`; tails are never available.
    pub fn general_log(
        label: impl Into<String>,
        montel: bool,
        log_weight: impl Fn(usize, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        WeightGrid {
            kind: GridKind::General,
            general: Some(GeneralWeights::Opaque(Arc::new(log_weight))),
            label: label.into(),
            montel,
        }
    }

    /// General grid from an opaque weight `a(n,k) ≥ 0`.
    pub fn general(
        label: impl Into<String>,
        montel: bool,
        weight: impl Fn(usize, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::general_log(label, montel, move |n, k| weight(n, k).ln())
    }

    pub fn kind(&self) -> &GridKind {
        &self.kind
    }

    /// Exponent sequence of a power-series grid.
    pub fn alpha(&self) -> Option<&ExponentSequence> {
        match &self.kind {
            GridKind::FiniteTypePower(a) | GridKind::InfiniteTypePower(a) => Some(a),
            GridKind::General => None,
        }
    }

    pub fn is_finite_type(&self) -> bool {
        matches!(self.kind, GridKind::FiniteTypePower(_))
    }

    pub fn is_infinite_type(&self) -> bool {
        matches!(self.kind, GridKind::InfiniteTypePower(_))
    }

    /// Montel flag: automatic for power series, asserted for general grids.
    pub fn is_montel(&self) -> bool {
        self.montel
    }

    pub fn describe(&self) -> String {
        self.label.clone()
    }

    /// `ln a(n,k)`.
    pub fn log_weight(&self, n: usize, k: usize) -> f64 {
        match &self.kind {
            GridKind::FiniteTypePower(a) => -a.value(n) / k as f64,
            GridKind::InfiniteTypePower(a) => k as f64 * a.value(n),
            GridKind::General => match self.general.as_ref().expect("general grid carries weights")
            {
                GeneralWeights::Profiled(f) => f(k).eval(n),
                GeneralWeights::Opaque(f) => f(n, k),
            },
        }
    }

    /// `a(n,k)`; may overflow to `+∞` for infinite-type grids.
    pub fn weight(&self, n: usize, k: usize) -> f64 {
        self.log_weight(n, k).exp()
    }

    /// Closed-form profile of `n ↦ ln a(n,k)`.
    pub fn log_profile(&self, k: usize) -> Option<LogProfile> {
        match &self.kind {
            GridKind::FiniteTypePower(a) => a.profile().map(|p| p.scale(-1.0 / k as f64)),
            GridKind::InfiniteTypePower(a) => a.profile().map(|p| p.scale(k as f64)),
            GridKind::General => match self.general.as_ref()? {
                GeneralWeights::Profiled(f) => Some(f(k)),
                GeneralWeights::Opaque(_) => None,
            },
        }
    }

    /// Matrix axioms at truncation: finite or zero weights, nondecreasing in
    /// `k`, some positive weight per row. For power series also the
    /// exponent-sequence invariants.
    pub fn validate(&self, policy: &TruncationPolicy) -> Result<()> {
        if let Some(a) = self.alpha() {
            a.validate(policy, true)?;
        }
        for n in 1..=policy.n_max {
            let mut prev = f64::NEG_INFINITY;
            let mut any_positive = false;
            for k in 1..=policy.k_max {
                let w = self.log_weight(n, k);
                if w.is_nan() || w == f64::INFINITY {
                    return Err(Error::NonFiniteWeight { n, k });
                }
                if w < prev - 1e-12 * prev.abs().max(1.0) {
                    return Err(Error::InvalidGrid(format!(
                        "{}: a(n,k) decreases in k at n={n}, k={k}",
                        self.describe()
                    )));
                }
                any_positive |= w > f64::NEG_INFINITY;
                prev = w;
            }
            if !any_positive {
                return Err(Error::InvalidGrid(format!(
                    "{}: row n={n} vanishes for all k ≤ {}",
                    self.describe(),
                    policy.k_max
                )));
            }
        }
        Ok(())
    }
}
