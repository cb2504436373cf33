use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::koethe::{
    CoefficientSequence, Counterexample, Diagnostics, TailBound, TrendSummary, TruncationPolicy,
    Verdict, WeightGrid,
};
use crate::profile::Limit;

/// `‖x‖_k` at truncation: partial sum over `1..=N` plus a tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormValue {
    pub grade: usize,
    pub partial: f64,
    /// `ln partial`; stays finite when `partial` overflows.
    pub log_partial: f64,
    pub tail: TailBound,
}

impl SeminormValue {
    /// `partial + tail`, `None` when the tail is unavailable.
    pub fn upper(&self) -> Option<f64> {
        self.tail.value().map(|t| self.partial + t)
    }
}

/// `sup_n |x_n| a(n,k)` at truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupSeminormValue {
    pub grade: usize,
    pub value: f64,
    pub log_value: f64,
    /// Index of the truncated maximum (0 for the zero sequence).
    pub argmax: usize,
    /// True when no index beyond `N` can exceed the truncated maximum.
    pub exact: bool,
}

pub(crate) fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms
        .into_iter()
        .filter(|t| *t > f64::NEG_INFINITY)
        .collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Last index worth visiting: the support end when known, else `N`.
pub(crate) fn effective_len(x: &CoefficientSequence, n_max: usize) -> usize {
    x.support_end().map_or(n_max, |e| e.min(n_max))
}

/// `ln(|x_n| a(n,k))` for `n = 1..=len`, with weight sanity checks.
pub(crate) fn log_terms(
    x: &CoefficientSequence,
    grid: &WeightGrid,
    k: usize,
    len: usize,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(len);
    for n in 1..=len {
        let lx = x.log_abs(n);
        if lx.is_nan() || lx == f64::INFINITY {
            return Err(Error::InvalidSequence(format!(
                "{}: non-finite entry at n={n}",
                x.describe()
            )));
        }
        if lx == f64::NEG_INFINITY {
            out.push(lx);
            continue;
        }
        let w = grid.log_weight(n, k);
        if w.is_nan() || w == f64::INFINITY {
            return Err(Error::NonFiniteWeight { n, k });
        }
        out.push(lx + w);
    }
    Ok(out)
}

/// `‖x‖_k` for any grade, without the `k ≤ k_max` guard. Some certificates
/// need grades such as `3pk` beyond the policy ceiling.
pub(crate) fn seminorm_any_grade(
    x: &CoefficientSequence,
    grid: &WeightGrid,
    k: usize,
    n_max: usize,
) -> Result<SeminormValue> {
    if k == 0 {
        return Err(Error::GradeOutOfRange {
            grade: 0,
            max: usize::MAX,
        });
    }
    let len = effective_len(x, n_max);
    let terms = log_terms(x, grid, k, len)?;
    let log_partial = log_sum_exp(terms);
    Ok(SeminormValue {
        grade: k,
        partial: log_partial.exp(),
        log_partial,
        tail: x.tail_bound(n_max, grid, k),
    })
}

/// Graded seminorm `‖x‖_k = Σ |x_n| a(n,k)` with tail treatment.
pub fn seminorm(
    x: &CoefficientSequence,
    grid: &WeightGrid,
    k: usize,
    policy: &TruncationPolicy,
) -> Result<SeminormValue> {
    policy.check_grade(k)?;
    seminorm_any_grade(x, grid, k, policy.n_max)
}

pub(crate) fn sup_seminorm_any_grade(
    x: &CoefficientSequence,
    grid: &WeightGrid,
    k: usize,
    n_max: usize,
) -> Result<SupSeminormValue> {
    let len = effective_len(x, n_max);
    let terms = log_terms(x, grid, k, len)?;
    let (argmax, log_value) =
        terms
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &t)| {
                if t > acc.1 {
                    (i + 1, t)
                } else {
                    acc
                }
            });
    let exact = if x.support_end().is_some_and(|e| e <= n_max) {
        true
    } else {
        match (x.log_abs_profile(), grid.log_profile(k)) {
            (Some(px), Some(pw)) => px
                .add(&pw)
                .sup_from(n_max + 1)
                .is_some_and(|s| s.value <= log_value),
            _ => false,
        }
    };
    Ok(SupSeminormValue {
        grade: k,
        value: log_value.exp(),
        log_value,
        argmax,
        exact,
    })
}

/// Sup-form seminorm `sup_n |x_n| a(n,k)`, equivalent to the ℓ¹ form on
/// nuclear spaces.
pub fn sup_seminorm(
    x: &CoefficientSequence,
    grid: &WeightGrid,
    k: usize,
    policy: &TruncationPolicy,
) -> Result<SupSeminormValue> {
    policy.check_grade(k)?;
    sup_seminorm_any_grade(x, grid, k, policy.n_max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipWitness {
    /// One certified value per grade `1..=k_max`.
    pub seminorms: Vec<SeminormValue>,
}

/// Whether `‖x‖_k < ∞` for every grade up to `k_max`. Partial sums alone
/// never certify; a tail bound is required at each grade.
pub fn membership(
    x: &CoefficientSequence,
    grid: &WeightGrid,
    policy: &TruncationPolicy,
) -> Result<Verdict<MembershipWitness>> {
    let mut seminorms = Vec::with_capacity(policy.k_max);
    for k in 1..=policy.k_max {
        let v = seminorm(x, grid, k, policy)?;
        if v.tail.is_available() && v.partial.is_finite() {
            seminorms.push(v);
            continue;
        }
        if let (Some(px), Some(pw)) = (x.log_abs_profile(), grid.log_profile(k)) {
            let summand = px.add(&pw);
            if !summand.series_converges() {
                let (n, term) = summand.argmax_upto(policy.n_max);
                return Ok(Verdict::Refuted(
                    Counterexample::new(format!(
                        "Σ |x_n| a(n,{k}) diverges: closed-form summand is not summable"
                    ))
                    .index("k", k)
                    .index("n", n)
                    .value("log_term", term)
                    .value("log_partial_sum", v.log_partial)
                    .value("log_last_term", summand.eval(policy.n_max)),
                ));
            }
        }
        let terms = log_terms(x, grid, k, policy.n_max)?;
        let mut cumulative = Vec::with_capacity(terms.len());
        let mut acc = f64::NEG_INFINITY;
        for t in terms {
            acc = log_sum_exp([acc, t]);
            cumulative.push(acc);
        }
        return Ok(Verdict::Inconclusive(
            Diagnostics::new(format!("no tail bound for grade {k}"))
                .with_trend(TrendSummary::of_logs(&cumulative, policy.growth_window))
                .value("k", k as f64)
                .value("log_partial_sum", v.log_partial),
        ));
    }
    Ok(Verdict::Certified(MembershipWitness { seminorms }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualWitness {
    /// Smallest grade with a bounded ratio.
    pub k: usize,
    /// `D ≥ sup_n |y_n| / a(n,k)`.
    pub bound: f64,
    pub log_bound: f64,
}

/// Whether `sup_n |y_n| / a(n,k) < ∞` for some `k ≤ k_max`.
pub fn dual_membership(
    y: &CoefficientSequence,
    grid: &WeightGrid,
    policy: &TruncationPolicy,
) -> Result<Verdict<DualWitness>> {
    if y.is_zero() {
        return Ok(Verdict::Certified(DualWitness {
            k: 1,
            bound: 0.0,
            log_bound: f64::NEG_INFINITY,
        }));
    }
    let len = effective_len(y, policy.n_max);
    let mut first_zero: Option<(usize, usize)> = None;
    let mut all_diverge = y.log_abs_profile().is_some();
    let mut truncated_sups = Vec::with_capacity(policy.k_max);
    for k in 1..=policy.k_max {
        // ln |y_n| - ln a(n,k) over the truncation
        let mut log_ratio = Vec::with_capacity(len);
        let mut zero_at = None;
        for n in 1..=len {
            let ly = y.log_abs(n);
            if ly == f64::NEG_INFINITY {
                log_ratio.push(ly);
                continue;
            }
            let w = grid.log_weight(n, k);
            if w.is_nan() || w == f64::INFINITY {
                return Err(Error::NonFiniteWeight { n, k });
            }
            if w == f64::NEG_INFINITY {
                zero_at = Some(n);
                break;
            }
            log_ratio.push(ly - w);
        }
        if let Some(n) = zero_at {
            first_zero.get_or_insert((n, k));
            truncated_sups.push(f64::INFINITY);
            continue;
        }
        let truncated = log_ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        truncated_sups.push(truncated);

        let certified_log_bound = if y.support_end().is_some_and(|e| e <= policy.n_max) {
            Some(truncated)
        } else if let (Some(py), Some(pw)) = (y.log_abs_profile(), grid.log_profile(k)) {
            let r = py.sub(&pw);
            if r.limit() != Limit::PosInf {
                all_diverge = false;
            }
            r.sup_from(1).map(|s| s.value.max(truncated))
        } else {
            all_diverge = false;
            None
        };
        if let Some(lb) = certified_log_bound {
            let slack = policy.tol.max(1e-12 * lb.abs());
            if log_ratio.iter().all(|&r| r <= lb + slack) {
                return Ok(Verdict::Certified(DualWitness {
                    k,
                    bound: lb.exp(),
                    log_bound: lb,
                }));
            }
        }
    }
    if let Some((n, k)) = first_zero {
        if truncated_sups.iter().all(|s| *s == f64::INFINITY) {
            return Err(Error::ZeroWeight { n, k });
        }
    }
    if all_diverge {
        match grade_free_limit(y, grid) {
            GradeLimit::AllDiverge => {
                let k = policy.k_max;
                let r = y
                    .log_abs_profile()
                    .expect("closed form")
                    .sub(&grid.log_profile(k).expect("closed form"));
                let (n, v) = r.argmax_upto(policy.n_max);
                return Ok(Verdict::Refuted(
                    Counterexample::new("|y_n| / a(n,k) → ∞ for every grade k")
                        .index("k", k)
                        .index("n", n)
                        .value("log_ratio", v)
                        .value("log_ratio_at_N", r.eval(policy.n_max)),
                ));
            }
            GradeLimit::BoundedFrom(k0) => {
                // the bounded grades lie beyond k_max; scan upwards from there
                let py = y.log_abs_profile().expect("closed form");
                for k in (policy.k_max + 1).max(k0.saturating_sub(1))..=k0 + 1 {
                    let Some(pw) = grid.log_profile(k) else { break };
                    let r = py.sub(&pw);
                    if r.limit() == Limit::PosInf {
                        continue;
                    }
                    if let Some(sup) = r.sup_from(1) {
                        let len = effective_len(y, policy.n_max);
                        let truncated = (1..=len)
                            .map(|n| y.log_abs(n) - grid.log_weight(n, k))
                            .fold(f64::NEG_INFINITY, f64::max);
                        let lb = sup.value.max(truncated);
                        return Ok(Verdict::Certified(DualWitness {
                            k,
                            bound: lb.exp(),
                            log_bound: lb,
                        }));
                    }
                }
            }
            GradeLimit::Unknown => {}
        }
    }
    let mut diag = Diagnostics::new("no grade with a certified bounded ratio");
    for (i, s) in truncated_sups.iter().enumerate() {
        diag = diag.value(&format!("log_truncated_sup_k{}", i + 1), *s);
    }
    Ok(Verdict::Inconclusive(diag))
}

enum GradeLimit {
    AllDiverge,
    /// `ln|y_n| - ln a(n,k)` stays bounded above for every `k ≥` this grade.
    BoundedFrom(usize),
    Unknown,
}

/// Growth level of a profile: leading power `(γ, c)`, then `ln n` at level 0,
/// then constants at level -1.
fn growth_level(p: &crate::profile::LogProfile) -> (f64, f64) {
    match p.leading_power() {
        Some((g, c)) => (g, c),
        None if p.log_coefficient() != 0.0 => (0.0, p.log_coefficient()),
        None => (-1.0, 0.0),
    }
}

/// Decides divergence of `|y_n| / a(n,k)` for all grades at once on power
/// series grids, where the ratio profile is affine in `1/k` or `k`.
fn grade_free_limit(y: &CoefficientSequence, grid: &WeightGrid) -> GradeLimit {
    let (Some(py), Some(pa)) = (y.log_abs_profile(), grid.alpha().and_then(|a| a.profile())) else {
        return GradeLimit::Unknown;
    };
    let (ly, cy) = growth_level(&py);
    let (la, ca) = growth_level(&pa);
    if grid.is_finite_type() {
        // ln|y_n| + α_n / k
        if la < 0.0 || ca <= 0.0 {
            return if py.limit() == Limit::PosInf {
                GradeLimit::AllDiverge
            } else {
                GradeLimit::Unknown
            };
        }
        if ly > la {
            return if cy > 0.0 {
                GradeLimit::AllDiverge
            } else {
                GradeLimit::BoundedFrom(1)
            };
        }
        if ly < la || cy > 0.0 {
            return GradeLimit::AllDiverge;
        }
        GradeLimit::BoundedFrom((ca / -cy).floor() as usize + 1)
    } else if grid.is_infinite_type() {
        // ln|y_n| - k α_n
        if la < 0.0 || ca <= 0.0 {
            return GradeLimit::Unknown;
        }
        if ly > la && cy > 0.0 {
            return GradeLimit::AllDiverge;
        }
        if ly == la && cy > 0.0 {
            return GradeLimit::BoundedFrom((cy / ca).floor() as usize + 1);
        }
        GradeLimit::BoundedFrom(1)
    } else {
        GradeLimit::Unknown
    }
}
