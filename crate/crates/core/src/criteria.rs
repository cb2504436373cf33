//! Continuity and compactness certificates for `R_θ : K(a) → K(b)` through
//! basis ratios `‖R_θ e_n‖_k / ‖e_n‖_m`, plus the sequence-level conditions
//! (dual membership, domination, shift bounds) that decide them for power
//! series spaces.
//!
//! Every bound is either analytic (closed-form profiles with certified tails)
//! or exact (finite support), and every `Certified` bound is rechecked
//! pointwise over `n ≤ N` before it is returned. Divergence is only ever
//! claimed when a closed-form lower bound on the ratio tends to `+∞`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::koethe::seminorm::{log_sum_exp, log_terms, seminorm_any_grade};
use crate::koethe::{
    dual_membership, gp_nuclearity, membership, nuclearity_power_series, weight_infimum,
    CoefficientSequence, Counterexample, Diagnostics, DualWitness, ExponentSequence,
    PowerSeriesType, TrendSummary, TruncationPolicy, Verdict, WeightGrid, WeightInfimum,
};
use crate::profile::{Limit, LogProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormForm {
    /// `Σ |x_n| a(n,k)`
    L1,
    /// `sup |x_n| a(n,k)`, equivalent on nuclear spaces
    Sup,
}

/// How a ratio bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundRoute {
    ZeroOperator,
    /// Exact maximum over a finite support.
    FiniteSupport,
    /// `‖R e_n‖_k ≤ ‖θ‖_k` together with `inf_n a(n,m) > 0`.
    SourceInfimum,
    /// Sup-form ratio against a nonincreasing source weight.
    MonotoneSup,
    /// `ℓ¹` ratio through a higher target grade.
    MonotoneL1,
    /// One bound valid for every target grade at once.
    GradeLimit,
}

/// `sup_n ‖R e_n‖_k / ‖e_n‖_m ≤ constant`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradeBound {
    pub k: usize,
    pub m: usize,
    pub constant: f64,
    pub log_constant: f64,
    pub form: NormForm,
    pub route: BoundRoute,
}

/// Truncated maximum of the ratio sequence for one `(k, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub k: usize,
    pub m: usize,
    pub form: NormForm,
    pub log_max_ratio: f64,
    pub argmax: usize,
    /// Whether the truncated ratios include a certified beyond-`N` term.
    pub tail_certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityWitness {
    /// One entry per target grade `1..=k_max`, with the smallest `m`.
    pub grades: Vec<GradeBound>,
    pub ratio_table: Vec<RatioRow>,
    pub nuclear_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactnessWitness {
    pub m: usize,
    pub grades: Vec<GradeBound>,
    /// The bound covers every grade, not only the checked ones.
    pub all_grades: bool,
    /// Largest grade checked individually.
    pub grades_checked: usize,
    /// Compactness follows from the ratio bound only on Montel targets;
    /// this is the grid's flag, not a verified property.
    pub montel_assumed: bool,
    pub ratio_table: Vec<RatioRow>,
    pub nuclear_target: bool,
}

enum Bound {
    Finite(GradeBound),
    /// A closed-form lower bound on the ratio at index `n` tends to `+∞`.
    Diverges {
        n: usize,
        log_ratio: f64,
        log_ratio_half: f64,
    },
    Unknown(String),
}

struct RatioContext<'a> {
    theta: &'a CoefficientSequence,
    source: &'a WeightGrid,
    target: &'a WeightGrid,
    policy: &'a TruncationPolicy,
    nuclear_target: bool,
}

fn slack(log_c: f64, tol: f64) -> f64 {
    tol.max(1e-9 * log_c.abs().max(1.0))
}

impl<'a> RatioContext<'a> {
    fn new(
        theta: &'a CoefficientSequence,
        source: &'a WeightGrid,
        target: &'a WeightGrid,
        policy: &'a TruncationPolicy,
    ) -> Result<Self> {
        policy.validate()?;
        if let Verdict::Refuted(c) = membership(theta, target, policy)? {
            return Err(Error::ThetaNotInTarget(format!(
                "R e_1 = θ must lie in the target: {}",
                c.reason
            )));
        }
        let nuclear_target = gp_nuclearity(target, policy)?.is_certified();
        Ok(RatioContext {
            theta,
            source,
            target,
            policy,
            nuclear_target,
        })
    }

    fn preferred_form(&self) -> NormForm {
        if self.nuclear_target {
            NormForm::Sup
        } else {
            NormForm::L1
        }
    }

    /// `ln ‖R e_n‖_k` for `n = 1..=len`, upper bounds when certified.
    fn log_numerators(&self, k: usize, form: NormForm, len: usize) -> Result<(Vec<f64>, bool)> {
        let terms = log_terms(self.theta, self.target, k, len)?;
        let (beyond, certified) = if self.theta.support_end().is_some_and(|e| e <= len) {
            (f64::NEG_INFINITY, true)
        } else {
            match form {
                NormForm::L1 => match self.theta.tail_bound(len, self.target, k).value() {
                    Some(t) => (t.ln(), true),
                    None => (f64::NEG_INFINITY, false),
                },
                NormForm::Sup => match (self.theta.log_abs_profile(), self.target.log_profile(k)) {
                    (Some(t), Some(b)) => match t.add(&b).sup_from(len + 1) {
                        Some(s) => (s.value, true),
                        None => (f64::NEG_INFINITY, false),
                    },
                    _ => (f64::NEG_INFINITY, false),
                },
            }
        };
        let mut out = vec![0.0; len];
        let mut acc = beyond;
        for j in (0..len).rev() {
            acc = match form {
                NormForm::L1 => log_sum_exp([acc, terms[j]]),
                NormForm::Sup => acc.max(terms[j]),
            };
            out[j] = acc;
        }
        Ok((out, certified))
    }

    /// `ln(‖R e_n‖_k / ‖e_n‖_m)` for `n = 1..=len`.
    fn log_ratios(
        &self,
        k: usize,
        m: usize,
        form: NormForm,
        len: usize,
    ) -> Result<(Vec<f64>, bool)> {
        let (num, certified) = self.log_numerators(k, form, len)?;
        let ratios = num
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v == f64::NEG_INFINITY {
                    v
                } else {
                    v - self.source.log_weight(i + 1, m)
                }
            })
            .collect();
        Ok((ratios, certified))
    }

    fn lower_profile(&self, k: usize, m: usize) -> Option<LogProfile> {
        Some(
            self.theta
                .log_abs_profile()?
                .add(&self.target.log_profile(k)?)
                .sub(&self.source.log_profile(m)?),
        )
    }

    fn bound(&self, k: usize, m: usize) -> Result<Bound> {
        let n_max = self.policy.n_max;
        let finite = |log_c: f64, form, route| {
            Bound::Finite(GradeBound {
                k,
                m,
                constant: log_c.exp(),
                log_constant: log_c,
                form,
                route,
            })
        };
        if self.theta.is_zero() {
            return Ok(finite(
                f64::NEG_INFINITY,
                self.preferred_form(),
                BoundRoute::ZeroOperator,
            ));
        }
        if let Some(end) = self.theta.support_end() {
            let (r, _) = self.log_ratios(k, m, self.preferred_form(), end)?;
            if let Some(n) = r.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
                return Ok(Bound::Diverges {
                    n: n + 1,
                    log_ratio: f64::INFINITY,
                    log_ratio_half: f64::INFINITY,
                });
            }
            let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            return Ok(finite(
                max,
                self.preferred_form(),
                BoundRoute::FiniteSupport,
            ));
        }
        let lower = self.lower_profile(k, m);
        if let Some(l) = &lower {
            if l.limit() == Limit::PosInf {
                let (n, v) = l.argmax_upto(n_max);
                return Ok(Bound::Diverges {
                    n,
                    log_ratio: v,
                    log_ratio_half: l.eval((n / 2).max(1)),
                });
            }
        }
        if let WeightInfimum::Positive(log_inf) = weight_infimum(self.source, m) {
            if let Some(u) = seminorm_any_grade(self.theta, self.target, k, n_max)?.upper() {
                return Ok(finite(
                    u.ln() - log_inf,
                    NormForm::L1,
                    BoundRoute::SourceInfimum,
                ));
            }
        }
        if !self.source.is_finite_type() {
            return Ok(Bound::Unknown("no bound route for this source grid".into()));
        }
        if self.nuclear_target {
            if let Some(s) = lower.as_ref().and_then(|l| l.sup_from(1)) {
                return Ok(finite(s.value, NormForm::Sup, BoundRoute::MonotoneSup));
            }
        }
        if self.target.alpha().is_some() {
            let k2 = if self.target.is_finite_type() {
                2 * k
            } else {
                k + 1
            };
            let profiles = (
                self.target.log_profile(k),
                self.target.log_profile(k2),
                self.source.log_profile(m),
            );
            if let (Some(bk), Some(bk2), Some(am)) = profiles {
                let d = bk.sub(&bk2).sub(&am);
                if let (Some(u), Some(s)) = (
                    seminorm_any_grade(self.theta, self.target, k2, n_max)?.upper(),
                    d.sup_from(1),
                ) {
                    return Ok(finite(
                        u.ln() + s.value,
                        NormForm::L1,
                        BoundRoute::MonotoneL1,
                    ));
                }
            }
        }
        Ok(Bound::Unknown("tail bounds unavailable".into()))
    }

    /// Pointwise recheck over `n ≤ N`, independent of how the bound was found.
    fn recheck(&self, b: &GradeBound) -> Result<(RatioRow, bool)> {
        let (r, certified) = self.log_ratios(b.k, b.m, b.form, self.policy.n_max)?;
        let (argmax, max) = r
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| {
                if v > acc.1 {
                    (i + 1, v)
                } else {
                    acc
                }
            });
        let ok = max == f64::NEG_INFINITY
            || max <= b.log_constant + slack(b.log_constant, self.policy.tol);
        Ok((
            RatioRow {
                k: b.k,
                m: b.m,
                form: b.form,
                log_max_ratio: max,
                argmax,
                tail_certified: certified,
            },
            ok,
        ))
    }

    /// Bound plus recheck; a failed recheck downgrades to `Unknown`.
    fn checked_bound(&self, k: usize, m: usize) -> Result<(Bound, Option<RatioRow>)> {
        match self.bound(k, m)? {
            Bound::Finite(b) => {
                let (row, ok) = self.recheck(&b)?;
                if ok {
                    Ok((Bound::Finite(b), Some(row)))
                } else {
                    Ok((
                        Bound::Unknown(format!("pointwise recheck failed at n={}", row.argmax)),
                        Some(row),
                    ))
                }
            }
            other => Ok((other, None)),
        }
    }

    fn truncated_row(&self, k: usize, m: usize) -> Result<(RatioRow, Vec<f64>)> {
        let form = self.preferred_form();
        let (r, certified) = self.log_ratios(k, m, form, self.policy.n_max)?;
        let (argmax, max) = r
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| {
                if v > acc.1 {
                    (i + 1, v)
                } else {
                    acc
                }
            });
        Ok((
            RatioRow {
                k,
                m,
                form,
                log_max_ratio: max,
                argmax,
                tail_certified: certified,
            },
            r,
        ))
    }
}

enum GradeOutcome {
    Found(GradeBound, RatioRow),
    AllDiverge {
        n: usize,
        log_ratio: f64,
        log_ratio_half: f64,
    },
    Undecided(String),
}

/// `R_θ : K(a) → K(b)` is continuous iff for every `k` some `m` bounds
/// `sup_n ‖R e_n‖_k / a(n,m)`. Searches the smallest `m ≤ m_max` per grade.
pub fn continuity_witness(
    theta: &CoefficientSequence,
    source: &WeightGrid,
    target: &WeightGrid,
    policy: &TruncationPolicy,
) -> Result<Verdict<ContinuityWitness>> {
    let ctx = RatioContext::new(theta, source, target, policy)?;
    let outcomes: Vec<Result<GradeOutcome>> = (1..=policy.k_max)
        .into_par_iter()
        .map(|k| {
            let mut last_div = None;
            let mut undecided = None;
            for m in 1..=policy.m_max {
                match ctx.checked_bound(k, m)? {
                    (Bound::Finite(b), Some(row)) => return Ok(GradeOutcome::Found(b, row)),
                    (
                        Bound::Diverges {
                            n,
                            log_ratio,
                            log_ratio_half,
                        },
                        _,
                    ) => last_div = Some((n, log_ratio, log_ratio_half)),
                    (Bound::Unknown(why), _) => {
                        undecided.get_or_insert(format!("m={m}: {why}"));
                    }
                    (Bound::Finite(_), None) => unreachable!("finite bounds carry a row"),
                }
            }
            Ok(match (undecided, last_div) {
                (None, Some((n, log_ratio, log_ratio_half))) => GradeOutcome::AllDiverge {
                    n,
                    log_ratio,
                    log_ratio_half,
                },
                (Some(why), _) => GradeOutcome::Undecided(why),
                (None, None) => GradeOutcome::Undecided("empty search".into()),
            })
        })
        .collect();
    let mut grades = Vec::with_capacity(policy.k_max);
    let mut table = Vec::with_capacity(policy.k_max);
    for (i, o) in outcomes.into_iter().enumerate() {
        let k = i + 1;
        match o? {
            GradeOutcome::Found(b, row) => {
                grades.push(b);
                table.push(row);
            }
            GradeOutcome::AllDiverge {
                n,
                log_ratio,
                log_ratio_half,
            } => {
                return Ok(Verdict::Refuted(
                    Counterexample::new(format!(
                        "for k={k} the ratio a lower bound |θ_n| b(n,k) / a(n,m) tends to ∞ for every m ≤ {}",
                        policy.m_max
                    ))
                    .index("k", k)
                    .index("m", policy.m_max)
                    .index("n", n)
                    .index("n_half", (n / 2).max(1))
                    .value("log_ratio", log_ratio)
                    .value("log_ratio_half", log_ratio_half),
                ))
            }
            GradeOutcome::Undecided(why) => {
                return Ok(Verdict::Inconclusive(ratio_diagnostics(&ctx, k, why)?));
            }
        }
    }
    Ok(Verdict::Certified(ContinuityWitness {
        grades,
        ratio_table: table,
        nuclear_target: ctx.nuclear_target,
    }))
}

fn ratio_diagnostics(ctx: &RatioContext<'_>, k: usize, why: String) -> Result<Diagnostics> {
    let mut diag = Diagnostics::new(format!("grade k={k}: {why}")).value("k", k as f64);
    let mut trend = None;
    for m in 1..=ctx.policy.m_max {
        let (row, r) = ctx.truncated_row(k, m)?;
        diag = diag.value(&format!("log_truncated_sup_m{m}"), row.log_max_ratio);
        if m == ctx.policy.m_max {
            // running maximum of the ratio sequence
            let running: Vec<f64> = r
                .iter()
                .scan(f64::NEG_INFINITY, |acc, &v| {
                    *acc = acc.max(v);
                    Some(*acc)
                })
                .collect();
            trend = TrendSummary::of_logs(&running, ctx.policy.growth_window);
        }
    }
    Ok(diag.with_trend(trend))
}

/// Single-`m` compactness: one `m` with `sup_n ‖R e_n‖_k / a(n,m) < ∞`
/// for every `k`. Implies compactness when the target is Montel.
pub fn compactness_witness(
    theta: &CoefficientSequence,
    source: &WeightGrid,
    target: &WeightGrid,
    policy: &TruncationPolicy,
) -> Result<Verdict<CompactnessWitness>> {
    let ctx = RatioContext::new(theta, source, target, policy)?;
    let mut refuting: Vec<(usize, usize, usize, f64, f64)> = Vec::new();
    let mut undecided: Option<String> = None;
    for m in 1..=policy.m_max {
        // one bound for every grade at once (finite-type targets: b(n,k) ↑ 1)
        let limit_bound = grade_limit_bound(&ctx, m);
        let grades_checked = policy.k_max.max(2 * m);
        let per_grade: Vec<Result<(Bound, Option<RatioRow>)>> = (1..=grades_checked)
            .into_par_iter()
            .map(|k| match limit_bound {
                Some(log_c) => {
                    let b = GradeBound {
                        k,
                        m,
                        constant: log_c.exp(),
                        log_constant: log_c,
                        form: NormForm::Sup,
                        route: BoundRoute::GradeLimit,
                    };
                    let (row, ok) = ctx.recheck(&b)?;
                    Ok(if ok {
                        (Bound::Finite(b), Some(row))
                    } else {
                        (
                            Bound::Unknown("grade-limit recheck failed".into()),
                            Some(row),
                        )
                    })
                }
                None => ctx.checked_bound(k, m),
            })
            .collect();
        let mut grades = Vec::with_capacity(grades_checked);
        let mut table = Vec::with_capacity(grades_checked);
        let mut failed = false;
        for (i, r) in per_grade.into_iter().enumerate() {
            let k = i + 1;
            match r? {
                (Bound::Finite(b), Some(row)) => {
                    grades.push(b);
                    table.push(row);
                }
                (
                    Bound::Diverges {
                        n,
                        log_ratio,
                        log_ratio_half,
                    },
                    _,
                ) => {
                    refuting.push((m, k, n, log_ratio, log_ratio_half));
                    failed = true;
                    break;
                }
                (Bound::Unknown(why), _) => {
                    undecided.get_or_insert(format!("m={m}, k={k}: {why}"));
                    failed = true;
                    break;
                }
                (Bound::Finite(_), None) => unreachable!("finite bounds carry a row"),
            }
        }
        if !failed {
            return Ok(Verdict::Certified(CompactnessWitness {
                m,
                grades,
                all_grades: limit_bound.is_some() || theta.is_zero(),
                grades_checked,
                montel_assumed: target.is_montel(),
                ratio_table: table,
                nuclear_target: ctx.nuclear_target,
            }));
        }
    }
    if refuting.len() == policy.m_max {
        let &(m, k, n, log_ratio, log_ratio_half) = refuting.last().expect("m_max > 0");
        let mut c = Counterexample::new(format!(
            "every m ≤ {} has a grade k whose ratio lower bound |θ_n| b(n,k) / a(n,m) tends to ∞",
            policy.m_max
        ))
        .index("m", m)
        .index("k", k)
        .index("n", n)
        .index("n_half", (n / 2).max(1))
        .value("log_ratio", log_ratio)
        .value("log_ratio_half", log_ratio_half);
        for &(m, k, _, _, _) in &refuting {
            c = c.index(&format!("k_for_m{m}"), k);
        }
        return Ok(Verdict::Refuted(c));
    }
    let why = undecided.unwrap_or_else(|| "no single m certified".into());
    let mut diag = Diagnostics::new(why);
    for m in 1..=policy.m_max {
        let (row, _) = ctx.truncated_row(policy.k_max, m)?;
        diag = diag.value(
            &format!("log_truncated_sup_k{}_m{m}", policy.k_max),
            row.log_max_ratio,
        );
    }
    Ok(Verdict::Inconclusive(diag))
}

/// For nuclear finite-type targets over finite-type sources the sup-form
/// ratio increases in `k` towards `sup_j ln|θ_j| - ln a(j,m)`; a finite
/// value bounds every grade at once.
fn grade_limit_bound(ctx: &RatioContext<'_>, m: usize) -> Option<f64> {
    if !(ctx.nuclear_target && ctx.target.is_finite_type() && ctx.source.is_finite_type()) {
        return None;
    }
    let p = ctx
        .theta
        .log_abs_profile()?
        .sub(&ctx.source.log_profile(m)?);
    p.sup_from(1).map(|s| s.value)
}

/// On nuclear `Λ₁(α)`, `R_θ` is compact iff `θ` lies in the dual.
pub fn dual_compactness_test(
    theta: &CoefficientSequence,
    alpha: &ExponentSequence,
    policy: &TruncationPolicy,
) -> Result<Verdict<DualWitness>> {
    if !nuclearity_power_series(alpha, PowerSeriesType::Finite, policy)?.is_certified() {
        return Err(Error::HypothesisViolated(format!(
            "Λ₁({}) is not certified nuclear",
            alpha.describe()
        )));
    }
    dual_membership(theta, &WeightGrid::finite_type(alpha.clone()), policy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantifierOrder {
    ForAllKExistsM,
    ExistsMForAllK,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationPair {
    pub k: usize,
    pub m: usize,
    /// `C` with `lhs_k(n) ≤ C a(n,m)` for all `n`.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationWitness {
    pub mode: QuantifierOrder,
    pub pairs: Vec<DominationPair>,
    /// The certified `m` covers every `k` analytically.
    pub all_grades: bool,
}

/// Left-hand side `ln e^{-kβ_n}` (infinite) or `ln e^{-β_n/k}` (finite).
fn domination_lhs(beta: &ExponentSequence, kind: PowerSeriesType, k: usize) -> Option<LogProfile> {
    let b = beta.profile()?;
    Some(match kind {
        PowerSeriesType::Infinite => b.scale(-(k as f64)),
        PowerSeriesType::Finite => b.scale(-1.0 / k as f64),
    })
}

fn domination_lhs_value(beta: &ExponentSequence, kind: PowerSeriesType, k: usize, n: usize) -> f64 {
    match kind {
        PowerSeriesType::Infinite => -(k as f64) * beta.value(n),
        PowerSeriesType::Finite => -beta.value(n) / k as f64,
    }
}

enum Dom {
    Holds(f64),
    Fails { n: usize, log_gap: f64 },
    Unknown,
}

fn domination_pair(
    beta: &ExponentSequence,
    grid: &WeightGrid,
    kind: PowerSeriesType,
    k: usize,
    m: usize,
    policy: &TruncationPolicy,
) -> Dom {
    let (Some(l), Some(a)) = (domination_lhs(beta, kind, k), grid.log_profile(m)) else {
        return Dom::Unknown;
    };
    let d = l.sub(&a);
    if d.limit() == Limit::PosInf {
        let (n, v) = d.argmax_upto(policy.n_max);
        return Dom::Fails { n, log_gap: v };
    }
    match d.sup_from(1) {
        Some(s) => {
            let ok = (1..=policy.n_max).all(|n| {
                domination_lhs_value(beta, kind, k, n) - grid.log_weight(n, m)
                    <= s.value + slack(s.value, policy.tol)
            });
            if ok {
                Dom::Holds(s.value)
            } else {
                Dom::Unknown
            }
        }
        None => Dom::Unknown,
    }
}

/// Grade-limit bound for `ExistsMForAllK`: the left side is monotone in `k`.
fn domination_all_grades(
    beta: &ExponentSequence,
    grid: &WeightGrid,
    kind: PowerSeriesType,
    m: usize,
    policy: &TruncationPolicy,
) -> Option<f64> {
    let a = grid.log_profile(m)?;
    let worst = match kind {
        // e^{-β_n/k} ↑ 1
        PowerSeriesType::Finite => LogProfile::zero(),
        // e^{-kβ_n} is largest at k = 1
        PowerSeriesType::Infinite => domination_lhs(beta, kind, 1)?,
    };
    let s = worst.sub(&a).sup_from(1)?;
    let ok = (1..=policy.n_max).all(|n| {
        let lhs = match kind {
            PowerSeriesType::Finite => 0.0,
            PowerSeriesType::Infinite => -beta.value(n),
        };
        lhs - grid.log_weight(n, m) <= s.value + slack(s.value, policy.tol)
    });
    ok.then_some(s.value)
}

/// Searches `(m, C)` for the domination conditions `e^{-kβ_n} ≤ C a(n,m)`
/// (infinite) or `e^{-β_n/k} ≤ C a(n,m)` (finite) in either quantifier order.
pub fn domination_check(
    beta: &ExponentSequence,
    grid: &WeightGrid,
    mode: QuantifierOrder,
    kind: PowerSeriesType,
    policy: &TruncationPolicy,
) -> Result<Verdict<DominationWitness>> {
    policy.validate()?;
    let unknown_diag = |why: &str| {
        let mut d = Diagnostics::new(why.to_string());
        // pointwise satisfiability on 1..=N says nothing about the tail
        for m in 1..=policy.m_max.min(4) {
            let sup = (1..=policy.n_max)
                .map(|n| domination_lhs_value(beta, kind, policy.k_max, n) - grid.log_weight(n, m))
                .fold(f64::NEG_INFINITY, f64::max);
            d = d.value(&format!("log_truncated_C_k{}_m{m}", policy.k_max), sup);
        }
        d
    };
    match mode {
        QuantifierOrder::ForAllKExistsM => {
            let mut pairs = Vec::with_capacity(policy.k_max);
            for k in 1..=policy.k_max {
                let mut all_fail = true;
                let mut last_fail = None;
                let mut found = None;
                for m in 1..=policy.m_max {
                    match domination_pair(beta, grid, kind, k, m, policy) {
                        Dom::Holds(c) => {
                            found = Some(DominationPair {
                                k,
                                m,
                                constant: c.exp(),
                            });
                            break;
                        }
                        Dom::Fails { n, log_gap } => last_fail = Some((n, log_gap)),
                        Dom::Unknown => all_fail = false,
                    }
                }
                match (found, last_fail) {
                    (Some(p), _) => pairs.push(p),
                    (None, Some((n, log_gap))) if all_fail => {
                        return Ok(Verdict::Refuted(
                            Counterexample::new(format!(
                                "k={k}: the domination gap tends to ∞ for every m"
                            ))
                            .index("k", k)
                            .index("m", policy.m_max)
                            .index("n", n)
                            .value("log_gap", log_gap),
                        ))
                    }
                    _ => {
                        return Ok(Verdict::Inconclusive(unknown_diag(
                            "no closed-form certificate",
                        )))
                    }
                }
            }
            Ok(Verdict::Certified(DominationWitness {
                mode,
                pairs,
                all_grades: false,
            }))
        }
        QuantifierOrder::ExistsMForAllK => {
            let mut refuted_ms = Vec::new();
            for m in 1..=policy.m_max {
                if let Some(c) = domination_all_grades(beta, grid, kind, m, policy) {
                    let pairs = (1..=policy.k_max)
                        .map(|k| DominationPair {
                            k,
                            m,
                            constant: c.exp(),
                        })
                        .collect();
                    return Ok(Verdict::Certified(DominationWitness {
                        mode,
                        pairs,
                        all_grades: true,
                    }));
                }
                let ks = policy.k_max.max(2 * m);
                let failing =
                    (1..=ks).find_map(|k| match domination_pair(beta, grid, kind, k, m, policy) {
                        Dom::Fails { n, log_gap } => Some((m, k, n, log_gap)),
                        _ => None,
                    });
                match failing {
                    Some(f) => refuted_ms.push(f),
                    None => {
                        return Ok(Verdict::Inconclusive(unknown_diag(
                            "no grade-uniform certificate",
                        )))
                    }
                }
            }
            let &(m, k, n, log_gap) = refuted_ms.last().expect("m_max > 0");
            let mut c = Counterexample::new("every m has a grade whose domination gap tends to ∞")
                .index("m", m)
                .index("k", k)
                .index("n", n)
                .value("log_gap", log_gap);
            for &(m, k, _, _) in &refuted_ms {
                c = c.index(&format!("k_for_m{m}"), k);
            }
            Ok(Verdict::Refuted(c))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftBound {
    pub a: f64,
    pub b: f64,
}

/// Growth order `(γ, log coefficient)`: leading positive power, else `ln n`.
fn growth_order(p: &LogProfile) -> (f64, f64) {
    match p.leading_power() {
        Some((g, c)) if c > 0.0 => (g, 0.0),
        _ => (0.0, p.log_coefficient().max(0.0)),
    }
}

/// `α_n ≤ A β_n + B` for all `n`.
pub fn shift_bound_search(
    alpha: &ExponentSequence,
    beta: &ExponentSequence,
    policy: &TruncationPolicy,
) -> Result<Verdict<ShiftBound>> {
    policy.validate()?;
    if let (Some(pa), Some(pb)) = (alpha.profile(), beta.profile()) {
        let (ga, la) = growth_order(&pa);
        let (gb, lb) = growth_order(&pb);
        let dominates = ga > gb || (ga == 0.0 && gb == 0.0 && la > 0.0 && lb == 0.0);
        if dominates {
            let n = policy.n_max;
            return Ok(Verdict::Refuted(
                Counterexample::new("α grows strictly faster than β: α_n - Aβ_n → ∞ for every A")
                    .index("n", n)
                    .value("alpha_n", alpha.value(n))
                    .value("beta_n", beta.value(n)),
            ));
        }
        let lead_ratio = match (pa.leading_power(), pb.leading_power()) {
            (Some((g1, c1)), Some((g2, c2))) if g1 == g2 && c1 > 0.0 && c2 > 0.0 => Some(c1 / c2),
            _ if ga == 0.0 && gb == 0.0 && la > 0.0 && lb > 0.0 => Some(la / lb),
            _ => None,
        };
        let mut candidates: Vec<f64> = lead_ratio.into_iter().collect();
        candidates.extend((0..31).map(|i| 2f64.powi(i)));
        for a in candidates {
            let d = pa.sub(&pb.scale(a));
            if let Some(s) = d.sup_from(1) {
                let b = s.value;
                let ok = (1..=policy.n_max)
                    .all(|n| alpha.value(n) <= a * beta.value(n) + b + slack(b, policy.tol));
                if ok {
                    return Ok(Verdict::Certified(ShiftBound { a, b }));
                }
            }
        }
        return Ok(Verdict::Inconclusive(Diagnostics::new(
            "no A up to 2^30 gave a certified supremum",
        )));
    }
    let n_max = policy.n_max;
    let a_fit = (n_max / 2..=n_max)
        .filter(|&n| beta.value(n) > 0.0)
        .map(|n| alpha.value(n) / beta.value(n))
        .fold(0.0, f64::max);
    let gaps: Vec<f64> = (1..=n_max)
        .map(|n| alpha.value(n) - a_fit * beta.value(n))
        .collect();
    let b_fit = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = gaps.iter().map(|g| g - b_fit + 1.0).collect();
    Ok(Verdict::Inconclusive(
        Diagnostics::new("custom sequences: (A, B) fitted on the truncation only")
            .with_trend(TrendSummary::of(&shifted, policy.growth_window))
            .value("a_fit", a_fit)
            .value("b_fit", b_fit),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lambda1() -> WeightGrid {
        WeightGrid::finite_type(ExponentSequence::linear(1.0))
    }

    fn lambda_inf() -> WeightGrid {
        WeightGrid::infinite_type(ExponentSequence::linear(1.0))
    }

    fn half_exp() -> CoefficientSequence {
        CoefficientSequence::exp_of_exponent(1.0, 2.0, ExponentSequence::linear(1.0))
    }

    #[test]
    fn continuity_of_cesaro_on_lambda1() {
        let p = TruncationPolicy::default();
        let v = continuity_witness(
            &CoefficientSequence::reciprocal(),
            &lambda1(),
            &lambda1(),
            &p,
        )
        .unwrap();
        let w = v.witness().expect("certified");
        for g in &w.grades {
            assert_eq!(g.m, g.k, "sup-form needs exactly m = k");
        }
        assert!(w.nuclear_target);
    }

    #[test]
    fn continuity_of_half_exp_and_zero() {
        let p = TruncationPolicy::default();
        let v = continuity_witness(&half_exp(), &lambda1(), &lambda1(), &p).unwrap();
        assert!(v.is_certified());
        let z =
            continuity_witness(&CoefficientSequence::zero(), &lambda1(), &lambda1(), &p).unwrap();
        assert!(z
            .witness()
            .unwrap()
            .grades
            .iter()
            .all(|g| g.constant == 0.0));
    }

    #[test]
    fn theta_outside_target_is_an_error() {
        let p = TruncationPolicy::default();
        let e = continuity_witness(
            &CoefficientSequence::geometric(1.0, 2.0),
            &lambda_inf(),
            &lambda_inf(),
            &p,
        )
        .unwrap_err();
        assert!(matches!(e, Error::ThetaNotInTarget(_)));
    }

    #[test]
    fn compactness_examples() {
        let p = TruncationPolicy::default();
        let c = compactness_witness(&half_exp(), &lambda1(), &lambda1(), &p).unwrap();
        let w = c.witness().expect("certified");
        assert_eq!(w.m, 2);
        assert!(w.all_grades);
        assert!(w.grades.iter().all(|g| g.constant <= 1.0 + 1e-12));
        let r = compactness_witness(
            &CoefficientSequence::reciprocal(),
            &lambda1(),
            &lambda1(),
            &p,
        )
        .unwrap();
        let ce = r.counterexample().expect("refuted");
        assert_eq!(ce.indices["k_for_m1"], 2);
        assert_eq!(
            ce.indices["k"],
            ce.indices["m"] + 1,
            "smallest diverging grade"
        );
    }

    #[test]
    fn compactness_on_lambda_infinity_uses_m_one() {
        let p = TruncationPolicy::default();
        let theta =
            CoefficientSequence::exp_of_exponent(1.0, 1.0, ExponentSequence::power(1.0, 2.0));
        let c = compactness_witness(&theta, &lambda_inf(), &lambda_inf(), &p).unwrap();
        let w = c.witness().expect("certified");
        assert_eq!(w.m, 1);
        for g in &w.grades {
            assert_eq!(g.route, BoundRoute::SourceInfimum);
            let norm =
                crate::koethe::seminorm(&theta, &lambda_inf(), g.k.min(p.k_max), &p).unwrap();
            if g.k <= p.k_max {
                assert!(
                    (g.constant - norm.upper().unwrap() / 1f64.exp()).abs() <= 1e-12 * g.constant
                );
            }
        }
    }

    #[test]
    fn dual_compactness_examples() {
        let p = TruncationPolicy::default();
        let lin = ExponentSequence::linear(1.0);
        assert_eq!(
            dual_compactness_test(&half_exp(), &lin, &p)
                .unwrap()
                .witness()
                .unwrap()
                .k,
            2
        );
        assert!(
            dual_compactness_test(&CoefficientSequence::reciprocal(), &lin, &p)
                .unwrap()
                .is_refuted()
        );
        assert!(
            dual_compactness_test(&CoefficientSequence::unit(1), &lin, &p)
                .unwrap()
                .is_certified()
        );
        assert!(matches!(
            dual_compactness_test(&half_exp(), &ExponentSequence::log(), &p),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn domination_examples() {
        let p = TruncationPolicy::default();
        let beta = ExponentSequence::linear(1.0);
        let v = domination_check(
            &beta,
            &lambda1(),
            QuantifierOrder::ForAllKExistsM,
            PowerSeriesType::Finite,
            &p,
        )
        .unwrap();
        let w = v.witness().unwrap();
        for pair in &w.pairs {
            assert_eq!(pair.m, pair.k);
            assert!((pair.constant - 1.0).abs() < 1e-12);
        }
        let flat = WeightGrid::grade_independent("e^-n", false, LogProfile::linear(-1.0));
        let r = domination_check(
            &beta,
            &flat,
            QuantifierOrder::ExistsMForAllK,
            PowerSeriesType::Finite,
            &p,
        )
        .unwrap();
        assert!(r.counterexample().unwrap().indices["k"] > 1);
        let custom = ExponentSequence::custom("n", |n| n as f64);
        let i = domination_check(
            &custom,
            &lambda1(),
            QuantifierOrder::ForAllKExistsM,
            PowerSeriesType::Finite,
            &p,
        )
        .unwrap();
        assert!(matches!(i, Verdict::Inconclusive(_)));
    }

    #[test]
    fn shift_bound_examples() {
        let p = TruncationPolicy::default();
        let n = ExponentSequence::linear(1.0);
        let same = *shift_bound_search(&n, &n, &p).unwrap().witness().unwrap();
        assert_eq!((same.a, same.b), (1.0, 0.0));
        let s = *shift_bound_search(
            &ExponentSequence::linear(2.0),
            &ExponentSequence::power(1.0, 2.0),
            &p,
        )
        .unwrap()
        .witness()
        .unwrap();
        assert_eq!((s.a, s.b), (1.0, 1.0));
        assert!(
            shift_bound_search(&ExponentSequence::power(1.0, 2.0), &n, &p)
                .unwrap()
                .is_refuted()
        );
    }
}
