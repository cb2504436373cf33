//! Power boundedness, (m-)topologizability, Cesàro boundedness and ergodic
//! behaviour of `R_θ` on power series spaces.
//!
//! Orbits `R^k e_n` are computed exactly on `1..=N` (lower triangular) and
//! their norms closed with a tail bound: every entry beyond `N` satisfies
//! `|(R^k e_n)_m| ≤ |θ_m| S^{k-1}` with `S = Σ |θ_j|`, because prefix sums of
//! a vector never exceed its unweighted `ℓ¹` norm and `‖R x‖_{ℓ¹} ≤ S ‖x‖_{ℓ¹}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::koethe::seminorm::{log_sum_exp, seminorm_any_grade};
use crate::koethe::{
    membership, nuclearity_power_series, weight_infimum, CoefficientSequence, Counterexample,
    Diagnostics, ExponentSequence, GridKind, PowerSeriesType, TailBound, TrendClass, TrendSummary,
    TruncationPolicy, Verdict, WeightGrid, WeightInfimum,
};
use crate::profile::LogProfile;
use crate::rhaly::{apply_values, CesaroMeanState};

/// Box of `(k, n, p)` triples a certificate is rechecked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerBox {
    /// Powers `k = 1..=powers`.
    pub powers: usize,
    /// Basis vectors `e_n`, `n = 1..=indices`.
    pub indices: usize,
    /// Grades `p = 1..=grades`.
    pub grades: usize,
}

impl Default for PowerBox {
    fn default() -> Self {
        PowerBox {
            powers: 32,
            indices: 50,
            grades: 4,
        }
    }
}

impl PowerBox {
    pub fn new(powers: usize, indices: usize, grades: usize) -> Self {
        PowerBox {
            powers,
            indices,
            grades,
        }
    }

    fn validate(&self, policy: &TruncationPolicy) -> Result<()> {
        if self.powers == 0 || self.indices == 0 || self.grades == 0 {
            return Err(Error::InvalidArgument(
                "box dimensions must be positive".into(),
            ));
        }
        if self.indices > policy.n_max {
            return Err(Error::InvalidArgument(format!(
                "box index range {} exceeds N = {}",
                self.indices, policy.n_max
            )));
        }
        Ok(())
    }
}

fn ones_grid() -> WeightGrid {
    WeightGrid::grade_independent("unweighted", false, LogProfile::zero())
}

/// Unweighted `Σ |θ_n|` with tail.
fn l1_total(theta: &CoefficientSequence, n_max: usize) -> Result<(f64, Option<f64>)> {
    let v = seminorm_any_grade(theta, &ones_grid(), 1, n_max)?;
    Ok((v.partial, v.upper()))
}

/// `ln Σ_m |v_m| a(m,p)` over the stored entries.
pub(crate) fn log_l1(v: &[f64], grid: &WeightGrid, p: usize) -> f64 {
    log_sum_exp(
        v.iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, x)| x.abs().ln() + grid.log_weight(i + 1, p)),
    )
}

fn log_sup(v: &[f64], grid: &WeightGrid, p: usize) -> f64 {
    v.iter()
        .enumerate()
        .filter(|(_, x)| **x != 0.0)
        .map(|(i, x)| x.abs().ln() + grid.log_weight(i + 1, p))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    L1,
    Sup,
}

/// `ln ‖R^k e_n‖_p` over a box, flattened as `[n][k][p]`.
struct OrbitTable {
    bx: PowerBox,
    log_norms: Vec<f64>,
    tail_certified: bool,
}

impl OrbitTable {
    fn get(&self, n: usize, k: usize, p: usize) -> f64 {
        let b = self.bx;
        self.log_norms[((n - 1) * b.powers + (k - 1)) * b.grades + (p - 1)]
    }

    fn build(
        theta: &CoefficientSequence,
        grid: &WeightGrid,
        policy: &TruncationPolicy,
        bx: PowerBox,
        form: Form,
    ) -> Result<Self> {
        bx.validate(policy)?;
        let n_max = policy.n_max;
        let thetas = theta.truncate(n_max);
        let (_, s_upper) = l1_total(theta, n_max)?;
        // beyond-N factor per grade: Σ_{m>N} |θ_m| a(m,p) or sup_{m>N}
        let mut beyond = Vec::with_capacity(bx.grades);
        let mut certified = s_upper.is_some();
        for p in 1..=bx.grades {
            let b = if theta.support_end().is_some_and(|e| e <= n_max) {
                Some(f64::NEG_INFINITY)
            } else {
                match form {
                    Form::L1 => match theta.tail_bound(n_max, grid, p) {
                        TailBound::Exact => Some(f64::NEG_INFINITY),
                        TailBound::Bound(t) => Some(t.ln()),
                        TailBound::Unavailable => None,
                    },
                    Form::Sup => match (theta.log_abs_profile(), grid.log_profile(p)) {
                        (Some(t), Some(w)) => t.add(&w).sup_from(n_max + 1).map(|s| s.value),
                        _ => None,
                    },
                }
            };
            certified &= b.is_some();
            beyond.push(b.unwrap_or(f64::NEG_INFINITY));
        }
        let log_s = s_upper.map_or(0.0, f64::ln);
        let rows: Vec<Vec<f64>> = (1..=bx.indices)
            .into_par_iter()
            .map(|n| {
                let mut v = vec![0.0; n_max];
                v[n - 1] = 1.0;
                let mut out = Vec::with_capacity(bx.powers * bx.grades);
                for k in 1..=bx.powers {
                    v = apply_values(&thetas, &v);
                    for (pi, b) in beyond.iter().enumerate() {
                        let p = pi + 1;
                        let tail = b + (k - 1) as f64 * log_s;
                        out.push(match form {
                            Form::L1 => log_sum_exp([log_l1(&v, grid, p), tail]),
                            Form::Sup => log_sup(&v, grid, p).max(tail),
                        });
                    }
                }
                out
            })
            .collect();
        Ok(OrbitTable {
            bx,
            log_norms: rows.concat(),
            tail_certified: certified,
        })
    }

    /// Largest `ln ‖R^k e_n‖_p - ln rhs(n, k, p)` over the box, with its triple.
    fn max_margin(&self, rhs: impl Fn(usize, usize, usize) -> f64) -> (f64, (usize, usize, usize)) {
        let b = self.bx;
        let mut best = (f64::NEG_INFINITY, (1, 1, 1));
        for n in 1..=b.indices {
            for k in 1..=b.powers {
                for p in 1..=b.grades {
                    let lhs = self.get(n, k, p);
                    if lhs == f64::NEG_INFINITY {
                        continue;
                    }
                    let d = lhs - rhs(n, k, p);
                    if d > best.0 || d.is_nan() {
                        best = (d, (n, k, p));
                    }
                }
            }
        }
        best
    }
}

fn margin_ok(margin: f64, tol: f64) -> bool {
    margin <= tol.max(1e-12)
}

/// `sup_p ‖θ‖_p` on `Λ₁(α)`: the `ℓ¹` sum, reached as `p → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupGradeValue {
    pub partial: f64,
    /// Partial sum plus tail, `None` when no tail bound exists.
    pub upper: Option<f64>,
    pub exact: bool,
}

pub fn sup_grade_seminorm(
    theta: &CoefficientSequence,
    alpha: &ExponentSequence,
    policy: &TruncationPolicy,
) -> Result<SupGradeValue> {
    let grid = WeightGrid::finite_type(alpha.clone());
    if let Verdict::Refuted(c) = membership(theta, &grid, policy)? {
        return Err(Error::ThetaNotInTarget(c.reason));
    }
    let (partial, upper) = l1_total(theta, policy.n_max)?;
    Ok(SupGradeValue {
        partial,
        upper,
        exact: theta.support_end().is_some_and(|e| e <= policy.n_max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerRule {
    /// `q = 3p`
    FiniteTypeRule,
    /// `q = q_p + q_1`
    InfiniteTypeRule,
    /// Smallest `q` passing the box; no construction backs it.
    Searched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradePair {
    pub p: usize,
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundWitness {
    pub rule: PowerRule,
    pub pairs: Vec<GradePair>,
    /// `q_p = ⌈ln⁺ ‖θ‖_p / α_1⌉` (infinite type), indexed by `p - 1`.
    pub q_p: Vec<usize>,
    /// `Σ |θ_n|` sits within tolerance of 1.
    pub boundary: bool,
    pub sup_grade: Option<f64>,
    pub powerbox: PowerBox,
    /// Largest `ln ‖R^k e_n‖_p - ln ‖e_n‖_q` on the box (≤ 0).
    pub max_log_margin: f64,
    pub tail_certified: bool,
}

/// Witness for `‖R^k e_n‖_p ≤ ‖e_n‖_q` over all powers.
pub fn power_bound_witness(
    theta: &CoefficientSequence,
    space: &WeightGrid,
    policy: &TruncationPolicy,
    bx: PowerBox,
) -> Result<Verdict<PowerBoundWitness>> {
    policy.validate()?;
    bx.validate(policy)?;
    match space.kind() {
        GridKind::FiniteTypePower(alpha) => {
            finite_type_power_bound(theta, space, alpha, policy, bx)
        }
        GridKind::InfiniteTypePower(alpha) => {
            infinite_type_power_bound(theta, space, alpha, policy, bx)
        }
        GridKind::General => searched_power_bound(theta, space, policy, bx),
    }
}

/// Smallest `p` with truncated `‖θ‖_p > 1 ≥ sup_q ‖e_1‖_q` on `Λ₁(α)`.
fn necessary_condition_failure(
    theta: &CoefficientSequence,
    space: &WeightGrid,
    n_max: usize,
) -> Option<(usize, f64)> {
    (1..=1024).find_map(|p| {
        let v = log_l1(&theta.truncate(n_max), space, p);
        (v > 0.0).then_some((p, v))
    })
}

fn finite_type_power_bound(
    theta: &CoefficientSequence,
    space: &WeightGrid,
    alpha: &ExponentSequence,
    policy: &TruncationPolicy,
    bx: PowerBox,
) -> Result<Verdict<PowerBoundWitness>> {
    let (partial, upper) = l1_total(theta, policy.n_max)?;
    if let Some(s) = upper {
        if s <= 1.0 + policy.tol {
            let table = OrbitTable::build(theta, space, policy, bx, Form::L1)?;
            let (margin, (n, k, p)) = table.max_margin(|n, _, p| space.log_weight(n, 3 * p));
            if margin_ok(margin, policy.tol) {
                return Ok(Verdict::Certified(PowerBoundWitness {
                    rule: PowerRule::FiniteTypeRule,
                    pairs: (1..=bx.grades).map(|p| GradePair { p, q: 3 * p }).collect(),
                    q_p: Vec::new(),
                    boundary: (s - 1.0).abs() <= policy.tol,
                    sup_grade: Some(s),
                    powerbox: bx,
                    max_log_margin: margin,
                    tail_certified: table.tail_certified,
                }));
            }
            return Ok(Verdict::Inconclusive(
                Diagnostics::new(format!(
                    "q = 3p box recheck failed at (n={n}, k={k}, p={p})"
                ))
                .value("log_margin", margin)
                .value("sup_grade", s),
            ));
        }
    }
    if let Some((p, log_norm)) = necessary_condition_failure(theta, space, policy.n_max) {
        let mut c = Counterexample::new(format!(
            "‖R e_1‖_{p} = ‖θ‖_{p} > 1 ≥ ‖e_1‖_q for every q: no q bounds the first power"
        ))
        .index("k", 1)
        .index("n", 1)
        .index("p", p)
        .index("q_from", 1)
        .index("q_to", policy.m_max)
        .value("log_norm", log_norm)
        .value("sum_abs_theta", partial);
        if let Some((k, n, log_orbit, log_lower)) =
            orbit_growth(theta, space, alpha, policy, bx.powers)
        {
            c = c
                .index("k_growth", k)
                .index("n_growth", n)
                .value("log_orbit_norm", log_orbit)
                .value("log_diagonal_lower_bound", log_lower);
        }
        return Ok(Verdict::Refuted(c));
    }
    Ok(Verdict::Inconclusive(
        Diagnostics::new("Σ |θ_n| not certified ≤ 1 and no grade violates the necessary condition")
            .value("sum_abs_theta_partial", partial)
            .value("sum_abs_theta_upper", upper.unwrap_or(f64::NAN)),
    ))
}

/// Smallest `k` with `‖R^k e_n‖_1 > 1` at the index of the largest `|θ_n| > 1`;
/// `(R^k e_n)_n = θ_n^k` gives the lower bound `k ln|θ_n| - α_n`.
fn orbit_growth(
    theta: &CoefficientSequence,
    space: &WeightGrid,
    alpha: &ExponentSequence,
    policy: &TruncationPolicy,
    powers: usize,
) -> Option<(usize, usize, f64, f64)> {
    let thetas = theta.truncate(policy.n_max);
    let (i, t) = thetas.iter().enumerate().fold((0, 0.0f64), |acc, (i, t)| {
        if t.abs() > acc.1 {
            (i, t.abs())
        } else {
            acc
        }
    });
    if t <= 1.0 {
        return None;
    }
    let n = i + 1;
    let mut v = vec![0.0; policy.n_max];
    v[n - 1] = 1.0;
    for k in 1..=powers.max(64) {
        v = apply_values(&thetas, &v);
        let log_norm = log_l1(&v, space, 1);
        if log_norm > 0.0 {
            return Some((k, n, log_norm, k as f64 * t.ln() - alpha.value(n)));
        }
    }
    None
}

fn infinite_type_power_bound(
    theta: &CoefficientSequence,
    space: &WeightGrid,
    alpha: &ExponentSequence,
    policy: &TruncationPolicy,
    bx: PowerBox,
) -> Result<Verdict<PowerBoundWitness>> {
    let a1 = alpha.value(1);
    if a1 <= 0.0 {
        return Err(Error::HypothesisViolated(
            "the q_p rule needs α_1 > 0".into(),
        ));
    }
    let mut q_p = Vec::with_capacity(bx.grades);
    let mut tails = true;
    for p in 1..=bx.grades {
        let v = seminorm_any_grade(theta, space, p, policy.n_max)?;
        let log_norm = match v.upper() {
            Some(u) => u.ln(),
            None => {
                tails = false;
                v.log_partial
            }
        };
        q_p.push((log_norm.max(0.0) / a1).ceil() as usize);
    }
    let q1 = q_p[0];
    let pairs: Vec<GradePair> = (1..=bx.grades)
        .map(|p| GradePair {
            p,
            q: q_p[p - 1] + q1,
        })
        .collect();
    let table = OrbitTable::build(theta, space, policy, bx, Form::L1)?;
    let (margin, (n, k, p)) = table.max_margin(|n, _, p| space.log_weight(n, pairs[p - 1].q));
    if margin_ok(margin, policy.tol) {
        return Ok(Verdict::Certified(PowerBoundWitness {
            rule: PowerRule::InfiniteTypeRule,
            pairs,
            q_p,
            boundary: false,
            sup_grade: None,
            powerbox: bx,
            max_log_margin: margin,
            tail_certified: tails && table.tail_certified,
        }));
    }
    // (R^k e_n)_n = θ_n^k: any |θ_n| > 1 defeats every q
    let thetas = theta.truncate(policy.n_max);
    if let Some(i) = thetas.iter().position(|t| t.abs() > 1.0) {
        let n = i + 1;
        let lt = thetas[i].abs().ln();
        let mut c = Counterexample::new(format!(
            "|θ_{n}| > 1: (R^k e_{n})_{n} = θ_{n}^k outgrows ‖e_{n}‖_q for every q"
        ))
        .index("n", n)
        .index("p", 1)
        .value("log_abs_theta_n", lt);
        for q in 1..=policy.m_max {
            // smallest k with k ln|θ_n| + α_n > q α_n
            let k = ((q as f64 - 1.0) * alpha.value(n) / lt).floor() as usize + 1;
            c = c.index(&format!("k_for_q{q}"), k);
        }
        return Ok(Verdict::Refuted(c));
    }
    Ok(Verdict::Inconclusive(
        Diagnostics::new(format!(
            "q_p + q_1 box recheck failed at (n={n}, k={k}, p={p})"
        ))
        .value("log_margin", margin),
    ))
}

fn searched_power_bound(
    theta: &CoefficientSequence,
    space: &WeightGrid,
    policy: &TruncationPolicy,
    bx: PowerBox,
) -> Result<Verdict<PowerBoundWitness>> {
    let table = OrbitTable::build(theta, space, policy, bx, Form::L1)?;
    let mut diag = Diagnostics::new(
        "general grid: no construction for q; the smallest box-passing q is reported but not certified",
    );
    for p in 1..=bx.grades {
        let q = (1..=policy.m_max).find(|&q| {
            let mut worst = f64::NEG_INFINITY;
            for n in 1..=bx.indices {
                for k in 1..=bx.powers {
                    worst = worst.max(table.get(n, k, p) - space.log_weight(n, q));
                }
            }
            margin_ok(worst, policy.tol)
        });
        diag = diag.value(
            &format!("searched_q_p{p}"),
            q.map_or(f64::INFINITY, |q| q as f64),
        );
    }
    Ok(Verdict::Inconclusive(diag))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitBoundRow {
    pub k: usize,
    pub p: usize,
    /// `M_{k,p} = (‖θ‖_{3pk})^k`, sup form.
    pub m_kp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitBoundWitness {
    pub powerbox: PowerBox,
    pub max_log_margin: f64,
    pub constants: Vec<OrbitBoundRow>,
    pub nuclear: bool,
    pub tail_certified: bool,
}

/// `‖R^k e_n‖_p ≤ ‖e_n‖_{3p} (‖θ‖_{3pk})^k` with sup-form norms on `Λ₁(α)`.
/// A violation is a bug: the inequality always holds on nuclear spaces.
pub fn orbit_bound_check(
    theta: &CoefficientSequence,
    alpha: &ExponentSequence,
    policy: &TruncationPolicy,
    bx: PowerBox,
) -> Result<Verdict<OrbitBoundWitness>> {
    policy.validate()?;
    let grid = WeightGrid::finite_type(alpha.clone());
    let nuclear = nuclearity_power_series(alpha, PowerSeriesType::Finite, policy)?.is_certified();
    let table = OrbitTable::build(theta, &grid, policy, bx, Form::Sup)?;
    let thetas = theta.truncate(policy.n_max);
    // truncated sup is a lower bound for the right-hand side: conservative
    let mut log_theta_norm = vec![f64::NEG_INFINITY; bx.powers * bx.grades];
    for k in 1..=bx.powers {
        for p in 1..=bx.grades {
            log_theta_norm[(k - 1) * bx.grades + (p - 1)] = log_sup(&thetas, &grid, 3 * p * k);
        }
    }
    let rhs = |n: usize, k: usize, p: usize| {
        grid.log_weight(n, 3 * p) + k as f64 * log_theta_norm[(k - 1) * bx.grades + (p - 1)]
    };
    let (margin, (n, k, p)) = table.max_margin(rhs);
    if margin_ok(margin, policy.tol) {
        let constants = (1..=bx.powers)
            .flat_map(|k| (1..=bx.grades).map(move |p| (k, p)))
            .map(|(k, p)| OrbitBoundRow {
                k,
                p,
                m_kp: (k as f64 * log_theta_norm[(k - 1) * bx.grades + (p - 1)]).exp(),
            })
            .collect();
        return Ok(Verdict::Certified(OrbitBoundWitness {
            powerbox: bx,
            max_log_margin: margin,
            constants,
            nuclear,
            tail_certified: table.tail_certified,
        }));
    }
    Ok(Verdict::Refuted(
        Counterexample::new("inequality chain violated on the box")
            .index("n", n)
            .index("k", k)
            .index("p", p)
            .value("log_margin", margin)
            .value("log_lhs", table.get(n, k, p))
            .value("log_rhs", rhs(n, k, p)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MTopRoute {
    /// `inf_n a(n,m0) > 0`, `C_p = max(D_p, D_{m0})`.
    SourceInfimum { m0: usize },
    /// `sup_p ‖θ‖_p < ∞` on `Λ₁(α)`, `q = 3p`, `C_p = max(sup, 1)`.
    FiniteTypeSup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MTopEntry {
    pub p: usize,
    pub q: usize,
    pub c_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MTopWitness {
    pub route: MTopRoute,
    pub entries: Vec<MTopEntry>,
    pub powerbox: PowerBox,
    pub max_log_margin: f64,
    pub tail_certified: bool,
}

/// `‖R^k e_n‖_p ≤ C_p^k ‖e_n‖_q` for all `k`.
pub fn m_topologizability_witness(
    theta: &CoefficientSequence,
    grid: &WeightGrid,
    policy: &TruncationPolicy,
    bx: PowerBox,
) -> Result<Verdict<MTopWitness>> {
    policy.validate()?;
    bx.validate(policy)?;
    let n_max = policy.n_max;
    let m0 = (1..=policy.m_max).find_map(|m| match weight_infimum(grid, m) {
        WeightInfimum::Positive(l) => Some((m, l)),
        _ => None,
    });
    let (route, entries) = if let Some((m0, log_inf)) = m0 {
        // D_p = ‖θ‖_p / inf_n a(n,m0)
        let d = |p: usize| -> Result<Option<f64>> {
            Ok(seminorm_any_grade(theta, grid, p, n_max)?
                .upper()
                .map(|u| u / log_inf.exp()))
        };
        let Some(d_m0) = d(m0)? else {
            return Ok(Verdict::Inconclusive(Diagnostics::new(
                "‖θ‖_{m0} has no tail bound",
            )));
        };
        let mut entries = Vec::with_capacity(bx.grades);
        for p in 1..=bx.grades {
            let Some(dp) = d(p)? else {
                return Ok(Verdict::Inconclusive(Diagnostics::new(format!(
                    "‖θ‖_{p} has no tail bound"
                ))));
            };
            let c = dp.max(d_m0);
            entries.push(MTopEntry {
                p,
                q: m0,
                c_p: if c > 0.0 { c } else { 1.0 },
            });
        }
        (MTopRoute::SourceInfimum { m0 }, entries)
    } else if grid.is_finite_type() {
        let Some(s) = l1_total(theta, n_max)?.1 else {
            return Ok(Verdict::Inconclusive(Diagnostics::new(
                "Σ |θ_n| has no tail bound",
            )));
        };
        let entries = (1..=bx.grades)
            .map(|p| MTopEntry {
                p,
                q: 3 * p,
                c_p: s.max(1.0),
            })
            .collect();
        (MTopRoute::FiniteTypeSup, entries)
    } else {
        return Ok(Verdict::Inconclusive(Diagnostics::new(
            "no m0 with a certified positive weight infimum",
        )));
    };
    let table = OrbitTable::build(theta, grid, policy, bx, Form::L1)?;
    let (margin, (n, k, p)) = table.max_margin(|n, k, p| {
        let e = &entries[p - 1];
        k as f64 * e.c_p.ln() + grid.log_weight(n, e.q)
    });
    if margin_ok(margin, policy.tol) {
        return Ok(Verdict::Certified(MTopWitness {
            route,
            entries,
            powerbox: bx,
            max_log_margin: margin,
            tail_certified: table.tail_certified,
        }));
    }
    Ok(Verdict::Inconclusive(
        Diagnostics::new(format!("box recheck failed at (n={n}, k={k}, p={p})"))
            .value("log_margin", margin),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CesaroWitness {
    pub pairs: Vec<GradePair>,
    pub powerbox: PowerBox,
    /// Largest `ln ‖T^[k] e_n‖_p - ln ‖e_n‖_q` on the box.
    pub max_log_margin: f64,
}

/// `‖T^[k] e_n‖_p ≤ ‖e_n‖_q` for all `k`.
pub fn cesaro_bounded_check(
    theta: &CoefficientSequence,
    space: &WeightGrid,
    policy: &TruncationPolicy,
    bx: PowerBox,
) -> Result<Verdict<CesaroWitness>> {
    let pb = power_bound_witness(theta, space, policy, bx)?;
    if let Some(w) = pb.witness() {
        // power bounded ⇒ every mean is bounded by the same q; recheck means
        let margin = cesaro_box_margin(theta, space, policy, bx, &w.pairs);
        if margin_ok(margin, policy.tol) {
            return Ok(Verdict::Certified(CesaroWitness {
                pairs: w.pairs.clone(),
                powerbox: bx,
                max_log_margin: margin,
            }));
        }
    }
    if space.is_finite_type() {
        if let Some((p, log_norm)) = necessary_condition_failure(theta, space, policy.n_max) {
            return Ok(Verdict::Refuted(
                Counterexample::new(format!(
                    "‖T^[1] e_1‖_{p} = ‖θ‖_{p} > 1 ≥ ‖e_1‖_q for every q"
                ))
                .index("k", 1)
                .index("n", 1)
                .index("p", p)
                .index("q_from", 1)
                .index("q_to", policy.m_max)
                .value("log_norm", log_norm),
            ));
        }
    }
    let mut diag = Diagnostics::new("not power bounded by a certified rule; box search only");
    for p in 1..=bx.grades {
        let q = (1..=policy.m_max).find(|&q| {
            let pairs: Vec<GradePair> = (1..=bx.grades).map(|pp| GradePair { p: pp, q }).collect();
            margin_ok(
                cesaro_box_margin_grade(theta, space, policy, bx, &pairs, p),
                policy.tol,
            )
        });
        diag = diag.value(
            &format!("searched_q_p{p}"),
            q.map_or(f64::INFINITY, |q| q as f64),
        );
    }
    Ok(Verdict::Inconclusive(diag))
}

fn cesaro_box_margin(
    theta: &CoefficientSequence,
    space: &WeightGrid,
    policy: &TruncationPolicy,
    bx: PowerBox,
    pairs: &[GradePair],
) -> f64 {
    (1..=bx.grades)
        .map(|p| cesaro_box_margin_grade(theta, space, policy, bx, pairs, p))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Truncated means; used only after a power-bound certificate or as a search.
fn cesaro_box_margin_grade(
    theta: &CoefficientSequence,
    space: &WeightGrid,
    policy: &TruncationPolicy,
    bx: PowerBox,
    pairs: &[GradePair],
    p: usize,
) -> f64 {
    let thetas = theta.truncate(policy.n_max);
    let q = pairs[p - 1].q;
    (1..=bx.indices)
        .into_par_iter()
        .map(|n| {
            let mut x = vec![0.0; policy.n_max];
            x[n - 1] = 1.0;
            let mut st = CesaroMeanState::new(x);
            let mut worst = f64::NEG_INFINITY;
            for _ in 0..bx.powers {
                st.step(&thetas);
                worst = worst.max(log_l1(&st.mean(), space, p) - space.log_weight(n, q));
            }
            worst
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitDecayRow {
    pub p: usize,
    /// `ln(‖T^k x‖_p / k)` for `k = 1..=K`.
    pub log_values: Vec<f64>,
    pub trend: Option<TrendSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitDecayReport {
    pub rows: Vec<OrbitDecayRow>,
    /// Worst class over the grades.
    pub class: TrendClass,
}

/// Decay table of `‖T^k x‖_p / k`, classified by log-slope.
pub fn orbit_decay_check(
    theta: &CoefficientSequence,
    x: &CoefficientSequence,
    space: &WeightGrid,
    policy: &TruncationPolicy,
    k_test: usize,
) -> Result<OrbitDecayReport> {
    policy.validate()?;
    let thetas = theta.truncate(policy.n_max);
    let mut v = x.truncate(policy.n_max);
    let mut per_k = Vec::with_capacity(k_test);
    for k in 1..=k_test {
        v = apply_values(&thetas, &v);
        let lk = (k as f64).ln();
        per_k.push(
            (1..=policy.k_max)
                .map(|p| log_l1(&v, space, p) - lk)
                .collect::<Vec<f64>>(),
        );
    }
    let window = policy.growth_window.min(k_test);
    let rows: Vec<OrbitDecayRow> = (1..=policy.k_max)
        .map(|p| {
            let log_values: Vec<f64> = per_k.iter().map(|r| r[p - 1]).collect();
            let trend = TrendSummary::of_logs(&log_values, window);
            OrbitDecayRow {
                p,
                log_values,
                trend,
            }
        })
        .collect();
    let rank = |c: TrendClass| match c {
        TrendClass::Decaying => 0,
        TrendClass::Flat => 1,
        TrendClass::Growing => 2,
    };
    // vanishing orbits have no finite logs and count as decaying
    let class = rows
        .iter()
        .map(|r| r.trend.as_ref().map_or(TrendClass::Decaying, |t| t.class))
        .max_by_key(|c| rank(*c))
        .unwrap_or(TrendClass::Decaying);
    Ok(OrbitDecayReport { rows, class })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementRow {
    pub k: usize,
    /// `‖T^[k] x - T^[k-1] x‖_p` for `p = 1..=k_max`.
    pub increments: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicEstimate {
    pub schedule: Vec<usize>,
    /// `T^[k] x` on `1..=N` at each schedule point.
    pub means: Vec<Vec<f64>>,
    /// Cauchy increments at schedule points `k ≥ 2`.
    pub increments: Vec<IncrementRow>,
    /// Last mean once every increment fell below `tol`.
    pub limit_candidate: Option<Vec<f64>>,
    pub converged_at: Option<usize>,
    /// Power boundedness was certified; otherwise the means may diverge.
    pub power_bounded: bool,
}

/// Geometric schedule `1, 2, 4, …, 1024`.
pub fn default_schedule() -> Vec<usize> {
    (0..=10).map(|i| 1usize << i).collect()
}

/// Cesàro means at schedule points with their Cauchy increments.
pub fn ergodic_projection_estimate(
    theta: &CoefficientSequence,
    x: &CoefficientSequence,
    space: &WeightGrid,
    policy: &TruncationPolicy,
    schedule: &[usize],
) -> Result<ErgodicEstimate> {
    policy.validate()?;
    let mut schedule = schedule.to_vec();
    schedule.sort_unstable();
    schedule.dedup();
    if schedule.first() == Some(&0) {
        return Err(Error::InvalidArgument("schedule points must be ≥ 1".into()));
    }
    let power_bounded = match space.kind() {
        GridKind::General => false,
        _ => power_bound_witness(
            theta,
            space,
            policy,
            PowerBox::new(8, 8.min(policy.n_max), 2),
        )?
        .is_certified(),
    };
    let thetas = theta.truncate(policy.n_max);
    let mut st = CesaroMeanState::new(x.truncate(policy.n_max));
    let mut means = Vec::with_capacity(schedule.len());
    let mut increments = Vec::with_capacity(schedule.len());
    let mut converged_at = None;
    let last = schedule.last().copied().unwrap_or(0);
    let mut next = schedule.iter().peekable();
    for k in 1..=last {
        let prev = st.mean();
        st.step(&thetas);
        if next.peek() == Some(&&k) {
            next.next();
            let mean = st.mean();
            if k >= 2 {
                let diff: Vec<f64> = mean.iter().zip(&prev).map(|(a, b)| a - b).collect();
                let inc: Vec<f64> = (1..=policy.k_max)
                    .map(|p| log_l1(&diff, space, p).exp())
                    .collect();
                if converged_at.is_none() && inc.iter().all(|v| *v < policy.tol) {
                    converged_at = Some(k);
                }
                increments.push(IncrementRow { k, increments: inc });
            }
            means.push(mean);
        }
    }
    let limit_candidate = converged_at.and_then(|_| means.last().cloned());
    Ok(ErgodicEstimate {
        schedule,
        means,
        increments,
        limit_candidate,
        converged_at,
        power_bounded,
    })
}
