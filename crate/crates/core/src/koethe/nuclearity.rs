use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::koethe::seminorm::log_sum_exp;
use crate::koethe::{
    Counterexample, Diagnostics, ExponentFamily, ExponentSequence, GridKind, TrendSummary,
    TruncationPolicy, Verdict, WeightGrid,
};
use crate::profile::Limit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerSeriesType {
    Finite,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuclearityWitness {
    /// `lim ln n / α_n` (finite type: must be 0).
    pub ratio_limit: f64,
    /// `sup_{n ≥ 2} ln n / α_n` (infinite type: must be finite).
    pub ratio_sup: f64,
}

/// `sup_{n≥2} ln n / (c n^γ)`: the map is decreasing past `e^{1/γ}`.
fn power_ratio_sup(c: f64, gamma: f64) -> f64 {
    let turn = (1.0 / gamma).exp().ceil() as usize + 1;
    (2..=turn.max(2))
        .map(|n| (n as f64).ln() / (c * (n as f64).powf(gamma)))
        .fold(0.0, f64::max)
}

/// Nuclearity of `Λ₁(α)` (`ln n / α_n → 0`) or `Λ_∞(α)`
/// (`sup ln n / α_n < ∞`).
pub fn nuclearity_power_series(
    alpha: &ExponentSequence,
    kind: PowerSeriesType,
    policy: &TruncationPolicy,
) -> Result<Verdict<NuclearityWitness>> {
    let closed = match alpha.family() {
        ExponentFamily::Linear { c } if *c > 0.0 => Some((0.0, power_ratio_sup(*c, 1.0))),
        ExponentFamily::Power { c, gamma } if *c > 0.0 && *gamma > 0.0 => {
            Some((0.0, power_ratio_sup(*c, *gamma)))
        }
        // ln n / ln(n+1) increases to 1
        ExponentFamily::Log => Some((1.0, 1.0)),
        // bounded α: the ratio is unbounded
        ExponentFamily::Linear { .. } | ExponentFamily::Power { .. } => {
            Some((f64::INFINITY, f64::INFINITY))
        }
        ExponentFamily::Custom(_) => None,
    };
    if let Some((limit, sup)) = closed {
        let ok = match kind {
            PowerSeriesType::Finite => limit == 0.0,
            PowerSeriesType::Infinite => sup.is_finite(),
        };
        if ok {
            return Ok(Verdict::Certified(NuclearityWitness {
                ratio_limit: limit,
                ratio_sup: sup,
            }));
        }
        let reason = match kind {
            PowerSeriesType::Finite => format!("ln n / α_n → {limit}, not 0"),
            PowerSeriesType::Infinite => "ln n / α_n is unbounded".to_string(),
        };
        let n = policy.n_max;
        let at_n = (n as f64).ln() / alpha.value(n);
        return Ok(Verdict::Refuted(
            Counterexample::new(reason)
                .index("n", n)
                .value("ratio_at_n", at_n)
                .value("ratio_limit", limit),
        ));
    }
    let ratios: Vec<f64> = (2..=policy.n_max)
        .map(|n| {
            let a = alpha.value(n);
            if a <= 0.0 {
                f64::INFINITY
            } else {
                (n as f64).ln() / a
            }
        })
        .collect();
    let last = *ratios.last().expect("N ≥ 16");
    let sup = ratios.iter().copied().fold(0.0, f64::max);
    Ok(Verdict::Inconclusive(
        Diagnostics::new("custom exponent sequence: ln n / α_n judged by trend only")
            .with_trend(TrendSummary::of(&ratios, policy.growth_window))
            .value("ratio_at_N", last)
            .value("truncated_sup", sup),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpPair {
    pub k: usize,
    pub l: usize,
    /// Upper bound on `Σ_n a(n,k) / a(n,l)`.
    pub sum_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpWitness {
    pub pairs: Vec<GpPair>,
}

/// Largest partner grade tried for `k`: `l` must exceed `k`, so the search
/// runs past `k_max` up to `max(m_max, k_max + 1)`.
pub(crate) fn partner_ceiling(policy: &TruncationPolicy) -> usize {
    policy.m_max.max(policy.k_max + 1)
}

/// Grothendieck–Pietsch: for every `k` some `l` with `Σ a(n,k)/a(n,l) < ∞`.
pub fn gp_nuclearity(grid: &WeightGrid, policy: &TruncationPolicy) -> Result<Verdict<GpWitness>> {
    let ceiling = partner_ceiling(policy);
    let mut pairs = Vec::with_capacity(policy.k_max);
    for k in 1..=policy.k_max {
        let mut found = None;
        let mut all_exact = true;
        for l in k + 1..=ceiling {
            match (grid.log_profile(k), grid.log_profile(l)) {
                (Some(pk), Some(pl)) => {
                    let d = pk.sub(&pl);
                    if !d.series_converges() {
                        continue;
                    }
                    let partial = log_sum_exp((1..=policy.n_max).map(|n| d.eval(n))).exp();
                    match d.tail_sum(policy.n_max) {
                        Some(t) => {
                            found = Some(GpPair {
                                k,
                                l,
                                sum_bound: partial + t,
                            });
                            break;
                        }
                        None => all_exact = false,
                    }
                }
                _ => all_exact = false,
            }
        }
        match found {
            Some(p) => pairs.push(p),
            None if all_exact => {
                let pk = grid.log_profile(k).expect("closed form");
                let pl = grid.log_profile(ceiling).expect("closed form");
                let d = pk.sub(&pl);
                let log_partial = log_sum_exp((1..=policy.n_max).map(|n| d.eval(n)));
                return Ok(Verdict::Refuted(
                    Counterexample::new(format!(
                        "Σ a(n,{k})/a(n,l) diverges for every l in {}..={ceiling}",
                        k + 1
                    ))
                    .index("k", k)
                    .index("l", ceiling)
                    .index("n", policy.n_max)
                    .value("log_partial_sum", log_partial),
                ));
            }
            None => {
                let partials: Vec<f64> = (1..=policy.n_max)
                    .scan(f64::NEG_INFINITY, |acc, n| {
                        *acc = log_sum_exp([
                            *acc,
                            grid.log_weight(n, k) - grid.log_weight(n, ceiling),
                        ]);
                        Some(*acc)
                    })
                    .collect();
                return Ok(Verdict::Inconclusive(
                    Diagnostics::new(format!("no certified partner grade for k={k}"))
                        .with_trend(TrendSummary::of_logs(&partials, policy.growth_window))
                        .value("k", k as f64),
                ));
            }
        }
    }
    Ok(Verdict::Certified(GpWitness { pairs }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityWitness {
    /// `M = sup_n β_{n+1} / β_n`.
    pub m: f64,
    pub argmax: usize,
}

/// Weak stability `sup β_{n+1}/β_n < ∞`.
pub fn weak_stability(
    beta: &ExponentSequence,
    policy: &TruncationPolicy,
) -> Result<Verdict<StabilityWitness>> {
    if beta.value(1) <= 0.0 {
        return Err(Error::ZeroDenominator { n: 1 });
    }
    // For c n^γ and ln(n+1) the successive ratio decreases, so n = 1 is the max.
    let closed = match beta.family() {
        ExponentFamily::Linear { .. } => Some(2.0),
        ExponentFamily::Power { gamma, .. } => Some(2f64.powf(*gamma)),
        ExponentFamily::Log => Some(3f64.ln() / 2f64.ln()),
        ExponentFamily::Custom(_) => None,
    };
    if let Some(m) = closed {
        return Ok(Verdict::Certified(StabilityWitness { m, argmax: 1 }));
    }
    let mut ratios = Vec::with_capacity(policy.n_max);
    for n in 1..policy.n_max {
        let b = beta.value(n);
        if b == 0.0 {
            return Err(Error::ZeroDenominator { n });
        }
        ratios.push(beta.value(n + 1) / b);
    }
    let (argmax, sup) = ratios
        .iter()
        .copied()
        .enumerate()
        .take_while(|(_, r)| r.is_finite())
        .fold((1, f64::NEG_INFINITY), |acc, (i, r)| {
            if r > acc.1 {
                (i + 1, r)
            } else {
                acc
            }
        });
    Ok(Verdict::Inconclusive(
        Diagnostics::new("custom β: ratio sup only known at truncation")
            .with_trend(TrendSummary::of(&ratios, policy.growth_window))
            .value("truncated_sup", sup)
            .value("argmax", argmax as f64),
    ))
}

/// Lower bound status of `inf_n a(n,m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightInfimum {
    /// `ln inf_n a(n,m)`.
    Positive(f64),
    Zero,
    Unknown,
}

/// Certifies `inf_n a(n,m) > 0` analytically where the grid class allows.
pub fn weight_infimum(grid: &WeightGrid, m: usize) -> WeightInfimum {
    match grid.kind() {
        GridKind::InfiniteTypePower(a) => WeightInfimum::Positive(m as f64 * a.value(1)),
        GridKind::FiniteTypePower(a) => match a.diverges() {
            Some(true) => WeightInfimum::Zero,
            // bounded closed forms are constant
            Some(false) => WeightInfimum::Positive(-a.value(1) / m as f64),
            None => WeightInfimum::Unknown,
        },
        GridKind::General => match grid.log_profile(m) {
            Some(p) => {
                if p.limit() == Limit::NegInf {
                    return WeightInfimum::Zero;
                }
                match p.scale(-1.0).sup_from(1) {
                    Some(s) => WeightInfimum::Positive(-s.value),
                    None => WeightInfimum::Unknown,
                }
            }
            None => WeightInfimum::Unknown,
        },
    }
}
