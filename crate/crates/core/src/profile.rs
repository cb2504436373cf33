//! Closed-form log-magnitude profiles.
//!
//! Every closed-form sequence family and every power-series weight grid has a
//! natural logarithm of the shape
//!
//! ```text
//! P(n) = c0 + Σ_i c_i n^{γ_i} + λ ln n + b ln(1 + 1/n),      γ_i > 0
//! ```
//!
//! (`ln(n+1)` is written as `ln n + ln(1 + 1/n)`). Sums and scalings stay in
//! the class, so summands like `ln|θ_n| + ln a(n,k)` or ratios like
//! `ln a(n,k) - ln a(n,l)` are profiles too. For this class the asymptotic
//! behaviour is decided by the leading term, and explicit thresholds beyond
//! which the profile decreases can be computed from monotone bracket bounds on
//! the derivative. That is what lets us certify infinite tails instead of
//! trusting partial sums.

use serde::{Deserialize, Serialize};

/// Explicit summation never runs past this index when closing a tail.
pub const EXPLICIT_SUM_CAP: usize = 1 << 22;

/// Threshold searches give up beyond this index.
const THRESHOLD_CAP: f64 = 1.0e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogProfile {
    constant: f64,
    /// `(exponent, coefficient)`, exponents strictly decreasing, coefficients nonzero.
    powers: Vec<(f64, f64)>,
    log_n: f64,
    log1p_inv: f64,
}

/// Limit of a profile as `n → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Limit {
    NegInf,
    Finite(f64),
    PosInf,
}

/// Upper bound on `sup_{n ≥ start} P(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBound {
    pub value: f64,
    /// Index attaining the supremum, `None` when it is only approached as `n → ∞`.
    pub argmax: Option<usize>,
}

impl LogProfile {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        LogProfile {
            constant: c,
            powers: Vec::new(),
            log_n: 0.0,
            log1p_inv: 0.0,
        }
    }

    /// `c · n^γ`; `γ = 0` folds into the constant.
    pub fn power(c: f64, gamma: f64) -> Self {
        let mut p = Self::zero();
        p.push_power(gamma, c);
        p
    }

    /// `c · n`.
    pub fn linear(c: f64) -> Self {
        Self::power(c, 1.0)
    }

    /// `c · ln n`.
    pub fn ln_n(c: f64) -> Self {
        LogProfile {
            log_n: c,
            ..Self::zero()
        }
    }

    /// `c · ln(n + 1)`.
    pub fn ln_n_plus_one(c: f64) -> Self {
        LogProfile {
            log_n: c,
            log1p_inv: c,
            ..Self::zero()
        }
    }

    fn push_power(&mut self, gamma: f64, c: f64) {
        if c == 0.0 {
            return;
        }
        if gamma == 0.0 {
            self.constant += c;
            return;
        }
        match self.powers.iter_mut().find(|(g, _)| *g == gamma) {
            Some(slot) => slot.1 += c,
            None => self.powers.push((gamma, c)),
        }
        self.powers.retain(|(_, c)| *c != 0.0);
        self.powers.sort_by(|a, b| b.0.total_cmp(&a.0));
    }

    pub fn eval(&self, n: usize) -> f64 {
        let x = n as f64;
        let mut v = self.constant;
        for &(g, c) in &self.powers {
            v += c * x.powf(g);
        }
        if self.log_n != 0.0 {
            v += self.log_n * x.ln();
        }
        if self.log1p_inv != 0.0 {
            v += self.log1p_inv * (1.0 / x).ln_1p();
        }
        v
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::constant(self.constant * s);
        for &(g, c) in &self.powers {
            out.push_power(g, c * s);
        }
        out.log_n = self.log_n * s;
        out.log1p_inv = self.log1p_inv * s;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant += other.constant;
        for &(g, c) in &other.powers {
            out.push_power(g, c);
        }
        out.log_n += other.log_n;
        out.log1p_inv += other.log1p_inv;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn plus_constant(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.constant += c;
        out
    }

    fn leading(&self) -> Option<(f64, f64)> {
        self.powers.first().copied()
    }

    /// `(γ, c)` of the dominant power term `c n^γ`.
    pub fn leading_power(&self) -> Option<(f64, f64)> {
        self.leading()
    }

    /// Coefficient of `ln n`.
    pub fn log_coefficient(&self) -> f64 {
        self.log_n
    }

    pub fn limit(&self) -> Limit {
        if let Some((_, c)) = self.leading() {
            return if c > 0.0 {
                Limit::PosInf
            } else {
                Limit::NegInf
            };
        }
        if self.log_n > 0.0 {
            Limit::PosInf
        } else if self.log_n < 0.0 {
            Limit::NegInf
        } else {
            Limit::Finite(self.constant)
        }
    }

    /// Whether `Σ_n e^{P(n)}` converges. Exact for this class.
    pub fn series_converges(&self) -> bool {
        match self.leading() {
            Some((_, c)) => c < 0.0,
            None => self.log_n < -1.0,
        }
    }

    /// Monotone upper bracket for `x P'(x) + s` divided by the leading
    /// magnitude. Nonincreasing in `x`.
    fn bracket(&self, x: f64, s: f64) -> f64 {
        let (gl, cl) = self.powers[0];
        let lead = (cl * gl).abs();
        let mut h = -1.0;
        for &(g, c) in &self.powers[1..] {
            if c * g > 0.0 {
                h += (c * g / lead) * x.powf(g - gl);
            }
        }
        h += (self.log_n + s).max(0.0) / lead * x.powf(-gl);
        h += (-self.log1p_inv).max(0.0) / lead * x.powf(-gl) / (x + 1.0);
        h
    }

    /// Smallest power of two times `start` (at least `start`) such that
    /// `x P'(x) ≤ -s` for every real `x ≥ X`. `s = 0` gives eventual
    /// monotone decrease.
    pub fn decay_threshold(&self, s: f64, start: usize) -> Option<usize> {
        let start = start.max(1);
        match self.leading() {
            Some((_, c)) if c > 0.0 => None,
            Some(_) => {
                let mut x = start as f64;
                while self.bracket(x, s) > 0.0 {
                    x *= 2.0;
                    if x > THRESHOLD_CAP {
                        return None;
                    }
                }
                Some(x as usize)
            }
            None => {
                let rate = self.log_n + s;
                let pos_b = (-self.log1p_inv).max(0.0);
                if rate < 0.0 {
                    let need = (pos_b / -rate - 1.0).ceil().max(1.0);
                    if need > THRESHOLD_CAP {
                        return None;
                    }
                    Some(start.max(need as usize))
                } else if rate == 0.0 && pos_b == 0.0 {
                    Some(start)
                } else {
                    None
                }
            }
        }
    }

    /// `(X, δ)` with `P(j+1) - P(j) ≤ -δ` for all `j ≥ X`; needs a negative
    /// leading power of order at least one.
    pub fn geometric_threshold(&self, start: usize) -> Option<(usize, f64)> {
        let (gl, cl) = self.leading()?;
        if cl >= 0.0 || gl < 1.0 {
            return None;
        }
        let mut x = start.max(1) as f64;
        while self.bracket(x, 0.0) > -0.5 {
            x *= 2.0;
            if x > THRESHOLD_CAP {
                return None;
            }
        }
        // a few more doublings often buy a much tighter decay rate
        let mut y = x;
        for _ in 0..8 {
            if self.bracket(y, 0.0) <= -0.9 {
                return Some((y as usize, 0.9 * (cl * gl).abs() * y.powf(gl - 1.0)));
            }
            y *= 2.0;
        }
        Some((x as usize, 0.5 * (cl * gl).abs() * x.powf(gl - 1.0)))
    }

    /// Certified upper bound on `Σ_{j > n} e^{P(j)}`, or `None` when the
    /// series diverges or no explicit closing bound could be built.
    pub fn tail_sum(&self, n: usize) -> Option<f64> {
        if !self.series_converges() {
            return None;
        }
        if let Some((x, delta)) = self.geometric_threshold(n) {
            if x <= EXPLICIT_SUM_CAP {
                let explicit = self.explicit_sum(n + 1, x);
                let rest = self.eval(x).exp() * (-delta).exp() / (-(-delta).exp_m1());
                let total = explicit + rest;
                if total.is_finite() {
                    return Some(total);
                }
            }
        }
        let s = match self.leading() {
            Some(_) => 2.0,
            None => 0.5 * (1.0 - self.log_n),
        };
        let x = self.decay_threshold(s, n)?;
        if x > EXPLICIT_SUM_CAP {
            return None;
        }
        let explicit = self.explicit_sum(n + 1, x);
        let rest = self.eval(x).exp() * x as f64 / (s - 1.0);
        let total = explicit + rest;
        total.is_finite().then_some(total)
    }

    fn explicit_sum(&self, from: usize, to: usize) -> f64 {
        (from..=to).map(|j| self.eval(j).exp()).sum()
    }

    /// Certified upper bound on `sup_{n ≥ start} P(n)`, `None` when unbounded.
    pub fn sup_from(&self, start: usize) -> Option<SupBound> {
        let start = start.max(1);
        if let Some(x) = self.decay_threshold(0.0, start) {
            if x > EXPLICIT_SUM_CAP {
                return None;
            }
            let (argmax, value) = (start..=x.max(start)).map(|j| (j, self.eval(j))).fold(
                (start, f64::NEG_INFINITY),
                |acc, (j, v)| {
                    if v > acc.1 {
                        (j, v)
                    } else {
                        acc
                    }
                },
            );
            return Some(SupBound {
                value,
                argmax: Some(argmax),
            });
        }
        match self.limit() {
            Limit::Finite(l) => {
                // Only b < 0 lands here: P increases towards its limit.
                Some(SupBound {
                    value: l,
                    argmax: None,
                })
            }
            _ => None,
        }
    }

    /// Index in `1..=n_max` with the largest value (for counterexamples).
    pub fn argmax_upto(&self, n_max: usize) -> (usize, f64) {
        (1..=n_max.max(1))
            .map(|j| (j, self.eval(j)))
            .fold(
                (1, f64::NEG_INFINITY),
                |acc, (j, v)| if v > acc.1 { (j, v) } else { acc },
            )
    }

    /// Some `n` in `1..=cap` with `P(n) > level`, scanning doubling windows.
    pub fn first_exceeding(&self, level: f64, cap: usize) -> Option<usize> {
        let mut n = 1usize;
        while n <= cap {
            if self.eval(n) > level {
                // refine linearly inside the last doubling window
                let lo = (n / 2).max(1);
                return (lo..=n).find(|&j| self.eval(j) > level);
            }
            n *= 2;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn geometric_tail_matches_closed_form() {
        // e^{-n/2}: tail beyond 10 is e^{-11/2}/(1-e^{-1/2})
        let p = LogProfile::linear(-0.5);
        let t = p.tail_sum(10).unwrap();
        let exact = (-5.5f64).exp() / (1.0 - (-0.5f64).exp());
        assert!(t >= exact * (1.0 - 1e-12));
        assert!(t <= exact * 1.5);
    }

    #[test]
    fn p_series_tail_is_an_upper_bound() {
        // n^{-2}: tail beyond 100 is about 1/100
        let p = LogProfile::ln_n(-2.0);
        let t = p.tail_sum(100).unwrap();
        let exact: f64 =
            (101..2_000_000).map(|j| (j as f64).powi(-2)).sum::<f64>() + 1.0 / 2_000_000.0;
        assert!(t >= exact);
        assert!(t < 0.05);
    }

    #[test]
    fn stretched_exponential_tail() {
        // e^{-sqrt n}
        let p = LogProfile::power(-1.0, 0.5);
        let t = p.tail_sum(50).unwrap();
        let direct: f64 = (51..4_000_000).map(|j| (-(j as f64).sqrt()).exp()).sum();
        assert!(t >= direct);
        assert!(t < 10.0 * direct);
    }

    #[test]
    fn harmonic_and_slower_diverge() {
        assert!(!LogProfile::ln_n(-1.0).series_converges());
        assert!(!LogProfile::ln_n_plus_one(-0.5).series_converges());
        assert!(LogProfile::ln_n(-1.0).tail_sum(10).is_none());
        assert!(!LogProfile::zero().series_converges());
    }

    #[test]
    fn sup_of_reciprocal_against_finite_type_weight() {
        // -ln n - n/2, max at n = 1
        let p = LogProfile::ln_n(-1.0).add(&LogProfile::linear(-0.5));
        let s = p.sup_from(1).unwrap();
        assert_eq!(s.argmax, Some(1));
        assert_relative_eq!(s.value, -0.5);
    }

    #[test]
    fn sup_detects_interior_maximum() {
        // 6 n - n^2 peaks at n = 3
        let p = LogProfile::linear(6.0).add(&LogProfile::power(-1.0, 2.0));
        let s = p.sup_from(1).unwrap();
        assert_eq!(s.argmax, Some(3));
        assert_relative_eq!(s.value, 9.0);
    }

    #[test]
    fn sup_of_increasing_bounded_profile_is_its_limit() {
        // ln n - ln(n+1) = -ln(1+1/n) increases to 0
        let p = LogProfile::ln_n(1.0).sub(&LogProfile::ln_n_plus_one(1.0));
        let s = p.sup_from(1).unwrap();
        assert_eq!(s.argmax, None);
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn unbounded_profiles_have_no_sup() {
        assert!(LogProfile::ln_n(0.1).sup_from(1).is_none());
        assert!(LogProfile::linear(1e-3)
            .add(&LogProfile::ln_n(-5.0))
            .sup_from(1)
            .is_none());
        assert_eq!(LogProfile::ln_n(0.1).limit(), Limit::PosInf);
    }

    #[test]
    fn cancellation_drops_terms() {
        let p = LogProfile::linear(1.0).sub(&LogProfile::linear(1.0));
        assert_eq!(p.limit(), Limit::Finite(0.0));
        assert_eq!(p, LogProfile::zero());
    }

    #[test]
    fn first_exceeding_finds_an_index() {
        let p = LogProfile::linear(0.5).add(&LogProfile::ln_n(-1.0));
        let n = p.first_exceeding(3.0, 1 << 20).unwrap();
        assert!(p.eval(n) > 3.0);
        assert!(p.first_exceeding(1e6, 1 << 10).is_none());
    }
}
