//! The Rhaly operator: a lower-triangular matrix whose row `n` is constant
//! `θ_n`, so that `(R_θ x)_n = θ_n Σ_{j≤n} x_j`.
//!
//! Because the matrix is lower triangular, applying it to `x` truncated at `N`
//! gives entries `1..=N` exactly; powers are iterated prefix sums, `O(kN)`.

use std::ops::{Add, Mul};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::koethe::{CoefficientSequence, TruncationPolicy};

/// Chain enumeration is used only below this many chains.
pub const CHAIN_ENUMERATION_LIMIT: f64 = 1.0e6;

#[derive(Debug, Clone)]
pub struct RhalyOperator {
    theta: CoefficientSequence,
}

/// `(θ_n Σ_{j≤n} x_j)_n` for slices holding entries `1..=len` at `0..len`.
pub fn apply_values<T>(theta: &[f64], x: &[T]) -> Vec<T>
where
    T: Copy + Zero + Add<Output = T> + Mul<f64, Output = T>,
{
    let mut prefix = T::zero();
    theta
        .iter()
        .zip(x)
        .map(|(&t, &v)| {
            prefix = prefix + v;
            prefix * t
        })
        .collect()
}

impl RhalyOperator {
    pub fn new(theta: CoefficientSequence) -> Self {
        RhalyOperator { theta }
    }

    /// The Cesàro operator, `θ_n = 1/n`.
    pub fn cesaro() -> Self {
        Self::new(CoefficientSequence::reciprocal())
    }

    pub fn theta(&self) -> &CoefficientSequence {
        &self.theta
    }

    /// Matrix entry at row `m`, column `n`.
    pub fn entry(&self, m: usize, n: usize) -> f64 {
        if n >= 1 && n <= m {
            self.theta.value(m)
        } else {
            0.0
        }
    }

    /// `R_θ e_n = Σ_{j≥n} θ_j e_j`.
    pub fn column(&self, n: usize, policy: &TruncationPolicy) -> Result<CoefficientSequence> {
        if n == 0 || n > policy.n_max {
            return Err(Error::IndexOutOfRange {
                index: n,
                max: policy.n_max,
            });
        }
        Ok(self.theta.tail_from(n))
    }

    pub fn apply(&self, x: &CoefficientSequence, policy: &TruncationPolicy) -> CoefficientSequence {
        let theta = self.theta.truncate(policy.n_max);
        CoefficientSequence::sampled(apply_values(&theta, &x.truncate(policy.n_max)))
    }

    /// `R^k x`; `k = 0` is the identity.
    pub fn power_apply(
        &self,
        x: &CoefficientSequence,
        k: usize,
        policy: &TruncationPolicy,
    ) -> CoefficientSequence {
        let theta = self.theta.truncate(policy.n_max);
        let mut v = x.truncate(policy.n_max);
        for _ in 0..k {
            v = apply_values(&theta, &v);
        }
        CoefficientSequence::sampled(v)
    }

    /// `[R x, R² x, …, R^k x]` truncated at `n_max`.
    pub fn orbit(&self, x: &[f64], k: usize) -> Vec<Vec<f64>> {
        let theta = self.theta.truncate(x.len());
        let mut out = Vec::with_capacity(k);
        let mut v = x.to_vec();
        for _ in 0..k {
            v = apply_values(&theta, &v);
            out.push(v.clone());
        }
        out
    }

    /// `(R^k e_n)_m = Σ_{n ≤ j₁ ≤ … ≤ j_k = m} θ_{j₁} ⋯ θ_{j_k}`, by chain
    /// enumeration when small and by dynamic programming otherwise.
    pub fn power_coefficient(&self, n: usize, m: usize, k: usize) -> Result<f64> {
        check_chain_args(n, m, k)?;
        if chain_count(n, m, k) <= CHAIN_ENUMERATION_LIMIT {
            self.power_coefficient_enumerated(n, m, k)
        } else {
            Ok(self.power_coefficient_dp(n, m, k))
        }
    }

    /// Direct chain enumeration; refuses above [`CHAIN_ENUMERATION_LIMIT`].
    pub fn power_coefficient_enumerated(&self, n: usize, m: usize, k: usize) -> Result<f64> {
        check_chain_args(n, m, k)?;
        if m < n {
            return Ok(0.0);
        }
        let count = chain_count(n, m, k);
        if count > CHAIN_ENUMERATION_LIMIT {
            return Err(Error::CombinatorialBlowup {
                count,
                limit: CHAIN_ENUMERATION_LIMIT,
            });
        }
        let theta: Vec<f64> = (0..=m).map(|j| self.theta.value(j)).collect();
        // sum over nondecreasing j_1..j_{k-1} in [n, m]
        fn walk(theta: &[f64], lo: usize, m: usize, left: usize) -> f64 {
            if left == 0 {
                return 1.0;
            }
            (lo..=m)
                .map(|j| theta[j] * walk(theta, j, m, left - 1))
                .sum()
        }
        Ok(theta[m] * walk(&theta, n, m, k - 1))
    }

    /// `f_1(j) = θ_j (j ≥ n)`, `f_{i+1}(j) = θ_j Σ_{n≤i'≤j} f_i(i')`.
    pub fn power_coefficient_dp(&self, n: usize, m: usize, k: usize) -> f64 {
        if m < n || k == 0 {
            return if k == 0 && m == n { 1.0 } else { 0.0 };
        }
        let theta: Vec<f64> = (n..=m).map(|j| self.theta.value(j)).collect();
        let mut f = theta.clone();
        for _ in 1..k {
            f = apply_values(&theta, &f);
        }
        f[m - n]
    }

    /// `T^[k] x = (1/k) Σ_{m=1}^k T^m x`.
    pub fn cesaro_mean_apply(
        &self,
        x: &CoefficientSequence,
        k: usize,
        policy: &TruncationPolicy,
    ) -> Result<CoefficientSequence> {
        if k == 0 {
            return Err(Error::InvalidArgument("Cesàro mean needs k ≥ 1".into()));
        }
        let mut state = CesaroMeanState::new(x.truncate(policy.n_max));
        let theta = self.theta.truncate(policy.n_max);
        for _ in 0..k {
            state.step(&theta);
        }
        Ok(CoefficientSequence::sampled(state.mean()))
    }
}

fn check_chain_args(n: usize, m: usize, k: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("indices are 1-based".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("chain sums need k ≥ 1".into()));
    }
    Ok(())
}

/// `C(m−n+k−1, k−1)`, as a float to survive large arguments.
pub fn chain_count(n: usize, m: usize, k: usize) -> f64 {
    if m < n || k == 0 {
        return 0.0;
    }
    let top = (m - n + k - 1) as f64;
    let r = (k - 1).min(m - n);
    (0..r).fold(1.0, |acc, i| acc * (top - i as f64) / (i as f64 + 1.0))
}

/// Running Cesàro state: `k`, `Σ_{m=1}^k T^m x` and `T^k x`.
///
/// The sum is Kahan-compensated; `compensation` holds the lost low-order bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CesaroMeanState {
    pub k: usize,
    pub accumulated: Vec<f64>,
    #[serde(default)]
    pub compensation: Vec<f64>,
    pub current: Vec<f64>,
}

impl CesaroMeanState {
    pub fn new(x: Vec<f64>) -> Self {
        CesaroMeanState {
            k: 0,
            accumulated: vec![0.0; x.len()],
            compensation: vec![0.0; x.len()],
            current: x,
        }
    }

    /// Advance to `k + 1`.
    pub fn step(&mut self, theta: &[f64]) {
        self.current = apply_values(theta, &self.current);
        self.compensation.resize(self.current.len(), 0.0);
        for ((a, e), c) in self
            .accumulated
            .iter_mut()
            .zip(&mut self.compensation)
            .zip(&self.current)
        {
            let y = c - *e;
            let t = *a + y;
            *e = (t - *a) - y;
            *a = t;
        }
        self.k += 1;
    }

    /// `accumulated / k`; the zero vector before the first step.
    pub fn mean(&self) -> Vec<f64> {
        if self.k == 0 {
            return self.accumulated.clone();
        }
        let k = self.k as f64;
        self.accumulated.iter().map(|a| a / k).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    fn dense_matvec(op: &RhalyOperator, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (1..=n)
            .map(|m| (1..=n).map(|j| op.entry(m, j) * x[j - 1]).sum())
            .collect()
    }

    #[test]
    fn columns() {
        let p = policy();
        let c = RhalyOperator::cesaro().column(1, &p).unwrap();
        assert_eq!(c.truncate(3), vec![1.0, 0.5, 1.0 / 3.0]);
        let e1 = RhalyOperator::new(CoefficientSequence::unit(1));
        assert!(e1.column(2, &p).unwrap().is_zero());
        let g = RhalyOperator::new(CoefficientSequence::geometric(1.0, 0.5));
        assert_eq!(
            g.column(3, &p).unwrap().truncate(4),
            vec![0.0, 0.0, 0.125, 0.0625]
        );
        assert!(g.column(0, &p).is_err());
        assert!(g.column(201, &p).is_err());
    }

    #[test]
    fn apply_examples() {
        let p = policy();
        let op = RhalyOperator::new(CoefficientSequence::geometric(0.3, 0.9));
        let y = op.apply(&CoefficientSequence::unit(1), &p);
        assert_eq!(y.truncate(50), op.theta().truncate(50));
        let c = RhalyOperator::cesaro();
        let z = c.apply(
            &CoefficientSequence::finitely_supported(vec![1.0, -1.0]),
            &p,
        );
        assert_eq!(z.truncate(4), vec![1.0, 0.0, 0.0, 0.0]);
        let ones = CoefficientSequence::custom("ones", |_| 1.0);
        let w = c.apply(&ones, &p).truncate(200);
        let dense = dense_matvec(&c, &ones.truncate(200));
        for (a, b) in w.iter().zip(&dense) {
            assert!((a - 1.0).abs() < 1e-12 && (a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn powers_and_idempotence() {
        let p = policy();
        let e1 = RhalyOperator::new(CoefficientSequence::unit(1));
        let x = CoefficientSequence::geometric(2.0, 0.7);
        assert_eq!(
            e1.power_apply(&x, 5, &p).truncate(10),
            e1.power_apply(&x, 1, &p).truncate(10)
        );
        assert_eq!(e1.power_apply(&x, 0, &p).truncate(10), x.truncate(10));
        let c = RhalyOperator::cesaro();
        let sq = c
            .power_apply(&CoefficientSequence::unit(1), 2, &p)
            .truncate(20);
        let mut h = 0.0;
        for (i, v) in sq.iter().enumerate() {
            let m = (i + 1) as f64;
            h += 1.0 / m;
            assert!((v - h / m).abs() < 1e-15);
        }
    }

    #[test]
    fn chain_sum_examples() {
        let c = RhalyOperator::cesaro();
        assert!((c.power_coefficient(1, 2, 2).unwrap() - 0.75).abs() < 1e-15);
        let g = RhalyOperator::new(CoefficientSequence::geometric(1.0, 0.5));
        assert!((g.power_coefficient(1, 3, 2).unwrap() - 7.0 / 64.0).abs() < 1e-15);
        assert_eq!(g.power_coefficient(4, 4, 1).unwrap(), 0.0625);
        assert_eq!(chain_count(1, 3, 2), 3.0);
    }

    #[test]
    fn enumeration_guard_and_dp_agree() {
        let c = RhalyOperator::cesaro();
        let e = c.power_coefficient_enumerated(1, 200, 12).unwrap_err();
        assert!(matches!(e, Error::CombinatorialBlowup { .. }));
        let big = c.power_coefficient(1, 200, 12).unwrap();
        let mut x = vec![0.0; 200];
        x[0] = 1.0;
        let orbit = c.orbit(&x, 12);
        assert!((big - orbit[11][199]).abs() <= 1e-13 * big.abs());
        for (n, m, k) in [(1, 5, 3), (2, 9, 4), (3, 3, 2)] {
            let a = c.power_coefficient_enumerated(n, m, k).unwrap();
            let b = c.power_coefficient_dp(n, m, k);
            assert!((a - b).abs() <= 1e-14 * a.abs());
        }
    }

    #[test]
    fn cesaro_means() {
        let p = policy();
        let e1 = RhalyOperator::new(CoefficientSequence::unit(1));
        let m = e1
            .cesaro_mean_apply(&CoefficientSequence::unit(1), 7, &p)
            .unwrap();
        assert_eq!(m.truncate(3), vec![1.0, 0.0, 0.0]);
        let c = RhalyOperator::cesaro();
        let x = CoefficientSequence::unit(1);
        assert_eq!(
            c.cesaro_mean_apply(&x, 1, &p).unwrap().truncate(200),
            c.apply(&x, &p).truncate(200)
        );
        let three = c.cesaro_mean_apply(&x, 3, &p).unwrap().truncate(200);
        for (m, got) in three.iter().enumerate() {
            let direct: f64 = (1..=3)
                .map(|k| c.power_apply(&x, k, &p).value(m + 1))
                .sum::<f64>()
                / 3.0;
            assert!((got - direct).abs() <= 1e-15 * direct.abs().max(1e-300));
        }
        assert!(c.cesaro_mean_apply(&x, 0, &p).is_err());
    }
}
