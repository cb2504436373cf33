#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rhaly_core::criteria::{GradeBound, NormForm};
use rhaly_core::holomorphic::{AnalyticFunction, Domain};
use rhaly_core::{CoefficientSequence, ExponentSequence, WeightGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn lambda1() -> WeightGrid {
    WeightGrid::finite_type(ExponentSequence::linear(1.0))
}

pub fn lambda_inf() -> WeightGrid {
    WeightGrid::infinite_type(ExponentSequence::linear(1.0))
}

/// `c e^{-s n^γ}`
pub fn stretched(c: f64, s: f64, gamma: f64) -> CoefficientSequence {
    CoefficientSequence::exp_of_exponent(c, s, ExponentSequence::power(1.0, gamma))
}

/// A random member of one of the closed-form or sampled families.
pub fn random_family(r: &mut ChaCha8Rng) -> CoefficientSequence {
    match r.gen_range(0..6) {
        0 => CoefficientSequence::geometric(r.gen_range(-2.0..2.0), r.gen_range(0.05..0.95)),
        1 => CoefficientSequence::exp_of_exponent(
            r.gen_range(-3.0..3.0),
            r.gen_range(0.1..2.0),
            ExponentSequence::power(1.0, r.gen_range(0.5..2.0)),
        ),
        2 => CoefficientSequence::finitely_supported(
            (0..r.gen_range(1..40))
                .map(|_| r.gen_range(-5.0..5.0))
                .collect(),
        ),
        3 => CoefficientSequence::reciprocal(),
        4 => CoefficientSequence::unit(r.gen_range(1..150)),
        _ => CoefficientSequence::sampled(
            (0..r.gen_range(1..200))
                .map(|_| r.gen_range(-1.0..1.0))
                .collect(),
        ),
    }
}

/// Ten θ in Λ₁(n), i.e. `Σ |θ_n| e^{-n/k} < ∞` for every k.
pub fn nuclear_finite_fixtures() -> Vec<CoefficientSequence> {
    vec![
        CoefficientSequence::geometric(1.0, 0.5),
        CoefficientSequence::geometric(0.5, 0.5),
        CoefficientSequence::geometric(-1.5, 0.3),
        CoefficientSequence::exp_of_exponent(1.0, 0.5, ExponentSequence::linear(1.0)),
        stretched(2.0, 1.0, 2.0),
        CoefficientSequence::finitely_supported(vec![0.3, -0.2, 0.1]),
        CoefficientSequence::unit(1),
        CoefficientSequence::unit(3),
        CoefficientSequence::zero(),
        CoefficientSequence::geometric(6.0, 1.0 / 3.0),
    ]
}

/// Ten θ in Λ_∞(n) with `|θ_n| ≤ 1`.
pub fn lambda_inf_fixtures() -> Vec<CoefficientSequence> {
    vec![
        stretched(1.0, 1.0, 2.0),
        stretched(0.5, 1.0, 2.0),
        stretched(-1.0, 0.5, 2.0),
        stretched(1.0, 1.0, 1.5),
        stretched(0.9, 2.0, 3.0),
        CoefficientSequence::finitely_supported(vec![1.0, 0.5, -0.25]),
        CoefficientSequence::finitely_supported(vec![0.0, 0.0, 0.0, 1.0]),
        CoefficientSequence::unit(1),
        CoefficientSequence::unit(5),
        CoefficientSequence::zero(),
    ]
}

/// Truncated `‖R_θ e_n‖_k` in the form of the bound.
pub fn column_norm(
    theta: &CoefficientSequence,
    target: &WeightGrid,
    n: usize,
    k: usize,
    n_max: usize,
    form: NormForm,
) -> f64 {
    let terms = (n..=n_max).map(|j| theta.value(j).abs() * target.weight(j, k));
    match form {
        NormForm::L1 => terms.sum(),
        NormForm::Sup => terms.fold(0.0, f64::max),
    }
}

/// Pointwise recheck of `‖R_θ e_n‖_k ≤ C ‖e_n‖_m` for `n ≤ N`, in log space.
pub fn recheck_bound(
    theta: &CoefficientSequence,
    source: &WeightGrid,
    target: &WeightGrid,
    g: &GradeBound,
    n_max: usize,
) -> Result<(), String> {
    for n in 1..=n_max {
        let logs: Vec<f64> = (n..=n_max)
            .map(|j| theta.value(j).abs().ln() + target.log_weight(j, g.k))
            .filter(|v| *v > f64::NEG_INFINITY)
            .collect();
        let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi == f64::NEG_INFINITY {
            continue;
        }
        let lhs = match g.form {
            NormForm::Sup => hi,
            NormForm::L1 => hi + logs.iter().map(|v| (v - hi).exp()).sum::<f64>().ln(),
        };
        let rhs = g.constant.ln() + source.log_weight(n, g.m);
        if lhs > rhs + 1e-9 * rhs.abs().max(1.0) {
            return Err(format!(
                "n={n} k={} m={}: ln lhs {lhs} > ln rhs {rhs}",
                g.k, g.m
            ));
        }
    }
    Ok(())
}

/// Truncated `‖v‖_p` in ℓ¹ form.
pub fn l1_norm(v: &[f64], grid: &WeightGrid, p: usize) -> f64 {
    v.iter()
        .enumerate()
        .map(|(i, x)| x.abs() * grid.weight(i + 1, p))
        .sum()
}

pub fn orbit(theta: &CoefficientSequence, n: usize, k: usize, n_max: usize) -> Vec<f64> {
    let t = theta.truncate(n_max);
    let mut v = vec![0.0; n_max];
    v[n - 1] = 1.0;
    for _ in 0..k {
        v = rhaly_core::rhaly::apply_values(&t, &v);
    }
    v
}

/// Twenty θ on Λ₁(n): the nuclear fixtures plus non-dual and boundary cases.
pub fn finite_fixtures_20() -> Vec<CoefficientSequence> {
    let mut v = nuclear_finite_fixtures();
    v.extend([
        CoefficientSequence::reciprocal(),
        CoefficientSequence::geometric(1.0, 0.9),
        CoefficientSequence::exp_of_exponent(1.0, 0.5, ExponentSequence::linear(1.0)),
        CoefficientSequence::exp_of_exponent(3.0, 0.1, ExponentSequence::linear(1.0)),
        stretched(1.0, 1.0, 0.5),
        stretched(1.0, 2.0, 0.5),
        CoefficientSequence::finitely_supported(vec![5.0; 20]),
        CoefficientSequence::unit(100),
        CoefficientSequence::exp_of_exponent(1.0, 1.0, ExponentSequence::log()),
        CoefficientSequence::exp_of_exponent(1.0, 2.0, ExponentSequence::log()),
    ]);
    v
}

/// Ten (g, f) pairs with g entire or of radius well above the contour.
pub fn fg_pairs() -> Vec<(AnalyticFunction, AnalyticFunction)> {
    let exp = AnalyticFunction::exp;
    vec![
        (exp(), AnalyticFunction::polynomial(&[1.0])),
        (exp(), AnalyticFunction::polynomial(&[0.0, 1.0])),
        (exp(), exp()),
        (exp(), AnalyticFunction::geometric_kernel(0.5)),
        (AnalyticFunction::polynomial(&[1.0, 0.0, 2.0]), exp()),
        (
            AnalyticFunction::polynomial(&[0.5, -1.0, 0.25, 3.0]),
            AnalyticFunction::polynomial(&[1.0, -1.0]),
        ),
        (
            AnalyticFunction::polynomial(&[2.0, 1.0]),
            AnalyticFunction::geometric_kernel(0.25),
        ),
        (
            AnalyticFunction::callable("cosh", Domain::Entire, |z: Complex64| z.cosh()),
            AnalyticFunction::polynomial(&[1.0, 2.0, 3.0]),
        ),
        (AnalyticFunction::geometric_kernel(0.1), exp()),
        (
            AnalyticFunction::geometric_kernel(0.2),
            AnalyticFunction::polynomial(&[0.0, 0.0, 1.0]),
        ),
    ]
}
