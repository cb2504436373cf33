mod common;

use common::fg_pairs;
use num_complex::Complex64;
use proptest::prelude::*;
use rhaly_core::holomorphic::{
    apply_rg_integral, apply_rg_sequence, apply_rg_series, circle_quadrature, extract_theta,
    taylor_from_theta, theta_from_taylor, AnalyticFunction, QuadratureSpec,
};
use rhaly_core::{RhalyOperator, TruncationPolicy};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn points() -> Vec<Complex64> {
    vec![
        c(0.0, 0.0),
        c(0.3, 0.0),
        c(-0.5, 0.2),
        c(0.1, -0.7),
        c(0.9, 0.1),
    ]
}

#[test]
fn quadrature_is_exact_below_node_count() {
    // w^j for -M < j+1 < M: only j = -1 survives.
    let s = QuadratureSpec::circle(0.8, 32);
    for j in -20i32..20 {
        let v = circle_quadrature(|w| w.powi(j), &s).unwrap();
        let want = if j == -1 { 1.0 } else { 0.0 };
        assert!((v - want).norm() < 1e-13, "j={j}: {v}");
    }
}

#[test]
fn integral_matches_series_on_ten_fg_pairs() {
    let s = QuadratureSpec::circle(0.5, 64).with_tol(1e-14);
    for (g, f) in fg_pairs() {
        for z in points() {
            if z.norm() >= 0.5 * g.radius_of_convergence() {
                continue;
            }
            let i = apply_rg_integral(&g, &f, z, &s).unwrap();
            assert!(i.converged, "{} {} {z}", g.describe(), f.describe());
            let series = apply_rg_series(&g, &f, z, 80).unwrap();
            assert!(
                (i.value - series.value).norm() < 1e-10,
                "{} {} {z}: {} vs {}",
                g.describe(),
                f.describe(),
                i.value,
                series.value
            );
            let seq = apply_rg_sequence(&g, &f, z, 80).unwrap();
            assert!((seq - series.value).norm() < 1e-12);
        }
    }
}

#[test]
fn rg_of_one_is_g() {
    let one = AnalyticFunction::polynomial(&[1.0]);
    let s = QuadratureSpec::circle(0.6, 64);
    for (g, _) in fg_pairs() {
        for z in points() {
            if z.norm() >= 0.6 * g.radius_of_convergence() {
                continue;
            }
            let v = apply_rg_integral(&g, &one, z, &s).unwrap().value;
            assert!((v - g.eval(z)).norm() < 1e-10, "{} {z}", g.describe());
        }
    }
}

/// The column `R e_1` is `θ`, which the adapter reads off the Taylor coefficients of g.
#[test]
fn adapter_agrees_with_column() {
    for (g, _) in fg_pairs() {
        let b = g.known_coefficients(30).unwrap_or_else(|| {
            extract_theta(
                &g,
                30,
                &QuadratureSpec::circle(0.9_f64.min(g.radius_of_convergence() * 0.9), 256),
            )
            .unwrap()
        });
        let theta = theta_from_taylor(&b).unwrap();
        let op = RhalyOperator::new(theta.clone());
        let col = op
            .column(1, &TruncationPolicy::default().with_n_max(31))
            .unwrap()
            .truncate(31);
        for n in 1..=31 {
            assert_eq!(col[n - 1], b[n - 1].re, "{} n={n}", g.describe());
        }
        assert_eq!(
            taylor_from_theta(&theta, 30),
            b.iter().map(|v| c(v.re, 0.0)).collect::<Vec<_>>()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Polynomials round-trip through extraction.
    #[test]
    fn polynomial_roundtrip(coeffs in prop::collection::vec(-3.0f64..3.0, 1..20)) {
        let g = AnalyticFunction::polynomial(&coeffs);
        let n = coeffs.len() - 1;
        let b = extract_theta(&g, n, &QuadratureSpec::circle(1.0, 64)).unwrap();
        for (i, want) in coeffs.iter().enumerate() {
            prop_assert!((b[i] - want).norm() <= 1e-12 * want.abs().max(1.0), "i={} {} vs {}", i, b[i], want);
        }
    }
}
