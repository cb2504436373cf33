mod common;

use common::{
    finite_fixtures_20, lambda1, lambda_inf, lambda_inf_fixtures, random_family, recheck_bound, rng,
};
use rhaly_core::criteria::{
    compactness_witness, continuity_witness, domination_check, dual_compactness_test,
    QuantifierOrder,
};
use rhaly_core::{
    CoefficientSequence, ExponentSequence, PowerSeriesType, TruncationPolicy, Verdict, WeightGrid,
};

#[test]
fn certified_continuity_witnesses_recheck() {
    let p = TruncationPolicy::default();
    let mut r = rng(5);
    let grids = [
        (lambda1(), lambda1()),
        (lambda_inf(), lambda_inf()),
        (lambda1(), lambda_inf()),
    ];
    let mut checked = 0;
    for _ in 0..30 {
        let theta = random_family(&mut r);
        for (s, t) in &grids {
            if let Ok(Verdict::Certified(w)) = continuity_witness(&theta, s, t, &p) {
                for g in &w.grades {
                    recheck_bound(&theta, s, t, g, p.n_max).unwrap();
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 10, "only {checked} certificates exercised");
}

#[test]
fn certified_compactness_witnesses_recheck() {
    let p = TruncationPolicy::default();
    for theta in finite_fixtures_20() {
        if let Verdict::Certified(w) =
            compactness_witness(&theta, &lambda1(), &lambda1(), &p).unwrap()
        {
            for g in &w.grades {
                assert_eq!(g.m, w.m);
                recheck_bound(&theta, &lambda1(), &lambda1(), g, p.n_max).unwrap();
            }
        }
    }
}

#[test]
fn dual_and_compactness_never_contradict() {
    let p = TruncationPolicy::default();
    let alpha = ExponentSequence::linear(1.0);
    let fixtures = finite_fixtures_20();
    assert_eq!(fixtures.len(), 20);
    for theta in fixtures {
        let Ok(c) = compactness_witness(&theta, &lambda1(), &lambda1(), &p) else {
            continue;
        };
        let d = dual_compactness_test(&theta, &alpha, &p).unwrap();
        let clash = (c.is_certified() && d.is_refuted()) || (c.is_refuted() && d.is_certified());
        assert!(
            !clash,
            "{}: compactness {} vs dual {}",
            theta.describe(),
            c.label(),
            d.label()
        );
    }
}

#[test]
fn exists_forall_implies_forall_exists() {
    let p = TruncationPolicy::default();
    let betas = [
        ExponentSequence::linear(1.0),
        ExponentSequence::linear(0.5),
        ExponentSequence::power(1.0, 0.5),
        ExponentSequence::log(),
        ExponentSequence::power(1.0, 2.0),
    ];
    let grids = [
        (lambda1(), PowerSeriesType::Finite),
        (lambda_inf(), PowerSeriesType::Infinite),
        (
            WeightGrid::finite_type(ExponentSequence::power(1.0, 2.0)),
            PowerSeriesType::Finite,
        ),
    ];
    let mut seen = 0;
    for beta in &betas {
        for (grid, kind) in &grids {
            let ef =
                domination_check(beta, grid, QuantifierOrder::ExistsMForAllK, *kind, &p).unwrap();
            if let Verdict::Certified(w) = ef {
                seen += 1;
                let fe = domination_check(beta, grid, QuantifierOrder::ForAllKExistsM, *kind, &p)
                    .unwrap();
                let fw = fe.witness().expect("∃∀ certified but ∀∃ not");
                for pair in &w.pairs {
                    let q = fw
                        .pairs
                        .iter()
                        .find(|q| q.k == pair.k)
                        .expect("grade covered");
                    assert!(
                        q.m <= pair.m,
                        "∀∃ needs m={} but ∃∀ shows m={} works",
                        q.m,
                        pair.m
                    );
                }
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn infinite_type_fixtures_are_compact_with_m_one() {
    let p = TruncationPolicy::default();
    for theta in lambda_inf_fixtures() {
        let v = compactness_witness(&theta, &lambda_inf(), &lambda_inf(), &p).unwrap();
        let w = v
            .witness()
            .unwrap_or_else(|| panic!("{}: {}", theta.describe(), v.label()));
        assert_eq!(w.m, 1);
        for g in &w.grades {
            recheck_bound(&theta, &lambda_inf(), &lambda_inf(), g, p.n_max).unwrap();
        }
    }
}

#[test]
fn zero_operator_has_zero_constants() {
    let p = TruncationPolicy::default();
    let z = CoefficientSequence::zero();
    for (s, t) in [(lambda1(), lambda1()), (lambda_inf(), lambda_inf())] {
        let c = continuity_witness(&z, &s, &t, &p).unwrap();
        assert!(c
            .witness()
            .unwrap()
            .grades
            .iter()
            .all(|g| g.constant == 0.0));
        let k = compactness_witness(&z, &s, &t, &p).unwrap();
        assert!(k
            .witness()
            .unwrap()
            .grades
            .iter()
            .all(|g| g.constant == 0.0));
    }
}
