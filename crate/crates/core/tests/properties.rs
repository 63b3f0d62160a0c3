mod common;

use common::rel;
use proptest::prelude::*;

use spraylab::analysis::{pricf_residual, xi, FlatnessWitness};
use spraylab::expr::Expr;
use spraylab::finsler::{induced_spray, FinslerModel};
use spraylab::functions::ScalarFn;
use spraylab::jets::{fd_reference, jet_eval, ChartBox, Orders, TangentSample, Var};
use spraylab::riemann::{levi_civita_spray, BetaData, OneForm, RiemannianData};
use spraylab::sampling::{model_chart, random_metric, random_scalar, rng};
use spraylab::scurv::{pric_direct, s_curvature, VolumeForm, WeightedSpray};
use spraylab::spray::{ricci, Spray};

fn point(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-0.4f64..0.4, n),
        prop::collection::vec(-2.0f64..2.0, n).prop_filter("y away from 0", |y| {
            y.iter().map(|v| v * v).sum::<f64>() > 0.09
        }),
    )
}

fn randers() -> (FinslerModel, VolumeForm) {
    let mut r = rng(5);
    let a = RiemannianData::new(random_metric(&mut r, 2), model_chart(2)).unwrap();
    let b = BetaData::new(OneForm::Expr(vec![
        Expr::parse("0.2 + 0.1*x2").unwrap(),
        Expr::parse("-0.1*x1").unwrap(),
    ]));
    let fm = FinslerModel::randers(&a, &b).unwrap();
    (
        fm,
        VolumeForm::scaled(VolumeForm::Constant(1.0), random_scalar(&mut r, 2)),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn randers_s_and_ric_are_homogeneous((x, y) in point(2), lambda in 0.2f64..4.0) {
        let (fm, dv) = randers();
        let g = induced_spray(&fm);
        let w = WeightedSpray::new(&g, dv);
        let s = TangentSample::new(x, y).unwrap();
        let t = s.scaled(lambda);
        prop_assert!(rel(s_curvature(&w, &t).unwrap(), lambda * s_curvature(&w, &s).unwrap()) < 1e-9);
        prop_assert!(rel(ricci(&g, &t).unwrap(), lambda * lambda * ricci(&g, &s).unwrap()) < 1e-9);
        prop_assert!(rel(pric_direct(&w, &t).unwrap(), lambda * lambda * pric_direct(&w, &s).unwrap()) < 1e-7);
    }

    #[test]
    fn adding_a_constant_to_the_gauge_changes_nothing((x, y) in point(3), c in -5.0f64..5.0) {
        let mut r = rng(8);
        let a = RiemannianData::new(random_metric(&mut r, 3), model_chart(3)).unwrap();
        let g = levi_civita_spray(&a);
        let f = random_scalar(&mut r, 3);
        let shifted = ScalarFn::sum(f.clone(), ScalarFn::Constant(c));
        let dv = VolumeForm::Riemannian(a.metric.clone());
        let s = TangentSample::new(x, y).unwrap();
        let w1 = FlatnessWitness::new(WeightedSpray::new(&g, dv.clone()), f);
        let w2 = FlatnessWitness::new(WeightedSpray::new(&g, dv), shifted);
        prop_assert!(rel(xi(&w1, &s).unwrap(), xi(&w2, &s).unwrap()) < 1e-12);
        prop_assert!(rel(pricf_residual(&w1, &s).unwrap(), pricf_residual(&w2, &s).unwrap()) < 1e-10);
    }

    #[test]
    fn scaling_the_density_leaves_s_unchanged((x, y) in point(2), k in 0.1f64..10.0) {
        let (fm, dv) = randers();
        let g = induced_spray(&fm);
        let s = TangentSample::new(x, y).unwrap();
        let scaled = VolumeForm::scaled(dv.clone(), ScalarFn::Constant(k.ln()));
        let a = s_curvature(&WeightedSpray::new(&g, dv), &s).unwrap();
        let b = s_curvature(&WeightedSpray::new(&g, scaled), &s).unwrap();
        prop_assert!(rel(a, b) < 1e-12);
    }

    #[test]
    fn spray_coefficients_match_finite_differences((x, y) in point(2)) {
        let (fm, _) = randers();
        let g = induced_spray(&fm);
        let s = TangentSample::new(x, y).unwrap();
        struct Coeff<'a, S>(&'a S, usize);
        impl<S: Spray> spraylab::jets::Field for Coeff<'_, S> {
            fn eval<T: spraylab::jets::Real>(&self, x: &[T], y: &[T]) -> T {
                self.0.coeffs(x, y)[self.1]
            }
        }
        for i in 0..2 {
            let c = Coeff(&g, i);
            let jet = jet_eval(&c, &s, Orders::FULL).unwrap();
            let dxdy = jet.dxdy.unwrap();
            let d3 = jet.dydydy.unwrap();
            for j in 0..2 {
                for k in 0..2 {
                    prop_assert!(rel(dxdy[j][k], fd_reference(&c, &s, &[Var::X(j), Var::Y(k)], None).unwrap()) < 1e-5);
                    prop_assert!(rel(d3[j][k][1], fd_reference(&c, &s, &[Var::Y(j), Var::Y(k), Var::Y(1)], None).unwrap()) < 1e-4);
                }
            }
        }
    }

    #[test]
    fn parsed_and_native_metrics_agree((x, y) in point(2)) {
        let native = ScalarFn::SphereHeight;
        let parsed = Expr::parse("(1 - x1^2 - x2^2) / (1 + x1^2 + x2^2)").unwrap();
        let v: f64 = parsed.eval(&x, &y);
        prop_assert!((native.eval(&x) - v).abs() < 1e-12);
        let chart = ChartBox::cube(2, 0.5);
        prop_assert!(chart.contains(&x));
    }
}
