mod common;

use common::{rel, samples};
use spraylab::analysis::{
    condition_b_residual, exact_s_check, pricf_residual, weighted_ricci, FlatnessWitness,
};
use spraylab::finsler::{fundamental_tensor, induced_spray, FinslerModel};
use spraylab::functions::{Contracted, EuclideanNorm, ScalarFn, ScaledField};
use spraylab::jets::{fd_reference, jet_eval, ChartBox, Orders, TangentSample, Var};
use spraylab::riemann::{levi_civita_spray, scalar_second_covariant, Metric, RiemannianData};
use spraylab::sampling::{
    model_chart, random_metric, random_scalar, rng, sample_tangents_filtered, SampleSpec,
};
use spraylab::scurv::{
    pric_direct, pric_rescale_residual, pric_via_hat, s_curvature, volume_change_residual,
    VolumeForm, WeightedSpray,
};
use spraylab::spray::{
    berwald_tensor, projective_deform, ricci, riemann_curvature, riemann_tensor, FlatSpray, Spray,
};

fn sphere(n: usize) -> RiemannianData {
    RiemannianData::new(Metric::Stereographic { n }, ChartBox::cube(n, 0.9)).unwrap()
}

fn sphere_samples(n: usize) -> Vec<TangentSample> {
    samples(n, 40, 7)
}

#[test]
fn sphere_ricci_is_n_minus_one_alpha_squared() {
    for n in [2, 3] {
        let a = sphere(n);
        let g = levi_civita_spray(&a);
        for s in sphere_samples(n) {
            let alpha2 = a.metric.norm_squared(&s.x, &s.y);
            assert!(rel(ricci(&g, &s).unwrap(), (n as f64 - 1.0) * alpha2) < 1e-8);
        }
    }
}

#[test]
fn sphere_height_function() {
    for n in [2, 3] {
        let a = sphere(n);
        let phi = ScalarFn::SphereHeight;
        for s in sphere_samples(n) {
            let v = scalar_second_covariant(&a, &phi, &s).unwrap()
                + phi.eval(&s.x) * a.metric.norm_squared(&s.x, &s.y);
            assert!(v.abs() < 1e-7 * (1.0 + s.y_norm().powi(2)), "{v}");
        }
    }
}

#[test]
fn sphere_weighted_ricci_of_log_height_vanishes() {
    for n in [2, 3] {
        let a = sphere(n);
        let f = ScalarFn::ln_abs(ScalarFn::SphereHeight);
        let mut used = 0;
        for s in sphere_samples(n) {
            if ScalarFn::SphereHeight.eval(&s.x) > 0.2 {
                used += 1;
                assert!(weighted_ricci(&a, &f, &s).unwrap().abs() < 1e-6);
            }
        }
        assert!(used > 10);
    }
}

#[test]
fn sphere_as_flatness_witness() {
    let n = 3;
    let a = RiemannianData::new(Metric::Stereographic { n }, ChartBox::cube(n, 0.45)).unwrap();
    let g = levi_civita_spray(&a);
    let ln_phi = ScalarFn::ln_abs(ScalarFn::SphereHeight);
    let dv = VolumeForm::scaled(VolumeForm::Riemannian(a.metric.clone()), ln_phi);
    let fw = FlatnessWitness::new(WeightedSpray::new(&g, dv), ScalarFn::zero());
    for s in samples(n, 30, 3) {
        assert!(pricf_residual(&fw, &s).unwrap().abs() < 1e-6);
    }
}

#[test]
fn curvature_contraction_on_random_metrics() {
    let mut r = rng(11);
    for n in [2, 3] {
        let a = RiemannianData::new(random_metric(&mut r, n), model_chart(n)).unwrap();
        let g = levi_civita_spray(&a);
        for s in samples(n, 10, 5) {
            let full = riemann_tensor(&g, &s).unwrap();
            let rk = riemann_curvature(&g, &s).unwrap();
            let mut trace = 0.0;
            for i in 0..n {
                for k in 0..n {
                    let mut c = 0.0;
                    for j in 0..n {
                        for l in 0..n {
                            c += s.y[j] * full.get(j, i, k, l) * s.y[l];
                        }
                    }
                    assert!(rel(c, rk[i * n + k]) < 1e-6);
                    if i == k {
                        trace += c;
                    }
                }
            }
            assert!(rel(trace, ricci(&g, &s).unwrap()) < 1e-6);
        }
    }
}

fn flat_fourth_root(c: f64) -> FinslerModel {
    let a1 = RiemannianData::new(
        Metric::Constant {
            n: 2,
            a: vec![1.0, 0.2, 0.2, 1.5],
        },
        ChartBox::cube(2, 1.0),
    )
    .unwrap();
    let a2 = RiemannianData::new(Metric::euclidean(1), ChartBox::cube(1, 1.0)).unwrap();
    FinslerModel::fourth_root(&a1, &a2, c).unwrap()
}

fn fourth_root_samples(fm: &FinslerModel, count: usize) -> Vec<TangentSample> {
    let fm = fm.clone();
    sample_tangents_filtered(
        &fm.chart.clone(),
        &SampleSpec::default().with_count(count),
        move |x, y| fm.in_sampling_domain(x, y),
    )
    .unwrap()
}

#[test]
fn fourth_root_with_flat_factors_is_projectively_ricci_flat() {
    for c in [0.3, 1.0] {
        let fm = flat_fourth_root(c);
        let g = induced_spray(&fm);
        let w = WeightedSpray::new(&g, VolumeForm::Constant(1.0));
        for s in fourth_root_samples(&fm, 20) {
            assert!(ricci(&g, &s).unwrap().abs() <= 1e-10);
            assert!(berwald_tensor(&g, &s).unwrap().max_abs() <= 1e-10);
            assert!(s_curvature(&w, &s).unwrap().abs() <= 1e-10);
            assert!(pric_direct(&w, &s).unwrap().abs() <= 1e-10);
            assert!(pric_via_hat(&w, &s).unwrap().abs() <= 1e-10);
        }
    }
}

#[test]
fn fourth_root_with_c_one_is_the_product_metric() {
    let fm = flat_fourth_root(1.0);
    for s in fourth_root_samples(&fm, 20) {
        let t = fundamental_tensor(&fm, &s).unwrap();
        let expect = [1.0, 0.2, 0.0, 0.2, 1.5, 0.0, 0.0, 0.0, 1.0];
        for (u, v) in t.g.iter().zip(expect) {
            assert!(rel(*u, v) <= 1e-10, "{u} vs {v}");
        }
    }
}

#[test]
fn fourth_root_exact_s_with_zero_potential() {
    let fm = flat_fourth_root(0.3);
    let g = induced_spray(&fm);
    let s = fourth_root_samples(&fm, 10);
    let rep = exact_s_check(&g, &VolumeForm::Constant(1.0), &ScalarFn::zero(), &s, 1e-10).unwrap();
    assert!(rep.max_pric <= 1e-10);
}

#[test]
fn ad_matches_finite_differences_for_finsler_energy() {
    let fm = flat_fourth_root(0.3);
    for s in fourth_root_samples(&fm, 5) {
        let jet = jet_eval(&fm, &s, Orders::FULL).unwrap();
        let dydy = jet.dydy.unwrap();
        let d3 = jet.dydydy.unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let fd = fd_reference(&fm, &s, &[Var::Y(j), Var::Y(k)], None).unwrap();
                assert!(rel(dydy[j][k], fd) < 1e-5);
                let fd3 = fd_reference(&fm, &s, &[Var::Y(j), Var::Y(k), Var::Y(0)], None).unwrap();
                assert!(rel(d3[j][k][0], fd3) < 1e-4);
            }
        }
    }
}

#[test]
fn pric_is_invariant_under_projective_change() {
    let mut r = rng(21);
    let n = 3;
    let a = RiemannianData::new(random_metric(&mut r, n), model_chart(n)).unwrap();
    let g = levi_civita_spray(&a);
    let dv = VolumeForm::Riemannian(a.metric.clone());
    let ss = samples(n, 10, 9);
    let w = WeightedSpray::new(&g, dv.clone());
    let by_norm = projective_deform(&g, EuclideanNorm, &ss).unwrap();
    let by_gauge = projective_deform(
        &g,
        ScaledField(-0.4, Contracted(random_scalar(&mut r, n))),
        &ss,
    )
    .unwrap();
    for s in &ss {
        let base = pric_via_hat(&w, s).unwrap();
        assert!(
            rel(
                pric_via_hat(&WeightedSpray::new(&by_norm, dv.clone()), s).unwrap(),
                base
            ) < 1e-6
        );
        assert!(
            rel(
                pric_via_hat(&WeightedSpray::new(&by_gauge, dv.clone()), s).unwrap(),
                base
            ) < 1e-6
        );
    }
}

#[test]
fn volume_change_laws_on_a_random_metric() {
    let mut r = rng(33);
    let n = 2;
    let a = RiemannianData::new(random_metric(&mut r, n), model_chart(n)).unwrap();
    let g = levi_civita_spray(&a);
    let f = random_scalar(&mut r, n);
    let base = VolumeForm::Riemannian(a.metric.clone());
    let dv = VolumeForm::scaled(base.clone(), f.clone());
    for s in samples(n, 20, 4) {
        assert!(
            volume_change_residual(&g, &dv, &base, &f, &s)
                .unwrap()
                .abs()
                <= 1e-10 * s.y_norm()
        );
        assert!(pric_rescale_residual(&g, &base, &f, &s).unwrap().abs() <= 1e-6);
        let fw = FlatnessWitness::new(WeightedSpray::new(&g, base.clone()), f.clone());
        let (cb, pf) = (
            condition_b_residual(&fw, &s).unwrap(),
            pricf_residual(&fw, &s).unwrap(),
        );
        assert!(rel(cb, pf) < 1e-6);
    }
}

#[test]
fn flat_spray_with_linear_density_is_a_witness() {
    let n = 2;
    let g = FlatSpray::new(ChartBox::cube(n, 1.0));
    let f = ScalarFn::Affine {
        c0: 0.0,
        a: vec![0.5, -0.25],
    };
    let dv = VolumeForm::scaled(VolumeForm::Constant(1.0), f.clone());
    let up = WeightedSpray::new(&g, VolumeForm::rescaled_up(dv.clone(), f.clone()));
    for s in samples(n, 10, 2) {
        assert_eq!(g.coeffs(&s.x, &s.y), vec![0.0, 0.0]);
        assert!(pric_direct(&up, &s).unwrap().abs() < 1e-14);
        let fw = FlatnessWitness::new(WeightedSpray::new(&g, dv.clone()), f.clone());
        assert!(pricf_residual(&fw, &s).unwrap().abs() < 1e-14);
    }
}
