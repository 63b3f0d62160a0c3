mod common;

use spraylab::analysis::{pricf_residual, FlatnessWitness};
use spraylab::finsler::{induced_spray, FinslerModel};
use spraylab::functions::ScalarFn;
use spraylab::geoflow::{integrate_geodesic, riccati_comparison_demo, riccati_residual, xi_along};
use spraylab::jets::{ChartBox, TangentSample};
use spraylab::riemann::{levi_civita_spray, Metric, RiemannianData};
use spraylab::scurv::{VolumeForm, WeightedSpray};
use spraylab::spray::{FlatSpray, Spray};

fn endpoint<S: Spray>(g: &S, s0: &TangentSample, t: f64, h: f64) -> Vec<f64> {
    let p = integrate_geodesic(g, s0, t, h).unwrap();
    assert!(!p.exited());
    let mut v = p.xs.last().unwrap().clone();
    v.extend(p.vs.last().unwrap());
    v
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()))
}

#[test]
fn flat_geodesics_are_straight_lines() {
    let g = FlatSpray::new(ChartBox::cube(2, 2.0));
    let s0 = TangentSample::new(vec![-0.5, 0.2], vec![0.4, -0.1]).unwrap();
    let p = integrate_geodesic(&g, &s0, 2.0, 0.01).unwrap();
    for (t, x) in p.times.iter().zip(&p.xs) {
        assert!((x[0] - (-0.5 + 0.4 * t)).abs() < 1e-13);
        assert!((x[1] - (0.2 - 0.1 * t)).abs() < 1e-13);
    }
}

#[test]
fn sphere_geodesic_conserves_speed_and_converges_at_fourth_order() {
    let a = RiemannianData::new(Metric::Stereographic { n: 2 }, ChartBox::cube(2, 0.9)).unwrap();
    let g = levi_civita_spray(&a);
    let s0 = TangentSample::new(vec![0.1, 0.0], vec![0.0, 0.5]).unwrap();
    let p = integrate_geodesic(&g, &s0, 1.0, 1e-3).unwrap();
    let f0 = a.metric.norm_squared(&p.xs[0], &p.vs[0]).sqrt();
    for (x, v) in p.xs.iter().zip(&p.vs) {
        assert!((a.metric.norm_squared(x, v).sqrt() - f0).abs() / f0 < 1e-8);
    }
    let reference = endpoint(&g, &s0, 1.0, 0.05 / 16.0);
    let e1 = dist(&endpoint(&g, &s0, 1.0, 0.05), &reference);
    let e2 = dist(&endpoint(&g, &s0, 1.0, 0.025), &reference);
    let factor = e1 / e2;
    assert!((12.0..=20.0).contains(&factor), "{factor}");
}

#[test]
fn randers_geodesic_conserves_the_norm() {
    let a = RiemannianData::new(Metric::euclidean(2), ChartBox::cube(2, 1.0)).unwrap();
    let b = spraylab::riemann::BetaData::new(spraylab::riemann::OneForm::Constant(vec![0.3, -0.2]));
    let fm = FinslerModel::randers(&a, &b).unwrap();
    let g = induced_spray(&fm);
    let s0 = TangentSample::new(vec![0.0, 0.0], vec![0.3, 0.4]).unwrap();
    let p = integrate_geodesic(&g, &s0, 1.0, 1e-3).unwrap();
    let f0 = fm.norm(&p.xs[0], &p.vs[0]);
    for (x, v) in p.xs.iter().zip(&p.vs) {
        assert!((fm.norm(x, v) - f0).abs() / f0 < 1e-6);
    }
}

#[test]
fn leaving_the_chart_returns_a_partial_path() {
    let g = FlatSpray::new(ChartBox::cube(1, 1.0));
    let s0 = TangentSample::new(vec![0.0], vec![1.0]).unwrap();
    let p = integrate_geodesic(&g, &s0, 5.0, 0.01).unwrap();
    assert!(p.exited());
    let t = p.exit_time.unwrap();
    assert!((t - 1.0).abs() <= 0.011, "{t}");
}

#[test]
fn riccati_identity_along_a_sphere_geodesic() {
    let n = 2;
    let a = RiemannianData::new(Metric::Stereographic { n }, ChartBox::cube(n, 0.9)).unwrap();
    let g = levi_civita_spray(&a);
    let f = ScalarFn::Affine {
        c0: 0.0,
        a: vec![0.2, -0.3],
    };
    let fw = FlatnessWitness::new(
        WeightedSpray::new(&g, VolumeForm::Riemannian(a.metric.clone())),
        f,
    );
    let s0 = TangentSample::new(vec![0.0, 0.1], vec![0.4, 0.2]).unwrap();
    let p = integrate_geodesic(&g, &s0, 1.0, 1e-3).unwrap();
    let tr = xi_along(&fw, &p);
    for (d, h) in tr.xi_dot.iter().zip(&tr.xi_h0) {
        assert!((d - h).abs() < 1e-4);
    }
    let r = riccati_residual(&fw, &p).unwrap();
    for (i, ri) in r.iter().enumerate() {
        let expect = pricf_residual(&fw, &p.sample(i).unwrap()).unwrap() / (n as f64 - 1.0);
        assert!((ri - expect).abs() < 1e-4);
    }
}

#[test]
fn scalar_comparison_blow_up() {
    for xi0 in [-1.0, -0.5] {
        let d = riccati_comparison_demo(xi0, 0.0, 4.0, 1e-4, 0.01).unwrap();
        let t = d.blowup_time.unwrap();
        assert!((t + 1.0 / xi0).abs() <= 0.01 * (1.0 / xi0).abs(), "{t}");
        assert!(d.verdict);
    }
    let with_q = riccati_comparison_demo(-0.5, 0.1, 4.0, 1e-4, 0.01).unwrap();
    let without = riccati_comparison_demo(-0.5, 0.0, 4.0, 1e-4, 0.01).unwrap();
    assert!(with_q.blowup_time.unwrap() < without.blowup_time.unwrap());
}
