//! Executable checks over a model and a sample set.
//!
//! Every check reduces to a maximum residual over samples compared with a
//! tolerance. Unless stated otherwise two values are compared with
//! `|a − b| / (1 + max(|a|, |b|))`.

use serde::Serialize;

use spraylab::analysis::{
    ab_split, condition_b_residual, exact_s_check, pricf_residual, randers_flatness_terms,
    randers_gauge, randers_mu, weighted_ricci, FlatnessWitness, RandersCharacterization,
};
use spraylab::finsler::{
    fundamental_tensor, randers_split, randers_tilde_spray, Family as FinslerFamily, FinslerModel,
};
use spraylab::functions::{Contracted, EuclideanNorm, ScalarFn, ScaledField, SumField};
use spraylab::geoflow::{integrate_geodesic, riccati_comparison_demo, riccati_residual, xi_along};
use spraylab::jets::{fd_reference, jet_eval, Field, Orders, Real, TangentSample, Var};
use spraylab::linalg::{dot, quad};
use spraylab::riemann::{
    beta_derived, levi_civita_spray, s_divergence, scalar_second_covariant, AlphaNorm, BetaField,
    Metric, OneForm,
};
use spraylab::scurv::{
    pric_direct, pric_rescale_residual, pric_via_hat, projective_spray, s_curvature,
    volume_change_residual, VolumeForm, WeightedSpray,
};
use spraylab::spray::{
    berwald_tensor, projective_deform, ricci, riemann_curvature, riemann_tensor, Spray,
};
use spraylab::{Error, Result};

use crate::model::{Family, Model, ModelSpray};

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub paper_ref: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// `|a − b| / (1 + max(|a|, |b|))`
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn record(
    prefix: &str,
    id: &str,
    paper_ref: &str,
    tolerance: f64,
    out: Result<(f64, usize)>,
) -> CheckRecord {
    let id = if prefix.is_empty() {
        id.to_string()
    } else {
        format!("{prefix}:{id}")
    };
    match out {
        Ok((max, samples)) => CheckRecord {
            id,
            paper_ref: paper_ref.into(),
            samples,
            max_residual: max,
            tolerance,
            pass: max.is_finite() && max <= tolerance,
            error: None,
        },
        Err(e) => CheckRecord {
            id,
            paper_ref: paper_ref.into(),
            samples: 0,
            max_residual: f64::MAX,
            tolerance,
            pass: false,
            error: Some(e.to_string()),
        },
    }
}

fn max_over<F>(samples: &[TangentSample], mut f: F) -> Result<(f64, usize)>
where
    F: FnMut(&TangentSample) -> Result<f64>,
{
    let mut m = 0.0f64;
    for s in samples {
        let v = f(s)?;
        if v.is_nan() {
            return Err(Error::NumericalBreakdown {
                path: format!("residual at x = {:?}, y = {:?}", s.x, s.y),
            });
        }
        m = m.max(v);
    }
    Ok((m, samples.len()))
}

/// Scalar fields whose jets are compared with finite differences.
enum Probe<'a> {
    Coeff(&'a ModelSpray, usize),
    Energy(&'a FinslerModel),
    Chart(ScalarFn),
}

impl Field for Probe<'_> {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        match self {
            Probe::Coeff(g, i) => g.coeffs(x, y)[*i],
            Probe::Energy(fm) => fm.norm_squared(x, y),
            Probe::Chart(f) => f.eval(x),
        }
    }
}

/// Largest relative AD/FD discrepancy over all slots of the full jet:
/// `(orders 1–2, order 3)`.
pub fn ad_vs_fd(model: &Model, samples: &[TangentSample]) -> Result<((f64, usize), (f64, usize))> {
    let n = model.dim();
    let mut probes: Vec<Probe> = (0..n).map(|i| Probe::Coeff(&model.spray, i)).collect();
    if let Some(fm) = &model.finsler {
        probes.push(Probe::Energy(fm));
    }
    probes.push(Probe::Chart(ScalarFn::LnDensity(Box::new(
        model.volume.clone(),
    ))));
    probes.push(Probe::Chart(model.f.clone()));
    let (mut low, mut high) = (0.0f64, 0.0f64);
    let chart = Some(&model.chart);
    for s in samples {
        for p in &probes {
            let jet = jet_eval(p, s, Orders::FULL)?;
            let fd = |vars: &[Var]| fd_reference(p, s, vars, chart);
            let dx = jet.dx.as_ref().expect("full jet");
            let dy = jet.dy.as_ref().expect("full jet");
            let dxdy = jet.dxdy.as_ref().expect("full jet");
            let dydy = jet.dydy.as_ref().expect("full jet");
            let dxdx = jet.dxdx.as_ref().expect("full jet");
            let d3 = jet.dydydy.as_ref().expect("full jet");
            for j in 0..n {
                low = low.max(rel(dx[j], fd(&[Var::X(j)])?));
                low = low.max(rel(dy[j], fd(&[Var::Y(j)])?));
                for k in 0..n {
                    low = low.max(rel(dxdy[j][k], fd(&[Var::X(j), Var::Y(k)])?));
                    low = low.max(rel(dydy[j][k], fd(&[Var::Y(j), Var::Y(k)])?));
                    low = low.max(rel(dxdx[j][k], fd(&[Var::X(j), Var::X(k)])?));
                    for l in 0..n {
                        high = high.max(rel(d3[j][k][l], fd(&[Var::Y(j), Var::Y(k), Var::Y(l)])?));
                    }
                }
            }
        }
    }
    Ok(((low, samples.len()), (high, samples.len())))
}

const LAMBDAS: [f64; 3] = [0.5, 2.0, 3.0];

fn homogeneity<F>(samples: &[TangentSample], degree: i32, mut q: F) -> Result<(f64, usize)>
where
    F: FnMut(&TangentSample) -> Result<Vec<f64>>,
{
    max_over(samples, |s| {
        let base = q(s)?;
        let mut worst = 0.0f64;
        for &l in &LAMBDAS {
            let scaled = q(&s.scaled(l))?;
            for (a, b) in scaled.iter().zip(&base) {
                worst = worst.max(rel(*a, l.powi(degree) * b));
            }
        }
        Ok(worst)
    })
}

fn weighted(model: &Model) -> WeightedSpray<&ModelSpray> {
    WeightedSpray::new(&model.spray, model.volume.clone())
}

/// `y^j R_j^i_kl y^l = R^i_k` and `R^m_m = Ric`.
pub fn contraction(model: &Model, samples: &[TangentSample]) -> Result<(f64, usize)> {
    let n = model.dim();
    let g = &model.spray;
    max_over(samples, |s| {
        let full = riemann_tensor(g, s)?;
        let r = riemann_curvature(g, s)?;
        let ric = ricci(g, s)?;
        let mut worst = 0.0f64;
        let mut trace = 0.0;
        for i in 0..n {
            for k in 0..n {
                let mut c = 0.0;
                for j in 0..n {
                    for l in 0..n {
                        c += s.y[j] * full.get(j, i, k, l) * s.y[l];
                    }
                }
                if i == k {
                    trace += c;
                }
                worst = worst.max(rel(c, r[i * n + k]));
            }
        }
        Ok(worst.max(rel(trace, ric)))
    })
}

fn invariance<P: Field>(model: &Model, p: P, samples: &[TangentSample]) -> Result<(f64, usize)> {
    let probes = &samples[..samples.len().min(5)];
    let deformed = projective_deform(&model.spray, p, probes)?;
    let wd = WeightedSpray::new(&deformed, model.volume.clone());
    let w = weighted(model);
    max_over(samples, |s| {
        Ok(rel(pric_via_hat(&wd, s)?, pric_via_hat(&w, s)?))
    })
}

/// PRic under `G → G + Py` for `P = F` (or `|y|`), `P = c f_0` and an
/// `α + β`-shaped `P`.
pub fn projective_invariance(model: &Model, samples: &[TangentSample]) -> Result<(f64, usize)> {
    let n = model.dim();
    let first = match &model.finsler {
        Some(fm) => invariance(model, fm, samples)?,
        None => invariance(model, EuclideanNorm, samples)?,
    };
    let gauge = if model.f == ScalarFn::zero() {
        ScalarFn::Affine {
            c0: 0.0,
            a: (0..n).map(|i| 0.3 - 0.2 * i as f64).collect(),
        }
    } else {
        model.f.clone()
    };
    let second = invariance(model, ScaledField(0.7, Contracted(gauge)), samples)?;
    let metric = model
        .riemann
        .as_ref()
        .map_or_else(|| Metric::euclidean(n), |a| a.metric.clone());
    let beta = OneForm::Constant(
        (0..n)
            .map(|i| if i % 2 == 0 { 0.2 } else { -0.1 })
            .collect(),
    );
    let third = invariance(model, SumField(AlphaNorm(metric), BetaField(beta)), samples)?;
    Ok((first.0.max(second.0).max(third.0), samples.len()))
}

fn gauge_for_laws(model: &Model) -> (VolumeForm, VolumeForm, ScalarFn) {
    model.volume_pair()
}

fn riccati_demo_records() -> Vec<CheckRecord> {
    let mut out = Vec::new();
    for xi0 in [-1.0, -0.5, 2.0] {
        let res = riccati_comparison_demo(xi0, 0.0, 4.0, 1e-4, 0.01).and_then(|d| {
            match (d.blowup_time, d.bound) {
                (Some(t), Some(b)) => Ok(((t - b).abs() / b.abs(), 1)),
                _ => Err(Error::NumericalBreakdown {
                    path: format!("no blow-up for Ξ(0) = {xi0}"),
                }),
            }
        });
        out.push(record(
            "",
            &format!("riccati-blowup[{xi0}]"),
            "Ξ' = −Ξ²: blow-up at t = −1/Ξ(0)",
            0.01,
            res,
        ));
    }
    let res = riccati_comparison_demo(-0.5, 0.1, 4.0, 1e-4, 0.01).and_then(|with_q| {
        let without = riccati_comparison_demo(-0.5, 0.0, 4.0, 1e-4, 0.01)?;
        match (with_q.blowup_time, without.blowup_time) {
            (Some(a), Some(b)) => Ok(((a - b).max(0.0) + if a < b { 0.0 } else { 1.0 }, 1)),
            _ => Err(Error::NumericalBreakdown {
                path: "missing blow-up in the comparison run".into(),
            }),
        }
    });
    out.push(record(
        "",
        "riccati-comparison",
        "q ≥ 0 blows up no later than q = 0",
        0.0,
        res,
    ));
    let zero = riccati_comparison_demo(0.0, 0.0, 2.0, 1e-3, 0.01)
        .map(|d| (d.xi.iter().fold(0.0f64, |m, v| m.max(v.abs())), d.xi.len()));
    out.push(record(
        "",
        "riccati-zero",
        "Ξ(0) = 0, q = 0 stays at 0",
        0.0,
        zero,
    ));
    out
}

/// Model-independent checks of the scalar Riccati comparison.
pub fn scalar_checks() -> Vec<CheckRecord> {
    riccati_demo_records()
}

/// Runs every check that applies to `model`.
pub fn model_checks(model: &Model, samples: &[TangentSample]) -> Vec<CheckRecord> {
    let p = model.name.as_str();
    let n = model.dim();
    let nf = n as f64;
    let g = &model.spray;
    let w = weighted(model);
    let mut out = Vec::new();

    match ad_vs_fd(model, samples) {
        Ok((low, high)) => {
            out.push(record(
                p,
                "ad-fd-order-1-2",
                "AD jets = central differences",
                1e-5,
                Ok(low),
            ));
            out.push(record(
                p,
                "ad-fd-order-3",
                "AD jets = central differences",
                1e-4,
                Ok(high),
            ));
        }
        Err(e) => {
            out.push(record(
                p,
                "ad-fd-order-1-2",
                "AD jets = central differences",
                1e-5,
                Err(e.clone()),
            ));
            out.push(record(
                p,
                "ad-fd-order-3",
                "AD jets = central differences",
                1e-4,
                Err(e),
            ));
        }
    }

    out.push(record(
        p,
        "homogeneity-G",
        "G(x, λy) = λ² G(x, y)",
        1e-9,
        homogeneity(samples, 2, |s| Ok(g.coeffs(&s.x, &s.y))),
    ));
    out.push(record(
        p,
        "homogeneity-S",
        "S(x, λy) = λ S(x, y)",
        1e-9,
        homogeneity(samples, 1, |s| Ok(vec![s_curvature(&w, s)?])),
    ));
    out.push(record(
        p,
        "homogeneity-Ric",
        "Ric(x, λy) = λ² Ric(x, y)",
        1e-9,
        homogeneity(samples, 2, |s| Ok(vec![ricci(g, s)?])),
    ));
    out.push(record(
        p,
        "homogeneity-PRic",
        "PRic(x, λy) = λ² PRic(x, y)",
        1e-7,
        homogeneity(samples, 2, |s| Ok(vec![pric_direct(&w, s)?])),
    ));
    out.push(record(
        p,
        "curvature-contraction",
        "y^j R_j^i_kl y^l = R^i_k, R^m_m = Ric",
        1e-6,
        contraction(model, samples),
    ));
    out.push(record(
        p,
        "pric-routes",
        "Ric_Ĝ = Ric + (n−1){S_|0/(n+1) + [S/(n+1)]²}",
        1e-6,
        max_over(samples, |s| {
            Ok(rel(pric_via_hat(&w, s)?, pric_direct(&w, s)?))
        }),
    ));
    out.push(record(
        p,
        "pric-projective-invariance",
        "PRic(G + Py, dV) = PRic(G, dV)",
        1e-6,
        projective_invariance(model, samples),
    ));
    let (dv, dvt, f) = gauge_for_laws(model);
    out.push(record(
        p,
        "s-volume-change",
        "S(G,dV) − S(G,dṼ) = (n+1) f_0 for dV = e^{−(n+1)f} dṼ",
        1e-10,
        max_over(samples, |s| {
            Ok(volume_change_residual(g, &dv, &dvt, &f, s)?.abs() / s.y_norm())
        }),
    ));
    let law_f = if f == ScalarFn::zero() {
        model.f.clone()
    } else {
        f.clone()
    };
    out.push(record(
        p,
        "pric-volume-change",
        "PRic(G,dṼ) = PRic(G,dV) − (n−1){f_0|0 − f_0² + 2f_0 S/(n+1)}",
        1e-6,
        max_over(samples, |s| {
            Ok(pric_rescale_residual(g, &model.volume, &law_f, s)?.abs()
                / (1.0 + s.y_norm().powi(2)))
        }),
    ));
    let hat = WeightedSpray::new(projective_spray(&w), model.volume.clone());
    out.push(record(
        p,
        "projective-spray-s",
        "S(Ĝ, dV) = 0",
        1e-9,
        max_over(samples, |s| {
            Ok(s_curvature(&hat, s)?.abs() / (1.0 + s.y_norm()))
        }),
    ));
    let fw = FlatnessWitness::new(weighted(model), model.f.clone());
    out.push(record(
        p,
        "gauge-equivalence",
        "PRic − (n−1){f_0|0 − f_0² + 2f_0 S/(n+1)} = Ric + (n−1){Ξ_|0 + Ξ²}",
        1e-6,
        max_over(samples, |s| {
            let cb = condition_b_residual(&fw, s)?;
            let pf = pricf_residual(&fw, s)?;
            Ok((cb - pf).abs() / (1.0 + pric_direct(&w, s)?.abs()))
        }),
    ));
    if model.witness {
        out.push(record(
            p,
            "witness-flatness",
            "Ric = −(n−1){Ξ_|0 + Ξ²}",
            1e-6,
            max_over(samples, |s| {
                Ok(pricf_residual(&fw, s)?.abs() / (1.0 + s.y_norm().powi(2)))
            }),
        ));
        let up = WeightedSpray::new(
            g,
            VolumeForm::rescaled_up(model.volume.clone(), model.f.clone()),
        );
        out.push(record(
            p,
            "witness-rescaled-pric",
            "PRic(G, e^{(n+1)f} dV) = 0",
            1e-6,
            max_over(samples, |s| {
                Ok(pric_direct(&up, s)?.abs() / (1.0 + s.y_norm().powi(2)))
            }),
        ));
    }
    if let Some(phi) = &model.phi {
        let res =
            exact_s_check(g, &model.volume, phi, samples, 1e-8).map(|r| (r.max_pric, r.samples));
        out.push(record(
            p,
            "ricci-flat-exact-s",
            "Ric = 0, S = (n+1)φ_0 ⇒ PRic = 0",
            1e-8,
            res,
        ));
    }

    if let (Family::Riemannian, Some(a)) = (model.family, &model.riemann) {
        let lc = levi_civita_spray(a);
        let wv = WeightedSpray::new(
            &lc,
            VolumeForm::scaled(VolumeForm::Riemannian(a.metric.clone()), model.f.clone()),
        );
        out.push(record(
            p,
            "weighted-ricci-route",
            "Ric_α + (n−1){f_0;0 + f_0²} = PRic(Ḡ, e^{−(n+1)f} dV_α)",
            1e-6,
            max_over(samples, |s| {
                Ok(rel(weighted_ricci(a, &model.f, s)?, pric_direct(&wv, s)?))
            }),
        ));
        let wa = WeightedSpray::new(&lc, VolumeForm::Riemannian(a.metric.clone()));
        out.push(record(
            p,
            "levi-civita-s",
            "S(Ḡ, dV_α) = 0",
            1e-9,
            max_over(samples, |s| Ok(s_curvature(&wa, s)?.abs())),
        ));
    }

    if model.is_sphere() {
        let a = model.riemann.as_ref().expect("sphere carries α");
        out.push(record(
            p,
            "sphere-ricci",
            "Ric_α = (n−1)α²",
            1e-8,
            max_over(samples, |s| {
                let alpha2 = a.metric.norm_squared(&s.x, &s.y);
                Ok(rel(ricci(g, s)?, (nf - 1.0) * alpha2))
            }),
        ));
        out.push(record(
            p,
            "sphere-height",
            "φ_0;0 + φα² = 0",
            1e-7,
            max_over(samples, |s| {
                let phi = ScalarFn::SphereHeight;
                let v = scalar_second_covariant(a, &phi, s)?
                    + phi.eval(&s.x) * a.metric.norm_squared(&s.x, &s.y);
                Ok(v.abs() / (1.0 + s.y_norm().powi(2)))
            }),
        ));
        let positive: Vec<TangentSample> = samples
            .iter()
            .filter(|s| ScalarFn::SphereHeight.eval(&s.x) > 0.2)
            .cloned()
            .collect();
        let ln_phi = ScalarFn::ln_abs(ScalarFn::SphereHeight);
        out.push(record(
            p,
            "sphere-weighted-ricci",
            "Ric_α + (n−1){f_0;0 + f_0²} = 0 for f = ln φ",
            1e-6,
            max_over(&positive, |s| Ok(weighted_ricci(a, &ln_phi, s)?.abs())),
        ));
    }

    if let (Some(a), Some(b)) = (&model.riemann, &model.form) {
        out.extend(randers_checks(model, a, b, samples));
    }

    if let Some(FinslerModel {
        family: FinslerFamily::FourthRoot { first, second, c },
        ..
    }) = &model.finsler
    {
        if matches!(first, Metric::Constant { .. }) && matches!(second, Metric::Constant { .. }) {
            out.extend(fourth_root_checks(model, first, second, *c, samples));
        }
    }

    if let Some(spec) = &model.geodesic {
        out.extend(geodesic_checks(model, &spec.start, spec.t_max, spec.step));
    }
    out
}

fn randers_checks(
    model: &Model,
    a: &spraylab::riemann::RiemannianData,
    b: &spraylab::riemann::BetaData,
    samples: &[TangentSample],
) -> Vec<CheckRecord> {
    let p = model.name.as_str();
    let n = model.dim();
    let nf = n as f64;
    let g = &model.spray;
    let dv = &model.volume;
    let mut out = Vec::new();
    let tilde = match randers_tilde_spray(a, b) {
        Ok(t) => t,
        Err(e) => {
            out.push(record(p, "randers-tilde", "G̃ = Ḡ + α s^i_0", 0.0, Err(e)));
            return out;
        }
    };
    out.push(record(
        p,
        "randers-spray-split",
        "G^i = Ḡ^i + α s^i_0 + P y^i",
        1e-8,
        max_over(samples, |s| {
            let direct = g.coeffs(&s.x, &s.y);
            let split = randers_split(a, b, s)?;
            Ok(direct
                .iter()
                .zip(&split.g)
                .fold(0.0f64, |m, (u, v)| m.max(rel(*u, *v))))
        }),
    ));
    out.push(record(
        p,
        "randers-tilde-ricci",
        "Ric_G̃ = Ric_α + 2α s^m_0;m − 2t_00 − α² t^m_m",
        1e-6,
        max_over(samples, |s| {
            let (x, y) = (&s.x[..], &s.y[..]);
            let bt = beta_derived(a, b, x)?;
            let alpha = a.metric.norm_squared(x, y).sqrt();
            let ric_a = ricci(&levi_civita_spray(a), s)?;
            let div0 = dot(&s_divergence(a, b, x)?, y);
            let t00 = quad(&bt.t, n, y, y);
            let inv = spraylab::linalg::spd_inverse(&a.metric.tensor(x), n)
                .ok_or_else(|| Error::MetricDegenerate { x: x.to_vec() })?;
            let t_tr = (0..n * n).fold(0.0, |acc, k| acc + inv[k] * bt.t[k]);
            let formula = ric_a + 2.0 * alpha * div0 - 2.0 * t00 - alpha * alpha * t_tr;
            Ok(rel(ricci(&tilde, s)?, formula))
        }),
    ));
    let mu = randers_mu(a, dv);
    let wt = WeightedSpray::new(&tilde, dv.clone());
    out.push(record(
        p,
        "randers-tilde-s",
        "S(G̃, dV) = (n+1) μ_0",
        1e-8,
        max_over(samples, |s| {
            Ok(rel(
                s_curvature(&wt, s)?,
                (nf + 1.0) * mu.contracted(&s.x, &s.y),
            ))
        }),
    ));
    let w = weighted(model);
    out.push(record(
        p,
        "randers-s",
        "S(G, dV) = (n+1)(μ_0 + P)",
        1e-8,
        max_over(samples, |s| {
            let pp = randers_split(a, b, s)?.p;
            Ok(rel(
                s_curvature(&w, s)?,
                (nf + 1.0) * (mu.contracted(&s.x, &s.y) + pp),
            ))
        }),
    ));
    let hat_f = projective_spray(&w);
    let hat_t = projective_spray(&wt);
    out.push(record(
        p,
        "randers-projective-spray",
        "Ĝ(G) = Ĝ(G̃) for fixed dV",
        1e-8,
        max_over(samples, |s| {
            let u = hat_f.coeffs(&s.x, &s.y);
            let v = hat_t.coeffs(&s.x, &s.y);
            Ok(u.iter()
                .zip(&v)
                .fold(0.0f64, |m, (a, b)| m.max(rel(*a, *b))))
        }),
    ));
    out.push(record(
        p,
        "randers-pric-via-tilde",
        "PRic(G, dV) = Ric_G̃ + (n−1){S̃_|0/(n+1) + [S̃/(n+1)]²}",
        1e-6,
        max_over(samples, |s| {
            Ok(rel(pric_direct(&w, s)?, pric_direct(&wt, s)?))
        }),
    ));
    let h = randers_gauge(a, dv, &model.f);
    let rc = RandersCharacterization::new(a, b, h);
    let up = WeightedSpray::new(g, VolumeForm::rescaled_up(dv.clone(), model.f.clone()));
    out.push(record(
        p,
        "randers-characterization",
        "residual1 + 2α residual2_0 = PRic(G, e^{(n+1)f} dV) with h = μ − f",
        1e-6,
        rc.as_ref().map_err(|e| e.clone()).and_then(|rc| {
            max_over(samples, |s| {
                Ok(rel(rc.residuals(s)?.reassembled(), pric_direct(&up, s)?))
            })
        }),
    ));
    out.push(record(
        p,
        "randers-sign-bridge",
        "s_0m s^m_0 = t_00, s^i_j s^j_i = t^m_m",
        1e-12,
        rc.as_ref()
            .map_err(|e| e.clone())
            .and_then(|rc| max_over(samples, |s| Ok(rc.residuals(s)?.bridge_defect))),
    ));
    out.push(record(
        p,
        "randers-ab-split",
        "A + αB: A = residual1, B = 2 residual2_0",
        1e-8,
        rc.as_ref().map_err(|e| e.clone()).and_then(|rc| {
            max_over(samples, |s| {
                let r = rc.residuals(s)?;
                let (terms, alpha) = randers_flatness_terms(a, b, dv, &model.f, s)?;
                let split = ab_split(&terms, alpha)?;
                Ok(rel(split.a, r.residual1).max(rel(split.b, 2.0 * r.residual2_0)))
            })
        }),
    ));
    out
}

fn fourth_root_checks(
    model: &Model,
    first: &Metric,
    second: &Metric,
    c: f64,
    samples: &[TangentSample],
) -> Vec<CheckRecord> {
    let p = model.name.as_str();
    let g = &model.spray;
    let w = weighted(model);
    let mut out = vec![
        record(
            p,
            "fourth-root-ricci",
            "Ric_F = 0",
            1e-10,
            max_over(samples, |s| Ok(ricci(g, s)?.abs())),
        ),
        record(
            p,
            "fourth-root-berwald",
            "B = 0",
            1e-10,
            max_over(samples, |s| Ok(berwald_tensor(g, s)?.max_abs())),
        ),
        record(
            p,
            "fourth-root-s",
            "S = 0",
            1e-10,
            max_over(samples, |s| Ok(s_curvature(&w, s)?.abs())),
        ),
        record(
            p,
            "fourth-root-pric",
            "PRic = 0",
            1e-10,
            max_over(samples, |s| {
                Ok(pric_direct(&w, s)?.abs().max(pric_via_hat(&w, s)?.abs()))
            }),
        ),
    ];
    if c == 1.0 {
        let n1 = first.dim();
        let n = model.dim();
        let fm = model.finsler.as_ref().expect("fourth-root model");
        out.push(record(
            p,
            "fourth-root-product-tensor",
            "c = 1: g_ij = a1 ⊕ a2",
            1e-10,
            max_over(samples, |s| {
                let t = fundamental_tensor(fm, s)?;
                let a1: Vec<f64> = first.tensor(&s.x[..n1]);
                let a2: Vec<f64> = second.tensor(&s.x[n1..]);
                let mut worst = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        let expect = if i < n1 && j < n1 {
                            a1[i * n1 + j]
                        } else if i >= n1 && j >= n1 {
                            a2[(i - n1) * (n - n1) + (j - n1)]
                        } else {
                            0.0
                        };
                        worst = worst.max(rel(t.g[i * n + j], expect));
                    }
                }
                Ok(worst)
            }),
        ));
    }
    out
}

/// Step used by the RK4 order check; coarse enough that truncation error
/// dominates round-off.
pub const ORDER_STEP: f64 = 0.05;

/// Endpoint-error ratio `e(h)/e(h/2)` against a reference run at `h/16`.
pub fn rk4_order_factor<S: Spray>(
    g: &S,
    start: &TangentSample,
    t_max: f64,
    h: f64,
) -> Result<Option<f64>> {
    let end = |step: f64| -> Result<Vec<f64>> {
        let path = integrate_geodesic(g, start, t_max, step)?;
        if path.exited() {
            return Err(Error::DomainExit {
                x: path.xs.last().cloned().unwrap_or_default(),
            });
        }
        let mut v = path.xs.last().cloned().unwrap_or_default();
        v.extend(path.vs.last().cloned().unwrap_or_default());
        Ok(v)
    };
    let reference = end(h / 16.0)?;
    let err = |v: Vec<f64>| {
        v.iter()
            .zip(&reference)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    };
    let e1 = err(end(h)?);
    let e2 = err(end(h / 2.0)?);
    if e1 < 1e-13 {
        return Ok(None);
    }
    Ok(Some(e1 / e2))
}

fn geodesic_checks(
    model: &Model,
    start: &TangentSample,
    t_max: f64,
    step: f64,
) -> Vec<CheckRecord> {
    let p = model.name.as_str();
    let n = model.dim();
    let g = &model.spray;
    let mut out = Vec::new();
    let path = match integrate_geodesic(g, start, t_max, step) {
        Ok(path) => path,
        Err(e) => {
            out.push(record(p, "geodesic", "ẍ + 2G(x, ẋ) = 0", 0.0, Err(e)));
            return out;
        }
    };
    if path.exited() {
        out.push(record(
            p,
            "geodesic-in-chart",
            "geodesic stays in the chart",
            0.0,
            Err(Error::DomainExit {
                x: path.xs.last().cloned().unwrap_or_default(),
            }),
        ));
    }
    if model.finsler.is_some() {
        let tol = if model.family == Family::Riemannian {
            1e-8
        } else {
            1e-6
        };
        let f0 = model.norm(&path.xs[0], &path.vs[0]).unwrap_or(1.0);
        let drift = path
            .xs
            .iter()
            .zip(&path.vs)
            .map(|(x, v)| (model.norm(x, v).unwrap_or(f64::NAN) - f0).abs() / f0)
            .fold(0.0f64, f64::max);
        out.push(record(
            p,
            "geodesic-conservation",
            "F(c, ċ) constant",
            tol,
            Ok((drift, path.len())),
        ));
    }
    let fw = FlatnessWitness::new(weighted(model), model.f.clone());
    let tr = xi_along(&fw, &path);
    let d = tr
        .xi_dot
        .iter()
        .zip(&tr.xi_h0)
        .map(|(a, b)| rel(*a, *b))
        .fold(0.0f64, f64::max);
    out.push(record(
        p,
        "xi-derivative",
        "dΞ/dt = Ξ_|0(c, ċ)",
        1e-4,
        Ok((d, path.len())),
    ));
    let res = riccati_residual(&fw, &path).and_then(|r| {
        let mut worst = 0.0f64;
        for (i, ri) in r.iter().enumerate() {
            let expect = if model.witness {
                0.0
            } else {
                pricf_residual(&fw, &path.sample(i)?)? / (n as f64 - 1.0)
            };
            worst = worst.max((ri - expect).abs());
        }
        Ok((worst, r.len()))
    });
    out.push(record(
        p,
        "riccati-identity",
        "Ξ' + Ξ² + Ric/(n−1) = flatness residual/(n−1)",
        1e-4,
        res,
    ));
    match rk4_order_factor(g, start, t_max, ORDER_STEP) {
        Ok(Some(factor)) => out.push(CheckRecord {
            id: format!("{p}:rk4-order"),
            paper_ref: "e(h)/e(h/2) ≈ 16".into(),
            samples: 3,
            max_residual: factor,
            tolerance: 20.0,
            pass: (12.0..=20.0).contains(&factor),
            error: None,
        }),
        Ok(None) => {}
        Err(e) => out.push(record(p, "rk4-order", "e(h)/e(h/2) ≈ 16", 20.0, Err(e))),
    }
    out
}
