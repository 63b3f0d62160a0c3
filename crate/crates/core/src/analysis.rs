//! Residuals for the projective Ricci-flatness criteria: the witness form
//! `Ric = −(n−1){Ξ_{|0} + Ξ²}`, its equivalent gauge form, the sufficient
//! condition `Ric = 0, S = (n+1)φ_0`, the Randers characterization and the
//! weighted Ricci curvature of a Riemannian metric.
//!
//! Existence statements are checked only in the verifiable direction: a
//! candidate gauge function is supplied and the residuals are evaluated.

use crate::error::{ensure_finite, Error, Result};
use crate::functions::{Contracted, ScalarFn};
use crate::jets::{Field, Real, TangentSample};
use crate::linalg::{dot, quad};
use crate::riemann::{
    beta_generic, levi_civita_spray, s_divergence_generic, second_covariant_generic, BetaData,
    RiemannianData,
};
use crate::scurv::{
    pric_direct_generic, rescale_shift_generic, s_curvature_generic, VolumeForm, WeightedSpray,
};
use crate::spray::{horizontal_generic, prepare, ricci_generic, Spray};

/// A weighted spray together with a candidate gauge function `f`.
#[derive(Clone, Debug)]
pub struct FlatnessWitness<S> {
    pub w: WeightedSpray<S>,
    pub f: ScalarFn,
}

impl<S: Spray> FlatnessWitness<S> {
    pub fn new(w: WeightedSpray<S>, f: ScalarFn) -> Self {
        Self { w, f }
    }

    pub fn xi(&self) -> XiField<'_, S> {
        XiField {
            spray: &self.w.spray,
            volume: &self.w.volume,
            f: &self.f,
        }
    }
}

/// `Ξ = S/(n+1) − f_0`.
pub struct XiField<'a, S> {
    pub spray: &'a S,
    pub volume: &'a VolumeForm,
    pub f: &'a ScalarFn,
}

impl<S: Spray> Field for XiField<'_, S> {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        let n = self.spray.dim() as f64;
        s_curvature_generic(self.spray, self.volume, x, y).scale(1.0 / (n + 1.0))
            - self.f.contracted(x, y)
    }
}

/// `Ξ` at `s`.
pub fn xi<S: Spray>(fw: &FlatnessWitness<S>, s: &TangentSample) -> Result<f64> {
    prepare(&fw.w.spray, s)?;
    let v = fw.xi().eval(&s.x, &s.y);
    ensure_finite("Xi", &[v])?;
    Ok(v)
}

/// `Ric + (n−1){Ξ_{|0} + Ξ²}`.
pub fn pricf_residual<S: Spray>(fw: &FlatnessWitness<S>, s: &TangentSample) -> Result<f64> {
    let g = &fw.w.spray;
    prepare(g, s)?;
    let n = g.dim() as f64;
    let xi = fw.xi();
    let v = xi.eval(&s.x, &s.y);
    let v_h = horizontal_generic(&xi, g, &s.x, &s.y);
    let r = ricci_generic(g, &s.x, &s.y) + (n - 1.0) * (v_h + v * v);
    ensure_finite("PRic-flat residual", &[r])?;
    Ok(r)
}

/// `PRic − (n−1){f_{0|0} − f_0² + (2/(n+1)) f_0 S}`.
pub fn condition_b_residual<S: Spray>(fw: &FlatnessWitness<S>, s: &TangentSample) -> Result<f64> {
    let g = &fw.w.spray;
    prepare(g, s)?;
    let n = g.dim() as f64;
    let p = pric_direct_generic(g, &fw.w.volume, &s.x, &s.y);
    let shift = rescale_shift_generic(g, &fw.w.volume, &fw.f, &s.x, &s.y);
    let r = p - (n - 1.0) * shift;
    ensure_finite("gauge residual", &[r])?;
    Ok(r)
}

/// Largest absolute values seen while checking the sufficient condition.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSReport {
    pub samples: usize,
    pub max_ric: f64,
    pub max_s_defect: f64,
    pub max_pric: f64,
}

/// Checks `Ric = 0` and `S = (n+1)φ_0` on the samples, then that PRic of
/// `dṼ = e^{(n+1)φ} dV` vanishes there. Residuals are measured against
/// `tol·(1 + |y|^k)` with `k` the homogeneity degree of the quantity.
pub fn exact_s_check<S: Spray>(
    g: &S,
    dv: &VolumeForm,
    phi: &ScalarFn,
    samples: &[TangentSample],
    tol: f64,
) -> Result<ExactSReport> {
    let n = g.dim() as f64;
    let mut rep = ExactSReport {
        samples: samples.len(),
        max_ric: 0.0,
        max_s_defect: 0.0,
        max_pric: 0.0,
    };
    let mut broken = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        prepare(g, s)?;
        let ny = s.y_norm();
        let ric = ricci_generic(g, &s.x, &s.y);
        let sd = s_curvature_generic(g, dv, &s.x, &s.y) - (n + 1.0) * phi.contracted(&s.x, &s.y);
        ensure_finite("premises", &[ric, sd])?;
        rep.max_ric = rep.max_ric.max(ric.abs());
        rep.max_s_defect = rep.max_s_defect.max(sd.abs());
        if ric.abs() > tol * (1.0 + ny * ny) {
            broken.push(format!("Ric = {ric:e} at sample {i}"));
        }
        if sd.abs() > tol * (1.0 + ny) {
            broken.push(format!("S − (n+1)φ_0 = {sd:e} at sample {i}"));
        }
    }
    if !broken.is_empty() {
        return Err(Error::PremiseFailed(broken.join("; ")));
    }
    let dvt = VolumeForm::rescaled_up(dv.clone(), phi.clone());
    for (i, s) in samples.iter().enumerate() {
        let p = pric_direct_generic(g, &dvt, &s.x, &s.y);
        ensure_finite("PRic", &[p])?;
        rep.max_pric = rep.max_pric.max(p.abs());
        let ny = s.y_norm();
        if p.abs() > tol * (1.0 + ny * ny) {
            return Err(Error::NumericalBreakdown {
                path: format!("PRic = {p:e} at sample {i} despite both premises holding"),
            });
        }
    }
    Ok(rep)
}

/// `μ = (1/(n+1)) ln(σ_α/σ)`.
pub fn randers_mu(a: &RiemannianData, dv: &VolumeForm) -> ScalarFn {
    let n = a.dim() as f64;
    let ln_alpha = ScalarFn::LnDensity(Box::new(VolumeForm::Riemannian(a.metric.clone())));
    let ln_sigma = ScalarFn::LnDensity(Box::new(dv.clone()));
    ScalarFn::scaled(
        1.0 / (n + 1.0),
        ScalarFn::sum(ln_alpha, ScalarFn::scaled(-1.0, ln_sigma)),
    )
}

/// `h = μ − f`.
pub fn randers_gauge(a: &RiemannianData, dv: &VolumeForm, f: &ScalarFn) -> ScalarFn {
    ScalarFn::sum(randers_mu(a, dv), ScalarFn::scaled(-1.0, f.clone()))
}

/// The Randers residuals at one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct RandersResiduals {
    pub alpha: f64,
    /// `Ric_α − 2s_{0m}s^m_0 − α² s^i_j s^j_i + (n−1)[h_{0;0} + h_0²]`
    pub residual1: f64,
    /// `s^m_{j;m} − (n−1) h_{x^m} s^m_j`, one entry per `j`.
    pub residual2: Vec<f64>,
    /// `residual2` contracted with `y`.
    pub residual2_0: f64,
    /// `|s_{0m}s^m_0 − t_00| + |s^i_j s^j_i − t^m_m|`; the quadratic `s` terms
    /// are the `t` tensor contractions, computed here along a second path.
    pub bridge_defect: f64,
}

impl RandersResiduals {
    /// `residual1 + 2α·residual2_0`: the gauge residual of the Randers spray.
    pub fn reassembled(&self) -> f64 {
        self.residual1 + 2.0 * self.alpha * self.residual2_0
    }
}

/// The two equations characterizing projectively Ricci-flat Randers metrics,
/// for a candidate `h`.
#[derive(Clone, Debug)]
pub struct RandersCharacterization {
    pub a: RiemannianData,
    pub b: BetaData,
    pub h: ScalarFn,
}

impl RandersCharacterization {
    pub fn new(a: &RiemannianData, b: &BetaData, h: ScalarFn) -> Result<Self> {
        if b.form.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.form.dim(),
            });
        }
        Ok(Self {
            a: a.clone(),
            b: b.clone(),
            h,
        })
    }

    pub fn residuals(&self, s: &TangentSample) -> Result<RandersResiduals> {
        s.check_on(&self.a.chart)?;
        self.a.check_at(&s.x)?;
        let n = self.a.dim();
        let nf = n as f64;
        let (x, y) = (&s.x[..], &s.y[..]);
        let metric = &self.a.metric;
        let alpha = metric.norm_squared(x, y).sqrt();
        let bt = beta_generic(metric, &self.b.form, x);
        let ric_a = ricci_generic(&levi_civita_spray(&self.a), x, y);

        // s_{0m} s^m_0 and s^i_j s^j_i straight from s_ij and s^i_j
        let s_lo0: Vec<f64> = (0..n).map(|m| dot(y, &col(&bt.s_anti, n, m))).collect();
        let s_up0: Vec<f64> = (0..n)
            .map(|m| dot(&bt.s_mixed[m * n..(m + 1) * n], y))
            .collect();
        let ss00 = dot(&s_lo0, &s_up0);
        let mut ss_tr = 0.0;
        for i in 0..n {
            for j in 0..n {
                ss_tr += bt.s_mixed[i * n + j] * bt.s_mixed[j * n + i];
            }
        }
        // the same contractions through t_ij = s_il s^l_j and a^{ij}
        let t00 = quad(&bt.t, n, y, y);
        let inv = crate::linalg::spd_inverse(&metric.tensor(x), n)
            .ok_or_else(|| Error::MetricDegenerate { x: x.to_vec() })?;
        let mut t_tr = 0.0;
        for i in 0..n {
            for j in 0..n {
                t_tr += inv[i * n + j] * bt.t[j * n + i];
            }
        }
        let bridge_defect = (ss00 - t00).abs() + (ss_tr - t_tr).abs();

        let h0 = self.h.contracted(x, y);
        let h00 = second_covariant_generic(metric, &self.h, x, y);
        let residual1 = ric_a - 2.0 * ss00 - alpha * alpha * ss_tr + (nf - 1.0) * (h00 + h0 * h0);

        let div = s_divergence_generic(metric, &self.b.form, x);
        let dh = self.h.gradient(x);
        let residual2: Vec<f64> = (0..n)
            .map(|j| {
                let c = (0..n).fold(0.0, |acc, m| acc + dh[m] * bt.s_mixed[m * n + j]);
                div[j] - (nf - 1.0) * c
            })
            .collect();
        let residual2_0 = dot(&residual2, y);
        ensure_finite(
            "Randers residuals",
            &[residual1, residual2_0, bridge_defect],
        )?;
        Ok(RandersResiduals {
            alpha,
            residual1,
            residual2,
            residual2_0,
            bridge_defect,
        })
    }
}

fn col(m: &[f64], n: usize, j: usize) -> Vec<f64> {
    (0..n).map(|i| m[i * n + j]).collect()
}

/// Evaluates both residuals on every sample.
pub fn randers_characterization(
    a: &RiemannianData,
    b: &BetaData,
    h: &ScalarFn,
    samples: &[TangentSample],
) -> Result<Vec<RandersResiduals>> {
    let rc = RandersCharacterization::new(a, b, h.clone())?;
    samples.iter().map(|s| rc.residuals(s)).collect()
}

/// Whether a term is rational in `y` or `α` times a rational function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// One summand of an `A + αB` expression. For odd terms `value` is the
/// coefficient of `α`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub label: &'static str,
    pub parity: Option<Parity>,
    pub value: f64,
}

impl Term {
    pub fn even(label: &'static str, value: f64) -> Self {
        Self {
            label,
            parity: Some(Parity::Even),
            value,
        }
    }

    pub fn odd(label: &'static str, value: f64) -> Self {
        Self {
            label,
            parity: Some(Parity::Odd),
            value,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbSplit {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
}

impl AbSplit {
    pub fn reconstruct(&self) -> f64 {
        self.a + self.alpha * self.b
    }
}

/// Separates a tagged sum into its even part `A` and the coefficient `B`
/// of `α`.
pub fn ab_split(terms: &[Term], alpha: f64) -> Result<AbSplit> {
    let mut out = AbSplit {
        a: 0.0,
        b: 0.0,
        alpha,
    };
    for t in terms {
        match t.parity {
            Some(Parity::Even) => out.a += t.value,
            Some(Parity::Odd) => out.b += t.value,
            None => {
                return Err(Error::ParityViolation(format!(
                    "term `{}` carries no tag",
                    t.label
                )))
            }
        }
    }
    Ok(out)
}

/// The terms of `PRic_{(G_F, dV)} − (n−1){f_{0|0} − f_0² + (2/(n+1)) f_0 S}`
/// for a Randers metric, expanded through `Ḡ`, `s^i_j`, `μ` and `f`.
pub fn randers_flatness_terms(
    a: &RiemannianData,
    b: &BetaData,
    dv: &VolumeForm,
    f: &ScalarFn,
    s: &TangentSample,
) -> Result<(Vec<Term>, f64)> {
    s.check_on(&a.chart)?;
    a.check_at(&s.x)?;
    let n = a.dim();
    let k = n as f64 - 1.0;
    let (x, y) = (&s.x[..], &s.y[..]);
    let metric = &a.metric;
    let alpha = metric.norm_squared(x, y).sqrt();
    let bt = beta_generic(metric, &b.form, x);
    let mu = randers_mu(a, dv);
    let mu0 = mu.contracted(x, y);
    let mu00 = second_covariant_generic(metric, &mu, x, y);
    let f0 = f.contracted(x, y);
    let f00 = second_covariant_generic(metric, f, x, y);
    let s0: Vec<f64> = (0..n)
        .map(|m| dot(&bt.s_mixed[m * n..(m + 1) * n], y))
        .collect();
    let dmu = mu.gradient(x);
    let df = f.gradient(x);
    let div0 = dot(&s_divergence_generic(metric, &b.form, x), y);
    let mut t_tr = 0.0;
    for i in 0..n {
        for j in 0..n {
            t_tr += bt.s_mixed[i * n + j] * bt.s_mixed[j * n + i];
        }
    }
    let terms = vec![
        Term::even("Ric_alpha", ricci_generic(&levi_civita_spray(a), x, y)),
        Term::even("-2 t00", -2.0 * quad(&bt.t, n, y, y)),
        Term::even("-alpha^2 t", -alpha * alpha * t_tr),
        Term::even("(n-1) mu00", k * mu00),
        Term::even("(n-1) mu0^2", k * mu0 * mu0),
        Term::even("(n-1) f0^2", k * f0 * f0),
        Term::even("-(n-1) f00", -k * f00),
        Term::even("-2(n-1) f0 mu0", -2.0 * k * f0 * mu0),
        Term::odd("2 s^m_0;m", 2.0 * div0),
        Term::odd("-2(n-1) s^m_0 mu_m", -2.0 * k * dot(&s0, &dmu)),
        Term::odd("2(n-1) s^m_0 f_m", 2.0 * k * dot(&s0, &df)),
    ];
    let vals: Vec<f64> = terms.iter().map(|t| t.value).collect();
    ensure_finite("Randers terms", &vals)?;
    Ok((terms, alpha))
}

/// `Ric_α + (n−1){f_{0;0} + f_0²}`.
pub fn weighted_ricci(a: &RiemannianData, f: &ScalarFn, s: &TangentSample) -> Result<f64> {
    s.check_on(&a.chart)?;
    a.check_at(&s.x)?;
    let n = a.dim() as f64;
    let g = levi_civita_spray(a);
    let ric = ricci_generic(&g, &s.x, &s.y);
    let f0 = f.contracted(&s.x, &s.y);
    let f00 = second_covariant_generic(&a.metric, f, &s.x, &s.y);
    let v = ric + (n - 1.0) * (f00 + f0 * f0);
    ensure_finite("weighted Ricci", &[v])?;
    Ok(v)
}

/// `f_{0|0}` with respect to `G`, used where the covariant and the spray
/// derivative are compared.
pub fn gauge_second_derivative<S: Spray>(g: &S, f: &ScalarFn, s: &TangentSample) -> Result<f64> {
    prepare(g, s)?;
    let v = horizontal_generic(&Contracted(f.clone()), g, &s.x, &s.y);
    ensure_finite("f_{0|0}", &[v])?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::ChartBox;
    use crate::riemann::{Metric, OneForm};
    use crate::spray::FlatSpray;

    fn sample(x: &[f64], y: &[f64]) -> TangentSample {
        TangentSample::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn flat_witness_is_trivial() {
        let w = WeightedSpray::new(
            FlatSpray::new(ChartBox::cube(3, 1.0)),
            VolumeForm::Constant(1.0),
        );
        let fw = FlatnessWitness::new(w, ScalarFn::zero());
        let s = sample(&[0.1, 0.2, 0.3], &[1.0, -1.0, 0.5]);
        assert_eq!(pricf_residual(&fw, &s).unwrap(), 0.0);
        assert_eq!(condition_b_residual(&fw, &s).unwrap(), 0.0);
    }

    #[test]
    fn untagged_term_is_rejected() {
        let t = Term {
            label: "x",
            parity: None,
            value: 1.0,
        };
        assert!(matches!(
            ab_split(&[t], 1.0),
            Err(Error::ParityViolation(_))
        ));
        let split = ab_split(&[Term::odd("a s0", 0.25)], 2.0).unwrap();
        assert_eq!((split.a, split.b, split.reconstruct()), (0.0, 0.25, 0.5));
    }

    #[test]
    fn euclidean_randers_with_zero_form() {
        let a = RiemannianData::new(Metric::euclidean(2), ChartBox::cube(2, 1.0)).unwrap();
        let b = BetaData::new(OneForm::zero(2));
        let s = sample(&[0.1, -0.3], &[0.7, 1.1]);
        let r = randers_characterization(&a, &b, &ScalarFn::zero(), &[s]).unwrap();
        assert_eq!(r[0].residual1, 0.0);
        assert!(r[0].residual2.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn weighted_ricci_of_flat_quadratic_gauge() {
        let n = 3;
        let c = 0.7;
        let a = RiemannianData::new(Metric::euclidean(n), ChartBox::cube(n, 1.0)).unwrap();
        let f = ScalarFn::half_square(n, c);
        let s = sample(&[0.2, -0.1, 0.4], &[1.0, 0.5, -2.0]);
        let xy: f64 = s.x.iter().zip(&s.y).map(|(a, b)| a * b).sum();
        let y2: f64 = s.y.iter().map(|v| v * v).sum();
        let expect = (n as f64 - 1.0) * (c * y2 + c * c * xy * xy);
        assert!((weighted_ricci(&a, &f, &s).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn flat_exact_s_premises() {
        let g = FlatSpray::new(ChartBox::cube(2, 1.0));
        let s = vec![sample(&[0.0, 0.1], &[1.0, 0.0])];
        let rep =
            exact_s_check(&g, &VolumeForm::Constant(1.0), &ScalarFn::zero(), &s, 1e-10).unwrap();
        assert_eq!(rep.max_pric, 0.0);
        let bad = ScalarFn::Affine {
            c0: 0.0,
            a: vec![1.0, 0.0],
        };
        assert!(matches!(
            exact_s_check(&g, &VolumeForm::Constant(1.0), &bad, &s, 1e-10),
            Err(Error::PremiseFailed(_))
        ));
    }

    #[test]
    fn flat_spray_with_exponential_density() {
        let g = FlatSpray::new(ChartBox::cube(2, 1.0));
        let phi = ScalarFn::Affine {
            c0: 0.1,
            a: vec![0.4, -0.3],
        };
        let dv = VolumeForm::scaled(VolumeForm::Constant(1.0), phi.clone());
        let s = vec![
            sample(&[0.2, 0.1], &[1.0, -0.5]),
            sample(&[-0.3, 0.4], &[0.2, 0.9]),
        ];
        let rep = exact_s_check(&g, &dv, &phi, &s, 1e-12).unwrap();
        assert!(rep.max_s_defect < 1e-14 && rep.max_pric < 1e-14);
    }
}
