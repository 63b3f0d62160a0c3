//! Sprays and their connection and curvature quantities.
//!
//! A spray is given by coefficients `G^i(x, y)`, positively homogeneous of
//! degree two in `y`; its geodesics solve `ẍ + 2G(x, ẋ) = 0`. Everything here
//! is assembled from derivatives of `G` by the nested-dual helpers in
//! [`crate::jets`], and every kernel is generic over the scalar type so it
//! can be differentiated again.

use crate::error::{ensure_finite, Error, Result};
use crate::expr::Expr;
use crate::jets::{
    field_first, first, second, third, ChartBox, Direction, Field, Mapping, Real, TangentSample,
};

/// Coefficients `G^i` of a spray on a single chart.
pub trait Spray: Sync {
    fn dim(&self) -> usize;
    fn chart(&self) -> &ChartBox;
    fn coeffs<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T>;

    /// Model-specific admissibility of a sample beyond chart membership.
    fn admit(&self, _s: &TangentSample) -> Result<()> {
        Ok(())
    }
}

impl<S: Spray> Spray for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn chart(&self) -> &ChartBox {
        (**self).chart()
    }
    fn coeffs<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T> {
        (**self).coeffs(x, y)
    }
    fn admit(&self, s: &TangentSample) -> Result<()> {
        (**self).admit(s)
    }
}

/// Views spray coefficients as a [`Mapping`].
pub struct Coeffs<'a, S>(pub &'a S);

impl<S: Spray> Mapping for Coeffs<'_, S> {
    fn map<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T> {
        self.0.coeffs(x, y)
    }
}

/// Views the Riemann curvature `R^i_k` (row-major) as a [`Mapping`].
pub struct CurvatureMap<'a, S>(pub &'a S);

impl<S: Spray> Mapping for CurvatureMap<'_, S> {
    fn map<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T> {
        riemann_generic(self.0, x, y)
    }
}

pub(crate) fn prepare<S: Spray>(g: &S, s: &TangentSample) -> Result<()> {
    s.check_on(g.chart())?;
    g.admit(s)
}

/// Four-index array, stored as `data[((a*n + b)*n + c)*n + d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Nonlinear connection and Berwald connection coefficients at a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionData {
    pub n: usize,
    /// `G^i`
    pub g: Vec<f64>,
    /// `N^i_j = ∂G^i/∂y^j` at `[i*n + j]`.
    pub nonlinear: Vec<f64>,
    /// `Γ^i_jk = ∂²G^i/∂y^j∂y^k` at `[(i*n + j)*n + k]`.
    pub christoffel: Vec<f64>,
}

impl ConnectionData {
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> f64 {
        self.christoffel[(i * self.n + j) * self.n + k]
    }
}

/// Curvature bundle at a sample; the four-index tensors only when asked for.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureData {
    /// `R^i_k` at `[i*n + k]`.
    pub riemann: Vec<f64>,
    pub riemann_full: Option<Tensor4>,
    pub berwald: Option<Tensor4>,
    pub ric: f64,
}

/// `N^i_j = ∂G^i/∂y^j` (row-major) together with `G^i`.
pub fn nonlinear_generic<T: Real, S: Spray>(g: &S, x: &[T], y: &[T]) -> (Vec<T>, Vec<T>) {
    let n = g.dim();
    let mut nl = vec![T::zero(); n * n];
    let mut coeffs = Vec::new();
    for j in 0..n {
        let v = first(&Coeffs(g), x, y, &Direction::y_axis(n, j));
        for i in 0..n {
            nl[i * n + j] = v[i].eps;
        }
        if j == 0 {
            coeffs = v.iter().map(|d| d.re).collect();
        }
    }
    (coeffs, nl)
}

/// `R^i_k = 2∂G^i/∂x^k − y^j ∂²G^i/∂x^j∂y^k + 2G^j ∂²G^i/∂y^j∂y^k − N^i_s N^s_k`,
/// row-major in `(i, k)`.
pub fn riemann_generic<T: Real, S: Spray>(g: &S, x: &[T], y: &[T]) -> Vec<T> {
    let n = g.dim();
    let m = Coeffs(g);
    let coeffs = g.coeffs(x, y);
    let twice_g: Vec<T> = coeffs.iter().map(|&v| v.scale(2.0)).collect();
    let along_y = Direction::along_x(y);
    let along_g = Direction::along_y(&twice_g);

    let mut r = vec![T::zero(); n * n];
    let mut nl = vec![T::zero(); n * n];
    for k in 0..n {
        let dxk = first(&m, x, y, &Direction::x_axis(n, k));
        let yk = Direction::y_axis(n, k);
        let transport = second(&m, x, y, &yk, &along_y);
        let spray_term = second(&m, x, y, &yk, &along_g);
        for i in 0..n {
            nl[i * n + k] = transport[i].d1;
            r[i * n + k] = dxk[i].eps.scale(2.0) - transport[i].d12 + spray_term[i].d12;
        }
    }
    for i in 0..n {
        for k in 0..n {
            let mut s = T::zero();
            for q in 0..n {
                s += nl[i * n + q] * nl[q * n + k];
            }
            r[i * n + k] -= s;
        }
    }
    r
}

pub fn ricci_generic<T: Real, S: Spray>(g: &S, x: &[T], y: &[T]) -> T {
    let n = g.dim();
    let r = riemann_generic(g, x, y);
    (0..n).fold(T::zero(), |s, m| s + r[m * n + m])
}

/// `H_{|0} = y^m ∂H/∂x^m − 2G^m ∂H/∂y^m`: the derivative of `H` along the
/// spray vector field. Equals `H_{|m} y^m` for the Berwald horizontal frame
/// because `N^j_m y^m = 2G^j`.
pub fn horizontal_generic<T: Real, H: Field, S: Spray>(h: &H, g: &S, x: &[T], y: &[T]) -> T {
    let coeffs = g.coeffs(x, y);
    let dy: Vec<T> = coeffs.iter().map(|&v| v.scale(-2.0)).collect();
    field_first(h, x, y, &Direction::new(y.to_vec(), dy)).eps
}

/// Nonlinear connection `N` and Berwald coefficients `Γ` at `s`.
pub fn connection<S: Spray>(g: &S, s: &TangentSample) -> Result<ConnectionData> {
    prepare(g, s)?;
    let n = g.dim();
    let (coeffs, nonlinear) = nonlinear_generic(g, &s.x, &s.y);
    let mut christoffel = vec![0.0; n * n * n];
    for j in 0..n {
        for k in 0..n {
            let v = second(
                &Coeffs(g),
                &s.x,
                &s.y,
                &Direction::y_axis(n, j),
                &Direction::y_axis(n, k),
            );
            for i in 0..n {
                christoffel[(i * n + j) * n + k] = v[i].d12;
            }
        }
    }
    ensure_finite("G", &coeffs)?;
    ensure_finite("N", &nonlinear)?;
    ensure_finite("Gamma", &christoffel)?;
    Ok(ConnectionData {
        n,
        g: coeffs,
        nonlinear,
        christoffel,
    })
}

/// Riemann curvature `R^i_k` at `s`, row-major.
pub fn riemann_curvature<S: Spray>(g: &S, s: &TangentSample) -> Result<Vec<f64>> {
    prepare(g, s)?;
    let r = riemann_generic(g, &s.x, &s.y);
    ensure_finite("R", &r)?;
    Ok(r)
}

/// `Ric = R^m_m`.
pub fn ricci<S: Spray>(g: &S, s: &TangentSample) -> Result<f64> {
    prepare(g, s)?;
    let v = ricci_generic(g, &s.x, &s.y);
    ensure_finite("Ric", &[v])?;
    Ok(v)
}

/// `R_j^i_{kl} = ⅓ (R^i_{k·l} − R^i_{l·k})_{·j}`, stored at `get(j, i, k, l)`.
///
/// Obtained by differentiating [`riemann_generic`] twice in the fiber, so the
/// contraction `y^j R_j^i_{kl} y^l = R^i_k` is a genuine cross-check.
pub fn riemann_tensor<S: Spray>(g: &S, s: &TangentSample) -> Result<Tensor4> {
    prepare(g, s)?;
    let n = g.dim();
    // hess[(a*n + b)][i*n + k] = ∂²R^i_k / ∂y^a ∂y^b
    let mut hess = vec![Vec::new(); n * n];
    for a in 0..n {
        for b in a..n {
            let v: Vec<f64> = second(
                &CurvatureMap(g),
                &s.x,
                &s.y,
                &Direction::y_axis(n, a),
                &Direction::y_axis(n, b),
            )
            .into_iter()
            .map(|j| j.d12)
            .collect();
            ensure_finite("Rfull", &v)?;
            hess[b * n + a] = v.clone();
            hess[a * n + b] = v;
        }
    }
    let mut t = Tensor4::zeros(n);
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = (hess[j * n + l][i * n + k] - hess[j * n + k][i * n + l]) / 3.0;
                    t.set(j, i, k, l, v);
                }
            }
        }
    }
    Ok(t)
}

/// Berwald tensor `B_j^i_{kl} = ∂³G^i/∂y^j∂y^k∂y^l`, stored at `get(j, i, k, l)`.
///
/// This is the component form of the `ω ∧ ω^{n+l}` part of the Berwald
/// curvature 2-form; the 2-form itself is never built.
pub fn berwald_tensor<S: Spray>(g: &S, s: &TangentSample) -> Result<Tensor4> {
    prepare(g, s)?;
    let n = g.dim();
    let mut t = Tensor4::zeros(n);
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                let v = third(
                    &Coeffs(g),
                    &s.x,
                    &s.y,
                    &Direction::y_axis(n, j),
                    &Direction::y_axis(n, k),
                    &Direction::y_axis(n, l),
                );
                ensure_finite("B", &v)?;
                for (i, vi) in v.into_iter().enumerate() {
                    t.set(j, i, k, l, vi);
                }
            }
        }
    }
    Ok(t)
}

/// Curvature bundle; `full` adds the Riemann and Berwald tensors.
pub fn curvature<S: Spray>(g: &S, s: &TangentSample, full: bool) -> Result<CurvatureData> {
    let riemann = riemann_curvature(g, s)?;
    let n = g.dim();
    let ric = (0..n).map(|m| riemann[m * n + m]).sum();
    let (riemann_full, berwald) = if full {
        (Some(riemann_tensor(g, s)?), Some(berwald_tensor(g, s)?))
    } else {
        (None, None)
    };
    Ok(CurvatureData {
        riemann,
        riemann_full,
        berwald,
        ric,
    })
}

/// `H_{|0}` at `s` with respect to `g`.
pub fn horizontal_derivative_0<H: Field, S: Spray>(h: &H, g: &S, s: &TangentSample) -> Result<f64> {
    prepare(g, s)?;
    let v = horizontal_generic(h, g, &s.x, &s.y);
    ensure_finite("H|0", &[v])?;
    Ok(v)
}

/// The projectively related spray `G^i + P y^i`.
#[derive(Clone, Debug)]
pub struct ProjectiveDeform<S, P> {
    pub base: S,
    pub p: P,
}

impl<S: Spray, P: Field> Spray for ProjectiveDeform<S, P> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn chart(&self) -> &ChartBox {
        self.base.chart()
    }
    fn coeffs<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T> {
        let p = self.p.eval(x, y);
        self.base
            .coeffs(x, y)
            .into_iter()
            .zip(y)
            .map(|(g, &yi)| g + p * yi)
            .collect()
    }
    fn admit(&self, s: &TangentSample) -> Result<()> {
        self.base.admit(s)
    }
}

/// Relative tolerance of the `P(x, 2y) = 2P(x, y)` probe.
pub const DEFORM_HOMOGENEITY_TOL: f64 = 1e-8;

/// Deforms `g` by `P y`. `probes` are used to check that `P` is positively
/// 1-homogeneous.
pub fn projective_deform<S: Spray, P: Field>(
    g: S,
    p: P,
    probes: &[TangentSample],
) -> Result<ProjectiveDeform<S, P>> {
    for s in probes {
        let one = p.eval(&s.x, &s.y);
        let two = p.eval(&s.x, &s.scaled(2.0).y);
        if (two - 2.0 * one).abs() > DEFORM_HOMOGENEITY_TOL * (1.0 + 2.0 * one.abs()) {
            return Err(Error::HomogeneityViolation(format!(
                "P(x, 2y) = {two} but 2P(x, y) = {} at x = {:?}",
                2.0 * one,
                s.x
            )));
        }
    }
    Ok(ProjectiveDeform { base: g, p })
}

/// `G = 0`.
#[derive(Clone, Debug)]
pub struct FlatSpray {
    chart: ChartBox,
}

impl FlatSpray {
    pub fn new(chart: ChartBox) -> Self {
        Self { chart }
    }
}

impl Spray for FlatSpray {
    fn dim(&self) -> usize {
        self.chart.dim()
    }
    fn chart(&self) -> &ChartBox {
        &self.chart
    }
    fn coeffs<T: Real>(&self, _x: &[T], y: &[T]) -> Vec<T> {
        vec![T::zero(); y.len()]
    }
}

/// `G^i = ½ γ^i_jk y^j y^k` with constant `γ`, stored at `[(i*n + j)*n + k]`.
#[derive(Clone, Debug)]
pub struct QuadraticSpray {
    chart: ChartBox,
    gamma: Vec<f64>,
}

impl QuadraticSpray {
    /// `gamma` is symmetrized in its lower indices.
    pub fn new(chart: ChartBox, gamma: Vec<f64>) -> Result<Self> {
        let n = chart.dim();
        if gamma.len() != n * n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n * n,
                got: gamma.len(),
            });
        }
        let mut sym = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    sym[(i * n + j) * n + k] =
                        0.5 * (gamma[(i * n + j) * n + k] + gamma[(i * n + k) * n + j]);
                }
            }
        }
        Ok(Self { chart, gamma: sym })
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }
}

impl Spray for QuadraticSpray {
    fn dim(&self) -> usize {
        self.chart.dim()
    }
    fn chart(&self) -> &ChartBox {
        &self.chart
    }
    fn coeffs<T: Real>(&self, _x: &[T], y: &[T]) -> Vec<T> {
        let n = y.len();
        (0..n)
            .map(|i| {
                let mut s = T::zero();
                for j in 0..n {
                    for k in 0..n {
                        s += (y[j] * y[k]).scale(0.5 * self.gamma[(i * n + j) * n + k]);
                    }
                }
                s
            })
            .collect()
    }
}

/// Spray with user-supplied expression coefficients.
#[derive(Clone, Debug)]
pub struct ExprSpray {
    chart: ChartBox,
    coeffs: Vec<Expr>,
}

impl ExprSpray {
    pub fn new(chart: ChartBox, coeffs: Vec<Expr>) -> Result<Self> {
        if coeffs.len() != chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                got: coeffs.len(),
            });
        }
        Ok(Self { chart, coeffs })
    }
}

impl Spray for ExprSpray {
    fn dim(&self) -> usize {
        self.chart.dim()
    }
    fn chart(&self) -> &ChartBox {
        &self.chart
    }
    fn coeffs<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T> {
        self.coeffs.iter().map(|e| e.eval(x, y)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{EuclideanNorm, ZeroField};

    fn s2(x: [f64; 2], y: [f64; 2]) -> TangentSample {
        TangentSample::new(x.to_vec(), y.to_vec()).unwrap()
    }

    fn quadratic() -> QuadraticSpray {
        let n = 2;
        let mut gamma = vec![0.0; n * n * n];
        gamma[0] = 0.3; // γ^0_00
        gamma[1] = -0.2; // γ^0_01
        gamma[2] = -0.2;
        gamma[7] = 0.5; // γ^1_11
        QuadraticSpray::new(ChartBox::cube(2, 1.0), gamma).unwrap()
    }

    #[test]
    fn flat_spray_has_no_connection_or_curvature() {
        let g = FlatSpray::new(ChartBox::cube(2, 1.0));
        let s = s2([0.1, 0.2], [1.0, -0.5]);
        let c = connection(&g, &s).unwrap();
        assert!(c.nonlinear.iter().chain(&c.christoffel).all(|&v| v == 0.0));
        let k = curvature(&g, &s, true).unwrap();
        assert_eq!(k.ric, 0.0);
        assert_eq!(k.riemann_full.unwrap().max_abs(), 0.0);
        assert_eq!(k.berwald.unwrap().max_abs(), 0.0);
    }

    #[test]
    fn quadratic_spray_has_constant_berwald_coefficients() {
        let g = quadratic();
        for y in [[1.0, 0.3], [-0.4, 2.0]] {
            let c = connection(&g, &s2([0.0, 0.5], y)).unwrap();
            for (a, b) in c.christoffel.iter().zip(g.gamma()) {
                assert!((a - b).abs() < 1e-14);
            }
            let ny: Vec<f64> = (0..2)
                .map(|i| c.nonlinear[i * 2] * y[0] + c.nonlinear[i * 2 + 1] * y[1])
                .collect();
            for i in 0..2 {
                assert!((ny[i] - 2.0 * c.g[i]).abs() < 1e-12);
            }
        }
        let b = berwald_tensor(&g, &s2([0.0, 0.0], [1.0, 1.0])).unwrap();
        assert_eq!(b.max_abs(), 0.0);
    }

    #[test]
    fn curvature_is_two_homogeneous() {
        let g = ProjectiveDeform {
            base: quadratic(),
            p: EuclideanNorm,
        };
        let s = s2([0.2, -0.3], [0.7, 0.4]);
        let r1 = riemann_curvature(&g, &s).unwrap();
        let r2 = riemann_curvature(&g, &s.scaled(2.0)).unwrap();
        for (a, b) in r1.iter().zip(&r2) {
            assert!((b - 4.0 * a).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn horizontal_derivative_of_chart_function_for_flat_spray() {
        let g = FlatSpray::new(ChartBox::cube(2, 1.0));
        let f = crate::functions::ScalarFn::Analytic(crate::functions::AnalyticFn {
            c0: 0.0,
            linear: vec![1.0, -2.0],
            quadratic: vec![0.0; 4],
            amp: 0.5,
            wave: vec![1.0, 1.0],
            phase: 0.1,
        });
        let s = s2([0.3, 0.1], [1.0, 2.0]);
        let h = horizontal_derivative_0(&f, &g, &s).unwrap();
        let expect = f.contracted(&s.x, &s.y);
        assert!((h - expect).abs() < 1e-14);
    }

    #[test]
    fn deformation_rules() {
        let probes = vec![s2([0.0, 0.0], [1.0, 2.0])];
        let base = FlatSpray::new(ChartBox::cube(2, 1.0));
        let d = projective_deform(&base, ZeroField, &probes).unwrap();
        let s = &probes[0];
        assert_eq!(d.coeffs(&s.x, &s.y), vec![0.0, 0.0]);
        let d = projective_deform(&base, EuclideanNorm, &probes).unwrap();
        let r = 5f64.sqrt();
        assert_eq!(d.coeffs(&s.x, &s.y), vec![r, 2.0 * r]);
        struct Quadratic;
        impl Field for Quadratic {
            fn eval<T: Real>(&self, _x: &[T], y: &[T]) -> T {
                y[0] * y[0]
            }
        }
        assert!(matches!(
            projective_deform(&base, Quadratic, &probes),
            Err(Error::HomogeneityViolation(_))
        ));
    }

    #[test]
    fn samples_off_chart_are_rejected() {
        let g = FlatSpray::new(ChartBox::cube(2, 1.0));
        assert!(ricci(&g, &s2([2.0, 0.0], [1.0, 0.0])).is_err());
    }
}
