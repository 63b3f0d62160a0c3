//! Finsler metrics, their fundamental tensor and the sprays they induce.
//!
//! Geodesic coefficients of any metric are assembled from jets of `F²` as
//! `G^i = ¼ g^{il} ([F²]_{x^k y^l} y^k − [F²]_{x^l})`, independently of the
//! closed forms known for particular families (those serve as cross-checks).

use crate::error::{ensure_finite, Error, Result};
use crate::expr::Expr;
use crate::jets::{first, second, ChartBox, Direction, Field, Real, Scalar, TangentSample};
use crate::linalg::{cholesky, cholesky_solve, nan, quad, spd_inverse};
use crate::riemann::{beta_generic, lc_coeffs_generic, BetaData, Metric, OneForm, RiemannianData};
use crate::spray::Spray;

/// Family-specific data of a Finsler metric.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `F = α`
    Riemannian(Metric),
    /// `F = α + β`
    Randers { metric: Metric, form: OneForm },
    /// `F = (α₁⁴ + 2c α₁²α₂² + α₂⁴)^{1/4}` on a product chart; `first` acts
    /// on the leading coordinates.
    FourthRoot {
        first: Metric,
        second: Metric,
        c: f64,
    },
    /// `F` given as an expression in `x1..xn, y1..yn`.
    Custom(Expr),
}

/// A Finsler metric declared on a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct FinslerModel {
    pub family: Family,
    pub chart: ChartBox,
}

impl FinslerModel {
    pub fn riemannian(a: &RiemannianData) -> Self {
        Self {
            family: Family::Riemannian(a.metric.clone()),
            chart: a.chart.clone(),
        }
    }

    pub fn randers(a: &RiemannianData, b: &BetaData) -> Result<Self> {
        if b.form.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.form.dim(),
            });
        }
        Ok(Self {
            family: Family::Randers {
                metric: a.metric.clone(),
                form: b.form.clone(),
            },
            chart: a.chart.clone(),
        })
    }

    pub fn fourth_root(a1: &RiemannianData, a2: &RiemannianData, c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "fourth-root constant must lie in (0, 1], got {c}"
            )));
        }
        Ok(Self {
            family: Family::FourthRoot {
                first: a1.metric.clone(),
                second: a2.metric.clone(),
                c,
            },
            chart: a1.chart.product(&a2.chart),
        })
    }

    pub fn custom(chart: ChartBox, f: Expr) -> Result<Self> {
        let (nx, ny) = f.arity();
        if nx > chart.dim() || ny > chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                got: nx.max(ny),
            });
        }
        Ok(Self {
            family: Family::Custom(f),
            chart,
        })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `F²`, computed without a square root where the family allows it.
    pub fn norm_squared<T: Real>(&self, x: &[T], y: &[T]) -> T {
        match &self.family {
            Family::Riemannian(m) => m.norm_squared(x, y),
            Family::Randers { metric, form } => {
                let f = metric.norm_squared(x, y).sqrt() + beta(form, x, y);
                f * f
            }
            Family::FourthRoot { first, second, c } => {
                let n1 = first.dim();
                let a1 = first.norm_squared(&x[..n1], &y[..n1]);
                let a2 = second.norm_squared(&x[n1..], &y[n1..]);
                (a1 * a1 + (a1 * a2).scale(2.0 * c) + a2 * a2).sqrt()
            }
            Family::Custom(e) => {
                let f = e.eval(x, y);
                f * f
            }
        }
    }

    /// `F(x, y)`.
    pub fn norm<T: Real>(&self, x: &[T], y: &[T]) -> T {
        match &self.family {
            Family::Randers { metric, form } => metric.norm_squared(x, y).sqrt() + beta(form, x, y),
            Family::Custom(e) => e.eval(x, y),
            _ => self.norm_squared(x, y).sqrt(),
        }
    }

    /// Whether `y` lies in the fiber region used for sampling. Only the
    /// fourth-root family restricts it: both factor norms must exceed
    /// `0.1·|y|`.
    pub fn in_sampling_domain(&self, x: &[f64], y: &[f64]) -> bool {
        match &self.family {
            Family::FourthRoot { first, second, .. } => {
                let n1 = first.dim();
                let ny = crate::jets::euclidean_norm(y);
                let a1 = first.norm_squared(&x[..n1], &y[..n1]).sqrt();
                let a2 = second.norm_squared(&x[n1..], &y[n1..]).sqrt();
                a1 > 0.1 * ny && a2 > 0.1 * ny
            }
            _ => true,
        }
    }
}

fn beta<T: Real>(form: &OneForm, x: &[T], y: &[T]) -> T {
    form.components(x)
        .into_iter()
        .zip(y)
        .fold(T::zero(), |s, (b, &v)| s + b * v)
}

impl Field for FinslerModel {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        self.norm(x, y)
    }
}

/// `F²` as a field.
pub struct Energy<'a>(pub &'a FinslerModel);

impl Field for Energy<'_> {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        self.0.norm_squared(x, y)
    }
}

/// `g_ij = ½ [F²]_{y^i y^j}` and its inverse, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalTensor {
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
}

fn fundamental_generic<T: Real>(fm: &FinslerModel, x: &[T], y: &[T]) -> Vec<T> {
    let n = fm.dim();
    let e = Energy(fm);
    let m = Scalar(&e);
    let mut g = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let v = second(&m, x, y, &Direction::y_axis(n, i), &Direction::y_axis(n, j))[0]
                .d12
                .scale(0.5);
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    g
}

/// Geodesic coefficients `G^i` of `F` at `(x, y)`; NaN if `g` is not
/// positive definite.
pub fn geodesic_generic<T: Real>(fm: &FinslerModel, x: &[T], y: &[T]) -> Vec<T> {
    let n = fm.dim();
    let e = Energy(fm);
    let m = Scalar(&e);
    let along_y = Direction::along_x(y);
    let mut rhs = vec![T::zero(); n];
    for l in 0..n {
        let mixed = second(&m, x, y, &Direction::y_axis(n, l), &along_y)[0].d12;
        let dxl = first(&m, x, y, &Direction::x_axis(n, l))[0].eps;
        rhs[l] = (mixed - dxl).scale(0.25);
    }
    let g = fundamental_generic(fm, x, y);
    match cholesky(&g, n) {
        Some(l) => cholesky_solve(&l, n, &rhs),
        None => vec![nan(); n],
    }
}

/// Fundamental tensor at `s`.
pub fn fundamental_tensor(fm: &FinslerModel, s: &TangentSample) -> Result<FundamentalTensor> {
    s.check_on(&fm.chart)?;
    let n = fm.dim();
    let g = fundamental_generic(fm, &s.x, &s.y);
    ensure_finite("g", &g)?;
    let g_inv = spd_inverse(&g, n).ok_or_else(|| Error::NotStronglyConvex {
        x: s.x.clone(),
        y: s.y.clone(),
    })?;
    Ok(FundamentalTensor { g, g_inv })
}

/// `G^i` of `F` at `s`.
pub fn geodesic_coefficients(fm: &FinslerModel, s: &TangentSample) -> Result<Vec<f64>> {
    fundamental_tensor(fm, s)?;
    let g = geodesic_generic(fm, &s.x, &s.y);
    ensure_finite("G", &g)?;
    Ok(g)
}

/// The spray of a Finsler metric.
#[derive(Clone, Debug)]
pub struct InducedSpray {
    pub model: FinslerModel,
}

pub fn induced_spray(fm: &FinslerModel) -> InducedSpray {
    InducedSpray { model: fm.clone() }
}

impl Spray for InducedSpray {
    fn dim(&self) -> usize {
        self.model.dim()
    }
    fn chart(&self) -> &ChartBox {
        &self.model.chart
    }
    fn coeffs<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T> {
        geodesic_generic(&self.model, x, y)
    }
    fn admit(&self, s: &TangentSample) -> Result<()> {
        let f: f64 = self.model.norm(&s.x, &s.y);
        if !(f > 0.0) {
            return Err(Error::NotStronglyConvex {
                x: s.x.clone(),
                y: s.y.clone(),
            });
        }
        fundamental_tensor(&self.model, s).map(|_| ())
    }
}

/// `G̃^i = Ḡ^i + α s^i_0`: projectively related to the Randers spray.
#[derive(Clone, Debug)]
pub struct RandersTildeSpray {
    pub metric: Metric,
    pub form: OneForm,
    pub chart: ChartBox,
}

pub fn randers_tilde_spray(a: &RiemannianData, b: &BetaData) -> Result<RandersTildeSpray> {
    if b.form.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.form.dim(),
        });
    }
    Ok(RandersTildeSpray {
        metric: a.metric.clone(),
        form: b.form.clone(),
        chart: a.chart.clone(),
    })
}

pub fn randers_tilde_generic<T: Real>(metric: &Metric, form: &OneForm, x: &[T], y: &[T]) -> Vec<T> {
    let n = metric.dim();
    let alpha = metric.norm_squared(x, y).sqrt();
    let bt = beta_generic(metric, form, x);
    let mut g = lc_coeffs_generic(metric, x, y);
    for i in 0..n {
        let s_i0 = (0..n).fold(T::zero(), |s, j| s + bt.s_mixed[i * n + j] * y[j]);
        g[i] += alpha * s_i0;
    }
    g
}

impl Spray for RandersTildeSpray {
    fn dim(&self) -> usize {
        self.chart.dim()
    }
    fn chart(&self) -> &ChartBox {
        &self.chart
    }
    fn coeffs<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T> {
        randers_tilde_generic(&self.metric, &self.form, x, y)
    }
    fn admit(&self, s: &TangentSample) -> Result<()> {
        let a = self.metric.tensor(&s.x);
        if cholesky(&a, self.dim()).is_none() {
            return Err(Error::MetricDegenerate { x: s.x.clone() });
        }
        Ok(())
    }
}

/// The closed-form pieces of a Randers spray at a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct RandersSplit {
    pub alpha: f64,
    pub beta: f64,
    /// `Ḡ^i`
    pub g_bar: Vec<f64>,
    /// `G̃^i = Ḡ^i + α s^i_0`
    pub g_tilde: Vec<f64>,
    /// `P = (r_00 − 2α s_0) / (2F)`
    pub p: f64,
    /// `G̃^i + P y^i`
    pub g: Vec<f64>,
}

/// `P = (r_00 − 2α s_0)/(2F)` as a field.
#[derive(Clone, Debug)]
pub struct RandersProjectiveFactor {
    pub metric: Metric,
    pub form: OneForm,
}

impl Field for RandersProjectiveFactor {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        let n = self.metric.dim();
        let alpha = self.metric.norm_squared(x, y).sqrt();
        let bt = beta_generic(&self.metric, &self.form, x);
        let r00 = quad(&bt.r, n, y, y);
        let s0 = bt
            .s_vec
            .iter()
            .zip(y)
            .fold(T::zero(), |s, (&a, &b)| s + a * b);
        let f = alpha + beta(&self.form, x, y);
        (r00 - (alpha * s0).scale(2.0)) / f.scale(2.0)
    }
}

/// Assembles `G = G̃ + P y` from the α/β data directly.
pub fn randers_split(a: &RiemannianData, b: &BetaData, s: &TangentSample) -> Result<RandersSplit> {
    s.check_on(&a.chart)?;
    a.check_at(&s.x)?;
    let n = a.dim();
    let alpha = a.metric.norm_squared(&s.x, &s.y).sqrt();
    let beta_v = beta(&b.form, &s.x, &s.y);
    let g_bar = lc_coeffs_generic(&a.metric, &s.x, &s.y);
    let g_tilde = randers_tilde_generic(&a.metric, &b.form, &s.x, &s.y);
    let p = RandersProjectiveFactor {
        metric: a.metric.clone(),
        form: b.form.clone(),
    }
    .eval(&s.x, &s.y);
    let g: Vec<f64> = (0..n).map(|i| g_tilde[i] + p * s.y[i]).collect();
    ensure_finite("G", &g)?;
    Ok(RandersSplit {
        alpha,
        beta: beta_v,
        g_bar,
        g_tilde,
        p,
        g,
    })
}
