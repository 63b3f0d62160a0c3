//! Riemannian backend: metric fields, 1-forms, Christoffel symbols, the
//! Levi-Civita spray and the tensors derived from a 1-form `β = b_i y^i`.
//!
//! Index raising always goes through a Cholesky factorization; a metric that
//! fails it is reported as [`Error::MetricDegenerate`].

use crate::error::{ensure_finite, Error, Result};
use crate::expr::Expr;
use crate::functions::ScalarFn;
use crate::jets::{first, ChartBox, Direction, Field, Mapping, Real, TangentSample};
use crate::linalg::{cholesky, nan, quad, spd_inverse, spd_sqrt_det};
use crate::spray::Spray;

/// `a_ij = base_ij + amp_ij·sin(w_ij·x + phase_ij)`, symmetric by construction
/// (only `i ≤ j` entries are read).
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticMetric {
    pub n: usize,
    pub base: Vec<f64>,
    pub amp: Vec<f64>,
    /// `wave[(i*n + j)*n + m]`
    pub wave: Vec<f64>,
    pub phase: Vec<f64>,
}

/// A smooth field of symmetric matrices `a_ij(x)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    Constant {
        n: usize,
        a: Vec<f64>,
    },
    /// `4δ_ij / (1 + |x|²)²`: the unit sphere in stereographic coordinates.
    Stereographic {
        n: usize,
    },
    Analytic(AnalyticMetric),
    /// Entries row-major; symmetrized on evaluation.
    Expr {
        n: usize,
        entries: Vec<Expr>,
    },
}

impl Metric {
    pub fn euclidean(n: usize) -> Self {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Metric::Constant { n, a }
    }

    pub fn dim(&self) -> usize {
        match self {
            Metric::Constant { n, .. } | Metric::Stereographic { n } | Metric::Expr { n, .. } => *n,
            Metric::Analytic(m) => m.n,
        }
    }

    /// `a_ij(x)`, row-major.
    pub fn tensor<T: Real>(&self, x: &[T]) -> Vec<T> {
        match self {
            Metric::Constant { a, .. } => a.iter().map(|&v| T::cst(v)).collect(),
            Metric::Stereographic { n } => {
                let r2 = x.iter().fold(T::zero(), |s, &v| s + v * v);
                let c = (T::one() + r2).powi(-2).scale(4.0);
                let mut a = vec![T::zero(); n * n];
                for i in 0..*n {
                    a[i * n + i] = c;
                }
                a
            }
            Metric::Analytic(m) => {
                let n = m.n;
                let mut a = vec![T::zero(); n * n];
                for i in 0..n {
                    for j in i..n {
                        let ij = i * n + j;
                        let mut arg = T::cst(m.phase[ij]);
                        for (k, &xk) in x.iter().enumerate() {
                            arg += xk.scale(m.wave[ij * n + k]);
                        }
                        let v = T::cst(m.base[ij]) + arg.sin().scale(m.amp[ij]);
                        a[ij] = v;
                        a[j * n + i] = v;
                    }
                }
                a
            }
            Metric::Expr { n, entries } => {
                let n = *n;
                let mut a = vec![T::zero(); n * n];
                for i in 0..n {
                    for j in 0..n {
                        a[i * n + j] = (entries[i * n + j].eval(x, &[])
                            + entries[j * n + i].eval(x, &[]))
                        .scale(0.5);
                    }
                }
                a
            }
        }
    }

    /// `α² = a_ij y^i y^j`.
    pub fn norm_squared<T: Real>(&self, x: &[T], y: &[T]) -> T {
        quad(&self.tensor(x), self.dim(), y, y)
    }
}

struct MetricMap<'a>(&'a Metric);

impl Mapping for MetricMap<'_> {
    fn map<T: Real>(&self, x: &[T], _y: &[T]) -> Vec<T> {
        self.0.tensor(x)
    }
}

/// `b_i = c_i + lin_ij x^j + amp_i·sin(w_i·x + phase_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticForm {
    pub n: usize,
    pub c: Vec<f64>,
    pub lin: Vec<f64>,
    pub amp: Vec<f64>,
    /// `wave[i*n + m]`
    pub wave: Vec<f64>,
    pub phase: Vec<f64>,
}

/// A smooth 1-form field `b_i(x)`.
#[derive(Clone, Debug, PartialEq)]
pub enum OneForm {
    Constant(Vec<f64>),
    /// `b = df`: always closed.
    Gradient {
        n: usize,
        f: ScalarFn,
    },
    Analytic(AnalyticForm),
    Expr(Vec<Expr>),
}

impl OneForm {
    pub fn zero(n: usize) -> Self {
        OneForm::Constant(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        match self {
            OneForm::Constant(c) => c.len(),
            OneForm::Gradient { n, .. } => *n,
            OneForm::Analytic(f) => f.n,
            OneForm::Expr(e) => e.len(),
        }
    }

    pub fn components<T: Real>(&self, x: &[T]) -> Vec<T> {
        match self {
            OneForm::Constant(c) => c.iter().map(|&v| T::cst(v)).collect(),
            OneForm::Gradient { f, .. } => f.gradient(x),
            OneForm::Analytic(f) => {
                let n = f.n;
                (0..n)
                    .map(|i| {
                        let mut v = T::cst(f.c[i]);
                        let mut arg = T::cst(f.phase[i]);
                        for (m, &xm) in x.iter().enumerate() {
                            v += xm.scale(f.lin[i * n + m]);
                            arg += xm.scale(f.wave[i * n + m]);
                        }
                        v + arg.sin().scale(f.amp[i])
                    })
                    .collect()
            }
            OneForm::Expr(e) => e.iter().map(|c| c.eval(x, &[])).collect(),
        }
    }
}

struct FormMap<'a>(&'a OneForm);

impl Mapping for FormMap<'_> {
    fn map<T: Real>(&self, x: &[T], _y: &[T]) -> Vec<T> {
        self.0.components(x)
    }
}

/// A Riemannian metric declared on a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct RiemannianData {
    pub metric: Metric,
    pub chart: ChartBox,
}

impl RiemannianData {
    pub fn new(metric: Metric, chart: ChartBox) -> Result<Self> {
        if metric.dim() != chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                got: metric.dim(),
            });
        }
        Ok(Self { metric, chart })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// Fails with `MetricDegenerate` unless `a(x)` is positive definite.
    pub fn check_at(&self, x: &[f64]) -> Result<()> {
        let a = self.metric.tensor(x);
        if a.iter().all(|v| v.is_finite()) && cholesky(&a, self.dim()).is_some() {
            Ok(())
        } else {
            Err(Error::MetricDegenerate { x: x.to_vec() })
        }
    }
}

/// The 1-form of a Randers metric.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaData {
    pub form: OneForm,
}

impl BetaData {
    pub fn new(form: OneForm) -> Self {
        Self { form }
    }
}

/// `γ^i_jk` at `[(i*n + j)*n + k]`; NaN when the metric is degenerate.
pub fn christoffel_generic<T: Real>(metric: &Metric, x: &[T]) -> Vec<T> {
    let n = metric.dim();
    let a = metric.tensor(x);
    let Some(inv) = spd_inverse(&a, n) else {
        return vec![nan(); n * n * n];
    };
    // da[m][i*n + j] = ∂_m a_ij
    let da: Vec<Vec<T>> = (0..n)
        .map(|m| {
            first(&MetricMap(metric), x, &[], &Direction::x_axis(n, m))
                .into_iter()
                .map(|v| v.eps)
                .collect()
        })
        .collect();
    // lowered[l][j][k] = ½(∂_j a_lk + ∂_k a_lj − ∂_l a_jk)
    let mut lowered = vec![T::zero(); n * n * n];
    for l in 0..n {
        for j in 0..n {
            for k in 0..n {
                lowered[(l * n + j) * n + k] =
                    (da[j][l * n + k] + da[k][l * n + j] - da[l][j * n + k]).scale(0.5);
            }
        }
    }
    let mut gamma = vec![T::zero(); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = T::zero();
                for l in 0..n {
                    s += inv[i * n + l] * lowered[(l * n + j) * n + k];
                }
                gamma[(i * n + j) * n + k] = s;
            }
        }
    }
    gamma
}

/// `Ḡ^i = ½ γ^i_jk y^j y^k`.
pub fn lc_coeffs_generic<T: Real>(metric: &Metric, x: &[T], y: &[T]) -> Vec<T> {
    let n = metric.dim();
    let gamma = christoffel_generic(metric, x);
    (0..n)
        .map(|i| {
            let mut s = T::zero();
            for j in 0..n {
                for k in 0..n {
                    s += gamma[(i * n + j) * n + k] * y[j] * y[k];
                }
            }
            s.scale(0.5)
        })
        .collect()
}

/// `b_{i;j} = ∂b_i/∂x^j − b_k γ^k_ij` at `[i*n + j]`.
pub fn covariant_1form_generic<T: Real>(metric: &Metric, form: &OneForm, x: &[T]) -> Vec<T> {
    let n = metric.dim();
    let gamma = christoffel_generic(metric, x);
    let b = form.components(x);
    let mut out = vec![T::zero(); n * n];
    for j in 0..n {
        let db = first(&FormMap(form), x, &[], &Direction::x_axis(n, j));
        for i in 0..n {
            let mut v = db[i].eps;
            for k in 0..n {
                v -= b[k] * gamma[(k * n + i) * n + j];
            }
            out[i * n + j] = v;
        }
    }
    out
}

/// The tensors a 1-form induces through the Levi-Civita connection of `a`.
/// Two-index quantities are row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaTensors<T> {
    /// `b^i = a^{ij} b_j`
    pub b_raised: Vec<T>,
    /// `r_ij = ½(b_{i;j} + b_{j;i})`
    pub r: Vec<T>,
    /// `s_ij = ½(b_{i;j} − b_{j;i})`
    pub s_anti: Vec<T>,
    /// `s^i_j = a^{ik} s_kj`
    pub s_mixed: Vec<T>,
    /// `s_i = b^j s_ji`
    pub s_vec: Vec<T>,
    /// `t_ij = s_il s^l_j`
    pub t: Vec<T>,
    /// `t_i = s_m s^m_i`
    pub t_vec: Vec<T>,
}

/// Values at a point.
pub type BetaDerived = BetaTensors<f64>;

pub fn beta_generic<T: Real>(metric: &Metric, form: &OneForm, x: &[T]) -> BetaTensors<T> {
    let n = metric.dim();
    let a = metric.tensor(x);
    let inv = spd_inverse(&a, n).unwrap_or_else(|| vec![nan(); n * n]);
    let b = form.components(x);
    let db = covariant_1form_generic(metric, form, x);
    let mut r = vec![T::zero(); n * n];
    let mut s_anti = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            r[i * n + j] = (db[i * n + j] + db[j * n + i]).scale(0.5);
            s_anti[i * n + j] = (db[i * n + j] - db[j * n + i]).scale(0.5);
        }
    }
    let raise = |v: &[T]| -> Vec<T> {
        (0..n)
            .map(|i| (0..n).fold(T::zero(), |s, k| s + inv[i * n + k] * v[k]))
            .collect()
    };
    let b_raised = raise(&b);
    let mut s_mixed = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            s_mixed[i * n + j] =
                (0..n).fold(T::zero(), |s, k| s + inv[i * n + k] * s_anti[k * n + j]);
        }
    }
    let s_vec: Vec<T> = (0..n)
        .map(|i| (0..n).fold(T::zero(), |s, j| s + b_raised[j] * s_anti[j * n + i]))
        .collect();
    let mut t = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            t[i * n + j] =
                (0..n).fold(T::zero(), |s, l| s + s_anti[i * n + l] * s_mixed[l * n + j]);
        }
    }
    let t_vec: Vec<T> = (0..n)
        .map(|i| (0..n).fold(T::zero(), |s, m| s + s_vec[m] * s_mixed[m * n + i]))
        .collect();
    BetaTensors {
        b_raised,
        r,
        s_anti,
        s_mixed,
        s_vec,
        t,
        t_vec,
    }
}

struct MixedS<'a>(&'a Metric, &'a OneForm);

impl Mapping for MixedS<'_> {
    fn map<T: Real>(&self, x: &[T], _y: &[T]) -> Vec<T> {
        beta_generic(self.0, self.1, x).s_mixed
    }
}

/// Divergence `s^m_{j;m}` of the mixed tensor `s^i_j`, one entry per `j`.
///
/// `s^i_{j;k} = ∂_k s^i_j + s^l_j γ^i_lk − s^i_l γ^l_jk`, contracted on `i = k`.
pub fn s_divergence_generic<T: Real>(metric: &Metric, form: &OneForm, x: &[T]) -> Vec<T> {
    let n = metric.dim();
    let gamma = christoffel_generic(metric, x);
    let sm = beta_generic(metric, form, x).s_mixed;
    let mut div = vec![T::zero(); n];
    for m in 0..n {
        let d = first(&MixedS(metric, form), x, &[], &Direction::x_axis(n, m));
        for j in 0..n {
            div[j] += d[m * n + j].eps;
        }
    }
    for j in 0..n {
        let mut v = div[j];
        for m in 0..n {
            for l in 0..n {
                v += sm[l * n + j] * gamma[(m * n + l) * n + m];
                v -= sm[m * n + l] * gamma[(l * n + j) * n + m];
            }
        }
        div[j] = v;
    }
    div
}

/// `h_{0;0} = (∂²h/∂x^i∂x^j − γ^k_ij ∂h/∂x^k) y^i y^j`.
pub fn second_covariant_generic<T: Real>(metric: &Metric, h: &ScalarFn, x: &[T], y: &[T]) -> T {
    let n = metric.dim();
    let gamma = christoffel_generic(metric, x);
    let grad = h.gradient(x);
    let mut v = h.hessian_contracted(x, y);
    for k in 0..n {
        let mut c = T::zero();
        for i in 0..n {
            for j in 0..n {
                c += gamma[(k * n + i) * n + j] * y[i] * y[j];
            }
        }
        v -= c * grad[k];
    }
    v
}

/// Christoffel symbols `γ^i_jk` at `x`, stored at `[(i*n + j)*n + k]`.
pub fn christoffels(a: &RiemannianData, x: &[f64]) -> Result<Vec<f64>> {
    a.check_at(x)?;
    let g = christoffel_generic(&a.metric, x);
    ensure_finite("gamma", &g)?;
    Ok(g)
}

/// `b_{i;j}` at `x`, row-major.
pub fn covariant_derivative_1form(a: &RiemannianData, b: &BetaData, x: &[f64]) -> Result<Vec<f64>> {
    a.check_at(x)?;
    check_form(a, b)?;
    let v = covariant_1form_generic(&a.metric, &b.form, x);
    ensure_finite("b_;", &v)?;
    Ok(v)
}

/// `r, s, s^i_j, s_i, t, t_i` at `x`.
pub fn beta_derived(a: &RiemannianData, b: &BetaData, x: &[f64]) -> Result<BetaDerived> {
    a.check_at(x)?;
    check_form(a, b)?;
    let t = beta_generic(&a.metric, &b.form, x);
    for (name, v) in [
        ("r", &t.r),
        ("s", &t.s_anti),
        ("s_mixed", &t.s_mixed),
        ("s_vec", &t.s_vec),
        ("t", &t.t),
        ("t_vec", &t.t_vec),
    ] {
        ensure_finite(name, v)?;
    }
    Ok(t)
}

/// `s^m_{j;m}` at `x`.
pub fn s_divergence(a: &RiemannianData, b: &BetaData, x: &[f64]) -> Result<Vec<f64>> {
    a.check_at(x)?;
    check_form(a, b)?;
    let v = s_divergence_generic(&a.metric, &b.form, x);
    ensure_finite("s_div", &v)?;
    Ok(v)
}

/// `‖β‖_α = sqrt(a^{ij} b_i b_j)` at `x`.
pub fn beta_norm(a: &RiemannianData, b: &BetaData, x: &[f64]) -> Result<f64> {
    a.check_at(x)?;
    check_form(a, b)?;
    let n = a.dim();
    let inv = spd_inverse(&a.metric.tensor(x), n)
        .ok_or_else(|| Error::MetricDegenerate { x: x.to_vec() })?;
    let bx = b.form.components(x);
    Ok(quad(&inv, n, &bx, &bx).sqrt())
}

/// `h_{0;0}` at `s`.
pub fn scalar_second_covariant(a: &RiemannianData, h: &ScalarFn, s: &TangentSample) -> Result<f64> {
    s.check_on(&a.chart)?;
    a.check_at(&s.x)?;
    let v = second_covariant_generic(&a.metric, h, &s.x, &s.y);
    ensure_finite("h_0;0", &[v])?;
    Ok(v)
}

/// `σ_α = sqrt(det a_ij(x))`.
pub fn riemannian_volume(a: &RiemannianData, x: &[f64]) -> Result<f64> {
    spd_sqrt_det(&a.metric.tensor(x), a.dim())
        .ok_or_else(|| Error::MetricDegenerate { x: x.to_vec() })
}

fn check_form(a: &RiemannianData, b: &BetaData) -> Result<()> {
    if b.form.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.form.dim(),
        });
    }
    Ok(())
}

/// The spray `Ḡ^i = ½ γ^i_jk y^j y^k` of a Riemannian metric.
#[derive(Clone, Debug)]
pub struct LeviCivitaSpray {
    pub data: RiemannianData,
}

pub fn levi_civita_spray(a: &RiemannianData) -> LeviCivitaSpray {
    LeviCivitaSpray { data: a.clone() }
}

impl Spray for LeviCivitaSpray {
    fn dim(&self) -> usize {
        self.data.dim()
    }
    fn chart(&self) -> &ChartBox {
        &self.data.chart
    }
    fn coeffs<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T> {
        lc_coeffs_generic(&self.data.metric, x, y)
    }
    fn admit(&self, s: &TangentSample) -> Result<()> {
        self.data.check_at(&s.x)
    }
}

/// `α(x, y) = sqrt(a_ij y^i y^j)`.
#[derive(Clone, Debug)]
pub struct AlphaNorm(pub Metric);

impl Field for AlphaNorm {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        self.0.norm_squared(x, y).sqrt()
    }
}

/// `β(x, y) = b_i(x) y^i`.
#[derive(Clone, Debug)]
pub struct BetaField(pub OneForm);

impl Field for BetaField {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        self.0
            .components(x)
            .into_iter()
            .zip(y)
            .fold(T::zero(), |s, (b, &v)| s + b * v)
    }
}
