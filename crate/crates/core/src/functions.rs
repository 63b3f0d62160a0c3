//! Scalar functions on the chart (gauge functions, densities, potentials)
//! and the fields on chart × fiber built from them.

use crate::expr::Expr;
use crate::jets::{field_first, field_second, Direction, Field, Real};
use crate::scurv::VolumeForm;

/// `c0 + a·x + ½ xᵀQx + amp·sin(w·x + phase)`: a cheap analytic test family.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticFn {
    pub c0: f64,
    pub linear: Vec<f64>,
    /// Symmetric, row-major.
    pub quadratic: Vec<f64>,
    pub amp: f64,
    pub wave: Vec<f64>,
    pub phase: f64,
}

impl AnalyticFn {
    fn eval<T: Real>(&self, x: &[T]) -> T {
        let n = x.len();
        let mut v = T::cst(self.c0);
        let mut arg = T::cst(self.phase);
        for i in 0..n {
            v += x[i].scale(self.linear[i]);
            arg += x[i].scale(self.wave[i]);
            let mut qx = T::zero();
            for j in 0..n {
                qx += x[j].scale(self.quadratic[i * n + j]);
            }
            v += (x[i] * qx).scale(0.5);
        }
        v + arg.sin().scale(self.amp)
    }
}

/// A smooth function of the chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarFn {
    Constant(f64),
    Affine {
        c0: f64,
        a: Vec<f64>,
    },
    Analytic(AnalyticFn),
    /// `(1 − |x|²)/(1 + |x|²)`: in the stereographic chart of the unit
    /// sphere this is a height function.
    SphereHeight,
    LnAbs(Box<ScalarFn>),
    Scaled(f64, Box<ScalarFn>),
    Sum(Box<ScalarFn>, Box<ScalarFn>),
    Expr(Expr),
    /// `ln σ` of a volume density.
    LnDensity(Box<VolumeForm>),
}

impl ScalarFn {
    pub fn zero() -> Self {
        ScalarFn::Constant(0.0)
    }

    /// `½ c |x|²`
    pub fn half_square(n: usize, c: f64) -> Self {
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = c;
        }
        ScalarFn::Analytic(AnalyticFn {
            c0: 0.0,
            linear: vec![0.0; n],
            quadratic: q,
            amp: 0.0,
            wave: vec![0.0; n],
            phase: 0.0,
        })
    }

    pub fn ln_abs(f: ScalarFn) -> Self {
        ScalarFn::LnAbs(Box::new(f))
    }

    pub fn scaled(c: f64, f: ScalarFn) -> Self {
        ScalarFn::Scaled(c, Box::new(f))
    }

    pub fn sum(a: ScalarFn, b: ScalarFn) -> Self {
        ScalarFn::Sum(Box::new(a), Box::new(b))
    }

    pub fn eval<T: Real>(&self, x: &[T]) -> T {
        match self {
            ScalarFn::Constant(c) => T::cst(*c),
            ScalarFn::Affine { c0, a } => a
                .iter()
                .zip(x)
                .fold(T::cst(*c0), |s, (&ai, &xi)| s + xi.scale(ai)),
            ScalarFn::Analytic(f) => f.eval(x),
            ScalarFn::SphereHeight => {
                let r2 = x.iter().fold(T::zero(), |s, &v| s + v * v);
                (T::one() - r2) / (T::one() + r2)
            }
            ScalarFn::LnAbs(f) => f.eval(x).abs().ln(),
            ScalarFn::Scaled(c, f) => f.eval(x).scale(*c),
            ScalarFn::Sum(a, b) => a.eval(x) + b.eval(x),
            ScalarFn::Expr(e) => e.eval(x, &[]),
            ScalarFn::LnDensity(v) => v.ln_density(x),
        }
    }

    /// `∂f/∂x^k` for every k.
    pub fn gradient<T: Real>(&self, x: &[T]) -> Vec<T> {
        let n = x.len();
        (0..n)
            .map(|k| field_first(self, x, &[], &Direction::x_axis(n, k)).eps)
            .collect()
    }

    /// `f_0 = f_{x^m} y^m`.
    pub fn contracted<T: Real>(&self, x: &[T], y: &[T]) -> T {
        field_first(self, x, &[], &Direction::along_x(y)).eps
    }

    /// `y^i y^j ∂²f/∂x^i∂x^j`.
    pub fn hessian_contracted<T: Real>(&self, x: &[T], y: &[T]) -> T {
        let d = Direction::along_x(y);
        field_second(self, x, &[], &d, &d).d12
    }

    /// Full Hessian, row-major.
    pub fn hessian<T: Real>(&self, x: &[T]) -> Vec<T> {
        let n = x.len();
        let mut h = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = field_second(
                    self,
                    x,
                    &[],
                    &Direction::x_axis(n, i),
                    &Direction::x_axis(n, j),
                )
                .d12;
            }
        }
        h
    }
}

/// A chart function is a field that ignores the fiber.
impl Field for ScalarFn {
    fn eval<T: Real>(&self, x: &[T], _y: &[T]) -> T {
        ScalarFn::eval(self, x)
    }
}

/// `f_0 = f_{x^m}(x) y^m`, linear in the fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct Contracted(pub ScalarFn);

impl Field for Contracted {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        self.0.contracted(x, y)
    }
}

/// `c·F`.
#[derive(Clone, Debug)]
pub struct ScaledField<F>(pub f64, pub F);

impl<F: Field> Field for ScaledField<F> {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        self.1.eval(x, y).scale(self.0)
    }
}

/// `A + B`.
#[derive(Clone, Debug)]
pub struct SumField<A, B>(pub A, pub B);

impl<A: Field, B: Field> Field for SumField<A, B> {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        self.0.eval(x, y) + self.1.eval(x, y)
    }
}

/// The Euclidean norm `|y|`.
#[derive(Clone, Copy, Debug)]
pub struct EuclideanNorm;

impl Field for EuclideanNorm {
    fn eval<T: Real>(&self, _x: &[T], y: &[T]) -> T {
        y.iter().fold(T::zero(), |s, &v| s + v * v).sqrt()
    }
}

/// The zero field.
#[derive(Clone, Copy, Debug)]
pub struct ZeroField;

impl Field for ZeroField {
    fn eval<T: Real>(&self, _x: &[T], _y: &[T]) -> T {
        T::zero()
    }
}
