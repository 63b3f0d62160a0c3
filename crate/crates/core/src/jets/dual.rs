//! Forward-mode dual numbers that nest to arbitrary depth.
//!
//! `Dual<T>` carries a value and a single directional tangent, both of type
//! `T`. Because `Dual<T>` itself implements [`Real`], a `Dual<Dual<f64>>`
//! carries a mixed second derivative, and so on. Every nesting level is a
//! distinct structural position, so a function that differentiates
//! internally (lifting its `T` arguments to `Dual<T>`) never confuses its own
//! perturbation with the caller's.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Scalar type that the geometry kernels are generic over.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// Embeds a constant.
    fn cst(v: f64) -> Self;
    /// The primal value with every tangent stripped.
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: f64) -> Self;
    fn recip(self) -> Self;
    /// True if the value and every tangent component are finite.
    fn all_finite(&self) -> bool;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }

    fn abs(self) -> Self {
        if self.re() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn scale(self, c: f64) -> Self {
        self * Self::cst(c)
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

/// A value together with one directional derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    /// A constant: zero tangent.
    pub fn constant(re: T) -> Self {
        Self { re, eps: T::zero() }
    }

    /// The independent variable: unit tangent.
    pub fn variable(re: T) -> Self {
        Self { re, eps: T::one() }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.eps * o.re + self.re * o.eps)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let q = self.re * inv;
        Self::new(q, (self.eps - q * o.eps) * inv)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Real> AddAssign for Dual<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Dual<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> MulAssign for Dual<T> {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Real> Real for Dual<T> {
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }

    fn re(&self) -> f64 {
        self.re.re()
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Self::new(s, self.eps / s.scale(2.0))
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Self::new(e, self.eps * e)
    }

    fn ln(self) -> Self {
        Self::new(self.re.ln(), self.eps / self.re)
    }

    fn sin(self) -> Self {
        Self::new(self.re.sin(), self.eps * self.re.cos())
    }

    fn cos(self) -> Self {
        Self::new(self.re.cos(), -(self.eps * self.re.sin()))
    }

    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            1 => self,
            _ => Self::new(
                self.re.powi(n),
                self.eps * self.re.powi(n - 1).scale(n as f64),
            ),
        }
    }

    fn powf(self, p: f64) -> Self {
        Self::new(self.re.powf(p), self.eps * self.re.powf(p - 1.0).scale(p))
    }

    fn recip(self) -> Self {
        let inv = self.re.recip();
        Self::new(inv, -(self.eps * inv * inv))
    }

    fn all_finite(&self) -> bool {
        self.re.all_finite() && self.eps.all_finite()
    }

    fn scale(self, c: f64) -> Self {
        Self::new(self.re.scale(c), self.eps.scale(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type D2 = Dual<Dual<f64>>;

    #[test]
    fn product_rule() {
        let x = Dual::variable(3.0);
        let y = x * x * x;
        assert_eq!(y.re, 27.0);
        assert_eq!(y.eps, 27.0);
    }

    #[test]
    fn nested_second_derivative_of_exp_sin() {
        // f(t) = exp(sin t), f'' = exp(sin t)(cos² t − sin t)
        let t0 = 0.7_f64;
        let t = D2::new(Dual::variable(t0), Dual::new(1.0, 0.0));
        let f = t.sin().exp();
        let expect = t0.sin().exp() * (t0.cos().powi(2) - t0.sin());
        assert!((f.eps.eps - expect).abs() < 1e-14);
        assert!((f.re.eps - f.eps.re).abs() < 1e-15);
    }

    #[test]
    fn quotient_and_powers() {
        let x = Dual::variable(2.0);
        let q = x.recip();
        assert!((q.eps + 0.25).abs() < 1e-15);
        let p = x.powf(1.5);
        assert!((p.eps - 1.5 * 2f64.sqrt()).abs() < 1e-14);
        let r = x.powi(-2);
        assert!((r.eps + 2.0 / 8.0).abs() < 1e-15);
        let s = x.sqrt();
        assert!((s.eps - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        let l = (x * x).ln();
        assert!((l.eps - 1.0).abs() < 1e-15);
        let d = Dual::new(1.0, 1.0) / x;
        assert!((d.eps - (2.0 - 1.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_is_detected_in_tangent() {
        let x = Dual::variable(0.0);
        let s = x.sqrt();
        assert!(s.re.is_finite());
        assert!(!s.all_finite());
    }
}
