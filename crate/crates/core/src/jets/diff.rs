//! Directional derivatives of fields on chart × fiber by nested dual numbers.
//!
//! Every helper is generic over the incoming scalar type, so a quantity that
//! is itself defined through derivatives (geodesic coefficients of a metric,
//! the projective spray, the Riemann curvature) can be differentiated again
//! by the same helpers.

use super::dual::{Dual, Real};

/// Scalar field on chart × fiber.
pub trait Field: Sync {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T;
}

impl<F: Field> Field for &F {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        (**self).eval(x, y)
    }
}

/// Vector-valued map on chart × fiber; the common currency of the
/// derivative helpers.
pub trait Mapping {
    fn map<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T>;
}

/// Views a scalar field as a one-component mapping.
pub struct Scalar<'a, F>(pub &'a F);

impl<F: Field> Mapping for Scalar<'_, F> {
    fn map<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T> {
        vec![self.0.eval(x, y)]
    }
}

/// A coordinate slot in chart × fiber.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X(usize),
    Y(usize),
}

/// A tangent direction in chart × fiber: `(dx, dy)`.
#[derive(Clone, Debug)]
pub struct Direction<T> {
    pub dx: Vec<T>,
    pub dy: Vec<T>,
}

impl<T: Real> Direction<T> {
    pub fn new(dx: Vec<T>, dy: Vec<T>) -> Self {
        Self { dx, dy }
    }

    pub fn axis(n: usize, var: Var) -> Self {
        let mut d = Self::new(vec![T::zero(); n], vec![T::zero(); n]);
        match var {
            Var::X(k) => d.dx[k] = T::one(),
            Var::Y(k) => d.dy[k] = T::one(),
        }
        d
    }

    pub fn x_axis(n: usize, k: usize) -> Self {
        Self::axis(n, Var::X(k))
    }

    pub fn y_axis(n: usize, k: usize) -> Self {
        Self::axis(n, Var::Y(k))
    }

    /// Pure base direction `(u, 0)`.
    pub fn along_x(u: &[T]) -> Self {
        Self::new(u.to_vec(), vec![T::zero(); u.len()])
    }

    /// Pure fiber direction `(0, v)`.
    pub fn along_y(v: &[T]) -> Self {
        Self::new(vec![T::zero(); v.len()], v.to_vec())
    }

    fn lift(&self) -> Direction<Dual<T>> {
        Direction {
            dx: constants(&self.dx),
            dy: constants(&self.dy),
        }
    }
}

pub fn constants<T: Real>(v: &[T]) -> Vec<Dual<T>> {
    v.iter().map(|&a| Dual::constant(a)).collect()
}

/// `p + ε d`, componentwise. Missing direction components count as zero so
/// chart-only fields can be called with an empty fiber.
pub fn seeded<T: Real>(p: &[T], d: &[T]) -> Vec<Dual<T>> {
    p.iter()
        .enumerate()
        .map(|(i, &a)| Dual::new(a, d.get(i).copied().unwrap_or_else(T::zero)))
        .collect()
}

/// Value and first directional derivative of every component.
pub fn first<T: Real, M: Mapping>(m: &M, x: &[T], y: &[T], d: &Direction<T>) -> Vec<Dual<T>> {
    m.map(&seeded(x, &d.dx), &seeded(y, &d.dy))
}

/// `D_{d2} D_{d1}` of every component, with the lower-order parts.
pub fn second<T: Real, M: Mapping>(
    m: &M,
    x: &[T],
    y: &[T],
    d1: &Direction<T>,
    d2: &Direction<T>,
) -> Vec<SecondJet<T>> {
    let xs = seeded(&seeded(x, &d1.dx), &constants(&d2.dx));
    let ys = seeded(&seeded(y, &d1.dy), &constants(&d2.dy));
    m.map(&xs, &ys).into_iter().map(SecondJet::from).collect()
}

/// `D_{d3} D_{d2} D_{d1}` of every component (top coefficient only).
pub fn third<T: Real, M: Mapping>(
    m: &M,
    x: &[T],
    y: &[T],
    d1: &Direction<T>,
    d2: &Direction<T>,
    d3: &Direction<T>,
) -> Vec<T> {
    let l2 = d2.lift();
    let l3 = d3.lift().lift();
    let xs = seeded(&seeded(&seeded(x, &d1.dx), &l2.dx), &l3.dx);
    let ys = seeded(&seeded(&seeded(y, &d1.dy), &l2.dy), &l3.dy);
    m.map(&xs, &ys).into_iter().map(|v| v.eps.eps.eps).collect()
}

/// Mixed partial along an arbitrary list of up to four directions.
pub fn partial<T: Real, M: Mapping>(m: &M, x: &[T], y: &[T], dirs: &[Direction<T>]) -> Vec<T> {
    match dirs {
        [] => m.map(x, y),
        [a] => first(m, x, y, a).into_iter().map(|v| v.eps).collect(),
        [a, b] => second(m, x, y, a, b).into_iter().map(|v| v.d12).collect(),
        [a, b, c] => third(m, x, y, a, b, c),
        [a, b, c, d] => {
            let l2 = b.lift();
            let l3 = c.lift().lift();
            let l4 = d.lift().lift().lift();
            let xs = seeded(&seeded(&seeded(&seeded(x, &a.dx), &l2.dx), &l3.dx), &l4.dx);
            let ys = seeded(&seeded(&seeded(&seeded(y, &a.dy), &l2.dy), &l3.dy), &l4.dy);
            m.map(&xs, &ys)
                .into_iter()
                .map(|v| v.eps.eps.eps.eps)
                .collect()
        }
        _ => panic!("mixed partials above fourth order are not supported"),
    }
}

/// The four coefficients of a second-level nested dual.
#[derive(Clone, Copy, Debug)]
pub struct SecondJet<T> {
    pub value: T,
    /// Derivative along the first (inner) direction.
    pub d1: T,
    /// Derivative along the second (outer) direction.
    pub d2: T,
    pub d12: T,
}

impl<T: Real> From<Dual<Dual<T>>> for SecondJet<T> {
    fn from(v: Dual<Dual<T>>) -> Self {
        Self {
            value: v.re.re,
            d1: v.re.eps,
            d2: v.eps.re,
            d12: v.eps.eps,
        }
    }
}

/// Scalar-field conveniences.
pub fn field_first<T: Real, F: Field>(f: &F, x: &[T], y: &[T], d: &Direction<T>) -> Dual<T> {
    f.eval(&seeded(x, &d.dx), &seeded(y, &d.dy))
}

pub fn field_second<T: Real, F: Field>(
    f: &F,
    x: &[T],
    y: &[T],
    d1: &Direction<T>,
    d2: &Direction<T>,
) -> SecondJet<T> {
    second(&Scalar(f), x, y, d1, d2)[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Poly;
    impl Field for Poly {
        // x0² y0 y1 + y1³
        fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
            x[0] * x[0] * y[0] * y[1] + y[1] * y[1] * y[1]
        }
    }

    #[test]
    fn partials_of_polynomial() {
        let x = [2.0, 0.0];
        let y = [3.0, 5.0];
        let m = Scalar(&Poly);
        let dx0 = Direction::x_axis(2, 0);
        let dy0 = Direction::y_axis(2, 0);
        let dy1 = Direction::y_axis(2, 1);
        assert_eq!(partial(&m, &x, &y, &[dx0.clone()])[0], 2.0 * 2.0 * 15.0);
        assert_eq!(
            partial(&m, &x, &y, &[dx0.clone(), dy1.clone()])[0],
            2.0 * 2.0 * 3.0
        );
        assert_eq!(
            partial(&m, &x, &y, &[dy1.clone(), dy1.clone(), dy1.clone()])[0],
            6.0
        );
        assert_eq!(
            partial(&m, &x, &y, &[dx0.clone(), dx0.clone(), dy0, dy1])[0],
            2.0
        );
        let j = field_second(&Poly, &x, &y, &dx0, &Direction::y_axis(2, 1));
        assert_eq!(j.value, 4.0 * 15.0 + 125.0);
        assert_eq!(j.d1, 60.0);
        assert_eq!(j.d2, 4.0 * 3.0 + 75.0);
        assert_eq!(j.d12, 12.0);
    }

    #[test]
    fn directional_derivative_along_generic_vector() {
        let x = [1.0, 1.0];
        let y = [1.0, 2.0];
        let d = Direction::new(vec![0.5, 0.0], vec![1.0, -1.0]);
        // D = 0.5 ∂x0 + ∂y0 − ∂y1
        let expect = 0.5 * 2.0 * 1.0 * 2.0 + 1.0 * 2.0 - (1.0 + 12.0);
        assert!((field_first(&Poly, &x, &y, &d).eps - expect).abs() < 1e-14);
    }
}
