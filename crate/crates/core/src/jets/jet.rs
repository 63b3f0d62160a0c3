use super::diff::{partial, Direction, Field, Scalar, Var};
use super::sample::TangentSample;
use crate::error::{Error, Result};

/// Which derivative slots to fill. Orders above `x: 2` or `y: 3` are rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Orders {
    pub x: u8,
    pub y: u8,
}

impl Orders {
    pub const FULL: Orders = Orders { x: 2, y: 3 };

    pub fn new(x: u8, y: u8) -> Self {
        Self { x, y }
    }
}

/// Value and partial derivatives of a scalar field at one tangent sample.
///
/// Absent slots were not requested. Matrices are row-major `Vec<Vec<_>>`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub dx: Option<Vec<f64>>,
    pub dy: Option<Vec<f64>>,
    /// `dxdy[j][k] = ∂²/∂x^j∂y^k`
    pub dxdy: Option<Vec<Vec<f64>>>,
    pub dydy: Option<Vec<Vec<f64>>>,
    pub dxdx: Option<Vec<Vec<f64>>>,
    pub dydydy: Option<Vec<Vec<Vec<f64>>>>,
}

/// Evaluates `field` and the requested partials at `s`.
///
/// Every slot is computed by its own AD pass, so asking for more orders never
/// perturbs the lower slots.
pub fn jet_eval<F: Field>(field: &F, s: &TangentSample, orders: Orders) -> Result<Jet> {
    if orders.x > 2 || orders.y > 3 {
        return Err(Error::InvalidArgument(format!(
            "derivative orders (x: {}, y: {}) exceed (x: 2, y: 3)",
            orders.x, orders.y
        )));
    }
    let n = s.dim();
    let m = Scalar(field);
    let d = |vars: &[Var]| -> f64 {
        let dirs: Vec<Direction<f64>> = vars.iter().map(|&v| Direction::axis(n, v)).collect();
        partial(&m, &s.x, &s.y, &dirs)[0]
    };
    let value = d(&[]);
    check("value", &[value])?;

    let vector = |name: &str, mk: &dyn Fn(usize) -> Var| -> Result<Vec<f64>> {
        let v: Vec<f64> = (0..n).map(|k| d(&[mk(k)])).collect();
        check(name, &v)?;
        Ok(v)
    };
    let matrix =
        |name: &str, a: &dyn Fn(usize) -> Var, b: &dyn Fn(usize) -> Var| -> Result<Vec<Vec<f64>>> {
            let mut out = vec![vec![0.0; n]; n];
            for (j, row) in out.iter_mut().enumerate() {
                for (k, e) in row.iter_mut().enumerate() {
                    *e = d(&[a(j), b(k)]);
                    if !e.is_finite() {
                        return Err(Error::NumericalBreakdown {
                            path: format!("{name}[{j}][{k}]"),
                        });
                    }
                }
            }
            Ok(out)
        };

    let dx = (orders.x >= 1).then(|| vector("dx", &Var::X)).transpose()?;
    let dy = (orders.y >= 1).then(|| vector("dy", &Var::Y)).transpose()?;
    let dxdy = (orders.x >= 1 && orders.y >= 1)
        .then(|| matrix("dxdy", &Var::X, &Var::Y))
        .transpose()?;
    let dydy = (orders.y >= 2)
        .then(|| matrix("dydy", &Var::Y, &Var::Y))
        .transpose()?;
    let dxdx = (orders.x >= 2)
        .then(|| matrix("dxdx", &Var::X, &Var::X))
        .transpose()?;
    let dydydy = if orders.y >= 3 {
        let mut t = vec![vec![vec![0.0; n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = d(&[Var::Y(i), Var::Y(j), Var::Y(k)]);
                    if !v.is_finite() {
                        return Err(Error::NumericalBreakdown {
                            path: format!("dydydy[{i}][{j}][{k}]"),
                        });
                    }
                    t[i][j][k] = v;
                }
            }
        }
        Some(t)
    } else {
        None
    };

    Ok(Jet {
        value,
        dx,
        dy,
        dxdy,
        dydy,
        dxdx,
        dydydy,
    })
}

fn check(name: &str, v: &[f64]) -> Result<()> {
    crate::error::ensure_finite(name, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Real;

    struct Constant(f64);
    impl Field for Constant {
        fn eval<T: Real>(&self, _x: &[T], _y: &[T]) -> T {
            T::cst(self.0)
        }
    }

    struct Bilinear;
    impl Field for Bilinear {
        fn eval<T: Real>(&self, _x: &[T], y: &[T]) -> T {
            y[0] * y[1]
        }
    }

    struct Singular;
    impl Field for Singular {
        fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
            y[0] / x[0]
        }
    }

    fn sample(x: [f64; 2], y: [f64; 2]) -> TangentSample {
        TangentSample::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn constant_field_has_vanishing_derivatives() {
        let j = jet_eval(
            &Constant(2.5),
            &sample([0.3, -0.1], [1.0, 2.0]),
            Orders::FULL,
        )
        .unwrap();
        assert_eq!(j.value, 2.5);
        assert!(j.dx.unwrap().iter().all(|&v| v == 0.0));
        assert!(j.dydy.unwrap().iter().flatten().all(|&v| v == 0.0));
        assert!(j
            .dydydy
            .unwrap()
            .iter()
            .flatten()
            .flatten()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn bilinear_monomial() {
        let j = jet_eval(
            &Bilinear,
            &sample([0.0, 0.0], [2.0, 3.0]),
            Orders::new(0, 2),
        )
        .unwrap();
        assert_eq!(j.value, 6.0);
        assert_eq!(j.dy.unwrap(), vec![3.0, 2.0]);
        let h = j.dydy.unwrap();
        assert_eq!(h[0][1], 1.0);
        assert_eq!(h[1][0], 1.0);
        assert_eq!(h[0][0], 0.0);
        assert!(j.dx.is_none() && j.dxdy.is_none() && j.dydydy.is_none());
    }

    #[test]
    fn orders_are_bounded() {
        assert!(jet_eval(
            &Bilinear,
            &sample([0.0, 0.0], [1.0, 1.0]),
            Orders::new(3, 0)
        )
        .is_err());
        assert!(jet_eval(
            &Bilinear,
            &sample([0.0, 0.0], [1.0, 1.0]),
            Orders::new(0, 4)
        )
        .is_err());
    }

    #[test]
    fn breakdown_reports_index_path() {
        let e = jet_eval(
            &Singular,
            &sample([0.0, 0.0], [1.0, 1.0]),
            Orders::new(1, 0),
        )
        .unwrap_err();
        assert!(matches!(e, Error::NumericalBreakdown { .. }));
    }

    #[test]
    fn larger_requests_keep_lower_slots() {
        let s = sample([0.2, 0.4], [0.7, -1.3]);
        let a = jet_eval(&Bilinear, &s, Orders::new(1, 1)).unwrap();
        let b = jet_eval(&Bilinear, &s, Orders::FULL).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.dy, b.dy);
        assert_eq!(a.dxdy, b.dxdy);
    }
}
