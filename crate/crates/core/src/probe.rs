//! Smoothness probe for parsed expressions over a chart box.
//!
//! The chart coordinates are enclosed by intervals and the expression is
//! evaluated in interval arithmetic at a fixed set of fiber vectors. A
//! division by an interval containing zero, `ln`/`sqrt` of a non-positive
//! interval or a non-integer power of one is a possible singularity; the box
//! is bisected and the search only reports a failure when a box of the finest
//! level still contains one. Point values are also required to be finite.

use crate::expr::{Expr, Func};
use crate::jets::ChartBox;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    fn mul(self, o: Self) -> Self {
        let p = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        Self::new(
            p.iter().cloned().fold(f64::INFINITY, f64::min),
            p.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::point(1.0);
        }
        if k < 0 {
            return Self::point(1.0).div_unchecked(self.powi(-k));
        }
        let (a, b) = (self.lo.powi(k), self.hi.powi(k));
        if k % 2 == 0 {
            let hi = a.max(b);
            let lo = if self.contains_zero() { 0.0 } else { a.min(b) };
            Self::new(lo, hi)
        } else {
            Self::new(a, b)
        }
    }

    fn div_unchecked(self, o: Self) -> Self {
        self.mul(Self::new(1.0 / o.hi, 1.0 / o.lo))
    }

    fn trig(self, shift: f64, f: fn(f64) -> f64) -> Self {
        use std::f64::consts::{PI, TAU};
        if self.hi - self.lo >= TAU {
            return Self::new(-1.0, 1.0);
        }
        let (a, b) = (f(self.lo), f(self.hi));
        let (mut lo, mut hi) = (a.min(b), a.max(b));
        // maxima of f sit at shift + 2kπ, minima at shift + π + 2kπ
        let k = ((self.lo - shift) / TAU).ceil();
        if shift + k * TAU <= self.hi {
            hi = 1.0;
        }
        let k = ((self.lo - shift - PI) / TAU).ceil();
        if shift + PI + k * TAU <= self.hi {
            lo = -1.0;
        }
        Self::new(lo, hi)
    }
}

/// A defect found by interval evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Defect {
    pub what: String,
    pub x: Vec<(f64, f64)>,
}

fn eval(e: &Expr, x: &[Interval], y: &[f64]) -> Result<Interval, String> {
    use Expr::*;
    Ok(match e {
        Num(v) => Interval::point(*v),
        X(i) => *x
            .get(*i)
            .ok_or_else(|| format!("x{} is outside the chart dimension", i + 1))?,
        Y(i) => Interval::point(
            *y.get(*i)
                .ok_or_else(|| format!("y{} is outside the chart dimension", i + 1))?,
        ),
        Neg(a) => {
            let a = eval(a, x, y)?;
            Interval::new(-a.hi, -a.lo)
        }
        Add(a, b) => {
            let (a, b) = (eval(a, x, y)?, eval(b, x, y)?);
            Interval::new(a.lo + b.lo, a.hi + b.hi)
        }
        Sub(a, b) => {
            let (a, b) = (eval(a, x, y)?, eval(b, x, y)?);
            Interval::new(a.lo - b.hi, a.hi - b.lo)
        }
        Mul(a, b) => eval(a, x, y)?.mul(eval(b, x, y)?),
        Div(a, b) => {
            let (a, b) = (eval(a, x, y)?, eval(b, x, y)?);
            if b.contains_zero() {
                return Err(format!("denominator `{}` may vanish", b_str(e)));
            }
            a.div_unchecked(b)
        }
        Pow(a, b) => {
            let base = eval(a, x, y)?;
            let ex = eval(b, x, y)?;
            if ex.lo == ex.hi && ex.lo.fract() == 0.0 && ex.lo.abs() < 64.0 {
                let k = ex.lo as i32;
                if k < 0 && base.contains_zero() {
                    return Err(format!("negative power of `{a}` which may vanish"));
                }
                base.powi(k)
            } else {
                if base.lo <= 0.0 {
                    return Err(format!("non-integer power of `{a}` which may be ≤ 0"));
                }
                let c = [
                    base.lo.powf(ex.lo),
                    base.lo.powf(ex.hi),
                    base.hi.powf(ex.lo),
                    base.hi.powf(ex.hi),
                ];
                Interval::new(
                    c.iter().cloned().fold(f64::INFINITY, f64::min),
                    c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                )
            }
        }
        Call(f, a) => {
            let v = eval(a, x, y)?;
            match f {
                Func::Sqrt => {
                    if v.lo <= 0.0 {
                        return Err(format!("sqrt of `{a}` which may be ≤ 0"));
                    }
                    Interval::new(v.lo.sqrt(), v.hi.sqrt())
                }
                Func::Ln => {
                    if v.lo <= 0.0 {
                        return Err(format!("ln of `{a}` which may be ≤ 0"));
                    }
                    Interval::new(v.lo.ln(), v.hi.ln())
                }
                Func::Exp => Interval::new(v.lo.exp(), v.hi.exp()),
                Func::Sin => v.trig(std::f64::consts::FRAC_PI_2, f64::sin),
                Func::Cos => v.trig(0.0, f64::cos),
            }
        }
    })
}

fn b_str(e: &Expr) -> String {
    match e {
        Expr::Div(_, b) => b.to_string(),
        _ => e.to_string(),
    }
}

/// Bisection depth per coordinate.
pub const PROBE_DEPTH: usize = 3;

/// Checks `e` over `chart × fibers`. Returns the first defect that survives
/// `PROBE_DEPTH` bisections of every coordinate.
pub fn smoothness_probe(e: &Expr, chart: &ChartBox, fibers: &[Vec<f64>]) -> Result<(), Defect> {
    let n = chart.dim();
    let root: Vec<Interval> = (0..n)
        .map(|i| Interval::new(chart.lo[i], chart.hi[i]))
        .collect();
    for y in fibers {
        search(e, root.clone(), y, 0, PROBE_DEPTH * n)?;
        let mid: Vec<f64> = root.iter().map(|iv| 0.5 * (iv.lo + iv.hi)).collect();
        for corner in 0..(1usize << n) {
            let x: Vec<f64> = (0..n)
                .map(|i| {
                    if corner >> i & 1 == 1 {
                        root[i].hi
                    } else {
                        root[i].lo
                    }
                })
                .collect();
            for p in [&x, &mid] {
                let v: f64 = e.eval(p, y);
                if !v.is_finite() {
                    return Err(Defect {
                        what: format!("value {v} at x = {p:?}, y = {y:?}"),
                        x: p.iter().map(|&c| (c, c)).collect(),
                    });
                }
            }
        }
    }
    Ok(())
}

fn search(e: &Expr, b: Vec<Interval>, y: &[f64], depth: usize, max: usize) -> Result<(), Defect> {
    match eval(e, &b, y) {
        Ok(v) if v.lo.is_finite() && v.hi.is_finite() => Ok(()),
        Ok(_) | Err(_) if depth < max => {
            let k = depth % b.len();
            let m = 0.5 * (b[k].lo + b[k].hi);
            let mut left = b.clone();
            left[k].hi = m;
            let mut right = b;
            right[k].lo = m;
            search(e, left, y, depth + 1, max)?;
            search(e, right, y, depth + 1, max)
        }
        Ok(v) => Err(Defect {
            what: format!("unbounded enclosure [{}, {}]", v.lo, v.hi),
            x: b.iter().map(|i| (i.lo, i.hi)).collect(),
        }),
        Err(what) => Err(Defect {
            what,
            x: b.iter().map(|i| (i.lo, i.hi)).collect(),
        }),
    }
}

/// Fiber vectors used by the probe: the coordinate axes, their negatives
/// and the two main diagonals, all of Euclidean length `r`.
pub fn probe_fibers(n: usize, r: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[i] = s * r;
            out.push(v);
        }
    }
    let d = r / (n as f64).sqrt();
    out.push(vec![d; n]);
    out.push((0..n).map(|i| if i % 2 == 0 { d } else { -d }).collect());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe(src: &str, chart: &ChartBox) -> Result<(), Defect> {
        smoothness_probe(
            &Expr::parse(src).unwrap(),
            chart,
            &probe_fibers(chart.dim(), 1.0),
        )
    }

    #[test]
    fn pole_inside_the_box_is_found() {
        let c = ChartBox::new(vec![-0.7, -1.0], vec![1.3, 1.0]).unwrap();
        assert!(probe("y1^2 / (x1)", &c).is_err());
        assert!(probe("ln(x2 + 0.5)", &c).is_err());
        assert!(probe("sqrt(x1 - x1 + 1) * y1", &c).is_ok());
    }

    #[test]
    fn smooth_expressions_pass() {
        let c = ChartBox::cube(2, 1.0);
        assert!(probe("y1^2 / (2 + x1)", &c).is_ok());
        assert!(probe("sin(3*x1) * cos(x2) + exp(x1) * y2^2", &c).is_ok());
        assert!(probe("(1 + x1^2)^(-1) * y1 * y2", &c).is_ok());
        assert!(probe("sqrt(y1^2 + y2^2)", &c).is_ok());
    }

    #[test]
    fn trig_enclosures_are_sound() {
        let v = Interval::new(0.0, 3.0).trig(std::f64::consts::FRAC_PI_2, f64::sin);
        assert_eq!(v.hi, 1.0);
        assert!(v.lo <= 0.0);
        let c = Interval::new(-0.5, 0.5).trig(0.0, f64::cos);
        assert_eq!(c.hi, 1.0);
        assert!((c.lo - 0.5f64.cos()).abs() < 1e-15);
    }
}
