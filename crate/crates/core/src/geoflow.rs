//! Geodesics of a spray and the Riccati mechanics along them.
//!
//! The rigidity statement for complete sprays is global and is not proved
//! here. What is computed: `Ξ(t)` along integrated geodesics, the defect of
//! `Ξ' + Ξ² + Ric/(n−1) = 0`, and the finite-time blow-up of the scalar
//! comparison equation `Ξ' = −Ξ² − q` when `Ξ(0) ≠ 0`.

use crate::analysis::FlatnessWitness;
use crate::error::{Error, Result};
use crate::jets::{Field, TangentSample};
use crate::spray::{horizontal_generic, ricci_generic, Spray};

/// A sampled solution of `ẍ + 2G(x, ẋ) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    pub xs: Vec<Vec<f64>>,
    pub vs: Vec<Vec<f64>>,
    pub method: &'static str,
    pub step: f64,
    /// Time at which the next step would have left the chart.
    pub exit_time: Option<f64>,
}

impl GeodesicPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn exited(&self) -> bool {
        self.exit_time.is_some()
    }

    pub fn sample(&self, i: usize) -> Result<TangentSample> {
        TangentSample::new(self.xs[i].clone(), self.vs[i].clone())
    }
}

fn rhs<S: Spray>(g: &S, x: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let a = g.coeffs(x, v).into_iter().map(|c| -2.0 * c).collect();
    (v.to_vec(), a)
}

fn axpy(x: &[f64], h: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + h * b).collect()
}

/// Classical RK4 with `ceil(t_max/h)` equal steps of size at most `h`.
/// Leaving the chart ends the path early with `exit_time` set.
pub fn integrate_geodesic<S: Spray>(
    g: &S,
    s0: &TangentSample,
    t_max: f64,
    h: f64,
) -> Result<GeodesicPath> {
    if !(h > 0.0 && h.is_finite() && t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_max = {t_max}, h = {h}")));
    }
    s0.check_on(g.chart())?;
    let steps = ((t_max / h) - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps == 0 {
        0.0
    } else {
        t_max / steps as f64
    };
    let chart = g.chart();
    let mut path = GeodesicPath {
        times: vec![0.0],
        xs: vec![s0.x.clone()],
        vs: vec![s0.y.clone()],
        method: "rk4",
        step: dt,
        exit_time: None,
    };
    let (mut x, mut v) = (s0.x.clone(), s0.y.clone());
    for k in 0..steps {
        let t = k as f64 * dt;
        let (k1x, k1v) = rhs(g, &x, &v);
        let (x2, v2) = (axpy(&x, 0.5 * dt, &k1x), axpy(&v, 0.5 * dt, &k1v));
        let (k2x, k2v) = rhs(g, &x2, &v2);
        let (x3, v3) = (axpy(&x, 0.5 * dt, &k2x), axpy(&v, 0.5 * dt, &k2v));
        let (k3x, k3v) = rhs(g, &x3, &v3);
        let (x4, v4) = (axpy(&x, dt, &k3x), axpy(&v, dt, &k3v));
        if ![&x2, &x3, &x4].iter().all(|p| chart.contains(p)) {
            path.exit_time = Some(t);
            break;
        }
        let (k4x, k4v) = rhs(g, &x4, &v4);
        let n = x.len();
        for i in 0..n {
            x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        if !x.iter().chain(&v).all(|c| c.is_finite()) {
            return Err(Error::NumericalBreakdown {
                path: format!("geodesic state at t = {}", t + dt),
            });
        }
        if !chart.contains(&x) {
            path.exit_time = Some(t + dt);
            break;
        }
        path.times.push(if k + 1 == steps {
            t_max
        } else {
            (k + 1) as f64 * dt
        });
        path.xs.push(x.clone());
        path.vs.push(v.clone());
    }
    Ok(path)
}

/// Values of a field along the path.
pub fn field_along<F: Field>(f: &F, path: &GeodesicPath) -> Vec<f64> {
    path.xs
        .iter()
        .zip(&path.vs)
        .map(|(x, v)| f.eval(x, v))
        .collect()
}

/// Second-order finite differences in `t`; one-sided at the ends.
pub fn time_derivative(times: &[f64], values: &[f64]) -> Vec<f64> {
    let m = values.len();
    if m < 3 {
        return vec![f64::NAN; m];
    }
    let mut d = vec![0.0; m];
    for i in 1..m - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1]);
    }
    let h0 = times[1] - times[0];
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h0);
    let h1 = times[m - 1] - times[m - 2];
    d[m - 1] = (3.0 * values[m - 1] - 4.0 * values[m - 2] + values[m - 3]) / (2.0 * h1);
    d
}

/// `Ξ(t)`, its time derivative by finite differences, and `Ξ_{|0}` along
/// the path from the spray directly.
#[derive(Clone, Debug, PartialEq)]
pub struct XiTrace {
    pub times: Vec<f64>,
    pub xi: Vec<f64>,
    pub xi_dot: Vec<f64>,
    pub xi_h0: Vec<f64>,
}

pub fn xi_along<S: Spray>(fw: &FlatnessWitness<S>, path: &GeodesicPath) -> XiTrace {
    let xi_f = fw.xi();
    let xi = field_along(&xi_f, path);
    let xi_dot = time_derivative(&path.times, &xi);
    let xi_h0 = path
        .xs
        .iter()
        .zip(&path.vs)
        .map(|(x, v)| horizontal_generic(&xi_f, &fw.w.spray, x, v))
        .collect();
    XiTrace {
        times: path.times.clone(),
        xi,
        xi_dot,
        xi_h0,
    }
}

/// `r(t) = Ξ'(t) + Ξ(t)² + Ric(c, ċ)/(n−1)`, with `Ξ'` from finite
/// differences. For a witness that is not exact this equals the flatness
/// residual divided by `n−1`.
pub fn riccati_residual<S: Spray>(
    fw: &FlatnessWitness<S>,
    path: &GeodesicPath,
) -> Result<Vec<f64>> {
    let n = fw.w.spray.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "the Riccati identity needs n ≥ 2".into(),
        ));
    }
    let tr = xi_along(fw, path);
    Ok(path
        .xs
        .iter()
        .zip(&path.vs)
        .enumerate()
        .map(|(i, (x, v))| {
            let ric = ricci_generic(&fw.w.spray, x, v);
            tr.xi_dot[i] + tr.xi[i] * tr.xi[i] + ric / (n as f64 - 1.0)
        })
        .collect())
}

/// Blow-up threshold of the scalar demo.
pub const BLOWUP_LEVEL: f64 = 1e6;

/// Outcome of integrating `Ξ' = −Ξ² − q`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiDemo {
    pub xi0: f64,
    pub q: f64,
    pub times: Vec<f64>,
    pub xi: Vec<f64>,
    /// Signed time at which `|Ξ|` crossed [`BLOWUP_LEVEL`]; negative when the
    /// integration ran backward.
    pub blowup_time: Option<f64>,
    /// `−1/Ξ(0)`, the blow-up time of the `q = 0` solution.
    pub bound: Option<f64>,
    pub verdict: bool,
}

/// Integrates the scalar comparison equation with RK4: forward when
/// `Ξ(0) ≤ 0`, backward when `Ξ(0) > 0`. The verdict holds when the blow-up
/// happens no later (in `|t|`) than `|1/Ξ(0)|·(1 + tol)`, or when `Ξ(0) = 0`
/// and `q = 0` and the solution stays at zero.
pub fn riccati_comparison_demo(
    xi0: f64,
    q: f64,
    t_max: f64,
    h: f64,
    tol: f64,
) -> Result<RiccatiDemo> {
    if !(q >= 0.0 && h > 0.0 && t_max > 0.0 && xi0.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need q ≥ 0, h > 0, t_max > 0; got q = {q}, h = {h}, t_max = {t_max}"
        )));
    }
    let dir = if xi0 > 0.0 { -1.0 } else { 1.0 };
    let dt = dir * h;
    let f = |v: f64| -v * v - q;
    let mut demo = RiccatiDemo {
        xi0,
        q,
        times: vec![0.0],
        xi: vec![xi0],
        blowup_time: None,
        bound: if xi0 != 0.0 { Some(-1.0 / xi0) } else { None },
        verdict: false,
    };
    let mut v = xi0;
    let steps = (t_max / h).ceil() as usize;
    for k in 0..steps {
        let k1 = f(v);
        let k2 = f(v + 0.5 * dt * k1);
        let k3 = f(v + 0.5 * dt * k2);
        let k4 = f(v + dt * k3);
        let next = v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let t = (k + 1) as f64 * dt;
        if !next.is_finite() || next.abs() > BLOWUP_LEVEL {
            // linear interpolation of 1/Ξ to its zero gives the crossing time
            let t0 = k as f64 * dt;
            let est = if next.is_finite() && v != 0.0 {
                let (a, b) = (1.0 / v, 1.0 / next);
                t0 + (t - t0) * a / (a - b)
            } else {
                t
            };
            demo.blowup_time = Some(est);
            break;
        }
        v = next;
        demo.times.push(t);
        demo.xi.push(v);
    }
    demo.verdict = match (demo.bound, demo.blowup_time) {
        (Some(b), Some(t)) => t.abs() <= b.abs() * (1.0 + tol),
        (None, None) => q != 0.0 || demo.xi.iter().all(|&v| v == 0.0),
        (None, Some(_)) => q > 0.0,
        (Some(_), None) => false,
    };
    Ok(demo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::ScalarFn;
    use crate::jets::ChartBox;
    use crate::scurv::{VolumeForm, WeightedSpray};
    use crate::spray::FlatSpray;

    #[test]
    fn flat_geodesic_is_a_line() {
        let g = FlatSpray::new(ChartBox::cube(2, 1.0));
        let s = TangentSample::new(vec![0.0, 0.1], vec![0.5, -0.25]).unwrap();
        let p = integrate_geodesic(&g, &s, 1.0, 0.01).unwrap();
        assert!(!p.exited());
        let last = p.xs.last().unwrap();
        assert!((last[0] - 0.5).abs() < 1e-14 && (last[1] + 0.15).abs() < 1e-14);
        assert_eq!(*p.times.last().unwrap(), 1.0);
    }

    #[test]
    fn chart_exit_is_flagged() {
        let g = FlatSpray::new(ChartBox::cube(1, 1.0));
        let s = TangentSample::new(vec![0.0], vec![1.0]).unwrap();
        let p = integrate_geodesic(&g, &s, 3.0, 0.1).unwrap();
        assert!(p.exited());
        assert!(p.exit_time.unwrap() <= 1.0);
        assert!(p.xs.iter().all(|x| x[0] <= 1.0));
    }

    #[test]
    fn trivial_witness_has_zero_xi() {
        let g = FlatSpray::new(ChartBox::cube(2, 1.0));
        let fw = FlatnessWitness::new(
            WeightedSpray::new(g, VolumeForm::Constant(1.0)),
            ScalarFn::zero(),
        );
        let s = TangentSample::new(vec![0.0, 0.0], vec![0.3, 0.2]).unwrap();
        let p = integrate_geodesic(&fw.w.spray, &s, 1.0, 0.1).unwrap();
        assert!(xi_along(&fw, &p).xi.iter().all(|v| *v == 0.0));
        assert!(riccati_residual(&fw, &p).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn scalar_riccati_blows_up_on_time() {
        let d = riccati_comparison_demo(-1.0, 0.0, 2.0, 1e-4, 0.01).unwrap();
        let t = d.blowup_time.unwrap();
        assert!((t - 1.0).abs() < 0.01 && d.verdict);
        let z = riccati_comparison_demo(0.0, 0.0, 2.0, 1e-3, 0.01).unwrap();
        assert!(z.blowup_time.is_none() && z.verdict);
        let back = riccati_comparison_demo(2.0, 0.0, 2.0, 1e-4, 0.01).unwrap();
        assert!((back.blowup_time.unwrap() + 0.5).abs() < 0.005 && back.verdict);
        let early = riccati_comparison_demo(-0.5, 0.1, 4.0, 1e-4, 0.01).unwrap();
        assert!(early.blowup_time.unwrap() < 2.0);
    }
}
