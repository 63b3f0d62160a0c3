//! Volume forms, S-curvature, the projective spray and the projective Ricci
//! curvature.
//!
//! PRic is computed by two independent routes: as the Ricci curvature of the
//! projective spray ([`pric_via_hat`]) and from `Ric`, `S` and `S_{|0}` of the
//! original spray ([`pric_direct`]).

use crate::error::{ensure_finite, Result};
use crate::functions::{Contracted, ScalarFn};
use crate::jets::{field_first, first, ChartBox, Direction, Field, Real, TangentSample};
use crate::linalg::spd_sqrt_det;
use crate::riemann::Metric;
use crate::spray::{horizontal_generic, prepare, ricci_generic, Coeffs, Spray};

/// A positive density `σ(x)`; the volume form is `σ dx¹…dxⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub enum VolumeForm {
    Constant(f64),
    /// `σ_α = sqrt(det a_ij)`
    Riemannian(Metric),
    Custom(ScalarFn),
    /// `σ = e^{exponent·(n+1)·f} σ_base`. The usual rescaling
    /// `dV = e^{−(n+1)f} dṼ` has `exponent = −1`.
    Scaled {
        base: Box<VolumeForm>,
        f: ScalarFn,
        exponent: f64,
    },
}

impl VolumeForm {
    /// `e^{−(n+1)f} · base`.
    pub fn scaled(base: VolumeForm, f: ScalarFn) -> Self {
        VolumeForm::Scaled {
            base: Box::new(base),
            f,
            exponent: -1.0,
        }
    }

    /// `e^{+(n+1)f} · base`, the inverse rescaling.
    pub fn rescaled_up(base: VolumeForm, f: ScalarFn) -> Self {
        VolumeForm::Scaled {
            base: Box::new(base),
            f,
            exponent: 1.0,
        }
    }

    /// `ln σ(x)`.
    pub fn ln_density<T: Real>(&self, x: &[T]) -> T {
        match self {
            VolumeForm::Constant(c) => T::cst(c.ln()),
            VolumeForm::Riemannian(m) => match spd_sqrt_det(&m.tensor(x), m.dim()) {
                Some(v) => v.ln(),
                None => T::cst(f64::NAN),
            },
            VolumeForm::Custom(f) => f.eval(x).ln(),
            VolumeForm::Scaled { base, f, exponent } => {
                let n = x.len() as f64;
                f.eval(x).scale(exponent * (n + 1.0)) + base.ln_density(x)
            }
        }
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.ln_density(x).exp()
    }

    /// `y^m ∂(ln σ)/∂x^m`.
    pub fn log_derivative<T: Real>(&self, x: &[T], y: &[T]) -> T {
        field_first(&LnDensity(self), x, &[], &Direction::along_x(y)).eps
    }
}

struct LnDensity<'a>(&'a VolumeForm);

impl Field for LnDensity<'_> {
    fn eval<T: Real>(&self, x: &[T], _y: &[T]) -> T {
        self.0.ln_density(x)
    }
}

/// A spray paired with a volume form.
#[derive(Clone, Debug)]
pub struct WeightedSpray<S> {
    pub spray: S,
    pub volume: VolumeForm,
}

impl<S: Spray> WeightedSpray<S> {
    pub fn new(spray: S, volume: VolumeForm) -> Self {
        Self { spray, volume }
    }

    pub fn dim(&self) -> usize {
        self.spray.dim()
    }

    pub fn as_ref(&self) -> WeightedSpray<&S> {
        WeightedSpray {
            spray: &self.spray,
            volume: self.volume.clone(),
        }
    }
}

/// `S = ∂G^m/∂y^m − y^m ∂(ln σ)/∂x^m`.
pub fn s_curvature_generic<T: Real, S: Spray>(g: &S, volume: &VolumeForm, x: &[T], y: &[T]) -> T {
    let n = g.dim();
    let mut div = T::zero();
    for m in 0..n {
        div += first(&Coeffs(g), x, y, &Direction::y_axis(n, m))[m].eps;
    }
    div - volume.log_derivative(x, y)
}

/// `S_{(G, dV)}` as a field on chart × fiber.
pub struct SCurvatureField<'a, S> {
    pub spray: &'a S,
    pub volume: &'a VolumeForm,
}

impl<S: Spray> Field for SCurvatureField<'_, S> {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        s_curvature_generic(self.spray, self.volume, x, y)
    }
}

/// `Ĝ^i = G^i − S/(n+1) y^i`.
#[derive(Clone, Debug)]
pub struct ProjectiveSpray<S> {
    pub base: S,
    pub volume: VolumeForm,
}

impl<S: Spray> Spray for ProjectiveSpray<S> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn chart(&self) -> &ChartBox {
        self.base.chart()
    }
    fn coeffs<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T> {
        let n = self.base.dim() as f64;
        let k = s_curvature_generic(&self.base, &self.volume, x, y).scale(1.0 / (n + 1.0));
        self.base
            .coeffs(x, y)
            .into_iter()
            .zip(y)
            .map(|(g, &yi)| g - k * yi)
            .collect()
    }
    fn admit(&self, s: &TangentSample) -> Result<()> {
        self.base.admit(s)
    }
}

pub fn projective_spray<S: Spray + Clone>(w: &WeightedSpray<S>) -> ProjectiveSpray<S> {
    ProjectiveSpray {
        base: w.spray.clone(),
        volume: w.volume.clone(),
    }
}

/// `Ric + (n−1){S_{|0}/(n+1) + [S/(n+1)]²}`.
pub fn pric_direct_generic<T: Real, S: Spray>(g: &S, volume: &VolumeForm, x: &[T], y: &[T]) -> T {
    let n = g.dim() as f64;
    let field = SCurvatureField { spray: g, volume };
    let s = field.eval(x, y);
    let s_h = horizontal_generic(&field, g, x, y);
    let k = s.scale(1.0 / (n + 1.0));
    ricci_generic(g, x, y) + (s_h.scale(1.0 / (n + 1.0)) + k * k).scale(n - 1.0)
}

/// S-curvature at `s`.
pub fn s_curvature<S: Spray>(w: &WeightedSpray<S>, s: &TangentSample) -> Result<f64> {
    prepare(&w.spray, s)?;
    let v = s_curvature_generic(&w.spray, &w.volume, &s.x, &s.y);
    ensure_finite("S", &[v])?;
    Ok(v)
}

/// `S_{(G,dV)} − S_{(G,dṼ)} − (n+1) f_0` for an explicit pair of volume
/// forms that are claimed to satisfy `dV = e^{−(n+1)f} dṼ`.
pub fn volume_change_residual<S: Spray>(
    g: &S,
    dv: &VolumeForm,
    dv_tilde: &VolumeForm,
    f: &ScalarFn,
    s: &TangentSample,
) -> Result<f64> {
    prepare(g, s)?;
    let n = g.dim() as f64;
    let a = s_curvature_generic(g, dv, &s.x, &s.y);
    let b = s_curvature_generic(g, dv_tilde, &s.x, &s.y);
    let f0 = f.contracted(&s.x, &s.y);
    let r = a - b - (n + 1.0) * f0;
    ensure_finite("S-law", &[r])?;
    Ok(r)
}

/// Residual of the volume-change law with `dṼ = e^{(n+1)f} dV`; vanishes
/// identically.
pub fn volume_change_law<S: Spray>(
    g: &S,
    dv: &VolumeForm,
    f: &ScalarFn,
    s: &TangentSample,
) -> Result<f64> {
    let dv_tilde = VolumeForm::rescaled_up(dv.clone(), f.clone());
    volume_change_residual(g, dv, &dv_tilde, f, s)
}

/// Ricci curvature of the projective spray.
pub fn pric_via_hat<S: Spray>(w: &WeightedSpray<S>, s: &TangentSample) -> Result<f64> {
    prepare(&w.spray, s)?;
    let hat = ProjectiveSpray {
        base: &w.spray,
        volume: w.volume.clone(),
    };
    let v = ricci_generic(&hat, &s.x, &s.y);
    ensure_finite("PRic", &[v])?;
    Ok(v)
}

/// PRic from `Ric`, `S` and `S_{|0}` of the original spray.
pub fn pric_direct<S: Spray>(w: &WeightedSpray<S>, s: &TangentSample) -> Result<f64> {
    prepare(&w.spray, s)?;
    let v = pric_direct_generic(&w.spray, &w.volume, &s.x, &s.y);
    ensure_finite("PRic", &[v])?;
    Ok(v)
}

/// `f_{0|0} − f_0² + (2/(n+1)) f_0 S`, the PRic shift under `dV → e^{(n+1)f} dV`
/// (without the `n−1` factor).
pub fn rescale_shift_generic<T: Real, S: Spray>(
    g: &S,
    volume: &VolumeForm,
    f: &ScalarFn,
    x: &[T],
    y: &[T],
) -> T {
    let n = g.dim() as f64;
    let f0 = f.contracted(x, y);
    let f00 = horizontal_generic(&Contracted(f.clone()), g, x, y);
    let s = s_curvature_generic(g, volume, x, y);
    f00 - f0 * f0 + (f0 * s).scale(2.0 / (n + 1.0))
}

/// `PRic_{(G,dṼ)} − PRic_{(G,dV)} + (n−1){f_{0|0} − f_0² + (2/(n+1)) f_0 S}`
/// with `dṼ = e^{(n+1)f} dV` and `S = S_{(G,dV)}`; vanishes identically.
pub fn pric_rescale_residual<S: Spray>(
    g: &S,
    dv: &VolumeForm,
    f: &ScalarFn,
    s: &TangentSample,
) -> Result<f64> {
    prepare(g, s)?;
    let n = g.dim() as f64;
    let dv_tilde = VolumeForm::rescaled_up(dv.clone(), f.clone());
    let p_tilde = pric_direct_generic(g, &dv_tilde, &s.x, &s.y);
    let p = pric_direct_generic(g, dv, &s.x, &s.y);
    let shift = rescale_shift_generic(g, dv, f, &s.x, &s.y);
    let r = p_tilde - p + (n - 1.0) * shift;
    ensure_finite("PRic-law", &[r])?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spray::FlatSpray;

    fn sample(x: &[f64], y: &[f64]) -> TangentSample {
        TangentSample::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn flat_spray_unit_density() {
        let w = WeightedSpray::new(
            FlatSpray::new(ChartBox::cube(2, 1.0)),
            VolumeForm::Constant(1.0),
        );
        let s = sample(&[0.1, 0.2], &[1.0, 2.0]);
        assert_eq!(s_curvature(&w, &s).unwrap(), 0.0);
        assert_eq!(pric_via_hat(&w, &s).unwrap(), 0.0);
        assert_eq!(pric_direct(&w, &s).unwrap(), 0.0);
    }

    #[test]
    fn scaled_volume_sign_convention() {
        // dV = e^{−(n+1) f} dx with f = c·x gives S = (n+1) c·y for the flat spray.
        let n = 2;
        let f = ScalarFn::Affine {
            c0: 0.4,
            a: vec![0.5, -1.5],
        };
        let dv = VolumeForm::scaled(VolumeForm::Constant(1.0), f.clone());
        let w = WeightedSpray::new(FlatSpray::new(ChartBox::cube(n, 1.0)), dv);
        let s = sample(&[0.3, -0.2], &[2.0, 1.0]);
        let expect = (n as f64 + 1.0) * (0.5 * 2.0 - 1.5 * 1.0);
        assert!((s_curvature(&w, &s).unwrap() - expect).abs() < 1e-14);
        let up = VolumeForm::rescaled_up(VolumeForm::Constant(1.0), f);
        let w = WeightedSpray::new(FlatSpray::new(ChartBox::cube(n, 1.0)), up);
        assert!((s_curvature(&w, &s).unwrap() + expect).abs() < 1e-14);
    }

    #[test]
    fn zero_gauge_has_zero_residual() {
        let g = FlatSpray::new(ChartBox::cube(2, 1.0));
        let s = sample(&[0.0, 0.0], &[1.0, 1.0]);
        let r = volume_change_law(&g, &VolumeForm::Constant(2.0), &ScalarFn::zero(), &s).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn projective_spray_of_zero_s_is_unchanged() {
        let g = FlatSpray::new(ChartBox::cube(2, 1.0));
        let hat = projective_spray(&WeightedSpray::new(g, VolumeForm::Constant(3.0)));
        assert_eq!(hat.coeffs(&[0.1, 0.1], &[1.0, -1.0]), vec![0.0, 0.0]);
    }
}
