//! A fully assembled model: spray, optional metric data, volume form, gauges.

use spraylab::finsler::{induced_spray, FinslerModel, InducedSpray};
use spraylab::functions::ScalarFn;
use spraylab::jets::{ChartBox, Real, TangentSample};
use spraylab::riemann::{levi_civita_spray, BetaData, LeviCivitaSpray, Metric, RiemannianData};
use spraylab::sampling::{
    model_chart, random_metric, random_one_form, random_scalar, rng, sample_tangents_filtered,
    SampleSpec,
};
use spraylab::scurv::VolumeForm;
use spraylab::spray::{ExprSpray, Spray};
use spraylab::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Riemannian,
    Randers,
    FourthRoot,
    CustomSpray,
    CustomFinsler,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Riemannian => "riemannian",
            Family::Randers => "randers",
            Family::FourthRoot => "fourth_root",
            Family::CustomSpray => "custom_spray",
            Family::CustomFinsler => "custom_finsler",
        }
    }
}

/// The sprays a model can carry.
#[derive(Clone, Debug)]
pub enum ModelSpray {
    LeviCivita(LeviCivitaSpray),
    Finsler(InducedSpray),
    Custom(ExprSpray),
}

impl Spray for ModelSpray {
    fn dim(&self) -> usize {
        match self {
            ModelSpray::LeviCivita(s) => s.dim(),
            ModelSpray::Finsler(s) => s.dim(),
            ModelSpray::Custom(s) => s.dim(),
        }
    }

    fn chart(&self) -> &ChartBox {
        match self {
            ModelSpray::LeviCivita(s) => s.chart(),
            ModelSpray::Finsler(s) => s.chart(),
            ModelSpray::Custom(s) => s.chart(),
        }
    }

    fn coeffs<T: Real>(&self, x: &[T], y: &[T]) -> Vec<T> {
        match self {
            ModelSpray::LeviCivita(s) => s.coeffs(x, y),
            ModelSpray::Finsler(s) => s.coeffs(x, y),
            ModelSpray::Custom(s) => s.coeffs(x, y),
        }
    }

    fn admit(&self, s: &TangentSample) -> Result<()> {
        match self {
            ModelSpray::LeviCivita(g) => g.admit(s),
            ModelSpray::Finsler(g) => g.admit(s),
            ModelSpray::Custom(g) => g.admit(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSpec {
    pub start: TangentSample,
    pub t_max: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub family: Family,
    pub chart: ChartBox,
    pub spray: ModelSpray,
    pub finsler: Option<FinslerModel>,
    /// `α` for the Riemannian and Randers families.
    pub riemann: Option<RiemannianData>,
    /// `β` for the Randers family.
    pub form: Option<BetaData>,
    pub volume: VolumeForm,
    /// Gauge function; zero unless configured.
    pub f: ScalarFn,
    pub h: Option<ScalarFn>,
    pub phi: Option<ScalarFn>,
    pub witness: bool,
    pub sampling: SampleSpec,
    pub geodesic: Option<GeodesicSpec>,
}

impl Model {
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `F` when the model comes from a metric.
    pub fn norm(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        self.finsler.as_ref().map(|fm| fm.norm(x, y))
    }

    pub fn is_sphere(&self) -> bool {
        matches!(
            self.riemann.as_ref().map(|a| &a.metric),
            Some(Metric::Stereographic { .. })
        ) && self.family == Family::Riemannian
    }

    /// Samples drawn with `spec`, restricted to the fiber region where the
    /// model is regular.
    pub fn samples_with(&self, spec: &SampleSpec) -> Result<Vec<TangentSample>> {
        let fm = self.finsler.clone();
        sample_tangents_filtered(&self.chart, spec, move |x, y| {
            fm.as_ref().map_or(true, |fm| fm.in_sampling_domain(x, y))
        })
    }

    pub fn samples(&self) -> Result<Vec<TangentSample>> {
        self.samples_with(&self.sampling)
    }

    /// The pair of volume forms and gauge for the S-curvature volume law:
    /// `(dV, dṼ, f)` claimed to satisfy `dV = e^{−(n+1)f} dṼ`. A declared
    /// `scaled` volume supplies its own base and `f`; otherwise `dṼ` is
    /// built from the configured gauge.
    pub fn volume_pair(&self) -> (VolumeForm, VolumeForm, ScalarFn) {
        match &self.volume {
            VolumeForm::Scaled { base, f, .. } => {
                (self.volume.clone(), (**base).clone(), f.clone())
            }
            v => (
                v.clone(),
                VolumeForm::rescaled_up(v.clone(), self.f.clone()),
                self.f.clone(),
            ),
        }
    }

    /// A Randers model with random analytic `α`, a non-closed `β`
    /// (`‖β‖_α < 1`), a random density and a random gauge, on `[-0.5, 0.5]^n`.
    pub fn random_randers(seed: u64, n: usize) -> Model {
        let mut r = rng(seed);
        let a = RiemannianData::new(random_metric(&mut r, n), model_chart(n)).expect("valid chart");
        let b = BetaData::new(random_one_form(&mut r, n, 0.5));
        let fm = FinslerModel::randers(&a, &b).expect("matching dimensions");
        let volume = VolumeForm::scaled(VolumeForm::Constant(1.0), random_scalar(&mut r, n));
        let f = random_scalar(&mut r, n);
        Model {
            name: format!("random-randers-{n}d-{seed}"),
            family: Family::Randers,
            chart: a.chart.clone(),
            spray: ModelSpray::Finsler(induced_spray(&fm)),
            finsler: Some(fm),
            riemann: Some(a),
            form: Some(b),
            volume,
            f,
            h: None,
            phi: None,
            witness: false,
            sampling: SampleSpec::default(),
            geodesic: None,
        }
    }

    /// A random analytic Riemannian metric with its own density rescaled by
    /// a random gauge, on `[-0.5, 0.5]^n`.
    pub fn random_riemannian(seed: u64, n: usize) -> Model {
        let mut r = rng(seed);
        let a = RiemannianData::new(random_metric(&mut r, n), model_chart(n)).expect("valid chart");
        let volume = VolumeForm::scaled(
            VolumeForm::Riemannian(a.metric.clone()),
            random_scalar(&mut r, n),
        );
        let f = random_scalar(&mut r, n);
        Model {
            name: format!("random-riemannian-{n}d-{seed}"),
            family: Family::Riemannian,
            chart: a.chart.clone(),
            spray: ModelSpray::LeviCivita(levi_civita_spray(&a)),
            finsler: Some(FinslerModel::riemannian(&a)),
            riemann: Some(a),
            form: None,
            volume,
            f,
            h: None,
            phi: None,
            witness: false,
            sampling: SampleSpec::default(),
            geodesic: None,
        }
    }
}
