//! JSON model configuration: parsing, validation and model construction.

use serde::Deserialize;
use thiserror::Error;

use spraylab::expr::Expr;
use spraylab::finsler::{fundamental_tensor, induced_spray, FinslerModel};
use spraylab::functions::ScalarFn;
use spraylab::jets::{ChartBox, TangentSample};
use spraylab::linalg::cholesky;
use spraylab::probe::{probe_fibers, smoothness_probe};
use spraylab::riemann::{beta_norm, levi_civita_spray, BetaData, Metric, OneForm, RiemannianData};
use spraylab::sampling::{sample_tangents, SampleSpec};
use spraylab::scurv::VolumeForm;
use spraylab::spray::ExprSpray;

use crate::model::{Family, GeodesicSpec, Model, ModelSpray};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Riemannian,
    Randers,
    FourthRoot,
    CustomSpray,
    CustomFinsler,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ChartSpec {
    Cube { cube: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

/// A number or an expression string.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Num(f64),
    Expr(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    /// `euclidean` or `stereographic`
    Named(String),
    Matrix(Vec<Vec<Entry>>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VolumeSpec {
    RiemannianDensity,
    Constant {
        value: f64,
    },
    Expression {
        sigma: String,
    },
    /// `e^{exponent·(n+1)·f}·base`; the exponent defaults to −1.
    Scaled {
        #[serde(default)]
        base: Option<Box<VolumeSpec>>,
        f: String,
        #[serde(default = "minus_one")]
        exponent: f64,
    },
}

fn minus_one() -> f64 {
    -1.0
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSpec {
    pub f: Option<String>,
    pub h: Option<String>,
    pub phi: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub fiber: Option<[f64; 2]>,
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub tmax: Option<f64>,
    pub step: Option<f64>,
}

/// One model per document.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: Option<String>,
    pub family: FamilyKind,
    pub dimension: usize,
    pub chart: ChartSpec,
    pub metric: Option<MetricSpec>,
    pub form: Option<Vec<Entry>>,
    /// Second factor of a fourth-root metric.
    pub second_metric: Option<MetricSpec>,
    /// Dimension of the first factor of a fourth-root metric.
    pub split: Option<usize>,
    pub c: Option<f64>,
    /// Spray coefficients `G^i` of a custom spray.
    pub spray: Option<Vec<String>>,
    /// `F` of a custom Finsler metric.
    pub finsler: Option<String>,
    pub volume: Option<VolumeSpec>,
    #[serde(default)]
    pub gauges: GaugeSpec,
    /// Declares that `f` makes the flatness residual vanish identically.
    #[serde(default)]
    pub witness: bool,
    #[serde(default)]
    pub sampling: SamplingSpec,
    pub geodesic: Option<GeodesicConfig>,
}

/// Number of random points used by the eager validation probes.
const PROBE_POINTS: usize = 200;

/// Parses and validates a document, returning the ready model.
pub fn parse_config(text: &str) -> Result<Model, ConfigError> {
    let cfg: ModelConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build(&cfg)
}

fn parse_expr(field: &str, src: &str, n: usize, fiber: bool) -> Result<Expr, ConfigError> {
    let e = Expr::parse(src).map_err(|err| invalid(field, err.to_string()))?;
    let (nx, ny) = e.arity();
    if nx > n || ny > n {
        return Err(invalid(
            field,
            format!("uses a variable beyond dimension {n}"),
        ));
    }
    if !fiber && e.uses_fiber() {
        return Err(invalid(field, "must depend on x only"));
    }
    Ok(e)
}

fn chart(cfg: &ModelConfig) -> Result<ChartBox, ConfigError> {
    let n = cfg.dimension;
    if n == 0 {
        return Err(invalid("dimension", "must be positive"));
    }
    let c = match &cfg.chart {
        ChartSpec::Cube { cube } => {
            if !(*cube > 0.0) {
                return Err(invalid("chart.cube", "half-width must be positive"));
            }
            ChartBox::cube(n, *cube)
        }
        ChartSpec::Box { lo, hi } => {
            ChartBox::new(lo.clone(), hi.clone()).map_err(|e| invalid("chart", e.to_string()))?
        }
    };
    if c.dim() != n {
        return Err(invalid(
            "chart",
            format!("has dimension {}, expected {n}", c.dim()),
        ));
    }
    Ok(c)
}

fn metric(field: &str, spec: &MetricSpec, n: usize) -> Result<Metric, ConfigError> {
    match spec {
        MetricSpec::Named(s) => match s.as_str() {
            "euclidean" => Ok(Metric::euclidean(n)),
            "stereographic" => Ok(Metric::Stereographic { n }),
            other => Err(invalid(field, format!("unknown metric `{other}`"))),
        },
        MetricSpec::Matrix(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(invalid(field, format!("must be a {n}×{n} matrix")));
            }
            let flat: Vec<&Entry> = rows.iter().flatten().collect();
            if flat.iter().all(|e| matches!(e, Entry::Num(_))) {
                let a: Vec<f64> = flat
                    .iter()
                    .map(|e| match e {
                        Entry::Num(v) => *v,
                        Entry::Expr(_) => unreachable!(),
                    })
                    .collect();
                for i in 0..n {
                    for j in 0..n {
                        if (a[i * n + j] - a[j * n + i]).abs() > 1e-12 * (1.0 + a[i * n + j].abs())
                        {
                            return Err(invalid(field, "must be symmetric"));
                        }
                    }
                }
                return Ok(Metric::Constant { n, a });
            }
            let entries = flat
                .iter()
                .enumerate()
                .map(|(k, e)| entry_expr(&format!("{field}[{}][{}]", k / n, k % n), e, n))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Metric::Expr { n, entries })
        }
    }
}

fn entry_expr(field: &str, e: &Entry, n: usize) -> Result<Expr, ConfigError> {
    match e {
        Entry::Num(v) => Ok(Expr::Num(*v)),
        Entry::Expr(s) => parse_expr(field, s, n, false),
    }
}

fn form(entries: &[Entry], n: usize) -> Result<OneForm, ConfigError> {
    if entries.len() != n {
        return Err(invalid("form", format!("needs {n} components")));
    }
    if entries.iter().all(|e| matches!(e, Entry::Num(_))) {
        return Ok(OneForm::Constant(
            entries
                .iter()
                .map(|e| match e {
                    Entry::Num(v) => *v,
                    Entry::Expr(_) => unreachable!(),
                })
                .collect(),
        ));
    }
    let e = entries
        .iter()
        .enumerate()
        .map(|(i, e)| entry_expr(&format!("form[{i}]"), e, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OneForm::Expr(e))
}

fn volume(
    spec: &VolumeSpec,
    n: usize,
    metric: Option<&Metric>,
    field: &str,
) -> Result<VolumeForm, ConfigError> {
    Ok(match spec {
        VolumeSpec::RiemannianDensity => match metric {
            Some(m) => VolumeForm::Riemannian(m.clone()),
            None => {
                return Err(invalid(
                    field,
                    "riemannian_density needs a Riemannian metric",
                ))
            }
        },
        VolumeSpec::Constant { value } => {
            if !(*value > 0.0 && value.is_finite()) {
                return Err(invalid(field, "constant density must be positive"));
            }
            VolumeForm::Constant(*value)
        }
        VolumeSpec::Expression { sigma } => VolumeForm::Custom(ScalarFn::Expr(parse_expr(
            &format!("{field}.sigma"),
            sigma,
            n,
            false,
        )?)),
        VolumeSpec::Scaled { base, f, exponent } => {
            let base = match base {
                Some(b) => volume(b, n, metric, &format!("{field}.base"))?,
                None => default_volume(metric),
            };
            if !exponent.is_finite() {
                return Err(invalid(format!("{field}.exponent"), "must be finite"));
            }
            VolumeForm::Scaled {
                base: Box::new(base),
                f: ScalarFn::Expr(parse_expr(&format!("{field}.f"), f, n, false)?),
                exponent: *exponent,
            }
        }
    })
}

fn default_volume(metric: Option<&Metric>) -> VolumeForm {
    match metric {
        Some(m) => VolumeForm::Riemannian(m.clone()),
        None => VolumeForm::Constant(1.0),
    }
}

fn require<'a, T>(v: &'a Option<T>, field: &str, family: &str) -> Result<&'a T, ConfigError> {
    v.as_ref()
        .ok_or_else(|| invalid(field, format!("required for the {family} family")))
}

fn gauge(field: &str, src: &Option<String>, n: usize) -> Result<Option<ScalarFn>, ConfigError> {
    src.as_ref()
        .map(|s| parse_expr(field, s, n, false).map(ScalarFn::Expr))
        .transpose()
}

fn build(cfg: &ModelConfig) -> Result<Model, ConfigError> {
    let n = cfg.dimension;
    let chart = chart(cfg)?;
    let name = cfg.name.clone().unwrap_or_else(|| "model".into());

    let mut riemann = None;
    let mut form_data = None;
    let mut finsler = None;
    let mut probes: Vec<(String, Expr)> = Vec::new();
    let spray = match cfg.family {
        FamilyKind::Riemannian | FamilyKind::Randers => {
            let m = metric(
                "metric",
                require(&cfg.metric, "metric", "Riemannian/Randers")?,
                n,
            )?;
            collect_metric_exprs("metric", &m, &mut probes);
            let a = RiemannianData::new(m, chart.clone())
                .map_err(|e| invalid("metric", e.to_string()))?;
            let spray = if cfg.family == FamilyKind::Randers {
                let b = BetaData::new(form(require(&cfg.form, "form", "randers")?, n)?);
                if let OneForm::Expr(es) = &b.form {
                    for (i, e) in es.iter().enumerate() {
                        probes.push((format!("form[{i}]"), e.clone()));
                    }
                }
                let fm =
                    FinslerModel::randers(&a, &b).map_err(|e| invalid("form", e.to_string()))?;
                let s = ModelSpray::Finsler(induced_spray(&fm));
                finsler = Some(fm);
                form_data = Some(b);
                s
            } else {
                finsler = Some(FinslerModel::riemannian(&a));
                ModelSpray::LeviCivita(levi_civita_spray(&a))
            };
            riemann = Some(a);
            spray
        }
        FamilyKind::FourthRoot => {
            let k = *require(&cfg.split, "split", "fourth_root")?;
            if k == 0 || k >= n {
                return Err(invalid("split", format!("must lie in 1..{n}")));
            }
            let c = *require(&cfg.c, "c", "fourth_root")?;
            let m1 = metric("metric", require(&cfg.metric, "metric", "fourth_root")?, k)?;
            let m2 = metric(
                "second_metric",
                require(&cfg.second_metric, "second_metric", "fourth_root")?,
                n - k,
            )?;
            for (field, m) in [("metric", &m1), ("second_metric", &m2)] {
                if let Metric::Expr { .. } = m {
                    return Err(invalid(
                        field,
                        "fourth-root factors must be constant or named metrics",
                    ));
                }
            }
            let c1 = ChartBox::new(chart.lo[..k].to_vec(), chart.hi[..k].to_vec())
                .map_err(|e| invalid("chart", e.to_string()))?;
            let c2 = ChartBox::new(chart.lo[k..].to_vec(), chart.hi[k..].to_vec())
                .map_err(|e| invalid("chart", e.to_string()))?;
            let a1 = RiemannianData::new(m1, c1).map_err(|e| invalid("metric", e.to_string()))?;
            let a2 =
                RiemannianData::new(m2, c2).map_err(|e| invalid("second_metric", e.to_string()))?;
            let fm =
                FinslerModel::fourth_root(&a1, &a2, c).map_err(|e| invalid("c", e.to_string()))?;
            let s = ModelSpray::Finsler(induced_spray(&fm));
            finsler = Some(fm);
            s
        }
        FamilyKind::CustomSpray => {
            let srcs = require(&cfg.spray, "spray", "custom_spray")?;
            if srcs.len() != n {
                return Err(invalid("spray", format!("needs {n} coefficients")));
            }
            let es = srcs
                .iter()
                .enumerate()
                .map(|(i, s)| parse_expr(&format!("spray[{i}]"), s, n, true))
                .collect::<Result<Vec<_>, _>>()?;
            for (i, e) in es.iter().enumerate() {
                probes.push((format!("spray[{i}]"), e.clone()));
            }
            ModelSpray::Custom(
                ExprSpray::new(chart.clone(), es).map_err(|e| invalid("spray", e.to_string()))?,
            )
        }
        FamilyKind::CustomFinsler => {
            let e = parse_expr(
                "finsler",
                require(&cfg.finsler, "finsler", "custom_finsler")?,
                n,
                true,
            )?;
            probes.push(("finsler".into(), e.clone()));
            let fm = FinslerModel::custom(chart.clone(), e)
                .map_err(|e| invalid("finsler", e.to_string()))?;
            let s = ModelSpray::Finsler(induced_spray(&fm));
            finsler = Some(fm);
            s
        }
    };

    let metric_ref = riemann.as_ref().map(|a: &RiemannianData| &a.metric);
    let volume = match &cfg.volume {
        Some(v) => volume(v, n, metric_ref, "volume")?,
        None => default_volume(metric_ref),
    };
    collect_volume_exprs("volume", &volume, &mut probes);
    let f = gauge("gauges.f", &cfg.gauges.f, n)?;
    let h = gauge("gauges.h", &cfg.gauges.h, n)?;
    let phi = gauge("gauges.phi", &cfg.gauges.phi, n)?;
    for (field, g) in [("gauges.f", &f), ("gauges.h", &h), ("gauges.phi", &phi)] {
        if let Some(ScalarFn::Expr(e)) = g {
            probes.push((field.into(), e.clone()));
        }
    }
    if cfg.witness && f.is_none() {
        return Err(invalid("witness", "a witness needs gauges.f"));
    }

    let mut sampling = SampleSpec::default();
    if let Some(c) = cfg.sampling.count {
        sampling.count = c;
    }
    if let Some(s) = cfg.sampling.seed {
        sampling.seed = s;
    }
    if let Some([lo, hi]) = cfg.sampling.fiber {
        sampling.fiber_lo = lo;
        sampling.fiber_hi = hi;
    }
    if let Some(m) = cfg.sampling.margin {
        sampling.margin = m;
    }
    sampling
        .validate()
        .map_err(|e| invalid("sampling", e.to_string()))?;

    let geodesic = cfg
        .geodesic
        .as_ref()
        .map(|g| -> Result<GeodesicSpec, ConfigError> {
            let s = TangentSample::new(g.x.clone(), g.y.clone())
                .map_err(|e| invalid("geodesic", e.to_string()))?;
            s.check_on(&chart)
                .map_err(|e| invalid("geodesic.x", e.to_string()))?;
            Ok(GeodesicSpec {
                start: s,
                t_max: g.tmax.unwrap_or(1.0),
                step: g.step.unwrap_or(1e-3),
            })
        })
        .transpose()?;

    let model = Model {
        name,
        family: match cfg.family {
            FamilyKind::Riemannian => Family::Riemannian,
            FamilyKind::Randers => Family::Randers,
            FamilyKind::FourthRoot => Family::FourthRoot,
            FamilyKind::CustomSpray => Family::CustomSpray,
            FamilyKind::CustomFinsler => Family::CustomFinsler,
        },
        chart,
        spray,
        finsler,
        riemann,
        form: form_data,
        volume,
        f: f.unwrap_or_else(ScalarFn::zero),
        h,
        phi,
        witness: cfg.witness,
        sampling,
        geodesic,
    };
    validate(&model, &probes)?;
    Ok(model)
}

fn collect_metric_exprs(field: &str, m: &Metric, out: &mut Vec<(String, Expr)>) {
    if let Metric::Expr { n, entries } = m {
        for (k, e) in entries.iter().enumerate() {
            out.push((format!("{field}[{}][{}]", k / n, k % n), e.clone()));
        }
    }
}

fn collect_volume_exprs(field: &str, v: &VolumeForm, out: &mut Vec<(String, Expr)>) {
    match v {
        VolumeForm::Custom(ScalarFn::Expr(e)) => out.push((format!("{field}.sigma"), e.clone())),
        VolumeForm::Scaled { base, f, .. } => {
            if let ScalarFn::Expr(e) = f {
                out.push((format!("{field}.f"), e.clone()));
            }
            collect_volume_exprs(&format!("{field}.base"), base, out);
        }
        _ => {}
    }
}

/// Eager checks on the assembled model: smoothness of every expression on
/// the closed chart, then pointwise admissibility at probe samples.
fn validate(m: &Model, probes: &[(String, Expr)]) -> Result<(), ConfigError> {
    let n = m.dim();
    let fibers = probe_fibers(n, 1.0);
    for (field, e) in probes {
        if let Err(d) = smoothness_probe(e, &m.chart, &fibers) {
            let region: Vec<String> =
                d.x.iter()
                    .map(|(a, b)| format!("[{a:.4}, {b:.4}]"))
                    .collect();
            return Err(invalid(
                field.clone(),
                format!(
                    "`{e}` is not smooth on the chart: {} near x ∈ {}",
                    d.what,
                    region.join(" × ")
                ),
            ));
        }
    }
    let spec = SampleSpec {
        count: PROBE_POINTS,
        seed: 0,
        fiber_lo: 1.0,
        fiber_hi: 1.0,
        margin: 0.0,
    };
    let mut points =
        sample_tangents(&m.chart, &spec).map_err(|e| invalid("chart", e.to_string()))?;
    for corner in 0..(1usize << n.min(10)) {
        let x: Vec<f64> = (0..n)
            .map(|i| {
                if corner >> i & 1 == 1 {
                    m.chart.hi[i]
                } else {
                    m.chart.lo[i]
                }
            })
            .collect();
        let mut y = vec![0.0; n];
        y[0] = 1.0;
        points.push(TangentSample::new(x, y).expect("unit fiber"));
    }
    for s in &points {
        if let Some(a) = &m.riemann {
            if cholesky(&a.metric.tensor(&s.x), n).is_none() {
                return Err(invalid(
                    "metric",
                    format!("not positive definite at x = {:?}", s.x),
                ));
            }
            if let Some(b) = &m.form {
                let r = beta_norm(a, b, &s.x).map_err(|e| invalid("form", e.to_string()))?;
                if !(r < 1.0) {
                    return Err(invalid(
                        "form",
                        format!(
                            "Randers bound ‖β‖_α < 1 violated: ‖β‖_α = {r:.6} at x = {:?}",
                            s.x
                        ),
                    ));
                }
            }
        }
        let ld: f64 = m.volume.ln_density(&s.x);
        if !ld.is_finite() {
            return Err(invalid(
                "volume",
                format!("density is not positive at x = {:?}", s.x),
            ));
        }
        if let Some(fm) = &m.finsler {
            if matches!(m.family, Family::CustomFinsler) {
                let f: f64 = fm.norm(&s.x, &s.y);
                if !(f > 0.0) {
                    return Err(invalid(
                        "finsler",
                        format!("F = {f} at x = {:?}, y = {:?}", s.x, s.y),
                    ));
                }
                fundamental_tensor(fm, s).map_err(|e| invalid("finsler", e.to_string()))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_riemannian_defaults_to_its_density() {
        let m = parse_config(r#"{"family": "riemannian", "dimension": 2, "chart": {"cube": 1}, "metric": "euclidean"}"#)
            .unwrap();
        assert!(matches!(m.volume, VolumeForm::Riemannian(_)));
        assert_eq!(m.sampling, SampleSpec::default());
    }

    #[test]
    fn randers_bound_is_enforced() {
        let err = parse_config(
            r#"{"family": "randers", "dimension": 2, "chart": {"cube": 0.5},
                "metric": "euclidean", "form": [1.2, 0]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("Randers bound"), "{err}");
    }

    #[test]
    fn singular_spray_is_rejected() {
        let err = parse_config(
            r#"{"family": "custom_spray", "dimension": 2, "chart": {"cube": 1},
                "spray": ["y1^2/ (x1)", "0"]}"#,
        )
        .unwrap_err();
        match err {
            ConfigError::Validation { field, message } => {
                assert_eq!(field, "spray[0]");
                assert!(message.contains("not smooth"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn syntax_errors_carry_a_position() {
        match parse_config("{\n  \"family\": \"riemannian\",\n  \"dimension\": }").unwrap_err() {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
        let err = parse_config(
            r#"{"family": "randers", "dimension": 2, "chart": {"cube": 1}, "metric": "euclidean"}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("`form`"), "{err}");
    }
}
