//! Front end for `spraylab`: config ingestion, tabulation of quantities,
//! verification suites and geodesic runs.

pub mod checks;
pub mod config;
pub mod model;
pub mod quantities;
pub mod report;

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use spraylab::analysis::{xi, FlatnessWitness};
use spraylab::geoflow::{
    integrate_geodesic, riccati_comparison_demo, riccati_residual, RiccatiDemo,
};
use spraylab::jets::TangentSample;
use spraylab::scurv::WeightedSpray;

use crate::checks::{model_checks, scalar_checks};
use crate::config::{parse_config, ConfigError};
use crate::model::Model;
use crate::quantities::{columns, evaluate, Quantity};
use crate::report::VerificationReport;

/// Failures of a subcommand, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

/// Configs shipped with the tool; `paper-identities` runs all of them.
pub const SHIPPED_CONFIGS: [(&str, &str); 11] = [
    ("flat", include_str!("../configs/flat.json")),
    (
        "flat-witness-3d",
        include_str!("../configs/flat-witness-3d.json"),
    ),
    ("sphere-2d", include_str!("../configs/sphere-2d.json")),
    ("sphere-3d", include_str!("../configs/sphere-3d.json")),
    ("randers-2d", include_str!("../configs/randers-2d.json")),
    ("randers-3d", include_str!("../configs/randers-3d.json")),
    (
        "fourth-root-flat",
        include_str!("../configs/fourth-root-flat.json"),
    ),
    (
        "fourth-root-c1",
        include_str!("../configs/fourth-root-c1.json"),
    ),
    (
        "custom-finsler",
        include_str!("../configs/custom-finsler.json"),
    ),
    ("custom-spray", include_str!("../configs/custom-spray.json")),
    (
        "riemannian-analytic",
        include_str!("../configs/riemannian-analytic.json"),
    ),
];

pub const SUITES: [&str; 1] = ["paper-identities"];

/// Random Randers models added to the `paper-identities` suite.
pub const RANDOM_RANDERS: usize = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    fn apply(&self, model: &mut Model) {
        if let Some(c) = self.samples {
            model.sampling.count = c;
        }
        if let Some(s) = self.seed {
            model.sampling.seed = s;
        }
    }

    fn seed(&self) -> u64 {
        self.seed
            .unwrap_or(spraylab::sampling::SampleSpec::default().seed)
    }
}

pub fn load_config(path: &str) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
    Ok(parse_config(&text)?)
}

/// Models of a built-in suite.
pub fn suite_models(name: &str, seed: u64) -> Result<Vec<Model>, CliError> {
    if name != "paper-identities" {
        return Err(CliError::Usage(format!(
            "unknown suite `{name}`; available: {}",
            SUITES.join(", ")
        )));
    }
    let mut out = Vec::new();
    for (file, text) in SHIPPED_CONFIGS {
        let mut m = parse_config(text)
            .map_err(|e| CliError::Usage(format!("shipped config {file}: {e}")))?;
        if m.name.is_empty() {
            m.name = file.to_string();
        }
        out.push(m);
    }
    for k in 0..RANDOM_RANDERS as u64 {
        out.push(Model::random_randers(
            seed.wrapping_add(1000 + k),
            2 + (k as usize % 2),
        ));
    }
    for n in [2, 3] {
        out.push(Model::random_riemannian(
            seed.wrapping_add(2000 + n as u64),
            n,
        ));
    }
    Ok(out)
}

/// Runs every applicable check on every model.
pub fn verify_models(
    models: Vec<Model>,
    ov: Overrides,
    with_scalar: bool,
) -> Result<VerificationReport, CliError> {
    let mut checks = Vec::new();
    for mut m in models {
        ov.apply(&mut m);
        let samples = m
            .samples()
            .map_err(|e| CliError::Runtime(format!("{}: sampling failed: {e}", m.name)))?;
        checks.extend(model_checks(&m, &samples));
    }
    if with_scalar {
        checks.extend(scalar_checks());
    }
    Ok(VerificationReport::new(ov.seed(), checks))
}

/// `verify` with either a config path or a suite name.
pub fn cmd_verify(
    config: Option<&str>,
    suite: Option<&str>,
    ov: Overrides,
) -> Result<VerificationReport, CliError> {
    match (config, suite) {
        (Some(path), None) => verify_models(vec![load_config(path)?], ov, false),
        (None, Some(name)) => verify_models(suite_models(name, ov.seed())?, ov, true),
        _ => Err(CliError::Usage(
            "verify needs exactly one of --config or --suite".into(),
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct EvalRow<'a> {
    index: usize,
    x: &'a [f64],
    y: &'a [f64],
    values: Vec<f64>,
}

#[derive(Serialize)]
struct EvalTable<'a> {
    model: &'a str,
    quantity: &'a str,
    columns: Vec<String>,
    rows: Vec<EvalRow<'a>>,
}

/// Tabulates `q` over the model's samples.
pub fn cmd_eval(
    model: &Model,
    q: Quantity,
    ov: Overrides,
    format: Format,
) -> Result<String, CliError> {
    let mut m = model.clone();
    ov.apply(&mut m);
    let n = m.dim();
    let samples = m.samples().map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut values = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        values.push(evaluate(&m, q, s).map_err(|e| CliError::Runtime(format!("sample {i}: {e}")))?);
    }
    let cols = columns(q, n);
    Ok(match format {
        Format::Csv => {
            let mut out = String::new();
            let mut head: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            head.extend((1..=n).map(|i| format!("y{i}")));
            head.extend(cols);
            out.push_str(&head.join(","));
            out.push('\n');
            for (s, v) in samples.iter().zip(&values) {
                let row: Vec<String> =
                    s.x.iter()
                        .chain(&s.y)
                        .chain(v)
                        .map(|&c| fmt_f64(c))
                        .collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows = samples
                .iter()
                .zip(values)
                .enumerate()
                .map(|(index, (s, values))| EvalRow {
                    index,
                    x: &s.x,
                    y: &s.y,
                    values,
                })
                .collect();
            let table = EvalTable {
                model: &m.name,
                quantity: q.id(),
                columns: cols,
                rows,
            };
            serde_json::to_string_pretty(&table).expect("table serializes")
        }
    })
}

/// Path dump and diagnostics of one geodesic run.
#[derive(Clone, Debug)]
pub struct GeodesicRun {
    pub csv: String,
    pub steps: usize,
    pub exit_time: Option<f64>,
    /// `max |F(t) − F(0)| / F(0)` when the model has a metric.
    pub f_drift: Option<f64>,
    pub max_riccati_residual: f64,
}

impl GeodesicRun {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        writeln!(s, "steps: {}", self.steps).unwrap();
        match self.exit_time {
            Some(t) => writeln!(s, "domain exit at t = {}", fmt_f64(t)).unwrap(),
            None => writeln!(s, "domain exit: none").unwrap(),
        }
        if let Some(d) = self.f_drift {
            writeln!(s, "F drift (relative): {}", fmt_f64(d)).unwrap();
        }
        writeln!(
            s,
            "max |riccati residual|: {}",
            fmt_f64(self.max_riccati_residual)
        )
        .unwrap();
        s
    }
}

/// Integrates the geodesic from `start` and tabulates
/// `(t, x, ẋ, F, Ξ, riccati residual)`.
pub fn cmd_geodesic(
    model: &Model,
    start: &TangentSample,
    t_max: f64,
    step: f64,
) -> Result<GeodesicRun, CliError> {
    let rt = |e: spraylab::Error| CliError::Runtime(e.to_string());
    let n = model.dim();
    let path = integrate_geodesic(&model.spray, start, t_max, step).map_err(rt)?;
    let fw = FlatnessWitness::new(
        WeightedSpray::new(&model.spray, model.volume.clone()),
        model.f.clone(),
    );
    let res = riccati_residual(&fw, &path).map_err(rt)?;
    let mut head = vec!["t".to_string()];
    head.extend((1..=n).map(|i| format!("x{i}")));
    head.extend((1..=n).map(|i| format!("v{i}")));
    head.extend(["F", "Xi", "riccati_residual"].map(String::from));
    let mut csv = head.join(",");
    csv.push('\n');
    let f0 = model.norm(&path.xs[0], &path.vs[0]);
    let mut drift = 0.0f64;
    for i in 0..path.len() {
        let s = path.sample(i).map_err(rt)?;
        let f = model.norm(&s.x, &s.y);
        if let (Some(f), Some(f0)) = (f, f0) {
            drift = drift.max((f - f0).abs() / f0);
        }
        let xi_v = xi(&fw, &s).map_err(rt)?;
        let mut row = vec![fmt_f64(path.times[i])];
        row.extend(s.x.iter().chain(&s.y).map(|&c| fmt_f64(c)));
        row.push(f.map_or_else(|| "NaN".to_string(), fmt_f64));
        row.push(fmt_f64(xi_v));
        row.push(fmt_f64(res[i]));
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    Ok(GeodesicRun {
        csv,
        steps: path.len().saturating_sub(1),
        exit_time: path.exit_time,
        f_drift: f0.map(|_| drift),
        max_riccati_residual: res.iter().fold(0.0f64, |m, r| m.max(r.abs())),
    })
}

/// The scalar comparison run behind `geodesic --riccati-xi0`.
pub fn riccati_demo(xi0: f64, q: f64, t_max: f64, step: f64) -> Result<RiccatiDemo, CliError> {
    riccati_comparison_demo(xi0, q, t_max, step, 0.01).map_err(|e| CliError::Usage(e.to_string()))
}
