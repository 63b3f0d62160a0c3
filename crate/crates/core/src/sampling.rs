//! Deterministic tangent samples and random analytic test models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::functions::{AnalyticFn, ScalarFn};
use crate::jets::{euclidean_norm, ChartBox, TangentSample};
use crate::riemann::{AnalyticForm, AnalyticMetric, Metric, OneForm};

/// How samples are drawn: `count` points in the chart shrunk by `margin` of
/// its width on every side, with fiber vectors of Euclidean norm in
/// `[fiber_lo, fiber_hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
    pub fiber_lo: f64,
    pub fiber_hi: f64,
    pub margin: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            count: 50,
            seed: 42,
            fiber_lo: 0.5,
            fiber_hi: 2.0,
            margin: 0.1,
        }
    }
}

impl SampleSpec {
    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fiber_lo > 0.0 && self.fiber_lo <= self.fiber_hi && self.fiber_hi.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "fiber-norm window [{}, {}] is invalid",
                self.fiber_lo, self.fiber_hi
            )));
        }
        if !(0.0..0.5).contains(&self.margin) {
            return Err(Error::InvalidArgument(format!(
                "margin {} outside [0, 0.5)",
                self.margin
            )));
        }
        Ok(())
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_direction<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = euclidean_norm(&v);
        if r > 0.05 && r <= 1.0 {
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

/// Draws samples, keeping only those accepted by `keep`. Gives up after
/// `1000·count` rejected draws.
pub fn sample_tangents_filtered<K>(
    chart: &ChartBox,
    spec: &SampleSpec,
    mut keep: K,
) -> Result<Vec<TangentSample>>
where
    K: FnMut(&[f64], &[f64]) -> bool,
{
    spec.validate()?;
    let inner = chart.interior(spec.margin);
    let n = chart.dim();
    let mut r = rng(spec.seed);
    let mut out = Vec::with_capacity(spec.count);
    let mut rejected = 0usize;
    while out.len() < spec.count {
        let x: Vec<f64> = (0..n)
            .map(|i| r.gen_range(inner.lo[i]..=inner.hi[i]))
            .collect();
        let norm = r.gen_range(spec.fiber_lo..=spec.fiber_hi);
        let y: Vec<f64> = uniform_direction(&mut r, n)
            .into_iter()
            .map(|c| c * norm)
            .collect();
        if keep(&x, &y) {
            out.push(TangentSample::new(x, y)?);
        } else {
            rejected += 1;
            if rejected > 1000 * spec.count.max(1) {
                return Err(Error::InvalidSample(
                    "sampling region rejects almost every draw".into(),
                ));
            }
        }
    }
    Ok(out)
}

pub fn sample_tangents(chart: &ChartBox, spec: &SampleSpec) -> Result<Vec<TangentSample>> {
    sample_tangents_filtered(chart, spec, |_, _| true)
}

/// Rescales every fiber vector so that `norm(x, y) = 1`.
pub fn unit_speed<N>(samples: &[TangentSample], norm: N) -> Result<Vec<TangentSample>>
where
    N: Fn(&[f64], &[f64]) -> f64,
{
    samples
        .iter()
        .map(|s| {
            let f = norm(&s.x, &s.y);
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidSample(format!("norm {f} at x = {:?}", s.x)));
            }
            Ok(s.scaled(1.0 / f))
        })
        .collect()
}

/// `a_ij = δ_ij + small analytic perturbation`; positive definite on all
/// of `R^n` because the perturbation is bounded by `0.3/n` per entry.
pub fn random_metric<R: Rng>(rng: &mut R, n: usize) -> Metric {
    let mut base = vec![0.0; n * n];
    let mut amp = vec![0.0; n * n];
    let mut wave = vec![0.0; n * n * n];
    let mut phase = vec![0.0; n * n];
    let bound = 0.3 / n as f64;
    for i in 0..n {
        for j in i..n {
            let ij = i * n + j;
            base[ij] = if i == j {
                1.0 + rng.gen_range(0.0..0.5)
            } else {
                rng.gen_range(-bound..bound)
            };
            amp[ij] = rng.gen_range(-bound..bound);
            for m in 0..n {
                wave[ij * n + m] = rng.gen_range(-1.5..1.5);
            }
            phase[ij] = rng.gen_range(0.0..std::f64::consts::TAU);
            base[j * n + i] = base[ij];
            amp[j * n + i] = amp[ij];
            phase[j * n + i] = phase[ij];
            for m in 0..n {
                wave[(j * n + i) * n + m] = wave[ij * n + m];
            }
        }
    }
    Metric::Analytic(AnalyticMetric {
        n,
        base,
        amp,
        wave,
        phase,
    })
}

/// A generically non-closed 1-form with Euclidean size below `scale`
/// everywhere on the cube `[-0.5, 0.5]^n`.
pub fn random_one_form<R: Rng>(rng: &mut R, n: usize, scale: f64) -> OneForm {
    // each component is a sum of three terms, each bounded by scale/(3√n)
    let per = scale / (3.0 * (n as f64).sqrt());
    let mut c = vec![0.0; n];
    let mut lin = vec![0.0; n * n];
    let mut amp = vec![0.0; n];
    let mut wave = vec![0.0; n * n];
    let mut phase = vec![0.0; n];
    for i in 0..n {
        c[i] = rng.gen_range(-per..per);
        // |lin_i · x| ≤ Σ|lin_im|·0.5
        for m in 0..n {
            lin[i * n + m] = rng.gen_range(-1.0..1.0) * 2.0 * per / n as f64;
            wave[i * n + m] = rng.gen_range(-2.0..2.0);
        }
        amp[i] = rng.gen_range(-per..per);
        phase[i] = rng.gen_range(0.0..std::f64::consts::TAU);
    }
    OneForm::Analytic(AnalyticForm {
        n,
        c,
        lin,
        amp,
        wave,
        phase,
    })
}

/// A random smooth function with all ingredients of [`AnalyticFn`] active.
pub fn random_scalar<R: Rng>(rng: &mut R, n: usize) -> ScalarFn {
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-1.0..1.0);
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }
    ScalarFn::Analytic(AnalyticFn {
        c0: rng.gen_range(-1.0..1.0),
        linear: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        quadratic: q,
        amp: rng.gen_range(-0.5..0.5),
        wave: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        phase: rng.gen_range(0.0..std::f64::consts::TAU),
    })
}

/// The chart on which random models are declared.
pub fn model_chart(n: usize) -> ChartBox {
    ChartBox::cube(n, 0.5)
}
