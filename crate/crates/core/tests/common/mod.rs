#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use spraylab::finsler::FinslerModel;
use spraylab::functions::ScalarFn;
use spraylab::jets::TangentSample;
use spraylab::riemann::{BetaData, RiemannianData};
use spraylab::sampling::{
    model_chart, random_metric, random_one_form, random_scalar, rng, sample_tangents_filtered,
    SampleSpec,
};
use spraylab::scurv::VolumeForm;

/// `|a − b| / (1 + max(|a|, |b|))`
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

pub struct RandersCase {
    pub a: RiemannianData,
    pub b: BetaData,
    pub fm: FinslerModel,
    pub dv: VolumeForm,
    pub f: ScalarFn,
}

pub fn randers_case(r: &mut ChaCha8Rng, n: usize) -> RandersCase {
    let a = RiemannianData::new(random_metric(r, n), model_chart(n)).unwrap();
    let b = BetaData::new(random_one_form(r, n, 0.5));
    let fm = FinslerModel::randers(&a, &b).unwrap();
    let dv = VolumeForm::scaled(VolumeForm::Constant(1.0), random_scalar(r, n));
    let f = random_scalar(r, n);
    RandersCase { a, b, fm, dv, f }
}

pub fn randers_cases(seed: u64, count: usize) -> Vec<RandersCase> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| randers_case(&mut r, 2 + i % 2))
        .collect()
}

pub fn samples(n: usize, count: usize, seed: u64) -> Vec<TangentSample> {
    sample_tangents_filtered(
        &model_chart(n),
        &SampleSpec::default().with_count(count).with_seed(seed),
        |_, _| true,
    )
    .unwrap()
}
