//! Quantities the `eval` subcommand can tabulate.

use std::fmt;
use std::str::FromStr;

use spraylab::analysis::gauge_second_derivative;
use spraylab::analysis::{
    condition_b_residual, pricf_residual, randers_gauge, xi, FlatnessWitness,
    RandersCharacterization,
};
use spraylab::jets::TangentSample;
use spraylab::scurv::{
    pric_direct, pric_rescale_residual, pric_via_hat, projective_spray, s_curvature,
    volume_change_residual, WeightedSpray,
};
use spraylab::spray::{
    berwald_tensor, connection, ricci, riemann_curvature, riemann_tensor, Spray, Tensor4,
};
use spraylab::{Error, Result};

use crate::model::Model;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    G,
    N,
    Gamma,
    R,
    Rfull,
    B,
    Ric,
    S,
    Ghat,
    PRic,
    Xi,
    RicWeighted,
    ConditionB,
    Pricf,
    VolumeChange,
    PricRescale,
    RandersResidual1,
    RandersResidual2,
}

pub const ALL: [Quantity; 18] = [
    Quantity::G,
    Quantity::N,
    Quantity::Gamma,
    Quantity::R,
    Quantity::Rfull,
    Quantity::B,
    Quantity::Ric,
    Quantity::S,
    Quantity::Ghat,
    Quantity::PRic,
    Quantity::Xi,
    Quantity::RicWeighted,
    Quantity::ConditionB,
    Quantity::Pricf,
    Quantity::VolumeChange,
    Quantity::PricRescale,
    Quantity::RandersResidual1,
    Quantity::RandersResidual2,
];

impl Quantity {
    pub fn id(self) -> &'static str {
        match self {
            Quantity::G => "G",
            Quantity::N => "N",
            Quantity::Gamma => "Gamma",
            Quantity::R => "R",
            Quantity::Rfull => "Rfull",
            Quantity::B => "B",
            Quantity::Ric => "Ric",
            Quantity::S => "S",
            Quantity::Ghat => "Ghat",
            Quantity::PRic => "PRic",
            Quantity::Xi => "Xi",
            Quantity::RicWeighted => "Ric_weighted",
            Quantity::ConditionB => "residual_condition_b",
            Quantity::Pricf => "residual_pricf",
            Quantity::VolumeChange => "residual_volume_change",
            Quantity::PricRescale => "residual_pric_rescale",
            Quantity::RandersResidual1 => "residual_randers_1",
            Quantity::RandersResidual2 => "residual_randers_2",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ALL.iter().copied().find(|q| q.id() == s).ok_or_else(|| {
            let ids: Vec<&str> = ALL.iter().map(|q| q.id()).collect();
            format!("unknown quantity `{s}`; expected one of {}", ids.join(", "))
        })
    }
}

fn idx(parts: &[usize]) -> String {
    parts
        .iter()
        .map(|p| (p + 1).to_string())
        .collect::<Vec<_>>()
        .join("_")
}

fn tensor_columns(name: &str, n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n * n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    out.push(format!("{name}_{}", idx(&[a, b, c, d])));
                }
            }
        }
    }
    out
}

/// Column names of `q` for an `n`-dimensional model.
pub fn columns(q: Quantity, n: usize) -> Vec<String> {
    let vec = |name: &str| {
        (0..n)
            .map(|i| format!("{name}_{}", i + 1))
            .collect::<Vec<_>>()
    };
    let mat = |name: &str| {
        (0..n * n)
            .map(|k| format!("{name}_{}", idx(&[k / n, k % n])))
            .collect::<Vec<_>>()
    };
    match q {
        Quantity::G => vec("G"),
        Quantity::N => mat("N"),
        Quantity::Gamma => (0..n * n * n)
            .map(|k| format!("Gamma_{}", idx(&[k / (n * n), (k / n) % n, k % n])))
            .collect(),
        Quantity::R => mat("R"),
        Quantity::Rfull => tensor_columns("Rfull", n),
        Quantity::B => tensor_columns("B", n),
        Quantity::Ghat => vec("Ghat"),
        Quantity::PRic => vec!["PRic_direct".into(), "PRic_via_hat".into()],
        Quantity::RandersResidual2 => vec("residual_randers_2"),
        other => vec![other.id().to_string()],
    }
}

fn flat(t: Tensor4) -> Vec<f64> {
    t.data
}

/// Values of `q` at `s`, in the order of [`columns`].
pub fn evaluate(model: &Model, q: Quantity, s: &TangentSample) -> Result<Vec<f64>> {
    let g = &model.spray;
    let n = model.dim() as f64;
    let w = WeightedSpray::new(g, model.volume.clone());
    let fw = || FlatnessWitness::new(WeightedSpray::new(g, model.volume.clone()), model.f.clone());
    Ok(match q {
        Quantity::G => connection(g, s)?.g,
        Quantity::N => connection(g, s)?.nonlinear,
        Quantity::Gamma => connection(g, s)?.christoffel,
        Quantity::R => riemann_curvature(g, s)?,
        Quantity::Rfull => flat(riemann_tensor(g, s)?),
        Quantity::B => flat(berwald_tensor(g, s)?),
        Quantity::Ric => vec![ricci(g, s)?],
        Quantity::S => vec![s_curvature(&w, s)?],
        Quantity::Ghat => {
            s.check_on(g.chart())?;
            projective_spray(&w).coeffs(&s.x, &s.y)
        }
        Quantity::PRic => vec![pric_direct(&w, s)?, pric_via_hat(&w, s)?],
        Quantity::Xi => vec![xi(&fw(), s)?],
        Quantity::RicWeighted => {
            let f0 = model.f.contracted(&s.x, &s.y);
            let f00 = gauge_second_derivative(g, &model.f, s)?;
            vec![ricci(g, s)? + (n - 1.0) * (f00 + f0 * f0)]
        }
        Quantity::ConditionB => vec![condition_b_residual(&fw(), s)?],
        Quantity::Pricf => vec![pricf_residual(&fw(), s)?],
        Quantity::VolumeChange => {
            let (dv, dvt, f) = model.volume_pair();
            vec![volume_change_residual(g, &dv, &dvt, &f, s)?]
        }
        Quantity::PricRescale => vec![pric_rescale_residual(g, &model.volume, &model.f, s)?],
        Quantity::RandersResidual1 | Quantity::RandersResidual2 => {
            let (Some(a), Some(b)) = (&model.riemann, &model.form) else {
                return Err(Error::InvalidArgument(format!("{q} needs a randers model")));
            };
            let h = model
                .h
                .clone()
                .unwrap_or_else(|| randers_gauge(a, &model.volume, &model.f));
            let r = RandersCharacterization::new(a, b, h)?.residuals(s)?;
            if q == Quantity::RandersResidual1 {
                vec![r.residual1]
            } else {
                r.residual2
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for q in ALL {
            assert_eq!(q.id().parse::<Quantity>().unwrap(), q);
        }
        assert!("Ricci".parse::<Quantity>().is_err());
    }

    #[test]
    fn column_counts() {
        assert_eq!(columns(Quantity::Gamma, 2).len(), 8);
        assert_eq!(columns(Quantity::Rfull, 3).len(), 81);
        assert_eq!(columns(Quantity::PRic, 3).len(), 2);
        assert_eq!(columns(Quantity::N, 2)[1], "N_1_2");
    }
}
