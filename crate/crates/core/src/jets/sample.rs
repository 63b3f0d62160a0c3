use crate::error::{Error, Result};

/// Smallest admissible Euclidean norm of a fiber vector.
pub const FIBER_FLOOR: f64 = 1e-12;

/// Axis-aligned coordinate box on which a model is declared.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ChartBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidArgument(format!(
                "chart box needs lo < hi componentwise, got {lo:?} / {hi:?}"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[-r, r]^n`.
    pub fn cube(n: usize, r: f64) -> Self {
        Self {
            lo: vec![-r; n],
            hi: vec![r; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// The box shrunk by `frac` of its width on every side.
    pub fn interior(&self, frac: f64) -> Self {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| {
                let m = frac * (b - a);
                (a + m, b - m)
            })
            .unzip();
        Self { lo, hi }
    }

    /// Cartesian product, used by product metrics.
    pub fn product(&self, other: &ChartBox) -> Self {
        let mut lo = self.lo.clone();
        lo.extend_from_slice(&other.lo);
        let mut hi = self.hi.clone();
        hi.extend_from_slice(&other.hi);
        Self { lo, hi }
    }
}

/// A chart point paired with a nonzero fiber vector.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::with_floor(x, y, FIBER_FLOOR)
    }

    pub fn with_floor(x: Vec<f64>, y: Vec<f64>, floor: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSample("non-finite coordinate".into()));
        }
        let norm = euclidean_norm(&y);
        if norm <= floor {
            return Err(Error::InvalidSample(format!(
                "fiber vector norm {norm:e} is below the floor {floor:e}"
            )));
        }
        Ok(Self { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn y_norm(&self) -> f64 {
        euclidean_norm(&self.y)
    }

    /// Same point, fiber vector scaled by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * lambda).collect(),
        }
    }

    /// Checks that the sample lives on `chart`.
    pub fn check_on(&self, chart: &ChartBox) -> Result<()> {
        if self.dim() != chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                got: self.dim(),
            });
        }
        if !chart.contains(&self.x) {
            return Err(Error::InvalidSample(format!(
                "x = {:?} lies outside the chart box",
                self.x
            )));
        }
        if self.y_norm() <= FIBER_FLOOR {
            return Err(Error::InvalidSample("zero fiber vector".into()));
        }
        Ok(())
    }
}

pub fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
