use std::fmt;
use std::sync::Arc;

use crate::geometry::{Point, Side};
use crate::{Error, Result};

/// Default interior-penalty parameter.
pub const DEFAULT_PENALTY: f64 = 4.0;

/// Dimensionless model and discretisation parameters.
///
/// The final time is derived as `time_step * n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParameters {
    pub reynolds: f64,
    pub darcy: f64,
    pub forchheimer: f64,
    pub porosity: f64,
    pub penalty: f64,
    pub time_step: f64,
    pub n_steps: usize,
}

/// The three parameter bundles of the reference experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Test1,
    Test2,
    Test3,
}

impl Preset {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "test1" => Some(Preset::Test1),
            "test2" => Some(Preset::Test2),
            "test3" => Some(Preset::Test3),
            _ => None,
        }
    }

    /// `(Re, C, T_max)`
    pub fn values(self) -> (f64, f64, f64) {
        match self {
            Preset::Test1 => (1.0, 1.0, 0.01),
            Preset::Test2 => (10.0, 10.0, 0.1),
            Preset::Test3 => (100.0, 1.0, 1.0),
        }
    }
}

impl ModelParameters {
    pub const PRESET_STEPS: usize = 50;
    pub const PRESET_POROSITY: f64 = 0.3;

    pub fn new(
        reynolds: f64,
        darcy: f64,
        forchheimer: f64,
        porosity: f64,
        t_max: f64,
        n_steps: usize,
    ) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::param("n_steps", "must be at least 1"));
        }
        let p = ModelParameters {
            reynolds,
            darcy,
            forchheimer,
            porosity,
            penalty: DEFAULT_PENALTY,
            time_step: t_max / n_steps as f64,
            n_steps,
        };
        p.validate()?;
        Ok(p)
    }

    /// Preset bundle with 50 steps and porosity 0.3 at the given Darcy number.
    pub fn preset(preset: Preset, darcy: f64) -> Result<Self> {
        let (re, c, t_max) = preset.values();
        Self::new(re, darcy, c, Self::PRESET_POROSITY, t_max, Self::PRESET_STEPS)
    }

    pub fn with_penalty(mut self, penalty: f64) -> Result<Self> {
        self.penalty = penalty;
        self.validate()?;
        Ok(self)
    }

    pub fn with_darcy(mut self, darcy: f64) -> Result<Self> {
        self.darcy = darcy;
        self.validate()?;
        Ok(self)
    }

    /// Same final time with a different number of steps.
    pub fn with_steps(mut self, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::param("n_steps", "must be at least 1"));
        }
        let t = self.t_max();
        self.n_steps = n_steps;
        self.time_step = t / n_steps as f64;
        Ok(self)
    }

    pub fn t_max(&self) -> f64 {
        self.time_step * self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("reynolds", self.reynolds)?;
        positive("darcy", self.darcy)?;
        positive("penalty", self.penalty)?;
        positive("time_step", self.time_step)?;
        if !(self.forchheimer >= 0.0 && self.forchheimer.is_finite()) {
            return Err(Error::param("forchheimer", format!("must be non-negative, got {}", self.forchheimer)));
        }
        if !(self.porosity > 0.0 && self.porosity <= 1.0) {
            return Err(Error::param("porosity", format!("must lie in (0, 1], got {}", self.porosity)));
        }
        if self.n_steps == 0 {
            return Err(Error::param("n_steps", "must be at least 1"));
        }
        Ok(())
    }
}

pub type VectorFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(Point) -> [[f64; 2]; 2] + Send + Sync>;
type SideFn = Arc<dyn Fn(Side, Point) -> [f64; 2] + Send + Sync>;

/// Velocity data on the prescribed-velocity boundary, with an optional
/// gradient of its extension into the domain (`g[i][j] = d g_i / d x_j`).
#[derive(Clone)]
pub struct BoundaryData {
    value: SideFn,
    gradient: Option<GradientFn>,
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryData").field("has_gradient", &self.gradient.is_some()).finish_non_exhaustive()
    }
}

impl BoundaryData {
    /// Constant vector per side, indexed by [`Side::index`].
    pub fn per_side(values: [[f64; 2]; 4]) -> Self {
        BoundaryData { value: Arc::new(move |side: Side, _| values[side.index()]), gradient: None }
    }

    /// `g` on the left side, zero on the other sides.
    pub fn inflow(g: [f64; 2]) -> Self {
        Self::per_side([g, [0.0; 2], [0.0; 2], [0.0; 2]])
    }

    pub fn homogeneous() -> Self {
        Self::per_side([[0.0; 2]; 4])
    }

    pub fn from_fn(f: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        BoundaryData { value: Arc::new(move |_, p| f(p)), gradient: None }
    }

    pub fn with_gradient(mut self, g: impl Fn(Point) -> [[f64; 2]; 2] + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn value(&self, side: Side, p: Point) -> [f64; 2] {
        (self.value)(side, p)
    }

    pub fn gradient(&self, p: Point) -> Option<[[f64; 2]; 2]> {
        self.gradient.as_ref().map(|g| g(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let p = ModelParameters::preset(Preset::Test2, 1e-4).unwrap();
        assert_eq!((p.reynolds, p.forchheimer, p.n_steps, p.porosity), (10.0, 10.0, 50, 0.3));
        assert!((p.t_max() - 0.1).abs() < 1e-12 * 0.1);
        let p = ModelParameters::preset(Preset::Test3, 1e-4).unwrap();
        assert_eq!((p.reynolds, p.forchheimer), (100.0, 1.0));
        assert!((p.t_max() - 1.0).abs() < 1e-12);
        let p = ModelParameters::preset(Preset::Test1, 1e-3).unwrap();
        assert!((p.time_step - 2e-4).abs() < 1e-18);
    }

    #[test]
    fn validation() {
        assert!(ModelParameters::new(0.0, 1e-3, 1.0, 0.3, 1.0, 10).is_err());
        assert!(ModelParameters::new(1.0, 0.0, 1.0, 0.3, 1.0, 10).is_err());
        assert!(ModelParameters::new(1.0, 1e-3, -1.0, 0.3, 1.0, 10).is_err());
        assert!(ModelParameters::new(1.0, 1e-3, 1.0, 1.2, 1.0, 10).is_err());
        assert!(ModelParameters::new(1.0, 1e-3, 1.0, 0.3, 1.0, 0).is_err());
        let p = ModelParameters::new(1.0, 1e-3, 0.0, 1.0, 1.0, 3).unwrap();
        assert!(p.with_penalty(-1.0).is_err());
        assert!(((p.with_steps(7).unwrap().t_max()) - 1.0).abs() < 1e-12);
    }
}
