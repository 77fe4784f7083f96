use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CurveError {
    #[error("curve needs at least one breakpoint")]
    Empty,
    #[error("expected {expected} marginal costs for {breakpoints} breakpoints, got {got}")]
    Arity {
        breakpoints: usize,
        expected: usize,
        got: usize,
    },
    #[error("breakpoints must be strictly increasing")]
    NotIncreasing,
    #[error("marginal costs must be non-decreasing")]
    NotConvex,
    #[error("non-finite value in curve")]
    NonFinite,
}

/// Convex piecewise-linear production cost above `p_min`.
///
/// `breakpoints` has one more entry than `marginal_costs`; segment `i` runs
/// from `breakpoints[i]` to `breakpoints[i + 1]` at `marginal_costs[i]` per MWh.
/// A single breakpoint with no segments describes a fixed-output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostCurve {
    pub breakpoints: Vec<f64>,
    pub marginal_costs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub marginal_cost: f64,
}

impl Segment {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }
}

impl CostCurve {
    pub fn new(breakpoints: Vec<f64>, marginal_costs: Vec<f64>) -> Result<Self, CurveError> {
        let curve = CostCurve {
            breakpoints,
            marginal_costs,
        };
        curve.check()?;
        Ok(curve)
    }

    /// One segment at a constant marginal cost.
    pub fn flat(p_min: f64, p_max: f64, marginal_cost: f64) -> Self {
        if p_max > p_min {
            CostCurve {
                breakpoints: vec![p_min, p_max],
                marginal_costs: vec![marginal_cost],
            }
        } else {
            CostCurve {
                breakpoints: vec![p_min],
                marginal_costs: vec![],
            }
        }
    }

    pub fn check(&self) -> Result<(), CurveError> {
        if self.breakpoints.is_empty() {
            return Err(CurveError::Empty);
        }
        let expected = self.breakpoints.len() - 1;
        if self.marginal_costs.len() != expected {
            return Err(CurveError::Arity {
                breakpoints: self.breakpoints.len(),
                expected,
                got: self.marginal_costs.len(),
            });
        }
        if self
            .breakpoints
            .iter()
            .chain(&self.marginal_costs)
            .any(|v| !v.is_finite())
        {
            return Err(CurveError::NonFinite);
        }
        if self.breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CurveError::NotIncreasing);
        }
        if !self.is_convex() {
            return Err(CurveError::NotConvex);
        }
        Ok(())
    }

    pub fn is_convex(&self) -> bool {
        self.marginal_costs.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().expect("non-empty curve")
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.marginal_costs)
            .map(|(w, &c)| Segment {
                start: w[0],
                end: w[1],
                marginal_cost: c,
            })
    }

    /// Capacity-averaged slope over the curve's span; zero for a fixed-output curve.
    pub fn mean_marginal_cost(&self) -> f64 {
        let span = self.end() - self.start();
        if span <= 0.0 {
            return 0.0;
        }
        self.segments()
            .map(|s| s.width() * s.marginal_cost)
            .sum::<f64>()
            / span
    }

    /// Variable cost of producing `p` above the curve start (currency/h).
    pub fn cost_above_start(&self, p: f64) -> f64 {
        self.segments()
            .map(|s| {
                let covered = (p.min(s.end) - s.start).max(0.0);
                covered * s.marginal_cost
            })
            .sum()
    }

    pub fn scale_breakpoints(&mut self, factor: f64) {
        for b in &mut self.breakpoints {
            *b *= factor;
        }
    }

    pub fn scale_costs(&mut self, factor: f64) {
        for c in &mut self.marginal_costs {
            *c *= factor;
        }
    }
}

/// Piecewise-linear function given by `(x, y)` points with increasing `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PwlCurve {
    pub points: Vec<(f64, f64)>,
}

impl PwlCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, CurveError> {
        if points.is_empty() {
            return Err(CurveError::Empty);
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(CurveError::NonFinite);
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(CurveError::NotIncreasing);
        }
        Ok(PwlCurve { points })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 >= w[0].1)
    }

    /// Linear interpolation; clamps to the end values outside the domain.
    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        pts[pts.len() - 1].1
    }

    pub fn scale_x(&mut self, factor: f64) {
        for p in &mut self.points {
            p.0 *= factor;
        }
    }

    pub fn scale_y(&mut self, factor: f64) {
        for p in &mut self.points {
            p.1 *= factor;
        }
    }
}

/// CO2 output in t/h as a function of MW, sharing the heat-rate breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionsCurve {
    pub co2_rate: f64,
    pub heat_rate_curve: PwlCurve,
    pub emissions: PwlCurve,
}

impl EmissionsCurve {
    pub fn eval(&self, p: f64) -> f64 {
        self.emissions.eval(p)
    }
}
