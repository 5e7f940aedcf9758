//! Natural cubic spline through strictly increasing knots.
//!
//! Three or more knots give a natural cubic (zero second derivative at both
//! ends); two knots degrade to a line and one knot to a constant. Outside the
//! knot range the spline continues linearly with its end slope.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SplineError {
    #[error("no knots")]
    Empty,
    #[error("knot and value counts differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("knots must be strictly increasing and finite")]
    NotIncreasing,
}

#[derive(Debug, Clone)]
pub struct NaturalSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivative at each knot.
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(knots: &[f64], values: &[f64]) -> Result<Self, SplineError> {
        if knots.is_empty() {
            return Err(SplineError::Empty);
        }
        if knots.len() != values.len() {
            return Err(SplineError::LengthMismatch(knots.len(), values.len()));
        }
        if knots.iter().chain(values).any(|v| !v.is_finite()) || knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SplineError::NotIncreasing);
        }
        let n = knots.len();
        let mut m = vec![0.0; n];
        if n >= 3 {
            // Interior equations h[i-1] m[i-1] + 2(h[i-1]+h[i]) m[i] + h[i] m[i+1] = rhs[i],
            // with m[0] = m[n-1] = 0, solved by the Thomas algorithm.
            let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for j in 0..k {
                let i = j + 1;
                diag[j] = 2.0 * (h[i - 1] + h[i]);
                upper[j] = h[i];
                rhs[j] = 6.0 * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
            }
            for j in 1..k {
                let lower = h[j];
                let w = lower / diag[j - 1];
                diag[j] -= w * upper[j - 1];
                rhs[j] -= w * rhs[j - 1];
            }
            let mut sol = vec![0.0; k];
            sol[k - 1] = rhs[k - 1] / diag[k - 1];
            for j in (0..k - 1).rev() {
                sol[j] = (rhs[j] - upper[j] * sol[j + 1]) / diag[j];
            }
            m[1..n - 1].copy_from_slice(&sol);
        }
        Ok(Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            m,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn second_derivatives(&self) -> &[f64] {
        &self.m
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.knots.len();
        self.knots.partition_point(|k| *k <= x).clamp(1, n - 1) - 1
    }

    fn end_slope(&self, left: bool) -> f64 {
        let n = self.knots.len();
        if left {
            self.derivative(self.knots[0])
        } else {
            self.derivative(self.knots[n - 1])
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if n == 1 {
            return self.values[0];
        }
        if x < self.knots[0] {
            return self.values[0] + self.end_slope(true) * (x - self.knots[0]);
        }
        if x > self.knots[n - 1] {
            return self.values[n - 1] + self.end_slope(false) * (x - self.knots[n - 1]);
        }
        let i = self.segment(x);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - x) / h;
        let b = (x - self.knots[i]) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + h * h / 6.0 * ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1])
    }

    /// First derivative; inside the knot range only (clamped to the end segments).
    pub fn derivative(&self, x: f64) -> f64 {
        if self.knots.len() == 1 {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - x) / h;
        let b = (x - self.knots[i]) / h;
        (self.values[i + 1] - self.values[i]) / h - (3.0 * a * a - 1.0) * h / 6.0 * self.m[i]
            + (3.0 * b * b - 1.0) * h / 6.0 * self.m[i + 1]
    }

    /// Second derivative; zero outside the knot range.
    pub fn second_derivative(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if n < 3 || x < self.knots[0] || x > self.knots[n - 1] {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - x) / h;
        let b = (x - self.knots[i]) / h;
        a * self.m[i] + b * self.m[i + 1]
    }
}
