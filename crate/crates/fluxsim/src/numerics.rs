//! Fixed-step integration and filtering primitives shared by the plant model
//! and the estimators.
//!
//! Everything here works on [`SpaceVector`], the two-axis (x/y) representation
//! of a space vector in the stationary stator frame. A space vector doubles as
//! a complex number (x + jy), which is how the analytic steady-state helpers
//! and the rotational coupling terms are implemented.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Two-axis vector in the stationary reference frame.
///
/// Interpreted as the complex number `x + j*y` where `j` is a 90 degree
/// rotation ahead of the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpaceVector {
    pub x: f64,
    pub y: f64,
}

impl SpaceVector {
    pub const ZERO: SpaceVector = SpaceVector { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        SpaceVector { x, y }
    }

    /// Euclidean norm, |v|.
    pub fn magnitude(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Multiplication by j: rotates the vector 90 degrees counterclockwise.
    pub fn rotate90(&self) -> SpaceVector {
        SpaceVector { x: -self.y, y: self.x }
    }

    /// Complex product, treating both operands as x + jy.
    pub fn complex_mul(&self, rhs: SpaceVector) -> SpaceVector {
        SpaceVector {
            x: self.x * rhs.x - self.y * rhs.y,
            y: self.x * rhs.y + self.y * rhs.x,
        }
    }

    /// Complex quotient, treating both operands as x + jy.
    pub fn complex_div(&self, rhs: SpaceVector) -> SpaceVector {
        let d = rhs.x * rhs.x + rhs.y * rhs.y;
        SpaceVector {
            x: (self.x * rhs.x + self.y * rhs.y) / d,
            y: (self.y * rhs.x - self.x * rhs.y) / d,
        }
    }

    /// Unit vector at the given angle (radians from the x axis).
    pub fn from_angle(theta: f64) -> SpaceVector {
        SpaceVector { x: theta.cos(), y: theta.sin() }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Clamps each axis to [-limit, limit]. Models integrator saturation.
    pub fn clamp_symmetric(&self, limit: f64) -> SpaceVector {
        SpaceVector {
            x: self.x.clamp(-limit, limit),
            y: self.y.clamp(-limit, limit),
        }
    }
}

impl Add for SpaceVector {
    type Output = SpaceVector;
    fn add(self, rhs: SpaceVector) -> SpaceVector {
        SpaceVector { x: self.x + rhs.x, y: self.y + rhs.y }
    }
}

impl AddAssign for SpaceVector {
    fn add_assign(&mut self, rhs: SpaceVector) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for SpaceVector {
    type Output = SpaceVector;
    fn sub(self, rhs: SpaceVector) -> SpaceVector {
        SpaceVector { x: self.x - rhs.x, y: self.y - rhs.y }
    }
}

impl SubAssign for SpaceVector {
    fn sub_assign(&mut self, rhs: SpaceVector) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Neg for SpaceVector {
    type Output = SpaceVector;
    fn neg(self) -> SpaceVector {
        SpaceVector { x: -self.x, y: -self.y }
    }
}

impl Mul<f64> for SpaceVector {
    type Output = SpaceVector;
    fn mul(self, rhs: f64) -> SpaceVector {
        SpaceVector { x: self.x * rhs, y: self.y * rhs }
    }
}

impl Mul<SpaceVector> for f64 {
    type Output = SpaceVector;
    fn mul(self, rhs: SpaceVector) -> SpaceVector {
        rhs * self
    }
}

impl Div<f64> for SpaceVector {
    type Output = SpaceVector;
    fn div(self, rhs: f64) -> SpaceVector {
        SpaceVector { x: self.x / rhs, y: self.y / rhs }
    }
}

/// Fixed-step integration rule for the plant ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationMethod {
    /// First order, kept around because its error growth is easy to reason
    /// about in demonstrations.
    ForwardEuler,
    /// Classical fourth-order Runge-Kutta. The default for the plant.
    RungeKutta4,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("derivative component {index} is not finite at t = {t}")]
    NonFiniteDerivative { index: usize, t: f64 },
    #[error("step size must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("filter cutoff must be positive, got {0} rad/s")]
    NonPositiveCutoff(f64),
}

fn check_finite<const N: usize>(v: &[SpaceVector; N], t: f64) -> Result<(), NumericsError> {
    for (index, s) in v.iter().enumerate() {
        if !s.is_finite() {
            return Err(NumericsError::NonFiniteDerivative { index, t });
        }
    }
    Ok(())
}

fn add_scaled<const N: usize>(
    y: &[SpaceVector; N],
    k: &[SpaceVector; N],
    c: f64,
) -> [SpaceVector; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += k[i] * c;
    }
    out
}

/// Advances `state` by one step of `dt` under the given derivative function.
///
/// The derivative closure receives the evaluation time and the state and must
/// return d(state)/dt. Every stage evaluation is checked for non-finite
/// components; the error names the offending state slot.
pub fn integrate_step<const N: usize, F>(
    state: &[SpaceVector; N],
    mut deriv: F,
    t: f64,
    dt: f64,
    method: IntegrationMethod,
) -> Result<[SpaceVector; N], NumericsError>
where
    F: FnMut(f64, &[SpaceVector; N]) -> [SpaceVector; N],
{
    if !(dt > 0.0) {
        return Err(NumericsError::NonPositiveDt(dt));
    }
    match method {
        IntegrationMethod::ForwardEuler => {
            let k1 = deriv(t, state);
            check_finite(&k1, t)?;
            Ok(add_scaled(state, &k1, dt))
        }
        IntegrationMethod::RungeKutta4 => {
            let half = 0.5 * dt;
            let k1 = deriv(t, state);
            check_finite(&k1, t)?;
            let k2 = deriv(t + half, &add_scaled(state, &k1, half));
            check_finite(&k2, t + half)?;
            let k3 = deriv(t + half, &add_scaled(state, &k2, half));
            check_finite(&k3, t + half)?;
            let k4 = deriv(t + dt, &add_scaled(state, &k3, dt));
            check_finite(&k4, t + dt)?;
            let mut out = *state;
            for i in 0..N {
                out[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
            }
            Ok(out)
        }
    }
}

/// First-order lowpass 1/(1 + s/omega_c), discretized with the bilinear
/// (trapezoidal) transform, acting axis-wise on space vectors.
///
/// The matching highpass is computed as `input - lowpass(input)` from the same
/// internal state, so lowpass + highpass reproduces the input to within
/// floating point rounding at every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderFilter {
    cutoff_rad_s: f64,
    prev_input: SpaceVector,
    prev_output: SpaceVector,
}

impl FirstOrderFilter {
    pub fn new(cutoff_rad_s: f64) -> Result<Self, NumericsError> {
        if !(cutoff_rad_s > 0.0) {
            return Err(NumericsError::NonPositiveCutoff(cutoff_rad_s));
        }
        Ok(FirstOrderFilter {
            cutoff_rad_s,
            prev_input: SpaceVector::ZERO,
            prev_output: SpaceVector::ZERO,
        })
    }

    pub fn cutoff_rad_s(&self) -> f64 {
        self.cutoff_rad_s
    }

    /// One lowpass step. `dt` must be positive.
    pub fn lowpass_step(&mut self, input: SpaceVector, dt: f64) -> SpaceVector {
        let a = self.cutoff_rad_s * dt;
        let out = (self.prev_output * (2.0 - a) + (input + self.prev_input) * a) / (2.0 + a);
        self.prev_input = input;
        self.prev_output = out;
        out
    }

    /// One highpass step, sharing state with the lowpass so that the two
    /// responses sum back to the input.
    pub fn highpass_step(&mut self, input: SpaceVector, dt: f64) -> SpaceVector {
        input - self.lowpass_step(input, dt)
    }

    pub fn reset(&mut self) {
        self.prev_input = SpaceVector::ZERO;
        self.prev_output = SpaceVector::ZERO;
    }
}
