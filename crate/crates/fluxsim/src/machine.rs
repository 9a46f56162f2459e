//! Ground-truth induction machine model in the stationary two-axis frame.
//!
//! The machine is described entirely by its two flux linkages. Currents are
//! algebraic functions of the fluxes:
//!
//! ```text
//! psi_s = l_m * (i_s + i_r)          stator flux linkage
//! psi_r = psi_s + l_l * i_r          rotor flux linkage, leakage lumped rotor-side
//! ```
//!
//! and the state evolves as
//!
//! ```text
//! d psi_s / dt = u_s - r_s * i_s
//! d psi_r / dt = j * z_p * omega * psi_r - r_r * i_r
//! ```
//!
//! Rotor speed is an exogenous input profile; there is no mechanical equation.
//! Estimators never see this module's state directly: they observe
//! [`Measurement`] values produced by [`corrupt`], which carry only terminal
//! quantities (voltage, current, speed).

use crate::numerics::{integrate_step, IntegrationMethod, NumericsError, SpaceVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// True plant parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineParams {
    /// Stator resistance, ohm.
    pub r_s: f64,
    /// Rotor resistance, ohm.
    pub r_r: f64,
    /// Magnetization inductance, henry.
    pub l_m: f64,
    /// Leakage inductance (lumped on the rotor side), henry.
    pub l_l: f64,
    /// Pole-pair count.
    pub z_p: u32,
}

impl Default for MachineParams {
    /// Parameters of a small squirrel-cage test machine. A configuration
    /// default; every check in the test suite is parameter-relative.
    fn default() -> Self {
        MachineParams {
            r_s: 0.435,
            r_r: 0.816,
            l_m: 0.0693,
            l_l: 0.004,
            z_p: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid parameters: {0}")]
pub struct InvalidParams(pub String);

impl MachineParams {
    pub fn validate(&self) -> Result<(), InvalidParams> {
        for (name, v) in [
            ("r_s", self.r_s),
            ("r_r", self.r_r),
            ("l_m", self.l_m),
            ("l_l", self.l_l),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if self.z_p < 1 {
            return Err(InvalidParams("z_p must be at least 1".into()));
        }
        Ok(())
    }

    /// Unloaded rotor speed for a given excitation frequency:
    /// `2*pi*f / z_p` rad/s mechanical.
    pub fn synchronous_speed(&self, frequency_hz: f64) -> f64 {
        2.0 * std::f64::consts::PI * frequency_hz / self.z_p as f64
    }
}

/// Flux state pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MachineState {
    /// Stator flux linkage, weber.
    pub psi_s: SpaceVector,
    /// Rotor flux linkage, weber.
    pub psi_r: SpaceVector,
}

impl MachineState {
    pub const ZERO: MachineState = MachineState {
        psi_s: SpaceVector::ZERO,
        psi_r: SpaceVector::ZERO,
    };

    /// Equilibrium under a held DC voltage at zero speed: the rotor current
    /// has decayed to zero, so `i_s = u_s/r_s`, `psi_s = psi_r = l_m*i_s`.
    ///
    /// This is an exact fixed point of the continuous dynamics and of every
    /// fixed-step rule in [`IntegrationMethod`], which makes it the right
    /// starting point for experiments that need the machine settled to
    /// machine precision.
    pub fn dc_equilibrium(u_s: SpaceVector, p: &MachineParams) -> MachineState {
        let psi = u_s * (p.l_m / p.r_s);
        MachineState { psi_s: psi, psi_r: psi }
    }

    /// Periodic steady state under balanced sinusoidal excitation at constant
    /// rotor speed, evaluated at t = 0.
    ///
    /// All steady-state vectors rotate at the excitation frequency, so the
    /// state is obtained from a 2x2 complex phasor solve of the flux
    /// equations. Valid for any slip; at synchronous speed the rotor current
    /// vanishes and `psi_r = psi_s`.
    pub fn sinusoidal_steady_state(
        amplitude: f64,
        frequency_hz: f64,
        phase: f64,
        omega: f64,
        p: &MachineParams,
    ) -> MachineState {
        let w_e = 2.0 * std::f64::consts::PI * frequency_hz;
        let slip_rate = w_e - p.z_p as f64 * omega;
        let rr_ll = p.r_r / p.l_l;
        // psi_r = k * psi_s with k = (r_r/l_l) / (r_r/l_l + j*(w_e - z_p*omega))
        let k = SpaceVector::new(rr_ll, 0.0).complex_div(SpaceVector::new(rr_ll, slip_rate));
        let a = 1.0 / p.l_m + 1.0 / p.l_l;
        let b = 1.0 / p.l_l;
        // u = (j*w_e + r_s*a)*psi_s - r_s*b*psi_r
        let denom = SpaceVector::new(p.r_s * a, w_e) - k * (p.r_s * b);
        let u = SpaceVector::from_angle(phase) * amplitude;
        let psi_s = u.complex_div(denom);
        let psi_r = k.complex_mul(psi_s);
        MachineState { psi_s, psi_r }
    }

    pub fn is_finite(&self) -> bool {
        self.psi_s.is_finite() && self.psi_r.is_finite()
    }
}

/// Stator voltage waveform, applied as a two-axis vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VoltageProfile {
    /// `(amplitude, 0)` from `start_time` on, zero before.
    Step {
        amplitude: f64,
        #[serde(default)]
        start_time: f64,
    },
    /// Balanced rotating vector:
    /// `u_sx = A*cos(2*pi*f*t + phase)`, `u_sy = A*sin(2*pi*f*t + phase)`.
    Sinusoid {
        amplitude: f64,
        frequency_hz: f64,
        #[serde(default)]
        phase: f64,
    },
    Zero,
}

impl VoltageProfile {
    pub fn at(&self, t: f64) -> SpaceVector {
        match *self {
            VoltageProfile::Step { amplitude, start_time } => {
                if t >= start_time {
                    SpaceVector::new(amplitude, 0.0)
                } else {
                    SpaceVector::ZERO
                }
            }
            VoltageProfile::Sinusoid { amplitude, frequency_hz, phase } => {
                let theta = 2.0 * std::f64::consts::PI * frequency_hz * t + phase;
                SpaceVector::from_angle(theta) * amplitude
            }
            VoltageProfile::Zero => SpaceVector::ZERO,
        }
    }
}

/// Rotor speed profile (exogenous, mechanical rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpeedProfile {
    Constant { omega: f64 },
    Ramp { omega0: f64, slope: f64 },
}

impl Default for SpeedProfile {
    fn default() -> Self {
        SpeedProfile::Constant { omega: 0.0 }
    }
}

impl SpeedProfile {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            SpeedProfile::Constant { omega } => omega,
            SpeedProfile::Ramp { omega0, slope } => omega0 + slope * t,
        }
    }
}

/// Voltage and speed inputs bundled together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputProfile {
    pub voltage: VoltageProfile,
    #[serde(default)]
    pub speed: SpeedProfile,
}

impl InputProfile {
    pub fn voltage_at(&self, t: f64) -> SpaceVector {
        self.voltage.at(t)
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        self.speed.at(t)
    }

    /// The same physical signals, re-parameterized so that evaluating the
    /// returned profile at `t` gives the original at `t + offset`. Used to
    /// discard a pre-roll interval without disturbing signal continuity.
    pub fn advanced_by(&self, offset: f64) -> InputProfile {
        let voltage = match self.voltage {
            VoltageProfile::Step { amplitude, start_time } => VoltageProfile::Step {
                amplitude,
                start_time: start_time - offset,
            },
            VoltageProfile::Sinusoid { amplitude, frequency_hz, phase } => {
                VoltageProfile::Sinusoid {
                    amplitude,
                    frequency_hz,
                    phase: phase + 2.0 * std::f64::consts::PI * frequency_hz * offset,
                }
            }
            VoltageProfile::Zero => VoltageProfile::Zero,
        };
        let speed = match self.speed {
            SpeedProfile::Constant { omega } => SpeedProfile::Constant { omega },
            SpeedProfile::Ramp { omega0, slope } => SpeedProfile::Ramp {
                omega0: omega0 + slope * offset,
                slope,
            },
        };
        InputProfile { voltage, speed }
    }
}

/// Additive corruption applied to measured signals. Offsets are constant;
/// noise is zero-mean Gaussian drawn per axis from the caller's seeded rng.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasurementFault {
    pub current_offset: SpaceVector,
    pub current_noise_std: f64,
    pub voltage_offset: SpaceVector,
    pub voltage_noise_std: f64,
}

impl Default for MeasurementFault {
    fn default() -> Self {
        MeasurementFault {
            current_offset: SpaceVector::ZERO,
            current_noise_std: 0.0,
            voltage_offset: SpaceVector::ZERO,
            voltage_noise_std: 0.0,
        }
    }
}

impl MeasurementFault {
    pub fn validate(&self) -> Result<(), InvalidParams> {
        if self.current_noise_std < 0.0 || self.voltage_noise_std < 0.0 {
            return Err(InvalidParams("noise std must be non-negative".into()));
        }
        Ok(())
    }
}

/// What an estimator is allowed to observe: terminal voltage and current
/// (possibly corrupted) and the measured rotor speed. Fluxes and rotor
/// current are deliberately not representable here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    pub t: f64,
    pub u_s: SpaceVector,
    pub i_s: SpaceVector,
    pub omega: f64,
}

/// One row of ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: f64,
    pub u_s: SpaceVector,
    pub i_s: SpaceVector,
    pub i_r: SpaceVector,
    pub omega: f64,
    pub psi_s: SpaceVector,
    pub psi_r: SpaceVector,
}

/// Uniformly sampled ground-truth record of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub dt: f64,
    pub params: MachineParams,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Largest |psi_s| over the whole run. Reference scale for relative
    /// error and for the divergence threshold.
    pub fn peak_flux_magnitude(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.psi_s.magnitude())
            .fold(0.0, f64::max)
    }
}

/// Recovers both currents from the flux pair by inverting the linkage
/// relations: `i_r = (psi_r - psi_s)/l_l`, `i_s = psi_s/l_m - i_r`.
pub fn currents_from_fluxes(state: &MachineState, p: &MachineParams) -> (SpaceVector, SpaceVector) {
    let i_r = (state.psi_r - state.psi_s) / p.l_l;
    let i_s = state.psi_s / p.l_m - i_r;
    (i_s, i_r)
}

/// Right-hand side of the flux ODE. The returned `MachineState` holds the
/// time derivatives of the two fluxes.
pub fn machine_derivatives(
    state: &MachineState,
    u_s: SpaceVector,
    omega: f64,
    p: &MachineParams,
) -> MachineState {
    let (i_s, i_r) = currents_from_fluxes(state, p);
    MachineState {
        psi_s: u_s - i_s * p.r_s,
        psi_r: state.psi_r.rotate90() * (p.z_p as f64 * omega) - i_r * p.r_r,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulationError {
    #[error(transparent)]
    InvalidParams(#[from] InvalidParams),
    #[error("invalid time grid: dt = {dt}, t_end = {t_end} (need dt > 0 and t_end >= dt)")]
    InvalidTimeGrid { dt: f64, t_end: f64 },
    #[error(
        "state became non-finite at step {step} (t = {t}); dt = {dt}, method = {method:?} \
         -- reduce dt or check inputs"
    )]
    NonFiniteState {
        step: usize,
        t: f64,
        dt: f64,
        method: IntegrationMethod,
    },
    #[error("derivative evaluation failed at step {step}: {source}")]
    Derivative {
        step: usize,
        source: NumericsError,
    },
}

/// Number of integration steps for a run of length `t_end`: the floor of
/// `t_end/dt`, guarded against the quotient landing one ulp under an integer.
pub(crate) fn step_count(t_end: f64, dt: f64) -> usize {
    let ratio = t_end / dt;
    (ratio + ratio.abs() * 1e-12 + 1e-12).floor() as usize
}

/// Simulates the machine from `initial` over `[0, t_end]` and records every
/// step, including the initial state. The trace has `floor(t_end/dt) + 1`
/// records at uniform spacing `dt`.
pub fn simulate(
    p: &MachineParams,
    profile: &InputProfile,
    dt: f64,
    t_end: f64,
    method: IntegrationMethod,
    initial: MachineState,
) -> Result<Trace, SimulationError> {
    p.validate()?;
    if !(dt > 0.0) || !(t_end >= dt) || !dt.is_finite() || !t_end.is_finite() {
        return Err(SimulationError::InvalidTimeGrid { dt, t_end });
    }
    let steps = step_count(t_end, dt);
    let mut records = Vec::with_capacity(steps + 1);
    let mut state = [initial.psi_s, initial.psi_r];

    for step in 0..=steps {
        let t = step as f64 * dt;
        let s = MachineState { psi_s: state[0], psi_r: state[1] };
        if !s.is_finite() {
            return Err(SimulationError::NonFiniteState { step, t, dt, method });
        }
        let u_s = profile.voltage_at(t);
        let omega = profile.omega_at(t);
        let (i_s, i_r) = currents_from_fluxes(&s, p);
        records.push(TraceRecord { t, u_s, i_s, i_r, omega, psi_s: s.psi_s, psi_r: s.psi_r });

        if step < steps {
            state = integrate_step(
                &state,
                |tau, x| {
                    let st = MachineState { psi_s: x[0], psi_r: x[1] };
                    let d = machine_derivatives(&st, profile.voltage_at(tau), profile.omega_at(tau), p);
                    [d.psi_s, d.psi_r]
                },
                t,
                dt,
                method,
            )
            .map_err(|source| SimulationError::Derivative { step, source })?;
        }
    }

    Ok(Trace { records, dt, params: *p })
}

/// Turns a ground-truth record into what the sensors report. Offsets are
/// added as-is; when a noise std is nonzero, one Gaussian draw per axis is
/// taken from `rng` (zero stds consume no randomness, so noise-free runs are
/// seed-independent).
pub fn corrupt<R: Rng>(record: &TraceRecord, fault: &MeasurementFault, rng: &mut R) -> Measurement {
    let mut u_s = record.u_s + fault.voltage_offset;
    let mut i_s = record.i_s + fault.current_offset;
    if fault.voltage_noise_std > 0.0 {
        let n = Normal::new(0.0, fault.voltage_noise_std).expect("validated std");
        u_s += SpaceVector::new(n.sample(rng), n.sample(rng));
    }
    if fault.current_noise_std > 0.0 {
        let n = Normal::new(0.0, fault.current_noise_std).expect("validated std");
        i_s += SpaceVector::new(n.sample(rng), n.sample(rng));
    }
    Measurement { t: record.t, u_s, i_s, omega: record.omega }
}
