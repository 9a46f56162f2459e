//! Experiment harness: scenario descriptions, error metrics, parameter
//! sweeps, and a set of canned demonstration scenarios.
//!
//! A [`Scenario`] fully describes one experiment: the true machine, the input
//! profile, which estimator runs against it with what parameter mismatch, and
//! the time grid. [`run_scenario`] executes it deterministically for a given
//! seed and reduces the error signal `psi_s_hat - psi_s` to [`ErrorMetrics`].

use crate::estimators::{
    Discretization, Estimator, EstimatorError, EstimatorKind, EstimatorParams, FluxEstimate,
    MismatchFactors,
};
use crate::machine::{
    corrupt, simulate, InputProfile, InvalidParams, MachineParams, MachineState, Measurement,
    MeasurementFault, SimulationError, SpeedProfile, Trace, VoltageProfile,
};
use crate::numerics::{IntegrationMethod, SpaceVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Where the true machine starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// Both fluxes zero: the machine is switched on at t = 0.
    #[default]
    Zero,
    /// Equilibrium for the inputs held at their t = 0 values. Exact to
    /// machine precision, so experiments that rely on the rotor current
    /// being truly zero can use it without any settling interval.
    DcEquilibrium,
    /// Periodic steady state of a sinusoidal profile at constant speed.
    /// Requires a sinusoid voltage profile and a constant speed profile.
    SinusoidSteadyState,
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub machine: MachineParams,
    pub estimator: EstimatorKind,
    #[serde(default)]
    pub mismatch: MismatchFactors,
    pub profile: InputProfile,
    #[serde(default)]
    pub fault: MeasurementFault,
    pub dt: f64,
    pub t_end: f64,
    /// Metrics ignore everything before this time.
    #[serde(default = "default_settle")]
    pub settle: f64,
    /// Interval simulated and discarded before t = 0 of the recorded run.
    /// Reported time restarts at zero afterwards; the input signals continue
    /// seamlessly.
    #[serde(default)]
    pub preroll: f64,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default = "default_method")]
    pub method: IntegrationMethod,
    #[serde(default)]
    pub discretization: Discretization,
    /// Optional voltage-model integrator clamp, weber per axis.
    #[serde(default)]
    pub clamp: Option<f64>,
}

fn default_settle() -> f64 {
    1.0
}

fn default_method() -> IntegrationMethod {
    IntegrationMethod::RungeKutta4
}

impl Scenario {
    /// A scenario with library defaults for everything but the essentials:
    /// default machine, no mismatch, no measurement faults, 1 s settle,
    /// zero initial state.
    pub fn new(
        name: &str,
        estimator: EstimatorKind,
        profile: InputProfile,
        dt: f64,
        t_end: f64,
    ) -> Scenario {
        Scenario {
            name: name.to_string(),
            machine: MachineParams::default(),
            estimator,
            mismatch: MismatchFactors::default(),
            profile,
            fault: MeasurementFault::default(),
            dt,
            t_end,
            settle: default_settle(),
            preroll: 0.0,
            initial: InitialState::default(),
            method: default_method(),
            discretization: Discretization::default(),
            clamp: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.machine.validate()?;
        self.fault.validate()?;
        let invalid = |reason: String| HarnessError::InvalidScenario {
            name: self.name.clone(),
            reason,
        };
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(invalid(format!(
                "t_end must be at least dt, got t_end = {}, dt = {}",
                self.t_end, self.dt
            )));
        }
        if !(0.0..self.t_end).contains(&self.settle) {
            return Err(invalid(format!(
                "settle must lie in [0, t_end), got settle = {}, t_end = {}",
                self.settle, self.t_end
            )));
        }
        if self.preroll < 0.0 || (self.preroll > 0.0 && self.preroll < self.dt) {
            return Err(invalid(format!(
                "preroll must be zero or at least one step, got {}",
                self.preroll
            )));
        }
        if let Some(limit) = self.clamp {
            if !(limit > 0.0) {
                return Err(invalid(format!("clamp must be positive, got {limit}")));
            }
        }
        if let EstimatorKind::Blended { cutoff_rad_s } = self.estimator {
            if !(cutoff_rad_s > 0.0) {
                return Err(invalid(format!(
                    "blend cutoff must be positive, got {cutoff_rad_s}"
                )));
            }
        }
        EstimatorParams::from_machine(&self.machine, &self.mismatch).validate()?;
        Ok(())
    }
}

/// Scalar summary of the estimation error over one run.
///
/// The error signal is `|psi_s_hat - psi_s|` sampled on the trace grid.
/// `rms`, `max_abs`, `final_offset` and `drift_slope` are computed over the
/// window `t >= settle`; `flux_peak` and `diverged` look at the whole run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorMetrics {
    /// Root mean square of the error magnitude, weber.
    pub rms: f64,
    /// Largest error magnitude in the window, weber.
    pub max_abs: f64,
    /// Mean error magnitude over the last tenth of the window, weber.
    pub final_offset: f64,
    /// Least-squares slope of error magnitude versus time, weber per second.
    pub drift_slope: f64,
    /// Peak |psi_s| of the true trace, weber. The reference scale.
    pub flux_peak: f64,
    /// True when the error magnitude exceeded ten times `flux_peak` anywhere
    /// in the run.
    pub diverged: bool,
}

impl ErrorMetrics {
    /// RMS error normalized by the true flux scale.
    pub fn relative_rms(&self) -> f64 {
        if self.flux_peak > 0.0 {
            self.rms / self.flux_peak
        } else if self.rms == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Everything produced by one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub truth: Trace,
    pub measurements: Vec<Measurement>,
    pub estimates: Vec<FluxEstimate>,
    pub metrics: ErrorMetrics,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    InvalidParams(#[from] InvalidParams),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("invalid scenario `{name}`: {reason}")]
    InvalidScenario { name: String, reason: String },
    #[error("estimate count {estimates} does not match trace length {records}")]
    LengthMismatch { estimates: usize, records: usize },
    #[error("metrics window is empty: settle = {settle} s, trace ends at {t_end} s")]
    EmptyWindow { settle: f64, t_end: f64 },
    #[error("initial state {initial:?} requires {requirement}")]
    UnsupportedInitial {
        initial: InitialState,
        requirement: String,
    },
}

fn resolve_initial(s: &Scenario) -> Result<MachineState, HarnessError> {
    match s.initial {
        InitialState::Zero => Ok(MachineState::ZERO),
        InitialState::DcEquilibrium => {
            let u0 = s.profile.voltage_at(0.0);
            let omega0 = s.profile.omega_at(0.0);
            if omega0 == 0.0 {
                Ok(MachineState::dc_equilibrium(u0, &s.machine))
            } else {
                Ok(MachineState::sinusoidal_steady_state(
                    u0.magnitude(),
                    0.0,
                    u0.y.atan2(u0.x),
                    omega0,
                    &s.machine,
                ))
            }
        }
        InitialState::SinusoidSteadyState => match (s.profile.voltage, s.profile.speed) {
            (
                VoltageProfile::Sinusoid { amplitude, frequency_hz, phase },
                SpeedProfile::Constant { omega },
            ) => Ok(MachineState::sinusoidal_steady_state(
                amplitude,
                frequency_hz,
                phase,
                omega,
                &s.machine,
            )),
            _ => Err(HarnessError::UnsupportedInitial {
                initial: s.initial,
                requirement: "a sinusoid voltage profile and a constant speed profile".to_string(),
            }),
        },
    }
}

fn truth_trace(scenario: &Scenario) -> Result<Trace, HarnessError> {
    let mut initial = resolve_initial(scenario)?;
    let mut profile = scenario.profile;
    if scenario.preroll > 0.0 {
        let warmup = simulate(
            &scenario.machine,
            &profile,
            scenario.dt,
            scenario.preroll,
            scenario.method,
            initial,
        )?;
        let last = warmup.records.last().expect("simulate returns at least one record");
        initial = MachineState { psi_s: last.psi_s, psi_r: last.psi_r };
        profile = profile.advanced_by(last.t);
    }
    Ok(simulate(
        &scenario.machine,
        &profile,
        scenario.dt,
        scenario.t_end,
        scenario.method,
        initial,
    )?)
}

/// Ground truth only: resolves the initial state, applies any preroll, and
/// simulates the scenario's machine without running an estimator.
pub fn simulate_scenario(scenario: &Scenario) -> Result<Trace, HarnessError> {
    scenario.validate()?;
    truth_trace(scenario)
}

/// Runs one scenario. The seed feeds the measurement-noise generator;
/// noise-free scenarios give identical results for every seed.
pub fn run_scenario(scenario: &Scenario, seed: u64) -> Result<ScenarioResult, HarnessError> {
    scenario.validate()?;
    let truth = truth_trace(scenario)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let measurements: Vec<Measurement> = truth
        .records
        .iter()
        .map(|r| corrupt(r, &scenario.fault, &mut rng))
        .collect();

    let params = EstimatorParams::from_machine(&scenario.machine, &scenario.mismatch);
    let mut estimator = Estimator::new(scenario.estimator, params, scenario.dt)?
        .with_discretization(scenario.discretization);
    if let Some(limit) = scenario.clamp {
        estimator = estimator.with_clamp(limit)?;
    }
    let estimates: Vec<FluxEstimate> = measurements.iter().map(|m| estimator.step(m)).collect();

    let metrics = compute_metrics(&truth, &estimates, scenario.settle)?;
    Ok(ScenarioResult {
        scenario: scenario.clone(),
        truth,
        measurements,
        estimates,
        metrics,
    })
}

/// Reduces an estimate sequence against its ground-truth trace.
pub fn compute_metrics(
    truth: &Trace,
    estimates: &[FluxEstimate],
    settle: f64,
) -> Result<ErrorMetrics, HarnessError> {
    if estimates.len() != truth.len() {
        return Err(HarnessError::LengthMismatch {
            estimates: estimates.len(),
            records: truth.len(),
        });
    }
    let flux_peak = truth.peak_flux_magnitude();
    let threshold = 10.0 * flux_peak;
    let mut diverged = false;
    let mut window: Vec<(f64, f64)> = Vec::new();
    for (r, e) in truth.records.iter().zip(estimates) {
        let err = (e.psi_s_hat - r.psi_s).magnitude();
        if flux_peak > 0.0 && err > threshold {
            diverged = true;
        }
        if r.t >= settle - 1e-9 {
            window.push((r.t, err));
        }
    }
    if window.is_empty() {
        let t_end = truth.records.last().map(|r| r.t).unwrap_or(0.0);
        return Err(HarnessError::EmptyWindow { settle, t_end });
    }

    let n = window.len() as f64;
    let rms = (window.iter().map(|(_, e)| e * e).sum::<f64>() / n).sqrt();
    let max_abs = window.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    let tail = window.len().max(10) / 10;
    let final_offset =
        window[window.len() - tail..].iter().map(|(_, e)| e).sum::<f64>() / tail as f64;

    let t_mean = window.iter().map(|(t, _)| t).sum::<f64>() / n;
    let e_mean = window.iter().map(|(_, e)| e).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, e) in &window {
        num += (t - t_mean) * (e - e_mean);
        den += (t - t_mean) * (t - t_mean);
    }
    let drift_slope = if den > 0.0 { num / den } else { 0.0 };

    Ok(ErrorMetrics { rms, max_abs, final_offset, drift_slope, flux_peak, diverged })
}

/// Which estimator parameter a mismatch sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MismatchParam {
    #[serde(rename = "r_s")]
    RS,
    #[serde(rename = "r_r")]
    RR,
    #[serde(rename = "l_m")]
    LM,
    #[serde(rename = "l_l")]
    LL,
}

/// One swept quantity and the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SweepAxis {
    /// Excitation frequencies, hertz. The voltage amplitude is held fixed
    /// and the rotor speed is set synchronous at every point; the base
    /// scenario must use a sinusoid voltage profile.
    Frequency { values: Vec<f64> },
    /// Multiplicative mismatch factors applied to one estimator parameter.
    Mismatch { param: MismatchParam, factors: Vec<f64> },
    /// Constant current-measurement offsets along the x axis, amperes.
    CurrentOffset { values: Vec<f64> },
}

impl SweepAxis {
    pub fn values(&self) -> &[f64] {
        match self {
            SweepAxis::Frequency { values } => values,
            SweepAxis::Mismatch { factors, .. } => factors,
            SweepAxis::CurrentOffset { values } => values,
        }
    }
}

/// Outcome of one sweep cell. Failures are captured per cell so one bad
/// configuration does not abort the rest of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: Result<ErrorMetrics, HarnessError>,
}

fn cell_scenario(base: &Scenario, axis: &SweepAxis, value: f64) -> Result<Scenario, HarnessError> {
    let mut s = base.clone();
    match axis {
        SweepAxis::Frequency { .. } => match s.profile.voltage {
            VoltageProfile::Sinusoid { amplitude, phase, .. } => {
                s.profile.voltage = VoltageProfile::Sinusoid {
                    amplitude,
                    frequency_hz: value,
                    phase,
                };
                s.profile.speed = SpeedProfile::Constant {
                    omega: s.machine.synchronous_speed(value),
                };
            }
            _ => {
                return Err(HarnessError::InvalidScenario {
                    name: base.name.clone(),
                    reason: "a frequency sweep needs a sinusoid voltage profile".to_string(),
                })
            }
        },
        SweepAxis::Mismatch { param, .. } => match param {
            MismatchParam::RS => s.mismatch.r_s = value,
            MismatchParam::RR => s.mismatch.r_r = value,
            MismatchParam::LM => s.mismatch.l_m = value,
            MismatchParam::LL => s.mismatch.l_l = value,
        },
        SweepAxis::CurrentOffset { .. } => {
            s.fault.current_offset = SpaceVector::new(value, 0.0);
        }
    }
    Ok(s)
}

/// Runs the base scenario once per axis value. Every cell uses the same
/// seed, so cells differ only in the swept quantity.
pub fn run_sweep(base: &Scenario, axis: &SweepAxis, seed: u64) -> Vec<SweepPoint> {
    axis.values()
        .iter()
        .map(|&value| {
            let outcome = cell_scenario(base, axis, value)
                .and_then(|s| run_scenario(&s, seed))
                .map(|r| r.metrics);
            SweepPoint { value, outcome }
        })
        .collect()
}

/// Named demonstration scenarios covering the characteristic behavior of
/// each estimator: voltage-model drift under a resistance error at DC (fig2)
/// and its bounded AC counterpart (fig3), the simple current model's
/// proportional inductance error (fig5), stator current estimation under a
/// resistance error (fig8), and the blended estimator at the two ends of
/// its frequency range (blend5, blend50).
pub fn canned_scenarios() -> Vec<Scenario> {
    let machine = MachineParams::default();
    let sine = |f_hz: f64| InputProfile {
        voltage: VoltageProfile::Sinusoid { amplitude: 10.0, frequency_hz: f_hz, phase: 0.0 },
        speed: SpeedProfile::Constant { omega: machine.synchronous_speed(f_hz) },
    };
    let r_s_high = MismatchFactors { r_s: 1.05, ..MismatchFactors::default() };

    let mut fig2 = Scenario::new(
        "fig2",
        EstimatorKind::VoltageModel,
        InputProfile {
            voltage: VoltageProfile::Step { amplitude: 10.0, start_time: 0.0 },
            speed: SpeedProfile::Constant { omega: 0.0 },
        },
        1e-4,
        20.0,
    );
    fig2.mismatch = r_s_high;

    let mut fig3 = Scenario::new("fig3", EstimatorKind::VoltageModel, sine(5.0), 1e-4, 5.0);
    fig3.mismatch = r_s_high;

    let mut fig5 = Scenario::new("fig5", EstimatorKind::CurrentModelSimple, sine(5.0), 1e-4, 5.0);
    fig5.mismatch = MismatchFactors { l_m: 1.05, ..MismatchFactors::default() };
    fig5.initial = InitialState::SinusoidSteadyState;

    let mut fig8 = Scenario::new(
        "fig8",
        EstimatorKind::StatorCurrentEstimation,
        sine(5.0),
        1e-4,
        5.0,
    );
    fig8.mismatch = r_s_high;
    fig8.initial = InitialState::SinusoidSteadyState;

    let blended = EstimatorKind::Blended { cutoff_rad_s: crate::estimators::default_blend_cutoff() };
    let mut blend5 = Scenario::new("blend5", blended, sine(5.0), 1e-4, 5.0);
    blend5.mismatch = MismatchFactors::uniform(1.05);

    let mut blend50 = Scenario::new("blend50", blended, sine(50.0), 1e-4, 5.0);
    blend50.mismatch = MismatchFactors::uniform(1.05);

    vec![fig2, fig3, fig5, fig8, blend5, blend50]
}

/// Looks up a canned scenario by name.
pub fn canned_scenario(name: &str) -> Option<Scenario> {
    canned_scenarios().into_iter().find(|s| s.name == name)
}
