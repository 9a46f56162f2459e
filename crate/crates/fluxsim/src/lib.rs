//! Desk-scale induction machine simulator and stator flux estimator
//! testbench.
//!
//! The crate is organized in four layers:
//!
//! * [`numerics`]: space vectors, fixed-step integration, complementary
//!   first-order filters.
//! * [`machine`]: the ground-truth flux model, input profiles, and the
//!   measurement boundary that turns plant state into sensor readings.
//! * [`estimators`]: four flux estimation schemes plus a blended
//!   low/high-frequency combination, all driven by measurements only.
//! * [`harness`]: scenarios, error metrics, parameter sweeps, and canned
//!   demonstration experiments.
//!
//! The usual workflow is to describe an experiment as a [`Scenario`], run it
//! with [`run_scenario`], and look at the resulting [`ErrorMetrics`]:
//!
//! ```
//! use fluxsim::{
//!     EstimatorKind, InputProfile, MachineParams, Scenario, SpeedProfile, VoltageProfile,
//!     run_scenario,
//! };
//!
//! let machine = MachineParams::default();
//! let mut scenario = Scenario::new(
//!     "demo",
//!     EstimatorKind::CurrentModelFull,
//!     InputProfile {
//!         voltage: VoltageProfile::Sinusoid { amplitude: 10.0, frequency_hz: 5.0, phase: 0.0 },
//!         speed: SpeedProfile::Constant { omega: machine.synchronous_speed(5.0) },
//!     },
//!     1e-3,
//!     0.2,
//! );
//! scenario.settle = 0.1;
//! let result = run_scenario(&scenario, 0).unwrap();
//! assert!(result.metrics.relative_rms() < 0.05);
//! ```

// Validation deliberately writes `!(v > 0.0)` so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod estimators;
pub mod harness;
pub mod machine;
pub mod numerics;

pub use estimators::{
    default_blend_cutoff, Discretization, Estimator, EstimatorError, EstimatorKind,
    EstimatorParams, FluxEstimate, MismatchFactors,
};
pub use harness::{
    canned_scenario, canned_scenarios, compute_metrics, run_scenario, run_sweep,
    simulate_scenario, ErrorMetrics, HarnessError, InitialState, MismatchParam, Scenario,
    ScenarioResult, SweepAxis, SweepPoint,
};
pub use machine::{
    corrupt, currents_from_fluxes, machine_derivatives, simulate, InputProfile, InvalidParams,
    MachineParams, MachineState, Measurement, MeasurementFault, SimulationError, SpeedProfile,
    Trace, TraceRecord, VoltageProfile,
};
pub use numerics::{integrate_step, FirstOrderFilter, IntegrationMethod, NumericsError, SpaceVector};

/// Keeps the guide's code listings compiling: every chapter of the book is
/// run as a doc-test of this crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/machine-model.md")]
    mod machine_model {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/blending.md")]
    mod blending {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
