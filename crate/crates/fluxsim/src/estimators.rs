//! Stator flux estimators.
//!
//! Every estimator consumes the same [`Measurement`] stream (terminal voltage,
//! terminal current, rotor speed) and produces a [`FluxEstimate`]. None of
//! them can see the plant state; parameter mismatch is expressed by giving an
//! estimator its own [`EstimatorParams`], usually derived from the true
//! machine parameters through multiplicative [`MismatchFactors`].
//!
//! The four base schemes:
//!
//! * **Voltage model**: open integration of the stator equation,
//!   `psi_s_hat = integral(u_s - r_se * i_s)`. Insensitive to inductance
//!   errors, but resistance error and current offset integrate into drift.
//!   An optional symmetric clamp models integrator saturation.
//! * **Current model, simple**: the magnetization shortcut
//!   `psi_s_hat = l_me * i_s`, exact when no rotor current flows.
//! * **Current model, full**: integrates the rotor equation driven by the
//!   measured current and speed, then maps rotor flux back to stator flux.
//!   Correct at any load when parameters match.
//! * **Stator current estimation**: integrates
//!   `d psi_s_hat/dt = u_s - (r_se/l_me) * psi_s_hat`, using no current
//!   measurement at all, and predicts the stator current as
//!   `psi_s_hat / l_me`. Its feedback term makes the estimate
//!   bounded-input bounded-output, unlike the voltage model's open
//!   integrator.
//!
//! [`EstimatorKind::Blended`] combines the full current model below a
//! crossover frequency with the voltage model above it, using complementary
//! first-order filters that sum to unity.

use crate::machine::{InvalidParams, MachineParams, Measurement};
use crate::numerics::{FirstOrderFilter, SpaceVector};
use serde::{Deserialize, Serialize};

/// Parameters as the estimator believes them. The `e` suffix marks them as
/// estimates of the corresponding machine values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorParams {
    pub r_se: f64,
    pub r_re: f64,
    pub l_me: f64,
    pub l_le: f64,
    pub z_p: u32,
}

impl EstimatorParams {
    /// Machine parameters scaled by per-parameter mismatch factors. A factor
    /// of 1.05 means the estimator over-estimates that parameter by 5%.
    pub fn from_machine(p: &MachineParams, f: &MismatchFactors) -> EstimatorParams {
        EstimatorParams {
            r_se: p.r_s * f.r_s,
            r_re: p.r_r * f.r_r,
            l_me: p.l_m * f.l_m,
            l_le: p.l_l * f.l_l,
            z_p: p.z_p,
        }
    }

    pub fn validate(&self) -> Result<(), InvalidParams> {
        for (name, v) in [
            ("r_se", self.r_se),
            ("r_re", self.r_re),
            ("l_me", self.l_me),
            ("l_le", self.l_le),
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
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams::from_machine(&MachineParams::default(), &MismatchFactors::default())
    }
}

/// Multiplicative error on each machine parameter as seen by the estimator.
/// All factors default to 1.0 (exact knowledge).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MismatchFactors {
    pub r_s: f64,
    pub r_r: f64,
    pub l_m: f64,
    pub l_l: f64,
}

impl Default for MismatchFactors {
    fn default() -> Self {
        MismatchFactors { r_s: 1.0, r_r: 1.0, l_m: 1.0, l_l: 1.0 }
    }
}

impl MismatchFactors {
    /// The same factor applied to every parameter.
    pub fn uniform(factor: f64) -> MismatchFactors {
        MismatchFactors { r_s: factor, r_r: factor, l_m: factor, l_l: factor }
    }
}

/// Estimator output for one measurement sample. `psi_s_hat` is always
/// produced; the optional fields are filled only by schemes that compute
/// them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxEstimate {
    pub psi_s_hat: SpaceVector,
    pub psi_r_hat: Option<SpaceVector>,
    pub i_s_hat: Option<SpaceVector>,
}

/// Which estimation scheme to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EstimatorKind {
    VoltageModel,
    CurrentModelSimple,
    CurrentModelFull,
    StatorCurrentEstimation,
    /// Full current model below the crossover, voltage model above it.
    Blended {
        #[serde(default = "default_blend_cutoff")]
        cutoff_rad_s: f64,
    },
}

/// Default blend crossover: well above the machine's slow flux dynamics,
/// well below the excitation frequencies where the voltage model shines.
pub fn default_blend_cutoff() -> f64 {
    2.0 * std::f64::consts::PI * 15.0
}

/// How estimator integrals are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    /// One explicit first-order step per sample. Cheap and easy to trace by
    /// hand, but its phase error grows linearly with frequency.
    ForwardEuler,
    /// Trapezoidal rule (implicit in the state feedback terms). The default:
    /// at typical sample rates its quadrature error is negligible next to the
    /// parameter-mismatch effects this crate exists to measure.
    #[default]
    Trapezoidal,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimatorError {
    #[error(transparent)]
    InvalidParams(#[from] InvalidParams),
    #[error("sample time must be positive and finite, got {0}")]
    InvalidDt(f64),
    #[error("blend cutoff must be positive, got {0} rad/s")]
    InvalidCutoff(f64),
    #[error("clamp limit must be positive, got {0}")]
    InvalidClamp(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct VmState {
    psi_s: SpaceVector,
    prev_integrand: Option<SpaceVector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct CmfState {
    psi_r: SpaceVector,
    /// Forcing term and system coefficient at the previous sample.
    prev: Option<(SpaceVector, SpaceVector)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct SceState {
    psi_s: SpaceVector,
    prev_u: Option<SpaceVector>,
}

#[derive(Debug, Clone, PartialEq)]
struct BlendState {
    vm: VmState,
    cmf: CmfState,
    low: FirstOrderFilter,
    high: FirstOrderFilter,
}

#[derive(Debug, Clone, PartialEq)]
enum KindState {
    VoltageModel(VmState),
    CurrentModelSimple,
    CurrentModelFull(CmfState),
    StatorCurrentEstimation(SceState),
    Blended(Box<BlendState>),
}

/// A configured estimator instance. Stateful; one `step` call per measurement
/// sample, taken at the fixed interval `dt` given at construction.
///
/// All state starts at zero. Trapezoidal mode returns the initial state on
/// the first call (the integral over an empty interval) and starts advancing
/// from the second call on; forward Euler advances on every call.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimator {
    kind: EstimatorKind,
    params: EstimatorParams,
    dt: f64,
    discretization: Discretization,
    clamp_limit: Option<f64>,
    state: KindState,
}

impl Estimator {
    pub fn new(kind: EstimatorKind, params: EstimatorParams, dt: f64) -> Result<Estimator, EstimatorError> {
        params.validate()?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(EstimatorError::InvalidDt(dt));
        }
        let state = match kind {
            EstimatorKind::VoltageModel => KindState::VoltageModel(VmState::default()),
            EstimatorKind::CurrentModelSimple => KindState::CurrentModelSimple,
            EstimatorKind::CurrentModelFull => KindState::CurrentModelFull(CmfState::default()),
            EstimatorKind::StatorCurrentEstimation => {
                KindState::StatorCurrentEstimation(SceState::default())
            }
            EstimatorKind::Blended { cutoff_rad_s } => {
                let filter = FirstOrderFilter::new(cutoff_rad_s)
                    .map_err(|_| EstimatorError::InvalidCutoff(cutoff_rad_s))?;
                KindState::Blended(Box::new(BlendState {
                    vm: VmState::default(),
                    cmf: CmfState::default(),
                    low: filter,
                    high: filter,
                }))
            }
        };
        Ok(Estimator {
            kind,
            params,
            dt,
            discretization: Discretization::default(),
            clamp_limit: None,
            state,
        })
    }

    pub fn with_discretization(mut self, discretization: Discretization) -> Estimator {
        self.discretization = discretization;
        self
    }

    /// Symmetric per-axis saturation of the voltage-model integrator. Applies
    /// to the voltage-model branch of a blended estimator as well. No effect
    /// on the other schemes.
    pub fn with_clamp(mut self, limit: f64) -> Result<Estimator, EstimatorError> {
        if !(limit > 0.0) || !limit.is_finite() {
            return Err(EstimatorError::InvalidClamp(limit));
        }
        self.clamp_limit = Some(limit);
        Ok(self)
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn params(&self) -> &EstimatorParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn discretization(&self) -> Discretization {
        self.discretization
    }

    /// Returns the estimator to its freshly constructed state.
    pub fn reset(&mut self) {
        match &mut self.state {
            KindState::VoltageModel(s) => *s = VmState::default(),
            KindState::CurrentModelSimple => {}
            KindState::CurrentModelFull(s) => *s = CmfState::default(),
            KindState::StatorCurrentEstimation(s) => *s = SceState::default(),
            KindState::Blended(b) => {
                b.vm = VmState::default();
                b.cmf = CmfState::default();
                b.low.reset();
                b.high.reset();
            }
        }
    }

    /// Processes one measurement sample and returns the current estimate.
    pub fn step(&mut self, m: &Measurement) -> FluxEstimate {
        let p = self.params;
        let dt = self.dt;
        let disc = self.discretization;
        let clamp = self.clamp_limit;
        match &mut self.state {
            KindState::VoltageModel(s) => {
                let psi_s = vm_step(s, m, &p, dt, disc, clamp);
                FluxEstimate { psi_s_hat: psi_s, psi_r_hat: None, i_s_hat: None }
            }
            KindState::CurrentModelSimple => FluxEstimate {
                psi_s_hat: m.i_s * p.l_me,
                psi_r_hat: None,
                i_s_hat: None,
            },
            KindState::CurrentModelFull(s) => {
                let (psi_s, psi_r) = cmf_step(s, m, &p, dt, disc);
                FluxEstimate { psi_s_hat: psi_s, psi_r_hat: Some(psi_r), i_s_hat: None }
            }
            KindState::StatorCurrentEstimation(s) => {
                let psi_s = sce_step(s, m, &p, dt, disc);
                FluxEstimate {
                    psi_s_hat: psi_s,
                    psi_r_hat: None,
                    i_s_hat: Some(psi_s / p.l_me),
                }
            }
            KindState::Blended(b) => {
                let vm_psi = vm_step(&mut b.vm, m, &p, dt, disc, clamp);
                let (cmf_psi_s, cmf_psi_r) = cmf_step(&mut b.cmf, m, &p, dt, disc);
                let psi_s = b.low.lowpass_step(cmf_psi_s, dt) + b.high.highpass_step(vm_psi, dt);
                FluxEstimate { psi_s_hat: psi_s, psi_r_hat: Some(cmf_psi_r), i_s_hat: None }
            }
        }
    }
}

fn vm_step(
    s: &mut VmState,
    m: &Measurement,
    p: &EstimatorParams,
    dt: f64,
    disc: Discretization,
    clamp: Option<f64>,
) -> SpaceVector {
    let integrand = m.u_s - m.i_s * p.r_se;
    match disc {
        Discretization::ForwardEuler => {
            s.psi_s += integrand * dt;
        }
        Discretization::Trapezoidal => {
            if let Some(prev) = s.prev_integrand {
                s.psi_s += (prev + integrand) * (0.5 * dt);
            }
            s.prev_integrand = Some(integrand);
        }
    }
    if let Some(limit) = clamp {
        s.psi_s = s.psi_s.clamp_symmetric(limit);
    }
    s.psi_s
}

fn cmf_step(
    s: &mut CmfState,
    m: &Measurement,
    p: &EstimatorParams,
    dt: f64,
    disc: Discretization,
) -> (SpaceVector, SpaceVector) {
    let l_sum = p.l_le + p.l_me;
    // d psi_r / dt = forcing + coeff (*) psi_r, with (*) the complex product.
    let forcing = m.i_s * (p.r_re * p.l_me / l_sum);
    let coeff = SpaceVector::new(-p.r_re / l_sum, p.z_p as f64 * m.omega);
    match disc {
        Discretization::ForwardEuler => {
            let d = forcing + coeff.complex_mul(s.psi_r);
            s.psi_r += d * dt;
        }
        Discretization::Trapezoidal => {
            if let Some((prev_forcing, prev_coeff)) = s.prev {
                let half = 0.5 * dt;
                let one = SpaceVector::new(1.0, 0.0);
                let rhs = (one + prev_coeff * half).complex_mul(s.psi_r)
                    + (prev_forcing + forcing) * half;
                s.psi_r = rhs.complex_div(one - coeff * half);
            }
            s.prev = Some((forcing, coeff));
        }
    }
    let psi_s = (m.i_s * p.l_le + s.psi_r) * (p.l_me / l_sum);
    (psi_s, s.psi_r)
}

fn sce_step(
    s: &mut SceState,
    m: &Measurement,
    p: &EstimatorParams,
    dt: f64,
    disc: Discretization,
) -> SpaceVector {
    let a = p.r_se / p.l_me;
    match disc {
        Discretization::ForwardEuler => {
            s.psi_s += (m.u_s - s.psi_s * a) * dt;
        }
        Discretization::Trapezoidal => {
            if let Some(prev_u) = s.prev_u {
                let half = 0.5 * dt;
                s.psi_s = (s.psi_s * (1.0 - half * a) + (prev_u + m.u_s) * half) / (1.0 + half * a);
            }
            s.prev_u = Some(m.u_s);
        }
    }
    s.psi_s
}
