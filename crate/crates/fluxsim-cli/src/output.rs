//! CSV writers. All numbers go through Rust's shortest round-trip float
//! formatting, so files are bit-stable across runs and parse back exactly.

use fluxsim::{ErrorMetrics, ScenarioResult, SweepPoint, Trace};
use std::io::{self, Write};

pub const TRACE_HEADER: &str = "t,usx,usy,isx,isy,irx,iry,omega,psi_sx,psi_sy,psi_rx,psi_ry";
pub const FULL_HEADER: &str = "t,usx,usy,isx,isy,irx,iry,omega,psi_sx,psi_sy,psi_rx,psi_ry,\
est_psi_sx,est_psi_sy,est_psi_rx,est_psi_ry,err_x,err_y,err_mag";
pub const METRICS_HEADER: &str = "rms,max_abs,final_offset,drift_slope,flux_peak,diverged";
pub const SWEEP_HEADER: &str = "value,rms,max_abs,final_offset,drift_slope,flux_peak,diverged";

/// Ground-truth trace: one row per record, inputs and true state only.
pub fn write_trace_csv(mut w: impl Write, trace: &Trace) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in &trace.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.u_s.x,
            r.u_s.y,
            r.i_s.x,
            r.i_s.y,
            r.i_r.x,
            r.i_r.y,
            r.omega,
            r.psi_s.x,
            r.psi_s.y,
            r.psi_r.x,
            r.psi_r.y
        )?;
    }
    Ok(())
}

/// Full scenario trace: ground truth plus the estimate and error columns.
/// Estimators that produce no rotor-flux estimate leave those fields empty.
pub fn write_full_csv(mut w: impl Write, result: &ScenarioResult) -> io::Result<()> {
    writeln!(w, "{FULL_HEADER}")?;
    for (r, e) in result.truth.records.iter().zip(&result.estimates) {
        let err = e.psi_s_hat - r.psi_s;
        let (rx, ry) = match e.psi_r_hat {
            Some(p) => (p.x.to_string(), p.y.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{rx},{ry},{},{},{}",
            r.t,
            r.u_s.x,
            r.u_s.y,
            r.i_s.x,
            r.i_s.y,
            r.i_r.x,
            r.i_r.y,
            r.omega,
            r.psi_s.x,
            r.psi_s.y,
            r.psi_r.x,
            r.psi_r.y,
            e.psi_s_hat.x,
            e.psi_s_hat.y,
            err.x,
            err.y,
            err.magnitude()
        )?;
    }
    Ok(())
}

fn metrics_fields(m: &ErrorMetrics) -> String {
    format!(
        "{},{},{},{},{},{}",
        m.rms, m.max_abs, m.final_offset, m.drift_slope, m.flux_peak, m.diverged
    )
}

/// One header line and one row.
pub fn write_metrics_csv(mut w: impl Write, metrics: &ErrorMetrics) -> io::Result<()> {
    writeln!(w, "{METRICS_HEADER}")?;
    writeln!(w, "{}", metrics_fields(metrics))?;
    Ok(())
}

/// One row per successful sweep cell, in axis order.
pub fn write_sweep_csv(mut w: impl Write, points: &[SweepPoint]) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for p in points {
        if let Ok(m) = &p.outcome {
            writeln!(w, "{},{}", p.value, metrics_fields(m))?;
        }
    }
    Ok(())
}
