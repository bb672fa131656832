use std::fmt::Write as _;
use std::path::Path;

use super::{FieldState, HydroTrace};
use crate::error::Result;

/// `t,deltaE,rho_min,rho_max,eta_min,mass,momentum` (one momentum column per axis).
pub fn hydro_trace_csv(trace: &HydroTrace) -> String {
    let d = trace.momentum.first().map_or(1, Vec::len);
    let mut s = String::from("t,deltaE,rho_min,rho_max,eta_min,mass");
    if d == 1 {
        s.push_str(",momentum");
    } else {
        (1..=d).for_each(|k| {
            let _ = write!(s, ",momentum_{k}");
        });
    }
    s.push('\n');
    for k in 0..trace.times.len() {
        let _ = write!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            trace.times[k], trace.delta_e[k], trace.rho_min[k], trace.rho_max[k], trace.eta_min[k], trace.mass[k]
        );
        for p in &trace.momentum[k] {
            let _ = write!(s, ",{p:.16e}");
        }
        s.push('\n');
    }
    s
}

pub fn write_hydro_trace_csv(trace: &HydroTrace, path: &Path) -> Result<()> {
    std::fs::write(path, hydro_trace_csv(trace))?;
    Ok(())
}

/// Cell-centre coordinates, then `rho`, then velocity components.
pub fn field_snapshot_csv(state: &FieldState) -> String {
    let d = state.dim();
    let mut s = String::new();
    (1..=d).for_each(|k| {
        let _ = write!(s, "x_{k},");
    });
    s.push_str("rho");
    (1..=d).for_each(|k| {
        let _ = write!(s, ",u_{k}");
    });
    s.push('\n');
    let u = state.velocity();
    for a in 0..state.grid.len() {
        for x in state.grid.point(a) {
            let _ = write!(s, "{x:.16e},");
        }
        let _ = write!(s, "{:.16e}", state.rho[a]);
        for c in &u {
            let _ = write!(s, ",{:.16e}", c[a]);
        }
        s.push('\n');
    }
    s
}

pub fn write_field_snapshot_csv(state: &FieldState, path: &Path) -> Result<()> {
    std::fs::write(path, field_snapshot_csv(state))?;
    Ok(())
}
