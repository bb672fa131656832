use std::fmt::Write as _;
use std::path::Path;

use super::{EnergyTrace, ParticleEnsemble};
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

/// `t,deltaE,D,V[,lambda2]` with 17 significant digits.
pub fn trace_csv(trace: &EnergyTrace) -> String {
    let mut s = String::from("t,deltaE,D,V");
    if trace.fiedler.is_some() {
        s.push_str(",lambda2");
    }
    s.push('\n');
    for k in 0..trace.len() {
        let _ = write!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            trace.times[k], trace.delta_e[k], trace.diameter[k], trace.velocity_diameter[k]
        );
        if let Some(l) = &trace.fiedler {
            let _ = write!(s, ",{:.16e}", l[k]);
        }
        s.push('\n');
    }
    s
}

pub fn write_trace_csv(trace: &EnergyTrace, path: &Path) -> Result<()> {
    std::fs::write(path, trace_csv(trace))?;
    Ok(())
}

/// Parses columns `x_1..x_d, v_1..v_d`; a header line starting with a
/// letter is skipped, as are blank lines.
pub fn parse_ensemble_csv(text: &str, domain: DomainSpec) -> Result<ParticleEnsemble> {
    let d = domain.dim;
    let mut x = Vec::new();
    let mut v = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with(|c: char| c.is_ascii_alphabetic() || c == '#') {
            continue;
        }
        let fields = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Csv { line: lineno + 1, message: e.to_string() })?;
        if fields.len() != 2 * d {
            return Err(Error::Csv {
                line: lineno + 1,
                message: format!("expected {} columns, found {}", 2 * d, fields.len()),
            });
        }
        x.extend_from_slice(&fields[..d]);
        v.extend_from_slice(&fields[d..]);
    }
    ParticleEnsemble::new(x, v, domain)
}

pub fn load_ensemble_csv(path: &Path, domain: DomainSpec) -> Result<ParticleEnsemble> {
    parse_ensemble_csv(&std::fs::read_to_string(path)?, domain)
}
