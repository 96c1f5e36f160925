//! Serialization helpers shared by the CLI and the simulator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::planner::SweepRow;

/// Formats a number for CSV output. Integers print plainly; everything else
/// uses the shortest scientific form that round-trips exactly.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{:e}", x)
    }
}

/// CSV with columns `axis,value,s_star,t_real,t_int,bound,status`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("axis,value,s_star,t_real,t_int,bound,status\n");
    for r in rows {
        let status = r.status.replace([',', '\n'], ";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.axis.name(),
            num(r.value),
            num(r.s_star),
            num(r.t_real),
            r.t_int,
            num(r.bound),
            status
        ));
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))
}

/// Version string recorded in run manifests: crate version plus the
/// `git describe` of the source tree when it was available at build time.
pub fn version_string() -> String {
    format!(
        "{} {} ({})",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        option_env!("LANGEVIN_BOUNDS_GIT_DESCRIBE").unwrap_or("unknown")
    )
}
