//! Run reports: the canonical record of one CLI invocation.
//!
//! Every command assembles a [`RunReport`] holding the echoed command line,
//! the parsed inputs, the computed outputs, any optimality certificates, and
//! a list of pass/fail flags.  The process exits 0 exactly when every flag
//! passes, so scripts can gate on the exit code while humans read the table.

use serde_json::json;

/// A named verdict contributing to the exit code.
pub struct Flag {
    pub name: String,
    pub pass: bool,
}

/// Everything one command computed, serializable losslessly to JSON.
pub struct RunReport {
    pub command: String,
    pub inputs: serde_json::Value,
    pub outputs: serde_json::Value,
    pub certificates: Vec<serde_json::Value>,
    pub flags: Vec<Flag>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(command: String) -> Self {
        RunReport {
            command,
            inputs: json!({}),
            outputs: json!({}),
            certificates: Vec::new(),
            flags: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    /// Exit code 0 requires every flag to pass.
    pub fn passed(&self) -> bool {
        self.flags.iter().all(|f| f.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let flags: Vec<serde_json::Value> = self
            .flags
            .iter()
            .map(|f| json!({ "name": f.name, "pass": f.pass }))
            .collect();
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "certificates": self.certificates,
            "flags": flags,
            "passed": self.passed(),
            "wall_time_s": self.wall_time_s,
        })
    }
}

/// JSON encoding for possibly non-finite values; infinities and NaN become
/// strings so the document stays valid JSON.
pub fn num(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Fixed-point rendering at the requested number of decimals.
pub fn fmt(v: f64, precision: usize) -> String {
    if v.is_finite() {
        format!("{v:.precision$}")
    } else {
        format!("{v}")
    }
}

pub fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}
