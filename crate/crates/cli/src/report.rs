use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use iwalab::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub inputs_digest: String,
    pub results: Value,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_range: Option<(u64, u64)>,
    #[serde(skip)]
    pub exit_code: i32,
}

impl RunReport {
    pub fn new(command: &str, digest: String) -> Self {
        RunReport {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs_digest: digest,
            results: Value::Null,
            warnings: Vec::new(),
            errors: Vec::new(),
            seed_range: None,
            exit_code: EXIT_OK,
        }
    }

    /// Records `e`, keeping the most severe exit code.
    pub fn fail(&mut self, e: &Error) {
        self.errors.push(e.to_string());
        self.raise(exit_code_of(e));
    }

    pub fn raise(&mut self, code: i32) {
        let rank = |c: i32| match c {
            EXIT_VIOLATION => 4,
            EXIT_SCHEMA => 3,
            EXIT_PRECISION => 2,
            EXIT_OTHER => 1,
            _ => 0,
        };
        if rank(code) > rank(self.exit_code) {
            self.exit_code = code;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub fn exit_code_of(e: &Error) -> i32 {
    match e {
        Error::Schema(_) => EXIT_SCHEMA,
        Error::PrecisionExhausted(_)
        | Error::TDepthExhausted { .. }
        | Error::Unstable(_)
        | Error::BudgetExceeded { .. }
        | Error::WorkLimit(_) => EXIT_PRECISION,
        _ => EXIT_OTHER,
    }
}

/// SHA-256 over length-prefixed parts.
pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for part in parts {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_separates_parts() {
        assert_ne!(digest(&[b"ab", b"c"]), digest(&[b"a", b"bc"]));
        assert_eq!(digest(&[b"x"]).len(), 64);
    }

    #[test]
    fn violation_dominates() {
        let mut r = RunReport::new("t", String::new());
        r.raise(EXIT_VIOLATION);
        r.fail(&Error::Schema("bad".into()));
        assert_eq!(r.exit_code, EXIT_VIOLATION);
        assert_eq!(r.errors.len(), 1);
    }
}
