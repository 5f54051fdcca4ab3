use maslov_core::Orientation;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub orientation: &'static str,
    pub holonomy_sign: &'static str,
    pub symplectic_form: &'static str,
}

impl Conventions {
    pub fn new(orientation: Orientation) -> Self {
        Self {
            orientation: match orientation {
                Orientation::RightHanded => "right_handed",
                Orientation::Reversed => "reversed",
            },
            holonomy_sign: "standard",
            symplectic_form: "omega(u,v) = u^T J0 v, J0 = [[0,-I],[I,0]]",
        }
    }
}

/// Every numeric output sits next to its residual or tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub conventions: Conventions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Value,
    pub outputs: Value,
    pub diagnostics: Value,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
