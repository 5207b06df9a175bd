use serde::Serialize;
use serde_json::{Map, Value};

/// Reproducibility header echoed into every output document. It carries no
/// timestamps, so identical invocations produce identical documents.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub inputs: Vec<String>,
    /// Every numeric knob, defaults included.
    pub knobs: Map<String, Value>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, inputs: &[&std::path::Path]) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            knobs: Map::new(),
        }
    }

    /// Merge the fields of a serializable argument group into the knobs.
    pub fn with(mut self, group: &impl Serialize) -> Self {
        if let Ok(Value::Object(fields)) = serde_json::to_value(group) {
            self.knobs.extend(fields);
        }
        self
    }

    pub fn knob(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.knobs.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }
}
