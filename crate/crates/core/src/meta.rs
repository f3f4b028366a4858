//! Provenance block embedded in every output file.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputMeta {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl OutputMeta {
    pub fn new(seed: u64, config_hash: impl Into<String>) -> Self {
        Self {
            tool: "counterscope".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_hash: config_hash.into(),
        }
    }

    /// Single comment line, e.g. `# counterscope 0.1.0 seed=42 config=ab12`.
    pub fn comment_block(&self, marker: &str) -> String {
        format!(
            "{marker} {} {} seed={} config={}\n",
            self.tool, self.version, self.seed, self.config_hash
        )
    }
}
