//! Invocation record echoed into every output file.

/// What produced an output file: command, inputs, parameter overrides, and
/// tool version. Serialized as a single comment line so identical
/// invocations produce byte-identical files (no timestamps, no absolute-path
/// canonicalization).
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: &'static str,
    pub config_path: String,
    pub overrides: Vec<(String, String)>,
    pub out_dir: String,
}

impl RunManifest {
    pub fn new(command: &'static str, config_path: &str, out_dir: &str) -> Self {
        RunManifest {
            command,
            config_path: config_path.to_string(),
            overrides: Vec::new(),
            out_dir: out_dir.to_string(),
        }
    }

    pub fn with_override(mut self, key: &str, value: impl ToString) -> Self {
        self.overrides.push((key.to_string(), value.to_string()));
        self
    }

    pub fn comment_line(&self) -> String {
        let mut line = format!(
            "# locsym v{} | command={} config={} out={}",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.config_path,
            self.out_dir
        );
        for (k, v) in &self.overrides {
            line.push_str(&format!(" {k}={v}"));
        }
        line
    }
}
