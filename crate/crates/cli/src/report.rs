use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use monoconv::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub verdict: Value,
    pub certificates: Value,
    pub truncation: Value,
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    /// 1 for usage and input errors, 2 for failed preconditions.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(
                Error::Parse(_)
                | Error::InvalidInstance(_)
                | Error::DependentGenerators
                | Error::NotInLattice
                | Error::MalformedCombination(_)
                | Error::OutsideWindow
                | Error::MissingValue(_),
            ) => 1,
            CliError::Lib(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Everything a report depends on: file contents and option values, in call order.
pub struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    pub fn new(command: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        Self { hasher }
    }

    fn field(&mut self, kind: &str, name: &str, bytes: &[u8]) {
        for part in [kind.as_bytes(), name.as_bytes(), &(bytes.len() as u64).to_le_bytes(), bytes] {
            self.hasher.update(part);
        }
    }

    pub fn read(&mut self, name: &str, path: &Path) -> CliResult<String> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        self.field("file", name, text.as_bytes());
        Ok(text)
    }

    pub fn arg(&mut self, name: &str, value: impl std::fmt::Display) {
        self.field("arg", name, value.to_string().as_bytes());
    }

    /// A JSON option given inline or as a path to a file.
    pub fn json(&mut self, name: &str, raw: &str) -> CliResult<Value> {
        let path = Path::new(raw);
        let text = if path.is_file() { self.read(name, path)? } else {
            self.arg(name, raw);
            raw.to_string()
        };
        serde_json::from_str(&text).map_err(|e| CliError::Lib(Error::Parse(format!("--{name}: {e}"))))
    }

    pub fn digest(&self) -> String {
        self.hasher.clone().finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
