//! Output files. Every file opens with a header that records the artifact
//! version, the command, the config hash and the seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const ARTIFACT: &str = "gsqg";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Header {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

impl Header {
    /// The hash covers the canonical JSON of the parsed config, so defaults and
    /// an explicit file with the same content hash alike.
    pub fn new<C: Serialize>(command: &'static str, config: &C, seed: u64) -> Result<Self, CliError> {
        let canonical = serde_json::to_vec(config).map_err(|e| CliError::Config(e.to_string()))?;
        let digest = Sha256::digest(&canonical);
        Ok(Self {
            artifact: ARTIFACT,
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
        })
    }

    fn csv_lines(&self) -> String {
        format!(
            "# artifact: {}\n# version: {}\n# command: {}\n# config_sha256: {}\n# seed: {}\n",
            self.artifact, self.version, self.command, self.config_sha256, self.seed
        )
    }
}

/// Output directory plus the header shared by every file of one run.
pub struct Sink {
    dir: PathBuf,
    header: Header,
    quiet: bool,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    header: &'a Header,
    #[serde(flatten)]
    body: &'a T,
}

impl Sink {
    pub fn new(dir: &Path, header: Header, quiet: bool) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            header,
            quiet,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Human-readable progress on stdout unless `--quiet`.
    pub fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|source| CliError::Write { path: path.clone(), source })?;
        Ok(path)
    }

    /// `{"header": …, <fields of body>}`, pretty-printed with a final newline.
    pub fn json<T: Serialize>(&self, name: &str, body: &T) -> Result<PathBuf, CliError> {
        let document = Document {
            header: &self.header,
            body,
        };
        let mut text = serde_json::to_string_pretty(&document).map_err(|e| CliError::Numerics(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Header comment lines, then a header row and one record per row.
    pub fn csv<R: Serialize>(&self, name: &str, rows: &[R]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let csv_error = |source| CliError::Csv { path: path.clone(), source };
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(self.header.csv_lines().into_bytes());
        for row in rows {
            writer.serialize(row).map_err(csv_error)?;
        }
        let bytes = writer.into_inner().map_err(|e| CliError::Csv {
            path: path.clone(),
            source: e.into_error().into(),
        })?;
        self.write(name, &bytes)
    }
}
