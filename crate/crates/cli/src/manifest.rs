use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::settings::Settings;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub sha256: String,
}

/// Written next to every output so a run can be audited and repeated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub version: String,
    pub seed: u64,
    pub config: Settings,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let mut f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn records(paths: &[PathBuf]) -> anyhow::Result<Vec<FileRecord>> {
    paths.iter().map(|p| Ok(FileRecord { path: p.clone(), sha256: sha256_file(p)? })).collect()
}

impl RunManifest {
    pub fn new(subcommand: &str, settings: &Settings, inputs: &[PathBuf], outputs: &[PathBuf]) -> anyhow::Result<Self> {
        Ok(RunManifest {
            subcommand: subcommand.to_string(),
            argv: std::env::args().collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: settings.seed,
            config: settings.clone(),
            inputs: records(inputs)?,
            outputs: records(outputs)?,
        })
    }

    /// Writes `<primary>.manifest.json`.
    pub fn write_beside(&self, primary: &Path) -> anyhow::Result<PathBuf> {
        let mut name = primary.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        let path = primary.with_file_name(name);
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
