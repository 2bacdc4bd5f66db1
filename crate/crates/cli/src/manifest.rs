//! Run manifests: the parameters and content digests that make every
//! artifact reproducible from the manifest alone.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cocomment_core::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub stage: String,
    pub parameters: BTreeMap<String, String>,
    /// Input path -> sha256 of its content.
    pub inputs: BTreeMap<String, String>,
    /// Output path (relative to the output directory) -> sha256.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_bytes(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    format!("{:x}", hasher.finalize())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_bytes(&std::fs::read(path)?))
}

impl Manifest {
    pub fn new(stage: &str, parameters: BTreeMap<String, String>) -> Manifest {
        Manifest {
            stage: stage.to_string(),
            parameters,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        self.inputs
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    pub fn record_output(&mut self, relative: &Path, content: &[u8]) {
        self.outputs
            .insert(relative.display().to_string(), sha256_bytes(content));
    }

    /// Write `manifest_<stage>.json` under `outdir` and return its path.
    pub fn write(&self, outdir: &Path) -> Result<PathBuf> {
        let path = outdir.join(format!("manifest_{}.json", self.stage));
        let mut data = serde_json::to_string_pretty(self).expect("manifest serializes");
        data.push('\n');
        std::fs::write(&path, data)?;
        Ok(path)
    }
}
