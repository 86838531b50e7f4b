use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::steps::Step;
use crate::dataset::io::{read_json, write_json};
use crate::error::{Error, Result};

pub const MANIFEST_FORMAT: &str = "rfimpute.manifest.v1";

/// Hex SHA-256 of a file's bytes.
pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

fn digests(paths: &[PathBuf]) -> Result<Vec<FileDigest>> {
    paths
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.clone(),
                sha256: digest_file(p)?,
            })
        })
        .collect()
}

fn config_hash(step: &Step) -> Result<String> {
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(step)?)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStep {
    pub index: usize,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub step: Step,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

/// Ordered record of executed steps with the digests of everything they read
/// and wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub format: String,
    pub steps: Vec<ManifestStep>,
}

impl Default for ExperimentManifest {
    fn default() -> Self {
        Self {
            format: MANIFEST_FORMAT.to_string(),
            steps: Vec::new(),
        }
    }
}

impl ExperimentManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let m: Self = read_json(path)?;
        if m.format != MANIFEST_FORMAT {
            return Err(Error::invalid(format!("unsupported manifest format `{}`", m.format)));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Run a step and record it.
    pub fn run(&mut self, step: Step) -> Result<()> {
        step.execute()?;
        self.record(step)
    }

    /// Record a step that has already been executed.
    pub fn record(&mut self, step: Step) -> Result<()> {
        self.steps.push(ManifestStep {
            index: self.steps.len(),
            config_hash: config_hash(&step)?,
            seed: step.seed(),
            inputs: digests(&step.input_files())?,
            outputs: digests(&step.output_files())?,
            step,
        });
        Ok(())
    }

    /// Append an executed step to the manifest at `path`, creating it if needed.
    pub fn append(path: &Path, step: Step) -> Result<()> {
        let mut m = if path.exists() { Self::load(path)? } else { Self::default() };
        m.record(step)?;
        m.save(path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub steps: usize,
    pub outputs_checked: usize,
}

/// Re-execute every step of a manifest into `work_dir` (one subdirectory per
/// step) and require byte-identical outputs. Files produced by earlier steps
/// are read from their replayed copies; other inputs are read in place and
/// must still match their recorded digests.
pub fn replay(manifest: &ExperimentManifest, work_dir: &Path) -> Result<ReplayReport> {
    let mut produced: HashMap<PathBuf, PathBuf> = HashMap::new();
    let mut checked = 0;
    for ms in &manifest.steps {
        let hash = config_hash(&ms.step)?;
        if hash != ms.config_hash {
            return Err(Error::Reproducibility(format!(
                "step {} ({}): configuration hash {hash} differs from the recorded {}",
                ms.index,
                ms.step.name(),
                ms.config_hash
            )));
        }
        let dir = work_dir.join(format!("step_{:03}", ms.index));
        let mut step = ms.step.clone();
        step.remap(
            &|p| produced.get(p).cloned().unwrap_or_else(|| p.to_path_buf()),
            &|p| dir.join(p.file_name().unwrap_or(p.as_os_str())),
        );
        for (recorded, actual) in ms.inputs.iter().zip(step.input_files()) {
            let found = digest_file(&actual)?;
            if found != recorded.sha256 {
                return Err(Error::Reproducibility(format!(
                    "step {} ({}): input {} has digest {found}, recorded {}",
                    ms.index,
                    ms.step.name(),
                    actual.display(),
                    recorded.sha256
                )));
            }
        }
        step.execute()?;
        for (recorded, actual) in ms.outputs.iter().zip(step.output_files()) {
            let found = digest_file(&actual)?;
            if found != recorded.sha256 {
                return Err(Error::Reproducibility(format!(
                    "step {} ({}): output {} differs from the recorded {}",
                    ms.index,
                    ms.step.name(),
                    actual.display(),
                    recorded.path.display()
                )));
            }
            produced.insert(recorded.path.clone(), actual);
            checked += 1;
        }
    }
    Ok(ReplayReport {
        steps: manifest.steps.len(),
        outputs_checked: checked,
    })
}
