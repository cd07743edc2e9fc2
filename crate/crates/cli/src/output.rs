//! Output directories and their run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::failure::{CmdResult, Failure};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to repeat a command: its resolved configuration,
/// seeds and the hashes of the files it read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub rng: String,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<String>,
}

pub fn sha256_file(path: &Path) -> CmdResult<String> {
    let bytes = fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn read_input(path: &Path) -> CmdResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub struct OutDir {
    dir: PathBuf,
    command: String,
    inputs: Vec<InputFile>,
    input_paths: Vec<PathBuf>,
    outputs: Vec<String>,
}

impl OutDir {
    /// Claims `dir` for output. It must be absent or empty unless `force`;
    /// it is created on the first write.
    pub fn prepare(dir: &Path, force: bool, command: &str) -> CmdResult<Self> {
        if dir.exists() {
            let occupied = fs::read_dir(dir)
                .map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?
                .next()
                .is_some();
            if occupied && !force {
                return Err(Failure::usage(format!(
                    "output directory {} is not empty (use --force to overwrite)",
                    dir.display()
                )));
            }
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            inputs: Vec::new(),
            input_paths: Vec::new(),
            outputs: Vec::new(),
        })
    }

    /// Records an input's hash; call before reading it.
    pub fn input(&mut self, path: &Path) -> CmdResult<()> {
        let sha256 = sha256_file(path)?;
        self.inputs.push(InputFile {
            path: path.display().to_string(),
            sha256,
        });
        self.input_paths.push(fs::canonicalize(path)?);
        Ok(())
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Registers `name` as an output, refusing to clobber an input.
    pub fn claim(&mut self, name: &str) -> CmdResult<PathBuf> {
        let path = self.path(name);
        if let Ok(canon) = fs::canonicalize(&path) {
            if self.input_paths.contains(&canon) {
                return Err(Failure::usage(format!(
                    "refusing to overwrite input {}",
                    path.display()
                )));
            }
        }
        fs::create_dir_all(&self.dir)
            .map_err(|e| Failure::usage(format!("cannot create {}: {e}", self.dir.display())))?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> CmdResult<()> {
        let path = self.claim(name)?;
        fs::write(&path, contents)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CmdResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn finish(mut self, config: serde_json::Value, seeds: &[(&str, u64)]) -> CmdResult<()> {
        let manifest = RunManifest {
            tool: "prospect".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.clone(),
            config,
            seeds: seeds.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            rng: prospect_core::rng::GENERATOR.into(),
            inputs: std::mem::take(&mut self.inputs),
            outputs: std::mem::take(&mut self.outputs),
        };
        self.write_json(MANIFEST, &manifest)
    }
}
