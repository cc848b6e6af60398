use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Option<String>,
    pub seed: Option<u64>,
    /// Hash over the subcommand, effective config, seed and input file bytes.
    pub input_hash: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<OutputFile>,
    pub details: serde_json::Value,
    pub duration_ms: u64,
}

/// Length-prefixed SHA-256 over named fields.
#[derive(Default)]
pub struct InputHasher(Sha256);

impl InputHasher {
    pub fn field(&mut self, name: &str, bytes: &[u8]) -> &mut Self {
        for part in [name.as_bytes(), bytes] {
            self.0.update((part.len() as u64).to_le_bytes());
            self.0.update(part);
        }
        self
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

/// Output directory that records the hash of every file written into it.
pub struct OutDir {
    root: PathBuf,
    files: Vec<OutputFile>,
}

impl OutDir {
    pub fn create(root: &Path) -> io::Result<OutDir> {
        fs::create_dir_all(root)?;
        Ok(OutDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        write_atomic(&self.root.join(name), bytes)?;
        self.files.push(OutputFile {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn finish(self, mut manifest: RunManifest) -> io::Result<RunManifest> {
        manifest.outputs = self.files;
        let mut text = serde_json::to_vec_pretty(&manifest).map_err(io::Error::other)?;
        text.push(b'\n');
        write_atomic(&self.root.join(MANIFEST_FILE), &text)?;
        Ok(manifest)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_separates_fields() {
        let h = |a: &str, b: &str| {
            let mut x = InputHasher::default();
            x.field("a", a.as_bytes()).field("b", b.as_bytes());
            x.finish()
        };
        assert_eq!(h("xy", "z"), h("xy", "z"));
        assert_ne!(h("xy", "z"), h("x", "yz"));
        assert_eq!(h("", "").len(), 64);
    }

    #[test]
    fn manifest_lists_outputs_and_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::create(&dir.path().join("run")).unwrap();
        out.write("a.csv", b"x\n").unwrap();
        let m = out
            .finish(RunManifest {
                subcommand: "test".into(),
                config: None,
                seed: Some(1),
                input_hash: String::new(),
                inputs: vec![],
                outputs: vec![],
                details: serde_json::Value::Null,
                duration_ms: 0,
            })
            .unwrap();
        assert_eq!(m.outputs.len(), 1);
        assert_eq!(m.outputs[0].sha256, hex::encode(Sha256::digest(b"x\n")));
        let mut names: Vec<String> = fs::read_dir(dir.path().join("run"))
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert_eq!(names, ["a.csv", "manifest.json"]);
        let back: RunManifest =
            serde_json::from_slice(&fs::read(dir.path().join("run/manifest.json")).unwrap())
                .unwrap();
        assert_eq!(back, m);
    }
}
