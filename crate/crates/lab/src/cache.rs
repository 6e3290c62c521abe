//! Content-addressed store for FEM artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use dnlab_core::textio::{fmt_complex, fmt_f64, parse_complex, parse_f64, parse_key_values};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::config::Family;
use crate::pipeline::FemArtifacts;
use crate::LabError;

/// The inputs that determine one FEM solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CacheFragment {
    pub family: Family,
    pub tau_lat: Complex64,
    pub eps: f64,
    pub h_target: f64,
    pub n: usize,
}

impl CacheFragment {
    /// Sorted `key=value` lines with shortest round-trip floats.
    pub fn canonical_text(&self) -> String {
        format!(
            "N={}\neps={}\nfamily={}\nh_target={}\ntau_lat={}\n",
            self.n,
            fmt_f64(self.eps),
            self.family,
            fmt_f64(self.h_target),
            fmt_complex(self.tau_lat)
        )
    }

    /// Reads a fragment from `key=value` lines in any order.
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let map = parse_key_values(text)?;
        let get = |k: &str| -> Result<&str, LabError> {
            match map.get(k).map(Vec::as_slice) {
                Some([v]) => Ok(v.as_str()),
                _ => Err(LabError::Config(format!("fragment needs exactly one {k}"))),
            }
        };
        Ok(Self {
            family: get("family")?.parse()?,
            tau_lat: parse_complex(get("tau_lat")?)?,
            eps: parse_f64(get("eps")?)?,
            h_target: parse_f64(get("h_target")?)?,
            n: get("N")?
                .parse()
                .map_err(|_| LabError::Config("bad N".into()))?,
        })
    }
}

/// Hex SHA-256 of the canonical text.
pub fn cache_key(fragment: &CacheFragment) -> String {
    Sha256::digest(fragment.canonical_text().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.fem"))
    }

    /// `None` when absent; a corrupt entry is an error.
    pub fn load(&self, fragment: &CacheFragment) -> Result<Option<FemArtifacts>, LabError> {
        let key = cache_key(fragment);
        let text = match fs::read_to_string(self.path(&key)) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let (header, body) = text
            .split_once("---\n")
            .ok_or_else(|| LabError::Cache(key.clone(), "missing header".into()))?;
        if header != fragment.canonical_text() {
            return Err(LabError::Cache(key, "header does not match inputs".into()));
        }
        FemArtifacts::from_text(body)
            .map(Some)
            .map_err(|e| LabError::Cache(key, e.to_string()))
    }

    /// Writes through a temporary file so readers never see partial entries.
    pub fn store(&self, fragment: &CacheFragment, fem: &FemArtifacts) -> Result<(), LabError> {
        fs::create_dir_all(&self.dir)?;
        let key = cache_key(fragment);
        let tmp = self.dir.join(format!("{key}.tmp{}", std::process::id()));
        fs::write(&tmp, format!("{}---\n{}", fragment.canonical_text(), fem.to_text()))?;
        fs::rename(tmp, self.path(&key))?;
        Ok(())
    }
}
