//! Flat `key=value` experiment configuration.
//!
//! ```text
//! family=torus-hole        # torus-hole | disk-sanity | synthetic
//! tau_lat=0e0+1e0i
//! eps=0.3                  # repeated, strictly decreasing
//! eps=0.2
//! mu=0.5                   # synthetic family only, repeated
//! h_target=0.05
//! N=8
//! tol.normalization=0.05   # any tol.<name>=<value>
//! out=out
//! cache=on
//! workers=2
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use dnlab_core::surface::mesh::max_hole_radius;
use dnlab_core::textio::{fmt_complex, fmt_f64, parse_complex, parse_f64, parse_key_values};
use num_complex::Complex64;

use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    TorusHole,
    DiskSanity,
    Synthetic,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::TorusHole => "torus-hole",
            Family::DiskSanity => "disk-sanity",
            Family::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self, LabError> {
        match s.trim() {
            "torus-hole" => Ok(Family::TorusHole),
            "disk-sanity" => Ok(Family::DiskSanity),
            "synthetic" => Ok(Family::Synthetic),
            other => Err(LabError::Config(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub family: Family,
    pub tau_lat: Complex64,
    pub eps: Vec<f64>,
    /// synthetic family
    pub mu: Vec<f64>,
    pub h_target: f64,
    pub n: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub out_dir: PathBuf,
    pub cache: bool,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            family: Family::TorusHole,
            tau_lat: Complex64::new(0.0, 1.0),
            eps: vec![0.3, 0.2, 0.1, 0.05],
            mu: Vec::new(),
            h_target: 0.05,
            n: 8,
            tolerances: BTreeMap::new(),
            out_dir: PathBuf::from("out"),
            cache: true,
            workers: 1,
        }
    }
}

/// Defaults for the named tolerances.
pub const DEFAULT_TOLERANCES: [(&str, f64); 3] = [
    ("normalization", 0.05),
    ("band_lo", 0.01),
    ("band_hi", 0.999),
];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let map = parse_key_values(text)?;
        let mut cfg = Self::default();
        let one = |k: &str| -> Result<Option<&str>, LabError> {
            match map.get(k).map(Vec::as_slice) {
                None => Ok(None),
                Some([v]) => Ok(Some(v.as_str())),
                Some(_) => Err(LabError::Config(format!("key {k} given more than once"))),
            }
        };
        for key in map.keys() {
            let known = matches!(
                key.as_str(),
                "family" | "tau_lat" | "eps" | "mu" | "h_target" | "N" | "out" | "cache" | "workers"
            ) || key.starts_with("tol.");
            if !known {
                return Err(LabError::Config(format!("unknown key {key:?}")));
            }
        }
        if let Some(v) = one("family")? {
            cfg.family = v.parse()?;
        }
        if let Some(v) = one("tau_lat")? {
            cfg.tau_lat = parse_complex(v)?;
        }
        if let Some(v) = map.get("eps") {
            cfg.eps = v.iter().map(|s| parse_f64(s)).collect::<Result<_, _>>()?;
        }
        if let Some(v) = map.get("mu") {
            cfg.mu = v.iter().map(|s| parse_f64(s)).collect::<Result<_, _>>()?;
        }
        if let Some(v) = one("h_target")? {
            cfg.h_target = parse_f64(v)?;
        }
        if let Some(v) = one("N")? {
            cfg.n = v.parse().map_err(|_| LabError::Config(format!("bad N {v:?}")))?;
        }
        if let Some(v) = one("out")? {
            cfg.out_dir = PathBuf::from(v);
        }
        if let Some(v) = one("cache")? {
            cfg.cache = match v {
                "on" | "true" | "1" => true,
                "off" | "false" | "0" => false,
                _ => return Err(LabError::Config(format!("bad cache flag {v:?}"))),
            };
        }
        if let Some(v) = one("workers")? {
            cfg.workers = v.parse().map_err(|_| LabError::Config(format!("bad workers {v:?}")))?;
        }
        for (k, v) in &map {
            if let Some(name) = k.strip_prefix("tol.") {
                let [x] = v.as_slice() else {
                    return Err(LabError::Config(format!("key {k} given more than once")));
                };
                cfg.tolerances.insert(name.to_string(), parse_f64(x)?);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.n == 0 {
            return bad("N must be positive".into());
        }
        if self.workers == 0 {
            return bad("workers must be positive".into());
        }
        if !(self.h_target > 0.0) {
            return bad(format!("h_target must be positive, got {}", self.h_target));
        }
        match self.family {
            Family::TorusHole => {
                if self.eps.is_empty() {
                    return bad("torus-hole family needs at least one eps".into());
                }
                if !(self.tau_lat.im > 0.0) {
                    return bad(format!("tau_lat must have Im > 0, got {}", self.tau_lat));
                }
                if self.eps.windows(2).any(|w| !(w[1] < w[0])) {
                    return bad("eps list must be strictly decreasing".into());
                }
                let max = max_hole_radius(self.tau_lat);
                if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e < max)) {
                    return bad(format!("eps {e} outside the admissible range (0, {max:.4})"));
                }
            }
            Family::Synthetic => {
                if self.mu.is_empty() {
                    return bad("synthetic family needs at least one mu".into());
                }
                if let Some(m) = self.mu.iter().find(|&&m| !(m > 0.0 && m < 1.0)) {
                    return bad(format!("mu {m} outside (0, 1)"));
                }
            }
            Family::DiskSanity => {}
        }
        Ok(())
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            DEFAULT_TOLERANCES
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .expect("unknown tolerance name")
        })
    }

    pub fn band(&self) -> (f64, f64) {
        (self.tolerance("band_lo"), self.tolerance("band_hi"))
    }

    /// Canonical text form; [`ExperimentConfig::parse`] inverts it.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "family={}\ntau_lat={}\nh_target={}\nN={}\n",
            self.family,
            fmt_complex(self.tau_lat),
            fmt_f64(self.h_target),
            self.n
        );
        for e in &self.eps {
            out += &format!("eps={}\n", fmt_f64(*e));
        }
        for m in &self.mu {
            out += &format!("mu={}\n", fmt_f64(*m));
        }
        for (k, v) in &self.tolerances {
            out += &format!("tol.{k}={}\n", fmt_f64(*v));
        }
        out += &format!(
            "out={}\ncache={}\nworkers={}\n",
            self.out_dir.display(),
            if self.cache { "on" } else { "off" },
            self.workers
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::parse(
            "# sweep\nfamily=torus-hole\ntau_lat=0+1i\neps=0.3\neps=0.1\nh_target=0.04\nN=8\ntol.normalization=0.1\ncache=off\nworkers=3\n",
        )
        .unwrap();
        assert_eq!(cfg.eps, vec![0.3, 0.1]);
        assert_eq!(cfg.tolerance("normalization"), 0.1);
        assert_eq!(cfg.tolerance("band_hi"), 0.999);
        assert!(!cfg.cache);
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "eps=0.1\neps=0.2\n",
            "eps=0.9\n",
            "family=blob\n",
            "N=0\n",
            "colour=red\n",
            "family=synthetic\n",
            "family=synthetic\nmu=1.5\n",
            "h_target=1\nh_target=2\n",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }
}
