//! Run configuration: a TOML file with one table per subcommand, overridable flag by flag.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shearmix_core::fourier::Grid;
use shearmix_core::profiles::{FourierTerm, ShearProfile};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub profile: ProfileConfig,
    pub grid: GridConfig,
    pub evolve: EvolveConfig,
    pub spectrum: SpectrumConfig,
    pub asymptotics: AsymptoticsConfig,
    pub kernel: KernelConfig,
    pub verify: VerifyConfig,
    pub output: OutputConfig,
}

/// Either a built-in profile by name or a custom Fourier series `Σ a cos(ηy) + b sin(ηy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub name: Option<String>,
    /// Rows `[η, cos, sin]` of a custom periodic profile.
    pub terms: Vec<[f64; 3]>,
    pub sigma_sharp: f64,
    pub max_order: usize,
    /// Half-width of the truncated Couette domain.
    pub half_width: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { name: None, terms: Vec::new(), sigma_sharp: 0.2, max_order: 1, half_width: 20.0 }
    }
}

impl ProfileConfig {
    pub fn build(&self) -> Result<ShearProfile> {
        let name = self.name.as_deref().map(str::trim).filter(|s| !s.is_empty());
        if !self.terms.is_empty() {
            let mut terms = Vec::with_capacity(self.terms.len());
            for &[eta, c, s] in &self.terms {
                if !(eta >= 1.0) || eta.fract() != 0.0 {
                    return Err(LabError::Usage(format!("Fourier term wavenumber {eta} is not a positive integer")));
                }
                terms.push(FourierTerm::new(eta as u32, c, s));
            }
            return Ok(ShearProfile::fourier(name.unwrap_or("custom"), terms, self.sigma_sharp, self.max_order));
        }
        match name {
            None => Err(LabError::Usage("a profile name (--profile) or custom terms are required".into())),
            Some("couette" | "couette-truncated") => Ok(ShearProfile::couette_truncated(self.half_width)),
            Some(n) => ShearProfile::by_name(n).map_err(|e| LabError::Usage(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 256 }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.n).map_err(|e| LabError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Strang,
    Eigenprop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InitialData {
    /// `e^{iy}`.
    Plane,
    /// A fixed smooth field with every low mode present.
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub kappa: f64,
    pub k: f64,
    /// Final time; when absent, six enhanced-dissipation times.
    pub t_end: Option<f64>,
    pub dt: f64,
    /// Target number of diagnostic samples after `t = 0`.
    pub samples: usize,
    pub scheme: SchemeName,
    pub initial: InitialData,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            kappa: 1e-4,
            k: 1.0,
            t_end: None,
            dt: 0.01,
            samples: 1000,
            scheme: SchemeName::Strang,
            initial: InitialData::Plane,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub eps: f64,
    pub q: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { eps: 0.01, q: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoticsConfig {
    /// Critical point location, e.g. `"pi/2"`; the nearest non-degenerate point is used.
    pub gamma: String,
    pub alpha: Vec<usize>,
    pub order: usize,
    /// Values of ε at which the truncated prediction is evaluated.
    pub eps: Vec<f64>,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        Self { gamma: "pi/2".into(), alpha: vec![0], order: 2, eps: vec![1e-2, 1e-3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub eps: Vec<f64>,
    pub z: Vec<String>,
    pub lambda: Vec<f64>,
    pub alpha: f64,
    pub sigma0: f64,
    /// Write one `(y, |K|, envelope)` CSV per slice.
    pub dump: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            eps: vec![1e-2, 1e-3],
            z: vec!["pi/2".into(), "pi".into()],
            lambda: vec![1.0, 0.3, 1.5],
            alpha: 0.0,
            sigma0: 0.1,
            dump: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Every criterion at its stated resolution.
    #[default]
    Quick,
    /// Evolution criteria additionally repeated at twice the grid and half the time step.
    Full,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: Suite,
    /// Restrict to these criterion ids (`"AC-4"`, …); empty means the whole suite.
    pub only: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text).map_err(|source| LabError::Config { path: path.to_path_buf(), source })
    }

    pub fn parse(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// First 16 hex digits of the SHA-256 of the config with the output section blanked,
    /// so the same experiment hashes identically wherever it is written.
    pub fn hash(&self) -> String {
        let mut keyed = self.clone();
        keyed.output = OutputConfig { dir: PathBuf::new() };
        let bytes = serde_json::to_vec(&keyed).expect("config is always serializable");
        let digest = Sha256::digest(&bytes);
        hex::encode(&digest[..8])
    }
}

/// Parses a real number or a multiple of π: `1.5`, `pi`, `-pi/2`, `3pi/2`, `3*pi/4`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let bad = || LabError::Usage(format!("cannot parse '{text}' as a number or multiple of pi"));
    let s = s.replace('π', "pi");
    let Some(pos) = s.find("pi") else {
        return s.parse::<f64>().map_err(|_| bad());
    };
    let head = s[..pos].trim_end_matches('*');
    let factor = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let tail = &s[pos + 2..];
    let divisor = match tail {
        "" => 1.0,
        t => t.strip_prefix('/').and_then(|d| d.parse::<f64>().ok()).filter(|d| *d != 0.0).ok_or_else(bad)?,
    };
    Ok(factor * PI / divisor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_angle(" 3pi/2").unwrap(), 1.5 * PI);
        assert_eq!(parse_angle("3*pi/4").unwrap(), 0.75 * PI);
        assert_eq!(parse_angle("-pi").unwrap(), -PI);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("tau").is_err());
    }

    #[test]
    fn round_trip_and_hash_ignores_output() {
        let mut c = RunConfig { seed: 3, ..Default::default() };
        c.profile.name = Some("sin".into());
        let back = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        let mut moved = c.clone();
        moved.output.dir = PathBuf::from("/elsewhere");
        assert_eq!(moved.hash(), c.hash());
        moved.seed = 4;
        assert_ne!(moved.hash(), c.hash());
    }

    #[test]
    fn sections_parse() {
        let c = RunConfig::parse(
            "seed = 9\n[profile]\nname = \"degenerate2\"\n[evolve]\nkappa = 1e-5\nscheme = \"eigenprop\"\n",
        )
        .unwrap();
        assert_eq!(c.evolve.kappa, 1e-5);
        assert_eq!(c.evolve.scheme, SchemeName::Eigenprop);
        assert_eq!(c.profile.build().unwrap().max_order(), 2);
        assert!(RunConfig::parse("[evolve]\nkapa = 1\n").is_err());
    }

    #[test]
    fn missing_profile_is_usage_error() {
        let err = ProfileConfig::default().build().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn custom_terms() {
        let p = ProfileConfig { terms: vec![[1.0, 0.0, 1.0]], ..Default::default() };
        let prof = p.build().unwrap();
        assert!((prof.value(0.3) - 0.3f64.sin()).abs() < 1e-15);
    }
}
