//! Run configuration: a JSON file, then command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hflow_core::harmonic::{BoundaryData, KernelRule};
use hflow_core::higher_dim::DichotomyOptions;
use hflow_core::navier_stokes::TimeProfile;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Inline boundary data; `boundary_file` wins when both are given.
    pub boundary: BoundaryConfig,
    pub boundary_file: Option<PathBuf>,
    pub grid: GridConfig,
    pub quadrature: QuadratureConfig,
    pub profiles: Vec<ProfileSpec>,
    pub t_max: f64,
    pub steps: usize,
    /// Command-specific default when absent.
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub probes: ProbeConfig,
    /// Doubles the Bernoulli pressure in `verify euler`.
    pub negative_control: bool,
    pub sphere: SphereConfig,
    pub dichotomy: DichotomyConfig,
    #[serde(skip_serializing)]
    pub out: PathBuf,
    #[serde(skip_serializing)]
    pub plot: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            boundary: BoundaryConfig::default(),
            boundary_file: None,
            grid: GridConfig::default(),
            quadrature: QuadratureConfig::default(),
            profiles: vec![ProfileSpec::exp(2.0, 1.0), ProfileSpec::exp(3.0, 1.0)],
            t_max: 2.0,
            steps: 20,
            tolerance: None,
            seed: 0,
            probes: ProbeConfig::default(),
            negative_control: false,
            sphere: SphereConfig::default(),
            dichotomy: DichotomyConfig::default(),
            out: PathBuf::from("hflow-out"),
            plot: false,
        }
    }
}

/// Truncated Fourier data `a₀/2 + Σ a_k cos kθ + b_k sin kθ`; `φ = cos θ` by
/// default.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryConfig {
    pub a0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig { a0: 0.0, a: vec![1.0], b: vec![] }
    }
}

/// Polar grid for pointwise residuals.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub radial: usize,
    pub angular: usize,
    pub r_cut: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { radial: 30, angular: 60, r_cut: 0.95 }
    }
}

/// Disk rule orders; chosen from the data degree when absent.
#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub m_r: Option<usize>,
    pub m_theta: Option<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub times: usize,
    pub points: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { times: 20, points: 200 }
    }
}

/// `φ(ξ) = constant + linear·ξ` on the unit sphere; `ξ₃` by default.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SphereConfig {
    pub constant: f64,
    pub linear: [f64; 3],
}

impl Default for SphereConfig {
    fn default() -> Self {
        SphereConfig { constant: 0.0, linear: [0.0, 0.0, 1.0] }
    }
}

impl SphereConfig {
    pub fn eval(&self, xi: &[f64; 3]) -> f64 {
        self.constant + self.linear[0] * xi[0] + self.linear[1] * xi[1] + self.linear[2] * xi[2]
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DichotomyConfig {
    pub r_max: f64,
    pub shells: usize,
    pub radial_order: usize,
    pub angular_order_3d: usize,
    pub fit_window: [f64; 2],
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        let d = DichotomyOptions::default();
        DichotomyConfig {
            r_max: d.r_max,
            shells: d.shells,
            radial_order: d.radial_order,
            angular_order_3d: d.angular_order_3d,
            fit_window: [d.fit_window.0, d.fit_window.1],
        }
    }
}

/// `exp:RATE[:F0]` on the command line; in JSON either that string or
/// `{"times": [...], "values": [...]}`.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum ProfileSpec {
    #[serde(with = "spec_string")]
    Exponential {
        rate: f64,
        f0: f64,
    },
    Sampled {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl ProfileSpec {
    pub fn exp(rate: f64, f0: f64) -> Self {
        ProfileSpec::Exponential { rate, f0 }
    }

    pub fn build(&self) -> Result<TimeProfile, CliError> {
        let p = match self {
            ProfileSpec::Exponential { rate, f0 } => TimeProfile::exponential(*f0, *rate),
            ProfileSpec::Sampled { times, values } => TimeProfile::sampled(times.clone(), values.clone()),
        };
        p.map_err(|e| CliError::Config(format!("profile {self}: {e}")))
    }
}

impl std::fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProfileSpec::Exponential { rate, f0 } => write!(f, "exp:{rate}:{f0}"),
            ProfileSpec::Sampled { times, .. } => write!(f, "sampled[{} points]", times.len()),
        }
    }
}

impl FromStr for ProfileSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        if parts.next() != Some("exp") {
            return Err(format!("unknown profile '{s}' (expected exp:RATE[:F0])"));
        }
        let num = |p: Option<&str>, what: &str| -> Result<Option<f64>, String> {
            match p {
                None => Ok(None),
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(Some)
                    .ok_or_else(|| format!("bad {what} '{v}' in profile '{s}'")),
            }
        };
        let rate = num(parts.next(), "rate")?.ok_or_else(|| format!("profile '{s}' is missing a rate"))?;
        let f0 = num(parts.next(), "f0")?.unwrap_or(1.0);
        if parts.next().is_some() {
            return Err(format!("trailing fields in profile '{s}'"));
        }
        Ok(ProfileSpec::exp(rate, f0))
    }
}

mod spec_string {
    use super::ProfileSpec;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rate: &f64, f0: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&ProfileSpec::exp(*rate, *f0).to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let s = String::deserialize(d)?;
        match s.parse::<ProfileSpec>().map_err(serde::de::Error::custom)? {
            ProfileSpec::Exponential { rate, f0 } => Ok((rate, f0)),
            ProfileSpec::Sampled { .. } => unreachable!("string specs are exponential"),
        }
    }
}

/// Flags that override file values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub plot: bool,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub profiles: Vec<ProfileSpec>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            None => RunConfig::default(),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("malformed config {}: {e}", p.display())))?
            }
        };
        if let Some(v) = &overrides.out {
            cfg.out = v.clone();
        }
        cfg.plot |= overrides.plot;
        if overrides.tol.is_some() {
            cfg.tolerance = overrides.tol;
        }
        if let Some(v) = overrides.seed {
            cfg.seed = v;
        }
        if !overrides.profiles.is_empty() {
            cfg.profiles = overrides.profiles.clone();
        }
        if let Some(v) = overrides.t_max {
            cfg.t_max = v;
        }
        if let Some(v) = overrides.steps {
            cfg.steps = v;
        }
        if let Some(file) = cfg.boundary_file.clone() {
            let text = fs::read_to_string(&file)
                .map_err(|e| CliError::Config(format!("cannot read boundary file {}: {e}", file.display())))?;
            cfg.boundary = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("malformed boundary file {}: {e}", file.display())))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return bad("tolerance must be positive");
            }
        }
        let g = &self.grid;
        if !(g.r_cut > 0.0 && g.r_cut < 1.0) {
            return bad("grid.r_cut must lie in (0, 1)");
        }
        if g.radial == 0 || g.angular == 0 {
            return bad("grid sizes must be positive");
        }
        if self.quadrature.m_r == Some(0) || self.quadrature.m_theta == Some(0) {
            return bad("quadrature orders must be positive");
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad("t_max must be positive");
        }
        if self.steps == 0 {
            return bad("steps must be positive");
        }
        if self.probes.times == 0 || self.probes.points == 0 {
            return bad("probe counts must be positive");
        }
        if self.profiles.is_empty() {
            return bad("at least one profile is required");
        }
        for p in &self.profiles {
            p.build()?;
        }
        let d = &self.dichotomy;
        if !(d.fit_window[0] < d.fit_window[1]) {
            return bad("dichotomy.fit_window must be increasing");
        }
        self.boundary_data()?;
        Ok(())
    }

    pub fn boundary_data(&self) -> Result<BoundaryData, CliError> {
        // the shorter coefficient list is padded with zero modes
        let c = &self.boundary;
        let n = c.a.len().max(c.b.len());
        let pad = |v: &[f64]| v.iter().copied().chain(std::iter::repeat(0.0)).take(n).collect();
        BoundaryData::new(c.a0, pad(&c.a), pad(&c.b)).map_err(|e| CliError::Config(format!("boundary data: {e}")))
    }

    pub fn dichotomy_options(&self) -> DichotomyOptions {
        let d = &self.dichotomy;
        let mut opts = DichotomyOptions {
            r_max: d.r_max,
            shells: d.shells,
            radial_order: d.radial_order,
            angular_order_3d: d.angular_order_3d,
            fit_window: (d.fit_window[0], d.fit_window[1]),
            kernel: KernelRule::default(),
            ..DichotomyOptions::default()
        };
        if let Some(t) = self.tolerance {
            opts.tail_tolerance = t;
        }
        opts
    }
}
