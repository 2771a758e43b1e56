//! Run configuration and the `key = value` config file format.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimator::korn::{DEFAULT_DEGREE, DEFAULT_SAFETY};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Benchmark {
    Cook,
    ManufacturedSmooth,
    ManufacturedDivfree,
    PatchTest,
}

impl Benchmark {
    pub const ALL: [Benchmark; 4] = [
        Benchmark::Cook,
        Benchmark::ManufacturedSmooth,
        Benchmark::ManufacturedDivfree,
        Benchmark::PatchTest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Cook => "cook",
            Benchmark::ManufacturedSmooth => "manufactured-smooth",
            Benchmark::ManufacturedDivfree => "manufactured-divfree",
            Benchmark::PatchTest => "patch-test",
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown benchmark `{s}`")))
    }
}

/// Compressibility, given through any one of the usual parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Material {
    Nu(f64),
    Lambda(f64),
    LambdaInv(f64),
}

impl Material {
    /// `1/λ` with `2μν = λ(1 − 2ν)`; `ν = 1/2` and `λ = ∞` give 0.
    pub fn lambda_inv(self, mu: f64) -> Result<f64> {
        match self {
            Material::Nu(nu) => {
                if !(nu > 0.0 && nu <= 0.5) {
                    return Err(Error::InvalidParameter(format!("Poisson ratio {nu} not in (0, 0.5]")));
                }
                Ok((1.0 - 2.0 * nu) / (2.0 * mu * nu))
            }
            Material::Lambda(l) => {
                if l.is_infinite() && l > 0.0 {
                    Ok(0.0)
                } else if l > 0.0 {
                    Ok(1.0 / l)
                } else {
                    Err(Error::InvalidParameter(format!("lambda {l} must be positive")))
                }
            }
            Material::LambdaInv(li) => {
                if li.is_finite() && li >= 0.0 {
                    Ok(li)
                } else {
                    Err(Error::InvalidParameter(format!("lambda_inv {li} must be finite and >= 0")))
                }
            }
        }
    }
}

/// Where the initial mesh comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    /// The benchmark's default mesh.
    Default,
    File(PathBuf),
    UnitSquare(usize),
    Cook,
    CookStructured(usize, usize),
}

impl FromStr for MeshSource {
    type Err = Error;

    /// `default`, `cook`, `unit-square:N`, `cook-structured:NXxNY`, or a path.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("invalid mesh spec `{s}`"));
        if s == "default" {
            Ok(MeshSource::Default)
        } else if s == "cook" {
            Ok(MeshSource::Cook)
        } else if let Some(n) = s.strip_prefix("unit-square:") {
            Ok(MeshSource::UnitSquare(n.parse().map_err(|_| bad())?))
        } else if let Some(d) = s.strip_prefix("cook-structured:") {
            let (a, b) = d.split_once('x').ok_or_else(bad)?;
            Ok(MeshSource::CookStructured(
                a.parse().map_err(|_| bad())?,
                b.parse().map_err(|_| bad())?,
            ))
        } else {
            Ok(MeshSource::File(PathBuf::from(s)))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub benchmark: Benchmark,
    pub mesh: MeshSource,
    pub mu: f64,
    pub material: Material,
    pub theta: f64,
    pub steps: usize,
    pub korn_degree: usize,
    pub korn_safety: f64,
    /// Overrides the computed element Korn constants.
    pub korn_constant: Option<f64>,
    /// Stop once the bound falls below `tol (1 + ‖σ_h‖_∞)`.
    pub tol: f64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            benchmark: Benchmark::Cook,
            mesh: MeshSource::Default,
            mu: 1.0,
            material: Material::Nu(0.49),
            theta: 0.5,
            steps: 17,
            korn_degree: DEFAULT_DEGREE,
            korn_safety: DEFAULT_SAFETY,
            korn_constant: None,
            tol: 1e-9,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn lambda_inv(&self) -> Result<f64> {
        self.material.lambda_inv(self.mu)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu {} must be positive", self.mu)));
        }
        self.lambda_inv()?;
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidParameter(format!("theta {} not in (0, 1]", self.theta)));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("tol {} must be >= 0", self.tol)));
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<f64> {
            match v {
                "inf" | "infinity" => Ok(f64::INFINITY),
                _ => v
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("`{key}`: `{v}` is not a number"))),
            }
        };
        let int = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| Error::InvalidParameter(format!("`{key}`: `{v}` is not a count")))
        };
        match key {
            "benchmark" => self.benchmark = value.parse()?,
            "mesh" => self.mesh = value.parse()?,
            "mu" => self.mu = num(value)?,
            "nu" => self.material = Material::Nu(num(value)?),
            "lambda" => self.material = Material::Lambda(num(value)?),
            "lambda_inv" => self.material = Material::LambdaInv(num(value)?),
            "theta" => self.theta = num(value)?,
            "steps" => self.steps = int(value)?,
            "korn_degree" => self.korn_degree = int(value)?,
            "korn_safety" => self.korn_safety = num(value)?,
            "korn_constant" => self.korn_constant = Some(num(value)?),
            "tol" => self.tol = num(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(Error::InvalidParameter(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies the settings of a config file on top of `self`.
    pub fn apply_str(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, found `{line}`")))?;
            self.set(k.trim(), v.trim()).map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_str(&std::fs::read_to_string(path)?, path)?;
        Ok(cfg)
    }
}
