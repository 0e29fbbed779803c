use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::pipeline::{ExperimentOptions, SurfaceChoice, DEFAULT_KNN};
use crate::dgcore::{AssemblyOptions, JumpVariant};
use crate::error::{Error, Result};
use crate::geometry::DEFAULT_TOL;

/// A numeric setting that may be left to its documented default with `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Auto<T> {
    #[default]
    Auto,
    Value(T),
}

impl<T: FromStr> FromStr for Auto<T> {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Auto::Auto);
        }
        s.parse()
            .map(Auto::Value)
            .map_err(|_| format!("expected a number or \"auto\", got {s:?}"))
    }
}

impl<T: fmt::Display> fmt::Display for Auto<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Auto::Auto => f.write_str("auto"),
            Auto::Value(v) => v.fmt(f),
        }
    }
}

impl<T: Serialize> Serialize for Auto<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Auto::Auto => s.serialize_str("auto"),
            Auto::Value(v) => v.serialize(s),
        }
    }
}

impl<'de, T: Deserialize<'de> + FromStr> Deserialize<'de> for Auto<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<T> {
            Value(T),
            Text(String),
        }
        match Raw::<T>::deserialize(d)? {
            Raw::Value(v) => Ok(Auto::Value(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Sphere,
    Torus,
    /// Unit square in the plane `z = 0`.
    PlaneTest,
    /// Cloud and seed mesh from `--cloud` and `--mesh`.
    Cloud,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum JumpChoice {
    Averaged,
    Product,
}

/// Settings as given in a config file or on the command line; unset fields
/// fall back to the file, then to the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct PartialConfig {
    #[arg(long, value_enum)]
    pub surface: Option<SurfaceKind>,
    /// Point cloud file (`x y z` per line).
    #[arg(long, value_name = "FILE")]
    pub cloud: Option<PathBuf>,
    /// Seed mesh file (OFF).
    #[arg(long, value_name = "FILE")]
    pub mesh: Option<PathBuf>,
    /// Geometric degree.
    #[arg(long)]
    pub k: Option<usize>,
    /// Function degree.
    #[arg(long)]
    pub l: Option<usize>,
    /// Number of refinement levels, the seed mesh included.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Penalty parameter or "auto" for 10 (l + 1)^2.
    #[arg(long)]
    pub beta: Option<Auto<f64>>,
    /// Cloud neighbours used to project refined vertices.
    #[arg(long)]
    pub knn: Option<usize>,
    /// Fitting points per patch or "auto" for (k + 1)(k + 2).
    #[arg(long)]
    pub m: Option<Auto<usize>>,
    #[arg(long)]
    pub newton_tol: Option<f64>,
    /// Extra degree added to all quadrature rules.
    #[arg(long)]
    pub quad_boost: Option<usize>,
    /// Number of eigenpairs.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_enum)]
    pub jump: Option<JumpChoice>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write gnuplot-style `.dat` tables.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dat: Option<bool>,
    /// Also write per-level solution coefficients.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dump: Option<bool>,
}

impl PartialConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// Fields of `self` where set, otherwise those of `base`.
    pub fn over(self, base: PartialConfig) -> PartialConfig {
        macro_rules! pick {
            ($($f:ident),*) => { PartialConfig { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(surface, cloud, mesh, k, l, levels, beta, knn, m, newton_tol, quad_boost, count, jump, out, dat, dump)
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let cfg = RunConfig {
            surface: self.surface.unwrap_or(d.surface),
            cloud: self.cloud,
            mesh: self.mesh,
            k: self.k.unwrap_or(d.k),
            l: self.l.unwrap_or(d.l),
            levels: self.levels.unwrap_or(d.levels),
            beta: self.beta.unwrap_or(d.beta),
            knn: self.knn.unwrap_or(d.knn),
            m: self.m.unwrap_or(d.m),
            newton_tol: self.newton_tol.unwrap_or(d.newton_tol),
            quad_boost: self.quad_boost.unwrap_or(d.quad_boost),
            count: self.count.unwrap_or(d.count),
            jump: self.jump.unwrap_or(d.jump),
            out: self.out.unwrap_or(d.out),
            dat: self.dat.unwrap_or(d.dat),
            dump: self.dump.unwrap_or(d.dump),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub surface: SurfaceKind,
    pub cloud: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub k: usize,
    pub l: usize,
    pub levels: usize,
    pub beta: Auto<f64>,
    pub knn: usize,
    pub m: Auto<usize>,
    pub newton_tol: f64,
    pub quad_boost: usize,
    pub count: usize,
    pub jump: JumpChoice,
    pub out: PathBuf,
    pub dat: bool,
    pub dump: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            surface: SurfaceKind::Sphere,
            cloud: None,
            mesh: None,
            k: 1,
            l: 1,
            levels: 4,
            beta: Auto::Auto,
            knn: DEFAULT_KNN,
            m: Auto::Auto,
            newton_tol: DEFAULT_TOL,
            quad_boost: 0,
            count: 10,
            jump: JumpChoice::Averaged,
            out: PathBuf::from("out"),
            dat: false,
            dump: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.k == 0 || self.l == 0 {
            return bad(format!("degrees must be at least 1 (k = {}, l = {})", self.k, self.l));
        }
        if self.levels == 0 {
            return bad("levels must be at least 1".into());
        }
        if self.knn < 3 {
            return bad(format!("knn must be at least 3, got {}", self.knn));
        }
        if !(self.newton_tol > 0.0) {
            return bad(format!("newton-tol must be positive, got {}", self.newton_tol));
        }
        if let Auto::Value(b) = self.beta {
            if !(b >= 0.0) || !b.is_finite() {
                return bad(format!("beta must be a finite non-negative number, got {b}"));
            }
        }
        if let Auto::Value(m) = self.m {
            let need = (self.k + 1) * (self.k + 2) / 2;
            if m < need {
                return bad(format!("m = {m} is below the {need} coefficients of degree {}", self.k));
            }
        }
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if self.surface == SurfaceKind::Cloud {
            for (name, p) in [("--cloud", &self.cloud), ("--mesh", &self.mesh)] {
                match p {
                    None => return bad(format!("surface cloud needs {name}")),
                    Some(p) if !p.is_file() => {
                        return Err(Error::Io {
                            path: p.display().to_string(),
                            message: "file not found".into(),
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn surface_choice(&self) -> SurfaceChoice {
        match self.surface {
            SurfaceKind::Sphere => SurfaceChoice::Sphere,
            SurfaceKind::Torus => SurfaceChoice::Torus,
            SurfaceKind::PlaneTest => SurfaceChoice::PlaneTest,
            SurfaceKind::Cloud => SurfaceChoice::Cloud {
                cloud: self.cloud.clone().unwrap_or_default(),
                mesh: self.mesh.clone().unwrap_or_default(),
            },
        }
    }

    pub fn beta(&self) -> f64 {
        match self.beta {
            Auto::Auto => AssemblyOptions::default_beta(self.l),
            Auto::Value(b) => b,
        }
    }

    pub fn experiment(&self) -> ExperimentOptions {
        let mut o = ExperimentOptions::new(self.k, self.l, self.levels);
        o.knn = self.knn;
        o.reconstruction.fit.points = match self.m {
            Auto::Auto => None,
            Auto::Value(m) => Some(m),
        };
        o.reconstruction.newton.tol = self.newton_tol;
        o.assembly.beta = self.beta();
        o.assembly.quad_boost = self.quad_boost;
        o.assembly.jump = match self.jump {
            JumpChoice::Averaged => JumpVariant::Averaged,
            JumpChoice::Product => JumpVariant::Product,
        };
        o
    }
}
