//! Flat `key = value` experiment configs with dotted keys.

use ini::Ini;
use num_complex::Complex64 as C64;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::helmholtz::KernelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    ZetaSelftest,
    Convergence,
    HalfspaceSolve,
}

/// What a convergence study integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    /// Corrected layer potential at one grid node.
    Layer(KernelKind),
    /// `∫ e^{−|v|²}/|v| dv = π^{3/2}` with the scalar corrected rule.
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    /// The chart's example density.
    Example,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZetaSettings {
    pub identity_s: Vec<f64>,
    pub functional_s: Vec<C64>,
    pub eps: f64,
    pub forms: Vec<(C64, C64, C64)>,
    pub random_forms: usize,
    pub seed: u64,
    pub wigner_s: Vec<f64>,
    pub wigner_n: Vec<usize>,
    pub wigner_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveSettings {
    pub source: [f64; 3],
    pub target_height: f64,
    pub window: f64,
    pub target_step: f64,
    pub node_budget: usize,
    pub restart: usize,
    pub tol: f64,
    pub onset: f64,
    pub max_error: Option<f64>,
    pub min_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub id: String,
    pub geometry: String,
    pub target: (f64, f64),
    pub density: DensityKind,
    /// Strictly decreasing.
    pub h: Vec<f64>,
    pub half_width: f64,
    pub study: StudyKind,
    pub k: f64,
    pub order: u32,
    pub slope_band: Option<(f64, f64)>,
    pub zeta: ZetaSettings,
    pub solve: SolveSettings,
    pub output: PathBuf,
    pub deterministic: bool,
    /// SHA-256 of the sorted `key=value` pairs, output path excluded.
    pub hash: String,
}

const KEYS: &[&str] = &[
    "experiment.kind",
    "experiment.id",
    "geometry.name",
    "geometry.target",
    "density.name",
    "grid.h",
    "grid.half_width",
    "kernel.kind",
    "kernel.k",
    "kernel.order",
    "check.slope_band",
    "check.max_error",
    "check.min_ratio",
    "zeta.s",
    "zeta.functional_s",
    "zeta.eps",
    "zeta.forms",
    "zeta.random_forms",
    "zeta.seed",
    "zeta.wigner_s",
    "zeta.wigner_n",
    "zeta.wigner_tol",
    "solve.source",
    "solve.target_height",
    "solve.window",
    "solve.target_step",
    "solve.node_budget",
    "solve.restart",
    "solve.tol",
    "solve.onset",
    "output.path",
    "run.deterministic",
];

fn cfg_err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

fn parse_one<T: FromStr>(key: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| cfg_err(key, format!("cannot parse {s:?}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| parse_one(key, p)).collect()
}

struct Values(BTreeMap<String, String>);

impl Values {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key).map_or(Ok(default), |s| parse_one(key, s))
    }

    fn list_or<T: FromStr + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key).map_or(Ok(default.to_vec()), |s| parse_list(key, s))
    }

    fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key).map(|s| parse_one(key, s)).transpose()
    }

    fn pair(&self, key: &str, default: (f64, f64)) -> Result<(f64, f64)> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => {
                let v: Vec<f64> = parse_list(key, s)?;
                match v[..] {
                    [a, b] => Ok((a, b)),
                    _ => Err(cfg_err(key, "expected two numbers")),
                }
            }
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut map = BTreeMap::new();
        for (section, props) in ini.iter() {
            for (k, v) in props.iter() {
                let key = match section {
                    Some(s) => format!("{s}.{k}"),
                    None => k.to_string(),
                };
                if !KEYS.contains(&key.as_str()) {
                    return Err(Error::Config(format!("unknown key {key:?}")));
                }
                map.insert(key, v.trim().to_string());
            }
        }
        let mut hasher = Sha256::new();
        for (k, v) in map.iter().filter(|(k, _)| k.as_str() != "output.path") {
            hasher.update(format!("{k}={v}\n").as_bytes());
        }
        let hash = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        let vals = Values(map);

        let kind = match vals.get("experiment.kind") {
            Some("zeta_selftest") => ExperimentKind::ZetaSelftest,
            Some("convergence") => ExperimentKind::Convergence,
            Some("halfspace_solve") => ExperimentKind::HalfspaceSolve,
            Some(other) => return Err(cfg_err("experiment.kind", format!("unknown kind {other:?}"))),
            None => return Err(cfg_err("experiment.kind", "missing")),
        };
        let study = match vals.get("kernel.kind").unwrap_or("single") {
            "single" => StudyKind::Layer(KernelKind::Single),
            "double" => StudyKind::Layer(KernelKind::Double),
            "combined" => StudyKind::Layer(KernelKind::Combined),
            "trapezoid" => StudyKind::Trapezoid,
            other => return Err(cfg_err("kernel.kind", format!("unknown kind {other:?}"))),
        };
        let density = match vals.get("density.name").unwrap_or("example") {
            "example" => DensityKind::Example,
            "zero" => DensityKind::Zero,
            other => return Err(cfg_err("density.name", format!("unknown density {other:?}"))),
        };
        let h: Vec<f64> = vals.list_or("grid.h", &[])?;
        if h.iter().any(|&x| !(x > 0.0)) || h.windows(2).any(|w| w[1] >= w[0]) {
            return Err(cfg_err("grid.h", "must be positive and strictly decreasing"));
        }
        let forms = match vals.get("zeta.forms") {
            None => vec![
                (C64::new(1.0, 6e-3), C64::new(1.39e-5, 0.0), C64::new(0.9638, 0.3805)),
                (C64::new(6.25, 0.0), C64::new(-0.2765, -0.0461), C64::new(1.4582, 0.5006)),
            ],
            Some(s) => s
                .split(';')
                .filter(|f| !f.trim().is_empty())
                .map(|f| {
                    let v: Vec<C64> = parse_list("zeta.forms", f)?;
                    match v[..] {
                        [e, f, g] => Ok((e, f, g)),
                        _ => Err(cfg_err("zeta.forms", "each form needs E, F, G")),
                    }
                })
                .collect::<Result<_>>()?,
        };
        let zeta = ZetaSettings {
            identity_s: vals.list_or("zeta.s", &[0.25, 0.5, 2.0, 3.0])?,
            functional_s: vals.list_or(
                "zeta.functional_s",
                &[C64::new(0.25, 0.0), C64::new(0.5, 0.3), C64::new(2.5, 0.0), C64::new(3.0, 0.5)],
            )?,
            eps: vals.or("zeta.eps", 1e-12)?,
            forms,
            random_forms: vals.or("zeta.random_forms", 20)?,
            seed: vals.or("zeta.seed", 3)?,
            wigner_s: vals.list_or("zeta.wigner_s", &[0.7])?,
            wigner_n: vals.list_or("zeta.wigner_n", &[8, 16, 32, 64])?,
            wigner_tol: vals.or("zeta.wigner_tol", 1e-3)?,
        };
        if !(zeta.eps > 0.0) {
            return Err(cfg_err("zeta.eps", "must be positive"));
        }
        let source: Vec<f64> = vals.list_or("solve.source", &[1.0, 1.0, -2.0])?;
        let source: [f64; 3] = source
            .try_into()
            .map_err(|_| cfg_err("solve.source", "expected three numbers"))?;
        let solve = SolveSettings {
            source,
            target_height: vals.or("solve.target_height", 3.0)?,
            window: vals.or("solve.window", 9.0)?,
            target_step: vals.or("solve.target_step", 1.0)?,
            node_budget: vals.or("solve.node_budget", crate::helmholtz::DEFAULT_NODE_BUDGET)?,
            restart: vals.or("solve.restart", 100)?,
            tol: vals.or("solve.tol", 1e-10)?,
            onset: vals.or("solve.onset", 10.0)?,
            max_error: vals.opt("check.max_error")?,
            min_ratio: vals.opt("check.min_ratio")?,
        };
        let slope_band = match vals.get("check.slope_band") {
            None => None,
            Some(_) => Some(vals.pair("check.slope_band", (0.0, 0.0))?),
        };
        let output = PathBuf::from(
            vals.get("output.path")
                .ok_or_else(|| cfg_err("output.path", "missing"))?,
        );
        let cfg = Self {
            kind,
            id: vals.get("experiment.id").unwrap_or("experiment").to_string(),
            geometry: vals.get("geometry.name").unwrap_or("gaussian_bump").to_string(),
            target: vals.pair("geometry.target", (0.0, 0.0))?,
            density,
            h,
            half_width: vals.or("grid.half_width", 30.0)?,
            study,
            k: vals.or("kernel.k", 2.0)?,
            order: vals.or("kernel.order", 3)?,
            slope_band,
            zeta,
            solve,
            output,
            deterministic: vals.or("run.deterministic", false)?,
            hash,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.kind != ExperimentKind::ZetaSelftest && self.h.is_empty() {
            return Err(cfg_err("grid.h", "at least one spacing is required"));
        }
        if !(self.k > 0.0) {
            return Err(cfg_err("kernel.k", "wavenumber must be positive"));
        }
        let orders: &[u32] = match self.study {
            StudyKind::Trapezoid => &[1, 3, 5, 7],
            StudyKind::Layer(_) => &[3, 5, 7],
        };
        if !orders.contains(&self.order) {
            return Err(cfg_err("kernel.order", format!("must be one of {orders:?}")));
        }
        if !(self.half_width > 0.0) {
            return Err(cfg_err("grid.half_width", "must be positive"));
        }
        Ok(())
    }

    /// Creates the parent directory and checks the output path is writable.
    pub fn prepare_output(&self) -> Result<()> {
        if let Some(dir) = self.output.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)
                .map_err(|e| cfg_err("output.path", format!("{}: {e}", dir.display())))?;
        }
        std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.output)
            .map_err(|e| cfg_err("output.path", format!("{}: {e}", self.output.display())))?;
        Ok(())
    }
}
