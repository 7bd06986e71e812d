//! Flat `key = value` run configuration.
//!
//! Unset keys fall back to the case defaults. Lines starting with `#` are
//! comments. Lists (`scheme`, `nu`) are comma separated.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use brflow::forms::EafeDiagonal;
use brflow::mesh::Pattern;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub command: Option<String>,
    pub case: Option<String>,
    pub scheme: Vec<String>,
    pub nu: Vec<f64>,
    pub eps: Option<f64>,
    pub eafe_diagonal: Option<EafeDiagonal>,
    pub pattern: Option<Pattern>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub dim: Option<usize>,
    pub levels: Option<usize>,
    pub level: Option<usize>,
    pub tau: Option<f64>,
    pub t_end: Option<f64>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub vtk: Option<bool>,
}

pub const KEYS: &[&str] = &[
    "command",
    "case",
    "scheme",
    "nu",
    "eps",
    "eafe_diagonal",
    "pattern",
    "nx",
    "ny",
    "dim",
    "levels",
    "level",
    "tau",
    "t_end",
    "max_iters",
    "tol",
    "output_dir",
    "out",
    "vtk",
];

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| anyhow!("bad value '{v}' for '{key}': {e}"))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse(key, s)).collect()
}

impl RunConfig {
    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "command" => self.command = Some(v.to_string()),
            "case" => self.case = Some(v.to_string()),
            "scheme" => self.scheme = list(key, v)?,
            "nu" => self.nu = list(key, v)?,
            "eps" => self.eps = Some(parse(key, v)?),
            "eafe_diagonal" => self.eafe_diagonal = Some(parse(key, v)?),
            "pattern" => self.pattern = Some(parse(key, v)?),
            "nx" => self.nx = Some(parse(key, v)?),
            "ny" => self.ny = Some(parse(key, v)?),
            "dim" => self.dim = Some(parse(key, v)?),
            "levels" => self.levels = Some(parse(key, v)?),
            "level" => self.level = Some(parse(key, v)?),
            "tau" => self.tau = Some(parse(key, v)?),
            "t_end" => self.t_end = Some(parse(key, v)?),
            "max_iters" => self.max_iters = Some(parse(key, v)?),
            "tol" => self.tol = Some(parse(key, v)?),
            "output_dir" => self.output_dir = Some(PathBuf::from(v)),
            "out" => self.out = Some(PathBuf::from(v)),
            "vtk" => self.vtk = Some(parse(key, v)?),
            other => bail!("unknown config key '{other}' (known keys: {})", KEYS.join(", ")),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected 'key = value', got '{line}'", n + 1))?;
            c.set(k.trim(), v).with_context(|| format!("line {}", n + 1))?;
        }
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    /// `(key, value)` pairs of the set keys, in `KEYS` order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        }
        let mut out = Vec::new();
        let mut push = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k, v));
            }
        };
        push("command", self.command.clone());
        push("case", self.case.clone());
        push("scheme", (!self.scheme.is_empty()).then(|| join(&self.scheme)));
        push("nu", (!self.nu.is_empty()).then(|| join(&self.nu)));
        push("eps", self.eps.map(|x| x.to_string()));
        push("eafe_diagonal", self.eafe_diagonal.map(|x| x.to_string()));
        push("pattern", self.pattern.map(|x| x.to_string()));
        push("nx", self.nx.map(|x| x.to_string()));
        push("ny", self.ny.map(|x| x.to_string()));
        push("dim", self.dim.map(|x| x.to_string()));
        push("levels", self.levels.map(|x| x.to_string()));
        push("level", self.level.map(|x| x.to_string()));
        push("tau", self.tau.map(|x| x.to_string()));
        push("t_end", self.t_end.map(|x| x.to_string()));
        push("max_iters", self.max_iters.map(|x| x.to_string()));
        push("tol", self.tol.map(|x| x.to_string()));
        push("output_dir", self.output_dir.as_ref().map(|p| p.display().to_string()));
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        push("vtk", self.vtk.map(|x| x.to_string()));
        out
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Values set in `other` replace ours.
    pub fn merge(&mut self, other: &RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if other.$f.is_some() {
                    self.$f = other.$f.clone();
                }
            )*};
        }
        take!(command, case, eps, eafe_diagonal, pattern, nx, ny, dim, levels, level, tau, t_end, max_iters, tol, output_dir, out, vtk);
        if !other.scheme.is_empty() {
            self.scheme = other.scheme.clone();
        }
        if !other.nu.is_empty() {
            self.nu = other.nu.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        for &nu in &self.nu {
            if !(nu > 0.0 && nu.is_finite()) {
                bail!("nu must be positive, got {nu}");
            }
        }
        let positive = |name: &str, v: Option<f64>| -> Result<()> {
            match v {
                Some(x) if !(x > 0.0 && x.is_finite()) => bail!("{name} must be positive, got {x}"),
                _ => Ok(()),
            }
        };
        positive("eps", self.eps)?;
        positive("tau", self.tau)?;
        positive("t_end", self.t_end)?;
        if let Some(t) = self.tol {
            if !(t > 0.0 && t < 1.0) {
                bail!("tol must lie in (0, 1), got {t}");
            }
        }
        for (name, v) in [("nx", self.nx), ("ny", self.ny), ("levels", self.levels), ("level", self.level), ("max_iters", self.max_iters)] {
            if v == Some(0) {
                bail!("{name} must be at least 1");
            }
        }
        if let Some(d) = self.dim {
            if d != 2 && d != 3 {
                bail!("dim must be 2 or 3, got {d}");
            }
        }
        Ok(())
    }
}
