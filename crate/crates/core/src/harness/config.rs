//! Plain-text run configuration: `key = value` lines, `#` comments.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::{OscillationMode, RieszConfig};
use crate::metrics::ProblemId;

/// Mesh change applied to `T^{k-1}` to obtain `T^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshAction {
    /// Bisect every element.
    Refine,
    /// Bisect the elements with centroid in `[0, 1/2]^2`.
    RefineCorner,
    /// Undo one bisection wherever both children are leaves.
    Coarsen,
}

impl FromStr for MeshAction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "refine" => Ok(Self::Refine),
            "refine-corner" => Ok(Self::RefineCorner),
            "coarsen" => Ok(Self::Coarsen),
            _ => Err(Error::Config(format!("unknown mesh action `{s}`"))),
        }
    }
}

impl fmt::Display for MeshAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Refine => "refine",
            Self::RefineCorner => "refine-corner",
            Self::Coarsen => "coarsen",
        })
    }
}

/// Degrees in space: uniform, or one degree on `x < 1/2` and another on
/// `x >= 1/2` (by element centroid).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degrees {
    Uniform(usize),
    Split(usize, usize),
}

impl Degrees {
    pub fn max(&self) -> usize {
        match *self {
            Self::Uniform(p) => p,
            Self::Split(a, b) => a.max(b),
        }
    }

    pub fn at(&self, centroid_x: f64) -> usize {
        match *self {
            Self::Uniform(p) => p,
            Self::Split(a, b) => {
                if centroid_x < 0.5 {
                    a
                } else {
                    b
                }
            }
        }
    }
}

impl FromStr for Degrees {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad degree `{v}`")))
        };
        match s.split_once(',') {
            Some((a, b)) => Ok(Self::Split(parse(a)?, parse(b)?)),
            None => Ok(Self::Uniform(parse(s)?)),
        }
    }
}

impl fmt::Display for Degrees {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform(p) => write!(f, "{p}"),
            Self::Split(a, b) => write!(f, "{a},{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemId,
    /// Cells per side of the initial mesh.
    pub n: usize,
    pub p: Degrees,
    pub q: usize,
    pub steps: usize,
    pub t_final: f64,
    /// `(k, action)`: applied to `T^{k-1}` to build `T^k`.
    pub schedule: Vec<(usize, MeshAction)>,
    pub riesz: RieszConfig,
    pub oscillation: OscillationMode,
    /// Extra Gauss points in time beyond `q + 3`.
    pub time_points: usize,
    /// Patch-local lifts (local efficiency and localization).
    pub local: bool,
    /// Repeat every dual norm on the reference space bisected once more.
    pub riesz_audit: bool,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemId::Ms1,
            n: 8,
            p: Degrees::Uniform(1),
            q: 0,
            steps: 8,
            t_final: 1.0,
            schedule: Vec::new(),
            riesz: RieszConfig::default(),
            oscillation: OscillationMode::Riesz,
            time_points: 0,
            local: true,
            riesz_audit: true,
            output: None,
        }
    }
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean `{v}`"))),
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
}

pub fn parse_schedule(v: &str) -> Result<Vec<(usize, MeshAction)>> {
    if v.is_empty() || v == "none" {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|item| {
            let (k, a) = item.trim().split_once(':').ok_or_else(|| {
                Error::Config(format!("schedule entry `{item}` is not `step:action`"))
            })?;
            Ok((parse_num("schedule", k.trim())?, a.trim().parse()?))
        })
        .collect()
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "problem" => self.problem = v.parse()?,
            "n" => self.n = parse_num(key, v)?,
            "p" => self.p = v.parse()?,
            "q" => self.q = parse_num(key, v)?,
            "steps" => self.steps = parse_num(key, v)?,
            "t_final" => self.t_final = parse_num(key, v)?,
            "schedule" => self.schedule = parse_schedule(v)?,
            "riesz_refinements" => self.riesz.refinements = parse_num(key, v)?,
            "riesz_degree" => self.riesz.extra_degree = parse_num(key, v)?,
            "oscillation" => self.oscillation = v.parse()?,
            "time_points" => self.time_points = parse_num(key, v)?,
            "local" => self.local = parse_bool(v)?,
            "riesz_audit" => self.riesz_audit = parse_bool(v)?,
            "output" => self.output = Some(PathBuf::from(v)),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Reads settings over `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(k, v).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad("t_final must be positive");
        }
        match self.p {
            Degrees::Uniform(0) | Degrees::Split(0, _) | Degrees::Split(_, 0) => {
                return bad("p must be at least 1")
            }
            _ => {}
        }
        if self.p.max() > 8 || self.q > 8 {
            return bad("degrees above 8 are not supported");
        }
        for &(k, _) in &self.schedule {
            if k == 0 || k > self.steps {
                return bad("schedule steps must lie in 1..=steps");
            }
        }
        Ok(())
    }

    /// Canonical text form; parsing it reproduces the config.
    pub fn to_text(&self) -> String {
        let schedule = if self.schedule.is_empty() {
            "none".to_string()
        } else {
            self.schedule
                .iter()
                .map(|(k, a)| format!("{k}:{a}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut s = format!(
            "problem = {}\nn = {}\np = {}\nq = {}\nsteps = {}\nt_final = {}\nschedule = {}\nriesz_refinements = {}\nriesz_degree = {}\noscillation = {}\ntime_points = {}\nlocal = {}\nriesz_audit = {}\n",
            self.problem,
            self.n,
            self.p,
            self.q,
            self.steps,
            self.t_final,
            schedule,
            self.riesz.refinements,
            self.riesz.extra_degree,
            self.oscillation,
            self.time_points,
            self.local,
            self.riesz_audit,
        );
        if let Some(o) = &self.output {
            s.push_str(&format!("output = {}\n", o.display()));
        }
        s
    }

    /// SHA-256 of the canonical text without the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let digest = Sha256::digest(c.to_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let mut c = RunConfig {
            p: Degrees::Split(1, 3),
            schedule: vec![(1, MeshAction::Refine), (2, MeshAction::Coarsen)],
            ..Default::default()
        };
        c.oscillation = OscillationMode::Poincare;
        let mut d = RunConfig::default();
        d.apply_text(&c.to_text()).unwrap();
        assert_eq!(c, d);
        assert_eq!(c.hash(), d.hash());
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("n = x").is_err());
        assert!(c.apply_text("colour = red").is_err());
        assert!(c.apply_text("n 4").is_err());
        c.schedule = vec![(9, MeshAction::Refine)];
        assert!(c.validate().is_err());
    }
}
