//! Convergence and robustness sweeps over one configuration parameter.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use super::config::{Degrees, RunConfig};
use super::run::{run_experiment, RunOutput};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Cells per side `n`.
    H,
    /// Number of time steps.
    Tau,
    /// Uniform space degree.
    P,
    /// Time degree.
    Q,
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" => Ok(Self::H),
            "tau" => Ok(Self::Tau),
            "p" => Ok(Self::P),
            "q" => Ok(Self::Q),
            _ => Err(Error::Config(format!(
                "unknown sweep `{s}` (expected h, tau, p or q)"
            ))),
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::H => "h",
            Self::Tau => "tau",
            Self::P => "p",
            Self::Q => "q",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub kind: SweepKind,
    pub values: Vec<usize>,
    /// For `h` sweeps: scale the number of steps with `n`.
    pub couple_time: bool,
}

impl Sweep {
    pub fn new(kind: SweepKind, values: Vec<usize>) -> Self {
        Self {
            kind,
            values,
            couple_time: false,
        }
    }

    /// `kind:v1,v2,...`, e.g. `h:4,8,16`.
    pub fn parse(s: &str) -> Result<Self> {
        let (k, v) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("sweep `{s}` is not `kind:values`")))?;
        let values = v
            .split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad sweep value `{x}`")))
            })
            .collect::<Result<Vec<usize>>>()?;
        let sweep = Self::new(k.trim().parse()?, values);
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep has no values".into()));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep values must increase".into()));
        }
        Ok(())
    }

    /// Config of level `i`.
    pub fn level(&self, base: &RunConfig, i: usize) -> RunConfig {
        let v = self.values[i];
        let mut c = base.clone();
        match self.kind {
            SweepKind::H => {
                c.n = v;
                if self.couple_time {
                    c.steps = (base.steps * v / base.n).max(1);
                }
            }
            SweepKind::Tau => c.steps = v,
            SweepKind::P => c.p = Degrees::Uniform(v),
            SweepKind::Q => c.q = v,
        }
        c
    }

    /// Whether successive-ratio orders are meaningful.
    pub fn has_orders(&self) -> bool {
        matches!(self.kind, SweepKind::H | SweepKind::Tau)
    }
}

#[derive(Debug, Clone)]
pub struct StudyRow {
    pub value: usize,
    pub hash: String,
    pub dofs: usize,
    pub error_y: f64,
    pub eta_y: f64,
    pub error_ey: f64,
    pub eta_ey: f64,
    pub max_local_efficiency: f64,
    pub passed: bool,
    /// Observed orders against the previous level.
    pub order_y: Option<f64>,
    pub order_eta_y: Option<f64>,
    pub order_ey: Option<f64>,
}

impl StudyRow {
    pub fn effectivity_y(&self) -> f64 {
        self.eta_y / self.error_y
    }

    pub fn effectivity_ey(&self) -> f64 {
        self.eta_ey / self.error_ey
    }
}

#[derive(Debug, Clone)]
pub struct StudyTable {
    pub sweep: Sweep,
    pub base_hash: String,
    pub rows: Vec<StudyRow>,
}

/// `log(e_prev / e) / log(v / v_prev)`.
pub fn observed_order(e_prev: f64, e: f64, v_prev: usize, v: usize) -> f64 {
    (e_prev / e).ln() / (v as f64 / v_prev as f64).ln()
}

impl StudyTable {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    /// Largest over smallest effectivity.
    pub fn effectivity_spread(&self, energy: bool) -> f64 {
        let effs: Vec<f64> = self
            .rows
            .iter()
            .map(|r| {
                if energy {
                    r.effectivity_ey()
                } else {
                    r.effectivity_y()
                }
            })
            .collect();
        let max = effs.iter().copied().fold(f64::MIN, f64::max);
        let min = effs.iter().copied().fold(f64::MAX, f64::min);
        max / min
    }

    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "# sweep = {}", self.sweep.kind)?;
        writeln!(w, "# base_config_hash = {}", self.base_hash)?;
        writeln!(
            w,
            "level,{},config_hash,dofs,error_y,eta_y,effectivity_y,order_y,order_eta_y,error_ey,eta_ey,effectivity_ey,order_ey,local_efficiency_max,status",
            self.sweep.kind
        )?;
        let fmt = |o: Option<f64>| o.map(|v| format!("{v:.4}")).unwrap_or_default();
        for (i, r) in self.rows.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{:e},{:e},{:.6},{},{},{:e},{:e},{:.6},{},{:.6},{}",
                i,
                r.value,
                r.hash,
                r.dofs,
                r.error_y,
                r.eta_y,
                r.effectivity_y(),
                fmt(r.order_y),
                fmt(r.order_eta_y),
                r.error_ey,
                r.eta_ey,
                r.effectivity_ey(),
                fmt(r.order_ey),
                r.max_local_efficiency,
                if r.passed { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Runs every level of `sweep` on top of `base`. `each` sees every run.
pub fn convergence_study(
    base: &RunConfig,
    sweep: &Sweep,
    mut each: impl FnMut(&RunOutput),
) -> Result<StudyTable> {
    sweep.validate()?;
    let mut rows: Vec<StudyRow> = Vec::with_capacity(sweep.values.len());
    for i in 0..sweep.values.len() {
        let cfg = sweep.level(base, i);
        let out = run_experiment(&cfg)?;
        each(&out);
        let v = sweep.values[i];
        let order = |f: fn(&StudyRow) -> f64, cur: f64| {
            let prev = rows.last()?;
            sweep
                .has_orders()
                .then(|| observed_order(f(prev), cur, prev.value, v))
        };
        let (ey, y) = (out.errors.ey(), out.errors.y());
        let eta_y = out.estimators.eta_y();
        let (order_y, order_eta_y, order_ey) = (
            order(|r| r.error_y, y),
            order(|r| r.eta_y, eta_y),
            order(|r| r.error_ey, ey),
        );
        rows.push(StudyRow {
            value: v,
            hash: out.hash.clone(),
            dofs: out.max_dofs,
            error_y: y,
            eta_y,
            error_ey: ey,
            eta_ey: out.estimators.eta_ey(),
            max_local_efficiency: out.max_local_efficiency(),
            passed: out.passed(),
            order_y,
            order_eta_y,
            order_ey,
        });
    }
    Ok(StudyTable {
        sweep: sweep.clone(),
        base_hash: base.hash(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_orders() {
        let s = Sweep::parse("h:4,8,16").unwrap();
        assert_eq!(s.kind, SweepKind::H);
        assert_eq!(s.values, vec![4, 8, 16]);
        assert!(Sweep::parse("h:8,4").is_err());
        assert!(Sweep::parse("x:1").is_err());
        assert!((observed_order(1.0, 0.25, 4, 8) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn levels_change_one_parameter() {
        let base = RunConfig::default();
        let mut s = Sweep::new(SweepKind::H, vec![4, 16]);
        s.couple_time = true;
        let c = s.level(&base, 1);
        assert_eq!((c.n, c.steps), (16, 16));
        let s = Sweep::new(SweepKind::Q, vec![0, 3]);
        assert_eq!(s.level(&base, 1).q, 3);
        assert_eq!(s.level(&base, 1).n, base.n);
    }
}
