use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::mesh::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemId {
    /// `sin(pi x) sin(pi y) e^{-t}`.
    Ms1,
    /// `x(1-x) y(1-y) (1+t)`, reproduced exactly for `p >= 4`, `q >= 1`.
    Ms2,
    /// MS1 plus a fast-decaying checkerboard mode in the initial data.
    Ms3,
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().as_str() {
            "MS1" => Ok(Self::Ms1),
            "MS2" => Ok(Self::Ms2),
            "MS3" => Ok(Self::Ms3),
            _ => Err(Error::Config(format!("unknown problem `{s}`"))),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ms1 => "MS1",
            Self::Ms2 => "MS2",
            Self::Ms3 => "MS3",
        })
    }
}

/// Manufactured solution of `u_t - Lap u = f` on the unit square with
/// homogeneous Dirichlet data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedProblem {
    pub id: ProblemId,
    pub t_final: f64,
}

const CHECKER: f64 = 0.25;
const CHECKER_RATE: f64 = 32.0 * PI * PI;

impl ManufacturedProblem {
    pub fn new(id: ProblemId, t_final: f64) -> Self {
        Self { id, t_final }
    }

    pub fn u(&self, x: Point, t: f64) -> f64 {
        match self.id {
            ProblemId::Ms1 => sines(x) * (-t).exp(),
            ProblemId::Ms2 => bubble(x) * (1.0 + t),
            ProblemId::Ms3 => {
                sines(x) * (-t).exp() + CHECKER * checker(x) * (-CHECKER_RATE * t).exp()
            }
        }
    }

    pub fn dt_u(&self, x: Point, t: f64) -> f64 {
        match self.id {
            ProblemId::Ms1 => -sines(x) * (-t).exp(),
            ProblemId::Ms2 => bubble(x),
            ProblemId::Ms3 => {
                -sines(x) * (-t).exp()
                    - CHECKER_RATE * CHECKER * checker(x) * (-CHECKER_RATE * t).exp()
            }
        }
    }

    pub fn grad_u(&self, x: Point, t: f64) -> [f64; 2] {
        let [a, b] = x;
        match self.id {
            ProblemId::Ms1 | ProblemId::Ms3 => {
                let e = (-t).exp();
                let mut g = [
                    PI * (PI * a).cos() * (PI * b).sin() * e,
                    PI * (PI * a).sin() * (PI * b).cos() * e,
                ];
                if self.id == ProblemId::Ms3 {
                    let c = CHECKER * 4.0 * PI * (-CHECKER_RATE * t).exp();
                    g[0] += c * (4.0 * PI * a).cos() * (4.0 * PI * b).sin();
                    g[1] += c * (4.0 * PI * a).sin() * (4.0 * PI * b).cos();
                }
                g
            }
            ProblemId::Ms2 => {
                let s = 1.0 + t;
                [
                    (1.0 - 2.0 * a) * b * (1.0 - b) * s,
                    a * (1.0 - a) * (1.0 - 2.0 * b) * s,
                ]
            }
        }
    }

    pub fn f(&self, x: Point, t: f64) -> f64 {
        match self.id {
            // the checkerboard mode solves the homogeneous equation
            ProblemId::Ms1 | ProblemId::Ms3 => (2.0 * PI * PI - 1.0) * sines(x) * (-t).exp(),
            ProblemId::Ms2 => {
                let [a, b] = x;
                bubble(x) + 2.0 * (a * (1.0 - a) + b * (1.0 - b)) * (1.0 + t)
            }
        }
    }

    pub fn u0(&self, x: Point) -> f64 {
        self.u(x, 0.0)
    }
}

fn sines(x: Point) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

fn checker(x: Point) -> f64 {
    (4.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).sin()
}

fn bubble(x: Point) -> f64 {
    x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])
}
