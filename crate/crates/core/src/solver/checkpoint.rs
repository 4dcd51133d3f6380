//! Plain-text dump of the discrete solution coefficients.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Initial coefficients and temporal modes per step.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub initial: Vec<f64>,
    pub modes: Vec<Vec<Vec<f64>>>,
}

pub fn write_checkpoint(cp: &Checkpoint, w: &mut impl Write) -> Result<()> {
    writeln!(w, "heatflux-solution 1")?;
    writeln!(w, "steps {}", cp.modes.len())?;
    write_vec(w, "initial", &cp.initial)?;
    for (n, step) in cp.modes.iter().enumerate() {
        writeln!(w, "step {} {}", n + 1, step.len())?;
        for m in step {
            write_vec(w, "mode", m)?;
        }
    }
    Ok(())
}

fn write_vec(w: &mut impl Write, tag: &str, v: &[f64]) -> Result<()> {
    write!(w, "{tag} {}", v.len())?;
    for x in v {
        // round-trip exact
        write!(w, " {x:e}")?;
    }
    writeln!(w)?;
    Ok(())
}

pub fn read_checkpoint(r: impl BufRead) -> Result<Checkpoint> {
    let mut lines = r.lines().enumerate();
    let mut next = |want: &str| -> Result<(usize, Vec<String>)> {
        let (i, l) = lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("unexpected end, expected {want}"),
        })?;
        let toks: Vec<String> = l?.split_whitespace().map(str::to_owned).collect();
        if toks.first().map(String::as_str) != Some(want) {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected {want}"),
            });
        }
        Ok((i + 1, toks))
    };
    let (_, head) = next("heatflux-solution")?;
    if head.get(1).map(String::as_str) != Some("1") {
        return Err(Error::Parse {
            line: 1,
            msg: "unsupported version".into(),
        });
    }
    let (l, s) = next("steps")?;
    let steps = parse_usize(s.get(1), l)?;
    let (l, v) = next("initial")?;
    let initial = parse_vec(&v, l)?;
    let mut modes = Vec::with_capacity(steps);
    for n in 1..=steps {
        let (l, s) = next("step")?;
        if parse_usize(s.get(1), l)? != n {
            return Err(Error::Parse {
                line: l,
                msg: "steps out of order".into(),
            });
        }
        let nm = parse_usize(s.get(2), l)?;
        let mut step = Vec::with_capacity(nm);
        for _ in 0..nm {
            let (l, v) = next("mode")?;
            step.push(parse_vec(&v, l)?);
        }
        modes.push(step);
    }
    Ok(Checkpoint { initial, modes })
}

fn parse_usize(s: Option<&String>, line: usize) -> Result<usize> {
    s.and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
        line,
        msg: "expected a count".into(),
    })
}

fn parse_vec(toks: &[String], line: usize) -> Result<Vec<f64>> {
    let n = parse_usize(toks.get(1), line)?;
    if toks.len() != n + 2 {
        return Err(Error::Parse {
            line,
            msg: format!("expected {n} values"),
        });
    }
    toks[2..]
        .iter()
        .map(|t| {
            t.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad number {t}"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let cp = Checkpoint {
            initial: vec![0.1, -1.0 / 3.0, 1e-300],
            modes: vec![
                vec![vec![1.0, 2.0, std::f64::consts::PI]],
                vec![vec![0.0; 3], vec![-7.25e10, 1.0, 0.5]],
            ],
        };
        let mut buf = Vec::new();
        write_checkpoint(&cp, &mut buf).unwrap();
        assert_eq!(read_checkpoint(&buf[..]).unwrap(), cp);
    }

    #[test]
    fn truncated_input_is_rejected() {
        let txt = "heatflux-solution 1\nsteps 1\ninitial 1 0.5\n";
        assert!(matches!(
            read_checkpoint(txt.as_bytes()),
            Err(Error::Parse { .. })
        ));
    }
}
