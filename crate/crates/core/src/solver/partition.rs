use crate::basis::legendre::LegendreTimeBasis;
use crate::error::{Error, Result};

/// Nodes `0 = t_0 < ... < t_N = T` and temporal degrees per interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePartition {
    nodes: Vec<f64>,
    degrees: Vec<usize>,
}

impl TimePartition {
    pub fn new(nodes: Vec<f64>, degrees: Vec<usize>) -> Result<Self> {
        if nodes.len() < 2 || degrees.len() + 1 != nodes.len() {
            return Err(Error::InvalidArgument(
                "need N+1 nodes and N degrees, N >= 1".into(),
            ));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidArgument("first node must be 0".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "nodes must be strictly increasing".into(),
            ));
        }
        Ok(Self { nodes, degrees })
    }

    pub fn uniform(t_final: f64, steps: usize, q: usize) -> Result<Self> {
        if steps == 0 || !(t_final > 0.0) {
            return Err(Error::InvalidArgument(
                "need T > 0 and at least one step".into(),
            ));
        }
        let nodes = (0..=steps)
            .map(|i| t_final * i as f64 / steps as f64)
            .collect();
        Self::new(nodes, vec![q; steps])
    }

    pub fn n_steps(&self) -> usize {
        self.degrees.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn final_time(&self) -> f64 {
        *self.nodes.last().expect("nonempty")
    }

    /// Interval `n` in `1..=N`.
    pub fn interval(&self, n: usize) -> (f64, f64) {
        (self.nodes[n - 1], self.nodes[n])
    }

    pub fn tau(&self, n: usize) -> f64 {
        self.nodes[n] - self.nodes[n - 1]
    }

    pub fn degree(&self, n: usize) -> usize {
        self.degrees[n - 1]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn time_basis(&self, n: usize) -> LegendreTimeBasis {
        let (a, b) = self.interval(n);
        LegendreTimeBasis::new(a, b, self.degree(n)).expect("valid interval")
    }
}
