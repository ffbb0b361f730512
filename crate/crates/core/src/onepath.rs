//! Closed forms for random walks on a chain (tridiagonal `P`).
//!
//! State `i` moves right with probability `lambda[i]`, left with
//! `nu[i - 1]`, and stays with the remainder `theta[i]`. The indices follow
//! the states, `0..n`; edge `q` (1-based) joins states `q - 1` and `q`.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Above this length the stationary products are formed in log space.
const LOG_SPACE_FROM: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct OnePathSpec {
    /// `lambda_0 .. lambda_{n-2}`: forward probabilities.
    lambda: Vec<f64>,
    /// `nu_1 .. nu_{n-1}`: backward probabilities, `nu[i]` belongs to state `i + 1`.
    nu: Vec<f64>,
    theta: Vec<f64>,
}

impl OnePathSpec {
    pub fn new(lambda: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() || lambda.len() != nu.len() {
            return Err(Error::InvalidArgument(format!(
                "chain needs equally long lambda and nu (got {} and {})",
                lambda.len(),
                nu.len()
            )));
        }
        for (name, seq) in [("lambda", &lambda), ("nu", &nu)] {
            if let Some(x) = seq.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
                return Err(Error::InvalidArgument(format!(
                    "{name} entry {x} not in (0, 1]"
                )));
            }
        }
        let n = lambda.len() + 1;
        let mut theta = Vec::with_capacity(n);
        for i in 0..n {
            let right = if i + 1 < n { lambda[i] } else { 0.0 };
            let left = if i > 0 { nu[i - 1] } else { 0.0 };
            let mut t = 1.0 - right - left;
            if t < 0.0 {
                if t < -1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "state {i}: lambda + nu = {} exceeds 1",
                        right + left
                    )));
                }
                t = 0.0;
            }
            theta.push(t);
        }
        Ok(Self { lambda, nu, theta })
    }

    /// Unit weights, no loops.
    pub fn unit_path(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("chain needs n >= 2".into()));
        }
        let mut lambda = vec![0.5; n - 1];
        let mut nu = vec![0.5; n - 1];
        lambda[0] = 1.0;
        nu[n - 2] = 1.0;
        Self::new(lambda, nu)
    }

    /// Reads a graph whose only edges are `{i, i + 1}` (loops allowed).
    pub fn from_graph(g: &WeightedGraph) -> Result<Self> {
        let n = g.node_count();
        if n < 2 {
            return Err(Error::InvalidArgument("chain needs n >= 2".into()));
        }
        for (p, q, _) in g.edges() {
            if q != p + 1 {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) is not between consecutive nodes",
                    p + 1,
                    q + 1
                )));
            }
        }
        let mut lambda = Vec::with_capacity(n - 1);
        let mut nu = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let w = g.weight(i, i + 1);
            if w <= 0.0 {
                return Err(Error::Disconnected {
                    component: (i + 2..=n).collect(),
                });
            }
            lambda.push(w / g.degree(i));
            nu.push(w / g.degree(i + 1));
        }
        Self::new(lambda, nu)
    }

    /// A reversible weighted path with this transition matrix
    /// (`a_{i,i+1} = pi_i lambda_i`, loops `pi_i theta_i`, scaled by `n`).
    pub fn to_graph(&self) -> Result<WeightedGraph> {
        let pi = self.stationary();
        let n = self.len() as f64;
        let mut edges: Vec<(usize, usize, f64)> = (0..self.lambda.len())
            .map(|i| (i, i + 1, n * pi[i] * self.lambda[i]))
            .collect();
        edges.extend(
            self.theta
                .iter()
                .enumerate()
                .filter(|(_, &t)| t > 0.0)
                .map(|(i, &t)| (i, i, n * pi[i] * t)),
        );
        WeightedGraph::from_edges(self.len(), edges)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `x^T P`.
    pub fn apply_left(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let mut s = x[j] * self.theta[j];
                if j > 0 {
                    s += x[j - 1] * self.lambda[j - 1];
                }
                if j + 1 < n {
                    s += x[j + 1] * self.nu[j];
                }
                s
            })
            .collect()
    }

    /// `pi_i` proportional to `prod_{l < i} lambda_l / nu_{l+1}`.
    pub fn stationary(&self) -> Vec<f64> {
        let n = self.len();
        let mut pi = Vec::with_capacity(n);
        if n > LOG_SPACE_FROM {
            let mut acc = 0.0;
            pi.push(0.0);
            for l in 0..n - 1 {
                acc += self.lambda[l].ln() - self.nu[l].ln();
                pi.push(acc);
            }
            let top = pi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for x in pi.iter_mut() {
                *x = (*x - top).exp();
            }
        } else {
            let mut acc = 1.0;
            pi.push(1.0);
            for l in 0..n - 1 {
                acc *= self.lambda[l] / self.nu[l];
                pi.push(acc);
            }
        }
        let total: f64 = pi.iter().sum();
        for x in pi.iter_mut() {
            *x /= total;
        }
        pi
    }

    /// `sigma_k (1 - sigma_k) / (lambda_k pi_k)` for `k = 0..n-1`, with
    /// `1 - sigma_k` taken from suffix sums.
    fn terms(&self) -> Vec<f64> {
        let pi = self.stationary();
        let n = self.len();
        let mut tail = vec![0.0; n];
        let mut acc = 0.0;
        for k in (0..n).rev() {
            tail[k] = acc;
            acc += pi[k];
        }
        let mut sigma = 0.0;
        (0..n - 1)
            .map(|k| {
                sigma += pi[k];
                sigma * tail[k] / (self.lambda[k] * pi[k])
            })
            .collect()
    }

    pub fn kemeny(&self) -> f64 {
        self.terms().iter().sum()
    }

    /// Weighted centrality of edge `q` (1-based, joining states `q - 1`, `q`).
    pub fn mu(&self, q: usize) -> Result<f64> {
        if q == 0 || q >= self.len() {
            return Err(Error::NodeOutOfRange {
                id: q,
                n: self.len() - 1,
            });
        }
        Ok(self.terms()[q - 1])
    }

    /// All edge centralities, edge `q` at index `q - 1`.
    pub fn mu_all(&self) -> Vec<f64> {
        self.terms()
    }
}

/// `(2q - 1)(2n - 2q - 1) / (2(n - 1))` for the unit path on `n` nodes.
pub fn unit_path_mu(n: usize, q: usize) -> f64 {
    let (n, q) = (n as f64, q as f64);
    (2.0 * q - 1.0) * (2.0 * n - 2.0 * q - 1.0) / (2.0 * (n - 1.0))
}
