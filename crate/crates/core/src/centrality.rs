//! Pair measures derived from the two quadratic forms
//! `alpha = w^T S^{-1} w` and `beta = w^T S^{-1} D S^{-1} w`, `w = e_p - e_q`.
//!
//! Moving a fraction `t` of the weight `a` of `{p, q}` onto the loops at `p`
//! and `q` changes Kemeny's constant to
//!
//! ```text
//! kappa(t) = kappa + t a beta / (1 - t a alpha)
//! ```
//!
//! so `mu = a beta` is the derivative at `t = 0`, `c = mu / (1 - a alpha)` is
//! the change once the edge is gone, and cut-edges are exactly the edges
//! with `a alpha = 1`.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::solver::{SolverContext, SolverOptions};
use crate::value::Extended;

/// `|1 - t a alpha|` below this is treated as the pole.
pub const POLE_TOL: f64 = 1e-12;

/// Everything known about one node pair (0-based, `p < q`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairAnalysis {
    pub p: usize,
    pub q: usize,
    /// Edge weight, 0 for a non-edge.
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
    pub is_bridge: bool,
}

impl PairAnalysis {
    pub fn is_edge(&self) -> bool {
        self.a > 0.0
    }

    /// `a beta`; zero on non-edges.
    pub fn mu(&self) -> f64 {
        self.a * self.beta
    }

    /// `beta`, meaningful for non-edges as well.
    pub fn mu_bar(&self) -> f64 {
        self.beta
    }

    /// `i`-th derivative at `t = 0`: `i! a^i alpha^(i-1) beta` (weighted)
    /// or `i! a^(i-1) alpha^(i-1) beta` (unweighted).
    pub fn mu_derivative(&self, order: u32, weighted: bool) -> Result<f64> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "derivative order must be >= 1".into(),
            ));
        }
        let factorial: f64 = (1..=order).map(f64::from).product();
        let aa = (self.a * self.alpha).powi(order as i32 - 1);
        let lead = if weighted { self.a } else { 1.0 };
        Ok(factorial * lead * aa * self.beta)
    }

    /// Kemeny increase after deleting the edge and moving its weight onto
    /// the loops; infinite on cut-edges.
    pub fn removal_measure(&self) -> Result<Extended> {
        if !self.is_edge() {
            return Err(Error::NonEdge {
                p: self.p + 1,
                q: self.q + 1,
            });
        }
        if self.is_bridge {
            return Ok(Extended::Infinite);
        }
        let denom = 1.0 - self.a * self.alpha;
        if denom.abs() < POLE_TOL {
            return Ok(Extended::Infinite);
        }
        Ok(Extended::Finite(self.mu() / denom))
    }

    /// `beta`: magnitude of `d kappa / dt` for `A - t w w^T` at `t = 0`
    /// (the signed derivative is `-beta`).
    pub fn condition_number(&self) -> f64 {
        self.beta
    }

    /// `|a alpha - 1|`, zero up to rounding on cut-edges.
    pub fn bridge_residual(&self) -> f64 {
        (self.a * self.alpha - 1.0).abs()
    }

    /// `t -> kappa(t)`; `weighted` scales the perturbation by `a`.
    pub fn curve(&self, kappa0: f64, weighted: bool) -> PerturbationCurve {
        PerturbationCurve {
            kappa0,
            scale: if weighted { self.a } else { 1.0 },
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

/// `kappa(t) = kappa0 + t s beta / (1 - t s alpha)` with `s = a` (weighted)
/// or `s = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationCurve {
    pub kappa0: f64,
    pub scale: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl PerturbationCurve {
    /// `t* = 1 / (s alpha)`; `None` when the curve is linear.
    pub fn pole(&self) -> Option<f64> {
        let sa = self.scale * self.alpha;
        (sa != 0.0).then(|| 1.0 / sa)
    }

    fn denominator(&self, t: f64) -> Result<f64> {
        let den = 1.0 - t * self.scale * self.alpha;
        if den.abs() < POLE_TOL {
            return Err(Error::Pole { t });
        }
        Ok(den)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        let den = self.denominator(t)?;
        Ok(self.kappa0 + t * self.scale * self.beta / den)
    }

    /// `i! s^i alpha^(i-1) beta / (1 - t s alpha)^(i+1)`.
    pub fn derivative(&self, t: f64, order: u32) -> Result<f64> {
        if order == 0 {
            return self.value(t);
        }
        let den = self.denominator(t)?;
        let factorial: f64 = (1..=order).map(f64::from).product();
        let sa = self.scale * self.alpha;
        Ok(
            factorial * self.scale * self.beta * sa.powi(order as i32 - 1)
                / den.powi(order as i32 + 1),
        )
    }
}

/// Shifted quantities for `S_r = S + r D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regularized {
    pub r: f64,
    pub alpha_r: f64,
    /// `w^T S_r^{-1} D S_r^{-1} w`.
    pub beta_r: f64,
    /// `a beta_r`.
    pub mu_r: f64,
    /// `mu_r / (1 - a alpha_r)`; `None` for a non-edge.
    pub c_r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSet {
    Edges,
    NonEdges,
    All,
}

/// A graph together with its preprocessed solver and cut-edge set.
#[derive(Debug)]
pub struct Analyzer {
    graph: WeightedGraph,
    ctx: SolverContext,
    bridges: BTreeSet<(usize, usize)>,
    kemeny: OnceLock<f64>,
}

impl Analyzer {
    pub fn new(g: &WeightedGraph, options: SolverOptions) -> Result<Self> {
        let ctx = SolverContext::preprocess(g, options)?;
        let bridges = g.bridges()?.into_iter().collect();
        Ok(Self {
            graph: g.clone(),
            ctx,
            bridges,
            kemeny: OnceLock::new(),
        })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn context(&self) -> &SolverContext {
        &self.ctx
    }

    pub fn bridges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bridges.iter().copied()
    }

    pub fn is_bridge(&self, p: usize, q: usize) -> bool {
        self.bridges.contains(&(p.min(q), p.max(q)))
    }

    /// `sum_i d_i (S^{-1})_ii - 1`, from `n` solves.
    pub fn kemeny(&self) -> f64 {
        *self.kemeny.get_or_init(|| {
            let diag = self.ctx.inverse_diagonals();
            self.graph
                .degrees()
                .iter()
                .zip(&diag)
                .map(|(d, (s, _))| d * s)
                .sum::<f64>()
                - 1.0
        })
    }

    fn record(&self, p: usize, q: usize, (alpha, beta): (f64, f64)) -> PairAnalysis {
        let (p, q) = (p.min(q), p.max(q));
        PairAnalysis {
            p,
            q,
            a: self.graph.weight(p, q),
            alpha,
            beta,
            is_bridge: self.is_bridge(p, q),
        }
    }

    pub fn analyze_pair(&self, p: usize, q: usize) -> Result<PairAnalysis> {
        let forms = self.ctx.quadratic_forms(p, q)?;
        Ok(self.record(p, q, forms))
    }

    /// Like [`condition_number`](PairAnalysis::condition_number) but zero for
    /// `p == q`.
    pub fn condition_number(&self, p: usize, q: usize) -> Result<f64> {
        if p == q {
            if p >= self.graph.node_count() {
                return Err(Error::NodeOutOfRange {
                    id: p + 1,
                    n: self.graph.node_count(),
                });
            }
            return Ok(0.0);
        }
        Ok(self.analyze_pair(p, q)?.condition_number())
    }

    pub fn regularized(&self, p: usize, q: usize, r: f64) -> Result<Regularized> {
        let (alpha_r, beta_r) = self.ctx.regularized_forms(p, q, r)?;
        let a = self.graph.weight(p, q);
        let mu_r = a * beta_r;
        Ok(Regularized {
            r,
            alpha_r,
            beta_r,
            mu_r,
            c_r: (a > 0.0).then(|| mu_r / (1.0 - a * alpha_r)),
        })
    }

    fn require_bridge(&self, p: usize, q: usize) -> Result<PairAnalysis> {
        let pa = self.analyze_pair(p, q)?;
        if !pa.is_bridge {
            return Err(Error::NotABridge { p: p + 1, q: q + 1 });
        }
        Ok(pa)
    }

    /// Filtered measure of a cut-edge, `2 (Dx)^T S^{-1} (Dx) / mu` with
    /// `x = S^{-1} w`.
    pub fn filtered_cf(&self, p: usize, q: usize) -> Result<f64> {
        let pa = self.require_bridge(p, q)?;
        let t = self.ctx.third_order_form(p, q)?;
        Ok(2.0 * t / pa.mu())
    }

    /// `lim_{r -> 0} (1/r - c_r)` for a cut-edge, `(Dx)^T S^{-1} (Dx) / beta`.
    pub fn filtered_cf_limit(&self, p: usize, q: usize) -> Result<f64> {
        let pa = self.require_bridge(p, q)?;
        let t = self.ctx.third_order_form(p, q)?;
        Ok(t / pa.beta)
    }

    /// Pairs `p < q` of the requested kind, lexicographic.
    pub fn pairs(&self, set: PairSet) -> Vec<(usize, usize)> {
        let n = self.graph.node_count();
        let mut out = Vec::new();
        for p in 0..n {
            for q in p + 1..n {
                let edge = self.graph.has_edge(p, q);
                let keep = match set {
                    PairSet::Edges => edge,
                    PairSet::NonEdges => !edge,
                    PairSet::All => true,
                };
                if keep {
                    out.push((p, q));
                }
            }
        }
        out
    }

    pub fn analyze_pairs(&self, pairs: &[(usize, usize)]) -> Result<Vec<PairAnalysis>> {
        let forms = self.ctx.quadratic_forms_batch(pairs)?;
        Ok(pairs
            .iter()
            .zip(forms)
            .map(|(&(p, q), f)| self.record(p, q, f))
            .collect())
    }

    /// Every edge, ordered by `(p, q)`.
    pub fn batch_edges(&self) -> Result<Vec<PairAnalysis>> {
        self.analyze_pairs(&self.pairs(PairSet::Edges))
    }

    /// Every pair (or every edge when `include_non_edges` is false).
    pub fn batch_pairs(&self, include_non_edges: bool) -> Result<Vec<PairAnalysis>> {
        let set = if include_non_edges {
            PairSet::All
        } else {
            PairSet::Edges
        };
        self.analyze_pairs(&self.pairs(set))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    fn p3() -> Analyzer {
        Analyzer::new(&generators::path(3), SolverOptions::banded()).unwrap()
    }

    #[test]
    fn p3_pairs() {
        let an = p3();
        let pa = an.analyze_pair(0, 1).unwrap();
        assert!(pa.is_bridge && pa.a == 1.0);
        assert!(close(pa.alpha, 1.0, 1e-14) && close(pa.beta, 0.75, 1e-14));
        assert!(close(pa.mu(), 0.75, 1e-14));
        let pa = an.analyze_pair(2, 0).unwrap();
        assert!(!pa.is_bridge && pa.a == 0.0 && pa.mu() == 0.0);
        assert!(close(pa.mu_bar(), 2.0, 1e-14));
        assert!(close(an.kemeny(), 1.5, 1e-14));
    }

    #[test]
    fn derivatives_and_curve() {
        let an = p3();
        let pa = an.analyze_pair(0, 1).unwrap();
        assert!(close(pa.mu_derivative(2, true).unwrap(), 1.5, 1e-14));
        assert_eq!(pa.mu_derivative(1, true).unwrap(), pa.mu());
        assert!(pa.mu_derivative(0, true).is_err());
        let curve = pa.curve(an.kemeny(), true);
        assert!(close(curve.value(0.5).unwrap(), 2.25, 1e-13));
        assert_eq!(curve.value(0.0).unwrap(), an.kemeny());
        assert!(matches!(curve.value(1.0), Err(Error::Pole { .. })));
        assert!(close(curve.derivative(0.0, 1).unwrap(), pa.mu(), 1e-15));

        let k2 = Analyzer::new(&generators::path(2), SolverOptions::banded()).unwrap();
        let pa = k2.analyze_pair(0, 1).unwrap();
        assert!(close(pa.mu_derivative(3, true).unwrap(), 3.0, 1e-14));
    }

    #[test]
    fn removal_measure_on_c4() {
        let an = Analyzer::new(&generators::cycle(4), SolverOptions::banded()).unwrap();
        let pa = an.analyze_pair(0, 1).unwrap();
        let c = pa.removal_measure().unwrap().finite().unwrap();
        assert!(close(c, 2.5, 1e-12), "{c}");
        assert!(c >= pa.mu());
        assert_eq!(
            p3().analyze_pair(0, 1).unwrap().removal_measure().unwrap(),
            Extended::Infinite
        );
        assert!(matches!(
            p3().analyze_pair(0, 2).unwrap().removal_measure(),
            Err(Error::NonEdge { p: 1, q: 3 })
        ));
    }

    #[test]
    fn condition_numbers() {
        let an = p3();
        assert!(close(an.condition_number(0, 1).unwrap(), 0.75, 1e-14));
        assert!(close(an.condition_number(0, 2).unwrap(), 2.0, 1e-14));
        assert_eq!(an.condition_number(1, 1).unwrap(), 0.0);
    }

    #[test]
    fn filtered_measures_on_k2() {
        let an = Analyzer::new(&generators::path(2), SolverOptions::banded()).unwrap();
        assert!(close(an.filtered_cf(0, 1).unwrap(), 1.0, 1e-14));
        assert!(close(an.filtered_cf_limit(0, 1).unwrap(), 0.5, 1e-14));
        let c4 = Analyzer::new(&generators::cycle(4), SolverOptions::banded()).unwrap();
        assert!(matches!(
            c4.filtered_cf(0, 1),
            Err(Error::NotABridge { .. })
        ));
    }

    #[test]
    fn regularized_k2_closed_form() {
        // c_r = 2 / (r (2 + r)) on a single edge.
        let an = Analyzer::new(&generators::path(2), SolverOptions::banded()).unwrap();
        let r = 0.25;
        let reg = an.regularized(0, 1, r).unwrap();
        assert!(close(reg.c_r.unwrap(), 2.0 / (r * (2.0 + r)), 1e-13));
        assert!(an.regularized(0, 1, -1.0).is_err());
    }

    #[test]
    fn batches_match_single_pairs() {
        let an = Analyzer::new(&generators::grid(3, 4), SolverOptions::banded()).unwrap();
        let all = an.batch_pairs(true).unwrap();
        assert_eq!(all.len(), 66);
        for pa in &all {
            assert_eq!(*pa, an.analyze_pair(pa.p, pa.q).unwrap());
        }
        assert_eq!(an.batch_edges().unwrap().len(), an.graph().edge_count());
    }
}
