//! Global sensitivity of Kemeny's constant,
//! `zeta = (n trace(M) - 1^T M 1) / n^2` with `M = S^{-1} D S^{-1}`.

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::centrality::{Analyzer, PairSet};
use crate::display::format_f64;
use crate::error::{Error, Result};
use crate::generators;
use crate::graph::WeightedGraph;
use crate::solver::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub n: usize,
    pub trace: f64,
    /// `1^T M 1`.
    pub total: f64,
    pub zeta_formula: f64,
    /// `sum_{p,q} mu_bar(p, q) / n^2` over ordered pairs, `mu_bar(p, p) = 0`.
    /// Equals `2 zeta_formula`.
    pub zeta_pair_mean: f64,
}

/// Both routes: `n` column solves for the formula, every pair for the mean.
pub fn global_sensitivity(an: &Analyzer) -> Result<SensitivityReport> {
    let ctx = an.context();
    let n = ctx.node_count();
    let trace: f64 = ctx.inverse_diagonals().iter().map(|&(_, m)| m).sum();
    let y = ctx.inverse_times_ones();
    let total = ctx.degree_weighted_norm(&y);
    let nf = n as f64;
    let pairs = an.pairs(PairSet::All);
    let forms = ctx.quadratic_forms_batch(&pairs)?;
    let pair_sum: f64 = forms.iter().map(|&(_, beta)| beta).sum();
    Ok(SensitivityReport {
        n,
        trace,
        total,
        zeta_formula: (nf * trace - total) / (nf * nf),
        zeta_pair_mean: 2.0 * pair_sum / (nf * nf),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Star,
    Path,
    Cycle,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Star => "star",
            Family::Path => "path",
            Family::Cycle => "cycle",
        }
    }

    pub fn build(self, n: usize) -> Result<WeightedGraph> {
        let min = if self == Family::Cycle { 3 } else { 2 };
        if n < min {
            return Err(Error::InvalidArgument(format!(
                "{} family needs n >= {min}",
                self.name()
            )));
        }
        Ok(match self {
            Family::Star => generators::star(n),
            Family::Path => generators::path(n),
            Family::Cycle => generators::cycle(n),
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "star" => Ok(Family::Star),
            "path" => Ok(Family::Path),
            "cycle" | "circulant" => Ok(Family::Cycle),
            other => Err(Error::InvalidArgument(format!("unknown family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub family: Family,
    pub n: usize,
    pub zeta: f64,
    pub zeta_pair_mean: f64,
}

pub fn sensitivity_curve(
    family: Family,
    ns: &[usize],
    options: SolverOptions,
) -> Result<Vec<CurvePoint>> {
    ns.iter()
        .map(|&n| {
            let g = family.build(n)?;
            let report = global_sensitivity(&Analyzer::new(&g, options)?)?;
            Ok(CurvePoint {
                family,
                n,
                zeta: report.zeta_formula,
                zeta_pair_mean: report.zeta_pair_mean,
            })
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(points: &[CurvePoint], mut out: W) -> Result<()> {
    writeln!(out, "family,n,zeta,zeta_pair_mean")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            p.family.name(),
            p.n,
            format_f64(p.zeta),
            format_f64(p.zeta_pair_mean)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    fn report(g: &WeightedGraph) -> SensitivityReport {
        global_sensitivity(&Analyzer::new(g, SolverOptions::banded()).unwrap()).unwrap()
    }

    #[test]
    fn p3_values() {
        let r = report(&generators::path(3));
        assert!(close(r.trace, 1.9375, 1e-14));
        assert!(close(r.total, 2.3125, 1e-14));
        assert!(close(r.zeta_formula, 3.5 / 9.0, 1e-14));
        assert!(close(r.zeta_pair_mean, 7.0 / 9.0, 1e-14));
    }

    #[test]
    fn k2_values() {
        let r = report(&generators::path(2));
        assert!(close(r.zeta_formula, 0.125, 1e-15));
        assert!(close(r.zeta_pair_mean, 0.25, 1e-15));
    }

    #[test]
    fn curve_csv() {
        let pts = sensitivity_curve(Family::Path, &[3, 4], SolverOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("family,n,zeta,zeta_pair_mean\npath,3,"));
        assert_eq!(text.lines().count(), 3);
        assert!("ring".parse::<Family>().is_err());
        assert!(Family::Cycle.build(2).is_err());
    }
}
