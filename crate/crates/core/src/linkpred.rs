//! Non-edge scoring for link prediction: `mu_bar` plus four
//! common-neighbour baselines, and Pearson correlations between them.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::centrality::{Analyzer, PairSet};
use crate::display::format_f64;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Default blend for the common-neighbour-centrality index.
pub const DEFAULT_ALPHA_C: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SortDirection {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    /// Weighted edge centrality `a beta` (edges only).
    Mu,
    /// `mu_bar = beta`.
    KemenyDerivative,
    Jaccard,
    AdamicAdar,
    ResourceAllocation,
    CommonNeighbourCentrality {
        alpha_c: f64,
    },
}

impl Measure {
    pub fn id(&self) -> &'static str {
        match self {
            Measure::Mu => "mu",
            Measure::KemenyDerivative => "kemeny-derivative",
            Measure::Jaccard => "jaccard",
            Measure::AdamicAdar => "adamic-adar",
            Measure::ResourceAllocation => "resource-allocation",
            Measure::CommonNeighbourCentrality { .. } => "common-neighbour-centrality",
        }
    }

    /// The five link-prediction measures in a fixed order.
    pub fn all(alpha_c: f64) -> [Measure; 5] {
        [
            Measure::KemenyDerivative,
            Measure::Jaccard,
            Measure::AdamicAdar,
            Measure::ResourceAllocation,
            Measure::CommonNeighbourCentrality { alpha_c },
        ]
    }

    /// Likely-link order: low `mu_bar` first, high baseline scores first.
    pub fn likely_direction(&self) -> SortDirection {
        match self {
            Measure::Mu | Measure::KemenyDerivative => SortDirection::Ascending,
            _ => SortDirection::Descending,
        }
    }

    pub fn parse(s: &str, alpha_c: f64) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "mu" => Measure::Mu,
            "kd" | "kemeny-derivative" | "mu-bar" => Measure::KemenyDerivative,
            "jaccard" => Measure::Jaccard,
            "aa" | "adamic-adar" => Measure::AdamicAdar,
            "ra" | "resource-allocation" => Measure::ResourceAllocation,
            "cnc" | "common-neighbour-centrality" => Measure::CommonNeighbourCentrality { alpha_c },
            other => return Err(Error::InvalidArgument(format!("unknown measure '{other}'"))),
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, DEFAULT_ALPHA_C)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreEntry {
    /// 0-based, `p < q`.
    pub p: usize,
    pub q: usize,
    pub score: f64,
}

/// Scores over a pair universe, stored in `(p, q)` order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreTable {
    pub measure: &'static str,
    pub direction: SortDirection,
    pub entries: Vec<ScoreEntry>,
}

impl ScoreTable {
    pub fn new(
        measure: &'static str,
        direction: SortDirection,
        mut entries: Vec<ScoreEntry>,
    ) -> Self {
        entries.sort_by_key(|e| (e.p, e.q));
        Self {
            measure,
            direction,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn with_direction(mut self, direction: SortDirection) -> Self {
        self.direction = direction;
        self
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score).collect()
    }

    /// Entries in ranking order; ties broken by `(p, q)`.
    pub fn ranked(&self) -> Vec<ScoreEntry> {
        let mut out = self.entries.clone();
        out.sort_by(|a, b| {
            let by_score = match self.direction {
                SortDirection::Ascending => a.score.total_cmp(&b.score),
                SortDirection::Descending => b.score.total_cmp(&a.score),
            };
            by_score.then_with(|| (a.p, a.q).cmp(&(b.p, b.q)))
        });
        out
    }

    /// First `k` ranked entries; the flag is set when `k` exceeded the table.
    pub fn top_k(&self, k: usize) -> Result<(Vec<ScoreEntry>, bool)> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let mut ranked = self.ranked();
        let truncated = k > ranked.len();
        ranked.truncate(k);
        Ok((ranked, truncated))
    }

    /// `rank,p,q,score` with 1-based node ids.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "rank,p,q,{}", self.measure)?;
        for (i, e) in self.ranked().iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                i + 1,
                e.p + 1,
                e.q + 1,
                format_f64(e.score)
            )?;
        }
        Ok(())
    }
}

fn neighbour_sets(g: &WeightedGraph) -> Vec<Vec<usize>> {
    (0..g.node_count())
        .map(|i| {
            g.neighbors(i)
                .iter()
                .map(|&(j, _)| j)
                .filter(|&j| j != i)
                .collect()
        })
        .collect()
}

// Both lists are sorted.
fn common(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn hops(nbrs: &[Vec<usize>], source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; nbrs.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &u in &nbrs[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Baseline score of one pair from unweighted neighbour sets.
fn baseline(measure: Measure, nbrs: &[Vec<usize>], p: usize, q: usize, dist: usize) -> f64 {
    let shared = common(&nbrs[p], &nbrs[q]);
    match measure {
        Measure::Jaccard => {
            let union = nbrs[p].len() + nbrs[q].len() - shared.len();
            if union == 0 {
                0.0
            } else {
                shared.len() as f64 / union as f64
            }
        }
        // A shared neighbour has degree >= 2, so ln|N(z)| > 0.
        Measure::AdamicAdar => shared
            .iter()
            .map(|&z| nbrs[z].len())
            .filter(|&k| k > 1)
            .map(|k| 1.0 / (k as f64).ln())
            .sum(),
        Measure::ResourceAllocation => shared.iter().map(|&z| 1.0 / nbrs[z].len() as f64).sum(),
        Measure::CommonNeighbourCentrality { alpha_c } => {
            let n = nbrs.len() as f64;
            alpha_c * shared.len() as f64 + (1.0 - alpha_c) * n / dist as f64
        }
        Measure::Mu | Measure::KemenyDerivative => unreachable!(),
    }
}

/// Scores every non-edge with `measure`, in the measure's likely-link order.
pub fn score_non_edges(an: &Analyzer, measure: Measure) -> Result<ScoreTable> {
    score_pairs(an, measure, PairSet::NonEdges)
}

pub fn score_pairs(an: &Analyzer, measure: Measure, set: PairSet) -> Result<ScoreTable> {
    let pairs = an.pairs(set);
    let entries: Vec<ScoreEntry> = match measure {
        Measure::Mu | Measure::KemenyDerivative => an
            .analyze_pairs(&pairs)?
            .into_iter()
            .map(|pa| ScoreEntry {
                p: pa.p,
                q: pa.q,
                score: if measure == Measure::Mu {
                    pa.mu()
                } else {
                    pa.mu_bar()
                },
            })
            .collect(),
        _ => {
            if let Measure::CommonNeighbourCentrality { alpha_c } = measure {
                if !(0.0..=1.0).contains(&alpha_c) {
                    return Err(Error::InvalidArgument(format!(
                        "alpha_c = {alpha_c} not in [0, 1]"
                    )));
                }
            }
            let nbrs = neighbour_sets(an.graph());
            let needs_dist = matches!(measure, Measure::CommonNeighbourCentrality { .. });
            let mut entries = Vec::with_capacity(pairs.len());
            let mut current = usize::MAX;
            let mut dist = Vec::new();
            for &(p, q) in &pairs {
                if needs_dist && p != current {
                    dist = hops(&nbrs, p);
                    current = p;
                }
                let d = if needs_dist { dist[q] } else { 0 };
                entries.push(ScoreEntry {
                    p,
                    q,
                    score: baseline(measure, &nbrs, p, q, d),
                });
            }
            entries
        }
    };
    Ok(ScoreTable::new(
        measure.id(),
        measure.likely_direction(),
        entries,
    ))
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return f64::NAN;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Pearson coefficients of raw scores; unit diagonal, NaN for a constant
/// table.
pub fn correlation_matrix(tables: &[ScoreTable]) -> Result<Vec<Vec<f64>>> {
    if let Some(first) = tables.first() {
        for t in tables {
            let same = t.entries.len() == first.entries.len()
                && t.entries
                    .iter()
                    .zip(&first.entries)
                    .all(|(a, b)| (a.p, a.q) == (b.p, b.q));
            if !same {
                return Err(Error::UniverseMismatch);
            }
        }
    }
    let scores: Vec<Vec<f64>> = tables.iter().map(ScoreTable::scores).collect();
    let k = tables.len();
    let mut m = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let r = pearson(&scores[i], &scores[j]);
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    Ok(m)
}

pub fn write_correlation_csv<W: Write>(
    tables: &[ScoreTable],
    matrix: &[Vec<f64>],
    mut out: W,
) -> Result<()> {
    write!(out, "measure")?;
    for t in tables {
        write!(out, ",{}", t.measure)?;
    }
    writeln!(out)?;
    for (t, row) in tables.iter().zip(matrix) {
        write!(out, "{}", t.measure)?;
        for x in row {
            write!(out, ",{}", format_f64(*x))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::solver::SolverOptions;

    fn analyzer(g: &WeightedGraph) -> Analyzer {
        Analyzer::new(g, SolverOptions::default()).unwrap()
    }

    #[test]
    fn p3_jaccard() {
        let an = analyzer(&generators::path(3));
        let t = score_non_edges(&an, Measure::Jaccard).unwrap();
        assert_eq!(
            t.entries,
            vec![ScoreEntry {
                p: 0,
                q: 2,
                score: 1.0
            }]
        );
        let t = score_non_edges(&an, Measure::AdamicAdar).unwrap();
        assert!((t.entries[0].score - 1.0 / 2f64.ln()).abs() < 1e-15);
        let t = score_non_edges(&an, Measure::ResourceAllocation).unwrap();
        assert_eq!(t.entries[0].score, 0.5);
        let t = score_non_edges(&an, Measure::CommonNeighbourCentrality { alpha_c: 0.8 }).unwrap();
        assert!((t.entries[0].score - (0.8 + 0.2 * 3.0 / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn baselines_vanish_without_common_neighbours() {
        let an = analyzer(&generators::path(6));
        for m in [
            Measure::Jaccard,
            Measure::AdamicAdar,
            Measure::ResourceAllocation,
        ] {
            for e in score_non_edges(&an, m).unwrap().entries {
                assert_eq!(e.score == 0.0, e.q - e.p > 2, "{m:?} {e:?}");
            }
        }
    }

    #[test]
    fn star_non_edges_tie() {
        let an = analyzer(&generators::star(10));
        let t = score_non_edges(&an, Measure::KemenyDerivative).unwrap();
        assert_eq!(t.len(), 36);
        let first = t.entries[0].score;
        assert!(t
            .entries
            .iter()
            .all(|e| (e.score - first).abs() <= 1e-12 * first));
        let (top, truncated) = t.top_k(40).unwrap();
        assert!(truncated && top.len() == 36);
        assert!(t.top_k(0).is_err());
    }

    #[test]
    fn ranking_ties_are_lexicographic() {
        let t = ScoreTable::new(
            "x",
            SortDirection::Descending,
            vec![
                ScoreEntry {
                    p: 2,
                    q: 3,
                    score: 1.0,
                },
                ScoreEntry {
                    p: 0,
                    q: 3,
                    score: 1.0,
                },
                ScoreEntry {
                    p: 0,
                    q: 1,
                    score: 0.5,
                },
            ],
        );
        let ranked: Vec<_> = t.ranked().iter().map(|e| (e.p, e.q)).collect();
        assert_eq!(ranked, vec![(0, 3), (2, 3), (0, 1)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "rank,p,q,x\n1,1,4,1\n2,3,4,1\n3,1,2,0.5\n"
        );
    }

    #[test]
    fn correlations() {
        let an = analyzer(&generators::grid(3, 3));
        let a = score_non_edges(&an, Measure::KemenyDerivative).unwrap();
        let mut neg = a.clone();
        for e in &mut neg.entries {
            e.score = -e.score;
        }
        let m = correlation_matrix(&[a.clone(), neg]).unwrap();
        assert_eq!(m[0][0], 1.0);
        assert!((m[0][1] + 1.0).abs() < 1e-12);
        let edges = score_pairs(&an, Measure::Mu, PairSet::Edges).unwrap();
        assert!(matches!(
            correlation_matrix(&[a, edges]),
            Err(Error::UniverseMismatch)
        ));
    }

    #[test]
    fn parse_ids() {
        assert_eq!("kd".parse::<Measure>().unwrap(), Measure::KemenyDerivative);
        assert_eq!(
            Measure::parse("cnc", 0.5).unwrap(),
            Measure::CommonNeighbourCentrality { alpha_c: 0.5 }
        );
        assert!("pagerank".parse::<Measure>().is_err());
    }
}
