//! Display transforms for score columns: affine rescaling to `[0, 1]`,
//! an optional square root on top, and fixed-width histograms.

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    None,
    Linear,
    SqrtLinear,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalization::None),
            "linear" => Ok(Normalization::Linear),
            "sqrt-linear" => Ok(Normalization::SqrtLinear),
            other => Err(Error::InvalidArgument(format!(
                "unknown normalization '{other}'"
            ))),
        }
    }
}

/// Shortest round-trip text for `x`, switching to exponent notation for
/// magnitudes outside `[1e-4, 1e16)`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn range(values: &[f64]) -> Option<(f64, f64)> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo <= hi).then_some((lo, hi))
}

// Ranges this narrow are rounding noise around a single value.
fn degenerate(lo: f64, hi: f64) -> bool {
    hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1.0)
}

/// `x -> (x - min) / (max - min)`, then `sqrt` for `SqrtLinear`. A
/// degenerate range maps everything to 0.
pub fn normalize(values: &[f64], mode: Normalization) -> Vec<f64> {
    if mode == Normalization::None {
        return values.to_vec();
    }
    let Some((lo, hi)) = range(values) else {
        return Vec::new();
    };
    let linear: Vec<f64> = if degenerate(lo, hi) {
        vec![0.0; values.len()]
    } else {
        values.iter().map(|x| (x - lo) / (hi - lo)).collect()
    };
    match mode {
        Normalization::SqrtLinear => linear.into_iter().map(f64::sqrt).collect(),
        _ => linear,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins over `[min, max]`, last bin closed. All values of a
    /// degenerate range fall into the first bin.
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidArgument(
                "histogram needs at least one bin".into(),
            ));
        }
        let (lo, hi) = range(values).unwrap_or((0.0, 1.0));
        let mut counts = vec![0; bins];
        if degenerate(lo, hi) {
            let edges = (0..=bins).map(|_| lo).collect::<Vec<_>>();
            counts[0] = values.len();
            return Ok(Self { edges, counts });
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins)
            .map(|k| if k == bins { hi } else { lo + k as f64 * width })
            .collect();
        for &x in values {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "bin,lower,upper,count")?;
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                k + 1,
                format_f64(self.edges[k]),
                format_f64(self.edges[k + 1]),
                c
            )?;
        }
        Ok(())
    }
}
