use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::attribution::RankedList;
use crate::error::{argument, Error, Result};

/// Evaluation depth of a ranked-list comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Depth {
    All,
    Top(usize),
}

impl Depth {
    /// Concrete depth for lists of length `n`.
    pub fn resolve(self, n: usize) -> Result<usize> {
        match self {
            Depth::All if n > 0 => Ok(n),
            Depth::Top(k) if k >= 1 && k <= n => Ok(k),
            _ => Err(argument(format!("depth {self} is out of range for {n} features"))),
        }
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::All => f.write_str("All"),
            Depth::Top(k) => write!(f, "Top-{k}"),
        }
    }
}

impl FromStr for Depth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Depth::All);
        }
        match s.parse::<usize>() {
            Ok(k) if k > 0 => Ok(Depth::Top(k)),
            _ => Err(argument(format!(
                "depth must be `all` or a positive integer, got `{s}`"
            ))),
        }
    }
}

impl Serialize for Depth {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Depth::All => serializer.serialize_str("all"),
            Depth::Top(k) => serializer.serialize_u64(*k as u64),
        }
    }
}

/// Persistence and evaluation depth of rank-biased overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RboParams {
    pub p: f64,
    pub depth: Depth,
}

impl Default for RboParams {
    fn default() -> Self {
        RboParams {
            p: 0.9,
            depth: Depth::All,
        }
    }
}

/// Extrapolated rank-biased overlap of two rankings of the same features.
///
/// With `X_d` the overlap of the two depth-`d` prefixes and `k` the
/// evaluation depth:
///
/// `RBO = (X_k/k)·p^k + ((1-p)/p)·Σ_{d=1..k} (X_d/d)·p^d`
pub fn rbo(a: &RankedList, b: &RankedList, params: RboParams) -> Result<f64> {
    if !(params.p > 0.0 && params.p < 1.0) {
        return Err(argument(format!("persistence p must be in (0, 1), got {}", params.p)));
    }
    if a.len() != b.len() {
        return Err(argument(format!("rankings cover {} and {} features", a.len(), b.len())));
    }
    let n = a.len();
    let k = params.depth.resolve(n)?;
    let p = params.p;
    let (mut in_a, mut in_b) = (vec![false; n], vec![false; n]);
    let mut overlap = 0usize;
    let mut sum = 0.0;
    let mut weight = 1.0;
    for d in 1..=k {
        let (x, y) = (a.order()[d - 1], b.order()[d - 1]);
        if x == y {
            overlap += 1;
        } else {
            overlap += usize::from(in_b[x]) + usize::from(in_a[y]);
        }
        in_a[x] = true;
        in_b[y] = true;
        weight *= p;
        sum += overlap as f64 / d as f64 * weight;
    }
    let value = overlap as f64 / k as f64 * weight + (1.0 - p) / p * sum;
    Ok(value.clamp(0.0, 1.0))
}
