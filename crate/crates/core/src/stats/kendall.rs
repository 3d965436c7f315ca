use serde::{Deserialize, Serialize};

use super::preorder::{Preorder, Relation};
use super::StatsError;

/// Kendall's tau-b between two preorders; incomparable pairs count as ties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KendallResult {
    pub tau_b: f64,
    #[serde(rename = "C")]
    pub concordant: u64,
    #[serde(rename = "D")]
    pub discordant: u64,
    /// Unordered pairs.
    pub n0: u64,
    /// Pairs tied in the first preorder.
    pub n1: u64,
    /// Pairs tied in the second preorder.
    pub n2: u64,
}

fn sign(r: Relation) -> i8 {
    match r {
        Relation::Better => 1,
        Relation::Worse => -1,
        Relation::Incomparable => 0,
    }
}

/// `(C - D) / sqrt((n0 - n1) (n0 - n2))`, with elements of `y` matched to
/// `x` by label.
pub fn kendall_tau_b(x: &Preorder, y: &Preorder) -> Result<KendallResult, StatsError> {
    let map = x.label_map(y).ok_or(StatsError::ElementMismatch)?;
    let n = x.len();
    let (mut c, mut d, mut n1, mut n2) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let sx = sign(x.relation(i, j));
            let sy = sign(y.relation(map[i], map[j]));
            n1 += u64::from(sx == 0);
            n2 += u64::from(sy == 0);
            match sx * sy {
                1 => c += 1,
                -1 => d += 1,
                _ => {}
            }
        }
    }
    let n0 = (n * n.saturating_sub(1) / 2) as u64;
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    if denom == 0.0 {
        return Err(StatsError::AllTied);
    }
    Ok(KendallResult {
        tau_b: (c as f64 - d as f64) / denom,
        concordant: c,
        discordant: d,
        n0,
        n1,
        n2,
    })
}
