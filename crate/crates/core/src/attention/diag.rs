use serde::Serialize;

use super::AttentionMap;

/// How concentrated a map is around its diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalityStats {
    /// Mean over rows of the share of row mass with `|i-j| <= k`; 1.0 when all
    /// mass lies in the band. Rows are normalized by their actual sum, so f32
    /// rounding in the softmax cannot pull a fully banded map below 1.
    pub band_mass: f64,
    /// Mean over rows of `-sum_j A[i][j] ln A[i][j]`, in nats.
    pub row_entropy_mean: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
}

pub fn attention_diagonality(map: &AttentionMap, k: usize) -> DiagonalityStats {
    let n = map.n();
    let mut band = 0.0f64;
    let mut entropy = 0.0f64;
    for i in 0..n {
        let (mut inside, mut total) = (0.0f64, 0.0f64);
        for (j, &a) in map.row(i).iter().enumerate() {
            let a = a as f64;
            total += a;
            if i.abs_diff(j) <= k {
                inside += a;
            }
            if a > 0.0 {
                entropy -= a * a.ln();
            }
        }
        if total > 0.0 {
            band += inside / total;
        }
    }
    DiagonalityStats { band_mass: band / n as f64, row_entropy_mean: entropy / n as f64, n, k }
}
