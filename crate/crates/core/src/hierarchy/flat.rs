use serde::{Deserialize, Serialize};

use crate::linalg::singular_values;
use crate::moment::{moment_matrix, Tms};

/// Default relative singular-value threshold for numerical ranks.
pub const RANK_TOL: f64 = 1e-6;
/// Minimum ratio `σ_r/σ_{r+1}` for a rank to count as decided.
pub const GAP_RATIO: f64 = 100.0;

/// Evidence that `rank M_t[y] = rank M_{t−d}[y]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatTruncation {
    pub t: u32,
    /// Degree shift `d = max(d_G, 1)`.
    pub shift: u32,
    pub rank_t: usize,
    pub rank_lower: usize,
    pub singular_values_t: Vec<f64>,
    pub singular_values_lower: Vec<f64>,
}

/// Numerical rank of a descending singular-value list, or `None` when the
/// cut at `tol` does not sit in a gap of at least `gap` orders of ratio.
pub fn decided_rank(s: &[f64], tol: f64, gap: f64) -> Option<usize> {
    let top = *s.first()?;
    if top <= 0.0 {
        return Some(0);
    }
    let r = s.iter().take_while(|&&v| v >= tol * top).count();
    if r == s.len() || s[r] <= 0.0 || s[r - 1] / s[r] >= gap {
        Some(r)
    } else {
        None
    }
}

/// Smallest `t ∈ [d, k]` with a flat truncation, `d = max(d_G, 1)`.
///
/// Ranks whose threshold does not fall in a clear singular-value gap are
/// treated as undecided and the corresponding `t` is skipped.
pub fn check_flat_truncation(y: &Tms, k: u32, d_g: u32, rank_tol: f64) -> Option<FlatTruncation> {
    check_flat_truncation_with_gap(y, k, d_g, rank_tol, GAP_RATIO)
}

pub fn check_flat_truncation_with_gap(
    y: &Tms,
    k: u32,
    d_g: u32,
    rank_tol: f64,
    gap: f64,
) -> Option<FlatTruncation> {
    let shift = d_g.max(1);
    let k = k.min(y.order() / 2);
    for t in shift..=k {
        let s_t = singular_values(&moment_matrix(y, t).ok()?);
        let s_lo = singular_values(&moment_matrix(y, t - shift).ok()?);
        let (Some(r_t), Some(r_lo)) = (
            decided_rank(&s_t, rank_tol, gap),
            decided_rank(&s_lo, rank_tol, gap),
        ) else {
            continue;
        };
        if r_t == r_lo {
            return Some(FlatTruncation {
                t,
                shift,
                rank_t: r_t,
                rank_lower: r_lo,
                singular_values_t: s_t,
                singular_values_lower: s_lo,
            });
        }
    }
    None
}
