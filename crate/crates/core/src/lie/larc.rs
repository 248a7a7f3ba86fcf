//! Rank of the accessibility distribution, bad-bracket checks and the
//! weight inequalities that neutralize a bad bracket.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::bracket::FormalBracket;
use super::field::FieldSet;
use super::numeric::{nested_bracket_checked, BracketOptions, DiffScheme};
use crate::error::{Result, SoaringError};

/// Vectors shorter than this fraction of the longest one are treated as 0.
const ZERO_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LarcOptions {
    /// A singular value counts when `σ_i / σ_1 > tol`.
    pub tol: f64,
    pub brackets: BracketOptions,
}

impl Default for LarcOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            brackets: BracketOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LarcReport {
    pub brackets: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    /// Brackets that vanish at the point and were left out of the matrix.
    pub dropped: Vec<String>,
    /// Singular values of the column-normalized matrix, descending.
    pub singular_values: Vec<f64>,
    pub tol: f64,
    pub rank: usize,
    pub dim: usize,
    pub full_rank: bool,
    /// Bad brackets in the list.
    pub bad_brackets: Vec<String>,
    /// Rank once the bad brackets are removed.
    pub rank_without_bad: usize,
    pub scheme: DiffScheme,
    /// Brackets whose finite-difference step sweep did not settle.
    pub breakdown: Vec<String>,
    pub diagnostics: Vec<String>,
}

/// Singular values (descending) of the matrix whose columns are the
/// nonzero `vectors` scaled to unit length, and the resulting rank.
pub fn normalized_rank(vectors: &[Vec<f64>], dim: usize, tol: f64) -> (Vec<f64>, usize) {
    let longest = vectors
        .iter()
        .map(|v| norm(v))
        .fold(0.0, f64::max);
    let cols: Vec<DVector<f64>> = vectors
        .iter()
        .filter(|v| longest > 0.0 && norm(v) > ZERO_REL * longest)
        .map(|v| DVector::from_column_slice(v) / norm(v))
        .collect();
    if cols.is_empty() {
        return (Vec::new(), 0);
    }
    let m = DMatrix::from_columns(&cols);
    debug_assert_eq!(m.nrows(), dim);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    let rank = sv.iter().filter(|s| **s / sv[0] > tol).count();
    (sv, rank)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// LARC test at `x`: evaluates every bracket, normalizes, and counts
/// singular values above the relative threshold.
pub fn larc_rank(
    brackets: &[FormalBracket],
    fields: &FieldSet,
    x: &[f64],
    opts: &LarcOptions,
) -> Result<LarcReport> {
    if brackets.is_empty() {
        return Err(SoaringError::invalid("brackets", "bracket list is empty"));
    }
    if !opts.tol.is_finite() || opts.tol <= 0.0 || opts.tol >= 1.0 {
        return Err(SoaringError::invalid("tol", "must lie in (0, 1)"));
    }
    let m = fields.inputs();
    let n = fields.dim();
    let mut vectors = Vec::with_capacity(brackets.len());
    let mut breakdown = Vec::new();
    for b in brackets {
        let ev = nested_bracket_checked(b, fields, x, &opts.brackets)?;
        if ev.breakdown {
            breakdown.push(b.label(m));
        }
        vectors.push(ev.vector);
    }
    let norms: Vec<f64> = vectors.iter().map(|v| norm(v)).collect();
    let longest = norms.iter().copied().fold(0.0, f64::max);
    let dropped: Vec<String> = brackets
        .iter()
        .zip(&norms)
        .filter(|(_, n)| !(longest > 0.0 && **n > ZERO_REL * longest))
        .map(|(b, _)| b.label(m))
        .collect();

    let (singular_values, rank) = normalized_rank(&vectors, n, opts.tol);
    let good: Vec<Vec<f64>> = brackets
        .iter()
        .zip(&vectors)
        .filter(|(b, _)| !b.is_bad(m))
        .map(|(_, v)| v.clone())
        .collect();
    let (_, rank_without_bad) = normalized_rank(&good, n, opts.tol);

    let mut diagnostics = Vec::new();
    if rank == 0 {
        diagnostics.push("every bracket vanishes at the evaluation point".to_string());
    }
    if !dropped.is_empty() {
        diagnostics.push(format!("dropped zero vectors: {}", dropped.join(", ")));
    }
    if !breakdown.is_empty() {
        diagnostics.push(format!("numeric breakdown in: {}", breakdown.join(", ")));
    }

    Ok(LarcReport {
        brackets: brackets.iter().map(|b| b.label(m)).collect(),
        vectors,
        norms,
        dropped,
        singular_values,
        tol: opts.tol,
        rank,
        dim: n,
        full_rank: rank == n,
        bad_brackets: brackets.iter().filter(|b| b.is_bad(m)).map(|b| b.label(m)).collect(),
        rank_without_bad,
        scheme: opts.brackets.scheme,
        breakdown,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadBracketStatus {
    pub bracket: String,
    pub vector: Vec<f64>,
    pub norm: f64,
    pub nonvanishing: bool,
    /// Relative least-squares residual of the bracket against the span.
    pub residual: f64,
    pub in_span: bool,
    pub span_rank_without: usize,
    pub span_rank_with: usize,
    /// Adding the bad bracket raises the rank of the span.
    pub required_for_span: bool,
}

/// Tolerances used by [`bad_bracket_check`].
pub const NONVANISHING_TOL: f64 = 1e-9;
pub const SPAN_RESIDUAL_TOL: f64 = 1e-6;

/// Evaluates `bad` at `x` and relates it to the span of `span` (with `bad`
/// itself removed from that list).
pub fn bad_bracket_check(
    fields: &FieldSet,
    x: &[f64],
    bad: &FormalBracket,
    span: &[FormalBracket],
    opts: &LarcOptions,
) -> Result<BadBracketStatus> {
    let n = fields.dim();
    let v = nested_bracket_checked(bad, fields, x, &opts.brackets)?.vector;
    let others: Vec<Vec<f64>> = span
        .iter()
        .filter(|b| *b != bad)
        .map(|b| nested_bracket_checked(b, fields, x, &opts.brackets).map(|e| e.vector))
        .collect::<Result<_>>()?;
    let scale = others.iter().map(|o| norm(o)).fold(1.0, f64::max);
    let vnorm = norm(&v);
    let nonvanishing = vnorm > NONVANISHING_TOL * scale;

    let longest = others.iter().map(|o| norm(o)).fold(0.0, f64::max);
    let cols: Vec<DVector<f64>> = others
        .iter()
        .filter(|o| longest > 0.0 && norm(o) > ZERO_REL * longest)
        .map(|o| DVector::from_column_slice(o) / norm(o))
        .collect();
    let residual = if vnorm == 0.0 {
        0.0
    } else if cols.is_empty() {
        1.0
    } else {
        let a = DMatrix::from_columns(&cols);
        let b = DVector::from_column_slice(&v);
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let c = svd
            .solve(&b, opts.tol * smax)
            .map_err(|e| SoaringError::invalid("span", e.to_string()))?;
        (a * c - &b).norm() / vnorm
    };

    let (_, span_rank_without) = normalized_rank(&others, n, opts.tol);
    let mut with = others.clone();
    with.push(v.clone());
    let (_, span_rank_with) = normalized_rank(&with, n, opts.tol);

    Ok(BadBracketStatus {
        bracket: bad.label(fields.inputs()),
        vector: v,
        norm: vnorm,
        nonvanishing,
        residual,
        in_span: residual <= SPAN_RESIDUAL_TOL,
        span_rank_without,
        span_rank_with,
        required_for_span: span_rank_with > span_rank_without,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightInequality {
    /// Bracket whose weight must stay below the bad bracket's.
    pub bracket: String,
    pub lhs: u64,
    pub rhs: u64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightCheck {
    pub weights: Vec<u64>,
    pub bad_bracket: String,
    pub inequalities: Vec<WeightInequality>,
    pub all_hold: bool,
}

/// `‖bad‖_w > ‖B‖_w` for every `B` in `lower`.
pub fn weight_inequalities(
    bad: &FormalBracket,
    lower: &[FormalBracket],
    weights: &[u64],
    inputs: usize,
) -> Result<WeightCheck> {
    if weights.contains(&0) {
        return Err(SoaringError::invalid("weights", "weights must be >= 1"));
    }
    let lhs = bad.weight(weights)?;
    let inequalities = lower
        .iter()
        .map(|b| {
            let rhs = b.weight(weights)?;
            Ok(WeightInequality {
                bracket: b.label(inputs),
                lhs,
                rhs,
                holds: lhs > rhs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightCheck {
        weights: weights.to_vec(),
        bad_bracket: bad.label(inputs),
        all_hold: inequalities.iter().all(|i| i.holds),
        inequalities,
    })
}

/// The single-input dynamic-soaring case: `[b,[f,b]]` against
/// `ad_f^k b` for `k = 2..=5`, i.e. `w0 + 2w > k·w0 + w`.
pub fn weight_neutralization(w0: u64, w: u64) -> Result<WeightCheck> {
    let bad = FormalBracket::bracket(
        FormalBracket::Control(1),
        FormalBracket::bracket(FormalBracket::Drift, FormalBracket::Control(1)),
    );
    let lower: Vec<FormalBracket> = (2..=5).map(|k| FormalBracket::ad(k, 1)).collect();
    weight_inequalities(&bad, &lower, &[w0, w], 1)
}

/// Lexicographically smallest `(w0, w)` with `w >= w0` inside the bounds
/// that satisfies [`weight_neutralization`].
pub fn find_admissible_weight(max_w0: u64, max_w: u64) -> Result<Option<(u64, u64)>> {
    if max_w0 == 0 || max_w == 0 {
        return Err(SoaringError::invalid("bounds", "must be >= 1"));
    }
    for w0 in 1..=max_w0 {
        for w in w0..=max_w {
            if weight_neutralization(w0, w)?.all_hold {
                return Ok(Some((w0, w)));
            }
        }
    }
    Ok(None)
}
