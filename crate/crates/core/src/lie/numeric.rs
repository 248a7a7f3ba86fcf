//! Numerical Jacobians and Lie brackets `[F, G] = (∂G/∂x)·F - (∂F/∂x)·G`.
//!
//! Nested brackets are evaluated either with Taylor jets (each nesting
//! level differentiates exactly along a fresh nilpotent generator) or with
//! directional finite differences used as an independent cross-check.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::bracket::FormalBracket;
use super::field::{FieldSet, VectorField};
use crate::error::{Result, SoaringError};
use crate::jet::{Jet, MAX_GENERATORS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JacobianOptions {
    /// Relative step: `h_i = eps·max(1, |x_i|)`.
    pub eps: f64,
    pub richardson: bool,
}

impl Default for JacobianOptions {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            richardson: false,
        }
    }
}

/// Central-difference Jacobian of `f` at `x`.
pub fn numeric_jacobian(f: &dyn VectorField, x: &[f64], opts: &JacobianOptions) -> Result<DMatrix<f64>> {
    let n = f.dim();
    if x.len() != n {
        return Err(SoaringError::Dimension {
            expected: n,
            got: x.len(),
        });
    }
    if !opts.eps.is_finite() || opts.eps <= 0.0 {
        return Err(SoaringError::invalid("eps", "must be > 0"));
    }
    let column = |j: usize, h: f64| -> Result<Vec<f64>> {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let fp = f.eval(&xp)?;
        let fm = f.eval(&xm)?;
        Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let h = opts.eps * x[j].abs().max(1.0);
        let mut col = column(j, h)?;
        if opts.richardson {
            let half = column(j, 0.5 * h)?;
            for (c, hh) in col.iter_mut().zip(half) {
                *c = (4.0 * hh - *c) / 3.0;
            }
        }
        for i in 0..n {
            jac[(i, j)] = col[i];
        }
    }
    Ok(jac)
}

/// `[F, G](x)` from two numerical Jacobians.
pub fn lie_bracket(
    f: &dyn VectorField,
    g: &dyn VectorField,
    x: &[f64],
    opts: &JacobianOptions,
) -> Result<Vec<f64>> {
    if f.dim() != g.dim() {
        return Err(SoaringError::Dimension {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    let fx = nalgebra::DVector::from_vec(f.eval(x)?);
    let gx = nalgebra::DVector::from_vec(g.eval(x)?);
    let jf = numeric_jacobian(f, x, opts)?;
    let jg = numeric_jacobian(g, x, opts)?;
    Ok((jg * fx - jf * gx).iter().copied().collect())
}

/// Directional finite-difference settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdScheme {
    /// Displacement along the unit direction, in state units.
    pub step: f64,
    pub richardson: bool,
    /// Relative change between `step` and `step/2` above which the result
    /// is flagged as a numeric breakdown.
    pub sweep_tol: f64,
}

impl Default for FdScheme {
    fn default() -> Self {
        Self {
            step: 0.2,
            richardson: true,
            sweep_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffScheme {
    /// Truncated Taylor arithmetic, exact to rounding at every level.
    #[default]
    Taylor,
    FiniteDifference(FdScheme),
}


pub const DEFAULT_MAX_DEPTH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BracketOptions {
    pub scheme: DiffScheme,
    /// Largest accepted expression depth (leaves on the longest path).
    pub max_depth: usize,
}

impl Default for BracketOptions {
    fn default() -> Self {
        Self {
            scheme: DiffScheme::Taylor,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

fn leaf<'a>(fields: &'a FieldSet, e: &FormalBracket) -> &'a dyn VectorField {
    match e {
        FormalBracket::Drift => fields.drift.as_ref(),
        FormalBracket::Control(i) => fields.controls[i - 1].as_ref(),
        FormalBracket::Bracket(..) => unreachable!("leaf called on a bracket"),
    }
}

fn check_expr(expr: &FormalBracket, fields: &FieldSet, max_depth: usize) -> Result<()> {
    // nesting level k consumes generator k - 1
    let limit = max_depth.min(MAX_GENERATORS + 1);
    if expr.depth() > limit {
        return Err(SoaringError::DepthExceeded {
            expr: expr.label(fields.inputs()),
            max: limit,
        });
    }
    if expr.max_control() > fields.inputs() {
        return Err(SoaringError::BracketParse {
            input: expr.to_string(),
            reason: format!("system has {} control field(s)", fields.inputs()),
        });
    }
    Ok(())
}

fn eval_taylor(expr: &FormalBracket, fields: &FieldSet, x: &[Jet], level: usize) -> Result<Vec<Jet>> {
    let FormalBracket::Bracket(a, b) = expr else {
        return leaf(fields, expr).eval_jet(x);
    };
    let along = |dir: &[Jet]| -> Vec<Jet> {
        x.iter()
            .zip(dir)
            .map(|(xi, di)| *xi + di.times_generator(level))
            .collect()
    };
    let va = eval_taylor(a, fields, x, level + 1)?;
    let vb = eval_taylor(b, fields, x, level + 1)?;
    let db_a = eval_taylor(b, fields, &along(&va), level + 1)?;
    let da_b = eval_taylor(a, fields, &along(&vb), level + 1)?;
    Ok(db_a
        .iter()
        .zip(&da_b)
        .map(|(p, q)| p.generator_part(level) - q.generator_part(level))
        .collect())
}

fn directional_fd(
    g: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
    v: &[f64],
    s: &FdScheme,
) -> Result<Vec<f64>> {
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(vec![0.0; x.len()]);
    }
    let at = |t: f64| -> Result<Vec<f64>> {
        let y: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| xi + t * vi).collect();
        g(&y)
    };
    let stencil = |h: f64| -> Result<Vec<f64>> {
        let (p2, p1, m1, m2) = (at(2.0 * h)?, at(h)?, at(-h)?, at(-2.0 * h)?);
        Ok((0..x.len())
            .map(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h))
            .collect())
    };
    let h = s.step / norm;
    let coarse = stencil(h)?;
    if !s.richardson {
        return Ok(coarse);
    }
    let fine = stencil(0.5 * h)?;
    Ok(coarse.iter().zip(fine).map(|(c, f)| (16.0 * f - c) / 15.0).collect())
}

fn eval_fd(expr: &FormalBracket, fields: &FieldSet, x: &[f64], s: &FdScheme) -> Result<Vec<f64>> {
    let FormalBracket::Bracket(a, b) = expr else {
        return leaf(fields, expr).eval(x);
    };
    let va = eval_fd(a, fields, x, s)?;
    let vb = eval_fd(b, fields, x, s)?;
    let db_a = directional_fd(&|y| eval_fd(b, fields, y, s), x, &va, s)?;
    let da_b = directional_fd(&|y| eval_fd(a, fields, y, s), x, &vb, s)?;
    Ok(db_a.iter().zip(&da_b).map(|(p, q)| p - q).collect())
}

/// Value of the bracket expression at `x`.
pub fn nested_bracket(
    expr: &FormalBracket,
    fields: &FieldSet,
    x: &[f64],
    opts: &BracketOptions,
) -> Result<Vec<f64>> {
    Ok(nested_bracket_checked(expr, fields, x, opts)?.vector)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketEvaluation {
    pub vector: Vec<f64>,
    /// Relative change under step halving; finite-difference scheme only.
    pub sweep_change: Option<f64>,
    pub breakdown: bool,
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Like [`nested_bracket`], additionally sweeping the finite-difference step
/// and flagging results that do not settle.
pub fn nested_bracket_checked(
    expr: &FormalBracket,
    fields: &FieldSet,
    x: &[f64],
    opts: &BracketOptions,
) -> Result<BracketEvaluation> {
    check_expr(expr, fields, opts.max_depth)?;
    if x.len() != fields.dim() {
        return Err(SoaringError::Dimension {
            expected: fields.dim(),
            got: x.len(),
        });
    }
    match opts.scheme {
        DiffScheme::Taylor => {
            let xj: Vec<Jet> = x.iter().map(|&v| Jet::constant(v)).collect();
            let out = eval_taylor(expr, fields, &xj, 0)?;
            let vector: Vec<f64> = out.iter().map(|j| j.coeff(0)).collect();
            Ok(BracketEvaluation {
                vector,
                sweep_change: None,
                breakdown: false,
            })
        }
        DiffScheme::FiniteDifference(s) => {
            if !s.step.is_finite() || s.step <= 0.0 {
                return Err(SoaringError::invalid("step", "must be > 0"));
            }
            let vector = eval_fd(expr, fields, x, &s)?;
            let half = FdScheme {
                step: 0.5 * s.step,
                ..s
            };
            let refined = eval_fd(expr, fields, x, &half)?;
            let change = rel_diff(&vector, &refined);
            let finite = vector.iter().all(|v| v.is_finite());
            Ok(BracketEvaluation {
                vector,
                sweep_change: Some(change),
                breakdown: !finite || change > s.sweep_tol,
            })
        }
    }
}

/// A bracket expression viewed as a vector field in its own right, so that
/// it can be nested further or handed to [`lie_bracket`].
pub struct BracketField<'a> {
    pub fields: &'a FieldSet,
    pub expr: FormalBracket,
}

impl VectorField for BracketField<'_> {
    fn dim(&self) -> usize {
        self.fields.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        nested_bracket(&self.expr, self.fields, x, &BracketOptions::default())
    }

    fn eval_jet(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        check_expr(&self.expr, self.fields, MAX_GENERATORS + 1)?;
        let used = x.iter().map(|j| j.generators()).max().unwrap_or(0);
        if used + self.expr.depth() > MAX_GENERATORS + 1 {
            return Err(SoaringError::DepthExceeded {
                expr: self.expr.label(self.fields.inputs()),
                max: MAX_GENERATORS + 1 - used,
            });
        }
        eval_taylor(&self.expr, self.fields, x, used)
    }
}
