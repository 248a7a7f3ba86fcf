//! Truncated Chen–Fliess functional expansion of a scalar output of a
//! control-affine system,
//!
//! `y(t) = h(x0) + Σ L_{g_{i0}} … L_{g_{ik}} h(x0) · ∫_0^t dξ_{ik} … dξ_{i0}`
//!
//! with `g_0 = f`, `g_a = b_a`, `ξ_0(t) = t` and `ξ_a(t) = ∫_0^t u_a`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SoaringError};
use crate::jet::{Jet, Scalar};
use crate::lie::FieldSet;
use crate::sim::integrator::rk4_step;

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 3;

/// `(i_k, …, i_0)`, entries in `0..=m` with `0` the drift. The first entry
/// labels the outermost integral.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>, inputs: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(SoaringError::invalid("multi_index", "must be nonempty"));
        }
        if let Some(bad) = entries.iter().find(|&&i| i > inputs) {
            return Err(SoaringError::invalid(
                "multi_index",
                format!("entry {bad} exceeds the number of inputs {inputs}"),
            ));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All multi-indices of length `1..=order+1` over `0..=inputs`.
    pub fn all_up_to(order: usize, inputs: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut layer: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..=order {
            layer = layer
                .iter()
                .flat_map(|p| {
                    (0..=inputs).map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
            out.extend(layer.iter().cloned().map(MultiIndex));
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Input signals `u(t) ∈ R^m` on `t >= 0`.
#[derive(Clone)]
pub enum ControlSignal {
    Constant(Vec<f64>),
    /// `values[k]` holds on `[breaks[k], breaks[k+1])`; the last value
    /// holds from the last break onward. `breaks[0]` must be 0.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<Vec<f64>> },
    Function {
        inputs: usize,
        f: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    },
}

impl fmt::Debug for ControlSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Self::PiecewiseConstant { breaks, values } => f
                .debug_struct("PiecewiseConstant")
                .field("breaks", breaks)
                .field("values", values)
                .finish(),
            Self::Function { inputs, .. } => f.debug_struct("Function").field("inputs", inputs).finish(),
        }
    }
}

impl ControlSignal {
    pub fn scalar(c: f64) -> Self {
        Self::Constant(vec![c])
    }

    /// Piecewise-constant scalar signal.
    pub fn steps(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Self::PiecewiseConstant {
            breaks,
            values: values.into_iter().map(|v| vec![v]).collect(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::PiecewiseConstant { breaks, values } = self {
            if breaks.is_empty() || breaks.len() != values.len() {
                return Err(SoaringError::invalid("breaks", "need one value per break"));
            }
            if breaks[0] != 0.0 || breaks.windows(2).any(|w| w[1] <= w[0]) {
                return Err(SoaringError::invalid("breaks", "must start at 0 and increase"));
            }
            let m = values[0].len();
            if values.iter().any(|v| v.len() != m) {
                return Err(SoaringError::invalid("values", "inconsistent input count"));
            }
        }
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        match self {
            Self::Constant(v) => v.len(),
            Self::PiecewiseConstant { values, .. } => values[0].len(),
            Self::Function { inputs, .. } => *inputs,
        }
    }

    pub fn value(&self, t: f64) -> Vec<f64> {
        match self {
            Self::Constant(v) => v.clone(),
            Self::PiecewiseConstant { breaks, values } => {
                let k = breaks.partition_point(|&b| b <= t).saturating_sub(1);
                values[k].clone()
            }
            Self::Function { f, .. } => f(t),
        }
    }

    fn breaks(&self) -> &[f64] {
        match self {
            Self::PiecewiseConstant { breaks, .. } => breaks,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Quadrature {
    /// Uniform intervals on `[0, t]`; control breakpoints are added on top.
    pub intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { intervals: 1000 }
    }
}

fn grid(u: &ControlSignal, t: f64, q: &Quadrature) -> Vec<f64> {
    let n = q.intervals.max(1);
    let mut g: Vec<f64> = (0..=n).map(|k| t * k as f64 / n as f64).collect();
    g.extend(u.breaks().iter().copied().filter(|&b| b > 0.0 && b < t));
    g.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    g.dedup();
    g
}

/// Nested trapezoid rule; the input is sampled at interval midpoints so
/// piecewise-constant controls with breaks on the grid are integrated
/// without jump error.
fn iterated_on_grid(idx: &MultiIndex, u: &ControlSignal, g: &[f64]) -> f64 {
    let mids: Vec<Vec<f64>> = g.windows(2).map(|w| u.value(0.5 * (w[0] + w[1]))).collect();
    let mut level = vec![1.0; g.len()];
    // innermost integral first
    for &i in idx.entries().iter().rev() {
        let mut next = vec![0.0; g.len()];
        for k in 1..g.len() {
            let w = if i == 0 { 1.0 } else { mids[k - 1][i - 1] };
            next[k] = next[k - 1] + 0.5 * (g[k] - g[k - 1]) * w * (level[k - 1] + level[k]);
        }
        level = next;
    }
    level[g.len() - 1]
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(SoaringError::invalid("t", "must be finite and >= 0"));
    }
    Ok(())
}

/// `∫_0^t dξ_{ik} … dξ_{i0}`.
pub fn iterated_integral(idx: &MultiIndex, u: &ControlSignal, t: f64, q: &Quadrature) -> Result<f64> {
    check_time(t)?;
    u.validate()?;
    if idx.entries().iter().any(|&i| i > u.inputs()) {
        return Err(SoaringError::invalid("multi_index", "entry exceeds the number of inputs"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(iterated_on_grid(idx, u, &grid(u, t, q)))
}

/// Scalar output map `h(x)`.
pub trait ScalarMap {
    fn dim(&self) -> usize;
    fn eval_generic<T: Scalar>(&self, x: &[T]) -> T;
}

/// `h(x) = x_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coordinate {
    pub index: usize,
    pub dim: usize,
}

impl ScalarMap for Coordinate {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval_generic<T: Scalar>(&self, x: &[T]) -> T {
        x[self.index]
    }
}

/// `L_{g_{i0}} … L_{g_{ik}} h` evaluated at the jet point `x`, peeling the
/// outermost operator off `ops` and differentiating along generator `level`.
fn lie_derivative_jet<H: ScalarMap>(h: &H, fields: &FieldSet, ops: &[usize], x: &[Jet], level: usize) -> Result<Jet> {
    let Some((&first, rest)) = ops.split_first() else {
        return Ok(h.eval_generic(x));
    };
    let g = if first == 0 {
        fields.drift.eval_jet(x)?
    } else {
        fields.controls[first - 1].eval_jet(x)?
    };
    let moved: Vec<Jet> = x
        .iter()
        .zip(&g)
        .map(|(xi, gi)| *xi + gi.times_generator(level))
        .collect();
    Ok(lie_derivative_jet(h, fields, rest, &moved, level + 1)?.generator_part(level))
}

/// Coefficient `L_{g_{i0}} … L_{g_{ik}} h(x0)` of the multi-index.
pub fn lie_derivative<H: ScalarMap>(h: &H, fields: &FieldSet, idx: &MultiIndex, x0: &[f64]) -> Result<f64> {
    if idx.len() > MAX_ORDER + 1 {
        return Err(SoaringError::OrderTooHigh {
            order: idx.len() - 1,
            max: MAX_ORDER,
        });
    }
    if h.dim() != fields.dim() || x0.len() != fields.dim() {
        return Err(SoaringError::Dimension {
            expected: fields.dim(),
            got: x0.len().min(h.dim()),
        });
    }
    // operators in application order to the jets: i0 outermost
    let ops: Vec<usize> = idx.entries().iter().rev().copied().collect();
    let xj: Vec<Jet> = x0.iter().map(|&v| Jet::constant(v)).collect();
    Ok(lie_derivative_jet(h, fields, &ops, &xj, 0)?.coeff(0))
}

/// Output series truncated after multi-indices of length `order + 1`.
pub fn fliess_output<H: ScalarMap>(
    h: &H,
    fields: &FieldSet,
    x0: &[f64],
    u: &ControlSignal,
    t: f64,
    order: usize,
    q: &Quadrature,
) -> Result<f64> {
    if order > MAX_ORDER {
        return Err(SoaringError::OrderTooHigh { order, max: MAX_ORDER });
    }
    check_time(t)?;
    u.validate()?;
    if u.inputs() != fields.inputs() {
        return Err(SoaringError::Dimension {
            expected: fields.inputs(),
            got: u.inputs(),
        });
    }
    let xj: Vec<Jet> = x0.iter().map(|&v| Jet::constant(v)).collect();
    let mut y = lie_derivative_jet(h, fields, &[], &xj, 0)?.coeff(0);
    if t == 0.0 {
        return Ok(y);
    }
    let g = grid(u, t, q);
    for idx in MultiIndex::all_up_to(order, fields.inputs()) {
        let c = lie_derivative(h, fields, &idx, x0)?;
        if c != 0.0 {
            y += c * iterated_on_grid(&idx, u, &g);
        }
    }
    Ok(y)
}

/// Exact output of `ẋ = u, ẏ = x²` from `(x0, y0)`:
/// `y0 + x0²·t + 2·x0·∫∫u + 2·∫∫∫u·∫u`.
pub fn example2_exact_output(x0: f64, y0: f64, u: &ControlSignal, t: f64, q: &Quadrature) -> Result<f64> {
    check_time(t)?;
    if u.inputs() != 1 {
        return Err(SoaringError::Dimension {
            expected: 1,
            got: u.inputs(),
        });
    }
    if !x0.is_finite() || !y0.is_finite() {
        return Err(SoaringError::NonFinite("initial state"));
    }
    if t == 0.0 {
        return Ok(y0);
    }
    let g = grid(u, t, q);
    let double = iterated_on_grid(&MultiIndex(vec![0, 1]), u, &g);
    let triple = iterated_on_grid(&MultiIndex(vec![0, 1, 1]), u, &g);
    Ok(y0 + x0 * x0 * t + 2.0 * x0 * double + 2.0 * triple)
}

/// Integrates `ẋ = u, ẏ = x²` with RK4, restarting at every control break
/// so each step sees a constant input. Returns `y(t)`.
pub fn example2_integrate(x0: f64, y0: f64, u: &ControlSignal, t: f64, max_step: f64) -> Result<f64> {
    check_time(t)?;
    if !max_step.is_finite() || max_step <= 0.0 {
        return Err(SoaringError::invalid("max_step", "must be > 0"));
    }
    let mut knots = vec![0.0];
    knots.extend(u.breaks().iter().copied().filter(|&b| b > 0.0 && b < t));
    knots.push(t);
    let mut s = [x0, y0];
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let v = u.value(0.5 * (a + b))[0];
        let n = ((b - a) / max_step).ceil() as usize;
        let h = (b - a) / n as f64;
        for k in 0..n {
            s = rk4_step(
                |_, z: &[f64; 2]| Ok::<_, SoaringError>([v, z[0] * z[0]]),
                &s,
                a + k as f64 * h,
                h,
            )?;
        }
    }
    Ok(s[1])
}

/// Random scalar piecewise-constant input on `[0, t_end]` with between 1
/// and `max_pieces` pieces and values in `[-u_max, u_max]`.
pub fn random_piecewise_control<R: Rng>(rng: &mut R, u_max: f64, t_end: f64, max_pieces: usize) -> ControlSignal {
    let pieces = rng.gen_range(1..=max_pieces.max(1));
    let mut breaks: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.0..t_end)).collect();
    breaks.push(0.0);
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breaks"));
    breaks.dedup();
    let values = breaks.iter().map(|_| vec![rng.gen_range(-u_max..=u_max)]).collect();
    ControlSignal::PiecewiseConstant { breaks, values }
}
