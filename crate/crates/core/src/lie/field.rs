//! Vector fields of control-affine systems `ẋ = f(x) + Σ b_a(x)·u_a`.

use crate::error::{Result, SoaringError};
use crate::jet::{Jet, Scalar};

/// A smooth vector field on `R^n`, evaluable on plain numbers and on
/// Taylor jets.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Evaluation on jets; only the real part of `x` is domain-checked.
    fn eval_jet(&self, x: &[Jet]) -> Result<Vec<Jet>>;
}

/// Fields written once against [`Scalar`]. A blanket impl turns them into
/// [`VectorField`]s with dimension and finiteness checks.
pub trait GenericField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval_generic<T: Scalar>(&self, x: &[T]) -> Vec<T>;

    /// Rejects points outside the field's domain.
    fn check(&self, _x: &[f64]) -> Result<()> {
        Ok(())
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(SoaringError::Dimension { expected, got })
    }
}

fn check_finite(values: impl Iterator<Item = f64>, x: &[f64]) -> Result<()> {
    for v in values {
        if !v.is_finite() {
            return Err(SoaringError::Singularity {
                state: x.to_vec(),
                reason: "vector field is not finite".into(),
            });
        }
    }
    Ok(())
}

impl<G: GenericField> VectorField for G {
    fn dim(&self) -> usize {
        GenericField::dim(self)
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(GenericField::dim(self), x.len())?;
        check_finite(x.iter().copied(), x)?;
        self.check(x)?;
        let out = self.eval_generic(x);
        check_finite(out.iter().copied(), x)?;
        Ok(out)
    }

    fn eval_jet(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        check_dim(GenericField::dim(self), x.len())?;
        let base: Vec<f64> = x.iter().map(|j| j.value()).collect();
        check_finite(base.iter().copied(), &base)?;
        self.check(&base)?;
        let out = self.eval_generic(x);
        check_finite(out.iter().map(|j| j.value()), &base)?;
        Ok(out)
    }
}

/// State-independent field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantField(pub Vec<f64>);

impl GenericField for ConstantField {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn eval_generic<T: Scalar>(&self, _x: &[T]) -> Vec<T> {
        self.0.iter().map(|&v| T::cst(v)).collect()
    }
}

/// `F(x) = A·x`, with `A` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearField {
    pub n: usize,
    pub a: Vec<f64>,
}

impl LinearField {
    pub fn new(n: usize, a: Vec<f64>) -> Result<Self> {
        check_dim(n * n, a.len())?;
        Ok(Self { n, a })
    }
}

impl GenericField for LinearField {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_generic<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(T::cst(0.0), |acc, j| acc + x[j] * self.a[i * self.n + j])
            })
            .collect()
    }
}

/// Drift plus control fields of one system.
pub struct FieldSet {
    pub drift: Box<dyn VectorField>,
    pub controls: Vec<Box<dyn VectorField>>,
}

impl FieldSet {
    pub fn new(drift: Box<dyn VectorField>, controls: Vec<Box<dyn VectorField>>) -> Result<Self> {
        let n = drift.dim();
        if controls.is_empty() {
            return Err(SoaringError::invalid("controls", "at least one control field is required"));
        }
        for c in &controls {
            check_dim(n, c.dim())?;
        }
        Ok(Self { drift, controls })
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn inputs(&self) -> usize {
        self.controls.len()
    }
}

impl std::fmt::Debug for FieldSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSet")
            .field("dim", &self.dim())
            .field("inputs", &self.inputs())
            .finish()
    }
}
