//! Ready-made systems: the dynamic-soaring model, a kinematic ground robot,
//! a planar system whose bad bracket obstructs controllability, and seeded
//! random smooth fields for property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bracket::FormalBracket;
use super::field::{ConstantField, FieldSet, GenericField};
use crate::dynamics::{self, BirdWindParams, FlightState, ForceModel, WindCouplingSign, STATE_DIM};
use crate::error::Result;
use crate::jet::Scalar;

/// Drift of the dynamic-soaring model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoaringDrift {
    pub params: BirdWindParams,
    pub sign: WindCouplingSign,
    pub forces: ForceModel,
}

impl GenericField for SoaringDrift {
    fn dim(&self) -> usize {
        STATE_DIM
    }

    fn eval_generic<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        dynamics::drift_generic(x, &self.params, self.sign, self.forces).to_vec()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        let mut a = [0.0; STATE_DIM];
        a.copy_from_slice(x);
        FlightState::from_array(a).guard()
    }
}

pub fn soaring_fields(params: BirdWindParams, sign: WindCouplingSign, forces: ForceModel) -> Result<FieldSet> {
    params.validate()?;
    FieldSet::new(
        Box::new(SoaringDrift { params, sign, forces }),
        vec![Box::new(ConstantField(dynamics::control_field().to_vec()))],
    )
}

/// `{f, b, ad_f^2 b, …, ad_f^5 b}`: the six vectors listed for the rank
/// argument of the soaring model.
pub fn soaring_printed_brackets() -> Vec<FormalBracket> {
    let mut v = vec![FormalBracket::Drift, FormalBracket::Control(1)];
    v.extend((2..=5).map(|k| FormalBracket::ad(k, 1)));
    v
}

/// The printed list with `[f, b]` added. Six vectors cannot span a
/// seven-dimensional space, so this is the set the rank test needs.
pub fn soaring_completed_brackets() -> Vec<FormalBracket> {
    let mut v = vec![FormalBracket::Drift, FormalBracket::Control(1)];
    v.extend((1..=5).map(|k| FormalBracket::ad(k, 1)));
    v
}

/// `[b, [f, b]]`.
pub fn soaring_bad_bracket() -> FormalBracket {
    FormalBracket::bracket(
        FormalBracket::Control(1),
        FormalBracket::bracket(FormalBracket::Drift, FormalBracket::Control(1)),
    )
}

/// Unicycle heading field `(cos θ, sin θ, 0)` on `(x, y, θ)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RobotDrive;

impl GenericField for RobotDrive {
    fn dim(&self) -> usize {
        3
    }
    fn eval_generic<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        vec![x[2].cos(), x[2].sin(), T::cst(0.0)]
    }
}

/// Driftless ground robot with forward drive and turning inputs.
pub fn ground_robot_fields() -> Result<FieldSet> {
    FieldSet::new(
        Box::new(ConstantField(vec![0.0; 3])),
        vec![Box::new(RobotDrive), Box::new(ConstantField(vec![0.0, 0.0, 1.0]))],
    )
}

pub fn ground_robot_brackets() -> Vec<FormalBracket> {
    vec![
        FormalBracket::Control(1),
        FormalBracket::Control(2),
        FormalBracket::bracket(FormalBracket::Control(1), FormalBracket::Control(2)),
    ]
}

/// `ẋ = u`, `ẏ = x²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquareDrift;

impl GenericField for SquareDrift {
    fn dim(&self) -> usize {
        2
    }
    fn eval_generic<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        vec![T::cst(0.0), x[0].sqr()]
    }
}

pub fn obstruction_fields() -> Result<FieldSet> {
    FieldSet::new(Box::new(SquareDrift), vec![Box::new(ConstantField(vec![1.0, 0.0]))])
}

/// `{b, [[f, b], b]}`.
pub fn obstruction_brackets() -> Vec<FormalBracket> {
    vec![FormalBracket::Control(1), obstruction_bad_bracket()]
}

/// `[[f, b], b]`.
pub fn obstruction_bad_bracket() -> FormalBracket {
    FormalBracket::bracket(
        FormalBracket::bracket(FormalBracket::Drift, FormalBracket::Control(1)),
        FormalBracket::Control(1),
    )
}

/// Named systems selectable from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fixture {
    Soaring,
    GroundRobot,
    Obstruction,
}

/// Smooth field with random coefficients:
/// `F_i = c_i + Σ_j a_ij sin(x_j + p_ij) + q_i·x_{i+1}·x_{i+2}` (indices mod n).
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSmoothField {
    n: usize,
    c: Vec<f64>,
    a: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl RandomSmoothField {
    pub fn seeded(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |k: usize| -> Vec<f64> { (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        Self {
            n,
            c: draw(n),
            a: draw(n * n),
            p: draw(n * n),
            q: draw(n),
        }
    }
}

impl GenericField for RandomSmoothField {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_generic<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = T::cst(self.c[i]);
                for j in 0..n {
                    acc = acc + (x[j] + self.p[i * n + j]).sin() * self.a[i * n + j];
                }
                acc + x[(i + 1) % n] * x[(i + 2) % n] * self.q[i]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::field::VectorField;

    #[test]
    fn bracket_lists() {
        assert_eq!(soaring_printed_brackets().len(), 6);
        let labels: Vec<String> = soaring_completed_brackets().iter().map(|b| b.label(1)).collect();
        assert_eq!(labels[2], "[f,b]");
        assert_eq!(labels.len(), 7);
        assert!(soaring_bad_bracket().is_bad(1));
        assert!(obstruction_bad_bracket().is_bad(1));
    }

    #[test]
    fn soaring_drift_matches_dynamics() {
        let p = BirdWindParams::default();
        let f = SoaringDrift {
            params: p,
            sign: WindCouplingSign::Positive,
            forces: ForceModel::AirspeedDependent,
        };
        let s = FlightState::default();
        let a = f.eval(&s.to_array()).unwrap();
        let b = dynamics::drift_field(&s, &p, WindCouplingSign::Positive).unwrap();
        assert_eq!(a, b.to_vec());
        let mut bad = s.to_array();
        bad[3] = 0.0;
        assert!(f.eval(&bad).is_err());
    }

    #[test]
    fn random_fields_are_reproducible() {
        let a = RandomSmoothField::seeded(4, 7);
        assert_eq!(a, RandomSmoothField::seeded(4, 7));
        assert_ne!(a, RandomSmoothField::seeded(4, 8));
    }
}
