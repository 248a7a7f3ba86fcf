//! Closed-loop simulation, energy accounting, phase detection and
//! trajectory comparison.

pub mod compare;
pub mod integrator;
pub mod io;
pub mod phases;

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, BirdWindParams, FlightState, WindCouplingSign, STATE_DIM};
use crate::error::{Result, SoaringError};
use crate::esc::{self, EscController, EscParams, RollControl};
use crate::windfield;

pub use compare::{compare_trajectories, ComparisonReport, ReferenceTrajectory};
pub use integrator::rk4_step;
pub use phases::{detect_phases, Phase, PhaseDetectionParams, PhaseSegment, PhaseSegmentation};

/// Minimum number of integration steps per dither period.
pub const STEPS_PER_DITHER_PERIOD: f64 = 20.0;

/// Time history of a run, one entry per logged step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FlightState>,
    /// Roll-rate input `u = φ̇`, rad/s.
    pub controls: Vec<f64>,
    /// Objective `J`.
    pub objective: Vec<f64>,
    /// Specific energy `e`, m.
    pub specific_energy: Vec<f64>,
    /// Total mechanical energy `E = m·g·e`, J.
    pub total_energy: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, s: FlightState, u: f64, p: &BirdWindParams) {
        self.times.push(t);
        self.states.push(s);
        self.controls.push(u);
        self.objective.push(esc::objective_energy_gain(&s, p));
        let e = specific_energy(&s, p);
        self.specific_energy.push(e);
        self.total_energy.push(total_energy_from_specific(e, p));
    }

    /// Checks equal lengths, at least two samples and strictly increasing
    /// times.
    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        let lens = [
            self.states.len(),
            self.controls.len(),
            self.objective.len(),
            self.specific_energy.len(),
            self.total_energy.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(SoaringError::InvalidTrajectory("sequence lengths differ".into()));
        }
        if n < 2 {
            return Err(SoaringError::InvalidTrajectory("fewer than two samples".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SoaringError::InvalidTrajectory(
                "times not strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// Index of the sample closest to `t`.
    pub fn index_near(&self, t: f64) -> usize {
        match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).expect("finite times"))
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.times.len() => self.times.len() - 1,
            Err(i) => {
                if (self.times[i] - t).abs() < (t - self.times[i - 1]).abs() {
                    i
                } else {
                    i - 1
                }
            }
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SimStatus {
    Completed,
    /// Integration stopped early; the trajectory holds every step up to
    /// `time`.
    Aborted { time: f64, reason: String },
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub trajectory: Trajectory,
    pub status: SimStatus,
}

/// `e = z + V²/(2g)`.
pub fn specific_energy(s: &FlightState, p: &BirdWindParams) -> f64 {
    s.z + s.v * s.v / (2.0 * p.g)
}

fn total_energy_from_specific(e: f64, p: &BirdWindParams) -> f64 {
    p.mass * p.g * e
}

/// `E = m·g·e`.
pub fn total_energy(s: &FlightState, p: &BirdWindParams) -> f64 {
    total_energy_from_specific(specific_energy(s, p), p)
}

/// Split of `ė` into the drag loss `-D·V/(m·g)` and the wind coupling term
/// of the implemented airspeed equation. The two always sum to the rate
/// returned by [`energy_rate`].
pub fn energy_rate_terms(
    s: &FlightState,
    p: &BirdWindParams,
    sgn: WindCouplingSign,
) -> Result<(f64, f64)> {
    let (_, drag) = dynamics::lift_drag(s.v, p.cl_fixed, p)?;
    let wdot = windfield::wind_rate(s.z, s.v, s.gamma, &p.wind)?;
    let drag_term = -drag * s.v / (p.mass * p.g);
    let wind_term = sgn.value() * s.v * wdot * s.gamma.cos() * s.psi.sin() / p.g;
    Ok((drag_term, wind_term))
}

/// `ė = V sin γ + V·V̇/g` evaluated from the state derivative.
pub fn energy_rate(
    s: &FlightState,
    u: f64,
    p: &BirdWindParams,
    sgn: WindCouplingSign,
) -> Result<f64> {
    let d = dynamics::state_derivative(s, u, p, sgn)?;
    Ok(s.v * s.gamma.sin() + s.v * d[3] / p.g)
}

/// Fixed-step RK4 integration of `ẋ = f(x) + b·u(t, x)`, with the control
/// re-evaluated at every stage.
pub fn simulate(
    x0: &FlightState,
    p: &BirdWindParams,
    sgn: WindCouplingSign,
    control: &dyn RollControl,
    t_end: f64,
    h: f64,
) -> Result<SimOutcome> {
    x0.validate()?;
    p.validate()?;
    if !h.is_finite() || h <= 0.0 {
        return Err(SoaringError::invalid("h", "step must be > 0"));
    }
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(SoaringError::invalid("t_end", "must be > 0"));
    }
    let steps = ((t_end / h).round() as usize).max(1);
    let mut traj = Trajectory::default();
    let mut state = *x0;
    traj.push(0.0, state, control.roll_rate(0.0, &state), p);

    let rhs = |t: f64, a: &[f64; STATE_DIM]| -> Result<[f64; STATE_DIM]> {
        let s = FlightState::from_array(*a);
        let u = control.roll_rate(t, &s);
        if !u.is_finite() {
            return Err(SoaringError::Singularity {
                state: a.to_vec(),
                reason: "non-finite control".into(),
            });
        }
        dynamics::state_derivative(&s, u, p, sgn)
    };

    for k in 0..steps {
        let t = k as f64 * h;
        let next = match rk4_step(rhs, &state.to_array(), t, h) {
            Ok(n) => FlightState::from_array(n),
            Err(e) => {
                return Ok(SimOutcome {
                    trajectory: traj,
                    status: SimStatus::Aborted {
                        time: t,
                        reason: e.to_string(),
                    },
                })
            }
        };
        let t_next = (k + 1) as f64 * h;
        if let Err(e) = dynamics::drift_field(&next, p, sgn) {
            return Ok(SimOutcome {
                trajectory: traj,
                status: SimStatus::Aborted {
                    time: t_next,
                    reason: e.to_string(),
                },
            });
        }
        state = next;
        traj.push(t_next, state, control.roll_rate(t_next, &state), p);
    }
    Ok(SimOutcome {
        trajectory: traj,
        status: SimStatus::Completed,
    })
}

/// Closed-loop dynamic-soaring run under the extremum-seeking roll law.
/// Rejects steps that do not resolve the dither (`h > T/20`).
pub fn simulate_ds(
    x0: &FlightState,
    p: &BirdWindParams,
    e: &EscParams,
    t_end: f64,
    h: f64,
    sgn: WindCouplingSign,
) -> Result<SimOutcome> {
    e.validate()?;
    let max_h = e.period() / STEPS_PER_DITHER_PERIOD;
    if h > max_h {
        return Err(SoaringError::invalid(
            "h",
            format!("step {h} does not resolve the dither; must be <= {max_h:.6}"),
        ));
    }
    simulate(x0, p, sgn, &EscController::new(*e, *p), t_end, h)
}
