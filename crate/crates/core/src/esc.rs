//! Control-affine extremum seeking: `u = b1(J)·u1(t) + b2(J)·u2(t)`.
//!
//! The controller only sees the objective value `J`, which in flight would
//! come from airspeed/altitude/wind sensing. Here it is evaluated from the
//! simulated state through [`objective_energy_gain`].

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::{BirdWindParams, FlightState};
use crate::error::{Result, SoaringError};
use crate::sim::integrator::rk4_step;
use crate::windfield;

/// Dither amplitudes, frequency and phase offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EscParams {
    /// Amplitude of `u1`, rad/s.
    pub a: f64,
    /// Amplitude of `u2`, rad/s.
    pub b: f64,
    /// Dither frequency, rad/s.
    pub omega: f64,
    /// Phase offset of `u1`, rad.
    pub mu: f64,
}

impl Default for EscParams {
    fn default() -> Self {
        Self {
            a: 2.1,
            b: 0.8,
            omega: 5.8,
            mu: 0.55,
        }
    }
}

impl EscParams {
    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() || self.omega <= 0.0 {
            return Err(SoaringError::invalid("omega", "must be finite and > 0"));
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("mu", self.mu)] {
            if !v.is_finite() {
                return Err(SoaringError::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Dither period `2π/ω`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DitherPair {
    pub u1: f64,
    pub u2: f64,
}

/// `u1 = a·cos(ωt + μ)`, `u2 = b·sin(ωt)`.
pub fn dither_signals(t: f64, e: &EscParams) -> DitherPair {
    DitherPair {
        u1: e.a * (e.omega * t + e.mu).cos(),
        u2: e.b * (e.omega * t).sin(),
    }
}

/// Wind energy-gain objective `J = -V·Ẇ·cos γ·sin ψ / g`.
pub fn objective_energy_gain(s: &FlightState, p: &BirdWindParams) -> f64 {
    let wdot = windfield::rate_generic(s.z, s.v, s.gamma, &p.wind);
    -s.v * wdot * s.gamma.cos() * s.psi.sin() / p.g
}

/// Shapes of the two input vector fields as functions of the objective.
pub trait GainShape {
    fn b1(&self, j: f64) -> f64;
    fn b2(&self, j: f64) -> f64;
}

/// `b1 = J`, `b2 = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardGains;

impl GainShape for StandardGains {
    fn b1(&self, j: f64) -> f64 {
        j
    }
    fn b2(&self, _j: f64) -> f64 {
        1.0
    }
}

/// Roll-rate law feeding `φ̇ = u`.
pub trait RollControl {
    fn roll_rate(&self, t: f64, s: &FlightState) -> f64;
}

/// Roll rate held at zero: the reference (constant-roll) trajectory.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroRoll;

impl RollControl for ZeroRoll {
    fn roll_rate(&self, _t: f64, _s: &FlightState) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EscController<G: GainShape = StandardGains> {
    pub esc: EscParams,
    pub params: BirdWindParams,
    pub gains: G,
}

impl EscController<StandardGains> {
    pub fn new(esc: EscParams, params: BirdWindParams) -> Self {
        Self {
            esc,
            params,
            gains: StandardGains,
        }
    }
}

impl<G: GainShape> RollControl for EscController<G> {
    fn roll_rate(&self, t: f64, s: &FlightState) -> f64 {
        let j = objective_energy_gain(s, &self.params);
        let d = dither_signals(t, &self.esc);
        self.gains.b1(j) * d.u1 + self.gains.b2(j) * d.u2
    }
}

/// Closed-loop roll rate with the standard gain pair.
pub fn esc_control(t: f64, s: &FlightState, e: &EscParams, p: &BirdWindParams) -> f64 {
    EscController::new(*e, *p).roll_rate(t, s)
}

/// Trajectory of the scalar demonstration system.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub x_star: f64,
}

impl ScalarTrajectory {
    pub fn final_error(&self) -> f64 {
        (self.values.last().copied().unwrap_or(f64::NAN) - self.x_star).abs()
    }

    /// Largest `|x - x*|` over samples with `t >= t_from`.
    pub fn max_error_after(&self, t_from: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= t_from)
            .map(|(_, x)| (x - self.x_star).abs())
            .fold(0.0, f64::max)
    }
}

/// Scalar extremum seeker `ẋ = J(x)·√ω cos ωt + √ω sin ωt` with
/// `J(x) = 2(x - x*)²`. Converges to an orbit around `x*`.
pub fn scalar_esc_demo(
    x0: f64,
    x_star: f64,
    omega: f64,
    t_end: f64,
    h: f64,
) -> Result<ScalarTrajectory> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(SoaringError::invalid("omega", "must be finite and > 0"));
    }
    if !h.is_finite() || h <= 0.0 {
        return Err(SoaringError::invalid("h", "must be > 0"));
    }
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(SoaringError::invalid("t_end", "must be > 0"));
    }
    if !x0.is_finite() || !x_star.is_finite() {
        return Err(SoaringError::NonFinite("initial value or optimum"));
    }
    let amp = omega.sqrt();
    let rhs = |t: f64, x: &[f64; 1]| -> std::result::Result<[f64; 1], SoaringError> {
        let j = 2.0 * (x[0] - x_star).powi(2);
        Ok([j * amp * (omega * t).cos() + amp * (omega * t).sin()])
    };
    let steps = (t_end / h).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = [x0];
    times.push(0.0);
    values.push(x0);
    for k in 0..steps {
        let t = k as f64 * h;
        x = rk4_step(rhs, &x, t, h)?;
        if !x[0].is_finite() || x[0].abs() > 1e12 {
            return Err(SoaringError::Diverged { time: t + h });
        }
        times.push((k + 1) as f64 * h);
        values.push(x[0]);
    }
    Ok(ScalarTrajectory {
        times,
        values,
        x_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dither_at_zero() {
        let d = dither_signals(0.0, &EscParams::default());
        assert!((d.u1 - 1.790_301_5).abs() < 1e-6);
        assert_eq!(d.u2, 0.0);
    }

    #[test]
    fn dither_is_periodic_with_zero_mean() {
        let e = EscParams::default();
        let period = e.period();
        for &t in &[0.0, 0.37, 2.5, 11.0] {
            let a = dither_signals(t, &e);
            let b = dither_signals(t + period, &e);
            assert!((a.u1 - b.u1).abs() < 1e-12);
            assert!((a.u2 - b.u2).abs() < 1e-12);
        }
        // composite Simpson over one period
        let n = 2000;
        let h = period / n as f64;
        let (mut i1, mut i2) = (0.0, 0.0);
        for k in 0..=n {
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            let d = dither_signals(k as f64 * h, &e);
            i1 += w * d.u1;
            i2 += w * d.u2;
        }
        i1 *= h / 3.0;
        i2 *= h / 3.0;
        assert!(i1.abs() <= 1e-10 * period, "{i1}");
        assert!(i2.abs() <= 1e-10 * period, "{i2}");
    }

    #[test]
    fn objective_at_initial_point() {
        let j = objective_energy_gain(&FlightState::default(), &BirdWindParams::default());
        assert!((j + 1.596_05).abs() < 1e-5, "{j}");
    }

    #[test]
    fn objective_zero_cases() {
        let p = BirdWindParams::default();
        let mut s = FlightState::default();
        s.gamma = 0.0;
        assert_eq!(objective_energy_gain(&s, &p), 0.0);
        let mut s = FlightState::default();
        s.psi = 0.0;
        assert_eq!(objective_energy_gain(&s, &p), 0.0);
    }

    #[test]
    fn control_at_initial_point() {
        let u = esc_control(
            0.0,
            &FlightState::default(),
            &EscParams::default(),
            &BirdWindParams::default(),
        );
        assert!((u + 2.857_405).abs() < 1e-5, "{u}");
    }

    #[test]
    fn zero_objective_leaves_only_second_dither() {
        let p = BirdWindParams::default();
        let e = EscParams::default();
        let mut s = FlightState::default();
        s.psi = 0.0;
        for &t in &[0.1, 0.9, 3.3] {
            assert!((esc_control(t, &s, &e, &p) - e.b * (e.omega * t).sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn scalar_demo_from_optimum_stays_bounded() {
        let tr = scalar_esc_demo(1.0, 1.0, 50.0, 10.0, 1e-4).unwrap();
        let amp = tr.values.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
        assert!(amp < 0.5, "{amp}");
    }

    #[test]
    fn scalar_demo_converges() {
        for x0 in [0.0, 3.0] {
            let tr = scalar_esc_demo(x0, 1.0, 50.0, 10.0, 1e-4).unwrap();
            assert!(tr.final_error() <= 0.2, "x0={x0}: {}", tr.final_error());
        }
    }

    #[test]
    fn scalar_demo_validation() {
        assert!(scalar_esc_demo(0.0, 1.0, 0.0, 10.0, 1e-3).is_err());
        assert!(scalar_esc_demo(0.0, 1.0, 50.0, 10.0, 0.0).is_err());
    }

    #[test]
    fn scalar_demo_reports_blow_up() {
        // far from the optimum the quadratic gain drives finite-time escape
        match scalar_esc_demo(1e5, 1.0, 50.0, 10.0, 1e-3) {
            Err(SoaringError::Diverged { time }) => assert!(time > 0.0 && time < 10.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn objective_sign_follows_climb_and_heading(
            z in -20.0f64..30.0, v in 1.0f64..30.0,
            gamma in -1.4f64..1.4, psi in -3.0f64..3.0,
        ) {
            let p = BirdWindParams::default();
            let s = FlightState { x: 0.0, y: 0.0, z, v, gamma, psi, phi: 0.0 };
            let j = objective_energy_gain(&s, &p);
            let prod = gamma.sin() * psi.sin();
            if prod.abs() > 1e-9 && j.abs() > 1e-300 {
                prop_assert_eq!(j.signum(), -prod.signum());
            }
        }

        #[test]
        fn control_bounded_and_affine_in_objective(
            t in 0.0f64..20.0, z in -10.0f64..25.0, v in 5.0f64..25.0,
            gamma in -1.0f64..1.0, psi in -3.0f64..3.0,
        ) {
            let p = BirdWindParams::default();
            let e = EscParams::default();
            let s = FlightState { x: 0.0, y: 0.0, z, v, gamma, psi, phi: 0.0 };
            let j = objective_energy_gain(&s, &p);
            let u = esc_control(t, &s, &e, &p);
            prop_assert!(u.abs() <= j.abs() * e.a + e.b + 1e-12);
            let d = dither_signals(t, &e);
            prop_assert!(((u - d.u2) - j * d.u1).abs() <= 1e-12 * (1.0 + u.abs()));
        }
    }
}
