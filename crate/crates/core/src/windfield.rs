//! Logistic wind-shear profile `W(z) = W0 / (1 + exp(-z/δ))`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SoaringError};
use crate::jet::Scalar;

/// Beyond this value of `-z/δ` the exponential would overflow; the profile
/// is treated as fully saturated at zero wind.
const EXP_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindParams {
    /// Free-stream wind speed, m/s.
    pub w0: f64,
    /// Shear-layer thickness, m.
    pub delta: f64,
}

impl Default for WindParams {
    fn default() -> Self {
        Self { w0: 7.8, delta: 7.0 }
    }
}

impl WindParams {
    pub fn validate(&self) -> Result<()> {
        if !self.w0.is_finite() || self.w0 < 0.0 {
            return Err(SoaringError::invalid("w0", "must be finite and >= 0"));
        }
        if !self.delta.is_finite() || self.delta <= 0.0 {
            return Err(SoaringError::invalid("delta", "must be finite and > 0"));
        }
        Ok(())
    }
}

fn check(z: f64) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(SoaringError::NonFinite("altitude"))
    }
}

/// Wind speed at altitude `z`.
pub fn wind_speed(z: f64, p: &WindParams) -> Result<f64> {
    check(z)?;
    let r = -z / p.delta;
    if r > EXP_LIMIT {
        return Ok(0.0);
    }
    Ok(p.w0 / (1.0 + r.exp()))
}

/// Altitude derivative `dW/dz`.
pub fn wind_gradient(z: f64, p: &WindParams) -> Result<f64> {
    check(z)?;
    let r = -z / p.delta;
    if r > EXP_LIMIT {
        return Ok(0.0);
    }
    let e = r.exp();
    Ok(p.w0 * e / (p.delta * (1.0 + e).powi(2)))
}

/// Along-trajectory wind rate `Ẇ = (dW/dz)·V·sin γ`.
pub fn wind_rate(z: f64, v: f64, gamma: f64, p: &WindParams) -> Result<f64> {
    if !v.is_finite() || !gamma.is_finite() {
        return Err(SoaringError::NonFinite("airspeed or flight-path angle"));
    }
    Ok(wind_gradient(z, p)? * v * gamma.sin())
}

// Unchecked generic forms used inside the vector fields.

pub(crate) fn speed_generic<T: Scalar>(z: T, p: &WindParams) -> T {
    let e = (z * (-1.0 / p.delta)).exp();
    (e + 1.0).recip() * p.w0
}

pub(crate) fn gradient_generic<T: Scalar>(z: T, p: &WindParams) -> T {
    let e = (z * (-1.0 / p.delta)).exp();
    e * p.w0 / ((e + 1.0).sqr() * p.delta)
}

pub(crate) fn rate_generic<T: Scalar>(z: T, v: T, gamma: T, p: &WindParams) -> T {
    gradient_generic(z, p) * v * gamma.sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: WindParams = WindParams { w0: 7.8, delta: 7.0 };

    #[test]
    fn midpoint_and_saturation() {
        assert!((wind_speed(0.0, &P).unwrap() - 3.9).abs() < 1e-12);
        assert!((wind_speed(1e4, &P).unwrap() - 7.8).abs() < 1e-12);
        assert_eq!(wind_speed(-1e6, &P).unwrap(), 0.0);
        assert!((wind_speed(7.0, &P).unwrap() - 5.7023).abs() < 1e-4);
    }

    #[test]
    fn gradient_values() {
        assert!((wind_gradient(0.0, &P).unwrap() - 7.8 / 28.0).abs() < 1e-12);
        assert!((wind_gradient(10.0, &P).unwrap() - 0.173771).abs() < 1e-6);
        assert!(wind_gradient(1e4, &P).unwrap() < 1e-100);
        assert_eq!(wind_gradient(-1e6, &P).unwrap(), 0.0);
    }

    #[test]
    fn rate_values() {
        assert!((wind_rate(10.0, 14.0, 0.6, &P).unwrap() - 1.373_658).abs() < 1e-6);
        assert_eq!(wind_rate(3.0, 14.0, 0.0, &P).unwrap(), 0.0);
        assert_eq!(wind_rate(3.0, 0.0, 0.4, &P).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_inputs_rejected() {
        assert!(wind_speed(f64::NAN, &P).is_err());
        assert!(wind_gradient(f64::INFINITY, &P).is_err());
        assert!(wind_rate(1.0, f64::NAN, 0.1, &P).is_err());
    }

    #[test]
    fn invalid_params() {
        let bad = WindParams { w0: 7.8, delta: 0.0 };
        match bad.validate() {
            Err(SoaringError::InvalidParameter { field, .. }) => assert_eq!(field, "delta"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(WindParams { w0: -1.0, delta: 1.0 }.validate().is_err());
    }

    #[test]
    fn gradient_matches_central_difference() {
        let h = 1e-4 * P.delta;
        let mut z = -5.0 * P.delta;
        while z <= 5.0 * P.delta {
            let fd = (wind_speed(z + h, &P).unwrap() - wind_speed(z - h, &P).unwrap()) / (2.0 * h);
            let g = wind_gradient(z, &P).unwrap();
            assert!(((fd - g) / g).abs() <= 1e-6, "z={z}: fd={fd} g={g}");
            z += 0.25;
        }
    }

    #[test]
    fn thin_layer_approaches_step_profile() {
        for &z in &[-3.0, -0.5, 0.5, 2.0, 10.0] {
            let delta = f64::abs(z) / 50.0;
            let p = WindParams { w0: 7.8, delta };
            let step = if z > 0.0 { 7.8 } else { 0.0 };
            assert!((wind_speed(z, &p).unwrap() - step).abs() <= 1e-9);
        }
    }

    #[test]
    fn generic_forms_agree() {
        for &z in &[-20.0, 0.0, 3.3, 15.0] {
            assert!((speed_generic(z, &P) - wind_speed(z, &P).unwrap()).abs() < 1e-14);
            assert!((gradient_generic(z, &P) - wind_gradient(z, &P).unwrap()).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn speed_is_monotone_and_bounded(z in -60.0f64..60.0, dz in 0.0f64..10.0) {
            let a = wind_speed(z, &P).unwrap();
            let b = wind_speed(z + dz, &P).unwrap();
            prop_assert!(b >= a);
            prop_assert!(a > 0.0 && a < P.w0);
            prop_assert!(wind_gradient(z, &P).unwrap() > 0.0);
            prop_assert!(wind_gradient(z, &P).unwrap() <= wind_gradient(0.0, &P).unwrap());
        }

        #[test]
        fn rate_is_odd_in_gamma(z in -30.0f64..30.0, v in 0.0f64..40.0, g in -1.5f64..1.5) {
            let a = wind_rate(z, v, g, &P).unwrap();
            let b = wind_rate(z, v, -g, &P).unwrap();
            prop_assert!((a + b).abs() <= 1e-14 * (1.0 + a.abs()));
        }
    }
}
