//! Three-degree-of-freedom point-mass glider in a vertical wind shear, in
//! control-affine form `ẋ = f(x) + b·u` with the roll rate `u = φ̇` as the
//! single input and the lift coefficient held fixed.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SoaringError};
use crate::jet::Scalar;
use crate::windfield::{self, WindParams};

pub const STATE_DIM: usize = 7;

/// Guard below which `cos γ` and `V` are considered singular.
pub const SINGULARITY_EPS: f64 = 1e-6;

/// Glider state. Positions in an East-North-Up frame, angles in radians and
/// unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlightState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    #[serde(rename = "V", alias = "v")]
    pub v: f64,
    pub gamma: f64,
    pub psi: f64,
    pub phi: f64,
}

impl Default for FlightState {
    /// The climb-phase initial point used for both the controllability
    /// analysis and the closed-loop runs.
    fn default() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            z: 10.0,
            v: 14.0,
            gamma: 0.6,
            psi: 1.4,
            phi: -0.1,
        }
    }
}

impl FlightState {
    pub fn from_array(a: [f64; STATE_DIM]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            z: a[2],
            v: a[3],
            gamma: a[4],
            psi: a[5],
            phi: a[6],
        }
    }

    pub fn to_array(&self) -> [f64; STATE_DIM] {
        [self.x, self.y, self.z, self.v, self.gamma, self.psi, self.phi]
    }

    pub fn validate(&self) -> Result<()> {
        let names = ["x", "y", "z", "V", "gamma", "psi", "phi"];
        for (name, v) in names.iter().zip(self.to_array()) {
            if !v.is_finite() {
                return Err(SoaringError::invalid(*name, "must be finite"));
            }
        }
        if self.v <= 0.0 {
            return Err(SoaringError::invalid("V", "airspeed must be > 0"));
        }
        if self.gamma.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(SoaringError::invalid("gamma", "|gamma| must be < pi/2"));
        }
        Ok(())
    }

    pub(crate) fn guard(&self) -> Result<()> {
        if self.to_array().iter().any(|v| !v.is_finite()) {
            return Err(SoaringError::Singularity {
                state: self.to_array().to_vec(),
                reason: "non-finite state".into(),
            });
        }
        if self.v < SINGULARITY_EPS {
            return Err(SoaringError::Singularity {
                state: self.to_array().to_vec(),
                reason: "airspeed vanished".into(),
            });
        }
        if self.gamma.cos().abs() < SINGULARITY_EPS {
            return Err(SoaringError::Singularity {
                state: self.to_array().to_vec(),
                reason: "vertical flight path (cos gamma = 0)".into(),
            });
        }
        Ok(())
    }
}

/// Bird and wind constants plus the fixed lift coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirdWindParams {
    pub mass: f64,
    pub wing_area: f64,
    pub cd0: f64,
    pub k_induced: f64,
    pub rho: f64,
    pub g: f64,
    pub wind: WindParams,
    pub cl_fixed: f64,
}

impl Default for BirdWindParams {
    /// Albatross characteristics with the best-glide lift coefficient.
    fn default() -> Self {
        let cd0 = 0.01;
        let k_induced = 0.0156;
        Self {
            mass: 9.5,
            wing_area: 0.65,
            cd0,
            k_induced,
            rho: 1.2,
            g: 9.8,
            wind: WindParams::default(),
            cl_fixed: best_glide_cl(cd0, k_induced),
        }
    }
}

/// Lift coefficient minimizing `C_D / C_L` for the parabolic polar.
pub fn best_glide_cl(cd0: f64, k_induced: f64) -> f64 {
    (cd0 / k_induced).sqrt()
}

impl BirdWindParams {
    pub fn with_cl(mut self, cl: f64) -> Self {
        self.cl_fixed = cl;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("wing_area", self.wing_area),
            ("rho", self.rho),
            ("g", self.g),
            ("cl_fixed", self.cl_fixed),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(SoaringError::invalid(name, "must be finite and > 0"));
            }
        }
        // zero drag is allowed so the conservative limit can be exercised
        for (name, v) in [("cd0", self.cd0), ("k_induced", self.k_induced)] {
            if !v.is_finite() || v < 0.0 {
                return Err(SoaringError::invalid(name, "must be finite and >= 0"));
            }
        }
        self.wind.validate()
    }

    fn dynamic_pressure_area<T: Scalar>(&self, v: T) -> T {
        v.sqr() * (0.5 * self.rho * self.wing_area)
    }
}

/// Sign applied to the `m·Ẇ·cos γ·sin ψ` coupling in the airspeed equation.
///
/// `+1` is the equations-of-motion convention; the energy-rate derivation
/// used to motivate the extremum-seeking objective carries `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(try_from = "i64", into = "i64")]
pub enum WindCouplingSign {
    #[default]
    Positive,
    Negative,
}

impl WindCouplingSign {
    pub fn value(self) -> f64 {
        match self {
            Self::Positive => 1.0,
            Self::Negative => -1.0,
        }
    }
}

impl TryFrom<i64> for WindCouplingSign {
    type Error = String;
    fn try_from(v: i64) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Self::Positive),
            -1 => Ok(Self::Negative),
            other => Err(format!("wind coupling sign must be +1 or -1, got {other}")),
        }
    }
}

impl From<WindCouplingSign> for i64 {
    fn from(s: WindCouplingSign) -> i64 {
        match s {
            WindCouplingSign::Positive => 1,
            WindCouplingSign::Negative => -1,
        }
    }
}

impl std::str::FromStr for WindCouplingSign {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "1" | "+1" | "+" => Ok(Self::Positive),
            "-1" | "-" => Ok(Self::Negative),
            other => Err(format!("expected +1 or -1, got `{other}`")),
        }
    }
}

/// How lift and drag enter the drift when it is differentiated.
///
/// `AirspeedDependent` is the physical model (`L, D ∝ V²`). `Frozen` holds
/// the two forces at fixed values, which is how closed-form bracket
/// expressions treating `L` and `D` as symbols are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForceModel {
    AirspeedDependent,
    Frozen { lift: f64, drag: f64 },
}

impl ForceModel {
    /// Frozen forces taken from the airspeed-dependent model at `v`.
    pub fn frozen_at(v: f64, p: &BirdWindParams) -> Result<Self> {
        let (lift, drag) = lift_drag(v, p.cl_fixed, p)?;
        Ok(Self::Frozen { lift, drag })
    }
}

/// Lift and drag in newtons for airspeed `v` and lift coefficient `cl`.
pub fn lift_drag(v: f64, cl: f64, p: &BirdWindParams) -> Result<(f64, f64)> {
    if !v.is_finite() || !cl.is_finite() {
        return Err(SoaringError::NonFinite("airspeed or lift coefficient"));
    }
    if v < 0.0 {
        return Err(SoaringError::invalid("v", "airspeed must be >= 0"));
    }
    let q = p.dynamic_pressure_area(v);
    Ok((q * cl, q * (p.cd0 + p.k_induced * cl * cl)))
}

fn forces_generic<T: Scalar>(v: T, cl: f64, p: &BirdWindParams, model: ForceModel) -> (T, T) {
    match model {
        ForceModel::AirspeedDependent => {
            let q = p.dynamic_pressure_area(v);
            (q * cl, q * (p.cd0 + p.k_induced * cl * cl))
        }
        ForceModel::Frozen { lift, drag } => (T::cst(lift), T::cst(drag)),
    }
}

/// The six translational/flight-path rates for a given lift coefficient and
/// roll angle.
fn translational_rates<T: Scalar>(
    s: &[T],
    cl: f64,
    phi: T,
    p: &BirdWindParams,
    sgn: WindCouplingSign,
    model: ForceModel,
) -> [T; 6] {
    let (z, v, gamma, psi) = (s[2], s[3], s[4], s[5]);
    let m = p.mass;
    let g = p.g;
    let (cg, sg) = (gamma.cos(), gamma.sin());
    let (cp, sp) = (psi.cos(), psi.sin());
    let wind = windfield::speed_generic(z, &p.wind);
    let wdot = windfield::rate_generic(z, v, gamma, &p.wind);
    let (lift, drag) = forces_generic(v, cl, p, model);
    let mv = v * m;
    [
        v * cg * cp,
        v * cg * sp - wind,
        v * sg,
        (-drag - sg * (m * g) + wdot * cg * sp * (m * sgn.value())) / m,
        (lift * phi.cos() - cg * (m * g) - wdot * sg * sp * m) / mv,
        (lift * phi.sin() + wdot * cp * m) / (mv * cg),
    ]
}

/// Drift `f(x)` evaluated on any [`Scalar`], without singularity guards.
pub fn drift_generic<T: Scalar>(
    s: &[T],
    p: &BirdWindParams,
    sgn: WindCouplingSign,
    model: ForceModel,
) -> [T; STATE_DIM] {
    let r = translational_rates(s, p.cl_fixed, s[6], p, sgn, model);
    [r[0], r[1], r[2], r[3], r[4], r[5], T::cst(0.0)]
}

/// Drift vector field `f(x)`.
pub fn drift_field(
    s: &FlightState,
    p: &BirdWindParams,
    sgn: WindCouplingSign,
) -> Result<[f64; STATE_DIM]> {
    s.guard()?;
    Ok(drift_generic(&s.to_array(), p, sgn, ForceModel::AirspeedDependent))
}

/// Control vector field `b`: unit vector in the roll slot.
pub fn control_field() -> [f64; STATE_DIM] {
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]
}

/// `ẋ = f(x) + b·u`.
pub fn state_derivative(
    s: &FlightState,
    u: f64,
    p: &BirdWindParams,
    sgn: WindCouplingSign,
) -> Result<[f64; STATE_DIM]> {
    let mut d = drift_field(s, p, sgn)?;
    d[6] += u;
    Ok(d)
}

/// Original two-input model with controls `(C_L, φ)` acting on the 6-state
/// `[x, y, z, V, γ, ψ]`. Used to replay trajectories produced by optimal
/// control solvers.
pub fn legacy_two_input_derivative(
    s6: &[f64; 6],
    cl: f64,
    phi: f64,
    p: &BirdWindParams,
    sgn: WindCouplingSign,
) -> Result<[f64; 6]> {
    let full = FlightState::from_array([s6[0], s6[1], s6[2], s6[3], s6[4], s6[5], phi]);
    full.guard()?;
    if !cl.is_finite() {
        return Err(SoaringError::NonFinite("lift coefficient"));
    }
    Ok(translational_rates(s6, cl, phi, p, sgn, ForceModel::AirspeedDependent))
}
